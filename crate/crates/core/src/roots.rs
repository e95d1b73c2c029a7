//! Dense complex polynomial root finding for the sampling lab.
//!
//! Coefficients run from constant to leading term. The solver is
//! Aberth-Ehrlich simultaneous iteration, started on a circle between the
//! inner and outer Fujiwara radii. Newton ratios are evaluated through the
//! reversed polynomial outside the unit circle, so sparse high-degree inputs
//! with huge dynamic range cannot overflow. A root counts as converged when
//! its residual drops below the running rounding-error majorant of the
//! evaluation itself, which is the best any polishing can certify; converged
//! roots then get two Newton steps in compensated arithmetic. Every result
//! carries the largest relative backward error over the returned roots.

use num_complex::Complex64;
use thiserror::Error;

/// Simultaneous-iteration sweeps allowed per start configuration.
const MAX_SWEEPS: usize = 1000;
/// Fresh start configurations tried before reporting failure.
const STARTS: usize = 4;
/// Radius scale and angular offset per start; the first pair is the
/// geometric-mean circle, the rest break whatever symmetry stalled it.
const START_TWEAKS: [(f64, f64); STARTS] = [(1.0, 0.37), (2.3, 1.09), (0.41, 2.71), (5.0, 0.13)];

#[derive(Debug, Error)]
pub enum RootsError {
    #[error("constant polynomial has no roots to find")]
    ConstantPolynomial,
    #[error("leading or constant coefficient is zero; deflate before solving")]
    ZeroEndCoefficient,
    #[error("iteration did not converge after {0} restarts")]
    NoConvergence(usize),
}

/// Roots of one polynomial plus the worst relative backward error
/// max |p(root)| / sum |c_k||root|^k over the set.
#[derive(Debug, Clone)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub backward_error: f64,
}

/// Plain Horner evaluation.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut s = *coeffs.last().expect("nonempty coefficients");
    for &c in coeffs.iter().rev().skip(1) {
        s = s * z + c;
    }
    s
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Complex product with its rounding residual, so value + residual carries
/// roughly twice the working precision.
#[inline]
fn cmul_err(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (p1, e1) = two_prod(a.re, b.re);
    let (p2, e2) = two_prod(a.im, b.im);
    let (p3, e3) = two_prod(a.re, b.im);
    let (p4, e4) = two_prod(a.im, b.re);
    let (re, e5) = two_sum(p1, -p2);
    let (im, e6) = two_sum(p3, p4);
    let err = Complex64::new(e1 - e2 + e5, e3 + e4 + e6);
    (Complex64::new(re, im), err)
}

#[inline]
fn cadd_err(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (re, e1) = two_sum(a.re, b.re);
    let (im, e2) = two_sum(a.im, b.im);
    (Complex64::new(re, im), Complex64::new(e1, e2))
}

/// Compensated Horner: the rounding residuals of every product and sum are
/// propagated through a second Horner recurrence and added back at the end.
pub fn horner_compensated(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut s = *coeffs.last().expect("nonempty coefficients");
    let mut err = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev().skip(1) {
        let (prod, pe) = cmul_err(s, z);
        let (sum, se) = cadd_err(prod, c);
        err = err * z + (pe + se);
        s = sum;
    }
    s + err
}

/// Relative backward error |p(z)| / sum |c_k||z|^k of z as a root.
pub fn backward_error(coeffs: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    let mut majorant = 0.0;
    for &c in coeffs.iter().rev() {
        majorant = majorant * r + c.norm();
    }
    if majorant == 0.0 {
        return 0.0;
    }
    horner_compensated(coeffs, z).norm() / majorant
}

/// Coefficients of the derivative.
pub fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Upper bound on root magnitudes: 2 max_k |c_{d-k}/c_d|^{1/k}, computed in
/// log space so extreme coefficient ratios cannot overflow.
pub fn fujiwara_bound(coeffs: &[Complex64]) -> f64 {
    let d = coeffs.len() - 1;
    let lead = coeffs[d].norm().ln();
    let mut best = f64::NEG_INFINITY;
    for k in 1..=d {
        let a = coeffs[d - k].norm();
        if a > 0.0 {
            best = best.max((a.ln() - lead) / k as f64);
        }
    }
    2.0 * best.exp()
}

/// Value, derivative, and the positive-coefficient majorant sum |c_k||z|^k,
/// all in one pass.
fn eval_full(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let r = z.norm();
    let mut p = *coeffs.last().unwrap();
    let mut dp = Complex64::new(0.0, 0.0);
    let mut majorant = p.norm();
    for &c in coeffs.iter().rev().skip(1) {
        dp = dp * z + p;
        p = p * z + c;
        majorant = majorant * r + c.norm();
    }
    (p, dp, majorant)
}

/// One root's state inside a sweep: the Newton ratio p/p' and whether the
/// residual already sits at rounding level.
fn newton_ratio(coeffs: &[Complex64], rev: &[Complex64], z: Complex64) -> (Complex64, bool) {
    let d = (coeffs.len() - 1) as f64;
    let noise = 4.0 * (d + 1.0) * f64::EPSILON;
    if z.norm_sqr() <= 1.0 {
        let (p, dp, majorant) = eval_full(coeffs, z);
        if p.norm() <= noise * majorant {
            return (Complex64::new(0.0, 0.0), true);
        }
        (p / dp, false)
    } else {
        // p(z) = z^d q(1/z) with q reversed, so p'/p = d/z - q'(u)/q(u) u^2
        // and the huge z^d factor cancels from the residual test.
        let u = z.inv();
        let (q, dq, majorant) = eval_full(rev, u);
        if q.norm() <= noise * majorant {
            return (Complex64::new(0.0, 0.0), true);
        }
        let logd = d * u - u * u * (dq / q);
        (logd.inv(), false)
    }
}

/// All roots of a dense polynomial with nonzero constant and leading
/// coefficients. Returned sorted by real then imaginary part, so the output
/// is a deterministic function of the input.
pub fn all_roots(coeffs: &[Complex64]) -> Result<RootSet, RootsError> {
    if coeffs.len() < 2 {
        return Err(RootsError::ConstantPolynomial);
    }
    if coeffs[0].norm() == 0.0 || coeffs[coeffs.len() - 1].norm() == 0.0 {
        return Err(RootsError::ZeroEndCoefficient);
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let work: Vec<Complex64> = coeffs.iter().map(|&c| c / scale).collect();
    let d = work.len() - 1;
    if d == 1 {
        let root = -work[0] / work[1];
        let eta = backward_error(&work, root);
        return Ok(RootSet {
            roots: vec![root],
            backward_error: eta,
        });
    }
    let rev: Vec<Complex64> = work.iter().rev().copied().collect();
    let outer = fujiwara_bound(&work);
    let inner = 1.0 / fujiwara_bound(&rev);
    let ring = (outer * inner).sqrt();

    for (start, &(stretch, phase)) in START_TWEAKS.iter().enumerate() {
        let radius = ring * stretch;
        let mut z: Vec<Complex64> = (0..d)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + phase;
                Complex64::from_polar(radius, theta)
            })
            .collect();
        let mut settled = vec![false; d];

        for _ in 0..MAX_SWEEPS {
            let mut active = false;
            for k in 0..d {
                if settled[k] {
                    continue;
                }
                let (ratio, at_noise) = newton_ratio(&work, &rev, z[k]);
                if at_noise {
                    settled[k] = true;
                    continue;
                }
                let mut repel = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    if j != k {
                        let gap = z[k] - z[j];
                        if gap.norm_sqr() == 0.0 {
                            // exact collision: nudge instead of dividing by zero
                            repel += Complex64::new(1e8, 1e8);
                        } else {
                            repel += gap.inv();
                        }
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - ratio * repel;
                let step = if denom.norm_sqr() == 0.0 { ratio } else { ratio / denom };
                z[k] -= step;
                if step.norm() <= 1e-14 * (1.0 + z[k].norm()) {
                    settled[k] = true;
                } else {
                    active = true;
                }
            }
            if !active {
                break;
            }
        }

        if settled.iter().all(|&s| s) {
            let deriv = derivative(&work);
            let mut eta = 0.0f64;
            for r in z.iter_mut() {
                for _ in 0..2 {
                    let dp = horner(&deriv, *r);
                    if dp.norm_sqr() == 0.0 {
                        break;
                    }
                    *r -= horner_compensated(&work, *r) / dp;
                }
                eta = eta.max(backward_error(&work, *r));
            }
            z.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
            return Ok(RootSet {
                roots: z,
                backward_error: eta,
            });
        }
        let _ = start;
    }
    Err(RootsError::NoConvergence(STARTS))
}
