//! The potential b(λ,ρ) on the simplex and its restriction to segments from
//! the center μ(ρ) to a boundary point, with the derivative family and the
//! monotone inverse used by the distribution integrals.
//!
//! b(λ,ρ) = Σ λ_i ln(λ_i/μ_i(ρ)) is the relative entropy of λ against μ(ρ):
//! nonnegative, strictly convex in λ, zero exactly at λ = μ(ρ).

use crate::matrix::Matrix;
use crate::scalar::{real, Real};
use crate::simplex::{moment_hessians, moment_jacobian, moment_map, RadialPoint, SimplexPoint};

/// g(r) = (1+r)ln(1+r) − r, the integrand building block of the potential.
/// Nonnegative for r > −1, ~ r²/2 near zero; the series branch avoids the
/// cancellation of the two O(r) parts.
fn gfun<S: Real>(r: S) -> S {
    if r.abs() < real(1e-4) {
        let c2 = real::<S>(0.5);
        let c3 = real::<S>(-1.0 / 6.0);
        let c4 = real::<S>(1.0 / 12.0);
        let c5 = real::<S>(-1.0 / 20.0);
        r * r * (c2 + r * (c3 + r * (c4 + r * c5)))
    } else {
        (S::one() + r) * r.ln_1p() - r
    }
}

/// w(r) = ln(1+r) − r, ~ −r²/2 near zero.
fn wfun<S: Real>(r: S) -> S {
    if r.abs() < real(1e-4) {
        let c2 = real::<S>(-0.5);
        let c3 = real::<S>(1.0 / 3.0);
        let c4 = real::<S>(-0.25);
        let c5 = real::<S>(0.2);
        r * r * (c2 + r * (c3 + r * (c4 + r * c5)))
    } else {
        r.ln_1p() - r
    }
}

/// b(λ,ρ). Coordinates below 1e−300 contribute exactly zero (the 0·ln 0
/// convention); the result is clamped at 0 against round-off.
pub fn b_eval<S: Real>(lambda: &SimplexPoint<S>, rho: &RadialPoint<S>) -> S {
    debug_assert_eq!(lambda.m(), rho.m());
    let l = rho.log_partition();
    let floor = real::<S>(1e-300);
    let mut acc = S::zero();
    for (i, &v) in lambda.coords().iter().enumerate() {
        if v <= S::zero() || v < floor {
            continue;
        }
        // ln μ_i = ρ_i − L, so the log ratio needs no exponentials
        acc += v * (v.ln() - rho.component(i) + l);
    }
    acc.max(S::zero())
}

/// max_λ b(λ,ρ), attained at a vertex: log(1+Σe^ρ) − min(0, ρ₁,…,ρ_m).
pub fn b_max<S: Real>(rho: &RadialPoint<S>) -> S {
    let mut lowest = S::zero();
    for &r in rho.coords() {
        if r < lowest {
            lowest = r;
        }
    }
    rho.log_partition() - lowest
}

/// The restriction B(s) = b((1−s)μ(ρ) + s·x, ρ) of the potential to the
/// segment from the center μ(ρ) to a target point x, usually on ∂Δ.
///
/// B is zero at s = 0 with zero slope, strictly convex, and increases to
/// b(x,ρ) at s = 1. When x lies on the boundary the slope and curvature
/// diverge at s = 1; `slope` and `curvature` return +∞ there, while the
/// ρ-derivatives have finite limits that are returned in closed form.
#[derive(Clone, Debug)]
pub struct Segment<S> {
    rho: RadialPoint<S>,
    mu: Vec<S>,
    d: Vec<S>,
    ratio: Vec<S>,
    total: S,
    bss0: S,
    jac: Matrix<S>,
}

impl<S: Real> Segment<S> {
    pub fn new(rho: &RadialPoint<S>, x: &SimplexPoint<S>) -> Self {
        debug_assert_eq!(rho.m(), x.m());
        let mu = moment_map(rho);
        let d: Vec<S> = x
            .coords()
            .iter()
            .zip(mu.coords())
            .map(|(&xi, &mi)| xi - mi)
            .collect();
        let ratio: Vec<S> = d.iter().zip(mu.coords()).map(|(&di, &mi)| di / mi).collect();
        let mut bss0 = S::zero();
        for (&di, &mi) in d.iter().zip(mu.coords()) {
            bss0 += di * di / mi;
        }
        let total = b_eval(x, rho);
        let jac = moment_jacobian(rho);
        Segment {
            rho: rho.clone(),
            mu: mu.coords().to_vec(),
            d,
            ratio,
            total,
            bss0,
            jac,
        }
    }

    pub fn m(&self) -> usize {
        self.rho.m()
    }

    /// b(x,ρ), the value at s = 1.
    pub fn total(&self) -> S {
        self.total
    }

    /// B''(0) = Σ (x_i−μ_i)²/μ_i, the curvature at the center.
    pub fn center_curvature(&self) -> S {
        self.bss0
    }

    /// ∂μ_i/∂ρ_p at this ρ, rows i ∈ 0..=m, column p−1.
    pub fn jacobian(&self) -> &Matrix<S> {
        &self.jac
    }

    fn lam(&self, i: usize, s: S) -> S {
        // μ_i(1 + s·d_i/μ_i); for a zero target coordinate the ratio is
        // exactly −1 and 1−s is exact, so no cancellation near s = 1
        self.mu[i] * (S::one() + s * self.ratio[i])
    }

    /// B(s). Every term μ_i·g(s·d_i/μ_i) is nonnegative, so the sum carries
    /// no cancellation and the result is exact to relative round-off.
    pub fn value(&self, s: S) -> S {
        if s == S::zero() {
            return S::zero();
        }
        if s == S::one() {
            return self.total;
        }
        let mut acc = S::zero();
        for (i, &mi) in self.mu.iter().enumerate() {
            acc += mi * gfun(s * self.ratio[i]);
        }
        acc
    }

    /// B'(s) = Σ d_i ln(λ_i(s)/μ_i); +∞ at s = 1 for boundary targets.
    pub fn slope(&self, s: S) -> S {
        if s == S::zero() {
            return S::zero();
        }
        // (1/s)·Σ μ_i r_i ln(1+r_i): every term nonnegative
        let mut acc = S::zero();
        for (i, &mi) in self.mu.iter().enumerate() {
            let r = s * self.ratio[i];
            acc += mi * r * r.ln_1p();
        }
        acc / s
    }

    /// B''(s) = Σ d_i²/λ_i(s); +∞ at s = 1 for boundary targets.
    pub fn curvature(&self, s: S) -> S {
        if s == S::zero() {
            return self.bss0;
        }
        let mut acc = S::zero();
        for (i, &di) in self.d.iter().enumerate() {
            acc += di * di / self.lam(i, s);
        }
        acc
    }

    /// ∂B/∂ρ_p for p = 1..m. Exactly zero at s = 0; at s = 1 the closed
    /// limit μ_p − x_p.
    pub fn rho_grad(&self, s: S) -> Vec<S> {
        let m = self.m();
        if s == S::zero() {
            return vec![S::zero(); m];
        }
        if s == S::one() {
            return (1..=m).map(|p| -self.d[p]).collect();
        }
        let omss = S::one() - s;
        (1..=m)
            .map(|p| {
                let mut acc = S::zero();
                for i in 0..=m {
                    acc += self.jac[(i, p - 1)] * wfun(s * self.ratio[i]);
                }
                // −s²d_p + (1−s)·Σ μ_{i,p} w(s d_i/μ_i): both parts O(s²)
                omss * acc - s * s * self.d[p]
            })
            .collect()
    }

    /// ∂²B/∂ρ_p∂s. Exactly zero at s = 0; diverges as s → 1 for boundary
    /// targets (the returned value is then non-finite).
    pub fn rho_grad_slope(&self, s: S) -> Vec<S> {
        let m = self.m();
        if s == S::zero() {
            return vec![S::zero(); m];
        }
        let omss = S::one() - s;
        let two = real::<S>(2.0);
        (1..=m)
            .map(|p| {
                let mut acc = -two * s * self.d[p];
                for i in 0..=m {
                    let r = s * self.ratio[i];
                    acc -= self.jac[(i, p - 1)]
                        * (wfun(r) + omss * s * self.ratio[i] * self.ratio[i] / (S::one() + r));
                }
                acc
            })
            .collect()
    }

    /// ∂²B/∂ρ_p∂ρ_q as an m×m matrix. Exactly zero at s = 0; the closed
    /// limit ∂μ_p/∂ρ_q at s = 1.
    pub fn rho_hessian(&self, s: S) -> Matrix<S> {
        let m = self.m();
        if s == S::zero() {
            return Matrix::zeros(m, m);
        }
        if s == S::one() {
            return Matrix::from_fn(m, m, |p1, q1| self.jac[(p1 + 1, q1)]);
        }
        let hess = moment_hessians(&self.rho);
        let omss = S::one() - s;
        let two = real::<S>(2.0);
        Matrix::from_fn(m, m, |p1, q1| {
            let mut acc = (two * s - S::one()) * self.jac[(p1 + 1, q1)];
            for i in 0..=m {
                let r = s * self.ratio[i];
                acc += omss * omss * self.jac[(i, p1)] * self.jac[(i, q1)] / self.lam(i, s)
                    + omss * hess[i][(p1, q1)] * r.ln_1p();
            }
            acc
        })
    }

    /// h(t): the unique s ∈ [0,1] with B(s) = t, extended by 0 below and 1
    /// above the range. Bracketed Newton with a bisection safeguard;
    /// converges to |B(h)−t| ≤ 1e−12·max(1,t).
    pub fn invert(&self, t: S) -> S {
        if t <= S::zero() {
            return S::zero();
        }
        if t >= self.total {
            return S::one();
        }
        let tol = S::tol(1e-12) * S::one().max(t);
        let mut lo = S::zero();
        let mut hi = S::one();
        // B ≈ ½B''(0)s² near the center gives the starting point
        let mut s = (real::<S>(2.0) * t / self.bss0).sqrt();
        if !s.is_finite() || s <= S::zero() || s >= S::one() {
            s = real(0.5);
        }
        for _ in 0..200 {
            let f = self.value(s) - t;
            if f.abs() <= tol {
                return s;
            }
            if f > S::zero() {
                hi = s;
            } else {
                lo = s;
            }
            let fp = self.slope(s);
            let next = s - f / fp;
            s = if next.is_finite() && next > lo && next < hi {
                next
            } else {
                (lo + hi) * real(0.5)
            };
        }
        s
    }

    /// h'(t) = 1/B'(h(t)): +∞ at t = 0, 0 for t ≥ b(x,ρ).
    pub fn invert_deriv(&self, t: S) -> S {
        if t <= S::zero() {
            return S::infinity();
        }
        if t >= self.total {
            return S::zero();
        }
        S::one() / self.slope(self.invert(t))
    }

    /// ∂h/∂ρ_p = −B_ρp(h)/B'(h); zero at both ends of the range.
    pub fn invert_rho_grad(&self, t: S) -> Vec<S> {
        let m = self.m();
        if t <= S::zero() || t >= self.total {
            return vec![S::zero(); m];
        }
        let h = self.invert(t);
        let slope = self.slope(h);
        self.rho_grad(h).into_iter().map(|g| -g / slope).collect()
    }
}

/// For m = 1: the parameter s̃ at which the segment toward λ₁ = 1 reaches the
/// same potential value as the segment toward λ₁ = 0 reaches at s. As s → 0
/// the ratio s̃/s tends to e^ρ; s̃ saturates at 1 once the matched value
/// exceeds the potential of the far vertex.
pub fn stilde<S: Real>(s: S, rho: S) -> S {
    let rp = RadialPoint::new(vec![rho]).expect("finite rho");
    let toward_zero = Segment::new(&rp, &SimplexPoint::vertex(1, 0));
    let toward_one = Segment::new(&rp, &SimplexPoint::vertex(1, 1));
    toward_one.invert(toward_zero.value(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp(rho: &[f64]) -> RadialPoint<f64> {
        RadialPoint::new(rho.to_vec()).unwrap()
    }

    fn interior(m: usize, seed: &mut u64) -> SimplexPoint<f64> {
        // a small deterministic LCG keeps these tests dependency-free
        let mut tail = Vec::with_capacity(m);
        let mut left = 1.0;
        for _ in 0..m {
            *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = ((*seed >> 11) as f64) / ((1u64 << 53) as f64);
            let v = left * 0.8 * u;
            tail.push(v);
            left -= v;
        }
        SimplexPoint::from_tail(&tail).unwrap()
    }

    #[test]
    fn potential_known_values() {
        // vertex values are log-partition minus the vertex coordinate
        let v0 = SimplexPoint::vertex(1, 0);
        let v1 = SimplexPoint::vertex(1, 1);
        assert!((b_eval(&v0, &rp(&[0.0])) - 2f64.ln()).abs() < 1e-15);
        assert!((b_eval(&v1, &rp(&[1.0])) - (1f64.exp().ln_1p() - 1.0)).abs() < 1e-15);
        assert!((b_eval(&v1, &rp(&[1.0])) - 0.31326168751822286).abs() < 1e-14);
        let mid = SimplexPoint::from_tail(&[0.5]).unwrap();
        assert_eq!(b_eval(&mid, &rp(&[0.0])), 0.0);
    }

    #[test]
    fn potential_is_zero_only_at_center() {
        let rho = rp(&[0.7, -0.4]);
        let mu = moment_map(&rho);
        assert!(b_eval(&mu, &rho) < 1e-15);
        let mut seed = 9u64;
        for _ in 0..50 {
            let lam = interior(2, &mut seed);
            let b = b_eval(&lam, &rho);
            assert!(b >= 0.0);
            let far = lam
                .coords()
                .iter()
                .zip(mu.coords())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if far > 1e-3 {
                assert!(b > 0.0);
            }
        }
    }

    #[test]
    fn potential_mirror_symmetry() {
        // m = 1: b(1−λ, −ρ) = b(λ, ρ)
        for (lam, rho) in [(0.3, 0.8), (0.9, -1.4), (0.05, 2.0)] {
            let a = b_eval(&SimplexPoint::from_tail(&[lam]).unwrap(), &rp(&[rho]));
            let b = b_eval(&SimplexPoint::from_tail(&[1.0 - lam]).unwrap(), &rp(&[-rho]));
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn b_max_examples() {
        assert!((b_max(&rp(&[2.0])) - 2.1269280110429727).abs() < 1e-14);
        assert!((b_max(&rp(&[0.0])) - 2f64.ln()).abs() < 1e-15);
        // equals the largest vertex value
        let rho = rp(&[1.3, -0.6]);
        let best = (0..=2)
            .map(|i| b_eval(&SimplexPoint::vertex(2, i), &rho))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((b_max(&rho) - best).abs() < 1e-14);
    }

    #[test]
    fn segment_midpoint_value() {
        let seg = Segment::new(&rp(&[0.0]), &SimplexPoint::vertex(1, 1));
        assert!((seg.value(0.5) - 0.13081203594113694).abs() < 1e-15);
        assert!((seg.total() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn segment_center_values_are_exact() {
        let seg = Segment::new(&rp(&[0.4, -1.1]), &SimplexPoint::vertex(2, 1));
        assert_eq!(seg.value(0.0), 0.0);
        assert_eq!(seg.slope(0.0), 0.0);
        assert!(seg.rho_grad(0.0).iter().all(|&g| g == 0.0));
        assert!(seg.rho_grad_slope(0.0).iter().all(|&g| g == 0.0));
        let h = seg.rho_hessian(0.0);
        for p in 0..2 {
            for q in 0..2 {
                assert_eq!(h[(p, q)], 0.0);
            }
        }
        assert_eq!(seg.curvature(0.0), seg.center_curvature());
    }

    #[test]
    fn segment_endpoint_closed_forms() {
        let rho = rp(&[0.9, -0.3]);
        let x = SimplexPoint::from_tail(&[0.0, 0.35]).unwrap();
        let seg = Segment::new(&rho, &x);
        assert_eq!(seg.value(1.0), seg.total());
        assert!(seg.slope(1.0).is_infinite());
        assert!(seg.curvature(1.0).is_infinite());
        let mu = moment_map(&rho);
        let g1 = seg.rho_grad(1.0);
        for p in 1..=2 {
            assert!((g1[p - 1] - (mu.component(p) - x.component(p))).abs() < 1e-15);
        }
        let h1 = seg.rho_hessian(1.0);
        let jac = moment_jacobian(&rho);
        for p in 1..=2 {
            for q in 1..=2 {
                assert_eq!(h1[(p - 1, q - 1)], jac[(p, q - 1)]);
            }
        }
    }

    #[test]
    fn segment_limits_approach_closed_forms_monotonically() {
        let rho = rp(&[0.9, -0.3]);
        let x = SimplexPoint::from_tail(&[0.0, 0.35]).unwrap();
        let seg = Segment::new(&rho, &x);
        let g1 = seg.rho_grad(1.0);
        let h1 = seg.rho_hessian(1.0);
        let mut prev_g = f64::INFINITY;
        let mut prev_h = f64::INFINITY;
        for k in 2..=6 {
            let s = 1.0 - 10f64.powi(-k);
            let g = seg.rho_grad(s);
            let gd = g
                .iter()
                .zip(&g1)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let hd = seg.rho_hessian(s).max_abs_diff(&h1);
            assert!(gd <= prev_g + 1e-15, "k={k}: {gd} vs {prev_g}");
            assert!(hd <= prev_h + 1e-15, "k={k}: {hd} vs {prev_h}");
            prev_g = gd;
            prev_h = hd;
        }
        assert!(prev_g < 1e-5);
        assert!(prev_h < 1e-4);
    }

    #[test]
    fn segment_derivatives_match_finite_differences() {
        let cases = [
            (vec![0.0], vec![1.0]),
            (vec![1.3], vec![0.0]),
            (vec![0.4, -0.9], vec![0.0, 0.55]),
            (vec![-0.2, 0.8, 0.1], vec![0.3, 0.0, 0.25]),
        ];
        let hstep = 1e-5;
        for (rho, tail) in cases {
            let m = rho.len();
            let x = SimplexPoint::from_tail(&tail).unwrap();
            let seg = Segment::new(&rp(&rho), &x);
            for s in [0.15, 0.5, 0.85] {
                let fd_s = (seg.value(s + hstep) - seg.value(s - hstep)) / (2.0 * hstep);
                assert!((fd_s - seg.slope(s)).abs() / seg.slope(s).max(1e-3) < 1e-6);
                let fd_ss = (seg.slope(s + hstep) - seg.slope(s - hstep)) / (2.0 * hstep);
                assert!((fd_ss - seg.curvature(s)).abs() / seg.curvature(s) < 1e-6);

                let grad = seg.rho_grad(s);
                let mixed = seg.rho_grad_slope(s);
                let hess = seg.rho_hessian(s);
                for p in 0..m {
                    let mut up = rho.clone();
                    up[p] += hstep;
                    let mut dn = rho.clone();
                    dn[p] -= hstep;
                    let segu = Segment::new(&rp(&up), &x);
                    let segd = Segment::new(&rp(&dn), &x);
                    let fd_g = (segu.value(s) - segd.value(s)) / (2.0 * hstep);
                    assert!(
                        (fd_g - grad[p]).abs() < 1e-9 + 1e-6 * grad[p].abs(),
                        "rho grad p={p}: {fd_g} vs {}",
                        grad[p]
                    );
                    let fd_m = (segu.slope(s) - segd.slope(s)) / (2.0 * hstep);
                    assert!(
                        (fd_m - mixed[p]).abs() < 1e-9 + 1e-6 * mixed[p].abs(),
                        "mixed p={p}: {fd_m} vs {}",
                        mixed[p]
                    );
                    for q in 0..m {
                        let fd_h = (segu.rho_grad(s)[q] - segd.rho_grad(s)[q]) / (2.0 * hstep);
                        assert!(
                            (fd_h - hess[(q, p)]).abs() < 1e-8 + 1e-6 * hess[(q, p)].abs(),
                            "hessian p={p} q={q}: {fd_h} vs {}",
                            hess[(q, p)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn segment_slope_nonnegative_and_convex() {
        let seg = Segment::new(&rp(&[0.8, -1.2]), &SimplexPoint::from_tail(&[0.6, 0.0]).unwrap());
        let mut prev = 0.0;
        for k in 0..=20 {
            let s = k as f64 / 20.0 * 0.999;
            let b = seg.value(s);
            assert!(b >= prev);
            prev = b;
            assert!(seg.slope(s) >= 0.0);
            assert!(seg.curvature(s) > 0.0);
        }
    }

    #[test]
    fn invert_round_trips() {
        let mut seed = 77u64;
        for m in 1..=3usize {
            for _ in 0..70 {
                let mut rho = Vec::new();
                for _ in 0..m {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
                    rho.push(((seed >> 11) as f64) / ((1u64 << 53) as f64) * 6.0 - 3.0);
                }
                let mut x = interior(m, &mut seed);
                // push onto a facet
                let f = (seed % (m as u64 + 1)) as usize;
                let mut coords = x.coords().to_vec();
                let removed = coords[f];
                coords[f] = 0.0;
                let other = (f + 1) % (m + 1);
                coords[other] += removed;
                x = SimplexPoint::from_tail(&coords[1..]).unwrap();
                let seg = Segment::new(&rp(&rho), &x);
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
                let t = seg.total() * ((seed >> 11) as f64) / ((1u64 << 53) as f64);
                let h = seg.invert(t);
                assert!((0.0..=1.0).contains(&h));
                assert!(
                    (seg.value(h) - t).abs() <= 1e-11 * t.max(1.0),
                    "m={m} t={t}: B(h)={}",
                    seg.value(h)
                );
            }
        }
    }

    #[test]
    fn invert_extends_beyond_range() {
        let seg = Segment::new(&rp(&[0.5]), &SimplexPoint::vertex(1, 0));
        assert_eq!(seg.invert(0.0), 0.0);
        assert_eq!(seg.invert(-3.0), 0.0);
        assert_eq!(seg.invert(seg.total()), 1.0);
        assert_eq!(seg.invert(seg.total() + 5.0), 1.0);
        assert!(seg.invert_deriv(0.0).is_infinite());
        assert_eq!(seg.invert_deriv(seg.total() + 1.0), 0.0);
        assert!(seg.invert_rho_grad(0.0).iter().all(|&g| g == 0.0));
        assert!(seg.invert_rho_grad(seg.total()).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn inverse_slope_product_limit() {
        // h(t)·h'(t) → 1/B''(0) as t → 0
        let seg = Segment::new(&rp(&[1.2, -0.7]), &SimplexPoint::from_tail(&[0.0, 0.6]).unwrap());
        let want = 1.0 / seg.center_curvature();
        for t in [1e-8, 1e-10, 1e-12] {
            let h = seg.invert(t);
            let got = h * seg.invert_deriv(t);
            assert!((got - want).abs() / want < 1e-3, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn inverse_rho_grad_vanishes_at_both_ends() {
        let seg = Segment::new(&rp(&[0.9]), &SimplexPoint::vertex(1, 1));
        // lower end: the gradient scales like sqrt(t), so it collapses fast
        let near0 = seg.invert_rho_grad(1e-10)[0].abs();
        let mid = seg.invert_rho_grad(seg.total() * 0.5)[0].abs();
        assert!(near0 < mid * 1e-3);
        // upper end: the slope blows up only logarithmically, so the decay is
        // slow but strictly monotone toward the exact zero at t = total
        let mut prev = mid;
        for k in [4, 8, 12] {
            let cur = seg.invert_rho_grad(seg.total() * (1.0 - 10f64.powi(-k)))[0].abs();
            assert!(cur < prev, "k={k}: {cur} vs {prev}");
            prev = cur;
        }
        assert!(prev < mid * 0.5);
        assert_eq!(seg.invert_rho_grad(seg.total())[0], 0.0);
        assert_eq!(seg.invert_rho_grad(seg.total() + 1.0)[0], 0.0);
    }

    #[test]
    fn invert_derivative_matches_finite_differences() {
        let seg = Segment::new(&rp(&[0.3, 0.9]), &SimplexPoint::from_tail(&[0.0, 0.2]).unwrap());
        for t in [0.05, 0.2, 0.6] {
            if t >= seg.total() {
                continue;
            }
            let hstep = 1e-6;
            let fd = (seg.invert(t + hstep) - seg.invert(t - hstep)) / (2.0 * hstep);
            let got = seg.invert_deriv(t);
            assert!((fd - got).abs() / got < 1e-5, "t={t}: {fd} vs {got}");
            let g = seg.invert_rho_grad(t);
            for p in 0..2 {
                let mut up = vec![0.3, 0.9];
                up[p] += hstep;
                let mut dn = vec![0.3, 0.9];
                dn[p] -= hstep;
                let x = SimplexPoint::from_tail(&[0.0, 0.2]).unwrap();
                let fd = (Segment::new(&rp(&up), &x).invert(t)
                    - Segment::new(&rp(&dn), &x).invert(t))
                    / (2.0 * hstep);
                assert!((fd - g[p]).abs() < 1e-6 + 1e-5 * g[p].abs(), "p={p}: {fd} vs {}", g[p]);
            }
        }
    }

    #[test]
    fn stilde_ratio_approaches_exp_rho() {
        for rho in [-2.0f64, -1.0, 1.0, 2.0] {
            let s = 1e-4;
            let ratio = stilde(s, rho) / s;
            let want = rho.exp();
            assert!(
                (ratio - want).abs() / want < 0.01,
                "rho={rho}: {ratio} vs {want}"
            );
        }
    }

    #[test]
    fn stilde_saturates() {
        // far vertex reached: matched parameter clamps at 1
        assert_eq!(stilde(0.999f64, 3.0), 1.0);
        // symmetric potential: s̃ = s at ρ = 0
        assert!((stilde(0.4f64, 0.0) - 0.4).abs() < 1e-10);
    }
}
