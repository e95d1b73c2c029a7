//! The fewnomial potential F_n(ρ) = log(1+|e^ρ|) − G_n(ρ) with
//! G_n(ρ) = ∫₀^∞ [1−D(t,ρ)]^n dt, its first and second ρ-derivatives, and
//! the limiting zero densities built from them.
//!
//! Differentiating G once moves onto D_ρ, which the distribution module
//! supplies directly. Differentiating twice is where the care lives: D_ρ
//! splits into a moving-weight part S̃ (facet masses μ_i change with ρ) and a
//! moving-level-set part S (the saturation radius h changes with ρ). The S
//! part is differentiated after substituting t = B(s,ρ,x), which freezes the
//! domain of integration at [0,1] × facet and turns the would-be boundary
//! terms into nothing. The resulting per-facet quantities are
//!
//!   T_i[p]    = ∫_facet ∫₀¹ s^{m−1} (1−D(B))^{n−1} (−B_ρp) ds dx,
//!   T_i'[p,q] = ∂/∂ρ_q T_i[p]   (chain rule through D and B),
//!
//! and the Hessian assembles from T, T', and one more t-integral against the
//! ρ-derivative of S̃. A Richardson finite-difference route over F and G is
//! shipped alongside as an independent path to the same numbers.

use num_rational::Rational64;
use rayon::prelude::*;
use thiserror::Error;

use crate::distribution::{bisect_level, DistCache, DistEval, DistProfile};
use crate::matrix::Matrix;
use crate::potential::b_eval;
use crate::quad::{adaptive, QuadError};
use crate::scalar::{real, Real};
use crate::simplex::{facet_point, moment_hessians, RadialPoint, SimplexError};

/// Largest supported n. The integrand factor (1−D)^{n−1} is evaluated in log
/// space, so the cap is about test budgets, not underflow.
pub const MAX_N: u32 = 512;

#[derive(Error, Debug)]
pub enum DensityError {
    #[error("n must lie in {min}..={MAX_N}, got {n}")]
    NOutOfRange { n: u32, min: u32 },
    #[error("second-derivative assembly supports m ∈ {{1, 2}}, got m = {m}")]
    UnsupportedHessianDimension { m: usize },
    #[error("density table needs a nonempty grid")]
    EmptyGrid,
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

fn check_n(n: u32, min: u32) -> Result<(), DensityError> {
    if n < min || n > MAX_N {
        return Err(DensityError::NOutOfRange { n, min });
    }
    Ok(())
}

/// (1−d)^k for d ∈ [0,1], exact at k = 0 and through the d → 1 corner.
fn pow1m<S: Real>(d: S, k: u32) -> S {
    if k == 0 {
        return S::one();
    }
    if d >= S::one() {
        return S::zero();
    }
    (real::<S>(k as f64) * (-d).ln_1p()).exp()
}

/// Quadrature budgets for integrals over t. The m ≥ 2 evaluator carries
/// ~1e−13 facet-quadrature noise, so its budget sits above the noise floor;
/// m = 1 is exact to round-off and can be pushed harder.
fn t_tols<S: Real>(m: usize, bmax: S) -> (S, S) {
    let scale = S::one() + bmax;
    if m == 1 {
        (real::<S>(1e-13) * scale, real::<S>(1e-12))
    } else {
        (real::<S>(3e-12) * scale, real::<S>(1e-11))
    }
}

fn s_tols<S: Real>(m: usize) -> (S, S) {
    if m == 1 {
        (real::<S>(1e-13), real::<S>(1e-12))
    } else {
        (real::<S>(5e-12), real::<S>(1e-10))
    }
}

/// Composition source for D inside the fixed-domain integrals. m = 1
/// evaluates exactly (two segment inversions per call); m = 2 reads the
/// Chebyshev profile, since exact facet quadrature per composition point
/// would multiply the cost by the facet-rule size.
enum Comp<'a, S: Real> {
    Exact(&'a DistCache<S>),
    Table(DistProfile<S>),
}

impl<S: Real> Comp<'_, S> {
    fn at(&self, t: S) -> DistEval<S> {
        match self {
            Comp::Exact(c) => c.eval(t),
            Comp::Table(p) => p.eval(t),
        }
    }
}

fn build_comp<S: Real>(cache: &DistCache<S>) -> Comp<'_, S> {
    if cache.m() == 1 {
        Comp::Exact(cache)
    } else {
        Comp::Table(DistProfile::new(cache))
    }
}

/// ∫₀^∞ [1−D]^n dt, truncated exactly at b_max where the integrand vanishes
/// identically. The substitution t = u² makes the √t growth of D near zero
/// analytic; pre-splits at the critical levels absorb the kinks of D_t.
pub fn g_eval<S: Real>(n: u32, rho: &RadialPoint<S>) -> Result<S, DensityError> {
    check_n(n, 1)?;
    let cache = DistCache::new(rho)?;
    g_from(&cache, n)
}

fn sqrt_splits<S: Real>(cache: &DistCache<S>) -> Vec<S> {
    cache.crit_values().iter().map(|c| c.sqrt()).collect()
}

fn g_from<S: Real>(cache: &DistCache<S>, n: u32) -> Result<S, DensityError> {
    let (abs, rel) = t_tols(cache.m(), cache.bmax());
    let splits = sqrt_splits(cache);
    let two = real::<S>(2.0);
    let mut f = |u: S| pow1m(cache.value(u * u), n) * two * u;
    let out = adaptive(&mut f, S::zero(), cache.bmax().sqrt(), abs, rel, &splits)?;
    Ok(out.value)
}

/// F_n(ρ) = log(1+|e^ρ|) − G_n(ρ).
pub fn f_eval<S: Real>(n: u32, rho: &RadialPoint<S>) -> Result<S, DensityError> {
    Ok(rho.log_partition() - g_eval(n, rho)?)
}

/// ∂G/∂ρ_p = −∫ n[1−D]^{n−1} D_ρp dt, with D_ρ from the exact evaluator.
pub fn g_grad<S: Real>(n: u32, rho: &RadialPoint<S>) -> Result<Vec<S>, DensityError> {
    check_n(n, 1)?;
    let cache = DistCache::new(rho)?;
    g_grad_from(&cache, n)
}

fn g_grad_from<S: Real>(cache: &DistCache<S>, n: u32) -> Result<Vec<S>, DensityError> {
    let m = cache.m();
    let (abs, rel) = t_tols(m, cache.bmax());
    let splits = sqrt_splits(cache);
    let nf = real::<S>(n as f64);
    let two = real::<S>(2.0);
    let mut out = Vec::with_capacity(m);
    for p in 0..m {
        let mut f = |u: S| {
            let ev = cache.eval(u * u);
            -nf * pow1m(ev.value, n - 1) * ev.drho[p] * two * u
        };
        out.push(adaptive(&mut f, S::zero(), cache.bmax().sqrt(), abs, rel, &splits)?.value);
    }
    Ok(out)
}

/// Centered difference of G, the oracle route for the gradient.
pub fn g_grad_fd<S: Real>(n: u32, rho: &RadialPoint<S>, step: S) -> Result<Vec<S>, DensityError> {
    check_n(n, 1)?;
    let m = rho.m();
    let mut out = Vec::with_capacity(m);
    for p in 0..m {
        let shift = |h: S| -> Result<S, DensityError> {
            let mut c = rho.coords().to_vec();
            c[p] += h;
            g_eval(n, &RadialPoint::new(c)?)
        };
        out.push((shift(step)? - shift(-step)?) / (step + step));
    }
    Ok(out)
}

/// The inner fixed-domain integral over one segment: T contribution for
/// `q = None`, T' contribution for `q = Some(..)`. Splits sit where B crosses
/// a critical level, since the composed D loses a derivative there.
fn s_integral<S: Real>(
    seg: &crate::potential::Segment<S>,
    comp: &Comp<S>,
    n: u32,
    p: usize,
    q: Option<usize>,
    crit: &[S],
    m: usize,
) -> Result<S, DensityError> {
    let total = seg.total();
    let splits: Vec<S> = crit
        .iter()
        .filter(|&&c| c < total)
        .map(|&c| seg.invert(c))
        .collect();
    let (abs, rel) = s_tols(m);
    let n1f = real::<S>(n.saturating_sub(1) as f64);
    let tiny = S::tol(1e-12);
    let mut f = |s: S| {
        // B_ρ = O(s²) kills the 1/s divergence of D_t∘B for m = 1; the whole
        // integrand extends continuously by 0 into s = 0
        if s <= tiny {
            return S::zero();
        }
        let ev = comp.at(seg.value(s));
        let grad = seg.rho_grad(s);
        let w = match q {
            None => pow1m(ev.value, n - 1) * (-grad[p]),
            Some(q) => {
                let lead = if n >= 2 {
                    n1f * pow1m(ev.value, n - 2) * (ev.dt * grad[q] + ev.drho[q]) * grad[p]
                } else {
                    S::zero()
                };
                lead - pow1m(ev.value, n - 1) * seg.rho_hessian(s)[(p, q)]
            }
        };
        if m == 2 {
            w * s
        } else {
            w
        }
    };
    Ok(adaptive(&mut f, S::zero(), S::one(), abs, rel, &splits)?.value)
}

/// Parameters along facet `facet` (m = 2) where b meets each critical level.
/// b restricted to the edge is strictly convex, so its slope has one sign
/// change and each level is met at most once per monotone branch.
fn edge_level_params<S: Real>(rho: &RadialPoint<S>, facet: usize, levels: &[S]) -> Vec<S> {
    let phi = |u: S| b_eval(&facet_point(2, facet, &[u]), rho);
    let x0 = facet_point(2, facet, &[S::zero()]);
    let x1 = facet_point(2, facet, &[S::one()]);
    let dir: Vec<S> = x0
        .coords()
        .iter()
        .zip(x1.coords())
        .map(|(&a, &b)| b - a)
        .collect();
    let dphi = |u: S| {
        let x = facet_point(2, facet, &[u]);
        let mut acc = S::zero();
        for (j, &d) in dir.iter().enumerate() {
            if d != S::zero() {
                let r = if j == 0 { S::zero() } else { rho.component(j) };
                acc += d * (x.coords()[j].ln() - r);
            }
        }
        acc
    };
    let ustar = bisect_level(dphi, S::zero(), S::zero(), S::one());
    let bstar = phi(ustar);
    let (b0, b1) = (phi(S::zero()), phi(S::one()));
    let mut out = vec![ustar];
    for &c in levels {
        if c > bstar && c < b0 {
            out.push(bisect_level(phi, c, S::zero(), ustar));
        }
        if c > bstar && c < b1 {
            out.push(bisect_level(phi, c, ustar, S::one()));
        }
    }
    out
}

/// T_i[p] (`q = None`) or T_i'[p,q] for one facet: the point value for m = 1,
/// the u-integral of inner s-integrals for m = 2.
fn t_facet<S: Real>(
    cache: &DistCache<S>,
    comp: &Comp<S>,
    n: u32,
    facet: usize,
    p: usize,
    q: Option<usize>,
) -> Result<S, DensityError> {
    let rho = cache.rho();
    let crit = cache.crit_values();
    match cache.m() {
        1 => {
            let x = facet_point(1, facet, &[]);
            let seg = crate::potential::Segment::new(rho, &x);
            s_integral(&seg, comp, n, p, q, crit, 1)
        }
        2 => {
            let usplits = edge_level_params(rho, facet, crit);
            let mut failed = None;
            let mut f = |u: S| {
                let x = facet_point(2, facet, &[u]);
                let seg = crate::potential::Segment::new(rho, &x);
                match s_integral(&seg, comp, n, p, q, crit, 2) {
                    Ok(v) => v,
                    Err(e) => {
                        failed = Some(e);
                        S::zero()
                    }
                }
            };
            let out = adaptive(
                &mut f,
                S::zero(),
                S::one(),
                real::<S>(3e-11),
                real::<S>(1e-10),
                &usplits,
            );
            if let Some(e) = failed {
                return Err(e);
            }
            Ok(out?.value)
        }
        m => Err(DensityError::UnsupportedHessianDimension { m }),
    }
}

/// ∂/∂ρ_q of the moving-weight term −∫ n(1−D)^{n−1} S̃_p dt, where
/// S̃_p = Σ_i (∂μ_i/∂ρ_p) W_i. Differentiation lands on (1−D)^{n−1} and on
/// S̃_p itself; the level-set motion inside W_i is the S part and lives in T'.
fn stilde_term<S: Real>(
    cache: &DistCache<S>,
    n: u32,
    p: usize,
    q: usize,
    mh: &[Matrix<S>],
) -> Result<S, DensityError> {
    let m = cache.m();
    let (abs, rel) = t_tols(m, cache.bmax());
    let splits = sqrt_splits(cache);
    let jac = cache.jacobian();
    let mu = cache.mu();
    let nf = real::<S>(n as f64);
    let n1f = real::<S>(n.saturating_sub(1) as f64);
    let two = real::<S>(2.0);
    let mut f = |u: S| {
        let pieces = cache.facet_pieces(u * u);
        let mut d = S::zero();
        let mut drq = S::zero();
        let mut stp = S::zero();
        let mut sqq = S::zero();
        for (i, (w, v)) in pieces.iter().enumerate() {
            d += mu[i] * *w;
            drq += jac[(i, q)] * *w + mu[i] * v[q];
            stp += jac[(i, p)] * *w;
            sqq += mh[i][(p, q)] * *w + jac[(i, p)] * v[q];
        }
        let d = d.min(S::one()).max(S::zero());
        let lead = if n >= 2 {
            nf * n1f * pow1m(d, n - 2) * drq * stp
        } else {
            S::zero()
        };
        (lead - nf * pow1m(d, n - 1) * sqq) * two * u
    };
    Ok(adaptive(&mut f, S::zero(), cache.bmax().sqrt(), abs, rel, &splits)?.value)
}

/// The gradient through the fixed-domain substitution:
/// ∂G/∂ρ_p = −n·m·Σ_i μ_i T_i[p] − ∫ n(1−D)^{n−1} S̃_p dt. Same numbers as
/// [`g_grad`] by a change of variables; used to validate the T pieces.
#[cfg(test)]
fn g_grad_substituted<S: Real>(cache: &DistCache<S>, n: u32) -> Result<Vec<S>, DensityError> {
    let m = cache.m();
    let comp = build_comp(cache);
    let (abs, rel) = t_tols(m, cache.bmax());
    let splits = sqrt_splits(cache);
    let jac = cache.jacobian();
    let mu = cache.mu();
    let nf = real::<S>(n as f64);
    let mf = real::<S>(m as f64);
    let two = real::<S>(2.0);
    let mut out = Vec::with_capacity(m);
    for p in 0..m {
        let mut lead = S::zero();
        for i in 0..=m {
            lead += mu[i] * t_facet(cache, &comp, n, i, p, None)?;
        }
        let mut f = |u: S| {
            let pieces = cache.facet_pieces(u * u);
            let mut d = S::zero();
            let mut stp = S::zero();
            for (i, (w, _)) in pieces.iter().enumerate() {
                d += mu[i] * *w;
                stp += jac[(i, p)] * *w;
            }
            -nf * pow1m(d.min(S::one()).max(S::zero()), n - 1) * stp * two * u
        };
        let tail = adaptive(&mut f, S::zero(), cache.bmax().sqrt(), abs, rel, &splits)?.value;
        out.push(-nf * mf * lead + tail);
    }
    Ok(out)
}

/// Hessian of G through the fixed-domain form. Entries (p,q) and (q,p) are
/// assembled independently — their agreement is a genuine cross-check of the
/// substitution machinery, so nothing is symmetrized here.
pub fn g_hessian<S: Real>(n: u32, rho: &RadialPoint<S>) -> Result<Matrix<S>, DensityError> {
    check_n(n, 1)?;
    let cache = DistCache::new(rho)?;
    g_hessian_from(&cache, n)
}

fn g_hessian_from<S: Real>(cache: &DistCache<S>, n: u32) -> Result<Matrix<S>, DensityError> {
    let m = cache.m();
    if m > 2 {
        return Err(DensityError::UnsupportedHessianDimension { m });
    }
    let comp = build_comp(cache);
    let mh = moment_hessians(cache.rho());
    let jac = cache.jacobian();
    let mu = cache.mu();
    let nf = real::<S>(n as f64);
    let mf = real::<S>(m as f64);

    let mut t_val = vec![vec![S::zero(); m]; m + 1];
    let mut t_prime = vec![vec![vec![S::zero(); m]; m]; m + 1];
    for i in 0..=m {
        for p in 0..m {
            t_val[i][p] = t_facet(cache, &comp, n, i, p, None)?;
            for q in 0..m {
                t_prime[i][p][q] = t_facet(cache, &comp, n, i, p, Some(q))?;
            }
        }
    }

    let mut entries = vec![S::zero(); m * m];
    for p in 0..m {
        for q in 0..m {
            let mut lead = S::zero();
            for i in 0..=m {
                lead += jac[(i, q)] * t_val[i][p] + mu[i] * t_prime[i][p][q];
            }
            entries[p * m + q] = -nf * mf * lead + stilde_term(cache, n, p, q, &mh)?;
        }
    }
    Ok(Matrix::from_fn(m, m, |p, q| entries[p * m + q]))
}

/// Richardson difference of the analytic gradient, the oracle route for the
/// Hessian.
pub fn g_hessian_fd<S: Real>(
    n: u32,
    rho: &RadialPoint<S>,
    step: S,
) -> Result<Matrix<S>, DensityError> {
    check_n(n, 1)?;
    let m = rho.m();
    let mut cols: Vec<Vec<S>> = Vec::with_capacity(m);
    for q in 0..m {
        let diff = |h: S| -> Result<Vec<S>, DensityError> {
            let at = |sgn: S| -> Result<Vec<S>, DensityError> {
                let mut c = rho.coords().to_vec();
                c[q] += sgn * h;
                g_grad(n, &RadialPoint::new(c)?)
            };
            let plus = at(S::one())?;
            let minus = at(-S::one())?;
            Ok(plus
                .iter()
                .zip(&minus)
                .map(|(&a, &b)| (a - b) / (h + h))
                .collect())
        };
        let coarse = diff(step)?;
        let fine = diff(step * real::<S>(0.5))?;
        let third = real::<S>(1.0 / 3.0);
        cols.push(
            fine.iter()
                .zip(&coarse)
                .map(|(&f, &c)| (real::<S>(4.0) * f - c) * third)
                .collect(),
        );
    }
    Ok(Matrix::from_fn(m, m, |p, q| cols[q][p]))
}

/// Richardson second differences of F alone — no analytic derivative enters,
/// making this the fully independent path to the Hessian of F.
pub fn f_hessian_fd<S: Real>(
    n: u32,
    rho: &RadialPoint<S>,
    step: S,
) -> Result<Matrix<S>, DensityError> {
    check_n(n, 1)?;
    let m = rho.m();
    let at = |offsets: &[(usize, S)]| -> Result<S, DensityError> {
        let mut c = rho.coords().to_vec();
        for &(axis, d) in offsets {
            c[axis] += d;
        }
        f_eval(n, &RadialPoint::new(c)?)
    };
    let f0 = at(&[])?;
    let third = real::<S>(1.0 / 3.0);
    let four = real::<S>(4.0);
    let mut entries = vec![S::zero(); m * m];
    for a in 0..m {
        let d2 = |h: S| -> Result<S, DensityError> {
            Ok((at(&[(a, h)])? - (f0 + f0) + at(&[(a, -h)])?) / (h * h))
        };
        let coarse = d2(step)?;
        let fine = d2(step * real::<S>(0.5))?;
        entries[a * m + a] = (four * fine - coarse) * third;
    }
    for a in 0..m {
        for b in (a + 1)..m {
            let cross = |h: S| -> Result<S, DensityError> {
                let pp = at(&[(a, h), (b, h)])?;
                let mm = at(&[(a, -h), (b, -h)])?;
                let pm = at(&[(a, h), (b, -h)])?;
                let mp = at(&[(a, -h), (b, h)])?;
                Ok((pp + mm - pm - mp) / (four * h * h))
            };
            let coarse = cross(step)?;
            let fine = cross(step * real::<S>(0.5))?;
            let v = (four * fine - coarse) * third;
            entries[a * m + b] = v;
            entries[b * m + a] = v;
        }
    }
    Ok(Matrix::from_fn(m, m, |p, q| entries[p * m + q]))
}

/// Hessian of log(1+|e^ρ|): the tail rows of the moment-map Jacobian. This is
/// the full-ensemble (all exponents present) counterpart of Hess F_n.
pub fn fs_hessian<S: Real>(rho: &RadialPoint<S>) -> Matrix<S> {
    let jac = crate::simplex::moment_jacobian(rho);
    Matrix::from_fn(rho.m(), rho.m(), |p, q| jac[(p + 1, q)])
}

/// Radial density f_n(ρ) = ∂²F_n/∂ρ² for m = 1. Nonnegative up to assembly
/// round-off (the potential is convex); no clamping is applied.
pub fn radial_density<S: Real>(n: u32, rho: S) -> Result<S, DensityError> {
    check_n(n, 2)?;
    let rp = RadialPoint::new(vec![rho])?;
    let cache = DistCache::new(&rp)?;
    Ok(fs_density(rho) - g_hessian_from(&cache, n)?[(0, 0)])
}

/// Full-ensemble radial density [(1+e^ρ)(1+e^{−ρ})]^{−1} = ¼ sech²(ρ/2).
pub fn fs_density<S: Real>(rho: S) -> S {
    let c = (rho * real::<S>(0.5)).cosh();
    real::<S>(0.25) / (c * c)
}

/// ∫_{−r}^{r} f_n dρ. The tail beyond |ρ| = 40 is below 1e−6, so r = 40
/// recovers the exact total mass (n−1)/(n+1) to the quadrature budget.
pub fn radial_mass<S: Real>(n: u32, radius: S) -> Result<S, DensityError> {
    check_n(n, 2)?;
    let mut failed = None;
    let mut f = |rho: S| match radial_density(n, rho) {
        Ok(v) => v,
        Err(e) => {
            failed = Some(e);
            S::zero()
        }
    };
    let out = adaptive(
        &mut f,
        -radius,
        radius,
        real::<S>(1e-7),
        real::<S>(1e-7),
        &[S::zero()],
    );
    if let Some(e) = failed {
        return Err(e);
    }
    Ok(out?.value)
}

/// Determinant density m!·det((2π)^{−1}·Hess F_n) with
/// Hess F_n = Hess log(1+|e^ρ|) − Hess G_n. Reduces to f_n/(2π) for m = 1.
pub fn kk_density<S: Real>(n: u32, rho: &RadialPoint<S>) -> Result<S, DensityError> {
    check_n(n, 2)?;
    let cache = DistCache::new(rho)?;
    let hess_f = mat_sub(&fs_hessian(rho), &g_hessian_from(&cache, n)?);
    Ok(det_density(rho.m(), &hess_f))
}

/// Same determinant through pure differences of F — the independent path.
pub fn kk_density_fd<S: Real>(n: u32, rho: &RadialPoint<S>) -> Result<S, DensityError> {
    check_n(n, 2)?;
    let step = if rho.m() == 1 {
        real::<S>(0.01)
    } else {
        real::<S>(0.03)
    };
    let hess_f = f_hessian_fd(n, rho, step)?;
    Ok(det_density(rho.m(), &hess_f))
}

fn mat_sub<S: Real>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    Matrix::from_fn(a.rows(), a.cols(), |p, q| a[(p, q)] - b[(p, q)])
}

fn det_density<S: Real>(m: usize, hess: &Matrix<S>) -> S {
    let two_pi = real::<S>(2.0) * S::PI();
    let scaled = Matrix::from_fn(m, m, |p, q| hess[(p, q)] / two_pi);
    let mfact = real::<S>((1..=m).product::<usize>() as f64);
    mfact * scaled.det()
}

/// Total expected zero mass ∫ ∂²F_n/∂ρ² dρ = (n−1)/(n+1), exactly.
pub fn expected_mass(n: u32) -> Rational64 {
    Rational64::new(n as i64 - 1, n as i64 + 1)
}

/// Grid evaluation of the density family: F, its derivatives, and both
/// normalizations of the zero density, one row per grid point.
pub struct DensityTable<S: Real> {
    pub n: u32,
    pub m: usize,
    pub grid: Vec<RadialPoint<S>>,
    pub f: Vec<S>,
    /// Gradient of F, one vector per grid point.
    pub grad: Vec<Vec<S>>,
    /// Hessian of F, one matrix per grid point.
    pub hess: Vec<Matrix<S>>,
    /// ∂²F/∂ρ² for m = 1; m!·det((2π)^{−1} Hess F) for m ≥ 2.
    pub density: Vec<S>,
    /// The full-ensemble counterpart of `density`, same normalization.
    pub fs_density: Vec<S>,
}

struct TableRow<S> {
    f: S,
    grad: Vec<S>,
    hess: Matrix<S>,
    density: S,
    fs_density: S,
}

impl<S: Real + Send + Sync> DensityTable<S> {
    pub fn compute(n: u32, grid: &[RadialPoint<S>]) -> Result<Self, DensityError> {
        check_n(n, 2)?;
        let m = grid.first().ok_or(DensityError::EmptyGrid)?.m();
        let rows: Result<Vec<TableRow<S>>, DensityError> = grid
            .par_iter()
            .map(|rho| {
                let cache = DistCache::new(rho)?;
                let g = g_from(&cache, n)?;
                let mu = crate::simplex::moment_map(rho);
                let grad: Vec<S> = g_grad_from(&cache, n)?
                    .iter()
                    .enumerate()
                    .map(|(p, &gp)| mu.component(p + 1) - gp)
                    .collect();
                let hess_g = g_hessian_from(&cache, n)?;
                let hess = mat_sub(&fs_hessian(rho), &hess_g);
                let (density, fs_dens) = if m == 1 {
                    (hess[(0, 0)], fs_density(rho.component(1)))
                } else {
                    (
                        det_density(m, &hess),
                        det_density(m, &fs_hessian(rho)),
                    )
                };
                Ok(TableRow {
                    f: rho.log_partition() - g,
                    grad,
                    hess,
                    density,
                    fs_density: fs_dens,
                })
            })
            .collect();
        let rows = rows?;
        Ok(DensityTable {
            n,
            m,
            grid: grid.to_vec(),
            f: rows.iter().map(|r| r.f).collect(),
            grad: rows.iter().map(|r| r.grad.clone()).collect(),
            hess: rows.iter().map(|r| r.hess.clone()).collect(),
            density: rows.iter().map(|r| r.density).collect(),
            fs_density: rows.iter().map(|r| r.fs_density).collect(),
        })
    }
}
