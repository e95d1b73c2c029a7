//! Distribution function D(t,ρ) = P{λ ∈ Δ : b(λ,ρ) ≤ t} with its t- and
//! ρ-derivatives, plus a Monte Carlo oracle.
//!
//! Everything routes through the cone decomposition of the simplex from its
//! barycenter-like point μ(ρ): conditioned on the facet hit by the ray, the
//! radial coordinate s carries density m·s^{m−1}, so
//!
//!   D = Σ_i μ_i ∫_{facet i} h(t; μ→x)^m dσ_i(x),
//!
//! where h is the clamped inverse of the segment potential and σ_i is the
//! normalized facet measure. For m = 1 the facet integrals are single points
//! and D is exact. For m ≥ 2 the integrand has a kink where h saturates at 1;
//! the facet integrals locate that kink exactly (bisection against closed-form
//! facet minima) and integrate the smooth pieces with a square-root
//! substitution toward it, which restores fast Gauss–Legendre convergence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::matrix::Matrix;
use crate::potential::{b_eval, b_max, Segment};
use crate::quad::gauss_legendre;
use crate::scalar::{real, Real};
use crate::simplex::{
    facet_point, moment_jacobian, moment_map, RadialPoint, SimplexError, SimplexPoint,
};

/// One evaluation of the distribution: value, t-derivative, ρ-gradient.
///
/// `dt` is `+∞` at t = 0 when m = 1 (the density of b diverges there); it is
/// finite for m = 2 and zero for m ≥ 3.
#[derive(Clone, Debug)]
pub struct DistEval<S> {
    pub t: S,
    pub rho: RadialPoint<S>,
    pub value: S,
    pub dt: S,
    pub drho: Vec<S>,
}

/// Nodes per smooth piece of a facet integral (and per angular panel for
/// m = 3) at which doubling the count moves D by less than 1e−8.
pub fn default_order(m: usize) -> usize {
    match m {
        2 => 24,
        3 => 16,
        _ => 0,
    }
}

enum FacetGeom<S> {
    /// m = 1: the facet is the opposite vertex; the segment to it is the
    /// whole evaluation.
    Point { seg: Segment<S> },
    /// m = 2: the facet is an edge between vertices `va` (u = 0) and `vb`
    /// (u = 1); b restricted to it dips to `bstar` at `ustar`.
    Edge {
        va: usize,
        vb: usize,
        ustar: S,
        bstar: S,
    },
    /// m = 3: the facet is a triangle, handled in polar coordinates around
    /// the conditional minimum of b.
    Tri(TriGeom<S>),
}

struct TriGeom<S> {
    facet: usize,
    /// Parameter-space location of the conditional minimum of b.
    center: (S, S),
    bstar: S,
    corner_angles: [S; 3],
    edges: [TriEdge<S>; 3],
}

struct TriEdge<S> {
    va: usize,
    vb: usize,
    pa: (S, S),
    pb: (S, S),
    sigma_star: S,
    bmin: S,
}

/// Per-ρ precomputation for distribution evaluation. Supports m ∈ {1,2,3}.
pub struct DistCache<S: Real> {
    rho: RadialPoint<S>,
    mu: Vec<S>,
    jac: Matrix<S>,
    /// Vertex potentials b(v_j) = L − ρ_j.
    vpot: Vec<S>,
    bmax: S,
    crit: Vec<S>,
    order: usize,
    gl: (Vec<S>, Vec<S>),
    facets: Vec<FacetGeom<S>>,
}

impl<S: Real> DistCache<S> {
    pub fn new(rho: &RadialPoint<S>) -> Result<Self, SimplexError> {
        Self::with_order(rho, default_order(rho.m()))
    }

    pub fn with_order(rho: &RadialPoint<S>, order: usize) -> Result<Self, SimplexError> {
        let m = rho.m();
        if m == 0 || m > 3 {
            return Err(SimplexError::UnsupportedDimension { m });
        }
        let mu = moment_map(rho).coords().to_vec();
        let jac = moment_jacobian(rho);
        let lp = rho.log_partition();
        let vpot: Vec<S> = (0..=m).map(|j| lp - rho.component(j)).collect();
        let bmax = b_max(rho);
        let crit = interior_crit(&mu, bmax);
        let order = if order == 0 { default_order(m) } else { order };
        let gl = if m >= 2 {
            gauss_legendre(order)
        } else {
            (Vec::new(), Vec::new())
        };
        let mut facets = Vec::with_capacity(m + 1);
        for i in 0..=m {
            facets.push(build_facet_geom(rho, &mu, i));
        }
        Ok(DistCache {
            rho: rho.clone(),
            mu,
            jac,
            vpot,
            bmax,
            crit,
            order,
            gl,
            facets,
        })
    }

    pub fn m(&self) -> usize {
        self.rho.m()
    }

    pub fn rho(&self) -> &RadialPoint<S> {
        &self.rho
    }

    pub fn mu(&self) -> &[S] {
        &self.mu
    }

    pub fn bmax(&self) -> S {
        self.bmax
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Potential levels at which D loses a derivative: the conditional minima
    /// of b on the proper faces of Δ, strictly inside (0, b_max). Integrals
    /// over t should pre-split here.
    pub fn crit_values(&self) -> &[S] {
        &self.crit
    }

    pub fn value(&self, t: S) -> S {
        self.eval(t).value
    }

    pub fn eval(&self, t: S) -> DistEval<S> {
        let m = self.m();
        if t <= S::zero() {
            let dt = if t < S::zero() {
                S::zero()
            } else {
                match m {
                    1 => S::infinity(),
                    2 => self.dt_at_zero(),
                    _ => S::zero(),
                }
            };
            return DistEval {
                t,
                rho: self.rho.clone(),
                value: S::zero(),
                dt,
                drho: vec![S::zero(); m],
            };
        }
        if t >= self.bmax {
            return DistEval {
                t,
                rho: self.rho.clone(),
                value: S::one(),
                dt: S::zero(),
                drho: vec![S::zero(); m],
            };
        }

        let mut value = S::zero();
        let mut dt = S::zero();
        let mut drho = vec![S::zero(); m];
        for i in 0..=m {
            let (fi, fj, fk) = self.facet_integrals(i, t);
            value += self.mu[i] * fi;
            dt += self.mu[i] * fj;
            for p in 0..m {
                drho[p] += self.jac[(i, p)] * fi + self.mu[i] * fk[p];
            }
        }
        DistEval {
            t,
            rho: self.rho.clone(),
            value: value.min(S::one()).max(S::zero()),
            dt,
            drho,
        }
    }

    /// Moment-map Jacobian ∂μ_i/∂ρ_p; rows run over all m+1 coordinates,
    /// columns over ρ₁…ρ_m.
    pub fn jacobian(&self) -> &Matrix<S> {
        &self.jac
    }

    /// Per-facet cone pieces at level t: for facet i the saturated radial
    /// fraction W_i = ∫ h(t,·,x)^m dx_(i) and its ρ-gradient
    /// V_i = ∫ m·h^{m−1}·h_ρ dx_(i), so that D = Σ μ_i·W_i and
    /// D_ρp = Σ_i (∂μ_i/∂ρ_p)·W_i + μ_i·V_i[p]. Density assembly
    /// recombines these with the moment-map derivative tensors.
    pub fn facet_pieces(&self, t: S) -> Vec<(S, Vec<S>)> {
        let m = self.m();
        if t <= S::zero() {
            return vec![(S::zero(), vec![S::zero(); m]); m + 1];
        }
        if t >= self.bmax {
            return vec![(S::one(), vec![S::zero(); m]); m + 1];
        }
        (0..=m)
            .map(|i| {
                let (fi, _, fk) = self.facet_integrals(i, t);
                (fi, fk)
            })
            .collect()
    }

    fn facet_integrals(&self, i: usize, t: S) -> (S, S, Vec<S>) {
        match &self.facets[i] {
            FacetGeom::Point { seg } => self.point_integrals(seg, t),
            FacetGeom::Edge {
                va,
                vb,
                ustar,
                bstar,
            } => self.edge_integrals(i, *va, *vb, *ustar, *bstar, t),
            FacetGeom::Tri(tri) => self.tri_integrals(tri, t),
        }
    }

    /// lim_{t→0⁺} D_t for m = 2: each facet contributes the average of
    /// 1/B_ss(0) against its measure, scaled by m·μ_i.
    fn dt_at_zero(&self) -> S {
        let m = self.m();
        let mut acc = S::zero();
        for i in 0..=m {
            let mut avg = S::zero();
            for (&u, &w) in self.gl.0.iter().zip(&self.gl.1) {
                let x = facet_point(m, i, &[u]);
                let seg = Segment::new(&self.rho, &x);
                avg += w / seg.center_curvature();
            }
            acc += self.mu[i] * avg;
        }
        acc * real::<S>(m as f64)
    }

    fn point_integrals(&self, seg: &Segment<S>, t: S) -> (S, S, Vec<S>) {
        let m = self.m();
        if t >= seg.total() {
            return (S::one(), S::zero(), vec![S::zero(); m]);
        }
        let h = seg.invert(t);
        let slope = seg.slope(h);
        let grad = seg.rho_grad(h);
        let k = grad.iter().map(|&g| -g / slope).collect();
        (h, S::one() / slope, k)
    }

    fn edge_integrals(
        &self,
        facet: usize,
        va: usize,
        vb: usize,
        ustar: S,
        bstar: S,
        t: S,
    ) -> (S, S, Vec<S>) {
        let m = self.m();
        let level = |u: S| b_eval(&facet_point(m, facet, &[u]), &self.rho);
        let (u1, u2) = if t <= bstar {
            (ustar, ustar)
        } else {
            let u1 = if t >= self.vpot[va] {
                S::zero()
            } else {
                bisect_level(level, t, S::zero(), ustar)
            };
            let u2 = if t >= self.vpot[vb] {
                S::one()
            } else {
                bisect_level(level, t, ustar, S::one())
            };
            (u1, u2)
        };

        let mut fi = u2 - u1;
        let mut fj = S::zero();
        let mut fk = vec![S::zero(); m];
        let mut node = |u: S, wt: S| {
            let x = facet_point(m, facet, &[u]);
            let seg = Segment::new(&self.rho, &x);
            if t >= seg.total() {
                fi += wt;
                return;
            }
            let h = seg.invert(t);
            let slope = seg.slope(h);
            let grad = seg.rho_grad(h);
            let two_h = h + h;
            fi += wt * h * h;
            fj += wt * two_h / slope;
            for p in 0..m {
                fk[p] -= wt * two_h * grad[p] / slope;
            }
        };
        // each smooth piece is mapped through the cubic grading σ²(3−2σ),
        // whose vanishing endpoint derivative both kills the h-saturation
        // corner at the kink and resolves the near-saturation layer that
        // forms at the vertex end when t approaches a vertex potential
        if u1 > S::zero() {
            for (&sg, &gw) in self.gl.0.iter().zip(&self.gl.1) {
                let u = u1 * smoothstep(sg);
                node(u, gw * u1 * smoothstep_jac(sg));
            }
        }
        if u2 < S::one() {
            let width = S::one() - u2;
            for (&sg, &gw) in self.gl.0.iter().zip(&self.gl.1) {
                let u = u2 + width * smoothstep(sg);
                node(u, gw * width * smoothstep_jac(sg));
            }
        }
        (fi, fj, fk)
    }

    fn tri_integrals(&self, tri: &TriGeom<S>, t: S) -> (S, S, Vec<S>) {
        let m = self.m();
        let mut angles: Vec<S> = tri.corner_angles.to_vec();
        if t > tri.bstar {
            for e in &tri.edges {
                if t <= e.bmin {
                    continue;
                }
                let level = |sigma: S| {
                    let p = e.pa.0 + sigma * (e.pb.0 - e.pa.0);
                    let q = e.pa.1 + sigma * (e.pb.1 - e.pa.1);
                    b_eval(&tri_param_point(tri.facet, p, q), &self.rho)
                };
                let mut push_angle = |sigma: S| {
                    let p = e.pa.0 + sigma * (e.pb.0 - e.pa.0);
                    let q = e.pa.1 + sigma * (e.pb.1 - e.pa.1);
                    angles.push((q - tri.center.1).atan2(p - tri.center.0));
                };
                if t < self.vpot[e.va] {
                    push_angle(bisect_level(level, t, S::zero(), e.sigma_star));
                }
                if t < self.vpot[e.vb] {
                    push_angle(bisect_level(level, t, e.sigma_star, S::one()));
                }
            }
        }
        angles.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));

        let mut fi = S::zero();
        let mut fj = S::zero();
        let mut fk = vec![S::zero(); m];
        let two_pi = S::PI() + S::PI();
        let n_ang = angles.len();
        let max_span = real::<S>(0.35);
        let mut arcs = Vec::with_capacity(2 * n_ang);
        for k in 0..n_ang {
            let th_lo = angles[k];
            let th_hi = if k + 1 < n_ang {
                angles[k + 1]
            } else {
                angles[0] + two_pi
            };
            let span = th_hi - th_lo;
            if span < S::tol(1e-14) {
                continue;
            }
            // long arcs defeat the per-arc rule: R(θ) is a secant in θ, whose
            // complex poles sit close once the arc is wide
            let pieces = (span / max_span).ceil().to_f64().unwrap_or(1.0) as usize;
            let sub = span / real::<S>(pieces.max(1) as f64);
            for j in 0..pieces.max(1) {
                arcs.push((th_lo + sub * real::<S>(j as f64), sub));
            }
        }
        for (arc_lo, span) in arcs {
            for (&xi, &gth) in self.gl.0.iter().zip(&self.gl.1) {
                let th = arc_lo + span * xi;
                let wt_th = gth * span;
                let dir = (th.cos(), th.sin());
                let rmax = ray_extent(tri.center, dir);
                let p_end = tri.center.0 + rmax * dir.0;
                let q_end = tri.center.1 + rmax * dir.1;
                let b_end = b_eval(&tri_param_point(tri.facet, p_end, q_end), &self.rho);
                if b_end <= t {
                    fi += wt_th * rmax * rmax;
                    continue;
                }
                let r1 = if t <= tri.bstar {
                    S::zero()
                } else {
                    let level = |r: S| {
                        let p = tri.center.0 + r * dir.0;
                        let q = tri.center.1 + r * dir.1;
                        b_eval(&tri_param_point(tri.facet, p, q), &self.rho)
                    };
                    bisect_level(level, t, S::zero(), rmax)
                };
                fi += wt_th * r1 * r1;
                let width = rmax - r1;
                for (&sg, &gw) in self.gl.0.iter().zip(&self.gl.1) {
                    let r = r1 + width * smoothstep(sg);
                    let wt = wt_th * gw * width * smoothstep_jac(sg) * (r + r);
                    let x = tri_param_point(
                        tri.facet,
                        tri.center.0 + r * dir.0,
                        tri.center.1 + r * dir.1,
                    );
                    let seg = Segment::new(&self.rho, &x);
                    if t >= seg.total() {
                        fi += wt;
                        continue;
                    }
                    let h = seg.invert(t);
                    let slope = seg.slope(h);
                    let grad = seg.rho_grad(h);
                    let h2 = h * h;
                    let three_h2 = h2 + h2 + h2;
                    fi += wt * h2 * h;
                    fj += wt * three_h2 / slope;
                    for p in 0..m {
                        fk[p] -= wt * three_h2 * grad[p] / slope;
                    }
                }
            }
        }
        (fi, fj, fk)
    }
}

/// Conditional minima of b over the proper faces of Δ: for the face spanned
/// by vertex set A the minimum is −ln Σ_{j∈A} μ_j. Returned sorted, deduped,
/// strictly inside (0, bmax).
fn interior_crit<S: Real>(mu: &[S], bmax: S) -> Vec<S> {
    let n = mu.len();
    let tol = S::tol(1e-12);
    let mut out = Vec::new();
    for mask in 1u32..((1 << n) - 1) {
        let mut sum = S::zero();
        for (j, &mj) in mu.iter().enumerate() {
            if mask & (1 << j) != 0 {
                sum += mj;
            }
        }
        let v = -sum.ln();
        if v > tol && v < bmax - tol {
            out.push(v);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite potentials"));
    out.dedup_by(|a, b| (*a - *b).abs() <= tol * (S::one() + a.abs()));
    out
}

/// Vertex indices at the parameter corners of a facet: first the vertex
/// where all parameters vanish (the derived coordinate), then the vertices
/// of the free coordinates in ascending index order.
fn facet_corner_vertices(m: usize, facet: usize) -> Vec<usize> {
    let mut ids = Vec::with_capacity(m);
    if facet == 0 {
        ids.push(m);
        ids.extend(1..m);
    } else {
        ids.push(0);
        ids.extend((1..=m).filter(|&j| j != facet));
    }
    ids
}

fn build_facet_geom<S: Real>(rho: &RadialPoint<S>, mu: &[S], facet: usize) -> FacetGeom<S> {
    let m = rho.m();
    match m {
        1 => {
            let opposite = if facet == 0 { 1 } else { 0 };
            let seg = Segment::new(rho, &SimplexPoint::vertex(1, opposite));
            FacetGeom::Point { seg }
        }
        2 => {
            let ids = facet_corner_vertices(2, facet);
            let (va, vb) = (ids[0], ids[1]);
            let rest = S::one() - mu[facet];
            FacetGeom::Edge {
                va,
                vb,
                ustar: mu[vb] / rest,
                bstar: -(-mu[facet]).ln_1p(),
            }
        }
        3 => {
            let ids = facet_corner_vertices(3, facet);
            let rest = S::one() - mu[facet];
            let center = (mu[ids[1]] / rest, mu[ids[2]] / rest);
            let corners = [
                (S::zero(), S::zero()),
                (S::one(), S::zero()),
                (S::zero(), S::one()),
            ];
            let angle = |p: (S, S)| (p.1 - center.1).atan2(p.0 - center.0);
            let corner_angles = [angle(corners[0]), angle(corners[1]), angle(corners[2])];
            let edge = |ka: usize, kb: usize| {
                let (va, vb) = (ids[ka], ids[kb]);
                TriEdge {
                    va,
                    vb,
                    pa: corners[ka],
                    pb: corners[kb],
                    sigma_star: mu[vb] / (mu[va] + mu[vb]),
                    bmin: -(mu[va] + mu[vb]).ln(),
                }
            };
            FacetGeom::Tri(TriGeom {
                facet,
                center,
                bstar: -(-mu[facet]).ln_1p(),
                corner_angles,
                edges: [edge(0, 1), edge(0, 2), edge(1, 2)],
            })
        }
        _ => unreachable!("dimension validated on construction"),
    }
}

/// Facet point for m = 3 with round-off clamped back into the parameter
/// triangle; radial nodes sit strictly inside, so the clamp only absorbs
/// last-ulp excursions at panel edges.
fn tri_param_point<S: Real>(facet: usize, p: S, q: S) -> SimplexPoint<S> {
    let p = p.max(S::zero());
    let q = q.max(S::zero());
    let sum = p + q;
    if sum > S::one() {
        facet_point(3, facet, &[p / sum, q / sum])
    } else {
        facet_point(3, facet, &[p, q])
    }
}

/// Distance from `center` to the parameter-triangle boundary along `dir`.
fn ray_extent<S: Real>(center: (S, S), dir: (S, S)) -> S {
    let mut r = S::infinity();
    if dir.0 < S::zero() {
        r = r.min(center.0 / -dir.0);
    }
    if dir.1 < S::zero() {
        r = r.min(center.1 / -dir.1);
    }
    let s = dir.0 + dir.1;
    if s > S::zero() {
        r = r.min((S::one() - center.0 - center.1) / s);
    }
    r
}

/// Monotone cubic grading of [0,1] with vanishing endpoint derivatives.
/// Composing an integrand with it turns square-root kinks at either end
/// into analytic functions of the new variable.
fn smoothstep<S: Real>(s: S) -> S {
    s * s * (real::<S>(3.0) - (s + s))
}

fn smoothstep_jac<S: Real>(s: S) -> S {
    real::<S>(6.0) * s * (S::one() - s)
}

/// Inverse of the cubic grading, accurate to square-root scale at the ends.
fn inv_smoothstep<S: Real>(y: S) -> S {
    let y = y.min(S::one()).max(S::zero());
    let third = real::<S>(1.0 / 3.0);
    real::<S>(0.5) - ((S::one() - (y + y)).asin() * third).sin()
}

/// Root of f(x) = t on [lo, hi] with f(lo) − t and f(hi) − t of opposite
/// signs. Plain bisection; stops when the midpoint degenerates. The callers
/// pick the bracket by comparing t against closed-form branch levels while f
/// is evaluated directly, so t can sit a few ulps outside f's actual range
/// on [lo, hi]; without a sign change the crossing is an endpoint up to
/// rounding and the nearer one is returned.
pub(crate) fn bisect_level<S: Real>(mut f: impl FnMut(S) -> S, t: S, mut lo: S, mut hi: S) -> S {
    let mut flo = f(lo) - t;
    let fhi = f(hi) - t;
    if (flo > S::zero()) == (fhi > S::zero()) {
        return if flo.abs() <= fhi.abs() { lo } else { hi };
    }
    for _ in 0..100 {
        let mid = (lo + hi) * real::<S>(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid) - t;
        if (fm > S::zero()) == (flo > S::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * real::<S>(0.5)
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Clone, Copy, Debug)]
pub struct McEstimate<S> {
    pub value: S,
    pub std_err: S,
}

/// Fraction of uniform draws λ ∈ Δ with b(λ,ρ) ≤ t, via normalized
/// exponential spacings. Samples are split into fixed 2^16-size chunks, each
/// driven by its own counter-indexed stream of the seeded generator, and the
/// integer hit counts are summed — so the result is bitwise identical for a
/// fixed seed regardless of how many workers run the chunks.
pub fn d_mc_oracle<S: Real>(t: S, rho: &RadialPoint<S>, samples: u64, seed: u64) -> McEstimate<S> {
    const CHUNK: u64 = 1 << 16;
    if t <= S::zero() {
        // b > 0 almost surely
        return McEstimate {
            value: S::zero(),
            std_err: S::zero(),
        };
    }
    if t >= b_max(rho) {
        return McEstimate {
            value: S::one(),
            std_err: S::zero(),
        };
    }
    let m = rho.m();
    let lp = rho.log_partition();
    let n_chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let todo = (samples - c * CHUNK).min(CHUNK);
            let mut exps = vec![S::zero(); m + 1];
            let mut count = 0u64;
            for _ in 0..todo {
                let mut sum;
                loop {
                    sum = S::zero();
                    for slot in exps.iter_mut() {
                        let u: f64 = rng.random();
                        *slot = -(-real::<S>(u)).ln_1p();
                        sum += *slot;
                    }
                    if sum > S::zero() {
                        break;
                    }
                }
                let mut b = lp;
                for (i, &e) in exps.iter().enumerate() {
                    let lam = e / sum;
                    if lam > S::zero() {
                        b += lam * (lam.ln() - rho.component(i));
                    }
                }
                if b <= t {
                    count += 1;
                }
            }
            count
        })
        .sum();
    let n = real::<S>(samples as f64);
    let p = real::<S>(hits as f64) / n;
    McEstimate {
        value: p,
        std_err: (p * (S::one() - p) / n).sqrt(),
    }
}

/// Piecewise-Chebyshev interpolant of (D, D_t, D_ρ) in u = √t, for m ≥ 2.
///
/// Density assembly composes these channels inside s-integrals thousands of
/// times per ρ; the interpolant amortizes the facet quadrature. Panels sit
/// between the critical potential levels, with geometric refinement toward
/// both panel edges where D loses smoothness. Finite-difference cross-checks
/// should use the exact evaluator instead — interpolation noise, however
/// small, is poison under differencing.
pub struct DistProfile<S: Real> {
    bmax: S,
    at_zero: DistEval<S>,
    edges_u: Vec<S>,
    panels: Vec<ChebPanel<S>>,
}

struct ChebPanel<S> {
    lo: S,
    width: S,
    /// Channel-major coefficients: [value, dt, drho_1, …, drho_m].
    coefs: Vec<Vec<S>>,
}

const CHEB_DEG: usize = 32;

impl<S: Real> DistProfile<S> {
    pub fn new(cache: &DistCache<S>) -> Self {
        let m = cache.m();
        assert!(m >= 2, "m = 1 evaluates exactly; no profile needed");
        let bmax = cache.bmax();
        let mut knots: Vec<S> = Vec::new();
        knots.push(S::zero());
        for &c in cache.crit_values() {
            knots.push(c.sqrt());
        }
        knots.push(bmax.sqrt());

        // per knot gap: a short panel hugging each knot plus the interior,
        // all sampled through the cubic grading. The grading makes the
        // square-root cusps of D_t at the knots analytic in the panel
        // coordinate; the short edge panels shrink what the residual
        // logarithmic corrections can contribute.
        let mut edges_u = Vec::new();
        let mut panels = Vec::new();
        let eighth = real::<S>(0.125);
        for pair in knots.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let w = b - a;
            if w <= S::tol(1e-13) {
                continue;
            }
            let subs = [a, a + w * eighth, b - w * eighth, b];
            for sp in subs.windows(2) {
                let (lo, hi) = (sp[0], sp[1]);
                let width = hi - lo;
                let n_ch = 2 + m;
                let mut values = vec![Vec::with_capacity(CHEB_DEG + 1); n_ch];
                for k in 0..=CHEB_DEG {
                    let xk =
                        real::<S>((k as f64 * std::f64::consts::PI / CHEB_DEG as f64).cos());
                    let sigma = (S::one() + xk) * real::<S>(0.5);
                    let u = lo + width * smoothstep(sigma);
                    let ev = cache.eval(u * u);
                    values[0].push(ev.value);
                    values[1].push(ev.dt);
                    for p in 0..m {
                        values[2 + p].push(ev.drho[p]);
                    }
                }
                let coefs = values.iter().map(|v| cheb_coeffs(v)).collect();
                edges_u.push(lo);
                panels.push(ChebPanel {
                    lo,
                    width,
                    coefs,
                });
            }
        }
        DistProfile {
            bmax,
            at_zero: cache.eval(S::zero()),
            edges_u,
            panels,
        }
    }

    pub fn bmax(&self) -> S {
        self.bmax
    }

    pub fn eval(&self, t: S) -> DistEval<S> {
        let m = self.at_zero.drho.len();
        if t <= S::zero() {
            let mut ev = self.at_zero.clone();
            ev.t = t;
            return ev;
        }
        if t >= self.bmax {
            return DistEval {
                t,
                rho: self.at_zero.rho.clone(),
                value: S::one(),
                dt: S::zero(),
                drho: vec![S::zero(); m],
            };
        }
        let u = t.sqrt();
        let idx = self
            .edges_u
            .partition_point(|&e| e <= u)
            .saturating_sub(1)
            .min(self.panels.len() - 1);
        let panel = &self.panels[idx];
        let sigma = inv_smoothstep((u - panel.lo) / panel.width);
        let x = sigma + sigma - S::one();
        let value = cheb_eval(&panel.coefs[0], x).min(S::one()).max(S::zero());
        let dt = cheb_eval(&panel.coefs[1], x);
        let drho = (0..m).map(|p| cheb_eval(&panel.coefs[2 + p], x)).collect();
        DistEval {
            t,
            rho: self.at_zero.rho.clone(),
            value,
            dt,
            drho,
        }
    }
}

/// Chebyshev coefficients from samples at the extrema cos(kπ/N), k = 0..N.
fn cheb_coeffs<S: Real>(f: &[S]) -> Vec<S> {
    let n = f.len() - 1;
    let mut coefs = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let end = if j % 2 == 0 { f[n] } else { -f[n] };
        let mut acc = (f[0] + end) * real::<S>(0.5);
        for (k, &fk) in f.iter().enumerate().take(n).skip(1) {
            acc += fk * real::<S>(((j * k) as f64 * std::f64::consts::PI / n as f64).cos());
        }
        coefs.push(acc * real::<S>(2.0 / n as f64));
    }
    coefs
}

/// Clenshaw evaluation with the halved first/last coefficient convention.
fn cheb_eval<S: Real>(coefs: &[S], x: S) -> S {
    let n = coefs.len() - 1;
    let two_x = x + x;
    let mut b1 = S::zero();
    let mut b2 = S::zero();
    for j in (1..=n).rev() {
        let c = if j == n {
            coefs[j] * real::<S>(0.5)
        } else {
            coefs[j]
        };
        let b0 = c + two_x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coefs[0] * real::<S>(0.5) + x * b1 - b2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp(rho: &[f64]) -> RadialPoint<f64> {
        RadialPoint::new(rho.to_vec()).unwrap()
    }

    fn rand_rho(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> RadialPoint<f64> {
        let v: Vec<f64> = (0..m).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * scale).collect();
        rp(&v)
    }

    #[test]
    fn endpoints_are_exact() {
        for rho in [rp(&[0.7]), rp(&[0.4, -1.1]), rp(&[0.3, -0.2, 0.8])] {
            let cache = DistCache::new(&rho).unwrap();
            let at0 = cache.eval(0.0);
            assert_eq!(at0.value, 0.0);
            assert!(at0.drho.iter().all(|&g| g == 0.0));
            let top = cache.eval(cache.bmax());
            assert_eq!(top.value, 1.0);
            assert_eq!(top.dt, 0.0);
            assert!(top.drho.iter().all(|&g| g == 0.0));
            assert_eq!(cache.value(cache.bmax() + 1.0), 1.0);
        }
    }

    #[test]
    fn m1_value_matches_entropy_bisection() {
        // at ρ = 0 the sublevel set is symmetric: D = 2λ − 1 where
        // λ ln λ + (1−λ) ln(1−λ) = t − ln 2 on [1/2, 1)
        let t = 0.1f64;
        let target = t - 2f64.ln();
        let g = |l: f64| l * l.ln() + (1.0 - l) * (1.0 - l).ln();
        let (mut lo, mut hi) = (0.5, 1.0 - 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let want = 2.0 * 0.5 * (lo + hi) - 1.0;
        assert!((want - 0.44).abs() < 0.01, "oracle sanity: {want}");
        let cache = DistCache::new(&rp(&[0.0])).unwrap();
        assert!(
            (cache.value(t) - want).abs() < 1e-12,
            "{} vs {want}",
            cache.value(t)
        );
    }

    #[test]
    fn m1_value_matches_direct_sublevel_length() {
        // independent route: bisect b itself as a function of λ₁ on both
        // sides of the minimum; D is the length between the crossings
        for (t, r) in [(0.05, 0.9), (0.3, -1.4), (0.8, 2.0)] {
            let rho = rp(&[r]);
            let cache = DistCache::new(&rho).unwrap();
            let mu1 = moment_map(&rho).component(1);
            let b_of = |l1: f64| b_eval(&SimplexPoint::from_tail(&[l1]).unwrap(), &rho);
            let left = if t >= b_of(0.0) {
                0.0
            } else {
                bisect_level(b_of, t, 0.0, mu1)
            };
            let right = if t >= b_of(1.0) {
                1.0
            } else {
                bisect_level(b_of, t, mu1, 1.0)
            };
            let want = right - left;
            assert!(
                (cache.value(t) - want).abs() < 1e-10,
                "t={t} ρ={r}: {} vs {want}",
                cache.value(t)
            );
        }
    }

    #[test]
    fn value_is_monotone_and_bounded_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [1usize, 2] {
            for _ in 0..20 {
                let rho = rand_rho(&mut rng, m, 2.0);
                let cache = DistCache::new(&rho).unwrap();
                let top = cache.bmax() * 1.05;
                let mut prev = -1.0;
                for k in 0..50 {
                    let t = top * k as f64 / 49.0;
                    let v = cache.value(t);
                    assert!((0.0..=1.0).contains(&v));
                    assert!(v >= prev - 1e-12, "m={m} t={t}: {v} < {prev}");
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn symmetry_under_sign_flip_and_permutation() {
        let (t, r) = (0.22, 1.3);
        let c_pos = DistCache::new(&rp(&[r])).unwrap();
        let c_neg = DistCache::new(&rp(&[-r])).unwrap();
        assert!((c_pos.value(t) - c_neg.value(t)).abs() < 1e-13);

        let c_ab = DistCache::new(&rp(&[0.6, -0.9])).unwrap();
        let c_ba = DistCache::new(&rp(&[-0.9, 0.6])).unwrap();
        for t in [0.05, 0.3, 0.9] {
            assert!((c_ab.value(t) - c_ba.value(t)).abs() < 1e-8);
        }

        let c_abc = DistCache::new(&rp(&[0.5, -0.3, 0.9])).unwrap();
        let c_cab = DistCache::new(&rp(&[0.9, 0.5, -0.3])).unwrap();
        for t in [0.1, 0.4, 1.1] {
            assert!(
                (c_abc.value(t) - c_cab.value(t)).abs() < 1e-7,
                "t={t}: {} vs {}",
                c_abc.value(t),
                c_cab.value(t)
            );
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        // Richardson-extrapolated central differences of the exact evaluator
        let cases: Vec<(f64, Vec<f64>)> = vec![
            (0.25, vec![0.7]),
            (0.55, vec![-1.1]),
            (0.18, vec![0.4, -0.8]),
            (0.45, vec![0.9, 0.3]),
        ];
        for (t, rho_v) in cases {
            let rho = rp(&rho_v);
            let cache = DistCache::new(&rho).unwrap();
            let ev = cache.eval(t);
            let h = 1e-3;
            let central = |f: &dyn Fn(f64) -> f64, step: f64| (f(step) - f(-step)) / (2.0 * step);
            let richardson = |f: &dyn Fn(f64) -> f64| {
                let d1 = central(f, h);
                let d2 = central(f, h * 0.5);
                (4.0 * d2 - d1) / 3.0
            };

            let in_t = |dt: f64| cache.value(t + dt);
            let fd_t = richardson(&|s| in_t(s));
            assert!(
                (fd_t - ev.dt).abs() <= 1e-5 * ev.dt.abs().max(1e-3),
                "dt at t={t} ρ={rho_v:?}: {fd_t} vs {}",
                ev.dt
            );

            for p in 0..rho_v.len() {
                let in_rho = |dr: f64| {
                    let mut v = rho_v.clone();
                    v[p] += dr;
                    DistCache::new(&rp(&v)).unwrap().value(t)
                };
                let fd_r = richardson(&|s| in_rho(s));
                assert!(
                    (fd_r - ev.drho[p]).abs() <= 1e-5 * ev.drho[p].abs().max(1e-3),
                    "dρ_{p} at t={t} ρ={rho_v:?}: {fd_r} vs {}",
                    ev.drho[p]
                );
            }
        }
    }

    #[test]
    fn m2_dt_continuous_down_to_zero() {
        let cache = DistCache::new(&rp(&[0.0, 0.0])).unwrap();
        let dt0 = cache.eval(0.0).dt;
        assert!(dt0.is_finite() && dt0 > 0.0);
        let err5 = (cache.eval(1e-5).dt - dt0).abs();
        let err7 = (cache.eval(1e-7).dt - dt0).abs();
        assert!(err7 < err5, "{err7} vs {err5}");
        assert!(err7 < 1e-3 * dt0);
        // the same limit at an asymmetric point
        let cache = DistCache::new(&rp(&[0.8, -0.4])).unwrap();
        let dt0 = cache.eval(0.0).dt;
        assert!((cache.eval(1e-7).dt - dt0).abs() < 1e-3 * dt0);
    }

    #[test]
    fn m1_dt_diverges_at_zero_and_m3_vanishes() {
        let c1 = DistCache::new(&rp(&[0.5])).unwrap();
        assert!(c1.eval(0.0).dt.is_infinite());
        let c3 = DistCache::new(&rp(&[0.3, -0.2, 0.8])).unwrap();
        assert_eq!(c3.eval(0.0).dt, 0.0);
        assert!(c3.eval(1e-6).dt < 1e-2);
    }

    #[test]
    fn small_t_square_root_scaling() {
        let cache = DistCache::new(&rp(&[0.9])).unwrap();
        let mut prev = None;
        for k in 4..=8 {
            let t = 10f64.powi(-k);
            let ratio = cache.value(t) / t.sqrt();
            assert!(ratio.is_finite() && ratio > 0.0);
            if let Some(p) = prev {
                let rel: f64 = (ratio - p) / p;
                assert!(rel.abs() < 0.01, "k={k}: {ratio} vs {p}");
            }
            prev = Some(ratio);
        }
    }

    #[test]
    fn doubling_the_order_leaves_value_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let rho = rand_rho(&mut rng, 2, 1.5);
            let base = DistCache::new(&rho).unwrap();
            let fine = DistCache::with_order(&rho, 2 * default_order(2)).unwrap();
            let t = rng.random::<f64>() * base.bmax() * 0.95;
            assert!(
                (base.value(t) - fine.value(t)).abs() < 1e-8,
                "t={t}: {} vs {}",
                base.value(t),
                fine.value(t)
            );
        }
        for _ in 0..3 {
            let rho = rand_rho(&mut rng, 3, 1.0);
            let base = DistCache::new(&rho).unwrap();
            let fine = DistCache::with_order(&rho, 2 * default_order(3)).unwrap();
            let t = rng.random::<f64>() * base.bmax() * 0.9;
            assert!(
                (base.value(t) - fine.value(t)).abs() < 1e-7,
                "t={t}: {} vs {}",
                base.value(t),
                fine.value(t)
            );
        }
    }

    #[test]
    fn monte_carlo_agrees_within_four_sigma() {
        let cases: Vec<(f64, Vec<f64>)> = vec![
            (0.2, vec![0.8]),
            (0.2, vec![1.0, -1.0]),
            (0.25, vec![0.3, -0.5, 0.2]),
        ];
        for (t, rho_v) in cases {
            let rho = rp(&rho_v);
            let cache = DistCache::new(&rho).unwrap();
            let mc = d_mc_oracle(t, &rho, 200_000, 42);
            let gap = (cache.value(t) - mc.value).abs();
            assert!(
                gap < 4.0 * mc.std_err,
                "ρ={rho_v:?}: |{} - {}| = {gap} vs 4σ = {}",
                cache.value(t),
                mc.value,
                4.0 * mc.std_err
            );
        }
    }

    #[test]
    fn monte_carlo_is_exact_at_the_ends() {
        let rho = rp(&[0.4, -0.7]);
        let lo = d_mc_oracle(0.0, &rho, 10_000, 3);
        assert_eq!(lo.value, 0.0);
        let hi = d_mc_oracle(b_max(&rho) + 0.5, &rho, 10_000, 3);
        assert_eq!(hi.value, 1.0);
    }

    #[test]
    fn monte_carlo_ignores_worker_count() {
        let rho = rp(&[0.6, -0.2]);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| d_mc_oracle(0.3, &rho, 150_001, 7).value)
        };
        let one = run(1);
        let three = run(3);
        assert_eq!(one.to_bits(), three.to_bits());
    }

    #[test]
    fn critical_levels_are_sorted_interior_face_minima() {
        let rho = rp(&[1.0, -0.5]);
        let cache = DistCache::new(&rho).unwrap();
        let crit = cache.crit_values();
        assert!(!crit.is_empty());
        for w in crit.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(crit[0] > 0.0 && *crit.last().unwrap() < cache.bmax());
        // the facet minima −ln(1−μ_i) must all appear
        let mu = moment_map(&rho);
        for i in 0..=2 {
            let v = -(1.0 - mu.component(i)).ln();
            assert!(
                crit.iter().any(|&c| (c - v).abs() < 1e-12),
                "missing facet minimum {v}"
            );
        }
    }

    #[test]
    fn profile_tracks_the_exact_evaluator() {
        let rho = rp(&[0.5, -0.8]);
        let cache = DistCache::new(&rho).unwrap();
        let prof = DistProfile::new(&cache);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut probes: Vec<f64> = (0..60)
            .map(|_| rng.random::<f64>() * cache.bmax())
            .collect();
        for &c in cache.crit_values() {
            probes.push(c * (1.0 - 1e-3));
            probes.push(c * (1.0 + 1e-3));
        }
        for &t in &probes {
            let exact = cache.eval(t);
            let interp = prof.eval(t);
            assert!(
                (exact.value - interp.value).abs() < 1e-8,
                "t={t}: {} vs {}",
                exact.value,
                interp.value
            );
            assert!(
                (exact.dt - interp.dt).abs() < 1e-6 + 1e-5 * exact.dt.abs(),
                "dt at t={t}: {} vs {}",
                exact.dt,
                interp.dt
            );
            for p in 0..2 {
                assert!(
                    (exact.drho[p] - interp.drho[p]).abs() < 1e-6 + 1e-5 * exact.drho[p].abs(),
                    "dρ_{p} at t={t}"
                );
            }
        }
        assert_eq!(prof.eval(cache.bmax() + 0.1).value, 1.0);
        assert_eq!(prof.eval(0.0).value, 0.0);
    }
}
