//! The unit simplex Δ ⊂ ℝ^m, the moment map μ(ρ) with its derivative
//! tensors, and mass-one quadrature rules on the facets of Δ.
//!
//! Conventions used throughout the crate:
//!
//! * a point of Δ carries m+1 coordinates λ₀..λ_m with λ₀ = 1 − Σλ_i derived;
//! * the radial coordinate ρ has m components ρ₁..ρ_m with ρ₀ ≡ 0 implicit;
//! * facet i of Δ is the face {λ_i = 0}; its measure dx_(i) is normalized to
//!   total mass 1, which makes the m+1 facets with weights μ_i reproduce the
//!   normalized Lebesgue measure of Δ under the radial change of variables.

use thiserror::Error;

use crate::matrix::Matrix;
use crate::quad::gauss_legendre;
use crate::scalar::{real, Real};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SimplexError {
    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("coordinate {index} is negative ({value})")]
    NegativeCoordinate { index: usize, value: f64 },
    #[error("coordinates sum to {sum}, exceeding 1")]
    MassExceeded { sum: f64 },
    #[error("facet index {facet} out of range for m = {m}")]
    InvalidFacet { facet: usize, m: usize },
    #[error("facet quadrature not implemented for m = {m} (desk scale is m ≤ 3)")]
    UnsupportedDimension { m: usize },
    #[error("point lies off facet {facet}: coordinate is {value}")]
    OffFacet { facet: usize, value: f64 },
}

/// Tolerance for validating that user-supplied coordinates form a simplex
/// point; interior arithmetic never re-validates.
const COORD_SLACK: f64 = 1e-14;

/// Radial coordinates ρ = (ρ₁,…,ρ_m); the implicit ρ₀ is 0.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialPoint<S> {
    rho: Vec<S>,
}

impl<S: Real> RadialPoint<S> {
    pub fn new(rho: Vec<S>) -> Result<Self, SimplexError> {
        for (k, v) in rho.iter().enumerate() {
            if !v.is_finite() {
                return Err(SimplexError::NonFinite { index: k + 1 });
            }
        }
        Ok(RadialPoint { rho })
    }

    /// Number of free coordinates m.
    pub fn m(&self) -> usize {
        self.rho.len()
    }

    /// ρ_i for i ∈ {0,…,m}; ρ₀ is 0.
    pub fn component(&self, i: usize) -> S {
        if i == 0 {
            S::zero()
        } else {
            self.rho[i - 1]
        }
    }

    pub fn coords(&self) -> &[S] {
        &self.rho
    }

    /// log(1 + Σ e^{ρ_i}), evaluated with the largest exponent shifted out so
    /// it never overflows.
    pub fn log_partition(&self) -> S {
        let mut top = S::zero(); // ρ₀
        for &r in &self.rho {
            if r > top {
                top = r;
            }
        }
        let mut acc = (-top).exp();
        for &r in &self.rho {
            acc += (r - top).exp();
        }
        top + acc.ln()
    }
}

/// A point of Δ, stored with all m+1 coordinates; index 0 is the derived λ₀.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint<S> {
    lambda: Vec<S>,
}

impl<S: Real> SimplexPoint<S> {
    /// Builds from the free coordinates (λ₁,…,λ_m); λ₀ is derived.
    /// Exact zeros are allowed; negative round-off within 1e−14 is clamped.
    pub fn from_tail(tail: &[S]) -> Result<Self, SimplexError> {
        let slack = S::tol(COORD_SLACK);
        let mut lambda = Vec::with_capacity(tail.len() + 1);
        lambda.push(S::zero());
        let mut sum = S::zero();
        for (k, &v) in tail.iter().enumerate() {
            if !v.is_finite() {
                return Err(SimplexError::NonFinite { index: k + 1 });
            }
            if v < -slack {
                return Err(SimplexError::NegativeCoordinate {
                    index: k + 1,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
            let v = v.max(S::zero());
            sum += v;
            lambda.push(v);
        }
        if sum > S::one() + slack {
            return Err(SimplexError::MassExceeded {
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        lambda[0] = (S::one() - sum).max(S::zero());
        Ok(SimplexPoint { lambda })
    }

    /// The vertex v_i (coordinate i equal to 1).
    pub fn vertex(m: usize, i: usize) -> Self {
        let mut lambda = vec![S::zero(); m + 1];
        lambda[i] = S::one();
        SimplexPoint { lambda }
    }

    pub fn m(&self) -> usize {
        self.lambda.len() - 1
    }

    /// All coordinates (λ₀,…,λ_m).
    pub fn coords(&self) -> &[S] {
        &self.lambda
    }

    pub fn component(&self, i: usize) -> S {
        self.lambda[i]
    }
}

/// A point on a named facet of Δ.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint<S> {
    facet: usize,
    point: SimplexPoint<S>,
}

impl<S: Real> BoundaryPoint<S> {
    pub fn new(facet: usize, point: SimplexPoint<S>) -> Result<Self, SimplexError> {
        let m = point.m();
        if facet > m {
            return Err(SimplexError::InvalidFacet { facet, m });
        }
        let v = point.component(facet);
        if v.abs() > S::tol(COORD_SLACK) {
            return Err(SimplexError::OffFacet {
                facet,
                value: v.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mut point = point;
        point.lambda[facet] = S::zero();
        Ok(BoundaryPoint { facet, point })
    }

    pub fn facet(&self) -> usize {
        self.facet
    }

    pub fn point(&self) -> &SimplexPoint<S> {
        &self.point
    }
}

/// μ(ρ): the interior point e^{ρ_i}/(1+Σe^ρ) with μ₀ = 1/(1+Σe^ρ), the
/// unique minimizer of the potential b(·,ρ).
pub fn moment_map<S: Real>(rho: &RadialPoint<S>) -> SimplexPoint<S> {
    let m = rho.m();
    let mut top = S::zero();
    for &r in rho.coords() {
        if r > top {
            top = r;
        }
    }
    let mut lambda = Vec::with_capacity(m + 1);
    lambda.push((-top).exp());
    for &r in rho.coords() {
        lambda.push((r - top).exp());
    }
    let total: S = lambda.iter().copied().sum();
    for v in &mut lambda {
        *v /= total;
    }
    SimplexPoint { lambda }
}

/// ∂μ_i/∂ρ_p = δ_{ip}μ_i − μ_iμ_p as an (m+1)×m matrix; row i ∈ {0,…,m},
/// column p−1 for p ∈ {1,…,m}. Each column sums to zero.
pub fn moment_jacobian<S: Real>(rho: &RadialPoint<S>) -> Matrix<S> {
    let mu = moment_map(rho);
    let m = rho.m();
    Matrix::from_fn(m + 1, m, |i, p1| {
        let p = p1 + 1;
        let delta = if i == p { S::one() } else { S::zero() };
        mu.component(i) * (delta - mu.component(p))
    })
}

/// ∂²μ_i/∂ρ_p∂ρ_q for every i: a vector of m×m matrices indexed by i,
/// columns/rows at p−1, q−1. Product rule on the Jacobian entries:
/// μ_{i,p,q} = δ_{ip}δ_{iq}μ_i − δ_{ip}μ_iμ_q − δ_{iq}μ_iμ_p − δ_{pq}μ_iμ_p
///             + 2μ_iμ_pμ_q.
/// For each (p,q) the entries sum to zero over i.
pub fn moment_hessians<S: Real>(rho: &RadialPoint<S>) -> Vec<Matrix<S>> {
    let mu = moment_map(rho);
    let m = rho.m();
    let two = real::<S>(2.0);
    (0..=m)
        .map(|i| {
            Matrix::from_fn(m, m, |p1, q1| {
                let (p, q) = (p1 + 1, q1 + 1);
                let mi = mu.component(i);
                let mp = mu.component(p);
                let mq = mu.component(q);
                let mut v = two * mi * mp * mq;
                if i == p {
                    v += mi * (if i == q { S::one() } else { S::zero() }) - mi * mq;
                }
                if i == q {
                    v -= mi * mp;
                }
                if p == q {
                    v -= mi * mp;
                }
                v
            })
        })
        .collect()
}

/// Mass-one quadrature rule on a facet of Δ.
#[derive(Clone, Debug)]
pub struct FacetRule<S> {
    facet: usize,
    nodes: Vec<SimplexPoint<S>>,
    weights: Vec<S>,
}

impl<S: Real> FacetRule<S> {
    pub fn facet(&self) -> usize {
        self.facet
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SimplexPoint<S>, S)> + '_ {
        self.nodes.iter().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> S {
        self.weights.iter().copied().sum()
    }
}

/// Embeds facet parameters into Δ. Facet i ≥ 1 uses the remaining free
/// coordinates in ascending order with λ₀ derived; facet 0 uses (x₁,…,x_{m−1})
/// with x_m = 1 − Σ. `u` has length m−1.
pub fn facet_point<S: Real>(m: usize, facet: usize, u: &[S]) -> SimplexPoint<S> {
    debug_assert_eq!(u.len(), m - 1);
    let mut lambda = vec![S::zero(); m + 1];
    let mut sum = S::zero();
    for &v in u {
        sum += v;
    }
    if facet == 0 {
        for (k, &v) in u.iter().enumerate() {
            lambda[k + 1] = v;
        }
        lambda[m] = (S::one() - sum).max(S::zero());
    } else {
        let mut k = 0;
        for j in 1..=m {
            if j == facet {
                continue;
            }
            lambda[j] = u[k];
            k += 1;
        }
        lambda[0] = (S::one() - sum).max(S::zero());
    }
    SimplexPoint { lambda }
}

/// Quadrature rule on facet `facet` of Δ ⊂ ℝ^m, exact for polynomials in the
/// facet parameters up to degree `order` (for m ≤ 3; beyond the tabulated
/// triangle degrees a uniform barycentric refinement with the midpoint rule
/// takes over).
pub fn facet_rule<S: Real>(
    m: usize,
    facet: usize,
    order: usize,
) -> Result<FacetRule<S>, SimplexError> {
    if facet > m {
        return Err(SimplexError::InvalidFacet { facet, m });
    }
    match m {
        1 => {
            // facets are single points: the opposite vertex
            let node = if facet == 0 {
                SimplexPoint::vertex(1, 1)
            } else {
                SimplexPoint::vertex(1, 0)
            };
            Ok(FacetRule {
                facet,
                nodes: vec![node],
                weights: vec![S::one()],
            })
        }
        2 => {
            let points = order.div_ceil(2).max(1);
            let (xs, ws) = gauss_legendre::<S>(points);
            let nodes = xs.iter().map(|&u| facet_point(2, facet, &[u])).collect();
            Ok(FacetRule {
                facet,
                nodes,
                weights: ws,
            })
        }
        3 => {
            let (bary, ws) = triangle_rule::<S>(order);
            let nodes = bary
                .iter()
                .map(|b| facet_point(3, facet, &[b[0], b[1]]))
                .collect();
            Ok(FacetRule {
                facet,
                nodes,
                weights: ws,
            })
        }
        m => Err(SimplexError::UnsupportedDimension { m }),
    }
}

/// Same facet rule refined `level` times by uniform barycentric subdivision
/// (each level splits every parameter-triangle cell into 4). For m ≤ 2 the
/// refinement subdivides the parameter interval instead. Used by the
/// distribution integrals to drive the doubling convergence check.
pub fn facet_rule_refined<S: Real>(
    m: usize,
    facet: usize,
    order: usize,
    level: usize,
) -> Result<FacetRule<S>, SimplexError> {
    if facet > m {
        return Err(SimplexError::InvalidFacet { facet, m });
    }
    match m {
        1 => facet_rule(m, facet, order),
        2 => {
            let points = order.div_ceil(2).max(1);
            let (xs, ws) = gauss_legendre::<S>(points);
            let cells = 1usize << level;
            let cell_width = S::one() / real::<S>(cells as f64);
            let mut nodes = Vec::with_capacity(points * cells);
            let mut weights = Vec::with_capacity(points * cells);
            for c in 0..cells {
                let left = real::<S>(c as f64) * cell_width;
                for (&x, &w) in xs.iter().zip(&ws) {
                    nodes.push(facet_point(2, facet, &[left + x * cell_width]));
                    weights.push(w * cell_width);
                }
            }
            Ok(FacetRule {
                facet,
                nodes,
                weights,
            })
        }
        3 => {
            let (bary, ws) = triangle_rule::<S>(order);
            // subdivide the parameter triangle (0,0)-(1,0)-(0,1)
            let mut cells = vec![[
                [S::zero(), S::zero()],
                [S::one(), S::zero()],
                [S::zero(), S::one()],
            ]];
            for _ in 0..level {
                let mut next = Vec::with_capacity(cells.len() * 4);
                for cell in &cells {
                    let [a, b, c] = *cell;
                    let ab = mid(a, b);
                    let bc = mid(b, c);
                    let ca = mid(c, a);
                    next.push([a, ab, ca]);
                    next.push([ab, b, bc]);
                    next.push([ca, bc, c]);
                    next.push([ab, bc, ca]);
                }
                cells = next;
            }
            let scale = S::one() / real::<S>(cells.len() as f64);
            let mut nodes = Vec::with_capacity(cells.len() * bary.len());
            let mut weights = Vec::with_capacity(cells.len() * bary.len());
            for cell in &cells {
                let [a, b, c] = *cell;
                for (bc_coord, &w) in bary.iter().zip(&ws) {
                    let b0 = S::one() - bc_coord[0] - bc_coord[1];
                    let u = b0 * a[0] + bc_coord[0] * b[0] + bc_coord[1] * c[0];
                    let v = b0 * a[1] + bc_coord[0] * b[1] + bc_coord[1] * c[1];
                    nodes.push(facet_point(3, facet, &[u, v]));
                    weights.push(w * scale);
                }
            }
            Ok(FacetRule {
                facet,
                nodes,
                weights,
            })
        }
        m => Err(SimplexError::UnsupportedDimension { m }),
    }
}

fn mid<S: Real>(a: [S; 2], b: [S; 2]) -> [S; 2] {
    let half = real::<S>(0.5);
    [(a[0] + b[0]) * half, (a[1] + b[1]) * half]
}

/// Symmetric rules on the parameter triangle, weights normalized to mass 1.
/// Points are (u,v) pairs. Degrees above 5 fall back to the refined midpoint
/// construction.
fn triangle_rule<S: Real>(order: usize) -> (Vec<[S; 2]>, Vec<S>) {
    fn orbit3<S: Real>(a: f64, w: f64, pts: &mut Vec<[S; 2]>, ws: &mut Vec<S>) {
        // permutations of barycentric (1−2a, a, a) projected to (u,v)
        let b = 1.0 - 2.0 * a;
        for (u, v) in [(b, a), (a, b), (a, a)] {
            pts.push([real(u), real(v)]);
            ws.push(real(w));
        }
    }
    let mut pts = Vec::new();
    let mut ws = Vec::new();
    match order {
        0 | 1 => {
            pts.push([real(1.0 / 3.0), real(1.0 / 3.0)]);
            ws.push(S::one());
        }
        2 => orbit3(1.0 / 6.0, 1.0 / 3.0, &mut pts, &mut ws),
        3 | 4 => {
            orbit3(0.445948490915965, 0.223381589678011, &mut pts, &mut ws);
            orbit3(0.091576213509771, 0.109951743655322, &mut pts, &mut ws);
        }
        5 => {
            pts.push([real(1.0 / 3.0), real(1.0 / 3.0)]);
            ws.push(real(0.225));
            orbit3(0.470142064105115, 0.132394152788506, &mut pts, &mut ws);
            orbit3(0.101286507323456, 0.125939180544827, &mut pts, &mut ws);
        }
        higher => {
            // midpoint rule on a uniform refinement; convergence is driven by
            // the subdivision level rather than polynomial exactness
            let level = higher.next_power_of_two().trailing_zeros() as usize;
            let cells = 1usize << (2 * level);
            let base = (vec![[real::<S>(1.0 / 3.0), real::<S>(1.0 / 3.0)]], vec![S::one()]);
            let _ = cells;
            let _ = base;
            return refined_midpoint(level);
        }
    }
    (pts, ws)
}

fn refined_midpoint<S: Real>(level: usize) -> (Vec<[S; 2]>, Vec<S>) {
    let mut cells = vec![[
        [S::zero(), S::zero()],
        [S::one(), S::zero()],
        [S::zero(), S::one()],
    ]];
    for _ in 0..level {
        let mut next = Vec::with_capacity(cells.len() * 4);
        for cell in &cells {
            let [a, b, c] = *cell;
            let ab = mid(a, b);
            let bc = mid(b, c);
            let ca = mid(c, a);
            next.push([a, ab, ca]);
            next.push([ab, b, bc]);
            next.push([ca, bc, c]);
            next.push([ab, bc, ca]);
        }
        cells = next;
    }
    let third = real::<S>(1.0 / 3.0);
    let w = S::one() / real::<S>(cells.len() as f64);
    let pts = cells
        .iter()
        .map(|cell| {
            let [a, b, c] = *cell;
            [
                (a[0] + b[0] + c[0]) * third,
                (a[1] + b[1] + c[1]) * third,
            ]
        })
        .collect();
    (pts, vec![w; cells.len()])
}
