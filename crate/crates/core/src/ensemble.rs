//! Sampling lab for random fewnomials in one variable.
//!
//! A sample of degree N and sparsity n is a uniformly random n-element
//! exponent set together with independent standard complex Gaussian
//! coefficients divided by the monomial norms that make the full ensemble
//! (n = N+1) rotation invariant. The lab finds every nonzero root, bins
//! log|z|^2 into a radial histogram normalized per sample and per degree,
//! and carries the exact expected-span combinatorics the histogram mass is
//! checked against. All randomness is ChaCha8 with one stream per fixed-size
//! sample chunk, so results are bitwise independent of the thread count.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::roots::{self, RootsError};

/// Samples drawn per RNG stream; fixes the parallel decomposition.
const CHUNK: usize = 32;
/// Largest acceptable relative backward error for a root set.
const RESIDUAL_BAR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("need 1 <= n <= N+1 exponents (n={n}, N={n_deg})")]
    BadSparsity { n: u32, n_deg: u32 },
    #[error("root finder failed: {0}")]
    Roots(#[from] RootsError),
    #[error("root residual {backward_error:.3e} misses the {RESIDUAL_BAR:.0e} certificate")]
    ResidualTooLarge { backward_error: f64 },
    #[error("{failed} failures in {samples} samples exceeds the 0.1% budget")]
    TooManyFailures { failed: usize, samples: usize },
    #[error("histogram needs bins >= 1, samples >= 1, and lo < hi")]
    EmptyPlan,
}

/// One random fewnomial: sorted exponent set and matching coefficients.
#[derive(Debug, Clone)]
pub struct FewnomialSample {
    pub n_deg: u32,
    pub spectrum: Vec<u32>,
    pub coeffs: Vec<Complex64>,
}

/// Squared norm of z^j in degree N: j!(N-j)!/(N+1)!, in log space.
pub fn monomial_norm_sq(n_deg: u32, j: u32) -> f64 {
    assert!(j <= n_deg, "exponent {j} outside degree {n_deg}");
    let lg = |k: u32| libm::lgamma(k as f64 + 1.0);
    (lg(j) + lg(n_deg - j) - lg(n_deg + 1)).exp()
}

/// Uniform n-subset of {0,...,N}, sorted.
pub fn sample_spectrum(
    n_deg: u32,
    n: u32,
    rng: &mut impl Rng,
) -> Result<Vec<u32>, EnsembleError> {
    if n < 1 || n > n_deg + 1 {
        return Err(EnsembleError::BadSparsity { n, n_deg });
    }
    let mut picks: Vec<u32> = rand::seq::index::sample(rng, n_deg as usize + 1, n as usize)
        .iter()
        .map(|i| i as u32)
        .collect();
    picks.sort_unstable();
    Ok(picks)
}

/// Random fewnomial: spectrum as above, coefficient at exponent j a standard
/// complex Gaussian divided by the norm of z^j.
pub fn sample_fewnomial(
    n_deg: u32,
    n: u32,
    rng: &mut impl Rng,
) -> Result<FewnomialSample, EnsembleError> {
    let spectrum = sample_spectrum(n_deg, n, rng)?;
    let coeffs = spectrum
        .iter()
        .map(|&j| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                / monomial_norm_sq(n_deg, j).sqrt()
        })
        .collect();
    Ok(FewnomialSample {
        n_deg,
        spectrum,
        coeffs,
    })
}

/// The max(S) - min(S) nonzero roots of a sample, certified to the residual
/// bar. Singleton spectra have none.
pub fn nonzero_roots(sample: &FewnomialSample) -> Result<Vec<Complex64>, EnsembleError> {
    let s = &sample.spectrum;
    if s.len() < 2 {
        return Ok(Vec::new());
    }
    let (lo, hi) = (s[0] as usize, s[s.len() - 1] as usize);
    let mut dense = vec![Complex64::new(0.0, 0.0); hi - lo + 1];
    for (&j, &c) in s.iter().zip(&sample.coeffs) {
        dense[j as usize - lo] = c;
    }
    let set = roots::all_roots(&dense)?;
    if set.backward_error > RESIDUAL_BAR {
        return Err(EnsembleError::ResidualTooLarge {
            backward_error: set.backward_error,
        });
    }
    Ok(set.roots)
}

/// Radial zero histogram in rho = log|z|^2, density count/(samples N width).
/// Totals count every root, in range or not, so the mass identity against
/// the mean drawn span is exact bookkeeping.
///
/// Standard errors come from the sample-to-sample spread of per-bin counts,
/// not from raw root counts: consecutive-gap roots of one sample sit on a
/// common circle, so they enter a bin as one clump and Poisson errors on
/// roots would understate the real uncertainty several-fold.
#[derive(Debug, Clone)]
pub struct RadialHistogram {
    pub n_deg: u32,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Successful samples; the normalization denominator.
    pub samples: usize,
    /// Samples discarded for root-finder failure, capped at 0.1%.
    pub failed: usize,
    /// All roots found over the degree and sample count.
    pub total_mass: f64,
    /// Mean spectrum span over successful samples.
    pub mean_span: f64,
    /// Standard error of total_mass from the sample-to-sample span spread.
    pub mass_stderr: f64,
}

#[derive(Default, Clone)]
struct Tally {
    counts: Vec<u64>,
    counts_sq: Vec<u64>,
    roots: u64,
    span_sum: u64,
    span_sq_sum: u64,
    ok: u64,
    failed: u64,
}

impl Tally {
    fn new(bins: usize) -> Self {
        Tally {
            counts: vec![0; bins],
            counts_sq: vec![0; bins],
            ..Default::default()
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.counts_sq.iter_mut().zip(&other.counts_sq) {
            *a += b;
        }
        self.roots += other.roots;
        self.span_sum += other.span_sum;
        self.span_sq_sum += other.span_sq_sum;
        self.ok += other.ok;
        self.failed += other.failed;
        self
    }
}

/// Samples the ensemble, finds all roots, and bins log|z|^2 over [lo, hi).
pub fn empirical_radial(
    n_deg: u32,
    n: u32,
    samples: usize,
    bins: usize,
    lo: f64,
    hi: f64,
    seed: u64,
) -> Result<RadialHistogram, EnsembleError> {
    if samples < 1 || bins < 1 || !(lo < hi) {
        return Err(EnsembleError::EmptyPlan);
    }
    if n < 1 || n > n_deg + 1 {
        return Err(EnsembleError::BadSparsity { n, n_deg });
    }
    let width = (hi - lo) / bins as f64;
    let chunks = samples.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64 + 1);
            let mut t = Tally::new(bins);
            let mut local = vec![0u64; bins];
            let in_chunk = CHUNK.min(samples - chunk * CHUNK);
            for _ in 0..in_chunk {
                let sample = sample_fewnomial(n_deg, n, &mut rng).expect("validated arguments");
                match nonzero_roots(&sample) {
                    Err(_) => t.failed += 1,
                    Ok(roots) => {
                        let span =
                            (sample.spectrum[sample.spectrum.len() - 1] - sample.spectrum[0]) as u64;
                        t.ok += 1;
                        t.span_sum += span;
                        t.span_sq_sum += span * span;
                        local.iter_mut().for_each(|c| *c = 0);
                        for z in roots {
                            t.roots += 1;
                            let rho = z.norm_sqr().ln();
                            let k = ((rho - lo) / width).floor();
                            if k >= 0.0 && (k as usize) < bins {
                                local[k as usize] += 1;
                            }
                        }
                        for (k, &c) in local.iter().enumerate() {
                            t.counts[k] += c;
                            t.counts_sq[k] += c * c;
                        }
                    }
                }
            }
            t
        })
        .reduce(|| Tally::new(bins), Tally::merge);

    let failed = tally.failed as usize;
    if failed * 1000 > samples {
        return Err(EnsembleError::TooManyFailures { failed, samples });
    }
    let ok = tally.ok as usize;
    let norm = ok as f64 * n_deg as f64 * width;
    let density: Vec<f64> = tally.counts.iter().map(|&c| c as f64 / norm).collect();
    let stderr: Vec<f64> = tally
        .counts
        .iter()
        .zip(&tally.counts_sq)
        .map(|(&c, &sq)| {
            let s = ok as f64;
            let var = (sq as f64 - (c as f64) * (c as f64) / s) / (s - 1.0).max(1.0);
            // one-count floor keeps empty bins testable
            (var * s).sqrt().max(1.0) / norm
        })
        .collect();
    let mean_span = tally.span_sum as f64 / ok as f64;
    let span_var =
        (tally.span_sq_sum as f64 / ok as f64 - mean_span * mean_span).max(0.0);
    Ok(RadialHistogram {
        n_deg,
        edges: (0..=bins).map(|k| lo + k as f64 * width).collect(),
        counts: tally.counts,
        density,
        stderr,
        samples: ok,
        failed,
        total_mass: tally.roots as f64 / (ok as f64 * n_deg as f64),
        mean_span,
        mass_stderr: (span_var / ok as f64).sqrt() / n_deg as f64,
    })
}

/// Exact mean of max - min over uniform n-subsets of {0,...,N}, summed by
/// span value: (N+1-w) C(w-1, n-2) subsets have span exactly w.
pub fn expected_span_exact(n_deg: u32, n: u32) -> Result<BigRational, EnsembleError> {
    if n < 1 || n > n_deg + 1 {
        return Err(EnsembleError::BadSparsity { n, n_deg });
    }
    if n == 1 {
        return Ok(BigRational::from(BigInt::from(0)));
    }
    let mut numer = BigUint::from(0u32);
    let mut denom = BigUint::from(0u32);
    // choose = C(w-1, n-2), updated incrementally over w
    let mut choose = BigUint::from(1u32);
    for w in (n - 1)..=n_deg {
        let slots = BigUint::from(n_deg + 1 - w);
        numer += BigUint::from(w) * &slots * &choose;
        denom += slots * &choose;
        choose = choose * BigUint::from(w) / BigUint::from(w + 2 - n);
    }
    Ok(BigRational::new(numer.into(), denom.into()))
}

/// Monte Carlo mean span of sampled spectra.
pub fn expected_span_mc(n_deg: u32, n: u32, samples: usize, seed: u64) -> Result<f64, EnsembleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0u64;
    for _ in 0..samples.max(1) {
        let s = sample_spectrum(n_deg, n, &mut rng)?;
        total += (s[s.len() - 1] - s[0]) as u64;
    }
    Ok(total as f64 / samples.max(1) as f64)
}

/// Linear form N(n-1)/(n+1) + 2n/(n+1), reported alongside the exact mean;
/// it exceeds the exact value by 2/(n+1) at every N, same large-N limit.
pub fn span_linear_form(n_deg: u32, n: u32) -> f64 {
    let (nn, nf) = (n_deg as f64, n as f64);
    (nn * (nf - 1.0) + 2.0 * nf) / (nf + 1.0)
}

/// Side-by-side span report: exact enumeration mean, Monte Carlo estimate,
/// and the linear form.
#[derive(Debug, Clone)]
pub struct SpanReport {
    pub n_deg: u32,
    pub n: u32,
    pub exact: BigRational,
    pub exact_value: f64,
    pub mc: f64,
    pub linear_form: f64,
}

pub fn span_report(
    n_deg: u32,
    n: u32,
    mc_samples: usize,
    seed: u64,
) -> Result<SpanReport, EnsembleError> {
    use num_traits::ToPrimitive;
    let exact = expected_span_exact(n_deg, n)?;
    let exact_value = exact.to_f64().expect("ratio fits in f64");
    Ok(SpanReport {
        n_deg,
        n,
        exact_value,
        mc: expected_span_mc(n_deg, n, mc_samples, seed)?,
        linear_form: span_linear_form(n_deg, n),
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use num_traits::ToPrimitive;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    // Independent route to the norms: ||z^j||^2 equals the beta-type moment
    // of the radial profile, reduced to int_0^1 u^j (1-u)^{N-j} du.
    #[test]
    fn monomial_norms_match_the_radial_integral() {
        for (n_deg, j) in [(1u32, 0u32), (1, 1), (2, 1), (7, 0), (7, 3), (7, 7)] {
            let direct = monomial_norm_sq(n_deg, j);
            let moment = quad::adaptive(
                &mut |u: f64| u.powi(j as i32) * (1.0 - u).powi((n_deg - j) as i32),
                0.0,
                1.0,
                1e-14,
                1e-13,
                &[],
            )
            .unwrap()
            .value;
            assert!(
                (direct - moment).abs() < 1e-13,
                "N={n_deg} j={j}: {direct} vs {moment}"
            );
        }
        assert!((monomial_norm_sq(1, 0) - 0.5).abs() < 1e-15);
        assert!((monomial_norm_sq(2, 1) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn norm_ratios_telescope() {
        for j in [0u32, 1, 57, 120, 199] {
            let ratio = monomial_norm_sq(200, j) / monomial_norm_sq(200, j + 1);
            let expect = (200 - j) as f64 / (j + 1) as f64;
            assert!((ratio - expect).abs() < 1e-11 * expect, "j={j}");
        }
    }

    #[test]
    fn spectra_are_sorted_distinct_and_in_range() {
        let mut r = rng(3);
        for _ in 0..200 {
            let s = sample_spectrum(17, 5, &mut r).unwrap();
            assert_eq!(s.len(), 5);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(*s.last().unwrap() <= 17);
        }
        assert!(matches!(
            sample_spectrum(3, 5, &mut r),
            Err(EnsembleError::BadSparsity { .. })
        ));
        assert!(matches!(
            sample_spectrum(3, 0, &mut r),
            Err(EnsembleError::BadSparsity { .. })
        ));
    }

    #[test]
    fn spectra_are_uniform_over_the_three_smallest_pairs() {
        let mut r = rng(4);
        let draws = 100_000;
        let mut hits = [0u32; 3];
        for _ in 0..draws {
            let s = sample_spectrum(2, 2, &mut r).unwrap();
            let idx = match (s[0], s[1]) {
                (0, 1) => 0,
                (0, 2) => 1,
                (1, 2) => 2,
                other => panic!("impossible subset {other:?}"),
            };
            hits[idx] += 1;
        }
        let sigma = (draws as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for h in hits {
            assert!(
                (h as f64 - draws as f64 / 3.0).abs() < 3.0 * sigma,
                "{hits:?}"
            );
        }
    }

    #[test]
    fn full_support_uses_every_exponent() {
        let s = sample_spectrum(9, 10, &mut rng(5)).unwrap();
        assert_eq!(s, (0..=9).collect::<Vec<u32>>());
    }

    #[test]
    fn fixed_seeds_reproduce_samples() {
        let a = sample_fewnomial(40, 6, &mut rng(8)).unwrap();
        let b = sample_fewnomial(40, 6, &mut rng(8)).unwrap();
        assert_eq!(a.spectrum, b.spectrum);
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn coefficient_second_moments_follow_the_norms() {
        let n_deg = 6;
        let mut r = rng(9);
        let mut acc = vec![0.0f64; 7];
        let reps = 20_000;
        for _ in 0..reps {
            let s = sample_fewnomial(n_deg, 7, &mut r).unwrap();
            for (&j, c) in s.spectrum.iter().zip(&s.coeffs) {
                acc[j as usize] += c.norm_sqr();
            }
        }
        for j in 0..=6u32 {
            let mean = acc[j as usize] / reps as f64;
            let expect = 1.0 / monomial_norm_sq(n_deg, j);
            // |c|^2 is exponential with std = mean, so 4 sigma is 4/sqrt(reps)
            assert!(
                (mean - expect).abs() < 4.0 * expect / (reps as f64).sqrt(),
                "j={j}: {mean} vs {expect}"
            );
        }
    }

    #[test]
    fn explicit_quadratic_sample_has_roots_at_plus_minus_i() {
        let sample = FewnomialSample {
            n_deg: 2,
            spectrum: vec![0, 2],
            coeffs: vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        };
        let mut roots = nonzero_roots(&sample).unwrap();
        roots.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((roots[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((roots[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn root_count_is_the_spectrum_span() {
        let mut r = rng(10);
        for _ in 0..20 {
            let sample = sample_fewnomial(60, 4, &mut r).unwrap();
            let span = sample.spectrum[3] - sample.spectrum[0];
            assert_eq!(nonzero_roots(&sample).unwrap().len(), span as usize);
        }
        let lone = sample_fewnomial(60, 1, &mut r).unwrap();
        assert!(nonzero_roots(&lone).unwrap().is_empty());
    }

    #[test]
    fn overall_scaling_leaves_roots_fixed() {
        let sample = sample_fewnomial(30, 4, &mut rng(11)).unwrap();
        let base = nonzero_roots(&sample).unwrap();
        for scale in [
            Complex64::new(2.0, 1.0),
            Complex64::new(-3.5e4, 0.0),
            Complex64::new(0.0, 1e-6),
        ] {
            let mut scaled = sample.clone();
            for c in &mut scaled.coeffs {
                *c *= scale;
            }
            let roots = nonzero_roots(&scaled).unwrap();
            for (a, b) in base.iter().zip(&roots) {
                assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()));
            }
        }
    }

    #[test]
    fn high_degree_samples_stay_certified() {
        let mut r = rng(12);
        for _ in 0..3 {
            let sample = sample_fewnomial(200, 4, &mut r).unwrap();
            let span = sample.spectrum[3] - sample.spectrum[0];
            let roots = nonzero_roots(&sample).unwrap();
            assert_eq!(roots.len(), span as usize);
        }
    }

    #[test]
    fn enumerated_span_matches_brute_force() {
        for (n_deg, n) in [(2u32, 2u32), (5, 3), (8, 4), (8, 1)] {
            let mut total = 0u64;
            let mut count = 0u64;
            for mask in 0u32..(1 << (n_deg + 1)) {
                if mask.count_ones() == n {
                    let lo = mask.trailing_zeros();
                    let hi = 31 - mask.leading_zeros();
                    total += (hi - lo) as u64;
                    count += 1;
                }
            }
            let brute = BigRational::new(BigInt::from(total), BigInt::from(count));
            let exact = expected_span_exact(n_deg, n).unwrap();
            assert_eq!(exact, brute, "N={n_deg} n={n}");
        }
    }

    #[test]
    fn enumerated_span_has_the_product_form() {
        // mean span is (n-1)(N+2)/(n+1) exactly; the linear form overshoots
        // it by 2/(n+1).
        for (n_deg, n) in [(2u32, 2u32), (10, 3), (50, 4), (400, 4), (12, 13u32 - 1)] {
            let exact = expected_span_exact(n_deg, n).unwrap();
            let product = BigRational::new(
                BigInt::from((n - 1) * (n_deg + 2)),
                BigInt::from(n + 1),
            );
            assert_eq!(exact, product, "N={n_deg} n={n}");
            let gap = span_linear_form(n_deg, n) - exact.to_f64().unwrap();
            assert!((gap - 2.0 / (n as f64 + 1.0)).abs() < 1e-12);
        }
        let full = expected_span_exact(7, 8).unwrap();
        assert_eq!(full, BigRational::from(BigInt::from(7)));
    }

    #[test]
    fn normalized_span_approaches_its_limit() {
        let exact = expected_span_exact(400, 4).unwrap().to_f64().unwrap();
        assert!((exact / 400.0 - 0.6).abs() < 0.01 * 0.6);
    }

    #[test]
    fn monte_carlo_span_tracks_enumeration() {
        let samples = 20_000;
        let mc = expected_span_mc(50, 4, samples, 13).unwrap();
        let exact = expected_span_exact(50, 4).unwrap().to_f64().unwrap();
        // span std is below N/3; allow 4 sigma
        let bar = 4.0 * (50.0 / 3.0) / (samples as f64).sqrt();
        assert!((mc - exact).abs() < bar, "{mc} vs {exact}");
    }

    #[test]
    fn histogram_mass_is_the_mean_span_over_degree() {
        let h = empirical_radial(30, 3, 500, 24, -8.0, 8.0, 21).unwrap();
        assert_eq!(h.failed, 0);
        assert_eq!(h.samples, 500);
        assert!((h.total_mass - h.mean_span / 30.0).abs() < 1e-12);
        let binned: u64 = h.counts.iter().sum();
        assert!(binned as f64 <= h.total_mass * 500.0 * 30.0 + 0.5);
    }

    #[test]
    fn histogram_is_deterministic_across_thread_counts() {
        let a = empirical_radial(25, 3, 200, 16, -6.0, 6.0, 31).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| empirical_radial(25, 3, 200, 16, -6.0, 6.0, 31).unwrap());
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.total_mass.to_bits(), b.total_mass.to_bits());
    }

    #[test]
    fn histogram_is_roughly_symmetric() {
        // coefficient law is invariant under z -> 1/z together with spectrum
        // reversal, so mirrored bins agree up to Monte Carlo noise
        let h = empirical_radial(40, 3, 400, 24, -8.0, 8.0, 33).unwrap();
        for k in 0..12 {
            let (a, b) = (h.density[k], h.density[23 - k]);
            let sigma = h.stderr[k].hypot(h.stderr[23 - k]);
            assert!((a - b).abs() <= 5.0 * sigma, "bin {k}: {a} vs {b}");
        }
    }

    #[test]
    fn histogram_tracks_the_analytic_density() {
        let n = 4u32;
        let h = empirical_radial(100, n, 400, 20, -5.0, 5.0, 37).unwrap();
        let mut close = 0;
        for k in 0..20 {
            let mid = 0.5 * (h.edges[k] + h.edges[k + 1]);
            let f = crate::density::radial_density(n, mid).unwrap();
            let z = (h.density[k] - f).abs() / h.stderr[k];
            if z <= 3.0 {
                close += 1;
            }
            assert!(z <= 6.0, "bin {k}: density {} vs {f}", h.density[k]);
        }
        assert!(close >= 15, "only {close}/20 bins within 3 sigma");
    }

    #[test]
    fn histogram_mass_sits_near_the_exact_span_mean() {
        let (n_deg, n) = (100, 4u32);
        let h = empirical_radial(n_deg, n, 400, 20, -5.0, 5.0, 37).unwrap();
        let expect = expected_span_exact(n_deg, n).unwrap().to_f64().unwrap() / n_deg as f64;
        assert!(
            (h.total_mass - expect).abs() <= 3.0 * h.mass_stderr,
            "{} vs {expect} (sigma {})",
            h.total_mass,
            h.mass_stderr
        );
    }

    #[test]
    fn bad_plans_are_rejected() {
        assert!(matches!(
            empirical_radial(10, 3, 0, 4, -1.0, 1.0, 0),
            Err(EnsembleError::EmptyPlan)
        ));
        assert!(matches!(
            empirical_radial(10, 3, 5, 4, 1.0, -1.0, 0),
            Err(EnsembleError::EmptyPlan)
        ));
        assert!(matches!(
            empirical_radial(10, 30, 5, 4, -1.0, 1.0, 0),
            Err(EnsembleError::BadSparsity { .. })
        ));
    }

    #[test]
    fn span_report_carries_all_three_routes() {
        let r = span_report(10, 3, 4000, 41).unwrap();
        assert_eq!(r.exact, BigRational::new(BigInt::from(24), BigInt::from(4)));
        assert!((r.exact_value - 6.0).abs() < 1e-15);
        assert!((r.linear_form - 6.5).abs() < 1e-15);
        assert!((r.mc - 6.0).abs() < 0.3);
    }
}
