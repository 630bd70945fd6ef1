//! Small statistical toolkit for the Monte Carlo checks.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided 99.9% standard normal quantile.
pub const Z_999: f64 = 3.290_526_731_491_9;

/// Default significance level of the chi-square checks.
pub const DEFAULT_ALPHA: f64 = 1e-3;

/// Default minimum expected count per chi-square cell; sparser cells are
/// pooled.
pub const MIN_EXPECTED: f64 = 100.0;

#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of cells after pooling sparse ones.
    pub cells: usize,
}

impl ChiSquareTest {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

fn p_value(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(statistic)
}

/// Goodness of fit of `observed` counts to cell probabilities `probs`,
/// pooling cells whose expected count is below [`MIN_EXPECTED`].
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareTest {
    chi_square_gof_with(observed, probs, MIN_EXPECTED)
}

pub fn chi_square_gof_with(observed: &[u64], probs: &[f64], min_expected: f64) -> ChiSquareTest {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * n as f64;
        if e >= min_expected {
            cells.push((o as f64, e));
        } else {
            pool.0 += o as f64;
            pool.1 += e;
        }
    }
    if pool.1 > 0.0 || pool.0 > 0.0 {
        if pool.1 >= min_expected || cells.is_empty() {
            cells.push(pool);
        } else if let Some(last) = cells.last_mut() {
            last.0 += pool.0;
            last.1 += pool.1;
        }
    }
    let statistic = cells
        .iter()
        .map(|&(o, e)| {
            if e > 0.0 {
                (o - e) * (o - e) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let dof = cells.len().saturating_sub(1);
    ChiSquareTest {
        statistic,
        dof,
        p_value: p_value(statistic, dof),
        cells: cells.len(),
    }
}

/// Two-sample homogeneity test on paired cell counts, pooling cells whose
/// smaller expected count is below [`MIN_EXPECTED`].
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquareTest {
    chi_square_two_sample_with(a, b, MIN_EXPECTED)
}

pub fn chi_square_two_sample_with(a: &[u64], b: &[u64], min_expected: f64) -> ChiSquareTest {
    assert_eq!(a.len(), b.len());
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let total = (na + nb) as f64;
    if na == 0 || nb == 0 {
        return ChiSquareTest {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
            cells: 0,
        };
    }
    let fa = na as f64 / total;
    let fb = nb as f64 / total;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let s = (x + y) as f64;
        if s * fa.min(fb) >= min_expected {
            cells.push((x as f64, y as f64));
        } else {
            pool.0 += x as f64;
            pool.1 += y as f64;
        }
    }
    if pool.0 + pool.1 > 0.0 {
        if (pool.0 + pool.1) * fa.min(fb) >= min_expected || cells.is_empty() {
            cells.push(pool);
        } else if let Some(last) = cells.last_mut() {
            last.0 += pool.0;
            last.1 += pool.1;
        }
    }
    let statistic = cells
        .iter()
        .map(|&(x, y)| {
            let s = x + y;
            let (ea, eb) = (s * fa, s * fb);
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    let dof = cells.len().saturating_sub(1);
    ChiSquareTest {
        statistic,
        dof,
        p_value: p_value(statistic, dof),
        cells: cells.len(),
    }
}

/// Sample mean with standard error and 99.9% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub n: u64,
    pub mean: f64,
    pub std_err: f64,
    pub half_width: f64,
}

impl MeanEstimate {
    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }
}

pub fn mean_estimate(xs: &[f64]) -> MeanEstimate {
    let n = xs.len();
    if n == 0 {
        return MeanEstimate {
            n: 0,
            mean: f64::NAN,
            std_err: f64::NAN,
            half_width: f64::NAN,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let std_err = (var / n as f64).sqrt();
    MeanEstimate {
        n: n as u64,
        mean,
        std_err,
        half_width: Z_999 * std_err,
    }
}

/// Frequency `k / n` with its binomial standard error.
pub fn proportion(k: u64, n: u64) -> MeanEstimate {
    let p = k as f64 / n.max(1) as f64;
    let std_err = (p * (1.0 - p) / n.max(1) as f64).sqrt();
    MeanEstimate {
        n,
        mean: p,
        std_err,
        half_width: Z_999 * std_err,
    }
}

/// Total-variation distance between two empirical laws on the same cells.
pub fn total_variation(a: &[u64], b: &[u64]) -> f64 {
    let na = a.iter().sum::<u64>().max(1) as f64;
    let nb = b.iter().sum::<u64>().max(1) as f64;
    0.5 * a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs())
        .sum::<f64>()
}

/// Draws counts of `n` multinomial trials with cell probabilities `p`.
pub fn multinomial<R: Rng + ?Sized>(n: u64, p: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = vec![0u64; p.len()];
    let mut left = n;
    let mut mass = 1.0f64;
    for (i, &pi) in p.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == p.len() || mass <= 0.0 {
            out[i] = left;
            break;
        }
        let q = (pi / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).expect("valid binomial").sample(rng);
        out[i] = k;
        left -= k;
        mass -= pi;
    }
    out
}

/// Observed TV distance between two samples together with the `level`
/// quantile of its bootstrap distribution under the pooled law.
#[derive(Debug, Clone, Serialize)]
pub struct TvBootstrap {
    pub observed: f64,
    pub null_mean: f64,
    pub null_quantile: f64,
    pub level: f64,
    pub resamples: usize,
}

impl TvBootstrap {
    pub fn within_null(&self) -> bool {
        self.observed <= self.null_quantile
    }
}

pub fn tv_bootstrap<R: Rng + ?Sized>(
    a: &[u64],
    b: &[u64],
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> TvBootstrap {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let total = (na + nb).max(1) as f64;
    let pooled: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x + y) as f64 / total)
        .collect();
    let mut null: Vec<f64> = (0..resamples)
        .map(|_| {
            total_variation(
                &multinomial(na, &pooled, rng),
                &multinomial(nb, &pooled, rng),
            )
        })
        .collect();
    null.sort_by(|x, y| x.total_cmp(y));
    let idx = ((level * resamples as f64).ceil() as usize).clamp(1, resamples.max(1)) - 1;
    TvBootstrap {
        observed: total_variation(a, b),
        null_mean: null.iter().sum::<f64>() / resamples.max(1) as f64,
        null_quantile: null.get(idx).copied().unwrap_or(0.0),
        level,
        resamples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn gof_on_exact_counts() {
        let t = chi_square_gof(&[250, 250, 250, 250], &[0.25; 4]);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 3);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        let t = chi_square_gof(&[400, 100, 250, 250], &[0.25; 4]);
        assert!(t.p_value < 1e-10);
    }

    #[test]
    fn two_sample_pooling() {
        let t = chi_square_two_sample(&[500, 500, 1, 0], &[500, 500, 0, 2]);
        assert_eq!(t.cells, 2);
        assert!(t.passes(DEFAULT_ALPHA));
    }

    #[test]
    fn p_value_reference() {
        // chi-square with 1 dof: P[X > 3.841459] = 0.05
        assert!((p_value(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn multinomial_sums_and_bootstrap_is_small() {
        let mut rng = RngStream::new(4, 0).rng();
        let c = multinomial(1000, &[0.2, 0.3, 0.5], &mut rng);
        assert_eq!(c.iter().sum::<u64>(), 1000);
        let a = multinomial(10_000, &[0.2, 0.3, 0.5], &mut rng);
        let b = multinomial(10_000, &[0.2, 0.3, 0.5], &mut rng);
        let boot = tv_bootstrap(&a, &b, 500, 0.999, &mut rng);
        assert!(boot.within_null());
        assert!(boot.null_quantile < 0.05);
        let far = tv_bootstrap(&a, &[0, 0, 10_000], 200, 0.999, &mut rng);
        assert!(!far.within_null());
    }

    #[test]
    fn mean_estimate_basics() {
        let m = mean_estimate(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.std_err - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}
