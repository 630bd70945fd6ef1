//! Return probabilities `p_t(o,o)` of simple random walk on `Z^d` and the
//! series `Z_i = Σ_t (t+1)^i p_t(o,o)`.
//!
//! A `d`-dimensional walk moves in coordinate `k` on a Binomial(t, 1/d)
//! number of its steps, and the coordinates then move independently. So
//! `p^(j+1)_t = Σ_s Bin(t, 1/(j+1))(s) p^(1)_s p^(j)_{t-s}` with
//! `p^(1)_{2k} = C(2k,k) 4^-k`. Binomial weights beyond 12 standard
//! deviations (below 1e-30) are skipped.

use rand::Rng;
use serde::Serialize;

use super::lattice::LatticeCoder;
use crate::error::{Error, Result};
use crate::rng::RngStream;

const WINDOW_SD: f64 = 12.0;

#[derive(Debug, Clone, Copy)]
pub struct HeatKernelOptions {
    /// Largest `d * t` evaluated exactly.
    pub exact_budget: u64,
    /// Walks used in Monte Carlo mode.
    pub mc_samples: u64,
    pub stream: RngStream,
}

impl Default for HeatKernelOptions {
    fn default() -> Self {
        Self {
            exact_budget: 2_000_000,
            mc_samples: 100_000,
            stream: RngStream::new(0, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernelValue {
    pub value: f64,
    /// 99.9% half-width in Monte Carlo mode, 0 when exact.
    pub half_width: f64,
    pub exact: bool,
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

/// Exact `p_t(o,o)` for `t = 0..=t_max`.
pub fn heat_kernel_table(dim: usize, t_max: usize) -> Result<Vec<f64>> {
    if dim == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let lf = ln_factorials(t_max);
    let ln4 = 4f64.ln();
    let p1: Vec<f64> = (0..=t_max)
        .map(|t| {
            if t % 2 == 1 {
                0.0
            } else {
                let k = t / 2;
                (lf[t] - 2.0 * lf[k] - k as f64 * ln4).exp()
            }
        })
        .collect();
    let mut p = p1.clone();
    for j in 1..dim {
        // coordinate j+1 joins the first j coordinates
        let q = 1.0 / (j + 1) as f64;
        let (lq, lr) = (q.ln(), (1.0 - q).ln());
        let mut next = vec![0.0; t_max + 1];
        for t in (0..=t_max).step_by(2) {
            let mean = t as f64 * q;
            let sd = (t as f64 * q * (1.0 - q)).sqrt();
            let lo = (mean - WINDOW_SD * sd - 1.0).floor().max(0.0) as usize;
            let hi = ((mean + WINDOW_SD * sd + 1.0).ceil() as usize).min(t);
            let mut acc = 0.0;
            let mut s = lo + (lo % 2);
            while s <= hi {
                let lb = lf[t] - lf[s] - lf[t - s] + s as f64 * lq + (t - s) as f64 * lr;
                acc += lb.exp() * p1[s] * p[t - s];
                s += 2;
            }
            next[t] = acc;
        }
        p = next;
    }
    Ok(p)
}

/// `P[S(t) = o]` for simple random walk on `Z^d`: exact when `d * t` is
/// within budget, otherwise a Monte Carlo estimate with its half-width.
pub fn heat_kernel(dim: usize, t: usize, opts: &HeatKernelOptions) -> Result<HeatKernelValue> {
    if dim == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if (dim as u64).saturating_mul(t as u64) <= opts.exact_budget {
        let table = heat_kernel_table(dim, t)?;
        return Ok(HeatKernelValue {
            value: table[t],
            half_width: 0.0,
            exact: true,
        });
    }
    let coder = LatticeCoder::new(dim, t)?;
    let mut rng = opts.stream.rng();
    let o = coder.origin();
    let mut hits = 0u64;
    for _ in 0..opts.mc_samples {
        let mut x = o;
        for _ in 0..t {
            x = coder.step(x, rng.random_range(0..2 * dim));
        }
        if x == o {
            hits += 1;
        }
    }
    let n = opts.mc_samples.max(1) as f64;
    let p = hits as f64 / n;
    Ok(HeatKernelValue {
        value: p,
        half_width: crate::stats::Z_999 * (p * (1.0 - p) / n).sqrt().max(1.0 / n),
        exact: false,
    })
}

/// Truncated series with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZEstimate {
    pub partial: f64,
    pub tail_bound: f64,
}

impl ZEstimate {
    pub fn upper(&self) -> f64 {
        self.partial + self.tail_bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZValues {
    pub z1: ZEstimate,
    pub z2: ZEstimate,
    /// Constant `C` used in the tail bound `p_t <= C t^{-d/2}`.
    pub constant: f64,
}

fn tail_constant(dim: usize, table: &[f64]) -> f64 {
    let d = dim as f64;
    // local limit theorem: p_t ~ 2 (d / 2πt)^{d/2} on even t
    let lclt = 2.0 * (d / (2.0 * std::f64::consts::PI)).powf(d / 2.0);
    let t_max = table.len() - 1;
    let observed = (t_max / 2..=t_max)
        .filter(|t| t % 2 == 0 && *t > 0)
        .map(|t| table[t] * (t as f64).powf(d / 2.0))
        .fold(0.0, f64::max);
    lclt.max(observed)
}

fn z_from_table(dim: usize, i: u32, table: &[f64], constant: f64) -> ZEstimate {
    let d = dim as f64;
    let t_max = table.len() - 1;
    let partial = table
        .iter()
        .enumerate()
        .map(|(t, p)| ((t + 1) as f64).powi(i as i32) * p)
        .sum();
    // even t > T: (t+1)^i <= (1+1/T)^i t^i and Σ_{t even >= T+1} t^a <= ½∫_{T-1}^∞ x^a dx
    let tail_bound = if t_max < 2 {
        f64::INFINITY
    } else {
        let tt = t_max as f64;
        let a = i as f64 - d / 2.0;
        constant * (1.0 + 1.0 / tt).powi(i as i32) * 0.5 * (tt - 1.0).powf(a + 1.0) / (-(a + 1.0))
    };
    ZEstimate {
        partial,
        tail_bound,
    }
}

/// `Z_i` truncated at `T` plus a tail bound. Finite iff `d >= 2i + 3`.
pub fn z_value(dim: usize, i: u32, t_max: usize) -> Result<ZEstimate> {
    let threshold = 2 * i as usize + 3;
    if dim < threshold {
        return Err(Error::domain(format!(
            "Z_{i} diverges below dimension {threshold} (got d = {dim})"
        )));
    }
    let table = heat_kernel_table(dim, t_max)?;
    let c = tail_constant(dim, &table);
    Ok(z_from_table(dim, i, &table, c))
}

/// `Z_1` and `Z_2` truncated at `T`; requires `d >= 7`.
pub fn z_values(dim: usize, t_max: usize) -> Result<ZValues> {
    if dim < 7 {
        return Err(Error::domain(format!(
            "Z_2 diverges below dimension 7 (got d = {dim})"
        )));
    }
    let table = heat_kernel_table(dim, t_max)?;
    let constant = tail_constant(dim, &table);
    Ok(ZValues {
        z1: z_from_table(dim, 1, &table, constant),
        z2: z_from_table(dim, 2, &table, constant),
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Full distribution of `S(t)` by dynamic programming over a dense box.
    fn distribution(dim: usize, t: usize) -> (Vec<f64>, usize) {
        let side = 2 * t + 1;
        let size = side.pow(dim as u32);
        let mut p = vec![0.0; size];
        let center: usize = (0..dim).map(|k| t * side.pow(k as u32)).sum();
        p[center] = 1.0;
        for _ in 0..t {
            let mut q = vec![0.0; size];
            for (x, &mass) in p.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                for k in 0..dim {
                    let stride = side.pow(k as u32);
                    let c = (x / stride) % side;
                    let share = mass / (2 * dim) as f64;
                    if c + 1 < side {
                        q[x + stride] += share;
                    }
                    if c > 0 {
                        q[x - stride] += share;
                    }
                }
            }
            p = q;
        }
        (p, center)
    }

    #[test]
    fn small_values() {
        let h = |d, t| heat_kernel_table(d, t).unwrap()[t];
        for d in 1..6 {
            assert_eq!(h(d, 0), 1.0);
        }
        assert!((h(1, 2) - 0.5).abs() < 1e-15);
        assert!((h(2, 2) - 0.25).abs() < 1e-15);
        assert!((h(3, 2) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn recursion_matches_dense_distribution() {
        for (d, t) in [(1, 12), (2, 10), (3, 8), (4, 6), (5, 5)] {
            let table = heat_kernel_table(d, t).unwrap();
            for s in 0..=t {
                let (p, c) = distribution(d, s);
                let total: f64 = p.iter().sum();
                assert!((total - 1.0).abs() < 1e-12);
                assert!((p[c] - table[s]).abs() < 1e-14, "d={d} t={s}");
                if s % 2 == 1 {
                    assert_eq!(table[s], 0.0);
                }
            }
        }
    }

    #[test]
    fn large_t_follows_local_limit() {
        let d = 5;
        let t = 4000;
        let p = heat_kernel_table(d, t).unwrap()[t];
        let lclt = 2.0 * (d as f64 / (2.0 * std::f64::consts::PI * t as f64)).powf(d as f64 / 2.0);
        assert!((p / lclt - 1.0).abs() < 0.01);
    }

    #[test]
    fn monte_carlo_mode_brackets_exact() {
        let opts = HeatKernelOptions {
            exact_budget: 0,
            mc_samples: 200_000,
            stream: RngStream::new(5, 0),
        };
        let mc = heat_kernel(2, 4, &opts).unwrap();
        assert!(!mc.exact);
        let exact = heat_kernel_table(2, 4).unwrap()[4];
        assert!((mc.value - exact).abs() <= mc.half_width);
    }

    #[test]
    fn z_series() {
        // T = 0 keeps only the t = 0 term
        let z = z_value(5, 1, 0).unwrap();
        assert_eq!(z.partial, 1.0);
        assert!(matches!(z_value(4, 1, 10), Err(Error::Domain(_))));
        assert!(matches!(z_values(6, 10), Err(Error::Domain(_))));
        let mut prev = 0.0;
        let mut prev_tail = f64::INFINITY;
        for t in [10, 100, 1000] {
            let z = z_values(7, t).unwrap();
            assert!(z.z2.partial > prev);
            assert!(z.z2.tail_bound < prev_tail);
            prev = z.z2.partial;
            prev_tail = z.z2.tail_bound;
        }
        let a = z_values(7, 1000).unwrap();
        let b = z_values(7, 10_000).unwrap();
        assert!(b.z1.partial >= a.z1.partial);
        assert!(b.z1.partial <= a.z1.upper());
    }
}
