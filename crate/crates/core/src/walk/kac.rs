//! Return times of finite stationary Markov chains.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{par_replicas, RngStream};
use crate::stats::Z_999;

/// Finite Markov chain given by a row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    p: Vec<Vec<f64>>,
}

impl MarkovChain {
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        let n = p.len();
        if n == 0 {
            return Err(Error::contract("chain needs at least one state"));
        }
        for (i, row) in p.iter().enumerate() {
            if row.len() != n {
                return Err(Error::contract(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::contract(format!(
                    "row {i} has an entry outside [0, 1]"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::contract(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self { p })
    }

    /// Deterministic rotation `i -> i+1 mod n`.
    pub fn rotation(n: usize) -> Self {
        let p = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if j == (i + 1) % n { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        Self { p }
    }

    /// Two states, each step picks either state with probability 1/2.
    pub fn symmetric_two_state() -> Self {
        Self {
            p: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        }
    }

    pub fn states(&self) -> usize {
        self.p.len()
    }

    pub fn is_irreducible(&self) -> bool {
        let n = self.states();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let w = if forward { self.p[i][j] } else { self.p[j][i] };
                    if w > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    /// Stationary law from `π (P - I) = 0`, `Σ π = 1`.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        if !self.is_irreducible() {
            return Err(Error::domain(
                "chain is reducible; stationary law is not unique",
            ));
        }
        let n = self.states();
        // transpose system with the last equation replaced by normalization
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(j, i)] = self.p[i][j] - if i == j { 1.0 } else { 0.0 };
            }
        }
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(n);
        b[n - 1] = 1.0;
        let pi = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::domain("singular stationary system"))?;
        Ok(pi.iter().copied().collect())
    }

    fn sample_from<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                return i;
            }
            u -= w;
        }
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    pub fn step<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> usize {
        Self::sample_from(&self.p[i], rng)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KacReport {
    pub samples: u64,
    /// Empirical mean of the first return time to the event, started from
    /// the stationary law conditioned on the event.
    pub mean_return_time: f64,
    pub inverse_probability: f64,
    /// 99.9% half-width of the mean.
    pub half_width: f64,
    pub event_probability: f64,
}

impl KacReport {
    pub fn consistent(&self) -> bool {
        (self.mean_return_time - self.inverse_probability).abs() <= self.half_width + 1e-12
    }
}

const CHUNK: u64 = 10_000;

/// Estimates `E[τ | E]`, the mean return time to `event` from stationarity
/// conditioned on `event`, next to `1 / P[E]`.
pub fn kac_check(
    chain: &MarkovChain,
    event: &[usize],
    samples: u64,
    stream: &RngStream,
) -> Result<KacReport> {
    let n = chain.states();
    if event.is_empty() || event.iter().any(|&s| s >= n) {
        return Err(Error::contract(
            "event must be a nonempty set of valid states",
        ));
    }
    let pi = chain.stationary()?;
    let mut in_event = vec![false; n];
    for &s in event {
        in_event[s] = true;
    }
    let start: Vec<f64> = (0..n)
        .map(|i| if in_event[i] { pi[i] } else { 0.0 })
        .collect();
    let p_event: f64 = start.iter().sum();
    let chunks = samples.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = par_replicas(chunks, stream, |c, rng| {
        let m = CHUNK.min(samples - c * CHUNK);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..m {
            let mut x = MarkovChain::sample_from(&start, rng);
            let mut tau = 0u64;
            loop {
                x = chain.step(x, rng);
                tau += 1;
                if in_event[x] {
                    break;
                }
            }
            s1 += tau as f64;
            s2 += (tau * tau) as f64;
        }
        (s1, s2)
    });
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = samples as f64;
    let mean = s1 / m;
    let var = (s2 / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
    Ok(KacReport {
        samples,
        mean_return_time: mean,
        inverse_probability: 1.0 / p_event,
        half_width: Z_999 * (var / m).sqrt(),
        event_probability: p_event,
    })
}
