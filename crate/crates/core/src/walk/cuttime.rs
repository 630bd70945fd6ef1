//! Cut times of two-sided walks on `Z^d` and the loop-erasure length counter.
//!
//! A two-sided walk is a backward walk `S(0), S(-1), ..., S(-H)` and an
//! independent forward walk `S(0), ..., S(H)`. Everything is certified
//! only within this window.

use rand::Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use super::lattice::{lattice_walk, LatticeCoder};
use crate::error::{Error, Result};
use crate::rng::{par_replicas, RngStream};
use crate::stats::{mean_estimate, MeanEstimate};

/// One two-sided walk, summarized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CutTimeSample {
    /// `T_0, ..., T_N`: `T_0` is the last forward time spent on the
    /// backward trace, `T_i` the first cut time after `T_{i-1}`. A value of
    /// `horizon` means not found in the window.
    pub t: Vec<u64>,
    /// `L_0, ..., L_N`: number of `k >= 0` with `|LE[S[0,k]]| <= n`.
    pub l: Vec<u64>,
    /// Some `T_n` was not found or lies beyond half the horizon.
    pub censored: bool,
}

/// Samples `T_0..=T_max_n` and `L_0..=L_max_n` from one two-sided walk.
pub fn sample_cut_times<R: Rng + ?Sized>(
    dim: usize,
    max_n: usize,
    horizon: usize,
    rng: &mut R,
) -> Result<CutTimeSample> {
    if dim < 3 {
        return Err(Error::domain(format!(
            "two-sided walk cut times need a transient lattice, d >= 3 (got d = {dim})"
        )));
    }
    let coder = LatticeCoder::new(dim, horizon)?;
    let o = coder.origin();
    let past: FxHashSet<u128> = {
        let back = lattice_walk(&coder, o, horizon, rng);
        back.into_iter().collect()
    };
    let fwd = lattice_walk(&coder, o, horizon, rng);
    let mut last: FxHashMap<u128, u32> = FxHashMap::default();
    last.reserve(fwd.len());
    let mut t0 = 0usize;
    for (t, &x) in fwd.iter().enumerate() {
        last.insert(x, t as u32);
        if past.contains(&x) {
            t0 = t;
        }
    }
    drop(past);

    // Cut times after T_0 only need the forward walk: backward points occur
    // in the forward walk at times <= T_0.
    let mut t = vec![horizon as u64; max_n + 1];
    t[0] = t0 as u64;
    let mut found = 1;
    let mut cut_vertices: FxHashSet<u128> = FxHashSet::default();
    // past `stop`, every loop erasure holds more than max_n + 1 vertices
    let mut stop = horizon;
    let mut reach = 0usize;
    for (s, &x) in fwd.iter().enumerate() {
        if s > t0 && s < horizon && reach <= s {
            if found <= max_n {
                t[found] = s as u64;
                found += 1;
            }
            cut_vertices.insert(x);
            if cut_vertices.len() > max_n {
                stop = s;
                break;
            }
        }
        reach = reach.max(last[&x] as usize);
    }
    let censored = found <= max_n || stop > horizon / 2 || t0 > horizon / 2;

    // online loop erasure of S[0,k] for k <= stop
    let mut l = vec![0u64; max_n + 1];
    let mut le: Vec<u128> = Vec::new();
    let mut position: FxHashMap<u128, usize> = FxHashMap::default();
    for &x in &fwd[..=stop] {
        if let Some(&p) = position.get(&x) {
            for u in le.drain(p + 1..) {
                position.remove(&u);
            }
        } else {
            position.insert(x, le.len());
            le.push(x);
        }
        let len = le.len() - 1;
        for (n, count) in l.iter_mut().enumerate() {
            if len <= n {
                *count += 1;
            }
        }
    }
    Ok(CutTimeSample { t, l, censored })
}

/// Means of `T_n` and `L_n` over independent two-sided walks.
#[derive(Debug, Clone, Serialize)]
pub struct CutTimeBatch {
    pub dim: usize,
    pub horizon: usize,
    pub samples: u64,
    pub ns: Vec<usize>,
    pub mean_t: Vec<MeanEstimate>,
    pub mean_l: Vec<MeanEstimate>,
    pub mean_t0: MeanEstimate,
    pub censored: u64,
    pub censoring_rate: f64,
    /// Set when the censoring rate exceeds the threshold.
    pub warning: Option<String>,
}

/// Runs `samples` two-sided walks on independent substreams. Censored
/// samples are kept with their window-capped values and counted.
pub fn cut_time_batch(
    dim: usize,
    ns: &[usize],
    horizon: usize,
    samples: u64,
    stream: &RngStream,
    censor_threshold: f64,
) -> Result<CutTimeBatch> {
    let max_n = ns.iter().copied().max().unwrap_or(0);
    let draws: Vec<Result<CutTimeSample>> = par_replicas(samples, stream, |_, rng| {
        sample_cut_times(dim, max_n, horizon, rng)
    });
    let draws: Vec<CutTimeSample> = draws.into_iter().collect::<Result<_>>()?;
    let column = |f: &dyn Fn(&CutTimeSample) -> u64| -> MeanEstimate {
        mean_estimate(&draws.iter().map(|s| f(s) as f64).collect::<Vec<_>>())
    };
    let mean_t = ns.iter().map(|&n| column(&|s| s.t[n])).collect();
    let mean_l = ns.iter().map(|&n| column(&|s| s.l[n])).collect();
    let mean_t0 = column(&|s| s.t[0]);
    let censored = draws.iter().filter(|s| s.censored).count() as u64;
    let censoring_rate = censored as f64 / samples.max(1) as f64;
    let warning = (censoring_rate > censor_threshold).then(|| {
        format!(
            "censoring rate {censoring_rate:.4} exceeds threshold {censor_threshold}; increase the horizon"
        )
    });
    Ok(CutTimeBatch {
        dim,
        horizon,
        samples,
        ns: ns.to_vec(),
        mean_t,
        mean_l,
        mean_t0,
        censored,
        censoring_rate,
        warning,
    })
}
