//! Walks on the unbounded lattice `Z^d` with coordinates packed into `u128`
//! keys, so visited sets are plain hash sets of integers.

use rand::Rng;
use rustc_hash::FxHashSet;

use super::loop_erase_seq;
use crate::error::{Error, Result};

/// Packs `d` coordinates of absolute value `< 2^(bits-1)` into one `u128`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeCoder {
    dim: usize,
    bits: u32,
    units: Vec<u128>,
    origin: u128,
}

impl LatticeCoder {
    /// Coder able to hold every point within `reach` steps of the origin.
    pub fn new(dim: usize, reach: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        let bits = (usize::BITS - reach.leading_zeros()) + 1;
        if dim as u32 * bits > 128 {
            return Err(Error::resource(
                format!("packed lattice key for d={dim}, reach {reach} (bits)"),
                (dim as u32 * bits) as u128,
                128,
            ));
        }
        let units: Vec<u128> = (0..dim).map(|i| 1u128 << (i as u32 * bits)).collect();
        let half = 1u128 << (bits - 1);
        let origin = units.iter().map(|u| u * half).sum();
        Ok(Self {
            dim,
            bits,
            units,
            origin,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> u128 {
        self.origin
    }

    /// Neighbor in direction `dir ∈ 0..2d`: `+e_i` for `dir = 2i+1`,
    /// `-e_i` for `dir = 2i`.
    #[inline]
    pub fn step(&self, key: u128, dir: usize) -> u128 {
        let u = self.units[dir >> 1];
        if dir & 1 == 1 {
            key + u
        } else {
            key - u
        }
    }

    pub fn decode(&self, key: u128) -> Vec<i64> {
        let mask = (1u128 << self.bits) - 1;
        let half = 1i64 << (self.bits - 1);
        (0..self.dim)
            .map(|i| ((key >> (i as u32 * self.bits)) & mask) as i64 - half)
            .collect()
    }

    pub fn encode(&self, x: &[i64]) -> Option<u128> {
        let half = 1i64 << (self.bits - 1);
        if x.len() != self.dim || x.iter().any(|&c| c.abs() >= half) {
            return None;
        }
        Some(
            x.iter()
                .zip(&self.units)
                .map(|(&c, &u)| (c + half) as u128 * u)
                .sum(),
        )
    }
}

/// Simple random walk of `steps` steps from `start`, as packed keys.
pub fn lattice_walk<R: Rng + ?Sized>(
    coder: &LatticeCoder,
    start: u128,
    steps: usize,
    rng: &mut R,
) -> Vec<u128> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = start;
    out.push(x);
    let dirs = 2 * coder.dim;
    for _ in 0..steps {
        x = coder.step(x, rng.random_range(0..dirs));
        out.push(x);
    }
    out
}

/// Lattice path with flattened coordinates; `origin_offset` indexes time 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath {
    pub dim: usize,
    pub coords: Vec<i64>,
    pub origin_offset: usize,
}

impl LatticePath {
    fn from_keys(coder: &LatticeCoder, keys: &[u128], origin_offset: usize) -> Self {
        let mut coords = Vec::with_capacity(keys.len() * coder.dim);
        for &k in keys {
            coords.extend(coder.decode(k));
        }
        Self {
            dim: coder.dim,
            coords,
            origin_offset,
        }
    }

    pub fn point_count(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn point(&self, i: usize) -> &[i64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Point at signed time `t` relative to the origin index.
    pub fn at(&self, t: i64) -> Option<&[i64]> {
        let i = self.origin_offset as i64 + t;
        (i >= 0 && (i as usize) < self.point_count()).then(|| self.point(i as usize))
    }

    /// Unit direction index (as in [`LatticeCoder::step`]) of the step from
    /// point `i` to point `i + 1`.
    pub fn direction(&self, i: usize) -> Option<usize> {
        let (a, b) = (self.point(i), self.point(i + 1));
        let mut dir = None;
        for k in 0..self.dim {
            match b[k] - a[k] {
                0 => {}
                1 if dir.is_none() => dir = Some(2 * k + 1),
                -1 if dir.is_none() => dir = Some(2 * k),
                _ => return None,
            }
        }
        dir
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = FxHashSet::default();
        (0..self.point_count()).all(|i| seen.insert(self.point(i).to_vec()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoSidedLerwConfig {
    /// Steps of each of the two walks.
    pub horizon: usize,
    pub attempt_cap: u64,
}

impl Default for TwoSidedLerwConfig {
    fn default() -> Self {
        Self {
            horizon: 100_000,
            attempt_cap: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoSidedLerwSample {
    /// Negative side is the reversed erasure of the second walk, positive
    /// side the erasure of the first.
    pub path: LatticePath,
    /// Attempts used, including the accepted one.
    pub attempts: u64,
    /// `l1` distance between the two far endpoints of the path; a
    /// diagnostic for intersections the finite window cannot see.
    pub separation: u64,
}

/// One trial: two independent walks of `horizon` steps from the origin.
/// Returns the two-sided path if the erasure of the first walk avoids the
/// second walk after time 0 within the window, `None` otherwise.
pub fn two_sided_lerw_attempt<R: Rng + ?Sized>(
    dim: usize,
    horizon: usize,
    rng: &mut R,
) -> Result<Option<(LatticePath, u64)>> {
    if dim < 5 {
        return Err(Error::domain(format!(
            "two-sided loop-erased walk needs d >= 5 (got d = {dim}); the non-intersection event has probability 0 below"
        )));
    }
    let coder = LatticeCoder::new(dim, horizon)?;
    let o = coder.origin();
    let s1 = lattice_walk(&coder, o, horizon, rng);
    let le1 = loop_erase_seq(&s1);
    drop(s1);
    let forbidden: FxHashSet<u128> = le1.iter().copied().collect();
    let mut s2 = Vec::with_capacity(horizon + 1);
    s2.push(o);
    let mut x = o;
    let dirs = 2 * dim;
    for _ in 0..horizon {
        x = coder.step(x, rng.random_range(0..dirs));
        if forbidden.contains(&x) {
            return Ok(None);
        }
        s2.push(x);
    }
    let mut keys = loop_erase_seq(&s2);
    let origin_offset = keys.len() - 1;
    keys.reverse();
    keys.extend_from_slice(&le1[1..]);
    let path = LatticePath::from_keys(&coder, &keys, origin_offset);
    let a = path.point(0);
    let b = path.point(path.point_count() - 1);
    let separation = a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum();
    Ok(Some((path, separation)))
}

/// Rejection sampler for the window-certified two-sided loop-erased walk.
pub fn two_sided_lerw<R: Rng + ?Sized>(
    dim: usize,
    config: &TwoSidedLerwConfig,
    rng: &mut R,
) -> Result<TwoSidedLerwSample> {
    for attempt in 1..=config.attempt_cap {
        if let Some((path, separation)) = two_sided_lerw_attempt(dim, config.horizon, rng)? {
            return Ok(TwoSidedLerwSample {
                path,
                attempts: attempt,
                separation,
            });
        }
    }
    Err(Error::Statistical {
        attempts: config.attempt_cap,
        reason: format!("no accepted two-sided walk at d = {dim}"),
    })
}
