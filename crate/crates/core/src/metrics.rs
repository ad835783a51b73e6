//! Vectorial measures of an S-box: nonlinearity, differential uniformity,
//! boomerang uniformity and the plateaued flag.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolfun::{fwht_in_place, is_plateaued_slice};
use crate::error::{Error, Result};
use crate::sbox::{LookupTable, RSBox};

/// Largest dimension accepted by the Walsh and differential passes.
pub const MAX_METRIC_DIM: usize = 16;
/// Largest dimension accepted by the boomerang pass.
pub const MAX_BOOMERANG_DIM: usize = 14;

/// The `(nl, p, DU, BU)` tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub nl: u64,
    pub plateaued: bool,
    pub du: u64,
    pub bu: u64,
}

impl MetricsRecord {
    pub fn tuple(&self) -> (u64, u8, u64, u64) {
        (self.nl, u8::from(self.plateaued), self.du, self.bu)
    }
}

impl std::fmt::Display for MetricsRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.nl, u8::from(self.plateaued), self.du, self.bu)
    }
}

fn check_dim(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::TooLarge { n, max });
    }
    Ok(())
}

#[inline]
fn dot(a: u32, b: u32) -> u32 {
    (a & b).count_ones() & 1
}

/// `W_F(a, b) = sum_x (-1)^(b.F(x) + a.x)`.
pub fn vectorial_walsh(table: &LookupTable, a: u32, b: u32) -> i64 {
    table.values().iter().enumerate().map(|(x, &y)| if dot(b, y) ^ dot(a, x as u32) == 0 { 1i64 } else { -1 }).sum()
}

/// Walsh spectrum of the component `x -> b.F(x)`.
pub fn component_spectrum(table: &LookupTable, b: u32) -> Vec<i32> {
    let mut values: Vec<i32> = table.values().iter().map(|&y| if dot(b, y) == 0 { 1 } else { -1 }).collect();
    fwht_in_place(&mut values);
    values
}

/// Per-component scan: smallest component nonlinearity and whether every
/// nonzero component is plateaued.
pub fn component_profile(table: &LookupTable) -> Result<(u64, bool)> {
    let n = table.n();
    check_dim(n, MAX_METRIC_DIM)?;
    let half = (1u64 << n) / 2;
    let (max_abs, plateaued) = (1u32..1u32 << n)
        .into_par_iter()
        .map(|b| {
            let s = component_spectrum(table, b);
            let m = s.iter().map(|v| u64::from(v.unsigned_abs())).max().unwrap_or(0);
            (m, is_plateaued_slice(&s))
        })
        .reduce(|| (0, true), |x, y| (x.0.max(y.0), x.1 && y.1));
    Ok((half - max_abs / 2, plateaued))
}

/// Smallest nonlinearity over the nonzero components `b.F`.
pub fn nonlinearity_sbox(table: &LookupTable) -> Result<u64> {
    component_profile(table).map(|p| p.0)
}

/// True iff every nonzero component is plateaued (amplitudes may differ between components).
pub fn is_plateaued_sbox(table: &LookupTable) -> Result<bool> {
    component_profile(table).map(|p| p.1)
}

/// Row `a` of the difference distribution table.
pub fn ddt_row(table: &LookupTable, a: u32) -> Vec<u32> {
    let mut counts = vec![0u32; table.values().len()];
    for (x, &y) in table.values().iter().enumerate() {
        counts[(y ^ table.get(x as u32 ^ a)) as usize] += 1;
    }
    counts
}

/// `max_{a != 0, b} |{x : F(x + a) + F(x) = b}|`.
pub fn differential_uniformity(table: &LookupTable) -> Result<u64> {
    let n = table.n();
    check_dim(n, MAX_METRIC_DIM)?;
    if n == 0 {
        return Ok(0);
    }
    Ok((1u32..1u32 << n)
        .into_par_iter()
        .map(|a| u64::from(ddt_row(table, a).into_iter().max().unwrap_or(0)))
        .max()
        .unwrap_or(0))
}

/// Row `a` of the boomerang connectivity table.
///
/// With `X_g = {x : F(x) + F(x + a) = g}`, the entry at `b` counts pairs
/// `(x, u)` in a common `X_g` with `F(x) + F(u) = b`.
pub fn bct_row(table: &LookupTable, a: u32) -> Vec<u32> {
    let size = table.values().len();
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); size];
    for (x, &y) in table.values().iter().enumerate() {
        buckets[(y ^ table.get(x as u32 ^ a)) as usize].push(y);
    }
    let mut counts = vec![0u32; size];
    for bucket in &buckets {
        for &y in bucket {
            for &z in bucket {
                counts[(y ^ z) as usize] += 1;
            }
        }
    }
    counts
}

/// Boomerang uniformity: largest BCT entry over `a != 0`, `b != 0`.
pub fn boomerang_uniformity(table: &LookupTable) -> Result<u64> {
    let n = table.n();
    check_dim(n, MAX_BOOMERANG_DIM)?;
    if !table.is_bijection() {
        return Err(Error::NotBijective);
    }
    Ok((1u32..1u32 << n)
        .into_par_iter()
        .map(|a| bct_row(table, a).into_iter().skip(1).max().map(u64::from).unwrap_or(0))
        .max()
        .unwrap_or(0))
}

/// The full `(nl, p, DU, BU)` record of a table.
pub fn metrics_of_table(table: &LookupTable) -> Result<MetricsRecord> {
    let (nl, plateaued) = component_profile(table)?;
    let du = differential_uniformity(table)?;
    let bu = boomerang_uniformity(table)?;
    Ok(MetricsRecord { nl, plateaued, du, bu })
}

/// The full `(nl, p, DU, BU)` record of an induced S-box.
pub fn metrics_record(f: &RSBox) -> Result<MetricsRecord> {
    metrics_of_table(f.lookup_table()?)
}
