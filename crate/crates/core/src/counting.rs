//! Exhaustive fiber counts of polynomial maps over `G(Z/p^k)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{convolve_raw, GroupSpec};
use crate::morphism::{convolve_maps, PolyMap};
use crate::ring::{ResidueRing, TupleSpace, DEFAULT_BUDGET};

/// `counts[g]` = number of points mapping to the group element with index `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountVector {
    spec: GroupSpec,
    counts: Vec<u64>,
    total: u64,
    n_inputs: u32,
    source: String,
}

impl CountVector {
    /// Wraps raw counts. `n_inputs` is 0 when the vector does not come from a map.
    pub fn from_counts(spec: GroupSpec, counts: Vec<u64>, n_inputs: u32, source: impl Into<String>) -> Result<Self> {
        if counts.len() != spec.order() {
            return Err(Error::BadLength { expected: spec.order(), got: counts.len() });
        }
        let total = counts
            .iter()
            .try_fold(0u64, |acc, c| acc.checked_add(*c))
            .ok_or_else(|| Error::Overflow("total count exceeds 64 bits".into()))?;
        Ok(Self { spec, counts, total, n_inputs, source: source.into() })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn n_inputs(&self) -> u32 {
        self.n_inputs
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn get(&self, index: usize) -> u64 {
        self.counts[index]
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Count at the identity element.
    pub fn at_identity(&self) -> u64 {
        self.counts[0]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("g_index,g_coords,count\n");
        let mut coords = vec![0; self.spec.dim()];
        for (i, c) in self.counts.iter().enumerate() {
            self.spec.coords_of(i, &mut coords);
            let joined: Vec<String> = coords.iter().map(u64::to_string).collect();
            writeln!(out, "{i},{},{c}", joined.join(" ")).unwrap();
        }
        out
    }
}

pub fn count_fibers(f: &PolyMap, ring: &ResidueRing) -> Result<CountVector> {
    count_fibers_with_budget(f, ring, DEFAULT_BUDGET)
}

/// Counts every fiber by enumerating `(Z/p^k)^n` in parallel chunks. Each
/// worker keeps a private histogram; histograms are summed exactly, so the
/// result does not depend on the number of workers.
pub fn count_fibers_with_budget(f: &PolyMap, ring: &ResidueRing, budget: u64) -> Result<CountVector> {
    let compiled = f.compile(ring)?;
    let spec = *compiled.spec();
    let space = TupleSpace::new(*ring, f.n_inputs(), budget)?;
    let order = spec.order();
    let counts = (0..space.chunk_count())
        .into_par_iter()
        .fold(
            || vec![0u64; order],
            |mut acc, c| {
                space.visit(space.chunk(c), |x| acc[compiled.eval_index(x)] += 1);
                acc
            },
        )
        .reduce(
            || vec![0u64; order],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let label = format!("{} over {ring}", f.label());
    CountVector::from_counts(spec, counts, f.n_inputs() as u32, label)
}

/// Exact group convolution of two count vectors.
pub fn convolve_counts(c1: &CountVector, c2: &CountVector) -> Result<CountVector> {
    if c1.spec != c2.spec {
        return Err(Error::SpecMismatch(format!("{} vs {}", c1.spec, c2.spec)));
    }
    c1.total
        .checked_mul(c2.total)
        .ok_or_else(|| Error::Overflow("convolved total exceeds 64 bits".into()))?;
    let a: Vec<u128> = c1.counts.iter().map(|&v| v as u128).collect();
    let b: Vec<u128> = c2.counts.iter().map(|&v| v as u128).collect();
    let wide = convolve_raw(&c1.spec.table(), &a, &b)?;
    let counts = wide
        .into_iter()
        .map(|v| u64::try_from(v).map_err(|_| Error::Overflow("convolved count exceeds 64 bits".into())))
        .collect::<Result<Vec<u64>>>()?;
    CountVector::from_counts(c1.spec, counts, c1.n_inputs + c2.n_inputs, format!("({})*({})", c1.source, c2.source))
}

/// `c^{*n}` for `n >= 1`.
pub fn convolution_power_counts(c: &CountVector, n: usize) -> Result<CountVector> {
    if n == 0 {
        return Err(Error::Domain("convolution power must be at least 1".into()));
    }
    let mut acc = c.clone();
    for _ in 1..n {
        acc = convolve_counts(&acc, c)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub map_f: String,
    pub map_g: String,
    pub ring: String,
    pub group_order: usize,
    pub equal: bool,
    pub max_abs_diff: u64,
    pub total: u64,
}

/// Compares the counts of `f * g` against the convolution of the counts of
/// `f` and `g`.
pub fn verify_convolution_identity(f: &PolyMap, g: &PolyMap, ring: &ResidueRing) -> Result<IdentityReport> {
    verify_convolution_identity_with_budget(f, g, ring, DEFAULT_BUDGET)
}

pub fn verify_convolution_identity_with_budget(
    f: &PolyMap,
    g: &PolyMap,
    ring: &ResidueRing,
    budget: u64,
) -> Result<IdentityReport> {
    let fg = convolve_maps(f, g)?;
    let direct = count_fibers_with_budget(&fg, ring, budget)?;
    let cf = count_fibers_with_budget(f, ring, budget)?;
    let cg = count_fibers_with_budget(g, ring, budget)?;
    let conv = convolve_counts(&cf, &cg)?;
    let max_abs_diff = direct.counts.iter().zip(&conv.counts).map(|(a, b)| a.abs_diff(*b)).max().unwrap_or(0);
    Ok(IdentityReport {
        map_f: f.to_string(),
        map_g: g.to_string(),
        ring: ring.to_string(),
        group_order: direct.spec.order(),
        equal: direct.counts == conv.counts && direct.total == conv.total,
        max_abs_diff,
        total: direct.total,
    })
}
