//! Normalized densities `f(g) = counts(g) |G| / total`, their norms, and the
//! convolution-power scan.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{count_fibers_with_budget, CountVector};
use crate::error::{Error, Result};
use crate::group::{convolve_raw, GroupSpec};
use crate::morphism::PolyMap;
use crate::ring::{ResidueRing, DEFAULT_BUDGET};

/// Density with respect to normalized counting measure, stored exactly as
/// integer weights over their total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Density {
    spec: GroupSpec,
    weights: Vec<u128>,
    total: u128,
}

pub fn to_density(c: &CountVector) -> Result<Density> {
    Density::from_weights(*c.spec(), c.counts().iter().map(|&v| v as u128).collect())
}

impl Density {
    pub fn from_weights(spec: GroupSpec, weights: Vec<u128>) -> Result<Self> {
        if weights.len() != spec.order() {
            return Err(Error::BadLength { expected: spec.order(), got: weights.len() });
        }
        let total = weights
            .iter()
            .try_fold(0u128, |a, w| a.checked_add(*w))
            .ok_or_else(|| Error::Overflow("density mass exceeds 128 bits".into()))?;
        if total == 0 {
            return Err(Error::EmptyCount);
        }
        Ok(Self { spec, weights, total })
    }

    /// The constant density 1.
    pub fn uniform(spec: GroupSpec) -> Self {
        Self { spec, weights: vec![1; spec.order()], total: spec.order() as u128 }
    }

    /// `|G|` times the indicator of the element with index `g`.
    pub fn delta(spec: GroupSpec, g: usize) -> Self {
        let mut weights = vec![0; spec.order()];
        weights[g] = 1;
        Self { spec, weights, total: 1 }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[u128] {
        &self.weights
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn value(&self, g: usize) -> BigRational {
        BigRational::new(BigInt::from(self.weights[g]) * BigInt::from(self.len()), BigInt::from(self.total))
    }

    pub fn value_f64(&self, g: usize) -> f64 {
        self.weights[g] as f64 * (self.len() as f64 / self.total as f64)
    }

    pub fn values_f64(&self) -> Vec<f64> {
        let scale = self.len() as f64 / self.total as f64;
        self.weights.iter().map(|&w| w as f64 * scale).collect()
    }

    /// `(1/|G|) sum f`, which is 1 by construction; computed exactly.
    pub fn mean(&self) -> BigRational {
        let sum: BigInt = self.weights.iter().map(|&w| BigInt::from(w)).sum();
        BigRational::new(sum, BigInt::from(self.total))
    }

    pub fn sup(&self) -> BigRational {
        let m = self.weights.iter().copied().max().unwrap_or(0);
        BigRational::new(BigInt::from(m) * BigInt::from(self.len()), BigInt::from(self.total))
    }

    pub fn convolve(&self, other: &Density) -> Result<Density> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch(format!("{} vs {}", self.spec, other.spec)));
        }
        let w = convolve_raw(&self.spec.table(), &self.weights, &other.weights)?;
        let total = self.total.checked_mul(other.total).ok_or_else(|| Error::Overflow("density mass exceeds 128 bits".into()))?;
        Ok(Density { spec: self.spec, weights: w, total })
    }

    /// `f^{*n}`, built as `f * f^{*(n-1)}` so the sparse factor leads.
    pub fn power(&self, n: usize) -> Result<Density> {
        if n == 0 {
            return Err(Error::Domain("convolution power must be at least 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.convolve(&acc)?.reduced();
        }
        Ok(acc)
    }

    /// Divides weights and total by their common gcd.
    pub fn reduced(mut self) -> Self {
        let g = self.weights.iter().fold(self.total, |a, &b| gcd(a, b));
        if g > 1 {
            for w in &mut self.weights {
                *w /= g;
            }
            self.total /= g;
        }
        self
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `((1/|G|) sum f^s)^(1/s)`; `s = f64::INFINITY` gives the sup norm.
pub fn ls_norm(f: &Density, s: f64) -> Result<f64> {
    if s.is_nan() || s < 1.0 {
        return Err(Error::Domain(format!("norm exponent must be >= 1, got {s}")));
    }
    let vals = f.values_f64();
    if s.is_infinite() {
        return Ok(vals.iter().copied().fold(0.0, f64::max));
    }
    let mean = vals.iter().map(|v| v.powf(s)).sum::<f64>() / vals.len() as f64;
    Ok(mean.powf(1.0 / s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct YoungExponent {
    pub m: usize,
    pub n: usize,
}

/// Smallest `M` with `1/p_M = M/s - (M - 1) <= 1/2`, so that `f^{*M}` is in
/// `L^2` whenever `f` is in `L^s`. Also returns `N = 2M`.
pub fn young_exponent(s: f64) -> Result<YoungExponent> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::Domain(format!("Young exponent needs s > 1, got {s}")));
    }
    if s.is_infinite() {
        return Ok(YoungExponent { m: 1, n: 2 });
    }
    let mut m = 1usize;
    while m as f64 / s - (m as f64 - 1.0) > 0.5 + 1e-12 {
        m += 1;
    }
    Ok(YoungExponent { m, n: 2 * m })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub p: u64,
    pub k: u32,
    pub n: usize,
    pub sup: f64,
    pub l1: f64,
    pub l1eps: f64,
    pub l2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Growing,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded",
            Verdict::Growing => "growing",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub p: u64,
    pub n: usize,
    pub k_hi: u32,
    pub k_lo: u32,
    /// `sup(k_hi) / sup(k_lo)`.
    pub ratio: f64,
    pub verdict: Verdict,
}

/// A cell where `sup f^{*(n+1)} > sup f^{*n}`. Reported, never fatal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothingViolation {
    pub p: u64,
    pub k: u32,
    pub n: usize,
    pub sup_prev: f64,
    pub sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanOptions {
    pub n_max: usize,
    pub p_list: Vec<u64>,
    pub k_max: u32,
    pub tau: f64,
    pub eps: f64,
    pub budget: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { n_max: 3, p_list: vec![5], k_max: 4, tau: 0.10, eps: 0.25, budget: DEFAULT_BUDGET }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub map: String,
    pub label: String,
    pub options: ScanOptions,
    pub rows: Vec<ScanRow>,
    pub classifications: Vec<Classification>,
    pub smoothing_violations: Vec<SmoothingViolation>,
    /// Set when some cell could not be counted; rows hold what was finished.
    pub incomplete: Option<String>,
}

impl ScanReport {
    pub fn verdict(&self, p: u64, n: usize) -> Option<Verdict> {
        self.classifications.iter().find(|c| c.p == p && c.n == n).map(|c| c.verdict)
    }

    pub fn sups(&self, p: u64, n: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.p == p && r.n == n).map(|r| r.sup).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,k,n,sup,l1,l1eps,l2,classification\n");
        for r in &self.rows {
            let v = self.verdict(r.p, r.n).map_or_else(|| "incomplete".to_string(), |v| v.to_string());
            writeln!(out, "{},{},{},{},{},{},{},{}", r.p, r.k, r.n, r.sup, r.l1, r.l1eps, r.l2, v).unwrap();
        }
        out
    }
}

fn scan_cell(f: &PolyMap, ring: ResidueRing, opts: &ScanOptions) -> Result<Vec<ScanRow>> {
    let base = to_density(&count_fibers_with_budget(f, &ring, opts.budget)?)?;
    let mut rows = Vec::with_capacity(opts.n_max);
    let mut acc = base.clone();
    for n in 1..=opts.n_max {
        if n > 1 {
            acc = base.convolve(&acc)?.reduced();
        }
        rows.push(ScanRow {
            p: ring.p(),
            k: ring.k(),
            n,
            sup: ls_norm(&acc, f64::INFINITY)?,
            l1: ls_norm(&acc, 1.0)?,
            l1eps: ls_norm(&acc, 1.0 + opts.eps)?,
            l2: ls_norm(&acc, 2.0)?,
        });
    }
    Ok(rows)
}

/// Sup densities of `f^{*n}` over `G(Z/p^k)` for every `p`, `k <= k_max`,
/// `n <= n_max`, classified per `(p, n)` as growing when
/// `sup(k_max) / sup(ceil(k_max/2)) > 1 + tau`.
pub fn frs_scan(f: &PolyMap, opts: &ScanOptions) -> Result<ScanReport> {
    if opts.n_max == 0 || opts.k_max == 0 || opts.p_list.is_empty() {
        return Err(Error::Domain("scan needs n_max, k_max >= 1 and at least one prime".into()));
    }
    let rings = opts
        .p_list
        .iter()
        .flat_map(|&p| (1..=opts.k_max).map(move |k| ResidueRing::new(p, k)))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<Result<Vec<ScanRow>>> = rings.par_iter().map(|r| scan_cell(f, *r, opts)).collect();

    let mut rows = Vec::new();
    let mut incomplete = None;
    for (ring, cell) in rings.iter().zip(cells) {
        match cell {
            Ok(r) => rows.extend(r),
            Err(e @ Error::BudgetExceeded { .. }) => {
                incomplete.get_or_insert(format!("{ring}: {e}"));
            }
            Err(e) => return Err(e),
        }
    }
    rows.sort_by_key(|a| (a.p, a.n, a.k));

    let sup_at = |p: u64, n: usize, k: u32| rows.iter().find(|r| r.p == p && r.n == n && r.k == k).map(|r| r.sup);
    let k_hi = opts.k_max;
    let k_lo = opts.k_max.div_ceil(2);
    let mut classifications = Vec::new();
    let mut smoothing_violations = Vec::new();
    for &p in &opts.p_list {
        for n in 1..=opts.n_max {
            if let (Some(hi), Some(lo)) = (sup_at(p, n, k_hi), sup_at(p, n, k_lo)) {
                let ratio = hi / lo;
                let verdict = if ratio > 1.0 + opts.tau { Verdict::Growing } else { Verdict::Bounded };
                classifications.push(Classification { p, n, k_hi, k_lo, ratio, verdict });
            }
            for k in 1..=opts.k_max {
                if let (Some(prev), Some(cur)) = (sup_at(p, n.wrapping_sub(1), k), sup_at(p, n, k)) {
                    if cur > prev * (1.0 + 1e-12) {
                        smoothing_violations.push(SmoothingViolation { p, k, n, sup_prev: prev, sup: cur });
                    }
                }
            }
        }
    }
    Ok(ScanReport {
        map: f.canonical(),
        label: f.label().to_string(),
        options: opts.clone(),
        rows,
        classifications,
        smoothing_violations,
        incomplete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::count_fibers;
    use crate::group::GroupKind;
    use crate::morphism::{parse_map, Builtin};
    use crate::ring::make_ring;
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_density(rng: &mut impl Rng, spec: GroupSpec) -> Density {
        let w = (0..spec.order()).map(|_| if rng.random_bool(0.3) { 0 } else { rng.random_range(0..20) }).collect::<Vec<u128>>();
        let mut w = w;
        w[0] += 1;
        Density::from_weights(spec, w).unwrap()
    }

    fn z(p: u64, k: u32, kind: GroupKind) -> GroupSpec {
        GroupSpec::new(kind, make_ring(p, k).unwrap()).unwrap()
    }

    #[test]
    fn density_examples() {
        let spec = z(5, 1, GroupKind::Additive { dim: 1 });
        let u = to_density(&CountVector::from_counts(spec, vec![4; 5], 0, "u").unwrap()).unwrap();
        assert!((0..5).all(|g| u.value(g).is_one()));

        let sq = to_density(&count_fibers(&Builtin::Power(2).build().unwrap(), &make_ring(5, 1).unwrap()).unwrap()).unwrap();
        let vals: Vec<f64> = sq.values_f64();
        assert_eq!(vals, vec![1.0, 2.0, 0.0, 0.0, 2.0]);
        assert!(sq.mean().is_one());
        assert!((ls_norm(&sq, 2.0).unwrap() - (9.0f64 / 5.0).sqrt()).abs() < 1e-12);

        let d = Density::delta(spec, 0);
        assert_eq!(ls_norm(&d, f64::INFINITY).unwrap(), 5.0);
        assert_eq!(d.value(0), BigRational::from_integer(5.into()));
        assert!(ls_norm(&u, 3.0).unwrap() == 1.0);

        let empty = CountVector::from_counts(spec, vec![0; 5], 0, "e").unwrap();
        assert!(matches!(to_density(&empty), Err(Error::EmptyCount)));
    }

    #[test]
    fn norms_are_monotone_and_mean_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for spec in [z(3, 1, GroupKind::Heisenberg), z(2, 3, GroupKind::Additive { dim: 2 }), z(7, 1, GroupKind::Additive { dim: 1 })] {
            for _ in 0..20 {
                let f = random_density(&mut rng, spec);
                assert!(f.mean().is_one());
                assert!((ls_norm(&f, 1.0).unwrap() - 1.0).abs() < 1e-12);
                let norms: Vec<f64> = [1.0, 1.25, 2.0, 4.0, f64::INFINITY].iter().map(|s| ls_norm(&f, *s).unwrap()).collect();
                assert!(norms.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12)), "{norms:?}");
            }
        }
    }

    #[test]
    fn young_inequality_and_sup_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let exps = [(1.0, 1.0, 1.0), (1.5, 1.5, 3.0), (2.0, 2.0, f64::INFINITY), (1.25, 2.0, 10.0 / 3.0), (4.0 / 3.0, 4.0, f64::INFINITY), (1.5, 2.0, 6.0)];
        for spec in [z(3, 1, GroupKind::Heisenberg), z(3, 2, GroupKind::Additive { dim: 2 }), z(5, 1, GroupKind::Additive { dim: 2 })] {
            for _ in 0..10 {
                let f = random_density(&mut rng, spec);
                let g = random_density(&mut rng, spec);
                let fg = f.convolve(&g).unwrap();
                assert!(fg.mean().is_one());
                for &(p, q, r) in &exps {
                    let lhs = ls_norm(&fg, r).unwrap();
                    let rhs = ls_norm(&f, p).unwrap() * ls_norm(&g, q).unwrap();
                    assert!(lhs <= rhs + 1e-9, "{p} {q} {r}: {lhs} > {rhs}");
                }
                let sup = |d: &Density| ls_norm(d, f64::INFINITY).unwrap();
                assert!(sup(&fg) <= sup(&f).min(sup(&g)) + 1e-9);
            }
        }
    }

    #[test]
    fn density_convolution_matches_count_convolution() {
        let ring = make_ring(3, 1).unwrap();
        let c = count_fibers(&Builtin::HeisenbergEx.build().unwrap(), &ring).unwrap();
        let c2 = crate::counting::convolve_counts(&c, &c).unwrap();
        let d = to_density(&c).unwrap();
        assert_eq!(d.power(2).unwrap().values_f64(), to_density(&c2).unwrap().values_f64());
        for g in 0..27 {
            assert_eq!(d.power(2).unwrap().value(g), to_density(&c2).unwrap().value(g));
        }
    }

    #[test]
    fn young_exponent_examples() {
        assert_eq!(young_exponent(2.0).unwrap(), YoungExponent { m: 1, n: 2 });
        assert_eq!(young_exponent(1.5).unwrap(), YoungExponent { m: 2, n: 4 });
        assert_eq!(young_exponent(1.1).unwrap(), YoungExponent { m: 6, n: 12 });
        assert_eq!(young_exponent(3.0).unwrap().m, 1);
        assert!(matches!(young_exponent(1.0), Err(Error::Domain(_))));
        assert!(matches!(young_exponent(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn scan_power_two() {
        let f = Builtin::Power(2).build().unwrap();
        let opts = ScanOptions { n_max: 3, p_list: vec![5], k_max: 4, ..Default::default() };
        let r = frs_scan(&f, &opts).unwrap();
        assert_eq!(r.rows.len(), 12);
        assert_eq!(r.sups(5, 1), vec![2.0, 5.0, 10.0, 25.0]);
        assert_eq!(r.verdict(5, 1), Some(Verdict::Growing));
        assert_eq!(r.verdict(5, 2), Some(Verdict::Growing));
        assert_eq!(r.verdict(5, 3), Some(Verdict::Bounded));
        assert!(r.rows.iter().all(|row| row.sup >= 1.0 && (row.l1 - 1.0).abs() < 1e-12));
        let csv = r.to_csv();
        assert!(csv.starts_with("p,k,n,sup,l1,l1eps,l2,classification\n5,1,1,2,1,"));
        assert!(csv.lines().last().unwrap().ends_with(",bounded"));
    }

    #[test]
    fn scan_identity_map_is_flat() {
        let f = parse_map("additive[1]: x1").unwrap();
        for p in [2, 3, 7] {
            let r = frs_scan(&f, &ScanOptions { n_max: 1, p_list: vec![p], k_max: 3, ..Default::default() }).unwrap();
            assert!(r.rows.iter().all(|row| row.sup == 1.0));
            assert_eq!(r.verdict(p, 1), Some(Verdict::Bounded));
            assert!(r.smoothing_violations.is_empty());
        }
    }

    #[test]
    fn scan_reports_partial_rows_on_budget() {
        let f = Builtin::Tightness(2).build().unwrap();
        let opts = ScanOptions { n_max: 1, p_list: vec![3], k_max: 3, budget: 100, ..Default::default() };
        let r = frs_scan(&f, &opts).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.incomplete.is_some());
        assert!(r.classifications.is_empty());
    }
}
