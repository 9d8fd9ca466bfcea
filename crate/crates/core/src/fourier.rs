//! Fourier transform on the catalog groups, with `T(pi) = (1/|G|) sum_g
//! f(g) pi(g^-1)` and inversion `f(g) = sum_pi d_pi tr(T(pi) pi(g))`.
//!
//! With this convention `F(f * g) = F(g) F(f)`; the two orders agree on
//! abelian groups.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::density::{ls_norm, young_exponent, Density};
use crate::error::{Error, Result};
use crate::group::{irreps, GroupSpec, IrrepTable};
use crate::linalg::CMatrix;

/// Irreps plus the inverse map on element indices.
#[derive(Clone, Debug)]
pub struct Harmonics {
    table: IrrepTable,
    inv: Vec<usize>,
}

impl Harmonics {
    pub fn new(spec: &GroupSpec) -> Result<Self> {
        let table = irreps(spec)?;
        let gt = spec.table();
        let inv = (0..spec.order()).map(|g| gt.inv(g)).collect();
        Ok(Self { table, inv })
    }

    pub fn spec(&self) -> &GroupSpec {
        self.table.spec()
    }

    pub fn irreps(&self) -> &IrrepTable {
        &self.table
    }

    fn coords(&self, g: usize) -> Vec<u64> {
        let mut buf = vec![0; self.spec().dim()];
        self.spec().coords_of(g, &mut buf);
        buf
    }
}

/// One matrix per irrep, in irrep-table order.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoeffs {
    spec: GroupSpec,
    mats: Vec<CMatrix>,
}

impl FourierCoeffs {
    pub fn new(h: &Harmonics, mats: Vec<CMatrix>) -> Result<Self> {
        if mats.len() != h.table.len() {
            return Err(Error::BadLength { expected: h.table.len(), got: mats.len() });
        }
        for (i, m) in mats.iter().enumerate() {
            if m.dim() != h.table.dim(i) {
                return Err(Error::SpecMismatch(format!("coefficient {i} has size {} but the irrep has dimension {}", m.dim(), h.table.dim(i))));
            }
        }
        Ok(Self { spec: *h.spec(), mats })
    }

    pub fn zeros(h: &Harmonics) -> Self {
        Self { spec: *h.spec(), mats: h.table.dims().into_iter().map(CMatrix::zeros).collect() }
    }

    pub fn identity(h: &Harmonics) -> Self {
        Self { spec: *h.spec(), mats: h.table.dims().into_iter().map(CMatrix::identity).collect() }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn mats(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn dims(&self) -> Vec<usize> {
        self.mats.iter().map(CMatrix::dim).collect()
    }

    /// Largest entry modulus over all coefficients.
    pub fn max_abs(&self) -> f64 {
        self.mats.iter().map(CMatrix::max_abs).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &FourierCoeffs) -> Result<FourierCoeffs> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch(format!("{} vs {}", self.spec, other.spec)));
        }
        Ok(Self { spec: self.spec, mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a - b).collect() })
    }
}

/// Transform of an arbitrary complex function on `G`, given by index.
pub fn transform_values(h: &Harmonics, f: &[Complex64]) -> Result<FourierCoeffs> {
    let n = h.spec().order();
    if f.len() != n {
        return Err(Error::BadLength { expected: n, got: f.len() });
    }
    let scale = Complex64::new(1.0 / n as f64, 0.0);
    let mats = (0..h.table.len())
        .map(|i| {
            let mut t = CMatrix::zeros(h.table.dim(i));
            for (g, v) in f.iter().enumerate() {
                if *v != Complex64::new(0.0, 0.0) {
                    t.add_scaled(&h.table.matrix(i, &h.coords(h.inv[g])), *v);
                }
            }
            t.scale(scale)
        })
        .collect();
    Ok(FourierCoeffs { spec: *h.spec(), mats })
}

pub fn transform(h: &Harmonics, f: &Density) -> Result<FourierCoeffs> {
    if f.spec() != h.spec() {
        return Err(Error::SpecMismatch(format!("{} vs {}", f.spec(), h.spec())));
    }
    let vals: Vec<Complex64> = f.values_f64().into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    transform_values(h, &vals)
}

/// `f(g) = sum_pi d_pi tr(T(pi) pi(g))` for every `g`, in index order.
pub fn inverse_transform(h: &Harmonics, t: &FourierCoeffs) -> Result<Vec<Complex64>> {
    if t.spec != *h.spec() {
        return Err(Error::SpecMismatch(format!("{} vs {}", t.spec, h.spec())));
    }
    let out = (0..h.spec().order())
        .map(|g| {
            let x = h.coords(g);
            t.mats
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let pi = h.table.matrix(i, &x);
                    let d = m.dim();
                    // tr(T P) = sum_{a,b} T[a,b] P[b,a]
                    let mut tr = Complex64::new(0.0, 0.0);
                    for a in 0..d {
                        for b in 0..d {
                            tr += m[(a, b)] * pi[(b, a)];
                        }
                    }
                    tr * d as f64
                })
                .sum()
        })
        .collect();
    Ok(out)
}

/// `||T||_p = (sum_pi d_pi ||T(pi)||_{S_p}^p)^(1/p)`; `p = inf` gives
/// `max_pi ||T(pi)||_op`.
pub fn hp_norm(t: &FourierCoeffs, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("H_p exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(t.mats.iter().map(|m| m.schatten(None)).fold(0.0, f64::max));
    }
    if p == 2.0 {
        return Ok(t.mats.iter().map(|m| m.dim() as f64 * m.hs_norm_sq()).sum::<f64>().sqrt());
    }
    let sum: f64 = t.mats.iter().map(|m| m.dim() as f64 * m.schatten(Some(p)).powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Per-irrep matrix product `T1(pi) T2(pi)`.
pub fn fourier_product(t1: &FourierCoeffs, t2: &FourierCoeffs) -> Result<FourierCoeffs> {
    if t1.spec != t2.spec {
        return Err(Error::SpecMismatch(format!("{} vs {}", t1.spec, t2.spec)));
    }
    Ok(FourierCoeffs { spec: t1.spec, mats: t1.mats.iter().zip(&t2.mats).map(|(a, b)| a * b).collect() })
}

/// Largest entry of `F(f * g) - F(g) F(f)` over all irreps.
pub fn convolution_theorem_check(h: &Harmonics, f: &Density, g: &Density) -> Result<f64> {
    let lhs = transform(h, &f.convolve(g)?)?;
    let rhs = fourier_product(&transform(h, g)?, &transform(h, f)?)?;
    Ok(lhs.sub(&rhs)?.max_abs())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    /// `equality` checks report worst relative deviation; `inequality`
    /// checks report worst ratio lhs/rhs and count violations.
    pub kind: &'static str,
    pub worst: f64,
    pub violations: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub group: String,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

pub const EQUALITY_TOL: f64 = 1e-8;
pub const INEQUALITY_SLACK: f64 = 1e-8;

/// Random density with integer weights, sparse at a random rate.
pub fn random_density(rng: &mut impl Rng, spec: GroupSpec) -> Density {
    let zero_rate = rng.random_range(0.0..0.9);
    let mut w: Vec<u128> =
        (0..spec.order()).map(|_| if rng.random_bool(zero_rate) { 0 } else { rng.random_range(1..1000) }).collect();
    let at = rng.random_range(0..w.len());
    w[at] += 1;
    Density::from_weights(spec, w).expect("positive mass")
}

fn random_coeffs(rng: &mut impl Rng, h: &Harmonics) -> FourierCoeffs {
    let keep = rng.random_range(0.2..1.0);
    let mats = h
        .table
        .dims()
        .into_iter()
        .map(|d| {
            let data = (0..d * d)
                .map(|_| {
                    if rng.random_bool(keep) {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            CMatrix::from_rows(d, data)
        })
        .collect();
    FourierCoeffs { spec: *h.spec(), mats }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

struct Tracker {
    name: String,
    kind: &'static str,
    worst: f64,
    violations: usize,
}

impl Tracker {
    fn equality(name: &str) -> Self {
        Self { name: name.into(), kind: "equality", worst: 0.0, violations: 0 }
    }

    fn inequality(name: &str) -> Self {
        Self { name: name.into(), kind: "inequality", worst: 0.0, violations: 0 }
    }

    fn eq(&mut self, deviation: f64) {
        self.worst = self.worst.max(deviation);
        if !(deviation < EQUALITY_TOL) {
            self.violations += 1;
        }
    }

    fn le(&mut self, lhs: f64, rhs: f64) {
        let ratio = if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
        self.worst = self.worst.max(ratio);
        if lhs > rhs * (1.0 + INEQUALITY_SLACK) + 1e-300 {
            self.violations += 1;
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome { passed: self.violations == 0, name: self.name, kind: self.kind, worst: self.worst, violations: self.violations }
    }
}

/// Hoelder exponent triples `(p1, p2, r)` with `1/r = 1/p1 + 1/p2`.
pub const HOLDER_EXPONENTS: [(f64, f64, f64); 5] =
    [(4.0, 4.0, 2.0), (2.0, 2.0, 1.0), (3.0, 1.5, 1.0), (f64::INFINITY, 2.0, 2.0), (6.0, 3.0, 2.0)];

/// Runs Plancherel, inversion, the convolution theorem, Hoelder on `H_p`
/// and Hausdorff-Young on `trials` random inputs each.
pub fn inequality_suite(spec: &GroupSpec, trials: usize, seed: u64) -> Result<InequalityReport> {
    let h = Harmonics::new(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plancherel = Tracker::equality("plancherel");
    let mut inversion = Tracker::equality("inversion");
    let mut conv = Tracker::equality("convolution_theorem");
    let mut holder = Tracker::inequality("holder");
    let mut hy = Tracker::inequality("hausdorff_young");
    for _ in 0..trials {
        let f = random_density(&mut rng, *spec);
        let g = random_density(&mut rng, *spec);
        let tf = transform(&h, &f)?;

        let l2 = ls_norm(&f, 2.0)?;
        plancherel.eq(rel(hp_norm(&tf, 2.0)?.powi(2), l2 * l2));

        let back = inverse_transform(&h, &tf)?;
        let vals = f.values_f64();
        let scale = vals.iter().copied().fold(0.0, f64::max);
        let err = back.iter().zip(&vals).map(|(b, v)| (b - v).norm()).fold(0.0, f64::max);
        inversion.eq(err / scale);

        let dev = convolution_theorem_check(&h, &f, &g)?;
        conv.eq(dev / transform(&h, &f.convolve(&g)?)?.max_abs());

        let t1 = random_coeffs(&mut rng, &h);
        let t2 = random_coeffs(&mut rng, &h);
        let prod = fourier_product(&t1, &t2)?;
        for (p1, p2, r) in HOLDER_EXPONENTS {
            holder.le(hp_norm(&prod, r)?, hp_norm(&t1, p1)? * hp_norm(&t2, p2)?);
        }

        hy.le(hp_norm(&tf, f64::INFINITY)?, ls_norm(&f, 1.0)?);
        hy.le(hp_norm(&tf, 3.0)?, ls_norm(&f, 1.5)?);
        hy.le(hp_norm(&tf, 4.0)?, ls_norm(&f, 4.0 / 3.0)?);
    }
    let checks: Vec<CheckOutcome> = [plancherel, inversion, conv, holder, hy].into_iter().map(Tracker::finish).collect();
    Ok(InequalityReport { group: spec.to_string(), trials, seed, passed: checks.iter().all(|c| c.passed), checks })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothingChain {
    pub s: f64,
    pub m: usize,
    /// `||F(f^{*2M})||_1`
    pub lhs: f64,
    /// `||F(f^{*M})||_2^2`
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `||F(f^{*2M})||_1 <= ||F(f^{*M})||_2^2` with `M = young_exponent(s)`.
/// Convolution powers are exact; only the transform is in floating point.
pub fn smoothing_chain(h: &Harmonics, f: &Density, s: f64) -> Result<SmoothingChain> {
    let m = young_exponent(s)?.m;
    let fm = f.power(m)?;
    let f2m = fm.convolve(&fm)?.reduced();
    let lhs = hp_norm(&transform(h, &f2m)?, 1.0)?;
    let rhs = hp_norm(&transform(h, &fm)?, 2.0)?.powi(2);
    Ok(SmoothingChain { s, m, lhs, rhs, holds: lhs <= rhs * (1.0 + INEQUALITY_SLACK) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupKind;
    use crate::ring::make_ring;

    fn spec(kind: GroupKind, p: u64, k: u32) -> GroupSpec {
        GroupSpec::new(kind, make_ring(p, k).unwrap()).unwrap()
    }

    fn heis(p: u64) -> GroupSpec {
        spec(GroupKind::Heisenberg, p, 1)
    }

    #[test]
    fn transform_of_uniform_and_delta() {
        for s in [heis(3), spec(GroupKind::Additive { dim: 1 }, 2, 3)] {
            let h = Harmonics::new(&s).unwrap();
            let t = transform(&h, &Density::uniform(s)).unwrap();
            // the trivial representation comes first in both tables
            assert!((t.mats()[0][(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(t.mats()[1..].iter().all(|m| m.max_abs() < 1e-12));

            let t = transform(&h, &Density::delta(s, 0)).unwrap();
            let id = FourierCoeffs::identity(&h);
            assert!(t.sub(&id).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_examples() {
        let s = heis(3);
        let h = Harmonics::new(&s).unwrap();
        let mut triv = FourierCoeffs::zeros(&h);
        triv.mats[0] = CMatrix::identity(1);
        assert!(inverse_transform(&h, &triv).unwrap().iter().all(|v| (v - 1.0).norm() < 1e-12));

        let delta = inverse_transform(&h, &FourierCoeffs::identity(&h)).unwrap();
        assert!((delta[0] - 27.0).norm() < 1e-9);
        assert!(delta[1..].iter().all(|v| v.norm() < 1e-9));
    }

    #[test]
    fn inverse_matches_naive_dft_on_z4() {
        let s = spec(GroupKind::Additive { dim: 1 }, 2, 2);
        let h = Harmonics::new(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = random_coeffs(&mut rng, &h);
        let f = inverse_transform(&h, &t).unwrap();
        for (x, fx) in f.iter().enumerate() {
            let naive: Complex64 = (0..4)
                .map(|xi| t.mats()[xi][(0, 0)] * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (xi * x) as f64 / 4.0))
                .sum();
            assert!((fx - naive).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_on_random_heisenberg_density() {
        let s = heis(3);
        let h = Harmonics::new(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let f = random_density(&mut rng, s);
            let back = inverse_transform(&h, &transform(&h, &f).unwrap()).unwrap();
            for (b, v) in back.iter().zip(f.values_f64()) {
                assert!((b - v).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn hp_norm_examples() {
        let s = heis(2);
        let h = Harmonics::new(&s).unwrap();
        let id = FourierCoeffs::identity(&h);
        assert!((hp_norm(&id, 2.0).unwrap().powi(2) - 8.0).abs() < 1e-12);
        let z = FourierCoeffs::zeros(&h);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(hp_norm(&z, p).unwrap(), 0.0);
        }
        // Heisenberg over Z/2: four characters then one 2-dimensional irrep
        let mut t = FourierCoeffs::zeros(&h);
        t.mats[4] = CMatrix::diag(&[Complex64::new(3.0, 0.0), Complex64::new(4.0, 0.0)]);
        assert!((hp_norm(&t, 2.0).unwrap() - 50f64.sqrt()).abs() < 1e-12);
        assert!((hp_norm(&t, 1.0).unwrap() - 14.0).abs() < 1e-12);
        assert!((hp_norm(&t, f64::INFINITY).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn convolution_theorem_examples() {
        let s = heis(3);
        let h = Harmonics::new(&s).unwrap();
        let u = Density::uniform(s);
        let prod = fourier_product(&transform(&h, &u).unwrap(), &transform(&h, &u).unwrap()).unwrap();
        assert!(prod.sub(&transform(&h, &u).unwrap()).unwrap().max_abs() < 1e-12);
        assert!((prod.mats()[0][(0, 0)] - 1.0).norm() < 1e-12);
        assert_eq!(u.convolve(&u).unwrap().reduced(), u);

        let gt = s.table();
        let (a, b) = (5, 19);
        let ta = transform(&h, &Density::delta(s, a)).unwrap();
        let tb = transform(&h, &Density::delta(s, b)).unwrap();
        let tba = transform(&h, &Density::delta(s, gt.mul(b, a))).unwrap();
        assert!(fourier_product(&ta, &tb).unwrap().sub(&tba).unwrap().max_abs() < 1e-12);
        assert_ne!(gt.mul(a, b), gt.mul(b, a));

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s5 = heis(5);
        let h5 = Harmonics::new(&s5).unwrap();
        for _ in 0..5 {
            let f = random_density(&mut rng, s5);
            let g = random_density(&mut rng, s5);
            assert!(convolution_theorem_check(&h5, &f, &g).unwrap() < 1e-9);
        }
    }

    #[test]
    fn suite_passes_on_small_groups() {
        for s in [spec(GroupKind::Additive { dim: 1 }, 2, 3), heis(3)] {
            let r = inequality_suite(&s, 20, 1).unwrap();
            assert!(r.passed, "{r:?}");
            assert_eq!(r.checks.len(), 5);
        }
    }

    #[test]
    fn heisenberg_level_two_unsupported() {
        assert!(matches!(Harmonics::new(&spec(GroupKind::Heisenberg, 3, 2)), Err(Error::UnsupportedLevel(_))));
    }

    #[test]
    fn smoothing_chain_on_power_map() {
        let ring = make_ring(5, 1).unwrap();
        let c = crate::counting::count_fibers(&crate::morphism::Builtin::Power(2).build().unwrap(), &ring).unwrap();
        let f = crate::density::to_density(&c).unwrap();
        let h = Harmonics::new(c.spec()).unwrap();
        for s in [1.1, 1.5, 2.0] {
            let r = smoothing_chain(&h, &f, s).unwrap();
            assert!(r.holds, "{r:?}");
        }
    }
}
