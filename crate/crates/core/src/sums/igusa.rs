//! Level-set measures of `val(h(x))` and Igusa zeta functions
//! `Z_h(s) = int_{Z_p^n} |h(x)|_p^s dx = sum_t mu_t p^{-ts}`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::int;
use crate::error::{Error, Result};
use crate::poly::{IntPoly, ModPoly};
use crate::ring::{ResidueRing, TupleSpace, DEFAULT_BUDGET};

/// `counts[t]` points with `val(h(x)) = t` for `t < K`; `counts[K]` collects
/// `val >= K`. Measures are counts over `p^{Kn}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelSetTable {
    pub p: u64,
    pub k: u32,
    pub n_vars: usize,
    pub poly: String,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl LevelSetTable {
    pub fn measure(&self, t: usize) -> BigRational {
        BigRational::new(BigInt::from(self.counts[t]), BigInt::from(self.total))
    }

    /// Measure of `val >= K`.
    pub fn deep_measure(&self) -> BigRational {
        self.measure(self.k as usize)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,numerator,denominator,float\n");
        for t in 0..=self.k as usize {
            let mu = self.measure(t);
            let label = if t == self.k as usize { format!(">={t}") } else { t.to_string() };
            writeln!(out, "{label},{},{},{}", mu.numer(), mu.denom(), mu.to_f64().unwrap()).unwrap();
        }
        out
    }
}

pub fn level_set_measures(h: &IntPoly, p: u64, k: u32) -> Result<LevelSetTable> {
    level_set_measures_with_budget(h, h.width().max(1), p, k, DEFAULT_BUDGET)
}

/// Exhaustive count of `val(h(x))` over `(Z/p^K)^n`.
pub fn level_set_measures_with_budget(h: &IntPoly, n_vars: usize, p: u64, k: u32, budget: u64) -> Result<LevelSetTable> {
    if n_vars < h.width() {
        return Err(Error::Arity { expected: h.width(), got: n_vars });
    }
    let ring = ResidueRing::new(p, k)?;
    let space = TupleSpace::new(ring, n_vars, budget)?;
    let mp = ModPoly::new(h, &ring);
    let buckets = k as usize + 1;
    let counts = (0..space.chunk_count())
        .into_par_iter()
        .fold(
            || vec![0u64; buckets],
            |mut acc, c| {
                space.visit(space.chunk(c), |x| {
                    let mut v = mp.eval(x);
                    let mut t = 0;
                    if v == 0 {
                        t = k as usize;
                    } else {
                        while v.is_multiple_of(p) {
                            v /= p;
                            t += 1;
                        }
                    }
                    acc[t] += 1;
                });
                acc
            },
        )
        .reduce(
            || vec![0u64; buckets],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(LevelSetTable { p, k, n_vars, poly: h.to_string(), counts, total: space.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ZetaMode {
    /// `(1 - 1/p) / (1 - p^{-(ns+1)})` for `h = x^n`.
    ClosedForm,
    /// Level sets counted modulo `p^K`, with an interval for the tail.
    Empirical { k: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZetaValue {
    pub mode: ZetaMode,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Exact value when it is rational.
    pub exact: Option<String>,
}

fn monomial_degree(h: &IntPoly) -> Option<u32> {
    if h.width() != 1 || h.num_terms() != 1 {
        return None;
    }
    let (m, c) = h.terms().next()?;
    (c.is_one()).then(|| m.exponent(0))
}

fn p_pow_neg(p: u64, e: &BigRational) -> f64 {
    (p as f64).powf(-e.to_f64().unwrap())
}

/// Relative allowance for float rounding in the empirical bracket.
const ROUNDING_SLACK: f64 = 1e-13;

pub fn igusa_zeta(h: &IntPoly, p: u64, s: &BigRational, mode: ZetaMode) -> Result<ZetaValue> {
    if s.is_negative() {
        return Err(Error::Domain(format!("s must be non-negative, got {s}")));
    }
    match mode {
        ZetaMode::ClosedForm => {
            let n = monomial_degree(h).ok_or_else(|| Error::UnsupportedPolynomial(h.to_string()))?;
            ResidueRing::new(p, 1)?;
            let e = s * int(n as i64) + BigRational::one();
            let exact = e.is_integer().then(|| {
                let pinv = BigRational::new(BigInt::one(), BigInt::from(p));
                let pe = num_traits::pow(pinv.clone(), e.to_integer().to_usize().unwrap());
                (BigRational::one() - pinv) / (BigRational::one() - pe)
            });
            let value = match &exact {
                Some(v) => v.to_f64().unwrap(),
                None => (1.0 - 1.0 / p as f64) / (1.0 - p_pow_neg(p, &e)),
            };
            Ok(ZetaValue { mode, value, lower: value, upper: value, exact: exact.map(|v| v.to_string()) })
        }
        ZetaMode::Empirical { k } => {
            let table = level_set_measures(h, p, k)?;
            let sf = s.to_f64().unwrap();
            let head: f64 = (0..k as usize).map(|t| table.measure(t).to_f64().unwrap() * (p as f64).powf(-(t as f64) * sf)).sum();
            let deep = table.deep_measure().to_f64().unwrap();
            if s.is_zero() {
                let v = head + deep;
                return Ok(ZetaValue { mode, value: v, lower: v, upper: v, exact: Some("1".into()) });
            }
            // sum_{t >= K} mu_t p^{-ts} lies in [0, mu_{>=K} p^{-Ks}]
            let tail = deep * (p as f64).powf(-(k as f64) * sf);
            let slack = ROUNDING_SLACK * (head + tail);
            Ok(ZetaValue { mode, value: head + tail / 2.0, lower: head - slack, upper: head + tail + slack, exact: None })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalityCheck {
    pub s: String,
    pub t: f64,
    pub rational_value: f64,
    pub series_value: f64,
    pub empirical_lower: f64,
    pub empirical_upper: f64,
    pub agree: bool,
}

/// `Z_{x^n}` as a rational function of `T = p^{-s}`: numerator and
/// denominator coefficients in ascending powers of `T`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalityExhibit {
    pub n: u32,
    pub p: u64,
    pub numerator: Vec<String>,
    pub denominator: Vec<String>,
    pub display: String,
    pub checks: Vec<RationalityCheck>,
}

pub fn rationality_exhibit(n: u32, p: u64, s_values: &[BigRational], k: u32) -> Result<RationalityExhibit> {
    if n == 0 {
        return Err(Error::Domain("monomial degree must be at least 1".into()));
    }
    let pinv = BigRational::new(BigInt::one(), BigInt::from(p));
    let num = vec![BigRational::one() - &pinv];
    let mut den = vec![BigRational::zero(); n as usize + 1];
    den[0] = BigRational::one();
    den[n as usize] = -pinv.clone();
    let eval = |c: &[BigRational], t: f64| c.iter().enumerate().map(|(j, a)| a.to_f64().unwrap() * t.powi(j as i32)).sum::<f64>();
    let h = IntPoly::var(0).pow(n);
    let table = level_set_measures(&h, p, k)?;
    let mut checks = Vec::new();
    for s in s_values {
        let t = p_pow_neg(p, s);
        let rational_value = eval(&num, t) / eval(&den, t);
        // mu_{nj} = (1 - 1/p) p^{-j}
        let (mut series_value, mut j) = (0.0, 0i32);
        loop {
            let term = (1.0 - 1.0 / p as f64) * (p as f64).powi(-j) * t.powi(n as i32 * j);
            series_value += term;
            if term < 1e-18 || j > 10_000 {
                break;
            }
            j += 1;
        }
        let emp = igusa_from_table(&table, s);
        let agree = (rational_value - series_value).abs() <= 1e-12 * rational_value
            && emp.0 <= rational_value * (1.0 + 1e-12)
            && rational_value <= emp.1 * (1.0 + 1e-12);
        checks.push(RationalityCheck { s: s.to_string(), t, rational_value, series_value, empirical_lower: emp.0, empirical_upper: emp.1, agree });
    }
    let display = format!("({}) / (1 - (1/{p})*T^{n})", num[0]);
    Ok(RationalityExhibit {
        n,
        p,
        numerator: num.iter().map(ToString::to_string).collect(),
        denominator: den.iter().map(ToString::to_string).collect(),
        display,
        checks,
    })
}

fn igusa_from_table(table: &LevelSetTable, s: &BigRational) -> (f64, f64) {
    let sf = s.to_f64().unwrap();
    let p = table.p as f64;
    let head: f64 = (0..table.k as usize).map(|t| table.measure(t).to_f64().unwrap() * p.powf(-(t as f64) * sf)).sum();
    let deep = table.deep_measure().to_f64().unwrap();
    (head, head + deep * p.powf(-(table.k as f64) * sf))
}
