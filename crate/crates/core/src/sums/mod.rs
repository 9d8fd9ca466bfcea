//! Exponential-polynomial sums `sum_{e in N^l} q^{d(eps) . e} P(e)` over
//! rectilinear domains, with affine-in-eps exponents.

mod igusa;
mod parse;

pub use igusa::{
    igusa_zeta, level_set_measures, level_set_measures_with_budget, rationality_exhibit, LevelSetTable, RationalityCheck,
    RationalityExhibit, ZetaMode, ZetaValue,
};
pub use parse::{parse_rational, parse_sum_expr};

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{Monomial, RatPoly};

/// Exponent variables beyond this index are rejected; `eps` lives here.
pub(crate) const EPS_SLOT: usize = 32;

/// `base + slope * eps`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Affine {
    pub base: BigRational,
    pub slope: BigRational,
}

impl Affine {
    pub fn new(base: BigRational, slope: BigRational) -> Self {
        Self { base, slope }
    }

    pub fn constant(base: i64) -> Self {
        Self { base: int(base), slope: BigRational::zero() }
    }

    pub fn zero() -> Self {
        Self::constant(0)
    }

    pub fn at(&self, eps: &BigRational) -> BigRational {
        &self.base + &self.slope * eps
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.slope.is_zero() {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{} + {}*eps", self.base, self.slope)
        }
    }
}

pub(crate) fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// One summand `q^{d . e} P(e)`; any scalar coefficient is folded into `P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub exps: Vec<Affine>,
    pub poly: RatPoly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumExpr {
    l: usize,
    terms: Vec<Term>,
}

impl SumExpr {
    /// Builds a sum over `N^l`, padding exponent rows with zeros and merging
    /// terms with identical rows (their polynomials add). Terms whose
    /// polynomial vanishes are dropped.
    pub fn new(l: usize, terms: Vec<(BigRational, Vec<Affine>, RatPoly)>) -> Result<Self> {
        if l > EPS_SLOT {
            return Err(Error::Domain(format!("at most {EPS_SLOT} summation variables are supported")));
        }
        let mut merged: Vec<Term> = Vec::new();
        for (c, mut exps, poly) in terms {
            if exps.len() > l || poly.width() > l {
                return Err(Error::Arity { expected: l, got: exps.len().max(poly.width()) });
            }
            exps.resize(l, Affine::zero());
            let poly = poly.scale(&c);
            match merged.iter_mut().find(|t| t.exps == exps) {
                Some(t) => t.poly = &t.poly + &poly,
                None => merged.push(Term { exps, poly }),
            }
        }
        merged.retain(|t| !t.poly.is_zero());
        Ok(Self { l, terms: merged })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Exponent entries `d_{it}(eps)` for every term `i` and variable `t`.
    pub fn entries_at(&self, eps: &BigRational) -> Vec<Vec<BigRational>> {
        self.terms.iter().map(|t| t.exps.iter().map(|a| a.at(eps)).collect()).collect()
    }
}

impl fmt::Display for SumExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |i: usize| if i == EPS_SLOT { "eps".to_string() } else { format!("e{}", i + 1) };
        let inferred = self
            .terms
            .iter()
            .map(|t| t.exps.iter().rposition(|a| *a != Affine::zero()).map_or(0, |i| i + 1).max(t.poly.width()))
            .max()
            .unwrap_or(0);
        if inferred == self.l {
            write!(f, "sum ")?;
        } else {
            write!(f, "sum[{}] ", self.l)?;
        }
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ; ")?;
            }
            let mut expo = RatPoly::zero();
            for (v, a) in t.exps.iter().enumerate() {
                expo.add_term(Monomial::var(v), a.base.clone());
                let mut both = vec![0; EPS_SLOT + 1];
                both[v] = 1;
                both[EPS_SLOT] = 1;
                expo.add_term(Monomial::from_exponents(both), a.slope.clone());
            }
            write!(f, "q^({}) * ({})", expo.display_with(&names), t.poly.display_with(&names))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Convergence {
    pub converges: bool,
    /// `(term, variable)` pairs with `d_{it}(eps) >= 0`.
    pub violating: Vec<(usize, usize)>,
}

/// The sum converges iff every exponent entry is negative at `eps`.
pub fn decide_convergence(expr: &SumExpr, eps: &BigRational) -> Convergence {
    let mut violating = Vec::new();
    for (i, row) in expr.entries_at(eps).iter().enumerate() {
        for (t, d) in row.iter().enumerate() {
            if !d.is_negative() {
                violating.push((i, t));
            }
        }
    }
    Convergence { converges: violating.is_empty(), violating }
}

/// `N_r` with `sum_{e>=0} e^r x^e = N_r(x) / (1 - x)^{r+1}`, as integer
/// coefficients in ascending degree.
pub fn eulerian_numerator(r: u32) -> Vec<BigInt> {
    // x d/dx [N/(1-x)^m] = x (N'(1-x) + m N) / (1-x)^{m+1}
    let mut n = vec![BigInt::one()];
    for m in 1..=r {
        let mut next = vec![BigInt::zero(); n.len() + 1];
        for (j, c) in n.iter().enumerate() {
            // N' (1 - x): j c x^{j-1} - j c x^j
            if j > 0 {
                next[j - 1] += c * j;
                next[j] -= c * j;
            }
            next[j] += c * m;
        }
        // multiply by x
        next.insert(0, BigInt::zero());
        next.pop();
        n = next;
    }
    n
}

fn power_sum_exact(r: u32, x: &BigRational) -> BigRational {
    let mut num = BigRational::zero();
    let mut xp = BigRational::one();
    for c in eulerian_numerator(r) {
        num += &xp * BigRational::from_integer(c);
        xp *= x;
    }
    let one_minus = BigRational::one() - x;
    num / pow_rat(&one_minus, r + 1)
}

fn power_sum_f64(r: u32, x: f64) -> f64 {
    let num: f64 = eulerian_numerator(r).iter().enumerate().map(|(j, c)| c.to_f64().unwrap() * x.powi(j as i32)).sum();
    num / (1.0 - x).powi(r as i32 + 1)
}

fn pow_rat(x: &BigRational, e: u32) -> BigRational {
    num_traits::pow(x.clone(), e as usize)
}

/// `q^d` for integer `d`.
fn pow_rat_signed(q: &BigRational, d: &BigInt) -> BigRational {
    let e = d.abs().to_u32().expect("small exponent");
    let p = pow_rat(q, e);
    if d.is_negative() { p.recip() } else { p }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumValue {
    pub value: f64,
    /// Exact value, present when every exponent is an integer at `eps`.
    pub exact: Option<String>,
    #[serde(skip)]
    pub exact_rational: Option<BigRational>,
}

/// Closed form of a convergent sum via `sum e^r x^e = N_r(x)/(1-x)^{r+1}`.
pub fn eval_sum(expr: &SumExpr, q: &BigRational, eps: &BigRational) -> Result<SumValue> {
    if *q <= BigRational::one() {
        return Err(Error::Domain(format!("base q must exceed 1, got {q}")));
    }
    let conv = decide_convergence(expr, eps);
    if !conv.converges {
        return Err(Error::Divergent(conv.violating));
    }
    let entries = expr.entries_at(eps);
    let all_integral = entries.iter().flatten().all(|d| d.is_integer());
    let qf = q.to_f64().unwrap();
    let mut value = 0.0;
    let mut exact = all_integral.then(BigRational::zero);
    for (term, row) in expr.terms.iter().zip(&entries) {
        let xs_f: Vec<f64> = row.iter().map(|d| qf.powf(d.to_f64().unwrap())).collect();
        let xs_q: Option<Vec<BigRational>> = all_integral.then(|| row.iter().map(|d| pow_rat_signed(q, &d.to_integer())).collect());
        for (m, c) in term.poly.terms() {
            let mut vf = c.to_f64().unwrap();
            let mut vq = c.clone();
            for t in 0..expr.l {
                let r = m.exponent(t);
                vf *= power_sum_f64(r, xs_f[t]);
                if let Some(xs) = &xs_q {
                    vq *= power_sum_exact(r, &xs[t]);
                }
            }
            value += vf;
            if let Some(acc) = exact.as_mut() {
                *acc += vq;
            }
        }
    }
    if let Some(e) = &exact {
        value = e.to_f64().unwrap();
    }
    Ok(SumValue { value, exact: exact.as_ref().map(|e| e.to_string()), exact_rational: exact })
}

/// Partial sum over the box `[0, radius]^l`, in floating point.
pub fn partial_sum(expr: &SumExpr, q: f64, eps: f64, radius: u32) -> f64 {
    let l = expr.l;
    let rows: Vec<Vec<f64>> = expr.terms.iter().map(|t| t.exps.iter().map(|a| a.base.to_f64().unwrap() + a.slope.to_f64().unwrap() * eps).collect()).collect();
    let mut e = vec![0u32; l];
    let mut total = 0.0;
    loop {
        let ef: Vec<f64> = e.iter().map(|&v| v as f64).collect();
        for (term, row) in expr.terms.iter().zip(&rows) {
            let expo: f64 = row.iter().zip(&ef).map(|(d, x)| d * x).sum();
            let p = term.poly.eval_with(&ef, |c| c.to_f64().unwrap());
            total += q.powf(expo) * p;
        }
        let mut t = 0;
        loop {
            if t == l {
                return total;
            }
            e[t] += 1;
            if e[t] <= radius {
                break;
            }
            e[t] = 0;
            t += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsChoice {
    pub eps: String,
    pub alpha: String,
    #[serde(skip)]
    pub eps_exact: BigRational,
    #[serde(skip)]
    pub alpha_exact: BigRational,
}

/// `eps` halves the smallest root of a positively sloped entry (capped at
/// 1); `alpha = -max d(eps) / 2`.
pub fn find_epsilon(expr: &SumExpr) -> Result<EpsChoice> {
    let mut eps = BigRational::one();
    let mut any = false;
    for (i, term) in expr.terms.iter().enumerate() {
        for (t, a) in term.exps.iter().enumerate() {
            any = true;
            if !a.base.is_negative() {
                return Err(Error::NotL1((i, t)));
            }
            if a.slope.is_positive() {
                let half_root = -&a.base / &a.slope / int(2);
                if half_root < eps {
                    eps = half_root;
                }
            }
        }
    }
    if !any {
        return Err(Error::Domain("sum has no exponent entries".into()));
    }
    let max_d = expr.entries_at(&eps).into_iter().flatten().max().expect("nonempty");
    let alpha = -max_d / int(2);
    Ok(EpsChoice { eps: eps.to_string(), alpha: alpha.to_string(), eps_exact: eps, alpha_exact: alpha })
}

/// Exact recheck of the `find_epsilon` postcondition: every entry at `eps`
/// is at most `-alpha < 0`.
pub fn check_eps_choice(expr: &SumExpr, choice: &EpsChoice) -> bool {
    choice.alpha_exact.is_positive()
        && choice.eps_exact.is_positive()
        && expr.entries_at(&choice.eps_exact).iter().flatten().all(|d| *d <= -&choice.alpha_exact)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthBound {
    /// `sup_e |P(e)|^{1+eps} q^{-alpha |e|}`.
    pub c: f64,
    /// Grid radius in `|e| = sum e_t` beyond which the envelope is below `c`.
    pub radius: u64,
    pub argmax: Vec<u64>,
    pub random_checks: usize,
    pub worst_random_ratio: f64,
    pub holds: bool,
}

const GROWTH_GRID_CAP: u64 = 20_000_000;

/// Finds `C` with `|P(e)|^{1+eps} <= C q^{alpha (e_1 + ... + e_m)}` on
/// `N^m`. The grid is the simplex `|e| <= R`, where `R` is chosen so that
/// the envelope `A^{1+eps} (1+s)^{D(1+eps)} q^{-alpha s}` (with `A` the
/// coefficient mass and `D` the degree) is decreasing and below the grid
/// maximum for every `s > R`. The bound is then re-tested at `checks` random
/// lattice points.
pub fn poly_growth_bound(p: &RatPoly, m: usize, eps: f64, q: f64, alpha: f64, checks: usize, seed: u64) -> Result<GrowthBound> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if eps < 0.0 || q <= 1.0 || p.width() > m {
        return Err(Error::Domain("need eps >= 0, q > 1 and the polynomial in m variables".into()));
    }
    let pw = 1.0 + eps;
    let lnq = q.ln();
    let log_ratio = |e: &[u64]| -> f64 {
        let ef: Vec<f64> = e.iter().map(|&v| v as f64).collect();
        let v = p.eval_with(&ef, |c| c.to_f64().unwrap()).abs();
        if v == 0.0 {
            f64::NEG_INFINITY
        } else {
            pw * v.ln() - alpha * lnq * ef.iter().sum::<f64>()
        }
    };
    let mass: f64 = p.terms().map(|(_, c)| c.abs().to_f64().unwrap()).sum();
    if mass == 0.0 {
        return Ok(GrowthBound { c: 0.0, radius: 0, argmax: vec![0; m], random_checks: 0, worst_random_ratio: 0.0, holds: true });
    }
    let d = p.degree() as f64;
    let envelope = |s: f64| pw * mass.ln() + d * pw * (1.0 + s).ln() - alpha * lnq * s;
    let turnover = (d * pw / (alpha * lnq) - 1.0).max(0.0).ceil() as u64;

    let mut best = f64::NEG_INFINITY;
    let mut argmax = vec![0; m];
    let mut radius = 0u64;
    let mut visited = 0u64;
    loop {
        // shell |e| = radius
        for_each_composition(m, radius, &mut |e| {
            visited += 1;
            let r = log_ratio(e);
            if r > best {
                best = r;
                argmax = e.to_vec();
            }
        });
        if m == 0 || (radius >= turnover && envelope((radius + 1) as f64) <= best) {
            break;
        }
        radius += 1;
        if visited > GROWTH_GRID_CAP {
            return Err(Error::Domain("growth bound grid exceeds the enumeration cap".into()));
        }
    }
    let c = best.exp();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = (2 * radius).max(4);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..checks {
        let e: Vec<u64> = (0..m).map(|_| rng.random_range(0..=span)).collect();
        worst = worst.max(log_ratio(&e) - best);
    }
    let worst_random_ratio = if checks == 0 { 0.0 } else { worst.exp() };
    Ok(GrowthBound { c, radius, argmax, random_checks: checks, worst_random_ratio, holds: worst_random_ratio <= 1.0 + 1e-12 })
}

/// Visits every `e in N^m` with `sum e = s`.
fn for_each_composition(m: usize, s: u64, f: &mut dyn FnMut(&[u64])) {
    fn rec(e: &mut Vec<u64>, m: usize, left: u64, f: &mut dyn FnMut(&[u64])) {
        if e.len() + 1 == m {
            e.push(left);
            f(e);
            e.pop();
            return;
        }
        for v in 0..=left {
            e.push(v);
            rec(e, m, left - v, f);
            e.pop();
        }
    }
    if m == 0 {
        if s == 0 {
            f(&[]);
        }
        return;
    }
    rec(&mut Vec::with_capacity(m), m, s, f);
}

/// Hand-rectilinearized instances.
pub fn instance_library() -> Vec<(&'static str, &'static str, SumExpr)> {
    [
        ("geometric", "sum_{e>=0} q^{-e}", "sum q^(-e1)"),
        ("weighted_geometric", "sum_{e>=0} e q^{-e}", "sum q^(-e1) * (e1)"),
        ("product", "sum over N^2 of q^{-e1-e2}", "sum q^(-e1 - e2)"),
        (
            "abs_power_half",
            "integral of |x|^{-(1+eps)/2} over Z_p, up to the factor 1-1/q",
            "sum q^((-1/2 + (1/2)*eps)*e1)",
        ),
        (
            "two_cells",
            "two cells with affine exponents and polynomial weights",
            "sum q^((-1+2*eps)*e1 + (-2+eps)*e2) * (e1^2 + e2 + 1) ; 3 * q^(-e1 + (-1+eps)*e2) * (e2)",
        ),
        ("not_l1", "|x|^{-1} over Z_p, not integrable", "sum q^(eps*e1)"),
    ]
    .into_iter()
    .map(|(name, about, text)| (name, about, parse_sum_expr(text).expect("library instance parses")))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn expr(text: &str) -> SumExpr {
        parse_sum_expr(text).unwrap()
    }

    #[test]
    fn convergence_examples() {
        let z = BigRational::zero();
        assert!(decide_convergence(&expr("sum q^(-e1)"), &z).converges);
        let c = decide_convergence(&expr("sum[1] q^(0*e1)"), &z);
        assert!(!c.converges);
        assert_eq!(c.violating, vec![(0, 0)]);
        assert!(decide_convergence(&expr("sum q^(-e1 - e2) * (e1^3*e2)"), &z).converges);
        // a variable missing from the exponent has d = 0
        let c = decide_convergence(&expr("sum q^(-e1) * (e2 + 1)"), &z);
        assert_eq!(c.violating, vec![(0, 1)]);
        let c = decide_convergence(&expr("sum q^((-1+2*eps)*e1)"), &r(1, 2));
        assert!(!c.converges);
    }

    #[test]
    fn eval_examples() {
        let two = int(2);
        let z = BigRational::zero();
        assert_eq!(eval_sum(&expr("sum q^(-e1)"), &two, &z).unwrap().exact_rational, Some(int(2)));
        assert_eq!(eval_sum(&expr("sum q^(-e1) * (e1)"), &two, &z).unwrap().exact_rational, Some(int(2)));
        assert_eq!(eval_sum(&expr("sum q^(-e1-e2)"), &two, &z).unwrap().exact_rational, Some(int(4)));
        assert!(matches!(eval_sum(&expr("sum q^(e1)"), &two, &z), Err(Error::Divergent(_))));
        // sum e^2 2^-e = 6, sum e^3 2^-e = 26
        assert_eq!(eval_sum(&expr("sum q^(-e1) * (e1^2)"), &two, &z).unwrap().exact_rational, Some(int(6)));
        assert_eq!(eval_sum(&expr("sum q^(-e1) * (e1^3)"), &two, &z).unwrap().exact_rational, Some(int(26)));
        // non-integral exponent: float path
        let v = eval_sum(&expr("sum q^((-1/2)*e1)"), &two, &z).unwrap();
        assert!(v.exact.is_none());
        assert!((v.value - 1.0 / (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn eulerian_numerators() {
        let as_i64 = |r| eulerian_numerator(r).iter().map(|c| c.to_i64().unwrap()).collect::<Vec<_>>();
        assert_eq!(as_i64(0), vec![1]);
        assert_eq!(as_i64(1), vec![0, 1]);
        assert_eq!(as_i64(2), vec![0, 1, 1]);
        assert_eq!(as_i64(3), vec![0, 1, 4, 1]);
        assert_eq!(as_i64(4), vec![0, 1, 11, 11, 1]);
    }

    #[test]
    fn eval_matches_partial_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let l = rng.random_range(1..=3);
            let terms: Vec<_> = (0..rng.random_range(1..=3))
                .map(|_| {
                    let exps = (0..l).map(|_| Affine::new(r(-rng.random_range(2..=6), 2), BigRational::zero())).collect();
                    let mut p = RatPoly::zero();
                    for _ in 0..3 {
                        let m: Vec<u32> = (0..l).map(|_| rng.random_range(0..=2)).collect();
                        p.add_term(Monomial::from_exponents(m), int(rng.random_range(-3..=3)));
                    }
                    (int(1), exps, p)
                })
                .collect();
            let e = SumExpr::new(l, terms).unwrap();
            let v = eval_sum(&e, &int(2), &BigRational::zero()).unwrap().value;
            // slowest decay 2^{-1} per step: tail below 1e-10 by radius 70
            let ps = partial_sum(&e, 2.0, 0.0, 80);
            assert!((v - ps).abs() <= 1e-8 * v.abs().max(1e-300) + 1e-9, "{e}: {v} vs {ps}");
        }
    }

    #[test]
    fn find_epsilon_examples() {
        let c = find_epsilon(&expr("sum q^((-1+2*eps)*e1)")).unwrap();
        assert_eq!((c.eps_exact.clone(), c.alpha_exact.clone()), (r(1, 4), r(1, 4)));
        assert!(check_eps_choice(&expr("sum q^((-1+2*eps)*e1)"), &c));

        let c = find_epsilon(&expr("sum q^(-2*e1)")).unwrap();
        assert_eq!((c.eps_exact, c.alpha_exact), (int(1), int(1)));

        assert!(matches!(find_epsilon(&expr("sum q^(e1)")), Err(Error::NotL1((0, 0)))));
        for (name, _, e) in instance_library() {
            match find_epsilon(&e) {
                Ok(c) => assert!(check_eps_choice(&e, &c), "{name}"),
                Err(Error::NotL1(_)) => assert_eq!(name, "not_l1"),
                Err(other) => panic!("{name}: {other}"),
            }
        }
    }

    #[test]
    fn growth_bound_examples() {
        let one = RatPoly::constant(int(1));
        let g = poly_growth_bound(&one, 1, 0.0, 2.0, 1.0, 1000, 0).unwrap();
        assert!((g.c - 1.0).abs() < 1e-12 && g.holds);

        let e = RatPoly::var(0);
        let g = poly_growth_bound(&e, 1, 0.0, 2.0, 1.0, 1000, 0).unwrap();
        assert!((g.c - 0.5).abs() < 1e-12, "{g:?}");
        assert!(g.holds);

        let e2 = &e * &e;
        assert!(matches!(poly_growth_bound(&e2, 1, 0.0, 2.0, 0.0, 10, 0), Err(Error::InvalidAlpha(_))));

        // brute-force maximum over a large box agrees
        let p = crate::poly::parse_rational_poly("x1^2*x2 - 3*x2 + 5").unwrap();
        let g = poly_growth_bound(&p, 2, 0.5, 2.0, 0.75, 10_000, 3).unwrap();
        let mut brute = 0.0f64;
        for a in 0..200u32 {
            for b in 0..200u32 {
                let v = p.eval_with(&[a as f64, b as f64], |c| c.to_f64().unwrap()).abs();
                brute = brute.max(v.powf(1.5) * 2f64.powf(-0.75 * (a + b) as f64));
            }
        }
        assert!((g.c - brute).abs() <= 1e-9 * brute, "{} vs {brute}", g.c);
        assert!(g.holds);
    }

    #[test]
    fn merging_and_display_round_trip() {
        let e = expr("sum q^(-e1) * (e1) ; 2 * q^(-e1) * (1) ; q^(-e1 - e2)");
        assert_eq!(e.terms().len(), 2);
        assert_eq!(e.l(), 2);
        assert_eq!(e.terms()[0].poly, crate::poly::parse_rational_poly("x1 + 2").unwrap());
        assert_eq!(e.terms()[0].exps, vec![Affine::constant(-1), Affine::zero()]);
        for (_, _, lib) in instance_library() {
            let back = parse_sum_expr(&lib.to_string()).unwrap();
            assert_eq!(back, lib, "{lib}");
        }
        let cancel = expr("sum q^(-e1) * (e1) ; q^(-e1) * (-e1)");
        assert!(cancel.terms().is_empty());
    }
}
