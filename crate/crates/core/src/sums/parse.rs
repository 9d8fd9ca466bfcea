//! Text format: `sum[l] term ; term ; ...` where a term is a product of
//! `q^(exponent)` factors, rational constants and polynomials in `e1..el`.
//! Exponents are linear in the `e` variables with coefficients affine in
//! `eps`. The `[l]` header is optional.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Affine, SumExpr, EPS_SLOT};
use crate::error::{Error, Result};
use crate::poly::{indexed_var, Parser, RatPoly, Token};

fn resolve(name: &str) -> Option<usize> {
    if name == "eps" {
        return Some(EPS_SLOT);
    }
    indexed_var("e", name).filter(|i| *i < EPS_SLOT)
}

pub fn parse_sum_expr(text: &str) -> Result<SumExpr> {
    let mut p = Parser::new(text, 0, &resolve)?;
    if p.peek() == Some(&Token::Ident("sum".into())) {
        p.bump();
    }
    let mut declared = None;
    if p.peek_sym('[') {
        p.bump();
        match p.bump() {
            Some(Token::Num(n)) => declared = Some(usize::try_from(n).map_err(|_| Error::Parse { pos: p.offset(), msg: "bad arity".into() })?),
            _ => return p.err("expected the number of summation variables"),
        }
        p.expect_sym(']')?;
    }
    let mut raw = Vec::new();
    loop {
        raw.push(parse_term(&mut p)?);
        if p.peek_sym(';') {
            p.bump();
            continue;
        }
        p.expect_end()?;
        break;
    }
    let used = raw
        .iter()
        .map(|(rows, poly): &(Vec<Affine>, RatPoly)| rows.len().max(poly.width()))
        .max()
        .unwrap_or(0);
    let l = match declared {
        Some(l) if l < used => return Err(Error::Arity { expected: l, got: used }),
        Some(l) => l,
        None => used,
    };
    SumExpr::new(l, raw.into_iter().map(|(rows, poly)| (BigRational::one(), rows, poly)).collect())
}

fn parse_term(p: &mut Parser<'_>) -> Result<(Vec<Affine>, RatPoly)> {
    let mut sign = BigRational::one();
    while p.peek_sym('-') || p.peek_sym('+') {
        if p.peek_sym('-') {
            sign = -sign;
        }
        p.bump();
    }
    let mut expo = RatPoly::zero();
    let mut poly = RatPoly::constant(sign);
    loop {
        if p.peek() == Some(&Token::Ident("q".into())) {
            p.bump();
            p.expect_sym('^')?;
            let at = p.offset();
            p.expect_sym('(')?;
            let e = p.parse_expr()?;
            p.expect_sym(')')?;
            check_exponent(&e, at)?;
            expo = &expo + &e;
        } else {
            let at = p.offset();
            let f = p.parse_power()?;
            if f.width() > EPS_SLOT {
                return Err(Error::Parse { pos: at, msg: "eps may only appear in exponents".into() });
            }
            poly = &poly * &f;
        }
        if p.peek_sym('*') {
            p.bump();
        } else {
            break;
        }
    }
    if !(p.at_end() || p.peek_sym(';')) {
        return p.err("expected `*`, `;` or end of input");
    }
    Ok((to_rows(&expo), poly))
}

/// Every monomial must be `e_t` or `e_t * eps`.
fn check_exponent(e: &RatPoly, at: usize) -> Result<()> {
    for (m, _) in e.terms() {
        let ex = m.exponents();
        let eps_deg = m.exponent(EPS_SLOT);
        let e_deg: u32 = ex.iter().take(EPS_SLOT).sum();
        if e_deg != 1 || eps_deg > 1 {
            let name = |i: usize| if i == EPS_SLOT { "eps".to_string() } else { format!("e{}", i + 1) };
            let shown = RatPoly::term(BigRational::one(), m.clone());
            return Err(Error::Parse {
                pos: at,
                msg: format!("exponent must be linear in e with eps-affine coefficients, found `{}`", shown.display_with(&name)),
            });
        }
    }
    Ok(())
}

fn to_rows(e: &RatPoly) -> Vec<Affine> {
    let mut rows: Vec<Affine> = Vec::new();
    for (m, c) in e.terms() {
        let t = m.exponents().iter().take(EPS_SLOT).position(|&x| x == 1).expect("checked");
        if rows.len() <= t {
            rows.resize(t + 1, Affine::zero());
        }
        if m.exponent(EPS_SLOT) == 1 {
            rows[t].slope += c;
        } else {
            rows[t].base += c;
        }
    }
    rows
}

/// Parses `a/b`, integers and finite decimals such as `-0.25` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::Parse { pos: 0, msg: format!("`{t}` is not a rational number") };
    if let Some((int_part, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let v = BigRational::new(n, d);
        return Ok(if negative { -v } else { v });
    }
    let v: BigRational = t.parse().map_err(|_| bad())?;
    if v.denom().is_zero() {
        return Err(bad());
    }
    Ok(v)
}
