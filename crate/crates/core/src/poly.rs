//! Sparse multivariate polynomials with exact coefficients, a small
//! expression parser, and a reduced form for fast evaluation mod `p^k`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ring::{mul_mod, ResidueRing};

/// Exponent vector with trailing zeros trimmed, so that `x1` means the same
/// monomial regardless of how many variables are in scope.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(i: usize) -> Self {
        Self::var_pow(i, 1)
    }

    pub fn var_pow(i: usize, e: u32) -> Self {
        let mut v = vec![0; i + 1];
        v[i] = e;
        Self::from_exponents(v)
    }

    pub fn from_exponents(mut v: Vec<u32>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        Monomial(v)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of variable slots in use (highest variable index + 1).
    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        Monomial::from_exponents((0..n).map(|i| self.exponent(i) + other.exponent(i)).collect())
    }

    pub fn shift(&self, offset: usize) -> Monomial {
        if self.0.is_empty() {
            return self.clone();
        }
        let mut v = vec![0; offset];
        v.extend_from_slice(&self.0);
        Monomial(v)
    }
}

/// Graded order; within a degree, a larger exponent on an earlier variable
/// ranks higher (so `x2 < x1`).
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let n = self.0.len().max(other.0.len());
            (0..n)
                .map(|i| self.exponent(i).cmp(&other.exponent(i)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Coefficient rings usable in [`Poly`].
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Signed
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_u32(v: u32) -> Self;
}

impl Coeff for BigInt {
    fn from_u32(v: u32) -> Self {
        BigInt::from(v)
    }
}

impl Coeff for BigRational {
    fn from_u32(v: u32) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

/// Sparse polynomial: nonzero coefficients keyed by monomial.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn var(i: usize) -> Self {
        Self::term(C::one(), Monomial::var(i))
    }

    pub fn term(c: C, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// Number of variable slots referenced.
    pub fn width(&self) -> usize {
        self.terms.keys().map(Monomial::width).max().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// The constant term, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(C::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Renames variable `i` to `i + offset`.
    pub fn shift_vars(&self, offset: usize) -> Self {
        Self { terms: self.terms.iter().map(|(m, c)| (m.shift(offset), c.clone())).collect() }
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let mut v = m.0.clone();
            v[var] -= 1;
            out.add_term(Monomial::from_exponents(v), c.clone() * C::from_u32(e));
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Evaluates with a caller-supplied numeric type.
    pub fn eval_with<T>(&self, point: &[T], coeff: impl Fn(&C) -> T) -> T
    where
        T: Clone + Zero + Mul<Output = T> + Add<Output = T>,
    {
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            let mut t = coeff(c);
            for (i, &e) in m.exponents().iter().enumerate() {
                for _ in 0..e {
                    t = t * point[i].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Writes the polynomial with variables named by `name`.
    pub fn fmt_with(&self, f: &mut fmt::Formatter<'_>, name: &dyn Fn(usize) -> String) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let vars: Vec<String> = m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { name(i) } else { format!("{}^{}", name(i), e) })
                .collect();
            let unit = mag.is_one();
            let mag_text = mag.to_string();
            // rational magnitudes are parenthesised so `/` binds as written
            let mag_text = if mag_text.contains('/') { format!("({mag_text})") } else { mag_text };
            match (vars.is_empty(), unit) {
                (true, _) => write!(f, "{mag_text}")?,
                (false, true) => write!(f, "{}", vars.join("*"))?,
                (false, false) => write!(f, "{}*{}", mag_text, vars.join("*"))?,
            }
        }
        Ok(())
    }

    pub fn display_with<'a>(&'a self, name: &'a dyn Fn(usize) -> String) -> impl fmt::Display + 'a {
        struct D<'a, C>(&'a Poly<C>, &'a dyn Fn(usize) -> String);
        impl<C: Coeff> fmt::Display for D<'_, C> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_with(f, self.1)
            }
        }
        D(self, name)
    }
}

impl<C: Coeff> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &|i| format!("x{}", i + 1))
    }
}

impl<C: Coeff> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl<C: Coeff> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        out
    }
}

pub type IntPoly = Poly<BigInt>;
pub type RatPoly = Poly<BigRational>;

/// Converts a rational polynomial to integer coefficients, if possible.
pub fn to_integer_poly(p: &RatPoly) -> Option<IntPoly> {
    let mut out = IntPoly::zero();
    for (m, c) in p.terms() {
        if !c.is_integer() {
            return None;
        }
        out.add_term(m.clone(), c.to_integer());
    }
    Some(out)
}

pub fn to_rational_poly(p: &IntPoly) -> RatPoly {
    p.map_coeffs(|c| BigRational::from_integer(c.clone()))
}

/// An integer polynomial with coefficients reduced mod `p^k`, laid out for
/// fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct ModPoly {
    modulus: u64,
    terms: Vec<(u64, Vec<(usize, u32)>)>,
}

impl ModPoly {
    pub fn new(p: &IntPoly, ring: &ResidueRing) -> Self {
        let m = ring.modulus();
        let mb = BigInt::from(m);
        let terms = p
            .terms()
            .filter_map(|(mono, c)| {
                let c = ((c % &mb) + &mb) % &mb;
                let c = c.to_u64().expect("reduced coefficient fits");
                (c != 0).then(|| {
                    let factors = mono
                        .exponents()
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(i, &e)| (i, e))
                        .collect();
                    (c, factors)
                })
            })
            .collect();
        Self { modulus: m, terms }
    }

    #[inline]
    pub fn eval(&self, x: &[u64]) -> u64 {
        let m = self.modulus;
        let mut acc = 0u64;
        for (c, factors) in &self.terms {
            let mut t = *c;
            for &(i, e) in factors {
                for _ in 0..e {
                    t = mul_mod(t, x[i], m);
                }
            }
            acc += t;
            if acc >= m {
                acc -= m;
            }
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Token {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = text[start..i].parse().expect("digits");
            out.push((start, Token::Num(n)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(text[start..i].to_string())));
        } else if "+-*/^(),;:[]".contains(c) {
            out.push((i, Token::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Parse { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

/// Recursive-descent parser for `+ - * / ^`, integer literals, parentheses
/// and named variables. Division is only allowed by nonzero constants.
pub(crate) struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    resolve: &'a dyn Fn(&str) -> Option<usize>,
}

impl<'a> Parser<'a> {
    pub fn new(text: &str, offset: usize, resolve: &'a dyn Fn(&str) -> Option<usize>) -> Result<Self> {
        let tokens = tokenize(text)?
            .into_iter()
            .map(|(p, t)| (p + offset, t))
            .collect();
        Ok(Self { tokens, pos: 0, end: offset + text.len(), resolve })
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    pub fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    pub fn peek_sym(&self, c: char) -> bool {
        self.peek() == Some(&Token::Sym(c))
    }

    pub fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    pub fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.offset(), msg: msg.into() })
    }

    pub fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.peek_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    pub fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    pub fn parse_expr(&mut self) -> Result<RatPoly> {
        let mut acc = self.parse_term()?;
        loop {
            if self.peek_sym('+') {
                self.bump();
                acc = &acc + &self.parse_term()?;
            } else if self.peek_sym('-') {
                self.bump();
                acc = &acc - &self.parse_term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_term(&mut self) -> Result<RatPoly> {
        let mut acc = self.parse_unary()?;
        loop {
            if self.peek_sym('*') {
                self.bump();
                acc = &acc * &self.parse_unary()?;
            } else if self.peek_sym('/') {
                self.bump();
                let at = self.offset();
                let d = self.parse_unary()?;
                match d.as_constant() {
                    Some(c) if !c.is_zero() => acc = acc.scale(&c.recip()),
                    Some(_) => return Err(Error::Parse { pos: at, msg: "division by zero".into() }),
                    None => {
                        return Err(Error::Parse { pos: at, msg: "division by a non-constant".into() })
                    }
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_unary(&mut self) -> Result<RatPoly> {
        if self.peek_sym('-') {
            self.bump();
            return Ok(-&self.parse_unary()?);
        }
        if self.peek_sym('+') {
            self.bump();
            return self.parse_unary();
        }
        self.parse_power()
    }

    pub fn parse_power(&mut self) -> Result<RatPoly> {
        let base = self.parse_atom()?;
        if self.peek_sym('^') {
            self.bump();
            match self.bump() {
                Some(Token::Num(n)) => {
                    let e = n
                        .to_u32()
                        .filter(|e| *e <= 64)
                        .ok_or_else(|| Error::Parse { pos: self.offset(), msg: "exponent too large".into() })?;
                    Ok(base.pow(e))
                }
                _ => {
                    self.pos -= 1;
                    self.err("expected a non-negative integer exponent")
                }
            }
        } else {
            Ok(base)
        }
    }

    fn parse_atom(&mut self) -> Result<RatPoly> {
        let at = self.offset();
        match self.bump() {
            Some(Token::Num(n)) => Ok(RatPoly::constant(BigRational::from_integer(n))),
            Some(Token::Ident(name)) => match (self.resolve)(&name) {
                Some(i) => Ok(RatPoly::var(i)),
                None => Err(Error::Parse { pos: at, msg: format!("unknown variable `{name}`") }),
            },
            Some(Token::Sym('(')) => {
                let inner = self.parse_expr()?;
                self.expect_sym(')')?;
                Ok(inner)
            }
            Some(t) => Err(Error::Parse { pos: at, msg: format!("unexpected token {t:?}") }),
            None => Err(Error::Parse { pos: at, msg: "unexpected end of input".into() }),
        }
    }
}

/// Resolves `x1, x2, ...` (also `y`/`e` prefixes via `prefix`) to 0-based indices.
pub(crate) fn indexed_var(prefix: &str, name: &str) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    let i: usize = rest.parse().ok()?;
    (i >= 1 && !rest.starts_with('0')).then(|| i - 1)
}

/// Parses a polynomial in `x1..xn` with rational coefficients.
pub fn parse_rational_poly(text: &str) -> Result<RatPoly> {
    let resolve = |s: &str| indexed_var("x", s);
    let mut parser = Parser::new(text, 0, &resolve)?;
    let p = parser.parse_expr()?;
    parser.expect_end()?;
    Ok(p)
}

/// Parses a polynomial in `x1..xn` with integer coefficients.
pub fn parse_int_poly(text: &str) -> Result<IntPoly> {
    let p = parse_rational_poly(text)?;
    to_integer_poly(&p).ok_or_else(|| Error::Parse { pos: 0, msg: "coefficients must be integers".into() })
}
