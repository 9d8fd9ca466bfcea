//! Residue rings `Z/p^k`, valuation / angular component, and tuple enumeration.

use std::fmt;
use std::ops::Range;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of tuples a single enumeration may visit.
pub const DEFAULT_BUDGET: u64 = 1 << 40;

/// Fixed chunk length used to split tuple streams. Chunk boundaries depend
/// only on this constant, never on the number of workers.
pub const CHUNK_LEN: u64 = 1 << 14;

/// The finite ring `Z/p^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueRing {
    p: u64,
    k: u32,
    modulus: u64,
}

/// Canonical representative in `[0, p^k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RingElem(u64);

impl RingElem {
    pub fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// p-adic valuation of a ring element; zero gets its own sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(u32),
    Infinity,
}

pub fn make_ring(p: u64, k: u32) -> Result<ResidueRing> {
    ResidueRing::new(p, k)
}

impl ResidueRing {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("level k must be at least 1".into()));
        }
        if !is_prime(p) {
            return Err(Error::CompositeP { p });
        }
        let mut modulus: u64 = 1;
        for _ in 0..k {
            modulus = modulus
                .checked_mul(p)
                .filter(|m| *m < (1u64 << 63))
                .ok_or_else(|| Error::Overflow(format!("{p}^{k} does not fit below 2^63")))?;
        }
        Ok(Self { p, k, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Reduces an arbitrary integer into the ring.
    pub fn elem(&self, v: i128) -> RingElem {
        RingElem(v.rem_euclid(self.modulus as i128) as u64)
    }

    /// Wraps a value that is already canonical.
    pub fn canonical(&self, v: u64) -> Result<RingElem> {
        if v < self.modulus {
            Ok(RingElem(v))
        } else {
            Err(Error::Domain(format!("{v} is not reduced mod {}", self.modulus)))
        }
    }

    pub fn zero(&self) -> RingElem {
        RingElem(0)
    }

    pub fn one(&self) -> RingElem {
        RingElem(1 % self.modulus)
    }

    pub fn add(&self, a: RingElem, b: RingElem) -> RingElem {
        RingElem(add_mod(a.0, b.0, self.modulus))
    }

    pub fn sub(&self, a: RingElem, b: RingElem) -> RingElem {
        RingElem(sub_mod(a.0, b.0, self.modulus))
    }

    pub fn neg(&self, a: RingElem) -> RingElem {
        RingElem(sub_mod(0, a.0, self.modulus))
    }

    pub fn mul(&self, a: RingElem, b: RingElem) -> RingElem {
        RingElem(mul_mod(a.0, b.0, self.modulus))
    }

    pub fn pow(&self, a: RingElem, e: u64) -> RingElem {
        RingElem(pow_mod(a.0, e, self.modulus))
    }

    /// `(val, ac)` with the valuation truncated at `k` and `ac` the leading
    /// unit digit mod p. Zero maps to `(Infinity, 0)`.
    pub fn val_ac(&self, x: RingElem) -> (Valuation, u64) {
        match self.decompose(x) {
            None => (Valuation::Infinity, 0),
            Some((v, u)) => (Valuation::Finite(v), u % self.p),
        }
    }

    /// Writes a nonzero `x` as `p^v * u` with `u` a unit mod `p^(k-v)`.
    pub fn decompose(&self, x: RingElem) -> Option<(u32, u64)> {
        if x.0 == 0 {
            return None;
        }
        let mut v = 0;
        let mut u = x.0;
        while u.is_multiple_of(self.p) {
            u /= self.p;
            v += 1;
        }
        Some((v, u))
    }

    /// Inverse of [`decompose`](Self::decompose).
    pub fn compose(&self, v: u32, u: u64) -> Result<RingElem> {
        if v >= self.k || u.is_multiple_of(self.p) {
            return Err(Error::Domain(format!("({v}, {u}) is not a valuation/unit pair")));
        }
        let scale = self.p.pow(v);
        let unit_mod = self.modulus / scale;
        if u >= unit_mod {
            return Err(Error::Domain(format!("unit {u} not reduced mod {unit_mod}")));
        }
        Ok(RingElem(scale * u))
    }

    /// The exact number `p^(k n)` of n-tuples, as a big integer.
    pub fn tuple_count(&self, n: usize) -> BigUint {
        BigUint::from(self.modulus).pow(n as u32)
    }
}

impl fmt::Display for ResidueRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 1 {
            write!(f, "Z/{}", self.p)
        } else {
            write!(f, "Z/{}^{}", self.p, self.k)
        }
    }
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let (s, carry) = a.overflowing_add(b);
    if carry || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    if m <= 1 << 32 {
        a * b % m
    } else {
        ((a as u128 * b as u128) % m as u128) as u64
    }
}

pub(crate) fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for b in BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    let mm = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    'witness: for a in BASES {
        let mut x = {
            let (mut acc, mut base, mut e) = (1u64, a, d);
            while e > 0 {
                if e & 1 == 1 {
                    acc = mm(acc, base);
                }
                base = mm(base, base);
                e >>= 1;
            }
            acc
        };
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mm(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All n-tuples over a ring, in lexicographic order (first coordinate most
/// significant). Tuple `i` is the base-`p^k` expansion of `i`.
#[derive(Clone, Debug)]
pub struct TupleSpace {
    ring: ResidueRing,
    n: usize,
    len: u64,
}

pub fn enumerate_tuples(ring: ResidueRing, n: usize, budget: u64) -> Result<TupleSpace> {
    TupleSpace::new(ring, n, budget)
}

impl TupleSpace {
    pub fn new(ring: ResidueRing, n: usize, budget: u64) -> Result<Self> {
        let requested = ring.tuple_count(n);
        match u64::try_from(&requested) {
            Ok(len) if len <= budget => Ok(Self { ring, n, len }),
            _ => Err(Error::BudgetExceeded { requested, budget }),
        }
    }

    pub fn ring(&self) -> ResidueRing {
        self.ring
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Disjoint contiguous index ranges of length `CHUNK_LEN` (last may be shorter).
    pub fn chunks(&self) -> impl Iterator<Item = Range<u64>> + '_ {
        let len = self.len;
        (0..len.div_ceil(CHUNK_LEN)).map(move |c| c * CHUNK_LEN..((c + 1) * CHUNK_LEN).min(len))
    }

    pub fn chunk_count(&self) -> u64 {
        self.len.div_ceil(CHUNK_LEN)
    }

    pub fn chunk(&self, c: u64) -> Range<u64> {
        c * CHUNK_LEN..((c + 1) * CHUNK_LEN).min(self.len)
    }

    /// Decodes tuple number `index` into raw residues.
    pub fn tuple_at(&self, index: u64, out: &mut [u64]) {
        let m = self.ring.modulus();
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = rest % m;
            rest /= m;
        }
    }

    /// Calls `f` on every tuple in `range`, reusing one buffer. This is the
    /// allocation-free path for hot loops.
    pub fn visit(&self, range: Range<u64>, mut f: impl FnMut(&[u64])) {
        if range.is_empty() {
            return;
        }
        let m = self.ring.modulus();
        let mut buf = vec![0u64; self.n];
        self.tuple_at(range.start, &mut buf);
        for _ in range {
            f(&buf);
            for slot in buf.iter_mut().rev() {
                *slot += 1;
                if *slot < m {
                    break;
                }
                *slot = 0;
            }
        }
    }

    pub fn iter(&self) -> TupleIter<'_> {
        self.iter_range(0..self.len)
    }

    pub fn iter_range(&self, range: Range<u64>) -> TupleIter<'_> {
        TupleIter { space: self, range }
    }
}

pub struct TupleIter<'a> {
    space: &'a TupleSpace,
    range: Range<u64>,
}

impl Iterator for TupleIter<'_> {
    type Item = Vec<RingElem>;

    fn next(&mut self) -> Option<Self::Item> {
        let i = self.range.next()?;
        let mut raw = vec![0; self.space.n];
        self.space.tuple_at(i, &mut raw);
        Some(raw.into_iter().map(RingElem).collect())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.range.end - self.range.start) as usize;
        (n, Some(n))
    }
}
