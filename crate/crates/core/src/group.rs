//! Target groups `G(Z/p^k)`: additive vector groups and the unipotent
//! upper-triangular group U3, with element indexing and irreducible
//! representations.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::ring::{add_mod, mul_mod, sub_mod, ResidueRing, RingElem};

/// Largest group order for which array-backed count vectors are built.
pub const MAX_GROUP_ORDER: u64 = 1 << 28;

/// Largest supported number of group coordinates.
pub const MAX_DIM: usize = 8;

/// Ring-independent descriptor of a target group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    Additive { dim: usize },
    /// Coordinates `(a, b, c)` stand for `[[1, a, b], [0, 1, c], [0, 0, 1]]`.
    Heisenberg,
}

impl GroupKind {
    pub fn dim(&self) -> usize {
        match self {
            GroupKind::Additive { dim } => *dim,
            GroupKind::Heisenberg => 3,
        }
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self, GroupKind::Additive { .. })
    }

    pub fn code(&self) -> u8 {
        match self {
            GroupKind::Additive { .. } => 0,
            GroupKind::Heisenberg => 1,
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Additive { dim } => write!(f, "additive[{dim}]"),
            GroupKind::Heisenberg => write!(f, "heisenberg"),
        }
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "heisenberg" {
            return Ok(GroupKind::Heisenberg);
        }
        let bad = || Error::Parse { pos: 0, msg: format!("unknown group descriptor `{t}`") };
        let inner = t.strip_prefix("additive[").and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
        let dim: usize = inner.trim().parse().map_err(|_| bad())?;
        if dim == 0 {
            return Err(Error::Parse { pos: 9, msg: "additive dimension must be at least 1".into() });
        }
        Ok(GroupKind::Additive { dim })
    }
}

/// A concrete finite group: kind plus coefficient ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub ring: ResidueRing,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElem {
    pub coords: Vec<RingElem>,
}

impl GroupElem {
    pub fn raw(&self) -> Vec<u64> {
        self.coords.iter().map(|c| c.value()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupOp {
    Mul,
    Inv,
    Id,
}

impl GroupSpec {
    pub fn new(kind: GroupKind, ring: ResidueRing) -> Result<Self> {
        if kind.dim() == 0 || kind.dim() > MAX_DIM {
            return Err(Error::Domain(format!("group dimension must lie in 1..={MAX_DIM}")));
        }
        let spec = Self { kind, ring };
        spec.order_checked()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    fn order_checked(&self) -> Result<u64> {
        let m = self.ring.modulus();
        let mut o: u64 = 1;
        for _ in 0..self.dim() {
            o = o
                .checked_mul(m)
                .filter(|o| *o <= MAX_GROUP_ORDER)
                .ok_or_else(|| Error::Overflow(format!("{self} has more than 2^28 elements")))?;
        }
        Ok(o)
    }

    /// `|G| = p^(k dim)`.
    pub fn order(&self) -> usize {
        self.ring.modulus().pow(self.dim() as u32) as usize
    }

    /// Mixed-radix index, first coordinate most significant.
    #[inline]
    pub fn index_of(&self, coords: &[u64]) -> usize {
        let m = self.ring.modulus();
        coords.iter().fold(0u64, |acc, &c| acc * m + c) as usize
    }

    #[inline]
    pub fn coords_of(&self, index: usize, out: &mut [u64]) {
        let m = self.ring.modulus();
        let mut rest = index as u64;
        for slot in out.iter_mut().rev() {
            *slot = rest % m;
            rest /= m;
        }
    }

    pub fn elem_at(&self, index: usize) -> GroupElem {
        let mut raw = vec![0; self.dim()];
        self.coords_of(index, &mut raw);
        GroupElem { coords: raw.into_iter().map(|v| self.ring.elem(v as i128)).collect() }
    }

    pub fn index(&self, g: &GroupElem) -> usize {
        self.index_of(&g.raw())
    }

    pub fn identity(&self) -> GroupElem {
        GroupElem { coords: vec![self.ring.zero(); self.dim()] }
    }

    pub fn check(&self, g: &GroupElem) -> Result<()> {
        if g.coords.len() != self.dim() {
            return Err(Error::SpecMismatch(format!(
                "element has {} coordinates, {self} needs {}",
                g.coords.len(),
                self.dim()
            )));
        }
        if g.coords.iter().any(|c| c.value() >= self.ring.modulus()) {
            return Err(Error::SpecMismatch(format!("element not reduced for {self}")));
        }
        Ok(())
    }

    /// Group law on raw coordinates.
    #[inline]
    pub fn mul_raw(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let m = self.ring.modulus();
        match self.kind {
            GroupKind::Additive { .. } => {
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    *o = add_mod(*x, *y, m);
                }
            }
            GroupKind::Heisenberg => {
                out[0] = add_mod(a[0], b[0], m);
                out[1] = add_mod(add_mod(a[1], b[1], m), mul_mod(a[0], b[2], m), m);
                out[2] = add_mod(a[2], b[2], m);
            }
        }
    }

    #[inline]
    pub fn inv_raw(&self, a: &[u64], out: &mut [u64]) {
        let m = self.ring.modulus();
        match self.kind {
            GroupKind::Additive { .. } => {
                for (o, x) in out.iter_mut().zip(a) {
                    *o = sub_mod(0, *x, m);
                }
            }
            GroupKind::Heisenberg => {
                // (a, b, c)^-1 = (-a, ac - b, -c)
                out[0] = sub_mod(0, a[0], m);
                out[1] = sub_mod(mul_mod(a[0], a[2], m), a[1], m);
                out[2] = sub_mod(0, a[2], m);
            }
        }
    }

    pub fn mul(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        let mut out = vec![0; self.dim()];
        self.mul_raw(&a.raw(), &b.raw(), &mut out);
        GroupElem { coords: out.into_iter().map(|v| self.ring.elem(v as i128)).collect() }
    }

    pub fn inv(&self, a: &GroupElem) -> GroupElem {
        let mut out = vec![0; self.dim()];
        self.inv_raw(&a.raw(), &mut out);
        GroupElem { coords: out.into_iter().map(|v| self.ring.elem(v as i128)).collect() }
    }

    /// Precomputed coordinate table for index arithmetic in tight loops.
    pub fn table(&self) -> GroupTable {
        GroupTable::new(*self)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind, self.ring)
    }
}

pub fn group_op(spec: &GroupSpec, a: &GroupElem, b: &GroupElem, mode: GroupOp) -> Result<GroupElem> {
    match mode {
        GroupOp::Id => Ok(spec.identity()),
        GroupOp::Inv => {
            spec.check(a)?;
            Ok(spec.inv(a))
        }
        GroupOp::Mul => {
            spec.check(a)?;
            spec.check(b)?;
            Ok(spec.mul(a, b))
        }
    }
}

/// Coordinates of every element, flattened, for fast index arithmetic.
#[derive(Clone, Debug)]
pub struct GroupTable {
    spec: GroupSpec,
    coords: Vec<u64>,
}

impl GroupTable {
    fn new(spec: GroupSpec) -> Self {
        let d = spec.dim();
        let order = spec.order();
        let mut coords = vec![0; order * d];
        for (i, chunk) in coords.chunks_mut(d).enumerate() {
            spec.coords_of(i, chunk);
        }
        Self { spec, coords }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    #[inline]
    pub fn coords(&self, i: usize) -> &[u64] {
        let d = self.spec.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        let mut buf = [0u64; MAX_DIM];
        let d = self.spec.dim();
        self.spec.mul_raw(self.coords(a), self.coords(b), &mut buf[..d]);
        self.spec.index_of(&buf[..d])
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        let mut buf = [0u64; MAX_DIM];
        let d = self.spec.dim();
        self.spec.inv_raw(self.coords(a), &mut buf[..d]);
        self.spec.index_of(&buf[..d])
    }

    /// Index of `a^-1 * s`.
    #[inline]
    pub fn left_div(&self, a: usize, s: usize) -> usize {
        let m = self.spec.ring.modulus();
        let (x, y) = (self.coords(a), self.coords(s));
        match self.spec.kind {
            GroupKind::Additive { dim: 1 } => sub_mod(y[0], x[0], m) as usize,
            GroupKind::Additive { .. } => {
                x.iter().zip(y).fold(0u64, |acc, (xa, ya)| acc * m + sub_mod(*ya, *xa, m)) as usize
            }
            GroupKind::Heisenberg => {
                // (a,b,c)^-1 (a',b',c') = (a'-a, b'-b-a(c'-c), c'-c)
                let dc = sub_mod(y[2], x[2], m);
                let da = sub_mod(y[0], x[0], m);
                let db = sub_mod(sub_mod(y[1], x[1], m), mul_mod(x[0], dc, m), m);
                ((da * m + db) * m + dc) as usize
            }
        }
    }
}

/// Exact group convolution `out[s] = sum_g a[g] * b[g^-1 s]` in 128-bit
/// arithmetic. Fails if the result could overflow.
pub fn convolve_raw(table: &GroupTable, a: &[u128], b: &[u128]) -> Result<Vec<u128>> {
    use rayon::prelude::*;
    let n = table.spec().order();
    if a.len() != n || b.len() != n {
        return Err(Error::SpecMismatch("vector length differs from group order".into()));
    }
    let mass_a = a.iter().try_fold(0u128, |acc, v| acc.checked_add(*v));
    let max_b = b.iter().copied().max().unwrap_or(0);
    mass_a
        .and_then(|m| m.checked_mul(max_b))
        .ok_or_else(|| Error::Overflow("convolution exceeds 128-bit accumulators".into()))?;
    let support: Vec<(usize, u128)> = a.iter().enumerate().filter(|(_, v)| **v != 0).map(|(i, v)| (i, *v)).collect();
    let out = (0..n)
        .into_par_iter()
        .with_min_len(64)
        .map(|s| support.iter().map(|&(g, w)| w * b[table.left_div(g, s)]).sum::<u128>())
        .collect();
    Ok(out)
}

/// One irreducible unitary representation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Irrep {
    /// `x -> exp(2 pi i <xi, x> / p^k)` on an additive group.
    Character { xi: Vec<u64> },
    /// One-dimensional character of U3(Z/p) factoring through `(a, c)`.
    HeisenbergCharacter { alpha: u64, gamma: u64 },
    /// p-dimensional Schroedinger model with central character `lambda != 0`:
    /// `(pi(a,b,c) f)(x) = w^(lambda (b + c x)) f(x + a)`.
    Schroedinger { lambda: u64 },
}

/// Complete set of irreducible representations of a catalog group.
#[derive(Clone, Debug)]
pub struct IrrepTable {
    spec: GroupSpec,
    reps: Vec<Irrep>,
    roots: Vec<Complex64>,
}

pub fn irreps(spec: &GroupSpec) -> Result<IrrepTable> {
    IrrepTable::new(spec)
}

impl IrrepTable {
    pub fn new(spec: &GroupSpec) -> Result<Self> {
        let m = spec.ring.modulus();
        let reps = match spec.kind {
            GroupKind::Additive { .. } => (0..spec.order())
                .map(|i| {
                    let mut xi = vec![0; spec.dim()];
                    spec.coords_of(i, &mut xi);
                    Irrep::Character { xi }
                })
                .collect(),
            GroupKind::Heisenberg => {
                if spec.ring.k() != 1 {
                    return Err(Error::UnsupportedLevel(format!(
                        "Heisenberg representations are only built over Z/p, not {}",
                        spec.ring
                    )));
                }
                let p = spec.ring.p();
                let mut reps: Vec<Irrep> = (0..p)
                    .flat_map(|alpha| (0..p).map(move |gamma| Irrep::HeisenbergCharacter { alpha, gamma }))
                    .collect();
                reps.extend((1..p).map(|lambda| Irrep::Schroedinger { lambda }));
                reps
            }
        };
        // roots of unity from exact angles
        let roots = (0..m).map(|a| Complex64::from_polar(1.0, 2.0 * PI * (a as f64) / (m as f64))).collect();
        Ok(Self { spec: *spec, reps, roots })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn reps(&self) -> &[Irrep] {
        &self.reps
    }

    pub fn dim(&self, i: usize) -> usize {
        match &self.reps[i] {
            Irrep::Schroedinger { .. } => self.spec.ring.p() as usize,
            _ => 1,
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        (0..self.len()).map(|i| self.dim(i)).collect()
    }

    /// `pi_i(g)` for raw coordinates `g`.
    pub fn matrix(&self, i: usize, g: &[u64]) -> CMatrix {
        let m = self.spec.ring.modulus();
        match &self.reps[i] {
            Irrep::Character { xi } => {
                let phase = xi.iter().zip(g).fold(0u64, |acc, (a, b)| add_mod(acc, mul_mod(*a, *b, m), m));
                CMatrix::scalar(self.roots[phase as usize])
            }
            Irrep::HeisenbergCharacter { alpha, gamma } => {
                let phase = add_mod(mul_mod(*alpha, g[0], m), mul_mod(*gamma, g[2], m), m);
                CMatrix::scalar(self.roots[phase as usize])
            }
            Irrep::Schroedinger { lambda } => {
                let (a, b, c) = (g[0], g[1], g[2]);
                let mut out = CMatrix::zeros(m as usize);
                for x in 0..m {
                    let y = add_mod(x, a, m);
                    let phase = mul_mod(*lambda, add_mod(b, mul_mod(c, x, m), m), m);
                    out[(x as usize, y as usize)] = self.roots[phase as usize];
                }
                out
            }
        }
    }

    /// `pi_i(g)` for every element, in index order.
    pub fn matrices(&self, i: usize) -> Vec<CMatrix> {
        let mut buf = vec![0; self.spec.dim()];
        (0..self.spec.order())
            .map(|g| {
                self.spec.coords_of(g, &mut buf);
                self.matrix(i, &buf)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::make_ring;

    fn spec(kind: &str, p: u64, k: u32) -> GroupSpec {
        GroupSpec::new(kind.parse().unwrap(), make_ring(p, k).unwrap()).unwrap()
    }

    fn elem(s: &GroupSpec, v: &[i128]) -> GroupElem {
        GroupElem { coords: v.iter().map(|x| s.ring.elem(*x)).collect() }
    }

    #[test]
    fn group_op_examples() {
        let a2 = spec("additive[2]", 5, 1);
        let r = group_op(&a2, &elem(&a2, &[1, 2]), &elem(&a2, &[3, 4]), GroupOp::Mul).unwrap();
        assert_eq!(r.raw(), vec![4, 1]);

        let h3 = spec("heisenberg", 3, 1);
        let r = group_op(&h3, &elem(&h3, &[1, 0, 0]), &elem(&h3, &[0, 0, 1]), GroupOp::Mul).unwrap();
        assert_eq!(r.raw(), vec![1, 1, 1]);

        let h5 = spec("heisenberg", 5, 1);
        let g = elem(&h5, &[1, 0, 2]);
        let gi = group_op(&h5, &g, &g, GroupOp::Inv).unwrap();
        assert_eq!(gi.raw(), vec![4, 2, 3]);
        assert_eq!(h5.mul(&g, &gi), h5.identity());
        assert_eq!(group_op(&h5, &g, &g, GroupOp::Id).unwrap().raw(), vec![0, 0, 0]);

        let bad = elem(&a2, &[1, 2, 3]);
        assert!(matches!(group_op(&a2, &bad, &bad, GroupOp::Mul), Err(Error::SpecMismatch(_))));
    }

    #[test]
    fn descriptors_parse_and_print() {
        assert_eq!("additive[3]".parse::<GroupKind>().unwrap(), GroupKind::Additive { dim: 3 });
        assert_eq!("heisenberg".parse::<GroupKind>().unwrap().to_string(), "heisenberg");
        assert!("additive[0]".parse::<GroupKind>().is_err());
        assert!("torus".parse::<GroupKind>().is_err());
    }

    /// Multiplies 3x3 unipotent matrices directly.
    fn matrix_product(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
        let to = |v: &[u64]| [[1, v[0], v[1]], [0, 1, v[2]], [0, 0, 1]];
        let (x, y) = (to(a), to(b));
        let mut z = [[0u64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                z[i][j] = (0..3).map(|l| x[i][l] * y[l][j]).sum::<u64>() % m;
            }
        }
        vec![z[0][1], z[0][2], z[1][2]]
    }

    #[test]
    fn heisenberg_law_is_matrix_multiplication() {
        let h = spec("heisenberg", 3, 2);
        let t = h.table();
        for a in 0..h.order() {
            for b in (0..h.order()).step_by(7) {
                let expect = matrix_product(t.coords(a), t.coords(b), 9);
                assert_eq!(t.coords(t.mul(a, b)), expect.as_slice());
            }
        }
    }

    #[test]
    fn group_axioms_exhaustive() {
        for s in [spec("heisenberg", 3, 1), spec("additive[2]", 3, 1), spec("additive[1]", 2, 3)] {
            let t = s.table();
            let n = s.order();
            let e = s.index(&s.identity());
            for a in 0..n {
                assert_eq!(t.mul(a, e), a);
                assert_eq!(t.mul(e, a), a);
                assert_eq!(t.mul(a, t.inv(a)), e);
                assert_eq!(t.mul(t.inv(a), a), e);
                for b in 0..n {
                    assert_eq!(t.left_div(a, t.mul(a, b)), b);
                    for c in 0..n {
                        assert_eq!(t.mul(t.mul(a, b), c), t.mul(a, t.mul(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn associativity_sampled_on_larger_group() {
        let s = spec("heisenberg", 7, 2);
        let t = s.table();
        let n = s.order() as u64;
        let mut x: u64 = 12345;
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 33) % n) as usize
        };
        for _ in 0..100_000 {
            let (a, b, c) = (next(), next(), next());
            assert_eq!(t.mul(t.mul(a, b), c), t.mul(a, t.mul(b, c)));
        }
    }

    #[test]
    fn irrep_counts() {
        let a = irreps(&spec("additive[1]", 2, 1)).unwrap();
        assert_eq!(a.len(), 2);
        assert!((a.matrix(1, &[1])[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);

        let h = irreps(&spec("heisenberg", 3, 1)).unwrap();
        let dims = h.dims();
        assert_eq!(dims.iter().filter(|d| **d == 1).count(), 9);
        assert_eq!(dims.iter().filter(|d| **d == 3).count(), 2);
        assert_eq!(dims.iter().map(|d| d * d).sum::<usize>(), 27);

        assert!(matches!(irreps(&spec("heisenberg", 3, 2)), Err(Error::UnsupportedLevel(_))));
    }

    /// Brute-force Schur orthogonality: (1/|G|) sum_g pi_ij(g) conj(rho_kl(g))
    /// = delta_{pi rho} delta_ik delta_jl / d_pi.
    fn check_orthogonality(s: &GroupSpec) {
        let table = irreps(s).unwrap();
        let n = s.order();
        assert_eq!(table.dims().iter().map(|d| d * d).sum::<usize>(), n);
        let mats: Vec<Vec<CMatrix>> = (0..table.len()).map(|i| table.matrices(i)).collect();
        let gt = s.table();
        for (i, mi) in mats.iter().enumerate() {
            // unitary and multiplicative
            for g in 0..n {
                let u = &mi[g] * &mi[g].adjoint();
                assert!((&u - &CMatrix::identity(table.dim(i))).max_abs() < 1e-10);
            }
            for g in (0..n).step_by(3) {
                for h in (0..n).step_by(5) {
                    let lhs = &mi[g] * &mi[h];
                    assert!((&lhs - &mi[gt.mul(g, h)]).max_abs() < 1e-10);
                }
            }
            for (j, mj) in mats.iter().enumerate() {
                let (di, dj) = (table.dim(i), table.dim(j));
                for a in 0..di * di {
                    for b in 0..dj * dj {
                        let sum: Complex64 =
                            (0..n).map(|g| mi[g].as_slice()[a] * mj[g].as_slice()[b].conj()).sum::<Complex64>() / n as f64;
                        let expect = if i == j && a == b { 1.0 / di as f64 } else { 0.0 };
                        assert!((sum - expect).norm() < 1e-9, "irreps {i},{j} entries {a},{b}: {sum}");
                    }
                }
            }
        }
    }

    #[test]
    fn schur_orthogonality() {
        check_orthogonality(&spec("heisenberg", 3, 1));
        check_orthogonality(&spec("heisenberg", 2, 1));
        check_orthogonality(&spec("heisenberg", 5, 1));
        check_orthogonality(&spec("additive[2]", 3, 1));
        check_orthogonality(&spec("additive[1]", 3, 3));
    }

    #[test]
    fn center_acts_by_scalars() {
        let s = spec("heisenberg", 5, 1);
        let table = irreps(&s).unwrap();
        for i in 0..table.len() {
            for b in 0..5 {
                let m = table.matrix(i, &[0, b, 0]);
                let d = table.dim(i);
                let scalar = m[(0, 0)];
                assert!((&m - &CMatrix::identity(d).scale(scalar)).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn convolve_raw_matches_definition() {
        let s = spec("heisenberg", 3, 1);
        let t = s.table();
        let a: Vec<u128> = (0..27).map(|i| (i * 7 % 5) as u128).collect();
        let b: Vec<u128> = (0..27).map(|i| (i * 3 % 4) as u128).collect();
        let fast = convolve_raw(&t, &a, &b).unwrap();
        let mut slow = vec![0u128; 27];
        for g in 0..27 {
            for h in 0..27 {
                slow[t.mul(g, h)] += a[g] * b[h];
            }
        }
        assert_eq!(fast, slow);
        let huge = vec![u128::MAX / 2; 27];
        assert!(matches!(convolve_raw(&t, &huge, &huge), Err(Error::Overflow(_))));
    }
}
