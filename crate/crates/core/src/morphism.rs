//! Polynomial maps from affine space into a catalog group.
//!
//! A map is one integer polynomial per target coordinate. Convolution of two
//! maps multiplies their values in the target group, with the second map's
//! variables renamed past the first's: `(f * g)(x, y) = f(x) . g(y)`.

use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupElem, GroupKind, GroupSpec};
use crate::poly::{indexed_var, to_integer_poly, IntPoly, ModPoly, Monomial, Parser};
use crate::ring::{mul_mod, pow_mod, sub_mod, ResidueRing, RingElem};

#[derive(Clone, Debug)]
pub struct PolyMap {
    n_inputs: usize,
    target: GroupKind,
    coords: Vec<IntPoly>,
    label: String,
}

/// Equality ignores the provenance label.
impl PartialEq for PolyMap {
    fn eq(&self, other: &Self) -> bool {
        self.n_inputs == other.n_inputs && self.target == other.target && self.coords == other.coords
    }
}

impl Eq for PolyMap {}

impl PolyMap {
    /// `n_inputs` defaults to the highest variable used (at least 1).
    pub fn new(target: GroupKind, coords: Vec<IntPoly>, n_inputs: Option<usize>, label: impl Into<String>) -> Result<Self> {
        if coords.len() != target.dim() {
            return Err(Error::Arity { expected: target.dim(), got: coords.len() });
        }
        let used = coords.iter().map(IntPoly::width).max().unwrap_or(0);
        let n_inputs = match n_inputs {
            Some(n) if n < used => {
                return Err(Error::Domain(format!("map uses x{used} but declares {n} inputs")));
            }
            Some(n) => n,
            None => used,
        }
        .max(1);
        Ok(Self { n_inputs, target, coords, label: label.into() })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn target(&self) -> GroupKind {
        self.target
    }

    pub fn coords(&self) -> &[IntPoly] {
        &self.coords
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn compile(&self, ring: &ResidueRing) -> Result<CompiledMap> {
        let spec = GroupSpec::new(self.target, *ring)?;
        Ok(CompiledMap { spec, n_inputs: self.n_inputs, coords: self.coords.iter().map(|p| ModPoly::new(p, ring)).collect() })
    }

    /// Canonical text, re-readable by [`parse_map`].
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let used = self.coords.iter().map(IntPoly::width).max().unwrap_or(0).max(1);
        write!(f, "{}", self.target)?;
        if self.n_inputs != used {
            write!(f, " (n={})", self.n_inputs)?;
        }
        write!(f, ": ")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Parses `<target> [(n=N)] : <poly> (, <poly>)*`.
pub fn parse_map(text: &str) -> Result<PolyMap> {
    let colon = text.find(':').ok_or(Error::Parse { pos: text.len(), msg: "expected `:` after the target".into() })?;
    let head = &text[..colon];
    let (target_text, declared) = match head.find('(') {
        Some(open) => {
            let close = head.rfind(')').ok_or(Error::Parse { pos: open, msg: "unclosed `(`".into() })?;
            let inner = head[open + 1..close].trim();
            let n: usize = inner
                .strip_prefix("n=")
                .and_then(|v| v.trim().parse().ok())
                .ok_or(Error::Parse { pos: open + 1, msg: "expected `n=<inputs>`".into() })?;
            (&head[..open], Some(n))
        }
        None => (head, None),
    };
    let target: GroupKind = target_text.parse().map_err(|e| match e {
        Error::Parse { msg, .. } => Error::Parse { pos: 0, msg },
        other => other,
    })?;

    let resolve = |s: &str| indexed_var("x", s);
    let body = &text[colon + 1..];
    let mut coords = Vec::new();
    let mut start = 0;
    for piece in body.split(',') {
        let offset = colon + 1 + start;
        let mut parser = Parser::new(piece, offset, &resolve)?;
        if parser.at_end() {
            return parser.err("empty coordinate polynomial");
        }
        let p = parser.parse_expr()?;
        parser.expect_end()?;
        let p = to_integer_poly(&p).ok_or(Error::Parse { pos: offset, msg: "coefficients must be integers".into() })?;
        coords.push(p);
        start += piece.len() + 1;
    }
    PolyMap::new(target, coords, declared, text.trim())
}

pub fn convolve_maps(f: &PolyMap, g: &PolyMap) -> Result<PolyMap> {
    if f.target != g.target {
        return Err(Error::TargetMismatch(f.target.to_string(), g.target.to_string()));
    }
    let shift = f.n_inputs;
    let gs: Vec<IntPoly> = g.coords.iter().map(|p| p.shift_vars(shift)).collect();
    let coords = match f.target {
        GroupKind::Additive { .. } => f.coords.iter().zip(&gs).map(|(a, b)| a + b).collect(),
        GroupKind::Heisenberg => {
            let (a1, b1, c1) = (&f.coords[0], &f.coords[1], &f.coords[2]);
            let (a2, b2, c2) = (&gs[0], &gs[1], &gs[2]);
            vec![a1 + a2, &(b1 + b2) + &(a1 * c2), c1 + c2]
        }
    };
    PolyMap::new(f.target, coords, Some(f.n_inputs + g.n_inputs), format!("({})*({})", f.label, g.label))
}

/// `f^{*n}` for `n >= 1`.
pub fn convolution_power(f: &PolyMap, n: usize) -> Result<PolyMap> {
    if n == 0 {
        return Err(Error::Domain("convolution power must be at least 1".into()));
    }
    let mut acc = f.clone();
    for _ in 1..n {
        acc = convolve_maps(&acc, f)?;
    }
    Ok(acc.with_label(format!("({})^*{n}", f.label)))
}

pub fn evaluate_map(f: &PolyMap, point: &[RingElem], ring: &ResidueRing) -> Result<GroupElem> {
    if point.len() != f.n_inputs {
        return Err(Error::Arity { expected: f.n_inputs, got: point.len() });
    }
    let raw: Vec<u64> = point.iter().map(|e| e.value()).collect();
    let compiled = f.compile(ring)?;
    let mut out = vec![0; f.target.dim()];
    compiled.eval_into(&raw, &mut out);
    Ok(GroupElem { coords: out.into_iter().map(|v| ring.elem(v as i128)).collect() })
}

/// A map with coefficients reduced mod `p^k`, ready for enumeration loops.
#[derive(Clone, Debug)]
pub struct CompiledMap {
    spec: GroupSpec,
    n_inputs: usize,
    coords: Vec<ModPoly>,
}

impl CompiledMap {
    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    #[inline]
    pub fn eval_into(&self, x: &[u64], out: &mut [u64]) {
        for (o, p) in out.iter_mut().zip(&self.coords) {
            *o = p.eval(x);
        }
    }

    /// Group-element index of `f(x)`.
    #[inline]
    pub fn eval_index(&self, x: &[u64]) -> usize {
        let m = self.spec.ring.modulus();
        self.coords.iter().fold(0u64, |acc, p| acc * m + p.eval(x)) as usize
    }
}

/// Named maps used throughout the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Builtin {
    /// `x -> x^n` into `additive[1]`.
    Power(u32),
    /// `(x1^2, (x1 x2)^2, ..., (x1 xm)^2)` into `additive[m]`.
    Tightness(usize),
    /// `(x1 - 1, x1 x3, x2)` into U3.
    HeisenbergEx,
}

impl Builtin {
    pub fn build(self) -> Result<PolyMap> {
        let x = |i: usize| IntPoly::var(i);
        match self {
            Builtin::Power(n) => {
                if n == 0 {
                    return Err(Error::Domain("power map needs n >= 1".into()));
                }
                PolyMap::new(GroupKind::Additive { dim: 1 }, vec![x(0).pow(n)], None, format!("power:{n}"))
            }
            Builtin::Tightness(m) => {
                if m == 0 {
                    return Err(Error::Domain("tightness map needs m >= 1".into()));
                }
                let mut coords = vec![x(0).pow(2)];
                coords.extend((1..m).map(|i| (&x(0) * &x(i)).pow(2)));
                PolyMap::new(GroupKind::Additive { dim: m }, coords, None, format!("tightness:{m}"))
            }
            Builtin::HeisenbergEx => {
                let one = IntPoly::constant(BigInt::from(1));
                PolyMap::new(GroupKind::Heisenberg, vec![&x(0) - &one, &x(0) * &x(2), x(1)], None, "heisenberg_ex")
            }
        }
    }
}

/// Looks up a catalog map by name and optional integer parameter.
pub fn builtin_catalog(name: &str, param: Option<u32>) -> Result<PolyMap> {
    let need = |what: &str| Error::Domain(format!("`{name}` needs a parameter {what}"));
    let b = match name {
        "power" => Builtin::Power(param.ok_or_else(|| need("n"))?),
        "tightness" => Builtin::Tightness(param.ok_or_else(|| need("m"))? as usize),
        "heisenberg_ex" => Builtin::HeisenbergEx,
        other => return Err(Error::UnknownName(other.to_string())),
    };
    b.build()
}

/// Resolves either `name[:param]` from the catalog or a map-language string.
pub fn resolve_map(text: &str) -> Result<PolyMap> {
    let t = text.trim();
    if t.contains(':') && (t.starts_with("additive") || t.starts_with("heisenberg:") || t.starts_with("heisenberg ")) {
        return parse_map(t);
    }
    let (name, param) = match t.split_once(':') {
        Some((n, p)) => {
            let v = p.trim().parse().map_err(|_| Error::Parse { pos: n.len() + 1, msg: "catalog parameter must be an integer".into() })?;
            (n.trim(), Some(v))
        }
        None => (t, None),
    };
    builtin_catalog(name, param)
}

/// The constant map onto the identity, with one dummy input.
pub fn identity_map(target: GroupKind) -> PolyMap {
    PolyMap::new(target, vec![IntPoly::zero(); target.dim()], Some(1), "identity").expect("arity matches")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankProbe {
    /// Largest rank seen over the sampled points: a certified lower bound on
    /// the generic rank, witnessed by `witness`.
    pub generic_rank: usize,
    pub witness: Vec<u64>,
    pub trials: usize,
    /// Ranks at caller-supplied points.
    pub at_points: Vec<(Vec<u64>, usize)>,
}

/// Formal Jacobian, one row per target coordinate.
pub fn jacobian(f: &PolyMap) -> Vec<Vec<IntPoly>> {
    f.coords.iter().map(|p| (0..f.n_inputs).map(|j| p.derivative(j)).collect()).collect()
}

/// Rank of the Jacobian reduced mod p at random and given points.
pub fn jacobian_rank_probe(f: &PolyMap, ring: &ResidueRing, trials: usize, seed: u64, points: &[Vec<u64>]) -> Result<RankProbe> {
    if ring.k() != 1 {
        return Err(Error::UnsupportedLevel(format!("rank probe works over Z/p, got {ring}")));
    }
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let jac: Vec<Vec<ModPoly>> =
        jacobian(f).iter().map(|row| row.iter().map(|p| ModPoly::new(p, ring)).collect()).collect();
    let rank_at = |x: &[u64]| -> usize {
        let mut m: Vec<Vec<u64>> = jac.iter().map(|row| row.iter().map(|p| p.eval(x)).collect()).collect();
        rank_mod_p(&mut m, ring.p())
    };
    for pt in points {
        if pt.len() != f.n_inputs {
            return Err(Error::Arity { expected: f.n_inputs, got: pt.len() });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (0, vec![0; f.n_inputs]);
    let mut first = true;
    for _ in 0..trials {
        let x: Vec<u64> = (0..f.n_inputs).map(|_| rng.random_range(0..ring.p())).collect();
        let r = rank_at(&x);
        if first || r > best.0 {
            best = (r, x);
            first = false;
        }
    }
    let at_points = points.iter().map(|pt| {
        let reduced: Vec<u64> = pt.iter().map(|v| v % ring.p()).collect();
        (pt.clone(), rank_at(&reduced))
    });
    Ok(RankProbe { generic_rank: best.0, witness: best.1, trials, at_points: at_points.collect() })
}

/// Row-reduces in place over `Z/p` and returns the rank.
pub fn rank_mod_p(m: &mut [Vec<u64>], p: u64) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !m[r][c].is_multiple_of(p)) else { continue };
        m.swap(rank, pivot);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for v in m[rank].iter_mut() {
            *v = mul_mod(*v, inv, p);
        }
        for r in 0..rows {
            if r != rank && m[r][c] != 0 {
                let factor = m[r][c];
                for j in 0..cols {
                    let sub = mul_mod(factor, m[rank][j], p);
                    m[r][j] = sub_mod(m[r][j], sub, p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// A random map for property tests: small coefficients and degrees.
pub fn random_map(rng: &mut impl Rng, target: GroupKind, n_inputs: usize, max_terms: usize, max_deg: u32) -> PolyMap {
    let coords = (0..target.dim())
        .map(|_| {
            let mut p = IntPoly::zero();
            for _ in 0..rng.random_range(0..=max_terms) {
                let exps: Vec<u32> = (0..n_inputs).map(|_| rng.random_range(0..=max_deg)).collect();
                p.add_term(Monomial::from_exponents(exps), BigInt::from(rng.random_range(-4i64..=4)));
            }
            p
        })
        .collect();
    PolyMap::new(target, coords, Some(n_inputs), "random").expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupOp;
    use crate::ring::{enumerate_tuples, make_ring, DEFAULT_BUDGET};

    fn raw(ring: &ResidueRing, v: &[i128]) -> Vec<RingElem> {
        v.iter().map(|x| ring.elem(*x)).collect()
    }

    #[test]
    fn parse_map_examples() {
        let f = parse_map("additive[1]: x1^2").unwrap();
        assert_eq!(f, Builtin::Power(2).build().unwrap());
        assert_eq!(f.n_inputs(), 1);

        let h = parse_map("heisenberg: x1-1, x1*x3, x2").unwrap();
        assert_eq!(h, Builtin::HeisenbergEx.build().unwrap());
        assert_eq!(h.n_inputs(), 3);

        assert!(matches!(parse_map("additive[2]: x1^2"), Err(Error::Arity { expected: 2, got: 1 })));
        assert!(matches!(parse_map("heisenberg x1"), Err(Error::Parse { .. })));
        match parse_map("additive[1]: x1 + + ") {
            Err(Error::Parse { pos, .. }) => assert!(pos >= 18, "{pos}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_map("additive[1]: x1/2"), Err(Error::Parse { .. })));
    }

    #[test]
    fn catalog_entries() {
        assert_eq!(builtin_catalog("power", Some(2)).unwrap().to_string(), "additive[1]: x1^2");
        assert_eq!(builtin_catalog("tightness", Some(2)).unwrap().to_string(), "additive[2]: x1^2, x1^2*x2^2");
        assert_eq!(builtin_catalog("heisenberg_ex", None).unwrap().to_string(), "heisenberg: -1 + x1, x1*x3, x2");
        assert!(matches!(builtin_catalog("cubic", None), Err(Error::UnknownName(_))));
        assert_eq!(resolve_map("power:3").unwrap(), Builtin::Power(3).build().unwrap());
        assert_eq!(resolve_map("heisenberg: x1, 0, 0").unwrap().n_inputs(), 1);
    }

    #[test]
    fn convolution_examples() {
        let sq = Builtin::Power(2).build().unwrap();
        assert_eq!(convolve_maps(&sq, &sq).unwrap().to_string(), "additive[1]: x2^2 + x1^2");

        let phi = Builtin::HeisenbergEx.build().unwrap();
        let phi2 = convolve_maps(&phi, &phi).unwrap();
        assert_eq!(phi2.n_inputs(), 6);
        // b-coordinate x1 x3 + y1 y3 + (x1 - 1) y2 with y = (x4, x5, x6)
        let expect = crate::poly::parse_int_poly("x1*x3 + x4*x6 + (x1 - 1)*x5").unwrap();
        assert_eq!(phi2.coords()[1], expect);
        assert_eq!(phi2.coords()[0], crate::poly::parse_int_poly("x1 + x4 - 2").unwrap());

        let e = identity_map(GroupKind::Heisenberg);
        let pe = convolve_maps(&phi, &e).unwrap();
        assert_eq!(pe.n_inputs(), 4);
        assert_eq!(pe.coords(), phi.coords());
        assert!(matches!(convolve_maps(&phi, &sq), Err(Error::TargetMismatch(..))));
    }

    #[test]
    fn evaluation_examples() {
        let z5 = make_ring(5, 1).unwrap();
        let phi = Builtin::HeisenbergEx.build().unwrap();
        assert_eq!(evaluate_map(&phi, &raw(&z5, &[1, 0, 0]), &z5).unwrap().raw(), vec![0, 0, 0]);
        for c in 0..5 {
            assert_eq!(evaluate_map(&phi, &raw(&z5, &[0, c, 0]), &z5).unwrap().raw(), vec![4, 0, c as u64]);
        }
        let sq = Builtin::Power(2).build().unwrap();
        assert_eq!(evaluate_map(&sq, &raw(&z5, &[3]), &z5).unwrap().raw(), vec![4]);
        assert!(matches!(evaluate_map(&sq, &raw(&z5, &[1, 2]), &z5), Err(Error::Arity { .. })));
    }

    #[test]
    fn convolution_evaluates_as_group_product_exhaustively() {
        let pairs = [
            (Builtin::HeisenbergEx.build().unwrap(), Builtin::HeisenbergEx.build().unwrap(), make_ring(3, 1).unwrap()),
            (Builtin::Tightness(2).build().unwrap(), Builtin::Tightness(2).build().unwrap(), make_ring(2, 2).unwrap()),
            (Builtin::Power(3).build().unwrap(), Builtin::Power(2).build().unwrap(), make_ring(3, 2).unwrap()),
        ];
        for (f, g, ring) in pairs {
            let fg = convolve_maps(&f, &g).unwrap();
            let spec = GroupSpec::new(f.target(), ring).unwrap();
            let space = enumerate_tuples(ring, fg.n_inputs(), DEFAULT_BUDGET).unwrap();
            assert!(space.len() <= 1_000_000);
            for pt in space.iter() {
                let (x, y) = pt.split_at(f.n_inputs());
                let lhs = evaluate_map(&fg, &pt, &ring).unwrap();
                let fx = evaluate_map(&f, x, &ring).unwrap();
                let gy = evaluate_map(&g, y, &ring).unwrap();
                assert_eq!(lhs, crate::group::group_op(&spec, &fx, &gy, GroupOp::Mul).unwrap());
            }
        }
    }

    #[test]
    fn convolution_is_associative_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ring = make_ring(5, 2).unwrap();
        for target in [GroupKind::Heisenberg, GroupKind::Additive { dim: 2 }] {
            let f = random_map(&mut rng, target, 2, 3, 2);
            let g = random_map(&mut rng, target, 1, 3, 2);
            let h = random_map(&mut rng, target, 2, 3, 2);
            let left = convolve_maps(&convolve_maps(&f, &g).unwrap(), &h).unwrap();
            let right = convolve_maps(&f, &convolve_maps(&g, &h).unwrap()).unwrap();
            assert_eq!(left, right);
            for _ in 0..200 {
                let pt: Vec<RingElem> = (0..5).map(|_| ring.elem(rng.random_range(0..25))).collect();
                assert_eq!(evaluate_map(&left, &pt, &ring).unwrap(), evaluate_map(&right, &pt, &ring).unwrap());
            }
        }
    }

    #[test]
    fn print_parse_round_trip_on_catalog_and_random_maps() {
        let mut maps = vec![
            Builtin::Power(5).build().unwrap(),
            Builtin::Tightness(4).build().unwrap(),
            Builtin::HeisenbergEx.build().unwrap(),
            convolve_maps(&Builtin::HeisenbergEx.build().unwrap(), &identity_map(GroupKind::Heisenberg)).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..40 {
            let target = if i % 2 == 0 { GroupKind::Heisenberg } else { GroupKind::Additive { dim: 1 + i % 3 } };
            maps.push(random_map(&mut rng, target, 1 + i % 4, 4, 3));
        }
        for f in maps {
            assert_eq!(parse_map(&f.to_string()).unwrap(), f, "{f}");
        }
    }

    #[test]
    fn rank_probe_examples() {
        let z7 = make_ring(7, 1).unwrap();
        let phi = Builtin::HeisenbergEx.build().unwrap();
        let pts: Vec<Vec<u64>> = (0..7).map(|c| vec![0, c, 0]).collect();
        let probe = jacobian_rank_probe(&phi, &z7, 16, 1, &pts).unwrap();
        assert!(probe.at_points.iter().all(|(_, r)| *r == 2));
        assert_eq!(probe.generic_rank, 3);

        let phi2 = convolve_maps(&phi, &phi).unwrap();
        let probe2 = jacobian_rank_probe(&phi2, &z7, 64, 7, &[vec![0, 3, 0, 0, 5, 0]]).unwrap();
        assert_eq!(probe2.generic_rank, 3);
        assert_eq!(probe2.at_points[0].1, 3);

        let sq = Builtin::Power(2).build().unwrap();
        let probe = jacobian_rank_probe(&sq, &z7, 4, 0, &[vec![0]]).unwrap();
        assert_eq!(probe.at_points[0].1, 0);

        assert!(matches!(jacobian_rank_probe(&sq, &make_ring(7, 2).unwrap(), 4, 0, &[]), Err(Error::UnsupportedLevel(_))));
    }

    #[test]
    fn rank_mod_p_small_cases() {
        let mut m = vec![vec![1, 2, 3], vec![2, 4, 6]];
        assert_eq!(rank_mod_p(&mut m, 7), 1);
        let mut m = vec![vec![1, 2], vec![3, 4]];
        assert_eq!(rank_mod_p(&mut m, 2), 1);
        assert_eq!(rank_mod_p(&mut [vec![1, 2], vec![3, 4]], 5), 2);
    }
}
