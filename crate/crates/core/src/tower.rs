//! Towers of field extensions presented by free and defined generators.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::algebra::{div_exact, gcd, prem, primitive_part_in, sqrt_poly, Field, FieldOps, Naming, Poly, Scalar, Var};
use crate::deriv_index::{enumerate_upto, is_antichain, DerivIndex};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TowerError {
    #[error("element is zero at the generic point and cannot be inverted")]
    NotInvertible,
    #[error("relation is constant")]
    ConstantRelation,
    #[error("expression too large: {terms} terms exceeds the limit of {limit}")]
    SizeGuard { terms: usize, limit: usize },
    #[error("invalid presentation: {0}")]
    Invalid(String),
}

/// A polynomial relation together with its leader.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub poly: Poly,
    pub leader: DerivIndex,
}

impl Relation {
    /// The leader is the ⊴-greatest variable.
    pub fn new(poly: Poly) -> Result<Relation, TowerError> {
        let leader = poly.greatest_var().ok_or(TowerError::ConstantRelation)?;
        Ok(Relation { poly, leader })
    }
}

/// Generators `(σ, k)` with `|σ| ≤ height`, some of them defined by relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub m: usize,
    pub n: usize,
    pub field: Field,
    pub relations: Vec<Relation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    LeaderNotGreatest { relation: usize, leader: String, greatest: String },
    DuplicateLeader { first: usize, second: usize, leader: String },
    ConstantInLeader { relation: usize, leader: String },
    OutOfRange { relation: usize, variable: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::LeaderNotGreatest { relation, leader, greatest } => {
                write!(f, "relation {relation}: leader {leader} is not its greatest variable {greatest}")
            }
            Diagnostic::DuplicateLeader { first, second, leader } => {
                write!(f, "relations {first} and {second} share the leader {leader}")
            }
            Diagnostic::ConstantInLeader { relation, leader } => {
                write!(f, "relation {relation} does not involve its leader {leader}")
            }
            Diagnostic::OutOfRange { relation, variable } => {
                write!(f, "relation {relation}: variable {variable} outside the system's derivations or unknowns")
            }
        }
    }
}

impl Presentation {
    pub fn new(m: usize, n: usize, field: Field) -> Self {
        Presentation { m, n, field, relations: Vec::new() }
    }

    pub fn with_relations(m: usize, n: usize, field: Field, polys: Vec<Poly>) -> Result<Self, TowerError> {
        let relations = polys.into_iter().map(Relation::new).collect::<Result<Vec<_>, _>>()?;
        let p = Presentation { m, n, field, relations };
        p.check()?;
        Ok(p)
    }

    /// Greatest leader height, `0` when there are no relations.
    pub fn height(&self) -> u32 {
        self.relations.iter().map(|r| r.leader.height()).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut seen: BTreeMap<&DerivIndex, usize> = BTreeMap::new();
        for (i, rel) in self.relations.iter().enumerate() {
            for v in rel.poly.vars() {
                if v.m() != self.m || v.unknown >= self.n {
                    out.push(Diagnostic::OutOfRange { relation: i, variable: v.to_string() });
                }
            }
            match rel.poly.greatest_var() {
                Some(g) if g != rel.leader => out.push(Diagnostic::LeaderNotGreatest {
                    relation: i,
                    leader: rel.leader.to_string(),
                    greatest: g.to_string(),
                }),
                _ => {}
            }
            if rel.poly.degree_in(&rel.leader) == 0 {
                out.push(Diagnostic::ConstantInLeader { relation: i, leader: rel.leader.to_string() });
            }
            if let Some(&first) = seen.get(&rel.leader) {
                out.push(Diagnostic::DuplicateLeader { first, second: i, leader: rel.leader.to_string() });
            } else {
                seen.insert(&rel.leader, i);
            }
        }
        out
    }

    pub fn check(&self) -> Result<(), TowerError> {
        match self.validate().first() {
            None => Ok(()),
            Some(d) => Err(TowerError::Invalid(d.to_string())),
        }
    }
}

/// An element `num / den` of the tower's field; `num` reduced modulo the algebraic chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TowerElem {
    num: Poly,
    den: Poly,
}

impl TowerElem {
    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        let d = self.den.as_constant()?;
        let n = self.num.as_constant()?;
        Some(n.mul(&d.inv().ok()?))
    }

    pub fn display_with(&self, naming: &Naming) -> String {
        if self.den.is_one() {
            return self.num.display_with(naming);
        }
        let wrap = |p: &Poly| {
            let s = p.display_with(naming);
            if p.num_terms() > 1 || s.contains('*') {
                format!("({s})")
            } else {
                s
            }
        };
        format!("{}/{}", wrap(&self.num), wrap(&self.den))
    }
}

impl fmt::Display for TowerElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.num.vars().iter().chain(self.den.vars().iter()).map(|v| v.unknown + 1).max().unwrap_or(0);
        write!(f, "{}", self.display_with(&Naming::generic(n)))
    }
}

/// How a defined generator is represented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainElem {
    /// Degree one in the leader: the leader is a rational function of earlier generators.
    Linear { value: TowerElem },
    /// Degree ≥ 2: the leader stays a variable, reduced by this polynomial.
    Algebraic { poly: Poly },
}

impl ChainElem {
    /// A polynomial vanishing at the generator, with the leader as greatest variable.
    pub fn defining_poly(&self, leader: &Var) -> Poly {
        match self {
            ChainElem::Linear { value } => {
                value.den.mul(&Poly::var(value.den.field(), leader.clone())).sub(&value.num)
            }
            ChainElem::Algebraic { poly } => poly.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderKind {
    Free,
    Separable,
    Inseparable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeaderReport {
    pub kinds: BTreeMap<DerivIndex, LeaderKind>,
    /// Separable leaders with no separable leader of the same unknown strictly below, in ⊴ order.
    pub minimal: Vec<DerivIndex>,
}

impl LeaderReport {
    pub fn kind(&self, v: &DerivIndex) -> Option<LeaderKind> {
        self.kinds.get(v).copied()
    }

    pub fn minimal_for(&self, unknown: usize) -> Vec<&DerivIndex> {
        self.minimal.iter().filter(|v| v.unknown == unknown).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IrreducibilityStatus {
    Reducible,
    NotSquareFree,
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrreducibilityWarning {
    pub leader: DerivIndex,
    pub status: IrreducibilityStatus,
}

pub const DEFAULT_MAX_TERMS: usize = 20_000;

/// A triangular chain over the generic point, one element per leader.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tower {
    field: Field,
    m: usize,
    n: usize,
    height: u32,
    chain: BTreeMap<DerivIndex, ChainElem>,
    max_terms: usize,
}

impl Tower {
    pub fn new(field: Field, m: usize, n: usize, height: u32) -> Self {
        Tower { field, m, n, height, chain: BTreeMap::new(), max_terms: DEFAULT_MAX_TERMS }
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    /// Install the relations of `pres` as they stand, without differentiating them.
    pub fn from_presentation(pres: &Presentation) -> Result<Tower, TowerError> {
        pres.check()?;
        let mut tower = Tower::new(pres.field, pres.m, pres.n, pres.height());
        let mut rels: Vec<&Relation> = pres.relations.iter().collect();
        rels.sort_by(|a, b| a.leader.cmp(&b.leader));
        for rel in rels {
            let num = tower.nf_poly(&rel.poly)?.num;
            match num.degree_in(&rel.leader) {
                0 => {
                    return Err(TowerError::Invalid(format!(
                        "relation with leader {} reduces to a relation among earlier generators",
                        rel.leader
                    )))
                }
                1 => {
                    let value = tower.solve_linear(&num, &rel.leader)?;
                    tower.install(rel.leader.clone(), ChainElem::Linear { value });
                }
                _ => tower.install(rel.leader.clone(), ChainElem::Algebraic { poly: normalize_relation(&num) }),
            }
        }
        Ok(tower)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn set_height(&mut self, height: u32) {
        self.height = height;
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn chain(&self) -> &BTreeMap<DerivIndex, ChainElem> {
        &self.chain
    }

    pub fn get(&self, v: &DerivIndex) -> Option<&ChainElem> {
        self.chain.get(v)
    }

    pub fn install(&mut self, leader: DerivIndex, elem: ChainElem) {
        self.chain.insert(leader, elem);
    }

    /// Solve `A·v + B = 0` (degree one in `v`) for `v`.
    pub fn solve_linear(&self, p: &Poly, v: &Var) -> Result<TowerElem, TowerError> {
        let coeffs = p.coeffs_in(v);
        debug_assert_eq!(coeffs.len(), 2);
        let a = self.elem(coeffs[1].clone(), Poly::one(self.field))?;
        let b = self.elem(coeffs[0].neg(), Poly::one(self.field))?;
        self.div(&b, &a)
    }

    fn guard(&self, p: &Poly) -> Result<(), TowerError> {
        if p.num_terms() > self.max_terms {
            return Err(TowerError::SizeGuard { terms: p.num_terms(), limit: self.max_terms });
        }
        Ok(())
    }

    /// Pseudo-reduce by the algebraic chain: returns `(r, q)` with `p ≡ r / q`.
    pub fn reduce(&self, p: &Poly) -> Result<(Poly, Poly), TowerError> {
        let mut r = p.clone();
        let mut mult = Poly::one(self.field);
        for (v, elem) in self.chain.iter().rev() {
            if let ChainElem::Algebraic { poly } = elem {
                if r.degree_in(v) >= poly.degree_in(v) {
                    let (rem, k) = prem(&r, poly, v);
                    mult = mult.mul(&poly.leading_coeff_in(v).pow(k));
                    r = rem;
                    self.guard(&r)?;
                }
            }
        }
        Ok((r, mult))
    }

    /// Normal form: linear leaders substituted, the rest reduced.
    pub fn nf_poly(&self, p: &Poly) -> Result<TowerElem, TowerError> {
        let mut num = p.clone();
        let mut den = Poly::one(self.field);
        let linear: Vec<Var> = p.vars().into_iter().rev().filter(|v| matches!(self.chain.get(v), Some(ChainElem::Linear { .. }))).collect();
        for v in linear {
            let Some(ChainElem::Linear { value }) = self.chain.get(&v) else { unreachable!() };
            let coeffs = num.coeffs_in(&v);
            let d = coeffs.len() as u32 - 1;
            let mut acc = Poly::zero(self.field);
            for (e, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let e = e as u32;
                acc = acc.add(&c.mul(&value.num.pow(e)).mul(&value.den.pow(d - e)));
            }
            self.guard(&acc)?;
            num = acc;
            den = den.mul(&value.den.pow(d));
        }
        self.elem(num, den)
    }

    /// Canonical `num / den`.
    pub fn elem(&self, num: Poly, den: Poly) -> Result<TowerElem, TowerError> {
        if den.is_zero() {
            return Err(TowerError::NotInvertible);
        }
        let (num, mult) = self.reduce(&num)?;
        let mut den = den.mul(&mult);
        if num.is_zero() {
            return Ok(TowerElem { num, den: Poly::one(self.field) });
        }
        let mut num = num;
        let g = gcd(&num, &den);
        if !g.is_one() {
            num = div_exact(&num, &g).expect("gcd divides");
            den = div_exact(&den, &g).expect("gcd divides");
        }
        let lead = den.leading_scalar().inv().map_err(|_| TowerError::NotInvertible)?;
        let e = TowerElem { num: num.scale(&lead), den: den.scale(&lead) };
        self.guard(&e.num)?;
        self.guard(&e.den)?;
        Ok(e)
    }

    pub fn constant(&self, c: Scalar) -> TowerElem {
        TowerElem { num: Poly::constant(c), den: Poly::one(self.field) }
    }

    pub fn from_i64(&self, v: i64) -> TowerElem {
        self.constant(Scalar::from_i64(self.field, v))
    }

    /// Value of a generator: its linear definition, or itself.
    pub fn slot_value(&self, v: &DerivIndex) -> TowerElem {
        match self.chain.get(v) {
            Some(ChainElem::Linear { value }) => value.clone(),
            _ => TowerElem { num: Poly::var(self.field, v.clone()), den: Poly::one(self.field) },
        }
    }

    pub fn try_add(&self, a: &TowerElem, b: &TowerElem) -> Result<TowerElem, TowerError> {
        if a.den == b.den {
            return self.elem(a.num.add(&b.num), a.den.clone());
        }
        self.elem(a.num.mul(&b.den).add(&b.num.mul(&a.den)), a.den.mul(&b.den))
    }

    pub fn try_mul(&self, a: &TowerElem, b: &TowerElem) -> Result<TowerElem, TowerError> {
        self.elem(a.num.mul(&b.num), a.den.mul(&b.den))
    }

    pub fn try_sub(&self, a: &TowerElem, b: &TowerElem) -> Result<TowerElem, TowerError> {
        self.try_add(a, &self.negate(b))
    }

    pub fn negate(&self, a: &TowerElem) -> TowerElem {
        TowerElem { num: a.num.neg(), den: a.den.clone() }
    }

    pub fn invert(&self, a: &TowerElem) -> Result<TowerElem, TowerError> {
        if a.is_zero() {
            return Err(TowerError::NotInvertible);
        }
        self.elem(a.den.clone(), a.num.clone())
    }

    pub fn div(&self, a: &TowerElem, b: &TowerElem) -> Result<TowerElem, TowerError> {
        self.try_mul(a, &self.invert(b)?)
    }

    pub fn equal(&self, a: &TowerElem, b: &TowerElem) -> Result<bool, TowerError> {
        Ok(self.try_sub(a, b)?.is_zero())
    }

    /// Free, separable-leader or inseparable-leader status of every generator up to the tower's height.
    pub fn classify_leaders(&self) -> LeaderReport {
        let mut kinds = BTreeMap::new();
        let slots = enumerate_upto(self.m, self.n, self.height).unwrap_or_default();
        for v in slots.into_iter().chain(self.chain.keys().cloned()) {
            let kind = match self.chain.get(&v) {
                None => LeaderKind::Free,
                Some(ChainElem::Linear { .. }) => LeaderKind::Separable,
                Some(ChainElem::Algebraic { poly }) => {
                    let d = poly.partial_derivative(&v);
                    match self.reduce(&d) {
                        Ok((r, _)) if r.is_zero() => LeaderKind::Inseparable,
                        _ => LeaderKind::Separable,
                    }
                }
            };
            kinds.insert(v, kind);
        }
        let separable: Vec<&DerivIndex> =
            kinds.iter().filter(|(_, k)| **k == LeaderKind::Separable).map(|(v, _)| v).collect();
        let minimal: Vec<DerivIndex> = separable
            .iter()
            .filter(|v| !separable.iter().any(|w| w.strictly_below(v).unwrap_or(false)))
            .map(|v| (*v).clone())
            .collect();
        debug_assert!(is_antichain(minimal.iter()));
        LeaderReport { kinds, minimal }
    }

    /// Best-effort irreducibility checks of the algebraic chain elements.
    pub fn irreducibility_warnings(&self) -> Vec<IrreducibilityWarning> {
        let mut out = Vec::new();
        for (v, elem) in &self.chain {
            let ChainElem::Algebraic { poly } = elem else { continue };
            let status = irreducibility(poly, v, self.field);
            if let Some(status) = status {
                out.push(IrreducibilityWarning { leader: v.clone(), status });
            }
        }
        out
    }
}

fn irreducibility(poly: &Poly, v: &Var, field: Field) -> Option<IrreducibilityStatus> {
    let d = poly.degree_in(v);
    if d == 2 && field.characteristic() != 2 {
        let c = poly.coeffs_in(v);
        let disc = c[1].pow(2).sub(&c[2].mul(&c[0]).scale(&Scalar::from_i64(field, 4)));
        return match sqrt_poly(&disc) {
            Some(_) => Some(IrreducibilityStatus::Reducible),
            None => None,
        };
    }
    let deriv = poly.partial_derivative(v);
    if deriv.is_zero() {
        return Some(IrreducibilityStatus::Unverified);
    }
    if gcd(poly, &deriv).degree_in(v) > 0 {
        return Some(IrreducibilityStatus::NotSquareFree);
    }
    Some(IrreducibilityStatus::Unverified)
}

/// Primitive with respect to the greatest variable, leading coefficient there having leading scalar 1.
pub fn normalize_relation(p: &Poly) -> Poly {
    let Some(v) = p.greatest_var() else {
        return p.monic();
    };
    let prim = primitive_part_in(p, &v);
    let lead = prim.leading_coeff_in(&v).leading_scalar();
    prim.scale(&lead.inv().expect("nonzero"))
}

impl FieldOps for Tower {
    type Elem = TowerElem;
    fn zero(&self) -> TowerElem {
        self.from_i64(0)
    }
    fn one(&self) -> TowerElem {
        self.from_i64(1)
    }
    fn is_zero(&self, a: &TowerElem) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        self.try_add(a, b).expect("tower arithmetic within size limits")
    }
    fn mul(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        self.try_mul(a, b).expect("tower arithmetic within size limits")
    }
    fn neg(&self, a: &TowerElem) -> TowerElem {
        self.negate(a)
    }
    fn inv(&self, a: &TowerElem) -> Option<TowerElem> {
        self.invert(a).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(e: &[u32]) -> Poly {
        Poly::var(Field::Rational, DerivIndex::from_entries(e, 0))
    }

    fn sec43() -> Presentation {
        let f = x(&[1, 1]).sub(&x(&[0, 2]));
        let g = x(&[0, 3]).sub(&x(&[2, 0]));
        let h = x(&[3, 0]).sub(&x(&[2, 1]));
        Presentation::with_relations(2, 1, Field::Rational, vec![f, g, h]).unwrap()
    }

    #[test]
    fn normal_forms() {
        let t = Tower::from_presentation(&sec43()).unwrap();
        assert!(t.nf_poly(&x(&[1, 1]).sub(&x(&[0, 2]))).unwrap().is_zero());
        assert_eq!(t.nf_poly(&x(&[0, 0])).unwrap().num(), &x(&[0, 0]));
        assert_eq!(t.invert(&t.nf_poly(&x(&[1, 1]).sub(&x(&[0, 2]))).unwrap()), Err(TowerError::NotInvertible));
        let half = t.invert(&t.from_i64(2)).unwrap();
        assert_eq!(half.as_constant().unwrap().to_string(), "1/2");
        let c = t.nf_poly(&x(&[0, 1])).unwrap();
        assert!(t.try_mul(&c, &t.invert(&c).unwrap()).unwrap().num().is_one());
    }

    #[test]
    fn leader_classification() {
        let t = Tower::from_presentation(&sec43()).unwrap();
        let report = t.classify_leaders();
        let expect: Vec<DerivIndex> =
            [[1, 1], [0, 3], [3, 0]].iter().map(|e| DerivIndex::from_entries(e, 0)).collect();
        assert_eq!(report.minimal, expect);
        let m = Presentation::with_relations(
            2,
            1,
            Field::Rational,
            vec![x(&[3, 3]).sub(&x(&[0, 0])), x(&[3, 1]).sub(&x(&[0, 3]))],
        )
        .unwrap();
        let report = Tower::from_presentation(&m).unwrap().classify_leaders();
        assert_eq!(report.kind(&DerivIndex::from_entries(&[3, 3], 0)), Some(LeaderKind::Separable));
        assert_eq!(report.minimal, vec![DerivIndex::from_entries(&[3, 1], 0)]);
    }

    #[test]
    fn char_p_reduction() {
        for p in [2u64, 3, 5] {
            let f = Field::Prime(p);
            let v = |e: &[u32]| Poly::var(f, DerivIndex::from_entries(e, 0));
            let rel = v(&[1, 0]).pow(p as u32).add(&v(&[0, 0])).sub(&v(&[0, 1]));
            let pres = Presentation::with_relations(2, 1, f, vec![rel]).unwrap();
            let t = Tower::from_presentation(&pres).unwrap();
            let nf = t.nf_poly(&v(&[1, 0]).pow(p as u32)).unwrap();
            assert_eq!(nf.num(), &v(&[0, 1]).sub(&v(&[0, 0])));
            let report = t.classify_leaders();
            assert_eq!(report.kind(&DerivIndex::from_entries(&[1, 0], 0)), Some(LeaderKind::Inseparable));
            assert!(report.minimal.is_empty());
        }
    }

    #[test]
    fn diagnostics() {
        let a = x(&[1, 0]);
        let bad = Presentation {
            m: 2,
            n: 1,
            field: Field::Rational,
            relations: vec![
                Relation { poly: a.sub(&x(&[0, 2])), leader: DerivIndex::from_entries(&[1, 0], 0) },
                Relation::new(x(&[0, 2]).add(&x(&[0, 0]))).unwrap(),
                Relation::new(x(&[0, 2]).sub(&x(&[0, 1]))).unwrap(),
            ],
        };
        let d = bad.validate();
        assert!(matches!(d[0], Diagnostic::LeaderNotGreatest { relation: 0, .. }));
        assert!(d.iter().any(|x| matches!(x, Diagnostic::DuplicateLeader { first: 1, second: 2, .. })));
        assert!(sec43().validate().is_empty());
    }

    #[test]
    fn irreducibility_checks() {
        let y = x(&[1, 0]);
        let u = x(&[0, 0]);
        let sq = Presentation::with_relations(2, 1, Field::Rational, vec![y.pow(2).sub(&u.pow(2))]).unwrap();
        let w = Tower::from_presentation(&sq).unwrap().irreducibility_warnings();
        assert_eq!(w[0].status, IrreducibilityStatus::Reducible);
        let ok = Presentation::with_relations(2, 1, Field::Rational, vec![y.pow(2).sub(&u)]).unwrap();
        assert!(Tower::from_presentation(&ok).unwrap().irreducibility_warnings().is_empty());
    }
}
