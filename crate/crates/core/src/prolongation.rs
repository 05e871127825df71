//! Prolongation: differentiating relations, saturating a presentation to a height,
//! and the derivation table of the result.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::{prem, LinSystem, Poly, SolutionSpace};
use crate::deriv_index::{enumerate_upto, DerivIndex, MultiIndex};
use crate::tower::{normalize_relation, ChainElem, LeaderReport, Presentation, Tower, TowerElem, TowerError, DEFAULT_MAX_TERMS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProlongError {
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error("slot {slot}: {detail}")]
    Unsupported { slot: String, detail: String },
    #[error("gave up after {0} added relations")]
    TooManySteps(usize),
    #[error("derivative of {0} is outside the table")]
    OutsideTable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaturateOptions {
    pub max_terms: usize,
    pub max_steps: usize,
}

impl Default for SaturateOptions {
    fn default() -> Self {
        SaturateOptions { max_terms: DEFAULT_MAX_TERMS, max_steps: 500 }
    }
}

/// `D_i R = Σ_v (∂R/∂v) · v^{+i}`; constants have zero derivative.
pub fn differentiate_relation(rel: &Poly, i: usize) -> Poly {
    let mut out = Poly::zero(rel.field());
    for v in rel.vars() {
        let d = rel.partial_derivative(&v);
        if !d.is_zero() {
            out = out.add(&d.mul(&Poly::var(rel.field(), v.inc(i))));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RouteKind {
    /// A relation whose leader is the slot.
    Pinned { relation: usize },
    /// `D_direction` applied to the defining relation of `source`.
    Derivative { direction: usize, source: DerivIndex },
}

/// One equation bearing on a slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub kind: RouteKind,
    /// The equation before reduction.
    pub raw: Poly,
    /// Numerator of its normal form.
    pub reduced: Poly,
    /// Value of the source generator for derivative routes.
    pub source_value: Option<TowerElem>,
    /// Value this equation alone gives the slot, when linear in it.
    pub implied: Option<TowerElem>,
}

/// Two equations on one slot that disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub slot: DerivIndex,
    pub defining: Option<Route>,
    pub conflicting: Route,
    /// Numerator of the conflicting equation once the slot's value is inserted.
    pub residual: Poly,
}

/// A conflict and the relation it forces; a constant relation is a contradiction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictStep {
    pub conflict: Conflict,
    pub relation: Poly,
}

impl ConflictStep {
    pub fn is_contradiction(&self) -> bool {
        self.relation.is_constant()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildOutcome {
    pub tower: Tower,
    pub conflict: Option<Conflict>,
    /// Equations checked, one per route.
    pub equations: usize,
}

/// Every relation pinned at its greatest variable: the presentation's, then `extra`.
pub fn pinned_relations(pres: &Presentation, extra: &[Poly]) -> Vec<Poly> {
    pres.relations.iter().map(|r| r.poly.clone()).chain(extra.iter().cloned()).collect()
}

/// Sweep the slots up to `height` in ⊴ order, stopping at the first conflict.
pub fn build(pres: &Presentation, extra: &[Poly], height: u32, opts: &SaturateOptions) -> Result<BuildOutcome, ProlongError> {
    pres.check()?;
    let pinned = pinned_relations(pres, extra);
    let mut by_slot: BTreeMap<DerivIndex, Vec<usize>> = BTreeMap::new();
    for (i, p) in pinned.iter().enumerate() {
        let v = p.greatest_var().ok_or(TowerError::ConstantRelation)?;
        by_slot.entry(v).or_default().push(i);
    }
    let mut tower = Tower::new(pres.field, pres.m, pres.n, height).with_max_terms(opts.max_terms);
    let slots = enumerate_upto(pres.m, pres.n, height).map_err(|e| TowerError::Invalid(e.to_string()))?;
    let mut equations = 0;
    for s in slots {
        let mut routes = Vec::new();
        for &idx in by_slot.get(&s).into_iter().flatten() {
            routes.push(make_route(&tower, &s, RouteKind::Pinned { relation: idx }, pinned[idx].clone(), None)?);
        }
        for i in 0..pres.m {
            let Ok(src) = s.sub_unit(i) else { continue };
            let Some(elem) = tower.get(&src) else { continue };
            let raw = differentiate_relation(&elem.defining_poly(&src), i);
            let kind = RouteKind::Derivative { direction: i, source: src.clone() };
            let sv = tower.slot_value(&src);
            routes.push(make_route(&tower, &s, kind, raw, Some(sv))?);
        }
        equations += routes.len();
        if let Some(conflict) = settle_slot(&mut tower, &s, routes)? {
            return Ok(BuildOutcome { tower, conflict: Some(conflict), equations });
        }
    }
    Ok(BuildOutcome { tower, conflict: None, equations })
}

fn make_route(
    tower: &Tower,
    s: &DerivIndex,
    kind: RouteKind,
    raw: Poly,
    source_value: Option<TowerElem>,
) -> Result<Route, ProlongError> {
    let reduced = tower.nf_poly(&raw)?.num().clone();
    let implied = if reduced.degree_in(s) == 1 { Some(tower.solve_linear(&reduced, s)?) } else { None };
    Ok(Route { kind, raw, reduced, source_value, implied })
}

/// Decide the slot from its routes; returns the first disagreement.
fn settle_slot(tower: &mut Tower, s: &DerivIndex, routes: Vec<Route>) -> Result<Option<Conflict>, ProlongError> {
    let conflict = |def: Option<&Route>, r: &Route, residual: Poly| Conflict {
        slot: s.clone(),
        defining: def.cloned(),
        conflicting: r.clone(),
        residual,
    };
    let low: Vec<usize> = (0..routes.len()).filter(|&k| routes[k].reduced.degree_in(s) <= 1).collect();
    let pivot = low.iter().copied().find(|&k| routes[k].implied.is_some());
    if let Some(p) = pivot {
        let mut sys = LinSystem::new(vec![s.clone()]);
        for &k in &low {
            let c = routes[k].reduced.coeffs_in(s);
            let a = if c.len() > 1 { tower.elem(c[1].clone(), Poly::one(tower.field()))? } else { tower.from_i64(0) };
            let b = tower.elem(c[0].neg(), Poly::one(tower.field()))?;
            sys.push_row(vec![a], b);
        }
        let value = match sys.solve(tower) {
            SolutionSpace::Solved { particular, .. } => particular[0].clone(),
            SolutionSpace::Inconsistent { row, residual } => {
                let r = &routes[low[row]];
                return Ok(Some(conflict(Some(&routes[p]), r, tower.negate(&residual).num().clone())));
            }
        };
        for r in routes.iter().filter(|r| r.reduced.degree_in(s) > 1) {
            let at = tower.elem(r.reduced.clone(), Poly::one(tower.field()))?;
            let res = substitute_value(tower, &at, s, &value)?;
            if !res.is_zero() {
                return Ok(Some(conflict(Some(&routes[p]), r, res.num().clone())));
            }
        }
        tower.install(s.clone(), ChainElem::Linear { value });
        return Ok(None);
    }
    if let Some(&k) = low.iter().find(|&&k| !routes[k].reduced.is_zero()) {
        let r = &routes[k];
        return Ok(Some(conflict(None, r, r.reduced.clone())));
    }
    let Some(min_deg) = routes.iter().map(|r| r.reduced.degree_in(s)).filter(|&d| d >= 2).min() else {
        return Ok(None);
    };
    let d = routes.iter().position(|r| r.reduced.degree_in(s) == min_deg).expect("present");
    let chain_poly = normalize_relation(&routes[d].reduced);
    for (k, r) in routes.iter().enumerate() {
        if k == d || r.reduced.degree_in(s) < 2 {
            continue;
        }
        let (rem, _) = tower.reduce(&prem(&r.reduced, &chain_poly, s).0)?;
        if rem.is_zero() {
            continue;
        }
        if rem.degree_in(s) == 0 {
            return Ok(Some(conflict(Some(&routes[d]), r, rem)));
        }
        return Err(ProlongError::Unsupported {
            slot: s.to_string(),
            detail: "two independent nonlinear relations share this leader".into(),
        });
    }
    tower.install(s.clone(), ChainElem::Algebraic { poly: chain_poly });
    Ok(None)
}

fn substitute_value(tower: &Tower, e: &TowerElem, s: &DerivIndex, value: &TowerElem) -> Result<TowerElem, TowerError> {
    let coeffs = e.num().coeffs_in(s);
    let mut acc = tower.from_i64(0);
    for c in coeffs.iter().rev() {
        acc = tower.try_add(&tower.try_mul(&acc, value)?, &tower.nf_poly(c)?)?;
    }
    tower.div(&acc, &tower.elem(e.den().clone(), Poly::one(tower.field()))?)
}

/// A presentation saturated to a height: its tower and the relations found on the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Saturation {
    pub tower: Tower,
    pub steps: Vec<ConflictStep>,
    pub equations: usize,
}

impl Saturation {
    pub fn height(&self) -> u32 {
        self.tower.height()
    }

    pub fn added_relations(&self) -> Vec<Poly> {
        self.steps.iter().map(|s| s.relation.clone()).collect()
    }

    pub fn leaders(&self) -> LeaderReport {
        self.tower.classify_leaders()
    }

    pub fn table(&self) -> Result<DerivationTable, ProlongError> {
        DerivationTable::from_tower(&self.tower)
    }

    /// Minimal separable leaders all of height ≤ `r`, with data to height `2r`.
    pub fn satisfies_thm1(&self, r: u32) -> bool {
        self.height() >= 2 * r && self.leaders().minimal.iter().all(|v| v.height() <= r)
    }

    /// Minimal separable leaders all below `mu`, with data to height `|mu|`.
    pub fn satisfies_thm2(&self, mu: &MultiIndex) -> bool {
        self.height() >= mu.height()
            && self.leaders().minimal.iter().all(|v| v.index.below(mu).unwrap_or(false))
    }

    /// Per unknown: leaders of height ≤ `r`, or a bound `τ` with `|τ| ≤ 2r` above them all.
    pub fn thm3(&self, r: u32) -> Thm3Check {
        let leaders = self.leaders();
        let mut by_bound = Vec::new();
        let mut holds = self.height() >= 2 * r;
        for k in 0..self.tower.n() {
            let mins = leaders.minimal_for(k);
            if mins.iter().all(|v| v.height() <= r) {
                continue;
            }
            let join = mins.iter().fold(MultiIndex::zero(self.tower.m()), |acc, v| acc.join(&v.index).expect("same m"));
            if join.height() <= 2 * r {
                by_bound.push(k);
            } else {
                holds = false;
            }
        }
        Thm3Check { holds, decided_by_bound: by_bound }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thm3Check {
    pub holds: bool,
    /// Unknowns whose leaders exceed `r` in height but share a bound of height ≤ `2r`.
    pub decided_by_bound: Vec<usize>,
}

/// A contradiction reached by saturation; the last step is constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub steps: Vec<ConflictStep>,
    pub height: u32,
}

impl Violation {
    pub fn last(&self) -> &ConflictStep {
        self.steps.last().expect("nonempty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SaturateError {
    #[error("inconsistent: {} derived relation(s) ending in a nonzero constant", .0.steps.len())]
    Violation(Violation),
    #[error(transparent)]
    Failed(#[from] ProlongError),
}

/// Build repeatedly, adding the relation behind each conflict, until a sweep is clean.
pub fn saturate(pres: &Presentation, height: u32, opts: &SaturateOptions) -> Result<Saturation, SaturateError> {
    let mut extra: Vec<Poly> = Vec::new();
    let mut steps = Vec::new();
    loop {
        let out = build(pres, &extra, height, opts)?;
        let Some(conflict) = out.conflict else {
            return Ok(Saturation { tower: out.tower, steps, equations: out.equations });
        };
        let relation = normalize_relation(&conflict.residual);
        let contradiction = relation.is_constant();
        steps.push(ConflictStep { conflict, relation: relation.clone() });
        if contradiction {
            return Err(SaturateError::Violation(Violation { steps, height }));
        }
        if steps.len() >= opts.max_steps {
            return Err(ProlongError::TooManySteps(steps.len()).into());
        }
        extra.push(relation);
    }
}

/// Saturation to `height` succeeds.
pub fn differential_condition(pres: &Presentation, height: u32, opts: &SaturateOptions) -> Result<Saturation, SaturateError> {
    saturate(pres, height, opts)
}

/// The presentation's own relations already agree on every route to `height`.
pub fn meets_condition_as_presented(pres: &Presentation, height: u32, opts: &SaturateOptions) -> Result<bool, ProlongError> {
    Ok(build(pres, &[], height, opts)?.conflict.is_none())
}

pub fn hypothesis_thm1(pres: &Presentation, r: u32, opts: &SaturateOptions) -> bool {
    r >= 1 && saturate(pres, 2 * r, opts).map(|s| s.satisfies_thm1(r)).unwrap_or(false)
}

pub fn hypothesis_thm2(pres: &Presentation, mu: &MultiIndex, opts: &SaturateOptions) -> bool {
    saturate(pres, mu.height(), opts).map(|s| s.satisfies_thm2(mu)).unwrap_or(false)
}

pub fn hypothesis_thm3(pres: &Presentation, r: u32, opts: &SaturateOptions) -> bool {
    r >= 1 && saturate(pres, 2 * r, opts).map(|s| s.thm3(r).holds).unwrap_or(false)
}

/// `D_i` of each generator below the top layer, as tower elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationTable {
    m: usize,
    height: u32,
    values: BTreeMap<(usize, DerivIndex), TowerElem>,
}

impl DerivationTable {
    pub fn from_tower(tower: &Tower) -> Result<Self, ProlongError> {
        let mut values = BTreeMap::new();
        if tower.height() > 0 {
            let slots = enumerate_upto(tower.m(), tower.n(), tower.height() - 1).map_err(|e| TowerError::Invalid(e.to_string()))?;
            for v in slots {
                for i in 0..tower.m() {
                    values.insert((i, v.clone()), tower.slot_value(&v.inc(i)));
                }
            }
        }
        Ok(DerivationTable { m: tower.m(), height: tower.height(), values })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, i: usize, v: &DerivIndex) -> Option<&TowerElem> {
        self.values.get(&(i, v.clone()))
    }

    pub fn set(&mut self, i: usize, v: DerivIndex, value: TowerElem) {
        self.values.insert((i, v), value);
    }

    /// `D_i p` by the chain rule.
    pub fn derive_poly(&self, tower: &Tower, p: &Poly, i: usize) -> Result<TowerElem, ProlongError> {
        let mut groups: BTreeMap<Vec<u8>, (Poly, Poly)> = BTreeMap::new();
        for v in p.vars() {
            let dv = p.partial_derivative(&v);
            if dv.is_zero() {
                continue;
            }
            let val = self.get(i, &v).ok_or_else(|| ProlongError::OutsideTable(v.to_string()))?;
            let key = format!("{:?}", val.den()).into_bytes();
            let entry = groups.entry(key).or_insert_with(|| (Poly::zero(p.field()), val.den().clone()));
            entry.0 = entry.0.add(&dv.mul(val.num()));
        }
        let mut acc = tower.from_i64(0);
        for (num, den) in groups.into_values() {
            acc = tower.try_add(&acc, &tower.elem(num, den)?)?;
        }
        Ok(acc)
    }

    /// `D_i e` by the quotient rule.
    pub fn derive(&self, tower: &Tower, e: &TowerElem, i: usize) -> Result<TowerElem, ProlongError> {
        let dn = self.derive_poly(tower, e.num(), i)?;
        if e.den().is_constant() {
            let inv = tower.invert(&tower.elem(e.den().clone(), Poly::one(tower.field()))?)?;
            return Ok(tower.try_mul(&dn, &inv)?);
        }
        let dd = self.derive_poly(tower, e.den(), i)?;
        let n = tower.elem(e.num().clone(), Poly::one(tower.field()))?;
        let d = tower.elem(e.den().clone(), Poly::one(tower.field()))?;
        let top = tower.try_sub(&tower.try_mul(&dn, &d)?, &tower.try_mul(&n, &dd)?)?;
        Ok(tower.div(&top, &tower.try_mul(&d, &d)?)?)
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// Generators `v` of height ≤ H−2 and pairs `i < j` with `D_i D_j v ≠ D_j D_i v`.
pub fn commutator_check(table: &DerivationTable, tower: &Tower) -> Result<Vec<(usize, usize, DerivIndex)>, ProlongError> {
    let mut bad = Vec::new();
    if table.height() < 2 {
        return Ok(bad);
    }
    let slots = enumerate_upto(tower.m(), tower.n(), table.height() - 2).map_err(|e| TowerError::Invalid(e.to_string()))?;
    for v in slots {
        for i in 0..table.m() {
            for j in (i + 1)..table.m() {
                let (Some(dj), Some(di)) = (table.get(j, &v), table.get(i, &v)) else { continue };
                let a = table.derive(tower, dj, i)?;
                let b = table.derive(tower, di, j)?;
                if !tower.equal(&a, &b)? {
                    bad.push((i, j, v.clone()));
                }
            }
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Field;

    fn v(e: &[u32], k: usize) -> Poly {
        Poly::var(Field::Rational, DerivIndex::from_entries(e, k))
    }

    fn c(x: i64) -> Poly {
        Poly::from_i64(Field::Rational, x)
    }

    fn hrushovski() -> Presentation {
        let rels = vec![
            v(&[1, 0], 0).sub(&v(&[0, 0], 2).pow(2)),
            v(&[0, 1], 0).sub(&v(&[0, 0], 2)),
            v(&[1, 0], 1).sub(&v(&[0, 0], 0).mul(&c(2))),
            v(&[0, 1], 1).sub(&v(&[0, 0], 2)),
        ];
        Presentation::with_relations(2, 3, Field::Rational, rels).unwrap()
    }

    #[test]
    fn differentiating_relations() {
        let r = v(&[1, 0], 0).sub(&v(&[0, 0], 2).pow(2));
        let d1 = differentiate_relation(&r, 1);
        assert_eq!(d1, v(&[1, 1], 0).sub(&v(&[0, 0], 2).mul(&v(&[0, 1], 2)).mul(&c(2))));
        assert!(differentiate_relation(&c(3), 0).is_zero());
    }

    #[test]
    fn hrushovski_is_inconsistent() {
        let err = saturate(&hrushovski(), 2, &SaturateOptions::default()).unwrap_err();
        let SaturateError::Violation(viol) = err else { panic!("{err:?}") };
        let rels: Vec<Poly> = viol.steps.iter().map(|s| s.relation.clone()).collect();
        assert_eq!(rels[0], v(&[1, 0], 2).sub(&v(&[0, 0], 2).mul(&v(&[0, 1], 2)).mul(&c(2))));
        assert_eq!(rels[1], v(&[0, 1], 2).sub(&c(1)));
        assert!(rels[2].is_constant());
        let last = &viol.last().conflict;
        assert_eq!(last.slot, DerivIndex::from_entries(&[1, 1], 2));
        assert_eq!(last.conflicting.implied.as_ref().unwrap().as_constant().unwrap().to_string(), "2");
        assert_eq!(last.defining.as_ref().unwrap().implied.as_ref().unwrap().as_constant().unwrap().to_string(), "0");
    }

    #[test]
    fn commutators_vanish_and_corruption_is_seen() {
        let f = v(&[1, 1], 0).sub(&v(&[0, 2], 0));
        let g = v(&[0, 3], 0).sub(&v(&[2, 0], 0));
        let h = v(&[3, 0], 0).sub(&v(&[2, 1], 0));
        let pres = Presentation::with_relations(2, 1, Field::Rational, vec![f, g, h]).unwrap();
        let sat = saturate(&pres, 6, &SaturateOptions::default()).unwrap();
        let mut table = sat.table().unwrap();
        assert!(commutator_check(&table, &sat.tower).unwrap().is_empty());
        let slot = DerivIndex::from_entries(&[1, 0], 0);
        let bumped = sat.tower.try_add(table.get(1, &slot).unwrap(), &sat.tower.from_i64(1)).unwrap();
        table.set(1, slot, bumped);
        assert!(!commutator_check(&table, &sat.tower).unwrap().is_empty());
        assert!(sat.satisfies_thm1(3));
        assert!(!hypothesis_thm1(&pres, 2, &SaturateOptions::default()));
    }

    #[test]
    fn empty_system_saturates() {
        let pres = Presentation::new(2, 1, Field::Rational);
        let sat = saturate(&pres, 4, &SaturateOptions::default()).unwrap();
        assert!(sat.steps.is_empty());
        assert!(sat.tower.chain().is_empty());
    }
}
