//! Exterior forms in `dt^0 … dt^{m-1}`, the first-order reduction of a system,
//! and the linear system expressing commutation of the reduced derivations.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{LinSystem, Poly};
use crate::deriv_index::{enumerate_upto, DerivIndex};
use crate::prolongation::{DerivationTable, ProlongError};
use crate::tower::{ChainElem, Presentation, Tower, TowerElem, TowerError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormsError {
    #[error("forms of degree {0} are not supported")]
    Degree(usize),
    #[error("degree mismatch in sum: {0} vs {1}")]
    Mismatch(usize, usize),
    #[error(transparent)]
    Prolong(#[from] ProlongError),
    #[error(transparent)]
    Tower(#[from] TowerError),
}

pub const MAX_DEGREE: usize = 2;

/// `Σ c_I dt^I` over increasing index lists `I` of one length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExteriorElement {
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, TowerElem>,
}

fn sort_with_sign(mut idx: Vec<usize>) -> Option<(Vec<usize>, bool)> {
    let mut negative = false;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((idx, negative))
}

impl ExteriorElement {
    pub fn zero(degree: usize) -> Self {
        ExteriorElement { degree, coeffs: BTreeMap::new() }
    }

    pub fn function(tower: &Tower, f: TowerElem) -> Self {
        let mut e = Self::zero(0);
        e.push(tower, vec![], f).expect("degree 0");
        e
    }

    /// `dt^i`.
    pub fn dt(tower: &Tower, i: usize) -> Self {
        let mut e = Self::zero(1);
        e.push(tower, vec![i], tower.from_i64(1)).expect("degree 1");
        e
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, basis: &[usize]) -> Option<&TowerElem> {
        self.coeffs.get(basis)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &TowerElem)> {
        self.coeffs.iter()
    }

    fn push(&mut self, tower: &Tower, basis: Vec<usize>, c: TowerElem) -> Result<(), FormsError> {
        let Some((basis, negative)) = sort_with_sign(basis) else { return Ok(()) };
        let c = if negative { tower.negate(&c) } else { c };
        let sum = match self.coeffs.get(&basis) {
            Some(old) => tower.try_add(old, &c)?,
            None => c,
        };
        if sum.is_zero() {
            self.coeffs.remove(&basis);
        } else {
            self.coeffs.insert(basis, sum);
        }
        Ok(())
    }

    pub fn add(&self, tower: &Tower, o: &Self) -> Result<Self, FormsError> {
        if self.degree != o.degree && !self.is_zero() && !o.is_zero() {
            return Err(FormsError::Mismatch(self.degree, o.degree));
        }
        let mut out = if self.is_zero() { Self::zero(o.degree) } else { self.clone() };
        for (b, c) in &o.coeffs {
            out.push(tower, b.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, tower: &Tower, f: &TowerElem) -> Result<Self, FormsError> {
        let mut out = Self::zero(self.degree);
        for (b, c) in &self.coeffs {
            out.push(tower, b.clone(), tower.try_mul(c, f)?)?;
        }
        Ok(out)
    }

    pub fn wedge(&self, tower: &Tower, o: &Self) -> Result<Self, FormsError> {
        let degree = self.degree + o.degree;
        if degree > MAX_DEGREE {
            return Err(FormsError::Degree(degree));
        }
        let mut out = Self::zero(degree);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &o.coeffs {
                let basis: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
                out.push(tower, basis, tower.try_mul(ca, cb)?)?;
            }
        }
        Ok(out)
    }

    /// `d f = Σ dt^i · D_i f`, and `d(Σ g_I dt^I) = Σ d g_I ∧ dt^I`.
    pub fn exterior_d(&self, tower: &Tower, table: &DerivationTable) -> Result<Self, FormsError> {
        if self.degree + 1 > MAX_DEGREE {
            return Err(FormsError::Degree(self.degree + 1));
        }
        let mut out = Self::zero(self.degree + 1);
        for (b, c) in &self.coeffs {
            for i in 0..table.m() {
                let dc = table.derive(tower, c, i)?;
                let basis: Vec<usize> = std::iter::once(i).chain(b.iter().copied()).collect();
                out.push(tower, basis, dc)?;
            }
        }
        Ok(out)
    }
}

/// A system in the shape `f(x) = 0, ∂_i x^j = g_i^j(x)`.
#[derive(Debug, Clone)]
pub struct FirstOrderSystem {
    pub tower: Tower,
    /// All new unknowns, in ⊴ order.
    pub tuple: Vec<DerivIndex>,
    /// Relations among the tuple.
    pub equations: Vec<Poly>,
    /// `(i, x) ↦ g_i^x` for assigned `x`.
    pub assignments: BTreeMap<(usize, DerivIndex), TowerElem>,
    pub assigned: Vec<DerivIndex>,
    pub unassigned: Vec<DerivIndex>,
}

/// Replace every derivative below the top height by a new unknown.
pub fn first_order_reduction(pres: &Presentation) -> Result<FirstOrderSystem, FormsError> {
    let tower = Tower::from_presentation(pres)?;
    let height = pres.height();
    let slots = |h: u32| enumerate_upto(pres.m, pres.n, h).map_err(|e| TowerError::Invalid(e.to_string()));
    let already = height <= 1
        && pres.relations.iter().all(|r| {
            r.leader.height() == 1
                && matches!(tower.get(&r.leader), Some(ChainElem::Linear { value })
                    if value.num().vars().iter().chain(value.den().vars().iter()).all(|v| v.height() == 0))
        });
    if already {
        let tuple = slots(0)?;
        let mut assignments = BTreeMap::new();
        let mut assigned = Vec::new();
        let mut unassigned = Vec::new();
        for x in &tuple {
            if (0..pres.m).all(|i| tower.get(&x.inc(i)).is_some()) {
                for i in 0..pres.m {
                    assignments.insert((i, x.clone()), tower.slot_value(&x.inc(i)));
                }
                assigned.push(x.clone());
            } else {
                unassigned.push(x.clone());
            }
        }
        return Ok(FirstOrderSystem { tower, tuple, equations: Vec::new(), assignments, assigned, unassigned });
    }
    let height = height.max(1);
    let all = slots(height)?;
    let tuple: Vec<DerivIndex> = all
        .into_iter()
        .filter(|v| v.height() < height || !matches!(tower.get(v), Some(ChainElem::Linear { .. })))
        .collect();
    let mut equations = Vec::new();
    for (v, elem) in tower.chain() {
        if v.height() < height || matches!(elem, ChainElem::Algebraic { .. }) {
            equations.push(elem.defining_poly(v));
        }
    }
    let mut assignments = BTreeMap::new();
    let mut assigned = Vec::new();
    let mut unassigned = Vec::new();
    for x in &tuple {
        if x.height() < height {
            for i in 0..pres.m {
                assignments.insert((i, x.clone()), tower.slot_value(&x.inc(i)));
            }
            assigned.push(x.clone());
        } else {
            unassigned.push(x.clone());
        }
    }
    Ok(FirstOrderSystem { tower, tuple, equations, assignments, assigned, unassigned })
}

/// `constant + Σ coeff · ∂̃_h z` over unassigned `z`.
#[derive(Debug, Clone)]
struct Affine {
    constant: TowerElem,
    coeffs: BTreeMap<(DerivIndex, usize), TowerElem>,
}

impl Affine {
    fn zero(tower: &Tower) -> Self {
        Affine { constant: tower.from_i64(0), coeffs: BTreeMap::new() }
    }

    fn add(&self, tower: &Tower, o: &Affine) -> Result<Affine, TowerError> {
        let mut out = self.clone();
        out.constant = tower.try_add(&out.constant, &o.constant)?;
        for (k, c) in &o.coeffs {
            let v = match out.coeffs.get(k) {
                Some(old) => tower.try_add(old, c)?,
                None => c.clone(),
            };
            out.coeffs.insert(k.clone(), v);
        }
        Ok(out)
    }

    fn scale(&self, tower: &Tower, f: &TowerElem) -> Result<Affine, TowerError> {
        let mut out = Affine { constant: tower.try_mul(&self.constant, f)?, coeffs: BTreeMap::new() };
        for (k, c) in &self.coeffs {
            out.coeffs.insert(k.clone(), tower.try_mul(c, f)?);
        }
        Ok(out)
    }
}

impl FirstOrderSystem {
    /// `∂̃_h p` with assigned derivatives substituted.
    fn derive_poly(&self, p: &Poly, h: usize) -> Result<Affine, TowerError> {
        let tower = &self.tower;
        let mut out = Affine::zero(tower);
        for v in p.vars() {
            let c = tower.nf_poly(&p.partial_derivative(&v))?;
            if c.is_zero() {
                continue;
            }
            match self.assignments.get(&(h, v.clone())) {
                Some(g) => out.constant = tower.try_add(&out.constant, &tower.try_mul(&c, g)?)?,
                None => {
                    let key = (v.clone(), h);
                    let val = match out.coeffs.get(&key) {
                        Some(old) => tower.try_add(old, &c)?,
                        None => c,
                    };
                    out.coeffs.insert(key, val);
                }
            }
        }
        Ok(out)
    }

    fn derive(&self, e: &TowerElem, h: usize) -> Result<Affine, TowerError> {
        let tower = &self.tower;
        let one = Poly::one(tower.field());
        let d = tower.elem(e.den().clone(), one.clone())?;
        let n = tower.elem(e.num().clone(), one)?;
        let inv_d = tower.invert(&d)?;
        let dn = self.derive_poly(e.num(), h)?.scale(tower, &inv_d)?;
        if e.den().is_constant() {
            return Ok(dn);
        }
        let factor = tower.negate(&tower.try_mul(&n, &tower.try_mul(&inv_d, &inv_d)?)?);
        dn.add(tower, &self.derive_poly(e.den(), h)?.scale(tower, &factor)?)
    }

    /// Rows `∂̃_h g_i^x − ∂̃_i g_h^x = 0` for assigned `x` and `h < i`,
    /// unknowns `∂̃_h z` ordered by `(z, h)`; identically zero rows dropped.
    pub fn commutation_system(&self) -> Result<LinSystem<(usize, DerivIndex), TowerElem>, FormsError> {
        let tower = &self.tower;
        let m = tower.m();
        let mut rows = Vec::new();
        let mut used: BTreeSet<(DerivIndex, usize)> = BTreeSet::new();
        for x in &self.assigned {
            for i in 0..m {
                for h in 0..i {
                    let a = self.derive(&self.assignments[&(i, x.clone())], h)?;
                    let b = self.derive(&self.assignments[&(h, x.clone())], i)?;
                    let minus = Affine { constant: tower.negate(&b.constant), coeffs: BTreeMap::new() };
                    let mut row = a.add(tower, &minus)?;
                    for (k, c) in &b.coeffs {
                        let v = match row.coeffs.get(k) {
                            Some(old) => tower.try_sub(old, c)?,
                            None => tower.negate(c),
                        };
                        row.coeffs.insert(k.clone(), v);
                    }
                    row.coeffs.retain(|_, c| !c.is_zero());
                    if row.coeffs.is_empty() && row.constant.is_zero() {
                        continue;
                    }
                    used.extend(row.coeffs.keys().cloned());
                    rows.push(row);
                }
            }
        }
        let unknowns: Vec<(DerivIndex, usize)> = used.into_iter().collect();
        let mut sys = LinSystem::new(unknowns.iter().map(|(z, h)| (*h, z.clone())).collect());
        for row in rows {
            let coeffs = unknowns.iter().map(|k| row.coeffs.get(k).cloned().unwrap_or_else(|| tower.from_i64(0))).collect();
            sys.push_row(coeffs, tower.negate(&row.constant));
        }
        Ok(sys)
    }
}

/// Value of `p` in `target` when each variable takes its value there.
pub fn evaluate(p: &Poly, target: &Tower) -> Result<TowerElem, TowerError> {
    let mut acc = target.from_i64(0);
    for (mono, c) in p.terms() {
        let mut term = target.constant(c.clone());
        for (v, e) in mono.factors() {
            let value = target.slot_value(v);
            for _ in 0..*e {
                term = target.try_mul(&term, &value)?;
            }
        }
        acc = target.try_add(&acc, &term)?;
    }
    Ok(acc)
}

fn transfer(e: &TowerElem, target: &Tower) -> Result<TowerElem, TowerError> {
    target.div(&evaluate(e.num(), target)?, &evaluate(e.den(), target)?)
}

impl FirstOrderSystem {
    /// Whether the commutation rows hold in `target` once `∂̃_h z` is read as the slot `z + ι_h`.
    pub fn satisfied_by(&self, target: &Tower) -> Result<bool, FormsError> {
        let sys = self.commutation_system()?;
        for eq in &self.equations {
            if !evaluate(eq, target)?.is_zero() {
                return Ok(false);
            }
        }
        for ((i, x), g) in &self.assignments {
            if !target.equal(&transfer(g, target)?, &target.slot_value(&x.inc(*i)))? {
                return Ok(false);
            }
        }
        for (row, rhs) in sys.coeffs.iter().zip(&sys.rhs) {
            let mut lhs = target.from_i64(0);
            for (c, (h, z)) in row.iter().zip(&sys.unknowns) {
                let u = target.slot_value(&z.inc(*h));
                lhs = target.try_add(&lhs, &target.try_mul(&transfer(c, target)?, &u)?)?;
            }
            if !target.equal(&lhs, &transfer(rhs, target)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
