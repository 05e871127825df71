//! Sparse multivariate polynomials in derivative-named variables.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::scalar::{Field, Scalar};
use super::AlgebraError;
use crate::deriv_index::DerivIndex;

/// Polynomial variables are derivative slots.
pub type Var = DerivIndex;

/// A power product, variables ascending in the orderly ranking, exponents > 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, e)])
        }
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: &Var) -> u32 {
        self.0.iter().find(|(w, _)| w == v).map(|(_, e)| *e).unwrap_or(0)
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < o.0.len() {
            match self.0[i].0.cmp(&o.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(o.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + o.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&o.0[j..]);
        Monomial(out)
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, o: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|(v, e)| {
                    let f = o.exponent(v);
                    (f > 0).then(|| (v.clone(), (*e).min(f)))
                })
                .collect(),
        )
    }

    /// `self / o` when `o` divides `self`.
    pub fn div(&self, o: &Monomial) -> Option<Monomial> {
        let mut out = Vec::new();
        let mut j = 0;
        for (v, e) in &self.0 {
            if j < o.0.len() && &o.0[j].0 == v {
                let f = o.0[j].1;
                if f > *e {
                    return None;
                }
                if e - f > 0 {
                    out.push((v.clone(), e - f));
                }
                j += 1;
            } else {
                if j < o.0.len() && o.0[j].0 < *v {
                    return None;
                }
                out.push((v.clone(), *e));
            }
        }
        if j < o.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Remove `v` entirely, returning its exponent.
    fn split(&self, v: &Var) -> (u32, Monomial) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|(w, x)| {
                if w == v {
                    e = *x;
                    false
                } else {
                    true
                }
            })
            .cloned()
            .collect();
        (e, Monomial(rest))
    }
}

// Graded, then lexicographic from the ⊴-greatest variable down.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let mut a = self.0.iter().rev();
            let mut b = other.0.iter().rev();
            loop {
                match (a.next(), b.next()) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some((va, ea)), Some((vb, eb))) => {
                        let c = va.cmp(vb).then(ea.cmp(eb));
                        if c != Ordering::Equal {
                            return c;
                        }
                    }
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial with coefficients in a [`Field`]. No zero coefficient is stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    field: Field,
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero(field: Field) -> Poly {
        Poly { field, terms: BTreeMap::new() }
    }

    pub fn one(field: Field) -> Poly {
        Poly::constant(Scalar::one(field))
    }

    pub fn constant(c: Scalar) -> Poly {
        let field = c.field();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { field, terms }
    }

    pub fn from_i64(field: Field, v: i64) -> Poly {
        Poly::constant(Scalar::from_i64(field, v))
    }

    pub fn var(field: Field, v: Var) -> Poly {
        Poly::term(Scalar::one(field), Monomial::var(v, 1))
    }

    pub fn term(c: Scalar, mono: Monomial) -> Poly {
        let field = c.field();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(mono, c);
        }
        Poly { field, terms }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero(self.field)),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn leading_scalar(&self) -> Scalar {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(|| Scalar::zero(self.field))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(v, _)| v.clone())).collect()
    }

    /// The ⊴-greatest variable occurring.
    pub fn greatest_var(&self) -> Option<Var> {
        self.terms.keys().filter_map(|m| m.0.last().map(|(v, _)| v)).max().cloned()
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    fn check(&self, o: &Poly) -> Result<(), AlgebraError> {
        if self.field != o.field {
            return Err(AlgebraError::CharacteristicMismatch(self.field.characteristic(), o.field.characteristic()));
        }
        Ok(())
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn checked_add(&self, o: &Poly) -> Result<Poly, AlgebraError> {
        self.check(o)?;
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, o: &Poly) -> Result<Poly, AlgebraError> {
        self.check(o)?;
        let mut out = Poly::zero(self.field);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(ma.mul(mb), ca.mul(cb));
            }
        }
        Ok(out)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        self.checked_add(o).expect("polynomials over the same field")
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        self.checked_mul(o).expect("polynomials over the same field")
    }

    pub fn neg(&self) -> Poly {
        Poly { field: self.field, terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        if s.is_zero() {
            return Poly::zero(self.field);
        }
        Poly { field: self.field, terms: self.terms.iter().map(|(m, c)| (m.clone(), c.mul(s))).collect() }
    }

    pub fn mul_monomial(&self, mono: &Monomial) -> Poly {
        Poly { field: self.field, terms: self.terms.iter().map(|(m, c)| (m.mul(mono), c.clone())).collect() }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Scale so the leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.inv().expect("nonzero leading coefficient")),
        }
    }

    /// Formal partial derivative `∂p/∂v`.
    pub fn partial_derivative(&self, v: &Var) -> Poly {
        let mut out = Poly::zero(self.field);
        for (m, c) in &self.terms {
            let (e, rest) = m.split(v);
            if e == 0 {
                continue;
            }
            let coeff = c.mul_int(e as u64);
            out.add_term(rest.mul(&Monomial::var(v.clone(), e - 1)), coeff);
        }
        out
    }

    /// Coefficients of `p` viewed as a univariate polynomial in `v`.
    pub fn coeffs_in(&self, v: &Var) -> Vec<Poly> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(self.field); d + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split(v);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn from_coeffs_in(field: Field, v: &Var, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero(field);
        for (e, c) in coeffs.iter().enumerate() {
            let mono = Monomial::var(v.clone(), e as u32);
            for (m, s) in &c.terms {
                out.add_term(m.mul(&mono), s.clone());
            }
        }
        out
    }

    /// Largest monomial dividing every term; `1` for zero.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms().map(|(m, _)| m);
        let Some(first) = it.next() else { return Monomial::one() };
        it.fold(first.clone(), |g, m| if g.is_one() { g } else { g.gcd(m) })
    }

    /// `self / mono`, assuming every term is divisible.
    pub fn div_monomial(&self, mono: &Monomial) -> Poly {
        let mut out = Poly::zero(self.field());
        for (m, c) in self.terms() {
            out = out.add(&Poly::term(c.clone(), m.div(mono).expect("monomial divides")));
        }
        out
    }

    pub fn leading_coeff_in(&self, v: &Var) -> Poly {
        self.coeffs_in(v).pop().unwrap_or_else(|| Poly::zero(self.field))
    }

    /// Replace `v` by `value`.
    pub fn substitute(&self, v: &Var, value: &Poly) -> Poly {
        let coeffs = self.coeffs_in(v);
        let mut acc = Poly::zero(self.field);
        for c in coeffs.iter().rev() {
            acc = acc.mul(value).add(c);
        }
        acc
    }

    pub fn display_with(&self, naming: &Naming) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = if neg { c.neg() } else { c.clone() };
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if m.is_one() {
                s.push_str(&abs.to_string());
                continue;
            }
            if !abs.is_one() {
                s.push_str(&abs.to_string());
                s.push('*');
            }
            let factors: Vec<String> = m
                .0
                .iter()
                .rev()
                .map(|(v, e)| {
                    let name = naming.var_name(v);
                    if *e == 1 {
                        name
                    } else {
                        format!("{name}^{e}")
                    }
                })
                .collect();
            s.push_str(&factors.join("*"));
        }
        s
    }
}

/// Names for unknowns, used to print derivative variables as `D0^2 D1 x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Naming {
    pub unknowns: Vec<String>,
}

impl Naming {
    pub fn new(unknowns: Vec<String>) -> Self {
        Naming { unknowns }
    }

    /// Default names `x0, x1, …`.
    pub fn generic(n: usize) -> Self {
        Naming { unknowns: (0..n).map(|k| format!("x{k}")).collect() }
    }

    pub fn unknown_name(&self, k: usize) -> String {
        self.unknowns.get(k).cloned().unwrap_or_else(|| format!("x{k}"))
    }

    pub fn var_name(&self, v: &Var) -> String {
        let mut parts = Vec::new();
        for (i, e) in v.index.entries().iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("D{i}")),
                e => parts.push(format!("D{i}^{e}")),
            }
        }
        parts.push(self.unknown_name(v.unknown));
        parts.join(" ")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.vars().iter().map(|v| v.unknown + 1).max().unwrap_or(0);
        write!(f, "{}", self.display_with(&Naming::generic(n)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(e: &[u32]) -> Poly {
        Poly::var(Field::Rational, DerivIndex::from_entries(e, 0))
    }

    fn c(v: i64) -> Poly {
        Poly::from_i64(Field::Rational, v)
    }

    #[test]
    fn ring_basics() {
        let a = x(&[0, 0]);
        assert_eq!(a.add(&c(1)).mul(&a.sub(&c(1))), a.pow(2).sub(&c(1)));
        assert_eq!(a.add(&Poly::zero(Field::Rational)), a);
        let f3 = Field::Prime(3);
        let y = Poly::var(f3, DerivIndex::from_entries(&[0, 0], 0));
        let cube = y.pow(3);
        assert_eq!(cube.num_terms(), 1);
        assert!(cube.leading_scalar().is_one());
        assert!(y.checked_add(&a).is_err());
    }

    #[test]
    fn derivatives() {
        let y = x(&[0, 0]);
        let u = Poly::var(Field::Rational, DerivIndex::from_entries(&[0, 1], 0));
        assert_eq!(y.pow(2).sub(&u).partial_derivative(&DerivIndex::from_entries(&[0, 0], 0)), y.scale(&Scalar::from_i64(Field::Rational, 2)));
        let f5 = Field::Prime(5);
        let yv = DerivIndex::from_entries(&[1, 0], 0);
        let y5 = Poly::var(f5, yv.clone()).pow(5).sub(&Poly::var(f5, DerivIndex::from_entries(&[0, 1], 0)));
        assert!(y5.partial_derivative(&yv).is_zero());
        let xy = y.mul(&u);
        assert_eq!(xy.partial_derivative(&DerivIndex::from_entries(&[0, 0], 0)), u);
    }

    #[test]
    fn monomial_order_is_graded() {
        let a = DerivIndex::from_entries(&[0, 0], 0);
        let b = DerivIndex::from_entries(&[1, 0], 0);
        assert!(Monomial::var(b.clone(), 1) > Monomial::var(a.clone(), 1));
        assert!(Monomial::var(a.clone(), 2) > Monomial::var(b.clone(), 1));
        let ab = Monomial::var(a.clone(), 1).mul(&Monomial::var(b.clone(), 1));
        assert_eq!(ab.div(&Monomial::var(a, 1)), Some(Monomial::var(b.clone(), 1)));
        assert_eq!(Monomial::var(b.clone(), 1).div(&ab), None);
    }

    #[test]
    fn printing() {
        let n = Naming::new(vec!["a".into(), "b".into(), "c".into()]);
        let cc = Poly::var(Field::Rational, DerivIndex::from_entries(&[0, 0], 2));
        let da = Poly::var(Field::Rational, DerivIndex::from_entries(&[1, 0], 0));
        assert_eq!(da.sub(&cc.pow(2)).display_with(&n), "-c^2 + D0 a");
        let h = Scalar::ratio(Field::Rational, &2.into(), &3.into()).unwrap();
        assert_eq!(cc.scale(&h).display_with(&n), "2/3*c");
    }
}
