//! Gauss–Jordan elimination over any field given by a [`FieldOps`] context.

use super::scalar::{Field, Scalar};

/// Field arithmetic supplied by a context object.
pub trait FieldOps {
    type Elem: Clone;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// `None` only for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
}

impl FieldOps for Field {
    type Elem = Scalar;
    fn zero(&self) -> Scalar {
        Scalar::zero(*self)
    }
    fn one(&self) -> Scalar {
        Scalar::one(*self)
    }
    fn is_zero(&self, a: &Scalar) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a.add(b)
    }
    fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a.mul(b)
    }
    fn neg(&self, a: &Scalar) -> Scalar {
        a.neg()
    }
    fn inv(&self, a: &Scalar) -> Option<Scalar> {
        a.inv().ok()
    }
}

/// Rows `Σ_j coeffs[r][j] · u_j = rhs[r]` over labelled unknowns.
#[derive(Debug, Clone)]
pub struct LinSystem<U, E> {
    pub unknowns: Vec<U>,
    pub coeffs: Vec<Vec<E>>,
    pub rhs: Vec<E>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolutionSpace<E> {
    /// A particular solution (free unknowns set to 0) and a kernel basis.
    Solved { particular: Vec<E>, kernel: Vec<Vec<E>>, pivots: Vec<usize> },
    /// Row `row` (input numbering) reduces to `0 = residual` with `residual ≠ 0`.
    Inconsistent { row: usize, residual: E },
}

impl<U: Clone, E: Clone> LinSystem<U, E> {
    pub fn new(unknowns: Vec<U>) -> Self {
        LinSystem { unknowns, coeffs: Vec::new(), rhs: Vec::new() }
    }

    pub fn push_row(&mut self, coeffs: Vec<E>, rhs: E) {
        assert_eq!(coeffs.len(), self.unknowns.len(), "row width");
        self.coeffs.push(coeffs);
        self.rhs.push(rhs);
    }

    /// Deterministic elimination: columns left to right, pivot on the first usable row in input order.
    pub fn solve<F: FieldOps<Elem = E>>(&self, ops: &F) -> SolutionSpace<E> {
        let ncols = self.unknowns.len();
        let mut rows: Vec<(usize, Vec<E>, E)> =
            self.coeffs.iter().cloned().zip(self.rhs.iter().cloned()).enumerate().map(|(i, (c, b))| (i, c, b)).collect();
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..ncols {
            let Some(found) = (next..rows.len()).find(|&r| !ops.is_zero(&rows[r].1[col])) else {
                continue;
            };
            let pr = rows.remove(found);
            rows.insert(next, pr);
            let inv = ops.inv(&rows[next].1[col]).expect("nonzero pivot");
            let (_, pc, pb) = &mut rows[next];
            for e in pc.iter_mut() {
                *e = ops.mul(e, &inv);
            }
            *pb = ops.mul(pb, &inv);
            let (pc, pb) = (rows[next].1.clone(), rows[next].2.clone());
            for (r, row) in rows.iter_mut().enumerate() {
                if r == next || ops.is_zero(&row.1[col]) {
                    continue;
                }
                let f = row.1[col].clone();
                for (e, p) in row.1.iter_mut().zip(&pc) {
                    *e = ops.sub(e, &ops.mul(&f, p));
                }
                row.2 = ops.sub(&row.2, &ops.mul(&f, &pb));
            }
            pivots.push(col);
            next += 1;
        }
        if let Some((row, _, residual)) =
            rows[next..].iter().filter(|(_, _, b)| !ops.is_zero(b)).min_by_key(|(i, _, _)| *i)
        {
            return SolutionSpace::Inconsistent { row: *row, residual: residual.clone() };
        }
        let mut particular = vec![ops.zero(); ncols];
        for (k, &col) in pivots.iter().enumerate() {
            particular[col] = rows[k].2.clone();
        }
        let mut kernel = Vec::new();
        for free in (0..ncols).filter(|c| !pivots.contains(c)) {
            let mut vec = vec![ops.zero(); ncols];
            vec[free] = ops.one();
            for (k, &col) in pivots.iter().enumerate() {
                vec[col] = ops.neg(&rows[k].1[free]);
            }
            kernel.push(vec);
        }
        SolutionSpace::Solved { particular, kernel, pivots }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> Scalar {
        Scalar::from_i64(Field::Rational, v)
    }

    #[test]
    fn solves_and_reports_kernel() {
        let mut s = LinSystem::new(vec!["u", "v", "w"]);
        s.push_row(vec![q(1), q(1), q(0)], q(3));
        s.push_row(vec![q(2), q(2), q(0)], q(6));
        s.push_row(vec![q(0), q(1), q(1)], q(1));
        match s.solve(&Field::Rational) {
            SolutionSpace::Solved { particular, kernel, pivots } => {
                assert_eq!(pivots, vec![0, 1]);
                assert_eq!(particular, vec![q(2), q(1), q(0)]);
                assert_eq!(kernel, vec![vec![q(1), q(-1), q(1)]]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistency_names_row() {
        let mut s = LinSystem::new(vec!["u"]);
        s.push_row(vec![q(2)], q(4));
        s.push_row(vec![q(1)], q(2));
        s.push_row(vec![q(1)], q(5));
        assert_eq!(s.solve(&Field::Rational), SolutionSpace::Inconsistent { row: 2, residual: q(3) });
    }
}
