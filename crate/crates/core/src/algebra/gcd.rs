//! Pseudo-division, exact division and gcds of multivariate polynomials.

use super::poly::{Monomial, Poly, Var};
use super::scalar::Scalar;

/// Sparse pseudo-remainder of `a` by `b` in `v`: `lc(b)^k · a = q·b + r`, `deg_v r < deg_v b`.
pub fn prem(a: &Poly, b: &Poly, v: &Var) -> (Poly, u32) {
    let db = b.degree_in(v);
    let lcb = b.leading_coeff_in(v);
    let mut r = a.clone();
    let mut k = 0;
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lcr = r.leading_coeff_in(v);
        let shift = Monomial::var(v.clone(), dr - db);
        r = r.mul(&lcb).sub(&lcr.mul(&b.mul_monomial(&shift)));
        k += 1;
    }
    (r, k)
}

/// `a / b` when `b` divides `a` exactly.
pub fn div_exact(a: &Poly, b: &Poly) -> Option<Poly> {
    if b.is_zero() {
        return None;
    }
    if a.is_zero() {
        return Some(Poly::zero(a.field()));
    }
    if let Some(c) = b.as_constant() {
        return Some(a.scale(&c.inv().ok()?));
    }
    let v = b.greatest_var()?;
    let db = b.degree_in(&v);
    let lcb = b.leading_coeff_in(&v);
    let mut r = a.clone();
    let mut q = Poly::zero(a.field());
    while !r.is_zero() {
        let dr = r.degree_in(&v);
        if dr < db {
            return None;
        }
        let t = div_exact(&r.leading_coeff_in(&v), &lcb)?;
        let t = t.mul_monomial(&Monomial::var(v.clone(), dr - db));
        r = r.sub(&t.mul(b));
        q = q.add(&t);
    }
    Some(q)
}

/// Monic gcd; `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one(a.field());
    }
    let (ma, mb) = (a.monomial_content(), b.monomial_content());
    if !ma.is_one() || !mb.is_one() {
        let rest = gcd(&a.div_monomial(&ma), &b.div_monomial(&mb));
        return rest.mul_monomial(&ma.gcd(&mb));
    }
    if coprime_by_images(a, b) {
        return Poly::one(a.field());
    }
    let va = a.greatest_var().expect("non-constant");
    let vb = b.greatest_var().expect("non-constant");
    let v = if va >= vb { va } else { vb };
    if a.degree_in(&v) == 0 {
        return gcd_with_coeffs(a, b, &v);
    }
    if b.degree_in(&v) == 0 {
        return gcd_with_coeffs(b, a, &v);
    }
    let ca = content_in(a, &v);
    let cb = content_in(b, &v);
    let c = gcd(&ca, &cb);
    let mut p = div_exact(a, &ca).expect("content divides");
    let mut q = div_exact(b, &cb).expect("content divides");
    if p.degree_in(&v) < q.degree_in(&v) {
        std::mem::swap(&mut p, &mut q);
    }
    if div_exact(&p, &q).is_some() {
        return c.mul(&q).monic();
    }
    let prim = loop {
        let (r, _) = prem(&p, &q, &v);
        if r.is_zero() {
            break q;
        }
        if r.degree_in(&v) == 0 {
            break Poly::one(a.field());
        }
        p = q;
        q = primitive_part_in(&r, &v);
    };
    c.mul(&prim).monic()
}

const IMAGE_TRIES: i64 = 3;

/// Sound test for `gcd(a, b) = 1`. A common factor involves some shared variable `w`;
/// specialising the others where both leading coefficients in `w` survive keeps its
/// image of positive degree, so coprime images in every `w` rule it out.
fn coprime_by_images(a: &Poly, b: &Poly) -> bool {
    let shared: Vec<Var> = a.vars().intersection(&b.vars()).cloned().collect();
    shared.iter().all(|w| {
        (0..IMAGE_TRIES).any(|attempt| {
            let point = |u: &Var| -> Scalar {
                let seed = u.index.entries().iter().fold(u.unknown as i64 + 1, |h, &e| h * 31 + e as i64);
                Scalar::from_i64(a.field(), (seed * 7 + attempt * 13).rem_euclid(89) + 2)
            };
            let (ia, ib) = (image(a, w, &point), image(b, w, &point));
            ia.len() == a.degree_in(w) as usize + 1
                && ib.len() == b.degree_in(w) as usize + 1
                && univariate_gcd_degree(ia, ib) == 0
        })
    })
}

/// Coefficients, low to high, of `p` as a polynomial in `w` with the other variables at `point`.
fn image(p: &Poly, w: &Var, point: &dyn Fn(&Var) -> Scalar) -> Vec<Scalar> {
    let zero = Scalar::zero(p.field());
    let mut out = vec![zero; p.degree_in(w) as usize + 1];
    for (mono, c) in p.terms() {
        let mut value = c.clone();
        let mut d = 0;
        for (u, e) in mono.factors() {
            if u == w {
                d = *e as usize;
            } else {
                let x = point(u);
                for _ in 0..*e {
                    value = value.mul(&x);
                }
            }
        }
        out[d] = out[d].add(&value);
    }
    while out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

fn univariate_gcd_degree(mut p: Vec<Scalar>, mut q: Vec<Scalar>) -> usize {
    while !q.is_empty() {
        while p.len() >= q.len() {
            let factor = p[p.len() - 1].mul(&q[q.len() - 1].inv().expect("nonzero lead"));
            let shift = p.len() - q.len();
            for (i, c) in q.iter().enumerate() {
                p[i + shift] = p[i + shift].sub(&factor.mul(c));
            }
            p.pop();
            while p.last().is_some_and(|c| c.is_zero()) {
                p.pop();
            }
        }
        std::mem::swap(&mut p, &mut q);
    }
    p.len().saturating_sub(1)
}

/// `gcd(a, content_in(b, v))` for `a` free of `v`, folding from `a` so the running gcd stays small.
fn gcd_with_coeffs(a: &Poly, b: &Poly, v: &Var) -> Poly {
    let mut g = a.clone();
    for c in by_size(b.coeffs_in(v)) {
        g = gcd(&g, &c);
        if g.is_one() {
            break;
        }
    }
    g.monic()
}

/// Nonzero polynomials, fewest terms first.
fn by_size(mut coeffs: Vec<Poly>) -> Vec<Poly> {
    coeffs.retain(|c| !c.is_zero());
    coeffs.sort_by_key(|c| (c.num_terms(), c.total_degree()));
    coeffs
}

/// Gcd of the coefficients of `p` as a polynomial in `v`.
pub fn content_in(p: &Poly, v: &Var) -> Poly {
    let mut g = Poly::zero(p.field());
    for c in by_size(p.coeffs_in(v)) {
        g = gcd(&g, &c);
        if g.is_one() {
            break;
        }
    }
    g
}

pub fn primitive_part_in(p: &Poly, v: &Var) -> Poly {
    if p.is_zero() {
        return p.clone();
    }
    div_exact(p, &content_in(p, v)).expect("content divides")
}

/// Exact square root, up to sign, if `p` is a perfect square. Characteristic 2 is not handled.
pub fn sqrt_poly(p: &Poly) -> Option<Poly> {
    if p.field().characteristic() == 2 {
        return None;
    }
    if let Some(c) = p.as_constant() {
        return c.sqrt().map(Poly::constant);
    }
    let v = p.greatest_var()?;
    let d = p.degree_in(&v);
    if d % 2 == 1 {
        return None;
    }
    let h = (d / 2) as usize;
    let coeffs = p.coeffs_in(&v);
    let mut s = vec![Poly::zero(p.field()); h + 1];
    s[h] = sqrt_poly(&coeffs[2 * h])?;
    let two_lead = s[h].scale(&Scalar::from_i64(p.field(), 2));
    for k in (0..h).rev() {
        let mut rest = coeffs[h + k].clone();
        for i in (k + 1)..h {
            let j = h + k - i;
            if j > k && j < h {
                rest = rest.sub(&s[i].mul(&s[j]));
            }
        }
        s[k] = div_exact(&rest, &two_lead)?;
    }
    let root = Poly::from_coeffs_in(p.field(), &v, &s);
    if root.mul(&root) == *p {
        Some(root)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::Field;
    use crate::deriv_index::DerivIndex;

    fn v(e: &[u32], k: usize) -> Poly {
        Poly::var(Field::Rational, DerivIndex::from_entries(e, k))
    }

    fn c(x: i64) -> Poly {
        Poly::from_i64(Field::Rational, x)
    }

    #[test]
    fn gcd_of_products() {
        let x = v(&[0, 0], 0);
        let y = v(&[1, 0], 0);
        let z = v(&[0, 1], 1);
        let f = x.mul(&y).add(&c(1));
        let g = z.sub(&x.pow(2));
        let h = y.add(&z);
        let a = f.mul(&g).mul(&g);
        let b = f.mul(&h).mul(&g);
        assert_eq!(gcd(&a, &b), f.mul(&g).monic());
        assert!(gcd(&f, &h).is_one());
        assert_eq!(div_exact(&a, &g), Some(f.mul(&g)));
        assert_eq!(div_exact(&f, &g), None);
    }

    #[test]
    fn pseudo_remainder() {
        let x = v(&[0, 0], 0);
        let y = v(&[1, 0], 0);
        let b = x.mul(&y).sub(&c(1));
        let a = y.pow(2).add(&x);
        let (r, k) = prem(&a, &b, &DerivIndex::from_entries(&[1, 0], 0));
        assert_eq!(k, 2);
        assert_eq!(r, x.pow(3).add(&c(1)));
    }

    #[test]
    fn square_roots() {
        let x = v(&[0, 0], 0);
        let y = v(&[1, 0], 0);
        let s = x.mul(&y).sub(&y.pow(2).scale(&Scalar::from_i64(Field::Rational, 3))).add(&c(2));
        let r = sqrt_poly(&s.mul(&s)).unwrap();
        assert!(r == s || r == s.neg());
        assert!(sqrt_poly(&s.mul(&s).add(&c(1))).is_none());
    }
}
