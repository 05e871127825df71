use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// Coefficient field: ℚ or 𝔽_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    Rational,
    Prime(u64),
}

impl Field {
    /// Field of characteristic `p`; `0` gives ℚ.
    pub fn with_characteristic(p: u64) -> Result<Field, AlgebraError> {
        match p {
            0 => Ok(Field::Rational),
            p if is_prime(p) && p < (1 << 31) => Ok(Field::Prime(p)),
            p => Err(AlgebraError::NotPrime(p)),
        }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Rational => 0,
            Field::Prime(p) => *p,
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of a [`Field`], always in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Mod { value: u64, modulus: u64 },
}

impl Scalar {
    pub fn zero(field: Field) -> Scalar {
        Scalar::from_i64(field, 0)
    }

    pub fn one(field: Field) -> Scalar {
        Scalar::from_i64(field, 1)
    }

    pub fn from_i64(field: Field, v: i64) -> Scalar {
        match field {
            Field::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(v))),
            Field::Prime(p) => Scalar::Mod { value: v.rem_euclid(p as i64) as u64, modulus: p },
        }
    }

    pub fn from_bigint(field: Field, v: &BigInt) -> Scalar {
        match field {
            Field::Rational => Scalar::Rat(BigRational::from_integer(v.clone())),
            Field::Prime(p) => {
                let r = v % BigInt::from(p);
                let r = if r.is_negative() { r + BigInt::from(p) } else { r };
                Scalar::Mod { value: r.to_u64().expect("residue fits"), modulus: p }
            }
        }
    }

    /// `num / den` in `field`; fails when `den` vanishes in the field.
    pub fn ratio(field: Field, num: &BigInt, den: &BigInt) -> Result<Scalar, AlgebraError> {
        let d = Scalar::from_bigint(field, den);
        if d.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Scalar::from_bigint(field, num).mul(&d.inv()?))
    }

    pub fn field(&self) -> Field {
        match self {
            Scalar::Rat(_) => Field::Rational,
            Scalar::Mod { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Mod { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Mod { value, .. } => *value == 1,
        }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Mod { value: a, modulus: p }, Scalar::Mod { value: b, modulus: q }) if p == q => {
                Scalar::Mod { value: (a + b) % p, modulus: *p }
            }
            _ => panic!("characteristic mismatch in scalar arithmetic"),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Mod { value, modulus } => Scalar::Mod { value: (modulus - value) % modulus, modulus: *modulus },
        }
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Mod { value: a, modulus: p }, Scalar::Mod { value: b, modulus: q }) if p == q => {
                Scalar::Mod { value: ((*a as u128 * *b as u128) % *p as u128) as u64, modulus: *p }
            }
            _ => panic!("characteristic mismatch in scalar arithmetic"),
        }
    }

    pub fn inv(&self) -> Result<Scalar, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rat(a) => Scalar::Rat(a.recip()),
            Scalar::Mod { value, modulus } => Scalar::Mod { value: pow_mod(*value, modulus - 2, *modulus), modulus: *modulus },
        })
    }

    /// Multiplication by the integer `k`, as in `k · 1 + … `.
    pub fn mul_int(&self, k: u64) -> Scalar {
        self.mul(&Scalar::from_bigint(self.field(), &BigInt::from(k)))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_negative(),
            Scalar::Mod { .. } => false,
        }
    }

    /// Square root in the field when one exists (ℚ, and 𝔽_p for small p).
    pub fn sqrt(&self) -> Option<Scalar> {
        match self {
            Scalar::Rat(r) => {
                if r.is_negative() {
                    return None;
                }
                let n = r.numer().sqrt();
                let d = r.denom().sqrt();
                if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
                    Some(Scalar::Rat(BigRational::new(n, d)))
                } else {
                    None
                }
            }
            Scalar::Mod { value, modulus } => {
                (0..*modulus).find(|x| (*x as u128 * *x as u128) % *modulus as u128 == *value as u128).map(|x| {
                    Scalar::Mod { value: x, modulus: *modulus }
                })
            }
        }
    }
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut base = b as u128 % p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    b = acc as u64;
    b
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Mod { value, .. } => write!(f, "{value}"),
        }
    }
}
