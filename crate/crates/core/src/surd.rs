//! Exact arithmetic in real quadratic fields.
//!
//! A [`QuadraticSurd`] stores `a + b*sqrt(d)` with rational `a`, `b` and a
//! square-free radicand `d`. Field operations stay exact; values from
//! different fields are compared through refinable rational enclosures.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticSurd {
    /// Rational part.
    a: BigRational,
    /// Coefficient of sqrt(d); zero iff the value is rational.
    b: BigRational,
    /// Square-free radicand; 0 when the value is rational.
    d: u64,
}

impl QuadraticSurd {
    pub fn from_ratio(a: BigRational) -> Self {
        QuadraticSurd {
            a,
            b: BigRational::zero(),
            d: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_ratio(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact square root of a non-negative rational.
    ///
    /// `sqrt(p/q) = sqrt(p*q)/q`; the radicand must fit in 10^18 so the
    /// square-free part can be extracted reliably.
    pub fn sqrt_of_ratio(r: &BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::Domain("square root of a negative rational".into()));
        }
        if r.is_zero() {
            return Ok(Self::from_ratio(BigRational::zero()));
        }
        let radicand_big = r.numer() * r.denom();
        let radicand = u64::try_from(&radicand_big)
            .map_err(|_| Error::Domain("radicand exceeds 10^18".into()))?;
        if radicand > 1_000_000_000_000_000_000 {
            return Err(Error::Domain("radicand exceeds 10^18".into()));
        }
        let (square, free) = extract_square_part(radicand);
        let coeff = BigRational::new(BigInt::from(square), r.denom().clone());
        if free == 1 {
            return Ok(Self::from_ratio(coeff));
        }
        Ok(QuadraticSurd {
            a: BigRational::zero(),
            b: coeff,
            d: free,
        })
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_ratio(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a)
    }

    pub fn neg(&self) -> Self {
        QuadraticSurd {
            a: -self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let d = self.merged_radicand(rhs);
        QuadraticSurd {
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
            d,
        }
        .normalized()
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn add_ratio(&self, r: &BigRational) -> Self {
        QuadraticSurd {
            a: &self.a + r,
            b: self.b.clone(),
            d: self.d,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let d = self.merged_radicand(rhs);
        let d_big = BigRational::from_integer(BigInt::from(d));
        QuadraticSurd {
            a: &self.a * &rhs.a + &self.b * &rhs.b * &d_big,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
            d,
        }
        .normalized()
    }

    pub fn mul_ratio(&self, r: &BigRational) -> Self {
        QuadraticSurd {
            a: &self.a * r,
            b: &self.b * r,
            d: self.d,
        }
        .normalized()
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "division by zero surd");
        // 1/(a + b sqrt d) = (a - b sqrt d) / (a^2 - b^2 d)
        let d_big = BigRational::from_integer(BigInt::from(self.d));
        let norm = &self.a * &self.a - &self.b * &self.b * &d_big;
        QuadraticSurd {
            a: &self.a / &norm,
            b: -(&self.b / &norm),
            d: self.d,
        }
        .normalized()
    }

    pub fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.recip())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact sign of the value.
    pub fn sign(&self) -> Ordering {
        if self.b.is_zero() {
            return sign_of(&self.a);
        }
        if self.a.is_zero() {
            return sign_of(&self.b);
        }
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sa == sb {
            return sa;
        }
        // Mixed signs: compare a^2 with b^2 d; the larger magnitude wins.
        let d_big = BigRational::from_integer(BigInt::from(self.d));
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * &d_big;
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    /// Exact comparison against a rational.
    pub fn cmp_ratio(&self, r: &BigRational) -> Ordering {
        self.sub(&Self::from_ratio(r.clone())).sign()
    }

    /// Comparison with another surd. Exact when the radicands match (or a
    /// side is rational); otherwise decided through refined enclosures.
    pub fn cmp(&self, rhs: &Self) -> Ordering {
        if self.d == rhs.d || self.is_rational() || rhs.is_rational() {
            return self.sub(rhs).sign();
        }
        let mut bits = 64u32;
        while bits <= 4096 {
            let (alo, ahi) = self.rational_enclosure(bits);
            let (blo, bhi) = rhs.rational_enclosure(bits);
            if ahi < blo {
                return Ordering::Less;
            }
            if bhi < alo {
                return Ordering::Greater;
            }
            bits *= 2;
        }
        panic!("surds from different fields numerically indistinguishable at 4096 bits");
    }

    /// Rational bracket `[lo, hi]` of the value, width about 2^-bits.
    pub fn rational_enclosure(&self, bits: u32) -> (BigRational, BigRational) {
        if self.b.is_zero() {
            return (self.a.clone(), self.a.clone());
        }
        // sqrt(d) in [s, s+1] / 2^bits with s = isqrt(d << 2 bits)
        let scaled = BigInt::from(self.d) << (2 * bits);
        let s = scaled.sqrt();
        let den = BigInt::one() << bits;
        let root_lo = BigRational::new(s.clone(), den.clone());
        let root_hi = BigRational::new(s + 1, den);
        let (t_lo, t_hi) = if self.b.is_positive() {
            (&self.b * &root_lo, &self.b * &root_hi)
        } else {
            (&self.b * &root_hi, &self.b * &root_lo)
        };
        (&self.a + t_lo, &self.a + t_hi)
    }

    /// Certified f64 enclosure.
    pub fn to_interval(&self) -> crate::interval::Interval {
        use crate::interval::Interval;
        let a = Interval::from_ratio(&self.a);
        if self.b.is_zero() {
            return a;
        }
        let root = Interval::from_u64(self.d).sqrt();
        a + Interval::from_ratio(&self.b) * root
    }

    fn merged_radicand(&self, rhs: &Self) -> u64 {
        if self.b.is_zero() {
            rhs.d
        } else if rhs.b.is_zero() {
            self.d
        } else {
            assert_eq!(
                self.d, rhs.d,
                "arithmetic on surds from different quadratic fields"
            );
            self.d
        }
    }

    fn normalized(mut self) -> Self {
        if self.b.is_zero() {
            self.d = 0;
        }
        self
    }
}

impl std::fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        // Clear denominators: (u + v sqrt(d)) / w
        let w = self.a.denom().lcm(self.b.denom());
        let u = (&self.a * BigRational::from_integer(w.clone())).to_integer();
        let v = (&self.b * BigRational::from_integer(w.clone())).to_integer();
        let radical = format!("\u{221a}{}", self.d);
        let coeff = |m: &num_bigint::BigUint| {
            if m == &num_bigint::BigUint::from(1u32) {
                String::new()
            } else {
                m.to_string()
            }
        };
        let body = if u.is_zero() {
            if v.is_positive() {
                format!("{}{radical}", coeff(v.magnitude()))
            } else {
                format!("-{}{radical}", coeff(v.magnitude()))
            }
        } else if v.is_positive() {
            format!("{u}+{}{radical}", coeff(v.magnitude()))
        } else {
            format!("{u}-{}{radical}", coeff(v.magnitude()))
        };
        if w.is_one() {
            write!(f, "{body}")
        } else {
            write!(f, "({body})/{w}")
        }
    }
}

fn sign_of(r: &BigRational) -> Ordering {
    if r.is_positive() {
        Ordering::Greater
    } else if r.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

/// Write `n = square^2 * free` with `free` square-free.
///
/// Trial division up to 10^6 plus a perfect-square check on the remainder;
/// complete for n <= 10^18 because a remainder free of factors below 10^6
/// has at most two prime factors.
fn extract_square_part(n: u64) -> (u64, u64) {
    let mut rest = n;
    let mut square = 1u64;
    let mut free = 1u64;
    let mut p = 2u64;
    while p <= 1_000_000 && p * p <= rest {
        if rest % p == 0 {
            let mut count = 0u32;
            while rest % p == 0 {
                rest /= p;
                count += 1;
            }
            square *= p.pow(count / 2);
            if count % 2 == 1 {
                free *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        let root = rest.sqrt();
        if root * root == rest {
            square *= root;
        } else {
            free *= rest;
        }
    }
    (square, free)
}
