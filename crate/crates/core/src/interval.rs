//! Certified floating-point enclosures.
//!
//! An [`Interval`] is a pair `lo <= hi` of `f64` endpoints that is guaranteed
//! to contain the real number being tracked. Every arithmetic operation
//! rounds outward by one ulp, which over-covers the correctly-rounded IEEE
//! result, so containment is preserved end to end. Conversions from exact
//! big integers and rationals produce directed brackets, never a nearest
//! rounding.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

/// A closed interval `[lo, hi]` certified to contain the tracked value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// A number together with a rigorous absolute error bound.
///
/// The true quantity lies in `[value - err, value + err]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasuredValue {
    pub value: f64,
    pub err: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    /// Exact point interval. `x` must be finite.
    pub fn point(x: f64) -> Self {
        debug_assert!(x.is_finite());
        Interval { lo: x, hi: x }
    }

    /// Interval with the given endpoints (`lo <= hi`).
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Exact interval for an unsigned integer (widened only above 2^53).
    pub fn from_u64(n: u64) -> Self {
        let f = n as f64;
        if f as u64 == n && n < (1 << 53) {
            Interval { lo: f, hi: f }
        } else {
            Interval {
                lo: prev(f),
                hi: next(f),
            }
        }
    }

    /// One-ulp bracket around a correctly rounded constant such as
    /// `std::f64::consts::LN_2` (true value within half an ulp).
    pub fn bracketing(x: f64) -> Self {
        Interval {
            lo: prev(x),
            hi: next(x),
        }
    }

    /// Certified enclosure of ln 2.
    pub fn ln_2() -> Self {
        Self::bracketing(std::f64::consts::LN_2)
    }

    /// Certified enclosure of pi.
    pub fn pi() -> Self {
        Self::bracketing(std::f64::consts::PI)
    }

    /// Certified enclosure of the golden ratio (1+sqrt 5)/2.
    pub fn golden_ratio() -> Self {
        (Interval::ONE + Interval::point(5.0).sqrt()) / Interval::point(2.0)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        next(self.hi - self.lo)
    }

    pub fn midpoint(&self) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            0.5 * self.lo + 0.5 * self.hi
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Exact containment test for a rational (endpoints converted exactly).
    pub fn contains_ratio(&self, r: &BigRational) -> bool {
        let above_lo = self.lo == f64::NEG_INFINITY
            || BigRational::from_float(self.lo).is_some_and(|lo| lo <= *r);
        let below_hi =
            self.hi == f64::INFINITY || BigRational::from_float(self.hi).is_some_and(|hi| *r <= hi);
        above_lo && below_hi
    }

    /// True if every point of `self` is strictly below every point of `rhs`.
    pub fn strictly_below(&self, rhs: &Interval) -> bool {
        self.hi < rhs.lo
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval {
                lo: 0.0,
                hi: self.hi.max(-self.lo),
            }
        }
    }

    /// Reciprocal; the operand must not contain 0.
    pub fn recip(self) -> Interval {
        if self.lo <= 0.0 && self.hi >= 0.0 {
            return Interval::ENTIRE;
        }
        Interval {
            lo: prev(1.0 / self.hi),
            hi: next(1.0 / self.lo),
        }
    }

    /// Square root; negative parts of the operand are clipped at 0.
    pub fn sqrt(self) -> Interval {
        debug_assert!(self.hi >= 0.0, "sqrt of negative interval");
        let lo = if self.lo <= 0.0 {
            0.0
        } else {
            prev(self.lo.sqrt())
        };
        Interval {
            lo,
            hi: next(self.hi.sqrt()),
        }
    }

    /// Natural logarithm; the operand must be positive. Widened two ulps per
    /// endpoint to cover a faithfully rounded libm.
    pub fn ln(self) -> Interval {
        debug_assert!(self.lo > 0.0, "ln of non-positive interval");
        Interval {
            lo: prev(prev(self.lo.ln())),
            hi: next(next(self.hi.ln())),
        }
    }

    pub fn min(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn max(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Certified directed bracket of `num/den`, `den > 0`.
    pub fn from_big_ratio(num: &BigInt, den: &BigInt) -> Interval {
        debug_assert!(den.is_positive(), "denominator must be positive");
        if num.is_zero() {
            return Interval::ZERO;
        }
        let negative = num.sign() == Sign::Minus;
        let a = num.abs().into_parts().1;
        let b = den.magnitude().clone();
        // Scale so that floor(a * 2^sigma / b) occupies roughly 63 bits, then
        // a/b lies in [m, m+1] * 2^-sigma exactly.
        let sigma: i64 = 63 - (a.bits() as i64 - b.bits() as i64);
        let m_big = if sigma >= 0 {
            (a << sigma as u64) / b
        } else {
            a / (b << (-sigma) as u64)
        };
        let m: u64 = u64::try_from(&m_big).expect("scaled quotient fits in 64 bits");
        let lo = mul_pow2_dir(u64_to_f64_down(m), -sigma, false);
        let hi = mul_pow2_dir(u64_to_f64_up_incremented(m), -sigma, true);
        if negative {
            Interval { lo: -hi, hi: -lo }
        } else {
            Interval { lo, hi }
        }
    }

    pub fn from_ratio(r: &BigRational) -> Interval {
        Interval::from_big_ratio(r.numer(), r.denom())
    }

    /// Certified bracket of a (possibly huge) integer.
    pub fn from_bigint(n: &BigInt) -> Interval {
        Interval::from_big_ratio(n, &BigInt::from(1))
    }

    /// Certified enclosure of ln n for a positive big integer.
    pub fn ln_bigint(n: &BigInt) -> Interval {
        debug_assert!(n.is_positive());
        let bits = n.bits();
        if bits <= 53 {
            let exact = n.to_string().parse::<f64>().unwrap();
            return Interval::point(exact).ln();
        }
        // n in [m, m+1] * 2^k with m holding the top 53 bits.
        let k = bits - 53;
        let m_big = n >> k;
        let m = u64::try_from(&m_big).unwrap();
        let mantissa = Interval::new(m as f64, (m + 1) as f64);
        mantissa.ln() + Interval::ln_2() * Interval::from_u64(k)
    }

    pub fn to_measured(&self) -> MeasuredValue {
        let value = self.midpoint();
        let err = next((self.hi - value).max(value - self.lo)).max(0.0);
        MeasuredValue { value, err }
    }
}

impl MeasuredValue {
    pub fn exact(value: f64) -> Self {
        MeasuredValue { value, err: 0.0 }
    }

    pub fn to_interval(&self) -> Interval {
        Interval::new(prev(self.value - self.err), next(self.value + self.err))
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: prev(self.lo + rhs.lo),
            hi: next(self.hi + rhs.hi),
        }
    }
}

impl std::ops::Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: prev(self.lo - rhs.hi),
            hi: next(self.hi - rhs.lo),
        }
    }
}

impl std::ops::Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let c = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        if c.iter().any(|x| x.is_nan()) {
            return Interval::ENTIRE;
        }
        let lo = c.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let hi = c.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        Interval {
            lo: prev(lo),
            hi: next(hi),
        }
    }
}

impl std::ops::Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        self * rhs.recip()
    }
}

impl std::ops::AddAssign for Interval {
    fn add_assign(&mut self, rhs: Interval) {
        *self = *self + rhs;
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

fn next(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        x
    } else {
        x.next_up()
    }
}

fn prev(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        x
    } else {
        x.next_down()
    }
}

/// Largest f64 not exceeding the integer `m`.
fn u64_to_f64_down(m: u64) -> f64 {
    let f = m as f64; // rounds to nearest
    if f > m as f64 || (f.is_finite() && f as u128 > m as u128) {
        f.next_down()
    } else {
        f
    }
}

/// Smallest f64 not below the integer `m + 1`.
fn u64_to_f64_up_incremented(m: u64) -> f64 {
    let n = m as u128 + 1;
    let f = n as f64;
    if (f as u128) < n {
        f.next_up()
    } else {
        f
    }
}

/// Multiply by 2^e with directed rounding (`up` selects the bound side).
fn mul_pow2_dir(x: f64, e: i64, up: bool) -> f64 {
    let mut v = x;
    let mut rem = e;
    while rem != 0 {
        let step = rem.clamp(-1000, 1000);
        let factor = 2f64.powi(step as i32);
        let w = v * factor;
        let exact = w.is_finite() && w / factor == v;
        v = if exact {
            w
        } else if up {
            next(w)
        } else if w == 0.0 && x > 0.0 {
            0.0 // positive underflow: 0 is already a valid lower bound
        } else {
            prev(w)
        };
        if up && v == f64::INFINITY {
            return v;
        }
        if !up {
            if v == f64::NEG_INFINITY {
                return v;
            }
            if v == f64::INFINITY {
                return f64::MAX;
            }
        }
        if up && v == 0.0 && x > 0.0 {
            return f64::MIN_POSITIVE;
        }
        rem -= step;
    }
    v
}
