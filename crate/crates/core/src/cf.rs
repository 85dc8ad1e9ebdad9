//! Exact continued-fraction arithmetic: digit streams, continuants,
//! convergents, tails, and certified digit extraction from binary
//! randomness.
//!
//! All values live in (0,1), i.e. the integer part of every expansion is 0
//! and indexing of partial quotients starts at 1.

use crate::error::{Error, Result};
use crate::extremal::BlockSpec;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// A deterministic stream of partial quotients a_1, a_2, ...
///
/// Streams are immutable; reading a digit twice always yields the same
/// value, so they are safe to share across threads.
#[derive(Clone, Debug)]
pub struct PartialQuotients {
    source: DigitSource,
}

#[derive(Clone, Debug)]
enum DigitSource {
    /// Complete expansion of a rational number (terminates).
    Rational { digits: Arc<Vec<u64>> },
    /// A finite prefix of some longer (unknown) expansion.
    Prefix { digits: Arc<Vec<u64>> },
    /// Eventually periodic: preamble then repeating block.
    Periodic { pre: Arc<Vec<u64>>, rep: Arc<Vec<u64>> },
    /// Certified prefix extracted from seeded binary randomness.
    Random {
        seed: u64,
        bits: u64,
        digits: Arc<Vec<u64>>,
    },
    /// Output of the block constructor (see the `extremal` module).
    Constructed {
        digits: Arc<Vec<u64>>,
        spec: Arc<BlockSpec>,
    },
}

fn validate(digits: &[u64]) -> Result<()> {
    for (i, &d) in digits.iter().enumerate() {
        if d < 1 {
            return Err(Error::InvalidDigit {
                index: i + 1,
                digit: d as i64,
            });
        }
    }
    Ok(())
}

impl PartialQuotients {
    /// Complete expansion of a rational: the digit list is the whole number.
    pub fn rational(digits: Vec<u64>) -> Result<Self> {
        validate(&digits)?;
        Ok(PartialQuotients {
            source: DigitSource::Rational {
                digits: Arc::new(digits),
            },
        })
    }

    /// A finite prefix of an expansion whose continuation is unknown.
    pub fn prefix(digits: Vec<u64>) -> Result<Self> {
        validate(&digits)?;
        Ok(PartialQuotients {
            source: DigitSource::Prefix {
                digits: Arc::new(digits),
            },
        })
    }

    /// Eventually periodic stream: `pre` then `rep` repeated forever.
    pub fn periodic(pre: Vec<u64>, rep: Vec<u64>) -> Result<Self> {
        if rep.is_empty() {
            return Err(Error::Domain("empty repeating block".into()));
        }
        validate(&pre)?;
        validate(&rep)?;
        Ok(PartialQuotients {
            source: DigitSource::Periodic {
                pre: Arc::new(pre),
                rep: Arc::new(rep),
            },
        })
    }

    /// The all-ones stream of the golden-ratio conjugate.
    pub fn golden() -> Self {
        Self::periodic(vec![], vec![1]).unwrap()
    }

    /// Constant stream z, z, z, ...
    pub fn constant(z: u64) -> Result<Self> {
        Self::periodic(vec![], vec![z])
    }

    /// Exact expansion of a rational in (0,1).
    pub fn from_ratio(r: &BigRational) -> Result<Self> {
        if !r.is_positive() || *r >= BigRational::one() {
            return Err(Error::Domain(format!("{r} is not inside (0,1)")));
        }
        let (digits, complete) = rational_digits(
            r.numer().magnitude().clone(),
            r.denom().magnitude().clone(),
        );
        if !complete {
            return Err(Error::Domain("partial quotient exceeds u64".into()));
        }
        Self::rational(digits)
    }

    pub(crate) fn constructed(digits: Vec<u64>, spec: Arc<BlockSpec>) -> Self {
        PartialQuotients {
            source: DigitSource::Constructed {
                digits: Arc::new(digits),
                spec,
            },
        }
    }

    /// Digit a_nu (1-based).
    pub fn digit(&self, nu: usize) -> Result<u64> {
        if nu == 0 {
            return Err(Error::Domain("digit index starts at 1".into()));
        }
        match &self.source {
            DigitSource::Rational { digits }
            | DigitSource::Prefix { digits }
            | DigitSource::Random { digits, .. }
            | DigitSource::Constructed { digits, .. } =>

                digits.get(nu - 1).copied().ok_or(Error::NeedsMoreDigits {
                    requested: nu,
                    available: digits.len(),
                }),
            DigitSource::Periodic { pre, rep } => {
                if nu <= pre.len() {
                    Ok(pre[nu - 1])
                } else {
                    Ok(rep[(nu - 1 - pre.len()) % rep.len()])
                }
            }
        }
    }

    pub fn digits_up_to(&self, n: usize) -> Result<Vec<u64>> {
        (1..=n).map(|nu| self.digit(nu)).collect()
    }

    /// Number of readable digits; `None` when the stream is unbounded.
    pub fn available(&self) -> Option<usize> {
        match &self.source {
            DigitSource::Rational { digits }
            | DigitSource::Prefix { digits }
            | DigitSource::Random { digits, .. }
            | DigitSource::Constructed { digits, .. } => Some(digits.len()),
            DigitSource::Periodic { .. } => None,
        }
    }

    /// True when the digit list is the complete expansion of a rational.
    pub fn is_terminating(&self) -> bool {
        matches!(&self.source, DigitSource::Rational { .. })
    }

    /// Certified digit count for randomness-backed streams.
    pub fn certified_count(&self) -> Option<usize> {
        match &self.source {
            DigitSource::Random { digits, .. } => Some(digits.len()),
            _ => None,
        }
    }

    /// Block-construction metadata when this stream came from the constructor.
    pub fn block_spec(&self) -> Option<&BlockSpec> {
        match &self.source {
            DigitSource::Constructed { spec, .. } => Some(spec),
            _ => None,
        }
    }

    /// Exact value for terminating streams.
    pub fn to_ratio(&self) -> Option<BigRational> {
        if !self.is_terminating() {
            return None;
        }
        let digits = self.digits_up_to(self.available().unwrap()).ok()?;
        let mut value = BigRational::zero();
        for &a in digits.iter().rev() {
            value = (BigRational::from_integer(BigInt::from(a)) + value).recip();
        }
        Some(value)
    }

    /// Short provenance label for logs and config echoes.
    pub fn source_label(&self) -> String {
        match &self.source {
            DigitSource::Rational { .. } => "rational".into(),
            DigitSource::Prefix { .. } => "prefix".into(),
            DigitSource::Periodic { .. } => "periodic".into(),
            DigitSource::Random { seed, bits, .. } => format!("random:seed={seed},bits={bits}"),
            DigitSource::Constructed { spec, .. } => format!("constructed:d={}", spec.d),
        }
    }

    /// Log-friendly digit rendering: comma-separated, truncated with a
    /// trailing ellipsis when the stream continues past `max`.
    pub fn digits_preview(&self, max: usize) -> String {
        let mut out = String::new();
        let shown = match self.available() {
            Some(len) => len.min(max),
            None => max,
        };
        for nu in 1..=shown {
            if nu > 1 {
                out.push(',');
            }
            out.push_str(&self.digit(nu).unwrap().to_string());
        }
        let continues = match self.available() {
            Some(len) => len > max,
            None => true,
        };
        if continues {
            out.push_str(",\u{2026}");
        }
        out
    }
}

/// One row of the continuant table: exact convergent p_nu / q_nu.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergentPair {
    pub nu: i64,
    pub p: BigInt,
    pub q: BigInt,
}

/// Streaming generator for convergents, starting at nu = -1.
pub struct ConvergentIter<'a> {
    pq: &'a PartialQuotients,
    nu: i64,
    prev: (BigInt, BigInt),
    curr: (BigInt, BigInt),
}

impl<'a> ConvergentIter<'a> {
    pub fn new(pq: &'a PartialQuotients) -> Self {
        ConvergentIter {
            pq,
            nu: -1,
            prev: (BigInt::one(), BigInt::zero()),  // (p_{-1}, q_{-1})
            curr: (BigInt::zero(), BigInt::one()),  // (p_0, q_0)
        }
    }

    /// Next pair, or an error once the digit stream is exhausted.
    pub fn next_pair(&mut self) -> Result<ConvergentPair> {
        if self.nu == -1 {
            self.nu = 0;
            return Ok(ConvergentPair {
                nu: -1,
                p: BigInt::one(),
                q: BigInt::zero(),
            });
        }
        if self.nu == 0 {
            self.nu = 1;
            return Ok(ConvergentPair {
                nu: 0,
                p: BigInt::zero(),
                q: BigInt::one(),
            });
        }
        let a = self.pq.digit(self.nu as usize)?;
        let p = BigInt::from(a) * &self.curr.0 + &self.prev.0;
        let q = BigInt::from(a) * &self.curr.1 + &self.prev.1;
        self.prev = std::mem::replace(&mut self.curr, (p.clone(), q.clone()));
        let nu = self.nu;
        self.nu += 1;
        Ok(ConvergentPair { nu, p, q })
    }
}

/// Convergent pairs for nu = -1..=n.
pub fn convergents(pq: &PartialQuotients, n: usize) -> Result<Vec<ConvergentPair>> {
    let mut iter = ConvergentIter::new(pq);
    (0..n + 2).map(|_| iter.next_pair()).collect()
}

/// The reversed tail q_{nu-1}/q_nu = [0; a_nu, ..., a_1], exact.
#[derive(Clone, Debug, PartialEq)]
pub struct ReversedTail {
    pub nu: usize,
    pub value: BigRational,
}

pub fn reversed_tail(pq: &PartialQuotients, nu: usize) -> Result<ReversedTail> {
    if nu == 0 {
        return Ok(ReversedTail {
            nu,
            value: BigRational::zero(),
        });
    }
    let pairs = convergents(pq, nu)?;
    let q_prev = &pairs[nu].q; // index offset: pairs[k] has nu = k-1
    let q_curr = &pairs[nu + 1].q;
    Ok(ReversedTail {
        nu,
        value: BigRational::new(q_prev.clone(), q_curr.clone()),
    })
}

/// Certified exact-rational bracket for the forward tail
/// alpha_nu = [a_nu; a_{nu+1}, ...].
#[derive(Clone, Debug, PartialEq)]
pub struct TailEnclosure {
    pub nu: usize,
    pub lo: BigRational,
    pub hi: BigRational,
}

impl TailEnclosure {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn to_interval(&self) -> crate::interval::Interval {
        crate::interval::Interval::from_ratio(&self.lo)
            .hull(&crate::interval::Interval::from_ratio(&self.hi))
    }
}

/// Bracket alpha_nu from the digits a_nu..a_{nu+depth}.
///
/// The truncated tail is folded backwards starting from the unit bracket
/// [a_k, a_k + 1]; because x -> a + 1/x is decreasing, the endpoints swap at
/// each step and the final interval is the span between the truncation's two
/// final convergents. For a terminating stream whose remaining digits all
/// fit inside `depth` the bracket collapses to the exact tail value.
pub fn tail_enclosure(pq: &PartialQuotients, nu: usize, depth: usize) -> Result<TailEnclosure> {
    if nu == 0 {
        return Err(Error::Domain("forward tails start at index 1".into()));
    }
    pq.digit(nu)?; // surface NeedsMoreDigits early
    let mut last = nu + depth;
    let mut exact = false;
    if let Some(avail) = pq.available() {
        if last > avail {
            last = avail;
            exact = pq.is_terminating();
            if last < nu {
                return Err(Error::NeedsMoreDigits {
                    requested: nu,
                    available: avail,
                });
            }
        }
    }
    let a_last = BigRational::from_integer(BigInt::from(pq.digit(last)?));
    let (mut lo, mut hi) = if exact {
        (a_last.clone(), a_last)
    } else {
        (a_last.clone(), a_last + BigRational::one())
    };
    for j in (nu..last).rev() {
        let a = BigRational::from_integer(BigInt::from(pq.digit(j)?));
        let new_lo = &a + hi.recip();
        let new_hi = &a + lo.recip();
        lo = new_lo;
        hi = new_hi;
    }
    Ok(TailEnclosure { nu, lo, hi })
}

/// Canonical continued-fraction digits of num/den in [0,1) by the Euclidean
/// algorithm. The second component is false if a quotient overflowed u64 (the
/// expansion is then truncated just before it).
pub fn rational_digits(mut num: BigUint, mut den: BigUint) -> (Vec<u64>, bool) {
    let mut digits = Vec::new();
    while !num.is_zero() {
        let (q, r) = den.div_rem(&num);
        match u64::try_from(&q) {
            Ok(d) => digits.push(d),
            Err(_) => return (digits, false),
        }
        den = std::mem::replace(&mut num, r);
    }
    (digits, true)
}

/// Result of certified digit extraction from `bits` random bits.
#[derive(Clone, Debug)]
pub struct ExtractedDigits {
    pub stream: PartialQuotients,
    pub certified_count: usize,
    pub bits: u64,
    pub seed: u64,
}

/// Draw x uniformly among B-bit dyadics and return the digit prefix shared by
/// the expansions of x and x + 2^-B. Every real in (x, x + 2^-B) has that
/// prefix, so the digits are trusted for a Lebesgue-uniform sample at finite
/// precision. Deterministic in (bits, seed).
pub fn extract_digits(bits: u64, seed: u64) -> Result<ExtractedDigits> {
    if bits < 64 {
        return Err(Error::Domain("need at least 64 random bits".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_bytes = bits.div_ceil(8) as usize;
    let mut bytes = vec![0u8; n_bytes];
    rng.fill_bytes(&mut bytes);
    let mut k = BigUint::from_bytes_le(&bytes);
    // Trim to exactly `bits` bits.
    let excess = (n_bytes as u64) * 8 - bits;
    k >>= excess;
    let den = BigUint::one() << bits;
    let (da, _) = rational_digits(k.clone(), den.clone());
    let (db, _) = rational_digits(&k + BigUint::one(), den);
    let certified = da
        .iter()
        .zip(db.iter())
        .take_while(|(a, b)| a == b)
        .count();
    if certified < 1 {
        return Err(Error::InsufficientPrecision {
            bits,
            certified,
            needed: 1,
        });
    }
    let digits = da[..certified].to_vec();
    Ok(ExtractedDigits {
        stream: PartialQuotients {
            source: DigitSource::Random {
                seed,
                bits,
                digits: Arc::new(digits),
            },
        },
        certified_count: certified,
        bits,
        seed,
    })
}
