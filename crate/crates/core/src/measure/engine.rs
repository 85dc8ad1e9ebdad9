//! Interval evaluation engine for segment summands and their partial sums.
//!
//! All bulk computation runs on f64 enclosures. Backward tail sweeps and the
//! forward reversed-tail recurrence are both contractions, so enclosure
//! widths stay near machine epsilon independently of the trace length; only
//! summation accumulates width, linearly and harmlessly.

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::cf::PartialQuotients;

/// How the digit slice ends.
#[derive(Clone, Copy, Debug)]
pub enum TailEnd {
    /// The slice is a truncation; the final tail is only known to lie in
    /// [a_last, a_last + 1]. Summands may be requested up to len - 1.
    Truncated,
    /// The slice is the complete expansion of a rational; the final tail is
    /// exactly a_last and the value's tail beyond the slice is infinite.
    TerminatedRational,
    /// The tail following the last digit is a known value in (1, inf).
    Value(Interval),
    /// The tail following the last digit is +infinity (limit case).
    Infinite,
}

/// Certified traces of tails, reversed tails, summands and partial sums.
#[derive(Clone, Debug)]
pub struct GTrace {
    /// tails[j] encloses alpha_{j+1} = [x_{j+1}; x_{j+2}, ...]
    pub tails: Vec<Interval>,
    /// alpha_star[j] encloses alpha*_{j+1} = [0; x_{j+1}, ..., x_1]
    pub alpha_star: Vec<Interval>,
    /// summands[j] encloses S_{j+1}
    pub summands: Vec<Interval>,
    /// partial_sums[j] encloses G_{j+1}
    pub partial_sums: Vec<Interval>,
}

impl GTrace {
    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    /// G_n (n is 1-based; n = 0 gives the empty sum).
    pub fn partial_sum(&self, n: usize) -> Interval {
        if n == 0 {
            Interval::ZERO
        } else {
            self.partial_sums[n - 1]
        }
    }
}

/// Backward sweep producing enclosures of alpha_1 .. alpha_len.
///
/// Seeds the last tail according to `end` and folds x -> digit + 1/x
/// backwards. The map is decreasing, so interval arithmetic keeps the
/// endpoints ordered automatically, and each step contracts the width.
pub fn tail_sweep(digits: &[Interval], end: TailEnd) -> Vec<Interval> {
    let len = digits.len();
    let mut tails = vec![Interval::ZERO; len];
    if len == 0 {
        return tails;
    }
    tails[len - 1] = match end {
        Truncated => digits[len - 1] + Interval::new(0.0, 1.0),
        TerminatedRational | Infinite => digits[len - 1],
        Value(x) => digits[len - 1] + x.recip(),
    };
    for j in (0..len - 1).rev() {
        tails[j] = digits[j] + tails[j + 1].recip();
    }
    tails
}
use TailEnd::*;

/// Forward recurrence alpha*_nu = 1/(x_nu + alpha*_{nu-1}), alpha*_0 = 0.
pub fn alpha_star_sweep(digits: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::with_capacity(digits.len());
    let mut prev = Interval::ZERO;
    for &a in digits {
        let next = (a + prev).recip();
        out.push(next);
        prev = next;
    }
    out
}

/// One summand from its reversed tail and forward tail:
/// (1 - alpha*) * alpha_next / (alpha_next + alpha*).
pub fn summand(alpha_star: Interval, alpha_next: Option<Interval>) -> Interval {
    let one_minus = Interval::ONE - alpha_star;
    match alpha_next {
        Some(t) => one_minus * t / (t + alpha_star),
        // alpha_next -> infinity limit
        None => one_minus,
    }
}

/// Evaluate summands S_1..S_n and partial sums G_1..G_n over a digit slice.
///
/// With `TailEnd::Truncated` the slice must be strictly longer than `n`; the
/// extra digits serve as the certification depth for the deepest tail. With
/// the other endings `n` may equal the slice length.
pub fn g_trace(digits: &[Interval], n: usize, end: TailEnd) -> Result<GTrace> {
    let len = digits.len();
    let enough = match end {
        Truncated => len > n,
        _ => len >= n,
    };
    if !enough {
        return Err(Error::NeedsMoreDigits {
            requested: n + 1,
            available: len,
        });
    }
    let tails = tail_sweep(digits, end);
    let alpha_star = alpha_star_sweep(digits);
    let mut summands = Vec::with_capacity(n);
    let mut partial_sums = Vec::with_capacity(n);
    let mut acc = Interval::ZERO;
    for nu in 1..=n {
        let alpha_next = if nu < len {
            Some(tails[nu])
        } else {
            match end {
                Value(x) => Some(x),
                Infinite | TerminatedRational => None,
                Truncated => unreachable!("truncated end requires len > n"),
            }
        };
        let s = summand(alpha_star[nu - 1], alpha_next);
        acc += s;
        summands.push(s);
        partial_sums.push(acc);
    }
    Ok(GTrace {
        tails,
        alpha_star,
        summands,
        partial_sums,
    })
}

/// Digit slice of a stream converted to exact point intervals.
pub fn digit_intervals(pq: &PartialQuotients, count: usize) -> Result<Vec<Interval>> {
    (1..=count)
        .map(|nu| pq.digit(nu).map(Interval::from_u64))
        .collect()
}

/// Fetch the digit slice and tail ending appropriate for evaluating G_n on
/// this stream with the given certification depth.
pub fn slice_for(
    pq: &PartialQuotients,
    n: usize,
    depth: usize,
) -> Result<(Vec<Interval>, TailEnd)> {
    let want = n + depth + 1;
    match pq.available() {
        Some(avail) if avail < want => {
            if pq.is_terminating() {
                if avail < n {
                    Err(Error::NeedsMoreDigits {
                        requested: n,
                        available: avail,
                    })
                } else if avail == n {
                    Ok((digit_intervals(pq, avail)?, TailEnd::TerminatedRational))
                } else {
                    // Whole remainder fits: the deepest tail is exact.
                    Ok((digit_intervals(pq, avail)?, TailEnd::TerminatedRational))
                }
            } else if avail > n {
                // Shallower certification than requested, still sound.
                Ok((digit_intervals(pq, avail)?, TailEnd::Truncated))
            } else {
                Err(Error::NeedsMoreDigits {
                    requested: want,
                    available: avail,
                })
            }
        }
        _ => Ok((digit_intervals(pq, want)?, TailEnd::Truncated)),
    }
}
