//! Exact evaluation of the irrationality measure function, its segment
//! summands, partial sums, and the integral with certified error.
//!
//! The measure function is the step function psi(t) = min ||q alpha|| over
//! integers 1 <= q <= t; it is constant between consecutive convergent
//! denominators, which makes the integral a finite sum of segment
//! contributions plus one boundary term.

pub mod engine;

use crate::cf::{tail_enclosure, ConvergentIter, PartialQuotients};
use crate::error::{Error, Result};
use crate::interval::Interval;
use engine::{g_trace, slice_for, GTrace};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Default certification depth for forward tails: by the continuant growth
/// bound the bracket width is below 2^-38, far under every tolerance used in
/// the test suites.
pub const DEFAULT_TAIL_DEPTH: usize = 40;

/// The segment q_N <= t < q_{N+1} that contains t.
#[derive(Clone, Debug)]
pub struct Segment {
    pub n: usize,
    pub q_prev: BigInt,
    pub q_n: BigInt,
    /// None when the stream terminates at n (rational value, psi = 0 onward).
    pub q_next: Option<BigInt>,
}

/// Value of the measure function on one segment.
#[derive(Clone, Debug)]
pub struct PsiValue {
    pub nu: usize,
    pub value: Interval,
}

/// Integral split into the certified partial sum and boundary term.
#[derive(Clone, Debug)]
pub struct IntegralBreakdown {
    pub n: usize,
    pub partial_sum: Interval,
    pub boundary: Interval,
    pub total: Interval,
}

/// Index N with q_N <= t < q_{N+1} (the largest N with q_N <= t).
pub fn segment_index(pq: &PartialQuotients, t: &BigRational) -> Result<Segment> {
    if *t < BigRational::one() {
        return Err(Error::Domain(format!("t = {t} must be at least 1")));
    }
    let mut iter = ConvergentIter::new(pq);
    let minus_one = iter.next_pair()?;
    let zero = iter.next_pair()?;
    let mut q_prev = minus_one.q;
    let mut q_n = zero.q;
    let mut n = 0usize;
    loop {
        match iter.next_pair() {
            Ok(pair) => {
                if BigRational::from_integer(pair.q.clone()) > *t {
                    return Ok(Segment {
                        n,
                        q_prev,
                        q_n,
                        q_next: Some(pair.q),
                    });
                }
                q_prev = std::mem::replace(&mut q_n, pair.q);
                n = pair.nu as usize;
            }
            Err(Error::NeedsMoreDigits { requested, available }) => {
                if pq.is_terminating() {
                    // The value is rational and t sits at or past the last
                    // denominator; the measure function is 0 from there on.
                    return Ok(Segment {
                        n,
                        q_prev,
                        q_n,
                        q_next: None,
                    });
                }
                return Err(Error::NeedsMoreDigits { requested, available });
            }
            Err(e) => return Err(e),
        }
    }
}

/// Enclosure of psi(t) = 1/(q_N alpha_{N+1} + q_{N-1}); constant on the
/// segment [q_N, q_{N+1}).
pub fn psi_at(pq: &PartialQuotients, t: &BigRational, depth: usize) -> Result<PsiValue> {
    let seg = segment_index(pq, t)?;
    if seg.q_next.is_none() {
        return Ok(PsiValue {
            nu: seg.n,
            value: Interval::ZERO,
        });
    }
    let tail = tail_enclosure(pq, seg.n + 1, depth)?;
    let denom = Interval::from_bigint(&seg.q_n) * tail.to_interval()
        + Interval::from_bigint(&seg.q_prev);
    Ok(PsiValue {
        nu: seg.n,
        value: denom.recip(),
    })
}

/// Enclosure of the segment summand S_nu.
pub fn summand_s(pq: &PartialQuotients, nu: usize, depth: usize) -> Result<Interval> {
    if nu == 0 {
        return Err(Error::Domain("summands start at nu = 1".into()));
    }
    let alpha_star = crate::cf::reversed_tail(pq, nu)?;
    let star = Interval::from_ratio(&alpha_star.value);
    let next = match pq.available() {
        Some(avail) if pq.is_terminating() && nu == avail => None,
        _ => Some(tail_enclosure(pq, nu + 1, depth)?.to_interval()),
    };
    Ok(engine::summand(star, next))
}

/// Enclosure of G_n, the sum of the first n segment summands.
pub fn partial_sum_g(pq: &PartialQuotients, n: usize, depth: usize) -> Result<Interval> {
    if n == 0 {
        return Ok(Interval::ZERO);
    }
    Ok(trace_for(pq, n, depth)?.partial_sum(n))
}

/// Full certified trace of S_1..S_n and G_1..G_n for this stream.
pub fn trace_for(pq: &PartialQuotients, n: usize, depth: usize) -> Result<GTrace> {
    let (digits, end) = slice_for(pq, n, depth)?;
    g_trace(&digits, n, end)
}

/// Certified enclosure of the integral of psi from 1 to t.
pub fn integral_i(pq: &PartialQuotients, t: &BigRational, depth: usize) -> Result<IntegralBreakdown> {
    let seg = segment_index(pq, t)?;
    let partial_sum = if seg.n == 0 {
        Interval::ZERO
    } else {
        partial_sum_g(pq, seg.n, depth)?
    };
    let boundary = boundary_term(pq, t, &seg, depth)?;
    Ok(IntegralBreakdown {
        n: seg.n,
        partial_sum,
        boundary,
        total: partial_sum + boundary,
    })
}

/// The boundary term (t - q_N) psi_N in its normalized form
/// (t - q_N)/q_{N+1} * alpha_{N+2} / (alpha_{N+2} + alpha*_{N+1}),
/// which stays O(1) even when the denominators are astronomically large.
fn boundary_term(
    pq: &PartialQuotients,
    t: &BigRational,
    seg: &Segment,
    depth: usize,
) -> Result<Interval> {
    let Some(q_next) = &seg.q_next else {
        return Ok(Interval::ZERO); // rational value, psi = 0 past q_N
    };
    let t_minus_qn = t - BigRational::from_integer(seg.q_n.clone());
    if t_minus_qn.is_zero() {
        return Ok(Interval::ZERO);
    }
    let u = Interval::from_ratio(&(t_minus_qn / BigRational::from_integer(q_next.clone())));
    let star_next = Interval::from_big_ratio(&seg.q_n, q_next);
    let factor = match pq.available() {
        Some(avail) if pq.is_terminating() && seg.n + 2 > avail => Interval::ONE,
        _ => {
            let tail2 = tail_enclosure(pq, seg.n + 2, depth)?.to_interval();
            tail2 / (tail2 + star_next)
        }
    };
    Ok(u * factor)
}

/// One step of the measure function: constant value on [t_start, t_end).
#[derive(Clone, Debug)]
pub struct PsiSegment {
    pub nu: usize,
    pub t_start: BigRational,
    pub t_end: BigRational,
    pub value: Interval,
}

/// Frozen header for step-function trace CSV output.
pub const PSI_TRACE_CSV_HEADER: &str = "nu,t_start,t_end,psi_lo,psi_hi";

impl PsiSegment {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.nu,
            ratio_decimal(&self.t_start),
            ratio_decimal(&self.t_end),
            self.value.lo(),
            self.value.hi()
        )
    }
}

fn ratio_decimal(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        let iv = Interval::from_ratio(r);
        iv.midpoint().to_string()
    }
}

/// All steps of the measure function on [1, t]: the segments between
/// consecutive denominators, clipped to the requested range.
pub fn psi_trace(pq: &PartialQuotients, t: &BigRational, depth: usize) -> Result<Vec<PsiSegment>> {
    let seg = segment_index(pq, t)?;
    let pairs = crate::cf::convergents(pq, seg.n + 1)
        .or_else(|_| crate::cf::convergents(pq, seg.n))?;
    let one = BigRational::one();
    let mut out = Vec::new();
    for nu in 0..=seg.n {
        let q_nu = BigRational::from_integer(pairs[nu + 1].q.clone());
        let next_end = if nu + 2 < pairs.len() {
            BigRational::from_integer(pairs[nu + 2].q.clone()).min(t.clone())
        } else {
            t.clone()
        };
        let t_start = q_nu.max(one.clone());
        if t_start >= next_end {
            continue;
        }
        let value = if pq.is_terminating() && nu + 1 > pq.available().unwrap_or(0) {
            Interval::ZERO
        } else {
            let tail = tail_enclosure(pq, nu + 1, depth)?;
            (Interval::from_bigint(&pairs[nu + 1].q) * tail.to_interval()
                + Interval::from_bigint(&pairs[nu].q))
            .recip()
        };
        out.push(PsiSegment {
            nu,
            t_start,
            t_end: next_end,
            value,
        });
    }
    Ok(out)
}

/// Frozen header for integral/partial-sum trace CSV output.
pub const TRACE_CSV_HEADER: &str = "nu,q_nu,S_nu_lo,S_nu_hi,G_nu_lo,G_nu_hi";

/// One row of the integral trace.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub nu: usize,
    pub q_nu: BigInt,
    pub summand: Interval,
    pub partial_sum: Interval,
}

impl TraceRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.nu,
            self.q_nu,
            self.summand.lo(),
            self.summand.hi(),
            self.partial_sum.lo(),
            self.partial_sum.hi()
        )
    }
}

/// Certified trace rows for nu = 1..=n.
pub fn integral_trace(pq: &PartialQuotients, n: usize, depth: usize) -> Result<Vec<TraceRow>> {
    let trace = trace_for(pq, n, depth)?;
    let pairs = crate::cf::convergents(pq, n)?;
    Ok((1..=n)
        .map(|nu| TraceRow {
            nu,
            q_nu: pairs[nu + 1].q.clone(),
            summand: trace.summands[nu - 1],
            partial_sum: trace.partial_sums[nu - 1],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    const TAU_SQUARED: f64 = 0.38196601125010515; // (3 - sqrt 5)/2

    #[test]
    fn segment_examples() {
        let golden = PartialQuotients::golden();
        assert_eq!(segment_index(&golden, &ratio(1, 1)).unwrap().n, 1);
        assert_eq!(segment_index(&golden, &ratio(25, 2)).unwrap().n, 5);
        let half = PartialQuotients::rational(vec![2]).unwrap();
        assert_eq!(segment_index(&half, &ratio(1, 1)).unwrap().n, 0);
    }

    #[test]
    fn segment_requires_digits_for_prefix_streams() {
        let pq = PartialQuotients::prefix(vec![1, 1, 1]).unwrap();
        assert!(matches!(
            segment_index(&pq, &ratio(1000, 1)),
            Err(Error::NeedsMoreDigits { .. })
        ));
    }

    #[test]
    fn psi_is_constant_on_segments_and_decreasing_across_them() {
        let golden = PartialQuotients::golden();
        let at = |t: BigRational| psi_at(&golden, &t, 40).unwrap();
        let a = at(ratio(1, 1));
        let b = at(ratio(3, 2));
        assert_eq!(a.nu, 1);
        assert_eq!(b.nu, 1);
        assert!(a.value.contains(TAU_SQUARED));
        assert!(b.value.contains(TAU_SQUARED));
        let c = at(ratio(2, 1));
        assert_eq!(c.nu, 2);
        assert!(c.value.contains(0.2360679774997897)); // 1/(2 phi + 1)
        assert!(c.value.hi() < a.value.lo());
    }

    #[test]
    fn t_times_psi_stays_below_one() {
        let pq = PartialQuotients::periodic(vec![3, 1], vec![2, 1, 5]).unwrap();
        for k in 1..200u32 {
            let t = ratio(k as i64 * 7 + 2, 7);
            let psi = psi_at(&pq, &t, 40).unwrap();
            let bound = Interval::from_ratio(&t) * psi.value;
            assert!(bound.lo() > 0.0 && bound.hi() < 1.0, "t psi = {bound} at t = {t}");
        }
    }

    #[test]
    fn psi_is_zero_past_the_last_denominator_of_a_rational() {
        let pq = PartialQuotients::rational(vec![2]).unwrap(); // 1/2, q_1 = 2
        let psi = psi_at(&pq, &ratio(5, 1), 40).unwrap();
        assert_eq!(psi.value, Interval::ZERO);
    }

    #[test]
    fn summand_examples() {
        let golden = PartialQuotients::golden();
        let s1 = summand_s(&golden, 1, 40).unwrap();
        assert!(s1.contains(0.0) && s1.width() < 1e-12);
        let s2 = summand_s(&golden, 2, 40).unwrap();
        assert!(s2.contains(TAU_SQUARED));
        // Large next digit pushes S_nu toward 1 - alpha*_nu.
        let spiked = PartialQuotients::prefix(vec![1, 1, 1_000_000_000, 1, 1]).unwrap();
        let s = summand_s(&spiked, 2, 3).unwrap();
        let star = crate::cf::reversed_tail(&spiked, 2).unwrap().value;
        let limit = Interval::ONE - Interval::from_ratio(&star);
        assert!((s.midpoint() - limit.midpoint()).abs() < 1e-6);
    }

    #[test]
    fn partial_sums_match_hand_values() {
        let golden = PartialQuotients::golden();
        assert_eq!(partial_sum_g(&golden, 0, 40).unwrap(), Interval::ZERO);
        let g2 = partial_sum_g(&golden, 2, 40).unwrap();
        assert!(g2.contains(TAU_SQUARED));
        let g5 = partial_sum_g(&golden, 5, 40).unwrap();
        assert!(g5.lo() > 0.0 && g5.hi() < 5.0);
    }

    #[test]
    fn ratio_drift_bound_holds() {
        // |G_{n+k}/(n+k) - G_n/n| < k/(n+k)
        let pq = PartialQuotients::periodic(vec![], vec![2, 1, 1, 4]).unwrap();
        let trace = trace_for(&pq, 300, 40).unwrap();
        for &(n, k) in &[(10usize, 5usize), (50, 25), (100, 200), (250, 50)] {
            let gn = trace.partial_sum(n);
            let gnk = trace.partial_sum(n + k);
            let n_f = n as f64;
            let k_f = k as f64;
            let diff = (gnk / Interval::point((n + k) as f64) - gn / Interval::point(n_f)).abs();
            assert!(diff.hi() < k_f / (n_f + k_f));
        }
    }

    #[test]
    fn integral_examples() {
        let golden = PartialQuotients::golden();
        let one = integral_i(&golden, &ratio(1, 1), 40).unwrap();
        assert!(one.total.contains(0.0) && one.total.width() < 1e-14);
        let two = integral_i(&golden, &ratio(2, 1), 40).unwrap();
        assert!(two.total.contains(TAU_SQUARED));
        assert!(two.total.width() < 1e-10);
    }

    #[test]
    fn integral_matches_hand_computation_for_seven_tenths() {
        // alpha = 7/10 = [0;1,2,3]; psi steps: 0.3 on [1,3), 0.1 on [3,10)
        let pq = PartialQuotients::rational(vec![1, 2, 3]).unwrap();
        let i5 = integral_i(&pq, &ratio(5, 1), 40).unwrap();
        assert!(i5.total.contains_ratio(&ratio(4, 5)));
        assert!(i5.total.width() < 1e-12);
        // Past the final denominator psi vanishes: I(1000) = I(10).
        let i10 = integral_i(&pq, &ratio(10, 1), 40).unwrap();
        let i1000 = integral_i(&pq, &ratio(1000, 1), 40).unwrap();
        assert!((i10.total.midpoint() - i1000.total.midpoint()).abs() < 1e-12);
    }

    #[test]
    fn integral_sandwich_and_gap() {
        let pq = PartialQuotients::periodic(vec![2], vec![1, 3]).unwrap();
        for t in [ratio(7, 2), ratio(19, 3), ratio(50, 1), ratio(997, 5)] {
            let br = integral_i(&pq, &t, 40).unwrap();
            let g_n = partial_sum_g(&pq, br.n, 40).unwrap();
            let g_n1 = partial_sum_g(&pq, br.n + 1, 40).unwrap();
            assert!(g_n.lo() <= br.total.hi(), "lower sandwich at t = {t}");
            assert!(br.total.lo() < g_n1.hi(), "upper sandwich at t = {t}");
            let gap = br.total - g_n;
            assert!(gap.hi() < 1.0 && gap.lo() > -1e-9, "gap at t = {t}");
            // I < ln t
            let ln_t = Interval::from_ratio(&t).ln();
            assert!(br.total.lo() < ln_t.hi());
        }
    }

    #[test]
    fn golden_integral_ratio_regression() {
        // I(q_40) / ln q_40 for the golden stream
        let golden = PartialQuotients::golden();
        let pairs = crate::cf::convergents(&golden, 40).unwrap();
        let q40 = pairs[41].q.clone();
        let br = integral_i(&golden, &BigRational::from_integer(q40.clone()), 40).unwrap();
        let ratio_iv = br.total / Interval::ln_bigint(&q40);
        assert!((ratio_iv.midpoint() - 0.574371).abs() < 0.005);
    }

    #[test]
    fn trace_rows_are_well_formed() {
        let pq = PartialQuotients::golden();
        let rows = integral_trace(&pq, 6, 40).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[5].q_nu, BigInt::from(13));
        let line = rows[0].to_csv();
        assert_eq!(line.split(',').count(), 6);
    }
}
