//! The Gauss map x -> {1/x}, its two-dimensional natural extension, orbit
//! formulas driven by convergents, Birkhoff sums of the observable
//! f(x,y) = (1-y)/(1+xy), and certified quadrature of the invariant-density
//! integrals.

use crate::cf::{tail_enclosure, ConvergentIter, PartialQuotients};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::measure::engine::{digit_intervals, slice_for, tail_sweep, TailEnd};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// One step of x -> {1/x} on an enclosure. Errors when the enclosure
/// straddles a reciprocal-integer boundary, since the digit (and hence the
/// branch) would be ambiguous.
pub fn gauss_step(x: Interval) -> Result<Interval> {
    if x == Interval::ZERO {
        return Ok(Interval::ZERO);
    }
    if x.lo() <= 0.0 {
        return Err(Error::AmbiguousEnclosure {
            lo: x.lo(),
            hi: x.hi(),
            what: "whether the point is 0".into(),
        });
    }
    let inv = x.recip();
    let digit = inv.lo().floor();
    if inv.hi().floor() != digit {
        return Err(Error::AmbiguousEnclosure {
            lo: x.lo(),
            hi: x.hi(),
            what: "the continued-fraction digit".into(),
        });
    }
    Ok(inv - Interval::point(digit))
}

/// A point of the natural-extension phase square with enclosure coordinates.
#[derive(Clone, Copy, Debug)]
pub struct EnclosurePoint {
    pub x: Interval,
    pub y: Interval,
}

/// One step of the natural extension (x, y) -> ({1/x}, 1/([1/x] + y)).
pub fn natural_extension_step(p: &EnclosurePoint) -> Result<EnclosurePoint> {
    if p.x == Interval::ZERO {
        return Ok(*p);
    }
    if p.x.lo() <= 0.0 {
        return Err(Error::AmbiguousEnclosure {
            lo: p.x.lo(),
            hi: p.x.hi(),
            what: "whether the point is 0".into(),
        });
    }
    let inv = p.x.recip();
    let digit = inv.lo().floor();
    if inv.hi().floor() != digit {
        return Err(Error::AmbiguousEnclosure {
            lo: p.x.lo(),
            hi: p.x.hi(),
            what: "the continued-fraction digit".into(),
        });
    }
    Ok(EnclosurePoint {
        x: inv - Interval::point(digit),
        y: (Interval::point(digit) + p.y).recip(),
    })
}

/// Orbit point computed from convergents: exact rational second coordinate.
#[derive(Clone, Debug)]
pub struct OrbitPoint {
    pub nu: usize,
    pub x: Interval,
    pub y: BigRational,
    pub f: Interval,
}

/// The observable f(x, y) = (1 - y)/(1 + x y); ranges over [0, 1] on the
/// phase square.
pub fn observable(x: Interval, y: Interval) -> Interval {
    (Interval::ONE - y) / (Interval::ONE + x * y)
}

/// Frozen header for orbit CSV output.
pub const ORBIT_CSV_HEADER: &str = "nu,x_lo,x_hi,y_num,y_den,f_lo,f_hi";

impl OrbitPoint {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.nu,
            self.x.lo(),
            self.x.hi(),
            self.y.numer(),
            self.y.denom(),
            self.f.lo(),
            self.f.hi()
        )
    }
}

/// Orbit of the natural extension from (x, y0) in closed form: after nu
/// steps the second coordinate is (q_{nu-1} + y0 p_{nu-1})/(q_nu + y0 p_nu)
/// exactly, and the first is the reciprocal of the forward tail.
pub fn orbit_via_convergents(
    pq: &PartialQuotients,
    y0: &BigRational,
    n: usize,
    depth: usize,
) -> Result<Vec<OrbitPoint>> {
    if y0.is_negative() || *y0 > BigRational::one() {
        return Err(Error::Domain(format!("y0 = {y0} outside [0,1]")));
    }
    let mut iter = ConvergentIter::new(pq);
    let mut prev = iter.next_pair()?; // nu = -1
    let mut curr = iter.next_pair()?; // nu = 0
    let mut out = Vec::with_capacity(n + 1);
    for nu in 0..=n {
        if nu > 0 {
            prev = std::mem::replace(&mut curr, iter.next_pair()?);
        }
        let y = (BigRational::from_integer(prev.q.clone())
            + y0 * BigRational::from_integer(prev.p.clone()))
            / (BigRational::from_integer(curr.q.clone())
                + y0 * BigRational::from_integer(curr.p.clone()));
        let x = forward_coordinate(pq, nu, depth)?;
        let f = observable(x, Interval::from_ratio(&y));
        out.push(OrbitPoint { nu, x, y, f });
    }
    Ok(out)
}

/// T^nu x as an enclosure: the reciprocal of the tail alpha_{nu+1}, or
/// exactly 0 once a terminating expansion has been consumed.
fn forward_coordinate(pq: &PartialQuotients, nu: usize, depth: usize) -> Result<Interval> {
    if let Some(avail) = pq.available() {
        if pq.is_terminating() && nu >= avail {
            return Ok(Interval::ZERO);
        }
    }
    Ok(tail_enclosure(pq, nu + 1, depth)?.to_interval().recip())
}

/// Exact rational orbit of the natural extension, for cross-route checks.
/// Rational inputs stay rational; no precision is lost at any horizon.
pub fn natural_extension_orbit_exact(
    x0: &BigRational,
    y0: &BigRational,
    n: usize,
) -> Vec<(BigRational, BigRational)> {
    let mut out = Vec::with_capacity(n + 1);
    let mut x = x0.clone();
    let mut y = y0.clone();
    out.push((x.clone(), y.clone()));
    for _ in 0..n {
        if x.is_zero() {
            out.push((x.clone(), y.clone()));
            continue;
        }
        let inv = x.recip();
        let digit = inv.floor();
        x = &inv - &digit;
        y = (&digit + &y).recip();
        out.push((x.clone(), y.clone()));
    }
    out
}

/// Accumulated Birkhoff sum and mean of the observable along an orbit.
#[derive(Clone, Debug)]
pub struct BirkhoffAccumulator {
    pub n: usize,
    pub sum: Interval,
    pub mean: Interval,
}

/// Mean of f over the first n natural-extension steps from (x, y0), where x
/// is the value of the digit stream. For y0 = 0 the running sum reproduces
/// the segment partial sums G_n computed in the measure module.
pub fn birkhoff_mean(
    pq: &PartialQuotients,
    y0: &BigRational,
    n: usize,
    depth: usize,
) -> Result<BirkhoffAccumulator> {
    if n == 0 {
        return Err(Error::Domain("need at least one step".into()));
    }
    let sums = birkhoff_partial_sums(pq, y0, n, depth)?;
    let sum = sums[n - 1];
    Ok(BirkhoffAccumulator {
        n,
        sum,
        mean: sum / Interval::from_u64(n as u64),
    })
}

/// Partial Birkhoff sums for nu = 1..=n.
pub fn birkhoff_partial_sums(
    pq: &PartialQuotients,
    y0: &BigRational,
    n: usize,
    depth: usize,
) -> Result<Vec<Interval>> {
    let track = orbit_observables(pq, y0, n, depth)?;
    let mut out = Vec::with_capacity(n);
    let mut acc = Interval::ZERO;
    for f in track {
        acc += f;
        out.push(acc);
    }
    Ok(out)
}

/// f at each of the first n orbit points, via the digit-shift recurrences:
/// the y coordinate follows y -> 1/(a + y) and the x coordinate is the
/// reciprocal of the certified forward tail.
fn orbit_observables(
    pq: &PartialQuotients,
    y0: &BigRational,
    n: usize,
    depth: usize,
) -> Result<Vec<Interval>> {
    if y0.is_negative() || *y0 > BigRational::one() {
        return Err(Error::Domain(format!("y0 = {y0} outside [0,1]")));
    }
    let (digits, end) = slice_for(pq, n, depth)?;
    let tails = tail_sweep(&digits, end);
    let mut out = Vec::with_capacity(n);
    let mut y = Interval::from_ratio(y0);
    for nu in 1..=n {
        y = (digits[nu - 1] + y).recip();
        let x = if nu < digits.len() {
            tails[nu].recip()
        } else {
            // Exactly consumed terminating expansion: T^nu x = 0.
            Interval::ZERO
        };
        out.push(observable(x, y));
    }
    Ok(out)
}

/// Partial sums of |f(T^nu(x,y)) - f(T^nu(x,0))|: the total influence of the
/// second coordinate's starting value. Proven to stay below 4.
pub fn y_sensitivity_sums(
    pq: &PartialQuotients,
    y0: &BigRational,
    n: usize,
    depth: usize,
) -> Result<Vec<Interval>> {
    let with_y = orbit_observables(pq, y0, n, depth)?;
    let base = orbit_observables(pq, &BigRational::zero(), n, depth)?;
    let mut out = Vec::with_capacity(n);
    let mut acc = Interval::ZERO;
    for (a, b) in with_y.iter().zip(base.iter()) {
        acc += (*a - *b).abs();
        out.push(acc);
    }
    Ok(out)
}

/// Certified enclosures of the two invariant-density integrals:
/// the observable's weighted integral (whose exact value is ln2 / 2) and the
/// total mass of the natural-extension measure (exactly 1).
///
/// Both double integrals reduce exactly in x:
///   int_0^1 (1-y)/(1+xy)^3 dx = 1/u^2 + 1/(2u) - 1/2     with u = 1 + y,
///   int_0^1 1/(1+xy)^2 dx = 1/u.
/// The remaining one-dimensional integrands are convex and decreasing on
/// [0,1], so on every grid cell the midpoint rule underestimates and the
/// trapezoid rule overestimates; those two Riemann-type sums give certified
/// two-sided bounds with no unproven remainder estimate.
pub fn gauss_density_integrals(resolution: usize) -> Result<(Interval, Interval)> {
    if resolution < 2 {
        return Err(Error::Domain("resolution must be at least 2".into()));
    }
    let weighted = |u: Interval| {
        let inv = u.recip();
        inv * inv + Interval::point(0.5) * inv - Interval::point(0.5)
    };
    let mass = |u: Interval| u.recip();
    let i1 = convex_integral_01(resolution, |y| weighted(Interval::ONE + y));
    let i2 = convex_integral_01(resolution, |y| mass(Interval::ONE + y)) / Interval::ln_2();
    Ok((i1, i2))
}

/// Two-sided midpoint/trapezoid enclosure of a convex decreasing integrand
/// over [0,1].
fn convex_integral_01(cells: usize, f: impl Fn(Interval) -> Interval) -> Interval {
    let n = cells as f64;
    let mut lower = Interval::ZERO;
    let mut upper = Interval::ZERO;
    let mut y_prev = Interval::point(0.0);
    let mut f_prev = f(y_prev);
    let half = Interval::point(0.5);
    for i in 1..=cells {
        let y = Interval::point(i as f64 / n);
        let f_y = f(y);
        let width = y - y_prev;
        let mid = (y_prev + y) * half;
        lower += width * f(mid);
        upper += width * (f_prev + f_y) * half;
        y_prev = y;
        f_prev = f_y;
    }
    Interval::new(lower.lo(), upper.hi())
}

/// (ln q_n)/n with the denominator taken exactly.
pub fn levy_ratio(pq: &PartialQuotients, n: usize) -> Result<Interval> {
    if n == 0 {
        return Err(Error::Domain("need n >= 1".into()));
    }
    let pairs = crate::cf::convergents(pq, n)?;
    let q_n = &pairs[n + 1].q;
    Ok(Interval::ln_bigint(q_n) / Interval::from_u64(n as u64))
}

/// The value of the stream as an enclosure (x = 1/alpha_1).
pub fn value_enclosure(pq: &PartialQuotients, depth: usize) -> Result<Interval> {
    if let Some(r) = pq.to_ratio() {
        return Ok(Interval::from_ratio(&r));
    }
    let count = match pq.available() {
        Some(avail) => avail.min(depth + 1),
        None => depth + 1,
    };
    let digits = digit_intervals(pq, count)?;
    let tails = tail_sweep(&digits, TailEnd::Truncated);
    Ok(tails[0].recip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn gauss_step_examples() {
        assert_eq!(gauss_step(Interval::ZERO).unwrap(), Interval::ZERO);
        // 7/10 -> 10/7 - 1 = 3/7
        let x = Interval::from_ratio(&ratio(7, 10));
        let out = gauss_step(x).unwrap();
        assert!(out.contains_ratio(&ratio(3, 7)));
        assert!(out.width() < 1e-14);
    }

    #[test]
    fn gauss_step_shifts_digits() {
        let pq = PartialQuotients::periodic(vec![], vec![3, 1, 2]).unwrap();
        let x = value_enclosure(&pq, 40).unwrap();
        let shifted = PartialQuotients::periodic(vec![], vec![1, 2, 3]).unwrap();
        let expect = value_enclosure(&shifted, 40).unwrap();
        let got = gauss_step(x).unwrap();
        assert!(got.intersects(&expect));
    }

    #[test]
    fn gauss_step_rejects_ambiguous_enclosures() {
        // Straddles 1/2, where the digit flips between 1 and 2.
        let x = Interval::new(0.49, 0.51);
        assert!(matches!(
            gauss_step(x),
            Err(Error::AmbiguousEnclosure { .. })
        ));
    }

    #[test]
    fn natural_extension_examples() {
        let p = EnclosurePoint {
            x: Interval::from_ratio(&ratio(7, 10)),
            y: Interval::ZERO,
        };
        let q = natural_extension_step(&p).unwrap();
        assert!(q.x.contains_ratio(&ratio(3, 7)));
        assert!(q.y.contains_ratio(&ratio(1, 1)));
        // y' is always in (0, 1]
        let r = natural_extension_step(&q).unwrap();
        assert!(r.y.lo() > 0.0 && r.y.hi() <= 1.0 + 1e-15);
    }

    #[test]
    fn orbit_y_matches_reversed_tails_from_zero() {
        let golden = PartialQuotients::golden();
        let orbit = orbit_via_convergents(&golden, &BigRational::zero(), 5, 40).unwrap();
        assert_eq!(orbit[3].y, ratio(2, 3)); // q_2/q_3 for Fibonacci
        assert_eq!(orbit[0].y, BigRational::zero());
        for p in &orbit[1..] {
            let rt = crate::cf::reversed_tail(&golden, p.nu).unwrap();
            assert_eq!(p.y, rt.value);
        }
    }

    #[test]
    fn orbit_from_y0_one_follows_the_closed_form() {
        let pq = PartialQuotients::periodic(vec![2], vec![1, 1]).unwrap();
        let orbit = orbit_via_convergents(&pq, &BigRational::one(), 1, 40).unwrap();
        // (q_0 + p_0)/(q_1 + p_1) = (1+0)/(2+1) = 1/3
        assert_eq!(orbit[1].y, ratio(1, 3));
    }

    #[test]
    fn exact_orbit_agrees_with_closed_form() {
        let pq = PartialQuotients::rational(vec![3, 5, 2, 6, 1, 1, 8, 2]).unwrap();
        let x0 = pq.to_ratio().unwrap();
        let y0 = ratio(1, 2);
        let n = 6usize;
        let exact = natural_extension_orbit_exact(&x0, &y0, n);
        let closed = orbit_via_convergents(&pq, &y0, n, 40).unwrap();
        for nu in 0..=n {
            assert_eq!(exact[nu].1, closed[nu].y, "y at nu = {nu}");
            assert!(
                closed[nu].x.contains_ratio(&exact[nu].0),
                "x at nu = {nu}"
            );
        }
    }

    #[test]
    fn birkhoff_sum_at_zero_matches_partial_sums() {
        let pq = PartialQuotients::periodic(vec![1, 3], vec![2, 1, 1, 5]).unwrap();
        let n = 400;
        let birkhoff = birkhoff_partial_sums(&pq, &BigRational::zero(), n, 40).unwrap();
        let trace = crate::measure::trace_for(&pq, n, 40).unwrap();
        for nu in [1usize, 7, 50, 399] {
            assert!(
                birkhoff[nu].intersects(&trace.partial_sums[nu]),
                "mismatch at nu = {nu}: {} vs {}",
                birkhoff[nu],
                trace.partial_sums[nu]
            );
        }
    }

    #[test]
    fn observable_stays_in_unit_range() {
        let pq = PartialQuotients::periodic(vec![], vec![1, 2, 3, 4, 5]).unwrap();
        let fs = orbit_observables(&pq, &ratio(1, 3), 200, 40).unwrap();
        for f in fs {
            assert!(f.lo() >= -1e-15 && f.hi() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn y_sensitivity_is_bounded_and_monotone() {
        let pq = PartialQuotients::periodic(vec![], vec![2, 1, 4]).unwrap();
        let sums = y_sensitivity_sums(&pq, &BigRational::one(), 500, 40).unwrap();
        let mut prev = 0.0;
        for s in &sums {
            assert!(s.hi() < 4.0);
            assert!(s.hi() >= prev - 1e-12);
            prev = s.hi();
        }
    }

    #[test]
    fn quadrature_encloses_the_exact_constants() {
        let (weighted, mass) = gauss_density_integrals(1 << 12).unwrap();
        let half_ln2 = 0.5 * std::f64::consts::LN_2;
        assert!(weighted.contains(half_ln2), "{weighted} misses ln2/2");
        assert!(weighted.width() <= 1e-6, "width {}", weighted.width());
        assert!(mass.contains(1.0), "{mass} misses 1");
        assert!(mass.width() <= 1e-6);
    }

    #[test]
    fn quadrature_integrand_corner_value() {
        // at (x, y) = (0, 0) the weighted integrand is 1
        let f = observable(Interval::ZERO, Interval::ZERO);
        assert!(f.contains(1.0) && f.width() < 1e-14);
    }

    #[test]
    fn levy_ratio_on_quadratic_streams() {
        let golden = PartialQuotients::golden();
        let r = levy_ratio(&golden, 2000).unwrap();
        let ln_phi = 0.48121182505960347;
        assert!((r.midpoint() - ln_phi).abs() < 1e-3);
        let silver = PartialQuotients::constant(2).unwrap();
        let r = levy_ratio(&silver, 2000).unwrap();
        let ln_silver = 0.881373587019543;
        assert!((r.midpoint() - ln_silver).abs() < 1e-3);
        // n = 1: ln q_1 = ln a_1
        let pq = PartialQuotients::prefix(vec![7, 1]).unwrap();
        let r = levy_ratio(&pq, 1).unwrap();
        assert!(r.contains(7f64.ln()));
    }
}
