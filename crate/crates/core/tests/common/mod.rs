//! Shared test oracles, independent of the library's evaluation paths.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Distance from x to the nearest integer, exactly.
pub fn dist_to_nearest_int(x: &BigRational) -> BigRational {
    let frac = x - x.floor();
    let other = BigRational::one() - &frac;
    if frac <= other {
        frac
    } else {
        other
    }
}

/// Brute-force integral of the measure function for rational alpha:
/// the integrand on [k, k+1) is min_{1<=j<=k} ||j alpha||, evaluated and
/// integrated exactly from the definition, with no continued fractions.
pub fn oracle_integral(alpha: &BigRational, t: &BigRational) -> BigRational {
    let mut total = BigRational::zero();
    let mut min_dist: Option<BigRational> = None;
    let mut k = BigInt::one();
    while BigRational::from_integer(k.clone()) < *t {
        let dist = dist_to_nearest_int(&(alpha * BigRational::from_integer(k.clone())));
        min_dist = Some(match min_dist {
            Some(m) => {
                if dist < m {
                    dist
                } else {
                    m
                }
            }
            None => dist,
        });
        let seg_start = BigRational::from_integer(k.clone());
        let seg_end = (&seg_start + BigRational::one()).min(t.clone());
        total += (seg_end - seg_start) * min_dist.clone().unwrap();
        k += BigInt::one();
    }
    total
}

/// Deterministic digit streams with a heavy-tailed digit law (occasional
/// large digits exercise the big-integer paths).
pub fn seeded_digits(seed: u64, len: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let u: f64 = rng.gen_range(1e-6..1.0);
            ((1.0 / u) as u64).clamp(1, 1_000_000)
        })
        .collect()
}

/// Deterministic rational in (0,1) with denominator at most `max_den`.
pub fn seeded_rational(seed: u64, max_den: u64) -> BigRational {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = rng.gen_range(2..=max_den);
    let num = rng.gen_range(1..den);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Deterministic rational in [1, max], with a small denominator.
pub fn seeded_t(seed: u64, max: u64) -> BigRational {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let den = rng.gen_range(1..=16u64);
    let num = rng.gen_range(den..=max * den);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[allow(dead_code)]
pub fn assert_contains_ratio(iv: &dal_core::Interval, r: &BigRational, what: &str) {
    assert!(
        iv.contains_ratio(r),
        "{what}: enclosure {iv} misses exact value {r}"
    );
}
