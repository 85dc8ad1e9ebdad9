//! Acceptance suite: one test per gate, each printing a PASS line with the
//! measured figures (run with `--nocapture` to see them).

mod common;

use common::{oracle_integral, seeded_digits, seeded_rational, seeded_t};
use dal_core::cf::{convergents, extract_digits, reversed_tail, PartialQuotients};
use dal_core::dynamics;
use dal_core::experiments::{self, sweep, ExperimentConfig};
use dal_core::extremal::construct_alpha;
use dal_core::interval::Interval;
use dal_core::measure::{integral_i, trace_for};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact identities on randomized digit streams: the determinant identity,
/// the continuant growth floor, the reversed-tail quotient, and both tail
/// recurrences, all in exact arithmetic.
#[test]
fn a01_exact_identity_suite() {
    let mut checked_pairs = 0usize;
    for case in 0..1_000u64 {
        let len = 50 + (case as usize * 37) % 951; // 50..=1000
        let digits = seeded_digits(case, len);
        let pq = PartialQuotients::prefix(digits.clone()).unwrap();
        let pairs = convergents(&pq, len).unwrap();
        // determinant identity and growth floor, every index
        for w in pairs.windows(2) {
            let det = &w[0].p * &w[1].q - &w[1].p * &w[0].q;
            let expect = if w[1].nu % 2 == 0 {
                BigInt::one()
            } else {
                -BigInt::one()
            };
            assert_eq!(det, expect, "determinant at nu={} case={case}", w[1].nu);
            let nu = w[1].nu;
            if nu >= 0 {
                // q_nu^2 >= 2^(nu-1), checked as 2 q^2 >= 2^nu
                let lhs = 2 * (&w[1].q * &w[1].q);
                let rhs = BigInt::one() << (nu as usize);
                assert!(lhs >= rhs, "growth floor at nu={nu} case={case}");
            }
            checked_pairs += 1;
        }
        // reversed-tail quotient vs independent backward fold, spot indices
        for &nu in &[1usize, len / 2, len] {
            let rt = reversed_tail(&pq, nu).unwrap();
            // [0; a_nu, ..., a_1]: fold the digits in reversed order, which
            // means consuming them forwards with the innermost term first
            let mut folded = BigRational::zero();
            for j in 1..=nu {
                folded = (BigRational::from_integer(BigInt::from(digits[j - 1])) + folded)
                    .recip();
            }
            assert_eq!(rt.value, folded, "reversed tail at nu={nu} case={case}");
            // alpha*_nu = 1/(a_nu + alpha*_{nu-1}) from the quotient route
            let prev = reversed_tail(&pq, nu - 1).unwrap();
            let rhs = (BigRational::from_integer(BigInt::from(digits[nu - 1])) + prev.value)
                .recip();
            assert_eq!(rt.value, rhs, "reversed recurrence at nu={nu} case={case}");
        }
        // forward-tail recurrence on independently folded truncations
        for &nu in &[1usize, len / 3, len - 1] {
            let fold = |from: usize| {
                let mut v = BigRational::from_integer(BigInt::from(digits[len - 1]));
                for j in (from..len).rev() {
                    v = BigRational::from_integer(BigInt::from(digits[j - 1])) + v.recip();
                }
                v
            };
            let here = fold(nu);
            let next = fold(nu + 1);
            assert_eq!(
                here,
                BigRational::from_integer(BigInt::from(digits[nu - 1])) + next.recip(),
                "forward recurrence at nu={nu} case={case}"
            );
        }
    }
    println!("[acceptance] a01 exact identities: PASS ({checked_pairs} convergent pairs)");
}

/// The certified integral encloses the brute-force value computed straight
/// from the definition, for random small rationals.
#[test]
fn a02_brute_force_integral_equivalence() {
    let mut worst_width = 0.0f64;
    for case in 0..100u64 {
        let alpha = seeded_rational(case, 1_000);
        let t = seeded_t(case, 1_000);
        let expected = oracle_integral(&alpha, &t);
        let pq = PartialQuotients::from_ratio(&alpha).unwrap();
        let br = integral_i(&pq, &t, 40).unwrap();
        assert!(
            br.total.contains_ratio(&expected),
            "case {case}: alpha={alpha} t={t}: {} misses {expected}",
            br.total
        );
        worst_width = worst_width.max(br.total.width());
    }
    println!(
        "[acceptance] a02 brute-force equivalence: PASS (100 rationals, worst width {worst_width:.3e})"
    );
}

/// Golden-ratio regression of the integral-to-log ratio.
#[test]
fn a03_golden_ratio_regression() {
    let golden = PartialQuotients::golden();
    let pairs = convergents(&golden, 40).unwrap();
    let q40 = pairs[41].q.clone();
    let br = integral_i(&golden, &BigRational::from_integer(q40.clone()), 40).unwrap();
    let ratio_iv = br.total / Interval::ln_bigint(&q40);
    let mid = ratio_iv.midpoint();
    assert!(
        (mid - 0.574371).abs() <= 0.005,
        "I(q_40)/ln q_40 = {mid}, expected 0.574371 +- 0.005"
    );
    println!("[acceptance] a03 golden regression: PASS (ratio {mid:.6})");
}

/// Every proven bound re-checked over its grid with zero violations.
#[test]
fn a04_bound_sweep() {
    let cfg = sweep::SweepConfig {
        seed: 42,
        n: 10_000,
        depth: 40,
    };
    let report = sweep::run_all_sweeps(&cfg).unwrap();
    assert!(
        report.ok,
        "violations: {:?}",
        report
            .violations
            .iter()
            .map(|v| format!("{} {} {} vs {}", v.check, v.input, v.observed, v.bound))
            .collect::<Vec<_>>()
    );
    println!(
        "[acceptance] a04 bound sweep: PASS ({} cells, 0 violations)",
        report.cells.len()
    );
    for w in &report.worst {
        println!("    worst {}: {} (bound {})", w.check, w.observed, w.bound);
    }
}

/// Monte Carlo means of G_n/n and I/ln t over 200 uniform draws.
#[test]
fn a05_average_monte_carlo() {
    let cfg = ExperimentConfig::default(); // 200 trials, n = 10^4
    let (_trials, summary) = experiments::run_average_experiment(&cfg).unwrap();
    let g = summary.mean["g_ratio"];
    let ir = summary.mean["integral_ratio"];
    assert!((g - 0.5).abs() <= 0.01, "mean G_n/n = {g}");
    assert!(
        (ir - experiments::integral_ratio_target()).abs() <= 0.02,
        "mean I/ln t = {ir}"
    );
    assert!(
        summary.pass_fraction >= 0.95,
        "pass fraction {}",
        summary.pass_fraction
    );
    println!(
        "[acceptance] a05 average experiment: PASS (G {g:.4}, I/ln t {ir:.5}, pass {:.3})",
        summary.pass_fraction
    );
}

/// Denominator growth rate over the same trial seeds.
#[test]
fn a06_levy_growth_rate() {
    let cfg = ExperimentConfig::default();
    let (_trials, summary) = experiments::run_levy_experiment(&cfg).unwrap();
    let m = summary.mean["levy_ratio"];
    assert!(
        (m - experiments::levy_target()).abs() <= 0.012,
        "mean ln q_n / n = {m} vs {}",
        experiments::levy_target()
    );
    println!("[acceptance] a06 growth rate: PASS (mean {m:.5})");
}

/// The block constructor hits its target average and respects the measured
/// convergence envelope at every checkpoint.
#[test]
fn a07_constructor_targets() {
    let targets = [ratio(3, 10), ratio(2, 5), ratio(1, 2), ratio(3, 4), ratio(9, 10)];
    let n = 100_000usize;
    let depth = 40usize;
    for d in targets {
        let pq = construct_alpha(&d, n + depth + 1).unwrap();
        let spec = pq.block_spec().unwrap().clone();
        let trace = trace_for(&pq, n, depth).unwrap();
        let d_f = Interval::from_ratio(&d).midpoint();
        let final_avg = trace.partial_sum(n).midpoint() / n as f64;
        assert!(
            (final_avg - d_f).abs() <= 0.01,
            "d={d}: average {final_avg}"
        );
        let m = spec.max_block;
        for checkpoint in [1_000usize, 2_000, 5_000, 10_000, 20_000, 50_000, 100_000] {
            if checkpoint <= m {
                continue;
            }
            let avg = trace.partial_sum(checkpoint).midpoint() / checkpoint as f64;
            let envelope = (m as f64 + 3.0) / (checkpoint - m) as f64;
            assert!(
                (avg - d_f).abs() < envelope,
                "d={d} n={checkpoint}: |{avg} - {d_f}| vs envelope {envelope}"
            );
        }
        println!(
            "    d={d}: final average {final_avg:.5}, max block {m}, {} crossings",
            spec.w_t.len()
        );
    }
    println!("[acceptance] a07 constructor targets: PASS (5 targets at n = 10^5)");
}

/// The closed-form orbit equals the step-by-step natural extension, the
/// Birkhoff sums at y0 = 0 equal the measure-module partial sums, and the
/// second coordinate's influence stays below 4.
#[test]
fn a08_dynamics_equivalence() {
    let steps = 1_000usize;
    let y_starts = [ratio(0, 1), ratio(1, 2), ratio(1, 1), ratio(3, 7)];
    for seed in 0..50u64 {
        let digits = extract_digits(12_000, 1_000 + seed)
            .unwrap()
            .stream
            .digits_up_to(steps + 2)
            .unwrap();
        let pq = PartialQuotients::rational(digits).unwrap();
        let x0 = pq.to_ratio().unwrap();
        let y0 = &y_starts[(seed % 4) as usize];
        let exact = dynamics::natural_extension_orbit_exact(&x0, y0, steps);
        let closed = dynamics::orbit_via_convergents(&pq, y0, steps, 40).unwrap();
        for nu in 0..=steps {
            assert_eq!(exact[nu].1, closed[nu].y, "seed {seed} y at nu={nu}");
            assert!(
                closed[nu].x.contains_ratio(&exact[nu].0),
                "seed {seed} x at nu={nu}"
            );
        }
    }
    // Cross-module identity of the sums at y0 = 0.
    for seed in 0..20u64 {
        let pq = extract_digits(30_000, 2_000 + seed).unwrap().stream;
        let n = 2_000usize;
        let birkhoff = dynamics::birkhoff_partial_sums(&pq, &BigRational::zero(), n, 40).unwrap();
        let trace = trace_for(&pq, n, 40).unwrap();
        for nu in 0..n {
            assert!(
                birkhoff[nu].intersects(&trace.partial_sums[nu]),
                "seed {seed} nu={nu}: {} vs {}",
                birkhoff[nu],
                trace.partial_sums[nu]
            );
        }
    }
    // Influence of the starting y is bounded by 4, monotonically accumulated.
    for seed in 0..10u64 {
        let pq = extract_digits(30_000, 3_000 + seed).unwrap().stream;
        for y0 in &y_starts[1..] {
            let sums = dynamics::y_sensitivity_sums(&pq, y0, 2_000, 40).unwrap();
            assert!(sums.iter().all(|s| s.hi() < 4.0), "seed {seed} y0={y0}");
        }
    }
    println!("[acceptance] a08 dynamics equivalence: PASS (50 orbit seeds, 20 sum seeds)");
}

/// Certified quadrature of the two density integrals.
#[test]
fn a09_quadrature_enclosures() {
    let (weighted, mass) = dynamics::gauss_density_integrals(1 << 12).unwrap();
    let half_ln2 = 0.5 * std::f64::consts::LN_2;
    assert!(
        weighted.contains(half_ln2),
        "weighted integral {weighted} misses ln2/2"
    );
    assert!(weighted.width() <= 1e-6, "width {}", weighted.width());
    assert!(mass.contains(1.0), "mass {mass} misses 1");
    assert!(mass.width() <= 1e-6);
    println!(
        "[acceptance] a09 quadrature: PASS (ln2/2 in {weighted}, width {:.3e})",
        weighted.width()
    );
}

/// Pair experiment: every pair's difference comes within 10, and the
/// golden-versus-silver control drifts at the predicted slope.
#[test]
fn a10_pair_difference_experiment() {
    let cfg = ExperimentConfig {
        trials: 100,
        ..ExperimentConfig::default()
    };
    let (trials, summary) = experiments::run_pair_experiment(&cfg).unwrap();
    assert_eq!(
        summary.pass_fraction, 1.0,
        "violations: {:?}",
        summary.violations
    );
    let max_min = trials
        .iter()
        .map(|t| t.min_abs_difference)
        .fold(0.0f64, f64::max);
    let slope = experiments::constant_pair_drift(10_000, 40).unwrap();
    let target = experiments::constant_pair_slope_target().unwrap();
    let rel = (slope.midpoint() - target.midpoint()).abs() / target.midpoint().abs();
    assert!(
        rel <= 0.10,
        "drift slope {} vs {} (rel err {rel})",
        slope.midpoint(),
        target.midpoint()
    );
    println!(
        "[acceptance] a10 pair differences: PASS (100 pairs, worst min |D| {max_min:.3}, control slope {:.5})",
        slope.midpoint()
    );
}
