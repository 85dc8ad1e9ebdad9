//! Linear continuant recurrence versus divide-and-conquer matrix products.
//!
//! The library uses the linear recurrence; the 2x2 matrix-product route
//! below exists only as a comparison baseline for larger n.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dal_core::cf::{convergents, PartialQuotients};
use num_bigint::BigInt;

/// q_n via a balanced product of the digit matrices [[a,1],[1,0]].
fn matrix_continuant(digits: &[u64]) -> BigInt {
    fn product(digits: &[u64]) -> [BigInt; 4] {
        match digits.len() {
            0 => [
                BigInt::from(1),
                BigInt::from(0),
                BigInt::from(0),
                BigInt::from(1),
            ],
            1 => [
                BigInt::from(digits[0]),
                BigInt::from(1),
                BigInt::from(1),
                BigInt::from(0),
            ],
            n => {
                let (l, r) = digits.split_at(n / 2);
                let a = product(l);
                let b = product(r);
                [
                    &a[0] * &b[0] + &a[1] * &b[2],
                    &a[0] * &b[1] + &a[1] * &b[3],
                    &a[2] * &b[0] + &a[3] * &b[2],
                    &a[2] * &b[1] + &a[3] * &b[3],
                ]
            }
        }
    }
    product(digits)[0].clone()
}

fn digits_for(n: usize) -> Vec<u64> {
    (0..n).map(|i| 1 + (i as u64 % 7)).collect()
}

fn bench_continuants(c: &mut Criterion) {
    let mut group = c.benchmark_group("continuants");
    for n in [1_000usize, 10_000] {
        let digits = digits_for(n);
        let pq = PartialQuotients::prefix(digits.clone()).unwrap();
        group.bench_with_input(BenchmarkId::new("linear", n), &n, |b, &n| {
            b.iter(|| convergents(&pq, n).unwrap().last().unwrap().q.clone())
        });
        group.bench_with_input(BenchmarkId::new("matrix", n), &digits, |b, digits| {
            b.iter(|| matrix_continuant(digits))
        });
    }
    group.finish();
}

fn bench_sanity(c: &mut Criterion) {
    // one cheap case that also asserts the two routes agree
    let digits = digits_for(500);
    let pq = PartialQuotients::prefix(digits.clone()).unwrap();
    let linear = convergents(&pq, 500).unwrap().last().unwrap().q.clone();
    assert_eq!(linear, matrix_continuant(&digits));
    c.bench_function("continuants/agreement_500", |b| {
        b.iter(|| matrix_continuant(&digits))
    });
}

criterion_group!(benches, bench_continuants, bench_sanity);
criterion_main!(benches);
