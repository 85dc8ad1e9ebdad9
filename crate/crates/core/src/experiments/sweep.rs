//! Aggregated bound sweeps: every proven inequality is re-checked over a
//! parameter grid with certified arithmetic; any violation is reported with
//! its input serialized for replay.

use crate::cf::{extract_digits, PartialQuotients};
use crate::error::{Error, Result};
use crate::extremal::{
    all_ones_floor_gap, append_deviation, constant_stream_deviation, prefix_deviation,
    replaced_head_deviation,
};
use crate::interval::Interval;
use crate::measure::{integral_i, partial_sum_g, trace_for};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

/// One re-checked inequality family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SweepKind {
    /// Every summand lies in [0, 1).
    SummandRange,
    /// G_N <= I(t) < G_{N+1}, G_N < N, and I - G_N in [0, 1).
    IntegralSandwich,
    /// |G_{n+k}/(n+k) - G_n/n| < k/(n+k).
    RatioDrift,
    /// |G_n - mean(z) n| <= 4 on constant streams.
    ConstantStream,
    /// |G_n(x) - G_n(y)| < 1 when the first n+1 digits agree.
    SharedPrefix,
    /// |G_n(x) - G_n(y)| < 8 when only the first digit differs.
    FirstDigit,
    /// |G_{n-1}(a, x) - G_n(a, y)| < 3 for tails x, y.
    AppendTail,
    /// |G_n - mean(z) n| < 13 with one replaced head digit.
    ReplacedHead,
    /// G_n never certifiably drops below its all-ones-prefix floor.
    AllOnesFloor,
}

impl SweepKind {
    pub const ALL: [SweepKind; 9] = [
        SweepKind::SummandRange,
        SweepKind::IntegralSandwich,
        SweepKind::RatioDrift,
        SweepKind::ConstantStream,
        SweepKind::SharedPrefix,
        SweepKind::FirstDigit,
        SweepKind::AppendTail,
        SweepKind::ReplacedHead,
        SweepKind::AllOnesFloor,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::SummandRange => "summand-range",
            SweepKind::IntegralSandwich => "integral-sandwich",
            SweepKind::RatioDrift => "ratio-drift",
            SweepKind::ConstantStream => "constant-stream",
            SweepKind::SharedPrefix => "shared-prefix",
            SweepKind::FirstDigit => "first-digit",
            SweepKind::AppendTail => "append-tail",
            SweepKind::ReplacedHead => "replaced-head",
            SweepKind::AllOnesFloor => "all-ones-floor",
        }
    }

    pub fn from_name(name: &str) -> Option<SweepKind> {
        SweepKind::ALL.iter().copied().find(|k| k.name() == name)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCell {
    pub check: String,
    pub input: String,
    pub observed: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub worst: Vec<SweepCell>,
    pub violations: Vec<SweepCell>,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub seed: u64,
    /// Scale for the heaviest grids (constant-stream trace length).
    pub n: usize,
    pub depth: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: 42,
            n: 10_000,
            depth: crate::measure::DEFAULT_TAIL_DEPTH,
        }
    }
}

pub const SWEEP_CSV_HEADER: &str = "check,input,observed,bound,ok";

impl SweepCell {
    pub fn to_csv(&self) -> String {
        format!(
            "{},\"{}\",{},{},{}",
            self.check, self.input, self.observed, self.bound, self.ok
        )
    }
}

fn report_from(cells: Vec<SweepCell>) -> SweepReport {
    let mut worst: Vec<SweepCell> = Vec::new();
    for cell in &cells {
        match worst.iter_mut().find(|w| w.check == cell.check) {
            Some(w) => {
                if cell.observed > w.observed {
                    *w = cell.clone();
                }
            }
            None => worst.push(cell.clone()),
        }
    }
    let violations: Vec<SweepCell> = cells.iter().filter(|c| !c.ok).cloned().collect();
    let ok = violations.is_empty();
    SweepReport {
        cells,
        worst,
        violations,
        ok,
    }
}

/// Mixed bag of deterministic test streams plus seeded random draws.
fn stream_grid(cfg: &SweepConfig, random: usize) -> Result<Vec<(String, PartialQuotients)>> {
    let mut out: Vec<(String, PartialQuotients)> = vec![
        ("golden".into(), PartialQuotients::golden()),
        ("constant:2".into(), PartialQuotients::constant(2)?),
        (
            "periodic:3,1|2,1,5".into(),
            PartialQuotients::periodic(vec![3, 1], vec![2, 1, 5])?,
        ),
        (
            "periodic:|1,2,3,4".into(),
            PartialQuotients::periodic(vec![], vec![1, 2, 3, 4])?,
        ),
    ];
    for i in 0..random {
        let seed = crate::experiments::trial_seed(cfg.seed, 1_000 + i as u64);
        let e = extract_digits(8192, seed)?;
        out.push((format!("random:{seed}"), e.stream));
    }
    Ok(out)
}

pub fn run_bound_sweep(kind: SweepKind, cfg: &SweepConfig) -> Result<SweepReport> {
    let cells = match kind {
        SweepKind::SummandRange => summand_range(cfg)?,
        SweepKind::IntegralSandwich => integral_sandwich(cfg)?,
        SweepKind::RatioDrift => ratio_drift(cfg)?,
        SweepKind::ConstantStream => constant_stream(cfg)?,
        SweepKind::SharedPrefix => shared_prefix(cfg)?,
        SweepKind::FirstDigit => first_digit(cfg)?,
        SweepKind::AppendTail => append_tail(cfg)?,
        SweepKind::ReplacedHead => replaced_head(cfg)?,
        SweepKind::AllOnesFloor => all_ones_floor(cfg)?,
    };
    Ok(report_from(cells))
}

pub fn run_all_sweeps(cfg: &SweepConfig) -> Result<SweepReport> {
    let mut cells = Vec::new();
    for kind in SweepKind::ALL {
        cells.extend(run_bound_sweep(kind, cfg)?.cells);
    }
    Ok(report_from(cells))
}

fn summand_range(cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    for (label, pq) in stream_grid(cfg, 10)? {
        let n = usable_len(&pq, cfg, 1_000);
        let trace = trace_for(&pq, n, cfg.depth)?;
        let mut worst_hi = 0.0f64;
        let mut worst_lo = 0.0f64;
        for s in &trace.summands {
            worst_hi = worst_hi.max(s.hi());
            worst_lo = worst_lo.min(s.lo());
        }
        cells.push(SweepCell {
            check: "summand-upper".into(),
            input: format!("{label} n={n}"),
            observed: worst_hi,
            bound: 1.0,
            ok: worst_hi < 1.0,
        });
        cells.push(SweepCell {
            check: "summand-lower".into(),
            input: format!("{label} n={n}"),
            observed: -worst_lo,
            bound: 1e-9,
            ok: worst_lo > -1e-9,
        });
    }
    Ok(cells)
}

fn integral_sandwich(cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    let ts = [
        BigRational::new(BigInt::from(3), BigInt::from(2)),
        BigRational::from_integer(BigInt::from(10)),
        BigRational::new(BigInt::from(411), BigInt::from(3)),
        BigRational::from_integer(BigInt::from(1000)),
    ];
    for (label, pq) in stream_grid(cfg, 6)? {
        for t in &ts {
            let br = integral_i(&pq, t, cfg.depth)?;
            let g_next = partial_sum_g(&pq, br.n + 1, cfg.depth)?;
            let input = format!("{label} t={t}");
            // G_N <= I
            cells.push(SweepCell {
                check: "sandwich-lower".into(),
                input: input.clone(),
                observed: br.partial_sum.lo() - br.total.hi(),
                bound: 0.0,
                ok: br.partial_sum.lo() <= br.total.hi(),
            });
            // I < G_{N+1}
            cells.push(SweepCell {
                check: "sandwich-upper".into(),
                input: input.clone(),
                observed: br.total.lo() - g_next.hi(),
                bound: 0.0,
                ok: br.total.lo() < g_next.hi(),
            });
            // I - G_N in [0, 1)
            let gap = br.total - br.partial_sum;
            cells.push(SweepCell {
                check: "integral-gap".into(),
                input: input.clone(),
                observed: gap.hi(),
                bound: 1.0,
                ok: gap.hi() < 1.0 && gap.lo() > -1e-9,
            });
            // G_N < N for N >= 1
            if br.n >= 1 {
                cells.push(SweepCell {
                    check: "partial-sum-cap".into(),
                    input,
                    observed: br.partial_sum.hi(),
                    bound: br.n as f64,
                    ok: br.partial_sum.hi() < br.n as f64,
                });
            }
        }
    }
    Ok(cells)
}

fn ratio_drift(cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    let grid = [(10usize, 5usize), (64, 64), (100, 900), (500, 37), (900, 100)];
    for (label, pq) in stream_grid(cfg, 6)? {
        let n_max = usable_len(&pq, cfg, 1_000);
        let trace = trace_for(&pq, n_max, cfg.depth)?;
        for &(n, k) in &grid {
            if n + k > n_max {
                continue;
            }
            let gn = trace.partial_sum(n) / Interval::from_u64(n as u64);
            let gnk = trace.partial_sum(n + k) / Interval::from_u64((n + k) as u64);
            let observed = (gnk - gn).abs().hi();
            let bound = k as f64 / (n + k) as f64;
            cells.push(SweepCell {
                check: "ratio-drift".into(),
                input: format!("{label} n={n} k={k}"),
                observed,
                bound,
                ok: observed < bound,
            });
        }
    }
    Ok(cells)
}

fn constant_stream(cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    for z in [1u64, 2, 3, 5, 10] {
        let dev = constant_stream_deviation(z, cfg.n)?;
        cells.push(SweepCell {
            check: "constant-stream".into(),
            input: format!("z={z} n={}", cfg.n),
            observed: dev.hi(),
            bound: 4.0,
            ok: dev.hi() <= 4.0,
        });
    }
    Ok(cells)
}

fn shared_prefix(cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    let n = 200usize;
    let reach = n + cfg.depth + 2;
    for i in 0..8u64 {
        let seed = crate::experiments::trial_seed(cfg.seed, 2_000 + i);
        let head = extract_digits(8192, seed)?.stream.digits_up_to(n + 1)?;
        let mut x_digits = head.clone();
        let mut y_digits = head.clone();
        x_digits.extend(std::iter::repeat(1).take(reach));
        y_digits.extend(std::iter::repeat(9).take(reach));
        let x = PartialQuotients::prefix(x_digits)?;
        let y = PartialQuotients::prefix(y_digits)?;
        let r = prefix_deviation(&x, &y, n, cfg.depth)?;
        cells.push(SweepCell {
            check: "shared-prefix".into(),
            input: format!("head=random:{seed} tails=1|9 n={n}"),
            observed: r.deviation.hi(),
            bound: r.bound,
            ok: r.deviation.hi() < r.bound,
        });
    }
    Ok(cells)
}

fn first_digit(cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    let n = 200usize;
    let pairs = [(1u64, 9u64, 2u64), (2, 7, 1), (1, 3, 4), (5, 6, 2)];
    for (da, db, rest) in pairs {
        let x = PartialQuotients::periodic(vec![da], vec![rest])?;
        let y = PartialQuotients::periodic(vec![db], vec![rest])?;
        let r = prefix_deviation(&x, &y, n, cfg.depth)?;
        cells.push(SweepCell {
            check: "first-digit".into(),
            input: format!("first={da}|{db} rest={rest} n={n}"),
            observed: r.deviation.hi(),
            bound: r.bound,
            ok: r.deviation.hi() < r.bound,
        });
    }
    Ok(cells)
}

fn append_tail(cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    let phi = Interval::golden_ratio();
    let tails = [
        ("phi|phi", phi, phi),
        ("near-1|1e6", Interval::point(1.000001), Interval::point(1e6)),
        ("5/2|7/2", Interval::point(2.5), Interval::point(3.5)),
    ];
    for (label, pq) in stream_grid(cfg, 4)? {
        for n in [1usize, 17, 50, 200] {
            for (tl, x, y) in &tails {
                let dev = append_deviation(&pq, n, *x, *y)?;
                cells.push(SweepCell {
                    check: "append-tail".into(),
                    input: format!("{label} n={n} tails={tl}"),
                    observed: dev.hi(),
                    bound: 3.0,
                    ok: dev.hi() < 3.0,
                });
            }
        }
    }
    Ok(cells)
}

fn replaced_head(cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    let n = cfg.n.min(1_000);
    for x1 in 1..=9u64 {
        for z in [1u64, 2, 3] {
            let dev = replaced_head_deviation(x1, z, n)?;
            cells.push(SweepCell {
                check: "replaced-head".into(),
                input: format!("x1={x1} z={z} n={n}"),
                observed: dev.hi(),
                bound: 13.0,
                ok: dev.hi() < 13.0,
            });
        }
    }
    Ok(cells)
}

fn all_ones_floor(cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    for (label, pq) in stream_grid(cfg, 8)? {
        let n = usable_len(&pq, cfg, 300);
        let gap = all_ones_floor_gap(&pq, n, cfg.depth)?;
        cells.push(SweepCell {
            check: "all-ones-floor".into(),
            input: format!("{label} n={n}"),
            observed: -gap.hi(),
            bound: 0.0,
            ok: gap.hi() >= 0.0,
        });
    }
    Ok(cells)
}

fn usable_len(pq: &PartialQuotients, cfg: &SweepConfig, want: usize) -> usize {
    match pq.available() {
        Some(avail) => want.min(avail.saturating_sub(cfg.depth + 1)),
        None => want,
    }
}

/// Run a sweep and surface the first violation as a hard error.
pub fn require_clean(kind: SweepKind, cfg: &SweepConfig) -> Result<SweepReport> {
    let report = run_bound_sweep(kind, cfg)?;
    if let Some(v) = report.violations.first() {
        return Err(Error::Domain(format!(
            "bound violation in {}: {} observed {} vs bound {}",
            v.check, v.input, v.observed, v.bound
        )));
    }
    Ok(report)
}
