//! `dal`: continued fractions, the irrationality measure function and its
//! integral, Gauss-map dynamics, block construction, seeded experiments,
//! bound sweeps, and SVG step plots.
//!
//! Exit codes: 0 success, 1 usage/domain error, 2 precision or
//! digits-exhausted error, 3 bound violation in a sweep.

mod alpha;
mod plot;

use alpha::{parse_alpha, parse_rational, AlphaOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dal_core::cf::{convergents, PartialQuotients};
use dal_core::dynamics;
use dal_core::error::Error;
use dal_core::experiments::{self, sweep, ExperimentConfig};
use dal_core::extremal;
use dal_core::interval::Interval;
use dal_core::measure;
use num_rational::BigRational;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dal",
    version,
    about = "Exact continued-fraction toolkit for the irrationality measure function in average"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct IoArgs {
    /// Write output to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct AlphaArgs {
    /// Number: golden | [0;a1,a2,...] | periodic:pre|rep | random[:seed] |
    /// construct:d | file:path
    alpha: String,
    /// Random bits budget for `random` inputs
    #[arg(long, default_value_t = 100_000)]
    bits: u64,
    /// Seed for `random` inputs given without an embedded seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tail certification depth (default 40; DAL_PRECISION_BITS overrides)
    #[arg(long)]
    depth: Option<usize>,
}

impl AlphaArgs {
    fn depth(&self) -> usize {
        self.depth.unwrap_or_else(default_depth)
    }

    fn stream(&self, digits_hint: usize) -> dal_core::Result<PartialQuotients> {
        parse_alpha(
            &self.alpha,
            &AlphaOptions {
                digits_hint,
                bits: self.bits,
                seed: self.seed,
                depth: self.depth(),
            },
        )
    }
}

fn default_depth() -> usize {
    std::env::var("DAL_PRECISION_BITS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(measure::DEFAULT_TAIL_DEPTH)
}

#[derive(Subcommand)]
enum Command {
    /// Print the digit stream a_1..a_n
    Digits {
        #[command(flatten)]
        alpha: AlphaArgs,
        /// How many digits to print
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Print exact convergents p_nu/q_nu for nu = -1..=n
    Convergents {
        #[command(flatten)]
        alpha: AlphaArgs,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Value of the measure function at t (or its full step trace with --trace)
    Psi {
        #[command(flatten)]
        alpha: AlphaArgs,
        /// Evaluation point, a rational like 5/2
        #[arg(long)]
        t: String,
        /// Emit one row per step on [1, t]
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Certified integral of the measure function from 1 to t
    Integral {
        #[command(flatten)]
        alpha: AlphaArgs,
        #[arg(long)]
        t: String,
        /// Emit the per-segment summand/partial-sum trace instead
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Partial sum G_n of the segment summands
    Gsum {
        #[command(flatten)]
        alpha: AlphaArgs,
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Emit the per-segment trace rows instead of the single value
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Exact per-digit mean of the constant stream (z, z, ...)
    Sz {
        /// Digit value, rational >= 1
        #[arg(long)]
        z: String,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Build a stream whose running average targets d; dumps block metadata
    Construct {
        /// Target in [1/2 - sqrt(5)/10, 1], e.g. 0.4 or 2/5
        #[arg(long)]
        d: String,
        /// Digits to generate
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Natural-extension orbit in closed form (exact y coordinates)
    Orbit {
        #[command(flatten)]
        alpha: AlphaArgs,
        /// Starting second coordinate, rational in [0,1]
        #[arg(long, default_value = "0")]
        y0: String,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Birkhoff sum and mean of (1-y)/(1+xy) along the orbit
    Birkhoff {
        #[command(flatten)]
        alpha: AlphaArgs,
        #[arg(long, default_value = "0")]
        y0: String,
        #[arg(long, default_value_t = 1_000)]
        n: usize,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Certified enclosures of the invariant-density integrals
    Quadrature {
        /// Grid cells for the one-dimensional reduced integrals
        #[arg(long, default_value_t = 4096)]
        resolution: usize,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Denominator growth rate (ln q_n)/n
    Levy {
        #[command(flatten)]
        alpha: AlphaArgs,
        #[arg(long, default_value_t = 1_000)]
        n: usize,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Seeded Monte Carlo experiments (theorem1 | theorem4 | levy)
    Experiment {
        /// Which experiment: theorem1, theorem4, or levy
        kind: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Digits per trial
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Master seed (per-trial seeds are hashed from it)
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Random bits per draw
        #[arg(long, default_value_t = 100_000)]
        bits: u64,
        /// Blanket per-trial tolerance override for all statistics
        #[arg(long)]
        tolerance: Option<f64>,
        /// Directory for trial CSV + summary JSON (summary also on stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check proven bounds over parameter grids; exit 3 on any violation
    Sweep {
        /// Family name (see --help list) or "all"
        #[arg(default_value = "all")]
        which: String,
        /// Scale for the heaviest grids
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Render a CSV trace (psi steps, G_n/n, orbit, any numeric CSV) as SVG
    Plot {
        /// Input CSV path
        input: PathBuf,
        /// Output SVG path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Plot title
        #[arg(long)]
        title: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::NeedsMoreDigits { .. }
                | Error::InsufficientPrecision { .. }
                | Error::AmbiguousEnclosure { .. }
                | Error::Inconclusive => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn emit(io: &IoArgs, content: &str) -> dal_core::Result<()> {
    match &io.out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn interval_json(iv: &Interval) -> serde_json::Value {
    let mv = iv.to_measured();
    json!({"lo": iv.lo(), "hi": iv.hi(), "value": mv.value, "err": mv.err})
}

fn run(cmd: Command) -> dal_core::Result<u8> {
    match cmd {
        Command::Digits { alpha, n, io } => {
            let pq = alpha.stream(n)?;
            let shown = match pq.available() {
                Some(avail) => avail.min(n),
                None => n,
            };
            let digits = pq.digits_up_to(shown)?;
            match io.format {
                Format::Csv => {
                    let mut out = String::from("nu,digit\n");
                    for (i, d) in digits.iter().enumerate() {
                        out.push_str(&format!("{},{}\n", i + 1, d));
                    }
                    emit(&io, &out)?;
                }
                Format::Json => {
                    let v = json!({
                        "source": pq.source_label(),
                        "digits": digits,
                        "certified_count": pq.certified_count(),
                        "preview": pq.digits_preview(n),
                    });
                    emit(&io, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))?;
                }
            }
            Ok(0)
        }
        Command::Convergents { alpha, n, io } => {
            let pq = alpha.stream(n)?;
            let pairs = convergents(&pq, n)?;
            match io.format {
                Format::Csv => {
                    let mut out = String::from("nu,p,q\n");
                    for c in &pairs {
                        out.push_str(&format!("{},{},{}\n", c.nu, c.p, c.q));
                    }
                    emit(&io, &out)?;
                }
                Format::Json => {
                    let rows: Vec<_> = pairs
                        .iter()
                        .map(|c| json!({"nu": c.nu, "p": c.p.to_string(), "q": c.q.to_string()}))
                        .collect();
                    emit(&io, &format!("{}\n", serde_json::to_string_pretty(&rows).unwrap()))?;
                }
            }
            Ok(0)
        }
        Command::Psi {
            alpha,
            t,
            trace,
            io,
        } => {
            let t = parse_rational(&t)?;
            let depth = alpha.depth();
            let pq = alpha.stream(digits_hint_for_t(&t))?;
            if trace {
                let rows = measure::psi_trace(&pq, &t, depth)?;
                let mut out = String::from(measure::PSI_TRACE_CSV_HEADER);
                out.push('\n');
                for r in &rows {
                    out.push_str(&r.to_csv());
                    out.push('\n');
                }
                if io.format == Format::Json {
                    let rows: Vec<_> = rows
                        .iter()
                        .map(|r| {
                            json!({"nu": r.nu, "t_start": r.t_start.to_string(),
                                   "t_end": r.t_end.to_string(), "psi": interval_json(&r.value)})
                        })
                        .collect();
                    out = format!("{}\n", serde_json::to_string_pretty(&rows).unwrap());
                }
                emit(&io, &out)?;
            } else {
                let psi = measure::psi_at(&pq, &t, depth)?;
                match io.format {
                    Format::Csv => {
                        let out = format!(
                            "t,nu,psi_lo,psi_hi\n{},{},{},{}\n",
                            t,
                            psi.nu,
                            psi.value.lo(),
                            psi.value.hi()
                        );
                        emit(&io, &out)?;
                    }
                    Format::Json => {
                        let v = json!({"t": t.to_string(), "nu": psi.nu,
                                       "psi": interval_json(&psi.value)});
                        emit(&io, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))?;
                    }
                }
            }
            Ok(0)
        }
        Command::Integral {
            alpha,
            t,
            trace,
            io,
        } => {
            let t = parse_rational(&t)?;
            let depth = alpha.depth();
            let pq = alpha.stream(digits_hint_for_t(&t))?;
            if trace {
                let seg = measure::segment_index(&pq, &t)?;
                emit_trace(&pq, seg.n, depth, &io)?;
            } else {
                let br = measure::integral_i(&pq, &t, depth)?;
                match io.format {
                    Format::Csv => {
                        let out = format!(
                            "t,N,G_lo,G_hi,A_lo,A_hi,total_lo,total_hi\n{},{},{},{},{},{},{},{}\n",
                            t,
                            br.n,
                            br.partial_sum.lo(),
                            br.partial_sum.hi(),
                            br.boundary.lo(),
                            br.boundary.hi(),
                            br.total.lo(),
                            br.total.hi()
                        );
                        emit(&io, &out)?;
                    }
                    Format::Json => {
                        let v = json!({"t": t.to_string(), "N": br.n,
                                       "partial_sum": interval_json(&br.partial_sum),
                                       "boundary": interval_json(&br.boundary),
                                       "total": interval_json(&br.total)});
                        emit(&io, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))?;
                    }
                }
            }
            Ok(0)
        }
        Command::Gsum {
            alpha,
            n,
            trace,
            io,
        } => {
            let depth = alpha.depth();
            let pq = alpha.stream(n + depth + 1)?;
            if trace {
                emit_trace(&pq, n, depth, &io)?;
            } else {
                let g = measure::partial_sum_g(&pq, n, depth)?;
                match io.format {
                    Format::Csv => {
                        emit(&io, &format!("n,G_lo,G_hi\n{},{},{}\n", n, g.lo(), g.hi()))?;
                    }
                    Format::Json => {
                        let v = json!({"n": n, "partial_sum": interval_json(&g)});
                        emit(&io, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))?;
                    }
                }
            }
            Ok(0)
        }
        Command::Sz { z, io } => {
            let z = parse_rational(&z)?;
            let mean = extremal::constant_stream_mean(&z)?;
            let iv = mean.to_interval();
            match io.format {
                Format::Csv => {
                    emit(
                        &io,
                        &format!("z,exact,lo,hi\n{},{},{},{}\n", z, mean, iv.lo(), iv.hi()),
                    )?;
                }
                Format::Json => {
                    let v = json!({"z": z.to_string(), "exact": mean.to_string(),
                                   "mean": interval_json(&iv)});
                    emit(&io, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))?;
                }
            }
            Ok(0)
        }
        Command::Construct { d, n, io } => {
            let d = parse_rational(&d)?;
            let pq = extremal::construct_alpha(&d, n)?;
            let spec = pq.block_spec().unwrap();
            let v = json!({
                "d": spec.d,
                "a": spec.a,
                "b": spec.b,
                "block_lengths": spec.block_lengths,
                "w_t": spec.w_t,
                "max_block": spec.max_block,
                "constant": spec.constant,
                "increasing": spec.increasing,
                "digits_generated": n,
                "digits_preview": pq.digits_preview(32),
            });
            emit(&io, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))?;
            Ok(0)
        }
        Command::Orbit { alpha, y0, n, io } => {
            let y0 = parse_rational(&y0)?;
            let depth = alpha.depth();
            let pq = alpha.stream(n + depth + 1)?;
            let orbit = dynamics::orbit_via_convergents(&pq, &y0, n, depth)?;
            match io.format {
                Format::Csv => {
                    let mut out = String::from(dynamics::ORBIT_CSV_HEADER);
                    out.push('\n');
                    for p in &orbit {
                        out.push_str(&p.to_csv());
                        out.push('\n');
                    }
                    emit(&io, &out)?;
                }
                Format::Json => {
                    let rows: Vec<_> = orbit
                        .iter()
                        .map(|p| {
                            json!({"nu": p.nu, "x": interval_json(&p.x),
                                   "y": p.y.to_string(), "f": interval_json(&p.f)})
                        })
                        .collect();
                    emit(&io, &format!("{}\n", serde_json::to_string_pretty(&rows).unwrap()))?;
                }
            }
            Ok(0)
        }
        Command::Birkhoff { alpha, y0, n, io } => {
            let y0 = parse_rational(&y0)?;
            let depth = alpha.depth();
            let pq = alpha.stream(n + depth + 1)?;
            let acc = dynamics::birkhoff_mean(&pq, &y0, n, depth)?;
            match io.format {
                Format::Csv => {
                    let out = format!(
                        "n,sum_lo,sum_hi,mean_lo,mean_hi\n{},{},{},{},{}\n",
                        acc.n,
                        acc.sum.lo(),
                        acc.sum.hi(),
                        acc.mean.lo(),
                        acc.mean.hi()
                    );
                    emit(&io, &out)?;
                }
                Format::Json => {
                    let v = json!({"n": acc.n, "sum": interval_json(&acc.sum),
                                   "mean": interval_json(&acc.mean)});
                    emit(&io, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))?;
                }
            }
            Ok(0)
        }
        Command::Quadrature { resolution, io } => {
            let (weighted, mass) = dynamics::gauss_density_integrals(resolution)?;
            match io.format {
                Format::Csv => {
                    let out = format!(
                        "integral,lo,hi,width\nweighted_observable,{},{},{}\nmeasure_mass,{},{},{}\n",
                        weighted.lo(),
                        weighted.hi(),
                        weighted.width(),
                        mass.lo(),
                        mass.hi(),
                        mass.width()
                    );
                    emit(&io, &out)?;
                }
                Format::Json => {
                    let v = json!({"resolution": resolution,
                                   "weighted_observable": interval_json(&weighted),
                                   "measure_mass": interval_json(&mass)});
                    emit(&io, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))?;
                }
            }
            Ok(0)
        }
        Command::Levy { alpha, n, io } => {
            let pq = alpha.stream(n)?;
            let r = dynamics::levy_ratio(&pq, n)?;
            match io.format {
                Format::Csv => {
                    emit(&io, &format!("n,lo,hi\n{},{},{}\n", n, r.lo(), r.hi()))?;
                }
                Format::Json => {
                    let v = json!({"n": n, "levy_ratio": interval_json(&r)});
                    emit(&io, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))?;
                }
            }
            Ok(0)
        }
        Command::Experiment {
            kind,
            trials,
            n,
            seed,
            bits,
            tolerance,
            out,
        } => run_experiment(&kind, trials, n, seed, bits, tolerance, out),
        Command::Sweep { which, n, seed, io } => {
            let cfg = sweep::SweepConfig {
                seed,
                n,
                depth: default_depth(),
            };
            let report = if which == "all" {
                sweep::run_all_sweeps(&cfg)?
            } else {
                let kind = sweep::SweepKind::from_name(&which).ok_or_else(|| {
                    Error::Domain(format!(
                        "unknown sweep '{which}'; families: all, {}",
                        sweep::SweepKind::ALL
                            .iter()
                            .map(|k| k.name())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ))
                })?;
                sweep::run_bound_sweep(kind, &cfg)?
            };
            match io.format {
                Format::Csv => {
                    let mut out_text = String::from(sweep::SWEEP_CSV_HEADER);
                    out_text.push('\n');
                    for c in &report.cells {
                        out_text.push_str(&c.to_csv());
                        out_text.push('\n');
                    }
                    emit(&io, &out_text)?;
                }
                Format::Json => {
                    emit(
                        &io,
                        &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
                    )?;
                }
            }
            for v in &report.violations {
                eprintln!(
                    "violation: {} at {} observed {} vs bound {}",
                    v.check, v.input, v.observed, v.bound
                );
            }
            Ok(if report.ok { 0 } else { 3 })
        }
        Command::Plot { input, out, title } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| Error::Domain(format!("cannot read {}: {e}", input.display())))?;
            let title = title.unwrap_or_else(|| input.display().to_string());
            let svg = plot::plot_csv(&text, &title)?;
            match out {
                Some(path) => std::fs::write(&path, svg)
                    .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())))?,
                None => print!("{svg}"),
            }
            Ok(0)
        }
    }
}

/// Digits needed to bracket t: the denominators at least double every two
/// steps, so 2 log2(t) + slack is enough.
fn digits_hint_for_t(t: &BigRational) -> usize {
    let bits = t.numer().bits().max(1) as usize;
    2 * bits + 64
}

fn emit_trace(
    pq: &PartialQuotients,
    n: usize,
    depth: usize,
    io: &IoArgs,
) -> dal_core::Result<()> {
    let rows = measure::integral_trace(pq, n, depth)?;
    match io.format {
        Format::Csv => {
            let mut out = String::from(measure::TRACE_CSV_HEADER);
            out.push('\n');
            for r in &rows {
                out.push_str(&r.to_csv());
                out.push('\n');
            }
            emit(io, &out)
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({"nu": r.nu, "q_nu": r.q_nu.to_string(),
                           "summand": interval_json(&r.summand),
                           "partial_sum": interval_json(&r.partial_sum)})
                })
                .collect();
            emit(io, &format!("{}\n", serde_json::to_string_pretty(&rows).unwrap()))
        }
    }
}

fn run_experiment(
    kind: &str,
    trials: usize,
    n: usize,
    seed: u64,
    bits: u64,
    tolerance: Option<f64>,
    out: Option<PathBuf>,
) -> dal_core::Result<u8> {
    let mut cfg = ExperimentConfig {
        master_seed: seed,
        trials,
        digits_n: n,
        bits,
        ..ExperimentConfig::default()
    };
    if let Some(tol) = tolerance {
        cfg.tolerance_g = tol;
        cfg.tolerance_integral = tol;
        cfg.tolerance_levy = tol;
    }
    let (csv, summary) = match kind {
        "theorem1" => {
            let (trials, summary) = experiments::run_average_experiment(&cfg)?;
            let mut csv = String::from(experiments::AVERAGE_CSV_HEADER);
            csv.push('\n');
            for t in &trials {
                csv.push_str(&t.to_csv());
                csv.push('\n');
            }
            (csv, summary)
        }
        "theorem4" => {
            let (trials, summary) = experiments::run_pair_experiment(&cfg)?;
            let mut csv = String::from(experiments::PAIR_CSV_HEADER);
            csv.push('\n');
            for t in &trials {
                csv.push_str(&t.to_csv());
                csv.push('\n');
            }
            (csv, summary)
        }
        "levy" => {
            let (trials, summary) = experiments::run_levy_experiment(&cfg)?;
            let mut csv = String::from(experiments::LEVY_CSV_HEADER);
            csv.push('\n');
            for t in &trials {
                csv.push_str(&t.to_csv());
                csv.push('\n');
            }
            (csv, summary)
        }
        other => {
            return Err(Error::Domain(format!(
                "unknown experiment '{other}' (theorem1, theorem4, levy)"
            )))
        }
    };
    let summary_json = format!("{}\n", serde_json::to_string_pretty(&summary).unwrap());
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)
            .map_err(|e| Error::Domain(format!("cannot create {}: {e}", dir.display())))?;
        let csv_path = dir.join(format!("{kind}_trials.csv"));
        let json_path = dir.join(format!("{kind}_summary.json"));
        std::fs::write(&csv_path, &csv)
            .map_err(|e| Error::Domain(format!("cannot write {}: {e}", csv_path.display())))?;
        std::fs::write(&json_path, &summary_json)
            .map_err(|e| Error::Domain(format!("cannot write {}: {e}", json_path.display())))?;
        eprintln!("wrote {} and {}", csv_path.display(), json_path.display());
    }
    print!("{summary_json}");
    Ok(0)
}
