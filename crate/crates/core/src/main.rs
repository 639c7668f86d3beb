use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use bwmean::barycenter::{
    arithmetic_mean, bounds_report, harmonic_mean, karcher_mean, wasserstein_mean, InitialPoint,
    MeanProblem, SolverConfig,
};
use bwmean::ensemble::EnsembleSpec;
use bwmean::geometry::{
    riemannian_distance, wasserstein_distance, wasserstein_geodesic, GeodesicParam,
};
use bwmean::lie_trotter::{convergence_trace, dyadic_schedule, CurveSpec, LieTrotterTrace};
use bwmean::problem::parse_problem;
use bwmean::suite::{run_suite, SuiteSelection};
use bwmean::{Error, LoewnerVerdict};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "bwmean",
    version,
    about = "Bures-Wasserstein means of SPD matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted mean of the matrices in a problem file.
    Mean {
        #[arg(long, value_enum, default_value_t = Method::Wasserstein)]
        method: Method,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long, value_enum, default_value_t = Init::Arith)]
        init: Init,
    },
    /// Point at parameter t on the Wasserstein geodesic between two matrices.
    Geodesic {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// Distance between the two matrices of a problem file.
    Distance {
        #[arg(long, value_enum, default_value_t = Metric::Wasserstein)]
        metric: Metric,
        #[arg(long)]
        input: PathBuf,
    },
    /// Loewner bounds and their verdicts against the Wasserstein mean.
    Bounds {
        #[arg(long)]
        input: PathBuf,
    },
    /// Limit experiment along the power curves s -> A^s.
    LieTrotter {
        #[arg(long)]
        input: PathBuf,
        /// Step schedule, `dyadic:K` for s = 1, 1/2, ..., 2^-K.
        #[arg(long, default_value = "dyadic:10")]
        schedule: String,
        /// Also run the mirrored schedule -s.
        #[arg(long)]
        mirror: bool,
    },
    /// Runs the verification suites over a seeded ensemble.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Wasserstein,
    Karcher,
    Arithmetic,
    Harmonic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Arith,
    Identity,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Wasserstein,
    Riemannian,
}

/// Failure of a command, mapped to the process exit code.
enum Failure {
    Input(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(_)
            | Error::NotPositiveDefinite { .. }
            | Error::NonFinite { .. }
            | Error::NotSquare { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidParameter(_) => Failure::Input(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

fn load(path: &Path) -> Result<MeanProblem, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse_problem(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_pair(path: &Path) -> Result<MeanProblem, Failure> {
    let p = load(path)?;
    if p.len() != 2 {
        return Err(Failure::Input(format!(
            "{}: exactly 2 matrices required, found {}",
            path.display(),
            p.len()
        )));
    }
    Ok(p)
}

fn verdict(v: &LoewnerVerdict) -> Value {
    json!({ "holds": v.holds, "witness": v.witness })
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value"));
}

fn parse_schedule(s: &str) -> Result<Vec<f64>, Failure> {
    s.strip_prefix("dyadic:")
        .and_then(|k| k.parse::<u32>().ok())
        .filter(|&k| (1..=40).contains(&k))
        .map(dyadic_schedule)
        .ok_or_else(|| {
            Failure::Input(format!(
                "schedule must be dyadic:K with 1 ≤ K ≤ 40, got '{s}'"
            ))
        })
}

fn trace_table(out: &mut impl Write, label: &str, t: &LieTrotterTrace) -> io::Result<()> {
    writeln!(out, "# {label}")?;
    writeln!(out, "{:>14} {:>14} {:>10}", "s", "error", "ratio")?;
    let mut prev: Option<f64> = None;
    for (s, e) in t.s_values.iter().zip(&t.errors) {
        let ratio = match (prev, e) {
            (Some(p), Some(e)) => format!("{:.6}", e / p),
            _ => "-".into(),
        };
        let err = e.map_or("failed".into(), |e| format!("{e:.6e}"));
        writeln!(out, "{s:>14.6e} {err:>14} {ratio:>10}")?;
        prev = *e;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Mean {
            method,
            input,
            tol,
            max_iter,
            init,
        } => {
            let p = load(&input)?;
            let cfg = SolverConfig {
                rel_tol: tol,
                max_iter,
                initial: match init {
                    Init::Arith => InitialPoint::ArithmeticMean,
                    Init::Identity => InitialPoint::Identity,
                },
            };
            let (name, result) = match method {
                Method::Wasserstein => ("wasserstein", Some(wasserstein_mean(&p, &cfg)?)),
                Method::Karcher => ("karcher", Some(karcher_mean(&p, &cfg)?)),
                Method::Arithmetic => {
                    print(&json!({ "method": "arithmetic", "mean": arithmetic_mean(&p)?.rows() }));
                    return Ok(0);
                }
                Method::Harmonic => {
                    print(&json!({ "method": "harmonic", "mean": harmonic_mean(&p)?.rows() }));
                    return Ok(0);
                }
            };
            let r = result.expect("iterative method");
            print(&json!({
                "method": name,
                "mean": r.mean.rows(),
                "det": r.mean.det(),
                "iterations": r.iterations,
                "residual": r.residual,
                "converged": r.converged,
            }));
            Ok(if r.converged { 0 } else { EXIT_NOT_CONVERGED })
        }
        Command::Geodesic { input, t } => {
            let p = load_pair(&input)?;
            let t = GeodesicParam::new(t).map_err(|e| Failure::Input(e.to_string()))?;
            let g = wasserstein_geodesic(&p.matrices()[0], &p.matrices()[1], t)?;
            print(&json!({ "t": t.value(), "point": g.rows() }));
            Ok(0)
        }
        Command::Distance { metric, input } => {
            let p = load_pair(&input)?;
            let (a, b) = (&p.matrices()[0], &p.matrices()[1]);
            let d = match metric {
                Metric::Wasserstein => wasserstein_distance(a, b)?,
                Metric::Riemannian => riemannian_distance(a, b)?,
            };
            println!("{d:e}");
            Ok(0)
        }
        Command::Bounds { input } => {
            let p = load(&input)?;
            let r = wasserstein_mean(&p, &SolverConfig::default())?;
            let b = bounds_report(&p)?;
            let v = b.check_against(&r.mean, 1e-8)?;
            print(&json!({
                "bounds": {
                    "lower_lie_trotter": b.lower_lie_trotter.rows(),
                    "upper_arithmetic": b.upper_arithmetic.rows(),
                    "upper_inverse": b.upper_inverse.as_ref().map(|u| u.rows()),
                    "opnorm_bound": b.opnorm_bound,
                },
                "mean": r.mean.rows(),
                "converged": r.converged,
                "verdicts": {
                    "arithmetic_upper": verdict(&v.arithmetic),
                    "lie_trotter_lower": verdict(&v.lie_trotter),
                    "inverse_upper": v.inverse.as_ref().map(verdict),
                    "opnorm": { "holds": v.opnorm_holds, "norm": v.opnorm_mean },
                },
                "all_hold": v.all_hold(),
            }));
            Ok(if !r.converged {
                EXIT_NOT_CONVERGED
            } else if v.all_hold() {
                0
            } else {
                EXIT_CHECK_FAILED
            })
        }
        Command::LieTrotter {
            input,
            schedule,
            mirror,
        } => {
            let p = load(&input)?;
            let schedule = parse_schedule(&schedule)?;
            let curves: Vec<CurveSpec> =
                p.matrices().iter().cloned().map(CurveSpec::Power).collect();
            let report = convergence_trace(
                p.weights(),
                &curves,
                &schedule,
                &SolverConfig::default(),
                mirror,
            )?;
            let mut out = io::stdout().lock();
            let written = trace_table(&mut out, "s > 0", &report.positive).and_then(|_| {
                match &report.negative {
                    Some(neg) => trace_table(&mut out, "s < 0", neg),
                    None => Ok(()),
                }
            });
            // A closed pipe (e.g. `| head`) is not an error.
            match written {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                    Err(Failure::Input(format!("stdout: {e}")))
                }
                _ => Ok(0),
            }
        }
        Command::Verify {
            suite,
            seed,
            count,
            out,
        } => {
            let selection: SuiteSelection = suite.parse()?;
            let spec = EnsembleSpec {
                seed,
                count,
                ..EnsembleSpec::default()
            };
            let report = run_suite(&spec, &selection)?;
            let text = report.to_json();
            match out {
                Some(path) => fs::write(&path, text + "\n")
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
                None => println!("{text}"),
            }
            for f in report.failures() {
                eprintln!(
                    "FAIL {} instance {} seed {:#018x} {:?}",
                    f.check_id, f.instance_index, f.instance_seed, f.error
                );
            }
            eprintln!(
                "{} checks, {} failures",
                report.summary.total, report.summary.failures
            );
            Ok(if report.all_pass() {
                0
            } else {
                EXIT_CHECK_FAILED
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Solver { .. } | Error::EigenNotConverged { .. } => EXIT_NOT_CONVERGED,
                _ => EXIT_CHECK_FAILED,
            })
        }
    }
}
