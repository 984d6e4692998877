//! `trifpp` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 budget/window/range error,
//! 3 invariant failure. Data goes to `--out`; stdout carries a summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trifpp::arms::ArmKind;
use trifpp::duality::{verify_circuits, verify_quads, verify_strip_exhaustive};
use trifpp::montecarlo::{parse_arm_kind, run_experiment, ExperimentSpec};
use trifpp::records::{to_csv_string, to_json_string, ResultRecord, SweepConfig};
use trifpp::scaling::{Pi4Table, DEFAULT_MAX_RADIUS};
use trifpp::{AxisBox, Configuration, Error, Point, Window};

#[derive(Parser, Debug)]
#[command(name = "trifpp", version, about = "Bernoulli first-passage percolation on the triangular lattice")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Master seed; trial t uses a key derived from (seed, t).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    samples: u64,
    /// Write records to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sample a configuration and dump it (binary) to --out.
    Sample {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Half-side of the square window around the origin.
        #[arg(long, default_value_t = 16)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the three duality identities on random and exhaustive instances.
    VerifyDuality {
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Side of the square window for the circuit suite.
        #[arg(long, default_value_t = 20)]
        size: i32,
    },
    /// Time constant T(0, n e^{iθ})/n.
    EstimateMu {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        theta: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "64")]
        n: Vec<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Limit-shape anisotropy max/min over K directions.
    EstimateShape {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        n: u32,
        #[arg(long, default_value_t = 6)]
        k: u32,
        #[arg(long, default_value_t = 0.9)]
        level: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Correlation lengths L_ε(p) and, given a π₄ table, L(p).
    CorrLength {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_RADIUS)]
        max_radius: f64,
        /// π₄ table CSV written by `pi4-table`.
        #[arg(long)]
        table: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Arm-event probability in the annulus A(0; r, R).
    ArmProb {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long = "big-r")]
        big_r: f64,
        /// alternating:k, blue:k or yellow:k
        #[arg(long, default_value = "alternating:4", value_parser = parse_arms)]
        arms: ArmKind,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate π̂₄(R) at p = 1/2 for a list of radii.
    Pi4Table {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ratio L_ε(p)·μ(p) with μ measured at n = ⌈8 L_ε⌉.
    Ccd {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_RADIUS)]
        max_radius: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Slope of log L_ε(p) against log 1/(1/2 − p).
    FitExponent {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_RADIUS)]
        max_radius: f64,
        #[arg(long, default_value_t = 0.9)]
        level: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Fraction of good renormalized bonds of length n.
    GoodBonds {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Time-constant estimate in units of the length unit.
        #[arg(long)]
        nu: f64,
        /// Length unit in lattice sites.
        #[arg(long)]
        unit: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run every section of a sweep config file.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn parse_arms(s: &str) -> Result<ArmKind, String> {
    parse_arm_kind(s).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Limit(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Window(_) | Error::Budget(_) | Error::Range(_) | Error::Capacity(_) => Failure::Limit(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli.cmd)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Limit(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant violated: {m}");
            ExitCode::from(3)
        }
    }
}

fn spec(estimand: &str, ps: Vec<f64>, c: &Common) -> ExperimentSpec {
    ExperimentSpec {
        estimand: estimand.to_string(),
        ps,
        samples: c.samples,
        master_seed: c.seed,
        output: c.out.clone(),
        ..Default::default()
    }
}

fn emit(records: &[ResultRecord], out: Option<&Path>, format: Format) -> Result<(), Failure> {
    for r in records {
        let params = serde_json::to_string(&r.params).expect("maps serialize");
        println!("{} p={} {params}: mean = {} ± {} (n = {})", r.estimand, r.p, r.mean, r.stderr, r.n);
    }
    if let Some(path) = out {
        let text = match format {
            Format::Csv => to_csv_string(records),
            Format::Json => to_json_string(records),
        };
        fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {} records to {}", records.len(), path.display());
    }
    Ok(())
}

fn run_and_emit(s: ExperimentSpec, format: Format) -> Result<(), Failure> {
    let recs = run_experiment(&s)?;
    emit(&recs, s.output.as_deref(), format)
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Sample { p, seed, n, out } => {
            let c = Configuration::sample(Window::covering(&AxisBox::square(Point::ORIGIN, n as f64)), p, seed)?;
            let w = *c.window();
            println!(
                "window cols {}..={} rows {}..={}: {} sites, {} blue",
                w.col_min,
                w.col_max,
                w.row_min,
                w.row_max,
                w.len(),
                c.blue_count()
            );
            if w.width() <= 80 {
                for row in (w.row_min..=w.row_max).rev() {
                    let indent = if row.rem_euclid(2) == 1 { " " } else { "" };
                    let line: String = (w.col_min..=w.col_max)
                        .map(|col| if c.is_blue(Window::site_at(col, row)) == Some(true) { "B " } else { ". " })
                        .collect();
                    println!("{indent}{}", line.trim_end());
                }
            }
            if let Some(path) = out {
                fs::write(&path, c.encode()).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
                println!("wrote configuration to {}", path.display());
            }
            Ok(())
        }
        Cmd::VerifyDuality { samples, seed, size } => {
            let quads = verify_quads(samples, seed)?;
            println!("quads: checked {}, mismatches {}", quads.checked, quads.mismatches);
            let circuits = verify_circuits(samples, size, seed)?;
            println!(
                "circuits: checked {}, skipped {} (skip rate {:.3}), mismatches {}",
                circuits.checked,
                circuits.skipped,
                circuits.skip_rate(),
                circuits.mismatches
            );
            let strip = verify_strip_exhaustive()?;
            println!("strip: checked {}, mismatches {}", strip.checked, strip.mismatches);
            let total = quads.mismatches + circuits.mismatches + strip.mismatches;
            println!("mismatches: {total}");
            if total > 0 {
                return Err(Failure::Invariant(format!("{total} duality mismatches")));
            }
            Ok(())
        }
        Cmd::EstimateMu { p, theta, n, common } => {
            let s = ExperimentSpec { thetas: theta, ns: n, ..spec("mu", p, &common) };
            run_and_emit(s, common.format)
        }
        Cmd::EstimateShape { p, n, k, level, common } => {
            let s = ExperimentSpec { ns: vec![n], directions: k, level, ..spec("shape", p, &common) };
            run_and_emit(s, common.format)
        }
        Cmd::CorrLength { p, eps, max_radius, table, common } => {
            let s = ExperimentSpec { eps, max_radius, ..spec("corr-length-eps", p.clone(), &common) };
            let mut recs = run_experiment(&s)?;
            if let Some(path) = table {
                let text = fs::read_to_string(&path)
                    .map_err(|e| Failure::Usage(format!("cannot read π₄ table {}: {e}", path.display())))?;
                let t = Pi4Table::parse(&text)?;
                let s = ExperimentSpec { pi4_table: Some(t), ..spec("corr-length-L", p, &common) };
                recs.extend(run_experiment(&s)?);
            }
            emit(&recs, common.out.as_deref(), common.format)
        }
        Cmd::ArmProb { p, r, big_r, arms, common } => {
            let s = ExperimentSpec { inner_radius: r, radius: big_r, arms, ..spec("arm-prob", p, &common) };
            run_and_emit(s, common.format)
        }
        Cmd::Pi4Table { n, seed, samples, out } => {
            let t = Pi4Table::build(&n, samples, seed)?;
            for r in t.rows() {
                println!("R = {}: π₄ = {} ± {}", r.radius, r.mean, r.stderr);
            }
            if let Some(path) = out {
                fs::write(&path, t.to_csv_string()).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
                println!("wrote table to {}", path.display());
            }
            Ok(())
        }
        Cmd::Ccd { p, eps, max_radius, common } => {
            let s = ExperimentSpec { eps, max_radius, ..spec("ccd", p, &common) };
            run_and_emit(s, common.format)
        }
        Cmd::FitExponent { p, eps, max_radius, level, common } => {
            let s = ExperimentSpec { eps, max_radius, level, ..spec("fit-exponent", p, &common) };
            run_and_emit(s, common.format)
        }
        Cmd::GoodBonds { p, n, eps, nu, unit, common } => {
            let s = ExperimentSpec { ns: vec![n], eps, nu, length_unit: unit, ..spec("good-bonds", p, &common) };
            run_and_emit(s, common.format)
        }
        Cmd::Sweep { config, out, format } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| Failure::Usage(format!("cannot read sweep config {}: {e}", config.display())))?;
            let cfg = SweepConfig::parse(&text)?;
            let specs = ExperimentSpec::from_sweep(&cfg)?;
            let mut all = Vec::new();
            for s in &specs {
                let recs = run_experiment(s)?;
                if let Some(path) = &s.output {
                    emit(&recs, Some(path), format)?;
                } else {
                    emit(&recs, None, format)?;
                }
                all.extend(recs);
            }
            if let Some(path) = out {
                let text = match format {
                    Format::Csv => to_csv_string(&all),
                    Format::Json => to_json_string(&all),
                };
                fs::write(&path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
                println!("wrote {} records to {}", all.len(), path.display());
            }
            Ok(())
        }
    }
}
