//! `deutsch-sim`: command-line front end for the optics simulator.
//!
//! Exit codes: 0 success, 1 runtime or verification failure, 2 usage or
//! parse error.

mod analyze;
mod csvio;
mod gates;
mod phase;
mod plot;
mod report;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use deutsch_optics::benchdsl::{self, CompileError, Element, PhaseValue};
use deutsch_optics::deutsch::{run_deutsch, GateSource, DEFAULT_CLASSIFY_TOL};
use deutsch_optics::labsim::{simulate_sweep, LabError};
use deutsch_optics::optics::{config_for, kind_for};
use deutsch_optics::{OracleKind, SweepConfig};

use crate::report::{fixed12, RunReport};

/// Environment variable overriding the default sweep seed.
pub const SEED_ENV: &str = "DEUTSCH_SIM_SEED";

/// Error reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(
    name = "deutsch-sim",
    version,
    about = "Deutsch's algorithm on a simulated single-photon Sagnac bench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the gate algebra: oracle table, involutions, Hadamard plate.
    GatesVerify {
        /// Negative control: flip the dove-prism sign in every configuration.
        #[arg(long)]
        wrong_dp_sign: bool,
    },
    /// Run the algorithm once and report detection probabilities.
    Run {
        #[arg(long, value_enum)]
        oracle: OracleArg,
        /// Input phase in radians, or a multiple of pi (`pi`, `0.5pi`, `3pi/2`).
        #[arg(long, value_parser = parse_phase_arg, allow_hyphen_values = true)]
        phase: f64,
        #[arg(long, value_enum, default_value_t = SourceArg::Ideal)]
        source: SourceArg,
        #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
        tol: f64,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Simulate a PZT voltage sweep and write the counts as CSV.
    Sweep {
        #[arg(long, value_enum)]
        oracle: OracleArg,
        /// Output CSV path (`-` for stdout).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: SweepArgs,
    },
    /// Contrast ratios, fringe fit and class decision for a sweep CSV.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        /// Coupling drift per volt assumed by the fringe fit.
        #[arg(long, default_value_t = 0.0)]
        drift_per_volt: f64,
        /// Significance (in standard deviations) required for a class decision.
        #[arg(long, default_value_t = 3.0)]
        z: f64,
        #[arg(long)]
        json: bool,
    },
    /// Compile or run a bench description file.
    Bench {
        #[arg(value_enum)]
        action: BenchAction,
        #[arg(long)]
        file: PathBuf,
        /// Symbol binding, e.g. `PHI=pi`. Repeatable.
        #[arg(long = "bind", value_parser = parse_binding, allow_hyphen_values = true)]
        bindings: Vec<(String, f64)>,
        #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Render a sweep CSV as SVG with a plain-text data sidecar.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        /// SVG output path; the sidecar is written next to it with a `.txt` extension.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        drift_per_volt: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Const0,
    Const1,
    Id,
    Inv,
}

impl From<OracleArg> for OracleKind {
    fn from(a: OracleArg) -> Self {
        match a {
            OracleArg::Const0 => OracleKind::ConstantZero,
            OracleArg::Const1 => OracleKind::ConstantOne,
            OracleArg::Id => OracleKind::BalancedIdentity,
            OracleArg::Inv => OracleKind::BalancedInverse,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SourceArg {
    Ideal,
    Sagnac,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchAction {
    Compile,
    Run,
}

#[derive(Args)]
struct SweepArgs {
    /// Detected photon rate (counts/s).
    #[arg(long, default_value_t = 150_000.0)]
    rate: f64,
    /// Integration time per point (s).
    #[arg(long, default_value_t = 1.0)]
    integration_time: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    v_start: f64,
    #[arg(long, default_value_t = 34.0, allow_hyphen_values = true)]
    v_end: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    v_step: f64,
    /// PZT voltage per 2π of phase.
    #[arg(long, default_value_t = 17.0)]
    volts_per_period: f64,
    #[arg(long, value_parser = parse_phase_arg, default_value = "0", allow_hyphen_values = true)]
    phase_offset: f64,
    #[arg(long, default_value_t = 1.0)]
    visibility: f64,
    #[arg(long, default_value_t = 0.0)]
    extinction: f64,
    #[arg(long, default_value_t = 0.0)]
    drift_per_volt: f64,
    #[arg(long, default_value_t = 0.0)]
    background_prob: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 42)]
    seed: u64,
}

impl From<&SweepArgs> for SweepConfig {
    fn from(a: &SweepArgs) -> Self {
        SweepConfig {
            rate: a.rate,
            integration_time: a.integration_time,
            v_start: a.v_start,
            v_end: a.v_end,
            v_step: a.v_step,
            volts_per_period: a.volts_per_period,
            phase_offset: a.phase_offset,
            visibility: a.visibility,
            extinction: a.extinction,
            drift_per_volt: a.drift_per_volt,
            background_prob: a.background_prob,
            seed: a.seed,
        }
    }
}

fn parse_phase_arg(s: &str) -> Result<f64, String> {
    phase::parse_phase(s)
}

fn parse_binding(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("binding `{s}` must look like NAME=value"))?;
    if name.is_empty() {
        return Err(format!("binding `{s}` has an empty name"));
    }
    Ok((name.to_string(), phase::parse_phase(value)?))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 0.5 {
        Ok(())
    } else {
        Err(UsageError(format!("--tol must lie in (0, 0.5), got {tol}")).into())
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_gates_verify(wrong_dp_sign: bool) -> Result<ExitCode> {
    let checks = gates::verify(wrong_dp_sign);
    let mut out = io::stdout().lock();
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        if c.detail.is_empty() {
            writeln!(out, "[{tag}] {}", c.name)?;
        } else {
            writeln!(out, "[{tag}] {} ({})", c.name, c.detail)?;
        }
    }
    let oracle_ok = checks
        .iter()
        .filter(|c| c.name.starts_with("oracle") && c.passed)
        .count();
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(out, "oracle equivalences: {oracle_ok}/4")?;
    writeln!(
        out,
        "checks: {}/{} passed",
        checks.len() - failed,
        checks.len()
    )?;
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_run(
    kind: OracleKind,
    phi: f64,
    source: SourceArg,
    tol: f64,
    json: bool,
) -> Result<ExitCode> {
    check_tol(tol)?;
    let (gate_source, label) = match source {
        SourceArg::Ideal => (GateSource::IdealOracle, "ideal"),
        SourceArg::Sagnac => (GateSource::Sagnac(config_for(kind)), "sagnac"),
    };
    let outcome = run_deutsch(kind, phi, gate_source)?;
    let report = RunReport::new(
        Some(kind),
        Some(phi),
        outcome.probs,
        tol,
        outcome.oracle_queries,
        label,
    );
    if json {
        print_json(&report)?;
    } else {
        print!("{report}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(kind: OracleKind, out: &Path, args: &SweepArgs) -> Result<ExitCode> {
    let cfg = SweepConfig::from(args);
    let records = match simulate_sweep(kind, &cfg) {
        Err(e @ LabError::InvalidConfig(_)) => return Err(UsageError(e.to_string()).into()),
        r => r?,
    };
    if out.as_os_str() == "-" {
        csvio::write_records(io::stdout().lock(), &records)?;
    } else {
        let f = fs::File::create(out).with_context(|| format!("cannot write {}", out.display()))?;
        csvio::write_records(io::BufWriter::new(f), &records)
            .with_context(|| format!("cannot write {}", out.display()))?;
        eprintln!("wrote {} rows to {}", records.len(), out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(input: &Path, drift: f64, z: f64, json: bool) -> Result<ExitCode> {
    let records = csvio::read_file(input)?;
    let analysis = analyze::analyze(&records, drift, z);
    if json {
        print_json(&analysis)?;
    } else {
        print!("{analysis}");
    }
    Ok(ExitCode::SUCCESS)
}

fn load_bench(file: &Path) -> Result<benchdsl::BenchProgram> {
    let bytes = fs::read(file).with_context(|| format!("cannot read {}", file.display()))?;
    match benchdsl::parse_bytes(&bytes) {
        Ok(p) => {
            for w in &p.warnings {
                eprintln!("{}:{w}", file.display());
            }
            Ok(p)
        }
        Err(diags) => {
            for d in &diags {
                eprintln!("{}:{d}", file.display());
            }
            let n = diags.iter().filter(|d| d.is_error()).count();
            Err(UsageError(format!("{n} error(s) in {}", file.display())).into())
        }
    }
}

fn cmd_bench(
    action: BenchAction,
    file: &Path,
    bindings: &[(String, f64)],
    tol: f64,
    json: bool,
) -> Result<ExitCode> {
    check_tol(tol)?;
    let program = load_bench(file)?;
    let map: BTreeMap<String, f64> = bindings.iter().cloned().collect();
    let compiled = benchdsl::compile(&program, &map).map_err(|e| match e {
        CompileError::Unbound { .. } | CompileError::Optics { .. } | CompileError::NoSource => {
            anyhow!(UsageError(format!("{}: {e}", file.display())))
        }
    })?;
    match action {
        BenchAction::Compile => {
            let u = compiled.composed();
            let mut out = io::stdout().lock();
            if json {
                let m: Vec<Vec<[String; 2]>> = u
                    .matrix()
                    .iter()
                    .map(|row| row.iter().map(|c| [fixed12(c.re), fixed12(c.im)]).collect())
                    .collect();
                serde_json::to_writer_pretty(&mut out, &m)?;
                writeln!(out)?;
            } else {
                for row in u.matrix() {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|c| format!("({}, {})", fixed12(c.re), fixed12(c.im)))
                        .collect();
                    writeln!(out, "{}", cells.join(" "))?;
                }
            }
        }
        BenchAction::Run => {
            let probs = compiled.run()?;
            let kind = match compiled.sagnac.as_slice() {
                [cfg] => Some(kind_for(*cfg)),
                _ => None,
            };
            // Total phase on the r arm; compile already checked every symbol is bound.
            let phases: Vec<f64> = program
                .elements
                .iter()
                .filter_map(|n| match &n.element {
                    Element::Phase {
                        value: PhaseValue::Radians(r),
                    } => Some(*r),
                    Element::Phase {
                        value: PhaseValue::Symbol(s),
                    } => map.get(s).copied(),
                    _ => None,
                })
                .collect();
            let phi = (!phases.is_empty()).then(|| phases.iter().sum());
            let source = if compiled.sagnac.is_empty() {
                "bench"
            } else {
                "sagnac"
            };
            let report = RunReport::new(kind, phi, probs, tol, compiled.sagnac.len(), source);
            if json {
                print_json(&report)?;
            } else {
                print!("{report}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_plot(input: &Path, out: &Path, drift: f64) -> Result<ExitCode> {
    let records = csvio::read_file(input)?;
    let data = plot::PlotData::new(records, drift);
    fs::write(out, data.svg()).with_context(|| format!("cannot write {}", out.display()))?;
    let sidecar = out.with_extension("txt");
    fs::write(&sidecar, data.sidecar())
        .with_context(|| format!("cannot write {}", sidecar.display()))?;
    eprintln!("wrote {} and {}", out.display(), sidecar.display());
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::GatesVerify { wrong_dp_sign } => cmd_gates_verify(wrong_dp_sign),
        Command::Run {
            oracle,
            phase,
            source,
            tol,
            json,
        } => cmd_run(oracle.into(), phase, source, tol, json),
        Command::Sweep {
            oracle,
            out,
            config,
        } => cmd_sweep(oracle.into(), &out, &config),
        Command::Analyze {
            input,
            drift_per_volt,
            z,
            json,
        } => cmd_analyze(&input, drift_per_volt, z, json),
        Command::Bench {
            action,
            file,
            bindings,
            tol,
            json,
        } => cmd_bench(action, &file, &bindings, tol, json),
        Command::Plot {
            input,
            out,
            drift_per_volt,
        } => cmd_plot(&input, &out, drift_per_volt),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            if let Some(u) = e.downcast_ref::<UsageError>() {
                eprintln!("error: {u}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}
