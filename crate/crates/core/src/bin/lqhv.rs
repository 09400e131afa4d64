//! Command-line front end: check, build, verify, quantum, lhv, expect, generate.
//!
//! Exit codes: 0 ok, 1 malformed input, 2 mathematical precondition failed
//! (signaling family, verification mismatch), 3 resource budget exceeded.

use std::fs;
use std::io::{ErrorKind as IoErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use lqhv::construct::{build_from_family, verify_measure, BuildOptions, DeterministicLqHVModel, DEFAULT_ATOM_BUDGET};
use lqhv::io::{self, AnyFamily, AnyMeasure};
use lqhv::report::{ConsistencyResult, ConstructionStats, LhvSummary, RunReport, WitnessReport};
use lqhv::{
    boxes, check_nonsignaling, lhv_feasible, product_expectation_family, product_expectation_model, quantum,
    DistributionFamily, Error, Mode, Rational, Scalar, SettingTuple, DEFAULT_TOL,
};

#[derive(Debug, Parser)]
#[command(
    name = "lqhv",
    version,
    about = "Nonsignaling checks and quasi hidden variable constructions"
)]
struct Cli {
    /// Comparison tolerance in floating mode (ignored in rational mode).
    #[arg(long, global = true, env = "LQHV_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,

    /// Arithmetic mode; defaults to the mode recorded in the input file.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,

    /// Maximum number of joint-space atoms.
    #[arg(long, global = true, default_value_t = DEFAULT_ATOM_BUDGET)]
    budget: usize,

    /// Print the run report as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Float,
    Rational,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Float => Mode::Float,
            ModeArg::Rational => Mode::Rational,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the nonsignaling condition of a family file.
    Check { path: PathBuf },
    /// Build the simulating signed measure and write it as JSON.
    Build {
        path: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Verify a measure file against a family file.
    Verify { measure: PathBuf, family: PathBuf },
    /// Generate the Born-rule family of a quantum scenario file.
    Quantum {
        path: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a family admits a nonnegative simulating measure.
    Lhv {
        path: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Product expectation of per-site observables at one setting tuple.
    Expect {
        path: PathBuf,
        /// 1-based setting tuple, e.g. `1,2`.
        #[arg(long)]
        tuple: String,
        /// Observable values per site separated by `;`, e.g. `1,-1;1,-1`.
        #[arg(long, allow_hyphen_values = true)]
        observables: String,
        /// Also evaluate through this measure file.
        #[arg(long)]
        measure: Option<PathBuf>,
    },
    /// Write a canonical family or quantum scenario.
    Generate {
        #[arg(value_enum)]
        kind: GenerateKind,
        /// Isotropic weight for `isotropic`.
        #[arg(long, default_value = "1/2")]
        p: String,
        /// Seed for `random`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of mixed vertices for `random`.
        #[arg(long, default_value_t = 4)]
        components: usize,
        /// Parties for `random` and `uniform`.
        #[arg(long, default_value_t = 2)]
        parties: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenerateKind {
    Pr,
    Isotropic,
    Uniform,
    Signaling,
    Random,
    ChshSinglet,
}

/// Set once an artifact has been written to stdout; later output moves to
/// stderr so stdout stays a single JSON document.
static STDOUT_TAKEN: AtomicBool = AtomicBool::new(false);

/// Failure with a report that should still be shown.
struct Failure {
    code: u8,
    message: String,
    report: Option<Box<RunReport>>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
            report: None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            emit_report(&cli, &report);
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            if let Some(report) = &f.report {
                emit_report(&cli, report);
            }
            ExitCode::from(f.code)
        }
    }
}

fn emit_report(cli: &Cli, report: &RunReport) {
    if cli.json {
        let body = serde_json::to_string_pretty(report).expect("report serializes");
        if STDOUT_TAKEN.load(Ordering::Relaxed) {
            eprintln!("{body}");
        } else {
            print_stdout(&body);
        }
    }
}

/// Writes a line to stdout; a closed pipe ends the process quietly.
fn print_stdout(line: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = writeln!(out, "{line}").and_then(|_| out.flush()) {
        if e.kind() == IoErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: stdout: {e}");
        std::process::exit(1);
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
        report: None,
    })
}

fn text(bytes: &[u8]) -> Result<&str, Failure> {
    std::str::from_utf8(bytes).map_err(|_| Failure {
        code: 1,
        message: "input is not UTF-8".into(),
        report: None,
    })
}

fn write_artifact(out: Option<&Path>, value: &Value) -> Result<(), Failure> {
    let body = serde_json::to_string_pretty(value).expect("artifact serializes");
    match out {
        Some(p) => fs::write(p, body + "\n").map_err(|e| Failure {
            code: 1,
            message: format!("{}: {e}", p.display()),
            report: None,
        }),
        None => {
            print_stdout(&body);
            STDOUT_TAKEN.store(true, Ordering::Relaxed);
            Ok(())
        }
    }
}

fn load_family(cli: &Cli, path: &Path, report: &mut RunReport) -> Result<AnyFamily, Failure> {
    let bytes = read(path)?;
    *report = RunReport::for_input(&bytes);
    let fam = report.time("parse", || {
        io::parse_family(text(&bytes)?, cli.tol, cli.mode.map(Mode::from)).map_err(Failure::from)
    })?;
    report.mode = Some(fam.mode());
    Ok(fam)
}

/// Human-readable lines go to stdout unless `--json` or an artifact owns it.
fn say(cli: &Cli, line: impl AsRef<str>) {
    if cli.json || STDOUT_TAKEN.load(Ordering::Relaxed) {
        eprintln!("{}", line.as_ref());
    } else {
        print_stdout(line.as_ref());
    }
}

fn run(cli: &Cli) -> Result<RunReport, Failure> {
    let mut report = RunReport::default();
    match &cli.command {
        Command::Check { path } => {
            let fam = load_family(cli, path, &mut report)?;
            match &fam {
                AnyFamily::Float(f) => cmd_check(cli, f, report),
                AnyFamily::Rational(f) => cmd_check(cli, f, report),
            }
        }
        Command::Build { path, out } => {
            let fam = load_family(cli, path, &mut report)?;
            match &fam {
                AnyFamily::Float(f) => cmd_build(cli, f, out, report),
                AnyFamily::Rational(f) => cmd_build(cli, f, out, report),
            }
        }
        Command::Verify { measure, family } => {
            let mbytes = read(measure)?;
            let measure = io::parse_measure(text(&mbytes)?, cli.tol)?;
            let fam = load_family(cli, family, &mut report)?.into_mode(measure.mode(), cli.tol)?;
            match (&measure, &fam) {
                (AnyMeasure::Float(m), AnyFamily::Float(f)) => cmd_verify(cli, m, f, report),
                (AnyMeasure::Rational(m), AnyFamily::Rational(f)) => cmd_verify(cli, m, f, report),
                _ => unreachable!("family converted to the measure's mode"),
            }
        }
        Command::Quantum { path, out } => {
            let bytes = read(path)?;
            report = RunReport::for_input(&bytes);
            let q = io::parse_quantum(text(&bytes)?, cli.tol)?;
            let fam = report.time("born", || quantum::born_family(&q, cli.tol))?;
            let nonsignaling = check_nonsignaling(&fam, cli.tol);
            report.consistency = Some(ConsistencyResult {
                passed: nonsignaling.is_ok(),
                witness: nonsignaling.as_ref().err().map(WitnessReport::from),
            });
            let fam = AnyFamily::Float(fam).into_mode(cli.mode.map(Mode::from).unwrap_or(Mode::Float), cli.tol)?;
            report.mode = Some(fam.mode());
            write_artifact(out.as_deref(), &fam.to_json())?;
            Ok(report)
        }
        Command::Lhv { path, out } => {
            let fam = load_family(cli, path, &mut report)?;
            match &fam {
                AnyFamily::Float(f) => cmd_lhv(cli, f, out.as_deref(), report),
                AnyFamily::Rational(f) => cmd_lhv(cli, f, out.as_deref(), report),
            }
        }
        Command::Expect {
            path,
            tuple,
            observables,
            measure,
        } => {
            let fam = load_family(cli, path, &mut report)?;
            let measure = match measure {
                Some(p) => {
                    let bytes = read(p)?;
                    Some(io::parse_measure(text(&bytes)?, cli.tol)?)
                }
                None => None,
            };
            let tuple = SettingTuple::parse_key(tuple)?;
            match (&fam, measure) {
                (AnyFamily::Float(f), m) => {
                    let m = match m {
                        Some(AnyMeasure::Float(m)) => Some(m),
                        Some(AnyMeasure::Rational(m)) => Some(lqhv::SignedMeasure::new(
                            m.scenario().clone(),
                            m.atoms().map(|v| v.to_f64()),
                            cli.tol,
                        )?),
                        None => None,
                    };
                    cmd_expect(cli, f, m, &tuple, observables, report)
                }
                (AnyFamily::Rational(f), m) => {
                    let m = match m {
                        Some(AnyMeasure::Rational(m)) => Some(m),
                        Some(AnyMeasure::Float(_)) => {
                            return Err(Failure::from(Error::InvalidInput(
                                "a float measure cannot be evaluated in rational mode".into(),
                            )))
                        }
                        None => None,
                    };
                    cmd_expect(cli, f, m, &tuple, observables, report)
                }
            }
        }
        Command::Generate {
            kind,
            p,
            seed,
            components,
            parties,
            out,
        } => {
            let mode = cli.mode.map(Mode::from).unwrap_or(Mode::Rational);
            let value = match kind {
                GenerateKind::ChshSinglet => io::quantum_to_json(&quantum::chsh_singlet()),
                _ => {
                    let fam = generate::<Rational>(*kind, p, *seed, *components, *parties)?;
                    AnyFamily::Rational(fam).into_mode(mode, cli.tol)?.to_json()
                }
            };
            write_artifact(out.as_deref(), &value)?;
            Ok(RunReport::for_input(&[]))
        }
    }
}

fn generate<T: Scalar>(
    kind: GenerateKind,
    p: &str,
    seed: u64,
    components: usize,
    parties: usize,
) -> lqhv::Result<DistributionFamily<T>> {
    match kind {
        GenerateKind::Pr => Ok(boxes::pr_box()),
        GenerateKind::Isotropic => boxes::isotropic_box(T::from_json(&Value::String(p.to_string()))?),
        GenerateKind::Uniform => boxes::uniform_family(lqhv::Scenario::uniform(parties, 2, 2)?),
        GenerateKind::Signaling => Ok(boxes::signaling_example()),
        GenerateKind::Random => {
            boxes::random_nonsignaling_family_auto(&lqhv::Scenario::uniform(parties, 2, 2)?, seed, components)
        }
        GenerateKind::ChshSinglet => unreachable!("handled by caller"),
    }
}

fn cmd_check<T: Scalar>(cli: &Cli, fam: &DistributionFamily<T>, mut report: RunReport) -> Result<RunReport, Failure> {
    let res = report.time("check", || check_nonsignaling(fam, cli.tol));
    report.consistency = Some(ConsistencyResult {
        passed: res.is_ok(),
        witness: res.as_ref().err().map(WitnessReport::from),
    });
    match res {
        Ok(()) => {
            say(cli, "nonsignaling: pass");
            Ok(report)
        }
        Err(w) => Err(Failure {
            code: 2,
            message: format!("nonsignaling: fail: {w}"),
            report: Some(Box::new(report)),
        }),
    }
}

fn cmd_build<T: Scalar>(
    cli: &Cli,
    fam: &DistributionFamily<T>,
    out: &Path,
    mut report: RunReport,
) -> Result<RunReport, Failure> {
    let opts = BuildOptions {
        budget: cli.budget,
        tol: cli.tol,
    };
    let built = report.time("build", || build_from_family(fam, opts));
    let model = match built {
        Ok(m) => {
            report.consistency = Some(ConsistencyResult {
                passed: true,
                witness: None,
            });
            m
        }
        Err(Error::Signaling(w)) => {
            report.consistency = Some(ConsistencyResult {
                passed: false,
                witness: Some(WitnessReport::from(w.as_ref())),
            });
            return Err(Failure {
                code: 2,
                message: format!("nonsignaling: fail: {w}"),
                report: Some(Box::new(report)),
            });
        }
        Err(e) => return Err(e.into()),
    };
    let verify = report.time("verify", || verify_measure(model.measure(), fam, cli.tol))?;
    let stats = ConstructionStats::of(model.measure());
    say(cli, format!("atoms: {}", stats.atoms));
    say(cli, format!("normalization: {}", stats.normalization));
    say(cli, format!("min atom: {}", stats.min_atom));
    say(cli, format!("total variation: {}", stats.total_variation));
    say(cli, format!("verify max error: {}", verify.max_error));
    report.construction = Some(stats);
    let passed = verify.passed();
    report.verification = Some(verify);
    write_artifact(Some(out), &io::measure_to_json(model.measure()))?;
    if !passed {
        return Err(Failure {
            code: 2,
            message: "constructed measure does not reproduce the family".into(),
            report: Some(Box::new(report)),
        });
    }
    Ok(report)
}

fn cmd_verify<T: Scalar>(
    cli: &Cli,
    measure: &lqhv::SignedMeasure<T>,
    fam: &DistributionFamily<T>,
    mut report: RunReport,
) -> Result<RunReport, Failure> {
    let verify = report.time("verify", || verify_measure(measure, fam, cli.tol))?;
    let stats = ConstructionStats::of(measure);
    say(cli, format!("normalization: {}", stats.normalization));
    say(cli, format!("min atom: {}", stats.min_atom));
    say(cli, format!("total variation: {}", stats.total_variation));
    say(cli, format!("verify max error: {}", verify.max_error));
    report.construction = Some(stats);
    let passed = verify.passed();
    report.verification = Some(verify);
    if passed {
        Ok(report)
    } else {
        Err(Failure {
            code: 2,
            message: "measure does not reproduce the family".into(),
            report: Some(Box::new(report)),
        })
    }
}

fn cmd_lhv<T: Scalar>(
    cli: &Cli,
    fam: &DistributionFamily<T>,
    out: Option<&Path>,
    mut report: RunReport,
) -> Result<RunReport, Failure> {
    let verdict = report.time("lhv", || lhv_feasible(fam, cli.tol, cli.budget))?;
    let mut summary = LhvSummary {
        feasible: verdict.feasible,
        certificate_valid: None,
        certificate_gap: None,
        witness_verified: None,
    };
    if let Some(c) = &verdict.certificate {
        summary.certificate_gap = Some(c.evaluate(fam)?.to_string());
        summary.certificate_valid = Some(c.separates(fam, cli.tol)?);
    }
    if let Some(m) = &verdict.measure {
        summary.witness_verified = Some(verify_measure(m, fam, cli.tol)?.passed() && m.is_nonnegative());
    }
    report.lhv = Some(summary);
    write_artifact(out, &io::verdict_to_json(&verdict))?;
    say(
        cli,
        if verdict.feasible {
            "lhv: feasible"
        } else {
            "lhv: infeasible"
        },
    );
    Ok(report)
}

fn parse_observables<T: Scalar>(spec: &str) -> lqhv::Result<Vec<Vec<T>>> {
    spec.split(';')
        .map(|site| {
            site.split(',')
                .map(|v| T::from_json(&Value::String(v.trim().to_string())))
                .collect()
        })
        .collect()
}

fn cmd_expect<T: Scalar>(
    cli: &Cli,
    fam: &DistributionFamily<T>,
    measure: Option<lqhv::SignedMeasure<T>>,
    tuple: &SettingTuple,
    observables: &str,
    mut report: RunReport,
) -> Result<RunReport, Failure> {
    let phi = parse_observables::<T>(observables)?;
    let value = product_expectation_family(fam, tuple, &phi)?;
    say(cli, format!("expectation: {value}"));
    report.expectation = Some(value.to_string());
    if let Some(m) = measure {
        let model = DeterministicLqHVModel::new(m, cli.tol)?;
        let via_model = product_expectation_model(&model, tuple, &phi)?;
        say(cli, format!("expectation via measure: {via_model}"));
        if !via_model.approx_eq(&value, cli.tol) {
            return Err(Failure {
                code: 2,
                message: format!("measure gives {via_model}, family gives {value}"),
                report: Some(Box::new(report)),
            });
        }
    }
    Ok(report)
}
