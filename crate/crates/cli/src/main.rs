//! `nsbox` — exact analysis of non-signalling correlation boxes.
//!
//! Every subcommand reads from a file argument or stdin and writes to
//! stdout, so commands compose into pipelines:
//!
//! ```sh
//! nsbox gallery pr | nsbox model --kind neg-state | nsbox eval
//! ```
//!
//! Exit codes: 0 success (or a decided locality verdict), 1 I/O or parse
//! error, 2 validation or constraint failure, 3 locality undecided at the
//! requested tolerance.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nsbox_core::boxes::ProperBox;
use nsbox_core::classical::{ClassicalModel, ModelKind};
use nsbox_core::format::{self, parse_u32_tuple};
use nsbox_core::gallery;
use nsbox_core::locality::{self, DeterministicStrategy, LocalityCertificate, LocalityError};
use nsbox_core::marginals::{canonical_marginals, from_marginals};
use nsbox_core::quantum::QuantumModel;
use nsbox_core::rational::format_rational;
use nsbox_core::scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "nsbox",
    version,
    about = "Exact toolkit for non-signalling boxes: quasi-classical models, diagonal quantum lifts, and locality certificates"
)]
struct Cli {
    /// Report style for analysis commands (files are always canonical).
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Machine,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    /// Proper state, quasi responses.
    NegMeas,
    /// Quasi state, deterministic responses.
    NegState,
}

impl From<KindArg> for ModelKind {
    fn from(kind: KindArg) -> Self {
        match kind {
            KindArg::NegMeas => ModelKind::NegativeMeasurements,
            KindArg::NegState => ModelKind::NegativeState,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GalleryKind {
    Pr,
    Tsirelson,
    Uniform,
    Deterministic,
    RandomNs,
    RandomLocal,
}

#[derive(Subcommand)]
enum Command {
    /// Check normalization (and optionally non-negativity) of a box file.
    Validate {
        /// Also flag negative entries.
        #[arg(long)]
        require_nonnegative: bool,
        input: Option<PathBuf>,
    },
    /// Print the canonical marginal coordinates of a non-signalling box.
    Marginals { input: Option<PathBuf> },
    /// Rebuild the unique non-signalling box from a marginal table.
    FromMarginals { input: Option<PathBuf> },
    /// Build a hidden-variable model for a non-signalling box.
    Model {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Merge always-last-outcome labels into one per party.
        #[arg(long)]
        compressed: bool,
        input: Option<PathBuf>,
    },
    /// Evaluate a model file back to its box.
    Eval { input: Option<PathBuf> },
    /// Compress a model file.
    Compress { input: Option<PathBuf> },
    /// Lift a box to a commuting diagonal-operator model.
    Quantum {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        compressed: bool,
        input: Option<PathBuf>,
    },
    /// Check completeness, trace, and positivity of a quantum model file.
    QuantumVerify { input: Option<PathBuf> },
    /// Decide local-polytope membership with an exact certificate.
    Local {
        #[arg(long, default_value_t = locality::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = locality::DEFAULT_VERTEX_CAP)]
        cap: u128,
        input: Option<PathBuf>,
    },
    /// Report the negative mass in a model's state and responses.
    Negativity { input: Option<PathBuf> },
    /// Monte Carlo estimate of a model's outcome distribution.
    Sample {
        /// Input tuple, e.g. 1,1.
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        file: Option<PathBuf>,
    },
    /// Write a canonical or seeded random box file.
    Gallery {
        #[arg(value_enum)]
        which: GalleryKind,
        /// Scenario as outputs/inputs, e.g. 2,2/2,2.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-party outcome assignments for `deterministic`, e.g. 1,2/2,1.
        #[arg(long)]
        strategy: Option<String>,
    },
}

/// Failures mapped onto process exit codes.
enum CliError {
    /// Exit 1: I/O trouble or an unreadable file.
    Io(String),
    Parse(String),
    /// Exit 2: the file parsed but describes an invalid object, or an
    /// argument is out of range.
    Constraint(String),
    /// Exit 3: the locality LP could not certify either verdict.
    Undecided(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => 1,
            CliError::Constraint(_) => 2,
            CliError::Undecided(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m)
            | CliError::Parse(m)
            | CliError::Constraint(m)
            | CliError::Undecided(m) => m,
        }
    }
}

impl From<format::FormatError> for CliError {
    fn from(err: format::FormatError) -> Self {
        if err.is_constraint_violation() {
            CliError::Constraint(err.to_string())
        } else {
            CliError::Parse(err.to_string())
        }
    }
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes, like other Unix tools,
    // instead of panicking inside println!.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("nsbox: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) => {
            std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
            Ok(buf)
        }
    }
}

fn read_proper_box(path: &Option<PathBuf>) -> Result<ProperBox, CliError> {
    let quasi = format::read_box(&read_input(path)?)?;
    ProperBox::new(quasi).map_err(|e| CliError::Constraint(e.to_string()))
}

fn parse_scenario_arg(text: &str) -> Result<Scenario, CliError> {
    let err = || {
        CliError::Constraint(format!(
            "invalid scenario \"{text}\", expected outputs/inputs like 2,2/2,2"
        ))
    };
    let (outputs, inputs) = text.split_once('/').ok_or_else(err)?;
    let outputs = parse_u32_tuple(outputs).ok_or_else(err)?;
    let inputs = parse_u32_tuple(inputs).ok_or_else(err)?;
    Scenario::new(outputs, inputs).map_err(|e| CliError::Constraint(e.to_string()))
}

fn parse_strategy_arg(scenario: &Scenario, text: &str) -> Result<DeterministicStrategy, CliError> {
    let assignments: Option<Vec<Vec<u32>>> = text.split('/').map(parse_u32_tuple).collect();
    let assignments = assignments.ok_or_else(|| {
        CliError::Constraint(format!(
            "invalid strategy \"{text}\", expected per-party lists like 1,2/2,1"
        ))
    })?;
    DeterministicStrategy::new(scenario, assignments)
        .map_err(|e| CliError::Constraint(e.to_string()))
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Validate {
            require_nonnegative,
            input,
        } => {
            let quasi = format::read_box(&read_input(input)?)?;
            let report = quasi.validate(*require_nonnegative);
            match cli.format {
                OutputFormat::Text => {
                    if report.is_ok() {
                        println!("validate: pass");
                    } else {
                        println!("validate: FAIL");
                        for f in &report.normalization_failures {
                            println!(
                                "  normalization at x={}: total {}",
                                join(&f.inputs),
                                format_rational(&f.total)
                            );
                        }
                        for e in &report.negative_entries {
                            println!(
                                "  negative entry at a={} x={}: {}",
                                join(&e.outputs),
                                join(&e.inputs),
                                format_rational(&e.value)
                            );
                        }
                    }
                }
                OutputFormat::Machine => {
                    println!("verdict={}", if report.is_ok() { "pass" } else { "fail" });
                    println!(
                        "normalization_failures={}",
                        report.normalization_failures.len()
                    );
                    println!("negative_entries={}", report.negative_entries.len());
                    for f in &report.normalization_failures {
                        println!(
                            "normalization.{}={}",
                            join(&f.inputs),
                            format_rational(&f.total)
                        );
                    }
                    for e in &report.negative_entries {
                        println!(
                            "negative.{}|{}={}",
                            join(&e.outputs),
                            join(&e.inputs),
                            format_rational(&e.value)
                        );
                    }
                }
            }
            Ok(if report.is_ok() { 0 } else { 2 })
        }

        Command::Marginals { input } => {
            let quasi = format::read_box(&read_input(input)?)?;
            let table =
                canonical_marginals(&quasi).map_err(|w| CliError::Constraint(w.to_string()))?;
            print!("{}", format::write_marginal_table(&table));
            Ok(0)
        }

        Command::FromMarginals { input } => {
            let table = format::read_marginal_table(&read_input(input)?)?;
            print!("{}", format::write_box(&from_marginals(&table)));
            Ok(0)
        }

        Command::Model {
            kind,
            compressed,
            input,
        } => {
            let b = read_proper_box(input)?;
            let model = build_model(&b, (*kind).into())?;
            let model = if *compressed { model.compress() } else { model };
            print!("{}", format::write_classical_model(&model));
            Ok(0)
        }

        Command::Eval { input } => {
            let model = format::read_classical_model(&read_input(input)?)?;
            print!("{}", format::write_box(&model.evaluate()));
            Ok(0)
        }

        Command::Compress { input } => {
            let model = format::read_classical_model(&read_input(input)?)?;
            print!("{}", format::write_classical_model(&model.compress()));
            Ok(0)
        }

        Command::Quantum {
            kind,
            compressed,
            input,
        } => {
            let b = read_proper_box(input)?;
            let model = build_model(&b, (*kind).into())?;
            let model = if *compressed { model.compress() } else { model };
            print!(
                "{}",
                format::write_quantum_model(&QuantumModel::lift(&model))
            );
            Ok(0)
        }

        Command::QuantumVerify { input } => {
            let model = format::read_quantum_model(&read_input(input)?)?;
            let report = model.verify();
            match cli.format {
                OutputFormat::Text => {
                    println!("kind: {}", model.kind());
                    println!(
                        "completeness: {}",
                        if report.completeness_ok() {
                            "ok".to_string()
                        } else {
                            format!("{} failures", report.completeness_failures.len())
                        }
                    );
                    println!(
                        "trace: {} ({})",
                        format_rational(&report.trace),
                        if report.trace_ok() { "ok" } else { "FAIL" }
                    );
                    println!("state negative entries: {}", report.state_negative.len());
                    println!(
                        "measurement negative entries: {}",
                        report.measurement_negative.len()
                    );
                    println!(
                        "shared diagonal basis: {} (all operators commute)",
                        if report.shared_diagonal_basis {
                            "yes"
                        } else {
                            "no"
                        }
                    );
                    println!(
                        "well-formed: {}",
                        if report.is_well_formed() { "yes" } else { "NO" }
                    );
                }
                OutputFormat::Machine => {
                    println!("kind={}", model.kind());
                    println!("completeness_ok={}", report.completeness_ok());
                    println!("trace={}", format_rational(&report.trace));
                    println!("trace_ok={}", report.trace_ok());
                    println!("state_negative_entries={}", report.state_negative.len());
                    println!(
                        "measurement_negative_entries={}",
                        report.measurement_negative.len()
                    );
                    println!("shared_diagonal_basis={}", report.shared_diagonal_basis);
                    println!("well_formed={}", report.is_well_formed());
                }
            }
            Ok(if report.is_well_formed() { 0 } else { 2 })
        }

        Command::Local { tol, cap, input } => {
            let b = read_proper_box(input)?;
            let certificate = locality::is_local(&b, *tol, *cap).map_err(|e| match e {
                LocalityError::Undecided { .. } => CliError::Undecided(e.to_string()),
                _ => CliError::Constraint(e.to_string()),
            })?;
            match (&certificate, cli.format) {
                (LocalityCertificate::Local(cert), OutputFormat::Text) => {
                    println!("verdict: LOCAL");
                    println!("weights:");
                    for (strategy, weight) in &cert.weights {
                        println!("  {strategy}: {}", format_rational(weight));
                    }
                }
                (LocalityCertificate::Local(cert), OutputFormat::Machine) => {
                    println!("verdict=local");
                    for (strategy, weight) in &cert.weights {
                        println!("weight.{strategy}={}", format_rational(weight));
                    }
                }
                (LocalityCertificate::NonLocal(cert), OutputFormat::Text) => {
                    println!("verdict: NONLOCAL");
                    println!("box_value: {}", format_rational(&cert.box_value));
                    println!("local_bound: {}", format_rational(&cert.local_bound));
                    println!("functional (nonzero coefficients):");
                    print_functional(&cert.functional, "  ", ": ");
                }
                (LocalityCertificate::NonLocal(cert), OutputFormat::Machine) => {
                    println!("verdict=nonlocal");
                    println!("box_value={}", format_rational(&cert.box_value));
                    println!("local_bound={}", format_rational(&cert.local_bound));
                    print_functional(&cert.functional, "functional.", "=");
                }
            }
            Ok(0)
        }

        Command::Negativity { input } => {
            let model = format::read_classical_model(&read_input(input)?)?;
            let report = model.negativity();
            match cli.format {
                OutputFormat::Text => {
                    println!(
                        "state negativity: {}",
                        format_rational(&report.state_negativity)
                    );
                    println!(
                        "response negativity: {}",
                        format_rational(&report.response_negativity)
                    );
                }
                OutputFormat::Machine => {
                    println!(
                        "state_negativity={}",
                        format_rational(&report.state_negativity)
                    );
                    println!(
                        "response_negativity={}",
                        format_rational(&report.response_negativity)
                    );
                }
            }
            Ok(0)
        }

        Command::Sample {
            input,
            shots,
            seed,
            file,
        } => {
            let model = format::read_classical_model(&read_input(file)?)?;
            let tuple = parse_u32_tuple(input)
                .ok_or_else(|| CliError::Constraint(format!("invalid input tuple \"{input}\"")))?;
            let report = model
                .sample_signed(&tuple, *shots, *seed)
                .map_err(|e| CliError::Constraint(e.to_string()))?;
            match cli.format {
                OutputFormat::Text => {
                    println!(
                        "input: {}  shots: {}  seed: {}",
                        join(&report.inputs),
                        report.shots,
                        report.seed
                    );
                    for est in &report.estimates {
                        println!(
                            "  outcome {}: {:.6} (se {:.6})",
                            join(&est.outputs),
                            est.estimate,
                            est.std_error
                        );
                    }
                }
                OutputFormat::Machine => {
                    println!("input={}", join(&report.inputs));
                    println!("shots={}", report.shots);
                    println!("seed={}", report.seed);
                    for est in &report.estimates {
                        println!("estimate.{}={}", join(&est.outputs), est.estimate);
                        println!("std_error.{}={}", join(&est.outputs), est.std_error);
                    }
                }
            }
            Ok(0)
        }

        Command::Gallery {
            which,
            scenario,
            seed,
            strategy,
        } => {
            let chsh = Scenario::new(vec![2, 2], vec![2, 2]).unwrap();
            let scenario = match scenario {
                Some(text) => parse_scenario_arg(text)?,
                None => chsh.clone(),
            };
            let b = match which {
                GalleryKind::Pr | GalleryKind::Tsirelson if scenario != chsh => {
                    return Err(CliError::Constraint(
                        "pr and tsirelson exist only in the 2,2/2,2 scenario".into(),
                    ));
                }
                GalleryKind::Pr => gallery::pr_box(),
                GalleryKind::Tsirelson => gallery::tsirelson_box(),
                GalleryKind::Uniform => gallery::uniform_box(&scenario),
                GalleryKind::Deterministic => {
                    let strategy = match strategy {
                        Some(text) => parse_strategy_arg(&scenario, text)?,
                        None => DeterministicStrategy::new(
                            &scenario,
                            scenario
                                .inputs()
                                .iter()
                                .map(|&x| vec![1; x as usize])
                                .collect(),
                        )
                        .unwrap(),
                    };
                    gallery::deterministic_box(&scenario, &strategy)
                }
                GalleryKind::RandomNs => gallery::random_nonsignalling_box(&scenario, *seed),
                GalleryKind::RandomLocal => gallery::random_local_box(&scenario, *seed),
            };
            print!("{}", format::write_box(b.as_quasi()));
            Ok(0)
        }
    }
}

fn build_model(b: &ProperBox, kind: ModelKind) -> Result<ClassicalModel, CliError> {
    let model = match kind {
        ModelKind::NegativeMeasurements => ClassicalModel::negative_measurements(b),
        ModelKind::NegativeState => ClassicalModel::negative_state(b),
    };
    model.map_err(|w| CliError::Constraint(w.to_string()))
}

fn print_functional(functional: &locality::BellFunctional, prefix: &str, sep: &str) {
    for (outputs, inputs, coefficient) in functional.nonzero_coefficients() {
        println!(
            "{prefix}{}|{}{sep}{}",
            join(&outputs),
            join(&inputs),
            format_rational(coefficient)
        );
    }
}

fn join(values: &[u32]) -> String {
    values
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
