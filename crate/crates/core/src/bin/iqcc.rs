use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use iqcc::driver::{iqcc_run_with, IqccConfig, RunExtras, RunOutcome};
use iqcc::fermion::{
    build_symmetry_operator, choose_sector, fermionic_sd_pool, find_stationary_qubits,
    map_hamiltonian, reduce_qubits, reduce_words, Mapping, QubitAssignment, SymmetryKind,
};
use iqcc::oracle::{ground_energy, ITERATIVE_QUBIT_LIMIT};
use iqcc::product_state::qmf_minimize;
use iqcc::screening::{build_dis_with_stats, PoolKind};
use iqcc::{compress, IntegralData, IqccError, Operator, SolverMode};

#[derive(Parser)]
#[command(
    name = "iqcc",
    version,
    about = "Iterative qubit coupled cluster solver"
)]
struct Cli {
    /// Directory for generated files.
    #[arg(long, global = true, env = "IQCC_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,

    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map an integral file to a qubit Hamiltonian.
    Map(MapArgs),
    /// Run the iQCC loop.
    Run(RunArgs),
    /// Print the direct interaction set of an operator.
    Screen(ScreenArgs),
    /// Exact ground-state energy.
    Exact(ExactArgs),
    /// Drop small terms from an operator.
    Compress(CompressArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum MappingArg {
    Jw,
    Parity,
}

impl From<MappingArg> for Mapping {
    fn from(m: MappingArg) -> Self {
        match m {
            MappingArg::Jw => Mapping::JordanWigner,
            MappingArg::Parity => Mapping::Parity,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum InputKind {
    QubitOperator,
    Integrals,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Auto,
    Dense,
    Iterative,
}

#[derive(Args)]
struct ReductionArgs {
    #[arg(long, value_enum, default_value = "parity")]
    mapping: MappingArg,
    /// Keep stationary qubits.
    #[arg(long)]
    no_reduce: bool,
    /// Eigenvalues for the stationary qubits, e.g. "+1,-1". Chosen by exact
    /// diagonalization of each sector when absent.
    #[arg(long, allow_hyphen_values = true)]
    sector: Option<String>,
}

#[derive(Args)]
struct MapArgs {
    integrals: PathBuf,
    #[command(flatten)]
    reduction: ReductionArgs,
    /// Output file; defaults to <output-dir>/<stem>.qubit.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Qubit operator or integral file.
    input: Option<PathBuf>,
    /// TOML manifest; flags override its values.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<InputKind>,
    #[arg(long, value_enum)]
    mapping: Option<MappingArg>,
    #[arg(long)]
    no_reduce: bool,
    #[arg(long)]
    ng: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    pool: Option<PoolKind>,
    #[arg(long)]
    grad_threshold: Option<f64>,
    #[arg(long)]
    energy_threshold: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// S² operator file, needed with --mu for qubit-operator input.
    #[arg(long)]
    s2: Option<PathBuf>,
    #[arg(long)]
    guesses: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    drop_first: Option<usize>,
    /// Largest qubit count for the exact reference energy.
    #[arg(long, default_value_t = ITERATIVE_QUBIT_LIMIT)]
    exact_budget: usize,
}

#[derive(Args)]
struct ScreenArgs {
    operator: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = iqcc::product_state::DEFAULT_GUESSES)]
    guesses: usize,
}

#[derive(Args)]
struct ExactArgs {
    operator: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
}

#[derive(Args)]
struct CompressArgs {
    operator: PathBuf,
    #[arg(long, default_value_t = iqcc::compression::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Output file; defaults to stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunManifest {
    input: Option<PathBuf>,
    kind: Option<InputKind>,
    mapping: Option<MappingArg>,
    reduce: Option<bool>,
    output_dir: Option<PathBuf>,
    s2: Option<PathBuf>,
    config: IqccConfig,
}

type CliResult = Result<(), IqccError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let out_dir = cli.output_dir.clone();
    let result = match cli.command {
        Command::Map(a) => cmd_map(a, out_dir),
        Command::Run(a) => cmd_run(a, out_dir),
        Command::Screen(a) => cmd_screen(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Compress(a) => cmd_compress(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_user_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn read(path: &Path) -> Result<String, IqccError> {
    fs::read_to_string(path)
        .map_err(|e| IqccError::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn read_operator(path: &Path) -> Result<Operator, IqccError> {
    Operator::parse_text(&read(path)?)
}

fn write(path: &Path, contents: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn parse_sector(s: &str) -> Result<Vec<i8>, IqccError> {
    s.split(',')
        .map(|t| match t.trim() {
            "+1" | "1" | "+" => Ok(1),
            "-1" | "-" => Ok(-1),
            other => Err(IqccError::InvalidArgument(format!(
                "bad sector eigenvalue {other:?}"
            ))),
        })
        .collect()
}

struct Mapped {
    hamiltonian: Operator,
    assignment: Option<QubitAssignment>,
    full_qubits: usize,
    report: Vec<String>,
}

fn map_and_reduce(
    data: &IntegralData,
    mapping: Mapping,
    reduce: bool,
    sector: Option<&str>,
) -> Result<Mapped, IqccError> {
    let full = map_hamiltonian(data, mapping)?;
    let full_qubits = full.n_qubits();
    let mut report = vec![format!(
        "mapped: {} qubits, {} terms",
        full_qubits,
        full.len()
    )];
    if !reduce {
        return Ok(Mapped {
            hamiltonian: full,
            assignment: None,
            full_qubits,
            report,
        });
    }
    let positions = find_stationary_qubits(&full);
    if positions.is_empty() {
        report.push("no stationary qubits".into());
        return Ok(Mapped {
            hamiltonian: full,
            assignment: None,
            full_qubits,
            report,
        });
    }
    let assignment = match sector {
        Some(s) => QubitAssignment::new(positions, parse_sector(s)?)?,
        None => {
            let choice = choose_sector(&full, ITERATIVE_QUBIT_LIMIT)?;
            for s in &choice.sectors {
                report.push(format!("sector {:?}: E0 = {:.12}", s.eigenvalues, s.energy));
            }
            choice.assignment
        }
    };
    let reduced = reduce_qubits(&full, &assignment)?;
    report.push(format!(
        "reduced: removed qubits {:?} with eigenvalues {:?}; {} qubits, {} terms",
        assignment.positions,
        assignment.eigenvalues,
        reduced.n_qubits(),
        reduced.len()
    ));
    Ok(Mapped {
        hamiltonian: reduced,
        assignment: Some(assignment),
        full_qubits,
        report,
    })
}

fn cmd_map(a: MapArgs, out_dir: Option<PathBuf>) -> CliResult {
    let data = IntegralData::parse(&read(&a.integrals)?)?;
    let r = &a.reduction;
    let mapped = map_and_reduce(&data, r.mapping.into(), !r.no_reduce, r.sector.as_deref())?;
    let out = a.output.unwrap_or_else(|| {
        let stem = a
            .integrals
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        out_dir
            .unwrap_or_else(|| PathBuf::from("."))
            .join(format!("{stem}.qubit"))
    });
    write(&out, &mapped.hamiltonian.to_text())?;
    for line in &mapped.report {
        println!("{line}");
    }
    println!(
        "qubits: {} terms: {} -> {}",
        mapped.hamiltonian.n_qubits(),
        mapped.hamiltonian.len(),
        out.display()
    );
    Ok(())
}

fn cmd_run(a: RunArgs, out_dir: Option<PathBuf>) -> CliResult {
    let manifest: RunManifest = match &a.manifest {
        Some(p) => toml::from_str(&read(p)?)
            .map_err(|e| IqccError::InvalidArgument(format!("manifest {}: {e}", p.display())))?,
        None => RunManifest::default(),
    };
    let mut config = manifest.config.clone();
    macro_rules! flag {
        ($flag:expr, $field:expr) => {
            if let Some(v) = $flag {
                $field = v;
            }
        };
    }
    flag!(a.ng, config.n_g);
    flag!(a.steps, config.n_steps);
    flag!(a.pool, config.pool);
    flag!(a.grad_threshold, config.grad_threshold);
    flag!(a.energy_threshold, config.energy_threshold);
    flag!(a.mu, config.mu);
    flag!(a.guesses, config.n_random_guesses);
    flag!(a.seed, config.rng_seed);
    flag!(a.drop_first, config.drop_first);
    if a.epsilon.is_some() {
        config.epsilon = a.epsilon;
    }
    config.validate()?;

    let input = a
        .input
        .clone()
        .or(manifest.input.clone())
        .ok_or_else(|| IqccError::InvalidArgument("no input file given".into()))?;
    let kind = a.kind.or(manifest.kind).unwrap_or(InputKind::QubitOperator);
    let mapping: Mapping = a
        .mapping
        .or(manifest.mapping)
        .unwrap_or(MappingArg::Parity)
        .into();
    let reduce = !a.no_reduce && manifest.reduce.unwrap_or(true);
    let out_dir = out_dir
        .or(manifest.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let s2_path = a.s2.clone().or(manifest.s2.clone());

    let mut extras = RunExtras::default();
    let h = match kind {
        InputKind::QubitOperator => {
            let h = read_operator(&input)?;
            if config.mu > 0.0 {
                let path = s2_path.ok_or_else(|| {
                    IqccError::InvalidArgument("--mu needs --s2 for qubit-operator input".into())
                })?;
                extras.spin_squared = Some(read_operator(&path)?);
            }
            h
        }
        InputKind::Integrals => {
            let data = IntegralData::parse(&read(&input)?)?;
            let mapped = map_and_reduce(&data, mapping, reduce, None)?;
            for line in &mapped.report {
                log::info!("{line}");
            }
            let shrink = |op: Operator| -> Result<Operator, IqccError> {
                match &mapped.assignment {
                    Some(asg) => reduce_qubits(&op, asg),
                    None => Ok(op),
                }
            };
            if config.mu > 0.0 {
                let s2 = build_symmetry_operator(SymmetryKind::S2, mapped.full_qubits, mapping)?;
                extras.spin_squared = Some(shrink(s2)?);
            }
            if config.pool == PoolKind::FermionicSd {
                let words = fermionic_sd_pool(mapped.full_qubits, mapping)?;
                extras.pool_words = Some(match &mapped.assignment {
                    Some(asg) => reduce_words(&words, asg),
                    None => words,
                });
            }
            mapped.hamiltonian
        }
    };

    let outcome = iqcc_run_with(&h, &config, &extras)?;
    let target = match &extras.spin_squared {
        Some(s2) if config.mu > 0.0 => iqcc::fermion::spin_penalize(&h, s2, config.mu)?,
        _ => h.clone(),
    };
    let exact = if target.n_qubits() <= a.exact_budget.min(ITERATIVE_QUBIT_LIMIT) {
        Some(ground_energy(&target, SolverMode::auto(target.n_qubits()))?)
    } else {
        log::warn!(
            "exact energy skipped: {} qubits exceed the budget",
            target.n_qubits()
        );
        None
    };
    write_run_outputs(&out_dir, &input, &config, &outcome, exact)?;
    println!(
        "final energy {:.12} after {} iterations ({:?})",
        outcome.final_energy(),
        outcome.records.len() - 1,
        outcome.termination
    );
    if let Some(e) = exact {
        println!(
            "exact energy {e:.12}, error {:.3e}",
            outcome.final_energy() - e
        );
    }
    println!("outputs in {}", out_dir.display());
    Ok(())
}

fn write_run_outputs(
    dir: &Path,
    input: &Path,
    config: &IqccConfig,
    outcome: &RunOutcome,
    exact: Option<f64>,
) -> CliResult {
    fs::create_dir_all(dir)?;
    let mut log = String::new();
    let mut table = String::from("iteration,energy,");
    if exact.is_some() {
        table.push_str("error,");
    }
    table.push_str("terms_before,terms_after,n_generators,top_gradient\n");
    let mut timings = String::from("iteration,wall_time_s\n");
    for r in &outcome.records {
        log.push_str(&serde_json::to_string(r).expect("record serializes"));
        log.push('\n');
        // {:?} on f64 prints the shortest round-tripping form, same as the log.
        table.push_str(&format!("{},{:?},", r.k, r.energy));
        if let Some(e) = exact {
            table.push_str(&format!("{:e},", r.energy - e));
        }
        table.push_str(&format!(
            "{},{},{},{:e}\n",
            r.terms_before,
            r.terms_after,
            r.generators.len(),
            r.top_gradient
        ));
        timings.push_str(&format!("{},{:.6}\n", r.k, r.wall_time.as_secs_f64()));
    }
    fs::write(dir.join("iterations.jsonl"), log)?;
    fs::write(dir.join("convergence.csv"), table)?;
    fs::write(dir.join("timings.csv"), timings)?;
    let summary = serde_json::json!({
        "input": input.display().to_string(),
        "config": config,
        "termination": outcome.termination,
        "iterations": outcome.records.len() - 1,
        "final_energy": outcome.final_energy(),
        "exact_energy": exact,
        "extrapolation": outcome.extrapolation,
        "extrapolation_note": outcome.extrapolation_note,
    });
    let mut f = fs::File::create(dir.join("summary.json"))?;
    writeln!(
        f,
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    )?;
    Ok(())
}

fn cmd_screen(a: ScreenArgs) -> CliResult {
    let h = read_operator(&a.operator)?;
    let qmf = qmf_minimize(&h, a.guesses, a.seed)?;
    let reference = qmf.state.purify();
    let (groups, stats) = build_dis_with_stats(&h, &reference)?;
    println!(
        "# reference {:?}, {} sectors, {} groups",
        reference.bits(),
        stats.sectors,
        groups.len()
    );
    println!("flips\trepresentative\tgradient\tgroup_size");
    for g in &groups {
        let flips: Vec<String> = g.flip_indices().iter().map(|i| i.to_string()).collect();
        println!(
            "{}\t{}\t{:.12e}\t{}",
            flips.join(","),
            g.representative,
            g.gradient_magnitude,
            g.size()
        );
    }
    Ok(())
}

/// `x` with 12 significant digits in fixed notation.
fn significant12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.11}");
    }
    let digits = 11 - x.abs().log10().floor() as i32;
    format!("{:.*}", digits.max(0) as usize, x)
}

fn cmd_exact(a: ExactArgs) -> CliResult {
    let h = read_operator(&a.operator)?;
    let mode = match a.mode {
        ModeArg::Auto => SolverMode::auto(h.n_qubits()),
        ModeArg::Dense => SolverMode::Dense,
        ModeArg::Iterative => SolverMode::Iterative,
    };
    println!("{}", significant12(ground_energy(&h, mode)?));
    Ok(())
}

fn cmd_compress(a: CompressArgs) -> CliResult {
    let h = read_operator(&a.operator)?;
    let (c, report) = compress(&h, a.epsilon)?;
    match &a.output {
        Some(p) => write(p, &c.to_text())?,
        None => print!("{}", c.to_text()),
    }
    eprintln!(
        "terms {} -> {}, dropped norm {:.3e} (epsilon {:e})",
        report.terms_before, report.terms_after, report.dropped_norm, report.epsilon
    );
    Ok(())
}
