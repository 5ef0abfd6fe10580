//! `qif`: command-line leakage analysis of query mechanisms.
//!
//! Subcommands wrap the `qif-core` analyses one-to-one: validate and
//! ingest mechanism files, compute exact or simulated leakage of a
//! strategy, list indistinguishability classes and the caps they induce,
//! synthesize optimal strategies, expand adaptive plans, score forecasts,
//! and probe convergence toward maximum leakage.
//!
//! Exit codes: 0 success; 1 domain error (invalid mechanism, mismatched
//! dimensions, undefined posterior); 2 usage or parse error (bad flags,
//! malformed files, unknown measure); 3 resource budget exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qif_core::numfmt::{fraction_probabilities, fraction_string, sig12};
use qif_core::{
    build_attack_tree, capacity, capacity_search, convergence_probe, ingest_csv, leakage,
    max_leakage, plan, scoring_rule, simulate, validate, Belief, MeasureKind, Mechanism,
    MechanismFile, NoiseSpec, QifError, Strategy, UncertaintyMeasure,
};

#[derive(Parser)]
#[command(
    name = "qif",
    version,
    about = "Quantitative information flow analysis of query mechanisms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a mechanism file and report every violation.
    Validate {
        /// Mechanism JSON file.
        mechanism: PathBuf,
    },
    /// Exact leakage of a strategy.
    Leakage(LeakageArgs),
    /// Synthesize an optimal strategy for a query budget.
    Optimal(OptimalArgs),
    /// List the indistinguishability classes.
    Classes(ClassesArgs),
    /// Leakage cap at a prior: what learning the exact class would reveal.
    Maxleak(MaxleakArgs),
    /// Capacity: the leakage cap's supremum over priors.
    Capacity(CapacityArgs),
    /// Expand a strategy to its non-adaptive closure.
    Expand(ExpandArgs),
    /// Build a mechanism from a CSV table of per-row attributes.
    Ingest(IngestArgs),
    /// Monte Carlo estimate of a strategy's leakage.
    Simulate(SimulateArgs),
    /// Score each possible secret against a forecast belief.
    Psr(PsrArgs),
    /// Exact leakage of cycling through all actions, round by round.
    Probe(ProbeArgs),
}

#[derive(Args)]
struct LeakageArgs {
    /// Mechanism JSON file.
    #[arg(long, value_name = "FILE")]
    mechanism: PathBuf,
    /// Strategy JSON file (action list or tree).
    #[arg(long, value_name = "FILE")]
    strategy: PathBuf,
    /// Uncertainty measure: shannon, error, guessing, variance.
    #[arg(long, default_value = "shannon")]
    measure: String,
    /// Prior belief: inline JSON array or a file containing one
    /// (default: the mechanism's prior, else uniform).
    #[arg(long, value_name = "BELIEF")]
    prior: Option<String>,
    /// Write the attack tree in DOT format to this file.
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OptimalArgs {
    /// Mechanism JSON file.
    #[arg(long, value_name = "FILE")]
    mechanism: PathBuf,
    /// Maximum number of queries.
    #[arg(long)]
    horizon: usize,
    /// Uncertainty measure: shannon, error, guessing, variance.
    #[arg(long, default_value = "shannon")]
    measure: String,
    /// Prior belief: inline JSON array or a file containing one.
    #[arg(long, value_name = "BELIEF")]
    prior: Option<String>,
    /// Decision-node budget (default 10^7); estimates above it abort.
    #[arg(long)]
    budget: Option<u128>,
    /// Write the optimal strategy as JSON to this file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write the optimal strategy in DOT format to this file.
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ClassesArgs {
    /// Mechanism JSON file.
    #[arg(long, value_name = "FILE")]
    mechanism: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MaxleakArgs {
    /// Mechanism JSON file.
    #[arg(long, value_name = "FILE")]
    mechanism: PathBuf,
    /// Uncertainty measure: shannon, error, guessing, variance.
    #[arg(long, default_value = "shannon")]
    measure: String,
    /// Prior belief: inline JSON array or a file containing one.
    #[arg(long, value_name = "BELIEF")]
    prior: Option<String>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CapacityArgs {
    /// Mechanism JSON file.
    #[arg(long, value_name = "FILE")]
    mechanism: PathBuf,
    /// Uncertainty measure: shannon, error, guessing, variance.
    #[arg(long, default_value = "shannon")]
    measure: String,
    /// Hill-climb over priors instead of requiring a closed form.
    #[arg(long)]
    search: bool,
    /// Restarts for --search.
    #[arg(long, default_value_t = 32)]
    restarts: u32,
    /// Seed for --search restarts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExpandArgs {
    /// Strategy JSON file (action list or tree).
    #[arg(long, value_name = "FILE")]
    strategy: PathBuf,
    /// Drop repeated queries (valid on deterministic mechanisms only).
    #[arg(long, requires = "mechanism")]
    dedupe_deterministic: bool,
    /// Mechanism JSON file; required by --dedupe-deterministic.
    #[arg(long, value_name = "FILE")]
    mechanism: Option<PathBuf>,
    /// Write the expanded strategy as JSON to this file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Print the strategy as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct IngestArgs {
    /// CSV file with a header row.
    #[arg(long, value_name = "FILE")]
    csv: PathBuf,
    /// Column holding the secret identifier.
    #[arg(long, value_name = "COLUMN")]
    secret_col: String,
    /// Attribute columns that become actions, in order.
    #[arg(long, value_delimiter = ',', value_name = "COL,COL,...")]
    attrs: Vec<String>,
    /// Uniform integer noise, as column:radius (repeatable).
    #[arg(long, value_name = "COLUMN:RADIUS")]
    noise: Vec<String>,
    /// Write the mechanism JSON to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Mechanism JSON file.
    #[arg(long, value_name = "FILE")]
    mechanism: PathBuf,
    /// Strategy JSON file (action list or tree).
    #[arg(long, value_name = "FILE")]
    strategy: PathBuf,
    /// Uncertainty measure: shannon, error, guessing, variance.
    #[arg(long, default_value = "shannon")]
    measure: String,
    /// Prior belief: inline JSON array or a file containing one.
    #[arg(long, value_name = "BELIEF")]
    prior: Option<String>,
    /// Number of attack trials.
    #[arg(long)]
    trials: u64,
    /// RNG seed; identical seeds reproduce the report byte for byte.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PsrArgs {
    /// Uncertainty measure: shannon, error, variance.
    #[arg(long, default_value = "shannon")]
    measure: String,
    /// Forecast belief: inline JSON array or a file containing one.
    #[arg(long, value_name = "BELIEF")]
    at: String,
    /// Mechanism JSON file; supplies secret labels, and the secret
    /// values the variance measure needs.
    #[arg(long, value_name = "FILE")]
    mechanism: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ProbeArgs {
    /// Mechanism JSON file.
    #[arg(long, value_name = "FILE")]
    mechanism: PathBuf,
    /// Uncertainty measure: shannon, error, guessing, variance.
    #[arg(long, default_value = "shannon")]
    measure: String,
    /// Prior belief: inline JSON array or a file containing one.
    #[arg(long, value_name = "BELIEF")]
    prior: Option<String>,
    /// Number of rounds to evaluate.
    #[arg(long)]
    rounds: usize,
    /// Print the report as JSON instead of a CSV table.
    #[arg(long)]
    json: bool,
}

/// A failed run, sorted by exit code class.
enum Failure {
    /// Exit 1: the inputs parse but describe something invalid.
    Domain(String),
    /// Exit 2: bad flags or unreadable/malformed files.
    Usage(String),
    /// Exit 3: the requested computation exceeds a resource budget.
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Usage(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<QifError> for Failure {
    fn from(err: QifError) -> Self {
        match err {
            QifError::Parse(_) | QifError::UnsupportedMeasure(_) | QifError::MissingColumn(_) => {
                Failure::Usage(err.to_string())
            }
            QifError::BudgetExceeded { .. } | QifError::TooManyStrategies { .. } => {
                Failure::Budget(err.to_string())
            }
            other => Failure::Domain(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { mechanism } => cmd_validate(&mechanism),
        Command::Leakage(args) => cmd_leakage(args),
        Command::Optimal(args) => cmd_optimal(args),
        Command::Classes(args) => cmd_classes(args),
        Command::Maxleak(args) => cmd_maxleak(args),
        Command::Capacity(args) => cmd_capacity(args),
        Command::Expand(args) => cmd_expand(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Psr(args) => cmd_psr(args),
        Command::Probe(args) => cmd_probe(args),
    }
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    let file = load_mechanism_file(path)?;
    let issues = validate(&file);
    if issues.is_empty() {
        println!(
            "ok: {} secrets, {} observations, {} actions",
            file.secrets.len(),
            file.observations.len(),
            file.actions.len()
        );
        Ok(())
    } else {
        for issue in &issues {
            println!("{issue}");
        }
        Err(Failure::Domain(format!(
            "{} validation issue(s) in {}",
            issues.len(),
            path.display()
        )))
    }
}

fn cmd_leakage(args: LeakageArgs) -> Result<(), Failure> {
    let mechanism = load_mechanism(&args.mechanism)?;
    let strategy = load_strategy(&args.strategy)?;
    let measure = build_measure(&args.measure, Some(&mechanism))?;
    let prior = resolve_prior(&mechanism, args.prior.as_deref())?;
    let report = leakage(&mechanism, &prior, &strategy, &measure)?;
    if let Some(dot_path) = &args.dot {
        let tree = build_attack_tree(&mechanism, &prior, &strategy, None)?;
        write_file(dot_path, &tree.to_dot(&mechanism))?;
    }
    if args.json {
        print_json(&report)?;
        return Ok(());
    }
    let exact = !is_log_valued(&measure);
    println!("measure: {}", report.measure);
    println!("strategy length: {}", report.strategy_length);
    println!("traces: {}", report.trace_count);
    println!("prior uncertainty: {}", show(report.prior_uncertainty, exact));
    println!(
        "conditional uncertainty: {}",
        show(report.conditional_uncertainty, exact)
    );
    println!("leakage: {}", show(report.leakage, exact));
    Ok(())
}

fn cmd_optimal(args: OptimalArgs) -> Result<(), Failure> {
    if args.horizon < 1 {
        return Err(Failure::Usage("--horizon must be at least 1".to_string()));
    }
    let mechanism = load_mechanism(&args.mechanism)?;
    let measure = build_measure(&args.measure, Some(&mechanism))?;
    let prior = resolve_prior(&mechanism, args.prior.as_deref())?;
    let report = plan(&mechanism, &prior, args.horizon, &measure, args.budget)?;
    if let Some(out) = &args.out {
        write_file(out, &to_pretty_json(&report.strategy)?)?;
    }
    if let Some(dot_path) = &args.dot {
        write_file(dot_path, &report.strategy.to_dot())?;
    }
    if args.json {
        print_json(&report)?;
        return Ok(());
    }
    let exact = !is_log_valued(&measure);
    println!("measure: {}", report.measure);
    println!("horizon: {}", report.horizon);
    println!("value: {}", show(report.value, exact));
    let root = match &report.strategy {
        Strategy::Tree(node) => node.action.clone(),
        Strategy::NonAdaptive(actions) => actions[0].clone(),
    };
    println!("root action: {root}");
    println!("committed first-action values:");
    for branch in &report.root_values {
        println!("  {}: {}", branch.action, show(branch.value, exact));
    }
    println!("nodes expanded: {}", report.nodes_expanded);
    println!("node estimate: {}", report.estimated_nodes);
    Ok(())
}

#[derive(Serialize)]
struct ClassesOut {
    count: usize,
    classes: Vec<Vec<String>>,
}

fn cmd_classes(args: ClassesArgs) -> Result<(), Failure> {
    let mechanism = load_mechanism(&args.mechanism)?;
    let partition = mechanism.indistinguishability();
    let out = ClassesOut {
        count: partition.count(),
        classes: partition
            .classes()
            .iter()
            .map(|class| {
                class
                    .iter()
                    .map(|&x| mechanism.secrets()[x].clone())
                    .collect()
            })
            .collect(),
    };
    if args.json {
        print_json(&out)?;
        return Ok(());
    }
    println!("classes: {}", out.count);
    for (i, class) in out.classes.iter().enumerate() {
        println!("  {}: {{{}}}", i + 1, class.join(", "));
    }
    Ok(())
}

fn cmd_maxleak(args: MaxleakArgs) -> Result<(), Failure> {
    let mechanism = load_mechanism(&args.mechanism)?;
    let measure = build_measure(&args.measure, Some(&mechanism))?;
    let prior = resolve_prior(&mechanism, args.prior.as_deref())?;
    let report = max_leakage(&mechanism, &prior, &measure)?;
    if args.json {
        print_json(&report)?;
        return Ok(());
    }
    let exact = !is_log_valued(&measure);
    println!("measure: {}", report.measure);
    println!("classes: {}", report.classes);
    println!("prior uncertainty: {}", show(report.prior_uncertainty, exact));
    println!(
        "conditional uncertainty: {}",
        show(report.conditional_uncertainty, exact)
    );
    println!("max leakage: {}", show(report.value, exact));
    Ok(())
}

fn cmd_capacity(args: CapacityArgs) -> Result<(), Failure> {
    let mechanism = load_mechanism(&args.mechanism)?;
    if args.search {
        let measure = build_measure(&args.measure, Some(&mechanism))?;
        let report = capacity_search(&mechanism, &measure, args.restarts, args.seed)?;
        if args.json {
            print_json(&report)?;
            return Ok(());
        }
        let exact = !is_log_valued(&measure);
        println!("measure: {}", report.measure);
        println!("classes: {}", report.classes);
        println!("capacity (search): {}", show(report.value, exact));
        println!("prior: {}", show_belief(report.prior.probs()));
        println!("restarts: {}", report.restarts);
        return Ok(());
    }
    let kind = MeasureKind::parse(&args.measure).map_err(usage)?;
    let report = match capacity(&mechanism, kind) {
        Err(QifError::UnsupportedMeasure(name)) => {
            return Err(Failure::Usage(format!(
                "no closed-form capacity for {name}; rerun with --search"
            )));
        }
        other => other?,
    };
    if args.json {
        print_json(&report)?;
        return Ok(());
    }
    let exact = kind != MeasureKind::Shannon;
    println!("measure: {}", report.measure);
    println!("classes: {}", report.classes);
    println!("capacity: {}", show(report.value, exact));
    Ok(())
}

fn cmd_expand(args: ExpandArgs) -> Result<(), Failure> {
    let strategy = load_strategy(&args.strategy)?;
    let expanded = strategy.expand_non_adaptive();
    let expanded = if args.dedupe_deterministic {
        // Clap guarantees --mechanism is present here.
        let mechanism = load_mechanism(args.mechanism.as_deref().expect("required by clap"))?;
        expanded.dedupe_deterministic(&mechanism)?
    } else {
        expanded
    };
    if let Some(out) = &args.out {
        write_file(out, &to_pretty_json(&expanded)?)?;
    }
    if args.json {
        print_json(&expanded)?;
        return Ok(());
    }
    let actions = match &expanded {
        Strategy::NonAdaptive(actions) => actions.as_slice(),
        Strategy::Tree(_) => unreachable!("expansion always yields a list"),
    };
    println!("length: {}", actions.len());
    for action in actions {
        println!("{action}");
    }
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> Result<(), Failure> {
    if args.attrs.is_empty() {
        return Err(Failure::Usage(
            "--attrs needs at least one column".to_string(),
        ));
    }
    let noise = args
        .noise
        .iter()
        .map(|spec| parse_noise(spec))
        .collect::<Result<Vec<_>, _>>()?;
    let file = fs::File::open(&args.csv)
        .map_err(|e| Failure::Usage(format!("opening {}: {e}", args.csv.display())))?;
    let mechanism = ingest_csv(file, &args.secret_col, &args.attrs, &noise)?;
    let json = to_pretty_json(&mechanism.to_file())?;
    match &args.out {
        Some(path) => write_file(path, &json)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    if args.trials < 1 {
        return Err(Failure::Usage("--trials must be at least 1".to_string()));
    }
    let mechanism = load_mechanism(&args.mechanism)?;
    let strategy = load_strategy(&args.strategy)?;
    let measure = build_measure(&args.measure, Some(&mechanism))?;
    let prior = resolve_prior(&mechanism, args.prior.as_deref())?;
    let report = simulate(
        &mechanism,
        &prior,
        &strategy,
        &measure,
        args.trials,
        args.seed,
    )?;
    if args.json {
        print_json(&report)?;
        return Ok(());
    }
    println!("measure: {}", report.measure);
    println!("trials: {}", report.trials);
    println!("seed: {}", report.seed);
    println!("prior uncertainty: {}", sig12(report.prior_uncertainty));
    println!(
        "conditional estimate: {}",
        sig12(report.conditional_estimate)
    );
    println!("leakage estimate: {}", sig12(report.leakage_estimate));
    println!("standard error: {}", sig12(report.std_error));
    println!("mean queries: {}", sig12(report.mean_queries));
    Ok(())
}

#[derive(Serialize)]
struct ScoreLine {
    secret: String,
    score: f64,
}

#[derive(Serialize)]
struct PsrOut {
    measure: String,
    forecast: Vec<f64>,
    scores: Vec<ScoreLine>,
    /// Expected score when the forecast is the true distribution; equals
    /// the measure's value at the forecast.
    expected_score: f64,
}

fn cmd_psr(args: PsrArgs) -> Result<(), Failure> {
    let mechanism = args
        .mechanism
        .as_deref()
        .map(load_mechanism)
        .transpose()?;
    let measure = build_measure(&args.measure, mechanism.as_ref())?;
    let forecast = parse_belief(&args.at)?;
    if let Some(m) = &mechanism {
        if m.secret_count() != forecast.len() {
            return Err(Failure::Domain(format!(
                "forecast has {} entries but the mechanism has {} secrets",
                forecast.len(),
                m.secret_count()
            )));
        }
    }
    let rule = scoring_rule(&measure)?;
    let label = |i: usize| -> String {
        match &mechanism {
            Some(m) => m.secrets()[i].clone(),
            None => i.to_string(),
        }
    };
    let mut scores = Vec::with_capacity(forecast.len());
    for i in 0..forecast.len() {
        scores.push(ScoreLine {
            secret: label(i),
            score: rule.score(i, &forecast)?,
        });
    }
    let out = PsrOut {
        measure: measure.name().to_string(),
        forecast: forecast.probs().to_vec(),
        scores,
        expected_score: rule.expected_score(&forecast, &forecast)?,
    };
    if args.json {
        print_json(&out)?;
        return Ok(());
    }
    let exact = !is_log_valued(&measure);
    println!("measure: {}", out.measure);
    println!("forecast: {}", show_belief(&out.forecast));
    println!("scores:");
    for line in &out.scores {
        println!("  {}: {}", line.secret, show(line.score, exact));
    }
    println!("expected score if true: {}", show(out.expected_score, exact));
    Ok(())
}

fn cmd_probe(args: ProbeArgs) -> Result<(), Failure> {
    if args.rounds < 1 {
        return Err(Failure::Usage("--rounds must be at least 1".to_string()));
    }
    let mechanism = load_mechanism(&args.mechanism)?;
    let measure = build_measure(&args.measure, Some(&mechanism))?;
    let prior = resolve_prior(&mechanism, args.prior.as_deref())?;
    let report = convergence_probe(&mechanism, &prior, &measure, args.rounds)?;
    if args.json {
        print_json(&report)?;
        return Ok(());
    }
    println!("round,leakage,gap");
    for round in &report.rounds {
        println!(
            "{},{},{}",
            round.round,
            sig12(round.value),
            sig12(round.gap)
        );
    }
    Ok(())
}

/// Values of log-based measures are irrational in general; fraction
/// rendering would fabricate precision there, so it is reserved for
/// measures whose values stay rational for rational inputs.
fn is_log_valued(measure: &UncertaintyMeasure) -> bool {
    matches!(measure.kind(), Some(MeasureKind::Shannon) | None)
}

/// Twelve significant digits, with the exact reduced fraction appended
/// when `exact` and one reconstructs (`0.875 = 7/8`).
fn show(x: f64, exact: bool) -> String {
    let decimal = sig12(x);
    if !exact {
        return decimal;
    }
    match fraction_string(x) {
        Some(fraction) if fraction != decimal => format!("{decimal} = {fraction}"),
        _ => decimal,
    }
}

/// Probability vectors render as fractions only when the whole vector
/// reconstructs and sums exactly to one.
fn show_belief(probs: &[f64]) -> String {
    let rendered: Vec<String> = match fraction_probabilities(probs) {
        Some(fractions) => fractions
            .iter()
            .map(|&(p, q)| {
                if q == 1 {
                    p.to_string()
                } else {
                    format!("{p}/{q}")
                }
            })
            .collect(),
        None => probs.iter().map(|&p| sig12(p)).collect(),
    };
    format!("[{}]", rendered.join(", "))
}

fn usage(err: QifError) -> Failure {
    Failure::Usage(err.to_string())
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))
}

fn load_mechanism_file(path: &Path) -> Result<MechanismFile, Failure> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_mechanism(path: &Path) -> Result<Mechanism, Failure> {
    let file = load_mechanism_file(path)?;
    Ok(Mechanism::from_file(file)?)
}

fn load_strategy(path: &Path) -> Result<Strategy, Failure> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Parse a belief given as an inline JSON array or as a path to a JSON
/// file holding one.
fn parse_belief(arg: &str) -> Result<Belief, Failure> {
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        read_file(Path::new(arg))?
    };
    let probs: Vec<f64> = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("belief {arg:?}: {e}")))?;
    Ok(Belief::new(probs)?)
}

fn resolve_prior(mechanism: &Mechanism, arg: Option<&str>) -> Result<Belief, Failure> {
    match arg {
        Some(text) => parse_belief(text),
        None => Ok(mechanism.prior_or_uniform()),
    }
}

fn build_measure(
    name: &str,
    mechanism: Option<&Mechanism>,
) -> Result<UncertaintyMeasure, Failure> {
    let kind = MeasureKind::parse(name).map_err(usage)?;
    Ok(UncertaintyMeasure::from_kind(
        kind,
        mechanism.and_then(|m| m.secret_values()),
    )?)
}

fn parse_noise(spec: &str) -> Result<NoiseSpec, Failure> {
    let (column, radius) = spec.split_once(':').ok_or_else(|| {
        Failure::Usage(format!("--noise {spec:?}: expected column:radius"))
    })?;
    let radius = radius
        .parse()
        .map_err(|e| Failure::Usage(format!("--noise {spec:?}: bad radius: {e}")))?;
    Ok(NoiseSpec {
        column: column.to_string(),
        radius,
    })
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Usage(format!("serializing output: {e}")))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    println!("{}", to_pretty_json(value)?);
    Ok(())
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    let text = if content.ends_with('\n') {
        content.to_string()
    } else {
        format!("{content}\n")
    };
    fs::write(path, text).map_err(|e| Failure::Usage(format!("writing {}: {e}", path.display())))
}
