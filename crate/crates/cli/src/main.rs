use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bernstein_mechanism::basis::{grid_points, BasisParams, BasisTable};
use bernstein_mechanism::experiments::{run_utility_experiment, CellOutcome, CoverSize, ExperimentSpec, Method};
use bernstein_mechanism::mechanism::{baseline_evaluate, choose_k, predicted_error_bound, sanitize, PrivacyBudget};
use bernstein_mechanism::{persist, Dataset, Error, LearnerConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Differentially private function release with iterated Bernstein
/// polynomials.
#[derive(Debug, Parser)]
#[command(name = "bernstein", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a learner on a private dataset and write a noisy synopsis.
    Sanitize(SanitizeArgs),
    /// Answer queries from a synopsis file alone.
    Evaluate(EvaluateArgs),
    /// Run a utility experiment described by a TOML spec.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
struct SanitizeArgs {
    /// Learner id: kde, pc-regression, naive-bayes, erm or logistic.
    #[arg(long)]
    learner: String,
    /// Learner parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_key_value)]
    params: Vec<(String, String)>,
    /// Private dataset file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    /// Iteration order of the Bernstein operator.
    #[arg(long)]
    h: usize,
    /// Cover size, or "auto".
    #[arg(long, default_value = "auto")]
    k: String,
    /// Noise seed; drawn from system entropy and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Synopsis output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalMethod {
    Bernstein,
    Baseline,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    synopsis: PathBuf,
    /// File with one query point per line.
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    query: Option<PathBuf>,
    /// Evaluate on the uniform grid with this many points per axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_enum, default_value_t = EvalMethod::Bernstein)]
    method: EvalMethod,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Report file (CSV).
    #[arg(long)]
    out: PathBuf,
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Partial(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Lib(Error::Io(e))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Config(_) | Error::Budget(_) | Error::Version(_) => 2,
        Error::Shape(_) => 4,
        Error::Io(_) => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sanitize(args) => cmd_sanitize(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Experiment(args) => cmd_experiment(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Partial(cells)) => {
            eprintln!("error: {} cell(s) failed", cells.len());
            for c in cells {
                eprintln!("  {c}");
            }
            ExitCode::from(5)
        }
    }
}

fn cmd_sanitize(args: SanitizeArgs) -> Result<(), Failure> {
    let budget = PrivacyBudget::new(args.epsilon, args.delta)?;
    if !(args.beta > 0.0 && args.beta < 1.0) {
        return Err(Error::Config(format!("beta must lie in (0, 1), got {}", args.beta)).into());
    }
    if args.h == 0 {
        return Err(Error::Config("h must be at least 1".into()).into());
    }
    let k_choice: CoverSize = args.k.parse()?;
    if k_choice == CoverSize::Fixed(0) {
        return Err(Error::Config("k must be at least 1".into()).into());
    }
    let seed = args.seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        log::info!("drew noise seed {s} from system entropy");
        s
    });

    let data = Dataset::parse(&fs::read_to_string(&args.data)?)?;
    let config = LearnerConfig::from_params(&args.learner, &args.params, data.ell())?;
    let target = config.build()?.fit(&data)?;
    drop(data);

    let k = match k_choice {
        CoverSize::Fixed(k) => k,
        CoverSize::Auto => choose_k(&target, args.h, args.epsilon, args.beta)?,
    };
    let params = BasisParams::new(k, args.h, target.ell())?;
    let synopsis = sanitize(&target, params, budget, seed)?;
    persist::write(&synopsis, BufWriter::new(fs::File::create(&args.out)?))?;

    let bound = if k_choice == CoverSize::Auto && budget.is_pure() {
        predicted_error_bound(target.smoothness(), target.sensitivity(), args.h, target.ell(), args.epsilon, args.beta)?
            .to_string()
    } else {
        "inapplicable".to_string()
    };
    println!("seed={seed}");
    println!("k={k}");
    println!("lambda={}", synopsis.lambda);
    println!("predicted_error_bound={bound}");
    Ok(())
}

fn read_queries(path: &Path, ell: usize) -> Result<Vec<Vec<f64>>, Error> {
    let text = fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let point = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("not a number: {f:?}"),
                })
            })
            .collect::<Result<Vec<f64>, Error>>()?;
        if point.len() != ell {
            return Err(Error::Shape(format!(
                "line {}: query has {} coordinates but the synopsis is {ell}-dimensional",
                i + 1,
                point.len()
            )));
        }
        points.push(point);
    }
    Ok(points)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    if let Some(m) = args.grid.filter(|&m| m < 1) {
        return Err(Error::Config(format!("grid needs at least one point per axis, got {m}")).into());
    }
    let synopsis = persist::read(fs::File::open(&args.synopsis)?)?;
    let ell = synopsis.ell();
    let points = match (&args.query, args.grid) {
        (Some(path), _) => read_queries(path, ell)?,
        (None, Some(m)) => grid_points(m, ell),
        (None, None) => unreachable!("clap requires --query or --grid"),
    };
    let table = BasisTable::build(synopsis.params)?;
    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(fs::File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    for y in &points {
        let value = match args.method {
            EvalMethod::Bernstein => synopsis.evaluate(&table, y)?,
            EvalMethod::Baseline => baseline_evaluate(&synopsis, y)?,
        };
        let coords: Vec<String> = y.iter().map(f64::to_string).collect();
        writeln!(out, "{},{value}", coords.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let spec = ExperimentSpec::from_toml(&fs::read_to_string(&args.spec)?)?;
    let base = args.spec.parent().filter(|p| !p.as_os_str().is_empty());
    let report = run_utility_experiment(&spec, base)?;
    fs::write(&args.out, report.to_csv())?;
    let mut failed = Vec::new();
    for cell in &report.cells {
        match &cell.outcome {
            CellOutcome::Completed => println!(
                "cell={} epsilon={} h={} k={} mechanism_mean={} baseline_mean={}",
                cell.index,
                cell.epsilon,
                cell.h,
                cell.k.map(|k| k.to_string()).unwrap_or_default(),
                report.mean(cell.index, Method::Mechanism).unwrap_or(f64::NAN),
                report.mean(cell.index, Method::Baseline).unwrap_or(f64::NAN),
            ),
            CellOutcome::Failed(msg) => {
                failed.push(format!("cell {} (epsilon={}, h={}): {msg}", cell.index, cell.epsilon, cell.h))
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Partial(failed))
    }
}
