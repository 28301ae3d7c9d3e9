//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numeric or validity failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::data::{
    load_csv, min_max_scale, read_cache, sample_student_mixture, write_cache, write_csv, CsvSchema, LabelColumn,
    StudentMixtureParams,
};
use crate::erm::{LossKind, OptimizerConfig};
use crate::error::Error;
use crate::experiments::{
    excess_curve_svg, heatmap_svg, linspace, results_to_string, run_bound_report, run_erm_excess_curve,
    run_knn_heatmap, BoundReportInputs, ExcessRiskConfig, HeatmapConfig, ResultRow,
};
use crate::knn::{direct_excess_am_risk, excess_am_risk_identity, BayesOracle, KnnModel};
use crate::measures::{Label, LabeledDataset};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "balrisk",
    version,
    about = "Balanced risk estimation under severe class imbalance"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat `key = value` file; keys are long flag names of the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads (default: BRL_THREADS, else all cores).
    #[arg(long, global = true, env = "BRL_THREADS")]
    pub threads: Option<usize>,

    #[arg(long, global = true, default_value = "warn")]
    pub log_level: log::LevelFilter,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic dataset from the Student-t mixture.
    Gen(GenArgs),
    /// k-NN AM risk over a grid of (k, p).
    KnnHeatmap(HeatmapArgs),
    /// Excess balanced risk of constrained ERM against n.
    ErmCurve(CurveArgs),
    /// Table of generalization bounds.
    Bounds(BoundsArgs),
    /// Cross-check the excess AM risk identity against a direct estimate.
    CheckIdentity(IdentityArgs),
    /// Fit balanced k-NN and classify query rows.
    KnnPredict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    /// Class prior exponent: p = n^-a.
    #[arg(long, conflicts_with = "p")]
    pub a: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `.csv` writes text, anything else the binary cache format.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Comma-separated exponents; overrides --grid-size.
    #[arg(long, value_delimiter = ',')]
    pub a_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub b_grid: Option<Vec<f64>>,
    /// Points of the evenly spaced grid over [1/4, 3/4].
    #[arg(long, default_value_t = 5)]
    pub grid_size: usize,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 2000)]
    pub test_queries: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, value_delimiter = ',', default_value = "100,316,1000,3162,10000")]
    pub n_grid: Vec<usize>,
    /// One curve per value.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.3333333333333333,0.5,0.6666666666666666"
    )]
    pub a: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub u: f64,
    #[arg(long, default_value = "logistic")]
    pub loss: String,
    #[arg(long, default_value_t = 100_000)]
    pub oracle_draws: usize,
    #[arg(long, default_value_t = 10_000)]
    pub risk_draws: usize,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    #[arg(long = "A", default_value_t = 1.0)]
    pub a: f64,
    #[arg(long = "U", default_value_t = 1.0)]
    pub u: f64,
    #[arg(long = "B", default_value_t = 2.0)]
    pub b: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long = "K", default_value_t = crate::bounds::DEFAULT_SLOW_RATE_K)]
    pub k: f64,
    #[arg(long)]
    pub sigma_plus: Option<f64>,
    #[arg(long)]
    pub sigma_minus: Option<f64>,
    /// `csv` or `text`.
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(long, default_value_t = 0.05)]
    pub p: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: usize,
    /// `positive` or `negative`: the constant classifier under test.
    #[arg(long, default_value = "positive")]
    pub classifier: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Training data: `.csv`, otherwise the binary cache format.
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Feature-only CSV; a non-numeric first row is treated as a header.
    #[arg(long)]
    pub query: PathBuf,
    /// Label column of a CSV training file: a header name or 0-based index.
    #[arg(long)]
    pub label_column: Option<String>,
    #[arg(long, default_value = "1")]
    pub positive_value: String,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Subsample training positives towards this class fraction.
    #[arg(long)]
    pub target_p: Option<f64>,
    /// Min-max scale training features to [0, 1] (queries use the training ranges).
    #[arg(long)]
    pub min_max: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Validity(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidK { .. } => EXIT_USAGE,
        Error::Domain { .. } | Error::NotPositiveDefinite(_) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

/// Reads `key = value` lines; `#` starts a comment line.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Inserts config entries as flags directly after the subcommand name so that
/// explicit flags, appearing later, take precedence.
fn merge_config(args: &[OsString], subcommand: &str, entries: &[(String, String)]) -> Result<Vec<OsString>, String> {
    let cmd = Cli::command();
    let sub = cmd
        .find_subcommand(subcommand)
        .ok_or_else(|| format!("unknown subcommand {subcommand}"))?;
    let mut injected = Vec::new();
    for (key, value) in entries {
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments().filter(|a| a.get_id() != "config"))
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| format!("unknown config key {key:?} for {subcommand}"))?;
        if arg.get_action().takes_values() {
            injected.push(OsString::from(format!("--{key}={value}")));
        } else {
            match value.as_str() {
                "true" => injected.push(OsString::from(format!("--{key}"))),
                "false" => {}
                other => return Err(format!("config key {key:?} expects true or false, got {other:?}")),
            }
        }
    }
    let pos = args
        .iter()
        .position(|a| a.to_str() == Some(subcommand))
        .ok_or_else(|| format!("subcommand {subcommand} not found in arguments"))?;
    let mut merged = args[..=pos].to_vec();
    merged.extend(injected);
    merged.extend_from_slice(&args[pos + 1..]);
    Ok(merged)
}

fn parse(args: &[OsString], stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Cli, i32> {
    let report = |e: clap::Error, stdout: &mut dyn Write, stderr: &mut dyn Write| {
        let text = e.render().to_string();
        if e.use_stderr() {
            let _ = write!(stderr, "{text}");
            EXIT_USAGE
        } else {
            let _ = write!(stdout, "{text}");
            EXIT_OK
        }
    };
    // Lenient pass: only the config path and subcommand are needed here, and
    // required flags may still be missing until the config is merged in.
    let lenient = Cli::command().ignore_errors(true).try_get_matches_from(args).ok();
    let config = lenient.as_ref().and_then(|m| {
        let path = m.get_one::<PathBuf>("config").cloned()?;
        Some((path, m.subcommand_name()?.to_string()))
    });
    let Some((path, subcommand)) = config else {
        let matches = Cli::command()
            .try_get_matches_from(args)
            .map_err(|e| report(e, stdout, stderr))?;
        return Cli::from_arg_matches(&matches).map_err(|e| report(e, stdout, stderr));
    };
    let merged = fs::read_to_string(&path)
        .map_err(|e| format!("{}: {e}", path.display()))
        .and_then(|text| parse_config_file(&text))
        .and_then(|entries| merge_config(args, &subcommand, &entries));
    let merged = match merged {
        Ok(m) => m,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return Err(EXIT_USAGE);
        }
    };
    let matches = Cli::command()
        .try_get_matches_from(&merged)
        .map_err(|e| report(e, stdout, stderr))?;
    Cli::from_arg_matches(&matches).map_err(|e| report(e, stdout, stderr))
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse(&args, stdout, stderr) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let _ = env_logger::Builder::new()
        .filter_level(cli.log_level)
        .target(env_logger::Target::Stderr)
        .try_init();

    let mut buffer: Vec<u8> = Vec::new();
    let outcome = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(t) => crate::par::with_threads(t, || dispatch(&cli.command, &mut buffer)),
        None => dispatch(&cli.command, &mut buffer),
    };
    let _ = stdout.write_all(&buffer);
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
        Err(Failure::Validity(msg)) => {
            let _ = writeln!(stderr, "validity failure: {msg}");
            EXIT_NUMERIC
        }
    }
}

fn dispatch(cmd: &Command, stdout: &mut Vec<u8>) -> Result<(), Failure> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::KnnHeatmap(a) => knn_heatmap(a, stdout),
        Command::ErmCurve(a) => erm_curve(a, stdout),
        Command::Bounds(a) => bounds(a, stdout),
        Command::CheckIdentity(a) => check_identity(a, stdout),
        Command::KnnPredict(a) => knn_predict(a, stdout),
    }
}

fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e).into()),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e).into()),
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn gen(args: &GenArgs) -> Result<(), Failure> {
    if args.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let p = match (args.a, args.p) {
        (Some(a), None) => (args.n as f64).powf(-a),
        (None, Some(p)) => p,
        _ => return Err(Failure::Usage("exactly one of --a and --p is required".into())),
    };
    let params = StudentMixtureParams::reference(p)?;
    let data = sample_student_mixture(&params, args.n, args.seed);
    if is_csv(&args.out) {
        let file = fs::File::create(&args.out).map_err(|e| Error::io(&args.out, e))?;
        write_csv(std::io::BufWriter::new(file), &data)?;
    } else {
        write_cache(&args.out, &data)?;
    }
    let (pos, neg) = data.class_counts();
    log::info!(
        "wrote {} rows ({pos} positive, {neg} negative) to {}",
        data.len(),
        args.out.display()
    );
    Ok(())
}

fn knn_heatmap(args: &HeatmapArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let grid = linspace(0.25, 0.75, args.grid_size);
    let cfg = HeatmapConfig {
        n: args.n,
        a_grid: args.a_grid.clone().unwrap_or_else(|| grid.clone()),
        b_grid: args.b_grid.clone().unwrap_or(grid),
        reps: args.reps,
        seed: args.seed,
        test_queries: args.test_queries,
    };
    let rows = run_knn_heatmap(&cfg)?;
    if let Some(svg) = &args.svg {
        fs::write(svg, heatmap_svg(&rows)).map_err(|e| Error::io(svg, e))?;
    }
    emit(args.out.as_deref(), &results_to_string(&cfg.describe(), &rows)?, stdout)
}

fn erm_curve(args: &CurveArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let loss: LossKind = args.loss.parse()?;
    if args.a.is_empty() {
        return Err(Failure::Usage("--a needs at least one value".into()));
    }
    let mut rows: Vec<ResultRow> = Vec::new();
    let mut described = Vec::new();
    for &a in &args.a {
        let cfg = ExcessRiskConfig {
            n_grid: args.n_grid.clone(),
            a,
            u: args.u,
            loss,
            oracle_draws: args.oracle_draws,
            risk_draws: args.risk_draws,
            reps: args.reps,
            seed: args.seed,
            optimizer: OptimizerConfig {
                max_iters: args.max_iters,
                ..OptimizerConfig::default()
            },
        };
        rows.extend(run_erm_excess_curve(&cfg)?);
        if described.is_empty() {
            described = cfg.describe();
        }
    }
    for (k, v) in described.iter_mut() {
        if k == "a" {
            *v = args.a.iter().map(|a| format!("{a}")).collect::<Vec<_>>().join(";");
        }
    }
    if let Some(svg) = &args.svg {
        fs::write(svg, excess_curve_svg(&rows)).map_err(|e| Error::io(svg, e))?;
    }
    emit(args.out.as_deref(), &results_to_string(&described, &rows)?, stdout)
}

fn bounds(args: &BoundsArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let inputs = BoundReportInputs {
        n: args.n,
        p: args.p,
        v: args.v,
        a: args.a,
        envelope: args.u,
        bernstein: args.b,
        delta: args.delta,
        k_const: args.k,
        sigma_plus: args.sigma_plus,
        sigma_minus: args.sigma_minus,
    };
    let rows = run_bound_report(&inputs);
    let text = match args.format.as_str() {
        "csv" => results_to_string(&inputs.describe(), &rows)?,
        "text" => aligned_table(&rows),
        other => return Err(Failure::Usage(format!("unknown format {other:?}"))),
    };
    emit(args.out.as_deref(), &text, stdout)?;
    if rows.iter().all(|r| r.get("valid") == Some(&false.into())) {
        return Err(Failure::Validity("no bound could be evaluated".into()));
    }
    Ok(())
}

fn aligned_table(rows: &[ResultRow]) -> String {
    let mut out = format!("{:<16} {:>24} {:>6}\n", "bound", "value", "valid");
    for r in rows {
        let cell = |k: &str| r.get(k).map(ToString::to_string).unwrap_or_default();
        let value = r.real("value").map(|v| format!("{v:.10e}")).unwrap_or_default();
        out.push_str(&format!("{:<16} {:>24} {:>6}", cell("bound"), value, cell("valid")));
        let note = cell("note");
        if !note.is_empty() {
            out.push_str(&format!("  {note}"));
        }
        out.push('\n');
    }
    out
}

fn check_identity(args: &IdentityArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let constant = match args.classifier.as_str() {
        "positive" => Label::Positive,
        "negative" => Label::Negative,
        other => return Err(Failure::Usage(format!("unknown classifier {other:?}"))),
    };
    let params = StudentMixtureParams::reference(args.p)?;
    let oracle = BayesOracle::new(params.clone(), args.p)?;
    let classifier = move |_: &[f64]| constant;
    let seed_identity = crate::rng::stream_id(&[args.seed, 1]);
    let seed_direct = crate::rng::stream_id(&[args.seed, 2]);
    let identity = excess_am_risk_identity(&oracle, classifier, &params, args.draws, seed_identity)?;
    let direct = direct_excess_am_risk(&oracle, classifier, &params, args.draws, seed_direct)?;
    let combined = (identity.std_err.powi(2) + direct.std_err.powi(2)).sqrt();
    let z = if combined > 0.0 {
        (identity.mean - direct.mean).abs() / combined
    } else {
        0.0
    };
    let agree = z <= 3.0;
    let row = ResultRow::new()
        .with("p", args.p)
        .with("draws", args.draws)
        .with("classifier", args.classifier.as_str())
        .with("identity_mean", identity.mean)
        .with("identity_se", identity.std_err)
        .with("direct_mean", direct.mean)
        .with("direct_se", direct.std_err)
        .with("z", z)
        .with("agree", agree)
        .with("seed", args.seed);
    let cfg = vec![
        ("experiment".to_string(), "check-identity".to_string()),
        ("p".to_string(), format!("{}", args.p)),
        ("draws".to_string(), args.draws.to_string()),
        ("classifier".to_string(), args.classifier.clone()),
        ("seed".to_string(), args.seed.to_string()),
    ];
    emit(args.out.as_deref(), &results_to_string(&cfg, &[row])?, stdout)?;
    if agree {
        Ok(())
    } else {
        Err(Failure::Validity(format!(
            "estimates differ by {z:.2} combined standard errors"
        )))
    }
}

fn load_training(args: &PredictArgs) -> Result<LabeledDataset, Failure> {
    if !is_csv(&args.train) {
        let data = read_cache(&args.train)?;
        return Ok(match args.target_p {
            Some(_) => return Err(Failure::Usage("--target-p applies to CSV training files only".into())),
            None => data,
        });
    }
    if !args.delimiter.is_ascii() {
        return Err(Failure::Usage("--delimiter must be an ASCII character".into()));
    }
    let label_column = match &args.label_column {
        None => LabelColumn::Last,
        Some(s) => match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.clone()),
        },
    };
    let schema = CsvSchema {
        label_column,
        positive_value: args.positive_value.clone(),
        delimiter: args.delimiter as u8,
        has_header: true,
    };
    Ok(load_csv(&args.train, &schema, args.target_p, args.seed)?)
}

/// Feature rows of `path`; a first row that does not parse as numbers is a header.
fn read_queries(path: &Path, delimiter: u8, dim: usize) -> Result<Vec<f64>, Error> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(|t| t.trim().parse::<f64>()).collect();
        let row = match parsed {
            Ok(r) => r,
            Err(_) if i == 0 => continue,
            Err(e) => {
                let column = record
                    .iter()
                    .position(|t| t.trim().parse::<f64>().is_err())
                    .map_or(0, |c| c + 1);
                return Err(Error::Parse {
                    row: i + 1,
                    column,
                    message: e.to_string(),
                });
            }
        };
        if row.len() != dim {
            return Err(Error::Schema(format!(
                "query row {} has {} columns, training data has {dim} features",
                i + 1,
                row.len()
            )));
        }
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row: i + 1,
                column: c + 1,
                message: "non-finite value".into(),
            });
        }
        out.extend(row);
    }
    Ok(out)
}

fn knn_predict(args: &PredictArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut train = load_training(args)?;
    let d = train.dim();
    let mut queries = read_queries(&args.query, args.delimiter as u8, d)?;
    if args.min_max {
        let ranges: Vec<(f64, f64)> = (0..d)
            .map(|j| {
                train
                    .iter()
                    .map(|(x, _)| x[j])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
            })
            .collect();
        min_max_scale(&mut train);
        for q in queries.chunks_exact_mut(d) {
            for (v, &(lo, hi)) in q.iter_mut().zip(&ranges) {
                *v = if hi > lo { (*v - lo) / (hi - lo) } else { 0.0 };
            }
        }
    }
    let model = KnnModel::new(train, args.k)?;
    let predictions = model.classify_batch(&queries);
    let mut text = String::from("prediction\n");
    for p in predictions {
        text.push_str(if p.is_positive() { "1\n" } else { "-1\n" });
    }
    emit(args.out.as_deref(), &text, stdout)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn config_file_parsing() {
        let entries = parse_config_file("# c\nn = 5\n\nreps=2\n").unwrap();
        assert_eq!(entries, vec![("n".into(), "5".into()), ("reps".into(), "2".into())]);
        assert!(parse_config_file("oops").is_err());
    }

    #[test]
    fn merge_puts_config_before_flags() {
        let args: Vec<OsString> = ["balrisk", "bounds", "--n", "10"].iter().map(OsString::from).collect();
        let merged = merge_config(&args, "bounds", &[("n".into(), "99".into())]).unwrap();
        let merged: Vec<_> = merged.iter().map(|s| s.to_str().unwrap()).collect();
        assert_eq!(merged, ["balrisk", "bounds", "--n=99", "--n", "10"]);
    }

    #[test]
    fn unknown_config_key_is_named() {
        let args: Vec<OsString> = ["balrisk", "bounds"].iter().map(OsString::from).collect();
        let err = merge_config(&args, "bounds", &[("bogus".into(), "1".into())]).unwrap_err();
        assert!(err.contains("bogus"));
    }

    #[test]
    fn help_exits_zero() {
        for sub in [
            "gen",
            "knn-heatmap",
            "erm-curve",
            "bounds",
            "check-identity",
            "knn-predict",
        ] {
            let (code, out, _) = run_capture(&["balrisk", sub, "--help"]);
            assert_eq!(code, 0, "{sub}");
            assert!(out.contains("Usage"), "{sub}");
        }
        assert_eq!(run_capture(&["balrisk", "--help"]).0, 0);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_capture(&["balrisk", "bounds"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["balrisk", "nope"]).0, EXIT_USAGE);
        assert_eq!(
            run_capture(&["balrisk", "bounds", "--n", "1e6", "--p", "0.01", "--format", "xml"]).0,
            EXIT_USAGE
        );
    }

    #[test]
    fn bounds_outputs_csv() {
        let (code, out, _) = run_capture(&["balrisk", "bounds", "--n", "1000000", "--p", "0.01", "--K", "2"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("# n = 1000000\n"));
        assert!(out.contains("\nbound,value,valid,"));
        assert!(out.contains("\nslow_rate,"));
        assert!(out.contains("\nfast_rate,"));
    }

    #[test]
    fn aligned_text_table() {
        let (code, out, _) = run_capture(&["balrisk", "bounds", "--n", "1e6", "--p", "0.01", "--format", "text"]);
        assert_eq!(code, 0);
        assert!(out.lines().next().unwrap().starts_with("bound"));
        assert_eq!(out.lines().count(), 8);
    }

    #[test]
    fn numeric_domain_error_exits_three() {
        let (code, _, err) = run_capture(&["balrisk", "gen", "--n", "10", "--p", "1.5", "--out", "/dev/null"]);
        assert_eq!(code, EXIT_NUMERIC, "{err}");
    }
}
