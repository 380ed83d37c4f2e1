//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data errors (bad
//! inputs, I/O failures, failed computations).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use infoband::decoding::decode;
use infoband::information::{exact_entropy, information_content, mc_entropy};
use infoband::lm::{sequence_log_prob, train_ngram, IidModel, LanguageModel, NgramModel, PrefixedModel, Sequence};
use infoband::pipeline::{
    emit_report, join_ratings, read_lines, read_ratings, run_experiment, ExperimentConfig,
    Hyperparameters, Report, ReportFormat, SystemSpec,
};
use infoband::stats::{welch_t_test, Alternative};
use infoband::typicality::{typical_set, DEFAULT_CAP};

#[derive(Parser)]
#[command(name = "infoband", version, about = "Information content, entropy bands, and decoding analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a character n-gram model and save it as JSON.
    Train(TrainArgs),
    /// Decode one string from a model.
    Decode(DecodeArgs),
    /// Estimate (or compute exactly) the entropy of a model.
    Entropy(EntropyArgs),
    /// Information profile of one string.
    Score(ScoreArgs),
    /// Exact typical set of a model.
    Typical(TypicalArgs),
    /// Welch or paired t-test on two value lists.
    Test(TestArgs),
    /// Run a full experiment from a config file.
    Analyze(AnalyzeArgs),
    /// Join a ratings CSV into a report and run the rating analyses.
    JoinRatings(JoinArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = infoband::pipeline::DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = infoband::lm::DEFAULT_SMOOTHING)]
    alpha: f64,
    #[arg(long, default_value_t = infoband::pipeline::DEFAULT_MAX_LENGTH)]
    max_length: usize,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Model JSON written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Condition on this prefix.
    #[arg(long, default_value = "")]
    prompt: String,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// greedy, beam, beam_<k>, diverse_beam, ancestral, top_k, nucleus, mbr.
    #[arg(long, default_value = "greedy")]
    strategy: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    beam_width: Option<usize>,
    #[arg(long)]
    groups: Option<usize>,
    #[arg(long)]
    diversity_penalty: Option<f64>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    top_p: Option<f64>,
    #[arg(long)]
    mbr_samples: Option<usize>,
    #[arg(long)]
    mbr_max_n: Option<usize>,
}

#[derive(Args)]
struct EntropyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = infoband::information::DEFAULT_ENTROPY_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also enumerate the support for the exact value.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Continuation to score.
    #[arg(long)]
    text: String,
}

#[derive(Args)]
struct TypicalArgs {
    /// Model JSON written by `train`.
    #[arg(long, conflicts_with = "coin")]
    model: Option<PathBuf>,
    #[arg(long, default_value = "", requires = "model")]
    prompt: String,
    /// Heads probability of a fixed-length coin model instead of a file.
    #[arg(long, requires = "length")]
    coin: Option<f64>,
    #[arg(long)]
    length: Option<usize>,
    /// Half-width of the band on total information (nats).
    #[arg(long, conflicts_with = "epsilon_per_symbol")]
    epsilon: Option<f64>,
    /// Half-width per symbol; multiplied by the coin length.
    #[arg(long, requires = "coin")]
    epsilon_per_symbol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// List every member.
    #[arg(long)]
    members: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlternativeArg {
    TwoSided,
    Greater,
    Less,
}

#[derive(Args)]
struct TestArgs {
    /// Comma-separated values, or @path to a file of values.
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[arg(long)]
    paired: bool,
    #[arg(long, value_enum, default_value = "greater")]
    alternative: AlternativeArg,
    #[arg(long, default_value_t = infoband::stats::DEFAULT_ALPHA)]
    alpha: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON report path (overrides the config); stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the CSV bundle (overrides the config).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct JoinArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    ratings: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(infoband::Error),
}

impl From<infoband::Error> for Failure {
    fn from(e: infoband::Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Train(a) => train(a),
        Command::Decode(a) => decode_cmd(a),
        Command::Entropy(a) => entropy(a),
        Command::Score(a) => score(a),
        Command::Typical(a) => typical(a),
        Command::Test(a) => test(a),
        Command::Analyze(a) => analyze(a),
        Command::JoinRatings(a) => join(a),
    }
}

fn write_out(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Data(infoband::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> CliResult {
    let mut s = serde_json::to_string_pretty(value).map_err(infoband::Error::from)?;
    s.push('\n');
    write_out(None, &s)
}

fn conditional(args: &ModelArgs) -> CliResult<PrefixedModel<NgramModel>> {
    let model = NgramModel::load(&args.model)?;
    Ok(PrefixedModel::from_text(model, &args.prompt)?)
}

fn train(a: TrainArgs) -> CliResult {
    let corpus = read_lines(&a.corpus)?;
    let model = train_ngram(&corpus, a.order, a.alpha, a.max_length)?;
    let mut json = model.to_json()?;
    json.push('\n');
    write_out(a.out.as_deref(), &json)
}

#[derive(Serialize)]
struct Decoded {
    system: String,
    text: String,
    log_prob: f64,
    information: f64,
}

fn decode_cmd(a: DecodeArgs) -> CliResult {
    let model = conditional(&a.model)?;
    let defaults = Hyperparameters::default();
    let hp = Hyperparameters {
        beam_width: a.beam_width.unwrap_or(defaults.beam_width),
        diverse_width: a.beam_width.unwrap_or(defaults.diverse_width),
        diverse_groups: a.groups.unwrap_or(defaults.diverse_groups),
        diversity_penalty: a.diversity_penalty.unwrap_or(defaults.diversity_penalty),
        top_k: a.top_k.unwrap_or(defaults.top_k),
        top_p: a.top_p.unwrap_or(defaults.top_p),
        mbr_samples: a.mbr_samples.unwrap_or(defaults.mbr_samples),
        mbr_max_n: a.mbr_max_n.unwrap_or(defaults.mbr_max_n),
    };
    let spec = SystemSpec::parse(&a.strategy, &hp).map_err(|e| Failure::Usage(e.to_string()))?;
    let c = decode(&model, &spec.config.with_seed(a.seed), &[])?;
    print_json(&Decoded {
        system: spec.name,
        text: c.sequence.text(model.vocab()),
        log_prob: c.log_prob,
        information: 0.0 - c.log_prob,
    })
}

#[derive(Serialize)]
struct EntropyOut {
    estimate: infoband::information::EntropyEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<infoband::information::ExactEntropy>,
}

fn entropy(a: EntropyArgs) -> CliResult {
    let model = conditional(&a.model)?;
    let estimate = mc_entropy(&model, a.samples, a.seed)?;
    let exact = if a.exact { Some(exact_entropy(&model, a.cap)?) } else { None };
    print_json(&EntropyOut { estimate, exact })
}

#[derive(Serialize)]
struct ScoreOut {
    text: String,
    log_prob: f64,
    profile: infoband::information::InformationProfile,
}

fn score(a: ScoreArgs) -> CliResult {
    let model = conditional(&a.model)?;
    let y = Sequence::parse(model.vocab(), &a.text)?;
    print_json(&ScoreOut {
        text: a.text,
        log_prob: sequence_log_prob(&model, &y)?,
        profile: information_content(&model, &y)?,
    })
}

fn typical(a: TypicalArgs) -> CliResult {
    let report = match (&a.model, a.coin) {
        (Some(path), None) => {
            let epsilon = a
                .epsilon
                .ok_or_else(|| Failure::Usage("--epsilon is required with --model".into()))?;
            let model = PrefixedModel::from_text(NgramModel::load(path)?, &a.prompt)?;
            typical_set(&model, epsilon, a.cap, a.members)?
        }
        (None, Some(heads)) => {
            let length = a.length.expect("clap enforces --length");
            let epsilon = match (a.epsilon, a.epsilon_per_symbol) {
                (Some(e), None) => e,
                (None, Some(e)) => e * length as f64,
                _ => return Err(Failure::Usage("give --epsilon or --epsilon-per-symbol".into())),
            };
            typical_set(&IidModel::coin(heads, length)?, epsilon, a.cap, a.members)?
        }
        _ => return Err(Failure::Usage("give exactly one of --model or --coin".into())),
    };
    print_json(&report)
}

fn parse_values(spec: &str) -> CliResult<Vec<f64>> {
    let text = match spec.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| Failure::Data(infoband::Error::Io {
            path: path.into(),
            source: e,
        }))?,
        None => spec.to_string(),
    };
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Failure::Usage(format!("not a number: {s:?}"))))
        .collect()
}

#[derive(Serialize)]
struct TestOut {
    #[serde(flatten)]
    test: infoband::stats::TTest,
    alpha: f64,
    reject: bool,
}

fn test(a: TestArgs) -> CliResult {
    let alternative = match a.alternative {
        AlternativeArg::TwoSided => Alternative::TwoSided,
        AlternativeArg::Greater => Alternative::Greater,
        AlternativeArg::Less => Alternative::Less,
    };
    let t = welch_t_test(&parse_values(&a.a)?, &parse_values(&a.b)?, a.paired, alternative)?;
    print_json(&TestOut {
        reject: t.rejects(a.alpha),
        test: t,
        alpha: a.alpha,
    })
}

fn emit(report: &Report, out: Option<&Path>, csv: Option<&Path>) -> CliResult {
    match out {
        Some(path) => emit_report(report, ReportFormat::Json, path)?,
        None if csv.is_none() => write_out(None, &report.to_json()?)?,
        None => {}
    }
    if let Some(dir) = csv {
        emit_report(report, ReportFormat::CsvBundle, dir)?;
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> CliResult {
    let mut config = ExperimentConfig::from_file(&a.config)?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    let report = run_experiment(&config)?;
    let out = a.out.or(config.report);
    let csv = a.csv.or(config.csv_dir);
    emit(&report, out.as_deref(), csv.as_deref())
}

fn join(a: JoinArgs) -> CliResult {
    let report = Report::load(&a.report)?;
    let ratings = read_ratings(&a.ratings)?;
    let joined = join_ratings(&report, &ratings)?;
    emit(&joined, a.out.as_deref(), a.csv.as_deref())
}
