use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;
use sha2::{Digest, Sha256};

use probdep::conditional::{assess_cpafd, assess_cpfd};
use probdep::dataio::{self, GeneratorSpec, LoadOptions};
use probdep::miner::{self, MinerConfig, MiningMethod};
use probdep::pafd_estimators::{
    assess_pafd_deterministic, assess_pafd_mc, assess_pafd_unioned, McConfig,
};
use probdep::pfd_exact::assess_pfd;
use probdep::worlds_oracle::{oracle_confidence, DEFAULT_WORLD_CAP};
use probdep::{
    AttrSet, ConfidenceReport, DependencyKind, DependencySpec, Error, PatternTableau, ProbRelation,
    RelationKind,
};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_CAP: u8 = 4;

#[derive(Parser)]
#[command(name = "probdep", version, about = "Assess and mine dependencies in probabilistic relations")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print wall-clock time per phase to stderr.
    #[arg(long, global = true)]
    time: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Confidence of one dependency.
    Assess(AssessArgs),
    /// Discover approximate dependencies.
    Mine(MineArgs),
    /// Write a synthetic relation with a planted dependency.
    Gen(GenArgs),
    /// Convert CSV or tuple-independent input to tuple-disjoint records.
    Convert(ConvertArgs),
    /// Exact confidence by enumerating all possible worlds.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Auto,
    Jsonl,
    Csv,
}

#[derive(Args)]
struct DataArgs {
    /// Relation file (line-delimited records or CSV).
    #[arg(long)]
    data: PathBuf,

    #[arg(long, value_enum, default_value = "auto")]
    format: Format,

    /// CSV column holding tuple keys.
    #[arg(long)]
    key: Option<String>,

    /// Repair option probabilities that do not sum to one.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct DepArgs {
    /// Dependency such as `A,B->C` or `A,B~>C`.
    #[arg(long)]
    dep: String,

    /// Dependency kind; inferred from the arrow and --tableau when absent.
    #[arg(long, value_parser = parse_kind)]
    kind: Option<DependencyKind>,

    /// Pattern tableau file for conditional kinds.
    #[arg(long)]
    tableau: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Target half-width of the 95% interval.
    #[arg(long, default_value_t = 0.005)]
    epsilon: f64,

    #[arg(long, default_value_t = 100)]
    min_samples: u64,

    #[arg(long, default_value_t = 100_000)]
    max_samples: u64,
}

impl McArgs {
    fn config(&self) -> McConfig {
        McConfig {
            seed: self.seed,
            epsilon: self.epsilon,
            min_samples: self.min_samples,
            max_samples: self.max_samples,
            ..McConfig::default()
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AssessMethod {
    Exact,
    Mc,
    Union,
    Det,
    Oracle,
}

#[derive(Args)]
struct AssessArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    dep: DepArgs,
    #[arg(long, value_enum)]
    method: Option<AssessMethod>,
    #[command(flatten)]
    mc: McArgs,
    /// World limit for --method oracle.
    #[arg(long, default_value_t = DEFAULT_WORLD_CAP)]
    cap: u128,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MineMethod {
    Mc,
    Union,
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0.8)]
    conf_threshold: f64,
    #[arg(long, default_value_t = 0.6)]
    specificity_threshold: f64,
    #[arg(long, default_value_t = 0.99)]
    high_conf_threshold: f64,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long, value_enum, default_value = "mc")]
    method: MineMethod,
    /// Restrict mining to these attributes, e.g. `A,B,C`.
    #[arg(long)]
    target: Option<String>,
    /// Allow key-like single attributes as determiners.
    #[arg(long)]
    include_key_like: bool,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    tuples: usize,
    #[arg(long, default_value_t = 4)]
    domain: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    options: usize,
    #[arg(long, default_value = "A")]
    x: String,
    #[arg(long, default_value = "B")]
    y: String,
    /// Independent extra attributes, e.g. `C,D`.
    #[arg(long)]
    extra: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    dep: DepArgs,
    #[arg(long, default_value_t = DEFAULT_WORLD_CAP)]
    cap: u128,
}

fn parse_kind(s: &str) -> Result<DependencyKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TooManyWorlds { .. } => EXIT_CAP,
            Error::InvalidDependency(_) | Error::InvalidConfig(_) | Error::UnknownAttribute(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self {
            code: EXIT_DATA,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

struct Timer {
    enabled: bool,
    start: Instant,
}

impl Timer {
    fn new(enabled: bool) -> Self {
        Self {
            enabled,
            start: Instant::now(),
        }
    }

    fn phase(&mut self, name: &str) {
        if self.enabled {
            eprintln!("time {name}: {:.3} ms", self.start.elapsed().as_secs_f64() * 1e3);
        }
        self.start = Instant::now();
    }
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Loaded {
    relation: ProbRelation,
    digest: String,
}

fn load_data(args: &DataArgs) -> CliResult<Loaded> {
    let bytes = fs::read(&args.data)
        .map_err(|e| Failure::from(io::Error::new(e.kind(), format!("{}: {e}", args.data.display()))))?;
    let csv = match args.format {
        Format::Csv => true,
        Format::Jsonl => false,
        Format::Auto => args
            .data
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv")),
    };
    if !csv && args.key.is_some() {
        return Err(Failure::usage("--key only applies to CSV input"));
    }
    let relation = if csv {
        dataio::read_csv(&bytes[..], args.key.as_deref())?
    } else {
        dataio::read_relation(&bytes[..], LoadOptions { normalize: args.normalize })?
    };
    info!("loaded {} tuples ({:?})", relation.len(), relation.kind());
    Ok(Loaded {
        relation,
        digest: digest(&bytes),
    })
}

fn load_tableau(path: &Path) -> CliResult<(PatternTableau, String)> {
    let bytes = fs::read(path)
        .map_err(|e| Failure::from(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok((dataio::read_tableau(&bytes[..])?, digest(&bytes)))
}

/// Splits `A,B->C` / `A,B~>C`; the second value tells whether `~>` was used.
fn parse_arrow(dep: &str) -> CliResult<(AttrSet, AttrSet, bool)> {
    let (lhs, rhs, approx) = if let Some((l, r)) = dep.split_once("~>") {
        (l, r, true)
    } else if let Some((l, r)) = dep.split_once("->") {
        (l, r, false)
    } else {
        return Err(Failure::usage(format!("dependency `{dep}` needs `->` or `~>`")));
    };
    Ok((AttrSet::parse(lhs), AttrSet::parse(rhs), approx))
}

fn build_dependency(args: &DepArgs) -> CliResult<(DependencySpec, Option<String>)> {
    let (x, y, approx) = parse_arrow(&args.dep)?;
    let tableau = args.tableau.as_deref().map(load_tableau).transpose()?;
    let kind = match args.kind {
        Some(k) => {
            if k.is_approximate() != approx {
                warn!("--kind {k} overrides the arrow in `{}`", args.dep);
            }
            k
        }
        None => match (approx, tableau.is_some()) {
            (false, false) => DependencyKind::Pfd,
            (true, false) => DependencyKind::Pafd,
            (false, true) => DependencyKind::Cpfd,
            (true, true) => DependencyKind::Cpafd,
        },
    };
    if kind.is_conditional() && tableau.is_none() {
        return Err(Failure::usage(format!("--kind {kind} requires --tableau")));
    }
    if !kind.is_conditional() && tableau.is_some() {
        return Err(Failure::usage(format!("--tableau is only valid for conditional kinds, not {kind}")));
    }
    let (tableau, tableau_digest) = match tableau {
        Some((t, d)) => (Some(t), Some(d)),
        None => (None, None),
    };
    let dep = DependencySpec::new(kind, x, y, tableau).map_err(|e| match e {
        Error::InvalidTableau(m) => Failure::usage(format!("invalid tableau: {m}")),
        other => other.into(),
    })?;
    Ok((dep, tableau_digest))
}

#[derive(Serialize)]
struct AssessRecord<'a> {
    command: &'a str,
    dependency: String,
    kind: &'a str,
    #[serde(flatten)]
    report: ConfidenceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    input_digest: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    tableau_digest: Option<&'a str>,
}

#[derive(Serialize)]
struct MineRecord<'a> {
    dependency: String,
    x: Vec<&'a str>,
    head: &'a str,
    #[serde(flatten)]
    report: ConfidenceReport,
    specificity: f64,
    input_digest: &'a str,
}

fn emit<T: Serialize>(out: &mut impl Write, record: &T) -> CliResult<()> {
    serde_json::to_writer(&mut *out, record).map_err(io::Error::from)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn for_exact(relation: ProbRelation) -> ProbRelation {
    if relation.kind() == RelationKind::Ti {
        info!("converting tuple-independent input for the exact search");
        dataio::ti_to_tdi(&relation)
    } else {
        relation
    }
}

fn run_assess(args: &AssessArgs, timer: &mut Timer) -> CliResult<()> {
    let (dep, tableau_digest) = build_dependency(&args.dep)?;
    let method = args.method.unwrap_or(if dep.kind.is_approximate() {
        AssessMethod::Mc
    } else {
        AssessMethod::Exact
    });
    use AssessMethod as M;
    use DependencyKind as K;
    let allowed = matches!(
        (dep.kind, method),
        (_, M::Oracle) | (K::Pfd | K::Cpfd, M::Exact) | (K::Pafd | K::Cpafd, M::Mc) | (K::Pafd, M::Union | M::Det)
    );
    if !allowed {
        return Err(Failure::usage(format!(
            "--method {} does not apply to {}",
            method.to_possible_value().unwrap().get_name(),
            dep.kind
        )));
    }
    let cfg = args.mc.config();
    cfg.validate()?;
    let loaded = load_data(&args.data)?;
    dep.check_schema(loaded.relation.schema())?;
    timer.phase("load");
    let relation = loaded.relation;
    let report = match (dep.kind, method) {
        (_, M::Oracle) => oracle_confidence(&relation, &dep, args.cap)?,
        (K::Pfd, _) => assess_pfd(&for_exact(relation), &dep.x, &dep.y)?,
        (K::Cpfd, _) => assess_cpfd(&for_exact(relation), &dep.x, &dep.y, dep.tableau.as_ref().unwrap())?,
        (K::Pafd, M::Mc) => assess_pafd_mc(&relation, &dep.x, &dep.y, &cfg)?,
        (K::Pafd, M::Union) => assess_pafd_unioned(&relation, &dep.x, &dep.y)?,
        (K::Pafd, _) => assess_pafd_deterministic(&relation, &dep.x, &dep.y)?,
        (K::Cpafd, _) => assess_cpafd(&relation, &dep.x, &dep.y, dep.tableau.as_ref().unwrap(), &cfg)?,
    };
    timer.phase("assess");
    emit(
        &mut io::stdout().lock(),
        &AssessRecord {
            command: "assess",
            dependency: dep.to_string(),
            kind: dep.kind.as_str(),
            seed: report.samples_used().map(|_| cfg.seed),
            report,
            input_digest: &loaded.digest,
            tableau_digest: tableau_digest.as_deref(),
        },
    )
}

fn run_oracle(args: &OracleArgs, timer: &mut Timer) -> CliResult<()> {
    let (dep, tableau_digest) = build_dependency(&args.dep)?;
    let loaded = load_data(&args.data)?;
    timer.phase("load");
    let report = oracle_confidence(&loaded.relation, &dep, args.cap)?;
    timer.phase("enumerate");
    emit(
        &mut io::stdout().lock(),
        &AssessRecord {
            command: "oracle",
            dependency: dep.to_string(),
            kind: dep.kind.as_str(),
            report,
            seed: None,
            input_digest: &loaded.digest,
            tableau_digest: tableau_digest.as_deref(),
        },
    )
}

fn run_mine(args: &MineArgs, timer: &mut Timer) -> CliResult<()> {
    let cfg = MinerConfig {
        confidence_threshold: args.conf_threshold,
        specificity_threshold: args.specificity_threshold,
        high_confidence_threshold: args.high_conf_threshold,
        mc: args.mc.config(),
        method: match args.method {
            MineMethod::Mc => MiningMethod::MonteCarlo,
            MineMethod::Union => MiningMethod::Unioned,
        },
        target_attrs: args.target.as_deref().map(AttrSet::parse),
        top_k: args.top_k,
        include_key_like: args.include_key_like,
    };
    cfg.validate()?;
    let loaded = load_data(&args.data)?;
    timer.phase("load");
    let outcome = miner::mine_with_stats(&loaded.relation, &cfg)?;
    timer.phase("mine");
    info!("mining stats: {:?}", outcome.stats);
    let mut out = io::BufWriter::new(io::stdout().lock());
    for d in &outcome.dependencies {
        emit(
            &mut out,
            &MineRecord {
                dependency: d.dependency().to_string(),
                x: d.x.iter().collect(),
                head: &d.head,
                report: d.report,
                specificity: d.specificity,
                input_digest: &loaded.digest,
            },
        )?;
    }
    out.flush()?;
    Ok(())
}

fn write_output(relation: &ProbRelation, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => dataio::save(relation, p)?,
        None => dataio::write_relation(relation, io::stdout().lock())?,
    }
    Ok(())
}

fn run_gen(args: &GenArgs, timer: &mut Timer) -> CliResult<()> {
    let spec = GeneratorSpec {
        n_tuples: args.tuples,
        options_per_tuple: args.options,
        domain_cardinality: args.domain,
        noise: args.noise,
        seed: args.seed,
        x_attr: args.x.clone(),
        y_attr: args.y.clone(),
        extra_attrs: args
            .extra
            .as_deref()
            .map(|e| AttrSet::parse(e).iter().map(str::to_string).collect())
            .unwrap_or_default(),
    };
    let relation = dataio::generate(&spec)?;
    timer.phase("generate");
    write_output(&relation, args.out.as_deref())
}

fn run_convert(args: &ConvertArgs, timer: &mut Timer) -> CliResult<()> {
    let loaded = load_data(&args.data)?;
    let converted = dataio::ti_to_tdi(&loaded.relation);
    timer.phase("convert");
    write_output(&converted, args.out.as_deref())
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let mut timer = Timer::new(cli.time);
    match &cli.command {
        Command::Assess(a) => run_assess(a, &mut timer),
        Command::Mine(a) => run_mine(a, &mut timer),
        Command::Gen(a) => run_gen(a, &mut timer),
        Command::Convert(a) => run_convert(a, &mut timer),
        Command::Oracle(a) => run_oracle(a, &mut timer),
    }
}

#[cfg(feature = "parallel")]
fn run(cli: &Cli) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::usage(format!("cannot start {:?} threads: {e}", cli.threads)))?;
    pool.install(|| dispatch(cli))
}

#[cfg(not(feature = "parallel"))]
fn run(cli: &Cli) -> CliResult<()> {
    if cli.threads.is_some_and(|n| n > 1) {
        warn!("built without the parallel feature; --threads is ignored");
    }
    dispatch(cli)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
