mod config;

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use premsel::harness::{
    prover_input, read_frat_tasks, run_corpus, run_frat, write_frat_tsv, write_runs_tsv,
    write_summary_tsv, CorpusOptions, CorpusReport, OutcomePatterns, ProverConfig,
};
use premsel::{
    load_kb, parse_goal, Context, EmbeddingStore, LexicalTable, NormalizeConfig, Selector,
    Strategy, SymbolMapping, SymbolStats,
};

use config::{pick, pick_list, FileConfig};

#[derive(Parser)]
#[command(name = "premsel", version, about = "Premise selection for first-order knowledge bases")]
struct Cli {
    /// TOML file supplying defaults for any long flag (kebab-case keys;
    /// list flags take arrays). Flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Log more (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select axioms for one goal file.
    Select(SelectArgs),
    /// Print `symbol<TAB>occ<TAB>idf` for every KB symbol, most frequent first.
    Stats(StatsArgs),
    /// Symbol-to-token mappings.
    #[command(subcommand)]
    Map(MapCommand),
    /// Batch evaluation.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Subcommand)]
enum MapCommand {
    /// Write the mapping `kb_symbol<TAB>token<TAB>source` for a KB and embedding.
    Build(MapBuildArgs),
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Select for every problem of a directory and optionally run a prover.
    Prove(ProveArgs),
    /// Run the target-word association study.
    Frat(FratArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyName {
    Sine,
    Simsine,
    Vector,
    VbUnion,
}

impl StrategyName {
    fn parse(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, true)
            .map_err(|_| anyhow!("unknown strategy `{s}` (expected sine, simsine, vector or vb-union)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SelectFormat {
    Tptp,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Tsv,
    Json,
}

fn parse_format<T: ValueEnum>(s: &str) -> Result<T> {
    T::from_str(s, true).map_err(|_| anyhow!("unknown format `{s}`"))
}

#[derive(Args)]
struct KbArgs {
    /// Knowledge base in TPTP FOF/CNF syntax.
    #[arg(long, value_name = "FILE")]
    kb: Option<PathBuf>,
}

#[derive(Args)]
struct MappingArgs {
    /// Embedding in word2vec text format (`token v1 … vn` per line, optional
    /// `count dim` header, `.gz` accepted).
    #[arg(long, value_name = "FILE")]
    embedding: Option<PathBuf>,
    /// Precomputed mapping TSV; replaces on-the-fly construction.
    #[arg(long, value_name = "FILE", conflicts_with = "tables")]
    mapping: Option<PathBuf>,
    /// Lexical table TSV `kb_symbol<TAB>token<TAB>source`, source one of
    /// synonym, hyponym, instance. Repeatable.
    #[arg(long = "table", value_name = "FILE")]
    tables: Vec<PathBuf>,
    /// Symbol prefix stripped by normalization. Repeatable; replaces the
    /// defaults c__ p__ f__ r__ s__.
    #[arg(long = "prefix", value_name = "STR")]
    prefixes: Vec<String>,
    /// Symbol suffix stripped by normalization. Repeatable; replaces the
    /// defaults _fn _function.
    #[arg(long = "suffix", value_name = "STR")]
    suffixes: Vec<String>,
}

#[derive(Args)]
struct StrategyArgs {
    /// Selection strategy.
    #[arg(long, value_enum)]
    strategy: Option<StrategyName>,
    /// Trigger depth (sine, simsine, vb-union).
    #[arg(long)]
    depth: Option<usize>,
    /// Trigger tolerance, at least 1 [default: 1].
    #[arg(long)]
    tolerance: Option<f64>,
    /// Similar words per symbol (simsine) or selected axioms (vector, vb-union).
    #[arg(long)]
    k: Option<usize>,
    /// Directory caching axiom vectors between runs.
    #[arg(long, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    #[command(flatten)]
    mapping: MappingArgs,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    kb: KbArgs,
    /// Problem file with exactly one conjecture and optional local premises.
    #[arg(long, value_name = "FILE")]
    goal: Option<PathBuf>,
    #[command(flatten)]
    strategy: StrategyArgs,
    /// Output file [default: stdout].
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
    /// `tptp`: selected axioms then the goal, ready for a prover. `json`:
    /// goal, strategy, parameters, selected ids and scores [default: tptp].
    #[arg(long, value_enum)]
    format: Option<SelectFormat>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    kb: KbArgs,
    /// Output file [default: stdout].
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MapBuildArgs {
    #[command(flatten)]
    kb: KbArgs,
    #[command(flatten)]
    mapping: MappingArgs,
    /// Output file [default: stdout].
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProverArgs {
    /// Prover command template; `{input}` and `{timeout}` are substituted.
    /// Without it no prover runs and every outcome is `skipped`.
    #[arg(long, value_name = "CMD")]
    prover: Option<String>,
    /// CPU-time limit per prover run in seconds [default: 15].
    #[arg(long, value_name = "SECS")]
    timeout: Option<u64>,
    /// Regex marking a proof [default: SZS Theorem/Unsatisfiable].
    #[arg(long, value_name = "REGEX")]
    proof_pattern: Option<String>,
    /// Regex marking a model [default: SZS CounterSatisfiable/Satisfiable].
    #[arg(long, value_name = "REGEX")]
    model_pattern: Option<String>,
    /// Regex marking a timeout [default: SZS Timeout/ResourceOut].
    #[arg(long, value_name = "REGEX")]
    timeout_pattern: Option<String>,
}

#[derive(Args)]
struct ProveArgs {
    #[command(flatten)]
    kb: KbArgs,
    /// Directory of problem files.
    #[arg(long, value_name = "DIR")]
    problems: Option<PathBuf>,
    #[command(flatten)]
    strategy: StrategyArgs,
    #[command(flatten)]
    prover: ProverArgs,
    /// Directory for prover input files [default: prover-inputs].
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Concurrent problem runs [default: available cores].
    #[arg(long)]
    jobs: Option<usize>,
    /// Per-problem TSV written here in addition to the summary.
    #[arg(long, value_name = "FILE")]
    runs: Option<PathBuf>,
    /// Summary output file [default: stdout].
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
    /// `tsv`: outcome counts per strategy. `json`: runs and counts [default: tsv].
    #[arg(long, value_enum)]
    format: Option<ReportFormat>,
}

#[derive(Args)]
struct FratArgs {
    #[command(flatten)]
    kb: KbArgs,
    /// Task CSV `w1,w2,w3,target`, one task per line.
    #[arg(long, value_name = "FILE")]
    tasks: Option<PathBuf>,
    #[command(flatten)]
    strategy: StrategyArgs,
    /// Values swept: k for vector and vb-union, depth for sine and simsine.
    #[arg(long, value_delimiter = ',', value_name = "N,...")]
    params: Vec<usize>,
    /// Output file [default: stdout].
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Report format [default: tsv].
    #[arg(long, value_enum)]
    format: Option<ReportFormat>,
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!("missing --{flag} (flag or config key `{flag}`)"))
}

fn load_knowledge_base(args: &KbArgs, cfg: &FileConfig) -> Result<premsel::KnowledgeBase> {
    let path = require(pick(&args.kb, &cfg.kb), "kb")?;
    let kb = load_kb(&path).with_context(|| format!("loading {}", path.display()))?;
    log::info!("{}: {} axioms, {} symbols", path.display(), kb.len(), kb.symbol_count());
    Ok(kb)
}

fn normalizer(args: &MappingArgs, cfg: &FileConfig) -> NormalizeConfig {
    let mut n = NormalizeConfig::default();
    if let Some(p) = pick_list(&args.prefixes, &cfg.prefixes) {
        n.prefixes = p;
    }
    if let Some(s) = pick_list(&args.suffixes, &cfg.suffixes) {
        n.suffixes = s;
    }
    n
}

fn load_embedding(args: &MappingArgs, cfg: &FileConfig) -> Result<EmbeddingStore> {
    let path = require(pick(&args.embedding, &cfg.embedding), "embedding")?;
    let store = EmbeddingStore::load_path(&path).with_context(|| format!("loading {}", path.display()))?;
    log::info!("{}: {} tokens, dimension {}", path.display(), store.len(), store.dim());
    Ok(store)
}

fn load_mapping(
    args: &MappingArgs,
    cfg: &FileConfig,
    kb: &premsel::KnowledgeBase,
    store: &EmbeddingStore,
) -> Result<SymbolMapping> {
    let norm = normalizer(args, cfg);
    let mapping = match pick(&args.mapping, &cfg.mapping) {
        Some(path) => {
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            SymbolMapping::read_tsv(BufReader::new(file), kb, store, &norm)
                .with_context(|| format!("reading {}", path.display()))?
        }
        None => {
            let mut tables = Vec::new();
            for path in pick_list(&args.tables, &cfg.tables).unwrap_or_default() {
                let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
                tables.extend(
                    LexicalTable::read_tsv(BufReader::new(file))
                        .with_context(|| format!("reading {}", path.display()))?,
                );
            }
            SymbolMapping::build(kb, store, &tables, &norm)
        }
    };
    log::info!("mapping covers {:.2}% of KB symbols", 100.0 * mapping.coverage());
    Ok(mapping)
}

/// Builds the strategy from flags and config. `sweep` names a parameter
/// supplied later by a sweep, so it need not be given here.
fn resolve_strategy(args: &StrategyArgs, cfg: &FileConfig, sweep: Option<usize>) -> Result<Strategy> {
    let name = match (args.strategy, &cfg.strategy) {
        (Some(n), _) => n,
        (None, Some(s)) => StrategyName::parse(s)?,
        (None, None) => bail!("missing --strategy (sine, simsine, vector or vb-union)"),
    };
    let tolerance = pick(&args.tolerance, &cfg.tolerance).unwrap_or(1.0);
    let mut depth = pick(&args.depth, &cfg.depth);
    let mut k = pick(&args.k, &cfg.k);
    if let Some(p) = sweep {
        match name {
            StrategyName::Sine | StrategyName::Simsine => depth = depth.or(Some(p)),
            StrategyName::Vector | StrategyName::VbUnion => k = k.or(Some(p)),
        }
    }
    let need = |v: Option<usize>, flag: &str| {
        let label = name.to_possible_value().map(|p| p.get_name().to_owned()).unwrap_or_default();
        v.ok_or_else(|| anyhow!("strategy {label} requires --{flag}").context("invalid configuration"))
    };
    Ok(match name {
        StrategyName::Sine => Strategy::Sine { depth: need(depth, "depth")?, tolerance },
        StrategyName::Simsine => Strategy::Simsine { depth: need(depth, "depth")?, tolerance, k: need(k, "k")? },
        StrategyName::Vector => Strategy::Vector { k: need(k, "k")? },
        StrategyName::VbUnion => Strategy::VbUnion { depth: need(depth, "depth")?, tolerance, k: need(k, "k")? },
    })
}

fn build_context(kb_args: &KbArgs, args: &StrategyArgs, cfg: &FileConfig, strategy: Strategy) -> Result<Context> {
    let kb = load_knowledge_base(kb_args, cfg)?;
    let mut ctx = Context::new(kb)?;
    if strategy.needs_embedding() {
        let store = load_embedding(&args.mapping, cfg)?;
        let mapping = load_mapping(&args.mapping, cfg, &ctx.kb, &store)?;
        ctx = ctx.with_embedding(store, Some(mapping));
    }
    Ok(ctx)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SelectionRecord<'a> {
    goal: &'a str,
    strategy: &'static str,
    params: serde_json::Value,
    selected: Vec<&'a str>,
    scores: Vec<Option<f64>>,
    steps: Vec<Option<usize>>,
}

fn strategy_params(strategy: &Strategy) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(strategy)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("name");
    }
    Ok(v)
}

fn cmd_select(args: &SelectArgs, cfg: &FileConfig) -> Result<()> {
    let strategy = resolve_strategy(&args.strategy, cfg, None)?;
    let goal_path = require(pick(&args.goal, &cfg.goal), "goal")?;
    let format = match (args.format, &cfg.format) {
        (Some(f), _) => f,
        (None, Some(s)) => parse_format(s)?,
        (None, None) => SelectFormat::Tptp,
    };
    let goal_src = fs::read_to_string(&goal_path).with_context(|| format!("reading {}", goal_path.display()))?;
    let goal = parse_goal(&goal_src).with_context(|| format!("parsing {}", goal_path.display()))?;

    let ctx = build_context(&args.kb, &args.strategy, cfg, strategy)?;
    let cache_dir = pick(&args.strategy.cache_dir, &cfg.cache_dir);
    let selector = Selector::prepare(&ctx, strategy, cache_dir.as_deref())?;
    let selection = selector.select(&goal)?;
    log::info!("selected {} of {} axioms", selection.len(), ctx.kb.len());

    let bytes = match format {
        SelectFormat::Tptp => prover_input(&selector, &selection, &goal).into_bytes(),
        SelectFormat::Json => {
            let record = SelectionRecord {
                goal: &goal.query.name,
                strategy: strategy.name(),
                params: strategy_params(&strategy)?,
                selected: selection.ids(),
                scores: selection.selected.iter().map(|s| s.score).collect(),
                steps: selection.selected.iter().map(|s| s.step).collect(),
            };
            let mut s = serde_json::to_string_pretty(&record)?;
            s.push('\n');
            s.into_bytes()
        }
    };
    write_output(pick(&args.output, &cfg.output).as_deref(), &bytes)
}

fn cmd_stats(args: &StatsArgs, cfg: &FileConfig) -> Result<()> {
    let kb = load_knowledge_base(&args.kb, cfg)?;
    let stats = SymbolStats::compute(&kb)?;
    let mut buf = Vec::new();
    stats.write_tsv(&kb, &mut buf)?;
    write_output(pick(&args.output, &cfg.output).as_deref(), &buf)
}

fn cmd_map_build(args: &MapBuildArgs, cfg: &FileConfig) -> Result<()> {
    let kb = load_knowledge_base(&args.kb, cfg)?;
    let store = load_embedding(&args.mapping, cfg)?;
    let mapping = load_mapping(&args.mapping, cfg, &kb, &store)?;
    let mut buf = Vec::new();
    mapping.write_tsv(&mut buf)?;
    write_output(pick(&args.output, &cfg.output).as_deref(), &buf)
}

fn prover_config(args: &ProverArgs, cfg: &FileConfig) -> Result<Option<ProverConfig>> {
    let Some(command) = pick(&args.prover, &cfg.prover) else {
        return Ok(None);
    };
    let timeout = pick(&args.timeout, &cfg.timeout).unwrap_or(15);
    if timeout == 0 {
        bail!("--timeout must be at least 1 second");
    }
    let mut prover = ProverConfig::new(command, timeout)?;
    let defaults = OutcomePatterns::default();
    let pattern = |flag: &Option<String>, file: &Option<String>, default: &str| {
        pick(flag, file).unwrap_or_else(|| default.to_owned())
    };
    prover.patterns = OutcomePatterns::new(
        &pattern(&args.proof_pattern, &cfg.proof_pattern, defaults.proof.as_str()),
        &pattern(&args.model_pattern, &cfg.model_pattern, defaults.model.as_str()),
        &pattern(&args.timeout_pattern, &cfg.timeout_pattern, defaults.timeout.as_str()),
    )?;
    Ok(Some(prover))
}

fn cmd_eval_prove(args: &ProveArgs, cfg: &FileConfig) -> Result<()> {
    let strategy = resolve_strategy(&args.strategy, cfg, None)?;
    let problems = require(pick(&args.problems, &cfg.problems), "problems")?;
    let prover = prover_config(&args.prover, cfg)?;
    let format = match (args.format, &cfg.format) {
        (Some(f), _) => f,
        (None, Some(s)) => parse_format(s)?,
        (None, None) => ReportFormat::Tsv,
    };
    let jobs = pick(&args.jobs, &cfg.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let opts = CorpusOptions {
        prover,
        out_dir: pick(&args.out_dir, &cfg.out_dir).unwrap_or_else(|| PathBuf::from("prover-inputs")),
        jobs,
    };

    let ctx = build_context(&args.kb, &args.strategy, cfg, strategy)?;
    let cache_dir = pick(&args.strategy.cache_dir, &cfg.cache_dir);
    let selector = Selector::prepare(&ctx, strategy, cache_dir.as_deref())?;
    let runs = run_corpus(&problems, &selector, &opts)?;
    let report = CorpusReport::new(runs);

    if let Some(path) = pick(&args.runs, &cfg.runs) {
        let mut buf = Vec::new();
        write_runs_tsv(&report.runs, &mut buf)?;
        write_output(Some(&path), &buf)?;
    }
    let mut buf = Vec::new();
    match format {
        ReportFormat::Tsv => write_summary_tsv(&report.summary, &mut buf)?,
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut buf, &report)?;
            buf.push(b'\n');
        }
    }
    write_output(pick(&args.output, &cfg.output).as_deref(), &buf)
}

fn cmd_eval_frat(args: &FratArgs, cfg: &FileConfig) -> Result<()> {
    let params = pick_list(&args.params, &cfg.params).unwrap_or_default();
    let strategy = resolve_strategy(&args.strategy, cfg, Some(params.iter().copied().max().unwrap_or(1)))?;
    let tasks_path = require(pick(&args.tasks, &cfg.tasks), "tasks")?;
    let format = match (args.format, &cfg.format) {
        (Some(f), _) => f,
        (None, Some(s)) => parse_format(s)?,
        (None, None) => ReportFormat::Tsv,
    };
    let file = File::open(&tasks_path).with_context(|| format!("opening {}", tasks_path.display()))?;
    let tasks = read_frat_tasks(file).with_context(|| format!("reading {}", tasks_path.display()))?;
    if params.is_empty() {
        bail!("missing --params (k values or depths to sweep)");
    }

    let ctx = build_context(&args.kb, &args.strategy, cfg, strategy)?;
    let cache_dir = pick(&args.strategy.cache_dir, &cfg.cache_dir);
    let report = run_frat(&tasks, &ctx, strategy, &params, cache_dir.as_deref())?;

    let mut buf = Vec::new();
    match format {
        ReportFormat::Tsv => write_frat_tsv(&report, &mut buf)?,
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut buf, &report)?;
            buf.push(b'\n');
        }
    }
    write_output(pick(&args.output, &cfg.output).as_deref(), &buf)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match &cli.command {
        Command::Select(a) => cmd_select(a, &cfg),
        Command::Stats(a) => cmd_stats(a, &cfg),
        Command::Map(MapCommand::Build(a)) => cmd_map_build(a, &cfg),
        Command::Eval(EvalCommand::Prove(a)) => cmd_eval_prove(a, &cfg),
        Command::Eval(EvalCommand::Frat(a)) => cmd_eval_frat(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
