//! The `flowwalks` command line. Exit codes: 0 success, 1 infeasible,
//! 2 time limit reached, 3 input error.

pub mod io;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use flowwalks::bench::{percentile, run_benchmark_parallel, BenchConfig, BenchReport, EPrimePolicy};
use flowwalks::dominators::{build_s_dominator_tree, build_t_dominator_tree};
use flowwalks::generator::{generate, GeneratorConfig, Instance, Noise};
use flowwalks::models::{solve, DecompositionSpec, KChoice, ModelError, ModelKind, SolutionStatus};
use flowwalks::safety::{edge_safe_sequences, longest_covering_sequence, vertex_safe_sequences};
use flowwalks::solver::{default_backend, Params};
use flowwalks::widths::max_weight_antichain;
use flowwalks::{parse_graph, EdgeId, Graph, VertexId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_TIMEOUT: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "flowwalks", version, about = "Decompose weighted s-t graphs into weighted walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print maximal safe sequences, one per line.
    Safety(SafetyArgs),
    /// Print a maximum-weight edge antichain and its weight.
    Antichain(AntichainArgs),
    /// Solve a decomposition model.
    Decompose(DecomposeArgs),
    /// Write a synthetic de Bruijn corpus to a directory.
    Generate(GenerateArgs),
    /// Compare solve times with and without safety preprocessing.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct SafetyArgs {
    graph: PathBuf,
    /// Edge sequences (C defaults to every edge on an s-t walk).
    #[arg(long)]
    edges: bool,
    /// Comma-separated members of C: vertex names, or `u>v` with --edges.
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    json: bool,
    /// Write both dominator trees to PREFIX.s.dot and PREFIX.t.dot.
    #[arg(long, value_name = "PREFIX")]
    emit_dot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum WeightSource {
    /// The edge flow values.
    Flow,
    /// Length of the longest safe sequence through each edge.
    FromSafety,
}

#[derive(Args, Debug)]
struct AntichainArgs {
    graph: PathBuf,
    #[arg(long, value_enum, default_value_t = WeightSource::Flow)]
    weights: WeightSource,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Fd,
    Lae,
    Mpe,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Fd => ModelKind::Fd,
            ModelArg::Lae => ModelKind::Lae,
            ModelArg::Mpe => ModelKind::Mpe,
        }
    }
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    graph: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Number of walks, or `auto`.
    #[arg(long, default_value = "auto")]
    k: String,
    #[arg(long)]
    no_safety: bool,
    /// One subset per line, comma-separated `u>v` edges.
    #[arg(long, value_name = "FILE")]
    subsets: Option<PathBuf>,
    /// A file with one edge per line, or `percentile:P`.
    #[arg(long, value_name = "FILE|percentile:P")]
    eprime: Option<String>,
    #[arg(long, default_value_t = 300.0)]
    time_limit: f64,
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long)]
    threads: Option<u32>,
    /// Largest traversal count per edge and walk for LAE and MPE.
    #[arg(long, default_value_t = 8)]
    traversal_cap: u64,
    /// Report zero-weight walks too.
    #[arg(long)]
    keep_zero: bool,
    /// Require every walk weight to be at least 1 in LAE and MPE.
    #[arg(long)]
    strict_positive_weights: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    None,
    Poisson,
}

#[derive(Args, Debug, Clone)]
struct CorpusArgs {
    #[arg(long, default_value_t = 5)]
    genomes: usize,
    #[arg(long, default_value_t = 3000)]
    length: usize,
    #[arg(long, default_value_t = 1000)]
    window: usize,
    #[arg(long = "kmer", default_value_t = 15)]
    kmer: usize,
    #[arg(long, default_value_t = 0.002)]
    snp_rate: f64,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 10.0)]
    scale: f64,
    #[arg(long, value_enum, default_value_t = NoiseArg::None)]
    noise: NoiseArg,
    #[arg(long, default_value_t = 5)]
    reads: usize,
    #[arg(long, default_value_t = 1000)]
    read_length: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl CorpusArgs {
    fn config(&self) -> GeneratorConfig {
        GeneratorConfig {
            genome_count: self.genomes,
            genome_length: self.length,
            window_length: self.window,
            kmer_size: self.kmer,
            snp_rate: self.snp_rate,
            repeats_per_window: self.repeats,
            abundance_mu: self.mu,
            abundance_sigma: self.sigma,
            abundance_scale: self.scale,
            noise: match self.noise {
                NoiseArg::None => Noise::None,
                NoiseArg::Poisson => Noise::Poisson,
            },
            reads_per_window: self.reads,
            read_length: self.read_length,
            seed: self.seed,
        }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    corpus: CorpusArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BenchModel {
    Fd,
    Lae,
    Mpe,
    All,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Read `*.graph` (and matching `*.subsets`) from here instead of generating.
    #[arg(long)]
    dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BenchModel::All)]
    model: BenchModel,
    #[arg(long, default_value_t = 300.0)]
    time_limit: f64,
    /// Instances solved concurrently.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Solves per instance and side; the fastest time is kept.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    samples: u32,
    /// Write bench_<model>.csv and bench_<model>.json here.
    #[arg(long)]
    report_dir: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    corpus: CorpusArgs,
}

/// Why a command stopped early, with the exit code it maps to.
#[derive(Debug)]
enum Failure {
    Input(String),
    Infeasible(String),
    Timeout(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Infeasible(_) => EXIT_INFEASIBLE,
            Failure::Timeout(_) => EXIT_TIMEOUT,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Infeasible(m) | Failure::Timeout(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{context}: {e}"))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(input(&path.display().to_string()))
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    parse_graph(&read_text(path)?).map_err(input(&path.display().to_string()))
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(input(&path.display().to_string()))
}

fn emit(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes()).map_err(|e| Failure::Input(format!("writing output: {e}")))
}

fn emit_json(out: &mut dyn Write, value: &serde_json::Value) -> Outcome {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    emit(out, &format!("{text}\n"))
}

fn live_vertices(g: &Graph) -> Vec<VertexId> {
    g.live_vertices().iter().enumerate().filter(|(_, &l)| l).map(|(v, _)| v).collect()
}

fn live_edges(g: &Graph) -> Vec<EdgeId> {
    g.live_edges().iter().enumerate().filter(|(_, &l)| l).map(|(e, _)| e).collect()
}

fn cmd_safety(a: &SafetyArgs, out: &mut dyn Write) -> Outcome {
    let g = read_graph(&a.graph)?;
    if let Some(prefix) = &a.emit_dot {
        let base = prefix.display().to_string();
        write_file(Path::new(&format!("{base}.s.dot")), &build_s_dominator_tree(&g).to_dot(&g))?;
        write_file(Path::new(&format!("{base}.t.dot")), &build_t_dominator_tree(&g).to_dot(&g))?;
    }
    let tokens: Option<Vec<&str>> = a.c.as_deref().map(|c| c.split(',').filter(|t| !t.trim().is_empty()).collect());
    if a.edges {
        let c = match tokens {
            Some(t) => {
                t.iter().map(|x| io::parse_edge_token(&g, x)).collect::<Result<Vec<_>, _>>().map_err(Failure::Input)?
            }
            None => live_edges(&g),
        };
        let seqs = edge_safe_sequences(&g, &c).map_err(input("safety"))?;
        if a.json {
            let records: Vec<_> = seqs
                .iter()
                .map(|s| {
                    json!({
                        "anchor": g.edge_label(s.anchor),
                        "edges": s.edges.iter().map(|&e| g.edge_label(e)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            return emit_json(out, &json!(records));
        }
        let lines: Vec<String> = seqs
            .iter()
            .map(|s| s.edges.iter().map(|&e| g.edge_label(e)).collect::<Vec<_>>().join(",") + "\n")
            .collect();
        return emit(out, &lines.concat());
    }
    let c = match tokens {
        Some(t) => t
            .iter()
            .map(|x| g.vertex(x.trim()).ok_or_else(|| Failure::Input(format!("unknown vertex `{}`", x.trim()))))
            .collect::<Result<Vec<_>, _>>()?,
        None => live_vertices(&g),
    };
    let seqs = vertex_safe_sequences(&g, &c).map_err(input("safety"))?;
    let names = |vs: &[VertexId]| vs.iter().map(|&v| g.name(v).to_string()).collect::<Vec<_>>();
    if a.json {
        let records: Vec<_> =
            seqs.iter().map(|s| json!({ "anchor": g.name(s.anchor), "vertices": names(&s.vertices) })).collect();
        return emit_json(out, &json!(records));
    }
    let lines: Vec<String> = seqs.iter().map(|s| names(&s.vertices).join(",") + "\n").collect();
    emit(out, &lines.concat())
}

fn cmd_antichain(a: &AntichainArgs, out: &mut dyn Write) -> Outcome {
    let g = read_graph(&a.graph)?;
    let weights = match a.weights {
        WeightSource::Flow => g.weights().to_vec(),
        WeightSource::FromSafety => {
            let c = live_edges(&g);
            if c.is_empty() {
                return Err(Failure::Input("no edge lies on an s-t walk".into()));
            }
            let seqs = edge_safe_sequences(&g, &c).map_err(input("safety"))?;
            longest_covering_sequence(g.m(), &seqs).0
        }
    };
    let ac = max_weight_antichain(&g, &weights);
    if a.json {
        let members: Vec<_> =
            ac.edges.iter().map(|&e| json!({ "edge": g.edge_label(e), "weight": weights[e] })).collect();
        return emit_json(out, &json!({ "edges": members, "totalWeight": ac.total_weight }));
    }
    let mut text: String = ac.edges.iter().map(|&e| format!("{}\t{}\n", g.edge_label(e), weights[e])).collect();
    text.push_str(&format!("total\t{}\n", ac.total_weight));
    emit(out, &text)
}

fn parse_k(raw: &str) -> Result<KChoice, Failure> {
    if raw.eq_ignore_ascii_case("auto") {
        return Ok(KChoice::Auto);
    }
    match raw.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(KChoice::Fixed(k)),
        _ => Err(Failure::Input(format!("--k expects a positive integer or `auto`, got `{raw}`"))),
    }
}

fn eprime_from(g: &Graph, raw: &str) -> Result<Vec<EdgeId>, Failure> {
    if let Some(p) = raw.strip_prefix("percentile:") {
        let p: f64 = p.parse().map_err(input("--eprime percentile"))?;
        if !(0.0..=100.0).contains(&p) {
            return Err(Failure::Input(format!("--eprime percentile {p} is outside 0..100")));
        }
        return Ok(flowwalks::bench::select_eprime(g, EPrimePolicy::AbovePercentile(p)));
    }
    let path = Path::new(raw);
    io::parse_edge_list(g, &read_text(path)?).map_err(input(raw))
}

fn cmd_decompose(a: &DecomposeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let g = read_graph(&a.graph)?;
    let mut spec = DecompositionSpec::new(g.clone(), a.model.into()).with_k(parse_k(&a.k)?).with_safety(!a.no_safety);
    if let Some(raw) = &a.eprime {
        spec = spec.with_eprime(eprime_from(&g, raw)?);
    }
    if let Some(path) = &a.subsets {
        let subsets = io::parse_subsets(&g, &read_text(path)?).map_err(input(&path.display().to_string()))?;
        spec = spec.with_subsets(subsets);
    }
    if a.time_limit.is_nan() || a.time_limit <= 0.0 {
        return Err(Failure::Input("--time-limit must be positive".into()));
    }
    spec.params = Params { time_limit: a.time_limit, relative_gap: a.gap, threads: a.threads };
    spec.traversal_cap = a.traversal_cap.max(1);
    spec.strict_positive_weights = a.strict_positive_weights;

    let backend = default_backend().map_err(input("solver"))?;
    let sol = match solve(&spec, backend.as_ref()) {
        Ok(sol) => sol,
        Err(ModelError::InfeasibleCover(edge)) => {
            return Err(Failure::Infeasible(format!("edge {edge} has positive flow but lies on no s-t walk")))
        }
        Err(e) => return Err(Failure::Input(e.to_string())),
    };
    if sol.stats.bound_hits > 0 {
        let _ = writeln!(
            err,
            "warning: {} traversal variables sit at the cap of {}; raise --traversal-cap if the objective looks high",
            sol.stats.bound_hits, spec.traversal_cap
        );
    }
    if a.json {
        emit_json(out, &sol.to_json(&g, a.keep_zero))?;
    } else {
        let mut text = format!("status\t{:?}\nk\t{}\n", sol.status, sol.k);
        if let Some(o) = sol.objective {
            text.push_str(&format!("objective\t{o}\n"));
        }
        for (i, walk) in sol.walks.iter().enumerate() {
            if sol.weights[i] == 0 && !a.keep_zero {
                continue;
            }
            let names: Vec<&str> = walk.iter().map(|&v| g.name(v)).collect();
            let slack = sol.slacks.get(i).map_or(String::new(), |r| format!("\tslack={r}"));
            text.push_str(&format!("{}\t{}{slack}\n", sol.weights[i], names.join(",")));
        }
        emit(out, &text)?;
    }
    match sol.status {
        SolutionStatus::Optimal => Ok(()),
        SolutionStatus::Infeasible => Err(Failure::Infeasible(format!("no solution with k = {}", sol.k))),
        SolutionStatus::Feasible | SolutionStatus::TimedOut => {
            Err(Failure::Timeout(format!("time limit of {} s reached", a.time_limit)))
        }
    }
}

fn truth_text(inst: &Instance) -> String {
    inst.truth
        .iter()
        .map(|(walk, w)| {
            let names: Vec<&str> = walk.iter().map(|&v| inst.graph.name(v)).collect();
            format!("{w}\t{}\n", names.join(","))
        })
        .collect()
}

fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Outcome {
    let instances = generate(&a.corpus.config()).map_err(input("generate"))?;
    fs::create_dir_all(&a.out).map_err(input(&a.out.display().to_string()))?;
    for inst in &instances {
        write_file(&a.out.join(format!("{}.graph", inst.name)), &inst.graph.to_text())?;
        write_file(&a.out.join(format!("{}.subsets", inst.name)), &io::format_subsets(&inst.graph, &inst.subsets))?;
        write_file(&a.out.join(format!("{}.truth", inst.name)), &truth_text(inst))?;
    }
    emit(out, &format!("wrote {} instances to {}\n", instances.len(), a.out.display()))
}

fn load_corpus(dir: &Path) -> Result<Vec<Instance>, Failure> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(input(&dir.display().to_string()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "graph"))
        .collect();
    paths.sort();
    let mut instances = Vec::with_capacity(paths.len());
    for path in paths {
        let graph = read_graph(&path)?;
        let subsets_path = path.with_extension("subsets");
        let subsets = if subsets_path.exists() {
            io::parse_subsets(&graph, &read_text(&subsets_path)?).map_err(input(&subsets_path.display().to_string()))?
        } else {
            Vec::new()
        };
        let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let exact_weights = graph.weights().to_vec();
        instances.push(Instance { name, graph, subsets, truth: Vec::new(), exact_weights });
    }
    Ok(instances)
}

fn model_name(m: ModelKind) -> &'static str {
    match m {
        ModelKind::Fd => "fd",
        ModelKind::Lae => "lae",
        ModelKind::Mpe => "mpe",
    }
}

fn summary_line(r: &BenchReport) -> String {
    let solved = r.rows.iter().filter(|x| x.solved_safety).count();
    let weights: Vec<u64> = r.rows.iter().map(|x| x.fixed_one as u64 + x.fixed_zero as u64).collect();
    format!(
        "{}\t{} instances\tsolved with safety {}\tspeedup {:.2}x\tmean ratio {:.2}x\tmedian {:.4}/{:.4} s\tmedian fixed {:.0}\tobjectives equal {}\n",
        model_name(r.model),
        r.rows.len(),
        solved,
        r.speedup,
        r.mean_speedup,
        r.median_seconds_no_safety,
        r.median_seconds_safety,
        percentile(&weights, 50.0),
        if r.all_objectives_equal() { "yes" } else { "NO" }
    )
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Outcome {
    let instances = match &a.dir {
        Some(dir) => load_corpus(dir)?,
        None => generate(&a.corpus.config()).map_err(input("generate"))?,
    };
    if a.time_limit.is_nan() || a.time_limit <= 0.0 {
        return Err(Failure::Input("--time-limit must be positive".into()));
    }
    default_backend().map_err(input("solver"))?;
    let models = match a.model {
        BenchModel::Fd => vec![ModelKind::Fd],
        BenchModel::Lae => vec![ModelKind::Lae],
        BenchModel::Mpe => vec![ModelKind::Mpe],
        BenchModel::All => vec![ModelKind::Fd, ModelKind::Lae, ModelKind::Mpe],
    };
    let mut reports = Vec::new();
    for model in models {
        let cfg = BenchConfig { repeats: a.samples as usize, ..BenchConfig::for_model(model, a.time_limit) };
        let report =
            run_benchmark_parallel(&instances, &cfg, a.parallel, default_backend).map_err(input("benchmark"))?;
        if let Some(dir) = &a.report_dir {
            fs::create_dir_all(dir).map_err(input(&dir.display().to_string()))?;
            let stem = format!("bench_{}", model_name(model));
            write_file(&dir.join(format!("{stem}.csv")), &report.to_csv())?;
            let text = serde_json::to_string_pretty(&report).expect("reports serialize");
            write_file(&dir.join(format!("{stem}.json")), &text)?;
        }
        reports.push(report);
    }
    if a.json {
        return emit_json(out, &serde_json::to_value(&reports).expect("reports serialize"));
    }
    emit(out, &reports.iter().map(summary_line).collect::<String>())
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Safety(a) => cmd_safety(a, out),
        Command::Antichain(a) => cmd_antichain(a, out),
        Command::Decompose(a) => cmd_decompose(a, out, err),
        Command::Generate(a) => cmd_generate(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}
