//! `jag`: generate workloads, build indices, and measure them.
//!
//! A data directory holds `base.fbin`, `base.abin`, `queries.fbin`,
//! `queries.qbin` and, once computed, `gt.bin`.

use std::fs::File;
use std::io::{self as stdio, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use jag_core::datasets::io;
use jag_core::eval::{bin_by_selectivity, run_ablation_grid, run_beam, BUDGET_BEAMS};
use jag_core::{
    brute_force_ground_truth, build, load, pre_filter_search, recall_at_k, run_experiment, save, BuildParams,
    Dataset, ExperimentConfig, Family, JagGraph, Method, ModeSpec, QuerySet, SearchScratch, ThresholdSpec,
    WorkloadSpec,
};

#[derive(Parser)]
#[command(name = "jag", version, about = "Filtered nearest neighbor search with joint attribute graphs")]
struct Cli {
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true, env = "JAG_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic workload into a data directory.
    Gen(GenArgs),
    /// Compute exact filtered ground truth.
    Gt(GtArgs),
    /// Build an index.
    Build(BuildArgs),
    /// Run queries at one beam and print the results.
    Search(SearchArgs),
    /// Sweep beams and write a CSV report.
    Eval(EvalArgs),
    /// Banded recall of single-threshold indices at a fixed cost budget.
    Ablate(AblateArgs),
    /// Run a baseline.
    Baseline(BaselineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Label,
    Range,
    Subset,
    Boolean,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Label => Family::Label,
            FamilyArg::Range => Family::Scalar,
            FamilyArg::Subset => Family::Bitset,
            FamilyArg::Boolean => Family::Boolean,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    /// Label count for the label family.
    #[arg(long, default_value_t = 12)]
    labels: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GtArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Defaults to `gt.bin` in the data directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Threshold,
    Weight,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Threshold)]
    mode: ModeArg,
    /// Quantile levels in [0, 1]; `inf` builds an attribute-blind index.
    #[arg(long, value_delimiter = ',', default_value = "1,0.01,0")]
    levels: Vec<f64>,
    /// Multiples of the spread ratio used as weights.
    #[arg(long, value_delimiter = ',', default_value = "0,1,10")]
    multipliers: Vec<f64>,
    #[arg(long, default_value_t = 32)]
    deg: usize,
    #[arg(long, default_value_t = 1.2)]
    alpha: f32,
    #[arg(long, default_value_t = 64)]
    lbuild: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Insert sequentially so the output is reproducible.
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 64)]
    beam: usize,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    /// Joint attribute graph indices to evaluate.
    #[arg(long = "index")]
    indices: Vec<PathBuf>,
    /// Attribute-blind index evaluated with post-filtering.
    #[arg(long)]
    post: Option<PathBuf>,
    /// Also evaluate the exact pre-filter scan.
    #[arg(long)]
    pre: bool,
    #[arg(long, value_delimiter = ',', default_value = "10,20,50,100,200")]
    beams: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Report per selectivity band, binning queries to the nearest target.
    #[arg(long, value_delimiter = ',')]
    bands: Option<Vec<f64>>,
    #[arg(long, default_value = "eval")]
    config: String,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    data: PathBuf,
    /// One single-threshold index per level.
    #[arg(long, value_delimiter = ',', default_value = "1,0.1,0.01,0")]
    levels: Vec<f64>,
    /// One single-weight index per multiplier.
    #[arg(long, value_delimiter = ',')]
    multipliers: Option<Vec<f64>>,
    /// Levels of the merged index evaluated alongside.
    #[arg(long, value_delimiter = ',', default_value = "1,0.01,0")]
    merged: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,1e-1,1e-2,1e-3,1e-4")]
    bands: Vec<f64>,
    /// Mean distance computations allowed per query.
    #[arg(long, default_value_t = 5000.0)]
    budget: f64,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 32)]
    deg: usize,
    #[arg(long, default_value_t = 1.2)]
    alpha: f32,
    #[arg(long, default_value_t = 64)]
    lbuild: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineKind {
    Pre,
    Post,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(value_enum)]
    kind: BaselineKind,
    #[arg(long)]
    data: PathBuf,
    /// Attribute-blind index, required for post-filtering.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 64)]
    beam: usize,
}

struct Workload {
    data: Dataset,
    queries: QuerySet,
}

fn load_workload(dir: &Path) -> Result<Workload> {
    let (dim, vectors) = io::load_vectors(dir.join("base.fbin")).context("reading base.fbin")?;
    let attrs = io::load_attributes(dir.join("base.abin")).context("reading base.abin")?;
    let data = Dataset::new(dim, vectors, attrs)?;
    let (qdim, qvectors) = io::load_vectors(dir.join("queries.fbin")).context("reading queries.fbin")?;
    let filters = io::load_filters(dir.join("queries.qbin")).context("reading queries.qbin")?;
    let queries = QuerySet::new(qdim, qvectors, filters)?;
    if qdim != dim {
        bail!("query dimension {qdim} differs from base dimension {dim}");
    }
    Ok(Workload { data, queries })
}

/// Ground truth from `gt.bin` when it covers `k`, otherwise computed and
/// cached there.
fn ground_truth(dir: &Path, w: &Workload, k: usize) -> Result<Vec<Vec<u32>>> {
    let path = dir.join("gt.bin");
    if path.exists() {
        let (stored_k, rows) = io::load_ground_truth(&path).context("reading gt.bin")?;
        if stored_k >= k && rows.len() == w.queries.len() {
            return Ok(rows.into_iter().map(|r| r.into_iter().take(k).collect()).collect());
        }
    }
    let rows = brute_force_ground_truth(&w.data, &w.queries, k)?;
    io::save_ground_truth(&path, &rows, k).context("writing gt.bin")?;
    Ok(rows)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(stdio::stdout())),
    })
}

fn gen(args: GenArgs) -> Result<()> {
    let mut spec = WorkloadSpec::new(args.n, args.dim, args.queries, args.family.into(), args.seed);
    spec.labels = args.labels;
    let (data, queries) = spec.generate()?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    io::save_vectors(args.out.join("base.fbin"), data.dim, &data.vectors)?;
    io::save_attributes(args.out.join("base.abin"), &data.attrs)?;
    io::save_vectors(args.out.join("queries.fbin"), queries.dim, &queries.vectors)?;
    io::save_filters(args.out.join("queries.qbin"), &queries.filters)?;
    eprintln!("wrote {} points and {} queries to {}", data.len(), queries.len(), args.out.display());
    Ok(())
}

fn gt(args: GtArgs) -> Result<()> {
    let w = load_workload(&args.data)?;
    let rows = brute_force_ground_truth(&w.data, &w.queries, args.k)?;
    let out = args.out.unwrap_or_else(|| args.data.join("gt.bin"));
    io::save_ground_truth(&out, &rows, args.k)?;
    eprintln!("wrote ground truth for {} queries to {}", rows.len(), out.display());
    Ok(())
}

fn build_params(mode: ModeSpec, deg: usize, lbuild: usize, alpha: f32, seed: u64, parallel: bool) -> BuildParams {
    let mut p = BuildParams::new(deg, lbuild, mode);
    p.alpha = alpha;
    p.seed = seed;
    p.parallel = parallel;
    p
}

fn build_cmd(args: BuildArgs, threads: usize) -> Result<()> {
    let w = load_workload(&args.data)?;
    let mode = match args.mode {
        ModeArg::Threshold => ModeSpec::Threshold(ThresholdSpec::new(&args.levels)?),
        ModeArg::Weight => ModeSpec::Weight {
            multipliers: args.multipliers,
        },
    };
    let parallel = !args.deterministic && threads > 1;
    let params = build_params(mode, args.deg, args.lbuild, args.alpha, args.seed, parallel);
    let start = Instant::now();
    let g = build(w.data, &params)?;
    save(&g, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "built {} points, {} edges in {:.1}s; mode {:?}",
        g.len(),
        g.edge_count(),
        start.elapsed().as_secs_f64(),
        g.mode()
    );
    Ok(())
}

fn load_index(path: &Path) -> Result<JagGraph> {
    load(path).with_context(|| format!("reading index {}", path.display()))
}

fn search_cmd(args: SearchArgs) -> Result<()> {
    let w = load_workload(&args.data)?;
    let g = load_index(&args.index)?;
    let gt_path = args.data.join("gt.bin");
    let gt = if gt_path.exists() {
        Some(io::load_ground_truth(&gt_path)?.1)
    } else {
        None
    };
    let method = Method::Jag(&g);
    let mut scratch = SearchScratch::new();
    let mut out = output(None)?;
    let (mut recall, mut dc) = (0.0, 0u64);
    for q in 0..w.queries.len() {
        let (ids, cost) = method.run(&w.queries, q, args.k, args.beam, &mut scratch)?;
        dc += cost;
        let line: Vec<String> = ids.iter().map(u32::to_string).collect();
        writeln!(out, "{q}\t{}", line.join(" "))?;
        if let Some(gt) = &gt {
            recall += recall_at_k(&ids, &gt[q], args.k);
        }
    }
    out.flush()?;
    let nq = w.queries.len().max(1) as f64;
    match gt {
        Some(_) => eprintln!("recall@{} {:.4}, mean dc {:.1}", args.k, recall / nq, dc as f64 / nq),
        None => eprintln!("mean dc {:.1}", dc as f64 / nq),
    }
    Ok(())
}

fn eval_cmd(args: EvalArgs, threads: usize) -> Result<()> {
    let w = load_workload(&args.data)?;
    let gt = ground_truth(&args.data, &w, args.k)?;
    let graphs = args.indices.iter().map(|p| load_index(p)).collect::<Result<Vec<_>>>()?;
    let post = args.post.as_deref().map(load_index).transpose()?;
    let mut methods: Vec<Method> = graphs.iter().map(Method::Jag).collect();
    if let Some(g) = &post {
        methods.push(Method::PostFilter(g));
    }
    if args.pre {
        methods.push(Method::PreFilter(&w.data));
    }
    if methods.is_empty() {
        bail!("nothing to evaluate: pass --index, --post or --pre");
    }
    let bands = args
        .bands
        .as_deref()
        .map(|t| bin_by_selectivity(&w.data, &w.queries, t))
        .transpose()?;
    let cfg = ExperimentConfig {
        config_id: args.config,
        k: args.k,
        beams: args.beams,
        threads: Some(threads),
        bands,
    };
    let report = run_experiment(&methods, &w.data, &w.queries, Some(&gt), &cfg)?;
    report.write_csv(output(args.out.as_deref())?)?;
    Ok(())
}

fn ablate_cmd(args: AblateArgs, threads: usize) -> Result<()> {
    let w = load_workload(&args.data)?;
    let gt = ground_truth(&args.data, &w, args.k)?;
    let bands = bin_by_selectivity(&w.data, &w.queries, &args.bands)?;
    let mut specs: Vec<(String, ModeSpec)> = args
        .levels
        .iter()
        .map(|&l| Ok((format!("threshold-{l}"), ModeSpec::Threshold(ThresholdSpec::new(&[l])?))))
        .collect::<Result<_>>()?;
    for m in args.multipliers.iter().flatten() {
        specs.push((format!("weight-{m}"), ModeSpec::Weight { multipliers: vec![*m] }));
    }
    let merged = ThresholdSpec::new(&args.merged)?;
    let label = args.merged.iter().map(f64::to_string).collect::<Vec<_>>().join("+");
    specs.push((format!("merged-{label}"), ModeSpec::Threshold(merged)));

    let mut graphs = Vec::with_capacity(specs.len());
    for (name, mode) in specs {
        let start = Instant::now();
        let params = build_params(mode, args.deg, args.lbuild, args.alpha, args.seed, threads > 1);
        graphs.push((name.clone(), build(w.data.clone(), &params)?));
        eprintln!("built {name} in {:.1}s", start.elapsed().as_secs_f64());
    }
    let methods: Vec<(String, Method)> = graphs.iter().map(|(n, g)| (n.clone(), Method::Jag(g))).collect();
    let grid = run_ablation_grid(&methods, &w.queries, &gt, &bands, args.k, &BUDGET_BEAMS, args.budget)?;
    eprint!("{grid}");
    grid.write_csv(output(args.out.as_deref())?)?;
    Ok(())
}

fn baseline_cmd(args: BaselineArgs) -> Result<()> {
    let w = load_workload(&args.data)?;
    let gt = ground_truth(&args.data, &w, args.k)?;
    let (recall, dc) = match args.kind {
        BaselineKind::Pre => {
            let (mut recall, mut dc) = (0.0, 0u64);
            for q in 0..w.queries.len() {
                let r = pre_filter_search(&w.data, w.queries.vector(q), &w.queries.filters[q], args.k)?;
                recall += recall_at_k(&r.ids, &gt[q], args.k);
                dc += r.dc_count;
            }
            let nq = w.queries.len().max(1) as f64;
            (recall / nq, dc as f64 / nq)
        }
        BaselineKind::Post => {
            let Some(path) = &args.index else {
                bail!("post-filtering needs --index pointing at an attribute-blind index");
            };
            let g = load_index(path)?;
            let run = run_beam(Method::PostFilter(&g), &w.queries, &gt, args.k, args.beam)?;
            (run.mean_recall(None), run.mean_dc(None))
        }
    };
    println!("recall@{} {recall:.4}\tmean_dc {dc:.1}", args.k);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let threads = match cli.threads {
        Some(0) => bail!("--threads must be positive"),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring worker threads")?;
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Gt(a) => gt(a),
        Command::Build(a) => build_cmd(a, threads),
        Command::Search(a) => search_cmd(a),
        Command::Eval(a) => eval_cmd(a, threads),
        Command::Ablate(a) => ablate_cmd(a, threads),
        Command::Baseline(a) => baseline_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(stdio::stderr(), "error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
