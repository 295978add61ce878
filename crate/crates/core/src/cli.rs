//! Command-line front end and JSON Lines run records.
//!
//! Every record carries `format_version` and a `kind`. Wall-clock values live
//! in `timings` objects or in fields ending in `_secs`; everything else is a
//! pure function of the inputs and flags (see [`strip_timings`]).

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::align::{
    lambda_tame, lowrank_tame, tame, AlignOptions, AlignmentOutput, ContractionPath, FactorPair,
    IterationStats,
};
use crate::eigen::{derive_seeds, verify_decoupling_with_budget, DecouplingReport, EigenOptions};
use crate::error::{Error, Result};
use crate::matching::{accuracy, edges_aligned, motifs_aligned, write_matching, Matching};
use crate::motifs::{clique_tensor, read_edge_list, Graph};
use crate::refine::{local_search_report, Knn, RefineOptions};
use crate::synth::{make_problem, read_truth, write_problem, NoiseModel, Provenance};
use crate::tensor::{DenseTensor, MotifTensor, DEFAULT_DENSE_BUDGET};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Tame,
    LowrankTame,
    LambdaTame,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Tame => "tame",
            Method::LowrankTame => "lowrank-tame",
            Method::LambdaTame => "lambda-tame",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefineMode {
    None,
    LocalSearch,
}

/// `auto` or a positive integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnArg(pub Knn);

impl FromStr for KnnArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(KnnArg(Knn::Auto));
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(KnnArg(Knn::Fixed(k))),
            _ => Err(format!("expected `auto` or a positive integer, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Er,
    Duplication,
}

/// Method, optionally followed by `+local-search`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSpec {
    pub method: Method,
    pub refine: RefineMode,
}

impl FromStr for RunSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (m, refine) = match s.split_once('+') {
            Some((m, "local-search")) => (m, RefineMode::LocalSearch),
            Some((_, other)) => return Err(format!("unknown refinement `{other}`")),
            None => (s, RefineMode::None),
        };
        let method = Method::from_str(m, true)?;
        Ok(RunSpec { method, refine })
    }
}

#[derive(Debug, Parser)]
#[command(name = "kronalign", version, about = "Tensor Kronecker eigen checks and motif network alignment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Align two graphs by their k-clique tensors.
    Align(AlignArgs),
    /// Check the dominant-eigenpair decoupling on random symmetric tensors.
    Eigcheck(EigcheckArgs),
    /// Generate synthetic alignment problems and optionally run methods on them.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct MethodArgs {
    #[arg(long, default_value_t = 3)]
    pub motif: usize,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 15)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// `auto` (twice the iterate rank) or a neighbour count.
    #[arg(long, default_value = "auto")]
    pub knn: KnnArg,
    #[arg(long, default_value_t = 10)]
    pub sweeps: usize,
    /// Cap on r^(k-1) expansion columns for lowrank-tame.
    #[arg(long, default_value_t = crate::kron::DEFAULT_COLUMN_CAP)]
    pub column_cap: usize,
    /// Use edges (k = 2) when a graph has no k-cliques instead of failing.
    #[arg(long)]
    pub edge_fallback: bool,
}

#[derive(Debug, Clone, clap::Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub graph_a: PathBuf,
    #[arg(long)]
    pub graph_b: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::LambdaTame)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = RefineMode::None)]
    pub refine: RefineMode,
    #[command(flatten)]
    pub params: MethodArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Truth file (`A-id B-id` per line) for the accuracy field.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Run record path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Matching path; defaults to the record path with a `.matching` extension.
    #[arg(long)]
    pub matching_out: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct EigcheckArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    pub orders: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    pub trials: usize,
    #[arg(long, default_value_t = 5000)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Entry budget for the explicit Kronecker product.
    #[arg(long, default_value_t = DEFAULT_DENSE_BUDGET)]
    pub budget: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// ER edge deletion probability.
    #[arg(long, default_value_t = 0.05)]
    pub p: f64,
    /// Fraction of vertices added by duplication.
    #[arg(long, default_value_t = 0.25)]
    pub frac: f64,
    /// Probability a duplicated vertex keeps each copied edge.
    #[arg(long, default_value_t = 0.5)]
    pub pedge: f64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Methods to run on every problem, e.g. `lambda-tame+local-search,tame`.
    #[arg(long, value_delimiter = ',')]
    pub run: Vec<RunSpec>,
    #[command(flatten)]
    pub params: MethodArgs,
    /// Directory for the problem files.
    #[arg(long, default_value = "synth-problems")]
    pub out_dir: PathBuf,
    /// Record path; defaults to `records.jsonl` inside the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: usize,
    pub motifs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineSummary {
    pub knn: usize,
    pub sweeps: usize,
    pub swaps: usize,
    pub motifs_before: usize,
    pub edges_before: usize,
    pub motifs_after: usize,
    pub edges_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalScores {
    pub matched_pairs: usize,
    pub matching_weight: f64,
    pub motifs_aligned: usize,
    pub edges_aligned: usize,
    /// Motifs aligned over the smaller motif count of the two graphs.
    pub motif_match_rate: f64,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub load_secs: f64,
    pub motif_secs: f64,
    pub align_secs: f64,
    pub contraction_secs: f64,
    pub matching_secs: f64,
    pub refine_secs: f64,
    pub total_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub format_version: u32,
    pub kind: String,
    pub method: Method,
    pub refine: RefineMode,
    pub motif_order: usize,
    /// Differs from `motif_order` only after the edge fallback.
    pub motif_order_used: usize,
    pub options: AlignOptions,
    pub refine_options: Option<RefineOptions>,
    pub seed: u64,
    pub trial: Option<usize>,
    pub problem: Option<Provenance>,
    pub graph_a: GraphSummary,
    pub graph_b: GraphSummary,
    pub iterations: Vec<IterationStats>,
    pub best_iteration: usize,
    pub best_score: usize,
    pub converged: bool,
    /// LowRankTAME fell back to the accumulation form on some iteration.
    pub accumulation_used: bool,
    pub max_rank: Option<usize>,
    pub refinement: Option<RefineSummary>,
    pub result: FinalScores,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigcheckRecord {
    pub format_version: u32,
    pub kind: String,
    pub trial: usize,
    pub seed: u64,
    pub restarts: usize,
    pub report: DecouplingReport,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub format_version: u32,
    pub kind: String,
    pub trial: usize,
    pub stem: String,
    pub provenance: Provenance,
    pub graph_a: GraphSummary,
    pub graph_b: GraphSummary,
}

/// Everything [`run_alignment`] needs besides the graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignConfig {
    pub method: Method,
    pub refine: RefineMode,
    pub motif: usize,
    pub options: AlignOptions,
    pub refine_options: RefineOptions,
    pub edge_fallback: bool,
    pub seed: u64,
}

impl AlignConfig {
    fn from_args(method: Method, refine: RefineMode, p: &MethodArgs, seed: u64) -> Self {
        AlignConfig {
            method,
            refine,
            motif: p.motif,
            options: AlignOptions {
                alpha: p.alpha,
                beta: p.beta,
                max_iter: p.iters,
                tol: p.tol,
                column_cap: p.column_cap,
                ..AlignOptions::default()
            },
            refine_options: RefineOptions {
                knn: p.knn.0,
                max_sweeps: p.sweeps,
                ..RefineOptions::default()
            },
            edge_fallback: p.edge_fallback,
            seed,
        }
    }
}

fn summary(g: &Graph, t: &MotifTensor) -> GraphSummary {
    GraphSummary {
        vertices: g.n(),
        edges: g.num_edges(),
        motifs: t.nnz(),
    }
}

/// Builds the motif tensors, aligns, optionally refines, and scores.
pub fn run_alignment(
    a: &Graph,
    b: &Graph,
    cfg: &AlignConfig,
    truth: Option<&[usize]>,
) -> Result<(RunRecord, Matching)> {
    if a.n() == 0 || b.n() == 0 {
        return Err(Error::DegenerateProblem("graphs must have vertices".into()));
    }
    if let Some(t) = truth {
        if t.len() > a.n() || t.iter().any(|&j| j >= b.n()) {
            return Err(Error::ContractViolation("truth does not fit the graphs".into()));
        }
    }
    let total = Instant::now();
    let mut timings = Timings::default();
    let t0 = Instant::now();
    let mut order = cfg.motif;
    let mut ta = clique_tensor(a, order)?;
    let mut tb = clique_tensor(b, order)?;
    if (ta.is_empty() || tb.is_empty()) && order != 2 {
        if !cfg.edge_fallback {
            return Err(Error::DegenerateProblem(format!(
                "no {order}-cliques in {} (pass --edge-fallback to align edges instead)",
                if ta.is_empty() { "graph A" } else { "graph B" }
            )));
        }
        warn!("no {order}-cliques; falling back to edges");
        order = 2;
        ta = clique_tensor(a, 2)?;
        tb = clique_tensor(b, 2)?;
    }
    timings.motif_secs = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let (out, factors): (AlignmentOutput, Option<FactorPair>) = match cfg.method {
        Method::Tame => (tame(&ta, &tb, None, &cfg.options)?, None),
        Method::LowrankTame => (lowrank_tame(&ta, &tb, None, &cfg.options)?, None),
        Method::LambdaTame => {
            let (f, out) = lambda_tame(&ta, &tb, &cfg.options)?;
            (out, Some(f))
        }
    };
    timings.align_secs = t0.elapsed().as_secs_f64();
    timings.contraction_secs = out.iterations.iter().map(|s| s.contraction_secs).sum();
    timings.matching_secs = out.iterations.iter().map(|s| s.matching_secs).sum();

    let mut matching = out.best_matching.clone();
    let mut refinement = None;
    if cfg.refine == RefineMode::LocalSearch {
        let t0 = Instant::now();
        let factors = match factors {
            Some(f) => f,
            None => out.best_iterate.to_factors(cfg.options.trunc_tol)?,
        };
        let rep = local_search_report(&matching, a, b, &ta, &tb, &factors, &cfg.refine_options)?;
        refinement = Some(RefineSummary {
            knn: rep.knn,
            sweeps: rep.sweeps,
            swaps: rep.swaps,
            motifs_before: rep.before.0,
            edges_before: rep.before.1,
            motifs_after: rep.after.0,
            edges_after: rep.after.1,
        });
        matching = rep.matching;
        timings.refine_secs = t0.elapsed().as_secs_f64();
    }
    let motifs = motifs_aligned(&matching, &ta, &tb);
    let reference = ta.nnz().min(tb.nnz());
    let result = FinalScores {
        matched_pairs: matching.len(),
        matching_weight: matching.weight,
        motifs_aligned: motifs,
        edges_aligned: edges_aligned(&matching, a, b),
        motif_match_rate: if reference == 0 {
            0.0
        } else {
            motifs as f64 / reference as f64
        },
        accuracy: truth.map(|t| accuracy(&matching, t)),
    };
    timings.total_secs = total.elapsed().as_secs_f64();
    let record = RunRecord {
        format_version: FORMAT_VERSION,
        kind: "align".into(),
        method: cfg.method,
        refine: cfg.refine,
        motif_order: cfg.motif,
        motif_order_used: order,
        options: cfg.options.clone(),
        refine_options: (cfg.refine == RefineMode::LocalSearch).then(|| cfg.refine_options.clone()),
        seed: cfg.seed,
        trial: None,
        problem: None,
        graph_a: summary(a, &ta),
        graph_b: summary(b, &tb),
        accumulation_used: out
            .iterations
            .iter()
            .any(|s| s.path == ContractionPath::Accumulation),
        max_rank: out.iterations.iter().filter_map(|s| s.rank).max(),
        best_iteration: out.best_iteration,
        best_score: out.best_score,
        converged: out.converged,
        iterations: out.iterations,
        refinement,
        result,
        timings,
    };
    Ok((record, matching))
}

/// Removes wall-clock data: `timings` objects and keys ending in `_secs`.
pub fn strip_timings(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.retain(|k, _| k != "timings" && !k.ends_with("_secs"));
            map.values_mut().for_each(strip_timings);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

fn write_jsonl<T: Serialize>(w: &mut impl Write, rec: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, rec)?;
    writeln!(w)?;
    Ok(())
}

/// Opens `path`, or stdout when `None`.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn load_graph(path: &Path) -> Result<Graph> {
    let f = File::open(path).map_err(|e| {
        Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    read_edge_list(BufReader::new(f))
}

pub fn cmd_align(args: &AlignArgs) -> Result<()> {
    let t0 = Instant::now();
    let a = load_graph(&args.graph_a)?;
    let b = load_graph(&args.graph_b)?;
    let truth = match &args.truth {
        Some(p) => Some(read_truth(BufReader::new(File::open(p)?))?),
        None => None,
    };
    let load_secs = t0.elapsed().as_secs_f64();
    let cfg = AlignConfig::from_args(args.method, args.refine, &args.params, args.seed);
    let (mut rec, matching) = run_alignment(&a, &b, &cfg, truth.as_deref())?;
    rec.timings.load_secs = load_secs;
    rec.timings.total_secs += load_secs;
    let matching_path = args
        .matching_out
        .clone()
        .or_else(|| args.out.as_ref().map(|p| p.with_extension("matching")));
    if let Some(p) = matching_path {
        write_matching(&matching, BufWriter::new(File::create(p)?))?;
    }
    let mut w = sink(args.out.as_deref())?;
    write_jsonl(&mut w, &rec)?;
    w.flush()?;
    Ok(())
}

/// Random symmetric pair for one trial: `(m, n, k)` drawn from the grids.
pub fn eigcheck_trial(
    dims: &[usize],
    orders: &[usize],
    seed: u64,
) -> (DenseTensor, DenseTensor) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = dims[rng.random_range(0..dims.len())];
    let n = dims[rng.random_range(0..dims.len())];
    let k = orders[rng.random_range(0..orders.len())];
    let a = DenseTensor::random_symmetric(k, m, &mut rng);
    let b = DenseTensor::random_symmetric(k, n, &mut rng);
    (a, b)
}

pub fn eigcheck_records(args: &EigcheckArgs) -> Result<Vec<EigcheckRecord>> {
    if args.trials > 0 && (args.dims.is_empty() || args.orders.is_empty()) {
        return Err(Error::InvalidArgument("dims and orders must be nonempty".into()));
    }
    if args.dims.contains(&0) || args.orders.iter().any(|&k| k < 2) {
        return Err(Error::InvalidArgument("dims ≥ 1 and orders ≥ 2 required".into()));
    }
    let seeds = derive_seeds(args.seed, args.trials);
    let mut out = Vec::with_capacity(args.trials);
    for (trial, &s) in seeds.iter().enumerate() {
        let t0 = Instant::now();
        let (a, b) = eigcheck_trial(&args.dims, &args.orders, s);
        let opts = EigenOptions {
            restarts: args.restarts,
            seed: s,
            tol: args.tol,
            ..EigenOptions::default()
        };
        let report = verify_decoupling_with_budget(&a, &b, &opts, args.budget)?;
        out.push(EigcheckRecord {
            format_version: FORMAT_VERSION,
            kind: "eigcheck".into(),
            trial,
            seed: s,
            restarts: args.restarts,
            report,
            timings: Timings {
                total_secs: t0.elapsed().as_secs_f64(),
                ..Timings::default()
            },
        });
    }
    Ok(out)
}

pub fn cmd_eigcheck(args: &EigcheckArgs) -> Result<()> {
    let recs = eigcheck_records(args)?;
    let mut w = sink(args.out.as_deref())?;
    for r in &recs {
        write_jsonl(&mut w, r)?;
    }
    w.flush()?;
    Ok(())
}

fn noise_model(args: &SynthArgs) -> Result<NoiseModel> {
    let model = match args.model {
        ModelArg::Er => NoiseModel::Er { p: args.p },
        ModelArg::Duplication => NoiseModel::Duplication {
            frac: args.frac,
            p_edge: args.pedge,
        },
    };
    let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
    match model {
        NoiseModel::Er { p } if !(0.0..=1.0).contains(&p) => bad("--p must be in [0, 1]"),
        NoiseModel::Duplication { frac, .. } if !(frac >= 0.0 && frac.is_finite()) => {
            bad("--frac must be ≥ 0")
        }
        NoiseModel::Duplication { p_edge, .. } if !(0.0..=1.0).contains(&p_edge) => {
            bad("--pedge must be in [0, 1]")
        }
        m => Ok(m),
    }
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    if args.n == 0 {
        return Err(Error::InvalidArgument("--n must be at least 1".into()));
    }
    let model = noise_model(args)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.out_dir.join("records.jsonl"));
    let mut w = BufWriter::new(File::create(out)?);
    let seeds = derive_seeds(args.seed, args.trials);
    for (trial, &s) in seeds.iter().enumerate() {
        let p = make_problem(args.n, model, s)?;
        let stem = format!("trial{trial:03}");
        write_problem(&p, &args.out_dir, &stem)?;
        if args.run.is_empty() {
            let rec = ProblemRecord {
                format_version: FORMAT_VERSION,
                kind: "problem".into(),
                trial,
                stem,
                provenance: p.provenance.clone(),
                graph_a: GraphSummary {
                    vertices: p.graph_a.n(),
                    edges: p.graph_a.num_edges(),
                    motifs: clique_tensor(&p.graph_a, args.params.motif)?.nnz(),
                },
                graph_b: GraphSummary {
                    vertices: p.graph_b.n(),
                    edges: p.graph_b.num_edges(),
                    motifs: clique_tensor(&p.graph_b, args.params.motif)?.nnz(),
                },
            };
            write_jsonl(&mut w, &rec)?;
        }
        for spec in &args.run {
            let cfg = AlignConfig::from_args(spec.method, spec.refine, &args.params, s);
            let (mut rec, _) = run_alignment(&p.graph_a, &p.graph_b, &cfg, Some(&p.truth))?;
            rec.trial = Some(trial);
            rec.problem = Some(p.provenance.clone());
            write_jsonl(&mut w, &rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let res = match &cli.command {
        Command::Align(a) => cmd_align(a),
        Command::Eigcheck(a) => cmd_eigcheck(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knn_and_run_spec_parsing() {
        assert_eq!("auto".parse::<KnnArg>().unwrap().0, Knn::Auto);
        assert_eq!("7".parse::<KnnArg>().unwrap().0, Knn::Fixed(7));
        assert!("0".parse::<KnnArg>().is_err());
        let r: RunSpec = "lambda-tame+local-search".parse().unwrap();
        assert_eq!(r.method, Method::LambdaTame);
        assert_eq!(r.refine, RefineMode::LocalSearch);
        let r: RunSpec = "tame".parse().unwrap();
        assert_eq!(r.refine, RefineMode::None);
        assert!("tame+klau".parse::<RunSpec>().is_err());
    }

    #[test]
    fn strip_removes_only_timing() {
        let mut v = serde_json::json!({
            "a": 1, "timings": {"x": 2}, "contraction_secs": 3.0,
            "iterations": [{"lambda": 1.0, "matching_secs": 0.1}]
        });
        strip_timings(&mut v);
        assert_eq!(v, serde_json::json!({"a": 1, "iterations": [{"lambda": 1.0}]}));
    }

    #[test]
    fn alignment_pipeline_on_identical_graphs() {
        let g = crate::synth::rgg(30, 5);
        let cfg = AlignConfig {
            method: Method::LambdaTame,
            refine: RefineMode::LocalSearch,
            motif: 3,
            options: AlignOptions::default(),
            refine_options: RefineOptions::default(),
            edge_fallback: false,
            seed: 0,
        };
        let truth: Vec<usize> = (0..30).collect();
        let (rec, mt) = run_alignment(&g, &g, &cfg, Some(&truth)).unwrap();
        assert_eq!(rec.result.matched_pairs, mt.len());
        let r = rec.refinement.unwrap();
        assert!((r.motifs_after, r.edges_after) >= (r.motifs_before, r.edges_before));
        assert!(rec.result.accuracy.is_some());
    }

    #[test]
    fn edge_fallback_only_on_request() {
        let path = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let mut cfg = AlignConfig {
            method: Method::Tame,
            refine: RefineMode::None,
            motif: 3,
            options: AlignOptions::default(),
            refine_options: RefineOptions::default(),
            edge_fallback: false,
            seed: 0,
        };
        assert!(run_alignment(&path, &path, &cfg, None).is_err());
        cfg.edge_fallback = true;
        let (rec, _) = run_alignment(&path, &path, &cfg, None).unwrap();
        assert_eq!(rec.motif_order_used, 2);
    }
}
