//! `batchcut` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::capkmeans::Init;
use crate::dataset::{generate_planted, load_dataset, match_triggers, write_dataset, Dataset, PlantedConfig, TriggerLexicon};
use crate::oracle::{brute_force_optimal, greedy_partition, random_partition};
use crate::pipeline::{batches_for_size, mean_std, spectral_partition, sweep_batch_sizes, sweep_description_caps, SpectralConfig};
use crate::simgraph::{cut_weight, similarity_graph, SimilarityGraph};
use crate::spectral::{default_k_prime, DEFAULT_TOL};
use crate::theory::{correlation, report, trace_objectives, upper_bound, BoundCoefficient, PartitionReport};
use crate::{costmodel, Error, Partition};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "BATCHCUT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "batchcut", version, about = "Group samples that share knowledge descriptions into equal-size batches")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral partition of a dataset; writes partition and report JSON.
    Partition(PartitionArgs),
    /// Compare spectral, random, greedy and exhaustive partitioners.
    Compare(CompareArgs),
    /// Per-iteration centroid distance and objective of one clustering run.
    Trace(TraceArgs),
    /// Speedup of spectral over random across batch sizes or description caps.
    Sweep(SweepArgs),
    /// Write a synthetic planted-cluster dataset.
    Generate(GenerateArgs),
    /// Build a dataset from raw texts and a trigger lexicon.
    Retrieve(RetrieveArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct BatchArgs {
    /// Number of batches.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: Option<u64>,
    /// Target batch size; the batch count is ⌈n / size⌉.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: Option<u64>,
}

impl BatchArgs {
    fn resolve(&self, n: usize) -> anyhow::Result<usize> {
        let k = match (self.k, self.batch_size) {
            (Some(k), _) => k as usize,
            (None, Some(s)) => batches_for_size(n, s as usize)?,
            (None, None) => unreachable!("clap enforces one of --k/--batch-size"),
        };
        if k > n {
            bail!("k={k} exceeds the number of samples ({n})");
        }
        Ok(k)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitArg {
    Uniform,
    Plusplus,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    /// Embedding dimension (default min(8, k, n)).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k_prime: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iter: u64,
    /// Skip descriptions held by more than this fraction of samples when
    /// building the graph.
    #[arg(long, value_parser = parse_fraction)]
    pub heavy_cutoff: Option<f64>,
    /// Eigenpair residual tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub eig_tol: f64,
    #[arg(long, value_enum, default_value_t = InitArg::Uniform)]
    pub init: InitArg,
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1]"))
    }
}

impl ClusterArgs {
    fn config(&self, k: usize, n: usize, trace: bool, err: &mut dyn Write) -> SpectralConfig {
        let k_prime = match self.k_prime {
            Some(kp) if kp as usize > n => {
                let _ = writeln!(err, "warning: --k-prime {kp} exceeds n={n}; clamped to {n}");
                n
            }
            Some(kp) => kp as usize,
            None => default_k_prime(k, n),
        };
        SpectralConfig {
            k_prime: Some(k_prime),
            seed: self.seed,
            max_iter: self.max_iter as usize,
            heavy_cutoff: self.heavy_cutoff,
            tol: self.eig_tol,
            init: match self.init {
                InitArg::Uniform => Init::Uniform,
                InitArg::Plusplus => Init::PlusPlus,
            },
            trace,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CoefficientArg {
    Corrected,
    Paper,
}

impl From<CoefficientArg> for BoundCoefficient {
    fn from(c: CoefficientArg) -> Self {
        match c {
            CoefficientArg::Corrected => BoundCoefficient::CorrectedSMinus1,
            CoefficientArg::Paper => BoundCoefficient::PaperS,
        }
    }
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// JSONL dataset.
    #[arg(long, short)]
    pub input: PathBuf,
    #[command(flatten)]
    pub batches: BatchArgs,
    #[command(flatten)]
    pub cluster: ClusterArgs,
    /// Output directory for partition.json and report.json.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = CoefficientArg::Corrected)]
    pub coefficient: CoefficientArg,
    /// Also dump the similarity graph as an edge list.
    #[arg(long)]
    pub graph_out: Option<PathBuf>,
    /// Also dump the spectral embedding as CSV.
    #[arg(long)]
    pub embedding_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Spectral,
    Random,
    Greedy,
    Brute,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[command(flatten)]
    pub batches: BatchArgs,
    #[command(flatten)]
    pub cluster: ClusterArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![Method::Spectral, Method::Random, Method::Greedy, Method::Brute])]
    pub methods: Vec<Method>,
    /// Number of random-baseline seeds.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,
    /// Cost-model sentence length.
    #[arg(long, default_value_t = 64)]
    pub seq_len: u64,
    /// Cost-model hidden size.
    #[arg(long, default_value_t = 768)]
    pub hidden: u64,
    /// Write the table as CSV here.
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[command(flatten)]
    pub batches: BatchArgs,
    #[command(flatten)]
    pub cluster: ClusterArgs,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Batch sizes to sweep.
    #[arg(long, value_delimiter = ',', conflicts_with = "caps", required_unless_present = "caps")]
    pub batch_sizes: Option<Vec<usize>>,
    /// Per-sample description caps to sweep (needs --k or --batch-size).
    #[arg(long, value_delimiter = ',')]
    pub caps: Option<Vec<usize>>,
    /// Batch count for a cap sweep.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: Option<u64>,
    /// Batch size for a cap sweep.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), conflicts_with = "k")]
    pub batch_size: Option<u64>,
    #[command(flatten)]
    pub cluster: ClusterArgs,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,
    /// CSV destination; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub clusters: usize,
    #[arg(long, default_value_t = 20)]
    pub shared: usize,
    #[arg(long, default_value_t = 2)]
    pub private: usize,
    #[arg(long, default_value_t = 0.0, value_parser = parse_fraction)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSONL destination.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write the planted partition as JSON.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    /// Text file with one sample per line.
    #[arg(long)]
    pub texts: PathBuf,
    /// TSV lexicon `phrase<TAB>description_id`.
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
}

/// Parses arguments and runs a command, returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    configure_threads(err);
    let result = match cli.command {
        Command::Partition(a) => cmd_partition(&a, out, err),
        Command::Compare(a) => cmd_compare(&a, out, err),
        Command::Trace(a) => cmd_trace(&a, out, err),
        Command::Sweep(a) => cmd_sweep(&a, out, err),
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Retrieve(a) => cmd_retrieve(&a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

fn configure_threads(err: &mut dyn Write) {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                // fails harmlessly if the global pool already exists
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                let _ = writeln!(err, "warning: ignoring {THREADS_ENV}={v:?}");
            }
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Dataset> {
    load_dataset(path).with_context(|| format!("loading {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ReportJson<'a> {
    method: &'a str,
    n: usize,
    k: usize,
    k_prime: usize,
    seed: u64,
    iterations: usize,
    converged: bool,
    #[serde(flatten)]
    report: PartitionReport,
}

pub fn cmd_partition(args: &PartitionArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let dataset = load(&args.input)?;
    let n = dataset.len();
    let k = args.batches.resolve(n)?;
    let cfg = args.cluster.config(k, n, false, err);
    let run = spectral_partition(&dataset, k, &cfg)?;
    let partition = run.partition();
    let rep = report(&dataset, &run.graph, partition, args.coefficient.into())?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let partition_path = args.out.join("partition.json");
    let report_path = args.out.join("report.json");
    write_json(&partition_path, &partition.to_json(&dataset.source_ids()))?;
    write_json(
        &report_path,
        &ReportJson {
            method: "spectral",
            n,
            k,
            k_prime: run.embedding.k_prime,
            seed: cfg.seed,
            iterations: run.kmeans.iterations,
            converged: run.kmeans.converged,
            report: rep.clone(),
        },
    )?;
    if let Some(path) = &args.graph_out {
        let mut w = create(path)?;
        run.graph.write_edge_list(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = &args.embedding_out {
        run.embedding.write_csv(create(path)?)?;
    }
    writeln!(
        out,
        "n={n} k={k} k'={} objective={} cut_weight={} iterations={} -> {}",
        run.embedding.k_prime,
        rep.objective,
        rep.cut_weight,
        run.kmeans.iterations,
        args.out.display()
    )?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct CompareRow {
    method: String,
    status: String,
    runs: usize,
    objective_mean: f64,
    objective_std: f64,
    cut_weight_mean: f64,
    bound_corrected: f64,
    bound_s: f64,
    speedup_vs_random: f64,
}

impl CompareRow {
    fn skipped(method: &str, why: String) -> Self {
        CompareRow {
            method: method.into(),
            status: format!("skipped: {why}"),
            runs: 0,
            objective_mean: f64::NAN,
            objective_std: f64::NAN,
            cut_weight_mean: f64::NAN,
            bound_corrected: f64::NAN,
            bound_s: f64::NAN,
            speedup_vs_random: f64::NAN,
        }
    }
}

fn summarize(method: &str, dataset: &Dataset, graph: &SimilarityGraph, parts: &[Partition]) -> crate::Result<CompareRow> {
    let mut objs = Vec::new();
    let mut cuts = Vec::new();
    let mut corrected = Vec::new();
    let mut coef_s = Vec::new();
    for p in parts {
        objs.push(crate::theory::objective(dataset, p)? as f64);
        cuts.push(cut_weight(graph, p)? as f64);
        corrected.push(upper_bound(dataset, graph, p, BoundCoefficient::CorrectedSMinus1)?);
        coef_s.push(upper_bound(dataset, graph, p, BoundCoefficient::PaperS)?);
    }
    let (objective_mean, objective_std) = mean_std(&objs);
    Ok(CompareRow {
        method: method.into(),
        status: "ok".into(),
        runs: parts.len(),
        objective_mean,
        objective_std,
        cut_weight_mean: mean_std(&cuts).0,
        bound_corrected: mean_std(&corrected).0,
        bound_s: mean_std(&coef_s).0,
        speedup_vs_random: f64::NAN,
    })
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let dataset = load(&args.input)?;
    let n = dataset.len();
    let k = args.batches.resolve(n)?;
    let cfg = args.cluster.config(k, n, false, err);
    let graph = similarity_graph(&dataset, cfg.heavy_cutoff);
    let params = costmodel::CostParams::knowledge_only(args.seq_len, args.hidden);

    let random_parts = (0..args.seeds)
        .map(|s| random_partition(n, k, cfg.seed.wrapping_add(s)))
        .collect::<crate::Result<Vec<_>>>()?;
    let random_cost = {
        let costs = random_parts
            .iter()
            .map(|p| costmodel::partition_cost(&dataset, p, &params).map(|c| c.total as f64))
            .collect::<crate::Result<Vec<_>>>()?;
        mean_std(&costs).0
    };

    let mut methods = args.methods.clone();
    methods.dedup();
    let mut rows = Vec::new();
    for m in methods {
        let (name, parts) = match m {
            Method::Spectral => {
                let (_, km) = crate::pipeline::spectral_on_graph(&graph, k, &cfg)?;
                ("spectral", vec![km.partition])
            }
            Method::Random => ("random", random_parts.clone()),
            Method::Greedy => ("greedy", vec![greedy_partition(&dataset, k)?]),
            Method::Brute => match brute_force_optimal(&dataset, k) {
                Ok((p, _)) => ("brute", vec![p]),
                Err(e @ Error::TooLarge { .. }) => {
                    rows.push(CompareRow::skipped("brute", e.to_string()));
                    continue;
                }
                Err(e) => return Err(e.into()),
            },
        };
        let mut row = summarize(name, &dataset, &graph, &parts)?;
        let costs = parts
            .iter()
            .map(|p| costmodel::partition_cost(&dataset, p, &params).map(|c| c.total as f64))
            .collect::<crate::Result<Vec<_>>>()?;
        row.speedup_vs_random = costmodel::ratio(random_cost, mean_std(&costs).0);
        rows.push(row);
    }

    writeln!(
        out,
        "{:<9} {:>5} {:>22} {:>12} {:>14} {:>14} {:>10}",
        "method", "runs", "objective", "cut_weight", "bound(s-1)", "bound(s)", "speedup"
    )?;
    for r in &rows {
        if r.runs == 0 {
            writeln!(out, "{:<9} {}", r.method, r.status)?;
            continue;
        }
        let obj = if r.runs > 1 {
            format!("{:.3} ± {:.3}", r.objective_mean, r.objective_std)
        } else {
            format!("{}", r.objective_mean)
        };
        writeln!(
            out,
            "{:<9} {:>5} {:>22} {:>12.3} {:>14.3} {:>14.3} {:>10.4}",
            r.method, r.runs, obj, r.cut_weight_mean, r.bound_corrected, r.bound_s, r.speedup_vs_random
        )?;
    }
    if let Some(path) = &args.csv_out {
        let mut wtr = csv::Writer::from_writer(create(path)?);
        for r in &rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
    }
    Ok(())
}

pub fn cmd_trace(args: &TraceArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let dataset = load(&args.input)?;
    let n = dataset.len();
    let k = args.batches.resolve(n)?;
    let cfg = args.cluster.config(k, n, true, err);
    let run = spectral_partition(&dataset, k, &cfg)?;
    let trace = &run.kmeans.trace;
    let objectives = trace_objectives(trace, &dataset)?;
    let r = match correlation(trace, &dataset) {
        Ok(r) => format!("{r:.6}"),
        Err(Error::UndefinedCorrelation(_)) => "undefined".to_string(),
        Err(e) => return Err(e.into()),
    };
    match &args.trace_out {
        Some(path) => {
            trace.write_csv(&objectives, create(path)?)?;
            writeln!(out, "iterations={} pearson_r={r}", trace.len())?;
        }
        None => {
            trace.write_csv(&objectives, &mut *out)?;
            writeln!(err, "iterations={} pearson_r={r}", trace.len())?;
        }
    }
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let dataset = load(&args.input)?;
    let n = dataset.len();
    let seeds = args.seeds as usize;
    let rows = match (&args.batch_sizes, &args.caps) {
        (Some(sizes), None) => {
            if sizes.is_empty() || sizes.contains(&0) {
                return Err(Usage("--batch-sizes needs positive values".into()).into());
            }
            let mut cfg = args.cluster.config(n, n, false, err);
            // k' follows each row's own k unless given explicitly
            cfg.k_prime = args.cluster.k_prime.map(|kp| (kp as usize).min(n));
            sweep_batch_sizes(&dataset, sizes, &cfg, seeds)?
        }
        (None, Some(caps)) => {
            if caps.is_empty() {
                return Err(Usage("--caps needs at least one value".into()).into());
            }
            let k = match (args.k, args.batch_size) {
                (Some(k), _) => k as usize,
                (None, Some(s)) => batches_for_size(n, s as usize)?,
                (None, None) => return Err(Usage("a cap sweep needs --k or --batch-size".into()).into()),
            };
            if k > n {
                bail!("k={k} exceeds the number of samples ({n})");
            }
            let cfg = args.cluster.config(k, n, false, err);
            sweep_description_caps(&dataset, caps, k, &cfg, seeds)?
        }
        _ => return Err(anyhow!(Usage("give exactly one of --batch-sizes or --caps".into()))),
    };
    match &args.out {
        Some(path) => costmodel::write_sweep_csv(&rows, create(path)?)?,
        None => costmodel::write_sweep_csv(&rows, &mut *out)?,
    }
    Ok(())
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let (dataset, planted) = generate_planted(&PlantedConfig {
        n: args.n,
        clusters: args.clusters,
        shared_per_cluster: args.shared,
        private_per_sample: args.private,
        noise_overlap: args.noise,
        seed: args.seed,
    })?;
    let mut w = create(&args.out)?;
    write_dataset(&dataset, &mut w)?;
    w.flush()?;
    if let Some(path) = &args.truth_out {
        write_json(path, &planted.to_json(&dataset.source_ids()))?;
    }
    writeln!(out, "wrote {} samples to {}", dataset.len(), args.out.display())?;
    Ok(())
}

pub fn cmd_retrieve(args: &RetrieveArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let lexicon = TriggerLexicon::load(&args.lexicon)?;
    let text = fs::read_to_string(&args.texts).with_context(|| format!("reading {}", args.texts.display()))?;
    let lines: Vec<&str> = text.lines().collect();
    let dataset = match_triggers(&lines, &lexicon)?;
    let mut w = create(&args.out)?;
    write_dataset(&dataset, &mut w)?;
    w.flush()?;
    let matched = dataset.samples().iter().filter(|s| !s.descriptions.is_empty()).count();
    writeln!(out, "{matched}/{} texts matched at least one trigger", dataset.len())?;
    Ok(())
}
