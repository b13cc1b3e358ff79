//! End-to-end spectral partitioning and baseline comparisons.

use crate::capkmeans::{balanced_kmeans, make_capacities, Init, KMeansConfig, KMeansResult, Partition};
use crate::costmodel::{ratio, SweepRow};
use crate::dataset::Dataset;
use crate::oracle::random_partition;
use crate::simgraph::{similarity_graph, SimilarityGraph};
use crate::spectral::{default_k_prime, embed_with_tol, SpectralEmbedding, DEFAULT_TOL};
use crate::theory::objective;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SpectralConfig {
    /// `None` uses `min(8, k, n)`.
    pub k_prime: Option<usize>,
    pub seed: u64,
    pub max_iter: usize,
    pub heavy_cutoff: Option<f64>,
    pub tol: f64,
    pub init: Init,
    pub trace: bool,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            k_prime: None,
            seed: 0,
            max_iter: 100,
            heavy_cutoff: None,
            tol: DEFAULT_TOL,
            init: Init::Uniform,
            trace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralRun {
    pub graph: SimilarityGraph,
    pub embedding: SpectralEmbedding,
    pub kmeans: KMeansResult,
}

impl SpectralRun {
    pub fn partition(&self) -> &Partition {
        &self.kmeans.partition
    }
}

/// Number of batches for a target batch size: `⌈n / s⌉`, so no batch
/// exceeds `s`.
pub fn batches_for_size(n: usize, batch_size: usize) -> Result<usize> {
    if batch_size == 0 || batch_size > n {
        return Err(Error::InvalidArgument(format!(
            "batch size {batch_size} must be in 1..={n}"
        )));
    }
    Ok(n.div_ceil(batch_size))
}

/// Embedding plus capacity-constrained k-means on a prebuilt graph.
pub fn spectral_on_graph(
    graph: &SimilarityGraph,
    k: usize,
    cfg: &SpectralConfig,
) -> Result<(SpectralEmbedding, KMeansResult)> {
    let n = graph.num_vertices();
    let capacities = make_capacities(n, k)?;
    let k_prime = cfg.k_prime.unwrap_or_else(|| default_k_prime(k, n));
    let embedding = embed_with_tol(graph, k_prime, cfg.seed, cfg.tol)?;
    let kmeans = balanced_kmeans(
        &embedding.points,
        &capacities,
        &KMeansConfig {
            seed: cfg.seed,
            max_iter: cfg.max_iter,
            trace: cfg.trace,
            init: cfg.init,
        },
    )?;
    Ok((embedding, kmeans))
}

/// Graph, embedding and clustering for `k` batches.
pub fn spectral_partition(dataset: &Dataset, k: usize, cfg: &SpectralConfig) -> Result<SpectralRun> {
    let graph = similarity_graph(dataset, cfg.heavy_cutoff);
    let (embedding, kmeans) = spectral_on_graph(&graph, k, cfg)?;
    Ok(SpectralRun {
        graph,
        embedding,
        kmeans,
    })
}

/// Mean and population standard deviation of a sample.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Objectives of random partitions for seeds `base_seed..base_seed+count`.
pub fn random_objectives(dataset: &Dataset, k: usize, base_seed: u64, count: usize) -> Result<Vec<u64>> {
    (0..count as u64)
        .map(|s| objective(dataset, &random_partition(dataset.len(), k, base_seed.wrapping_add(s))?))
        .collect()
}

fn sweep_row(
    dataset: &Dataset,
    axis: &'static str,
    value: usize,
    k: usize,
    cfg: &SpectralConfig,
    random_seeds: usize,
) -> Result<SweepRow> {
    let run = spectral_partition(dataset, k, cfg)?;
    let spectral = objective(dataset, run.partition())?;
    let randoms: Vec<f64> = random_objectives(dataset, k, cfg.seed, random_seeds)?
        .into_iter()
        .map(|o| o as f64)
        .collect();
    let (mean, std) = mean_std(&randoms);
    Ok(SweepRow {
        axis,
        value,
        k,
        spectral_objective: spectral,
        random_mean_objective: mean,
        random_std_objective: std,
        speedup: ratio(mean, spectral as f64),
    })
}

/// Knowledge-only speedup of spectral over random for each batch size.
pub fn sweep_batch_sizes(
    dataset: &Dataset,
    batch_sizes: &[usize],
    cfg: &SpectralConfig,
    random_seeds: usize,
) -> Result<Vec<SweepRow>> {
    if batch_sizes.is_empty() {
        return Err(Error::InvalidArgument("empty sweep axis".into()));
    }
    batch_sizes
        .iter()
        .map(|&s| {
            let k = batches_for_size(dataset.len(), s)?;
            sweep_row(dataset, "batch_size", s, k, cfg, random_seeds)
        })
        .collect()
}

/// Same, truncating every description set to its first `cap` IDs.
pub fn sweep_description_caps(
    dataset: &Dataset,
    caps: &[usize],
    k: usize,
    cfg: &SpectralConfig,
    random_seeds: usize,
) -> Result<Vec<SweepRow>> {
    if caps.is_empty() {
        return Err(Error::InvalidArgument("empty sweep axis".into()));
    }
    caps.iter()
        .map(|&cap| sweep_row(&dataset.truncated(cap), "description_cap", cap, k, cfg, random_seeds))
        .collect()
}
