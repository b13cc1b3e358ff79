//! Objective, bounds and identities for a batch partition.
//!
//! * objective: `Σ_b |∪_{x∈B_b} T(x)|`, the number of description encodings.
//! * mean pairwise intersection of a batch: inner edge weight · `2/(s(s−1))`.
//! * upper bound: `Σ_b [Σ_{x∈B_b}|T(x)| − c_b · mean pairwise intersection]`
//!   with `c_b = s_b − 1` (valid) or `c_b = s_b` (the tighter published form,
//!   which can fail).
//! * cut identity: for uniform `s`, the summed mean intersections equal
//!   `2(total − cut)/(s(s−1))`.

use serde::Serialize;

use crate::capkmeans::{KMeansTrace, Partition};
use crate::dataset::Dataset;
use crate::simgraph::{cut_weight, inner_weights, SimilarityGraph};
use crate::{Error, Result};

/// Multiplier of the mean pairwise intersection in the upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundCoefficient {
    /// `s_b`
    #[serde(rename = "paper_s")]
    PaperS,
    /// `s_b − 1`
    #[serde(rename = "corrected_s_minus_1")]
    CorrectedSMinus1,
}

impl BoundCoefficient {
    fn factor(self, size: usize) -> f64 {
        match self {
            BoundCoefficient::PaperS => size as f64,
            BoundCoefficient::CorrectedSMinus1 => size.saturating_sub(1) as f64,
        }
    }
}

fn check(dataset: &Dataset, partition: &Partition) -> Result<()> {
    if dataset.len() != partition.n() {
        return Err(Error::SizeMismatch {
            expected: dataset.len(),
            partition: partition.n(),
        });
    }
    Ok(())
}

/// Distinct description count of every batch.
pub fn per_batch_distinct(dataset: &Dataset, partition: &Partition) -> Result<Vec<u64>> {
    check(dataset, partition)?;
    let m = dataset.num_descriptions();
    // Stamp array instead of per-batch hash sets: stamp[t] == b+1 marks t seen in b.
    let mut stamp = vec![0usize; m];
    Ok(partition
        .batches()
        .iter()
        .enumerate()
        .map(|(b, members)| {
            let mut count = 0u64;
            for &i in members {
                for &t in dataset.descriptions(i) {
                    if stamp[t as usize] != b + 1 {
                        stamp[t as usize] = b + 1;
                        count += 1;
                    }
                }
            }
            count
        })
        .collect())
}

/// Total number of description encodings the partition requires.
pub fn objective(dataset: &Dataset, partition: &Partition) -> Result<u64> {
    Ok(per_batch_distinct(dataset, partition)?.iter().sum())
}

fn mean_pairwise(inner: u64, size: usize) -> f64 {
    if size < 2 {
        0.0
    } else {
        inner as f64 * 2.0 / (size as f64 * (size as f64 - 1.0))
    }
}

/// Sum over batches of the mean pairwise intersection within the batch.
pub fn mean_intersection_sum(graph: &SimilarityGraph, partition: &Partition) -> Result<f64> {
    let inner = inner_weights(graph, partition)?;
    Ok(inner
        .iter()
        .zip(partition.capacities())
        .map(|(&w, &s)| mean_pairwise(w, s))
        .sum())
}

/// Upper bound on the objective from pairwise intersections.
pub fn upper_bound(
    dataset: &Dataset,
    graph: &SimilarityGraph,
    partition: &Partition,
    coefficient: BoundCoefficient,
) -> Result<f64> {
    check(dataset, partition)?;
    let inner = inner_weights(graph, partition)?;
    let mut set_sizes = vec![0u64; partition.k()];
    for (i, &b) in partition.assignment().iter().enumerate() {
        set_sizes[b] += dataset.descriptions(i).len() as u64;
    }
    Ok(set_sizes
        .iter()
        .zip(&inner)
        .zip(partition.capacities())
        .map(|((&sum, &w), &s)| sum as f64 - coefficient.factor(s) * mean_pairwise(w, s))
        .sum())
}

/// Both sides of the cut identity for a uniform batch size `s`:
/// `(mean_intersection_sum, 2(total − cut)/(s(s−1)))`.
pub fn cut_identity(graph: &SimilarityGraph, partition: &Partition) -> Result<(f64, f64)> {
    let s = partition.uniform_size().ok_or(Error::NonUniformBatches)?;
    let lhs = mean_intersection_sum(graph, partition)?;
    let w = cut_weight(graph, partition)?;
    let inner_total = graph.total_pairwise_weight() - w;
    let rhs = if s < 2 {
        0.0
    } else {
        2.0 * inner_total as f64 / (s as f64 * (s as f64 - 1.0))
    };
    Ok((lhs, rhs))
}

/// Pearson correlation of two equally long series.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 3 paired points, got {}",
            xs.len().min(ys.len())
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Objective of every trace snapshot.
pub fn trace_objectives(trace: &KMeansTrace, dataset: &Dataset) -> Result<Vec<u64>> {
    trace
        .records
        .iter()
        .map(|r| objective(dataset, &r.partition))
        .collect()
}

/// Correlation between mean centroid distance and objective across iterations.
pub fn correlation(trace: &KMeansTrace, dataset: &Dataset) -> Result<f64> {
    let distances: Vec<f64> = trace
        .records
        .iter()
        .map(|r| r.mean_centroid_distance)
        .collect();
    let objectives: Vec<f64> = trace_objectives(trace, dataset)?
        .into_iter()
        .map(|o| o as f64)
        .collect();
    pearson(&distances, &objectives)
}

/// Everything known about one partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub objective: u64,
    pub per_batch_distinct: Vec<u64>,
    pub sum_set_sizes: u64,
    #[serde(rename = "theorem1_bound")]
    pub upper_bound: f64,
    pub coefficient: BoundCoefficient,
    /// The bound under the other coefficient, for comparison.
    #[serde(rename = "theorem1_bound_alt")]
    pub upper_bound_alt: f64,
    #[serde(rename = "eq5_value")]
    pub mean_intersection_sum: f64,
    pub cut_weight: u64,
    pub inner_weight: u64,
    pub total_pairwise_weight: u64,
}

pub fn report(
    dataset: &Dataset,
    graph: &SimilarityGraph,
    partition: &Partition,
    coefficient: BoundCoefficient,
) -> Result<PartitionReport> {
    let per_batch = per_batch_distinct(dataset, partition)?;
    let cut = cut_weight(graph, partition)?;
    let alt = match coefficient {
        BoundCoefficient::PaperS => BoundCoefficient::CorrectedSMinus1,
        BoundCoefficient::CorrectedSMinus1 => BoundCoefficient::PaperS,
    };
    Ok(PartitionReport {
        objective: per_batch.iter().sum(),
        per_batch_distinct: per_batch,
        sum_set_sizes: dataset.sum_set_sizes(),
        upper_bound: upper_bound(dataset, graph, partition, coefficient)?,
        coefficient,
        upper_bound_alt: upper_bound(dataset, graph, partition, alt)?,
        mean_intersection_sum: mean_intersection_sum(graph, partition)?,
        cut_weight: cut,
        inner_weight: graph.total_pairwise_weight() - cut,
        total_pairwise_weight: graph.total_pairwise_weight(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capkmeans::TraceRecord;
    use crate::simgraph::similarity_graph;

    fn fixture() -> Dataset {
        Dataset::from_sets(vec![vec![1, 2], vec![1, 2], vec![3, 4], vec![3]])
    }

    fn good() -> Partition {
        Partition::from_batches(&[vec![0, 1], vec![2, 3]]).unwrap()
    }

    fn bad() -> Partition {
        Partition::from_batches(&[vec![0, 2], vec![1, 3]]).unwrap()
    }

    #[test]
    fn fixture_objectives() {
        let ds = fixture();
        assert_eq!(per_batch_distinct(&ds, &good()).unwrap(), vec![2, 2]);
        assert_eq!(objective(&ds, &good()).unwrap(), 4);
        assert_eq!(per_batch_distinct(&ds, &bad()).unwrap(), vec![4, 3]);
        assert_eq!(objective(&ds, &bad()).unwrap(), 7);
    }

    #[test]
    fn empty_sets_objective_zero() {
        let ds = Dataset::from_sets(vec![Vec::<u64>::new(), vec![]]);
        let p = Partition::from_batches(&[vec![0], vec![1]]).unwrap();
        assert_eq!(objective(&ds, &p).unwrap(), 0);
    }

    #[test]
    fn objective_size_mismatch() {
        let p = Partition::from_batches(&[vec![0, 1]]).unwrap();
        assert!(matches!(objective(&fixture(), &p), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn fixture_mean_intersection_sum() {
        let g = similarity_graph(&fixture(), None);
        assert_eq!(mean_intersection_sum(&g, &good()).unwrap(), 3.0);
        assert_eq!(mean_intersection_sum(&g, &bad()).unwrap(), 0.0);
        let edgeless = SimilarityGraph::from_edges(4, &[]);
        assert_eq!(mean_intersection_sum(&edgeless, &good()).unwrap(), 0.0);
    }

    #[test]
    fn singleton_batch_contributes_zero() {
        let g = similarity_graph(&fixture(), None);
        let p = Partition::from_batches(&[vec![0, 1, 2], vec![3]]).unwrap();
        // inner weight of {0,1,2} is 2, s=3 → 2·2/6
        assert!((mean_intersection_sum(&g, &p).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bound_on_identical_pair() {
        let ds = Dataset::from_sets(vec![vec![1, 2], vec![1, 2]]);
        let g = similarity_graph(&ds, None);
        let p = Partition::from_batches(&[vec![0, 1]]).unwrap();
        assert_eq!(objective(&ds, &p).unwrap(), 2);
        assert_eq!(upper_bound(&ds, &g, &p, BoundCoefficient::CorrectedSMinus1).unwrap(), 2.0);
        assert_eq!(upper_bound(&ds, &g, &p, BoundCoefficient::PaperS).unwrap(), 0.0);
    }

    #[test]
    fn bound_tight_on_disjoint_sets() {
        let ds = Dataset::from_sets(vec![vec![1], vec![2, 3], vec![4], vec![5, 6, 7]]);
        let g = similarity_graph(&ds, None);
        let p = Partition::from_batches(&[vec![0, 1], vec![2, 3]]).unwrap();
        let b = upper_bound(&ds, &g, &p, BoundCoefficient::CorrectedSMinus1).unwrap();
        assert_eq!(b, 7.0);
        assert_eq!(objective(&ds, &p).unwrap(), 7);
    }

    #[test]
    fn fixture_cut_identity() {
        let g = similarity_graph(&fixture(), None);
        assert_eq!(cut_identity(&g, &good()).unwrap(), (3.0, 3.0));
        assert_eq!(cut_identity(&g, &bad()).unwrap(), (0.0, 0.0));
        let edgeless = SimilarityGraph::from_edges(4, &[]);
        assert_eq!(cut_identity(&edgeless, &bad()).unwrap(), (0.0, 0.0));
        let mixed = Partition::from_batches(&[vec![0, 1, 2], vec![3]]).unwrap();
        assert!(matches!(cut_identity(&g, &mixed), Err(Error::NonUniformBatches)));
    }

    fn trace_of(distances: &[f64], parts: Vec<Partition>) -> KMeansTrace {
        KMeansTrace {
            records: distances
                .iter()
                .zip(parts)
                .enumerate()
                .map(|(i, (&d, p))| TraceRecord {
                    iteration: i,
                    mean_centroid_distance: d,
                    partition: p,
                })
                .collect(),
        }
    }

    #[test]
    fn pearson_perfect_line() {
        let r = pearson(&[3.0, 2.0, 1.0], &[30.0, 20.0, 10.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let r = pearson(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_trace_is_undefined() {
        let t = trace_of(&[1.0, 1.0, 1.0], vec![good(), good(), good()]);
        assert!(matches!(correlation(&t, &fixture()), Err(Error::UndefinedCorrelation(_))));
        let short = trace_of(&[1.0, 2.0], vec![good(), bad()]);
        assert!(correlation(&short, &fixture()).is_err());
    }

    #[test]
    fn trace_correlation_uses_objectives() {
        // objectives 7, 4, 7 against distances 2, 1, 2
        let t = trace_of(&[2.0, 1.0, 2.0], vec![bad(), good(), bad()]);
        assert!((correlation(&t, &fixture()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_fields_consistent() {
        let ds = fixture();
        let g = similarity_graph(&ds, None);
        let r = report(&ds, &g, &bad(), BoundCoefficient::CorrectedSMinus1).unwrap();
        assert_eq!(r.objective, 7);
        assert_eq!(r.per_batch_distinct.iter().sum::<u64>(), r.objective);
        assert_eq!(r.inner_weight + r.cut_weight, r.total_pairwise_weight);
        assert_eq!(r.sum_set_sizes, 7);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["coefficient"], "corrected_s_minus_1");
    }
}
