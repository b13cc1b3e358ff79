//! Intersection-weighted similarity graph.
//!
//! Vertices are samples; the weight of edge `(i, j)` is `|T(x_i) ∩ T(x_j)|`.
//! The graph is built from an inverted index so the cost is `O(Σ_t m_t²)`
//! where `m_t` is the number of samples holding description `t`.

use std::io::Write;

use rayon::prelude::*;

use crate::capkmeans::Partition;
use crate::dataset::Dataset;
use crate::{Error, Result};

/// Per-description posting lists of sample indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedIndex {
    postings: Vec<Vec<u32>>,
}

impl InvertedIndex {
    pub fn postings(&self, description: u32) -> &[u32] {
        &self.postings[description as usize]
    }

    pub fn num_descriptions(&self) -> usize {
        self.postings.len()
    }

    pub fn total_postings(&self) -> usize {
        self.postings.iter().map(Vec::len).sum()
    }
}

pub fn build_index(dataset: &Dataset) -> InvertedIndex {
    let mut postings = vec![Vec::new(); dataset.num_descriptions()];
    // Samples are visited in order, so every list comes out ascending.
    for s in dataset.samples() {
        for &t in &s.descriptions {
            postings[t as usize].push(s.sample_id as u32);
        }
    }
    InvertedIndex { postings }
}

/// Sparse symmetric graph in compressed-row form with integer weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityGraph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<u32>,
    degrees: Vec<u64>,
    total_pairwise_weight: u64,
}

impl SimilarityGraph {
    /// Builds a graph from an undirected edge list. Duplicate edges are summed;
    /// self-loops and zero weights are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u32)]) -> Self {
        let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i == j || w == 0 {
                continue;
            }
            adj[i].push((j as u32, w));
            adj[j].push((i as u32, w));
        }
        let rows = adj
            .into_iter()
            .map(|mut row| {
                row.sort_unstable();
                let mut merged: Vec<(u32, u32)> = Vec::with_capacity(row.len());
                for (j, w) in row {
                    match merged.last_mut() {
                        Some(last) if last.0 == j => last.1 += w,
                        _ => merged.push((j, w)),
                    }
                }
                merged
            })
            .collect();
        Self::from_rows(rows)
    }

    fn from_rows(rows: Vec<Vec<(u32, u32)>>) -> Self {
        let n = rows.len();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut neighbors = Vec::with_capacity(nnz);
        let mut weights = Vec::with_capacity(nnz);
        let mut degrees = Vec::with_capacity(n);
        for row in rows {
            let mut deg = 0u64;
            for (j, w) in row {
                neighbors.push(j);
                weights.push(w);
                deg += w as u64;
            }
            degrees.push(deg);
            offsets.push(neighbors.len());
        }
        let total_pairwise_weight = degrees.iter().sum::<u64>() / 2;
        SimilarityGraph {
            offsets,
            neighbors,
            weights,
            degrees,
            total_pairwise_weight,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.degrees.len()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// `(neighbor, weight)` pairs of vertex `i`, ascending by neighbor.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.neighbors[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .map(|(&j, &w)| (j as usize, w))
    }

    /// Weight of edge `(i, j)`, zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> u32 {
        let range = self.offsets[i]..self.offsets[i + 1];
        match self.neighbors[range.clone()].binary_search(&(j as u32)) {
            Ok(pos) => self.weights[range.start + pos],
            Err(_) => 0,
        }
    }

    pub fn degree(&self, i: usize) -> u64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// `Σ_{i<j} weight(i, j)`.
    pub fn total_pairwise_weight(&self) -> u64 {
        self.total_pairwise_weight
    }

    /// Undirected edges `(i, j, w)` with `i < j`, in row order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.num_vertices()).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&(j, _)| j > i)
                .map(move |(j, w)| (i, j, w))
        })
    }

    /// Writes a `n m` header followed by one `i j w` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.num_vertices(), self.num_edges())?;
        for (i, j, wt) in self.edges() {
            writeln!(w, "{i} {j} {wt}")?;
        }
        Ok(())
    }
}

/// Builds the similarity graph. With `heavy_cutoff = Some(f)`, descriptions
/// held by more than a fraction `f` of the samples contribute no edges.
pub fn build_graph(
    dataset: &Dataset,
    index: &InvertedIndex,
    heavy_cutoff: Option<f64>,
) -> SimilarityGraph {
    let n = dataset.len();
    let max_postings = match heavy_cutoff {
        Some(f) => (f * n as f64).floor() as usize,
        None => usize::MAX,
    };
    let rows: Vec<Vec<(u32, u32)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut hits: Vec<u32> = Vec::new();
            for &t in dataset.descriptions(i) {
                let post = index.postings(t);
                if post.len() > max_postings {
                    continue;
                }
                hits.extend(post.iter().copied().filter(|&j| j as usize != i));
            }
            hits.sort_unstable();
            let mut row: Vec<(u32, u32)> = Vec::new();
            for j in hits {
                match row.last_mut() {
                    Some(last) if last.0 == j => last.1 += 1,
                    _ => row.push((j, 1)),
                }
            }
            row
        })
        .collect();
    SimilarityGraph::from_rows(rows)
}

/// Index and graph in one call.
pub fn similarity_graph(dataset: &Dataset, heavy_cutoff: Option<f64>) -> SimilarityGraph {
    build_graph(dataset, &build_index(dataset), heavy_cutoff)
}

/// Total weight of edges whose endpoints lie in different batches.
pub fn cut_weight(graph: &SimilarityGraph, partition: &Partition) -> Result<u64> {
    check_cover(graph, partition)?;
    let a = partition.assignment();
    Ok(graph
        .edges()
        .filter(|&(i, j, _)| a[i] != a[j])
        .map(|(_, _, w)| w as u64)
        .sum())
}

/// Per-batch total weight of edges with both endpoints in the batch.
pub fn inner_weights(graph: &SimilarityGraph, partition: &Partition) -> Result<Vec<u64>> {
    check_cover(graph, partition)?;
    let a = partition.assignment();
    let mut inner = vec![0u64; partition.k()];
    for (i, j, w) in graph.edges() {
        if a[i] == a[j] {
            inner[a[i]] += w as u64;
        }
    }
    Ok(inner)
}

fn check_cover(graph: &SimilarityGraph, partition: &Partition) -> Result<()> {
    if partition.n() != graph.num_vertices() {
        return Err(Error::SizeMismatch {
            expected: graph.num_vertices(),
            partition: partition.n(),
        });
    }
    Ok(())
}
