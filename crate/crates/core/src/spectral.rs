//! Spectral embedding of the similarity graph.
//!
//! Follows the Ng–Jordan–Weiss construction: take the eigenvectors of the
//! `k'` algebraically largest eigenvalues of `L = D^-1/2 W D^-1/2`, stack them
//! as columns and normalize every row to unit length. Zero-degree vertices use
//! `d^-1/2 = 0` and get all-zero rows.
//!
//! Small graphs (`n <= DENSE_LIMIT`) go through a dense tridiagonal solver.
//! Larger ones use a thick-restarted block Lanczos iteration with full
//! reorthogonalization; the block size equals `k'` so eigenvalues with
//! multiplicity up to `k'` (disconnected clusters) are found.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::{dot, norm, symmetric_eigen, Matrix};
use crate::simgraph::SimilarityGraph;
use crate::{Error, Result};

/// Largest dimension handled by the dense solver.
pub const DENSE_LIMIT: usize = 512;

/// Default residual tolerance `‖Lv − λv‖₂`.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Default embedding dimension `k'`.
pub const DEFAULT_K_PRIME: usize = 8;

// Eigenvalues closer than this are treated as one degenerate eigenspace.
const DEGENERACY_TOL: f64 = 1e-10;

const MAX_RESTARTS: usize = 500;

/// A symmetric linear operator on `R^n`.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn to_dense(&self) -> Matrix {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
            e[j] = 0.0;
        }
        m
    }
}

impl SymmetricOperator for Matrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut()
            .enumerate()
            .for_each(|(i, yi)| *yi = dot(self.row(i), x));
    }

    fn to_dense(&self) -> Matrix {
        self.clone()
    }
}

/// Sparse `D^-1/2 W D^-1/2`.
#[derive(Debug, Clone)]
pub struct NormalizedAffinity {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    inv_sqrt_degree: Vec<f64>,
}

impl NormalizedAffinity {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        let range = self.offsets[i]..self.offsets[i + 1];
        match self.cols[range.clone()].binary_search(&(j as u32)) {
            Ok(p) => self.vals[range.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn is_isolated(&self, i: usize) -> bool {
        self.inv_sqrt_degree[i] == 0.0
    }
}

impl SymmetricOperator for NormalizedAffinity {
    fn dim(&self) -> usize {
        self.inv_sqrt_degree.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let range = self.offsets[i]..self.offsets[i + 1];
            *yi = self.cols[range.clone()]
                .iter()
                .zip(&self.vals[range])
                .map(|(&j, &v)| v * x[j as usize])
                .sum();
        });
    }
}

pub fn normalized_affinity(graph: &SimilarityGraph) -> NormalizedAffinity {
    let n = graph.num_vertices();
    let inv_sqrt_degree: Vec<f64> = graph
        .degrees()
        .iter()
        .map(|&d| if d == 0 { 0.0 } else { 1.0 / (d as f64).sqrt() })
        .collect();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for i in 0..n {
        for (j, w) in graph.neighbors(i) {
            cols.push(j as u32);
            vals.push(w as f64 * inv_sqrt_degree[i] * inv_sqrt_degree[j]);
        }
        offsets.push(cols.len());
    }
    NormalizedAffinity {
        offsets,
        cols,
        vals,
        inv_sqrt_degree,
    }
}

/// Eigenvalues in descending order with eigenvectors as matrix columns.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    /// Largest `‖Av − λv‖₂` over the returned pairs.
    pub max_residual: f64,
}

/// The `k_prime` algebraically largest eigenpairs of a symmetric operator.
///
/// Eigenvectors are orthonormal. Within a degenerate eigenvalue group the
/// basis is canonicalized (projections of unit vectors taken in vertex order),
/// and each vector's largest-magnitude entry is made positive.
pub fn top_eigenpairs<A: SymmetricOperator + ?Sized>(
    op: &A,
    k_prime: usize,
    tol: f64,
    seed: u64,
) -> Result<Eigenpairs> {
    let n = op.dim();
    if k_prime == 0 || k_prime > n {
        return Err(Error::InvalidArgument(format!(
            "k_prime={k_prime} must be in 1..={n}"
        )));
    }
    let (values, vectors) = if n <= DENSE_LIMIT {
        let (vals, vecs) = symmetric_eigen(&op.to_dense());
        let cols: Vec<Vec<f64>> = (0..k_prime).map(|k| vecs.column(k)).collect();
        (vals[..k_prime].to_vec(), cols)
    } else {
        block_lanczos(op, k_prime, tol, seed)?
    };
    let (values, vectors) = canonicalize(op, values, vectors);
    let max_residual = values
        .iter()
        .zip(&vectors)
        .map(|(&lambda, v)| residual(op, lambda, v))
        .fold(0.0, f64::max);
    if max_residual > tol {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: max_residual,
            tol,
        });
    }
    let mut mat = Matrix::zeros(n, k_prime);
    for (k, v) in vectors.iter().enumerate() {
        for (i, &x) in v.iter().enumerate() {
            mat.set(i, k, x);
        }
    }
    Ok(Eigenpairs {
        values,
        vectors: mat,
        max_residual,
    })
}

fn residual<A: SymmetricOperator + ?Sized>(op: &A, lambda: f64, v: &[f64]) -> f64 {
    let mut av = vec![0.0; v.len()];
    op.apply(v, &mut av);
    av.iter()
        .zip(v)
        .map(|(a, x)| (a - lambda * x) * (a - lambda * x))
        .sum::<f64>()
        .sqrt()
}

// Orthogonalizes `w` against `basis` (two classical Gram-Schmidt passes) and
// returns its remaining norm.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.par_iter().map(|v| dot(v, w)).collect();
        w.par_iter_mut().enumerate().for_each(|(i, wi)| {
            let mut s = 0.0;
            for (v, c) in basis.iter().zip(&coeffs) {
                s += c * v[i];
            }
            *wi -= s;
        });
    }
    norm(w)
}

// Appends `candidates` to `basis` after orthonormalization. A candidate that
// collapses (breakdown) is replaced by a fresh random direction.
fn extend_basis(basis: &mut Vec<Vec<f64>>, candidates: Vec<Vec<f64>>, rng: &mut ChaCha8Rng) {
    let n = candidates.first().map_or(0, Vec::len);
    for mut w in candidates {
        if basis.len() >= n {
            return;
        }
        let mut before = norm(&w);
        let mut after = orthogonalize(&mut w, basis);
        let mut attempts = 0;
        while after.is_nan() || after <= 1e-6 * before {
            attempts += 1;
            if attempts > 8 {
                return;
            }
            w = random_vector(n, rng);
            before = norm(&w);
            after = orthogonalize(&mut w, basis);
        }
        let inv = 1.0 / after;
        w.iter_mut().for_each(|x| *x *= inv);
        basis.push(w);
    }
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn apply_all<A: SymmetricOperator + ?Sized>(op: &A, vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    vs.iter()
        .map(|v| {
            let mut y = vec![0.0; v.len()];
            op.apply(v, &mut y);
            y
        })
        .collect()
}

// Linear combinations `Σ_p basis[p] * coeffs[p][c]` for columns `c` in `cols`.
fn combine(basis: &[Vec<f64>], coeffs: &Matrix, cols: usize) -> Vec<Vec<f64>> {
    let n = basis[0].len();
    (0..cols)
        .into_par_iter()
        .map(|c| {
            let mut out = vec![0.0; n];
            for (p, v) in basis.iter().enumerate() {
                let s = coeffs.get(p, c);
                if s != 0.0 {
                    out.iter_mut().zip(v).for_each(|(o, x)| *o += s * x);
                }
            }
            out
        })
        .collect()
}

fn block_lanczos<A: SymmetricOperator + ?Sized>(
    op: &A,
    k_prime: usize,
    tol: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = op.dim();
    let block = k_prime;
    let max_basis = n.min(10 * k_prime + 100).max(2 * block);
    let keep = ((max_basis - block) / 2).max(k_prime).min(max_basis - block);
    let mut rng = crate::seeded_rng(seed, crate::streams::LANCZOS);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    extend_basis(
        &mut basis,
        (0..block).map(|_| random_vector(n, &mut rng)).collect(),
        &mut rng,
    );
    let mut images = apply_all(op, &basis);
    let mut last_block = 0..basis.len();
    let mut best_residual = f64::INFINITY;
    let mut matvecs = basis.len();

    for _restart in 0..MAX_RESTARTS {
        // Krylov expansion with the image of the most recent block.
        while basis.len() + block <= max_basis && basis.len() < n {
            let candidates: Vec<Vec<f64>> = images[last_block.clone()].to_vec();
            let start = basis.len();
            extend_basis(&mut basis, candidates, &mut rng);
            if basis.len() == start {
                break;
            }
            images.extend(apply_all(op, &basis[start..]));
            matvecs += basis.len() - start;
            last_block = start..basis.len();
        }

        // Rayleigh–Ritz on the current basis.
        let m = basis.len();
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|p| (0..m).map(|q| dot(&basis[p], &images[q])).collect())
            .collect();
        let mut h = Matrix::zeros(m, m);
        for p in 0..m {
            for q in 0..m {
                h.set(p, q, 0.5 * (rows[p][q] + rows[q][p]));
            }
        }
        let (theta, s) = symmetric_eigen(&h);
        let kept = keep.min(m);
        let ritz = combine(&basis, &s, kept);
        let ritz_images = combine(&images, &s, kept);
        let residuals: Vec<Vec<f64>> = ritz
            .par_iter()
            .zip(&ritz_images)
            .zip(&theta[..kept])
            .map(|((y, ay), &t)| ay.iter().zip(y).map(|(a, x)| a - t * x).collect())
            .collect();
        let norms: Vec<f64> = residuals.iter().map(|r| norm(r)).collect();
        let worst = norms[..k_prime].iter().copied().fold(0.0, f64::max);
        best_residual = best_residual.min(worst);
        if worst <= 0.5 * tol || m >= n {
            return Ok((theta[..k_prime].to_vec(), ritz[..k_prime].to_vec()));
        }

        // Thick restart: keep the leading Ritz vectors and continue from the
        // residuals of the unconverged ones.
        let next: Vec<Vec<f64>> = residuals
            .into_iter()
            .zip(&norms)
            .filter(|(_, &r)| r > 0.5 * tol)
            .map(|(r, _)| r)
            .take(block)
            .collect();
        basis = ritz;
        images = ritz_images;
        let start = basis.len();
        let mut next = next;
        while next.len() < block {
            next.push(random_vector(n, &mut rng));
        }
        extend_basis(&mut basis, next, &mut rng);
        images.extend(apply_all(op, &basis[start..]));
        matvecs += basis.len() - start;
        last_block = start..basis.len();
    }
    Err(Error::NoConvergence {
        iterations: matvecs,
        residual: best_residual,
        tol,
    })
}

// Deterministic basis inside degenerate eigenspaces, then sign fixing.
fn canonicalize<A: SymmetricOperator + ?Sized>(
    op: &A,
    mut values: Vec<f64>,
    mut vectors: Vec<Vec<f64>>,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = op.dim();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[start] - values[end]).abs() <= DEGENERACY_TOL {
            end += 1;
        }
        if end - start > 1 {
            let group: Vec<Vec<f64>> = vectors[start..end].to_vec();
            let g = group.len();
            let mut chosen: Vec<Vec<f64>> = Vec::with_capacity(g);
            for i in 0..n {
                if chosen.len() == g {
                    break;
                }
                // P e_i = Σ_k v_k v_k[i]
                let mut c = vec![0.0; n];
                for v in &group {
                    let s = v[i];
                    if s != 0.0 {
                        c.iter_mut().zip(v).for_each(|(o, x)| *o += s * x);
                    }
                }
                if norm(&c) < 1e-4 {
                    continue;
                }
                let r = orthogonalize(&mut c, &chosen);
                if r > 1e-4 {
                    c.iter_mut().for_each(|x| *x /= r);
                    chosen.push(c);
                }
            }
            if chosen.len() == g {
                let mut av = vec![0.0; n];
                for (k, v) in chosen.into_iter().enumerate() {
                    op.apply(&v, &mut av);
                    values[start + k] = dot(&v, &av);
                    vectors[start + k] = v;
                }
            }
        }
        start = end;
    }
    for v in &mut vectors {
        let mut pivot = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    (values, vectors)
}

/// Row-normalized spectral features.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    /// `n × k'`; row `i` is the feature of sample `i`.
    pub points: Matrix,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub k_prime: usize,
}

impl SpectralEmbedding {
    pub fn n(&self) -> usize {
        self.points.rows()
    }

    /// Writes `n` CSV rows of `k'` columns.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for i in 0..self.n() {
            wtr.write_record(self.points.row(i).iter().map(|x| format!("{x:.17e}")))?;
        }
        wtr.flush().map_err(|e| Error::io("<embedding>", e))?;
        Ok(())
    }
}

/// `min(8, k, n)`.
pub fn default_k_prime(k: usize, n: usize) -> usize {
    DEFAULT_K_PRIME.min(k).min(n).max(1)
}

pub fn embed(graph: &SimilarityGraph, k_prime: usize, seed: u64) -> Result<SpectralEmbedding> {
    embed_with_tol(graph, k_prime, seed, DEFAULT_TOL)
}

pub fn embed_with_tol(
    graph: &SimilarityGraph,
    k_prime: usize,
    seed: u64,
    tol: f64,
) -> Result<SpectralEmbedding> {
    let n = graph.num_vertices();
    let op = normalized_affinity(graph);
    let pairs = top_eigenpairs(&op, k_prime, tol, seed)?;
    let mut points = pairs.vectors;
    for i in 0..n {
        let row = points.row_mut(i);
        let r = norm(row);
        if op.is_isolated(i) || r < 1e-12 {
            row.iter_mut().for_each(|x| *x = 0.0);
        } else {
            row.iter_mut().for_each(|x| *x /= r);
        }
    }
    Ok(SpectralEmbedding {
        points,
        eigenvalues: pairs.values,
        k_prime,
    })
}
