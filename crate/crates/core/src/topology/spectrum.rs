//! Normalized-Laplacian eigenspectra and the KL-based topology parameter
//! search.
//!
//! The connectivity is binarized and symmetrized (union of directions) before
//! `L = I - D^(-1/2) A D^(-1/2)` is assembled; degree-0 vertices contribute a
//! zero row (`L_ii = 0`), keeping the spectrum defined for sparse draws.
//! Spectra are compared as add-one-smoothed histograms over [0, 2].

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{seeded_rng, stream};
use crate::weights::SparseWeights;

use super::{sample_reservoir, TopologyParams};

/// Default histogram resolution for spectrum comparison.
pub const KL_BINS: usize = 50;

/// All `n` eigenvalues of the normalized Laplacian of the binarized,
/// undirected connectivity, sorted ascending. Each lies in [0, 2] up to
/// solver tolerance.
pub fn normalized_laplacian_spectrum(w: &SparseWeights) -> Vec<f64> {
    let n = w.n();
    let mut adj = vec![false; n * n];
    for i in 0..n {
        let (cols, mags) = w.row(i);
        for (&j, &m) in cols.iter().zip(mags) {
            if m != 0.0 && i != j as usize {
                adj[i * n + j as usize] = true;
                adj[j as usize * n + i] = true;
            }
        }
    }
    let degree: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| adj[i * n + j]).count() as f64)
        .collect();
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        if degree[i] == 0.0 {
            continue; // isolated vertex: zero row by convention
        }
        lap[(i, i)] = 1.0;
        for j in 0..n {
            if adj[i * n + j] {
                lap[(i, j)] = -1.0 / (degree[i] * degree[j]).sqrt();
            }
        }
    }
    let mut eigs: Vec<f64> = lap.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

fn histogram(spectrum: &[f64], n_bins: usize) -> Vec<f64> {
    let mut counts = vec![1.0_f64; n_bins]; // add-one smoothing
    for &v in spectrum {
        let idx = ((v / 2.0 * n_bins as f64).floor() as isize).clamp(0, n_bins as isize - 1);
        counts[idx as usize] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total).collect()
}

/// KL(a || b) in nats between the binned spectra.
pub fn spectrum_kl(spec_a: &[f64], spec_b: &[f64], n_bins: usize) -> Result<f64> {
    if spec_a.is_empty() || spec_b.is_empty() {
        return Err(Error::InvalidParameter("spectra must be nonempty".into()));
    }
    if n_bins == 0 {
        return Err(Error::InvalidParameter("n_bins must be >= 1".into()));
    }
    let p = histogram(spec_a, n_bins);
    let q = histogram(spec_b, n_bins);
    Ok(p.iter().zip(&q).map(|(&pi, &qi)| pi * (pi / qi).ln()).sum())
}

/// Uniform sampling ranges for the searched generation parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SearchSpace {
    pub s: (f64, f64),
    pub p: (f64, f64),
    pub c_max: (f64, f64),
    pub lambda: (f64, f64),
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            s: (10.0, 100.0),
            p: (0.0, 3000.0),
            c_max: (0.01, 0.3),
            lambda: (100.0, 2000.0),
        }
    }
}

/// One evaluated candidate of the random search.
#[derive(Debug, Clone)]
pub struct SearchCandidate {
    pub params: TopologyParams,
    pub kl: f64,
}

/// Random search over (s, p, C, lambda) with the grid shape held fixed.
/// Each candidate is scored by `KL(reference || candidate spectrum)`.
/// Returns every candidate in evaluation order plus the index of the best.
pub fn search_topology_params(
    reference: &[f64],
    space: &SearchSpace,
    base: &TopologyParams,
    budget: usize,
    seed: u64,
) -> Result<(Vec<SearchCandidate>, usize)> {
    if budget == 0 {
        return Err(Error::InvalidParameter("search budget must be >= 1".into()));
    }
    if reference.is_empty() {
        return Err(Error::InvalidParameter("reference spectrum must be nonempty".into()));
    }
    let mut rng = seeded_rng(seed, stream::SEARCH);
    let mut candidates = Vec::with_capacity(budget);
    let mut best = 0usize;
    for k in 0..budget {
        let params = TopologyParams {
            s: rng.gen_range(space.s.0..space.s.1),
            p: rng.gen_range(space.p.0..space.p.1),
            c_max: rng.gen_range(space.c_max.0..space.c_max.1),
            lambda: rng.gen_range(space.lambda.0..space.lambda.1),
            ..base.clone()
        };
        let topo_seed = rng.gen::<u64>();
        let topo = sample_reservoir(&params, topo_seed)?;
        let spectrum = normalized_laplacian_spectrum(&topo.weights);
        let kl = spectrum_kl(reference, &spectrum, KL_BINS)?;
        candidates.push(SearchCandidate { params, kl });
        if candidates[k].kl < candidates[best].kl {
            best = k;
        }
    }
    Ok((candidates, best))
}
