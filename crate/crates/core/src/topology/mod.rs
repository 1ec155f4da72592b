//! Distance-based small-world reservoir topologies on a gapped 3D grid.
//!
//! Neurons sit on a Cartesian grid with spacing `s`; every `j` neurons along
//! each axis an extra gap `p` is inserted, carving the grid into dense
//! mini-reservoirs with long-range links across the gaps. An ordered pair at
//! Euclidean distance `d` is connected with probability `C * e^(-d/lambda)`.

mod spectral;
mod spectrum;

pub use spectral::{dense_spectral_radius, power_iteration_radius, spectral_radius, spectral_radius_normalize};
pub use spectrum::{normalized_laplacian_spectrum, search_topology_params, spectrum_kl, SearchSpace};

use rand::seq::index::sample as index_sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lif::SpikeRaster;
use crate::rng::{seeded_rng, stream};
use crate::weights::SparseWeights;

/// Generation parameters for one reservoir.
///
/// Grid dimensions are explicit per axis; `dims[a]` must be a multiple of the
/// group size `j[a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyParams {
    /// Neurons per axis; the population size is the product.
    pub dims: [usize; 3],
    /// Group size per axis (neurons per mini-reservoir edge).
    pub j: [usize; 3],
    /// Spacing between neighbouring neurons, grid units.
    pub s: f64,
    /// Extra gap between consecutive groups along each axis.
    pub p: f64,
    /// Maximum connection probability.
    pub c_max: f64,
    /// Euclidean distance divisor.
    pub lambda: f64,
    /// Fraction of neurons drawn as inhibitory.
    pub inhib_fraction: f64,
    /// Half-open uniform range for excitatory magnitudes.
    pub w_exc_range: (f64, f64),
    /// Half-open uniform range for inhibitory magnitudes.
    pub w_inh_range: (f64, f64),
}

impl TopologyParams {
    /// The 512-neuron default: 8x8x8 grid, groups of 4 per axis.
    pub fn default_512() -> Self {
        TopologyParams {
            dims: [8, 8, 8],
            j: [4, 4, 4],
            s: 40.0,
            p: 1460.0,
            c_max: 0.11,
            lambda: 635.0,
            inhib_fraction: 0.2,
            w_exc_range: (0.2, 0.5),
            w_inh_range: (0.1, 0.3),
        }
    }

    /// Same constants on a cubic grid of side `side` with scalar group size.
    pub fn cubic(side: usize, group: usize) -> Self {
        TopologyParams {
            dims: [side; 3],
            j: [group; 3],
            ..Self::default_512()
        }
    }

    pub fn n(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn validate(&self) -> Result<()> {
        for a in 0..3 {
            if self.dims[a] == 0 || self.j[a] == 0 {
                return Err(Error::InvalidParameter("grid dims and group sizes must be positive".into()));
            }
            if self.dims[a] % self.j[a] != 0 {
                return Err(Error::Infeasible(format!(
                    "axis {}: {} neurons not arrangeable into groups of {}",
                    a, self.dims[a], self.j[a]
                )));
            }
        }
        if !(self.c_max > 0.0 && self.c_max <= 1.0) {
            return Err(Error::InvalidParameter(format!("C must be in (0, 1], got {}", self.c_max)));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.s > 0.0) {
            return Err(Error::InvalidParameter(format!("s must be > 0, got {}", self.s)));
        }
        if !(self.p >= 0.0) {
            return Err(Error::InvalidParameter(format!("p must be >= 0, got {}", self.p)));
        }
        if !(0.0..1.0).contains(&self.inhib_fraction) {
            return Err(Error::InvalidParameter(format!(
                "inhib_fraction must be in [0, 1), got {}",
                self.inhib_fraction
            )));
        }
        for (name, (lo, hi)) in [("excitatory", self.w_exc_range), ("inhibitory", self.w_inh_range)] {
            if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} weight range [{lo}, {hi}) must satisfy 0 <= low < high <= 1"
                )));
            }
        }
        Ok(())
    }
}

impl Default for TopologyParams {
    fn default() -> Self {
        Self::default_512()
    }
}

/// A generated reservoir: positions, signed sparse weights, and the
/// parameters that produced it.
#[derive(Debug, Clone)]
pub struct ReservoirTopology {
    pub positions: Vec<[f64; 3]>,
    pub weights: SparseWeights,
    pub params: TopologyParams,
}

impl ReservoirTopology {
    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn excitatory_mask(&self) -> &[bool] {
        self.weights.excitatory()
    }
}

/// Grid positions with the inter-group gap rule: along each axis the
/// coordinate of grid index `g` is `g*s + (g / j)*p`.
pub fn build_positions(dims: [usize; 3], j: [usize; 3], s: f64, p: f64) -> Result<Vec<[f64; 3]>> {
    for a in 0..3 {
        if j[a] == 0 || dims[a] % j[a] != 0 {
            return Err(Error::Infeasible(format!(
                "axis {}: {} neurons not arrangeable into groups of {}",
                a, dims[a], j[a]
            )));
        }
    }
    let coord = |g: usize, a: usize| g as f64 * s + (g / j[a]) as f64 * p;
    let mut positions = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
    for x in 0..dims[0] {
        for y in 0..dims[1] {
            for z in 0..dims[2] {
                positions.push([coord(x, 0), coord(y, 1), coord(z, 2)]);
            }
        }
    }
    Ok(positions)
}

pub fn euclidean(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// P = C * e^(-d/lambda).
pub fn connection_probability(d: f64, c_max: f64, lambda: f64) -> f64 {
    debug_assert!(d >= 0.0);
    c_max * (-d / lambda).exp()
}

/// Sample a reservoir: inhibitory set of size `floor(inhib_fraction * n)`
/// drawn without replacement, then every ordered pair connected independently
/// with the distance law, magnitudes uniform in the per-sign range.
pub fn sample_reservoir(params: &TopologyParams, seed: u64) -> Result<ReservoirTopology> {
    params.validate()?;
    let n = params.n();
    let positions = build_positions(params.dims, params.j, params.s, params.p)?;
    let mut rng = seeded_rng(seed, stream::TOPOLOGY);

    let n_inhib = (params.inhib_fraction * n as f64).floor() as usize;
    let mut excitatory = vec![true; n];
    for idx in index_sample(&mut rng, n, n_inhib) {
        excitatory[idx] = false;
    }

    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = if excitatory[i] { params.w_exc_range } else { params.w_inh_range };
        let mut row = Vec::new();
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = euclidean(&positions[i], &positions[j]);
            let p = connection_probability(d, params.c_max, params.lambda);
            if rng.gen::<f64>() < p {
                row.push((j as u32, rng.gen_range(lo..hi)));
            }
        }
        rows.push(row);
    }

    Ok(ReservoirTopology {
        positions,
        weights: SparseWeights::from_rows(excitatory, rows),
        params: params.clone(),
    })
}

/// Fixed-weight input wiring: each input neuron drives `fan_out` reservoir
/// neurons, all targets distinct across the whole map.
#[derive(Debug, Clone, PartialEq)]
pub struct InputMap {
    targets: Vec<Vec<u32>>,
    pub w_input: f64,
    n_reservoir: usize,
}

impl InputMap {
    pub fn n_inputs(&self) -> usize {
        self.targets.len()
    }

    pub fn n_reservoir(&self) -> usize {
        self.n_reservoir
    }

    pub fn targets(&self, input: usize) -> &[u32] {
        &self.targets[input]
    }

    /// Add `w_input` to the drive of every target of every spiking input.
    pub fn accumulate(&self, input_spikes: &[u32], drive: &mut [f64]) {
        debug_assert_eq!(drive.len(), self.n_reservoir);
        for &inp in input_spikes {
            for &t in &self.targets[inp as usize] {
                drive[t as usize] += self.w_input;
            }
        }
    }

    /// Project an input raster onto reservoir indices (the forced-spike
    /// pattern used when extracting self-induced activity).
    pub fn map_raster(&self, input: &SpikeRaster) -> Result<SpikeRaster> {
        if input.n_neurons() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                context: "map_raster input width",
                expected: self.n_inputs(),
                actual: input.n_neurons(),
            });
        }
        let mut mapped = SpikeRaster::new(self.n_reservoir, input.duration_ms());
        for t in 0..input.duration_ms() {
            let mut spiking: Vec<u32> = input
                .spikes_at(t)
                .iter()
                .flat_map(|&inp| self.targets[inp as usize].iter().copied())
                .collect();
            spiking.sort_unstable();
            spiking.dedup();
            mapped.set_step(t, spiking);
        }
        Ok(mapped)
    }
}

/// Random injective input assignment. Rejected when `n_inputs * fan_out`
/// exceeds the reservoir size.
pub fn build_input_map(
    n_inputs: usize,
    n_reservoir: usize,
    fan_out: usize,
    w_input: f64,
    seed: u64,
) -> Result<InputMap> {
    if fan_out == 0 {
        return Err(Error::InvalidParameter("fan_out must be >= 1".into()));
    }
    if !(w_input > 0.0) {
        return Err(Error::InvalidParameter(format!("w_input must be > 0, got {w_input}")));
    }
    let needed = n_inputs * fan_out;
    if needed > n_reservoir {
        return Err(Error::Infeasible(format!(
            "{n_inputs} inputs with fan-out {fan_out} need {needed} distinct targets but the reservoir has {n_reservoir}"
        )));
    }
    let mut rng = seeded_rng(seed, stream::INPUT_MAP);
    let chosen = index_sample(&mut rng, n_reservoir, needed);
    let flat: Vec<u32> = chosen.iter().map(|k| k as u32).collect();
    let targets = flat.chunks(fan_out).map(|c| c.to_vec()).collect();
    Ok(InputMap {
        targets,
        w_input,
        n_reservoir,
    })
}
