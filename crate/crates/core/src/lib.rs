//! Spiking liquid-state-machine toolkit with paired-neuron branching-factor
//! autoregulation.
//!
//! The crate provides:
//!
//! - [`lif`]: leaky integrate-and-fire populations and spike rasters;
//! - [`topology`]: distance-based small-world reservoir generation, echo-state
//!   spectral-radius normalization, and normalized-Laplacian spectrum tooling;
//! - [`plasticity`]: the paired-neuron autoregulation rule in float and
//!   sign + 8-bit fixed-point arithmetic;
//! - [`analysis`]: branching-factor estimators, Gaussian smoothing, Poincaré
//!   pairing, and weight-trajectory statistics;
//! - [`readout`]: time-binned spike features with a batch-normalized softmax
//!   readout trained by adaptive moment estimation;
//! - [`sim`]: the step driver tying reservoir, input map and plasticity
//!   together;
//! - [`experiments`]: canned experiment recipes behind the CLI, plus the
//!   event-stream and CSV file formats ([`events`], [`io`], [`config`]).

pub mod analysis;
pub mod config;
pub mod error;
pub mod events;
pub mod experiments;
pub mod io;
pub mod lif;
pub mod plasticity;
pub mod readout;
pub mod rng;
pub mod sim;
pub mod topology;
pub mod weights;

pub use analysis::{
    branching_global, branching_local, gaussian_smooth, mean_weight_series, poincare, self_induced,
    BranchingMethod, BranchingSeries, PoincareFit, WeightSnapshot,
};
pub use error::{Error, Result};
pub use lif::{poisson_raster, step_population, LifParams, PopulationState, SpikeRaster};
pub use plasticity::{
    init_paired, pcritical_step, pcritical_step_fixed, PCriticalParams, PCriticalState, WeightMode,
};
pub use readout::{
    bin_spikes, bn_apply, bn_fit, evaluate, train_readout, BatchNorm, ReadoutModel, TrainConfig,
};
pub use sim::{PlasticWeights, Reservoir};
pub use topology::{
    build_input_map, build_positions, connection_probability, dense_spectral_radius,
    normalized_laplacian_spectrum, power_iteration_radius, sample_reservoir, search_topology_params,
    spectral_radius, spectral_radius_normalize, spectrum_kl, InputMap, ReservoirTopology,
    SearchSpace, TopologyParams,
};
pub use weights::{dequantize, quantize, QuantizedWeights, SparseWeights};
