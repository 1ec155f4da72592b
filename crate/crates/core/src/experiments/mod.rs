//! Canned experiment recipes: frequency sweep, branching analysis, Poincaré
//! pairing, the three-condition classification study, and the topology
//! parameter search.
//!
//! Every recipe resolves its configuration, fans trials out over the declared
//! seeds, and writes plot-ready CSV/JSON plus a `manifest.toml` echoing the
//! resolved config. Outputs contain no timestamps or machine state, so a
//! given (config, seeds) pair always produces byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{branching_global, branching_local, poincare, self_induced, smooth_series, BranchingSeries};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::events::{concatenate_samples, load_events, EventStream};
use crate::io::save_csv;
use crate::lif::{poisson_raster, SpikeRaster};
use crate::readout::{bin_spikes, evaluate, train_readout, TrainConfig};
use crate::rng::{seeded_rng, stream};
use crate::sim::{PlasticWeights, Reservoir};
use crate::topology::{build_input_map, normalized_laplacian_spectrum, sample_reservoir, search_topology_params, spectral_radius_normalize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FreqSweep,
    Branching,
    Poincare,
    Classify,
    TopologySearch,
}

#[derive(Serialize)]
struct Manifest<'a> {
    kind: ExperimentKind,
    version: &'a str,
    config: &'a ExperimentConfig,
}

fn write_manifest(dir: &Path, kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<()> {
    let manifest = Manifest {
        kind,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
    };
    let text = toml::to_string_pretty(&manifest).expect("manifest serializes");
    let path = dir.join("manifest.toml");
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

/// Sample the topology, apply the configured control transforms, and wire the
/// input map. The same trial seed reproduces the same initial topology and
/// map regardless of normalization or plasticity settings.
fn build_reservoir(cfg: &ExperimentConfig, seed: u64) -> Result<Reservoir> {
    let mut topo = sample_reservoir(&cfg.topology_params(), seed)?;
    if let Some(value) = cfg.topology.force_weight {
        topo.weights.force_magnitudes(value);
    }
    if cfg.topology.normalize {
        spectral_radius_normalize(&mut topo.weights)?;
    }
    let map = build_input_map(
        cfg.input.n_inputs,
        topo.n(),
        cfg.input.fan_out,
        cfg.w_input(),
        seed,
    )?;
    let weights = PlasticWeights::from_float(topo.weights, cfg.mode);
    Reservoir::new(weights, cfg.lif_params(), map, cfg.pcritical_params())
}

/// The input drive for continuous-activity experiments: an event file
/// concatenated in seed-shuffled order, or a Poisson raster.
fn continuous_drive(cfg: &ExperimentConfig, seed: u64, duration: u32) -> Result<SpikeRaster> {
    match &cfg.input.events_path {
        Some(path) => {
            let stream = load_events(path)?;
            if stream.n_inputs != cfg.input.n_inputs {
                return Err(Error::DimensionMismatch {
                    context: "event file width vs configured n_inputs",
                    expected: cfg.input.n_inputs,
                    actual: stream.n_inputs,
                });
            }
            let mut order: Vec<usize> = (0..stream.samples.len()).collect();
            order.shuffle(&mut seeded_rng(seed, stream::TUNING_ORDER));
            concatenate_samples(&stream, &order, cfg.input.inter_sample_gap_ms, duration)
        }
        None => poisson_raster(cfg.input.n_inputs, cfg.input.rate_hz, duration, seed),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => "nan".to_string(),
    }
}

// ---------------------------------------------------------------------------
// Frequency sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct FreqSweepTrial {
    pub rate_hz: f64,
    pub seed: u64,
    /// Mean converged weight over the final convergence window.
    pub converged: Option<f64>,
    #[serde(skip)]
    pub mean_weight: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FreqSweepSummary {
    pub trials: Vec<FreqSweepTrial>,
}

impl FreqSweepSummary {
    /// Converged mean weights for one seed, ordered like the configured rate
    /// list.
    pub fn curve_for_seed(&self, seed: u64) -> Vec<Option<f64>> {
        self.trials
            .iter()
            .filter(|t| t.seed == seed)
            .map(|t| t.converged)
            .collect()
    }

    pub fn strictly_decreasing_for_seed(&self, seed: u64) -> bool {
        let curve = self.curve_for_seed(seed);
        curve.iter().all(|c| c.is_some())
            && curve.windows(2).all(|w| w[0].unwrap() > w[1].unwrap())
    }
}

/// Drive one reservoir per (rate, seed) with Poisson input and record the
/// mean excitatory weight per step.
pub fn run_freq_sweep(cfg: &ExperimentConfig, out_dir: &Path) -> Result<FreqSweepSummary> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let duration = cfg.input.duration_ms.unwrap_or(1000);
    let window = cfg.analysis.convergence_window_ms.min(duration) as usize;

    let jobs: Vec<(f64, u64)> = cfg
        .input
        .rates
        .iter()
        .flat_map(|&rate| cfg.seeds.iter().map(move |&seed| (rate, seed)))
        .collect();

    let trials: Vec<FreqSweepTrial> = jobs
        .par_iter()
        .map(|&(rate_hz, seed)| -> Result<FreqSweepTrial> {
            let mut sim = build_reservoir(cfg, seed)?;
            let input = poisson_raster(cfg.input.n_inputs, rate_hz, duration, seed)?;
            let mut mean_weight = Vec::with_capacity(duration as usize);
            sim.run(&input, Some(&mut mean_weight))?;
            let tail: Vec<f64> = mean_weight[mean_weight.len() - window..]
                .iter()
                .filter_map(|v| *v)
                .collect();
            let converged = (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64);
            Ok(FreqSweepTrial {
                rate_hz,
                seed,
                converged,
                mean_weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for trial in &trials {
        for (t, &mw) in trial.mean_weight.iter().enumerate() {
            rows.push(vec![
                trial.rate_hz.to_string(),
                trial.seed.to_string(),
                t.to_string(),
                fmt_opt(mw),
            ]);
        }
    }
    save_csv(out_dir.join("mean_weight.csv"), &["rate_hz", "seed", "t_ms", "mean_weight"], &rows)?;

    let summary = FreqSweepSummary { trials };
    write_json(out_dir.join("summary.json"), &summary)?;
    write_manifest(out_dir, ExperimentKind::FreqSweep, cfg)?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Branching estimation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct BranchingSeedResult {
    pub seed: u64,
    /// Time-average of the smoothed global estimate past the adaptation
    /// cutoff.
    pub mean_global_smoothed: Option<f64>,
    /// Same for the topology-aware estimate.
    pub mean_local_smoothed: Option<f64>,
    #[serde(skip)]
    pub series: BranchingOutputs,
}

#[derive(Debug, Clone)]
pub struct BranchingOutputs {
    pub input_counts: Vec<usize>,
    pub self_counts: Vec<usize>,
    pub global: BranchingSeries,
    pub global_smoothed: BranchingSeries,
    pub local: BranchingSeries,
    pub local_smoothed: BranchingSeries,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchingSummary {
    pub per_seed: Vec<BranchingSeedResult>,
}

/// Reproduce the branching pipeline: drive the reservoir, subtract the mapped
/// input, restrict to excitatory neurons, and run both estimators with
/// Gaussian smoothing.
pub fn run_branching(cfg: &ExperimentConfig, out_dir: &Path) -> Result<BranchingSummary> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let duration = cfg.input.duration_ms.unwrap_or(5000);
    let cutoff = cfg.analysis.adaptation_cutoff_ms.min(duration) as usize;

    let per_seed: Vec<BranchingSeedResult> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> Result<BranchingSeedResult> {
            let mut sim = build_reservoir(cfg, seed)?;
            let adjacency = sim.weights.adjacency_out();
            let exc_mask: Vec<bool> = sim.weights.excitatory().to_vec();
            let input = continuous_drive(cfg, seed, duration)?;
            let raster = sim.run(&input, None)?;
            let mapped = sim.input_map().map_raster(&input)?;
            let self_raster = self_induced(&raster, &input, sim.input_map())?;
            let exc_raster = self_raster.restrict(&exc_mask);

            let global = branching_global(&exc_raster);
            let local = branching_local(&exc_raster, &adjacency)?;
            let global_smoothed = smooth_series(&global, cfg.analysis.smooth_sigma)?;
            let local_smoothed = smooth_series(&local, cfg.analysis.smooth_sigma)?;

            Ok(BranchingSeedResult {
                seed,
                mean_global_smoothed: global_smoothed.mean_defined_from(cutoff),
                mean_local_smoothed: local_smoothed.mean_defined_from(cutoff),
                series: BranchingOutputs {
                    input_counts: mapped.counts_per_step(),
                    self_counts: self_raster.counts_per_step(),
                    global,
                    global_smoothed,
                    local,
                    local_smoothed,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut activity_rows = Vec::new();
    let mut branching_rows = Vec::new();
    for result in &per_seed {
        let s = &result.series;
        for t in 0..s.input_counts.len() {
            activity_rows.push(vec![
                result.seed.to_string(),
                t.to_string(),
                s.input_counts[t].to_string(),
                s.self_counts[t].to_string(),
            ]);
        }
        for t in 0..s.global.values.len() {
            let cells: Vec<Option<f64>> = vec![
                s.global.values[t],
                s.global_smoothed.values[t],
                s.local.values[t],
                s.local_smoothed.values[t],
            ];
            let mut row = vec![result.seed.to_string(), t.to_string()];
            for v in cells {
                row.push(fmt_opt(v));
                row.push(if v.is_some() { "1" } else { "0" }.to_string());
            }
            branching_rows.push(row);
        }
    }
    save_csv(
        out_dir.join("activity.csv"),
        &["seed", "t_ms", "input_mapped_count", "self_induced_count"],
        &activity_rows,
    )?;
    save_csv(
        out_dir.join("branching.csv"),
        &[
            "seed",
            "t_ms",
            "global",
            "global_defined",
            "global_smoothed",
            "global_smoothed_defined",
            "local",
            "local_defined",
            "local_smoothed",
            "local_smoothed_defined",
        ],
        &branching_rows,
    )?;

    let summary = BranchingSummary { per_seed };
    write_json(out_dir.join("summary.json"), &summary)?;
    write_manifest(out_dir, ExperimentKind::Branching, cfg)?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Poincaré pairing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct PoincareSeedResult {
    pub seed: u64,
    pub slope: f64,
    pub n_bins: usize,
    pub mean_bin_count: f64,
    /// Refractory-limited ceiling for a bin count, used to flag saturation.
    pub saturation_ceiling: f64,
    pub saturated: bool,
    #[serde(skip)]
    pub pairs: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoincareSummary {
    pub per_seed: Vec<PoincareSeedResult>,
}

/// Tune over the first half of the run, then bin the post-adaptation
/// self-induced counts and fit the consecutive-count slope.
pub fn run_poincare(cfg: &ExperimentConfig, out_dir: &Path) -> Result<PoincareSummary> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let duration = cfg.input.duration_ms.unwrap_or(5000);
    let cutoff = cfg.analysis.adaptation_cutoff_ms.min(duration);
    let bin_ms = cfg.analysis.poincare_bin_ms;
    let lif = cfg.lif_params();

    let per_seed: Vec<PoincareSeedResult> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> Result<PoincareSeedResult> {
            let mut sim = build_reservoir(cfg, seed)?;
            let input = continuous_drive(cfg, seed, duration)?;
            let raster = sim.run(&input, None)?;
            let self_raster = self_induced(&raster, &input, sim.input_map())?;
            let window = self_raster.slice(cutoff, duration);
            let fit = poincare(&window, bin_ms)?;
            let n_bins = fit.pairs.len() + 1;
            let total: f64 = fit.pairs.iter().map(|p| p.0).sum::<f64>() + fit.pairs.last().map(|p| p.1).unwrap_or(0.0);
            let mean_bin_count = total / n_bins as f64;
            // Each neuron can spike at most once per (t_refrac + dt) window.
            let ceiling = window.n_neurons() as f64 * bin_ms as f64 / (lif.t_refrac + lif.dt);
            Ok(PoincareSeedResult {
                seed,
                slope: fit.slope,
                n_bins,
                mean_bin_count,
                saturation_ceiling: ceiling,
                saturated: mean_bin_count >= 0.5 * ceiling,
                pairs: fit.pairs,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for result in &per_seed {
        for (k, &(a, b)) in result.pairs.iter().enumerate() {
            rows.push(vec![
                result.seed.to_string(),
                k.to_string(),
                a.to_string(),
                b.to_string(),
            ]);
        }
    }
    save_csv(out_dir.join("pairs.csv"), &["seed", "bin", "count_t", "count_t1"], &rows)?;

    let summary = PoincareSummary { per_seed };
    write_json(out_dir.join("summary.json"), &summary)?;
    write_manifest(out_dir, ExperimentKind::Poincare, cfg)?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Classification study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// Raw sampled weights, no tuning.
    Random,
    /// Echo-state spectral-radius normalization, no plasticity.
    Normalized,
    /// Paired-neuron autoregulation tuned on the training stream.
    PCritical,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Random, Condition::Normalized, Condition::PCritical];

    pub fn name(&self) -> &'static str {
        match self {
            Condition::Random => "random",
            Condition::Normalized => "normalized",
            Condition::PCritical => "pcritical",
        }
    }

    fn apply(&self, base: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = base.clone();
        match self {
            Condition::Random => {
                cfg.plasticity.enabled = false;
                cfg.topology.normalize = false;
            }
            Condition::Normalized => {
                cfg.plasticity.enabled = false;
                cfg.topology.normalize = true;
            }
            Condition::PCritical => {
                cfg.plasticity.enabled = true;
                cfg.topology.normalize = false;
            }
        }
        cfg
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifySeedResult {
    pub seed: u64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyConditionStats {
    pub condition: Condition,
    pub mean_test_accuracy: f64,
    pub std_test_accuracy: f64,
    pub per_seed: Vec<ClassifySeedResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifySummary {
    pub n_classes: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub conditions: Vec<ClassifyConditionStats>,
}

impl ClassifySummary {
    pub fn mean_test(&self, condition: Condition) -> f64 {
        self.conditions
            .iter()
            .find(|c| c.condition == condition)
            .map(|c| c.mean_test_accuracy)
            .expect("condition present")
    }
}

struct ClassifyData {
    rasters: Vec<SpikeRaster>,
    labels: Vec<usize>,
    train_idx: Vec<usize>,
    test_idx: Vec<usize>,
    n_classes: usize,
}

fn prepare_classify_data(cfg: &ExperimentConfig, stream: &EventStream) -> Result<ClassifyData> {
    if !stream.is_labeled() {
        return Err(Error::InvalidParameter(
            "classification needs a labeled event file".into(),
        ));
    }
    let classes = stream.classes();
    let n_classes = classes.len();
    let class_index = |label: u32| classes.iter().position(|&c| c == label).unwrap();

    let mut rasters = Vec::with_capacity(stream.samples.len());
    let mut labels = Vec::with_capacity(stream.samples.len());
    for sample in &stream.samples {
        rasters.push(sample.to_raster(stream.n_inputs, stream.duration_ms)?);
        labels.push(class_index(sample.label.unwrap()));
    }

    // Per-class split in file order: the leading fraction trains.
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for class in 0..n_classes {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let n_train = ((members.len() as f64) * cfg.readout.train_fraction).ceil() as usize;
        let n_train = n_train.min(members.len().saturating_sub(1)).max(1);
        train_idx.extend_from_slice(&members[..n_train]);
        test_idx.extend_from_slice(&members[n_train..]);
    }
    if test_idx.is_empty() {
        return Err(Error::InvalidParameter(
            "train_fraction leaves no test samples".into(),
        ));
    }
    Ok(ClassifyData {
        rasters,
        labels,
        train_idx,
        test_idx,
        n_classes,
    })
}

fn extract_features(
    sim: &mut Reservoir,
    rasters: &[SpikeRaster],
    indices: &[usize],
    bin_ms: u32,
    n_bins: usize,
) -> Result<Array2<f64>> {
    let n_features = sim.n() * n_bins;
    let mut features = Array2::zeros((indices.len(), n_features));
    for (row, &idx) in indices.iter().enumerate() {
        sim.reset_state();
        let raster = sim.run(&rasters[idx], None)?;
        let feats = bin_spikes(&raster, bin_ms, n_bins)?;
        for (col, v) in feats.into_iter().enumerate() {
            features[(row, col)] = v;
        }
    }
    Ok(features)
}

/// Run the three reservoir conditions on identical inputs and seeds, train
/// the readout on each, and report per-condition accuracy statistics.
pub fn run_classify(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ClassifySummary> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let events_path = cfg
        .input
        .events_path
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("classify requires input.events_path".into()))?;
    let stream = load_events(events_path)?;
    if stream.n_inputs != cfg.input.n_inputs {
        return Err(Error::DimensionMismatch {
            context: "event file width vs configured n_inputs",
            expected: cfg.input.n_inputs,
            actual: stream.n_inputs,
        });
    }
    let data = prepare_classify_data(cfg, &stream)?;
    let n_bins = cfg
        .readout
        .n_bins
        .unwrap_or_else(|| (stream.duration_ms as usize).div_ceil(cfg.readout.bin_ms as usize));

    // seed-major, condition-minor so every condition of a seed shares the
    // identical initial topology, input map and sample rasters.
    let per_trial: Vec<Vec<ClassifySeedResult>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<ClassifySeedResult>> {
            let mut results = Vec::new();
            for condition in Condition::ALL {
                let ccfg = condition.apply(cfg);
                let mut sim = build_reservoir(&ccfg, seed)?;
                if condition == Condition::PCritical {
                    // Tune on the concatenated training stream, then freeze.
                    let mut order = data.train_idx.clone();
                    order.shuffle(&mut seeded_rng(seed, stream::TUNING_ORDER));
                    let tune_ms = (stream.duration_ms + cfg.input.inter_sample_gap_ms)
                        * (order.len() * cfg.classify.tune_passes.max(1)) as u32;
                    let tuning = concatenate_samples(&stream, &order, cfg.input.inter_sample_gap_ms, tune_ms)?;
                    sim.run(&tuning, None)?;
                    sim.freeze();
                }
                let train_x = extract_features(&mut sim, &data.rasters, &data.train_idx, cfg.readout.bin_ms, n_bins)?;
                let test_x = extract_features(&mut sim, &data.rasters, &data.test_idx, cfg.readout.bin_ms, n_bins)?;
                let train_y: Vec<usize> = data.train_idx.iter().map(|&i| data.labels[i]).collect();
                let test_y: Vec<usize> = data.test_idx.iter().map(|&i| data.labels[i]).collect();
                let train_cfg = TrainConfig {
                    epochs: cfg.readout.epochs,
                    batch_size: cfg.readout.batch_size,
                    lr: cfg.readout.lr,
                    amsgrad: cfg.readout.amsgrad,
                    weight_decay: cfg.weight_decay(),
                    learn_bn: cfg.readout.learn_bn,
                    seed,
                };
                let model = train_readout(&train_x, &train_y, data.n_classes, &train_cfg)?;
                results.push(ClassifySeedResult {
                    seed,
                    train_accuracy: evaluate(&model, &train_x, &train_y)?,
                    test_accuracy: evaluate(&model, &test_x, &test_y)?,
                });
            }
            Ok(results)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut conditions = Vec::new();
    for (k, condition) in Condition::ALL.into_iter().enumerate() {
        let per_seed: Vec<ClassifySeedResult> = per_trial.iter().map(|seed_results| seed_results[k].clone()).collect();
        let accs: Vec<f64> = per_seed.iter().map(|r| r.test_accuracy).collect();
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        let var = accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / accs.len() as f64;
        conditions.push(ClassifyConditionStats {
            condition,
            mean_test_accuracy: mean,
            std_test_accuracy: var.sqrt(),
            per_seed,
        });
    }

    let mut rows = Vec::new();
    for stats in &conditions {
        for r in &stats.per_seed {
            rows.push(vec![
                stats.condition.name().to_string(),
                r.seed.to_string(),
                r.train_accuracy.to_string(),
                r.test_accuracy.to_string(),
            ]);
        }
    }
    save_csv(
        out_dir.join("accuracy.csv"),
        &["condition", "seed", "train_accuracy", "test_accuracy"],
        &rows,
    )?;

    let summary = ClassifySummary {
        n_classes: data.n_classes,
        n_train: data.train_idx.len(),
        n_test: data.test_idx.len(),
        conditions,
    };
    write_json(out_dir.join("summary.json"), &summary)?;
    write_manifest(out_dir, ExperimentKind::Classify, cfg)?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Topology search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SearchSummary {
    pub best_index: usize,
    pub best_kl: f64,
    pub best_s: f64,
    pub best_p: f64,
    pub best_c_max: f64,
    pub best_lambda: f64,
    /// Whether the reference came from a file or was regenerated from the
    /// configured defaults.
    pub reference: String,
}

/// Random-search the generation parameters against a reference spectrum.
pub fn run_topology_search(cfg: &ExperimentConfig, out_dir: &Path) -> Result<SearchSummary> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let (reference, reference_desc) = match &cfg.search.reference_path {
        Some(path) => (crate::io::load_spectrum(path)?, format!("file:{}", path.display())),
        None => {
            let topo = sample_reservoir(&cfg.topology_params(), cfg.search.reference_seed)?;
            (
                normalized_laplacian_spectrum(&topo.weights),
                format!("generated:seed={}", cfg.search.reference_seed),
            )
        }
    };
    let base = cfg.topology_params();
    let (candidates, best) =
        search_topology_params(&reference, &cfg.search.space, &base, cfg.search.budget, cfg.seeds[0])?;

    let rows: Vec<Vec<String>> = candidates
        .iter()
        .enumerate()
        .map(|(k, c)| {
            vec![
                k.to_string(),
                c.params.s.to_string(),
                c.params.p.to_string(),
                c.params.c_max.to_string(),
                c.params.lambda.to_string(),
                c.kl.to_string(),
            ]
        })
        .collect();
    save_csv(
        out_dir.join("candidates.csv"),
        &["candidate", "s", "p", "c_max", "lambda", "kl"],
        &rows,
    )?;

    // Export the winning topology as an edge list for downstream use.
    let best_topo = sample_reservoir(&candidates[best].params, cfg.seeds[0])?;
    crate::io::save_edge_list(out_dir.join("best_topology_edges.csv"), &best_topo.weights)?;
    crate::io::save_spectrum(out_dir.join("reference_spectrum.csv"), &reference)?;

    let summary = SearchSummary {
        best_index: best,
        best_kl: candidates[best].kl,
        best_s: candidates[best].params.s,
        best_p: candidates[best].params.p,
        best_c_max: candidates[best].params.c_max,
        best_lambda: candidates[best].params.lambda,
        reference: reference_desc,
    };
    write_json(out_dir.join("summary.json"), &summary)?;
    write_manifest(out_dir, ExperimentKind::TopologySearch, cfg)?;
    Ok(summary)
}
