//! Experiment configuration: a TOML file whose defaults are the reference
//! constants of the model. A resolved copy is echoed into every experiment's
//! output manifest, and all randomness flows from the declared seeds.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lif::LifParams;
use crate::plasticity::{PCriticalParams, WeightMode};
use crate::topology::{SearchSpace, TopologyParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: WeightMode,
    pub seeds: Vec<u64>,
    pub topology: TopologySection,
    pub lif: LifSection,
    pub plasticity: PlasticitySection,
    pub input: InputSection,
    pub analysis: AnalysisSection,
    pub readout: ReadoutSection,
    pub classify: ClassifySection,
    pub search: SearchSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: WeightMode::Float,
            seeds: vec![1, 2, 3, 4, 5],
            topology: TopologySection::default(),
            lif: LifSection::default(),
            plasticity: PlasticitySection::default(),
            input: InputSection::default(),
            analysis: AnalysisSection::default(),
            readout: ReadoutSection::default(),
            classify: ClassifySection::default(),
            search: SearchSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySection {
    pub dims: [usize; 3],
    pub j: [usize; 3],
    pub s: f64,
    pub p: f64,
    pub c_max: f64,
    pub lambda: f64,
    pub inhib_fraction: f64,
    pub w_exc_range: (f64, f64),
    pub w_inh_range: (f64, f64),
    /// Apply the echo-state normalization `W := W / rho(|W|)` after sampling.
    pub normalize: bool,
    /// Force every sampled magnitude to a fixed value (control runs).
    pub force_weight: Option<f64>,
}

impl Default for TopologySection {
    fn default() -> Self {
        let p = TopologyParams::default_512();
        TopologySection {
            dims: p.dims,
            j: p.j,
            s: p.s,
            p: p.p,
            c_max: p.c_max,
            lambda: p.lambda,
            inhib_fraction: p.inhib_fraction,
            w_exc_range: p.w_exc_range,
            w_inh_range: p.w_inh_range,
            normalize: false,
            force_weight: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifSection {
    pub tau_v: f64,
    pub tau_i: f64,
    pub v_reset: f64,
    /// Defaults to 1.0 in float mode and 256 in fixed8 mode when unset.
    pub v_th: Option<f64>,
    pub t_refrac: f64,
    pub dt: f64,
}

impl Default for LifSection {
    fn default() -> Self {
        let p = LifParams::float_default();
        LifSection {
            tau_v: p.tau_v,
            tau_i: p.tau_i,
            v_reset: p.v_reset,
            v_th: None,
            t_refrac: p.t_refrac,
            dt: p.dt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlasticitySection {
    pub enabled: bool,
    /// Defaults to 1e-2 (float) / 2 levels (fixed8) when unset.
    pub alpha: Option<f64>,
    /// Defaults to 1e-5 (float) / 0.25 levels (fixed8) when unset.
    pub beta: Option<f64>,
    pub tau_trace: f64,
    pub paired_tau_v: f64,
    pub paired_tau_i: f64,
    pub paired_t_refrac: f64,
    pub paired_vth_factor: f64,
}

impl Default for PlasticitySection {
    fn default() -> Self {
        PlasticitySection {
            enabled: true,
            alpha: None,
            beta: None,
            tau_trace: 5.0,
            paired_tau_v: 5.0,
            paired_tau_i: 0.0,
            paired_t_refrac: 2.0,
            paired_vth_factor: 1.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub n_inputs: usize,
    pub fan_out: usize,
    /// Input weight as a multiple of `v_th` (must stay above 1).
    pub w_input_factor: f64,
    /// Poisson rate for single-rate experiments.
    pub rate_hz: f64,
    /// Rate sweep for the frequency experiment.
    pub rates: Vec<f64>,
    /// Drive duration; unset falls back to each experiment's default.
    pub duration_ms: Option<u32>,
    /// Event file replacing the Poisson drive where supported.
    pub events_path: Option<PathBuf>,
    /// Gap between concatenated event samples.
    pub inter_sample_gap_ms: u32,
}

impl Default for InputSection {
    fn default() -> Self {
        InputSection {
            n_inputs: 170,
            fan_out: 1,
            w_input_factor: 5.0,
            rate_hz: 20.0,
            rates: vec![10.0, 20.0, 30.0, 40.0, 50.0],
            duration_ms: None,
            events_path: None,
            inter_sample_gap_ms: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    /// Steps discarded before convergence statistics are taken.
    pub adaptation_cutoff_ms: u32,
    pub smooth_sigma: f64,
    pub poincare_bin_ms: u32,
    /// Window at the end of a run over which the converged mean weight is
    /// averaged.
    pub convergence_window_ms: u32,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            adaptation_cutoff_ms: 2500,
            smooth_sigma: 0.7,
            poincare_bin_ms: 5,
            convergence_window_ms: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutSection {
    pub bin_ms: u32,
    /// Feature bins per sample; unset derives from the sample duration.
    pub n_bins: Option<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub amsgrad: bool,
    /// Defaults to 0 in float mode, 1e-2 in fixed8 mode when unset.
    pub weight_decay: Option<f64>,
    pub learn_bn: bool,
    /// Per-class fraction of samples used for training.
    pub train_fraction: f64,
}

impl Default for ReadoutSection {
    fn default() -> Self {
        ReadoutSection {
            bin_ms: 60,
            n_bins: None,
            epochs: 50,
            batch_size: 32,
            lr: 1e-3,
            amsgrad: false,
            weight_decay: None,
            learn_bn: true,
            train_fraction: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    /// Passes of the shuffled training stream used to tune the plastic
    /// reservoir before freezing.
    pub tune_passes: usize,
}

impl Default for ClassifySection {
    fn default() -> Self {
        ClassifySection { tune_passes: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub budget: usize,
    pub space: SearchSpace,
    pub reference_path: Option<PathBuf>,
    /// Seed for the bundled reference regeneration when no file is given.
    pub reference_seed: u64,
}

impl Default for SearchSection {
    fn default() -> Self {
        SearchSection {
            budget: 30,
            space: SearchSpace::default(),
            reference_path: None,
            reference_seed: 7,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| Error::parse(path, e.span().map(|s| line_of(&text, s.start)).unwrap_or(0), e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.topology_params().validate()?;
        self.lif_params().validate()?;
        if let Some(p) = self.pcritical_params() {
            p.validate()?;
        }
        if !(self.input.w_input_factor > 1.0) {
            return Err(Error::InvalidParameter(
                "w_input_factor must exceed 1 so any input spike forces a reservoir spike".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("at least one seed is required".into()));
        }
        if !(self.readout.train_fraction > 0.0 && self.readout.train_fraction < 1.0) {
            return Err(Error::InvalidParameter("train_fraction must be in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn topology_params(&self) -> TopologyParams {
        TopologyParams {
            dims: self.topology.dims,
            j: self.topology.j,
            s: self.topology.s,
            p: self.topology.p,
            c_max: self.topology.c_max,
            lambda: self.topology.lambda,
            inhib_fraction: self.topology.inhib_fraction,
            w_exc_range: self.topology.w_exc_range,
            w_inh_range: self.topology.w_inh_range,
        }
    }

    pub fn v_th(&self) -> f64 {
        self.lif.v_th.unwrap_or(match self.mode {
            WeightMode::Float => 1.0,
            WeightMode::Fixed8 => 256.0,
        })
    }

    pub fn lif_params(&self) -> LifParams {
        LifParams {
            tau_v: self.lif.tau_v,
            tau_i: self.lif.tau_i,
            v_reset: self.lif.v_reset,
            v_th: self.v_th(),
            t_refrac: self.lif.t_refrac,
            dt: self.lif.dt,
        }
    }

    pub fn w_input(&self) -> f64 {
        self.input.w_input_factor * self.v_th()
    }

    /// Plasticity parameters, or `None` when disabled.
    pub fn pcritical_params(&self) -> Option<PCriticalParams> {
        if !self.plasticity.enabled {
            return None;
        }
        let defaults = PCriticalParams::defaults_for(self.mode);
        Some(PCriticalParams {
            alpha: self.plasticity.alpha.unwrap_or(defaults.alpha),
            beta: self.plasticity.beta.unwrap_or(defaults.beta),
            tau_trace: self.plasticity.tau_trace,
            paired_lif: LifParams {
                tau_v: self.plasticity.paired_tau_v,
                tau_i: self.plasticity.paired_tau_i,
                v_reset: self.lif.v_reset,
                v_th: self.v_th(),
                t_refrac: self.plasticity.paired_t_refrac,
                dt: self.lif.dt,
            },
            paired_vth_factor: self.plasticity.paired_vth_factor,
            mode: self.mode,
        })
    }

    pub fn weight_decay(&self) -> f64 {
        self.readout.weight_decay.unwrap_or(match self.mode {
            WeightMode::Float => 0.0,
            WeightMode::Fixed8 => 1e-2,
        })
    }
}

fn line_of(text: &str, byte: usize) -> usize {
    text[..byte.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}
