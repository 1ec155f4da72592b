//! Paired-neuron branching-factor autoregulation (P-CRITICAL).
//!
//! Every excitatory reservoir neuron `i` owns a paired LIF neuron driven at
//! each step by the live transposed weight view `sum_j |w_ij| * spike_j(t)`,
//! i.e. by the weighted activity of `i`'s post-synaptic targets. A paired
//! spike signals locally supercritical branching and depresses every nonzero
//! outgoing weight of `i` by `alpha * e^(-|dt_ij|/tau_trace)`, where `dt_ij`
//! is the gap between the last spikes of `i` and the target `j` (factor 0 if
//! either has never spiked). Every step, all nonzero positive weights grow by
//! `beta`, and magnitudes are clipped to the representable range. Inhibitory
//! rows are never touched and no sign ever changes; a magnitude that reaches
//! zero is pruned permanently.
//!
//! Per-step update order: reservoir step -> paired step -> depression ->
//! growth -> clip.
//!
//! Two arithmetic modes are provided: `Float` (unit weight range) and
//! `Fixed8` (sign + 8-bit magnitude, hardware emulation). In fixed mode the
//! depression subtracts `round(alpha * trace)` with a floor of one level when
//! the trace is nonzero, and growth accumulates fractional `beta` until a
//! whole level is due.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lif::{step_population, LifParams, PopulationState};
use crate::weights::{QuantizedWeights, SparseWeights};

/// Weight arithmetic selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Float,
    Fixed8,
}

impl Default for WeightMode {
    fn default() -> Self {
        WeightMode::Float
    }
}

/// Learning constants and paired-neuron model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PCriticalParams {
    /// Depression learning rate (weight levels per paired spike at trace 1).
    pub alpha: f64,
    /// Per-step growth increment (weight levels).
    pub beta: f64,
    /// Causality trace decay constant, ms.
    pub tau_trace: f64,
    /// LIF constants for the paired population; `v_th` here is the base
    /// reservoir threshold before `paired_vth_factor` is applied.
    pub paired_lif: LifParams,
    /// Multiplier on `v_th` for paired neurons; values above 1 lower the
    /// branching target below the paired neuron's trigger sensitivity.
    pub paired_vth_factor: f64,
    pub mode: WeightMode,
}

impl PCriticalParams {
    /// Floating-point defaults: alpha 1e-2, beta 1e-5, paired tau_v' = 5 ms,
    /// tau_i' = 0 ms.
    pub fn float_default() -> Self {
        PCriticalParams {
            alpha: 1e-2,
            beta: 1e-5,
            tau_trace: 5.0,
            paired_lif: LifParams {
                tau_v: 5.0,
                tau_i: 0.0,
                ..LifParams::float_default()
            },
            paired_vth_factor: 1.01,
            mode: WeightMode::Float,
        }
    }

    /// Fixed-point defaults: alpha 2 levels, beta 0.25 levels/step, weight
    /// range +-[0, 256) with the threshold in the same units.
    pub fn fixed_default() -> Self {
        PCriticalParams {
            alpha: 2.0,
            beta: 0.25,
            mode: WeightMode::Fixed8,
            paired_lif: LifParams {
                tau_v: 5.0,
                tau_i: 0.0,
                ..LifParams::fixed_default()
            },
            ..Self::float_default()
        }
    }

    pub fn defaults_for(mode: WeightMode) -> Self {
        match mode {
            WeightMode::Float => Self::float_default(),
            WeightMode::Fixed8 => Self::fixed_default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        use crate::error::Error;
        if !(self.alpha > self.beta && self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "learning rates must satisfy alpha > beta > 0, got alpha={} beta={}",
                self.alpha, self.beta
            )));
        }
        if !(self.tau_trace > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau_trace must be > 0, got {}",
                self.tau_trace
            )));
        }
        if !(self.paired_vth_factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "paired_vth_factor must be > 0, got {}",
                self.paired_vth_factor
            )));
        }
        self.paired_lif.validate()
    }
}

impl Default for PCriticalParams {
    fn default() -> Self {
        Self::float_default()
    }
}

/// Runtime state: the paired population plus its index map into the
/// reservoir. Reservoir last-spike times live in the reservoir's own
/// `PopulationState` and are passed in per step.
#[derive(Debug, Clone)]
pub struct PCriticalState {
    paired: PopulationState,
    /// Reservoir index of each paired neuron.
    exc_indices: Vec<u32>,
    /// Paired LIF constants with the raised threshold baked in.
    paired_params: LifParams,
    /// Fractional growth accumulator (fixed mode).
    growth_accum: f64,
}

impl PCriticalState {
    pub fn n_paired(&self) -> usize {
        self.exc_indices.len()
    }

    pub fn paired_state(&self) -> &PopulationState {
        &self.paired
    }

    pub fn exc_indices(&self) -> &[u32] {
        &self.exc_indices
    }
}

/// One paired neuron per excitatory reservoir neuron, thresholds raised by
/// `paired_vth_factor`.
pub fn init_paired(excitatory: &[bool], params: &PCriticalParams) -> PCriticalState {
    let exc_indices: Vec<u32> = excitatory
        .iter()
        .enumerate()
        .filter_map(|(i, &e)| e.then_some(i as u32))
        .collect();
    let paired = PopulationState::new(exc_indices.len());
    let paired_params = LifParams {
        v_th: params.paired_lif.v_th * params.paired_vth_factor,
        ..params.paired_lif
    };
    PCriticalState {
        paired,
        exc_indices,
        paired_params,
        growth_accum: 0.0,
    }
}

fn trace_factor(t_pre: Option<u32>, t_post: Option<u32>, tau_trace: f64) -> f64 {
    match (t_pre, t_post) {
        (Some(a), Some(b)) => {
            let dt = (a as f64 - b as f64).abs();
            (-dt / tau_trace).exp()
        }
        // A neuron that never spiked contributes no causal evidence.
        _ => 0.0,
    }
}

/// Advance the paired population and apply one float-mode plasticity step.
///
/// `reservoir_spikes` are this step's reservoir spike flags and `t_last` the
/// per-neuron last spike times after that step. Returns the paired spike
/// flags (indexed like `exc_indices`).
pub fn pcritical_step(
    weights: &mut SparseWeights,
    reservoir_spikes: &[bool],
    t_last: &[Option<u32>],
    state: &mut PCriticalState,
    params: &PCriticalParams,
    t_now: u32,
) -> Result<Vec<bool>> {
    let paired_spikes = step_paired_float(weights, reservoir_spikes, state, t_now)?;

    for (p, &spiked) in paired_spikes.iter().enumerate() {
        if !spiked {
            continue;
        }
        let i = state.exc_indices[p] as usize;
        let t_pre = t_last[i];
        let (cols, mags) = weights.row_mut(i);
        for (k, &j) in cols.iter().enumerate() {
            if mags[k] > 0.0 {
                mags[k] -= params.alpha * trace_factor(t_pre, t_last[j as usize], params.tau_trace);
            }
        }
    }

    // Growth + clip over excitatory rows only; zero magnitudes stay pruned.
    for p in 0..state.exc_indices.len() {
        let i = state.exc_indices[p] as usize;
        let (_, mags) = weights.row_mut(i);
        for m in mags {
            if *m != 0.0 {
                *m = (*m + params.beta).clamp(0.0, 1.0);
            }
        }
    }

    Ok(paired_spikes)
}

fn step_paired_float(
    weights: &SparseWeights,
    reservoir_spikes: &[bool],
    state: &mut PCriticalState,
    t_now: u32,
) -> Result<Vec<bool>> {
    let mut drive = vec![0.0; state.exc_indices.len()];
    for (p, &i) in state.exc_indices.iter().enumerate() {
        let (cols, mags) = weights.row(i as usize);
        let mut acc = 0.0;
        for (&j, &m) in cols.iter().zip(mags) {
            if reservoir_spikes[j as usize] {
                acc += m;
            }
        }
        drive[p] = acc;
    }
    step_population(&mut state.paired, &drive, &state.paired_params, t_now)
}

/// Fixed-point variant of [`pcritical_step`] on 8-bit magnitudes.
pub fn pcritical_step_fixed(
    weights: &mut QuantizedWeights,
    reservoir_spikes: &[bool],
    t_last: &[Option<u32>],
    state: &mut PCriticalState,
    params: &PCriticalParams,
    t_now: u32,
) -> Result<Vec<bool>> {
    let mut drive = vec![0.0; state.exc_indices.len()];
    for (p, &i) in state.exc_indices.iter().enumerate() {
        let (cols, mags) = weights.row(i as usize);
        let mut acc = 0.0;
        for (&j, &m) in cols.iter().zip(mags) {
            if reservoir_spikes[j as usize] {
                acc += m as f64;
            }
        }
        drive[p] = acc;
    }
    let paired_spikes = step_population(&mut state.paired, &drive, &state.paired_params, t_now)?;

    for (p, &spiked) in paired_spikes.iter().enumerate() {
        if !spiked {
            continue;
        }
        let i = state.exc_indices[p] as usize;
        let t_pre = t_last[i];
        let (cols, mags) = weights.row_mut(i);
        for (k, &j) in cols.iter().enumerate() {
            if mags[k] == 0 {
                continue;
            }
            let trace = trace_factor(t_pre, t_last[j as usize], params.tau_trace);
            if trace > 0.0 {
                // Depression affects at least the least significant level.
                let dec = ((params.alpha * trace).round() as u8).max(1);
                mags[k] = mags[k].saturating_sub(dec);
            }
        }
    }

    // Fractional growth: +1 level on every synapse each time the accumulator
    // crosses a whole level.
    state.growth_accum += params.beta;
    if state.growth_accum >= 1.0 {
        let levels = state.growth_accum.floor();
        state.growth_accum -= levels;
        let inc = levels as u8;
        for p in 0..state.exc_indices.len() {
            let i = state.exc_indices[p] as usize;
            let (_, mags) = weights.row_mut(i);
            for m in mags {
                if *m > 0 {
                    *m = m.saturating_add(inc);
                }
            }
        }
    }

    Ok(paired_spikes)
}
