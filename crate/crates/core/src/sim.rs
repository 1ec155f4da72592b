//! Step driver for one reservoir instance.
//!
//! Per step `t`: input spikes at `t` are delivered immediately (an input
//! spike forces its target over threshold the same step, since input weights
//! far exceed `v_th`), recurrent drive comes from the reservoir spikes of
//! step `t - 1`, and the plasticity rule, when enabled, observes the spikes
//! produced at `t`. Each instance owns its state; separate instances are
//! independent and freely run in parallel.

use crate::error::{Error, Result};
use crate::lif::{step_population, LifParams, PopulationState, SpikeRaster};
use crate::plasticity::{init_paired, pcritical_step, pcritical_step_fixed, PCriticalParams, PCriticalState, WeightMode};
use crate::topology::InputMap;
use crate::weights::{QuantizedWeights, SparseWeights};

/// Reservoir weights in either arithmetic mode.
#[derive(Debug, Clone)]
pub enum PlasticWeights {
    Float(SparseWeights),
    Fixed8(QuantizedWeights),
}

impl PlasticWeights {
    pub fn from_float(weights: SparseWeights, mode: WeightMode) -> Self {
        match mode {
            WeightMode::Float => PlasticWeights::Float(weights),
            WeightMode::Fixed8 => PlasticWeights::Fixed8(QuantizedWeights::from_float(&weights)),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            PlasticWeights::Float(w) => w.n(),
            PlasticWeights::Fixed8(w) => w.n(),
        }
    }

    pub fn excitatory(&self) -> &[bool] {
        match self {
            PlasticWeights::Float(w) => w.excitatory(),
            PlasticWeights::Fixed8(w) => w.excitatory(),
        }
    }

    pub fn accumulate_drive(&self, spiking: &[u32], drive: &mut [f64]) {
        match self {
            PlasticWeights::Float(w) => w.accumulate_drive(spiking, drive),
            PlasticWeights::Fixed8(w) => w.accumulate_drive(spiking, drive),
        }
    }

    /// Mean nonzero excitatory magnitude, dequantized in fixed mode so both
    /// modes report on the unit scale.
    pub fn mean_nonzero_excitatory(&self) -> Option<f64> {
        match self {
            PlasticWeights::Float(w) => w.mean_nonzero_excitatory(),
            PlasticWeights::Fixed8(w) => w.mean_nonzero_excitatory(),
        }
    }

    pub fn adjacency_out(&self) -> Vec<Vec<u32>> {
        match self {
            PlasticWeights::Float(w) => w.adjacency_out(),
            PlasticWeights::Fixed8(w) => w.adjacency_out(),
        }
    }

    /// Signed, unit-scale edge list.
    pub fn signed_edges(&self) -> Vec<(u32, u32, f64)> {
        match self {
            PlasticWeights::Float(w) => w.signed_edges(),
            PlasticWeights::Fixed8(w) => w.signed_edges(),
        }
    }
}

/// One running simulation: LIF population + input map + optional plasticity.
#[derive(Debug, Clone)]
pub struct Reservoir {
    lif: LifParams,
    state: PopulationState,
    pub weights: PlasticWeights,
    input_map: InputMap,
    plasticity: Option<(PCriticalParams, PCriticalState)>,
    prev_spikes: Vec<u32>,
    t: u32,
}

impl Reservoir {
    pub fn new(
        weights: PlasticWeights,
        lif: LifParams,
        input_map: InputMap,
        plasticity: Option<PCriticalParams>,
    ) -> Result<Self> {
        lif.validate()?;
        let n = weights.n();
        if input_map.n_reservoir() != n {
            return Err(Error::DimensionMismatch {
                context: "reservoir input map width",
                expected: n,
                actual: input_map.n_reservoir(),
            });
        }
        if !(input_map.w_input > lif.v_th) {
            return Err(Error::InvalidParameter(format!(
                "input weight {} must strictly exceed v_th {}",
                input_map.w_input, lif.v_th
            )));
        }
        let plasticity = match plasticity {
            Some(params) => {
                params.validate()?;
                let mode_matches = matches!(
                    (&weights, params.mode),
                    (PlasticWeights::Float(_), WeightMode::Float)
                        | (PlasticWeights::Fixed8(_), WeightMode::Fixed8)
                );
                if !mode_matches {
                    return Err(Error::InvalidParameter(
                        "plasticity mode does not match the weight representation".into(),
                    ));
                }
                let state = init_paired(weights.excitatory(), &params);
                Some((params, state))
            }
            None => None,
        };
        Ok(Reservoir {
            state: PopulationState::new(n),
            lif,
            weights,
            input_map,
            plasticity,
            prev_spikes: Vec::new(),
            t: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn input_map(&self) -> &InputMap {
        &self.input_map
    }

    pub fn plasticity_enabled(&self) -> bool {
        self.plasticity.is_some()
    }

    /// Advance one step given the input spikes at the current time; returns
    /// the reservoir spike indices for this step.
    pub fn step(&mut self, input_spikes: &[u32]) -> Result<Vec<u32>> {
        let n = self.n();
        let mut drive = vec![0.0; n];
        self.input_map.accumulate(input_spikes, &mut drive);
        self.weights.accumulate_drive(&self.prev_spikes, &mut drive);
        let spike_mask = step_population(&mut self.state, &drive, &self.lif, self.t)?;

        if let Some((params, pstate)) = &mut self.plasticity {
            match &mut self.weights {
                PlasticWeights::Float(w) => {
                    pcritical_step(w, &spike_mask, &self.state.t_last_spike, pstate, params, self.t)?;
                }
                PlasticWeights::Fixed8(w) => {
                    pcritical_step_fixed(w, &spike_mask, &self.state.t_last_spike, pstate, params, self.t)?;
                }
            }
        }

        let spiking: Vec<u32> = spike_mask
            .iter()
            .enumerate()
            .filter_map(|(k, &s)| s.then_some(k as u32))
            .collect();
        self.prev_spikes = spiking.clone();
        self.t += 1;
        Ok(spiking)
    }

    /// Run over a full input raster, recording the reservoir raster. When
    /// `mean_weight_out` is given, the post-update mean excitatory weight is
    /// appended once per step.
    pub fn run(
        &mut self,
        input: &SpikeRaster,
        mut mean_weight_out: Option<&mut Vec<Option<f64>>>,
    ) -> Result<SpikeRaster> {
        if input.n_neurons() != self.input_map.n_inputs() {
            return Err(Error::DimensionMismatch {
                context: "reservoir input raster width",
                expected: self.input_map.n_inputs(),
                actual: input.n_neurons(),
            });
        }
        let duration = input.duration_ms();
        let mut raster = SpikeRaster::new(self.n(), duration);
        for t in 0..duration {
            let spiking = self.step(input.spikes_at(t))?;
            raster.set_step(t, spiking);
            if let Some(out) = mean_weight_out.as_deref_mut() {
                out.push(self.weights.mean_nonzero_excitatory());
            }
        }
        Ok(raster)
    }

    /// Clear membrane/current/refractory/last-spike state and the recurrent
    /// spike buffer, keeping the (possibly adapted) weights. Used between
    /// samples when extracting features from a frozen reservoir.
    pub fn reset_state(&mut self) {
        let n = self.n();
        self.state = PopulationState::new(n);
        if let Some((params, pstate)) = &mut self.plasticity {
            *pstate = init_paired(self.weights.excitatory(), params);
        }
        self.prev_spikes.clear();
        self.t = 0;
    }

    /// Drop the plasticity rule, freezing the current weights.
    pub fn freeze(&mut self) {
        self.plasticity = None;
    }
}
