//! Current-based leaky integrate-and-fire populations on a fixed 1 ms-style
//! time grid.
//!
//! The update is exponential-Euler: decay factors `e^(-dt/tau)` are exact for
//! the homogeneous part of the dynamics. Within one step the order is
//! decay-then-input-then-threshold:
//!
//! ```text
//! i' = i * e^(-dt/tau_i) + input
//! v' = v * e^(-dt/tau_v) + i'      (non-refractory neurons)
//! spike iff v' >= v_th, then v := v_reset, refractory for t_refrac
//! ```
//!
//! Refractoriness gates the membrane only: `v` is clamped to `v_reset` and no
//! spike can be emitted, but the synaptic current keeps integrating input.
//! This keeps the current a pure linear filter of the input, which in turn
//! makes spike counts monotone in a uniform scaling of the drive.
//! `tau_i = 0` means the current has no persistence (`i' = input`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;
use rand::Rng;

/// Neuron-model constants. Times are in ms, potentials dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifParams {
    /// Membrane potential decay time constant.
    pub tau_v: f64,
    /// Synaptic current decay time constant; 0 disables persistence.
    pub tau_i: f64,
    pub v_reset: f64,
    pub v_th: f64,
    /// Refractory period.
    pub t_refrac: f64,
    /// Simulation step.
    pub dt: f64,
}

impl LifParams {
    /// Defaults for the unit-threshold floating-point regime.
    pub fn float_default() -> Self {
        LifParams {
            tau_v: 30.0,
            tau_i: 1.0,
            v_reset: 0.0,
            v_th: 1.0,
            t_refrac: 2.0,
            dt: 1.0,
        }
    }

    /// Same constants with the threshold expressed in 8-bit weight units.
    pub fn fixed_default() -> Self {
        LifParams {
            v_th: 256.0,
            ..Self::float_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_v > 0.0) {
            return Err(Error::InvalidParameter(format!("tau_v must be > 0, got {}", self.tau_v)));
        }
        if !(self.tau_i >= 0.0) {
            return Err(Error::InvalidParameter(format!("tau_i must be >= 0, got {}", self.tau_i)));
        }
        if !(self.v_th > self.v_reset) {
            return Err(Error::InvalidParameter(format!(
                "v_th ({}) must exceed v_reset ({})",
                self.v_th, self.v_reset
            )));
        }
        if !(self.t_refrac >= 0.0) {
            return Err(Error::InvalidParameter(format!("t_refrac must be >= 0, got {}", self.t_refrac)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }

    pub fn decay_v(&self) -> f64 {
        (-self.dt / self.tau_v).exp()
    }

    pub fn decay_i(&self) -> f64 {
        if self.tau_i == 0.0 {
            0.0
        } else {
            (-self.dt / self.tau_i).exp()
        }
    }
}

impl Default for LifParams {
    fn default() -> Self {
        Self::float_default()
    }
}

/// Evolving state of one population. All vectors share the population size.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    pub v: Vec<f64>,
    pub i: Vec<f64>,
    /// Remaining refractory time in ms, within [0, t_refrac].
    pub refrac_remaining: Vec<f64>,
    /// Last spike time in ms; `None` means the neuron has never spiked.
    pub t_last_spike: Vec<Option<u32>>,
}

impl PopulationState {
    pub fn new(n: usize) -> Self {
        PopulationState {
            v: vec![0.0; n],
            i: vec![0.0; n],
            refrac_remaining: vec![0.0; n],
            t_last_spike: vec![None; n],
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }
}

/// Advance one population by one step.
///
/// `weighted_input[k]` is the current increment delivered to neuron `k` this
/// step. Returns the spike flags for this step; spiking neurons have their
/// membrane reset and `t_last_spike` set to `t_now`.
pub fn step_population(
    state: &mut PopulationState,
    weighted_input: &[f64],
    params: &LifParams,
    t_now: u32,
) -> Result<Vec<bool>> {
    let n = state.len();
    if weighted_input.len() != n {
        return Err(Error::DimensionMismatch {
            context: "step_population weighted_input",
            expected: n,
            actual: weighted_input.len(),
        });
    }
    let decay_v = params.decay_v();
    let decay_i = params.decay_i();
    let mut spikes = vec![false; n];
    for k in 0..n {
        state.i[k] = state.i[k] * decay_i + weighted_input[k];
        if state.refrac_remaining[k] > 0.0 {
            // Membrane gated: hold at reset, count the refractory clock down.
            state.refrac_remaining[k] = (state.refrac_remaining[k] - params.dt).max(0.0);
            state.v[k] = params.v_reset;
            continue;
        }
        state.v[k] = state.v[k] * decay_v + state.i[k];
        if state.v[k] >= params.v_th {
            spikes[k] = true;
            state.v[k] = params.v_reset;
            state.refrac_remaining[k] = params.t_refrac;
            state.t_last_spike[k] = Some(t_now);
        }
    }
    Ok(spikes)
}

/// Time-indexed binary spike activity of a population.
///
/// Stored as one sorted, deduplicated index list per 1 ms step, which is the
/// natural shape both for event-driven simulation and for the counting
/// estimators downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeRaster {
    n_neurons: usize,
    steps: Vec<Vec<u32>>,
}

impl SpikeRaster {
    pub fn new(n_neurons: usize, duration_ms: u32) -> Self {
        SpikeRaster {
            n_neurons,
            steps: vec![Vec::new(); duration_ms as usize],
        }
    }

    /// Build from an event list; indices and times are bounds-checked and
    /// duplicate events collapse to one.
    pub fn from_events(
        n_neurons: usize,
        duration_ms: u32,
        events: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        let mut raster = SpikeRaster::new(n_neurons, duration_ms);
        for (neuron, t) in events {
            raster.add_spike(neuron, t)?;
        }
        for step in &mut raster.steps {
            step.sort_unstable();
            step.dedup();
        }
        Ok(raster)
    }

    pub fn add_spike(&mut self, neuron: u32, t: u32) -> Result<()> {
        if neuron as usize >= self.n_neurons {
            return Err(Error::InvalidParameter(format!(
                "neuron index {} out of range (population size {})",
                neuron, self.n_neurons
            )));
        }
        if t as usize >= self.steps.len() {
            return Err(Error::InvalidParameter(format!(
                "spike time {} ms beyond raster duration {} ms",
                t,
                self.steps.len()
            )));
        }
        self.steps[t as usize].push(neuron);
        Ok(())
    }

    /// Replace the spike set of one step with an already-sorted index list.
    pub fn set_step(&mut self, t: u32, spiking: Vec<u32>) {
        debug_assert!(spiking.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(spiking.iter().all(|&k| (k as usize) < self.n_neurons));
        self.steps[t as usize] = spiking;
    }

    pub fn n_neurons(&self) -> usize {
        self.n_neurons
    }

    pub fn duration_ms(&self) -> u32 {
        self.steps.len() as u32
    }

    pub fn spikes_at(&self, t: u32) -> &[u32] {
        &self.steps[t as usize]
    }

    pub fn contains(&self, neuron: u32, t: u32) -> bool {
        self.steps[t as usize].binary_search(&neuron).is_ok()
    }

    pub fn total_spikes(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    pub fn counts_per_step(&self) -> Vec<usize> {
        self.steps.iter().map(Vec::len).collect()
    }

    pub fn iter_events(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.steps
            .iter()
            .enumerate()
            .flat_map(|(t, step)| step.iter().map(move |&k| (k, t as u32)))
    }

    /// Copy with every spike of a masked-out neuron dropped; indices keep
    /// their meaning.
    pub fn restrict(&self, keep: &[bool]) -> SpikeRaster {
        assert_eq!(keep.len(), self.n_neurons);
        SpikeRaster {
            n_neurons: self.n_neurons,
            steps: self
                .steps
                .iter()
                .map(|step| step.iter().copied().filter(|&k| keep[k as usize]).collect())
                .collect(),
        }
    }

    /// Sub-raster over `[t0, t1)` with times rebased to `t0`.
    pub fn slice(&self, t0: u32, t1: u32) -> SpikeRaster {
        assert!(t0 <= t1 && t1 as usize <= self.steps.len());
        SpikeRaster {
            n_neurons: self.n_neurons,
            steps: self.steps[t0 as usize..t1 as usize].to_vec(),
        }
    }
}

/// Sample a Poisson raster on the 1 ms grid: each neuron spikes independently
/// per step with probability `min(1, rate/1000)`.
pub fn poisson_raster(n_neurons: usize, rate_hz: f64, duration_ms: u32, seed: u64) -> Result<SpikeRaster> {
    if !(rate_hz >= 0.0) {
        return Err(Error::InvalidParameter(format!("rate must be >= 0, got {rate_hz}")));
    }
    if duration_ms == 0 {
        return Err(Error::InvalidParameter("duration must be > 0".into()));
    }
    let p = (rate_hz / 1000.0).min(1.0);
    let mut rng = seeded_rng(seed, crate::rng::stream::INPUT_RASTER);
    let mut raster = SpikeRaster::new(n_neurons, duration_ms);
    for t in 0..duration_ms {
        let mut spiking = Vec::new();
        for k in 0..n_neurons {
            if rng.gen::<f64>() < p {
                spiking.push(k as u32);
            }
        }
        raster.set_step(t, spiking);
    }
    Ok(raster)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent scalar reference for the single-neuron recurrence, written
    /// directly from the update definition.
    fn scalar_reference(inputs: &[f64], params: &LifParams) -> Vec<bool> {
        let mut v = 0.0_f64;
        let mut i = 0.0_f64;
        let mut refrac = 0.0_f64;
        let mut out = Vec::new();
        for &x in inputs {
            i = i * params.decay_i() + x;
            if refrac > 0.0 {
                refrac = (refrac - params.dt).max(0.0);
                v = params.v_reset;
                out.push(false);
                continue;
            }
            v = v * params.decay_v() + i;
            if v >= params.v_th {
                v = params.v_reset;
                refrac = params.t_refrac;
                out.push(true);
            } else {
                out.push(false);
            }
        }
        out
    }

    #[test]
    fn membrane_decays_by_closed_form() {
        let params = LifParams::float_default();
        let mut state = PopulationState::new(1);
        state.v[0] = 0.5;
        let spikes = step_population(&mut state, &[0.0], &params, 0).unwrap();
        assert!(!spikes[0]);
        assert_relative_eq!(state.v[0], 0.48360805024100295, max_relative = 1e-15);
    }

    #[test]
    fn quiescence_is_a_fixed_point() {
        let params = LifParams::float_default();
        let mut state = PopulationState::new(3);
        for t in 0..10 {
            let spikes = step_population(&mut state, &[0.0; 3], &params, t).unwrap();
            assert!(spikes.iter().all(|&s| !s));
        }
        assert!(state.v.iter().all(|&v| v == 0.0));
        assert!(state.i.iter().all(|&i| i == 0.0));
    }

    #[test]
    fn first_spike_time_matches_scalar_reference() {
        let params = LifParams::float_default();
        let inputs = vec![0.1; 200];
        let reference = scalar_reference(&inputs, &params);
        let mut state = PopulationState::new(1);
        let mut got = Vec::new();
        for (t, &x) in inputs.iter().enumerate() {
            got.push(step_population(&mut state, &[x], &params, t as u32).unwrap()[0]);
        }
        assert_eq!(got, reference);
        assert!(got.iter().any(|&s| s), "constant drive 0.1 must reach threshold");
    }

    #[test]
    fn random_drive_matches_scalar_reference() {
        let params = LifParams::float_default();
        let mut rng = seeded_rng(11, 99);
        let inputs: Vec<f64> = (0..500).map(|_| rng.gen::<f64>() * 0.4).collect();
        let reference = scalar_reference(&inputs, &params);
        let mut state = PopulationState::new(1);
        let got: Vec<bool> = inputs
            .iter()
            .enumerate()
            .map(|(t, &x)| step_population(&mut state, &[x], &params, t as u32).unwrap()[0])
            .collect();
        assert_eq!(got, reference);
    }

    #[test]
    fn refractory_period_blocks_consecutive_spikes() {
        let params = LifParams::float_default();
        let mut state = PopulationState::new(1);
        let mut spike_times = Vec::new();
        for t in 0..50 {
            if step_population(&mut state, &[2.0], &params, t).unwrap()[0] {
                spike_times.push(t as f64);
            }
        }
        assert!(spike_times.len() > 2);
        for w in spike_times.windows(2) {
            assert!(w[1] - w[0] > params.t_refrac, "spikes {} and {} too close", w[0], w[1]);
        }
    }

    #[test]
    fn zero_tau_i_has_no_current_persistence() {
        let params = LifParams {
            tau_i: 0.0,
            ..LifParams::float_default()
        };
        let mut state = PopulationState::new(1);
        step_population(&mut state, &[0.3], &params, 0).unwrap();
        assert_eq!(state.i[0], 0.3);
        step_population(&mut state, &[0.0], &params, 1).unwrap();
        assert_eq!(state.i[0], 0.0);
    }

    #[test]
    fn input_scaling_never_loses_spikes() {
        // Non-negative drive, scaled uniformly: per-neuron counts are monotone.
        let params = LifParams::float_default();
        let mut rng = seeded_rng(3, 98);
        for _ in 0..20 {
            let inputs: Vec<f64> = (0..300).map(|_| if rng.gen::<f64>() < 0.2 { rng.gen::<f64>() } else { 0.0 }).collect();
            let mut counts = Vec::new();
            for scale in [1.0, 1.5, 2.0, 4.0] {
                let mut state = PopulationState::new(1);
                let mut count = 0;
                for (t, &x) in inputs.iter().enumerate() {
                    if step_population(&mut state, &[x * scale], &params, t as u32).unwrap()[0] {
                        count += 1;
                    }
                }
                counts.push(count);
            }
            assert!(counts.windows(2).all(|w| w[0] <= w[1]), "counts {counts:?} not monotone");
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let params = LifParams::float_default();
        let mut state = PopulationState::new(2);
        let err = step_population(&mut state, &[0.0; 3], &params, 0).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn poisson_zero_rate_is_empty() {
        let raster = poisson_raster(10, 0.0, 100, 1).unwrap();
        assert_eq!(raster.total_spikes(), 0);
    }

    #[test]
    fn poisson_count_matches_expectation() {
        // 170 neurons, 40 Hz, 1 s: expect 6800 +- 4 sd (~330).
        let raster = poisson_raster(170, 40.0, 1000, 12).unwrap();
        let total = raster.total_spikes() as f64;
        assert!((total - 6800.0).abs() < 330.0, "total {total} outside 4 sd of 6800");
    }

    #[test]
    fn poisson_is_deterministic_in_seed() {
        let a = poisson_raster(20, 30.0, 200, 5).unwrap();
        let b = poisson_raster(20, 30.0, 200, 5).unwrap();
        let c = poisson_raster(20, 30.0, 200, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn raster_slice_and_restrict() {
        let raster = SpikeRaster::from_events(4, 10, [(0, 1), (1, 1), (2, 5), (3, 9)]).unwrap();
        let sliced = raster.slice(1, 6);
        assert_eq!(sliced.duration_ms(), 5);
        assert!(sliced.contains(0, 0) && sliced.contains(2, 4));
        let kept = raster.restrict(&[true, false, true, false]);
        assert_eq!(kept.total_spikes(), 2);
        assert!(kept.contains(0, 1) && !kept.contains(1, 1));
    }

    #[test]
    fn raster_rejects_out_of_range_events() {
        assert!(SpikeRaster::from_events(4, 10, [(4, 1)]).is_err());
        assert!(SpikeRaster::from_events(4, 10, [(0, 10)]).is_err());
        // Duplicates collapse.
        let r = SpikeRaster::from_events(4, 10, [(1, 2), (1, 2)]).unwrap();
        assert_eq!(r.total_spikes(), 1);
    }
}
