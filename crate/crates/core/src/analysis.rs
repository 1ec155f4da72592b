//! Branching-factor estimators and related activity instruments.
//!
//! All estimators are pure functions of saved rasters so any run can be
//! replayed offline. Steps where an estimate is undefined (zero denominator)
//! are explicit `None`s, never silent zeros.

use crate::error::{Error, Result};
use crate::lif::SpikeRaster;
use crate::topology::InputMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchingMethod {
    Global,
    TopologyAware,
}

/// A per-timestep branching estimate; `values[t]` relates activity at `t+1`
/// to activity at `t`, so the series is one shorter than the raster.
#[derive(Debug, Clone)]
pub struct BranchingSeries {
    pub values: Vec<Option<f64>>,
    pub method: BranchingMethod,
    pub smoothed: bool,
}

impl BranchingSeries {
    /// Mean over defined entries in `[from, ..)`, if any are defined.
    pub fn mean_defined_from(&self, from: usize) -> Option<f64> {
        let defined: Vec<f64> = self.values.iter().skip(from).filter_map(|v| *v).collect();
        (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// Remove every reservoir spike that coincides (same neuron, same step) with
/// a mapped input spike, leaving only self-induced activity.
pub fn self_induced(reservoir: &SpikeRaster, input: &SpikeRaster, map: &InputMap) -> Result<SpikeRaster> {
    if reservoir.n_neurons() != map.n_reservoir() {
        return Err(Error::DimensionMismatch {
            context: "self_induced reservoir width",
            expected: map.n_reservoir(),
            actual: reservoir.n_neurons(),
        });
    }
    if reservoir.duration_ms() != input.duration_ms() {
        return Err(Error::DimensionMismatch {
            context: "self_induced duration",
            expected: reservoir.duration_ms() as usize,
            actual: input.duration_ms() as usize,
        });
    }
    let mapped = map.map_raster(input)?;
    let mut out = SpikeRaster::new(reservoir.n_neurons(), reservoir.duration_ms());
    for t in 0..reservoir.duration_ms() {
        let remaining: Vec<u32> = reservoir
            .spikes_at(t)
            .iter()
            .copied()
            .filter(|&k| !mapped.contains(k, t))
            .collect();
        out.set_step(t, remaining);
    }
    Ok(out)
}

/// Global estimate: total spikes at `t+1` over total spikes at `t`.
/// The caller restricts the raster to the neurons of interest.
pub fn branching_global(raster: &SpikeRaster) -> BranchingSeries {
    let counts = raster.counts_per_step();
    let values = counts
        .windows(2)
        .map(|w| (w[0] > 0).then(|| w[1] as f64 / w[0] as f64))
        .collect();
    BranchingSeries {
        values,
        method: BranchingMethod::Global,
        smoothed: false,
    }
}

/// Topology-aware estimate: for each spiking neuron at `t`, count its
/// post-synaptic targets spiking at `t+1`, then average over the spikers.
/// Shared targets are counted once per pre-neuron, which biases this estimate
/// above the global one on fan-in structure.
pub fn branching_local(raster: &SpikeRaster, adjacency: &[Vec<u32>]) -> Result<BranchingSeries> {
    if adjacency.len() != raster.n_neurons() {
        return Err(Error::DimensionMismatch {
            context: "branching_local adjacency",
            expected: raster.n_neurons(),
            actual: adjacency.len(),
        });
    }
    let duration = raster.duration_ms();
    let mut values = Vec::with_capacity(duration.saturating_sub(1) as usize);
    for t in 0..duration.saturating_sub(1) {
        let spikers = raster.spikes_at(t);
        if spikers.is_empty() {
            values.push(None);
            continue;
        }
        let mut total = 0usize;
        for &i in spikers {
            total += adjacency[i as usize]
                .iter()
                .filter(|&&j| raster.contains(j, t + 1))
                .count();
        }
        values.push(Some(total as f64 / spikers.len() as f64));
    }
    Ok(BranchingSeries {
        values,
        method: BranchingMethod::TopologyAware,
        smoothed: false,
    })
}

/// Discrete Gaussian smoothing with the kernel truncated at 4 sigma.
/// The kernel is renormalized over the defined samples inside each window,
/// so boundaries and undefined gaps do not bias the estimate; a window with
/// no defined sample stays undefined.
pub fn gaussian_smooth(series: &[Option<f64>], sigma: f64) -> Result<Vec<Option<f64>>> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    let radius = (4.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let n = series.len() as isize;
    let mut out = Vec::with_capacity(series.len());
    for t in 0..n {
        let mut acc = 0.0;
        let mut norm = 0.0;
        for (k, &w) in kernel.iter().enumerate() {
            let u = t + k as isize - radius;
            if u < 0 || u >= n {
                continue;
            }
            if let Some(v) = series[u as usize] {
                acc += w * v;
                norm += w;
            }
        }
        out.push((norm > 0.0).then(|| acc / norm));
    }
    Ok(out)
}

/// Smooth a branching series, keeping its method tag.
pub fn smooth_series(series: &BranchingSeries, sigma: f64) -> Result<BranchingSeries> {
    Ok(BranchingSeries {
        values: gaussian_smooth(&series.values, sigma)?,
        method: series.method,
        smoothed: true,
    })
}

/// Consecutive-bin spike count pairs and their least-squares slope.
#[derive(Debug, Clone)]
pub struct PoincareFit {
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
}

/// Bin the raster at `bin_ms`, pair consecutive counts, and fit an ordinary
/// least-squares line. Requires at least 3 bins and at least 3 nonzero bins;
/// a zero-variance pair cloud (constant nonzero counts, all pairs on the
/// diagonal) takes slope 1 by convention.
pub fn poincare(raster: &SpikeRaster, bin_ms: u32) -> Result<PoincareFit> {
    if bin_ms == 0 {
        return Err(Error::InvalidParameter("bin_ms must be >= 1".into()));
    }
    let n_bins = (raster.duration_ms() / bin_ms) as usize;
    if n_bins < 3 {
        return Err(Error::Infeasible(format!("poincare needs at least 3 bins, got {n_bins}")));
    }
    let counts_per_step = raster.counts_per_step();
    let counts: Vec<f64> = (0..n_bins)
        .map(|b| {
            counts_per_step[b * bin_ms as usize..(b + 1) * bin_ms as usize]
                .iter()
                .sum::<usize>() as f64
        })
        .collect();
    let nonzero = counts.iter().filter(|&&c| c > 0.0).count();
    if nonzero < 3 {
        return Err(Error::Infeasible(format!(
            "poincare needs at least 3 nonzero bins, got {nonzero}"
        )));
    }
    let pairs: Vec<(f64, f64)> = counts.windows(2).map(|w| (w[0], w[1])).collect();
    let m = pairs.len() as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = if sxx == 0.0 { 1.0 } else { sxy / sxx };
    Ok(PoincareFit { pairs, slope })
}

/// A recorded weight state: signed dequantized edges at one timestep.
#[derive(Debug, Clone)]
pub struct WeightSnapshot {
    pub t_ms: u32,
    pub edges: Vec<(u32, u32, f64)>,
}

/// Mean of the positive (excitatory, unpruned) weights per snapshot.
pub fn mean_weight_series(snapshots: &[WeightSnapshot]) -> Vec<Option<f64>> {
    snapshots
        .iter()
        .map(|snap| {
            let positives: Vec<f64> = snap.edges.iter().map(|e| e.2).filter(|&w| w > 0.0).collect();
            (!positives.is_empty()).then(|| positives.iter().sum::<f64>() / positives.len() as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::build_input_map;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn self_induced_brute_force_case() {
        // 5 neurons, 10 steps; input map 2 inputs -> known targets.
        let map = build_input_map(2, 5, 1, 5.0, 3).unwrap();
        let t0 = map.targets(0)[0];
        let t1 = map.targets(1)[0];
        let input = SpikeRaster::from_events(2, 10, [(0, 2), (1, 7)]).unwrap();
        let other = (0..5u32).find(|&k| k != t0 && k != t1).unwrap();
        let reservoir = SpikeRaster::from_events(
            5,
            10,
            [(t0, 2), (other, 2), (t1, 7), (t0, 8)],
        )
        .unwrap();
        let out = self_induced(&reservoir, &input, &map).unwrap();
        // Brute force: remove (t0, 2) and (t1, 7); keep the rest.
        assert_eq!(out.total_spikes(), reservoir.total_spikes() - 2);
        assert!(!out.contains(t0, 2));
        assert!(!out.contains(t1, 7));
        assert!(out.contains(other, 2));
        assert!(out.contains(t0, 8));
    }

    #[test]
    fn self_induced_with_empty_input_is_identity() {
        let map = build_input_map(2, 5, 1, 5.0, 3).unwrap();
        let input = SpikeRaster::new(2, 10);
        let reservoir = SpikeRaster::from_events(5, 10, [(0, 1), (3, 4)]).unwrap();
        let out = self_induced(&reservoir, &input, &map).unwrap();
        assert_eq!(out, reservoir);
    }

    #[test]
    fn global_branching_ratios() {
        // Counts [2, 4, 4, 2]: sigma = [2.0, 1.0, 0.5].
        let mut raster = SpikeRaster::new(8, 4);
        raster.set_step(0, vec![0, 1]);
        raster.set_step(1, vec![0, 1, 2, 3]);
        raster.set_step(2, vec![2, 3, 4, 5]);
        raster.set_step(3, vec![6, 7]);
        let series = branching_global(&raster);
        assert_eq!(series.values, vec![Some(2.0), Some(1.0), Some(0.5)]);
    }

    #[test]
    fn global_branching_marks_silent_steps_undefined() {
        let mut raster = SpikeRaster::new(4, 3);
        raster.set_step(1, vec![0]);
        let series = branching_global(&raster);
        assert_eq!(series.values, vec![None, Some(0.0)]);
    }

    #[test]
    fn constant_activity_gives_unit_branching() {
        let mut raster = SpikeRaster::new(8, 6);
        for t in 0..6 {
            raster.set_step(t, vec![0, 2, 4, 6]);
        }
        let series = branching_global(&raster);
        assert!(series.values.iter().all(|v| *v == Some(1.0)));
    }

    #[test]
    fn local_branching_chain_and_fanout() {
        // Chain a(0) -> b(1) -> c(2): a spikes at 0, b at 1 -> sigma(0) = 1.
        let adjacency = vec![vec![1], vec![2], vec![]];
        let raster = SpikeRaster::from_events(3, 3, [(0, 0), (1, 1)]).unwrap();
        let series = branching_local(&raster, &adjacency).unwrap();
        assert_eq!(series.values[0], Some(1.0));

        // Fan-out a -> {b, c}, both fire next step -> sigma(0) = 2.
        let adjacency = vec![vec![1, 2], vec![], vec![]];
        let raster = SpikeRaster::from_events(3, 2, [(0, 0), (1, 1), (2, 1)]).unwrap();
        let series = branching_local(&raster, &adjacency).unwrap();
        assert_eq!(series.values[0], Some(2.0));
    }

    #[test]
    fn local_branching_counts_shared_targets_per_pre_neuron() {
        // Two pre neurons share one post: each counts the same post spike,
        // mean = 1; the global estimate for the same raster is 0.5.
        let adjacency = vec![vec![2], vec![2], vec![]];
        let raster = SpikeRaster::from_events(3, 2, [(0, 0), (1, 0), (2, 1)]).unwrap();
        let local = branching_local(&raster, &adjacency).unwrap();
        assert_eq!(local.values[0], Some(1.0));
        let global = branching_global(&raster);
        assert_eq!(global.values[0], Some(0.5));
    }

    /// Brute-force oracle: recompute the local estimate with nested loops
    /// over an explicit dense adjacency matrix.
    fn local_oracle(raster: &SpikeRaster, dense_adj: &[Vec<bool>]) -> Vec<Option<f64>> {
        let n = raster.n_neurons();
        let mut out = Vec::new();
        for t in 0..raster.duration_ms() - 1 {
            let mut spikers = Vec::new();
            for k in 0..n as u32 {
                if raster.contains(k, t) {
                    spikers.push(k);
                }
            }
            if spikers.is_empty() {
                out.push(None);
                continue;
            }
            let mut total = 0.0;
            for &i in &spikers {
                for j in 0..n as u32 {
                    if dense_adj[i as usize][j as usize] && raster.contains(j, t + 1) {
                        total += 1.0;
                    }
                }
            }
            out.push(Some(total / spikers.len() as f64));
        }
        out
    }

    #[test]
    fn local_branching_matches_brute_force_on_random_graphs() {
        let mut rng = crate::rng::seeded_rng(8, 60);
        for _ in 0..20 {
            let n = 10;
            let dense: Vec<Vec<bool>> = (0..n)
                .map(|i| (0..n).map(|j| i != j && rng.gen::<f64>() < 0.3).collect())
                .collect();
            let adjacency: Vec<Vec<u32>> = dense
                .iter()
                .map(|row| row.iter().enumerate().filter(|(_, &c)| c).map(|(j, _)| j as u32).collect())
                .collect();
            let mut raster = SpikeRaster::new(n, 12);
            for t in 0..12 {
                let mut spiking: Vec<u32> = (0..n as u32).filter(|_| rng.gen::<f64>() < 0.35).collect();
                spiking.sort_unstable();
                raster.set_step(t, spiking);
            }
            let series = branching_local(&raster, &adjacency).unwrap();
            assert_eq!(series.values, local_oracle(&raster, &dense));
        }
    }

    #[test]
    fn smoothing_leaves_constant_series_unchanged() {
        let series = vec![Some(1.3); 30];
        let out = gaussian_smooth(&series, 0.7).unwrap();
        for v in out {
            assert_relative_eq!(v.unwrap(), 1.3, epsilon = 1e-12);
        }
    }

    #[test]
    fn smoothing_impulse_matches_kernel_weight() {
        let mut series = vec![Some(0.0); 21];
        series[10] = Some(1.0);
        let out = gaussian_smooth(&series, 0.7).unwrap();
        // Independent evaluation of the truncated discrete kernel.
        let sigma = 0.7_f64;
        let kernel: Vec<f64> = (-3..=3).map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp()).collect();
        let center = kernel[3] / kernel.iter().sum::<f64>();
        assert_relative_eq!(out[10].unwrap(), center, max_relative = 1e-12);
        assert_relative_eq!(center, 0.5698457838579462, max_relative = 1e-12);
    }

    #[test]
    fn smoothing_preserves_mean_of_defined_series() {
        // With the renormalized-boundary convention the mean is exactly
        // preserved whenever the samples inside two kernel radii of each
        // edge are zero: every nonzero input column then carries a full,
        // unit-sum kernel column.
        let mut rng = crate::rng::seeded_rng(4, 61);
        let mut series: Vec<Option<f64>> = (0..200).map(|_| Some(rng.gen::<f64>() * 3.0)).collect();
        for t in 0..7 {
            series[t] = Some(0.0);
            series[199 - t] = Some(0.0);
        }
        let out = gaussian_smooth(&series, 0.7).unwrap();
        let mean_in: f64 = series.iter().map(|v| v.unwrap()).sum::<f64>() / 200.0;
        let mean_out: f64 = out.iter().map(|v| v.unwrap()).sum::<f64>() / 200.0;
        assert_relative_eq!(mean_in, mean_out, epsilon = 1e-9);
    }

    #[test]
    fn smoothing_preserves_linear_series_in_the_interior() {
        let series: Vec<Option<f64>> = (0..40).map(|t| Some(0.5 + 0.25 * t as f64)).collect();
        let out = gaussian_smooth(&series, 0.7).unwrap();
        for t in 3..37 {
            assert_relative_eq!(out[t].unwrap(), 0.5 + 0.25 * t as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn smoothing_skips_undefined_gaps() {
        let mut series = vec![Some(2.0); 9];
        series[4] = None;
        let out = gaussian_smooth(&series, 0.7).unwrap();
        // The gap is interpolated from defined neighbours of the same value.
        assert_relative_eq!(out[4].unwrap(), 2.0, epsilon = 1e-12);
        let empty = vec![None::<f64>; 5];
        assert!(gaussian_smooth(&empty, 0.7).unwrap().iter().all(|v| v.is_none()));
    }

    #[test]
    fn poincare_constant_counts_give_slope_one() {
        let mut raster = SpikeRaster::new(4, 20);
        for t in 0..20 {
            raster.set_step(t, vec![0, 1]);
        }
        let fit = poincare(&raster, 5).unwrap();
        assert_eq!(fit.pairs.len(), 3);
        assert!(fit.pairs.iter().all(|&(a, b)| a == 10.0 && b == 10.0));
        assert_eq!(fit.slope, 1.0);
    }

    #[test]
    fn poincare_alternating_counts_slope() {
        // Bin counts [10, 5, 10, 5]: hand least squares gives slope -1.
        let mut raster = SpikeRaster::new(16, 4);
        raster.set_step(0, (0..10).collect());
        raster.set_step(1, (0..5).collect());
        raster.set_step(2, (0..10).collect());
        raster.set_step(3, (0..5).collect());
        let fit = poincare(&raster, 1).unwrap();
        assert_eq!(fit.pairs, vec![(10.0, 5.0), (5.0, 10.0), (10.0, 5.0)]);
        assert_relative_eq!(fit.slope, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn poincare_bin_count_arithmetic() {
        let raster = poisson_like(64, 2500);
        let fit = poincare(&raster, 5).unwrap();
        assert_eq!(fit.pairs.len(), 499); // 500 bins -> 499 pairs
    }

    fn poisson_like(n: usize, duration: u32) -> SpikeRaster {
        crate::lif::poisson_raster(n, 50.0, duration, 77).unwrap()
    }

    #[test]
    fn poincare_rejects_too_few_bins() {
        let raster = SpikeRaster::from_events(4, 10, [(0, 1)]).unwrap();
        assert!(poincare(&raster, 5).is_err()); // only 2 bins
        // Silent raster: plenty of bins but fewer than 3 nonzero.
        let silent = SpikeRaster::new(4, 100);
        assert!(poincare(&silent, 5).is_err());
    }

    #[test]
    fn mean_weight_series_excludes_pruned_and_inhibitory() {
        let snaps = vec![
            WeightSnapshot {
                t_ms: 0,
                edges: vec![(0, 1, 0.4)],
            },
            WeightSnapshot {
                t_ms: 1,
                edges: vec![(0, 1, 0.2), (0, 2, 0.4), (1, 2, 0.0), (2, 0, -0.5)],
            },
        ];
        let series = mean_weight_series(&snaps);
        assert_eq!(series[0], Some(0.4));
        assert_relative_eq!(series[1].unwrap(), 0.3, epsilon = 1e-12);
        assert_eq!(mean_weight_series(&[WeightSnapshot { t_ms: 0, edges: vec![] }]), vec![None]);
    }
}
