//! Time-binned readout: spike-count features, batch normalization, and a
//! single softmax layer trained with adaptive moment estimation.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lif::SpikeRaster;
use crate::rng::{seeded_rng, stream};

pub const BN_EPS: f64 = 1e-5;
const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
/// Exponential-average momentum for the running batch-norm statistics.
const BN_MOMENTUM: f64 = 0.1;

/// Count spikes per (neuron, bin), neuron-major, over exactly `n_bins` bins
/// of `bin_ms`. Shorter activity zero-pads; longer activity truncates.
pub fn bin_spikes(raster: &SpikeRaster, bin_ms: u32, n_bins: usize) -> Result<Vec<f64>> {
    if bin_ms == 0 {
        return Err(Error::InvalidParameter("bin_ms must be >= 1".into()));
    }
    let n = raster.n_neurons();
    let mut features = vec![0.0; n * n_bins];
    for (neuron, t) in raster.iter_events() {
        let bin = (t / bin_ms) as usize;
        if bin < n_bins {
            features[neuron as usize * n_bins + bin] += 1.0;
        }
    }
    Ok(features)
}

/// Per-feature normalization statistics and learned affine parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchNorm {
    pub gamma: Array1<f64>,
    pub shift: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

impl BatchNorm {
    pub fn new(n_features: usize) -> Self {
        BatchNorm {
            gamma: Array1::ones(n_features),
            shift: Array1::zeros(n_features),
            running_mean: Array1::zeros(n_features),
            running_var: Array1::ones(n_features),
        }
    }

    fn batch_stats(x: &Array2<f64>) -> (Array1<f64>, Array1<f64>) {
        let mean = x.mean_axis(Axis(0)).expect("nonempty batch");
        let var = x.map_axis(Axis(0), |col| {
            let m = col.mean().unwrap();
            col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / col.len() as f64
        });
        (mean, var)
    }

    /// Normalize with the given statistics: `gamma * (x - mean)/sqrt(var+eps) + shift`.
    fn normalize_with(&self, x: &Array2<f64>, mean: &Array1<f64>, var: &Array1<f64>) -> Array2<f64> {
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = self.gamma[k] * (*v - mean[k]) / (var[k] + BN_EPS).sqrt() + self.shift[k];
            }
        }
        out
    }

    fn update_running(&mut self, mean: &Array1<f64>, var: &Array1<f64>) {
        for k in 0..self.running_mean.len() {
            self.running_mean[k] = (1.0 - BN_MOMENTUM) * self.running_mean[k] + BN_MOMENTUM * mean[k];
            self.running_var[k] = (1.0 - BN_MOMENTUM) * self.running_var[k] + BN_MOMENTUM * var[k];
        }
    }
}

/// Fit fresh normalization statistics on a feature batch (gamma 1, shift 0;
/// running statistics seeded from the batch).
pub fn bn_fit(features: &Array2<f64>) -> BatchNorm {
    let mut bn = BatchNorm::new(features.ncols());
    let (mean, var) = BatchNorm::batch_stats(features);
    bn.running_mean = mean;
    bn.running_var = var;
    bn
}

/// Apply normalization. In training mode the batch's own statistics are
/// used; in evaluation mode the stored running averages.
pub fn bn_apply(bn: &BatchNorm, features: &Array2<f64>, training: bool) -> Array2<f64> {
    if training {
        let (mean, var) = BatchNorm::batch_stats(features);
        bn.normalize_with(features, &mean, &var)
    } else {
        bn.normalize_with(features, &bn.running_mean, &bn.running_var)
    }
}

/// First/second Adam moments for one parameter tensor, flattened.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Moments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Running maximum of the second moment (amsgrad).
    pub v_max: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments {
            m: vec![0.0; len],
            v: vec![0.0; len],
            v_max: vec![0.0; len],
        }
    }
}

/// Batch-normalized single-layer softmax classifier with optimizer state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReadoutModel {
    pub bn: BatchNorm,
    /// feature x class weight matrix.
    pub w: Array2<f64>,
    pub bias: Array1<f64>,
    pub step: usize,
    pub amsgrad: bool,
    pub moments_w: Moments,
    pub moments_bias: Moments,
    pub moments_gamma: Moments,
    pub moments_shift: Moments,
}

impl ReadoutModel {
    pub fn new(n_features: usize, n_classes: usize, amsgrad: bool, seed: u64) -> Self {
        use rand::Rng;
        let mut rng = seeded_rng(seed, stream::READOUT);
        let scale = (1.0 / n_features as f64).sqrt();
        let w = Array2::from_shape_fn((n_features, n_classes), |_| rng.gen_range(-scale..scale));
        ReadoutModel {
            bn: BatchNorm::new(n_features),
            w,
            bias: Array1::zeros(n_classes),
            step: 0,
            amsgrad,
            moments_w: Moments::new(n_features * n_classes),
            moments_bias: Moments::new(n_classes),
            moments_gamma: Moments::new(n_features),
            moments_shift: Moments::new(n_features),
        }
    }

    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    /// Class scores in evaluation mode (running statistics).
    pub fn logits_eval(&self, features: &Array2<f64>) -> Array2<f64> {
        bn_apply(&self.bn, features, false).dot(&self.w) + &self.bias
    }
}

fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Parameter gradients for one batch.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w: Array2<f64>,
    pub bias: Array1<f64>,
    pub gamma: Array1<f64>,
    pub shift: Array1<f64>,
}

/// Training-mode forward and backward pass on one batch: mean cross-entropy
/// loss and gradients for all trainable parameters.
pub fn loss_and_gradients(
    model: &ReadoutModel,
    x: &Array2<f64>,
    labels: &[usize],
) -> Result<(f64, Gradients)> {
    let batch = x.nrows();
    if labels.len() != batch {
        return Err(Error::DimensionMismatch {
            context: "loss_and_gradients labels",
            expected: batch,
            actual: labels.len(),
        });
    }
    let (mean, var) = BatchNorm::batch_stats(x);
    // x_hat kept separately for the gamma gradient.
    let mut x_hat = x.clone();
    for mut row in x_hat.rows_mut() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = (*v - mean[k]) / (var[k] + BN_EPS).sqrt();
        }
    }
    let mut y = x_hat.clone();
    for mut row in y.rows_mut() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = model.bn.gamma[k] * *v + model.bn.shift[k];
        }
    }
    let logits = y.dot(&model.w) + &model.bias;
    let probs = softmax_rows(&logits);
    let mut loss = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        loss -= probs[(r, label)].max(1e-300).ln();
    }
    loss /= batch as f64;

    // dL/dlogits = (softmax - onehot) / batch
    let mut dlogits = probs;
    for (r, &label) in labels.iter().enumerate() {
        dlogits[(r, label)] -= 1.0;
    }
    dlogits.mapv_inplace(|v| v / batch as f64);

    let dw = y.t().dot(&dlogits);
    let dbias = dlogits.sum_axis(Axis(0));
    let dy = dlogits.dot(&model.w.t());
    let dgamma = (&dy * &x_hat).sum_axis(Axis(0));
    let dshift = dy.sum_axis(Axis(0));

    Ok((
        loss,
        Gradients {
            w: dw,
            bias: dbias,
            gamma: dgamma,
            shift: dshift,
        },
    ))
}

fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    moments: &mut Moments,
    step: usize,
    lr: f64,
    weight_decay: f64,
    amsgrad: bool,
) {
    let bias1 = 1.0 - ADAM_BETA1.powi(step as i32);
    let bias2 = 1.0 - ADAM_BETA2.powi(step as i32);
    for k in 0..params.len() {
        let g = grads[k];
        moments.m[k] = ADAM_BETA1 * moments.m[k] + (1.0 - ADAM_BETA1) * g;
        moments.v[k] = ADAM_BETA2 * moments.v[k] + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = moments.m[k] / bias1;
        let v_hat = if amsgrad {
            moments.v_max[k] = moments.v_max[k].max(moments.v[k]);
            moments.v_max[k] / bias2
        } else {
            moments.v[k] / bias2
        };
        // Decoupled weight decay.
        params[k] -= lr * (m_hat / (v_hat.sqrt() + ADAM_EPS) + weight_decay * params[k]);
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub amsgrad: bool,
    pub weight_decay: f64,
    /// Learn the batch-norm affine parameters (on by default).
    pub learn_bn: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 32,
            lr: 1e-3,
            amsgrad: false,
            weight_decay: 0.0,
            learn_bn: true,
            seed: 0,
        }
    }
}

/// Minibatch softmax cross-entropy training. Deterministic given the seed;
/// aborts on a non-finite loss.
pub fn train_readout(
    features: &Array2<f64>,
    labels: &[usize],
    n_classes: usize,
    cfg: &TrainConfig,
) -> Result<ReadoutModel> {
    let n = features.nrows();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            context: "train_readout labels",
            expected: n,
            actual: labels.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::InvalidParameter(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty training set".into()));
    }
    let mut model = ReadoutModel::new(features.ncols(), n_classes, cfg.amsgrad, cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seeded_rng(cfg.seed, stream::READOUT + 1);
    let batch_size = cfg.batch_size.max(1);

    for _epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch_size) {
            let x = features.select(Axis(0), chunk);
            let y: Vec<usize> = chunk.iter().map(|&r| labels[r]).collect();
            let (loss, grads) = loss_and_gradients(&model, &x, &y)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { step: model.step });
            }
            let (mean, var) = BatchNorm::batch_stats(&x);
            model.bn.update_running(&mean, &var);
            model.step += 1;
            let step = model.step;
            adam_update(
                model.w.as_slice_mut().unwrap(),
                grads.w.as_slice().unwrap(),
                &mut model.moments_w,
                step,
                cfg.lr,
                cfg.weight_decay,
                cfg.amsgrad,
            );
            adam_update(
                model.bias.as_slice_mut().unwrap(),
                grads.bias.as_slice().unwrap(),
                &mut model.moments_bias,
                step,
                cfg.lr,
                0.0,
                cfg.amsgrad,
            );
            if cfg.learn_bn {
                adam_update(
                    model.bn.gamma.as_slice_mut().unwrap(),
                    grads.gamma.as_slice().unwrap(),
                    &mut model.moments_gamma,
                    step,
                    cfg.lr,
                    0.0,
                    cfg.amsgrad,
                );
                adam_update(
                    model.bn.shift.as_slice_mut().unwrap(),
                    grads.shift.as_slice().unwrap(),
                    &mut model.moments_shift,
                    step,
                    cfg.lr,
                    0.0,
                    cfg.amsgrad,
                );
            }
        }
    }
    Ok(model)
}

/// Fraction of samples whose argmax logit matches the label; argmax ties
/// break toward the lowest class index.
pub fn evaluate(model: &ReadoutModel, features: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    let n = features.nrows();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            context: "evaluate labels",
            expected: n,
            actual: labels.len(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty evaluation set".into()));
    }
    let logits = model.logits_eval(features);
    let mut correct = 0usize;
    for (r, &label) in labels.iter().enumerate() {
        let row = logits.row(r);
        let mut best = 0usize;
        for (c, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = c;
            }
        }
        if best == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn bin_spikes_examples() {
        let raster = SpikeRaster::from_events(1, 120, [(0, 10), (0, 70)]).unwrap();
        assert_eq!(bin_spikes(&raster, 60, 2).unwrap(), vec![1.0, 1.0]);

        let empty = SpikeRaster::new(3, 100);
        assert!(bin_spikes(&empty, 60, 2).unwrap().iter().all(|&v| v == 0.0));

        let wide = SpikeRaster::new(512, 300);
        assert_eq!(bin_spikes(&wide, 60, 5).unwrap().len(), 512 * 5);
    }

    #[test]
    fn bin_spikes_truncates_and_pads() {
        // Spike past the fixed bin horizon is dropped; missing tail is zeros.
        let raster = SpikeRaster::from_events(1, 200, [(0, 5), (0, 130)]).unwrap();
        assert_eq!(bin_spikes(&raster, 60, 2).unwrap(), vec![1.0, 0.0]);
        let short = SpikeRaster::from_events(1, 50, [(0, 5)]).unwrap();
        assert_eq!(bin_spikes(&short, 60, 3).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn bin_spikes_is_permutation_equivariant() {
        let mut rng = seeded_rng(9, 70);
        let events: Vec<(u32, u32)> = (0..60)
            .map(|_| (rng.gen_range(0..6u32), rng.gen_range(0..120u32)))
            .collect();
        let raster = SpikeRaster::from_events(6, 120, events.clone()).unwrap();
        let perm: Vec<u32> = vec![3, 5, 0, 1, 4, 2];
        let permuted_events: Vec<(u32, u32)> = events.iter().map(|&(k, t)| (perm[k as usize], t)).collect();
        let permuted = SpikeRaster::from_events(6, 120, permuted_events).unwrap();
        let f = bin_spikes(&raster, 30, 4).unwrap();
        let g = bin_spikes(&permuted, 30, 4).unwrap();
        for k in 0..6usize {
            assert_eq!(f[k * 4..(k + 1) * 4], g[perm[k] as usize * 4..(perm[k] as usize + 1) * 4]);
        }
    }

    #[test]
    fn bn_normalizes_batch_to_zero_mean_unit_variance() {
        let mut rng = seeded_rng(2, 71);
        let x = Array2::from_shape_fn((64, 5), |_| rng.gen::<f64>() * 10.0 - 3.0);
        let bn = bn_fit(&x);
        let y = bn_apply(&bn, &x, true);
        for col in y.columns() {
            let mean = col.mean().unwrap();
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / col.len() as f64;
            assert!(mean.abs() < 1e-6);
            assert_relative_eq!(var, 1.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn bn_constant_column_maps_to_shift() {
        let x = Array2::from_elem((8, 2), 3.7);
        let mut bn = bn_fit(&x);
        bn.shift.fill(0.25);
        let y = bn_apply(&bn, &x, true);
        for &v in y.iter() {
            assert_relative_eq!(v, 0.25, epsilon = 1e-9);
        }
    }

    #[test]
    fn bn_running_stats_converge_to_batch_stats() {
        let mut rng = seeded_rng(6, 72);
        let x = Array2::from_shape_fn((32, 3), |_| rng.gen::<f64>() * 4.0);
        let mut bn = BatchNorm::new(3);
        let (mean, var) = BatchNorm::batch_stats(&x);
        for _ in 0..400 {
            bn.update_running(&mean, &var);
        }
        for k in 0..3 {
            assert_relative_eq!(bn.running_mean[k], mean[k], epsilon = 1e-6);
            assert_relative_eq!(bn.running_var[k], var[k], epsilon = 1e-6);
        }
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut rng = seeded_rng(1, 73);
        let logits = Array2::from_shape_fn((20, 7), |_| rng.gen::<f64>() * 30.0 - 15.0);
        let probs = softmax_rows(&logits);
        for row in probs.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }

    /// Central finite differences over every trainable parameter.
    fn finite_difference_check(batch: usize, features: usize, classes: usize, seed: u64) {
        let mut rng = seeded_rng(seed, 74);
        let x = Array2::from_shape_fn((batch, features), |_| rng.gen::<f64>() * 2.0);
        let labels: Vec<usize> = (0..batch).map(|_| rng.gen_range(0..classes)).collect();
        let mut model = ReadoutModel::new(features, classes, false, seed);
        // Random affine so the gamma/shift gradients are generic.
        model.bn.gamma.mapv_inplace(|_| 0.5 + rng.gen::<f64>());
        model.bn.shift.mapv_inplace(|_| rng.gen::<f64>() - 0.5);

        let (_, grads) = loss_and_gradients(&model, &x, &labels).unwrap();
        let h = 1e-5;
        let mut check = |get: &mut dyn FnMut(&mut ReadoutModel) -> &mut f64, analytic: f64| {
            let mut m = model.clone();
            *get(&mut m) += h;
            let (lp, _) = loss_and_gradients(&m, &x, &labels).unwrap();
            let mut m = model.clone();
            *get(&mut m) -= h;
            let (lm, _) = loss_and_gradients(&m, &x, &labels).unwrap();
            let numeric = (lp - lm) / (2.0 * h);
            let denom = numeric.abs().max(analytic.abs()).max(1e-6);
            assert!(
                (numeric - analytic).abs() / denom < 1e-4,
                "numeric {numeric} vs analytic {analytic}"
            );
        };
        for r in 0..features {
            for c in 0..classes {
                check(&mut |m: &mut ReadoutModel| &mut m.w[(r, c)], grads.w[(r, c)]);
            }
        }
        for c in 0..classes {
            check(&mut |m: &mut ReadoutModel| &mut m.bias[c], grads.bias[c]);
        }
        for k in 0..features {
            check(&mut |m: &mut ReadoutModel| &mut m.bn.gamma[k], grads.gamma[k]);
            check(&mut |m: &mut ReadoutModel| &mut m.bn.shift[k], grads.shift[k]);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        finite_difference_check(6, 5, 3, 5);
        finite_difference_check(9, 4, 2, 11);
    }

    fn separable_toy() -> (Array2<f64>, Vec<usize>) {
        let mut rng = seeded_rng(13, 75);
        let n = 40;
        let x = Array2::from_shape_fn((n, 2), |(r, c)| {
            let class = r % 2;
            let center = if class == 0 { -2.0 } else { 2.0 };
            if c == 0 {
                center + rng.gen::<f64>() * 0.4
            } else {
                rng.gen::<f64>()
            }
        });
        let labels = (0..n).map(|r| r % 2).collect();
        (x, labels)
    }

    #[test]
    fn separable_toy_reaches_full_training_accuracy() {
        let (x, labels) = separable_toy();
        let cfg = TrainConfig {
            epochs: 200,
            batch_size: 8,
            ..TrainConfig::default()
        };
        let model = train_readout(&x, &labels, 2, &cfg).unwrap();
        let acc = evaluate(&model, &x, &labels).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn loss_decreases_over_first_steps_on_fixed_batch() {
        let (x, labels) = separable_toy();
        let mut model = ReadoutModel::new(2, 2, false, 3);
        let mut losses = Vec::new();
        for step in 1..=10 {
            let (loss, grads) = loss_and_gradients(&model, &x, &labels).unwrap();
            losses.push(loss);
            model.step = step;
            adam_update(model.w.as_slice_mut().unwrap(), grads.w.as_slice().unwrap(), &mut model.moments_w, step, 1e-3, 0.0, false);
            adam_update(model.bias.as_slice_mut().unwrap(), grads.bias.as_slice().unwrap(), &mut model.moments_bias, step, 1e-3, 0.0, false);
        }
        assert!(losses.windows(2).all(|w| w[1] <= w[0] + 1e-12), "losses {losses:?}");
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let (x, labels) = separable_toy();
        let cfg = TrainConfig {
            epochs: 3,
            lr: 0.0,
            learn_bn: false,
            ..TrainConfig::default()
        };
        let model = train_readout(&x, &labels, 2, &cfg).unwrap();
        let fresh = ReadoutModel::new(2, 2, false, cfg.seed);
        assert_eq!(model.w, fresh.w);
        assert_eq!(model.bias, fresh.bias);
    }

    #[test]
    fn evaluate_examples_and_tie_breaking() {
        let mut model = ReadoutModel::new(2, 3, false, 1);
        model.bn = BatchNorm::new(2);
        model.w = Array2::zeros((2, 3));
        model.bias = Array1::zeros(3);
        // All logits equal: tie breaks to class 0.
        let x = Array2::from_elem((4, 2), 1.0);
        assert_eq!(evaluate(&model, &x, &[0, 0, 0, 0]).unwrap(), 1.0);
        assert_eq!(evaluate(&model, &x, &[1, 1, 1, 1]).unwrap(), 0.0);
        // Single sample with a wrong argmax.
        model.bias[2] = 1.0;
        assert_eq!(evaluate(&model, &x.slice(ndarray::s![0..1, ..]).to_owned(), &[0]).unwrap(), 0.0);
    }

    #[test]
    fn argmax_is_invariant_to_positive_row_scaling() {
        let mut rng = seeded_rng(19, 76);
        let model = {
            let mut m = ReadoutModel::new(3, 4, false, 2);
            m.bn.running_var.fill(1.0);
            m
        };
        let x = Array2::from_shape_fn((10, 3), |_| rng.gen::<f64>());
        let logits = model.logits_eval(&x);
        let argmax = |row: ndarray::ArrayView1<f64>| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        };
        for row in logits.rows() {
            let scaled: Array1<f64> = row.mapv(|v| v * 7.5);
            assert_eq!(argmax(row), argmax(scaled.view()));
        }
    }

    #[test]
    fn untrained_model_on_balanced_classes_is_near_chance() {
        let mut rng = seeded_rng(23, 77);
        let k = 4;
        let n = 2000;
        let x = Array2::from_shape_fn((n, 6), |_| rng.gen::<f64>());
        let labels: Vec<usize> = (0..n).map(|r| r % k).collect();
        let model = ReadoutModel::new(6, k, false, 9);
        let acc = evaluate(&model, &x, &labels).unwrap();
        let p = 1.0 / k as f64;
        let band = 4.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!((acc - p).abs() < band, "accuracy {acc} outside {p} +- {band}");
    }

    #[test]
    fn training_is_deterministic_in_seed() {
        let (x, labels) = separable_toy();
        let cfg = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        let a = train_readout(&x, &labels, 2, &cfg).unwrap();
        let b = train_readout(&x, &labels, 2, &cfg).unwrap();
        assert_eq!(a.w, b.w);
        assert_eq!(a.bn.running_mean, b.bn.running_mean);
    }
}
