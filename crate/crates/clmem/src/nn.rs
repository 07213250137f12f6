//! Minimal dense network: ReLU hidden layers, linear output, softmax
//! cross-entropy loss, hand-derived backprop, SGD with classical momentum.
//!
//! Everything is `f64` and deterministic given a seed. Gradients are
//! exposed as a single flat vector in a fixed canonical order (layers in
//! order, weights before biases, weights row-major) so methods that reason
//! about whole-model gradients (gradient projection, virtual updates) can
//! treat them as plain vectors.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Hyperparameters for one training pass.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Base seed for loops that derive their own streams (the harness
    /// overrides this per run).
    #[serde(default)]
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    /// lr 0.001, momentum 0.9, batch 32: the defaults used by every
    /// experiment unless a config overrides them.
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            momentum: 0.9,
            batch_size: 32,
            epochs: 1,
            seed: 0,
        }
    }
}

/// Whole-model gradient in canonical flat layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatGradient {
    values: Vec<f64>,
}

impl FlatGradient {
    pub fn zeros(len: usize) -> Self {
        FlatGradient {
            values: vec![0.0; len],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        FlatGradient { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn dot(&self, other: &FlatGradient) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!(
                "gradient length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Dense feed-forward classifier with per-parameter momentum state.
///
/// Layer `l` maps `layer_sizes[l]` inputs to `layer_sizes[l+1]` outputs;
/// its weight matrix is stored row-major with shape `(out, in)`. Hidden
/// layers apply ReLU, the last layer is linear (logits).
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    weight_vel: Vec<Vec<f64>>,
    bias_vel: Vec<Vec<f64>>,
}

impl MlpModel {
    /// Fresh model: weights ~ N(0, 1) / sqrt(fan_in), biases and momentum
    /// state zero. Bitwise deterministic for a given seed.
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "need at least input and output layer, got {:?}",
                layer_sizes
            )));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Config(format!(
                "layer sizes must be positive, got {:?}",
                layer_sizes
            )));
        }

        let mut rng = rng::stream(seed, "nn/init");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        let mut weight_vel = Vec::new();
        let mut bias_vel = Vec::new();
        for l in 0..layer_sizes.len() - 1 {
            let fan_in = layer_sizes[l];
            let fan_out = layer_sizes[l + 1];
            let scale = 1.0 / (fan_in as f64).sqrt();
            let mut w = vec![0.0; fan_in * fan_out];
            for v in &mut w {
                *v = standard_normal(&mut rng) * scale;
            }
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
            weight_vel.push(vec![0.0; fan_in * fan_out]);
            bias_vel.push(vec![0.0; fan_out]);
        }
        Ok(MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            weight_vel,
            bias_vel,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_classes(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// Total parameter count (weights + biases over all layers).
    pub fn param_count(&self) -> usize {
        (0..self.num_layers())
            .map(|l| self.layer_sizes[l] * self.layer_sizes[l + 1] + self.layer_sizes[l + 1])
            .sum()
    }

    /// All parameters in the canonical flat order. Used for bitwise
    /// determinism checks and by the MIR virtual step.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in 0..self.num_layers() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
        out
    }

    /// Overwrites all parameters from a canonical flat vector.
    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut offset = 0;
        for l in 0..self.num_layers() {
            let nw = self.weights[l].len();
            self.weights[l].copy_from_slice(&flat[offset..offset + nw]);
            offset += nw;
            let nb = self.biases[l].len();
            self.biases[l].copy_from_slice(&flat[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }

    fn check_batch(&self, features: &[&[f64]]) -> Result<()> {
        for (i, row) in features.iter().enumerate() {
            if row.len() != self.input_dim() {
                return Err(Error::Shape(format!(
                    "sample {} has {} features, model expects {}",
                    i,
                    row.len(),
                    self.input_dim()
                )));
            }
        }
        Ok(())
    }

    /// Logits for a batch. Hidden activations are ReLU, output is linear.
    pub fn forward(&self, features: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        self.check_batch(features)?;
        let mut out = Vec::with_capacity(features.len());
        for row in features {
            let acts = self.forward_single(row);
            out.push(acts.into_iter().last().unwrap());
        }
        Ok(out)
    }

    /// Activations after every layer for one sample (last entry = logits).
    fn forward_single(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.num_layers());
        let mut current: &[f64] = input;
        for l in 0..self.num_layers() {
            let fan_in = self.layer_sizes[l];
            let fan_out = self.layer_sizes[l + 1];
            let w = &self.weights[l];
            let b = &self.biases[l];
            let mut z = vec![0.0; fan_out];
            for o in 0..fan_out {
                let row = &w[o * fan_in..(o + 1) * fan_in];
                let mut sum = b[o];
                for (wi, xi) in row.iter().zip(current) {
                    sum += wi * xi;
                }
                z[o] = sum;
            }
            if l + 1 < self.num_layers() {
                for v in &mut z {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            acts.push(z);
            current = acts.last().unwrap();
        }
        acts
    }

    /// Mean softmax cross-entropy and its exact mean gradient over the batch.
    pub fn loss_and_grad(
        &self,
        features: &[&[f64]],
        labels: &[usize],
    ) -> Result<(f64, FlatGradient)> {
        if features.is_empty() {
            return Err(Error::Usage("loss_and_grad on an empty batch".into()));
        }
        if features.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows vs {} labels",
                features.len(),
                labels.len()
            )));
        }
        self.check_batch(features)?;
        let classes = self.num_classes();
        for (i, &y) in labels.iter().enumerate() {
            if y >= classes {
                return Err(Error::Data(format!(
                    "label {} of sample {} out of range [0, {})",
                    y, i, classes
                )));
            }
        }
        for (i, row) in features.iter().enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("non-finite feature in sample {}", i)));
            }
        }

        let batch = features.len() as f64;
        let layers = self.num_layers();
        let mut d_weights: Vec<Vec<f64>> =
            self.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let mut d_biases: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut total_loss = 0.0;

        for (row, &label) in features.iter().zip(labels) {
            let acts = self.forward_single(row);
            let logits = acts.last().unwrap();

            // Softmax cross-entropy with max subtraction.
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum_exp: f64 = logits.iter().map(|&v| (v - max).exp()).sum();
            total_loss += max + sum_exp.ln() - logits[label];

            // delta at the output: softmax - onehot.
            let mut delta: Vec<f64> = logits.iter().map(|&v| (v - max).exp() / sum_exp).collect();
            delta[label] -= 1.0;

            for l in (0..layers).rev() {
                let fan_in = self.layer_sizes[l];
                let fan_out = self.layer_sizes[l + 1];
                let prev: &[f64] = if l == 0 { row } else { &acts[l - 1] };

                let dw = &mut d_weights[l];
                for o in 0..fan_out {
                    let d = delta[o];
                    if d != 0.0 {
                        let row_grad = &mut dw[o * fan_in..(o + 1) * fan_in];
                        for (g, x) in row_grad.iter_mut().zip(prev) {
                            *g += d * x;
                        }
                    }
                    d_biases[l][o] += d;
                }

                if l > 0 {
                    let w = &self.weights[l];
                    let mut d_prev = vec![0.0; fan_in];
                    for o in 0..fan_out {
                        let d = delta[o];
                        if d != 0.0 {
                            let row = &w[o * fan_in..(o + 1) * fan_in];
                            for (dp, wi) in d_prev.iter_mut().zip(row) {
                                *dp += d * wi;
                            }
                        }
                    }
                    // ReLU mask from the stored post-activation.
                    for (dp, &a) in d_prev.iter_mut().zip(acts[l - 1].iter()) {
                        if a <= 0.0 {
                            *dp = 0.0;
                        }
                    }
                    delta = d_prev;
                }
            }
        }

        let mut flat = Vec::with_capacity(self.param_count());
        for l in 0..layers {
            flat.extend(d_weights[l].iter().map(|g| g / batch));
            flat.extend(d_biases[l].iter().map(|g| g / batch));
        }
        Ok((total_loss / batch, FlatGradient::from_values(flat)))
    }

    /// Per-sample softmax cross-entropy losses, no gradient. Used by MIR's
    /// loss-differential ranking.
    pub fn per_sample_losses(&self, features: &[&[f64]], labels: &[usize]) -> Result<Vec<f64>> {
        if features.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows vs {} labels",
                features.len(),
                labels.len()
            )));
        }
        let logits = self.forward(features)?;
        let classes = self.num_classes();
        logits
            .iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (row, &label))| {
                if label >= classes {
                    return Err(Error::Data(format!(
                        "label {} of sample {} out of range [0, {})",
                        label, i, classes
                    )));
                }
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let sum_exp: f64 = row.iter().map(|&v| (v - max).exp()).sum();
                Ok(max + sum_exp.ln() - row[label])
            })
            .collect()
    }

    /// One SGD step with classical momentum:
    /// `v <- momentum * v + g; theta <- theta - lr * v`.
    ///
    /// Rejected without touching the model if the gradient is non-finite.
    pub fn sgd_step(&mut self, grad: &FlatGradient, cfg: &TrainConfig) -> Result<()> {
        if grad.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "gradient has {} values, model has {} parameters",
                grad.len(),
                self.param_count()
            )));
        }
        if !grad.is_finite() {
            return Err(Error::Numeric(
                "non-finite gradient entries, step rejected".into(),
            ));
        }
        let mut offset = 0;
        for l in 0..self.num_layers() {
            let g = grad.values();
            let nw = self.weights[l].len();
            for (i, (w, v)) in self.weights[l]
                .iter_mut()
                .zip(self.weight_vel[l].iter_mut())
                .enumerate()
            {
                *v = cfg.momentum * *v + g[offset + i];
                *w -= cfg.learning_rate * *v;
            }
            offset += nw;
            let nb = self.biases[l].len();
            for (i, (b, v)) in self.biases[l]
                .iter_mut()
                .zip(self.bias_vel[l].iter_mut())
                .enumerate()
            {
                *v = cfg.momentum * *v + g[offset + i];
                *b -= cfg.learning_rate * *v;
            }
            offset += nb;
        }
        Ok(())
    }

    /// Fraction of samples whose argmax logit matches the label. Ties go
    /// to the lowest class index.
    pub fn evaluate(&self, features: &[&[f64]], labels: &[usize]) -> Result<f64> {
        if features.is_empty() {
            return Err(Error::Usage("evaluate on an empty dataset".into()));
        }
        if features.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows vs {} labels",
                features.len(),
                labels.len()
            )));
        }
        let mut correct = 0usize;
        for (row, &label) in features.iter().zip(labels) {
            let logits = self.forward(&[row])?;
            if argmax_lowest(&logits[0]) == label {
                correct += 1;
            }
        }
        Ok(correct as f64 / features.len() as f64)
    }

    #[cfg(test)]
    pub(crate) fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        &mut self.weights[layer]
    }

    #[cfg(test)]
    pub(crate) fn biases_mut(&mut self, layer: usize) -> &mut [f64] {
        &mut self.biases[layer]
    }
}

/// Shuffled mini-batch index chunks for one epoch. The last incomplete
/// batch is kept. Every training loop in the crate builds its epochs
/// through this so shuffle-stream consumption is uniform.
pub fn shuffled_batches<R: Rng>(n: usize, batch_size: usize, rng: &mut R) -> Vec<Vec<usize>> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.chunks(batch_size.max(1)).map(|c| c.to_vec()).collect()
}

/// Argmax with ties broken by the lowest index.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Box-Muller standard normal draw.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        if u1 > f64::MIN_POSITIVE {
            let u2: f64 = rng.gen();
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn as_refs(rows: &[Vec<f64>]) -> Vec<&[f64]> {
        rows.iter().map(|r| r.as_slice()).collect()
    }

    #[test]
    fn init_is_deterministic() {
        let a = MlpModel::init(&[4, 3, 2], 7).unwrap();
        let b = MlpModel::init(&[4, 3, 2], 7).unwrap();
        assert_eq!(a.params_flat(), b.params_flat());
        let c = MlpModel::init(&[4, 3, 2], 8).unwrap();
        assert_ne!(a.params_flat(), c.params_flat());
    }

    #[test]
    fn param_count_matches_shapes() {
        let m = MlpModel::init(&[784, 512, 256, 10], 0).unwrap();
        assert_eq!(m.param_count(), 784 * 512 + 512 + 512 * 256 + 256 + 256 * 10 + 10);
        assert_eq!(m.param_count(), 535_818);
        assert_eq!(m.params_flat().len(), 535_818);
    }

    #[test]
    fn biases_start_at_zero() {
        let m = MlpModel::init(&[4, 2], 99).unwrap();
        assert!(m.biases[0].iter().all(|&b| b == 0.0));
        assert!(m.weight_vel[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn invalid_layer_sizes_rejected() {
        assert!(matches!(MlpModel::init(&[4], 0), Err(Error::Config(_))));
        assert!(matches!(MlpModel::init(&[4, 0, 2], 0), Err(Error::Config(_))));
    }

    #[test]
    fn zero_network_gives_zero_logits() {
        let mut m = MlpModel::init(&[3, 4, 2], 1).unwrap();
        for l in 0..2 {
            m.weights_mut(l).fill(0.0);
            m.biases_mut(l).fill(0.0);
        }
        let x = vec![vec![1.0, -2.0, 3.0]];
        let logits = m.forward(&as_refs(&x)).unwrap();
        assert_eq!(logits[0], vec![0.0, 0.0]);
    }

    #[test]
    fn identity_single_layer_passes_inputs_through() {
        let mut m = MlpModel::init(&[3, 3], 1).unwrap();
        m.weights_mut(0).fill(0.0);
        for i in 0..3 {
            m.weights_mut(0)[i * 3 + i] = 1.0;
        }
        m.biases_mut(0).fill(0.0);
        let x = vec![vec![0.5, -1.5, 2.0]];
        let logits = m.forward(&as_refs(&x)).unwrap();
        assert_eq!(logits[0], x[0]);
    }

    /// Independent dense-matmul oracle for a 2-layer net.
    fn matmul_oracle(m: &MlpModel, x: &[f64]) -> Vec<f64> {
        let h: Vec<f64> = (0..m.layer_sizes[1])
            .map(|o| {
                let mut s = m.biases[0][o];
                for i in 0..m.layer_sizes[0] {
                    s += m.weights[0][o * m.layer_sizes[0] + i] * x[i];
                }
                s.max(0.0)
            })
            .collect();
        (0..m.layer_sizes[2])
            .map(|o| {
                let mut s = m.biases[1][o];
                for i in 0..m.layer_sizes[1] {
                    s += m.weights[1][o * m.layer_sizes[1] + i] * h[i];
                }
                s
            })
            .collect()
    }

    #[test]
    fn forward_matches_matmul_oracle() {
        let m = MlpModel::init(&[5, 7, 3], 42).unwrap();
        let x = vec![vec![0.3, -0.8, 1.2, 0.05, -2.0]];
        let got = m.forward(&as_refs(&x)).unwrap();
        let want = matmul_oracle(&m, &x[0]);
        for (g, w) in got[0].iter().zip(&want) {
            assert!((g - w).abs() < 1e-6, "got {} want {}", g, w);
        }
    }

    #[test]
    fn forward_rejects_wrong_dim() {
        let m = MlpModel::init(&[3, 2], 0).unwrap();
        let x = vec![vec![1.0, 2.0]];
        assert!(matches!(m.forward(&as_refs(&x)), Err(Error::Shape(_))));
    }

    #[test]
    fn zero_logits_loss_is_ln_c() {
        let mut m = MlpModel::init(&[2, 5], 3).unwrap();
        m.weights_mut(0).fill(0.0);
        let x = vec![vec![0.7, -0.1]];
        let (loss, _) = m.loss_and_grad(&as_refs(&x), &[2]).unwrap();
        assert!((loss - 5.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn duplicated_batch_keeps_loss_and_grad() {
        let m = MlpModel::init(&[4, 6, 3], 11).unwrap();
        let x = vec![
            vec![0.1, 0.2, -0.4, 1.0],
            vec![-0.9, 0.3, 0.7, 0.0],
        ];
        let labels = [2, 0];
        let (loss1, grad1) = m.loss_and_grad(&as_refs(&x), &labels).unwrap();
        let x2: Vec<Vec<f64>> = x.iter().chain(x.iter()).cloned().collect();
        let labels2 = [2, 0, 2, 0];
        let (loss2, grad2) = m.loss_and_grad(&as_refs(&x2), &labels2).unwrap();
        assert!((loss1 - loss2).abs() < 1e-12);
        for (a, b) in grad1.values().iter().zip(grad2.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn label_out_of_range_is_data_error() {
        let m = MlpModel::init(&[2, 3], 0).unwrap();
        let x = vec![vec![0.0, 0.0]];
        assert!(matches!(
            m.loss_and_grad(&as_refs(&x), &[3]),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn non_finite_input_is_data_error() {
        let m = MlpModel::init(&[2, 3], 0).unwrap();
        let x = vec![vec![f64::NAN, 0.0]];
        assert!(matches!(
            m.loss_and_grad(&as_refs(&x), &[0]),
            Err(Error::Data(_))
        ));
    }

    /// Central finite differences on 50 random coordinates.
    #[test]
    fn gradient_matches_finite_differences() {
        let mut m = MlpModel::init(&[4, 8, 3], 5).unwrap();
        let mut rng = rng::stream(5, "test/fd");
        let x: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let labels: Vec<usize> = (0..6).map(|_| rng.gen_range(0..3)).collect();
        let refs = as_refs(&x);
        let (_, grad) = m.loss_and_grad(&refs, &labels).unwrap();

        let eps = 1e-4;
        let n = m.param_count();
        let base = m.params_flat();
        for _ in 0..50 {
            let p = rng.gen_range(0..n);
            let mut plus = base.clone();
            plus[p] += eps;
            m.set_params_flat(&plus).unwrap();
            let (lp, _) = m.loss_and_grad(&refs, &labels).unwrap();
            let mut minus = base.clone();
            minus[p] -= eps;
            m.set_params_flat(&minus).unwrap();
            let (lm, _) = m.loss_and_grad(&refs, &labels).unwrap();
            m.set_params_flat(&base).unwrap();

            let numeric = (lp - lm) / (2.0 * eps);
            let analytic = grad.values()[p];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3);
            assert!(
                rel < 1e-3,
                "coord {}: analytic {} numeric {} rel {}",
                p,
                analytic,
                numeric,
                rel
            );
        }
    }

    #[test]
    fn plain_sgd_step() {
        let mut m = MlpModel::init(&[1, 1], 0).unwrap();
        m.weights_mut(0)[0] = 1.0;
        m.biases_mut(0)[0] = 0.0;
        let cfg = TrainConfig {
            learning_rate: 0.1,
            momentum: 0.0,
            ..TrainConfig::default()
        };
        let grad = FlatGradient::from_values(vec![2.0, 0.0]);
        m.sgd_step(&grad, &cfg).unwrap();
        assert!((m.weights[0][0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_grad_leaves_params_unchanged() {
        let mut m = MlpModel::init(&[3, 2], 4).unwrap();
        let before = m.params_flat();
        let grad = FlatGradient::zeros(m.param_count());
        m.sgd_step(&grad, &TrainConfig::default()).unwrap();
        assert_eq!(before, m.params_flat());
    }

    #[test]
    fn momentum_two_step_recursion() {
        // theta0 = 1, quadratic f(t) = t^2/2 so grad = theta.
        // v1 = 1, theta1 = 1 - 0.001 = 0.999
        // v2 = 0.9*1 + 0.999 = 1.899, theta2 = 0.999 - 0.001899 = 0.997101
        let mut m = MlpModel::init(&[1, 1], 0).unwrap();
        m.weights_mut(0)[0] = 1.0;
        m.biases_mut(0)[0] = 0.0;
        let cfg = TrainConfig {
            learning_rate: 0.001,
            momentum: 0.9,
            ..TrainConfig::default()
        };
        let g1 = FlatGradient::from_values(vec![m.weights[0][0], 0.0]);
        m.sgd_step(&g1, &cfg).unwrap();
        assert!((m.weights[0][0] - 0.999).abs() < 1e-15);
        let g2 = FlatGradient::from_values(vec![m.weights[0][0], 0.0]);
        m.sgd_step(&g2, &cfg).unwrap();
        assert!((m.weights[0][0] - 0.997101).abs() < 1e-12);
    }

    #[test]
    fn non_finite_grad_rejected_without_mutation() {
        let mut m = MlpModel::init(&[2, 2], 1).unwrap();
        let before = m.params_flat();
        let mut g = FlatGradient::zeros(m.param_count());
        g.values_mut()[1] = f64::INFINITY;
        assert!(matches!(
            m.sgd_step(&g, &TrainConfig::default()),
            Err(Error::Numeric(_))
        ));
        assert_eq!(before, m.params_flat());
    }

    #[test]
    fn evaluate_tie_break_and_loop_oracle() {
        let mut m = MlpModel::init(&[2, 4], 0).unwrap();
        m.weights_mut(0).fill(0.0);
        m.biases_mut(0).fill(0.0);
        // Zero model: every logit ties, argmax = class 0.
        let x: Vec<Vec<f64>> = (0..4).map(|c| vec![c as f64, 1.0]).collect();
        let labels = [0usize, 1, 2, 3];
        let acc = m.evaluate(&as_refs(&x), &labels).unwrap();
        assert!((acc - 0.25).abs() < 1e-12);

        // Loop oracle on a random model.
        let m = MlpModel::init(&[2, 4], 9).unwrap();
        let mut rng = rng::stream(1, "test/eval");
        let x: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
            .collect();
        let labels: Vec<usize> = (0..20).map(|_| rng.gen_range(0..4)).collect();
        let acc = m.evaluate(&as_refs(&x), &labels).unwrap();
        let mut correct = 0;
        for (row, &label) in x.iter().zip(&labels) {
            let logits = m.forward(&[row.as_slice()]).unwrap();
            if argmax_lowest(&logits[0]) == label {
                correct += 1;
            }
        }
        assert_eq!(acc, correct as f64 / 20.0);
    }

    #[test]
    fn evaluate_empty_is_usage_error() {
        let m = MlpModel::init(&[2, 2], 0).unwrap();
        assert!(matches!(m.evaluate(&[], &[]), Err(Error::Usage(_))));
    }

    #[test]
    fn loss_finite_for_huge_logits() {
        let mut m = MlpModel::init(&[1, 2], 0).unwrap();
        m.weights_mut(0)[0] = 1e4;
        m.weights_mut(0)[1] = -1e4;
        let x = vec![vec![1.0]];
        let (loss, grad) = m.loss_and_grad(&as_refs(&x), &[1]).unwrap();
        assert!(loss.is_finite());
        assert!(grad.is_finite());
    }

    #[test]
    fn loss_decreases_on_separable_blobs() {
        // Two linearly separable clusters, 50 full-batch steps.
        let mut rng = rng::stream(0, "test/blobs");
        let mut x = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let c = i % 2;
            let center = if c == 0 { [2.0, 2.0] } else { [-2.0, -2.0] };
            x.push(vec![
                center[0] + 0.1 * rng.gen_range(-1.0..1.0),
                center[1] + 0.1 * rng.gen_range(-1.0..1.0),
            ]);
            labels.push(c);
        }
        let refs = as_refs(&x);
        let mut m = MlpModel::init(&[2, 8, 2], 123).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.05,
            momentum: 0.9,
            ..TrainConfig::default()
        };
        let (loss0, _) = m.loss_and_grad(&refs, &labels).unwrap();
        for _ in 0..50 {
            let (_, grad) = m.loss_and_grad(&refs, &labels).unwrap();
            m.sgd_step(&grad, &cfg).unwrap();
        }
        let (loss50, _) = m.loss_and_grad(&refs, &labels).unwrap();
        assert!(
            loss50 < loss0,
            "loss did not decrease: {} -> {}",
            loss0,
            loss50
        );
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let run = || {
            let mut rng = rng::stream(3, "test/det");
            let x: Vec<Vec<f64>> = (0..16)
                .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let labels: Vec<usize> = (0..16).map(|_| rng.gen_range(0..2)).collect();
            let refs: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
            let mut m = MlpModel::init(&[3, 5, 2], 77).unwrap();
            let cfg = TrainConfig {
                learning_rate: 0.01,
                momentum: 0.9,
                ..TrainConfig::default()
            };
            for _ in 0..10 {
                let (_, grad) = m.loss_and_grad(&refs, &labels).unwrap();
                m.sgd_step(&grad, &cfg).unwrap();
            }
            m.params_flat()
        };
        let a = run();
        let b = run();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn train_config_validation() {
        let mut cfg = TrainConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.momentum = 1.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.momentum = 0.9;
        cfg.learning_rate = 0.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
