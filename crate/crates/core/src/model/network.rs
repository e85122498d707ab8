//! Forward and backward passes, generic over the float type so the same
//! code runs in f32 for training and f64 for gradient checking.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::checkpoint::ModelCheckpoint;
use super::loss::{log_softmax, softmax};
use super::{ModelConfig, ModelError};
use crate::render::SuperChatImage;

pub trait Scalar: Float + AddAssign + Sum + Send + Sync + Debug + Into<f64> + 'static {
    fn from_f64(x: f64) -> Self;
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
}

#[derive(Debug, Clone, Copy)]
struct Stage {
    in_c: usize,
    out_c: usize,
    side: usize,
    weight: usize,
    bias: usize,
}

/// Offsets and shapes resolved from a [`ModelConfig`].
#[derive(Debug, Clone)]
pub struct Network {
    config: ModelConfig,
    stages: Vec<Stage>,
    flat: usize,
    fc1_w: usize,
    fc1_b: usize,
    fc2_w: usize,
    fc2_b: usize,
    param_count: usize,
}

struct Trace<T> {
    /// Input of each conv stage; index 0 is the encoded image.
    inputs: Vec<Vec<T>>,
    /// Post-ReLU conv output of each stage.
    activations: Vec<Vec<T>>,
    /// For each pooled value, its index in the stage activation.
    pool_index: Vec<Vec<u32>>,
    flat: Vec<T>,
    hidden: Vec<T>,
    logits: Vec<T>,
}

/// Loss and parameter gradient of one example or the sum over a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub loss: f64,
    pub values: Vec<f32>,
}

impl Network {
    pub fn new(config: &ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let table = config.layout_table();
        let offset = |name: &str| table.iter().find(|b| b.name == name).expect("block exists").offset;
        let mut stages = Vec::with_capacity(config.conv_stages.len());
        let mut in_c = config.input_channels;
        let mut side = config.input_px;
        for (s, &out_c) in config.conv_stages.iter().enumerate() {
            stages.push(Stage {
                in_c,
                out_c,
                side,
                weight: offset(&format!("conv{s}.weight")),
                bias: offset(&format!("conv{s}.bias")),
            });
            in_c = out_c;
            side /= 2;
        }
        Ok(Network {
            config: config.clone(),
            stages,
            flat: config.flat_features(),
            fc1_w: offset("fc1.weight"),
            fc1_b: offset("fc1.bias"),
            fc2_w: offset("fc2.weight"),
            fc2_b: offset("fc2.bias"),
            param_count: table.iter().map(|b| b.len).sum(),
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    /// Channel-planar input, `(p / 255 - 0.5) / 0.5` per pixel.
    pub fn encode_input<T: Scalar>(&self, image: &SuperChatImage) -> Result<Vec<T>, ModelError> {
        self.config.check_image(image)?;
        let plane: Vec<T> = image
            .grey()
            .iter()
            .map(|&p| (T::from_f64(p as f64) / T::from_f64(255.0) - T::from_f64(0.5)) / T::from_f64(0.5))
            .collect();
        let mut out = Vec::with_capacity(plane.len() * self.config.input_channels);
        for _ in 0..self.config.input_channels {
            out.extend_from_slice(&plane);
        }
        Ok(out)
    }

    fn check_lengths<T>(&self, params: &[T], input: &[T]) {
        assert_eq!(params.len(), self.param_count, "parameter array length");
        let n = self.config.input_px * self.config.input_px * self.config.input_channels;
        assert_eq!(input.len(), n, "input length");
    }

    fn run<T: Scalar>(&self, params: &[T], input: &[T]) -> Trace<T> {
        self.check_lengths(params, input);
        let mut inputs = vec![input.to_vec()];
        let mut activations = Vec::with_capacity(self.stages.len());
        let mut pool_index = Vec::with_capacity(self.stages.len());
        for st in &self.stages {
            let n = st.side * st.side;
            let mut act = vec![T::zero(); st.out_c * n];
            conv3x3_forward(
                inputs.last().unwrap(),
                st.in_c,
                st.side,
                &params[st.weight..st.weight + st.out_c * st.in_c * 9],
                &params[st.bias..st.bias + st.out_c],
                st.out_c,
                &mut act,
            );
            relu(&mut act);
            let half = st.side / 2;
            let mut pooled = vec![T::zero(); st.out_c * half * half];
            let mut idx = vec![0u32; pooled.len()];
            maxpool2_forward(&act, st.out_c, st.side, &mut pooled, &mut idx);
            activations.push(act);
            pool_index.push(idx);
            inputs.push(pooled);
        }
        let flat = inputs.pop().unwrap();
        let fc = self.config.fc_width;
        let v = self.config.num_classes;
        let mut hidden: Vec<T> = (0..fc)
            .map(|j| params[self.fc1_b + j] + dot(&params[self.fc1_w + j * self.flat..self.fc1_w + (j + 1) * self.flat], &flat))
            .collect();
        relu(&mut hidden);
        let logits: Vec<T> = (0..v)
            .map(|c| params[self.fc2_b + c] + dot(&params[self.fc2_w + c * fc..self.fc2_w + (c + 1) * fc], &hidden))
            .collect();
        Trace {
            inputs,
            activations,
            pool_index,
            flat,
            hidden,
            logits,
        }
    }

    pub fn logits<T: Scalar>(&self, params: &[T], input: &[T]) -> Vec<T> {
        self.run(params, input).logits
    }

    /// Which ReLUs are active and which pooling candidate won, as one
    /// vector. The loss is smooth between two points with equal patterns
    /// on the segment joining them.
    pub fn activation_pattern<T: Scalar>(&self, params: &[T], input: &[T]) -> Vec<u32> {
        let t = self.run(params, input);
        let on = |v: &Vec<T>| v.iter().map(|&x| u32::from(x > T::zero())).collect::<Vec<_>>();
        let mut pattern = Vec::new();
        for (act, idx) in t.activations.iter().zip(&t.pool_index) {
            pattern.extend(on(act));
            pattern.extend_from_slice(idx);
        }
        pattern.extend(on(&t.hidden));
        pattern
    }

    fn check_label(&self, label: usize) -> Result<(), ModelError> {
        if label >= self.config.num_classes {
            return Err(ModelError::Label {
                label,
                num_classes: self.config.num_classes,
            });
        }
        Ok(())
    }

    /// Cross-entropy of softmax(logits) against `label`.
    pub fn loss<T: Scalar>(&self, params: &[T], input: &[T], label: usize) -> Result<f64, ModelError> {
        self.check_label(label)?;
        Ok(-log_softmax(&self.logits(params, input))[label])
    }

    /// Loss and exact gradient with respect to every parameter, in a fresh
    /// array aligned with `params`.
    pub fn loss_and_gradient<T: Scalar>(
        &self,
        params: &[T],
        input: &[T],
        label: usize,
    ) -> Result<(f64, Vec<T>), ModelError> {
        self.check_label(label)?;
        let trace = self.run(params, input);
        let loss = -log_softmax(&trace.logits)[label];
        let mut grad = vec![T::zero(); self.param_count];
        let fc = self.config.fc_width;

        let p = softmax(&trace.logits);
        let dlogits: Vec<T> = p
            .iter()
            .enumerate()
            .map(|(c, &pc)| T::from_f64(if c == label { pc - 1.0 } else { pc }))
            .collect();

        let mut dhidden = vec![T::zero(); fc];
        for (c, &d) in dlogits.iter().enumerate() {
            grad[self.fc2_b + c] = d;
            let row = self.fc2_w + c * fc;
            scale_into(&mut grad[row..row + fc], d, &trace.hidden);
            axpy(&mut dhidden, d, &params[row..row + fc]);
        }
        relu_backward(&mut dhidden, &trace.hidden);

        let mut dflat = vec![T::zero(); self.flat];
        for (j, &d) in dhidden.iter().enumerate() {
            grad[self.fc1_b + j] = d;
            if d == T::zero() {
                continue;
            }
            let row = self.fc1_w + j * self.flat;
            scale_into(&mut grad[row..row + self.flat], d, &trace.flat);
            axpy(&mut dflat, d, &params[row..row + self.flat]);
        }

        let mut dpooled = dflat;
        for (s, st) in self.stages.iter().enumerate().rev() {
            let act = &trace.activations[s];
            let mut dact = vec![T::zero(); act.len()];
            for (&i, &d) in trace.pool_index[s].iter().zip(&dpooled) {
                dact[i as usize] += d;
            }
            relu_backward(&mut dact, act);
            let wlen = st.out_c * st.in_c * 9;
            let mut din = if s > 0 { Some(vec![T::zero(); st.in_c * st.side * st.side]) } else { None };
            let (head, tail) = grad.split_at_mut(st.bias);
            conv3x3_backward(
                &trace.inputs[s],
                st.in_c,
                st.side,
                &params[st.weight..st.weight + wlen],
                st.out_c,
                &dact,
                &mut head[st.weight..st.weight + wlen],
                &mut tail[..st.out_c],
                din.as_deref_mut(),
            );
            if let Some(din) = din {
                dpooled = din;
            }
        }
        Ok((loss, grad))
    }
}

/// Seeded fan-in-scaled uniform weights, `U(-sqrt(6/fan_in), sqrt(6/fan_in))`;
/// biases start at zero. The returned checkpoint is not yet bound to a
/// vocabulary.
pub fn init_model(config: &ModelConfig) -> Result<ModelCheckpoint, ModelError> {
    let net = Network::new(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = vec![0f32; net.param_count];
    for block in config.layout_table() {
        if !block.name.ends_with(".weight") {
            continue;
        }
        let fan_in: usize = block.shape[1..].iter().product();
        let bound = (6.0 / fan_in as f64).sqrt() as f32;
        for p in &mut params[block.offset..block.offset + block.len] {
            *p = rng.random_range(-bound..bound);
        }
    }
    Ok(ModelCheckpoint::new(config.clone(), params, 0, String::new()))
}

pub fn forward(checkpoint: &ModelCheckpoint, image: &SuperChatImage) -> Result<Vec<f32>, ModelError> {
    let net = Network::new(&checkpoint.config)?;
    let input = net.encode_input::<f32>(image)?;
    Ok(net.logits(&checkpoint.parameters, &input))
}

pub fn backward(checkpoint: &ModelCheckpoint, image: &SuperChatImage, label: usize) -> Result<Gradient, ModelError> {
    let net = Network::new(&checkpoint.config)?;
    let input = net.encode_input::<f32>(image)?;
    let (loss, values) = net.loss_and_gradient(&checkpoint.parameters, &input, label)?;
    Ok(Gradient { loss, values })
}

/// Sum of per-example gradients and losses, reduced in batch order.
pub fn batch_gradient(
    checkpoint: &ModelCheckpoint,
    batch: &[(&SuperChatImage, usize)],
) -> Result<Gradient, ModelError> {
    let net = Network::new(&checkpoint.config)?;
    let mut total = Gradient {
        loss: 0.0,
        values: vec![0.0; net.param_count],
    };
    for &(image, label) in batch {
        let input = net.encode_input::<f32>(image)?;
        let (loss, g) = net.loss_and_gradient(&checkpoint.parameters, &input, label)?;
        total.loss += loss;
        for (t, x) in total.values.iter_mut().zip(g) {
            *t += x;
        }
    }
    Ok(total)
}

fn relu<T: Scalar>(x: &mut [T]) {
    for v in x {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

/// Zeroes gradient entries whose forward activation was clamped.
fn relu_backward<T: Scalar>(grad: &mut [T], activation: &[T]) {
    for (g, &a) in grad.iter_mut().zip(activation) {
        if a <= T::zero() {
            *g = T::zero();
        }
    }
}

fn axpy<T: Scalar>(y: &mut [T], a: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn scale_into<T: Scalar>(dst: &mut [T], a: T, x: &[T]) {
    for (d, &xi) in dst.iter_mut().zip(x) {
        *d = a * xi;
    }
}

/// Dot product with eight fixed accumulators (vectorizable, and the
/// summation order is fixed so results are reproducible).
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = T::zero();
    for (&x, &y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// 3x3 convolution, stride 1, zero padding 1, planar `[c][y][x]` buffers.
fn conv3x3_forward<T: Scalar>(input: &[T], in_c: usize, side: usize, w: &[T], b: &[T], out_c: usize, out: &mut [T]) {
    let n = side * side;
    for o in 0..out_c {
        let plane = &mut out[o * n..(o + 1) * n];
        plane.fill(b[o]);
        for i in 0..in_c {
            let src = &input[i * n..(i + 1) * n];
            let k = &w[(o * in_c + i) * 9..(o * in_c + i) * 9 + 9];
            for y in 0..side {
                let dst = &mut plane[y * side..(y + 1) * side];
                for ky in 0..3 {
                    let Some(sy) = (y + ky).checked_sub(1).filter(|&sy| sy < side) else {
                        continue;
                    };
                    let srow = &src[sy * side..(sy + 1) * side];
                    axpy(&mut dst[1..], k[ky * 3], &srow[..side - 1]);
                    axpy(dst, k[ky * 3 + 1], srow);
                    axpy(&mut dst[..side - 1], k[ky * 3 + 2], &srow[1..]);
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn conv3x3_backward<T: Scalar>(
    input: &[T],
    in_c: usize,
    side: usize,
    w: &[T],
    out_c: usize,
    dout: &[T],
    dw: &mut [T],
    db: &mut [T],
    mut din: Option<&mut [T]>,
) {
    let n = side * side;
    for o in 0..out_c {
        let g = &dout[o * n..(o + 1) * n];
        db[o] = g.iter().copied().sum();
        for i in 0..in_c {
            let src = &input[i * n..(i + 1) * n];
            let base = (o * in_c + i) * 9;
            for ky in 0..3 {
                let mut acc = [T::zero(); 3];
                for y in 0..side {
                    let Some(sy) = (y + ky).checked_sub(1).filter(|&sy| sy < side) else {
                        continue;
                    };
                    let grow = &g[y * side..(y + 1) * side];
                    let srow = &src[sy * side..(sy + 1) * side];
                    acc[0] += dot(&grow[1..], &srow[..side - 1]);
                    acc[1] += dot(grow, srow);
                    acc[2] += dot(&grow[..side - 1], &srow[1..]);
                    if let Some(din) = din.as_deref_mut() {
                        let drow = &mut din[i * n + sy * side..i * n + (sy + 1) * side];
                        axpy(&mut drow[..side - 1], w[base + ky * 3], &grow[1..]);
                        axpy(drow, w[base + ky * 3 + 1], grow);
                        axpy(&mut drow[1..], w[base + ky * 3 + 2], &grow[..side - 1]);
                    }
                }
                dw[base + ky * 3..base + ky * 3 + 3].copy_from_slice(&acc);
            }
        }
    }
}

/// 2x2 stride-2 max-pool. Ties resolve to the first candidate in
/// (top-left, top-right, bottom-left, bottom-right) order.
fn maxpool2_forward<T: Scalar>(input: &[T], channels: usize, side: usize, out: &mut [T], index: &mut [u32]) {
    let half = side / 2;
    for c in 0..channels {
        let base = c * side * side;
        for py in 0..half {
            for px in 0..half {
                let tl = base + 2 * py * side + 2 * px;
                let mut best = tl;
                for cand in [tl + 1, tl + side, tl + side + 1] {
                    if input[cand] > input[best] {
                        best = cand;
                    }
                }
                let o = c * half * half + py * half + px;
                out[o] = input[best];
                index[o] = best as u32;
            }
        }
    }
}
