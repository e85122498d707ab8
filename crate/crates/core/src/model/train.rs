use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::checkpoint::ModelCheckpoint;
use super::loss::argmax;
use super::network::Network;
use super::ModelError;
use crate::corpus::{DialoguePair, Manifest, Split, TrainingExample};
use crate::render::{Renderer, SuperChatImage};

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    pub batch_size: usize,
    pub learning_rate: f32,
    pub momentum: f32,
    pub epochs: usize,
    pub seed: u64,
    /// Iterations between learning-curve samples.
    pub eval_interval: u64,
    /// Hard cap on optimizer steps, across epochs.
    pub max_iterations: Option<u64>,
    /// Stop once train-split accuracy reaches this value; checked every
    /// `accuracy_check_interval` iterations.
    pub stop_at_train_accuracy: Option<f64>,
    pub accuracy_check_interval: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            batch_size: 5,
            learning_rate: 0.003,
            momentum: 0.9,
            epochs: 1,
            seed: 0,
            eval_interval: 500,
            max_iterations: None,
            stop_at_train_accuracy: None,
            accuracy_check_interval: 50,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if self.eval_interval == 0 || self.accuracy_check_interval == 0 {
            return bad("evaluation intervals must be positive");
        }
        Ok(())
    }
}

/// SGD with heavy-ball momentum: `v = momentum * v + g; theta -= lr * v`,
/// where `g` is the batch-mean gradient.
#[derive(Debug, Clone)]
pub struct SgdMomentum {
    learning_rate: f32,
    momentum: f32,
    velocity: Vec<f32>,
}

impl SgdMomentum {
    pub fn new(learning_rate: f32, momentum: f32, param_count: usize) -> Self {
        SgdMomentum {
            learning_rate,
            momentum,
            velocity: vec![0.0; param_count],
        }
    }

    pub fn step(&mut self, params: &mut [f32], grad_sum: &[f32], batch_len: usize) {
        let scale = 1.0 / batch_len as f32;
        for ((p, v), &g) in params.iter_mut().zip(&mut self.velocity).zip(grad_sum) {
            *v = self.momentum * *v + g * scale;
            *p -= self.learning_rate * *v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub iteration: u64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
    /// Optimizer steps actually taken.
    pub iterations: u64,
}

impl LearningCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,accuracy\n");
        for p in &self.points {
            writeln!(s, "{},{:.6}", p.iteration, p.accuracy).unwrap();
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Renders examples of one manifest on demand.
struct Images<'a> {
    pairs: HashMap<u64, &'a DialoguePair>,
    renderer: &'a Renderer,
}

impl<'a> Images<'a> {
    fn new(manifest: &'a Manifest, renderer: &'a Renderer) -> Self {
        Images {
            pairs: manifest.pair_index(),
            renderer,
        }
    }

    fn render(&self, e: &TrainingExample) -> Result<SuperChatImage, ModelError> {
        let pair = self
            .pairs
            .get(&e.pair_id)
            .ok_or_else(|| ModelError::Data(format!("example cites unknown pair {}", e.pair_id)))?;
        Ok(self.renderer.render(&pair.input, &pair.response[..e.prefix_len])?)
    }
}

fn split_examples(manifest: &Manifest, split: Split) -> Result<Vec<&TrainingExample>, ModelError> {
    let ex: Vec<_> = manifest.examples_in(split).collect();
    if ex.is_empty() {
        return Err(ModelError::Data(format!("the {split} split is empty")));
    }
    Ok(ex)
}

/// Fraction of examples in `split` whose argmax logit equals the label.
pub fn evaluate(
    checkpoint: &ModelCheckpoint,
    manifest: &Manifest,
    renderer: &Renderer,
    split: Split,
) -> Result<f64, ModelError> {
    checkpoint.check_vocab(&manifest.vocab)?;
    let examples = split_examples(manifest, split)?;
    let net = Network::new(&checkpoint.config)?;
    let images = Images::new(manifest, renderer);
    let mut correct = 0usize;
    for e in &examples {
        let input = net.encode_input::<f32>(&images.render(e)?)?;
        if argmax(&net.logits(&checkpoint.parameters, &input)) == e.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / examples.len() as f64)
}

/// Mean cross-entropy over `split`.
pub fn mean_loss(
    checkpoint: &ModelCheckpoint,
    manifest: &Manifest,
    renderer: &Renderer,
    split: Split,
) -> Result<f64, ModelError> {
    checkpoint.check_vocab(&manifest.vocab)?;
    let examples = split_examples(manifest, split)?;
    let net = Network::new(&checkpoint.config)?;
    let images = Images::new(manifest, renderer);
    let mut total = 0.0;
    for e in &examples {
        let input = net.encode_input::<f32>(&images.render(e)?)?;
        total += net.loss(&checkpoint.parameters, &input, e.label)?;
    }
    Ok(total / examples.len() as f64)
}

/// Minibatch SGD over the train split. Each epoch visits the train
/// examples in a seeded permutation; batch gradients are summed in batch
/// order. Every `eval_interval` iterations the test split (or the train
/// split, when no test examples exist) is scored into the curve.
///
/// An unbound checkpoint is bound to the manifest vocabulary; a bound one
/// must match it.
pub fn train(
    checkpoint: &ModelCheckpoint,
    manifest: &Manifest,
    renderer: &Renderer,
    hp: &Hyperparams,
) -> Result<(ModelCheckpoint, LearningCurve), ModelError> {
    hp.validate()?;
    let mut ckpt = checkpoint.clone();
    ckpt.bind_vocab(&manifest.vocab)?;
    let train_set = split_examples(manifest, Split::Train)?;
    let curve_split = if manifest.examples_in(Split::Test).next().is_some() {
        Split::Test
    } else {
        Split::Train
    };
    let net = Network::new(&ckpt.config)?;
    let images = Images::new(manifest, renderer);
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut opt = SgdMomentum::new(hp.learning_rate, hp.momentum, net.param_count());
    let mut curve = LearningCurve::default();
    let mut grad_sum = vec![0f32; net.param_count()];
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    'epochs: for _ in 0..hp.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(hp.batch_size) {
            grad_sum.fill(0.0);
            for &i in batch {
                let e = train_set[i];
                let input = net.encode_input::<f32>(&images.render(e)?)?;
                let (_, g) = net.loss_and_gradient(&ckpt.parameters, &input, e.label)?;
                for (s, x) in grad_sum.iter_mut().zip(g) {
                    *s += x;
                }
            }
            opt.step(&mut ckpt.parameters, &grad_sum, batch.len());
            ckpt.trained_examples += batch.len() as u64;
            curve.iterations += 1;
            let it = curve.iterations;

            if it % hp.eval_interval == 0 {
                let accuracy = evaluate(&ckpt, manifest, renderer, curve_split)?;
                log::info!("iteration {it}: {curve_split} accuracy {accuracy:.4}");
                curve.points.push(CurvePoint { iteration: it, accuracy });
            }
            if hp.max_iterations.is_some_and(|m| it >= m) {
                break 'epochs;
            }
            if let Some(target) = hp.stop_at_train_accuracy {
                if it % hp.accuracy_check_interval == 0
                    && evaluate(&ckpt, manifest, renderer, Split::Train)? >= target
                {
                    log::info!("iteration {it}: train accuracy reached {target}");
                    break 'epochs;
                }
            }
        }
    }
    Ok((ckpt, curve))
}
