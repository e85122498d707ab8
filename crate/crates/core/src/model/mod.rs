//! Convolutional next-character classifier.
//!
//! Architecture: `S` stages of (3x3 conv, stride 1, zero padding 1) ->
//! ReLU -> 2x2 max-pool, then a ReLU hidden layer of `fc_width` units
//! and a linear layer with one logit per vocabulary class.
//!
//! # Parameter layout
//!
//! Parameters are one flat array, blocks in this order:
//!
//! | block            | shape                                   |
//! |------------------|-----------------------------------------|
//! | `conv{s}.weight` | `[out_c][in_c][3][3]`, for s = 0..S     |
//! | `conv{s}.bias`   | `[out_c]`                               |
//! | `fc1.weight`     | `[fc_width][C_last * side * side]`      |
//! | `fc1.bias`       | `[fc_width]`                            |
//! | `fc2.weight`     | `[num_classes][fc_width]`               |
//! | `fc2.bias`       | `[num_classes]`                         |
//!
//! Each conv weight/bias pair is emitted stage by stage. `side` is
//! `input_px / 2^S` and the flattened features are channel-major
//! (`[c][y][x]`).

mod checkpoint;
mod loss;
pub mod network;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError, ModelCheckpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use loss::{argmax, cross_entropy, log_softmax, softmax};
pub use network::{Gradient, Network};
pub use train::{evaluate, mean_loss, train, CurvePoint, Hyperparams, LearningCurve, SgdMomentum};

use thiserror::Error;

use crate::render::SuperChatImage;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("image is {side}x{side}x{channels} but the model expects {input_px}x{input_px}x{input_channels}")]
    Shape {
        side: usize,
        channels: usize,
        input_px: usize,
        input_channels: usize,
    },
    #[error("label {label} is out of range for {num_classes} classes")]
    Label { label: usize, num_classes: usize },
    #[error("vocabulary fingerprint {found} does not match the checkpoint's {expected}")]
    VocabMismatch { expected: String, found: String },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Render(#[from] crate::render::RenderError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub input_px: usize,
    pub input_channels: usize,
    /// Filters per conv stage; every stage uses 3x3 kernels.
    pub conv_stages: Vec<usize>,
    pub fc_width: usize,
    pub num_classes: usize,
    pub seed: u64,
}

/// One named block of the flat parameter array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamBlock {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub len: usize,
}

impl ModelConfig {
    /// Three conv stages (8, 16, 32 filters), fc 128, on a 112x112 grey image.
    pub fn reference_desk(num_classes: usize) -> Self {
        ModelConfig {
            input_px: 112,
            input_channels: 1,
            conv_stages: vec![8, 16, 32],
            fc_width: 128,
            num_classes,
            seed: 0,
        }
    }

    /// Smallest useful network: one stage of 2 filters on 16x16, fc 8, 4 classes.
    pub fn tiny(seed: u64) -> Self {
        ModelConfig {
            input_px: 16,
            input_channels: 1,
            conv_stages: vec![2],
            fc_width: 8,
            num_classes: 4,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Config(m));
        if self.num_classes < 2 {
            return bad(format!("num_classes must be at least 2, got {}", self.num_classes));
        }
        if self.conv_stages.is_empty() {
            return bad("at least one conv stage is required".into());
        }
        if self.conv_stages.contains(&0) || self.fc_width == 0 || self.input_channels == 0 {
            return bad("filter counts, fc_width and input_channels must be positive".into());
        }
        let factor = 1usize << self.conv_stages.len();
        if self.input_px == 0 || !self.input_px.is_multiple_of(factor) {
            return bad(format!(
                "input_px {} is not divisible by 2^{} (one 2x2 pool per stage)",
                self.input_px,
                self.conv_stages.len()
            ));
        }
        Ok(())
    }

    /// Side of the feature map after the last pool.
    pub fn final_side(&self) -> usize {
        self.input_px >> self.conv_stages.len()
    }

    pub fn flat_features(&self) -> usize {
        self.conv_stages.last().copied().unwrap_or(0) * self.final_side() * self.final_side()
    }

    pub fn layout_table(&self) -> Vec<ParamBlock> {
        let mut blocks = Vec::new();
        let mut offset = 0;
        let mut push = |name: String, shape: Vec<usize>| {
            let len = shape.iter().product();
            blocks.push(ParamBlock { name, shape, offset, len });
            offset += len;
        };
        let mut in_c = self.input_channels;
        for (s, &out_c) in self.conv_stages.iter().enumerate() {
            push(format!("conv{s}.weight"), vec![out_c, in_c, 3, 3]);
            push(format!("conv{s}.bias"), vec![out_c]);
            in_c = out_c;
        }
        push("fc1.weight".into(), vec![self.fc_width, self.flat_features()]);
        push("fc1.bias".into(), vec![self.fc_width]);
        push("fc2.weight".into(), vec![self.num_classes, self.fc_width]);
        push("fc2.bias".into(), vec![self.num_classes]);
        blocks
    }

    pub fn param_count(&self) -> usize {
        self.layout_table().iter().map(|b| b.len).sum()
    }

    /// Key/value text form used inside checkpoint headers.
    pub fn to_text(&self) -> String {
        let stages: Vec<String> = self.conv_stages.iter().map(|s| s.to_string()).collect();
        format!(
            "input_px={}\ninput_channels={}\nconv_stages={}\nfc_width={}\nnum_classes={}\nseed={}\n",
            self.input_px,
            self.input_channels,
            stages.join(","),
            self.fc_width,
            self.num_classes,
            self.seed
        )
    }

    pub fn check_image(&self, image: &SuperChatImage) -> Result<(), ModelError> {
        if image.side() != self.input_px || image.channels() != self.input_channels {
            return Err(ModelError::Shape {
                side: image.side(),
                channels: image.channels(),
                input_px: self.input_px,
                input_channels: self.input_channels,
            });
        }
        Ok(())
    }
}

pub use network::init_model;
pub use network::{backward, batch_gradient, forward};
