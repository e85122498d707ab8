//! Dialogue generation as image classification.
//!
//! An input sentence and the response generated so far are drawn into one
//! grid image (upper rows: input, lower rows: partial response). A CNN
//! classifies the image into the next response character or EOS, and the
//! loop repeats until EOS or the response rows are full.
//!
//! Module map:
//!
//! * [`layout`], [`glyph`], [`render`]: text to image.
//! * [`corpus`]: dialogue ingestion, vocabulary, labelled examples, manifests.
//! * [`model`]: the classifier, its training loop and checkpoint format.
//! * [`decoder`]: greedy and beam decoding.
//! * [`service`]: HTTP endpoints.
//! * [`cli`]: the `superchat` command line.

pub mod cli;
pub mod corpus;
pub mod decoder;
pub mod glyph;
pub mod layout;
pub mod model;
pub mod render;
pub mod service;
pub mod toy;

pub use corpus::{DialoguePair, Manifest, Split, TrainingExample, Vocabulary};
pub use decoder::{decode_beam, decode_greedy, CnnPredictor, NextCharModel};
pub use glyph::GlyphSource;
pub use layout::{compute_layout, LayoutConfig};
pub use model::{ModelCheckpoint, ModelConfig};
pub use render::{Renderer, SuperChatImage};
