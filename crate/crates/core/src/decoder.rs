//! Iterative response generation: render (input, partial response),
//! classify, append, repeat until EOS or the response portion is full.

use std::cmp::Ordering;
use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::{normalize, ClassIndex, Vocabulary, EOS_INDEX};
use crate::glyph::GlyphSource;
use crate::layout::LayoutConfig;
use crate::model::{argmax, softmax, ModelCheckpoint, ModelError, Network};
use crate::render::{RenderError, Renderer};

/// Alternatives recorded per step.
pub const TRACE_TOP_K: usize = 5;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("input is empty after normalization")]
    EmptyInput,
    #[error("input has {len} characters but the input portion holds {capacity}")]
    InputOverflow { len: usize, capacity: usize },
    #[error("beam_width must be at least 1")]
    BeamWidth,
    #[error("partial response contains class {0}, which has no character")]
    InvalidPartial(ClassIndex),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Render(#[from] RenderError),
}

/// Anything that yields a next-class distribution for (input, partial).
pub trait NextCharModel {
    fn num_classes(&self) -> usize;
    fn input_capacity(&self) -> usize;
    fn response_capacity(&self) -> usize;
    /// Character of a non-EOS class.
    fn class_char(&self, class: ClassIndex) -> Option<char>;
    /// Probabilities over all classes, summing to 1.
    fn predict(&self, input: &[char], partial: &[ClassIndex]) -> Result<Vec<f64>, DecodeError>;

    fn class_label(&self, class: ClassIndex) -> String {
        match self.class_char(class) {
            Some(c) => c.to_string(),
            None => "<EOS>".to_string(),
        }
    }
}

/// The CNN classifier behind a renderer: the production model.
#[derive(Debug, Clone)]
pub struct CnnPredictor {
    checkpoint: ModelCheckpoint,
    vocab: Vocabulary,
    renderer: Renderer,
    net: Network,
}

impl CnnPredictor {
    pub fn new(checkpoint: ModelCheckpoint, vocab: Vocabulary, renderer: Renderer) -> Result<Self, ModelError> {
        checkpoint.check_vocab(&vocab)?;
        let layout = renderer.layout();
        let cfg = &checkpoint.config;
        if layout.image_px() != cfg.input_px || layout.channels() != cfg.input_channels {
            return Err(ModelError::Shape {
                side: layout.image_px(),
                channels: layout.channels(),
                input_px: cfg.input_px,
                input_channels: cfg.input_channels,
            });
        }
        let net = Network::new(cfg)?;
        Ok(CnnPredictor {
            checkpoint,
            vocab,
            renderer,
            net,
        })
    }

    pub fn checkpoint(&self) -> &ModelCheckpoint {
        &self.checkpoint
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn renderer(&self) -> &Renderer {
        &self.renderer
    }

    pub fn predict_chars(&self, input: &[char], partial: &[char]) -> Result<Vec<f64>, DecodeError> {
        let image = self.renderer.render(input, partial)?;
        let x = self.net.encode_input::<f32>(&image)?;
        Ok(softmax(&self.net.logits(&self.checkpoint.parameters, &x)))
    }
}

impl NextCharModel for CnnPredictor {
    fn num_classes(&self) -> usize {
        self.vocab.len()
    }

    fn input_capacity(&self) -> usize {
        self.renderer.layout().input_capacity()
    }

    fn response_capacity(&self) -> usize {
        self.renderer.layout().response_capacity()
    }

    fn class_char(&self, class: ClassIndex) -> Option<char> {
        self.vocab.char_of(class)
    }

    fn predict(&self, input: &[char], partial: &[ClassIndex]) -> Result<Vec<f64>, DecodeError> {
        let chars = partial
            .iter()
            .map(|&c| self.vocab.char_of(c).ok_or(DecodeError::InvalidPartial(c)))
            .collect::<Result<Vec<_>, _>>()?;
        self.predict_chars(input, &chars)
    }
}

/// `softmax(forward(render(input, partial)))` for a one-off query.
pub fn predict_next(
    checkpoint: &ModelCheckpoint,
    layout: &LayoutConfig,
    glyphs: &GlyphSource,
    input: &[char],
    partial: &[char],
) -> Result<Vec<f64>, DecodeError> {
    let net = Network::new(&checkpoint.config)?;
    let image = crate::render::render(layout, glyphs, input, partial)?;
    let x = net.encode_input::<f32>(&image)?;
    Ok(softmax(&net.logits(&checkpoint.parameters, &x)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeStep {
    pub position: usize,
    pub chosen_class: ClassIndex,
    pub probability: f64,
    /// Sorted by probability descending, then class ascending. Always
    /// contains `chosen_class`.
    pub top_k: Vec<(ClassIndex, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub text: String,
    pub classes: Vec<ClassIndex>,
    pub steps: Vec<DecodeStep>,
}

fn ranked(probs: &[f64]) -> Vec<(ClassIndex, f64)> {
    let mut r: Vec<(ClassIndex, f64)> = probs.iter().copied().enumerate().collect();
    r.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    r
}

fn make_step(position: usize, probs: &[f64], chosen: ClassIndex) -> DecodeStep {
    let all = ranked(probs);
    let mut top_k: Vec<_> = all.iter().take(TRACE_TOP_K).copied().collect();
    if !top_k.iter().any(|&(c, _)| c == chosen) {
        top_k.push((chosen, probs[chosen]));
    }
    DecodeStep {
        position,
        chosen_class: chosen,
        probability: probs[chosen],
        top_k,
    }
}

fn prepare_input<M: NextCharModel + ?Sized>(model: &M, input: &[char]) -> Result<Vec<char>, DecodeError> {
    let input = normalize(input);
    if input.is_empty() {
        return Err(DecodeError::EmptyInput);
    }
    if input.len() > model.input_capacity() {
        return Err(DecodeError::InputOverflow {
            len: input.len(),
            capacity: model.input_capacity(),
        });
    }
    Ok(input)
}

fn text_of<M: NextCharModel + ?Sized>(model: &M, classes: &[ClassIndex]) -> String {
    classes.iter().filter_map(|&c| model.class_char(c)).collect()
}

/// Greedy decoding from an empty partial response. Argmax ties go to the
/// lowest class. Stops on EOS (not emitted) or when the response portion
/// is full.
pub fn decode_greedy<M: NextCharModel + ?Sized>(model: &M, input: &[char]) -> Result<Decoded, DecodeError> {
    let input = prepare_input(model, input)?;
    let mut classes = Vec::new();
    let mut steps = Vec::new();
    while classes.len() < model.response_capacity() {
        let probs = model.predict(&input, &classes)?;
        let chosen = argmax(&probs);
        steps.push(make_step(classes.len(), &probs, chosen));
        if chosen == EOS_INDEX {
            break;
        }
        classes.push(chosen);
    }
    Ok(Decoded {
        text: text_of(model, &classes),
        classes,
        steps,
    })
}

/// Per-step trace of an arbitrary class sequence, e.g. a beam result.
/// A trailing EOS in `classes` gets its own step.
pub fn trace_sequence<M: NextCharModel + ?Sized>(
    model: &M,
    input: &[char],
    classes: &[ClassIndex],
) -> Result<Vec<DecodeStep>, DecodeError> {
    let input = prepare_input(model, input)?;
    classes
        .iter()
        .enumerate()
        .map(|(k, &c)| Ok(make_step(k, &model.predict(&input, &classes[..k])?, c)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamHypothesis {
    /// Classes so far; ends in EOS when the hypothesis terminated that way.
    pub partial: Vec<ClassIndex>,
    /// Sum of log probabilities.
    pub log_score: f64,
    pub finished: bool,
}

impl BeamHypothesis {
    fn rank_score(&self, length_normalize: bool) -> f64 {
        if length_normalize && !self.partial.is_empty() {
            self.log_score / self.partial.len() as f64
        } else {
            self.log_score
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BeamOptions {
    /// Rank by mean instead of summed log probability.
    pub length_normalize: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamResult {
    pub text: String,
    pub best: BeamHypothesis,
    /// Completed hypotheses, best first.
    pub completed: Vec<BeamHypothesis>,
}

fn better(a: &BeamHypothesis, b: &BeamHypothesis, length_normalize: bool) -> Ordering {
    b.rank_score(length_normalize)
        .partial_cmp(&a.rank_score(length_normalize))
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.partial.cmp(&b.partial))
}

/// Beam search over class sequences. Every active hypothesis is expanded
/// with all classes; the `beam_width` best candidates survive, finished
/// ones (EOS, or response portion full) retire into the completed pool.
/// Returns the best completed hypothesis.
pub fn decode_beam<M: NextCharModel + ?Sized>(
    model: &M,
    input: &[char],
    beam_width: usize,
    options: BeamOptions,
) -> Result<BeamResult, DecodeError> {
    if beam_width == 0 {
        return Err(DecodeError::BeamWidth);
    }
    let input = prepare_input(model, input)?;
    let capacity = model.response_capacity();
    let norm = options.length_normalize;
    let mut active = vec![BeamHypothesis {
        partial: Vec::new(),
        log_score: 0.0,
        finished: capacity == 0,
    }];
    let mut completed: Vec<BeamHypothesis> = Vec::new();
    if capacity == 0 {
        completed.append(&mut active);
    }
    while !active.is_empty() {
        let mut candidates = Vec::with_capacity(active.len() * model.num_classes());
        for h in &active {
            let probs = model.predict(&input, &h.partial)?;
            for (c, &p) in probs.iter().enumerate() {
                let mut partial = h.partial.clone();
                partial.push(c);
                let finished = c == EOS_INDEX || partial.len() >= capacity;
                candidates.push(BeamHypothesis {
                    partial,
                    log_score: h.log_score + p.ln(),
                    finished,
                });
            }
        }
        candidates.sort_by(|a, b| better(a, b, norm));
        candidates.truncate(beam_width);
        active.clear();
        for h in candidates {
            if h.finished {
                completed.push(h);
            } else {
                active.push(h);
            }
        }
    }
    completed.sort_by(|a, b| better(a, b, norm));
    let best = completed[0].clone();
    Ok(BeamResult {
        text: text_of(model, &best.partial),
        best,
        completed,
    })
}

/// One line per step: `position <TAB> char <TAB> probability <TAB> top-k`,
/// the top-k column as space-separated `char:probability` items.
pub fn format_trace<M: NextCharModel + ?Sized>(model: &M, steps: &[DecodeStep]) -> String {
    let mut out = String::new();
    for s in steps {
        let top: Vec<String> = s
            .top_k
            .iter()
            .map(|&(c, p)| format!("{}:{p:.6}", model.class_label(c)))
            .collect();
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{}",
            s.position,
            model.class_label(s.chosen_class),
            s.probability,
            top.join(" ")
        )
        .unwrap();
    }
    out
}
