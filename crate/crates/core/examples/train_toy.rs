//! Memorizes the ten-pair toy corpus with the reference desk CNN, then
//! decodes every toy input greedily.
//!
//! ```bash
//! cargo run --release -p superchat --example train_toy
//! ```

use std::time::Instant;

use superchat::corpus::Split;
use superchat::decoder::decode_greedy;
use superchat::model::{evaluate, init_model, mean_loss, train, Hyperparams};
use superchat::toy::{memorization_manifest, TOY_PAIRS};
use superchat::{CnnPredictor, GlyphSource, LayoutConfig, ModelConfig, Renderer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let manifest = memorization_manifest();
    let renderer = Renderer::new(LayoutConfig::desk(), GlyphSource::procedural(0));
    let config = ModelConfig::reference_desk(manifest.vocab.len());
    let init = init_model(&config)?;
    let mut bound = init.clone();
    bound.bind_vocab(&manifest.vocab)?;
    println!(
        "{} examples, {} classes, {} parameters, initial loss {:.4}",
        manifest.examples.len(),
        manifest.vocab.len(),
        config.param_count(),
        mean_loss(&bound, &manifest, &renderer, Split::Train)?
    );

    let hp = Hyperparams {
        epochs: usize::MAX,
        max_iterations: Some(5000),
        stop_at_train_accuracy: Some(1.0),
        accuracy_check_interval: 20,
        eval_interval: 100,
        ..Hyperparams::default()
    };
    let start = Instant::now();
    let (trained, curve) = train(&init, &manifest, &renderer, &hp)?;
    println!(
        "{} iterations in {:.1?}, train accuracy {:.4}, loss {:.4}",
        curve.iterations,
        start.elapsed(),
        evaluate(&trained, &manifest, &renderer, Split::Train)?,
        mean_loss(&trained, &manifest, &renderer, Split::Train)?
    );

    let predictor = CnnPredictor::new(trained, manifest.vocab.clone(), renderer)?;
    for (input, expected) in TOY_PAIRS {
        let chars: Vec<char> = input.chars().collect();
        let decoded = decode_greedy(&predictor, &chars)?;
        let mark = if decoded.text == expected { "ok " } else { "BAD" };
        println!("{mark} {input} -> {} ({} steps)", decoded.text, decoded.steps.len());
    }
    Ok(())
}
