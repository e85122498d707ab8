//! Memorizes the toy corpus, then serves it over HTTP until ctrl-c.
//!
//! ```bash
//! cargo run --release -p superchat --example serve
//! curl -s localhost:8080/chat -d '{"text":"你好","trace":true}'
//! ```

use superchat::model::{init_model, train, Hyperparams};
use superchat::service::{serve, AppState, Engine};
use superchat::toy::memorization_manifest;
use superchat::{CnnPredictor, GlyphSource, LayoutConfig, ModelConfig, Renderer};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let manifest = memorization_manifest();
    let renderer = Renderer::new(LayoutConfig::desk(), GlyphSource::procedural(0));
    let init = init_model(&ModelConfig::reference_desk(manifest.vocab.len()))?;
    let hp = Hyperparams {
        epochs: usize::MAX,
        max_iterations: Some(5000),
        stop_at_train_accuracy: Some(1.0),
        accuracy_check_interval: 20,
        ..Hyperparams::default()
    };
    let (trained, _) = tokio::task::block_in_place(|| train(&init, &manifest, &renderer, &hp))?;
    let engine = Engine::new(CnnPredictor::new(trained, manifest.vocab, renderer.clone())?);
    println!("model {}", engine.model_id());

    let listener = tokio::net::TcpListener::bind("127.0.0.1:8080").await?;
    println!("listening on http://{}", listener.local_addr()?);
    serve(listener, AppState::new(renderer, Some(engine)), async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
