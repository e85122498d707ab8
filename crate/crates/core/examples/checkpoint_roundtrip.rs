//! Saves a freshly initialized checkpoint, reads it back and prints the
//! container header and parameter layout.

use superchat::model::{forward, init_model, load_checkpoint, save_checkpoint};
use superchat::toy::memorization_manifest;
use superchat::{GlyphSource, LayoutConfig, ModelConfig, Renderer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let manifest = memorization_manifest();
    let config = ModelConfig::reference_desk(manifest.vocab.len());
    let mut ckpt = init_model(&config)?;
    ckpt.bind_vocab(&manifest.vocab)?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("desk.ckpt");
    save_checkpoint(&ckpt, &path)?;
    let bytes = std::fs::read(&path)?;
    let loaded = load_checkpoint(&path)?;
    println!("{} bytes, fingerprint {}", bytes.len(), loaded.fingerprint());
    for block in config.layout_table() {
        println!("{:>14} {:?} @ {}", block.name, block.shape, block.offset);
    }

    let image = Renderer::new(LayoutConfig::desk(), GlyphSource::procedural(0)).render_str("你好", "")?;
    let same = forward(&ckpt, &image)? == forward(&loaded, &image)?;
    println!("forward outputs identical after reload: {same}");
    Ok(())
}
