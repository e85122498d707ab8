//! Renders one SuperChat image and writes it as PNG.
//!
//! ```bash
//! cargo run -p superchat --example render_image -- 你在哪里 我在 out.png [font.ttf]
//! ```

use superchat::render::export_png;
use superchat::{GlyphSource, LayoutConfig, Renderer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let input = args.first().map(String::as_str).unwrap_or("你在哪里");
    let partial = args.get(1).map(String::as_str).unwrap_or("我在");
    let out = args.get(2).map(String::as_str).unwrap_or("superchat.png");
    let glyphs = match args.get(3) {
        Some(font) => GlyphSource::font_file(font, None)?,
        None => GlyphSource::procedural(0),
    };
    let renderer = Renderer::new(LayoutConfig::standard(), glyphs);
    let image = renderer.render_str(input, partial)?;
    export_png(&image, out)?;
    println!("{out}: {0}x{0}, {1} channels", image.side(), image.channels());
    let missing = renderer.glyphs().missing_glyphs();
    if !missing.is_empty() {
        println!("font lacks {} glyphs, drawn procedurally", missing.len());
    }
    Ok(())
}
