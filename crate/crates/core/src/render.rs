//! Turning an (input, partial response) pair into a SuperChat image.

use std::io::Cursor;
use std::path::Path;

use image::{ExtendedColorType, ImageEncoder};
use thiserror::Error;

use crate::glyph::{GlyphSource, BACKGROUND};
use crate::layout::{LayoutConfig, Portion};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("{portion} text has {len} characters but the {portion} portion holds {capacity}")]
    Overflow {
        portion: Portion,
        len: usize,
        capacity: usize,
    },
    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("png encoding failed: {0}")]
    Png(#[from] image::ImageError),
}

/// A rendered image. Stored as a single grey plane; the channel count of
/// the layout is applied when pixels leave the type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperChatImage {
    layout: LayoutConfig,
    grey: Vec<u8>,
}

impl SuperChatImage {
    pub fn blank(layout: LayoutConfig) -> Self {
        let n = layout.image_px() * layout.image_px();
        SuperChatImage {
            layout,
            grey: vec![BACKGROUND; n],
        }
    }

    pub fn layout(&self) -> &LayoutConfig {
        &self.layout
    }

    pub fn side(&self) -> usize {
        self.layout.image_px()
    }

    pub fn channels(&self) -> usize {
        self.layout.channels()
    }

    /// The grey plane, `side * side` bytes row-major.
    pub fn grey(&self) -> &[u8] {
        &self.grey
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.grey[y * self.side() + x]
    }

    /// Interleaved `H x W x C` bytes with the grey plane copied into
    /// every channel.
    pub fn pixels(&self) -> Vec<u8> {
        let c = self.channels();
        if c == 1 {
            return self.grey.clone();
        }
        self.grey
            .iter()
            .flat_map(|&p| std::iter::repeat_n(p, c))
            .collect()
    }

    fn blit(&mut self, x0: usize, y0: usize, cell_px: usize, bitmap: &[u8]) {
        let side = self.side();
        for (dy, row) in bitmap.chunks_exact(cell_px).enumerate() {
            let start = (y0 + dy) * side + x0;
            self.grey[start..start + cell_px].copy_from_slice(row);
        }
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, RenderError> {
        let mut buf = Vec::new();
        let side = self.side() as u32;
        let color = if self.channels() == 1 {
            ExtendedColorType::L8
        } else {
            ExtendedColorType::Rgb8
        };
        image::codecs::png::PngEncoder::new(Cursor::new(&mut buf)).write_image(
            &self.pixels(),
            side,
            side,
            color,
        )?;
        Ok(buf)
    }
}

/// Layout plus glyph source: everything needed to turn text into images.
/// Immutable, so a shared reference can render from many threads.
#[derive(Debug, Clone)]
pub struct Renderer {
    layout: LayoutConfig,
    glyphs: GlyphSource,
}

impl Renderer {
    pub fn new(layout: LayoutConfig, glyphs: GlyphSource) -> Self {
        Renderer { layout, glyphs }
    }

    pub fn layout(&self) -> &LayoutConfig {
        &self.layout
    }

    pub fn glyphs(&self) -> &GlyphSource {
        &self.glyphs
    }

    pub fn render(&self, input: &[char], partial: &[char]) -> Result<SuperChatImage, RenderError> {
        render(&self.layout, &self.glyphs, input, partial)
    }

    pub fn render_str(&self, input: &str, partial: &str) -> Result<SuperChatImage, RenderError> {
        let input: Vec<char> = input.chars().collect();
        let partial: Vec<char> = partial.chars().collect();
        self.render(&input, &partial)
    }
}

pub fn render(
    layout: &LayoutConfig,
    glyphs: &GlyphSource,
    input: &[char],
    partial: &[char],
) -> Result<SuperChatImage, RenderError> {
    for (portion, text) in [(Portion::Input, input), (Portion::Response, partial)] {
        let capacity = layout.capacity(portion);
        if text.len() > capacity {
            return Err(RenderError::Overflow {
                portion,
                len: text.len(),
                capacity,
            });
        }
    }
    let mut img = SuperChatImage::blank(*layout);
    let cell = layout.cell_px();
    for (portion, text) in [(Portion::Input, input), (Portion::Response, partial)] {
        for (k, &ch) in text.iter().enumerate() {
            let (row, col) = layout.cell_of(portion, k).expect("capacity checked");
            let (x, y) = layout.cell_origin(row, col).expect("cell in grid");
            img.blit(x, y, cell, &glyphs.glyph(ch, cell));
        }
    }
    Ok(img)
}

pub fn export_png(image: &SuperChatImage, path: impl AsRef<Path>) -> Result<(), RenderError> {
    let path = path.as_ref();
    let bytes = image.encode_png()?;
    std::fs::write(path, bytes).map_err(|source| RenderError::Io {
        path: path.display().to_string(),
        source,
    })
}
