//! Grid geometry of a SuperChat image.
//!
//! The image is a square of `image_px` pixels with a blank margin of
//! `margin_px` on every edge. The remaining square is cut into a
//! `grid_rows` x `grid_cols` grid of square cells. The top `input_rows`
//! rows hold the input sentence, the remaining rows hold the partial
//! response. Characters fill each portion row-major.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("layout parameter `{0}` must be positive")]
    NonPositive(&'static str),
    #[error("image_px - 2*margin_px = {usable} is not divisible by grid_cols = {grid_cols}")]
    NotDivisible { usable: i64, grid_cols: usize },
    #[error("non-square grid: usable area {usable}px holds {grid_cols} columns of {cell_px}px but grid_rows = {grid_rows} would need {needed}px")]
    RowsOverflow {
        usable: i64,
        grid_cols: usize,
        grid_rows: usize,
        cell_px: usize,
        needed: usize,
    },
    #[error("input_rows = {input_rows} must be less than grid_rows = {grid_rows}")]
    InputRows { input_rows: usize, grid_rows: usize },
    #[error("channels must be 1 or 3, got {0}")]
    Channels(usize),
    #[error("cell ({row}, {col}) is outside the {grid_rows}x{grid_cols} grid")]
    OutOfBounds {
        row: usize,
        col: usize,
        grid_rows: usize,
        grid_cols: usize,
    },
}

/// Validated geometry of a SuperChat image. Build with [`compute_layout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct LayoutConfig {
    image_px: usize,
    channels: usize,
    margin_px: usize,
    grid_rows: usize,
    grid_cols: usize,
    input_rows: usize,
    response_rows: usize,
    cell_px: usize,
}

/// Which half of the image a character lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Portion {
    Input,
    Response,
}

impl std::fmt::Display for Portion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Portion::Input => "input",
            Portion::Response => "response",
        })
    }
}

pub fn compute_layout(
    image_px: usize,
    margin_px: usize,
    grid_rows: usize,
    grid_cols: usize,
    input_rows: usize,
    channels: usize,
) -> Result<LayoutConfig, LayoutError> {
    for (name, v) in [
        ("image_px", image_px),
        ("margin_px", margin_px),
        ("grid_rows", grid_rows),
        ("grid_cols", grid_cols),
        ("input_rows", input_rows),
        ("channels", channels),
    ] {
        if v == 0 {
            return Err(LayoutError::NonPositive(name));
        }
    }
    if channels != 1 && channels != 3 {
        return Err(LayoutError::Channels(channels));
    }
    let usable = image_px as i64 - 2 * margin_px as i64;
    if usable <= 0 || usable % grid_cols as i64 != 0 {
        return Err(LayoutError::NotDivisible { usable, grid_cols });
    }
    let cell_px = usable as usize / grid_cols;
    let needed = cell_px * grid_rows;
    if needed > usable as usize {
        return Err(LayoutError::RowsOverflow {
            usable,
            grid_cols,
            grid_rows,
            cell_px,
            needed,
        });
    }
    if input_rows >= grid_rows {
        return Err(LayoutError::InputRows {
            input_rows,
            grid_rows,
        });
    }
    Ok(LayoutConfig {
        image_px,
        channels,
        margin_px,
        grid_rows,
        grid_cols,
        input_rows,
        response_rows: grid_rows - input_rows,
        cell_px,
    })
}

impl LayoutConfig {
    /// 224px, m = 16, 6x6 grid, upper 3 rows for the input, 3 grey channels.
    pub fn standard() -> Self {
        compute_layout(224, 16, 6, 6, 3, 3).expect("standard layout is valid")
    }

    /// 112px, m = 8, 6x6 grid, 3 + 3 rows, single channel.
    pub fn desk() -> Self {
        compute_layout(112, 8, 6, 6, 3, 1).expect("desk layout is valid")
    }

    pub fn image_px(&self) -> usize {
        self.image_px
    }
    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn margin_px(&self) -> usize {
        self.margin_px
    }
    pub fn grid_rows(&self) -> usize {
        self.grid_rows
    }
    pub fn grid_cols(&self) -> usize {
        self.grid_cols
    }
    pub fn input_rows(&self) -> usize {
        self.input_rows
    }
    pub fn response_rows(&self) -> usize {
        self.response_rows
    }
    pub fn cell_px(&self) -> usize {
        self.cell_px
    }

    pub fn input_capacity(&self) -> usize {
        self.input_rows * self.grid_cols
    }

    pub fn response_capacity(&self) -> usize {
        self.response_rows * self.grid_cols
    }

    pub fn capacity(&self, portion: Portion) -> usize {
        match portion {
            Portion::Input => self.input_capacity(),
            Portion::Response => self.response_capacity(),
        }
    }

    /// Top-left pixel `(x, y)` of a grid cell.
    pub fn cell_origin(&self, row: usize, col: usize) -> Result<(usize, usize), LayoutError> {
        if row >= self.grid_rows || col >= self.grid_cols {
            return Err(LayoutError::OutOfBounds {
                row,
                col,
                grid_rows: self.grid_rows,
                grid_cols: self.grid_cols,
            });
        }
        Ok((
            self.margin_px + col * self.cell_px,
            self.margin_px + row * self.cell_px,
        ))
    }

    /// Grid `(row, col)` of the `index`-th character of a portion.
    pub fn cell_of(&self, portion: Portion, index: usize) -> Option<(usize, usize)> {
        if index >= self.capacity(portion) {
            return None;
        }
        let row_offset = match portion {
            Portion::Input => 0,
            Portion::Response => self.input_rows,
        };
        Some((row_offset + index / self.grid_cols, index % self.grid_cols))
    }
}

/// Free-function form of [`LayoutConfig::cell_origin`].
pub fn cell_origin(
    layout: &LayoutConfig,
    row: usize,
    col: usize,
) -> Result<(usize, usize), LayoutError> {
    layout.cell_origin(row, col)
}

/// Key/value layout description as it appears in config files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    pub image_px: usize,
    pub margin_px: usize,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub input_rows: usize,
    pub channels: usize,
    /// Glyph source spec, see [`crate::glyph::GlyphSpec`].
    #[serde(default = "default_glyphs")]
    pub glyphs: String,
}

fn default_glyphs() -> String {
    "procedural:0".to_string()
}

impl LayoutSpec {
    pub fn build(&self) -> Result<LayoutConfig, LayoutError> {
        compute_layout(
            self.image_px,
            self.margin_px,
            self.grid_rows,
            self.grid_cols,
            self.input_rows,
            self.channels,
        )
    }

    pub fn from_layout(layout: &LayoutConfig, glyphs: impl Into<String>) -> Self {
        LayoutSpec {
            image_px: layout.image_px,
            margin_px: layout.margin_px,
            grid_rows: layout.grid_rows,
            grid_cols: layout.grid_cols,
            input_rows: layout.input_rows,
            channels: layout.channels,
            glyphs: glyphs.into(),
        }
    }
}
