//! Sources of per-character cell bitmaps.
//!
//! Every bitmap is exactly `cell_px * cell_px` grey bytes, row-major,
//! with 255 as background and darker values as ink.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use ab_glyph::{Font, FontVec, PxScale, ScaleFont};
use thiserror::Error;

pub const BACKGROUND: u8 = 255;
pub const INK: u8 = 0;

/// Side of the procedural bit pattern before upscaling.
const PATTERN_SIDE: usize = 8;

#[derive(Debug, Error)]
pub enum GlyphError {
    #[error("unrecognised glyph source spec `{0}` (expected `procedural:<seed>` or `font:<path>[@<px>]`)")]
    BadSpec(String),
    #[error("failed to read font file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} is not a usable font file")]
    InvalidFont { path: PathBuf },
}

/// Parsed form of a glyph source description such as `procedural:7` or
/// `font:/usr/share/fonts/simhei.ttf@32`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GlyphSpec {
    Procedural { seed: u64 },
    FontFile { path: PathBuf, pixel_size: Option<u32> },
}

impl FromStr for GlyphSpec {
    type Err = GlyphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GlyphError::BadSpec(s.to_string());
        if let Some(seed) = s.strip_prefix("procedural:") {
            let seed = seed.trim().parse().map_err(|_| bad())?;
            return Ok(GlyphSpec::Procedural { seed });
        }
        if s == "procedural" {
            return Ok(GlyphSpec::Procedural { seed: 0 });
        }
        if let Some(rest) = s.strip_prefix("font:") {
            let (path, pixel_size) = match rest.rsplit_once('@') {
                Some((p, px)) => (p, Some(px.parse().map_err(|_| bad())?)),
                None => (rest, None),
            };
            if path.is_empty() {
                return Err(bad());
            }
            return Ok(GlyphSpec::FontFile {
                path: PathBuf::from(path),
                pixel_size,
            });
        }
        Err(bad())
    }
}

impl fmt::Display for GlyphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlyphSpec::Procedural { seed } => write!(f, "procedural:{seed}"),
            GlyphSpec::FontFile {
                path,
                pixel_size: None,
            } => write!(f, "font:{}", path.display()),
            GlyphSpec::FontFile {
                path,
                pixel_size: Some(px),
            } => write!(f, "font:{}@{px}", path.display()),
        }
    }
}

/// A loaded glyph source. Cheap to clone; immutable apart from the
/// missing-glyph log, which never affects rendered pixels.
#[derive(Clone)]
pub struct GlyphSource {
    spec: GlyphSpec,
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    Procedural {
        seed: u64,
    },
    Font {
        font: Arc<FontVec>,
        pixel_size: Option<u32>,
        fallback_seed: u64,
        missing: Arc<Mutex<BTreeSet<char>>>,
    },
}

impl fmt::Debug for GlyphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GlyphSource").field("spec", &self.spec).finish()
    }
}

impl GlyphSource {
    pub fn procedural(seed: u64) -> Self {
        GlyphSource {
            spec: GlyphSpec::Procedural { seed },
            kind: Kind::Procedural { seed },
        }
    }

    pub fn font_file(path: impl AsRef<Path>, pixel_size: Option<u32>) -> Result<Self, GlyphError> {
        let path = path.as_ref().to_path_buf();
        let bytes = std::fs::read(&path).map_err(|source| GlyphError::Io {
            path: path.clone(),
            source,
        })?;
        let font =
            FontVec::try_from_vec(bytes).map_err(|_| GlyphError::InvalidFont { path: path.clone() })?;
        Ok(GlyphSource {
            spec: GlyphSpec::FontFile {
                path,
                pixel_size,
            },
            kind: Kind::Font {
                font: Arc::new(font),
                pixel_size,
                fallback_seed: 0,
                missing: Arc::default(),
            },
        })
    }

    pub fn from_spec(spec: &GlyphSpec) -> Result<Self, GlyphError> {
        match spec {
            GlyphSpec::Procedural { seed } => Ok(Self::procedural(*seed)),
            GlyphSpec::FontFile { path, pixel_size } => Self::font_file(path, *pixel_size),
        }
    }

    pub fn spec(&self) -> &GlyphSpec {
        &self.spec
    }

    /// Codepoints the font could not supply so far; they were drawn with
    /// the procedural fallback.
    pub fn missing_glyphs(&self) -> Vec<char> {
        match &self.kind {
            Kind::Procedural { .. } => Vec::new(),
            Kind::Font { missing, .. } => missing.lock().unwrap().iter().copied().collect(),
        }
    }

    /// Bitmap for one character, `cell_px * cell_px` bytes row-major.
    pub fn glyph(&self, ch: char, cell_px: usize) -> Vec<u8> {
        if ch.is_whitespace() {
            return vec![BACKGROUND; cell_px * cell_px];
        }
        match &self.kind {
            Kind::Procedural { seed } => procedural_glyph(*seed, ch, cell_px),
            Kind::Font {
                font,
                pixel_size,
                fallback_seed,
                missing,
            } => match rasterize(font.as_ref(), ch, cell_px, *pixel_size) {
                Some(bitmap) => bitmap,
                None => {
                    if missing.lock().unwrap().insert(ch) {
                        log::warn!(
                            "font has no glyph for {:?} (U+{:04X}); using procedural fallback",
                            ch,
                            ch as u32
                        );
                    }
                    procedural_glyph(*fallback_seed, ch, cell_px)
                }
            },
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit pattern for a codepoint: bit `r * 8 + c` set means ink at
/// pattern row `r`, column `c`. Never all-clear.
pub fn procedural_pattern(seed: u64, ch: char) -> u64 {
    let mut bits = splitmix64(seed ^ splitmix64(ch as u64));
    let mut round = 0u64;
    while bits == 0 {
        round += 1;
        bits = splitmix64(bits ^ round ^ ch as u64);
    }
    bits
}

pub fn procedural_glyph(seed: u64, ch: char, cell_px: usize) -> Vec<u8> {
    let bits = procedural_pattern(seed, ch);
    let mut out = vec![BACKGROUND; cell_px * cell_px];
    for y in 0..cell_px {
        let pr = y * PATTERN_SIDE / cell_px;
        for x in 0..cell_px {
            let pc = x * PATTERN_SIDE / cell_px;
            if bits >> (pr * PATTERN_SIDE + pc) & 1 == 1 {
                out[y * cell_px + x] = INK;
            }
        }
    }
    out
}

/// Anti-aliased rasterization with the em box scaled to the cell and the
/// glyph centred horizontally on its advance. `None` when the font has no
/// glyph for `ch`.
fn rasterize(font: &FontVec, ch: char, cell_px: usize, pixel_size: Option<u32>) -> Option<Vec<u8>> {
    let id = font.glyph_id(ch);
    if id.0 == 0 {
        return None;
    }
    let px = pixel_size.map_or(cell_px as f32, |p| p as f32);
    let scale = PxScale::from(px);
    let scaled = font.as_scaled(scale);
    let advance = scaled.h_advance(id);
    let x0 = ((cell_px as f32 - advance) / 2.0).max(0.0);
    let y0 = (cell_px as f32 - px) / 2.0 + scaled.ascent();
    let glyph = id.with_scale_and_position(scale, ab_glyph::point(x0, y0));
    let mut out = vec![BACKGROUND; cell_px * cell_px];
    if let Some(outlined) = font.outline_glyph(glyph) {
        let bounds = outlined.px_bounds();
        outlined.draw(|gx, gy, coverage| {
            let x = bounds.min.x as i64 + gx as i64;
            let y = bounds.min.y as i64 + gy as i64;
            if x < 0 || y < 0 || x >= cell_px as i64 || y >= cell_px as i64 {
                return;
            }
            let ink = (coverage.clamp(0.0, 1.0) * 255.0).round() as u8;
            let idx = y as usize * cell_px + x as usize;
            out[idx] = out[idx].min(BACKGROUND - ink);
        });
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        assert_eq!(
            "procedural:42".parse::<GlyphSpec>().unwrap(),
            GlyphSpec::Procedural { seed: 42 }
        );
        assert_eq!(
            "font:/tmp/a.ttf@24".parse::<GlyphSpec>().unwrap(),
            GlyphSpec::FontFile {
                path: "/tmp/a.ttf".into(),
                pixel_size: Some(24)
            }
        );
        assert!("nope".parse::<GlyphSpec>().is_err());
        assert!("procedural:x".parse::<GlyphSpec>().is_err());
        for s in ["procedural:3", "font:/x/y.ttf", "font:/x/y.ttf@16"] {
            assert_eq!(s.parse::<GlyphSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn procedural_is_deterministic_and_sized() {
        let src = GlyphSource::procedural(7);
        for ch in ['你', 'a', '好', ','] {
            let a = src.glyph(ch, 16);
            assert_eq!(a.len(), 256);
            assert_eq!(a, src.glyph(ch, 16));
            assert!(a.iter().any(|&p| p != BACKGROUND));
        }
        assert_ne!(src.glyph('你', 16), src.glyph('好', 16));
        assert_ne!(
            GlyphSource::procedural(1).glyph('你', 16),
            GlyphSource::procedural(2).glyph('你', 16)
        );
    }

    #[test]
    fn procedural_upscale_is_blocky() {
        let bits = procedural_pattern(3, '我');
        let g = procedural_glyph(3, '我', 32);
        for r in 0..8 {
            for c in 0..8 {
                let expect = if bits >> (r * 8 + c) & 1 == 1 { INK } else { BACKGROUND };
                for dy in 0..4 {
                    for dx in 0..4 {
                        assert_eq!(g[(r * 4 + dy) * 32 + c * 4 + dx], expect);
                    }
                }
            }
        }
    }

    #[test]
    fn whitespace_is_blank() {
        let src = GlyphSource::procedural(0);
        assert!(src.glyph(' ', 16).iter().all(|&p| p == BACKGROUND));
    }

    #[test]
    fn missing_font_file_is_an_error() {
        let err = GlyphSource::font_file("/definitely/not/here.ttf", None).unwrap_err();
        assert!(matches!(err, GlyphError::Io { .. }));
    }

    #[test]
    fn garbage_font_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ttf");
        std::fs::write(&path, b"not a font").unwrap();
        assert!(matches!(
            GlyphSource::font_file(&path, None),
            Err(GlyphError::InvalidFont { .. })
        ));
    }

    const DEJAVU: &str = "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf";

    #[test]
    fn font_glyphs_and_fallback() {
        if !Path::new(DEJAVU).exists() {
            eprintln!("skipping: {DEJAVU} not installed");
            return;
        }
        let src = GlyphSource::font_file(DEJAVU, None).unwrap();
        let a = src.glyph('A', 32);
        assert_eq!(a.len(), 32 * 32);
        assert!(a.iter().any(|&p| p < 128));
        assert_eq!(a, src.glyph('A', 32));
        // DejaVu Sans carries no CJK ideographs.
        let ni = src.glyph('你', 32);
        assert_eq!(ni, procedural_glyph(0, '你', 32));
        assert_eq!(src.missing_glyphs(), vec!['你']);
    }
}
