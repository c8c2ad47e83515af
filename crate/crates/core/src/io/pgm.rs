//! Binary PGM (P5, maxval 255), row-major with the origin at the top left.

use ndarray::Array2;

use crate::error::{Error, Result};

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse {
                offset: start,
                message: format!("expected {what}"),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse {
                offset: start,
                message: format!("{what} out of range"),
            })
    }
}

pub fn decode(bytes: &[u8]) -> Result<Array2<u8>> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::Parse {
            offset: 0,
            message: "missing PGM magic".into(),
        });
    }
    if bytes[1] != b'5' {
        return Err(Error::Parse {
            offset: 0,
            message: format!("unsupported format P{}", bytes[1] as char),
        });
    }
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::Parse {
            offset: maxval_at,
            message: format!("maxval {maxval} unsupported (need 255)"),
        });
    }
    if width == 0 || height == 0 {
        return Err(Error::Parse {
            offset: maxval_at,
            message: "zero image dimension".into(),
        });
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(Error::Parse {
                offset: cur.pos,
                message: "expected single whitespace before raster".into(),
            })
        }
    }
    let need = width * height;
    let data = &bytes[cur.pos..];
    if data.len() < need {
        return Err(Error::Parse {
            offset: bytes.len(),
            message: format!("truncated raster: {} of {need} bytes", data.len()),
        });
    }
    Ok(Array2::from_shape_vec((height, width), data[..need].to_vec())
        .expect("shape matches length"))
}

pub fn encode(pixels: &Array2<u8>) -> Vec<u8> {
    let (h, w) = pixels.dim();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(pixels.iter());
    out
}

/// Linear map `lo → 0`, `hi → 255`, clamped.
pub fn encode_range(grid: &Array2<f64>, lo: f64, hi: f64) -> Vec<u8> {
    let span = hi - lo;
    let pixels = grid.mapv(|v| {
        if span > 0.0 {
            (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8
        } else {
            0
        }
    });
    encode(&pixels)
}

/// Affine preview: grid minimum → 0, maximum → 255.
pub fn encode_affine(grid: &Array2<f64>) -> Vec<u8> {
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    encode_range(grid, lo, hi)
}
