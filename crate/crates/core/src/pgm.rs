//! Binary PGM (`P5`) reading and writing.
//!
//! Only the binary grayscale flavour is supported. Headers may contain `#`
//! comments. Samples are 8-bit for `maxval < 256` and big-endian 16-bit above.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::fht::{FhtError, GrayImage};

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed PGM at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error(transparent)]
    Shape(#[from] FhtError),
}

/// Decoded PGM raster of arbitrary size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major samples in `0..=maxval`.
    pub pixels: Vec<u16>,
}

impl PgmImage {
    /// Samples scaled to `[0, 1]`, row-major.
    pub fn to_unit(&self) -> Vec<f64> {
        let m = self.maxval as f64;
        self.pixels.iter().map(|&v| v as f64 / m).collect()
    }

    /// Square power-of-two image with values in `[0, 1]`.
    pub fn to_gray(&self) -> Result<GrayImage<f64>, PgmError> {
        if self.width != self.height {
            return Err(FhtError::NotPowerOfTwo {
                side: self.width.max(self.height),
            }
            .into());
        }
        Ok(GrayImage::from_vec(self.width, self.to_unit())?)
    }

    /// Zero-pads on the right and bottom up to the next power-of-two square.
    pub fn pad_to_pow2(&self) -> PgmImage {
        let side = self.width.max(self.height).next_power_of_two();
        let mut pixels = vec![0u16; side * side];
        for y in 0..self.height {
            pixels[y * side..y * side + self.width]
                .copy_from_slice(&self.pixels[y * self.width..(y + 1) * self.width]);
        }
        PgmImage {
            width: side,
            height: side,
            maxval: self.maxval,
            pixels,
        }
    }

    /// 8-bit image from values in `[0, 1]`; out-of-range values are clamped.
    pub fn from_unit(width: usize, height: usize, values: &[f64]) -> PgmImage {
        assert_eq!(values.len(), width * height);
        let pixels = values
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u16)
            .collect();
        PgmImage {
            width,
            height,
            maxval: 255,
            pixels,
        }
    }

    /// 8-bit image whose minimum maps to 0 and maximum to 255. A constant
    /// input maps to all zeros.
    pub fn normalized(width: usize, height: usize, values: &[f64]) -> PgmImage {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = hi - lo;
        let scaled: Vec<f64> = values
            .iter()
            .map(|&v| if range > 0.0 { (v - lo) / range } else { 0.0 })
            .collect();
        PgmImage::from_unit(width, height, &scaled)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, message: impl Into<String>) -> PgmError {
        PgmError::Format {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, PgmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::Format {
                offset: start,
                message: format!("{what} too large"),
            })
    }
}

pub fn decode(bytes: &[u8]) -> Result<PgmImage, PgmError> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(cur.err("expected magic \"P5\""));
    }
    cur.pos = 2;
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.err("zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(cur.err(format!("maxval {maxval} outside 1..=65535")));
    }
    if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
        return Err(cur.err("expected single whitespace after header"));
    }
    cur.pos += 1;
    let wide = maxval > 255;
    let count = width * height;
    let needed = if wide { 2 * count } else { count };
    let raster = &bytes[cur.pos..];
    if raster.len() < needed {
        return Err(PgmError::Format {
            offset: bytes.len(),
            message: format!(
                "truncated raster: need {needed} bytes, have {}",
                raster.len()
            ),
        });
    }
    let pixels: Vec<u16> = if wide {
        raster[..needed]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        raster[..needed].iter().map(|&b| b as u16).collect()
    };
    if let Some(i) = pixels.iter().position(|&v| v as usize > maxval) {
        let step = if wide { 2 } else { 1 };
        return Err(PgmError::Format {
            offset: cur.pos + i * step,
            message: "sample exceeds maxval".into(),
        });
    }
    Ok(PgmImage {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}

pub fn encode(image: &PgmImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", image.width, image.height, image.maxval).into_bytes();
    if image.maxval > 255 {
        for &v in &image.pixels {
            out.extend_from_slice(&v.to_be_bytes());
        }
    } else {
        out.extend(image.pixels.iter().map(|&v| v as u8));
    }
    out
}

pub fn read(path: &Path) -> Result<PgmImage, PgmError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn write(path: &Path, image: &PgmImage) -> Result<(), PgmError> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode(image))?;
    Ok(())
}
