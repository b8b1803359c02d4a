//! Square grayscale images and binary PGM (P5) input/output.
//!
//! Pixels are kept as `f64` internally; quantization to 8 bits happens only
//! on output.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A square grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    side: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(side: usize, data: Vec<f64>) -> Result<Self> {
        if side == 0 || data.len() != side * side {
            return Err(Error::dims(format!(
                "expected {side}x{side} = {} pixels, got {}",
                side * side,
                data.len()
            )));
        }
        Ok(Image { side, data })
    }

    pub fn zeros(side: usize) -> Self {
        Image { side, data: vec![0.0; side * side] }
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                data.push(f(i, j));
            }
        }
        Image { side, data }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn pixels(&self) -> &[f64] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.side + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.side + col] = value;
    }

    /// Serialize as binary PGM, clamping to `[0, 255]` and rounding.
    pub fn write_pgm<W: Write>(&self, w: &mut W) -> Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.side, self.side)?;
        let bytes: Vec<u8> = self
            .data
            .iter()
            .map(|&v| v.clamp(0.0, 255.0).round() as u8)
            .collect();
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        self.write_pgm(&mut f)
    }

    /// Parse a binary PGM (P5, maxval <= 255).
    pub fn read_pgm<R: Read>(r: &mut R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut pos = 0usize;

        let mut next_token = |bytes: &[u8]| -> Result<String> {
            // Skip whitespace and '#' comments.
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    break;
                }
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::ImageFormat("truncated PGM header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };

        let magic = next_token(&bytes)?;
        if magic != "P5" {
            return Err(Error::ImageFormat(format!("expected P5, got {magic}")));
        }
        let width: usize = next_token(&bytes)?
            .parse()
            .map_err(|_| Error::ImageFormat("bad width".into()))?;
        let height: usize = next_token(&bytes)?
            .parse()
            .map_err(|_| Error::ImageFormat("bad height".into()))?;
        let maxval: usize = next_token(&bytes)?
            .parse()
            .map_err(|_| Error::ImageFormat("bad maxval".into()))?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::ImageFormat(format!("unsupported maxval {maxval}")));
        }
        if width != height {
            return Err(Error::ImageFormat(format!(
                "only square images are supported, got {width}x{height}"
            )));
        }
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        let need = width * height;
        if bytes.len() < pos + need {
            return Err(Error::ImageFormat("truncated PGM raster".into()));
        }
        let data = bytes[pos..pos + need].iter().map(|&b| b as f64).collect();
        Image::new(width, data)
    }

    pub fn load_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = std::fs::File::open(path)?;
        Image::read_pgm(&mut f)
    }
}
