//! Binary (P5) graymaps.

use std::fs;
use std::path::Path;

use amra_core::Signal;
use anyhow::{bail, ensure, Context, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major samples, top row first.
    pub pixels: Vec<u16>,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n' && c != b'\r') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        ensure!(self.pos > start, "PGM header: expected {what}");
        let s = std::str::from_utf8(&self.bytes[start..self.pos])?;
        s.parse().with_context(|| format!("PGM header: {what} `{s}` out of range"))
    }
}

impl Pgm {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        ensure!(bytes.starts_with(b"P5"), "not a binary PGM (P5) file");
        let mut h = Header { bytes, pos: 2 };
        let width = h.number("width")?;
        let height = h.number("height")?;
        let maxval = h.number("maxval")?;
        ensure!(width > 0 && height > 0, "PGM has an empty raster");
        ensure!((1..=65535).contains(&maxval), "PGM maxval {maxval} outside 1..=65535");
        ensure!(h.bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace), "PGM header must end in whitespace");
        let data = &bytes[h.pos + 1..];
        let n = width.checked_mul(height).context("PGM raster too large")?;
        let wide = maxval > 255;
        let need = if wide { 2 * n } else { n };
        ensure!(data.len() >= need, "PGM raster truncated: {} of {need} bytes", data.len());
        let pixels: Vec<u16> = if wide {
            data[..need].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
        } else {
            data[..need].iter().map(|&b| b as u16).collect()
        };
        if let Some(p) = pixels.iter().find(|&&p| p as usize > maxval) {
            bail!("PGM sample {p} exceeds maxval {maxval}");
        }
        Ok(Pgm { width, height, maxval: maxval as u16, pixels })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&bytes).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        if self.maxval > 255 {
            for p in &self.pixels {
                out.extend_from_slice(&p.to_be_bytes());
            }
        } else {
            out.extend(self.pixels.iter().map(|&p| p as u8));
        }
        out
    }

    /// Samples scaled to `[0, 1]` on the raster `{0..height} × {0..width}`.
    pub fn to_signal(&self) -> Signal {
        let m = self.maxval as f64;
        let data: Vec<f64> = self.pixels.iter().map(|&p| p as f64 / m).collect();
        Signal::from_real(vec![0, 0], vec![self.height, self.width], &data).expect("raster shape")
    }

    /// Quantizes the real part of `s` on `{0..height} × {0..width}`,
    /// rounding half away from zero and clamping to `[0, maxval]`.
    pub fn from_signal(s: &Signal, width: usize, height: usize, maxval: u16) -> Self {
        let m = maxval as f64;
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height as i64 {
            for c in 0..width as i64 {
                let q = (s.get(&[r, c]).re * m).round();
                pixels.push(q.clamp(0.0, m) as u16);
            }
        }
        Pgm { width, height, maxval, pixels }
    }
}
