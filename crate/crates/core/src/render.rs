//! Grayscale frames of torus load vectors, written as binary PGM.
//!
//! Pixel `(col, row)` shows node `row * width + col`. Light pixels are close
//! to the average load, dark ones far from it. Intensities are rounded half
//! up.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::load::Load;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    /// Row-major intensities.
    pub pixels: Vec<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrameMode {
    /// Black marks the largest deviation present in the frame.
    Adaptive,
    /// Black marks deviations of at least the cutoff.
    Threshold(f64),
}

impl std::str::FromStr for FrameMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "adaptive" {
            return Ok(FrameMode::Adaptive);
        }
        let bad = || Error::InvalidConfig(format!("frame mode must be adaptive or threshold:C, got '{s}'"));
        match s.split_once(':') {
            Some(("threshold", c)) => {
                let c: f64 = c.parse().map_err(|_| bad())?;
                if c > 0.0 {
                    Ok(FrameMode::Threshold(c))
                } else {
                    Err(bad())
                }
            }
            _ => Err(bad()),
        }
    }
}

fn round_half_up(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

fn deviations<L: Load>(x: &[L], width: usize, height: usize) -> Result<Vec<f64>> {
    if x.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            actual: x.len(),
        });
    }
    let avg = x.iter().map(|v| v.to_f64()).sum::<f64>() / x.len() as f64;
    Ok(x.iter().map(|v| (v.to_f64() - avg).abs()).collect())
}

pub fn render_adaptive<L: Load>(x: &[L], width: usize, height: usize) -> Result<Frame> {
    let dev = deviations(x, width, height)?;
    let scale = dev.iter().copied().fold(0.0, f64::max);
    let pixels = dev
        .iter()
        .map(|&d| if scale == 0.0 { 255 } else { 255 - round_half_up(255.0 * d / scale) })
        .collect();
    Ok(Frame { width, height, pixels })
}

pub fn render_threshold<L: Load>(x: &[L], width: usize, height: usize, cutoff: f64) -> Result<Frame> {
    if !(cutoff > 0.0) {
        return Err(Error::InvalidConfig(format!("cutoff must be positive, got {cutoff}")));
    }
    let dev = deviations(x, width, height)?;
    let pixels = dev
        .iter()
        .map(|&d| {
            if d >= cutoff {
                0
            } else {
                round_half_up(255.0 * (1.0 - d / cutoff))
            }
        })
        .collect();
    Ok(Frame { width, height, pixels })
}

pub fn render<L: Load>(x: &[L], width: usize, height: usize, mode: FrameMode) -> Result<Frame> {
    match mode {
        FrameMode::Adaptive => render_adaptive(x, width, height),
        FrameMode::Threshold(c) => render_threshold(x, width, height, c),
    }
}

pub fn encode_pgm(frame: &Frame) -> Result<Vec<u8>> {
    if frame.width == 0 || frame.height == 0 || frame.pixels.len() != frame.width * frame.height {
        return Err(Error::InvalidConfig(format!(
            "cannot encode {}x{} frame with {} pixels",
            frame.width,
            frame.height,
            frame.pixels.len()
        )));
    }
    let mut out = format!("P5\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend_from_slice(&frame.pixels);
    Ok(out)
}

pub fn write_pgm(frame: &Frame, path: &Path) -> Result<()> {
    let bytes = encode_pgm(frame)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

/// Parse a binary PGM with maxval 255.
pub fn read_pgm(path: &Path) -> Result<Frame> {
    let bytes = fs::read(path)?;
    let bad = |m: &str| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: m.to_string(),
    };
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(bad("expected binary PGM with maxval 255"));
    }
    let width: usize = fields[1].parse().map_err(|_| bad("bad width"))?;
    let height: usize = fields[2].parse().map_err(|_| bad("bad height"))?;
    let pixels = bytes.get(pos..).unwrap_or_default().to_vec();
    if pixels.len() != width * height {
        return Err(bad("pixel count does not match header"));
    }
    Ok(Frame { width, height, pixels })
}

pub fn frame_file_name(round: u64) -> String {
    format!("frame_{round:08}.pgm")
}
