//! Image, unary and label file formats.

use std::fs;
use std::path::Path;

use proxlp::model::{FeatureField, LabelScores};

use crate::error::{io_err, CliError, Result};
use crate::palette::PALETTE;

const UNARY_MAGIC: &[u8; 4] = b"UNR1";

/// Reads an 8-bit RGB image: binary PPM (`P6`) or PNG, chosen by content.
pub fn load_image(path: &Path) -> Result<FeatureField> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.starts_with(b"P6") {
        return parse_ppm(path, &bytes);
    }
    if bytes.starts_with(b"\x89PNG") {
        let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
            .map_err(|e| CliError::Format {
                path: path.to_path_buf(),
                offset: 0,
                msg: e.to_string(),
            })?
            .to_rgb8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let colors = img.pixels().map(|p| p.0).collect();
        return Ok(FeatureField::new(w, h, colors)?);
    }
    Err(CliError::Format {
        path: path.to_path_buf(),
        offset: 0,
        msg: "unsupported image format (expected P6 PPM or PNG)".into(),
    })
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
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

    fn number(&mut self) -> std::result::Result<usize, (usize, String)> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err((start, "expected a decimal number".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or((start, "number out of range".into()))
    }
}

fn parse_ppm(path: &Path, bytes: &[u8]) -> Result<FeatureField> {
    let fail = |(offset, msg): (usize, String)| CliError::Format {
        path: path.to_path_buf(),
        offset,
        msg,
    };
    let mut hd = Header { bytes, pos: 2 };
    let width = hd.number().map_err(fail)?;
    let height = hd.number().map_err(fail)?;
    hd.skip_space();
    let max_pos = hd.pos;
    let maxval = hd.number().map_err(fail)?;
    if maxval != 255 {
        return Err(fail((
            max_pos,
            format!("only maxval 255 is supported, got {maxval}"),
        )));
    }
    if hd.pos >= bytes.len() || !bytes[hd.pos].is_ascii_whitespace() {
        return Err(fail((hd.pos, "expected whitespace after header".into())));
    }
    let data = hd.pos + 1;
    let n = width
        .checked_mul(height)
        .filter(|n| n.checked_mul(3).is_some())
        .ok_or_else(|| fail((0, format!("dimensions {width}x{height} overflow"))))?;
    if bytes.len() - data < 3 * n {
        return Err(fail((
            bytes.len(),
            format!(
                "pixel data truncated: need {} bytes, have {}",
                3 * n,
                bytes.len() - data
            ),
        )));
    }
    let colors = bytes[data..data + 3 * n]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    Ok(FeatureField::new(width, height, colors)?)
}

pub fn write_ppm(path: &Path, width: usize, height: usize, colors: &[[u8; 3]]) -> Result<()> {
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend(colors.iter().flatten());
    fs::write(path, out).map_err(io_err(path))
}

/// Reads a `UNR1` score file and checks it against the expected shape.
pub fn load_unaries(path: &Path, n: usize, m: Option<usize>) -> Result<LabelScores> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let fail = |offset: usize, msg: String| CliError::Format {
        path: path.to_path_buf(),
        offset,
        msg,
    };
    if bytes.len() < 12 || &bytes[..4] != UNARY_MAGIC {
        return Err(fail(0, "missing UNR1 header".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (fn_, fm) = (word(4), word(8));
    if fn_ != n {
        return Err(CliError::Mismatch(format!(
            "{}: file has {fn_} pixels, image has {n}",
            path.display()
        )));
    }
    if let Some(m) = m.filter(|&m| m != fm) {
        return Err(CliError::Mismatch(format!(
            "{}: file has {fm} labels, expected {m}",
            path.display()
        )));
    }
    let need = fn_
        .checked_mul(fm)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| fail(4, "dimensions overflow".into()))?;
    if bytes.len() - 12 != need {
        return Err(fail(
            12,
            format!(
                "expected {need} bytes of scores, found {}",
                bytes.len() - 12
            ),
        ));
    }
    let values = bytes[12..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    Ok(LabelScores::new(fn_, fm, values)?)
}

/// Writes scores as `UNR1`; values are stored as 32-bit floats.
pub fn save_unaries(path: &Path, scores: &LabelScores) -> Result<()> {
    let mut out = Vec::with_capacity(12 + 4 * scores.as_slice().len());
    out.extend_from_slice(UNARY_MAGIC);
    out.extend_from_slice(&(scores.n() as u32).to_le_bytes());
    out.extend_from_slice(&(scores.m() as u32).to_le_bytes());
    for &v in scores.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Raw label indices: one byte per pixel, or little-endian `u16` when
/// `m > 256`.
pub fn write_label_indices(path: &Path, labels: &[usize], m: usize) -> Result<()> {
    let out: Vec<u8> = if m <= 256 {
        labels.iter().map(|&l| l as u8).collect()
    } else {
        labels
            .iter()
            .flat_map(|&l| (l as u16).to_le_bytes())
            .collect()
    };
    fs::write(path, out).map_err(io_err(path))
}

pub fn write_label_image(path: &Path, width: usize, height: usize, labels: &[usize]) -> Result<()> {
    let colors: Vec<[u8; 3]> = labels.iter().map(|&l| PALETTE[l % 256]).collect();
    write_ppm(path, width, height, &colors)
}
