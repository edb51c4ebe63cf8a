//! Binary PGM (`P5`) masks and probability maps.
//!
//! Masks are 8-bit (maxval 255) and written as 0/255. Probability maps are
//! 16-bit big-endian (maxval 65535); a value `v` reads as `v / 65535` and a
//! probability `p` is written as `round(p · 65535)` with halves rounded away
//! from zero.

use std::path::Path;

use crate::entropy::ProbMap;
use crate::error::{Error, Result};
use crate::mask::{BinaryMask, GridShape};

use super::atomic_write;

pub const DEFAULT_THRESHOLD: u8 = 128;
const MASK_MAXVAL: u32 = 255;
const PROB_MAXVAL: u32 = 65535;

struct Header {
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first payload byte.
    data_start: usize,
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header> {
    let malformed = |reason: &str| Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(malformed("missing P5 magic number"));
    }
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for (i, field) in fields.iter_mut().enumerate() {
        // At least one whitespace byte before each field; comments run to end of line.
        let start = pos;
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n' && b != b'\r') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(malformed("header ends early")),
            }
        }
        if pos == start {
            return Err(malformed("expected whitespace between header fields"));
        }
        let digits_start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if pos == digits_start {
            return Err(malformed(["bad width", "bad height", "bad maxval"][i]));
        }
        let text = std::str::from_utf8(&bytes[digits_start..pos]).expect("ascii digits");
        *field = text
            .parse()
            .map_err(|_| malformed("header number out of range"))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(malformed("expected a single whitespace byte after maxval")),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(malformed("zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(malformed("maxval must be in 1..=65535"));
    }
    Ok(Header {
        width: width as usize,
        height: height as usize,
        maxval: maxval as u32,
        data_start: pos,
    })
}

fn payload<'a>(
    bytes: &'a [u8],
    header: &Header,
    bytes_per_pixel: usize,
    path: &Path,
) -> Result<(&'a [u8], GridShape)> {
    let shape = GridShape::new(header.height, header.width)?;
    let expected = shape.pixel_count() * bytes_per_pixel;
    let available = bytes.len() - header.data_start;
    if available < expected {
        return Err(Error::TruncatedPayload {
            path: path.to_path_buf(),
            expected,
            found: available,
        });
    }
    Ok((
        &bytes[header.data_start..header.data_start + expected],
        shape,
    ))
}

fn require_maxval(header: &Header, expected: u32, path: &Path) -> Result<()> {
    if header.maxval == expected {
        Ok(())
    } else {
        Err(Error::UnsupportedMaxval {
            path: path.to_path_buf(),
            found: header.maxval,
            expected,
        })
    }
}

/// Decodes an 8-bit PGM; a pixel is foreground iff its value is at least
/// `threshold`. `path` only labels errors.
pub fn decode_mask(bytes: &[u8], threshold: u8, path: &Path) -> Result<BinaryMask> {
    let header = parse_header(bytes, path)?;
    require_maxval(&header, MASK_MAXVAL, path)?;
    let (data, shape) = payload(bytes, &header, 1, path)?;
    let mut mask = BinaryMask::empty(shape);
    for (i, &v) in data.iter().enumerate() {
        if v >= threshold {
            mask.set_index(i, true);
        }
    }
    Ok(mask)
}

pub fn encode_mask(mask: &BinaryMask) -> Vec<u8> {
    let shape = mask.shape();
    let mut out = format!(
        "P5\n{} {}\n{}\n",
        shape.width(),
        shape.height(),
        MASK_MAXVAL
    )
    .into_bytes();
    out.extend(mask.iter().map(|fg| if fg { 255u8 } else { 0 }));
    out
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    read_mask_with_threshold(path, DEFAULT_THRESHOLD)
}

pub fn read_mask_with_threshold(path: impl AsRef<Path>, threshold: u8) -> Result<BinaryMask> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_mask(&bytes, threshold, path)
}

pub fn write_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), &encode_mask(mask))
}

/// Nearest 16-bit level of a probability.
pub fn quantize_probability(p: f64) -> u16 {
    (p.clamp(0.0, 1.0) * PROB_MAXVAL as f64).round() as u16
}

pub fn decode_probmap(bytes: &[u8], path: &Path) -> Result<ProbMap> {
    let header = parse_header(bytes, path)?;
    require_maxval(&header, PROB_MAXVAL, path)?;
    let (data, shape) = payload(bytes, &header, 2, path)?;
    let values = data
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / PROB_MAXVAL as f64)
        .collect();
    ProbMap::new(shape, values)
}

pub fn encode_probmap(p: &ProbMap) -> Vec<u8> {
    let shape = p.shape();
    let mut out = format!(
        "P5\n{} {}\n{}\n",
        shape.width(),
        shape.height(),
        PROB_MAXVAL
    )
    .into_bytes();
    for &v in p.values() {
        out.extend_from_slice(&quantize_probability(v).to_be_bytes());
    }
    out
}

pub fn read_probmap(path: impl AsRef<Path>) -> Result<ProbMap> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_probmap(&bytes, path)
}

pub fn write_probmap(p: &ProbMap, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), &encode_probmap(p))
}
