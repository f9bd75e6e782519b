//! Netpbm PGM codec: P2 (ASCII) and P5 (binary), maxval up to 255.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imageio::GrayImage;

/// Byte-level tokenizer over a PNM header: skips whitespace and `#` comments.
struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Tokens { bytes, pos: 0 }
    }

    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Option<&'a [u8]> {
        self.skip_separators();
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }

    fn next_u32(&mut self, what: &str) -> Result<u32> {
        let tok = self
            .next_token()
            .ok_or_else(|| Error::Format(format!("pgm: missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                Error::Format(format!(
                    "pgm: invalid {what} {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

/// Decodes a PGM image from raw file bytes. Values are taken verbatim
/// (no rescaling for maxval below 255).
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut toks = Tokens::new(bytes);
    let magic = toks
        .next_token()
        .ok_or_else(|| Error::Format("pgm: empty file".into()))?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(Error::Format(format!(
                "pgm: unsupported magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = toks.next_u32("width")?;
    let height = toks.next_u32("height")?;
    let maxval = toks.next_u32("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!(
            "pgm: maxval {maxval} out of supported range 1..=255"
        )));
    }
    let count = width as usize * height as usize;

    let pixels = if binary {
        // Exactly one whitespace byte separates the maxval from the raster.
        let raster_start = toks.pos + 1;
        if raster_start > bytes.len() {
            return Err(Error::Format("pgm: truncated raster".into()));
        }
        let raster = &bytes[raster_start..];
        if raster.len() < count {
            return Err(Error::Format(format!(
                "pgm: raster has {} bytes, expected {count}",
                raster.len()
            )));
        }
        if raster.len() > count {
            return Err(Error::Format(format!(
                "pgm: {} trailing bytes after raster",
                raster.len() - count
            )));
        }
        raster.to_vec()
    } else {
        let mut pixels = Vec::with_capacity(count);
        for i in 0..count {
            let v = toks.next_u32(&format!("pixel {i}"))?;
            if v > maxval {
                return Err(Error::Format(format!(
                    "pgm: pixel {i} value {v} exceeds maxval {maxval}"
                )));
            }
            pixels.push(v as u8);
        }
        if toks.next_token().is_some() {
            return Err(Error::Format("pgm: trailing data after raster".into()));
        }
        pixels
    };

    if binary && maxval < 255 {
        if let Some((i, &v)) = pixels.iter().enumerate().find(|(_, &v)| v as u32 > maxval) {
            return Err(Error::Format(format!(
                "pgm: pixel {i} value {v} exceeds maxval {maxval}"
            )));
        }
    }

    GrayImage::new(width, height, pixels)
}

/// Writes a binary (P5) PGM with maxval 255.
pub fn write_pgm(image: &GrayImage, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(image.pixels().len() + 32);
    write!(out, "P5\n{} {}\n255\n", image.width(), image.height())
        .expect("write to Vec cannot fail");
    out.extend_from_slice(image.pixels());
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
