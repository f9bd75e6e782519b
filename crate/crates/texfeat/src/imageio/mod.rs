//! Image decoding, grayscale conversion, and dataset ingestion.
//!
//! Supported inputs are PGM (P2/P5, maxval up to 255) and PNG (8-bit gray,
//! gray+alpha, RGB, RGBA). Color pixels are reduced to gray with the BT.601
//! luma weighting `0.299 R + 0.587 G + 0.114 B`, rounded half-up, so decoded
//! pixel values are bit-identical across platforms.

mod pgm;

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

pub use pgm::{decode_pgm, write_pgm};

/// The smallest image any operator accepts: a full 3x3 neighborhood.
pub const MIN_DIMENSION: u32 = 3;

/// A 2-D grid of 8-bit intensities, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    /// `pixels` is row-major, length `width * height`. Both dimensions must
    /// be at least [`MIN_DIMENSION`].
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width < MIN_DIMENSION || height < MIN_DIMENSION {
            return Err(Error::Dimension(format!(
                "image is {width}x{height}, minimum is {MIN_DIMENSION}x{MIN_DIMENSION}"
            )));
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::Dimension(format!(
                "pixel buffer has {} entries, expected {expected} for {width}x{height}",
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Copies the `size`-square block whose top-left corner is `(x0, y0)`.
    fn crop_square(&self, x0: u32, y0: u32, size: u32) -> GrayImage {
        let mut pixels = Vec::with_capacity(size as usize * size as usize);
        for y in y0..y0 + size {
            let row = y as usize * self.width as usize;
            pixels.extend_from_slice(&self.pixels[row + x0 as usize..row + (x0 + size) as usize]);
        }
        GrayImage {
            width: size,
            height: size,
            pixels,
        }
    }
}

/// BT.601 luma of an RGB triple, rounded half-up. The integer weights sum to
/// exactly 1000, so the result is always in `0..=255`.
#[inline]
pub fn luma_bt601(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// Where a patch came from: origin file plus its grid position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchSource {
    pub origin: String,
    pub grid_row: u32,
    pub grid_col: u32,
}

impl fmt::Display for PatchSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@r{}c{}", self.origin, self.grid_row, self.grid_col)
    }
}

/// One labeled sample: a fixed-size patch cut from a class image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPatch {
    pub image: GrayImage,
    pub label: String,
    pub source: PatchSource,
}

/// Decodes `path` to 8-bit grayscale. The format is sniffed from the file
/// contents, not the extension.
pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        return decode_pgm(&bytes);
    }
    const PNG_MAGIC: &[u8] = &[0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];
    if bytes.starts_with(PNG_MAGIC) {
        return decode_png(&bytes, path);
    }
    Err(Error::Format(format!(
        "{}: unsupported format (expected PGM or PNG)",
        path.display()
    )))
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    use image::DynamicImage;

    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::Format(format!("{}: png decode failed: {e}", path.display())))?;
    let (width, height) = (decoded.width(), decoded.height());
    let pixels = match decoded {
        DynamicImage::ImageLuma8(img) => img.into_raw(),
        DynamicImage::ImageLumaA8(img) => img.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageRgb8(img) => img
            .pixels()
            .map(|p| luma_bt601(p.0[0], p.0[1], p.0[2]))
            .collect(),
        DynamicImage::ImageRgba8(img) => img
            .pixels()
            .map(|p| luma_bt601(p.0[0], p.0[1], p.0[2]))
            .collect(),
        other => {
            return Err(Error::Format(format!(
                "{}: unsupported png pixel layout {:?} (8-bit gray/gray+alpha/RGB/RGBA only)",
                path.display(),
                other.color()
            )))
        }
    };
    GrayImage::new(width, height, pixels)
}

/// Cuts `image` into non-overlapping `patch_size`-square patches in row-major
/// grid order. Remainder pixels on the right/bottom edges are discarded. A
/// patch size larger than the image yields an empty list.
pub fn tile(
    image: &GrayImage,
    patch_size: u32,
    label: &str,
    origin: &str,
) -> Result<Vec<LabeledPatch>> {
    if patch_size < MIN_DIMENSION {
        return Err(Error::Parameter(format!(
            "patch size {patch_size} is below the minimum {MIN_DIMENSION}"
        )));
    }
    let cols = image.width() / patch_size;
    let rows = image.height() / patch_size;
    let mut patches = Vec::with_capacity((cols * rows) as usize);
    for row in 0..rows {
        for col in 0..cols {
            patches.push(LabeledPatch {
                image: image.crop_square(col * patch_size, row * patch_size, patch_size),
                label: label.to_string(),
                source: PatchSource {
                    origin: origin.to_string(),
                    grid_row: row,
                    grid_col: col,
                },
            });
        }
    }
    Ok(patches)
}

/// Result of walking a dataset directory: the patches plus any per-file or
/// per-class warnings (undecodable files, classes with no usable image).
#[derive(Debug)]
pub struct Ingest {
    pub patches: Vec<LabeledPatch>,
    pub warnings: Vec<String>,
}

/// Walks `root/<class-name>/<image files>` and tiles every decodable PGM/PNG
/// into `patch_size` patches.
///
/// Ordering is deterministic: classes lexicographically, files by name within
/// a class, patches in row-major grid order within a file. Patch origins are
/// recorded relative to `root` (`<class>/<file>`). A file that fails to
/// decode produces a warning; a class with no decodable image is skipped with
/// a warning.
pub fn ingest_dataset(root: &Path, patch_size: u32) -> Result<Ingest> {
    let entries = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut classes: Vec<(String, std::path::PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let path = entry.path();
        if path.is_dir() {
            let name = entry.file_name().to_string_lossy().into_owned();
            classes.push((name, path));
        }
    }
    if classes.is_empty() {
        return Err(Error::Dataset(format!(
            "{}: no class subdirectories found",
            root.display()
        )));
    }
    classes.sort_by(|a, b| a.0.cmp(&b.0));

    let mut patches = Vec::new();
    let mut warnings = Vec::new();
    for (label, class_dir) in &classes {
        let mut files: Vec<(String, std::path::PathBuf)> = Vec::new();
        for entry in std::fs::read_dir(class_dir).map_err(|e| Error::io(class_dir, e))? {
            let entry = entry.map_err(|e| Error::io(class_dir, e))?;
            let path = entry.path();
            let is_image_ext = path
                .extension()
                .and_then(|e| e.to_str())
                .map(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("png"))
                .unwrap_or(false);
            if path.is_file() && is_image_ext {
                files.push((entry.file_name().to_string_lossy().into_owned(), path));
            }
        }
        files.sort_by(|a, b| a.0.cmp(&b.0));

        let mut decoded_any = false;
        let class_patch_start = patches.len();
        for (file_name, path) in &files {
            match load_gray(path) {
                Ok(image) => {
                    decoded_any = true;
                    let origin = format!("{label}/{file_name}");
                    patches.extend(tile(&image, patch_size, label, &origin)?);
                }
                Err(e) => warnings.push(format!("skipping {}: {e}", path.display())),
            }
        }
        if !decoded_any {
            warnings.push(format!("class {label:?} skipped: no decodable image"));
        } else if patches.len() == class_patch_start {
            warnings.push(format!(
                "class {label:?} produced no patches at patch size {patch_size}"
            ));
        }
    }
    Ok(Ingest { patches, warnings })
}
