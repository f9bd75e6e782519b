//! Deterministic synthetic texture corpus: sinusoidal gratings at several
//! frequencies and orientations, checkerboards, and noise fields. Ten
//! classes, one 640x640 image each, so the default 128-pixel tiling yields
//! 25 patches per class. Everything is drawn from ChaCha8 streams derived
//! from one seed, so the corpus regenerates bit-identically.
//!
//! Two class pairs are deliberately confusable for a single descriptor
//! block: `noise_full`/`noise_half` differ only in intensity range, which
//! the scale-free LBP codes barely see, and `micro_flat`/`micro_smooth`
//! keep every neighbor difference inside the default LTP dead zone, so
//! their LTP maps are identical. The combined vector separates both pairs.

use std::path::{Path, PathBuf};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::imageio::{write_pgm, GrayImage};

/// Seed the bundled corpus is generated with unless overridden.
pub const DEFAULT_FIXTURE_SEED: u64 = 7;

/// Side length of every generated class image.
pub const FIXTURE_IMAGE_SIDE: u32 = 640;

/// Class names in generation (and lexicographic) order.
pub const FIXTURE_CLASSES: [&str; 10] = [
    "checker_06",
    "checker_16",
    "grating_d12",
    "grating_h08",
    "grating_h24",
    "grating_v08",
    "micro_flat",
    "micro_smooth",
    "noise_full",
    "noise_half",
];

/// Per-pixel intensity jitter applied to the gratings and checkerboards.
const JITTER: i32 = 25;

fn jitter(rng: &mut ChaCha8Rng) -> i32 {
    (rng.next_u32() % (2 * JITTER as u32 + 1)) as i32 - JITTER
}

fn clamp_u8(v: i32) -> u8 {
    v.clamp(0, 255) as u8
}

fn grating(side: u32, period: f64, dir: (f64, f64), rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut pixels = Vec::with_capacity((side * side) as usize);
    for y in 0..side {
        for x in 0..side {
            let phase = (x as f64 * dir.0 + y as f64 * dir.1) / period;
            let base = 127.5 + 60.0 * (std::f64::consts::TAU * phase).sin();
            pixels.push(clamp_u8(base.round() as i32 + jitter(rng)));
        }
    }
    pixels
}

fn checkerboard(side: u32, cell: u32, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut pixels = Vec::with_capacity((side * side) as usize);
    for y in 0..side {
        for x in 0..side {
            let base = if (x / cell + y / cell) % 2 == 0 { 80 } else { 175 };
            pixels.push(clamp_u8(base + jitter(rng)));
        }
    }
    pixels
}

/// Uniform white noise over `lo..lo + span`.
fn uniform_noise(side: u32, lo: u8, span: u32, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..side as usize * side as usize)
        .map(|_| lo + (rng.next_u32() % span) as u8)
        .collect()
}

/// Five-level noise centered on 127; every adjacent difference stays within
/// +-4, inside the default LTP dead zone. With `smooth` the field is
/// horizontally averaged and re-stretched, which correlates neighbors
/// without widening the range.
fn micro_noise(side: u32, smooth: bool, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let n = side as usize * side as usize;
    let mut field: Vec<f64> = (0..n).map(|_| (rng.next_u32() % 5) as f64).collect();
    if smooth {
        let w = side as usize;
        let mut blurred = vec![0.0f64; n];
        for y in 0..w {
            for x in 0..w {
                let lo = x.saturating_sub(1);
                let hi = (x + 1).min(w - 1);
                let sum: f64 = field[y * w + lo..=y * w + hi].iter().sum();
                blurred[y * w + x] = sum / (hi - lo + 1) as f64;
            }
        }
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in &blurred {
            min = min.min(v);
            max = max.max(v);
        }
        let span = (max - min).max(1e-9);
        field = blurred
            .into_iter()
            .map(|v| ((v - min) / span * 4.0).round())
            .collect();
    }
    field.into_iter().map(|v| 125 + v as u8).collect()
}

/// Generates one class image. `class` must be one of [`FIXTURE_CLASSES`].
pub fn generate_class_image(class: &str, seed: u64) -> Result<GrayImage> {
    let idx = FIXTURE_CLASSES
        .iter()
        .position(|&c| c == class)
        .ok_or_else(|| Error::Parameter(format!("unknown fixture class {class:?}")))?;
    // widely spaced per-class streams derived from the corpus seed
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(idx as u64 + 1)),
    );
    let side = FIXTURE_IMAGE_SIDE;
    let pixels = match class {
        "checker_06" => checkerboard(side, 6, &mut rng),
        "checker_16" => checkerboard(side, 16, &mut rng),
        "grating_d12" => grating(side, 12.0, (1.0, 1.0), &mut rng),
        "grating_h08" => grating(side, 8.0, (0.0, 1.0), &mut rng),
        "grating_h24" => grating(side, 24.0, (0.0, 1.0), &mut rng),
        "grating_v08" => grating(side, 8.0, (1.0, 0.0), &mut rng),
        "micro_flat" => micro_noise(side, false, &mut rng),
        "micro_smooth" => micro_noise(side, true, &mut rng),
        "noise_full" => uniform_noise(side, 0, 256, &mut rng),
        "noise_half" => uniform_noise(side, 64, 128, &mut rng),
        _ => unreachable!("position() checked membership"),
    };
    GrayImage::new(side, side, pixels)
}

/// Writes the ten-class corpus under `root` as
/// `root/<class>/<class>.pgm`, returning the created files.
pub fn generate_fixture(root: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(FIXTURE_CLASSES.len());
    for class in FIXTURE_CLASSES {
        let dir = root.join(class);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let image = generate_class_image(class, seed)?;
        let path = dir.join(format!("{class}.pgm"));
        write_pgm(&image, &path)?;
        written.push(path);
    }
    Ok(written)
}
