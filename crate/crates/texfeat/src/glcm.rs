//! Gray-level co-occurrence matrices and their statistical features.
//!
//! A GLCM for offset `(dx, dy)` counts ordered pixel pairs: cell `(i, j)` is
//! the number of positions `(x, y)` with value `i` whose neighbor at
//! `(x + dx, y + dy)` has value `j`. Matrices are built per direction and are
//! not symmetrized; the matrix for the opposite offset is the transpose.

use crate::error::{Error, Result};
use crate::imageio::GrayImage;

/// A pixel displacement restricted to the eight unit directions scaled by an
/// integer distance: `(d,0)`, `(d,-d)`, `(0,-d)`, `(-d,-d)`, `(-d,0)`,
/// `(-d,d)`, `(0,d)`, `(d,d)` with `d >= 1`. `dy` grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Offset {
    dx: i32,
    dy: i32,
}

impl Offset {
    pub fn new(dx: i32, dy: i32) -> Result<Self> {
        let (ax, ay) = (dx.unsigned_abs(), dy.unsigned_abs());
        let d = ax.max(ay);
        let valid = d >= 1 && (ax == 0 || ax == d) && (ay == 0 || ay == d);
        if !valid {
            return Err(Error::Parameter(format!(
                "offset ({dx},{dy}) is not a unit direction scaled by d >= 1"
            )));
        }
        Ok(Offset { dx, dy })
    }

    pub fn dx(&self) -> i32 {
        self.dx
    }

    pub fn dy(&self) -> i32 {
        self.dy
    }

    pub fn opposite(&self) -> Offset {
        Offset {
            dx: -self.dx,
            dy: -self.dy,
        }
    }
}

/// Number of co-occurrence directions.
pub const DIRECTION_COUNT: usize = 8;

/// Unit offsets for the eight directions in their fixed order
/// 0°, 45°, 90°, 135°, 180°, 225°, 270°, 315°. The angle is measured
/// counter-clockwise in image coordinates, so 45° points up-right
/// (`dy = -1`). The feature-vector layout depends on this order.
pub const DIRECTIONS: [(i32, i32); DIRECTION_COUNT] = [
    (1, 0),   //   0 deg
    (1, -1),  //  45 deg
    (0, -1),  //  90 deg
    (-1, -1), // 135 deg
    (-1, 0),  // 180 deg
    (-1, 1),  // 225 deg
    (0, 1),   // 270 deg
    (1, 1),   // 315 deg
];

/// The offset for direction index `dir` (into [`DIRECTIONS`]) at `distance`.
pub fn direction_offset(dir: usize, distance: u32) -> Result<Offset> {
    if dir >= DIRECTION_COUNT {
        return Err(Error::Parameter(format!(
            "direction index {dir} out of range 0..{DIRECTION_COUNT}"
        )));
    }
    if distance == 0 {
        return Err(Error::Parameter("glcm distance must be at least 1".into()));
    }
    let (ux, uy) = DIRECTIONS[dir];
    Offset::new(ux * distance as i32, uy * distance as i32)
}

/// How the `variance` statistic is computed; see [`Glcm::stats`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceMode {
    /// Sum of `(i - j)^2 K[i,j]` over the full index range — term for term
    /// the same series as contrast, kept as the default for fidelity to the
    /// descriptor definition.
    Paper,
    /// Conventional dispersion around the row-marginal mean:
    /// `sum (i - mu)^2 K[i,j]` with `mu = sum i * K_row(i)`.
    Standard,
}

impl std::fmt::Display for VarianceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VarianceMode::Paper => write!(f, "paper"),
            VarianceMode::Standard => write!(f, "standard"),
        }
    }
}

impl std::str::FromStr for VarianceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(VarianceMode::Paper),
            "standard" => Ok(VarianceMode::Standard),
            other => Err(Error::Parameter(format!(
                "unknown variance mode {other:?} (expected \"paper\" or \"standard\")"
            ))),
        }
    }
}

/// A co-occurrence count matrix over `levels x levels` cells. `offset` is
/// `None` for an isotropic (direction-summed) matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glcm {
    levels: usize,
    offset: Option<Offset>,
    counts: Vec<u32>,
    total: u64,
}

/// The five scalar features of a normalized GLCM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlcmStats {
    pub energy: f64,
    pub contrast: f64,
    pub homogeneity: f64,
    pub entropy: f64,
    pub variance: f64,
}

/// Stat names in feature-vector order.
pub const STAT_NAMES: [&str; 5] = ["energy", "contrast", "homogeneity", "entropy", "variance"];

impl GlcmStats {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.energy,
            self.contrast,
            self.homogeneity,
            self.entropy,
            self.variance,
        ]
    }
}

impl Glcm {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn offset(&self) -> Option<Offset> {
        self.offset
    }

    /// Raw pair counts, row-major: `counts()[i * levels + j]`.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.levels + j]
    }

    /// Total number of counted pairs.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// The matrix as probabilities summing to 1.
    pub fn normalized(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Computes the five statistics on the normalized matrix. Empty cells
    /// contribute nothing to the entropy sum (`0 * ln 0 = 0`).
    pub fn stats(&self, mode: VarianceMode) -> GlcmStats {
        let n = self.total as f64;
        let levels = self.levels;
        let mut energy = 0.0;
        let mut contrast = 0.0;
        let mut homogeneity = 0.0;
        let mut entropy = 0.0;
        for (idx, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let k = c as f64 / n;
            let i = (idx / levels) as f64;
            let j = (idx % levels) as f64;
            let diff = i - j;
            energy += k * k;
            contrast += k * diff * diff;
            homogeneity += k / (1.0 + diff * diff);
            entropy += -k.ln() * k;
        }
        let variance = match mode {
            VarianceMode::Paper => contrast,
            VarianceMode::Standard => {
                let mut mu = 0.0;
                for (idx, &c) in self.counts.iter().enumerate() {
                    if c != 0 {
                        mu += (idx / levels) as f64 * (c as f64 / n);
                    }
                }
                let mut var = 0.0;
                for (idx, &c) in self.counts.iter().enumerate() {
                    if c != 0 {
                        let i = (idx / levels) as f64;
                        var += (i - mu) * (i - mu) * (c as f64 / n);
                    }
                }
                var
            }
        };
        GlcmStats {
            energy,
            contrast,
            homogeneity,
            entropy,
            variance,
        }
    }
}

fn check_levels(levels: u16) -> Result<usize> {
    if !(2..=256).contains(&levels) {
        return Err(Error::Parameter(format!(
            "gray levels {levels} out of range 2..=256"
        )));
    }
    Ok(levels as usize)
}

/// Requantizes `image` to `levels` gray levels by `v -> floor(v * levels / 256)`.
pub fn quantize(image: &GrayImage, levels: u16) -> Result<GrayImage> {
    let levels = check_levels(levels)? as u32;
    let pixels = image
        .pixels()
        .iter()
        .map(|&v| (v as u32 * levels / 256) as u8)
        .collect();
    GrayImage::new(image.width(), image.height(), pixels)
}

/// Builds the co-occurrence matrix of `image` for `offset`. Every pixel value
/// must already be below `levels` (see [`quantize`]).
pub fn glcm(image: &GrayImage, offset: Offset, levels: u16) -> Result<Glcm> {
    let levels = check_levels(levels)?;
    if let Some(&v) = image.pixels().iter().find(|&&v| v as usize >= levels) {
        return Err(Error::Parameter(format!(
            "pixel value {v} not below {levels} gray levels; quantize first"
        )));
    }
    let (w, h) = (image.width() as i32, image.height() as i32);
    let x_range = (-offset.dx).max(0)..(w - offset.dx.max(0));
    let y_range = (-offset.dy).max(0)..(h - offset.dy.max(0));
    let mut counts = vec![0u32; levels * levels];
    let mut total = 0u64;
    for y in y_range {
        for x in x_range.clone() {
            let i = image.get(x as u32, y as u32) as usize;
            let j = image.get((x + offset.dx) as u32, (y + offset.dy) as u32) as usize;
            counts[i * levels + j] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::Degenerate(format!(
            "no pixel pairs for offset ({},{}) in a {}x{} image",
            offset.dx,
            offset.dy,
            image.width(),
            image.height()
        )));
    }
    Ok(Glcm {
        levels,
        offset: Some(offset),
        counts,
        total,
    })
}

/// The eight directional matrices at `distance`, in [`DIRECTIONS`] order.
pub fn glcm_all_directions(image: &GrayImage, distance: u32, levels: u16) -> Result<Vec<Glcm>> {
    (0..DIRECTION_COUNT)
        .map(|dir| glcm(image, direction_offset(dir, distance)?, levels))
        .collect()
}

/// Sums the eight directional count matrices into one rotation-tolerant
/// matrix. Not part of the joint feature vector, which keeps directions
/// separate.
pub fn isotropic_glcm(image: &GrayImage, distance: u32, levels: u16) -> Result<Glcm> {
    let per_direction = glcm_all_directions(image, distance, levels)?;
    let levels = per_direction[0].levels;
    let mut counts = vec![0u32; levels * levels];
    let mut total = 0u64;
    for g in &per_direction {
        for (acc, &c) in counts.iter_mut().zip(&g.counts) {
            *acc += c;
        }
        total += g.total;
    }
    Ok(Glcm {
        levels,
        offset: None,
        counts,
        total,
    })
}
