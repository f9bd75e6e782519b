//! The joint texture descriptor: LBP histogram, LTP upper/lower histograms,
//! and the 8-direction x 5-stat GLCM block, concatenated into one
//! 808-dimensional vector.

mod table;

use std::ops::Range;

use crate::error::{Error, Result};
use crate::glcm::{self, VarianceMode};
use crate::imageio::GrayImage;
use crate::patterns;

pub use table::{extract_table, read_csv, write_csv, FeatureRow, FeatureTable, FORMAT_VERSION};

/// Total descriptor length: 256 + 256 + 256 + 40.
pub const FEATURE_LEN: usize = 808;

/// LBP histogram block.
pub const LBP_BLOCK: Range<usize> = 0..256;
/// LTP upper-pattern histogram block.
pub const LTP_UPPER_BLOCK: Range<usize> = 256..512;
/// LTP lower-pattern histogram block.
pub const LTP_LOWER_BLOCK: Range<usize> = 512..768;
/// GLCM statistics block: 8 directions x 5 stats, direction-major.
pub const GLCM_BLOCK: Range<usize> = 768..808;

/// Index of one GLCM feature: `direction` in `0..8` (the order of
/// [`crate::glcm::DIRECTIONS`]), `stat` in `0..5` (the order of
/// [`crate::glcm::STAT_NAMES`]). Index 768 is energy at 0 degrees, index 807
/// variance at 315 degrees.
pub fn glcm_feature_index(direction: usize, stat: usize) -> usize {
    debug_assert!(direction < glcm::DIRECTION_COUNT && stat < glcm::STAT_NAMES.len());
    GLCM_BLOCK.start + direction * glcm::STAT_NAMES.len() + stat
}

/// All free parameters of the extraction pipeline. Every output file echoes
/// these verbatim so results can be reproduced and mismatched artifacts
/// rejected.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ExtractionConfig {
    pub ltp_t: u8,
    pub glcm_levels: u16,
    pub glcm_distance: u32,
    pub histogram_normalize: bool,
    pub variance_mode: VarianceMode,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            ltp_t: 5,
            glcm_levels: 256,
            glcm_distance: 1,
            histogram_normalize: true,
            variance_mode: VarianceMode::Paper,
        }
    }
}

/// The 808-dimensional descriptor of one patch.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_LEN {
            return Err(Error::Dimension(format!(
                "feature vector has {} dimensions, expected {FEATURE_LEN}",
                values.len()
            )));
        }
        Ok(FeatureVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Runs the full pipeline on one patch: LBP histogram, LTP upper/lower
/// histograms, then the five statistics of each of the eight directional
/// GLCMs, in the documented layout.
pub fn extract(image: &GrayImage, cfg: &ExtractionConfig) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(FEATURE_LEN);

    let lbp = patterns::lbp_map(image)?;
    values.extend_from_slice(patterns::histogram(&lbp, cfg.histogram_normalize)?.bins());

    let ltp = patterns::ltp_maps(image, cfg.ltp_t)?;
    values.extend_from_slice(patterns::histogram(&ltp.upper, cfg.histogram_normalize)?.bins());
    values.extend_from_slice(patterns::histogram(&ltp.lower, cfg.histogram_normalize)?.bins());

    let quantized = glcm::quantize(image, cfg.glcm_levels)?;
    for g in glcm::glcm_all_directions(&quantized, cfg.glcm_distance, cfg.glcm_levels)? {
        values.extend_from_slice(&g.stats(cfg.variance_mode).as_array());
    }

    FeatureVector::new(values)
}

/// Granularity floor below which a dimension counts as constant and is only
/// centered, not scaled.
pub const DEVIATION_FLOOR: f64 = 1e-12;

/// Per-dimension mean and population deviation fitted on a training table,
/// reusable on test data.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub devs: Vec<f64>,
}

impl Standardization {
    /// Fits means and population deviations over the rows of `table`.
    pub fn fit(table: &FeatureTable) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::Statistics(format!(
                "standardization needs at least 2 rows, got {}",
                table.len()
            )));
        }
        let dim = table.dim().expect("non-empty table has a dimension");
        let n = table.len() as f64;
        let mut means = vec![0.0; dim];
        for row in table.rows() {
            for (m, v) in means.iter_mut().zip(&row.values) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut devs = vec![0.0; dim];
        for row in table.rows() {
            for ((d, v), m) in devs.iter_mut().zip(&row.values).zip(&means) {
                *d += (v - m) * (v - m);
            }
        }
        for d in &mut devs {
            *d = (*d / n).sqrt();
        }
        Ok(Standardization { means, devs })
    }

    /// Transforms one vector: `(v - mean) / dev`, with near-constant
    /// dimensions (dev below [`DEVIATION_FLOOR`]) only centered.
    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.means.len() {
            return Err(Error::Dimension(format!(
                "vector has {} dimensions, standardization was fitted on {}",
                values.len(),
                self.means.len()
            )));
        }
        Ok(values
            .iter()
            .zip(self.means.iter().zip(&self.devs))
            .map(|(v, (m, d))| {
                if *d < DEVIATION_FLOOR {
                    v - m
                } else {
                    (v - m) / d
                }
            })
            .collect())
    }
}

/// Standardizes every row of `table` with statistics fitted on the table
/// itself, returning both so the same transform can be reused on test data.
pub fn standardize(table: &FeatureTable) -> Result<(FeatureTable, Standardization)> {
    let stats = Standardization::fit(table)?;
    let table = table.map_rows(|values| stats.apply(values))?;
    Ok((table, stats))
}
