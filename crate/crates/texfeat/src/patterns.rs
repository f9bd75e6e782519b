//! Local binary and local ternary pattern operators over 3x3 neighborhoods.
//!
//! The neighbor-to-bit assignment is fixed to the weight kernel
//!
//! ```text
//!     32  64 128
//!     16   C   1
//!      8   4   2
//! ```
//!
//! i.e. bit 0 is the east neighbor and bits proceed clockwise. Only the
//! (8 neighbors, radius 1) configuration is implemented.

use crate::error::{Error, Result};
use crate::imageio::GrayImage;

/// Neighborhood radius of the 3x3 operator.
pub const RADIUS: u32 = 1;
/// Number of sampled neighbors.
pub const NEIGHBOR_COUNT: usize = 8;

/// Neighbor offsets `(dx, dy)` in bit order: the neighbor at
/// `NEIGHBOR_OFFSETS[k]` contributes `1 << k` to the code. `dy` grows
/// downward (row direction).
pub const NEIGHBOR_OFFSETS: [(i32, i32); NEIGHBOR_COUNT] = [
    (1, 0),   // E,  weight   1
    (1, 1),   // SE, weight   2
    (0, 1),   // S,  weight   4
    (-1, 1),  // SW, weight   8
    (-1, 0),  // W,  weight  16
    (-1, -1), // NW, weight  32
    (0, -1),  // N,  weight  64
    (1, -1),  // NE, weight 128
];

/// Per-pixel pattern codes over the interior of a source image (the 1-pixel
/// border has no full neighborhood and is excluded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMap {
    width: u32,
    height: u32,
    codes: Vec<u8>,
}

impl PatternMap {
    /// Builds a map from raw codes; `codes` is row-major of length
    /// `width * height`.
    pub fn from_codes(width: u32, height: u32, codes: Vec<u8>) -> Result<Self> {
        if codes.len() != width as usize * height as usize {
            return Err(Error::Dimension(format!(
                "code buffer has {} entries, expected {} for {width}x{height}",
                codes.len(),
                width as usize * height as usize
            )));
        }
        Ok(PatternMap {
            width,
            height,
            codes,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }
}

/// The two binary maps an LTP code splits into: `upper` holds the +1 bits,
/// `lower` the -1 bits. At every pixel and bit position at most one of the
/// two is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LtpMaps {
    pub upper: PatternMap,
    pub lower: PatternMap,
    pub threshold: u8,
}

/// 256-bin histogram of pattern codes, either raw counts or frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternHistogram {
    bins: Vec<f64>,
    normalized: bool,
}

impl PatternHistogram {
    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

#[inline]
fn code_from_neighbors(center: u8, neighbors: [u8; NEIGHBOR_COUNT]) -> u8 {
    let mut code = 0u8;
    for (k, &n) in neighbors.iter().enumerate() {
        // Strictly below the center is 0; equality takes the 1 branch.
        if n >= center {
            code |= 1 << k;
        }
    }
    code
}

#[inline]
fn ternary_from_neighbors(center: u8, neighbors: [u8; NEIGHBOR_COUNT], t: u8) -> (u8, u8) {
    let mut upper = 0u8;
    let mut lower = 0u8;
    let c = center as i16;
    let t = t as i16;
    for (k, &n) in neighbors.iter().enumerate() {
        let diff = n as i16 - c;
        if diff >= t {
            upper |= 1 << k;
        } else if diff <= -t {
            lower |= 1 << k;
        }
    }
    (upper, lower)
}

#[inline]
fn window_neighbors(window: &[[u8; 3]; 3]) -> [u8; NEIGHBOR_COUNT] {
    let mut out = [0u8; NEIGHBOR_COUNT];
    for (k, (dx, dy)) in NEIGHBOR_OFFSETS.iter().enumerate() {
        out[k] = window[(1 + dy) as usize][(1 + dx) as usize];
    }
    out
}

/// LBP code of a full 3x3 window (`window[row][col]`, center at `[1][1]`).
/// Each neighbor at or above the center intensity contributes its bit weight.
pub fn lbp_code(window: &[[u8; 3]; 3]) -> u8 {
    code_from_neighbors(window[1][1], window_neighbors(window))
}

/// Upper/lower LTP codes of a 3x3 window: a neighbor differing from the
/// center by at least `+t` sets its bit in the upper code, by at most `-t`
/// in the lower code; the dead zone in between sets neither.
pub fn ltp_code(window: &[[u8; 3]; 3], t: u8) -> (u8, u8) {
    ternary_from_neighbors(window[1][1], window_neighbors(window), t)
}

#[inline]
fn interior_neighbors(image: &GrayImage, x: u32, y: u32) -> [u8; NEIGHBOR_COUNT] {
    let mut out = [0u8; NEIGHBOR_COUNT];
    for (k, (dx, dy)) in NEIGHBOR_OFFSETS.iter().enumerate() {
        out[k] = image.get((x as i32 + dx) as u32, (y as i32 + dy) as u32);
    }
    out
}

/// Applies the LBP operator to every interior pixel.
pub fn lbp_map(image: &GrayImage) -> Result<PatternMap> {
    let width = image.width() - 2;
    let height = image.height() - 2;
    let mut codes = Vec::with_capacity(width as usize * height as usize);
    for y in 1..image.height() - 1 {
        for x in 1..image.width() - 1 {
            codes.push(code_from_neighbors(
                image.get(x, y),
                interior_neighbors(image, x, y),
            ));
        }
    }
    PatternMap::from_codes(width, height, codes)
}

/// Applies the LTP operator with threshold `t` to every interior pixel.
/// `t` must be at least 1 (at `t = 0` the dead zone vanishes and every
/// neighbor would land in the upper map).
pub fn ltp_maps(image: &GrayImage, t: u8) -> Result<LtpMaps> {
    if t == 0 {
        return Err(Error::Parameter(
            "ltp threshold must be at least 1".into(),
        ));
    }
    let width = image.width() - 2;
    let height = image.height() - 2;
    let mut upper = Vec::with_capacity(width as usize * height as usize);
    let mut lower = Vec::with_capacity(width as usize * height as usize);
    for y in 1..image.height() - 1 {
        for x in 1..image.width() - 1 {
            let (u, l) = ternary_from_neighbors(image.get(x, y), interior_neighbors(image, x, y), t);
            upper.push(u);
            lower.push(l);
        }
    }
    Ok(LtpMaps {
        upper: PatternMap::from_codes(width, height, upper)?,
        lower: PatternMap::from_codes(width, height, lower)?,
        threshold: t,
    })
}

/// Bins the codes of `map` into 256 bins. With `normalize` the bins are
/// divided by the pixel count so they sum to 1.
pub fn histogram(map: &PatternMap, normalize: bool) -> Result<PatternHistogram> {
    let total = map.codes.len();
    if total == 0 {
        return Err(Error::EmptyInput("pattern map has no codes".into()));
    }
    let mut bins = vec![0.0f64; 256];
    for &c in &map.codes {
        bins[c as usize] += 1.0;
    }
    if normalize {
        let n = total as f64;
        for b in &mut bins {
            *b /= n;
        }
    }
    Ok(PatternHistogram {
        bins,
        normalized: normalize,
    })
}
