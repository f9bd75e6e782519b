//! Shared test support: a self-contained RNG and independent brute-force
//! oracles for the pattern operators, co-occurrence counting, the five GLCM
//! statistics, and KNN prediction. Everything here is written from the
//! definitions, not from the library code it checks.

#![allow(dead_code)]

use texfeat::imageio::GrayImage;

/// SplitMix64: deterministic, dependency-free randomness for tests.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Approximately standard normal (Irwin-Hall with 12 summands).
    pub fn normal(&mut self) -> f64 {
        (0..12).map(|_| self.unit_f64()).sum::<f64>() - 6.0
    }
}

pub fn random_image(rng: &mut SplitMix, min_side: u32, max_side: u32, max_value: u8) -> GrayImage {
    let w = min_side + rng.below((max_side - min_side + 1) as u64) as u32;
    let h = min_side + rng.below((max_side - min_side + 1) as u64) as u32;
    let pixels = (0..w as usize * h as usize)
        .map(|_| rng.below(max_value as u64 + 1) as u8)
        .collect();
    GrayImage::new(w, h, pixels).unwrap()
}

/// The 3x3 weight kernel spelled out position by position:
/// `(dx, dy, weight)` with `dy` growing downward.
const KERNEL: [(i32, i32, u32); 8] = [
    (-1, -1, 32),
    (0, -1, 64),
    (1, -1, 128),
    (-1, 0, 16),
    (1, 0, 1),
    (-1, 1, 8),
    (0, 1, 4),
    (1, 1, 2),
];

/// Brute-force LBP over the interior: a neighbor at or above the center
/// contributes its kernel weight.
pub fn oracle_lbp(image: &GrayImage) -> Vec<u8> {
    let mut out = Vec::new();
    for y in 1..image.height() - 1 {
        for x in 1..image.width() - 1 {
            let center = image.get(x, y);
            let mut code = 0u32;
            for (dx, dy, weight) in KERNEL {
                let n = image.get((x as i32 + dx) as u32, (y as i32 + dy) as u32);
                if n >= center {
                    code += weight;
                }
            }
            out.push(code as u8);
        }
    }
    out
}

/// Brute-force LTP: `(upper, lower)` codes per interior pixel.
pub fn oracle_ltp(image: &GrayImage, t: u8) -> (Vec<u8>, Vec<u8>) {
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for y in 1..image.height() - 1 {
        for x in 1..image.width() - 1 {
            let center = image.get(x, y) as i32;
            let (mut up, mut lo) = (0u32, 0u32);
            for (dx, dy, weight) in KERNEL {
                let n = image.get((x as i32 + dx) as u32, (y as i32 + dy) as u32) as i32;
                let diff = n - center;
                if diff >= t as i32 {
                    up += weight;
                } else if diff <= -(t as i32) {
                    lo += weight;
                }
            }
            upper.push(up as u8);
            lower.push(lo as u8);
        }
    }
    (upper, lower)
}

/// Brute-force ordered-pair counting: scans every pixel and keeps the pair
/// if the displaced endpoint is inside the image.
pub fn oracle_glcm_counts(image: &GrayImage, dx: i32, dy: i32, levels: usize) -> Vec<u64> {
    let mut counts = vec![0u64; levels * levels];
    let (w, h) = (image.width() as i32, image.height() as i32);
    for y in 0..h {
        for x in 0..w {
            let (nx, ny) = (x + dx, y + dy);
            if nx >= 0 && nx < w && ny >= 0 && ny < h {
                let i = image.get(x as u32, y as u32) as usize;
                let j = image.get(nx as u32, ny as u32) as usize;
                counts[i * levels + j] += 1;
            }
        }
    }
    counts
}

/// The five statistics recomputed from raw pair counts, straight from their
/// definitions on the normalized matrix (`0 * ln 0 = 0`). `variance` here is
/// the full-range `(i - j)^2` series, i.e. the default (paper) mode.
pub fn oracle_stats_from_counts(counts: &[u64], levels: usize) -> [f64; 5] {
    let total: u64 = counts.iter().sum();
    let n = total as f64;
    let mut energy = 0.0;
    let mut contrast = 0.0;
    let mut homogeneity = 0.0;
    let mut entropy = 0.0;
    let mut variance = 0.0;
    for i in 0..levels {
        for j in 0..levels {
            let c = counts[i * levels + j];
            if c == 0 {
                continue;
            }
            let k = c as f64 / n;
            let diff = i as f64 - j as f64;
            energy += k * k;
            contrast += k * diff * diff;
            homogeneity += k / (1.0 + diff * diff);
            entropy -= k.ln() * k;
            variance += diff * diff * k;
        }
    }
    [energy, contrast, homogeneity, entropy, variance]
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Exhaustive KNN oracle: refits standardization from the raw training
/// vectors, computes every distance, selects the k nearest by repeated
/// minimum extraction (earlier index wins distance ties), then applies the
/// vote rules: majority, then smaller summed distance, then smaller label.
pub fn oracle_knn_predict(
    train: &[(String, Vec<f64>)],
    query: &[f64],
    k: usize,
    manhattan: bool,
) -> String {
    let dim = query.len();
    let n = train.len() as f64;
    let mut means = vec![0.0; dim];
    for (_, v) in train {
        for d in 0..dim {
            means[d] += v[d];
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut devs = vec![0.0; dim];
    for (_, v) in train {
        for d in 0..dim {
            devs[d] += (v[d] - means[d]) * (v[d] - means[d]);
        }
    }
    for d in &mut devs {
        *d = (*d / n).sqrt();
    }
    let standardize = |v: &[f64]| -> Vec<f64> {
        (0..dim)
            .map(|d| {
                if devs[d] < 1e-12 {
                    v[d] - means[d]
                } else {
                    (v[d] - means[d]) / devs[d]
                }
            })
            .collect()
    };
    let distance = |a: &[f64], b: &[f64]| -> f64 {
        if manhattan {
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
        } else {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        }
    };

    let q = standardize(query);
    let mut dists: Vec<f64> = train
        .iter()
        .map(|(_, v)| distance(&standardize(v), &q))
        .collect();

    let mut nearest = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for (i, &d) in dists.iter().enumerate() {
            if d.is_finite() {
                match best {
                    None => best = Some(i),
                    Some(b) if d < dists[b] => best = Some(i),
                    _ => {}
                }
            }
        }
        let b = best.expect("k <= train size");
        nearest.push((train[b].0.clone(), dists[b]));
        dists[b] = f64::INFINITY;
    }

    let mut tally: Vec<(String, usize, f64)> = Vec::new();
    for (label, d) in nearest {
        match tally.iter_mut().find(|(l, _, _)| *l == label) {
            Some(entry) => {
                entry.1 += 1;
                entry.2 += d;
            }
            None => tally.push((label, 1, d)),
        }
    }
    tally.sort_by(|a, b| a.0.cmp(&b.0));
    let mut winner = tally[0].clone();
    for candidate in tally.into_iter().skip(1) {
        if candidate.1 > winner.1 || (candidate.1 == winner.1 && candidate.2 < winner.2) {
            winner = candidate;
        }
    }
    winner.0
}
