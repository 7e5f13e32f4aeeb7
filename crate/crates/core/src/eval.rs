//! Evaluation harness: tolerant PR matching, F-measure with ODS/OIS/AP/R50
//! sweeps, Pratt's figure of merit, and seeded Gaussian noise injection.
//!
//! Matching is greedy mutual-nearest one-to-one: all (detected, ground
//! truth) pairs within the spatial tolerance are ranked by distance and
//! taken while both endpoints are unmatched. Ties are ordered by the
//! unordered pair of pixel positions, which keeps the count structure
//! symmetric when the two maps swap roles. This is simpler than the BSDS
//! min-cost assignment and equivalent on the sparse maps targeted here.
//!
//! Noise uses ChaCha8 as the seeded generator (a fixed, portable stream
//! cipher keyed by the 64-bit seed) and the Box-Muller transform for
//! normal deviates, so noisy images reproduce bit-exactly everywhere.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::detector::{prepare, DetectorConfig};
use crate::error::{Error, Result};
use crate::image::{EdgeMap, Plane, RgbImage};

/// Additive Gaussian noise parameters on the 0-255 scale.
#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize, Serialize)]
pub struct NoiseSpec {
    /// Standard deviation in gray levels.
    pub sigma: f64,
    /// Seed for the deterministic generator.
    pub seed: u64,
}

struct GaussianSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    fn new(seed: u64) -> Self {
        GaussianSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    #[inline]
    fn uniform(&mut self) -> f64 {
        // 53 uniform bits in [0, 1)
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate via Box-Muller.
    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform(); // (0, 1], keeps ln finite
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (sin_a, cos_a) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(radius * sin_a);
        radius * cos_a
    }
}

/// Add independent N(0, sigma^2) noise per channel per pixel, rounded to
/// the nearest integer and clamped to `[0, 255]`.
pub fn add_gaussian_noise(img: &RgbImage, spec: &NoiseSpec) -> RgbImage {
    if spec.sigma == 0.0 {
        return img.clone();
    }
    let (w, h) = img.dims();
    let mut source = GaussianSource::new(spec.seed);
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let mut px = img.pixel(x, y);
            for c in px.iter_mut() {
                let noisy = f64::from(*c) + spec.sigma * source.next();
                *c = noisy.round().clamp(0.0, 255.0) as u8;
            }
            out.set_pixel(x, y, px);
        }
    }
    out
}

/// Counts from tolerant one-to-one matching of a detected map against GT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchCounts {
    /// Detected pixels matched to a GT pixel.
    pub n_tp: usize,
    /// Detected pixels with no match.
    pub n_fp: usize,
    /// GT pixels matched by a detected pixel.
    pub n_mt: usize,
    /// GT pixels left unmatched.
    pub n_um: usize,
}

impl MatchCounts {
    pub fn accumulate(&mut self, other: &MatchCounts) {
        self.n_tp += other.n_tp;
        self.n_fp += other.n_fp;
        self.n_mt += other.n_mt;
        self.n_um += other.n_um;
    }
}

/// BSDS-style default tolerance: 0.75% of the image diagonal, rounded up,
/// at least one pixel.
pub fn default_tolerance(width: usize, height: usize) -> f64 {
    let diagonal = ((width * width + height * height) as f64).sqrt();
    (0.0075 * diagonal).ceil().max(1.0)
}

/// Greedy mutual-nearest one-to-one matching within `tol` pixels
/// (Euclidean). Returns the four match counts.
pub fn match_edges(detected: &EdgeMap, gt: &EdgeMap, tol: f64) -> Result<MatchCounts> {
    if !detected.same_dims(gt) {
        return Err(Error::dims(detected.dims(), gt.dims()));
    }
    if tol < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be >= 0, got {tol}"
        )));
    }
    let (w, h) = detected.dims();
    let det_positions = detected.positions();
    let gt_positions = gt.positions();

    // index of gt pixels by position for windowed candidate lookup
    let mut gt_index = vec![usize::MAX; w * h];
    for (j, &(x, y)) in gt_positions.iter().enumerate() {
        gt_index[y * w + x] = j;
    }

    let radius = tol.floor() as i64;
    let tol_sq = tol * tol;
    // (d^2, min linear pos, max linear pos, det index, gt index)
    let mut pairs: Vec<(i64, usize, usize, usize, usize)> = Vec::new();
    for (i, &(dx, dy)) in det_positions.iter().enumerate() {
        for oy in -radius..=radius {
            let ny = dy as i64 + oy;
            if ny < 0 || ny >= h as i64 {
                continue;
            }
            for ox in -radius..=radius {
                let nx = dx as i64 + ox;
                if nx < 0 || nx >= w as i64 {
                    continue;
                }
                let d_sq = ox * ox + oy * oy;
                if d_sq as f64 > tol_sq {
                    continue;
                }
                let j = gt_index[ny as usize * w + nx as usize];
                if j != usize::MAX {
                    let det_pos = dy * w + dx;
                    let gt_pos = ny as usize * w + nx as usize;
                    pairs.push((
                        d_sq,
                        det_pos.min(gt_pos),
                        det_pos.max(gt_pos),
                        i,
                        j,
                    ));
                }
            }
        }
    }
    pairs.sort_unstable();

    let mut det_used = vec![false; det_positions.len()];
    let mut gt_used = vec![false; gt_positions.len()];
    let mut matches = 0usize;
    for &(_, _, _, i, j) in &pairs {
        if !det_used[i] && !gt_used[j] {
            det_used[i] = true;
            gt_used[j] = true;
            matches += 1;
        }
    }
    Ok(MatchCounts {
        n_tp: matches,
        n_fp: det_positions.len() - matches,
        n_mt: matches,
        n_um: gt_positions.len() - matches,
    })
}

/// Precision and recall from match counts. When both maps are empty the
/// result is (1, 1) — vacuous perfection; a lone empty side scores 0.
pub fn precision_recall(c: &MatchCounts) -> (f64, f64) {
    let detected = c.n_tp + c.n_fp;
    let truth = c.n_mt + c.n_um;
    if detected == 0 && truth == 0 {
        return (1.0, 1.0);
    }
    let p = if detected == 0 {
        0.0
    } else {
        c.n_tp as f64 / detected as f64
    };
    let r = if truth == 0 {
        0.0
    } else {
        c.n_mt as f64 / truth as f64
    };
    (p, r)
}

/// Harmonic mean of precision and recall; 0 when both vanish.
pub fn f_measure(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Exact squared Euclidean distance transform (two-pass 1-D lower
/// envelopes of parabolas). Output holds, for every pixel, the squared
/// distance to the nearest edge pixel of `map`.
pub fn squared_edt(map: &EdgeMap) -> Plane {
    const INF: f64 = 1e20;
    let (w, h) = map.dims();
    let mut grid = vec![INF; w * h];
    for y in 0..h {
        for x in 0..w {
            if map.get(x, y) {
                grid[y * w + x] = 0.0;
            }
        }
    }

    let mut column = vec![0.0f64; h];
    let mut out_col = vec![0.0f64; h];
    for x in 0..w {
        for y in 0..h {
            column[y] = grid[y * w + x];
        }
        edt_1d(&column, &mut out_col);
        for y in 0..h {
            grid[y * w + x] = out_col[y];
        }
    }
    let mut out_row = vec![0.0f64; w];
    for y in 0..h {
        edt_1d(&grid[y * w..(y + 1) * w], &mut out_row);
        grid[y * w..(y + 1) * w].copy_from_slice(&out_row);
    }
    Plane::new(w, h, grid).expect("dimensions preserved")
}

/// 1-D squared distance transform under a sampled cost function.
fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    debug_assert_eq!(out.len(), n);
    let mut vertices = vec![0usize; n];
    let mut boundaries = vec![0.0f64; n + 1];
    let mut k = 0usize;
    boundaries[0] = f64::NEG_INFINITY;
    boundaries[1] = f64::INFINITY;
    for q in 1..n {
        let mut s;
        loop {
            let p = vertices[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= boundaries[k] {
                if k == 0 {
                    break;
                }
                k -= 1;
            } else {
                break;
            }
        }
        if s <= boundaries[k] {
            // degenerate: new parabola dominates everything so far
            vertices[k] = q;
        } else {
            k += 1;
            vertices[k] = q;
            boundaries[k] = s;
        }
        boundaries[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for (q, slot) in out.iter_mut().enumerate() {
        while boundaries[k + 1] < q as f64 {
            k += 1;
        }
        let p = vertices[k];
        let d = q as f64 - p as f64;
        *slot = d * d + f[p];
    }
}

/// Pratt's figure of merit: localization-weighted agreement between a
/// detected edge map and the ideal one. 1 is a perfect result.
pub fn fom(detected: &EdgeMap, gt: &EdgeMap) -> Result<f64> {
    if !detected.same_dims(gt) {
        return Err(Error::dims(detected.dims(), gt.dims()));
    }
    let n_g = gt.count();
    if n_g == 0 {
        return Err(Error::EmptyInput("FOM needs a nonempty ground truth".into()));
    }
    let n_e = detected.count();
    if n_e == 0 {
        return Ok(0.0);
    }
    let dist_sq = squared_edt(gt);
    let mut sum = 0.0f64;
    let (w, h) = detected.dims();
    for y in 0..h {
        for x in 0..w {
            if detected.get(x, y) {
                sum += 1.0 / (1.0 + 0.25 * dist_sq.get(x, y));
            }
        }
    }
    Ok(sum / n_g.max(n_e) as f64)
}

/// One point of the PR table: the metrics a (beta_low, beta_up) pair
/// produced, pooled over the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub beta_low: f64,
    pub beta_up: f64,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

/// Best grid point of one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImageBest {
    pub image: usize,
    pub beta_low: f64,
    pub beta_up: f64,
    pub f: f64,
}

/// Sweep outcome: dataset metrics plus the per-point table and per-image
/// bests that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub f_ods: f64,
    pub f_ois: f64,
    pub ap: f64,
    pub r50: f64,
    pub points: Vec<PrPoint>,
    pub per_image: Vec<ImageBest>,
}

/// Reduce a per-image, per-grid-point count matrix to the dataset summary.
///
/// `counts[i][g]` holds image `i` evaluated at grid point `g`. ODS pools
/// counts across images at a fixed grid point and takes the best pooled F;
/// OIS pools each image's best grid point (BSDS convention). AP integrates
/// the monotonized upper envelope of the pooled PR points by trapezoid,
/// with a step extension from recall 0 to the first point; R50 is the
/// largest recall with envelope precision at least 0.5, interpolating
/// between bracketing points when the envelope crosses it.
pub fn summarize_counts(counts: &[Vec<MatchCounts>], grid: &[(f64, f64)]) -> Result<EvalSummary> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("sweep grid must not be empty".into()));
    }
    if counts.is_empty() {
        return Err(Error::EmptyInput("sweep dataset must not be empty".into()));
    }
    if let Some(row) = counts.iter().find(|row| row.len() != grid.len()) {
        return Err(Error::InvalidParameter(format!(
            "count matrix row has {} entries for a grid of {}",
            row.len(),
            grid.len()
        )));
    }

    // pooled PR point per grid entry
    let mut points = Vec::with_capacity(grid.len());
    for (g, &(beta_low, beta_up)) in grid.iter().enumerate() {
        let mut pooled = MatchCounts::default();
        for row in counts {
            pooled.accumulate(&row[g]);
        }
        let (precision, recall) = precision_recall(&pooled);
        points.push(PrPoint {
            beta_low,
            beta_up,
            precision,
            recall,
            f: f_measure(precision, recall),
        });
    }
    let f_ods = points
        .iter()
        .map(|p| p.f)
        .fold(f64::NEG_INFINITY, f64::max);

    // per-image best grid point, then pool those counts
    let mut per_image = Vec::with_capacity(counts.len());
    let mut ois_pool = MatchCounts::default();
    for (i, row) in counts.iter().enumerate() {
        let mut best_g = 0;
        let mut best_f = f64::NEG_INFINITY;
        for (g, c) in row.iter().enumerate() {
            let (p, r) = precision_recall(c);
            let f = f_measure(p, r);
            if f > best_f {
                best_f = f;
                best_g = g;
            }
        }
        ois_pool.accumulate(&row[best_g]);
        per_image.push(ImageBest {
            image: i,
            beta_low: grid[best_g].0,
            beta_up: grid[best_g].1,
            f: best_f,
        });
    }
    let (ois_p, ois_r) = precision_recall(&ois_pool);
    let f_ois = f_measure(ois_p, ois_r);

    let pr: Vec<(f64, f64)> = points.iter().map(|p| (p.recall, p.precision)).collect();
    let ap = average_precision(&pr);
    let r50 = recall_at_half_precision(&pr);

    Ok(EvalSummary {
        f_ods,
        f_ois,
        ap,
        r50,
        points,
        per_image,
    })
}

/// Monotonized (recall ascending, precision = running max from the right)
/// copy of raw (recall, precision) points.
fn upper_envelope(pr: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut env = pr.to_vec();
    env.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut best = f64::NEG_INFINITY;
    for point in env.iter_mut().rev() {
        best = best.max(point.1);
        point.1 = best;
    }
    env
}

fn average_precision(pr: &[(f64, f64)]) -> f64 {
    let env = upper_envelope(pr);
    let mut ap = env[0].0 * env[0].1; // step extension down to recall 0
    for pair in env.windows(2) {
        ap += (pair[1].0 - pair[0].0) * (pair[0].1 + pair[1].1) / 2.0;
    }
    ap
}

fn recall_at_half_precision(pr: &[(f64, f64)]) -> f64 {
    let env = upper_envelope(pr);
    // envelope precision is non-increasing in recall
    let mut last_above: Option<usize> = None;
    for (i, &(_, p)) in env.iter().enumerate() {
        if p >= 0.5 {
            last_above = Some(i);
        }
    }
    match last_above {
        None => 0.0,
        Some(i) if i + 1 == env.len() => env[i].0,
        Some(i) => {
            let (r0, p0) = env[i];
            let (r1, p1) = env[i + 1];
            if p0 <= p1 {
                // flat envelope: no crossing, the higher-recall point rules
                r0
            } else {
                r0 + (r1 - r0) * (p0 - 0.5) / (p0 - p1)
            }
        }
    }
}

/// Detect and score every image at every grid point, then summarize.
///
/// Per-image preparation (the expensive, threshold-independent stages) runs
/// once and is shared by all grid points; images fan out across the current
/// rayon pool. Results are independent of thread count.
pub fn pr_sweep(
    dataset: &[(RgbImage, EdgeMap)],
    grid: &[(f64, f64)],
    cfg: &DetectorConfig,
    tol: Option<f64>,
) -> Result<EvalSummary> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("sweep grid must not be empty".into()));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyInput("sweep dataset must not be empty".into()));
    }
    let counts: Vec<Vec<MatchCounts>> = dataset
        .par_iter()
        .map(|(img, gt)| -> Result<Vec<MatchCounts>> {
            let (w, h) = img.dims();
            if gt.dims() != (w, h) {
                return Err(Error::dims((w, h), gt.dims()));
            }
            let prepared = prepare(img, cfg)?;
            let tolerance = tol.unwrap_or_else(|| default_tolerance(w, h));
            grid.iter()
                .map(|&(beta_low, beta_up)| {
                    let edges = prepared.finalize(beta_low, beta_up, cfg.connectivity)?;
                    match_edges(&edges, gt, tolerance)
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    summarize_counts(&counts, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn map_from(positions: &[(usize, usize)], w: usize, h: usize) -> EdgeMap {
        let mut m = EdgeMap::empty(w, h);
        for &(x, y) in positions {
            m.set(x, y, true);
        }
        m
    }

    #[test]
    fn zero_sigma_noise_is_identity() {
        let img = crate::synth::shapes_scene(24, 24, 3).0;
        let noisy = add_gaussian_noise(&img, &NoiseSpec { sigma: 0.0, seed: 1 });
        assert_eq!(img, noisy);
    }

    #[test]
    fn noise_is_seed_deterministic() {
        let img = RgbImage::filled(32, 32, [128, 128, 128]);
        let spec = NoiseSpec { sigma: 15.0, seed: 42 };
        assert_eq!(add_gaussian_noise(&img, &spec), add_gaussian_noise(&img, &spec));
        let other = add_gaussian_noise(&img, &NoiseSpec { sigma: 15.0, seed: 43 });
        assert_ne!(add_gaussian_noise(&img, &spec), other);
    }

    #[test]
    fn noise_statistics_match_spec() {
        let img = RgbImage::filled(256, 256, [128, 128, 128]);
        let spec = NoiseSpec { sigma: 15.0, seed: 42 };
        let noisy = add_gaussian_noise(&img, &spec);
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        let n = (256 * 256 * 3) as f64;
        for (a, b) in noisy.data().iter().zip(img.data()) {
            let d = f64::from(*a) - f64::from(*b);
            sum += d;
            sum_sq += d * d;
        }
        let mean = sum / n;
        let std = ((sum_sq - n * mean * mean) / (n - 1.0)).sqrt();
        assert!(mean.abs() < 0.5, "mean {mean}");
        assert!((14.0..=16.0).contains(&std), "std {std}");
    }

    #[test]
    fn match_identity() {
        let m = map_from(&[(1, 1), (2, 3), (5, 5), (7, 2), (0, 6), (3, 3), (6, 6)], 8, 8);
        let c = match_edges(&m, &m, 2.0).unwrap();
        assert_eq!(c, MatchCounts { n_tp: 7, n_fp: 0, n_mt: 7, n_um: 0 });
    }

    #[test]
    fn match_within_tolerance_after_shift() {
        let gt = map_from(&(2..12).map(|y| (5, y)).collect::<Vec<_>>(), 16, 16);
        let detected = map_from(&(2..12).map(|y| (6, y)).collect::<Vec<_>>(), 16, 16);
        let c = match_edges(&detected, &gt, 2.0).unwrap();
        assert_eq!(c.n_fp, 0);
        assert_eq!(c.n_um, 0);
    }

    #[test]
    fn match_beyond_tolerance_fails_everything() {
        let gt = map_from(&(0..7).map(|y| (2, 2 * y)).collect::<Vec<_>>(), 16, 16);
        let detected = map_from(&(0..7).map(|y| (7, 2 * y)).collect::<Vec<_>>(), 16, 16);
        let c = match_edges(&detected, &gt, 2.0).unwrap();
        assert_eq!(c, MatchCounts { n_tp: 0, n_fp: 7, n_mt: 0, n_um: 7 });
    }

    #[test]
    fn match_counts_partition_both_sets() {
        let detected = map_from(&[(0, 0), (3, 3), (9, 9), (1, 7)], 12, 12);
        let gt = map_from(&[(0, 1), (3, 4), (5, 5)], 12, 12);
        let c = match_edges(&detected, &gt, 1.5).unwrap();
        assert_eq!(c.n_tp + c.n_fp, 4);
        assert_eq!(c.n_mt + c.n_um, 3);
        assert_eq!(c.n_tp, c.n_mt);
    }

    #[test]
    fn match_is_count_symmetric() {
        let a = map_from(&[(0, 0), (2, 2), (4, 4), (4, 5), (7, 1)], 9, 9);
        let b = map_from(&[(1, 0), (2, 3), (5, 4), (7, 7)], 9, 9);
        let ab = match_edges(&a, &b, 2.0).unwrap();
        let ba = match_edges(&b, &a, 2.0).unwrap();
        assert_eq!((ab.n_tp, ab.n_fp), (ba.n_mt, ba.n_um));
        assert_eq!((ab.n_mt, ab.n_um), (ba.n_tp, ba.n_fp));
    }

    #[test]
    fn match_rejects_dimension_mismatch() {
        let a = EdgeMap::empty(4, 4);
        let b = EdgeMap::empty(5, 4);
        assert!(match_edges(&a, &b, 1.0).is_err());
    }

    #[test]
    fn precision_recall_examples() {
        let (p, _) = precision_recall(&MatchCounts { n_tp: 5, n_fp: 5, n_mt: 5, n_um: 1 });
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
        let (_, r) = precision_recall(&MatchCounts { n_tp: 8, n_fp: 0, n_mt: 8, n_um: 2 });
        assert_abs_diff_eq!(r, 0.8, epsilon = 1e-15);
        assert_eq!(precision_recall(&MatchCounts::default()), (1.0, 1.0));
        // empty detected against nonempty gt scores zero precision
        let (p, r) = precision_recall(&MatchCounts { n_tp: 0, n_fp: 0, n_mt: 0, n_um: 3 });
        assert_eq!((p, r), (0.0, 0.0));
    }

    #[test]
    fn f_measure_examples() {
        assert_abs_diff_eq!(f_measure(0.5, 0.5), 0.5, epsilon = 1e-15);
        assert_eq!(f_measure(1.0, 0.0), 0.0);
        assert_abs_diff_eq!(f_measure(0.6, 0.4), 0.48, epsilon = 1e-12);
    }

    #[test]
    fn edt_matches_brute_force() {
        let maps = [
            map_from(&[(0, 0)], 7, 5),
            map_from(&[(3, 2), (6, 4)], 7, 5),
            map_from(&[(0, 4), (6, 0), (3, 3), (2, 1)], 7, 5),
        ];
        for map in &maps {
            let edt = squared_edt(map);
            let positions = map.positions();
            for y in 0..5i64 {
                for x in 0..7i64 {
                    let brute = positions
                        .iter()
                        .map(|&(px, py)| {
                            let dx = x - px as i64;
                            let dy = y - py as i64;
                            (dx * dx + dy * dy) as f64
                        })
                        .fold(f64::INFINITY, f64::min);
                    assert_eq!(edt.get(x as usize, y as usize), brute, "at {x},{y}");
                }
            }
        }
    }

    #[test]
    fn fom_identity_is_exactly_one() {
        let m = map_from(&[(1, 1), (2, 2), (3, 3), (5, 1)], 8, 8);
        assert_eq!(fom(&m, &m).unwrap(), 1.0);
    }

    #[test]
    fn fom_single_pixel_at_unit_distance() {
        let gt = map_from(&[(3, 3)], 8, 8);
        let detected = map_from(&[(4, 3)], 8, 8);
        assert_abs_diff_eq!(fom(&detected, &gt).unwrap(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn fom_normalizes_by_larger_count() {
        // count ratio 2 with every distance zero gives exactly 0.5,
        // regardless of which side is larger
        let gt = map_from(&[(2, 2), (5, 5)], 8, 8);
        let half = map_from(&[(2, 2)], 8, 8);
        assert_abs_diff_eq!(fom(&half, &gt).unwrap(), 0.5, epsilon = 1e-15);

        let gt_small = map_from(&[(2, 2)], 8, 8);
        let det_two = map_from(&[(2, 2), (3, 2)], 8, 8);
        // d = 0 and d = 1: sum = 1.8 over max(1, 2) = 2
        assert_abs_diff_eq!(fom(&det_two, &gt_small).unwrap(), 0.9, epsilon = 1e-12);
    }

    #[test]
    fn fom_rejects_empty_gt_and_zeroes_empty_detection() {
        let empty = EdgeMap::empty(4, 4);
        let gt = map_from(&[(1, 1)], 4, 4);
        assert!(fom(&gt, &empty).is_err());
        assert_eq!(fom(&empty, &gt).unwrap(), 0.0);
    }

    #[test]
    fn summary_single_image_single_point() {
        let counts = vec![vec![MatchCounts { n_tp: 4, n_fp: 1, n_mt: 4, n_um: 4 }]];
        let summary = summarize_counts(&counts, &[(0.7, 0.9)]).unwrap();
        let (p, r) = precision_recall(&counts[0][0]);
        let f = f_measure(p, r);
        assert_abs_diff_eq!(summary.f_ods, f, epsilon = 1e-15);
        assert_abs_diff_eq!(summary.f_ois, f, epsilon = 1e-15);
        assert_eq!(summary.per_image.len(), 1);
    }

    #[test]
    fn summary_perfect_single_point_has_unit_ap() {
        let counts = vec![vec![MatchCounts { n_tp: 9, n_fp: 0, n_mt: 9, n_um: 0 }]];
        let summary = summarize_counts(&counts, &[(0.7, 0.9)]).unwrap();
        assert_abs_diff_eq!(summary.ap, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(summary.r50, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn r50_reads_envelope() {
        // two points: (P=1, R=0.2) and (P=0.5, R=0.8)
        let counts = vec![vec![
            MatchCounts { n_tp: 2, n_fp: 0, n_mt: 2, n_um: 8 },
            MatchCounts { n_tp: 8, n_fp: 8, n_mt: 8, n_um: 2 },
        ]];
        let summary = summarize_counts(&counts, &[(0.5, 0.9), (0.3, 0.7)]).unwrap();
        assert_abs_diff_eq!(summary.r50, 0.8, epsilon = 1e-12);
        // AP: 0.2 step at precision 1 plus trapezoid down to 0.5
        assert_abs_diff_eq!(summary.ap, 0.2 + 0.6 * 0.75, epsilon = 1e-12);
    }

    #[test]
    fn r50_interpolates_when_envelope_crosses() {
        // envelope falls from 0.8 to 0.2 between recalls 0.4 and 0.9:
        // crosses 0.5 at r = 0.4 + 0.5*(0.3/0.6) = 0.65
        let counts = vec![vec![
            MatchCounts { n_tp: 4, n_fp: 1, n_mt: 4, n_um: 6 },
            MatchCounts { n_tp: 9, n_fp: 36, n_mt: 9, n_um: 1 },
        ]];
        let summary = summarize_counts(&counts, &[(0.5, 0.9), (0.3, 0.7)]).unwrap();
        assert_abs_diff_eq!(summary.r50, 0.65, epsilon = 1e-12);
    }

    #[test]
    fn r50_zero_when_precision_never_reaches_half() {
        let counts = vec![vec![MatchCounts { n_tp: 1, n_fp: 9, n_mt: 1, n_um: 1 }]];
        let summary = summarize_counts(&counts, &[(0.7, 0.9)]).unwrap();
        assert_eq!(summary.r50, 0.0);
    }

    #[test]
    fn summarize_rejects_empty_grid() {
        assert!(summarize_counts(&[vec![]], &[]).is_err());
        assert!(summarize_counts(&[], &[(0.5, 0.9)]).is_err());
    }

    #[test]
    fn default_tolerance_floors_at_one_pixel() {
        assert_eq!(default_tolerance(64, 64), 1.0);
        assert_eq!(default_tolerance(481, 321), 5.0);
    }
}
