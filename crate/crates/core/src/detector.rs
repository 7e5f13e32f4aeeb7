//! The full edge detector: Lab conversion, bank smoothing, fusion,
//! equalization, non-maxima suppression, percentile hysteresis thresholds,
//! and edge linking.
//!
//! The pipeline is split into [`prepare`] (everything up to and including
//! the thinned response, which is independent of the thresholds) and
//! [`PreparedImage::finalize`] (percentile thresholds plus hysteresis).
//! Threshold sweeps reuse one prepared image per input, which is what makes
//! dataset-scale PR sweeps affordable; composing the two stages is exactly
//! [`detect_edges`].
//!
//! NMS convention: `theta_k` is the Gabor carrier orientation, and the
//! magnitude response to an edge peaks when the carrier lies along the edge
//! normal, so suppression steps along the carrier direction itself. The
//! `carrier+90` switch exists for experiments with the opposite reading.
//! A pixel survives only if strictly greater than the forward neighbor and
//! at least equal to the backward one, which keeps exactly one pixel per
//! plateau and prevents double-width ridges.

use serde::{Deserialize, Serialize};

use crate::colorspace::{rgb_to_lab, rgb_to_lab_linearized};
use crate::error::{Error, Result};
use crate::esm::{
    contrast_equalize, fuse, fused_orientation, EqualizedEsm, OrientationMap, OrientedMagnitudes,
};
use crate::gabor::{build_bank, orientation_angle, GaborParams};
use crate::image::{EdgeMap, Plane, RgbImage};

/// Pixel neighborhood used by hysteresis linking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

impl Connectivity {
    fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[
                (1, 0),
                (-1, 0),
                (0, 1),
                (0, -1),
                (1, 1),
                (1, -1),
                (-1, 1),
                (-1, -1),
            ],
        }
    }
}

/// How NMS samples the two neighbors along the suppression direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NmsInterpolation {
    /// Quantize the direction to the nearest of the 8 compass neighbors.
    #[default]
    Nearest,
    /// Bilinear interpolation at unit distance along the exact direction.
    Linear,
}

/// Which direction NMS steps in relative to the winning carrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum NmsDirection {
    #[serde(rename = "carrier")]
    #[default]
    Carrier,
    #[serde(rename = "carrier+90")]
    CarrierPlus90,
}

/// Which Lab channels feed the bank. `LuminanceOnly` is the ablation used
/// to quantify what the chroma channels contribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ChannelSet {
    #[default]
    All,
    Luminance,
}

fn default_window() -> usize {
    7
}
fn default_beta_low() -> f64 {
    0.70
}
fn default_beta_up() -> f64 {
    0.90
}
fn default_connectivity() -> Connectivity {
    Connectivity::Eight
}

/// Full detector configuration with serde defaults on every field, so an
/// empty JSON object yields the stock detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(default)]
    pub gabor: GaborParams,
    /// Window size W for the local mean in contrast equalization.
    #[serde(default = "default_window")]
    pub window: usize,
    /// Lower percentile for the hysteresis threshold pair.
    #[serde(default = "default_beta_low")]
    pub beta_low: f64,
    /// Upper percentile for the hysteresis threshold pair.
    #[serde(default = "default_beta_up")]
    pub beta_up: f64,
    #[serde(default = "default_connectivity")]
    pub connectivity: Connectivity,
    #[serde(default)]
    pub nms_interpolation: NmsInterpolation,
    #[serde(default)]
    pub nms_direction: NmsDirection,
    #[serde(default)]
    pub channels: ChannelSet,
    /// Apply IEC 61966-2-1 linearization before the RGB→XYZ matrix.
    #[serde(default)]
    pub srgb_gamma: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            gabor: GaborParams::default(),
            window: default_window(),
            beta_low: default_beta_low(),
            beta_up: default_beta_up(),
            connectivity: default_connectivity(),
            nms_interpolation: NmsInterpolation::default(),
            nms_direction: NmsDirection::default(),
            channels: ChannelSet::default(),
            srgb_gamma: false,
        }
    }
}

impl DetectorConfig {
    /// Collect every invariant violation under `prefix`-qualified field
    /// paths; empty means valid.
    pub fn validate_at(&self, prefix: &str) -> Vec<String> {
        let mut errs = self.gabor.validate_at(&format!("{prefix}gabor."));
        if self.window < 3 || self.window.is_multiple_of(2) {
            errs.push(format!(
                "{prefix}window: must be odd and >= 3, got {}",
                self.window
            ));
        }
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !in_unit(self.beta_low) {
            errs.push(format!(
                "{prefix}beta_low: must lie in (0, 1), got {}",
                self.beta_low
            ));
        }
        if !in_unit(self.beta_up) {
            errs.push(format!(
                "{prefix}beta_up: must lie in (0, 1), got {}",
                self.beta_up
            ));
        }
        if in_unit(self.beta_low) && in_unit(self.beta_up) && self.beta_low >= self.beta_up {
            errs.push(format!(
                "{prefix}beta_low, {prefix}beta_up: need beta_low < beta_up, got {} >= {}",
                self.beta_low, self.beta_up
            ));
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.validate_at("");
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(errs.join("; ")))
        }
    }
}

fn bilinear_mirror(plane: &Plane, fx: f64, fy: f64) -> f64 {
    let x0 = fx.floor();
    let y0 = fy.floor();
    let wx = fx - x0;
    let wy = fy - y0;
    let x0 = x0 as i64;
    let y0 = y0 as i64;
    let p00 = plane.get_mirror(x0, y0);
    let p10 = plane.get_mirror(x0 + 1, y0);
    let p01 = plane.get_mirror(x0, y0 + 1);
    let p11 = plane.get_mirror(x0 + 1, y0 + 1);
    (1.0 - wy) * ((1.0 - wx) * p00 + wx * p10) + wy * ((1.0 - wx) * p01 + wx * p11)
}

/// Offsets of the compass neighbor nearest to angle `theta` (mod pi).
fn compass_offsets(theta: f64) -> (i64, i64) {
    let quarter = std::f64::consts::FRAC_PI_4;
    let sector = (theta.rem_euclid(std::f64::consts::PI) / quarter).round() as i64 % 4;
    match sector {
        0 => (1, 0),
        1 => (1, 1),
        2 => (0, 1),
        _ => (-1, 1),
    }
}

/// Non-maxima suppression of the equalized ESM along the per-pixel
/// orientation. Survivors keep their value, everything else becomes 0;
/// border pixels compare against mirror-padded neighbors.
pub fn nms(
    xi_tilde: &EqualizedEsm,
    orient: &OrientationMap,
    direction: NmsDirection,
    interpolation: NmsInterpolation,
) -> Result<Plane> {
    let (w, h) = xi_tilde.dims();
    if orient.dims() != (w, h) {
        return Err(Error::dims((w, h), orient.dims()));
    }
    let k_count = orient.orientations();
    let plane = &xi_tilde.strength;
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let v = plane.get(x, y);
            if v <= 0.0 {
                continue;
            }
            let mut theta = orientation_angle(orient.get(x, y), k_count);
            if direction == NmsDirection::CarrierPlus90 {
                theta += std::f64::consts::FRAC_PI_2;
            }
            let (forward, backward) = match interpolation {
                NmsInterpolation::Nearest => {
                    let (dx, dy) = compass_offsets(theta);
                    (
                        plane.get_mirror(x as i64 + dx, y as i64 + dy),
                        plane.get_mirror(x as i64 - dx, y as i64 - dy),
                    )
                }
                NmsInterpolation::Linear => {
                    let (sin_t, cos_t) = theta.sin_cos();
                    (
                        bilinear_mirror(plane, x as f64 + cos_t, y as f64 + sin_t),
                        bilinear_mirror(plane, x as f64 - cos_t, y as f64 - sin_t),
                    )
                }
            };
            // strict forward, lenient backward: one survivor per plateau
            if v > forward && v >= backward {
                out.set(x, y, v);
            }
        }
    }
    Ok(out)
}

/// Percentile thresholds over all pixels of the equalized ESM. Values are
/// sorted ascending and the 1-indexed rank `floor(beta * M * N)` is picked
/// (clamped up to rank 1).
pub fn percentile_thresholds(
    xi_tilde: &EqualizedEsm,
    beta_low: f64,
    beta_up: f64,
) -> Result<(f64, f64)> {
    if !(beta_low > 0.0 && beta_low < beta_up && beta_up < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < beta_low < beta_up < 1, got {beta_low}, {beta_up}"
        )));
    }
    let mut values: Vec<f64> = xi_tilde.strength.data().to_vec();
    if values.is_empty() {
        return Err(Error::EmptyInput("cannot take percentiles of an empty map".into()));
    }
    values.sort_unstable_by(f64::total_cmp);
    let total = values.len();
    let pick = |beta: f64| {
        let rank = ((beta * total as f64).floor() as usize).clamp(1, total);
        values[rank - 1]
    };
    Ok((pick(beta_low), pick(beta_up)))
}

/// Hysteresis edge decision on a thinned response: values above `t_up` are
/// strong edges, values in `(t_low, t_up]` join when a path of candidates
/// links them to a strong pixel under the chosen connectivity.
pub fn hysteresis(
    thinned: &Plane,
    t_low: f64,
    t_up: f64,
    connectivity: Connectivity,
) -> Result<EdgeMap> {
    if t_low > t_up {
        return Err(Error::InvalidParameter(format!(
            "need t_low <= t_up, got {t_low} > {t_up}"
        )));
    }
    let (w, h) = thinned.dims();
    let mut edges = EdgeMap::empty(w, h);
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if thinned.get(x, y) > t_up && !edges.get(x, y) {
                edges.set(x, y, true);
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for &(dx, dy) in connectivity.offsets() {
                        let nx = cx as i64 + dx;
                        let ny = cy as i64 + dy;
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if !edges.get(nx, ny) && thinned.get(nx, ny) > t_low {
                            edges.set(nx, ny, true);
                            stack.push((nx, ny));
                        }
                    }
                }
            }
        }
    }
    Ok(edges)
}

/// Everything threshold-independent about one input image: the equalized
/// fused ESM, the fused orientation map, and the thinned response.
#[derive(Debug, Clone)]
pub struct PreparedImage {
    pub equalized: EqualizedEsm,
    pub orientation: OrientationMap,
    pub thinned: Plane,
}

impl PreparedImage {
    /// Apply a percentile pair and hysteresis to the prepared stages.
    pub fn finalize(
        &self,
        beta_low: f64,
        beta_up: f64,
        connectivity: Connectivity,
    ) -> Result<EdgeMap> {
        if self.equalized.degenerate {
            let (w, h) = self.equalized.dims();
            return Ok(EdgeMap::empty(w, h));
        }
        let (t_low, t_up) = percentile_thresholds(&self.equalized, beta_low, beta_up)?;
        hysteresis(&self.thinned, t_low, t_up, connectivity)
    }
}

/// Run the threshold-independent stages of the detector.
pub fn prepare(img: &RgbImage, cfg: &DetectorConfig) -> Result<PreparedImage> {
    cfg.validate()?;
    let lab = if cfg.srgb_gamma {
        rgb_to_lab_linearized(img)
    } else {
        rgb_to_lab(img)
    };
    let channels: Vec<&Plane> = match cfg.channels {
        ChannelSet::All => vec![&lab.l, &lab.a, &lab.b],
        ChannelSet::Luminance => vec![&lab.l],
    };
    let bank = build_bank(&cfg.gabor)?;

    let mut sets = Vec::with_capacity(channels.len() * bank.scales());
    for channel in &channels {
        for scale in 0..bank.scales() {
            sets.push(OrientedMagnitudes::compute(
                channel,
                bank.kernels_at_scale(scale),
            )?);
        }
    }
    let esms: Vec<_> = sets.iter().map(|s| s.reduce_max().0).collect();
    let fused = fuse(&esms)?;
    let orientation = fused_orientation(&sets)?;
    let equalized = contrast_equalize(&fused, cfg.window)?;
    let thinned = nms(
        &equalized,
        &orientation,
        cfg.nms_direction,
        cfg.nms_interpolation,
    )?;
    Ok(PreparedImage {
        equalized,
        orientation,
        thinned,
    })
}

/// The complete detector: [`prepare`] followed by the configured
/// percentile thresholds and hysteresis.
pub fn detect_edges(img: &RgbImage, cfg: &DetectorConfig) -> Result<EdgeMap> {
    prepare(img, cfg)?.finalize(cfg.beta_low, cfg.beta_up, cfg.connectivity)
}
