//! Edge strength maps: per-channel orientation maxima, geometric-mean
//! fusion, and contrast equalization.
//!
//! For one channel and one scale the ESM is the per-pixel maximum of the
//! Gabor magnitude over all K orientations. The fused ESM is the per-pixel
//! geometric mean of all (channel, scale) ESMs; a zero in any input
//! annihilates the product, which is intentional (no edge energy there
//! means no fused edge energy). Contrast equalization divides by a blend
//! of the global and local mean strength, which makes everything
//! downstream invariant to uniform positive scaling of the input.

use crate::error::{Error, Result};
use crate::gabor::{convolve, magnitude, GaborKernel};
use crate::image::Plane;

/// Per-pixel edge strength, nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct EsmMap {
    pub strength: Plane,
}

impl EsmMap {
    pub fn dims(&self) -> (usize, usize) {
        self.strength.dims()
    }
}

/// Winning orientation index per pixel, entries in `[0, K)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientationMap {
    width: usize,
    height: usize,
    orientations: usize,
    k_star: Vec<u16>,
}

impl OrientationMap {
    pub fn new(width: usize, height: usize, orientations: usize, k_star: Vec<u16>) -> Result<Self> {
        if k_star.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "orientation data length {} != {}x{}",
                k_star.len(),
                width,
                height
            )));
        }
        if k_star.iter().any(|&k| usize::from(k) >= orientations) {
            return Err(Error::InvalidParameter(
                "orientation index out of range".into(),
            ));
        }
        Ok(OrientationMap {
            width,
            height,
            orientations,
            k_star,
        })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> usize {
        usize::from(self.k_star[y * self.width + x])
    }

    #[inline]
    pub fn orientations(&self) -> usize {
        self.orientations
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

/// Contrast-equalized fused ESM plus the statistics that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedEsm {
    pub strength: Plane,
    /// Global mean strength of the input ESM.
    pub global_mean: f64,
    /// Window size used for the local mean.
    pub window: usize,
    /// Set when the input ESM was identically zero and the 0/0 convention
    /// (output zero) was applied.
    pub degenerate: bool,
}

impl EqualizedEsm {
    pub fn dims(&self) -> (usize, usize) {
        self.strength.dims()
    }
}

/// Magnitude planes of one (channel, scale) pair, indexed by orientation.
#[derive(Debug, Clone)]
pub struct OrientedMagnitudes {
    planes: Vec<Plane>,
}

impl OrientedMagnitudes {
    pub fn new(planes: Vec<Plane>) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::EmptyInput("need at least one orientation plane".into()))?;
        if let Some(p) = planes.iter().find(|p| !p.same_dims(first)) {
            return Err(Error::dims(first.dims(), p.dims()));
        }
        Ok(OrientedMagnitudes { planes })
    }

    /// Convolve `channel` with each kernel and keep the magnitudes. All
    /// kernels must come from the same scale of one bank.
    pub fn compute(channel: &Plane, kernels_at_scale: &[GaborKernel]) -> Result<Self> {
        if kernels_at_scale.is_empty() {
            return Err(Error::EmptyInput("no kernels for this scale".into()));
        }
        let scale = kernels_at_scale[0].scale_index();
        if kernels_at_scale.iter().any(|k| k.scale_index() != scale) {
            return Err(Error::InvalidParameter(
                "kernels passed to a per-scale ESM must share one scale".into(),
            ));
        }
        let planes = kernels_at_scale
            .iter()
            .map(|k| magnitude(&convolve(channel, k)))
            .collect();
        Ok(OrientedMagnitudes { planes })
    }

    #[inline]
    pub fn orientations(&self) -> usize {
        self.planes.len()
    }

    pub fn plane(&self, k: usize) -> &Plane {
        &self.planes[k]
    }

    pub fn dims(&self) -> (usize, usize) {
        self.planes[0].dims()
    }

    /// Per-pixel max over orientations and the argmax index (smallest
    /// index wins ties).
    pub fn reduce_max(&self) -> (EsmMap, OrientationMap) {
        let (w, h) = self.dims();
        let mut strength = Plane::zeros(w, h);
        let mut k_star = vec![0u16; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut best = self.planes[0].get(x, y);
                let mut best_k = 0u16;
                for (k, plane) in self.planes.iter().enumerate().skip(1) {
                    let v = plane.get(x, y);
                    if v > best {
                        best = v;
                        best_k = k as u16;
                    }
                }
                strength.set(x, y, best);
                k_star[y * w + x] = best_k;
            }
        }
        let orient = OrientationMap {
            width: w,
            height: h,
            orientations: self.orientations(),
            k_star,
        };
        (EsmMap { strength }, orient)
    }
}

/// ESM of one channel at one scale: max magnitude over the K orientations.
pub fn channel_esm(
    channel: &Plane,
    kernels_at_scale: &[GaborKernel],
) -> Result<(EsmMap, OrientationMap)> {
    Ok(OrientedMagnitudes::compute(channel, kernels_at_scale)?.reduce_max())
}

/// Per-pixel geometric mean of `n` ESMs.
pub fn fuse(esms: &[EsmMap]) -> Result<EsmMap> {
    let first = esms
        .first()
        .ok_or_else(|| Error::EmptyInput("fuse needs at least one ESM".into()))?;
    let (w, h) = first.dims();
    for e in esms {
        if e.dims() != (w, h) {
            return Err(Error::dims((w, h), e.dims()));
        }
    }
    let inv_n = 1.0 / esms.len() as f64;
    let mut strength = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut product = 1.0f64;
            for e in esms {
                product *= e.strength.get(x, y);
            }
            strength.set(x, y, product.powf(inv_n));
        }
    }
    Ok(EsmMap { strength })
}

/// Mean strength over all pixels. Accumulation order is fixed row-major so
/// the result is bit-reproducible.
pub fn global_mean(esm: &EsmMap) -> f64 {
    let (w, h) = esm.dims();
    let mut sum = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            sum += esm.strength.get(x, y);
        }
    }
    sum / (w * h) as f64
}

/// Per-pixel mean over a WxW window centered at each pixel, mirror-padded.
pub fn local_mean(esm: &EsmMap, window: usize) -> Result<Plane> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "window must be odd and >= 3, got {window}"
        )));
    }
    let (w, h) = esm.dims();
    let half = (window / 2) as i64;
    let norm = 1.0 / (window * window) as f64;
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0.0f64;
            for dy in -half..=half {
                for dx in -half..=half {
                    sum += esm.strength.get_mirror(x as i64 + dx, y as i64 + dy);
                }
            }
            out.set(x, y, sum * norm);
        }
    }
    Ok(out)
}

/// Contrast equalization: divide each pixel by the blend of global and
/// local mean strength. An identically-zero ESM yields an all-zero map
/// with `degenerate` set.
pub fn contrast_equalize(esm: &EsmMap, window: usize) -> Result<EqualizedEsm> {
    let mean = global_mean(esm);
    let (w, h) = esm.dims();
    if mean == 0.0 {
        return Ok(EqualizedEsm {
            strength: Plane::zeros(w, h),
            global_mean: 0.0,
            window,
            degenerate: true,
        });
    }
    let local = local_mean(esm, window)?;
    let mut strength = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let denom = mean + 0.5 * local.get(x, y);
            strength.set(x, y, esm.strength.get(x, y) / denom);
        }
    }
    Ok(EqualizedEsm {
        strength,
        global_mean: mean,
        window,
        degenerate: false,
    })
}

/// Orientation map for the fused ESM: per pixel, the orientation whose
/// magnitude summed over every (channel, scale) pair is largest, smallest
/// index on ties. With a single input set this reduces to that set's own
/// argmax.
pub fn fused_orientation(sets: &[OrientedMagnitudes]) -> Result<OrientationMap> {
    let first = sets
        .first()
        .ok_or_else(|| Error::EmptyInput("fused orientation needs at least one set".into()))?;
    let (w, h) = first.dims();
    let orientations = first.orientations();
    for s in sets {
        if s.dims() != (w, h) {
            return Err(Error::dims((w, h), s.dims()));
        }
        if s.orientations() != orientations {
            return Err(Error::InvalidParameter(
                "all magnitude sets must share the orientation count".into(),
            ));
        }
    }
    let mut k_star = vec![0u16; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut best = f64::MIN;
            let mut best_k = 0u16;
            for k in 0..orientations {
                let mut total = 0.0f64;
                for s in sets {
                    total += s.plane(k).get(x, y);
                }
                if total > best {
                    best = total;
                    best_k = k as u16;
                }
            }
            k_star[y * w + x] = best_k;
        }
    }
    Ok(OrientationMap {
        width: w,
        height: h,
        orientations,
        k_star,
    })
}
