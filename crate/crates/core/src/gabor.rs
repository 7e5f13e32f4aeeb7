//! Complex Gabor kernels, the multi-scale multi-orientation bank, and the
//! spatial convolution that produces magnitude responses.
//!
//! A kernel with center frequency `f`, orientation `theta`, and sharpness
//! `(gamma, eta)` samples
//!
//! ```text
//! g(u, v) = f^2/(pi*gamma*eta)
//!           * exp(-(f^2/gamma^2 * u'^2 + f^2/eta^2 * v'^2))
//!           * exp(j*2*pi*f*u')
//! u' =  u*cos(theta) + v*sin(theta)
//! v' = -u*sin(theta) + v*cos(theta)
//! ```
//!
//! at integer offsets `(u, v)`. The infinite support is truncated where the
//! Gaussian envelope falls below `exp(-truncation^2/2)`, i.e. at
//! `half_width = ceil(truncation * max(gamma, eta) / (f * sqrt(2)))`, which
//! loses under 1.2% of the envelope mass at the default `truncation = 3`.
//!
//! The bank holds one kernel per (scale, orientation) pair with orientations
//! `theta_k = pi*k/K`. Scale is purely an index into the frequency list: a
//! low center frequency means a wide, noise-robust kernel, a high one a
//! narrow kernel with better localization.
//!
//! Convolution is direct (spatial) with symmetric mirror padding; an FFT
//! path would only pay off far above the image and kernel sizes used here.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{mirror_index, Plane};

/// Hard cap on kernel half-width; frequencies low enough to exceed it are
/// rejected rather than silently producing megabyte kernels.
pub const MAX_HALF_WIDTH: usize = 256;

fn default_gamma() -> f64 {
    1.0
}
fn default_eta() -> f64 {
    2.0
}
fn default_frequencies() -> Vec<f64> {
    vec![0.1, 0.2]
}
fn default_orientations() -> usize {
    8
}
fn default_truncation() -> f64 {
    3.0
}

/// Bank parameters. Serializes to/from the JSON block
/// `{"gamma", "eta", "frequencies", "orientations", "truncation"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaborParams {
    /// Envelope sharpness along the rotated x-axis.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Envelope sharpness along the rotated y-axis.
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Center frequencies in cycles/pixel, one per scale, strictly increasing.
    #[serde(default = "default_frequencies")]
    pub frequencies: Vec<f64>,
    /// Number of orientations K; theta_k = pi*k/K.
    #[serde(default = "default_orientations")]
    pub orientations: usize,
    /// Envelope truncation radius in units of the Gaussian sigma.
    #[serde(default = "default_truncation")]
    pub truncation: f64,
}

impl Default for GaborParams {
    fn default() -> Self {
        GaborParams {
            gamma: default_gamma(),
            eta: default_eta(),
            frequencies: default_frequencies(),
            orientations: default_orientations(),
            truncation: default_truncation(),
        }
    }
}

impl GaborParams {
    /// Check every invariant, reporting problems under `prefix`-qualified
    /// field paths.
    pub fn validate_at(&self, prefix: &str) -> Vec<String> {
        let mut errs = Vec::new();
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.gamma) {
            errs.push(format!("{prefix}gamma: must be > 0, got {}", self.gamma));
        }
        if !positive(self.eta) {
            errs.push(format!("{prefix}eta: must be > 0, got {}", self.eta));
        }
        if self.frequencies.is_empty() {
            errs.push(format!("{prefix}frequencies: must not be empty"));
        }
        for (i, f) in self.frequencies.iter().enumerate() {
            if !positive(*f) {
                errs.push(format!("{prefix}frequencies[{i}]: must be > 0, got {f}"));
            }
        }
        for pair in self.frequencies.windows(2) {
            if pair[0] >= pair[1] {
                errs.push(format!(
                    "{prefix}frequencies: must be strictly increasing ({} >= {})",
                    pair[0], pair[1]
                ));
                break;
            }
        }
        if self.orientations == 0 {
            errs.push(format!("{prefix}orientations: must be >= 1"));
        }
        if !positive(self.truncation) {
            errs.push(format!(
                "{prefix}truncation: must be > 0, got {}",
                self.truncation
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

    /// Number of scales S.
    pub fn scales(&self) -> usize {
        self.frequencies.len()
    }
}

/// Truncation radius in integer taps for the given parameters.
fn half_width_for(f: f64, gamma: f64, eta: f64, truncation: f64) -> usize {
    (truncation * gamma.max(eta) / (f * std::f64::consts::SQRT_2)).ceil() as usize
}

/// One discretized complex kernel of the bank.
#[derive(Debug, Clone)]
pub struct GaborKernel {
    taps: Vec<Complex64>,
    half_width: usize,
    scale_index: usize,
    orientation_index: usize,
}

impl GaborKernel {
    #[inline]
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Side length of the square tap grid (odd: `2*half_width + 1`).
    #[inline]
    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    #[inline]
    pub fn scale_index(&self) -> usize {
        self.scale_index
    }

    #[inline]
    pub fn orientation_index(&self) -> usize {
        self.orientation_index
    }

    /// Tap at offset `(u, v)` from the center, `|u|, |v| <= half_width`.
    #[inline]
    pub fn tap(&self, u: i64, v: i64) -> Complex64 {
        let hw = self.half_width as i64;
        debug_assert!(u.abs() <= hw && v.abs() <= hw);
        self.taps[((v + hw) as usize) * self.side() + (u + hw) as usize]
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }
}

/// Build one kernel. Fails on nonpositive `f`, `gamma`, or `eta`, and on
/// frequencies so low the truncated support would exceed [`MAX_HALF_WIDTH`].
pub fn build_kernel(
    f: f64,
    theta: f64,
    gamma: f64,
    eta: f64,
    truncation: f64,
) -> Result<GaborKernel> {
    build_kernel_indexed(f, theta, gamma, eta, truncation, 0, 0)
}

fn build_kernel_indexed(
    f: f64,
    theta: f64,
    gamma: f64,
    eta: f64,
    truncation: f64,
    scale_index: usize,
    orientation_index: usize,
) -> Result<GaborKernel> {
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(f) {
        return Err(Error::InvalidParameter(format!(
            "kernel frequency must be > 0, got {f}"
        )));
    }
    if !positive(gamma) || !positive(eta) {
        return Err(Error::InvalidParameter(format!(
            "kernel sharpness must be > 0, got gamma={gamma} eta={eta}"
        )));
    }
    let half_width = half_width_for(f, gamma, eta, truncation);
    if half_width > MAX_HALF_WIDTH {
        return Err(Error::InvalidParameter(format!(
            "kernel half-width {half_width} exceeds cap {MAX_HALF_WIDTH} (f={f} too small)"
        )));
    }
    let side = 2 * half_width + 1;
    let amplitude = f * f / (std::f64::consts::PI * gamma * eta);
    let au = (f / gamma) * (f / gamma);
    let av = (f / eta) * (f / eta);
    let (sin_t, cos_t) = theta.sin_cos();
    let hw = half_width as i64;
    let mut taps = Vec::with_capacity(side * side);
    for v in -hw..=hw {
        for u in -hw..=hw {
            let uf = u as f64;
            let vf = v as f64;
            let up = uf * cos_t + vf * sin_t;
            let vp = -uf * sin_t + vf * cos_t;
            let envelope = amplitude * (-(au * up * up + av * vp * vp)).exp();
            let phase = 2.0 * std::f64::consts::PI * f * up;
            taps.push(Complex64::new(envelope * phase.cos(), envelope * phase.sin()));
        }
    }
    Ok(GaborKernel {
        taps,
        half_width,
        scale_index,
        orientation_index,
    })
}

/// The full bank: one kernel per (scale, orientation) pair, scale-major.
#[derive(Debug, Clone)]
pub struct GaborBank {
    kernels: Vec<GaborKernel>,
    scales: usize,
    orientations: usize,
}

impl GaborBank {
    #[inline]
    pub fn scales(&self) -> usize {
        self.scales
    }

    #[inline]
    pub fn orientations(&self) -> usize {
        self.orientations
    }

    #[inline]
    pub fn at(&self, scale: usize, orientation: usize) -> &GaborKernel {
        &self.kernels[scale * self.orientations + orientation]
    }

    /// All kernels of one scale, ordered by orientation index.
    pub fn kernels_at_scale(&self, scale: usize) -> &[GaborKernel] {
        let k = self.orientations;
        &self.kernels[scale * k..(scale + 1) * k]
    }

    pub fn kernels(&self) -> &[GaborKernel] {
        &self.kernels
    }
}

/// Orientation angle for index `k` out of `K`: `pi*k/K`.
#[inline]
pub fn orientation_angle(k: usize, orientations: usize) -> f64 {
    std::f64::consts::PI * k as f64 / orientations as f64
}

/// Build the whole bank from validated parameters.
pub fn build_bank(params: &GaborParams) -> Result<GaborBank> {
    params.validate()?;
    let mut kernels = Vec::with_capacity(params.scales() * params.orientations);
    for (scale, &f) in params.frequencies.iter().enumerate() {
        for k in 0..params.orientations {
            let theta = orientation_angle(k, params.orientations);
            kernels.push(build_kernel_indexed(
                f,
                theta,
                params.gamma,
                params.eta,
                params.truncation,
                scale,
                k,
            )?);
        }
    }
    Ok(GaborBank {
        kernels,
        scales: params.scales(),
        orientations: params.orientations,
    })
}

/// Per-pixel complex response of one kernel over one channel.
#[derive(Debug, Clone)]
pub struct ResponseMap {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

impl ResponseMap {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.data[y * self.width + x]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn from_data(width: usize, height: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "response data length {} != {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(ResponseMap {
            width,
            height,
            data,
        })
    }
}

/// Copy `channel` into a buffer grown by `pad` on every side using symmetric
/// mirror extension, so the convolution inner loop never branches on bounds.
fn pad_mirror(channel: &Plane, pad: usize) -> Plane {
    let (w, h) = channel.dims();
    let pw = w + 2 * pad;
    let ph = h + 2 * pad;
    let mut out = Plane::zeros(pw, ph);
    for y in 0..ph {
        let sy = mirror_index(y as i64 - pad as i64, h);
        for x in 0..pw {
            let sx = mirror_index(x as i64 - pad as i64, w);
            out.set(x, y, channel.get(sx, sy));
        }
    }
    out
}

/// Discrete 2-D convolution (true convolution, kernel flipped) with
/// symmetric mirror padding. Output dimensions equal input dimensions.
pub fn convolve(channel: &Plane, kernel: &GaborKernel) -> ResponseMap {
    let (w, h) = channel.dims();
    assert!(w > 0 && h > 0, "convolve needs a nonempty channel");
    let hw = kernel.half_width();
    let side = kernel.side();

    // Flip once: out(x,y) = sum_{a,b} in(x+a, y+b) * k(-a, -b), which turns
    // the inner loops into forward slice walks over the padded input.
    let mut flipped_re = vec![0.0f64; side * side];
    let mut flipped_im = vec![0.0f64; side * side];
    let ihw = hw as i64;
    for b in -ihw..=ihw {
        for a in -ihw..=ihw {
            let t = kernel.tap(-a, -b);
            let idx = ((b + ihw) as usize) * side + (a + ihw) as usize;
            flipped_re[idx] = t.re;
            flipped_im[idx] = t.im;
        }
    }

    let padded = pad_mirror(channel, hw);
    let pw = padded.width();
    let pdata = padded.data();

    let mut data = vec![Complex64::new(0.0, 0.0); w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(y, out_row)| {
        for (x, out) in out_row.iter_mut().enumerate() {
            let mut acc_re = 0.0f64;
            let mut acc_im = 0.0f64;
            for b in 0..side {
                let row_start = (y + b) * pw + x;
                let input = &pdata[row_start..row_start + side];
                let kre = &flipped_re[b * side..(b + 1) * side];
                let kim = &flipped_im[b * side..(b + 1) * side];
                let mut re = 0.0f64;
                let mut im = 0.0f64;
                for i in 0..side {
                    re += input[i] * kre[i];
                    im += input[i] * kim[i];
                }
                acc_re += re;
                acc_im += im;
            }
            *out = Complex64::new(acc_re, acc_im);
        }
    });

    ResponseMap {
        width: w,
        height: h,
        data,
    }
}

/// Per-pixel complex modulus of a response map.
pub fn magnitude(resp: &ResponseMap) -> Plane {
    let data = resp.data.iter().map(|c| c.norm()).collect();
    Plane::new(resp.width, resp.height, data).expect("dimensions come from the response map")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn center_tap_matches_closed_form() {
        for &(f, gamma, eta) in &[(0.1, 1.0, 2.0), (0.3, 1.3, 2.5), (0.5, 2.0, 1.0)] {
            let k = build_kernel(f, 0.7, gamma, eta, 3.0).unwrap();
            let c = k.tap(0, 0);
            assert_abs_diff_eq!(
                c.re,
                f * f / (std::f64::consts::PI * gamma * eta),
                epsilon = 1e-15
            );
            assert_eq!(c.im, 0.0);
        }
    }

    #[test]
    fn center_tap_grows_with_frequency() {
        let mut prev = 0.0;
        for &f in &[0.05, 0.1, 0.2, 0.4, 0.8] {
            let k = build_kernel(f, 0.0, 1.0, 2.0, 3.0).unwrap();
            assert!(k.tap(0, 0).re > prev);
            prev = k.tap(0, 0).re;
        }
    }

    #[test]
    fn imaginary_taps_sum_to_zero() {
        for &theta in &[0.0, 0.3, std::f64::consts::FRAC_PI_2, 2.0] {
            let k = build_kernel(0.25, theta, 1.0, 2.0, 3.0).unwrap();
            let sum: f64 = k.taps().iter().map(|t| t.im).sum();
            assert!(sum.abs() < 1e-9, "theta={theta} sum={sum}");
        }
    }

    #[test]
    fn real_taps_even_symmetric_at_theta_zero() {
        let k = build_kernel(0.2, 0.0, 1.0, 2.0, 3.0).unwrap();
        let hw = k.half_width() as i64;
        for v in -hw..=hw {
            for u in -hw..=hw {
                assert_eq!(k.tap(u, v).re, k.tap(-u, v).re);
                assert_eq!(k.tap(u, v).re, k.tap(u, -v).re);
            }
        }
    }

    #[test]
    fn half_width_formula() {
        // ceil(3 * max(1,2) / (0.1 * sqrt(2))) = ceil(42.43) = 43
        let k = build_kernel(0.1, 0.0, 1.0, 2.0, 3.0).unwrap();
        assert_eq!(k.half_width(), 43);
        let k = build_kernel(0.2, 0.0, 1.0, 2.0, 3.0).unwrap();
        assert_eq!(k.half_width(), 22);
    }

    #[test]
    fn tiny_frequency_is_rejected() {
        let err = build_kernel(1e-4, 0.0, 1.0, 2.0, 3.0);
        assert!(err.is_err());
    }

    #[test]
    fn bank_has_one_kernel_per_scale_orientation_pair() {
        let params = GaborParams::default();
        let bank = build_bank(&params).unwrap();
        assert_eq!(bank.kernels().len(), 16);
        assert_eq!(bank.scales(), 2);
        assert_eq!(bank.orientations(), 8);
        for s in 0..2 {
            for k in 0..8 {
                let kern = bank.at(s, k);
                assert_eq!(kern.scale_index(), s);
                assert_eq!(kern.orientation_index(), k);
            }
        }
    }

    #[test]
    fn single_orientation_bank_is_axis_aligned() {
        let params = GaborParams {
            orientations: 1,
            frequencies: vec![0.2],
            ..GaborParams::default()
        };
        let bank = build_bank(&params).unwrap();
        assert_eq!(orientation_angle(0, 1), 0.0);
        let reference = build_kernel(0.2, 0.0, 1.0, 2.0, 3.0).unwrap();
        for (a, b) in bank.at(0, 0).taps().iter().zip(reference.taps()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn opposite_orientations_are_reflections() {
        // theta and theta + pi: equal real taps, negated imaginary taps
        for &theta in &[0.0, 0.4, 1.1, 2.9] {
            let k0 = build_kernel(0.25, theta, 1.0, 2.0, 3.0).unwrap();
            let k1 = build_kernel(0.25, theta + std::f64::consts::PI, 1.0, 2.0, 3.0).unwrap();
            for (a, b) in k0.taps().iter().zip(k1.taps()) {
                assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
                assert_abs_diff_eq!(a.im, -b.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn params_validation_reports_each_problem() {
        let params = GaborParams {
            gamma: -1.0,
            frequencies: vec![0.2, 0.1],
            orientations: 0,
            ..GaborParams::default()
        };
        let errs = params.validate_at("gabor.");
        assert!(errs.iter().any(|e| e.starts_with("gabor.gamma")));
        assert!(errs.iter().any(|e| e.contains("strictly increasing")));
        assert!(errs.iter().any(|e| e.starts_with("gabor.orientations")));
    }

    #[test]
    fn impulse_reproduces_kernel() {
        let kernel = build_kernel(0.6, 1.0, 0.8, 1.2, 2.5).unwrap();
        let hw = kernel.half_width() as i64;
        assert!(hw <= 4, "test wants a small kernel, got hw={hw}");
        let mut plane = Plane::zeros(9, 9);
        plane.set(4, 4, 1.0);
        let resp = convolve(&plane, &kernel);
        for y in 0..9i64 {
            for x in 0..9i64 {
                let expected = if (x - 4).abs() <= hw && (y - 4).abs() <= hw {
                    kernel.tap(x - 4, y - 4)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let got = resp.get(x as usize, y as usize);
                assert_abs_diff_eq!(got.re, expected.re, epsilon = 1e-12);
                assert_abs_diff_eq!(got.im, expected.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn constant_plane_has_no_imaginary_response() {
        let kernel = build_kernel(0.3, 0.9, 1.0, 2.0, 3.0).unwrap();
        let plane = Plane::filled(12, 10, 7.5);
        let resp = convolve(&plane, &kernel);
        for c in resp.data() {
            assert!(c.im.abs() < 1e-9);
        }
    }

    #[test]
    fn magnitude_basics() {
        let resp = ResponseMap::from_data(
            2,
            1,
            vec![Complex64::new(3.0, 4.0), Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        let mag = magnitude(&resp);
        assert_abs_diff_eq!(mag.get(0, 0), 5.0, epsilon = 1e-15);
        assert_eq!(mag.get(1, 0), 0.0);
    }

    #[test]
    fn magnitude_invariant_to_global_phase() {
        let kernel = build_kernel(0.4, 0.3, 1.0, 1.5, 3.0).unwrap();
        let mut plane = Plane::zeros(8, 8);
        for y in 0..8 {
            for x in 0..8 {
                plane.set(x, y, ((x * 31 + y * 17) % 13) as f64);
            }
        }
        let resp = convolve(&plane, &kernel);
        let rot = Complex64::from_polar(1.0, 1.234);
        let rotated =
            ResponseMap::from_data(8, 8, resp.data().iter().map(|c| c * rot).collect()).unwrap();
        let m0 = magnitude(&resp);
        let m1 = magnitude(&rotated);
        for (a, b) in m0.data().iter().zip(m1.data()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn params_json_round_trip() {
        let params = GaborParams::default();
        let json = serde_json::to_string(&params).unwrap();
        for key in ["gamma", "eta", "frequencies", "orientations", "truncation"] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        let back: GaborParams = serde_json::from_str(&json).unwrap();
        assert_eq!(params, back);
        // partial blocks fill defaults
        let partial: GaborParams = serde_json::from_str(r#"{"orientations": 4}"#).unwrap();
        assert_eq!(partial.orientations, 4);
        assert_eq!(partial.gamma, 1.0);
        assert_eq!(partial.frequencies, vec![0.1, 0.2]);
    }
}
