//! sRGB → CIE XYZ → CIE L*a*b* conversion.
//!
//! 8-bit channels are normalized to `[0, 1]`, mapped through a fixed 3x3
//! matrix to XYZ, and scaled by 100 so the D65-style reference white
//! (X0 = 95.047, Y0 = 100, Z0 = 108.883) applies as-is. No gamma
//! linearization is applied by default; the matrix acts directly on the
//! normalized channels. [`rgb_to_lab_linearized`] is the opt-in variant
//! that first undoes the IEC 61966-2-1 transfer curve.
//!
//! All conversions run in double precision and preserve dimensions.

use crate::error::{Error, Result};
use crate::image::{LabImage, Plane, RgbImage, XyzImage};

/// RGB→XYZ matrix, rows X/Y/Z. Note the rows sum to ≈0.95/1.00/1.09, so
/// sRGB white lands almost exactly on the reference white below.
pub const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124, 0.3575, 0.1804],
    [0.2128, 0.7152, 0.0722],
    [0.0193, 0.1192, 0.9502],
];

/// Reference white (X0, Y0, Z0) on the 0-100 scale.
pub const REFERENCE_WHITE: [f64; 3] = [95.047, 100.0, 108.883];

/// Knee of the L*a*b* nonlinearity.
pub const LAB_KNEE: f64 = 0.008856;

/// The cube-root nonlinearity used by the Lab transform: `t^(1/3)` above
/// the knee, the linear ramp `7.787 t + 4/29` at and below it.
///
/// Negative inputs are outside the domain.
pub fn lab_nonlinearity(t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Domain(format!(
            "lab nonlinearity input must be nonnegative, got {t}"
        )));
    }
    Ok(lab_f(t))
}

#[inline]
fn lab_f(t: f64) -> f64 {
    if t > LAB_KNEE {
        t.cbrt()
    } else {
        7.787 * t + 4.0 / 29.0
    }
}

/// XYZ (0-100 scale) of one pixel from normalized `[0, 1]` channels.
#[inline]
pub fn xyz_from_normalized_rgb(r: f64, g: f64, b: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (row, o) in RGB_TO_XYZ.iter().zip(out.iter_mut()) {
        *o = 100.0 * (row[0] * r + row[1] * g + row[2] * b);
    }
    out
}

/// L*a*b* of one pixel from XYZ on the 0-100 scale.
#[inline]
pub fn lab_from_xyz(x: f64, y: f64, z: f64) -> [f64; 3] {
    let fx = lab_f(x / REFERENCE_WHITE[0]);
    let fy = lab_f(y / REFERENCE_WHITE[1]);
    let fz = lab_f(z / REFERENCE_WHITE[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// IEC 61966-2-1 transfer curve removal for one normalized channel.
#[inline]
pub fn srgb_linearize(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn convert_to_xyz(img: &RgbImage, linearize: bool) -> XyzImage {
    let (w, h) = img.dims();
    let mut x = Plane::zeros(w, h);
    let mut y = Plane::zeros(w, h);
    let mut z = Plane::zeros(w, h);
    for py in 0..h {
        for px in 0..w {
            let [r, g, b] = img.pixel(px, py);
            let mut rn = f64::from(r) / 255.0;
            let mut gn = f64::from(g) / 255.0;
            let mut bn = f64::from(b) / 255.0;
            if linearize {
                rn = srgb_linearize(rn);
                gn = srgb_linearize(gn);
                bn = srgb_linearize(bn);
            }
            let [xv, yv, zv] = xyz_from_normalized_rgb(rn, gn, bn);
            x.set(px, py, xv);
            y.set(px, py, yv);
            z.set(px, py, zv);
        }
    }
    XyzImage { x, y, z }
}

/// Per-pixel matrix map from 8-bit sRGB to XYZ on the 0-100 scale.
pub fn srgb_to_xyz(img: &RgbImage) -> XyzImage {
    convert_to_xyz(img, false)
}

/// XYZ → L*a*b* using the reference white above.
pub fn xyz_to_lab(img: &XyzImage) -> LabImage {
    let (w, h) = img.dims();
    let mut l = Plane::zeros(w, h);
    let mut a = Plane::zeros(w, h);
    let mut b = Plane::zeros(w, h);
    for py in 0..h {
        for px in 0..w {
            let [lv, av, bv] = lab_from_xyz(
                img.x.get(px, py),
                img.y.get(px, py),
                img.z.get(px, py),
            );
            l.set(px, py, lv);
            a.set(px, py, av);
            b.set(px, py, bv);
        }
    }
    LabImage { l, a, b }
}

/// Full sRGB → L*a*b* conversion (via XYZ).
pub fn rgb_to_lab(img: &RgbImage) -> LabImage {
    xyz_to_lab(&srgb_to_xyz(img))
}

/// Like [`rgb_to_lab`] but with IEC 61966-2-1 linearization first.
pub fn rgb_to_lab_linearized(img: &RgbImage) -> LabImage {
    xyz_to_lab(&convert_to_xyz(img, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_pixel(rgb: [u8; 3]) -> RgbImage {
        RgbImage::new(1, 1, rgb.to_vec()).unwrap()
    }

    #[test]
    fn nonlinearity_anchors() {
        assert_abs_diff_eq!(lab_nonlinearity(0.0).unwrap(), 4.0 / 29.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lab_nonlinearity(1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert!(lab_nonlinearity(-0.1).is_err());
    }

    #[test]
    fn nonlinearity_knee_continuity() {
        // both branches evaluated at the knee itself
        let cube = LAB_KNEE.cbrt();
        let linear = 7.787 * LAB_KNEE + 4.0 / 29.0;
        assert!((cube - linear).abs() < 2e-4, "gap {}", (cube - linear).abs());
        assert_abs_diff_eq!(lab_nonlinearity(LAB_KNEE).unwrap(), 0.20690, epsilon = 2e-4);
    }

    #[test]
    fn nonlinearity_monotone_on_sweep() {
        let mut prev = f64::MIN;
        for i in 0..=1200 {
            let t = i as f64 * 0.001;
            let v = lab_nonlinearity(t).unwrap();
            assert!(v >= prev, "not monotone at t={t}");
            prev = v;
        }
    }

    #[test]
    fn xyz_anchors() {
        let black = srgb_to_xyz(&one_pixel([0, 0, 0]));
        assert_eq!(black.x.get(0, 0), 0.0);
        assert_eq!(black.y.get(0, 0), 0.0);
        assert_eq!(black.z.get(0, 0), 0.0);

        // white: matrix row sums x 100
        let white = srgb_to_xyz(&one_pixel([255, 255, 255]));
        assert_abs_diff_eq!(white.x.get(0, 0), 95.03, epsilon = 0.01);
        assert_abs_diff_eq!(white.y.get(0, 0), 100.02, epsilon = 0.01);
        assert_abs_diff_eq!(white.z.get(0, 0), 108.87, epsilon = 0.01);

        // pure red: first matrix column x 100
        let red = srgb_to_xyz(&one_pixel([255, 0, 0]));
        assert_abs_diff_eq!(red.x.get(0, 0), 41.24, epsilon = 0.01);
        assert_abs_diff_eq!(red.y.get(0, 0), 21.28, epsilon = 0.01);
        assert_abs_diff_eq!(red.z.get(0, 0), 1.93, epsilon = 0.01);
    }

    #[test]
    fn lab_anchors() {
        let black = xyz_to_lab(&XyzImage {
            x: Plane::zeros(1, 1),
            y: Plane::zeros(1, 1),
            z: Plane::zeros(1, 1),
        });
        // 116*(4/29) - 16 = 0 exactly
        assert_abs_diff_eq!(black.l.get(0, 0), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(black.a.get(0, 0), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(black.b.get(0, 0), 0.0, epsilon = 1e-9);

        let white = xyz_to_lab(&XyzImage {
            x: Plane::filled(1, 1, REFERENCE_WHITE[0]),
            y: Plane::filled(1, 1, REFERENCE_WHITE[1]),
            z: Plane::filled(1, 1, REFERENCE_WHITE[2]),
        });
        assert_abs_diff_eq!(white.l.get(0, 0), 100.0, epsilon = 1e-6);
        assert_abs_diff_eq!(white.a.get(0, 0), 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(white.b.get(0, 0), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn mid_gray_is_near_neutral() {
        let lab = rgb_to_lab(&one_pixel([128, 128, 128]));
        assert!(lab.a.get(0, 0).abs() < 0.5);
        assert!(lab.b.get(0, 0).abs() < 0.5);
    }

    #[test]
    fn rgb_to_lab_anchors() {
        let black = rgb_to_lab(&one_pixel([0, 0, 0]));
        assert_abs_diff_eq!(black.l.get(0, 0), 0.0, epsilon = 1e-9);

        let white = rgb_to_lab(&one_pixel([255, 255, 255]));
        assert_abs_diff_eq!(white.l.get(0, 0), 100.0, epsilon = 0.1);
    }

    #[test]
    fn gray_ramp_lightness_strictly_increases() {
        let mut prev = f64::MIN;
        for v in 0..=255u8 {
            let lab = rgb_to_lab(&one_pixel([v, v, v]));
            let l = lab.l.get(0, 0);
            assert!(l > prev, "L* not strictly increasing at gray {v}");
            prev = l;
        }
    }

    #[test]
    fn grays_are_near_neutral() {
        for v in (0..=255u8).step_by(17) {
            let lab = rgb_to_lab(&one_pixel([v, v, v]));
            assert!(lab.a.get(0, 0).abs() < 0.5, "a* off at gray {v}");
            assert!(lab.b.get(0, 0).abs() < 0.5, "b* off at gray {v}");
        }
    }

    #[test]
    fn matrix_map_is_linear() {
        // scaling normalized channels scales XYZ
        let base = [0.32, 0.55, 0.18];
        let full = xyz_from_normalized_rgb(base[0], base[1], base[2]);
        for &a in &[0.0, 0.25, 0.5, 0.77, 1.0] {
            let scaled = xyz_from_normalized_rgb(a * base[0], a * base[1], a * base[2]);
            for c in 0..3 {
                assert_abs_diff_eq!(scaled[c], a * full[c], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn dimensions_preserved() {
        let img = RgbImage::filled(5, 3, [10, 200, 30]);
        let xyz = srgb_to_xyz(&img);
        assert_eq!(xyz.dims(), (5, 3));
        let lab = xyz_to_lab(&xyz);
        assert_eq!(lab.dims(), (5, 3));
    }

    #[test]
    fn xyz_stays_nonnegative() {
        for rgb in [[0, 0, 0], [255, 0, 0], [0, 255, 0], [0, 0, 255], [7, 250, 13]] {
            let xyz = srgb_to_xyz(&one_pixel(rgb));
            assert!(xyz.x.get(0, 0) >= 0.0);
            assert!(xyz.y.get(0, 0) >= 0.0);
            assert!(xyz.z.get(0, 0) >= 0.0);
        }
    }

    #[test]
    fn linearized_variant_differs_but_keeps_anchors() {
        let mid = rgb_to_lab_linearized(&one_pixel([128, 128, 128]));
        let plain = rgb_to_lab(&one_pixel([128, 128, 128]));
        assert!(mid.l.get(0, 0) < plain.l.get(0, 0));
        let white = rgb_to_lab_linearized(&one_pixel([255, 255, 255]));
        assert_abs_diff_eq!(white.l.get(0, 0), 100.0, epsilon = 0.1);
    }
}
