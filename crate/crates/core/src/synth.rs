//! Synthetic test images with exact ground truth.
//!
//! Every generator builds a label grid first, paints it with a palette, and
//! derives the ground-truth edge map from the labels: a pixel is a GT edge
//! iff its label differs from the pixel to its left or the pixel above.
//! That marks exactly one side of every region boundary, which matches the
//! side the detector's plateau tie rule keeps on clean steps.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::{EdgeMap, RgbImage};

/// Label grid -> ground-truth edges (right/bottom side of each boundary).
pub fn gt_from_labels(labels: &[u8], width: usize, height: usize) -> EdgeMap {
    assert_eq!(labels.len(), width * height);
    let mut gt = EdgeMap::empty(width, height);
    for y in 0..height {
        for x in 0..width {
            let here = labels[y * width + x];
            let differs = (x > 0 && labels[y * width + x - 1] != here)
                || (y > 0 && labels[(y - 1) * width + x] != here);
            if differs {
                gt.set(x, y, true);
            }
        }
    }
    gt
}

/// Paint a label grid with a palette.
pub fn paint_labels(labels: &[u8], width: usize, height: usize, palette: &[[u8; 3]]) -> RgbImage {
    assert_eq!(labels.len(), width * height);
    let mut img = RgbImage::filled(width, height, [0, 0, 0]);
    for y in 0..height {
        for x in 0..width {
            img.set_pixel(x, y, palette[labels[y * width + x] as usize]);
        }
    }
    img
}

fn mix(a: [u8; 3], b: [u8; 3]) -> [u8; 3] {
    [
        ((u16::from(a[0]) + u16::from(b[0])) / 2) as u8,
        ((u16::from(a[1]) + u16::from(b[1])) / 2) as u8,
        ((u16::from(a[2]) + u16::from(b[2])) / 2) as u8,
    ]
}

/// Paint a label grid with the boundary pixels recolored to the average of
/// the two regions they separate, so the true edge line runs through pixel
/// centers. Returns the image and that line as ground truth.
pub fn paint_labels_midline(
    labels: &[u8],
    width: usize,
    height: usize,
    palette: &[[u8; 3]],
) -> (RgbImage, EdgeMap) {
    let gt = gt_from_labels(labels, width, height);
    let mut img = paint_labels(labels, width, height, palette);
    for y in 0..height {
        for x in 0..width {
            if !gt.get(x, y) {
                continue;
            }
            let own = labels[y * width + x];
            let other = if x > 0 && labels[y * width + x - 1] != own {
                labels[y * width + x - 1]
            } else {
                labels[(y - 1) * width + x]
            };
            img.set_pixel(x, y, mix(palette[own as usize], palette[other as usize]));
        }
    }
    (img, gt)
}

fn two_tone_labels(width: usize, height: usize, step_col: usize) -> Vec<u8> {
    assert!(step_col > 0 && step_col < width);
    let mut labels = vec![0u8; width * height];
    for y in 0..height {
        for x in step_col..width {
            labels[y * width + x] = 1;
        }
    }
    labels
}

fn corner_labels(width: usize, height: usize, cx: usize, cy: usize) -> Vec<u8> {
    let mut labels = vec![0u8; width * height];
    for y in cy..height {
        for x in cx..width {
            labels[y * width + x] = 1;
        }
    }
    labels
}

/// Two-tone image with a vertical boundary: columns `< step_col` take
/// `color_a`, the rest `color_b`. GT sits on column `step_col`.
pub fn two_tone_vertical(
    width: usize,
    height: usize,
    step_col: usize,
    color_a: [u8; 3],
    color_b: [u8; 3],
) -> (RgbImage, EdgeMap) {
    let labels = two_tone_labels(width, height, step_col);
    (
        paint_labels(&labels, width, height, &[color_a, color_b]),
        gt_from_labels(&labels, width, height),
    )
}

/// [`two_tone_vertical`] with the boundary column painted in the mixed
/// color, so the true edge runs through pixel centers.
pub fn two_tone_vertical_midline(
    width: usize,
    height: usize,
    step_col: usize,
    color_a: [u8; 3],
    color_b: [u8; 3],
) -> (RgbImage, EdgeMap) {
    let labels = two_tone_labels(width, height, step_col);
    paint_labels_midline(&labels, width, height, &[color_a, color_b])
}

/// A 90-degree corner: `color_b` occupies the quadrant `x >= cx && y >= cy`.
pub fn corner(
    width: usize,
    height: usize,
    cx: usize,
    cy: usize,
    color_a: [u8; 3],
    color_b: [u8; 3],
) -> (RgbImage, EdgeMap) {
    let labels = corner_labels(width, height, cx, cy);
    (
        paint_labels(&labels, width, height, &[color_a, color_b]),
        gt_from_labels(&labels, width, height),
    )
}

/// [`corner`] with a mid-tone boundary line.
pub fn corner_midline(
    width: usize,
    height: usize,
    cx: usize,
    cy: usize,
    color_a: [u8; 3],
    color_b: [u8; 3],
) -> (RgbImage, EdgeMap) {
    let labels = corner_labels(width, height, cx, cy);
    paint_labels_midline(&labels, width, height, &[color_a, color_b])
}

fn sector_labels(width: usize, height: usize, boundaries: &[f64]) -> Vec<u8> {
    // boundaries are ascending angles in [0, 2pi); sector k spans
    // [boundaries[k], boundaries[k+1])
    let cx = ((width - 1) / 2) as f64;
    let cy = ((height - 1) / 2) as f64;
    let n = boundaries.len();
    let mut labels = vec![0u8; width * height];
    for y in 0..height {
        for x in 0..width {
            let phi = (y as f64 - cy)
                .atan2(x as f64 - cx)
                .rem_euclid(std::f64::consts::TAU);
            let mut sector = n - 1;
            for k in 0..n - 1 {
                if phi >= boundaries[k] && phi < boundaries[k + 1] {
                    sector = k;
                    break;
                }
            }
            // angles below the first boundary wrap into the last sector
            if phi < boundaries[0] {
                sector = n - 1;
            }
            labels[y * width + x] = sector as u8;
        }
    }
    labels
}

fn y_junction_boundaries() -> [f64; 3] {
    let base = std::f64::consts::FRAC_PI_2;
    let third = std::f64::consts::TAU / 3.0;
    [base, base + third, base + 2.0 * third]
}

fn x_junction_boundaries() -> [f64; 4] {
    let q = std::f64::consts::FRAC_PI_4;
    [q, 3.0 * q, 5.0 * q, 7.0 * q]
}

/// Three sectors meeting at the center (a Y-shaped junction).
pub fn y_junction(width: usize, height: usize, colors: [[u8; 3]; 3]) -> (RgbImage, EdgeMap) {
    let labels = sector_labels(width, height, &y_junction_boundaries());
    (
        paint_labels(&labels, width, height, &colors),
        gt_from_labels(&labels, width, height),
    )
}

/// Single-pixel DDA ray from the grid center along `angle`, painted in
/// `color`, marked in `gt`. One pixel per step of the dominant axis.
fn draw_ray(img: &mut RgbImage, gt: &mut EdgeMap, angle: f64, color: [u8; 3]) {
    let (w, h) = img.dims();
    let cx = ((w - 1) / 2) as f64;
    let cy = ((h - 1) / 2) as f64;
    let (sin_a, cos_a) = angle.sin_cos();
    let major = cos_a.abs().max(sin_a.abs());
    let (ux, uy) = (cos_a / major, sin_a / major);
    let mut i = 0.0f64;
    loop {
        let x = (cx + i * ux).round();
        let y = (cy + i * uy).round();
        if x < 0.0 || y < 0.0 || x >= w as f64 || y >= h as f64 {
            break;
        }
        img.set_pixel(x as usize, y as usize, color);
        gt.set(x as usize, y as usize, true);
        i += 1.0;
    }
}

/// Sector image whose boundary rays are drawn as 1-px mid-tone lines; GT
/// is exactly those lines.
fn junction_midline(
    width: usize,
    height: usize,
    boundaries: &[f64],
    colors: &[[u8; 3]],
) -> (RgbImage, EdgeMap) {
    let labels = sector_labels(width, height, boundaries);
    let mut img = paint_labels(&labels, width, height, colors);
    let mut gt = EdgeMap::empty(width, height);
    let n = boundaries.len();
    for (k, &angle) in boundaries.iter().enumerate() {
        // the ray at boundaries[k] separates sector k-1 (mod n) from sector k
        let mid = mix(colors[(k + n - 1) % n], colors[k]);
        draw_ray(&mut img, &mut gt, angle, mid);
    }
    (img, gt)
}

/// [`y_junction`] with mid-tone boundary lines.
pub fn y_junction_midline(
    width: usize,
    height: usize,
    colors: [[u8; 3]; 3],
) -> (RgbImage, EdgeMap) {
    junction_midline(width, height, &y_junction_boundaries(), &colors)
}

/// Four sectors split by the two diagonals (an X-shaped junction).
pub fn x_junction(width: usize, height: usize, colors: [[u8; 3]; 4]) -> (RgbImage, EdgeMap) {
    let labels = sector_labels(width, height, &x_junction_boundaries());
    (
        paint_labels(&labels, width, height, &colors),
        gt_from_labels(&labels, width, height),
    )
}

/// [`x_junction`] with mid-tone boundary lines.
pub fn x_junction_midline(
    width: usize,
    height: usize,
    colors: [[u8; 3]; 4],
) -> (RgbImage, EdgeMap) {
    junction_midline(width, height, &x_junction_boundaries(), &colors)
}

/// A color with the same luminance row of the RGB→XYZ matrix as `rgb`,
/// using the requested red and blue and solving for green. Returns `None`
/// when the green channel would leave `[0, 255]`.
pub fn isoluminant_partner(rgb: [u8; 3], red: u8, blue: u8) -> Option<[u8; 3]> {
    let y = 0.2128 * f64::from(rgb[0]) + 0.7152 * f64::from(rgb[1]) + 0.0722 * f64::from(rgb[2]);
    let g = (y - 0.2128 * f64::from(red) - 0.0722 * f64::from(blue)) / 0.7152;
    let g = g.round();
    if (0.0..=255.0).contains(&g) {
        Some([red, g as u8, blue])
    } else {
        None
    }
}

/// A seeded scene of colored rectangles and disks on a background, with GT
/// outlines. Scenes mix strong-contrast boundaries with an isoluminant one
/// so luminance-only ablations measurably miss edges.
pub fn shapes_scene(width: usize, height: usize, seed: u64) -> (RgbImage, EdgeMap) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |lo: usize, hi: usize| lo + (rng.next_u64() as usize) % (hi - lo);

    let background = [60, 60, 170];
    let mut palette: Vec<[u8; 3]> = vec![background];
    // strong-contrast foregrounds plus two isoluminant partners of the
    // background, which only the chroma channels can separate
    palette.push([230, 200, 40]);
    palette.push([40, 180, 70]);
    palette.push([220, 60, 50]);
    palette.push(isoluminant_partner(background, 170, 40).expect("partner in gamut"));
    palette.push(isoluminant_partner(background, 200, 90).expect("partner in gamut"));

    let mut labels = vec![0u8; width * height];
    // one shape per foreground color; the isoluminant pair (labels 4 and 5)
    // is painted last so nothing occludes it
    let shape_count = 5;
    for s in 0..shape_count {
        let label = (1 + s) as u8;
        let disk = pick(0, 2) == 0;
        if disk {
            let r = pick(width / 8, width / 4);
            let cx = pick(r + 1, width - r - 1);
            let cy = pick(r + 1, height - r - 1);
            for y in 0..height {
                for x in 0..width {
                    let dx = x as i64 - cx as i64;
                    let dy = y as i64 - cy as i64;
                    if dx * dx + dy * dy <= (r * r) as i64 {
                        labels[y * width + x] = label;
                    }
                }
            }
        } else {
            let w = pick(width / 6, width / 2);
            let h = pick(height / 6, height / 2);
            let x0 = pick(1, width - w - 1);
            let y0 = pick(1, height - h - 1);
            for y in y0..y0 + h {
                for x in x0..x0 + w {
                    labels[y * width + x] = label;
                }
            }
        }
    }
    (
        paint_labels(&labels, width, height, &palette),
        gt_from_labels(&labels, width, height),
    )
}
