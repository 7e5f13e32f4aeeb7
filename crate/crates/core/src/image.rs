//! Image buffer types shared across the pipeline.
//!
//! Everything downstream of the 8-bit input works on [`Plane`]s: row-major
//! `f64` grids with top-left origin. Out-of-range reads use symmetric mirror
//! indexing (border sample repeated), which is the boundary rule for every
//! convolution and window operation in the crate.

use crate::error::{Error, Result};

/// A row-major 2-D grid of `f64` samples, top-left origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "plane data length {} != {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Plane { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Plane {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    /// Sample with symmetric mirror indexing: `-1 -> 0`, `-2 -> 1`,
    /// `n -> n-1`, and so on, repeating for arbitrarily far overshoot.
    #[inline]
    pub fn get_mirror(&self, x: i64, y: i64) -> f64 {
        let mx = mirror_index(x, self.width);
        let my = mirror_index(y, self.height);
        self.data[my * self.width + mx]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Maximum sample value; 0 for an all-zero plane is the natural floor
    /// since the pipeline only stores nonnegative magnitudes here.
    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn same_dims(&self, other: &Plane) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Symmetric (border-repeating) mirror of `i` into `[0, len)`.
#[inline]
pub fn mirror_index(i: i64, len: usize) -> usize {
    debug_assert!(len > 0);
    let n = len as i64;
    if (0..n).contains(&i) {
        return i as usize;
    }
    let m = i.rem_euclid(2 * n);
    if m < n {
        m as usize
    } else {
        (2 * n - 1 - m) as usize
    }
}

/// An 8-bit interleaved RGB image, the detector's input format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::InvalidParameter(format!(
                "rgb data length {} != {}x{}x3",
                data.len(),
                width,
                height
            )));
        }
        Ok(RgbImage { width, height, data })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        RgbImage { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Quarter-turn clockwise copy (dimensions swap).
    pub fn rotated90cw(&self) -> RgbImage {
        let mut out = RgbImage::filled(self.height, self.width, [0, 0, 0]);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set_pixel(self.height - 1 - y, x, self.pixel(x, y));
            }
        }
        out
    }
}

/// Tristimulus image on the 0-100 scale, one plane per component.
#[derive(Debug, Clone, PartialEq)]
pub struct XyzImage {
    pub x: Plane,
    pub y: Plane,
    pub z: Plane,
}

impl XyzImage {
    pub fn new(x: Plane, y: Plane, z: Plane) -> Result<Self> {
        if !x.same_dims(&y) || !x.same_dims(&z) {
            return Err(Error::dims(x.dims(), y.dims()));
        }
        Ok(XyzImage { x, y, z })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.x.dims()
    }
}

/// L*a*b* image, one plane per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct LabImage {
    pub l: Plane,
    pub a: Plane,
    pub b: Plane,
}

impl LabImage {
    pub fn new(l: Plane, a: Plane, b: Plane) -> Result<Self> {
        if !l.same_dims(&a) || !l.same_dims(&b) {
            return Err(Error::dims(l.dims(), a.dims()));
        }
        Ok(LabImage { l, a, b })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.l.dims()
    }
}

/// Binary per-pixel edge decision, the detector's final output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    edges: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize, edges: Vec<bool>) -> Result<Self> {
        if edges.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "edge data length {} != {}x{}",
                edges.len(),
                width,
                height
            )));
        }
        Ok(EdgeMap { width, height, edges })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        EdgeMap {
            width,
            height,
            edges: vec![false; width * height],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.edges[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.edges[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// Edge pixel coordinates in row-major order.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn same_dims(&self, other: &EdgeMap) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Quarter-turn clockwise copy (dimensions swap).
    pub fn rotated90cw(&self) -> EdgeMap {
        let mut out = EdgeMap::empty(self.height, self.width);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    out.set(self.height - 1 - y, x, true);
                }
            }
        }
        out
    }
}
