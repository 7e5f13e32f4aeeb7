//! Color edge detection built on a multi-scale complex Gabor filter bank.
//!
//! The pipeline converts 8-bit sRGB input to CIE L*a*b*, smooths every
//! channel with a bank of oriented complex Gabor kernels at several scales,
//! takes the per-pixel maximum magnitude over orientations as an edge
//! strength map (ESM) per channel and scale, fuses the maps by geometric
//! mean, contrast-equalizes the result, and then runs Canny-style
//! non-maxima suppression, percentile thresholding, and hysteresis linking.
//!
//! The [`eval`] module provides the matching benchmark harness: tolerant
//! precision/recall with ODS/OIS/AP/R50 sweeps, Pratt's figure of merit,
//! and seeded Gaussian noise injection.

pub mod colorspace;
pub mod detector;
pub mod error;
pub mod esm;
pub mod eval;
pub mod gabor;
pub mod image;
pub mod io;
pub mod synth;

pub use crate::error::{Error, Result};
pub use crate::image::{EdgeMap, LabImage, Plane, RgbImage, XyzImage};
