//! Simulator for a 1-bit coding reconfigurable intelligent surface.
//!
//! The crate covers the whole chain from phase synthesis to link budget:
//!
//! - [`geometry`]: lattice positions and direction algebra.
//! - [`phase`]: Snell-gradient and near-field compensation masks, 1-bit
//!   quantization, steering codebooks.
//! - [`pattern`]: far-field array factor and near-field-fed patterns, lobe
//!   metrics, CSV export.
//! - [`link`]: element-summation received power, phase-error loss, SNR.
//! - [`localization`]: codebook sweep and argmax angle estimation.
//! - [`hardware`]: PIN diode model, bias resistor, shift-register frames.
//! - [`config`] and [`cli`]: the TOML scenario file and the `ris` commands.
//!
//! Each capability has a runnable program under `examples/`.
//!
//! ```
//! use ris_sim::geometry::{ArrayGeometry, Direction};
//! use ris_sim::pattern::{array_factor_far, default_theta_grid, pattern_metrics, UnitCellReflection};
//! use ris_sim::phase::{quantize_1bit, snell_gradient};
//!
//! let geom = ArrayGeometry::prototype();
//! let normal = Direction::BORESIGHT;
//! let steer = Direction::new(30.0, 0.0).unwrap();
//! let mask = quantize_1bit(&snell_gradient(&geom, normal, steer, 0.0545).unwrap());
//! let cut = array_factor_far(&geom, &mask, &UnitCellReflection::default(), normal, 0.0,
//!                            &default_theta_grid(), 0.0545).unwrap();
//! let metrics = pattern_metrics(&cut).unwrap();
//! assert!((metrics.main_lobe_deg - 30.0).abs() <= 2.0);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod hardware;
pub mod link;
pub mod localization;
pub mod pattern;
pub mod phase;

pub use error::{Error, Result};
