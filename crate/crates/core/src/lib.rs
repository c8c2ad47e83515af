//! Simulation and reconstruction toolkit for squeezed-light RF-photonic
//! synthetic-aperture imaging.
//!
//! The pipeline is: an object transmittance map ([`scene`]) is blurred by a
//! Gaussian point-spread function ([`optics`]), read out by a homodyne
//! detector whose quadrature noise is set by the squeezing gain and the
//! transduced thermal background ([`channel`], [`forward`]), and restored by
//! Wiener deconvolution ([`restore`]). Image quality is scored by PSNR
//! ([`metrics`]) and parameter sweeps are orchestrated by [`harness`].
//!
//! Data-parallel loops (FFT rows, per-pixel noise, sweep cells, Fresnel
//! profiles) run on rayon when the `parallel` feature is enabled (default)
//! and sequentially otherwise. Results are bitwise identical either way.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod forward;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod optics;
pub mod par;
pub mod restore;
pub mod scene;

pub use error::{Error, Result};
