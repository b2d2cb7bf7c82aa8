//! Simulation and analysis toolkit for underwater wireless optical links.
//!
//! The crate covers the full chain from transmitted bits to a channel
//! quality verdict:
//!
//! - [`signal`] — PRBS generation and unit-energy M-QAM symbol mapping
//!   (8/16/32/64-QAM).
//! - [`channel`] — gamma-gamma turbulence fading, OSNR-labeled additive
//!   noise, Tikhonov phase jitter, and a simplified receiver link budget.
//! - [`raster`] — constellation rendering (656×656), grayscale conversion,
//!   and box-filter downsampling to the classifier input resolution.
//! - [`cnn`] — a small from-scratch convolutional network with three softmax
//!   heads (OSNR, modulation format, phase error), trained with Adam.
//! - [`cluster`] — k-means over the (OSNR, phase error) plane producing the
//!   MNSM constellation quality levels.
//! - [`pipeline`] — dataset generation, training, evaluation, ablation,
//!   clustering, and single-image inference with reproducible seeding.
//!
//! Determinism is a contract throughout: a master seed fixes every byte of
//! generated datasets, trained weights, and report files.

pub mod channel;
pub mod cluster;
pub mod cnn;
pub mod math;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod signal;

mod error;

pub use error::{Error, Result};
