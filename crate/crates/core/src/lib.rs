//! Hermite eigenfunctions, spectral projection kernels of the harmonic
//! oscillator, stationary phase, and sharp local L^p bounds.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod construct;
pub mod error;
pub mod experiment;
pub mod hermite;
pub mod mehler;
pub mod normquad;
pub mod phase;
pub mod quad;
pub mod spectral;
pub mod sphase;
pub mod sum;

pub use error::{Error, Result};
