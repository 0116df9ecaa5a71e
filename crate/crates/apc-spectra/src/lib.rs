//! Bifrequency spectral analysis for periodically and almost periodically
//! correlated time series.
//!
//! The second-order structure of such a series lives on the bifrequency
//! square `(0, 2π]²`: the spectral density extension `P(ν, ω)` is supported
//! on the lines `ω = ν − λ` over the frequencies `λ` present in the
//! autocovariance, and the magnitude of coherence rescales it to `[0, 1]`.
//! This crate provides
//!
//! * lag-window smoothed estimators of `P(ν, ω)` and of the magnitude of
//!   coherence, with absolute-time indexing so block estimates compose
//!   ([`estimators`], [`windows`]);
//! * the asymptotic covariance structure of the normalized estimators and
//!   samplers for their limit laws ([`asymptotics`]);
//! * subsampling estimates of the sampling distributions, quantiles, and
//!   consistent confidence intervals ([`subsampling`]);
//! * hypothesis tests for periodic correlation and the bifrequency grid
//!   scan that produces rejection maps ([`detect`]);
//! * periodic moving-average simulation models with exact closed-form
//!   spectral truth for validation ([`models`]);
//! * independent brute-force and Monte Carlo oracles used by the test suite
//!   and the hidden `verify` subcommand ([`testkit`]).
//!
//! The `apc-spectra` binary exposes the `simulate`, `estimate`, `ci` and
//! `scan` commands on top of the library; see [`cli`]. Runnable walkthroughs
//! of each capability live in the crate's `examples/` directory.

pub mod asymptotics;
pub mod cli;
pub mod core;
pub mod detect;
pub mod error;
pub mod estimators;
pub mod models;
pub mod subsampling;
pub mod testkit;
pub mod windows;

pub use crate::core::{BifrequencyPoint, ComplexValue, Frequency, TimeSeries};
pub use crate::error::{Error, Result};
pub use crate::estimators::{SpectralEstimate, MeanSpec};
pub use crate::windows::LagWindowSpec;
