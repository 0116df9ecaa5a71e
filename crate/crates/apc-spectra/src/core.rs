//! Shared domain types: canonical frequencies on `(0, 2π]`, points of the
//! bifrequency square, and time series with absolute start indices.

use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Complex values carried by spectral densities and their estimates.
pub type ComplexValue = num_complex::Complex64;

/// An angular frequency in radians, canonicalized to the half-open
/// interval `(0, 2π]` (zero maps to `2π`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Frequency(f64);

impl Frequency {
    /// Canonicalizes an arbitrary finite angle into `(0, 2π]`.
    pub fn new(radians: f64) -> Result<Self> {
        if !radians.is_finite() {
            return Err(Error::invalid(format!("non-finite frequency {radians}")));
        }
        let mut r = radians.rem_euclid(TAU);
        if r == 0.0 {
            r = TAU;
        }
        Ok(Frequency(r.min(TAU)))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// The `2π − ν` reflection, canonicalized back into `(0, 2π]`.
    /// An involution on canonical frequencies; `2π` and `π` are fixed points.
    pub fn reflected(self) -> Self {
        Frequency::new(TAU - self.0).expect("reflection of a canonical frequency is finite")
    }
}

/// A point `(ν, ω)` of the bifrequency square `(0, 2π]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifrequencyPoint {
    pub nu: Frequency,
    pub omega: Frequency,
}

impl BifrequencyPoint {
    pub fn new(nu: Frequency, omega: Frequency) -> Self {
        BifrequencyPoint { nu, omega }
    }

    pub fn from_radians(nu: f64, omega: f64) -> Result<Self> {
        Ok(BifrequencyPoint::new(Frequency::new(nu)?, Frequency::new(omega)?))
    }

    pub fn diagonal(f: Frequency) -> Self {
        BifrequencyPoint { nu: f, omega: f }
    }

    /// Exact equality of the canonical coordinates. Grid points are
    /// constructed once and reused, so no epsilon is involved.
    pub fn is_diagonal(&self) -> bool {
        self.nu == self.omega
    }

    /// Reflects both coordinates through `2π − ·`. For a real series the
    /// estimate at the reflected point is the complex conjugate of the
    /// estimate at the original point.
    pub fn reflected(&self) -> Self {
        BifrequencyPoint {
            nu: self.nu.reflected(),
            omega: self.omega.reflected(),
        }
    }
}

/// A finite stretch of real-valued samples `X_{c+1}, …, X_{c+d}` where `c`
/// is the absolute start offset. Blocks share storage with their parent, so
/// cloning and slicing are cheap and all views are immutable.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    data: Arc<[f64]>,
    offset: usize,
    len: usize,
    start_index: i64,
}

impl TimeSeries {
    /// Wraps samples whose first element is `X_{start_index + 1}`.
    pub fn new(start_index: i64, samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("time series must hold at least one sample"));
        }
        if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample {bad}")));
        }
        let len = samples.len();
        Ok(TimeSeries {
            data: samples.into(),
            offset: 0,
            len,
            start_index,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Absolute time of the sample before the first one (the `c` offset).
    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    pub fn samples(&self) -> &[f64] {
        &self.data[self.offset..self.offset + self.len]
    }

    /// Absolute time index of `samples()[i]`.
    pub fn absolute_index(&self, i: usize) -> i64 {
        self.start_index + 1 + i as i64
    }

    /// A contiguous sub-range as a view: `block(o, l)` starts at sample `o`
    /// and shifts the start index accordingly.
    pub fn block(&self, offset: usize, length: usize) -> Result<TimeSeries> {
        if length == 0 {
            return Err(Error::invalid("block length must be at least 1"));
        }
        if offset + length > self.len {
            return Err(Error::invalid(format!(
                "block [{offset}, {}) exceeds series length {}",
                offset + length,
                self.len
            )));
        }
        Ok(TimeSeries {
            data: Arc::clone(&self.data),
            offset: self.offset + offset,
            len: length,
            start_index: self.start_index + offset as i64,
        })
    }
}
