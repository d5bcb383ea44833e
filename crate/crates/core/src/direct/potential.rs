use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{is_finite, ComplexMatrix};

/// Matrix samples on a uniform grid of `[start, end]` with linear interpolation
/// in between.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMatrixFunction {
    pub start: f64,
    pub end: f64,
    samples: Vec<ComplexMatrix>,
}

impl SampledMatrixFunction {
    pub fn new(start: f64, end: f64, samples: Vec<ComplexMatrix>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least one grid interval, got {} samples",
                samples.len()
            )));
        }
        if !(end > start) {
            return Err(Error::InvalidInput("empty grid interval".into()));
        }
        let (rows, cols) = samples[0].shape();
        if rows != cols {
            return Err(Error::InvalidInput("samples must be square matrices".into()));
        }
        for s in &samples {
            if s.shape() != (rows, cols) {
                return Err(Error::InvalidInput("samples have inconsistent shapes".into()));
            }
            if !is_finite(s) {
                return Err(Error::InvalidInput("samples contain non-finite entries".into()));
            }
        }
        Ok(Self { start, end, samples })
    }

    pub fn from_fn<F: FnMut(f64) -> ComplexMatrix>(start: f64, end: f64, intervals: usize, mut f: F) -> Result<Self> {
        let h = (end - start) / intervals as f64;
        let samples = (0..=intervals).map(|i| f(start + i as f64 * h)).collect();
        Self::new(start, end, samples)
    }

    pub fn dim(&self) -> usize {
        self.samples[0].nrows()
    }

    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / self.intervals() as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.intervals() {
            self.end
        } else {
            self.start + i as f64 * self.step()
        }
    }

    pub fn samples(&self) -> &[ComplexMatrix] {
        &self.samples
    }

    /// Piecewise-linear interpolation; clamps outside the grid.
    pub fn eval(&self, x: f64) -> ComplexMatrix {
        let n = self.intervals();
        let t = ((x - self.start) / self.step()).clamp(0.0, n as f64);
        let i = (t.floor() as usize).min(n - 1);
        let w = t - i as f64;
        if w == 0.0 {
            return self.samples[i].clone();
        }
        &self.samples[i] * Complex64::new(1.0 - w, 0.0) + &self.samples[i + 1] * Complex64::new(w, 0.0)
    }

    /// Largest entry modulus over all samples.
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(crate::matcore::max_abs).fold(0.0, f64::max)
    }
}

/// `r x r` potential `q` of the operator on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    inner: SampledMatrixFunction,
}

impl Potential {
    /// Samples on `intervals + 1` uniform points of `[-1, 1]`; `intervals` must be even
    /// so that the origin is a grid node.
    pub fn new(samples: Vec<ComplexMatrix>) -> Result<Self> {
        if samples.len() < 3 || (samples.len() - 1) % 2 != 0 {
            return Err(Error::InvalidInput(
                "potential grid must have an even number of intervals".into(),
            ));
        }
        Ok(Self {
            inner: SampledMatrixFunction::new(-1.0, 1.0, samples)?,
        })
    }

    pub fn from_fn<F: FnMut(f64) -> ComplexMatrix>(intervals: usize, f: F) -> Result<Self> {
        if intervals == 0 || intervals % 2 != 0 {
            return Err(Error::InvalidInput(
                "potential grid must have an even number of intervals".into(),
            ));
        }
        Ok(Self {
            inner: SampledMatrixFunction::from_fn(-1.0, 1.0, intervals, f)?,
        })
    }

    pub fn zero(r: usize, intervals: usize) -> Result<Self> {
        Self::from_fn(intervals, |_| ComplexMatrix::zeros(r, r))
    }

    /// Constant potential `q = c`.
    pub fn constant(c: ComplexMatrix, intervals: usize) -> Result<Self> {
        Self::from_fn(intervals, |_| c.clone())
    }

    pub fn r(&self) -> usize {
        self.inner.dim()
    }

    pub fn function(&self) -> &SampledMatrixFunction {
        &self.inner
    }

    pub fn intervals(&self) -> usize {
        self.inner.intervals()
    }

    pub fn samples(&self) -> &[ComplexMatrix] {
        self.inner.samples()
    }

    pub fn eval(&self, x: f64) -> ComplexMatrix {
        self.inner.eval(x)
    }
}

/// `2r x 2r` potential `V` of the auxiliary operator on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SPotential {
    inner: SampledMatrixFunction,
}

impl SPotential {
    pub fn new(samples: Vec<ComplexMatrix>) -> Result<Self> {
        let inner = SampledMatrixFunction::new(0.0, 1.0, samples)?;
        if inner.dim() % 2 != 0 {
            return Err(Error::InvalidInput("S-potential must have even block size".into()));
        }
        Ok(Self { inner })
    }

    pub fn from_fn<F: FnMut(f64) -> ComplexMatrix>(intervals: usize, f: F) -> Result<Self> {
        let inner = SampledMatrixFunction::from_fn(0.0, 1.0, intervals, f)?;
        if inner.dim() % 2 != 0 {
            return Err(Error::InvalidInput("S-potential must have even block size".into()));
        }
        Ok(Self { inner })
    }

    pub fn zero(d: usize, intervals: usize) -> Result<Self> {
        Self::from_fn(intervals, |_| ComplexMatrix::zeros(d, d))
    }

    /// Block size `d = 2r`.
    pub fn d(&self) -> usize {
        self.inner.dim()
    }

    pub fn r(&self) -> usize {
        self.d() / 2
    }

    pub fn function(&self) -> &SampledMatrixFunction {
        &self.inner
    }

    pub fn intervals(&self) -> usize {
        self.inner.intervals()
    }

    pub fn samples(&self) -> &[ComplexMatrix] {
        self.inner.samples()
    }

    pub fn eval(&self, x: f64) -> ComplexMatrix {
        self.inner.eval(x)
    }
}
