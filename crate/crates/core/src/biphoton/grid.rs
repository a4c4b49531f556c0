//! Frequency-detuning grids and sampled complex spectra.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{angular_frequency, detuning_for_wavelength_span, wavelength_of};

/// Default number of samples.
pub const DEFAULT_POINTS: usize = 2001;
/// Default half-span of the grid in signal wavelength, meters.
pub const DEFAULT_SPAN: f64 = 6e-9;
/// Default ceiling on the fraction of |C|² carried by the outer 5% of samples.
pub const DEFAULT_TAIL_LIMIT: f64 = 1e-3;

/// Uniform grid of detunings Ω (rad/s), symmetric about zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningGrid {
    omega: Arc<[f64]>,
    step: f64,
    tail_limit: f64,
}

impl DetuningGrid {
    /// `count` samples covering [−omega_max, omega_max]; an odd count samples Ω = 0 exactly.
    pub fn symmetric(count: usize, omega_max: f64) -> Result<Self> {
        if count < 3 {
            return Err(Error::InvalidParameter(format!("grid needs at least 3 points, got {count}")));
        }
        if !(omega_max > 0.0 && omega_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid half-span {omega_max} must be > 0")));
        }
        let step = 2.0 * omega_max / (count - 1) as f64;
        let mid = (count - 1) as f64 / 2.0;
        let omega: Arc<[f64]> = (0..count).map(|i| (i as f64 - mid) * step).collect();
        Ok(Self {
            omega,
            step,
            tail_limit: DEFAULT_TAIL_LIMIT,
        })
    }

    /// Grid covering ±`half_span` (meters) of signal wavelength around `center`.
    pub fn for_wavelength_span(count: usize, center: f64, half_span: f64) -> Result<Self> {
        Self::symmetric(count, detuning_for_wavelength_span(center, half_span))
    }

    pub fn with_tail_limit(mut self, limit: f64) -> Self {
        self.tail_limit = limit;
        self
    }

    pub fn tail_limit(&self) -> f64 {
        self.tail_limit
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn count(&self) -> usize {
        self.omega.len()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn omega_max(&self) -> f64 {
        self.omega[self.omega.len() - 1]
    }

    /// Same span with (2n − 1) points, so every old sample is kept.
    pub fn refined(&self) -> Self {
        let mut g = Self::symmetric(2 * self.count() - 1, self.omega_max()).expect("valid grid");
        g.tail_limit = self.tail_limit;
        g
    }

    pub fn same_samples(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.omega, &other.omega) || self.omega == other.omega
    }

    /// Signal vacuum wavelength of each sample: λ = 2πc / (ω_s0 + Ω).
    pub fn signal_wavelengths(&self, signal_center: f64) -> Vec<f64> {
        let w0 = angular_frequency(signal_center);
        self.omega.iter().map(|o| wavelength_of(w0 + o)).collect()
    }

    /// Trapezoid rule over the grid.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let n = self.count();
        let inner: f64 = (1..n - 1).map(&f).sum();
        self.step * (inner + 0.5 * (f(0) + f(n - 1)))
    }

    pub fn integrate_complex(&self, f: impl Fn(usize) -> Complex64) -> Complex64 {
        let n = self.count();
        let inner: Complex64 = (1..n - 1).map(&f).sum();
        (inner + (f(0) + f(n - 1)) * 0.5) * self.step
    }

    /// Number of samples at each end that together form the outer 5%.
    pub fn tail_samples(&self) -> usize {
        (self.count() / 40).max(1)
    }
}

/// Top-hat filter in signal wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    /// Center vacuum wavelength, meters.
    pub center: f64,
    /// Full width, meters.
    pub width: f64,
}

impl SpectralWindow {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(center > 0.0 && width > 0.0 && width < center) {
            return Err(Error::InvalidParameter(format!(
                "window center {center} and width {width} must be positive"
            )));
        }
        Ok(Self { center, width })
    }

    /// Detuning interval [Ω_lo, Ω_hi] passed by the window.
    pub fn detuning_bounds(&self, signal_center: f64) -> (f64, f64) {
        let w0 = angular_frequency(signal_center);
        let lo = angular_frequency(self.center + 0.5 * self.width) - w0;
        let hi = angular_frequency(self.center - 0.5 * self.width) - w0;
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    Raw,
    UnitL2,
}

/// Mode labels of a spectrum: radial indices of both photons and |ℓ|.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    pub p_s: u32,
    pub p_i: u32,
    pub ell: i32,
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ps{}_pi{}_l{}", self.p_s, self.p_i, self.ell)
    }
}

/// Complex amplitude sampled on a detuning grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    pub grid: DetuningGrid,
    pub values: Vec<Complex64>,
    pub label: ModeLabel,
    pub normalization: Normalization,
}

impl ComplexSpectrum {
    pub fn new(grid: DetuningGrid, values: Vec<Complex64>, label: ModeLabel) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::DimensionMismatch(format!(
                "{} values on a {}-point grid",
                values.len(),
                grid.count()
            )));
        }
        Ok(Self {
            grid,
            values,
            label,
            normalization: Normalization::Raw,
        })
    }

    /// ∫|C|² dΩ by the trapezoid rule.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.integrate(|i| self.values[i].norm_sqr())
    }

    /// Rescaled to unit L² norm; a zero spectrum is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for v in &mut self.values {
                *v /= n;
            }
            self.normalization = Normalization::UnitL2;
        }
        self
    }

    /// ∫ self · other* dΩ.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if !self.grid.same_samples(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(self.grid.integrate_complex(|i| self.values[i] * other.values[i].conj()))
    }

    /// Fraction of the norm carried by the outer 5% of samples.
    pub fn tail_fraction(&self) -> f64 {
        let total = self.norm_sqr();
        if total == 0.0 {
            return 0.0;
        }
        let k = self.grid.tail_samples();
        let n = self.values.len();
        let tail: f64 = self.values[..k].iter().chain(&self.values[n - k..]).map(|v| v.norm_sqr()).sum();
        tail * self.grid.step() / total
    }

    /// Intensity-weighted mean detuning.
    pub fn centroid(&self) -> f64 {
        let w = self.norm_sqr();
        self.grid.integrate(|i| self.grid.omega()[i] * self.values[i].norm_sqr()) / w
    }

    /// Detuning of the largest |C|² sample.
    pub fn peak(&self) -> f64 {
        let i = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.grid.omega()[i]
    }
}
