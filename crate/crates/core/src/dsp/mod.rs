//! Magnitude-response mathematics for biquad cascades and coefficient-form
//! filters.
//!
//! Everything here is double precision and allocation-light. Responses are
//! always in dB (`20·log10|H|`), which is also the scale of the loss.

mod io;
mod loss;
mod minphase;
mod response;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly;

pub use io::{
    read_response_csv, response_from_csv, response_to_csv, write_response_csv, CascadeJson,
    FilterJson,
};
pub use loss::{db_mse, normalize_for_network, NETWORK_CLIP_DB};
pub(crate) use loss::mse as loss_mse;
pub(crate) use response::quad_energy;
pub use minphase::{min_phase_jacobian, min_phase_project, MIN_PHASE_EPS};
pub use response::{
    cascade_response_db, coeff_response_db, coeff_response_db_fft, section_response_db,
};

/// `F` linearly spaced angular frequencies over `[0, π]`.
///
/// Cheap to clone; the trig tables used by the response and gradient kernels
/// are computed once and shared.
#[derive(Clone, Debug)]
pub struct FrequencyGrid {
    inner: Arc<GridTables>,
}

#[derive(Debug)]
struct GridTables {
    sample_rate_hz: f64,
    omegas: Vec<f64>,
    cos1: Vec<f64>,
    sin1: Vec<f64>,
    cos2: Vec<f64>,
    sin2: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(f_count: usize, sample_rate_hz: f64) -> Result<Self> {
        if f_count < 2 {
            return Err(Error::invalid(format!(
                "frequency grid needs at least 2 points, got {f_count}"
            )));
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let last = (f_count - 1) as f64;
        let mut omegas: Vec<f64> = (0..f_count).map(|j| PI * j as f64 / last).collect();
        omegas[f_count - 1] = PI;
        let cos1 = omegas.iter().map(|w| w.cos()).collect();
        let sin1 = omegas.iter().map(|w| w.sin()).collect();
        let cos2 = omegas.iter().map(|w| (2.0 * w).cos()).collect();
        let sin2 = omegas.iter().map(|w| (2.0 * w).sin()).collect();
        Ok(Self {
            inner: Arc::new(GridTables {
                sample_rate_hz,
                omegas,
                cos1,
                sin1,
                cos2,
                sin2,
            }),
        })
    }

    pub fn len(&self) -> usize {
        self.inner.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.inner.sample_rate_hz
    }

    pub fn omegas(&self) -> &[f64] {
        &self.inner.omegas
    }

    /// Grid frequencies in Hz, `0 ..= fs/2`.
    pub fn freqs_hz(&self) -> impl Iterator<Item = f64> + '_ {
        let scale = self.inner.sample_rate_hz / (2.0 * PI);
        self.inner.omegas.iter().map(move |w| w * scale)
    }

    /// `(cos ω, sin ω, cos 2ω, sin 2ω)` tables.
    pub(crate) fn trig(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        let t = &*self.inner;
        (&t.cos1, &t.sin1, &t.cos2, &t.sin2)
    }

    pub fn same_as(&self, other: &FrequencyGrid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.len() == other.len() && self.sample_rate_hz() == other.sample_rate_hz())
    }
}

pub fn make_grid(f_count: usize, sample_rate_hz: f64) -> Result<FrequencyGrid> {
    FrequencyGrid::new(f_count, sample_rate_hz)
}

#[derive(Clone, Debug)]
pub struct MagnitudeResponse {
    pub grid: FrequencyGrid,
    pub values_db: Vec<f64>,
}

impl MagnitudeResponse {
    pub fn new(grid: FrequencyGrid, values_db: Vec<f64>) -> Result<Self> {
        if values_db.len() != grid.len() {
            return Err(Error::GridMismatch {
                left: values_db.len(),
                right: grid.len(),
            });
        }
        Ok(Self { grid, values_db })
    }

    pub fn flat(grid: &FrequencyGrid, level_db: f64) -> Self {
        Self {
            values_db: vec![level_db; grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.values_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_db.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values_db.iter().all(|v| v.is_finite())
    }

    pub fn mean_db(&self) -> f64 {
        self.values_db.iter().sum::<f64>() / self.values_db.len() as f64
    }
}

/// Scalar gain plus `K` poles and `K` zeros; each root stands for itself and
/// its conjugate, so the filter order is `2K`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterCascade {
    pub gain: f64,
    pub poles: Vec<Complex64>,
    pub zeros: Vec<Complex64>,
}

impl FilterCascade {
    pub fn new(gain: f64, poles: Vec<Complex64>, zeros: Vec<Complex64>) -> Result<Self> {
        if poles.len() != zeros.len() {
            return Err(Error::invalid(format!(
                "cascade needs as many poles as zeros ({} vs {})",
                poles.len(),
                zeros.len()
            )));
        }
        if poles.is_empty() {
            return Err(Error::invalid("cascade needs at least one section"));
        }
        Ok(Self { gain, poles, zeros })
    }

    /// Gain-only cascade with every root at the origin.
    pub fn identity(sections: usize, gain: f64) -> Self {
        Self {
            gain,
            poles: vec![Complex64::new(0.0, 0.0); sections],
            zeros: vec![Complex64::new(0.0, 0.0); sections],
        }
    }

    pub fn sections(&self) -> usize {
        self.poles.len()
    }

    pub fn order(&self) -> usize {
        2 * self.poles.len()
    }

    pub fn is_min_phase(&self) -> bool {
        self.poles
            .iter()
            .chain(self.zeros.iter())
            .all(|r| r.norm() < 1.0)
    }

    /// Second-order sections from the conjugate-pair expansion, with the gain
    /// folded into the numerator of the first section.
    pub fn to_coefficients(&self) -> CoefficientFilter {
        let sections: Vec<Section> = self
            .zeros
            .iter()
            .zip(&self.poles)
            .enumerate()
            .map(|(k, (z, p))| {
                let g = if k == 0 { self.gain } else { 1.0 };
                Section {
                    b: [g, -2.0 * z.re * g, z.norm_sqr() * g],
                    a: [1.0, -2.0 * p.re, p.norm_sqr()],
                }
            })
            .collect();
        CoefficientFilter::from_sections(sections)
    }
}

pub fn sections_from_cascade(cascade: &FilterCascade) -> CoefficientFilter {
    cascade.to_coefficients()
}

/// One biquad, `(b0 + b1 z⁻¹ + b2 z⁻²) / (a0 + a1 z⁻¹ + a2 z⁻²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Section {
    pub fn identity() -> Self {
        Self {
            b: [1.0, 0.0, 0.0],
            a: [1.0, 0.0, 0.0],
        }
    }

    /// Divides through by `a0`.
    pub fn normalized(&self) -> Self {
        let a0 = self.a[0];
        Self {
            b: self.b.map(|v| v / a0),
            a: self.a.map(|v| v / a0),
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.b[0], self.b[1], self.b[2], self.a[0], self.a[1], self.a[2]]
    }
}

/// Transfer function in expanded form, optionally with the sections it was
/// built from.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientFilter {
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
    pub sections: Option<Vec<Section>>,
}

impl CoefficientFilter {
    pub fn new(numerator: Vec<f64>, denominator: Vec<f64>) -> Result<Self> {
        if numerator.is_empty() || denominator.is_empty() {
            return Err(Error::invalid("empty coefficient array"));
        }
        if denominator[0] == 0.0 {
            return Err(Error::invalid("a0 must be nonzero"));
        }
        if numerator
            .iter()
            .chain(denominator.iter())
            .any(|c| !c.is_finite())
        {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(Self {
            numerator,
            denominator,
            sections: None,
        })
    }

    pub fn from_sections(sections: Vec<Section>) -> Self {
        let mut num = vec![1.0];
        let mut den = vec![1.0];
        for s in &sections {
            num = poly::convolve(&num, &s.b);
            den = poly::convolve(&den, &s.a);
        }
        Self {
            numerator: num,
            denominator: den,
            sections: Some(sections),
        }
    }

    /// `N`, the larger of the numerator and denominator degrees.
    pub fn order(&self) -> usize {
        self.numerator.len().max(self.denominator.len()) - 1
    }
}
