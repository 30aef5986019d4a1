//! Analytic gradients of the dB-MSE loss with respect to cascade parameters.
//!
//! The forward composition is fixed and shallow: root projection, conjugate
//! pair expansion, per-section log energy, sum, squared error. Each stage has
//! a closed-form derivative, so no tape is needed.
//!
//! Parameter layout (length `4K + 1`):
//! `[raw_gain, Re p0, Im p0, …, Re p(K-1), Im p(K-1), Re z0, Im z0, …]`.

use std::f64::consts::LN_10;

use num_complex::Complex64;

use crate::dsp::{
    min_phase_jacobian, min_phase_project, FilterCascade, FrequencyGrid, MagnitudeResponse,
};
use crate::error::{Error, Result};

/// dB per natural-log unit of power: `10 / ln 10`.
const DB_POWER: f64 = 10.0 / LN_10;
/// dB per natural-log unit of amplitude: `20 / ln 10`.
const DB_AMPLITUDE: f64 = 20.0 / LN_10;

/// Upper bound of the bounded gain, `G = 100·σ(raw)`.
pub const SIGMOID_GAIN_SCALE: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainMode {
    /// `G = |raw|`.
    Direct,
    /// `G = 100·σ(raw)`, always in `(0, 100)`.
    Sigmoid100,
}

impl std::str::FromStr for GainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "sigmoid100" => Ok(Self::Sigmoid100),
            _ => Err(Error::invalid(format!("unknown gain mode `{s}`"))),
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

impl GainMode {
    pub fn gain(self, raw: f64) -> f64 {
        match self {
            Self::Direct => raw.abs(),
            Self::Sigmoid100 => SIGMOID_GAIN_SCALE * sigmoid(raw),
        }
    }

    /// `(20·log10 G, d(20·log10 G)/d raw)`.
    fn gain_db(self, raw: f64) -> (f64, f64) {
        match self {
            Self::Direct => (20.0 * raw.abs().log10(), DB_AMPLITUDE / raw),
            Self::Sigmoid100 => (
                40.0 - DB_AMPLITUDE * softplus(-raw),
                DB_AMPLITUDE * (1.0 - sigmoid(raw)),
            ),
        }
    }

    /// Raw value producing gain `g` (which must lie in the mode's range).
    pub fn raw_for_gain(self, g: f64) -> f64 {
        match self {
            Self::Direct => g,
            Self::Sigmoid100 => {
                let s = (g / SIGMOID_GAIN_SCALE).clamp(1e-12, 1.0 - 1e-12);
                (s / (1.0 - s)).ln()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CascadeParams {
    values: Vec<f64>,
}

impl CascadeParams {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 5 || (values.len() - 1) % 4 != 0 {
            return Err(Error::invalid(format!(
                "parameter vector length must be 4K+1 with K >= 1, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        Ok(Self { values })
    }

    pub fn from_parts(raw_gain: f64, poles: &[Complex64], zeros: &[Complex64]) -> Result<Self> {
        if poles.len() != zeros.len() {
            return Err(Error::invalid("pole and zero counts differ"));
        }
        let mut values = vec![raw_gain];
        for r in poles.iter().chain(zeros) {
            values.push(r.re);
            values.push(r.im);
        }
        Self::new(values)
    }

    pub fn len_for_order(order: usize) -> usize {
        2 * order + 1
    }

    pub fn sections(&self) -> usize {
        (self.values.len() - 1) / 4
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn raw_gain(&self) -> f64 {
        self.values[0]
    }

    pub fn pole(&self, k: usize) -> Complex64 {
        Complex64::new(self.values[1 + 2 * k], self.values[2 + 2 * k])
    }

    pub fn zero(&self, k: usize) -> Complex64 {
        let off = 1 + 2 * self.sections();
        Complex64::new(self.values[off + 2 * k], self.values[off + 2 * k + 1])
    }

    /// The cascade these parameters describe: roots projected inside the
    /// unit circle, gain mapped through `mode`.
    pub fn to_cascade(&self, mode: GainMode) -> FilterCascade {
        params_to_cascade(&self.values, mode)
    }
}

pub(crate) fn params_to_cascade(values: &[f64], mode: GainMode) -> FilterCascade {
    let k = (values.len() - 1) / 4;
    let root = |i: usize| min_phase_project(Complex64::new(values[i], values[i + 1]));
    FilterCascade {
        gain: mode.gain(values[0]),
        poles: (0..k).map(|j| root(1 + 2 * j)).collect(),
        zeros: (0..k).map(|j| root(1 + 2 * k + 2 * j)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradVector(pub Vec<f64>);

impl GradVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

fn check_target(values: &[f64], target: &MagnitudeResponse) -> Result<()> {
    if values.len() < 5 || (values.len() - 1) % 4 != 0 {
        return Err(Error::invalid(format!(
            "parameter vector length must be 4K+1, got {}",
            values.len()
        )));
    }
    if target.values_db.len() != target.grid.len() {
        return Err(Error::GridMismatch {
            left: target.values_db.len(),
            right: target.grid.len(),
        });
    }
    Ok(())
}

pub fn loss(params: &CascadeParams, target: &MagnitudeResponse, mode: GainMode) -> Result<f64> {
    check_target(params.as_slice(), target)?;
    let mut est = vec![0.0; target.len()];
    forward_raw(params.as_slice(), &target.grid, mode, &mut est)?;
    finite_loss(crate::dsp::loss_mse(&est, &target.values_db))
}

pub fn loss_and_grad(
    params: &CascadeParams,
    target: &MagnitudeResponse,
    mode: GainMode,
) -> Result<(f64, GradVector)> {
    check_target(params.as_slice(), target)?;
    let mut grad = vec![0.0; params.as_slice().len()];
    let mut scratch = vec![0.0; target.len()];
    let l = loss_and_grad_raw(
        params.as_slice(),
        &target.values_db,
        &target.grid,
        mode,
        &mut grad,
        &mut scratch,
    )?;
    Ok((l, GradVector(grad)))
}

/// Central differences of [`loss`], one coordinate at a time.
pub fn finite_diff_grad(
    params: &CascadeParams,
    target: &MagnitudeResponse,
    mode: GainMode,
    h: f64,
) -> Result<GradVector> {
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let mut p = params.clone();
    let mut g = Vec::with_capacity(p.values.len());
    for i in 0..p.values.len() {
        let x = p.values[i];
        p.values[i] = x + h;
        let up = loss(&p, target, mode)?;
        p.values[i] = x - h;
        let down = loss(&p, target, mode)?;
        p.values[i] = x;
        g.push((up - down) / (2.0 * h));
    }
    Ok(GradVector(g))
}

fn finite_loss(l: f64) -> Result<f64> {
    if l.is_finite() {
        Ok(l)
    } else {
        Err(Error::degenerate("non-finite loss"))
    }
}

#[derive(Clone, Copy)]
struct ProjectedRoot {
    /// `[1, -2u, u² + v²]` for the projected root `u + iv`.
    coeffs: [f64; 3],
    u: f64,
    v: f64,
    jac: [[f64; 2]; 2],
}

#[inline]
fn project(values: &[f64], i: usize) -> ProjectedRoot {
    let (w, jac) = min_phase_jacobian(Complex64::new(values[i], values[i + 1]));
    ProjectedRoot {
        coeffs: [1.0, -2.0 * w.re, w.norm_sqr()],
        u: w.re,
        v: w.im,
        jac,
    }
}

/// Writes the dB response of raw parameters into `out`.
pub(crate) fn forward_raw(
    values: &[f64],
    grid: &FrequencyGrid,
    mode: GainMode,
    out: &mut [f64],
) -> Result<()> {
    let k = (values.len() - 1) / 4;
    let (gain_db, _) = mode.gain_db(values[0]);
    out.fill(gain_db);
    let (cos1, sin1, cos2, sin2) = grid.trig();
    for s in 0..k {
        let p = project(values, 1 + 2 * s);
        let z = project(values, 1 + 2 * k + 2 * s);
        for j in 0..out.len() {
            let en = crate::dsp::quad_energy(z.coeffs, cos1[j], sin1[j], cos2[j], sin2[j]);
            let ed = crate::dsp::quad_energy(p.coeffs, cos1[j], sin1[j], cos2[j], sin2[j]);
            if ed == 0.0 {
                return Err(Error::degenerate("pole on the grid"));
            }
            out[j] += DB_POWER * (en / ed).ln();
        }
    }
    Ok(())
}

/// Loss and gradient for raw parameters against target dB values.
/// `scratch` must have the grid length; `grad` the parameter length.
pub(crate) fn loss_and_grad_raw(
    values: &[f64],
    target_db: &[f64],
    grid: &FrequencyGrid,
    mode: GainMode,
    grad: &mut [f64],
    scratch: &mut [f64],
) -> Result<f64> {
    let f = target_db.len();
    let k = (values.len() - 1) / 4;
    forward_raw(values, grid, mode, scratch)?;
    let mut loss = 0.0;
    for (e, t) in scratch.iter_mut().zip(target_db) {
        let d = *e - t;
        loss += d * d;
        // Overwrite the estimate with dL/d(est_j).
        *e = 2.0 * d / f as f64;
    }
    loss /= f as f64;
    let loss = finite_loss(loss)?;
    let resid = &*scratch;

    let (_, dgain) = mode.gain_db(values[0]);
    grad[0] = dgain * resid.iter().sum::<f64>();

    let (cos1, sin1, cos2, sin2) = grid.trig();
    // Returns (dL/dc1, dL/dc2) for one quadratic factor.
    let coeff_grad = |c: [f64; 3]| {
        let (mut g1, mut g2) = (0.0, 0.0);
        for j in 0..f {
            let a = c[0] + c[1] * cos1[j] + c[2] * cos2[j];
            let b = -(c[1] * sin1[j] + c[2] * sin2[j]);
            let e = a * a + b * b;
            let w = resid[j] * DB_POWER * 2.0 / e;
            g1 += w * (a * cos1[j] - b * sin1[j]);
            g2 += w * (a * cos2[j] - b * sin2[j]);
        }
        (g1, g2)
    };
    for s in 0..k {
        for (offset, sign) in [(1 + 2 * s, -1.0), (1 + 2 * k + 2 * s, 1.0)] {
            let r = project(values, offset);
            let (g1, g2) = coeff_grad(r.coeffs);
            let (g1, g2) = (sign * g1, sign * g2);
            let du = -2.0 * g1 + 2.0 * r.u * g2;
            let dv = 2.0 * r.v * g2;
            grad[offset] = r.jac[0][0] * du + r.jac[1][0] * dv;
            grad[offset + 1] = r.jac[0][1] * du + r.jac[1][1] * dv;
        }
    }
    Ok(loss)
}
