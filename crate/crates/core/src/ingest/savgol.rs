//! Savitzky-Golay smoothing by local least-squares polynomial fits.

use serde::{Deserialize, Serialize};

use crate::dsp::MagnitudeResponse;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    pub window_length: usize,
    pub poly_order: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            window_length: 63,
            poly_order: 3,
        }
    }
}

impl SmoothingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_length == 0 || self.window_length % 2 == 0 {
            return Err(Error::invalid("window length must be odd and positive"));
        }
        if self.poly_order >= self.window_length {
            return Err(Error::invalid("polynomial order must be below the window length"));
        }
        Ok(())
    }
}

/// Weights `w` such that `Σ w_i y_i` is the least-squares degree-`order`
/// fit through `y` at positions `0..len`, evaluated at position `at`.
fn fit_weights(len: usize, order: usize, at: usize) -> Vec<f64> {
    // Centred, scaled abscissae keep the Vandermonde system well conditioned.
    let c = (len - 1) as f64 / 2.0;
    let s = c.max(1.0);
    let t = |i: usize| (i as f64 - c) / s;
    let cols = order + 1;
    let mut a = vec![0.0; len * cols];
    for i in 0..len {
        for j in 0..cols {
            a[i * cols + j] = t(i).powi(j as i32);
        }
    }
    let basis: Vec<f64> = (0..cols).map(|j| t(at).powi(j as i32)).collect();
    (0..len)
        .map(|i| {
            let mut e = vec![0.0; len];
            e[i] = 1.0;
            let coef = linalg::lstsq(&a, len, cols, &e, 1e-12).expect("full-rank Vandermonde");
            coef.iter().zip(&basis).map(|(c, b)| c * b).sum()
        })
        .collect()
}

/// Convolution weights for one configuration, including the one-sided
/// edge fits.
#[derive(Clone, Debug)]
pub struct SavgolFilter {
    cfg: SmoothingConfig,
    center: Vec<f64>,
    /// `left[j]` fits samples `0..=j+m` and evaluates at `j`.
    left: Vec<Vec<f64>>,
}

impl SavgolFilter {
    pub fn new(cfg: SmoothingConfig) -> Result<Self> {
        cfg.validate()?;
        let m = cfg.window_length / 2;
        let center = fit_weights(cfg.window_length, cfg.poly_order, m);
        let left = (0..m)
            .map(|j| fit_weights((j + m + 1).max(cfg.poly_order + 1), cfg.poly_order, j))
            .collect();
        Ok(Self { cfg, center, left })
    }

    pub fn center_weights(&self) -> &[f64] {
        &self.center
    }

    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        let w = self.cfg.window_length;
        let m = w / 2;
        let n = y.len();
        if n < w {
            return Err(Error::invalid(format!("window {w} exceeds sequence length {n}")));
        }
        let dot = |w: &[f64], s: &[f64]| w.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
        let mut out = vec![0.0; n];
        for i in m..n - m {
            out[i] = dot(&self.center, &y[i - m..=i + m]);
        }
        for (j, wts) in self.left.iter().enumerate() {
            out[j] = dot(wts, &y[..wts.len()]);
            // Mirror image for the right edge.
            let tail: Vec<f64> = y[n - wts.len()..].iter().rev().copied().collect();
            out[n - 1 - j] = dot(wts, &tail);
        }
        Ok(out)
    }
}

pub fn savgol_smooth(x: &MagnitudeResponse, cfg: &SmoothingConfig) -> Result<MagnitudeResponse> {
    let values = SavgolFilter::new(*cfg)?.apply(&x.values_db)?;
    MagnitudeResponse::new(x.grid.clone(), values)
}
