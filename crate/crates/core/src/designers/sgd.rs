use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::{cascade_response_db, min_phase_project, FilterCascade, MagnitudeResponse};
use crate::error::{Error, Result};
use crate::grad::{loss_and_grad_raw, params_to_cascade, CascadeParams, GainMode};
use crate::randfilt::{draw_rng, Stream};

/// Reinitialization attempts after a degenerate forward pass.
const MAX_REINITS: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SgdOptimizer {
    PlainSgd,
    AdaptiveMoment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub steps: usize,
    pub lr: f64,
    pub seed: u64,
    pub order: usize,
    pub gain_mode: GainMode,
    pub optimizer: SgdOptimizer,
}

impl SgdConfig {
    pub fn new(order: usize, steps: usize, seed: u64) -> Self {
        Self {
            steps,
            lr: 5e-4,
            seed,
            order,
            gain_mode: GainMode::Direct,
            optimizer: SgdOptimizer::PlainSgd,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.order < 2 || self.order % 2 != 0 {
            return Err(Error::invalid(format!("order must be even and >= 2, got {}", self.order)));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps must be at least 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SgdResult {
    pub cascade: FilterCascade,
    /// Best-seen parameters.
    pub params: CascadeParams,
    pub best_loss: f64,
    /// Loss at the initial point and after every update (`steps + 1` entries).
    pub loss_trace: Vec<f64>,
    /// Running minimum of `loss_trace`.
    pub best_trace: Vec<f64>,
}

fn random_root<R: Rng + ?Sized>(rng: &mut R) -> [f64; 2] {
    [rng.random_range(-0.5..=0.5), rng.random_range(-0.5..=0.5)]
}

fn initial_params<R: Rng + ?Sized>(
    target: &MagnitudeResponse,
    cfg: &SgdConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut v = vec![1.0];
    for _ in 0..cfg.order {
        v.extend(random_root(rng));
    }
    let unit = params_to_cascade(&v, GainMode::Direct);
    let resp = cascade_response_db(&unit, &target.grid)?;
    let gain = 10f64.powf((target.mean_db() - resp.mean_db()) / 20.0);
    v[0] = cfg.gain_mode.raw_for_gain(gain);
    Ok(v)
}

/// Index (into the parameter vector) of the root closest to the unit
/// circle after projection.
fn outermost_root(v: &[f64]) -> usize {
    (0..(v.len() - 1) / 2)
        .map(|j| 1 + 2 * j)
        .max_by(|&a, &b| {
            let m = |i: usize| min_phase_project(Complex64::new(v[i], v[i + 1])).norm();
            m(a).total_cmp(&m(b))
        })
        .unwrap()
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn step(&mut self, p: &mut [f64], g: &[f64], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        let (c1, c2) = (1.0 - B1.powi(self.t), 1.0 - B2.powi(self.t));
        for i in 0..p.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * g[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * g[i] * g[i];
            p[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + 1e-8);
        }
    }
}

/// Fits a cascade to `target` by gradient descent on the dB-MSE from a
/// random start; returns the best parameters seen.
pub fn sgd_design(target: &MagnitudeResponse, cfg: &SgdConfig) -> Result<SgdResult> {
    cfg.validate()?;
    if !target.is_finite() {
        return Err(Error::invalid("target response must be finite"));
    }
    let grid = &target.grid;
    let mut rng = draw_rng(cfg.seed, Stream::Design, 0, 0);
    let mut p = initial_params(target, cfg, &mut rng)?;
    let mut g = vec![0.0; p.len()];
    let mut scratch = vec![0.0; target.len()];
    let mut adam = Adam {
        m: vec![0.0; p.len()],
        v: vec![0.0; p.len()],
        t: 0,
    };
    let mut trace = Vec::with_capacity(cfg.steps + 1);
    let mut best = (f64::INFINITY, p.clone());
    let mut reinits = 0;
    while trace.len() <= cfg.steps {
        let loss = match loss_and_grad_raw(&p, &target.values_db, grid, cfg.gain_mode, &mut g, &mut scratch) {
            Ok(l) => l,
            Err(e @ Error::DegenerateResponse(_)) => {
                reinits += 1;
                if reinits > MAX_REINITS {
                    return Err(e);
                }
                let i = outermost_root(&p);
                let [re, im] = random_root(&mut rng);
                p[i] = re;
                p[i + 1] = im;
                continue;
            }
            Err(e) => return Err(e),
        };
        trace.push(loss);
        if loss < best.0 {
            best = (loss, p.clone());
        }
        if trace.len() > cfg.steps {
            break;
        }
        match cfg.optimizer {
            SgdOptimizer::PlainSgd => p.iter_mut().zip(&g).for_each(|(x, d)| *x -= cfg.lr * d),
            SgdOptimizer::AdaptiveMoment => adam.step(&mut p, &g, cfg.lr),
        }
    }
    let best_trace = trace
        .iter()
        .scan(f64::INFINITY, |m, &l| {
            *m = m.min(l);
            Some(*m)
        })
        .collect();
    let params = CascadeParams::new(best.1)?;
    Ok(SgdResult {
        cascade: params.to_cascade(cfg.gain_mode),
        params,
        best_loss: best.0,
        loss_trace: trace,
        best_trace,
    })
}
