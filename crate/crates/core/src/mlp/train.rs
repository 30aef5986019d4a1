use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{MlpModel, MlpShape, Real};
use crate::dsp::{make_grid, normalize_for_network, FrequencyGrid, MagnitudeResponse};
use crate::error::{Error, Result};
use crate::grad::{loss_and_grad_raw, GainMode};
use crate::randfilt::{
    draw_rng, draw_target, EqRanges, FamilyId, RandomFilterSpec, SamplerConfig, Stream,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub family: FamilyId,
    pub order: usize,
    pub hidden_dim: usize,
    pub f_count: usize,
    pub sample_rate_hz: f64,
    pub batch_size: usize,
    pub filters_per_epoch: usize,
    pub epochs: usize,
    pub lr_initial: f64,
    pub lr_decay_points: Vec<f64>,
    pub lr_decay_factor: f64,
    pub grad_clip_norm: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub eq_ranges: EqRanges,
    pub eigen_scale_power: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            family: FamilyId::G,
            order: 16,
            hidden_dim: 1024,
            f_count: 512,
            sample_rate_hz: 44100.0,
            batch_size: 128,
            filters_per_epoch: 20_000,
            epochs: 500,
            lr_initial: 1e-5,
            lr_decay_points: vec![0.80, 0.95],
            lr_decay_factor: 0.1,
            grad_clip_norm: 0.9,
            weight_decay: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            eq_ranges: EqRanges::default(),
            eigen_scale_power: 0.5,
        }
    }
}

/// Learning rate for high orders, where the default diverges.
pub const HIGH_ORDER_LR: f64 = 1e-6;

impl TrainConfig {
    /// Defaults for a family and order, lowering the rate for N >= 32.
    pub fn for_order(family: FamilyId, order: usize) -> Self {
        Self {
            family,
            order,
            lr_initial: if order >= 32 { HIGH_ORDER_LR } else { 1e-5 },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        RandomFilterSpec::new(self.family, self.order, self.seed)?;
        MlpShape::new(self.f_count, self.hidden_dim, self.order)?;
        let positive = [
            self.lr_initial,
            self.lr_decay_factor,
            self.grad_clip_norm,
            self.adam_eps,
            self.sample_rate_hz,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("rates, clip norm, epsilon and sample rate must be positive"));
        }
        if self.batch_size == 0 || self.filters_per_epoch == 0 || self.epochs == 0 {
            return Err(Error::invalid("batch size, epoch size and epoch count must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.weight_decay < 0.0 {
            return Err(Error::invalid("betas must lie in [0, 1) and weight decay must be non-negative"));
        }
        let pts = &self.lr_decay_points;
        if pts.iter().any(|p| !(*p > 0.0 && *p < 1.0)) || pts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("decay points must be ascending fractions in (0, 1)"));
        }
        Ok(())
    }

    pub fn shape(&self) -> Result<MlpShape> {
        MlpShape::new(self.f_count, self.hidden_dim, self.order)
    }

    pub fn steps_per_epoch(&self) -> u64 {
        self.filters_per_epoch.div_ceil(self.batch_size) as u64
    }

    pub fn total_steps(&self) -> u64 {
        self.steps_per_epoch() * self.epochs as u64
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            sample_rate_hz: self.sample_rate_hz,
            eq_ranges: self.eq_ranges.clone(),
            eigen_scale_power: self.eigen_scale_power,
        }
    }

    /// Rate at `step` (0-based). Each decay applies from the first step at
    /// or beyond its fraction of the run.
    pub fn lr_at(&self, step: u64) -> f64 {
        let total = self.total_steps() as f64;
        let decays = self
            .lr_decay_points
            .iter()
            .filter(|&&p| step as f64 >= p * total)
            .count();
        self.lr_initial * self.lr_decay_factor.powi(decays as i32)
    }
}

/// Scales `grad` in place so its norm is at most `max_norm`; returns the
/// norm before clipping.
pub fn clip_grad_norm<T: Real>(grad: &mut [T], max_norm: f64) -> f64 {
    let norm = grad.iter().map(|g| g.to_f64() * g.to_f64()).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = T::from_f64(max_norm / norm);
        grad.iter_mut().for_each(|g| *g = *g * s);
    }
    norm
}

/// Optimizer moments and progress. Draw indices follow from `step`, so the
/// step counter is also the data cursor.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainState {
    pub step: u64,
    pub m: Vec<f32>,
    pub v: Vec<f32>,
}

impl TrainState {
    pub fn new(param_count: usize) -> Self {
        Self {
            step: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }
}

/// Decoupled-weight-decay Adam update. `t` is the 1-based step.
pub fn adamw_update(params: &mut [f32], grad: &[f32], state: &mut TrainState, cfg: &TrainConfig, lr: f64) {
    let t = (state.step + 1) as i32;
    let (b1, b2) = (cfg.beta1, cfg.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let decay = (1.0 - lr * cfg.weight_decay) as f32;
    for (((p, &g), m), v) in params.iter_mut().zip(grad).zip(&mut state.m).zip(&mut state.v) {
        let g = g as f64;
        let mi = b1 * *m as f64 + (1.0 - b1) * g;
        let vi = b2 * *v as f64 + (1.0 - b2) * g * g;
        *m = mi as f32;
        *v = vi as f32;
        let update = lr * (mi / c1) / ((vi / c2).sqrt() + cfg.adam_eps);
        *p = *p * decay - update as f32;
    }
}

/// One training example. The loss is taken against the unclipped `target`;
/// `input` is what the network sees.
pub struct Example {
    pub draw_index: u64,
    pub input: Vec<f64>,
    pub target: MagnitudeResponse,
}

impl Example {
    pub fn new(draw_index: u64, target: MagnitudeResponse) -> Self {
        Self {
            draw_index,
            input: normalize_for_network(&target),
            target,
        }
    }
}

/// Mean dB-MSE over the batch and its gradient with respect to the model
/// parameters. Per-example DSP work runs in parallel; reductions run in
/// batch order.
pub fn batch_loss_and_grad<T: Real>(
    model: &MlpModel<T>,
    batch: &[Example],
    grid: &FrequencyGrid,
) -> std::result::Result<(f64, Vec<T>), (usize, Error)> {
    let shape = model.shape();
    let b = batch.len();
    let f = shape.input_dim;
    if let Some(i) = batch.iter().position(|e| e.input.len() != f || e.target.len() != f) {
        return Err((
            i,
            Error::GridMismatch {
                left: batch[i].target.len(),
                right: f,
            },
        ));
    }
    let mut x = Array2::<T>::zeros((b, f));
    for (mut row, ex) in x.rows_mut().into_iter().zip(batch) {
        for (dst, v) in row.iter_mut().zip(&ex.input) {
            *dst = T::from_f64(*v);
        }
    }
    let cache = model.forward_batch(x.view()).map_err(|e| (0, e))?;
    let outputs: Vec<Vec<f64>> = cache
        .output
        .outer_iter()
        .map(|row| row.iter().map(|v| v.to_f64()).collect())
        .collect();
    let per_example: Vec<_> = batch
        .par_iter()
        .zip(outputs)
        .map(|(ex, values)| {
            let mut g = vec![0.0; values.len()];
            let mut scratch = vec![0.0; f];
            loss_and_grad_raw(&values, &ex.target.values_db, grid, GainMode::Sigmoid100, &mut g, &mut scratch)
                .map(|l| (l, g))
        })
        .collect();
    let mut loss = 0.0;
    let mut dout = Array2::<T>::zeros((b, shape.output_dim()));
    for (i, r) in per_example.into_iter().enumerate() {
        let (l, g) = r.map_err(|e| (i, e))?;
        loss += l;
        for (dst, v) in dout.row_mut(i).iter_mut().zip(g) {
            *dst = T::from_f64(v / b as f64);
        }
    }
    let mut grad = vec![T::zero(); shape.param_count()];
    model.backward(&cache, dout.view(), &mut grad);
    Ok((loss / b as f64, grad))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: u64,
    pub step: u64,
    pub lr: f64,
    pub mean_db_mse: f64,
}

pub fn log_to_csv(logs: &[EpochLog]) -> String {
    let mut s = String::from("epoch,step,lr,mean_db_mse\n");
    for l in logs {
        s.push_str(&format!("{},{},{:e},{}\n", l.epoch, l.step, l.lr, l.mean_db_mse));
    }
    s
}

pub struct Trainer {
    pub config: TrainConfig,
    pub model: MlpModel<f32>,
    pub state: TrainState,
    grid: FrequencyGrid,
    spec: RandomFilterSpec,
    sampler: SamplerConfig,
    epoch_loss: f64,
    epoch_count: u64,
}

impl Trainer {
    pub fn new(config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = draw_rng(config.seed, Stream::Init, 0, 0);
        let model = MlpModel::new_init(config.shape()?, &mut rng);
        let state = TrainState::new(model.params().len());
        Self::resume(config, model, state)
    }

    pub fn resume(config: TrainConfig, model: MlpModel<f32>, state: TrainState) -> Result<Self> {
        config.validate()?;
        if model.shape() != config.shape()? {
            return Err(Error::invalid("model shape does not match the training configuration"));
        }
        if state.m.len() != model.params().len() || state.v.len() != model.params().len() {
            return Err(Error::invalid("optimizer state does not match the model"));
        }
        Ok(Self {
            grid: make_grid(config.f_count, config.sample_rate_hz)?,
            spec: RandomFilterSpec::new(config.family, config.order, config.seed)?,
            sampler: config.sampler_config(),
            config,
            model,
            state,
            epoch_loss: 0.0,
            epoch_count: 0,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    fn batch(&self, step: u64) -> Result<Vec<Example>> {
        let b = self.config.batch_size as u64;
        (step * b..(step + 1) * b)
            .into_par_iter()
            .map(|i| {
                draw_target(&self.spec, &self.sampler, Stream::Train, i, &self.grid)
                    .map(|d| Example::new(i, d.response))
            })
            .collect()
    }

    /// Runs one optimizer step and returns the batch loss.
    pub fn step(&mut self) -> Result<f64> {
        let step = self.state.step;
        let batch = self.batch(step)?;
        let non_finite = |draw_index| Error::NonFiniteLoss {
            step,
            seed: self.config.seed,
            draw_index,
        };
        let (loss, mut grad) = match batch_loss_and_grad(&self.model, &batch, &self.grid) {
            Ok(r) if r.0.is_finite() && r.1.iter().all(|g| g.is_finite()) => r,
            Ok(_) => return Err(non_finite(batch[0].draw_index)),
            Err((i, Error::DegenerateResponse(_))) => return Err(non_finite(batch[i].draw_index)),
            Err((_, e)) => return Err(e),
        };
        clip_grad_norm(&mut grad, self.config.grad_clip_norm);
        let lr = self.config.lr_at(step);
        adamw_update(self.model.params_mut(), &grad, &mut self.state, &self.config, lr);
        self.state.step += 1;
        self.epoch_loss += loss;
        self.epoch_count += 1;
        Ok(loss)
    }

    /// Trains until `total_steps`, calling `on_epoch` at each epoch end.
    pub fn run(&mut self, mut on_epoch: impl FnMut(&EpochLog, &Self)) -> Result<Vec<EpochLog>> {
        let per_epoch = self.config.steps_per_epoch();
        let mut logs = Vec::new();
        while self.state.step < self.config.total_steps() {
            self.step()?;
            if self.state.step % per_epoch == 0 {
                let log = EpochLog {
                    epoch: self.state.step / per_epoch,
                    step: self.state.step,
                    lr: self.config.lr_at(self.state.step - 1),
                    mean_db_mse: self.epoch_loss / self.epoch_count as f64,
                };
                self.epoch_loss = 0.0;
                self.epoch_count = 0;
                on_epoch(&log, self);
                logs.push(log);
            }
        }
        Ok(logs)
    }
}

/// Trains a model from scratch under `config`.
pub fn train(config: TrainConfig) -> Result<(MlpModel<f32>, Vec<EpochLog>)> {
    let mut t = Trainer::new(config)?;
    let logs = t.run(|_, _| {})?;
    Ok((t.model, logs))
}
