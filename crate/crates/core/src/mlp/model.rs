use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis, LinalgScalar};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LRELU_ALPHA: f64 = 0.2;
pub const LAYER_NORM_EPS: f64 = 1e-8;

/// Floating-point element type of a model. `f32` for training and
/// inference; `f64` for gradient verification.
pub trait Real: LinalgScalar + PartialOrd + Send + Sync + std::fmt::Debug {
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
}

impl Real for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn sqrt(self) -> Self {
        f32::sqrt(self)
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub order: usize,
}

/// Offsets of each tensor inside the flat parameter vector.
#[derive(Clone, Copy, Debug)]
struct Layout {
    w1: usize,
    b1: usize,
    g1: usize,
    be1: usize,
    w2: usize,
    b2: usize,
    g2: usize,
    be2: usize,
    w3: usize,
    b3: usize,
    end: usize,
}

impl MlpShape {
    pub fn new(input_dim: usize, hidden_dim: usize, order: usize) -> Result<Self> {
        if input_dim < 2 || hidden_dim < 2 {
            return Err(Error::invalid("input and hidden dimensions must be at least 2"));
        }
        if order < 2 || order % 2 != 0 {
            return Err(Error::invalid(format!("filter order must be even and >= 2, got {order}")));
        }
        Ok(Self {
            input_dim,
            hidden_dim,
            order,
        })
    }

    pub fn output_dim(&self) -> usize {
        2 * self.order + 1
    }

    pub fn param_count(&self) -> usize {
        self.layout().end
    }

    /// `(linear weights, linear biases, normalization gains/offsets)`.
    pub fn param_breakdown(&self) -> (usize, usize, usize) {
        let (f, d, o) = (self.input_dim, self.hidden_dim, self.output_dim());
        (d * f + d * d + o * d, 2 * d + o, 4 * d)
    }

    /// Order: W1 (D×F), b1, γ1, β1, W2 (D×D), b2, γ2, β2, W3 (O×D), b3.
    /// Matrices are row-major with one row per output unit.
    fn layout(&self) -> Layout {
        let (f, d, o) = (self.input_dim, self.hidden_dim, self.output_dim());
        let w1 = 0;
        let b1 = w1 + d * f;
        let g1 = b1 + d;
        let be1 = g1 + d;
        let w2 = be1 + d;
        let b2 = w2 + d * d;
        let g2 = b2 + d;
        let be2 = g2 + d;
        let w3 = be2 + d;
        let b3 = w3 + o * d;
        Layout {
            w1,
            b1,
            g1,
            be1,
            w2,
            b2,
            g2,
            be2,
            w3,
            b3,
            end: b3 + o,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel<T: Real = f32> {
    shape: MlpShape,
    params: Vec<T>,
}

/// Activations kept from a batched forward pass.
#[derive(Debug)]
pub struct ForwardCache<T: Real> {
    x: Array2<T>,
    layers: [NormCache<T>; 2],
    pub output: Array2<T>,
}

#[derive(Debug)]
struct NormCache<T: Real> {
    xhat: Array2<T>,
    inv_std: Array1<T>,
    /// Post-normalization, pre-activation values.
    pre: Array2<T>,
    act: Array2<T>,
}

struct Views<'a, T> {
    w1: ArrayView2<'a, T>,
    b1: ArrayView1<'a, T>,
    g1: ArrayView1<'a, T>,
    be1: ArrayView1<'a, T>,
    w2: ArrayView2<'a, T>,
    b2: ArrayView1<'a, T>,
    g2: ArrayView1<'a, T>,
    be2: ArrayView1<'a, T>,
    w3: ArrayView2<'a, T>,
    b3: ArrayView1<'a, T>,
}

impl<T: Real> MlpModel<T> {
    /// Uniform `±1/√fan_in` weights, zero biases, unit normalization gains.
    pub fn new_init<R: Rng + ?Sized>(shape: MlpShape, rng: &mut R) -> Self {
        let mut m = Self::zeros(shape);
        let l = shape.layout();
        let (f, d) = (shape.input_dim, shape.hidden_dim);
        let mut fill = |start: usize, len: usize, fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in &mut m.params[start..start + len] {
                *p = T::from_f64(rng.random_range(-bound..bound));
            }
        };
        fill(l.w1, d * f, f);
        fill(l.w2, d * d, d);
        fill(l.w3, shape.output_dim() * d, d);
        m
    }

    /// All weights and biases zero, unit normalization gains.
    pub fn zeros(shape: MlpShape) -> Self {
        let l = shape.layout();
        let mut params = vec![T::zero(); l.end];
        let d = shape.hidden_dim;
        params[l.g1..l.g1 + d].fill(T::one());
        params[l.g2..l.g2 + d].fill(T::one());
        Self { shape, params }
    }

    pub fn from_params(shape: MlpShape, params: Vec<T>) -> Result<Self> {
        if params.len() != shape.param_count() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                shape.param_count(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.to_f64().is_finite()) {
            return Err(Error::invalid("model parameters must be finite"));
        }
        Ok(Self { shape, params })
    }

    pub fn shape(&self) -> MlpShape {
        self.shape
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn cast<U: Real>(&self) -> MlpModel<U> {
        MlpModel {
            shape: self.shape,
            params: self.params.iter().map(|p| U::from_f64(p.to_f64())).collect(),
        }
    }

    fn views(&self) -> Views<'_, T> {
        let l = self.shape.layout();
        let (f, d, o) = (self.shape.input_dim, self.shape.hidden_dim, self.shape.output_dim());
        let p = &self.params;
        let mat = |at: usize, r: usize, c: usize| ArrayView2::from_shape((r, c), &p[at..at + r * c]).unwrap();
        let vec = |at: usize, n: usize| ArrayView1::from(&p[at..at + n]);
        Views {
            w1: mat(l.w1, d, f),
            b1: vec(l.b1, d),
            g1: vec(l.g1, d),
            be1: vec(l.be1, d),
            w2: mat(l.w2, d, d),
            b2: vec(l.b2, d),
            g2: vec(l.g2, d),
            be2: vec(l.be2, d),
            w3: mat(l.w3, o, d),
            b3: vec(l.b3, o),
        }
    }

    /// Network outputs for a single input, in the cascade parameter layout.
    /// Uses matrix-vector products, which avoid the batched path's packing
    /// overhead for a single row.
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.shape.input_dim {
            return Err(Error::GridMismatch {
                left: x.len(),
                right: self.shape.input_dim,
            });
        }
        let v = self.views();
        let h1 = hidden_vec(v.w1.dot(&ArrayView1::from(x)) + &v.b1, v.g1, v.be1);
        let h2 = hidden_vec(v.w2.dot(&h1) + &v.b2, v.g2, v.be2);
        Ok((v.w3.dot(&h2) + &v.b3).to_vec())
    }

    pub fn forward_batch(&self, x: ArrayView2<T>) -> Result<ForwardCache<T>> {
        if x.ncols() != self.shape.input_dim {
            return Err(Error::GridMismatch {
                left: x.ncols(),
                right: self.shape.input_dim,
            });
        }
        let v = self.views();
        let l1 = hidden_block(x.dot(&v.w1.t()) + &v.b1, v.g1, v.be1);
        let l2 = hidden_block(l1.act.dot(&v.w2.t()) + &v.b2, v.g2, v.be2);
        let output = l2.act.dot(&v.w3.t()) + &v.b3;
        Ok(ForwardCache {
            x: x.to_owned(),
            layers: [l1, l2],
            output,
        })
    }

    /// Accumulates `dL/dθ` into `grad` given `dL/d(output)`.
    pub fn backward(&self, cache: &ForwardCache<T>, dout: ArrayView2<T>, grad: &mut [T]) {
        let l = self.shape.layout();
        let (f, d, o) = (self.shape.input_dim, self.shape.hidden_dim, self.shape.output_dim());
        let v = self.views();
        let [c1, c2] = &cache.layers;

        let (g_w1, rest) = grad.split_at_mut(l.b1);
        let (g_b1, rest) = rest.split_at_mut(d);
        let (g_g1, rest) = rest.split_at_mut(d);
        let (g_be1, rest) = rest.split_at_mut(d);
        let (g_w2, rest) = rest.split_at_mut(d * d);
        let (g_b2, rest) = rest.split_at_mut(d);
        let (g_g2, rest) = rest.split_at_mut(d);
        let (g_be2, rest) = rest.split_at_mut(d);
        let (g_w3, g_b3) = rest.split_at_mut(o * d);
        debug_assert_eq!(g_w1.len(), d * f);


        // Output projection.
        mat(g_w3, o, d).scaled_add(T::one(), &dout.t().dot(&c2.act));
        vec(g_b3).scaled_add(T::one(), &dout.sum_axis(Axis(0)));
        let da2 = dout.dot(&v.w3);

        let dh2 = hidden_block_backward(c2, v.g2, da2, vec(g_g2), vec(g_be2));
        mat(g_w2, d, d).scaled_add(T::one(), &dh2.t().dot(&c1.act));
        vec(g_b2).scaled_add(T::one(), &dh2.sum_axis(Axis(0)));
        let da1 = dh2.dot(&v.w2);

        let dh1 = hidden_block_backward(c1, v.g1, da1, vec(g_g1), vec(g_be1));
        mat(g_w1, d, f).scaled_add(T::one(), &dh1.t().dot(&cache.x));
        vec(g_b1).scaled_add(T::one(), &dh1.sum_axis(Axis(0)));
    }
}

fn mat<T>(s: &mut [T], r: usize, c: usize) -> ArrayViewMut2<'_, T> {
    ArrayViewMut2::from_shape((r, c), s).unwrap()
}

fn vec<T>(s: &mut [T]) -> ArrayViewMut1<'_, T> {
    ArrayViewMut1::from(s)
}

/// Row-wise normalization to zero mean and unit variance.
pub fn layer_norm<T: Real>(h: &Array2<T>) -> (Array2<T>, Array1<T>) {
    let n = T::from_f64(h.ncols() as f64);
    let eps = T::from_f64(LAYER_NORM_EPS);
    let mut xhat = h.clone();
    let mut inv_std = Array1::zeros(h.nrows());
    for (mut row, is) in xhat.rows_mut().into_iter().zip(inv_std.iter_mut()) {
        let mean = row.sum() / n;
        row.mapv_inplace(|x| x - mean);
        let var = row.fold(T::zero(), |a, &x| a + x * x) / n;
        *is = T::one() / (var + eps).sqrt();
        let s = *is;
        row.mapv_inplace(|x| x * s);
    }
    (xhat, inv_std)
}

fn hidden_block<T: Real>(h: Array2<T>, gamma: ArrayView1<T>, beta: ArrayView1<T>) -> NormCache<T> {
    let (xhat, inv_std) = layer_norm(&h);
    let pre = &xhat * &gamma + &beta;
    let alpha = T::from_f64(LRELU_ALPHA);
    let act = pre.mapv(|x| if x > T::zero() { x } else { alpha * x });
    NormCache {
        xhat,
        inv_std,
        pre,
        act,
    }
}

fn hidden_vec<T: Real>(mut h: Array1<T>, gamma: ArrayView1<T>, beta: ArrayView1<T>) -> Array1<T> {
    let n = T::from_f64(h.len() as f64);
    let mean = h.sum() / n;
    h.mapv_inplace(|x| x - mean);
    let var = h.iter().fold(T::zero(), |acc, &x| acc + x * x) / n;
    let inv_std = T::one() / (var + T::from_f64(LAYER_NORM_EPS)).sqrt();
    let alpha = T::from_f64(LRELU_ALPHA);
    ndarray::Zip::from(&mut h).and(&gamma).and(&beta).for_each(|x, &g, &b| {
        let pre = *x * inv_std * g + b;
        *x = if pre > T::zero() { pre } else { alpha * pre };
    });
    h
}

/// Returns `dL/dh` (the linear layer's output) and accumulates the
/// normalization gain and offset gradients.
fn hidden_block_backward<T: Real>(
    c: &NormCache<T>,
    gamma: ArrayView1<T>,
    dact: Array2<T>,
    mut g_gamma: ArrayViewMut1<T>,
    mut g_beta: ArrayViewMut1<T>,
) -> Array2<T> {
    let alpha = T::from_f64(LRELU_ALPHA);
    let mut dpre = dact;
    ndarray::Zip::from(&mut dpre)
        .and(&c.pre)
        .for_each(|g, &p| {
            if !(p > T::zero()) {
                *g = *g * alpha
            }
        });
    g_gamma.scaled_add(T::one(), &(&dpre * &c.xhat).sum_axis(Axis(0)));
    g_beta.scaled_add(T::one(), &dpre.sum_axis(Axis(0)));

    let n = T::from_f64(dpre.ncols() as f64);
    let mut dxhat = dpre * &gamma;
    for ((mut row, xh), &is) in dxhat.rows_mut().into_iter().zip(c.xhat.rows()).zip(&c.inv_std) {
        let mean_g = row.sum() / n;
        let mean_gx = row.iter().zip(xh).fold(T::zero(), |a, (&g, &x)| a + g * x) / n;
        ndarray::Zip::from(&mut row)
            .and(&xh)
            .for_each(|g, &x| *g = is * (*g - mean_g - x * mean_gx));
    }
    dxhat
}
