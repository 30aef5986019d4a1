//! Random target filters.
//!
//! Six families of random polynomials (A–F) plus their uniform mixture (G).
//! Every draw is addressed by `(seed, stream, index)` so datasets can be
//! regenerated in any order, on any number of workers, bit for bit.

mod dataset;
mod eq;
pub mod stats;

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dsp::{
    cascade_response_db, coeff_response_db, CoefficientFilter, FilterCascade, FrequencyGrid,
    MagnitudeResponse, Section,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly;

pub use dataset::{DatasetManifest, DatasetRecord};
pub use eq::{high_shelf, low_shelf, peaking, EqBand, EqRanges, ParametricEqParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyId {
    /// Normal coefficients.
    A,
    /// Normal biquads.
    B,
    /// Uniform disk.
    C,
    /// Uniform magnitude.
    D,
    /// Characteristic polynomial of a Gaussian matrix.
    E,
    /// Uniform parametric EQ.
    F,
    /// Uniform mixture of A–F.
    G,
}

impl FamilyId {
    pub const ALL: [FamilyId; 7] = [Self::A, Self::B, Self::C, Self::D, Self::E, Self::F, Self::G];
    pub const BASE: [FamilyId; 6] = [Self::A, Self::B, Self::C, Self::D, Self::E, Self::F];

    pub fn name(self) -> &'static str {
        match self {
            Self::A => "normal coefficients",
            Self::B => "normal biquads",
            Self::C => "uniform disk",
            Self::D => "uniform magnitude",
            Self::E => "characteristic polynomial",
            Self::F => "uniform parametric EQ",
            Self::G => "all families",
        }
    }

    pub fn min_order(self) -> usize {
        match self {
            Self::F | Self::G => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Self::A),
            "B" => Ok(Self::B),
            "C" => Ok(Self::C),
            "D" => Ok(Self::D),
            "E" => Ok(Self::E),
            "F" => Ok(Self::F),
            "G" => Ok(Self::G),
            other => Err(Error::invalid(format!("unknown filter family `{other}`"))),
        }
    }
}

/// Disjoint random-number namespaces. Training, evaluation and standalone
/// generation never share a key, whatever the indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Train = 0x7472_6169_6e00_0001,
    Eval = 0x6576_616c_0000_0002,
    Generate = 0x6765_6e00_0000_0003,
    Init = 0x696e_6974_0000_0004,
    Design = 0x6465_7369_676e_0005,
}

/// Independent generator for one draw. `attempt` distinguishes resamples of
/// the same index after a degenerate draw.
pub fn draw_rng(seed: u64, stream: Stream, index: u64, attempt: u32) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(stream as u64).to_le_bytes());
    key[16..20].copy_from_slice(&attempt.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomFilterSpec {
    pub family: FamilyId,
    pub order: usize,
    pub seed: u64,
}

impl RandomFilterSpec {
    pub fn new(family: FamilyId, order: usize, seed: u64) -> Result<Self> {
        check_order(family, order)?;
        Ok(Self {
            family,
            order,
            seed,
        })
    }
}

fn check_order(family: FamilyId, order: usize) -> Result<()> {
    if order % 2 != 0 || order < family.min_order() {
        return Err(Error::invalid(format!(
            "family {family} needs an even order >= {}, got {order}",
            family.min_order()
        )));
    }
    Ok(())
}

/// Knobs shared by the samplers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub sample_rate_hz: f64,
    pub eq_ranges: EqRanges,
    /// Eigenvalue scale for family E is `eigen_scale_power`-th root of `1/N`:
    /// 0.5 gives the circular-law `1/√N`, 1.0 the literal `1/N`.
    pub eigen_scale_power: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 44100.0,
            eq_ranges: EqRanges::default(),
            eigen_scale_power: 0.5,
        }
    }
}

/// A sampled target, in whichever form its family produces.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetFilter {
    Coefficients(CoefficientFilter),
    Cascade(FilterCascade),
}

impl TargetFilter {
    pub fn order(&self) -> usize {
        match self {
            Self::Coefficients(c) => c.order(),
            Self::Cascade(c) => c.order(),
        }
    }

    pub fn to_coefficients(&self) -> CoefficientFilter {
        match self {
            Self::Coefficients(c) => c.clone(),
            Self::Cascade(c) => c.to_coefficients(),
        }
    }

    /// `(zeros, poles)` including conjugates.
    pub fn roots(&self) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        match self {
            Self::Cascade(c) => {
                let expand = |rs: &[Complex64]| rs.iter().flat_map(|r| [*r, r.conj()]).collect();
                Ok((expand(&c.zeros), expand(&c.poles)))
            }
            Self::Coefficients(c) => match &c.sections {
                Some(sections) => {
                    let mut zeros = Vec::new();
                    let mut poles = Vec::new();
                    for s in sections {
                        zeros.extend(poly::roots(&s.b)?);
                        poles.extend(poly::roots(&s.a)?);
                    }
                    Ok((zeros, poles))
                }
                None => Ok((poly::roots(&c.numerator)?, poly::roots(&c.denominator)?)),
            },
        }
    }
}

pub fn target_response(filter: &TargetFilter, grid: &FrequencyGrid) -> Result<MagnitudeResponse> {
    match filter {
        TargetFilter::Coefficients(c) => coeff_response_db(c, grid),
        TargetFilter::Cascade(c) => cascade_response_db(c, grid),
    }
}

fn normal_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Family A: i.i.d. standard-normal coefficients for numerator and
/// denominator.
pub fn sample_family_a<R: Rng + ?Sized>(order: usize, rng: &mut R) -> Result<CoefficientFilter> {
    check_order(FamilyId::A, order)?;
    let num = normal_vec(order + 1, rng);
    let den = normal_vec(order + 1, rng);
    CoefficientFilter::new(num, den)
}

/// Family B: products of `N/2` quadratics with standard-normal coefficients.
pub fn sample_family_b<R: Rng + ?Sized>(order: usize, rng: &mut R) -> Result<CoefficientFilter> {
    check_order(FamilyId::B, order)?;
    let sections = (0..order / 2)
        .map(|_| {
            let b = [0; 3].map(|_| rng.sample::<f64, _>(StandardNormal));
            let a = [0; 3].map(|_| rng.sample::<f64, _>(StandardNormal));
            Section { b, a }
        })
        .collect();
    Ok(CoefficientFilter::from_sections(sections))
}

#[derive(Clone, Copy, Debug)]
pub enum RadialLaw {
    /// `r = √U`: uniform over the disk area.
    AreaUniform,
    /// `r = U`: uniform in magnitude.
    MagnitudeUniform,
}

pub fn sample_disk_root<R: Rng + ?Sized>(law: RadialLaw, rng: &mut R) -> Complex64 {
    let theta = rng.random_range(0.0..TAU);
    let u: f64 = rng.random();
    let r = match law {
        RadialLaw::AreaUniform => u.sqrt(),
        RadialLaw::MagnitudeUniform => u,
    };
    Complex64::from_polar(r, theta)
}

fn disk_cascade<R: Rng + ?Sized>(
    family: FamilyId,
    law: RadialLaw,
    order: usize,
    rng: &mut R,
) -> Result<FilterCascade> {
    check_order(family, order)?;
    let k = order / 2;
    let zeros = (0..k).map(|_| sample_disk_root(law, rng)).collect();
    let poles = (0..k).map(|_| sample_disk_root(law, rng)).collect();
    FilterCascade::new(1.0, poles, zeros)
}

/// Family C: roots uniform over the unit disk.
pub fn sample_family_c<R: Rng + ?Sized>(order: usize, rng: &mut R) -> Result<FilterCascade> {
    disk_cascade(FamilyId::C, RadialLaw::AreaUniform, order, rng)
}

/// Family D: roots uniform in magnitude and argument.
pub fn sample_family_d<R: Rng + ?Sized>(order: usize, rng: &mut R) -> Result<FilterCascade> {
    disk_cascade(FamilyId::D, RadialLaw::MagnitudeUniform, order, rng)
}

/// Eigenvalues of an `n × n` standard Gaussian matrix times `n^-power`.
pub fn gaussian_matrix_eigenvalues<R: Rng + ?Sized>(
    n: usize,
    power: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let m = normal_vec(n * n, rng);
    let scale = (n as f64).powf(-power);
    Ok(linalg::eigenvalues(&m, n)?
        .into_iter()
        .map(|e| e * scale)
        .collect())
}

/// Family E roots: `(zeros, poles)` from two independent Gaussian matrices.
pub fn sample_family_e_roots<R: Rng + ?Sized>(
    order: usize,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    check_order(FamilyId::E, order)?;
    let poles = gaussian_matrix_eigenvalues(order, cfg.eigen_scale_power, rng)?;
    let zeros = gaussian_matrix_eigenvalues(order, cfg.eigen_scale_power, rng)?;
    Ok((zeros, poles))
}

/// Family E: characteristic polynomials of scaled Gaussian matrices.
///
/// Real eigenvalues cannot be written as a conjugate pair, so the filter is
/// returned in section form: complex pairs become one section each and the
/// real eigenvalues are paired off in sorted order.
pub fn sample_family_e<R: Rng + ?Sized>(
    order: usize,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<CoefficientFilter> {
    let (zeros, poles) = sample_family_e_roots(order, cfg, rng)?;
    let num = poly::pair_into_quadratics(&zeros);
    let den = poly::pair_into_quadratics(&poles);
    let sections = num.into_iter().zip(den).map(|(b, a)| Section { b, a }).collect();
    Ok(CoefficientFilter::from_sections(sections))
}

/// Family F: random parametric EQ (two shelves plus `(N-4)/2` peaks).
pub fn sample_family_f<R: Rng + ?Sized>(
    order: usize,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<CoefficientFilter> {
    check_order(FamilyId::F, order)?;
    let params = ParametricEqParams::sample(order, &cfg.eq_ranges, cfg.sample_rate_hz, rng);
    Ok(CoefficientFilter::from_sections(params.sections(cfg.sample_rate_hz)))
}

/// Family G: picks one of A–F uniformly, then delegates.
pub fn sample_family_g<R: Rng + ?Sized>(
    order: usize,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<(FamilyId, TargetFilter)> {
    check_order(FamilyId::G, order)?;
    let family = FamilyId::BASE[rng.random_range(0..FamilyId::BASE.len())];
    Ok((family, sample_base(family, order, cfg, rng)?))
}

fn sample_base<R: Rng + ?Sized>(
    family: FamilyId,
    order: usize,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<TargetFilter> {
    Ok(match family {
        FamilyId::A => TargetFilter::Coefficients(sample_family_a(order, rng)?),
        FamilyId::B => TargetFilter::Coefficients(sample_family_b(order, rng)?),
        FamilyId::C => TargetFilter::Cascade(sample_family_c(order, rng)?),
        FamilyId::D => TargetFilter::Cascade(sample_family_d(order, rng)?),
        FamilyId::E => TargetFilter::Coefficients(sample_family_e(order, cfg, rng)?),
        FamilyId::F => TargetFilter::Coefficients(sample_family_f(order, cfg, rng)?),
        FamilyId::G => unreachable!("mixture handled by sample_family_g"),
    })
}

/// Samples from any family; for G the concrete family is returned as well.
pub fn sample<R: Rng + ?Sized>(
    family: FamilyId,
    order: usize,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<(FamilyId, TargetFilter)> {
    match family {
        FamilyId::G => sample_family_g(order, cfg, rng),
        f => {
            check_order(f, order)?;
            Ok((f, sample_base(f, order, cfg, rng)?))
        }
    }
}

/// Attempts per draw index before a degenerate sampler is reported.
pub const MAX_RESAMPLES: u32 = 32;

/// A target filter and its response for draw `index` of `stream`.
///
/// Draws whose response is degenerate (a pole on the grid) or whose
/// eigensolver fails are resampled under the next attempt number.
#[derive(Clone, Debug)]
pub struct Draw {
    pub index: u64,
    pub family: FamilyId,
    pub filter: TargetFilter,
    pub response: MagnitudeResponse,
}

pub fn draw_target(
    spec: &RandomFilterSpec,
    cfg: &SamplerConfig,
    stream: Stream,
    index: u64,
    grid: &FrequencyGrid,
) -> Result<Draw> {
    let mut last_err = None;
    for attempt in 0..MAX_RESAMPLES {
        let mut rng = draw_rng(spec.seed, stream, index, attempt);
        let result = sample(spec.family, spec.order, cfg, &mut rng).and_then(|(family, filter)| {
            let response = target_response(&filter, grid)?;
            Ok((family, filter, response))
        });
        match result {
            Ok((family, filter, response)) => {
                return Ok(Draw {
                    index,
                    family,
                    filter,
                    response,
                })
            }
            Err(e) if e.is_numeric() => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}
