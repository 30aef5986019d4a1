//! Parametric EQ sections (bilinear-transform shelf and peak prototypes).

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::Section;

/// Sampling ranges for the parametric-EQ family. Frequencies are drawn
/// log-uniformly, gains and Q uniformly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqRanges {
    pub freq_lo_hz: f64,
    /// Upper frequency bound as a fraction of the sample rate.
    pub freq_hi_fraction: f64,
    pub gain_db: (f64, f64),
    pub shelf_q: (f64, f64),
    pub peak_q: (f64, f64),
}

impl Default for EqRanges {
    fn default() -> Self {
        Self {
            freq_lo_hz: 20.0,
            freq_hi_fraction: 0.45,
            gain_db: (-24.0, 24.0),
            shelf_q: (0.5, 4.0),
            peak_q: (0.1, 10.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EqBand {
    pub freq_hz: f64,
    pub gain_db: f64,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParametricEqParams {
    pub low_shelf: EqBand,
    pub high_shelf: EqBand,
    pub peaks: Vec<EqBand>,
}

impl ParametricEqParams {
    /// `order` must be even and at least 4; yields `(order - 4) / 2` peaks.
    pub fn sample<R: Rng + ?Sized>(
        order: usize,
        ranges: &EqRanges,
        sample_rate_hz: f64,
        rng: &mut R,
    ) -> Self {
        let lo = ranges.freq_lo_hz.ln();
        let hi = (ranges.freq_hi_fraction * sample_rate_hz).ln();
        let band = |q: (f64, f64), rng: &mut R| EqBand {
            freq_hz: rng.random_range(lo..hi).exp(),
            gain_db: rng.random_range(ranges.gain_db.0..=ranges.gain_db.1),
            q: rng.random_range(q.0..=q.1),
        };
        let low_shelf = band(ranges.shelf_q, rng);
        let high_shelf = band(ranges.shelf_q, rng);
        let peaks = (0..(order - 4) / 2)
            .map(|_| band(ranges.peak_q, rng))
            .collect();
        Self {
            low_shelf,
            high_shelf,
            peaks,
        }
    }

    pub fn sections(&self, sample_rate_hz: f64) -> Vec<Section> {
        let mut out = vec![
            low_shelf(self.low_shelf, sample_rate_hz),
            high_shelf(self.high_shelf, sample_rate_hz),
        ];
        out.extend(self.peaks.iter().map(|&b| peaking(b, sample_rate_hz)));
        out
    }
}

struct Prototype {
    a: f64,
    cos_w: f64,
    alpha: f64,
}

fn prototype(band: EqBand, fs: f64) -> Prototype {
    let w0 = 2.0 * PI * band.freq_hz / fs;
    Prototype {
        a: 10f64.powf(band.gain_db / 40.0),
        cos_w: w0.cos(),
        alpha: w0.sin() / (2.0 * band.q),
    }
}

pub fn peaking(band: EqBand, fs: f64) -> Section {
    let Prototype { a, cos_w, alpha } = prototype(band, fs);
    Section {
        b: [1.0 + alpha * a, -2.0 * cos_w, 1.0 - alpha * a],
        a: [1.0 + alpha / a, -2.0 * cos_w, 1.0 - alpha / a],
    }
    .normalized()
}

pub fn low_shelf(band: EqBand, fs: f64) -> Section {
    let Prototype { a, cos_w, alpha } = prototype(band, fs);
    let k = 2.0 * a.sqrt() * alpha;
    Section {
        b: [
            a * ((a + 1.0) - (a - 1.0) * cos_w + k),
            2.0 * a * ((a - 1.0) - (a + 1.0) * cos_w),
            a * ((a + 1.0) - (a - 1.0) * cos_w - k),
        ],
        a: [
            (a + 1.0) + (a - 1.0) * cos_w + k,
            -2.0 * ((a - 1.0) + (a + 1.0) * cos_w),
            (a + 1.0) + (a - 1.0) * cos_w - k,
        ],
    }
    .normalized()
}

pub fn high_shelf(band: EqBand, fs: f64) -> Section {
    let Prototype { a, cos_w, alpha } = prototype(band, fs);
    let k = 2.0 * a.sqrt() * alpha;
    Section {
        b: [
            a * ((a + 1.0) + (a - 1.0) * cos_w + k),
            -2.0 * a * ((a - 1.0) + (a + 1.0) * cos_w),
            a * ((a + 1.0) + (a - 1.0) * cos_w - k),
        ],
        a: [
            (a + 1.0) - (a - 1.0) * cos_w + k,
            2.0 * ((a - 1.0) - (a + 1.0) * cos_w),
            (a + 1.0) - (a - 1.0) * cos_w - k,
        ],
    }
    .normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{make_grid, section_response_db};

    fn response_at(section: &Section, f_hz: f64, fs: f64) -> f64 {
        let w = 2.0 * PI * f_hz / fs;
        let b = crate::poly::eval_unit_circle(&section.b, w);
        let a = crate::poly::eval_unit_circle(&section.a, w);
        20.0 * (b.norm() / a.norm()).log10()
    }

    #[test]
    fn peak_hits_its_gain_at_center() {
        let fs = 48000.0;
        let s = peaking(EqBand { freq_hz: 1000.0, gain_db: 6.0, q: 1.0 }, fs);
        assert!((response_at(&s, 1000.0, fs) - 6.0).abs() < 1e-9);
        assert!(response_at(&s, 0.0, fs).abs() < 1e-9);
    }

    #[test]
    fn shelves_reach_their_plateaus() {
        let fs = 48000.0;
        let ls = low_shelf(EqBand { freq_hz: 200.0, gain_db: -9.0, q: 0.707 }, fs);
        assert!((response_at(&ls, 0.0, fs) + 9.0).abs() < 1e-9);
        assert!(response_at(&ls, fs / 2.0, fs).abs() < 1e-2);
        let hs = high_shelf(EqBand { freq_hz: 5000.0, gain_db: 12.0, q: 0.707 }, fs);
        assert!((response_at(&hs, fs / 2.0, fs) - 12.0).abs() < 1e-9);
        assert!(response_at(&hs, 0.0, fs).abs() < 1e-9);
    }

    #[test]
    fn zero_gain_bands_are_identity() {
        let g = make_grid(512, 44100.0).unwrap();
        for q in [0.1, 0.5, 3.0, 10.0] {
            for f in [20.0, 900.0, 19000.0] {
                let band = EqBand { freq_hz: f, gain_db: 0.0, q };
                for s in [peaking(band, 44100.0), low_shelf(band, 44100.0), high_shelf(band, 44100.0)] {
                    let r = section_response_db(&s, &g).unwrap();
                    assert!(r.values_db.iter().all(|v| v.abs() < 1e-6));
                }
            }
        }
    }
}
