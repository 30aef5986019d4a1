//! Stand-in impulse-response sets built from known filters, so the
//! evaluation pipeline runs without third-party recordings.

use rand::Rng;

use crate::dsp::Section;
use crate::randfilt::{draw_rng, high_shelf, low_shelf, peaking, EqBand, Stream};

use super::ImpulseResponse;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyntheticSet {
    /// Short responses with pinna-like notches and a broad concha peak.
    HrtfLike,
    /// Longer responses with a low-frequency resonance, presence peaks and a
    /// steep high-frequency roll-off.
    CabinetLike,
}

impl SyntheticSet {
    pub fn name(self) -> &'static str {
        match self {
            Self::HrtfLike => "synthetic-hrtf",
            Self::CabinetLike => "synthetic-cabinet",
        }
    }

    pub fn ir_length(self) -> usize {
        match self {
            Self::HrtfLike => 512,
            Self::CabinetLike => 4096,
        }
    }
}

/// Runs a unit impulse through a cascade of normalized sections.
pub fn cascade_impulse_response(sections: &[Section], len: usize) -> Vec<f64> {
    let mut x = vec![0.0; len];
    x[0] = 1.0;
    for s in sections {
        let s = s.normalized();
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        for v in x.iter_mut() {
            let y = s.b[0] * *v + s.b[1] * x1 + s.b[2] * x2 - s.a[1] * y1 - s.a[2] * y2;
            (x2, x1) = (x1, *v);
            (y2, y1) = (y1, y);
            *v = y;
        }
    }
    x
}

fn hrtf_sections<R: Rng + ?Sized>(fs: f64, rng: &mut R) -> Vec<Section> {
    let mut s = vec![peaking(
        EqBand {
            freq_hz: rng.random_range(2500.0..4500.0),
            gain_db: rng.random_range(6.0..15.0),
            q: rng.random_range(0.8..2.0),
        },
        fs,
    )];
    for _ in 0..rng.random_range(2..=4) {
        s.push(peaking(
            EqBand {
                freq_hz: rng.random_range(5500.0..14000.0),
                gain_db: rng.random_range(-25.0..-6.0),
                q: rng.random_range(3.0..10.0),
            },
            fs,
        ));
    }
    s.push(high_shelf(
        EqBand {
            freq_hz: rng.random_range(9000.0..16000.0),
            gain_db: rng.random_range(-12.0..3.0),
            q: 0.7,
        },
        fs,
    ));
    s
}

fn cabinet_sections<R: Rng + ?Sized>(fs: f64, rng: &mut R) -> Vec<Section> {
    let mut s = vec![
        peaking(
            EqBand {
                freq_hz: rng.random_range(80.0..140.0),
                gain_db: rng.random_range(4.0..10.0),
                q: rng.random_range(1.0..3.0),
            },
            fs,
        ),
        low_shelf(
            EqBand {
                freq_hz: rng.random_range(50.0..80.0),
                gain_db: rng.random_range(-24.0..-12.0),
                q: 0.7,
            },
            fs,
        ),
    ];
    for _ in 0..3 {
        s.push(peaking(
            EqBand {
                freq_hz: rng.random_range(1500.0..4000.0),
                gain_db: rng.random_range(-6.0..8.0),
                q: rng.random_range(1.0..5.0),
            },
            fs,
        ));
    }
    let corner = rng.random_range(4500.0..6500.0);
    for _ in 0..2 {
        s.push(high_shelf(
            EqBand {
                freq_hz: corner,
                gain_db: -24.0,
                q: 0.7,
            },
            fs,
        ));
    }
    s
}

/// `count` responses of the given set at `fs`, reproducible from `seed`.
pub fn synthetic_ir_set(set: SyntheticSet, count: usize, seed: u64, fs: f64) -> Vec<ImpulseResponse> {
    (0..count)
        .map(|i| {
            let mut rng = draw_rng(seed, Stream::Generate, i as u64, 0);
            let sections = match set {
                SyntheticSet::HrtfLike => hrtf_sections(fs, &mut rng),
                SyntheticSet::CabinetLike => cabinet_sections(fs, &mut rng),
            };
            let samples = cascade_impulse_response(&sections, set.ir_length());
            ImpulseResponse::new(samples, fs, 0).expect("stable sections give finite responses")
        })
        .collect()
}
