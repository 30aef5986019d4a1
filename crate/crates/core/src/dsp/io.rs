//! `freq_hz,mag_db` CSV files.

use std::fmt::Write as _;
use std::path::Path;

use super::{FrequencyGrid, MagnitudeResponse};
use crate::error::{Error, Result};

pub fn response_to_csv(r: &MagnitudeResponse) -> String {
    let mut s = String::from("freq_hz,mag_db\n");
    for (f, v) in r.grid.freqs_hz().zip(&r.values_db) {
        let _ = writeln!(s, "{f},{v}");
    }
    s
}

pub fn write_response_csv(r: &MagnitudeResponse, path: &Path) -> Result<()> {
    std::fs::write(path, response_to_csv(r)).map_err(|e| Error::io(path, e))
}

/// Parses a response CSV. The frequencies must start at 0 Hz and be linearly
/// spaced; the sample rate is taken as twice the last frequency.
pub fn response_from_csv(text: &str) -> Result<MagnitudeResponse> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "freq_hz,mag_db" => {}
        _ => return Err(Error::Format("expected header `freq_hz,mag_db`".into())),
    }
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines {
        let mut parts = line.split(',');
        let parse = |p: Option<&str>| -> Result<f64> {
            p.and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Format(format!("line {}: bad row `{line}`", lineno + 1)))
        };
        freqs.push(parse(parts.next())?);
        values.push(parse(parts.next())?);
        if parts.next().is_some() {
            return Err(Error::Format(format!("line {}: too many columns", lineno + 1)));
        }
    }
    if freqs.len() < 2 {
        return Err(Error::Format("need at least two rows".into()));
    }
    if freqs[0] != 0.0 {
        return Err(Error::Format("first frequency must be 0 Hz".into()));
    }
    let last = *freqs.last().unwrap();
    let step = last / (freqs.len() - 1) as f64;
    for (j, f) in freqs.iter().enumerate() {
        if (f - step * j as f64).abs() > 1e-6 * step.max(1.0) {
            return Err(Error::Format(format!(
                "frequencies are not linearly spaced at row {}",
                j + 1
            )));
        }
    }
    let grid = FrequencyGrid::new(freqs.len(), 2.0 * last)?;
    MagnitudeResponse::new(grid, values)
}

pub fn read_response_csv(path: &Path) -> Result<MagnitudeResponse> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    response_from_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::make_grid;

    #[test]
    fn csv_round_trip_is_exact() {
        let g = make_grid(512, 44100.0).unwrap();
        let values = (0..512).map(|j| (j as f64 * 0.37).sin() * 12.3456789).collect();
        let r = MagnitudeResponse::new(g, values).unwrap();
        let back = response_from_csv(&response_to_csv(&r)).unwrap();
        assert_eq!(back.values_db, r.values_db);
        assert_eq!(back.grid.sample_rate_hz(), 44100.0);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(response_from_csv("f,m\n0,1\n1,2\n").is_err());
        assert!(response_from_csv("freq_hz,mag_db\n0,1\n").is_err());
        assert!(response_from_csv("freq_hz,mag_db\n1,1\n2,2\n").is_err());
        assert!(response_from_csv("freq_hz,mag_db\n0,1\n1,x\n").is_err());
        assert!(response_from_csv("freq_hz,mag_db\n0,1\n1,1\n3,1\n").is_err());
    }
}

// Filter JSON formats.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CoefficientFilter, FilterCascade, Section};
use crate::poly;

/// `{"order": N, "gain": g, "sections": [[b0,b1,b2,a0,a1,a2], ...]}` with
/// every section normalized to `a0 = 1`. The filter is
/// `gain · Π sections`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterJson {
    pub order: usize,
    pub gain: f64,
    pub sections: Vec<[f64; 6]>,
}

impl FilterJson {
    /// Filters without stored sections are factored through their roots.
    pub fn from_filter(filter: &CoefficientFilter) -> Result<Self> {
        let (gain, sections) = match &filter.sections {
            Some(s) => (1.0, s.iter().map(|s| s.normalized()).collect::<Vec<_>>()),
            None => factor_sections(filter)?,
        };
        Ok(Self {
            order: filter.order(),
            gain,
            sections: sections.iter().map(Section::as_array).collect(),
        })
    }

    pub fn to_filter(&self) -> Result<CoefficientFilter> {
        if self.sections.is_empty() {
            return Err(Error::Format("filter has no sections".into()));
        }
        let mut sections: Vec<Section> = self
            .sections
            .iter()
            .map(|s| Section {
                b: [s[0], s[1], s[2]],
                a: [s[3], s[4], s[5]],
            })
            .collect();
        if sections.iter().any(|s| s.a[0] == 0.0) {
            return Err(Error::Format("section with a0 = 0".into()));
        }
        sections[0].b = sections[0].b.map(|v| v * self.gain);
        Ok(CoefficientFilter::from_sections(sections))
    }
}

fn factor_sections(filter: &CoefficientFilter) -> Result<(f64, Vec<Section>)> {
    let (b, a) = (&filter.numerator, &filter.denominator);
    if b[0] == 0.0 || a[0] == 0.0 {
        return Err(Error::Format(
            "cannot factor a filter with a leading zero coefficient".into(),
        ));
    }
    let num = poly::pair_into_quadratics(&poly::roots(b)?);
    let den = poly::pair_into_quadratics(&poly::roots(a)?);
    let k = num.len().max(den.len());
    let pad = |mut v: Vec<[f64; 3]>| {
        v.resize(k, [1.0, 0.0, 0.0]);
        v
    };
    let sections = pad(num)
        .into_iter()
        .zip(pad(den))
        .map(|(b, a)| Section { b, a })
        .collect();
    Ok((b[0] / a[0], sections))
}

/// `{"gain": g, "poles": [[re, im], ...], "zeros": [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeJson {
    pub gain: f64,
    pub poles: Vec<[f64; 2]>,
    pub zeros: Vec<[f64; 2]>,
}

impl From<&FilterCascade> for CascadeJson {
    fn from(c: &FilterCascade) -> Self {
        let pairs = |rs: &[Complex64]| rs.iter().map(|r| [r.re, r.im]).collect();
        Self {
            gain: c.gain,
            poles: pairs(&c.poles),
            zeros: pairs(&c.zeros),
        }
    }
}

impl CascadeJson {
    pub fn to_cascade(&self) -> Result<FilterCascade> {
        let roots = |v: &[[f64; 2]]| v.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        FilterCascade::new(self.gain, roots(&self.poles), roots(&self.zeros))
    }
}
