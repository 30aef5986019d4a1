//! Accuracy and runtime benchmarking of the three design methods.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::designers::{myw_design, sgd_design, MywConfig, SgdConfig};
use crate::dsp::{cascade_response_db, coeff_response_db, db_mse, FrequencyGrid, MagnitudeResponse};
use crate::error::{Error, Result};
use crate::mlp::{estimate, MlpModel};
use crate::randfilt::{draw_target, FamilyId, RandomFilterSpec, SamplerConfig, Stream};

/// Warm-up designs excluded from timing.
pub const DEFAULT_WARMUP: usize = 10;
pub const DEFAULT_REPEATS: usize = 1000;

#[derive(Clone, Debug)]
pub enum Method {
    IirNet(Arc<MlpModel<f32>>),
    Myw(MywConfig),
    Sgd(SgdConfig),
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Self::IirNet(m) => format!("iirnet-{}-n{}", m.shape().hidden_dim, m.shape().order),
            Self::Myw(c) => format!("myw-n{}", c.order),
            Self::Sgd(c) => format!("sgd{}-n{}", c.steps, c.order),
        }
    }

    /// The design call alone; `index` decorrelates random starts.
    fn design(&self, target: &MagnitudeResponse, index: usize) -> Result<Design> {
        Ok(match self {
            Self::IirNet(m) => Design::Cascade(estimate(m.as_ref(), target)?),
            Self::Myw(c) => Design::Coefficients(myw_design(target, c)?),
            Self::Sgd(c) => {
                let cfg = SgdConfig {
                    seed: c.seed.wrapping_add(index as u64),
                    ..c.clone()
                };
                Design::Cascade(sgd_design(target, &cfg)?.cascade)
            }
        })
    }

    /// Achieved dB-MSE on one target.
    pub fn fit_error(&self, target: &MagnitudeResponse, index: usize) -> Result<f64> {
        let fit = match self.design(target, index)? {
            Design::Cascade(c) => cascade_response_db(&c, &target.grid)?,
            Design::Coefficients(f) => coeff_response_db(&f, &target.grid)?,
        };
        let e = db_mse(&fit, target)?;
        if e.is_finite() {
            Ok(e)
        } else {
            Err(Error::degenerate("non-finite dB MSE"))
        }
    }
}

enum Design {
    Cascade(crate::dsp::FilterCascade),
    Coefficients(crate::dsp::CoefficientFilter),
}

#[derive(Clone, Debug)]
pub struct EvalSet {
    pub name: String,
    pub targets: Vec<MagnitudeResponse>,
}

/// Held-out targets from the evaluation stream, which no training draw
/// can reach.
pub fn build_eval_set(
    family: FamilyId,
    order: usize,
    count: usize,
    seed: u64,
    grid: &FrequencyGrid,
    sampler: &SamplerConfig,
) -> Result<EvalSet> {
    if count == 0 {
        return Err(Error::invalid("evaluation set needs at least one filter"));
    }
    let spec = RandomFilterSpec::new(family, order, seed)?;
    let targets = (0..count as u64)
        .into_par_iter()
        .map(|i| draw_target(&spec, sampler, Stream::Eval, i, grid).map(|d| d.response))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalSet {
        name: format!("{family}-n{order}"),
        targets,
    })
}

/// Per-filter dB-MSE; failures are kept as errors in their slot.
pub fn evaluate(method: &Method, set: &EvalSet) -> Vec<Result<f64>> {
    set.targets
        .par_iter()
        .enumerate()
        .map(|(i, t)| method.fit_error(t, i))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingStats {
    pub mean_ms: f64,
    pub p95_ms: f64,
}

/// Wall time of the design call on the current thread, cycling through
/// the set's targets. Failed designs are timed as well.
pub fn time_method(method: &Method, set: &EvalSet, repeats: usize, warmup: usize) -> Result<TimingStats> {
    if repeats == 0 || set.targets.is_empty() {
        return Err(Error::invalid("timing needs at least one repeat and one target"));
    }
    let n = set.targets.len();
    for i in 0..warmup {
        let _ = method.design(&set.targets[i % n], i);
    }
    let mut times: Vec<f64> = (0..repeats)
        .map(|i| {
            let start = Instant::now();
            let _ = std::hint::black_box(method.design(&set.targets[i % n], i));
            start.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    let mean_ms = times.iter().sum::<f64>() / repeats as f64;
    times.sort_by(f64::total_cmp);
    Ok(TimingStats {
        mean_ms,
        p95_ms: percentile(&times, 0.95),
    })
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub dataset: String,
    pub count: usize,
    pub failures: usize,
    pub mean_db_mse: f64,
    pub median_db_mse: f64,
    pub p95_db_mse: f64,
    pub timing: Option<TimingStats>,
}

impl ReportRow {
    pub fn from_results(method: &str, dataset: &str, results: &[Result<f64>], timing: Option<TimingStats>) -> Self {
        let mut ok: Vec<f64> = results.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
        ok.sort_by(f64::total_cmp);
        let (mean, med, p95) = if ok.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            (ok.iter().sum::<f64>() / ok.len() as f64, median(&ok), percentile(&ok, 0.95))
        };
        Self {
            method: method.to_string(),
            dataset: dataset.to_string(),
            count: results.len(),
            failures: results.len() - ok.len(),
            mean_db_mse: mean,
            median_db_mse: med,
            p95_db_mse: p95,
            timing,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub machine: String,
    pub config_hash: String,
}

pub const REPORT_COLUMNS: &str =
    "method,dataset,count,failures,mean_db_mse,median_db_mse,p95_db_mse,mean_ms,p95_ms,machine,config_hash";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl EvalReport {
    pub fn new(rows: Vec<ReportRow>, config_echo: &str) -> Self {
        Self {
            rows,
            machine: machine_descriptor(),
            config_hash: config_hash(config_echo),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{REPORT_COLUMNS}\n");
        for r in &self.rows {
            let (mean_ms, p95_ms) = match r.timing {
                Some(t) => (format!("{:.6}", t.mean_ms), format!("{:.6}", t.p95_ms)),
                None => (String::new(), String::new()),
            };
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                csv_field(&r.method),
                csv_field(&r.dataset),
                r.count,
                r.failures,
                r.mean_db_mse,
                r.median_db_mse,
                r.p95_db_mse,
                mean_ms,
                p95_ms,
                csv_field(&self.machine),
                self.config_hash
            )
            .unwrap();
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from(
            "| method | dataset | count | failures | mean dB MSE | median | p95 | mean ms | p95 ms |\n|---|---|---:|---:|---:|---:|---:|---:|---:|\n",
        );
        for r in &self.rows {
            let (a, b) = r
                .timing
                .map_or(("".into(), "".into()), |t| (format!("{:.3}", t.mean_ms), format!("{:.3}", t.p95_ms)));
            writeln!(
                s,
                "| {} | {} | {} | {} | {:.3} | {:.3} | {:.3} | {} | {} |",
                r.method, r.dataset, r.count, r.failures, r.mean_db_mse, r.median_db_mse, r.p95_db_mse, a, b
            )
            .unwrap();
        }
        writeln!(s, "\nmachine: {}  \nconfig: {}", self.machine, self.config_hash).unwrap();
        s
    }
}

/// OS, architecture, CPU model and available parallelism.
pub fn machine_descriptor() -> String {
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_string())
        })
        .unwrap_or_else(|| "unknown-cpu".into());
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!("{}-{} {} ({} threads)", std::env::consts::OS, std::env::consts::ARCH, cpu, threads)
}

/// Short stable digest of a configuration echo.
pub fn config_hash(config_echo: &str) -> String {
    format!("{:08x}", crc32fast::hash(config_echo.as_bytes()))
}

/// Mean dB-MSE of each trained model (rows) on targets of each order
/// (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct OrderStudy {
    pub train_orders: Vec<usize>,
    pub test_orders: Vec<usize>,
    pub table: Vec<Vec<f64>>,
}

pub fn order_study(
    models: &[(usize, Arc<MlpModel<f32>>)],
    test_orders: &[usize],
    family: FamilyId,
    count: usize,
    seed: u64,
    grid: &FrequencyGrid,
    sampler: &SamplerConfig,
) -> Result<OrderStudy> {
    let sets = test_orders
        .iter()
        .map(|&n| build_eval_set(family, n, count, seed, grid, sampler))
        .collect::<Result<Vec<_>>>()?;
    let table = models
        .iter()
        .map(|(_, m)| {
            let method = Method::IirNet(m.clone());
            sets.iter()
                .map(|s| ReportRow::from_results("", "", &evaluate(&method, s), None).mean_db_mse)
                .collect()
        })
        .collect();
    Ok(OrderStudy {
        train_orders: models.iter().map(|(n, _)| *n).collect(),
        test_orders: test_orders.to_vec(),
        table,
    })
}

impl OrderStudy {
    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| train \\ test |");
        for n in &self.test_orders {
            write!(s, " {n} |").unwrap();
        }
        s.push_str("\n|---:|");
        s.push_str(&"---:|".repeat(self.test_orders.len()));
        s.push('\n');
        for (n, row) in self.train_orders.iter().zip(&self.table) {
            write!(s, "| {n} |").unwrap();
            for v in row {
                write!(s, " {v:.2} |").unwrap();
            }
            s.push('\n');
        }
        s
    }
}
