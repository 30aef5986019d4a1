use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use iirnet::designers::{myw_design, sgd_design, MywConfig, SgdConfig};
use iirnet::dsp::{
    cascade_response_db, coeff_response_db, db_mse, make_grid, read_response_csv, response_to_csv,
    CascadeJson, FilterJson, FrequencyGrid, MagnitudeResponse,
};
use iirnet::eval::{build_eval_set, evaluate, order_study, time_method, EvalReport, EvalSet, Method, ReportRow};
use iirnet::ingest::{ir_to_target, read_wav, synthetic_ir_set, SmoothingConfig, SyntheticSet};
use iirnet::mlp::{encode_checkpoint, estimate, load_checkpoint, log_to_csv, MlpModel, TrainConfig, Trainer};
use iirnet::randfilt::{DatasetManifest, SamplerConfig, Stream};

use crate::args::{EvalArgs, FitArgs, FitMethod, GenerateArgs, IngestArgs, PlotArgs, SyntheticKind, TrainArgs};
use crate::error::{CliError, CliResult};
use crate::outputs::Outputs;
use crate::plot;

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn generate(a: &GenerateArgs, seed: u64, out: &mut Outputs) -> CliResult<()> {
    let manifest = match &a.manifest {
        Some(p) => DatasetManifest::from_json(&read_text(p)?)?,
        None => DatasetManifest {
            f_count: a.f_count,
            sample_rate_hz: a.sample_rate,
            ..DatasetManifest::new(a.family, a.order, seed, a.count)
        },
    };
    if manifest.count == 0 {
        return Err(CliError::usage("--count must be at least 1"));
    }
    let records = manifest.generate(Stream::Generate)?;
    out.write("manifest.json", manifest.to_json() + "\n")?;

    let mut csv = String::from("index,family,freq_hz,mag_db\n");
    for r in &records {
        let d = &r.draw;
        for (f, v) in d.response.grid.freqs_hz().zip(&d.response.values_db) {
            writeln!(csv, "{},{},{f},{v}", d.index, d.family).unwrap();
        }
    }
    out.write("responses.csv", csv)?;

    if a.roots {
        let mut csv = String::from("index,family,kind,re,im\n");
        for r in &records {
            let d = &r.draw;
            let (zeros, poles) = d.filter.roots()?;
            for (kind, roots) in [("zero", zeros), ("pole", poles)] {
                for z in roots {
                    writeln!(csv, "{},{},{kind},{},{}", d.index, d.family, z.re, z.im).unwrap();
                }
            }
        }
        out.write("roots.csv", csv)?;
    }
    println!(
        "generated {} family-{} order-{} filters into {}",
        records.len(),
        manifest.family,
        manifest.order,
        out.dir().display()
    );
    Ok(())
}

pub fn train(a: &TrainArgs, seed: u64, out: &mut Outputs) -> CliResult<()> {
    let config = TrainConfig {
        family: a.family,
        order: a.order,
        hidden_dim: a.hidden_dim,
        f_count: a.f_count,
        sample_rate_hz: a.sample_rate,
        batch_size: a.batch_size,
        filters_per_epoch: a.filters_per_epoch,
        epochs: a.epochs,
        lr_initial: a.lr.unwrap_or_else(|| TrainConfig::for_order(a.family, a.order).lr_initial),
        lr_decay_points: a.lr_decay_points.clone(),
        lr_decay_factor: a.lr_decay_factor,
        grad_clip_norm: a.grad_clip,
        weight_decay: a.weight_decay,
        seed,
        ..TrainConfig::default()
    };
    let mut trainer = match &a.resume {
        Some(p) => {
            let ck = load_checkpoint(p)?;
            if ck.seed != seed {
                return Err(CliError::usage(format!(
                    "checkpoint was trained with --seed {}, got {seed}",
                    ck.seed
                )));
            }
            Trainer::resume(config, ck.model, ck.state)?
        }
        None => Trainer::new(config)?,
    };
    out.write("train_config.json", serde_json::to_string_pretty(&trainer.config)? + "\n")?;

    let mut save_err = None;
    let logs = trainer.run(|log, t| {
        eprintln!(
            "epoch {:>4}  step {:>8}  lr {:.1e}  dB MSE {:.4}",
            log.epoch, log.step, log.lr, log.mean_db_mse
        );
        if a.checkpoint_every > 0 && log.epoch % a.checkpoint_every as u64 == 0 && save_err.is_none() {
            let bytes = encode_checkpoint(&t.model, &t.state, seed);
            if let Err(e) = out.write(&format!("epoch{:04}.ckpt", log.epoch), bytes) {
                save_err = Some(e);
            }
        }
    })?;
    if let Some(e) = save_err {
        return Err(e);
    }
    out.write(&a.checkpoint, encode_checkpoint(&trainer.model, &trainer.state, seed))?;
    out.write("train_log.csv", log_to_csv(&logs))?;
    if let Some(last) = logs.last() {
        println!("final epoch mean dB MSE {}", last.mean_db_mse);
    }
    Ok(())
}

fn load_model(path: &Path) -> CliResult<MlpModel<f32>> {
    Ok(load_checkpoint(path)?.model)
}

pub fn fit(a: &FitArgs, seed: u64, out: &mut Outputs) -> CliResult<()> {
    let target = read_response_csv(&a.input)?;
    let need_order = || a.order.ok_or_else(|| CliError::usage("--order is required for this method"));
    let (name, filter, cascade) = match a.method {
        FitMethod::Iirnet => {
            let path = a.model.as_ref().ok_or_else(|| CliError::usage("--model is required for iirnet"))?;
            let model = load_model(path)?;
            if let Some(n) = a.order.filter(|&n| n != model.shape().order) {
                return Err(CliError::usage(format!(
                    "model designs order {}, --order asked for {n}",
                    model.shape().order
                )));
            }
            let c = estimate(&model, &target)?;
            ("iirnet", c.to_coefficients(), Some(c))
        }
        FitMethod::Myw => {
            let f = myw_design(&target, &MywConfig::new(need_order()?, target.len()))?;
            ("myw", f, None)
        }
        FitMethod::Sgd => {
            let mut cfg = SgdConfig::new(need_order()?, a.steps, seed);
            if let Some(lr) = a.lr {
                cfg.lr = lr;
            }
            let c = sgd_design(&target, &cfg)?.cascade;
            ("sgd", c.to_coefficients(), Some(c))
        }
    };
    let fitted = match &cascade {
        Some(c) => cascade_response_db(c, &target.grid)?,
        None => coeff_response_db(&filter, &target.grid)?,
    };
    let err = db_mse(&fitted, &target)?;
    let json = serde_json::json!({
        "method": name,
        "order": filter.order(),
        "db_mse": err,
        "filter": FilterJson::from_filter(&filter)?,
        "cascade": cascade.as_ref().map(CascadeJson::from),
    });
    out.write(&format!("{}.json", a.name), serde_json::to_string_pretty(&json)? + "\n")?;
    if a.overlay {
        let mut csv = String::from("freq_hz,target_db,fit_db\n");
        for ((f, t), y) in target.grid.freqs_hz().zip(&target.values_db).zip(&fitted.values_db) {
            writeln!(csv, "{f},{t},{y}").unwrap();
        }
        out.write(&format!("{}_overlay.csv", a.name), csv)?;
    }
    println!("{name} order {} dB MSE {err}", filter.order());
    Ok(())
}

pub fn ingest(a: &IngestArgs, seed: u64, out: &mut Outputs) -> CliResult<()> {
    let grid = make_grid(a.f_count, a.sample_rate)?;
    let smoothing = SmoothingConfig {
        window_length: a.window,
        poly_order: a.poly_order,
    };
    let named: Vec<(String, _)> = match (&a.input, a.synthetic) {
        (Some(path), _) => {
            let stem = path.file_stem().map_or("ir".into(), |s| s.to_string_lossy().into_owned());
            let irs = read_wav(path)?;
            if let Some(c) = a.channel.filter(|&c| c >= irs.len()) {
                return Err(CliError::usage(format!("channel {c} requested, file has {}", irs.len())));
            }
            irs.into_iter()
                .filter(|ir| a.channel.is_none_or(|c| c == ir.channel_index))
                .map(|ir| (format!("{stem}_ch{}.csv", ir.channel_index), ir))
                .collect()
        }
        (None, Some(kind)) => {
            let set = match kind {
                SyntheticKind::Hrtf => SyntheticSet::HrtfLike,
                SyntheticKind::Cabinet => SyntheticSet::CabinetLike,
            };
            synthetic_ir_set(set, a.count, seed, a.sample_rate)
                .into_iter()
                .enumerate()
                .map(|(i, ir)| (format!("{}_{i:04}.csv", set.name()), ir))
                .collect()
        }
        (None, None) => return Err(CliError::usage("give --input or --synthetic")),
    };
    for (name, ir) in &named {
        out.write(name, response_to_csv(&ir_to_target(ir, &grid, &smoothing)?))?;
    }
    println!("wrote {} responses into {}", named.len(), out.dir().display());
    Ok(())
}

fn load_dataset_dir(dir: &Path) -> CliResult<EvalSet> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::usage(format!("no response CSVs in {}", dir.display())));
    }
    let targets = files
        .iter()
        .map(|p| read_response_csv(p))
        .collect::<iirnet::Result<Vec<MagnitudeResponse>>>()?;
    if targets.iter().any(|t| !t.grid.same_as(&targets[0].grid)) {
        return Err(iirnet::Error::Format("dataset responses use different grids".into()).into());
    }
    Ok(EvalSet {
        name: dir.file_name().map_or("dataset".into(), |s| s.to_string_lossy().into_owned()),
        targets,
    })
}

fn parse_methods(
    tokens: &[String],
    models: &[Arc<MlpModel<f32>>],
    order: usize,
    f_count: usize,
    seed: u64,
) -> CliResult<Vec<Method>> {
    let mut methods = Vec::new();
    for t in tokens {
        match t.trim() {
            "iirnet" if models.is_empty() => return Err(CliError::usage("method iirnet needs --model")),
            "iirnet" => methods.extend(models.iter().cloned().map(Method::IirNet)),
            "myw" => methods.push(Method::Myw(MywConfig::new(order, f_count))),
            s if s == "sgd" || s.starts_with("sgd:") => {
                let steps = match s.strip_prefix("sgd:") {
                    Some(n) => n.parse().map_err(|_| CliError::usage(format!("bad step count in `{s}`")))?,
                    None => 100,
                };
                methods.push(Method::Sgd(SgdConfig::new(order, steps, seed)));
            }
            other => return Err(CliError::usage(format!("unknown method `{other}`"))),
        }
    }
    Ok(methods)
}

pub fn eval(a: &EvalArgs, bench: bool, seed: u64, echo: &str, out: &mut Outputs) -> CliResult<()> {
    let models = a
        .model
        .iter()
        .map(|p| load_model(p).map(Arc::new))
        .collect::<CliResult<Vec<_>>>()?;
    let sampler = SamplerConfig {
        sample_rate_hz: a.sample_rate,
        ..SamplerConfig::default()
    };
    let set = match &a.dataset_dir {
        Some(dir) => load_dataset_dir(dir)?,
        None => {
            let f = a.f_count.or(models.first().map(|m| m.shape().input_dim)).unwrap_or(512);
            let count = a.count.unwrap_or(if bench { 100 } else { 1000 });
            build_eval_set(a.family, a.order, count, seed, &make_grid(f, a.sample_rate)?, &sampler)?
        }
    };
    let grid: FrequencyGrid = set.targets[0].grid.clone();
    if let Some(m) = models.iter().find(|m| m.shape().input_dim != grid.len()) {
        return Err(CliError::usage(format!(
            "model expects {} frequency points, dataset has {}",
            m.shape().input_dim,
            grid.len()
        )));
    }
    let tokens: Vec<String> = if a.methods.is_empty() {
        let d: &[&str] = match (bench, models.is_empty()) {
            (true, false) => &["iirnet", "myw", "sgd:100"],
            (true, true) => &["myw", "sgd:100"],
            (false, false) => &["iirnet"],
            (false, true) => &["myw"],
        };
        d.iter().map(|s| s.to_string()).collect()
    } else {
        a.methods.clone()
    };
    let methods = parse_methods(&tokens, &models, a.design_order.unwrap_or(a.order), grid.len(), seed)?;
    let timing = bench || a.timing;
    let mut rows = Vec::new();
    for m in &methods {
        let results = evaluate(m, &set);
        let t = if timing {
            Some(time_method(m, &set, a.repeats, a.warmup)?)
        } else {
            None
        };
        rows.push(ReportRow::from_results(&m.name(), &set.name, &results, t));
    }
    let report = EvalReport::new(rows, echo);
    let prefix = if bench { "bench" } else { "eval" };
    out.write(&format!("{prefix}_report.csv"), report.to_csv())?;
    let md = report.to_markdown();
    out.write(&format!("{prefix}_report.md"), &md)?;
    print!("{md}");

    if !a.test_orders.is_empty() {
        if models.is_empty() {
            return Err(CliError::usage("--test-orders needs at least one --model"));
        }
        let labelled: Vec<_> = models.iter().map(|m| (m.shape().order, m.clone())).collect();
        let count = a.count.unwrap_or(if bench { 100 } else { 1000 });
        let study = order_study(&labelled, &a.test_orders, a.family, count, seed, &grid, &sampler)?;
        let mut csv = String::from("train_order,test_order,mean_db_mse\n");
        for (n, row) in study.train_orders.iter().zip(&study.table) {
            for (m, v) in study.test_orders.iter().zip(row) {
                writeln!(csv, "{n},{m},{v}").unwrap();
            }
        }
        out.write("order_study.csv", csv)?;
        let md = study.to_markdown();
        out.write("order_study.md", &md)?;
        print!("\n{md}");
    }
    Ok(())
}

pub fn plot(a: &PlotArgs, out: &mut Outputs) -> CliResult<()> {
    let text = read_text(&a.input)?;
    let png = plot::render_png(&text, a.width, a.height)?;
    let name = match &a.output {
        Some(n) => n.clone(),
        None => {
            let stem = a.input.file_stem().map_or("plot".into(), |s| s.to_string_lossy().into_owned());
            format!("{stem}.png")
        }
    };
    let path = out.write(&name, png)?;
    println!("wrote {}", path.display());
    Ok(())
}
