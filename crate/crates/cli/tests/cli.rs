use std::path::Path;
use std::process::{Command, Output};

fn iirnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iirnet"))
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
}

fn write_flat(path: &Path, points: usize) {
    let mut s = String::from("freq_hz,mag_db\n");
    for i in 0..points {
        s.push_str(&format!("{},0\n", i as f64 * 22050.0 / (points - 1) as f64));
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn fit_myw_on_flat_target() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("flat.csv");
    write_flat(&input, 512);
    let out = tmp.path().join("out");
    let o = iirnet(&out, &["fit", "--method", "myw", "--order", "16", "--input", input.to_str().unwrap(), "--overlay"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    assert_eq!(json["order"], 16);
    assert_eq!(json["filter"]["sections"].as_array().unwrap().len(), 8);
    let overlay = std::fs::read_to_string(out.join("fit_overlay.csv")).unwrap();
    let worst = overlay
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap().abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.5, "{worst}");
    assert!(out.join("fit.config.toml").exists());
}

#[test]
fn generate_root_scatter_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let o = iirnet(tmp.path(), &["generate", "--family", "B", "--order", "32", "--count", "100", "--roots"]);
    assert!(o.status.success());
    let roots = std::fs::read_to_string(tmp.path().join("roots.csv")).unwrap();
    assert_eq!(roots.lines().filter(|l| l.contains(",zero,")).count(), 100 * 32);
    assert_eq!(roots.lines().filter(|l| l.contains(",pole,")).count(), 100 * 32);
    let responses = std::fs::read_to_string(tmp.path().join("responses.csv")).unwrap();
    assert_eq!(responses.lines().count(), 1 + 100 * 512);

    // The manifest alone regenerates the same dataset.
    let again = tmp.path().join("again");
    let manifest = tmp.path().join("manifest.json");
    let o = iirnet(&again, &["generate", "--manifest", manifest.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(again.join("responses.csv")).unwrap(), responses);
}

#[test]
fn exit_codes_and_cleanup() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = iirnet(&out, &["generate", "--unknown-flag"]);
    assert_eq!(o.status.code(), Some(2));
    let o = iirnet(&out, &["generate", "--order", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = iirnet(&out, &["fit", "--method", "myw", "--order", "4", "--input", "/no/such/file.csv"]);
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "data");
    assert!(!out.exists(), "failed runs leave no outputs");

    let bad = tmp.path().join("bad.ckpt");
    std::fs::write(&bad, b"IIRN garbage").unwrap();
    let input = tmp.path().join("flat.csv");
    write_flat(&input, 64);
    let o = iirnet(&out, &["fit", "--method", "iirnet", "--model", bad.to_str().unwrap(), "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn config_echo_reproduces_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let cfg = tmp.path().join("train.toml");
    std::fs::write(&cfg, "order = 4\nhidden-dim = 16\nf-count = 32\nbatch-size = 8\nfilters-per-epoch = 32\nepochs = 2\nlr = 1e-3\nseed = 5\n").unwrap();
    let o = iirnet(&first, &["train", "--config", cfg.to_str().unwrap(), "--epochs", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let echo = first.join("train.config.toml");
    let text = std::fs::read_to_string(&echo).unwrap();
    assert!(text.contains("epochs = 3") && text.contains("seed = 5"));

    let second = tmp.path().join("second");
    let o = iirnet(&second, &["train", "--config", echo.to_str().unwrap()]);
    assert!(o.status.success());
    for f in ["model.ckpt", "train_log.csv", "train.config.toml"] {
        assert_eq!(std::fs::read(first.join(f)).unwrap(), std::fs::read(second.join(f)).unwrap(), "{f}");
    }
    assert_eq!(std::fs::read_to_string(first.join("train_log.csv")).unwrap().lines().count(), 4);
}

#[test]
fn ingest_eval_and_plot_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let set = tmp.path().join("hrtf");
    let o = iirnet(&set, &["ingest", "--synthetic", "hrtf", "--count", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::remove_file(set.join("ingest.config.toml")).unwrap();
    let csvs: Vec<_> = std::fs::read_dir(&set).unwrap().collect();
    assert_eq!(csvs.len(), 4);

    let rep = tmp.path().join("rep");
    let o = iirnet(&rep, &["bench", "--dataset-dir", set.to_str().unwrap(), "--methods", "myw,sgd:5", "--order", "8", "--repeats", "3", "--warmup", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(rep.join("bench_report.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "method,dataset,count,failures,mean_db_mse,median_db_mse,p95_db_mse,mean_ms,p95_ms,machine,config_hash"
    );
    assert!(lines[1].starts_with("myw-n8,hrtf,4,0,"));
    assert!(lines[2].starts_with("sgd5-n8,hrtf,4,0,"));
    assert!(!lines[1].split(',').nth(7).unwrap().is_empty());

    let first = std::fs::read_dir(&set).unwrap().next().unwrap().unwrap().path();
    let o = iirnet(&rep, &["plot", "--input", first.to_str().unwrap(), "--output", "r.png"]);
    assert!(o.status.success());
    assert_eq!(&std::fs::read(rep.join("r.png")).unwrap()[1..4], b"PNG");
}

#[test]
fn ingest_reads_wav_channels() {
    let tmp = tempfile::tempdir().unwrap();
    let wav = tmp.path().join("ir.wav");
    let mut a = vec![0.0; 300];
    a[100] = 0.5;
    let mut b = vec![0.0; 300];
    b[100] = 0.25;
    iirnet::ingest::write_wav(&wav, &[a, b], 48000, iirnet::ingest::SampleFormat::Float32).unwrap();
    let out = tmp.path().join("out");
    let o = iirnet(&out, &["ingest", "--input", wav.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = iirnet::dsp::read_response_csv(&out.join("ir_ch1.csv")).unwrap();
    let expect = 20.0 * 0.25f64.log10();
    assert!((r.values_db[10] - expect).abs() < 0.01, "{}", r.values_db[10]);
    let o = iirnet(&out, &["ingest", "--input", wav.to_str().unwrap(), "--channel", "5"]);
    assert_eq!(o.status.code(), Some(2));
}
