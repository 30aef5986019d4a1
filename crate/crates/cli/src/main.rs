mod args;
mod commands;
mod config;
mod error;
mod outputs;
mod plot;

use std::ffi::OsString;

use args::Command;
use error::CliResult;
use outputs::Outputs;

fn main() {
    std::process::exit(run(std::env::args_os().collect()));
}

fn run(argv: Vec<OsString>) -> i32 {
    let parsed = match config::parse(argv) {
        Ok(p) => p,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&parsed) {
        Ok(()) => 0,
        Err(e) => {
            let msg = serde_json::json!({
                "error": e.kind(),
                "code": e.exit_code(),
                "command": parsed.subcommand,
                "message": e.to_string(),
            });
            eprintln!("{msg}");
            e.exit_code()
        }
    }
}

fn execute(p: &config::Parsed) -> CliResult<()> {
    let g = &p.cli.global;
    let threads = if g.deterministic { Some(1) } else { g.threads };
    if let Some(n) = threads {
        if n == 0 {
            return Err(error::CliError::usage("--threads must be at least 1"));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut out = Outputs::new(&g.output_dir)?;
    out.write(&format!("{}.config.toml", p.subcommand), &p.echo)?;
    match &p.cli.command {
        Command::Generate(a) => commands::generate(a, g.seed, &mut out)?,
        Command::Train(a) => commands::train(a, g.seed, &mut out)?,
        Command::Fit(a) => commands::fit(a, g.seed, &mut out)?,
        Command::Ingest(a) => commands::ingest(a, g.seed, &mut out)?,
        Command::Eval(a) => commands::eval(a, false, g.seed, &p.echo, &mut out)?,
        Command::Bench(a) => commands::eval(a, true, g.seed, &p.echo, &mut out)?,
        Command::Plot(a) => commands::plot(a, &mut out)?,
    }
    out.commit();
    Ok(())
}
