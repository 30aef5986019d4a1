//! `--config` files and the per-run config echo.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, Command, CommandFactory, FromArgMatches};

use crate::args::Cli;

/// Arguments that locate a run rather than configure it.
const NOT_ECHOED: [&str; 4] = ["config", "output_dir", "help", "version"];

pub struct Parsed {
    pub cli: Cli,
    pub subcommand: String,
    pub echo: String,
}

fn built_command() -> Command {
    let mut cmd = Cli::command();
    cmd.build();
    cmd
}

/// Parses `argv`, filling anything not given on the command line from the
/// `--config` file.
pub fn parse(argv: Vec<OsString>) -> Result<Parsed, clap::Error> {
    let cmd = built_command();
    let first = cmd.clone().try_get_matches_from(&argv)?;
    let (name, sub) = first.subcommand().expect("subcommand is required");
    let mut argv = argv.clone();
    if let Some(path) = sub.get_one::<std::path::PathBuf>("config") {
        let sub_cmd = cmd.find_subcommand(name).expect("known subcommand");
        argv.extend(config_tokens(path, sub_cmd, sub).map_err(|m| {
            cmd.clone().error(clap::error::ErrorKind::InvalidValue, m)
        })?);
    }
    let matches = cmd.clone().try_get_matches_from(&argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let echo = echo(name, cmd.find_subcommand(name).expect("known subcommand"), sub);
    Ok(Parsed {
        cli,
        subcommand: name.to_string(),
        echo,
    })
}

fn config_tokens(path: &Path, cmd: &Command, given: &ArgMatches) -> Result<Vec<OsString>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let table: toml::Table = text.parse().map_err(|e| format!("{}: {e}", path.display()))?;
    let mut tokens = Vec::new();
    for (key, value) in table {
        let id = key.replace('-', "_");
        let arg = cmd
            .get_arguments()
            .find(|a| a.get_id() == id.as_str() && a.get_long().is_some())
            .ok_or_else(|| format!("unknown config key `{key}`"))?;
        if id == "config" {
            return Err("config files cannot include other config files".into());
        }
        if given.value_source(&id) == Some(ValueSource::CommandLine) {
            continue;
        }
        let flag = format!("--{}", arg.get_long().unwrap());
        match (arg.get_action(), value) {
            (ArgAction::SetTrue, toml::Value::Boolean(b)) => {
                if b {
                    tokens.push(flag.into());
                }
            }
            (ArgAction::SetTrue, _) => return Err(format!("config key `{key}` must be a boolean")),
            (_, toml::Value::Array(items)) => {
                let parts = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
                tokens.push(flag.into());
                tokens.push(parts.join(",").into());
            }
            (_, v) => {
                tokens.push(flag.into());
                tokens.push(scalar(&v)?.into());
            }
        }
    }
    Ok(tokens)
}

fn scalar(v: &toml::Value) -> Result<String, String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        other => Err(format!("unsupported config value `{other}`")),
    }
}

fn typed(s: &str) -> toml::Value {
    if let Ok(i) = s.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = s.parse::<f64>() {
        toml::Value::Float(f)
    } else {
        toml::Value::String(s.to_string())
    }
}

/// Every effective setting of the run, readable back through `--config`.
fn echo(name: &str, cmd: &Command, m: &ArgMatches) -> String {
    let mut table = toml::Table::new();
    for arg in cmd.get_arguments() {
        let id = arg.get_id().as_str();
        if NOT_ECHOED.contains(&id) || arg.get_long().is_none() {
            continue;
        }
        let Some(raw) = m.get_raw(id) else { continue };
        let values: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
        let key = arg.get_long().unwrap().to_string();
        let value = match arg.get_action() {
            ArgAction::SetTrue => toml::Value::Boolean(values.first().is_some_and(|v| v == "true")),
            _ if values.len() == 1 && arg.get_value_delimiter().is_none() => typed(&values[0]),
            _ => toml::Value::Array(values.iter().map(|v| typed(v)).collect()),
        };
        table.insert(key, value);
    }
    format!("# iirnet {name}\n{}", toml::to_string(&table).expect("table serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<OsString> {
        s.split_whitespace().map(OsString::from).collect()
    }

    #[test]
    fn flags_override_file_and_echo_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(&cfg, "order = 8\nhidden-dim = 64\nlr_decay_points = [0.5, 0.9]\ndeterministic = true\n").unwrap();
        let p = parse(argv(&format!("iirnet train --order 4 --config {}", cfg.display()))).unwrap();
        let crate::args::Command::Train(t) = &p.cli.command else { panic!() };
        assert_eq!(t.order, 4);
        assert_eq!(t.hidden_dim, 64);
        assert_eq!(t.lr_decay_points, vec![0.5, 0.9]);
        assert!(p.cli.global.deterministic);

        let echo = dir.path().join("echo.toml");
        std::fs::write(&echo, &p.echo).unwrap();
        let q = parse(argv(&format!("iirnet train --config {}", echo.display()))).unwrap();
        assert_eq!(q.echo, p.echo);
        let crate::args::Command::Train(u) = &q.cli.command else { panic!() };
        assert_eq!((u.order, u.hidden_dim, u.lr), (4, 64, None));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(&cfg, "bogus = 1\n").unwrap();
        assert!(parse(argv(&format!("iirnet generate --config {}", cfg.display()))).is_err());
        assert!(parse(argv("iirnet generate --bogus 1")).is_err());
    }
}
