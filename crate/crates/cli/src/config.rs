//! `--config file.toml` support. Each top-level key becomes a `--key=value`
//! flag placed right after the subcommand, so flags given on the command
//! line come later and win.

use anyhow::{bail, Context, Result};
use toml::Value;

/// Global options that take a value and may precede the subcommand.
const GLOBAL_VALUED: [&str; 1] = ["--log-level"];

pub fn expand_args(mut argv: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = take_config_path(&mut argv)? else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let table: toml::Table = text
        .parse()
        .with_context(|| format!("parsing config {path}"))?;
    let flags = table_to_flags(&table).with_context(|| format!("in config {path}"))?;

    let at = subcommand_index(&argv).map_or(argv.len(), |i| i + 1);
    argv.splice(at..at, flags);
    Ok(argv)
}

fn take_config_path(argv: &mut Vec<String>) -> Result<Option<String>> {
    let mut found = None;
    let mut i = 1;
    while i < argv.len() {
        if argv[i] == "--config" {
            if i + 1 >= argv.len() {
                bail!("--config needs a file");
            }
            found = Some(argv.remove(i + 1));
            argv.remove(i);
        } else if let Some(p) = argv[i].strip_prefix("--config=") {
            found = Some(p.to_string());
            argv.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(found)
}

fn subcommand_index(argv: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if GLOBAL_VALUED.contains(&a.as_str()) {
            i += 2;
        } else if a.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

fn scalar(v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Integer(n) => n.to_string(),
        Value::Float(x) => x.to_string(),
        Value::Boolean(b) => b.to_string(),
        other => bail!("unsupported value {other}"),
    })
}

pub fn table_to_flags(table: &toml::Table) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Boolean(true) => out.push(flag),
            Value::Boolean(false) => {}
            Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
                out.push(format!("{flag}={}", parts.join(",")));
            }
            Value::Table(_) => bail!("key {key:?}: nested tables are not supported"),
            v => out.push(format!("{flag}={}", scalar(v)?)),
        }
    }
    Ok(out)
}
