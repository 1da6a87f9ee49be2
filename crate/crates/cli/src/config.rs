//! `key = value` config files.
//!
//! A file given with `--config PATH` is turned into flags spliced in right
//! after the subcommand name, so that flags given on the command line (which
//! come later) override it and clap validates both the same way. Keys are
//! long flag names without the dashes; `#` starts a comment. A boolean flag
//! is set by `key = true` and left alone by `key = false`.

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};
use clap::Command;

/// Parses the file into `(key, value)` pairs.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key = value", n + 1);
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            bail!("line {}: empty key", n + 1);
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Expands `--config PATH` (or `--config=PATH`) in `args` for the
/// subcommand found in `args[1]`. Unknown keys are an error.
pub fn expand(cmd: &Command, args: Vec<OsString>) -> Result<Vec<OsString>> {
    let pos = args.iter().position(|a| a == "--config");
    let eq = args.iter().position(|a| a.to_str().is_some_and(|s| s.starts_with("--config=")));
    let (idx, path, width) = match (pos, eq) {
        (Some(i), _) => match args.get(i + 1) {
            Some(p) => (i, p.clone(), 2),
            None => bail!("--config needs a path"),
        },
        (None, Some(i)) => (i, OsString::from(&args[i].to_str().unwrap()["--config=".len()..]), 1),
        (None, None) => return Ok(args),
    };
    let Some(sub_name) = args.get(1).and_then(|s| s.to_str()) else { bail!("--config must follow a subcommand") };
    let Some(sub) = cmd.find_subcommand(sub_name) else { bail!("--config must follow a subcommand") };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let mut spliced = Vec::new();
    for (k, v) in parse(&text)? {
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(k.as_str())) else {
            bail!("unknown config key `{k}` for `{sub_name}`");
        };
        if k == "config" {
            bail!("config files cannot include other config files");
        }
        if arg.get_action().takes_values() {
            spliced.push(OsString::from(format!("--{k}")));
            spliced.push(OsString::from(v));
        } else {
            match v.as_str() {
                "true" => spliced.push(OsString::from(format!("--{k}"))),
                "false" => {}
                _ => bail!("config key `{k}` is a switch: use true or false"),
            }
        }
    }
    let mut out: Vec<OsString> = Vec::with_capacity(args.len() + spliced.len());
    out.extend(args[..2].iter().cloned());
    out.extend(spliced);
    out.extend(args[2..idx].iter().cloned());
    out.extend(args[idx + width..].iter().cloned());
    Ok(out)
}
