//! `key=value` config files. Keys are the long flag names of the chosen
//! subcommand; values are spliced in ahead of the real command line so that
//! explicit flags override them.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::{ArgAction, Command};

use crate::Failure;

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, Failure> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Failure::new(
                "config",
                format!("line {}: expected key=value, got {line:?}", lineno + 1),
            )
        })?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Failure::new(
                "config",
                format!("line {}: empty key", lineno + 1),
            ));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

/// Turns config entries into flags for `sub`. Unknown keys are an error.
pub fn to_flags(sub: &Command, entries: &[(String, String)]) -> Result<Vec<OsString>, Failure> {
    let mut flags = Vec::new();
    for (key, value) in entries {
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config")
            .ok_or_else(|| {
                Failure::new(
                    "config",
                    format!("unknown key {key:?} for `{}`", sub.get_name()),
                )
            })?;
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" => flags.push(format!("--{key}").into()),
                "false" => {}
                other => {
                    return Err(Failure::new(
                        "config",
                        format!("{key}: expected true or false, got {other:?}"),
                    ))
                }
            },
            _ => flags.push(format!("--{key}={value}").into()),
        }
    }
    Ok(flags)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new("io", format!("config {}: {e}", path.display())))?;
    parse(&text)
}

/// Rebuilds argv as `prog <sub> <config flags> <remaining args>`; the first
/// positional token (the subcommand name) is lifted out of the original list.
pub fn splice(args: &[OsString], sub: &str, config_flags: Vec<OsString>) -> Vec<OsString> {
    let mut out = vec![args[0].clone(), sub.into()];
    out.extend(config_flags);
    let mut lifted = false;
    let mut skip_value = false;
    for a in &args[1..] {
        if skip_value {
            skip_value = false;
            out.push(a.clone());
            continue;
        }
        if !lifted {
            if a == "--config" {
                skip_value = true;
                out.push(a.clone());
                continue;
            }
            if a.to_string_lossy().starts_with("--config=") {
                out.push(a.clone());
                continue;
            }
            if a == sub {
                lifted = true;
                continue;
            }
        }
        out.push(a.clone());
    }
    out
}
