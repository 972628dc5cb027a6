//! Flat `key = value` configuration files.
//!
//! Each key is a long flag without its dashes (`alpha = 0.3`,
//! `x-range = 0.1:10:20`); `#` starts a comment. A bare `true` turns the
//! flag on. The entries are spliced into the argument list right after the
//! subcommand; keys whose flag also appears on the command line are dropped,
//! so flags override the file (list-valued flags would otherwise append).

use std::ffi::OsString;
use std::path::Path;

use crate::args::SUBCOMMANDS;
use crate::CliError;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "--config: line {} is not of the form key = value: {raw:?}",
                i + 1
            )));
        };
        let key = k.trim().trim_start_matches('-').replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("--config: empty key on line {}", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Returns `args` with the entries of the `--config` file (if any) inserted
/// after the subcommand.
pub fn merge(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("--config: cannot read {}: {e}", path.display())))?;
    let entries = parse(&text)?;
    let Some(pos) = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
    else {
        return Ok(args);
    };
    let given = |k: &str| {
        let flag = format!("--{k}");
        let prefix = format!("--{k}=");
        args.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag.as_str() || a.starts_with(&prefix)
        })
    };
    let mut out: Vec<OsString> = args[..=pos].to_vec();
    for (k, v) in entries.into_iter().filter(|(k, _)| !given(k)) {
        out.push(format!("--{k}").into());
        if v != "true" {
            out.push(v.into());
        }
    }
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}
