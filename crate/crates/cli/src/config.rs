//! Flat `key = value` config files.
//!
//! Each key names a long flag without the leading dashes; `command` selects
//! the subcommand. `true` turns a key into a bare switch and `false` drops it.
//! Lines starting with `#` are comments. Command-line flags override the file.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::args::COMMAND_NAMES;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub entries: Vec<(String, String)>,
}

pub fn parse_config(text: &str) -> Result<ConfigFile, String> {
    let mut command = None;
    let mut entries: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| format!("line {}: expected `key = value`, got `{line}`", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(format!("line {}: empty key", lineno + 1));
        }
        if key == "command" {
            command = Some(value.to_string());
        } else if let Some(slot) = entries.iter_mut().find(|(k, _)| k == key) {
            slot.1 = value.to_string();
        } else {
            entries.push((key.to_string(), value.to_string()));
        }
    }
    Ok(ConfigFile { command, entries })
}

pub fn load_config(path: &Path) -> Result<ConfigFile, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse_config(&text)
}

fn is_command(arg: &OsString) -> bool {
    arg.to_str().is_some_and(|s| COMMAND_NAMES.contains(&s))
}

/// Splices `--config FILE` into the argument vector: the subcommand first,
/// then the file's flags, then the remaining command-line arguments so that
/// later occurrences win.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut iter = args.into_iter();
    let program = iter.next().unwrap_or_else(|| OsString::from("curvlab"));
    let mut rest = Vec::new();
    let mut config_path: Option<OsString> = None;
    while let Some(arg) = iter.next() {
        match arg.to_str() {
            Some("--config") => {
                config_path = Some(iter.next().ok_or("--config needs a file path")?);
            }
            Some(s) if s.starts_with("--config=") => config_path = Some(OsString::from(&s["--config=".len()..])),
            _ => rest.push(arg),
        }
    }
    let Some(path) = config_path else {
        let mut out = vec![program];
        out.extend(rest);
        return Ok(out);
    };
    let config = load_config(Path::new(&path))?;
    let position = rest.iter().position(is_command);
    let command = match (position, &config.command) {
        (Some(i), _) => rest.remove(i),
        (None, Some(c)) => OsString::from(c),
        (None, None) => return Err("no command given on the command line or in the config file".into()),
    };
    let mut out = vec![program, command];
    for (key, value) in &config.entries {
        match value.as_str() {
            "true" => out.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => out.push(OsString::from(format!("--{key}={value}"))),
        }
    }
    out.extend(rest);
    Ok(out)
}
