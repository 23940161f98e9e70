//! Plain-text experiment configuration: one `key = value` per line, `#` starts
//! a comment. Keys are the long flag names without the leading dashes.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

pub const KEYS: &[&str] = &[
    "m", "k", "p", "q", "t", "t-list", "imax", "snr-dl", "snr-ul", "trials", "seed", "methods", "aod-mode", "out",
    "spacing", "rel-tol",
];

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut entries = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected 'key = value'", n + 1)));
        };
        let key = key.trim().to_ascii_lowercase().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("line {}: unknown key '{key}'", n + 1)));
        }
        let value = value.trim();
        if value.is_empty() {
            return Err(CliError::Config(format!("line {}: empty value for '{key}'", n + 1)));
        }
        entries.insert(key, value.to_string());
    }
    Ok(entries)
}

pub fn load(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
    parse(&text)
}
