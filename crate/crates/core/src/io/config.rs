//! TOML configuration files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::ScenarioConfig;

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Dotted name of the key at `offset`, qualified by the enclosing table.
fn key_at(text: &str, offset: usize, fallback: &str) -> String {
    let before = &text[..offset.min(text.len())];
    let key: String = text[offset.min(text.len())..]
        .chars()
        .take_while(|c| c.is_alphanumeric() || *c == '_' || *c == '-' || *c == '.')
        .collect();
    let key = if key.is_empty() { fallback.to_string() } else { key };
    let table = before
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('[') && !l.starts_with("[["))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim().to_string());
    match table {
        Some(t) => format!("{t}.{key}"),
        None => key,
    }
}

/// Parses and validates a configuration. Missing keys take their defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let offset = e.span().map_or(0, |s| s.start);
        if let Some(rest) = message.strip_prefix("unknown field `") {
            let name = rest.split('`').next().unwrap_or_default();
            Error::UnknownKey(key_at(text, offset, name))
        } else {
            Error::ConfigParse {
                line: line_of(text, offset),
                message,
            }
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Fully resolved configuration as TOML; `parse_config` reads it back unchanged.
pub fn config_to_toml(cfg: &ScenarioConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::InvalidParameter(format!("cannot serialize config: {e}")))
}
