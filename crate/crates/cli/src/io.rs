//! JSON files in and out.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

pub type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()).into())
}

pub fn read_value(path: &Path) -> Result<serde_json::Value> {
    read(path)
}

/// Pretty JSON with a trailing newline.
pub fn write<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()).into())
}

pub fn required<'a>(arg: &'a Option<std::path::PathBuf>, flag: &str) -> Result<&'a Path> {
    arg.as_deref().ok_or_else(|| format!("{flag} is required here").into())
}
