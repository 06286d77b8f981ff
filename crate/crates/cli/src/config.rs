//! `--config` files: a flat JSON object whose keys mirror the long flags.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub fn load(path: Option<&Path>) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    match serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?
    {
        Value::Object(m) => Ok(m),
        _ => bail!("config {} must be a JSON object", path.display()),
    }
}

/// Overlays the flags that were actually given on top of the config file.
///
/// `T` must skip unset fields when serializing, so that only explicit flags win.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: &Map<String, Value>) -> Result<T> {
    let mut out = config.clone();
    if let Value::Object(given) = serde_json::to_value(flags)? {
        out.extend(given);
    }
    serde_json::from_value(Value::Object(out)).context("invalid config")
}
