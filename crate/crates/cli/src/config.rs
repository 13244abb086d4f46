//! Declarative scan configuration: every flag can also be given in a JSON
//! config file; flags override file values.

use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub l: Option<f64>,
    pub alpha_plus: Option<f64>,
    pub alpha_minus: Option<f64>,
    pub energy: Option<f64>,
    pub emin: Option<f64>,
    pub emax: Option<f64>,
    pub minus_range: Option<(f64, f64)>,
    pub plus_range: Option<(f64, f64)>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    pub t_steps: Option<usize>,
    pub e_grid: Option<usize>,
}

pub fn load(path: &std::path::Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Flag-over-file merge for a single optional value.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}
