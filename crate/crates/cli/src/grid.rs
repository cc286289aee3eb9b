//! Raw `.f64` arrays with a JSON sidecar.

use std::path::{Path, PathBuf};

use amra_core::{GridFunction, Signal};
use anyhow::{Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::canon::to_canonical;
use crate::files::{check_version, write_atomic, SCHEMA_VERSION};
use crate::pyramid_dir::{f64_bytes, read_f64_file};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub version: u64,
    pub offset: Vec<i64>,
    pub shape: Vec<usize>,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag_file: Option<String>,
    /// Cascade level, for refinable-function samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilation: Option<Vec<Vec<i64>>>,
    /// Sample `n` sits at `grid · n`; entries are exact fractions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<Vec<String>>>,
}

pub fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("json")
}

fn imag_path(data: &Path) -> PathBuf {
    data.with_extension("imag.f64")
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn write_with(data: &Path, s: &Signal, extra: impl FnOnce(&mut Sidecar)) -> Result<()> {
    write_atomic(data, &f64_bytes(s.data().iter().map(|v| v.re)))?;
    let imag_file = if s.is_real() {
        None
    } else {
        let p = imag_path(data);
        write_atomic(&p, &f64_bytes(s.data().iter().map(|v| v.im)))?;
        Some(file_name(&p))
    };
    let mut meta = Sidecar {
        version: SCHEMA_VERSION,
        offset: s.offset().to_vec(),
        shape: s.shape().to_vec(),
        file: file_name(data),
        imag_file,
        level: None,
        dilation: None,
        grid: None,
    };
    extra(&mut meta);
    write_atomic(&sidecar_path(data), to_canonical(&meta)?.as_bytes())
}

pub fn write_signal(data: &Path, s: &Signal) -> Result<()> {
    write_with(data, s, |_| {})
}

pub fn write_grid_function(data: &Path, g: &GridFunction) -> Result<()> {
    write_with(data, &g.samples, |m| {
        m.level = Some(g.level);
        m.dilation = Some(g.m0.rows());
        m.grid = Some(g.grid.to_strings());
    })
}

/// Reads the array described by the sidecar next to `data`.
pub fn read_signal(data: &Path) -> Result<Signal> {
    let side = sidecar_path(data);
    let text = std::fs::read_to_string(&side).with_context(|| format!("reading {}", side.display()))?;
    let meta: Sidecar = serde_json::from_str(&text).with_context(|| format!("parsing {}", side.display()))?;
    check_version(meta.version, "grid")?;
    let n = meta.shape.iter().product();
    let dir = data.parent().unwrap_or(Path::new(""));
    let re = read_f64_file(&dir.join(&meta.file), n)?;
    let values: Vec<Complex64> = match &meta.imag_file {
        Some(f) => re.iter().zip(read_f64_file(&dir.join(f), n)?).map(|(&a, b)| Complex64::new(a, b)).collect(),
        None => re.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
    };
    Ok(Signal::new(meta.offset, meta.shape, values)?)
}
