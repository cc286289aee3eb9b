//! Bank and plan JSON documents.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use amra_core::{Band, BankItem, FilterBank, IntMatrix, Mask, NodeId, Signal, TreePlan};
use anyhow::{anyhow, bail, ensure, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canon::{to_canonical, to_canonical_string};

/// Version written into and accepted from every document.
pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterEntry {
    pub matrix: Vec<Vec<i64>>,
    pub offset: Vec<i64>,
    pub shape: Vec<usize>,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
    pub band: Band,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankFile {
    #[serde(default = "default_version")]
    pub version: u64,
    pub dim: usize,
    pub separator: usize,
    pub filters: Vec<FilterEntry>,
}

fn default_version() -> u64 {
    SCHEMA_VERSION
}

pub fn check_version(v: u64, what: &str) -> Result<()> {
    ensure!(v == SCHEMA_VERSION, "unsupported {what} schema version {v} (expected {SCHEMA_VERSION})");
    Ok(())
}

impl BankFile {
    pub fn from_bank(bank: &FilterBank) -> Self {
        let filters = bank
            .items()
            .iter()
            .map(|it| {
                let c = it.mask.coeffs();
                let im: Vec<f64> = c.data().iter().map(|v| v.im).collect();
                FilterEntry {
                    matrix: it.matrix.rows(),
                    offset: c.offset().to_vec(),
                    shape: c.shape().to_vec(),
                    re: c.data().iter().map(|v| v.re).collect(),
                    im: if im.iter().any(|&x| x != 0.0) { Some(im) } else { None },
                    band: it.band(),
                }
            })
            .collect();
        BankFile { version: SCHEMA_VERSION, dim: bank.dim(), separator: bank.separator(), filters }
    }

    pub fn to_bank(&self) -> Result<FilterBank> {
        check_version(self.version, "bank")?;
        ensure!(!self.filters.is_empty(), "bank has no filters");
        let mut items = Vec::with_capacity(self.filters.len());
        for (i, f) in self.filters.iter().enumerate() {
            let ctx = || format!("filter {i}");
            ensure!(f.matrix.len() == self.dim, "{}: matrix has {} rows, expected {}", ctx(), f.matrix.len(), self.dim);
            ensure!(f.matrix.iter().all(|r| r.len() == self.dim), "{}: matrix rows must have {} entries", ctx(), self.dim);
            ensure!(f.offset.len() == self.dim && f.shape.len() == self.dim, "{}: offset/shape must have {} entries", ctx(), self.dim);
            let n: usize = f.shape.iter().product();
            ensure!(f.re.len() == n, "{}: shape {:?} needs {n} values, `re` has {}", ctx(), f.shape, f.re.len());
            let data: Vec<Complex64> = match &f.im {
                Some(im) => {
                    ensure!(im.len() == n, "{}: `im` has {} values, expected {n}", ctx(), im.len());
                    f.re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect()
                }
                None => f.re.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
            };
            let signal = Signal::new(f.offset.clone(), f.shape.clone(), data).with_context(ctx)?;
            let matrix = IntMatrix::new(self.dim, f.matrix.concat()).with_context(ctx)?;
            items.push(BankItem::new(Mask::new(signal, f.band), matrix));
        }
        let bank = FilterBank::new(items)?;
        ensure!(
            bank.separator() == self.separator,
            "separator {} disagrees with the band labels ({} low-pass filters)",
            self.separator,
            bank.separator()
        );
        Ok(bank)
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| anyhow!("{} is not a file path", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn bank_to_string(bank: &FilterBank) -> Result<String> {
    to_canonical(&BankFile::from_bank(bank))
}

pub fn bank_from_value(v: Value) -> Result<FilterBank> {
    let file: BankFile = serde_json::from_value(v).context("invalid bank document")?;
    file.to_bank()
}

pub fn read_bank(path: &Path) -> Result<FilterBank> {
    bank_from_value(read_json(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn write_bank(path: &Path, bank: &FilterBank) -> Result<()> {
    write_atomic(path, bank_to_string(bank)?.as_bytes())
}

/// A bank given inline or as `{"$ref": "path"}` relative to `base`.
fn bank_or_ref(v: &Value, base: &Path) -> Result<FilterBank> {
    let obj = v.as_object().ok_or_else(|| anyhow!("bank entry must be an object"))?;
    if let Some(r) = obj.get("$ref") {
        ensure!(obj.len() == 1, "a `$ref` entry must not carry other keys");
        let rel = r.as_str().ok_or_else(|| anyhow!("`$ref` must be a string"))?;
        return read_bank(&base.join(rel));
    }
    bank_from_value(v.clone())
}

/// Parses a plan document; `$ref` paths resolve against `base`.
pub fn plan_from_value(v: &Value, base: &Path) -> Result<TreePlan> {
    let obj = v.as_object().ok_or_else(|| anyhow!("plan must be a JSON object"))?;
    for key in obj.keys() {
        ensure!(["version", "dim", "depth", "levels"].contains(&key.as_str()), "unknown plan key `{key}`");
    }
    let version = obj.get("version").map_or(Some(SCHEMA_VERSION), |x| x.as_u64()).ok_or_else(|| anyhow!("`version` must be an integer"))?;
    check_version(version, "plan")?;
    let dim = obj.get("dim").and_then(Value::as_u64).ok_or_else(|| anyhow!("plan needs an integer `dim`"))? as usize;
    let depth = obj.get("depth").and_then(Value::as_u64).ok_or_else(|| anyhow!("plan needs an integer `depth`"))? as usize;
    let levels = obj.get("levels").and_then(Value::as_array).ok_or_else(|| anyhow!("plan needs a `levels` array"))?;
    ensure!(levels.len() == depth, "plan depth {depth} but {} levels", levels.len());
    let mut banks = Vec::new();
    let mut overrides = Vec::new();
    for (j, level) in levels.iter().enumerate() {
        let mut level = level.as_object().ok_or_else(|| anyhow!("level {j} must be an object"))?.clone();
        if let Some(ov) = level.remove("node_overrides") {
            let ov = ov.as_object().ok_or_else(|| anyhow!("level {j}: `node_overrides` must be an object"))?;
            for (label, bank) in ov {
                let node: NodeId = label.parse()?;
                ensure!(node.level() == j, "level {j}: override `{label}` names a node of level {}", node.level());
                overrides.push((node, bank_or_ref(bank, base).with_context(|| format!("override {label}"))?));
            }
        }
        banks.push(bank_or_ref(&Value::Object(level), base).with_context(|| format!("level {j}"))?);
    }
    let mut plan = TreePlan::new(dim, banks)?;
    for (node, bank) in overrides {
        plan = plan.with_override(node, bank)?;
    }
    Ok(plan)
}

pub fn read_plan(path: &Path) -> Result<TreePlan> {
    let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    plan_from_value(&read_json(path)?, &base).with_context(|| format!("in {}", path.display()))
}

/// Canonical plan document with every bank inline.
pub fn plan_to_string(plan: &TreePlan) -> Result<String> {
    let mut levels = Vec::new();
    for (j, bank) in plan.levels().iter().enumerate() {
        let mut v = serde_json::to_value(BankFile::from_bank(bank))?;
        let ov: BTreeMap<String, Value> = plan
            .overrides()
            .iter()
            .filter(|(n, _)| n.level() == j)
            .map(|(n, b)| Ok((n.encode(plan.depth()), serde_json::to_value(BankFile::from_bank(b))?)))
            .collect::<Result<_>>()?;
        if !ov.is_empty() {
            v.as_object_mut().expect("object").insert("node_overrides".into(), serde_json::to_value(ov)?);
        }
        levels.push(v);
    }
    let doc = serde_json::json!({
        "version": SCHEMA_VERSION,
        "dim": plan.dim(),
        "depth": plan.depth(),
        "levels": levels,
    });
    Ok(to_canonical_string(&doc))
}

pub fn write_plan(path: &Path, plan: &TreePlan) -> Result<()> {
    write_atomic(path, plan_to_string(plan)?.as_bytes())
}

/// Parses `"0,1,-1"`.
pub fn parse_shears(s: &str) -> Result<Vec<i64>> {
    let out: Vec<i64> =
        s.split(',').map(|t| t.trim().parse::<i64>().map_err(|_| anyhow!("bad shear `{}`", t.trim()))).collect::<Result<_>>()?;
    ensure!(!out.is_empty(), "no shears given");
    Ok(out)
}

/// Parses `"(0,0);(1,1)"`.
pub fn parse_shears_3d(s: &str) -> Result<Vec<(i64, i64)>> {
    let mut out = Vec::new();
    for part in s.split(';') {
        let t = part.trim();
        let inner =
            t.strip_prefix('(').and_then(|x| x.strip_suffix(')')).ok_or_else(|| anyhow!("bad shear pair `{t}`, expected `(s1,s2)`"))?;
        let v = parse_shears(inner)?;
        if v.len() != 2 {
            bail!("bad shear pair `{t}`, expected two integers");
        }
        out.push((v[0], v[1]));
    }
    Ok(out)
}

/// Parses `"0.25,0.5,0.25"`.
pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| anyhow!("bad number `{}`", t.trim()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use amra_core::bankgen::{shearlet_bank_2d, tensor_bank, SeedName};

    #[test]
    fn bank_roundtrip_is_byte_identical() {
        let bank = shearlet_bank_2d(&[0, 1], SeedName::LinearSpline).unwrap();
        let text = bank_to_string(&bank).unwrap();
        let back = bank_from_value(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, bank);
        assert_eq!(bank_to_string(&back).unwrap(), text);
    }

    #[test]
    fn bank_rejects_bad_documents() {
        let good = serde_json::to_value(BankFile::from_bank(&tensor_bank(1, 2, SeedName::Haar).unwrap())).unwrap();
        let mut v = good.clone();
        v["version"] = 7.into();
        assert!(bank_from_value(v).unwrap_err().to_string().contains("schema version"));
        let mut v = good.clone();
        v["separator"] = 2.into();
        assert!(bank_from_value(v).is_err());
        let mut v = good.clone();
        v["filters"][0]["re"] = serde_json::json!([0.5]);
        assert!(bank_from_value(v).is_err());
        let mut v = good;
        v["extra"] = 1.into();
        assert!(bank_from_value(v).is_err());
    }

    #[test]
    fn plan_roundtrip() {
        let bank = tensor_bank(2, 2, SeedName::Haar).unwrap();
        let plan = TreePlan::stationary(bank.clone(), 2)
            .unwrap()
            .with_override(NodeId::from_path(vec![1]).unwrap(), bank.relabel(&[0, 3]).unwrap())
            .unwrap();
        let text = plan_to_string(&plan).unwrap();
        assert!(text.contains("\"1_0\""));
        let back = plan_from_value(&serde_json::from_str(&text).unwrap(), Path::new(".")).unwrap();
        assert_eq!(back, plan);
        assert_eq!(plan_to_string(&back).unwrap(), text);
    }

    #[test]
    fn shear_parsing() {
        assert_eq!(parse_shears("0, 1,-1").unwrap(), vec![0, 1, -1]);
        assert_eq!(parse_shears_3d("(0,0);(1,-1)").unwrap(), vec![(0, 0), (1, -1)]);
        assert!(parse_shears_3d("(0,0,1)").is_err());
        assert!(parse_shears("a").is_err());
    }
}
