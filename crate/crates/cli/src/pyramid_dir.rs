//! Coefficient directories: `manifest.json` plus one raw `.f64` file per leaf.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use amra_core::amra::check_pyramid;
use amra_core::{Band, NodeId, Pyramid, Signal, TreePlan};
use anyhow::{ensure, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::canon::to_canonical;
use crate::files::{check_version, write_atomic, SCHEMA_VERSION};
use crate::Refusal;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputRaster {
    pub offset: Vec<i64>,
    pub shape: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxval: Option<u16>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub node: String,
    pub band: Band,
    pub offset: Vec<i64>,
    pub shape: Vec<usize>,
    /// Accumulated matrix, entries as exact fractions.
    pub matrix: Vec<Vec<String>>,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag_file: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u64,
    pub digest: String,
    pub dim: usize,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputRaster>,
    pub nodes: Vec<NodeEntry>,
}

pub fn f64_bytes(values: impl Iterator<Item = f64>) -> Vec<u8> {
    values.flat_map(f64::to_le_bytes).collect()
}

pub fn read_f64_file(path: &Path, expect: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.len() != 8 * expect {
        return Err(Refusal(format!("{} holds {} bytes, shape needs {}", path.display(), bytes.len(), 8 * expect)).into());
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

/// Writes `p` into `dir`, creating it if needed.
pub fn write_pyramid(dir: &Path, plan: &TreePlan, p: &Pyramid, input: Option<InputRaster>) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut nodes = Vec::new();
    for (node, s) in p.leaves() {
        let label = node.encode(plan.depth());
        let file = format!("{label}.f64");
        write_atomic(&dir.join(&file), &f64_bytes(s.data().iter().map(|v| v.re)))?;
        let imag_file = if s.is_real() {
            None
        } else {
            let f = format!("{label}.imag.f64");
            write_atomic(&dir.join(&f), &f64_bytes(s.data().iter().map(|v| v.im)))?;
            Some(f)
        };
        nodes.push(NodeEntry {
            node: label,
            band: if p.low.contains_key(node) { Band::Low } else { Band::High },
            offset: s.offset().to_vec(),
            shape: s.shape().to_vec(),
            matrix: p.matrices[node].to_strings(),
            file,
            imag_file,
        });
    }
    let manifest = Manifest { version: SCHEMA_VERSION, digest: p.digest.clone(), dim: plan.dim(), depth: p.depth, input, nodes };
    write_atomic(&dir.join(MANIFEST), to_canonical(&manifest)?.as_bytes())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let m: Manifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    check_version(m.version, "manifest")?;
    Ok(m)
}

/// Loads the pyramid in `dir` and checks it against `plan`.
pub fn read_pyramid(dir: &Path, plan: &TreePlan) -> Result<(Pyramid, Manifest)> {
    let m = read_manifest(dir)?;
    let mismatch = |msg: String| -> anyhow::Error { Refusal(msg).into() };
    if m.digest != plan.digest() {
        return Err(mismatch(format!("manifest digest {} does not match plan digest {}", m.digest, plan.digest())));
    }
    if m.dim != plan.dim() || m.depth != plan.depth() {
        return Err(mismatch(format!("manifest is {}-D depth {}, plan is {}-D depth {}", m.dim, m.depth, plan.dim(), plan.depth())));
    }
    let mut low = BTreeMap::new();
    let mut high = BTreeMap::new();
    let mut matrices = BTreeMap::new();
    for e in &m.nodes {
        let node: NodeId = e.node.parse()?;
        ensure!(e.offset.len() == plan.dim() && e.shape.len() == plan.dim(), "node {}: offset/shape length", e.node);
        let n: usize = e.shape.iter().product();
        let re = read_f64_file(&dir.join(&e.file), n)?;
        let data: Vec<Complex64> = match &e.imag_file {
            Some(f) => re.iter().zip(read_f64_file(&dir.join(f), n)?).map(|(&a, b)| Complex64::new(a, b)).collect(),
            None => re.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        };
        let s = Signal::new(e.offset.clone(), e.shape.clone(), data)?;
        if plan.contains(&node) {
            let want = plan.accumulated_matrix(&node)?.to_strings();
            if want != e.matrix {
                return Err(mismatch(format!("node {}: manifest matrix {:?}, plan gives {:?}", e.node, e.matrix, want)));
            }
            matrices.insert(node.clone(), plan.accumulated_matrix(&node)?);
        }
        let slot = match e.band {
            Band::Low => &mut low,
            Band::High => &mut high,
        };
        if slot.insert(node, s).is_some() {
            return Err(mismatch(format!("node {} listed twice", e.node)));
        }
    }
    let p = Pyramid { depth: m.depth, low, high, digest: m.digest.clone(), matrices };
    check_pyramid(plan, &p).map_err(|e| mismatch(e.to_string()))?;
    Ok((p, m))
}
