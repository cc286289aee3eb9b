//! Adaptive multi-level trees: plans, decomposition (FAD) and
//! reconstruction (FAR).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::bankgen::{shearlet_bank_2d, shearlet_bank_3d, SeedName};
use crate::error::{Error, Result};
use crate::intlat::RatMatrix;
use crate::ops::{decompose_step, reconstruct_step};
use crate::signal::Signal;
use crate::uep::{check_uep_general, FilterBank, UepReport, DEFAULT_TOL};

/// Path `(β_1, ..., β_j)` from the root; indices are 1-based positions in
/// the parent's bank. The empty path is the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(Vec<usize>);

impl NodeId {
    pub fn root() -> Self {
        NodeId(Vec::new())
    }

    pub fn from_path(path: Vec<usize>) -> Result<Self> {
        if path.contains(&0) {
            return Err(Error::InvalidPlan(format!("node path {path:?} has a zero index")));
        }
        Ok(NodeId(path))
    }

    pub fn path(&self) -> &[usize] {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// Child `i` (1-based).
    pub fn child(&self, i: usize) -> Self {
        let mut p = self.0.clone();
        p.push(i);
        NodeId(p)
    }

    pub fn parent(&self) -> Option<Self> {
        let (_, head) = self.0.split_last()?;
        Some(NodeId(head.to_vec()))
    }

    /// Zero-padded to length `depth`, joined with `_`; `"0"` for the root
    /// of a depth-0 plan.
    pub fn encode(&self, depth: usize) -> String {
        let mut p: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        while p.len() < depth.max(1) {
            p.push("0".into());
        }
        p.join("_")
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", p.join(","))
    }
}

impl FromStr for NodeId {
    type Err = Error;

    /// Parses the padded form produced by [`NodeId::encode`].
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPlan(format!("malformed node label `{s}`"));
        let mut path = s.split('_').map(|t| t.parse::<usize>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
        while path.last() == Some(&0) {
            path.pop();
        }
        if path.contains(&0) {
            return Err(bad());
        }
        Ok(NodeId(path))
    }
}

/// Which bank expands which low-pass node. Level `j` nodes use
/// `levels[j]` unless an override is registered for them.
#[derive(Clone, Debug, PartialEq)]
pub struct TreePlan {
    dim: usize,
    levels: Vec<FilterBank>,
    overrides: BTreeMap<NodeId, FilterBank>,
}

impl TreePlan {
    /// Plan of depth `levels.len()` with one bank per level.
    pub fn new(dim: usize, levels: Vec<FilterBank>) -> Result<Self> {
        let plan = Self { dim, levels, overrides: BTreeMap::new() };
        plan.check_structure()?;
        Ok(plan)
    }

    /// Same bank at every level.
    pub fn stationary(bank: FilterBank, depth: usize) -> Result<Self> {
        let dim = bank.dim();
        Self::new(dim, vec![bank; depth])
    }

    /// Registers `bank` for node `node`, which must be an expansion node.
    pub fn with_override(mut self, node: NodeId, bank: FilterBank) -> Result<Self> {
        self.overrides.insert(node, bank);
        self.check_structure()?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[FilterBank] {
        &self.levels
    }

    pub fn overrides(&self) -> &BTreeMap<NodeId, FilterBank> {
        &self.overrides
    }

    /// Bank used to expand `node` (level `< depth`).
    pub fn bank_for(&self, node: &NodeId) -> &FilterBank {
        self.overrides.get(node).unwrap_or(&self.levels[node.level()])
    }

    fn check_structure(&self) -> Result<()> {
        for bank in self.levels.iter().chain(self.overrides.values()) {
            if bank.dim() != self.dim {
                return Err(Error::DimMismatch { expected: self.dim, got: bank.dim() });
            }
        }
        let expansion: BTreeSet<NodeId> = self.expansion_nodes().into_iter().collect();
        for node in self.overrides.keys() {
            if !expansion.contains(node) {
                return Err(Error::InvalidPlan(format!("override at {node}, which is not an expanded low-pass node")));
            }
        }
        Ok(())
    }

    /// Low-pass nodes of level `j` (`ℒ^L_j`), sorted.
    pub fn low_nodes(&self, j: usize) -> Vec<NodeId> {
        let mut frontier = vec![NodeId::root()];
        for _ in 0..j.min(self.depth()) {
            frontier = frontier.iter().flat_map(|a| (1..=self.bank_for(a).separator()).map(move |i| a.child(i))).collect();
        }
        if j > self.depth() {
            return Vec::new();
        }
        frontier
    }

    /// High-pass nodes of level `j` (`ℒ^H_j`, `j >= 1`), sorted.
    pub fn high_nodes(&self, j: usize) -> Vec<NodeId> {
        if j == 0 || j > self.depth() {
            return Vec::new();
        }
        self.low_nodes(j - 1)
            .iter()
            .flat_map(|a| {
                let b = self.bank_for(a);
                (b.separator() + 1..=b.len()).map(move |i| a.child(i))
            })
            .collect()
    }

    /// All nodes that get expanded, level by level.
    pub fn expansion_nodes(&self) -> Vec<NodeId> {
        (0..self.depth()).flat_map(|j| self.low_nodes(j)).collect()
    }

    /// Predicted pyramid keys: `(ℒ^L_J, ∪_j ℒ^H_j)`.
    pub fn leaf_sets(&self) -> (BTreeSet<NodeId>, BTreeSet<NodeId>) {
        let low = self.low_nodes(self.depth()).into_iter().collect();
        let high = (1..=self.depth()).flat_map(|j| self.high_nodes(j)).collect();
        (low, high)
    }

    pub fn is_leaf(&self, node: &NodeId) -> bool {
        let (low, high) = self.leaf_sets();
        low.contains(node) || high.contains(node)
    }

    /// True if `node` exists in the tree (root, expansion node or leaf).
    pub fn contains(&self, node: &NodeId) -> bool {
        let Some(parent) = node.parent() else { return true };
        if parent.level() >= self.depth() || !self.low_nodes(parent.level()).contains(&parent) {
            return false;
        }
        let i = *node.path().last().expect("non-root");
        i <= self.bank_for(&parent).len()
    }

    /// `(item matrix)` of each step along the path to `node`.
    pub fn path_items(&self, node: &NodeId) -> Result<Vec<crate::uep::BankItem>> {
        if !self.contains(node) {
            return Err(Error::InvalidPlan(format!("node {node} is not in the plan")));
        }
        let mut cur = NodeId::root();
        let mut out = Vec::new();
        for &i in node.path() {
            out.push(self.bank_for(&cur).items()[i - 1].clone());
            cur = cur.child(i);
        }
        Ok(out)
    }

    /// `N_β = M_β^{-1} M_{β^(1)}^{-1} ··· M_{β^(j-1)}^{-1}`; identity at the root.
    pub fn accumulated_matrix(&self, node: &NodeId) -> Result<RatMatrix> {
        let mut n = RatMatrix::identity(self.dim);
        for item in self.path_items(node)? {
            n = item.matrix.inverse()?.mul(&n);
        }
        Ok(n)
    }

    /// SHA-256 over a canonical binary description of the plan.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"amra-plan\0");
        h.update((self.dim as u64).to_le_bytes());
        h.update((self.depth() as u64).to_le_bytes());
        for bank in &self.levels {
            hash_bank(&mut h, bank);
        }
        for (node, bank) in &self.overrides {
            h.update(node.encode(self.depth()).as_bytes());
            h.update(b"\0");
            hash_bank(&mut h, bank);
        }
        hex::encode(h.finalize())
    }
}

fn hash_bank(h: &mut Sha256, bank: &FilterBank) {
    h.update((bank.len() as u64).to_le_bytes());
    h.update((bank.separator() as u64).to_le_bytes());
    for it in bank.items() {
        for &e in it.matrix.entries() {
            h.update(e.to_le_bytes());
        }
        let c = it.mask.coeffs();
        for &o in c.offset() {
            h.update(o.to_le_bytes());
        }
        for &s in c.shape() {
            h.update((s as u64).to_le_bytes());
        }
        for v in c.data() {
            h.update(v.re.to_bits().to_le_bytes());
            h.update(v.im.to_bits().to_le_bytes());
        }
    }
}

/// Per-node certification results of a plan.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanReport {
    pub certified: bool,
    pub worst_violation: f64,
    /// One entry per expansion node, in level order.
    pub nodes: Vec<(NodeId, UepReport)>,
}

impl PlanReport {
    pub fn refuted_nodes(&self) -> Vec<&NodeId> {
        self.nodes.iter().filter(|(_, r)| !r.certified).map(|(n, _)| n).collect()
    }
}

/// Runs the general UEP check on the bank of every expansion node.
pub fn validate_plan(plan: &TreePlan) -> Result<PlanReport> {
    let mut cache: Vec<(&FilterBank, UepReport)> = Vec::new();
    let mut nodes = Vec::new();
    for node in plan.expansion_nodes() {
        let bank = plan.bank_for(&node);
        let report = match cache.iter().find(|(b, _)| *b == bank) {
            Some((_, r)) => r.clone(),
            None => {
                let r = check_uep_general(bank, DEFAULT_TOL)?;
                cache.push((bank, r.clone()));
                r
            }
        };
        nodes.push((node, report));
    }
    let worst = nodes.iter().map(|(_, r)| r.worst_violation).fold(0.0, f64::max);
    Ok(PlanReport { certified: nodes.iter().all(|(_, r)| r.certified), worst_violation: worst, nodes })
}

/// Leaf coefficients of an adaptive decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct Pyramid {
    pub depth: usize,
    /// `v_β`, `β ∈ ℒ^L_J`.
    pub low: BTreeMap<NodeId, Signal>,
    /// `w_β`, `β ∈ ∪_j ℒ^H_j`.
    pub high: BTreeMap<NodeId, Signal>,
    /// Digest of the plan that produced the pyramid.
    pub digest: String,
    /// Accumulated matrix `N_β` of every leaf.
    pub matrices: BTreeMap<NodeId, RatMatrix>,
}

impl Pyramid {
    pub fn leaf(&self, node: &NodeId) -> Option<&Signal> {
        self.low.get(node).or_else(|| self.high.get(node))
    }

    /// Leaves in key order, low-pass first.
    pub fn leaves(&self) -> impl Iterator<Item = (&NodeId, &Signal)> {
        self.low.iter().chain(self.high.iter())
    }

    /// Copy with every high-pass leaf set to zero.
    pub fn without_high(&self) -> Pyramid {
        let mut p = self.clone();
        for s in p.high.values_mut() {
            *s = Signal::empty(s.dim());
        }
        p
    }
}

/// Energy balance of one expansion step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepEnergy {
    pub node: NodeId,
    /// `‖v_α‖²`.
    pub parent: f64,
    /// `Σ_β |det M_β| ‖v_β‖²`.
    pub children: f64,
}

impl StepEnergy {
    pub fn relative_defect(&self) -> f64 {
        if self.parent == 0.0 {
            self.children.abs()
        } else {
            (self.children - self.parent).abs() / self.parent
        }
    }
}

/// Decomposition after certifying the plan.
pub fn fad(plan: &TreePlan, v: &Signal) -> Result<Pyramid> {
    let report = validate_plan(plan)?;
    if !report.certified {
        let nodes: Vec<String> = report.refuted_nodes().iter().map(|n| n.to_string()).collect();
        return Err(Error::InvalidPlan(format!("uncertified banks at {} (worst violation {:e})", nodes.join(" "), report.worst_violation)));
    }
    fad_unchecked(plan, v)
}

/// Decomposition without certifying the plan first.
pub fn fad_unchecked(plan: &TreePlan, v: &Signal) -> Result<Pyramid> {
    fad_traced(plan, v).map(|(p, _)| p)
}

/// Decomposition that also records the energy balance of every step.
pub fn fad_traced(plan: &TreePlan, v: &Signal) -> Result<(Pyramid, Vec<StepEnergy>)> {
    if v.dim() != plan.dim() {
        return Err(Error::DimMismatch { expected: plan.dim(), got: v.dim() });
    }
    let mut frontier = vec![(NodeId::root(), v.clone())];
    let mut high = BTreeMap::new();
    let mut trace = Vec::new();
    for _ in 0..plan.depth() {
        let expanded: Vec<(NodeId, Vec<Signal>, StepEnergy)> = frontier
            .par_iter()
            .map(|(node, sig)| {
                let bank = plan.bank_for(node);
                let parts = decompose_step(bank, sig)?;
                let children = bank.items().iter().zip(&parts).map(|(it, p)| it.matrix.det().unsigned_abs() as f64 * p.norm_sq()).sum();
                Ok((node.clone(), parts, StepEnergy { node: node.clone(), parent: sig.norm_sq(), children }))
            })
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for (node, parts, energy) in expanded {
            let sep = plan.bank_for(&node).separator();
            for (i, part) in parts.into_iter().enumerate() {
                let child = node.child(i + 1);
                if i < sep {
                    next.push((child, part));
                } else {
                    high.insert(child, part);
                }
            }
            trace.push(energy);
        }
        frontier = next;
    }
    let low: BTreeMap<NodeId, Signal> = frontier.into_iter().collect();
    let mut matrices = BTreeMap::new();
    for node in low.keys().chain(high.keys()) {
        matrices.insert(node.clone(), plan.accumulated_matrix(node)?);
    }
    let pyramid = Pyramid { depth: plan.depth(), low, high, digest: plan.digest(), matrices };
    Ok((pyramid, trace))
}

/// Checks that the pyramid's key sets are exactly the plan's leaf sets.
pub fn check_pyramid(plan: &TreePlan, p: &Pyramid) -> Result<()> {
    if p.digest != plan.digest() {
        return Err(Error::PyramidMismatch("plan digest differs".into()));
    }
    let (low, high) = plan.leaf_sets();
    let got_low: BTreeSet<NodeId> = p.low.keys().cloned().collect();
    let got_high: BTreeSet<NodeId> = p.high.keys().cloned().collect();
    for (want, got, kind) in [(&low, &got_low, "low-pass"), (&high, &got_high, "high-pass")] {
        if let Some(n) = want.difference(got).next() {
            return Err(Error::PyramidMismatch(format!("missing {kind} leaf {n}")));
        }
        if let Some(n) = got.difference(want).next() {
            return Err(Error::PyramidMismatch(format!("unexpected {kind} leaf {n}")));
        }
    }
    for s in p.leaves().map(|(_, s)| s) {
        if s.dim() != plan.dim() {
            return Err(Error::DimMismatch { expected: plan.dim(), got: s.dim() });
        }
    }
    Ok(())
}

/// Reconstruction from the leaves, deepest level first.
pub fn far(plan: &TreePlan, p: &Pyramid) -> Result<Signal> {
    check_pyramid(plan, p)?;
    let mut current: BTreeMap<NodeId, Signal> = p.low.clone();
    for j in (0..plan.depth()).rev() {
        let nodes = plan.low_nodes(j);
        let rebuilt: Vec<(NodeId, Signal)> = nodes
            .par_iter()
            .map(|node| {
                let bank = plan.bank_for(node);
                let parts: Vec<Signal> = (1..=bank.len())
                    .map(|i| {
                        let c = node.child(i);
                        if i <= bank.separator() {
                            current[&c].clone()
                        } else {
                            p.high[&c].clone()
                        }
                    })
                    .collect();
                Ok((node.clone(), reconstruct_step(bank, &parts)?))
            })
            .collect::<Result<_>>()?;
        current = rebuilt.into_iter().collect();
    }
    Ok(current.remove(&NodeId::root()).expect("root reconstructed"))
}

/// Plan whose level-`j` nodes all use `shearlet_bank_2d(levels[j])`.
pub fn shearlet_plan_2d(levels: &[Vec<i64>], seed: SeedName) -> Result<TreePlan> {
    if levels.is_empty() {
        return Err(Error::Empty("shearlet levels"));
    }
    let banks = levels.iter().map(|s| shearlet_bank_2d(s, seed)).collect::<Result<Vec<_>>>()?;
    TreePlan::new(2, banks)
}

/// Plan whose level-`j` nodes all use `shearlet_bank_3d(levels[j])`.
pub fn shearlet_plan_3d(levels: &[Vec<(i64, i64)>], seed: SeedName) -> Result<TreePlan> {
    if levels.is_empty() {
        return Err(Error::Empty("shearlet levels"));
    }
    let banks = levels.iter().map(|s| shearlet_bank_3d(s, seed)).collect::<Result<Vec<_>>>()?;
    TreePlan::new(3, banks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bankgen::tensor_bank;
    use crate::intlat::IntMatrix;
    use crate::mask::{Band, Mask};
    use crate::uep::{random_signal, BankItem};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn haar1() -> FilterBank {
        let two = IntMatrix::scalar(1, 2);
        FilterBank::new(vec![
            BankItem::new(Mask::from_real_1d(0, &[0.5, 0.5], Band::Low), two.clone()),
            BankItem::new(Mask::from_real_1d(0, &[0.5, -0.5], Band::High), two),
        ])
        .unwrap()
    }

    #[test]
    fn node_encoding() {
        let n = NodeId::from_path(vec![1, 3]).unwrap();
        assert_eq!(n.encode(4), "1_3_0_0");
        assert_eq!("1_3_0_0".parse::<NodeId>().unwrap(), n);
        assert_eq!(NodeId::root().encode(0), "0");
        assert_eq!("0".parse::<NodeId>().unwrap(), NodeId::root());
        assert!("1_0_2".parse::<NodeId>().is_err());
        assert_eq!(n.parent().unwrap().child(3), n);
        assert_eq!(n.to_string(), "(1,3)");
    }

    #[test]
    fn depth_zero() {
        let plan = TreePlan::new(1, vec![]).unwrap();
        assert!(validate_plan(&plan).unwrap().certified);
        let v = Signal::from_real(vec![2], vec![3], &[1.0, 2.0, 3.0]).unwrap();
        let p = fad(&plan, &v).unwrap();
        assert_eq!(p.low.len(), 1);
        assert!(p.high.is_empty());
        assert_eq!(p.low[&NodeId::root()], v);
        assert_eq!(far(&plan, &p).unwrap(), v);
    }

    #[test]
    fn haar_one_level_delta() {
        let plan = TreePlan::stationary(haar1(), 1).unwrap();
        let p = fad(&plan, &Signal::delta(&[0])).unwrap();
        let one = NodeId::from_path(vec![1]).unwrap();
        let two = NodeId::from_path(vec![2]).unwrap();
        assert!(p.low[&one].same_function(&Signal::delta(&[0]).scaled(0.5.into()), 0.0));
        assert!(p.high[&two].same_function(&Signal::delta(&[0]).scaled(0.5.into()), 0.0));
        let lowpass = far(&plan, &p.without_high()).unwrap();
        let want = Signal::from_real(vec![0], vec![2], &[0.5, 0.5]).unwrap();
        assert!(lowpass.same_function(&want, 0.0));
    }

    #[test]
    fn tensor_haar_leaf_counts() {
        let plan = TreePlan::stationary(tensor_bank(2, 2, SeedName::Haar).unwrap(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_signal(&mut rng, 2, 64);
        let (p, trace) = fad_traced(&plan, &v).unwrap();
        assert_eq!(p.low.len(), 1);
        assert_eq!(p.high.len(), 9);
        let (low, high) = plan.leaf_sets();
        assert_eq!(p.low.keys().cloned().collect::<BTreeSet<_>>(), low);
        assert_eq!(p.high.keys().cloned().collect::<BTreeSet<_>>(), high);
        assert!(trace.iter().all(|e| e.relative_defect() < 1e-10));
        assert!(far(&plan, &p).unwrap().max_abs_diff(&v) < 1e-12);
        let n = NodeId::from_path(vec![1, 1, 4]).unwrap();
        assert_eq!(p.matrices[&n], IntMatrix::scalar(2, 8).inverse().unwrap());
    }

    #[test]
    fn perturbed_plan_refuted() {
        let bad = haar1().scaled(0.9);
        let plan = TreePlan::stationary(bad, 1).unwrap();
        let r = validate_plan(&plan).unwrap();
        assert!(!r.certified);
        assert_eq!(r.refuted_nodes(), vec![&NodeId::root()]);
        assert!(fad(&plan, &Signal::delta(&[0])).is_err());
    }

    #[test]
    fn pyramid_mismatch_detected() {
        let plan = TreePlan::stationary(haar1(), 2).unwrap();
        let mut p = fad(&plan, &Signal::delta(&[3])).unwrap();
        p.high.remove(&NodeId::from_path(vec![2]).unwrap());
        assert!(matches!(far(&plan, &p), Err(Error::PyramidMismatch(_))));
        let other = TreePlan::stationary(haar1(), 1).unwrap();
        let p = fad(&other, &Signal::delta(&[3])).unwrap();
        assert!(matches!(far(&plan, &p), Err(Error::PyramidMismatch(_))));
    }

    #[test]
    fn overrides() {
        let plan = TreePlan::stationary(tensor_bank(2, 2, SeedName::Haar).unwrap(), 2).unwrap();
        let two_low = tensor_bank(2, 2, SeedName::Haar).unwrap().relabel(&[0, 1]).unwrap();
        let plan = plan.with_override(NodeId::root(), two_low).unwrap();
        assert_eq!(plan.low_nodes(1).len(), 2);
        assert_eq!(plan.leaf_sets().1.len(), 2 + 6);
        let leaf = NodeId::from_path(vec![3]).unwrap();
        assert!(plan.clone().with_override(leaf, haar1()).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = random_signal(&mut rng, 2, 20);
        let p = fad(&plan, &v).unwrap();
        assert!(far(&plan, &p).unwrap().max_abs_diff(&v) < 1e-12);
    }

    #[test]
    fn shearlet_plans_roundtrip() {
        let plan = shearlet_plan_2d(&[vec![0, 1], vec![-1, 0, 1]], SeedName::Haar).unwrap();
        assert!(validate_plan(&plan).unwrap().certified);
        // level 1: 16 filters, 2 low; level 2: 2 × 16 filters, 2 low each.
        assert_eq!(plan.leaf_sets().0.len(), 4);
        assert_eq!(plan.leaf_sets().1.len(), 14 + 28);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = random_signal(&mut rng, 2, 32);
        let p = fad(&plan, &v).unwrap();
        assert!(far(&plan, &p).unwrap().max_abs_diff(&v) < 1e-10);
    }
}
