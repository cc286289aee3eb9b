//! Filter banks and certification of the unitary extension principle.
//!
//! A bank `{(a_ι, M_ι)}` reconstructs perfectly, `Σ_ι S_ι T_ι v = v`, iff
//! for every `ω ∈ Ω = ∪_ι Ω_{M_ι}`
//!
//! ```text
//! Σ_{ι : ω ∈ Ω_{M_ι}} â_ι(ξ) conj(â_ι(ξ + 2πω)) = δ(ω).
//! ```
//!
//! Both sides are trigonometric polynomials, so the identity is checked
//! coefficient by coefficient rather than by sampling `ξ`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlat::{coset_reps, dual_contains, dual_coset_reps, lattice_equal, CosetReducer, IntMatrix, RationalVec};
use crate::mask::{correlation_all, Band, Mask};
use crate::ops::{decompose_step, reconstruct_step};
use crate::signal::{for_each_point, Signal};

/// Default absolute tolerance per Fourier coefficient.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Reports keep at most this many violations.
pub const MAX_REPORTED: usize = 100;

/// One filter of a bank together with its dilation matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BankItem {
    pub mask: Mask,
    pub matrix: IntMatrix,
}

impl BankItem {
    pub fn new(mask: Mask, matrix: IntMatrix) -> Self {
        Self { mask, matrix }
    }

    pub fn band(&self) -> Band {
        self.mask.band()
    }
}

/// Filters for one expansion step. Low-pass items come first; the separator
/// `s` is the number of low-pass items, `1 <= s <= r`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    dim: usize,
    items: Vec<BankItem>,
    separator: usize,
}

impl FilterBank {
    /// Validates dimensions, matrices and band ordering.
    pub fn new(items: Vec<BankItem>) -> Result<Self> {
        let first = items.first().ok_or(Error::Empty("filter bank"))?;
        let dim = first.mask.dim();
        for item in &items {
            if item.mask.dim() != dim {
                return Err(Error::DimMismatch { expected: dim, got: item.mask.dim() });
            }
            if item.matrix.dim() != dim {
                return Err(Error::DimMismatch { expected: dim, got: item.matrix.dim() });
            }
            item.matrix.nonsingular()?;
        }
        let separator = items.iter().take_while(|i| i.band() == Band::Low).count();
        if separator == 0 || items[separator..].iter().any(|i| i.band() == Band::Low) {
            return Err(Error::BandOrder);
        }
        Ok(Self { dim, items, separator })
    }

    /// Like [`FilterBank::new`] but stably moves low-pass items to the front.
    pub fn from_unordered(items: Vec<BankItem>) -> Result<Self> {
        let (low, high): (Vec<_>, Vec<_>) = items.into_iter().partition(|i| i.band() == Band::Low);
        Self::new(low.into_iter().chain(high).collect())
    }

    /// Same filters with a caller-chosen low-pass set (indices into the
    /// current order). The UEP does not depend on the labels.
    pub fn relabel(&self, low: &[usize]) -> Result<Self> {
        let items = self
            .items
            .iter()
            .enumerate()
            .map(|(i, it)| {
                let band = if low.contains(&i) { Band::Low } else { Band::High };
                BankItem::new(it.mask.clone().with_band(band), it.matrix.clone())
            })
            .collect();
        Self::from_unordered(items)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn items(&self) -> &[BankItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn separator(&self) -> usize {
        self.separator
    }

    /// Every mask multiplied by `c`; matrices and labels unchanged.
    pub fn scaled(&self, c: f64) -> Self {
        let items = self.items.iter().map(|i| BankItem::new(i.mask.scale(c), i.matrix.clone())).collect();
        Self { dim: self.dim, items, separator: self.separator }
    }

    /// Replace the matrix of item `index`.
    pub fn with_matrix(&self, index: usize, matrix: IntMatrix) -> Result<Self> {
        let mut items = self.items.clone();
        items[index].matrix = matrix;
        Self::new(items)
    }

    /// Replace the mask of item `index`, keeping its band label.
    pub fn with_mask(&self, index: usize, mask: Mask) -> Result<Self> {
        let mut items = self.items.clone();
        let band = items[index].band();
        items[index].mask = mask.with_band(band);
        Self::new(items)
    }

    /// Distinct dilation matrices, in first-seen order.
    pub fn matrices(&self) -> Vec<IntMatrix> {
        let mut seen = Vec::new();
        for it in &self.items {
            if !seen.contains(&it.matrix) {
                seen.push(it.matrix.clone());
            }
        }
        seen
    }
}

/// A single failed coefficient identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Aliasing frequency, for the frequency-side check.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub omega: Option<RationalVec>,
    /// Coset representative, for the spatial check.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coset: Option<Vec<i64>>,
    /// Fourier coefficient (or spatial lag) index.
    pub index: Vec<i64>,
    pub residual: f64,
}

/// Outcome of a UEP check. `certified` holds iff `worst_violation <= tol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UepReport {
    pub certified: bool,
    pub worst_violation: f64,
    pub violations: Vec<Violation>,
}

impl UepReport {
    fn assemble(worst: f64, mut violations: Vec<Violation>, tol: f64) -> Self {
        violations.sort_by(|a, b| b.residual.total_cmp(&a.residual));
        violations.truncate(MAX_REPORTED);
        Self { certified: worst <= tol, worst_violation: worst, violations }
    }
}

/// `Ω = ∪_ι Ω_{M_ι}`, deduplicated and sorted.
pub fn aliasing_set(bank: &FilterBank) -> Result<Vec<RationalVec>> {
    let mut all = BTreeSet::new();
    for m in bank.matrices() {
        all.extend(dual_coset_reps(&m)?);
    }
    Ok(all.into_iter().collect())
}

/// Coefficients of `Σ_{ι: ω ∈ Ω_{M_ι}} â_ι(ξ) conj(â_ι(ξ + 2πω))` in the
/// basis `exp(-i m·ξ)`.
pub fn uep_polynomial(bank: &FilterBank, omega: &RationalVec) -> Signal {
    // correlation_all twists by exp(-2πi ω'·n); the shifted conjugate symbol
    // contributes exp(+2πi ω·n), hence ω' = -ω.
    let twist = omega.neg_mod1();
    let members: Vec<bool> = bank.matrices().iter().map(|m| dual_contains(m, omega)).collect();
    let mats = bank.matrices();
    let mut acc = Signal::empty(bank.dim());
    for item in bank.items() {
        let idx = mats.iter().position(|m| m == &item.matrix).expect("matrix listed");
        if members[idx] {
            acc.add_assign(&correlation_all(&item.mask, &item.mask, &twist));
        }
    }
    acc
}

/// Certifies or refutes the general UEP for a bank.
pub fn check_uep_general(bank: &FilterBank, tol: f64) -> Result<UepReport> {
    let omegas = aliasing_set(bank)?;
    let per_omega: Vec<(f64, Vec<Violation>)> = omegas
        .par_iter()
        .map(|omega| {
            let poly = uep_polynomial(bank, omega);
            let zero = vec![0i64; bank.dim()];
            let mut worst = 0.0f64;
            let mut bad = Vec::new();
            let target_at = |m: &[i64]| if omega.is_zero() && m == zero.as_slice() { 1.0 } else { 0.0 };
            let mut seen_origin = false;
            for_each_point(poly.offset(), poly.shape(), |lin, m| {
                if m == zero.as_slice() {
                    seen_origin = true;
                }
                let r = (poly.data()[lin] - Complex64::new(target_at(m), 0.0)).norm();
                worst = worst.max(r);
                if r > tol {
                    bad.push(Violation { omega: Some(omega.clone()), coset: None, index: m.to_vec(), residual: r });
                }
            });
            if !seen_origin && omega.is_zero() {
                worst = worst.max(1.0);
                if 1.0 > tol {
                    bad.push(Violation { omega: Some(omega.clone()), coset: None, index: zero.clone(), residual: 1.0 });
                }
            }
            (worst, bad)
        })
        .collect();
    let worst = per_omega.iter().map(|(w, _)| *w).fold(0.0, f64::max);
    let violations = per_omega.into_iter().flat_map(|(_, v)| v).collect();
    Ok(UepReport::assemble(worst, violations, tol))
}

type Tagged = (Vec<i64>, Complex64, Vec<i64>);

/// Spatial form for banks whose matrices all generate one lattice `M Z^d`:
/// `Σ_ι Σ_n conj(a_ι(k + M n + γ)) a_ι(M n + γ) = δ(k) / |det M|`.
pub fn check_uep_same_lattice(bank: &FilterBank, tol: f64) -> Result<UepReport> {
    let m = bank.items()[0].matrix.clone();
    for item in bank.items() {
        if !lattice_equal(&m, &item.matrix)? {
            return Err(Error::MixedLattice);
        }
    }
    let det = m.det().unsigned_abs() as f64;
    let reducer = CosetReducer::new(&m)?;
    let d = bank.dim();

    // (position, coefficient, coset) per filter
    let entries: Vec<Vec<Tagged>> = bank
        .items()
        .iter()
        .map(|it| {
            it.mask
                .coeffs()
                .entries()
                .into_iter()
                .map(|(p, v)| {
                    let g = reducer.reduce(&p);
                    (p, v, g)
                })
                .collect()
        })
        .collect();

    let mut worst = 0.0f64;
    let mut violations = Vec::new();
    for gamma in coset_reps(&m)? {
        let mut acc: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        acc.insert(vec![0; d], Complex64::new(0.0, 0.0));
        for mask_entries in &entries {
            for (p, ap, g) in mask_entries {
                if g != &gamma {
                    continue;
                }
                for (q, aq, _) in mask_entries {
                    let k: Vec<i64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
                    *acc.entry(k).or_insert(Complex64::new(0.0, 0.0)) += aq.conj() * ap;
                }
            }
        }
        for (k, v) in acc {
            let target = if k.iter().all(|&x| x == 0) { 1.0 / det } else { 0.0 };
            let r = (v - Complex64::new(target, 0.0)).norm();
            worst = worst.max(r);
            if r > tol {
                violations.push(Violation { omega: None, coset: Some(gamma.clone()), index: k, residual: r });
            }
        }
    }
    Ok(UepReport::assemble(worst, violations, tol))
}

/// Random signal with box size up to `max_side` per axis.
pub fn random_signal<R: Rng>(rng: &mut R, dim: usize, max_side: usize) -> Signal {
    let offset: Vec<i64> = (0..dim).map(|_| rng.random_range(-6..=6)).collect();
    let shape: Vec<usize> = (0..dim).map(|_| rng.random_range(1..=max_side)).collect();
    let n: usize = shape.iter().product();
    let data: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    Signal::from_real(offset, shape, &data).expect("valid random box")
}

/// Largest single-step reconstruction error over `trials` random signals.
pub fn empirical_pr_error<R: Rng>(bank: &FilterBank, trials: usize, rng: &mut R) -> Result<f64> {
    let side = match bank.dim() {
        1 => 33,
        2 => 12,
        _ => 6,
    };
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v = random_signal(rng, bank.dim(), side);
        let back = reconstruct_step(bank, &decompose_step(bank, &v)?)?;
        worst = worst.max(back.max_abs_diff(&v));
    }
    Ok(worst)
}

/// Verdicts of the frequency-side certificate and of an empirical
/// perfect-reconstruction test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Agreement {
    pub certified: bool,
    pub reconstructs: bool,
    pub worst_violation: f64,
    pub reconstruction_error: f64,
}

impl Agreement {
    pub fn agree(&self) -> bool {
        self.certified == self.reconstructs
    }
}

/// Cross-validates [`check_uep_general`] against `reconstruct ∘ decompose`
/// on 50 random signals.
pub fn agreement_with_seed(bank: &FilterBank, seed: u64) -> Result<Agreement> {
    let report = check_uep_general(bank, DEFAULT_TOL)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let err = empirical_pr_error(bank, 50, &mut rng)?;
    Ok(Agreement {
        certified: report.certified,
        reconstructs: err <= DEFAULT_TOL,
        worst_violation: report.worst_violation,
        reconstruction_error: err,
    })
}

pub fn agreement(bank: &FilterBank) -> Result<bool> {
    Ok(agreement_with_seed(bank, 0x5eed)?.agree())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn haar_bank(high_scale: f64) -> FilterBank {
        let two = IntMatrix::scalar(1, 2);
        FilterBank::new(vec![
            BankItem::new(Mask::from_real_1d(0, &[0.5, 0.5], Band::Low), two.clone()),
            BankItem::new(Mask::from_real_1d(0, &[0.5 * high_scale, -0.5 * high_scale], Band::High), two),
        ])
        .unwrap()
    }

    /// Independent oracle: evaluate the UEP sum on a dense grid of ξ.
    fn sampled_residual(bank: &FilterBank, omega: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..64 {
            let xi = i as f64 * 0.1;
            let s: Complex64 = bank
                .items()
                .iter()
                .map(|it| it.mask.symbol(&[xi]) * it.mask.symbol(&[xi + 2.0 * std::f64::consts::PI * omega]).conj())
                .sum();
            let target = if omega == 0.0 { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
        worst
    }

    #[test]
    fn haar_certified() {
        let bank = haar_bank(1.0);
        let r = check_uep_general(&bank, DEFAULT_TOL).unwrap();
        assert!(r.certified, "{r:?}");
        assert!(r.violations.is_empty());
        assert!(sampled_residual(&bank, 0.0) < 1e-14 && sampled_residual(&bank, 0.5) < 1e-14);
        assert!(check_uep_same_lattice(&bank, DEFAULT_TOL).unwrap().certified);
    }

    #[test]
    fn delta_certified() {
        let bank = FilterBank::new(vec![BankItem::new(Mask::delta(2, Band::Low), IntMatrix::identity(2))]).unwrap();
        assert!(check_uep_general(&bank, DEFAULT_TOL).unwrap().certified);
        assert!(agreement(&bank).unwrap());
    }

    #[test]
    fn perturbed_haar_refuted() {
        let bank = haar_bank(0.9);
        let r = check_uep_general(&bank, DEFAULT_TOL).unwrap();
        assert!(!r.certified);
        assert!((r.worst_violation - 0.095).abs() < 1e-12, "{}", r.worst_violation);
        let top = &r.violations[0];
        assert_eq!(top.omega.as_ref().unwrap(), &RationalVec::from_ratios(&[(0, 1)]));
        assert_eq!(top.index, vec![0]);
        // Σ|â|^2 at ξ = π is 0.81, deficit 0.19 = 2 * 0.095 split over m = 0, ±1.
        assert!(sampled_residual(&bank, 0.0) > 0.1);
        let agree = agreement_with_seed(&bank, 1).unwrap();
        assert!(!agree.certified && !agree.reconstructs && agree.agree());
    }

    #[test]
    fn same_lattice_coefficients() {
        let bank = haar_bank(1.0);
        // k = 0, γ = 0: a_L(0)^2 + a_H(0)^2 = 1/2; k = 1: 1/4 - 1/4 = 0.
        let r = check_uep_same_lattice(&bank, 0.0).unwrap();
        assert!(r.worst_violation < 1e-16);
        let r = check_uep_same_lattice(&haar_bank(0.9), DEFAULT_TOL).unwrap();
        assert!(!r.certified);
    }

    #[test]
    fn same_lattice_rejects_mixed() {
        let a4 = IntMatrix::diag(&[4, 2]);
        let s1 = IntMatrix::shear2(1).mul(&a4).unwrap();
        let bank =
            FilterBank::new(vec![BankItem::new(Mask::delta(2, Band::Low), a4), BankItem::new(Mask::delta(2, Band::High), s1)]).unwrap();
        assert_eq!(check_uep_same_lattice(&bank, DEFAULT_TOL), Err(Error::MixedLattice));
    }

    #[test]
    fn band_order_enforced() {
        let two = IntMatrix::scalar(1, 2);
        let hi = BankItem::new(Mask::from_real_1d(0, &[0.5, -0.5], Band::High), two.clone());
        let lo = BankItem::new(Mask::from_real_1d(0, &[0.5, 0.5], Band::Low), two);
        assert_eq!(FilterBank::new(vec![hi.clone(), lo.clone()]), Err(Error::BandOrder));
        assert_eq!(FilterBank::new(vec![hi.clone()]), Err(Error::BandOrder));
        let b = FilterBank::from_unordered(vec![hi, lo]).unwrap();
        assert_eq!(b.separator(), 1);
        assert_eq!(b.items()[0].band(), Band::Low);
        let both = b.relabel(&[0, 1]).unwrap();
        assert_eq!(both.separator(), 2);
    }

    #[test]
    fn report_serializes() {
        let r = check_uep_general(&haar_bank(0.9), DEFAULT_TOL).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["certified"], false);
        assert_eq!(json["violations"][0]["omega"][0], "0");
    }
}
