//! Certified tight-frame filter banks: 1-D seeds, tensor banks per lattice,
//! multi-lattice merging and shearlet banks.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlat::{smith_factor, IntMatrix};
use crate::mask::{tensor, Band, Mask};
use crate::signal::Signal;
use crate::uep::{check_uep_general, check_uep_same_lattice, BankItem, FilterBank, DEFAULT_TOL};

/// Named one-dimensional seed families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedName {
    Haar,
    LinearSpline,
}

impl SeedName {
    pub const ALL: [SeedName; 2] = [SeedName::Haar, SeedName::LinearSpline];

    pub fn as_str(self) -> &'static str {
        match self {
            SeedName::Haar => "haar",
            SeedName::LinearSpline => "linear_spline",
        }
    }
}

impl fmt::Display for SeedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeedName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(SeedName::Haar),
            "linear_spline" => Ok(SeedName::LinearSpline),
            other => Err(Error::UnknownSeed(other.to_string())),
        }
    }
}

/// A one-dimensional tight-frame bank for dilation `dilation`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedBank1D {
    pub name: SeedName,
    pub dilation: i64,
    pub filters: Vec<Mask>,
}

impl SeedBank1D {
    pub fn as_bank(&self) -> Result<FilterBank> {
        let m = IntMatrix::scalar(1, self.dilation);
        FilterBank::new(self.filters.iter().map(|f| BankItem::new(f.clone(), m.clone())).collect())
    }
}

/// `û(ξ) v̂(2ξ)`: the dilation-4 filter obtained by running `v` after `u`.
fn compose_dyadic(u: &Mask, v: &Mask) -> Mask {
    let mut acc = Signal::empty(1);
    for (k, vk) in v.coeffs().entries() {
        let mut shifted = u.coeffs().scaled(vk);
        let off = shifted.offset()[0] + 2 * k[0];
        shifted = Signal::new(vec![off], shifted.shape().to_vec(), shifted.data().to_vec()).expect("1-D");
        acc.add_assign(&shifted);
    }
    let band = if u.band() == Band::Low && v.band() == Band::Low { Band::Low } else { Band::High };
    Mask::new(acc, band)
}

fn haar2() -> Vec<Mask> {
    vec![Mask::from_real_1d(0, &[0.5, 0.5], Band::Low), Mask::from_real_1d(0, &[0.5, -0.5], Band::High)]
}

fn spline2() -> Vec<Mask> {
    let r = std::f64::consts::SQRT_2 / 4.0;
    vec![
        Mask::from_real_1d(-1, &[0.25, 0.5, 0.25], Band::Low),
        Mask::from_real_1d(-1, &[r, 0.0, -r], Band::High),
        Mask::from_real_1d(-1, &[-0.25, 0.5, -0.25], Band::High),
    ]
}

/// Seed bank `name` for `dilation`. Available: haar and linear_spline for
/// dilations 2 and 4. Every returned bank is UEP-certified.
pub fn seed_bank(name: SeedName, dilation: i64) -> Result<SeedBank1D> {
    let filters = match (name, dilation) {
        (SeedName::Haar, 2) => haar2(),
        (SeedName::Haar, 4) => {
            let q = 0.25;
            vec![
                Mask::from_real_1d(0, &[q, q, q, q], Band::Low),
                Mask::from_real_1d(0, &[q, q, -q, -q], Band::High),
                Mask::from_real_1d(0, &[q, -q, -q, q], Band::High),
                Mask::from_real_1d(0, &[q, -q, q, -q], Band::High),
            ]
        }
        (SeedName::LinearSpline, 2) => spline2(),
        (SeedName::LinearSpline, 4) => {
            let base = spline2();
            let mut out = Vec::new();
            for v in &base {
                for u in &base {
                    out.push(compose_dyadic(u, v));
                }
            }
            out
        }
        _ => return Err(Error::UnsupportedDilation { name: name.to_string(), dilation }),
    };
    let seed = SeedBank1D { name, dilation, filters };
    let report = check_uep_general(&seed.as_bank()?, DEFAULT_TOL)?;
    if !report.certified {
        return Err(Error::NotCertified(report.worst_violation));
    }
    Ok(seed)
}

/// One 1-D factor bank per invariant factor; `[δ]` for factor 1.
fn factor_banks(factors: &[i64], seed: SeedName) -> Result<Vec<Vec<Mask>>> {
    factors
        .iter()
        .map(|&d| {
            if d == 1 {
                Ok(vec![Mask::delta(1, Band::Low)])
            } else {
                seed_bank(seed, d).map(|s| s.filters).map_err(|_| Error::UnsupportedFactor(d))
            }
        })
        .collect()
}

/// Tensor masks `U_ℓ` for the diagonal Smith form, lexicographic in the
/// per-axis filter indices.
pub fn tensor_seed_masks(factors: &[i64], seed: SeedName) -> Result<Vec<Mask>> {
    let banks = factor_banks(factors, seed)?;
    let mut idx = vec![0usize; banks.len()];
    let mut out = Vec::new();
    loop {
        let parts: Vec<Mask> = idx.iter().zip(&banks).map(|(&i, b)| b[i].clone()).collect();
        out.push(tensor(&parts)?);
        let mut axis = banks.len();
        loop {
            if axis == 0 {
                return Ok(out);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < banks[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Tensor bank for the lattice `L Z^d`: with `L = E D F`, each mask is
/// `â(ξ) = Û(E^T ξ)` for a tensor mask `U` built on `D`. Every item gets
/// matrix `L`. The all-low tensor filter is low-pass.
pub fn lattice_bank(l: &IntMatrix, seed: SeedName) -> Result<FilterBank> {
    let sf = smith_factor(l)?;
    let masks = tensor_seed_masks(&sf.invariant_factors(), seed)?;
    let items = masks.into_iter().map(|u| Ok(BankItem::new(u.remap_by(&sf.e)?, l.clone()))).collect::<Result<Vec<_>>>()?;
    let bank = FilterBank::from_unordered(items)?;
    let report = check_uep_same_lattice(&bank, DEFAULT_TOL)?;
    if !report.certified {
        return Err(Error::NotCertified(report.worst_violation));
    }
    Ok(bank)
}

/// Concatenates `N` banks with every mask scaled by `1/√N`, low-pass items
/// first, and certifies the result.
pub fn merge_banks(groups: &[FilterBank]) -> Result<FilterBank> {
    if groups.is_empty() {
        return Err(Error::Empty("bank groups"));
    }
    if groups.len() == 1 {
        let report = check_uep_general(&groups[0], DEFAULT_TOL)?;
        if !report.certified {
            return Err(Error::NotCertified(report.worst_violation));
        }
        return Ok(groups[0].clone());
    }
    let c = 1.0 / (groups.len() as f64).sqrt();
    let items = groups.iter().flat_map(|g| g.scaled(c).items().to_vec()).collect();
    let bank = FilterBank::from_unordered(items)?;
    let report = check_uep_general(&bank, DEFAULT_TOL)?;
    if !report.certified {
        return Err(Error::NotCertified(report.worst_violation));
    }
    Ok(bank)
}

/// `diag(4, 2)` or `diag(4, 2, 2)`.
pub fn a4(dim: usize) -> IntMatrix {
    let mut d = vec![2; dim];
    d[0] = 4;
    IntMatrix::diag(&d)
}

/// Lattice class of a 2-D shear: `k mod 2`.
pub fn parity_class_2d(k: i64) -> i64 {
    k.rem_euclid(2)
}

/// Lattice class of a 3-D shear pair.
pub fn parity_class_3d(s: (i64, i64)) -> (i64, i64) {
    (s.0.rem_euclid(2), s.1.rem_euclid(2))
}

/// Distinct values in first-seen order.
fn dedup<T: PartialEq + Clone>(xs: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for x in xs {
        if !out.contains(x) {
            out.push(x.clone());
        }
    }
    out
}

/// Builds the class bank on `lattice` and assigns matrices round-robin from
/// `mats`.
fn class_bank(lattice: &IntMatrix, mats: &[IntMatrix], seed: SeedName) -> Result<FilterBank> {
    let bank = lattice_bank(lattice, seed)?;
    let items = bank.items().iter().enumerate().map(|(i, it)| BankItem::new(it.mask.clone(), mats[i % mats.len()].clone())).collect();
    FilterBank::new(items)
}

/// Shearlet bank with matrices `S_k A_4`, one lattice class per shear parity
/// (even classes first). Within a class, filter `i` gets the `i mod n`-th
/// distinct shear of that class.
pub fn shearlet_bank_2d(shears: &[i64], seed: SeedName) -> Result<FilterBank> {
    if shears.is_empty() {
        return Err(Error::Empty("shears"));
    }
    let a = a4(2);
    let shears = dedup(shears);
    let mut groups = Vec::new();
    for class in 0..2 {
        let members: Vec<IntMatrix> =
            shears.iter().filter(|&&k| parity_class_2d(k) == class).map(|&k| IntMatrix::shear2(k).mul(&a)).collect::<Result<_>>()?;
        if members.is_empty() {
            continue;
        }
        let lattice = IntMatrix::shear2(class).mul(&a)?;
        groups.push(class_bank(&lattice, &members, seed)?);
    }
    merge_banks(&groups)
}

/// Three-dimensional shearlet bank with matrices `S_{s1,s2} A_4`,
/// `A_4 = diag(4, 2, 2)`; four lattice classes by parity of `(s1, s2)`.
pub fn shearlet_bank_3d(shears: &[(i64, i64)], seed: SeedName) -> Result<FilterBank> {
    if shears.is_empty() {
        return Err(Error::Empty("shears"));
    }
    let a = a4(3);
    let shears = dedup(shears);
    let mut groups = Vec::new();
    for class in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let members: Vec<IntMatrix> = shears
            .iter()
            .filter(|&&s| parity_class_3d(s) == class)
            .map(|&(s1, s2)| IntMatrix::shear3(s1, s2).mul(&a))
            .collect::<Result<_>>()?;
        if members.is_empty() {
            continue;
        }
        let lattice = IntMatrix::shear3(class.0, class.1).mul(&a)?;
        groups.push(class_bank(&lattice, &members, seed)?);
    }
    merge_banks(&groups)
}

/// Separable bank `diag(dilation, ..., dilation)` built from `seed`.
pub fn tensor_bank(dim: usize, dilation: i64, seed: SeedName) -> Result<FilterBank> {
    lattice_bank(&IntMatrix::scalar(dim, dilation), seed)
}

/// Symbol of `mask` evaluated at `E^T ξ`.
pub fn symbol_at_transpose(mask: &Mask, e: &IntMatrix, xi: &[f64]) -> Complex64 {
    let et = e.transpose();
    let y: Vec<f64> = (0..xi.len()).map(|i| (0..xi.len()).map(|j| et.get(i, j) as f64 * xi[j]).sum()).collect();
    mask.symbol(&y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlat::lattice_equal;
    use crate::uep::empirical_pr_error;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn certified(b: &FilterBank) -> bool {
        check_uep_general(b, DEFAULT_TOL).unwrap().certified
    }

    #[test]
    fn seeds() {
        let h = seed_bank(SeedName::Haar, 2).unwrap();
        assert_eq!(h.filters.len(), 2);
        let s = seed_bank(SeedName::LinearSpline, 2).unwrap();
        assert_eq!(s.filters.len(), 3);
        assert_eq!(s.filters[0].coeffs().offset(), &[-1]);
        assert!(matches!(seed_bank(SeedName::Haar, 3), Err(Error::UnsupportedDilation { .. })));
        assert_eq!(seed_bank(SeedName::LinearSpline, 4).unwrap().filters.len(), 9);
        assert!("mexican_hat".parse::<SeedName>().is_err());
        assert_eq!("linear_spline".parse::<SeedName>().unwrap(), SeedName::LinearSpline);
    }

    #[test]
    fn haar4_is_two_level_haar() {
        let explicit = seed_bank(SeedName::Haar, 4).unwrap().filters;
        let h = haar2();
        for u in &h {
            for v in &h {
                let c = compose_dyadic(u, v);
                assert!(explicit.iter().any(|e| e.coeffs().same_function(c.coeffs(), 1e-15)));
            }
        }
    }

    #[test]
    fn lattice_bank_examples() {
        let b = lattice_bank(&IntMatrix::scalar(2, 2), SeedName::Haar).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.separator(), 1);
        let b = lattice_bank(&IntMatrix::diag(&[4, 2]), SeedName::Haar).unwrap();
        assert_eq!(b.len(), 8);
        assert!(certified(&b));
        let u = lattice_bank(&IntMatrix::shear2(1), SeedName::Haar).unwrap();
        assert_eq!(u.len(), 1);
        assert!(certified(&u));
        assert_eq!(lattice_bank(&IntMatrix::diag(&[3, 1]), SeedName::Haar), Err(Error::UnsupportedFactor(3)));
    }

    #[test]
    fn lattice_bank_symbol_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for l in [
            IntMatrix::from_rows(&[[4, 2], [0, 2]]),
            IntMatrix::from_rows(&[[2, 1], [0, 2]]),
            IntMatrix::from_rows(&[[4, 2, 2], [0, 2, 0], [0, 0, 2]]),
        ] {
            let sf = smith_factor(&l).unwrap();
            let u = tensor_seed_masks(&sf.invariant_factors(), SeedName::LinearSpline).unwrap();
            let bank = lattice_bank(&l, SeedName::LinearSpline).unwrap();
            assert_eq!(u.len(), bank.len());
            for _ in 0..100 {
                let xi: Vec<f64> = (0..l.dim()).map(|_| rng.random_range(-4.0..4.0)).collect();
                for (ul, it) in u.iter().zip(bank.items()) {
                    let want = symbol_at_transpose(ul, &sf.e, &xi);
                    assert!((it.mask.symbol(&xi) - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn merge_examples() {
        let b = lattice_bank(&IntMatrix::scalar(2, 2), SeedName::Haar).unwrap();
        assert_eq!(merge_banks(std::slice::from_ref(&b)).unwrap(), b);
        let m = merge_banks(&[b.clone(), b.clone()]).unwrap();
        assert_eq!(m.len(), 8);
        assert_eq!(m.separator(), 2);
        assert!((m.items()[0].mask.get(&[0, 0]).re - 0.25 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(merge_banks(&[]), Err(Error::Empty("bank groups")));
    }

    #[test]
    fn shearlet_2d_examples() {
        let b0 = shearlet_bank_2d(&[0], SeedName::Haar).unwrap();
        assert_eq!(b0.len(), 8);
        let b01 = shearlet_bank_2d(&[0, 1], SeedName::Haar).unwrap();
        assert_eq!(b01.len(), 16);
        assert!(certified(&b01));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(empirical_pr_error(&b01, 5, &mut rng).unwrap() <= 1e-10);
        let even = shearlet_bank_2d(&[-2, 2], SeedName::Haar).unwrap();
        assert_eq!(even.len(), 8);
        for it in even.items() {
            assert!(lattice_equal(&it.matrix, &a4(2)).unwrap());
        }
        let spline = shearlet_bank_2d(&[-1, 0, 1], SeedName::LinearSpline).unwrap();
        assert_eq!(spline.len(), 54);
        assert!(certified(&spline));
    }

    #[test]
    fn shearlet_3d_examples() {
        assert_eq!(shearlet_bank_3d(&[(0, 0)], SeedName::Haar).unwrap().len(), 16);
        let all = shearlet_bank_3d(&[(0, 0), (1, 0), (0, 1), (1, 1)], SeedName::Haar).unwrap();
        assert_eq!(all.len(), 64);
        assert!((all.items()[0].mask.get(&[0, 0, 0]).re - 1.0 / 32.0).abs() < 1e-15);
        assert_eq!(parity_class_3d((3, 2)), (1, 0));
        assert_eq!(parity_class_2d(-3), 1);
    }
}
