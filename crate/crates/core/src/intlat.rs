//! Exact integer matrix and lattice algebra.
//!
//! Everything here works over `i64`/`i128` and exact rationals; no floating
//! point is involved. Dimensions are limited to `1..=MAX_DIM`.

use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 4;

/// Square integer matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<i64>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

impl TryFrom<Vec<Vec<i64>>> for IntMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::BadShape("matrix rows must all have length equal to the row count".into()));
        }
        IntMatrix::new(dim, rows.into_iter().flatten().collect())
    }
}

impl From<IntMatrix> for Vec<Vec<i64>> {
    fn from(m: IntMatrix) -> Self {
        m.rows()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::UnsupportedDim(dim))
    } else {
        Ok(())
    }
}

impl IntMatrix {
    pub fn new(dim: usize, entries: Vec<i64>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::BadEntryCount { dim, expected: dim * dim, got: entries.len() });
        }
        Ok(Self { dim, entries })
    }

    /// Builds a matrix from rows. Panics on ragged input; use `try_from` for
    /// untrusted data.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let v: Vec<Vec<i64>> = rows.iter().map(|r| r.as_ref().to_vec()).collect();
        Self::try_from(v).expect("malformed matrix rows")
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1; dim])
    }

    pub fn diag(values: &[i64]) -> Self {
        let dim = values.len();
        let mut entries = vec![0; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            entries[i * dim + i] = v;
        }
        Self::new(dim, entries).expect("diagonal dimension out of range")
    }

    pub fn scalar(dim: usize, c: i64) -> Self {
        Self::diag(&vec![c; dim])
    }

    /// Planar shear `[[1, s], [0, 1]]`.
    pub fn shear2(s: i64) -> Self {
        Self::from_rows(&[[1, s], [0, 1]])
    }

    /// Spatial shear `[[1, s1, s2], [0, 1, 0], [0, 0, 1]]`.
    pub fn shear3(s1: i64, s2: i64) -> Self {
        Self::from_rows(&[[1, s1, s2], [0, 1, 0], [0, 0, 1]])
    }

    /// Parabolic scaling `diag(c, sqrt(c), ..., sqrt(c))` in dimension `dim`.
    /// `c` must be a perfect square so that the matrix is integral.
    pub fn parabolic(dim: usize, c: i64) -> Result<Self> {
        check_dim(dim)?;
        let r = if c > 0 { c.isqrt() } else { 0 };
        if c <= 0 || r * r != c {
            return Err(Error::BadShape(format!("parabolic scaling needs a positive perfect square, got {c}")));
        }
        let mut d = vec![r; dim];
        d[0] = c;
        Ok(Self::diag(&d))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.get(i, j);
            }
        }
        Self { dim: d, entries }
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<Self> {
        self.same_dim(other)?;
        let d = self.dim;
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = (0..d).map(|k| self.get(i, k) * other.get(k, j)).sum();
            }
        }
        Ok(Self { dim: d, entries })
    }

    pub fn neg(&self) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|v| -v).collect() }
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    fn same_dim(&self, other: &IntMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i64 {
        let d = self.dim;
        let mut a: Vec<i128> = self.entries.iter().map(|&v| v as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..d {
            if a[k * d + k] == 0 {
                match (k + 1..d).find(|&i| a[i * d + k] != 0) {
                    Some(i) => {
                        for j in 0..d {
                            a.swap(k * d + j, i * d + j);
                        }
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    a[i * d + j] = (a[i * d + j] * a[k * d + k] - a[i * d + k] * a[k * d + j]) / prev;
                }
            }
            prev = a[k * d + k];
        }
        (sign * a[d * d - 1]) as i64
    }

    fn minor(&self, row: usize, col: usize) -> IntMatrix {
        let d = self.dim;
        let entries = (0..d)
            .filter(|&i| i != row)
            .flat_map(|i| (0..d).filter(move |&j| j != col).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        IntMatrix { dim: d - 1, entries }
    }

    /// Classical adjugate, so that `M * adj(M) = det(M) * I`.
    pub fn adjugate(&self) -> Self {
        let d = self.dim;
        if d == 1 {
            return Self { dim: 1, entries: vec![1] };
        }
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                let c = self.minor(i, j).det();
                let c = if (i + j) % 2 == 0 { c } else { -c };
                entries[j * d + i] = c;
            }
        }
        Self { dim: d, entries }
    }

    pub fn nonsingular(&self) -> Result<i64> {
        match self.det() {
            0 => Err(Error::Singular),
            det => Ok(det),
        }
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs() == 1
    }

    /// Exact rational inverse.
    pub fn inverse(&self) -> Result<RatMatrix> {
        let det = self.nonsingular()?;
        let adj = self.adjugate();
        let entries = adj.entries.iter().map(|&v| Rational64::new(v, det)).collect();
        Ok(RatMatrix { dim: self.dim, entries })
    }

    /// Inverse of a unimodular matrix, which is again integral.
    pub fn unimodular_inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.abs() != 1 {
            return Err(Error::NotUnimodular(det.abs()));
        }
        let adj = self.adjugate();
        Ok(Self { dim: self.dim, entries: adj.entries.iter().map(|v| v * det).collect() })
    }

    pub fn to_rational(&self) -> RatMatrix {
        RatMatrix { dim: self.dim, entries: self.entries.iter().map(|&v| Rational64::from_integer(v)).collect() }
    }
}

/// Square matrix with exact rational entries.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatMatrix {
    dim: usize,
    entries: Vec<Rational64>,
}

impl RatMatrix {
    pub fn identity(dim: usize) -> Self {
        IntMatrix::identity(dim).to_rational()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Rational64 {
        self.entries[i * self.dim + j]
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        let d = self.dim;
        let mut entries = vec![Rational64::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = (0..d).map(|k| self.get(i, k) * other.get(k, j)).sum();
            }
        }
        RatMatrix { dim: d, entries }
    }

    pub fn apply(&self, v: &[Rational64]) -> Vec<Rational64> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect()
    }

    /// Rows rendered as `"p/q"` strings for serialization.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.entries.chunks(self.dim).map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
    }

    pub fn as_integer(&self) -> Option<IntMatrix> {
        if self.entries.iter().all(|x| x.is_integer()) {
            Some(IntMatrix { dim: self.dim, entries: self.entries.iter().map(|x| x.to_integer()).collect() })
        } else {
            None
        }
    }
}

/// Exact rational vector. When produced by [`dual_coset_reps`] every
/// coordinate lies in `[0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct RationalVec(pub Vec<Rational64>);

impl RationalVec {
    pub fn zero(dim: usize) -> Self {
        RationalVec(vec![Rational64::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    /// Coordinatewise reduction into `[0, 1)`.
    pub fn reduce_mod1(&self) -> Self {
        RationalVec(self.0.iter().map(|x| x - x.floor()).collect())
    }

    /// `-self mod 1`.
    pub fn neg_mod1(&self) -> Self {
        RationalVec(self.0.iter().map(|x| -x).collect()).reduce_mod1()
    }

    pub fn from_ratios(v: &[(i64, i64)]) -> Self {
        RationalVec(v.iter().map(|&(p, q)| Rational64::new(p, q)).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect()
    }
}

impl fmt::Display for RationalVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for RationalVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let parts = Vec::<String>::deserialize(d)?;
        parts
            .iter()
            .map(|p| p.parse::<Rational64>().map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(RationalVec)
    }
}

/// Integer vector representing a class of `Z^d / M Z^d`.
pub type CosetRep = Vec<i64>;

/// Smith-type factorization `M = E * D * F` with unimodular `E`, `F` and
/// `D = diag(d_1, ..., d_m, 1, ..., 1)`, `d_1 >= ... >= d_m > 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithFactors {
    pub e: IntMatrix,
    pub d: IntMatrix,
    pub f: IntMatrix,
}

impl SmithFactors {
    /// Diagonal entries of `D`.
    pub fn invariant_factors(&self) -> Vec<i64> {
        (0..self.d.dim()).map(|i| self.d.get(i, i)).collect()
    }
}

pub fn det(m: &IntMatrix) -> i64 {
    m.det()
}

/// Computes `M = E D F` with the diagonal of `D` in descending order.
pub fn smith_factor(m: &IntMatrix) -> Result<SmithFactors> {
    m.nonsingular()?;
    let d = m.dim();
    let mut a: Vec<Vec<i128>> = m.rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect();
    let id = |d: usize| -> Vec<Vec<i128>> { (0..d).map(|i| (0..d).map(|j| i128::from(i == j)).collect()).collect() };
    // U * M * V = S throughout.
    let mut u = id(d);
    let mut v = id(d);

    for t in 0..d {
        loop {
            // Smallest nonzero entry of the trailing block becomes the pivot.
            let (pi, pj) = (t..d)
                .flat_map(|i| (t..d).map(move |j| (i, j)))
                .filter(|&(i, j)| a[i][j] != 0)
                .min_by_key(|&(i, j)| a[i][j].abs())
                .expect("nonsingular matrix has a nonzero trailing block");
            a.swap(t, pi);
            u.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }

            let mut clean = true;
            let p = a[t][t];
            for i in t + 1..d {
                let q = Integer::div_floor(&a[i][t], &p);
                if q != 0 {
                    for j in 0..d {
                        a[i][j] -= q * a[t][j];
                        u[i][j] -= q * u[t][j];
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..d {
                let q = Integer::div_floor(&a[t][j], &p);
                if q != 0 {
                    for i in 0..d {
                        a[i][j] -= q * a[i][t];
                        v[i][j] -= q * v[i][t];
                    }
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // Pivot must divide the whole trailing block.
            let bad = (t + 1..d).find(|&i| (t + 1..d).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    for j in 0..d {
                        a[t][j] += a[i][j];
                        u[t][j] += u[i][j];
                    }
                }
                None => break,
            }
        }
        if a[t][t] < 0 {
            for j in 0..d {
                a[t][j] = -a[t][j];
                u[t][j] = -u[t][j];
            }
        }
    }

    let to_int = |x: &Vec<Vec<i128>>| -> IntMatrix {
        IntMatrix::new(d, x.iter().flatten().map(|&v| i64::try_from(v).expect("entry overflow")).collect())
            .expect("dimension already validated")
    };
    let s: Vec<i64> = (0..d).map(|i| a[i][i] as i64).collect();
    let u_inv = to_int(&u).unimodular_inverse()?;
    let v_inv = to_int(&v).unimodular_inverse()?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| s[y].cmp(&s[x]));
    // P e_k = e_{order[k]}
    let mut p = vec![0; d * d];
    for (k, &o) in order.iter().enumerate() {
        p[o * d + k] = 1;
    }
    let p = IntMatrix::new(d, p)?;
    let dmat = IntMatrix::diag(&order.iter().map(|&o| s[o]).collect::<Vec<_>>());
    let e = u_inv.mul(&p)?;
    let f = p.transpose().mul(&v_inv)?;
    debug_assert_eq!(&e.mul(&dmat)?.mul(&f)?, m);
    Ok(SmithFactors { e, d: dmat, f })
}

/// Precomputed data for reducing integer vectors modulo `M Z^d`.
#[derive(Clone, Debug)]
pub struct CosetReducer {
    m: IntMatrix,
    adj: IntMatrix,
    det: i64,
}

impl CosetReducer {
    pub fn new(m: &IntMatrix) -> Result<Self> {
        let det = m.nonsingular()?;
        Ok(Self { m: m.clone(), adj: m.adjugate(), det })
    }

    /// Canonical representative of `p + M Z^d` inside `M [0,1)^d`.
    pub fn reduce(&self, p: &[i64]) -> Vec<i64> {
        let y = self.adj.apply(p);
        let q: Vec<i64> = y.iter().map(|&yi| Integer::div_floor(&yi, &self.det)).collect();
        let mq = self.m.apply(&q);
        p.iter().zip(mq).map(|(a, b)| a - b).collect()
    }

    /// True iff `p` lies in the lattice `M Z^d`.
    pub fn in_lattice(&self, p: &[i64]) -> bool {
        self.adj.apply(p).iter().all(|y| y % self.det == 0)
    }

    /// Returns `M^{-1} p` when `p` is in the lattice.
    pub fn lattice_coords(&self, p: &[i64]) -> Option<Vec<i64>> {
        let y = self.adj.apply(p);
        if y.iter().all(|v| v % self.det == 0) {
            Some(y.iter().map(|v| v / self.det).collect())
        } else {
            None
        }
    }
}

/// Integer points of `M [0,1)^d`, sorted lexicographically.
pub fn coset_reps(m: &IntMatrix) -> Result<Vec<CosetRep>> {
    let det = m.nonsingular()?;
    let d = m.dim();
    let adj = m.adjugate();
    let lo: Vec<i64> = (0..d).map(|i| (0..d).map(|j| m.get(i, j).min(0)).sum()).collect();
    let hi: Vec<i64> = (0..d).map(|i| (0..d).map(|j| m.get(i, j).max(0)).sum()).collect();
    let inside = |y: i64| if det > 0 { 0 <= y && y < det } else { det < y && y <= 0 };

    let mut out = Vec::with_capacity(det.unsigned_abs() as usize);
    let mut x = lo.clone();
    loop {
        if adj.apply(&x).into_iter().all(inside) {
            out.push(x.clone());
        }
        // odometer, last coordinate fastest
        let mut axis = d;
        loop {
            if axis == 0 {
                debug_assert_eq!(out.len() as u64, det.unsigned_abs());
                return Ok(out);
            }
            axis -= 1;
            if x[axis] < hi[axis] {
                x[axis] += 1;
                break;
            }
            x[axis] = lo[axis];
        }
    }
}

/// `[(M^T)^{-1} Z^d] ∩ [0,1)^d`, sorted lexicographically (zero first).
pub fn dual_coset_reps(m: &IntMatrix) -> Result<Vec<RationalVec>> {
    let mt = m.transpose();
    let inv = mt.inverse()?;
    let mut out: Vec<RationalVec> = coset_reps(&mt)?
        .into_iter()
        .map(|g| {
            let g: Vec<Rational64> = g.into_iter().map(Rational64::from_integer).collect();
            RationalVec(inv.apply(&g)).reduce_mod1()
        })
        .collect();
    out.sort();
    Ok(out)
}

/// True iff `omega` belongs to `(M^T)^{-1} Z^d`, i.e. `M^T omega` is integral.
pub fn dual_contains(m: &IntMatrix, omega: &RationalVec) -> bool {
    let mt = m.transpose().to_rational();
    mt.apply(&omega.0).iter().all(|x| x.is_integer())
}

/// True iff `M Z^d = M' Z^d`.
pub fn lattice_equal(m: &IntMatrix, other: &IntMatrix) -> Result<bool> {
    m.same_dim(other)?;
    m.nonsingular()?;
    other.nonsingular()?;
    let contains = |a: &IntMatrix, b: &IntMatrix| -> Result<bool> { Ok(a.inverse()?.mul(&b.to_rational()).as_integer().is_some()) };
    Ok(contains(m, other)? && contains(other, m)?)
}

/// Product `M_1^{-1} M_2^{-1} ... M_k^{-1}` as an exact rational matrix.
pub fn inverse_chain<'a>(dim: usize, mats: impl IntoIterator<Item = &'a IntMatrix>) -> Result<RatMatrix> {
    let mut acc = RatMatrix::identity(dim);
    for m in mats {
        acc = acc.mul(&m.inverse()?);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: i64, b: i64, c: i64, d: i64) -> IntMatrix {
        IntMatrix::from_rows(&[[a, b], [c, d]])
    }

    #[test]
    fn det_examples() {
        assert_eq!(IntMatrix::diag(&[4, 2]).det(), 8);
        assert_eq!(m2(1, 1, 0, 1).det(), 1);
        assert_eq!(m2(4, 2, 0, 2).det(), 8);
        assert_eq!(m2(0, 1, 1, 0).det(), -1);
        assert_eq!(IntMatrix::from_rows(&[[0, 2, 1], [3, 0, 0], [1, 1, 1]]).det(), -3);
        assert_eq!(m2(2, 4, 1, 2).det(), 0);
    }

    #[test]
    fn adjugate_inverts() {
        let m = IntMatrix::from_rows(&[[2, 1, 0], [1, 3, 1], [0, 1, 4]]);
        let prod = m.mul(&m.adjugate()).unwrap();
        assert_eq!(prod, IntMatrix::scalar(3, m.det()));
    }

    #[test]
    fn rejects_bad_dims() {
        assert_eq!(IntMatrix::new(5, vec![0; 25]), Err(Error::UnsupportedDim(5)));
        assert!(IntMatrix::new(2, vec![1, 2, 3]).is_err());
        assert!(IntMatrix::try_from(vec![vec![1, 2], vec![3]]).is_err());
    }

    #[test]
    fn smith_identity() {
        let f = smith_factor(&IntMatrix::identity(2)).unwrap();
        assert_eq!(f.d, IntMatrix::identity(2));
        assert_eq!(f.e.mul(&f.d).unwrap().mul(&f.f).unwrap(), IntMatrix::identity(2));
    }

    #[test]
    fn smith_examples() {
        for m in [IntMatrix::diag(&[4, 2]), m2(4, 2, 0, 2), IntMatrix::diag(&[2, 4])] {
            let f = smith_factor(&m).unwrap();
            assert_eq!(f.d, IntMatrix::diag(&[4, 2]), "{m}");
            assert_eq!(f.e.mul(&f.d).unwrap().mul(&f.f).unwrap(), m);
            assert!(f.e.is_unimodular() && f.f.is_unimodular());
        }
        let m3 = IntMatrix::from_rows(&[[4, 2, 4], [0, 2, 0], [0, 0, 2]]);
        let f = smith_factor(&m3).unwrap();
        assert_eq!(f.invariant_factors(), vec![4, 2, 2]);
    }

    #[test]
    fn smith_rejects_singular() {
        assert_eq!(smith_factor(&m2(2, 4, 1, 2)), Err(Error::Singular));
    }

    #[test]
    fn coset_examples() {
        assert_eq!(coset_reps(&IntMatrix::scalar(2, 2)).unwrap(), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(coset_reps(&m2(1, 1, 0, 1)).unwrap(), vec![vec![0, 0]]);
        let reps = coset_reps(&IntMatrix::diag(&[4, 2])).unwrap();
        let expect: Vec<Vec<i64>> = (0..4).flat_map(|i| (0..2).map(move |j| vec![i, j])).collect();
        assert_eq!(reps, expect);
        assert!(coset_reps(&m2(1, 2, 2, 4)).is_err());
    }

    #[test]
    fn coset_negative_det() {
        let m = m2(0, 2, 3, 0);
        let reps = coset_reps(&m).unwrap();
        assert_eq!(reps.len(), 6);
        assert!(reps.contains(&vec![0, 0]));
        let r = CosetReducer::new(&m).unwrap();
        for a in &reps {
            assert_eq!(&r.reduce(a), a);
        }
    }

    #[test]
    fn dual_examples() {
        let one = dual_coset_reps(&IntMatrix::scalar(1, 2)).unwrap();
        assert_eq!(one, vec![RationalVec::from_ratios(&[(0, 1)]), RationalVec::from_ratios(&[(1, 2)])]);

        let d = dual_coset_reps(&IntMatrix::diag(&[4, 2])).unwrap();
        let expect: Vec<RationalVec> = (0..4).flat_map(|i| (0..2).map(move |j| RationalVec::from_ratios(&[(i, 4), (j, 2)]))).collect();
        assert_eq!(d, expect);

        let d = dual_coset_reps(&m2(4, 2, 0, 2)).unwrap();
        let expect: Vec<RationalVec> =
            [(0, 1, 0, 1), (0, 1, 1, 2), (1, 4, 1, 4), (1, 4, 3, 4), (1, 2, 0, 1), (1, 2, 1, 2), (3, 4, 1, 4), (3, 4, 3, 4)]
                .iter()
                .map(|&(a, b, c, e)| RationalVec::from_ratios(&[(a, b), (c, e)]))
                .collect();
        assert_eq!(d, expect);
    }

    #[test]
    fn lattice_equal_examples() {
        let a4 = IntMatrix::diag(&[4, 2]);
        let s2a4 = IntMatrix::shear2(2).mul(&a4).unwrap();
        let s1a4 = IntMatrix::shear2(1).mul(&a4).unwrap();
        assert!(lattice_equal(&s2a4, &a4).unwrap());
        assert!(!lattice_equal(&s1a4, &a4).unwrap());
        assert!(lattice_equal(&a4, &a4).unwrap());
        assert_eq!(lattice_equal(&a4, &m2(1, 2, 2, 4)), Err(Error::Singular));
    }

    #[test]
    fn parabolic_scaling() {
        assert_eq!(IntMatrix::parabolic(2, 4).unwrap(), IntMatrix::diag(&[4, 2]));
        assert_eq!(IntMatrix::parabolic(3, 4).unwrap(), IntMatrix::diag(&[4, 2, 2]));
        assert!(IntMatrix::parabolic(2, 3).is_err());
    }

    #[test]
    fn rational_vec_serde() {
        let w = RationalVec::from_ratios(&[(1, 4), (3, 4)]);
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"["1/4","3/4"]"#);
        let back: RationalVec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
    }
}
