//! Finitely supported complex sequences on `Z^d`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::intlat::MAX_DIM;

/// A sequence `v: Z^d -> C` that vanishes outside the box
/// `offset + [0, shape)`. Data is dense and row-major (last axis fastest).
///
/// Equality via [`Signal::same_function`] compares sequences, not boxes.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    offset: Vec<i64>,
    shape: Vec<usize>,
    data: Vec<Complex64>,
}

/// Calls `f(linear_index, coords)` for every point of `offset + [0, shape)`
/// in lexicographic order.
pub(crate) fn for_each_point(offset: &[i64], shape: &[usize], mut f: impl FnMut(usize, &[i64])) {
    let d = offset.len();
    if shape.contains(&0) {
        return;
    }
    let mut p = [0i64; MAX_DIM];
    p[..d].copy_from_slice(offset);
    let total: usize = shape.iter().product();
    for lin in 0..total {
        f(lin, &p[..d]);
        for axis in (0..d).rev() {
            p[axis] += 1;
            if p[axis] < offset[axis] + shape[axis] as i64 {
                break;
            }
            p[axis] = offset[axis];
        }
    }
}

impl Signal {
    pub fn new(offset: Vec<i64>, shape: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let d = offset.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::UnsupportedDim(d));
        }
        if shape.len() != d {
            return Err(Error::DimMismatch { expected: d, got: shape.len() });
        }
        let n: usize = shape.iter().product();
        if data.len() != n {
            return Err(Error::BadShape(format!("shape {shape:?} needs {n} values, got {}", data.len())));
        }
        Ok(Self { offset, shape, data })
    }

    pub fn from_real(offset: Vec<i64>, shape: Vec<usize>, data: &[f64]) -> Result<Self> {
        Self::new(offset, shape, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(offset: Vec<i64>, shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self::new(offset, shape, vec![Complex64::new(0.0, 0.0); n]).expect("zeros: invalid box")
    }

    /// The zero sequence in dimension `dim` (empty box).
    pub fn empty(dim: usize) -> Self {
        Self::zeros(vec![0; dim], vec![0; dim])
    }

    /// Unit impulse at `at`.
    pub fn delta(at: &[i64]) -> Self {
        let d = at.len();
        Self::new(at.to_vec(), vec![1; d], vec![Complex64::new(1.0, 0.0)]).expect("delta: invalid dimension")
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn offset(&self) -> &[i64] {
        &self.offset
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Inclusive upper corner of the box. Meaningless for empty signals.
    pub fn upper(&self) -> Vec<i64> {
        self.offset.iter().zip(&self.shape).map(|(&o, &s)| o + s as i64 - 1).collect()
    }

    /// Linear index of `p`, or `None` outside the box.
    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        let mut lin = 0usize;
        for ((&x, &o), &n) in p.iter().zip(&self.offset).zip(&self.shape) {
            let r = x - o;
            if r < 0 || r >= n as i64 {
                return None;
            }
            lin = lin * n + r as usize;
        }
        Some(lin)
    }

    pub fn get(&self, p: &[i64]) -> Complex64 {
        self.index_of(p).map_or(Complex64::new(0.0, 0.0), |i| self.data[i])
    }

    /// Sets `p`; panics if `p` lies outside the box.
    pub fn set(&mut self, p: &[i64], v: Complex64) {
        let i = self.index_of(p).expect("point outside signal box");
        self.data[i] = v;
    }

    /// Visits every stored point in lexicographic order.
    pub fn for_each(&self, mut f: impl FnMut(&[i64], Complex64)) {
        for_each_point(&self.offset, &self.shape, |lin, p| f(p, self.data[lin]));
    }

    /// Nonzero entries as `(point, value)` in lexicographic order.
    pub fn entries(&self) -> Vec<(Vec<i64>, Complex64)> {
        let mut out = Vec::new();
        self.for_each(|p, v| {
            if v != Complex64::new(0.0, 0.0) {
                out.push((p.to_vec(), v));
            }
        });
        out
    }

    /// Smallest box holding every nonzero value.
    pub fn trimmed(&self) -> Signal {
        let d = self.dim();
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        let mut any = false;
        self.for_each(|p, v| {
            if v != Complex64::new(0.0, 0.0) {
                any = true;
                for a in 0..d {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a]);
                }
            }
        });
        if !any {
            return Signal::empty(d);
        }
        if lo == self.offset && hi == self.upper() {
            return self.clone();
        }
        self.restricted(lo.clone(), lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect())
    }

    /// Copy onto the box `offset + [0, shape)`; values outside are dropped.
    pub fn restricted(&self, offset: Vec<i64>, shape: Vec<usize>) -> Signal {
        let mut out = Signal::zeros(offset, shape);
        let (off, shp) = (out.offset.clone(), out.shape.clone());
        for_each_point(&off, &shp, |lin, p| out.data[lin] = self.get(p));
        out
    }

    /// Bounding box of the union of both boxes, as `(offset, shape)`.
    pub fn union_box(&self, other: &Signal) -> (Vec<i64>, Vec<usize>) {
        match (self.is_empty(), other.is_empty()) {
            (true, true) => (vec![0; self.dim()], vec![0; self.dim()]),
            (true, false) => (other.offset.clone(), other.shape.clone()),
            (false, true) => (self.offset.clone(), self.shape.clone()),
            (false, false) => {
                let (ua, ub) = (self.upper(), other.upper());
                let lo: Vec<i64> = self.offset.iter().zip(&other.offset).map(|(a, b)| *a.min(b)).collect();
                let shape = (0..self.dim()).map(|i| (ua[i].max(ub[i]) - lo[i] + 1) as usize).collect();
                (lo, shape)
            }
        }
    }

    /// Adds `other` into `self`, growing the box if needed.
    pub fn add_assign(&mut self, other: &Signal) {
        if self.dim() != other.dim() {
            panic!("dimension mismatch in add");
        }
        let (off, shp) = self.union_box(other);
        if off != self.offset || shp != self.shape {
            *self = self.restricted(off, shp);
        }
        let base = self.offset.clone();
        let shape = self.shape.clone();
        other.for_each(|p, v| {
            let mut lin = 0usize;
            for a in 0..p.len() {
                lin = lin * shape[a] + (p[a] - base[a]) as usize;
            }
            self.data[lin] += v;
        });
    }

    pub fn scaled(&self, c: Complex64) -> Signal {
        Signal { offset: self.offset.clone(), shape: self.shape.clone(), data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `sum_k self(k) * conj(other(k))`.
    pub fn dot(&self, other: &Signal) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        self.for_each(|p, v| acc += v * other.get(p).conj());
        acc
    }

    /// Largest `|self(k) - other(k)|` over all of `Z^d`.
    pub fn max_abs_diff(&self, other: &Signal) -> f64 {
        let (off, shp) = self.union_box(other);
        let mut worst = 0.0f64;
        for_each_point(&off, &shp, |_, p| worst = worst.max((self.get(p) - other.get(p)).norm()));
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Function equality within `tol`, independent of the stored boxes.
    pub fn same_function(&self, other: &Signal, tol: f64) -> bool {
        self.dim() == other.dim() && self.max_abs_diff(other) <= tol
    }

    /// Real parts, provided every imaginary part is at most `tol` in magnitude.
    pub fn to_real(&self, tol: f64) -> Option<Vec<f64>> {
        if self.data.iter().any(|v| v.im.abs() > tol) {
            return None;
        }
        Some(self.data.iter().map(|v| v.re).collect())
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|v| v.im == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn lexicographic_visit() {
        let mut pts = Vec::new();
        for_each_point(&[1, -1], &[2, 2], |lin, p| pts.push((lin, p.to_vec())));
        assert_eq!(pts, vec![(0, vec![1, -1]), (1, vec![1, 0]), (2, vec![2, -1]), (3, vec![2, 0])]);
    }

    #[test]
    fn trim_is_idempotent() {
        let s = Signal::from_real(vec![-2, 0], vec![4, 3], &[0., 0., 0., 0., 1., 0., 0., 2., 0., 0., 0., 0.]).unwrap();
        let t = s.trimmed();
        assert_eq!(t.offset(), &[-1, 1]);
        assert_eq!(t.shape(), &[2, 1]);
        assert_eq!(t.trimmed(), t);
        assert!(t.same_function(&s, 0.0));
        assert!(Signal::zeros(vec![0], vec![3]).trimmed().is_empty());
    }

    #[test]
    fn add_grows_box() {
        let mut a = Signal::delta(&[0]);
        a.add_assign(&Signal::delta(&[3]).scaled(c(2.0)));
        assert_eq!(a.shape(), &[4]);
        assert_eq!(a.get(&[3]), c(2.0));
        assert_eq!(a.get(&[0]), c(1.0));
        let mut e = Signal::empty(1);
        e.add_assign(&a);
        assert!(e.same_function(&a, 0.0));
    }

    #[test]
    fn rejects_bad_data() {
        assert!(Signal::new(vec![0, 0], vec![2, 2], vec![c(0.0); 3]).is_err());
        assert!(Signal::new(vec![0, 0], vec![2], vec![c(0.0); 2]).is_err());
        assert!(Signal::new(vec![], vec![], vec![]).is_err());
    }
}
