//! Finitely supported filters and their symbols.
//!
//! The symbol convention is fixed once here:
//! `â(ξ) = Σ_k a(k) exp(-i k·ξ)`. Other modules evaluate symbols through
//! [`Mask::symbol`] instead of re-deriving the sum.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlat::{IntMatrix, RationalVec};
use crate::signal::{for_each_point, Signal};

/// Whether a filter feeds the next decomposition level or produces a leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Low,
    High,
}

/// A finitely supported filter on `Z^d` with a band label. The stored box is
/// always the minimal support box.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    coeffs: Signal,
    band: Band,
}

/// `exp(-2πi r)` for an exact rational `r`, reduced mod 1 first.
pub(crate) fn unit_root(r: Rational64) -> Complex64 {
    let f = r - r.floor();
    let angle = -2.0 * PI * (*f.numer() as f64) / (*f.denom() as f64);
    Complex64::new(angle.cos(), angle.sin())
}

fn rational_dot(omega: &RationalVec, n: &[i64]) -> Rational64 {
    omega.0.iter().zip(n).map(|(w, &k)| w * k).sum()
}

impl Mask {
    pub fn new(coeffs: Signal, band: Band) -> Self {
        Self { coeffs: coeffs.trimmed(), band }
    }

    /// One-dimensional mask with `values[i]` at `offset + i`.
    pub fn from_real_1d(offset: i64, values: &[f64], band: Band) -> Self {
        Self::new(Signal::from_real(vec![offset], vec![values.len()], values).expect("1-D mask"), band)
    }

    /// Unit impulse at the origin.
    pub fn delta(dim: usize, band: Band) -> Self {
        Self::new(Signal::delta(&vec![0; dim]), band)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn with_band(mut self, band: Band) -> Self {
        self.band = band;
        self
    }

    pub fn coeffs(&self) -> &Signal {
        &self.coeffs
    }

    pub fn get(&self, k: &[i64]) -> Complex64 {
        self.coeffs.get(k)
    }

    /// Number of stored coefficients (support box volume).
    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.is_real()
    }

    /// `â(ξ) = Σ_k a(k) exp(-i k·ξ)`, summed directly over the support.
    pub fn symbol(&self, xi: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        self.coeffs.for_each(|k, v| {
            let phase: f64 = k.iter().zip(xi).map(|(&ki, &x)| ki as f64 * x).sum();
            acc += v * Complex64::new(phase.cos(), -phase.sin());
        });
        acc
    }

    /// Every coefficient multiplied by `c`.
    pub fn scale(&self, c: f64) -> Mask {
        Mask::new(self.coeffs.scaled(Complex64::new(c, 0.0)), self.band)
    }

    /// Relocates coefficients by a unimodular `e`: the result satisfies
    /// `a(E m) = U(m)`, equivalently `â(ξ) = Û(E^T ξ)`.
    pub fn remap_by(&self, e: &IntMatrix) -> Result<Mask> {
        if e.dim() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: e.dim() });
        }
        let det = e.det();
        if det.abs() != 1 {
            return Err(Error::NotUnimodular(det.abs()));
        }
        let entries: Vec<(Vec<i64>, Complex64)> = self.coeffs.entries().into_iter().map(|(m, v)| (e.apply(&m), v)).collect();
        Ok(Mask::new(signal_from_points(self.dim(), &entries), self.band))
    }
}

/// Smallest signal holding the given points.
pub(crate) fn signal_from_points(dim: usize, entries: &[(Vec<i64>, Complex64)]) -> Signal {
    if entries.is_empty() {
        return Signal::empty(dim);
    }
    let lo: Vec<i64> = (0..dim).map(|a| entries.iter().map(|(p, _)| p[a]).min().unwrap()).collect();
    let hi: Vec<i64> = (0..dim).map(|a| entries.iter().map(|(p, _)| p[a]).max().unwrap()).collect();
    let shape = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
    let mut s = Signal::zeros(lo, shape);
    for (p, v) in entries {
        s.set(p, *v);
    }
    s
}

/// Twisted correlation coefficient
/// `c(m, ω) = Σ_n a(m + n) conj(b(n)) exp(-2πi ω·n)`.
pub fn correlation(a: &Mask, b: &Mask, shift: &[i64], omega: &RationalVec) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut p = vec![0i64; shift.len()];
    b.coeffs.for_each(|n, bv| {
        if bv == Complex64::new(0.0, 0.0) {
            return;
        }
        for (axis, slot) in p.iter_mut().enumerate() {
            *slot = shift[axis] + n[axis];
        }
        let av = a.coeffs.get(&p);
        if av != Complex64::new(0.0, 0.0) {
            acc += av * bv.conj() * unit_root(rational_dot(omega, n));
        }
    });
    acc
}

/// All twisted correlation coefficients `m ↦ c(m, ω)` at once, on the box
/// `supp(a) - supp(b)`.
pub fn correlation_all(a: &Mask, b: &Mask, omega: &RationalVec) -> Signal {
    let d = a.dim();
    if a.coeffs.is_empty() || b.coeffs.is_empty() {
        return Signal::empty(d);
    }
    let (alo, ahi) = (a.coeffs.offset().to_vec(), a.coeffs.upper());
    let (blo, bhi) = (b.coeffs.offset().to_vec(), b.coeffs.upper());
    let offset: Vec<i64> = (0..d).map(|i| alo[i] - bhi[i]).collect();
    let shape: Vec<usize> = (0..d).map(|i| (ahi[i] - blo[i] - offset[i] + 1) as usize).collect();
    let mut out = Signal::zeros(offset, shape);
    let a_entries = a.coeffs.entries();
    let mut m = vec![0i64; d];
    for (n, bv) in b.coeffs.entries() {
        let w = bv.conj() * unit_root(rational_dot(omega, &n));
        for (p, av) in &a_entries {
            for i in 0..d {
                m[i] = p[i] - n[i];
            }
            let idx = out.index_of(&m).expect("correlation box");
            out.data_mut()[idx] += av * w;
        }
    }
    out
}

/// Tensor product `U(β) = u_1(β_1) ··· u_d(β_d)` of one-dimensional masks.
/// The result is high-pass iff any factor is.
pub fn tensor(factors: &[Mask]) -> Result<Mask> {
    if factors.is_empty() {
        return Err(Error::Empty("tensor factors"));
    }
    if let Some(f) = factors.iter().find(|f| f.dim() != 1) {
        return Err(Error::DimMismatch { expected: 1, got: f.dim() });
    }
    let d = factors.len();
    let band = if factors.iter().any(|f| f.band == Band::High) { Band::High } else { Band::Low };
    let offset: Vec<i64> = factors.iter().map(|f| f.coeffs.offset()[0]).collect();
    let shape: Vec<usize> = factors.iter().map(|f| f.coeffs.shape()[0]).collect();
    let mut data = vec![Complex64::new(0.0, 0.0); shape.iter().product()];
    for_each_point(&offset, &shape, |lin, p| {
        data[lin] = (0..d).map(|i| factors[i].coeffs.get(&p[i..i + 1])).product();
    });
    Ok(Mask::new(Signal::new(offset, shape, data)?, band))
}

/// Squared `l2` norm `Σ |a(k)|^2`.
pub fn energy(a: &Mask) -> f64 {
    a.coeffs.norm_sq()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlat::IntMatrix;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn haar_low() -> Mask {
        Mask::from_real_1d(0, &[0.5, 0.5], Band::Low)
    }

    fn haar_high() -> Mask {
        Mask::from_real_1d(0, &[0.5, -0.5], Band::High)
    }

    #[test]
    fn symbol_examples() {
        let d = Mask::delta(2, Band::Low);
        assert!((d.symbol(&[0.3, -1.7]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((haar_low().symbol(&[0.0]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(haar_low().symbol(&[PI]).norm() < 1e-15);
        // (1 + e^{-iπ/2})/2 = (1 - i)/2
        assert!((haar_low().symbol(&[PI / 2.0]) - Complex64::new(0.5, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn correlation_examples() {
        let z1 = RationalVec::from_ratios(&[(0, 1)]);
        let half = RationalVec::from_ratios(&[(1, 2)]);
        let d = Mask::delta(1, Band::Low);
        assert_eq!(correlation(&d, &d, &[0], &z1), Complex64::new(1.0, 0.0));
        assert!((correlation(&haar_low(), &haar_low(), &[0], &z1).re - 0.5).abs() < 1e-15);
        assert!(correlation(&haar_low(), &haar_low(), &[0], &half).norm() < 1e-15);
        assert!((correlation(&haar_low(), &haar_low(), &[1], &z1).re - 0.25).abs() < 1e-15);
        let all = correlation_all(&haar_low(), &haar_low(), &half);
        for m in -1..=1 {
            assert!((all.get(&[m]) - correlation(&haar_low(), &haar_low(), &[m], &half)).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_examples() {
        let d = Mask::delta(1, Band::Low);
        assert_eq!(tensor(&[d.clone(), d.clone()]).unwrap(), Mask::delta(2, Band::Low));
        let ll = tensor(&[haar_low(), haar_low()]).unwrap();
        assert_eq!(ll.coeffs().shape(), &[2, 2]);
        assert!(ll.coeffs().data().iter().all(|v| (v.re - 0.25).abs() < 1e-15));
        let lh = tensor(&[haar_low(), haar_high()]).unwrap();
        assert_eq!(lh.band(), Band::High);
        assert!((lh.get(&[0, 0]).re - 0.25).abs() < 1e-15);
        assert!((lh.get(&[0, 1]).re + 0.25).abs() < 1e-15);
        assert!((lh.get(&[1, 0]).re - 0.25).abs() < 1e-15);
        assert!((lh.get(&[1, 1]).re + 0.25).abs() < 1e-15);
        assert!(tensor(&[]).is_err());
        assert!(tensor(&[ll]).is_err());
    }

    #[test]
    fn remap_examples() {
        let e = IntMatrix::shear2(1);
        let at = |p: &[i64]| Mask::new(Signal::delta(p), Band::Low);
        assert_eq!(at(&[1, 0]).remap_by(&IntMatrix::identity(2)).unwrap(), at(&[1, 0]));
        assert_eq!(at(&[1, 0]).remap_by(&e).unwrap(), at(&[1, 0]));
        assert_eq!(at(&[0, 1]).remap_by(&e).unwrap(), at(&[1, 1]));
        assert_eq!(at(&[0, 1]).remap_by(&IntMatrix::diag(&[2, 1])), Err(Error::NotUnimodular(2)));
    }

    #[test]
    fn scale_examples() {
        let d = Mask::delta(1, Band::Low).scale(FRAC_1_SQRT_2);
        assert_eq!(d.get(&[0]).re, std::f64::consts::FRAC_1_SQRT_2);
        assert_eq!(haar_low().scale(1.0), haar_low());
        let s = haar_low().scale(FRAC_1_SQRT_2);
        assert!((s.get(&[1]).re - 0.35355339059327373).abs() < 1e-16);
    }
}
