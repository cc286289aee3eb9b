//! Subdivision and transition operators with exact support propagation.
//!
//! ```text
//! [S_{a,M} v](n) = |det M| Σ_k v(k) a(n - M k)
//! [T_{a,M} v](n) =          Σ_k v(k) conj(a(k - M n))
//! ```
//!
//! Supports grow; nothing is ever cropped or periodized.

use num_complex::Complex64;
use num_rational::Rational64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::intlat::IntMatrix;
use crate::mask::Mask;
use crate::signal::{for_each_point, Signal};
use crate::uep::FilterBank;

/// Outputs below this many points are computed on the calling thread.
const PAR_THRESHOLD: usize = 1 << 14;

fn check_dims(a: &Mask, m: &IntMatrix, v: &Signal) -> Result<i64> {
    if a.dim() != v.dim() {
        return Err(Error::DimMismatch { expected: v.dim(), got: a.dim() });
    }
    if m.dim() != v.dim() {
        return Err(Error::DimMismatch { expected: v.dim(), got: m.dim() });
    }
    m.nonsingular()
}

/// Integer box (inclusive corners) containing `M^{-1}` of the box `[lo, hi]`.
fn preimage_box(m: &IntMatrix, lo: &[i64], hi: &[i64]) -> Result<(Vec<i64>, Vec<i64>)> {
    let d = lo.len();
    let inv = m.inverse()?;
    let mut out_lo = vec![i64::MAX; d];
    let mut out_hi = vec![i64::MIN; d];
    for corner in 0..(1usize << d) {
        let v: Vec<Rational64> = (0..d).map(|i| Rational64::from_integer(if corner >> i & 1 == 1 { hi[i] } else { lo[i] })).collect();
        let y = inv.apply(&v);
        for i in 0..d {
            out_lo[i] = out_lo[i].min(y[i].floor().to_integer());
            out_hi[i] = out_hi[i].max(y[i].ceil().to_integer());
        }
    }
    Ok((out_lo, out_hi))
}

/// Integer box containing `M` applied to the box `[lo, hi]`.
fn image_box(m: &IntMatrix, lo: &[i64], hi: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let d = lo.len();
    let mut out_lo = vec![i64::MAX; d];
    let mut out_hi = vec![i64::MIN; d];
    for corner in 0..(1usize << d) {
        let v: Vec<i64> = (0..d).map(|i| if corner >> i & 1 == 1 { hi[i] } else { lo[i] }).collect();
        let y = m.apply(&v);
        for i in 0..d {
            out_lo[i] = out_lo[i].min(y[i]);
            out_hi[i] = out_hi[i].max(y[i]);
        }
    }
    (out_lo, out_hi)
}

fn shape_of(lo: &[i64], hi: &[i64]) -> Vec<usize> {
    lo.iter().zip(hi).map(|(l, h)| (h - l + 1).max(0) as usize).collect()
}

/// Transition (analysis) operator `T_{a,M}`.
pub fn transition(a: &Mask, m: &IntMatrix, v: &Signal) -> Result<Signal> {
    check_dims(a, m, v)?;
    let d = v.dim();
    if v.is_empty() || a.coeffs().is_empty() {
        return Ok(Signal::empty(d));
    }
    let (alo, ahi) = (a.coeffs().offset(), a.coeffs().upper());
    let (vlo, vhi) = (v.offset(), v.upper());
    let lo: Vec<i64> = (0..d).map(|i| vlo[i] - ahi[i]).collect();
    let hi: Vec<i64> = (0..d).map(|i| vhi[i] - alo[i]).collect();
    let (nlo, nhi) = preimage_box(m, &lo, &hi)?;
    let shape = shape_of(&nlo, &nhi);

    let taps: Vec<(Vec<i64>, Complex64)> = a.coeffs().entries().into_iter().map(|(k, c)| (k, c.conj())).collect();
    let vshape = v.shape();
    let rows = m.rows();

    let eval = |n: &[i64]| -> Complex64 {
        let mut base = [0i64; crate::intlat::MAX_DIM];
        for i in 0..d {
            base[i] = (0..d).map(|j| rows[i][j] * n[j]).sum::<i64>() - vlo[i];
        }
        let mut acc = Complex64::new(0.0, 0.0);
        'tap: for (k, c) in &taps {
            let mut lin = 0usize;
            for i in 0..d {
                let r = base[i] + k[i];
                if r < 0 || r >= vshape[i] as i64 {
                    continue 'tap;
                }
                lin = lin * vshape[i] + r as usize;
            }
            acc += v.data()[lin] * c;
        }
        acc
    };

    let total: usize = shape.iter().product();
    let mut out = Signal::zeros(nlo.clone(), shape.clone());
    if total >= PAR_THRESHOLD && d > 1 {
        // One slab per index of the first axis; each output point is
        // computed independently, so the result does not depend on scheduling.
        let slab: usize = shape[1..].iter().product();
        let (sub_off, sub_shape) = (nlo[1..].to_vec(), shape[1..].to_vec());
        out.data_mut().par_chunks_mut(slab).enumerate().for_each(|(i0, chunk)| {
            let mut n = vec![0i64; d];
            n[0] = nlo[0] + i0 as i64;
            for_each_point(&sub_off, &sub_shape, |lin, p| {
                n[1..].copy_from_slice(p);
                chunk[lin] = eval(&n);
            });
        });
    } else {
        let data = out.data_mut();
        for_each_point(&nlo, &shape, |lin, n| data[lin] = eval(n));
    }
    Ok(out)
}

/// Subdivision (synthesis) operator `S_{a,M}`.
pub fn subdivide(a: &Mask, m: &IntMatrix, v: &Signal) -> Result<Signal> {
    let det = check_dims(a, m, v)?;
    let d = v.dim();
    if v.is_empty() || a.coeffs().is_empty() {
        return Ok(Signal::empty(d));
    }
    let (mlo, mhi) = image_box(m, v.offset(), &v.upper());
    let (alo, ahi) = (a.coeffs().offset(), a.coeffs().upper());
    let lo: Vec<i64> = (0..d).map(|i| mlo[i] + alo[i]).collect();
    let hi: Vec<i64> = (0..d).map(|i| mhi[i] + ahi[i]).collect();
    let shape = shape_of(&lo, &hi);
    let mut out = Signal::zeros(lo.clone(), shape.clone());

    let scale = Complex64::new(det.abs() as f64, 0.0);
    let taps = a.coeffs().entries();
    let rows = m.rows();
    let data = out.data_mut();
    v.for_each(|k, vk| {
        if vk == Complex64::new(0.0, 0.0) {
            return;
        }
        let w = vk * scale;
        let mut base = [0i64; crate::intlat::MAX_DIM];
        for i in 0..d {
            base[i] = (0..d).map(|j| rows[i][j] * k[j]).sum::<i64>() - lo[i];
        }
        for (t, c) in &taps {
            let mut lin = 0usize;
            for i in 0..d {
                lin = lin * shape[i] + (base[i] + t[i]) as usize;
            }
            data[lin] += w * c;
        }
    });
    Ok(out)
}

/// `Σ_ι S_{a_ι,M_ι} parts[ι]`.
pub fn reconstruct_step(bank: &FilterBank, parts: &[Signal]) -> Result<Signal> {
    if parts.len() != bank.len() {
        return Err(Error::LengthMismatch { expected: bank.len(), got: parts.len() });
    }
    let mut acc = Signal::empty(bank.dim());
    for (item, part) in bank.items().iter().zip(parts) {
        acc.add_assign(&subdivide(&item.mask, &item.matrix, part)?);
    }
    Ok(acc)
}

/// `[T_{a_ι,M_ι} v]_ι` for every filter of the bank, in bank order.
pub fn decompose_step(bank: &FilterBank, v: &Signal) -> Result<Vec<Signal>> {
    bank.items().iter().map(|item| transition(&item.mask, &item.matrix, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::Band;
    use crate::uep::BankItem;

    fn haar() -> (Mask, Mask) {
        (Mask::from_real_1d(0, &[0.5, 0.5], Band::Low), Mask::from_real_1d(0, &[0.5, -0.5], Band::High))
    }

    fn real(s: &Signal, p: &[i64]) -> f64 {
        s.get(p).re
    }

    #[test]
    fn transition_examples() {
        let (lo, hi) = haar();
        let two = IntMatrix::scalar(1, 2);
        let v = Signal::from_real(vec![-1, 3], vec![2, 2], &[1.0, -2.0, 3.5, 0.25]).unwrap();
        let id = transition(&Mask::delta(2, Band::Low), &IntMatrix::identity(2), &v).unwrap();
        assert!(id.same_function(&v, 0.0));

        let t = transition(&lo, &two, &Signal::delta(&[0])).unwrap();
        assert!(t.same_function(&Signal::delta(&[0]).scaled(Complex64::new(0.5, 0.0)), 0.0));

        let t = transition(&hi, &two, &Signal::delta(&[1])).unwrap();
        assert_eq!(real(&t, &[0]), -0.5);
        assert!(t.same_function(&Signal::delta(&[0]).scaled(Complex64::new(-0.5, 0.0)), 0.0));
    }

    #[test]
    fn subdivide_examples() {
        let (lo, _) = haar();
        let two = IntMatrix::scalar(1, 2);
        let v = Signal::from_real(vec![2, 0], vec![1, 3], &[1.0, 2.0, 3.0]).unwrap();
        assert!(subdivide(&Mask::delta(2, Band::Low), &IntMatrix::identity(2), &v).unwrap().same_function(&v, 0.0));

        let s = subdivide(&lo, &two, &Signal::delta(&[0])).unwrap();
        let expect = Signal::from_real(vec![0], vec![2], &[1.0, 1.0]).unwrap();
        assert!(s.same_function(&expect, 0.0));

        let s = subdivide(&lo, &two, &Signal::delta(&[1])).unwrap();
        let expect = Signal::from_real(vec![2], vec![2], &[1.0, 1.0]).unwrap();
        assert!(s.same_function(&expect, 0.0));
    }

    #[test]
    fn reconstruct_examples() {
        let (lo, hi) = haar();
        let two = IntMatrix::scalar(1, 2);
        let bank = FilterBank::new(vec![BankItem::new(lo.clone(), two.clone()), BankItem::new(hi.clone(), two.clone())]).unwrap();
        let v = Signal::delta(&[0]);
        let parts = decompose_step(&bank, &v).unwrap();
        let back = reconstruct_step(&bank, &parts).unwrap();
        assert!(back.same_function(&v, 1e-15));

        let single = FilterBank::new(vec![BankItem::new(Mask::delta(1, Band::Low), IntMatrix::identity(1))]).unwrap();
        let w = Signal::from_real(vec![-3], vec![3], &[1.0, 2.0, 3.0]).unwrap();
        assert!(reconstruct_step(&single, std::slice::from_ref(&w)).unwrap().same_function(&w, 0.0));

        let zeros = vec![Signal::zeros(vec![0], vec![3]), Signal::zeros(vec![5], vec![2])];
        assert_eq!(reconstruct_step(&bank, &zeros).unwrap().max_abs(), 0.0);
        assert!(reconstruct_step(&bank, &zeros[..1]).is_err());
    }

    #[test]
    fn transition_support_with_shear() {
        // Every nonzero output must be inside the computed box; compare
        // against a brute-force evaluation over a generous window.
        let a = Mask::new(Signal::from_real(vec![-1, 0], vec![2, 3], &[1.0, -2.0, 0.5, 3.0, 1.5, -1.0]).unwrap(), Band::High);
        let m = IntMatrix::from_rows(&[[4, 2], [0, 2]]);
        let v = Signal::from_real(vec![-3, 2], vec![5, 4], &(0..20).map(|i| (i as f64).sin()).collect::<Vec<_>>()).unwrap();
        let t = transition(&a, &m, &v).unwrap();
        for n0 in -10..10 {
            for n1 in -10..10 {
                let mut acc = Complex64::new(0.0, 0.0);
                v.for_each(|k, vk| {
                    let mn = m.apply(&[n0, n1]);
                    acc += vk * a.get(&[k[0] - mn[0], k[1] - mn[1]]).conj();
                });
                assert!((acc - t.get(&[n0, n1])).norm() < 1e-12, "({n0},{n1})");
            }
        }
    }

    #[test]
    fn dim_checks() {
        let (lo, _) = haar();
        let v = Signal::delta(&[0, 0]);
        assert!(transition(&lo, &IntMatrix::scalar(1, 2), &v).is_err());
        assert_eq!(subdivide(&Mask::delta(2, Band::Low), &IntMatrix::from_rows(&[[1, 2], [2, 4]]), &v), Err(Error::Singular));
    }
}
