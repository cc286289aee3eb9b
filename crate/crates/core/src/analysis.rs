//! Continuum-side diagnostics: sum rules, isotropy, cascade samples of
//! refinable functions and of tree-node generators.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

use crate::amra::{NodeId, TreePlan};
use crate::error::{Error, Result};
use crate::intlat::{coset_reps, inverse_chain, CosetReducer, IntMatrix, RatMatrix};
use crate::mask::Mask;
use crate::ops::{subdivide, transition};
use crate::signal::{for_each_point, Signal};

/// Degree cap for [`sum_rule_order`]; a mask passing every degree below it
/// reports the cap.
pub const MAX_SUM_RULE_ORDER: usize = 32;

/// Samples `samples(n) ≈ f(grid · n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    /// Number of cascade refinements behind the samples.
    pub level: usize,
    pub m0: IntMatrix,
    /// Maps sample indices to points of `R^d`.
    pub grid: RatMatrix,
    pub samples: Signal,
}

impl GridFunction {
    pub fn dim(&self) -> usize {
        self.samples.dim()
    }

    /// Location of sample `n`.
    pub fn point(&self, n: &[i64]) -> Vec<f64> {
        let g = self.grid.to_f64();
        let d = n.len();
        (0..d).map(|i| (0..d).map(|j| g[i * d + j] * n[j] as f64).sum()).collect()
    }

    /// Largest `|self(n) - finer(M_0 n)|` over the coarse grid, where
    /// `finer` lives on `grid · M_0^{-1}`.
    pub fn refinement_gap(&self, finer: &GridFunction) -> Result<f64> {
        if finer.grid.mul(&self.m0.to_rational()) != self.grid {
            return Err(Error::BadShape("grids are not one refinement apart".into()));
        }
        let reducer = CosetReducer::new(&self.m0)?;
        let mut worst = 0.0f64;
        finer.samples.for_each(|p, v| {
            if let Some(n) = reducer.lattice_coords(p) {
                worst = worst.max((v - self.samples.get(&n)).norm());
            }
        });
        self.samples.for_each(|n, v| {
            worst = worst.max((v - finer.samples.get(&self.m0.apply(n))).norm());
        });
        Ok(worst)
    }

    /// Weighted mean and covariance of the sample locations under `|v|²`.
    pub fn second_moments(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut mass = 0.0;
        let mut mean = vec![0.0; d];
        let mut pts = Vec::new();
        self.samples.for_each(|n, v| {
            let w = v.norm_sqr();
            if w > 0.0 {
                let x = self.point(n);
                mass += w;
                for i in 0..d {
                    mean[i] += w * x[i];
                }
                pts.push((x, w));
            }
        });
        if mass == 0.0 {
            return (mean, vec![0.0; d * d]);
        }
        mean.iter_mut().for_each(|m| *m /= mass);
        let mut cov = vec![0.0; d * d];
        for (x, w) in pts {
            for i in 0..d {
                for j in 0..d {
                    cov[i * d + j] += w * (x[i] - mean[i]) * (x[j] - mean[j]);
                }
            }
        }
        cov.iter_mut().for_each(|c| *c /= mass);
        (mean, cov)
    }

    /// Angle in `[0, π)` of the dominant eigenvector of the 2-D
    /// second-moment matrix.
    pub fn principal_axis(&self) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::DimMismatch { expected: 2, got: self.dim() });
        }
        let (_, c) = self.second_moments();
        let angle = 0.5 * (2.0 * c[1]).atan2(c[0] - c[3]);
        Ok(angle.rem_euclid(std::f64::consts::PI))
    }
}

/// Monomial `p^β`.
fn monomial(p: &[i64], beta: &[usize]) -> f64 {
    p.iter().zip(beta).map(|(&x, &b)| (x as f64).powi(b as i32)).product()
}

/// Multi-indices of total degree `k` in `d` variables.
fn multi_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![k]];
    }
    (0..=k)
        .flat_map(|first| {
            multi_indices(d - 1, k - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Largest `τ` such that for every `|β| < τ` the moments
/// `Σ_k a(n + M_0 k)(n + M_0 k)^β` agree across all cosets `n`.
/// Comparisons use `tol` relative to the size of the summands.
pub fn sum_rule_order(a: &Mask, m0: &IntMatrix, tol: f64) -> Result<usize> {
    let reducer = CosetReducer::new(m0)?;
    let reps = coset_reps(m0)?;
    let entries: Vec<(Vec<i64>, Complex64, Vec<i64>)> = a
        .coeffs()
        .entries()
        .into_iter()
        .map(|(p, v)| {
            let g = reducer.reduce(&p);
            (p, v, g)
        })
        .collect();
    let zero = vec![0i64; a.dim()];
    for k in 0..MAX_SUM_RULE_ORDER {
        for beta in multi_indices(a.dim(), k) {
            let mut sums: BTreeMap<&[i64], Complex64> = reps.iter().map(|r| (r.as_slice(), Complex64::new(0.0, 0.0))).collect();
            let mut scale = 1.0f64;
            for (p, v, g) in &entries {
                let term = v * monomial(p, &beta);
                scale = scale.max(term.norm());
                *sums.get_mut(g.as_slice()).expect("coset rep") += term;
            }
            let base = sums[zero.as_slice()];
            if sums.values().any(|s| (s - base).norm() > tol * scale) {
                return Ok(k);
            }
        }
    }
    Ok(MAX_SUM_RULE_ORDER)
}

/// True iff `m0` is numerically diagonalizable (eigenvector matrix condition
/// number below `1e8`) and all eigenvalue moduli agree within
/// `tol · |λ_max|`.
pub fn is_isotropic(m0: &IntMatrix, tol: f64) -> bool {
    let d = m0.dim();
    let real = DMatrix::from_row_slice(d, d, &m0.entries().iter().map(|&x| x as f64).collect::<Vec<_>>());
    let eig: Vec<Complex<f64>> = real.complex_eigenvalues().iter().cloned().collect();
    let lmax = eig.iter().map(|l| l.norm()).fold(0.0, f64::max);
    if lmax == 0.0 || eig.iter().any(|l| (l.norm() - lmax).abs() > tol * lmax) {
        return false;
    }
    let cm: DMatrix<Complex<f64>> = real.map(|x| Complex::new(x, 0.0));
    let mut clusters: Vec<(Complex<f64>, usize)> = Vec::new();
    for l in &eig {
        match clusters.iter_mut().find(|(c, _)| (c - l).norm() <= 1e-6 * lmax) {
            Some(c) => c.1 += 1,
            None => clusters.push((*l, 1)),
        }
    }
    let mut vectors: Vec<nalgebra::DVector<Complex<f64>>> = Vec::new();
    for (lambda, mult) in clusters {
        let shifted = &cm - DMatrix::from_diagonal_element(d, d, lambda);
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        for &i in order.iter().take(mult) {
            if svd.singular_values[i] > 1e-6 * lmax {
                return false;
            }
            vectors.push(v_t.row(i).adjoint());
        }
    }
    let v = DMatrix::from_columns(&vectors);
    let s = v.singular_values();
    let (smax, smin) = (s.max(), s.min());
    smin > 0.0 && smax / smin < 1e8
}

fn require_low_pass(a: &Mask) -> Result<()> {
    let s = a.symbol(&vec![0.0; a.dim()]);
    if (s - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::NotLowPass(format!("{s}")));
    }
    Ok(())
}

/// `J`-fold subdivision of `δ_0`; `samples(n) ≈ φ(M_0^{-J} n)` for the
/// refinable function `φ(x) = |det M_0| Σ_k a(k) φ(M_0 x − k)`.
pub fn cascade(a: &Mask, m0: &IntMatrix, levels: usize) -> Result<GridFunction> {
    require_low_pass(a)?;
    if a.dim() != m0.dim() {
        return Err(Error::DimMismatch { expected: m0.dim(), got: a.dim() });
    }
    let mut u = Signal::delta(&vec![0; a.dim()]);
    for _ in 0..levels {
        u = subdivide(a, m0, &u)?;
    }
    let grid = inverse_chain(m0.dim(), std::iter::repeat_n(m0, levels))?;
    Ok(GridFunction { level: levels, m0: m0.clone(), grid, samples: u })
}

/// L∞ distance between cascade levels `J` and `J + 1` on the level-`J` grid.
pub fn cascade_increment(a: &Mask, m0: &IntMatrix, levels: usize) -> Result<f64> {
    cascade(a, m0, levels)?.refinement_gap(&cascade(a, m0, levels + 1)?)
}

/// Base refinable pair `(a, M_0)` of a tree: `ψ^𝟎 = φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinablePair {
    pub mask: Mask,
    pub m0: IntMatrix,
}

/// Samples of `ψ^β(x) = |det M_β| Σ_k a_β(k) ψ^{β^(1)}(M_β x − k)`, starting
/// from the cascade of `base` at level `grid_level`. The result lives on the
/// grid `N_β M_0^{-J}`.
pub fn node_generator_samples(plan: &TreePlan, base: &RefinablePair, beta: &NodeId, grid_level: usize) -> Result<GridFunction> {
    if !plan.is_leaf(beta) {
        return Err(Error::NotALeaf(beta.to_string()));
    }
    let report = crate::amra::validate_plan(plan)?;
    if !report.certified {
        return Err(Error::NotCertified(report.worst_violation));
    }
    if base.m0.dim() != plan.dim() {
        return Err(Error::DimMismatch { expected: plan.dim(), got: base.m0.dim() });
    }
    let phi = cascade(&base.mask, &base.m0, grid_level)?;
    let mut u = phi.samples;
    let mut grid = phi.grid;
    let mut p = IntMatrix::identity(plan.dim());
    for _ in 0..grid_level {
        p = p.mul(&base.m0)?;
    }
    for item in plan.path_items(beta)? {
        u = weighted_upsampled_conv(&item.mask, &p, &u, item.matrix.det().unsigned_abs() as f64);
        grid = item.matrix.inverse()?.mul(&grid);
        p = p.mul(&item.matrix)?;
    }
    Ok(GridFunction { level: grid_level, m0: base.m0.clone(), grid, samples: u })
}

/// `w(n) = c Σ_k a(k) u(n − P k)`.
fn weighted_upsampled_conv(a: &Mask, p: &IntMatrix, u: &Signal, c: f64) -> Signal {
    let mut out = Signal::empty(u.dim());
    for (k, ak) in a.coeffs().entries() {
        let shift = p.apply(&k);
        let off: Vec<i64> = u.offset().iter().zip(&shift).map(|(o, s)| o + s).collect();
        let moved = Signal::new(off, u.shape().to_vec(), u.data().iter().map(|v| v * ak * c).collect()).expect("same box");
        out.add_assign(&moved);
    }
    out
}

/// `‖f − P_J f‖_2` for the quasi-projection
/// `P_J f = Σ_k ⟨f, φ_{J,k}⟩ φ_{J,k}`, `φ_{J,k} = |det M_0|^{J/2} φ(M_0^J · − k)`,
/// discretized on the grid `M_0^{-(J+q)} Z^d` over `[-half_width, half_width]^d`
/// with `φ` sampled by a level-`q` cascade.
pub fn projection_error(a: &Mask, m0: &IntMatrix, j: usize, q: usize, half_width: f64, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let d = m0.dim();
    let det = m0.det().unsigned_abs() as f64;
    let phi_q = cascade(a, m0, q)?;
    let phi_mask = Mask::new(phi_q.samples.clone(), a.band());
    let mut mq = IntMatrix::identity(d);
    for _ in 0..q {
        mq = mq.mul(m0)?;
    }
    let level = j + q;
    let grid = inverse_chain(d, std::iter::repeat_n(m0, level))?;
    let g = grid.to_f64();
    let mut ml = IntMatrix::identity(d);
    for _ in 0..level {
        ml = ml.mul(m0)?;
    }
    let row_sum = ml.rows().iter().map(|r| r.iter().map(|x| x.abs()).sum::<i64>()).max().unwrap_or(1);
    let extent = (half_width * row_sum as f64).ceil() as i64;
    let offset = vec![-extent; d];
    let shape = vec![(2 * extent + 1) as usize; d];
    let mut data = Vec::with_capacity(shape.iter().product());
    for_each_point(&offset, &shape, |_, n| {
        let x: Vec<f64> = (0..d).map(|i| (0..d).map(|k| g[i * d + k] * n[k] as f64).sum()).collect();
        let inside = x.iter().all(|v| v.abs() <= half_width);
        data.push(Complex64::new(if inside { f(&x) } else { 0.0 }, 0.0));
    });
    let samples = Signal::new(offset, shape, data)?;
    let c = transition(&phi_mask, &mq, &samples)?.scaled(Complex64::new(det.powf(j as f64 / 2.0 - level as f64), 0.0));
    let approx = subdivide(&phi_mask, &mq, &c)?.scaled(Complex64::new(det.powf(j as f64 / 2.0 - q as f64), 0.0));
    let mut err = 0.0;
    let (off, shp) = samples.union_box(&approx);
    for_each_point(&off, &shp, |_, n| err += (samples.get(n) - approx.get(n)).norm_sqr());
    Ok((err * det.powf(-(level as f64))).sqrt())
}
