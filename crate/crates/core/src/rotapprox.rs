//! Integer matrices of determinant one closest to a planar rotation.
//!
//! The distance is `∫_0^{2π} ‖(R_θ − B)(cos t, sin t)^T‖² dt = π ‖R_θ − B‖_F²`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::intlat::IntMatrix;

/// Objective values closer than this count as ties.
pub const TIE_TOL: f64 = 1e-12;

/// Minimizer set for one angle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotationSolution {
    /// Angle reduced to `[0, 2π)`.
    pub theta: f64,
    /// Sorted lexicographically by row-major entries.
    pub minimizers: Vec<IntMatrix>,
    pub objective: f64,
}

/// Reduces `theta` to `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

/// `π · Σ (R_θ − B)_{ij}²`.
pub fn objective(theta: f64, b: &IntMatrix) -> Result<f64> {
    if b.dim() != 2 {
        return Err(Error::DimMismatch { expected: 2, got: b.dim() });
    }
    let (s, c) = theta.sin_cos();
    let r = [c, -s, s, c];
    let sum: f64 = r.iter().zip(b.entries()).map(|(x, &y)| (x - y as f64).powi(2)).sum();
    Ok(PI * sum)
}

fn m(a: i64, b: i64, c: i64, d: i64) -> IntMatrix {
    IntMatrix::from_rows(&[[a, b], [c, d]])
}

/// `S_s^{(1)}`.
pub fn s1(s: i64) -> IntMatrix {
    m(s, -1, 1, 0)
}

/// `S_s^{(2)}`.
pub fn s2(s: i64) -> IntMatrix {
    m(0, -1, 1, s)
}

/// Interval endpoints of the case table, increasing.
pub fn case_boundaries() -> [f64; 12] {
    [
        PI / 6.0,
        PI / 4.0,
        PI / 3.0,
        2.0 * PI / 3.0,
        3.0 * PI / 4.0,
        5.0 * PI / 6.0,
        7.0 * PI / 6.0,
        5.0 * PI / 4.0,
        4.0 * PI / 3.0,
        5.0 * PI / 3.0,
        7.0 * PI / 4.0,
        11.0 * PI / 6.0,
    ]
}

/// Minimizers on the open interval ending at boundary `k` (case 0 wraps
/// around `θ = 0`).
fn case(k: usize) -> Vec<IntMatrix> {
    let sh = IntMatrix::shear2;
    let i = IntMatrix::identity(2);
    let first: Vec<Vec<IntMatrix>> = vec![
        vec![i.clone()],
        vec![sh(-1), sh(1).transpose()],
        vec![s1(1), s2(1)],
        vec![s1(0)],
        vec![s1(-1), s2(-1)],
        vec![sh(1).neg(), sh(-1).transpose().neg()],
    ];
    if k < 6 {
        first[k].clone()
    } else if k == 6 {
        vec![i.neg()]
    } else {
        first[12 - k].iter().map(|b| b.transpose()).collect()
    }
}

fn finish(theta: f64, candidates: Vec<IntMatrix>) -> RotationSolution {
    let scored: Vec<(IntMatrix, f64)> = candidates
        .into_iter()
        .map(|b| {
            let o = objective(theta, &b).expect("2x2");
            (b, o)
        })
        .collect();
    let best = scored.iter().map(|(_, o)| *o).fold(f64::INFINITY, f64::min);
    let mut minimizers: Vec<IntMatrix> = scored.into_iter().filter(|(_, o)| *o - best <= TIE_TOL).map(|(b, _)| b).collect();
    minimizers.sort_by(|a, b| a.entries().cmp(b.entries()));
    minimizers.dedup();
    RotationSolution { theta, minimizers, objective: best }
}

/// Closed-form solution from the case table. Angles within `1e-9` of a
/// case boundary take both neighbouring cases as candidates; the returned
/// set holds every candidate whose objective ties the best within
/// [`TIE_TOL`].
pub fn best_unimodular(theta: f64) -> RotationSolution {
    let theta = normalize_angle(theta);
    let bounds = case_boundaries();
    let k = bounds.iter().filter(|&&b| b <= theta).count() % 12;
    let mut candidates = case(k);
    for (i, &b) in bounds.iter().enumerate() {
        let dist = (theta - b).abs().min(2.0 * PI - (theta - b).abs());
        if dist < 1e-9 {
            candidates.extend(case(i));
            candidates.extend(case((i + 1) % 12));
        }
    }
    finish(theta, candidates)
}

/// Exhaustive search over matrices with entries in `[-radius, radius]` and
/// determinant one.
pub fn best_unimodular_bruteforce(theta: f64, radius: i64) -> Result<RotationSolution> {
    if radius < 1 {
        return Err(Error::BadShape(format!("search radius must be at least 1, got {radius}")));
    }
    let theta = normalize_angle(theta);
    let range = -radius..=radius;
    let mut candidates = Vec::new();
    for a in range.clone() {
        for b in range.clone() {
            for c in range.clone() {
                for d in range.clone() {
                    if a * d - b * c == 1 {
                        candidates.push(m(a, b, c, d));
                    }
                }
            }
        }
    }
    Ok(finish(theta, candidates))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_examples() {
        assert_eq!(objective(0.0, &IntMatrix::identity(2)).unwrap(), 0.0);
        assert!(objective(PI / 2.0, &m(0, -1, 1, 0)).unwrap() < 1e-15);
        let v = objective(PI / 4.0, &IntMatrix::identity(2)).unwrap();
        assert!((v - 4.0 * PI * (1.0 - (PI / 4.0).cos())).abs() < 1e-12);
        assert!((v - 3.68060473804).abs() < 1e-10);
        assert!(objective(0.0, &IntMatrix::identity(3)).is_err());
    }

    #[test]
    fn table_examples() {
        assert_eq!(best_unimodular(0.0).minimizers, vec![IntMatrix::identity(2)]);
        assert_eq!(best_unimodular(PI / 5.0).minimizers, vec![m(1, -1, 0, 1), m(1, 0, 1, 1)]);
        assert_eq!(best_unimodular(2.0 * PI / 5.0).minimizers, vec![m(0, -1, 1, 0)]);
        assert_eq!(best_unimodular(PI / 4.0).minimizers.len(), 4);
        assert_eq!(best_unimodular(PI / 6.0).minimizers.len(), 3);
        assert_eq!(best_unimodular(-PI / 5.0), best_unimodular(2.0 * PI - PI / 5.0));
    }

    #[test]
    fn cases_match_transposition() {
        for k in 1..6 {
            let mut want: Vec<IntMatrix> = case(k).iter().map(|b| b.transpose()).collect();
            let mut got = case(12 - k);
            want.sort_by(|a, b| a.entries().cmp(b.entries()));
            got.sort_by(|a, b| a.entries().cmp(b.entries()));
            assert_eq!(got, want);
        }
        for k in 0..12 {
            assert!(case(k).iter().all(|b| b.det() == 1));
        }
    }

    #[test]
    fn brute_force_agrees_on_a_coarse_grid() {
        for i in 0..72 {
            let t = 2.0 * PI * i as f64 / 72.0 + 0.013;
            let a = best_unimodular(t);
            let b = best_unimodular_bruteforce(t, 2).unwrap();
            assert_eq!(a.minimizers, b.minimizers, "theta {t}");
            assert!((a.objective - b.objective).abs() < 1e-12);
        }
        assert!(best_unimodular_bruteforce(0.0, 0).is_err());
    }
}
