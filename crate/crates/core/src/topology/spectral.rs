//! Spectral radius of the entrywise-absolute weight matrix, and the
//! echo-state normalization `W := W / rho(|W|)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::weights::SparseWeights;

/// Power iteration on `|W| + m*I` where `m` is the largest row sum.
///
/// The diagonal shift leaves the Perron root at `rho + m` while pushing every
/// other eigenvalue strictly inside, so the iteration converges even on
/// periodic or reducible sparsity patterns. The shift is subtracted from the
/// converged estimate.
pub fn power_iteration_radius(w: &SparseWeights) -> Result<f64> {
    let n = w.n();
    if w.max_magnitude() == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    // Largest absolute row sum bounds the radius from above.
    let mut row_sum_max = 0.0_f64;
    for i in 0..n {
        let (_, mags) = w.row(i);
        row_sum_max = row_sum_max.max(mags.iter().sum());
    }
    let shift = row_sum_max.max(f64::MIN_POSITIVE);

    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut estimate = 0.0_f64;
    let mut stable_iters = 0;
    for _ in 0..200_000 {
        w.abs_matvec(&x, &mut y);
        let mut norm = 0.0_f64;
        for k in 0..n {
            y[k] += shift * x[k];
            norm = norm.max(y[k]);
        }
        // Norm growth of the shifted matrix estimates rho + shift.
        let new_estimate = norm - shift;
        for v in &mut y {
            *v /= norm;
        }
        std::mem::swap(&mut x, &mut y);
        if (new_estimate - estimate).abs() <= 1e-14 * shift.max(new_estimate.abs()) {
            stable_iters += 1;
            if stable_iters >= 3 {
                return Ok(new_estimate.max(0.0));
            }
        } else {
            stable_iters = 0;
        }
        estimate = new_estimate;
    }
    Ok(estimate.max(0.0))
}

/// Dense Schur-based radius of `|W|`. Exact at small sizes; O(n^3).
pub fn dense_spectral_radius(w: &SparseWeights) -> Result<f64> {
    let n = w.n();
    if w.max_magnitude() == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let mut dense = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let (cols, mags) = w.row(i);
        for (&j, &m) in cols.iter().zip(mags) {
            dense[(i, j as usize)] = m;
        }
    }
    let radius = dense
        .complex_eigenvalues()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    Ok(radius)
}

/// rho(|W|): exact dense solve at small sizes, power iteration beyond.
pub fn spectral_radius(w: &SparseWeights) -> Result<f64> {
    if w.n() <= 64 {
        dense_spectral_radius(w)
    } else {
        power_iteration_radius(w)
    }
}

/// Divide all magnitudes by rho(|W|) in place; returns the radius that was
/// divided out. Signs are untouched by construction.
pub fn spectral_radius_normalize(w: &mut SparseWeights) -> Result<f64> {
    let radius = spectral_radius(w)?;
    if radius == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    w.scale_all(1.0 / radius);
    Ok(radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    use crate::rng::seeded_rng;

    #[test]
    fn four_cycle_normalizes_to_largest_entry() {
        // 0->2 (2.0), 1->3 (1.0), 2->0 (2.0), 3->1 (1.0): two decoupled
        // 2-cycles with radii 2 and 1, so rho(|W|) = 2.
        let mut w = SparseWeights::from_rows(
            vec![true; 4],
            vec![vec![(2, 2.0)], vec![(3, 1.0)], vec![(0, 2.0)], vec![(1, 1.0)]],
        );
        let r = spectral_radius_normalize(&mut w).unwrap();
        assert_relative_eq!(r, 2.0, max_relative = 1e-12);
        assert_relative_eq!(spectral_radius(&w).unwrap(), 1.0, max_relative = 1e-9);
        assert_relative_eq!(w.get(0, 2), 1.0, max_relative = 1e-12);
        assert_relative_eq!(w.get(1, 3), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn antisymmetric_signed_example() {
        // W = [[0, -2], [2, 0]]: |W| has radius 2; the normalized matrix is
        // [[0, -1], [1, 0]] with signs preserved.
        let mut w = SparseWeights::from_dense(
            &[vec![0.0, -2.0], vec![2.0, 0.0]],
            Some(vec![false, true]),
        )
        .unwrap();
        let r = spectral_radius_normalize(&mut w).unwrap();
        assert_relative_eq!(r, 2.0, max_relative = 1e-12);
        assert_relative_eq!(w.get(0, 1), -1.0, max_relative = 1e-12);
        assert_relative_eq!(w.get(1, 0), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn normalization_is_idempotent() {
        let mut rng = seeded_rng(21, 7);
        for _ in 0..5 {
            let n = 24;
            let mut rows = Vec::new();
            for i in 0..n {
                let mut row = Vec::new();
                for j in 0..n {
                    if i != j && rng.gen::<f64>() < 0.2 {
                        row.push((j as u32, rng.gen_range(0.05..1.0)));
                    }
                }
                rows.push(row);
            }
            let mut w = SparseWeights::from_rows(vec![true; n], rows);
            if w.nnz() == 0 {
                continue;
            }
            let r1 = spectral_radius_normalize(&mut w);
            if r1.is_err() {
                continue; // nilpotent draw
            }
            let before = w.clone();
            let r2 = spectral_radius_normalize(&mut w).unwrap();
            assert_relative_eq!(r2, 1.0, max_relative = 1e-6);
            for i in 0..n {
                let (cols, mags) = w.row(i);
                let (_, prev) = before.row(i);
                for (k, &j) in cols.iter().enumerate() {
                    let _ = j;
                    assert_relative_eq!(mags[k], prev[k], max_relative = 1e-6);
                }
            }
        }
    }

    #[test]
    fn power_iteration_agrees_with_dense_solver() {
        let mut rng = seeded_rng(5, 13);
        for trial in 0..10 {
            let n = 16 + (trial % 4) * 16; // 16..64
            let mut rows = Vec::new();
            for i in 0..n {
                let mut row = Vec::new();
                for j in 0..n {
                    if i != j && rng.gen::<f64>() < 0.15 {
                        row.push((j as u32, rng.gen_range(0.0..1.0)));
                    }
                }
                rows.push(row);
            }
            let w = SparseWeights::from_rows(vec![true; n], rows);
            if w.max_magnitude() == 0.0 {
                continue;
            }
            let dense = dense_spectral_radius(&w).unwrap();
            let power = power_iteration_radius(&w).unwrap();
            assert!(
                (dense - power).abs() <= 1e-9 * dense.max(1.0),
                "n={n} dense={dense} power={power}"
            );
        }
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let w = SparseWeights::from_rows(vec![true; 3], vec![vec![], vec![], vec![]]);
        assert!(matches!(power_iteration_radius(&w), Err(Error::ZeroMatrix)));
        assert!(matches!(dense_spectral_radius(&w), Err(Error::ZeroMatrix)));
    }
}
