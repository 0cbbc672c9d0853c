//! Dense eigen and null-space helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Eigenvalues in ascending order with matching unit eigenvectors as columns.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Orthonormal basis (as columns) of `{ z : ||m z|| <= tol ||z|| }`.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad to at least square so the SVD returns a full right basis.
    let rows = m.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| svd.singular_values[i] <= tol)
        .collect();
    DMatrix::from_fn(cols, keep.len(), |r, c| v_t[(keep[c], r)])
}

/// Orthonormal basis of the column span of `m`, dropping directions whose
/// singular value is at most `tol`.
pub fn range_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol)
        .collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

// The QR iteration can stall on clustered eigenvalues; a scalar shift
// changes the deflation test without changing the Schur vectors.
fn schur_with_retries(a: &DMatrix<C64>, a_norm: f64) -> Result<(DMatrix<C64>, DMatrix<C64>, C64)> {
    let n = a.nrows();
    let shifts = [
        C64::new(0.0, 0.0),
        C64::new(a_norm, 0.0),
        C64::new(0.3 * a_norm, 0.7 * a_norm),
    ];
    for shift in shifts {
        let shifted = a + DMatrix::<C64>::identity(n, n) * shift;
        if let Some(schur) = nalgebra::linalg::Schur::try_new(shifted, 4.0 * f64::EPSILON, 10_000) {
            let (q, t) = schur.unpack();
            if q.iter()
                .chain(t.iter())
                .all(|z| z.re.is_finite() && z.im.is_finite())
            {
                return Ok((q, t, shift));
            }
        }
    }
    Err(Error::Numerical(
        "complex Schur iteration did not converge".into(),
    ))
}

/// Eigenvalues and unit eigenvectors of a general complex matrix, unsorted.
///
/// Reduces to complex Schur form `A = Q T Q^*` and back-substitutes each
/// triangular eigenvector, perturbing near-zero pivots the way LAPACK's
/// `ztrevc` does.
pub fn complex_eigen(a: &DMatrix<C64>) -> Result<(Vec<C64>, DMatrix<C64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let a_norm = a.norm();
    if a_norm == 0.0 {
        return Ok((vec![C64::new(0.0, 0.0); n], DMatrix::identity(n, n)));
    }
    let (q, t, shift) = schur_with_retries(a, a_norm)?;

    let t_norm = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let smin = (f64::EPSILON * t_norm).max(f64::MIN_POSITIVE);
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)] - shift).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = DVector::<C64>::zeros(n);
        y[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[j];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smin {
                d = C64::new(smin, 0.0);
            }
            y[i] = -s / d;
            // Rescale to dodge overflow from tiny pivots.
            let big = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if big > 1e100 {
                y /= C64::new(big, 0.0);
            }
        }
        let mut v = &q * y;
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Numerical("degenerate eigenvector".into()));
        }
        v /= C64::new(norm, 0.0);
        vectors.set_column(k, &v);
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_eigen_residuals() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(1.0, 0.5),
                C64::new(-1.0, 0.0),
                C64::new(0.0, -0.5),
                C64::new(-1.0, 0.0),
                C64::new(2.0, 1.0),
                C64::new(-1.0, -0.5),
                C64::new(0.0, -0.5),
                C64::new(-1.0, -0.5),
                C64::new(1.0, 1.0),
            ],
        );
        let (vals, vecs) = complex_eigen(&a).unwrap();
        for (k, lambda) in vals.iter().enumerate() {
            let v = vecs.column(k);
            let r = &a * v - v * *lambda;
            assert!(r.norm() < 1e-12, "residual {}", r.norm());
        }
        let trace: C64 = (0..3).map(|i| a[(i, i)]).sum();
        let sum: C64 = vals.iter().sum();
        assert!((trace - sum).norm() < 1e-12);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let n = null_space(&m, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).norm() < 1e-12);
    }

    #[test]
    fn symmetric_eigen_is_sorted() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let (vals, vecs) = symmetric_eigen(&m);
        assert!(vals[0].abs() < 1e-14 && (vals[1] - 2.0).abs() < 1e-14);
        assert!((vecs[(0, 0)].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    fn residual(a: &DMatrix<C64>) -> f64 {
        let (vals, vecs) = complex_eigen(a).unwrap();
        (0..a.nrows())
            .map(|k| {
                let v = vecs.column(k);
                (a * v - v * vals[k]).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_matrix_has_zero_spectrum() {
        let (vals, vecs) = complex_eigen(&DMatrix::zeros(3, 3)).unwrap();
        assert!(vals.iter().all(|z| z.norm() == 0.0));
        assert_eq!(vecs, DMatrix::identity(3, 3));
    }

    #[test]
    fn clustered_eigenvalues_converge() {
        // star with unit restorative leaves: j is a triple eigenvalue
        let w = 0.44503052111823843;
        let mut a = DMatrix::from_element(7, 7, C64::new(0.0, 0.0));
        for leaf in [1, 2, 4, 5, 6] {
            a[(0, leaf)].im = -1.0;
            a[(leaf, 0)].im = -1.0;
            a[(leaf, leaf)].im = 1.0;
        }
        a[(0, 0)].im = 5.0;
        a[(0, 0)].re = w;
        a[(3, 3)].re = w;
        a[(0, 3)].re = -w;
        a[(3, 0)].re = -w;
        assert!(residual(&a) < 1e-10);
    }
}
