//! Complex Schur form with eigenvalue reordering.

use nalgebra::{Complex, DMatrix};

use super::{Complex64, Matrix};
use crate::error::{DuioError, Result};

type CMatrix = DMatrix<Complex64>;

/// Unitary `Q` and upper-triangular `T` with `A = Q T Q^H`.
pub(crate) fn complex_schur(a: &Matrix) -> Result<(CMatrix, CMatrix)> {
    if !a.is_square() {
        return Err(DuioError::DimensionMismatch(format!(
            "Schur form needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(DuioError::EigenSolverFailure(
            "matrix has non-finite entries".into(),
        ));
    }
    let n = a.nrows();
    let c = a.map(|v| Complex::new(v, 0.0));
    // the deflation test at exactly machine epsilon occasionally stalls;
    // loosening it a little is harmless for the accuracy we need
    let schur = [1.0, 16.0, 256.0]
        .iter()
        .find_map(|f| {
            nalgebra::linalg::Schur::try_new(c.clone(), f * f64::EPSILON, 1000 * n.max(1))
        })
        .ok_or_else(|| DuioError::EigenSolverFailure("QR iteration did not converge".into()))?;
    let (q, mut t) = schur.unpack();
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = Complex::new(0.0, 0.0);
        }
    }
    Ok((q, t))
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    let (_, t) = complex_schur(a)?;
    Ok((0..a.nrows()).map(|i| t[(i, i)]).collect())
}

/// Swap the diagonal entries at `k` and `k + 1` with a unitary rotation.
fn swap_adjacent(q: &mut CMatrix, t: &mut CMatrix, k: usize) {
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    let t12 = t[(k, k + 1)];
    // eigenvector of the 2x2 block for t22
    let v1 = t12;
    let v2 = t22 - t11;
    let nv = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    if nv == 0.0 {
        return;
    }
    let (v1, v2) = (v1 / nv, v2 / nv);
    let g = CMatrix::from_row_slice(2, 2, &[v1, -v2.conj(), v2, v1.conj()]);
    let gh = g.adjoint();

    let rows = t.rows(k, 2).clone_owned();
    t.rows_mut(k, 2).copy_from(&(&gh * rows));
    let cols = t.columns(k, 2).clone_owned();
    t.columns_mut(k, 2).copy_from(&(cols * &g));
    let qc = q.columns(k, 2).clone_owned();
    q.columns_mut(k, 2).copy_from(&(qc * &g));

    t[(k + 1, k)] = Complex::new(0.0, 0.0);
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
}

/// Real orthonormal basis of the invariant subspace of `a` associated with
/// the eigenvalues accepted by `select`.
///
/// `select` must be closed under complex conjugation (a test on the real part
/// always is) so that the subspace is real.
pub fn invariant_subspace<F>(a: &Matrix, select: F) -> Result<Matrix>
where
    F: Fn(Complex64) -> bool,
{
    let n = a.nrows();
    let (mut q, mut t) = complex_schur(a)?;
    let mut count = 0;
    for i in 0..n {
        if select(t[(i, i)]) {
            let mut j = i;
            while j > count {
                swap_adjacent(&mut q, &mut t, j - 1);
                j -= 1;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Ok(Matrix::zeros(n, 0));
    }
    if count == n {
        return Ok(Matrix::identity(n, n));
    }
    let z = q.columns(0, count);
    let mut w = Matrix::zeros(n, 2 * count);
    for j in 0..count {
        for i in 0..n {
            w[(i, j)] = z[(i, j)].re;
            w[(i, count + j)] = z[(i, j)].im;
        }
    }
    // singular values come out descending, so the leading columns span Re/Im
    let (u, _, _) = super::thin_svd(&w);
    Ok(u.columns(0, count).into_owned())
}
