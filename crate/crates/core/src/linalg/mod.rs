//! Dense linear-algebra kernel for observer design.
//!
//! Everything here works on `f64` [`Matrix`] values and is a pure function of
//! its inputs. Rank decisions follow one rule: a singular value counts as
//! zero when it is at most `scale * dim * rank_eps`, where `scale` is the
//! largest singular value (or the norm of the operator a subspace iteration
//! works with).

mod injection;
mod lyapunov;
mod schur;
mod subspace;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{DuioError, Result};

pub use injection::{is_detectable, stabilizing_output_injection};
pub use lyapunov::solve_lyapunov;
pub(crate) use lyapunov::solve_lyapunov_unchecked;
pub use schur::{eigenvalues, invariant_subspace};
pub use subspace::{
    detectability_decomposition, detectability_decomposition_shifted, slow_unobservable_subspace,
    spectral_split, subspace_intersection, undetectable_subspace, unobservable_subspace,
    DetectabilityDecomposition, SpectralSplit, SubspaceBasis,
};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type Complex64 = Complex<f64>;

/// Numerical tolerances shared by the kernel and the designer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative singular-value threshold for rank decisions.
    pub rank_eps: f64,
    /// Eigenvalues with `Re s >= -boundary_tol` count as unstable.
    pub boundary_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_eps: 1e-10,
            boundary_tol: 1e-9,
        }
    }
}

// SVDs go through faer: nalgebra 0.35 returns wrong singular values and
// vectors for some exactly rank-deficient tall matrices whenever it
// accumulates singular vectors.

fn to_faer(m: &Matrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD `m = U diag(s) V^T`, `s` descending, `U` and `V` with
/// `min(rows, cols)` columns.
pub(crate) fn thin_svd(m: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return (
            Matrix::zeros(m.nrows(), 0),
            Vec::new(),
            Matrix::zeros(m.ncols(), 0),
        );
    }
    let svd = to_faer(m)
        .thin_svd()
        .expect("SVD converges for finite input");
    let s = svd.S().column_vector();
    (
        from_faer(svd.U()),
        (0..k).map(|i| s[i]).collect(),
        from_faer(svd.V()),
    )
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    to_faer(m)
        .singular_values()
        .expect("SVD converges for finite input")
}

/// Singular values of a complex matrix in descending order.
pub(crate) fn complex_singular_values(m: &DMatrix<Complex<f64>>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re, z.im)
    })
    .singular_values()
    .expect("SVD converges for finite input")
}

/// Singular values paired with a full set of right singular vectors; the
/// values are padded with zeros to one per column.
fn svd_right(m: &Matrix) -> (Vec<f64>, Matrix) {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return (Vec::new(), Matrix::zeros(0, 0));
    }
    if rows == 0 {
        return (vec![0.0; cols], Matrix::identity(cols, cols));
    }
    let svd = to_faer(m).svd().expect("SVD converges for finite input");
    let s = svd.S().column_vector();
    let mut sv = vec![0.0; cols];
    for (i, v) in sv.iter_mut().enumerate().take(rows.min(cols)) {
        *v = s[i];
    }
    (sv, from_faer(svd.V()))
}

/// Largest singular value (spectral norm).
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m)[0]
}

/// Default rank threshold for `m`: `sigma_max * max(rows, cols) * eps`.
pub fn rank_threshold(m: &Matrix, eps: f64) -> f64 {
    let dim = m.nrows().max(m.ncols()) as f64;
    spectral_norm(m) * dim * eps
}

/// Numerical rank of `m`.
pub fn numerical_rank(m: &Matrix, eps: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = singular_values(m);
    let thr = sv[0] * m.nrows().max(m.ncols()) as f64 * eps;
    sv.iter().filter(|&&s| s > thr && s > 0.0).count()
}

/// Orthonormal basis of `Ker m`, singular values `<= threshold` count as zero.
pub fn null_space(m: &Matrix, threshold: f64) -> Matrix {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return Matrix::identity(cols, cols);
    }
    let (sv, v) = svd_right(m);
    let keep: Vec<usize> = (0..cols).filter(|&j| sv[j] <= threshold).collect();
    v.select_columns(keep.iter())
}

/// Orthonormal basis of `Im m`.
pub fn range_basis(m: &Matrix, threshold: f64) -> Matrix {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return Matrix::zeros(rows, 0);
    }
    let (u, s, _) = thin_svd(m);
    let keep: Vec<usize> = (0..s.len()).filter(|&j| s[j] > threshold).collect();
    u.select_columns(keep.iter())
}

/// Moore-Penrose pseudo-inverse via SVD with the default rank rule.
pub fn pseudo_inverse(m: &Matrix) -> Matrix {
    pseudo_inverse_with(m, Tolerances::default().rank_eps)
}

/// Moore-Penrose pseudo-inverse with an explicit relative rank threshold.
pub fn pseudo_inverse_with(m: &Matrix, eps: f64) -> Matrix {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Matrix::zeros(cols, rows);
    }
    let (u, sv, v) = thin_svd(m);
    let smax = sv[0];
    if smax == 0.0 {
        return Matrix::zeros(cols, rows);
    }
    let thr = smax * rows.max(cols) as f64 * eps;
    let mut out = Matrix::zeros(cols, rows);
    for (k, &s) in sv.iter().enumerate() {
        if s > thr {
            out += (v.column(k) / s) * u.column(k).transpose();
        }
    }
    out
}

/// `(S + S^T) / 2`.
pub fn symmetrize(s: &Matrix) -> Matrix {
    (s + s.transpose()) * 0.5
}

/// Frobenius-norm asymmetry `||S - S^T||`.
pub fn asymmetry(s: &Matrix) -> f64 {
    (s - s.transpose()).norm()
}

/// Eigenvalues of a symmetric matrix in ascending order (input is symmetrized).
pub fn symmetric_eigenvalues(s: &Matrix) -> Vec<f64> {
    if s.is_empty() {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(s))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Largest real part over the spectrum of `m`.
pub fn spectral_abscissa(m: &Matrix) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(eigenvalues(m)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// True iff every eigenvalue of `m` satisfies `Re s < -margin`.
pub fn is_hurwitz(m: &Matrix, margin: f64) -> Result<bool> {
    if !m.is_square() {
        return Err(DuioError::DimensionMismatch(format!(
            "is_hurwitz needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(spectral_abscissa(m)? < -margin)
}

/// True iff the largest eigenvalue of `(S + S^T)/2` is below `-tol`.
pub fn is_negative_definite(s: &Matrix, tol: f64) -> bool {
    if s.nrows() == 0 || !s.is_square() {
        return false;
    }
    let scale = s.norm().max(1.0);
    if asymmetry(s) > 1e-8 * scale {
        log::warn!(
            "definiteness test on a matrix with asymmetry {:.3e}",
            asymmetry(s)
        );
    }
    symmetric_eigenvalues(s).last().is_some_and(|&l| l < -tol)
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Block-diagonal matrix from square or rectangular blocks.
pub fn block_diag(blocks: &[Matrix]) -> Matrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Horizontal concatenation; all blocks must share the row count.
pub fn hstack(blocks: &[&Matrix]) -> Matrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, c), b.shape()).copy_from(b);
        c += b.ncols();
    }
    out
}

/// Vertical concatenation; all blocks must share the column count.
pub fn vstack(blocks: &[&Matrix]) -> Matrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((r, 0), b.shape()).copy_from(b);
        r += b.nrows();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, data: &[f64]) -> Matrix {
        Matrix::from_row_slice(rows, cols, data)
    }

    #[test]
    fn pinv_identity_and_orthonormal_rows() {
        let i3 = Matrix::identity(3, 3);
        assert!((pseudo_inverse(&i3) - &i3).norm() < 1e-15);
        let rows = m(2, 3, &[1., 0., 0., 0., 1., 0.]);
        assert!((pseudo_inverse(&rows) - rows.transpose()).norm() < 1e-15);
    }

    #[test]
    fn pinv_of_zero_and_empty() {
        let z = Matrix::zeros(2, 3);
        assert_eq!(pseudo_inverse(&z), Matrix::zeros(3, 2));
        let e = Matrix::zeros(4, 0);
        assert_eq!(pseudo_inverse(&e).shape(), (0, 4));
    }

    #[test]
    fn pinv_rank_deficient_penrose() {
        let a = m(3, 3, &[1., 2., 3., 2., 4., 6., 1., 0., 1.]);
        let p = pseudo_inverse(&a);
        assert!((&a * &p * &a - &a).norm() < 1e-12);
        assert!((&p * &a * &p - &p).norm() < 1e-12);
        assert_eq!(numerical_rank(&a, 1e-10), 2);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = m(1, 3, &[1., 1., 0.]);
        let n = null_space(&a, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!((&a * &n).norm() < 1e-14);
        assert!((n.transpose() * &n - Matrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn hurwitz_checks() {
        assert!(is_hurwitz(&(-Matrix::identity(4, 4)), 0.0).unwrap());
        assert!(!is_hurwitz(&Matrix::zeros(3, 3), 0.0).unwrap());
        assert!(is_hurwitz(&Matrix::zeros(2, 3), 0.0).is_err());
    }

    #[test]
    fn negative_definite_checks() {
        assert!(is_negative_definite(&(-Matrix::identity(6, 6)), 0.0));
        let semi = Matrix::from_diagonal(&Vector::from_vec(vec![-1.0, 0.0]));
        assert!(!is_negative_definite(&semi, 0.0));
        // only the symmetric part matters
        let skew = m(2, 2, &[-1., 5., -5., -1.]);
        assert!(is_negative_definite(&skew, 0.0));
    }

    #[test]
    fn stacking_helpers() {
        let a = Matrix::identity(2, 2);
        let b = Matrix::from_element(1, 1, 3.0);
        let d = block_diag(&[a.clone(), b]);
        assert_eq!(d.shape(), (3, 3));
        assert_eq!(d[(2, 2)], 3.0);
        assert_eq!(hstack(&[&a, &a]).shape(), (2, 4));
        assert_eq!(vstack(&[&a, &a]).shape(), (4, 2));
    }
}
