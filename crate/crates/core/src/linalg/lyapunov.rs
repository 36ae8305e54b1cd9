//! Continuous Lyapunov equation `G^T P + P G = -Q` by Bartels-Stewart.

use nalgebra::Complex;

use super::{asymmetry, spectral_norm, symmetric_eigenvalues, symmetrize, Matrix};
use crate::error::{DuioError, Result};

/// Solve `G^T P + P G = -Q` for symmetric `P`.
///
/// `G` must be Hurwitz and `Q` symmetric positive semidefinite; the result is
/// then positive (semi)definite. Fails with `lyapunov_unstable` when `G` has an
/// eigenvalue with non-negative real part.
pub fn solve_lyapunov(g: &Matrix, q: &Matrix) -> Result<Matrix> {
    let n = g.nrows();
    if !g.is_square() || q.shape() != (n, n) {
        return Err(DuioError::DimensionMismatch(format!(
            "Lyapunov equation needs square G and matching Q, got {:?} and {:?}",
            g.shape(),
            q.shape()
        )));
    }
    let qn = q.norm().max(f64::MIN_POSITIVE);
    if asymmetry(q) > 1e-10 * qn {
        return Err(DuioError::InvalidArgument(
            "Lyapunov right-hand side must be symmetric".into(),
        ));
    }
    if let Some(&lo) = symmetric_eigenvalues(q).first() {
        if lo < -1e-10 * qn {
            return Err(DuioError::InvalidArgument(format!(
                "Lyapunov right-hand side must be positive semidefinite, smallest eigenvalue {lo:.3e}"
            )));
        }
    }
    let abscissa = super::spectral_abscissa(g)?;
    if abscissa >= 0.0 {
        return Err(DuioError::LyapunovUnstable { abscissa });
    }
    solve_lyapunov_unchecked(g, q)
}

/// Bartels-Stewart core without the stability and sign checks.
///
/// Still reports a numerically singular separation `|conj(s_i) + s_j|`.
pub(crate) fn solve_lyapunov_unchecked(g: &Matrix, q: &Matrix) -> Result<Matrix> {
    let n = g.nrows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let (u, t) = super::schur::complex_schur(g)?;
    let qc = q.map(|v| Complex::new(v, 0.0));
    let qt = u.adjoint() * qc * &u;

    let scale = spectral_norm(g).max(1.0);
    let mut x = nalgebra::DMatrix::<Complex<f64>>::zeros(n, n);
    let mut min_sep = f64::INFINITY;
    for j in 0..n {
        for i in 0..n {
            let mut rhs = -qt[(i, j)];
            for k in 0..i {
                rhs -= t[(k, i)].conj() * x[(k, j)];
            }
            for k in 0..j {
                rhs -= x[(i, k)] * t[(k, j)];
            }
            let d = t[(i, i)].conj() + t[(j, j)];
            min_sep = min_sep.min(d.norm());
            if d.norm() <= 1e-14 * scale {
                return Err(DuioError::LyapunovIllConditioned {
                    separation: d.norm(),
                });
            }
            x[(i, j)] = rhs / d;
        }
    }
    let p = (&u * x * u.adjoint()).map(|z| z.re);
    log::trace!("lyapunov solve n={n} separation={min_sep:.3e}");
    Ok(symmetrize(&p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use proptest::prelude::*;

    /// Kronecker-form oracle: (I (x) G^T + G^T (x) I) vec(P) = -vec(Q).
    fn kron_oracle(g: &Matrix, q: &Matrix) -> Matrix {
        let n = g.nrows();
        let i = Matrix::identity(n, n);
        let op = kron(&i, &g.transpose()) + kron(&g.transpose(), &i);
        let rhs = -nalgebra::DVector::from_column_slice(q.as_slice());
        let sol = op.lu().solve(&rhs).expect("nonsingular");
        Matrix::from_column_slice(n, n, sol.as_slice())
    }

    #[test]
    fn scalar_case_replicated() {
        let n = 5;
        let p = solve_lyapunov(&(-Matrix::identity(n, n)), &Matrix::identity(n, n)).unwrap();
        assert!((p - Matrix::identity(n, n) * 0.5).norm() < 1e-14);
    }

    #[test]
    fn two_by_two_hand_solution() {
        // -2p11 = -1; p11 - 3p12 = 0; 2p12 - 4p22 = -1
        let g = Matrix::from_row_slice(2, 2, &[-1., 1., 0., -2.]);
        let p = solve_lyapunov(&g, &Matrix::identity(2, 2)).unwrap();
        let p11 = 0.5;
        let p12 = p11 / 3.0;
        let p22 = (1.0 + 2.0 * p12) / 4.0;
        let expect = Matrix::from_row_slice(2, 2, &[p11, p12, p12, p22]);
        assert!((p - expect).norm() < 1e-14);
    }

    #[test]
    fn rejects_unstable_and_marginal() {
        let q = Matrix::identity(2, 2);
        let g = Matrix::from_row_slice(2, 2, &[1., 0., 0., -1.]);
        assert_eq!(
            solve_lyapunov(&g, &q).unwrap_err().code(),
            "lyapunov_unstable"
        );
        let g = Matrix::from_row_slice(2, 2, &[0., 1., -1., 0.]);
        assert_eq!(
            solve_lyapunov(&g, &q).unwrap_err().code(),
            "lyapunov_unstable"
        );
    }

    #[test]
    fn rejects_asymmetric_rhs() {
        let q = Matrix::from_row_slice(2, 2, &[1., 1., 0., 1.]);
        assert!(solve_lyapunov(&(-Matrix::identity(2, 2)), &q).is_err());
    }

    proptest! {
        #[test]
        fn matches_kronecker_oracle(seed in prop::collection::vec(-1.0f64..1.0, 36), shift in 0.5f64..3.0) {
            let n = 6;
            let raw = Matrix::from_column_slice(n, n, &seed);
            // push the spectrum left of -shift/2 by a diagonal shift
            let rho = raw.norm();
            let g = &raw - Matrix::identity(n, n) * (rho + shift);
            let b = Matrix::from_fn(n, n, |i, j| seed[(i * 7 + j) % 36]);
            let q = &b * b.transpose() + Matrix::identity(n, n);
            let p = solve_lyapunov(&g, &q).unwrap();
            let oracle = kron_oracle(&g, &q);
            prop_assert!((&p - &oracle).norm() <= 1e-9 * oracle.norm());
            prop_assert!((&p - p.transpose()).norm() <= 1e-12 * p.norm());
            let resid = g.transpose() * &p + &p * &g + &q;
            prop_assert!(resid.norm() <= 1e-9 * q.norm());
            prop_assert!(symmetric_eigenvalues(&p)[0] > 0.0);
        }
    }
}
