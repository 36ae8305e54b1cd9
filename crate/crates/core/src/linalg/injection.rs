//! Output-injection gains that place the observer spectrum left of a margin.

use nalgebra::{Complex, DMatrix};

use super::{
    eigenvalues, solve_lyapunov_unchecked, spectral_abscissa, spectral_norm, unobservable_subspace,
    Matrix, Tolerances,
};
use crate::error::{DuioError, Result};

const MAX_NEWTON_STEPS: usize = 60;
const PBH_EPS: f64 = 1e-8;

/// PBH test: `rank [s I - A; C] = n` for every eigenvalue with
/// `Re s >= -boundary_tol`.
pub fn is_detectable(c: &Matrix, a: &Matrix, tol: &Tolerances) -> Result<bool> {
    let n = a.nrows();
    if !a.is_square() || c.ncols() != n {
        return Err(DuioError::DimensionMismatch(format!(
            "pair needs C: p x n and A: n x n, got {:?} and {:?}",
            c.shape(),
            a.shape()
        )));
    }
    let scale = spectral_norm(a).max(spectral_norm(c)).max(1.0);
    for s in eigenvalues(a)? {
        if s.re < -tol.boundary_tol {
            continue;
        }
        let mut pencil = DMatrix::<Complex<f64>>::zeros(n + c.nrows(), n);
        for i in 0..n {
            for j in 0..n {
                let d = if i == j { s } else { Complex::new(0.0, 0.0) };
                pencil[(i, j)] = d - Complex::new(a[(i, j)], 0.0);
            }
        }
        for i in 0..c.nrows() {
            for j in 0..n {
                pencil[(n + i, j)] = Complex::new(c[(i, j)], 0.0);
            }
        }
        // the eigenvalue carries rounding error, so the plain rank rule is too strict
        let thr = scale * (n as f64) * PBH_EPS;
        let sv = super::complex_singular_values(&pencil);
        if sv.iter().filter(|&&v| v > thr).count() < n {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Gain `K` with every eigenvalue of `A - K C` satisfying `Re s < -margin`.
///
/// The observable part is handled by a Bass shifted-Lyapunov gain refined
/// with Newton-Kleinman iterations on the dual Riccati equation of the
/// shifted pair, which keeps the gain moderate. Unobservable modes are left
/// untouched, so the request fails with `not_detectable` when one of them is
/// unstable and with `margin_unreachable` when one sits in `[-margin, 0)`.
pub fn stabilizing_output_injection(
    c: &Matrix,
    a: &Matrix,
    margin: f64,
    tol: &Tolerances,
) -> Result<Matrix> {
    let n = a.nrows();
    let p = c.nrows();
    if !a.is_square() || c.ncols() != n {
        return Err(DuioError::DimensionMismatch(format!(
            "pair needs C: p x n and A: n x n, got {:?} and {:?}",
            c.shape(),
            a.shape()
        )));
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(DuioError::InvalidArgument(format!(
            "injection margin must be finite and non-negative, got {margin}"
        )));
    }
    if n == 0 || spectral_abscissa(a)? < -margin {
        return Ok(Matrix::zeros(n, p));
    }

    let uo = unobservable_subspace(c, a, tol)?;
    let fixed = if uo.is_trivial() {
        f64::NEG_INFINITY
    } else {
        let v = uo.basis();
        spectral_abscissa(&(v.transpose() * a * v))?
    };
    if fixed >= -tol.boundary_tol {
        return Err(DuioError::NotDetectable { real_part: fixed });
    }
    if fixed >= -margin {
        return Err(DuioError::MarginUnreachable {
            requested: margin,
            achievable: -fixed,
        });
    }

    // observable coordinates: A T_o = T_o A_o + (unobservable part)
    let t_o = uo.complement().into_basis();
    let a_o = t_o.transpose() * a * &t_o;
    let c_o = c * &t_o;
    let k_o = observable_injection(&c_o, &a_o, margin)?;
    let k = &t_o * k_o;

    let achieved = spectral_abscissa(&(a - &k * c))?;
    if achieved >= -margin {
        return Err(DuioError::MarginUnreachable {
            requested: margin,
            achievable: -achieved,
        });
    }
    Ok(k)
}

fn observable_injection(c: &Matrix, a: &Matrix, margin: f64) -> Result<Matrix> {
    let n = a.nrows();
    let eye = Matrix::identity(n, n);
    let a_m = a + &eye * margin;
    let ctc = c.transpose() * c;

    // Bass: -(A_m + alpha I) Hurwitz, (A_m + alpha I)^T X + X (A_m + alpha I) = 2 C^T C,
    // K = X^{-1} C^T places the spectrum of A_m - K C left of -alpha.
    let min_re = eigenvalues(&a_m)?
        .iter()
        .map(|s| s.re)
        .fold(f64::INFINITY, f64::min);
    let alpha = (-min_re).max(0.0) + 1.0;
    let g = -(&a_m + &eye * alpha);
    let x = solve_lyapunov_unchecked(&g, &(&ctc * 2.0))?;
    let x_inv =
        x.clone().cholesky().map(|ch| ch.inverse()).ok_or_else(|| {
            DuioError::EigenSolverFailure("observability Gramian is singular".into())
        })?;
    let mut k = x_inv * c.transpose();

    // Newton-Kleinman on A_m X + X A_m^T - X C^T C X + I = 0 with K = X C^T.
    let mut prev = f64::INFINITY;
    for step in 0..MAX_NEWTON_STEPS {
        let closed = &a_m - &k * c;
        if spectral_abscissa(&closed)? >= 0.0 {
            break;
        }
        let rhs = &eye + &k * k.transpose();
        let x = solve_lyapunov_unchecked(&closed.transpose(), &rhs)?;
        let next = &x * c.transpose();
        let change = (&next - &k).norm() / next.norm().max(1.0);
        k = next;
        log::trace!("newton-kleinman step {step}: relative change {change:.3e}");
        if change < 1e-12 || (change >= prev && change < 1e-8) {
            break;
        }
        prev = change;
    }
    Ok(k)
}
