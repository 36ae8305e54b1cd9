//! Unobservable, undetectable and spectral subspaces.

#[cfg(test)]
use super::numerical_rank;
use super::{invariant_subspace, null_space, spectral_norm, Matrix, Tolerances};
use crate::error::{DuioError, Result};

/// Directions whose distance to every subspace is below this many radians
/// (in sine) count as lying in the intersection.
pub const INTERSECTION_TOL: f64 = 1e-8;

/// A linear subspace of `R^n` given by an orthonormal basis.
///
/// Zero columns encode the trivial subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    basis: Matrix,
}

impl SubspaceBasis {
    /// Wrap columns that are already orthonormal.
    pub fn from_orthonormal(basis: Matrix) -> Self {
        SubspaceBasis {
            ambient_dim: basis.nrows(),
            basis,
        }
    }

    /// Orthonormalize the column span of `m`.
    pub fn span_of(m: &Matrix, eps: f64) -> Self {
        let thr = spectral_norm(m) * m.nrows().max(m.ncols()).max(1) as f64 * eps;
        SubspaceBasis::from_orthonormal(super::range_basis(m, thr))
    }

    pub fn trivial(n: usize) -> Self {
        SubspaceBasis::from_orthonormal(Matrix::zeros(n, 0))
    }

    pub fn full(n: usize) -> Self {
        SubspaceBasis::from_orthonormal(Matrix::identity(n, n))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn into_basis(self) -> Matrix {
        self.basis
    }

    /// Orthogonal projector `V V^T`.
    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> SubspaceBasis {
        if self.is_trivial() {
            return SubspaceBasis::full(self.ambient_dim);
        }
        SubspaceBasis::from_orthonormal(null_space(&self.basis.transpose(), 0.5))
    }

    /// Sines of the principal angles between `self` and `other`, ascending.
    ///
    /// Computed from `(I - P_other) V_self` so that tiny angles keep full
    /// relative accuracy. Only meaningful for `dim(self) <= dim(other)`.
    pub fn principal_sines(&self, other: &SubspaceBasis) -> Vec<f64> {
        if self.is_trivial() {
            return Vec::new();
        }
        let resid = &self.basis - other.projector() * &self.basis;
        let mut s: Vec<f64> = super::singular_values(&resid)
            .iter()
            .map(|v| v.min(1.0))
            .collect();
        s.sort_by(|a, b| a.total_cmp(b));
        s
    }

    /// Largest principal angle in radians; `PI / 2` when dimensions differ.
    pub fn max_angle_to(&self, other: &SubspaceBasis) -> f64 {
        if self.dim() != other.dim() || self.ambient_dim != other.ambient_dim {
            return std::f64::consts::FRAC_PI_2;
        }
        self.principal_sines(other).last().map_or(0.0, |s| s.asin())
    }

    /// True when `v` lies in the subspace up to relative distance `tol`.
    pub fn contains(&self, v: &super::Vector, tol: f64) -> bool {
        let r = v - self.projector() * v;
        r.norm() <= tol * v.norm().max(f64::MIN_POSITIVE)
    }
}

/// Stable and unstable invariant subspaces of a square matrix.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    /// Eigenvalues with `Re s < -boundary_tol`.
    pub stable: SubspaceBasis,
    /// Eigenvalues with `Re s >= -boundary_tol`.
    pub unstable: SubspaceBasis,
}

/// Block-triangular coordinates separating the undetectable subspace.
///
/// With `T = [T_d T_u]` orthogonal, `T^T A_bar T = [[A_dd, 0], [A_rd, A_uu]]`
/// and `C T = [C_d, 0]`.
#[derive(Debug, Clone)]
pub struct DetectabilityDecomposition {
    pub t_d: Matrix,
    pub t_u: Matrix,
    pub a_dd: Matrix,
    pub a_rd: Matrix,
    pub a_uu: Matrix,
    pub c_d: Matrix,
    /// Dimension of the undetectable part.
    pub v: usize,
}

fn check_pair(c: &Matrix, a: &Matrix) -> Result<()> {
    if !a.is_square() || c.ncols() != a.nrows() {
        return Err(DuioError::DimensionMismatch(format!(
            "pair needs C: p x n and A: n x n, got {:?} and {:?}",
            c.shape(),
            a.shape()
        )));
    }
    Ok(())
}

/// Orthonormal basis of the unobservable subspace of `(C, A)`.
///
/// Uses the staircase recursion `V <- {x in V : A x in V}` started from
/// `Ker C`, which avoids forming high powers of `A`.
pub fn unobservable_subspace(c: &Matrix, a: &Matrix, tol: &Tolerances) -> Result<SubspaceBasis> {
    check_pair(c, a)?;
    let n = a.nrows();
    let c_thr = spectral_norm(c) * c.nrows().max(n).max(1) as f64 * tol.rank_eps;
    let mut v = null_space(c, c_thr);
    let a_thr = spectral_norm(a) * n.max(1) as f64 * tol.rank_eps;
    loop {
        let r = v.ncols();
        if r == 0 {
            break;
        }
        let av = a * &v;
        let leak = &av - &v * (v.transpose() * &av);
        let keep = null_space(&leak, a_thr);
        if keep.ncols() == r {
            break;
        }
        v = super::range_basis(&(&v * keep), 0.5);
    }
    Ok(SubspaceBasis::from_orthonormal(v))
}

/// Stable/unstable split of `a` at `Re s = -boundary_tol`.
pub fn spectral_split(a: &Matrix, boundary_tol: f64) -> Result<SpectralSplit> {
    let unstable = invariant_subspace(a, |s| s.re >= -boundary_tol)?;
    let stable = invariant_subspace(a, |s| s.re < -boundary_tol)?;
    Ok(SpectralSplit {
        stable: SubspaceBasis::from_orthonormal(stable),
        unstable: SubspaceBasis::from_orthonormal(unstable),
    })
}

/// Unobservable modes of `(C, A)` with `Re s >= -sigma`.
///
/// The unobservable subspace is `A`-invariant, so the split is done on the
/// restriction of `A` to it.
pub fn slow_unobservable_subspace(
    c: &Matrix,
    a: &Matrix,
    sigma: f64,
    tol: &Tolerances,
) -> Result<SubspaceBasis> {
    let uo = unobservable_subspace(c, a, tol)?;
    if uo.is_trivial() {
        return Ok(uo);
    }
    let v = uo.basis();
    let restricted = v.transpose() * a * v;
    let w = invariant_subspace(&restricted, |s| s.re >= -sigma)?;
    Ok(SubspaceBasis::from_orthonormal(v * w))
}

/// Orthonormal basis of the undetectable subspace of `(C, A)`: unobservable
/// modes in the closed right half-plane (with `boundary_tol` slack).
pub fn undetectable_subspace(c: &Matrix, a: &Matrix, tol: &Tolerances) -> Result<SubspaceBasis> {
    slow_unobservable_subspace(c, a, tol.boundary_tol, tol)
}

/// Intersection of subspaces sharing an ambient dimension.
///
/// Computed as the null space of the stacked complement projectors
/// `I - V_i V_i^T`. An empty list gives the full space of dimension
/// `ambient_dim`.
pub fn subspace_intersection(bases: &[SubspaceBasis], ambient_dim: usize) -> Result<SubspaceBasis> {
    if let Some(b) = bases.iter().find(|b| b.ambient_dim() != ambient_dim) {
        return Err(DuioError::DimensionMismatch(format!(
            "subspace of ambient dimension {} in an intersection over R^{}",
            b.ambient_dim(),
            ambient_dim
        )));
    }
    if bases.is_empty() {
        return Ok(SubspaceBasis::full(ambient_dim));
    }
    if bases.iter().any(|b| b.is_trivial()) {
        return Ok(SubspaceBasis::trivial(ambient_dim));
    }
    let n = ambient_dim;
    let mut stacked = Matrix::zeros(n * bases.len(), n);
    for (k, b) in bases.iter().enumerate() {
        let comp = Matrix::identity(n, n) - b.projector();
        stacked.view_mut((k * n, 0), (n, n)).copy_from(&comp);
    }
    Ok(SubspaceBasis::from_orthonormal(null_space(
        &stacked,
        INTERSECTION_TOL,
    )))
}

fn decomposition_from(c: &Matrix, a_bar: &Matrix, t_u: Matrix) -> DetectabilityDecomposition {
    let n = a_bar.nrows();
    let v = t_u.ncols();
    let t_d = if v == 0 {
        Matrix::identity(n, n)
    } else {
        SubspaceBasis::from_orthonormal(t_u.clone())
            .complement()
            .into_basis()
    };
    DetectabilityDecomposition {
        a_dd: t_d.transpose() * a_bar * &t_d,
        a_rd: t_u.transpose() * a_bar * &t_d,
        a_uu: t_u.transpose() * a_bar * &t_u,
        c_d: c * &t_d,
        t_d,
        t_u,
        v,
    }
}

/// Split off the undetectable subspace of `(C, A_bar)`.
pub fn detectability_decomposition(
    c: &Matrix,
    a_bar: &Matrix,
    tol: &Tolerances,
) -> Result<DetectabilityDecomposition> {
    let t_u = undetectable_subspace(c, a_bar, tol)?.into_basis();
    Ok(decomposition_from(c, a_bar, t_u))
}

/// Like [`detectability_decomposition`] but moves every unobservable mode
/// with `Re s >= -sigma` into the `T_u` block, leaving the injection to
/// handle only modes it can reach.
pub fn detectability_decomposition_shifted(
    c: &Matrix,
    a_bar: &Matrix,
    sigma: f64,
    tol: &Tolerances,
) -> Result<DetectabilityDecomposition> {
    let t_u = slow_unobservable_subspace(c, a_bar, sigma, tol)?.into_basis();
    Ok(decomposition_from(c, a_bar, t_u))
}

/// Rank of the stacked observability matrix; test oracle for the staircase.
#[cfg(test)]
pub(crate) fn observability_rank(c: &Matrix, a: &Matrix, eps: f64) -> usize {
    let n = a.nrows();
    let p = c.nrows();
    let mut obs = Matrix::zeros(p * n, n);
    let mut blk = c.clone();
    for k in 0..n {
        obs.view_mut((k * p, 0), (p, n)).copy_from(&blk);
        blk = &blk * a;
    }
    numerical_rank(&obs, eps)
}
