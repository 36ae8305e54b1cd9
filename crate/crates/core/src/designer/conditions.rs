//! Solvability of the decoupling equation and joint detectability.

use crate::error::{DuioError, Result};
use crate::linalg::{
    numerical_rank, pseudo_inverse_with, subspace_intersection, undetectable_subspace, Matrix,
    SubspaceBasis, Tolerances,
};
use crate::model::{NodeIO, SystemModel};

/// `rank(C_i B_bar_i) == rank(B_bar_i)`; vacuously true without unknown inputs.
pub fn check_rank_condition(node: &NodeIO, tol: &Tolerances) -> bool {
    if node.b_bar.ncols() == 0 {
        return true;
    }
    let cb = &node.c * &node.b_bar;
    numerical_rank(&cb, tol.rank_eps) == numerical_rank(&node.b_bar, tol.rank_eps)
}

/// General solution `H = U + Y V` of `(I - H C) B_bar = 0`.
///
/// Returns `(H, U, V)` with `U = B_bar (C B_bar)^+` and
/// `V = I - C B_bar (C B_bar)^+`. Fails with `unsolvable_decoupling` when the
/// rank condition does not hold. The error carries node index 0; callers
/// working on a whole model fill in the one-based node number.
pub fn compute_huv(
    node: &NodeIO,
    y: &Matrix,
    tol: &Tolerances,
) -> Result<(Matrix, Matrix, Matrix)> {
    let n = node.c.ncols();
    let p = node.c.nrows();
    if y.shape() != (n, p) {
        return Err(DuioError::DimensionMismatch(format!(
            "Y must be {n}x{p}, got {}x{}",
            y.nrows(),
            y.ncols()
        )));
    }
    if !check_rank_condition(node, tol) {
        let cb = &node.c * &node.b_bar;
        return Err(DuioError::UnsolvableDecoupling {
            node: 0,
            rank_cb: numerical_rank(&cb, tol.rank_eps),
            rank_b: numerical_rank(&node.b_bar, tol.rank_eps),
        });
    }
    let (u, v) = if node.b_bar.ncols() == 0 {
        (Matrix::zeros(n, p), Matrix::identity(p, p))
    } else {
        let cb = &node.c * &node.b_bar;
        let cb_pinv = pseudo_inverse_with(&cb, tol.rank_eps);
        let u = &node.b_bar * &cb_pinv;
        let v = Matrix::identity(p, p) - &cb * &cb_pinv;
        (u, v)
    };
    let h = &u + y * &v;
    Ok((h, u, v))
}

/// `compute_huv` for node `i` of a model, with the node index in errors.
pub(crate) fn node_huv(
    model: &SystemModel,
    i: usize,
    y: &Matrix,
    tol: &Tolerances,
) -> Result<(Matrix, Matrix, Matrix)> {
    compute_huv(&model.nodes[i], y, tol).map_err(|e| match e {
        DuioError::UnsolvableDecoupling {
            rank_cb, rank_b, ..
        } => DuioError::UnsolvableDecoupling {
            node: i,
            rank_cb,
            rank_b,
        },
        other => other,
    })
}

/// Outcome of the joint detectability test.
#[derive(Debug, Clone)]
pub struct JointDetectability {
    /// True when the per-node undetectable subspaces intersect trivially.
    pub holds: bool,
    /// Dimension of each node's undetectable subspace of `(C_i, A_i)`.
    pub node_dims: Vec<usize>,
    /// Basis of the common undetectable subspace (empty when `holds`).
    pub witness: SubspaceBasis,
}

/// Intersect the undetectable subspaces of `(C_i, (I - U_i C_i) A)` over all
/// nodes. Requires the rank condition at every node.
pub fn check_extensive_joint_detectability(
    model: &SystemModel,
    tol: &Tolerances,
) -> Result<JointDetectability> {
    let n = model.state_dim();
    let eye = Matrix::identity(n, n);
    let mut subspaces = Vec::with_capacity(model.node_count());
    for (i, node) in model.nodes.iter().enumerate() {
        let (_, u, _) = node_huv(model, i, &Matrix::zeros(n, node.output_dim()), tol)?;
        let a_i = (&eye - &u * &node.c) * &model.a;
        subspaces.push(undetectable_subspace(&node.c, &a_i, tol)?);
    }
    let node_dims = subspaces.iter().map(SubspaceBasis::dim).collect();
    let witness = subspace_intersection(&subspaces, n)?;
    Ok(JointDetectability {
        holds: witness.is_trivial(),
        node_dims,
        witness,
    })
}
