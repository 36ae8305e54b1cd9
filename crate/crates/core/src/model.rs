//! Plant model and per-node measurement/input partition.

use crate::error::{DuioError, Result};
use crate::linalg::{hstack, numerical_rank, Matrix, Tolerances};

/// What node `i` measures and which control inputs it knows.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeIO {
    /// Output map `y_i = C_i x`.
    pub c: Matrix,
    /// Zero-based columns of `B` whose inputs node `i` knows.
    pub known_columns: Vec<usize>,
    /// Known-input matrix `B_i` (selected columns of `B`).
    pub b_known: Matrix,
    /// Unknown control-input columns of `B`.
    pub b_unknown: Matrix,
    /// All locally unknown inputs: `[b_unknown, D]`.
    pub b_bar: Matrix,
}

impl NodeIO {
    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }
}

/// Linear plant `x' = A x + B u + D w` observed by a network of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub a: Matrix,
    pub b: Matrix,
    pub d: Matrix,
    pub nodes: Vec<NodeIO>,
}

impl SystemModel {
    /// Build a model from per-node output maps and known-input column lists.
    ///
    /// Every node's unknown-input matrix `[B_unknown, D]` must have full
    /// column rank.
    pub fn from_partition(
        a: Matrix,
        b: Matrix,
        d: Matrix,
        outputs: Vec<(Matrix, Vec<usize>)>,
    ) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() {
            return Err(DuioError::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if n == 0 {
            return Err(DuioError::InvalidArgument(
                "state dimension must be positive".into(),
            ));
        }
        if b.nrows() != n {
            return Err(DuioError::DimensionMismatch(format!(
                "B has {} rows, expected {n}",
                b.nrows()
            )));
        }
        if d.nrows() != n {
            return Err(DuioError::DimensionMismatch(format!(
                "D has {} rows, expected {n}",
                d.nrows()
            )));
        }
        if outputs.is_empty() {
            return Err(DuioError::InvalidArgument(
                "model needs at least one node".into(),
            ));
        }
        for (name, m) in [("A", &a), ("B", &b), ("D", &d)] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(DuioError::InvalidArgument(format!(
                    "{name} has non-finite entries"
                )));
            }
        }
        let tol = Tolerances::default();
        let m = b.ncols();
        let mut nodes = Vec::with_capacity(outputs.len());
        for (i, (c, mut known)) in outputs.into_iter().enumerate() {
            if c.ncols() != n {
                return Err(DuioError::DimensionMismatch(format!(
                    "C of node {} has {} columns, expected {n}",
                    i,
                    c.ncols()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(DuioError::InvalidArgument(format!(
                    "C of node {} has non-finite entries",
                    i
                )));
            }
            known.sort_unstable();
            known.dedup();
            if let Some(&bad) = known.iter().find(|&&j| j >= m) {
                return Err(DuioError::InvalidArgument(format!(
                    "node {} lists known input column {} but B has {m} columns",
                    i,
                    bad + 1
                )));
            }
            let unknown: Vec<usize> = (0..m).filter(|j| !known.contains(j)).collect();
            let b_known = b.select_columns(known.iter());
            let b_unknown = b.select_columns(unknown.iter());
            let b_bar = hstack(&[&b_unknown, &d]);
            if b_bar.ncols() > 0 && numerical_rank(&b_bar, tol.rank_eps) < b_bar.ncols() {
                return Err(DuioError::InvalidArgument(format!(
                    "unknown-input matrix [B_unknown D] of node {} is not full column rank",
                    i
                )));
            }
            nodes.push(NodeIO {
                c,
                known_columns: known,
                b_known,
                b_unknown,
                b_bar,
            });
        }
        Ok(SystemModel { a, b, d, nodes })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn disturbance_dim(&self) -> usize {
        self.d.ncols()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}
