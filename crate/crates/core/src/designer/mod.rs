//! Existence checks, gain synthesis and certification of distributed
//! unknown-input observers.
//!
//! Node `i` runs
//!
//! ```text
//! z_i' = N_i z_i + M_i B_i u_i + L_i y_i + chi r_i P_i^{-1} sum_j a_ij (xhat_j - xhat_i)
//! xhat_i = z_i + H_i y_i
//! ```
//!
//! with `r_i = 1` on undirected graphs. The error `e_i = x - xhat_i` is
//! independent of the node's unknown inputs when `(I - H_i C_i) B_bar_i = 0`,
//! `M_i = I - H_i C_i`, `N_i = M_i A - K_i C_i` and `L_i = K_i + N_i H_i`.

mod certificate;
mod conditions;
mod synthesis;
mod verify;

pub use certificate::{
    certify_design, chi_bound, closed_loop_lambda, compute_chi, compute_decay_rate, compute_lambda,
    schur_block_matrix, verify_lmi, DesignCertificate,
};
pub use conditions::{
    check_extensive_joint_detectability, check_rank_condition, compute_huv, JointDetectability,
};
pub use synthesis::{design_gains, DesignOptions};
pub use verify::{
    reconcile_design, recover_k, recover_y, verify_existing_design, NodeResiduals, SuppliedDesign,
    SuppliedNode, VerificationReport,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{DuioError, Result};
use crate::graph::{
    algebraic_connectivity, connectivity_floor, perron_weights, PerronWeighting, SwitchingSchedule,
    Topology,
};
use crate::linalg::{kron, Matrix};

/// Which consensus regime a design is certified for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingMode {
    Undirected,
    Switching,
    Directed,
}

impl CouplingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CouplingMode::Undirected => "undirected",
            CouplingMode::Switching => "switching",
            CouplingMode::Directed => "directed",
        }
    }
}

impl fmt::Display for CouplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CouplingMode {
    type Err = DuioError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "undirected" | "fixed_undirected" => Ok(CouplingMode::Undirected),
            "switching" => Ok(CouplingMode::Switching),
            "directed" => Ok(CouplingMode::Directed),
            other => Err(DuioError::InvalidArgument(format!(
                "unknown coupling mode '{other}' (expected undirected, switching or directed)"
            ))),
        }
    }
}

/// Per-node observer gains.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGains {
    pub h: Matrix,
    pub m: Matrix,
    pub n: Matrix,
    pub l: Matrix,
    pub k: Matrix,
    pub p: Matrix,
    pub y: Matrix,
    pub u: Matrix,
    pub v: Matrix,
}

/// A complete observer network design.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverDesign {
    pub nodes: Vec<NodeGains>,
    pub chi: f64,
    pub mode: CouplingMode,
}

impl ObserverDesign {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Largest eigenvalue over all `P_i`.
    pub fn max_p_eigenvalue(&self) -> f64 {
        self.nodes
            .iter()
            .map(|g| {
                *crate::linalg::symmetric_eigenvalues(&g.p)
                    .last()
                    .unwrap_or(&0.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Graph quantity entering the coupling-gain bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Connectivity {
    /// Algebraic connectivity of a fixed undirected graph.
    Undirected { lambda2: f64 },
    /// Node-count floor valid for every connected graph in a switching set.
    Switching { floor: f64 },
    /// Algebraic connectivity of the Perron-weighted Laplacian `L_hat`.
    Directed { lambda2_hat: f64 },
}

impl Connectivity {
    pub fn mode(&self) -> CouplingMode {
        match self {
            Connectivity::Undirected { .. } => CouplingMode::Undirected,
            Connectivity::Switching { .. } => CouplingMode::Switching,
            Connectivity::Directed { .. } => CouplingMode::Directed,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Connectivity::Undirected { lambda2 } => lambda2,
            Connectivity::Switching { floor } => floor,
            Connectivity::Directed { lambda2_hat } => lambda2_hat,
        }
    }

    /// Divisor applied to the norm in the coupling-gain bound.
    ///
    /// On undirected graphs the error derivative carries `2 chi (L (x) I)`;
    /// with Perron weights it carries `chi (L_hat (x) I)` where `L_hat`
    /// already contains both halves, so no factor 2 appears there.
    pub fn bound_denominator(&self) -> f64 {
        match *self {
            Connectivity::Undirected { lambda2 } => 2.0 * lambda2,
            Connectivity::Switching { floor } => 2.0 * floor,
            Connectivity::Directed { lambda2_hat } => lambda2_hat,
        }
    }
}

/// Communication structure the observers run on.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingGraph {
    Undirected(Topology),
    Switching(SwitchingSchedule),
    Directed {
        topology: Topology,
        weights: PerronWeighting,
    },
}

impl CouplingGraph {
    pub fn undirected(t: Topology) -> Result<Self> {
        if t.is_directed() {
            return Err(DuioError::ModeMismatch(
                "undirected mode needs an undirected graph".into(),
            ));
        }
        if !t.is_connected() {
            return Err(DuioError::RequiresConnectivity { index: 0 });
        }
        Ok(CouplingGraph::Undirected(t))
    }

    pub fn switching(s: SwitchingSchedule) -> Self {
        CouplingGraph::Switching(s)
    }

    /// Directed coupling; computes the Perron weights.
    pub fn directed(t: Topology) -> Result<Self> {
        if !t.is_directed() {
            return Err(DuioError::ModeMismatch(
                "directed mode needs a directed graph".into(),
            ));
        }
        let weights = perron_weights(&t)?;
        Ok(CouplingGraph::Directed {
            topology: t,
            weights,
        })
    }

    pub fn mode(&self) -> CouplingMode {
        match self {
            CouplingGraph::Undirected(_) => CouplingMode::Undirected,
            CouplingGraph::Switching(_) => CouplingMode::Switching,
            CouplingGraph::Directed { .. } => CouplingMode::Directed,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            CouplingGraph::Undirected(t) => t.node_count(),
            CouplingGraph::Switching(s) => s.node_count(),
            CouplingGraph::Directed { topology, .. } => topology.node_count(),
        }
    }

    /// The graph quantity for the coupling bound; `None` for a single node.
    pub fn connectivity(&self) -> Result<Option<Connectivity>> {
        if self.node_count() < 2 {
            return Ok(None);
        }
        let c = match self {
            CouplingGraph::Undirected(t) => Connectivity::Undirected {
                lambda2: algebraic_connectivity(&t.laplacian())?,
            },
            CouplingGraph::Switching(s) => Connectivity::Switching {
                floor: connectivity_floor(s.node_count())?,
            },
            CouplingGraph::Directed { weights, .. } => Connectivity::Directed {
                lambda2_hat: algebraic_connectivity(&weights.l_hat)?,
            },
        };
        Ok(Some(c))
    }

    /// Symmetric operators `S` such that the Lyapunov derivative is
    /// `e^T (Lambda - chi (S (x) I)) e` for some active topology.
    pub fn dissipation_operators(&self, n: usize) -> Vec<Matrix> {
        let eye = Matrix::identity(n, n);
        match self {
            CouplingGraph::Undirected(t) => vec![kron(&(t.laplacian() * 2.0), &eye)],
            CouplingGraph::Switching(s) => s
                .topologies()
                .iter()
                .map(|t| kron(&(t.laplacian() * 2.0), &eye))
                .collect(),
            CouplingGraph::Directed { weights, .. } => vec![kron(&weights.l_hat, &eye)],
        }
    }

    /// Per-node weights `r_i` (all ones unless directed).
    pub fn node_weights(&self) -> Vec<f64> {
        match self {
            CouplingGraph::Directed { weights, .. } => weights.r.iter().copied().collect(),
            _ => vec![1.0; self.node_count()],
        }
    }
}
