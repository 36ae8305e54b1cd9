//! Constructive gain synthesis.
//!
//! Each node's closed error matrix `N_i = (I - H_i C_i) A - K_i C_i` is split
//! by an orthogonal `T_i = [T_d T_u]` into a part the node can stabilize and a
//! part it cannot. `K_i = T_d K_d` stabilizes the first, and
//! `P_i = T_i diag(beta P_d, s I) T_i^T` weights it by `beta`. Since the
//! `beta` part of `sum Lambda_i` is negative semidefinite and the `T_d` blocks
//! jointly span the state space, a large enough `beta` makes the sum negative
//! definite.
//!
//! `T_u` holds the unobservable modes slower than `-decay_target` rather than
//! only the unstable ones. That keeps every node's local injection fast at the
//! price of leaving more to the coupling; it is used only when those slower
//! subspaces still intersect trivially, and falls back towards the exact
//! undetectable split otherwise.

use super::certificate::{compute_decay_rate, compute_lambda, DesignCertificate};
use super::conditions::{check_extensive_joint_detectability, node_huv};
use super::{chi_bound, CouplingGraph, NodeGains, ObserverDesign};
use crate::error::{DuioError, Result};
use crate::linalg::{
    detectability_decomposition_shifted, is_negative_definite, slow_unobservable_subspace,
    solve_lyapunov, stabilizing_output_injection, subspace_intersection, Matrix, Tolerances,
};
use crate::model::SystemModel;

/// Tuning of [`design_gains`].
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptions {
    /// Starting scale of the detectable Lyapunov blocks.
    pub beta0: f64,
    /// Doublings of `beta` allowed before giving up.
    pub max_doublings: u32,
    /// Extra factor applied to `beta` once `sum Lambda_i` is negative definite.
    pub beta_headroom: f64,
    /// Unobservable modes slower than `-decay_target` are left to the
    /// coupling; the local injection places its poles left of this value.
    pub decay_target: f64,
    /// Scale `s` of the undetectable Lyapunov blocks `P_iu = s I`.
    pub p_u_scale: f64,
    /// Coupling gain is the bound times this factor.
    pub chi_safety: f64,
    /// Per-node `Y_i`; missing entries default to zero.
    pub y_overrides: Vec<Option<Matrix>>,
    pub tol: Tolerances,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            beta0: 1.0,
            max_doublings: 30,
            beta_headroom: 256.0,
            decay_target: 10.0,
            p_u_scale: 1.0,
            chi_safety: 1.01,
            y_overrides: Vec::new(),
            tol: Tolerances::default(),
        }
    }
}

impl DesignOptions {
    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(DuioError::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("beta0", self.beta0)?;
        positive("p_u_scale", self.p_u_scale)?;
        if !(self.beta_headroom >= 1.0 && self.beta_headroom.is_finite()) {
            return Err(DuioError::InvalidArgument(format!(
                "beta_headroom must be at least 1, got {}",
                self.beta_headroom
            )));
        }
        if !(self.decay_target >= 0.0 && self.decay_target.is_finite()) {
            return Err(DuioError::InvalidArgument(format!(
                "decay_target must be non-negative, got {}",
                self.decay_target
            )));
        }
        Ok(())
    }
}

/// Per-node pieces that do not depend on `beta`.
struct NodePlan {
    h: Matrix,
    u: Matrix,
    v: Matrix,
    y: Matrix,
    k: Matrix,
    /// `T_d P_d T_d^T` for `beta = 1`.
    p_d: Matrix,
    /// `s T_u T_u^T`.
    p_u: Matrix,
    /// `(I - H C) A - K C`.
    n_closed: Matrix,
}

impl NodePlan {
    fn p(&self, beta: f64) -> Matrix {
        &self.p_d * beta + &self.p_u
    }
}

fn lambda_sum(plans: &[NodePlan], beta: f64) -> Matrix {
    let n = plans[0].p_d.nrows();
    plans.iter().fold(Matrix::zeros(n, n), |acc, pl| {
        let p = pl.p(beta);
        acc + pl.n_closed.transpose() * &p + &p * &pl.n_closed
    })
}

/// Largest shift `sigma <= target` for which the slow unobservable subspaces
/// of all nodes still intersect trivially.
fn choose_shift(
    model: &SystemModel,
    a_bars: &[Matrix],
    target: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let n = model.state_dim();
    let mut sigma = target;
    while sigma > tol.boundary_tol {
        let mut slow = Vec::with_capacity(a_bars.len());
        for (node, a_bar) in model.nodes.iter().zip(a_bars) {
            slow.push(slow_unobservable_subspace(&node.c, a_bar, sigma, tol)?);
        }
        if subspace_intersection(&slow, n)?.is_trivial() {
            return Ok(sigma);
        }
        log::debug!("slow unobservable subspaces overlap at shift {sigma}, halving");
        sigma *= 0.5;
    }
    Ok(tol.boundary_tol)
}

fn injection_with_fallback(
    c: &Matrix,
    a: &Matrix,
    margin: f64,
    tol: &Tolerances,
) -> Result<Matrix> {
    match stabilizing_output_injection(c, a, margin, tol) {
        Err(DuioError::MarginUnreachable { achievable, .. }) if achievable > tol.boundary_tol => {
            log::debug!(
                "injection margin {margin} unreachable, using {:.3e}",
                0.9 * achievable
            );
            stabilizing_output_injection(c, a, 0.9 * achievable, tol)
        }
        other => other,
    }
}

fn retryable(e: &DuioError) -> bool {
    matches!(
        e,
        DuioError::EigenSolverFailure(_)
            | DuioError::LmiScalingFailed { .. }
            | DuioError::MarginUnreachable { .. }
            | DuioError::LyapunovUnstable { .. }
            | DuioError::LyapunovIllConditioned { .. }
    )
}

type Huvy = (Matrix, Matrix, Matrix, Matrix);

/// Node plans for one shift and the scaled `beta` making `sum Lambda_i`
/// negative definite.
fn plan_at_shift(
    model: &SystemModel,
    huvy: Vec<Huvy>,
    a_bars: &[Matrix],
    sigma: f64,
    opts: &DesignOptions,
) -> Result<(Vec<NodePlan>, f64)> {
    let tol = &opts.tol;
    let n = model.state_dim();
    let mut plans = Vec::with_capacity(a_bars.len());
    for (((h, u, v, y), a_bar), node) in huvy.into_iter().zip(a_bars).zip(&model.nodes) {
        let dec = detectability_decomposition_shifted(&node.c, a_bar, sigma, tol)?;
        let nd = dec.t_d.ncols();
        let (k, p_d) = if nd == 0 {
            (Matrix::zeros(n, node.output_dim()), Matrix::zeros(n, n))
        } else {
            let k_d = injection_with_fallback(&dec.c_d, &dec.a_dd, sigma, tol)?;
            let gamma = &dec.a_dd - &k_d * &dec.c_d;
            let p1 = solve_lyapunov(&gamma, &Matrix::identity(nd, nd))?;
            (&dec.t_d * k_d, &dec.t_d * p1 * dec.t_d.transpose())
        };
        let p_u = &dec.t_u * dec.t_u.transpose() * opts.p_u_scale;
        let n_closed = a_bar - &k * &node.c;
        plans.push(NodePlan {
            h,
            u,
            v,
            y,
            k,
            p_d,
            p_u,
            n_closed,
        });
    }

    let mut beta = opts.beta0;
    for _ in 0..=opts.max_doublings {
        if is_negative_definite(&lambda_sum(&plans, beta), 0.0) {
            let scaled = beta * opts.beta_headroom;
            // rounding in P_d can make the sum indefinite again once scaled up
            if !is_negative_definite(&lambda_sum(&plans, scaled), 0.0) {
                return Err(DuioError::LmiScalingFailed { beta: scaled });
            }
            return Ok((plans, scaled));
        }
        beta *= 2.0;
    }
    Err(DuioError::LmiScalingFailed { beta: beta / 2.0 })
}

/// Gains at one shift with a certificate whose `sum Lambda_i` is negative
/// definite; `chi` is left at zero.
fn design_at_shift(
    model: &SystemModel,
    huvy: Vec<Huvy>,
    a_bars: &[Matrix],
    sigma: f64,
    opts: &DesignOptions,
    graph: &CouplingGraph,
) -> Result<(ObserverDesign, DesignCertificate)> {
    let (plans, beta) = plan_at_shift(model, huvy, a_bars, sigma, opts)?;
    let n = model.state_dim();
    let eye = Matrix::identity(n, n);
    let gains: Vec<NodeGains> = plans
        .iter()
        .zip(&model.nodes)
        .map(|(pl, node)| {
            let m = &eye - &pl.h * &node.c;
            let n_mat = &m * &model.a - &pl.k * &node.c;
            let l = &pl.k + &n_mat * &pl.h;
            NodeGains {
                h: pl.h.clone(),
                m,
                n: n_mat,
                l,
                k: pl.k.clone(),
                p: crate::linalg::symmetrize(&pl.p(beta)),
                y: pl.y.clone(),
                u: pl.u.clone(),
                v: pl.v.clone(),
            }
        })
        .collect();
    let design = ObserverDesign {
        nodes: gains,
        chi: 0.0,
        mode: graph.mode(),
    };
    let mut cert = DesignCertificate::from_lambdas(compute_lambda(&design, model)?);
    cert.beta = Some(beta);
    if !cert.lmi_ok {
        return Err(DuioError::LmiScalingFailed { beta });
    }
    Ok((design, cert))
}

/// Synthesize all gains and the coupling gain for `graph`.
///
/// Fails with `unsolvable_decoupling` or `not_jointly_detectable` before any
/// synthesis when an existence condition is violated.
pub fn design_gains(
    model: &SystemModel,
    graph: &CouplingGraph,
    opts: &DesignOptions,
) -> Result<(ObserverDesign, DesignCertificate)> {
    opts.validate()?;
    let n = model.state_dim();
    let nodes = model.node_count();
    if graph.node_count() != nodes {
        return Err(DuioError::DimensionMismatch(format!(
            "graph has {} nodes, model has {nodes}",
            graph.node_count()
        )));
    }
    if opts.y_overrides.len() > nodes {
        return Err(DuioError::DimensionMismatch(format!(
            "{} Y overrides for {nodes} nodes",
            opts.y_overrides.len()
        )));
    }
    let tol = &opts.tol;
    let joint = check_extensive_joint_detectability(model, tol)?;
    if !joint.holds {
        return Err(DuioError::NotJointlyDetectable {
            witness_dim: joint.witness.dim(),
        });
    }

    let eye = Matrix::identity(n, n);
    let mut huvy = Vec::with_capacity(nodes);
    let mut a_bars = Vec::with_capacity(nodes);
    for (i, node) in model.nodes.iter().enumerate() {
        let y = opts
            .y_overrides
            .get(i)
            .cloned()
            .flatten()
            .unwrap_or_else(|| Matrix::zeros(n, node.output_dim()));
        let (h, u, v) = node_huv(model, i, &y, tol)?;
        a_bars.push((&eye - &h * &node.c) * &model.a);
        huvy.push((h, u, v, y));
    }

    let mut sigma = choose_shift(model, &a_bars, opts.decay_target, tol)?;
    let (mut design, mut cert) = loop {
        log::info!("synthesis shift sigma = {sigma:.3e}");
        match design_at_shift(model, huvy.clone(), &a_bars, sigma, opts, graph) {
            Ok(found) => break found,
            // a fast target can demand gains too large to certify numerically;
            // a slower one keeps the same subspaces trivial and the gains moderate
            Err(e) if retryable(&e) && sigma > 2.0 * tol.boundary_tol => {
                log::debug!("synthesis at shift {sigma:.3e} failed ({e}), halving");
                sigma *= 0.5;
            }
            Err(e) => return Err(e),
        }
    };
    let connectivity = graph.connectivity()?;
    cert.connectivity = connectivity;
    cert.chi_bound = chi_bound(&cert, connectivity)?;
    design.chi = if connectivity.is_some() {
        super::compute_chi(&cert, connectivity, opts.chi_safety)?
    } else {
        0.0
    };
    let ps: Vec<Matrix> = design.nodes.iter().map(|g| g.p.clone()).collect();
    cert.mu = Some(compute_decay_rate(
        &cert.lambda,
        &ps,
        design.chi,
        &graph.dissipation_operators(n),
    )?);
    Ok((design, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Topology;

    #[test]
    fn scalar_sanity() {
        let model = SystemModel::from_partition(
            Matrix::from_element(1, 1, -1.0),
            Matrix::zeros(1, 0),
            Matrix::zeros(1, 0),
            vec![(Matrix::from_element(1, 1, 1.0), vec![])],
        )
        .unwrap();
        let graph = CouplingGraph::undirected(Topology::undirected(1, &[]).unwrap()).unwrap();
        let opts = DesignOptions {
            beta_headroom: 1.0,
            ..DesignOptions::default()
        };
        let (design, cert) = design_gains(&model, &graph, &opts).unwrap();
        assert_eq!(design.nodes[0].h, Matrix::zeros(1, 1));
        assert!(cert.lmi_ok);
        assert_eq!(cert.beta, Some(1.0));
        assert_eq!(design.chi, 0.0);
    }

    #[test]
    fn guard_rejects_undetectable_network() {
        let a = Matrix::from_row_slice(2, 2, &[-1., 0., 0., 1.]);
        let model = SystemModel::from_partition(
            a,
            Matrix::zeros(2, 0),
            Matrix::zeros(2, 0),
            vec![
                (Matrix::from_row_slice(1, 2, &[1., 0.]), vec![]),
                (Matrix::from_row_slice(1, 2, &[2., 0.]), vec![]),
            ],
        )
        .unwrap();
        let graph = CouplingGraph::undirected(Topology::undirected(2, &[(0, 1)]).unwrap()).unwrap();
        let err = design_gains(&model, &graph, &DesignOptions::default()).unwrap_err();
        assert_eq!(err.code(), "not_jointly_detectable");
    }

    #[test]
    fn split_sensing_needs_coupling() {
        // each node sees one unstable state; neither can estimate alone
        let a = Matrix::from_row_slice(2, 2, &[1., 0.5, 0., 2.]);
        let model = SystemModel::from_partition(
            a,
            Matrix::zeros(2, 0),
            Matrix::zeros(2, 0),
            vec![
                (Matrix::from_row_slice(1, 2, &[1., 0.]), vec![]),
                (Matrix::from_row_slice(1, 2, &[0., 1.]), vec![]),
            ],
        )
        .unwrap();
        let graph = CouplingGraph::undirected(Topology::undirected(2, &[(0, 1)]).unwrap()).unwrap();
        let (design, cert) = design_gains(&model, &graph, &DesignOptions::default()).unwrap();
        assert!(cert.lmi_ok);
        assert!(design.chi > cert.chi_bound && cert.chi_bound > 0.0);
        assert!(cert.mu.unwrap() > 0.0);
    }
}
