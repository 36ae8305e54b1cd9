//! LMI certificate, coupling-gain bound and decay rate.

use super::{Connectivity, CouplingGraph, ObserverDesign};
use crate::error::{DuioError, Result};
use crate::linalg::{
    block_diag, hstack, is_negative_definite, spectral_norm, symmetric_eigenvalues, symmetrize,
    Matrix,
};
use crate::model::SystemModel;

/// The matrices behind the convergence proof for one design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignCertificate {
    /// `Lambda_i = N_i^T P_i + P_i N_i` per node.
    pub lambda_i: Vec<Matrix>,
    /// Block diagonal of all `Lambda_i`.
    pub lambda: Matrix,
    /// Horizontal stack `[Lambda_1 ... Lambda_N]`.
    pub lambda_p: Matrix,
    /// Largest eigenvalue of `sum Lambda_i`.
    pub lambda_sum_max_eig: f64,
    /// `sum Lambda_i` is negative definite.
    pub lmi_ok: bool,
    /// Graph quantity the bound was evaluated with (`None` for one node).
    pub connectivity: Option<Connectivity>,
    /// Strict lower bound on the coupling gain.
    pub chi_bound: f64,
    /// Certified decay rate of `V = sum e_i^T P_i e_i`, in 1/s.
    pub mu: Option<f64>,
    /// Scaling of the detectable Lyapunov blocks, when synthesized.
    pub beta: Option<f64>,
}

impl DesignCertificate {
    /// Assemble the stacked matrices and the LMI verdict from `Lambda_i`.
    pub fn from_lambdas(lambda_i: Vec<Matrix>) -> Self {
        let lambda_i: Vec<Matrix> = lambda_i.iter().map(symmetrize).collect();
        let lambda = block_diag(&lambda_i);
        let refs: Vec<&Matrix> = lambda_i.iter().collect();
        let lambda_p = hstack(&refs);
        let sum = lambda_sum(&lambda_i);
        let lambda_sum_max_eig = *symmetric_eigenvalues(&sum).last().unwrap_or(&0.0);
        DesignCertificate {
            lmi_ok: is_negative_definite(&sum, 0.0),
            lambda_i,
            lambda,
            lambda_p,
            lambda_sum_max_eig,
            connectivity: None,
            chi_bound: 0.0,
            mu: None,
            beta: None,
        }
    }

    pub fn lambda_sum(&self) -> Matrix {
        lambda_sum(&self.lambda_i)
    }

    /// Time constant `1 / mu`.
    pub fn time_constant(&self) -> Option<f64> {
        self.mu.map(|m| 1.0 / m)
    }
}

fn lambda_sum(lambda_i: &[Matrix]) -> Matrix {
    let n = lambda_i.first().map_or(0, |l| l.nrows());
    lambda_i.iter().fold(Matrix::zeros(n, n), |acc, l| acc + l)
}

/// `Lambda_i` from the gain parametrization:
///
/// ```text
/// A^T (I - C^T U^T) P + P (I - U C) A - A^T C^T V^T Ybar^T - Ybar V C A - C^T Kbar^T - Kbar C
/// ```
///
/// with `Ybar = P Y`, `Kbar = P K`. Equals `N^T P + P N` whenever the design
/// satisfies the decoupling conditions.
pub fn compute_lambda(design: &ObserverDesign, model: &SystemModel) -> Result<Vec<Matrix>> {
    if design.node_count() != model.node_count() {
        return Err(DuioError::DimensionMismatch(format!(
            "design has {} nodes, model has {}",
            design.node_count(),
            model.node_count()
        )));
    }
    let a = &model.a;
    let n = model.state_dim();
    let eye = Matrix::identity(n, n);
    let mut out = Vec::with_capacity(design.node_count());
    for (g, node) in design.nodes.iter().zip(&model.nodes) {
        let c = &node.c;
        let p = &g.p;
        let y_bar = p * &g.y;
        let k_bar = p * &g.k;
        let a_i = (&eye - &g.u * c) * a;
        let vca = &g.v * c * a;
        let kc = &k_bar * c;
        let yvca = &y_bar * vca;
        let lam = a_i.transpose() * p + p * &a_i - yvca.transpose() - &yvca - kc.transpose() - &kc;
        out.push(symmetrize(&lam));
    }
    Ok(out)
}

/// `Lambda_i = N_i^T P_i + P_i N_i` straight from the closed error matrices.
pub fn closed_loop_lambda(design: &ObserverDesign) -> Vec<Matrix> {
    design
        .nodes
        .iter()
        .map(|g| symmetrize(&(g.n.transpose() * &g.p + &g.p * &g.n)))
        .collect()
}

/// Certificate for an existing design on `graph`: LMI verdict, coupling
/// bound and, when `design.chi` clears the bound, the decay rate.
pub fn certify_design(design: &ObserverDesign, graph: &CouplingGraph) -> Result<DesignCertificate> {
    if design.node_count() != graph.node_count() {
        return Err(DuioError::DimensionMismatch(format!(
            "design has {} nodes, graph has {}",
            design.node_count(),
            graph.node_count()
        )));
    }
    if design.mode != graph.mode() {
        return Err(DuioError::ModeMismatch(format!(
            "design is for {} coupling, graph is {}",
            design.mode,
            graph.mode()
        )));
    }
    let mut cert = DesignCertificate::from_lambdas(closed_loop_lambda(design));
    cert.connectivity = graph.connectivity()?;
    if !cert.lmi_ok {
        return Ok(cert);
    }
    cert.chi_bound = chi_bound(&cert, cert.connectivity)?;
    let n = design.nodes[0].p.nrows();
    let ps: Vec<Matrix> = design.nodes.iter().map(|g| g.p.clone()).collect();
    cert.mu = match compute_decay_rate(
        &cert.lambda,
        &ps,
        design.chi,
        &graph.dissipation_operators(n),
    ) {
        Ok(mu) => Some(mu),
        Err(DuioError::ChiTooSmall { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(cert)
}

/// `true` iff `sum Lambda_i` is negative definite.
pub fn verify_lmi(cert: &DesignCertificate) -> bool {
    is_negative_definite(&cert.lambda_sum(), 0.0)
}

/// Strict lower bound on the coupling gain:
/// `|| Lambda - Lambda_P^T (sum Lambda_i)^{-1} Lambda_P || / denominator`,
/// with the spectral norm and the mode's denominator. Zero for a single node.
pub fn chi_bound(cert: &DesignCertificate, connectivity: Option<Connectivity>) -> Result<f64> {
    if !cert.lmi_ok {
        return Err(DuioError::NoCertificate);
    }
    let Some(conn) = connectivity else {
        return Ok(0.0);
    };
    if !(conn.value() > 0.0) {
        return Err(DuioError::InvalidArgument(format!(
            "graph quantity for the {} bound must be positive, got {:.3e}",
            conn.mode(),
            conn.value()
        )));
    }
    let sum = cert.lambda_sum();
    let inv = sum
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .or_else(|| (-sum).cholesky().map(|c| -c.inverse()))
        .ok_or(DuioError::NoCertificate)?;
    let reduced = &cert.lambda - cert.lambda_p.transpose() * inv * &cert.lambda_p;
    Ok(spectral_norm(&symmetrize(&reduced)) / conn.bound_denominator())
}

/// Coupling gain: the bound times `safety` (> 1, the bound is strict).
pub fn compute_chi(
    cert: &DesignCertificate,
    connectivity: Option<Connectivity>,
    safety: f64,
) -> Result<f64> {
    if !(safety > 1.0 && safety.is_finite()) {
        return Err(DuioError::InvalidArgument(format!(
            "coupling safety factor must exceed 1, got {safety}"
        )));
    }
    Ok(chi_bound(cert, connectivity)? * safety)
}

/// Decay rate `mu = min_S lambda_min(chi (S (x) I) - Lambda) / max_i lambda_max(P_i)`
/// over the dissipation operators `S` of the active graph(s).
pub fn compute_decay_rate(
    lambda: &Matrix,
    p: &[Matrix],
    chi: f64,
    operators: &[Matrix],
) -> Result<f64> {
    let pmax = p
        .iter()
        .map(|pi| *symmetric_eigenvalues(pi).last().unwrap_or(&0.0))
        .fold(0.0, f64::max);
    if !(pmax > 0.0) {
        return Err(DuioError::InvalidArgument(
            "P_i must be positive definite".into(),
        ));
    }
    let mut worst = f64::INFINITY;
    for s in operators {
        if s.shape() != lambda.shape() {
            return Err(DuioError::DimensionMismatch(format!(
                "dissipation operator {:?} does not match Lambda {:?}",
                s.shape(),
                lambda.shape()
            )));
        }
        let m = s * chi - lambda;
        worst = worst.min(symmetric_eigenvalues(&m)[0]);
    }
    if operators.is_empty() {
        worst = symmetric_eigenvalues(&(-lambda))[0];
    }
    if !(worst > 0.0) {
        return Err(DuioError::ChiTooSmall {
            min_eigenvalue: worst,
        });
    }
    Ok(worst / pmax)
}

/// `[[-sum Lambda_i, -Lambda_P], [-Lambda_P^T, chi d I - Lambda]]` with `d`
/// the bound denominator of the mode. Positive definite whenever `chi`
/// exceeds [`chi_bound`].
pub fn schur_block_matrix(
    cert: &DesignCertificate,
    chi: f64,
    connectivity: Connectivity,
) -> Matrix {
    let n = cert.lambda_p.nrows();
    let nn = cert.lambda.nrows();
    let mut m = Matrix::zeros(n + nn, n + nn);
    m.view_mut((0, 0), (n, n)).copy_from(&(-cert.lambda_sum()));
    m.view_mut((0, n), (n, nn)).copy_from(&(-&cert.lambda_p));
    m.view_mut((n, 0), (nn, n))
        .copy_from(&(-cert.lambda_p.transpose()));
    let lower = Matrix::identity(nn, nn) * (chi * connectivity.bound_denominator()) - &cert.lambda;
    m.view_mut((n, n), (nn, nn)).copy_from(&lower);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lmi_verdicts() {
        let cert =
            DesignCertificate::from_lambdas(vec![-Matrix::identity(2, 2), -Matrix::identity(2, 2)]);
        assert!(cert.lmi_ok && verify_lmi(&cert));
        let l1 = Matrix::from_diagonal(&crate::linalg::Vector::from_row_slice(&[-1.0, 1.0]));
        let cert = DesignCertificate::from_lambdas(vec![l1, -Matrix::identity(2, 2) * 0.5]);
        assert!(!cert.lmi_ok && !verify_lmi(&cert));
        assert_eq!(chi_bound(&cert, None).unwrap_err().code(), "no_certificate");
    }

    #[test]
    fn identical_nodes_need_no_coupling() {
        let cert = DesignCertificate::from_lambdas(vec![-Matrix::identity(1, 1); 2]);
        let b = chi_bound(&cert, Some(Connectivity::Undirected { lambda2: 2.0 })).unwrap();
        // reduced = -I + 0.5 * ones -> eigenvalues {0, -1}
        assert!((b - 0.25).abs() < 1e-12);
        assert_eq!(chi_bound(&cert, None).unwrap(), 0.0);
        assert!(chi_bound(&cert, Some(Connectivity::Undirected { lambda2: 0.0 })).is_err());
        assert!(compute_chi(&cert, None, 1.0).is_err());
    }

    #[test]
    fn decay_rate_collapse() {
        // P = I, Lambda = -I: mu = lambda_min(2 chi (L (x) I) + I)
        let lam = -Matrix::identity(2, 2);
        let l = Matrix::from_row_slice(2, 2, &[1., -1., -1., 1.]);
        let s = &l * 2.0;
        let mu = compute_decay_rate(&lam, &vec![Matrix::identity(1, 1); 2], 3.0, &[s]).unwrap();
        assert!((mu - 1.0).abs() < 1e-12);
        let bad = Matrix::identity(2, 2);
        let err =
            compute_decay_rate(&bad, &vec![Matrix::identity(1, 1); 2], 0.0, &[l]).unwrap_err();
        assert_eq!(err.code(), "chi_too_small");
    }
}
