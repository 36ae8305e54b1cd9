//! Checking externally supplied gains against the decoupling conditions.

use super::certificate::{closed_loop_lambda, compute_lambda, DesignCertificate};
use super::conditions::node_huv;
use super::{CouplingMode, NodeGains, ObserverDesign};
use crate::error::{DuioError, Result};
use crate::linalg::{
    numerical_rank, pseudo_inverse, spectral_abscissa, symmetric_eigenvalues, Matrix, Tolerances,
};
use crate::model::SystemModel;

/// Gains for one node as supplied by a user; `K` may be omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct SuppliedNode {
    pub h: Matrix,
    pub m: Matrix,
    pub n: Matrix,
    pub l: Matrix,
    pub p: Matrix,
    pub k: Option<Matrix>,
}

/// A design given from outside the synthesizer.
#[derive(Debug, Clone, PartialEq)]
pub struct SuppliedDesign {
    pub nodes: Vec<SuppliedNode>,
    pub chi: Option<f64>,
    pub mode: CouplingMode,
}

impl From<&ObserverDesign> for SuppliedDesign {
    fn from(d: &ObserverDesign) -> Self {
        SuppliedDesign {
            nodes: d
                .nodes
                .iter()
                .map(|g| SuppliedNode {
                    h: g.h.clone(),
                    m: g.m.clone(),
                    n: g.n.clone(),
                    l: g.l.clone(),
                    p: g.p.clone(),
                    k: Some(g.k.clone()),
                })
                .collect(),
            chi: Some(d.chi),
            mode: d.mode,
        }
    }
}

/// Relative residuals of one node's gains.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeResiduals {
    /// `||(I - H C) B_bar|| / ||B_bar||`.
    pub decoupling: f64,
    /// `||M - (I - H C)|| / ||I - H C||`.
    pub m: f64,
    /// `||N - (M A - K C)|| / ||N||`; with a recovered `K` this is the fit residual.
    pub n: f64,
    /// `||L - (K + N H)|| / ||L||`.
    pub l: f64,
    /// `||Lambda_formula - (N^T P + P N)|| / ||N^T P + P N||`.
    pub lambda_identity: f64,
    /// Smallest eigenvalue of `P` (must be positive).
    pub p_min_eig: f64,
    /// Largest real part of the eigenvalues of `N`.
    pub n_abscissa: f64,
    /// `K` was recovered by least squares.
    pub k_recovered: bool,
}

impl NodeResiduals {
    /// The four condition residuals, named.
    pub fn conditions(&self) -> [(&'static str, f64); 4] {
        [
            ("decoupling", self.decoupling),
            ("M", self.m),
            ("N", self.n),
            ("L", self.l),
        ]
    }
}

/// Result of [`verify_existing_design`].
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub nodes: Vec<NodeResiduals>,
    pub certificate: DesignCertificate,
    pub tol: f64,
    /// Human-readable descriptions of every violated check.
    pub failures: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.nodes
            .iter()
            .flat_map(|r| r.conditions().into_iter().map(|(_, v)| v))
            .fold(0.0, f64::max)
    }
}

fn rel(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Least-squares `K` in `N = (I - H C) A - K C`.
pub fn recover_k(n: &Matrix, h: &Matrix, a: &Matrix, c: &Matrix) -> Result<Matrix> {
    let dim = a.nrows();
    if n.shape() != (dim, dim) || h.shape() != (dim, c.nrows()) || c.ncols() != dim {
        return Err(DuioError::DimensionMismatch(format!(
            "recover_k got N {:?}, H {:?}, A {:?}, C {:?}",
            n.shape(),
            h.shape(),
            a.shape(),
            c.shape()
        )));
    }
    if numerical_rank(c, Tolerances::default().rank_eps) < c.nrows() {
        log::warn!("C is row-rank deficient; returning the minimum-norm gain");
    }
    let target = (Matrix::identity(dim, dim) - h * c) * a - n;
    Ok(target * pseudo_inverse(c))
}

/// Least-squares `Y` in `H = U + Y V`.
pub fn recover_y(h: &Matrix, u: &Matrix, v: &Matrix) -> Matrix {
    (h - u) * pseudo_inverse(v)
}

fn check_shapes(model: &SystemModel, supplied: &SuppliedDesign) -> Result<()> {
    if supplied.nodes.len() != model.node_count() {
        return Err(DuioError::DimensionMismatch(format!(
            "design has {} nodes, model has {}",
            supplied.nodes.len(),
            model.node_count()
        )));
    }
    let n = model.state_dim();
    for (i, (s, node)) in supplied.nodes.iter().zip(&model.nodes).enumerate() {
        let p = node.output_dim();
        let mut expect = vec![
            ("H", &s.h, (n, p)),
            ("M", &s.m, (n, n)),
            ("N", &s.n, (n, n)),
            ("L", &s.l, (n, p)),
            ("P", &s.p, (n, n)),
        ];
        if let Some(k) = &s.k {
            expect.push(("K", k, (n, p)));
        }
        for (name, m, shape) in expect {
            if m.shape() != shape {
                return Err(DuioError::DimensionMismatch(format!(
                    "{name} of node {} is {}x{}, expected {}x{}",
                    i,
                    m.nrows(),
                    m.ncols(),
                    shape.0,
                    shape.1
                )));
            }
        }
    }
    Ok(())
}

/// Complete a supplied design: keep `H` and `P`, take `K` as given or
/// recovered, and regenerate `M`, `N`, `L` from the decoupling conditions so
/// they hold to rounding. `U`, `V`, `Y` are filled in from `H`.
pub fn reconcile_design(
    model: &SystemModel,
    supplied: &SuppliedDesign,
    tol: &Tolerances,
) -> Result<ObserverDesign> {
    check_shapes(model, supplied)?;
    let n = model.state_dim();
    let eye = Matrix::identity(n, n);
    let mut nodes = Vec::with_capacity(supplied.nodes.len());
    for (i, (s, node)) in supplied.nodes.iter().zip(&model.nodes).enumerate() {
        let (_, u, v) = node_huv(model, i, &Matrix::zeros(n, node.output_dim()), tol)?;
        let k = match &s.k {
            Some(k) => k.clone(),
            None => recover_k(&s.n, &s.h, &model.a, &node.c)?,
        };
        let m = &eye - &s.h * &node.c;
        let n_mat = &m * &model.a - &k * &node.c;
        let l = &k + &n_mat * &s.h;
        nodes.push(NodeGains {
            y: recover_y(&s.h, &u, &v),
            h: s.h.clone(),
            m,
            n: n_mat,
            l,
            k,
            p: s.p.clone(),
            u,
            v,
        });
    }
    Ok(ObserverDesign {
        nodes,
        chi: supplied.chi.unwrap_or(0.0),
        mode: supplied.mode,
    })
}

/// Residuals of the decoupling conditions, the `Lambda_i` identity and the
/// LMI verdict for a supplied design, judged at relative tolerance `tol`.
pub fn verify_existing_design(
    model: &SystemModel,
    supplied: &SuppliedDesign,
    tol: f64,
) -> Result<VerificationReport> {
    check_shapes(model, supplied)?;
    let tols = Tolerances::default();
    let n = model.state_dim();
    let eye = Matrix::identity(n, n);
    let mut residuals = Vec::with_capacity(supplied.nodes.len());
    let mut as_design = Vec::with_capacity(supplied.nodes.len());
    let mut failures = Vec::new();

    for (i, (s, node)) in supplied.nodes.iter().zip(&model.nodes).enumerate() {
        let k_recovered = s.k.is_none();
        let k = match &s.k {
            Some(k) => k.clone(),
            None => recover_k(&s.n, &s.h, &model.a, &node.c)?,
        };
        let i_hc = &eye - &s.h * &node.c;
        let decoupling = if node.b_bar.ncols() == 0 {
            0.0
        } else {
            rel((&i_hc * &node.b_bar).norm(), node.b_bar.norm())
        };
        let m_res = rel((&s.m - &i_hc).norm(), i_hc.norm());
        let n_res = rel((&s.n - (&s.m * &model.a - &k * &node.c)).norm(), s.n.norm());
        let l_res = rel((&s.l - (&k + &s.n * &s.h)).norm(), s.l.norm());
        let p_min_eig = symmetric_eigenvalues(&s.p).first().copied().unwrap_or(0.0);
        let n_abscissa = spectral_abscissa(&s.n)?;

        // the Lambda formula needs U, V, Y; without the rank condition it is undefined
        let (u, v) = match node_huv(model, i, &Matrix::zeros(n, node.output_dim()), &tols) {
            Ok((_, u, v)) => (u, v),
            Err(e) => {
                failures.push(format!("node {}: {e}", i));
                (
                    Matrix::zeros(n, node.output_dim()),
                    Matrix::identity(node.output_dim(), node.output_dim()),
                )
            }
        };
        as_design.push(NodeGains {
            y: recover_y(&s.h, &u, &v),
            h: s.h.clone(),
            m: s.m.clone(),
            n: s.n.clone(),
            l: s.l.clone(),
            k,
            p: s.p.clone(),
            u,
            v,
        });
        residuals.push(NodeResiduals {
            decoupling,
            m: m_res,
            n: n_res,
            l: l_res,
            lambda_identity: 0.0,
            p_min_eig,
            n_abscissa,
            k_recovered,
        });
    }

    let design = ObserverDesign {
        nodes: as_design,
        chi: supplied.chi.unwrap_or(0.0),
        mode: supplied.mode,
    };
    let direct = closed_loop_lambda(&design);
    let formula = compute_lambda(&design, model)?;
    for ((r, d), f) in residuals.iter_mut().zip(&direct).zip(&formula) {
        r.lambda_identity = rel((d - f).norm(), d.norm());
    }
    let certificate = DesignCertificate::from_lambdas(direct);

    for (i, r) in residuals.iter().enumerate() {
        for (name, value) in r.conditions() {
            if !(value <= tol) {
                failures.push(format!(
                    "node {}: {name} residual {value:.3e} exceeds {tol:.1e}",
                    i
                ));
            }
        }
        if !(r.p_min_eig > 0.0) {
            failures.push(format!(
                "node {}: P is not positive definite (smallest eigenvalue {:.3e})",
                i, r.p_min_eig
            ));
        }
    }
    if !certificate.lmi_ok {
        failures.push(format!(
            "sum of Lambda_i is not negative definite (largest eigenvalue {:.3e})",
            certificate.lambda_sum_max_eig
        ));
    }
    Ok(VerificationReport {
        nodes: residuals,
        certificate,
        tol,
        failures,
    })
}
