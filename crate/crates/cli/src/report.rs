//! Run reports, rendered as JSON for machines and as text for people.
//! Both renderings come from the same struct and print numbers identically.

use std::fmt::{self, Write as _};

use duio_core::designer::{DesignCertificate, JointDetectability, VerificationReport};
use duio_core::simulator::ErrorMetrics;
use serde::Serialize;

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunReport {
    pub command: String,
    pub scenario: Option<String>,
    pub mode: Option<String>,
    pub existence: Option<Existence>,
    pub residuals: Option<Residuals>,
    pub certificate: Option<Certificate>,
    pub metrics: Option<Metrics>,
    pub checks: Vec<Check>,
    pub outputs: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Existence {
    /// Rank condition per node.
    pub rank_condition: Vec<bool>,
    /// Not evaluated when a rank condition fails.
    pub jointly_detectable: Option<bool>,
    /// Undetectable subspace dimension per node.
    pub undetectable_dims: Vec<usize>,
    /// Dimension of the common undetectable subspace; 0 when detectable.
    pub witness_dim: usize,
}

impl Existence {
    pub fn new(rank_condition: Vec<bool>, jd: &JointDetectability) -> Self {
        Existence {
            rank_condition,
            jointly_detectable: Some(jd.holds),
            undetectable_dims: jd.node_dims.clone(),
            witness_dim: jd.witness.dim(),
        }
    }

    pub fn rank_failure(rank_condition: Vec<bool>) -> Self {
        Existence {
            rank_condition,
            jointly_detectable: None,
            undetectable_dims: Vec::new(),
            witness_dim: 0,
        }
    }

    pub fn holds(&self) -> bool {
        self.rank_condition.iter().all(|&r| r) && self.jointly_detectable == Some(true)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub tolerance: f64,
    pub nodes: Vec<NodeResidualRow>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeResidualRow {
    pub decoupling: f64,
    pub m: f64,
    pub n: f64,
    pub l: f64,
    pub lambda_identity: f64,
    pub p_min_eigenvalue: f64,
    pub n_spectral_abscissa: f64,
    pub k_recovered: bool,
}

impl From<&VerificationReport> for Residuals {
    fn from(r: &VerificationReport) -> Self {
        Residuals {
            tolerance: r.tol,
            nodes: r
                .nodes
                .iter()
                .map(|n| NodeResidualRow {
                    decoupling: n.decoupling,
                    m: n.m,
                    n: n.n,
                    l: n.l,
                    lambda_identity: n.lambda_identity,
                    p_min_eigenvalue: n.p_min_eig,
                    n_spectral_abscissa: n.n_abscissa,
                    k_recovered: n.k_recovered,
                })
                .collect(),
            failures: r.failures.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub lmi_ok: bool,
    pub lambda_sum_max_eigenvalue: f64,
    pub chi: f64,
    pub chi_bound: f64,
    pub mu: Option<f64>,
    pub time_constant: Option<f64>,
    pub beta: Option<f64>,
}

impl Certificate {
    pub fn new(cert: &DesignCertificate, chi: f64) -> Self {
        Certificate {
            lmi_ok: cert.lmi_ok,
            lambda_sum_max_eigenvalue: cert.lambda_sum_max_eig,
            chi,
            chi_bound: cert.chi_bound,
            mu: cert.mu,
            time_constant: cert.time_constant(),
            beta: cert.beta,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub samples: usize,
    pub initial_error: f64,
    pub peak_error: f64,
    pub terminal_error: f64,
    pub terminal_relative: f64,
    pub settling_time: Option<f64>,
    pub v_monotone: bool,
    pub diverged: bool,
    /// Largest `V(t) / (exp(-mu t) V(0))`, when `mu` is known.
    pub envelope_ratio: Option<f64>,
}

impl Metrics {
    pub fn new(m: &ErrorMetrics, samples: usize, envelope_ratio: Option<f64>) -> Self {
        Metrics {
            samples,
            initial_error: m.initial_norm,
            peak_error: m.peak_norm,
            terminal_error: m.terminal_norm,
            terminal_relative: m.terminal_relative,
            settling_time: m.settling_time,
            v_monotone: m.v_monotone,
            diverged: m.diverged,
            envelope_ratio,
        }
    }
}

/// One named pass/fail line.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Number formatting shared by the text rendering.
pub fn num(v: f64) -> String {
    format!("{v:.6e}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), num)
}

fn verdict(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            ..RunReport::default()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let _ = write!(s, "duio {}", self.command);
        if let Some(name) = &self.scenario {
            let _ = write!(s, " {name}");
        }
        if let Some(mode) = &self.mode {
            let _ = write!(s, " [{mode}]");
        }
        writeln!(f, "{s}")?;

        if let Some(e) = &self.existence {
            writeln!(f, "existence:")?;
            for (i, r) in e.rank_condition.iter().enumerate() {
                write!(f, "  node {i}: rank condition {}", verdict(*r))?;
                match e.undetectable_dims.get(i) {
                    Some(d) => writeln!(f, ", undetectable dimension {d}")?,
                    None => writeln!(f)?,
                }
            }
            match e.jointly_detectable {
                Some(jd) => writeln!(
                    f,
                    "  joint detectability {}, witness dimension {}",
                    verdict(jd),
                    e.witness_dim
                )?,
                None => writeln!(f, "  joint detectability not evaluated")?,
            }
        }
        if let Some(r) = &self.residuals {
            writeln!(f, "residuals (tolerance {}):", num(r.tolerance))?;
            writeln!(
                f,
                "  {:<5} {:>13} {:>13} {:>13} {:>13} {:>13} {:>13} {:>13}",
                "node", "decoupling", "M", "N", "L", "Lambda", "min eig P", "abscissa N"
            )?;
            for (i, n) in r.nodes.iter().enumerate() {
                writeln!(
                    f,
                    "  {:<5} {:>13} {:>13} {:>13} {:>13} {:>13} {:>13} {:>13}{}",
                    i,
                    num(n.decoupling),
                    num(n.m),
                    num(n.n),
                    num(n.l),
                    num(n.lambda_identity),
                    num(n.p_min_eigenvalue),
                    num(n.n_spectral_abscissa),
                    if n.k_recovered { "  (K recovered)" } else { "" }
                )?;
            }
            for failure in &r.failures {
                writeln!(f, "  violated: {failure}")?;
            }
        }
        if let Some(c) = &self.certificate {
            writeln!(f, "certificate:")?;
            writeln!(
                f,
                "  sum Lambda_i negative definite {} (largest eigenvalue {})",
                verdict(c.lmi_ok),
                num(c.lambda_sum_max_eigenvalue)
            )?;
            writeln!(f, "  chi {} against bound {}", num(c.chi), num(c.chi_bound))?;
            writeln!(
                f,
                "  mu {}, time constant {}",
                opt(c.mu),
                opt(c.time_constant)
            )?;
            if let Some(b) = c.beta {
                writeln!(f, "  beta {}", num(b))?;
            }
        }
        if let Some(m) = &self.metrics {
            writeln!(f, "simulation ({} samples):", m.samples)?;
            writeln!(
                f,
                "  error norm initial {}, peak {}, terminal {}",
                num(m.initial_error),
                num(m.peak_error),
                num(m.terminal_error)
            )?;
            writeln!(
                f,
                "  terminal relative {}, settling time {}",
                num(m.terminal_relative),
                opt(m.settling_time)
            )?;
            writeln!(
                f,
                "  V monotone {}, diverged {}, envelope ratio {}",
                m.v_monotone,
                m.diverged,
                opt(m.envelope_ratio)
            )?;
        }
        if !self.checks.is_empty() {
            writeln!(f, "checks:")?;
            for c in &self.checks {
                writeln!(f, "  {} {}: {}", verdict(c.pass), c.name, c.detail)?;
            }
        }
        for path in &self.outputs {
            writeln!(f, "wrote {path}")?;
        }
        write!(f, "result: {}", verdict(self.passed))
    }
}
