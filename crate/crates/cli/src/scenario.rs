//! Scenario files.
//!
//! A scenario is a TOML document with `model`, `graph`, optional `design`,
//! `run` and `options` tables. Matrices are arrays of rows. Node indices are
//! zero-based everywhere. Floats are written in shortest round-trip form, so
//! a file written by `duio design` reloads to bit-identical gains.

use duio_core::designer::{
    compute_huv, recover_k, recover_y, DesignCertificate, DesignOptions, NodeGains, SuppliedDesign,
    SuppliedNode,
};
use duio_core::linalg::{Matrix, Tolerances, Vector};
use duio_core::simulator::{ExogenousInput, NoiseSpec};
use duio_core::{
    CouplingGraph, CouplingMode, ObserverDesign, SwitchingSchedule, SystemModel, Topology,
};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{CliError, CliResult};

type Rows = Spanned<Vec<Vec<f64>>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub model: ModelBlock,
    pub graph: GraphBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignBlock>,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default)]
    pub options: OptionsBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub a: Rows,
    /// Control input matrix; omitted means no control inputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Rows>,
    /// Disturbance matrix; omitted means no disturbances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Rows>,
    pub nodes: Vec<NodeBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeBlock {
    pub c: Rows,
    /// Columns of `B` this node measures.
    #[serde(default)]
    pub known_inputs: Vec<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphBlock {
    #[serde(default)]
    pub directed: bool,
    /// `[from, to]` pairs; direction matters only when `directed`.
    #[serde(default)]
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switching: Option<SwitchingBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchingBlock {
    pub dwell: f64,
    #[serde(default)]
    pub start_index: usize,
    pub topologies: Vec<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignBlock {
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    /// Regenerate `M`, `N`, `L` from `H` and `K` before simulating, for
    /// gains published with few significant digits.
    #[serde(default)]
    pub reconcile: bool,
    pub nodes: Vec<DesignNode>,
    /// Written by `duio design`; informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignNode {
    pub h: Rows,
    pub m: Rows,
    pub n: Rows,
    pub l: Rows,
    pub p: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Rows>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateBlock {
    pub lmi_ok: bool,
    pub lambda_sum_max_eigenvalue: f64,
    pub chi_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseBlock {
    None,
    BandLimitedWhite {
        power: f64,
        #[serde(default = "default_sample_time")]
        sample_time: f64,
    },
}

fn default_sample_time() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExogenousBlock {
    Zero,
    Sinusoid {
        amplitude: f64,
        angular_frequency: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub seed: u64,
    /// State feedback `u = -F x` closing the plant loop.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback_gain: Option<Rows>,
    #[serde(default = "default_noise")]
    pub noise: NoiseBlock,
    #[serde(default = "default_exogenous")]
    pub exogenous: ExogenousBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_observer_states: Option<Vec<Vec<f64>>>,
}

fn default_horizon() -> f64 {
    1.0
}

fn default_step() -> f64 {
    1e-4
}

fn default_noise() -> NoiseBlock {
    NoiseBlock::None
}

fn default_exogenous() -> ExogenousBlock {
    ExogenousBlock::Zero
}

impl Default for RunBlock {
    fn default() -> Self {
        RunBlock {
            horizon: default_horizon(),
            step: default_step(),
            seed: 0,
            feedback_gain: None,
            noise: default_noise(),
            exogenous: default_exogenous(),
            initial_state: None,
            initial_observer_states: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_tol: Option<f64>,
    /// Relative tolerance for `verify`; defaults to 1e-8.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_doublings: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_headroom: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_u_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_safety: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub y_overrides: Vec<YOverride>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YOverride {
    pub node: usize,
    pub y: Rows,
}

/// A design block resolved against the model.
#[derive(Debug, Clone)]
pub struct LoadedDesign {
    pub supplied: SuppliedDesign,
    /// `(Y, U, V)` per node when all three were written.
    pub free_parameters: Vec<Option<(Matrix, Matrix, Matrix)>>,
    pub reconcile: bool,
}

/// Simulation settings with defaults filled in.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub horizon: f64,
    pub step: f64,
    pub seed: u64,
    pub feedback_gain: Option<Matrix>,
    pub noise: NoiseSpec,
    pub exogenous: ExogenousInput,
    pub initial_state: Vector,
    pub initial_observer_states: Vec<Vector>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub file: ScenarioFile,
    pub model: SystemModel,
    pub mode: CouplingMode,
    pub graph: CouplingGraph,
    pub design: Option<LoadedDesign>,
    pub run: RunSettings,
    pub design_options: DesignOptions,
    pub tol: Tolerances,
    pub verify_tol: f64,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<CouplingMode>,
    pub step: Option<f64>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub safety_factor: Option<f64>,
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line_of(&self, span: &std::ops::Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].matches('\n').count() + 1
    }

    fn matrix(&self, field: &str, rows: &Rows) -> CliResult<Matrix> {
        let data = rows.get_ref();
        let line = self.line_of(&rows.span());
        let cols = data.first().map_or(0, Vec::len);
        for (r, row) in data.iter().enumerate() {
            if row.len() != cols {
                return Err(CliError::Input(format!(
                    "{field} (line {line}): row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(CliError::Input(format!(
                    "{field} (line {line}): entry ({r}, {c}) is not finite"
                )));
            }
        }
        Ok(Matrix::from_fn(data.len(), cols, |i, j| data[i][j]))
    }

    fn shaped(&self, field: &str, rows: &Rows, shape: (usize, usize)) -> CliResult<Matrix> {
        let m = self.matrix(field, rows)?;
        // an empty row list stands for a matrix without columns
        if m.nrows() == 0 && shape.1 == 0 {
            return Ok(Matrix::zeros(shape.0, 0));
        }
        if m.shape() != shape {
            return Err(CliError::Input(format!(
                "{field} (line {}): is {}x{}, expected {}x{}",
                self.line_of(&rows.span()),
                m.nrows(),
                m.ncols(),
                shape.0,
                shape.1
            )));
        }
        Ok(m)
    }
}

fn input<T>(context: &str, r: duio_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Input(format!("{context}: {e}")))
}

fn rows(m: &Matrix) -> Rows {
    Spanned::new(
        0..0,
        m.row_iter().map(|r| r.iter().copied().collect()).collect(),
    )
}

fn graph_mode(g: &GraphBlock) -> CouplingMode {
    if g.switching.is_some() {
        CouplingMode::Switching
    } else if g.directed {
        CouplingMode::Directed
    } else {
        CouplingMode::Undirected
    }
}

fn pairs(edges: &[[usize; 2]]) -> Vec<(usize, usize)> {
    edges.iter().map(|e| (e[0], e[1])).collect()
}

fn build_graph(g: &GraphBlock, nodes: usize) -> CliResult<CouplingGraph> {
    match &g.switching {
        Some(s) => {
            if !g.edges.is_empty() {
                return Err(CliError::Input(
                    "graph: give either edges or a switching block, not both".into(),
                ));
            }
            if g.directed {
                return Err(CliError::Input(
                    "graph: switching topologies must be undirected".into(),
                ));
            }
            let mut tops = Vec::with_capacity(s.topologies.len());
            for (k, edges) in s.topologies.iter().enumerate() {
                tops.push(input(
                    &format!("graph.switching.topologies[{k}]"),
                    Topology::undirected(nodes, &pairs(edges)),
                )?);
            }
            let schedule = input(
                "graph.switching",
                SwitchingSchedule::new(tops, s.dwell, s.start_index),
            )?;
            Ok(CouplingGraph::switching(schedule))
        }
        None if g.directed => {
            let t = input("graph.edges", Topology::directed(nodes, &pairs(&g.edges)))?;
            input("graph", CouplingGraph::directed(t))
        }
        None => {
            let t = input("graph.edges", Topology::undirected(nodes, &pairs(&g.edges)))?;
            input("graph", CouplingGraph::undirected(t))
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("serializing scenario: {e}")))
    }

    /// Copy of this file with the design block replaced.
    pub fn with_design(&self, design: &ObserverDesign, cert: &DesignCertificate) -> Self {
        let mut out = self.clone();
        out.design = Some(DesignBlock {
            mode: design.mode.to_string(),
            chi: Some(design.chi),
            reconcile: false,
            nodes: design
                .nodes
                .iter()
                .map(|g| DesignNode {
                    h: rows(&g.h),
                    m: rows(&g.m),
                    n: rows(&g.n),
                    l: rows(&g.l),
                    p: rows(&g.p),
                    k: Some(rows(&g.k)),
                    y: Some(rows(&g.y)),
                    u: Some(rows(&g.u)),
                    v: Some(rows(&g.v)),
                })
                .collect(),
            certificate: Some(CertificateBlock {
                lmi_ok: cert.lmi_ok,
                lambda_sum_max_eigenvalue: cert.lambda_sum_max_eig,
                chi_bound: cert.chi_bound,
                mu: cert.mu,
                beta: cert.beta,
            }),
        });
        out
    }
}

impl Scenario {
    /// Parse and validate `text`; `name` labels diagnostics and reports.
    pub fn load(text: &str, name: &str, ov: &Overrides) -> CliResult<Scenario> {
        let file = ScenarioFile::parse(text).map_err(|e| match e {
            CliError::Input(m) => CliError::Input(format!("{name}: {m}")),
            other => other,
        })?;
        let src = Source { text };

        let a = src.matrix("model.a", &file.model.a)?;
        let n = a.nrows();
        if n == 0 || !a.is_square() {
            return Err(CliError::Input(format!(
                "model.a (line {}): must be a non-empty square matrix, got {}x{}",
                src.line_of(&file.model.a.span()),
                a.nrows(),
                a.ncols()
            )));
        }
        let rect = |field: &str, m: &Option<Rows>| -> CliResult<Matrix> {
            match m {
                None => Ok(Matrix::zeros(n, 0)),
                Some(r) => {
                    let m = src.matrix(field, r)?;
                    if m.nrows() == 0 {
                        return Ok(Matrix::zeros(n, 0));
                    }
                    if m.nrows() != n {
                        return Err(CliError::Input(format!(
                            "{field} (line {}): has {} rows, expected {n}",
                            src.line_of(&r.span()),
                            m.nrows()
                        )));
                    }
                    Ok(m)
                }
            }
        };
        let b = rect("model.b", &file.model.b)?;
        let d = rect("model.d", &file.model.d)?;
        if file.model.nodes.is_empty() {
            return Err(CliError::Input(
                "model.nodes: at least one node is required".into(),
            ));
        }
        let mut outputs = Vec::with_capacity(file.model.nodes.len());
        for (i, node) in file.model.nodes.iter().enumerate() {
            let field = format!("model.nodes[{i}].c");
            let c = src.matrix(&field, &node.c)?;
            if c.ncols() != n || c.nrows() == 0 {
                return Err(CliError::Input(format!(
                    "{field} (line {}): is {}x{}, expected p x {n} with p >= 1",
                    src.line_of(&node.c.span()),
                    c.nrows(),
                    c.ncols()
                )));
            }
            outputs.push((c, node.known_inputs.clone()));
        }
        let model = input("model", SystemModel::from_partition(a, b, d, outputs))?;
        let nodes = model.node_count();

        let file_mode = graph_mode(&file.graph);
        let mode = match ov.mode {
            Some(m) if m != file_mode => {
                return Err(CliError::Input(format!(
                    "--mode {m} does not match the {file_mode} graph block"
                )))
            }
            _ => file_mode,
        };
        let graph = build_graph(&file.graph, nodes)?;

        let design = match &file.design {
            None => None,
            Some(block) => Some(load_design(&src, block, &model)?),
        };

        let r = &file.run;
        let step = ov.step.unwrap_or(r.step);
        let horizon = ov.horizon.unwrap_or(r.horizon);
        if !(step > 0.0 && step.is_finite() && horizon > 0.0 && horizon.is_finite()) {
            return Err(CliError::Input(format!(
                "run: step and horizon must be positive, got {step} and {horizon}"
            )));
        }
        if let CouplingGraph::Switching(s) = &graph {
            input("run.step", s.steps_per_dwell(step))?;
        }
        let feedback_gain = match &r.feedback_gain {
            None => None,
            Some(f) => Some(src.shaped("run.feedback_gain", f, (model.input_dim(), n))?),
        };
        let initial_state = match &r.initial_state {
            None => Vector::zeros(n),
            Some(v) if v.len() == n => Vector::from_column_slice(v),
            Some(v) => {
                return Err(CliError::Input(format!(
                    "run.initial_state: has {} entries, expected {n}",
                    v.len()
                )))
            }
        };
        let initial_observer_states = match &r.initial_observer_states {
            None => Vec::new(),
            Some(zs) => {
                if zs.len() != nodes || zs.iter().any(|z| z.len() != n) {
                    return Err(CliError::Input(format!(
                        "run.initial_observer_states: expected {nodes} vectors of length {n}"
                    )));
                }
                zs.iter().map(|z| Vector::from_column_slice(z)).collect()
            }
        };
        let run = RunSettings {
            horizon,
            step,
            seed: ov.seed.unwrap_or(r.seed),
            feedback_gain,
            noise: match r.noise {
                NoiseBlock::None => NoiseSpec::None,
                NoiseBlock::BandLimitedWhite { power, sample_time } => {
                    NoiseSpec::BandLimitedWhite { power, sample_time }
                }
            },
            exogenous: match r.exogenous {
                ExogenousBlock::Zero => ExogenousInput::Zero,
                ExogenousBlock::Sinusoid {
                    amplitude,
                    angular_frequency,
                } => ExogenousInput::Sinusoid {
                    amplitude,
                    angular_frequency,
                },
            },
            initial_state,
            initial_observer_states,
        };

        let o = &file.options;
        let defaults = Tolerances::default();
        let tol = Tolerances {
            rank_eps: o.rank_eps.unwrap_or(defaults.rank_eps),
            boundary_tol: o.boundary_tol.unwrap_or(defaults.boundary_tol),
        };
        let mut y_overrides = vec![None; nodes];
        for (k, y) in o.y_overrides.iter().enumerate() {
            let field = format!("options.y_overrides[{k}].y");
            let Some(io) = model.nodes.get(y.node) else {
                return Err(CliError::Input(format!(
                    "options.y_overrides[{k}]: node {} outside 0..{nodes}",
                    y.node
                )));
            };
            y_overrides[y.node] = Some(src.shaped(&field, &y.y, (n, io.output_dim()))?);
        }
        let base = DesignOptions::default();
        let design_options = DesignOptions {
            beta0: o.beta0.unwrap_or(base.beta0),
            max_doublings: o.max_doublings.unwrap_or(base.max_doublings),
            beta_headroom: o.beta_headroom.unwrap_or(base.beta_headroom),
            decay_target: o.decay_target.unwrap_or(base.decay_target),
            p_u_scale: o.p_u_scale.unwrap_or(base.p_u_scale),
            chi_safety: ov.safety_factor.or(o.chi_safety).unwrap_or(base.chi_safety),
            y_overrides,
            tol,
        };
        let verify_tol = ov.tol.or(o.verify_tol).unwrap_or(1e-8);
        if !(verify_tol > 0.0 && verify_tol.is_finite()) {
            return Err(CliError::Input(format!(
                "tolerance must be positive, got {verify_tol}"
            )));
        }

        Ok(Scenario {
            name: name.to_string(),
            file,
            model,
            mode,
            graph,
            design,
            run,
            design_options,
            tol,
            verify_tol,
        })
    }

    /// The design block, which must exist and match the graph's mode.
    pub fn require_design(&self) -> CliResult<&LoadedDesign> {
        let d = self
            .design
            .as_ref()
            .ok_or_else(|| CliError::Input(format!("{}: no design block", self.name)))?;
        if d.supplied.mode != self.mode {
            return Err(CliError::Input(format!(
                "design block is for {} coupling but the graph is {}",
                d.supplied.mode, self.mode
            )));
        }
        Ok(d)
    }

    /// The supplied gains as an [`ObserverDesign`], without altering them.
    /// Missing `K` is recovered by least squares and missing `Y, U, V` are
    /// derived from `H`.
    pub fn design_as_given(&self, d: &LoadedDesign) -> CliResult<ObserverDesign> {
        let n = self.model.state_dim();
        let mut nodes = Vec::with_capacity(d.supplied.nodes.len());
        for ((s, io), free) in d
            .supplied
            .nodes
            .iter()
            .zip(&self.model.nodes)
            .zip(&d.free_parameters)
        {
            let k = match &s.k {
                Some(k) => k.clone(),
                None => recover_k(&s.n, &s.h, &self.model.a, &io.c)?,
            };
            let (y, u, v) = match free {
                Some(f) => f.clone(),
                None => {
                    let (_, u, v) = compute_huv(io, &Matrix::zeros(n, io.output_dim()), &self.tol)?;
                    (recover_y(&s.h, &u, &v), u, v)
                }
            };
            nodes.push(NodeGains {
                h: s.h.clone(),
                m: s.m.clone(),
                n: s.n.clone(),
                l: s.l.clone(),
                k,
                p: s.p.clone(),
                y,
                u,
                v,
            });
        }
        Ok(ObserverDesign {
            nodes,
            chi: d.supplied.chi.unwrap_or(0.0),
            mode: d.supplied.mode,
        })
    }
}

fn load_design(src: &Source, block: &DesignBlock, model: &SystemModel) -> CliResult<LoadedDesign> {
    let mode: CouplingMode = block
        .mode
        .parse()
        .map_err(|e| CliError::Input(format!("design.mode: {e}")))?;
    if block.nodes.len() != model.node_count() {
        return Err(CliError::Input(format!(
            "design.nodes: {} entries for {} model nodes",
            block.nodes.len(),
            model.node_count()
        )));
    }
    if let Some(chi) = block.chi {
        if !(chi >= 0.0 && chi.is_finite()) {
            return Err(CliError::Input(format!(
                "design.chi: must be non-negative, got {chi}"
            )));
        }
    }
    let n = model.state_dim();
    let mut nodes = Vec::with_capacity(block.nodes.len());
    let mut free = Vec::with_capacity(block.nodes.len());
    for (i, (g, io)) in block.nodes.iter().zip(&model.nodes).enumerate() {
        let p = io.output_dim();
        let f = |name: &str| format!("design.nodes[{i}].{name}");
        let opt = |name: &str, m: &Option<Rows>, shape| -> CliResult<Option<Matrix>> {
            m.as_ref()
                .map(|r| src.shaped(&f(name), r, shape))
                .transpose()
        };
        nodes.push(SuppliedNode {
            h: src.shaped(&f("h"), &g.h, (n, p))?,
            m: src.shaped(&f("m"), &g.m, (n, n))?,
            n: src.shaped(&f("n"), &g.n, (n, n))?,
            l: src.shaped(&f("l"), &g.l, (n, p))?,
            p: src.shaped(&f("p"), &g.p, (n, n))?,
            k: opt("k", &g.k, (n, p))?,
        });
        let y = opt("y", &g.y, (n, p))?;
        let u = opt("u", &g.u, (n, p))?;
        let v = opt("v", &g.v, (p, p))?;
        free.push(match (y, u, v) {
            (Some(y), Some(u), Some(v)) => Some((y, u, v)),
            _ => None,
        });
    }
    Ok(LoadedDesign {
        supplied: SuppliedDesign {
            nodes,
            chi: block.chi,
            mode,
        },
        free_parameters: free,
        reconcile: block.reconcile,
    })
}
