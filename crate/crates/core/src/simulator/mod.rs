//! Fixed-step RK4 simulation of the plant and the observer network.
//!
//! Closed loop: `u = -F x + w_u(t)`, disturbance `w = noise(t) + w_d(t)`.
//! Every node knows the applied values of its own input columns. The coupled
//! plant and observer states form one linear system per active topology,
//! which is assembled once and integrated with classical RK4.

mod export;
mod metrics;

pub use export::{trace_csv_header, write_trace_csv};
pub use metrics::{error_metrics, ErrorMetrics, NodeMetrics};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::designer::{CouplingGraph, ObserverDesign};
use crate::error::{DuioError, Result};
use crate::graph::Topology;
use crate::linalg::{eigenvalues, Complex64, Matrix, Vector};
use crate::model::SystemModel;

/// Disturbance noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    None,
    /// Zero-order-hold Gaussian samples with variance `power / sample_time`.
    BandLimitedWhite {
        power: f64,
        sample_time: f64,
    },
}

/// Deterministic exogenous signal added to every input channel, control
/// columns first, then disturbance columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExogenousInput {
    Zero,
    /// `amplitude * sin(angular_frequency * t)` on every channel.
    Sinusoid {
        amplitude: f64,
        angular_frequency: f64,
    },
}

impl ExogenousInput {
    fn value(&self, t: f64) -> f64 {
        match *self {
            ExogenousInput::Zero => 0.0,
            ExogenousInput::Sinusoid {
                amplitude,
                angular_frequency,
            } => amplitude * (angular_frequency * t).sin(),
        }
    }
}

/// Everything needed for one run.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub model: SystemModel,
    pub design: ObserverDesign,
    pub graph: CouplingGraph,
    /// State feedback `u = -F x`; `None` leaves the control at `w_u`.
    pub feedback_gain: Option<Matrix>,
    pub noise: NoiseSpec,
    pub exogenous: ExogenousInput,
    pub horizon: f64,
    pub step: f64,
    pub initial_plant_state: Vector,
    /// Initial `z_i`; empty means all zero.
    pub initial_observer_states: Vec<Vector>,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Config with zero noise, zero exogenous input, zero initial states.
    pub fn new(
        model: SystemModel,
        design: ObserverDesign,
        graph: CouplingGraph,
        horizon: f64,
        step: f64,
    ) -> Self {
        let n = model.state_dim();
        ScenarioConfig {
            model,
            design,
            graph,
            feedback_gain: None,
            noise: NoiseSpec::None,
            exogenous: ExogenousInput::Zero,
            horizon,
            step,
            initial_plant_state: Vector::zeros(n),
            initial_observer_states: Vec::new(),
            seed: 0,
        }
    }

    /// Number of integration steps.
    pub fn step_count(&self) -> usize {
        ((self.horizon / self.step) * (1.0 + 1e-12)).floor() as usize
    }

    /// Structural checks; does not check RK4 stability.
    pub fn validate(&self) -> Result<()> {
        let n = self.model.state_dim();
        let nodes = self.model.node_count();
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(DuioError::InvalidArgument(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.horizon >= self.step && self.horizon.is_finite()) {
            return Err(DuioError::InvalidArgument(format!(
                "horizon {} must be at least the step {}",
                self.horizon, self.step
            )));
        }
        if self.design.node_count() != nodes || self.graph.node_count() != nodes {
            return Err(DuioError::DimensionMismatch(format!(
                "model has {nodes} nodes, design {}, graph {}",
                self.design.node_count(),
                self.graph.node_count()
            )));
        }
        if self.design.mode != self.graph.mode() {
            return Err(DuioError::ModeMismatch(format!(
                "design is for {} coupling, graph is {}",
                self.design.mode,
                self.graph.mode()
            )));
        }
        for (i, (g, io)) in self.design.nodes.iter().zip(&self.model.nodes).enumerate() {
            let p = io.output_dim();
            let ok = g.n.shape() == (n, n)
                && g.m.shape() == (n, n)
                && g.p.shape() == (n, n)
                && g.h.shape() == (n, p)
                && g.l.shape() == (n, p);
            if !ok {
                return Err(DuioError::DimensionMismatch(format!(
                    "gains of node {} do not match the model dimensions",
                    i
                )));
            }
        }
        if let Some(f) = &self.feedback_gain {
            if f.shape() != (self.model.input_dim(), n) {
                return Err(DuioError::DimensionMismatch(format!(
                    "feedback gain is {}x{}, expected {}x{n}",
                    f.nrows(),
                    f.ncols(),
                    self.model.input_dim()
                )));
            }
        }
        if self.initial_plant_state.len() != n {
            return Err(DuioError::DimensionMismatch(format!(
                "initial plant state has length {}, expected {n}",
                self.initial_plant_state.len()
            )));
        }
        if !self.initial_observer_states.is_empty()
            && (self.initial_observer_states.len() != nodes
                || self.initial_observer_states.iter().any(|z| z.len() != n))
        {
            return Err(DuioError::DimensionMismatch(format!(
                "expected {nodes} initial observer states of length {n}"
            )));
        }
        if let NoiseSpec::BandLimitedWhite { power, sample_time } = self.noise {
            if !(power >= 0.0 && power.is_finite()) {
                return Err(DuioError::InvalidArgument(format!(
                    "noise power must be non-negative, got {power}"
                )));
            }
            if !(sample_time >= self.step * (1.0 - 1e-12) && sample_time.is_finite()) {
                return Err(DuioError::InvalidArgument(format!(
                    "noise sample time {sample_time} is shorter than the step {}",
                    self.step
                )));
            }
        }
        if let CouplingGraph::Switching(s) = &self.graph {
            s.steps_per_dwell(self.step)?;
        }
        Ok(())
    }
}

/// Time series of one run, one sample per integration step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub x: Vec<Vector>,
    /// `x_hat[k][i]`: estimate of node `i` at sample `k`.
    pub x_hat: Vec<Vec<Vector>>,
    /// `e[k][i] = x[k] - x_hat[k][i]`.
    pub e: Vec<Vec<Vector>>,
    pub v: Vec<f64>,
    /// Topology index in force during the step that starts at each sample.
    pub active_topology: Vec<usize>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.e.first().map_or(0, |e| e.len())
    }

    /// `||e(t)||` over the stacked error of all nodes.
    pub fn error_norms(&self) -> Vec<f64> {
        self.e
            .iter()
            .map(|ek| ek.iter().map(|ei| ei.norm_squared()).sum::<f64>().sqrt())
            .collect()
    }
}

/// The topologies a graph can activate, with their node weights.
fn topologies(graph: &CouplingGraph) -> Vec<&Topology> {
    match graph {
        CouplingGraph::Undirected(t) => vec![t],
        CouplingGraph::Switching(s) => s.topologies().iter().collect(),
        CouplingGraph::Directed { topology, .. } => vec![topology],
    }
}

fn p_inverses(design: &ObserverDesign) -> Result<Vec<Matrix>> {
    design
        .nodes
        .iter()
        .enumerate()
        .map(|(i, g)| {
            g.p.clone().cholesky().map(|c| c.inverse()).ok_or_else(|| {
                DuioError::InvalidArgument(format!("P of node {} is not positive definite", i))
            })
        })
        .collect()
}

/// Block matrix of the error dynamics
/// `e_i' = N_i e_i + chi r_i P_i^{-1} sum_j a_ij (e_j - e_i)` on topology `t`.
pub fn error_system_matrix(
    design: &ObserverDesign,
    t: &Topology,
    weights: &[f64],
) -> Result<Matrix> {
    let p_inv = p_inverses(design)?;
    Ok(coupled_block(design, &p_inv, t, weights))
}

fn coupled_block(
    design: &ObserverDesign,
    p_inv: &[Matrix],
    t: &Topology,
    weights: &[f64],
) -> Matrix {
    let nodes = design.node_count();
    let n = design.nodes.first().map_or(0, |g| g.n.nrows());
    let adj = t.adjacency();
    let mut m = Matrix::zeros(nodes * n, nodes * n);
    for i in 0..nodes {
        let gain = &p_inv[i] * (design.chi * weights[i]);
        let degree: f64 = (0..nodes).map(|j| adj[(i, j)]).sum();
        let diag = &design.nodes[i].n - &gain * degree;
        m.view_mut((i * n, i * n), (n, n)).copy_from(&diag);
        for j in 0..nodes {
            if j != i && adj[(i, j)] != 0.0 {
                m.view_mut((i * n, j * n), (n, n))
                    .copy_from(&(&gain * adj[(i, j)]));
            }
        }
    }
    m
}

/// Linear system `s' = A_sys s + G_sys v` with `s = [x; z_1; ...; z_N]` and
/// `v = [w_u; w]` (exogenous control part, total disturbance).
struct LinearSystem {
    a: Vec<Matrix>,
    g: Matrix,
}

fn assemble(cfg: &ScenarioConfig) -> Result<LinearSystem> {
    let model = &cfg.model;
    let design = &cfg.design;
    let n = model.state_dim();
    let m_in = model.input_dim();
    let q = model.disturbance_dim();
    let nodes = model.node_count();
    let dim = n * (nodes + 1);
    let p_inv = p_inverses(design)?;
    let weights = cfg.graph.node_weights();
    let f = cfg
        .feedback_gain
        .clone()
        .unwrap_or_else(|| Matrix::zeros(m_in, n));

    let mut g = Matrix::zeros(dim, m_in + q);
    g.view_mut((0, 0), (n, m_in)).copy_from(&model.b);
    g.view_mut((0, m_in), (n, q)).copy_from(&model.d);

    // parts that do not depend on the topology
    let mut base = Matrix::zeros(dim, dim);
    base.view_mut((0, 0), (n, n))
        .copy_from(&(&model.a - &model.b * &f));
    let mut known_b = Vec::with_capacity(nodes);
    for (i, (gains, io)) in design.nodes.iter().zip(&model.nodes).enumerate() {
        // M_i B_i S_i, with S_i selecting the known columns out of u
        let mut mbs = Matrix::zeros(n, m_in);
        for (k, &col) in io.known_columns.iter().enumerate() {
            mbs.set_column(col, &(&gains.m * io.b_known.column(k)));
        }
        let x_coeff = &gains.l * &io.c - &mbs * &f;
        base.view_mut(((i + 1) * n, 0), (n, n)).copy_from(&x_coeff);
        g.view_mut(((i + 1) * n, 0), (n, m_in)).copy_from(&mbs);
        known_b.push(mbs);
    }

    let hc: Vec<Matrix> = design
        .nodes
        .iter()
        .zip(&model.nodes)
        .map(|(gains, io)| &gains.h * &io.c)
        .collect();
    let mut a = Vec::new();
    for t in topologies(&cfg.graph) {
        let mut sys = base.clone();
        let block = coupled_block(design, &p_inv, t, &weights);
        sys.view_mut((n, n), (nodes * n, nodes * n))
            .copy_from(&block);
        // the consensus term also sees x through x_hat_j = z_j + H_j C_j x
        let adj = t.adjacency();
        for i in 0..nodes {
            let mut acc = Matrix::zeros(n, n);
            for j in 0..nodes {
                if j != i && adj[(i, j)] != 0.0 {
                    acc += (&hc[j] - &hc[i]) * adj[(i, j)];
                }
            }
            let coupling = &p_inv[i] * (design.chi * weights[i]) * acc;
            let mut view = sys.view_mut(((i + 1) * n, 0), (n, n));
            view += coupling;
        }
        a.push(sys);
    }
    Ok(LinearSystem { a, g })
}

/// RK4 amplification `1 + z + z^2/2 + z^3/6 + z^4/24`.
fn rk4_gain(z: Complex64) -> f64 {
    let z2 = z * z;
    (Complex64::new(1.0, 0.0) + z + z2 / 2.0 + z2 * z / 6.0 + z2 * z2 / 24.0).norm()
}

fn rk4_stable(eigs: &[Complex64], h: f64) -> bool {
    eigs.iter()
        .filter(|l| l.re < 0.0)
        .all(|&l| rk4_gain(l * h) <= 1.0 + 1e-12)
}

/// Largest step for which RK4 keeps every decaying mode of the matrices
/// decaying. Modes with non-negative real part are ignored.
pub fn max_stable_step(matrices: &[Matrix]) -> Result<f64> {
    let mut eigs = Vec::new();
    for m in matrices {
        eigs.extend(eigenvalues(m)?);
    }
    let radius = eigs
        .iter()
        .filter(|l| l.re < 0.0)
        .map(|l| l.norm())
        .fold(0.0, f64::max);
    if radius == 0.0 {
        return Ok(f64::INFINITY);
    }
    // the RK4 stability region lies inside |z| < 2.9
    let (mut lo, mut hi) = (0.0, 2.9 / radius);
    if rk4_stable(&eigs, hi) {
        return Ok(hi);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if rk4_stable(&eigs, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn noise_samples(cfg: &ScenarioConfig) -> (Vec<Vector>, f64) {
    let q = cfg.model.disturbance_dim();
    match cfg.noise {
        NoiseSpec::BandLimitedWhite { power, sample_time } if power > 0.0 && q > 0 => {
            let count = (cfg.horizon / sample_time).floor() as usize + 1;
            let normal = Normal::new(0.0, (power / sample_time).sqrt()).expect("finite deviation");
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let samples = (0..count)
                .map(|_| Vector::from_fn(q, |_, _| normal.sample(&mut rng)))
                .collect();
            (samples, sample_time)
        }
        _ => (Vec::new(), f64::INFINITY),
    }
}

fn observer_split(cfg: &ScenarioConfig, s: &Vector) -> (Vector, Vec<Vector>, Vec<Vector>, f64) {
    let n = cfg.model.state_dim();
    let x = s.rows(0, n).into_owned();
    let mut x_hat = Vec::with_capacity(cfg.model.node_count());
    let mut e = Vec::with_capacity(cfg.model.node_count());
    let mut v = 0.0;
    for (i, (g, io)) in cfg.design.nodes.iter().zip(&cfg.model.nodes).enumerate() {
        let z = s.rows((i + 1) * n, n);
        let xh = z + &g.h * (&io.c * &x);
        let ei = &x - &xh;
        v += ei.dot(&(&g.p * &ei));
        x_hat.push(xh);
        e.push(ei);
    }
    (x, x_hat, e, v)
}

/// Integrate the configured scenario.
pub fn simulate(cfg: &ScenarioConfig) -> Result<SimulationTrace> {
    cfg.validate()?;
    let sys = assemble(cfg)?;
    let h = cfg.step;
    let limit = max_stable_step(&sys.a)?;
    if h > limit {
        return Err(DuioError::StepTooLarge {
            step: h,
            max_stable_step: limit,
        });
    }

    let n = cfg.model.state_dim();
    let nodes = cfg.model.node_count();
    let m_in = cfg.model.input_dim();
    let q = cfg.model.disturbance_dim();
    let mut s = Vector::zeros(n * (nodes + 1));
    s.rows_mut(0, n).copy_from(&cfg.initial_plant_state);
    for (i, z) in cfg.initial_observer_states.iter().enumerate() {
        s.rows_mut((i + 1) * n, n).copy_from(z);
    }

    let (noise, noise_dt) = noise_samples(cfg);
    let switching = match &cfg.graph {
        CouplingGraph::Switching(sched) => Some((sched, sched.steps_per_dwell(h)?)),
        _ => None,
    };
    let active_at = |k: usize| switching.map_or(0, |(sched, m)| sched.active_index_at_step(k, m));

    let steps = cfg.step_count();
    let mut trace = SimulationTrace {
        times: Vec::with_capacity(steps + 1),
        x: Vec::with_capacity(steps + 1),
        x_hat: Vec::with_capacity(steps + 1),
        e: Vec::with_capacity(steps + 1),
        v: Vec::with_capacity(steps + 1),
        active_topology: Vec::with_capacity(steps + 1),
    };
    let record = |t: f64, s: &Vector, active: usize, trace: &mut SimulationTrace| {
        let (x, x_hat, e, v) = observer_split(cfg, s);
        trace.times.push(t);
        trace.x.push(x);
        trace.x_hat.push(x_hat);
        trace.e.push(e);
        trace.v.push(v);
        trace.active_topology.push(active);
    };
    record(0.0, &s, active_at(0), &mut trace);

    let input = |t: f64, held: &Vector| -> Vector {
        let w = cfg.exogenous.value(t);
        let mut v = Vector::from_element(m_in + q, w);
        for c in 0..q {
            v[m_in + c] += held[c];
        }
        v
    };
    let zero_noise = Vector::zeros(q);
    for k in 0..steps {
        let t = k as f64 * h;
        let a = &sys.a[active_at(k)];
        // noise held at the sample covering the start of the step
        let held = if noise.is_empty() {
            &zero_noise
        } else {
            let idx = ((t / noise_dt) * (1.0 + 1e-12)).floor() as usize;
            &noise[idx.min(noise.len() - 1)]
        };
        let f = |state: &Vector, tau: f64| a * state + &sys.g * input(tau, held);
        let k1 = f(&s, t);
        let k2 = f(&(&s + &k1 * (h / 2.0)), t + h / 2.0);
        let k3 = f(&(&s + &k2 * (h / 2.0)), t + h / 2.0);
        let k4 = f(&(&s + &k3 * h), t + h);
        s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let t_next = (k + 1) as f64 * h;
        if s.iter().any(|v| !v.is_finite() || v.abs() > 1e150) {
            return Err(DuioError::BlowUp { time: t_next });
        }
        record(t_next, &s, active_at(k + 1), &mut trace);
    }
    Ok(trace)
}

/// `V(t) = sum_i e_i^T P_i e_i` per sample.
pub fn lyapunov_trace(trace: &SimulationTrace, design: &ObserverDesign) -> Result<Vec<f64>> {
    if trace.node_count() != design.node_count() && !trace.is_empty() {
        return Err(DuioError::DimensionMismatch(format!(
            "trace has {} nodes, design {}",
            trace.node_count(),
            design.node_count()
        )));
    }
    Ok(trace
        .e
        .iter()
        .map(|ek| {
            ek.iter()
                .zip(&design.nodes)
                .map(|(ei, g)| ei.dot(&(&g.p * ei)))
                .sum()
        })
        .collect())
}

/// Run the scenario under two exogenous signals and return the largest
/// `||e_i^a(t) - e_i^b(t)||` over time and nodes.
pub fn decoupling_probe(
    cfg: &ScenarioConfig,
    w_a: ExogenousInput,
    w_b: ExogenousInput,
) -> Result<f64> {
    let mut a = cfg.clone();
    a.exogenous = w_a;
    let mut b = cfg.clone();
    b.exogenous = w_b;
    let ta = simulate(&a)?;
    let tb = simulate(&b)?;
    Ok(ta
        .e
        .iter()
        .zip(&tb.e)
        .flat_map(|(ea, eb)| ea.iter().zip(eb).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max))
}

/// Integrate the closed-form error ODE directly (RK4, same schedule as
/// [`simulate`]). Returns `e[k][i]`.
pub fn integrate_error_dynamics(
    design: &ObserverDesign,
    graph: &CouplingGraph,
    initial_errors: &[Vector],
    step: f64,
    horizon: f64,
) -> Result<Vec<Vec<Vector>>> {
    let nodes = design.node_count();
    if initial_errors.len() != nodes || graph.node_count() != nodes {
        return Err(DuioError::DimensionMismatch(format!(
            "{} initial errors for {nodes} nodes on a {}-node graph",
            initial_errors.len(),
            graph.node_count()
        )));
    }
    if !(step > 0.0 && horizon >= step) {
        return Err(DuioError::InvalidArgument(format!(
            "need 0 < step <= horizon, got step {step}, horizon {horizon}"
        )));
    }
    let n = design.nodes[0].n.nrows();
    let p_inv = p_inverses(design)?;
    let weights = graph.node_weights();
    let mats: Vec<Matrix> = topologies(graph)
        .into_iter()
        .map(|t| coupled_block(design, &p_inv, t, &weights))
        .collect();
    let switching = match graph {
        CouplingGraph::Switching(s) => Some((s, s.steps_per_dwell(step)?)),
        _ => None,
    };
    let split = |s: &Vector| {
        (0..nodes)
            .map(|i| s.rows(i * n, n).into_owned())
            .collect::<Vec<_>>()
    };
    let mut s = Vector::zeros(nodes * n);
    for (i, e) in initial_errors.iter().enumerate() {
        if e.len() != n {
            return Err(DuioError::DimensionMismatch(format!(
                "initial error {} has length {}, expected {n}",
                i,
                e.len()
            )));
        }
        s.rows_mut(i * n, n).copy_from(e);
    }
    let steps = ((horizon / step) * (1.0 + 1e-12)).floor() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(split(&s));
    for k in 0..steps {
        let a = &mats[switching.map_or(0, |(sched, m)| sched.active_index_at_step(k, m))];
        let k1 = a * &s;
        let k2 = a * (&s + &k1 * (step / 2.0));
        let k3 = a * (&s + &k2 * (step / 2.0));
        let k4 = a * (&s + &k3 * step);
        s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0);
        out.push(split(&s));
    }
    Ok(out)
}
