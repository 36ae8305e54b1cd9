//! Communication topologies and their spectral quantities.
//!
//! Adjacency follows the receiver convention: `a[i][j] = 1` means node `i`
//! receives estimates from node `j`. A directed edge `(from, to)` therefore
//! sets `a[to][from]`. Node indices are zero-based.

use std::collections::VecDeque;

use crate::error::{DuioError, Result};
use crate::linalg::{asymmetry, null_space, symmetric_eigenvalues, Matrix, Vector};

/// Eigenvalues below this are treated as zero in Laplacian spectra.
const SPECTRAL_ZERO: f64 = 1e-10;

/// An unweighted communication graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    adjacency: Matrix,
    directed: bool,
}

impl Topology {
    /// Undirected graph from an edge list; each pair connects both ways.
    pub fn undirected(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut a = Self::empty_adjacency(node_count)?;
        for &(i, j) in edges {
            Self::check_edge(node_count, i, j)?;
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        Ok(Topology {
            adjacency: a,
            directed: false,
        })
    }

    /// Directed graph from `(from, to)` pairs.
    pub fn directed(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut a = Self::empty_adjacency(node_count)?;
        for &(from, to) in edges {
            Self::check_edge(node_count, from, to)?;
            a[(to, from)] = 1.0;
        }
        Ok(Topology {
            adjacency: a,
            directed: true,
        })
    }

    /// Wrap an adjacency matrix with entries in `{0, 1}` and zero diagonal.
    pub fn from_adjacency(adjacency: Matrix, directed: bool) -> Result<Self> {
        let n = adjacency.nrows();
        if n == 0 || !adjacency.is_square() {
            return Err(DuioError::InvalidArgument(format!(
                "adjacency must be a non-empty square matrix, got {:?}",
                adjacency.shape()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = adjacency[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Err(DuioError::InvalidArgument(format!(
                        "adjacency entry ({i}, {j}) = {v} is not 0 or 1"
                    )));
                }
            }
            if adjacency[(i, i)] != 0.0 {
                return Err(DuioError::InvalidArgument(format!("self-loop at node {i}")));
            }
        }
        if !directed && adjacency != adjacency.transpose() {
            return Err(DuioError::InvalidArgument(
                "undirected adjacency must be symmetric".into(),
            ));
        }
        Ok(Topology {
            adjacency,
            directed,
        })
    }

    fn empty_adjacency(n: usize) -> Result<Matrix> {
        if n == 0 {
            return Err(DuioError::InvalidArgument(
                "graph needs at least one node".into(),
            ));
        }
        Ok(Matrix::zeros(n, n))
    }

    fn check_edge(n: usize, i: usize, j: usize) -> Result<()> {
        if i >= n || j >= n {
            return Err(DuioError::InvalidArgument(format!(
                "edge ({i}, {j}) refers to a node outside 0..{n}"
            )));
        }
        if i == j {
            return Err(DuioError::InvalidArgument(format!("self-loop at node {i}")));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn adjacency(&self) -> &Matrix {
        &self.adjacency
    }

    /// Edges as `(from, to)` pairs; undirected edges are listed once with
    /// `from < to`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.node_count();
        let mut out = Vec::new();
        for to in 0..n {
            for from in 0..n {
                if self.adjacency[(to, from)] == 1.0 && (self.directed || from < to) {
                    out.push((from, to));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Graph Laplacian `D - A` with in-degrees on the diagonal.
    pub fn laplacian(&self) -> Matrix {
        let n = self.node_count();
        let mut l = -self.adjacency.clone();
        for i in 0..n {
            l[(i, i)] = self.adjacency.row(i).sum();
        }
        l
    }

    /// Breadth-first reachability following edges forward (`from -> to`),
    /// or backward when `reverse` is set.
    fn reach_all(&self, reverse: bool) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for (v, s) in seen.iter_mut().enumerate() {
                let linked = if reverse {
                    self.adjacency[(u, v)] == 1.0
                } else {
                    self.adjacency[(v, u)] == 1.0
                };
                if linked && !*s {
                    *s = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Connectivity of the underlying undirected graph.
    pub fn is_connected(&self) -> bool {
        if !self.directed {
            return self.reach_all(false);
        }
        let sym = (&self.adjacency + self.adjacency.transpose()).map(|v| v.min(1.0));
        Topology {
            adjacency: sym,
            directed: false,
        }
        .reach_all(false)
    }

    /// Every node reaches every other along directed edges.
    pub fn is_strongly_connected(&self) -> bool {
        self.reach_all(false) && self.reach_all(true)
    }
}

/// Second-smallest eigenvalue of a symmetric Laplacian-like matrix.
pub fn algebraic_connectivity(l: &Matrix) -> Result<f64> {
    if !l.is_square() || l.nrows() < 2 {
        return Err(DuioError::InvalidArgument(format!(
            "algebraic connectivity needs a square matrix with at least two rows, got {:?}",
            l.shape()
        )));
    }
    let asym = asymmetry(l);
    if asym > 1e-12 * l.norm().max(1.0) {
        return Err(DuioError::RequiresSymmetric { asymmetry: asym });
    }
    Ok(symmetric_eigenvalues(l)[1])
}

/// Lower bound `2 / (N^2 (N - 1))` on the algebraic connectivity of any
/// connected undirected graph with `N` nodes.
pub fn connectivity_floor(node_count: usize) -> Result<f64> {
    if node_count < 2 {
        return Err(DuioError::InvalidArgument(format!(
            "connectivity floor needs at least two nodes, got {node_count}"
        )));
    }
    let n = node_count as f64;
    Ok(2.0 / (n * n * (n - 1.0)))
}

/// Left Perron weighting of a strongly connected digraph.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronWeighting {
    /// Positive left null vector of the Laplacian with `r . 1 = N`.
    pub r: Vector,
    /// `R L + L^T R` with `R = diag(r)`.
    pub l_hat: Matrix,
}

impl PerronWeighting {
    pub fn r_matrix(&self) -> Matrix {
        Matrix::from_diagonal(&self.r)
    }
}

/// Perron weights `r` with `r L = 0`, `r . 1 = N` and the symmetrized
/// Laplacian `L_hat = R L + L^T R`.
pub fn perron_weights(t: &Topology) -> Result<PerronWeighting> {
    if !t.is_strongly_connected() {
        return Err(DuioError::RequiresStrongConnectivity);
    }
    let n = t.node_count();
    let l = t.laplacian();
    if n == 1 {
        return Ok(PerronWeighting {
            r: Vector::from_element(1, 1.0),
            l_hat: Matrix::zeros(1, 1),
        });
    }
    let scale = l.norm().max(1.0);
    let kernel = null_space(&l.transpose(), 1e-9 * scale);
    if kernel.ncols() != 1 {
        return Err(DuioError::NonSimpleZeroEigenvalue {
            multiplicity: kernel.ncols(),
        });
    }
    let v = kernel.column(0).into_owned();
    let r = &v * (n as f64 / v.sum());
    if r.iter().any(|&x| x <= 0.0) {
        return Err(DuioError::EigenSolverFailure(
            "left null vector of the Laplacian is not positive".into(),
        ));
    }
    let rm = Matrix::from_diagonal(&r);
    let l_hat = &rm * &l + l.transpose() * &rm;
    let ev = symmetric_eigenvalues(&l_hat);
    let zeros = ev
        .iter()
        .filter(|&&x| x.abs() <= SPECTRAL_ZERO * scale)
        .count();
    if zeros != 1 || ev[0] < -SPECTRAL_ZERO * scale {
        return Err(DuioError::NonSimpleZeroEigenvalue {
            multiplicity: zeros,
        });
    }
    Ok(PerronWeighting { r, l_hat })
}

/// A cyclic sequence of undirected topologies with a fixed dwell time.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSchedule {
    topologies: Vec<Topology>,
    dwell_time: f64,
    start_index: usize,
}

impl SwitchingSchedule {
    /// Validates a non-empty list of connected undirected topologies over a
    /// common node set.
    pub fn new(topologies: Vec<Topology>, dwell_time: f64, start_index: usize) -> Result<Self> {
        let first = topologies.first().ok_or_else(|| {
            DuioError::InvalidArgument("switching schedule has no topologies".into())
        })?;
        if !(dwell_time > 0.0 && dwell_time.is_finite()) {
            return Err(DuioError::InvalidArgument(format!(
                "dwell time must be positive, got {dwell_time}"
            )));
        }
        if start_index >= topologies.len() {
            return Err(DuioError::InvalidArgument(format!(
                "start index {start_index} outside the {} listed topologies",
                topologies.len()
            )));
        }
        let n = first.node_count();
        for (k, t) in topologies.iter().enumerate() {
            if t.node_count() != n {
                return Err(DuioError::DimensionMismatch(format!(
                    "topology {k} has {} nodes, expected {n}",
                    t.node_count()
                )));
            }
            if t.is_directed() {
                return Err(DuioError::InvalidArgument(format!(
                    "switching topology {k} is directed"
                )));
            }
            if !t.is_connected() {
                return Err(DuioError::RequiresConnectivity { index: k });
            }
        }
        Ok(SwitchingSchedule {
            topologies,
            dwell_time,
            start_index,
        })
    }

    pub fn topologies(&self) -> &[Topology] {
        &self.topologies
    }

    pub fn dwell_time(&self) -> f64 {
        self.dwell_time
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn node_count(&self) -> usize {
        self.topologies[0].node_count()
    }

    /// Index of the topology active at time `t >= 0`.
    pub fn active_index(&self, t: f64) -> usize {
        // tolerate rounding in t when it lands on a switching instant
        let slots = ((t / self.dwell_time) * (1.0 + 1e-12)).floor().max(0.0) as usize;
        (self.start_index + slots) % self.topologies.len()
    }

    /// Number of integration steps per dwell interval; the dwell time must be
    /// an integer multiple of `step`.
    pub fn steps_per_dwell(&self, step: f64) -> Result<usize> {
        let m = (self.dwell_time / step).round();
        if m < 1.0 || (m * step - self.dwell_time).abs() > 1e-9 * self.dwell_time {
            return Err(DuioError::InvalidArgument(format!(
                "dwell time {} is not an integer multiple of the step {step}",
                self.dwell_time
            )));
        }
        Ok(m as usize)
    }

    /// Index of the topology active during integration step `k`.
    pub fn active_index_at_step(&self, k: usize, steps_per_dwell: usize) -> usize {
        (self.start_index + k / steps_per_dwell) % self.topologies.len()
    }
}
