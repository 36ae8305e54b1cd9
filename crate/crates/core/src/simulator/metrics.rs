//! Convergence summaries of a simulation trace.

use super::SimulationTrace;
use crate::error::{DuioError, Result};

/// Relative error level used for settling times.
pub const SETTLING_LEVEL: f64 = 1e-3;

/// Per-node error summary.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetrics {
    pub initial: f64,
    pub peak: f64,
    pub terminal: f64,
    /// First time after which `||e_i|| <= 1e-3 ||e_i(0)||` holds for good.
    pub settling_time: Option<f64>,
}

/// Network-level error summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMetrics {
    pub nodes: Vec<NodeMetrics>,
    /// Norm of the stacked error at the first sample.
    pub initial_norm: f64,
    pub peak_norm: f64,
    pub terminal_norm: f64,
    /// `terminal_norm / initial_norm`, zero when the initial error is zero.
    pub terminal_relative: f64,
    /// First time after which `||e|| <= 1e-3 ||e(0)||` holds for good.
    pub settling_time: Option<f64>,
    /// `V` never increases by more than rounding.
    pub v_monotone: bool,
    /// Largest single-step increase of `V`, relative to `V(0)`.
    pub v_max_increase: f64,
    /// The error ended larger than it started, or became non-finite.
    pub diverged: bool,
}

fn settling(times: &[f64], norms: &[f64], level: f64) -> Option<f64> {
    let last_above = norms.iter().rposition(|&v| !(v <= level));
    match last_above {
        None => times.first().copied(),
        Some(k) if k + 1 < times.len() => Some(times[k + 1]),
        Some(_) => None,
    }
}

/// Summarize a non-empty trace.
pub fn error_metrics(trace: &SimulationTrace) -> Result<ErrorMetrics> {
    if trace.is_empty() {
        return Err(DuioError::InvalidArgument("trace is empty".into()));
    }
    let norms = trace.error_norms();
    let initial_norm = norms[0];
    let terminal_norm = *norms.last().expect("non-empty");
    let peak_norm = norms.iter().copied().fold(0.0, f64::max);
    let nodes = (0..trace.node_count())
        .map(|i| {
            let series: Vec<f64> = trace.e.iter().map(|ek| ek[i].norm()).collect();
            let initial = series[0];
            NodeMetrics {
                initial,
                peak: series.iter().copied().fold(0.0, f64::max),
                terminal: *series.last().expect("non-empty"),
                settling_time: settling(&trace.times, &series, SETTLING_LEVEL * initial),
            }
        })
        .collect();
    let v0 = trace.v[0];
    let v_max_increase = trace.v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
        / if v0 > 0.0 { v0 } else { 1.0 };
    let finite = norms.iter().all(|v| v.is_finite());
    Ok(ErrorMetrics {
        nodes,
        initial_norm,
        peak_norm,
        terminal_norm,
        terminal_relative: if initial_norm > 0.0 {
            terminal_norm / initial_norm
        } else {
            0.0
        },
        settling_time: settling(&trace.times, &norms, SETTLING_LEVEL * initial_norm),
        v_monotone: v_max_increase <= 1e-12,
        v_max_increase,
        diverged: !finite || terminal_norm > initial_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;

    fn trace_from(norms: &[f64]) -> SimulationTrace {
        let k = norms.len();
        SimulationTrace {
            times: (0..k).map(|i| i as f64 * 0.1).collect(),
            x: vec![Vector::zeros(1); k],
            x_hat: vec![vec![Vector::zeros(1)]; k],
            e: norms
                .iter()
                .map(|&v| vec![Vector::from_element(1, v)])
                .collect(),
            v: norms.iter().map(|v| v * v).collect(),
            active_topology: vec![0; k],
        }
    }

    #[test]
    fn zero_trace_has_zero_metrics() {
        let m = error_metrics(&trace_from(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(m.terminal_norm, 0.0);
        assert_eq!(m.peak_norm, 0.0);
        assert_eq!(m.terminal_relative, 0.0);
        assert_eq!(m.settling_time, Some(0.0));
        assert!(m.v_monotone && !m.diverged);
    }

    #[test]
    fn decaying_trace_settles() {
        let m = error_metrics(&trace_from(&[1.0, 0.5, 1e-2, 1e-4, 1e-6])).unwrap();
        assert!((m.settling_time.unwrap() - 0.3).abs() < 1e-12);
        assert!(m.terminal_relative <= 1e-6);
        assert!(m.v_monotone && !m.diverged);
    }

    #[test]
    fn growing_trace_is_flagged() {
        let m = error_metrics(&trace_from(&[1.0, 2.0, 8.0])).unwrap();
        assert!(m.diverged && !m.v_monotone);
        assert_eq!(m.settling_time, None);
        assert!(error_metrics(&trace_from(&[])).is_err());
    }
}
