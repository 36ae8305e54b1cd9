//! SVG plots of a simulation trace.

use std::path::Path;

use duio_core::simulator::SimulationTrace;
use plotters::prelude::*;

use crate::error::{CliError, CliResult};

/// Plotted points per series; longer traces are thinned evenly.
const MAX_POINTS: usize = 2000;

fn plot_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(format!("plotting: {e}"))
}

fn sample_indices(len: usize) -> Vec<usize> {
    let stride = len.div_ceil(MAX_POINTS).max(1);
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = (hi - lo).max(1e-12);
    (lo - 0.05 * span, hi + 0.05 * span)
}

/// One panel per state: the true state and every node's estimate.
pub fn plot_states(trace: &SimulationTrace, path: &Path) -> CliResult<()> {
    let n = trace.x[0].len();
    let nodes = trace.node_count();
    let cols = if n > 1 { 2 } else { 1 };
    let rows = n.div_ceil(cols);
    let root = SVGBackend::new(path, (1200, 280 * rows as u32)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let idx = sample_indices(trace.len());
    let t_end = *trace.times.last().unwrap_or(&1.0);
    for (k, area) in root.split_evenly((rows, cols)).iter().enumerate().take(n) {
        let series = |f: &dyn Fn(usize) -> f64| -> Vec<(f64, f64)> {
            idx.iter().map(|&s| (trace.times[s], f(s))).collect()
        };
        let truth = series(&|s| trace.x[s][k]);
        let estimates: Vec<Vec<(f64, f64)>> = (0..nodes)
            .map(|i| series(&|s| trace.x_hat[s][i][k]))
            .collect();
        let (lo, hi) = truth
            .iter()
            .chain(estimates.iter().flatten())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.1), hi.max(p.1))
            });
        let (lo, hi) = padded(lo, hi);
        let mut chart = ChartBuilder::on(area)
            .caption(format!("x{}", k + 1), ("sans-serif", 18))
            .margin(8)
            .x_label_area_size(28)
            .y_label_area_size(60)
            .build_cartesian_2d(0.0..t_end, lo..hi)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc("t [s]")
            .draw()
            .map_err(plot_err)?;
        for (i, est) in estimates.into_iter().enumerate() {
            let color = Palette99::pick(i + 1).to_rgba();
            chart
                .draw_series(LineSeries::new(est, color.stroke_width(1)))
                .map_err(plot_err)?
                .label(format!("node {i}"))
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color));
        }
        chart
            .draw_series(LineSeries::new(truth, BLACK.stroke_width(2)))
            .map_err(plot_err)?
            .label("true")
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], BLACK));
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
    }
    root.present().map_err(plot_err)
}

/// `V(t)` on a log scale, with the envelope `exp(-mu t) V(0)` when `mu` is known.
pub fn plot_lyapunov(trace: &SimulationTrace, mu: Option<f64>, path: &Path) -> CliResult<()> {
    let root = SVGBackend::new(path, (900, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let idx = sample_indices(trace.len());
    let v0 = trace.v[0];
    let floor = trace
        .v
        .iter()
        .copied()
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min)
        .min(v0)
        .max(f64::MIN_POSITIVE);
    let v: Vec<(f64, f64)> = idx
        .iter()
        .map(|&s| (trace.times[s], trace.v[s].max(floor)))
        .collect();
    let envelope: Option<Vec<(f64, f64)>> = mu.map(|mu| {
        idx.iter()
            .map(|&s| {
                (
                    trace.times[s],
                    ((-mu * trace.times[s]).exp() * v0).max(floor),
                )
            })
            .collect()
    });
    let hi = v
        .iter()
        .chain(envelope.iter().flatten())
        .map(|p| p.1)
        .fold(floor, f64::max);
    let t_end = *trace.times.last().unwrap_or(&1.0);
    let mut chart = ChartBuilder::on(&root)
        .caption("Lyapunov function", ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(32)
        .y_label_area_size(70)
        .build_cartesian_2d(0.0..t_end, (floor * 0.5..hi * 2.0).log_scale())
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("t [s]")
        .y_desc("V")
        .y_label_formatter(&|v| format!("{v:.0e}"))
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(v, BLUE.stroke_width(2)))
        .map_err(plot_err)?
        .label("V(t)")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], BLUE));
    if let Some(env) = envelope {
        chart
            .draw_series(LineSeries::new(env, RED.stroke_width(1)))
            .map_err(plot_err)?
            .label("exp(-mu t) V(0)")
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], RED));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}
