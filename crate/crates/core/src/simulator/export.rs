//! Comma-separated trace export.
//!
//! Column order: `time`, `x1..xn`, then for each node `i` the estimate
//! `xhat{i}_1..xhat{i}_n` followed by `enorm{i}`, then `V` and `topology`.
//! Node numbers in headers are one-based.

use std::io::Write;

use super::SimulationTrace;
use crate::error::{DuioError, Result};

/// Header row for a trace with `nodes` nodes and state dimension `n`.
pub fn trace_csv_header(n: usize, nodes: usize) -> Vec<String> {
    let mut h = vec!["time".to_string()];
    h.extend((1..=n).map(|k| format!("x{k}")));
    for i in 1..=nodes {
        h.extend((1..=n).map(|k| format!("xhat{i}_{k}")));
        h.push(format!("enorm{i}"));
    }
    h.push("V".into());
    h.push("topology".into());
    h
}

fn io_err(e: impl std::fmt::Display) -> DuioError {
    DuioError::Io(e.to_string())
}

/// Write every `stride`-th sample (and always the last) as CSV.
pub fn write_trace_csv<W: Write>(trace: &SimulationTrace, out: W, stride: usize) -> Result<()> {
    let stride = stride.max(1);
    let n = trace.x.first().map_or(0, |x| x.len());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_csv_header(n, trace.node_count()))
        .map_err(io_err)?;
    let last = trace.len().saturating_sub(1);
    for k in (0..trace.len()).filter(|&k| k % stride == 0 || k == last) {
        let mut row = vec![trace.times[k].to_string()];
        row.extend(trace.x[k].iter().map(|v| v.to_string()));
        for (xh, e) in trace.x_hat[k].iter().zip(&trace.e[k]) {
            row.extend(xh.iter().map(|v| v.to_string()));
            row.push(e.norm().to_string());
        }
        row.push(trace.v[k].to_string());
        row.push(trace.active_topology[k].to_string());
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;

    #[test]
    fn header_and_rows_line_up() {
        let trace = SimulationTrace {
            times: vec![0.0, 0.5, 1.0],
            x: vec![Vector::from_row_slice(&[1.0, 2.0]); 3],
            x_hat: vec![vec![Vector::from_row_slice(&[1.0, 2.0]); 2]; 3],
            e: vec![vec![Vector::from_row_slice(&[3.0, 4.0]); 2]; 3],
            v: vec![1.0, 0.5, 0.25],
            active_topology: vec![0, 1, 1],
        };
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "time,x1,x2,xhat1_1,xhat1_2,enorm1,xhat2_1,xhat2_2,enorm2,V,topology"
        );
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2], "1,1,2,1,2,5,1,2,5,0.25,1");
    }
}
