//! The `check`, `design`, `verify`, `simulate` and `reproduce` verbs.

use std::fs;
use std::path::{Path, PathBuf};

use duio_core::benchmark as bm;
use duio_core::designer::{
    certify_design, check_extensive_joint_detectability, check_rank_condition, chi_bound,
    design_gains, reconcile_design, verify_existing_design, Connectivity, VerificationReport,
};
use duio_core::graph::{connectivity_floor, perron_weights};
use duio_core::simulator::{
    decoupling_probe, error_metrics, simulate as run_simulation, write_trace_csv, ExogenousInput,
    ScenarioConfig, SimulationTrace,
};
use duio_core::{CouplingGraph, CouplingMode, ObserverDesign};

use crate::error::{CliError, CliResult};
use crate::plot;
use crate::report::{num, Certificate, Check, Existence, Metrics, Residuals, RunReport};
use crate::scenario::{Overrides, Scenario};

/// Trace rows are thinned to at most one per this many seconds.
const CSV_SPACING: f64 = 1e-4;

pub const SCENARIO_1: &str = include_str!("../scenarios/scenario1_undirected.toml");
pub const SCENARIO_2: &str = include_str!("../scenarios/scenario2_directed.toml");
pub const SCENARIO_3: &str = include_str!("../scenarios/scenario3_switching.toml");

pub fn load(path: &Path, ov: &Overrides) -> CliResult<Scenario> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Scenario::load(&text, &path.display().to_string(), ov)
}

fn header(command: &str, sc: &Scenario) -> RunReport {
    let mut r = RunReport::new(command);
    r.scenario = Some(sc.name.clone());
    r.mode = Some(sc.mode.to_string());
    r
}

fn existence(sc: &Scenario) -> CliResult<Existence> {
    let ranks: Vec<bool> = sc
        .model
        .nodes
        .iter()
        .map(|io| check_rank_condition(io, &sc.tol))
        .collect();
    if !ranks.iter().all(|&r| r) {
        return Ok(Existence::rank_failure(ranks));
    }
    let jd = check_extensive_joint_detectability(&sc.model, &sc.tol)?;
    Ok(Existence::new(ranks, &jd))
}

fn out_dir(out: &Path) -> CliResult<PathBuf> {
    fs::create_dir_all(out)
        .map_err(|e| CliError::Input(format!("creating {}: {e}", out.display())))?;
    Ok(out.to_path_buf())
}

/// Write `report.json` and `report.txt` into `dir`.
pub fn write_report(report: &mut RunReport, dir: &Path) -> CliResult<()> {
    let dir = out_dir(dir)?;
    let json = dir.join("report.json");
    let text = dir.join("report.txt");
    report.outputs.push(json.display().to_string());
    report.outputs.push(text.display().to_string());
    fs::write(&json, report.to_json())?;
    fs::write(&text, format!("{report}\n"))?;
    Ok(())
}

pub fn check(path: &Path, ov: &Overrides) -> CliResult<RunReport> {
    let sc = load(path, ov)?;
    let mut report = header("check", &sc);
    let ex = existence(&sc)?;
    report.passed = ex.holds();
    report.existence = Some(ex);
    Ok(report)
}

pub fn design(path: &Path, ov: &Overrides, out: &Path) -> CliResult<RunReport> {
    let sc = load(path, ov)?;
    let mut report = header("design", &sc);
    let ex = existence(&sc)?;
    if !ex.holds() {
        report.existence = Some(ex);
        report.checks.push(Check::new(
            "existence",
            false,
            "no observer network exists for this model",
        ));
        return Ok(report);
    }
    report.existence = Some(ex);
    let (design, cert) = design_gains(&sc.model, &sc.graph, &sc.design_options)?;
    let dir = out_dir(out)?;
    let stem = path
        .file_stem()
        .map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
    let target = dir.join(format!("{stem}.designed.toml"));
    fs::write(&target, sc.file.with_design(&design, &cert).to_toml()?)?;
    report.outputs.push(target.display().to_string());
    let clears = cert.connectivity.is_none() || design.chi > cert.chi_bound;
    report.checks.push(Check::new(
        "certificate",
        cert.lmi_ok && clears,
        format!(
            "chi {} against bound {}",
            num(design.chi),
            num(cert.chi_bound)
        ),
    ));
    report.passed = cert.lmi_ok && clears;
    report.certificate = Some(Certificate::new(&cert, design.chi));
    Ok(report)
}

fn verify_loaded(sc: &Scenario, report: &mut RunReport) -> CliResult<VerificationReport> {
    let d = sc.require_design()?;
    let rep = verify_existing_design(&sc.model, &d.supplied, sc.verify_tol)?;
    report.residuals = Some(Residuals::from(&rep));
    let mut cert = Certificate::new(&rep.certificate, d.supplied.chi.unwrap_or(0.0));
    if let Ok(c) = certify_design(&sc.design_as_given(d)?, &sc.graph) {
        cert.chi_bound = c.chi_bound;
        cert.mu = c.mu;
        cert.time_constant = c.time_constant();
    }
    report.certificate = Some(cert);
    Ok(rep)
}

pub fn verify(path: &Path, ov: &Overrides) -> CliResult<RunReport> {
    let sc = load(path, ov)?;
    let mut report = header("verify", &sc);
    let rep = verify_loaded(&sc, &mut report)?;
    report.passed = rep.passed();
    Ok(report)
}

/// The design the simulator runs: reconciled when the file asks for it.
fn simulation_design(sc: &Scenario) -> CliResult<ObserverDesign> {
    let d = sc.require_design()?;
    if d.reconcile {
        Ok(reconcile_design(&sc.model, &d.supplied, &sc.tol)?)
    } else {
        sc.design_as_given(d)
    }
}

fn config(sc: &Scenario, design: ObserverDesign) -> ScenarioConfig {
    let r = &sc.run;
    let mut cfg = ScenarioConfig::new(
        sc.model.clone(),
        design,
        sc.graph.clone(),
        r.horizon,
        r.step,
    );
    cfg.feedback_gain = r.feedback_gain.clone();
    cfg.noise = r.noise;
    cfg.exogenous = r.exogenous;
    cfg.initial_plant_state = r.initial_state.clone();
    cfg.initial_observer_states = r.initial_observer_states.clone();
    cfg.seed = r.seed;
    cfg
}

fn envelope_ratio(trace: &SimulationTrace, mu: Option<f64>) -> Option<f64> {
    let mu = mu?;
    let v0 = trace.v[0];
    Some(
        trace
            .times
            .iter()
            .zip(&trace.v)
            .map(|(t, v)| v / ((-mu * t).exp() * v0))
            .fold(0.0, f64::max),
    )
}

struct SimulationOutcome {
    metrics: Metrics,
    mu: Option<f64>,
}

fn run_and_export(
    cfg: &ScenarioConfig,
    dir: &Path,
    report: &mut RunReport,
) -> CliResult<SimulationOutcome> {
    let trace = run_simulation(cfg)?;
    let m = error_metrics(&trace)?;
    let mu = certify_design(&cfg.design, &cfg.graph)
        .ok()
        .and_then(|c| c.mu);
    let dir = out_dir(dir)?;

    let csv_path = dir.join("trace.csv");
    let stride = ((CSV_SPACING / cfg.step).round() as usize).max(1);
    let file = fs::File::create(&csv_path)?;
    write_trace_csv(&trace, std::io::BufWriter::new(file), stride)?;
    let states = dir.join("states.svg");
    plot::plot_states(&trace, &states)?;
    let lyap = dir.join("lyapunov.svg");
    plot::plot_lyapunov(&trace, mu, &lyap)?;
    for p in [csv_path, states, lyap] {
        report.outputs.push(p.display().to_string());
    }
    Ok(SimulationOutcome {
        metrics: Metrics::new(&m, trace.len(), envelope_ratio(&trace, mu)),
        mu,
    })
}

pub fn simulate(path: &Path, ov: &Overrides, out: &Path) -> CliResult<RunReport> {
    let sc = load(path, ov)?;
    let mut report = header("simulate", &sc);
    let rep = verify_loaded(&sc, &mut report)?;
    if !rep.passed() {
        report.checks.push(Check::new(
            "verified design",
            false,
            format!("design does not verify at tolerance {}", num(sc.verify_tol)),
        ));
        return Ok(report);
    }
    let cfg = config(&sc, simulation_design(&sc)?);
    let outcome = run_and_export(&cfg, out, &mut report)?;
    if let (Some(c), Some(mu)) = (report.certificate.as_mut(), outcome.mu) {
        c.mu = Some(mu);
        c.time_constant = Some(1.0 / mu);
    }
    report.passed = !outcome.metrics.diverged;
    report.metrics = Some(outcome.metrics);
    Ok(report)
}

/// Which bundled scenarios `reproduce` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    One,
    Two,
    Three,
    All,
}

fn within(got: f64, want: f64, rel: f64) -> bool {
    ((got - want) / want).abs() < rel
}

fn reproduce_one(k: usize, ov: &Overrides, out: &Path) -> CliResult<RunReport> {
    let (text, mode, published_chi) = match k {
        1 => (SCENARIO_1, CouplingMode::Undirected, bm::CHI_UNDIRECTED),
        2 => (SCENARIO_2, CouplingMode::Directed, bm::CHI_DIRECTED),
        _ => (SCENARIO_3, CouplingMode::Switching, bm::CHI_SWITCHING),
    };
    let ov = Overrides {
        mode: None,
        tol: Some(ov.tol.unwrap_or(5e-3)),
        ..ov.clone()
    };
    let sc = Scenario::load(text, &format!("scenario {k}"), &ov)?;
    debug_assert_eq!(sc.mode, mode);
    let mut report = header("reproduce", &sc);
    let mut checks = Vec::new();

    let ex = existence(&sc)?;
    checks.push(Check::new(
        "existence conditions",
        ex.holds(),
        format!("witness dimension {}", ex.witness_dim),
    ));
    report.existence = Some(ex);

    let rep = verify_loaded(&sc, &mut report)?;
    checks.push(Check::new(
        "published gains verify",
        rep.passed(),
        format!(
            "largest residual {} at tolerance {}",
            num(rep.max_residual()),
            num(sc.verify_tol)
        ),
    ));
    let connectivity = sc.graph.connectivity()?;
    let bound = chi_bound(&rep.certificate, connectivity)?;
    checks.push(Check::new(
        "coupling bound",
        within(bound, published_chi, 0.05),
        format!("{} against published {published_chi} (5%)", num(bound)),
    ));

    match (&sc.graph, connectivity) {
        (CouplingGraph::Directed { topology, .. }, _) => {
            let w = perron_weights(topology)?;
            let worst =
                w.r.iter()
                    .zip(bm::PERRON_WEIGHTS)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
            checks.push(Check::new(
                "Perron weights",
                worst < 1e-3,
                format!("largest deviation {}", num(worst)),
            ));
        }
        (CouplingGraph::Switching(s), Some(Connectivity::Switching { floor })) => {
            let c = connectivity_floor(s.node_count())?;
            checks.push(Check::new(
                "connectivity floor",
                within(floor, bm::CONNECTIVITY_FLOOR_4, 1e-3) && c == floor,
                format!("C(4) = {}", num(floor)),
            ));
        }
        _ => {}
    }

    let cfg = config(&sc, simulation_design(&sc)?);
    let dir = out.join(format!("scenario{k}"));
    let outcome = run_and_export(&cfg, &dir, &mut report)?;
    if k == 1 {
        let tc = outcome.mu.map(|mu| 1.0 / mu);
        checks.push(Check::new(
            "time constant",
            tc.is_some_and(|tc| within(tc, bm::TIME_CONSTANT_UNDIRECTED, 0.05)),
            format!(
                "{} against published {} (5%)",
                tc.map_or("none".into(), num),
                bm::TIME_CONSTANT_UNDIRECTED
            ),
        ));
        let ratio = outcome.metrics.envelope_ratio;
        checks.push(Check::new(
            "decay envelope",
            ratio.is_some_and(|r| r <= 1.01),
            format!("largest V / envelope {}", ratio.map_or("none".into(), num)),
        ));
        let sine = ExogenousInput::Sinusoid {
            amplitude: 10.0,
            angular_frequency: 50.0,
        };
        let gap = decoupling_probe(&cfg, ExogenousInput::Zero, sine)?;
        checks.push(Check::new(
            "unknown input decoupling",
            gap <= 1e-8,
            format!("largest error difference {}", num(gap)),
        ));
    }
    checks.push(Check::new(
        "convergence",
        outcome.metrics.terminal_relative <= 1e-3 && !outcome.metrics.diverged,
        format!(
            "terminal relative error {} at t = {}",
            num(outcome.metrics.terminal_relative),
            cfg.horizon
        ),
    ));
    if let (Some(c), Some(mu)) = (report.certificate.as_mut(), outcome.mu) {
        c.mu = Some(mu);
        c.time_constant = Some(1.0 / mu);
    }
    report.metrics = Some(outcome.metrics);
    report.passed = checks.iter().all(|c| c.pass);
    report.checks = checks;
    write_report(&mut report, &dir)?;
    Ok(report)
}

pub fn reproduce(which: Which, ov: &Overrides, out: &Path) -> CliResult<RunReport> {
    let ks: Vec<usize> = match which {
        Which::One => vec![1],
        Which::Two => vec![2],
        Which::Three => vec![3],
        Which::All => vec![1, 2, 3],
    };
    if ks.len() == 1 {
        return reproduce_one(ks[0], ov, out);
    }
    // the scenarios are independent, so they run side by side
    let results: Vec<CliResult<RunReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = ks
            .iter()
            .map(|&k| s.spawn(move || reproduce_one(k, ov, out)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(CliError::Runtime("scenario run panicked".into())))
            })
            .collect()
    });
    let mut report = RunReport::new("reproduce all");
    for (k, r) in ks.iter().zip(results) {
        let r = r?;
        for c in r.checks {
            report.checks.push(Check::new(
                format!("scenario {k}: {}", c.name),
                c.pass,
                c.detail,
            ));
        }
        report.outputs.extend(r.outputs);
    }
    report.passed = report.checks.iter().all(|c| c.pass);
    Ok(report)
}
