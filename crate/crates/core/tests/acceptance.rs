//! Acceptance report: one PASS/FAIL line per criterion with its runtime.
//! Exits nonzero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::props;
use duio_core::benchmark as bm;
use duio_core::designer::{
    certify_design, check_extensive_joint_detectability, check_rank_condition, chi_bound,
    design_gains, verify_existing_design, DesignOptions,
};
use duio_core::linalg::{is_negative_definite, Tolerances};
use duio_core::simulator::{
    decoupling_probe, error_metrics, lyapunov_trace, simulate, ExogenousInput,
};
use duio_core::{CouplingMode, Result};

const MODES: [CouplingMode; 3] = [
    CouplingMode::Undirected,
    CouplingMode::Directed,
    CouplingMode::Switching,
];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn existence_checks() -> Result<Verdict> {
    let model = bm::model();
    let tol = Tolerances::default();
    let ranks: Vec<bool> = model
        .nodes
        .iter()
        .map(|n| check_rank_condition(n, &tol))
        .collect();
    let jd = check_extensive_joint_detectability(&model, &tol)?;
    verdict(
        ranks.iter().all(|&r| r) && jd.holds && jd.witness.dim() == 0,
        format!(
            "rank conditions {ranks:?}, witness dimension {}",
            jd.witness.dim()
        ),
    )
}

fn published_regression() -> Result<Verdict> {
    let report = verify_existing_design(
        &bm::model(),
        &bm::published_design(CouplingMode::Undirected),
        5e-3,
    )?;
    verdict(
        report.passed() && report.certificate.lmi_ok,
        format!(
            "max residual {:.2e}, sum Lambda_i negative definite: {}",
            report.max_residual(),
            report.certificate.lmi_ok
        ),
    )
}

fn chi_reproduction() -> Result<Verdict> {
    let model = bm::model();
    let mut pass = true;
    let mut parts = Vec::new();
    for (mode, want) in
        MODES
            .into_iter()
            .zip([bm::CHI_UNDIRECTED, bm::CHI_DIRECTED, bm::CHI_SWITCHING])
    {
        let report = verify_existing_design(&model, &bm::published_design(mode), 5e-3)?;
        let conn = bm::coupling_graph(mode)?.connectivity()?;
        let bound = chi_bound(&report.certificate, conn)?;
        let err = rel_err(bound, want);
        pass &= err < 0.05;
        parts.push(format!("{mode} {bound:.2} vs {want} ({:.1}%)", 100.0 * err));
    }
    verdict(pass, parts.join(", "))
}

fn decay_rate() -> Result<Verdict> {
    let cfg = bm::scenario(CouplingMode::Undirected)?;
    let cert = certify_design(&cfg.design, &cfg.graph)?;
    let tc = cert.time_constant().unwrap_or(f64::INFINITY);
    let mu = 1.0 / tc;
    let trace = simulate(&cfg)?;
    let v = lyapunov_trace(&trace, &cfg.design)?;
    let worst = trace
        .times
        .iter()
        .zip(&v)
        .map(|(t, vk)| vk / ((-mu * t).exp() * v[0]))
        .fold(0.0, f64::max);
    let err = rel_err(tc, bm::TIME_CONSTANT_UNDIRECTED);
    verdict(
        err < 0.05 && worst <= 1.01 && cfg.step == 1e-4 && cfg.horizon == 1.0,
        format!(
            "1/mu = {tc:.4e} ({:.1}% off), max V/envelope {worst:.4} over {} samples",
            100.0 * err,
            trace.len()
        ),
    )
}

fn decoupling() -> Result<Verdict> {
    let cfg = bm::scenario(CouplingMode::Undirected)?;
    let sine = ExogenousInput::Sinusoid {
        amplitude: 10.0,
        angular_frequency: 50.0,
    };
    let gap = decoupling_probe(&cfg, ExogenousInput::Zero, sine)?;
    verdict(gap <= 1e-8, format!("largest error difference {gap:.2e}"))
}

fn synthesis() -> Result<Verdict> {
    let model = bm::model();
    let graph = bm::coupling_graph(CouplingMode::Undirected)?;
    let opts = DesignOptions::default();
    let (design, cert) = design_gains(&model, &graph, &opts)?;
    let cap = opts.beta0 * 2f64.powi(opts.max_doublings as i32) * opts.beta_headroom;
    let beta = cert.beta.unwrap_or(f64::INFINITY);
    let certified = cert.lmi_ok && is_negative_definite(&cert.lambda_sum(), 0.0);
    let mut cfg = bm::scenario(CouplingMode::Undirected)?;
    cfg.design = design;
    let trace = simulate(&cfg)?;
    let norms = trace.error_norms();
    let reached = trace
        .times
        .iter()
        .zip(&norms)
        .find(|(t, e)| **t <= 1.0 && **e <= 1e-3 * norms[0])
        .map(|(t, _)| *t);
    verdict(
        beta <= cap && certified && reached.is_some(),
        format!(
            "beta {beta:.3e} (cap {cap:.3e}), chi {:.4e}, 1e-3 reached at {}",
            cfg.design.chi,
            reached.map_or("never".into(), |t| format!("t = {t:.4} s"))
        ),
    )
}

fn property_suites() -> Result<Verdict> {
    let suites = [
        ("Y invariance", props::y_invariance(11, 50)),
        ("detectable span", props::detectable_parts_span(12, 50)),
        ("Perron weighting", props::perron_weighting(13, 50)),
        (
            "synthesis iff conditions",
            props::synthesis_iff_conditions(14, 60),
        ),
        ("floor dominance", props::floor_dominance(15, 100)),
    ];
    let pass = suites.iter().all(|(_, o)| o.passed());
    let detail = suites
        .iter()
        .map(|(name, o)| {
            format!(
                "{name} {}/{} ({} nontrivial)",
                o.instances - o.failures.len(),
                o.instances,
                o.nontrivial
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    for (name, o) in &suites {
        for f in &o.failures {
            eprintln!("  {name}: {f}");
        }
    }
    verdict(pass, detail)
}

fn directed_and_switching() -> Result<Verdict> {
    let mut pass = true;
    let mut parts = Vec::new();
    for mode in [CouplingMode::Directed, CouplingMode::Switching] {
        let cfg = bm::scenario(mode)?;
        let m = error_metrics(&simulate(&cfg)?)?;
        pass &= m.terminal_relative <= 1e-3 && cfg.horizon <= 1.0;
        parts.push(format!(
            "{mode} chi {:.4e}: terminal relative {:.2e}",
            cfg.design.chi, m.terminal_relative
        ));
    }
    verdict(pass, parts.join(", "))
}

fn main() {
    type Check = fn() -> Result<Verdict>;
    let criteria: [(&str, Check, Option<Duration>); 8] = [
        (
            "existence checks on the reference model",
            existence_checks,
            Some(Duration::from_secs(1)),
        ),
        (
            "published gains regression",
            published_regression,
            Some(Duration::from_secs(1)),
        ),
        ("coupling bound reproduction", chi_reproduction, None),
        ("decay rate and V envelope", decay_rate, None),
        ("unknown input decoupling", decoupling, None),
        (
            "end-to-end synthesis",
            synthesis,
            Some(Duration::from_secs(30)),
        ),
        ("property suites", property_suites, None),
        (
            "directed and switching convergence",
            directed_and_switching,
            None,
        ),
    ];
    let mut failed = 0;
    for (k, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(v) => {
                let in_time = budget.is_none_or(|b| elapsed < b);
                let detail = if in_time {
                    v.detail
                } else {
                    format!("{} (over the {:?} budget)", v.detail, budget.unwrap())
                };
                (v.pass && in_time, detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {detail} [{:.3} s]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
}
