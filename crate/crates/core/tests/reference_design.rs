//! Existence checks, gain regression and coupling bounds on the six-state
//! reference plant.

use duio_core::benchmark as bm;
use duio_core::designer::{
    certify_design, check_extensive_joint_detectability, check_rank_condition, closed_loop_lambda,
    compute_huv, compute_lambda, reconcile_design, recover_k, verify_existing_design, Connectivity,
    DesignCertificate, ObserverDesign,
};
use duio_core::graph::{algebraic_connectivity, connectivity_floor, perron_weights};
use duio_core::linalg::{
    detectability_decomposition, eigenvalues, is_hurwitz, is_negative_definite, pseudo_inverse,
    Matrix, Tolerances,
};
use duio_core::CouplingMode;

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

#[test]
fn every_node_satisfies_the_rank_condition() {
    let model = bm::model();
    for node in &model.nodes {
        assert!(check_rank_condition(node, &Tolerances::default()));
    }
}

#[test]
fn undetectable_subspaces_intersect_trivially() {
    let jd = check_extensive_joint_detectability(&bm::model(), &Tolerances::default()).unwrap();
    assert!(jd.holds);
    assert_eq!(jd.witness.dim(), 0);
    // nodes 1 and 2 each miss one unstable mode (eigenvalues 18.07 and 15.09
    // of their unobservable parts); nodes 3 and 4 only miss stable ones
    assert_eq!(jd.node_dims, vec![1, 1, 0, 0]);
}

#[test]
fn first_node_sees_its_unknown_inputs_directly() {
    let model = bm::model();
    let node = &model.nodes[0];
    let cb = &node.c * &node.b_bar;
    assert!((&cb - Matrix::identity(3, 3)).norm() < 1e-14);
    assert!((pseudo_inverse(&cb) - Matrix::identity(3, 3)).norm() < 1e-12);
}

#[test]
fn zero_y_reproduces_published_h() {
    let model = bm::model();
    let published = bm::published_design(CouplingMode::Undirected);
    for (node, sup) in model.nodes.iter().zip(&published.nodes) {
        let y = Matrix::zeros(6, node.output_dim());
        let (h, _, _) = compute_huv(node, &y, &Tolerances::default()).unwrap();
        assert!((h - &sup.h).norm() < 1e-12);
    }
}

#[test]
fn published_gains_pass_at_rounding_tolerance() {
    let report = verify_existing_design(
        &bm::model(),
        &bm::published_design(CouplingMode::Undirected),
        5e-3,
    )
    .unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    assert!(report.max_residual() <= 5e-3);
    assert!(report.certificate.lmi_ok);
    for r in &report.nodes {
        assert!(r.k_recovered);
        assert!(r.lambda_identity < 1e-3);
        assert_eq!(r.p_min_eig, 0.1);
    }
}

#[test]
fn zeroed_h_of_node_1_is_flagged() {
    let mut supplied = bm::published_design(CouplingMode::Undirected);
    supplied.nodes[1].h.fill(0.0);
    let report = verify_existing_design(&bm::model(), &supplied, 5e-3).unwrap();
    assert!(!report.passed());
    assert!(report.nodes[1].decoupling > 5e-3);
    assert!(report
        .failures
        .iter()
        .any(|f| f.contains("node 1:") && f.contains("decoupling")));
}

#[test]
fn recovered_k_fits_node_one() {
    let model = bm::model();
    let sup = &bm::published_design(CouplingMode::Undirected).nodes[0];
    let k = recover_k(&sup.n, &sup.h, &model.a, &model.nodes[0].c).unwrap();
    let m = Matrix::identity(6, 6) - &sup.h * &model.nodes[0].c;
    let fit = (&m * &model.a - &k * &model.nodes[0].c - &sup.n).norm() / sup.n.norm();
    assert!(fit <= 5e-3);
}

#[test]
fn lambda_formula_matches_closed_loop_on_reconciled_gains() {
    let model = bm::model();
    let design = bm::reconciled_design(CouplingMode::Undirected).unwrap();
    let formula = compute_lambda(&design, &model).unwrap();
    for (f, d) in formula.iter().zip(closed_loop_lambda(&design)) {
        assert!((f - &d).norm() <= 1e-10 * d.norm());
    }
}

#[test]
fn lambda_sum_is_negative_definite() {
    let design = bm::reconciled_design(CouplingMode::Undirected).unwrap();
    let cert = DesignCertificate::from_lambdas(closed_loop_lambda(&design));
    assert!(is_negative_definite(&cert.lambda_sum(), 0.0));
}

#[test]
fn hurwitz_verdict_matches_eigenvalues_of_n1() {
    let n1 = &bm::published_design(CouplingMode::Undirected).nodes[0].n;
    let max_re = eigenvalues(n1)
        .unwrap()
        .iter()
        .map(|l| l.re)
        .fold(f64::MIN, f64::max);
    assert_eq!(is_hurwitz(n1, 0.0).unwrap(), max_re < 0.0);
}

#[test]
fn decompositions_hide_t_u_from_c() {
    let model = bm::model();
    let published = bm::published_design(CouplingMode::Undirected);
    for (k, (node, sup)) in model.nodes.iter().zip(&published.nodes).enumerate() {
        let c = &node.c;
        let a_bar = (Matrix::identity(6, 6) - &sup.h * c) * &model.a;
        let dec = detectability_decomposition(c, &a_bar, &Tolerances::default()).unwrap();
        assert_eq!(dec.v, [1, 1, 0, 0][k]);
        assert!((c * &dec.t_u).norm() <= 1e-8 * c.norm());
        let upper = dec.t_d.transpose() * &a_bar * &dec.t_u;
        assert!(upper.norm() <= 1e-8 * a_bar.norm());
    }
}

fn bound_for(mode: CouplingMode, design: &ObserverDesign) -> DesignCertificate {
    certify_design(design, &bm::coupling_graph(mode).unwrap()).unwrap()
}

#[test]
fn coupling_bounds_match_published_gains() {
    let model = bm::model();
    for (mode, want) in [
        (CouplingMode::Undirected, bm::CHI_UNDIRECTED),
        (CouplingMode::Directed, bm::CHI_DIRECTED),
        (CouplingMode::Switching, bm::CHI_SWITCHING),
    ] {
        let report = verify_existing_design(&model, &bm::published_design(mode), 5e-3).unwrap();
        let conn = bm::coupling_graph(mode).unwrap().connectivity().unwrap();
        let bound = duio_core::designer::chi_bound(&report.certificate, conn).unwrap();
        assert!(
            rel_err(bound, want) < 0.05,
            "{mode}: bound {bound}, published {want}"
        );
    }
}

#[test]
fn graph_quantities_match_published_values() {
    assert_eq!(
        algebraic_connectivity(&bm::ring_topology().laplacian()).unwrap(),
        2.0
    );
    assert!(rel_err(connectivity_floor(4).unwrap(), bm::CONNECTIVITY_FLOOR_4) < 1e-3);
    let w = perron_weights(&bm::directed_topology()).unwrap();
    for (got, want) in w.r.iter().zip(bm::PERRON_WEIGHTS) {
        assert!((got - want).abs() < 1e-3);
    }
    match bm::coupling_graph(CouplingMode::Directed)
        .unwrap()
        .connectivity()
        .unwrap()
    {
        Some(Connectivity::Directed { lambda2_hat }) => assert!(lambda2_hat > 0.0),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn time_constant_matches_published_value() {
    let cert = bound_for(
        CouplingMode::Undirected,
        &bm::reconciled_design(CouplingMode::Undirected).unwrap(),
    );
    let tc = cert.time_constant().unwrap();
    assert!(
        rel_err(tc, bm::TIME_CONSTANT_UNDIRECTED) < 0.05,
        "time constant {tc}"
    );
}

#[test]
fn published_gains_certify_in_every_mode() {
    for mode in [
        CouplingMode::Undirected,
        CouplingMode::Directed,
        CouplingMode::Switching,
    ] {
        let design = bm::reconciled_design(mode).unwrap();
        let cert = bound_for(mode, &design);
        assert!(cert.lmi_ok);
        assert!(design.chi > cert.chi_bound, "{mode}");
        assert!(cert.mu.unwrap() > 0.0);
    }
}

#[test]
fn reconciliation_keeps_h_and_p() {
    let model = bm::model();
    let supplied = bm::published_design(CouplingMode::Undirected);
    let design = reconcile_design(&model, &supplied, &Tolerances::default()).unwrap();
    let report = verify_existing_design(&model, &(&design).into(), 1e-10).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    for (g, s) in design.nodes.iter().zip(&supplied.nodes) {
        assert_eq!(g.h, s.h);
        assert_eq!(g.p, s.p);
        assert!((&g.n - &s.n).norm() <= 5e-3 * s.n.norm());
    }
}
