//! Randomized property checks, shared by the property tests and the
//! acceptance report. Each returns how many instances it exercised and a
//! description of every violation.

use duio_core::designer::{
    check_extensive_joint_detectability, check_rank_condition, compute_huv, design_gains,
    CouplingGraph, DesignOptions,
};
use duio_core::graph::{algebraic_connectivity, connectivity_floor, perron_weights, Topology};
use duio_core::linalg::{
    detectability_decomposition, hstack, numerical_rank, symmetric_eigenvalues,
    undetectable_subspace, Matrix, Tolerances, Vector,
};
use duio_core::SystemModel;
use rand::Rng;

use super::*;

#[derive(Debug, Default)]
pub struct Outcome {
    pub instances: usize,
    /// Instances where the property says something non-vacuous.
    pub nontrivial: usize,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.instances > 0
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }
}

/// Node whose outputs exceed its unknown inputs by one, so `V` is nonzero.
/// Every other instance hides an unmeasured block, fed by the rest of the
/// state but not feeding back, behind a random change of coordinates.
fn y_instance(rng: &mut ChaCha8Rng, hidden: bool) -> SystemModel {
    let n = rng.random_range(3..=6);
    let b = if hidden {
        rng.random_range(1..=2.min(n - 2))
    } else {
        0
    };
    let k = rng.random_range(1..=2.min(n - b - 1));
    let p = k + 1;
    let seen = n - b;
    let mut a = Matrix::zeros(n, n);
    let unstable = rng.random_range(0..=seen.min(2));
    a.view_mut((0, 0), (seen, seen))
        .copy_from(&random_plant(rng, seen, unstable));
    if b > 0 {
        let unstable = rng.random_range(1..=b);
        a.view_mut((seen, seen), (b, b))
            .copy_from(&random_plant(rng, b, unstable));
        a.view_mut((seen, 0), (b, seen))
            .copy_from(&gaussian(rng, b, seen));
    }
    let mut c = Matrix::zeros(p, n);
    c.view_mut((0, 0), (p, seen))
        .copy_from(&gaussian(rng, p, seen));
    let d = gaussian(rng, n, k);
    // non-orthogonal change of coordinates with condition number at most 4
    let q1 = gaussian(rng, n, n).qr().q();
    let q2 = gaussian(rng, n, n).qr().q();
    let s: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let t = &q1 * Matrix::from_diagonal(&Vector::from_vec(s.clone())) * &q2;
    let s_inv = Vector::from_iterator(n, s.iter().map(|v| 1.0 / v));
    let t_inv = q2.transpose() * Matrix::from_diagonal(&s_inv) * q1.transpose();
    SystemModel::from_partition(
        &t * a * &t_inv,
        Matrix::zeros(n, 0),
        &t * d,
        vec![(c * t_inv, vec![])],
    )
    .expect("consistent")
}

/// Undetectable subspaces do not depend on the free parameter `Y`.
pub fn y_invariance(seed: u64, count: usize) -> Outcome {
    let tol = Tolerances::default();
    let mut rng = rng(seed);
    let mut out = Outcome::default();
    while out.instances < count {
        let model = y_instance(&mut rng, out.instances % 2 == 1);
        let node = &model.nodes[0];
        let n = model.state_dim();
        let p = node.output_dim();
        let Ok((_, u, v)) = compute_huv(node, &Matrix::zeros(n, p), &tol) else {
            continue;
        };
        out.instances += 1;
        let a_i = (Matrix::identity(n, n) - &u * &node.c) * &model.a;
        let y = gaussian(&mut rng, n, p) * 2.0;
        let a_y = &a_i - &y * &v * &node.c * &model.a;
        let (s0, s1) = match (
            undetectable_subspace(&node.c, &a_i, &tol),
            undetectable_subspace(&node.c, &a_y, &tol),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                out.fail(format!("instance {}: {e}", out.instances));
                continue;
            }
        };
        if s0.dim() > 0 {
            out.nontrivial += 1;
        }
        let angle = s0.max_angle_to(&s1);
        if !(angle <= 1e-8) {
            out.fail(format!(
                "instance {}: dims {} vs {}, largest angle {angle:.3e}",
                out.instances,
                s0.dim(),
                s1.dim()
            ));
        }
    }
    out
}

/// When the undetectable subspaces intersect trivially, the detectable
/// bases of all nodes together span the state space.
pub fn detectable_parts_span(seed: u64, count: usize) -> Outcome {
    let tol = Tolerances::default();
    let mut rng = rng(seed);
    let mut out = Outcome::default();
    let mut attempts = 0;
    while out.instances < count && attempts < 50 * count {
        attempts += 1;
        let n = rng.random_range(2..=6);
        let nodes = rng.random_range(2..=4);
        let model = rank_solvable_model(&mut rng, n, nodes);
        let Ok(jd) = check_extensive_joint_detectability(&model, &tol) else {
            continue;
        };
        if !jd.holds {
            continue;
        }
        out.instances += 1;
        let mut blocks = Vec::new();
        for (i, io) in model.nodes.iter().enumerate() {
            let (_, u, _) = compute_huv(io, &Matrix::zeros(n, io.output_dim()), &tol).unwrap();
            let a_i = (Matrix::identity(n, n) - &u * &io.c) * &model.a;
            match detectability_decomposition(&io.c, &a_i, &tol) {
                Ok(d) => blocks.push(d.t_d),
                Err(e) => out.fail(format!("instance {}, node {}: {e}", out.instances, i + 1)),
            }
        }
        if jd.node_dims.iter().any(|&d| d > 0) {
            out.nontrivial += 1;
        }
        let refs: Vec<&Matrix> = blocks.iter().collect();
        let rank = numerical_rank(&hstack(&refs), 1e-10);
        if rank != n {
            out.fail(format!("instance {}: rank {rank} of {n}", out.instances));
        }
    }
    out
}

/// Perron weighting of random strongly connected digraphs.
pub fn perron_weighting(seed: u64, count: usize) -> Outcome {
    let mut rng = rng(seed);
    let mut out = Outcome::default();
    for k in 0..count {
        let n = rng.random_range(3..=8);
        let t = strongly_connected_digraph(&mut rng, n);
        out.instances += 1;
        let w = match perron_weights(&t) {
            Ok(w) => w,
            Err(e) => {
                out.fail(format!("digraph {k}: {e}"));
                continue;
            }
        };
        let l = t.laplacian();
        let ones = Vector::from_element(n, 1.0);
        let r_l = (w.r.transpose() * &l).norm();
        let row = (&w.l_hat * &ones).norm();
        let ev = symmetric_eigenvalues(&w.l_hat);
        let balanced = (&l.transpose() * &ones).norm() < 1e-12;
        if !balanced {
            out.nontrivial += 1;
        }
        if w.r.iter().any(|&v| v <= 0.0) || (w.r.sum() - n as f64).abs() > 1e-10 {
            out.fail(format!("digraph {k}: r = {:?}", w.r.as_slice()));
        }
        if r_l > 1e-10 || row > 1e-10 {
            out.fail(format!(
                "digraph {k}: |rL| = {r_l:.1e}, |L_hat 1| = {row:.1e}"
            ));
        }
        if ev[0].abs() > 1e-10 || !(ev[1] > 1e-9) {
            out.fail(format!(
                "digraph {k}: smallest eigenvalues {:.3e}, {:.3e}",
                ev[0], ev[1]
            ));
        }
    }
    out
}

fn conditions_hold(model: &SystemModel, tol: &Tolerances) -> bool {
    model.nodes.iter().all(|io| check_rank_condition(io, tol))
        && check_extensive_joint_detectability(model, tol).is_ok_and(|jd| jd.holds)
}

/// Synthesis succeeds exactly when the existence conditions hold.
pub fn synthesis_iff_conditions(seed: u64, count: usize) -> Outcome {
    let tol = Tolerances::default();
    let mut rng = rng(seed);
    let mut out = Outcome::default();
    for k in 0..count {
        let n = rng.random_range(2..=6);
        let nodes = rng.random_range(1..=4);
        let model = if k % 5 == 4 && n >= 2 {
            shared_blind_mode_model(&mut rng, n.max(3), nodes)
        } else {
            random_model(&mut rng, n, nodes)
        };
        let graph = CouplingGraph::undirected(connected_graph(&mut rng, nodes)).expect("connected");
        out.instances += 1;
        let expected = conditions_hold(&model, &tol);
        if expected {
            out.nontrivial += 1;
        }
        match (
            design_gains(&model, &graph, &DesignOptions::default()),
            expected,
        ) {
            (Ok(_), true) => {}
            (Err(e), false)
                if matches!(e.code(), "unsolvable_decoupling" | "not_jointly_detectable") => {}
            (Ok(_), false) => out.fail(format!("instance {k}: designed although conditions fail")),
            (Err(e), _) => out.fail(format!(
                "instance {k} (n={}, N={nodes}, conditions {expected}): {e}",
                model.state_dim()
            )),
        }
    }
    out
}

/// `connectivity_floor(N) <= lambda_2` for every connected graph on `N`
/// nodes, exhaustively up to five nodes and by sampling up to eight.
pub fn floor_dominance(seed: u64, samples_per_size: usize) -> Outcome {
    let mut out = Outcome::default();
    let check = |n: usize, edges: &[(usize, usize)], out: &mut Outcome| {
        let t = Topology::undirected(n, edges).expect("valid");
        if !t.is_connected() {
            return;
        }
        out.instances += 1;
        let l2 = algebraic_connectivity(&t.laplacian()).expect("symmetric");
        let floor = connectivity_floor(n).expect("n >= 2");
        if !(floor <= l2) {
            out.fail(format!(
                "N={n}, edges {edges:?}: lambda_2 {l2:.4e} below {floor:.4e}"
            ));
        }
    };
    for n in 2..=5 {
        for edges in all_graphs(n) {
            check(n, &edges, &mut out);
        }
    }
    out.nontrivial = out.instances;
    let mut rng = rng(seed);
    for n in 6..=8 {
        for _ in 0..samples_per_size {
            let edges = connected_graph(&mut rng, n).edges();
            check(n, &edges, &mut out);
        }
    }
    out
}
