//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

pub mod props;

use duio_core::graph::Topology;
use duio_core::linalg::{numerical_rank, Matrix};
use duio_core::SystemModel;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    // sum of uniforms is close enough to normal for test data
    Matrix::from_fn(r, c, |_, _| {
        (0..4).map(|_| rng.random_range(-1.0..1.0)).sum::<f64>() * 0.87
    })
}

/// Random plant with `unstable` modes moved to the right half-plane.
pub fn random_plant(rng: &mut ChaCha8Rng, n: usize, unstable: usize) -> Matrix {
    let q = gaussian(rng, n, n).qr().q();
    let mut t = gaussian(rng, n, n);
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = 0.0;
        }
        t[(i, i)] = if i < unstable {
            rng.random_range(0.2..2.0)
        } else {
            -rng.random_range(0.5..3.0)
        };
    }
    &q * t * q.transpose()
}

/// Random model; each node measures `p_i` random combinations and knows a
/// random subset of the input columns. May violate either existence
/// condition.
pub fn random_model(rng: &mut ChaCha8Rng, n: usize, nodes: usize) -> SystemModel {
    let m = rng.random_range(0..=2.min(n - 1));
    let q = rng.random_range(0..=1);
    let unstable = rng.random_range(0..=n.min(3));
    let a = random_plant(rng, n, unstable);
    let b = gaussian(rng, n, m);
    let d = gaussian(rng, n, q);
    let outputs = (0..nodes)
        .map(|_| {
            let p = rng.random_range(1..=n.min(3));
            let c = gaussian(rng, p, n);
            let known: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.5)).collect();
            (c, known)
        })
        .collect();
    SystemModel::from_partition(a, b, d, outputs).expect("generated model is consistent")
}

/// Random model that satisfies the rank condition at every node.
pub fn rank_solvable_model(rng: &mut ChaCha8Rng, n: usize, nodes: usize) -> SystemModel {
    loop {
        let model = random_model(rng, n, nodes);
        let ok = model.nodes.iter().all(|io| {
            io.b_bar.ncols() == 0
                || numerical_rank(&(&io.c * &io.b_bar), 1e-10) == numerical_rank(&io.b_bar, 1e-10)
        });
        if ok {
            return model;
        }
    }
}

/// Every node is blind to a shared unstable mode (block-diagonal plant).
pub fn shared_blind_mode_model(rng: &mut ChaCha8Rng, n: usize, nodes: usize) -> SystemModel {
    let mut a = Matrix::zeros(n, n);
    let inner = random_plant(rng, n - 1, 1);
    a.view_mut((0, 0), (n - 1, n - 1)).copy_from(&inner);
    a[(n - 1, n - 1)] = rng.random_range(0.1..1.0);
    let outputs = (0..nodes)
        .map(|_| {
            let mut c = gaussian(rng, 2.min(n - 1), n);
            c.column_mut(n - 1).fill(0.0);
            (c, vec![])
        })
        .collect();
    SystemModel::from_partition(a, Matrix::zeros(n, 0), Matrix::zeros(n, 0), outputs)
        .expect("consistent")
}

/// Random strongly connected digraph: a random Hamiltonian cycle plus extra
/// random edges.
pub fn strongly_connected_digraph(rng: &mut ChaCha8Rng, n: usize) -> Topology {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = (0..n).map(|k| (order[k], order[(k + 1) % n])).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(0.25) && !edges.contains(&(i, j)) {
                edges.push((i, j));
            }
        }
    }
    Topology::directed(n, &edges).expect("valid digraph")
}

/// Random connected undirected graph: a random spanning tree plus extras.
pub fn connected_graph(rng: &mut ChaCha8Rng, n: usize) -> Topology {
    let mut edges = Vec::new();
    for k in 1..n {
        edges.push((rng.random_range(0..k), k));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(0.2) && !edges.contains(&(i, j)) && !edges.contains(&(j, i)) {
                edges.push((i, j));
            }
        }
    }
    Topology::undirected(n, &edges).expect("valid graph")
}

/// All undirected graphs on `n` nodes, as edge lists.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let count = 1u64 << pairs.len();
    (0..count).map(move |mask| {
        pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect()
    })
}
