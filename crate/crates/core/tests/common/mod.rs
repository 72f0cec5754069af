#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use diffsamp::graph::load_edge_list;
use diffsamp::{Edge, Graph, NodeId, SimRng};
use rand::{Rng, SeedableRng};

pub fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::from_edges(n, edges.iter().copied().map(Edge::from)).unwrap().0
}

pub fn rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Exact distribution of infection vectors from `seed`, by enumerating
/// every live/blocked assignment of the edges. An attempt on `(u, v)`
/// happens only when `v` is still uninfected, and succeeds iff the edge is
/// live, so each assignment fixes one outcome.
pub fn enumerate_ivs(g: &Graph, seed: usize, beta: f64) -> HashMap<Vec<Edge>, f64> {
    let edges: Vec<Edge> = g.edges().collect();
    let m = edges.len();
    assert!(m <= 16, "enumeration is exponential in the edge count");
    let mut out = HashMap::new();
    for mask in 0u32..(1 << m) {
        let live = |i: usize| mask & (1 << i) != 0;
        let p: f64 = (0..m).map(|i| if live(i) { beta } else { 1.0 - beta }).product();
        let mut infected = vec![false; g.node_count()];
        infected[seed] = true;
        let mut queue = VecDeque::from([seed]);
        let mut iv = Vec::new();
        while let Some(u) = queue.pop_front() {
            for (i, e) in edges.iter().enumerate() {
                if e.src.index() != u || infected[e.dst.index()] {
                    continue;
                }
                if live(i) {
                    infected[e.dst.index()] = true;
                    queue.push_back(e.dst.index());
                    iv.push(*e);
                }
            }
        }
        *out.entry(iv).or_insert(0.0) += p;
    }
    out
}

/// True when an empirical frequency `hits / n` lies within 3 binomial
/// standard deviations of `p`.
pub fn within_3_sigma(hits: usize, n: usize, p: f64) -> bool {
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    (hits as f64 / n as f64 - p).abs() <= 3.0 * sigma + 1e-12
}

/// Edge-list text for a connected stand-in network with exactly `n` nodes
/// and `m` edges: every node `i >= 1` links to a uniform earlier node, then
/// uniform random edges fill up to `m`.
pub fn surrogate_edge_list(n: usize, m: usize, seed: u64) -> String {
    assert!(m >= n - 1 && m <= n * (n - 1));
    let mut r = rng(seed);
    let mut set = std::collections::HashSet::new();
    let mut order = Vec::with_capacity(m);
    for i in 1..n {
        let j = r.random_range(0..i);
        set.insert((i, j));
        order.push((i, j));
    }
    while order.len() < m {
        let (u, v) = (r.random_range(0..n), r.random_range(0..n));
        if u != v && set.insert((u, v)) {
            order.push((u, v));
        }
    }
    let mut text = String::new();
    writeln!(text, "# stand-in network").unwrap();
    writeln!(text, "# nodes: {n}").unwrap();
    for (u, v) in order {
        writeln!(text, "{u}\t{v}").unwrap();
    }
    text
}

pub fn load_text(text: &str) -> Graph {
    load_edge_list(text.as_bytes(), true).unwrap().graph
}

pub fn node(i: usize) -> NodeId {
    NodeId::from(i)
}
