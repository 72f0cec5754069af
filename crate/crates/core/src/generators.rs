//! Synthetic underlying networks: stochastic Kronecker graphs with a 2×2
//! initiator and the Forest Fire growth model.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};

/// Draws allowed per requested edge before Kronecker generation gives up.
pub const DEFAULT_DRAWS_PER_EDGE: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct KroneckerParams {
    /// Initiator probabilities, row-major `[[a, b], [c, d]]`.
    pub seed_matrix: [[f64; 2]; 2],
    /// Recursion depth; the graph has `2^iterations` nodes.
    pub iterations: u32,
    pub target_edges: usize,
    pub draws_per_edge: usize,
}

impl KroneckerParams {
    pub fn new(seed_matrix: [[f64; 2]; 2], iterations: u32, target_edges: usize) -> Self {
        KroneckerParams {
            seed_matrix,
            iterations,
            target_edges,
            draws_per_edge: DEFAULT_DRAWS_PER_EDGE,
        }
    }

    pub fn node_count(&self) -> usize {
        1usize << self.iterations
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.iterations > 30 {
            return Err(Error::InvalidParameter(format!(
                "kronecker iterations must be in 1..=30, got {}",
                self.iterations
            )));
        }
        let flat = self.seed_matrix.iter().flatten();
        if flat.clone().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter(
                "kronecker seed matrix entries must lie in [0, 1]".into(),
            ));
        }
        if flat.sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter(
                "kronecker seed matrix must have a positive entry".into(),
            ));
        }
        let n = self.node_count() as u128;
        if self.target_edges as u128 > n * (n - 1) {
            return Err(Error::InvalidParameter(format!(
                "{} edges exceed the {} possible links between {} nodes",
                self.target_edges,
                n * (n - 1),
                n
            )));
        }
        Ok(())
    }
}

/// Places exactly `target_edges` distinct directed edges by recursive
/// quadrant descent through the seed matrix. Self-loops and repeats are
/// redrawn; isolated nodes are kept.
pub fn kronecker_generate<R: Rng + ?Sized>(params: &KroneckerParams, rng: &mut R) -> Result<Graph> {
    params.validate()?;
    let total: f64 = params.seed_matrix.iter().flatten().sum();
    let m = &params.seed_matrix;
    let cumulative = [
        m[0][0] / total,
        (m[0][0] + m[0][1]) / total,
        (m[0][0] + m[0][1] + m[1][0]) / total,
    ];
    let max_draws = params.draws_per_edge.saturating_mul(params.target_edges.max(1));
    let mut seen: HashSet<(u32, u32)> = HashSet::with_capacity(params.target_edges);
    let mut edges = Vec::with_capacity(params.target_edges);
    let mut draws = 0usize;
    while edges.len() < params.target_edges {
        if draws >= max_draws {
            return Err(Error::Generation(format!(
                "placed {} of {} kronecker edges within {} draws",
                edges.len(),
                params.target_edges,
                max_draws
            )));
        }
        draws += 1;
        let (mut row, mut col) = (0u32, 0u32);
        for _ in 0..params.iterations {
            let r: f64 = rng.random();
            let (i, j) = if r < cumulative[0] {
                (0, 0)
            } else if r < cumulative[1] {
                (0, 1)
            } else if r < cumulative[2] {
                (1, 0)
            } else {
                (1, 1)
            };
            row = (row << 1) | i;
            col = (col << 1) | j;
        }
        if row != col && seen.insert((row, col)) {
            edges.push(Edge {
                src: NodeId(row),
                dst: NodeId(col),
            });
        }
    }
    let (graph, _) = Graph::from_edges(params.node_count(), edges)?;
    Ok(graph)
}

/// How many neighbors a burning node ignites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BurnCount {
    /// A geometric number with mean `p / (1 - p)`, drawn once per side.
    Geometric,
    /// Every unburned neighbor ignites independently with probability `p`.
    PerNeighbor,
}

/// How the backward burning parameter is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackwardBurn {
    /// Backward burning probability is `backward * forward`.
    Ratio,
    /// Backward burning probability is `backward` itself.
    Absolute,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForestFireParams {
    /// Nodes of the initial directed cycle (a single node when 1).
    pub start_nodes: usize,
    pub forward_prob: f64,
    pub backward_prob: f64,
    pub backward_mode: BackwardBurn,
    pub burn_count: BurnCount,
    pub ambassadors: usize,
    /// Chance that a new node joins without any links.
    pub orphan_prob: f64,
    pub target_nodes: usize,
    /// Expected edge count; informational only.
    pub target_edges: Option<usize>,
}

impl ForestFireParams {
    pub fn new(forward_prob: f64, backward_prob: f64, ambassadors: usize, target_nodes: usize) -> Self {
        ForestFireParams {
            start_nodes: 1,
            forward_prob,
            backward_prob,
            backward_mode: BackwardBurn::Absolute,
            burn_count: BurnCount::Geometric,
            ambassadors,
            orphan_prob: 0.0,
            target_nodes,
            target_edges: None,
        }
    }

    /// Effective per-node burning probabilities `(forward, backward)`.
    pub fn burn_probs(&self) -> (f64, f64) {
        let back = match self.backward_mode {
            BackwardBurn::Ratio => self.backward_prob * self.forward_prob,
            BackwardBurn::Absolute => self.backward_prob,
        };
        (self.forward_prob, back)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |p: f64| (0.0..1.0).contains(&p);
        if !unit(self.forward_prob) || !unit(self.backward_prob) {
            return Err(Error::InvalidParameter(
                "forest fire burning probabilities must lie in [0, 1)".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.orphan_prob) {
            return Err(Error::InvalidParameter(
                "forest fire orphan probability must lie in [0, 1]".into(),
            ));
        }
        if self.target_nodes == 0 || self.ambassadors == 0 || self.start_nodes == 0 {
            return Err(Error::InvalidParameter(
                "forest fire needs target_nodes, ambassadors and start_nodes >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Grows a directed Forest Fire graph to `target_nodes` nodes.
///
/// Each new node picks its ambassadors uniformly, links to them, and spreads
/// a fire from each one over out-links and in-links, never revisiting a
/// burned node; it then links to every burned node. How many neighbors each
/// burning node ignites is set by [`BurnCount`], using the probabilities
/// from [`ForestFireParams::burn_probs`].
pub fn forest_fire_generate<R: Rng + ?Sized>(params: &ForestFireParams, rng: &mut R) -> Result<Graph> {
    params.validate()?;
    let (fwd, back) = params.burn_probs();
    let fwd_burns = Geometric::new(1.0 - fwd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let back_burns = Geometric::new(1.0 - back).map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let n = params.target_nodes;
    let start = params.start_nodes.min(n);
    let mut out_adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut in_adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut edges: Vec<Edge> = Vec::new();
    let mut link = |out_adj: &mut Vec<Vec<u32>>, in_adj: &mut Vec<Vec<u32>>, s: usize, d: usize| {
        out_adj[s].push(d as u32);
        in_adj[d].push(s as u32);
        edges.push(Edge::new(s, d));
    };
    if start >= 2 {
        for i in 0..start {
            link(&mut out_adj, &mut in_adj, i, (i + 1) % start);
        }
    }

    // Burn marks are stamped with the id of the node being added.
    let mut burned_by: Vec<u32> = vec![u32::MAX; n];
    let mut queue: Vec<u32> = Vec::new();
    let mut candidates: Vec<u32> = Vec::new();
    let mut new_links: Vec<u32> = Vec::new();
    for v in start..n {
        if params.orphan_prob > 0.0 && rng.random::<f64>() < params.orphan_prob {
            continue;
        }
        let stamp = v as u32;
        burned_by[v] = stamp;
        new_links.clear();
        let k = params.ambassadors.min(v);
        let ambassadors = rand::seq::index::sample(rng, v, k);
        for a in ambassadors.iter() {
            if burned_by[a] == stamp {
                continue;
            }
            burned_by[a] = stamp;
            new_links.push(a as u32);
            queue.clear();
            queue.push(a as u32);
            let mut head = 0;
            while head < queue.len() {
                let w = queue[head] as usize;
                head += 1;
                for (outward, neighbors) in [(true, &out_adj[w]), (false, &in_adj[w])] {
                    let p = if outward { fwd } else { back };
                    candidates.clear();
                    candidates.extend(neighbors.iter().copied().filter(|&u| burned_by[u as usize] != stamp));
                    candidates.sort_unstable();
                    candidates.dedup();
                    let chosen: &[u32] = match params.burn_count {
                        BurnCount::Geometric => {
                            let dist = if outward { &fwd_burns } else { &back_burns };
                            let take = (dist.sample(rng) as usize).min(candidates.len());
                            candidates.partial_shuffle(rng, take).0
                        }
                        BurnCount::PerNeighbor => {
                            candidates.retain(|_| rng.random::<f64>() < p);
                            &candidates
                        }
                    };
                    for &u in chosen.iter() {
                        burned_by[u as usize] = stamp;
                        new_links.push(u);
                        queue.push(u);
                    }
                }
            }
        }
        for &u in &new_links {
            link(&mut out_adj, &mut in_adj, v, u as usize);
        }
    }
    let (graph, _) = Graph::from_edges(n, edges)?;
    Ok(graph)
}

/// The synthetic networks used in the reference experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    CorePeriphery,
    Hierarchical,
    Random,
    ForestFire,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::CorePeriphery,
        Preset::Hierarchical,
        Preset::Random,
        Preset::ForestFire,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::CorePeriphery => "core_periphery",
            Preset::Hierarchical => "hierarchical",
            Preset::Random => "random",
            Preset::ForestFire => "forest_fire",
        }
    }

    pub fn parse(s: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Transmission probability paired with this network.
    pub fn beta(self) -> f64 {
        match self {
            Preset::CorePeriphery => 0.1,
            _ => 0.5,
        }
    }

    /// Published densification exponent for this network.
    pub fn expected_densification(self) -> f64 {
        match self {
            Preset::CorePeriphery | Preset::Random => 1.06,
            Preset::Hierarchical | Preset::ForestFire => 1.03,
        }
    }

    pub fn expected_nodes(self) -> usize {
        match self {
            Preset::ForestFire => 10_000,
            _ => 8192,
        }
    }

    pub fn expected_edges(self) -> usize {
        match self {
            Preset::CorePeriphery | Preset::Random => 15_000,
            Preset::Hierarchical => 11_707,
            Preset::ForestFire => 14_305,
        }
    }

    pub fn network(self) -> NetworkParams {
        match self {
            Preset::CorePeriphery => {
                NetworkParams::Kronecker(KroneckerParams::new([[0.9, 0.5], [0.5, 0.3]], 13, 15_000))
            }
            Preset::Hierarchical => {
                NetworkParams::Kronecker(KroneckerParams::new([[0.5, 0.5], [0.5, 0.5]], 13, 11_707))
            }
            Preset::Random => {
                NetworkParams::Kronecker(KroneckerParams::new([[0.9, 0.1], [0.1, 0.9]], 13, 15_000))
            }
            Preset::ForestFire => NetworkParams::ForestFire(ForestFireParams {
                start_nodes: 5,
                forward_prob: 0.12,
                backward_prob: 0.1,
                backward_mode: BackwardBurn::Absolute,
                burn_count: BurnCount::Geometric,
                ambassadors: 1,
                orphan_prob: 0.0,
                target_nodes: 10_000,
                target_edges: Some(14_305),
            }),
        }
    }

    /// Same family at `2^iterations` nodes with the edge count scaled by
    /// the node ratio, for quick runs.
    pub fn scaled(self, iterations: u32) -> NetworkParams {
        let full = 1usize << 13;
        let n = 1usize << iterations;
        match self.network() {
            NetworkParams::Kronecker(mut k) => {
                k.target_edges = k.target_edges * n / full;
                k.iterations = iterations;
                NetworkParams::Kronecker(k)
            }
            NetworkParams::ForestFire(mut f) => {
                f.target_nodes = n;
                f.target_edges = f.target_edges.map(|e| e * n / 10_000);
                NetworkParams::ForestFire(f)
            }
        }
    }
}

/// Parameters of either generator.
#[derive(Clone, Debug, PartialEq)]
pub enum NetworkParams {
    Kronecker(KroneckerParams),
    ForestFire(ForestFireParams),
}

impl NetworkParams {
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Graph> {
        match self {
            NetworkParams::Kronecker(p) => kronecker_generate(p, rng),
            NetworkParams::ForestFire(p) => forest_fire_generate(p, rng),
        }
    }
}
