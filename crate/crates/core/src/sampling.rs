//! Edge-budgeted BFS and random-walk exploration, and the two sampling
//! approaches built on them.
//!
//! Structure-based sampling (SBS) crawls the underlying graph and then keeps
//! only the crawled links that belong to the diffusion network.
//! Diffusion-based sampling (DBS) crawls the diffusion network directly.
//! Budgets are counted in distinct edges, and SBS gets the same budget over
//! the underlying graph that DBS gets over the diffusion network.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};

use crate::diffusion::DiffusionNetwork;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};
use crate::SimRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Approach {
    Sbs,
    Dbs,
}

impl Approach {
    pub const ALL: [Approach; 2] = [Approach::Sbs, Approach::Dbs];

    pub fn name(self) -> &'static str {
        match self {
            Approach::Sbs => "SBS",
            Approach::Dbs => "DBS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Technique {
    Bfs,
    Rw,
}

impl Technique {
    pub const ALL: [Technique; 2] = [Technique::Bfs, Technique::Rw];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Bfs => "BFS",
            Technique::Rw => "RW",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Underlying,
    Diffusion,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::Underlying => "underlying",
            Origin::Diffusion => "diffusion",
        }
    }
}

pub const DEFAULT_RW_RESTART: f64 = 0.15;
/// Random-walk steps allowed per budgeted edge.
pub const DEFAULT_STEP_CAP_FACTOR: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpec {
    pub approach: Approach,
    pub technique: Technique,
    /// Sampling rate in `(0, 1]`, relative to the diffusion network's edges.
    pub mu: f64,
    pub rng_seed: u64,
    /// Random-walk restart probability.
    pub rw_restart: f64,
    /// Steps without a new edge before the walk jumps; `100 * sqrt(budget)`
    /// when `None`.
    pub stall_limit: Option<usize>,
    pub step_cap_factor: usize,
    /// SBS only: keep endpoints of crawled links that are not diffusion
    /// links in the sampled node set.
    pub keep_crawled_nodes: bool,
}

impl SampleSpec {
    pub fn new(approach: Approach, technique: Technique, mu: f64, rng_seed: u64) -> Self {
        SampleSpec {
            approach,
            technique,
            mu,
            rng_seed,
            rw_restart: DEFAULT_RW_RESTART,
            stall_limit: None,
            step_cap_factor: DEFAULT_STEP_CAP_FACTOR,
            keep_crawled_nodes: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sampling rate must lie in (0, 1], got {}",
                self.mu
            )));
        }
        if !(0.0..1.0).contains(&self.rw_restart) {
            return Err(Error::InvalidParameter(format!(
                "random-walk restart probability must lie in [0, 1), got {}",
                self.rw_restart
            )));
        }
        Ok(())
    }

    pub fn rng(&self) -> SimRng {
        SimRng::seed_from_u64(self.rng_seed)
    }

    fn stall_limit_for(&self, budget: usize) -> usize {
        self.stall_limit
            .unwrap_or_else(|| (100.0 * (budget as f64).sqrt()).ceil() as usize)
            .max(1)
    }
}

/// Edges collected by one exploration, as edge ids of the explored graph in
/// collection order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exploration {
    pub edge_ids: Vec<usize>,
    /// The budget exceeded what the graph could supply.
    pub exhausted: bool,
}

impl Exploration {
    pub fn edges<'a>(&'a self, g: &'a Graph) -> impl Iterator<Item = Edge> + 'a {
        self.edge_ids.iter().map(move |&id| g.edge(id))
    }
}

fn check_explore_args(g: &Graph, start: NodeId, budget: usize) -> Result<()> {
    if budget == 0 {
        return Err(Error::Sampling("edge budget must be at least 1".into()));
    }
    if g.edge_count() == 0 {
        return Err(Error::Sampling("cannot explore a graph without edges".into()));
    }
    if start.index() >= g.node_count() {
        return Err(Error::Sampling(format!("start node {start} outside graph")));
    }
    Ok(())
}

/// Picks uniformly among nodes with out-links that satisfy `fresh`, dropping
/// stale entries as it goes.
fn pick_restart<R, F>(pool: &mut Vec<NodeId>, rng: &mut R, mut fresh: F) -> Option<NodeId>
where
    R: Rng + ?Sized,
    F: FnMut(NodeId) -> bool,
{
    while !pool.is_empty() {
        let i = rng.random_range(0..pool.len());
        let u = pool[i];
        if fresh(u) {
            return Some(u);
        }
        pool.swap_remove(i);
    }
    None
}

fn nodes_with_out_links(g: &Graph) -> Vec<NodeId> {
    g.nodes().filter(|&u| g.out_degree(u) > 0).collect()
}

/// Queue-driven crawl over out-links. Dequeuing `u` collects each `(u, v)`
/// in adjacency order and enqueues unseen `v`; the crawl stops mid-scan once
/// the budget is met. When the queue runs dry it restarts from a uniformly
/// random unseen node that has out-links.
pub fn bfs_explore<R: Rng + ?Sized>(g: &Graph, start: NodeId, edge_budget: usize, rng: &mut R) -> Result<Exploration> {
    check_explore_args(g, start, edge_budget)?;
    let budget = edge_budget.min(g.edge_count());
    let mut seen = vec![false; g.node_count()];
    let mut pool = nodes_with_out_links(g);
    let mut queue = VecDeque::new();
    let mut edge_ids = Vec::with_capacity(budget);
    seen[start.index()] = true;
    queue.push_back(start);
    'crawl: while edge_ids.len() < budget {
        let u = match queue.pop_front() {
            Some(u) => u,
            None => match pick_restart(&mut pool, rng, |c| !seen[c.index()]) {
                Some(c) => {
                    seen[c.index()] = true;
                    c
                }
                None => break,
            },
        };
        for eid in g.out_edge_ids(u) {
            edge_ids.push(eid);
            if edge_ids.len() == budget {
                break 'crawl;
            }
            let v = g.edge(eid).dst;
            if !seen[v.index()] {
                seen[v.index()] = true;
                queue.push_back(v);
            }
        }
    }
    Ok(Exploration {
        exhausted: edge_budget > g.edge_count(),
        edge_ids,
    })
}

/// Random walk over out-links that counts each edge the first time it is
/// traversed.
///
/// Each step either restarts at a uniformly random visited node (with
/// probability `rw_restart`, or always at a node without out-links) or
/// follows a uniformly random out-link. After `stall_limit` steps without a
/// new edge the walk jumps to a uniformly random node that still has an
/// uncollected out-link, so a full budget always exhausts the graph.
pub fn rw_explore<R: Rng + ?Sized>(
    g: &Graph,
    start: NodeId,
    edge_budget: usize,
    spec: &SampleSpec,
    rng: &mut R,
) -> Result<Exploration> {
    check_explore_args(g, start, edge_budget)?;
    let budget = edge_budget.min(g.edge_count());
    let stall_limit = spec.stall_limit_for(budget);
    let step_cap = spec.step_cap_factor.saturating_mul(budget);
    let mut pool = nodes_with_out_links(g);
    let mut uncollected: Vec<usize> = g.nodes().map(|u| g.out_degree(u)).collect();
    let mut collected = vec![false; g.edge_count()];
    let mut seen = vec![false; g.node_count()];
    let mut visited = Vec::new();
    let mut edge_ids = Vec::with_capacity(budget);
    let visit = |u: NodeId, seen: &mut Vec<bool>, visited: &mut Vec<NodeId>| {
        if !seen[u.index()] {
            seen[u.index()] = true;
            visited.push(u);
        }
    };
    let mut u = start;
    visit(u, &mut seen, &mut visited);
    let mut stall = 0usize;
    let mut steps = 0usize;
    while edge_ids.len() < budget && steps < step_cap {
        steps += 1;
        if stall >= stall_limit {
            match pick_restart(&mut pool, rng, |c| uncollected[c.index()] > 0) {
                Some(c) => u = c,
                None => break,
            }
            visit(u, &mut seen, &mut visited);
            stall = 0;
            continue;
        }
        let degree = g.out_degree(u);
        if degree == 0 || rng.random::<f64>() < spec.rw_restart {
            u = visited[rng.random_range(0..visited.len())];
            stall += 1;
            continue;
        }
        let eid = g.out_edge_ids(u).start + rng.random_range(0..degree);
        if collected[eid] {
            stall += 1;
        } else {
            collected[eid] = true;
            uncollected[u.index()] -= 1;
            edge_ids.push(eid);
            stall = 0;
        }
        u = g.edge(eid).dst;
        visit(u, &mut seen, &mut visited);
    }
    Ok(Exploration {
        exhausted: edge_budget > g.edge_count() || edge_ids.len() < budget,
        edge_ids,
    })
}

fn explore<R: Rng + ?Sized>(g: &Graph, start: NodeId, budget: usize, spec: &SampleSpec, rng: &mut R) -> Result<Exploration> {
    match spec.technique {
        Technique::Bfs => bfs_explore(g, start, budget, rng),
        Technique::Rw => rw_explore(g, start, budget, spec, rng),
    }
}

/// A sample of the diffusion network.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledNetwork {
    edges: Vec<Edge>,
    nodes: Vec<NodeId>,
    pub spec: SampleSpec,
    /// Edge budget handed to the crawler.
    pub budget: usize,
    /// Edges crawled before diffusion extraction (equal to the edge count
    /// for DBS).
    pub budget_used: usize,
    pub origin: Origin,
    pub exhausted: bool,
}

impl SampledNetwork {
    /// Sampled diffusion links, sorted.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sampled nodes, sorted.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Sampled nodes with out-links but no in-links inside the sample.
    pub fn roots(&self) -> Vec<NodeId> {
        let mut has_in: Vec<NodeId> = self.edges.iter().map(|e| e.dst).collect();
        has_in.sort_unstable();
        has_in.dedup();
        let mut roots: Vec<NodeId> = self
            .edges
            .iter()
            .map(|e| e.src)
            .filter(|u| has_in.binary_search(u).is_err())
            .collect();
        roots.dedup();
        roots
    }

    /// Assembles a sample from its diffusion links. Nodes are the edge
    /// endpoints plus `extra_nodes`.
    pub fn from_edges(
        mut edges: Vec<Edge>,
        extra_nodes: impl IntoIterator<Item = NodeId>,
        spec: &SampleSpec,
        budget: usize,
        budget_used: usize,
        origin: Origin,
        exhausted: bool,
    ) -> Self {
        edges.sort_unstable();
        let mut nodes: Vec<NodeId> = edges
            .iter()
            .flat_map(|e| [e.src, e.dst])
            .chain(extra_nodes)
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        SampledNetwork {
            edges,
            nodes,
            spec: spec.clone(),
            budget,
            budget_used,
            origin,
            exhausted,
        }
    }
}

/// DBS edge budget: `round(mu * |E*|)`, at least 1.
pub fn dbs_budget(dn: &DiffusionNetwork, mu: f64) -> usize {
    ((mu * dn.edge_count() as f64).round() as usize).max(1)
}

/// SBS underlying budget: `round(mu * coverage * m)`. Since
/// `coverage * m = |E*|` exactly, this is computed from the integer count so
/// it matches the DBS budget at the same rate.
pub fn sbs_budget(dn: &DiffusionNetwork, mu: f64) -> usize {
    (mu * dn.edge_count() as f64).round() as usize
}

fn uniform_node<R: Rng + ?Sized>(nodes: &[NodeId], rng: &mut R) -> NodeId {
    nodes[rng.random_range(0..nodes.len())]
}

/// Diffusion-based sampling: crawl G* from a uniformly random node of V*.
pub fn sample_dbs<R: Rng + ?Sized>(dn: &DiffusionNetwork, spec: &SampleSpec, rng: &mut R) -> Result<SampledNetwork> {
    spec.validate()?;
    if spec.approach != Approach::Dbs {
        return Err(Error::InvalidParameter("sample_dbs needs a DBS spec".into()));
    }
    if dn.is_empty() {
        return Err(Error::Sampling("diffusion network has no edges".into()));
    }
    let budget = dbs_budget(dn, spec.mu);
    let star = dn.graph();
    let start = uniform_node(dn.nodes(), rng);
    let run = explore(star, start, budget, spec, rng)?;
    let edges: Vec<Edge> = run.edges(star).collect();
    let used = edges.len();
    Ok(SampledNetwork::from_edges(
        edges,
        std::iter::empty(),
        spec,
        budget,
        used,
        Origin::Diffusion,
        run.exhausted,
    ))
}

/// Structure-based sampling: crawl G from a uniformly random node, then keep
/// the crawled links that belong to E*.
pub fn sample_sbs<R: Rng + ?Sized>(dn: &DiffusionNetwork, spec: &SampleSpec, rng: &mut R) -> Result<SampledNetwork> {
    spec.validate()?;
    if spec.approach != Approach::Sbs {
        return Err(Error::InvalidParameter("sample_sbs needs an SBS spec".into()));
    }
    let g = dn.source();
    if g.edge_count() == 0 {
        return Err(Error::Sampling("underlying graph has no edges".into()));
    }
    let budget = sbs_budget(dn, spec.mu);
    if budget == 0 {
        return Err(Error::Sampling(format!(
            "sampling rate {} gives an empty underlying budget; use a larger rate",
            spec.mu
        )));
    }
    let start = NodeId::from(rng.random_range(0..g.node_count()));
    let run = explore(g, start, budget, spec, rng)?;
    let kept: Vec<Edge> = run
        .edge_ids
        .iter()
        .filter(|&&id| dn.contains_source_edge(id))
        .map(|&id| g.edge(id))
        .collect();
    let crawled_nodes: Vec<NodeId> = if spec.keep_crawled_nodes {
        run.edges(g).flat_map(|e| [e.src, e.dst]).collect()
    } else {
        Vec::new()
    };
    Ok(SampledNetwork::from_edges(
        kept,
        crawled_nodes,
        spec,
        budget,
        run.edge_ids.len(),
        Origin::Underlying,
        run.exhausted,
    ))
}

/// Runs the approach named in `spec`.
pub fn sample<R: Rng + ?Sized>(dn: &DiffusionNetwork, spec: &SampleSpec, rng: &mut R) -> Result<SampledNetwork> {
    match spec.approach {
        Approach::Sbs => sample_sbs(dn, spec, rng),
        Approach::Dbs => sample_dbs(dn, spec, rng),
    }
}

/// Metadata read back from a sidecar written by [`write_sample_metadata`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMetadata {
    pub spec: SampleSpec,
    pub budget: usize,
    pub budget_used: usize,
    pub origin: Origin,
    pub exhausted: bool,
}

pub fn read_sample_metadata<R: std::io::BufRead>(reader: R) -> Result<SampleMetadata> {
    let mut fields = std::collections::HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected key=value, got {line:?}"),
        })?;
        fields.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    let get = |k: &str| {
        fields.get(k).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing key {k}"),
        })
    };
    let bad = |k: &str| Error::Parse {
        line: 0,
        message: format!("bad value for {k}"),
    };
    let num = |k: &str| get(k)?.parse::<u64>().map_err(|_| bad(k));
    let approach = Approach::parse(get("approach")?).ok_or_else(|| bad("approach"))?;
    let technique = Technique::parse(get("technique")?).ok_or_else(|| bad("technique"))?;
    let mu = get("mu")?.parse::<f64>().map_err(|_| bad("mu"))?;
    let origin = match get("origin")?.as_str() {
        "underlying" => Origin::Underlying,
        "diffusion" => Origin::Diffusion,
        _ => return Err(bad("origin")),
    };
    Ok(SampleMetadata {
        spec: SampleSpec::new(approach, technique, mu, num("seed")?),
        budget: num("budget")? as usize,
        budget_used: num("budget_used")? as usize,
        origin,
        exhausted: get("exhausted")?.parse().map_err(|_| bad("exhausted"))?,
    })
}

/// Writes the `key=value` sidecar describing a sample.
pub fn write_sample_metadata<W: Write>(s: &SampledNetwork, mut w: W) -> Result<()> {
    writeln!(w, "approach={}", s.spec.approach)?;
    writeln!(w, "technique={}", s.spec.technique)?;
    writeln!(w, "mu={}", s.spec.mu)?;
    writeln!(w, "seed={}", s.spec.rng_seed)?;
    writeln!(w, "budget={}", s.budget)?;
    writeln!(w, "budget_used={}", s.budget_used)?;
    writeln!(w, "origin={}", s.origin.name())?;
    writeln!(w, "edges={}", s.edges.len())?;
    writeln!(w, "nodes={}", s.nodes.len())?;
    writeln!(w, "exhausted={}", s.exhausted)?;
    w.flush()?;
    Ok(())
}
