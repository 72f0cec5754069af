//! Independent-cascade diffusion over an underlying graph and assembly of
//! the diffusion network from the resulting cascades.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::sync::{Arc, OnceLock};

use rand::Rng;

use crate::characteristics::AttendanceIndex;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};

/// One diffusion episode: a seed and the edges it crossed, in the order they
/// were crossed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cascade {
    pub id: u32,
    pub seed: NodeId,
    pub infection_vector: Vec<Edge>,
}

impl Cascade {
    pub fn new(id: u32, seed: NodeId, infection_vector: Vec<Edge>) -> Self {
        Cascade {
            id,
            seed,
            infection_vector,
        }
    }

    /// Number of edges the cascade crossed.
    pub fn len(&self) -> usize {
        self.infection_vector.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infection_vector.is_empty()
    }

    /// Seed followed by every infected node in infection order.
    pub fn infected(&self) -> Vec<NodeId> {
        std::iter::once(self.seed)
            .chain(self.infection_vector.iter().map(|e| e.dst))
            .collect()
    }

    /// Checks that every edge leaves an already-infected node and that no
    /// node is infected twice.
    pub fn check_causality(&self) -> std::result::Result<(), String> {
        let mut infected = HashSet::with_capacity(self.len() + 1);
        infected.insert(self.seed);
        for (i, e) in self.infection_vector.iter().enumerate() {
            if !infected.contains(&e.src) {
                return Err(format!(
                    "cascade {}: edge {} ({} -> {}) leaves a node that is not yet infected",
                    self.id, i, e.src, e.dst
                ));
            }
            if !infected.insert(e.dst) {
                return Err(format!(
                    "cascade {}: node {} infected more than once",
                    self.id, e.dst
                ));
            }
        }
        Ok(())
    }
}

mod sealed {
    pub trait Sealed {}
}

/// Per-edge transmission rule of the cascade process.
pub trait Transmission: sealed::Sealed {
    /// Whether the infection crosses edge `edge_id` on its single attempt.
    fn transmits<R: Rng + ?Sized>(&mut self, edge_id: usize, rng: &mut R) -> bool;
}

/// Every attempt succeeds independently with probability `beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bernoulli(pub f64);

impl sealed::Sealed for Bernoulli {}

impl Transmission for Bernoulli {
    #[inline]
    fn transmits<R: Rng + ?Sized>(&mut self, _edge_id: usize, rng: &mut R) -> bool {
        rng.random::<f64>() < self.0
    }
}

/// Transmission decided by a pre-drawn uniform per edge: edge `e` is live
/// iff `uniforms[e] < beta`. Sharing the uniforms across several `beta`
/// values couples the runs.
#[derive(Clone, Copy, Debug)]
pub struct LiveEdge<'u> {
    pub beta: f64,
    pub uniforms: &'u [f64],
}

impl sealed::Sealed for LiveEdge<'_> {}

impl Transmission for LiveEdge<'_> {
    #[inline]
    fn transmits<R: Rng + ?Sized>(&mut self, edge_id: usize, _rng: &mut R) -> bool {
        self.uniforms[edge_id] < self.beta
    }
}

/// Reusable cascade workspace over one graph.
pub struct CascadeSimulator<'g> {
    graph: &'g Graph,
    mark: Vec<u32>,
    epoch: u32,
    queue: Vec<NodeId>,
}

impl<'g> CascadeSimulator<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        CascadeSimulator {
            graph,
            mark: vec![0; graph.node_count()],
            epoch: 0,
            queue: Vec::new(),
        }
    }

    /// Runs one cascade from `seed`. Newly infected nodes are processed in
    /// breadth order; each gets a single attempt on every still-uninfected
    /// out-neighbor, in adjacency order.
    pub fn run<T, R>(&mut self, id: u32, seed: NodeId, transmission: &mut T, rng: &mut R) -> Cascade
    where
        T: Transmission,
        R: Rng + ?Sized,
    {
        if self.epoch == u32::MAX {
            self.mark.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
        let epoch = self.epoch;
        let g = self.graph;
        self.queue.clear();
        self.queue.push(seed);
        self.mark[seed.index()] = epoch;
        let mut iv = Vec::new();
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            for eid in g.out_edge_ids(u) {
                let v = g.edge(eid).dst;
                if self.mark[v.index()] == epoch {
                    continue;
                }
                if transmission.transmits(eid, rng) {
                    self.mark[v.index()] = epoch;
                    self.queue.push(v);
                    iv.push(Edge { src: u, dst: v });
                }
            }
        }
        Cascade::new(id, seed, iv)
    }
}

/// Simulates a single independent cascade with transmission probability
/// `beta`.
pub fn simulate_cascade<R: Rng + ?Sized>(g: &Graph, seed: NodeId, beta: f64, rng: &mut R) -> Cascade {
    assert!(seed.index() < g.node_count(), "seed {seed} outside graph");
    CascadeSimulator::new(g).run(0, seed, &mut Bernoulli(beta), rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SeedPolicy {
    /// One seed per cascade, uniform over all nodes of the underlying graph.
    #[default]
    UniformNode,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionConfig {
    pub beta: f64,
    /// Target fraction of underlying edges covered by the diffusion network.
    pub delta: f64,
    /// Defaults to `50 * n` when `None`.
    pub max_cascades: Option<usize>,
    pub seed_policy: SeedPolicy,
}

impl DiffusionConfig {
    pub fn new(beta: f64, delta: f64) -> Self {
        DiffusionConfig {
            beta,
            delta,
            max_cascades: None,
            seed_policy: SeedPolicy::UniformNode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1], got {}",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn max_cascades_for(&self, g: &Graph) -> usize {
        self.max_cascades.unwrap_or(50 * g.node_count().max(1))
    }

    /// Number of distinct underlying edges the diffusion network must reach.
    pub fn target_edges(&self, m: usize) -> usize {
        ((self.delta * m as f64) - 1e-9).ceil().max(0.0) as usize
    }
}

/// The union of a set of cascades over their underlying graph.
#[derive(Debug)]
pub struct DiffusionNetwork {
    source: Arc<Graph>,
    graph: Graph,
    nodes: Vec<NodeId>,
    cascades: Vec<Cascade>,
    cascades_drawn: usize,
    member: Vec<bool>,
    seeds: Vec<NodeId>,
    target_edges: usize,
    attendance: OnceLock<AttendanceIndex>,
}

impl DiffusionNetwork {
    /// Assembles a diffusion network from cascades over `source`. Empty
    /// cascades are dropped; every IV edge must exist in `source` and every
    /// cascade must be causal.
    pub fn from_cascades(source: Arc<Graph>, cascades: Vec<Cascade>, cascades_drawn: usize) -> Result<Self> {
        let mut member = vec![false; source.edge_count()];
        let mut kept = Vec::with_capacity(cascades.len());
        for c in cascades {
            if c.seed.index() >= source.node_count() {
                return Err(Error::Domain(format!("cascade {} seed {} outside graph", c.id, c.seed)));
            }
            c.check_causality().map_err(Error::Domain)?;
            for e in &c.infection_vector {
                let id = source.edge_id(*e).ok_or_else(|| {
                    Error::Domain(format!(
                        "cascade {} uses edge ({}, {}) absent from the underlying graph",
                        c.id, e.src, e.dst
                    ))
                })?;
                member[id] = true;
            }
            if !c.is_empty() {
                kept.push(c);
            }
        }
        let edges: Vec<Edge> = (0..source.edge_count())
            .filter(|&id| member[id])
            .map(|id| source.edge(id))
            .collect();
        let graph = Graph::from_sorted_unique(source.node_count(), edges);
        let mut in_star = vec![false; source.node_count()];
        for e in graph.edges() {
            in_star[e.src.index()] = true;
            in_star[e.dst.index()] = true;
        }
        let mut seeds: Vec<NodeId> = kept.iter().map(|c| c.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        for s in &seeds {
            in_star[s.index()] = true;
        }
        let nodes = (0..source.node_count())
            .filter(|&u| in_star[u])
            .map(NodeId::from)
            .collect();
        Ok(DiffusionNetwork {
            source,
            graph,
            nodes,
            cascades: kept,
            cascades_drawn,
            member,
            seeds,
            target_edges: 0,
            attendance: OnceLock::new(),
        })
    }

    pub fn source(&self) -> &Graph {
        &self.source
    }

    pub fn source_arc(&self) -> &Arc<Graph> {
        &self.source
    }

    /// G* over the node space of the source graph.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// V*: endpoints of E* plus seeds of non-empty cascades, sorted.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Non-empty cascades in the order they were drawn.
    pub fn cascades(&self) -> &[Cascade] {
        &self.cascades
    }

    /// Cascades simulated, including those that infected nobody.
    pub fn cascades_drawn(&self) -> usize {
        self.cascades_drawn
    }

    /// Distinct seeds of the non-empty cascades, sorted.
    pub fn seeds(&self) -> &[NodeId] {
        &self.seeds
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.edge_count() == 0
    }

    /// Whether underlying edge `source_edge_id` belongs to E*.
    #[inline]
    pub fn contains_source_edge(&self, source_edge_id: usize) -> bool {
        self.member[source_edge_id]
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.graph.contains(e)
    }

    /// |E*| / m.
    pub fn coverage(&self) -> f64 {
        coverage(self)
    }

    /// Edge count the builder was aiming for, 0 when assembled from a file.
    pub fn target_edges(&self) -> usize {
        self.target_edges
    }

    pub fn reached_target(&self) -> bool {
        self.edge_count() >= self.target_edges
    }

    pub fn attendance(&self) -> &AttendanceIndex {
        self.attendance
            .get_or_init(|| AttendanceIndex::from_cascades(&self.cascades))
    }
}

/// Fraction of the underlying graph's edges covered by the diffusion
/// network.
pub fn coverage(dn: &DiffusionNetwork) -> f64 {
    let m = dn.source().edge_count();
    if m == 0 {
        return 0.0;
    }
    dn.edge_count() as f64 / m as f64
}

/// Draws cascades until E* covers `ceil(delta * m)` edges or the cascade cap
/// is hit. Never fails on low coverage; see [`DiffusionNetwork::reached_target`].
pub fn grow_diffusion_network<R: Rng + ?Sized>(
    g: Arc<Graph>,
    cfg: &DiffusionConfig,
    rng: &mut R,
) -> Result<DiffusionNetwork> {
    cfg.validate()?;
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::Domain("diffusion needs at least one edge".into()));
    }
    let target = cfg.target_edges(m);
    let max_cascades = cfg.max_cascades_for(&g);
    let mut member = vec![false; m];
    let mut covered = 0usize;
    let mut cascades = Vec::new();
    let mut drawn = 0usize;
    {
        let mut sim = CascadeSimulator::new(&g);
        let mut transmission = Bernoulli(cfg.beta);
        while covered < target && drawn < max_cascades {
            let seed = match cfg.seed_policy {
                SeedPolicy::UniformNode => NodeId::from(rng.random_range(0..g.node_count())),
            };
            let c = sim.run(drawn as u32, seed, &mut transmission, rng);
            drawn += 1;
            for e in &c.infection_vector {
                let id = g.edge_id(*e).expect("cascade edge in graph");
                if !member[id] {
                    member[id] = true;
                    covered += 1;
                }
            }
            if !c.is_empty() {
                cascades.push(c);
            }
        }
    }
    let mut dn = DiffusionNetwork::from_cascades(g, cascades, drawn)?;
    dn.target_edges = target;
    Ok(dn)
}

/// Like [`grow_diffusion_network`], but falling short of the coverage
/// target is an error carrying the achieved coverage.
pub fn build_diffusion_network<R: Rng + ?Sized>(
    g: Arc<Graph>,
    cfg: &DiffusionConfig,
    rng: &mut R,
) -> Result<DiffusionNetwork> {
    let dn = grow_diffusion_network(g, cfg, rng)?;
    if !dn.reached_target() {
        return Err(Error::PartialCoverage {
            achieved: dn.coverage(),
            target: cfg.delta,
            cascades: dn.cascades_drawn(),
        });
    }
    Ok(dn)
}

/// Writes cascades as `C <id> <seed>` records followed by their IV edges,
/// one record per block, blank-line separated.
pub fn write_cascades<W: Write>(dn: &DiffusionNetwork, mut w: W) -> Result<()> {
    writeln!(w, "# cascades_drawn: {}", dn.cascades_drawn())?;
    for (i, c) in dn.cascades().iter().enumerate() {
        if i > 0 {
            writeln!(w)?;
        }
        writeln!(w, "C {} {}", c.id, c.seed)?;
        for e in &c.infection_vector {
            writeln!(w, "{} {}", e.src, e.dst)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Cascades read back from a cascade file.
#[derive(Clone, Debug, Default)]
pub struct CascadeFile {
    pub cascades: Vec<Cascade>,
    /// From the `# cascades_drawn:` header when present.
    pub cascades_drawn: Option<usize>,
}

/// Parses the cascade format produced by [`write_cascades`], checking
/// causality of every record.
pub fn read_cascades<R: BufRead>(reader: R) -> Result<CascadeFile> {
    let mut out = CascadeFile::default();
    let mut current: Option<(usize, Cascade)> = None;
    let finish = |cur: Option<(usize, Cascade)>, out: &mut CascadeFile| -> Result<()> {
        if let Some((line, c)) = cur {
            c.check_causality()
                .map_err(|message| Error::Parse { line, message })?;
            out.cascades.push(c);
        }
        Ok(())
    };
    let parse_num = |tok: &str, line: usize| -> Result<u64> {
        tok.parse::<u64>().map_err(|_| Error::Parse {
            line,
            message: format!("expected a non-negative integer, got {tok:?}"),
        })
    };
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(comment) = t.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("cascades_drawn:") {
                out.cascades_drawn = Some(parse_num(v.trim(), lineno)? as usize);
            }
            continue;
        }
        let tokens: Vec<&str> = t.split_whitespace().collect();
        match tokens.as_slice() {
            ["C", id, seed] => {
                finish(current.take(), &mut out)?;
                let id = u32::try_from(parse_num(id, lineno)?).map_err(|_| Error::Parse {
                    line: lineno,
                    message: "cascade id exceeds u32".into(),
                })?;
                let seed = NodeId::from(parse_num(seed, lineno)? as usize);
                current = Some((lineno, Cascade::new(id, seed, Vec::new())));
            }
            [src, dst] => {
                let (_, c) = current.as_mut().ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: "edge line before any cascade header".into(),
                })?;
                c.infection_vector.push(Edge::new(
                    parse_num(src, lineno)? as usize,
                    parse_num(dst, lineno)? as usize,
                ));
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected `C <id> <seed>` or `<src> <dst>`, got {t:?}"),
                })
            }
        }
    }
    finish(current.take(), &mut out)?;
    Ok(out)
}
