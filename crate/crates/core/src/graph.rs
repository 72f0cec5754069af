//! Directed graph storage, edge-list ingestion and basic statistics.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use num_traits::Float;

use crate::error::{Error, Result};

/// Dense node index in `[0, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index exceeds u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Directed, unweighted link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
}

impl Edge {
    pub fn new(src: impl Into<NodeId>, dst: impl Into<NodeId>) -> Self {
        Edge {
            src: src.into(),
            dst: dst.into(),
        }
    }
}

impl From<(usize, usize)> for Edge {
    fn from((s, d): (usize, usize)) -> Self {
        Edge::new(s, d)
    }
}

/// Counts of records dropped while building a graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub duplicates: usize,
    pub self_loops: usize,
}

/// Immutable directed graph in compressed adjacency form.
///
/// Edges are stored sorted by `(src, dst)`; the position of an edge in that
/// order is its edge id, stable for the lifetime of the graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    edge_src: Vec<NodeId>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
}

impl Graph {
    /// Builds a graph over `node_count` nodes. Self-loops and parallel edges
    /// are dropped and counted; an endpoint outside `[0, node_count)` is an
    /// error.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<(Graph, BuildReport)>
    where
        I: IntoIterator<Item = Edge>,
    {
        if node_count > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "node count {node_count} exceeds u32 id space"
            )));
        }
        let mut report = BuildReport::default();
        let mut list = Vec::new();
        for e in edges {
            if e.src.index() >= node_count || e.dst.index() >= node_count {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) has an endpoint outside [0, {node_count})",
                    e.src, e.dst
                )));
            }
            if e.src == e.dst {
                report.self_loops += 1;
                continue;
            }
            list.push(e);
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        report.duplicates = before - list.len();
        Ok((Graph::from_sorted_unique(node_count, list), report))
    }

    /// Builds a graph from edges already sorted, deduplicated and loop-free.
    pub(crate) fn from_sorted_unique(node_count: usize, edges: Vec<Edge>) -> Graph {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        let m = edges.len();
        let mut out_offsets = vec![0usize; node_count + 1];
        let mut in_offsets = vec![0usize; node_count + 1];
        for e in &edges {
            out_offsets[e.src.index() + 1] += 1;
            in_offsets[e.dst.index() + 1] += 1;
        }
        for i in 0..node_count {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut out_targets = Vec::with_capacity(m);
        let mut edge_src = Vec::with_capacity(m);
        for e in &edges {
            out_targets.push(e.dst);
            edge_src.push(e.src);
        }
        // Sources arrive in increasing order, so each in-list ends up sorted.
        let mut cursor = in_offsets.clone();
        let mut in_sources = vec![NodeId(0); m];
        for e in &edges {
            let slot = &mut cursor[e.dst.index()];
            in_sources[*slot] = e.src;
            *slot += 1;
        }
        Graph {
            node_count,
            out_offsets,
            out_targets,
            edge_src,
            in_offsets,
            in_sources,
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    #[inline]
    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.out_targets[self.out_offsets[u.index()]..self.out_offsets[u.index() + 1]]
    }

    #[inline]
    pub fn in_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.in_sources[self.in_offsets[u.index()]..self.in_offsets[u.index() + 1]]
    }

    #[inline]
    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_offsets[u.index() + 1] - self.out_offsets[u.index()]
    }

    #[inline]
    pub fn in_degree(&self, u: NodeId) -> usize {
        self.in_offsets[u.index() + 1] - self.in_offsets[u.index()]
    }

    /// Edge id range of `u`'s out-links.
    #[inline]
    pub fn out_edge_ids(&self, u: NodeId) -> std::ops::Range<usize> {
        self.out_offsets[u.index()]..self.out_offsets[u.index() + 1]
    }

    #[inline]
    pub fn edge(&self, id: usize) -> Edge {
        Edge {
            src: self.edge_src[id],
            dst: self.out_targets[id],
        }
    }

    pub fn edge_id(&self, e: Edge) -> Option<usize> {
        if e.src.index() >= self.node_count {
            return None;
        }
        let range = self.out_edge_ids(e.src);
        let base = range.start;
        self.out_targets[range]
            .binary_search(&e.dst)
            .ok()
            .map(|i| base + i)
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edge_id(e).is_some()
    }

    /// Edges in `(src, dst)` order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = Edge> + '_ {
        (0..self.edge_count()).map(move |id| self.edge(id))
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> {
        (0..self.node_count).map(NodeId::from)
    }

    /// Ln(m) / ln(n) of this snapshot.
    pub fn densification_exponent<T: Float>(&self) -> Result<T> {
        densification_exponent(self.node_count, self.edge_count())
    }

    pub fn stats<T: Float>(&self) -> GraphStats<T> {
        graph_stats(self)
    }

    /// Nodes and edges of the largest weakly connected component.
    pub fn largest_weak_component(&self) -> (usize, usize) {
        let n = self.node_count;
        if n == 0 {
            return (0, 0);
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in self.edges() {
            let a = find(&mut parent, e.src.index());
            let b = find(&mut parent, e.dst.index());
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut nodes = vec![0usize; n];
        let mut edges = vec![0usize; n];
        for u in 0..n {
            let r = find(&mut parent, u);
            nodes[r] += 1;
        }
        for e in self.edges() {
            let r = find(&mut parent, e.src.index());
            edges[r] += 1;
        }
        (0..n)
            .max_by_key(|&r| (nodes[r], edges[r], std::cmp::Reverse(r)))
            .map(|r| (nodes[r], edges[r]))
            .unwrap_or((0, 0))
    }
}

/// Densification exponent `a` of the relation `E ∝ N^a` for a static
/// snapshot: `ln(edges) / ln(nodes)`.
pub fn densification_exponent<T: Float>(nodes: usize, edges: usize) -> Result<T> {
    if nodes < 2 || edges == 0 {
        return Err(Error::Domain(format!(
            "densification exponent needs at least 2 nodes and 1 edge (got n={nodes}, m={edges})"
        )));
    }
    let n = T::from(nodes).expect("node count as float");
    let m = T::from(edges).expect("edge count as float");
    Ok(m.ln() / n.ln())
}

/// Size summary of a graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphStats<T = f64> {
    pub nodes: usize,
    pub edges: usize,
    /// `None` when fewer than two nodes or no edges.
    pub densification_exponent: Option<T>,
    pub largest_component_nodes: usize,
    pub largest_component_edges: usize,
}

pub fn graph_stats<T: Float>(g: &Graph) -> GraphStats<T> {
    let (lc_nodes, lc_edges) = g.largest_weak_component();
    GraphStats {
        nodes: g.node_count(),
        edges: g.edge_count(),
        densification_exponent: g.densification_exponent().ok(),
        largest_component_nodes: lc_nodes,
        largest_component_edges: lc_edges,
    }
}

/// Graph ingested from an edge-list file together with its label table.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `labels[i]` is the external label of `NodeId(i)`.
    pub labels: Vec<String>,
    pub report: BuildReport,
    pub data_lines: usize,
}

impl LoadedGraph {
    pub fn label(&self, u: NodeId) -> &str {
        &self.labels[u.index()]
    }
}

const NODES_DIRECTIVE: &str = "nodes:";

/// Reads a whitespace-delimited edge list.
///
/// Lines starting with `#` are comments, blank lines are skipped. Labels are
/// remapped to dense ids in order of first appearance. A `# nodes: N` header
/// (as written by [`write_edge_list`]) pins the node count, and when every
/// label is an integer below `N` the ids are kept as-is, so isolated nodes
/// survive a round trip. Undirected input (`directed = false`) yields both
/// orientations of every line.
pub fn load_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<LoadedGraph> {
    let mut declared_nodes: Option<usize> = None;
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix(NODES_DIRECTIVE) {
                let n = rest.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("bad node-count header {trimmed:?}"),
                })?;
                declared_nodes = Some(n);
            }
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => pairs.push((a.to_owned(), b.to_owned())),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected exactly two node labels, got {trimmed:?}"),
                })
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }

    let numeric = declared_nodes.and_then(|n| {
        let mut ids = Vec::with_capacity(pairs.len());
        for (a, b) in &pairs {
            let a = a.parse::<usize>().ok().filter(|&x| x < n)?;
            let b = b.parse::<usize>().ok().filter(|&x| x < n)?;
            ids.push((a, b));
        }
        Some((n, ids))
    });

    let (node_count, labels, ids) = match numeric {
        Some((n, ids)) => (n, (0..n).map(|i| i.to_string()).collect(), ids),
        None => {
            let mut index: HashMap<String, usize> = HashMap::new();
            let mut labels = Vec::new();
            let mut ids = Vec::with_capacity(pairs.len());
            for (a, b) in pairs.iter() {
                let mut intern = |s: &String| {
                    *index.entry(s.clone()).or_insert_with(|| {
                        labels.push(s.clone());
                        labels.len() - 1
                    })
                };
                let a = intern(a);
                let b = intern(b);
                ids.push((a, b));
            }
            (labels.len(), labels, ids)
        }
    };

    let data_lines = ids.len();
    let edges = ids.iter().flat_map(|&(a, b)| {
        let fwd = Edge::new(a, b);
        let rev = (!directed).then(|| Edge::new(b, a));
        std::iter::once(fwd).chain(rev)
    });
    let (graph, mut report) = Graph::from_edges(node_count, edges)?;
    if !directed {
        // Each line contributes its reverse; count only genuine repeats.
        report.self_loops /= 2;
    }
    Ok(LoadedGraph {
        graph,
        labels,
        report,
        data_lines,
    })
}

/// Writes `g` as an edge list sorted by `(src, dst)`, preceded by a
/// `# nodes: N` header.
pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> Result<()> {
    writeln!(w, "# {NODES_DIRECTIVE} {}", g.node_count())?;
    writeln!(w, "# edges: {}", g.edge_count())?;
    for e in g.edges() {
        writeln!(w, "{} {}", e.src, e.dst)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes an arbitrary edge set in edge-list format, sorted.
pub fn write_edges<W: Write>(node_count: usize, edges: &[Edge], mut w: W) -> Result<()> {
    let mut sorted = edges.to_vec();
    sorted.sort_unstable();
    writeln!(w, "# {NODES_DIRECTIVE} {node_count}")?;
    writeln!(w, "# edges: {}", sorted.len())?;
    for e in sorted {
        writeln!(w, "{} {}", e.src, e.dst)?;
    }
    w.flush()?;
    Ok(())
}
