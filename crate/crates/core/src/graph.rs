//! Simple undirected graphs, the states they induce, and depth bounds.
//!
//! A graph state is the uniform superposition with one CZ applied per
//! edge, which over the discrete phase picture means the basis string
//! `x` carries a half-turn phase exactly when the number of edges with
//! both endpoints set in `x` is odd. Since CZ gates on disjoint qubit
//! pairs run in parallel, the minimal depth of any CZ-only preparation
//! is governed by edge coloring: at least the maximum degree always,
//! and exactly the maximum degree on bipartite graphs.

use std::collections::VecDeque;

use thiserror::Error;

use crate::sweet::{PhaseGrid, SweetError, SweetState};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed line {line_no}: {text:?}")]
    MalformedLine { line_no: usize, text: String },
    #[error("edge list is missing the `n <count>` header")]
    MissingHeader,
    #[error("vertex {vertex} has a self-loop")]
    SelfLoop { vertex: usize },
    #[error("edge {u}-{v} appears twice")]
    DuplicateEdge { u: usize, v: usize },
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("graph states need a phase grid of at least 2, got {got}")]
    GridTooCoarse { got: u32 },
    #[error(transparent)]
    State(#[from] SweetError),
}

/// Undirected graph on vertices `0..n` with no self-loops or parallel
/// edges; edges are stored with the smaller endpoint first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

/// Depth limits for preparing a graph state with one CZ per edge.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct DepthBound {
    /// Maximum vertex degree; no schedule beats this.
    pub lower: u32,
    /// When set, a schedule meeting `lower` exists.
    pub exact_if_bipartite: bool,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop { vertex: a });
            }
            for v in [a, b] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            let edge = (a.min(b), a.max(b));
            if normalized.contains(&edge) {
                return Err(GraphError::DuplicateEdge {
                    u: edge.0,
                    v: edge.1,
                });
            }
            normalized.push(edge);
        }
        Ok(Graph {
            n,
            edges: normalized,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Two-colorability, checked by BFS over every component.
    pub fn is_bipartite(&self) -> bool {
        let mut adjacency = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut color = vec![None::<bool>; self.n];
        for root in 0..self.n {
            if color[root].is_some() {
                continue;
            }
            color[root] = Some(false);
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                let next = !color[u].unwrap();
                for &v in &adjacency[u] {
                    match color[v] {
                        None => {
                            color[v] = Some(next);
                            queue.push_back(v);
                        }
                        Some(c) if c == next => {}
                        Some(_) => return false,
                    }
                }
            }
        }
        true
    }
}

/// Parses the edge-list format: one `n <count>` header line, then one
/// `u v` line per edge. Blank lines and `#` comments are skipped.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_no = idx + 1;
        let malformed = || GraphError::MalformedLine {
            line_no,
            text: line.to_string(),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match n {
            None => {
                if fields.len() != 2 || fields[0] != "n" {
                    return Err(malformed());
                }
                let count: usize = fields[1].parse().map_err(|_| malformed())?;
                n = Some(count);
            }
            Some(_) => {
                if fields.len() != 2 {
                    return Err(malformed());
                }
                let u: usize = fields[0].parse().map_err(|_| malformed())?;
                let v: usize = fields[1].parse().map_err(|_| malformed())?;
                edges.push((u, v));
            }
        }
    }
    let n = n.ok_or(GraphError::MissingHeader)?;
    Graph::new(n, &edges)
}

/// The graph state of `g`: every basis string, with a half-turn phase on
/// strings whose induced subgraph has an odd number of edges.
pub fn graph_state_target(g: &Graph, grid: PhaseGrid) -> Result<SweetState, GraphError> {
    if grid.size() < 2 {
        return Err(GraphError::GridTooCoarse { got: grid.size() });
    }
    let n = g.n();
    if n == 0 || n > 30 {
        return Err(GraphError::State(SweetError::RegisterTooLarge {
            n,
            p: grid.p(),
        }));
    }
    let half = grid.size() / 2;
    let bit = |x: u32, q: usize| x >> (n - 1 - q) & 1;
    let terms: Vec<(u32, u32)> = (0..1u32 << n)
        .map(|x| {
            let mut parity = 0;
            for &(u, v) in g.edges() {
                parity ^= bit(x, u) & bit(x, v);
            }
            (half * parity, x)
        })
        .collect();
    Ok(SweetState::new(&terms, n, grid)?)
}

/// Depth bound for CZ-per-edge schedules: the maximum degree, attainable
/// whenever the graph is bipartite.
pub fn vizing_depth_bound(g: &Graph) -> DepthBound {
    DepthBound {
        lower: g.max_degree(),
        exact_if_bipartite: g.is_bipartite(),
    }
}
