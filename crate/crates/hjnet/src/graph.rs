//! Oriented multigraphs with an edge involution, plus path/circuit combinatorics.
//!
//! Every arc is stored as a pair of oriented edges (e, -e) created atomically;
//! the involution is fixed-point free by construction, so loops still come as
//! two distinct oriented edges with the same endpoints. Vertex ids are opaque
//! strings supplied by the caller; internally everything runs on dense indices.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Dense vertex index, valid for the graph that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

/// Dense oriented-edge index. Canonical orientations are even, their
/// reverses odd; `reverse()` flips the low bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl EdgeId {
    pub fn reverse(self) -> EdgeId {
        EdgeId(self.0 ^ 1)
    }

    pub fn is_canonical(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// Index of the unoriented arc this edge belongs to.
    pub fn pair_index(self) -> usize {
        self.0 / 2
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph is invalid: {0}")]
    Invalid(String),
    #[error("paths do not concatenate: terminal {0} != origin {1}")]
    ConcatMismatch(String, String),
    #[error("path enumeration exceeded cap of {0} paths")]
    EnumerationCapExceeded(usize),
}

#[derive(Debug, Clone)]
struct EdgeRecord {
    name: String,
    origin: usize,
}

/// Finite connected oriented multigraph. Immutable once built: safe to share
/// read-only across workers.
#[derive(Debug, Clone)]
pub struct OrientedGraph {
    vertex_names: Vec<String>,
    vertex_lookup: HashMap<String, usize>,
    edges: Vec<EdgeRecord>,
    edge_lookup: HashMap<String, usize>,
    /// in_star[x] = edges e with terminal(e) == x
    in_star: Vec<Vec<EdgeId>>,
}

/// Builder collecting vertices and arcs before validation.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    vertex_names: Vec<String>,
    vertex_lookup: HashMap<String, usize>,
    arcs: Vec<(String, usize, usize)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, name: &str) -> Result<VertexId, GraphError> {
        if self.vertex_lookup.contains_key(name) {
            return Err(GraphError::Invalid(format!("duplicate vertex id {name:?}")));
        }
        let idx = self.vertex_names.len();
        self.vertex_names.push(name.to_owned());
        self.vertex_lookup.insert(name.to_owned(), idx);
        Ok(VertexId(idx))
    }

    /// Declares one arc with its canonical orientation `from -> to`. The
    /// reverse orientation is synthesized with the name `-<name>`.
    pub fn add_arc(&mut self, name: &str, from: &str, to: &str) -> Result<EdgeId, GraphError> {
        if name.starts_with('-') || name.is_empty() {
            return Err(GraphError::Invalid(format!(
                "edge id {name:?} must be nonempty and must not start with '-'"
            )));
        }
        if self.arcs.iter().any(|(n, _, _)| n == name) {
            return Err(GraphError::Invalid(format!("duplicate edge id {name:?}")));
        }
        let f = *self.vertex_lookup.get(from).ok_or_else(|| {
            GraphError::Invalid(format!("edge {name:?}: unknown vertex {from:?}"))
        })?;
        let t = *self
            .vertex_lookup
            .get(to)
            .ok_or_else(|| GraphError::Invalid(format!("edge {name:?}: unknown vertex {to:?}")))?;
        let id = EdgeId(2 * self.arcs.len());
        self.arcs.push((name.to_owned(), f, t));
        Ok(id)
    }

    pub fn build(self) -> Result<OrientedGraph, GraphError> {
        if self.vertex_names.is_empty() {
            return Err(GraphError::Invalid("graph has no vertices".into()));
        }
        let mut edges = Vec::with_capacity(2 * self.arcs.len());
        let mut edge_lookup = HashMap::new();
        for (name, f, t) in &self.arcs {
            edge_lookup.insert(name.clone(), edges.len());
            edges.push(EdgeRecord {
                name: name.clone(),
                origin: *f,
            });
            edge_lookup.insert(format!("-{name}"), edges.len());
            edges.push(EdgeRecord {
                name: format!("-{name}"),
                origin: *t,
            });
        }
        let mut in_star = vec![Vec::new(); self.vertex_names.len()];
        for idx in 0..edges.len() {
            let e = EdgeId(idx);
            let terminal = edges[e.reverse().0].origin;
            in_star[terminal].push(e);
        }
        let g = OrientedGraph {
            vertex_names: self.vertex_names,
            vertex_lookup: self.vertex_lookup,
            edges,
            edge_lookup,
            in_star,
        };
        // every vertex must lie on some arc
        for x in 0..g.vertex_names.len() {
            if g.in_star[x].is_empty() {
                return Err(GraphError::Invalid(format!(
                    "vertex {:?} belongs to no arc",
                    g.vertex_names[x]
                )));
            }
        }
        // connectivity; the involution makes reachability symmetric
        let mut seen = vec![false; g.vertex_names.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &e in &g.in_star[x] {
                let y = g.origin(e).0;
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(GraphError::Invalid(format!(
                "graph is not connected: vertex {:?} unreachable",
                g.vertex_names[x]
            )));
        }
        Ok(g)
    }
}

impl OrientedGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    /// Number of oriented edges (twice the number of arcs).
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_names.len()).map(VertexId)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn canonical_edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).step_by(2).map(EdgeId)
    }

    pub fn origin(&self, e: EdgeId) -> VertexId {
        VertexId(self.edges[e.0].origin)
    }

    pub fn terminal(&self, e: EdgeId) -> VertexId {
        VertexId(self.edges[e.reverse().0].origin)
    }

    pub fn is_loop(&self, e: EdgeId) -> bool {
        self.origin(e) == self.terminal(e)
    }

    /// Edges ending at `x` (the in-star).
    pub fn incoming(&self, x: VertexId) -> &[EdgeId] {
        &self.in_star[x.0]
    }

    pub fn vertex_name(&self, x: VertexId) -> &str {
        &self.vertex_names[x.0]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.0].name
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertex_lookup.get(name).copied().map(VertexId)
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edge_lookup.get(name).copied().map(EdgeId)
    }

    /// All simple paths with terminal vertex `target`, including length-1
    /// edges. Simple means no vertex repeats along the path, except that the
    /// origin may coincide with the terminal (a circuit). The count is
    /// finite, but a cap guards pathological inputs.
    pub fn enumerate_simple_paths(
        &self,
        target: VertexId,
        cap: usize,
    ) -> Result<Vec<Path>, GraphError> {
        let mut out = Vec::new();
        let mut used = BTreeSet::new();
        let mut suffix: Vec<EdgeId> = Vec::new();
        self.extend_backward(target, target, &mut used, &mut suffix, &mut out, cap)?;
        out.sort_by(|a, b| a.edges.cmp(&b.edges));
        Ok(out)
    }

    // Grows paths backward from the current front origin; `used` holds the
    // terminal vertices of the suffix built so far, `suffix` the path in
    // reverse order (last edge first).
    fn extend_backward(
        &self,
        front: VertexId,
        target: VertexId,
        used: &mut BTreeSet<usize>,
        suffix: &mut Vec<EdgeId>,
        out: &mut Vec<Path>,
        cap: usize,
    ) -> Result<(), GraphError> {
        for &e in &self.in_star[front.0] {
            if out.len() >= cap {
                return Err(GraphError::EnumerationCapExceeded(cap));
            }
            let o = self.origin(e);
            // the prepended path has terminals used + {front}; its origin o
            // may only collide with the target (closing a circuit)
            let collides = o == front || used.contains(&o.0);
            if o == target || !collides {
                let mut edges: Vec<EdgeId> = vec![e];
                edges.extend(suffix.iter().rev().copied());
                out.push(Path { edges });
            }
            if o != target && !collides {
                used.insert(front.0);
                suffix.push(e);
                self.extend_backward(o, target, used, suffix, out, cap)?;
                suffix.pop();
                used.remove(&front.0);
            }
        }
        Ok(())
    }

    /// All circuits (simple cycles) based at `base`, ordered lexicographically
    /// on edge indices.
    pub fn enumerate_circuits(&self, base: VertexId, cap: usize) -> Result<Vec<Path>, GraphError> {
        let mut paths = self.enumerate_simple_paths(base, cap)?;
        paths.retain(|p| self.origin_of(p) == base);
        Ok(paths)
    }

    pub fn origin_of(&self, p: &Path) -> VertexId {
        self.origin(p.edges[0])
    }

    pub fn terminal_of(&self, p: &Path) -> VertexId {
        self.terminal(*p.edges.last().expect("paths are nonempty"))
    }

    pub fn is_cycle(&self, p: &Path) -> bool {
        self.origin_of(p) == self.terminal_of(p)
    }

    /// No repeated vertices, except that origin == terminal is allowed.
    pub fn is_simple(&self, p: &Path) -> bool {
        let mut seen = BTreeSet::new();
        if !p.edges.iter().all(|&e| seen.insert(self.terminal(e).0)) {
            return false;
        }
        let o = self.origin_of(p);
        !seen.contains(&o.0) || o == self.terminal_of(p)
    }

    /// Checks t(e_j) = o(e_{j+1}) along the sequence.
    pub fn is_path(&self, edges: &[EdgeId]) -> bool {
        !edges.is_empty()
            && edges
                .windows(2)
                .all(|w| self.terminal(w[0]) == self.origin(w[1]))
    }

    pub fn path(&self, edges: Vec<EdgeId>) -> Result<Path, GraphError> {
        if !self.is_path(&edges) {
            return Err(GraphError::Invalid(
                "edge sequence does not concatenate".into(),
            ));
        }
        Ok(Path { edges })
    }

    pub fn path_by_names(&self, names: &[&str]) -> Result<Path, GraphError> {
        let edges = names
            .iter()
            .map(|n| {
                self.edge_by_name(n)
                    .ok_or_else(|| GraphError::Invalid(format!("unknown edge id {n:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.path(edges)
    }

    pub fn concat(&self, p: &Path, q: &Path) -> Result<Path, GraphError> {
        if self.terminal_of(p) != self.origin_of(q) {
            return Err(GraphError::ConcatMismatch(
                self.vertex_name(self.terminal_of(p)).to_owned(),
                self.vertex_name(self.origin_of(q)).to_owned(),
            ));
        }
        let mut edges = p.edges.clone();
        edges.extend_from_slice(&q.edges);
        Ok(Path { edges })
    }

    /// (-e_M,..,-e_1), a path from terminal to origin.
    pub fn reverse_path(&self, p: &Path) -> Path {
        Path {
            edges: p.edges.iter().rev().map(|e| e.reverse()).collect(),
        }
    }

    /// Rotation of a cycle starting at position `j` (0-based).
    pub fn rotate_cycle(&self, p: &Path, j: usize) -> Path {
        debug_assert!(self.is_cycle(p));
        let mut edges = p.edges[j..].to_vec();
        edges.extend_from_slice(&p.edges[..j]);
        Path { edges }
    }

    pub fn path_names(&self, p: &Path) -> Vec<String> {
        p.edges
            .iter()
            .map(|&e| self.edge_name(e).to_owned())
            .collect()
    }
}

/// Nonempty sequence of concatenated edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub edges: Vec<EdgeId>,
}

impl Path {
    pub fn single(e: EdgeId) -> Path {
        Path { edges: vec![e] }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    /// Paths are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", e.0)?;
        }
        write!(f, ")")
    }
}

pub const DEFAULT_PATH_CAP: usize = 1_000_000;
