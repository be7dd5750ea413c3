//! Undirected multigraphs with stable edge numbering.
//!
//! Edges are identified by their position in the input order; every other
//! module addresses edges through those indices, so the numbering must never
//! be permuted after construction.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Hard cap on the exact pipelines: edge subsets are u128 bitmasks.
pub const EDGE_MASK_CAP: usize = 128;

/// An undirected multigraph. Parallel edges are allowed, self-loops are not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    labels: Option<Vec<String>>,
}

impl Graph {
    /// Builds a graph from an explicit edge list. `edges[(i)]` keeps index `i`
    /// for the lifetime of the graph.
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::parameter("graph must have at least one vertex"));
        }
        for (i, &(a, b)) in edges.iter().enumerate() {
            if a == b {
                return Err(Error::SelfLoop {
                    location: format!("edge {i}"),
                });
            }
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::parameter(format!(
                    "edge {i} references vertex out of range ({a}, {b}) with V={vertex_count}"
                )));
            }
        }
        Ok(Graph {
            vertex_count,
            edges,
            labels: None,
        })
    }

    fn with_labels(vertex_count: usize, edges: Vec<(usize, usize)>, labels: Vec<String>) -> Result<Self> {
        let mut g = Graph::new(vertex_count, edges)?;
        debug_assert_eq!(labels.len(), vertex_count);
        g.labels = Some(labels);
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> (usize, usize) {
        self.edges[index]
    }

    /// Vertex labels in id order, if the graph was parsed from labeled text.
    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Printable name for a vertex: its label when present, else its id.
    pub fn vertex_name(&self, v: usize) -> String {
        match &self.labels {
            Some(ls) => ls[v].clone(),
            None => v.to_string(),
        }
    }

    /// Resolves a vertex reference: exact label match first, then a bare
    /// numeric id.
    pub fn resolve_vertex(&self, name: &str) -> Result<usize> {
        if let Some(labels) = &self.labels {
            if let Some(id) = labels.iter().position(|l| l == name) {
                return Ok(id);
            }
        }
        match name.parse::<usize>() {
            Ok(id) if id < self.vertex_count => Ok(id),
            _ => Err(Error::parameter(format!("unknown vertex {name:?}"))),
        }
    }

    /// Adjacency lists carrying edge indices; parallel edges appear once per
    /// copy.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
        adj
    }

    /// Copy of the graph without the given edges. Vertices (and labels) are
    /// untouched; surviving edges are renumbered in their original relative
    /// order.
    pub fn remove_edges(&self, removed: &EdgeSet) -> Graph {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !removed.contains(*i))
            .map(|(_, &e)| e)
            .collect();
        Graph {
            vertex_count: self.vertex_count,
            edges,
            labels: self.labels.clone(),
        }
    }

    /// Copy of the graph without one edge.
    pub fn remove_edge(&self, edge: usize) -> Result<Graph> {
        if edge >= self.edge_count() {
            return Err(Error::parameter(format!("edge {edge} out of range")));
        }
        let mut set = EdgeSet::empty();
        set.insert(edge);
        Ok(self.remove_edges(&set))
    }
}

/// A subset of a graph's edges as a bitmask. Index `i` refers to the graph's
/// edge `i`; masks from different graphs must not be mixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EdgeSet {
    mask: u128,
}

impl EdgeSet {
    pub fn empty() -> Self {
        EdgeSet { mask: 0 }
    }

    /// All edges of a graph with `edge_count` edges.
    pub fn full(edge_count: usize) -> Result<Self> {
        check_mask_cap(edge_count)?;
        if edge_count == EDGE_MASK_CAP {
            return Ok(EdgeSet { mask: u128::MAX });
        }
        Ok(EdgeSet {
            mask: (1u128 << edge_count) - 1,
        })
    }

    pub fn from_mask(mask: u128) -> Self {
        EdgeSet { mask }
    }

    pub fn from_indices(indices: &[usize], edge_count: usize) -> Result<Self> {
        check_mask_cap(edge_count)?;
        let mut mask = 0u128;
        for &i in indices {
            if i >= edge_count {
                return Err(Error::parameter(format!(
                    "edge index {i} out of range (E={edge_count})"
                )));
            }
            mask |= 1u128 << i;
        }
        Ok(EdgeSet { mask })
    }

    pub fn mask(&self) -> u128 {
        self.mask
    }

    pub fn size(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, edge: usize) -> bool {
        edge < EDGE_MASK_CAP && self.mask >> edge & 1 == 1
    }

    pub fn insert(&mut self, edge: usize) {
        debug_assert!(edge < EDGE_MASK_CAP);
        self.mask |= 1u128 << edge;
    }

    pub fn remove(&mut self, edge: usize) {
        debug_assert!(edge < EDGE_MASK_CAP);
        self.mask &= !(1u128 << edge);
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet {
            mask: self.mask | other.mask,
        }
    }

    pub fn intersection(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet {
            mask: self.mask & other.mask,
        }
    }

    pub fn difference(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet {
            mask: self.mask & !other.mask,
        }
    }

    pub fn is_subset_of(&self, other: &EdgeSet) -> bool {
        self.mask & other.mask == self.mask
    }

    /// Set bits in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let mut rest = self.mask;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        })
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Display for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

fn check_mask_cap(edge_count: usize) -> Result<()> {
    if edge_count > EDGE_MASK_CAP {
        return Err(Error::capacity(format!(
            "E={edge_count} exceeds the exact-pipeline cap of {EDGE_MASK_CAP} edges; \
             use the Monte Carlo estimator for larger graphs"
        )));
    }
    Ok(())
}

/// Parses whitespace-separated edge-list text: one edge per line, two vertex
/// labels per edge. Lines whose first non-blank character is `#` are
/// comments. Vertex ids are assigned by first appearance; edge indices follow
/// line order.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    let intern = |tok: &str, labels: &mut Vec<String>, index: &mut HashMap<String, usize>| {
        if let Some(&id) = index.get(tok) {
            return id;
        }
        let id = labels.len();
        labels.push(tok.to_string());
        index.insert(tok.to_string(), id);
        id
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected two vertex labels, found {}", toks.len()),
            });
        }
        if toks[0] == toks[1] {
            return Err(Error::SelfLoop {
                location: format!("line {}", lineno + 1),
            });
        }
        let a = intern(toks[0], &mut labels, &mut index);
        let b = intern(toks[1], &mut labels, &mut index);
        edges.push((a, b));
    }

    if labels.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no edges found".to_string(),
        });
    }
    Graph::with_labels(labels.len(), edges, labels)
}

/// Connected components of the subgraph on all `V` vertices induced by the
/// active edges. Components are sorted by smallest member; members are sorted.
/// Isolated vertices appear as singletons.
pub fn components(g: &Graph, active: &EdgeSet) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..g.vertex_count()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in active.iter() {
        let (a, b) = g.edge(i);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..g.vertex_count() {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort_unstable_by_key(|c| c[0]);
    out
}

/// Number of spanning trees by the matrix-tree theorem. The Laplacian minor
/// determinant is taken with fraction-free integer elimination, so the result
/// is exact at any size. Returns 0 for disconnected graphs.
pub fn spanning_tree_count(g: &Graph) -> BigInt {
    let v = g.vertex_count();
    if v == 1 {
        return BigInt::one();
    }
    // Reduced Laplacian: drop the row and column of vertex 0.
    let n = v - 1;
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for &(a, b) in g.edges() {
        if a > 0 {
            m[a - 1][a - 1] += 1;
        }
        if b > 0 {
            m[b - 1][b - 1] += 1;
        }
        if a > 0 && b > 0 {
            m[a - 1][b - 1] -= 1;
            m[b - 1][a - 1] -= 1;
        }
    }
    let det = bareiss_determinant(&mut m);
    debug_assert!(!det.is_negative());
    det
}

/// Fraction-free (one-step division-exact) elimination; consumes the matrix.
fn bareiss_determinant(m: &mut [Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev; // division is exact by construction
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Rectangular grid graph with `rows * cols` vertices in row-major order.
/// Horizontal edges come first (row-major), then vertical edges (row-major).
pub fn grid_graph(rows: usize, cols: usize) -> Result<Graph> {
    if rows == 0 || cols == 0 {
        return Err(Error::parameter("grid dimensions must be positive"));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols.saturating_sub(1) {
            edges.push((id(r, c), id(r, c + 1)));
        }
    }
    for r in 0..rows.saturating_sub(1) {
        for c in 0..cols {
            edges.push((id(r, c), id(r + 1, c)));
        }
    }
    Graph::new(rows * cols, edges)
}

/// A central vertex of degree `t` with `t` disjoint chains of `chain_len`
/// edges attached. Vertex 0 is the center; chain `i` occupies vertices
/// `1 + i*chain_len ..= (i+1)*chain_len`, ordered outward. Edge order: chain 0
/// inner-to-outer, then chain 1, and so on.
pub fn star_of_chains_graph(t: usize, chain_len: usize) -> Result<Graph> {
    if t == 0 || chain_len == 0 {
        return Err(Error::parameter("star-of-chains needs t >= 1 and chain_len >= 1"));
    }
    let mut edges = Vec::new();
    for i in 0..t {
        let base = 1 + i * chain_len;
        edges.push((0, base));
        for j in 1..chain_len {
            edges.push((base + j - 1, base + j));
        }
    }
    Graph::new(1 + t * chain_len, edges)
}
