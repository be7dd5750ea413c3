//! Enumeration of motifs: the minimal edge sets a rule accepts.
//!
//! Every accepted subgraph of a coherent rule contains at least one motif,
//! so the motif family determines the whole reliability polynomial. Path
//! and spanning-tree rules get dedicated enumerators; every other rule goes
//! through subset enumeration, which caps at [`GENERIC_ENUM_MAX_E`] edges.

use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{EdgeSet, Graph};
use crate::rules::{RuleSpec, Scratch};

/// Subset enumeration walks all 2^E edge sets; past this many edges the
/// caller should fall back to Monte Carlo estimation.
pub const GENERIC_ENUM_MAX_E: usize = 25;

/// Antichain verification is quadratic in the family size, so debug builds
/// skip it for families past this size.
const ANTICHAIN_DEBUG_CAP: usize = 2000;

/// The minimal accepted edge sets of one rule on one graph, sorted by
/// (size, edge mask). The sets form an antichain: none contains another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotifFamily {
    rule: RuleSpec,
    edge_count: usize,
    motifs: Vec<EdgeSet>,
}

impl MotifFamily {
    fn new(rule: RuleSpec, edge_count: usize, mut motifs: Vec<EdgeSet>) -> Self {
        motifs.sort_by_key(|m| (m.size(), m.mask()));
        motifs.dedup();
        debug_assert!(
            motifs.len() > ANTICHAIN_DEBUG_CAP || is_antichain(&motifs),
            "motif family is not an antichain"
        );
        MotifFamily {
            rule,
            edge_count,
            motifs,
        }
    }

    pub fn rule(&self) -> &RuleSpec {
        &self.rule
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn motifs(&self) -> &[EdgeSet] {
        &self.motifs
    }

    pub fn len(&self) -> usize {
        self.motifs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motifs.is_empty()
    }

    /// Histogram of motif sizes.
    pub fn size_counts(&self) -> BTreeMap<usize, u64> {
        let mut out = BTreeMap::new();
        for m in &self.motifs {
            *out.entry(m.size()).or_insert(0) += 1;
        }
        out
    }
}

impl Serialize for MotifFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let motifs: Vec<Vec<usize>> = self.motifs.iter().map(|m| m.to_indices()).collect();
        let sizes: BTreeMap<usize, u64> = self.size_counts();
        let mut s = serializer.serialize_struct("MotifFamily", 5)?;
        s.serialize_field("rule", &self.rule.to_string())?;
        s.serialize_field("edge_count", &self.edge_count)?;
        s.serialize_field("motif_count", &self.motifs.len())?;
        s.serialize_field("sizes", &sizes)?;
        s.serialize_field("motifs", &motifs)?;
        s.end()
    }
}

fn is_antichain(motifs: &[EdgeSet]) -> bool {
    for (i, a) in motifs.iter().enumerate() {
        for b in &motifs[i + 1..] {
            if a.is_subset_of(b) || b.is_subset_of(a) {
                return false;
            }
        }
    }
    true
}

/// Size and multiplicity of the smallest motifs. The leading term of R(x)
/// near x = 0 is count * x^(k_min).
pub fn minimal_size_and_count(family: &MotifFamily) -> Result<(usize, u64)> {
    let first = family
        .motifs()
        .first()
        .ok_or_else(|| Error::domain("empty motif family has no minimal size"))?;
    let k_min = first.size();
    let count = family.motifs().iter().take_while(|m| m.size() == k_min).count();
    Ok((k_min, count as u64))
}

/// All simple source-target paths as edge sets. These are exactly the
/// minimal edge sets connecting the pair.
pub fn enumerate_paths(g: &Graph, source: usize, target: usize) -> Result<MotifFamily> {
    let rule = RuleSpec::two_terminal(source, target);
    rule.validate(g)?;
    let adj = g.adjacency();
    let mut on_path = vec![false; g.vertex_count()];
    let mut path_edges: Vec<usize> = Vec::new();
    let mut out: Vec<EdgeSet> = Vec::new();
    on_path[source] = true;
    path_dfs(source, target, &adj, &mut on_path, &mut path_edges, &mut out);
    Ok(MotifFamily::new(rule, g.edge_count(), out))
}

fn path_dfs(
    v: usize,
    target: usize,
    adj: &[Vec<(usize, usize)>],
    on_path: &mut [bool],
    path_edges: &mut Vec<usize>,
    out: &mut Vec<EdgeSet>,
) {
    if v == target {
        let mut set = EdgeSet::empty();
        for &e in path_edges.iter() {
            set.insert(e);
        }
        out.push(set);
        return;
    }
    for &(w, e) in &adj[v] {
        if on_path[w] {
            continue;
        }
        on_path[w] = true;
        path_edges.push(e);
        path_dfs(w, target, adj, on_path, path_edges, out);
        path_edges.pop();
        on_path[w] = false;
    }
}

struct RollbackDsu {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl RollbackDsu {
    fn new(n: usize) -> Self {
        RollbackDsu {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&self, mut v: u32) -> u32 {
        // No path compression: unions must be undoable.
        while self.parent[v as usize] != v {
            v = self.parent[v as usize];
        }
        v
    }

    /// Merges the two components; returns the attached root for `undo`, or
    /// None if they were already joined.
    fn union(&mut self, a: u32, b: u32) -> Option<(u32, u32)> {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return None;
        }
        let (child, root) = if self.size[ra as usize] < self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[child as usize] = root;
        self.size[root as usize] += self.size[child as usize];
        Some((child, root))
    }

    fn undo(&mut self, (child, root): (u32, u32)) {
        self.size[root as usize] -= self.size[child as usize];
        self.parent[child as usize] = child;
    }
}

/// All spanning trees as edge sets: the minimal edge sets connecting every
/// vertex. A single-vertex graph has one spanning tree, the empty set; a
/// disconnected graph has none.
pub fn enumerate_spanning_trees(g: &Graph) -> Result<MotifFamily> {
    let rule = RuleSpec::AllTerminal;
    rule.validate(g)?;
    let v = g.vertex_count();
    let mut dsu = RollbackDsu::new(v);
    let mut chosen = EdgeSet::empty();
    let mut out: Vec<EdgeSet> = Vec::new();
    tree_rec(g, 0, v - 1, &mut dsu, &mut chosen, &mut out);
    Ok(MotifFamily::new(rule, g.edge_count(), out))
}

fn tree_rec(
    g: &Graph,
    i: usize,
    needed: usize,
    dsu: &mut RollbackDsu,
    chosen: &mut EdgeSet,
    out: &mut Vec<EdgeSet>,
) {
    if needed == 0 {
        out.push(*chosen);
        return;
    }
    if g.edge_count() - i < needed {
        return;
    }
    let (a, b) = g.edge(i);
    if let Some(record) = dsu.union(a as u32, b as u32) {
        chosen.insert(i);
        tree_rec(g, i + 1, needed - 1, dsu, chosen, out);
        chosen.remove(i);
        dsu.undo(record);
    }
    // Excluding edge i is only worth exploring if the remaining edges can
    // still join everything.
    if remaining_can_connect(g, i + 1, dsu, needed) {
        tree_rec(g, i + 1, needed, dsu, chosen, out);
    }
}

fn remaining_can_connect(g: &Graph, from: usize, dsu: &RollbackDsu, needed: usize) -> bool {
    let mut parent: Vec<u32> = (0..g.vertex_count() as u32).collect();
    fn find(parent: &mut [u32], mut v: u32) -> u32 {
        while parent[v as usize] != v {
            let p = parent[parent[v as usize] as usize];
            parent[v as usize] = p;
            v = p;
        }
        v
    }
    // Seed with the current partition, then pour in the undecided edges.
    for v in 0..g.vertex_count() as u32 {
        let r = dsu.find(v);
        let rv = find(&mut parent, v);
        let rr = find(&mut parent, r);
        parent[rv as usize] = rr;
    }
    let mut joins = 0;
    for e in from..g.edge_count() {
        let (a, b) = g.edge(e);
        let ra = find(&mut parent, a as u32);
        let rb = find(&mut parent, b as u32);
        if ra != rb {
            parent[ra as usize] = rb;
            joins += 1;
            if joins == needed {
                return true;
            }
        }
    }
    joins == needed
}

/// Motifs of an arbitrary rule by scanning all 2^E edge sets. A set is
/// minimal exactly when it is accepted and removing any single edge breaks
/// acceptance; for coherent rules this local test equals global minimality.
pub fn enumerate_minimal_generic(g: &Graph, rule: &RuleSpec) -> Result<MotifFamily> {
    rule.validate(g)?;
    let e = g.edge_count();
    if e > GENERIC_ENUM_MAX_E {
        return Err(Error::capacity(format!(
            "subset enumeration handles at most {GENERIC_ENUM_MAX_E} edges, got {e}; \
             use Monte Carlo estimation instead"
        )));
    }
    let total: u64 = 1u64 << e;
    let words = total.div_ceil(64) as usize;
    let mut accepted = vec![0u64; words];
    let mut scratch = Scratch::new(g.vertex_count());
    for mask in 0..total {
        if rule.accepts_mask(g, mask as u128, &mut scratch) {
            accepted[(mask >> 6) as usize] |= 1u64 << (mask & 63);
        }
    }
    let bit = |mask: u64| accepted[(mask >> 6) as usize] >> (mask & 63) & 1 == 1;
    let mut out: Vec<EdgeSet> = Vec::new();
    for mask in 0..total {
        if !bit(mask) {
            continue;
        }
        let mut minimal = true;
        let mut rest = mask;
        while rest != 0 {
            let low = rest & rest.wrapping_neg();
            if bit(mask ^ low) {
                minimal = false;
                break;
            }
            rest ^= low;
        }
        if minimal {
            out.push(EdgeSet::from_mask(mask as u128));
        }
    }
    Ok(MotifFamily::new(rule.clone(), e, out))
}

/// Definitional enumeration: walk edge sets by increasing size and keep each
/// accepted set containing no earlier kept set. Quadratic in the family
/// size; retained as a cross-check for the fast path.
pub fn enumerate_minimal_reference(g: &Graph, rule: &RuleSpec) -> Result<MotifFamily> {
    rule.validate(g)?;
    let e = g.edge_count();
    if e > 20 {
        return Err(Error::capacity(format!(
            "reference enumeration handles at most 20 edges, got {e}"
        )));
    }
    let mut by_size: Vec<Vec<u64>> = vec![Vec::new(); e + 1];
    for mask in 0..(1u64 << e) {
        by_size[mask.count_ones() as usize].push(mask);
    }
    let mut scratch = Scratch::new(g.vertex_count());
    let mut kept: Vec<u64> = Vec::new();
    for masks in by_size {
        for mask in masks {
            if kept.iter().any(|&m| m | mask == mask) {
                continue;
            }
            if rule.accepts_mask(g, mask as u128, &mut scratch) {
                kept.push(mask);
            }
        }
    }
    let motifs = kept.into_iter().map(|m| EdgeSet::from_mask(m as u128)).collect();
    Ok(MotifFamily::new(rule.clone(), e, motifs))
}

/// Enumerates the motif family of any rule, routing the two rules with
/// polynomial-delay enumerators away from subset scanning.
pub fn enumerate_motifs(g: &Graph, rule: &RuleSpec) -> Result<MotifFamily> {
    match rule {
        RuleSpec::TwoTerminal { source, target } => enumerate_paths(g, *source, *target),
        RuleSpec::AllTerminal => enumerate_spanning_trees(g),
        _ => enumerate_minimal_generic(g, rule),
    }
}
