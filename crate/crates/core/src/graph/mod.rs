//! Immutable attributed graphs with dense vertex IDs.

mod generate;
mod io;
mod traverse;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::codec::{varint_len, StableHasher};
use crate::{Error, Result};

pub use generate::{generate_random_dag, generate_random_graph};
pub use io::{emit_edge_list, load_attributes, load_edge_list, EdgeListStats};
pub use traverse::{
    descendants, khop_window, topological_order, topological_window, Direction, Traversal,
};

/// Dense vertex identifier in `[0, vertex_count)`.
pub type VertexId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Directedness {
    Directed,
    Undirected,
}

impl Directedness {
    pub fn name(self) -> &'static str {
        match self {
            Directedness::Directed => "directed",
            Directedness::Undirected => "undirected",
        }
    }
}

/// Counts of input edges discarded while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DroppedEdges {
    pub duplicates: usize,
    pub self_loops: usize,
}

/// Adjacency in compressed sparse row form.
///
/// Undirected graphs store every edge in both endpoint lists and leave the
/// reverse arrays empty. Neighbour lists are sorted ascending.
#[derive(Debug, Clone)]
pub struct Graph {
    directedness: Directedness,
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    rev_offsets: Vec<usize>,
    rev_targets: Vec<VertexId>,
    labels: Vec<u64>,
    // Ok(()) when acyclic, otherwise a vertex on a cycle.
    acyclic: OnceLock<std::result::Result<(), VertexId>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.directedness == other.directedness
            && self.offsets == other.offsets
            && self.targets == other.targets
            && self.labels == other.labels
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph over vertices `0..vertex_count`, dropping self-loops and
    /// duplicate edges. For undirected graphs `(u, v)` and `(v, u)` are the
    /// same edge.
    pub fn from_edges<I>(
        directedness: Directedness,
        vertex_count: usize,
        edges: I,
    ) -> Result<(Self, DroppedEdges)>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        if vertex_count > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "{vertex_count} vertices exceed the 32-bit ID space"
            )));
        }
        let mut dropped = DroppedEdges::default();
        let mut list = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x as usize >= vertex_count {
                    return Err(Error::InvalidVertex(x.into()));
                }
            }
            if u == v {
                dropped.self_loops += 1;
                continue;
            }
            match directedness {
                Directedness::Directed => list.push((u, v)),
                Directedness::Undirected => list.push((u.min(v), u.max(v))),
            }
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        dropped.duplicates = before - list.len();
        let graph = Self::from_canonical(
            directedness,
            vertex_count,
            &list,
            (0..vertex_count as u64).collect(),
        );
        Ok((graph, dropped))
    }

    /// `edges` must be sorted, deduplicated, loop-free and (for undirected
    /// graphs) have `u < v`.
    fn from_canonical(
        directedness: Directedness,
        n: usize,
        edges: &[(VertexId, VertexId)],
        labels: Vec<u64>,
    ) -> Self {
        let (offsets, targets, rev_offsets, rev_targets) = match directedness {
            Directedness::Directed => {
                let (o, t) = csr(n, edges.iter().copied());
                let (ro, rt) = csr(n, edges.iter().map(|&(u, v)| (v, u)));
                (o, t, ro, rt)
            }
            Directedness::Undirected => {
                let (o, t) = csr(n, edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]));
                (o, t, Vec::new(), Vec::new())
            }
        };
        Self {
            directedness,
            offsets,
            targets,
            rev_offsets,
            rev_targets,
            labels,
            acyclic: OnceLock::new(),
        }
    }

    /// Replaces the dense-ID → original-label table.
    pub fn with_labels(mut self, labels: Vec<u64>) -> Result<Self> {
        if labels.len() != self.vertex_count() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.vertex_count()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn directedness(&self) -> Directedness {
        self.directedness
    }

    pub fn is_directed(&self) -> bool {
        self.directedness == Directedness::Directed
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of edges; an undirected edge counts once.
    pub fn edge_count(&self) -> usize {
        match self.directedness {
            Directedness::Directed => self.targets.len(),
            Directedness::Undirected => self.targets.len() / 2,
        }
    }

    #[inline]
    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// In-neighbours; for undirected graphs this is the neighbour list.
    #[inline]
    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        match self.directedness {
            Directedness::Directed => {
                let v = v as usize;
                &self.rev_targets[self.rev_offsets[v]..self.rev_offsets[v + 1]]
            }
            Directedness::Undirected => self.out_neighbors(v),
        }
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        (u as usize) < self.vertex_count() && self.out_neighbors(u).binary_search(&v).is_ok()
    }

    pub fn label(&self, v: VertexId) -> u64 {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// Dense ID of an original label.
    pub fn vertex_of_label(&self, label: u64) -> Option<VertexId> {
        // Loaders assign IDs in ascending label order, but callers may have
        // installed an arbitrary table.
        match self.labels.binary_search(&label) {
            Ok(i) if self.labels[i] == label => Some(i as VertexId),
            _ => self.labels.iter().position(|&l| l == label).map(|i| i as VertexId),
        }
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if (v as usize) < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::InvalidVertex(v.into()))
        }
    }

    /// Canonical edge list: `(u, v)` with `u < v` for undirected graphs,
    /// sorted ascending.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let undirected = self.directedness == Directedness::Undirected;
        (0..self.vertex_count() as VertexId).flat_map(move |u| {
            self.out_neighbors(u)
                .iter()
                .filter(move |&&v| !undirected || u < v)
                .map(move |&v| (u, v))
        })
    }

    /// Hash of the canonical edge list, vertex count and directedness.
    pub fn fingerprint(&self) -> u64 {
        let mut h = StableHasher::default();
        h.write_u64(self.vertex_count() as u64);
        h.write_u64(self.is_directed() as u64);
        for (u, v) in self.edges() {
            h.write_u64((u64::from(u) << 32) | u64::from(v));
        }
        h.finish()
    }

    /// Size of the graph as a varint adjacency encoding: per vertex, the
    /// number of stored neighbours followed by their IDs, each edge once.
    pub fn encoded_len(&self) -> usize {
        let undirected = self.directedness == Directedness::Undirected;
        (0..self.vertex_count() as VertexId)
            .map(|u| {
                let nbrs: Vec<_> = self
                    .out_neighbors(u)
                    .iter()
                    .filter(|&&v| !undirected || u < v)
                    .collect();
                varint_len(nbrs.len() as u64)
                    + nbrs.iter().map(|&&v| varint_len(v.into())).sum::<usize>()
            })
            .sum()
    }

    /// Returns a copy with `(u, v)` added.
    pub fn with_edge_inserted(&self, u: VertexId, v: VertexId) -> Result<Self> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::InvalidParameter(format!(
                "self-loop on vertex {}",
                self.label(u)
            )));
        }
        if self.has_edge(u, v) {
            return Err(Error::DuplicateEdge(self.label(u), self.label(v)));
        }
        let mut edges: Vec<_> = self.edges().collect();
        edges.push(self.canonical_pair(u, v));
        edges.sort_unstable();
        Ok(Self::from_canonical(
            self.directedness,
            self.vertex_count(),
            &edges,
            self.labels.clone(),
        ))
    }

    /// Returns a copy with `(u, v)` removed.
    pub fn with_edge_removed(&self, u: VertexId, v: VertexId) -> Result<Self> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if !self.has_edge(u, v) {
            return Err(Error::MissingEdge(self.label(u), self.label(v)));
        }
        let target = self.canonical_pair(u, v);
        let edges: Vec<_> = self.edges().filter(|&e| e != target).collect();
        Ok(Self::from_canonical(
            self.directedness,
            self.vertex_count(),
            &edges,
            self.labels.clone(),
        ))
    }

    fn canonical_pair(&self, u: VertexId, v: VertexId) -> (VertexId, VertexId) {
        match self.directedness {
            Directedness::Directed => (u, v),
            Directedness::Undirected => (u.min(v), u.max(v)),
        }
    }

    /// Vertex on a cycle, if any. Undirected graphs are never treated as DAGs.
    pub(crate) fn cycle_witness(&self) -> std::result::Result<(), VertexId> {
        *self.acyclic.get_or_init(|| traverse::find_cycle(self))
    }

    /// Errors unless the graph is a DAG.
    pub fn require_dag(&self) -> Result<()> {
        if !self.is_directed() {
            return Err(Error::DirectionMismatch {
                direction: "topological",
                graph: "undirected",
            });
        }
        self.cycle_witness()
            .map_err(|v| Error::Cycle(self.label(v)))
    }
}

fn csr(
    n: usize,
    pairs: impl Iterator<Item = (VertexId, VertexId)> + Clone,
) -> (Vec<usize>, Vec<VertexId>) {
    let mut offsets = vec![0usize; n + 1];
    for (u, _) in pairs.clone() {
        offsets[u as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0; offsets[n]];
    for (u, v) in pairs {
        let slot = &mut fill[u as usize];
        targets[*slot] = v;
        *slot += 1;
    }
    for u in 0..n {
        targets[offsets[u]..offsets[u + 1]].sort_unstable();
    }
    (offsets, targets)
}

/// A set of vertex IDs, kept sorted and free of duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<VertexId>);

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_unsorted(mut members: Vec<VertexId>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self(members)
    }

    /// Caller guarantees `members` is strictly ascending.
    pub(crate) fn from_sorted_unchecked(members: Vec<VertexId>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Self(members)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<VertexId> {
        self.0
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        let mut it = other.0.iter();
        self.0.iter().all(|x| it.any(|y| y == x))
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    /// Members of `self` not in `other`.
    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        Self(self.0.iter().copied().filter(|&x| !other.contains(x)).collect())
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut all = Vec::with_capacity(self.len() + other.len());
        all.extend_from_slice(&self.0);
        all.extend_from_slice(&other.0);
        Self::from_unsorted(all)
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<T: IntoIterator<Item = VertexId>>(iter: T) -> Self {
        Self::from_unsorted(iter.into_iter().collect())
    }
}

/// Named integer attribute columns, one value per vertex.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttributeTable {
    vertex_count: usize,
    columns: Vec<(String, Vec<i64>)>,
}

impl AttributeTable {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            vertex_count,
            columns: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn add_column(&mut self, name: impl Into<String>, values: Vec<i64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.vertex_count {
            return Err(Error::InvalidParameter(format!(
                "attribute `{name}` has {} values for {} vertices",
                values.len(),
                self.vertex_count
            )));
        }
        if self.columns.iter().any(|(n, _)| *n == name) {
            return Err(Error::InvalidParameter(format!("duplicate attribute `{name}`")));
        }
        self.columns.push((name, values));
        Ok(())
    }

    pub fn with_column(mut self, name: impl Into<String>, values: Vec<i64>) -> Result<Self> {
        self.add_column(name, values)?;
        Ok(self)
    }

    pub fn column(&self, name: &str) -> Result<&[i64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undirected_adjacency_is_symmetric() {
        let (g, dropped) =
            Graph::from_edges(Directedness::Undirected, 4, [(0, 1), (2, 1), (1, 0), (3, 3)])
                .unwrap();
        assert_eq!(dropped, DroppedEdges { duplicates: 1, self_loops: 1 });
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.out_neighbors(1), &[0, 2]);
        for u in 0..4 {
            for &v in g.out_neighbors(u) {
                assert!(g.out_neighbors(v).contains(&u));
            }
        }
    }

    #[test]
    fn directed_reverse_adjacency_mirrors_forward() {
        let (g, _) =
            Graph::from_edges(Directedness::Directed, 3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        assert_eq!(g.in_neighbors(2), &[0, 1]);
        assert_eq!(g.in_neighbors(0), &[] as &[u32]);
        assert!(g.has_edge(0, 1));
        assert!(!g.has_edge(1, 0));
    }

    #[test]
    fn out_of_range_vertex_is_rejected() {
        let err = Graph::from_edges(Directedness::Directed, 2, [(0, 2)]).unwrap_err();
        assert!(matches!(err, Error::InvalidVertex(2)));
    }

    #[test]
    fn edge_insertion_and_removal() {
        let (g, _) = Graph::from_edges(Directedness::Undirected, 3, [(0, 1)]).unwrap();
        let g2 = g.with_edge_inserted(2, 1).unwrap();
        assert_eq!(g2.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(matches!(g2.with_edge_inserted(1, 2), Err(Error::DuplicateEdge(1, 2))));
        let g3 = g2.with_edge_removed(1, 0).unwrap();
        assert_eq!(g3.edges().collect::<Vec<_>>(), vec![(1, 2)]);
        assert!(matches!(g3.with_edge_removed(0, 1), Err(Error::MissingEdge(0, 1))));
        assert_ne!(g.fingerprint(), g2.fingerprint());
    }

    #[test]
    fn vertex_set_operations() {
        let a = VertexSet::from_unsorted(vec![5, 1, 3, 1]);
        let b: VertexSet = [3, 4, 5].into_iter().collect();
        assert_eq!(a.as_slice(), &[1, 3, 5]);
        assert_eq!(a.intersection_len(&b), 2);
        assert_eq!(a.difference(&b).as_slice(), &[1]);
        assert_eq!(a.union(&b).as_slice(), &[1, 3, 4, 5]);
        assert!(VertexSet::from_unsorted(vec![3, 5]).is_subset(&a));
        assert!(!b.is_subset(&a));
    }

    #[test]
    fn attribute_table_rejects_bad_columns() {
        let mut t = AttributeTable::new(2);
        t.add_column("posts", vec![1, 2]).unwrap();
        assert!(t.add_column("posts", vec![3, 4]).is_err());
        assert!(t.add_column("age", vec![3]).is_err());
        assert!(matches!(t.column("age"), Err(Error::UnknownAttribute(_))));
        assert_eq!(t.column("posts").unwrap(), &[1, 2]);
    }
}
