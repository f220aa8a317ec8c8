use serde::{Deserialize, Serialize};

use super::{Graph, VertexId, VertexSet};
use crate::{Error, Result};

/// Edge orientation followed by a k-hop traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Follow out-edges: `u` is in the window if `v` reaches it.
    Out,
    /// Follow in-edges: `u` is in the window if it reaches `v`.
    In,
    Undirected,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Out => "out",
            Direction::In => "in",
            Direction::Undirected => "undirected",
        }
    }

    pub fn reversed(self) -> Direction {
        match self {
            Direction::Out => Direction::In,
            Direction::In => Direction::Out,
            Direction::Undirected => Direction::Undirected,
        }
    }

    /// `Undirected` is valid exactly on undirected graphs.
    pub fn check(self, g: &Graph) -> Result<()> {
        if (self == Direction::Undirected) == g.is_directed() {
            Err(Error::DirectionMismatch {
                direction: self.name(),
                graph: g.directedness().name(),
            })
        } else {
            Ok(())
        }
    }

    /// Default orientation for a graph: `Out` when directed.
    pub fn default_for(g: &Graph) -> Direction {
        if g.is_directed() {
            Direction::Out
        } else {
            Direction::Undirected
        }
    }
}

/// Reusable traversal scratch space bound to one graph.
///
/// Visited marks use an epoch counter so that consecutive traversals do not
/// pay for clearing an `O(n)` array.
pub struct Traversal<'g> {
    graph: &'g Graph,
    stamp: Vec<u32>,
    epoch: u32,
    frontier: Vec<VertexId>,
}

impl<'g> Traversal<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Self {
            graph,
            stamp: vec![0; graph.vertex_count()],
            epoch: 0,
            frontier: Vec::new(),
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    fn next_epoch(&mut self) -> u32 {
        if self.epoch == u32::MAX {
            self.stamp.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
        self.epoch
    }

    #[inline]
    fn neighbors(&self, v: VertexId, dir: Direction) -> &'g [VertexId] {
        match dir {
            Direction::Out | Direction::Undirected => self.graph.out_neighbors(v),
            Direction::In => self.graph.in_neighbors(v),
        }
    }

    /// Appends the k-hop window of `v` (including `v`, first) to `out` in BFS
    /// order. Does not validate arguments.
    pub fn khop_into(&mut self, v: VertexId, k: u32, dir: Direction, out: &mut Vec<VertexId>) {
        let epoch = self.next_epoch();
        let start = out.len();
        self.stamp[v as usize] = epoch;
        out.push(v);
        let mut level_start = start;
        for _ in 0..k {
            let level_end = out.len();
            if level_start == level_end {
                break;
            }
            for i in level_start..level_end {
                let u = out[i];
                for &w in self.neighbors(u, dir) {
                    let s = &mut self.stamp[w as usize];
                    if *s != epoch {
                        *s = epoch;
                        out.push(w);
                    }
                }
            }
            level_start = level_end;
        }
    }

    /// Appends every vertex reachable from `v` along `dir` (including `v`).
    pub fn reachable_into(&mut self, v: VertexId, dir: Direction, out: &mut Vec<VertexId>) {
        self.khop_into(v, u32::MAX, dir, out);
    }

    /// Ancestors of `v` plus `v` itself, unsorted.
    pub fn ancestors_into(&mut self, v: VertexId, out: &mut Vec<VertexId>) {
        self.reachable_into(v, Direction::In, out);
    }

    /// Marks the members of `set` for [`Traversal::is_marked`] queries.
    pub fn mark_all(&mut self, set: &[VertexId]) {
        let epoch = self.next_epoch();
        for &x in set {
            self.stamp[x as usize] = epoch;
        }
    }

    pub fn mark(&mut self, v: VertexId) {
        self.stamp[v as usize] = self.epoch;
    }

    #[inline]
    pub fn is_marked(&self, v: VertexId) -> bool {
        self.stamp[v as usize] == self.epoch
    }

    /// Vertices reachable from `v` within `k` hops, as a sorted set.
    pub fn khop_set(&mut self, v: VertexId, k: u32, dir: Direction) -> VertexSet {
        let mut out = std::mem::take(&mut self.frontier);
        out.clear();
        self.khop_into(v, k, dir, &mut out);
        let set = VertexSet::from_unsorted(out.clone());
        self.frontier = out;
        set
    }
}

/// `{u : dist(v, u) <= k}` along `direction`, including `v`.
pub fn khop_window(g: &Graph, v: VertexId, k: u32, direction: Direction) -> Result<VertexSet> {
    g.check_vertex(v)?;
    direction.check(g)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok(Traversal::new(g).khop_set(v, k, direction))
}

/// `v` and all of its ancestors in a DAG.
pub fn topological_window(g: &Graph, v: VertexId) -> Result<VertexSet> {
    g.check_vertex(v)?;
    g.require_dag()?;
    let mut out = Vec::new();
    Traversal::new(g).ancestors_into(v, &mut out);
    Ok(VertexSet::from_unsorted(out))
}

/// `v` and all of its descendants in a directed graph.
pub fn descendants(g: &Graph, v: VertexId) -> Result<VertexSet> {
    g.check_vertex(v)?;
    Direction::Out.check(g)?;
    let mut out = Vec::new();
    Traversal::new(g).reachable_into(v, Direction::Out, &mut out);
    Ok(VertexSet::from_unsorted(out))
}

/// Kahn's algorithm with a min-heap, so ties go to the smallest vertex ID.
pub fn topological_order(g: &Graph) -> Result<Vec<VertexId>> {
    if !g.is_directed() {
        return Err(Error::DirectionMismatch {
            direction: "topological",
            graph: "undirected",
        });
    }
    kahn(g).map_err(|v| Error::Cycle(g.label(v)))
}

fn kahn(g: &Graph) -> std::result::Result<Vec<VertexId>, VertexId> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let n = g.vertex_count();
    let mut indegree: Vec<usize> = (0..n as VertexId).map(|v| g.in_neighbors(v).len()).collect();
    let mut ready: BinaryHeap<Reverse<VertexId>> = (0..n as VertexId)
        .filter(|&v| indegree[v as usize] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in g.out_neighbors(v) {
            let d = &mut indegree[w as usize];
            *d -= 1;
            if *d == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every unsorted vertex keeps an unsorted in-neighbour; walking those
    // backwards must revisit a vertex, which then lies on a cycle.
    let start = (0..n as VertexId)
        .find(|&v| indegree[v as usize] > 0)
        .expect("unsorted vertex exists");
    let mut seen = vec![false; n];
    let mut v = start;
    while !seen[v as usize] {
        seen[v as usize] = true;
        v = *g
            .in_neighbors(v)
            .iter()
            .find(|&&u| indegree[u as usize] > 0)
            .expect("unsorted vertex has an unsorted in-neighbour");
    }
    Err(v)
}

pub(super) fn find_cycle(g: &Graph) -> std::result::Result<(), VertexId> {
    if !g.is_directed() {
        return Ok(());
    }
    kahn(g).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Directedness;

    fn path(n: u32) -> Graph {
        Graph::from_edges(Directedness::Directed, n as usize, (0..n - 1).map(|i| (i, i + 1)))
            .unwrap()
            .0
    }

    #[test]
    fn chain_order() {
        assert_eq!(topological_order(&path(3)).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn ties_go_to_smallest_id() {
        let (g, _) = Graph::from_edges(Directedness::Directed, 4, [(3, 0), (2, 0), (1, 3)]).unwrap();
        assert_eq!(topological_order(&g).unwrap(), vec![1, 2, 3, 0]);
    }

    #[test]
    fn two_cycle_is_reported() {
        let (g, _) = Graph::from_edges(Directedness::Directed, 3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        match topological_order(&g) {
            Err(Error::Cycle(v)) => assert!(v == 0 || v == 1),
            other => panic!("expected cycle, got {other:?}"),
        }
        assert!(matches!(topological_window(&g, 2), Err(Error::Cycle(_))));
    }

    #[test]
    fn cycle_witness_is_on_the_cycle() {
        // 0 -> 1 -> 2 -> 3 -> 1, plus 3 -> 4; the witness must be 1, 2 or 3.
        let (g, _) = Graph::from_edges(
            Directedness::Directed,
            5,
            [(0, 1), (1, 2), (2, 3), (3, 1), (3, 4)],
        )
        .unwrap();
        match topological_order(&g) {
            Err(Error::Cycle(v)) => assert!((1..=3).contains(&v)),
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn khop_respects_direction() {
        let g = path(4);
        assert_eq!(khop_window(&g, 1, 1, Direction::Out).unwrap().as_slice(), &[1, 2]);
        assert_eq!(khop_window(&g, 1, 1, Direction::In).unwrap().as_slice(), &[0, 1]);
        assert_eq!(khop_window(&g, 0, 2, Direction::Out).unwrap().as_slice(), &[0, 1, 2]);
        assert!(matches!(
            khop_window(&g, 0, 1, Direction::Undirected),
            Err(Error::DirectionMismatch { .. })
        ));
        assert!(matches!(khop_window(&g, 9, 1, Direction::Out), Err(Error::InvalidVertex(9))));
        assert!(khop_window(&g, 0, 0, Direction::Out).is_err());
    }

    #[test]
    fn isolated_vertex_window_is_itself() {
        let (g, _) = Graph::from_edges(Directedness::Undirected, 3, [(0, 1)]).unwrap();
        for k in 1..4 {
            assert_eq!(khop_window(&g, 2, k, Direction::Undirected).unwrap().as_slice(), &[2]);
        }
    }

    #[test]
    fn source_topological_window_is_itself() {
        let g = path(3);
        assert_eq!(topological_window(&g, 0).unwrap().as_slice(), &[0]);
        assert_eq!(topological_window(&g, 2).unwrap().as_slice(), &[0, 1, 2]);
        assert_eq!(descendants(&g, 1).unwrap().as_slice(), &[1, 2]);
    }
}
