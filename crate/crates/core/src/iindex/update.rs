//! Edge insertions and deletions on an existing I-Index.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{best_parent, IIndex, IIndexEntry, Marks};
use crate::graph::{descendants, topological_order, Graph, Traversal, VertexId, VertexSet};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeOp {
    Insert,
    Delete,
}

impl IIndex {
    /// Applies `op` on the edge `(s, t)` and recomputes the entries of `t`
    /// and of those descendants whose parents' windows changed. The result is
    /// identical to a fresh build on the returned graph.
    pub fn apply_edge_update(&mut self, g: &Graph, s: VertexId, t: VertexId, op: EdgeOp) -> Result<Graph> {
        self.check_graph(g)?;
        let g2 = match op {
            EdgeOp::Insert => {
                let g2 = g.with_edge_inserted(s, t)?;
                g2.require_dag()?;
                g2
            }
            EdgeOp::Delete => g.with_edge_removed(s, t)?,
        };

        // If s reaches t both before and after the change, the window of t
        // and therefore of every descendant is unchanged; only t's choice of
        // parent can differ.
        let before = self.is_ancestor(s, t);
        let after = match op {
            EdgeOp::Insert => true,
            EdgeOp::Delete => reaches(&g2, s, t),
        };
        if before && after {
            self.recompute(&g2, t);
        } else {
            let affected: HashSet<VertexId> = descendants(&g2, t)?.iter().collect();
            let mut changed: HashSet<VertexId> = HashSet::new();
            for v in topological_order(&g2)? {
                if !affected.contains(&v) {
                    continue;
                }
                let stale = v == t || g2.in_neighbors(v).iter().any(|p| changed.contains(p));
                if !stale {
                    continue;
                }
                let old = self.cardinality[v as usize];
                self.recompute(&g2, v);
                // Windows only grow on insertion and only shrink on deletion,
                // so equal sizes mean equal windows.
                if self.cardinality[v as usize] != old {
                    changed.insert(v);
                }
            }
        }
        self.fingerprint = g2.fingerprint();
        Ok(g2)
    }

    fn is_ancestor(&self, s: VertexId, t: VertexId) -> bool {
        let mut w = Vec::new();
        self.collect_window(t, &mut w);
        w.contains(&s)
    }

    /// Rebuilds the entry of `v` from its parents' current entries.
    fn recompute(&mut self, g: &Graph, v: VertexId) {
        let parents = g.in_neighbors(v);
        let Some(pid) = best_parent(parents, &self.cardinality) else {
            self.entries[v as usize] = IIndexEntry::default();
            self.cardinality[v as usize] = 1;
            return;
        };
        let mut marks = Marks::new(self.entries.len());
        let mut buf = Vec::new();
        self.collect_window(pid, &mut buf);
        marks.set_all(&buf);
        let mut wd = Vec::new();
        for &p in parents {
            if p == pid {
                continue;
            }
            buf.clear();
            self.collect_window(p, &mut buf);
            wd.extend(buf.iter().copied().filter(|&x| marks.set(x)));
        }
        let wd = VertexSet::from_unsorted(wd);
        self.cardinality[v as usize] = self.cardinality[pid as usize] + wd.len() as u64 + 1;
        self.entries[v as usize] = IIndexEntry { pid: Some(pid), wd };
    }
}

fn reaches(g: &Graph, s: VertexId, t: VertexId) -> bool {
    let mut out = Vec::new();
    Traversal::new(g).ancestors_into(t, &mut out);
    out.contains(&s)
}
