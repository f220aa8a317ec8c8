//! Incremental edge insertion and full reorganization.

use super::build::{self, BuildStats};
use super::DbIndex;
use crate::graph::{Direction, Graph, Traversal, VertexId, VertexSet};
use crate::window::WindowSpec;
use crate::{Error, Result};

impl DbIndex {
    pub(crate) fn check_graph(&self, g: &Graph) -> Result<()> {
        let actual = g.fingerprint();
        if actual != self.fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: self.fingerprint,
                actual,
            });
        }
        Ok(())
    }

    /// Inserts `(u, v)` into `g` and patches the index: windows that grow get
    /// their additions covered by a secondary index whose blocks are merged
    /// in with deduplication. Returns the updated graph.
    pub fn apply_edge_insertion(&mut self, g: &Graph, u: VertexId, v: VertexId) -> Result<Graph> {
        self.check_graph(g)?;
        let g2 = g.with_edge_inserted(u, v)?;
        self.window.validate(&g2)?;

        let candidates = affected_owners(g, &self.window, u, v);
        let mut old_t = Traversal::new(g);
        let mut new_t = Traversal::new(&g2);
        let mut buf = Vec::new();
        let mut owners = Vec::new();
        let mut additions = Vec::new();
        for x in candidates {
            buf.clear();
            self.window.collect_into(&mut old_t, x, &mut buf);
            let old = VertexSet::from_unsorted(std::mem::take(&mut buf));
            self.window.collect_into(&mut new_t, x, &mut buf);
            let new = VertexSet::from_unsorted(std::mem::take(&mut buf));
            let added = new.difference(&old);
            if !added.is_empty() {
                owners.push(x);
                additions.push(added.into_vec());
            }
        }
        let local = build::identify_detached(self, owners, additions, 0);
        self.commit(local);
        self.log.insertions += 1;
        self.fingerprint = g2.fingerprint();
        Ok(g2)
    }

    /// Rebuilds from scratch with the stored parameters.
    pub fn reorganize(&self, g: &Graph) -> Result<(DbIndex, BuildStats)> {
        build::build(g, self.window, self.params)
    }
}

/// Owners whose window may grow when `(u, v)` is added, ascending.
fn affected_owners(g: &Graph, w: &WindowSpec, u: VertexId, v: VertexId) -> Vec<VertexId> {
    let mut t = Traversal::new(g);
    let mut out = Vec::new();
    match *w {
        // A new path x ~> u -> v uses at most k - 1 hops before the edge.
        WindowSpec::Khop { k, direction } => match direction {
            Direction::Out => t.khop_into(u, k - 1, Direction::In, &mut out),
            Direction::In => t.khop_into(v, k - 1, Direction::Out, &mut out),
            Direction::Undirected => {
                t.khop_into(u, k - 1, Direction::Undirected, &mut out);
                t.khop_into(v, k - 1, Direction::Undirected, &mut out);
            }
        },
        // v and its descendants gain the ancestors of u.
        WindowSpec::Topological => t.reachable_into(v, Direction::Out, &mut out),
    }
    VertexSet::from_unsorted(out).into_vec()
}
