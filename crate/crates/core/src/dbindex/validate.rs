//! Structural checks of an index against freshly traversed windows.

use serde::Serialize;

use super::DbIndex;
use crate::graph::{Graph, Traversal, VertexId, VertexSet};
use crate::window::WindowSpec;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The index was built for another window spec or graph size.
    Mismatch { message: String },
    EmptyBlock { block: u32 },
    UnsortedBlock { block: u32 },
    DanglingLink { vertex: VertexId, block: u32 },
    /// Two stored blocks have the same members.
    DuplicateBlock { first: u32, second: u32 },
    /// A vertex's linked blocks overlap.
    Overlap { vertex: VertexId, member: VertexId },
    /// The linked blocks do not union to the window.
    Coverage {
        vertex: VertexId,
        missing: Vec<VertexId>,
        extra: Vec<VertexId>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl DbIndex {
    /// Recomputes every window of `g` and checks coverage, disjointness and
    /// block deduplication.
    pub fn validate(&self, g: &Graph, w: &WindowSpec) -> ValidationReport {
        let mut violations = Vec::new();
        if *w != self.window {
            violations.push(Violation::Mismatch {
                message: format!("index built for {} windows, checked against {w}", self.window),
            });
        }
        if g.vertex_count() != self.vertex_count {
            violations.push(Violation::Mismatch {
                message: format!(
                    "index has {} vertices, graph has {}",
                    self.vertex_count,
                    g.vertex_count()
                ),
            });
            return ValidationReport { violations };
        }
        if let Err(e) = w.validate(g) {
            violations.push(Violation::Mismatch { message: e.to_string() });
            return ValidationReport { violations };
        }

        let block_count = self.blocks.len() as u32;
        for id in 0..block_count {
            let members = self.blocks.get(id);
            if members.is_empty() {
                violations.push(Violation::EmptyBlock { block: id });
            } else if members.windows(2).any(|p| p[0] >= p[1]) {
                violations.push(Violation::UnsortedBlock { block: id });
            }
        }
        let mut store = self.blocks.clone();
        for (first, second) in store.reindex() {
            violations.push(Violation::DuplicateBlock { first, second });
        }

        let mut traversal = Traversal::new(g);
        let mut window = Vec::new();
        let mut covered = Vec::new();
        for v in 0..self.vertex_count as VertexId {
            window.clear();
            w.collect_into(&mut traversal, v, &mut window);
            covered.clear();
            for &b in &self.links[v as usize] {
                if b >= block_count {
                    violations.push(Violation::DanglingLink { vertex: v, block: b });
                } else {
                    covered.extend_from_slice(self.blocks.get(b));
                }
            }
            covered.sort_unstable();
            if let Some(pair) = covered.windows(2).find(|p| p[0] == p[1]) {
                violations.push(Violation::Overlap { vertex: v, member: pair[0] });
                covered.dedup();
            }
            let expected = VertexSet::from_unsorted(window.clone());
            let actual = VertexSet::from_unsorted(covered.clone());
            if expected != actual {
                violations.push(Violation::Coverage {
                    vertex: v,
                    missing: expected.difference(&actual).into_vec(),
                    extra: actual.difference(&expected).into_vec(),
                });
            }
        }
        ValidationReport { violations }
    }

    #[cfg(test)]
    pub(crate) fn links_mut(&mut self, v: VertexId) -> &mut Vec<u32> {
        &mut self.links[v as usize]
    }
}
