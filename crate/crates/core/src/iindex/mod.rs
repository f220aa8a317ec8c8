//! Inheritance Index for topological windows on DAGs.
//!
//! The window of a vertex contains the window of each of its ancestors, so
//! it can be stored as a parent pointer plus the few vertices the parent's
//! window lacks. Aggregates are inherited the same way.

mod format;
mod update;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::aggregate::{with_kernel, AggregateSpec, EvalStats, Kernel, ResultTable};
use crate::graph::{topological_order, AttributeTable, Graph, VertexId, VertexSet};
use crate::window::check_attrs;
use crate::{Error, Result};

pub use update::EdgeOp;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IIndexEntry {
    /// The in-neighbour with the largest window, if any.
    pub pid: Option<VertexId>,
    /// Window members outside the parent's window, excluding the vertex.
    pub wd: VertexSet,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct IIndexBuildStats {
    pub total_secs: f64,
    /// Most window entries held at once during the scan.
    pub peak_resident_window_entries: usize,
    pub total_window_mass: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IIndexSizeReport {
    pub vertices: usize,
    pub wd_entries: u64,
    pub index_bytes: usize,
    pub graph_bytes: usize,
    /// Index bytes over graph bytes.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IIndex {
    fingerprint: u64,
    entries: Vec<IIndexEntry>,
    /// Window size per vertex.
    cardinality: Vec<u64>,
}

impl IIndex {
    pub fn build(g: &Graph) -> Result<Self> {
        Self::build_with_stats(g).map(|(idx, _)| idx)
    }

    /// One scan in topological order. A window stays in memory until its last
    /// child has consumed it.
    pub fn build_with_stats(g: &Graph) -> Result<(Self, IIndexBuildStats)> {
        let start = Instant::now();
        let order = topological_order(g)?;
        let n = g.vertex_count();
        let mut entries = vec![IIndexEntry::default(); n];
        let mut cardinality = vec![0u64; n];
        let mut windows: Vec<Option<Vec<VertexId>>> = vec![None; n];
        let mut remaining: Vec<usize> = (0..n as VertexId).map(|v| g.out_neighbors(v).len()).collect();
        let mut marks = Marks::new(n);
        let mut resident = 0usize;
        let mut stats = IIndexBuildStats::default();

        for &v in &order {
            let parents = g.in_neighbors(v);
            let (entry, window) = match best_parent(parents, &cardinality) {
                None => (IIndexEntry::default(), vec![v]),
                Some(pid) => {
                    let base = windows[pid as usize].as_deref().expect("parent window resident");
                    marks.reset();
                    marks.set_all(base);
                    let mut wd = Vec::new();
                    for &p in parents {
                        if p == pid {
                            continue;
                        }
                        let pw = windows[p as usize].as_deref().expect("parent window resident");
                        for &x in pw {
                            if marks.set(x) {
                                wd.push(x);
                            }
                        }
                    }
                    wd.sort_unstable();
                    let mut window = merge_sorted(base, &wd);
                    let at = window.binary_search(&v).expect_err("vertex not its own ancestor");
                    window.insert(at, v);
                    (
                        IIndexEntry {
                            pid: Some(pid),
                            wd: VertexSet::from_sorted_unchecked(wd),
                        },
                        window,
                    )
                }
            };
            cardinality[v as usize] = window.len() as u64;
            stats.total_window_mass += window.len() as u64;
            entries[v as usize] = entry;
            if remaining[v as usize] > 0 {
                resident += window.len();
                windows[v as usize] = Some(window);
            }
            stats.peak_resident_window_entries = stats.peak_resident_window_entries.max(resident);
            for &p in parents {
                remaining[p as usize] -= 1;
                if remaining[p as usize] == 0 {
                    if let Some(w) = windows[p as usize].take() {
                        resident -= w.len();
                    }
                }
            }
        }
        stats.total_secs = start.elapsed().as_secs_f64();
        Ok((
            Self {
                fingerprint: g.fingerprint(),
                entries,
                cardinality,
            },
            stats,
        ))
    }

    pub fn vertex_count(&self) -> usize {
        self.entries.len()
    }

    pub fn graph_fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn entry(&self, v: VertexId) -> &IIndexEntry {
        &self.entries[v as usize]
    }

    pub fn entries(&self) -> &[IIndexEntry] {
        &self.entries
    }

    /// Window size of `v`.
    pub fn cardinality(&self, v: VertexId) -> u64 {
        self.cardinality[v as usize]
    }

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

    /// `{v} ∪ wd(v) ∪ materialize_window(pid(v))`.
    pub fn materialize_window(&self, v: VertexId) -> Result<VertexSet> {
        if v as usize >= self.entries.len() {
            return Err(Error::InvalidVertex(v.into()));
        }
        let mut out = Vec::with_capacity(self.cardinality[v as usize] as usize);
        self.collect_window(v, &mut out);
        Ok(VertexSet::from_unsorted(out))
    }

    pub(crate) fn collect_window(&self, v: VertexId, out: &mut Vec<VertexId>) {
        let mut cur = Some(v);
        while let Some(x) = cur {
            out.push(x);
            let entry = &self.entries[x as usize];
            out.extend(entry.wd.iter());
            cur = entry.pid;
        }
    }

    pub fn evaluate(&self, g: &Graph, attrs: &AttributeTable, a: &AggregateSpec) -> Result<ResultTable> {
        self.evaluate_with_stats(g, attrs, a).map(|(table, _)| table)
    }

    /// Each vertex combines its parent's aggregate with its own value and its
    /// window difference.
    pub fn evaluate_with_stats(
        &self,
        g: &Graph,
        attrs: &AttributeTable,
        a: &AggregateSpec,
    ) -> Result<(ResultTable, EvalStats)> {
        self.check_graph(g)?;
        check_attrs(g, attrs)?;
        let values = a.values(attrs)?;
        let order = topological_order(g)?;
        Ok(with_kernel!(a.function, k => self.run(k, &order, &values)))
    }

    fn run<K: Kernel>(&self, kernel: K, order: &[VertexId], values: &[i64]) -> (ResultTable, EvalStats) {
        let mut states = vec![kernel.identity(); self.entries.len()];
        let mut merge_steps = 0u64;
        for &v in order {
            let entry = &self.entries[v as usize];
            let mut s = kernel.accumulate(kernel.identity(), values[v as usize]);
            if let Some(pid) = entry.pid {
                s = kernel.combine(s, states[pid as usize]);
                merge_steps += 1;
            }
            for x in entry.wd.iter() {
                s = kernel.accumulate(s, values[x as usize]);
            }
            merge_steps += entry.wd.len() as u64;
            states[v as usize] = s;
        }
        let table = ResultTable::new(states.into_iter().map(|s| kernel.finalize(s)).collect());
        (table, EvalStats { merge_steps })
    }

    pub fn wd_entries(&self) -> u64 {
        self.entries.iter().map(|e| e.wd.len() as u64).sum()
    }

    pub fn index_size_report(&self, g: &Graph) -> IIndexSizeReport {
        let index_bytes = self.encoded_len();
        let graph_bytes = g.encoded_len();
        IIndexSizeReport {
            vertices: self.entries.len(),
            wd_entries: self.wd_entries(),
            index_bytes,
            graph_bytes,
            ratio: index_bytes as f64 / graph_bytes.max(1) as f64,
        }
    }
}

/// In-neighbour with the largest window; ties go to the smallest id.
fn best_parent(parents: &[VertexId], cardinality: &[u64]) -> Option<VertexId> {
    parents
        .iter()
        .copied()
        .max_by(|&a, &b| {
            cardinality[a as usize]
                .cmp(&cardinality[b as usize])
                .then(b.cmp(&a))
        })
}

fn merge_sorted(a: &[VertexId], b: &[VertexId]) -> Vec<VertexId> {
    let mut out = Vec::with_capacity(a.len() + b.len() + 1);
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Epoch-stamped membership marks over vertex ids.
pub(crate) struct Marks {
    stamp: Vec<u32>,
    epoch: u32,
}

impl Marks {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n],
            epoch: 1,
        }
    }

    pub(crate) fn reset(&mut self) {
        if self.epoch == u32::MAX {
            self.stamp.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
    }

    /// Marks `x`; true if it was not marked before.
    pub(crate) fn set(&mut self, x: VertexId) -> bool {
        let s = &mut self.stamp[x as usize];
        let fresh = *s != self.epoch;
        *s = self.epoch;
        fresh
    }

    pub(crate) fn set_all(&mut self, xs: &[VertexId]) {
        for &x in xs {
            self.stamp[x as usize] = self.epoch;
        }
    }
}
