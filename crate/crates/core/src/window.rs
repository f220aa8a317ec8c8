//! Window specifications and the non-indexed evaluator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{with_kernel, AggregateSpec, EvalStats, Kernel, ResultTable};
use crate::graph::{AttributeTable, Direction, Graph, Traversal, VertexId, VertexSet};
use crate::{Error, Result};

/// Which vertices form the window of a focal vertex. Windows always contain
/// the focal vertex itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WindowSpec {
    /// Vertices within `k` hops along `direction`.
    Khop { k: u32, direction: Direction },
    /// The vertex and all of its ancestors; DAGs only.
    Topological,
}

impl WindowSpec {
    pub fn khop(k: u32, direction: Direction) -> Self {
        WindowSpec::Khop { k, direction }
    }

    pub fn topological() -> Self {
        WindowSpec::Topological
    }

    /// Checks that the spec can be evaluated on `g`.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        match *self {
            WindowSpec::Khop { k, direction } => {
                if k == 0 {
                    return Err(Error::InvalidParameter("k must be at least 1".into()));
                }
                direction.check(g)
            }
            WindowSpec::Topological => g.require_dag(),
        }
    }

    /// Appends the window of `v` to `out`, unsorted. The spec must already be
    /// validated against the traversal's graph.
    #[inline]
    pub fn collect_into(&self, traversal: &mut Traversal<'_>, v: VertexId, out: &mut Vec<VertexId>) {
        match *self {
            WindowSpec::Khop { k, direction } => traversal.khop_into(v, k, direction, out),
            WindowSpec::Topological => traversal.ancestors_into(v, out),
        }
    }

    pub fn window(&self, g: &Graph, v: VertexId) -> Result<VertexSet> {
        g.check_vertex(v)?;
        self.validate(g)?;
        let mut out = Vec::new();
        self.collect_into(&mut Traversal::new(g), v, &mut out);
        Ok(VertexSet::from_unsorted(out))
    }

    /// The spec with the hop count replaced, used for lower-hop clustering.
    pub(crate) fn with_k(&self, k: u32) -> Self {
        match *self {
            WindowSpec::Khop { direction, .. } => WindowSpec::Khop { k, direction },
            WindowSpec::Topological => WindowSpec::Topological,
        }
    }
}

impl std::fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WindowSpec::Khop { k, direction } => write!(f, "{k}-hop ({})", direction.name()),
            WindowSpec::Topological => f.write_str("topological"),
        }
    }
}

pub(crate) fn check_attrs(g: &Graph, attrs: &AttributeTable) -> Result<()> {
    if attrs.vertex_count() != g.vertex_count() {
        return Err(Error::InvalidParameter(format!(
            "attribute table has {} rows for {} vertices",
            attrs.vertex_count(),
            g.vertex_count()
        )));
    }
    Ok(())
}

/// Recomputes every window by traversal and folds the attribute over it.
/// This is the reference all indices are checked against.
pub fn evaluate_nonindexed(
    g: &Graph,
    attrs: &AttributeTable,
    w: &WindowSpec,
    a: &AggregateSpec,
) -> Result<ResultTable> {
    evaluate_nonindexed_with_stats(g, attrs, w, a).map(|(table, _)| table)
}

pub fn evaluate_nonindexed_with_stats(
    g: &Graph,
    attrs: &AttributeTable,
    w: &WindowSpec,
    a: &AggregateSpec,
) -> Result<(ResultTable, EvalStats)> {
    w.validate(g)?;
    check_attrs(g, attrs)?;
    let values = a.values(attrs)?;
    Ok(with_kernel!(a.function, k => run(k, g, &values, w)))
}

fn run<K: Kernel>(kernel: K, g: &Graph, values: &[i64], w: &WindowSpec) -> (ResultTable, EvalStats) {
    let rows: Vec<(crate::AggregateValue, u64)> = (0..g.vertex_count() as VertexId)
        .into_par_iter()
        .map_init(
            || (Traversal::new(g), Vec::new()),
            |(traversal, window), v| {
                window.clear();
                w.collect_into(traversal, v, window);
                let state = window
                    .iter()
                    .fold(kernel.identity(), |s, &x| kernel.accumulate(s, values[x as usize]));
                (kernel.finalize(state), window.len() as u64 - 1)
            },
        )
        .collect();
    let merge_steps = rows.iter().map(|&(_, steps)| steps).sum();
    let table = ResultTable::new(rows.into_iter().map(|(v, _)| v).collect());
    (table, EvalStats { merge_steps })
}
