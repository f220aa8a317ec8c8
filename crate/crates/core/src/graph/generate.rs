//! Seeded synthetic workloads: Erdős–Rényi graphs and random DAGs.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Directedness, Graph, VertexId};
use crate::{Error, Result};

/// Erdős–Rényi `G(n, m)`.
///
/// Undirected graphs get `round(n * avg_degree / 2)` distinct edges, directed
/// graphs `round(n * avg_degree)` distinct arcs.
pub fn generate_random_graph(
    n: usize,
    avg_degree: f64,
    seed: u64,
    directedness: Directedness,
) -> Result<Graph> {
    check_args(n, avg_degree)?;
    if avg_degree >= n as f64 {
        return Err(Error::InvalidParameter(format!(
            "average degree {avg_degree} must be below the vertex count {n}"
        )));
    }
    let nf = n as f64;
    let (m, max) = match directedness {
        Directedness::Undirected => ((nf * avg_degree / 2.0).round() as u64, pairs(n)),
        Directedness::Directed => ((nf * avg_degree).round() as u64, 2 * pairs(n)),
    };
    if m > max {
        return Err(Error::InvalidParameter(format!(
            "{m} edges requested but at most {max} fit on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = sample_pairs(&mut rng, m, max, |rng| {
        let u = rng.gen_range(0..n as VertexId);
        let v = rng.gen_range(0..n as VertexId);
        match directedness {
            Directedness::Directed => (u, v),
            Directedness::Undirected => (u.min(v), u.max(v)),
        }
    }, |i| match directedness {
        Directedness::Undirected => unrank_pair(i, n),
        Directedness::Directed => {
            let (u, v) = unrank_pair(i / 2, n);
            if i % 2 == 0 { (u, v) } else { (v, u) }
        }
    });
    Ok(Graph::from_edges(directedness, n, edges)?.0)
}

/// Random DAG: vertices get a random rank and `round(n * avg_degree)`
/// distinct arcs are drawn, each oriented from lower to higher rank.
pub fn generate_random_dag(n: usize, avg_degree: f64, seed: u64) -> Result<Graph> {
    check_args(n, avg_degree)?;
    let m = (n as f64 * avg_degree).round() as u64;
    let max = pairs(n);
    if m > max {
        return Err(Error::InvalidParameter(format!(
            "{m} arcs requested but a DAG on {n} vertices holds at most {max}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_rank: Vec<VertexId> = (0..n as VertexId).collect();
    by_rank.shuffle(&mut rng);
    // Pairs are drawn over rank positions (a < b) and mapped to vertices.
    let positions = sample_pairs(&mut rng, m, max, |rng| {
        let a = rng.gen_range(0..n as VertexId);
        let b = rng.gen_range(0..n as VertexId);
        (a.min(b), a.max(b))
    }, |i| unrank_pair(i, n));
    let edges = positions
        .into_iter()
        .map(|(a, b)| (by_rank[a as usize], by_rank[b as usize]));
    Ok(Graph::from_edges(Directedness::Directed, n, edges)?.0)
}

fn check_args(n: usize, avg_degree: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("vertex count must be at least 1".into()));
    }
    if !(avg_degree >= 0.0 && avg_degree.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "average degree {avg_degree} must be a finite non-negative number"
        )));
    }
    Ok(())
}

fn pairs(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// The `i`-th unordered pair `(u, v)`, `u < v`, in row-major order.
fn unrank_pair(mut i: u64, n: usize) -> (VertexId, VertexId) {
    let n = n as u64;
    let mut u = 0;
    while i >= n - u - 1 {
        i -= n - u - 1;
        u += 1;
    }
    (u as VertexId, (u + 1 + i) as VertexId)
}

/// Draws `m` distinct pairs. Sparse requests use rejection sampling through
/// `draw`; dense ones shuffle the full pair space enumerated by `nth`.
fn sample_pairs<D, N>(
    rng: &mut ChaCha8Rng,
    m: u64,
    max: u64,
    mut draw: D,
    nth: N,
) -> Vec<(VertexId, VertexId)>
where
    D: FnMut(&mut ChaCha8Rng) -> (VertexId, VertexId),
    N: Fn(u64) -> (VertexId, VertexId),
{
    if m.saturating_mul(4) >= max {
        let mut all: Vec<u64> = (0..max).collect();
        let (chosen, _) = all.partial_shuffle(rng, m as usize);
        return chosen.iter().map(|&i| nth(i)).collect();
    }
    let mut seen = HashSet::with_capacity(m as usize);
    let mut edges = Vec::with_capacity(m as usize);
    while (edges.len() as u64) < m {
        let (u, v) = draw(rng);
        if u != v && seen.insert((u, v)) {
            edges.push((u, v));
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::topological_order;

    #[test]
    fn single_isolated_vertex() {
        let g = generate_random_graph(1, 0.0, 7, Directedness::Undirected).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn er_edge_count_is_exact() {
        let g = generate_random_graph(1000, 10.0, 1, Directedness::Undirected).unwrap();
        assert_eq!(g.edge_count(), 5000);
        let degree_sum: usize = (0..1000).map(|v| g.out_neighbors(v).len()).sum();
        assert_eq!(degree_sum as f64 / 1000.0, 10.0);
        let d = generate_random_graph(500, 4.0, 1, Directedness::Directed).unwrap();
        assert_eq!(d.edge_count(), 2000);
    }

    #[test]
    fn er_is_deterministic_per_seed() {
        let a = generate_random_graph(300, 6.0, 42, Directedness::Undirected).unwrap();
        let b = generate_random_graph(300, 6.0, 42, Directedness::Undirected).unwrap();
        let c = generate_random_graph(300, 6.0, 43, Directedness::Undirected).unwrap();
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
        assert_ne!(a.edges().collect::<Vec<_>>(), c.edges().collect::<Vec<_>>());
    }

    #[test]
    fn degree_must_be_below_n() {
        assert!(generate_random_graph(5, 5.0, 0, Directedness::Undirected).is_err());
        assert!(generate_random_graph(0, 1.0, 0, Directedness::Undirected).is_err());
        // Complete graph through the dense path.
        let k5 = generate_random_graph(5, 4.0, 0, Directedness::Undirected).unwrap();
        assert_eq!(k5.edge_count(), 10);
    }

    #[test]
    fn small_dag() {
        let g = generate_random_dag(2, 0.5, 3).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(topological_order(&g).is_ok());
        assert!(generate_random_dag(3, 2.0, 0).is_err());
    }

    #[test]
    fn dags_are_acyclic() {
        for seed in 0..10 {
            let g = generate_random_dag(200, 3.0, seed).unwrap();
            assert_eq!(g.edge_count(), 600);
            assert!(topological_order(&g).is_ok());
        }
    }

    #[test]
    fn unrank_covers_all_pairs() {
        let n = 6;
        let all: Vec<_> = (0..pairs(n)).map(|i| unrank_pair(i, n)).collect();
        let mut expected = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                expected.push((u, v));
            }
        }
        assert_eq!(all, expected);
    }
}
