#![allow(dead_code)]

use gwin_core::graph::{load_edge_list, VertexId};
use gwin_core::{AttributeTable, Directedness, Graph, VertexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Social graph with vertices A..F as labels 0..5.
pub fn social_graph() -> Graph {
    let text = "0 1\n0 2\n0 3\n0 4\n0 5\n1 3\n1 5\n2 3\n2 4\n2 5\n";
    load_edge_list(text.as_bytes(), Directedness::Undirected).unwrap().0
}

/// DAG with vertices A..H as labels 0..7. Only the facts quoted for it are
/// known; the arcs into F and G are filled in.
pub fn sample_dag() -> Graph {
    let (a, b, c, d, e, f, g, h) = (0, 1, 2, 3, 4, 5, 6, 7);
    let arcs = [(a, d), (b, d), (c, e), (d, e), (d, h), (e, f), (f, g), (h, g)];
    let text: String = arcs.iter().map(|(u, v)| format!("{u} {v}\n")).collect();
    load_edge_list(text.as_bytes(), Directedness::Directed).unwrap().0
}

pub fn letters(s: &str) -> VertexSet {
    s.bytes().map(|c| VertexId::from(c - b'A')).collect()
}

pub fn random_attrs(n: usize, seed: u64) -> AttributeTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AttributeTable::new(n)
        .with_column("x", (0..n).map(|_| rng.gen_range(-1000..=1000)).collect())
        .unwrap()
        .with_column("y", (0..n).map(|_| rng.gen_range(0..=i64::from(u32::MAX))).collect())
        .unwrap()
}

/// Brute-force ancestors by repeated relaxation over the edge list.
pub fn ancestors_oracle(g: &Graph, v: VertexId) -> VertexSet {
    let mut reach = vec![false; g.vertex_count()];
    reach[v as usize] = true;
    loop {
        let mut grew = false;
        for (s, t) in g.edges() {
            if reach[t as usize] && !reach[s as usize] {
                reach[s as usize] = true;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    (0..g.vertex_count() as VertexId).filter(|&u| reach[u as usize]).collect()
}

/// Brute-force k-hop window by dynamic programming over distances.
pub fn khop_oracle(g: &Graph, v: VertexId, k: u32, incoming: bool) -> VertexSet {
    let n = g.vertex_count();
    let mut dist = vec![u32::MAX; n];
    dist[v as usize] = 0;
    for round in 1..=k {
        for (s, t) in g.edges() {
            let (from, to) = if incoming { (t, s) } else { (s, t) };
            let pairs: &[(VertexId, VertexId)] = if g.is_directed() {
                &[(from, to)]
            } else {
                &[(s, t), (t, s)]
            };
            for &(x, y) in pairs {
                if dist[x as usize] == round - 1 && dist[y as usize] == u32::MAX {
                    dist[y as usize] = round;
                }
            }
        }
    }
    (0..n as VertexId).filter(|&u| dist[u as usize] != u32::MAX).collect()
}
