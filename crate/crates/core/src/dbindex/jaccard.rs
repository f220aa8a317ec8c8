//! Jaccard similarity of adjacent vertices' windows as the hop count grows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::{Direction, Graph, Traversal, VertexId, VertexSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JaccardRow {
    pub k: u32,
    pub pairs: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JaccardProfile {
    pub rows: Vec<JaccardRow>,
}

impl JaccardProfile {
    pub fn median(&self, k: u32) -> Option<f64> {
        self.rows.iter().find(|r| r.k == k).map(|r| r.median)
    }
}

/// Samples `sample_pairs` edges uniformly with replacement and reports the
/// Jaccard coefficient of their endpoints' k-hop windows for `k = 1..=k_max`.
/// Directed graphs use out-windows.
pub fn jaccard_profile(g: &Graph, k_max: u32, sample_pairs: usize, seed: u64) -> Result<JaccardProfile> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let edges: Vec<(VertexId, VertexId)> = g.edges().collect();
    let direction = Direction::default_for(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(VertexId, VertexId)> = if edges.is_empty() {
        Vec::new()
    } else {
        (0..sample_pairs)
            .map(|_| edges[rng.gen_range(0..edges.len())])
            .collect()
    };
    let mut traversal = Traversal::new(g);
    let mut rows = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let mut values: Vec<f64> = pairs
            .iter()
            .map(|&(u, v)| {
                let a = traversal.khop_set(u, k, direction);
                let b = traversal.khop_set(v, k, direction);
                jaccard(&a, &b)
            })
            .collect();
        values.sort_by(f64::total_cmp);
        let (mean, median) = if values.is_empty() {
            (0.0, 0.0)
        } else {
            let mid = values.len() / 2;
            let median = if values.len().is_multiple_of(2) {
                (values[mid - 1] + values[mid]) / 2.0
            } else {
                values[mid]
            };
            (values.iter().sum::<f64>() / values.len() as f64, median)
        };
        rows.push(JaccardRow {
            k,
            pairs: values.len(),
            mean,
            median,
        });
    }
    Ok(JaccardProfile { rows })
}

fn jaccard(a: &VertexSet, b: &VertexSet) -> f64 {
    let inter = a.intersection_len(b);
    inter as f64 / (a.len() + b.len() - inter) as f64
}
