//! MinHash signatures over vertex sets.

use serde::{Deserialize, Serialize};

use crate::codec::{derive_seeds, mix64};
use crate::graph::{VertexId, VertexSet};
use crate::{Error, Result};

/// `m` minimum hash values of a set, one per hash function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature(pub Vec<u64>);

impl Signature {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Fraction of positions where both signatures agree; an unbiased
    /// estimate of the Jaccard coefficient of the underlying sets.
    pub fn agreement(&self, other: &Signature) -> f64 {
        let same = self.0.iter().zip(&other.0).filter(|(a, b)| a == b).count();
        same as f64 / self.0.len().max(1) as f64
    }
}

/// Hash function `i` is `x -> mix64(x ^ seeds[i])`.
#[inline]
pub fn seeded_hash(x: VertexId, seed: u64) -> u64 {
    mix64(u64::from(x) ^ seed)
}

/// A fixed family of `m` seeded hash functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinHasher {
    seeds: Vec<u64>,
}

impl MinHasher {
    /// `m` hash functions whose seeds are derived from `seed`.
    pub fn new(m: usize, seed: u64) -> Self {
        Self {
            seeds: derive_seeds(seed, m),
        }
    }

    pub fn from_seeds(seeds: Vec<u64>) -> Self {
        Self { seeds }
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    /// Signature of `members`; an empty slice yields all-`u64::MAX`.
    pub fn signature(&self, members: &[VertexId]) -> Signature {
        let mut mins = vec![u64::MAX; self.seeds.len()];
        for &x in members {
            for (min, &seed) in mins.iter_mut().zip(&self.seeds) {
                let h = seeded_hash(x, seed);
                if h < *min {
                    *min = h;
                }
            }
        }
        Signature(mins)
    }
}

/// Element `i` is the minimum over `s` of hash function `i` keyed by `seeds[i]`.
pub fn minhash_signature(s: &VertexSet, m: usize, seeds: &[u64]) -> Result<Signature> {
    if s.is_empty() {
        return Err(Error::InvalidParameter("cannot sign an empty vertex set".into()));
    }
    if seeds.len() != m {
        return Err(Error::InvalidParameter(format!(
            "{} seeds given for {m} hash functions",
            seeds.len()
        )));
    }
    Ok(MinHasher::from_seeds(seeds.to_vec()).signature(s.as_slice()))
}
