//! Dense Block Index.
//!
//! Every window is covered by a set of pairwise disjoint blocks. A block
//! linked from several windows has its partial aggregate computed once and
//! reused by each of them.

mod build;
mod format;
mod jaccard;
mod minhash;
mod update;
mod validate;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{with_kernel, AggregateSpec, EvalStats, Kernel, ResultTable};
use crate::codec::StableHasher;
use crate::graph::{AttributeTable, Graph, VertexId, VertexSet};
use crate::window::WindowSpec;
use crate::{Error, Result};

pub use build::{build_emc, build_mc, BuildStats};
pub use jaccard::{jaccard_profile, JaccardProfile, JaccardRow};
pub use minhash::{minhash_signature, seeded_hash, MinHasher, Signature};
pub use validate::{ValidationReport, Violation};

/// How the initial owner clusters are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BuildStrategy {
    /// Sign the full windows.
    Mc,
    /// Sign `k_cluster`-hop windows as a cheaper estimate of the full ones.
    Emc { k_cluster: u32 },
}

impl BuildStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            BuildStrategy::Mc => "mc",
            BuildStrategy::Emc { .. } => "emc",
        }
    }
}

/// Construction parameters, stored with the index so that it can be rebuilt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildParams {
    pub strategy: BuildStrategy,
    /// Hash functions per signature.
    pub hashes: usize,
    pub seed: u64,
    /// Clusters with more owners are split into equal chunks.
    pub max_cluster: usize,
    /// Refinement depth after which remaining blocks are emitted as-is.
    pub max_rounds: usize,
    /// Insertions after which [`DbIndex::needs_reorganize`] reports true.
    pub reorganize_threshold: Option<u64>,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            strategy: BuildStrategy::Mc,
            hashes: 4,
            seed: 0,
            max_cluster: 4096,
            max_rounds: 8,
            reorganize_threshold: None,
        }
    }
}

impl BuildParams {
    pub fn mc() -> Self {
        Self::default()
    }

    pub fn emc(k_cluster: u32) -> Self {
        Self {
            strategy: BuildStrategy::Emc { k_cluster },
            ..Self::default()
        }
    }

    pub fn with_hashes(mut self, hashes: usize) -> Self {
        self.hashes = hashes;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub(crate) fn validate(&self, w: &WindowSpec) -> Result<()> {
        if self.hashes == 0 {
            return Err(Error::InvalidParameter("signature needs at least one hash".into()));
        }
        if self.max_cluster == 0 {
            return Err(Error::InvalidParameter("max_cluster must be at least 1".into()));
        }
        if let BuildStrategy::Emc { k_cluster } = self.strategy {
            let WindowSpec::Khop { k, .. } = *w else {
                return Err(Error::InvalidParameter(
                    "estimated clustering needs a k-hop window".into(),
                ));
            };
            if k < 2 || k_cluster == 0 || k_cluster >= k {
                return Err(Error::InvalidParameter(format!(
                    "estimated clustering needs 1 <= k_cluster < k, got k_cluster={k_cluster}, k={k}"
                )));
            }
        }
        Ok(())
    }
}

/// Structural updates absorbed since the last full build.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateLog {
    pub insertions: u64,
}

/// A block as stored in the index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block<'a> {
    pub id: u32,
    pub members: &'a [VertexId],
}

/// Append-only block storage with member-set deduplication.
#[derive(Debug, Clone, Default)]
pub(crate) struct BlockStore {
    offsets: Vec<usize>,
    members: Vec<VertexId>,
    by_hash: HashMap<u64, Bucket>,
}

#[derive(Debug, Clone)]
enum Bucket {
    One(u32),
    Many(Vec<u32>),
}

fn hash_members(members: &[VertexId]) -> u64 {
    let mut h = StableHasher::default();
    h.write_u64(members.len() as u64);
    for &x in members {
        h.write_u64(u64::from(x));
    }
    h.finish()
}

impl BlockStore {
    pub(crate) fn new() -> Self {
        Self {
            offsets: vec![0],
            members: Vec::new(),
            by_hash: HashMap::new(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub(crate) fn get(&self, id: u32) -> &[VertexId] {
        let id = id as usize;
        &self.members[self.offsets[id]..self.offsets[id + 1]]
    }

    pub(crate) fn member_count(&self) -> usize {
        self.members.len()
    }

    fn find(&self, hash: u64, members: &[VertexId]) -> Option<u32> {
        match self.by_hash.get(&hash)? {
            Bucket::One(id) => (self.get(*id) == members).then_some(*id),
            Bucket::Many(ids) => ids.iter().copied().find(|&id| self.get(id) == members),
        }
    }

    /// Id of the block with exactly `members` (sorted), adding it if new.
    pub(crate) fn intern(&mut self, members: &[VertexId]) -> u32 {
        let hash = hash_members(members);
        if let Some(id) = self.find(hash, members) {
            return id;
        }
        let id = self.push_unchecked(members);
        self.index(hash, id);
        id
    }

    /// Appends without deduplication. Only for loading, followed by `reindex`.
    pub(crate) fn push_unchecked(&mut self, members: &[VertexId]) -> u32 {
        let id = self.len() as u32;
        self.members.extend_from_slice(members);
        self.offsets.push(self.members.len());
        id
    }

    fn index(&mut self, hash: u64, id: u32) {
        use std::collections::hash_map::Entry;
        match self.by_hash.entry(hash) {
            Entry::Vacant(e) => {
                e.insert(Bucket::One(id));
            }
            Entry::Occupied(mut e) => {
                let bucket = e.get_mut();
                match bucket {
                    Bucket::One(first) => *bucket = Bucket::Many(vec![*first, id]),
                    Bucket::Many(ids) => ids.push(id),
                }
            }
        }
    }

    /// Rebuilds the dedup table. Returns pairs of blocks with equal members.
    pub(crate) fn reindex(&mut self) -> Vec<(u32, u32)> {
        self.by_hash.clear();
        let mut duplicates = Vec::new();
        for id in 0..self.len() as u32 {
            let members = self.get(id);
            let hash = hash_members(members);
            if let Some(first) = self.find(hash, members) {
                duplicates.push((first, id));
            }
            self.index(hash, id);
        }
        duplicates
    }
}

/// Blocks plus, per vertex, the ids of the blocks covering its window.
#[derive(Debug, Clone)]
pub struct DbIndex {
    window: WindowSpec,
    params: BuildParams,
    vertex_count: usize,
    fingerprint: u64,
    blocks: BlockStore,
    links: Vec<Vec<u32>>,
    log: UpdateLog,
}

impl PartialEq for DbIndex {
    fn eq(&self, other: &Self) -> bool {
        self.window == other.window
            && self.params == other.params
            && self.vertex_count == other.vertex_count
            && self.fingerprint == other.fingerprint
            && self.blocks.offsets == other.blocks.offsets
            && self.blocks.members == other.blocks.members
            && self.links == other.links
            && self.log == other.log
    }
}

impl DbIndex {
    /// An index with no blocks, to be filled by
    /// [`DbIndex::identify_dense_blocks`].
    pub fn empty(g: &Graph, window: WindowSpec, params: BuildParams) -> Self {
        Self {
            window,
            params,
            vertex_count: g.vertex_count(),
            fingerprint: g.fingerprint(),
            blocks: BlockStore::new(),
            links: vec![Vec::new(); g.vertex_count()],
            log: UpdateLog::default(),
        }
    }

    /// Builds with the strategy recorded in `params`.
    pub fn build(g: &Graph, window: WindowSpec, params: BuildParams) -> Result<(Self, BuildStats)> {
        build::build(g, window, params)
    }

    /// Builds from a caller-supplied owner clustering instead of signatures.
    /// Every vertex must appear in exactly one cluster.
    pub fn build_from_clusters(
        g: &Graph,
        window: WindowSpec,
        params: BuildParams,
        clusters: &[Vec<VertexId>],
    ) -> Result<(Self, BuildStats)> {
        build::build_from_clusters(g, window, params, clusters)
    }

    pub fn window_spec(&self) -> WindowSpec {
        self.window
    }

    pub fn params(&self) -> &BuildParams {
        &self.params
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Fingerprint of the graph this index describes.
    pub fn graph_fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn update_log(&self) -> UpdateLog {
        self.log
    }

    /// True once the configured number of insertions has been absorbed.
    pub fn needs_reorganize(&self) -> bool {
        self.params
            .reorganize_threshold
            .is_some_and(|t| self.log.insertions >= t)
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, id: u32) -> Block<'_> {
        Block {
            id,
            members: self.blocks.get(id),
        }
    }

    pub fn blocks(&self) -> impl Iterator<Item = Block<'_>> + '_ {
        (0..self.blocks.len() as u32).map(|id| self.block(id))
    }

    /// Ids of the blocks covering the window of `v`.
    pub fn links(&self, v: VertexId) -> &[u32] {
        &self.links[v as usize]
    }

    pub fn link_count(&self) -> usize {
        self.links.iter().map(Vec::len).sum()
    }

    /// Number of windows linking to each block.
    pub fn block_degrees(&self) -> Vec<u32> {
        let mut degree = vec![0u32; self.blocks.len()];
        for &b in self.links.iter().flatten() {
            degree[b as usize] += 1;
        }
        degree
    }

    /// Blocks with at least two members that are linked from at least two
    /// windows.
    pub fn dense_block_count(&self) -> usize {
        self.block_degrees()
            .iter()
            .enumerate()
            .filter(|&(id, &d)| d >= 2 && self.blocks.get(id as u32).len() >= 2)
            .count()
    }

    /// Total block members plus total links.
    pub fn total_work(&self) -> u64 {
        (self.blocks.member_count() + self.link_count()) as u64
    }

    /// Merge steps of [`DbIndex::evaluate`]: folding `s` values costs `s - 1`.
    pub fn merge_steps(&self) -> u64 {
        let blocks: u64 = (0..self.blocks.len() as u32)
            .map(|id| self.blocks.get(id).len().saturating_sub(1) as u64)
            .sum();
        let links: u64 = self
            .links
            .iter()
            .map(|l| l.len().saturating_sub(1) as u64)
            .sum();
        blocks + links
    }

    /// The window of `v` as the union of its linked blocks.
    pub fn covered_window(&self, v: VertexId) -> VertexSet {
        VertexSet::from_unsorted(
            self.links[v as usize]
                .iter()
                .flat_map(|&b| self.blocks.get(b).iter().copied())
                .collect(),
        )
    }

    /// Runs dense-block identification on the given owners and windows and
    /// merges the emitted blocks and links into the index.
    pub fn identify_dense_blocks(
        &mut self,
        owners: &VertexSet,
        windows: Vec<VertexSet>,
        depth: usize,
    ) -> Result<()> {
        if owners.len() != windows.len() {
            return Err(Error::InvalidParameter(format!(
                "{} owners but {} windows",
                owners.len(),
                windows.len()
            )));
        }
        for v in owners.iter().chain(windows.iter().flat_map(|w| w.iter())) {
            if v as usize >= self.vertex_count {
                return Err(Error::InvalidVertex(u64::from(v)));
            }
        }
        let windows = windows.into_iter().map(VertexSet::into_vec).collect();
        let local = build::identify_detached(self, owners.as_slice().to_vec(), windows, depth);
        self.commit(local);
        Ok(())
    }

    pub(crate) fn commit(&mut self, local: Vec<build::LocalBlock>) {
        for block in local {
            let id = self.blocks.intern(&block.members);
            for owner in block.owners {
                self.links[owner as usize].push(id);
            }
        }
    }

    pub fn evaluate(&self, attrs: &AttributeTable, a: &AggregateSpec) -> Result<ResultTable> {
        self.evaluate_with_stats(attrs, a).map(|(table, _)| table)
    }

    /// Per-block partials first, then one combine per link.
    pub fn evaluate_with_stats(
        &self,
        attrs: &AttributeTable,
        a: &AggregateSpec,
    ) -> Result<(ResultTable, EvalStats)> {
        if attrs.vertex_count() != self.vertex_count {
            return Err(Error::InvalidParameter(format!(
                "attribute table has {} rows for {} vertices",
                attrs.vertex_count(),
                self.vertex_count
            )));
        }
        let values = a.values(attrs)?;
        let table = with_kernel!(a.function, k => self.run(k, &values));
        Ok((table, EvalStats { merge_steps: self.merge_steps() }))
    }

    fn run<K: Kernel>(&self, kernel: K, values: &[i64]) -> ResultTable
    where
        K::State: Send + Sync,
    {
        let partials: Vec<K::State> = (0..self.blocks.len() as u32)
            .into_par_iter()
            .with_min_len(1024)
            .map(|id| {
                self.blocks
                    .get(id)
                    .iter()
                    .fold(kernel.identity(), |s, &x| kernel.accumulate(s, values[x as usize]))
            })
            .collect();
        let results = self
            .links
            .par_iter()
            .with_min_len(1024)
            .map(|links| {
                let state = links
                    .iter()
                    .fold(kernel.identity(), |s, &b| kernel.combine(s, partials[b as usize]));
                kernel.finalize(state)
            })
            .collect();
        ResultTable::new(results)
    }
}
