//! Index construction: signature clustering, then dense-block identification
//! and refinement within each cluster.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::minhash::{MinHasher, Signature};
use super::{BuildParams, BuildStrategy, DbIndex};
use crate::codec::mix64;
use crate::graph::{Graph, Traversal, VertexId};
use crate::window::WindowSpec;
use crate::{Error, Result};

const NONE: u32 = u32::MAX;

/// Owners processed between two serial commits.
const BATCH_OWNERS: usize = 8192;

/// Timings and memory instrumentation of one build.
///
/// Phase times are summed over worker threads, so with more than one thread
/// they may add up to more than `total_secs`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BuildStats {
    pub total_secs: f64,
    /// Window traversals, both for signing and for identification.
    pub traversal_secs: f64,
    /// MinHash signatures, including those of residual windows.
    pub signature_secs: f64,
    /// Dense-block identification and refinement, excluding signatures.
    pub identify_secs: f64,
    pub commit_secs: f64,
    pub clusters: usize,
    pub max_cluster_owners: usize,
    /// Largest summed window size over the owners of one cluster.
    pub max_cluster_window_mass: usize,
    /// Largest single window traversed while signing.
    pub frontier_mass: usize,
    /// Sum of all window sizes.
    pub total_window_mass: usize,
    /// Most window entries that were materialized at the same time.
    pub peak_resident_window_entries: usize,
}

/// Counts window entries currently held in memory.
#[derive(Debug, Default)]
pub(crate) struct WindowLedger {
    current: AtomicUsize,
    peak: AtomicUsize,
}

impl WindowLedger {
    pub(crate) fn acquire(&self, entries: usize) {
        let now = self.current.fetch_add(entries, Ordering::Relaxed) + entries;
        self.peak.fetch_max(now, Ordering::Relaxed);
    }

    pub(crate) fn release(&self, entries: usize) {
        self.current.fetch_sub(entries, Ordering::Relaxed);
    }

    pub(crate) fn peak(&self) -> usize {
        self.peak.load(Ordering::Relaxed)
    }
}

/// A block produced for one cluster, before deduplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LocalBlock {
    pub members: Vec<VertexId>,
    pub owners: Vec<VertexId>,
}

/// Builds with signatures over the full windows.
pub fn build_mc(g: &Graph, window: WindowSpec, params: BuildParams) -> Result<DbIndex> {
    let params = BuildParams {
        strategy: BuildStrategy::Mc,
        ..params
    };
    build(g, window, params).map(|(idx, _)| idx)
}

/// Builds with signatures over `k_cluster`-hop windows.
pub fn build_emc(
    g: &Graph,
    window: WindowSpec,
    k_cluster: u32,
    params: BuildParams,
) -> Result<DbIndex> {
    let params = BuildParams {
        strategy: BuildStrategy::Emc { k_cluster },
        ..params
    };
    build(g, window, params).map(|(idx, _)| idx)
}

pub(crate) fn build(
    g: &Graph,
    window: WindowSpec,
    params: BuildParams,
) -> Result<(DbIndex, BuildStats)> {
    window.validate(g)?;
    params.validate(&window)?;
    let start = Instant::now();
    let hasher = MinHasher::new(params.hashes, params.seed);
    let sign_spec = match params.strategy {
        BuildStrategy::Mc => window,
        BuildStrategy::Emc { k_cluster } => window.with_k(k_cluster),
    };
    let ledger = WindowLedger::default();
    let n = g.vertex_count();

    let signed: Vec<(Signature, usize, Duration, Duration)> = (0..n as VertexId)
        .into_par_iter()
        .map_init(
            || (Traversal::new(g), Vec::new()),
            |(traversal, buf), v| {
                let t0 = Instant::now();
                buf.clear();
                sign_spec.collect_into(traversal, v, buf);
                ledger.acquire(buf.len());
                let t1 = Instant::now();
                let sig = hasher.signature(buf);
                ledger.release(buf.len());
                (sig, buf.len(), t1 - t0, t1.elapsed())
            },
        )
        .collect();

    let mut stats = BuildStats::default();
    for (_, len, trav, sign) in &signed {
        stats.frontier_mass = stats.frontier_mass.max(*len);
        stats.traversal_secs += trav.as_secs_f64();
        stats.signature_secs += sign.as_secs_f64();
    }

    let mut order: Vec<VertexId> = (0..n as VertexId).collect();
    order.par_sort_unstable_by(|&a, &b| signed[a as usize].0.cmp(&signed[b as usize].0).then(a.cmp(&b)));
    let mut clusters: Vec<Vec<VertexId>> = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        if i > 0 && signed[order[i - 1] as usize].0 == signed[v as usize].0 {
            clusters.last_mut().expect("open cluster").push(v);
        } else {
            clusters.push(vec![v]);
        }
    }
    drop(signed);
    clusters.sort_unstable_by_key(|c| c[0]);

    let idx = finish(g, window, params, &hasher, clusters, &ledger, &mut stats);
    stats.total_secs = start.elapsed().as_secs_f64();
    Ok((idx, stats))
}

pub(crate) fn build_from_clusters(
    g: &Graph,
    window: WindowSpec,
    params: BuildParams,
    clusters: &[Vec<VertexId>],
) -> Result<(DbIndex, BuildStats)> {
    window.validate(g)?;
    params.validate(&window)?;
    let start = Instant::now();
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    let mut sorted = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        let mut c = cluster.clone();
        c.sort_unstable();
        for &v in &c {
            g.check_vertex(v)?;
            if std::mem::replace(&mut seen[v as usize], true) {
                return Err(Error::InvalidParameter(format!(
                    "vertex {} appears in more than one cluster",
                    g.label(v)
                )));
            }
        }
        if !c.is_empty() {
            sorted.push(c);
        }
    }
    if let Some(v) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidParameter(format!(
            "vertex {} is in no cluster",
            g.label(v as VertexId)
        )));
    }
    sorted.sort_unstable_by_key(|c| c[0]);
    let hasher = MinHasher::new(params.hashes, params.seed);
    let ledger = WindowLedger::default();
    let mut stats = BuildStats::default();
    let idx = finish(g, window, params, &hasher, sorted, &ledger, &mut stats);
    stats.total_secs = start.elapsed().as_secs_f64();
    Ok((idx, stats))
}

/// Splits oversized clusters into near-equal chunks.
fn split_clusters(clusters: Vec<Vec<VertexId>>, max_cluster: usize) -> Vec<Vec<VertexId>> {
    let mut out = Vec::with_capacity(clusters.len());
    for c in clusters {
        if c.len() <= max_cluster {
            out.push(c);
            continue;
        }
        let parts = c.len().div_ceil(max_cluster);
        let size = c.len().div_ceil(parts);
        out.extend(c.chunks(size).map(<[VertexId]>::to_vec));
    }
    out
}

struct ClusterOutput {
    blocks: Vec<LocalBlock>,
    mass: usize,
    traversal: Duration,
    identify: Duration,
    signature: Duration,
}

fn finish(
    g: &Graph,
    window: WindowSpec,
    params: BuildParams,
    hasher: &MinHasher,
    clusters: Vec<Vec<VertexId>>,
    ledger: &WindowLedger,
    stats: &mut BuildStats,
) -> DbIndex {
    let clusters = split_clusters(clusters, params.max_cluster);
    let n = g.vertex_count();
    let mut idx = DbIndex::empty(g, window, params);
    stats.clusters = clusters.len();

    let mut rest = clusters.as_slice();
    while !rest.is_empty() {
        let mut take = 0;
        let mut owners = 0;
        while take < rest.len() && owners < BATCH_OWNERS {
            owners += rest[take].len();
            take += 1;
        }
        let (batch, tail) = rest.split_at(take);
        rest = tail;

        let outputs: Vec<ClusterOutput> = batch
            .par_iter()
            .map_init(
                || (Traversal::new(g), Identifier::new(n, hasher, params.max_rounds, ledger)),
                |(traversal, ident), owners| {
                    let t0 = Instant::now();
                    let mut windows = Vec::with_capacity(owners.len());
                    let mut mass = 0;
                    for &o in owners {
                        let mut w = Vec::new();
                        window.collect_into(traversal, o, &mut w);
                        ledger.acquire(w.len());
                        mass += w.len();
                        windows.push(w);
                    }
                    let t1 = Instant::now();
                    ident.sign_time = Duration::ZERO;
                    let mut blocks = Vec::new();
                    ident.identify(owners.clone(), windows, 0, &mut blocks);
                    let signature = ident.sign_time;
                    ClusterOutput {
                        blocks,
                        mass,
                        traversal: t1 - t0,
                        identify: t1.elapsed().saturating_sub(signature),
                        signature,
                    }
                },
            )
            .collect();

        let t = Instant::now();
        for (out, owners) in outputs.into_iter().zip(batch) {
            stats.max_cluster_owners = stats.max_cluster_owners.max(owners.len());
            stats.max_cluster_window_mass = stats.max_cluster_window_mass.max(out.mass);
            stats.total_window_mass += out.mass;
            stats.traversal_secs += out.traversal.as_secs_f64();
            stats.identify_secs += out.identify.as_secs_f64();
            stats.signature_secs += out.signature.as_secs_f64();
            idx.commit(out.blocks);
        }
        stats.commit_secs += t.elapsed().as_secs_f64();
    }
    stats.peak_resident_window_entries = ledger.peak();
    idx
}

/// Runs identification outside a build, for callers that already hold the
/// windows.
pub(crate) fn identify_detached(
    idx: &DbIndex,
    owners: Vec<VertexId>,
    windows: Vec<Vec<VertexId>>,
    depth: usize,
) -> Vec<LocalBlock> {
    let hasher = MinHasher::new(idx.params.hashes, idx.params.seed);
    let ledger = WindowLedger::default();
    ledger.acquire(windows.iter().map(Vec::len).sum());
    let mut ident = Identifier::new(idx.vertex_count, &hasher, idx.params.max_rounds, &ledger);
    let mut out = Vec::new();
    for (owners, windows) in chunk_pairs(owners, windows, idx.params.max_cluster) {
        ident.identify(owners, windows, depth, &mut out);
    }
    out
}

fn chunk_pairs(
    owners: Vec<VertexId>,
    windows: Vec<Vec<VertexId>>,
    max_cluster: usize,
) -> Vec<(Vec<VertexId>, Vec<Vec<VertexId>>)> {
    if owners.is_empty() {
        return Vec::new();
    }
    let parts = owners.len().div_ceil(max_cluster);
    let size = owners.len().div_ceil(parts);
    let mut out = Vec::with_capacity(parts);
    let mut windows = windows.into_iter();
    for chunk in owners.chunks(size) {
        out.push((chunk.to_vec(), windows.by_ref().take(chunk.len()).collect()));
    }
    out
}

/// Content nodes covered by exactly the same owners.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
struct Group {
    members: Vec<VertexId>,
    /// Positions in the owner list, ascending.
    owners: Vec<u32>,
}

/// Reusable scratch space for identification within one worker.
pub(crate) struct Identifier<'a> {
    hasher: &'a MinHasher,
    max_rounds: usize,
    ledger: &'a WindowLedger,
    /// Per vertex: node index during grouping, then group id.
    slot: Vec<u32>,
    nodes: Vec<VertexId>,
    node_hash: Vec<u64>,
    node_count: Vec<u32>,
    hits: Vec<u32>,
    touched: Vec<u32>,
    sign_time: Duration,
}

impl<'a> Identifier<'a> {
    pub(crate) fn new(
        n: usize,
        hasher: &'a MinHasher,
        max_rounds: usize,
        ledger: &'a WindowLedger,
    ) -> Self {
        Self {
            hasher,
            max_rounds,
            ledger,
            slot: vec![NONE; n],
            nodes: Vec::new(),
            node_hash: Vec::new(),
            node_count: Vec::new(),
            hits: Vec::new(),
            touched: Vec::new(),
            sign_time: Duration::ZERO,
        }
    }

    /// Emits blocks covering every window of `owners`. The windows' entries
    /// must already be acquired on the ledger; they are released here.
    pub(crate) fn identify(
        &mut self,
        owners: Vec<VertexId>,
        mut windows: Vec<Vec<VertexId>>,
        depth: usize,
        out: &mut Vec<LocalBlock>,
    ) {
        debug_assert_eq!(owners.len(), windows.len());
        if owners.len() == 1 {
            let mut w = windows.pop().expect("one window");
            if !w.is_empty() {
                self.ledger.release(w.len());
                w.sort_unstable();
                out.push(LocalBlock { members: w, owners });
            }
            return;
        }

        let groups = self.partition(&windows);
        let dense: Vec<bool> = groups
            .iter()
            .map(|g| g.members.len() >= 2 && g.owners.len() >= 2)
            .collect();
        let emit_all = depth >= self.max_rounds || !dense.iter().any(|&d| d);
        if emit_all {
            self.ledger.release(windows.iter().map(Vec::len).sum());
            windows.clear();
        } else {
            for w in &mut windows {
                let before = w.len();
                w.retain(|&x| !dense[self.slot[x as usize] as usize]);
                self.ledger.release(before - w.len());
            }
        }
        self.clear_slots();

        for (group, &is_dense) in groups.into_iter().zip(&dense) {
            if emit_all || is_dense {
                let mut members = group.members;
                members.sort_unstable();
                let owners = group.owners.iter().map(|&i| owners[i as usize]).collect();
                out.push(LocalBlock { members, owners });
            }
        }
        if emit_all {
            return;
        }

        let (rest_owners, rest_windows): (Vec<_>, Vec<_>) = owners
            .into_iter()
            .zip(windows)
            .filter(|(_, w)| !w.is_empty())
            .unzip();
        if !rest_owners.is_empty() {
            self.refine(rest_owners, rest_windows, depth + 1, out);
        }
    }

    /// Re-signs residual windows and identifies within each signature class.
    pub(crate) fn refine(
        &mut self,
        owners: Vec<VertexId>,
        mut windows: Vec<Vec<VertexId>>,
        depth: usize,
        out: &mut Vec<LocalBlock>,
    ) {
        let t = Instant::now();
        let sigs: Vec<Signature> = windows.iter().map(|w| self.hasher.signature(w)).collect();
        self.sign_time += t.elapsed();
        let mut class_of: HashMap<&Signature, usize> = HashMap::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (i, sig) in sigs.iter().enumerate() {
            let c = *class_of.entry(sig).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[c].push(i);
        }
        for class in classes {
            let o = class.iter().map(|&i| owners[i]).collect();
            let w = class.iter().map(|&i| std::mem::take(&mut windows[i])).collect();
            self.identify(o, w, depth, out);
        }
    }

    fn clear_slots(&mut self) {
        for &x in &self.nodes {
            self.slot[x as usize] = NONE;
        }
        self.nodes.clear();
    }

    /// Groups window contents by covering owners. Leaves each content node's
    /// group id in `slot` until [`Identifier::clear_slots`].
    fn partition(&mut self, windows: &[Vec<VertexId>]) -> Vec<Group> {
        self.register(windows);
        let groups = match self.group_hashed(windows) {
            Some(groups) => groups,
            None => self.group_exact(windows),
        };
        for (gid, group) in groups.iter().enumerate() {
            for &x in &group.members {
                self.slot[x as usize] = gid as u32;
            }
        }
        groups
    }

    /// Assigns node indices and accumulates an order-independent hash of
    /// each node's covering owners.
    fn register(&mut self, windows: &[Vec<VertexId>]) {
        self.nodes.clear();
        self.node_hash.clear();
        self.node_count.clear();
        for (i, w) in windows.iter().enumerate() {
            let tag = mix64(i as u64 + 1);
            for &x in w {
                let s = &mut self.slot[x as usize];
                if *s == NONE {
                    *s = self.nodes.len() as u32;
                    self.nodes.push(x);
                    self.node_hash.push(0);
                    self.node_count.push(0);
                }
                let j = *s as usize;
                self.node_hash[j] = self.node_hash[j].wrapping_add(tag);
                self.node_count[j] += 1;
            }
        }
    }

    /// Groups by cover hash, then checks that each owner contains each group
    /// entirely or not at all. `None` on a hash collision.
    fn group_hashed(&mut self, windows: &[Vec<VertexId>]) -> Option<Vec<Group>> {
        let mut group_of_key: HashMap<(u64, u32), u32> = HashMap::new();
        let mut group_of_node = Vec::with_capacity(self.nodes.len());
        let mut groups: Vec<Group> = Vec::new();
        for (j, &x) in self.nodes.iter().enumerate() {
            let key = (self.node_hash[j], self.node_count[j]);
            let gid = *group_of_key.entry(key).or_insert_with(|| {
                groups.push(Group::default());
                (groups.len() - 1) as u32
            });
            groups[gid as usize].members.push(x);
            group_of_node.push(gid);
        }
        self.hits.clear();
        self.hits.resize(groups.len(), 0);
        let mut consistent = true;
        for (i, w) in windows.iter().enumerate() {
            for &x in w {
                let gid = group_of_node[self.slot[x as usize] as usize];
                if self.hits[gid as usize] == 0 {
                    self.touched.push(gid);
                }
                self.hits[gid as usize] += 1;
            }
            for gid in self.touched.drain(..) {
                let group = &mut groups[gid as usize];
                consistent &= self.hits[gid as usize] as usize == group.members.len();
                group.owners.push(i as u32);
                self.hits[gid as usize] = 0;
            }
        }
        consistent.then_some(groups)
    }

    /// Groups by explicit covering-owner lists.
    fn group_exact(&self, windows: &[Vec<VertexId>]) -> Vec<Group> {
        let mut covers: Vec<Vec<u32>> = vec![Vec::new(); self.nodes.len()];
        for (i, w) in windows.iter().enumerate() {
            for &x in w {
                covers[self.slot[x as usize] as usize].push(i as u32);
            }
        }
        let mut group_of_cover: HashMap<&[u32], usize> = HashMap::new();
        let mut groups: Vec<Group> = Vec::new();
        for (j, cover) in covers.iter().enumerate() {
            let gid = *group_of_cover.entry(cover.as_slice()).or_insert_with(|| {
                groups.push(Group {
                    members: Vec::new(),
                    owners: cover.clone(),
                });
                groups.len() - 1
            });
            groups[gid].members.push(self.nodes[j]);
        }
        groups
    }
}
