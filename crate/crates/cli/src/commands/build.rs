use gwin_core::dbindex::{BuildParams, BuildStats, DbIndex};
use gwin_core::iindex::IIndex;
use gwin_core::{Graph, WindowSpec};
use serde::Serialize;

use crate::args::{BuildArgs, BuildParamArgs, StrategyArg};
use crate::error::{CliError, CliResult};
use crate::files::{load_graph, write_bytes, write_json, AnyIndex};

/// Build phase times. Worker threads accumulate phase times independently,
/// so when they sum past the wall-clock total they are scaled down to it.
#[derive(Debug, Clone, Serialize)]
pub struct Phases {
    pub total_secs: f64,
    pub traversal_secs: f64,
    pub signature_secs: f64,
    pub identify_secs: f64,
    pub commit_secs: f64,
    pub scaled: bool,
}

impl Phases {
    pub fn from_stats(s: &BuildStats) -> Self {
        let parts = [s.traversal_secs, s.signature_secs, s.identify_secs, s.commit_secs];
        let sum: f64 = parts.iter().sum();
        let factor = if sum > s.total_secs && sum > 0.0 {
            s.total_secs / sum
        } else {
            1.0
        };
        Phases {
            total_secs: s.total_secs,
            traversal_secs: parts[0] * factor,
            signature_secs: parts[1] * factor,
            identify_secs: parts[2] * factor,
            commit_secs: parts[3] * factor,
            scaled: factor < 1.0,
        }
    }

    fn total_only(total_secs: f64) -> Self {
        Phases {
            total_secs,
            traversal_secs: 0.0,
            signature_secs: 0.0,
            identify_secs: 0.0,
            commit_secs: 0.0,
            scaled: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildReport {
    pub strategy: &'static str,
    pub window: String,
    pub vertices: usize,
    pub edges: usize,
    pub phases: Phases,
    pub index_bytes: usize,
    pub graph_bytes: usize,
    /// Index bytes over graph bytes.
    pub index_ratio: f64,
    pub peak_resident_window_entries: usize,
    pub total_window_mass: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense: Option<DenseSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wd_entries: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DenseSummary {
    pub blocks: usize,
    pub dense_blocks: usize,
    pub links: usize,
    /// Block members plus links.
    pub total_work: u64,
    pub clusters: usize,
    pub max_cluster_owners: usize,
}

impl DenseSummary {
    pub fn of(idx: &DbIndex, clusters: usize, max_cluster_owners: usize) -> Self {
        DenseSummary {
            blocks: idx.block_count(),
            dense_blocks: idx.dense_block_count(),
            links: idx.link_count(),
            total_work: idx.total_work(),
            clusters,
            max_cluster_owners,
        }
    }
}

pub fn params(strategy: StrategyArg, a: &BuildParamArgs) -> BuildParams {
    let base = match strategy {
        StrategyArg::Emc => BuildParams::emc(a.k_cluster),
        _ => BuildParams::mc(),
    };
    BuildParams {
        max_cluster: a.max_cluster,
        max_rounds: a.max_rounds,
        reorganize_threshold: a.reorganize_threshold,
        ..base.with_hashes(a.hashes).with_seed(a.seed)
    }
}

/// Checks the strategy against the window before any work is done.
pub fn check_strategy(strategy: StrategyArg, window: Option<WindowSpec>, k_cluster: u32) -> CliResult<WindowSpec> {
    match (strategy, window) {
        (StrategyArg::Iindex, None | Some(WindowSpec::Topological)) => Ok(WindowSpec::topological()),
        (StrategyArg::Iindex, Some(_)) => Err(CliError::usage("iindex needs --window topological")),
        (_, None) => Err(CliError::usage("mc and emc need --window")),
        (StrategyArg::Emc, Some(WindowSpec::Topological)) => {
            Err(CliError::usage("emc needs --window khop"))
        }
        (StrategyArg::Emc, Some(WindowSpec::Khop { k, .. })) if k < 2 || k_cluster == 0 || k_cluster >= k => {
            Err(CliError::usage(format!(
                "emc needs k >= 2 and 1 <= --k-cluster < k (got k={k}, k-cluster={k_cluster})"
            )))
        }
        (_, Some(w)) => Ok(w),
    }
}

pub fn build_index(g: &Graph, w: WindowSpec, strategy: StrategyArg, p: BuildParams) -> CliResult<(AnyIndex, BuildReport)> {
    let (index, phases, peak, mass, dense, wd) = match strategy {
        StrategyArg::Iindex => {
            let (idx, s) = IIndex::build_with_stats(g)?;
            let wd = idx.wd_entries();
            let peak = s.peak_resident_window_entries;
            (AnyIndex::Inherit(idx), Phases::total_only(s.total_secs), peak, s.total_window_mass, None, Some(wd))
        }
        _ => {
            let (idx, s) = DbIndex::build(g, w, p)?;
            let dense = DenseSummary::of(&idx, s.clusters, s.max_cluster_owners);
            (
                AnyIndex::Dense(idx),
                Phases::from_stats(&s),
                s.peak_resident_window_entries,
                s.total_window_mass as u64,
                Some(dense),
                None,
            )
        }
    };
    let index_bytes = match &index {
        AnyIndex::Dense(i) => i.encoded_len(),
        AnyIndex::Inherit(i) => i.encoded_len(),
    };
    let graph_bytes = g.encoded_len();
    let report = BuildReport {
        strategy: strategy.name(),
        window: w.to_string(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        phases,
        index_bytes,
        graph_bytes,
        index_ratio: index_bytes as f64 / graph_bytes.max(1) as f64,
        peak_resident_window_entries: peak,
        total_window_mass: mass,
        dense,
        wd_entries: wd,
    };
    Ok((index, report))
}

pub fn run(args: &BuildArgs) -> CliResult<()> {
    let g = load_graph(&args.graph)?;
    let w = check_strategy(args.strategy, args.window.resolve(&g)?, args.params.k_cluster)?;
    let p = params(args.strategy, &args.params);
    let (index, report) = build_index(&g, w, args.strategy, p)?;
    write_bytes(&args.output, &index.to_bytes())?;
    if let Some(path) = &args.json_dump {
        let text = match &index {
            AnyIndex::Dense(i) => i.to_json()?,
            AnyIndex::Inherit(i) => i.to_json()?,
        };
        write_bytes(path, text.as_bytes())?;
    }
    write_json(args.report.as_deref(), &report)
}
