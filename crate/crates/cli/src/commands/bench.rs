use std::time::Instant;

use gwin_core::dbindex::BuildParams;
use gwin_core::graph::{generate_random_dag, generate_random_graph};
use gwin_core::window::evaluate_nonindexed_with_stats;
use gwin_core::{AggregateFunction, AggregateSpec, AttributeTable, Direction, Directedness, Graph, ResultTable, WindowSpec};
use serde::Serialize;

use super::build::{build_index, BuildReport};
use super::query::{evaluate_index, AVG_REL_TOL};
use crate::args::{BenchArgs, StrategyArg};
use crate::error::{CliError, CliResult};
use crate::files::{with_output, AnyIndex};
use crate::synthetic::random_table;

#[derive(Debug, Default, Serialize)]
struct Row {
    graph: &'static str,
    n: usize,
    degree: f64,
    window: String,
    strategy: &'static str,
    status: String,
    build_secs: Option<f64>,
    traversal_secs: Option<f64>,
    signature_secs: Option<f64>,
    index_bytes: Option<usize>,
    index_ratio: Option<f64>,
    query_secs: Option<f64>,
    nonindexed_secs: Option<f64>,
    speedup: Option<f64>,
    query_merge_steps: Option<u64>,
    nonindexed_merge_steps: Option<u64>,
}

struct Baseline {
    result: ResultTable,
    secs: f64,
    merge_steps: u64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn timed_median<T>(reps: usize, mut f: impl FnMut() -> CliResult<T>) -> CliResult<(T, f64)> {
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps {
        let start = Instant::now();
        last = Some(f()?);
        times.push(start.elapsed().as_secs_f64());
    }
    Ok((last.expect("at least one repetition"), median(times)))
}

fn baseline(g: &Graph, attrs: &AttributeTable, w: WindowSpec, a: &AggregateSpec, reps: usize) -> CliResult<Baseline> {
    let ((result, stats), secs) = timed_median(reps, || Ok(evaluate_nonindexed_with_stats(g, attrs, &w, a)?))?;
    Ok(Baseline {
        result,
        secs,
        merge_steps: stats.merge_steps,
    })
}

struct Cell<'a> {
    graph_kind: &'static str,
    g: &'a Graph,
    attrs: &'a AttributeTable,
    degree: f64,
    w: WindowSpec,
}

fn measure(cell: &Cell<'_>, strategy: StrategyArg, params: BuildParams, base: &Baseline, reps: usize) -> CliResult<Row> {
    let a = AggregateSpec::new(AggregateFunction::Sum, "x");
    let (index, report): (AnyIndex, BuildReport) = build_index(cell.g, cell.w, strategy, params)?;
    let ((result, steps), query_secs) = timed_median(reps, || {
        Ok(match &index {
            AnyIndex::Dense(i) => {
                let (r, s) = i.evaluate_with_stats(cell.attrs, &a)?;
                (r, s.merge_steps)
            }
            AnyIndex::Inherit(_) => {
                let r = evaluate_index(&index, cell.g, cell.attrs, &a)?;
                (r, 0)
            }
        })
    })?;
    let steps = match &index {
        AnyIndex::Inherit(i) => i.evaluate_with_stats(cell.g, cell.attrs, &a)?.1.merge_steps,
        AnyIndex::Dense(_) => steps,
    };
    let bad = base.result.mismatches(&result, AVG_REL_TOL);
    if !bad.is_empty() {
        return Err(CliError::Verify(format!(
            "{} on n={} d={} {}: {} vertices differ from the traversal result",
            strategy.name(),
            cell.g.vertex_count(),
            cell.degree,
            cell.w,
            bad.len()
        )));
    }
    Ok(Row {
        graph: cell.graph_kind,
        n: cell.g.vertex_count(),
        degree: cell.degree,
        window: cell.w.to_string(),
        strategy: strategy.name(),
        status: "ok".into(),
        build_secs: Some(report.phases.total_secs),
        traversal_secs: Some(report.phases.traversal_secs),
        signature_secs: Some(report.phases.signature_secs),
        index_bytes: Some(report.index_bytes),
        index_ratio: Some(report.index_ratio),
        query_secs: Some(query_secs),
        nonindexed_secs: Some(base.secs),
        speedup: Some(base.secs / query_secs.max(f64::MIN_POSITIVE)),
        query_merge_steps: Some(steps),
        nonindexed_merge_steps: Some(base.merge_steps),
    })
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    if args.reps == 0 {
        return Err(CliError::usage("--reps must be at least 1"));
    }
    if args.k.contains(&0) {
        return Err(CliError::usage("--k values must be at least 1"));
    }
    let sum = AggregateSpec::new(AggregateFunction::Sum, "x");
    let mut rows = Vec::new();
    for &n in &args.n {
        for &degree in &args.degree {
            let khop: Vec<StrategyArg> =
                args.strategies.iter().copied().filter(|&s| s != StrategyArg::Iindex).collect();
            if !khop.is_empty() {
                let g = generate_random_graph(n, degree, args.seed, Directedness::Undirected)?;
                let attrs = random_table(n, args.seed);
                for &k in &args.k {
                    let w = WindowSpec::khop(k, Direction::Undirected);
                    let base = baseline(&g, &attrs, w, &sum, args.reps)?;
                    let cell = Cell { graph_kind: "er", g: &g, attrs: &attrs, degree, w };
                    for &s in &khop {
                        let params = match s {
                            StrategyArg::Emc => BuildParams::emc(args.k_cluster),
                            _ => BuildParams::mc(),
                        }
                        .with_hashes(args.hashes)
                        .with_seed(args.seed);
                        if s == StrategyArg::Emc && (args.k_cluster == 0 || args.k_cluster >= k) {
                            rows.push(Row {
                                graph: "er",
                                n,
                                degree,
                                window: w.to_string(),
                                strategy: s.name(),
                                status: format!("skipped: emc needs k > k-cluster ({})", args.k_cluster),
                                ..Row::default()
                            });
                            continue;
                        }
                        rows.push(measure(&cell, s, params, &base, args.reps)?);
                    }
                }
            }
            if args.strategies.contains(&StrategyArg::Iindex) {
                let g = generate_random_dag(n, degree, args.seed)?;
                let attrs = random_table(n, args.seed);
                let w = WindowSpec::topological();
                let base = baseline(&g, &attrs, w, &sum, args.reps)?;
                let cell = Cell { graph_kind: "dag", g: &g, attrs: &attrs, degree, w };
                rows.push(measure(&cell, StrategyArg::Iindex, BuildParams::mc(), &base, args.reps)?);
            }
        }
    }
    with_output(args.output.as_deref(), |out| {
        let mut w = csv::Writer::from_writer(out);
        for row in &rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| CliError::Data(e.to_string()))
    })
}
