//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{ancestors_oracle, social_graph, sample_dag, letters, random_attrs};
use gwin_core::dbindex::{jaccard_profile, BuildParams, DbIndex};
use gwin_core::graph::{generate_random_dag, generate_random_graph, topological_window};
use gwin_core::iindex::{EdgeOp, IIndex};
use gwin_core::window::evaluate_nonindexed_with_stats;
use gwin_core::{
    evaluate_nonindexed, AggregateFunction, AggregateSpec, AggregateValue, AttributeTable,
    Direction, Directedness, Graph, ResultTable, VertexSet, WindowSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative tolerance for averages; every other aggregate must match exactly.
const AVG_REL_TOL: f64 = 1e-9;
/// Required query speedup of the indexed evaluation on ER(100k, 10), k = 2.
const MIN_SPEEDUP: f64 = 10.0;
/// Timed repetitions per measurement; the median is reported.
const REPS: usize = 5;
/// EMC total work may exceed MC's by at most this factor.
const EMC_WORK_FACTOR: u64 = 2;
/// Jaccard medians must be non-decreasing on at least this many of 5 seeds.
const JACCARD_MIN_SEEDS: usize = 4;
const JACCARD_PAIRS: usize = 1000;
/// Replay lengths for the update criteria.
const REPLAY_STEPS: usize = 100;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn same(expected: &ResultTable, actual: &ResultTable, what: &str) -> Result<(), String> {
    let bad = expected.mismatches(actual, AVG_REL_TOL);
    ensure(bad.is_empty(), || {
        format!("{what}: {} mismatches, first at vertex {}", bad.len(), bad[0])
    })
}

fn aggregates() -> Vec<AggregateSpec> {
    AggregateFunction::ALL
        .iter()
        .map(|&f| AggregateSpec::new(f, "x"))
        .collect()
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(f)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

/// The 20 (n, d, seed) ER fixtures shared by criteria 1 and 6.
fn er_fixtures() -> Vec<(usize, f64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    (0..20)
        .map(|i| (rng.gen_range(100..=2000), rng.gen_range(2..=16) as f64, 1000 + i))
        .collect()
}

/// The 20 (n, d, seed) DAG fixtures shared by criteria 2 and 8.
fn dag_fixtures() -> Vec<(usize, f64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_602);
    (0..20)
        .map(|i| (rng.gen_range(100..=2000), rng.gen_range(2..=10) as f64, 2000 + i))
        .collect()
}

fn undirected(k: u32) -> WindowSpec {
    WindowSpec::khop(k, Direction::Undirected)
}

fn oracle_khop() -> Result<String, String> {
    let mut builds = 0;
    for (n, d, seed) in er_fixtures() {
        let g = generate_random_graph(n, d, seed, Directedness::Undirected).map_err(|e| e.to_string())?;
        let attrs = random_attrs(n, seed);
        for k in 1..=3 {
            let w = undirected(k);
            let mut indices = vec![DbIndex::build(&g, w, BuildParams::mc().with_seed(seed)).unwrap().0];
            if k >= 2 {
                indices.push(DbIndex::build(&g, w, BuildParams::emc(1).with_seed(seed)).unwrap().0);
            }
            builds += indices.len();
            for a in aggregates() {
                let expected = evaluate_nonindexed(&g, &attrs, &w, &a).unwrap();
                for idx in &indices {
                    let what = format!("n={n} d={d} k={k} {} {}", idx.params().strategy.name(), a.function.name());
                    same(&expected, &idx.evaluate(&attrs, &a).unwrap(), &what)?;
                }
            }
        }
    }
    Ok(format!("20 graphs, {builds} indices, 5 aggregates each, all equal to the oracle"))
}

fn oracle_topological() -> Result<String, String> {
    let w = WindowSpec::topological();
    for (n, d, seed) in dag_fixtures() {
        let g = generate_random_dag(n, d, seed).unwrap();
        let attrs = random_attrs(n, seed);
        let ii = IIndex::build(&g).unwrap();
        let (db, _) = DbIndex::build(&g, w, BuildParams::mc().with_seed(seed)).unwrap();
        for a in aggregates() {
            let expected = evaluate_nonindexed(&g, &attrs, &w, &a).unwrap();
            let what = format!("n={n} d={d} {}", a.function.name());
            same(&expected, &ii.evaluate(&g, &attrs, &a).unwrap(), &format!("iindex {what}"))?;
            same(&expected, &db.evaluate(&attrs, &a).unwrap(), &format!("dbindex {what}"))?;
        }
    }
    Ok("20 DAGs, I-Index and DBIndex equal to the oracle for all 5 aggregates".into())
}

fn golden() -> Result<String, String> {
    let g = social_graph();
    let w = undirected(1);
    // Any seed: the index is valid and answers like the oracle.
    let attrs = AttributeTable::new(6).with_column("x", vec![4, 8, 15, 16, 23, 42]).unwrap();
    let sum = AggregateSpec::new(AggregateFunction::Sum, "x");
    let expected = evaluate_nonindexed(&g, &attrs, &w, &sum).unwrap();
    for seed in 0..16 {
        let (idx, _) = DbIndex::build(&g, w, BuildParams::mc().with_seed(seed)).unwrap();
        ensure(idx.validate(&g, &w).is_valid(), || format!("seed {seed}: invalid index"))?;
        same(&expected, &idx.evaluate(&attrs, &sum).unwrap(), &format!("seed {seed}"))?;
    }
    // The worked clustering {A,B,C}, {D,E,F}.
    let (idx, _) =
        DbIndex::build_from_clusters(&g, w, BuildParams::mc(), &[vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
    let owners_of = |id: u32| -> VertexSet { (0..6).filter(|&v| idx.links(v).contains(&id)).collect() };
    for (members, owners) in [("ADF", "ABC"), ("B", "AB"), ("CE", "AC")] {
        let found = idx
            .blocks()
            .any(|b| b.members == letters(members).as_slice() && owners_of(b.id) == letters(owners));
        ensure(found, || format!("block {{{members}}} linked from {{{owners}}} missing"))?;
    }
    ensure(idx.block_count() == 7 && idx.dense_block_count() == 3, || {
        format!("{} blocks, {} dense", idx.block_count(), idx.dense_block_count())
    })?;
    let counts = idx.evaluate(&attrs, &AggregateSpec::count()).unwrap();
    ensure(counts.get(0) == AggregateValue::Int(6) && counts.get(1) == AggregateValue::Int(4), || {
        "count at A or B wrong".into()
    })?;

    let dag = sample_dag();
    let id = |c: u8| u32::from(c - b'A');
    ensure(topological_window(&dag, id(b'E')).unwrap() == letters("ABCDE"), || "W_t(E)".into())?;
    ensure(topological_window(&dag, id(b'H')).unwrap() == letters("ABDH"), || "W_t(H)".into())?;
    let ii = IIndex::build(&dag).unwrap();
    let e = ii.entry(id(b'E'));
    ensure(e.pid == Some(id(b'D')) && e.wd == letters("C"), || format!("entry(E) = {e:?}"))?;
    Ok("blocks {A,D,F},{B},{C,E} with the listed links; 7 blocks, 3 dense; W_t(E), W_t(H), entry(E) reproduced".into())
}

fn random_absent_edge(g: &Graph, rng: &mut ChaCha8Rng) -> (u32, u32) {
    let n = g.vertex_count() as u32;
    loop {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && !g.has_edge(u, v) {
            return (u, v);
        }
    }
}

fn invariants() -> Result<String, String> {
    let w = undirected(2);
    let mut g = generate_random_graph(400, 5.0, 44, Directedness::Undirected).unwrap();
    for params in [BuildParams::mc(), BuildParams::emc(1)] {
        let (idx, _) = DbIndex::build(&g, w, params).unwrap();
        let report = idx.validate(&g, &w);
        ensure(report.is_valid(), || format!("fresh {}: {:?}", params.strategy.name(), report.violations))?;
    }
    let (mut idx, _) = DbIndex::build(&g, w, BuildParams::emc(1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(440);
    for step in 0..REPLAY_STEPS {
        let (u, v) = random_absent_edge(&g, &mut rng);
        g = idx.apply_edge_insertion(&g, u, v).unwrap();
        let report = idx.validate(&g, &w);
        ensure(report.is_valid(), || format!("after insertion {step}: {:?}", report.violations))?;
    }

    let mut dag = generate_random_dag(300, 3.0, 45).unwrap();
    let mut ii = IIndex::build(&dag).unwrap();
    let mut applied = 0;
    let mut deletes = 0;
    while applied < REPLAY_STEPS {
        let (s, t, op) = if rng.gen_bool(0.5) {
            let edges: Vec<_> = dag.edges().collect();
            let (s, t) = edges[rng.gen_range(0..edges.len())];
            (s, t, EdgeOp::Delete)
        } else {
            let (s, t) = random_absent_edge(&dag, &mut rng);
            (s, t, EdgeOp::Insert)
        };
        match ii.apply_edge_update(&dag, s, t, op) {
            Ok(next) => dag = next,
            Err(gwin_core::Error::Cycle(_)) => continue,
            Err(e) => return Err(e.to_string()),
        }
        applied += 1;
        deletes += usize::from(op == EdgeOp::Delete);
        for v in 0..300 {
            ensure(ii.materialize_window(v).unwrap() == ancestors_oracle(&dag, v), || {
                format!("window of {v} wrong after update {applied}")
            })?;
        }
    }
    Ok(format!(
        "validate clean after builds and {REPLAY_STEPS} insertions; I-Index windows exact through {REPLAY_STEPS} updates ({deletes} deletions)"
    ))
}

fn speedup() -> Result<String, String> {
    let n = 100_000;
    let g = generate_random_graph(n, 10.0, 5, Directedness::Undirected).unwrap();
    let attrs = random_attrs(n, 5);
    let w = undirected(2);
    let a = AggregateSpec::new(AggregateFunction::Sum, "x");
    let (built, build_time) = timed(|| DbIndex::build(&g, w, BuildParams::emc(1)).unwrap());
    let idx = built.0;
    let mut base = Vec::new();
    let mut indexed = Vec::new();
    for _ in 0..REPS {
        let (expected, t) = timed(|| evaluate_nonindexed(&g, &attrs, &w, &a).unwrap());
        base.push(t.as_secs_f64());
        let (r, t) = timed(|| idx.evaluate(&attrs, &a).unwrap());
        indexed.push(t.as_secs_f64());
        same(&expected, &r, "indexed result")?;
    }
    let (base, indexed) = (median(base), median(indexed));
    let ratio = base / indexed;
    let detail = format!(
        "non-indexed {:.1} ms, indexed {:.1} ms, speedup {ratio:.1}x (need {MIN_SPEEDUP}x); build {:.2} s, work {} vs window mass {}",
        base * 1e3,
        indexed * 1e3,
        build_time.as_secs_f64(),
        idx.total_work(),
        built.1.total_window_mass,
    );
    ensure(ratio >= MIN_SPEEDUP, || detail.clone())?;
    Ok(detail)
}

fn worst_work_ratio(hashes: usize) -> (f64, Vec<String>) {
    let mut worst: f64 = 0.0;
    let mut over = Vec::new();
    for (n, d, seed) in er_fixtures() {
        let g = generate_random_graph(n, d, seed, Directedness::Undirected).unwrap();
        for k in 2..=3 {
            let w = undirected(k);
            let build = |p: BuildParams| DbIndex::build(&g, w, p.with_seed(seed).with_hashes(hashes)).unwrap().0;
            let mc = build(BuildParams::mc()).total_work();
            let emc = build(BuildParams::emc(1)).total_work();
            worst = worst.max(emc as f64 / mc as f64);
            if emc > EMC_WORK_FACTOR * mc {
                over.push(format!("n={n} d={d} k={k} emc {emc} vs mc {mc}"));
            }
        }
    }
    (worst, over)
}

fn emc_marginal() -> Result<String, String> {
    let default_hashes = BuildParams::mc().hashes;
    let (worst, over) = worst_work_ratio(default_hashes);
    let (worst_one, _) = worst_work_ratio(1);

    let g = generate_random_graph(100_000, 10.0, 6, Directedness::Undirected).unwrap();
    let w = undirected(3);
    let mut mc_time = f64::INFINITY;
    let mut emc_time = f64::INFINITY;
    for _ in 0..2 {
        let (_, t) = timed(|| DbIndex::build(&g, w, BuildParams::mc()).unwrap());
        mc_time = mc_time.min(t.as_secs_f64());
        let (_, t) = timed(|| DbIndex::build(&g, w, BuildParams::emc(1)).unwrap());
        emc_time = emc_time.min(t.as_secs_f64());
    }
    let mut detail = format!(
        "worst emc/mc work ratio {worst:.3} at {default_hashes} hashes ({worst_one:.3} at 1 hash); \
         build on ER(100k,10), k=3: mc {mc_time:.2} s, emc {emc_time:.2} s"
    );
    if !over.is_empty() {
        detail = format!("{detail}; over {EMC_WORK_FACTOR}x: {}", over.join(", "));
    }
    ensure(over.is_empty() && emc_time < mc_time, || detail.clone())?;
    Ok(detail)
}

fn jaccard_trend() -> Result<String, String> {
    let mut good = 0;
    let mut rows = Vec::new();
    for seed in 1..=5 {
        let g = generate_random_graph(5000, 10.0, seed, Directedness::Undirected).unwrap();
        let p = jaccard_profile(&g, 3, JACCARD_PAIRS, seed).unwrap();
        let m: Vec<f64> = (1..=3).map(|k| p.median(k).unwrap()).collect();
        if m[1] >= m[0] && m[2] >= m[1] {
            good += 1;
        }
        rows.push(format!("[{:.3} {:.3} {:.3}]", m[0], m[1], m[2]));
    }
    let detail = format!("{good}/5 seeds non-decreasing, medians k=1..3: {}", rows.join(" "));
    ensure(good >= JACCARD_MIN_SEEDS, || detail.clone())?;
    Ok(detail)
}

fn work_ordering() -> Result<String, String> {
    let w = WindowSpec::topological();
    let mut totals = [0u64; 3];
    for (n, d, seed) in dag_fixtures() {
        let g = generate_random_dag(n, d, seed).unwrap();
        let attrs = random_attrs(n, seed);
        let a = AggregateSpec::new(AggregateFunction::Sum, "x");
        let (_, none) = evaluate_nonindexed_with_stats(&g, &attrs, &w, &a).unwrap();
        let (db, _) = DbIndex::build(&g, w, BuildParams::mc().with_seed(seed)).unwrap();
        let (_, dbs) = db.evaluate_with_stats(&attrs, &a).unwrap();
        let (_, iis) = IIndex::build(&g).unwrap().evaluate_with_stats(&g, &attrs, &a).unwrap();
        let counts = [iis.merge_steps, dbs.merge_steps, none.merge_steps];
        ensure(counts[0] <= counts[1] && counts[1] <= counts[2], || {
            format!("n={n} d={d}: iindex {} dbindex {} nonindexed {}", counts[0], counts[1], counts[2])
        })?;
        for (t, c) in totals.iter_mut().zip(counts) {
            *t += c;
        }
    }
    Ok(format!(
        "iindex <= dbindex <= nonindexed on all 20 DAGs (totals {} <= {} <= {})",
        totals[0], totals[1], totals[2]
    ))
}

fn determinism() -> Result<String, String> {
    let g = generate_random_graph(3000, 8.0, 9, Directedness::Undirected).unwrap();
    let dag = generate_random_dag(1500, 4.0, 9).unwrap();
    let attrs = random_attrs(3000, 9);
    let w = undirected(2);
    for params in [BuildParams::mc().with_seed(3), BuildParams::emc(1).with_seed(3)] {
        let a = single_thread(|| DbIndex::build(&g, w, params).unwrap().0.to_bytes());
        let b = single_thread(|| DbIndex::build(&g, w, params).unwrap().0.to_bytes());
        ensure(a == b, || format!("{} single-threaded builds differ", params.strategy.name()))?;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let multi = pool.install(|| DbIndex::build(&g, w, params).unwrap().0);
        let single = DbIndex::from_bytes(&a).unwrap();
        for spec in aggregates() {
            same(
                &single.evaluate(&attrs, &spec).unwrap(),
                &multi.evaluate(&attrs, &spec).unwrap(),
                "multi-threaded build",
            )?;
        }
    }
    let a = single_thread(|| IIndex::build(&dag).unwrap().to_bytes());
    let b = single_thread(|| IIndex::build(&dag).unwrap().to_bytes());
    ensure(a == b, || "I-Index builds differ".into())?;
    Ok("byte-identical single-threaded indices (mc, emc, iindex); 4-thread builds query-equivalent".into())
}

fn memory_contract() -> Result<String, String> {
    let g = generate_random_graph(50_000, 10.0, 10, Directedness::Undirected).unwrap();
    let (_, stats) = single_thread(|| DbIndex::build(&g, undirected(2), BuildParams::mc()).unwrap());
    let bound = stats.max_cluster_window_mass + stats.frontier_mass;
    let detail = format!(
        "peak {} entries <= cluster mass {} + frontier {} (all windows together: {})",
        stats.peak_resident_window_entries,
        stats.max_cluster_window_mass,
        stats.frontier_mass,
        stats.total_window_mass
    );
    ensure(stats.peak_resident_window_entries <= bound, || detail.clone())?;
    Ok(detail)
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("oracle equivalence, k-hop", oracle_khop),
        ("oracle equivalence, topological", oracle_topological),
        ("golden running example", golden),
        ("structural invariants under updates", invariants),
        ("query speedup on ER(100k, 10), k=2", speedup),
        ("EMC quality and build time", emc_marginal),
        ("Jaccard trend over hops", jaccard_trend),
        ("work-sharing ordering on DAGs", work_ordering),
        ("determinism", determinism),
        ("memory contract", memory_contract),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !wanted.is_empty() && !wanted.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {number:>2} PASS  {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {number:>2} FAIL  {name} ({secs:.1} s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
