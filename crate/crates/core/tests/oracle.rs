mod common;

use common::{ancestors_oracle, khop_oracle, random_attrs};
use gwin_core::dbindex::{build_emc, build_mc, BuildParams, DbIndex};
use gwin_core::graph::{generate_random_dag, generate_random_graph, khop_window};
use gwin_core::iindex::{EdgeOp, IIndex};
use gwin_core::{
    evaluate_nonindexed, AggregateFunction, AggregateSpec, AttributeTable, Direction, Directedness,
    Graph, ResultTable, VertexSet, WindowSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REL_TOL: f64 = 1e-9;

fn assert_same(expected: &ResultTable, actual: &ResultTable, what: &str) {
    let bad = expected.mismatches(actual, REL_TOL);
    assert!(bad.is_empty(), "{what}: {} mismatches, first at {}", bad.len(), bad[0]);
}

fn all_aggregates() -> Vec<AggregateSpec> {
    AggregateFunction::ALL
        .iter()
        .map(|&f| AggregateSpec::new(f, "x"))
        .collect()
}

#[test]
fn khop_traversal_matches_distance_oracle() {
    let und = generate_random_graph(150, 4.0, 1, Directedness::Undirected).unwrap();
    let dir = generate_random_graph(150, 3.0, 2, Directedness::Directed).unwrap();
    for v in (0..150).step_by(7) {
        for k in 1..=3 {
            assert_eq!(
                khop_window(&und, v, k, Direction::Undirected).unwrap(),
                khop_oracle(&und, v, k, false)
            );
            assert_eq!(khop_window(&dir, v, k, Direction::Out).unwrap(), khop_oracle(&dir, v, k, false));
            assert_eq!(khop_window(&dir, v, k, Direction::In).unwrap(), khop_oracle(&dir, v, k, true));
        }
    }
}

#[test]
fn directed_windows_both_orientations() {
    let g = generate_random_graph(600, 5.0, 3, Directedness::Directed).unwrap();
    let attrs = random_attrs(600, 3);
    for direction in [Direction::Out, Direction::In] {
        for k in 1..=3 {
            let w = WindowSpec::khop(k, direction);
            let mc = build_mc(&g, w, BuildParams::mc()).unwrap();
            assert!(mc.validate(&g, &w).is_valid());
            let emc = (k >= 2).then(|| build_emc(&g, w, 1, BuildParams::mc()).unwrap());
            for a in all_aggregates() {
                let expected = evaluate_nonindexed(&g, &attrs, &w, &a).unwrap();
                assert_same(&expected, &mc.evaluate(&attrs, &a).unwrap(), "mc");
                if let Some(emc) = &emc {
                    assert_same(&expected, &emc.evaluate(&attrs, &a).unwrap(), "emc");
                }
            }
        }
    }
}

#[test]
fn mc_and_emc_on_er_2000() {
    let g = generate_random_graph(2000, 8.0, 11, Directedness::Undirected).unwrap();
    let attrs = random_attrs(2000, 11);
    let w = WindowSpec::khop(2, Direction::Undirected);
    let mc = build_mc(&g, w, BuildParams::mc()).unwrap();
    let emc = build_emc(&g, w, 1, BuildParams::mc()).unwrap();
    assert!(mc.validate(&g, &w).is_valid());
    assert!(emc.validate(&g, &w).is_valid());
    let a = AggregateSpec::new(AggregateFunction::Sum, "x");
    let expected = evaluate_nonindexed(&g, &attrs, &w, &a).unwrap();
    assert_eq!(mc.evaluate(&attrs, &a).unwrap(), expected);
    assert_eq!(emc.evaluate(&attrs, &a).unwrap(), expected);
    assert!(emc.total_work() <= 2 * mc.total_work());
}

#[test]
fn one_index_serves_every_aggregate() {
    let g = generate_random_graph(800, 6.0, 5, Directedness::Undirected).unwrap();
    let attrs = random_attrs(800, 5);
    let w = WindowSpec::khop(2, Direction::Undirected);
    let idx = build_emc(&g, w, 1, BuildParams::mc().with_hashes(1)).unwrap();
    for (f, col) in [(AggregateFunction::Sum, "x"), (AggregateFunction::Min, "y"), (AggregateFunction::Avg, "y")] {
        let a = AggregateSpec::new(f, col);
        assert_same(
            &evaluate_nonindexed(&g, &attrs, &w, &a).unwrap(),
            &idx.evaluate(&attrs, &a).unwrap(),
            f.name(),
        );
    }
    let zeros = AttributeTable::new(800).with_column("x", vec![0; 800]).unwrap();
    let sums = idx.evaluate(&zeros, &AggregateSpec::new(AggregateFunction::Sum, "x")).unwrap();
    assert!(sums.values().iter().all(|v| *v == gwin_core::AggregateValue::Int(0)));
}

#[test]
fn topological_dbindex_matches_oracle() {
    let g = generate_random_dag(700, 3.0, 6).unwrap();
    let attrs = random_attrs(700, 6);
    let w = WindowSpec::topological();
    let idx = build_mc(&g, w, BuildParams::mc()).unwrap();
    assert!(idx.validate(&g, &w).is_valid());
    for a in all_aggregates() {
        assert_same(&evaluate_nonindexed(&g, &attrs, &w, &a).unwrap(), &idx.evaluate(&attrs, &a).unwrap(), "dag");
    }
}

#[test]
fn identify_dense_blocks_directly() {
    let (g, _) = Graph::from_edges(Directedness::Undirected, 4, []).unwrap();
    let w = WindowSpec::khop(1, Direction::Undirected);
    let mut idx = DbIndex::empty(&g, w, BuildParams::mc());
    idx.identify_dense_blocks(
        &VertexSet::from_unsorted(vec![0, 1]),
        vec![VertexSet::from_unsorted(vec![2, 3]), VertexSet::from_unsorted(vec![2, 3])],
        0,
    )
    .unwrap();
    assert_eq!(idx.block_count(), 1);
    assert_eq!(idx.block(0).members, &[2, 3]);
    assert_eq!((idx.links(0), idx.links(1)), (&[0][..], &[0][..]));
    assert!(idx
        .identify_dense_blocks(&VertexSet::from_unsorted(vec![9]), vec![VertexSet::new()], 0)
        .is_err());
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

#[test]
fn insertion_replay_matches_oracle() {
    let mut g = generate_random_graph(500, 6.0, 7, Directedness::Undirected).unwrap();
    let attrs = random_attrs(500, 7);
    let w = WindowSpec::khop(2, Direction::Undirected);
    let a = AggregateSpec::new(AggregateFunction::Sum, "x");
    let (mut idx, _) = DbIndex::build(&g, w, BuildParams::emc(1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    for _ in 0..50 {
        let (u, v) = random_absent_edge(&g, &mut rng);
        g = idx.apply_edge_insertion(&g, u, v).unwrap();
        assert_eq!(idx.evaluate(&attrs, &a).unwrap(), evaluate_nonindexed(&g, &attrs, &w, &a).unwrap());
    }
    assert!(idx.validate(&g, &w).is_valid());
    assert_eq!(idx.update_log().insertions, 50);

    let (fresh, _) = idx.reorganize(&g).unwrap();
    assert!(fresh.validate(&g, &w).is_valid());
    assert_eq!(fresh.update_log().insertions, 0);
    assert_eq!(fresh.evaluate(&attrs, &a).unwrap(), evaluate_nonindexed(&g, &attrs, &w, &a).unwrap());
    assert!(fresh.total_work() <= idx.total_work());
}

#[test]
fn reorganize_without_updates_is_equivalent() {
    let g = generate_random_graph(300, 4.0, 8, Directedness::Undirected).unwrap();
    let attrs = random_attrs(300, 8);
    let w = WindowSpec::khop(2, Direction::Undirected);
    let (idx, _) = DbIndex::build(&g, w, BuildParams::mc()).unwrap();
    let (again, _) = idx.reorganize(&g).unwrap();
    let a = AggregateSpec::new(AggregateFunction::Max, "x");
    assert_eq!(idx.evaluate(&attrs, &a).unwrap(), again.evaluate(&attrs, &a).unwrap());
    assert_eq!(idx, again);
}

#[test]
fn insertion_reuses_existing_blocks() {
    // Path 0-1-2 plus isolated 3 under 1-hop windows. Adding 2-3 gives 2
    // the addition {3} and 3 the addition {2}; both sets may already exist.
    let (g, _) = Graph::from_edges(Directedness::Undirected, 4, [(0, 1), (1, 2)]).unwrap();
    let w = WindowSpec::khop(1, Direction::Undirected);
    let (mut idx, _) =
        DbIndex::build_from_clusters(&g, w, BuildParams::mc(), &[vec![0], vec![1], vec![2], vec![3]]).unwrap();
    let before: Vec<Vec<u32>> = idx.blocks().map(|b| b.members.to_vec()).collect();
    let g2 = idx.apply_edge_insertion(&g, 2, 3).unwrap();
    assert!(idx.validate(&g2, &w).is_valid());
    let after: Vec<Vec<u32>> = idx.blocks().map(|b| b.members.to_vec()).collect();
    assert_eq!(&after[..before.len()], &before[..]);
    // {3} is vertex 3's own window block; {2} is new.
    assert_eq!(after.len(), before.len() + 1);
    assert!(idx.links(2).contains(&(before.iter().position(|b| b == &[3]).unwrap() as u32)));
}

#[test]
fn iindex_replay_matches_ancestors() {
    let mut g = generate_random_dag(500, 5.0, 9).unwrap();
    let mut idx = IIndex::build(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    let attrs = random_attrs(500, 9);
    let a = AggregateSpec::new(AggregateFunction::Sum, "x");
    let mut applied = 0;
    while applied < 50 {
        let delete = rng.gen_bool(0.5);
        let (s, t, op) = if delete {
            let edges: Vec<_> = g.edges().collect();
            let (s, t) = edges[rng.gen_range(0..edges.len())];
            (s, t, EdgeOp::Delete)
        } else {
            let (s, t) = random_absent_edge(&g, &mut rng);
            (s, t, EdgeOp::Insert)
        };
        match idx.apply_edge_update(&g, s, t, op) {
            Ok(g2) => g = g2,
            Err(gwin_core::Error::Cycle(_)) => continue,
            Err(e) => panic!("{e}"),
        }
        applied += 1;
        for v in 0..500 {
            assert_eq!(idx.materialize_window(v).unwrap(), ancestors_oracle(&g, v));
        }
        assert_eq!(idx, IIndex::build(&g).unwrap());
        assert_same(
            &evaluate_nonindexed(&g, &attrs, &WindowSpec::topological(), &a).unwrap(),
            &idx.evaluate(&g, &attrs, &a).unwrap(),
            "iindex",
        );
    }
}

#[test]
fn iindex_containment_and_forest() {
    let g = generate_random_dag(400, 4.0, 10).unwrap();
    let idx = IIndex::build(&g).unwrap();
    for v in 0..400u32 {
        let wv = ancestors_oracle(&g, v);
        for u in wv.iter().filter(|&u| u != v) {
            let wu = ancestors_oracle(&g, u);
            assert!(wu.is_subset(&wv) && wu.len() < wv.len());
        }
        let mut steps = 0;
        let mut cur = idx.entry(v).pid;
        while let Some(p) = cur {
            steps += 1;
            assert!(steps <= 400);
            cur = idx.entry(p).pid;
        }
    }
}
