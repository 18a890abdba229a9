mod common;

use common::{ladder, oracle_k, oracle_t, system, tree};
use descent::{
    check_g0, check_g1, check_g2, check_p2, check_p2_prime, check_p3, compute_k, ExpansionSystem, Issue,
    KOutcome, LayeredDigraph, Status, VertexId, Witness,
};

const CORPUS: [&str; 5] = ["bundle_2_2.exs", "bundle_3_2.exs", "bundle_2_3.exs", "triangle.exs", "tree4.exs"];

fn corpus() -> Vec<(String, ExpansionSystem)> {
    let mut out: Vec<(String, ExpansionSystem)> = CORPUS.iter().map(|n| (n.to_string(), system(n))).collect();
    for m in [2, 3] {
        out.push((format!("tree{m}"), descent::tree_system(m).unwrap()));
        out.push((format!("ladder{m}"), descent::ladder_system(m).unwrap()));
    }
    out
}

fn depth_for(sys: &ExpansionSystem) -> usize {
    // keep the larger systems small enough for exhaustive checks
    if sys.m() >= 4 {
        4
    } else {
        5
    }
}

#[test]
fn g0_examples() {
    assert!(check_g0(&tree(2, 4)).passed());
    assert!(check_g0(&ladder(2, 4)).passed());
    let g = tree(2, 3);
    let (a, b) = (g.root(), g.level(2)[0]);
    let bad = g.with_edge(a, b).unwrap();
    let v = check_g0(&bad);
    assert_eq!(v.status, Status::Fail);
    assert!(matches!(v.witness, Some(Witness::Defect(Issue::NonConsecutiveEdge { from, to })) if from == a && to == b));
}

#[test]
fn g1_fails_on_mixed_cones() {
    // root with one binary-tree child cone and one ladder-like child cone
    let v = |x: u32| VertexId(x);
    let levels = vec![vec![v(0)], vec![v(1), v(2)], vec![v(3), v(4), v(5), v(6)], vec![v(7), v(8), v(9), v(10), v(11), v(12)]];
    let mut edges = vec![(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)];
    edges.extend([(3, 7), (3, 8), (4, 9), (4, 10)]);
    edges.extend([(5, 11), (5, 12), (6, 11), (6, 12)]);
    let g = LayeredDigraph::from_parts(2, levels, edges.into_iter().map(|(a, b)| (v(a), v(b)))).unwrap();
    assert!(check_g0(&g).passed());
    let r = check_g1(&g).unwrap();
    assert_eq!(r.status, Status::Fail);
    let Some(Witness::Cone(u)) = r.witness else { panic!("no cone witness") };
    // the witness really has a cone that differs in shape from the truncation
    let cone = g.cone(u).unwrap();
    let l = g.level_of(u).unwrap();
    assert!(!common::brute_iso(&cone, &g.truncate(g.depth() - l).unwrap()));
}

#[test]
fn g1_holds_on_corpus_and_is_monotone_in_depth() {
    for (name, sys) in corpus() {
        let g = sys.expand(depth_for(&sys)).unwrap();
        for d in 1..=g.depth() {
            assert!(check_g1(&g.truncate(d).unwrap()).unwrap().passed(), "{name} at depth {d}");
        }
    }
}

#[test]
fn declared_k_matches_computed_k() {
    for (name, sys) in corpus() {
        for d in sys.seed().depth() + 1..=depth_for(&sys) {
            let g = sys.expand(d).unwrap();
            let KOutcome::Found(r) = compute_k(&g).unwrap() else { panic!("{name}: k refuted at {d}") };
            assert_eq!(r.k, sys.k(), "{name} at depth {d}");
            assert_eq!(oracle_k(&g), Some(r.k), "{name} at depth {d}");
        }
    }
}

#[test]
fn t_sequence_is_monotone_bounded_and_below_m_under_growth() {
    for (name, sys) in corpus() {
        let g = sys.expand(depth_for(&sys)).unwrap();
        let r = compute_k(&g).unwrap();
        let r = r.report().unwrap();
        assert!(r.t_witness.is_none(), "{name}");
        let oracle: Vec<usize> = oracle_t(&g).into_iter().map(|s| *s.iter().next().unwrap()).collect();
        assert_eq!(r.t_sequence, oracle, "{name}");
        assert!(r.t_sequence.windows(2).all(|w| w[0] <= w[1]), "{name}");
        assert!(r.t_sequence.iter().all(|&t| t <= g.m()), "{name}");
        if check_g2(&g).unwrap().passed() {
            assert!(r.t_sequence.iter().all(|&t| t < g.m()), "{name}");
        }
    }
}

#[test]
fn p2_and_p2_prime_on_corpus() {
    // distinct out-neighbourhoods everywhere
    for name in ["triangle.exs", "tree4.exs"] {
        let g = system(name).expand(4).unwrap();
        assert!(check_p2_prime(&g).unwrap().passed(), "{name}");
        assert_ne!(check_p2(&g).unwrap().status, Status::Fail, "{name}");
    }
    let g = system("triangle.exs").expand(6).unwrap();
    assert_eq!(check_p2(&g).unwrap().status, Status::Pass);
    // a class shares all its out-neighbours
    for name in ["bundle_2_2.exs", "bundle_3_2.exs"] {
        let g = system(name).expand(4).unwrap();
        assert_eq!(check_p2_prime(&g).unwrap().status, Status::Fail, "{name}");
    }
}

#[test]
fn p3_on_corpus() {
    for (name, sys) in corpus() {
        let g = sys.expand(depth_for(&sys)).unwrap();
        let v = check_p3(&g).unwrap();
        assert!(v.passed(), "{name}");
        assert!(v.notes.iter().any(|n| n.contains("truncation-level")));
    }
}

#[test]
fn p3_fails_on_planted_asymmetry() {
    let g = tree(2, 3);
    let leaf = g.level(3)[0];
    let parent = g.in_neighbours(leaf).unwrap()[0];
    let pruned = g.without_edge(parent, leaf).unwrap();
    assert_eq!(check_g0(&pruned).status, Status::Fail);

    // a G0-valid digraph whose level 2 splits into two orbits
    let v = |x: u32| VertexId(x);
    let levels = vec![vec![v(0)], vec![v(1), v(2)], vec![v(3), v(4), v(5)], vec![v(6), v(7), v(8)]];
    let edges = [(0, 1), (0, 2), (1, 3), (1, 4), (2, 4), (2, 5), (3, 6), (3, 7), (4, 7), (4, 8), (5, 8), (5, 6)];
    let g = LayeredDigraph::from_parts(2, levels, edges.map(|(a, b)| (v(a), v(b)))).unwrap();
    assert!(check_g0(&g).passed());
    let r = check_p3(&g).unwrap();
    assert_eq!(r.status, Status::Fail);
    assert!(matches!(r.witness, Some(Witness::Orbits { level: 2, .. })));
}
