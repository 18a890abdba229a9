//! Property-based invariants over the built-in and data-file systems.

mod common;

use std::collections::BTreeSet;

use common::{shuffled, system};
use descent::{
    canonical_form, compute_k, ladder_system, parse_ldg, rho_partition, sigma_partition, tree_system, write_ldg,
    ExpansionSystem, FgObject, IsoConstraints, LayeredDigraph, VertexId,
};
use proptest::prelude::*;
use proptest::sample::select;

fn corpus(i: usize) -> ExpansionSystem {
    match i {
        0 => tree_system(2).unwrap(),
        1 => tree_system(3).unwrap(),
        2 => ladder_system(2).unwrap(),
        3 => ladder_system(3).unwrap(),
        4 => system("bundle_2_2.exs"),
        5 => system("bundle_3_2.exs"),
        _ => system("triangle.exs"),
    }
}

/// A corpus graph small enough for quadratic checks.
fn small(i: usize, extra: usize) -> LayeredDigraph {
    let sys = corpus(i);
    let d = sys.seed().depth() + extra;
    sys.expand(if i == 1 || i == 6 { d.min(sys.seed().depth() + 2) } else { d }).unwrap()
}

fn pick(g: &LayeredDigraph, r: usize) -> VertexId {
    let ids: Vec<VertexId> = g.vertices().collect();
    ids[r % ids.len()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expansion_is_deterministic_and_prefix_stable(i in 0..7usize, a in 0..3usize, b in 0..3usize) {
        let sys = corpus(i);
        let s = sys.seed().depth();
        let (lo, hi) = (s + a.min(b), s + a.max(b));
        let deep = sys.expand(hi).unwrap();
        prop_assert_eq!(&deep, &sys.expand(hi).unwrap());
        prop_assert_eq!(sys.expand(lo).unwrap(), deep.truncate(lo).unwrap());
    }

    #[test]
    fn ancestors_and_descendants_are_dual(i in 0..7usize, extra in 1..3usize, r1 in any::<usize>(), r2 in any::<usize>()) {
        let g = small(i, extra);
        let (u, v) = (pick(&g, r1), pick(&g, r2));
        let (lu, lv) = (g.level_of(u).unwrap(), g.level_of(v).unwrap());
        let below = g.descendants(u, None).unwrap().contains(&v);
        let above = lv >= lu && g.ancestors_at(v, lv - lu).unwrap().contains(&u);
        prop_assert_eq!(below, above);
    }

    #[test]
    fn cones_compose(i in 0..7usize, extra in 1..3usize, r1 in any::<usize>(), r2 in any::<usize>()) {
        let g = small(i, extra);
        let v = pick(&g, r1);
        let c = g.cone(v).unwrap();
        let w = pick(&c, r2);
        prop_assert_eq!(c.descendants(w, None).unwrap(), g.descendants(w, None).unwrap());
        prop_assert_eq!(c.cone(w).unwrap(), g.cone(w).unwrap());
    }

    #[test]
    fn canonical_form_ignores_names(i in 0..7usize, extra in 0..2usize, seed in any::<u64>()) {
        let g = small(i, extra);
        let c = IsoConstraints::rooted();
        let f = canonical_form(&g, &c).unwrap();
        prop_assert_eq!(&f, &canonical_form(&shuffled(&g, seed), &c).unwrap());
        prop_assert_eq!(&f, &canonical_form(&parse_ldg(&f).unwrap(), &c).unwrap());
    }

    #[test]
    fn ldg_round_trips(i in 0..7usize, extra in 0..2usize, seed in any::<u64>()) {
        let g = shuffled(&small(i, extra), seed);
        prop_assert_eq!(parse_ldg(&write_ldg(&g)).unwrap(), g);
    }

    #[test]
    fn k_ignores_names(i in 0..7usize, seed in any::<u64>()) {
        let g = small(i, 3);
        prop_assert_eq!(compute_k(&g).unwrap().k(), compute_k(&shuffled(&g, seed)).unwrap().k());
    }

    #[test]
    fn sigma_refines_rho(i in 0..7usize, extra in 2..4usize) {
        let g = small(i, extra);
        let Some(k) = compute_k(&g).unwrap().k() else { return Ok(()) };
        for level in k..g.depth() {
            let rho = rho_partition(&g, k, level).unwrap();
            for class in sigma_partition(&g, level, g.depth()).unwrap().classes {
                let owners: BTreeSet<usize> = class.iter().map(|v| rho.class_of[v]).collect();
                prop_assert_eq!(owners.len(), 1, "σ-class {:?} spans ρ-classes", class);
            }
        }
    }

    #[test]
    fn plus_closure_is_a_closure(m in select(vec![2usize, 3]), depth in 2..4usize, picks in prop::collection::vec(any::<usize>(), 1..4)) {
        let sys = tree_system(m).unwrap();
        let f = FgObject::from_gamma(&sys, depth).unwrap();
        let ids: Vec<VertexId> = f.vertices().collect();
        let set: BTreeSet<VertexId> = picks.iter().map(|r| ids[r % ids.len()]).collect();
        let c = f.plus_closure(set.iter().copied());
        prop_assert!(set.is_subset(&c));
        prop_assert_eq!(f.plus_closure(c.iter().copied()), c.clone());
        prop_assert!(descent::check_subplus(&f, &c).passed());
    }
}
