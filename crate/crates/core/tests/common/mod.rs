//! Builders and brute-force oracles shared by the integration tests. The
//! oracles use only the public graph API and exhaustive enumeration.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use descent::{
    ladder_system, parse_exs, tree_system, ExpansionSystem, LayeredDigraph, TStructure, VertexId,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn tree(m: usize, d: usize) -> LayeredDigraph {
    tree_system(m).unwrap().expand(d).unwrap()
}

pub fn ladder(m: usize, d: usize) -> LayeredDigraph {
    let sys = ladder_system(m).unwrap();
    let g = sys.expand(d.max(3)).unwrap();
    g.truncate(d).unwrap()
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn system(name: &str) -> ExpansionSystem {
    parse_exs(&std::fs::read_to_string(data_path(name)).unwrap()).unwrap()
}

/// The same digraph with its ids permuted by a seeded shuffle.
pub fn shuffled(g: &LayeredDigraph, seed: u64) -> LayeredDigraph {
    let ids: Vec<VertexId> = g.vertices().collect();
    let mut perm = ids.clone();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let rename: BTreeMap<VertexId, VertexId> = ids.into_iter().zip(perm).collect();
    g.relabeled(&rename).unwrap()
}

/// Sizes of anc(x) ∩ L_1 per level, from the public ancestor query.
pub fn oracle_t(g: &LayeredDigraph) -> Vec<BTreeSet<usize>> {
    (1..=g.depth())
        .map(|l| {
            g.level(l)
                .iter()
                .map(|&x| g.ancestors_at(x, l - 1).unwrap().len())
                .collect()
        })
        .collect()
}

/// k from the definition: least ℓ₀ with anc ∩ L_1 constant along every edge
/// leaving levels ℓ₀..D−1.
pub fn oracle_k(g: &LayeredDigraph) -> Option<usize> {
    let d = g.depth();
    let a1 = |x: VertexId| {
        let l = g.level_of(x).unwrap();
        g.ancestors_at(x, l - 1).unwrap()
    };
    (1..d).find(|&l0| {
        (l0..d).all(|l| {
            g.level(l)
                .iter()
                .all(|&x| g.out_neighbours(x).unwrap().into_iter().all(|z| a1(z) == a1(x)))
        })
    })
}

fn permutations(items: &[VertexId]) -> Vec<Vec<VertexId>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Every level-preserving bijection between two vertex lists grouped by
/// level, as maps. Only for tiny inputs.
pub fn level_bijections(a: &[Vec<VertexId>], b: &[Vec<VertexId>]) -> Vec<BTreeMap<VertexId, VertexId>> {
    let mut out = vec![BTreeMap::new()];
    for (la, lb) in a.iter().zip(b) {
        if la.len() != lb.len() {
            return Vec::new();
        }
        let perms = permutations(lb);
        let mut next = Vec::new();
        for m in &out {
            for p in &perms {
                let mut m2 = m.clone();
                m2.extend(la.iter().copied().zip(p.iter().copied()));
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

fn edges_of(g: &LayeredDigraph, vs: &BTreeSet<VertexId>) -> BTreeSet<(VertexId, VertexId)> {
    vs.iter()
        .flat_map(|&x| g.out_neighbours(x).unwrap().into_iter().map(move |y| (x, y)))
        .filter(|(_, y)| vs.contains(y))
        .collect()
}

/// Whether the truncations are isomorphic, by exhaustive search.
pub fn brute_iso(g: &LayeredDigraph, h: &LayeredDigraph) -> bool {
    if g.level_sizes() != h.level_sizes() {
        return false;
    }
    let vg: BTreeSet<VertexId> = g.vertices().collect();
    let vh: BTreeSet<VertexId> = h.vertices().collect();
    let eg = edges_of(g, &vg);
    let eh = edges_of(h, &vh);
    level_bijections(g.levels(), h.levels())
        .into_iter()
        .any(|m| eg.iter().map(|(x, y)| (m[x], m[y])).collect::<BTreeSet<_>>() == eh)
}

/// A_d by exhaustive enumeration of level-preserving permutations of the
/// ball that keep edges, ρ (recomputed from ancestors), colours and every base
/// class.
pub fn brute_group(t: &TStructure, d: usize) -> BTreeSet<Vec<usize>> {
    let g = t.graph();
    let mut levels: Vec<Vec<VertexId>> = Vec::new();
    let mut colour: BTreeMap<VertexId, usize> = BTreeMap::new();
    for r in 0..=d {
        let mut lv = Vec::new();
        for c in t.classes_at(r) {
            for v in c.members {
                colour.insert(v, c.colour);
                lv.push(v);
            }
        }
        lv.sort();
        levels.push(lv);
    }
    let ball: BTreeSet<VertexId> = levels.iter().flatten().copied().collect();
    let edges = edges_of(g, &ball);
    let key = |x: VertexId| g.ancestors_at(x, t.k() - 1).unwrap();
    let base = t.base();
    let base_class: BTreeMap<VertexId, usize> = t
        .base_classes()
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.members.iter().map(move |&v| (v, i)))
        .collect();
    let mut out = BTreeSet::new();
    'maps: for m in level_bijections(&levels, &levels) {
        if edges.iter().map(|(x, y)| (m[x], m[y])).collect::<BTreeSet<_>>() != edges {
            continue;
        }
        for &x in &ball {
            if colour[&x] != colour[&m[&x]] {
                continue 'maps;
            }
        }
        for &x in &ball {
            for &y in &ball {
                if g.level_of(x).unwrap() == g.level_of(y).unwrap() && (key(x) == key(y)) != (key(m[&x]) == key(m[&y])) {
                    continue 'maps;
                }
            }
        }
        if base.iter().any(|b| base_class[b] != base_class[&m[b]]) {
            continue;
        }
        out.insert(base.iter().map(|b| base.iter().position(|c| *c == m[b]).unwrap()).collect());
    }
    out
}
