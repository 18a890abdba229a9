//! Re-checks of isomorphism certificates. Uses only the public graph API and
//! recomputes ρ from ancestor sets, so it shares nothing with the search code.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{LayeredDigraph, VertexId};
use crate::structure::TStructure;

fn bijection(
    map: &BTreeMap<VertexId, VertexId>,
    domain: &BTreeSet<VertexId>,
    codomain: &BTreeSet<VertexId>,
) -> Result<(), String> {
    let keys: BTreeSet<VertexId> = map.keys().copied().collect();
    if &keys != domain {
        return Err(format!("domain has {} vertices, expected {}", keys.len(), domain.len()));
    }
    let image: BTreeSet<VertexId> = map.values().copied().collect();
    if image.len() != map.len() {
        return Err("map is not injective".into());
    }
    if &image != codomain {
        return Err("map is not onto".into());
    }
    Ok(())
}

fn edges_within(g: &LayeredDigraph, set: &BTreeSet<VertexId>) -> Result<BTreeSet<(VertexId, VertexId)>, String> {
    let mut out = BTreeSet::new();
    for &x in set {
        for y in g.out_neighbours(x).map_err(|e| e.to_string())? {
            if set.contains(&y) {
                out.insert((x, y));
            }
        }
    }
    Ok(out)
}

fn same_edges(
    g: &LayeredDigraph,
    h: &LayeredDigraph,
    map: &BTreeMap<VertexId, VertexId>,
    domain: &BTreeSet<VertexId>,
    codomain: &BTreeSet<VertexId>,
) -> Result<(), String> {
    let eg = edges_within(g, domain)?;
    let eh = edges_within(h, codomain)?;
    let mapped: BTreeSet<(VertexId, VertexId)> = eg.iter().map(|(x, y)| (map[x], map[y])).collect();
    if mapped != eh {
        let bad = eg
            .iter()
            .find(|(x, y)| !eh.contains(&(map[x], map[y])))
            .map(|(x, y)| format!("edge {x}->{y} not preserved"))
            .unwrap_or_else(|| "a non-edge maps onto an edge".into());
        return Err(bad);
    }
    Ok(())
}

/// Checks that `map` is an isomorphism of digraphs `g -> h` that preserves levels.
pub fn check_digraph_iso(
    g: &LayeredDigraph,
    h: &LayeredDigraph,
    map: &BTreeMap<VertexId, VertexId>,
) -> Result<(), String> {
    let dom: BTreeSet<VertexId> = g.vertices().collect();
    let cod: BTreeSet<VertexId> = h.vertices().collect();
    bijection(map, &dom, &cod)?;
    for (&x, &y) in map {
        if g.level_of(x).ok() != h.level_of(y).ok() {
            return Err(format!("{x} -> {y} changes level"));
        }
    }
    same_edges(g, h, map, &dom, &cod)
}

/// Colour of each vertex of levels `0..=d` of a T-structure, from its class data.
fn coloured_ball(t: &TStructure, d: usize) -> BTreeMap<VertexId, usize> {
    let mut out = BTreeMap::new();
    for r in 0..=d {
        for c in t.classes_at(r) {
            for v in c.members {
                out.insert(v, c.colour);
            }
        }
    }
    out
}

/// ρ keys recomputed from scratch: the ancestor set k − 1 levels up.
fn rho_key(g: &LayeredDigraph, k: usize, x: VertexId) -> Result<BTreeSet<VertexId>, String> {
    g.ancestors_at(x, k - 1).map_err(|e| e.to_string())
}

/// Checks that `map` is a ρ- and colour-preserving isomorphism between the
/// depth-`d` balls of `t` and `s`. Colour `c` of `s` corresponds to colour
/// `bridge[c]` of `t`.
pub fn check_ball_iso(
    t: &TStructure,
    s: &TStructure,
    d: usize,
    map: &BTreeMap<VertexId, VertexId>,
    bridge: &[usize],
) -> Result<(), String> {
    if d > t.available_depth() || d > s.available_depth() {
        return Err(format!("depth {d} exceeds a structure"));
    }
    let ct = coloured_ball(t, d);
    let cs = coloured_ball(s, d);
    let dom: BTreeSet<VertexId> = ct.keys().copied().collect();
    let cod: BTreeSet<VertexId> = cs.keys().copied().collect();
    bijection(map, &dom, &cod)?;
    let (g, h) = (t.graph(), s.graph());
    for (&x, &y) in map {
        let (lx, ly) = (g.level_of(x).map_err(|e| e.to_string())?, h.level_of(y).map_err(|e| e.to_string())?);
        if lx - t.base_level() != ly - s.base_level() {
            return Err(format!("{x} -> {y} changes relative level"));
        }
        if bridge.get(cs[&y]) != Some(&ct[&x]) {
            return Err(format!("{x} -> {y} changes colour"));
        }
    }
    same_edges(g, h, map, &dom, &cod)?;
    // ρ: the induced map on ρ keys must be a well-defined injection per level.
    let mut key_image: BTreeMap<(usize, BTreeSet<VertexId>), BTreeSet<VertexId>> = BTreeMap::new();
    let mut seen_images: BTreeMap<(usize, BTreeSet<VertexId>), (usize, BTreeSet<VertexId>)> = BTreeMap::new();
    for (&x, &y) in map {
        let lx = g.level_of(x).map_err(|e| e.to_string())?;
        let kx = (lx, rho_key(g, t.k(), x)?);
        let ky = (h.level_of(y).map_err(|e| e.to_string())?, rho_key(h, s.k(), y)?);
        if let Some(prev) = key_image.get(&kx) {
            if prev != &ky.1 {
                return Err(format!("ρ-class of {x} is split"));
            }
        } else {
            key_image.insert(kx.clone(), ky.1.clone());
        }
        if let Some(prev) = seen_images.get(&ky) {
            if prev != &kx {
                return Err(format!("two ρ-classes merge at {y}"));
            }
        } else {
            seen_images.insert(ky, kx);
        }
    }
    Ok(())
}
