//! Constrained isomorphism, canonical forms, the induced group chain, the
//! invariant M, ball isomorphisms and the isomorphism decision procedure.

pub(crate) mod engine;
mod ball;
mod group;
pub mod verify;

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::format::write_ldg_body;
use crate::model::{LayeredDigraph, VertexId};
use crate::structure::rho_classes_dense;
use engine::Structure;

pub use ball::{
    base_colour_bridge, decide_iso, extend_ball_iso, find_ball_iso, identity_ball, BallIso, IsoDecision, IsoOutcome,
};
pub use group::{compute_m, compute_n, induced_group, Fingerprint, GroupOnBase, NReport, BASE_GUARD};

/// Constraints for [`iso_search`] and [`canonical_form`].
#[derive(Debug, Clone, Default)]
pub struct IsoConstraints {
    /// Must-map pairs.
    pub pin: BTreeMap<VertexId, VertexId>,
    /// Map root to root. Always implied for rooted layered digraphs, kept for
    /// explicitness.
    pub rooted: bool,
    /// Preserve ρ computed with this k (classes at levels ≥ k).
    pub respect_rho: Option<usize>,
    /// Classes mapped setwise onto the class of the same index in the target.
    pub class_setwise_fix: Vec<Vec<VertexId>>,
}

impl IsoConstraints {
    pub fn rooted() -> Self {
        IsoConstraints {
            rooted: true,
            ..Default::default()
        }
    }

    pub fn with_pin(mut self, a: VertexId, b: VertexId) -> Self {
        self.pin.insert(a, b);
        self
    }
}

const AUX: u64 = 1 << 62;
const LEVEL_SHIFT: u32 = 32;

/// Tag of an auxiliary class vertex. Different tags are never matched.
pub(crate) fn tag_plain() -> u64 {
    0
}

pub(crate) fn tag_colour(c: usize) -> u64 {
    1 + c as u64
}

pub(crate) fn tag_fixed(i: usize) -> u64 {
    (1 << 31) + i as u64
}

/// An induced subgraph of a layered digraph in engine form, with auxiliary
/// vertices marking classes.
pub(crate) struct Encoding {
    pub s: Structure,
    pub verts: Vec<usize>,
    pub local: HashMap<usize, u32>,
}

/// Encodes the subgraph induced on `verts` (dense indices, ascending). Vertex
/// labels are levels relative to `base`; each `(members, tag)` adds a class
/// vertex pointing at its members.
pub(crate) fn encode(
    g: &LayeredDigraph,
    verts: &[usize],
    base: usize,
    classes: &[(Vec<usize>, u64)],
) -> Encoding {
    let local: HashMap<usize, u32> = verts.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    let labels = verts
        .iter()
        .map(|&v| ((g.dense_level(v) - base) as u64) << LEVEL_SHIFT)
        .collect();
    let mut s = Structure::with_labels(labels);
    for (i, &v) in verts.iter().enumerate() {
        for w in g.dense_out(v) {
            if let Some(&j) = local.get(w) {
                s.add_edge(i as u32, j);
            }
        }
    }
    for (members, tag) in classes {
        let lvl = members.first().map(|&v| g.dense_level(v) - base).unwrap_or(0) as u64;
        let a = s.add_vertex(AUX | (lvl << LEVEL_SHIFT) | tag);
        for v in members {
            s.add_edge(a, local[v]);
        }
    }
    s.finish();
    Encoding {
        s,
        verts: verts.to_vec(),
        local,
    }
}

/// Isomorphism between two encodings mapping pinned dense pairs. Returns the
/// map on dense indices of the real (non-auxiliary) vertices.
pub(crate) fn encoded_iso(a: &Encoding, b: &Encoding, pins: &[(usize, usize)]) -> Option<HashMap<usize, usize>> {
    if a.verts.len() != b.verts.len() {
        return None;
    }
    let mut lp = Vec::with_capacity(pins.len());
    for &(x, y) in pins {
        lp.push((*a.local.get(&x)?, *b.local.get(&y)?));
    }
    let map = engine::find_iso(&a.s, &b.s, &lp)?;
    Some(
        a.verts
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, b.verts[map[i] as usize]))
            .collect(),
    )
}

fn graph_classes(g: &LayeredDigraph, c: &IsoConstraints) -> Result<Vec<(Vec<usize>, u64)>> {
    let mut classes = Vec::new();
    if let Some(k) = c.respect_rho {
        for l in k.max(1)..=g.depth() {
            for cls in rho_classes_dense(g, k, l) {
                classes.push((cls, tag_plain()));
            }
        }
    }
    for (i, cls) in c.class_setwise_fix.iter().enumerate() {
        let dense = cls.iter().map(|&v| g.idx(v)).collect::<Result<Vec<_>>>()?;
        if dense.iter().any(|&v| g.dense_level(v) != g.dense_level(dense[0])) {
            return Err(Error::InvalidArgument(format!("class {i} spans several levels")));
        }
        classes.push((dense, tag_fixed(i)));
    }
    Ok(classes)
}

/// Searches for a digraph isomorphism `g -> h` satisfying `c`. The result is
/// deterministic for given inputs.
pub fn iso_search(
    g: &LayeredDigraph,
    h: &LayeredDigraph,
    c: &IsoConstraints,
) -> Result<Option<BTreeMap<VertexId, VertexId>>> {
    let mut pins = Vec::new();
    for (&a, &b) in &c.pin {
        let (ia, ib) = (g.idx(a)?, h.idx(b)?);
        if g.dense_level(ia) != h.dense_level(ib) {
            return Err(Error::IncompatiblePin(a, b));
        }
        pins.push((ia, ib));
    }
    if c.rooted {
        pins.push((g.idx(g.root())?, h.idx(h.root())?));
        pins.dedup();
    }
    if g.m() != h.m() || g.level_sizes() != h.level_sizes() {
        return Ok(None);
    }
    let ea = encode(g, &(0..g.vertex_count()).collect::<Vec<_>>(), 0, &graph_classes(g, c)?);
    let eb = encode(h, &(0..h.vertex_count()).collect::<Vec<_>>(), 0, &graph_classes(h, c)?);
    Ok(encoded_iso(&ea, &eb, &pins).map(|m| m.into_iter().map(|(x, y)| (g.id(x), h.id(y))).collect()))
}

/// Canonical renumbering: `result[dense] = canonical id`, level-contiguous with
/// the root at 0.
pub(crate) fn canonical_numbering(g: &LayeredDigraph, c: &IsoConstraints) -> Result<Vec<u32>> {
    let mut enc = encode(g, &(0..g.vertex_count()).collect::<Vec<_>>(), 0, &graph_classes(g, c)?);
    for (i, (&a, _)) in c.pin.iter().enumerate() {
        let x = g.idx(a)?;
        enc.s.label[x] |= 1 + i as u64;
    }
    let order = engine::canonical_order(&enc.s);
    let mut number = vec![0u32; g.vertex_count()];
    for (pos, &v) in order.iter().enumerate() {
        if (v as usize) < g.vertex_count() {
            number[v as usize] = pos as u32;
        }
    }
    Ok(number)
}

/// Canonical LDG text: equal for inputs that are isomorphic under `c`.
pub fn canonical_form(g: &LayeredDigraph, c: &IsoConstraints) -> Result<String> {
    let number = canonical_numbering(g, c)?;
    let levels: Vec<Vec<VertexId>> = (0..=g.depth())
        .map(|l| {
            let mut ids: Vec<VertexId> = g.level_range(l).map(|v| VertexId(number[v])).collect();
            ids.sort();
            ids
        })
        .collect();
    let mut edges: Vec<(VertexId, VertexId)> = (0..g.vertex_count())
        .flat_map(|v| g.dense_out(v).iter().map(move |&w| (v, w)))
        .map(|(v, w)| (VertexId(number[v]), VertexId(number[w])))
        .collect();
    edges.sort();
    let mut s = String::from("ldg 1\n");
    write_ldg_body(&mut s, g.m(), &levels, &edges);
    Ok(s)
}

/// Canonical form of the graph with its own vertex numbering replaced: the
/// relabelled graph whose LDG text is [`canonical_form`].
pub fn canonical_graph(g: &LayeredDigraph, c: &IsoConstraints) -> Result<LayeredDigraph> {
    let number = canonical_numbering(g, c)?;
    let rename = (0..g.vertex_count()).map(|v| (g.id(v), VertexId(number[v]))).collect();
    g.relabeled(&rename)
}
