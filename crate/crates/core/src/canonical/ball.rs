use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::group::{compute_m, compute_n, k_of};
use super::verify::{check_ball_iso, check_digraph_iso};
use super::{encoded_iso, iso_search, IsoConstraints};
use crate::error::{Error, Result};
use crate::model::{LayeredDigraph, VertexId};
use crate::properties::{check_g0, check_g1};
use crate::structure::{t_gamma, TStructure};

/// A ρ- and colour-preserving isomorphism between the depth-`depth` balls of
/// two T-structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallIso {
    pub depth: usize,
    pub map: BTreeMap<VertexId, VertexId>,
}

/// The identity on B^d of `t`.
pub fn identity_ball(t: &TStructure, d: usize) -> Result<BallIso> {
    if d > t.available_depth() {
        return Err(Error::InsufficientDepth(format!("ball depth {d} exceeds {}", t.available_depth())));
    }
    let map = t
        .ball_vertices(d)
        .into_iter()
        .map(|v| (t.graph.id(v), t.graph.id(v)))
        .collect();
    Ok(BallIso { depth: d, map })
}

/// For each base class of `s`, the colour of `t` naming the same ρ-isomorphism
/// type (compared at the smaller available depth).
pub(crate) fn colour_bridge(t: &TStructure, s: &TStructure) -> Option<Vec<usize>> {
    let d = t.available_depth().min(s.available_depth());
    let t_encs: Vec<_> = t.levels[0]
        .iter()
        .map(|u| t.encode_part(&t.class_cone(&u.members, d), None, false))
        .collect();
    s.levels[0]
        .iter()
        .map(|u| {
            let e = s.encode_part(&s.class_cone(&u.members, d), None, false);
            t_encs.iter().position(|te| encoded_iso(te, &e, &[]).is_some())
        })
        .collect()
}

fn dense_map(t: &TStructure, s: &TStructure, map: &BTreeMap<VertexId, VertexId>) -> Result<HashMap<usize, usize>> {
    map.iter()
        .map(|(&a, &b)| Ok((t.graph.idx(a)?, s.graph.idx(b)?)))
        .collect()
}

/// A ρ-C-isomorphism B^d_T → B^d_S found by search.
pub(crate) fn ball_iso_search(t: &TStructure, s: &TStructure, d: usize, bridge: &[usize]) -> Option<BallIso> {
    let own = t.own_colours();
    let et = t.encode_part(&t.ball_vertices(d), Some(&own), false);
    let es = s.encode_part(&s.ball_vertices(d), Some(bridge), false);
    let m = encoded_iso(&et, &es, &[])?;
    Some(BallIso {
        depth: d,
        map: m.into_iter().map(|(a, b)| (t.graph.id(a), s.graph.id(b))).collect(),
    })
}

/// Searches for a ρ-C-isomorphism between the depth-`d` balls of `t` and `s`.
pub fn find_ball_iso(t: &TStructure, s: &TStructure, d: usize) -> Result<Option<BallIso>> {
    if d > t.available_depth() || d > s.available_depth() {
        return Err(Error::InsufficientDepth(format!("ball depth {d} exceeds a structure")));
    }
    Ok(colour_bridge(t, s).and_then(|bridge| ball_iso_search(t, s, d, &bridge)))
}

/// Colour translation `s -> t` used by the ball searches, if the base types match.
pub fn base_colour_bridge(t: &TStructure, s: &TStructure) -> Option<Vec<usize>> {
    colour_bridge(t, s)
}

/// Extends a ball isomorphism Φ of depth d to one of depth d + 1, provided
/// d > N̂ of `s`.
pub fn extend_ball_iso(phi: &BallIso, t: &TStructure, s: &TStructure) -> Result<BallIso> {
    let bridge = colour_bridge(t, s).ok_or_else(|| Error::Precondition("the base types of T and S differ".into()))?;
    let n_s = compute_n(s)?.n_hat;
    extend_with(phi, t, s, &bridge, n_s)
}

pub(crate) fn extend_with(phi: &BallIso, t: &TStructure, s: &TStructure, bridge: &[usize], n_s: usize) -> Result<BallIso> {
    let d = phi.depth;
    if d <= n_s {
        return Err(Error::Precondition(format!("ball depth {d} is not above N = {n_s}")));
    }
    if d + 1 > t.available_depth() || d + 1 > s.available_depth() {
        return Err(Error::InsufficientDepth(format!("no room for a ball of depth {}", d + 1)));
    }
    check_ball_iso(t, s, d, &phi.map, bridge).map_err(|e| Error::Precondition(format!("Φ: {e}")))?;
    let fwd = dense_map(t, s, &phi.map)?;
    let back: HashMap<usize, usize> = fwd.iter().map(|(&a, &b)| (b, a)).collect();
    let own = t.own_colours();
    let mut psi: BTreeMap<usize, usize> = t.levels[0]
        .iter()
        .flat_map(|c| c.members.iter().map(|v| (*v, fwd[v])))
        .collect();
    for (i, v) in t.levels[1].iter().enumerate() {
        let u = &t.levels[0][v.colour];
        let cone_u = t.class_cone(&u.members, d);
        let cone_v = t.class_cone(&v.members, d);
        let f = encoded_iso(
            &t.encode_part(&cone_u, Some(&own), false),
            &t.encode_part(&cone_v, Some(&own), false),
            &[],
        )
        .ok_or_else(|| Error::ExtensionFailed(format!("no ρ-C-isomorphism onto T^1 class {i}")))?;
        let f_inv: HashMap<usize, usize> = f.iter().map(|(&a, &b)| (b, a)).collect();
        let z: Vec<usize> = u.members.iter().map(|x| fwd[x]).collect();
        let w: Vec<usize> = v.members.iter().map(|x| fwd[x]).collect();
        let pins: Vec<(usize, usize)> = z.iter().map(|&y| (y, fwd[&f[&back[&y]]])).collect();
        let cone_z = s.class_cone(&z, d);
        let cone_w = s.class_cone(&w, d);
        let alpha = encoded_iso(
            &s.encode_part(&cone_z, Some(bridge), false),
            &s.encode_part(&cone_w, Some(bridge), false),
            &pins,
        )
        .ok_or_else(|| Error::ExtensionFailed(format!("α for T^1 class {i} does not extend")))?;
        for x in cone_v {
            let y = alpha[&fwd[&f_inv[&x]]];
            psi.entry(x).or_insert(y);
        }
    }
    let map: BTreeMap<VertexId, VertexId> = psi.into_iter().map(|(a, b)| (t.graph.id(a), s.graph.id(b))).collect();
    check_ball_iso(t, s, d + 1, &map, bridge).map_err(|e| Error::ExtensionFailed(format!("Ψ: {e}")))?;
    Ok(BallIso { depth: d + 1, map })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoOutcome {
    Isomorphic,
    NotIsomorphic,
    InsufficientDepth,
}

impl fmt::Display for IsoOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IsoOutcome::Isomorphic => "isomorphic",
            IsoOutcome::NotIsomorphic => "not_isomorphic",
            IsoOutcome::InsufficientDepth => "insufficient_depth",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoDecision {
    pub outcome: IsoOutcome,
    /// Names the first invariant that differs, or why depth is insufficient.
    pub discriminator: Option<String>,
    /// A rooted isomorphism of the depth-M truncations.
    pub certificate: Option<BTreeMap<VertexId, VertexId>>,
    /// Ball isomorphisms of T_Γ from depth N + 1 upwards.
    pub chain: Vec<BallIso>,
}

impl IsoDecision {
    fn differ(what: &str, a: impl fmt::Display, b: impl fmt::Display) -> Self {
        IsoDecision {
            outcome: IsoOutcome::NotIsomorphic,
            discriminator: Some(format!("{what}:{a}≠{b}")),
            certificate: None,
            chain: Vec::new(),
        }
    }
}

/// Decides whether two truncations of graphs with the descent properties are
/// truncations of isomorphic graphs.
pub fn decide_iso(g1: &LayeredDigraph, g2: &LayeredDigraph) -> Result<IsoDecision> {
    for (i, g) in [g1, g2].into_iter().enumerate() {
        if !check_g0(g).passed() {
            return Err(Error::Precondition(format!("input {} fails g0", i + 1)));
        }
    }
    if g1.m() != g2.m() {
        return Ok(IsoDecision::differ("out-valency", g1.m(), g2.m()));
    }
    for (i, g) in [g1, g2].into_iter().enumerate() {
        if !check_g1(g)?.passed() {
            return Err(Error::Precondition(format!("input {} fails g1", i + 1)));
        }
    }
    let (k1, k2) = (k_of(g1)?, k_of(g2)?);
    if k1 != k2 {
        return Ok(IsoDecision::differ("k", k1, k2));
    }
    let mut fps = Vec::new();
    for g in [g1, g2] {
        match compute_m(g) {
            Ok(f) => fps.push(f),
            Err(Error::InsufficientDepth(msg)) => {
                return Ok(IsoDecision {
                    outcome: IsoOutcome::InsufficientDepth,
                    discriminator: Some(msg),
                    certificate: None,
                    chain: Vec::new(),
                })
            }
            Err(e) => return Err(e),
        }
    }
    if fps[0].big_m != fps[1].big_m {
        return Ok(IsoDecision::differ("M", fps[0].big_m, fps[1].big_m));
    }
    if fps[0].canonical_text != fps[1].canonical_text {
        return Ok(IsoDecision {
            outcome: IsoOutcome::NotIsomorphic,
            discriminator: Some(format!("canonical form at depth M={}", fps[0].big_m)),
            certificate: None,
            chain: Vec::new(),
        });
    }
    let big_m = fps[0].big_m;
    let (b1, b2) = (g1.truncate(big_m)?, g2.truncate(big_m)?);
    let theta = iso_search(&b1, &b2, &IsoConstraints::rooted())?
        .ok_or_else(|| Error::Invariant("equal canonical forms without an isomorphism".into()))?;
    check_digraph_iso(&b1, &b2, &theta).map_err(Error::Invariant)?;

    let (t, s) = (t_gamma(g1, k1)?, t_gamma(g2, k2)?);
    let bridge = colour_bridge(&t, &s).ok_or_else(|| Error::Invariant("T_Γ base types differ".into()))?;
    let n_s = compute_n(&s)?.n_hat;
    let top = t.available_depth().min(s.available_depth());
    let mut chain = Vec::new();
    if n_s < top {
        let mut phi = ball_iso_search(&t, &s, n_s + 1, &bridge)
            .ok_or_else(|| Error::Invariant(format!("no ball isomorphism at depth {}", n_s + 1)))?;
        check_ball_iso(&t, &s, phi.depth, &phi.map, &bridge).map_err(Error::Invariant)?;
        while phi.depth < top {
            let next = extend_with(&phi, &t, &s, &bridge, n_s)?;
            chain.push(phi);
            phi = next;
        }
        chain.push(phi);
    }
    Ok(IsoDecision {
        outcome: IsoOutcome::Isomorphic,
        discriminator: None,
        certificate: Some(theta),
        chain,
    })
}
