use std::collections::BTreeSet;
use std::fmt;

use super::{canonical_form, encoded_iso, Encoding, IsoConstraints};
use crate::error::{Error, Result};
use crate::model::{LayeredDigraph, VertexId};
use crate::properties::compute_k;
use crate::structure::{t_gamma, TStructure};

/// Largest base on which groups are enumerated explicitly.
pub const BASE_GUARD: usize = 12;

/// A permutation group on T^0, stored as the explicit set of its elements.
/// A permutation is the list of images of base positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupOnBase {
    pub base: Vec<VertexId>,
    pub perms: BTreeSet<Vec<usize>>,
    pub depth: usize,
}

impl GroupOnBase {
    pub fn order(&self) -> usize {
        self.perms.len()
    }

    pub fn is_subgroup_of(&self, other: &GroupOnBase) -> bool {
        self.perms.is_subset(&other.perms)
    }

    /// Contains the identity and is closed under composition and inverse.
    pub fn is_group(&self) -> bool {
        let n = self.base.len();
        if !self.perms.contains(&(0..n).collect::<Vec<_>>()) {
            return false;
        }
        for p in &self.perms {
            let mut inv = vec![0; n];
            for (i, &j) in p.iter().enumerate() {
                inv[j] = i;
            }
            if !self.perms.contains(&inv) {
                return false;
            }
            for q in &self.perms {
                let pq: Vec<usize> = (0..n).map(|i| p[q[i]]).collect();
                if !self.perms.contains(&pq) {
                    return false;
                }
            }
        }
        true
    }
}

/// A_d: permutations of T^0 induced by ρ-C-automorphisms of the ball B^d that
/// fix every base class setwise.
pub fn induced_group(t: &TStructure, d: usize) -> Result<GroupOnBase> {
    if d > t.available_depth() {
        return Err(Error::InsufficientDepth(format!(
            "ball depth {d} exceeds available depth {}",
            t.available_depth()
        )));
    }
    let base_classes: Vec<Vec<usize>> = t.levels[0].iter().map(|c| c.members.clone()).collect();
    let base: Vec<usize> = base_classes.iter().flatten().copied().collect();
    if base.len() > BASE_GUARD {
        return Err(Error::Precondition(format!(
            "base of {} vertices exceeds the guard of {BASE_GUARD}",
            base.len()
        )));
    }
    let colours = t.own_colours();
    let enc = t.encode_part(&t.ball_vertices(d), Some(&colours), true);
    let class_of: Vec<usize> = base_classes
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |_| i))
        .collect();
    let mut perms = BTreeSet::new();
    let mut pins = Vec::new();
    let mut image = Vec::new();
    extend_perm(&enc, &base, &class_of, &mut pins, &mut image, &mut perms);
    Ok(GroupOnBase {
        base: base.iter().map(|&v| t.graph.id(v)).collect(),
        perms,
        depth: d,
    })
}

fn extend_perm(
    enc: &Encoding,
    base: &[usize],
    class_of: &[usize],
    pins: &mut Vec<(usize, usize)>,
    image: &mut Vec<usize>,
    out: &mut BTreeSet<Vec<usize>>,
) {
    let j = image.len();
    if j == base.len() {
        out.insert(image.clone());
        return;
    }
    for target in 0..base.len() {
        if class_of[target] != class_of[j] || image.contains(&target) {
            continue;
        }
        pins.push((base[j], base[target]));
        if encoded_iso(enc, enc, pins).is_some() {
            image.push(target);
            extend_perm(enc, base, class_of, pins, image, out);
            image.pop();
        }
        pins.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NReport {
    pub n_hat: usize,
    /// Depths `[n_hat, D_T]` over which the chain is constant.
    pub window: (usize, usize),
    /// The last step of the chain still shrank.
    pub inconclusive: bool,
    /// A_1, …, A_{D_T}.
    pub chain: Vec<GroupOnBase>,
}

pub fn compute_n(t: &TStructure) -> Result<NReport> {
    let dt = t.available_depth();
    if dt < 2 {
        return Err(Error::InsufficientDepth(format!("T has depth {dt} < 2")));
    }
    let chain: Vec<GroupOnBase> = (1..=dt).map(|d| induced_group(t, d)).collect::<Result<_>>()?;
    for w in chain.windows(2) {
        if !w[1].is_subgroup_of(&w[0]) {
            return Err(Error::Invariant(format!("A_{} is not contained in A_{}", w[1].depth, w[0].depth)));
        }
    }
    let last = chain.last().unwrap();
    let n_hat = chain.iter().position(|a| a.perms == last.perms).unwrap() + 1;
    let inconclusive = chain[chain.len() - 2].perms != last.perms;
    Ok(NReport {
        n_hat,
        window: (n_hat, dt),
        inconclusive,
        chain,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    pub k: usize,
    pub n: usize,
    /// The invariant M = 2k + N (not the out-valency).
    pub big_m: usize,
    pub n_inconclusive: bool,
    pub canonical_text: String,
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "k={} N={} M={}", self.k, self.n, self.big_m)?;
        f.write_str(&self.canonical_text)
    }
}

pub(crate) fn k_of(g: &LayeredDigraph) -> Result<usize> {
    compute_k(g)?
        .k()
        .ok_or_else(|| Error::InsufficientDepth("k does not stabilise on this truncation".into()))
}

pub fn compute_m(g: &LayeredDigraph) -> Result<Fingerprint> {
    let k = k_of(g)?;
    let t = t_gamma(g, k)?;
    let n = compute_n(&t)?;
    let big_m = 2 * k + n.n_hat;
    if g.depth() < big_m {
        return Err(Error::InsufficientDepth(format!(
            "need M = 2k + N = {big_m}, have depth {}",
            g.depth()
        )));
    }
    let canonical_text = canonical_form(&g.truncate(big_m)?, &IsoConstraints::rooted())?;
    Ok(Fingerprint {
        k,
        n: n.n_hat,
        big_m,
        n_inconclusive: n.inconclusive,
        canonical_text,
    })
}
