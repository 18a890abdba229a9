//! Depth-bounded checks of the descent properties. A pass only ever means
//! "not refuted on this truncation".

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::canonical::{iso_search, IsoConstraints};
use crate::error::{Error, Result};
use crate::model::{Issue, LayeredDigraph, VertexId};
use crate::structure::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Defect(Issue),
    /// A vertex whose cone is not isomorphic to the truncation of matching depth.
    Cone(VertexId),
    /// Level sizes that fail to grow.
    Growth { level: usize, sizes: (usize, usize) },
    /// An edge along which anc ∩ L_1 still changes.
    Descent { from: VertexId, to: VertexId, level: usize },
    /// Two vertices of one level with different numbers of level-1 ancestors.
    TVaries { level: usize, a: VertexId, b: VertexId },
    Pair(VertexId, VertexId),
    /// An edge leaving a set that should be closed under descendants.
    Edge(VertexId, VertexId),
    Orbits { level: usize, orbits: Vec<Vec<VertexId>> },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Defect(i) => write!(f, "{i}"),
            Witness::Cone(v) => write!(f, "cone({v})"),
            Witness::Growth { level, sizes } => write!(f, "level {level}: {} -> {}", sizes.0, sizes.1),
            Witness::Descent { from, to, level } => write!(f, "edge {from}->{to} at level {level}"),
            Witness::TVaries { level, a, b } => write!(f, "t varies at level {level}: {a},{b}"),
            Witness::Pair(a, b) => write!(f, "({a},{b})"),
            Witness::Edge(a, b) => write!(f, "edge {a}->{b}"),
            Witness::Orbits { level, orbits } => {
                let parts: Vec<String> = orbits
                    .iter()
                    .map(|o| o.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
                    .collect();
                write!(f, "level {level} orbits {{{}}}", parts.join("}{"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub depth_checked: usize,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
}

impl Verdict {
    fn pass(depth: usize) -> Self {
        Verdict {
            status: Status::Pass,
            depth_checked: depth,
            witness: None,
            notes: Vec::new(),
        }
    }

    fn fail(depth: usize, w: Witness) -> Self {
        Verdict {
            status: Status::Fail,
            depth_checked: depth,
            witness: Some(w),
            notes: Vec::new(),
        }
    }

    fn inconclusive(depth: usize, note: impl Into<String>) -> Self {
        Verdict {
            status: Status::Inconclusive,
            depth_checked: depth,
            witness: None,
            notes: vec![note.into()],
        }
    }

    fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

fn require_g0(g: &LayeredDigraph) -> Result<()> {
    if check_g0(g).passed() {
        Ok(())
    } else {
        Err(Error::Precondition("g0 does not hold".into()))
    }
}

pub fn check_g0(g: &LayeredDigraph) -> Verdict {
    match g.validate().issues.into_iter().next() {
        None => Verdict::pass(g.depth()),
        Some(i) => Verdict::fail(g.depth(), Witness::Defect(i)),
    }
}

pub fn check_g1(g: &LayeredDigraph) -> Result<Verdict> {
    require_g0(g)?;
    let d = g.depth();
    let truncs: Vec<LayeredDigraph> = (0..=d).map(|i| g.truncate(i)).collect::<Result<_>>()?;
    for u in g.vertices() {
        let l = g.level_of(u)?;
        let cone = g.cone(u)?;
        if iso_search(&cone, &truncs[d - l], &IsoConstraints::rooted())?.is_none() {
            return Ok(Verdict::fail(d, Witness::Cone(u)));
        }
    }
    Ok(Verdict::pass(d))
}

pub fn check_g2(g: &LayeredDigraph) -> Result<Verdict> {
    require_g0(g)?;
    let sizes = g.level_sizes();
    for n in 0..g.depth() {
        if sizes[n] >= sizes[n + 1] {
            return Ok(Verdict::fail(
                g.depth(),
                Witness::Growth {
                    level: n,
                    sizes: (sizes[n], sizes[n + 1]),
                },
            ));
        }
    }
    Ok(Verdict::pass(g.depth()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KReport {
    pub k: usize,
    /// `t_sequence[i]` is t_{i+1}, the number of level-1 ancestors of a vertex
    /// at level i + 1.
    pub t_sequence: Vec<usize>,
    /// Least level from which the t-sequence is constant.
    pub stable_from: usize,
    /// Set when the number of level-1 ancestors is not constant on a level.
    pub t_witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KOutcome {
    Found(KReport),
    Refuted(Verdict),
}

impl KOutcome {
    pub fn k(&self) -> Option<usize> {
        match self {
            KOutcome::Found(r) => Some(r.k),
            KOutcome::Refuted(_) => None,
        }
    }

    pub fn report(&self) -> Option<&KReport> {
        match self {
            KOutcome::Found(r) => Some(r),
            KOutcome::Refuted(_) => None,
        }
    }
}

/// anc(x) ∩ L_1 for every vertex, as sorted dense indices.
fn level_one_ancestors(g: &LayeredDigraph) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count()];
    for x in g.level_range(1) {
        out[x] = vec![x];
    }
    for l in 2..=g.depth() {
        for x in g.level_range(l) {
            let mut s: BTreeSet<usize> = BTreeSet::new();
            for &p in g.dense_in(x) {
                s.extend(out[p].iter().copied());
            }
            out[x] = s.into_iter().collect();
        }
    }
    out
}

pub fn compute_k(g: &LayeredDigraph) -> Result<KOutcome> {
    require_g0(g)?;
    let d = g.depth();
    if d < 2 {
        return Err(Error::InsufficientDepth(format!("depth {d} < 2")));
    }
    let anc1 = level_one_ancestors(g);
    // The deepest level with a vertex whose level-1 ancestry still grows.
    let mut last_unstable: Option<(usize, usize, usize)> = None;
    for l in 1..d {
        for x in g.level_range(l) {
            if let Some(&z) = g.dense_out(x).iter().find(|&&z| anc1[z] != anc1[x]) {
                last_unstable = Some((l, x, z));
                break;
            }
        }
    }
    let k = last_unstable.map_or(1, |(l, _, _)| l + 1);
    if k > d - 1 {
        let (l, x, z) = last_unstable.expect("k > 1 implies an unstable level");
        return Ok(KOutcome::Refuted(
            Verdict::fail(
                d,
                Witness::Descent {
                    from: g.id(x),
                    to: g.id(z),
                    level: l,
                },
            )
            .note("stabilisation below the horizon cannot be excluded"),
        ));
    }
    let mut t_sequence = Vec::with_capacity(d);
    let mut t_witness = None;
    for l in 1..=d {
        let r = g.level_range(l);
        let first = r.start;
        t_sequence.push(anc1[first].len());
        if t_witness.is_none() {
            if let Some(y) = r.clone().find(|&y| anc1[y].len() != anc1[first].len()) {
                t_witness = Some(Witness::TVaries {
                    level: l,
                    a: g.id(first),
                    b: g.id(y),
                });
            }
        }
    }
    let last = *t_sequence.last().unwrap();
    let stable_from = t_sequence.iter().rposition(|&t| t != last).map_or(1, |i| i + 2);
    Ok(KOutcome::Found(KReport {
        k,
        t_sequence,
        stable_from,
        t_witness,
    }))
}

/// Fixed-width bitset over dense indices.
#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn meets(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }
}

/// Descendant sets as bitsets over all vertices, built bottom-up.
fn descendant_bits(g: &LayeredDigraph) -> Vec<Bits> {
    let n = g.vertex_count();
    let mut out = vec![Bits::new(n); n];
    for x in (0..n).rev() {
        let mut b = Bits::new(n);
        b.set(x);
        for &z in g.dense_out(x) {
            for (w, o) in b.0.iter_mut().zip(&out[z].0) {
                *w |= o;
            }
        }
        out[x] = b;
    }
    out
}

fn deep_part(g: &LayeredDigraph, desc: &Bits) -> Bits {
    let r = g.level_range(g.depth());
    let mut b = Bits::new(r.len());
    for (i, x) in r.enumerate() {
        if desc.get(x) {
            b.set(i);
        }
    }
    b
}

/// The level at which the sensor comparisons start: k when it is known.
fn sensor_start(g: &LayeredDigraph) -> Result<(usize, Option<usize>)> {
    let k = if g.depth() >= 2 { compute_k(g)?.k() } else { None };
    Ok((k.unwrap_or(1).min(g.depth()), k))
}

pub fn check_p2(g: &LayeredDigraph) -> Result<Verdict> {
    require_g0(g)?;
    let d = g.depth();
    let (start, k) = sensor_start(g)?;
    let desc = descendant_bits(g);
    let deep: Vec<Bits> = desc.iter().map(|b| deep_part(g, b)).collect();
    for l in start..=d {
        for a in g.level_range(l) {
            let same = g.level_range(l);
            let others = (0..g.vertex_count()).filter(|x| !same.contains(x));
            for b in same.clone().chain(others) {
                if !desc[a].get(b) && deep[b].subset_of(&deep[a]) {
                    return Ok(Verdict::fail(d, Witness::Pair(g.id(a), g.id(b))));
                }
            }
        }
    }
    // Condition (ii) always holds on a finite truncation; record the sizes.
    let mut pairs = 0usize;
    let mut most = 0usize;
    for l in start..=d {
        let r = g.level_range(l);
        for a in r.clone() {
            for b in r.clone().filter(|&b| b > a) {
                if !deep[a].meets(&deep[b]) {
                    continue;
                }
                let common: Vec<usize> = (0..g.vertex_count()).filter(|&x| desc[a].get(x) && desc[b].get(x)).collect();
                let gens = common
                    .iter()
                    .filter(|&&x| !g.dense_in(x).iter().any(|&p| desc[a].get(p) && desc[b].get(p)))
                    .count();
                pairs += 1;
                most = most.max(gens);
            }
        }
    }
    let note = format!("generators of desc(a)∩desc(b): {pairs} meeting pairs, at most {most}");
    match k {
        Some(k) if d < 2 * k + 2 => Ok(Verdict::inconclusive(d, format!("depth {d} < 2k+2 = {}", 2 * k + 2)).note(note)),
        None => Ok(Verdict::inconclusive(d, "k unknown on this truncation").note(note)),
        _ => Ok(Verdict::pass(d).note(note)),
    }
}

pub fn check_p2_prime(g: &LayeredDigraph) -> Result<Verdict> {
    require_g0(g)?;
    let d = g.depth();
    let (start, _) = sensor_start(g)?;
    let desc = descendant_bits(g);
    for l in start..d {
        let mut seen: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        for x in g.level_range(l) {
            let key = deep_part(g, &desc[x]).0;
            if let Some(&y) = seen.get(&key) {
                return Ok(Verdict::fail(d, Witness::Pair(g.id(y), g.id(x))));
            }
            seen.insert(key, x);
        }
    }
    for l in 0..d {
        let mut seen: BTreeMap<&[usize], usize> = BTreeMap::new();
        for x in g.level_range(l) {
            if let Some(&y) = seen.get(g.dense_out(x)) {
                return Ok(Verdict::fail(d, Witness::Pair(g.id(y), g.id(x))).note("equal out-neighbourhoods"));
            }
            seen.insert(g.dense_out(x), x);
        }
    }
    Ok(Verdict::pass(d))
}

/// Orbits of the root-fixing automorphism group of the truncation on each level.
pub fn level_orbits(g: &LayeredDigraph) -> Result<Vec<Vec<Vec<VertexId>>>> {
    let n = g.vertex_count();
    let mut uf = UnionFind::new(n);
    let mut out = Vec::new();
    for l in 0..=g.depth() {
        let mut reps: Vec<usize> = Vec::new();
        for v in g.level_range(l) {
            if reps.iter().any(|&r| uf.find(r) == uf.find(v)) {
                continue;
            }
            let mut merged = false;
            for &r in &reps {
                let c = IsoConstraints::rooted().with_pin(g.id(r), g.id(v));
                if let Some(auto) = iso_search(g, g, &c)? {
                    for (a, b) in auto {
                        uf.union(g.idx(a)?, g.idx(b)?);
                    }
                    merged = true;
                    break;
                }
            }
            if !merged {
                reps.push(v);
            }
        }
        let mut orbits: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
        for v in g.level_range(l) {
            orbits.entry(uf.find(v)).or_default().push(g.id(v));
        }
        out.push(orbits.into_values().collect());
    }
    Ok(out)
}

pub fn check_p3(g: &LayeredDigraph) -> Result<Verdict> {
    require_g0(g)?;
    let d = g.depth();
    for (l, orbits) in level_orbits(g)?.into_iter().enumerate() {
        if orbits.len() > 1 {
            return Ok(Verdict::fail(d, Witness::Orbits { level: l, orbits }).note("truncation-level transitivity"));
        }
    }
    Ok(Verdict::pass(d).note("truncation-level transitivity"))
}
