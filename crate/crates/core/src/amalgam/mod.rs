//! Finite approximations of the amalgamation class: finitely generated objects
//! whose cones are truncations of Γ, the ≤ / ≤⁺ closure checks, free
//! amalgamation, the task chain, cloning over a closed subset and the
//! separation trace.
//!
//! Every object carries a height function: frontier vertices have height 0 and
//! every edge drops the height by one, so the cone of `v` is compared against
//! the truncation of Γ at depth `height(v)`.

mod ops;
mod trace;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::canonical::{canonical_form, IsoConstraints};
use crate::error::{Error, Result};
use crate::model::{ExpansionSystem, LayeredDigraph, VertexId};
use crate::properties::{Status, Verdict, Witness};

pub use ops::{
    apply_task, build_limit_approx, clone_over, disjoint_witness, extend_task, free_amalgam, parse_schedule, Amalgam,
    LimitApprox, StepRecord, Task,
};
pub use trace::{orbit_certificate, separation_trace, OrbitCertificate, SeparationTrace, TraceStep};

/// Γ as generated by an expansion system, with the canonical forms of its
/// truncations memoised.
pub struct Gamma {
    sys: ExpansionSystem,
    forms: Mutex<BTreeMap<usize, String>>,
}

impl fmt::Debug for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gamma(m={}, k={})", self.sys.m(), self.sys.k())
    }
}

impl Gamma {
    pub fn new(sys: ExpansionSystem) -> Arc<Self> {
        Arc::new(Gamma {
            sys,
            forms: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn system(&self) -> &ExpansionSystem {
        &self.sys
    }

    /// `Γ^{≤h}`.
    pub fn truncation(&self, h: usize) -> Result<LayeredDigraph> {
        self.sys.expand(h.max(self.sys.seed().depth()))?.truncate(h)
    }

    fn form(&self, h: usize) -> Result<String> {
        if let Some(f) = self.forms.lock().unwrap().get(&h) {
            return Ok(f.clone());
        }
        let f = canonical_form(&self.truncation(h)?, &IsoConstraints::rooted())?;
        self.forms.lock().unwrap().insert(h, f.clone());
        Ok(f)
    }
}

/// A finitely generated object: a finite acyclic digraph whose vertices either
/// have all `m` out-edges recorded or lie on the frontier.
#[derive(Clone)]
pub struct FgObject {
    gamma: Arc<Gamma>,
    out: BTreeMap<VertexId, Vec<VertexId>>,
    inn: BTreeMap<VertexId, Vec<VertexId>>,
    height: BTreeMap<VertexId, usize>,
    generators: Vec<VertexId>,
    frontier: BTreeSet<VertexId>,
}

impl PartialEq for FgObject {
    fn eq(&self, other: &Self) -> bool {
        self.out == other.out && self.gamma.sys == other.gamma.sys
    }
}

impl fmt::Debug for FgObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FgObject({} vertices, {} edges, generators {:?})",
            self.len(),
            self.edge_count(),
            self.generators
        )
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}

impl FgObject {
    /// Builds an object from its vertex and edge lists and computes heights
    /// and generators. Does not compare cones against Γ; see [`validate`].
    ///
    /// [`validate`]: FgObject::validate
    pub fn new<V, E>(gamma: &Arc<Gamma>, vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator<Item = VertexId>,
        E: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut out: BTreeMap<VertexId, Vec<VertexId>> = vertices.into_iter().map(|v| (v, Vec::new())).collect();
        let mut inn: BTreeMap<VertexId, Vec<VertexId>> = out.keys().map(|&v| (v, Vec::new())).collect();
        for (a, b) in edges {
            if a == b {
                return Err(bad(format!("loop at {a}")));
            }
            inn.get_mut(&b).ok_or(Error::UnknownVertex(b))?.push(a);
            out.get_mut(&a).ok_or(Error::UnknownVertex(a))?.push(b);
        }
        for adj in out.values_mut().chain(inn.values_mut()) {
            adj.sort_unstable();
            let n = adj.len();
            adj.dedup();
            if adj.len() != n {
                return Err(bad("duplicate edge"));
            }
        }
        // heights bottom-up; a vertex is settled once all its out-neighbours are
        let mut pending: BTreeMap<VertexId, usize> = out.iter().map(|(&v, o)| (v, o.len())).collect();
        let mut height = BTreeMap::new();
        let mut queue: VecDeque<VertexId> = pending.iter().filter(|(_, &n)| n == 0).map(|(&v, _)| v).collect();
        while let Some(v) = queue.pop_front() {
            let h = match out[&v].first() {
                None => 0,
                Some(w) => height[w] + 1,
            };
            if let Some(w) = out[&v].iter().find(|w| height[*w] + 1 != h) {
                return Err(bad(format!("out-neighbours of {v} sit at different heights ({w})")));
            }
            height.insert(v, h);
            for p in &inn[&v] {
                let c = pending.get_mut(p).unwrap();
                *c -= 1;
                if *c == 0 {
                    queue.push_back(*p);
                }
            }
        }
        if height.len() != out.len() {
            return Err(bad("the object has a directed cycle"));
        }
        let generators = inn.iter().filter(|(_, i)| i.is_empty()).map(|(&v, _)| v).collect();
        let frontier = out.iter().filter(|(_, o)| o.is_empty()).map(|(&v, _)| v).collect();
        Ok(FgObject {
            gamma: gamma.clone(),
            out,
            inn,
            height,
            generators,
            frontier,
        })
    }

    /// The single-generator object whose cone is `expand(sys, depth)`.
    pub fn from_gamma(sys: &ExpansionSystem, depth: usize) -> Result<Self> {
        Self::from_gamma_with(&Gamma::new(sys.clone()), depth)
    }

    pub fn from_gamma_with(gamma: &Arc<Gamma>, depth: usize) -> Result<Self> {
        let g = gamma.sys.expand(depth)?;
        Self::new(gamma, g.vertices(), g.edges())
    }

    /// `Γ^{≤h}` as an object, for any `h` (below the seed depth too).
    pub(crate) fn truncation_of(gamma: &Arc<Gamma>, h: usize) -> Result<Self> {
        let g = gamma.truncation(h)?;
        Self::new(gamma, g.vertices(), g.edges())
    }

    pub fn gamma(&self) -> &Arc<Gamma> {
        &self.gamma
    }

    pub fn m(&self) -> usize {
        self.gamma.sys.m()
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.out.values().map(Vec::len).sum()
    }

    /// Vertices in ascending id order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.out.keys().copied()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.out.contains_key(&v)
    }

    /// Edges sorted by (source, target).
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        self.out.iter().flat_map(|(&a, o)| o.iter().map(move |&b| (a, b))).collect()
    }

    pub fn out_neighbours(&self, v: VertexId) -> Result<&[VertexId]> {
        self.out.get(&v).map(Vec::as_slice).ok_or(Error::UnknownVertex(v))
    }

    pub fn in_neighbours(&self, v: VertexId) -> Result<&[VertexId]> {
        self.inn.get(&v).map(Vec::as_slice).ok_or(Error::UnknownVertex(v))
    }

    pub fn height(&self, v: VertexId) -> Result<usize> {
        self.height.get(&v).copied().ok_or(Error::UnknownVertex(v))
    }

    pub fn max_height(&self) -> usize {
        self.height.values().copied().max().unwrap_or(0)
    }

    /// The vertices without in-edges, ascending. Every vertex is a descendant
    /// of one of them.
    pub fn generators(&self) -> &[VertexId] {
        &self.generators
    }

    pub fn frontier(&self) -> &BTreeSet<VertexId> {
        &self.frontier
    }

    /// A fresh id above every id in use.
    pub fn next_id(&self) -> u32 {
        self.out.keys().next_back().map_or(0, |v| v.0 + 1)
    }

    pub fn descendants(&self, v: VertexId) -> Result<BTreeSet<VertexId>> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
        Ok(self.descendants_of([v]))
    }

    /// `desc(S)`: the union of the cones of the given vertices.
    pub fn descendants_of(&self, set: impl IntoIterator<Item = VertexId>) -> BTreeSet<VertexId> {
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut stack: Vec<VertexId> = set.into_iter().filter(|v| self.contains(*v)).collect();
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend(self.out[&v].iter().copied());
            }
        }
        seen
    }

    /// All ancestors of `v`, including `v`.
    pub fn ancestors(&self, v: VertexId) -> Result<BTreeSet<VertexId>> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            if seen.insert(x) {
                stack.extend(self.inn[&x].iter().copied());
            }
        }
        Ok(seen)
    }

    /// Level of each descendant of `v` relative to `v`, by breadth-first search.
    pub fn levels_below(&self, v: VertexId) -> Result<BTreeMap<VertexId, usize>> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
        let mut lev = BTreeMap::from([(v, 0)]);
        let mut queue = VecDeque::from([v]);
        while let Some(x) = queue.pop_front() {
            let l = lev[&x];
            for &y in &self.out[&x] {
                lev.entry(y).or_insert_with(|| {
                    queue.push_back(y);
                    l + 1
                });
            }
        }
        Ok(lev)
    }

    /// `Γ^n(v)`.
    pub fn level_set(&self, v: VertexId, n: usize) -> Result<BTreeSet<VertexId>> {
        Ok(self.levels_below(v)?.into_iter().filter(|&(_, l)| l == n).map(|(x, _)| x).collect())
    }

    /// Members of `set` with no in-neighbour in `set`. For a descendant-closed
    /// set this is its least generating set.
    pub fn generating_set(&self, set: &BTreeSet<VertexId>) -> Vec<VertexId> {
        set.iter()
            .copied()
            .filter(|v| self.inn.get(v).is_some_and(|i| i.iter().all(|p| !set.contains(p))))
            .collect()
    }

    /// The sub-object induced on a descendant-closed set.
    pub fn induced(&self, set: &BTreeSet<VertexId>) -> Result<FgObject> {
        for &v in set {
            if let Some(w) = self.out_neighbours(v)?.iter().find(|w| !set.contains(w)) {
                return Err(Error::Precondition(format!("{{..}} is not closed: edge {v}->{w} leaves it")));
            }
        }
        let edges = set.iter().flat_map(|&a| self.out[&a].iter().map(move |&b| (a, b)));
        FgObject::new(&self.gamma, set.iter().copied(), edges.collect::<Vec<_>>())
    }

    /// Renames vertices through `rename`; unmapped vertices keep their id.
    pub fn relabeled(&self, rename: &BTreeMap<VertexId, VertexId>) -> Result<FgObject> {
        let r = |v: VertexId| rename.get(&v).copied().unwrap_or(v);
        let verts: Vec<VertexId> = self.vertices().map(r).collect();
        if verts.iter().collect::<BTreeSet<_>>().len() != verts.len() {
            return Err(Error::InvalidArgument("renaming is not injective".into()));
        }
        let edges: Vec<_> = self.edges().into_iter().map(|(a, b)| (r(a), r(b))).collect();
        FgObject::new(&self.gamma, verts, edges)
    }

    /// The cone of `v` as a layered digraph rooted at `v` (ids kept).
    pub fn cone_digraph(&self, v: VertexId) -> Result<LayeredDigraph> {
        let lev = self.levels_below(v)?;
        let depth = self.height(v)?;
        let mut levels = vec![Vec::new(); depth + 1];
        for (&x, &l) in &lev {
            if l > depth {
                return Err(bad(format!("cone of {v} is deeper than its height")));
            }
            levels[l].push(x);
        }
        let edges = lev.keys().flat_map(|&a| self.out[&a].iter().map(move |&b| (a, b)));
        LayeredDigraph::from_parts(self.m(), levels, edges.collect::<Vec<_>>())
    }

    /// Checks membership in the class: out-valency, every cone a copy of the
    /// matching truncation of Γ, and every cone ≤⁺-closed (depth-bounded proxy).
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        self.validate_cones(self.vertices())?;
        self.validate_closure()
    }

    pub(crate) fn validate_structure(&self) -> Result<()> {
        let m = self.m();
        for (&v, o) in &self.out {
            if !o.is_empty() && o.len() != m {
                return Err(bad(format!("{v} has {} out-edges, expected {m}", o.len())));
            }
        }
        Ok(())
    }

    pub(crate) fn validate_cones(&self, vs: impl IntoIterator<Item = VertexId>) -> Result<()> {
        for v in vs {
            let h = self.height(v)?;
            let f = canonical_form(&self.cone_digraph(v)?, &IsoConstraints::rooted())?;
            if f != self.gamma.form(h)? {
                return Err(bad(format!("cone of {v} is not a copy of Γ truncated at depth {h}")));
            }
        }
        Ok(())
    }

    /// Frontier descendants of each vertex, as bitsets over the frontier.
    fn frontier_bits(&self) -> BTreeMap<VertexId, Vec<u64>> {
        let index: BTreeMap<VertexId, usize> = self.frontier.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let words = self.frontier.len().div_ceil(64);
        let mut order: Vec<VertexId> = self.vertices().collect();
        order.sort_by_key(|v| self.height[v]);
        let mut bits: BTreeMap<VertexId, Vec<u64>> = BTreeMap::new();
        for v in order {
            let mut b = vec![0u64; words];
            if let Some(&i) = index.get(&v) {
                b[i / 64] |= 1 << (i % 64);
            }
            for w in &self.out[&v] {
                for (x, y) in b.iter_mut().zip(&bits[w]) {
                    *x |= y;
                }
            }
            bits.insert(v, b);
        }
        bits
    }

    /// For each vertex: every frontier descendant lies in `a`.
    fn frontier_inside(&self, a: &BTreeSet<VertexId>) -> BTreeMap<VertexId, bool> {
        let mut order: Vec<VertexId> = self.vertices().collect();
        order.sort_by_key(|x| self.height[x]);
        let mut all_in: BTreeMap<VertexId, bool> = BTreeMap::new();
        for x in order {
            let outs = &self.out[&x];
            let val = if outs.is_empty() { a.contains(&x) } else { outs.iter().all(|w| all_in[w]) };
            all_in.insert(x, val);
        }
        all_in
    }

    /// The least set containing `set` that passes [`check_subplus`]: the
    /// descendants of `set` plus every vertex whose frontier descendants all
    /// lie among them. Adding those leaves the frontier part unchanged, so one
    /// pass reaches the fixed point.
    pub fn plus_closure(&self, set: impl IntoIterator<Item = VertexId>) -> BTreeSet<VertexId> {
        let base = self.descendants_of(set);
        let all_in = self.frontier_inside(&base);
        let mut out = base;
        out.extend(all_in.into_iter().filter(|&(_, t)| t).map(|(v, _)| v));
        out
    }

    /// Every cone is ≤⁺-closed: no b outside desc(a) has all its frontier
    /// descendants inside desc(a).
    pub(crate) fn validate_closure(&self) -> Result<()> {
        let bits = self.frontier_bits();
        let subset = |x: &[u64], y: &[u64]| x.iter().zip(y).all(|(p, q)| p & !q == 0);
        let mut anc_cache: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for b in self.vertices() {
            let Some(f0) = self.descendants_of([b]).into_iter().find(|x| self.frontier.contains(x)) else {
                continue;
            };
            let above_b = self.ancestors(b)?;
            let cands = anc_cache.entry(f0).or_insert_with(|| self.ancestors(f0).unwrap());
            for &a in cands.iter() {
                if !above_b.contains(&a) && subset(&bits[&b], &bits[&a]) {
                    return Err(bad(format!(
                        "cone of {a} is not ≤⁺-closed: every frontier descendant of {b} lies in it"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn verdict(status: Status, depth: usize, witness: Option<Witness>, notes: Vec<String>) -> Verdict {
    Verdict {
        status,
        depth_checked: depth,
        witness,
        notes,
    }
}

/// `A ≤ F`: `a` is closed under descendants in `f`.
pub fn check_sub(f: &FgObject, a: &BTreeSet<VertexId>) -> Verdict {
    let depth = f.max_height();
    for &v in a {
        let Ok(outs) = f.out_neighbours(v) else {
            return verdict(Status::Fail, depth, None, vec![format!("{v} is not a vertex of the object")]);
        };
        if let Some(&w) = outs.iter().find(|w| !a.contains(w)) {
            return verdict(Status::Fail, depth, Some(Witness::Edge(v, w)), Vec::new());
        }
    }
    verdict(Status::Pass, depth, None, Vec::new())
}

/// `A ≤⁺ F` on the finite object. Condition (i) is checked through its
/// depth-bounded proxy: no b outside A has every frontier descendant in A.
/// For (ii) the least generating set of desc(g) ∩ A is reported for every
/// generator g of F.
pub fn check_subplus(f: &FgObject, a: &BTreeSet<VertexId>) -> Verdict {
    let mut v = check_sub(f, a);
    if v.status != Status::Pass {
        return v;
    }
    let all_in = f.frontier_inside(a);
    if let Some(b) = f.vertices().find(|b| !a.contains(b) && all_in[b]) {
        v.status = Status::Fail;
        v.witness = Some(Witness::Cone(b));
        v.notes.push(format!("desc({b}) \\ A does not reach the frontier"));
        return v;
    }
    let gens: Vec<String> = f
        .generators()
        .iter()
        .map(|&g| {
            let part: BTreeSet<VertexId> = f.descendants_of([g]).intersection(a).copied().collect();
            format!("{g}:{}", f.generating_set(&part).len())
        })
        .collect();
    v.notes.push(format!("generating set sizes of desc(g) ∩ A: {}", gens.join(" ")));
    v
}

/// An injective vertex map between two objects.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Embedding {
    pub map: BTreeMap<VertexId, VertexId>,
}

impl Embedding {
    pub fn identity(vs: impl IntoIterator<Item = VertexId>) -> Self {
        Embedding {
            map: vs.into_iter().map(|v| (v, v)).collect(),
        }
    }

    pub fn apply(&self, v: VertexId) -> Option<VertexId> {
        self.map.get(&v).copied()
    }

    pub fn image(&self) -> BTreeSet<VertexId> {
        self.map.values().copied().collect()
    }

    /// Checks that the map is defined on all of `source`, injective, keeps
    /// heights, preserves edges and non-edges, and has a ≤-closed image. With
    /// `plus`, the image must also pass [`check_subplus`].
    pub fn verify(&self, source: &FgObject, target: &FgObject, plus: bool) -> Result<()> {
        if !source.vertices().eq(self.map.keys().copied()) {
            return Err(bad("embedding domain differs from the source"));
        }
        let image = self.image();
        if image.len() != self.map.len() {
            return Err(bad("embedding is not injective"));
        }
        for (&x, &y) in &self.map {
            if source.height(x)? != target.height(y)? {
                return Err(bad(format!("{x}->{y} changes height")));
            }
            let want: BTreeSet<VertexId> = source.out[&x].iter().map(|w| self.map[w]).collect();
            let got: BTreeSet<VertexId> = target.out[&y].iter().copied().collect();
            if want != got {
                return Err(bad(format!("out-neighbours of {x} are not carried onto those of {y}")));
            }
        }
        if plus {
            let v = check_subplus(target, &image);
            if v.status != Status::Pass {
                let w = v.witness.map(|w| w.to_string()).unwrap_or_default();
                return Err(bad(format!("image is not ≤⁺-closed: {w}")));
            }
        }
        Ok(())
    }
}
