use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::{bad, check_subplus, Embedding, FgObject, Gamma};
use crate::canonical::{iso_search, IsoConstraints};
use crate::error::{Error, Result};
use crate::format::{parse_id, parse_usize, perr, Lines};
use crate::model::{ExpansionSystem, VertexId};
use crate::properties::Status;

/// The result of a free amalgamation: the new object and where each input
/// landed in it.
#[derive(Debug, Clone)]
pub struct Amalgam {
    pub object: FgObject,
    pub left: Embedding,
    pub right: Embedding,
}

fn require_subplus(f: &FgObject, a: &BTreeSet<VertexId>, what: &str) -> Result<()> {
    let v = check_subplus(f, a);
    if v.status == Status::Pass {
        return Ok(());
    }
    let w = v.witness.map(|w| format!(" ({w})")).unwrap_or_default();
    Err(Error::Precondition(format!("{what} is not ≤⁺-closed{w}")))
}

/// Free amalgam of `b1` and `b2` over `a ⊆ b1`, identified with a subset of
/// `b2` through `f`. Vertices of `b1` keep their ids; the rest of `b2` gets
/// fresh ids in ascending order.
pub fn free_amalgam(
    b1: &FgObject,
    b2: &FgObject,
    a: &BTreeSet<VertexId>,
    f: &BTreeMap<VertexId, VertexId>,
) -> Result<Amalgam> {
    if b1.gamma.sys != b2.gamma.sys {
        return Err(Error::Precondition("the two objects are built over different systems".into()));
    }
    if !f.keys().eq(a.iter()) {
        return Err(Error::Precondition("embedding disagreement: map domain differs from A".into()));
    }
    require_subplus(b1, a, "A in B1")?;
    let fa: BTreeSet<VertexId> = f.values().copied().collect();
    require_subplus(b2, &fa, "f(A) in B2")?;
    Embedding { map: f.clone() }
        .verify(&b1.induced(a)?, b2, false)
        .map_err(|e| Error::Precondition(format!("embedding disagreement: {e}")))?;

    let back: BTreeMap<VertexId, VertexId> = f.iter().map(|(&x, &y)| (y, x)).collect();
    let mut next = b1.next_id();
    let mut right = BTreeMap::new();
    for y in b2.vertices() {
        let z = match back.get(&y) {
            Some(&x) => x,
            None => {
                next += 1;
                VertexId(next - 1)
            }
        };
        right.insert(y, z);
    }
    let mut edges: BTreeSet<(VertexId, VertexId)> = b1.edges().into_iter().collect();
    edges.extend(b2.edges().into_iter().map(|(x, y)| (right[&x], right[&y])));
    let verts: BTreeSet<VertexId> = b1.vertices().chain(right.values().copied()).collect();
    let object = FgObject::new(&b1.gamma, verts, edges)?;

    if object.len() != b1.len() + b2.len() - a.len() {
        return Err(bad(format!(
            "size identity fails: {} != {} + {} - {}",
            object.len(),
            b1.len(),
            b2.len(),
            a.len()
        )));
    }
    let left = Embedding::identity(b1.vertices());
    let right = Embedding { map: right };
    // Each vertex keeps exactly its out-list from one side, so each cone of F is
    // a cone of B1 or B2 and needs no fresh comparison against Γ.
    left.verify(b1, &object, false)?;
    right.verify(b2, &object, false)?;
    object.validate_structure()?;
    for (e, name) in [(&left, "B1"), (&right, "B2")] {
        if check_subplus(&object, &e.image()).status != Status::Pass {
            return Err(bad(format!("{name} is not ≤⁺-closed in the amalgam")));
        }
    }
    object
        .validate_closure()
        .map_err(|e| Error::Precondition(format!("invalid input triple: {e}")))?;
    Ok(Amalgam { object, left, right })
}

/// One task of the chain construction: amalgamate `b` over `a ≤⁺ dn`, with `a`
/// sent into `b` by `f`. Returns the new object and the embedding of `b`.
pub fn extend_task(
    dn: &FgObject,
    a: &BTreeSet<VertexId>,
    f: &BTreeMap<VertexId, VertexId>,
    b: &FgObject,
) -> Result<(FgObject, Embedding)> {
    let am = free_amalgam(dn, b, a, f)?;
    Ok((am.object, am.right))
}

/// A schedule entry for [`build_limit_approx`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Task {
    /// Give the vertex a new in-neighbour whose other children are fresh.
    AddInNeighbour(VertexId),
    /// Add a disjoint copy of Γ at the build depth.
    AddFreshCopy,
    /// Amalgamate a copy of Γ over the cone of the vertex, placed `lift`
    /// levels below the new root.
    AmalgamateOverCone(VertexId, usize),
    /// [`Task::AddInNeighbour`] for every vertex present when the step starts.
    AddInNeighbourAll,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::AddInNeighbour(v) => write!(f, "add-in-neighbour {v}"),
            Task::AddFreshCopy => f.write_str("add-fresh-copy"),
            Task::AmalgamateOverCone(v, l) => write!(f, "amalgamate-over-cone {v} {l}"),
            Task::AddInNeighbourAll => f.write_str("add-in-neighbour-all"),
        }
    }
}

/// One line per task; blank lines and `#` comments are skipped.
pub fn parse_schedule(text: &str) -> Result<Vec<Task>> {
    let mut lines = Lines::new(text);
    let mut out = Vec::new();
    while let Some((n, line)) = lines.next() {
        let w: Vec<&str> = line.split_whitespace().collect();
        let task = match w.as_slice() {
            ["add-in-neighbour", v] => Task::AddInNeighbour(parse_id(n, v)?),
            ["add-fresh-copy"] => Task::AddFreshCopy,
            ["amalgamate-over-cone", v, l] => Task::AmalgamateOverCone(parse_id(n, v)?, parse_usize(n, l)?),
            ["add-in-neighbour-all"] => Task::AddInNeighbourAll,
            _ => return Err(perr(n, format!("unknown task {line:?}"))),
        };
        out.push(task);
    }
    Ok(out)
}

/// Size bookkeeping for one amalgamation step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub step: usize,
    pub task: Task,
    pub before: usize,
    pub added: usize,
    pub shared: usize,
    pub after: usize,
}

#[derive(Debug, Clone)]
pub struct LimitApprox {
    pub object: FgObject,
    pub steps: Vec<StepRecord>,
}

fn over_cone(dn: &FgObject, v: VertexId, lift: usize) -> Result<(FgObject, Embedding, usize, usize)> {
    let h = dn.height(v)?;
    let b = FgObject::truncation_of(&dn.gamma, h + lift)?;
    let root = b.generators()[0];
    let c = *b.level_set(root, lift)?.iter().next().unwrap();
    let iso = iso_search(&dn.cone_digraph(v)?, &b.cone_digraph(c)?, &IsoConstraints::rooted())?
        .ok_or_else(|| bad(format!("cone of {v} is not a copy of Γ")))?;
    let a = dn.descendants(v)?;
    let (obj, g) = extend_task(dn, &a, &iso, &b)?;
    Ok((obj, g, b.len(), a.len()))
}

fn fresh_copy(dn: &FgObject, depth: usize) -> Result<(FgObject, Embedding, usize, usize)> {
    let b = FgObject::from_gamma_with(&dn.gamma, depth)?;
    let (obj, g) = extend_task(dn, &BTreeSet::new(), &BTreeMap::new(), &b)?;
    Ok((obj, g, b.len(), 0))
}

/// Runs one schedule entry on `object`, recording each amalgamation it makes.
/// Fresh copies are built at `depth`.
pub fn apply_task(object: &FgObject, step: usize, task: &Task, depth: usize) -> Result<(FgObject, Vec<StepRecord>)> {
    let jobs: Vec<(Option<VertexId>, usize)> = match task {
        Task::AddInNeighbour(v) => vec![(Some(*v), 1)],
        Task::AmalgamateOverCone(v, l) => vec![(Some(*v), *l)],
        Task::AddFreshCopy => vec![(None, 0)],
        Task::AddInNeighbourAll => object.vertices().map(|v| (Some(v), 1)).collect(),
    };
    let mut object = object.clone();
    let mut records = Vec::new();
    for (v, lift) in jobs {
        let before = object.len();
        let (next, _, added, shared) = match v {
            Some(v) => over_cone(&object, v, lift)?,
            None => fresh_copy(&object, depth)?,
        };
        records.push(StepRecord {
            step,
            task: task.clone(),
            before,
            added,
            shared,
            after: next.len(),
        });
        object = next;
    }
    Ok((object, records))
}

/// Folds the schedule over `from_gamma(sys, depth)`. A failing task aborts
/// with its (0-based) step index.
pub fn build_limit_approx(sys: &ExpansionSystem, schedule: &[Task], depth: usize) -> Result<LimitApprox> {
    let gamma: Arc<Gamma> = Gamma::new(sys.clone());
    let mut object = FgObject::from_gamma_with(&gamma, depth)?;
    let mut steps = Vec::new();
    for (i, task) in schedule.iter().enumerate() {
        let (next, records) = apply_task(&object, i, task, depth).map_err(|e| Error::AtStep {
            step: i,
            inner: Box::new(e),
        })?;
        object = next;
        steps.extend(records);
    }
    Ok(LimitApprox { object, steps })
}

/// Clones `b` over `a`: adds a copy `B′` of `b` meeting it exactly in `a`,
/// with the bijection `s: B → B′` extending the automorphism `h` of `a`.
/// Returns the enlarged object and `s`.
pub fn clone_over(
    f: &FgObject,
    a: &BTreeSet<VertexId>,
    b: &BTreeSet<VertexId>,
    h: &BTreeMap<VertexId, VertexId>,
) -> Result<(FgObject, Embedding)> {
    if !a.is_subset(b) {
        return Err(Error::Precondition("A is not contained in B".into()));
    }
    if !h.keys().eq(a.iter()) || h.values().copied().collect::<BTreeSet<_>>() != *a {
        return Err(Error::InvalidArgument("h is not an automorphism of A: not a permutation of A".into()));
    }
    for &x in a {
        let img: BTreeSet<VertexId> = f.out_neighbours(x)?.iter().map(|w| h[w]).collect();
        if !img.iter().eq(f.out_neighbours(h[&x])?.iter()) {
            return Err(Error::InvalidArgument(format!("h is not an automorphism of A: breaks the edges at {x}")));
        }
    }
    require_subplus(f, b, "B in F")?;
    let b_obj = f.induced(b)?;
    require_subplus(&b_obj, a, "A in B")?;

    let mut s0 = h.clone();
    let base = f.next_id();
    for (i, &x) in b.difference(a).enumerate() {
        s0.insert(x, VertexId(base + i as u32));
    }
    let b_prime = b_obj.relabeled(&s0)?;
    let am = free_amalgam(f, &b_prime, a, &a.iter().map(|&x| (x, x)).collect())?;
    let s = Embedding {
        map: s0.iter().map(|(&x, &y)| (x, am.right.map[&y])).collect(),
    };

    let sb = s.image();
    if b.intersection(&sb).copied().collect::<BTreeSet<_>>() != *a {
        return Err(bad("B ∩ sB differs from A"));
    }
    if a.iter().any(|x| s.map[x] != h[x]) {
        return Err(bad("s does not extend h"));
    }
    s.verify(&b_obj, &am.object, true)?;
    Ok((am.object, s))
}

/// Adds a fresh copy of Γ (as deep as the deeper of `a`, `b`) and returns its
/// generator `c`, whose cone misses both cones.
pub fn disjoint_witness(f: &FgObject, a: VertexId, b: VertexId) -> Result<(FgObject, VertexId)> {
    let depth = f.height(a)?.max(f.height(b)?);
    let copy = FgObject::truncation_of(&f.gamma, depth)?;
    let am = free_amalgam(f, &copy, &BTreeSet::new(), &BTreeMap::new())?;
    let c = am.right.map[&copy.generators()[0]];
    let dc = am.object.descendants(c)?;
    for x in [a, b] {
        if !dc.is_disjoint(&am.object.descendants(x)?) {
            return Err(bad(format!("cone of the witness meets the cone of {x}")));
        }
    }
    Ok((am.object, c))
}
