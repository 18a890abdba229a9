use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{bad, check_subplus, clone_over, FgObject};
use crate::canonical::engine::{find_iso, Structure};
use crate::canonical::{iso_search, IsoConstraints};
use crate::error::{Error, Result};
use crate::model::VertexId;
use crate::properties::Status;
use crate::structure::UnionFind;

/// One round of the separation loop: `b_i`, `b_{i+1}` and their overlaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub index: usize,
    pub b: VertexId,
    pub next: VertexId,
    /// `Y_i = Γ(b_i) ∩ Γ(b_{i+1})`.
    pub y: BTreeSet<VertexId>,
    /// `Z_i = Γ^n(b_i) ∩ Γ^n(b_{i+1})`.
    pub z: BTreeSet<VertexId>,
    /// The pinned pair `z ↦ w` that selected the automorphism of the cone of
    /// `b_{i-1}` used to create `b_{i+1}`. `None` for the first round, where
    /// the clone is taken over Γ(a) with the identity.
    pub h: Option<(VertexId, VertexId)>,
    /// The σ_{b_i}-classes whose union is `Z_i`.
    pub z_classes: Vec<Vec<VertexId>>,
}

#[derive(Debug, Clone)]
pub struct SeparationTrace {
    pub pair: (VertexId, VertexId),
    pub n: usize,
    pub k: usize,
    pub steps: Vec<TraceStep>,
    /// Index of the last round, where `Z_r = Y_r = ∅`.
    pub r: usize,
    /// The object after all clones.
    pub object: FgObject,
    /// Number of individual audit checks that passed.
    pub audits: usize,
}

impl fmt::Display for SeparationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pair {} {}", self.pair.0, self.pair.1)?;
        writeln!(f, "k {} K {} n {}", self.k, 2 * self.k - 1, self.n)?;
        writeln!(f, "step  b  next  |Y|  |Z|  h")?;
        for s in &self.steps {
            let h = match s.h {
                None => "identity".to_string(),
                Some((z, w)) => format!("{z}->{w}"),
            };
            writeln!(f, "{} {} {} {} {} {}", s.index, s.b, s.next, s.y.len(), s.z.len(), h)?;
        }
        writeln!(f, "r {}", self.r)?;
        writeln!(f, "vertices {}", self.object.len())?;
        writeln!(f, "audits {}", self.audits)
    }
}

fn inter(a: &BTreeSet<VertexId>, b: &BTreeSet<VertexId>) -> BTreeSet<VertexId> {
    a.intersection(b).copied().collect()
}

/// σ_b on `Γ^n(b)`: transitive closure of "cones meet".
fn sigma_classes(f: &FgObject, b: VertexId, n: usize) -> Result<Vec<BTreeSet<VertexId>>> {
    let level: Vec<VertexId> = f.level_set(b, n)?.into_iter().collect();
    let mut uf = UnionFind::new(level.len());
    let mut owner: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (i, &x) in level.iter().enumerate() {
        for y in f.descendants(x)? {
            match owner.get(&y) {
                Some(&j) => uf.union(i, j),
                None => {
                    owner.insert(y, i);
                }
            }
        }
    }
    let mut classes: Vec<BTreeSet<VertexId>> =
        uf.groups().into_iter().map(|g| g.into_iter().map(|i| level[i]).collect()).collect();
    classes.sort();
    Ok(classes)
}

/// The σ_b-classes meeting `z`, each required to lie inside `z`.
fn classes_in(f: &FgObject, b: VertexId, n: usize, z: &BTreeSet<VertexId>) -> Result<Vec<BTreeSet<VertexId>>> {
    let mut out = Vec::new();
    for c in sigma_classes(f, b, n)? {
        if c.is_disjoint(z) {
            continue;
        }
        if !c.is_subset(z) {
            return Err(bad(format!("Z is not a union of σ-classes below {b}")));
        }
        out.push(c);
    }
    Ok(out)
}

struct Auditor<'a> {
    f: &'a FgObject,
    n: usize,
    passed: usize,
}

impl Auditor<'_> {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) -> Result<()> {
        if ok {
            self.passed += 1;
            Ok(())
        } else {
            Err(bad(what()))
        }
    }

    /// Shared vertices sit at the same level below both vertices.
    fn level_agreement(&mut self, i: usize, b: VertexId, c: VertexId, y: &BTreeSet<VertexId>) -> Result<()> {
        let (lb, lc) = (self.f.levels_below(b)?, self.f.levels_below(c)?);
        let bad_x = y.iter().find(|x| lb.get(x) != lc.get(x));
        self.check(bad_x.is_none(), || format!("round {i}: {} sits at different levels", bad_x.unwrap()))
    }

    /// Y is generated by its part at most n levels below b.
    fn generation(&mut self, i: usize, b: VertexId, y: &BTreeSet<VertexId>) -> Result<()> {
        let lb = self.f.levels_below(b)?;
        let n = self.n;
        let deep = self.f.generating_set(y).into_iter().find(|g| lb[g] > n);
        self.check(deep.is_none(), || format!("round {i}: generator {} of Y lies below level {n}", deep.unwrap()))
    }

    /// Z is a union of sets that are σ-classes below every listed vertex.
    fn sigma_union(&mut self, i: usize, bs: &[VertexId], z: &BTreeSet<VertexId>) -> Result<Vec<Vec<VertexId>>> {
        let first = classes_in(self.f, bs[0], self.n, z).map_err(|e| bad(format!("round {i}: {e}")))?;
        for &b in &bs[1..] {
            let other = classes_in(self.f, b, self.n, z).map_err(|e| bad(format!("round {i}: {e}")))?;
            self.check(other == first, || format!("round {i}: σ-classes below {b} differ on Z"))?;
        }
        self.passed += 1;
        Ok(first.into_iter().map(|c| c.into_iter().collect()).collect())
    }

    /// For the first pair: X = desc(X ∩ Γ^{≤n−K}(b)), X meets level n of
    /// both in the same set, and σ-classes there agree.
    fn overlap_lemma(&mut self, b: VertexId, c: VertexId, x: &BTreeSet<VertexId>, big_k: usize) -> Result<()> {
        let n = self.n;
        let lb = self.f.levels_below(b)?;
        let top: Vec<VertexId> = x.iter().copied().filter(|v| lb[v] + big_k <= n).collect();
        self.check(self.f.descendants_of(top) == *x, || {
            format!("X is not generated within n − K = {} levels below {b}", n - big_k)
        })?;
        let (xb, xc) = (inter(x, &self.f.level_set(b, n)?), inter(x, &self.f.level_set(c, n)?));
        self.check(xb == xc, || "X meets level n below the two vertices differently".into())?;
        let (sb, sc) = (sigma_classes(self.f, b, n)?, sigma_classes(self.f, c, n)?);
        for y in &xb {
            let cb = sb.iter().find(|s| s.contains(y));
            let cc = sc.iter().find(|s| s.contains(y));
            self.check(cb == cc, || format!("σ-classes of {y} differ below {b} and {c}"))?;
        }
        Ok(())
    }
}

/// An automorphism of the cone of `b` moving `z` off itself: the first pinned
/// automorphism `min(z) ↦ w`, for `w` ascending outside `z` on level n.
fn moving_automorphism(
    f: &FgObject,
    b: VertexId,
    n: usize,
    z: &BTreeSet<VertexId>,
) -> Result<((VertexId, VertexId), BTreeMap<VertexId, VertexId>)> {
    let level = f.level_set(b, n)?;
    if z.is_superset(&level) {
        return Err(bad(format!("Z covers all of level {n} below {b}")));
    }
    let cone = f.cone_digraph(b)?;
    let z0 = *z.iter().next().unwrap();
    for &w in level.difference(z) {
        if let Some(h) = iso_search(&cone, &cone, &IsoConstraints::rooted().with_pin(z0, w))? {
            return Ok(((z0, w), h));
        }
    }
    Err(Error::TransitivityDeficit(format!(
        "no automorphism of the cone of {b} moves {z0} off Z at level {n}"
    )))
}

/// Runs the clone-and-shrink loop on `a`, `b` until the cones of two
/// consecutive vertices are disjoint, auditing every round.
///
/// `horizon` caps the sensor level `n` (default: the height of `b`).
pub fn separation_trace(
    f: &FgObject,
    a: VertexId,
    b: VertexId,
    horizon: Option<usize>,
) -> Result<SeparationTrace> {
    let k = f.gamma().system().k();
    let big_k = 2 * k - 1;
    let (da, db) = (f.descendants(a)?, f.descendants(b)?);
    if a == b || da.contains(&b) || db.contains(&a) {
        return Err(Error::Precondition(format!("{a} and {b} must be distinct and neither below the other")));
    }
    let x = inter(&da, &db);
    if x.is_empty() {
        return Err(Error::Precondition(format!(
            "cones of {a} and {b} are already disjoint; use a disjoint witness instead"
        )));
    }

    let big_b = f.plus_closure([a, b]);
    let identity = da.iter().map(|&v| (v, v)).collect();
    let (mut obj, s) = clone_over(f, &da, &big_b, &identity)?;
    let mut bs = vec![a, b, s.map[&b]];

    let lb = obj.levels_below(b)?;
    let deepest = obj.generating_set(&x).iter().map(|g| lb[g]).max().unwrap();
    let n = big_k.max(deepest + big_k);
    let limit = horizon.unwrap_or(obj.height(b)?).min(obj.height(b)?);
    if n > limit {
        return Err(Error::HorizonOutOfRange(format!(
            "sensor level {n} exceeds the horizon {limit}"
        )));
    }

    let mut audit = Auditor { f: &obj, n, passed: 0 };
    let y1 = inter(&obj.descendants(bs[1])?, &obj.descendants(bs[2])?);
    audit.check(y1 == x, || "the first clone changed the overlap".into())?;
    audit.overlap_lemma(bs[1], bs[2], &x, big_k)?;
    let mut passed = audit.passed;

    let mut steps: Vec<TraceStep> = Vec::new();
    let mut pending_h = None;
    let cap = x.len() + 2;
    let mut i = 1;
    loop {
        let (bi, bn) = (bs[i], bs[i + 1]);
        let mut audit = Auditor { f: &obj, n, passed: 0 };
        let y = inter(&obj.descendants(bi)?, &obj.descendants(bn)?);
        let z = inter(&obj.level_set(bi, n)?, &obj.level_set(bn, n)?);
        audit.level_agreement(i, bi, bn, &y)?;
        audit.generation(i, bi, &y)?;
        if i >= 2 {
            let prev = &steps[i - 2];
            audit.check(y.is_subset(&obj.descendants(bs[i - 1])?), || format!("round {i}: Y escapes the previous cone"))?;
            audit.check(z.is_subset(&prev.z) && z != prev.z, || {
                format!("round {i}: Z did not shrink ({} -> {})", prev.z.len(), z.len())
            })?;
        }
        let z_classes = audit.sigma_union(i, &bs[1..=i + 1], &z)?;
        passed += audit.passed;
        steps.push(TraceStep {
            index: i,
            b: bi,
            next: bn,
            y: y.clone(),
            z: z.clone(),
            h: pending_h,
            z_classes,
        });
        if z.is_empty() {
            if !y.is_empty() {
                return Err(bad(format!("round {i}: Z is empty but the cones still meet")));
            }
            break;
        }
        if i >= cap {
            return Err(bad("Z failed to shrink to the empty set"));
        }
        let (pin, h) = moving_automorphism(&obj, bi, n, &z)?;
        let a_set = obj.descendants(bi)?;
        // the union of the two cones can miss vertices whose cones it covers
        let b_set = obj.plus_closure([bi, bn]);
        let (next_obj, s) = clone_over(&obj, &a_set, &b_set, &h)?;
        obj = next_obj;
        bs.push(s.map[&bn]);
        pending_h = Some(pin);
        i += 1;
    }
    Ok(SeparationTrace {
        pair: (a, b),
        n,
        k,
        r: i,
        steps,
        object: obj,
        audits: passed,
    })
}

/// A witness that two ordered pairs lie in one orbit of the limit's
/// automorphism group: an isomorphism between ≤⁺-closed envelopes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitCertificate {
    pub pairs: ((VertexId, VertexId), (VertexId, VertexId)),
    pub envelope_iso: BTreeMap<VertexId, VertexId>,
}

impl OrbitCertificate {
    /// Re-checks the certificate against `f` without the search engine.
    pub fn verify(&self, f: &FgObject) -> Result<()> {
        let ((u, v), (a, b)) = self.pairs;
        let m = &self.envelope_iso;
        if m.get(&u) != Some(&a) || m.get(&v) != Some(&b) {
            return Err(bad("certificate does not carry the pairs"));
        }
        let e1 = f.plus_closure([u, v]);
        let e2 = f.plus_closure([a, b]);
        if !m.keys().eq(e1.iter()) || m.values().copied().collect::<BTreeSet<_>>() != e2 {
            return Err(bad("certificate is not a bijection between the envelopes"));
        }
        for &x in &e1 {
            let img: BTreeSet<VertexId> = f.out_neighbours(x)?.iter().map(|w| m[w]).collect();
            if !img.iter().eq(f.out_neighbours(m[&x])?.iter()) {
                return Err(bad(format!("certificate breaks the edges at {x}")));
            }
        }
        Ok(())
    }
}

fn envelope_structure(f: &FgObject, env: &BTreeSet<VertexId>) -> Result<(Structure, Vec<VertexId>)> {
    let verts: Vec<VertexId> = env.iter().copied().collect();
    let local: BTreeMap<VertexId, u32> = verts.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    let labels = verts.iter().map(|&v| f.height(v).map(|h| h as u64)).collect::<Result<Vec<_>>>()?;
    let mut s = Structure::with_labels(labels);
    for &v in &verts {
        for w in f.out_neighbours(v)? {
            s.add_edge(local[&v], local[w]);
        }
    }
    s.finish();
    Ok((s, verts))
}

/// Looks for an isomorphism between the ≤⁺-closures of `{u, v}` and `{a, b}`
/// with `u ↦ a`, `v ↦ b`. `None` is inconclusive, not a disproof.
pub fn orbit_certificate(
    f: &FgObject,
    (u, v): (VertexId, VertexId),
    (a, b): (VertexId, VertexId),
) -> Result<Option<OrbitCertificate>> {
    for x in [u, v, a, b] {
        if !f.contains(x) {
            return Err(Error::UnknownVertex(x));
        }
    }
    let pairs = ((u, v), (a, b));
    let e1 = f.plus_closure([u, v]);
    if (u, v) == (a, b) {
        let cert = OrbitCertificate {
            pairs,
            envelope_iso: e1.iter().map(|&x| (x, x)).collect(),
        };
        return Ok(Some(cert));
    }
    let e2 = f.plus_closure([a, b]);
    if e1.len() != e2.len() || (u == v) != (a == b) {
        return Ok(None);
    }
    if check_subplus(f, &e1).status != Status::Pass || check_subplus(f, &e2).status != Status::Pass {
        return Err(bad("≤⁺-closure failed its own check"));
    }
    let (s1, v1) = envelope_structure(f, &e1)?;
    let (s2, v2) = envelope_structure(f, &e2)?;
    let at = |vs: &[VertexId], x: VertexId| vs.binary_search(&x).unwrap() as u32;
    let mut pins = vec![(at(&v1, u), at(&v2, a))];
    if u != v {
        pins.push((at(&v1, v), at(&v2, b)));
    }
    let Some(map) = find_iso(&s1, &s2, &pins) else {
        return Ok(None);
    };
    let cert = OrbitCertificate {
        pairs,
        envelope_iso: v1.iter().enumerate().map(|(i, &x)| (x, v2[map[i] as usize])).collect(),
    };
    cert.verify(f)?;
    Ok(Some(cert))
}
