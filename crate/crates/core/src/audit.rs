//! Brute-force checks of the structural lemmas on a truncation. Each check
//! recomputes what it needs from descendant and ancestor sets.

use std::collections::BTreeSet;

use rand::{Rng, RngExt};

use crate::model::{LayeredDigraph, VertexId};
use crate::structure::{rho_partition, sigma_partition};

pub struct Audit<'a> {
    g: &'a LayeredDigraph,
    k: usize,
    desc: Vec<BTreeSet<VertexId>>,
    rho_key: Vec<BTreeSet<VertexId>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    /// Meeting cones force descent: x ∈ Γ^ℓ(β).
    DescentDepth,
    /// [w]_ρ ⊆ Γ(𝐯) for w one level below a ρ-class 𝐯.
    ClassClosure,
    /// ρ computed in a cone agrees with ρ computed in the whole digraph.
    LocalRho,
    /// Deep descendant levels are unions of ρ-classes.
    UnionOfClasses,
    /// σ refines ρ.
    SigmaInRho,
}

impl<'a> Audit<'a> {
    pub fn new(g: &'a LayeredDigraph, k: usize) -> Self {
        let desc = g.vertices().map(|v| g.descendants(v, None).unwrap()).collect();
        let rho_key = g
            .vertices()
            .map(|v| {
                let l = g.level_of(v).unwrap();
                if l + 1 >= k {
                    g.ancestors_at(v, k - 1).unwrap()
                } else {
                    BTreeSet::new()
                }
            })
            .collect();
        Audit { g, k, desc, rho_key }
    }

    fn i(&self, v: VertexId) -> usize {
        self.g.idx(v).unwrap()
    }

    fn level(&self, v: VertexId) -> usize {
        self.g.level_of(v).unwrap()
    }

    fn rho_class(&self, x: VertexId) -> BTreeSet<VertexId> {
        let key = &self.rho_key[self.i(x)];
        self.g
            .level(self.level(x))
            .iter()
            .copied()
            .filter(|&y| &self.rho_key[self.i(y)] == key)
            .collect()
    }

    /// For β above x by at least k levels: if their cones meet, x ∈ Γ(β).
    pub fn descent_depth(&self, beta: VertexId, x: VertexId) -> Result<bool, String> {
        let (lb, lx) = (self.level(beta), self.level(x));
        if lx < lb + self.k {
            return Ok(false);
        }
        let (db, dx) = (&self.desc[self.i(beta)], &self.desc[self.i(x)]);
        if db.is_disjoint(dx) {
            return Ok(false);
        }
        if db.contains(&x) {
            Ok(true)
        } else {
            Err(format!("cones of {beta} and {x} meet but {x} is not below {beta}"))
        }
    }

    /// For the ρ-class of `v` (level ≥ k) and each out-neighbour w of the
    /// class, [w]_ρ lies in the class's cone.
    pub fn class_closure(&self, v: VertexId) -> Result<bool, String> {
        if self.level(v) < self.k || self.level(v) == self.g.depth() {
            return Ok(false);
        }
        let class = self.rho_class(v);
        let cone: BTreeSet<VertexId> = class.iter().flat_map(|&c| self.desc[self.i(c)].iter().copied()).collect();
        for &c in &class {
            for w in self.g.out_neighbours(c).unwrap() {
                if let Some(y) = self.rho_class(w).into_iter().find(|y| !cone.contains(y)) {
                    return Err(format!("{y} ρ-related to {w} escapes the cone of [{v}]"));
                }
            }
        }
        Ok(true)
    }

    /// For x at least 2k − 1 levels below β: ρ-class of x inside cone(β)
    /// equals its ρ-class in the digraph.
    pub fn local_rho(&self, beta: VertexId, x: VertexId) -> Result<bool, String> {
        let (lb, lx) = (self.level(beta), self.level(x));
        if lx < lb + 2 * self.k - 1 || !self.desc[self.i(beta)].contains(&x) {
            return Ok(false);
        }
        // Inside cone(β), ancestors k − 1 levels up are those of the whole
        // digraph that lie in desc(β): every path down from them stays there.
        let db = &self.desc[self.i(beta)];
        let local_key = |y: VertexId| -> BTreeSet<VertexId> { self.rho_key[self.i(y)].intersection(db).copied().collect() };
        let kx = local_key(x);
        let local: BTreeSet<VertexId> = self
            .g
            .level(lx)
            .iter()
            .copied()
            .filter(|y| db.contains(y) && local_key(*y) == kx)
            .collect();
        if local == self.rho_class(x) {
            Ok(true)
        } else {
            Err(format!("ρ-class of {x} differs inside cone({beta})"))
        }
    }

    /// desc(x) ∩ L_{level(x)+ℓ} is a union of ρ-classes for ℓ ≥ 2k − 1.
    pub fn union_of_classes(&self, x: VertexId, l: usize) -> Result<bool, String> {
        let target = self.level(x) + l;
        if l < 2 * self.k - 1 || target > self.g.depth() {
            return Ok(false);
        }
        let layer: BTreeSet<VertexId> = self.desc[self.i(x)]
            .iter()
            .copied()
            .filter(|&y| self.level(y) == target)
            .collect();
        for &y in &layer {
            if !self.rho_class(y).is_subset(&layer) {
                return Err(format!("desc({x}) at level {target} cuts the ρ-class of {y}"));
            }
        }
        Ok(true)
    }

    /// σ (at the full horizon) refines ρ on level `l`.
    pub fn sigma_in_rho(&self, l: usize) -> Result<bool, String> {
        if l < self.k {
            return Ok(false);
        }
        let rho = rho_partition(self.g, self.k, l).map_err(|e| e.to_string())?;
        let sigma = sigma_partition(self.g, l, self.g.depth()).map_err(|e| e.to_string())?;
        for c in &sigma.classes {
            let r = rho.class_of[&c[0]];
            if c.iter().any(|v| rho.class_of[v] != r) {
                return Err(format!("σ-class of {} at level {l} spans several ρ-classes", c[0]));
            }
        }
        Ok(true)
    }

    /// Every applicable instance of every lemma. Returns the number of
    /// instances checked.
    pub fn exhaustive(&self) -> Result<usize, String> {
        let vs: Vec<VertexId> = self.g.vertices().collect();
        let mut n = 0;
        for &a in &vs {
            for &b in &vs {
                n += self.descent_depth(a, b)? as usize;
                n += self.local_rho(a, b)? as usize;
            }
            n += self.class_closure(a)? as usize;
            for l in 0..=self.g.depth() {
                n += self.union_of_classes(a, l)? as usize;
            }
        }
        for l in 0..=self.g.depth() {
            n += self.sigma_in_rho(l)? as usize;
        }
        Ok(n)
    }

    /// Checks `lemma` on `draws` random instances. Returns how many of the
    /// draws were applicable.
    pub fn random(&self, lemma: Lemma, rng: &mut impl Rng, draws: usize) -> Result<usize, String> {
        let vs: Vec<VertexId> = self.g.vertices().collect();
        let d = self.g.depth();
        let mut applicable = 0;
        for _ in 0..draws {
            let a = vs[rng.random_range(0..vs.len())];
            let b = vs[rng.random_range(0..vs.len())];
            let hit = match lemma {
                Lemma::DescentDepth => self.descent_depth(a, b)?,
                Lemma::ClassClosure => self.class_closure(a)?,
                Lemma::LocalRho => {
                    // pick x below a to make the draw applicable more often
                    let below: Vec<VertexId> = self.desc[self.i(a)].iter().copied().collect();
                    self.local_rho(a, below[rng.random_range(0..below.len())])?
                }
                Lemma::UnionOfClasses => self.union_of_classes(a, rng.random_range(0..=d))?,
                Lemma::SigmaInRho => self.sigma_in_rho(rng.random_range(0..=d))?,
            };
            applicable += hit as usize;
        }
        Ok(applicable)
    }
}
