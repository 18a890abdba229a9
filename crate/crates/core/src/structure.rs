//! The ρ and σ relations, the ρ-quotient, and coloured T-structures.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::canonical::{encode, encoded_iso, tag_colour, tag_fixed, tag_plain, Encoding};
use crate::error::{Error, Result};
use crate::model::{LayeredDigraph, VertexId};

/// ρ-classes of level `l` (dense indices), ordered by least member.
pub(crate) fn rho_classes_dense(g: &LayeredDigraph, k: usize, l: usize) -> Vec<Vec<usize>> {
    let mut by_anc: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for x in g.level_range(l) {
        by_anc.entry(g.anc_at_dense(x, k - 1)).or_default().push(x);
    }
    let mut classes: Vec<Vec<usize>> = by_anc.into_values().collect();
    classes.sort();
    classes
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoPartition {
    pub level: usize,
    pub k: usize,
    pub classes: Vec<Vec<VertexId>>,
    pub class_of: BTreeMap<VertexId, usize>,
}

impl RhoPartition {
    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }
}

pub fn rho_partition(g: &LayeredDigraph, k: usize, level: usize) -> Result<RhoPartition> {
    if k == 0 || level < k {
        return Err(Error::RhoUndefined { level, k });
    }
    if level > g.depth() {
        return Err(Error::InvalidArgument(format!("level {level} beyond depth {}", g.depth())));
    }
    let classes: Vec<Vec<VertexId>> = rho_classes_dense(g, k, level)
        .into_iter()
        .map(|c| c.into_iter().map(|v| g.id(v)).collect())
        .collect();
    let class_of = classes
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&v| (v, i)))
        .collect();
    Ok(RhoPartition {
        level,
        k,
        classes,
        class_of,
    })
}

/// Union-find closure of "visible cones intersect", an under-approximation of
/// σ: intersections below the horizon are invisible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaPartition {
    pub level: usize,
    pub witness_depth: usize,
    pub classes: Vec<Vec<VertexId>>,
    /// Whether the partition is the same with horizon `witness_depth − 1`;
    /// `None` when that horizon is below the level.
    pub stable: Option<bool>,
}

impl SigmaPartition {
    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }
}

pub(crate) struct UnionFind(Vec<usize>);

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.0[hi] = lo;
        }
    }

    /// Groups of `0..n` by representative, ordered by least member.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.0.len() {
            let r = self.find(x);
            map.entry(r).or_default().push(x);
        }
        map.into_values().collect()
    }
}

/// σ-classes of the vertices `xs` (dense indices at one level): the closure of
/// sharing a descendant at level `horizon`.
pub(crate) fn sigma_classes_dense(g: &LayeredDigraph, xs: &[usize], horizon: usize) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(xs.len());
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (i, &x) in xs.iter().enumerate() {
        let depth = horizon - g.dense_level(x);
        for z in g.desc_dense(x, Some(depth)) {
            if g.dense_level(z) != horizon {
                continue;
            }
            match owner.get(&z) {
                Some(&j) => uf.union(i, j),
                None => {
                    owner.insert(z, i);
                }
            }
        }
    }
    uf.groups()
        .into_iter()
        .map(|grp| grp.into_iter().map(|i| xs[i]).collect())
        .collect()
}

pub fn sigma_partition(g: &LayeredDigraph, level: usize, witness_depth: usize) -> Result<SigmaPartition> {
    if witness_depth < level || witness_depth > g.depth() {
        return Err(Error::HorizonOutOfRange(format!(
            "witness depth {witness_depth} outside {level}..={}",
            g.depth()
        )));
    }
    let xs: Vec<usize> = g.level_range(level).collect();
    let classes = sigma_classes_dense(g, &xs, witness_depth);
    let stable = (witness_depth > level).then(|| sigma_classes_dense(g, &xs, witness_depth - 1) == classes);
    Ok(SigmaPartition {
        level,
        witness_depth,
        classes: classes
            .into_iter()
            .map(|c| c.into_iter().map(|v| g.id(v)).collect())
            .collect(),
        stable,
    })
}

/// ρ-classes from some level down, with the class digraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    pub from_level: usize,
    /// `(level, members)` ordered by level then least member.
    pub classes: Vec<(usize, Vec<VertexId>)>,
    pub edges: Vec<(usize, usize)>,
    pub is_tree: bool,
    /// A class below the top level whose number of parent classes is not one.
    pub witness: Option<(usize, Vec<usize>)>,
}

pub fn quotient(g: &LayeredDigraph, k: usize, from_level: usize) -> Result<Quotient> {
    if k == 0 || from_level < k {
        return Err(Error::RhoUndefined { level: from_level, k });
    }
    let mut classes = Vec::new();
    let mut class_of: HashMap<usize, usize> = HashMap::new();
    for l in from_level..=g.depth() {
        for c in rho_classes_dense(g, k, l) {
            for &v in &c {
                class_of.insert(v, classes.len());
            }
            classes.push((l, c));
        }
    }
    let mut edges = BTreeSet::new();
    for (ci, (_, members)) in classes.iter().enumerate() {
        for &v in members {
            for w in g.dense_out(v) {
                edges.insert((ci, class_of[w]));
            }
        }
    }
    let mut witness = None;
    for (ci, (l, _)) in classes.iter().enumerate() {
        if *l == from_level {
            continue;
        }
        let parents: Vec<usize> = edges.iter().filter(|e| e.1 == ci).map(|e| e.0).collect();
        if parents.len() != 1 {
            witness = Some((ci, parents));
            break;
        }
    }
    Ok(Quotient {
        from_level,
        classes: classes
            .into_iter()
            .map(|(l, c)| (l, c.into_iter().map(|v| g.id(v)).collect()))
            .collect(),
        edges: edges.into_iter().collect(),
        is_tree: witness.is_none(),
        witness,
    })
}

/// One ρ-class of a T-structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoClass {
    pub level: usize,
    pub members: Vec<VertexId>,
    pub colour: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct DenseClass {
    pub members: Vec<usize>,
    pub colour: usize,
}

/// Levels from `base_level` down of a layered digraph, with ρ and a colouring
/// of the ρ-classes by the base classes.
#[derive(Debug, Clone)]
pub struct TStructure {
    pub(crate) graph: LayeredDigraph,
    pub(crate) k: usize,
    pub(crate) base_level: usize,
    /// Classes per relative level; index 0 is T^0.
    pub(crate) levels: Vec<Vec<DenseClass>>,
    pub(crate) vertices: BTreeSet<usize>,
}

impl TStructure {
    pub fn k(&self) -> usize {
        self.k
    }

    /// The constant K = 2k − 1, also the absolute level of T^0.
    pub fn big_k(&self) -> usize {
        2 * self.k - 1
    }

    pub fn base_level(&self) -> usize {
        self.base_level
    }

    /// Number of levels below T^0.
    pub fn available_depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn base(&self) -> Vec<VertexId> {
        self.levels[0]
            .iter()
            .flat_map(|c| c.members.iter().map(|&v| self.graph.id(v)))
            .collect()
    }

    pub fn base_classes(&self) -> Vec<RhoClass> {
        self.classes_at(0)
    }

    /// Classes at relative level `r`.
    pub fn classes_at(&self, r: usize) -> Vec<RhoClass> {
        self.levels
            .get(r)
            .map(|cs| {
                cs.iter()
                    .map(|c| RhoClass {
                        level: self.base_level + r,
                        members: c.members.iter().map(|&v| self.graph.id(v)).collect(),
                        colour: c.colour,
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn colour_count(&self) -> usize {
        self.levels
            .iter()
            .flatten()
            .map(|c| c.colour)
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn graph(&self) -> &LayeredDigraph {
        &self.graph
    }

    /// Vertices of T(𝐯) down to relative depth `d`, ascending.
    pub(crate) fn class_cone(&self, members: &[usize], d: usize) -> Vec<usize> {
        let mut out = BTreeSet::new();
        for &v in members {
            out.extend(self.graph.desc_dense(v, Some(d)));
        }
        out.into_iter().filter(|v| self.vertices.contains(v)).collect()
    }

    /// Vertices of the ball B^d: T^0..T^d.
    pub(crate) fn ball_vertices(&self, d: usize) -> Vec<usize> {
        self.vertices
            .iter()
            .copied()
            .filter(|&v| self.graph.dense_level(v) <= self.base_level + d)
            .collect()
    }

    /// Classes restricted to `verts`, tagged plainly or by translated colour.
    fn class_tags(&self, verts: &BTreeSet<usize>, colours: Option<&[usize]>) -> Vec<(Vec<usize>, u64)> {
        let mut out = Vec::new();
        for c in self.levels.iter().flatten() {
            let members: Vec<usize> = c.members.iter().copied().filter(|v| verts.contains(v)).collect();
            if !members.is_empty() {
                let tag = match colours {
                    Some(map) => tag_colour(map[c.colour]),
                    None => tag_plain(),
                };
                out.push((members, tag));
            }
        }
        out
    }

    /// Encoding of `verts` with ρ, and with colours translated through
    /// `colours` if given; when `fix_base`, each base class additionally
    /// carries a tag of its own.
    pub(crate) fn encode_part(&self, verts: &[usize], colours: Option<&[usize]>, fix_base: bool) -> Encoding {
        let set: BTreeSet<usize> = verts.iter().copied().collect();
        let mut tags = self.class_tags(&set, colours);
        if fix_base {
            for (i, c) in self.levels[0].iter().enumerate() {
                let members: Vec<usize> = c.members.iter().copied().filter(|v| set.contains(v)).collect();
                if !members.is_empty() {
                    tags.push((members, tag_fixed(i)));
                }
            }
        }
        let base = verts.first().map(|&v| self.graph.dense_level(v)).unwrap_or(0);
        encode(&self.graph, verts, base, &tags)
    }

    /// Vertices of B^d in id order within levels.
    pub fn ball(&self, d: usize) -> Vec<VertexId> {
        self.ball_vertices(d).into_iter().map(|v| self.graph.id(v)).collect()
    }

    /// Levels ≥ 2k − 1 with all their ρ-classes as base and every class given
    /// colour 0, skipping the colouring step. Meant for inspecting the group
    /// chain of digraphs that are not truncations of a descent graph.
    pub fn single_colour(g: &LayeredDigraph, k: usize) -> Result<Self> {
        if k == 0 || g.depth() < 2 * k {
            return Err(Error::InsufficientDepth(format!("need depth {} for k = {k}", 2 * k)));
        }
        let base_level = 2 * k - 1;
        let levels: Vec<Vec<DenseClass>> = (base_level..=g.depth())
            .map(|l| {
                rho_classes_dense(g, k, l)
                    .into_iter()
                    .map(|members| DenseClass { members, colour: 0 })
                    .collect()
            })
            .collect();
        let vertices = (g.level_range(base_level).start..g.vertex_count()).collect();
        Ok(TStructure {
            graph: g.clone(),
            k,
            base_level,
            levels,
            vertices,
        })
    }

    /// The identity colour translation.
    pub(crate) fn own_colours(&self) -> Vec<usize> {
        (0..self.levels[0].len()).collect()
    }

    /// Builds the structure over the descendants of `base` (ρ-classes at
    /// `base_level`), colouring every class by the least base class whose
    /// depth-matched T(·) is ρ-isomorphic to its own.
    pub(crate) fn from_base(g: &LayeredDigraph, k: usize, base_level: usize, base: Vec<Vec<usize>>) -> Result<Self> {
        let mut vertices = BTreeSet::new();
        for c in &base {
            for &v in c {
                vertices.extend(g.desc_dense(v, None));
            }
        }
        let mut levels = vec![base.into_iter().map(|members| DenseClass { members, colour: 0 }).collect::<Vec<_>>()];
        for l in base_level + 1..=g.depth() {
            let mut here = Vec::new();
            for c in rho_classes_dense(g, k, l) {
                let members: Vec<usize> = c.into_iter().filter(|v| vertices.contains(v)).collect();
                if !members.is_empty() {
                    here.push(DenseClass { members, colour: 0 });
                }
            }
            levels.push(here);
        }
        let mut t = TStructure {
            graph: g.clone(),
            k,
            base_level,
            levels,
            vertices,
        };
        t.colour()?;
        Ok(t)
    }

    fn colour(&mut self) -> Result<()> {
        let depth = self.available_depth();
        // Encodings of each base class's T(·), memoised per truncation depth.
        let mut base_enc: HashMap<(usize, usize), Encoding> = HashMap::new();
        let mut colours: Vec<Vec<usize>> = Vec::new();
        for r in 0..=depth {
            let d = depth - r;
            let mut here = Vec::new();
            for c in &self.levels[r] {
                let cone = self.class_cone(&c.members, d);
                let enc = self.encode_part(&cone, None, false);
                let mut found = None;
                for (i, u) in self.levels[0].iter().enumerate() {
                    let be = base_enc.entry((i, d)).or_insert_with(|| {
                        let bc = self.class_cone(&u.members, d);
                        self.encode_part(&bc, None, false)
                    });
                    if encoded_iso(&enc, be, &[]).is_some() {
                        found = Some(i);
                        break;
                    }
                }
                match found {
                    Some(i) => here.push(i),
                    None => {
                        let ids: Vec<String> = c.members.iter().map(|&v| self.graph.id(v).to_string()).collect();
                        return Err(Error::NoColour(format!(
                            "class {{{}}} at level {} matches no base class",
                            ids.join(","),
                            self.base_level + r
                        )));
                    }
                }
            }
            colours.push(here);
        }
        for (cs, cols) in self.levels.iter_mut().zip(colours) {
            for (c, col) in cs.iter_mut().zip(cols) {
                c.colour = col;
            }
        }
        Ok(())
    }
}

/// The T-structure of levels ≥ 2k − 1 with all ρ-classes there as base.
pub fn build_t(g: &LayeredDigraph, k: usize) -> Result<TStructure> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if g.depth() < 2 * k {
        return Err(Error::InsufficientDepth(format!("need depth {} for k = {k}", 2 * k)));
    }
    let base_level = 2 * k - 1;
    TStructure::from_base(g, k, base_level, rho_classes_dense(g, k, base_level))
}

/// T_Γ: the T-structure below the first ρ-class at level 2k − 1.
pub fn t_gamma(g: &LayeredDigraph, k: usize) -> Result<TStructure> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if g.depth() < 2 * k {
        return Err(Error::InsufficientDepth(format!("need depth {} for k = {k}", 2 * k)));
    }
    let base_level = 2 * k - 1;
    let first = rho_classes_dense(g, k, base_level).swap_remove(0);
    TStructure::from_base(g, k, base_level, vec![first])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ladder_system, tree_system};

    fn ids(v: &[u32]) -> Vec<VertexId> {
        v.iter().map(|&x| VertexId(x)).collect()
    }

    #[test]
    fn rho_examples() {
        let t2 = tree_system(2).unwrap().expand(4).unwrap();
        let p = rho_partition(&t2, 1, 3).unwrap();
        assert_eq!(p.classes.len(), 8);
        assert!(p.classes.iter().all(|c| c.len() == 1));
        let l2 = ladder_system(2).unwrap().expand(5).unwrap();
        for l in [2, 3] {
            let p = rho_partition(&l2, 2, l).unwrap();
            assert_eq!(p.classes, vec![l2.level(l).to_vec()]);
        }
        assert_eq!(rho_partition(&l2, 2, 1), Err(Error::RhoUndefined { level: 1, k: 2 }));
    }

    #[test]
    fn sigma_examples() {
        let t2 = tree_system(2).unwrap().expand(4).unwrap();
        assert_eq!(sigma_partition(&t2, 2, 4).unwrap().class_sizes(), vec![1; 4]);
        let l2 = ladder_system(2).unwrap().expand(5).unwrap();
        assert_eq!(sigma_partition(&l2, 3, 5).unwrap().class_sizes(), vec![2]);
        assert_eq!(sigma_partition(&l2, 5, 5).unwrap().class_sizes(), vec![1, 1]);
        assert!(matches!(sigma_partition(&l2, 3, 6), Err(Error::HorizonOutOfRange(_))));
    }

    #[test]
    fn quotient_examples() {
        let l2 = ladder_system(2).unwrap().expand(5).unwrap();
        let q = quotient(&l2, 2, 2).unwrap();
        assert_eq!(q.classes.len(), 4);
        assert_eq!(q.edges, vec![(0, 1), (1, 2), (2, 3)]);
        assert!(q.is_tree);
        let t2 = tree_system(2).unwrap().expand(3).unwrap();
        let q = quotient(&t2, 1, 1).unwrap();
        assert_eq!(q.classes.len(), 2 + 4 + 8);
        assert_eq!(q.edges.len(), 4 + 8);
        assert!(q.is_tree);
    }

    #[test]
    fn quotient_detects_two_parent_classes() {
        // 0 -> 1,2 ; 1 -> 3 ; 2 -> 3 ; with k = 1 the class {3} has two parents
        let g = LayeredDigraph::from_parts(1, vec![ids(&[0]), ids(&[1, 2]), ids(&[3])], [(0, 1), (1, 3), (2, 3)].map(|(a, b)| (VertexId(a), VertexId(b))));
        // out-valency varies, so build with m = 2 skipped: from_parts only checks shape
        let g = g.unwrap();
        let q = quotient(&g, 1, 1).unwrap();
        assert!(!q.is_tree);
        assert_eq!(q.witness, Some((2, vec![0, 1])));
    }

    #[test]
    fn t_structure_examples() {
        let t2 = tree_system(2).unwrap().expand(4).unwrap();
        let t = build_t(&t2, 1).unwrap();
        assert_eq!(t.base_classes().len(), 2);
        assert_eq!(t.colour_count(), 1);
        let l2 = ladder_system(2).unwrap().expand(5).unwrap();
        let t = build_t(&l2, 2).unwrap();
        assert_eq!(t.base_classes().len(), 1);
        assert_eq!(t.base_classes()[0].members.len(), 2);
        assert_eq!(t.colour_count(), 1);
        let tg = t_gamma(&t2, 1).unwrap();
        assert_eq!(tg.base(), vec![VertexId(1)]);
        assert_eq!(tg.vertex_count(), 15);
    }
}
