//! Finite truncations of rooted layered digraphs.
//!
//! A [`LayeredDigraph`] is always read as the ball of radius `depth` around
//! the root of a (purported) infinite digraph: vertices on the last level are
//! the frontier and legitimately have no out-edges.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

/// A rooted digraph stored level by level.
///
/// Construction only enforces structural sanity (unique ids, a single root,
/// edges between known vertices). The layering and valency invariants are
/// reported by [`LayeredDigraph::validate`] so that defective inputs can still
/// be loaded and diagnosed.
#[derive(Clone, PartialEq, Eq)]
pub struct LayeredDigraph {
    m: usize,
    levels: Vec<Vec<VertexId>>,
    // Dense view: vertices ordered by (level, id).
    ids: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    level: Vec<usize>,
    level_start: Vec<usize>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

impl fmt::Debug for LayeredDigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LayeredDigraph")
            .field("m", &self.m)
            .field("level_sizes", &self.level_sizes())
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl LayeredDigraph {
    pub fn from_parts<I>(m: usize, levels: Vec<Vec<VertexId>>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        if levels.is_empty() || levels[0].len() != 1 {
            return Err(Error::InvalidArgument(
                "level 0 must contain exactly one vertex (the root)".into(),
            ));
        }
        let mut levels = levels;
        for l in levels.iter_mut() {
            l.sort_unstable();
        }
        let mut ids = Vec::new();
        let mut level = Vec::new();
        let mut level_start = Vec::with_capacity(levels.len() + 1);
        for (i, l) in levels.iter().enumerate() {
            level_start.push(ids.len());
            for &v in l {
                ids.push(v);
                level.push(i);
            }
        }
        level_start.push(ids.len());
        let mut index = HashMap::with_capacity(ids.len());
        for (i, &v) in ids.iter().enumerate() {
            if index.insert(v, i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate vertex {v}")));
            }
        }
        let n = ids.len();
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for (a, b) in edges {
            let ia = *index.get(&a).ok_or(Error::UnknownVertex(a))?;
            let ib = *index.get(&b).ok_or(Error::UnknownVertex(b))?;
            if ia == ib {
                return Err(Error::InvalidArgument(format!("loop at {a}")));
            }
            out[ia].push(ib);
            inn[ib].push(ia);
        }
        for adj in out.iter_mut().chain(inn.iter_mut()) {
            adj.sort_unstable();
            let before = adj.len();
            adj.dedup();
            if adj.len() != before {
                return Err(Error::InvalidArgument("duplicate edge".into()));
            }
        }
        Ok(LayeredDigraph {
            m,
            levels,
            ids,
            index,
            level,
            level_start,
            out,
            inn,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn root(&self) -> VertexId {
        self.levels[0][0]
    }

    pub fn level(&self, i: usize) -> &[VertexId] {
        self.levels.get(i).map(|l| l.as_slice()).unwrap_or(&[])
    }

    pub fn levels(&self) -> &[Vec<VertexId>] {
        &self.levels
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Vertices in (level, id) order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.ids.iter().copied()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.index.contains_key(&v)
    }

    /// Edges sorted by (source, target).
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut e: Vec<_> = self
            .out
            .iter()
            .enumerate()
            .flat_map(|(a, adj)| adj.iter().map(move |&b| (self.ids[a], self.ids[b])))
            .collect();
        e.sort_unstable();
        e
    }

    pub fn out_neighbours(&self, v: VertexId) -> Result<Vec<VertexId>> {
        let i = self.idx(v)?;
        Ok(self.out[i].iter().map(|&j| self.ids[j]).collect())
    }

    pub fn in_neighbours(&self, v: VertexId) -> Result<Vec<VertexId>> {
        let i = self.idx(v)?;
        Ok(self.inn[i].iter().map(|&j| self.ids[j]).collect())
    }

    pub fn level_of(&self, v: VertexId) -> Result<usize> {
        Ok(self.level[self.idx(v)?])
    }

    /// All vertices reachable from `v` by directed paths of length at most
    /// `max_depth` (unbounded when `None`), including `v` itself.
    pub fn descendants(&self, v: VertexId, max_depth: Option<usize>) -> Result<BTreeSet<VertexId>> {
        let i = self.idx(v)?;
        Ok(self
            .desc_dense(i, max_depth)
            .into_iter()
            .map(|j| self.ids[j])
            .collect())
    }

    /// `Γ^{-s}(x)`: vertices `s` levels above `x` that have `x` as a descendant.
    pub fn ancestors_at(&self, x: VertexId, s: usize) -> Result<BTreeSet<VertexId>> {
        let i = self.idx(x)?;
        let lvl = self.level[i];
        if s > lvl {
            return Err(Error::Underflow { level: lvl, s });
        }
        let target = lvl - s;
        Ok(self
            .anc_dense(i)
            .into_iter()
            .filter(|&j| self.level[j] == target)
            .map(|j| self.ids[j])
            .collect())
    }

    /// Induced subdigraph on the descendants of `v`, re-rooted at `v`.
    pub fn cone(&self, v: VertexId) -> Result<LayeredDigraph> {
        let i = self.idx(v)?;
        let base = self.level[i];
        let desc = self.desc_dense(i, None);
        let depth = self.depth() - base;
        let mut levels = vec![Vec::new(); depth + 1];
        let mut keep = BTreeSet::new();
        for &j in &desc {
            if j == i || self.level[j] > base {
                levels[self.level[j] - base].push(self.ids[j]);
                keep.insert(j);
            }
        }
        let edges = keep
            .iter()
            .flat_map(|&a| {
                self.out[a]
                    .iter()
                    .filter(|b| keep.contains(b))
                    .map(move |&b| (self.ids[a], self.ids[b]))
            })
            .collect::<Vec<_>>();
        LayeredDigraph::from_parts(self.m, levels, edges)
    }

    /// `Γ^{≤d}`: the induced subdigraph on levels `0..=d`.
    pub fn truncate(&self, d: usize) -> Result<LayeredDigraph> {
        if d > self.depth() {
            return Err(Error::InsufficientDepth(format!(
                "cannot truncate depth {} to {}",
                self.depth(),
                d
            )));
        }
        let levels = self.levels[..=d].to_vec();
        let cut = self.level_start[d + 1];
        let edges = (0..cut).flat_map(|a| {
            self.out[a]
                .iter()
                .filter(move |&&b| b < cut)
                .map(move |&b| (self.ids[a], self.ids[b]))
        });
        LayeredDigraph::from_parts(self.m, levels, edges.collect::<Vec<_>>())
    }

    /// Renames vertices through `rename`; vertices missing from the map keep
    /// their id.
    pub fn relabeled(&self, rename: &BTreeMap<VertexId, VertexId>) -> Result<LayeredDigraph> {
        let f = |v: VertexId| *rename.get(&v).unwrap_or(&v);
        let levels = self
            .levels
            .iter()
            .map(|l| l.iter().map(|&v| f(v)).collect())
            .collect();
        let edges: Vec<_> = self.edges().into_iter().map(|(a, b)| (f(a), f(b))).collect();
        LayeredDigraph::from_parts(self.m, levels, edges)
    }

    /// Returns a copy with one extra edge; used for planting defects.
    pub fn with_edge(&self, a: VertexId, b: VertexId) -> Result<LayeredDigraph> {
        let mut e = self.edges();
        e.push((a, b));
        LayeredDigraph::from_parts(self.m, self.levels.clone(), e)
    }

    pub fn without_edge(&self, a: VertexId, b: VertexId) -> Result<LayeredDigraph> {
        let e: Vec<_> = self.edges().into_iter().filter(|&x| x != (a, b)).collect();
        LayeredDigraph::from_parts(self.m, self.levels.clone(), e)
    }

    /// Lists every violated layering/valency/reachability invariant.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        if self.m == 0 {
            issues.push(Issue::ZeroValency);
        }
        let d = self.depth();
        for a in 0..self.ids.len() {
            for &b in &self.out[a] {
                if self.level[b] != self.level[a] + 1 {
                    issues.push(Issue::NonConsecutiveEdge {
                        from: self.ids[a],
                        to: self.ids[b],
                    });
                }
            }
        }
        for a in 0..self.ids.len() {
            let expected = if self.level[a] < d { self.m } else { 0 };
            if self.out[a].len() != expected {
                issues.push(Issue::OutValency {
                    vertex: self.ids[a],
                    found: self.out[a].len(),
                    expected,
                });
            }
        }
        let reach = self.desc_dense(0, None);
        for (a, &id) in self.ids.iter().enumerate() {
            if !reach.contains(&a) {
                issues.push(Issue::Unreachable { vertex: id });
            }
        }
        ValidationReport { issues }
    }

    // ---- dense helpers ------------------------------------------------------

    pub(crate) fn idx(&self, v: VertexId) -> Result<usize> {
        self.index.get(&v).copied().ok_or(Error::UnknownVertex(v))
    }

    pub(crate) fn id(&self, i: usize) -> VertexId {
        self.ids[i]
    }

    pub(crate) fn dense_level(&self, i: usize) -> usize {
        self.level[i]
    }

    pub(crate) fn dense_out(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub(crate) fn dense_in(&self, i: usize) -> &[usize] {
        &self.inn[i]
    }

    /// Dense index range of level `l`.
    pub(crate) fn level_range(&self, l: usize) -> std::ops::Range<usize> {
        if l >= self.levels.len() {
            return 0..0;
        }
        self.level_start[l]..self.level_start[l + 1]
    }

    pub(crate) fn desc_dense(&self, i: usize, max_depth: Option<usize>) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        seen.insert(i);
        let mut queue = VecDeque::from([(i, 0usize)]);
        while let Some((a, dist)) = queue.pop_front() {
            if max_depth.is_some_and(|md| dist >= md) {
                continue;
            }
            for &b in &self.out[a] {
                if seen.insert(b) {
                    queue.push_back((b, dist + 1));
                }
            }
        }
        seen
    }

    /// Ancestors exactly `s` levels above `i`, ascending. Empty if `s` exceeds
    /// the level of `i`.
    pub(crate) fn anc_at_dense(&self, i: usize, s: usize) -> Vec<usize> {
        if s > self.level[i] {
            return Vec::new();
        }
        let mut cur = vec![i];
        for _ in 0..s {
            let mut next: Vec<usize> = cur.iter().flat_map(|&a| self.inn[a].iter().copied()).collect();
            next.sort_unstable();
            next.dedup();
            cur = next;
        }
        cur
    }

    pub(crate) fn anc_dense(&self, i: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        seen.insert(i);
        let mut stack = vec![i];
        while let Some(a) = stack.pop() {
            for &b in &self.inn[a] {
                if seen.insert(b) {
                    stack.push(b);
                }
            }
        }
        seen
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    ZeroValency,
    NonConsecutiveEdge { from: VertexId, to: VertexId },
    OutValency { vertex: VertexId, found: usize, expected: usize },
    Unreachable { vertex: VertexId },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::ZeroValency => write!(f, "out-valency m must be positive"),
            Issue::NonConsecutiveEdge { from, to } => {
                write!(f, "non-consecutive edge {from}->{to}")
            }
            Issue::OutValency {
                vertex,
                found,
                expected,
            } => write!(f, "out-valency {found} != {expected} at {vertex}"),
            Issue::Unreachable { vertex } => write!(f, "vertex {vertex} not reachable from root"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

// ---- expansion systems --------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChildSpec {
    pub colour: usize,
    /// `(parent_index, child_index)` pairs.
    pub pattern: Vec<(usize, usize)>,
}

/// How a class of a given colour spawns the classes one level down.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellType {
    pub colour: usize,
    pub size: usize,
    pub children: Vec<ChildSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierClass {
    pub colour: usize,
    pub members: Vec<VertexId>,
}

/// A finite recipe generating a [`LayeredDigraph`] to any depth: a seed ball
/// plus coloured cell types that say how each frontier class expands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionSystem {
    m: usize,
    k: usize,
    seed: LayeredDigraph,
    frontier: Vec<FrontierClass>,
    cells: BTreeMap<usize, CellType>,
}

impl ExpansionSystem {
    pub fn new(
        m: usize,
        k: usize,
        seed: LayeredDigraph,
        frontier: Vec<FrontierClass>,
        cells: BTreeMap<usize, CellType>,
    ) -> Result<Self> {
        if m == 0 || seed.m() != m {
            return Err(Error::InvalidArgument(format!(
                "system out-valency {m} does not match seed out-valency {}",
                seed.m()
            )));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        let report = seed.validate();
        if let Some(issue) = report.issues.first() {
            return Err(Error::InvalidArgument(format!("seed: {issue}")));
        }
        for (&c, cell) in &cells {
            if cell.colour != c {
                return Err(Error::InvalidArgument(format!("cell keyed {c} has colour {}", cell.colour)));
            }
            if cell.size == 0 {
                return Err(Error::InvalidArgument(format!("cell {c} has size 0")));
            }
        }
        for cell in cells.values() {
            let mut per_parent = vec![0usize; cell.size];
            for child in &cell.children {
                let child_size = cells
                    .get(&child.colour)
                    .ok_or(Error::UnknownColour(child.colour))?
                    .size;
                let mut covered = vec![false; child_size];
                let mut seen = BTreeSet::new();
                for &(p, c) in &child.pattern {
                    if p >= cell.size || c >= child_size {
                        return Err(Error::ValencyMismatch(format!(
                            "pattern pair {p}:{c} out of range in cell {}",
                            cell.colour
                        )));
                    }
                    if !seen.insert((p, c)) {
                        return Err(Error::ValencyMismatch(format!(
                            "duplicate pattern pair {p}:{c} in cell {}",
                            cell.colour
                        )));
                    }
                    per_parent[p] += 1;
                    covered[c] = true;
                }
                if let Some(c) = covered.iter().position(|x| !x) {
                    return Err(Error::ValencyMismatch(format!(
                        "child index {c} of colour {} has no parent in cell {}",
                        child.colour, cell.colour
                    )));
                }
            }
            if let Some(p) = per_parent.iter().position(|&x| x != m) {
                return Err(Error::ValencyMismatch(format!(
                    "parent {p} of cell {} has {} out-edges, expected {m}",
                    cell.colour, per_parent[p]
                )));
            }
        }
        let last: BTreeSet<VertexId> = seed.level(seed.depth()).iter().copied().collect();
        let mut covered = BTreeSet::new();
        for class in &frontier {
            let cell = cells.get(&class.colour).ok_or(Error::UnknownColour(class.colour))?;
            if cell.size != class.members.len() {
                return Err(Error::InvalidArgument(format!(
                    "frontier class of colour {} has {} members, cell size is {}",
                    class.colour,
                    class.members.len(),
                    cell.size
                )));
            }
            for v in &class.members {
                if !last.contains(v) {
                    return Err(Error::InvalidArgument(format!(
                        "frontier class member {v} is not on the seed's last level"
                    )));
                }
                if !covered.insert(*v) {
                    return Err(Error::InvalidArgument(format!("{v} in two frontier classes")));
                }
            }
        }
        if covered != last {
            return Err(Error::InvalidArgument(
                "frontier classes must cover the seed's last level".into(),
            ));
        }
        Ok(ExpansionSystem {
            m,
            k,
            seed,
            frontier,
            cells,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> &LayeredDigraph {
        &self.seed
    }

    pub fn frontier(&self) -> &[FrontierClass] {
        &self.frontier
    }

    pub fn cells(&self) -> &BTreeMap<usize, CellType> {
        &self.cells
    }

    /// Expands the seed to `depth`. Fresh vertex ids are handed out in the
    /// order (level, parent class, child ordinal, index within child class),
    /// so `expand(d + 1)` restricted to depth `d` equals `expand(d)`.
    pub fn expand(&self, depth: usize) -> Result<LayeredDigraph> {
        if depth < self.seed.depth() {
            return Err(Error::InvalidArgument(format!(
                "depth {depth} is below the seed depth {}",
                self.seed.depth()
            )));
        }
        let mut levels = self.seed.levels().to_vec();
        let mut edges = self.seed.edges();
        let mut next = self.seed.vertices().map(|v| v.0).max().unwrap_or(0) + 1;
        let mut frontier = self.frontier.clone();
        for _ in self.seed.depth()..depth {
            let mut level = Vec::new();
            let mut new_frontier = Vec::new();
            for class in &frontier {
                let cell = self
                    .cells
                    .get(&class.colour)
                    .ok_or(Error::UnknownColour(class.colour))?;
                for child in &cell.children {
                    let size = self
                        .cells
                        .get(&child.colour)
                        .ok_or(Error::UnknownColour(child.colour))?
                        .size;
                    let members: Vec<VertexId> = (0..size).map(|i| VertexId(next + i as u32)).collect();
                    next += size as u32;
                    for &(p, c) in &child.pattern {
                        edges.push((class.members[p], members[c]));
                    }
                    level.extend_from_slice(&members);
                    new_frontier.push(FrontierClass {
                        colour: child.colour,
                        members,
                    });
                }
            }
            levels.push(level);
            frontier = new_frontier;
        }
        LayeredDigraph::from_parts(self.m, levels, edges)
    }
}

/// The directed `m`-ary tree: one colour, singleton classes, `m` singleton
/// children each.
pub fn tree_system(m: usize) -> Result<ExpansionSystem> {
    if m < 1 {
        return Err(Error::InvalidArgument("tree_system needs m >= 1".into()));
    }
    let root = VertexId(0);
    let kids: Vec<VertexId> = (1..=m as u32).map(VertexId).collect();
    let seed = LayeredDigraph::from_parts(
        m,
        vec![vec![root], kids.clone()],
        kids.iter().map(|&c| (root, c)).collect::<Vec<_>>(),
    )?;
    let frontier = kids
        .iter()
        .map(|&v| FrontierClass {
            colour: 0,
            members: vec![v],
        })
        .collect();
    let cell = CellType {
        colour: 0,
        size: 1,
        children: (0..m)
            .map(|_| ChildSpec {
                colour: 0,
                pattern: vec![(0, 0)],
            })
            .collect(),
    };
    ExpansionSystem::new(m, 1, seed, frontier, BTreeMap::from([(0, cell)]))
}

/// Levels of constant width `m` joined by complete bipartite edges.
pub fn ladder_system(m: usize) -> Result<ExpansionSystem> {
    if m < 2 {
        return Err(Error::InvalidArgument("ladder_system needs m >= 2".into()));
    }
    let mut levels = vec![vec![VertexId(0)]];
    let mut edges = Vec::new();
    let mut next = 1u32;
    for _ in 1..=3 {
        let level: Vec<VertexId> = (next..next + m as u32).map(VertexId).collect();
        next += m as u32;
        for &a in levels.last().unwrap() {
            for &b in &level {
                edges.push((a, b));
            }
        }
        levels.push(level);
    }
    let seed = LayeredDigraph::from_parts(m, levels.clone(), edges)?;
    let frontier = vec![FrontierClass {
        colour: 0,
        members: levels[3].clone(),
    }];
    let pattern = (0..m).flat_map(|p| (0..m).map(move |c| (p, c))).collect();
    let cell = CellType {
        colour: 0,
        size: m,
        children: vec![ChildSpec { colour: 0, pattern }],
    };
    ExpansionSystem::new(m, 2, seed, frontier, BTreeMap::from([(0, cell)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2(depth: usize) -> LayeredDigraph {
        tree_system(2).unwrap().expand(depth).unwrap()
    }

    fn l2(depth: usize) -> LayeredDigraph {
        ladder_system(2).unwrap().expand(depth).unwrap()
    }

    #[test]
    fn level_of_examples() {
        let g = t2(4);
        assert_eq!(g.level_of(g.root()).unwrap(), 0);
        let child = g.out_neighbours(g.root()).unwrap()[0];
        assert_eq!(g.level_of(child).unwrap(), 1);
        let l = l2(5);
        assert_eq!(l.level_of(l.level(3)[1]).unwrap(), 3);
        assert_eq!(g.level_of(VertexId(9999)), Err(Error::UnknownVertex(VertexId(9999))));
    }

    #[test]
    fn descendants_examples() {
        let g = t2(4);
        assert_eq!(g.descendants(g.root(), None).unwrap().len(), 31);
        let v = g.level(2)[1];
        assert_eq!(g.descendants(v, Some(0)).unwrap(), BTreeSet::from([v]));
        let l = l2(5);
        let x20 = l.level(2)[0];
        let d = l.descendants(x20, None).unwrap();
        assert_eq!(d.len(), 7);
        for lvl in 3..=5 {
            assert!(l.level(lvl).iter().all(|v| d.contains(v)));
        }
    }

    #[test]
    fn ancestors_examples() {
        let g = t2(4);
        let x = g.level(3)[5];
        let parents = g.ancestors_at(x, 1).unwrap();
        assert_eq!(parents.len(), 1);
        assert_eq!(parents, g.in_neighbours(x).unwrap().into_iter().collect());
        let l = l2(5);
        let x40 = l.level(4)[0];
        assert_eq!(
            l.ancestors_at(x40, 1).unwrap(),
            l.level(3).iter().copied().collect()
        );
        assert_eq!(l.ancestors_at(x40, 0).unwrap(), BTreeSet::from([x40]));
        assert_eq!(
            l.ancestors_at(l.level(1)[0], 2),
            Err(Error::Underflow { level: 1, s: 2 })
        );
    }

    #[test]
    fn cone_examples() {
        let g = t2(4);
        assert_eq!(g.cone(g.root()).unwrap(), g);
        let c = g.cone(g.level(1)[0]).unwrap();
        assert_eq!(c.level_sizes(), vec![1, 2, 4, 8]);
        let l = l2(5);
        assert_eq!(l.cone(l.level(2)[0]).unwrap().level_sizes(), vec![1, 2, 2, 2]);
    }

    #[test]
    fn expand_examples() {
        assert_eq!(t2(4).level_sizes(), vec![1, 2, 4, 8, 16]);
        let l = l2(5);
        assert_eq!(l.level_sizes(), vec![1, 2, 2, 2, 2, 2]);
        for lvl in 1..5 {
            for &a in l.level(lvl) {
                assert_eq!(l.out_neighbours(a).unwrap(), l.level(lvl + 1).to_vec());
            }
        }
        let sys = ladder_system(2).unwrap();
        assert_eq!(sys.expand(3).unwrap(), *sys.seed());
        assert!(sys.expand(2).is_err());
    }

    #[test]
    fn builtin_system_examples() {
        assert_eq!(tree_system(2).unwrap().expand(3).unwrap().vertex_count(), 15);
        assert_eq!(tree_system(3).unwrap().expand(2).unwrap().level_sizes(), vec![1, 3, 9]);
        assert_eq!(tree_system(1).unwrap().expand(3).unwrap().level_sizes(), vec![1; 4]);
        assert!(tree_system(0).is_err());
        assert!(ladder_system(1).is_err());
    }

    #[test]
    fn validate_reports_planted_defects() {
        let g = t2(4);
        assert!(g.validate().is_empty());
        // redirect one edge to a vertex on the same level
        let a = g.level(2)[0];
        let old = g.out_neighbours(a).unwrap()[0];
        let same = g.level(2)[1];
        let bad = g.without_edge(a, old).unwrap().with_edge(a, same).unwrap();
        let non_consecutive: Vec<_> = bad
            .validate()
            .issues
            .into_iter()
            .filter(|i| matches!(i, Issue::NonConsecutiveEdge { .. }))
            .collect();
        assert_eq!(non_consecutive, vec![Issue::NonConsecutiveEdge { from: a, to: same }]);

        let v = g.level(1)[0];
        let w = g.out_neighbours(v).unwrap()[0];
        let pruned = g.without_edge(v, w).unwrap();
        let valency: Vec<_> = pruned
            .validate()
            .issues
            .into_iter()
            .filter(|i| matches!(i, Issue::OutValency { .. }))
            .collect();
        assert_eq!(
            valency,
            vec![Issue::OutValency {
                vertex: v,
                found: 1,
                expected: 2
            }]
        );
    }

    #[test]
    fn bad_cells_are_rejected() {
        let sys = tree_system(2).unwrap();
        let mut cells = sys.cells().clone();
        cells.get_mut(&0).unwrap().children.pop();
        let err = ExpansionSystem::new(2, 1, sys.seed().clone(), sys.frontier().to_vec(), cells);
        assert!(matches!(err, Err(Error::ValencyMismatch(_))));

        let mut cells = sys.cells().clone();
        cells.get_mut(&0).unwrap().children[0].colour = 7;
        let err = ExpansionSystem::new(2, 1, sys.seed().clone(), sys.frontier().to_vec(), cells);
        assert_eq!(err, Err(Error::UnknownColour(7)));
    }
}
