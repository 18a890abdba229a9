//! Individualisation-refinement over vertex-labelled digraphs.
//!
//! Everything the crate needs from graph isomorphism (rooted digraph
//! isomorphism, ρ-respecting and colour-respecting isomorphism, pinned
//! automorphism search, canonical labelling) is reduced to a plain
//! [`Structure`]: a digraph whose vertex labels must be preserved. Relations
//! such as ρ are encoded with auxiliary class vertices carrying their own label.

use std::collections::VecDeque;

#[derive(Debug, Clone, Default)]
pub(crate) struct Structure {
    pub out: Vec<Vec<u32>>,
    pub inn: Vec<Vec<u32>>,
    pub label: Vec<u64>,
}

impl Structure {
    pub fn with_labels(label: Vec<u64>) -> Self {
        let n = label.len();
        Structure {
            out: vec![Vec::new(); n],
            inn: vec![Vec::new(); n],
            label,
        }
    }

    pub fn len(&self) -> usize {
        self.label.len()
    }

    pub fn add_vertex(&mut self, label: u64) -> u32 {
        self.label.push(label);
        self.out.push(Vec::new());
        self.inn.push(Vec::new());
        (self.label.len() - 1) as u32
    }

    pub fn add_edge(&mut self, a: u32, b: u32) {
        self.out[a as usize].push(b);
        self.inn[b as usize].push(a);
    }

    pub fn finish(&mut self) {
        for adj in self.out.iter_mut().chain(self.inn.iter_mut()) {
            adj.sort_unstable();
            adj.dedup();
        }
    }

    fn disjoint_union(a: &Structure, b: &Structure) -> Structure {
        let shift = a.len() as u32;
        let mut u = Structure::with_labels(a.label.iter().chain(b.label.iter()).copied().collect());
        for (x, adj) in a.out.iter().enumerate() {
            for &y in adj {
                u.add_edge(x as u32, y);
            }
        }
        for (x, adj) in b.out.iter().enumerate() {
            for &y in adj {
                u.add_edge(x as u32 + shift, y + shift);
            }
        }
        u.finish();
        u
    }
}

/// Ordered partition of `0..n`; cells are identified by their start position.
#[derive(Debug, Clone)]
struct Partition {
    lab: Vec<u32>,
    pos: Vec<u32>,
    start: Vec<u32>,
    len: Vec<u32>,
    /// No cell before this position is larger than the size last asked for
    /// in `first_cell_larger_than`. Cells only ever split, so this holds for
    /// refinements of the partition too.
    hint: u32,
}

impl Partition {
    /// Initial partition: cells of equal label, ordered by label.
    fn by_label(labels: &[u64]) -> (Partition, Vec<u32>) {
        let n = labels.len();
        let mut lab: Vec<u32> = (0..n as u32).collect();
        lab.sort_by_key(|&v| (labels[v as usize], v));
        let mut pos = vec![0u32; n];
        let mut start = vec![0u32; n];
        let mut len = vec![0u32; n];
        let mut cells = Vec::new();
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j < n && labels[lab[j] as usize] == labels[lab[i] as usize] {
                j += 1;
            }
            for p in i..j {
                pos[lab[p] as usize] = p as u32;
                start[lab[p] as usize] = i as u32;
            }
            len[i] = (j - i) as u32;
            cells.push(i as u32);
            i = j;
        }
        (Partition { lab, pos, start, len, hint: 0 }, cells)
    }

    fn cell(&self, s: u32) -> &[u32] {
        &self.lab[s as usize..(s + self.len[s as usize]) as usize]
    }

    /// A caller must use the same `size` on a partition and all its copies.
    fn first_cell_larger_than(&mut self, size: u32) -> Option<u32> {
        let mut p = self.hint as usize;
        while p < self.lab.len() {
            let l = self.len[p];
            if l > size {
                self.hint = p as u32;
                return Some(p as u32);
            }
            p += l as usize;
        }
        self.hint = p as u32;
        None
    }

    /// Moves `vs` (all in one cell) to the front of that cell and splits them
    /// off as a new cell. Returns the start of the new cell.
    fn split_off(&mut self, vs: &[u32]) -> u32 {
        let s = self.start[vs[0] as usize];
        let l = self.len[s as usize];
        if vs.len() as u32 == l {
            return s;
        }
        for (i, &v) in vs.iter().enumerate() {
            let target = s as usize + i;
            let cur = self.pos[v as usize] as usize;
            let other = self.lab[target];
            self.lab.swap(target, cur);
            self.pos[v as usize] = target as u32;
            self.pos[other as usize] = cur as u32;
        }
        let rest = s + vs.len() as u32;
        self.len[s as usize] = vs.len() as u32;
        self.len[rest as usize] = l - vs.len() as u32;
        for p in rest..s + l {
            let v = self.lab[p as usize];
            self.start[v as usize] = rest;
        }
        s
    }
}

/// Scratch space for refinement.
struct Refiner {
    key: Vec<u64>,
    touched: Vec<u32>,
    in_queue: Vec<bool>,
    queue: VecDeque<u32>,
}

impl Refiner {
    fn new(n: usize) -> Self {
        Refiner {
            key: vec![0; n],
            touched: Vec::new(),
            in_queue: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn push(&mut self, s: u32) {
        if !self.in_queue[s as usize] {
            self.in_queue[s as usize] = true;
            self.queue.push_back(s);
        }
    }

    /// Refines to the coarsest equitable partition finer than `p`, given that
    /// `p` is already equitable with respect to every cell not queued.
    fn refine(&mut self, g: &Structure, p: &mut Partition) {
        while let Some(w) = self.queue.pop_front() {
            self.in_queue[w as usize] = false;
            let wl = p.len[w as usize];
            for pos in w..w + wl {
                let y = p.lab[pos as usize] as usize;
                for &x in &g.inn[y] {
                    if self.key[x as usize] == 0 {
                        self.touched.push(x);
                    }
                    self.key[x as usize] += 1 << 32;
                }
                for &x in &g.out[y] {
                    if self.key[x as usize] == 0 {
                        self.touched.push(x);
                    }
                    self.key[x as usize] += 1;
                }
            }
            let mut cells: Vec<u32> = self.touched.iter().map(|&x| p.start[x as usize]).collect();
            cells.sort_unstable();
            cells.dedup();
            for c in cells {
                self.split_cell(p, c);
            }
            for &x in &self.touched {
                self.key[x as usize] = 0;
            }
            self.touched.clear();
        }
    }

    fn split_cell(&mut self, p: &mut Partition, c: u32) {
        let l = p.len[c as usize] as usize;
        if l == 1 {
            return;
        }
        let cs = c as usize;
        let mut members: Vec<u32> = p.lab[cs..cs + l].to_vec();
        members.sort_by_key(|&v| self.key[v as usize]);
        if self.key[members[0] as usize] == self.key[members[l - 1] as usize] {
            return;
        }
        let mut frags: Vec<(u32, u32)> = Vec::new();
        let mut i = 0;
        while i < l {
            let mut j = i;
            while j < l && self.key[members[j] as usize] == self.key[members[i] as usize] {
                j += 1;
            }
            frags.push(((cs + i) as u32, (j - i) as u32));
            i = j;
        }
        for (off, &v) in members.iter().enumerate() {
            p.lab[cs + off] = v;
            p.pos[v as usize] = (cs + off) as u32;
        }
        for &(fs, fl) in &frags {
            p.len[fs as usize] = fl;
            for q in fs..fs + fl {
                p.start[p.lab[q as usize] as usize] = fs;
            }
        }
        if self.in_queue[cs] {
            for &(fs, _) in &frags[1..] {
                self.push(fs);
            }
        } else {
            let mut largest = 0;
            for (i, &(_, fl)) in frags.iter().enumerate() {
                if fl > frags[largest].1 {
                    largest = i;
                }
            }
            for (i, &(fs, _)) in frags.iter().enumerate() {
                if i != largest {
                    self.push(fs);
                }
            }
        }
    }
}

fn initial(g: &Structure) -> (Partition, Refiner) {
    let (mut p, cells) = Partition::by_label(&g.label);
    let mut r = Refiner::new(g.len());
    for c in cells {
        r.push(c);
    }
    r.refine(g, &mut p);
    (p, r)
}

// ---- joint isomorphism search ---------------------------------------------------

/// Finds a label- and edge-preserving bijection `a -> b` that maps each pinned
/// `(x, y)` pair. Returns `map[x] = y`. Deterministic: at each branching point
/// the least candidate of `a` is matched against candidates of `b` in
/// increasing order.
pub(crate) fn find_iso(a: &Structure, b: &Structure, pins: &[(u32, u32)]) -> Option<Vec<u32>> {
    if a.len() != b.len() {
        return None;
    }
    let n = a.len() as u32;
    let mut labels: Vec<u64> = a.label.iter().chain(b.label.iter()).copied().collect();
    // Pinned pairs get a private label; the offset keeps them away from real labels.
    let top = labels.iter().copied().max().unwrap_or(0) + 1;
    for (i, &(x, y)) in pins.iter().enumerate() {
        if x >= n || y >= n || a.label[x as usize] != b.label[y as usize] {
            return None;
        }
        let l = top + i as u64;
        if labels[x as usize] >= top || labels[(y + n) as usize] >= top {
            // the same vertex pinned twice
            return None;
        }
        labels[x as usize] = l;
        labels[(y + n) as usize] = l;
    }
    let mut u = Structure::disjoint_union(a, b);
    u.label = labels;
    let (p, mut r) = initial(&u);
    let mut found = None;
    joint_search(&u, n, p, &mut r, &mut found);
    found
}

fn balanced(p: &Partition, n: u32) -> bool {
    let mut s = 0usize;
    while s < p.lab.len() {
        let l = p.len[s] as usize;
        let left = p.lab[s..s + l].iter().filter(|&&v| v < n).count();
        if 2 * left != l {
            return false;
        }
        s += l;
    }
    true
}

fn joint_search(u: &Structure, n: u32, mut p: Partition, r: &mut Refiner, found: &mut Option<Vec<u32>>) -> bool {
    if !balanced(&p, n) {
        return false;
    }
    let Some(c) = p.first_cell_larger_than(2) else {
        let mut map = vec![0u32; n as usize];
        let mut s = 0usize;
        while s < p.lab.len() {
            let (x, y) = (p.lab[s], p.lab[s + 1]);
            let (x, y) = if x < n { (x, y - n) } else { (y, x - n) };
            map[x as usize] = y;
            s += 2;
        }
        if verify_map(u, n, &map) {
            *found = Some(map);
            return true;
        }
        return false;
    };
    let cell = p.cell(c);
    let v = *cell.iter().filter(|&&x| x < n).min().unwrap();
    let mut cands: Vec<u32> = cell.iter().copied().filter(|&x| x >= n).collect();
    cands.sort_unstable();
    for w in cands {
        let mut q = p.clone();
        let s = q.split_off(&[v, w]);
        r.push(s);
        r.refine(u, &mut q);
        if joint_search(u, n, q, r, found) {
            return true;
        }
    }
    false
}

fn verify_map(u: &Structure, n: u32, map: &[u32]) -> bool {
    for x in 0..n as usize {
        if u.label[x] != u.label[map[x] as usize + n as usize] {
            return false;
        }
        let mut img: Vec<u32> = u.out[x].iter().map(|&y| map[y as usize] + n).collect();
        img.sort_unstable();
        if img != u.out[map[x] as usize + n as usize] {
            return false;
        }
    }
    true
}

// ---- canonical labelling ----------------------------------------------------------

struct Leaf {
    path: Vec<u32>,
    lab: Vec<u32>,
    cert: Vec<u64>,
}

struct Canon<'a> {
    g: &'a Structure,
    refiner: Refiner,
    first: Option<Leaf>,
    best: Option<Leaf>,
    /// Found automorphisms as their moved points `(x, γx)`.
    autos: Vec<Vec<(u32, u32)>>,
}

/// Returns a canonical ordering of the vertices: `order[i]` is the vertex that
/// receives canonical number `i`. Structures that are isomorphic (labels
/// included) get orderings whose relabelled structures are identical.
pub(crate) fn canonical_order(g: &Structure) -> Vec<u32> {
    let (p, refiner) = initial(g);
    let mut c = Canon {
        g,
        refiner,
        first: None,
        best: None,
        autos: Vec::new(),
    };
    let mut path = Vec::new();
    c.search(p, &mut path);
    c.best.expect("search always reaches a leaf").lab
}

impl Canon<'_> {
    fn certificate(&self, p: &Partition) -> Vec<u64> {
        let g = self.g;
        let n = g.len();
        let mut cert: Vec<u64> = p.lab.iter().map(|&v| g.label[v as usize]).collect();
        let mut edges: Vec<u64> = Vec::new();
        for x in 0..n {
            for &y in &g.out[x] {
                edges.push(((p.pos[x] as u64) << 32) | p.pos[y as usize] as u64);
            }
        }
        edges.sort_unstable();
        cert.push(u64::MAX);
        cert.extend(edges);
        cert
    }

    /// Returns `Some(j)` to abandon the search back to the node at depth `j`.
    fn search(&mut self, mut p: Partition, path: &mut Vec<u32>) -> Option<usize> {
        let Some(c) = p.first_cell_larger_than(1) else {
            return self.leaf(p, path);
        };
        let depth = path.len();
        let mut cands = p.cell(c).to_vec();
        cands.sort_unstable();
        let mut explored: Vec<u32> = Vec::new();
        let mut orbits = Orbits::new(self.g.len());
        for v in cands {
            if !explored.is_empty() {
                orbits.absorb(&self.autos, path);
                if explored.iter().any(|&e| orbits.same(e, v)) {
                    continue;
                }
            }
            let mut q = p.clone();
            let s = q.split_off(&[v]);
            self.refiner.push(s);
            self.refiner.refine(self.g, &mut q);
            path.push(v);
            let back = self.search(q, path);
            path.pop();
            explored.push(v);
            if let Some(j) = back {
                if j < depth {
                    return Some(j);
                }
            }
        }
        None
    }

    fn leaf(&mut self, p: Partition, path: &[u32]) -> Option<usize> {
        let cert = self.certificate(&p);
        let leaf = Leaf {
            path: path.to_vec(),
            lab: p.lab.clone(),
            cert,
        };
        let Some(first) = &self.first else {
            self.first = Some(Leaf {
                path: leaf.path.clone(),
                lab: leaf.lab.clone(),
                cert: leaf.cert.clone(),
            });
            self.best = Some(leaf);
            return None;
        };
        for reference in [first, self.best.as_ref().unwrap()] {
            if reference.cert == leaf.cert {
                let mut gamma = vec![0u32; leaf.lab.len()];
                for (i, &x) in reference.lab.iter().enumerate() {
                    gamma[x as usize] = leaf.lab[i];
                }
                let j = common_prefix(&reference.path, &leaf.path);
                let moved: Vec<(u32, u32)> =
                    gamma.iter().enumerate().filter(|&(i, &x)| i as u32 != x).map(|(i, &x)| (i as u32, x)).collect();
                if !moved.is_empty() {
                    self.autos.push(moved);
                }
                return Some(j);
            }
        }
        if leaf.cert < self.best.as_ref().unwrap().cert {
            self.best = Some(leaf);
        }
        None
    }
}

/// Orbits of the group generated by the automorphisms found so far that fix
/// a search path pointwise. Automorphisms are only ever appended, so each one
/// is merged in once.
struct Orbits {
    parent: Vec<u32>,
    seen: usize,
}

impl Orbits {
    fn new(n: usize) -> Self {
        Orbits {
            parent: (0..n as u32).collect(),
            seen: 0,
        }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut r = x;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        let mut y = x;
        while self.parent[y as usize] != r {
            let next = self.parent[y as usize];
            self.parent[y as usize] = r;
            y = next;
        }
        r
    }

    fn absorb(&mut self, autos: &[Vec<(u32, u32)>], path: &[u32]) {
        for moved in &autos[self.seen..] {
            if moved.iter().all(|(x, _)| !path.contains(x)) {
                for &(x, y) in moved {
                    let (a, b) = (self.find(x), self.find(y));
                    if a != b {
                        self.parent[a.max(b) as usize] = a.min(b);
                    }
                }
            }
        }
        self.seen = autos.len();
    }

    fn same(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }
}

fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: u32, labels: Vec<u64>) -> Structure {
        let mut s = Structure::with_labels(labels);
        for i in 0..n {
            s.add_edge(i, (i + 1) % n);
        }
        s.finish();
        s
    }

    fn relabel(s: &Structure, perm: &[u32]) -> Structure {
        let mut labels = vec![0; s.len()];
        for (x, &l) in s.label.iter().enumerate() {
            labels[perm[x] as usize] = l;
        }
        let mut t = Structure::with_labels(labels);
        for (x, adj) in s.out.iter().enumerate() {
            for &y in adj {
                t.add_edge(perm[x], perm[y as usize]);
            }
        }
        t.finish();
        t
    }

    fn relabelled_by_order(s: &Structure, order: &[u32]) -> (Vec<u64>, Vec<(u32, u32)>) {
        let mut pos = vec![0u32; order.len()];
        for (i, &v) in order.iter().enumerate() {
            pos[v as usize] = i as u32;
        }
        let labels = order.iter().map(|&v| s.label[v as usize]).collect();
        let mut edges: Vec<_> = s
            .out
            .iter()
            .enumerate()
            .flat_map(|(x, adj)| adj.iter().map(move |&y| (x, y)))
            .map(|(x, y)| (pos[x], pos[y as usize]))
            .collect();
        edges.sort_unstable();
        (labels, edges)
    }

    #[test]
    fn directed_cycle_rotations_found() {
        let a = cycle(6, vec![0; 6]);
        let m = find_iso(&a, &a, &[(0, 3)]).unwrap();
        assert_eq!(m, vec![3, 4, 5, 0, 1, 2]);
        let b = cycle(6, vec![0, 0, 0, 0, 0, 1]);
        assert!(find_iso(&a, &b, &[]).is_none());
    }

    #[test]
    fn canonical_order_is_relabelling_invariant() {
        // two directed triangles sharing nothing plus a path
        let mut s = Structure::with_labels(vec![0; 8]);
        for (x, y) in [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (6, 7), (7, 0)] {
            s.add_edge(x, y);
        }
        s.finish();
        let perm = [5u32, 2, 7, 0, 1, 6, 4, 3];
        let t = relabel(&s, &perm);
        let cs = relabelled_by_order(&s, &canonical_order(&s));
        let ct = relabelled_by_order(&t, &canonical_order(&t));
        assert_eq!(cs, ct);
        assert!(find_iso(&s, &t, &[]).is_some());
    }
}
