//! Line-oriented text formats.
//!
//! LDG:
//! ```text
//! ldg 1
//! m <m>
//! depth <D>
//! level <i>: <id> <id> ...        (one line per level, ids ascending)
//! edge <src> <dst>                (sorted by (src, dst))
//! ```
//! EXS embeds an LDG seed block after its `m`/`k` header, followed by
//! `class <level> <colour>: <id>...` frontier lines and
//! `cell <colour> size <n>` blocks of `child <colour> pattern <p:c>...` lines.
//!
//! LDGX (see [`crate::amalgam`]) is LDG with header `ldgx 1` plus
//! `generator <id>` and `frontier <id>` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::amalgam::{FgObject, Gamma};
use crate::error::{Error, Result};
use crate::model::{CellType, ChildSpec, ExpansionSystem, FrontierClass, LayeredDigraph, VertexId};

pub fn write_ldg(g: &LayeredDigraph) -> String {
    let mut s = String::new();
    s.push_str("ldg 1\n");
    write_ldg_body(&mut s, g.m(), g.levels(), &g.edges());
    s
}

pub(crate) fn write_ldg_body(
    s: &mut String,
    m: usize,
    levels: &[Vec<VertexId>],
    edges: &[(VertexId, VertexId)],
) {
    let _ = writeln!(s, "m {m}");
    let _ = writeln!(s, "depth {}", levels.len().saturating_sub(1));
    for (i, level) in levels.iter().enumerate() {
        let _ = write!(s, "level {i}:");
        let mut sorted = level.clone();
        sorted.sort_unstable();
        for v in sorted {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let mut edges = edges.to_vec();
    edges.sort_unstable();
    for (a, b) in edges {
        let _ = writeln!(s, "edge {a} {b}");
    }
}

pub fn write_exs(sys: &ExpansionSystem) -> String {
    let mut s = String::new();
    s.push_str("exs 1\n");
    let _ = writeln!(s, "m {}", sys.m());
    let _ = writeln!(s, "k {}", sys.k());
    s.push_str(&write_ldg(sys.seed()));
    let depth = sys.seed().depth();
    for class in sys.frontier() {
        let _ = write!(s, "class {depth} {}:", class.colour);
        for v in &class.members {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    for cell in sys.cells().values() {
        let _ = writeln!(s, "cell {} size {}", cell.colour, cell.size);
        for child in &cell.children {
            let _ = write!(s, "child {} pattern", child.colour);
            for (p, c) in &child.pattern {
                let _ = write!(s, " {p}:{c}");
            }
            s.push('\n');
        }
    }
    s
}

/// Kind of a text document, decided from its header line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocKind {
    Ldg,
    Exs,
    Ldgx,
}

pub fn sniff(text: &str) -> Result<DocKind> {
    let first = Lines::new(text).peek().map(|(_, l)| l.to_string());
    match first.as_deref() {
        Some("ldg 1") => Ok(DocKind::Ldg),
        Some("exs 1") => Ok(DocKind::Exs),
        Some("ldgx 1") => Ok(DocKind::Ldgx),
        Some(other) => Err(Error::Parse {
            line: 1,
            msg: format!("unknown header {other:?}"),
        }),
        None => Err(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        }),
    }
}

pub fn parse_ldg(text: &str) -> Result<LayeredDigraph> {
    let mut lines = Lines::new(text);
    lines.expect_exact("ldg 1")?;
    let g = parse_ldg_body(&mut lines)?;
    if let Some((n, l)) = lines.next() {
        return Err(perr(n, format!("unexpected line {l:?}")));
    }
    g.into_digraph(lines.last_line)
}

pub fn parse_exs(text: &str) -> Result<ExpansionSystem> {
    let mut lines = Lines::new(text);
    lines.expect_exact("exs 1")?;
    let m = lines.expect_keyword_usize("m")?;
    let k = lines.expect_keyword_usize("k")?;
    lines.expect_exact("ldg 1")?;
    let seed = parse_ldg_body(&mut lines)?.into_digraph(lines.last_line)?;
    let mut frontier = Vec::new();
    let mut cells: BTreeMap<usize, CellType> = BTreeMap::new();
    let mut current: Option<usize> = None;
    while let Some((n, line)) = lines.next() {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("class") => {
                let (head, ids) = line
                    .split_once(':')
                    .ok_or_else(|| perr(n, "class line needs ':'"))?;
                let head: Vec<&str> = head.split_whitespace().collect();
                if head.len() != 3 {
                    return Err(perr(n, "expected `class <level> <colour>:`"));
                }
                let level = parse_usize(n, head[1])?;
                if level != seed.depth() {
                    return Err(perr(n, "frontier classes must sit on the seed's last level"));
                }
                let colour = parse_usize(n, head[2])?;
                let members = ids
                    .split_whitespace()
                    .map(|w| parse_id(n, w))
                    .collect::<Result<Vec<_>>>()?;
                frontier.push(FrontierClass { colour, members });
            }
            Some("cell") => {
                let rest: Vec<&str> = words.collect();
                if rest.len() != 3 || rest[1] != "size" {
                    return Err(perr(n, "expected `cell <colour> size <n>`"));
                }
                let colour = parse_usize(n, rest[0])?;
                let size = parse_usize(n, rest[2])?;
                if cells.contains_key(&colour) {
                    return Err(perr(n, format!("duplicate cell {colour}")));
                }
                cells.insert(
                    colour,
                    CellType {
                        colour,
                        size,
                        children: Vec::new(),
                    },
                );
                current = Some(colour);
            }
            Some("child") => {
                let colour = parse_usize(
                    n,
                    words.next().ok_or_else(|| perr(n, "child needs a colour"))?,
                )?;
                if words.next() != Some("pattern") {
                    return Err(perr(n, "expected `child <colour> pattern ...`"));
                }
                let pattern = words
                    .map(|w| {
                        let (p, c) = w
                            .split_once(':')
                            .ok_or_else(|| perr(n, format!("bad pattern pair {w:?}")))?;
                        Ok((parse_usize(n, p)?, parse_usize(n, c)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let cell = current
                    .and_then(|c| cells.get_mut(&c))
                    .ok_or_else(|| perr(n, "child line outside a cell block"))?;
                cell.children.push(ChildSpec { colour, pattern });
            }
            _ => return Err(perr(n, format!("unexpected line {line:?}"))),
        }
    }
    ExpansionSystem::new(m, k, seed, frontier, cells)
}

/// LDGX: level `i` holds the vertices of height `depth − i`.
pub fn write_ldgx(f: &FgObject) -> String {
    let depth = f.max_height();
    let mut levels = vec![Vec::new(); depth + 1];
    for v in f.vertices() {
        levels[depth - f.height(v).unwrap()].push(v);
    }
    let mut s = String::from("ldgx 1\n");
    write_ldg_body(&mut s, f.m(), &levels, &f.edges());
    for g in f.generators() {
        let _ = writeln!(s, "generator {g}");
    }
    for v in f.frontier() {
        let _ = writeln!(s, "frontier {v}");
    }
    s
}

/// Reads an LDGX object whose cones must match Γ of `sys`. The object is
/// validated, and the listed generators, frontier and levels must agree with
/// the ones implied by the edges.
pub fn parse_ldgx(text: &str, sys: &ExpansionSystem) -> Result<FgObject> {
    let mut lines = Lines::new(text);
    lines.expect_exact("ldgx 1")?;
    let raw = parse_ldg_body(&mut lines)?;
    if raw.m != sys.m() {
        return Err(perr(1, format!("out-valency {} differs from the system's {}", raw.m, sys.m())));
    }
    let (mut gens, mut front) = (Vec::new(), Vec::new());
    while let Some((n, line)) = lines.next() {
        match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["generator", v] => gens.push(parse_id(n, v)?),
            ["frontier", v] => front.push(parse_id(n, v)?),
            _ => return Err(perr(n, format!("unexpected line {line:?}"))),
        }
    }
    let end = lines.last_line;
    let depth = raw.levels.len() - 1;
    let verts: Vec<VertexId> = raw.levels.iter().flatten().copied().collect();
    let f = FgObject::new(&Gamma::new(sys.clone()), verts, raw.edges).map_err(|e| perr(end, e.to_string()))?;
    for (i, level) in raw.levels.iter().enumerate() {
        if let Some(v) = level.iter().find(|v| f.height(**v).ok() != Some(depth - i)) {
            return Err(perr(end, format!("{v} is listed on level {i} but has height {}", f.height(*v)?)));
        }
    }
    if gens != f.generators() {
        return Err(perr(end, "generator lines differ from the vertices without in-edges"));
    }
    if !front.iter().eq(f.frontier().iter()) {
        return Err(perr(end, "frontier lines differ from the vertices without out-edges"));
    }
    f.validate().map_err(|e| perr(end, e.to_string()))?;
    Ok(f)
}

// ---- shared parsing machinery ---------------------------------------------------

pub(crate) struct RawLdg {
    pub m: usize,
    pub levels: Vec<Vec<VertexId>>,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl RawLdg {
    fn into_digraph(self, line: usize) -> Result<LayeredDigraph> {
        LayeredDigraph::from_parts(self.m, self.levels, self.edges).map_err(|e| perr(line, e.to_string()))
    }
}

/// Parses `m`, `depth`, the level lines and any following edge lines.
pub(crate) fn parse_ldg_body(lines: &mut Lines<'_>) -> Result<RawLdg> {
    let m = lines.expect_keyword_usize("m")?;
    let depth = lines.expect_keyword_usize("depth")?;
    let mut levels = Vec::with_capacity(depth + 1);
    for i in 0..=depth {
        let (n, line) = lines
            .next()
            .ok_or_else(|| perr(lines.last_line + 1, format!("missing level {i}")))?;
        let (head, ids) = line
            .split_once(':')
            .ok_or_else(|| perr(n, "level line needs ':'"))?;
        if head.trim() != format!("level {i}") {
            return Err(perr(n, format!("expected `level {i}:`")));
        }
        let ids = ids
            .split_whitespace()
            .map(|w| parse_id(n, w))
            .collect::<Result<Vec<_>>>()?;
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(perr(n, "level ids must be strictly ascending"));
        }
        levels.push(ids);
    }
    let mut edges = Vec::new();
    while let Some((n, line)) = lines.peek() {
        let mut words = line.split_whitespace();
        if words.next() != Some("edge") {
            break;
        }
        let a = parse_id(n, words.next().ok_or_else(|| perr(n, "edge needs two ids"))?)?;
        let b = parse_id(n, words.next().ok_or_else(|| perr(n, "edge needs two ids"))?)?;
        if words.next().is_some() {
            return Err(perr(n, "trailing tokens on edge line"));
        }
        edges.push((a, b));
        lines.next();
    }
    Ok(RawLdg { m, levels, edges })
}

/// Non-blank, non-comment lines with 1-based line numbers.
pub(crate) struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    pub last_line: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Lines {
            inner: it.peekable(),
            last_line: 0,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Option<(usize, &'a str)> {
        let r = self.inner.next();
        if let Some((n, _)) = r {
            self.last_line = n;
        }
        r
    }

    pub fn peek(&mut self) -> Option<(usize, &'a str)> {
        self.inner.peek().copied()
    }

    pub fn expect_exact(&mut self, want: &str) -> Result<()> {
        match self.next() {
            Some((_, l)) if l == want => Ok(()),
            Some((n, l)) => Err(perr(n, format!("expected {want:?}, found {l:?}"))),
            None => Err(perr(self.last_line + 1, format!("expected {want:?}"))),
        }
    }

    pub fn expect_keyword_usize(&mut self, key: &str) -> Result<usize> {
        let (n, line) = self
            .next()
            .ok_or_else(|| perr(self.last_line + 1, format!("expected `{key} <n>`")))?;
        let mut words = line.split_whitespace();
        if words.next() != Some(key) {
            return Err(perr(n, format!("expected `{key} <n>`")));
        }
        let v = parse_usize(n, words.next().ok_or_else(|| perr(n, "missing value"))?)?;
        if words.next().is_some() {
            return Err(perr(n, "trailing tokens"));
        }
        Ok(v)
    }
}

pub(crate) fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub(crate) fn parse_usize(line: usize, w: &str) -> Result<usize> {
    w.parse().map_err(|_| perr(line, format!("expected an integer, found {w:?}")))
}

pub(crate) fn parse_id(line: usize, w: &str) -> Result<VertexId> {
    w.parse::<u32>()
        .map(VertexId)
        .map_err(|_| perr(line, format!("expected a vertex id, found {w:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ladder_system, tree_system};

    #[test]
    fn ldg_is_bit_exact() {
        let g = tree_system(2).unwrap().expand(2).unwrap();
        let text = write_ldg(&g);
        let expected = "ldg 1\nm 2\ndepth 2\nlevel 0: 0\nlevel 1: 1 2\nlevel 2: 3 4 5 6\n\
edge 0 1\nedge 0 2\nedge 1 3\nedge 1 4\nedge 2 5\nedge 2 6\n";
        assert_eq!(text, expected);
        assert_eq!(parse_ldg(&text).unwrap(), g);
    }

    #[test]
    fn exs_round_trip() {
        for sys in [ladder_system(3).unwrap(), tree_system(2).unwrap()] {
            let text = write_exs(&sys);
            let back = parse_exs(&text).unwrap();
            assert_eq!(back, sys);
            assert_eq!(write_exs(&back), text);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "ldg 1\nm 2\ndepth 1\nlevel 0: 0\nlevel 1: 2 1\n";
        assert!(matches!(parse_ldg(bad), Err(Error::Parse { line: 5, .. })));
        let bad = "ldg 1\nm 2\ndepth 1\nlevel 0: 0\nlevel 1: 1 2\nedge 0 9\n";
        assert!(matches!(parse_ldg(bad), Err(Error::Parse { .. })));
        assert!(matches!(sniff("graph 1\n"), Err(Error::Parse { line: 1, .. })));
        assert_eq!(sniff("# c\nexs 1\n").unwrap(), DocKind::Exs);
    }
}
