//! The built-in invariant suite behind `descent selftest`: trees and ladders
//! with out-valency 2 and 3. Deterministic; relabelings are fixed
//! permutations rather than random ones.

use std::collections::BTreeMap;

use crate::amalgam::{build_limit_approx, separation_trace, FgObject, Task};
use crate::audit::Audit;
use crate::canonical::verify::check_digraph_iso;
use crate::canonical::{canonical_form, compute_m, compute_n, decide_iso, IsoConstraints, IsoOutcome};
use crate::format::{parse_ldg, write_ldg};
use crate::model::{ladder_system, tree_system, ExpansionSystem, LayeredDigraph, VertexId};
use crate::properties::{check_g0, check_g1, check_g2, check_p3, compute_k, KOutcome, Status};
use crate::structure::{quotient, t_gamma};

/// One line of the suite: a name and either a detail string or a failure.
pub struct Check {
    pub name: String,
    pub outcome: std::result::Result<String, String>,
}

fn relabel(g: &LayeredDigraph, shift: u32) -> LayeredDigraph {
    let ids: Vec<VertexId> = g.vertices().collect();
    let n = ids.len() as u32;
    // reverse, then rotate: a fixed permutation of the ids in use
    let rename: BTreeMap<VertexId, VertexId> = ids
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, ids[((n - 1 - i as u32 + shift) % n) as usize]))
        .collect();
    g.relabeled(&rename).unwrap()
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn run(&mut self, name: String, f: impl FnOnce() -> std::result::Result<String, String>) {
        self.checks.push(Check { name, outcome: f() });
    }
}

fn expect(ok: bool, detail: String) -> std::result::Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn instance(suite: &mut Suite, name: &str, sys: &ExpansionSystem, k: usize, big_m: usize, grows: bool) {
    let d = 6;
    let g = match sys.expand(d) {
        Ok(g) => g,
        Err(e) => return suite.run(format!("{name} expand"), || Err(e.to_string())),
    };
    suite.run(format!("{name} expand-prefix"), || {
        let ok = (sys.seed().depth()..d).all(|e| sys.expand(e).unwrap() == g.truncate(e).unwrap());
        expect(ok, format!("depth {d}, {} vertices", g.vertex_count()))
    });
    suite.run(format!("{name} g0"), || expect(check_g0(&g).passed(), "pass".into()));
    suite.run(format!("{name} g1"), || {
        let v = check_g1(&g).map_err(|e| e.to_string())?;
        expect(v.passed(), v.status.to_string())
    });
    suite.run(format!("{name} g2"), || {
        let v = check_g2(&g).map_err(|e| e.to_string())?;
        let want = if grows { Status::Pass } else { Status::Fail };
        expect(v.status == want, v.status.to_string())
    });
    suite.run(format!("{name} k"), || match compute_k(&g).map_err(|e| e.to_string())? {
        KOutcome::Found(r) => {
            let mono = r.t_sequence.windows(2).all(|w| w[0] <= w[1]);
            let below_m = !grows || r.t_sequence.iter().all(|&t| t < g.m());
            expect(r.k == k && mono && below_m, format!("k={} t={:?}", r.k, r.t_sequence))
        }
        KOutcome::Refuted(v) => Err(format!("refuted: {:?}", v.witness)),
    });
    suite.run(format!("{name} p3"), || {
        let v = check_p3(&g).map_err(|e| e.to_string())?;
        expect(v.passed(), v.status.to_string())
    });
    suite.run(format!("{name} lemmas"), || {
        let small = g.truncate(if g.m() == 2 { 5 } else { 4 }).unwrap();
        Audit::new(&small, k).exhaustive().map(|n| format!("{n} instances"))
    });
    suite.run(format!("{name} quotient"), || {
        let q = quotient(&g, k, k).map_err(|e| e.to_string())?;
        expect(q.is_tree, format!("{} classes", q.classes.len()))
    });
    suite.run(format!("{name} n"), || {
        let n = compute_n(&t_gamma(&g, k).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let width = n.window.1 - n.window.0 + 1;
        expect(n.n_hat == 1 && !n.inconclusive && width >= 3, format!("N={} window={:?}", n.n_hat, n.window))
    });
    suite.run(format!("{name} fingerprint"), || {
        let f = compute_m(&g).map_err(|e| e.to_string())?;
        let stable = (1..4).all(|s| compute_m(&relabel(&g, s)).unwrap() == f);
        expect(f.big_m == big_m && stable, format!("k={} N={} M={}", f.k, f.n, f.big_m))
    });
    suite.run(format!("{name} canonical"), || {
        let c = IsoConstraints::rooted();
        let f = canonical_form(&g, &c).map_err(|e| e.to_string())?;
        let again = canonical_form(&parse_ldg(&f).map_err(|e| e.to_string())?, &c).map_err(|e| e.to_string())?;
        let round = parse_ldg(&write_ldg(&g)).map_err(|e| e.to_string())? == g;
        expect(f == again && round, "idempotent, LDG round trip".into())
    });
    suite.run(format!("{name} iso"), || {
        let h = relabel(&g, 5);
        let d = decide_iso(&g, &h).map_err(|e| e.to_string())?;
        let cert = d.certificate.as_ref().ok_or("no certificate")?;
        let m = compute_m(&g).unwrap().big_m;
        check_digraph_iso(&g.truncate(m).unwrap(), &h.truncate(m).unwrap(), cert)?;
        expect(d.outcome == IsoOutcome::Isomorphic, format!("{} chain links", d.chain.len()))
    });
}

fn amalgam(suite: &mut Suite) {
    let sys = tree_system(2).unwrap();
    suite.run("tree2 amalgam".into(), || {
        let base = FgObject::from_gamma(&sys, 3).map_err(|e| e.to_string())?;
        let root = base.generators()[0];
        let x = base.out_neighbours(root).unwrap()[0];
        let tasks = [Task::AddInNeighbour(root), Task::AddFreshCopy, Task::AmalgamateOverCone(x, 2)];
        let r = build_limit_approx(&sys, &tasks, 3).map_err(|e| e.to_string())?;
        r.object.validate().map_err(|e| e.to_string())?;
        let sizes = r.steps.iter().all(|s| s.after + s.shared == s.before + s.added);
        expect(sizes, format!("{} vertices", r.object.len()))
    });
    suite.run("tree2 separation".into(), || {
        let r = build_limit_approx(&sys, &[], 4).map_err(|e| e.to_string())?;
        let a = r.object.generators()[0];
        let x = r.object.out_neighbours(a).unwrap()[0];
        let r = build_limit_approx(&sys, &[Task::AddInNeighbour(x)], 4).map_err(|e| e.to_string())?;
        let b = *r.object.in_neighbours(x).unwrap().iter().find(|&&p| p != a).unwrap();
        let t = separation_trace(&r.object, a, b, None).map_err(|e| e.to_string())?;
        expect(t.steps.last().unwrap().z.is_empty(), format!("r={} audits={}", t.r, t.audits))
    });
}

/// Runs every check. Never panics on a failing check; failures are reported
/// in the returned list.
pub fn run() -> Vec<Check> {
    let mut suite = Suite { checks: Vec::new() };
    for m in [2, 3] {
        instance(&mut suite, &format!("tree{m}"), &tree_system(m).unwrap(), 1, 3, true);
        instance(&mut suite, &format!("ladder{m}"), &ladder_system(m).unwrap(), 2, 5, false);
    }
    amalgam(&mut suite);
    suite.checks
}
