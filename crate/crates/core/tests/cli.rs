use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use descent::{ladder_system, parse_ldg, tree_system, write_exs, write_ldg, VertexId};

fn descent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_descent")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, text: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn tree2() -> String {
    scratch("tree2.exs", &write_exs(&tree_system(2).unwrap()))
}

fn ladder2() -> String {
    scratch("ladder2.exs", &write_exs(&ladder_system(2).unwrap()))
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(descent(&["--help"]).status.code(), Some(0));
    assert_eq!(descent(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(descent(&["check"]).status.code(), Some(64));
    assert_eq!(descent(&["check", "--props", "g9", &tree2()]).status.code(), Some(64));
    assert_eq!(descent(&["check", "/no/such/file.ldg"]).status.code(), Some(65));
    let broken = scratch("broken.ldg", "ldg 1\nm 2\ndepth 1\nlevel 0: 0\nlevel 1: 1 x\n");
    let o = descent(&["check", &broken]);
    assert_eq!(o.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));
    assert!(o.stdout.is_empty());
}

#[test]
fn check_lines_and_exit_codes() {
    let o = descent(&["check", &tree2(), "--depth", "6", "--props", "g0,g1,g2,g3,p3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "g0 pass depth=6\ng1 pass depth=6\ng2 pass depth=6\ng3 pass depth=6 k=1\np3 pass depth=6\n"
    );

    let o = descent(&["check", &ladder2(), "--depth", "6", "--props", "g2,g3"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("g2 fail depth=6 witness="), "{text}");
    assert!(text.ends_with("g3 pass depth=6 k=2\n"), "{text}");

    // a missing edge leaves the root with out-valency 1
    let g = tree_system(2).unwrap().expand(3).unwrap();
    let text = write_ldg(&g.without_edge(VertexId(0), VertexId(1)).unwrap());
    let o = descent(&["check", &scratch("gap.ldg", &text), "--props", "g0,g1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        stdout(&o),
        "g0 fail depth=3 witness=out-valency 1 != 2 at 0\n\
         g1 inconclusive depth=3 reason=precondition failed: g0 does not hold\n"
    );
}

#[test]
fn analyze_report() {
    let o = descent(&["analyze", &ladder2(), "--depth", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for line in ["k 2", "K 3", "t_sequence 1 2 2 2 2 2", "colours 1", "N 1 window 1..3", "M 5"] {
        assert!(text.lines().any(|l| l == line), "missing {line:?} in\n{text}");
    }
    assert!(text.lines().any(|l| l.starts_with("quotient tree")));
}

#[test]
fn fingerprint_ignores_vertex_names() {
    let g = tree_system(2).unwrap().expand(5).unwrap();
    let n = g.vertex_count() as u32;
    let rename: BTreeMap<VertexId, VertexId> = g.vertices().map(|v| (v, VertexId((v.0 * 5 + 3) % n))).collect();
    let a = scratch("fp_a.ldg", &write_ldg(&g));
    let b = scratch("fp_b.ldg", &write_ldg(&g.relabeled(&rename).unwrap()));
    let (oa, ob) = (descent(&["fingerprint", &a]), descent(&["fingerprint", &b]));
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(stdout(&oa), stdout(&ob));
    assert!(stdout(&oa).starts_with("k=1 N=1 M=3\nldg 1\n"));
}

#[test]
fn iso_verdicts() {
    let t = tree2();
    let shallow = scratch("tree2_d2.ldg", &write_ldg(&tree_system(2).unwrap().expand(2).unwrap()));
    let o = descent(&["iso", &t, &t, "--depth", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("isomorphic\ncertificate\n0 0\n"));
    let o = descent(&["iso", &t, &ladder2(), "--depth", "6"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "not_isomorphic k:1≠2\n");
    let o = descent(&["iso", &shallow, &shallow]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn extendiso_chain() {
    let l = ladder2();
    let o = descent(&["extendiso", &l, &l, "--depth", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.ends_with("verified")).count(), 2);
}

#[test]
fn expand_formats() {
    let o = descent(&["expand", &tree2(), "--depth", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(parse_ldg(&stdout(&o)).unwrap(), tree_system(2).unwrap().expand(4).unwrap());
    let o = descent(&["expand", &tree2(), "--depth", "3", "--format", "summary"]);
    assert_eq!(stdout(&o), "m 2\ndepth 3\nvertices 15\nedges 14\nlevels 1 2 4 8\n");
}

#[test]
fn amalgam_build_then_trace() {
    let sys = tree2();
    let schedule = scratch("share.txt", "# second generator over a shared cone\nadd-in-neighbour 1\n");
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join("share.ldgx");
    let out = out.to_str().unwrap();
    let o = descent(&["amalgam", "build", &sys, "--schedule", &schedule, "--depth", "4", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("step 0 add-in-neighbour 1: 31 + 31 - 15 = 47"));
    let text = fs::read_to_string(out).unwrap();
    assert!(text.starts_with("ldgx 1\n"));
    let o = descent(&["amalgam", "trace", out, "--system", &sys, "--a", "0", "--b", "31"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("pair 0 31\nk 1 K 1 n 2\n"), "{text}");
    assert!(text.lines().any(|l| l.starts_with("r ")));

    let o = descent(&["amalgam", "trace", out, "--system", &sys, "--a", "0", "--b", "1"]);
    assert_eq!(o.status.code(), Some(65));
    let bad = scratch("bad_schedule.txt", "add-in-neighbour 99999\n");
    let o = descent(&["amalgam", "build", &sys, "--schedule", &bad, "--out", out]);
    assert_eq!(o.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step 0"));
}

#[test]
fn output_is_deterministic() {
    let l = ladder2();
    for args in [vec!["analyze", l.as_str()], vec!["fingerprint", l.as_str(), "--depth", "6"]] {
        assert_eq!(descent(&args).stdout, descent(&args).stdout);
    }
}
