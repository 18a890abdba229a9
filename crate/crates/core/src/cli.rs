//! Command-line front end. Reports go to `out`, diagnostics to `err`; the
//! return value is the process exit code.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::amalgam::{build_limit_approx, parse_schedule, separation_trace, FgObject, LimitApprox};
use crate::canonical::verify::check_ball_iso;
use crate::canonical::{base_colour_bridge, compute_m, compute_n, decide_iso, extend_ball_iso, find_ball_iso, IsoOutcome};
use crate::error::{Error, Result};
use crate::format::{parse_exs, parse_ldg, parse_ldgx, sniff, write_ldg, write_ldgx, DocKind};
use crate::model::{ExpansionSystem, LayeredDigraph, VertexId};
use crate::properties::{
    check_g0, check_g1, check_g2, check_p2, check_p2_prime, check_p3, compute_k, KOutcome, Status, Verdict,
};
use crate::selftest;
use crate::structure::{quotient, rho_partition, sigma_partition, t_gamma};

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

/// Extra levels expanded beyond the seed when an `.exs` file is given without `--depth`.
const DEFAULT_EXTRA_DEPTH: usize = 3;

#[derive(Parser)]
#[command(name = "descent", version, about = "Layered digraphs with bounded descent")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check descent properties of a truncation
    Check {
        file: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "g0,g1,g2,g3,p2,p2p,p3")]
        props: Vec<Prop>,
    },
    /// Report k, the t-sequence, ρ/σ classes, the quotient tree and N, M
    Analyze {
        file: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Print the isomorphism fingerprint (k, N, M and the canonical depth-M ball)
    Fingerprint {
        file: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Decide isomorphism of the graphs two truncations come from
    Iso {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Expand an expansion system to a given depth
    Expand {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = ExpandFormat::Ldg)]
        format: ExpandFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and verify the chain of ball isomorphisms between two T-structures
    Extendiso {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Finitely generated amalgamation
    Amalgam {
        #[command(subcommand)]
        cmd: AmalgamCmd,
    },
    /// Run the built-in invariant suite
    Selftest,
}

#[derive(Subcommand)]
enum AmalgamCmd {
    /// Run a task schedule and write the resulting object
    Build {
        file: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the separation trace for a pair of vertices
    Trace {
        file: PathBuf,
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        a: u32,
        #[arg(long)]
        b: u32,
        #[arg(long)]
        horizon: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Prop {
    G0,
    G1,
    G2,
    G3,
    P2,
    P2p,
    P3,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpandFormat {
    Ldg,
    Ldgx,
    Summary,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<ExpansionSystem> {
    parse_exs(&read(path)?)
}

/// Loads an `.ldg` truncation (cut to `depth` if given) or expands an `.exs`
/// system (to `depth`, or a few levels past its seed).
fn load_graph(path: &Path, depth: Option<usize>) -> Result<LayeredDigraph> {
    let text = read(path)?;
    match sniff(&text)? {
        DocKind::Ldg => {
            let g = parse_ldg(&text)?;
            match depth {
                Some(d) => g.truncate(d),
                None => Ok(g),
            }
        }
        DocKind::Exs => {
            let sys = parse_exs(&text)?;
            sys.expand(depth.unwrap_or(sys.seed().depth() + DEFAULT_EXTRA_DEPTH))
        }
        DocKind::Ldgx => Err(Error::Parse {
            line: 1,
            msg: "expected an ldg or exs document".into(),
        }),
    }
}

fn write_output(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())),
    }
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

/// Class sizes as `size×count` runs, largest size first.
fn sizes(xs: &[usize]) -> String {
    let mut counts = std::collections::BTreeMap::new();
    for &x in xs {
        *counts.entry(x).or_insert(0usize) += 1;
    }
    counts.iter().rev().map(|(x, c)| format!("{x}×{c}")).collect::<Vec<_>>().join(",")
}

fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Invariant(_) => EXIT_INTERNAL,
        _ => EXIT_DATA,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut buf = String::new();
    let result = dispatch(cli.cmd, &mut buf, out);
    let _ = out.write_all(buf.as_bytes());
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "descent: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Cmd, s: &mut String, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Cmd::Check { file, depth, props } => check(&load_graph(&file, depth)?, &props, s),
        Cmd::Analyze { file, depth } => {
            analyze(&load_graph(&file, depth)?, s);
            Ok(0)
        }
        Cmd::Fingerprint { file, depth } => {
            let f = compute_m(&load_graph(&file, depth)?)?;
            s.push_str(&f.to_string());
            if f.n_inconclusive {
                s.push_str("note N window inconclusive\n");
            }
            Ok(0)
        }
        Cmd::Iso { first, second, depth } => iso(&load_graph(&first, depth)?, &load_graph(&second, depth)?, s),
        Cmd::Expand { file, depth, format, out: path } => {
            let sys = load_system(&file)?;
            let g = sys.expand(depth)?;
            let text = match format {
                ExpandFormat::Ldg => write_ldg(&g),
                ExpandFormat::Ldgx => write_ldgx(&FgObject::from_gamma(&sys, depth)?),
                ExpandFormat::Summary => format!(
                    "m {}\ndepth {}\nvertices {}\nedges {}\nlevels {}\n",
                    g.m(),
                    g.depth(),
                    g.vertex_count(),
                    g.edge_count(),
                    join(&g.level_sizes(), " ")
                ),
            };
            write_output(out, path.as_deref(), &text)?;
            Ok(0)
        }
        Cmd::Extendiso { first, second, depth } => {
            extendiso(&load_graph(&first, depth)?, &load_graph(&second, depth)?, s)
        }
        Cmd::Amalgam { cmd: AmalgamCmd::Build { file, schedule, depth, out: path } } => {
            let sys = load_system(&file)?;
            let tasks = parse_schedule(&read(&schedule)?)?;
            let depth = depth.unwrap_or(sys.seed().depth() + DEFAULT_EXTRA_DEPTH);
            let built = build_limit_approx(&sys, &tasks, depth)?;
            match path {
                Some(p) => {
                    write_output(out, Some(&p), &write_ldgx(&built.object))?;
                    build_summary(&built, s);
                }
                None => s.push_str(&write_ldgx(&built.object)),
            }
            Ok(0)
        }
        Cmd::Amalgam { cmd: AmalgamCmd::Trace { file, system, a, b, horizon } } => {
            let sys = load_system(&system)?;
            let f = parse_ldgx(&read(&file)?, &sys)?;
            let t = separation_trace(&f, VertexId(a), VertexId(b), horizon)?;
            s.push_str(&t.to_string());
            Ok(0)
        }
        Cmd::Selftest => {
            let checks = selftest::run();
            let mut failed = 0;
            for c in &checks {
                match &c.outcome {
                    Ok(d) => s.push_str(&format!("ok   {} {d}\n", c.name)),
                    Err(d) => {
                        failed += 1;
                        s.push_str(&format!("FAIL {} {d}\n", c.name));
                    }
                }
            }
            s.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
            Ok(if failed == 0 { 0 } else { EXIT_INTERNAL })
        }
    }
}

fn build_summary(built: &LimitApprox, s: &mut String) {
    for r in &built.steps {
        s.push_str(&format!(
            "step {} {}: {} + {} - {} = {}\n",
            r.step, r.task, r.before, r.added, r.shared, r.after
        ));
    }
    s.push_str(&format!(
        "vertices {} edges {} generators {}\n",
        built.object.len(),
        built.object.edge_count(),
        built.object.generators().len()
    ));
}

fn verdict_line(name: &str, v: &Verdict, s: &mut String) {
    s.push_str(&format!("{name} {} depth={}", v.status, v.depth_checked));
    if let Some(w) = &v.witness {
        s.push_str(&format!(" witness={w}"));
    }
    if v.status == Status::Inconclusive {
        if let Some(n) = v.notes.first() {
            s.push_str(&format!(" note={n}"));
        }
    }
    s.push('\n');
}

fn check(g: &LayeredDigraph, props: &[Prop], s: &mut String) -> Result<i32> {
    let mut statuses = Vec::new();
    for &p in props {
        let (name, v) = match p {
            Prop::G0 => ("g0", Ok(check_g0(g))),
            Prop::G1 => ("g1", check_g1(g)),
            Prop::G2 => ("g2", check_g2(g)),
            Prop::P2 => ("p2", check_p2(g)),
            Prop::P2p => ("p2p", check_p2_prime(g)),
            Prop::P3 => ("p3", check_p3(g)),
            Prop::G3 => {
                let line = match compute_k(g) {
                    Ok(KOutcome::Found(r)) => {
                        statuses.push(Status::Pass);
                        format!("g3 pass depth={} k={}\n", g.depth(), r.k)
                    }
                    Ok(KOutcome::Refuted(v)) => {
                        statuses.push(v.status);
                        let mut l = String::new();
                        verdict_line("g3", &v, &mut l);
                        l
                    }
                    Err(e) => {
                        statuses.push(Status::Inconclusive);
                        format!("g3 inconclusive depth={} reason={}\n", g.depth(), e.root())
                    }
                };
                s.push_str(&line);
                continue;
            }
        };
        match v {
            Ok(v) => {
                statuses.push(v.status);
                verdict_line(name, &v, s);
            }
            Err(Error::Invariant(m)) => return Err(Error::Invariant(m)),
            Err(e) => {
                statuses.push(Status::Inconclusive);
                s.push_str(&format!("{name} inconclusive depth={} reason={e}\n", g.depth()));
            }
        }
    }
    Ok(if statuses.contains(&Status::Fail) {
        1
    } else if statuses.contains(&Status::Inconclusive) {
        2
    } else {
        0
    })
}

fn analyze(g: &LayeredDigraph, s: &mut String) {
    s.push_str(&format!("m {}\ndepth {}\nlevels {}\n", g.m(), g.depth(), join(&g.level_sizes(), " ")));
    let k = match compute_k(g) {
        Ok(KOutcome::Found(r)) => {
            s.push_str(&format!(
                "k {}\nK {}\nt_sequence {}\n",
                r.k,
                2 * r.k - 1,
                join(&r.t_sequence, " ")
            ));
            r.k
        }
        Ok(KOutcome::Refuted(v)) => {
            verdict_line("k refuted", &v, s);
            return;
        }
        Err(e) => {
            s.push_str(&format!("k unavailable: {e}\n"));
            return;
        }
    };
    for level in k..g.depth() {
        let rho = rho_partition(g, k, level).map(|p| sizes(&p.class_sizes()));
        let sigma = sigma_partition(g, level, g.depth()).map(|p| sizes(&p.class_sizes()));
        match (rho, sigma) {
            (Ok(r), Ok(q)) => s.push_str(&format!("level {level} rho {r} sigma {q}\n")),
            (Err(e), _) | (_, Err(e)) => s.push_str(&format!("level {level} unavailable: {e}\n")),
        }
    }
    match quotient(g, k, k) {
        Ok(q) if q.is_tree => s.push_str(&format!("quotient tree classes={}\n", q.classes.len())),
        Ok(q) => s.push_str(&format!("quotient not_tree witness={:?}\n", q.witness)),
        Err(e) => s.push_str(&format!("quotient unavailable: {e}\n")),
    }
    let t = match t_gamma(g, k) {
        Ok(t) => t,
        Err(e) => {
            s.push_str(&format!("T unavailable: {e}\n"));
            return;
        }
    };
    s.push_str(&format!("colours {}\n", t.colour_count()));
    match compute_n(&t) {
        Ok(n) => {
            s.push_str(&format!("N {} window {}..{}", n.n_hat, n.window.0, n.window.1));
            s.push_str(if n.inconclusive { " inconclusive\n" } else { "\n" });
            s.push_str(&format!("M {}\n", 2 * k + n.n_hat));
        }
        Err(e) => s.push_str(&format!("N unavailable: {e}\n")),
    }
}

fn iso(g1: &LayeredDigraph, g2: &LayeredDigraph, s: &mut String) -> Result<i32> {
    let d = decide_iso(g1, g2)?;
    s.push_str(&d.outcome.to_string());
    if let Some(x) = &d.discriminator {
        s.push_str(&format!(" {x}"));
    }
    s.push('\n');
    if let Some(cert) = &d.certificate {
        s.push_str("certificate\n");
        for (a, b) in cert {
            s.push_str(&format!("{a} {b}\n"));
        }
    }
    for link in &d.chain {
        s.push_str(&format!("ball {} verified\n", link.depth));
    }
    Ok(match d.outcome {
        IsoOutcome::Isomorphic => 0,
        IsoOutcome::NotIsomorphic => 1,
        IsoOutcome::InsufficientDepth => 2,
    })
}

fn extendiso(g1: &LayeredDigraph, g2: &LayeredDigraph, s: &mut String) -> Result<i32> {
    let k1 = compute_k(g1)?.k();
    let k2 = compute_k(g2)?.k();
    let (Some(k), true) = (k1, k1 == k2) else {
        s.push_str(&format!("no_chain k differs or is unknown ({k1:?}, {k2:?})\n"));
        return Ok(1);
    };
    let (t, u) = (t_gamma(g1, k)?, t_gamma(g2, k)?);
    let n = compute_n(&u)?;
    let top = t.available_depth().min(u.available_depth());
    let start = n.n_hat + 1;
    if start > top {
        s.push_str(&format!("insufficient_depth need {start} have {top}\n"));
        return Ok(2);
    }
    let Some(bridge) = base_colour_bridge(&t, &u) else {
        s.push_str("no_chain colour types differ\n");
        return Ok(1);
    };
    let Some(mut phi) = find_ball_iso(&t, &u, start)? else {
        s.push_str(&format!("no_chain no ball isomorphism at depth {start}\n"));
        return Ok(1);
    };
    s.push_str(&format!("N {}\n", n.n_hat));
    loop {
        check_ball_iso(&t, &u, phi.depth, &phi.map, &bridge).map_err(Error::Invariant)?;
        s.push_str(&format!("ball {} vertices {} verified\n", phi.depth, phi.map.len()));
        if phi.depth >= top {
            break;
        }
        phi = extend_ball_iso(&phi, &t, &u)?;
    }
    Ok(0)
}
