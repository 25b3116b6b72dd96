//! The `mstproj` commands, the parameterised protocol families and the
//! benchmark table.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::automata::{format_trace, gaut, laut, to_dot};
use crate::csm::{build_csm, fidelity_check, CsmError, FidelityReport};
use crate::projection::{project_all, project_roles, ProjectionFailure, ProjectionReport};
use crate::syntax::{
    ast_size, parse_global, parse_local, pretty_local, roles_of, Branch, GlobalType, LocalType, ParseError, Role,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Project,
    Verify,
    Bench,
    Dot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub input: PathBuf,
    pub role_filter: Option<Role>,
    pub depth: usize,
    pub channel_bound: usize,
    pub explain: bool,
    pub out_dir: Option<PathBuf>,
    /// Hand-written local types (`<Role>.lt`) for `verify`.
    pub locals: Option<PathBuf>,
    /// CSV destination for `bench`.
    pub csv: Option<PathBuf>,
    /// `gaut` or `laut:ROLE` for `dot`.
    pub which: String,
}

impl RunConfig {
    pub fn new(command: Command, input: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            input: input.into(),
            role_filter: None,
            depth: 12,
            channel_bound: 2,
            explain: false,
            out_dir: None,
            locals: None,
            csv: None,
            which: "gaut".to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{0}")]
    Csm(#[from] CsmError),
    #[error("{0}")]
    Usage(String),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn load_global(path: &Path) -> Result<GlobalType, CliError> {
    parse_global(&read(path)?).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

/// Reads every `<Role>.lt` file of a directory.
pub fn load_locals(dir: &Path) -> Result<BTreeMap<Role, LocalType>, CliError> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("lt") {
            continue;
        }
        let role = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let l = parse_local(&read(&path)?).map_err(|source| CliError::Parse { path: path.clone(), source })?;
        out.insert(Role(role), l);
    }
    Ok(out)
}

/// Runs one command. Returns the process exit code.
pub fn run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let res = match cfg.command {
        Command::Project => cmd_project(cfg, out, err),
        Command::Verify => cmd_verify(cfg, out, err),
        Command::Bench => cmd_bench(cfg, out, err),
        Command::Dot => cmd_dot(cfg, out),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                CliError::Csm(CsmError::ExplosionGuard { .. }) => 4,
                CliError::Usage(_) => 64,
                _ => 1,
            }
        }
    }
}

fn io_err(e: io::Error) -> CliError {
    CliError::Io { path: PathBuf::from("<stdout>"), source: e }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[derive(Serialize)]
struct Explanation<'a> {
    projectable: bool,
    failures: Vec<&'a ProjectionFailure>,
}

fn report_failures(rep: &ProjectionReport, explain: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    for f in rep.failures.values() {
        writeln!(err, "{f}").map_err(io_err)?;
        if let Some(w) = &f.witness {
            writeln!(err, "  witness: {w}").map_err(io_err)?;
        }
    }
    if explain {
        let e = Explanation { projectable: false, failures: rep.failures.values().collect() };
        writeln!(out, "{}", serde_json::to_string_pretty(&e).expect("serialisable")).map_err(io_err)?;
    }
    Ok(())
}

pub fn cmd_project(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let g = load_global(&cfg.input)?;
    let rep = match &cfg.role_filter {
        Some(r) => project_roles(&g, &[r.clone()].into()),
        None => project_all(&g),
    };
    for (r, l) in &rep.locals {
        writeln!(out, "{r}: {}", pretty_local(l)).map_err(io_err)?;
        if let Some(dir) = &cfg.out_dir {
            write_file(&dir.join(format!("{r}.lt")), &format!("{}\n", pretty_local(l)))?;
        }
    }
    writeln!(out, "projectable: {}, gen_merge_used: {}", yes(rep.projectable()), yes(rep.gen_merge_used())).map_err(io_err)?;
    if rep.projectable() {
        return Ok(0);
    }
    report_failures(&rep, cfg.explain, out, err)?;
    Ok(1)
}

pub fn cmd_verify(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    if cfg.channel_bound == 0 {
        return Err(CliError::Usage("--channel-bound must be at least 1".into()));
    }
    let g = load_global(&cfg.input)?;
    let locals = match &cfg.locals {
        Some(dir) => load_locals(dir)?,
        None => {
            let rep = project_all(&g);
            if !rep.projectable() {
                writeln!(out, "projectable: no").map_err(io_err)?;
                report_failures(&rep, cfg.explain, out, err)?;
                return Ok(1);
            }
            rep.locals
        }
    };
    let c = build_csm(&locals)?;
    let report = fidelity_check(&g, &c, cfg.depth, cfg.channel_bound)?;
    print_verdict(&report, out).map_err(io_err)?;
    if !report.counterexamples.is_empty() {
        let stem = cfg.input.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
        let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from(".")).join("reports");
        let mut text = String::new();
        for cx in &report.counterexamples {
            text.push_str(&format!("{}: {}\n", cx.kind, format_trace(&cx.trace)));
        }
        let path = dir.join(format!("{stem}.traces"));
        write_file(&path, &text)?;
        writeln!(out, "counterexamples written to {}", path.display()).map_err(io_err)?;
    }
    Ok(if !report.deadlock_free() {
        2
    } else if !report.passed() {
        3
    } else {
        0
    })
}

fn print_verdict(r: &FidelityReport, out: &mut dyn Write) -> io::Result<()> {
    let e = &r.exploration;
    writeln!(out, "depth {} / channel bound {}", r.depth, r.channel_bound)?;
    writeln!(out, "configurations: {}, trace classes: {}, global words: {}", e.visited, e.classes, r.global_words)?;
    writeln!(out, "deadlocks: {}", e.deadlocks.len())?;
    writeln!(out, "global traces executable: {}", yes(r.superset_ok()))?;
    writeln!(out, "executions specified: {}", yes(r.subset_ok()))?;
    if e.frontier_truncated {
        writeln!(out, "note: some sends were cut off by the channel bound")?;
    }
    if let Some(cx) = r.counterexamples.first() {
        writeln!(out, "first counterexample ({}): {}", cx.kind, format_trace(&cx.trace))?;
    }
    Ok(())
}

pub fn cmd_dot(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let g = load_global(&cfg.input)?;
    let m = if cfg.which == "gaut" {
        gaut(&g)
    } else if let Some(r) = cfg.which.strip_prefix("laut:") {
        let role = Role::from(r);
        let rep = project_roles(&g, &[role.clone()].into());
        match rep.locals.get(&role) {
            Some(l) => laut(l, &role),
            None => return Err(CliError::Usage(format!("cannot project onto `{r}`: {}", rep.failures[&role]))),
        }
    } else {
        return Err(CliError::Usage(format!("--which expects `gaut` or `laut:ROLE`, got `{}`", cfg.which)));
    };
    out.write_all(to_dot(&m).as_bytes()).map_err(io_err)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// Families

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    LoadBalancer,
    Logging,
}

fn choice(sender: &str, branches: Vec<(String, &str, GlobalType)>) -> GlobalType {
    GlobalType::Choice {
        sender: Role::from(sender),
        branches: branches.into_iter().map(|(q, m, cont)| Branch { receiver: Role(q), message: m.into(), cont }).collect(),
    }
}

fn chain(steps: &[(&str, &str, &str)], tail: GlobalType) -> GlobalType {
    steps.iter().rev().fold(tail, |g, (p, q, m)| GlobalType::exchange(p, q, m, g))
}

/// Instance `n` of a protocol family.
///
/// `LoadBalancer`: a server hands each request to one of `n` workers, who
/// reply to the client. `Logging`: as above with `n` backends that log every
/// request, plus a branch where the server flushes the logger.
pub fn generate_family(kind: Family, n: usize) -> GlobalType {
    assert!(n >= 1, "families start at n = 1");
    let t = GlobalType::var("t");
    let branches = match kind {
        Family::LoadBalancer => (1..=n)
            .map(|i| {
                let w = format!("Worker{i}");
                (w.clone(), "req", chain(&[(&w, "Client", "reply")], t.clone()))
            })
            .collect(),
        Family::Logging => {
            let mut bs: Vec<_> = (1..=n)
                .map(|i| {
                    let b = format!("Backend{i}");
                    let rest = chain(&[(&b, "Logger", "log"), ("Logger", &b, "ack"), (&b, "Client", "reply")], t.clone());
                    (b.clone(), "req", rest)
                })
                .collect();
            let flush = chain(&[("Logger", "Server", "flushed"), ("Server", "Client", "reply")], t.clone());
            bs.push(("Logger".to_string(), "flush", flush));
            bs
        }
    };
    GlobalType::rec("t", GlobalType::exchange("Client", "Server", "req", choice("Server", branches)))
}

// ---------------------------------------------------------------------------
// Bench

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub name: String,
    pub ast_size: usize,
    pub role_count: usize,
    pub gen_proj_used: bool,
    pub projectable: bool,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BenchRow {
    Record(BenchRecord),
    Skipped { name: String, reason: String },
}

pub const CSV_HEADER: &str = "name,ast_size,role_count,gen_proj_used,elapsed_ms";

/// Times `project_all` five times and keeps the median.
pub fn bench_type(name: &str, g: &GlobalType) -> BenchRecord {
    let mut times = Vec::with_capacity(5);
    let mut rep = None;
    for _ in 0..5 {
        let start = Instant::now();
        let r = project_all(g);
        times.push(start.elapsed().as_secs_f64() * 1000.0);
        rep = Some(r);
    }
    times.sort_by(f64::total_cmp);
    let rep = rep.expect("five runs");
    BenchRecord {
        name: name.to_string(),
        ast_size: ast_size(g),
        role_count: roles_of(g).len(),
        gen_proj_used: rep.gen_merge_used(),
        projectable: rep.projectable(),
        elapsed_ms: times[2],
    }
}

/// Benchmarks every `.gt` file of `dir`, in name order.
pub fn bench_dir(dir: &Path) -> Result<Vec<BenchRow>, CliError> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("gt"))
        .collect();
    paths.sort();
    let mut rows = Vec::new();
    for p in paths {
        let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        match load_global(&p) {
            Ok(g) => rows.push(BenchRow::Record(bench_type(&name, &g))),
            Err(e) => rows.push(BenchRow::Skipped { name, reason: e.to_string() }),
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in rows {
        if let BenchRow::Record(b) = r {
            s.push_str(&format!("{},{},{},{},{:.3}\n", b.name, b.ast_size, b.role_count, b.gen_proj_used, b.elapsed_ms));
        }
    }
    s
}

pub fn bench_table(rows: &[BenchRow]) -> String {
    let mut s = format!("{:<28} {:>5} {:>6} {:>9} {:>12} {:>10}\n", "example", "size", "roles", "gen.proj", "projectable", "time(ms)");
    for r in rows {
        match r {
            BenchRow::Record(b) => s.push_str(&format!(
                "{:<28} {:>5} {:>6} {:>9} {:>12} {:>10.3}\n",
                b.name,
                b.ast_size,
                b.role_count,
                yes(b.gen_proj_used),
                yes(b.projectable),
                b.elapsed_ms
            )),
            BenchRow::Skipped { name, reason } => s.push_str(&format!("{name:<28} warning: skipped ({reason})\n")),
        }
    }
    s
}

pub fn cmd_bench(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let rows = bench_dir(&cfg.input)?;
    out.write_all(bench_table(&rows).as_bytes()).map_err(io_err)?;
    for r in &rows {
        if let BenchRow::Skipped { name, reason } = r {
            writeln!(err, "warning: skipped {name}: {reason}").map_err(io_err)?;
        }
    }
    if let Some(path) = &cfg.csv {
        write_file(path, &bench_csv(&rows))?;
    }
    Ok(0)
}
