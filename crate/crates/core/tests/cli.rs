mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mstproj::cli::{generate_family, Family, CSV_HEADER};
use mstproj::syntax::{parse_global, pretty_global, GlobalType};

use common::corpus_dir;

fn mstproj(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mstproj")).current_dir(dir).args(args).output().expect("binary runs")
}

fn gt(name: &str) -> String {
    corpus_dir().join(format!("{name}.gt")).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn project_writes_golden_files() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mstproj(tmp.path(), &["project", &gt("load_balancing"), "--out", "a"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("projectable: yes, gen_merge_used: yes\n"));
    let read = |r: &str| fs::read_to_string(tmp.path().join("a").join(format!("{r}.lt"))).unwrap();
    assert_eq!(read("Client"), "mu t. Server!req. & { Worker1?reply. t, Worker2?reply. t }\n");
    assert_eq!(read("Server"), "mu t. Client?req. (+) { Worker1!req. t, Worker2!req. t }\n");
    assert_eq!(read("Worker1"), "mu t. Server?req. Client!reply. t\n");
    assert_eq!(read("Worker2"), "mu t. Server?req. Client!reply. t\n");
    assert_eq!(fs::read_dir(tmp.path().join("a")).unwrap().count(), 4);
    // Byte-identical on a second run.
    let again = mstproj(tmp.path(), &["project", &gt("load_balancing"), "--out", "b"]);
    assert_eq!(again.stdout, o.stdout);
    for r in ["Client", "Server", "Worker1", "Worker2"] {
        let f = format!("{r}.lt");
        assert_eq!(fs::read(tmp.path().join("a").join(&f)).unwrap(), fs::read(tmp.path().join("b").join(&f)).unwrap());
    }
}

#[test]
fn project_one_role() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mstproj(tmp.path(), &["project", &gt("silent_loops"), "--role", "r"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "r: mu t. p!m. t\nprojectable: yes, gen_merge_used: no\n");
}

#[test]
fn project_reports_the_clash() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mstproj(tmp.path(), &["project", &gt("load_balancing_variant"), "--explain"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("AvailabilityClash"));
    let out = stdout(&o);
    let json = &out[out.find("\n{").unwrap() + 1..];
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(v["projectable"], false);
    let f = &v["failures"][0];
    assert_eq!(f["role"], "Client");
    assert_eq!(f["kind"], "AvailabilityClash");
    assert_eq!(f["witness"]["sender"], "Worker2");
    assert_eq!(f["witness"]["receiver"], "Client");
    assert_eq!(f["witness"]["message"], "reply");
}

#[test]
fn project_castagna_needs_the_generalised_merge() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mstproj(tmp.path(), &["project", &gt("castagna")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("gen_merge_used: yes"));
}

#[test]
fn project_rejects_invalid_input() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.gt"), "p->q:a.\n  p->q end").unwrap();
    let o = mstproj(tmp.path(), &["project", "bad.gt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:8"));
}

#[test]
fn verify_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(mstproj(tmp.path(), &["verify", &gt("load_balancing")]).status.code(), Some(0));
    assert!(!tmp.path().join("reports").exists());

    let naive = corpus_dir().join("naive");
    let lbv = naive.join("load_balancing_variant");
    let o = mstproj(tmp.path(), &["verify", &gt("load_balancing_variant"), "--locals", lbv.to_str().unwrap(), "--depth", "14"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    let report = fs::read_to_string(tmp.path().join("reports/load_balancing_variant.traces")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("confusion: ")), "{report}");

    // Projection fails, so only hand-written locals reach the checker.
    assert_eq!(mstproj(tmp.path(), &["verify", &gt("hmsc_counterexample")]).status.code(), Some(1));
    let hm = naive.join("hmsc_counterexample");
    let o = mstproj(tmp.path(), &["verify", &gt("hmsc_counterexample"), "--locals", hm.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn verify_reports_a_blown_cap() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mstproj"))
        .current_dir(tmp.path())
        .env("MSTPROJ_STATE_CAP", "5")
        .args(["verify", &gt("logging_10")])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
}

/// Node count written independently of the library: every end, loop,
/// variable and exchange counts once.
fn nodes(g: &GlobalType) -> usize {
    match g {
        GlobalType::End | GlobalType::Var(_) => 1,
        GlobalType::Rec { body, .. } => 1 + nodes(body),
        GlobalType::Choice { branches, .. } => branches.iter().map(|b| 1 + nodes(&b.cont)).sum(),
    }
}

fn participants(g: &GlobalType) -> usize {
    let mut roles = std::collections::BTreeSet::new();
    for s in g.subterms() {
        if let GlobalType::Choice { sender, branches } = s {
            roles.insert(sender.clone());
            roles.extend(branches.iter().map(|b| b.receiver.clone()));
        }
    }
    roles.len()
}

#[test]
fn bench_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mstproj(tmp.path(), &["bench", corpus_dir().to_str().unwrap(), "--csv", "out.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("out.csv")).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut seen = std::collections::BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let g = parse_global(&fs::read_to_string(gt(&rec[0])).unwrap()).unwrap();
        assert_eq!(rec[1].parse::<usize>().unwrap(), nodes(&g), "{}", &rec[0]);
        assert_eq!(rec[2].parse::<usize>().unwrap(), participants(&g), "{}", &rec[0]);
        assert!(rec[4].parse::<f64>().unwrap() >= 0.0);
        seen.insert(rec[0].to_string(), (rec[1].to_string(), rec[2].to_string(), rec[3].to_string()));
    }
    let row = |n: &str| seen[n].clone();
    assert_eq!(row("lb_10"), ("32".into(), "12".into(), "true".into()));
    assert_eq!(row("logging_10"), ("56".into(), "13".into(), "true".into()));
    assert_eq!(row("non_compatible_merge"), ("6".into(), "3".into(), "true".into()));
    assert_eq!(row("oauth2").2, "false");
}

#[test]
fn bench_skips_unparseable_files() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("good.gt"), "p->q:a. end").unwrap();
    fs::write(tmp.path().join("bad.gt"), "p->q a").unwrap();
    let o = mstproj(tmp.path(), &["bench", ".", "--csv", "out.csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l.starts_with("bad") && l.contains("warning")));
    let csv = fs::read_to_string(tmp.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn dot_output() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mstproj(tmp.path(), &["dot", &gt("load_balancing")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("digraph G {"));
    let o = mstproj(tmp.path(), &["dot", &gt("load_balancing"), "--which", "laut:Client"]);
    assert!(stdout(&o).contains("Client>Server!req"));
    let o = mstproj(tmp.path(), &["dot", &gt("load_balancing_variant"), "--which", "laut:Client"]);
    assert_ne!(o.status.code(), Some(0));
    let o = mstproj(tmp.path(), &["dot", &gt("load_balancing"), "--which", "gauts"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn family_files_match_the_generator() {
    for (kind, name) in [(Family::LoadBalancer, "lb_10"), (Family::Logging, "logging_10")] {
        let text = fs::read_to_string(gt(name)).unwrap();
        assert_eq!(text, format!("{}\n", pretty_global(&generate_family(kind, 10))));
    }
}
