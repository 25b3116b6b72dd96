#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mstproj::automata::Event;
use mstproj::cli::{load_global, load_locals};
use mstproj::csm::{Csm, CsmConfiguration};
use mstproj::syntax::{GlobalType, LocalType, Role};
use rand::seq::SliceRandom;
use rand::Rng;

pub const SCALAS_YOSHIDA: [&str; 5] = ["oauth2", "streaming", "instrument_control_a", "instrument_control_b", "multi_party_game"];

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus(name: &str) -> GlobalType {
    load_global(&corpus_dir().join(format!("{name}.gt"))).unwrap_or_else(|e| panic!("{e}"))
}

pub fn naive(name: &str) -> BTreeMap<Role, LocalType> {
    load_locals(&corpus_dir().join("naive").join(name)).unwrap_or_else(|e| panic!("{e}"))
}

/// Every corpus entry, sorted by name.
pub fn all_corpus() -> Vec<(String, GlobalType)> {
    let mut names: Vec<String> = fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "gt"))
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names.into_iter().map(|n| (n.clone(), corpus(&n))).collect()
}

/// A random run of at most `len` letters from the initial configuration,
/// with a random successor picked at every step.
pub fn random_run(c: &Csm, rng: &mut impl Rng, len: usize) -> (Vec<Event>, CsmConfiguration) {
    let mut conf = c.initial();
    let mut w = Vec::new();
    for _ in 0..len {
        let enabled = c.enabled(&conf);
        let Some(e) = enabled.choose(rng) else { break };
        let succ = c.successors(&conf, e).expect("enabled letters fire");
        conf = succ.choose(rng).expect("non-empty").clone();
        w.push(e.clone());
    }
    (w, conf)
}

pub const ROLES: [&str; 4] = ["p", "q", "r", "s"];
pub const LABELS: [&str; 2] = ["a", "b"];

/// A random well-formed global type: fresh binders, guarded and bound
/// variables, distinct `receiver:message` keys per choice.
pub fn random_global(rng: &mut impl Rng, depth: usize) -> GlobalType {
    let mut fresh = 0;
    gen_global(rng, depth, &mut Vec::new(), &mut fresh)
}

fn gen_global(rng: &mut impl Rng, depth: usize, scope: &mut Vec<(String, bool)>, fresh: &mut usize) -> GlobalType {
    let guarded: Vec<String> = scope.iter().filter(|(_, g)| *g).map(|(v, _)| v.clone()).collect();
    if depth == 0 {
        return match guarded.choose(rng) {
            Some(v) if rng.gen_bool(0.7) => GlobalType::var(v),
            _ => GlobalType::End,
        };
    }
    match rng.gen_range(0..10) {
        0 => GlobalType::End,
        1 if !guarded.is_empty() => GlobalType::var(guarded.choose(rng).unwrap()),
        2 | 3 => {
            let v = format!("t{fresh}");
            *fresh += 1;
            scope.push((v.clone(), false));
            let body = gen_global(rng, depth - 1, scope, fresh);
            scope.pop();
            GlobalType::rec(&v, body)
        }
        _ => {
            let sender = *ROLES.choose(rng).unwrap();
            let mut keys: Vec<(&str, &str)> = ROLES
                .iter()
                .filter(|r| **r != sender)
                .flat_map(|r| LABELS.iter().map(move |m| (*r, *m)))
                .collect();
            keys.shuffle(rng);
            let n = if rng.gen_bool(0.6) { 1 } else { rng.gen_range(2..=3) };
            let mut inner: Vec<(String, bool)> = scope.iter().map(|(v, _)| (v.clone(), true)).collect();
            let branches = keys[..n]
                .iter()
                .map(|(q, m)| mstproj::syntax::Branch {
                    receiver: Role::from(*q),
                    message: (*m).into(),
                    cont: gen_global(rng, depth - 1, &mut inner, fresh),
                })
                .collect();
            GlobalType::Choice { sender: Role::from(sender), branches }
        }
    }
}
