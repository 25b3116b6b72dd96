// Runs the hand-written local types for the variant load balancer and
// finds an execution the global type does not allow.

use std::collections::BTreeMap;
use std::error::Error;

use mstproj::automata::format_trace;
use mstproj::csm::{build_csm, fidelity_check, CounterexampleKind};
use mstproj::syntax::{parse_global, parse_local, Role};

const LOCALS: [(&str, &str); 4] = [
    ("Client", include_str!("../corpus/naive/load_balancing_variant/Client.lt")),
    ("Server", include_str!("../corpus/naive/load_balancing_variant/Server.lt")),
    ("Worker1", include_str!("../corpus/naive/load_balancing_variant/Worker1.lt")),
    ("Worker2", include_str!("../corpus/naive/load_balancing_variant/Worker2.lt")),
];

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let g = parse_global(include_str!("../corpus/load_balancing_variant.gt"))?;
    let mut locals = BTreeMap::new();
    for (r, text) in LOCALS {
        locals.insert(Role::from(r), parse_local(text)?);
    }
    let report = fidelity_check(&g, &build_csm(&locals)?, 14, 2)?;
    let cx = report
        .counterexamples
        .iter()
        .find(|c| c.kind == CounterexampleKind::Confusion)
        .ok_or("expected a confusion trace")?;
    println!("{}", format_trace(&cx.trace));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
