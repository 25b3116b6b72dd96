// Projects every corpus type and, where that succeeds, explores the
// resulting machines to depth 12 with at most 2 messages per channel.

use std::error::Error;
use std::fs;

use mstproj::cli::load_global;
use mstproj::csm::{build_csm, fidelity_check};
use mstproj::projection::project_all;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "gt"))
        .collect();
    paths.sort();
    for p in paths {
        let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let g = load_global(&p)?;
        let rep = project_all(&g);
        if !rep.projectable() {
            println!("{name:<28} not projectable");
            continue;
        }
        let r = fidelity_check(&g, &build_csm(&rep.locals)?, 12, 2)?;
        println!("{name:<28} deadlocks {} fidelity {}", r.exploration.deadlocks.len(), if r.passed() { "ok" } else { "violated" });
        if !r.passed() {
            return Err(format!("{name} should pass").into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
