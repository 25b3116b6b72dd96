// The load balancer variant where worker 1 forwards to worker 2: the
// client cannot tell which reply arrives first, so projection fails.

use std::error::Error;

use mstproj::projection::{project_all, FailureKind};
use mstproj::syntax::parse_global;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let g = parse_global(include_str!("../corpus/load_balancing_variant.gt"))?;
    let rep = project_all(&g);
    for f in rep.failures.values() {
        println!("{f}");
        if let Some(w) = &f.witness {
            println!("  witness: {w}");
        }
    }
    match rep.failures.values().next() {
        Some(f) if f.kind == FailureKind::AvailabilityClash => Ok(()),
        _ => Err("expected an availability clash".into()),
    }
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
