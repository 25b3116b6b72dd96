// Computes the messages that can reach the client while it waits, once
// per branch of the variant load balancer.

use std::error::Error;

use mstproj::analysis::{avail, dump, AvailContext};
use mstproj::syntax::{parse_global, GlobalType};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let g = parse_global(include_str!("../corpus/load_balancing_variant.gt"))?;
    let ctx = AvailContext::new(&g, &["Client"]);
    let GlobalType::Rec { body, .. } = &g else { return Err("expected a loop".into()) };
    let GlobalType::Choice { branches, .. } = &**body else { return Err("expected the request".into()) };
    let GlobalType::Choice { branches, .. } = &branches[0].cont else { return Err("expected a choice".into()) };
    for b in branches {
        println!("after Server->{}:{}", b.receiver, b.message);
        print!("{}", dump(&avail(&ctx, &b.cont)?));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
