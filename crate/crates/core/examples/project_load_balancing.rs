// Projects the two-worker load balancer onto every role.

use std::error::Error;

use mstproj::projection::project_all;
use mstproj::syntax::{parse_global, pretty_global, pretty_local};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let g = parse_global(include_str!("../corpus/load_balancing.gt"))?;
    println!("{}", pretty_global(&g));
    let rep = project_all(&g);
    for (role, l) in &rep.locals {
        println!("{role}: {}", pretty_local(l));
    }
    println!("projectable: {}, gen_merge_used: {}", rep.projectable(), rep.gen_merge_used());
    if !rep.projectable() {
        return Err("load balancer should project".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
