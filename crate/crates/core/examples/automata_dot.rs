// Prints the global automaton of the load balancer and the local automaton
// of its client in DOT.

use std::error::Error;

use mstproj::automata::{gaut, laut, to_dot};
use mstproj::projection::project_all;
use mstproj::syntax::{parse_global, Role};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let g = parse_global(include_str!("../corpus/load_balancing.gt"))?;
    print!("{}", to_dot(&gaut(&g)));
    let client = Role::from("Client");
    let rep = project_all(&g);
    let l = rep.locals.get(&client).ok_or("client should project")?;
    print!("{}", to_dot(&laut(l, &client)));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
