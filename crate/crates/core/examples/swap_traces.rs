// Takes the longest explored trace of a protocol with two independent
// conversations, swaps every adjacent pair a rule allows, and checks each
// swapped trace lands in the same configuration.

use std::error::Error;

use mstproj::automata::format_trace;
use mstproj::csm::{build_csm, equivalent_mod_swaps, explore, swap_at, swap_rule};
use mstproj::projection::project_all;
use mstproj::syntax::parse_global;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let g = parse_global("p->q:a. r->s:b. q->r:c. p->q:d. end")?;
    let c = build_csm(&project_all(&g).locals)?;
    let res = explore(&c, 8, 2)?;
    let w = res.prefixes.iter().chain(&res.maximal_traces).max_by_key(|t| t.len()).ok_or("no traces")?;
    println!("{}", format_trace(w));
    let end = c.replay(w).map_err(|(i, e)| format!("step {i}: {e}"))?;
    for i in 0..w.len().saturating_sub(1) {
        if let Some(rule) = swap_rule(&w[..i], &w[i], &w[i + 1]) {
            let u = swap_at(w, i);
            let same = c.replay(&u).map_err(|(i, e)| format!("step {i}: {e}"))?.last() == end.last();
            println!("{i}: {rule:?} equivalent={} same_end={same}", equivalent_mod_swaps(w, &u));
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
