// Parses a few well-formed and malformed global types and prints what the
// parser and the validator report.

use std::error::Error;

use mstproj::syntax::{parse_global, parse_global_raw, pretty_global, validate};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let inputs = [
        "mu t. p->q:a. + { q->r:b. t, q->r:c. end }",
        "p->q:a.\n  p->p:b. end",
        "+ { p->q:a. end, p->q:a. p->r:b. end }",
        "mu t. mu s. t",
        "p->q:a. x",
        "p->q:a.\n  p->q end",
    ];
    for text in inputs {
        match parse_global(text) {
            Ok(g) => println!("ok: {}", pretty_global(&g)),
            Err(e) => println!("error: {e}"),
        }
    }
    let raw = parse_global_raw("+ { p->q:a. end, p->q:a. p->r:b. end }")?;
    for v in validate(&raw).violations {
        println!("violation: {v}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
