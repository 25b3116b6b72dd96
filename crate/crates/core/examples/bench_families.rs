// Generates the load balancer and logging families and times projection.
// With `--write DIR` it also stores the n = 10 instances as `.gt` files.

use std::error::Error;
use std::fs;
use std::path::Path;

use mstproj::cli::{bench_table, bench_type, generate_family, BenchRow, Family};
use mstproj::syntax::pretty_global;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rows = Vec::new();
    for n in [1, 2, 5, 10, 20] {
        rows.push(BenchRow::Record(bench_type(&format!("lb_{n}"), &generate_family(Family::LoadBalancer, n))));
        rows.push(BenchRow::Record(bench_type(&format!("logging_{n}"), &generate_family(Family::Logging, n))));
    }
    print!("{}", bench_table(&rows));
    Ok(())
}

/// The text stored in the corpus for instance `n` of `kind`.
#[allow(dead_code)]
pub fn family_file(kind: Family, n: usize) -> String {
    format!("{}\n", pretty_global(&generate_family(kind, n)))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().collect();
    if let [_, flag, dir] = &args[..] {
        if flag == "--write" {
            let dir = Path::new(dir);
            fs::write(dir.join("lb_10.gt"), family_file(Family::LoadBalancer, 10))?;
            fs::write(dir.join("logging_10.gt"), family_file(Family::Logging, 10))?;
        }
    }
    run_example()
}
