use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mstproj::cli::{run, Command, RunConfig};
use mstproj::syntax::Role;

#[derive(Parser)]
#[command(name = "mstproj", about = "Project global session types and check the resulting machines")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Project a global type onto every role (or one with --role).
    Project {
        input: PathBuf,
        #[arg(long)]
        role: Option<String>,
        /// Directory for `<Role>.lt` files.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print failures as JSON.
        #[arg(long)]
        explain: bool,
    },
    /// Explore the communicating machines and compare against the global type.
    Verify {
        input: PathBuf,
        /// Use hand-written local types from this directory instead of projecting.
        #[arg(long)]
        locals: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        channel_bound: usize,
        /// Base directory for the `reports/` folder.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        explain: bool,
    },
    /// Time projection over every `.gt` file of a directory.
    Bench {
        dir: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print an automaton in DOT.
    Dot {
        input: PathBuf,
        /// `gaut` or `laut:ROLE`.
        #[arg(long, default_value = "gaut")]
        which: String,
    },
}

fn main() -> ExitCode {
    let cfg = match Args::parse().cmd {
        Cmd::Project { input, role, out, explain } => RunConfig {
            role_filter: role.map(Role),
            out_dir: out,
            explain,
            ..RunConfig::new(Command::Project, input)
        },
        Cmd::Verify { input, locals, depth, channel_bound, out, explain } => RunConfig {
            locals,
            depth,
            channel_bound,
            out_dir: out,
            explain,
            ..RunConfig::new(Command::Verify, input)
        },
        Cmd::Bench { dir, csv } => RunConfig { csv, ..RunConfig::new(Command::Bench, dir) },
        Cmd::Dot { input, which } => RunConfig { which, ..RunConfig::new(Command::Dot, input) },
    };
    let code = run(&cfg, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code.clamp(0, 255) as u8)
}
