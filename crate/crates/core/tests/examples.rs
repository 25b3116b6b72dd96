//! Runs every example through its `run_example` entry point.

mod project_load_balancing {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/project_load_balancing.rs"));
}

mod reject_variant {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/reject_variant.rs"));
}

mod available_messages {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/available_messages.rs"));
}

mod automata_dot {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/automata_dot.rs"));
}

mod naive_confusion {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/naive_confusion.rs"));
}

mod swap_traces {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/swap_traces.rs"));
}

mod bench_families {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/bench_families.rs"));
}

mod verify_corpus {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/verify_corpus.rs"));
}

mod parse_errors {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/parse_errors.rs"));
}

#[test]
fn examples_run() {
    project_load_balancing::run_example().expect("project_load_balancing");
    reject_variant::run_example().expect("reject_variant");
    available_messages::run_example().expect("available_messages");
    automata_dot::run_example().expect("automata_dot");
    naive_confusion::run_example().expect("naive_confusion");
    swap_traces::run_example().expect("swap_traces");
    bench_families::run_example().expect("bench_families");
    verify_corpus::run_example().expect("verify_corpus");
    parse_errors::run_example().expect("parse_errors");
}
