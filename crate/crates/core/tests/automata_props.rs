mod common;

use std::collections::BTreeSet;

use mstproj::automata::{
    bounded_inclusion, bounded_words, eliminate_epsilon, gaut, laut, project_alphabet, role_alphabet, StateMachine,
};
use mstproj::csm::channel_compliant;
use mstproj::projection::project_all;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{all_corpus, random_global};

fn machines(g: &mstproj::syntax::GlobalType) -> Vec<StateMachine> {
    let mut out = vec![gaut(g)];
    out.extend(project_all(g).locals.iter().map(|(r, l)| laut(l, r)));
    out
}

/// Each state has either letter transitions only or exactly one ε-transition,
/// and the final state is the only sink.
fn assert_shape(m: &StateMachine) {
    for s in 0..m.state_count() {
        let out: Vec<_> = m.outgoing(s).collect();
        let eps = out.iter().filter(|t| t.label.is_none()).count();
        assert!(eps == 0 || out.len() == 1, "state {s} mixes ε with other transitions");
        assert_eq!(out.is_empty(), m.is_final(s), "state {s}: sink iff final");
    }
    assert!(m.finals().len() <= 1);
}

fn longest_eps_chain(m: &StateMachine, s: usize) -> usize {
    m.outgoing(s).filter(|t| t.label.is_none()).map(|t| 1 + longest_eps_chain(m, t.to)).max().unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn epsilon_elimination_preserves_words(seed in any::<u64>()) {
        let g = random_global(&mut StdRng::seed_from_u64(seed), 5);
        for m in machines(&g) {
            prop_assert_eq!(bounded_words(&m, 8).unwrap(), bounded_words(&eliminate_epsilon(&m), 8).unwrap());
        }
    }

    #[test]
    fn random_machines_have_the_expected_shape(seed in any::<u64>()) {
        let g = random_global(&mut StdRng::seed_from_u64(seed), 5);
        let ga = gaut(&g);
        prop_assert_eq!(ga.finals().len(), 1);
        for m in machines(&g) {
            assert_shape(&m);
        }
    }

    #[test]
    fn global_words_are_channel_compliant(seed in any::<u64>()) {
        let g = random_global(&mut StdRng::seed_from_u64(seed), 5);
        for w in bounded_words(&gaut(&g), 8).unwrap() {
            prop_assert!(channel_compliant(&w.events));
        }
    }

    #[test]
    fn inclusion_matches_word_enumeration(seed in any::<u64>()) {
        let g = random_global(&mut StdRng::seed_from_u64(seed), 5);
        let ga = gaut(&g);
        for (r, l) in project_all(&g).locals {
            let a = project_alphabet(&ga, &role_alphabet(ga.alphabet(), &r));
            let b = laut(&l, &r);
            let words_b: BTreeSet<_> = bounded_words(&b, 6).unwrap().into_iter().map(|w| w.events).collect();
            let enumerated = bounded_words(&a, 6).unwrap().into_iter().all(|w| words_b.contains(&w.events));
            prop_assert_eq!(bounded_inclusion(&a, &b, 6).is_ok(), enumerated);
        }
    }
}

#[test]
fn corpus_machines_have_the_expected_shape() {
    for (name, g) in all_corpus() {
        for m in machines(&g) {
            assert_shape(&m);
            for s in 0..m.state_count() {
                assert!(longest_eps_chain(&m, s) <= 2, "{name}: state {s}");
            }
        }
        assert_eq!(gaut(&g).finals().len(), 1, "{name}");
    }
}

#[test]
fn one_end_state_per_machine() {
    let g = mstproj::syntax::parse_global("+ { p->q:a. end, p->q:b. q->r:c. end }").unwrap();
    let m = gaut(&g);
    assert_eq!(m.finals().len(), 1);
    assert_eq!(m.transitions().iter().filter(|t| m.is_final(t.to)).count(), 2);
}
