mod common;

use std::collections::VecDeque;

use mstproj::automata::{format_trace, Event};
use mstproj::csm::{
    build_csm, channel_compliant, equivalent_mod_swaps, explore, explore_capped, swap_at, swap_rule, Csm, CsmError, SwapRule,
};
use mstproj::projection::project_all;
use mstproj::syntax::Message;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{all_corpus, corpus, random_global, random_run};

fn corpus_machines() -> Vec<(String, Csm)> {
    all_corpus()
        .into_iter()
        .filter_map(|(n, g)| {
            let rep = project_all(&g);
            rep.projectable().then(|| (n, build_csm(&rep.locals).unwrap()))
        })
        .collect()
}

fn expected_channel(w: &[Event], p: &mstproj::syntax::Role, q: &mstproj::syntax::Role) -> VecDeque<Message> {
    let mut out = VecDeque::new();
    for e in w.iter().filter(|e| &e.sender == p && &e.receiver == q) {
        if e.is_send() {
            out.push_back(e.message.clone());
        } else {
            out.pop_front();
        }
    }
    out
}

fn check_channels(c: &Csm, w: &[Event]) -> Result<(), TestCaseError> {
    for end in c.replay(w).map_err(|(i, e)| TestCaseError::fail(format!("step {i}: {e}")))? {
        for p in c.roles() {
            for q in c.roles().iter().filter(|q| *q != p) {
                let got = c.channel(&end, p, q).cloned().unwrap_or_default();
                prop_assert_eq!(got, expected_channel(w, p, q), "{}->{} after {}", p, q, format_trace(w));
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn channels_hold_sends_minus_receives(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = random_global(&mut rng, 6);
        let rep = project_all(&g);
        prop_assume!(rep.projectable());
        let c = build_csm(&rep.locals).unwrap();
        let (w, _) = random_run(&c, &mut rng, 14);
        prop_assert!(channel_compliant(&w));
        for i in 0..=w.len() {
            check_channels(&c, &w[..i])?;
        }
    }

    #[test]
    fn swaps_follow_the_rules(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let machines = corpus_machines();
        let (_, c) = &machines[(seed % machines.len() as u64) as usize];
        let (w, _) = random_run(c, &mut rng, 16);
        let end = c.replay(&w).unwrap();
        prop_assert!(equivalent_mod_swaps(&w, &w));
        for i in 0..w.len().saturating_sub(1) {
            let (a, b) = (&w[i], &w[i + 1]);
            if a == b {
                continue;
            }
            let u = swap_at(&w, i);
            let rule = swap_rule(&w[..i], a, b);
            // A send and a receive on one channel swap only behind an older message.
            if a.sender == b.sender && a.receiver == b.receiver && a.is_send() != b.is_send() {
                let on = |e: &&Event| e.sender == a.sender && e.receiver == a.receiver;
                let sends = w[..i].iter().filter(on).filter(|e| e.is_send()).count();
                let recvs = w[..i].iter().filter(on).filter(|e| !e.is_send()).count();
                prop_assert_eq!(rule == Some(SwapRule::SameChannel), sends > recvs);
            }
            match rule {
                Some(_) => {
                    prop_assert!(equivalent_mod_swaps(&w, &u));
                    prop_assert_eq!(c.replay(&u).ok(), Some(end.clone()));
                }
                None => {
                    prop_assert!(!equivalent_mod_swaps(&w, &u));
                }
            }
        }
    }
}

#[test]
fn explored_traces_are_channel_compliant() {
    for (name, c) in corpus_machines() {
        let r = explore(&c, 10, 2).unwrap();
        for w in r.maximal_traces.iter().chain(&r.prefixes) {
            assert!(channel_compliant(w), "{name}: {}", format_trace(w));
        }
    }
}

#[test]
fn exploration_is_reproducible() {
    let g = corpus("instrument_control_a");
    let c = build_csm(&project_all(&g).locals).unwrap();
    let (a, b) = (explore(&c, 12, 2).unwrap(), explore(&c, 12, 2).unwrap());
    assert_eq!(a.maximal_traces, b.maximal_traces);
    assert_eq!(a.prefixes, b.prefixes);
    assert_eq!(a.visited, b.visited);
}

#[test]
fn state_cap_is_enforced() {
    let c = build_csm(&project_all(&corpus("logging_10")).locals).unwrap();
    assert!(matches!(explore_capped(&c, 12, 2, 10), Err(CsmError::ExplosionGuard { .. })));
}

#[test]
fn mismatched_receives_are_not_equivalent() {
    let w: Vec<Event> = ["p>r!a", "q>r!b", "p>r?a", "q>r?b"].iter().map(|s| s.parse().unwrap()).collect();
    let u = swap_at(&w, 2);
    assert_eq!(swap_rule(&w[..2], &w[2], &w[3]), None);
    assert!(!equivalent_mod_swaps(&w, &u));
}
