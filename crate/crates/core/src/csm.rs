//! Communicating state machines over FIFO channels: execution, bounded
//! exploration, deadlock detection and the protocol fidelity check against a
//! global type.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::automata::{bounded_words_capped, gaut, laut, AutomataError, Event, StateMachine};
use crate::syntax::{validate_local, GlobalType, LocalType, Message, Role};

pub const DEFAULT_STATE_CAP: usize = 200_000;

/// Exploration and enumeration cap, overridable with `MSTPROJ_STATE_CAP`.
pub fn state_cap() -> usize {
    std::env::var("MSTPROJ_STATE_CAP").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_STATE_CAP)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsmError {
    #[error("local type of `{role}` is invalid: {detail}")]
    InvalidLocal { role: Role, detail: String },
    #[error("state {state} of `{role}` mixes sends and receives")]
    MixedChoice { role: Role, state: usize },
    #[error("machine of `{role}` has event `{event}` that `{role}` does not perform")]
    ForeignEvent { role: Role, event: Event },
    #[error("machine of `{role}` talks to `{peer}`, which has no machine")]
    UnknownPeer { role: Role, peer: Role },
    #[error("exploration exceeded {cap} states")]
    ExplosionGuard { cap: usize },
}

impl From<AutomataError> for CsmError {
    fn from(e: AutomataError) -> Self {
        match e {
            AutomataError::ExplosionGuard { cap } => CsmError::ExplosionGuard { cap },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NotEnabled {
    #[error("`{0}` belongs to no machine")]
    UnknownRole(Role),
    #[error("no transition for `{0}` in the current state")]
    NoTransition(Event),
    #[error("`{0}` reads from an empty channel")]
    EmptyChannel(Event),
    #[error("`{event}` expects `{}` but the channel head is `{head}`", event.message)]
    HeadMismatch { event: Event, head: Message },
    #[error("`{0}` has no ε-transition")]
    NoEpsilon(Role),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    Letter(Event),
    Epsilon(Role),
}

/// Per-role states and per-channel queues, indexed by the CSM's role order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CsmConfiguration {
    states: Vec<usize>,
    channels: Vec<VecDeque<Message>>,
}

impl CsmConfiguration {
    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn all_channels_empty(&self) -> bool {
        self.channels.iter().all(VecDeque::is_empty)
    }
}

pub struct Csm {
    roles: Vec<Role>,
    index: BTreeMap<Role, usize>,
    machines: Vec<StateMachine>,
}

impl Csm {
    pub fn new(machines: BTreeMap<Role, StateMachine>) -> Result<Csm, CsmError> {
        let roles: Vec<Role> = machines.keys().cloned().collect();
        let index: BTreeMap<Role, usize> = roles.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
        for (role, m) in &machines {
            for t in m.transitions() {
                let Some(e) = &t.label else { continue };
                if e.active() != role {
                    return Err(CsmError::ForeignEvent { role: role.clone(), event: e.clone() });
                }
                let peer = if e.is_send() { &e.receiver } else { &e.sender };
                if !index.contains_key(peer) {
                    return Err(CsmError::UnknownPeer { role: role.clone(), peer: peer.clone() });
                }
            }
            for s in 0..m.state_count() {
                let kinds: BTreeSet<bool> = m.outgoing(s).filter_map(|t| t.label.as_ref().map(Event::is_send)).collect();
                if kinds.len() > 1 {
                    return Err(CsmError::MixedChoice { role: role.clone(), state: s });
                }
            }
        }
        Ok(Csm { roles, index, machines: machines.into_values().collect() })
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn machine(&self, role: &Role) -> Option<&StateMachine> {
        self.index.get(role).map(|&i| &self.machines[i])
    }

    fn chan(&self, sender: usize, receiver: usize) -> usize {
        sender * self.roles.len() + receiver
    }

    pub fn channel<'c>(&self, conf: &'c CsmConfiguration, sender: &Role, receiver: &Role) -> Option<&'c VecDeque<Message>> {
        let (p, q) = (*self.index.get(sender)?, *self.index.get(receiver)?);
        (p != q).then(|| &conf.channels[self.chan(p, q)])
    }

    pub fn state_of(&self, conf: &CsmConfiguration, role: &Role) -> Option<usize> {
        self.index.get(role).map(|&i| conf.states[i])
    }

    /// Follows a state's ε-transition while it is the only way out.
    fn settle(&self, role: usize, mut s: usize) -> usize {
        let m = &self.machines[role];
        for _ in 0..m.state_count() {
            let mut out = m.outgoing(s);
            match (out.next(), out.next()) {
                (Some(t), None) if t.label.is_none() => s = t.to,
                _ => break,
            }
        }
        s
    }

    pub fn initial(&self) -> CsmConfiguration {
        let n = self.roles.len();
        CsmConfiguration {
            states: (0..n).map(|i| self.settle(i, self.machines[i].initial())).collect(),
            channels: vec![VecDeque::new(); n * n],
        }
    }

    pub fn is_final(&self, conf: &CsmConfiguration) -> bool {
        conf.all_channels_empty()
            && conf.states.iter().enumerate().all(|(i, &s)| {
                let m = &self.machines[i];
                m.eps_closure([s]).iter().any(|q| m.is_final(*q))
            })
    }

    /// All letters enabled in `conf`, ignoring any channel bound, in role
    /// then transition order.
    pub fn enabled(&self, conf: &CsmConfiguration) -> Vec<Event> {
        let mut out = Vec::new();
        for (i, &s) in conf.states.iter().enumerate() {
            let m = &self.machines[i];
            for u in m.eps_closure([s]) {
                for t in m.outgoing(u) {
                    let Some(e) = &t.label else { continue };
                    if out.contains(e) {
                        continue;
                    }
                    if e.is_send() || self.head_ok(conf, e).is_ok() {
                        out.push(e.clone());
                    }
                }
            }
        }
        out
    }

    fn head_ok(&self, conf: &CsmConfiguration, e: &Event) -> Result<(), NotEnabled> {
        let c = self.chan(self.index[&e.sender], self.index[&e.receiver]);
        match conf.channels[c].front() {
            None => Err(NotEnabled::EmptyChannel(e.clone())),
            Some(h) if *h != e.message => Err(NotEnabled::HeadMismatch { event: e.clone(), head: h.clone() }),
            Some(_) => Ok(()),
        }
    }

    /// Every configuration reachable from `conf` by the letter `e`.
    pub fn successors(&self, conf: &CsmConfiguration, e: &Event) -> Result<Vec<CsmConfiguration>, NotEnabled> {
        let &p = self.index.get(e.active()).ok_or_else(|| NotEnabled::UnknownRole(e.active().clone()))?;
        for r in [&e.sender, &e.receiver] {
            if !self.index.contains_key(r) {
                return Err(NotEnabled::UnknownRole(r.clone()));
            }
        }
        let m = &self.machines[p];
        let targets: BTreeSet<usize> = m
            .eps_closure([conf.states[p]])
            .into_iter()
            .flat_map(|u| m.outgoing(u).filter(|t| t.label.as_ref() == Some(e)).map(|t| t.to).collect::<Vec<_>>())
            .collect();
        if targets.is_empty() {
            return Err(NotEnabled::NoTransition(e.clone()));
        }
        let c = self.chan(self.index[&e.sender], self.index[&e.receiver]);
        let mut base = conf.clone();
        if e.is_send() {
            base.channels[c].push_back(e.message.clone());
        } else {
            self.head_ok(conf, e)?;
            base.channels[c].pop_front();
        }
        Ok(targets
            .into_iter()
            .map(|t| {
                let mut next = base.clone();
                next.states[p] = self.settle(p, t);
                next
            })
            .collect())
    }

    /// Performs one move. Letters pick the first matching transition.
    pub fn step(&self, conf: &CsmConfiguration, mv: &Move) -> Result<CsmConfiguration, NotEnabled> {
        match mv {
            Move::Letter(e) => Ok(self.successors(conf, e)?.swap_remove(0)),
            Move::Epsilon(role) => {
                let &p = self.index.get(role).ok_or_else(|| NotEnabled::UnknownRole(role.clone()))?;
                let t = self.machines[p]
                    .outgoing(conf.states[p])
                    .find(|t| t.label.is_none())
                    .ok_or_else(|| NotEnabled::NoEpsilon(role.clone()))?;
                let mut next = conf.clone();
                next.states[p] = t.to;
                Ok(next)
            }
        }
    }

    /// Configurations reached by running `w` from the initial configuration.
    /// On failure, returns the index of the first letter that cannot fire.
    pub fn replay(&self, w: &[Event]) -> Result<Vec<CsmConfiguration>, (usize, NotEnabled)> {
        let mut cur = vec![self.initial()];
        for (i, e) in w.iter().enumerate() {
            let mut next = Vec::new();
            let mut err = None;
            for c in &cur {
                match self.successors(c, e) {
                    Ok(s) => next.extend(s),
                    Err(x) => err = Some(x),
                }
            }
            if next.is_empty() {
                return Err((i, err.expect("at least one configuration")));
            }
            next.sort_by_key(|c| format!("{c:?}"));
            next.dedup();
            cur = next;
        }
        Ok(cur)
    }

    pub fn describe(&self, conf: &CsmConfiguration) -> String {
        let mut s = String::new();
        for (i, r) in self.roles.iter().enumerate() {
            s.push_str(&format!("{r}: [{}] {}\n", conf.states[i], self.machines[i].label(conf.states[i])));
        }
        for (p, rp) in self.roles.iter().enumerate() {
            for (q, rq) in self.roles.iter().enumerate() {
                let ch = &conf.channels[self.chan(p, q)];
                if p != q && !ch.is_empty() {
                    let items: Vec<&str> = ch.iter().map(Message::as_str).collect();
                    s.push_str(&format!("{rp}->{rq}: {}\n", items.join(" ")));
                }
            }
        }
        s
    }
}

pub fn build_csm(locals: &BTreeMap<Role, LocalType>) -> Result<Csm, CsmError> {
    let mut machines = BTreeMap::new();
    for (r, l) in locals {
        if let Some(v) = validate_local(l).violations.first() {
            return Err(CsmError::InvalidLocal { role: r.clone(), detail: v.to_string() });
        }
        machines.insert(r.clone(), laut(l, r));
    }
    Csm::new(machines)
}

// ---------------------------------------------------------------------------
// Exploration

#[derive(Debug, Clone, Default)]
pub struct ExplorationResult {
    /// Distinct configurations reached.
    pub visited: usize,
    /// Distinct explored traces up to per-role equality of projections.
    pub classes: usize,
    pub deadlocks: Vec<(Vec<Event>, CsmConfiguration)>,
    /// Some send was not taken because its channel was full.
    pub frontier_truncated: bool,
    /// Some trace was cut off at the depth bound.
    pub depth_truncated: bool,
    pub maximal_traces: Vec<Vec<Event>>,
    /// Traces whose exploration stopped at a bound.
    pub prefixes: Vec<Vec<Event>>,
}

struct Node {
    conf: CsmConfiguration,
    parent: usize,
    event: Option<Event>,
    depth: usize,
}

fn trace_of(nodes: &[Node], mut i: usize) -> Vec<Event> {
    let mut w = Vec::new();
    while let Some(e) = &nodes[i].event {
        w.push(e.clone());
        i = nodes[i].parent;
    }
    w.reverse();
    w
}

/// Breadth-first exploration of all traces of at most `depth` letters.
/// Traces that agree on every role's projection are explored once.
pub fn explore(c: &Csm, depth: usize, channel_bound: usize) -> Result<ExplorationResult, CsmError> {
    explore_capped(c, depth, channel_bound, state_cap())
}

pub fn explore_capped(c: &Csm, depth: usize, channel_bound: usize, cap: usize) -> Result<ExplorationResult, CsmError> {
    let n = c.roles.len();
    let mut res = ExplorationResult::default();
    let mut configs: HashSet<CsmConfiguration> = HashSet::new();
    let mut deadlocked: HashSet<CsmConfiguration> = HashSet::new();
    // Per-role history tries: (parent node, event) -> node.
    let mut tries: Vec<HashMap<(u32, Event), u32>> = vec![HashMap::new(); n];
    let mut seen: HashSet<(Vec<u32>, CsmConfiguration)> = HashSet::new();
    let mut nodes = vec![Node { conf: c.initial(), parent: 0, event: None, depth: 0 }];
    let mut hists = vec![vec![0u32; n]];
    seen.insert((hists[0].clone(), nodes[0].conf.clone()));
    let mut head = 0;
    while head < nodes.len() {
        let i = head;
        head += 1;
        let conf = nodes[i].conf.clone();
        configs.insert(conf.clone());
        let enabled = c.enabled(&conf);
        let is_final = c.is_final(&conf);
        if is_final {
            res.maximal_traces.push(trace_of(&nodes, i));
        }
        if enabled.is_empty() {
            if !is_final && deadlocked.insert(conf.clone()) {
                res.deadlocks.push((trace_of(&nodes, i), conf));
            }
            continue;
        }
        if nodes[i].depth >= depth {
            res.depth_truncated = true;
            res.prefixes.push(trace_of(&nodes, i));
            continue;
        }
        let mut expanded = false;
        for e in enabled {
            if e.is_send() && c.channel(&conf, &e.sender, &e.receiver).map_or(0, VecDeque::len) >= channel_bound {
                res.frontier_truncated = true;
                continue;
            }
            let p = c.index[e.active()];
            for next in c.successors(&conf, &e).expect("enabled") {
                let mut h = hists[i].clone();
                let fresh = tries[p].len() as u32 + 1;
                h[p] = *tries[p].entry((h[p], e.clone())).or_insert(fresh);
                if seen.insert((h.clone(), next.clone())) {
                    expanded = true;
                    nodes.push(Node { conf: next, parent: i, event: Some(e.clone()), depth: nodes[i].depth + 1 });
                    hists.push(h);
                    if nodes.len() > cap {
                        return Err(CsmError::ExplosionGuard { cap });
                    }
                } else {
                    expanded = true;
                }
            }
        }
        if !expanded {
            res.prefixes.push(trace_of(&nodes, i));
        }
    }
    res.visited = configs.len();
    res.classes = nodes.len();
    res.maximal_traces.sort();
    res.prefixes.sort();
    res.deadlocks.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(res)
}

// ---------------------------------------------------------------------------
// Traces

/// Every receive reads the oldest unread message of its channel.
pub fn channel_compliant(w: &[Event]) -> bool {
    let mut chans: HashMap<(&Role, &Role), VecDeque<&Message>> = HashMap::new();
    for e in w {
        let q = chans.entry((&e.sender, &e.receiver)).or_default();
        if e.is_send() {
            q.push_back(&e.message);
        } else if q.pop_front() != Some(&e.message) {
            return false;
        }
    }
    true
}

/// Events of `w` performed by `role`.
pub fn project_trace<'a>(w: &'a [Event], role: &Role) -> Vec<&'a Event> {
    w.iter().filter(|e| e.active() == role).collect()
}

fn roles_in(w: &[Event]) -> BTreeSet<&Role> {
    w.iter().map(Event::active).collect()
}

/// Decides whether `u` is reachable from `w` by swapping adjacent events.
pub fn equivalent_mod_swaps(w: &[Event], u: &[Event]) -> bool {
    if !channel_compliant(u) {
        return false;
    }
    let roles: BTreeSet<&Role> = roles_in(w).union(&roles_in(u)).copied().collect();
    roles.into_iter().all(|r| project_trace(w, r) == project_trace(u, r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwapRule {
    /// Two sends by different roles.
    Sends,
    /// Two receives by different roles.
    Receives,
    /// A send and a receive of different roles that are not the two ends of one channel.
    SendReceive,
    /// A send and a receive on one channel, when the channel is already non-empty.
    SameChannel,
}

/// The rule that allows swapping the adjacent events `a` and `b` after `prefix`, if any.
pub fn swap_rule(prefix: &[Event], a: &Event, b: &Event) -> Option<SwapRule> {
    match (a.is_send(), b.is_send()) {
        (true, true) => (a.sender != b.sender).then_some(SwapRule::Sends),
        (false, false) => (a.receiver != b.receiver).then_some(SwapRule::Receives),
        _ => {
            let (s, r) = if a.is_send() { (a, b) } else { (b, a) };
            let (p, q) = (&s.sender, &s.receiver);
            if p != &r.receiver && (p != &r.sender || q != &r.receiver) {
                return Some(SwapRule::SendReceive);
            }
            if p == &r.sender && q == &r.receiver {
                let on = |e: &&Event| &e.sender == p && &e.receiver == q;
                let sends = prefix.iter().filter(on).filter(|e| e.is_send()).count();
                let recvs = prefix.iter().filter(on).filter(|e| !e.is_send()).count();
                if sends > recvs {
                    return Some(SwapRule::SameChannel);
                }
            }
            None
        }
    }
}

/// `w` with positions `i` and `i + 1` exchanged.
pub fn swap_at(w: &[Event], i: usize) -> Vec<Event> {
    let mut u = w.to_vec();
    u.swap(i, i + 1);
    u
}

// ---------------------------------------------------------------------------
// Fidelity

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CounterexampleKind {
    /// A stuck, non-final configuration.
    Deadlock,
    /// A global-type trace the machines cannot execute.
    Missing,
    /// A complete execution no global-type trace explains.
    Unspecified,
    /// An execution prefix that no single global-type run agrees with.
    Confusion,
}

impl fmt::Display for CounterexampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CounterexampleKind::Deadlock => "deadlock",
            CounterexampleKind::Missing => "missing",
            CounterexampleKind::Unspecified => "unspecified",
            CounterexampleKind::Confusion => "confusion",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub kind: CounterexampleKind,
    pub trace: Vec<Event>,
}

#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub depth: usize,
    pub channel_bound: usize,
    pub exploration: ExplorationResult,
    /// Global-type words checked for replay.
    pub global_words: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl FidelityReport {
    fn has(&self, kinds: &[CounterexampleKind]) -> bool {
        self.counterexamples.iter().any(|c| kinds.contains(&c.kind))
    }

    pub fn deadlock_free(&self) -> bool {
        !self.has(&[CounterexampleKind::Deadlock])
    }

    /// Every global-type trace is executable.
    pub fn superset_ok(&self) -> bool {
        !self.has(&[CounterexampleKind::Missing])
    }

    /// Every execution is explained by the global type.
    pub fn subset_ok(&self) -> bool {
        !self.has(&[CounterexampleKind::Unspecified, CounterexampleKind::Confusion])
    }

    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Searches the global automaton for a run that agrees with `w` on every role.
pub struct RunMatcher<'a> {
    m: &'a StateMachine,
}

impl<'a> RunMatcher<'a> {
    pub fn new(m: &'a StateMachine) -> Self {
        RunMatcher { m }
    }

    /// Some complete run has exactly the per-role projections of `w`.
    pub fn explains(&self, w: &[Event]) -> bool {
        self.search(w, true)
    }

    /// Some run extends every per-role projection of `w`.
    pub fn agrees(&self, w: &[Event]) -> bool {
        self.search(w, false)
    }

    fn search(&self, w: &[Event], exact: bool) -> bool {
        let roles: Vec<&Role> = roles_in(w).into_iter().collect();
        let targets: Vec<Vec<&Event>> = roles.iter().map(|r| project_trace(w, r)).collect();
        let idx: HashMap<&Role, usize> = roles.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let done = |counts: &[u16]| counts.iter().zip(&targets).all(|(c, t)| *c as usize == t.len());
        let start = (self.m.initial(), vec![0u16; roles.len()]);
        let mut seen = HashSet::from([start.clone()]);
        let mut stack = vec![start];
        while let Some((s, counts)) = stack.pop() {
            if done(&counts) && (!exact || self.m.is_final(s)) {
                return true;
            }
            for t in self.m.outgoing(s) {
                let next = match &t.label {
                    None => Some(counts.clone()),
                    Some(e) => match idx.get(e.active()) {
                        Some(&r) if (counts[r] as usize) < targets[r].len() => (targets[r][counts[r] as usize] == e).then(|| {
                            let mut c = counts.clone();
                            c[r] += 1;
                            c
                        }),
                        _ if exact => None,
                        _ => Some(counts.clone()),
                    },
                };
                if let Some(c) = next {
                    if seen.insert((t.to, c.clone())) {
                        stack.push((t.to, c));
                    }
                }
            }
        }
        false
    }
}

/// Bounded check that the machines implement the global type.
pub fn fidelity_check(g: &GlobalType, c: &Csm, depth: usize, channel_bound: usize) -> Result<FidelityReport, CsmError> {
    let cap = state_cap();
    let ga = gaut(g);
    let words = bounded_words_capped(&ga, depth, cap)?;
    let mut counterexamples = Vec::new();
    for w in &words {
        match c.replay(&w.events) {
            Ok(confs) if !w.maximal || confs.iter().any(|k| c.is_final(k)) => {}
            _ => counterexamples.push(Counterexample { kind: CounterexampleKind::Missing, trace: w.events.clone() }),
        }
    }
    let exploration = explore_capped(c, depth, channel_bound, cap)?;
    let matcher = RunMatcher::new(&ga);
    for w in &exploration.maximal_traces {
        if !matcher.explains(w) {
            counterexamples.push(Counterexample { kind: CounterexampleKind::Unspecified, trace: w.clone() });
        }
    }
    for (w, _) in &exploration.deadlocks {
        counterexamples.push(Counterexample { kind: CounterexampleKind::Deadlock, trace: w.clone() });
        if !matcher.agrees(w) {
            counterexamples.push(Counterexample { kind: CounterexampleKind::Confusion, trace: w.clone() });
        }
    }
    for w in &exploration.prefixes {
        if !matcher.agrees(w) {
            counterexamples.push(Counterexample { kind: CounterexampleKind::Confusion, trace: w.clone() });
        }
    }
    counterexamples.sort_by(|a, b| (a.kind, a.trace.len(), &a.trace).cmp(&(b.kind, b.trace.len(), &b.trace)));
    Ok(FidelityReport { depth, channel_bound, global_words: words.len(), exploration, counterexamples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::project_all;
    use crate::syntax::{parse_global, parse_local};

    const LB: &str = "mu t. C->S:req. + { S->W1:req. W1->C:reply. t, S->W2:req. W2->C:reply. t }";

    fn lb_csm() -> (GlobalType, Csm) {
        let g = parse_global(LB).unwrap();
        let rep = project_all(&g);
        (g, build_csm(&rep.locals).unwrap())
    }

    fn ev(s: &str) -> Event {
        s.parse().unwrap()
    }

    #[test]
    fn single_end_machine() {
        let c = build_csm(&[(Role::from("p"), LocalType::End)].into()).unwrap();
        let init = c.initial();
        assert!(c.is_final(&init));
        let r = explore(&c, 5, 1).unwrap();
        assert_eq!(r.visited, 1);
        assert!(r.deadlocks.is_empty());
        assert_eq!(r.maximal_traces, vec![Vec::<Event>::new()]);
    }

    #[test]
    fn send_then_receive() {
        let (_, c) = lb_csm();
        assert_eq!(c.roles().len(), 4);
        let k0 = c.initial();
        let k1 = c.step(&k0, &Move::Letter(ev("C>S!req"))).unwrap();
        let ch = c.channel(&k1, &"C".into(), &"S".into()).unwrap();
        assert_eq!(ch.iter().map(Message::as_str).collect::<Vec<_>>(), ["req"]);
        let k2 = c.step(&k1, &Move::Letter(ev("C>S?req"))).unwrap();
        assert!(k2.all_channels_empty());
        assert_ne!(c.state_of(&k2, &"S".into()), c.state_of(&k1, &"S".into()));
        assert_eq!(c.step(&k0, &Move::Letter(ev("C>S?req"))), Err(NotEnabled::EmptyChannel(ev("C>S?req"))));
        assert_eq!(c.step(&k0, &Move::Letter(ev("W1>C?reply"))), Err(NotEnabled::NoTransition(ev("W1>C?reply"))));
        assert_eq!(c.step(&k2, &Move::Letter(ev("W1>C?reply"))), Err(NotEnabled::EmptyChannel(ev("W1>C?reply"))));
    }

    #[test]
    fn head_mismatch_is_reported() {
        let locals = [
            (Role::from("p"), parse_local("q!a. end").unwrap()),
            (Role::from("q"), parse_local("& { p?b. end, p?a. end }").unwrap()),
        ]
        .into();
        let c = build_csm(&locals).unwrap();
        let k = c.step(&c.initial(), &Move::Letter(ev("p>q!a"))).unwrap();
        assert!(matches!(c.step(&k, &Move::Letter(ev("p>q?b"))), Err(NotEnabled::HeadMismatch { .. })));
    }

    #[test]
    fn projections_explore_without_deadlock() {
        let (g, c) = lb_csm();
        let r = explore(&c, 12, 2).unwrap();
        assert!(r.deadlocks.is_empty());
        assert!(r.maximal_traces.is_empty());
        let f = fidelity_check(&g, &c, 12, 2).unwrap();
        assert!(f.passed(), "{:?}", f.counterexamples.first());
        let f0 = fidelity_check(&g, &c, 0, 2).unwrap();
        assert!(f0.passed());
    }

    #[test]
    fn detects_deadlock() {
        let locals = [
            (Role::from("p"), parse_local("q?a. end").unwrap()),
            (Role::from("q"), parse_local("p?b. end").unwrap()),
        ]
        .into();
        let c = build_csm(&locals).unwrap();
        let r = explore(&c, 4, 1).unwrap();
        assert_eq!(r.deadlocks.len(), 1);
        assert!(r.deadlocks[0].0.is_empty());
    }

    #[test]
    fn rejects_foreign_and_unknown() {
        let bad = [(Role::from("p"), parse_local("q!a. end").unwrap())].into();
        assert!(matches!(build_csm(&bad), Err(CsmError::UnknownPeer { .. })));
    }

    #[test]
    fn compliance_examples() {
        assert!(channel_compliant(&[ev("p>q!m"), ev("p>q?m")]));
        assert!(!channel_compliant(&[ev("p>q?m")]));
        assert!(!channel_compliant(&[ev("p>q!a"), ev("p>q!b"), ev("p>q?b")]));
    }

    #[test]
    fn swap_examples() {
        let w = vec![ev("p>q!m"), ev("r>s!n")];
        assert_eq!(swap_rule(&[], &w[0], &w[1]), Some(SwapRule::Sends));
        assert!(equivalent_mod_swaps(&w, &swap_at(&w, 0)));
        assert!(equivalent_mod_swaps(&w, &w));
        let w = vec![ev("p>r!m"), ev("q>r!n"), ev("p>r?m"), ev("q>r?n")];
        assert_eq!(swap_rule(&w[..2], &w[2], &w[3]), None);
        assert!(!equivalent_mod_swaps(&w, &swap_at(&w, 2)));
        let w = [ev("p>r!m"), ev("r>q?m")];
        assert_eq!(swap_rule(&[], &w[0], &w[1]), Some(SwapRule::SendReceive));
        let w = [ev("p>q!m"), ev("p>q?m")];
        assert_eq!(swap_rule(&[], &w[0], &w[1]), None);
        let w = vec![ev("p>q!m"), ev("p>q!m"), ev("p>q?m")];
        assert_eq!(swap_rule(&w[..1], &w[1], &w[2]), Some(SwapRule::SameChannel));
        assert!(equivalent_mod_swaps(&w, &swap_at(&w, 1)));
    }
}
