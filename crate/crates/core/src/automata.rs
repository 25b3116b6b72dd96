//! Finite automata for global and local types: construction, bounded word
//! enumeration, alphabet projection, epsilon elimination and DOT export.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{GlobalType, LocalType, Message, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EventKind {
    Send,
    Receive,
}

/// `p>q!m` (p sends m to q) or `p>q?m` (q receives m from p).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Event {
    pub sender: Role,
    pub receiver: Role,
    pub kind: EventKind,
    pub message: Message,
}

impl Event {
    pub fn send(sender: &str, receiver: &str, message: &str) -> Self {
        Event { kind: EventKind::Send, sender: sender.into(), receiver: receiver.into(), message: message.into() }
    }

    pub fn recv(sender: &str, receiver: &str, message: &str) -> Self {
        Event { kind: EventKind::Receive, sender: sender.into(), receiver: receiver.into(), message: message.into() }
    }

    pub fn is_send(&self) -> bool {
        self.kind == EventKind::Send
    }

    /// The role that performs the event.
    pub fn active(&self) -> &Role {
        match self.kind {
            EventKind::Send => &self.sender,
            EventKind::Receive => &self.receiver,
        }
    }

    /// The same exchange, seen from the other end of the channel.
    pub fn dual(&self) -> Event {
        let kind = if self.is_send() { EventKind::Receive } else { EventKind::Send };
        Event { kind, ..self.clone() }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.is_send() { '!' } else { '?' };
        write!(f, "{}>{}{op}{}", self.sender, self.receiver, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse event `{0}`, expected `p>q!m` or `p>q?m`")]
pub struct EventParseError(String);

impl FromStr for Event {
    type Err = EventParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || EventParseError(s.to_string());
        let (p, rest) = s.trim().split_once('>').ok_or_else(err)?;
        let (idx, op) = rest.char_indices().find(|(_, c)| *c == '!' || *c == '?').ok_or_else(err)?;
        let (q, m) = (&rest[..idx], &rest[idx + 1..]);
        let ok = |x: &str| !x.is_empty() && x.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok(p) || !ok(q) || !ok(m) {
            return Err(err());
        }
        Ok(if op == '!' { Event::send(p, q, m) } else { Event::recv(p, q, m) })
    }
}

/// Formats a trace as `·`-separated events.
pub fn format_trace(w: &[Event]) -> String {
    if w.is_empty() {
        return "ε".to_string();
    }
    w.iter().map(Event::to_string).collect::<Vec<_>>().join(" · ")
}

pub fn parse_trace(s: &str) -> Result<Vec<Event>, EventParseError> {
    let s = s.trim();
    if s.is_empty() || s == "ε" {
        return Ok(Vec::new());
    }
    s.split('·').map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    /// `None` is an ε-transition.
    pub label: Option<Event>,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMachine {
    labels: Vec<String>,
    transitions: Vec<Transition>,
    out: Vec<Vec<usize>>,
    initial: usize,
    finals: BTreeSet<usize>,
    alphabet: BTreeSet<Event>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error("more than {cap} words; raise the cap or lower the length")]
    ExplosionGuard { cap: usize },
}

pub const DEFAULT_WORD_CAP: usize = 200_000;

impl StateMachine {
    /// Builds a machine; the alphabet is the set of letters on transitions.
    pub fn new(labels: Vec<String>, initial: usize, finals: BTreeSet<usize>, transitions: Vec<Transition>) -> Self {
        let alphabet = transitions.iter().filter_map(|t| t.label.clone()).collect();
        Self::with_alphabet(labels, initial, finals, transitions, alphabet)
    }

    pub fn with_alphabet(
        labels: Vec<String>,
        initial: usize,
        finals: BTreeSet<usize>,
        transitions: Vec<Transition>,
        alphabet: BTreeSet<Event>,
    ) -> Self {
        let n = labels.len();
        assert!(initial < n, "initial state out of range");
        let mut out = vec![Vec::new(); n];
        for (i, t) in transitions.iter().enumerate() {
            assert!(t.from < n && t.to < n, "transition endpoint out of range");
            out[t.from].push(i);
        }
        StateMachine { labels, transitions, out, initial, finals, alphabet }
    }

    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, s: usize) -> &str {
        &self.labels[s]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    pub fn is_final(&self, s: usize) -> bool {
        self.finals.contains(&s)
    }

    pub fn alphabet(&self) -> &BTreeSet<Event> {
        &self.alphabet
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn outgoing(&self, s: usize) -> impl Iterator<Item = &Transition> {
        self.out[s].iter().map(move |&i| &self.transitions[i])
    }

    /// States reachable from `states` by ε-transitions, including themselves.
    pub fn eps_closure(&self, states: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut stack: Vec<usize> = states.into_iter().collect();
        while let Some(s) = stack.pop() {
            if seen.insert(s) {
                for t in self.outgoing(s) {
                    if t.label.is_none() {
                        stack.push(t.to);
                    }
                }
            }
        }
        seen
    }

    /// Letter successors of a set of states, grouped by letter.
    pub fn letter_steps(&self, states: &BTreeSet<usize>) -> BTreeMap<&Event, BTreeSet<usize>> {
        let mut out: BTreeMap<&Event, BTreeSet<usize>> = BTreeMap::new();
        for &s in states {
            for t in self.outgoing(s) {
                if let Some(e) = &t.label {
                    out.entry(e).or_default().insert(t.to);
                }
            }
        }
        out
    }

    /// Whether some run reads `w` (not necessarily to a final state).
    pub fn accepts_prefix(&self, w: &[Event]) -> bool {
        self.run(w).is_some_and(|s| !s.is_empty())
    }

    /// Whether some run reads `w` and ends in a final state.
    pub fn accepts(&self, w: &[Event]) -> bool {
        self.run(w).is_some_and(|s| s.iter().any(|q| self.is_final(*q)))
    }

    fn run(&self, w: &[Event]) -> Option<BTreeSet<usize>> {
        let mut cur = self.eps_closure([self.initial]);
        for e in w {
            let next: Vec<usize> = cur
                .iter()
                .flat_map(|&s| self.outgoing(s).filter(|t| t.label.as_ref() == Some(e)).map(|t| t.to))
                .collect();
            if next.is_empty() {
                return None;
            }
            cur = self.eps_closure(next);
        }
        Some(cur)
    }

    /// No ε-transitions and at most one transition per state and letter.
    pub fn is_deterministic(&self) -> bool {
        (0..self.state_count()).all(|s| {
            let mut seen = HashSet::new();
            self.outgoing(s).all(|t| t.label.as_ref().is_some_and(|e| seen.insert(e)))
        })
    }
}

// ---------------------------------------------------------------------------
// Construction

const LABEL_WIDTH: usize = 48;

fn short(s: String) -> String {
    if s.chars().count() <= LABEL_WIDTH {
        return s;
    }
    let cut: String = s.chars().take(LABEL_WIDTH - 3).collect();
    format!("{cut}...")
}

/// Automaton of a global type. Each exchange is split into its send and its
/// receive through an intermediate state.
pub fn gaut(g: &GlobalType) -> StateMachine {
    let subs = g.subterms();
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut zero = None;
    for s in &subs {
        let id = match s {
            GlobalType::End if zero.is_some() => zero.unwrap(),
            _ => {
                labels.push(short(s.to_string()));
                labels.len() - 1
            }
        };
        if matches!(s, GlobalType::End) {
            zero = Some(id);
        }
        ids.insert(*s as *const GlobalType as usize, id);
    }
    let zero = zero.unwrap_or_else(|| {
        labels.push("end".to_string());
        labels.len() - 1
    });
    let id = |s: &GlobalType| ids[&(s as *const GlobalType as usize)];
    let mut binders: HashMap<&str, usize> = HashMap::new();
    for s in &subs {
        if let GlobalType::Rec { var, .. } = s {
            binders.insert(var, id(s));
        }
    }
    let mut transitions = Vec::new();
    for s in &subs {
        let from = id(s);
        match s {
            GlobalType::End => {}
            GlobalType::Rec { body, .. } => transitions.push(Transition { from, label: None, to: id(body) }),
            GlobalType::Var(t) => transitions.push(Transition { from, label: None, to: binders[t.as_str()] }),
            GlobalType::Choice { sender, branches } => {
                for b in branches {
                    let mid = labels.len();
                    labels.push(format!("{sender}>{}!{} / {}", b.receiver, b.message, short(b.cont.to_string())));
                    let (p, q, m) = (sender.as_str(), b.receiver.as_str(), b.message.as_str());
                    transitions.push(Transition { from, label: Some(Event::send(p, q, m)), to: mid });
                    transitions.push(Transition { from: mid, label: Some(Event::recv(p, q, m)), to: id(&b.cont) });
                }
            }
        }
    }
    StateMachine::new(labels, 0, [zero].into(), transitions)
}

/// Automaton of the local type `l` of role `owner`.
pub fn laut(l: &LocalType, owner: &Role) -> StateMachine {
    let subs = l.subterms();
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut zero = None;
    for s in &subs {
        let id = match s {
            LocalType::End if zero.is_some() => zero.unwrap(),
            _ => {
                labels.push(short(s.to_string()));
                labels.len() - 1
            }
        };
        if matches!(s, LocalType::End) {
            zero = Some(id);
        }
        ids.insert(*s as *const LocalType as usize, id);
    }
    let id = |s: &LocalType| ids[&(s as *const LocalType as usize)];
    let mut binders: HashMap<&str, usize> = HashMap::new();
    for s in &subs {
        if let LocalType::Rec { var, .. } = s {
            binders.insert(var, id(s));
        }
    }
    let o = owner.as_str();
    let mut transitions = Vec::new();
    for s in &subs {
        let from = id(s);
        match s {
            LocalType::End => {}
            LocalType::Rec { body, .. } => transitions.push(Transition { from, label: None, to: id(body) }),
            LocalType::Var(t) => {
                if let Some(&to) = binders.get(t.as_str()) {
                    transitions.push(Transition { from, label: None, to });
                }
            }
            LocalType::Send(bs) => {
                for b in bs {
                    let e = Event::send(o, b.peer.as_str(), b.message.as_str());
                    transitions.push(Transition { from, label: Some(e), to: id(&b.cont) });
                }
            }
            LocalType::Recv(bs) => {
                for b in bs {
                    let e = Event::recv(b.peer.as_str(), o, b.message.as_str());
                    transitions.push(Transition { from, label: Some(e), to: id(&b.cont) });
                }
            }
        }
    }
    StateMachine::new(labels, 0, zero.into_iter().collect(), transitions)
}

// ---------------------------------------------------------------------------
// Languages

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoundedWord {
    pub events: Vec<Event>,
    /// Some run with this trace ends in a final state.
    pub maximal: bool,
    /// Some run with this trace can still read a letter.
    pub extendable: bool,
}

/// All traces of length at most `max_len`, in (length, lexicographic) order.
pub fn bounded_words(m: &StateMachine, max_len: usize) -> Result<Vec<BoundedWord>, AutomataError> {
    bounded_words_capped(m, max_len, DEFAULT_WORD_CAP)
}

pub fn bounded_words_capped(m: &StateMachine, max_len: usize, cap: usize) -> Result<Vec<BoundedWord>, AutomataError> {
    let mut out = Vec::new();
    let mut queue = VecDeque::from([(Vec::new(), m.eps_closure([m.initial]))]);
    while let Some((w, states)) = queue.pop_front() {
        let steps = m.letter_steps(&states);
        out.push(BoundedWord {
            maximal: states.iter().any(|s| m.is_final(*s)),
            extendable: !steps.is_empty(),
            events: w.clone(),
        });
        if out.len() + queue.len() > cap {
            return Err(AutomataError::ExplosionGuard { cap });
        }
        if w.len() < max_len {
            for (e, next) in steps {
                let mut w2 = w.clone();
                w2.push(e.clone());
                queue.push_back((w2, m.eps_closure(next)));
            }
        }
    }
    Ok(out)
}

/// Replaces every letter outside `keep` by ε.
pub fn project_alphabet(m: &StateMachine, keep: &BTreeSet<Event>) -> StateMachine {
    let transitions = m
        .transitions
        .iter()
        .map(|t| Transition { from: t.from, label: t.label.clone().filter(|e| keep.contains(e)), to: t.to })
        .collect();
    StateMachine::with_alphabet(m.labels.clone(), m.initial, m.finals.clone(), transitions, keep.clone())
}

/// The letters a role can perform.
pub fn role_alphabet(alphabet: &BTreeSet<Event>, role: &Role) -> BTreeSet<Event> {
    alphabet.iter().filter(|e| e.active() == role).cloned().collect()
}

/// An equivalent machine without ε-transitions, restricted to reachable states.
pub fn eliminate_epsilon(m: &StateMachine) -> StateMachine {
    let n = m.state_count();
    let mut order = vec![m.initial];
    let mut index: HashMap<usize, usize> = HashMap::from([(m.initial, 0)]);
    let mut transitions = Vec::new();
    let mut finals = BTreeSet::new();
    let mut i = 0;
    while i < order.len() {
        let s = order[i];
        let closure = m.eps_closure([s]);
        if closure.iter().any(|q| m.is_final(*q)) {
            finals.insert(i);
        }
        let mut seen = BTreeSet::new();
        for &u in &closure {
            for t in m.outgoing(u) {
                let Some(e) = &t.label else { continue };
                if !seen.insert((e.clone(), t.to)) {
                    continue;
                }
                let next = order.len();
                let j = *index.entry(t.to).or_insert_with(|| {
                    order.push(t.to);
                    next
                });
                transitions.push(Transition { from: i, label: Some(e.clone()), to: j });
            }
        }
        i += 1;
    }
    debug_assert!(order.len() <= n);
    let labels = order.iter().map(|&s| m.labels[s].clone()).collect();
    StateMachine::with_alphabet(labels, 0, finals, transitions, m.alphabet.clone())
}

/// Checks that every word of `a` of length at most `max_len` is a trace of
/// `b`. Returns a shortest counterexample otherwise.
pub fn bounded_inclusion(a: &StateMachine, b: &StateMachine, max_len: usize) -> Result<(), Vec<Event>> {
    let start = (a.eps_closure([a.initial]), b.eps_closure([b.initial]));
    let mut seen: HashSet<(BTreeSet<usize>, BTreeSet<usize>)> = HashSet::new();
    let mut queue = VecDeque::from([(start, Vec::<Event>::new())]);
    while let Some(((sa, sb), w)) = queue.pop_front() {
        if w.len() >= max_len || !seen.insert((sa.clone(), sb.clone())) {
            continue;
        }
        let steps_b = b.letter_steps(&sb);
        for (e, na) in a.letter_steps(&sa) {
            let mut w2 = w.clone();
            w2.push(e.clone());
            match steps_b.get(e) {
                Some(nb) => queue.push_back(((a.eps_closure(na), b.eps_closure(nb.iter().copied())), w2)),
                None => return Err(w2),
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// DOT

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn to_dot(m: &StateMachine) -> String {
    let mut s = String::from("digraph G {\n  rankdir=LR;\n  init [shape=point];\n");
    for (i, l) in m.labels.iter().enumerate() {
        let shape = if m.is_final(i) { "doublecircle" } else { "circle" };
        s.push_str(&format!("  n{i} [shape={shape}, label=\"{}\"];\n", escape(l)));
    }
    s.push_str(&format!("  init -> n{};\n", m.initial));
    for t in &m.transitions {
        let l = t.label.as_ref().map_or("ε".to_string(), Event::to_string);
        s.push_str(&format!("  n{} -> n{} [label=\"{}\"];\n", t.from, t.to, escape(&l)));
    }
    s.push_str("}\n");
    s
}
