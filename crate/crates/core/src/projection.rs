//! Projection of a global type onto one role, with empty-path elimination and
//! the availability-guarded merge of sibling branches.

// Failures carry the role, path and witness by value; they are built once per role.
#![allow(clippy::result_large_err)]

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{AvailEngine, AvailQuery, MessageId, MsgSet};
use crate::syntax::{roles_of, validate, GlobalType, LocalBranch, LocalType, Message, Role};

/// A message set that may still contain unevaluated `avail` calls.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Annotation {
    pub known: MsgSet,
    pub deferred: BTreeSet<AvailQuery>,
}

impl Annotation {
    pub fn known(msgs: MsgSet) -> Self {
        Annotation { known: msgs, deferred: BTreeSet::new() }
    }

    pub fn union(&self, other: &Annotation) -> Annotation {
        Annotation {
            known: self.known.union(&other.known).cloned().collect(),
            deferred: self.deferred.union(&other.deferred).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedLocalType {
    pub node: AnnotatedNode,
    pub msgs: Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnotatedNode {
    End,
    Send(Vec<AnnotatedBranch>),
    Recv(Vec<AnnotatedBranch>),
    Rec { var: String, body: Box<AnnotatedLocalType> },
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedBranch {
    pub peer: Role,
    pub message: Message,
    pub cont: AnnotatedLocalType,
}

impl AnnotatedLocalType {
    pub fn new(node: AnnotatedNode, msgs: Annotation) -> Self {
        AnnotatedLocalType { node, msgs }
    }

    pub fn end() -> Self {
        AnnotatedLocalType::new(AnnotatedNode::End, Annotation::default())
    }

    /// Annotates every node of `l` with `msgs`.
    pub fn annotate(l: &LocalType, msgs: &MsgSet) -> Self {
        let a = Annotation::known(msgs.clone());
        let branches = |bs: &[LocalBranch]| {
            bs.iter()
                .map(|b| AnnotatedBranch { peer: b.peer.clone(), message: b.message.clone(), cont: Self::annotate(&b.cont, msgs) })
                .collect()
        };
        let node = match l {
            LocalType::End => AnnotatedNode::End,
            LocalType::Var(t) => AnnotatedNode::Var(t.clone()),
            LocalType::Rec { var, body } => AnnotatedNode::Rec { var: var.clone(), body: Box::new(Self::annotate(body, msgs)) },
            LocalType::Send(bs) => AnnotatedNode::Send(branches(bs)),
            LocalType::Recv(bs) => AnnotatedNode::Recv(branches(bs)),
        };
        AnnotatedLocalType::new(node, a)
    }

    fn rename(&self, from: &str, to: &str) -> Self {
        let node = match &self.node {
            AnnotatedNode::Var(t) if t == from => AnnotatedNode::Var(to.to_string()),
            AnnotatedNode::Rec { var, .. } if var == from => self.node.clone(),
            AnnotatedNode::Rec { var, body } => AnnotatedNode::Rec { var: var.clone(), body: Box::new(body.rename(from, to)) },
            AnnotatedNode::Send(bs) => AnnotatedNode::Send(rename_branches(bs, from, to)),
            AnnotatedNode::Recv(bs) => AnnotatedNode::Recv(rename_branches(bs, from, to)),
            other => other.clone(),
        };
        AnnotatedLocalType::new(node, self.msgs.clone())
    }

    fn map_annotations(&self, f: &mut dyn FnMut(&Annotation) -> Annotation) -> Self {
        let msgs = f(&self.msgs);
        let branches = |bs: &[AnnotatedBranch], f: &mut dyn FnMut(&Annotation) -> Annotation| -> Vec<AnnotatedBranch> {
            bs.iter()
                .map(|b| AnnotatedBranch { peer: b.peer.clone(), message: b.message.clone(), cont: b.cont.map_annotations(f) })
                .collect()
        };
        let node = match &self.node {
            AnnotatedNode::Rec { var, body } => AnnotatedNode::Rec { var: var.clone(), body: Box::new(body.map_annotations(f)) },
            AnnotatedNode::Send(bs) => AnnotatedNode::Send(branches(bs, f)),
            AnnotatedNode::Recv(bs) => AnnotatedNode::Recv(branches(bs, f)),
            other => other.clone(),
        };
        AnnotatedLocalType::new(node, msgs)
    }
}

fn rename_branches(bs: &[AnnotatedBranch], from: &str, to: &str) -> Vec<AnnotatedBranch> {
    bs.iter()
        .map(|b| AnnotatedBranch { peer: b.peer.clone(), message: b.message.clone(), cont: b.cont.rename(from, to) })
        .collect()
}

pub fn erase(a: &AnnotatedLocalType) -> LocalType {
    let branches = |bs: &[AnnotatedBranch]| {
        bs.iter().map(|b| LocalBranch { peer: b.peer.clone(), message: b.message.clone(), cont: erase(&b.cont) }).collect()
    };
    match &a.node {
        AnnotatedNode::End => LocalType::End,
        AnnotatedNode::Var(t) => LocalType::Var(t.clone()),
        AnnotatedNode::Rec { var, body } => LocalType::Rec { var: var.clone(), body: Box::new(erase(body)) },
        AnnotatedNode::Send(bs) => LocalType::Send(branches(bs)),
        AnnotatedNode::Recv(bs) => LocalType::Recv(branches(bs)),
    }
}

impl fmt::Display for AnnotatedLocalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        erase(self).fmt(f)
    }
}

// ---------------------------------------------------------------------------
// Failures

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FailureKind {
    MixedMerge,
    SendMergeMismatch,
    AvailabilityClash,
    RecVarMismatch,
    EmptyExternalChoice,
    /// The input type failed validation.
    InvalidType,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[error("projection onto `{role}` failed: {kind} at path {path:?}: {detail}")]
pub struct ProjectionFailure {
    pub role: Role,
    pub kind: FailureKind,
    /// Branch indices from the root of the global type to the failing choice.
    pub path: Vec<usize>,
    pub witness: Option<MessageId>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeError {
    pub kind: FailureKind,
    pub witness: Option<MessageId>,
    pub detail: String,
}

impl MergeError {
    fn new(kind: FailureKind, detail: String) -> Self {
        MergeError { kind, witness: None, detail }
    }
}

// ---------------------------------------------------------------------------
// Merge

/// Resolves deferred `avail` queries.
pub trait AvailSource {
    fn resolve(&self, q: &AvailQuery) -> MsgSet;
}

/// For annotations with no deferred part.
pub struct KnownOnly;

impl AvailSource for KnownOnly {
    fn resolve(&self, _q: &AvailQuery) -> MsgSet {
        MsgSet::new()
    }
}

impl AvailSource for AvailEngine<'_> {
    fn resolve(&self, q: &AvailQuery) -> MsgSet {
        self.evaluate(q).expect("validated global types have no unknown variables")
    }
}

pub struct Merger<'s> {
    role: Role,
    source: &'s dyn AvailSource,
    strict: bool,
    /// Number of times the availability guard had to be evaluated.
    pub guard_checks: usize,
}

impl<'s> Merger<'s> {
    pub fn new(role: Role, source: &'s dyn AvailSource) -> Self {
        Merger { role, source, strict: false, guard_checks: 0 }
    }

    /// A merger that runs the guard even when every branch has the same
    /// sender. Needed when annotations do not come from projection.
    pub fn strict(role: Role, source: &'s dyn AvailSource) -> Self {
        Merger { strict: true, ..Merger::new(role, source) }
    }

    fn force(&self, a: &Annotation) -> MsgSet {
        let mut out = a.known.clone();
        for q in &a.deferred {
            out.extend(self.source.resolve(q));
        }
        out
    }

    pub fn merge(&mut self, a: &AnnotatedLocalType, b: &AnnotatedLocalType) -> Result<AnnotatedLocalType, MergeError> {
        if erase(a) == erase(b) {
            return Ok(union_pointwise(a, b));
        }
        let msgs = a.msgs.union(&b.msgs);
        match (&a.node, &b.node) {
            (AnnotatedNode::Rec { var: t1, body: b1 }, AnnotatedNode::Rec { var: t2, body: b2 }) => {
                let b2 = if t1 == t2 { (**b2).clone() } else { b2.rename(t2, t1) };
                let body = self.merge(b1, &b2)?;
                Ok(AnnotatedLocalType::new(AnnotatedNode::Rec { var: t1.clone(), body: Box::new(body) }, msgs))
            }
            (AnnotatedNode::Rec { var, .. }, _) | (_, AnnotatedNode::Rec { var, .. }) => Err(MergeError::new(
                FailureKind::RecVarMismatch,
                format!("cannot merge the loop `mu {var}` with a type that is not a loop"),
            )),
            (AnnotatedNode::Var(x), AnnotatedNode::Var(y)) => Err(MergeError::new(
                FailureKind::RecVarMismatch,
                format!("branches continue with different loops `{x}` and `{y}`"),
            )),
            (AnnotatedNode::Send(xs), AnnotatedNode::Send(ys)) => {
                let kx: Vec<_> = xs.iter().map(key).collect();
                let ky: Vec<_> = ys.iter().map(key).collect();
                if kx != ky {
                    return Err(MergeError::new(
                        FailureKind::SendMergeMismatch,
                        format!("sibling branches send {} and {}", show_keys(&kx, '!'), show_keys(&ky, '!')),
                    ));
                }
                let mut out = Vec::with_capacity(xs.len());
                for (x, y) in xs.iter().zip(ys) {
                    out.push(AnnotatedBranch { peer: x.peer.clone(), message: x.message.clone(), cont: self.merge(&x.cont, &y.cont)? });
                }
                Ok(AnnotatedLocalType::new(AnnotatedNode::Send(out), msgs))
            }
            (AnnotatedNode::Recv(xs), AnnotatedNode::Recv(ys)) => self.merge_receives(a, xs, b, ys, msgs),
            _ => Err(MergeError::new(
                FailureKind::MixedMerge,
                format!("cannot merge `{}` with `{}`", erase(a), erase(b)),
            )),
        }
    }

    fn merge_receives(
        &mut self,
        a: &AnnotatedLocalType,
        xs: &[AnnotatedBranch],
        b: &AnnotatedLocalType,
        ys: &[AnnotatedBranch],
        msgs: Annotation,
    ) -> Result<AnnotatedLocalType, MergeError> {
        let kx: BTreeSet<_> = xs.iter().map(key).collect();
        let ky: BTreeSet<_> = ys.iter().map(key).collect();
        let only_x: Vec<_> = xs.iter().filter(|x| !ky.contains(&key(x))).collect();
        let only_y: Vec<_> = ys.iter().filter(|y| !kx.contains(&key(y))).collect();
        let senders: BTreeSet<&Role> = xs.iter().chain(ys).map(|b| &b.peer).collect();
        // With a single sender the FIFO order already tells the branches apart,
        // as long as the annotations were computed from the same global type.
        if (self.strict || senders.len() > 1) && !(only_x.is_empty() && only_y.is_empty()) {
            self.guard_checks += 1;
            for (unique, other) in [(&only_x, b), (&only_y, a)] {
                if unique.is_empty() {
                    continue;
                }
                let avail = self.force(&other.msgs);
                for u in unique.iter() {
                    let id = MessageId { sender: u.peer.clone(), receiver: self.role.clone(), message: u.message.clone() };
                    if avail.contains(&id) {
                        return Err(MergeError {
                            kind: FailureKind::AvailabilityClash,
                            detail: format!("`{id}` may already be available in a sibling branch that does not expect it"),
                            witness: Some(id),
                        });
                    }
                }
            }
        }
        let mut out: Vec<AnnotatedBranch> = Vec::with_capacity(xs.len() + only_y.len());
        for x in xs {
            match ys.iter().find(|y| key(y) == key(x)) {
                Some(y) => out.push(AnnotatedBranch { peer: x.peer.clone(), message: x.message.clone(), cont: self.merge(&x.cont, &y.cont)? }),
                None => out.push(x.clone()),
            }
        }
        out.extend(only_y.into_iter().cloned());
        out.sort_by(|p, q| key(p).cmp(&key(q)));
        Ok(AnnotatedLocalType::new(AnnotatedNode::Recv(out), msgs))
    }
}

fn key(b: &AnnotatedBranch) -> (&Role, &Message) {
    (&b.peer, &b.message)
}

fn show_keys(keys: &[(&Role, &Message)], op: char) -> String {
    let items: Vec<String> = keys.iter().map(|(p, m)| format!("{p}{op}{m}")).collect();
    format!("{{{}}}", items.join(", "))
}

fn union_pointwise(a: &AnnotatedLocalType, b: &AnnotatedLocalType) -> AnnotatedLocalType {
    let msgs = a.msgs.union(&b.msgs);
    let zip = |xs: &[AnnotatedBranch], ys: &[AnnotatedBranch]| {
        xs.iter()
            .zip(ys)
            .map(|(x, y)| AnnotatedBranch { peer: x.peer.clone(), message: x.message.clone(), cont: union_pointwise(&x.cont, &y.cont) })
            .collect()
    };
    let node = match (&a.node, &b.node) {
        (AnnotatedNode::Rec { var, body: x }, AnnotatedNode::Rec { body: y, .. }) => {
            AnnotatedNode::Rec { var: var.clone(), body: Box::new(union_pointwise(x, y)) }
        }
        (AnnotatedNode::Send(xs), AnnotatedNode::Send(ys)) => AnnotatedNode::Send(zip(xs, ys)),
        (AnnotatedNode::Recv(xs), AnnotatedNode::Recv(ys)) => AnnotatedNode::Recv(zip(xs, ys)),
        (n, _) => n.clone(),
    };
    AnnotatedLocalType::new(node, msgs)
}

/// Merges two projections of sibling branches for `role`. Annotations must be
/// fully known.
pub fn merge(role: &Role, a: &AnnotatedLocalType, b: &AnnotatedLocalType) -> Result<AnnotatedLocalType, MergeError> {
    Merger::new(role.clone(), &KnownOnly).merge(a, b)
}

/// Like [`merge`], with the guard also run for single-sender receptions.
pub fn merge_strict(role: &Role, a: &AnnotatedLocalType, b: &AnnotatedLocalType) -> Result<AnnotatedLocalType, MergeError> {
    Merger::strict(role.clone(), &KnownOnly).merge(a, b)
}

// ---------------------------------------------------------------------------
// Projection

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProjectionStats {
    /// Deferred `avail` queries that were actually evaluated.
    pub avail_evaluations: usize,
    /// Merges of receive choices that needed the availability guard.
    pub guard_checks: usize,
    /// Silent loop branches dropped next to branches with events, plus loops
    /// collapsed into the outer loop they jump to.
    pub eliminations: usize,
}

/// Projects one global type onto any of its roles. Availability annotations
/// are left deferred until a merge needs them.
pub struct Projector<'g> {
    root: &'g GlobalType,
    engine: AvailEngine<'g>,
    eliminate: bool,
    strict: bool,
    guard_checks: usize,
    eliminations: usize,
}

impl<'g> Projector<'g> {
    pub fn new(root: &'g GlobalType) -> Self {
        Projector { root, engine: AvailEngine::new(root), eliminate: true, strict: false, guard_checks: 0, eliminations: 0 }
    }

    /// A projector whose merges use [`Merger::strict`].
    pub fn with_strict_guard(root: &'g GlobalType) -> Self {
        Projector { strict: true, ..Projector::new(root) }
    }

    /// A projector that keeps branches without events of the role.
    pub fn without_elimination(root: &'g GlobalType) -> Self {
        Projector { eliminate: false, ..Projector::new(root) }
    }

    pub fn stats(&self) -> ProjectionStats {
        ProjectionStats {
            avail_evaluations: self.engine.evaluations(),
            guard_checks: self.guard_checks,
            eliminations: self.eliminations,
        }
    }

    pub fn project(&mut self, role: &Role) -> Result<AnnotatedLocalType, ProjectionFailure> {
        if let Some(v) = validate(self.root).violations.into_iter().next() {
            return Err(ProjectionFailure {
                role: role.clone(),
                kind: FailureKind::InvalidType,
                path: Vec::new(),
                witness: None,
                detail: v.to_string(),
            });
        }
        let mut run = Run {
            role,
            engine: &self.engine,
            eliminate: self.eliminate,
            strict: self.strict,
            guard_checks: 0,
            eliminations: 0,
            path: Vec::new(),
        };
        let out = run.project(self.root, &BTreeSet::new());
        self.guard_checks += run.guard_checks;
        self.eliminations += run.eliminations;
        out
    }

    /// Replaces every deferred query by its value.
    pub fn resolve(&self, a: &AnnotatedLocalType) -> AnnotatedLocalType {
        a.map_annotations(&mut |ann| {
            let mut known = ann.known.clone();
            for q in &ann.deferred {
                known.extend(self.engine.resolve(q));
            }
            Annotation::known(known)
        })
    }
}

struct Run<'a, 'g> {
    role: &'a Role,
    engine: &'a AvailEngine<'g>,
    eliminate: bool,
    strict: bool,
    guard_checks: usize,
    eliminations: usize,
    path: Vec<usize>,
}

impl<'a, 'g> Run<'a, 'g> {
    fn query(&self, blocked: &[&Role], visited: Option<&str>, sub: &GlobalType) -> Annotation {
        let q = self.engine.query(
            blocked.iter().map(|r| (*r).clone()).collect(),
            visited.into_iter().map(str::to_string).collect(),
            sub,
        );
        Annotation { known: MsgSet::new(), deferred: [q].into() }
    }

    fn fail(&self, e: MergeError) -> ProjectionFailure {
        ProjectionFailure { role: self.role.clone(), kind: e.kind, path: self.path.clone(), witness: e.witness, detail: e.detail }
    }

    fn project(&mut self, g: &'g GlobalType, empty: &BTreeSet<String>) -> Result<AnnotatedLocalType, ProjectionFailure> {
        let r = self.role;
        match g {
            GlobalType::End => Ok(AnnotatedLocalType::end()),
            GlobalType::Var(t) => {
                let body = self.engine.mu_body(t).expect("validated");
                Ok(AnnotatedLocalType::new(AnnotatedNode::Var(t.clone()), self.query(&[r], Some(t), body)))
            }
            GlobalType::Rec { var, body } => {
                let mut e = empty.clone();
                if self.eliminate {
                    e.insert(var.clone());
                }
                let inner = self.project(body, &e)?;
                match &inner.node {
                    AnnotatedNode::Var(t) if t == var => Ok(AnnotatedLocalType::end()),
                    // A loop whose body immediately jumps to an outer loop is that outer loop.
                    AnnotatedNode::Var(_) if self.eliminate => {
                        self.eliminations += 1;
                        Ok(inner)
                    }
                    _ => Ok(AnnotatedLocalType::new(
                        AnnotatedNode::Rec { var: var.clone(), body: Box::new(inner) },
                        self.query(&[r], Some(var), body),
                    )),
                }
            }
            GlobalType::Choice { sender, branches } if sender == r => {
                let mut out = Vec::with_capacity(branches.len());
                let mut msgs = Annotation::default();
                for (i, b) in branches.iter().enumerate() {
                    self.path.push(i);
                    let cont = self.project(&b.cont, &BTreeSet::new())?;
                    self.path.pop();
                    msgs = msgs.union(&self.query(&[&b.receiver, r], None, &b.cont));
                    out.push(AnnotatedBranch { peer: b.receiver.clone(), message: b.message.clone(), cont });
                }
                out.sort_by(|p, q| key(p).cmp(&key(q)));
                Ok(AnnotatedLocalType::new(AnnotatedNode::Send(out), msgs))
            }
            GlobalType::Choice { sender, branches } => {
                let mut received = Vec::new();
                let mut received_msgs = Annotation::default();
                let mut kept = Vec::new();
                let mut silent = Vec::new();
                for (i, b) in branches.iter().enumerate() {
                    self.path.push(i);
                    if b.receiver == *r {
                        let cont = self.project(&b.cont, &BTreeSet::new())?;
                        received_msgs = received_msgs.union(&self.query(&[r], None, &b.cont));
                        received.push(AnnotatedBranch { peer: sender.clone(), message: b.message.clone(), cont });
                    } else {
                        let p = self.project(&b.cont, empty)?;
                        match &p.node {
                            AnnotatedNode::Var(t) if empty.contains(t) => silent.push(p),
                            _ => kept.push(p),
                        }
                    }
                    self.path.pop();
                }
                let mut parts = Vec::new();
                if !received.is_empty() {
                    received.sort_by(|p, q| key(p).cmp(&key(q)));
                    parts.push(AnnotatedLocalType::new(AnnotatedNode::Recv(received), received_msgs));
                }
                parts.extend(kept);
                if parts.is_empty() {
                    // Every branch is a silent loop: the whole choice is one.
                    parts = silent;
                } else {
                    self.eliminations += silent.len();
                }
                let mut parts = parts.into_iter();
                let Some(mut acc) = parts.next() else {
                    return Err(self.fail(MergeError::new(FailureKind::EmptyExternalChoice, "choice without branches".into())));
                };
                let mut merger =
                    if self.strict { Merger::strict(r.clone(), self.engine) } else { Merger::new(r.clone(), self.engine) };
                for p in parts {
                    acc = match merger.merge(&acc, &p) {
                        Ok(m) => m,
                        Err(e) => {
                            self.guard_checks += merger.guard_checks;
                            return Err(self.fail(e));
                        }
                    };
                }
                self.guard_checks += merger.guard_checks;
                Ok(acc)
            }
        }
    }
}

/// Projects `g` onto `r` and evaluates every annotation.
pub fn project(g: &GlobalType, r: &Role) -> Result<AnnotatedLocalType, ProjectionFailure> {
    let mut p = Projector::new(g);
    let a = p.project(r)?;
    Ok(p.resolve(&a))
}

/// Like [`project`], without empty-path elimination.
pub fn project_plain(g: &GlobalType, r: &Role) -> Result<AnnotatedLocalType, ProjectionFailure> {
    let mut p = Projector::without_elimination(g);
    let a = p.project(r)?;
    Ok(p.resolve(&a))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProjectionReport {
    pub locals: BTreeMap<Role, LocalType>,
    pub failures: BTreeMap<Role, ProjectionFailure>,
    pub stats: ProjectionStats,
}

impl ProjectionReport {
    pub fn projectable(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn gen_merge_used(&self) -> bool {
        self.stats.guard_checks > 0
    }
}

/// Projects onto every role of `g`.
pub fn project_all(g: &GlobalType) -> ProjectionReport {
    project_roles(g, &roles_of(g))
}

pub fn project_roles(g: &GlobalType, roles: &BTreeSet<Role>) -> ProjectionReport {
    let mut report = ProjectionReport::default();
    for r in roles {
        let mut p = Projector::new(g);
        match p.project(r) {
            Ok(a) => {
                report.locals.insert(r.clone(), erase(&a));
            }
            Err(f) => {
                report.failures.insert(r.clone(), f);
            }
        }
        let s = p.stats();
        report.stats.avail_evaluations += s.avail_evaluations;
        report.stats.guard_checks += s.guard_checks;
        report.stats.eliminations += s.eliminations;
    }
    report
}
