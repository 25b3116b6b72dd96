//! Available messages: which `sender->receiver?msg` pairs can sit at the head
//! of a channel while a set of blocked roles is waiting.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{get_mu_ref, GlobalType, Message, MuMap, Role};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MessageId {
    pub sender: Role,
    pub receiver: Role,
    pub message: Message,
}

impl MessageId {
    pub fn new(sender: &str, receiver: &str, message: &str) -> Self {
        MessageId { sender: sender.into(), receiver: receiver.into(), message: message.into() }
    }
}

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}?{}", self.sender, self.receiver, self.message)
    }
}

pub type MsgSet = BTreeSet<MessageId>;

#[derive(Debug, Clone, Default)]
pub struct AvailContext {
    pub blocked: BTreeSet<Role>,
    pub visited: BTreeSet<String>,
    pub mu_map: MuMap,
}

impl AvailContext {
    pub fn new(g: &GlobalType, blocked: &[&str]) -> Self {
        AvailContext {
            blocked: blocked.iter().map(|r| Role::from(*r)).collect(),
            visited: BTreeSet::new(),
            mu_map: crate::syntax::get_mu(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("unknown recursion variable `{0}`")]
    UnknownVar(String),
}

/// `msgs` without anything sent on the channel `sender -> receiver`.
pub fn head_filter(msgs: &MsgSet, sender: &Role, receiver: &Role) -> MsgSet {
    msgs.iter().filter(|m| !(m.sender == *sender && m.receiver == *receiver)).cloned().collect()
}

/// One message per line as `p->q?m`, sorted.
pub fn dump(msgs: &MsgSet) -> String {
    msgs.iter().map(|m| format!("{m}\n")).collect()
}

pub fn avail(ctx: &AvailContext, g: &GlobalType) -> Result<MsgSet, AnalysisError> {
    let lookup = |t: &str| ctx.mu_map.get(t);
    eval(&lookup, &ctx.blocked, &ctx.visited, g, &mut None, &mut None)
}

/// Like [`avail`], reporting every contributed message together with the
/// blocked set at the point it was added.
pub fn avail_traced(
    ctx: &AvailContext,
    g: &GlobalType,
    observer: &mut dyn FnMut(&MessageId, &BTreeSet<Role>),
) -> Result<MsgSet, AnalysisError> {
    let lookup = |t: &str| ctx.mu_map.get(t);
    eval(&lookup, &ctx.blocked, &ctx.visited, g, &mut None, &mut Some(observer))
}

type MemoKey = (BTreeSet<Role>, BTreeSet<String>, usize);
type Memo = HashMap<MemoKey, MsgSet>;
type Observer<'o> = Option<&'o mut dyn FnMut(&MessageId, &BTreeSet<Role>)>;

fn eval<'a>(
    lookup: &dyn Fn(&str) -> Option<&'a GlobalType>,
    blocked: &BTreeSet<Role>,
    visited: &BTreeSet<String>,
    g: &'a GlobalType,
    memo: &mut Option<&mut Memo>,
    observer: &mut Observer<'_>,
) -> Result<MsgSet, AnalysisError> {
    let key = memo.as_ref().map(|_| (blocked.clone(), visited.clone(), g as *const GlobalType as usize));
    if let (Some(m), Some(k)) = (memo.as_ref(), key.as_ref()) {
        if let Some(hit) = m.get(k) {
            return Ok(hit.clone());
        }
    }
    let out = match g {
        GlobalType::End => MsgSet::new(),
        GlobalType::Rec { var, body } => {
            let mut t = visited.clone();
            t.insert(var.clone());
            eval(lookup, blocked, &t, body, memo, observer)?
        }
        GlobalType::Var(var) => {
            if visited.contains(var) {
                MsgSet::new()
            } else {
                let body = lookup(var).ok_or_else(|| AnalysisError::UnknownVar(var.clone()))?;
                let mut t = visited.clone();
                t.insert(var.clone());
                eval(lookup, blocked, &t, body, memo, observer)?
            }
        }
        GlobalType::Choice { sender, branches } => {
            let mut out = MsgSet::new();
            if blocked.contains(sender) {
                for b in branches {
                    let mut bl = blocked.clone();
                    bl.insert(b.receiver.clone());
                    out.extend(eval(lookup, &bl, visited, &b.cont, memo, observer)?);
                }
            } else {
                for b in branches {
                    let rest = eval(lookup, blocked, visited, &b.cont, memo, observer)?;
                    out.extend(head_filter(&rest, sender, &b.receiver));
                    let id = MessageId { sender: sender.clone(), receiver: b.receiver.clone(), message: b.message.clone() };
                    if let Some(obs) = observer.as_mut() {
                        obs(&id, blocked);
                    }
                    out.insert(id);
                }
            }
            out
        }
    };
    if let (Some(m), Some(k)) = (memo.as_mut(), key) {
        m.insert(k, out.clone());
    }
    Ok(out)
}

/// A deferred `avail(blocked, visited, node)` call, where `node` is the
/// pre-order index of a subterm of the type an [`AvailEngine`] was built on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AvailQuery {
    pub blocked: BTreeSet<Role>,
    pub visited: BTreeSet<String>,
    pub node: usize,
}

/// Memoising evaluator over the subterms of one global type.
pub struct AvailEngine<'g> {
    nodes: Vec<&'g GlobalType>,
    ids: HashMap<usize, usize>,
    mu: BTreeMap<&'g str, &'g GlobalType>,
    memo: RefCell<Memo>,
    evaluations: Cell<usize>,
}

impl<'g> AvailEngine<'g> {
    pub fn new(root: &'g GlobalType) -> Self {
        let nodes = root.subterms();
        let ids = nodes.iter().enumerate().map(|(i, g)| (*g as *const GlobalType as usize, i)).collect();
        AvailEngine { nodes, ids, mu: get_mu_ref(root), memo: RefCell::new(HashMap::new()), evaluations: Cell::new(0) }
    }

    /// Pre-order index of a subterm. Panics if `sub` does not belong to the root.
    pub fn id_of(&self, sub: &GlobalType) -> usize {
        self.ids[&(sub as *const GlobalType as usize)]
    }

    pub fn node(&self, id: usize) -> &'g GlobalType {
        self.nodes[id]
    }

    pub fn mu_body(&self, var: &str) -> Option<&'g GlobalType> {
        self.mu.get(var).copied()
    }

    pub fn query(&self, blocked: BTreeSet<Role>, visited: BTreeSet<String>, sub: &GlobalType) -> AvailQuery {
        AvailQuery { blocked, visited, node: self.id_of(sub) }
    }

    pub fn evaluate(&self, q: &AvailQuery) -> Result<MsgSet, AnalysisError> {
        self.evaluations.set(self.evaluations.get() + 1);
        let lookup = |t: &str| self.mu.get(t).copied();
        let mut memo = self.memo.borrow_mut();
        eval(&lookup, &q.blocked, &q.visited, self.nodes[q.node], &mut Some(&mut memo), &mut None)
    }

    /// Number of queries forced so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations.get()
    }
}
