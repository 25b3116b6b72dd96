//! Global and local session types: AST, concrete syntax, validation and the
//! recursion map.
//!
//! Global types use `end`, `p->q:m. G`, `+ { p->q1:m1. G1, p->q2:m2. G2 }`,
//! `mu t. G` and bare variables. Local types use `q!m. L`, `q?m. L`,
//! `(+) { .. }` for internal choice and `& { .. }` for external choice.
//! `#` starts a line comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// A protocol participant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Role(pub String);

/// A message label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Message(pub String);

impl Role {
    pub fn new(name: impl Into<String>) -> Self {
        Role(name.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Message {
    pub fn new(label: impl Into<String>) -> Self {
        Message(label.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Role {
    fn from(s: &str) -> Self {
        Role(s.to_string())
    }
}

impl From<&str> for Message {
    fn from(s: &str) -> Self {
        Message(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GlobalType {
    End,
    /// A choice owned by `sender`. A single exchange is a one-branch choice.
    Choice { sender: Role, branches: Vec<Branch> },
    Rec { var: String, body: Box<GlobalType> },
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Branch {
    pub receiver: Role,
    pub message: Message,
    pub cont: GlobalType,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LocalType {
    End,
    /// Internal choice: the owner sends one of the offered messages.
    Send(Vec<LocalBranch>),
    /// External choice: the owner receives one of the offered messages.
    Recv(Vec<LocalBranch>),
    Rec { var: String, body: Box<LocalType> },
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalBranch {
    pub peer: Role,
    pub message: Message,
    pub cont: LocalType,
}

impl GlobalType {
    pub fn exchange(sender: &str, receiver: &str, message: &str, cont: GlobalType) -> Self {
        GlobalType::Choice {
            sender: Role::from(sender),
            branches: vec![Branch { receiver: Role::from(receiver), message: Message::from(message), cont }],
        }
    }

    pub fn rec(var: &str, body: GlobalType) -> Self {
        GlobalType::Rec { var: var.to_string(), body: Box::new(body) }
    }

    pub fn var(var: &str) -> Self {
        GlobalType::Var(var.to_string())
    }

    /// All subterms in pre-order, starting with `self`.
    pub fn subterms(&self) -> Vec<&GlobalType> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(g) = stack.pop() {
            out.push(g);
            match g {
                GlobalType::Choice { branches, .. } => {
                    for b in branches.iter().rev() {
                        stack.push(&b.cont);
                    }
                }
                GlobalType::Rec { body, .. } => stack.push(body),
                _ => {}
            }
        }
        out
    }
}

impl LocalType {
    pub fn send(peer: &str, message: &str, cont: LocalType) -> Self {
        LocalType::Send(vec![LocalBranch { peer: Role::from(peer), message: Message::from(message), cont }])
    }

    pub fn recv(peer: &str, message: &str, cont: LocalType) -> Self {
        LocalType::Recv(vec![LocalBranch { peer: Role::from(peer), message: Message::from(message), cont }])
    }

    pub fn rec(var: &str, body: LocalType) -> Self {
        LocalType::Rec { var: var.to_string(), body: Box::new(body) }
    }

    pub fn var(var: &str) -> Self {
        LocalType::Var(var.to_string())
    }

    pub fn subterms(&self) -> Vec<&LocalType> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(l) = stack.pop() {
            out.push(l);
            match l {
                LocalType::Send(bs) | LocalType::Recv(bs) => {
                    for b in bs.iter().rev() {
                        stack.push(&b.cont);
                    }
                }
                LocalType::Rec { body, .. } => stack.push(body),
                _ => {}
            }
        }
        out
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &LocalType) -> bool {
        fn go<'a>(a: &'a LocalType, b: &'a LocalType, env: &mut Vec<(&'a str, &'a str)>) -> bool {
            match (a, b) {
                (LocalType::End, LocalType::End) => true,
                (LocalType::Var(x), LocalType::Var(y)) => {
                    match env.iter().rev().find(|(l, r)| l == x || r == y) {
                        Some((l, r)) => l == x && r == y,
                        None => x == y,
                    }
                }
                (LocalType::Rec { var: x, body: bx }, LocalType::Rec { var: y, body: by }) => {
                    env.push((x, y));
                    let ok = go(bx, by, env);
                    env.pop();
                    ok
                }
                (LocalType::Send(xs), LocalType::Send(ys)) | (LocalType::Recv(xs), LocalType::Recv(ys)) => {
                    xs.len() == ys.len()
                        && xs.iter().zip(ys).all(|(x, y)| {
                            x.peer == y.peer && x.message == y.message && go(&x.cont, &y.cont, env)
                        })
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }

    /// Sorts every choice by (peer, message).
    pub fn canonical(mut self) -> LocalType {
        fn go(l: &mut LocalType) {
            match l {
                LocalType::Send(bs) | LocalType::Recv(bs) => {
                    for b in bs.iter_mut() {
                        go(&mut b.cont);
                    }
                    bs.sort_by(|x, y| (&x.peer, &x.message).cmp(&(&y.peer, &y.message)));
                }
                LocalType::Rec { body, .. } => go(body),
                _ => {}
            }
        }
        go(&mut self);
        self
    }
}

// ---------------------------------------------------------------------------
// Pretty printing

impl fmt::Display for GlobalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlobalType::End => f.write_str("end"),
            GlobalType::Var(t) => f.write_str(t),
            GlobalType::Rec { var, body } => write!(f, "mu {var}. {body}"),
            GlobalType::Choice { sender, branches } => {
                if branches.len() == 1 {
                    let b = &branches[0];
                    return write!(f, "{sender}->{}:{}. {}", b.receiver, b.message, b.cont);
                }
                f.write_str("+ { ")?;
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{sender}->{}:{}. {}", b.receiver, b.message, b.cont)?;
                }
                f.write_str(" }")
            }
        }
    }
}

impl fmt::Display for LocalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalType::End => f.write_str("end"),
            LocalType::Var(t) => f.write_str(t),
            LocalType::Rec { var, body } => write!(f, "mu {var}. {body}"),
            LocalType::Send(bs) | LocalType::Recv(bs) => {
                let (op, open) = match self {
                    LocalType::Send(_) => ('!', "(+) { "),
                    _ => ('?', "& { "),
                };
                if bs.len() == 1 {
                    let b = &bs[0];
                    return write!(f, "{}{op}{}. {}", b.peer, b.message, b.cont);
                }
                f.write_str(open)?;
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}{op}{}. {}", b.peer, b.message, b.cont)?;
                }
                f.write_str(" }")
            }
        }
    }
}

pub fn pretty_global(g: &GlobalType) -> String {
    g.to_string()
}

pub fn pretty_local(l: &LocalType) -> String {
    l.to_string()
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("recursion variable `{0}` is bound more than once")]
    DuplicateRecVar(String),
    #[error("unbound recursion variable `{0}`")]
    UnboundVar(String),
    #[error("recursion variable `{0}` is not guarded")]
    Unguarded(String),
    #[error("invalid type: {0}")]
    Invalid(Violation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Arrow,
    Colon,
    Dot,
    Plus,
    Oplus,
    Amp,
    Bang,
    Query,
    LBrace,
    RBrace,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Oplus => f.write_str("`(+)`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Query => f.write_str("`?`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                adv = 2;
                Some(Tok::Arrow)
            }
            '(' if chars.get(i + 1) == Some(&'+') && chars.get(i + 2) == Some(&')') => {
                adv = 3;
                Some(Tok::Oplus)
            }
            ':' => Some(Tok::Colon),
            '.' => Some(Tok::Dot),
            '+' => Some(Tok::Plus),
            '&' => Some(Tok::Amp),
            '!' => Some(Tok::Bang),
            '?' => Some(Tok::Query),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            c if is_ident_char(c) => {
                let start = i;
                while i + adv < chars.len() && is_ident_char(chars[i + adv]) {
                    adv += 1;
                }
                Some(Tok::Ident(chars[start..start + adv].iter().collect()))
            }
            other => {
                return Err(ParseError::Syntax { line, col, msg: format!("unexpected character `{other}`") });
            }
        };
        if let Some(t) = tok {
            toks.push((t, l0, c0));
        }
        i += adv;
        col += adv;
    }
    toks.push((Tok::Eof, line, col));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: String) -> Result<T, ParseError> {
        let (_, line, col) = self.toks[self.pos];
        Err(ParseError::Syntax { line, col, msg })
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {want}, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s != "end" && s != "mu" => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected identifier, found {other}")),
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            other => self.error(format!("trailing input starting at {other}")),
        }
    }

    fn global(&mut self) -> Result<GlobalType, ParseError> {
        match self.peek().clone() {
            Tok::Ident(k) if k == "end" => {
                self.bump();
                Ok(GlobalType::End)
            }
            Tok::Ident(k) if k == "mu" => {
                self.bump();
                let var = self.ident()?;
                self.expect(Tok::Dot)?;
                let body = self.global()?;
                Ok(GlobalType::Rec { var, body: Box::new(body) })
            }
            Tok::Ident(_) if *self.peek2() == Tok::Arrow => {
                let (sender, b) = self.global_branch()?;
                Ok(GlobalType::Choice { sender, branches: vec![b] })
            }
            Tok::Ident(_) => Ok(GlobalType::Var(self.ident()?)),
            Tok::Plus => {
                self.bump();
                self.expect(Tok::LBrace)?;
                let (sender, first) = self.global_branch()?;
                let mut branches = vec![first];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    if *self.peek() == Tok::RBrace {
                        break;
                    }
                    let (p, b) = self.global_branch()?;
                    if p != sender {
                        return self.error(format!(
                            "all branches of a choice must share the sender `{sender}`, found `{p}`"
                        ));
                    }
                    branches.push(b);
                }
                self.expect(Tok::RBrace)?;
                Ok(GlobalType::Choice { sender, branches })
            }
            other => self.error(format!("expected a global type, found {other}")),
        }
    }

    fn global_branch(&mut self) -> Result<(Role, Branch), ParseError> {
        let p = self.ident()?;
        self.expect(Tok::Arrow)?;
        let q = self.ident()?;
        self.expect(Tok::Colon)?;
        let m = self.ident()?;
        self.expect(Tok::Dot)?;
        let cont = self.global()?;
        Ok((Role(p), Branch { receiver: Role(q), message: Message(m), cont }))
    }

    fn local(&mut self) -> Result<LocalType, ParseError> {
        match self.peek().clone() {
            Tok::Ident(k) if k == "end" => {
                self.bump();
                Ok(LocalType::End)
            }
            Tok::Ident(k) if k == "mu" => {
                self.bump();
                let var = self.ident()?;
                self.expect(Tok::Dot)?;
                let body = self.local()?;
                Ok(LocalType::Rec { var, body: Box::new(body) })
            }
            Tok::Ident(_) if matches!(self.peek2(), Tok::Bang | Tok::Query) => {
                let (send, b) = self.local_branch()?;
                Ok(if send { LocalType::Send(vec![b]) } else { LocalType::Recv(vec![b]) })
            }
            Tok::Ident(_) => Ok(LocalType::Var(self.ident()?)),
            Tok::Oplus | Tok::Amp => {
                let want_send = self.bump() == Tok::Oplus;
                self.expect(Tok::LBrace)?;
                let mut branches = Vec::new();
                loop {
                    let (send, b) = self.local_branch()?;
                    if send != want_send {
                        let what = if want_send { "an internal choice holds only sends" } else { "an external choice holds only receives" };
                        return self.error(what.to_string());
                    }
                    branches.push(b);
                    if *self.peek() != Tok::Comma {
                        break;
                    }
                    self.bump();
                    if *self.peek() == Tok::RBrace {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(if want_send { LocalType::Send(branches) } else { LocalType::Recv(branches) })
            }
            other => self.error(format!("expected a local type, found {other}")),
        }
    }

    fn local_branch(&mut self) -> Result<(bool, LocalBranch), ParseError> {
        let q = self.ident()?;
        let send = match self.bump() {
            Tok::Bang => true,
            Tok::Query => false,
            other => {
                self.pos -= 1;
                return self.error(format!("expected `!` or `?`, found {other}"));
            }
        };
        let m = self.ident()?;
        self.expect(Tok::Dot)?;
        let cont = self.local()?;
        Ok((send, LocalBranch { peer: Role(q), message: Message(m), cont }))
    }
}

/// Parses a global type without checking well-formedness.
pub fn parse_global_raw(text: &str) -> Result<GlobalType, ParseError> {
    let mut p = Parser::new(text)?;
    let g = p.global()?;
    p.finish()?;
    Ok(g)
}

/// Parses and validates a global type.
pub fn parse_global(text: &str) -> Result<GlobalType, ParseError> {
    let g = parse_global_raw(text)?;
    if let Some(v) = validate(&g).violations.into_iter().next() {
        return Err(v.into());
    }
    Ok(g)
}

pub fn parse_local_raw(text: &str) -> Result<LocalType, ParseError> {
    let mut p = Parser::new(text)?;
    let l = p.local()?;
    p.finish()?;
    Ok(l)
}

/// Parses and validates a local type.
pub fn parse_local(text: &str) -> Result<LocalType, ParseError> {
    let l = parse_local_raw(text)?;
    if let Some(v) = validate_local(&l).violations.into_iter().next() {
        return Err(v.into());
    }
    Ok(l)
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("choice by `{sender}` offers `{receiver}:{message}` in branches {first} and {second}")]
    BranchClash { sender: Role, receiver: Role, message: Message, first: usize, second: usize },
    #[error("variable `{0}` is not guarded")]
    Unguarded(String),
    #[error("variable `{0}` is unbound")]
    Unbound(String),
    #[error("variable `{0}` is bound more than once")]
    DuplicateBinder(String),
    #[error("role `{0}` exchanges a message with itself")]
    SelfMessage(Role),
    #[error("choice with no branches")]
    EmptyChoice,
}

impl From<Violation> for ParseError {
    fn from(v: Violation) -> Self {
        match v {
            Violation::DuplicateBinder(t) => ParseError::DuplicateRecVar(t),
            Violation::Unbound(t) => ParseError::UnboundVar(t),
            Violation::Unguarded(t) => ParseError::Unguarded(t),
            other => ParseError::Invalid(other),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every violated well-formedness condition of `g`.
pub fn validate(g: &GlobalType) -> ValidationReport {
    struct V<'a> {
        out: Vec<Violation>,
        binders: BTreeSet<&'a str>,
        scope: Vec<&'a str>,
        unguarded: Vec<&'a str>,
    }
    fn go<'a>(g: &'a GlobalType, v: &mut V<'a>) {
        match g {
            GlobalType::End => {}
            GlobalType::Var(t) => {
                if !v.scope.contains(&t.as_str()) {
                    v.out.push(Violation::Unbound(t.clone()));
                } else if v.unguarded.contains(&t.as_str()) {
                    v.out.push(Violation::Unguarded(t.clone()));
                }
            }
            GlobalType::Rec { var, body } => {
                if !v.binders.insert(var) {
                    v.out.push(Violation::DuplicateBinder(var.clone()));
                }
                v.scope.push(var);
                v.unguarded.push(var);
                go(body, v);
                v.unguarded.retain(|x| x != var);
                v.scope.pop();
            }
            GlobalType::Choice { sender, branches } => {
                if branches.is_empty() {
                    v.out.push(Violation::EmptyChoice);
                }
                for (i, b) in branches.iter().enumerate() {
                    if b.receiver == *sender && !v.out.contains(&Violation::SelfMessage(sender.clone())) {
                        v.out.push(Violation::SelfMessage(sender.clone()));
                    }
                    if let Some(j) = branches[..i].iter().position(|c| c.receiver == b.receiver && c.message == b.message) {
                        v.out.push(Violation::BranchClash {
                            sender: sender.clone(),
                            receiver: b.receiver.clone(),
                            message: b.message.clone(),
                            first: j,
                            second: i,
                        });
                    }
                }
                let saved = std::mem::take(&mut v.unguarded);
                for b in branches {
                    go(&b.cont, v);
                }
                v.unguarded = saved;
            }
        }
    }
    let mut v = V { out: Vec::new(), binders: BTreeSet::new(), scope: Vec::new(), unguarded: Vec::new() };
    go(g, &mut v);
    ValidationReport { violations: v.out }
}

/// Same conditions as [`validate`], for local types.
pub fn validate_local(l: &LocalType) -> ValidationReport {
    fn go<'a>(
        l: &'a LocalType,
        out: &mut Vec<Violation>,
        binders: &mut BTreeSet<&'a str>,
        scope: &mut Vec<&'a str>,
        unguarded: &mut Vec<&'a str>,
    ) {
        match l {
            LocalType::End => {}
            LocalType::Var(t) => {
                if !scope.contains(&t.as_str()) {
                    out.push(Violation::Unbound(t.clone()));
                } else if unguarded.contains(&t.as_str()) {
                    out.push(Violation::Unguarded(t.clone()));
                }
            }
            LocalType::Rec { var, body } => {
                if !binders.insert(var) {
                    out.push(Violation::DuplicateBinder(var.clone()));
                }
                scope.push(var);
                unguarded.push(var);
                go(body, out, binders, scope, unguarded);
                unguarded.retain(|x| x != var);
                scope.pop();
            }
            LocalType::Send(bs) | LocalType::Recv(bs) => {
                if bs.is_empty() {
                    out.push(Violation::EmptyChoice);
                }
                for (i, b) in bs.iter().enumerate() {
                    if let Some(j) = bs[..i].iter().position(|c| c.peer == b.peer && c.message == b.message) {
                        out.push(Violation::BranchClash {
                            sender: Role::from("_"),
                            receiver: b.peer.clone(),
                            message: b.message.clone(),
                            first: j,
                            second: i,
                        });
                    }
                }
                let saved = std::mem::take(unguarded);
                for b in bs {
                    go(&b.cont, out, binders, scope, unguarded);
                }
                *unguarded = saved;
            }
        }
    }
    let mut out = Vec::new();
    go(l, &mut out, &mut BTreeSet::new(), &mut Vec::new(), &mut Vec::new());
    ValidationReport { violations: out }
}

// ---------------------------------------------------------------------------
// Queries

/// Maps every recursion variable to the body of its binder.
pub type MuMap = BTreeMap<String, GlobalType>;

pub fn get_mu(g: &GlobalType) -> MuMap {
    get_mu_ref(g).into_iter().map(|(t, body)| (t.to_string(), body.clone())).collect()
}

/// Borrowing variant of [`get_mu`].
pub fn get_mu_ref(g: &GlobalType) -> BTreeMap<&str, &GlobalType> {
    let mut out = BTreeMap::new();
    for s in g.subterms() {
        if let GlobalType::Rec { var, body } = s {
            out.entry(var.as_str()).or_insert(&**body);
        }
    }
    out
}

pub fn roles_of(g: &GlobalType) -> BTreeSet<Role> {
    let mut out = BTreeSet::new();
    for s in g.subterms() {
        if let GlobalType::Choice { sender, branches } = s {
            out.insert(sender.clone());
            for b in branches {
                out.insert(b.receiver.clone());
            }
        }
    }
    out
}

/// Node count used for benchmarks: every `end`, `mu`, variable and message
/// exchange counts once. Choice nodes themselves are not counted.
pub fn ast_size(g: &GlobalType) -> usize {
    g.subterms()
        .into_iter()
        .map(|s| match s {
            GlobalType::Choice { branches, .. } => branches.len(),
            _ => 1,
        })
        .sum()
}
