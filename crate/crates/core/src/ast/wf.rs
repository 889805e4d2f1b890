use super::chor::{Choreography, Eta};
use super::names::{ChorVar, SessChan};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Position of a subterm, as the sequence of edges taken from the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TermPath(pub Vec<PathStep>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PathStep {
    /// Continuation of a prefix.
    Cont,
    Then,
    Else,
    /// Body of `rec` or a restriction.
    Body,
}

impl TermPath {
    pub fn root() -> Self {
        TermPath(Vec::new())
    }

    pub fn child(&self, step: PathStep) -> Self {
        let mut v = self.0.clone();
        v.push(step);
        TermPath(v)
    }
}

impl fmt::Display for TermPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for s in &self.0 {
            let name = match s {
                PathStep::Cont => "cont",
                PathStep::Then => "then",
                PathStep::Else => "else",
                PathStep::Body => "body",
            };
            write!(f, "/{name}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagKind {
    DuplicateSession,
    UnboundCall,
    UnguardedRecursion,
    MalformedPrefix,
    RebindsSession,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: TermPath,
    pub kind: DiagKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

struct Checker {
    diags: Vec<Diagnostic>,
    started: BTreeMap<SessChan, TermPath>,
    /// Recursion variables in scope with a flag telling whether a prefix or
    /// conditional has been crossed since their binder.
    recs: Vec<(ChorVar, bool)>,
    bound_sessions: Vec<SessChan>,
}

impl Checker {
    fn report(&mut self, path: &TermPath, kind: DiagKind, message: String) {
        self.diags.push(Diagnostic {
            path: path.clone(),
            kind,
            message,
        });
    }

    fn guard_all(&mut self) -> Vec<bool> {
        let saved = self.recs.iter().map(|(_, g)| *g).collect();
        self.recs.iter_mut().for_each(|(_, g)| *g = true);
        saved
    }

    fn restore(&mut self, saved: Vec<bool>) {
        for ((_, g), s) in self.recs.iter_mut().zip(saved) {
            *g = s;
        }
    }

    fn check_eta(&mut self, eta: &Eta, path: &TermPath) {
        match eta {
            Eta::Start {
                participants, sess, ..
            } => {
                if participants.len() < 2 {
                    self.report(
                        path,
                        DiagKind::MalformedPrefix,
                        "start needs at least two participants".into(),
                    );
                }
                for (i, p) in participants.iter().enumerate() {
                    for q in &participants[i + 1..] {
                        if p.thread == q.thread {
                            self.report(
                                path,
                                DiagKind::MalformedPrefix,
                                format!("thread {} joins start twice", p.thread),
                            );
                        }
                        if p.role == q.role {
                            self.report(
                                path,
                                DiagKind::MalformedPrefix,
                                format!("role {} is played twice", p.role),
                            );
                        }
                    }
                }
                if let Some(first) = self.started.get(sess) {
                    let msg = format!("duplicate session {sess} (also started at {first})");
                    self.report(path, DiagKind::DuplicateSession, msg);
                } else {
                    self.started.insert(sess.clone(), path.clone());
                }
                if self.bound_sessions.contains(sess) {
                    self.report(
                        path,
                        DiagKind::RebindsSession,
                        format!("session {sess} is already bound here"),
                    );
                }
            }
            Eta::Com { from, to, .. } | Eta::Sel { from, to, .. } => {
                if from.thread == to.thread {
                    self.report(
                        path,
                        DiagKind::MalformedPrefix,
                        format!("thread {} interacts with itself", from.thread),
                    );
                }
            }
        }
    }

    fn walk(&mut self, c: &Choreography, path: &TermPath) {
        match c {
            Choreography::Inact => {}
            Choreography::Call(x) => match self.recs.iter().rev().find(|(y, _)| y == x) {
                None => self.report(path, DiagKind::UnboundCall, format!("call to unbound {x}")),
                Some((_, false)) => self.report(
                    path,
                    DiagKind::UnguardedRecursion,
                    format!("unguarded recursion on {x}"),
                ),
                Some(_) => {}
            },
            Choreography::Rec(x, body) => {
                self.recs.push((x.clone(), false));
                self.walk(body, &path.child(PathStep::Body));
                self.recs.pop();
            }
            Choreography::Res(k, body) => {
                self.bound_sessions.push(k.clone());
                self.walk(body, &path.child(PathStep::Body));
                self.bound_sessions.pop();
            }
            Choreography::Cond {
                then_branch,
                else_branch,
                ..
            } => {
                let saved = self.guard_all();
                self.walk(then_branch, &path.child(PathStep::Then));
                self.walk(else_branch, &path.child(PathStep::Else));
                self.restore(saved);
            }
            Choreography::Seq(eta, cont) => {
                self.check_eta(eta, path);
                let saved = self.guard_all();
                let binds = eta.is_start();
                if binds {
                    self.bound_sessions.push(eta.sess().clone());
                }
                self.walk(cont, &path.child(PathStep::Cont));
                if binds {
                    self.bound_sessions.pop();
                }
                self.restore(saved);
            }
        }
    }
}

/// Structural diagnostics; an empty list means the term is well formed.
pub fn well_formed(c: &Choreography) -> Vec<Diagnostic> {
    let mut checker = Checker {
        diags: Vec::new(),
        started: BTreeMap::new(),
        recs: Vec::new(),
        bound_sessions: Vec::new(),
    };
    checker.walk(c, &TermPath::root());
    checker.diags
}

/// Subterm at `path`, if the path exists.
pub fn subterm<'a>(c: &'a Choreography, path: &TermPath) -> Option<&'a Choreography> {
    let mut cur = c;
    for step in &path.0 {
        cur = match (cur, step) {
            (Choreography::Seq(_, cont), PathStep::Cont) => cont,
            (Choreography::Cond { then_branch, .. }, PathStep::Then) => then_branch,
            (Choreography::Cond { else_branch, .. }, PathStep::Else) => else_branch,
            (Choreography::Rec(_, body) | Choreography::Res(_, body), PathStep::Body) => body,
            _ => return None,
        };
    }
    Some(cur)
}
