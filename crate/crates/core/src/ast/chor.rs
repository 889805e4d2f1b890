use super::expr::{Expr, Value};
use super::names::{fresh_name, ChorVar, Label, PublicChan, RoleName, SessChan, ThreadId, VarName};
use serde::{Deserialize, Serialize};
use std::cell::{Cell, RefCell};
use std::collections::BTreeSet;
use std::fmt;

/// A thread acting in a role, written `t[R]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Endpoint {
    pub thread: ThreadId,
    pub role: RoleName,
}

impl Endpoint {
    pub fn new(thread: &str, role: &str) -> Self {
        Endpoint {
            thread: ThreadId::new(thread),
            role: RoleName::new(role),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.thread, self.role)
    }
}

/// One interaction prefix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Eta {
    Start {
        participants: Vec<Endpoint>,
        chan: PublicChan,
        sess: SessChan,
    },
    Com {
        from: Endpoint,
        expr: Expr,
        to: Endpoint,
        var: VarName,
        sess: SessChan,
    },
    Sel {
        from: Endpoint,
        to: Endpoint,
        sess: SessChan,
        label: Label,
    },
}

impl Eta {
    pub fn sess(&self) -> &SessChan {
        match self {
            Eta::Start { sess, .. } | Eta::Com { sess, .. } | Eta::Sel { sess, .. } => sess,
        }
    }

    pub(crate) fn sess_mut(&mut self) -> &mut SessChan {
        match self {
            Eta::Start { sess, .. } | Eta::Com { sess, .. } | Eta::Sel { sess, .. } => sess,
        }
    }

    pub fn is_start(&self) -> bool {
        matches!(self, Eta::Start { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Choreography {
    Seq(Eta, Box<Choreography>),
    Cond {
        at: ThreadId,
        guard: Expr,
        then_branch: Box<Choreography>,
        else_branch: Box<Choreography>,
    },
    Rec(ChorVar, Box<Choreography>),
    Call(ChorVar),
    Res(SessChan, Box<Choreography>),
    Inact,
}

impl Choreography {
    pub fn seq(eta: Eta, cont: Choreography) -> Self {
        Choreography::Seq(eta, Box::new(cont))
    }

    pub fn cond(
        at: &str,
        guard: Expr,
        then_branch: Choreography,
        else_branch: Choreography,
    ) -> Self {
        Choreography::Cond {
            at: ThreadId::new(at),
            guard,
            then_branch: Box::new(then_branch),
            else_branch: Box::new(else_branch),
        }
    }

    pub fn rec(x: &str, body: Choreography) -> Self {
        Choreography::Rec(ChorVar::new(x), Box::new(body))
    }

    pub fn call(x: &str) -> Self {
        Choreography::Call(ChorVar::new(x))
    }

    pub fn res(k: &str, body: Choreography) -> Self {
        Choreography::Res(SessChan::new(k), Box::new(body))
    }

    /// Number of term nodes; a `Seq` counts once together with its prefix.
    pub fn node_count(&self) -> usize {
        match self {
            Choreography::Seq(_, c) | Choreography::Rec(_, c) | Choreography::Res(_, c) => {
                1 + c.node_count()
            }
            Choreography::Cond {
                then_branch,
                else_branch,
                ..
            } => 1 + then_branch.node_count() + else_branch.node_count(),
            Choreography::Call(_) | Choreography::Inact => 1,
        }
    }

    /// Nesting depth; leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Choreography::Seq(_, c) | Choreography::Rec(_, c) | Choreography::Res(_, c) => {
                1 + c.depth()
            }
            Choreography::Cond {
                then_branch,
                else_branch,
                ..
            } => 1 + then_branch.depth().max(else_branch.depth()),
            Choreography::Call(_) | Choreography::Inact => 1,
        }
    }

    pub fn etas(&self) -> Vec<&Eta> {
        let mut out = Vec::new();
        self.collect_etas(&mut out);
        out
    }

    fn collect_etas<'a>(&'a self, out: &mut Vec<&'a Eta>) {
        match self {
            Choreography::Seq(eta, c) => {
                out.push(eta);
                c.collect_etas(out);
            }
            Choreography::Cond {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.collect_etas(out);
                else_branch.collect_etas(out);
            }
            Choreography::Rec(_, c) | Choreography::Res(_, c) => c.collect_etas(out),
            Choreography::Call(_) | Choreography::Inact => {}
        }
    }

    pub fn count_starts(&self) -> usize {
        self.etas().iter().filter(|e| e.is_start()).count()
    }

    pub fn count_res(&self) -> usize {
        match self {
            Choreography::Res(_, c) => 1 + c.count_res(),
            Choreography::Seq(_, c) | Choreography::Rec(_, c) => c.count_res(),
            Choreography::Cond {
                then_branch,
                else_branch,
                ..
            } => then_branch.count_res() + else_branch.count_res(),
            Choreography::Call(_) | Choreography::Inact => 0,
        }
    }

    /// `0` possibly under restrictions.
    pub fn is_terminated(&self) -> bool {
        match self {
            Choreography::Inact => true,
            Choreography::Res(_, c) => c.is_terminated(),
            _ => false,
        }
    }

    /// Capture-avoiding substitution of the value `v` for the variable `x`.
    ///
    /// A `com` that binds `x` shadows it in its continuation; its own sender
    /// expression is still substituted.
    pub fn substitute(&self, x: &VarName, v: &Value) -> Choreography {
        match self {
            Choreography::Seq(eta, cont) => {
                let (eta, rebinds) = match eta {
                    Eta::Com {
                        from,
                        expr,
                        to,
                        var,
                        sess,
                    } => (
                        Eta::Com {
                            from: from.clone(),
                            expr: expr.substitute(x, v),
                            to: to.clone(),
                            var: var.clone(),
                            sess: sess.clone(),
                        },
                        var == x,
                    ),
                    other => (other.clone(), false),
                };
                let cont = if rebinds {
                    (**cont).clone()
                } else {
                    cont.substitute(x, v)
                };
                Choreography::seq(eta, cont)
            }
            Choreography::Cond {
                at,
                guard,
                then_branch,
                else_branch,
            } => Choreography::Cond {
                at: at.clone(),
                guard: guard.substitute(x, v),
                then_branch: Box::new(then_branch.substitute(x, v)),
                else_branch: Box::new(else_branch.substitute(x, v)),
            },
            Choreography::Rec(name, body) => {
                Choreography::Rec(name.clone(), Box::new(body.substitute(x, v)))
            }
            Choreography::Res(k, body) => {
                Choreography::Res(k.clone(), Box::new(body.substitute(x, v)))
            }
            Choreography::Call(_) | Choreography::Inact => self.clone(),
        }
    }

    /// Session channels used in prefixes and not bound by a `Res` or a dominating `start`.
    pub fn free_sessions(&self) -> BTreeSet<SessChan> {
        self.free_sessions_in_order().into_iter().collect()
    }

    pub fn mentions_session(&self, k: &SessChan) -> bool {
        match self {
            Choreography::Seq(eta, cont) => eta.sess() == k || cont.mentions_session(k),
            Choreography::Res(k2, body) => k2 == k || body.mentions_session(k),
            Choreography::Cond {
                then_branch,
                else_branch,
                ..
            } => then_branch.mentions_session(k) || else_branch.mentions_session(k),
            Choreography::Rec(_, body) => body.mentions_session(k),
            Choreography::Call(_) | Choreography::Inact => false,
        }
    }

    /// Expression variables occurring free (not bound by an enclosing `com`).
    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_vars(&self, bound: &mut Vec<VarName>, out: &mut BTreeSet<VarName>) {
        let mut note = |e: &Expr, bound: &Vec<VarName>| {
            let mut vs = Vec::new();
            e.vars(&mut vs);
            out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
        };
        match self {
            Choreography::Seq(eta, cont) => {
                if let Eta::Com { expr, var, .. } = eta {
                    note(expr, bound);
                    bound.push(var.clone());
                    cont.collect_free_vars(bound, out);
                    bound.pop();
                } else {
                    cont.collect_free_vars(bound, out);
                }
            }
            Choreography::Cond {
                guard,
                then_branch,
                else_branch,
                ..
            } => {
                note(guard, bound);
                then_branch.collect_free_vars(bound, out);
                else_branch.collect_free_vars(bound, out);
            }
            Choreography::Rec(_, body) | Choreography::Res(_, body) => {
                body.collect_free_vars(bound, out)
            }
            Choreography::Call(_) | Choreography::Inact => {}
        }
    }

    /// Renames free occurrences of session `from` to `to`. `to` must not be
    /// bound anywhere inside `self`.
    pub fn rename_session(&self, from: &SessChan, to: &SessChan) -> Choreography {
        match self {
            Choreography::Seq(eta, cont) => {
                let mut eta = eta.clone();
                let shadows = eta.is_start() && eta.sess() == from;
                if eta.sess() == from && !eta.is_start() {
                    *eta.sess_mut() = to.clone();
                }
                let cont = if shadows {
                    (**cont).clone()
                } else {
                    cont.rename_session(from, to)
                };
                Choreography::seq(eta, cont)
            }
            Choreography::Res(k, body) if k == from => self.clone(),
            Choreography::Res(k, body) => {
                Choreography::Res(k.clone(), Box::new(body.rename_session(from, to)))
            }
            Choreography::Cond {
                at,
                guard,
                then_branch,
                else_branch,
            } => Choreography::Cond {
                at: at.clone(),
                guard: guard.clone(),
                then_branch: Box::new(then_branch.rename_session(from, to)),
                else_branch: Box::new(else_branch.rename_session(from, to)),
            },
            Choreography::Rec(x, body) => {
                Choreography::Rec(x.clone(), Box::new(body.rename_session(from, to)))
            }
            Choreography::Call(_) | Choreography::Inact => self.clone(),
        }
    }

    /// One unfolding of `rec x { body }`: replaces free `Call(x)` in `body`
    /// by the whole recursive term, renaming binders that would capture its
    /// free names.
    ///
    /// Sessions started in the unfolded copy of `body` are renamed apart from
    /// every session mentioned in the recursive term and from `avoid`, so that
    /// the unfolded term keeps all started sessions distinct. When `x` is
    /// called more than once, every re-inserted loop after the first gets
    /// fresh start names as well (an alpha-variant).
    pub fn unfold(x: &ChorVar, body: &Choreography, avoid: &BTreeSet<SessChan>) -> Choreography {
        let whole = Choreography::Rec(x.clone(), Box::new(body.clone()));
        let mut used: BTreeSet<SessChan> = avoid.clone();
        whole.collect_mentioned_sessions(&mut used);
        let renamed = body.rename_started_sessions(&mut used);
        let ctx = UnfoldCtx {
            free_vars: whole.free_vars(),
            free_sess: whole.free_sessions(),
            whole: &whole,
            used: RefCell::new(used),
            inserted: Cell::new(0),
        };
        ctx.replace(&renamed, x)
    }

    fn collect_mentioned_sessions(&self, out: &mut BTreeSet<SessChan>) {
        match self {
            Choreography::Seq(eta, cont) => {
                out.insert(eta.sess().clone());
                cont.collect_mentioned_sessions(out);
            }
            Choreography::Res(k, body) => {
                out.insert(k.clone());
                body.collect_mentioned_sessions(out);
            }
            Choreography::Cond {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.collect_mentioned_sessions(out);
                else_branch.collect_mentioned_sessions(out);
            }
            Choreography::Rec(_, body) => body.collect_mentioned_sessions(out),
            Choreography::Call(_) | Choreography::Inact => {}
        }
    }

    fn rename_started_sessions(&self, used: &mut BTreeSet<SessChan>) -> Choreography {
        match self {
            Choreography::Seq(
                Eta::Start {
                    participants,
                    chan,
                    sess,
                },
                cont,
            ) => {
                let fresh = SessChan::new(fresh_name(sess.as_str(), |n| {
                    used.contains(&SessChan::new(n))
                }));
                used.insert(fresh.clone());
                let cont = cont
                    .rename_session(sess, &fresh)
                    .rename_started_sessions(used);
                Choreography::seq(
                    Eta::Start {
                        participants: participants.clone(),
                        chan: chan.clone(),
                        sess: fresh,
                    },
                    cont,
                )
            }
            Choreography::Seq(eta, cont) => {
                Choreography::seq(eta.clone(), cont.rename_started_sessions(used))
            }
            Choreography::Cond {
                at,
                guard,
                then_branch,
                else_branch,
            } => Choreography::Cond {
                at: at.clone(),
                guard: guard.clone(),
                then_branch: Box::new(then_branch.rename_started_sessions(used)),
                else_branch: Box::new(else_branch.rename_started_sessions(used)),
            },
            Choreography::Rec(x, body) => {
                Choreography::Rec(x.clone(), Box::new(body.rename_started_sessions(used)))
            }
            Choreography::Res(k, body) => {
                Choreography::Res(k.clone(), Box::new(body.rename_started_sessions(used)))
            }
            Choreography::Call(_) | Choreography::Inact => self.clone(),
        }
    }

    /// Free sessions in order of first occurrence (prefixes left to right,
    /// then-branch before else-branch).
    pub fn free_sessions_in_order(&self) -> Vec<SessChan> {
        let mut out = Vec::new();
        self.collect_free_sessions_ordered(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_sessions_ordered(&self, bound: &mut Vec<SessChan>, out: &mut Vec<SessChan>) {
        match self {
            Choreography::Seq(eta, cont) => {
                if eta.is_start() {
                    bound.push(eta.sess().clone());
                    cont.collect_free_sessions_ordered(bound, out);
                    bound.pop();
                } else {
                    if !bound.contains(eta.sess()) && !out.contains(eta.sess()) {
                        out.push(eta.sess().clone());
                    }
                    cont.collect_free_sessions_ordered(bound, out);
                }
            }
            Choreography::Res(k, body) => {
                bound.push(k.clone());
                body.collect_free_sessions_ordered(bound, out);
                bound.pop();
            }
            Choreography::Cond {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.collect_free_sessions_ordered(bound, out);
                else_branch.collect_free_sessions_ordered(bound, out);
            }
            Choreography::Rec(_, body) => body.collect_free_sessions_ordered(bound, out),
            Choreography::Call(_) | Choreography::Inact => {}
        }
    }
}

struct UnfoldCtx<'a> {
    whole: &'a Choreography,
    free_vars: BTreeSet<VarName>,
    free_sess: BTreeSet<SessChan>,
    used: RefCell<BTreeSet<SessChan>>,
    inserted: Cell<usize>,
}

impl UnfoldCtx<'_> {
    fn replace(&self, c: &Choreography, x: &ChorVar) -> Choreography {
        match c {
            Choreography::Call(y) if y == x => {
                let n = self.inserted.get();
                self.inserted.set(n + 1);
                if n == 0 {
                    self.whole.clone()
                } else {
                    self.whole
                        .rename_started_sessions(&mut self.used.borrow_mut())
                }
            }
            Choreography::Call(_) | Choreography::Inact => c.clone(),
            Choreography::Rec(y, _) if y == x => c.clone(),
            Choreography::Rec(y, body) => {
                Choreography::Rec(y.clone(), Box::new(self.replace(body, x)))
            }
            Choreography::Cond {
                at,
                guard,
                then_branch,
                else_branch,
            } => Choreography::Cond {
                at: at.clone(),
                guard: guard.clone(),
                then_branch: Box::new(self.replace(then_branch, x)),
                else_branch: Box::new(self.replace(else_branch, x)),
            },
            Choreography::Res(k, body) if self.free_sess.contains(k) => {
                let k2 = fresh_session(k, body, &self.free_sess);
                let body = body.rename_session(k, &k2);
                Choreography::Res(k2, Box::new(self.replace(&body, x)))
            }
            Choreography::Res(k, body) => {
                Choreography::Res(k.clone(), Box::new(self.replace(body, x)))
            }
            Choreography::Seq(eta, cont) => match eta {
                Eta::Start {
                    participants,
                    chan,
                    sess,
                } if self.free_sess.contains(sess) => {
                    let k2 = fresh_session(sess, cont, &self.free_sess);
                    let cont = cont.rename_session(sess, &k2);
                    let eta = Eta::Start {
                        participants: participants.clone(),
                        chan: chan.clone(),
                        sess: k2,
                    };
                    Choreography::seq(eta, self.replace(&cont, x))
                }
                Eta::Com {
                    from,
                    expr,
                    to,
                    var,
                    sess,
                } if self.free_vars.contains(var) => {
                    let taken = |n: &str| {
                        let v = VarName::new(n);
                        self.free_vars.contains(&v) || cont.mentions_var(&v)
                    };
                    let v2 = VarName::new(fresh_name(var.as_str(), taken));
                    let cont = cont.rename_var(var, &v2);
                    let eta = Eta::Com {
                        from: from.clone(),
                        expr: expr.clone(),
                        to: to.clone(),
                        var: v2,
                        sess: sess.clone(),
                    };
                    Choreography::seq(eta, self.replace(&cont, x))
                }
                _ => Choreography::seq(eta.clone(), self.replace(cont, x)),
            },
        }
    }
}

fn fresh_session(k: &SessChan, scope: &Choreography, avoid: &BTreeSet<SessChan>) -> SessChan {
    SessChan::new(fresh_name(k.as_str(), |n| {
        let cand = SessChan::new(n);
        avoid.contains(&cand) || scope.mentions_session(&cand)
    }))
}

impl Choreography {
    /// True if `x` occurs anywhere, bound or free, including as a binder.
    pub(crate) fn mentions_var(&self, x: &VarName) -> bool {
        match self {
            Choreography::Seq(Eta::Com { expr, var, .. }, cont) => {
                var == x || expr.mentions(x) || cont.mentions_var(x)
            }
            Choreography::Seq(_, cont) => cont.mentions_var(x),
            Choreography::Cond {
                guard,
                then_branch,
                else_branch,
                ..
            } => guard.mentions(x) || then_branch.mentions_var(x) || else_branch.mentions_var(x),
            Choreography::Rec(_, body) | Choreography::Res(_, body) => body.mentions_var(x),
            Choreography::Call(_) | Choreography::Inact => false,
        }
    }

    /// Renames free occurrences of expression variable `from` to `to`.
    pub(crate) fn rename_var(&self, from: &VarName, to: &VarName) -> Choreography {
        let f = |y: &VarName| (y == from).then(|| Expr::Var(to.clone()));
        match self {
            Choreography::Seq(eta, cont) => match eta {
                Eta::Com {
                    from: s,
                    expr,
                    to: r,
                    var,
                    sess,
                } => {
                    let eta = Eta::Com {
                        from: s.clone(),
                        expr: expr.rename_or_replace(&f),
                        to: r.clone(),
                        var: var.clone(),
                        sess: sess.clone(),
                    };
                    let cont = if var == from {
                        (**cont).clone()
                    } else {
                        cont.rename_var(from, to)
                    };
                    Choreography::seq(eta, cont)
                }
                _ => Choreography::seq(eta.clone(), cont.rename_var(from, to)),
            },
            Choreography::Cond {
                at,
                guard,
                then_branch,
                else_branch,
            } => Choreography::Cond {
                at: at.clone(),
                guard: guard.rename_or_replace(&f),
                then_branch: Box::new(then_branch.rename_var(from, to)),
                else_branch: Box::new(else_branch.rename_var(from, to)),
            },
            Choreography::Rec(x, body) => {
                Choreography::Rec(x.clone(), Box::new(body.rename_var(from, to)))
            }
            Choreography::Res(k, body) => {
                Choreography::Res(k.clone(), Box::new(body.rename_var(from, to)))
            }
            Choreography::Call(_) | Choreography::Inact => self.clone(),
        }
    }
}
