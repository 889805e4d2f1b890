//! α-equivalence of choreographies.
//!
//! Terms are compared through a canonical representative in which every
//! bound variable, session and recursion variable is renamed after its
//! binder depth. Restrictions on unused sessions are dropped and adjacent
//! restrictions are ordered by first use in their body.

use super::chor::{Choreography, Eta};
use super::expr::Expr;
use super::names::{ChorVar, SessChan, VarName};

#[derive(Default)]
struct Scope {
    vars: Vec<(VarName, VarName)>,
    sess: Vec<(SessChan, SessChan)>,
    recs: Vec<(ChorVar, ChorVar)>,
}

fn lookup<T: PartialEq + Clone>(stack: &[(T, T)], name: &T) -> T {
    stack
        .iter()
        .rev()
        .find(|(old, _)| old == name)
        .map(|(_, new)| new.clone())
        .unwrap_or_else(|| name.clone())
}

impl Scope {
    fn expr(&self, e: &Expr) -> Expr {
        e.rename_or_replace(&|y| {
            self.vars
                .iter()
                .rev()
                .find(|(old, _)| old == y)
                .map(|(_, new)| Expr::Var(new.clone()))
        })
    }

    fn bind_sess(&mut self, k: &SessChan) -> SessChan {
        let fresh = SessChan::new(format!("%k{}", self.sess.len()));
        self.sess.push((k.clone(), fresh.clone()));
        fresh
    }
}

/// Canonical representative of the α-class of `c`.
pub fn canonical(c: &Choreography) -> Choreography {
    canon(c, &mut Scope::default())
}

fn canon(c: &Choreography, scope: &mut Scope) -> Choreography {
    match c {
        Choreography::Inact => Choreography::Inact,
        Choreography::Call(x) => Choreography::Call(lookup(&scope.recs, x)),
        Choreography::Rec(x, body) => {
            let fresh = ChorVar::new(format!("%X{}", scope.recs.len()));
            scope.recs.push((x.clone(), fresh.clone()));
            let body = canon(body, scope);
            scope.recs.pop();
            Choreography::Rec(fresh, Box::new(body))
        }
        Choreography::Cond {
            at,
            guard,
            then_branch,
            else_branch,
        } => Choreography::Cond {
            at: at.clone(),
            guard: scope.expr(guard),
            then_branch: Box::new(canon(then_branch, scope)),
            else_branch: Box::new(canon(else_branch, scope)),
        },
        Choreography::Res(..) => canon_res_block(c, scope),
        Choreography::Seq(eta, cont) => match eta {
            Eta::Start {
                participants,
                chan,
                sess,
            } => {
                let fresh = scope.bind_sess(sess);
                let cont = canon(cont, scope);
                scope.sess.pop();
                Choreography::seq(
                    Eta::Start {
                        participants: participants.clone(),
                        chan: chan.clone(),
                        sess: fresh,
                    },
                    cont,
                )
            }
            Eta::Com {
                from,
                expr,
                to,
                var,
                sess,
            } => {
                let expr = scope.expr(expr);
                let sess = lookup(&scope.sess, sess);
                let fresh = VarName::new(format!("%v{}", scope.vars.len()));
                scope.vars.push((var.clone(), fresh.clone()));
                let cont = canon(cont, scope);
                scope.vars.pop();
                Choreography::seq(
                    Eta::Com {
                        from: from.clone(),
                        expr,
                        to: to.clone(),
                        var: fresh,
                        sess,
                    },
                    cont,
                )
            }
            Eta::Sel {
                from,
                to,
                sess,
                label,
            } => Choreography::seq(
                Eta::Sel {
                    from: from.clone(),
                    to: to.clone(),
                    sess: lookup(&scope.sess, sess),
                    label: label.clone(),
                },
                canon(cont, scope),
            ),
        },
    }
}

fn canon_res_block(c: &Choreography, scope: &mut Scope) -> Choreography {
    let mut binders: Vec<SessChan> = Vec::new();
    let mut body = c;
    while let Choreography::Res(k, inner) = body {
        // an inner binder shadows an outer one with the same name
        binders.retain(|b| b != k);
        binders.push(k.clone());
        body = inner;
    }
    let used = body.free_sessions_in_order();
    let kept: Vec<&SessChan> = used.iter().filter(|k| binders.contains(k)).collect();
    let fresh: Vec<SessChan> = kept.iter().map(|k| scope.bind_sess(k)).collect();
    let mut out = canon(body, scope);
    for _ in &kept {
        scope.sess.pop();
    }
    for k in fresh.into_iter().rev() {
        out = Choreography::Res(k, Box::new(out));
    }
    out
}

/// α-equivalence up to garbage collection and reordering of restrictions.
pub fn alpha_equal(a: &Choreography, b: &Choreography) -> bool {
    canonical(a) == canonical(b)
}

/// Drops restrictions on sessions that are not free in their body.
pub fn gc_restrictions(c: &Choreography) -> Choreography {
    match c {
        Choreography::Res(k, body) => {
            let body = gc_restrictions(body);
            if body.free_sessions().contains(k) {
                Choreography::Res(k.clone(), Box::new(body))
            } else {
                body
            }
        }
        _ => c.clone(),
    }
}
