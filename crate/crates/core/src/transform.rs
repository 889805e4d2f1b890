//! Session merging: every interaction is moved onto a single session, with
//! each thread acting in a role named after itself, and session starts are
//! removed. A single leading start can then be synthesised from the threads
//! that interact.

use crate::ast::{Choreography, Endpoint, Eta, PublicChan, RoleName, SessChan, ThreadId};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergeResult {
    pub merged: Choreography,
    /// Interacting threads by first occurrence (left to right, then-branch first).
    pub threads_in_order: Vec<ThreadId>,
    pub session: SessChan,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("session {0} occurs free in the choreography")]
    Freshness(SessChan),
}

fn self_role(e: &Endpoint) -> Endpoint {
    Endpoint {
        thread: e.thread.clone(),
        role: RoleName::new(e.thread.as_str()),
    }
}

pub(crate) fn simplify_term(c: &Choreography, k: &SessChan) -> Choreography {
    match c {
        Choreography::Seq(Eta::Start { .. }, cont) => simplify_term(cont, k),
        Choreography::Seq(
            Eta::Com {
                from,
                expr,
                to,
                var,
                ..
            },
            cont,
        ) => Choreography::seq(
            Eta::Com {
                from: self_role(from),
                expr: expr.clone(),
                to: self_role(to),
                var: var.clone(),
                sess: k.clone(),
            },
            simplify_term(cont, k),
        ),
        Choreography::Seq(
            Eta::Sel {
                from, to, label, ..
            },
            cont,
        ) => Choreography::seq(
            Eta::Sel {
                from: self_role(from),
                to: self_role(to),
                sess: k.clone(),
                label: label.clone(),
            },
            simplify_term(cont, k),
        ),
        Choreography::Cond {
            at,
            guard,
            then_branch,
            else_branch,
        } => Choreography::Cond {
            at: at.clone(),
            guard: guard.clone(),
            then_branch: Box::new(simplify_term(then_branch, k)),
            else_branch: Box::new(simplify_term(else_branch, k)),
        },
        Choreography::Rec(x, body) => {
            Choreography::Rec(x.clone(), Box::new(simplify_term(body, k)))
        }
        Choreography::Res(_, body) => simplify_term(body, k),
        Choreography::Call(_) | Choreography::Inact => c.clone(),
    }
}

/// Interacting threads in first-occurrence order.
pub fn threads_in_order(c: &Choreography) -> Vec<ThreadId> {
    let mut out: Vec<ThreadId> = Vec::new();
    for eta in c.etas() {
        if let Eta::Com { from, to, .. } | Eta::Sel { from, to, .. } = eta {
            for t in [&from.thread, &to.thread] {
                if !out.contains(t) {
                    out.push(t.clone());
                }
            }
        }
    }
    out
}

/// Removes starts and restrictions and moves every interaction onto `k`.
pub fn simplify(c: &Choreography, k: &SessChan) -> Result<MergeResult, TransformError> {
    if c.free_sessions().contains(k) {
        return Err(TransformError::Freshness(k.clone()));
    }
    let merged = simplify_term(c, k);
    Ok(MergeResult {
        threads_in_order: threads_in_order(&merged),
        merged,
        session: k.clone(),
    })
}

/// Prefixes the merged term with one start of all its threads on `chan`.
/// Terms with fewer than two threads need no session and are returned as is.
pub fn synthesize_start(m: &MergeResult, chan: &PublicChan) -> Choreography {
    if m.threads_in_order.len() < 2 {
        return m.merged.clone();
    }
    let participants = m
        .threads_in_order
        .iter()
        .map(|t| Endpoint {
            thread: t.clone(),
            role: RoleName::new(t.as_str()),
        })
        .collect();
    Choreography::seq(
        Eta::Start {
            participants,
            chan: chan.clone(),
            sess: m.session.clone(),
        },
        m.merged.clone(),
    )
}

pub fn merge(
    c: &Choreography,
    k: &SessChan,
    chan: &PublicChan,
) -> Result<Choreography, TransformError> {
    Ok(synthesize_start(&simplify(c, k)?, chan))
}

/// Sorts the participants of every start, for comparisons that treat
/// participant lists as sets.
pub fn sort_start_participants(c: &Choreography) -> Choreography {
    match c {
        Choreography::Seq(
            Eta::Start {
                participants,
                chan,
                sess,
            },
            cont,
        ) => {
            let mut participants = participants.clone();
            participants.sort();
            Choreography::seq(
                Eta::Start {
                    participants,
                    chan: chan.clone(),
                    sess: sess.clone(),
                },
                sort_start_participants(cont),
            )
        }
        Choreography::Seq(eta, cont) => {
            Choreography::seq(eta.clone(), sort_start_participants(cont))
        }
        Choreography::Cond {
            at,
            guard,
            then_branch,
            else_branch,
        } => Choreography::Cond {
            at: at.clone(),
            guard: guard.clone(),
            then_branch: Box::new(sort_start_participants(then_branch)),
            else_branch: Box::new(sort_start_participants(else_branch)),
        },
        Choreography::Rec(x, body) => {
            Choreography::Rec(x.clone(), Box::new(sort_start_participants(body)))
        }
        Choreography::Res(k, body) => {
            Choreography::Res(k.clone(), Box::new(sort_start_participants(body)))
        }
        Choreography::Call(_) | Choreography::Inact => c.clone(),
    }
}
