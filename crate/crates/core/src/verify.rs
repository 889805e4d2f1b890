//! Bounded checks that merging neither adds nor loses behaviour.
//!
//! Both checks run the original choreography and its merged form side by
//! side. Start steps have no counterpart after merging, so they are matched
//! by zero merged steps; every other step must be matched by exactly one
//! step with the same observable event (threads, values, labels; sessions
//! and roles are ignored) leading to α-equivalent terms.

use crate::ast::{alpha_equal, Choreography, Endpoint, Eta, RoleName, SessChan};
use crate::parser::pretty_chor;
use crate::semantics::{step, BuiltinEnv, Event, StepError};
use crate::transform::{simplify, simplify_term, TransformError};
use serde::Serialize;
use std::collections::BTreeSet;

/// Upper bound on consecutive start steps skipped while matching.
const START_SLACK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Soundness,
    Completeness,
}

/// How one step was matched by the other side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepMatch {
    /// One step on each side.
    Direct,
    /// The original needed this many start steps before the matching step.
    AfterStarts { starts: usize },
    /// A start step of the original, matched by no merged step.
    PureStart,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub state_before: String,
    pub step: Option<Event>,
    pub explanation: String,
    /// Events of the explored side up to and including the failing step.
    pub trace: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub property: Property,
    pub passed: bool,
    pub depth_checked: usize,
    pub counterexample: Option<Counterexample>,
    pub matches: Vec<StepMatch>,
}

impl Verdict {
    fn new(property: Property) -> Self {
        Verdict {
            property,
            passed: true,
            depth_checked: 0,
            counterexample: None,
            matches: Vec::new(),
        }
    }

    fn fail(
        mut self,
        state: &Choreography,
        step: Option<Event>,
        explanation: String,
        mut trace: Vec<Event>,
    ) -> Self {
        if let Some(e) = &step {
            trace.push(e.clone());
        }
        self.passed = false;
        self.counterexample = Some(Counterexample {
            state_before: pretty_chor(state),
            step,
            explanation,
            trace,
        });
        self
    }

    /// Number of original start steps matched by no merged step.
    pub fn pure_start_steps(&self) -> usize {
        self.matches
            .iter()
            .filter(|m| **m == StepMatch::PureStart)
            .count()
    }
}

/// A session-merging transformation under test.
pub type Transform<'a> =
    &'a dyn Fn(&Choreography, &SessChan) -> Result<Choreography, TransformError>;

/// The merging transformation without the synthesised start.
pub fn standard_transform(c: &Choreography, k: &SessChan) -> Result<Choreography, TransformError> {
    simplify(c, k).map(|m| m.merged)
}

fn same_thread(a: &Endpoint, b: &Endpoint) -> bool {
    a.thread == b.thread
}

/// Event equality modulo session names and roles.
pub fn events_match(a: &Event, b: &Event) -> bool {
    match (a, b) {
        (
            Event::Com {
                from: f1,
                value: v1,
                to: t1,
                var: x1,
                ..
            },
            Event::Com {
                from: f2,
                value: v2,
                to: t2,
                var: x2,
                ..
            },
        ) => same_thread(f1, f2) && same_thread(t1, t2) && v1 == v2 && x1 == x2,
        (
            Event::Sel {
                from: f1,
                to: t1,
                label: l1,
                ..
            },
            Event::Sel {
                from: f2,
                to: t2,
                label: l2,
                ..
            },
        ) => same_thread(f1, f2) && same_thread(t1, t2) && l1 == l2,
        (
            Event::Cond {
                thread: t1,
                result: r1,
            },
            Event::Cond {
                thread: t2,
                result: r2,
            },
        ) => t1 == t2 && r1 == r2,
        (Event::Start { .. }, Event::Start { .. }) => true,
        _ => false,
    }
}

/// All one-step successors of `c`, obtained by trying every reduction rule
/// independently and collecting the results up to α-equivalence.
///
/// The calculus is deterministic, so at most one successor is expected.
pub fn reductions(
    c: &Choreography,
    env: &BuiltinEnv,
) -> Result<Vec<(Event, Choreography)>, StepError> {
    let mut out: Vec<(Event, Choreography)> = Vec::new();
    // Each rule is tried on its own; step() fires exactly one of them, so the
    // candidates are gathered by rule and deduplicated modulo α.
    let mut candidates: Vec<(Event, Choreography)> = Vec::new();
    collect_rules(c, env, &mut candidates)?;
    for (e, next) in candidates {
        if !out
            .iter()
            .any(|(e2, n2)| *e2 == e && alpha_equal(n2, &next))
        {
            out.push((e, next));
        }
    }
    Ok(out)
}

fn collect_rules(
    c: &Choreography,
    env: &BuiltinEnv,
    out: &mut Vec<(Event, Choreography)>,
) -> Result<(), StepError> {
    let is_head_redex = matches!(c, Choreography::Seq(..) | Choreography::Cond { .. });
    if is_head_redex {
        // start / com / sel / if at the head
        if let Some(s) = step(c, env)? {
            out.push((s.event, s.next));
        }
        return Ok(());
    }
    match c {
        Choreography::Res(k, body) => {
            let mut inner = Vec::new();
            collect_rules(body, env, &mut inner)?;
            for (e, next) in inner {
                out.push((e, Choreography::Res(k.clone(), Box::new(next))));
            }
        }
        Choreography::Rec(..) => {
            // structural congruence: unfold, then reduce
            if let Some(s) = step(c, env)? {
                out.push((s.event, s.next));
            }
        }
        Choreography::Call(_) | Choreography::Inact => {}
        Choreography::Seq(..) | Choreography::Cond { .. } => unreachable!("handled above"),
    }
    Ok(())
}

pub fn soundness_check(c: &Choreography, k: &SessChan, env: &BuiltinEnv, depth: usize) -> Verdict {
    soundness_check_with(c, k, env, depth, &standard_transform)
}

pub fn completeness_check(
    c: &Choreography,
    k: &SessChan,
    env: &BuiltinEnv,
    depth: usize,
) -> Verdict {
    completeness_check_with(c, k, env, depth, &standard_transform)
}

/// Every step of the transformed term must be matched by the original.
pub fn soundness_check_with(
    c: &Choreography,
    k: &SessChan,
    env: &BuiltinEnv,
    depth: usize,
    transform: Transform<'_>,
) -> Verdict {
    let mut verdict = Verdict::new(Property::Soundness);
    let mut t = match transform(c, k) {
        Ok(t) => t,
        Err(e) => return verdict.fail(c, None, format!("transformation failed: {e}"), Vec::new()),
    };
    let (mut orig, mut orig_env, mut t_env) = (c.clone(), env.clone(), env.clone());
    let mut trace: Vec<Event> = Vec::new();
    for _ in 0..depth {
        let ts = match step(&t, &t_env) {
            Ok(Some(ts)) => ts,
            Ok(None) => break,
            Err(e) => {
                // stuck with an error: fine only if the original is stuck too
                if original_can_step(&orig, &orig_env) {
                    let msg = format!("merged term fails ({e}) where the original still reduces");
                    return verdict.fail(&t, None, msg, trace);
                }
                break;
            }
        };
        let mut cur = orig.clone();
        let mut cur_env = orig_env.clone();
        let mut matched = None;
        for starts in 0..=START_SLACK {
            if ts.event.is_start() && equal_after(&ts.next, &cur, k, transform) {
                matched = Some((cur.clone(), cur_env.clone(), starts, StepMatch::Direct));
                break;
            }
            let s = match step(&cur, &cur_env) {
                Ok(Some(s)) => s,
                _ => break,
            };
            if s.event.is_start() {
                cur = s.next;
                cur_env = s.env;
                continue;
            }
            if !ts.event.is_start()
                && events_match(&s.event, &ts.event)
                && equal_after(&ts.next, &s.next, k, transform)
            {
                let how = if starts == 0 {
                    StepMatch::Direct
                } else {
                    StepMatch::AfterStarts { starts }
                };
                matched = Some((s.next, s.env, starts, how));
            }
            break;
        }
        let Some((next, next_env, _, how)) = matched else {
            let msg = format!(
                "merged step `{}` has no counterpart in the original",
                ts.event
            );
            return verdict.fail(&t, Some(ts.event), msg, trace);
        };
        verdict.matches.push(how);
        verdict.depth_checked += 1;
        trace.push(ts.event);
        orig = next;
        orig_env = next_env;
        t = ts.next;
        t_env = ts.env;
    }
    verdict
}

/// Every step of the original must be matched by the transformed term.
pub fn completeness_check_with(
    c: &Choreography,
    k: &SessChan,
    env: &BuiltinEnv,
    depth: usize,
    transform: Transform<'_>,
) -> Verdict {
    let mut verdict = Verdict::new(Property::Completeness);
    let mut t = match transform(c, k) {
        Ok(t) => t,
        Err(e) => return verdict.fail(c, None, format!("transformation failed: {e}"), Vec::new()),
    };
    let (mut orig, mut orig_env, mut t_env) = (c.clone(), env.clone(), env.clone());
    let mut trace: Vec<Event> = Vec::new();
    for _ in 0..depth {
        let s = match step(&orig, &orig_env) {
            Ok(Some(s)) => s,
            Ok(None) | Err(_) => break,
        };
        if s.event.is_start() {
            if !equal_after(&t, &s.next, k, transform) {
                let msg = format!("start `{}` changes the merged form", s.event);
                return verdict.fail(&orig, Some(s.event), msg, trace);
            }
            verdict.matches.push(StepMatch::PureStart);
        } else {
            let ts = match step(&t, &t_env) {
                Ok(Some(ts)) => ts,
                Ok(None) => {
                    let msg = format!("merged term cannot match `{}`: it is finished", s.event);
                    return verdict.fail(&orig, Some(s.event), msg, trace);
                }
                Err(e) => {
                    let msg = format!("merged term cannot match `{}`: {e}", s.event);
                    return verdict.fail(&orig, Some(s.event), msg, trace);
                }
            };
            if !events_match(&s.event, &ts.event) {
                let msg = format!(
                    "original does `{}` but the merged term does `{}`",
                    s.event, ts.event
                );
                return verdict.fail(&orig, Some(s.event), msg, trace);
            }
            // C' ->* C'' through start steps only
            let mut target = s.next.clone();
            let mut target_env = s.env.clone();
            let mut found = None;
            for starts in 0..=START_SLACK {
                if equal_after(&ts.next, &target, k, transform) {
                    found = Some(starts);
                    break;
                }
                match step(&target, &target_env) {
                    Ok(Some(n)) if n.event.is_start() => {
                        target = n.next;
                        target_env = n.env;
                    }
                    _ => break,
                }
            }
            let Some(starts) = found else {
                let msg = format!(
                    "after `{}` the merged term is not the merge of the original",
                    s.event
                );
                return verdict.fail(&orig, Some(s.event), msg, trace);
            };
            verdict.matches.push(if starts == 0 {
                StepMatch::Direct
            } else {
                StepMatch::AfterStarts { starts }
            });
            t = ts.next;
            t_env = ts.env;
            trace.push(s.event);
            verdict.depth_checked += 1;
            orig = target;
            orig_env = target_env;
            continue;
        }
        trace.push(s.event);
        verdict.depth_checked += 1;
        orig = s.next;
        orig_env = s.env;
    }
    verdict
}

fn original_can_step(c: &Choreography, env: &BuiltinEnv) -> bool {
    matches!(step(c, env), Ok(Some(_)))
}

fn equal_after(
    t: &Choreography,
    orig: &Choreography,
    k: &SessChan,
    transform: Transform<'_>,
) -> bool {
    transform(orig, k).is_ok_and(|m| congruent(t, &m))
}

/// α-equivalence up to unfolding recursions that sit at the head: some
/// number of head unfoldings of `a` is α-equal to some number of `b`.
pub fn congruent(a: &Choreography, b: &Choreography) -> bool {
    let xs = head_unfoldings(a, UNFOLD_FUEL);
    let ys = head_unfoldings(b, UNFOLD_FUEL);
    xs.iter().any(|x| ys.iter().any(|y| alpha_equal(x, y)))
}

const UNFOLD_FUEL: usize = 6;

/// `c` followed by successive one-step unfoldings of its head recursion.
fn head_unfoldings(c: &Choreography, fuel: usize) -> Vec<Choreography> {
    let mut out = vec![c.clone()];
    for _ in 0..fuel {
        match unfold_once(out.last().unwrap(), &mut BTreeSet::new()) {
            Some(next) => out.push(next),
            None => break,
        }
    }
    out
}

fn unfold_once(c: &Choreography, bound: &mut BTreeSet<SessChan>) -> Option<Choreography> {
    match c {
        Choreography::Rec(x, body) => Some(Choreography::unfold(x, body, bound)),
        Choreography::Res(k, body) => {
            let fresh = bound.insert(k.clone());
            let inner = unfold_once(body, bound);
            if fresh {
                bound.remove(k);
            }
            inner.map(|i| Choreography::Res(k.clone(), Box::new(i)))
        }
        _ => None,
    }
}

/// Deliberately broken variants of the transformation, for checking that
/// the verifier notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mutation {
    /// Drops the n-th `com` (preorder, from zero).
    DropCom { index: usize },
    /// Swaps the labels of the selections opening the two arms of each conditional.
    SwapSelLabels,
    /// Swaps the first two consecutive `com` prefixes.
    ReorderComs,
    /// Keeps the first start, moved onto the merged session.
    KeepStart,
    /// Gives the receiver of the first `com` a role other than its thread name.
    RenameRole,
}

impl Mutation {
    pub const SEEDED: [Mutation; 5] = [
        Mutation::DropCom { index: 1 },
        Mutation::SwapSelLabels,
        Mutation::ReorderComs,
        Mutation::KeepStart,
        Mutation::RenameRole,
    ];

    pub fn apply(&self, c: &Choreography, k: &SessChan) -> Result<Choreography, TransformError> {
        if let Mutation::KeepStart = self {
            simplify(c, k)?;
            return Ok(keep_first_start(c, k, &mut false));
        }
        let merged = simplify(c, k)?.merged;
        Ok(match self {
            Mutation::DropCom { index } => drop_com(&merged, &mut (*index as isize)),
            Mutation::SwapSelLabels => swap_sel_labels(&merged),
            Mutation::ReorderComs => reorder_coms(&merged, &mut false),
            Mutation::RenameRole => rename_role(&merged, &mut false),
            Mutation::KeepStart => unreachable!("handled above"),
        })
    }
}

fn map_children(
    c: &Choreography,
    f: &mut dyn FnMut(&Choreography) -> Choreography,
) -> Choreography {
    match c {
        Choreography::Seq(eta, cont) => Choreography::seq(eta.clone(), f(cont)),
        Choreography::Cond {
            at,
            guard,
            then_branch,
            else_branch,
        } => Choreography::Cond {
            at: at.clone(),
            guard: guard.clone(),
            then_branch: Box::new(f(then_branch)),
            else_branch: Box::new(f(else_branch)),
        },
        Choreography::Rec(x, body) => Choreography::Rec(x.clone(), Box::new(f(body))),
        Choreography::Res(k, body) => Choreography::Res(k.clone(), Box::new(f(body))),
        Choreography::Call(_) | Choreography::Inact => c.clone(),
    }
}

fn drop_com(c: &Choreography, remaining: &mut isize) -> Choreography {
    if let Choreography::Seq(Eta::Com { .. }, cont) = c {
        if *remaining == 0 {
            *remaining = -1;
            return (**cont).clone();
        }
        *remaining -= 1;
    }
    map_children(c, &mut |child| drop_com(child, remaining))
}

fn swap_sel_labels(c: &Choreography) -> Choreography {
    if let Choreography::Cond {
        at,
        guard,
        then_branch,
        else_branch,
    } = c
    {
        if let (
            Choreography::Seq(Eta::Sel { label: l1, .. }, _),
            Choreography::Seq(Eta::Sel { label: l2, .. }, _),
        ) = (&**then_branch, &**else_branch)
        {
            let relabel = |b: &Choreography, l: &crate::ast::Label| match b {
                Choreography::Seq(Eta::Sel { from, to, sess, .. }, cont) => Choreography::seq(
                    Eta::Sel {
                        from: from.clone(),
                        to: to.clone(),
                        sess: sess.clone(),
                        label: l.clone(),
                    },
                    swap_sel_labels(cont),
                ),
                _ => unreachable!("matched above"),
            };
            return Choreography::Cond {
                at: at.clone(),
                guard: guard.clone(),
                then_branch: Box::new(relabel(then_branch, l2)),
                else_branch: Box::new(relabel(else_branch, l1)),
            };
        }
    }
    map_children(c, &mut swap_sel_labels)
}

fn reorder_coms(c: &Choreography, done: &mut bool) -> Choreography {
    if !*done {
        if let Choreography::Seq(first @ Eta::Com { .. }, cont) = c {
            if let Choreography::Seq(second @ Eta::Com { .. }, rest) = &**cont {
                *done = true;
                return Choreography::seq(
                    second.clone(),
                    Choreography::seq(first.clone(), (**rest).clone()),
                );
            }
        }
    }
    map_children(c, &mut |child| reorder_coms(child, done))
}

fn rename_role(c: &Choreography, done: &mut bool) -> Choreography {
    if !*done {
        if let Choreography::Seq(
            Eta::Com {
                from,
                expr,
                to,
                var,
                sess,
            },
            cont,
        ) = c
        {
            *done = true;
            let to = Endpoint {
                thread: to.thread.clone(),
                role: RoleName::new(format!("{}'", to.thread)),
            };
            let eta = Eta::Com {
                from: from.clone(),
                expr: expr.clone(),
                to,
                var: var.clone(),
                sess: sess.clone(),
            };
            return Choreography::seq(eta, (**cont).clone());
        }
    }
    map_children(c, &mut |child| rename_role(child, done))
}

fn keep_first_start(c: &Choreography, k: &SessChan, kept: &mut bool) -> Choreography {
    match c {
        Choreography::Seq(
            Eta::Start {
                participants, chan, ..
            },
            cont,
        ) if !*kept => {
            *kept = true;
            let eta = Eta::Start {
                participants: participants.clone(),
                chan: chan.clone(),
                sess: k.clone(),
            };
            Choreography::seq(eta, keep_first_start(cont, k, kept))
        }
        Choreography::Seq(Eta::Start { .. }, cont) => keep_first_start(cont, k, kept),
        Choreography::Seq(eta, cont) => {
            let single = Choreography::seq(eta.clone(), Choreography::Inact);
            let Choreography::Seq(eta, _) = simplify_term(&single, k) else {
                unreachable!("a com or sel survives merging")
            };
            Choreography::seq(eta, keep_first_start(cont, k, kept))
        }
        Choreography::Res(_, body) => keep_first_start(body, k, kept),
        other => map_children(other, &mut |child| keep_first_start(child, k, kept)),
    }
}
