use super::env::BuiltinEnv;
use super::eval::{eval_expr, EvalError};
use crate::ast::{
    Choreography, Endpoint, Eta, Label, PathStep, PublicChan, SessChan, TermPath, ThreadId, Value,
    VarName,
};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

/// Observation of one reduction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Event {
    Start {
        participants: Vec<Endpoint>,
        chan: PublicChan,
        sess: SessChan,
    },
    Com {
        from: Endpoint,
        value: Value,
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
    Cond {
        thread: ThreadId,
        result: bool,
    },
}

impl Event {
    pub fn is_start(&self) -> bool {
        matches!(self, Event::Start { .. })
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Start {
                participants,
                chan,
                sess,
            } => {
                let ps: Vec<String> = participants.iter().map(|p| p.to_string()).collect();
                write!(f, "start {} on {chan} as {sess}", ps.join(", "))
            }
            Event::Com {
                from,
                value,
                to,
                var,
                sess,
            } => write!(f, "com {from}.{value} -> {to}.{var} over {sess}"),
            Event::Sel {
                from,
                to,
                sess,
                label,
            } => write!(f, "sel {from} -> {to} : {label} over {sess}"),
            Event::Cond { thread, result } => write!(f, "if @ {thread} -> {result}"),
        }
    }
}

/// An evaluation failure together with the position of the offending term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{path}: {error}")]
pub struct StepError {
    pub path: TermPath,
    pub error: EvalError,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub event: Event,
    pub next: Choreography,
    /// Environment after the step (builtin cursors advanced).
    pub env: BuiltinEnv,
}

/// Performs one reduction of `c`, or returns `None` if `c` is stuck or done.
pub fn step(c: &Choreography, env: &BuiltinEnv) -> Result<Option<Step>, StepError> {
    let mut env = env.clone();
    // A guarded head needs at most one unfolding per recursion binder before
    // a prefix shows up; past that the head is an unguarded loop with no step.
    let mut unfolds = count_recs(c);
    let r = reduce(
        c,
        &mut env,
        &mut Vec::new(),
        &mut unfolds,
        &TermPath::root(),
    )?;
    Ok(r.map(|(event, next)| Step { event, next, env }))
}

fn count_recs(c: &Choreography) -> usize {
    match c {
        Choreography::Seq(_, cont) => count_recs(cont),
        Choreography::Cond {
            then_branch,
            else_branch,
            ..
        } => count_recs(then_branch) + count_recs(else_branch),
        Choreography::Rec(_, body) => 1 + count_recs(body),
        Choreography::Res(_, body) => count_recs(body),
        Choreography::Call(_) | Choreography::Inact => 0,
    }
}

fn reduce(
    c: &Choreography,
    env: &mut BuiltinEnv,
    bound: &mut Vec<SessChan>,
    unfolds: &mut usize,
    path: &TermPath,
) -> Result<Option<(Event, Choreography)>, StepError> {
    let fail = |error| StepError {
        path: path.clone(),
        error,
    };
    match c {
        Choreography::Inact | Choreography::Call(_) => Ok(None),
        Choreography::Res(k, body) => {
            bound.push(k.clone());
            let r = reduce(body, env, bound, unfolds, &path.child(PathStep::Body));
            bound.pop();
            Ok(r?.map(|(ev, next)| (ev, Choreography::Res(k.clone(), Box::new(next)))))
        }
        Choreography::Rec(_, _) if *unfolds == 0 => Ok(None),
        Choreography::Rec(x, body) => {
            *unfolds -= 1;
            let avoid: BTreeSet<SessChan> = bound.iter().cloned().collect();
            let unfolded = Choreography::unfold(x, body, &avoid);
            reduce(&unfolded, env, bound, unfolds, &path.child(PathStep::Body))
        }
        Choreography::Cond {
            at,
            guard,
            then_branch,
            else_branch,
        } => match eval_expr(guard, env, at).map_err(fail)? {
            Value::Bool(b) => {
                let next = if b { then_branch } else { else_branch };
                Ok(Some((
                    Event::Cond {
                        thread: at.clone(),
                        result: b,
                    },
                    (**next).clone(),
                )))
            }
            other => Err(fail(EvalError::SortMismatch {
                context: "conditional guard".into(),
                expected: crate::ast::Sort::Bool,
                found: other.sort(),
            })),
        },
        Choreography::Seq(eta, cont) => match eta {
            Eta::Start {
                participants,
                chan,
                sess,
            } => {
                let next = Choreography::Res(sess.clone(), cont.clone());
                Ok(Some((
                    Event::Start {
                        participants: participants.clone(),
                        chan: chan.clone(),
                        sess: sess.clone(),
                    },
                    next,
                )))
            }
            Eta::Com {
                from,
                expr,
                to,
                var,
                sess,
            } => {
                let v = eval_expr(expr, env, &from.thread).map_err(fail)?;
                let next = cont.substitute(var, &v);
                Ok(Some((
                    Event::Com {
                        from: from.clone(),
                        value: v,
                        to: to.clone(),
                        var: var.clone(),
                        sess: sess.clone(),
                    },
                    next,
                )))
            }
            Eta::Sel {
                from,
                to,
                sess,
                label,
            } => Ok(Some((
                Event::Sel {
                    from: from.clone(),
                    to: to.clone(),
                    sess: sess.clone(),
                    label: label.clone(),
                },
                (**cont).clone(),
            ))),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub event: Event,
    pub term: Choreography,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub fuel_exhausted: bool,
    pub start_count: usize,
    /// Set when a step failed; the trace ends there.
    pub error: Option<StepError>,
}

impl Trace {
    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.steps.iter().map(|s| &s.event)
    }

    /// Events other than session starts.
    pub fn visible_events(&self) -> Vec<&Event> {
        self.events().filter(|e| !e.is_start()).collect()
    }

    pub fn final_term(&self) -> Option<&Choreography> {
        self.steps.last().map(|s| &s.term)
    }
}

/// Iterates [`step`] at most `fuel` times.
pub fn run(c: &Choreography, env: &BuiltinEnv, fuel: usize) -> Trace {
    let mut trace = Trace {
        steps: Vec::new(),
        fuel_exhausted: false,
        start_count: 0,
        error: None,
    };
    let mut cur = c.clone();
    let mut env = env.clone();
    for _ in 0..fuel {
        match step(&cur, &env) {
            Ok(Some(s)) => {
                if s.event.is_start() {
                    trace.start_count += 1;
                }
                trace.steps.push(TraceStep {
                    event: s.event,
                    term: s.next.clone(),
                });
                cur = s.next;
                env = s.env;
            }
            Ok(None) => return trace,
            Err(e) => {
                trace.error = Some(e);
                return trace;
            }
        }
    }
    trace.fuel_exhausted = !cur.is_terminated();
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::alpha_equal;
    use crate::corpus;
    use crate::parser::parse_choreography;

    fn p(s: &str) -> Choreography {
        parse_choreography(s).unwrap()
    }

    #[test]
    fn start_then_com_keeps_restriction() {
        let c = p("start c[C], u[U] on a as k; com u[U].password() -> c[C].pwd over k; com c[C].pwd -> f[F].y over k");
        let env = corpus::env(&[true]);
        let s1 = step(&c, &env).unwrap().unwrap();
        assert!(s1.event.is_start());
        assert!(alpha_equal(
            &s1.next,
            &p("(new k) com u[U].password() -> c[C].pwd over k; com c[C].pwd -> f[F].y over k")
        ));
        let s2 = step(&s1.next, &s1.env).unwrap().unwrap();
        assert!(matches!(&s2.event, Event::Com { value: Value::Str(v), .. } if v == "pwd123"));
        assert!(alpha_equal(
            &s2.next,
            &p("(new k) com c[C].\"pwd123\" -> f[F].y over k")
        ));
    }

    #[test]
    fn inaction_is_done() {
        assert!(step(&Choreography::Inact, &BuiltinEnv::new())
            .unwrap()
            .is_none());
        assert!(step(&p("(new k) 0"), &BuiltinEnv::new()).unwrap().is_none());
        let t = run(&Choreography::Inact, &BuiltinEnv::new(), 10);
        assert!(t.steps.is_empty() && !t.fuel_exhausted);
    }

    #[test]
    fn conditional_picks_branch() {
        let c = p("if true @ t then com t[P].1 -> s[Q].x over k else 0");
        let s = step(&c, &BuiltinEnv::new()).unwrap().unwrap();
        assert_eq!(
            s.event,
            Event::Cond {
                thread: ThreadId::new("t"),
                result: true
            }
        );
        assert_eq!(s.next, p("com t[P].1 -> s[Q].x over k"));
    }

    #[test]
    fn errors_are_values_with_positions() {
        let c = p("com a[P].1 -> b[Q].x over k; com b[Q].y -> a[P].z over k");
        let t = run(&c, &BuiltinEnv::new(), 10);
        assert_eq!(t.steps.len(), 1);
        let err = t.error.expect("unbound y");
        assert!(matches!(err.error, EvalError::Unbound { .. }));
        let err = step(&p("if 1 @ a then 0 else 0"), &BuiltinEnv::new()).unwrap_err();
        assert!(matches!(err.error, EvalError::SortMismatch { .. }));
    }

    // Hand derivation, check answering true:
    //   unfold rec X, start a (session renamed fresh), com "pwd123" u->c,
    //   start b, com "pwd123" c->f, if check(y)@f -> true, sel ok f->c,
    //   com file c->f, then the then-branch ends in 0.
    #[test]
    fn running_example_one_iteration() {
        let t = run(&corpus::chor1(), &corpus::env(&[true]), 6);
        let shape: Vec<String> = t
            .events()
            .map(|e| match e {
                Event::Start { chan, .. } => format!("start {chan}"),
                Event::Com { value, .. } => format!("com {value}"),
                Event::Sel { label, .. } => format!("sel {label}"),
                Event::Cond { thread, result } => format!("if {thread} {result}"),
            })
            .collect();
        assert_eq!(
            shape,
            [
                "start a",
                "com \"pwd123\"",
                "start b",
                "com \"pwd123\"",
                "if f true",
                "sel ok"
            ]
        );
        assert!(t.fuel_exhausted);
        let t7 = run(&corpus::chor1(), &corpus::env(&[true]), 7);
        assert!(matches!(
            t7.steps[6].event,
            Event::Com {
                value: Value::File(_),
                ..
            }
        ));
        let t8 = run(&corpus::chor1(), &corpus::env(&[true]), 8);
        assert_eq!(t8.steps.len(), 7);
        assert!(!t8.fuel_exhausted);
        assert_eq!(t8.start_count, 2);
    }

    #[test]
    fn looping_restarts_both_protocols() {
        // quit loops back, ok terminates
        let t = run(&corpus::chor1(), &corpus::env(&[false, true]), 100);
        assert_eq!(t.steps.len(), 13);
        assert_eq!(t.start_count, 4);
        let sessions: Vec<&SessChan> = t
            .events()
            .filter_map(|e| match e {
                Event::Start { sess, .. } => Some(sess),
                _ => None,
            })
            .collect();
        let distinct: BTreeSet<_> = sessions.iter().collect();
        assert_eq!(distinct.len(), 4, "every start opens a fresh session");
    }

    #[test]
    fn merged_example_starts_once() {
        let merged =
            crate::transform::merge(&corpus::chor1(), &SessChan::new("k"), &"c".into()).unwrap();
        let t = run(&merged, &corpus::env(&[true]), 6);
        assert_eq!(t.start_count, 1);
        let orig = run(&corpus::chor1(), &corpus::env(&[true]), 7);
        let (a, b) = (t.visible_events(), orig.visible_events());
        assert_eq!(a.len(), 5);
        assert!(a
            .iter()
            .zip(&b)
            .all(|(x, y)| crate::verify::events_match(x, y)));
    }

    #[test]
    fn fuel_prefix_property() {
        let env = corpus::env(&[false, false, true]);
        let long = run(&corpus::chor1(), &env, 20);
        for f in 0..20 {
            let short = run(&corpus::chor1(), &env, f);
            assert_eq!(short.steps[..], long.steps[..short.steps.len()]);
        }
    }
}
