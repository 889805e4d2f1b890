//! Session typing: checks that every session follows its global type.
//!
//! The checker walks the choreography symbolically, keeping for every
//! running session the residual protocol and the role-to-thread cast fixed
//! at its start. Errors are accumulated rather than reported one at a time.

use crate::ast::{
    types_equivalent, BinOp, ChorVar, Choreography, Eta, Expr, GlobalType, PathStep, PublicChan,
    RoleName, SessChan, Sort, TermPath, ThreadId, VarName,
};
use crate::semantics::{BuiltinEnv, Event, Signature};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Protocols available on public channels.
pub type Gamma = BTreeMap<PublicChan, GlobalType>;

/// Running sessions.
pub type Delta = BTreeMap<SessChan, SessionState>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionState {
    pub residual: GlobalType,
    pub cast: BTreeMap<RoleName, ThreadId>,
}

impl SessionState {
    /// Session at the beginning of `g`, with every role played by the thread of the same name.
    pub fn identity_cast(g: GlobalType) -> Self {
        let cast = g
            .roles()
            .into_iter()
            .map(|r| {
                let t = ThreadId::new(r.as_str());
                (r, t)
            })
            .collect();
        SessionState { residual: g, cast }
    }
}

/// Sorts of variables per thread and builtin signatures.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SortEnv {
    pub vars: BTreeMap<(ThreadId, VarName), Sort>,
    pub sigs: BTreeMap<String, Signature>,
}

impl SortEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_sig(mut self, name: &str, params: Vec<Sort>, ret: Sort) -> Self {
        self.sigs
            .insert(name.to_string(), Signature { params, ret });
        self
    }

    pub fn with_var(mut self, thread: &str, var: &str, sort: Sort) -> Self {
        self.vars
            .insert((ThreadId::new(thread), VarName::new(var)), sort);
        self
    }

    /// Signatures and free-variable sorts of a runtime environment.
    pub fn from_env(env: &BuiltinEnv) -> Self {
        SortEnv {
            vars: env
                .bindings
                .iter()
                .map(|(k, v)| (k.clone(), v.sort()))
                .collect(),
            sigs: env
                .functions
                .iter()
                .map(|(n, f)| (n.clone(), f.sig.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SortError {
    #[error("unbound variable {var} at thread {thread}")]
    Unbound { thread: ThreadId, var: VarName },
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("{name} takes {expected} arguments, got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("sort mismatch in {context}: expected {expected}, found {found}")]
    Mismatch {
        context: String,
        expected: Sort,
        found: Sort,
    },
}

pub fn sort_of(e: &Expr, env: &SortEnv, at: &ThreadId) -> Result<Sort, SortError> {
    match e {
        Expr::Bool(_) => Ok(Sort::Bool),
        Expr::Int(_) => Ok(Sort::Int),
        Expr::Str(_) => Ok(Sort::String),
        Expr::File(_) => Ok(Sort::File),
        Expr::Var(x) => env
            .vars
            .get(&(at.clone(), x.clone()))
            .copied()
            .ok_or_else(|| SortError::Unbound {
                thread: at.clone(),
                var: x.clone(),
            }),
        Expr::Call(name, args) => {
            let sig = env
                .sigs
                .get(name)
                .ok_or_else(|| SortError::UnknownFunction(name.clone()))?;
            if sig.params.len() != args.len() {
                return Err(SortError::Arity {
                    name: name.clone(),
                    expected: sig.params.len(),
                    found: args.len(),
                });
            }
            for (a, expected) in args.iter().zip(&sig.params) {
                let found = sort_of(a, env, at)?;
                if found != *expected {
                    return Err(SortError::Mismatch {
                        context: format!("argument of {name}"),
                        expected: *expected,
                        found,
                    });
                }
            }
            Ok(sig.ret)
        }
        Expr::BinOp(op, l, r) => {
            let ls = sort_of(l, env, at)?;
            let rs = sort_of(r, env, at)?;
            let context = format!("operator {}", op.symbol());
            let need = |expected: Sort, found: Sort| {
                if expected == found {
                    Ok(())
                } else {
                    Err(SortError::Mismatch {
                        context: context.clone(),
                        expected,
                        found,
                    })
                }
            };
            match op {
                BinOp::Eq => need(ls, rs).map(|_| Sort::Bool),
                BinOp::Add => need(Sort::Int, ls)
                    .and(need(Sort::Int, rs))
                    .map(|_| Sort::Int),
                BinOp::Concat => need(Sort::String, ls)
                    .and(need(Sort::String, rs))
                    .map(|_| Sort::String),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypeErrorKind {
    UnknownChannel,
    UnknownSession,
    RoleMismatch,
    ProtocolOrder,
    SortMismatch,
    MissingLabel,
    IncompleteSession,
    NonStableRecursion,
    UnboundCall,
    GuardSort,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeError {
    pub path: TermPath,
    pub kind: TypeErrorKind,
    pub message: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeReport {
    pub ok: bool,
    pub errors: Vec<TypeError>,
    /// Sessions seen to reach `end`.
    pub completed_sessions: BTreeSet<SessChan>,
}

struct Checker<'a> {
    gamma: &'a Gamma,
    errors: Vec<TypeError>,
    completed: BTreeSet<SessChan>,
    snapshots: Vec<(ChorVar, Delta)>,
}

impl Checker<'_> {
    fn report(&mut self, path: &TermPath, kind: TypeErrorKind, message: String) {
        self.errors.push(TypeError {
            path: path.clone(),
            kind,
            message,
        });
    }

    fn walk(&mut self, c: &Choreography, mut delta: Delta, mut sorts: SortEnv, path: &TermPath) {
        match c {
            Choreography::Inact => {
                for (k, st) in &delta {
                    if types_equivalent(&st.residual, &GlobalType::End) {
                        self.completed.insert(k.clone());
                    } else {
                        let msg = format!("session {k} incomplete: {} remains", st.residual);
                        self.report(path, TypeErrorKind::IncompleteSession, msg);
                    }
                }
            }
            Choreography::Call(x) => {
                let Some((_, snapshot)) = self.snapshots.iter().rev().find(|(y, _)| y == x) else {
                    self.report(
                        path,
                        TypeErrorKind::UnboundCall,
                        format!("call to unbound {x}"),
                    );
                    return;
                };
                if !stable(snapshot, &delta) {
                    let msg =
                        format!("non-stable recursion: sessions at {x} differ from its binder");
                    self.report(path, TypeErrorKind::NonStableRecursion, msg);
                }
                for (k, st) in &delta {
                    if types_equivalent(&st.residual, &GlobalType::End) {
                        self.completed.insert(k.clone());
                    }
                }
            }
            Choreography::Rec(x, body) => {
                self.snapshots.push((x.clone(), delta.clone()));
                self.walk(body, delta, sorts, &path.child(PathStep::Body));
                self.snapshots.pop();
            }
            Choreography::Res(k, body) => {
                if !delta.contains_key(k) {
                    self.report(
                        path,
                        TypeErrorKind::UnknownSession,
                        format!("restricted session {k} has no type"),
                    );
                }
                self.walk(body, delta, sorts, &path.child(PathStep::Body));
            }
            Choreography::Cond {
                at,
                guard,
                then_branch,
                else_branch,
            } => {
                match sort_of(guard, &sorts, at) {
                    Ok(Sort::Bool) => {}
                    Ok(other) => self.report(
                        path,
                        TypeErrorKind::GuardSort,
                        format!("guard has sort {other}, expected bool"),
                    ),
                    Err(e) => self.report(path, TypeErrorKind::GuardSort, format!("guard: {e}")),
                }
                self.walk(
                    then_branch,
                    delta.clone(),
                    sorts.clone(),
                    &path.child(PathStep::Then),
                );
                self.walk(else_branch, delta, sorts, &path.child(PathStep::Else));
            }
            Choreography::Seq(eta, cont) => {
                if self.prefix(eta, &mut delta, &mut sorts, path) {
                    self.walk(cont, delta, sorts, &path.child(PathStep::Cont));
                }
            }
        }
    }

    /// Checks one prefix and advances the environments. Returns false when
    /// the continuation cannot be checked meaningfully.
    fn prefix(
        &mut self,
        eta: &Eta,
        delta: &mut Delta,
        sorts: &mut SortEnv,
        path: &TermPath,
    ) -> bool {
        match eta {
            Eta::Start {
                participants,
                chan,
                sess,
            } => {
                let Some(g) = self.gamma.get(chan) else {
                    self.report(
                        path,
                        TypeErrorKind::UnknownChannel,
                        format!("no protocol on public channel {chan}"),
                    );
                    return false;
                };
                let roles: BTreeSet<RoleName> =
                    participants.iter().map(|p| p.role.clone()).collect();
                if roles != g.roles() {
                    let want: Vec<String> = g.roles().iter().map(|r| r.to_string()).collect();
                    let got: Vec<String> = roles.iter().map(|r| r.to_string()).collect();
                    let msg = format!(
                        "role mismatch: protocol on {chan} has roles {{{}}}, start gives {{{}}}",
                        want.join(", "),
                        got.join(", ")
                    );
                    self.report(path, TypeErrorKind::RoleMismatch, msg);
                    return false;
                }
                let cast = participants
                    .iter()
                    .map(|p| (p.role.clone(), p.thread.clone()))
                    .collect();
                delta.insert(
                    sess.clone(),
                    SessionState {
                        residual: g.clone(),
                        cast,
                    },
                );
                true
            }
            Eta::Com {
                from,
                expr,
                to,
                var,
                sess,
            } => {
                let Some(st) = delta.get_mut(sess) else {
                    self.report(
                        path,
                        TypeErrorKind::UnknownSession,
                        format!("session {sess} is not running"),
                    );
                    return false;
                };
                let GlobalType::Com {
                    from: p,
                    to: q,
                    sort,
                    cont,
                } = st.residual.unfold_head()
                else {
                    let msg = format!(
                        "protocol order: session {sess} expects {}, found com {} -> {}",
                        st.residual, from.role, to.role
                    );
                    self.report(path, TypeErrorKind::ProtocolOrder, msg);
                    return false;
                };
                if p != from.role || q != to.role {
                    let msg = format!(
                        "protocol order: session {sess} expects {p} -> {q}, found {} -> {}",
                        from.role, to.role
                    );
                    self.report(path, TypeErrorKind::ProtocolOrder, msg);
                    return false;
                }
                let cast_ok =
                    st.cast.get(&p) == Some(&from.thread) && st.cast.get(&q) == Some(&to.thread);
                st.residual = *cont;
                if !cast_ok {
                    let msg = format!("role mismatch: {from} or {to} does not match the threads started on {sess}");
                    self.report(path, TypeErrorKind::RoleMismatch, msg);
                }
                match sort_of(expr, sorts, &from.thread) {
                    Ok(s) if s == sort => {}
                    Ok(s) => self.report(
                        path,
                        TypeErrorKind::SortMismatch,
                        format!("sort mismatch: expected {sort}, found {s}"),
                    ),
                    Err(e) => self.report(
                        path,
                        TypeErrorKind::SortMismatch,
                        format!("sort mismatch: expected {sort}: {e}"),
                    ),
                }
                sorts.vars.insert((to.thread.clone(), var.clone()), sort);
                true
            }
            Eta::Sel {
                from,
                to,
                sess,
                label,
            } => {
                let Some(st) = delta.get_mut(sess) else {
                    self.report(
                        path,
                        TypeErrorKind::UnknownSession,
                        format!("session {sess} is not running"),
                    );
                    return false;
                };
                let GlobalType::Choice {
                    from: p,
                    to: q,
                    mut branches,
                } = st.residual.unfold_head()
                else {
                    let msg = format!(
                        "protocol order: session {sess} expects {}, found sel {} -> {}",
                        st.residual, from.role, to.role
                    );
                    self.report(path, TypeErrorKind::ProtocolOrder, msg);
                    return false;
                };
                if p != from.role || q != to.role {
                    let msg = format!(
                        "protocol order: session {sess} expects {p} -> {q}, found {} -> {}",
                        from.role, to.role
                    );
                    self.report(path, TypeErrorKind::ProtocolOrder, msg);
                    return false;
                }
                let Some(next) = branches.remove(label) else {
                    self.report(
                        path,
                        TypeErrorKind::MissingLabel,
                        format!("missing label {label} in choice {p} -> {q}"),
                    );
                    return false;
                };
                if st.cast.get(&p) != Some(&from.thread) || st.cast.get(&q) != Some(&to.thread) {
                    let msg = format!("role mismatch: {from} or {to} does not match the threads started on {sess}");
                    self.report(path, TypeErrorKind::RoleMismatch, msg);
                }
                st.residual = next;
                true
            }
        }
    }
}

/// Equality of running sessions, ignoring completed ones, up to unfolding.
fn stable(before: &Delta, now: &Delta) -> bool {
    let live = |d: &Delta| -> BTreeMap<SessChan, SessionState> {
        d.iter()
            .filter(|(_, st)| !types_equivalent(&st.residual, &GlobalType::End))
            .map(|(k, st)| (k.clone(), st.clone()))
            .collect()
    };
    let (a, b) = (live(before), live(now));
    a.len() == b.len()
        && a.iter().zip(&b).all(|((k1, s1), (k2, s2))| {
            k1 == k2 && s1.cast == s2.cast && types_equivalent(&s1.residual, &s2.residual)
        })
}

/// Checks `c` against the protocols in `gamma`, starting from running sessions `delta`.
pub fn typecheck(gamma: &Gamma, c: &Choreography, delta: &Delta, sorts: &SortEnv) -> TypeReport {
    let mut checker = Checker {
        gamma,
        errors: Vec::new(),
        completed: BTreeSet::new(),
        snapshots: Vec::new(),
    };
    checker.walk(c, delta.clone(), sorts.clone(), &TermPath::root());
    TypeReport {
        ok: checker.errors.is_empty(),
        errors: checker.errors,
        completed_sessions: checker.completed,
    }
}

/// Running sessions after `event`: a start opens its session, a com or sel
/// consumes one action of the session's residual type.
pub fn advance_delta(gamma: &Gamma, delta: &Delta, event: &Event) -> Option<Delta> {
    let mut delta = delta.clone();
    match event {
        Event::Start {
            participants,
            chan,
            sess,
        } => {
            let g = gamma.get(chan)?.clone();
            let cast = participants
                .iter()
                .map(|p| (p.role.clone(), p.thread.clone()))
                .collect();
            delta.insert(sess.clone(), SessionState { residual: g, cast });
        }
        Event::Com { sess, .. } => {
            let st = delta.get_mut(sess)?;
            let GlobalType::Com { cont, .. } = st.residual.unfold_head() else {
                return None;
            };
            st.residual = *cont;
        }
        Event::Sel { sess, label, .. } => {
            let st = delta.get_mut(sess)?;
            let GlobalType::Choice { mut branches, .. } = st.residual.unfold_head() else {
                return None;
            };
            st.residual = branches.remove(label)?;
        }
        Event::Cond { .. } => {}
    }
    Some(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::parser::parse_choreography;
    use crate::semantics::step;
    use crate::transform::merge;

    fn gamma_ab() -> Gamma {
        [("a".into(), corpus::g_a()), ("b".into(), corpus::g_b())]
            .into_iter()
            .collect()
    }

    fn check(gamma: &Gamma, c: &Choreography) -> TypeReport {
        typecheck(gamma, c, &Delta::new(), &corpus::sorts())
    }

    #[test]
    fn sorts_of_expressions() {
        let sigs = SortEnv::new()
            .with_sig("password", vec![], Sort::String)
            .with_sig("check", vec![Sort::String], Sort::Bool);
        let u = ThreadId::new("u");
        assert_eq!(
            sort_of(&Expr::call("password", vec![]), &sigs, &u),
            Ok(Sort::String)
        );
        assert_eq!(sort_of(&Expr::Int(1), &SortEnv::new(), &u), Ok(Sort::Int));
        assert!(matches!(
            sort_of(&Expr::call("check", vec![Expr::Int(1)]), &sigs, &u),
            Err(SortError::Mismatch { .. })
        ));
        assert!(matches!(
            sort_of(&Expr::var("y"), &sigs, &u),
            Err(SortError::Unbound { .. })
        ));
        let with_y = SortEnv::new().with_var("f", "y", Sort::String);
        assert!(
            sort_of(&Expr::var("y"), &with_y, &u).is_err(),
            "variables are per thread"
        );
    }

    #[test]
    fn running_example_is_typable() {
        let r = check(&gamma_ab(), &corpus::chor1());
        assert!(r.ok, "{:?}", r.errors);
        assert!(check(&Gamma::new(), &Choreography::Inact).ok);
    }

    #[test]
    fn wrong_sort_is_reported_at_the_com() {
        let c = parse_choreography(&corpus::CHOR1.replace("password()", "42")).unwrap();
        let r = check(&gamma_ab(), &c);
        assert!(!r.ok);
        assert_eq!(r.errors.len(), 1);
        assert_eq!(r.errors[0].kind, TypeErrorKind::SortMismatch);
        assert!(r.errors[0]
            .message
            .starts_with("sort mismatch: expected string"));
        assert_eq!(r.errors[0].path.to_string(), "/body/cont");
    }

    #[test]
    fn merged_example_is_typable_with_the_composed_protocol() {
        let merged = merge(&corpus::chor1(), &"k".into(), &"c".into()).unwrap();
        let gamma: Gamma = [("c".into(), corpus::g_merged())].into_iter().collect();
        let r = check(&gamma, &merged);
        assert!(r.ok, "{:?}", r.errors);
    }

    #[test]
    fn protocol_violations() {
        let gamma = gamma_ab();
        let kinds = |s: &str| -> Vec<TypeErrorKind> {
            check(&gamma, &parse_choreography(s).unwrap())
                .errors
                .into_iter()
                .map(|e| e.kind)
                .collect()
        };
        assert_eq!(
            kinds("start c[C], u[U] on a as k"),
            vec![TypeErrorKind::IncompleteSession]
        );
        assert_eq!(
            kinds("start c[C], u[U] on a as k; com c[C].\"x\" -> u[U].p over k"),
            vec![TypeErrorKind::ProtocolOrder]
        );
        assert_eq!(
            kinds("start c[C], f[X] on a as k"),
            vec![TypeErrorKind::RoleMismatch]
        );
        assert_eq!(
            kinds("start c[C], u[U] on z as k"),
            vec![TypeErrorKind::UnknownChannel]
        );
        assert_eq!(
            kinds("start c[C], f[F] on b as k; com c[C].\"p\" -> f[F].y over k; sel f[F] -> c[C] : maybe over k"),
            vec![TypeErrorKind::MissingLabel]
        );
        assert_eq!(
            kinds("start c[C], u[U] on a as k; com u[U].\"p\" -> c[C].x over j"),
            vec![TypeErrorKind::UnknownSession]
        );
        assert_eq!(
            kinds("start c[C], u[U] on a as k; if 3 @ c then com u[U].\"p\" -> c[C].x over k else com u[U].\"q\" -> c[C].x over k"),
            vec![TypeErrorKind::GuardSort]
        );
    }

    #[test]
    fn recursion_must_return_to_the_same_sessions() {
        let gamma = gamma_ab();
        // the loop leaves session k half-used at the recursive call
        let c = parse_choreography(
            "start c[C], f[F] on b as k; rec X { com c[C].\"p\" -> f[F].y over k; X }",
        )
        .unwrap();
        let r = check(&gamma, &c);
        assert!(
            r.errors
                .iter()
                .any(|e| e.kind == TypeErrorKind::NonStableRecursion),
            "{:?}",
            r.errors
        );
        assert!(r.errors[0].message.starts_with("non-stable recursion"));
    }

    #[test]
    fn weakening() {
        let mut gamma = gamma_ab();
        gamma.insert("z".into(), corpus::g_merged());
        assert!(check(&gamma, &corpus::chor1()).ok);
        let bad = parse_choreography(&corpus::CHOR1.replace("password()", "42")).unwrap();
        assert_eq!(check(&gamma, &bad).ok, check(&gamma_ab(), &bad).ok);
    }

    #[test]
    fn branch_symmetry() {
        let swapped = corpus::CHOR1
            .replace("check(y)", "(check(y) == false)")
            .replace(": ok", ": TMP")
            .replace(": quit", ": ok")
            .replace(": TMP", ": quit");
        // same verdict either way round (both wrong here: the ok arm now loops without sending)
        let c = parse_choreography(&swapped).unwrap();
        let a = check(&gamma_ab(), &c);
        let text = "rec X { start c[C], u[U] on a as k; com u[U].password() -> c[C].pwd over k; start c[C], f[F] on b as k'; com c[C].pwd -> f[F].y over k'; if (check(y) == false) @ f then sel f[F] -> c[C] : quit over k'; X else sel f[F] -> c[C] : ok over k'; com c[C].file -> f[F].z over k' }";
        let b = check(&gamma_ab(), &parse_choreography(text).unwrap());
        assert!(b.ok, "{:?}", b.errors);
        assert!(!a.ok);
    }

    /// One step of a typed term, with the session environment advanced by
    /// the step's event, is typed again.
    #[test]
    fn subject_reduction_along_runs() {
        let gamma = gamma_ab();
        for answers in [[true, true], [false, true], [false, false]] {
            let mut env = corpus::env(&answers);
            let mut c = corpus::chor1();
            let mut delta = Delta::new();
            let mut sorts = corpus::sorts();
            for _ in 0..20 {
                let Some(s) = step(&c, &env).unwrap() else {
                    break;
                };
                delta = advance_delta(&gamma, &delta, &s.event).expect("event fits the protocol");
                if let Event::Com { to, var, value, .. } = &s.event {
                    sorts
                        .vars
                        .insert((to.thread.clone(), var.clone()), value.sort());
                }
                let r = typecheck(&gamma, &s.next, &delta, &sorts);
                assert!(r.ok, "after {}: {:?}\n{}", s.event, r.errors, s.next);
                c = s.next;
                env = s.env;
            }
        }
    }
}
