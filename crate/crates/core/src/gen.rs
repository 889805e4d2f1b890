//! Seeded random generation of closed, runnable choreographies and of
//! well-formed global types, for property tests and benchmarks.

use crate::ast::{
    BinOp, ChorVar, Choreography, Endpoint, Eta, Expr, GlobalType, Label, PublicChan, RoleName,
    SessChan, Sort, ThreadId, TypeVar, Value, VarName,
};
use crate::semantics::BuiltinEnv;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub threads: usize,
    pub max_sessions: usize,
    pub max_recs: usize,
    /// Bound on the nesting depth of the generated term.
    pub max_depth: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            threads: 4,
            max_sessions: 3,
            max_recs: 2,
            max_depth: 12,
        }
    }
}

/// Builtins used by generated terms: `flip() : bool`, `next() : int`,
/// `name() : string`.
pub fn gen_env() -> BuiltinEnv {
    BuiltinEnv::new()
        .with_function(
            "flip",
            vec![],
            Sort::Bool,
            vec![Value::Bool(true), Value::Bool(false), Value::Bool(false)],
        )
        .with_function(
            "next",
            vec![],
            Sort::Int,
            vec![Value::Int(1), Value::Int(2), Value::Int(3)],
        )
        .with_function(
            "name",
            vec![],
            Sort::String,
            vec![Value::Str("ann".into()), Value::Str("bo".into())],
        )
}

#[derive(Clone)]
struct Session {
    sess: SessChan,
    parts: Vec<Endpoint>,
}

struct ChorGen {
    rng: ChaCha8Rng,
    cfg: GenConfig,
    started: usize,
    recs: usize,
    vars: usize,
}

#[derive(Clone, Default)]
struct Scope {
    sessions: Vec<Session>,
    /// Variables bound so far, with the thread holding them.
    bound: Vec<(ThreadId, VarName, Sort)>,
    /// Recursion variables in scope and whether a prefix guards them.
    recvars: Vec<(ChorVar, bool)>,
}

impl Scope {
    fn guarded(&self) -> Scope {
        let mut s = self.clone();
        for r in &mut s.recvars {
            r.1 = true;
        }
        s
    }
}

const ROLES: [&str; 4] = ["P", "Q", "R", "S"];

impl ChorGen {
    fn thread(&mut self) -> ThreadId {
        ThreadId::new(format!("t{}", self.rng.gen_range(1..=self.cfg.threads)))
    }

    fn expr_at(&mut self, at: &ThreadId, scope: &Scope) -> (Expr, Sort) {
        let local: Vec<&(ThreadId, VarName, Sort)> =
            scope.bound.iter().filter(|(t, _, _)| t == at).collect();
        match self.rng.gen_range(0..6) {
            0 => (Expr::Int(self.rng.gen_range(0..10)), Sort::Int),
            1 => (
                Expr::Str(["hi", "yo"][self.rng.gen_range(0..2)].into()),
                Sort::String,
            ),
            2 => (Expr::call("next", vec![]), Sort::Int),
            3 => (Expr::call("name", vec![]), Sort::String),
            _ if !local.is_empty() => {
                let (_, x, s) = local[self.rng.gen_range(0..local.len())].clone();
                if s == Sort::Int && self.rng.gen_bool(0.5) {
                    (
                        Expr::binop(BinOp::Add, Expr::Var(x), Expr::Int(1)),
                        Sort::Int,
                    )
                } else {
                    (Expr::Var(x), s)
                }
            }
            _ => (Expr::Bool(self.rng.gen_bool(0.5)), Sort::Bool),
        }
    }

    fn gen(&mut self, depth: usize, scope: &Scope) -> Choreography {
        let callable: Vec<ChorVar> = scope
            .recvars
            .iter()
            .filter(|r| r.1)
            .map(|r| r.0.clone())
            .collect();
        if depth <= 1 {
            if !callable.is_empty() && self.rng.gen_bool(0.5) {
                return Choreography::Call(callable.choose(&mut self.rng).unwrap().clone());
            }
            return Choreography::Inact;
        }
        loop {
            match self.rng.gen_range(0..12) {
                0 if self.started < self.cfg.max_sessions => return self.gen_start(depth, scope),
                1..=4 if !scope.sessions.is_empty() => return self.gen_com(depth, scope),
                5 | 6 if !scope.sessions.is_empty() => return self.gen_sel(depth, scope),
                7 => return self.gen_cond(depth, scope),
                8 if self.recs < self.cfg.max_recs => {
                    self.recs += 1;
                    let x = ChorVar::new(format!("X{}", self.recs));
                    let mut inner = scope.clone();
                    inner.recvars.push((x.clone(), false));
                    return Choreography::Rec(x, Box::new(self.gen(depth - 1, &inner)));
                }
                9 if !callable.is_empty() && self.rng.gen_bool(0.5) => {
                    return Choreography::Call(callable.choose(&mut self.rng).unwrap().clone())
                }
                10 if self.rng.gen_bool(0.15) => return Choreography::Inact,
                11 if scope.sessions.is_empty() && self.started < self.cfg.max_sessions => {
                    return self.gen_start(depth, scope)
                }
                _ => {}
            }
        }
    }

    fn gen_start(&mut self, depth: usize, scope: &Scope) -> Choreography {
        self.started += 1;
        let n = self.rng.gen_range(2..=3.min(self.cfg.threads));
        let mut threads: Vec<usize> = (1..=self.cfg.threads).collect();
        threads.shuffle(&mut self.rng);
        let parts: Vec<Endpoint> = threads[..n]
            .iter()
            .zip(ROLES)
            .map(|(t, r)| Endpoint {
                thread: ThreadId::new(format!("t{t}")),
                role: RoleName::new(r),
            })
            .collect();
        let sess = SessChan::new(format!("k{}", self.started));
        let eta = Eta::Start {
            participants: parts.clone(),
            chan: PublicChan::new(format!("a{}", self.started)),
            sess: sess.clone(),
        };
        let mut inner = scope.guarded();
        inner.sessions.push(Session { sess, parts });
        Choreography::seq(eta, self.gen(depth - 1, &inner))
    }

    fn pair(&mut self, scope: &Scope) -> (SessChan, Endpoint, Endpoint) {
        let s = scope.sessions.choose(&mut self.rng).unwrap().clone();
        let mut ends = s.parts.clone();
        ends.shuffle(&mut self.rng);
        (s.sess, ends[0].clone(), ends[1].clone())
    }

    fn gen_com(&mut self, depth: usize, scope: &Scope) -> Choreography {
        let (sess, from, to) = self.pair(scope);
        let (expr, sort) = self.expr_at(&from.thread, scope);
        self.vars += 1;
        let var = VarName::new(format!("x{}", self.vars));
        let mut inner = scope.guarded();
        inner.bound.push((to.thread.clone(), var.clone(), sort));
        let eta = Eta::Com {
            from,
            expr,
            to,
            var,
            sess,
        };
        Choreography::seq(eta, self.gen(depth - 1, &inner))
    }

    fn gen_sel(&mut self, depth: usize, scope: &Scope) -> Choreography {
        let (sess, from, to) = self.pair(scope);
        let label = Label::new(format!("l{}", self.rng.gen_range(1..=2)));
        let eta = Eta::Sel {
            from,
            to,
            sess,
            label,
        };
        Choreography::seq(eta, self.gen(depth - 1, &scope.guarded()))
    }

    fn gen_cond(&mut self, depth: usize, scope: &Scope) -> Choreography {
        let at = self.thread();
        let bools: Vec<VarName> = scope
            .bound
            .iter()
            .filter(|(t, _, s)| *t == at && *s == Sort::Bool)
            .map(|(_, x, _)| x.clone())
            .collect();
        let guard = match self.rng.gen_range(0..4) {
            0 => Expr::Bool(self.rng.gen_bool(0.5)),
            1 if !bools.is_empty() => Expr::Var(bools.choose(&mut self.rng).unwrap().clone()),
            _ => Expr::call("flip", vec![]),
        };
        let inner = scope.guarded();
        let then_branch = self.gen(depth - 1, &inner);
        let else_branch = self.gen(depth - 1, &inner);
        Choreography::Cond {
            at,
            guard,
            then_branch: Box::new(then_branch),
            else_branch: Box::new(else_branch),
        }
    }
}

/// A closed, well-formed choreography that runs under [`gen_env`].
///
/// Every session is started before use and every start uses a fresh
/// session name, so merging onto a session named `k` is always allowed.
pub fn gen_choreography(seed: u64, cfg: GenConfig) -> Choreography {
    let mut g = ChorGen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        cfg,
        started: 0,
        recs: 0,
        vars: 0,
    };
    g.gen(cfg.max_depth, &Scope::default())
}

/// A well-formed (closed, contractive) global type over roles A, B, C.
pub fn gen_global_type(seed: u64, max_depth: usize) -> GlobalType {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recs = 0;
    gen_type(&mut rng, max_depth, &[], &mut recs)
}

fn gen_type(
    rng: &mut ChaCha8Rng,
    depth: usize,
    vars: &[(TypeVar, bool)],
    recs: &mut usize,
) -> GlobalType {
    const PARTIES: [&str; 3] = ["A", "B", "C"];
    let guarded: Vec<&TypeVar> = vars.iter().filter(|v| v.1).map(|v| &v.0).collect();
    let all_guarded: Vec<(TypeVar, bool)> = vars.iter().map(|(t, _)| (t.clone(), true)).collect();
    let pick_pair = |rng: &mut ChaCha8Rng| {
        let mut ps = PARTIES.to_vec();
        ps.shuffle(rng);
        (RoleName::new(ps[0]), RoleName::new(ps[1]))
    };
    if depth <= 1 {
        return match guarded.choose(rng) {
            Some(t) if rng.gen_bool(0.5) => GlobalType::Var((*t).clone()),
            _ => GlobalType::End,
        };
    }
    // a rec head must be followed by an interaction, so it never lands at depth 2
    let choice = rng.gen_range(0..10);
    match choice {
        0..=3 => {
            let (from, to) = pick_pair(rng);
            let sort = *Sort::ALL.choose(rng).unwrap();
            GlobalType::Com {
                from,
                to,
                sort,
                cont: Box::new(gen_type(rng, depth - 1, &all_guarded, recs)),
            }
        }
        4..=6 => {
            let (from, to) = pick_pair(rng);
            let n = rng.gen_range(1..=2);
            let branches: BTreeMap<Label, GlobalType> = (1..=n)
                .map(|i| {
                    (
                        Label::new(format!("l{i}")),
                        gen_type(rng, depth - 1, &all_guarded, recs),
                    )
                })
                .collect();
            GlobalType::Choice { from, to, branches }
        }
        7 if *recs < 2 && depth > 2 => {
            *recs += 1;
            let t = TypeVar::new(format!("t{recs}"));
            let mut inner = vars.to_vec();
            inner.push((t.clone(), false));
            let (from, to) = pick_pair(rng);
            let sort = *Sort::ALL.choose(rng).unwrap();
            let body = GlobalType::Com {
                from,
                to,
                sort,
                cont: Box::new(gen_type(
                    rng,
                    depth - 2,
                    &inner
                        .iter()
                        .map(|(v, _)| (v.clone(), true))
                        .collect::<Vec<_>>(),
                    recs,
                )),
            };
            GlobalType::Rec(t, Box::new(body))
        }
        8 if !guarded.is_empty() => GlobalType::Var((*guarded.choose(rng).unwrap()).clone()),
        _ => GlobalType::End,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::well_formed;
    use crate::semantics::run;

    #[test]
    fn generated_terms_respect_the_limits() {
        let cfg = GenConfig::default();
        for seed in 0..300 {
            let c = gen_choreography(seed, cfg);
            assert!(
                well_formed(&c).is_empty(),
                "seed {seed}: {:?}",
                well_formed(&c)
            );
            assert!(c.free_sessions().is_empty());
            assert!(c.free_vars().is_empty());
            assert!(c.count_starts() <= cfg.max_sessions);
            assert!(c.depth() <= cfg.max_depth);
            let trace = run(&c, &gen_env(), 40);
            assert!(trace.error.is_none(), "seed {seed}: {:?}", trace.error);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(
            gen_choreography(7, GenConfig::default()),
            gen_choreography(7, GenConfig::default())
        );
        assert_eq!(gen_global_type(7, 6), gen_global_type(7, 6));
    }

    #[test]
    fn generated_types_are_well_formed() {
        for seed in 0..300 {
            let g = gen_global_type(seed, 6);
            assert!(g.is_well_formed(), "seed {seed}: {g}");
        }
    }
}
