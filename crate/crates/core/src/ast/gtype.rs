use super::expr::Sort;
use super::names::{Label, RoleName, TypeVar};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

/// Global types: protocols between roles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GlobalType {
    Com {
        from: RoleName,
        to: RoleName,
        sort: Sort,
        cont: Box<GlobalType>,
    },
    Choice {
        from: RoleName,
        to: RoleName,
        branches: BTreeMap<Label, GlobalType>,
    },
    End,
    Rec(TypeVar, Box<GlobalType>),
    Var(TypeVar),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeFormError {
    #[error("choice between {0} and {1} has no branches")]
    EmptyChoice(RoleName, RoleName),
    #[error("role {0} interacts with itself")]
    SelfInteraction(RoleName),
    #[error("type variable {0} is unbound")]
    UnboundVar(TypeVar),
    #[error("recursion on {0} is not contractive")]
    NonContractive(TypeVar),
}

impl GlobalType {
    pub fn com(from: &str, to: &str, sort: Sort, cont: GlobalType) -> Self {
        GlobalType::Com {
            from: RoleName::new(from),
            to: RoleName::new(to),
            sort,
            cont: Box::new(cont),
        }
    }

    pub fn choice(from: &str, to: &str, branches: Vec<(&str, GlobalType)>) -> Self {
        GlobalType::Choice {
            from: RoleName::new(from),
            to: RoleName::new(to),
            branches: branches
                .into_iter()
                .map(|(l, g)| (Label::new(l), g))
                .collect(),
        }
    }

    pub fn rec(t: &str, body: GlobalType) -> Self {
        GlobalType::Rec(TypeVar::new(t), Box::new(body))
    }

    pub fn var(t: &str) -> Self {
        GlobalType::Var(TypeVar::new(t))
    }

    pub fn roles(&self) -> BTreeSet<RoleName> {
        let mut out = BTreeSet::new();
        self.collect_roles(&mut out);
        out
    }

    fn collect_roles(&self, out: &mut BTreeSet<RoleName>) {
        match self {
            GlobalType::Com { from, to, cont, .. } => {
                out.insert(from.clone());
                out.insert(to.clone());
                cont.collect_roles(out);
            }
            GlobalType::Choice { from, to, branches } => {
                out.insert(from.clone());
                out.insert(to.clone());
                branches.values().for_each(|g| g.collect_roles(out));
            }
            GlobalType::Rec(_, body) => body.collect_roles(out),
            GlobalType::End | GlobalType::Var(_) => {}
        }
    }

    /// Checks branch non-emptiness, distinct interacting roles, bound
    /// variables and contractiveness.
    pub fn check_well_formed(&self) -> Result<(), TypeFormError> {
        self.check_wf(&mut Vec::new())
    }

    pub fn is_well_formed(&self) -> bool {
        self.check_well_formed().is_ok()
    }

    fn check_wf(&self, scope: &mut Vec<TypeVar>) -> Result<(), TypeFormError> {
        match self {
            GlobalType::Com { from, to, cont, .. } => {
                if from == to {
                    return Err(TypeFormError::SelfInteraction(from.clone()));
                }
                cont.check_wf(scope)
            }
            GlobalType::Choice { from, to, branches } => {
                if branches.is_empty() {
                    return Err(TypeFormError::EmptyChoice(from.clone(), to.clone()));
                }
                if from == to {
                    return Err(TypeFormError::SelfInteraction(from.clone()));
                }
                branches.values().try_for_each(|g| g.check_wf(scope))
            }
            GlobalType::End => Ok(()),
            GlobalType::Var(t) => {
                if scope.contains(t) {
                    Ok(())
                } else {
                    Err(TypeFormError::UnboundVar(t.clone()))
                }
            }
            GlobalType::Rec(t, body) => {
                if !body.guards(t) {
                    return Err(TypeFormError::NonContractive(t.clone()));
                }
                scope.push(t.clone());
                let r = body.check_wf(scope);
                scope.pop();
                r
            }
        }
    }

    /// False if `t` is reachable from the root through `rec` binders only.
    fn guards(&self, t: &TypeVar) -> bool {
        match self {
            GlobalType::Var(s) => s != t,
            GlobalType::Rec(s, body) => s == t || body.guards(t),
            _ => true,
        }
    }

    /// Substitutes `repl` for free occurrences of `t`. `repl` must be closed.
    pub fn substitute(&self, t: &TypeVar, repl: &GlobalType) -> GlobalType {
        match self {
            GlobalType::Var(s) if s == t => repl.clone(),
            GlobalType::Var(_) | GlobalType::End => self.clone(),
            GlobalType::Rec(s, _) if s == t => self.clone(),
            GlobalType::Rec(s, body) => {
                GlobalType::Rec(s.clone(), Box::new(body.substitute(t, repl)))
            }
            GlobalType::Com {
                from,
                to,
                sort,
                cont,
            } => GlobalType::Com {
                from: from.clone(),
                to: to.clone(),
                sort: *sort,
                cont: Box::new(cont.substitute(t, repl)),
            },
            GlobalType::Choice { from, to, branches } => GlobalType::Choice {
                from: from.clone(),
                to: to.clone(),
                branches: branches
                    .iter()
                    .map(|(l, g)| (l.clone(), g.substitute(t, repl)))
                    .collect(),
            },
        }
    }

    /// Unfolds top-level recursion until the head is a communication,
    /// choice, end, or a free variable.
    pub fn unfold_head(&self) -> GlobalType {
        let mut g = self.clone();
        // contractive types need at most one unfolding per leading binder
        let mut budget = 64;
        while let GlobalType::Rec(t, body) = &g {
            if budget == 0 {
                break;
            }
            budget -= 1;
            g = body.substitute(t, &g);
        }
        g
    }

    /// Canonical representative of the α-class: recursion variables are
    /// renamed by binder depth.
    pub fn canonical(&self) -> GlobalType {
        self.canon(&mut Vec::new())
    }

    fn canon(&self, scope: &mut Vec<(TypeVar, TypeVar)>) -> GlobalType {
        match self {
            GlobalType::Var(t) => scope
                .iter()
                .rev()
                .find(|(old, _)| old == t)
                .map(|(_, new)| GlobalType::Var(new.clone()))
                .unwrap_or_else(|| self.clone()),
            GlobalType::Rec(t, body) => {
                let fresh = TypeVar::new(format!("%t{}", scope.len()));
                scope.push((t.clone(), fresh.clone()));
                let body = body.canon(scope);
                scope.pop();
                GlobalType::Rec(fresh, Box::new(body))
            }
            GlobalType::End => GlobalType::End,
            GlobalType::Com {
                from,
                to,
                sort,
                cont,
            } => GlobalType::Com {
                from: from.clone(),
                to: to.clone(),
                sort: *sort,
                cont: Box::new(cont.canon(scope)),
            },
            GlobalType::Choice { from, to, branches } => GlobalType::Choice {
                from: from.clone(),
                to: to.clone(),
                branches: branches
                    .iter()
                    .map(|(l, g)| (l.clone(), g.canon(scope)))
                    .collect(),
            },
        }
    }

    /// Applies a role renaming; roles missing from the map are kept.
    pub fn rename_roles(&self, map: &BTreeMap<RoleName, RoleName>) -> GlobalType {
        let r = |p: &RoleName| map.get(p).cloned().unwrap_or_else(|| p.clone());
        match self {
            GlobalType::Com {
                from,
                to,
                sort,
                cont,
            } => GlobalType::Com {
                from: r(from),
                to: r(to),
                sort: *sort,
                cont: Box::new(cont.rename_roles(map)),
            },
            GlobalType::Choice { from, to, branches } => GlobalType::Choice {
                from: r(from),
                to: r(to),
                branches: branches
                    .iter()
                    .map(|(l, g)| (l.clone(), g.rename_roles(map)))
                    .collect(),
            },
            GlobalType::Rec(t, body) => {
                GlobalType::Rec(t.clone(), Box::new(body.rename_roles(map)))
            }
            GlobalType::End | GlobalType::Var(_) => self.clone(),
        }
    }
}

/// Equality after canonicalising recursion binders.
pub fn alpha_equal_type(a: &GlobalType, b: &GlobalType) -> bool {
    a.canonical() == b.canonical()
}

/// Equality of the regular trees denoted by two closed, contractive types.
pub fn types_equivalent(a: &GlobalType, b: &GlobalType) -> bool {
    let mut seen = HashSet::new();
    let mut todo = vec![(a.canonical(), b.canonical())];
    while let Some((x, y)) = todo.pop() {
        if !seen.insert((x.clone(), y.clone())) {
            continue;
        }
        match (x.unfold_head(), y.unfold_head()) {
            (GlobalType::End, GlobalType::End) => {}
            (
                GlobalType::Com {
                    from: p1,
                    to: q1,
                    sort: s1,
                    cont: c1,
                },
                GlobalType::Com {
                    from: p2,
                    to: q2,
                    sort: s2,
                    cont: c2,
                },
            ) => {
                if p1 != p2 || q1 != q2 || s1 != s2 {
                    return false;
                }
                todo.push((c1.canonical(), c2.canonical()));
            }
            (
                GlobalType::Choice {
                    from: p1,
                    to: q1,
                    branches: b1,
                },
                GlobalType::Choice {
                    from: p2,
                    to: q2,
                    branches: b2,
                },
            ) => {
                if p1 != p2 || q1 != q2 || b1.keys().ne(b2.keys()) {
                    return false;
                }
                for (g1, g2) in b1.values().zip(b2.values()) {
                    todo.push((g1.canonical(), g2.canonical()));
                }
            }
            (GlobalType::Var(s), GlobalType::Var(t)) if s == t => {}
            _ => return false,
        }
    }
    true
}

impl fmt::Display for GlobalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlobalType::Com {
                from,
                to,
                sort,
                cont,
            } => {
                write!(f, "{from} -> {to} : <{sort}>")?;
                if **cont != GlobalType::End {
                    write!(f, "; {cont}")?;
                }
                Ok(())
            }
            GlobalType::Choice { from, to, branches } => {
                write!(f, "{from} -> {to} {{ ")?;
                for (i, (l, g)) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{l}: {g}")?;
                }
                f.write_str(" }")
            }
            GlobalType::End => f.write_str("end"),
            GlobalType::Rec(t, body) => write!(f, "rec {t} . {body}"),
            GlobalType::Var(t) => write!(f, "{t}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn loop_on(t: &str) -> GlobalType {
        GlobalType::rec(
            t,
            GlobalType::choice(
                "A",
                "B",
                vec![
                    (
                        "more",
                        GlobalType::com("A", "B", Sort::Int, GlobalType::var(t)),
                    ),
                    ("stop", GlobalType::End),
                ],
            ),
        )
    }

    #[test]
    fn alpha_equality_of_types() {
        assert!(alpha_equal_type(&loop_on("t"), &loop_on("s")));
        assert!(!alpha_equal_type(&corpus::g_a(), &corpus::g_b()));
        assert!(alpha_equal_type(&GlobalType::End, &GlobalType::End));
    }

    #[test]
    fn well_formedness() {
        assert_eq!(
            GlobalType::rec("t", GlobalType::var("t")).check_well_formed(),
            Err(TypeFormError::NonContractive("t".into()))
        );
        assert!(
            GlobalType::rec("t", GlobalType::rec("s", GlobalType::var("t")))
                .check_well_formed()
                .is_err()
        );
        assert!(GlobalType::var("t").check_well_formed().is_err());
        assert!(GlobalType::com("A", "A", Sort::Int, GlobalType::End)
            .check_well_formed()
            .is_err());
        assert!(GlobalType::Choice {
            from: "A".into(),
            to: "B".into(),
            branches: BTreeMap::new()
        }
        .check_well_formed()
        .is_err());
        assert!(loop_on("t").is_well_formed());
        assert!(corpus::g_merged().is_well_formed());
    }

    #[test]
    fn equivalence_sees_through_unfolding() {
        let g = loop_on("t");
        let GlobalType::Rec(t, body) = &g else {
            panic!()
        };
        let once = body.substitute(t, &g);
        assert!(!alpha_equal_type(&g, &once));
        assert!(types_equivalent(&g, &once));
        assert!(!types_equivalent(&g, &GlobalType::End));
    }

    #[test]
    fn display() {
        assert_eq!(corpus::g_a().to_string(), "U -> C : <string>");
        assert_eq!(
            corpus::g_b().to_string(),
            "C -> F : <string>; F -> C { ok: C -> F : <file>, quit: end }"
        );
    }

    #[test]
    fn role_renaming() {
        let map = [(RoleName::new("U"), RoleName::new("u"))]
            .into_iter()
            .collect();
        assert_eq!(
            corpus::g_a().rename_roles(&map).to_string(),
            "u -> C : <string>"
        );
    }
}
