use crate::ast::{
    alpha_equal_type, Choreography, Eta, GlobalType, PathStep, SessChan, TermPath, TypeVar,
};
use crate::typing::{sort_of, SortEnv};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("choreography uses several sessions: {0:?}")]
    MultiSession(Vec<SessChan>),
    #[error("{0}: start inside the body; extract from a merged choreography")]
    UnexpectedStart(TermPath),
    #[error("{0}: unmergeable conditional: branches neither begin with distinct selections nor have equal types")]
    UnmergeableConditional(TermPath),
    #[error("{path}: unsortable expression: {message}")]
    Unsortable { path: TermPath, message: String },
    #[error("extracted type is not well formed: {0}")]
    IllFormed(String),
}

fn type_var(x: &crate::ast::ChorVar) -> TypeVar {
    TypeVar::new(format!("t_{x}"))
}

/// Reads off the global type followed by a single-session choreography.
///
/// A leading start is skipped. Roles are taken verbatim from the prefixes.
pub fn extract_type(c: &Choreography, sorts: &SortEnv) -> Result<GlobalType, ExtractError> {
    let body = match c {
        Choreography::Seq(Eta::Start { .. }, cont) => cont,
        other => other,
    };
    let sessions: BTreeSet<SessChan> = body.etas().iter().map(|e| e.sess().clone()).collect();
    if sessions.len() > 1 {
        return Err(ExtractError::MultiSession(sessions.into_iter().collect()));
    }
    let g = walk(body, &mut sorts.clone(), &TermPath::root())?;
    g.check_well_formed()
        .map_err(|e| ExtractError::IllFormed(e.to_string()))?;
    Ok(g)
}

fn walk(
    c: &Choreography,
    sorts: &mut SortEnv,
    path: &TermPath,
) -> Result<GlobalType, ExtractError> {
    match c {
        Choreography::Inact => Ok(GlobalType::End),
        Choreography::Call(x) => Ok(GlobalType::Var(type_var(x))),
        Choreography::Rec(x, body) => Ok(GlobalType::Rec(
            type_var(x),
            Box::new(walk(body, sorts, &path.child(PathStep::Body))?),
        )),
        Choreography::Res(_, body) => walk(body, sorts, &path.child(PathStep::Body)),
        Choreography::Seq(eta, cont) => match eta {
            Eta::Start { .. } => Err(ExtractError::UnexpectedStart(path.clone())),
            Eta::Com {
                from,
                expr,
                to,
                var,
                ..
            } => {
                let sort =
                    sort_of(expr, sorts, &from.thread).map_err(|e| ExtractError::Unsortable {
                        path: path.clone(),
                        message: e.to_string(),
                    })?;
                sorts.vars.insert((to.thread.clone(), var.clone()), sort);
                Ok(GlobalType::Com {
                    from: from.role.clone(),
                    to: to.role.clone(),
                    sort,
                    cont: Box::new(walk(cont, sorts, &path.child(PathStep::Cont))?),
                })
            }
            Eta::Sel {
                from, to, label, ..
            } => Ok(GlobalType::Choice {
                from: from.role.clone(),
                to: to.role.clone(),
                branches: [(
                    label.clone(),
                    walk(cont, sorts, &path.child(PathStep::Cont))?,
                )]
                .into(),
            }),
        },
        Choreography::Cond {
            then_branch,
            else_branch,
            ..
        } => {
            let g1 = walk(then_branch, &mut sorts.clone(), &path.child(PathStep::Then))?;
            let g2 = walk(else_branch, &mut sorts.clone(), &path.child(PathStep::Else))?;
            join_branches(g1, g2).ok_or_else(|| ExtractError::UnmergeableConditional(path.clone()))
        }
    }
}

/// Combines the types of the two arms of a conditional: selections between
/// the same pair of roles are merged into one choice (shared labels must
/// agree), otherwise both arms must have the same type.
fn join_branches(g1: GlobalType, g2: GlobalType) -> Option<GlobalType> {
    match (g1, g2) {
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
        ) if p1 == p2 && q1 == q2 => {
            let mut branches = b1;
            for (l, g) in b2 {
                match branches.get(&l) {
                    Some(existing) if !alpha_equal_type(existing, &g) => return None,
                    Some(_) => {}
                    None => {
                        branches.insert(l, g);
                    }
                }
            }
            Some(GlobalType::Choice {
                from: p1,
                to: q1,
                branches,
            })
        }
        (g1, g2) if alpha_equal_type(&g1, &g2) => Some(g1),
        _ => None,
    }
}
