use super::env::BuiltinEnv;
use crate::ast::{BinOp, Expr, Sort, ThreadId, Value, VarName};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable {var} at thread {thread}")]
    Unbound { thread: ThreadId, var: VarName },
    #[error("unknown builtin {0}")]
    UnknownBuiltin(String),
    #[error("builtin {name} takes {expected} arguments, got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("sort mismatch in {context}: expected {expected}, found {found}")]
    SortMismatch {
        context: String,
        expected: Sort,
        found: Sort,
    },
    #[error("integer overflow")]
    Overflow,
}

/// Evaluates `e` at thread `at`. Builtin calls advance their cursors in `env`.
pub fn eval_expr(e: &Expr, env: &mut BuiltinEnv, at: &ThreadId) -> Result<Value, EvalError> {
    match e {
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Int(n) => Ok(Value::Int(*n)),
        Expr::Str(s) => Ok(Value::Str(s.clone())),
        Expr::File(s) => Ok(Value::File(s.clone())),
        Expr::Var(x) => env
            .bindings
            .get(&(at.clone(), x.clone()))
            .cloned()
            .ok_or_else(|| EvalError::Unbound {
                thread: at.clone(),
                var: x.clone(),
            }),
        Expr::Call(name, args) => {
            let sig = env
                .functions
                .get(name)
                .map(|f| f.sig.clone())
                .ok_or_else(|| EvalError::UnknownBuiltin(name.clone()))?;
            if sig.params.len() != args.len() {
                return Err(EvalError::Arity {
                    name: name.clone(),
                    expected: sig.params.len(),
                    found: args.len(),
                });
            }
            for (arg, expected) in args.iter().zip(&sig.params) {
                let v = eval_expr(arg, env, at)?;
                if v.sort() != *expected {
                    return Err(EvalError::SortMismatch {
                        context: format!("argument of {name}"),
                        expected: *expected,
                        found: v.sort(),
                    });
                }
            }
            Ok(env.next_value(name).expect("builtin looked up above"))
        }
        Expr::BinOp(op, l, r) => {
            let lv = eval_expr(l, env, at)?;
            let rv = eval_expr(r, env, at)?;
            let mismatch = |expected: Sort, found: Sort| EvalError::SortMismatch {
                context: format!("operator {}", op.symbol()),
                expected,
                found,
            };
            match (op, lv, rv) {
                (BinOp::Eq, a, b) if a.sort() == b.sort() => Ok(Value::Bool(a == b)),
                (BinOp::Eq, a, b) => Err(mismatch(a.sort(), b.sort())),
                (BinOp::Add, Value::Int(a), Value::Int(b)) => {
                    a.checked_add(b).map(Value::Int).ok_or(EvalError::Overflow)
                }
                (BinOp::Add, Value::Int(_), b) => Err(mismatch(Sort::Int, b.sort())),
                (BinOp::Add, a, _) => Err(mismatch(Sort::Int, a.sort())),
                (BinOp::Concat, Value::Str(a), Value::Str(b)) => Ok(Value::Str(a + &b)),
                (BinOp::Concat, Value::Str(_), b) => Err(mismatch(Sort::String, b.sort())),
                (BinOp::Concat, a, _) => Err(mismatch(Sort::String, a.sort())),
            }
        }
    }
}
