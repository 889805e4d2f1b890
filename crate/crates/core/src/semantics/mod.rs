//! Reduction semantics of choreographies.
//!
//! Rules: start opens a restricted session, com evaluates and substitutes,
//! sel drops its prefix, if picks a branch, reduction proceeds under
//! restrictions, and `rec` is unfolded when it sits at the head.

mod env;
mod eval;
mod step;

pub use env::{Builtin, BuiltinEnv, EnvError, Signature};
pub use eval::{eval_expr, EvalError};
pub use step::{run, step, Event, Step, StepError, Trace, TraceStep};
