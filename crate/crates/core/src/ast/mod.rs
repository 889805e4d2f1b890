//! Term model: identifiers, expressions, choreographies and global types.

mod alpha;
mod chor;
mod expr;
mod gtype;
mod names;
mod wf;

pub use alpha::{alpha_equal, canonical, gc_restrictions};
pub use chor::{Choreography, Endpoint, Eta};
pub use expr::{BinOp, Expr, Sort, Value};
pub use gtype::{alpha_equal_type, types_equivalent, GlobalType, TypeFormError};
pub use names::{ChorVar, Label, PublicChan, RoleName, SessChan, ThreadId, TypeVar, VarName};
pub use wf::{subterm, well_formed, DiagKind, Diagnostic, PathStep, TermPath};
