//! Choreographies with multiparty sessions: parsing, a reduction semantics,
//! protocol typing, the session-merging transformation, the algebra of
//! merged protocols (path sets and mesh membership), and bounded checks
//! that merging preserves behaviour.
//!
//! ```
//! use gcmerge::{corpus, merge, SessChan, PublicChan, typecheck, Delta};
//!
//! let c = corpus::chor1();
//! let merged = merge(&c, &SessChan::new("k"), &PublicChan::new("c")).unwrap();
//! assert_eq!(merged.count_starts(), 1);
//!
//! let gamma = [("a".into(), corpus::g_a()), ("b".into(), corpus::g_b())].into_iter().collect();
//! assert!(typecheck(&gamma, &c, &Delta::new(), &corpus::sorts()).ok);
//! ```

pub mod ast;
pub mod corpus;
pub mod gen;
pub mod parser;
pub mod semantics;
pub mod transform;
pub mod typealg;
pub mod typing;
pub mod verify;

pub use ast::*;
pub use parser::{
    parse_choreography, parse_expr, parse_protocols, pretty_chor, pretty_type, ParseError,
    Protocols,
};
pub use semantics::{run, step, BuiltinEnv, Event, Trace};
pub use transform::{merge, simplify, synthesize_start, MergeResult, TransformError};
pub use typealg::{
    enumerate_paths, extract_type, mesh_member, paths_automaton, MeshBounds, MeshReport,
};
pub use typing::{typecheck, Delta, Gamma, SessionState, SortEnv, TypeReport};
pub use verify::{completeness_check, soundness_check, Mutation, Verdict};
