//! The running example: a user logs in through a client that forwards the
//! credentials to a file server, as two binary protocols started on every
//! iteration, and its merged three-party form.

use crate::ast::{Choreography, GlobalType, Sort, Value};
use crate::parser::{parse_choreography, parse_protocols, Protocols};
use crate::semantics::BuiltinEnv;
use crate::typing::SortEnv;

pub const CHOR1: &str = "\
rec X {
  start c[C], u[U] on a as k;
  com u[U].password() -> c[C].pwd over k;
  start c[C], f[F] on b as k';
  com c[C].pwd -> f[F].y over k';
  if check(y) @ f then
    sel f[F] -> c[C] : ok over k';
    com c[C].file -> f[F].z over k'
  else
    sel f[F] -> c[C] : quit over k';
    X
}
";

/// The merged choreography, roles named after threads.
pub const CHOR2: &str = "\
start c[c], u[u], f[f] on c as k;
rec X {
  com u[u].password() -> c[c].pwd over k;
  com c[c].pwd -> f[f].y over k;
  if check(y) @ f then
    sel f[f] -> c[c] : ok over k;
    com c[c].file -> f[f].z over k
  else
    sel f[f] -> c[c] : quit over k;
    X
}
";

pub const PROTOCOLS_AB: &str = "\
protocol Ga { U -> C : <string> }
protocol Gb { C -> F : <string>; F -> C { ok: C -> F : <file>, quit: end } }
";

/// The three-party protocol followed by the merged choreography.
pub const PROTOCOL_G: &str = "\
protocol G { rec t . u -> c : <string>; c -> f : <string>; f -> c { ok: c -> f : <file>, quit: t } }
";

pub fn chor1() -> Choreography {
    parse_choreography(CHOR1).expect("built-in example parses")
}

pub fn chor2() -> Choreography {
    parse_choreography(CHOR2).expect("built-in example parses")
}

pub fn protocols_ab() -> Protocols {
    parse_protocols(PROTOCOLS_AB).expect("built-in protocols parse")
}

pub fn g_a() -> GlobalType {
    protocols_ab()["Ga"].clone()
}

pub fn g_b() -> GlobalType {
    protocols_ab()["Gb"].clone()
}

pub fn g_merged() -> GlobalType {
    parse_protocols(PROTOCOL_G).expect("built-in protocol parses")["G"].clone()
}

/// Builtins for the example; `check` answers with the given values in turn.
pub fn env(check: &[bool]) -> BuiltinEnv {
    BuiltinEnv::new()
        .with_function(
            "password",
            vec![],
            Sort::String,
            vec![Value::Str("pwd123".into())],
        )
        .with_function(
            "check",
            vec![Sort::String],
            Sort::Bool,
            check.iter().map(|b| Value::Bool(*b)).collect(),
        )
        .with_binding("c", "file", Value::File("report.txt".into()))
}

pub fn sorts() -> SortEnv {
    SortEnv::from_env(&env(&[true]))
}

/// The JSON form of [`env`] with `check` answering false then true.
pub const ENV_JSON: &str = r#"{
  "functions": {
    "password": { "sig": ["->", "string"], "values": ["pwd123"] },
    "check": { "sig": ["string", "->", "bool"], "values": [false, true] }
  },
  "bindings": {
    "c.file": { "sort": "file", "value": "report.txt" }
  }
}
"#;
