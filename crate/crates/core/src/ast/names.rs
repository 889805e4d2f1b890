//! Nominal identifier kinds. Each kind is a distinct type so that, for
//! instance, a session channel can never be compared with a public channel.

use serde::{Deserialize, Serialize};
use std::fmt;

macro_rules! ident_kind {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            /// Panics on an empty name.
            pub fn new(name: impl Into<String>) -> Self {
                let name = name.into();
                assert!(!name.is_empty(), concat!(stringify!($name), " must be non-empty"));
                $name(name)
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }
    };
}

ident_kind!(
    /// A running process.
    ThreadId
);
ident_kind!(
    /// A protocol participant name.
    RoleName
);
ident_kind!(
    /// A public channel on which sessions are started.
    PublicChan
);
ident_kind!(
    /// A session channel identifying one running protocol instance.
    SessChan
);
ident_kind!(VarName);
ident_kind!(Label);
ident_kind!(
    /// Choreography recursion variable.
    ChorVar
);
ident_kind!(
    /// Global-type recursion variable.
    TypeVar
);

/// Produces a variant of `base` (by appending primes) that is not rejected by `taken`.
pub(crate) fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let mut candidate = format!("{base}'");
    while taken(&candidate) {
        candidate.push('\'');
    }
    candidate
}
