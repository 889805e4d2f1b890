use crate::ast::{Sort, ThreadId, Value, VarName};
use serde::Serialize;
use serde_json::Value as Json;
use std::collections::BTreeMap;
use std::fmt;

/// Parameter and return sorts of a builtin function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub params: Vec<Sort>,
    pub ret: Sort,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.params {
            write!(f, "{p} ")?;
        }
        write!(f, "-> {}", self.ret)
    }
}

/// A builtin whose results are scripted: each call returns the next value,
/// wrapping around at the end of the list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Builtin {
    pub sig: Signature,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvError {
    #[error("malformed environment document: {0}")]
    Json(String),
    #[error("function {0}: {1}")]
    Function(String, String),
    #[error("binding {0}: {1}")]
    Binding(String, String),
}

/// Scripted builtins plus values for variables that no `com` binds.
///
/// Call cursors are plain data: stepping returns an updated copy.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuiltinEnv {
    pub functions: BTreeMap<String, Builtin>,
    pub bindings: BTreeMap<(ThreadId, VarName), Value>,
    cursors: BTreeMap<String, usize>,
}

impl BuiltinEnv {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a builtin. Panics if `values` is empty or mis-sorted.
    pub fn with_function(
        mut self,
        name: &str,
        params: Vec<Sort>,
        ret: Sort,
        values: Vec<Value>,
    ) -> Self {
        assert!(
            !values.is_empty(),
            "builtin {name} needs at least one value"
        );
        assert!(
            values.iter().all(|v| v.sort() == ret),
            "builtin {name} returns {ret}"
        );
        self.functions.insert(
            name.to_string(),
            Builtin {
                sig: Signature { params, ret },
                values,
            },
        );
        self
    }

    pub fn with_binding(mut self, thread: &str, var: &str, value: Value) -> Self {
        self.bindings
            .insert((ThreadId::new(thread), VarName::new(var)), value);
        self
    }

    /// Returns the next scripted value of `name` and advances its cursor.
    pub(crate) fn next_value(&mut self, name: &str) -> Option<Value> {
        let f = self.functions.get(name)?;
        let cursor = self.cursors.entry(name.to_string()).or_insert(0);
        let v = f.values[*cursor % f.values.len()].clone();
        *cursor += 1;
        Some(v)
    }

    /// Number of calls consumed so far per builtin.
    pub fn calls(&self) -> &BTreeMap<String, usize> {
        &self.cursors
    }

    /// Loads the JSON document format:
    ///
    /// ```json
    /// {"functions": {"check": {"sig": ["string", "->", "bool"], "values": [true]}},
    ///  "bindings": {"c.file": {"sort": "file", "value": "report.pdf"}}}
    /// ```
    pub fn from_json(text: &str) -> Result<Self, EnvError> {
        let doc: Json = serde_json::from_str(text).map_err(|e| EnvError::Json(e.to_string()))?;
        let Json::Object(doc) = doc else {
            return Err(EnvError::Json("top level must be an object".into()));
        };
        let mut env = BuiltinEnv::new();
        if let Some(fns) = doc.get("functions") {
            let fns = fns
                .as_object()
                .ok_or_else(|| EnvError::Json("`functions` must be an object".into()))?;
            for (name, spec) in fns {
                let err = |m: &str| EnvError::Function(name.clone(), m.to_string());
                let sig = parse_sig(spec.get("sig").ok_or_else(|| err("missing `sig`"))?)
                    .map_err(|m| err(&m))?;
                let raw = spec.get("values").ok_or_else(|| err("missing `values`"))?;
                let raw: Vec<&Json> = match raw {
                    Json::Array(vs) => vs.iter().collect(),
                    single => vec![single],
                };
                if raw.is_empty() {
                    return Err(err("`values` must be non-empty"));
                }
                let values = raw
                    .into_iter()
                    .map(|v| value_of(sig.ret, v))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|m| err(&m))?;
                env.functions.insert(name.clone(), Builtin { sig, values });
            }
        }
        if let Some(bs) = doc.get("bindings") {
            let bs = bs
                .as_object()
                .ok_or_else(|| EnvError::Json("`bindings` must be an object".into()))?;
            for (key, spec) in bs {
                let err = |m: &str| EnvError::Binding(key.clone(), m.to_string());
                let (thread, var) = key
                    .split_once('.')
                    .filter(|(t, v)| !t.is_empty() && !v.is_empty())
                    .ok_or_else(|| err("key must have the form thread.var"))?;
                let sort = spec
                    .get("sort")
                    .and_then(Json::as_str)
                    .and_then(Sort::from_name)
                    .ok_or_else(|| err("missing or unknown `sort`"))?;
                let value = value_of(
                    sort,
                    spec.get("value").ok_or_else(|| err("missing `value`"))?,
                )
                .map_err(|m| err(&m))?;
                env.bindings
                    .insert((ThreadId::new(thread), VarName::new(var)), value);
            }
        }
        Ok(env)
    }
}

fn parse_sig(j: &Json) -> Result<Signature, String> {
    let items = j.as_array().ok_or("`sig` must be an array")?;
    let words: Vec<&str> = items
        .iter()
        .map(|w| w.as_str().ok_or("`sig` entries must be strings"))
        .collect::<Result<_, _>>()?;
    let arrow = words
        .iter()
        .position(|w| *w == "->")
        .ok_or("`sig` must contain \"->\"")?;
    let sort = |w: &str| Sort::from_name(w).ok_or(format!("unknown sort {w}"));
    let params = words[..arrow]
        .iter()
        .map(|w| sort(w))
        .collect::<Result<_, _>>()?;
    match &words[arrow + 1..] {
        [ret] => Ok(Signature {
            params,
            ret: sort(ret)?,
        }),
        _ => Err("exactly one return sort must follow \"->\"".into()),
    }
}

fn value_of(sort: Sort, j: &Json) -> Result<Value, String> {
    match (sort, j) {
        (Sort::Bool, Json::Bool(b)) => Ok(Value::Bool(*b)),
        (Sort::Int, Json::Number(n)) => n
            .as_i64()
            .map(Value::Int)
            .ok_or(format!("{n} is not an integer")),
        (Sort::String, Json::String(s)) => Ok(Value::Str(s.clone())),
        (Sort::File, Json::String(s)) => Ok(Value::File(s.clone())),
        (s, other) => Err(format!("{other} is not a {s} value")),
    }
}
