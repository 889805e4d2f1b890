use super::names::VarName;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Bool,
    Int,
    String,
    File,
}

impl Sort {
    pub const ALL: [Sort; 4] = [Sort::Bool, Sort::Int, Sort::String, Sort::File];

    pub fn name(self) -> &'static str {
        match self {
            Sort::Bool => "bool",
            Sort::Int => "int",
            Sort::String => "string",
            Sort::File => "file",
        }
    }

    pub fn from_name(name: &str) -> Option<Sort> {
        Sort::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinOp {
    /// `==`, polymorphic equality.
    Eq,
    /// `+` on integers.
    Add,
    /// `++` on strings.
    Concat,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Eq => "==",
            BinOp::Add => "+",
            BinOp::Concat => "++",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    Str(String),
    /// Opaque file tag; there is no I/O behind it.
    File(String),
    Var(VarName),
    Call(String, Vec<Expr>),
    BinOp(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(VarName::new(name))
    }

    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        Expr::Call(name.to_string(), args)
    }

    pub fn binop(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::BinOp(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn mentions(&self, x: &VarName) -> bool {
        match self {
            Expr::Var(y) => y == x,
            Expr::Call(_, args) => args.iter().any(|a| a.mentions(x)),
            Expr::BinOp(_, l, r) => l.mentions(x) || r.mentions(x),
            _ => false,
        }
    }

    pub fn vars(&self, out: &mut Vec<VarName>) {
        match self {
            Expr::Var(y) => out.push(y.clone()),
            Expr::Call(_, args) => args.iter().for_each(|a| a.vars(out)),
            Expr::BinOp(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
            _ => {}
        }
    }

    /// Replaces every `Var(x)` by the literal of `v`.
    pub fn substitute(&self, x: &VarName, v: &Value) -> Expr {
        self.rename_or_replace(&|y| (y == x).then(|| v.to_expr()))
    }

    pub(crate) fn rename_or_replace(&self, f: &dyn Fn(&VarName) -> Option<Expr>) -> Expr {
        match self {
            Expr::Var(y) => f(y).unwrap_or_else(|| self.clone()),
            Expr::Call(name, args) => Expr::Call(
                name.clone(),
                args.iter().map(|a| a.rename_or_replace(f)).collect(),
            ),
            Expr::BinOp(op, l, r) => Expr::BinOp(
                *op,
                Box::new(l.rename_or_replace(f)),
                Box::new(r.rename_or_replace(f)),
            ),
            lit => lit.clone(),
        }
    }
}

/// Closed runtime values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Str(String),
    File(String),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Bool(_) => Sort::Bool,
            Value::Int(_) => Sort::Int,
            Value::Str(_) => Sort::String,
            Value::File(_) => Sort::File,
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Value::Bool(b) => Expr::Bool(*b),
            Value::Int(n) => Expr::Int(*n),
            Value::Str(s) => Expr::Str(s.clone()),
            Value::File(s) => Expr::File(s.clone()),
        }
    }
}

pub(crate) fn write_str_lit(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_expr(), f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Str(s) => write_str_lit(f, s),
            Expr::File(s) => {
                f.write_str("file ")?;
                write_str_lit(f, s)
            }
            Expr::Var(x) => write!(f, "{x}"),
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::BinOp(op, l, r) => {
                write_operand(f, l)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, r)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    if matches!(e, Expr::BinOp(..)) {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}
