use crate::ast::{Choreography, Eta, GlobalType};
use std::fmt::{self, Write};

/// Renders a choreography in the concrete syntax, two spaces per level.
pub fn pretty_chor(c: &Choreography) -> String {
    let mut out = String::new();
    write_chor(&mut out, c, 0).expect("writing to a String cannot fail");
    out
}

pub fn pretty_type(g: &GlobalType) -> String {
    g.to_string()
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eta::Start {
                participants,
                chan,
                sess,
            } => {
                f.write_str("start ")?;
                for (i, p) in participants.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, " on {chan} as {sess}")
            }
            Eta::Com {
                from,
                expr,
                to,
                var,
                sess,
            } => write!(f, "com {from}.{expr} -> {to}.{var} over {sess}"),
            Eta::Sel {
                from,
                to,
                sess,
                label,
            } => write!(f, "sel {from} -> {to} : {label} over {sess}"),
        }
    }
}

impl fmt::Display for Choreography {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_chor(self))
    }
}

fn write_chor(out: &mut String, c: &Choreography, level: usize) -> fmt::Result {
    let pad = "  ".repeat(level);
    match c {
        Choreography::Inact => write!(out, "{pad}0"),
        Choreography::Call(x) => write!(out, "{pad}{x}"),
        Choreography::Seq(eta, cont) => {
            write!(out, "{pad}{eta}")?;
            if **cont != Choreography::Inact {
                out.push_str(";\n");
                write_chor(out, cont, level)?;
            }
            Ok(())
        }
        Choreography::Rec(x, body) => {
            writeln!(out, "{pad}rec {x} {{")?;
            write_chor(out, body, level + 1)?;
            write!(out, "\n{pad}}}")
        }
        Choreography::Res(k, body) => {
            writeln!(out, "{pad}(new {k})")?;
            write_chor(out, body, level)
        }
        Choreography::Cond {
            at,
            guard,
            then_branch,
            else_branch,
        } => {
            writeln!(out, "{pad}if {guard} @ {at} then")?;
            write_chor(out, then_branch, level + 1)?;
            writeln!(out, "\n{pad}else")?;
            write_chor(out, else_branch, level + 1)
        }
    }
}
