//! Concrete syntax for choreographies (`.gc`) and protocol files (`.gt`).
//!
//! ```text
//! C   ::= "0" | eta ";" C | "if" Expr "@" Thread "then" C "else" C
//!       | "rec" X "{" C "}" | X | "(" "new" k ")" C
//! eta ::= "start" part ("," part)+ "on" a "as" k
//!       | "com" Thread "[" Role "]" "." Expr "->" Thread "[" Role "]" "." Var "over" k
//!       | "sel" Thread "[" Role "]" "->" Thread "[" Role "]" ":" Label "over" k
//! G   ::= "end" | p "->" q ":" "<" Sort ">" ";" G
//!       | p "->" q "{" l ":" G ("," l ":" G)* "}" | "rec" t "." G | t
//! ```
//!
//! A trailing `; 0` (or `; end`) may be omitted. `//` starts a line comment.

mod chor;
mod gtype;
mod lexer;
mod pretty;

use lexer::{Pos, Tok};
use std::fmt;

pub use chor::{parse_choreography, parse_expr};
pub use gtype::{parse_global_type, parse_protocols, Protocols};
pub use pretty::{pretty_chor, pretty_type};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
    /// Tokens that would have been accepted at this position.
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn at(pos: Pos, message: String) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            message,
            expected: Vec::new(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

const CHOR_KEYWORDS: &[&str] = &[
    "start", "com", "sel", "if", "then", "else", "rec", "new", "on", "as", "over", "true", "false",
];
const TYPE_KEYWORDS: &[&str] = &["protocol", "end", "rec"];

pub(crate) struct Cursor {
    toks: Vec<(Tok, Pos)>,
    idx: usize,
}

impl Cursor {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Cursor {
            toks: lexer::tokenize(text)?,
            idx: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.idx + n).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].0.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            line: self.pos().line,
            col: self.pos().col,
            message: format!("unexpected {}", self.peek().describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        let hit = self.is_punct(p);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_punct(&mut self, p: &'static str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{p}`")]))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    /// A non-keyword identifier.
    fn name(&mut self, what: &str, reserved: &[&str]) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !reserved.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{alpha_equal, Choreography, Endpoint, Eta, Expr, GlobalType, Sort};
    use crate::corpus;

    #[test]
    fn running_example() {
        let c = parse_choreography(corpus::CHOR1).unwrap();
        let Choreography::Rec(x, body) = &c else {
            panic!("expected rec, got {c}")
        };
        assert_eq!(x.as_str(), "X");
        let Choreography::Seq(
            Eta::Start {
                participants,
                chan,
                sess,
            },
            _,
        ) = &**body
        else {
            panic!()
        };
        assert_eq!(
            participants,
            &vec![Endpoint::new("c", "C"), Endpoint::new("u", "U")]
        );
        assert_eq!((chan.as_str(), sess.as_str()), ("a", "k"));
    }

    #[test]
    fn inaction_and_single_prefix() {
        assert_eq!(parse_choreography("0").unwrap(), Choreography::Inact);
        let c = parse_choreography("com u[U].password() -> c[C].pwd over k").unwrap();
        let Choreography::Seq(
            Eta::Com {
                from,
                expr,
                to,
                var,
                sess,
            },
            cont,
        ) = c
        else {
            panic!()
        };
        assert_eq!(from, Endpoint::new("u", "U"));
        assert_eq!(expr, Expr::call("password", vec![]));
        assert_eq!(
            (to, var.as_str(), sess.as_str()),
            (Endpoint::new("c", "C"), "pwd", "k")
        );
        assert_eq!(*cont, Choreography::Inact);
    }

    #[test]
    fn protocols() {
        let ps = parse_protocols("protocol Ga { U -> C : <string> }").unwrap();
        assert_eq!(
            ps["Ga"],
            GlobalType::com("U", "C", Sort::String, GlobalType::End)
        );
        let ps = parse_protocols(
            "protocol Gb { C -> F : <string>; F -> C { ok: C -> F : <file>, quit: end } }",
        )
        .unwrap();
        let gb = GlobalType::com(
            "C",
            "F",
            Sort::String,
            GlobalType::choice(
                "F",
                "C",
                vec![
                    ("ok", GlobalType::com("C", "F", Sort::File, GlobalType::End)),
                    ("quit", GlobalType::End),
                ],
            ),
        );
        assert_eq!(ps["Gb"], gb);
    }

    #[test]
    fn protocol_errors() {
        let e = parse_protocols("protocol P { rec t . t }").unwrap_err();
        assert!(e.message.contains("contractive"), "{e}");
        assert!(parse_protocols("protocol P { end } protocol P { end }")
            .unwrap_err()
            .message
            .contains("duplicate"));
        assert!(parse_protocols("protocol P { A -> B { l: end, l: end } }")
            .unwrap_err()
            .message
            .contains("duplicate"));
        assert!(parse_protocols("").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_choreography("com u[U].1 -> c[C].x over k;\n  sel u[U] c[C] : l over k")
            .unwrap_err();
        assert_eq!((e.line, e.col), (2, 12));
        assert_eq!(e.expected, vec!["`->`".to_string()]);
        assert!(parse_choreography("com a[P].(1 + 2 + 3) -> b[Q].x over k").is_err());
        assert!(parse_choreography("com a[P].((1 + 2) + 3) -> b[Q].x over k").is_ok());
        assert!(parse_choreography("start a[P] on c as k").is_err());
        assert!(parse_choreography("0 0").is_err());
    }

    #[test]
    fn comments_and_crlf() {
        let text = "// login\r\ncom a[P].\"x\\ny\" -> b[Q].v over k; // send\r\n0\r\n";
        let c = parse_choreography(text).unwrap();
        assert!(alpha_equal(
            &c,
            &parse_choreography("com a[P].\"x\\ny\" -> b[Q].v over k").unwrap()
        ));
    }

    #[test]
    fn restriction_and_literals() {
        let c = parse_choreography(
            "(new k) com a[P].file\"r.txt\" -> b[Q].v over k; com b[Q].(v == -3) -> a[P].w over k",
        )
        .unwrap();
        assert!(matches!(c, Choreography::Res(..)));
        let again = parse_choreography(&pretty_chor(&c)).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn pretty_printing() {
        assert_eq!(pretty_chor(&Choreography::Inact), "0");
        assert_eq!(pretty_type(&GlobalType::End), "end");
        let c = corpus::chor1();
        assert!(alpha_equal(
            &parse_choreography(&pretty_chor(&c)).unwrap(),
            &c
        ));
        let g = corpus::g_merged();
        let text = format!("protocol G {{ {} }}", pretty_type(&g));
        assert_eq!(parse_protocols(&text).unwrap()["G"], g);
    }
}
