use super::lexer::Tok;
use super::{Cursor, ParseError, CHOR_KEYWORDS};
use crate::ast::{
    BinOp, ChorVar, Choreography, Endpoint, Eta, Expr, Label, PublicChan, RoleName, SessChan,
    ThreadId, VarName,
};

/// Parses a `.gc` document.
pub fn parse_choreography(text: &str) -> Result<Choreography, ParseError> {
    let mut cur = Cursor::new(text)?;
    let c = chor(&mut cur)?;
    cur.expect_eof()?;
    Ok(c)
}

/// Parses a standalone expression.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut cur = Cursor::new(text)?;
    let e = expr(&mut cur)?;
    cur.expect_eof()?;
    Ok(e)
}

const CHOR_START: &[&str] = &[
    "`0`",
    "`start`",
    "`com`",
    "`sel`",
    "`if`",
    "`rec`",
    "`(`",
    "recursion variable",
];

fn chor(cur: &mut Cursor) -> Result<Choreography, ParseError> {
    match cur.peek().clone() {
        Tok::Int(0) => {
            cur.bump();
            Ok(Choreography::Inact)
        }
        Tok::Punct("(") => {
            cur.bump();
            cur.expect_kw("new")?;
            let k = cur.name("session channel", CHOR_KEYWORDS)?;
            cur.expect_punct(")")?;
            let body = chor(cur)?;
            Ok(Choreography::Res(SessChan::new(k), Box::new(body)))
        }
        Tok::Ident(kw) => match kw.as_str() {
            "if" => {
                cur.bump();
                let guard = expr(cur)?;
                cur.expect_punct("@")?;
                let at = cur.name("thread", CHOR_KEYWORDS)?;
                cur.expect_kw("then")?;
                let then_branch = chor(cur)?;
                cur.expect_kw("else")?;
                let else_branch = chor(cur)?;
                Ok(Choreography::Cond {
                    at: ThreadId::new(at),
                    guard,
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                })
            }
            "rec" => {
                cur.bump();
                let x = cur.name("recursion variable", CHOR_KEYWORDS)?;
                cur.expect_punct("{")?;
                let body = chor(cur)?;
                cur.expect_punct("}")?;
                Ok(Choreography::Rec(ChorVar::new(x), Box::new(body)))
            }
            "start" | "com" | "sel" => {
                let eta = eta(cur)?;
                let cont = if cur.eat_punct(";") {
                    chor(cur)?
                } else {
                    Choreography::Inact
                };
                Ok(Choreography::seq(eta, cont))
            }
            _ if !CHOR_KEYWORDS.contains(&kw.as_str()) => {
                cur.bump();
                Ok(Choreography::Call(ChorVar::new(kw)))
            }
            _ => Err(cur.error(CHOR_START)),
        },
        _ => Err(cur.error(CHOR_START)),
    }
}

fn endpoint(cur: &mut Cursor) -> Result<Endpoint, ParseError> {
    let thread = cur.name("thread", CHOR_KEYWORDS)?;
    cur.expect_punct("[")?;
    let role = cur.name("role", CHOR_KEYWORDS)?;
    cur.expect_punct("]")?;
    Ok(Endpoint {
        thread: ThreadId::new(thread),
        role: RoleName::new(role),
    })
}

fn session(cur: &mut Cursor) -> Result<SessChan, ParseError> {
    cur.expect_kw("over")?;
    Ok(SessChan::new(cur.name("session channel", CHOR_KEYWORDS)?))
}

fn eta(cur: &mut Cursor) -> Result<Eta, ParseError> {
    let Tok::Ident(kw) = cur.bump() else {
        unreachable!("caller checked for a prefix keyword")
    };
    match kw.as_str() {
        "start" => {
            let mut participants = vec![endpoint(cur)?];
            while cur.eat_punct(",") {
                participants.push(endpoint(cur)?);
            }
            if participants.len() < 2 {
                return Err(cur.error(&["`,`"]));
            }
            cur.expect_kw("on")?;
            let chan = cur.name("public channel", CHOR_KEYWORDS)?;
            cur.expect_kw("as")?;
            let sess = cur.name("session channel", CHOR_KEYWORDS)?;
            Ok(Eta::Start {
                participants,
                chan: PublicChan::new(chan),
                sess: SessChan::new(sess),
            })
        }
        "com" => {
            let from = endpoint(cur)?;
            cur.expect_punct(".")?;
            let e = expr(cur)?;
            cur.expect_punct("->")?;
            let to = endpoint(cur)?;
            cur.expect_punct(".")?;
            let var = cur.name("variable", CHOR_KEYWORDS)?;
            let sess = session(cur)?;
            Ok(Eta::Com {
                from,
                expr: e,
                to,
                var: VarName::new(var),
                sess,
            })
        }
        _ => {
            let from = endpoint(cur)?;
            cur.expect_punct("->")?;
            let to = endpoint(cur)?;
            cur.expect_punct(":")?;
            let label = cur.name("label", CHOR_KEYWORDS)?;
            let sess = session(cur)?;
            Ok(Eta::Sel {
                from,
                to,
                sess,
                label: Label::new(label),
            })
        }
    }
}

const EXPR_START: &[&str] = &["literal", "variable", "function call", "`(`"];

fn expr(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let lhs = atom(cur)?;
    let op = match cur.peek() {
        Tok::Punct("==") => BinOp::Eq,
        Tok::Punct("+") => BinOp::Add,
        Tok::Punct("++") => BinOp::Concat,
        _ => return Ok(lhs),
    };
    cur.bump();
    let rhs = atom(cur)?;
    if matches!(cur.peek(), Tok::Punct("==" | "+" | "++")) {
        let mut err = cur.error(&[]);
        err.message = "nested operators need parentheses".into();
        return Err(err);
    }
    Ok(Expr::binop(op, lhs, rhs))
}

fn atom(cur: &mut Cursor) -> Result<Expr, ParseError> {
    match cur.peek().clone() {
        Tok::Int(n) => {
            cur.bump();
            Ok(Expr::Int(n))
        }
        Tok::Str(s) => {
            cur.bump();
            Ok(Expr::Str(s))
        }
        Tok::Punct("(") => {
            cur.bump();
            let e = expr(cur)?;
            cur.expect_punct(")")?;
            Ok(e)
        }
        Tok::Ident(s) if s == "true" || s == "false" => {
            cur.bump();
            Ok(Expr::Bool(s == "true"))
        }
        Tok::Ident(s) if s == "file" && matches!(cur.peek_at(1), Tok::Str(_)) => {
            cur.bump();
            let Tok::Str(tag) = cur.bump() else {
                unreachable!()
            };
            Ok(Expr::File(tag))
        }
        Tok::Ident(s) if !CHOR_KEYWORDS.contains(&s.as_str()) => {
            cur.bump();
            if cur.eat_punct("(") {
                let mut args = Vec::new();
                if !cur.eat_punct(")") {
                    args.push(expr(cur)?);
                    while cur.eat_punct(",") {
                        args.push(expr(cur)?);
                    }
                    cur.expect_punct(")")?;
                }
                Ok(Expr::Call(s, args))
            } else {
                Ok(Expr::Var(VarName::new(s)))
            }
        }
        _ => Err(cur.error(EXPR_START)),
    }
}
