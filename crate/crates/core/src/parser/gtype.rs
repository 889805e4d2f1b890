use super::lexer::Tok;
use super::{Cursor, ParseError, TYPE_KEYWORDS};
use crate::ast::{GlobalType, Label, RoleName, Sort, TypeVar};
use std::collections::BTreeMap;

/// Named protocols of a `.gt` document.
pub type Protocols = BTreeMap<String, GlobalType>;

/// Parses a `.gt` document: one or more `protocol Name { G }` blocks.
pub fn parse_protocols(text: &str) -> Result<Protocols, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut out = Protocols::new();
    loop {
        let pos = cur.pos();
        cur.expect_kw("protocol")?;
        let name = cur.name("protocol name", TYPE_KEYWORDS)?;
        cur.expect_punct("{")?;
        let g = global(&mut cur)?;
        cur.expect_punct("}")?;
        if let Err(e) = g.check_well_formed() {
            return Err(ParseError::at(pos, format!("protocol {name}: {e}")));
        }
        if out.insert(name.clone(), g).is_some() {
            return Err(ParseError::at(pos, format!("duplicate protocol {name}")));
        }
        if *cur.peek() == Tok::Eof {
            return Ok(out);
        }
    }
}

/// Alias of [`parse_protocols`].
pub fn parse_global_type(text: &str) -> Result<Protocols, ParseError> {
    parse_protocols(text)
}

fn global(cur: &mut Cursor) -> Result<GlobalType, ParseError> {
    if cur.is_kw("end") {
        cur.bump();
        return Ok(GlobalType::End);
    }
    if cur.is_kw("rec") {
        cur.bump();
        let t = cur.name("type variable", TYPE_KEYWORDS)?;
        cur.expect_punct(".")?;
        let body = global(cur)?;
        return Ok(GlobalType::Rec(TypeVar::new(t), Box::new(body)));
    }
    let first = cur.name("`end`, `rec`, role or type variable", TYPE_KEYWORDS)?;
    if !cur.eat_punct("->") {
        return Ok(GlobalType::Var(TypeVar::new(first)));
    }
    let to = cur.name("role", TYPE_KEYWORDS)?;
    let from = RoleName::new(first);
    let to = RoleName::new(to);
    if cur.eat_punct(":") {
        cur.expect_punct("<")?;
        let sort = match cur.peek() {
            Tok::Ident(s) => Sort::from_name(s),
            _ => None,
        }
        .ok_or_else(|| cur.error(&["`bool`", "`int`", "`string`", "`file`"]))?;
        cur.bump();
        cur.expect_punct(">")?;
        let cont = if cur.eat_punct(";") {
            global(cur)?
        } else {
            GlobalType::End
        };
        return Ok(GlobalType::Com {
            from,
            to,
            sort,
            cont: Box::new(cont),
        });
    }
    if !cur.eat_punct("{") {
        return Err(cur.error(&["`:`", "`{`"]));
    }
    let mut branches = BTreeMap::new();
    loop {
        let pos = cur.pos();
        let label = cur.name("label", TYPE_KEYWORDS)?;
        cur.expect_punct(":")?;
        let g = global(cur)?;
        if branches.insert(Label::new(&label), g).is_some() {
            return Err(ParseError::at(
                pos,
                format!("duplicate branch label {label}"),
            ));
        }
        if cur.eat_punct("}") {
            break;
        }
        if !cur.eat_punct(",") {
            return Err(cur.error(&["`,`", "`}`"]));
        }
    }
    Ok(GlobalType::Choice { from, to, branches })
}
