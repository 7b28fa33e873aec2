//! Minimal s-expression reader/writer for form manifests.

use std::fmt;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    /// Atom holding the shortest decimal that parses back to `v`.
    pub(crate) fn number(v: f64) -> Sexp {
        Sexp::Atom(format!("{v:?}"))
    }

    pub(crate) fn as_list(&self) -> Result<&[Sexp]> {
        match self {
            Sexp::List(items) => Ok(items),
            Sexp::Atom(a) => Err(Error::parse(format!("expected a list, found `{a}`"))),
        }
    }

    pub(crate) fn as_number(&self) -> Result<f64> {
        match self {
            Sexp::Atom(a) => a.parse().map_err(|_| Error::parse(format!("expected a number, found `{a}`"))),
            Sexp::List(_) => Err(Error::parse(format!("expected a number, found `{self}`"))),
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

pub(crate) fn parse(text: &str) -> Result<Sexp> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let sexp = parse_at(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(Error::parse(format!("trailing input after `{sexp}`")));
    }
    Ok(sexp)
}

fn tokenize(text: &str) -> Vec<String> {
    text.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_owned).collect()
}

fn parse_at(tokens: &[String], pos: &mut usize) -> Result<Sexp> {
    let tok = tokens.get(*pos).ok_or_else(|| Error::parse("unexpected end of input"))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(parse_at(tokens, pos)?),
                    None => return Err(Error::parse("unbalanced parentheses")),
                }
            }
        }
        ")" => Err(Error::parse("unexpected `)`")),
        atom => Ok(Sexp::Atom(atom.to_owned())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_lists() {
        let s = parse("(a (b 1.5) c)").unwrap();
        assert_eq!(s.to_string(), "(a (b 1.5) c)");
        assert!(parse("(a").is_err());
        assert!(parse("a)").is_err());
        assert!(parse("").is_err());
    }
}
