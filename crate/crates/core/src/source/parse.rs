use crate::sexp::{is_identifier, parse_sexp, ParseError, Sexp};

use super::{BinOp, Iface, IfaceEntry, SrcContext, SrcExpr, SrcFun, SrcProgram, Ty};

const RESERVED: &[&str] = &[
    "let", "if", "call", "read", "write", "fail", "true", "false", "check", "ret", "program", "iface", "fun", "nat",
    "bool", "->",
];

pub(crate) fn ident(s: &Sexp, what: &str) -> Result<String, ParseError> {
    match s.atom() {
        Some(a) if is_identifier(a) && !RESERVED.contains(&a) => Ok(a.to_string()),
        _ => Err(ParseError::at(s, what)),
    }
}

pub(crate) fn ty(s: &Sexp) -> Result<Ty, ParseError> {
    match s.atom() {
        Some("nat") => Ok(Ty::Nat),
        Some("bool") => Ok(Ty::Bool),
        _ => Err(ParseError::at(s, "a type (`nat` or `bool`)")),
    }
}

fn arity(s: &Sexp, items: &[Sexp], n: usize, form: &str) -> Result<(), ParseError> {
    if items.len() == n + 1 {
        Ok(())
    } else {
        Err(ParseError::at(s, format!("`{form}` with {n} argument(s)")))
    }
}

pub fn parse_src_expr(s: &Sexp) -> Result<SrcExpr, ParseError> {
    if let Some(a) = s.atom() {
        return match a {
            "true" => Ok(SrcExpr::True),
            "false" => Ok(SrcExpr::False),
            "fail" => Ok(SrcExpr::Fail),
            _ if a.chars().all(|c| c.is_ascii_digit()) => {
                a.parse().map(SrcExpr::Nat).map_err(|_| ParseError::at(s, "a numeral that fits in 64 bits"))
            }
            _ => ident(s, "an expression").map(SrcExpr::Var),
        };
    }
    let items = s.list().unwrap_or(&[]);
    let head = s.head().ok_or_else(|| ParseError::at(s, "an expression form"))?;
    let e = |i: usize| parse_src_expr(&items[i]);
    match head {
        "let" => {
            arity(s, items, 4, "let")?;
            Ok(SrcExpr::Let(ident(&items[1], "a variable name")?, ty(&items[2])?, Box::new(e(3)?), Box::new(e(4)?)))
        }
        "if" => {
            arity(s, items, 3, "if")?;
            Ok(SrcExpr::ite(e(1)?, e(2)?, e(3)?))
        }
        "+" | "-" => {
            arity(s, items, 2, head)?;
            let op = if head == "+" { BinOp::Add } else { BinOp::Sub };
            Ok(SrcExpr::op(op, e(1)?, e(2)?))
        }
        ">=" => {
            arity(s, items, 2, ">=")?;
            Ok(SrcExpr::geq(e(1)?, e(2)?))
        }
        "call" => {
            arity(s, items, 2, "call")?;
            Ok(SrcExpr::Call(ident(&items[1], "a function name")?, Box::new(e(2)?)))
        }
        "read" => {
            arity(s, items, 0, "read")?;
            Ok(SrcExpr::Read)
        }
        "write" => {
            arity(s, items, 1, "write")?;
            Ok(SrcExpr::write(e(1)?))
        }
        "check" => Err(ParseError::at(s, "a source expression (`check` exists only in the target language)")),
        _ => Err(ParseError::at(s, "one of let, if, +, -, >=, call, read, write")),
    }
}

fn parse_iface(s: &Sexp) -> Result<Iface, ParseError> {
    if s.head() != Some("iface") {
        return Err(ParseError::at(s, "`(iface …)`"));
    }
    let mut entries = Vec::new();
    for item in &s.list().unwrap_or(&[])[1..] {
        let parts = item.list().ok_or_else(|| ParseError::at(item, "`(f (-> τ τ))`"))?;
        if parts.len() != 2 {
            return Err(ParseError::at(item, "`(f (-> τ τ))`"));
        }
        let arrow = parts[1].list().ok_or_else(|| ParseError::at(&parts[1], "`(-> τ τ)`"))?;
        if arrow.len() != 3 || arrow[0].atom() != Some("->") {
            return Err(ParseError::at(&parts[1], "`(-> τ τ)`"));
        }
        entries.push(IfaceEntry { name: ident(&parts[0], "a function name")?, arg: ty(&arrow[1])?, ret: ty(&arrow[2])? });
    }
    Ok(Iface::new(entries))
}

fn parse_fun(s: &Sexp) -> Result<SrcFun, ParseError> {
    let items = s.list().unwrap_or(&[]);
    if s.head() != Some("fun") || items.len() != 5 {
        return Err(ParseError::at(s, "`(fun f (x τ) τ body)`"));
    }
    let param = items[2].list().ok_or_else(|| ParseError::at(&items[2], "`(x τ)`"))?;
    if param.len() != 2 {
        return Err(ParseError::at(&items[2], "`(x τ)`"));
    }
    Ok(SrcFun {
        name: ident(&items[1], "a function name")?,
        param: ident(&param[0], "a parameter name")?,
        arg: ty(&param[1])?,
        ret: ty(&items[3])?,
        body: parse_src_expr(&items[4])?,
    })
}

pub(crate) fn program_from_sexp(s: &Sexp) -> Result<SrcProgram, ParseError> {
    let items = s.list().unwrap_or(&[]);
    if s.head() != Some("program") || items.len() < 2 {
        return Err(ParseError::at(s, "`(program (iface …) (fun …)*)`"));
    }
    let iface = parse_iface(&items[1])?;
    let funs = items[2..].iter().map(parse_fun).collect::<Result<_, _>>()?;
    Ok(SrcProgram { iface, funs })
}

pub fn parse_src_program(text: &str) -> Result<SrcProgram, ParseError> {
    program_from_sexp(&parse_sexp(text)?)
}

pub fn parse_src_context(text: &str) -> Result<SrcContext, ParseError> {
    Ok(SrcContext::new(parse_src_expr(&parse_sexp(text)?)?))
}

/// Reads a typed interface, either bare `(iface …)` or taken from a whole program.
pub fn parse_src_iface(text: &str) -> Result<Iface, ParseError> {
    let s = parse_sexp(text)?;
    match s.head() {
        Some("program") => Ok(program_from_sexp(&s)?.iface),
        _ => parse_iface(&s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_program_and_context() {
        let p = parse_src_program("(program (iface (f (-> nat nat))) (fun f (x nat) nat (+ x 1)))").unwrap();
        assert_eq!(p.funs[0].body, SrcExpr::op(BinOp::Add, SrcExpr::var("x"), SrcExpr::Nat(1)));
        assert_eq!(p.to_string(), "(program (iface (f (-> nat nat))) (fun f (x nat) nat (+ x 1)))");
        let c = parse_src_context("(call f 3)").unwrap();
        assert_eq!(c.body, SrcExpr::call("f", SrcExpr::Nat(3)));
    }

    #[test]
    fn check_is_rejected_in_source() {
        let e = parse_src_context("(check 5 nat)").unwrap_err();
        assert!(e.expected.contains("target"));
    }

    #[test]
    fn reports_locations() {
        let e = parse_src_context("(let x nat 1\n  (if x))").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
    }

    #[test]
    fn iface_from_program_or_bare() {
        let a = parse_src_iface("(iface (f (-> nat bool)))").unwrap();
        let b = parse_src_iface("(program (iface (f (-> nat bool))) (fun f (x nat) bool true))").unwrap();
        assert_eq!(a, b);
    }
}
