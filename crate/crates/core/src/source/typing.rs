use std::collections::HashMap;

use thiserror::Error;

use super::{Iface, SrcContext, SrcExpr, SrcProgram, Ty};

/// A typing failure, pointing at the offending subexpression.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("type error in `{expr}`: {msg}")]
pub struct TypeError {
    pub expr: String,
    pub expected: Option<Ty>,
    pub actual: Option<Ty>,
    pub msg: String,
}

impl TypeError {
    fn new(e: &SrcExpr, expected: Option<Ty>, actual: Option<Ty>, msg: impl Into<String>) -> Self {
        TypeError { expr: e.to_string(), expected, actual, msg: msg.into() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinkError {
    #[error("program is ill-typed: {0}")]
    IllTypedProgram(TypeError),
    #[error("context is ill-typed: {0}")]
    IllTypedContext(TypeError),
    #[error("program contains fail")]
    FailInProgram,
    #[error("context performs input or output")]
    IoInContext,
    #[error("context calls `{0}`, which is not in the interface")]
    UnknownFunction(String),
    #[error("program is malformed: {0}")]
    Malformed(String),
}

impl LinkError {
    /// Short machine-readable name of the failed premise.
    pub fn premise(&self) -> &'static str {
        match self {
            LinkError::IllTypedProgram(_) => "program_typing",
            LinkError::IllTypedContext(_) => "context_typing",
            LinkError::FailInProgram => "fail_in_program",
            LinkError::IoInContext => "io_in_context",
            LinkError::UnknownFunction(_) => "unknown_function",
            LinkError::Malformed(_) => "malformed_program",
        }
    }
}

/// Signatures a call may target: the program's own functions, or the interface for contexts.
struct Env<'a> {
    sigs: HashMap<&'a str, (Ty, Ty)>,
    vars: Vec<(String, Ty)>,
}

impl<'a> Env<'a> {
    fn lookup(&self, x: &str) -> Option<Ty> {
        self.vars.iter().rev().find(|(y, _)| y == x).map(|(_, t)| *t)
    }
}

/// `None` stands for the type of `fail`, which fits any expected type.
fn join(e: &SrcExpr, a: Option<Ty>, b: Option<Ty>) -> Result<Option<Ty>, TypeError> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(TypeError::new(e, Some(x), Some(y), "branches have different types")),
        (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
        (None, None) => Ok(None),
    }
}

fn expect(e: &SrcExpr, env: &mut Env<'_>, want: Ty) -> Result<(), TypeError> {
    match infer(e, env)? {
        Some(t) if t != want => Err(TypeError::new(e, Some(want), Some(t), format!("expected {want}, found {t}"))),
        _ => Ok(()),
    }
}

fn infer(e: &SrcExpr, env: &mut Env<'_>) -> Result<Option<Ty>, TypeError> {
    use SrcExpr::*;
    Ok(match e {
        Var(x) => match env.lookup(x) {
            Some(t) => Some(t),
            None => return Err(TypeError::new(e, None, None, format!("unbound variable `{x}`"))),
        },
        Nat(_) => Some(Ty::Nat),
        True | False => Some(Ty::Bool),
        Op(_, a, b) => {
            expect(a, env, Ty::Nat)?;
            expect(b, env, Ty::Nat)?;
            Some(Ty::Nat)
        }
        Geq(a, b) => {
            expect(a, env, Ty::Nat)?;
            expect(b, env, Ty::Nat)?;
            Some(Ty::Bool)
        }
        Let(x, t, a, b) => {
            expect(a, env, *t)?;
            env.vars.push((x.clone(), *t));
            let r = infer(b, env);
            env.vars.pop();
            r?
        }
        If(c, a, b) => {
            expect(c, env, Ty::Bool)?;
            let ta = infer(a, env)?;
            let tb = infer(b, env)?;
            join(e, ta, tb)?
        }
        Call(f, a) => {
            let Some(&(arg, ret)) = env.sigs.get(f.as_str()) else {
                return Err(TypeError::new(e, None, None, format!("call to unknown function `{f}`")));
            };
            expect(a, env, arg)?;
            Some(ret)
        }
        Read => Some(Ty::Nat),
        Write(a) => {
            expect(a, env, Ty::Nat)?;
            Some(Ty::Nat)
        }
        Fail => None,
        Ret(a) => infer(a, env)?,
    })
}

/// Checks a program: the interface is consistent, every defined function is
/// declared with the same signature, and every body has its declared type.
/// Bodies may only call functions the program itself defines.
pub fn typecheck_program(p: &SrcProgram) -> Result<(), TypeError> {
    let dummy = SrcExpr::Fail;
    for (i, entry) in p.iface.entries.iter().enumerate() {
        if p.iface.entries[..i].iter().any(|e| e.name == entry.name) {
            return Err(TypeError::new(&dummy, None, None, format!("interface declares `{}` twice", entry.name)));
        }
    }
    let mut sigs = HashMap::new();
    for (i, d) in p.funs.iter().enumerate() {
        if p.funs[..i].iter().any(|e| e.name == d.name) {
            return Err(TypeError::new(&d.body, None, None, format!("function `{}` defined twice", d.name)));
        }
        match p.iface.get(&d.name) {
            Some(entry) if entry.arg == d.arg && entry.ret == d.ret => {}
            Some(_) => {
                return Err(TypeError::new(&d.body, None, None, format!("`{}` does not match its interface", d.name)))
            }
            None => {
                return Err(TypeError::new(&d.body, None, None, format!("`{}` is not in the interface", d.name)))
            }
        }
        sigs.insert(d.name.as_str(), (d.arg, d.ret));
    }
    for d in &p.funs {
        let mut env = Env { sigs: sigs.clone(), vars: vec![(d.param.clone(), d.arg)] };
        expect(&d.body, &mut env, d.ret)?;
    }
    Ok(())
}

/// Checks a closed context against an interface, returning its type.
/// A context whose only outcome is `fail` is reported at `nat`.
pub fn typecheck_context(c: &SrcContext, iface: &Iface) -> Result<Ty, TypeError> {
    let sigs = iface.entries.iter().map(|e| (e.name.as_str(), (e.arg, e.ret))).collect();
    let mut env = Env { sigs, vars: Vec::new() };
    Ok(infer(&c.body, &mut env)?.unwrap_or(Ty::Nat))
}
