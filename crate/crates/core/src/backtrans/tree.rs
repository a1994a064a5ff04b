//! Trace trees: the branching structure of a determinate set of context-side
//! traces, and their back-translation into a source context.

use std::fmt;

use serde_json::json;
use thiserror::Error;

use crate::source::{Iface, SrcContext, SrcExpr, Ty};
use crate::trace::Value;

use super::informative::CtxTok;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TraceTree {
    Eps,
    Term,
    Div,
    FailLeaf,
    CallNode { fname: String, arg: Value, children: Vec<(Value, TraceTree)> },
}

impl TraceTree {
    pub fn depth(&self) -> usize {
        match self {
            TraceTree::CallNode { children, .. } => 1 + children.iter().map(|(_, t)| t.depth()).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            TraceTree::Eps => json!("eps"),
            TraceTree::Term => json!("term"),
            TraceTree::Div => json!("div"),
            TraceTree::FailLeaf => json!("fail"),
            TraceTree::CallNode { fname, arg, children } => json!({
                "call": fname,
                "arg": arg.to_string(),
                "children": children.iter().map(|(v, t)| json!([v.to_string(), t.to_json()])).collect::<Vec<_>>(),
            }),
        }
    }
}

impl fmt::Display for TraceTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceTree::Eps => write!(f, "ε"),
            TraceTree::Term => write!(f, "✓"),
            TraceTree::Div => write!(f, "↻"),
            TraceTree::FailLeaf => write!(f, "⚡"),
            TraceTree::CallNode { fname, arg, children } => {
                write!(f, "(cl({fname},{arg})")?;
                for (v, t) in children {
                    write!(f, ", ({v}, {t})")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("traces are not produced by one determinate context: {0} vs {1}")]
    NondeterministicSet(String, String),
}

fn word(w: &[CtxTok]) -> String {
    w.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(";")
}

/// Builds the tree that represents `words`, trying the rules in a fixed order.
pub fn build_tree(words: &[Vec<CtxTok>], iface: &Iface) -> Result<TraceTree, TreeError> {
    let nonempty: Vec<&Vec<CtxTok>> = words.iter().filter(|w| !w.is_empty()).collect();
    let Some(first) = nonempty.first() else {
        return Ok(TraceTree::Eps);
    };
    for (leaf, tree) in [(CtxTok::Term, TraceTree::Term), (CtxTok::Div, TraceTree::Div), (CtxTok::Fail, TraceTree::FailLeaf)] {
        if nonempty.iter().all(|w| w.as_slice() == [leaf.clone()]) {
            return Ok(tree);
        }
    }
    let clash = |other: &Vec<CtxTok>| TreeError::NondeterministicSet(word(first), word(other));
    let CtxTok::Call(fname, arg) = &first[0] else {
        let other = nonempty.iter().find(|w| w[0] != first[0]).unwrap_or(first);
        return Err(clash(other));
    };
    if let Some(other) = nonempty.iter().find(|w| w[0] != first[0]) {
        return Err(clash(other));
    }
    let well_typed = iface.get(fname).is_some_and(|e| e.arg.has(*arg));
    if !well_typed {
        return Ok(TraceTree::FailLeaf);
    }
    let mut groups: Vec<(Value, Vec<Vec<CtxTok>>)> = Vec::new();
    for w in &nonempty {
        match w.get(1) {
            None => {}
            Some(CtxTok::Div | CtxTok::Fail) if w.len() == 2 => {}
            Some(CtxTok::Ret(v)) => {
                let rest = w[2..].to_vec();
                match groups.iter_mut().find(|(u, _)| u == v) {
                    Some((_, g)) => g.push(rest),
                    None => groups.push((*v, vec![rest])),
                }
            }
            Some(_) => return Err(clash(w)),
        }
    }
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    let children = groups
        .into_iter()
        .map(|(v, g)| build_tree(&g, iface).map(|t| (v, t)))
        .collect::<Result<_, _>>()?;
    Ok(TraceTree::CallNode { fname: fname.clone(), arg: *arg, children })
}

/// `x = v` for a value of the given type, with equality on naturals encoded
/// as two comparisons.
fn equals(x: &str, v: Value) -> SrcExpr {
    let var = SrcExpr::var(x);
    match v {
        Value::Nat(n) => SrcExpr::ite(
            SrcExpr::geq(var.clone(), SrcExpr::Nat(n)),
            SrcExpr::geq(SrcExpr::Nat(n), var),
            SrcExpr::False,
        ),
        Value::Bool(true) => var,
        Value::Bool(false) => SrcExpr::ite(var, SrcExpr::False, SrcExpr::True),
    }
}

fn up(t: &TraceTree, iface: &Iface) -> SrcExpr {
    match t {
        TraceTree::Eps | TraceTree::FailLeaf | TraceTree::Div => SrcExpr::Fail,
        TraceTree::Term => SrcExpr::Nat(0),
        TraceTree::CallNode { fname, arg, children } => {
            let Some(entry) = iface.get(fname).filter(|e| e.arg.has(*arg)) else {
                return SrcExpr::Fail;
            };
            let ret: Ty = entry.ret;
            let mut chain = SrcExpr::Fail;
            for (v, sub) in children.iter().rev() {
                chain = SrcExpr::ite(equals("x", *v), up(sub, iface), chain);
            }
            SrcExpr::let_in("x", ret, SrcExpr::call(fname, SrcExpr::value(*arg)), chain)
        }
    }
}

/// The source context that follows the tree, failing off every recorded path.
pub fn tree_backtranslate(t: &TraceTree, iface: &Iface) -> SrcContext {
    SrcContext::new(up(t, iface))
}

/// Every maximal path through the tree, as context words.
pub fn tree_paths(t: &TraceTree) -> Vec<Vec<CtxTok>> {
    match t {
        TraceTree::Eps => vec![vec![]],
        TraceTree::Term => vec![vec![CtxTok::Term]],
        TraceTree::Div => vec![vec![CtxTok::Div]],
        TraceTree::FailLeaf => vec![vec![CtxTok::Fail]],
        TraceTree::CallNode { fname, arg, children } => {
            let call = CtxTok::Call(fname.clone(), *arg);
            if children.is_empty() {
                return vec![vec![call]];
            }
            children
                .iter()
                .flat_map(|(v, sub)| {
                    tree_paths(sub).into_iter().map(|p| {
                        let mut w = vec![call.clone(), CtxTok::Ret(*v)];
                        w.extend(p);
                        w
                    })
                })
                .collect()
        }
    }
}
