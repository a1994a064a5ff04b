//! Seeded random generation of well-typed source programs, source contexts
//! and (possibly ill-typed) target contexts.
//!
//! Generated programs read at most once per function and call only
//! functions that never read, so a context with at most three call sites
//! consumes at most three inputs. A function may also call itself on its own
//! argument, which diverges silently.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::source::{BinOp, Iface, IfaceEntry, SrcContext, SrcExpr, SrcFun, SrcProgram, Ty};
use crate::target::{TgtContext, TgtExpr};

pub const MAX_CALL_SITES: usize = 3;

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_funs: usize,
    pub depth: usize,
    pub max_const: u64,
    /// Probability that a function body starts with a guarded self call.
    pub self_loop: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_funs: 3, depth: 3, max_const: 4, self_loop: 0.15 }
    }
}

pub struct Gen {
    pub rng: ChaCha8Rng,
    pub cfg: GenConfig,
}

struct Scope<'a> {
    vars: Vec<(String, Ty)>,
    /// Functions that may be called from here, with their signatures.
    callable: Vec<&'a IfaceEntry>,
    may_read: bool,
    may_write: bool,
    may_fail: bool,
    call_sites: usize,
    next_var: usize,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), cfg: GenConfig::default() }
    }

    pub fn with_config(seed: u64, cfg: GenConfig) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), cfg }
    }

    fn ty(&mut self) -> Ty {
        if self.rng.gen_bool(0.6) {
            Ty::Nat
        } else {
            Ty::Bool
        }
    }

    pub fn iface(&mut self) -> Iface {
        let n = self.rng.gen_range(1..=self.cfg.max_funs.max(1));
        let names = ["f", "g", "h", "k", "m"];
        Iface::new((0..n).map(|i| IfaceEntry::new(names[i % names.len()], self.ty(), self.ty())).collect())
    }

    fn literal(&mut self, t: Ty) -> SrcExpr {
        match t {
            Ty::Nat => SrcExpr::Nat(self.rng.gen_range(0..=self.cfg.max_const)),
            Ty::Bool => {
                if self.rng.gen_bool(0.5) {
                    SrcExpr::True
                } else {
                    SrcExpr::False
                }
            }
        }
    }

    fn leaf(&mut self, t: Ty, s: &mut Scope<'_>) -> SrcExpr {
        let vars: Vec<String> = s.vars.iter().filter(|(_, u)| *u == t).map(|(x, _)| x.clone()).collect();
        if !vars.is_empty() && self.rng.gen_bool(0.5) {
            return SrcExpr::Var(vars.choose(&mut self.rng).expect("nonempty").clone());
        }
        if t == Ty::Nat && s.may_read && self.rng.gen_bool(0.2) {
            s.may_read = false;
            return SrcExpr::Read;
        }
        self.literal(t)
    }

    fn expr(&mut self, t: Ty, depth: usize, s: &mut Scope<'_>) -> SrcExpr {
        if depth == 0 {
            return self.leaf(t, s);
        }
        let d = depth - 1;
        let choice = self.rng.gen_range(0..10);
        match (choice, t) {
            (0 | 1, _) => self.leaf(t, s),
            (2, Ty::Nat) => {
                let op = if self.rng.gen_bool(0.5) { BinOp::Add } else { BinOp::Sub };
                SrcExpr::op(op, self.expr(Ty::Nat, d, s), self.expr(Ty::Nat, d, s))
            }
            (2, Ty::Bool) => SrcExpr::geq(self.expr(Ty::Nat, d, s), self.expr(Ty::Nat, d, s)),
            (3 | 4, _) => SrcExpr::ite(self.expr(Ty::Bool, d, s), self.expr(t, d, s), self.expr(t, d, s)),
            (5, _) => {
                let u = self.ty();
                let bound = self.expr(u, d, s);
                s.next_var += 1;
                let x = format!("v{}", s.next_var);
                s.vars.push((x.clone(), u));
                let body = self.expr(t, d, s);
                s.vars.pop();
                SrcExpr::let_in(&x, u, bound, body)
            }
            (6 | 7, _) => {
                let fits: Vec<&IfaceEntry> = s.callable.iter().copied().filter(|e| e.ret == t).collect();
                if fits.is_empty() || s.call_sites >= MAX_CALL_SITES {
                    return self.leaf(t, s);
                }
                let e = *fits.choose(&mut self.rng).expect("nonempty");
                s.call_sites += 1;
                let arg = self.expr(e.arg, d, s);
                SrcExpr::call(&e.name, arg)
            }
            (8, Ty::Nat) if s.may_write => SrcExpr::write(self.expr(Ty::Nat, d, s)),
            (9, _) if s.may_fail && self.rng.gen_bool(0.3) => SrcExpr::Fail,
            _ => self.leaf(t, s),
        }
    }

    /// A well-typed program defining every function of `iface`.
    pub fn program(&mut self, iface: &Iface) -> SrcProgram {
        let n = iface.entries.len();
        let reads: Vec<bool> = (0..n).map(|_| self.rng.gen_bool(0.5)).collect();
        let mut funs = Vec::new();
        for (i, e) in iface.entries.iter().enumerate() {
            // Later functions may only call earlier ones that never read.
            let callable: Vec<&IfaceEntry> = iface.entries[..i].iter().zip(&reads).filter(|(_, r)| !**r).map(|(e, _)| e).collect();
            let mut s = Scope {
                vars: vec![("x".into(), e.arg)],
                callable,
                may_read: reads[i],
                may_write: true,
                may_fail: false,
                call_sites: 0,
                next_var: 0,
            };
            let mut body = self.expr(e.ret, self.cfg.depth, &mut s);
            if self.rng.gen_bool(self.cfg.self_loop) {
                let guard = self.guard(e.arg);
                body = SrcExpr::ite(guard, SrcExpr::call(&e.name, SrcExpr::var("x")), body);
            }
            funs.push(SrcFun { name: e.name.clone(), param: "x".into(), arg: e.arg, ret: e.ret, body });
        }
        SrcProgram { iface: iface.clone(), funs }
    }

    /// A condition on the parameter `x` that holds for some arguments only.
    fn guard(&mut self, arg: Ty) -> SrcExpr {
        match arg {
            Ty::Nat => SrcExpr::geq(SrcExpr::var("x"), SrcExpr::Nat(self.rng.gen_range(1..=self.cfg.max_const))),
            Ty::Bool => {
                if self.rng.gen_bool(0.5) {
                    SrcExpr::var("x")
                } else {
                    SrcExpr::ite(SrcExpr::var("x"), SrcExpr::False, SrcExpr::True)
                }
            }
        }
    }

    pub fn program_pool(&mut self, iface: &Iface, n: usize) -> Vec<SrcProgram> {
        (0..n).map(|_| self.program(iface)).collect()
    }

    /// A well-typed source context with at most three call sites.
    pub fn src_context(&mut self, iface: &Iface) -> SrcContext {
        let mut s = Scope {
            vars: vec![],
            callable: iface.entries.iter().collect(),
            may_read: false,
            may_write: false,
            may_fail: true,
            call_sites: 0,
            next_var: 0,
        };
        let t = self.ty();
        let mut body = self.expr(t, self.cfg.depth, &mut s);
        if s.call_sites == 0 {
            if let Some(e) = iface.entries.choose(&mut self.rng) {
                let arg = self.literal(e.arg);
                body = SrcExpr::let_in("r", e.ret, SrcExpr::call(&e.name, arg), body);
            }
        }
        SrcContext::new(body)
    }

    fn tgt_leaf(&mut self, vars: &[String]) -> TgtExpr {
        if !vars.is_empty() && self.rng.gen_bool(0.4) {
            return TgtExpr::Var(vars.choose(&mut self.rng).expect("nonempty").clone());
        }
        match self.rng.gen_range(0..4) {
            0 => TgtExpr::True,
            1 => TgtExpr::False,
            _ => TgtExpr::Nat(self.rng.gen_range(0..=self.cfg.max_const)),
        }
    }

    fn tgt_expr(&mut self, depth: usize, vars: &mut Vec<String>, names: &[String], sites: &mut usize) -> TgtExpr {
        if depth == 0 {
            return self.tgt_leaf(vars);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..12) {
            0 | 1 => self.tgt_leaf(vars),
            2 => {
                let op = if self.rng.gen_bool(0.5) { BinOp::Add } else { BinOp::Sub };
                TgtExpr::op(op, self.tgt_expr(d, vars, names, sites), self.tgt_expr(d, vars, names, sites))
            }
            3 => TgtExpr::geq(self.tgt_expr(d, vars, names, sites), self.tgt_expr(d, vars, names, sites)),
            4 | 5 => TgtExpr::ite(
                self.tgt_expr(d, vars, names, sites),
                self.tgt_expr(d, vars, names, sites),
                self.tgt_expr(d, vars, names, sites),
            ),
            6 => {
                let bound = self.tgt_expr(d, vars, names, sites);
                let x = format!("y{}", vars.len() + 1);
                vars.push(x.clone());
                let body = self.tgt_expr(d, vars, names, sites);
                vars.pop();
                TgtExpr::let_in(&x, bound, body)
            }
            7..=9 if !names.is_empty() && *sites < MAX_CALL_SITES => {
                *sites += 1;
                let f = names.choose(&mut self.rng).expect("nonempty").clone();
                TgtExpr::call(&f, self.tgt_expr(d, vars, names, sites))
            }
            10 => {
                let t = if self.rng.gen_bool(0.5) { Ty::Nat } else { Ty::Bool };
                TgtExpr::check(self.tgt_expr(d, vars, names, sites), t)
            }
            11 if self.rng.gen_bool(0.2) => TgtExpr::Fail,
            _ => self.tgt_leaf(vars),
        }
    }

    /// A target context over the names of `iface`; it need not be well-typed.
    pub fn tgt_context(&mut self, iface: &Iface) -> TgtContext {
        let names = iface.names();
        let mut sites = 0;
        let mut body = self.tgt_expr(self.cfg.depth, &mut vec![], &names, &mut sites);
        if sites == 0 && !names.is_empty() {
            let f = names.choose(&mut self.rng).expect("nonempty").clone();
            let arg = self.tgt_leaf(&[]);
            body = TgtExpr::let_in("r", TgtExpr::call(&f, arg), body);
        }
        TgtContext::new(body)
    }

    pub fn u64_in(&mut self, lo: u64, hi: u64) -> u64 {
        self.rng.gen_range(lo..=hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{link, typecheck_program};

    #[test]
    fn generated_programs_link_with_generated_contexts() {
        let mut g = Gen::new(7);
        for _ in 0..200 {
            let iface = g.iface();
            let p = g.program(&iface);
            typecheck_program(&p).unwrap();
            let c = g.src_context(&iface);
            link(&p, &c).unwrap();
            let tc = g.tgt_context(&iface);
            crate::target::wf_context(&tc, &iface.names()).unwrap();
        }
    }

    #[test]
    fn generation_is_seeded() {
        let a = Gen::new(3).program(&Gen::new(3).iface());
        let b = Gen::new(3).program(&Gen::new(3).iface());
        assert_eq!(a, b);
    }
}
