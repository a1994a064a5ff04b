use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::json;

use scwb_core::counterexamples::fuel::{self, FuelErasure, FuelIntroduction};
use scwb_core::counterexamples::introspect::{self, IntrospectChain};
use scwb_core::counterexamples::khs::{KhsChain, KhsProg};
use scwb_core::counterexamples::rtep::{self, RtepChain};
use scwb_core::counterexamples::tini::{self, TiniChain};
use scwb_core::criteria::{check_criterion, Bounds, Chain, CriterionId, LtLd, Targets};
use scwb_core::gen::Gen;
use scwb_core::source::{parse_src_program, SrcProgram};
use scwb_core::target::{parse_tgt_context, wf_context, TgtContext};

use crate::commands::parse_file;
use crate::{Failure, Outcome};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainName {
    /// Typed source to untyped target with dynamic checks.
    LtLd,
    /// Argument-type erasure chain.
    Rtep,
    /// Contexts that read the program's private input.
    Tini,
    /// Contexts that inspect program code.
    Introspect,
    /// Contexts that read the program's input, over K functions.
    Khs,
    /// Target drops the fuel bound of the source.
    FuelErasure,
    /// Target adds a fuel bound.
    FuelIntroduction,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub chain: ChainName,
    /// Criterion id such as `pf-rsp`, `pf-rhsp:2` or `pf-rfrxp:3`.
    #[arg(long)]
    pub criterion: String,
    /// Source program files (lt-ld only); generated from the seed when absent.
    #[arg(long, num_args = 1..)]
    pub programs: Vec<PathBuf>,
    /// Indices into the chain's built-in program pool (all chains but lt-ld).
    #[arg(long, value_delimiter = ',')]
    pub pool_index: Vec<usize>,
    /// Target context files to check against (lt-ld only).
    #[arg(long, num_args = 1..)]
    pub target_ctx: Vec<PathBuf>,
    /// Generate this many well-formed target contexts from the seed (lt-ld only).
    #[arg(long)]
    pub random_targets: Option<usize>,
    /// Number of functions for the khs chain.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub ctx_size: usize,
    #[arg(long, default_value_t = 2)]
    pub input_len: usize,
    #[arg(long, default_value_t = 2000)]
    pub budget: u64,
    /// Input values tried at every read.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub domain: Vec<u64>,
}

fn arity_or(id: CriterionId, pool: usize) -> usize {
    id.arity().unwrap_or(pool)
}

fn pick<P: Clone>(pool: &[P], idx: &[usize], id: CriterionId) -> Result<Vec<P>, Failure> {
    if idx.is_empty() {
        let n = arity_or(id, pool.len());
        if n > pool.len() {
            return Err(Failure::usage(format!("{id} needs {n} programs but the pool has {}", pool.len())));
        }
        return Ok(pool[..n].to_vec());
    }
    idx.iter()
        .map(|&i| pool.get(i).cloned().ok_or_else(|| Failure::usage(format!("pool index {i} out of range 0..{}", pool.len()))))
        .collect()
}

fn run<C: Chain>(
    chain: &C,
    id: CriterionId,
    programs: &[C::SrcProg],
    targets: Targets<C::TgtCtx>,
    bounds: &Bounds,
) -> Result<Outcome, Failure> {
    let verdict = check_criterion(chain, id, programs, targets, bounds).map_err(|e| Failure::usage(e.to_string()))?;
    let report = json!({
        "chain": chain.name(),
        "criterion": id.to_string(),
        "programs": programs.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "bounds": {
            "ctx_size": bounds.ctx_size,
            "input_len": bounds.input_len,
            "budget": bounds.budget,
            "domain": bounds.domain,
        },
        "result": verdict.to_json(),
    });
    Ok(Outcome { stdout: format!("{report}\n"), code: verdict.exit_code() as u8 })
}

fn lt_ld_inputs(args: &CheckArgs, id: CriterionId, seed: u64) -> Result<(Vec<SrcProgram>, Targets<TgtContext>), Failure> {
    let mut gen = Gen::new(seed);
    let programs = if args.programs.is_empty() {
        let iface = gen.iface();
        let n = arity_or(id, 3);
        (0..n).map(|_| gen.program(&iface)).collect()
    } else {
        args.programs.iter().map(|p| parse_file(p, parse_src_program)).collect::<Result<Vec<_>, _>>()?
    };
    let mut given: Vec<TgtContext> =
        args.target_ctx.iter().map(|p| parse_file(p, parse_tgt_context)).collect::<Result<_, _>>()?;
    if let (Some(n), Some(first)) = (args.random_targets, programs.first()) {
        let names = first.iface.names();
        let mut made = 0;
        for _ in 0..n.saturating_mul(100) {
            if made == n {
                break;
            }
            let c = gen.tgt_context(&first.iface);
            if wf_context(&c, &names).is_ok() {
                given.push(c);
                made += 1;
            }
        }
    }
    let targets = if given.is_empty() && args.random_targets.is_none() { Targets::Enumerate } else { Targets::Given(given) };
    Ok((programs, targets))
}

pub fn check(args: &CheckArgs, seed: u64) -> Result<Outcome, Failure> {
    let id: CriterionId = args.criterion.parse().map_err(|e: scwb_core::criteria::CriterionError| Failure::usage(e.to_string()))?;
    let bounds = Bounds { ctx_size: args.ctx_size, input_len: args.input_len, budget: args.budget, domain: args.domain.clone() };
    let lt_ld_only = !args.programs.is_empty() || !args.target_ctx.is_empty() || args.random_targets.is_some();
    if args.chain != ChainName::LtLd && lt_ld_only {
        return Err(Failure::usage("--programs, --target-ctx and --random-targets apply to the lt-ld chain only"));
    }
    if args.chain == ChainName::LtLd && !args.pool_index.is_empty() {
        return Err(Failure::usage("--pool-index does not apply to the lt-ld chain"));
    }
    let idx = &args.pool_index;
    match args.chain {
        ChainName::LtLd => {
            let (programs, targets) = lt_ld_inputs(args, id, seed)?;
            run(&LtLd, id, &programs, targets, &bounds)
        }
        ChainName::Rtep => run(&RtepChain, id, &pick(&rtep::program_pool(), idx, id)?, Targets::Enumerate, &bounds),
        ChainName::Tini => run(&TiniChain, id, &pick(&[tini::Prog], idx, id)?, Targets::Enumerate, &bounds),
        ChainName::Introspect => {
            run(&IntrospectChain, id, &pick(&introspect::programs(), idx, id)?, Targets::Enumerate, &bounds)
        }
        ChainName::Khs => {
            if args.k == 0 {
                return Err(Failure::usage("--k must be at least 1"));
            }
            run(&KhsChain, id, &pick(&[KhsProg { k: args.k }], idx, id)?, Targets::Enumerate, &bounds)
        }
        ChainName::FuelErasure => run(&FuelErasure, id, &pick(&fuel::demo_programs(), idx, id)?, Targets::Enumerate, &bounds),
        ChainName::FuelIntroduction => {
            run(&FuelIntroduction, id, &pick(&fuel::demo_programs(), idx, id)?, Targets::Enumerate, &bounds)
        }
    }
}
