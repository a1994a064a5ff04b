use std::fmt;

use thiserror::Error;

use crate::trace::Behavior;

use super::Goal;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("compilation failed: {0}")]
    Compile(String),
    #[error("linking failed: {0}")]
    Link(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Source,
    Target,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Source => "source",
            Side::Target => "target",
        })
    }
}

/// Limits for every bounded search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Maximum size of enumerated contexts.
    pub ctx_size: usize,
    /// Maximum number of inputs per run.
    pub input_len: usize,
    /// Step budget per run.
    pub budget: u64,
    /// Input values tried at every read.
    pub domain: Vec<u64>,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { ctx_size: 3, input_len: 2, budget: 2000, domain: vec![0, 1, 2] }
    }
}

/// A finite list of contexts, flagged when it is every context of the language.
#[derive(Clone, Debug)]
pub struct Enumeration<C> {
    pub items: Vec<C>,
    pub complete: bool,
}

impl<C> Enumeration<C> {
    pub fn partial(items: Vec<C>) -> Self {
        Enumeration { items, complete: false }
    }

    pub fn complete(items: Vec<C>) -> Self {
        Enumeration { items, complete: true }
    }
}

/// What a chain's back-translation offers for one target context.
#[derive(Clone, Debug)]
pub enum Backtranslation<C> {
    /// Source contexts worth trying, best first. They are verified before use.
    Candidates(Vec<C>),
    /// A proof that no source context can meet the goal.
    Impossible(String),
    Unavailable,
}

/// A compilation chain between two languages with one trace model.
pub trait Chain {
    type SrcProg: Clone + fmt::Display;
    type TgtProg: Clone;
    type SrcCtx: Clone + fmt::Display;
    type TgtCtx: Clone + fmt::Display;

    fn name(&self) -> String;

    fn compile(&self, p: &Self::SrcProg) -> Result<Self::TgtProg, ChainError>;

    fn src_behavior(&self, p: &Self::SrcProg, c: &Self::SrcCtx, b: &Bounds) -> Result<Behavior, ChainError>;

    fn tgt_behavior(&self, p: &Self::TgtProg, c: &Self::TgtCtx, b: &Bounds) -> Result<Behavior, ChainError>;

    /// Source contexts that link with all of `programs`.
    fn src_contexts(&self, programs: &[Self::SrcProg], b: &Bounds) -> Enumeration<Self::SrcCtx>;

    /// Target contexts that link with the compiled `programs`.
    fn tgt_contexts(&self, programs: &[Self::SrcProg], b: &Bounds) -> Enumeration<Self::TgtCtx>;

    fn backtranslate(
        &self,
        _c_t: &Self::TgtCtx,
        _programs: &[Self::SrcProg],
        _goal: &Goal,
        _b: &Bounds,
    ) -> Backtranslation<Self::SrcCtx> {
        Backtranslation::Unavailable
    }
}
