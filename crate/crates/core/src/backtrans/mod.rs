//! Back-translations from target contexts to source contexts.

pub mod ctx;
pub mod informative;
pub mod pipeline;
pub mod tree;

pub use ctx::{backtranslate_ctx, extract, inject, inject_extract_eval, BacktransError, Direction};
pub use informative::{
    ctx_accepts_src, ctx_accepts_tgt, ctx_view, decompose_trace, prg_accepts_src, prg_accepts_tgt, project,
    source_variant, CtxTok, Decomposition,
};
pub use pipeline::{verify_rfrxc, PipelineError, ProgramReport, Report};
pub use tree::{build_tree, tree_backtranslate, tree_paths, TraceTree, TreeError};
