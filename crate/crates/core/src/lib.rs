//! Executable models of secure compilation: a typed source language, an
//! untyped target language, a compiler between them, two back-translations,
//! an event-based trace model with property monitors, bounded checkers for
//! robust preservation criteria, and runnable separation chains.

pub mod backtrans;
pub mod compiler;
pub mod counterexamples;
pub mod criteria;
pub mod explore;
pub mod gen;
pub mod monitor;
pub mod sexp;
pub mod source;
pub mod target;
pub mod trace;
pub mod trace_json;
