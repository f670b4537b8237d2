//! Minimal lambda-Pi calculus with single-constructor structures.
//!
//! The kernel offers weak-head normalization (β, δ, ι), type inference, a
//! definitional-equality checker with optional structural η, and a
//! first-order unifier over metavariables. All entry points are pure functions
//! of an immutable [`Environment`].

mod conv;
mod env;
pub(crate) mod infer;
mod meta;
pub mod pretty;
mod term;
pub(crate) mod whnf;

use thiserror::Error;

pub use conv::{defeq, defeq_with_metas, unify, DefEqOutcome, UnifyError, UnifyFailure, Unified, Verdict};
pub use env::{
    DefDecl, DefEqConfig, Declaration, Environment, OpaqueDecl, StructDecl, TeleEntry, Telescope,
    DEFAULT_UNFOLD_DEPTH,
};
pub use infer::{check, infer_type};
pub use meta::{MetaCtx, Substitution};
pub use term::{BinderInfo, MetaId, Name, Term};
pub use whnf::{whnf, whnf_traced};

pub(crate) use infer::{fresh_name, Infer};
pub(crate) use whnf::Reducer;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("unfolding fuel exhausted after {0} delta steps")]
    FuelExhausted(usize),
    #[error("ill-typed term: {0}")]
    IllTyped(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("duplicate declaration `{0}`")]
    DuplicateDeclaration(String),
    #[error("malformed declaration: {0}")]
    Malformed(String),
}
