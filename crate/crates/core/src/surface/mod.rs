//! The `.hier` language: lexer, parser, printer and lowering to kernel terms.

pub mod ast;
mod lexer;
mod lower;
mod parser;
mod printer;

use thiserror::Error;

use crate::kernel::{infer_type, Environment, KernelError, Telescope, Term};

pub use ast::*;
pub use lexer::Pos;
pub use lower::Lowerer;
pub use parser::Parser;
pub use printer::{expr as print_expr, print_module};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("{pos}: parse error: expected {}, found {found}", expected.join(" or "))]
    Parse { pos: Pos, expected: Vec<String>, found: String },
    #[error("{pos}: `{name}` is not in scope")]
    Scope { name: String, pos: Pos },
    #[error("{pos}: `{name}` is already declared")]
    Duplicate { name: String, pos: Pos },
    #[error("{pos}: {msg}")]
    Term { pos: Pos, msg: String },
    #[error("{pos}: {source}")]
    Kernel { pos: Pos, source: KernelError },
}

impl SurfaceError {
    pub fn pos(&self) -> Pos {
        match self {
            SurfaceError::Parse { pos, .. }
            | SurfaceError::Scope { pos, .. }
            | SurfaceError::Duplicate { pos, .. }
            | SurfaceError::Term { pos, .. }
            | SurfaceError::Kernel { pos, .. } => *pos,
        }
    }

    /// The message without the position prefix.
    pub fn message(&self) -> String {
        let full = self.to_string();
        let prefix = format!("{}: ", self.pos());
        full.strip_prefix(&prefix).map(str::to_string).unwrap_or(full)
    }
}

pub fn parse(text: &str) -> Result<SurfaceModule, SurfaceError> {
    Parser::new(text)?.module()
}

/// Parses a single expression, treating `known` names as declared.
pub fn parse_expr(text: &str, known: impl IntoIterator<Item = String>) -> Result<Expr, SurfaceError> {
    let mut p = Parser::new(text)?.with_known(known);
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Names a term may refer to in `env` plus `ctx`.
pub fn known_names(ctx: &Telescope, env: &Environment) -> Vec<String> {
    let mut names: Vec<String> = ctx.iter().map(|e| e.name.clone()).collect();
    for d in env.iter() {
        names.push(d.name().to_string());
        if let Some(s) = env.get_struct(d.name()) {
            names.push(s.ctor.clone());
        }
    }
    names
}

/// Parses and lowers a fully explicit term.
pub fn parse_term(text: &str, ctx: &Telescope, env: &Environment) -> Result<Term, SurfaceError> {
    let e = parse_expr(text, known_names(ctx, env))?;
    Lowerer::new(env, ctx).expr(&e)
}

/// [`parse_term`], then type-checks the result.
pub fn parse_term_checked(text: &str, ctx: &Telescope, env: &Environment) -> Result<Term, SurfaceError> {
    let t = parse_term(text, ctx, env)?;
    infer_type(env, ctx, &t).map_err(|source| SurfaceError::Kernel { pos: Pos { line: 1, col: 1 }, source })?;
    Ok(t)
}
