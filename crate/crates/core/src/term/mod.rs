//! Typed expressions, the coercion graph, numerals and the surface syntax.

pub mod decl;
mod env;
mod expr;
mod numeral;
mod parse;
pub(crate) mod pretty;
pub mod syntax;
mod ty;

pub use env::{app_type, CoercionGraph, EnvError, TypeEnv, TypeError};
pub use expr::{CastCount, Expr, Op, OpKind, UserOp};
pub use numeral::BinaryNumeral;
pub use parse::{elaborate, parse_expr, parse_expr_at, ExprError};
pub(crate) use parse::bin_op;
pub use syntax::{ParseError, Pos};
pub use ty::{Ty, TyKind};

/// Hypotheses available to conditional rewriting and `assumption`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context {
    pub hyps: Vec<Expr>,
}

impl Context {
    pub fn new(hyps: Vec<Expr>) -> Self {
        Context { hyps }
    }

    pub fn empty() -> Self {
        Context::default()
    }

    pub fn is_empty(&self) -> bool {
        self.hyps.is_empty()
    }

    /// Checks that every hypothesis is a well-typed proposition.
    pub fn check(&self, env: &TypeEnv) -> Result<(), TypeError> {
        for h in &self.hyps {
            let ty = env.type_of(h)?;
            if !ty.is_prop() {
                return Err(TypeError::IllTypedApplication {
                    op: "hypothesis".into(),
                    detail: format!("`{h}` has type {ty}, expected prop"),
                });
            }
        }
        Ok(())
    }
}
