//! Cast lemmas: patterns, automatic classification, matching and rewriting.

mod classify;
mod db;
mod matching;
mod pattern;

pub use classify::{class_predicates, classify, classify_counts, Class, ClassifyError};
pub use db::{
    extend_rules, load_rules, parse_rule_line, parse_rule_lines, parse_rule_lines_with_pos, Dir, Equation,
    RewriteRule, RuleDb, RuleItem, PRELUDE_SOURCE,
};
pub use matching::{instantiate, match_into, match_pattern, InstantiateError, Subst};
pub use pattern::{Pattern, TyPat};

use thiserror::Error;

use crate::term::decl::DeclError;
use crate::term::{CastCount, Expr, ParseError, Pos, TypeEnv};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Decl(#[from] DeclError),
    #[error("{pos}: {msg}")]
    Resolve { pos: Pos, msg: String },
    #[error("{pos}: rule `{name}` is not an elim, move or squash lemma (lhs {lhs}; rhs {rhs})")]
    Classify { pos: Pos, name: String, lhs: CastCount, rhs: CastCount },
    #[error("{pos}: duplicate rule name `{name}`")]
    DuplicateName { pos: Pos, name: String },
    #[error("{pos}: `{meta}` in rule `{name}` does not occur on the left-hand side")]
    UnboundMeta { pos: Pos, name: String, meta: String },
    #[error("{pos}: rule `{name}` equates a proposition with a value")]
    SortMismatch { pos: Pos, name: String },
}

impl RuleError {
    pub fn pos(&self) -> Pos {
        match self {
            RuleError::Parse(e) => e.pos,
            RuleError::Decl(e) => e.pos(),
            RuleError::Resolve { pos, .. }
            | RuleError::Classify { pos, .. }
            | RuleError::DuplicateName { pos, .. }
            | RuleError::UnboundMeta { pos, .. }
            | RuleError::SortMismatch { pos, .. } => *pos,
        }
    }

    /// Attaches a position to errors raised away from the source text.
    pub(crate) fn at(self, at: Pos) -> RuleError {
        match self {
            RuleError::DuplicateName { name, .. } => RuleError::DuplicateName { pos: at, name },
            other => other,
        }
    }
}

/// Outcome of trying one directed equation on one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rewrite {
    /// The rewritten node.
    Fired(Expr),
    NoMatch,
    /// The pattern matched but the instance does not typecheck here (for
    /// example a cast with no coercion between its endpoints).
    IllTyped(InstantiateError),
    /// A side condition could not be discharged.
    Blocked(Expr),
}

impl Rewrite {
    pub fn fired(self) -> Option<Expr> {
        match self {
            Rewrite::Fired(e) => Some(e),
            _ => None,
        }
    }
}

/// Rewrites `node` with `eq` in direction `dir`. Every instantiated side
/// condition must be accepted by `discharge`. The result must have the same
/// type as `node`.
pub fn rewrite_node(
    eq: &Equation,
    dir: Dir,
    node: &Expr,
    env: &TypeEnv,
    discharge: &mut dyn FnMut(&Expr) -> bool,
) -> Rewrite {
    let (from, to) = eq.sides(dir);
    let Some(subst) = match_pattern(from, node) else {
        return Rewrite::NoMatch;
    };
    let out = match instantiate(to, &subst, env) {
        Ok(out) => out,
        Err(e) => return Rewrite::IllTyped(e),
    };
    if out.ty() != node.ty() {
        return Rewrite::IllTyped(InstantiateError::IllTyped(crate::term::TypeError::IllTypedApplication {
            op: eq.name.to_string(),
            detail: format!("instance has type {}, expected {}", out.ty(), node.ty()),
        }));
    }
    for cond in &eq.conds {
        match instantiate(cond, &subst, env) {
            Ok(c) => {
                if !discharge(&c) {
                    return Rewrite::Blocked(c);
                }
            }
            Err(e) => return Rewrite::IllTyped(e),
        }
    }
    Rewrite::Fired(out)
}
