//! Cast normalization for typed arithmetic expressions.
//!
//! Expressions over `nat`, `int`, `rat` and user-declared types carry
//! explicit casts along a declared coercion graph. Cast lemmas are
//! classified as elim, move or squash from the shape of their two sides,
//! and a four-pass rewriting procedure moves casts toward the root and
//! eliminates them where possible. Every rewrite is recorded in a trace
//! that can be replayed, and an exhaustive evaluator checks rules and
//! results over small concrete domains.

pub mod cli;
pub mod gen;
pub mod normalize;
pub mod oracle;
pub mod par;
pub mod rules;
pub mod term;

pub use normalize::{NormalizeError, NormalizeOptions, Normalizer, Trace};
pub use par::Exec;
pub use rules::{load_rules, RuleDb};
pub use term::{parse_expr, Context, Expr, Ty, TypeEnv};
