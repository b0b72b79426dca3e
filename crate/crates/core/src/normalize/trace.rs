use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::Dir;
use crate::term::{parse_expr, BinaryNumeral, Expr, ExprError, TypeEnv};

/// Which phase produced a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pass {
    /// Numerals lifted to casts of `nat` numerals.
    Lift,
    /// Bottom-up move and elim rewriting.
    MoveElim,
    /// Squash cleanup.
    Squash,
    /// Numerals restored to their native type.
    Restore,
    /// Intermediate casts inserted by the splitting heuristic.
    Split,
    Push,
    Rw,
}

impl Pass {
    pub fn tag(self) -> &'static str {
        match self {
            Pass::Lift => "1",
            Pass::MoveElim => "2",
            Pass::Squash => "3",
            Pass::Restore => "4",
            Pass::Split => "split",
            Pass::Push => "push",
            Pass::Rw => "rw",
        }
    }

    pub fn from_tag(s: &str) -> Option<Pass> {
        [Pass::Lift, Pass::MoveElim, Pass::Squash, Pass::Restore, Pass::Split, Pass::Push, Pass::Rw]
            .into_iter()
            .find(|p| p.tag() == s)
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

pub const NUMERAL_LIFT: &str = "numeral-lift";
pub const NUMERAL_RESTORE: &str = "numeral-restore";
pub const SPLIT_LEFT: &str = "split-left";
pub const SPLIT_RIGHT: &str = "split-right";

/// One localized rewrite: the subterm at `path` changes from `before` to
/// `after`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub pass: Pass,
    /// A rule name or one of the builtin tags.
    pub rule: String,
    pub dir: Dir,
    pub path: Vec<usize>,
    pub before: Expr,
    pub after: Expr,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(ToString::to_string).collect();
        write!(
            f,
            "[{}] {} {} @[{}]: {} ~> {}",
            self.pass,
            self.rule,
            self.dir,
            path.join(","),
            self.before,
            self.after
        )?;
        if self.rule == NUMERAL_LIFT || self.rule == NUMERAL_RESTORE {
            let numeral = if self.rule == NUMERAL_LIFT { &self.before } else { &self.after };
            if let Expr::Num { value, .. } = numeral {
                write!(f, "  ({})", BinaryNumeral::of(value))?;
            }
        }
        Ok(())
    }
}

/// An ordered list of steps taking `input` to `output`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub input: Expr,
    pub output: Expr,
    pub steps: Vec<Step>,
    pub fuel_used: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {index}: path {path:?} does not address a node")]
    BadPath { index: usize, path: Vec<usize> },
    #[error("step {index}: expected `{expected}` at {path:?}, found `{found}`")]
    Mismatch { index: usize, path: Vec<usize>, expected: Box<Expr>, found: Box<Expr> },
    #[error("replay ends in `{got}`, trace claims `{claimed}`")]
    WrongOutput { got: Box<Expr>, claimed: Box<Expr> },
}

/// Applies `steps` to `input` in order, checking each `before`.
pub fn replay(input: &Expr, steps: &[Step]) -> Result<Expr, ReplayError> {
    let mut cur = input.clone();
    for (index, step) in steps.iter().enumerate() {
        let node = cur
            .at_mut(&step.path)
            .ok_or_else(|| ReplayError::BadPath { index, path: step.path.clone() })?;
        if *node != step.before {
            return Err(ReplayError::Mismatch {
                index,
                path: step.path.clone(),
                expected: Box::new(step.before.clone()),
                found: Box::new(node.clone()),
            });
        }
        *node = step.after.clone();
    }
    Ok(cur)
}

impl Trace {
    /// Replays the steps and checks that they end in `output`.
    pub fn verify(&self) -> Result<(), ReplayError> {
        let got = replay(&self.input, &self.steps)?;
        if got != self.output {
            return Err(ReplayError::WrongOutput { got: Box::new(got), claimed: Box::new(self.output.clone()) });
        }
        Ok(())
    }

    pub fn to_json(&self) -> TraceJson {
        TraceJson {
            input: self.input.to_string(),
            output: self.output.to_string(),
            fuel_used: self.fuel_used,
            steps: self
                .steps
                .iter()
                .map(|s| StepJson {
                    pass: s.pass.tag().to_string(),
                    rule: s.rule.clone(),
                    dir: s.dir,
                    path: s.path.clone(),
                    before: s.before.to_string(),
                    after: s.after.to_string(),
                })
                .collect(),
        }
    }

    /// Reads a trace back from its JSON form; expressions are re-parsed
    /// under `env`.
    pub fn from_json(json: &TraceJson, env: &TypeEnv) -> Result<Trace, TraceJsonError> {
        let parse = |s: &str| parse_expr(s, env).map_err(|e| TraceJsonError::Expr(s.to_string(), e));
        let steps = json
            .steps
            .iter()
            .map(|s| {
                Ok(Step {
                    pass: Pass::from_tag(&s.pass).ok_or_else(|| TraceJsonError::Pass(s.pass.clone()))?,
                    rule: s.rule.clone(),
                    dir: s.dir,
                    path: s.path.clone(),
                    before: parse(&s.before)?,
                    after: parse(&s.after)?,
                })
            })
            .collect::<Result<Vec<_>, TraceJsonError>>()?;
        Ok(Trace { input: parse(&json.input)?, output: parse(&json.output)?, steps, fuel_used: json.fuel_used })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceJsonError {
    #[error("unknown pass tag `{0}`")]
    Pass(String),
    #[error("cannot read `{0}`: {1}")]
    Expr(String, ExprError),
}

/// Wire form of a [`Trace`]; expressions use the canonical text syntax.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceJson {
    pub input: String,
    pub output: String,
    pub fuel_used: usize,
    pub steps: Vec<StepJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepJson {
    pub pass: String,
    pub rule: String,
    pub dir: Dir,
    pub path: Vec<usize>,
    pub before: String,
    pub after: String,
}
