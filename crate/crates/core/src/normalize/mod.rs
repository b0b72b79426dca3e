//! The normalization pipeline and the operations built on it.

mod engine;
mod split;
mod trace;

pub use split::{split_heuristic, Side};
pub use trace::{
    replay, Pass, ReplayError, Step, StepJson, Trace, TraceJson, TraceJsonError, NUMERAL_LIFT, NUMERAL_RESTORE,
    SPLIT_LEFT, SPLIT_RIGHT,
};

use thiserror::Error;

use crate::par::Exec;
use crate::rules::{Dir, RuleDb};
use crate::term::{Context, Expr, TypeEnv, TypeError};

use engine::{OutOfFuel, Run};

pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Normalize,
    PushCast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormalizeOptions {
    /// Rewrite budget for one call. Numeral lifting and restoring are free.
    pub fuel: usize,
    pub mode: Mode,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions { fuel: DEFAULT_FUEL, mode: Mode::Normalize }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("ill-typed input: {0}")]
    IllTypedInput(#[from] TypeError),
    /// The partial trace ends in the last expression reached.
    #[error("fuel exhausted after {} steps; stopped at `{}`", .0.fuel_used, .0.output)]
    FuelExhausted(Box<Trace>),
    #[error("rw `{rule}`: {reason}")]
    RewriteFailed { rule: String, reason: &'static str },
}

impl NormalizeError {
    pub fn partial_trace(&self) -> Option<&Trace> {
        match self {
            NormalizeError::FuelExhausted(t) => Some(t),
            _ => None,
        }
    }
}

/// Normalizer over a fixed environment and rule database.
#[derive(Clone, Copy)]
pub struct Normalizer<'a> {
    env: &'a TypeEnv,
    db: &'a RuleDb,
    opts: NormalizeOptions,
}

impl<'a> Normalizer<'a> {
    pub fn new(env: &'a TypeEnv, db: &'a RuleDb) -> Self {
        Normalizer { env, db, opts: NormalizeOptions::default() }
    }

    pub fn with_options(mut self, opts: NormalizeOptions) -> Self {
        self.opts = NormalizeOptions { fuel: opts.fuel.max(1), ..opts };
        self
    }

    pub fn with_fuel(self, fuel: usize) -> Self {
        let opts = NormalizeOptions { fuel, ..self.opts };
        self.with_options(opts)
    }

    pub fn options(&self) -> NormalizeOptions {
        self.opts
    }

    pub fn env(&self) -> &'a TypeEnv {
        self.env
    }

    pub fn db(&self) -> &'a RuleDb {
        self.db
    }

    fn run<'c>(&self, ctx: &'c Context) -> Run<'c>
    where
        'a: 'c,
    {
        Run::new(self.env, self.db, ctx, self.opts.fuel)
    }

    fn check(&self, e: &Expr, ctx: &Context) -> Result<(), NormalizeError> {
        self.env.type_of(e)?;
        ctx.check(self.env)?;
        Ok(())
    }

    fn finish(input: &Expr, run: Run<'_>, out: Result<Expr, OutOfFuel>) -> Result<Trace, NormalizeError> {
        let fuel_used = run.fuel_used();
        match out {
            Ok(output) => Ok(Trace { input: input.clone(), output, steps: run.steps, fuel_used }),
            Err(OutOfFuel) => {
                let output = replay(input, &run.steps).expect("engine steps replay");
                Err(NormalizeError::FuelExhausted(Box::new(Trace {
                    input: input.clone(),
                    output,
                    steps: run.steps,
                    fuel_used,
                })))
            }
        }
    }

    /// Runs the configured mode.
    pub fn run_mode(&self, e: &Expr, ctx: &Context) -> Result<Trace, NormalizeError> {
        match self.opts.mode {
            Mode::Normalize => self.normalize(e, ctx),
            Mode::PushCast => self.push_cast(e, ctx),
        }
    }

    /// Lifts numerals, moves and eliminates casts, squashes, restores
    /// numerals.
    pub fn normalize(&self, e: &Expr, ctx: &Context) -> Result<Trace, NormalizeError> {
        self.check(e, ctx)?;
        let mut run = self.run(ctx);
        let out = run.normalize(e.clone());
        Self::finish(e, run, out)
    }

    /// Pushes casts toward the leaves: move rules left to right and squash
    /// rules, no elimination and no numeral handling.
    pub fn push_cast(&self, e: &Expr, ctx: &Context) -> Result<Trace, NormalizeError> {
        self.check(e, ctx)?;
        let mut run = self.run(ctx);
        let out = run.push(e.clone(), &mut Vec::new());
        Self::finish(e, run, out)
    }

    pub fn pass_lift_numerals(&self, e: &Expr) -> (Expr, Vec<Step>) {
        let empty = Context::empty();
        let mut run = self.run(&empty);
        let out = run.lift_numerals(e.clone(), &mut Vec::new()).expect("lifting costs no fuel");
        (out, run.steps)
    }

    pub fn pass_move_elim(&self, e: &Expr, ctx: &Context) -> Result<(Expr, Vec<Step>), NormalizeError> {
        let mut run = self.run(ctx);
        let out = run.move_elim(e.clone(), &mut Vec::new());
        Self::finish(e, run, out).map(|t| (t.output, t.steps))
    }

    pub fn pass_squash(&self, e: &Expr) -> Result<(Expr, Vec<Step>), NormalizeError> {
        let empty = Context::empty();
        let mut run = self.run(&empty);
        let out = run.squash(e.clone());
        Self::finish(e, run, out).map(|t| (t.output, t.steps))
    }

    pub fn pass_restore_numerals(&self, e: &Expr) -> (Expr, Vec<Step>) {
        let empty = Context::empty();
        let mut run = self.run(&empty);
        let out = run.restore_numerals(e.clone(), &mut Vec::new()).expect("restoring costs no fuel");
        (out, run.steps)
    }

    /// Applies the named rule or lemma at `path`, discharging side
    /// conditions against `ctx`.
    pub fn apply_rule_at(&self, name: &str, dir: Dir, e: &Expr, path: &[usize], ctx: &Context) -> Option<(Expr, Step)> {
        let eq = self.db.equation(name)?;
        let node = e.at(path)?;
        let mut run = self.run(ctx);
        let after = run.try_equation(eq, dir, node)?;
        debug_assert_eq!(self.env.type_of(&after).ok(), Some(node.ty()));
        let step = Step {
            pass: Pass::Rw,
            rule: name.to_string(),
            dir,
            path: path.to_vec(),
            before: node.clone(),
            after: after.clone(),
        };
        Some((e.replace_at(path, after)?, step))
    }

    /// Whether `a` and `b` have the same normal form. Running out of fuel
    /// counts as `false`.
    pub fn equiv_mod_cast(&self, a: &Expr, b: &Expr, ctx: &Context) -> bool {
        if a == b {
            return true;
        }
        match (self.normalize(a, ctx), self.normalize(b, ctx)) {
            (Ok(x), Ok(y)) => x.output == y.output,
            (x, y) => {
                for err in [x.err(), y.err()].into_iter().flatten() {
                    log::warn!("equiv_mod_cast: {err}");
                }
                false
            }
        }
    }

    /// Index of the first hypothesis equivalent to `goal`.
    pub fn assumption_mod_cast(&self, goal: &Expr, ctx: &Context) -> Option<usize> {
        ctx.hyps.iter().position(|h| self.equiv_mod_cast(goal, h, ctx))
    }

    /// Normalizes, then for each listed rule rewrites its leftmost-outermost
    /// instance and normalizes again. Fuel is shared by the whole sequence.
    pub fn rw_mod_cast(&self, e: &Expr, rules: &[(String, Dir)], ctx: &Context) -> Result<Trace, NormalizeError> {
        self.check(e, ctx)?;
        let eqs = rules
            .iter()
            .map(|(name, dir)| {
                self.db
                    .equation(name)
                    .map(|eq| (eq, *dir))
                    .ok_or_else(|| NormalizeError::RewriteFailed { rule: name.clone(), reason: "no such rule" })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut run = self.run(ctx);
        let mut cur = match run.normalize(e.clone()) {
            Ok(x) => x,
            Err(err) => return Self::finish(e, run, Err(err)),
        };
        for (eq, dir) in eqs {
            match run.rewrite_once(eq, dir, cur) {
                Ok(Some(next)) => cur = next,
                Ok(None) => {
                    return Err(NormalizeError::RewriteFailed { rule: eq.name.to_string(), reason: "matches nowhere" })
                }
                Err(err) => return Self::finish(e, run, Err(err)),
            }
            cur = match run.normalize(cur) {
                Ok(x) => x,
                Err(err) => return Self::finish(e, run, Err(err)),
            };
        }
        Self::finish(e, run, Ok(cur))
    }

    /// Runs the configured mode on every expression.
    pub fn run_all(&self, es: &[Expr], ctx: &Context, exec: Exec) -> Vec<Result<Trace, NormalizeError>> {
        exec.map(es, |e| self.run_mode(e, ctx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_expr;

    fn env() -> TypeEnv {
        let mut env = TypeEnv::stdlib();
        for (v, t) in [("m", "nat"), ("n", "nat"), ("p", "nat"), ("z", "int"), ("q", "rat")] {
            let ty = env.resolve_type(t).unwrap();
            env.declare_var(v, &ty).unwrap();
        }
        env
    }

    fn nf(src: &str) -> Trace {
        let env = env();
        let db = RuleDb::prelude();
        let e = parse_expr(src, &env).unwrap();
        let t = Normalizer::new(&env, &db).normalize(&e, &Context::empty()).unwrap();
        t.verify().unwrap();
        t
    }

    #[test]
    fn add_lt() {
        let t = nf("cast(int, m) + cast(int, n) < 10:int");
        assert_eq!(t.output.to_string(), "m + n < 10:nat");
        let rules: Vec<&str> = t.steps.iter().map(|s| s.rule.as_str()).collect();
        assert_eq!(rules, ["numeral-lift", "cast_add", "cast_lt"]);
    }

    #[test]
    fn splitting() {
        let t = nf("cast(rat, n) + cast(rat, z) = 2:rat");
        assert_eq!(t.output.to_string(), "cast(int, n) + z = 2:int");
        assert_eq!(t.steps.iter().filter(|s| s.rule == SPLIT_LEFT).count(), 1);
    }

    #[test]
    fn native_one_and_zero() {
        assert_eq!(nf("1:int <= cast(int, p)").output.to_string(), "1:nat <= p");
        assert_eq!(nf("cast(rat, z) != 0:rat").output.to_string(), "z != 0:int");
    }

    #[test]
    fn cast_free_is_untouched() {
        let t = nf("m");
        assert!(t.steps.is_empty());
        assert_eq!(t.output.to_string(), "m");
    }

    #[test]
    fn push_moves_down() {
        let env = env();
        let db = RuleDb::prelude();
        let e = parse_expr("cast(int, m + n)", &env).unwrap();
        let t = Normalizer::new(&env, &db).push_cast(&e, &Context::empty()).unwrap();
        assert_eq!(t.output.to_string(), "cast(int, m) + cast(int, n)");
    }

    #[test]
    fn conditional_needs_hypothesis() {
        let env = env();
        let db = RuleDb::prelude();
        let norm = Normalizer::new(&env, &db);
        let e = parse_expr("cast(int, m - n)", &env).unwrap();
        let goal = parse_expr("cast(int, m) - cast(int, n)", &env).unwrap();
        let ctx = Context::new(vec![parse_expr("n <= m", &env).unwrap()]);
        assert!(norm.equiv_mod_cast(&e, &goal, &ctx));
        assert!(!norm.equiv_mod_cast(&e, &goal, &Context::empty()));
        assert!(norm.apply_rule_at("cast_sub", Dir::L2R, &e, &[], &ctx).is_some());
        assert!(norm.apply_rule_at("cast_sub", Dir::L2R, &e, &[], &Context::empty()).is_none());
    }

    #[test]
    fn rw_unknown_rule() {
        let env = env();
        let db = RuleDb::prelude();
        let e = parse_expr("m", &env).unwrap();
        let err = Normalizer::new(&env, &db).rw_mod_cast(&e, &[("nope".into(), Dir::L2R)], &Context::empty());
        assert!(matches!(err, Err(NormalizeError::RewriteFailed { .. })));
    }
}
