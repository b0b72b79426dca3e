//! Traversals and rewriting passes. All passes share one fuel budget and
//! one step log; paths in the log are always relative to the whole
//! expression, so the log replays against the original input.

use std::cell::OnceCell;

use num_traits::One;

use crate::rules::{rewrite_node, Class, Dir, Equation, Rewrite, RuleDb};
use crate::term::{Context, Expr, Ty, TypeEnv};

use super::split::{split_heuristic, Side};
use super::trace::{Pass, Step, NUMERAL_LIFT, NUMERAL_RESTORE, SPLIT_LEFT, SPLIT_RIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct OutOfFuel;

type Fuelled<T> = Result<T, OutOfFuel>;

pub(crate) struct Run<'a> {
    pub env: &'a TypeEnv,
    pub db: &'a RuleDb,
    ctx: &'a Context,
    fuel: usize,
    fuel_left: usize,
    pub steps: Vec<Step>,
    /// Hypotheses in normal form (computed without context), for discharge.
    hyps: OnceCell<Vec<Expr>>,
}

impl<'a> Run<'a> {
    pub fn new(env: &'a TypeEnv, db: &'a RuleDb, ctx: &'a Context, fuel: usize) -> Self {
        Run { env, db, ctx, fuel, fuel_left: fuel, steps: Vec::new(), hyps: OnceCell::new() }
    }

    pub fn fuel_used(&self) -> usize {
        self.fuel - self.fuel_left
    }

    fn record(&mut self, pass: Pass, rule: &str, dir: Dir, path: &[usize], before: &Expr, after: &Expr) -> Fuelled<()> {
        // Numeral bookkeeping is not a rewrite and costs no fuel.
        if !matches!(pass, Pass::Lift | Pass::Restore) {
            if self.fuel_left == 0 {
                return Err(OutOfFuel);
            }
            self.fuel_left -= 1;
        }
        self.steps.push(Step {
            pass,
            rule: rule.to_string(),
            dir,
            path: path.to_vec(),
            before: before.clone(),
            after: after.clone(),
        });
        Ok(())
    }

    /// Runs the four normalization passes in order.
    pub fn normalize(&mut self, e: Expr) -> Fuelled<Expr> {
        let e = self.lift_numerals(e, &mut Vec::new())?;
        let e = self.move_elim(e, &mut Vec::new())?;
        let e = self.squash(e)?;
        self.restore_numerals(e, &mut Vec::new())
    }

    fn map_children(
        &mut self,
        e: Expr,
        path: &mut Vec<usize>,
        f: fn(&mut Self, Expr, &mut Vec<usize>) -> Fuelled<Expr>,
    ) -> Fuelled<Expr> {
        match e {
            Expr::App { op, args } => {
                let mut out = Vec::with_capacity(args.len());
                for (i, a) in args.into_iter().enumerate() {
                    path.push(i);
                    let r = f(self, a, path);
                    path.pop();
                    out.push(r?);
                }
                Ok(Expr::App { op, args: out })
            }
            Expr::Cast { src, dst, body } => {
                path.push(0);
                let r = f(self, *body, path);
                path.pop();
                Ok(Expr::cast(src, dst, r?))
            }
            leaf => Ok(leaf),
        }
    }

    // ---- pass 1 ----------------------------------------------------------

    /// Top down: `v:T` with `v >= 2` becomes `cast(T, v:nat)` whenever `nat`
    /// coerces to `T`. Zero and one stay native.
    pub fn lift_numerals(&mut self, e: Expr, path: &mut Vec<usize>) -> Fuelled<Expr> {
        if let Expr::Num { value, ty } = &e {
            let liftable = *ty != Ty::Nat && *value > num_bigint::BigUint::one() && self.env.coercion_exists(&Ty::Nat, ty);
            if liftable {
                let after = Expr::cast(Ty::Nat, ty.clone(), Expr::num(value.clone(), Ty::Nat));
                self.record(Pass::Lift, NUMERAL_LIFT, Dir::L2R, path, &e, &after)?;
                return Ok(after);
            }
            return Ok(e);
        }
        self.map_children(e, path, Self::lift_numerals)
    }

    // ---- pass 4 ----------------------------------------------------------

    /// Top down: `cast(nat -> T, v:nat)` becomes `v:T`.
    pub fn restore_numerals(&mut self, e: Expr, path: &mut Vec<usize>) -> Fuelled<Expr> {
        if let Expr::Cast { src: Ty::Nat, dst, body } = &e {
            if let Expr::Num { value, .. } = body.as_ref() {
                let after = Expr::num(value.clone(), dst.clone());
                self.record(Pass::Restore, NUMERAL_RESTORE, Dir::L2R, path, &e, &after)?;
                return Ok(after);
            }
        }
        self.map_children(e, path, Self::restore_numerals)
    }

    // ---- rule application ------------------------------------------------

    /// Tries every rule of `class` in declaration order on the node.
    fn try_class(&mut self, class: Class, dir: Dir, pass: Pass, e: &Expr, path: &[usize]) -> Fuelled<Option<Expr>> {
        let db = self.db;
        for rule in db.of_class(class) {
            if let Some(out) = self.try_equation(rule, dir, e) {
                self.record(pass, &rule.name, dir, path, e, &out)?;
                return Ok(Some(out));
            }
        }
        Ok(None)
    }

    /// One directed equation on one node; side conditions are discharged
    /// against the context.
    pub fn try_equation(&mut self, eq: &Equation, dir: Dir, e: &Expr) -> Option<Expr> {
        let env = self.env;
        let result = rewrite_node(eq, dir, e, env, &mut |c| self.discharge(c));
        if let Rewrite::Blocked(c) = &result {
            log::debug!("{}: side condition `{c}` not discharged", eq.name);
        }
        result.fired()
    }

    /// A side condition holds when its normal form coincides with the
    /// normal form of some hypothesis. Both are normalized without context,
    /// so discharge never recurses.
    fn discharge(&mut self, cond: &Expr) -> bool {
        if self.ctx.is_empty() {
            return false;
        }
        let (env, db, ctx, fuel) = (self.env, self.db, self.ctx, self.fuel);
        let empty = Context::empty();
        let nf = |e: &Expr| {
            let mut sub = Run::new(env, db, &empty, fuel);
            sub.normalize(e.clone()).unwrap_or_else(|_| e.clone())
        };
        let hyps = self.hyps.get_or_init(|| ctx.hyps.iter().map(nf).collect());
        if ctx.hyps.contains(cond) {
            return true;
        }
        let target = nf(cond);
        hyps.contains(&target)
    }

    // ---- pass 2 ----------------------------------------------------------

    /// Bottom up: children first, then elim rules (left to right), move
    /// rules (right to left) and finally the splitting heuristic at the
    /// node. A rewritten node is normalized again from its leaves.
    pub fn move_elim(&mut self, e: Expr, path: &mut Vec<usize>) -> Fuelled<Expr> {
        let mut e = self.map_children(e, path, Self::move_elim)?;
        loop {
            if let Some(out) = self.try_class(Class::Elim, Dir::L2R, Pass::MoveElim, &e, path)? {
                return self.move_elim(out, path);
            }
            if let Some(out) = self.try_class(Class::Move, Dir::R2L, Pass::MoveElim, &e, path)? {
                return self.move_elim(out, path);
            }
            match self.split(&e, path)? {
                Some(out) => e = out,
                None => return Ok(e),
            }
        }
    }

    /// Splitting, extended to a native `0`/`1` facing a cast: the numeral is
    /// first rewritten into a cast of a `nat` numeral with a squash rule
    /// used right to left.
    fn split(&mut self, e: &Expr, path: &mut Vec<usize>) -> Fuelled<Option<Expr>> {
        if let Some((side, arg)) = split_heuristic(e, self.env) {
            let i = side.index();
            let tag = if side == Side::Left { SPLIT_LEFT } else { SPLIT_RIGHT };
            path.push(i);
            let r = self.record(Pass::Split, tag, Dir::R2L, path, &e.children()[i], &arg);
            path.pop();
            r?;
            let mut out = e.clone();
            out.children_mut()[i] = arg;
            return Ok(Some(out));
        }
        let Expr::App { args, .. } = e else {
            return Ok(None);
        };
        let [a, b] = args.as_slice() else {
            return Ok(None);
        };
        let i = match (a, b) {
            (Expr::Cast { .. }, Expr::Num { value, .. }) if *value <= num_bigint::BigUint::one() => 1,
            (Expr::Num { value, .. }, Expr::Cast { .. }) if *value <= num_bigint::BigUint::one() => 0,
            _ => return Ok(None),
        };
        let numeral = &args[i];
        let db = self.db;
        for rule in db.of_class(Class::Squash) {
            if let Some(out) = self.try_equation(rule, Dir::R2L, numeral) {
                if !matches!(out, Expr::Cast { .. }) {
                    continue;
                }
                path.push(i);
                let r = self.record(Pass::Split, &rule.name, Dir::R2L, path, numeral, &out);
                path.pop();
                r?;
                let mut node = e.clone();
                node.children_mut()[i] = out;
                return Ok(Some(node));
            }
        }
        Ok(None)
    }

    // ---- pass 3 ----------------------------------------------------------

    /// Top down squash rewriting, repeated until nothing fires.
    pub fn squash(&mut self, e: Expr) -> Fuelled<Expr> {
        let mut e = e;
        loop {
            let before = self.steps.len();
            e = self.squash_once(e, &mut Vec::new())?;
            if self.steps.len() == before {
                return Ok(e);
            }
        }
    }

    fn squash_once(&mut self, e: Expr, path: &mut Vec<usize>) -> Fuelled<Expr> {
        let mut e = e;
        while let Some(out) = self.try_class(Class::Squash, Dir::L2R, Pass::Squash, &e, path)? {
            e = out;
        }
        self.map_children(e, path, Self::squash_once)
    }

    // ---- push_cast -------------------------------------------------------

    /// Bottom up: move rules left to right, then squash rules left to right.
    pub fn push(&mut self, e: Expr, path: &mut Vec<usize>) -> Fuelled<Expr> {
        let e = self.map_children(e, path, Self::push)?;
        if let Some(out) = self.try_class(Class::Move, Dir::L2R, Pass::Push, &e, path)? {
            return self.push(out, path);
        }
        if let Some(out) = self.try_class(Class::Squash, Dir::L2R, Pass::Push, &e, path)? {
            return self.push(out, path);
        }
        Ok(e)
    }

    // ---- rw --------------------------------------------------------------

    /// Rewrites the leftmost-outermost instance of `eq`.
    pub fn rewrite_once(&mut self, eq: &Equation, dir: Dir, e: Expr) -> Fuelled<Option<Expr>> {
        let mut path = Vec::new();
        match self.find_redex(eq, dir, &e, &mut path) {
            Some((path, before, after)) => {
                self.record(Pass::Rw, &eq.name, dir, &path, &before, &after)?;
                Ok(e.replace_at(&path, after))
            }
            None => Ok(None),
        }
    }

    fn find_redex(&mut self, eq: &Equation, dir: Dir, e: &Expr, path: &mut Vec<usize>) -> Option<(Vec<usize>, Expr, Expr)> {
        if let Some(out) = self.try_equation(eq, dir, e) {
            return Some((path.clone(), e.clone(), out));
        }
        for (i, c) in e.children().iter().enumerate() {
            path.push(i);
            let found = self.find_redex(eq, dir, c, path);
            path.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
}
