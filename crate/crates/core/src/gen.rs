//! Seeded generator of random well-typed, cast-heavy expressions over the
//! standard numeric tower.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::term::{Expr, Op, Ty, TypeEnv};

/// Variables available to generated expressions.
pub const VARS: [(&str, Ty); 4] = [("m", Ty::Nat), ("n", Ty::Nat), ("z", Ty::Int), ("q", Ty::Rat)];

/// The standard environment with [`VARS`] declared.
pub fn env() -> TypeEnv {
    let mut env = TypeEnv::stdlib();
    for (name, ty) in &VARS {
        env.declare_var(name, ty).expect("fresh variable");
    }
    env
}

pub struct ExprGen {
    rng: ChaCha8Rng,
    env: TypeEnv,
    max_depth: usize,
}

const TYPES: [Ty; 3] = [Ty::Nat, Ty::Int, Ty::Rat];

impl ExprGen {
    pub fn new(seed: u64, max_depth: usize) -> Self {
        ExprGen { rng: ChaCha8Rng::seed_from_u64(seed), env: env(), max_depth }
    }

    pub fn env(&self) -> &TypeEnv {
        &self.env
    }

    /// A proposition or a value, two to one.
    pub fn any(&mut self) -> Expr {
        if self.rng.gen_bool(2.0 / 3.0) {
            self.prop()
        } else {
            let ty = TYPES.choose(&mut self.rng).unwrap().clone();
            self.value(&ty, self.max_depth)
        }
    }

    pub fn prop(&mut self) -> Expr {
        let ty = TYPES.choose(&mut self.rng).unwrap().clone();
        let op = [Op::Lt, Op::Le, Op::Eq, Op::Ne, Op::Dvd].choose(&mut self.rng).unwrap().clone();
        let d = self.max_depth.saturating_sub(1);
        let l = self.value(&ty, d);
        let r = self.value(&ty, d);
        Expr::binary(op, l, r)
    }

    /// A value of type `ty` with depth at most `depth` (counted in nodes,
    /// so a leaf has depth 1).
    pub fn value(&mut self, ty: &Ty, depth: usize) -> Expr {
        let sources: Vec<Ty> = TYPES.iter().filter(|s| self.env.coercion_exists(s, ty)).cloned().collect();
        if depth <= 1 || self.rng.gen_bool(0.25) {
            return self.leaf(ty);
        }
        let choice = self.rng.gen_range(0..10);
        match choice {
            0..=3 if !sources.is_empty() => {
                let src = sources.choose(&mut self.rng).unwrap().clone();
                let body = self.value(&src, depth - 1);
                Expr::cast(src, ty.clone(), body)
            }
            4 if *ty != Ty::Nat => Expr::app(Op::Neg, vec![self.value(ty, depth - 1)]),
            _ => {
                let op = [Op::Add, Op::Sub, Op::Mul].choose(&mut self.rng).unwrap().clone();
                let l = self.value(ty, depth - 1);
                let r = self.value(ty, depth - 1);
                Expr::binary(op, l, r)
            }
        }
    }

    fn leaf(&mut self, ty: &Ty) -> Expr {
        let vars: Vec<&str> = VARS.iter().filter(|(_, t)| t == ty).map(|(n, _)| *n).collect();
        if !vars.is_empty() && self.rng.gen_bool(0.6) {
            return Expr::var(vars.choose(&mut self.rng).unwrap(), ty.clone());
        }
        Expr::num(self.rng.gen_range(0u32..12), ty.clone())
    }
}

impl Iterator for ExprGen {
    type Item = Expr;

    fn next(&mut self) -> Option<Expr> {
        Some(self.any())
    }
}
