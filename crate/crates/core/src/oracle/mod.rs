//! Exhaustive checking over small concrete domains.

mod value;

pub use value::{check_evaluable, eval, Assignment, EvalError, Value};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use thiserror::Error;

use crate::par::Exec;
use crate::rules::{instantiate, match_pattern, Equation, Subst};
use crate::term::{Context, Expr, Op, Ty, TypeEnv};

pub const DEFAULT_RANGE: u32 = 4;

/// Values a variable of `ty` ranges over: `0..=hi` for `nat`, `-hi..=hi`
/// for `int`, and every `p/q` with `|p| <= hi`, `1 <= q <= hi` for `rat`,
/// in increasing order.
pub fn domain(ty: &Ty, hi: u32) -> Result<Vec<Value>, EvalError> {
    let hi = i64::from(hi);
    Ok(match ty {
        Ty::Nat => (0..=hi).map(|v| Value::Nat(BigUint::from(v as u64))).collect(),
        Ty::Int => (-hi..=hi).map(|v| Value::Int(BigInt::from(v))).collect(),
        Ty::Rat => {
            let set: BTreeSet<BigRational> = (-hi..=hi)
                .flat_map(|p| (1..=hi.max(1)).map(move |q| BigRational::new(p.into(), q.into())))
                .collect();
            set.into_iter().map(Value::Rat).collect()
        }
        other => return Err(EvalError::AbstractTypePresent(other.clone())),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Counterexample(Assignment),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Equivalent => f.write_str("equivalent"),
            Verdict::Counterexample(a) => write!(f, "counterexample: {a}"),
        }
    }
}

/// Free variables of all expressions, sorted by name.
fn collect_vars<'e>(es: impl IntoIterator<Item = &'e Expr>) -> Result<Vec<(Arc<str>, Ty)>, EvalError> {
    let mut vars: BTreeMap<Arc<str>, Ty> = BTreeMap::new();
    for e in es {
        for (name, ty) in e.vars() {
            if let Some(prev) = vars.insert(name.clone(), ty.clone()) {
                if prev != ty {
                    return Err(EvalError::Unassigned(format!("{name} (used at {prev} and {ty})")));
                }
            }
        }
    }
    Ok(vars.into_iter().collect())
}

/// Compares `a` and `b` under every assignment that satisfies `ctx`.
/// Variables are enumerated in name order, the first one varying slowest,
/// so the reported counterexample is the least one in that order.
pub fn check_equiv_exhaustive(a: &Expr, b: &Expr, ctx: &Context, hi: u32, exec: Exec) -> Result<Verdict, EvalError> {
    let all: Vec<&Expr> = [a, b].into_iter().chain(&ctx.hyps).collect();
    for e in &all {
        check_evaluable(e)?;
    }
    let vars = collect_vars(all.iter().copied())?;
    let domains = vars.iter().map(|(_, ty)| domain(ty, hi)).collect::<Result<Vec<_>, _>>()?;
    let total: u64 = domains.iter().map(|d| d.len() as u64).product();
    let assignment = |mut idx: u64| {
        let mut asg = Assignment::default();
        for ((name, _), dom) in vars.iter().zip(&domains).rev() {
            let k = dom.len() as u64;
            asg.0.insert(name.clone(), dom[(idx % k) as usize].clone());
            idx /= k;
        }
        asg
    };
    let probe = |idx: u64| -> Option<Result<Assignment, EvalError>> {
        let asg = assignment(idx);
        let run = || -> Result<bool, EvalError> {
            for h in &ctx.hyps {
                if eval(h, &asg)? != Value::Bool(true) {
                    return Ok(true);
                }
            }
            Ok(eval(a, &asg)? == eval(b, &asg)?)
        };
        match run() {
            Ok(true) => None,
            Ok(false) => Some(Ok(asg)),
            Err(e) => Some(Err(e)),
        }
    };
    match exec.find_first(0..total, probe) {
        None => Ok(Verdict::Equivalent),
        Some(Ok(asg)) => Ok(Verdict::Counterexample(asg)),
        Some(Err(e)) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateTypeError {
    #[error("`{0}` becomes a cast from a type to itself")]
    TrivialCast(Expr),
    #[error("no coercion {src} -> {dst}")]
    MissingCoercion { src: Ty, dst: Ty },
    #[error("operator `{0}` is not declared at {1}")]
    UndeclaredOp(String, Ty),
    #[error("{0} is not a concrete type")]
    NotConcrete(Ty),
}

/// Replaces every user-declared type in `e` by the concrete `target`.
pub fn abstract_instantiate(e: &Expr, target: &Ty, env: &TypeEnv) -> Result<Expr, InstantiateTypeError> {
    if !target.is_concrete_value() {
        return Err(InstantiateTypeError::NotConcrete(target.clone()));
    }
    let sub = |t: &Ty| if t.is_user() { target.clone() } else { t.clone() };
    Ok(match e {
        Expr::Var { name, ty } => Expr::Var { name: name.clone(), ty: sub(ty) },
        Expr::Num { value, ty } => Expr::Num { value: value.clone(), ty: sub(ty) },
        Expr::Cast { src, dst, body } => {
            let (s, d) = (sub(src), sub(dst));
            if s == d {
                return Err(InstantiateTypeError::TrivialCast(e.clone()));
            }
            if !env.coercion_exists(&s, &d) {
                return Err(InstantiateTypeError::MissingCoercion { src: s, dst: d });
            }
            Expr::cast(s, d, abstract_instantiate(body, target, env)?)
        }
        Expr::App { op, args } => {
            if let (Op::User(u), Some(first)) = (op, args.first()) {
                if first.ty().is_user() {
                    return Err(InstantiateTypeError::UndeclaredOp(u.name.to_string(), target.clone()));
                }
            }
            let args = args.iter().map(|a| abstract_instantiate(a, target, env)).collect::<Result<_, _>>()?;
            Expr::App { op: op.clone(), args }
        }
    })
}

/// One concrete instance of a rule with its verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleInstance {
    pub lhs: Expr,
    pub rhs: Expr,
    pub conds: Vec<Expr>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Soundness {
    /// Every instance agreed; the count of instances checked.
    Sound { instances: usize },
    Unsound(Box<RuleInstance>),
    /// Nothing to evaluate: the rule uses an uninterpreted operator.
    Skipped(EvalError),
}

impl Soundness {
    pub fn is_sound(&self) -> bool {
        matches!(self, Soundness::Sound { .. })
    }
}

const CONCRETE: [Ty; 3] = [Ty::Nat, Ty::Int, Ty::Rat];

/// Concrete instances of `eq`: every choice of `nat`, `int` or `rat` for
/// its type variables and for the type of each term variable, kept when it
/// typechecks. Term variables become free variables of the same name.
pub fn rule_instances(eq: &Equation, env: &TypeEnv) -> Vec<(Expr, Expr, Vec<Expr>)> {
    let term_metas: Vec<Arc<str>> = eq.lhs.term_metas().into_iter().collect();
    let type_metas: Vec<Arc<str>> = eq.lhs.type_metas().union(&eq.rhs.type_metas()).cloned().collect();
    let slots = term_metas.len() + type_metas.len();
    let mut out = Vec::new();
    for code in 0..3usize.pow(slots as u32) {
        let mut digits = (0..slots).scan(code, |c, _| {
            let d = *c % 3;
            *c /= 3;
            Some(CONCRETE[d].clone())
        });
        let mut s = Subst::new();
        for m in &term_metas {
            s.terms.insert(m.clone(), Expr::Var { name: m.clone(), ty: digits.next().unwrap() });
        }
        for m in &type_metas {
            s.types.insert(m.clone(), digits.next().unwrap());
        }
        let inst = |p| instantiate(p, &s, env).ok();
        let (Some(lhs), Some(rhs)) = (inst(&eq.lhs), inst(&eq.rhs)) else {
            continue;
        };
        if lhs.ty() != rhs.ty() {
            continue;
        }
        // The instance must be one the rule would actually rewrite.
        if match_pattern(&eq.lhs, &lhs).is_none() || match_pattern(&eq.rhs, &rhs).is_none() {
            continue;
        }
        let Some(conds) = eq.conds.iter().map(inst).collect::<Option<Vec<_>>>() else {
            continue;
        };
        let concrete = |e: Expr| {
            if e.mentions_user_type() {
                abstract_instantiate(&e, &Ty::Rat, env).ok()
            } else {
                Some(e)
            }
        };
        let (Some(lhs), Some(rhs)) = (concrete(lhs), concrete(rhs)) else {
            continue;
        };
        let Some(conds) = conds.into_iter().map(concrete).collect::<Option<Vec<_>>>() else {
            continue;
        };
        if !out.iter().any(|(l, r, _)| *l == lhs && *r == rhs) {
            out.push((lhs, rhs, conds));
        }
    }
    out
}

/// Checks every concrete instance of `eq` with its side conditions as
/// hypotheses.
pub fn check_rule_sound(eq: &Equation, env: &TypeEnv, hi: u32, exec: Exec) -> Result<Soundness, EvalError> {
    if eq.lhs.contains_user_op() || eq.rhs.contains_user_op() {
        let err = EvalError::UnknownUserOp(eq.name.to_string());
        log::warn!("rule `{}` skipped: {err}", eq.name);
        return Ok(Soundness::Skipped(err));
    }
    let instances = rule_instances(eq, env);
    for (lhs, rhs, conds) in &instances {
        let ctx = Context::new(conds.clone());
        let verdict = check_equiv_exhaustive(lhs, rhs, &ctx, hi, exec)?;
        if !verdict.is_equivalent() {
            return Ok(Soundness::Unsound(Box::new(RuleInstance {
                lhs: lhs.clone(),
                rhs: rhs.clone(),
                conds: conds.clone(),
                verdict,
            })));
        }
    }
    Ok(Soundness::Sound { instances: instances.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{parse_rule_line, RuleDb, RuleItem};
    use crate::term::{parse_expr, Pos};

    fn env() -> TypeEnv {
        let mut env = TypeEnv::stdlib();
        env.declare_var("m", &Ty::Nat).unwrap();
        env.declare_var("n", &Ty::Nat).unwrap();
        env
    }

    #[test]
    fn domains() {
        assert_eq!(domain(&Ty::Nat, 4).unwrap().len(), 5);
        assert_eq!(domain(&Ty::Int, 4).unwrap().len(), 9);
        // p/q with |p| <= 4, 1 <= q <= 4 has 23 distinct values.
        assert_eq!(domain(&Ty::Rat, 4).unwrap().len(), 23);
        assert!(domain(&Ty::user("alpha"), 4).is_err());
    }

    #[test]
    fn truncation_counterexample() {
        let env = env();
        let a = parse_expr("cast(int, m - n)", &env).unwrap();
        let b = parse_expr("cast(int, m) - cast(int, n)", &env).unwrap();
        let ctx = Context::new(vec![parse_expr("n <= m", &env).unwrap()]);
        for &exec in Exec::all() {
            assert_eq!(check_equiv_exhaustive(&a, &b, &ctx, 4, exec).unwrap(), Verdict::Equivalent);
            let Verdict::Counterexample(asg) = check_equiv_exhaustive(&a, &b, &Context::empty(), 1, exec).unwrap() else {
                panic!("expected a counterexample");
            };
            assert_eq!(asg.to_string(), "m=0, n=1");
        }
    }

    #[test]
    fn prelude_is_sound() {
        let env = TypeEnv::stdlib();
        for r in RuleDb::prelude().rules() {
            let s = check_rule_sound(r, &env, 2, Exec::default()).unwrap();
            assert!(s.is_sound(), "{}: {s:?}", r.name);
        }
    }

    #[test]
    fn unconditional_nat_sub_is_unsound() {
        let env = TypeEnv::stdlib();
        let line = "rule bad_sub : cast(nat -> 'T, ?a - ?b) = cast(nat -> 'T, ?a) - cast(nat -> 'T, ?b)";
        let RuleItem::Rule(r) = parse_rule_line(line, Pos::default(), &env).unwrap() else {
            panic!()
        };
        assert!(matches!(check_rule_sound(&r, &env, 2, Exec::Sequential).unwrap(), Soundness::Unsound(_)));
    }

    #[test]
    fn alpha_instantiates_at_rat() {
        let mut env = env();
        let alpha = env.declare_type("alpha").unwrap();
        env.declare_coercion(&Ty::Nat, &alpha).unwrap();
        let e = parse_expr("cast(alpha, n) < 5:alpha", &env).unwrap();
        let r = abstract_instantiate(&e, &Ty::Rat, &env).unwrap();
        assert_eq!(r.to_string(), "cast(rat, n) < 5:rat");
        let e = parse_expr("cast(int, n)", &env).unwrap();
        assert_eq!(abstract_instantiate(&e, &Ty::Rat, &env).unwrap(), e);
    }
}
