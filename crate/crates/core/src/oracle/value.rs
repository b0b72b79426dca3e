use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::term::{Expr, Op, Ty};

/// A concrete value. Rationals are kept in lowest terms with a positive
/// denominator by `BigRational` itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Nat(BigUint),
    Int(BigInt),
    Rat(BigRational),
    Bool(bool),
}

impl Value {
    pub fn ty(&self) -> Ty {
        match self {
            Value::Nat(_) => Ty::Nat,
            Value::Int(_) => Ty::Int,
            Value::Rat(_) => Ty::Rat,
            Value::Bool(_) => Ty::Prop,
        }
    }

    /// The embedding of a numeral into `ty`.
    pub fn numeral(v: &BigUint, ty: &Ty) -> Result<Value, EvalError> {
        let i = BigInt::from(v.clone());
        match ty {
            Ty::Nat => Ok(Value::Nat(v.clone())),
            Ty::Int => Ok(Value::Int(i)),
            Ty::Rat => Ok(Value::Rat(BigRational::from_integer(i))),
            other => Err(EvalError::AbstractTypePresent(other.clone())),
        }
    }

    fn as_rat(&self) -> Option<BigRational> {
        match self {
            Value::Nat(n) => Some(BigRational::from_integer(BigInt::from(n.clone()))),
            Value::Int(i) => Some(BigRational::from_integer(i.clone())),
            Value::Rat(r) => Some(r.clone()),
            Value::Bool(_) => None,
        }
    }

    /// Inclusion into `dst`.
    pub fn embed(&self, dst: &Ty) -> Result<Value, EvalError> {
        let bad = || EvalError::BadCast { value: self.clone(), dst: dst.clone() };
        match (self, dst) {
            (Value::Nat(n), Ty::Int) => Ok(Value::Int(BigInt::from(n.clone()))),
            (Value::Nat(_) | Value::Int(_), Ty::Rat) => Ok(Value::Rat(self.as_rat().ok_or_else(bad)?)),
            (_, Ty::User(_)) => Err(EvalError::AbstractTypePresent(dst.clone())),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Rat(r) => write!(f, "{r}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("type {0} has no concrete semantics; instantiate it first")]
    AbstractTypePresent(Ty),
    #[error("operator `{0}` is uninterpreted")]
    UnknownUserOp(String),
    #[error("variable `{0}` is unassigned")]
    Unassigned(String),
    #[error("cannot embed {value} into {dst}")]
    BadCast { value: Value, dst: Ty },
    #[error("`{op}` is not defined on these arguments")]
    BadArguments { op: String },
}

/// Values for variables, keyed by name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment(pub BTreeMap<Arc<str>, Value>);

impl Assignment {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: &str, v: Value) {
        self.0.insert(Arc::from(name), v);
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(", "))
    }
}

/// Fails early on anything `eval` cannot give meaning to.
pub fn check_evaluable(e: &Expr) -> Result<(), EvalError> {
    match e {
        Expr::Var { ty, .. } | Expr::Num { ty, .. } if ty.is_user() => Err(EvalError::AbstractTypePresent(ty.clone())),
        Expr::Cast { dst, .. } if dst.is_user() => Err(EvalError::AbstractTypePresent(dst.clone())),
        Expr::App { op: Op::User(u), .. } => Err(EvalError::UnknownUserOp(u.name.to_string())),
        _ => e.children().iter().try_for_each(check_evaluable),
    }
}

/// Evaluates `e` under `a`. Natural subtraction truncates at zero; `dvd` is
/// divisibility on `nat` and `int` and the field reading (`a != 0 or b = 0`)
/// on `rat`.
pub fn eval(e: &Expr, a: &Assignment) -> Result<Value, EvalError> {
    match e {
        Expr::Var { name, ty } => {
            if ty.is_user() {
                return Err(EvalError::AbstractTypePresent(ty.clone()));
            }
            a.get(name).cloned().ok_or_else(|| EvalError::Unassigned(name.to_string()))
        }
        Expr::Num { value, ty } => Value::numeral(value, ty),
        Expr::Cast { dst, body, .. } => eval(body, a)?.embed(dst),
        Expr::App { op, args } => {
            let vals = args.iter().map(|x| eval(x, a)).collect::<Result<Vec<_>, _>>()?;
            apply(op, &vals)
        }
    }
}

fn apply(op: &Op, vals: &[Value]) -> Result<Value, EvalError> {
    use Value::{Bool, Int, Nat, Rat};
    let bad = || EvalError::BadArguments { op: op.name().to_string() };
    if let Op::User(u) = op {
        return Err(EvalError::UnknownUserOp(u.name.to_string()));
    }
    if let [x] = vals {
        return match (op, x) {
            (Op::Neg, Int(i)) => Ok(Int(-i)),
            (Op::Neg, Rat(r)) => Ok(Rat(-r)),
            _ => Err(bad()),
        };
    }
    let [x, y] = vals else {
        return Err(bad());
    };
    let v = match (op, x, y) {
        (Op::Add, Nat(a), Nat(b)) => Nat(a + b),
        (Op::Add, Int(a), Int(b)) => Int(a + b),
        (Op::Add, Rat(a), Rat(b)) => Rat(a + b),
        (Op::Sub, Nat(a), Nat(b)) => Nat(if a >= b { a - b } else { BigUint::zero() }),
        (Op::Sub, Int(a), Int(b)) => Int(a - b),
        (Op::Sub, Rat(a), Rat(b)) => Rat(a - b),
        (Op::Mul, Nat(a), Nat(b)) => Nat(a * b),
        (Op::Mul, Int(a), Int(b)) => Int(a * b),
        (Op::Mul, Rat(a), Rat(b)) => Rat(a * b),
        (Op::Dvd, Nat(a), Nat(b)) => Bool(if a.is_zero() { b.is_zero() } else { b.is_multiple_of(a) }),
        (Op::Dvd, Int(a), Int(b)) => Bool(if a.is_zero() { b.is_zero() } else { b.abs().is_multiple_of(&a.abs()) }),
        (Op::Dvd, Rat(a), Rat(b)) => Bool(!a.is_zero() || b.is_zero()),
        (Op::Eq, a, b) if a.ty() == b.ty() => Bool(a == b),
        (Op::Ne, a, b) if a.ty() == b.ty() => Bool(a != b),
        (Op::Lt | Op::Le, Bool(_), _) => return Err(bad()),
        (Op::Lt, a, b) if a.ty() == b.ty() => Bool(a < b),
        (Op::Le, a, b) if a.ty() == b.ty() => Bool(a <= b),
        _ => return Err(bad()),
    };
    Ok(v)
}
