use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use super::ty::Ty;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    /// All arguments share a type `T`; the result is `T`.
    Fun,
    /// All arguments share a type `T`; the result is `prop`.
    Rel,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UserOp {
    pub name: Arc<str>,
    pub arity: usize,
    pub kind: OpKind,
}

/// Operator symbols. Every operator is polymorphic over the (shared) type
/// of its arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Neg,
    Lt,
    Le,
    Eq,
    Ne,
    Dvd,
    User(UserOp),
}

impl Op {
    pub fn arity(&self) -> usize {
        match self {
            Op::Neg => 1,
            Op::User(u) => u.arity,
            _ => 2,
        }
    }

    pub fn kind(&self) -> OpKind {
        match self {
            Op::Add | Op::Sub | Op::Mul | Op::Neg => OpKind::Fun,
            Op::Lt | Op::Le | Op::Eq | Op::Ne | Op::Dvd => OpKind::Rel,
            Op::User(u) => u.kind,
        }
    }

    pub fn is_relation(&self) -> bool {
        self.kind() == OpKind::Rel
    }

    pub fn name(&self) -> &str {
        match self {
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Neg => "neg",
            Op::Lt => "lt",
            Op::Le => "le",
            Op::Eq => "eq",
            Op::Ne => "ne",
            Op::Dvd => "dvd",
            Op::User(u) => &u.name,
        }
    }

    /// Surface spelling for the infix operators.
    pub fn symbol(&self) -> Option<&'static str> {
        Some(match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Neg => "-",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Eq => "=",
            Op::Ne => "!=",
            Op::Dvd => "dvd",
            Op::User(_) => return None,
        })
    }

    /// Whether the operator may be applied at argument type `ty`.
    /// Builtin types keep their arithmetic honest (no negation on `nat`);
    /// user types accept every operator.
    pub fn admits(&self, ty: &Ty) -> bool {
        !matches!((self, ty), (_, Ty::Prop) | (Op::Neg, Ty::Nat))
    }
}

/// A typed expression tree. Types are carried on the leaves and on casts,
/// so the type of any node is computable without an environment.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var { name: Arc<str>, ty: Ty },
    Num { value: BigUint, ty: Ty },
    App { op: Op, args: Vec<Expr> },
    Cast { src: Ty, dst: Ty, body: Box<Expr> },
}

impl Expr {
    pub fn var(name: &str, ty: Ty) -> Expr {
        Expr::Var { name: Arc::from(name), ty }
    }

    pub fn num(value: impl Into<BigUint>, ty: Ty) -> Expr {
        Expr::Num { value: value.into(), ty }
    }

    pub fn app(op: Op, args: Vec<Expr>) -> Expr {
        Expr::App { op, args }
    }

    pub fn binary(op: Op, lhs: Expr, rhs: Expr) -> Expr {
        Expr::App { op, args: vec![lhs, rhs] }
    }

    pub fn cast(src: Ty, dst: Ty, body: Expr) -> Expr {
        Expr::Cast { src, dst, body: Box::new(body) }
    }

    /// Structural type of a node, assuming it is well typed. Use
    /// [`crate::term::TypeEnv::type_of`] to validate.
    pub fn ty(&self) -> Ty {
        match self {
            Expr::Var { ty, .. } | Expr::Num { ty, .. } => ty.clone(),
            Expr::Cast { dst, .. } => dst.clone(),
            Expr::App { op, args } => match op.kind() {
                super::OpKind::Rel => Ty::Prop,
                super::OpKind::Fun => args.first().map(Expr::ty).unwrap_or(Ty::Prop),
            },
        }
    }

    pub fn children(&self) -> &[Expr] {
        match self {
            Expr::App { args, .. } => args,
            Expr::Cast { body, .. } => std::slice::from_ref(body.as_ref()),
            _ => &[],
        }
    }

    pub fn children_mut(&mut self) -> &mut [Expr] {
        match self {
            Expr::App { args, .. } => args,
            Expr::Cast { body, .. } => std::slice::from_mut(body.as_mut()),
            _ => &mut [],
        }
    }

    pub fn at(&self, path: &[usize]) -> Option<&Expr> {
        let mut node = self;
        for &i in path {
            node = node.children().get(i)?;
        }
        Some(node)
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Expr> {
        let mut node = self;
        for &i in path {
            node = node.children_mut().get_mut(i)?;
        }
        Some(node)
    }

    /// Returns a copy with the node at `path` replaced.
    pub fn replace_at(&self, path: &[usize], new: Expr) -> Option<Expr> {
        let mut out = self.clone();
        *out.at_mut(path)? = new;
        Some(out)
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Expr::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(Expr::depth).max().unwrap_or(0)
    }

    /// Free variables in first-occurrence order, without duplicates.
    pub fn vars(&self) -> Vec<(Arc<str>, Ty)> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<(Arc<str>, Ty)>) {
        match self {
            Expr::Var { name, ty } => {
                if !out.iter().any(|(n, _)| n == name) {
                    out.push((name.clone(), ty.clone()));
                }
            }
            _ => self.children().iter().for_each(|c| c.collect_vars(out)),
        }
    }

    pub fn contains_user_op(&self) -> bool {
        match self {
            Expr::App { op: Op::User(_), .. } => true,
            _ => self.children().iter().any(Expr::contains_user_op),
        }
    }

    pub fn mentions_user_type(&self) -> bool {
        match self {
            Expr::Var { ty, .. } | Expr::Num { ty, .. } => ty.is_user(),
            Expr::Cast { src, dst, body } => {
                src.is_user() || dst.is_user() || body.mentions_user_type()
            }
            Expr::App { args, .. } => args.iter().any(Expr::mentions_user_type),
        }
    }

    pub fn count_casts(&self) -> CastCount {
        let mut head = 0;
        let mut node = self;
        while let Expr::Cast { body, .. } = node {
            head += 1;
            node = body;
        }
        CastCount { head, internal: self.total_casts() - head }
    }

    pub fn total_casts(&self) -> usize {
        let own = usize::from(matches!(self, Expr::Cast { .. }));
        own + self.children().iter().map(Expr::total_casts).sum::<usize>()
    }
}

/// Head casts sit on the root spine (`cast(cast(x))` has two); every other
/// cast is internal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CastCount {
    pub head: usize,
    pub internal: usize,
}

impl fmt::Display for CastCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HC={}, IC={}", self.head, self.internal)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}
