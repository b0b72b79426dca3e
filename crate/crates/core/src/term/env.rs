use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use super::expr::{Expr, Op, OpKind, UserOp};
use super::ty::Ty;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("type `{0}` is already declared")]
    DuplicateType(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("coercion {0} -> {0} would be a self-loop")]
    SelfCoercion(String),
    #[error("`prop` cannot take part in a coercion")]
    PropCoercion,
    #[error("coercion {src} -> {dst} would close a cycle")]
    CoercionCycle { src: String, dst: String },
    #[error("operator `{0}` is already declared")]
    DuplicateOp(String),
    #[error("operator `{0}` must take at least one argument")]
    NullaryOp(String),
    #[error("variable `{0}` is already declared")]
    DuplicateVar(String),
    #[error("variables cannot have type `prop`")]
    PropVariable,
    #[error("`{0}` is a reserved word")]
    Reserved(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("variable `{name}` is declared at {declared}, used at {used}")]
    VariableTypeMismatch { name: String, declared: Ty, used: Ty },
    #[error("ill-typed application of `{op}`: {detail}")]
    IllTypedApplication { op: String, detail: String },
    #[error("invalid cast {src} -> {dst}: {reason}")]
    InvalidCast { src: Ty, dst: Ty, reason: String },
    #[error("numerals cannot have type `prop`")]
    PropNumeral,
}

/// The declared coercion edges together with their transitive closure.
/// Edges always form a DAG; a composite cast is identified by its endpoints.
#[derive(Clone, Debug, Default)]
pub struct CoercionGraph {
    edges: BTreeSet<(Ty, Ty)>,
    reach: BTreeMap<Ty, BTreeSet<Ty>>,
}

impl CoercionGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn edges(&self) -> impl Iterator<Item = &(Ty, Ty)> {
        self.edges.iter()
    }

    /// Adds a base edge, rejecting self-loops, `prop` and cycles.
    /// Re-adding an existing edge is a no-op.
    pub fn add_edge(&mut self, src: Ty, dst: Ty) -> Result<(), EnvError> {
        if src.is_prop() || dst.is_prop() {
            return Err(EnvError::PropCoercion);
        }
        if src == dst {
            return Err(EnvError::SelfCoercion(src.to_string()));
        }
        if self.exists(&dst, &src) {
            return Err(EnvError::CoercionCycle { src: src.to_string(), dst: dst.to_string() });
        }
        if self.edges.insert((src.clone(), dst.clone())) {
            // Everything reaching `src` (and `src` itself) now reaches
            // `dst` and everything `dst` reaches.
            let mut gained: BTreeSet<Ty> = self.reach.get(&dst).cloned().unwrap_or_default();
            gained.insert(dst);
            let mut sources: Vec<Ty> =
                self.reach.iter().filter(|(_, r)| r.contains(&src)).map(|(s, _)| s.clone()).collect();
            sources.push(src);
            for s in sources {
                self.reach.entry(s).or_default().extend(gained.iter().cloned());
            }
        }
        Ok(())
    }

    /// Whether a (possibly composite) coercion `src -> dst` exists.
    pub fn exists(&self, src: &Ty, dst: &Ty) -> bool {
        src != dst && self.reach.get(src).is_some_and(|r| r.contains(dst))
    }

    /// Every type reachable from `src`, in type order.
    pub fn targets(&self, src: &Ty) -> impl Iterator<Item = &Ty> {
        self.reach.get(src).into_iter().flatten()
    }
}

/// Declared types, coercions, operators and variable typings.
#[derive(Clone, Debug)]
pub struct TypeEnv {
    user_types: BTreeSet<Arc<str>>,
    graph: CoercionGraph,
    ops: BTreeMap<Arc<str>, UserOp>,
    vars: BTreeMap<Arc<str>, Ty>,
}

const RESERVED: &[&str] = &[
    "cast", "dvd", "type", "coe", "op", "var", "rule", "lemma", "fun", "rel", "nat", "int",
    "rat", "prop",
];

impl Default for TypeEnv {
    fn default() -> Self {
        Self::stdlib()
    }
}

impl TypeEnv {
    /// An environment without any coercions.
    pub fn empty() -> Self {
        TypeEnv {
            user_types: BTreeSet::new(),
            graph: CoercionGraph::new(),
            ops: BTreeMap::new(),
            vars: BTreeMap::new(),
        }
    }

    /// The standard numeric tower `nat -> int -> rat`.
    pub fn stdlib() -> Self {
        let mut env = Self::empty();
        env.graph.add_edge(Ty::Nat, Ty::Int).expect("stdlib edge");
        env.graph.add_edge(Ty::Int, Ty::Rat).expect("stdlib edge");
        env
    }

    pub fn graph(&self) -> &CoercionGraph {
        &self.graph
    }

    pub fn declare_type(&mut self, name: &str) -> Result<Ty, EnvError> {
        check_not_reserved(name)?;
        if !self.user_types.insert(Arc::from(name)) {
            return Err(EnvError::DuplicateType(name.to_string()));
        }
        Ok(Ty::user(name))
    }

    pub fn declare_coercion(&mut self, src: &Ty, dst: &Ty) -> Result<(), EnvError> {
        self.check_known(src)?;
        self.check_known(dst)?;
        self.graph.add_edge(src.clone(), dst.clone())
    }

    pub fn declare_op(&mut self, name: &str, arity: usize, kind: OpKind) -> Result<Op, EnvError> {
        check_not_reserved(name)?;
        if arity == 0 {
            return Err(EnvError::NullaryOp(name.to_string()));
        }
        if self.ops.contains_key(name) {
            return Err(EnvError::DuplicateOp(name.to_string()));
        }
        let op = UserOp { name: Arc::from(name), arity, kind };
        self.ops.insert(op.name.clone(), op.clone());
        Ok(Op::User(op))
    }

    pub fn declare_var(&mut self, name: &str, ty: &Ty) -> Result<(), EnvError> {
        check_not_reserved(name)?;
        self.check_known(ty)?;
        if ty.is_prop() {
            return Err(EnvError::PropVariable);
        }
        if self.vars.contains_key(name) {
            return Err(EnvError::DuplicateVar(name.to_string()));
        }
        self.vars.insert(Arc::from(name), ty.clone());
        Ok(())
    }

    pub fn resolve_type(&self, name: &str) -> Result<Ty, EnvError> {
        if let Some(ty) = Ty::builtin(name) {
            return Ok(ty);
        }
        self.user_types
            .get(name)
            .map(|n| Ty::User(n.clone()))
            .ok_or_else(|| EnvError::UnknownType(name.to_string()))
    }

    pub fn user_types(&self) -> impl Iterator<Item = Ty> + '_ {
        self.user_types.iter().map(|n| Ty::User(n.clone()))
    }

    pub fn op(&self, name: &str) -> Option<Op> {
        self.ops.get(name).cloned().map(Op::User)
    }

    pub fn ops(&self) -> impl Iterator<Item = &UserOp> {
        self.ops.values()
    }

    pub fn var(&self, name: &str) -> Option<Expr> {
        self.vars.get_key_value(name).map(|(n, ty)| Expr::Var { name: n.clone(), ty: ty.clone() })
    }

    pub fn vars(&self) -> impl Iterator<Item = (&str, &Ty)> {
        self.vars.iter().map(|(n, t)| (n.as_ref(), t))
    }

    pub fn coercion_exists(&self, src: &Ty, dst: &Ty) -> bool {
        self.graph.exists(src, dst)
    }

    fn check_known(&self, ty: &Ty) -> Result<(), EnvError> {
        match ty {
            Ty::User(name) if !self.user_types.contains(name) => {
                Err(EnvError::UnknownType(name.to_string()))
            }
            _ => Ok(()),
        }
    }

    /// Checks `e` against the declarations and returns its type.
    pub fn type_of(&self, e: &Expr) -> Result<Ty, TypeError> {
        match e {
            Expr::Var { name, ty } => match self.vars.get(name) {
                None => Err(TypeError::UndeclaredVariable(name.to_string())),
                Some(declared) if declared != ty => Err(TypeError::VariableTypeMismatch {
                    name: name.to_string(),
                    declared: declared.clone(),
                    used: ty.clone(),
                }),
                Some(_) => Ok(ty.clone()),
            },
            Expr::Num { ty, .. } => {
                if ty.is_prop() {
                    Err(TypeError::PropNumeral)
                } else {
                    Ok(ty.clone())
                }
            }
            Expr::Cast { src, dst, body } => {
                let inner = self.type_of(body)?;
                self.check_cast(src, dst, &inner)?;
                Ok(dst.clone())
            }
            Expr::App { op, args } => {
                let tys = args.iter().map(|a| self.type_of(a)).collect::<Result<Vec<_>, _>>()?;
                if let Op::User(u) = op {
                    if self.ops.get(&u.name) != Some(u) {
                        return Err(TypeError::IllTypedApplication {
                            op: u.name.to_string(),
                            detail: "operator is not declared".into(),
                        });
                    }
                }
                app_type(op, &tys)
            }
        }
    }

    pub(crate) fn check_cast(&self, src: &Ty, dst: &Ty, body_ty: &Ty) -> Result<(), TypeError> {
        let fail = |reason: &str| TypeError::InvalidCast {
            src: src.clone(),
            dst: dst.clone(),
            reason: reason.to_string(),
        };
        if body_ty != src {
            return Err(fail(&format!("body has type {body_ty}")));
        }
        if src == dst {
            return Err(fail("source and target coincide"));
        }
        if !self.coercion_exists(src, dst) {
            return Err(fail("no coercion between these types"));
        }
        Ok(())
    }
}

/// Result type of `op` applied to arguments of the given types.
pub fn app_type(op: &Op, tys: &[Ty]) -> Result<Ty, TypeError> {
    let fail = |detail: String| TypeError::IllTypedApplication { op: op.name().to_string(), detail };
    if tys.len() != op.arity() {
        return Err(fail(format!("expected {} arguments, got {}", op.arity(), tys.len())));
    }
    let first = &tys[0];
    if let Some(other) = tys.iter().find(|t| *t != first) {
        return Err(fail(format!("arguments disagree: {first} vs {other}")));
    }
    if !op.admits(first) {
        return Err(fail(format!("not defined at type {first}")));
    }
    Ok(match op.kind() {
        OpKind::Fun => first.clone(),
        OpKind::Rel => Ty::Prop,
    })
}

fn check_not_reserved(name: &str) -> Result<(), EnvError> {
    if RESERVED.contains(&name) {
        Err(EnvError::Reserved(name.to_string()))
    } else {
        Ok(())
    }
}
