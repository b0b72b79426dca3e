use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{app_type, Expr, Ty, TypeEnv, TypeError};

use super::pattern::{Pattern, TyPat};

/// Bindings for term variables and type variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    pub terms: BTreeMap<Arc<str>, Expr>,
    pub types: BTreeMap<Arc<str>, Ty>,
}

impl Subst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(&self, name: &str) -> Option<&Expr> {
        self.terms.get(name)
    }

    pub fn ty(&self, name: &str) -> Option<&Ty> {
        self.types.get(name)
    }

    fn bind_ty(&mut self, pat: &TyPat, ty: &Ty) -> bool {
        match pat {
            TyPat::Ty(t) => t == ty,
            TyPat::Meta(name) => match self.types.get(name) {
                Some(bound) => bound == ty,
                None => {
                    self.types.insert(name.clone(), ty.clone());
                    true
                }
            },
        }
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .types
            .iter()
            .map(|(k, v)| format!("'{k} := {v}"))
            .chain(self.terms.iter().map(|(k, v)| format!("?{k} := {v}")))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// First-order matching of `pat` against `e`. Repeated term variables must
/// bind syntactically equal subterms; term variables never bind
/// propositions.
pub fn match_pattern(pat: &Pattern, e: &Expr) -> Option<Subst> {
    let mut s = Subst::new();
    match_into(pat, e, &mut s).then_some(s)
}

/// Matching that extends an existing substitution.
pub fn match_into(pat: &Pattern, e: &Expr, s: &mut Subst) -> bool {
    match (pat, e) {
        (Pattern::Meta { name, ty }, _) => {
            let ety = e.ty();
            if ety.is_prop() {
                return false;
            }
            if let Some(t) = ty {
                if !s.bind_ty(t, &ety) {
                    return false;
                }
            }
            match s.terms.get(name) {
                Some(bound) => bound == e,
                None => {
                    s.terms.insert(name.clone(), e.clone());
                    true
                }
            }
        }
        (Pattern::Num { value, ty }, Expr::Num { value: v, ty: t }) => {
            value == v && s.bind_ty(ty, t)
        }
        (Pattern::App { op, args }, Expr::App { op: o, args: a }) => {
            op == o
                && args.len() == a.len()
                && args.iter().zip(a).all(|(p, x)| match_into(p, x, s))
        }
        (Pattern::Cast { src, dst, body }, Expr::Cast { src: es, dst: ed, body: eb }) => {
            src.as_ref().is_none_or(|p| s.bind_ty(p, es))
                && s.bind_ty(dst, ed)
                && match_into(body, eb, s)
        }
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("pattern variable `?{0}` is unbound")]
    UnboundTerm(String),
    #[error("type variable `'{0}` is unbound")]
    UnboundType(String),
    #[error("instance is ill-typed: {0}")]
    IllTyped(#[from] TypeError),
}

fn resolve(t: &TyPat, s: &Subst) -> Result<Ty, InstantiateError> {
    match t {
        TyPat::Ty(t) => Ok(t.clone()),
        TyPat::Meta(n) => s.types.get(n).cloned().ok_or_else(|| InstantiateError::UnboundType(n.to_string())),
    }
}

/// Builds `pat` under `s`, checking every application and cast against
/// `env`. A cast whose endpoints have no coercion is an error, which callers
/// treat as "rule does not apply here".
pub fn instantiate(pat: &Pattern, s: &Subst, env: &TypeEnv) -> Result<Expr, InstantiateError> {
    match pat {
        Pattern::Meta { name, ty } => {
            let e = s.terms.get(name).cloned().ok_or_else(|| InstantiateError::UnboundTerm(name.to_string()))?;
            if let Some(t) = ty {
                let want = resolve(t, s)?;
                if e.ty() != want {
                    return Err(TypeError::IllTypedApplication {
                        op: format!("?{name}"),
                        detail: format!("bound to a term of type {}, expected {want}", e.ty()),
                    }
                    .into());
                }
            }
            Ok(e)
        }
        Pattern::Num { value, ty } => {
            let ty = resolve(ty, s)?;
            if ty.is_prop() {
                return Err(TypeError::PropNumeral.into());
            }
            Ok(Expr::Num { value: value.clone(), ty })
        }
        Pattern::App { op, args } => {
            let args = args.iter().map(|a| instantiate(a, s, env)).collect::<Result<Vec<_>, _>>()?;
            let tys: Vec<Ty> = args.iter().map(Expr::ty).collect();
            app_type(op, &tys)?;
            Ok(Expr::App { op: op.clone(), args })
        }
        Pattern::Cast { src, dst, body } => {
            let body = instantiate(body, s, env)?;
            let inner = body.ty();
            let src = match src {
                Some(p) => resolve(p, s)?,
                None => inner.clone(),
            };
            let dst = resolve(dst, s)?;
            env.check_cast(&src, &dst, &inner)?;
            Ok(Expr::cast(src, dst, body))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{syntax::parse_ast, Op, Pos};

    fn env() -> TypeEnv {
        let mut env = TypeEnv::stdlib();
        for (v, t) in [("m", Ty::Nat), ("n", Ty::Nat), ("z", Ty::Int)] {
            env.declare_var(v, &t).unwrap();
        }
        env
    }

    fn pat(src: &str) -> Pattern {
        Pattern::from_ast(&parse_ast(src, Pos::default()).unwrap(), &env()).unwrap()
    }

    fn expr(src: &str) -> Expr {
        crate::term::parse_expr(src, &env()).unwrap()
    }

    #[test]
    fn cast_of_sum() {
        let s = match_pattern(&pat("cast('T, ?a + ?b)"), &expr("cast(int, m + n)")).unwrap();
        assert_eq!(s.ty("T"), Some(&Ty::Int));
        assert_eq!(s.term("a"), Some(&Expr::var("m", Ty::Nat)));
        assert_eq!(s.term("b"), Some(&Expr::var("n", Ty::Nat)));
    }

    #[test]
    fn concrete_source_must_agree() {
        assert!(match_pattern(&pat("cast(nat -> 'T, ?a)"), &expr("cast(rat, z)")).is_none());
    }

    #[test]
    fn nonlinear_variables() {
        let p = pat("?a + ?a");
        assert!(match_pattern(&p, &expr("m + n")).is_none());
        let s = match_pattern(&p, &expr("m + m")).unwrap();
        assert_eq!(s.terms.len(), 1);
        assert_eq!(s.term("a"), Some(&Expr::var("m", Ty::Nat)));
    }

    #[test]
    fn metas_do_not_bind_props() {
        let p = Pattern::meta("p");
        assert!(match_pattern(&p, &expr("m < n")).is_none());
    }

    #[test]
    fn instantiation_checks_coercions() {
        let env = env();
        let s = match_pattern(&pat("cast('T, ?a) < cast('T, ?b)"), &expr("cast(rat, m) < cast(rat, z)")).unwrap();
        let err = instantiate(&pat("?a < ?b"), &s, &env).unwrap_err();
        assert!(matches!(err, InstantiateError::IllTyped(_)));
        let s = match_pattern(&pat("?a"), &expr("z")).unwrap();
        assert!(instantiate(&pat("cast(nat, ?a)"), &s, &env).is_err());
        let ok = instantiate(&pat("cast(rat, ?a)"), &s, &env).unwrap();
        assert_eq!(ok, Expr::cast(Ty::Int, Ty::Rat, Expr::var("z", Ty::Int)));
        let unbound = instantiate(&pat("?c"), &s, &env).unwrap_err();
        assert_eq!(unbound, InstantiateError::UnboundTerm("c".into()));
        let neg = instantiate(&Pattern::App { op: Op::Neg, args: vec![pat("?a")] }, &s, &env);
        assert!(neg.is_ok());
    }

    #[test]
    fn typed_metas() {
        let p = pat("?a:'T + ?a");
        let s = match_pattern(&p, &expr("z + z")).unwrap();
        assert_eq!(s.ty("T"), Some(&Ty::Int));
        assert!(match_pattern(&pat("?a:nat"), &expr("z")).is_none());
    }
}
