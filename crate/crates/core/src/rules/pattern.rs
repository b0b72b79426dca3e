use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::term::pretty::{render, Printable, View};
use crate::term::syntax::{Ast, Pos, TyAnn};
use crate::term::{bin_op, CastCount, Op, Ty, TypeEnv};

use super::RuleError;

/// A type position in a pattern: either fixed or a type variable `'T`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TyPat {
    Ty(Ty),
    Meta(Arc<str>),
}

impl fmt::Display for TyPat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TyPat::Ty(t) => write!(f, "{t}"),
            TyPat::Meta(n) => write!(f, "'{n}"),
        }
    }
}

/// The left or right side of a rewrite rule. Mirrors [`crate::term::Expr`]
/// with term variables `?x` and type variables `'T`. A cast pattern without
/// an explicit source takes its source from the type of its body.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Meta { name: Arc<str>, ty: Option<TyPat> },
    Num { value: BigUint, ty: TyPat },
    App { op: Op, args: Vec<Pattern> },
    Cast { src: Option<TyPat>, dst: TyPat, body: Box<Pattern> },
}

impl Pattern {
    pub fn meta(name: &str) -> Pattern {
        Pattern::Meta { name: Arc::from(name), ty: None }
    }

    pub fn cast_to(dst: TyPat, body: Pattern) -> Pattern {
        Pattern::Cast { src: None, dst, body: Box::new(body) }
    }

    pub fn binary(op: Op, l: Pattern, r: Pattern) -> Pattern {
        Pattern::App { op, args: vec![l, r] }
    }

    pub fn children(&self) -> &[Pattern] {
        match self {
            Pattern::App { args, .. } => args,
            Pattern::Cast { body, .. } => std::slice::from_ref(body.as_ref()),
            _ => &[],
        }
    }

    /// Whether the pattern denotes a proposition (its root is a relation).
    pub fn is_prop(&self) -> bool {
        matches!(self, Pattern::App { op, .. } if op.is_relation())
    }

    /// Head/internal cast counts; term variables count as cast-free leaves.
    pub fn count_casts(&self) -> CastCount {
        let mut head = 0;
        let mut node = self;
        while let Pattern::Cast { body, .. } = node {
            head += 1;
            node = body;
        }
        CastCount { head, internal: self.total_casts() - head }
    }

    fn total_casts(&self) -> usize {
        let own = usize::from(matches!(self, Pattern::Cast { .. }));
        own + self.children().iter().map(Pattern::total_casts).sum::<usize>()
    }

    pub fn term_metas(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.walk(&mut |p| {
            if let Pattern::Meta { name, .. } = p {
                out.insert(name.clone());
            }
        });
        out
    }

    pub fn type_metas(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        let mut add = |t: &TyPat| {
            if let TyPat::Meta(n) = t {
                out.insert(n.clone());
            }
        };
        self.walk(&mut |p| match p {
            Pattern::Meta { ty: Some(t), .. } | Pattern::Num { ty: t, .. } => add(t),
            Pattern::Cast { src, dst, .. } => {
                if let Some(s) = src {
                    add(s);
                }
                add(dst);
            }
            _ => {}
        });
        out
    }

    /// Concrete types mentioned anywhere in the pattern.
    pub fn concrete_types(&self) -> BTreeSet<Ty> {
        let mut out = BTreeSet::new();
        let mut add = |t: &TyPat| {
            if let TyPat::Ty(t) = t {
                out.insert(t.clone());
            }
        };
        self.walk(&mut |p| match p {
            Pattern::Meta { ty: Some(t), .. } | Pattern::Num { ty: t, .. } => add(t),
            Pattern::Cast { src, dst, .. } => {
                if let Some(s) = src {
                    add(s);
                }
                add(dst);
            }
            _ => {}
        });
        out
    }

    pub fn contains_user_op(&self) -> bool {
        let mut found = false;
        self.walk(&mut |p| found |= matches!(p, Pattern::App { op: Op::User(_), .. }));
        found
    }

    fn walk(&self, f: &mut dyn FnMut(&Pattern)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Builds a pattern from parsed syntax. Bare identifiers are rejected:
    /// rules only mention pattern variables.
    pub fn from_ast(ast: &Ast, env: &TypeEnv) -> Result<Pattern, RuleError> {
        let resolve = |ann: &TyAnn, pos: Pos| -> Result<TyPat, RuleError> {
            match ann {
                TyAnn::Meta(n) => Ok(TyPat::Meta(Arc::from(n.as_str()))),
                TyAnn::Named(n) => env
                    .resolve_type(n)
                    .map(TyPat::Ty)
                    .map_err(|e| RuleError::Resolve { pos, msg: e.to_string() }),
            }
        };
        let check_arity = |op: &Op, n: usize, pos: Pos| {
            if op.arity() == n {
                Ok(())
            } else {
                Err(RuleError::Resolve {
                    pos,
                    msg: format!("`{}` takes {} arguments, got {n}", op.name(), op.arity()),
                })
            }
        };
        Ok(match ast {
            Ast::Ident(name, pos) => {
                return Err(RuleError::Resolve {
                    pos: *pos,
                    msg: format!("bare identifier `{name}` in a rule; write `?{name}`"),
                })
            }
            Ast::Meta(name, ty, pos) => Pattern::Meta {
                name: Arc::from(name.as_str()),
                ty: ty.as_ref().map(|t| resolve(t, *pos)).transpose()?,
            },
            Ast::Num(value, ty, pos) => {
                let ty = resolve(ty, *pos)?;
                if ty == TyPat::Ty(Ty::Prop) {
                    return Err(RuleError::Resolve { pos: *pos, msg: "numeral of type prop".into() });
                }
                Pattern::Num { value: value.clone(), ty }
            }
            Ast::Call(name, args, pos) => {
                let op = env.op(name).ok_or_else(|| RuleError::Resolve {
                    pos: *pos,
                    msg: format!("unknown operator `{name}`"),
                })?;
                check_arity(&op, args.len(), *pos)?;
                let args = args.iter().map(|a| Pattern::from_ast(a, env)).collect::<Result<_, _>>()?;
                Pattern::App { op, args }
            }
            Ast::Neg(body, _) => Pattern::App { op: Op::Neg, args: vec![Pattern::from_ast(body, env)?] },
            Ast::Bin(op, l, r, _) => Pattern::App {
                op: bin_op(*op),
                args: vec![Pattern::from_ast(l, env)?, Pattern::from_ast(r, env)?],
            },
            Ast::Cast { src, dst, body, pos } => Pattern::Cast {
                src: src.as_ref().map(|s| resolve(s, *pos)).transpose()?,
                dst: resolve(dst, *pos)?,
                body: Box::new(Pattern::from_ast(body, env)?),
            },
        })
    }
}

impl Printable for Pattern {
    fn view(&self) -> View<'_, Self> {
        match self {
            Pattern::Meta { name, ty: None } => View::Atom(format!("?{name}")),
            Pattern::Meta { name, ty: Some(t) } => View::Atom(format!("?{name}:{t}")),
            Pattern::Num { value, ty } => View::Numeral(format!("{value}:{ty}")),
            Pattern::App { op, args } => View::App(op, args),
            Pattern::Cast { src, dst, body } => View::Cast {
                src: src.as_ref().map(ToString::to_string),
                dst: dst.to_string(),
                body,
            },
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
