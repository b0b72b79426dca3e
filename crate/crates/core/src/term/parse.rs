use thiserror::Error;

use super::env::{app_type, TypeEnv, TypeError};
use super::expr::{Expr, Op};
use super::syntax::{parse_ast, Ast, BinOp, ParseError, Pos, TyAnn};
use super::ty::Ty;

/// Failure to turn source text into a well-typed expression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{pos}: {err}")]
    Type { pos: Pos, err: TypeError },
    #[error("{pos}: {msg}")]
    Resolve { pos: Pos, msg: String },
}

impl ExprError {
    pub fn pos(&self) -> Pos {
        match self {
            ExprError::Parse(e) => e.pos,
            ExprError::Type { pos, .. } | ExprError::Resolve { pos, .. } => *pos,
        }
    }
}

pub(crate) fn bin_op(op: BinOp) -> Op {
    match op {
        BinOp::Add => Op::Add,
        BinOp::Sub => Op::Sub,
        BinOp::Mul => Op::Mul,
        BinOp::Eq => Op::Eq,
        BinOp::Ne => Op::Ne,
        BinOp::Lt => Op::Lt,
        BinOp::Le => Op::Le,
        BinOp::Dvd => Op::Dvd,
    }
}

/// Parses and type-checks one expression.
pub fn parse_expr(src: &str, env: &TypeEnv) -> Result<Expr, ExprError> {
    parse_expr_at(src, env, Pos { line: 1, col: 1 })
}

/// As [`parse_expr`], with diagnostics offset to `origin`.
pub fn parse_expr_at(src: &str, env: &TypeEnv, origin: Pos) -> Result<Expr, ExprError> {
    let ast = parse_ast(src, origin)?;
    elaborate(&ast, env)
}

pub fn elaborate(ast: &Ast, env: &TypeEnv) -> Result<Expr, ExprError> {
    let type_err = |pos: Pos| move |err: TypeError| ExprError::Type { pos, err };
    match ast {
        Ast::Ident(name, pos) => env.var(name).ok_or(ExprError::Type {
            pos: *pos,
            err: TypeError::UndeclaredVariable(name.clone()),
        }),
        Ast::Meta(name, _, pos) => Err(ExprError::Resolve {
            pos: *pos,
            msg: format!("pattern variable `?{name}` outside a rule"),
        }),
        Ast::Num(value, ty, pos) => {
            let ty = resolve_concrete(ty, env, *pos)?;
            if ty.is_prop() {
                return Err(type_err(*pos)(TypeError::PropNumeral));
            }
            Ok(Expr::Num { value: value.clone(), ty })
        }
        Ast::Call(name, args, pos) => {
            let op = env.op(name).ok_or_else(|| ExprError::Resolve {
                pos: *pos,
                msg: format!("unknown operator `{name}`"),
            })?;
            let args = args.iter().map(|a| elaborate(a, env)).collect::<Result<Vec<_>, _>>()?;
            finish_app(op, args, *pos)
        }
        Ast::Neg(body, pos) => finish_app(Op::Neg, vec![elaborate(body, env)?], *pos),
        Ast::Bin(op, l, r, pos) => {
            let args = vec![elaborate(l, env)?, elaborate(r, env)?];
            finish_app(bin_op(*op), args, *pos)
        }
        Ast::Cast { src, dst, body, pos } => {
            let body = elaborate(body, env)?;
            let inner = body.ty();
            let dst = resolve_concrete(dst, env, *pos)?;
            let src = match src {
                Some(ann) => resolve_concrete(ann, env, *pos)?,
                None => inner.clone(),
            };
            env.check_cast(&src, &dst, &inner).map_err(type_err(*pos))?;
            Ok(Expr::cast(src, dst, body))
        }
    }
}

fn finish_app(op: Op, args: Vec<Expr>, pos: Pos) -> Result<Expr, ExprError> {
    let tys: Vec<Ty> = args.iter().map(Expr::ty).collect();
    app_type(&op, &tys).map_err(|err| ExprError::Type { pos, err })?;
    Ok(Expr::App { op, args })
}

fn resolve_concrete(ann: &TyAnn, env: &TypeEnv, pos: Pos) -> Result<Ty, ExprError> {
    match ann {
        TyAnn::Named(name) => env
            .resolve_type(name)
            .map_err(|e| ExprError::Resolve { pos, msg: e.to_string() }),
        TyAnn::Meta(name) => Err(ExprError::Resolve {
            pos,
            msg: format!("type variable `'{name}` outside a rule"),
        }),
    }
}
