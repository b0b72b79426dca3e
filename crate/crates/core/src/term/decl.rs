//! Declaration lines:
//!
//! ```text
//! type IDENT
//! coe IDENT -> IDENT
//! op IDENT ARITY (fun|rel)
//! var IDENT+ : IDENT
//! ```

use thiserror::Error;

use super::env::{EnvError, TypeEnv};
use super::expr::OpKind;
use super::syntax::{ParseError, Parser, Pos, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeclError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{pos}: {err}")]
    Env { pos: Pos, err: EnvError },
}

impl DeclError {
    pub fn pos(&self) -> Pos {
        match self {
            DeclError::Parse(e) => e.pos,
            DeclError::Env { pos, .. } => *pos,
        }
    }
}

/// Whether a line starts with a declaration keyword.
pub fn is_decl_line(line: &str) -> bool {
    matches!(line.split_whitespace().next(), Some("type" | "coe" | "op" | "var"))
}

/// Parses one declaration line and applies it to `env`.
pub fn apply_decl(line: &str, origin: Pos, env: &mut TypeEnv) -> Result<(), DeclError> {
    let mut p = Parser::new(line, origin)?;
    let (kw, _) = p.expect_ident()?;
    let env_err = |pos: Pos| move |err: EnvError| DeclError::Env { pos, err };
    match kw.as_str() {
        "type" => {
            let (name, pos) = p.expect_ident()?;
            p.expect_end()?;
            env.declare_type(&name).map_err(env_err(pos))?;
        }
        "coe" => {
            let (src, spos) = p.expect_ident()?;
            p.expect(&Tok::Arrow)?;
            let (dst, dpos) = p.expect_ident()?;
            p.expect_end()?;
            let src = env.resolve_type(&src).map_err(env_err(spos))?;
            let dst = env.resolve_type(&dst).map_err(env_err(dpos))?;
            env.declare_coercion(&src, &dst).map_err(env_err(spos))?;
        }
        "op" => {
            let (name, pos) = p.expect_ident()?;
            let arity = match p.bump() {
                Some((Tok::Num(n), _)) => usize::try_from(n).map_err(|_| ParseError::new(pos, "arity too large"))?,
                _ => return Err(ParseError::new(pos, "expected an arity after the operator name").into()),
            };
            let (kind, kpos) = p.expect_ident()?;
            let kind = match kind.as_str() {
                "fun" => OpKind::Fun,
                "rel" => OpKind::Rel,
                _ => return Err(ParseError::new(kpos, "expected `fun` or `rel`").into()),
            };
            p.expect_end()?;
            env.declare_op(&name, arity, kind).map_err(env_err(pos))?;
        }
        "var" => {
            let mut names = Vec::new();
            while let Some(Tok::Ident(_)) = p.peek() {
                names.push(p.expect_ident()?);
            }
            if names.is_empty() {
                return Err(p.unexpected("a variable name").into());
            }
            p.expect(&Tok::Colon)?;
            let (ty, tpos) = p.expect_ident()?;
            p.expect_end()?;
            let ty = env.resolve_type(&ty).map_err(env_err(tpos))?;
            for (name, pos) in names {
                env.declare_var(&name, &ty).map_err(env_err(pos))?;
            }
        }
        other => {
            return Err(ParseError::new(origin, format!("unknown declaration `{other}`")).into());
        }
    }
    Ok(())
}
