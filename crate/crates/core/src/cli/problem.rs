//! Problem files.
//!
//! ```text
//! [decls]
//! var m n : nat
//! [rules]
//! extra.rules                    # a rule file, relative to this file
//! rule my_rule : ...             # or a rule given inline
//! [context]
//! h : n <= m; 1 <= p
//! [goals]
//! cast(int, m - n) = cast(int, m) - cast(int, n)
//! ```
//!
//! Sections appear in this order and each may be omitted. Context and goal
//! entries are separated by newlines or `;` and may be named `name : expr`.

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::rules::{extend_rules, RuleDb};
use crate::term::decl::{apply_decl, is_decl_line};
use crate::term::syntax::{lex, Tok};
use crate::term::{parse_expr_at, Context, Expr, Pos, TypeEnv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Decls,
    Rules,
    Context,
    Goals,
}

impl Section {
    fn from_header(s: &str) -> Option<Section> {
        match s {
            "[decls]" => Some(Section::Decls),
            "[rules]" => Some(Section::Rules),
            "[context]" => Some(Section::Context),
            "[goals]" => Some(Section::Goals),
            _ => None,
        }
    }
}

/// A diagnostic tied to a file position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct Diagnostic {
    pub file: PathBuf,
    pub pos: Pos,
    pub msg: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.file.display(), self.pos, self.msg)
    }
}

impl Diagnostic {
    pub fn new(file: &Path, pos: Pos, msg: impl fmt::Display) -> Self {
        // Errors from this crate already lead with their position.
        let msg = msg.to_string();
        let prefix = format!("{pos}: ");
        let msg = msg.strip_prefix(&prefix).map(str::to_string).unwrap_or(msg);
        Diagnostic { file: file.to_path_buf(), pos, msg }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub name: Option<String>,
    pub expr: Expr,
    pub pos: Pos,
}

impl Entry {
    pub fn label(&self, index: usize) -> String {
        self.name.clone().unwrap_or_else(|| format!("#{}", index + 1))
    }
}

pub struct Problem {
    pub env: TypeEnv,
    pub db: RuleDb,
    pub context: Vec<Entry>,
    pub goals: Vec<Entry>,
}

impl Problem {
    pub fn ctx(&self) -> Context {
        Context::new(self.context.iter().map(|e| e.expr.clone()).collect())
    }
}

/// Whether `text` is laid out as a problem file rather than a rule file.
pub fn looks_like_problem(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| Section::from_header(l).is_some())
}

fn read(path: &Path) -> Result<String, Diagnostic> {
    std::fs::read_to_string(path).map_err(|e| Diagnostic::new(path, Pos::default(), format!("cannot read: {e}")))
}

/// Reads a problem file, then appends each of `extra_rules` to its rules.
pub fn load_problem(path: &Path, extra_rules: &[PathBuf]) -> Result<Problem, Diagnostic> {
    let text = read(path)?;
    parse_problem(&text, path, extra_rules)
}

pub fn parse_problem(text: &str, path: &Path, extra_rules: &[PathBuf]) -> Result<Problem, Diagnostic> {
    let mut env = TypeEnv::stdlib();
    let mut db = RuleDb::prelude();
    let mut context = Vec::new();
    let mut goals = Vec::new();
    let mut section: Option<Section> = None;
    let base = path.parent().unwrap_or(Path::new("."));

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        let pos = Pos { line: line_no, col: indent + 1 };
        if trimmed.starts_with('[') && !trimmed.starts_with("[cond") {
            let next = Section::from_header(trimmed)
                .ok_or_else(|| Diagnostic::new(path, pos, format!("unknown section `{trimmed}`")))?;
            if section.is_some_and(|s| s >= next) {
                return Err(Diagnostic::new(
                    path,
                    pos,
                    "sections must appear once each, in the order [decls], [rules], [context], [goals]",
                ));
            }
            section = Some(next);
            continue;
        }
        match section {
            None => return Err(Diagnostic::new(path, pos, "expected a section header such as `[goals]`")),
            Some(Section::Decls) => {
                apply_decl(line, Pos { line: line_no, col: 1 }, &mut env).map_err(|e| Diagnostic::new(path, e.pos(), e))?;
            }
            Some(Section::Rules) => {
                let first = trimmed.split_whitespace().next().unwrap_or("");
                if matches!(first, "rule" | "lemma") || is_decl_line(trimmed) {
                    extend_rules(&mut db, line, line_no, &mut env).map_err(|e| Diagnostic::new(path, e.pos(), e))?;
                } else {
                    let file = base.join(trimmed);
                    load_rule_file(&mut db, &file, &mut env)?;
                }
            }
            Some(s @ (Section::Context | Section::Goals)) => {
                let out = if s == Section::Context { &mut context } else { &mut goals };
                let mut col = 0;
                for piece in line.split(';') {
                    let start = col;
                    col += piece.len() + 1;
                    if piece.trim().is_empty() {
                        continue;
                    }
                    out.push(parse_entry(piece, Pos { line: line_no, col: start + 1 }, &env, path)?);
                }
            }
        }
    }
    for file in extra_rules {
        load_rule_file(&mut db, file, &mut env)?;
    }
    Ok(Problem { env, db, context, goals })
}

/// Appends a rule file (with its declarations) to `db`.
pub fn load_rule_file(db: &mut RuleDb, file: &Path, env: &mut TypeEnv) -> Result<(), Diagnostic> {
    let text = read(file)?;
    extend_rules(db, &text, 1, env).map_err(|e| Diagnostic::new(file, e.pos(), e))
}

fn parse_entry(piece: &str, origin: Pos, env: &TypeEnv, path: &Path) -> Result<Entry, Diagnostic> {
    let toks = lex(piece, origin).map_err(|e| Diagnostic::new(path, e.pos, e))?;
    let named = matches!(toks.as_slice(), [(Tok::Ident(_), _), (Tok::Colon, _), ..]);
    let (name, body, body_origin) = if named {
        let Tok::Ident(name) = &toks[0].0 else { unreachable!() };
        let colon = piece.find(':').expect("lexed colon");
        let body = &piece[colon + 1..];
        let col = toks[1].1.col + 1;
        (Some(name.clone()), body, Pos { line: origin.line, col })
    } else {
        (None, piece, origin)
    };
    let expr = parse_expr_at(body, env, body_origin).map_err(|e| Diagnostic::new(path, e.pos(), e))?;
    let pos = toks.first().map_or(origin, |t| t.1);
    Ok(Entry { name, expr, pos })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
[decls]
var m n p : nat
[context]
h : n <= m; 1:nat <= p
[goals]
cast(int, m - n) = cast(int, m) - cast(int, n)
";

    #[test]
    fn sections_and_names() {
        let p = parse_problem(SAMPLE, Path::new("x.prob"), &[]).unwrap();
        assert_eq!(p.context.len(), 2);
        assert_eq!(p.context[0].name.as_deref(), Some("h"));
        assert_eq!(p.context[1].name, None);
        assert_eq!(p.context[1].pos, Pos { line: 4, col: 13 });
        assert_eq!(p.goals.len(), 1);
        assert!(looks_like_problem(SAMPLE));
        assert!(!looks_like_problem("rule a : cast('T, 0:nat) = 0:'T"));
    }

    #[test]
    fn diagnostics_point_at_the_error() {
        let text = "[decls]\nvar m : nat\n[goals]\nm + k < 3:nat\n";
        let err = parse_problem(text, Path::new("bad.prob"), &[]).err().unwrap();
        assert_eq!(err.to_string(), "bad.prob:4:5: undeclared variable `k`");
        let err = parse_problem("[goals]\n[decls]\n", Path::new("o.prob"), &[]).err().unwrap();
        assert_eq!(err.pos.line, 2);
    }
}
