use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;
use std::sync::{Arc, OnceLock};

use crate::term::decl::{apply_decl, is_decl_line};
use crate::term::syntax::{Ast, BinOp, Parser, Pos, Tok};
use crate::term::TypeEnv;

use super::classify::{classify, Class};
use super::pattern::Pattern;
use super::RuleError;

/// The shipped prelude of cast lemmas over `nat -> int -> rat`.
pub const PRELUDE_SOURCE: &str = include_str!("../../prelude.rules");

/// A named equation `lhs = rhs` with side conditions. Propositional
/// equations read as `iff`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub name: Arc<str>,
    pub lhs: Pattern,
    pub rhs: Pattern,
    pub conds: Vec<Pattern>,
}

impl Equation {
    pub fn sides(&self, dir: Dir) -> (&Pattern, &Pattern) {
        match dir {
            Dir::L2R => (&self.lhs, &self.rhs),
            Dir::R2L => (&self.rhs, &self.lhs),
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.conds.is_empty() {
            let conds: Vec<String> = self.conds.iter().map(ToString::to_string).collect();
            write!(f, "[cond: {}] ", conds.join(", "))?;
        }
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Dir {
    L2R,
    R2L,
}

impl Dir {
    pub fn name(self) -> &'static str {
        match self {
            Dir::L2R => "L2R",
            Dir::R2L => "R2L",
        }
    }

    pub fn flip(self) -> Dir {
        match self {
            Dir::L2R => Dir::R2L,
            Dir::R2L => Dir::L2R,
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A cast lemma together with its class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub eq: Equation,
    pub class: Class,
    /// Set when the class was forced by an annotation instead of inferred.
    pub overridden: bool,
}

impl Deref for RewriteRule {
    type Target = Equation;

    fn deref(&self) -> &Equation {
        &self.eq
    }
}

impl RewriteRule {
    /// Classifies `eq`, or honours `forced` when given.
    pub fn new(eq: Equation, forced: Option<Class>) -> Result<Self, super::classify::ClassifyError> {
        match forced {
            Some(class) => Ok(RewriteRule { eq, class, overridden: true }),
            None => {
                let class = classify(&eq.lhs, &eq.rhs)?;
                Ok(RewriteRule { eq, class, overridden: false })
            }
        }
    }
}

/// One parsed line of a rule file.
#[derive(Clone, Debug)]
pub enum RuleItem {
    Rule(RewriteRule),
    /// A plain lemma: available to `rw_mod_cast`, never used by normalization.
    Lemma(Equation),
    Decl,
}

/// Tagged cast lemmas in load order, plus plain lemmas for explicit rewriting.
#[derive(Clone, Debug, Default)]
pub struct RuleDb {
    rules: Vec<RewriteRule>,
    by_class: [Vec<usize>; 3],
    lemmas: Vec<Equation>,
    names: HashSet<Arc<str>>,
}

fn class_slot(c: Class) -> usize {
    match c {
        Class::Elim => 0,
        Class::Move => 1,
        Class::Squash => 2,
    }
}

impl RuleDb {
    pub fn empty() -> Self {
        Self::default()
    }

    /// A database holding the shipped prelude.
    pub fn prelude() -> Self {
        static PRELUDE: OnceLock<RuleDb> = OnceLock::new();
        PRELUDE
            .get_or_init(|| {
                let mut env = TypeEnv::stdlib();
                let mut db = RuleDb::empty();
                for item in parse_rule_lines(PRELUDE_SOURCE, 1, &mut env) {
                    db.add(item.expect("prelude rule")).expect("prelude rule");
                }
                db
            })
            .clone()
    }

    pub fn add(&mut self, item: RuleItem) -> Result<(), RuleError> {
        match item {
            RuleItem::Rule(r) => self.add_rule(r),
            RuleItem::Lemma(eq) => self.add_lemma(eq),
            RuleItem::Decl => Ok(()),
        }
    }

    pub fn add_rule(&mut self, rule: RewriteRule) -> Result<(), RuleError> {
        self.claim(&rule.name)?;
        if rule.overridden {
            log::warn!("rule `{}`: class forced to {}", rule.name, rule.class);
        }
        self.by_class[class_slot(rule.class)].push(self.rules.len());
        self.rules.push(rule);
        Ok(())
    }

    pub fn add_lemma(&mut self, eq: Equation) -> Result<(), RuleError> {
        self.claim(&eq.name)?;
        self.lemmas.push(eq);
        Ok(())
    }

    fn claim(&mut self, name: &Arc<str>) -> Result<(), RuleError> {
        if !self.names.insert(name.clone()) {
            return Err(RuleError::DuplicateName { pos: Pos::default(), name: name.to_string() });
        }
        Ok(())
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn lemmas(&self) -> &[Equation] {
        &self.lemmas
    }

    /// Rules of one class, in declaration order.
    pub fn of_class(&self, class: Class) -> impl Iterator<Item = &RewriteRule> + '_ {
        self.by_class[class_slot(class)].iter().map(move |&i| &self.rules[i])
    }

    pub fn rule(&self, name: &str) -> Option<&RewriteRule> {
        self.rules.iter().find(|r| &*r.name == name)
    }

    /// Any equation, tagged rule or plain lemma, by name.
    pub fn equation(&self, name: &str) -> Option<&Equation> {
        self.rule(name).map(|r| &r.eq).or_else(|| self.lemmas.iter().find(|l| &*l.name == name))
    }

    pub fn len(&self) -> usize {
        self.rules.len() + self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Loads user rules after the prelude. Declaration lines in `text` extend
/// `env`. Stops at the first error.
pub fn load_rules(text: &str, env: &mut TypeEnv) -> Result<RuleDb, RuleError> {
    let mut db = RuleDb::prelude();
    extend_rules(&mut db, text, 1, env)?;
    Ok(db)
}

/// Appends the rules in `text` (whose first line is `first_line`) to `db`.
pub fn extend_rules(db: &mut RuleDb, text: &str, first_line: usize, env: &mut TypeEnv) -> Result<(), RuleError> {
    for item in parse_rule_lines_with_pos(text, first_line, env) {
        let (pos, item) = item?;
        db.add(item).map_err(|e| e.at(pos))?;
    }
    Ok(())
}

/// Parses every line of a rule file independently, so that callers can
/// report all failures at once.
pub fn parse_rule_lines(text: &str, first_line: usize, env: &mut TypeEnv) -> Vec<Result<RuleItem, RuleError>> {
    parse_rule_lines_with_pos(text, first_line, env)
        .into_iter()
        .map(|r| r.map(|(_, item)| item))
        .collect()
}

pub fn parse_rule_lines_with_pos(
    text: &str,
    first_line: usize,
    env: &mut TypeEnv,
) -> Vec<Result<(Pos, RuleItem), RuleError>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let pos = Pos { line: first_line + i, col: 1 };
        let item = if is_decl_line(line) {
            apply_decl(line, pos, env).map(|()| RuleItem::Decl).map_err(RuleError::from)
        } else {
            parse_rule_line(line, pos, env)
        };
        out.push(item.map(|it| (pos, it)));
    }
    out
}

/// `rule NAME [CLASS]? [cond: e, ...]? : lhs = rhs` or
/// `lemma NAME [cond: e, ...]? : lhs = rhs`.
pub fn parse_rule_line(line: &str, origin: Pos, env: &TypeEnv) -> Result<RuleItem, RuleError> {
    let mut p = Parser::new(line, origin)?;
    let (kw, kpos) = p.expect_ident()?;
    let is_lemma = match kw.as_str() {
        "rule" => false,
        "lemma" => true,
        _ => return Err(RuleError::Resolve { pos: kpos, msg: format!("expected `rule` or `lemma`, found `{kw}`") }),
    };
    let (name, npos) = p.expect_ident()?;
    let mut forced = None;
    let mut conds = Vec::new();
    while p.eat(&Tok::LBracket) {
        let (word, wpos) = p.expect_ident()?;
        if word == "cond" {
            p.expect(&Tok::Colon)?;
            loop {
                conds.push(p.expr()?);
                if !p.eat(&Tok::Comma) {
                    break;
                }
            }
        } else if let (Some(c), false) = (Class::from_name(&word), is_lemma) {
            if forced.is_some() {
                return Err(RuleError::Resolve { pos: wpos, msg: "class given twice".into() });
            }
            forced = Some(c);
        } else {
            return Err(RuleError::Resolve { pos: wpos, msg: format!("unknown annotation `{word}`") });
        }
        p.expect(&Tok::RBracket)?;
    }
    p.expect(&Tok::Colon)?;
    let first = p.expr()?;
    let (lhs, rhs) = if p.eat(&Tok::Eq) {
        (first, p.expr()?)
    } else {
        match first {
            Ast::Bin(BinOp::Eq, l, r, _) => (*l, *r),
            _ => return Err(p.unexpected("`=` between the two sides").into()),
        }
    };
    p.expect_end()?;

    let lhs = Pattern::from_ast(&lhs, env)?;
    let rhs = Pattern::from_ast(&rhs, env)?;
    let conds = conds.iter().map(|c| Pattern::from_ast(c, env)).collect::<Result<Vec<_>, _>>()?;
    let eq = Equation { name: Arc::from(name.as_str()), lhs, rhs, conds };
    check_equation(&eq, npos)?;
    if is_lemma {
        return Ok(RuleItem::Lemma(eq));
    }
    let rule = RewriteRule::new(eq, forced).map_err(|e| RuleError::Classify {
        pos: npos,
        name: name.clone(),
        lhs: e.lhs,
        rhs: e.rhs,
    })?;
    Ok(RuleItem::Rule(rule))
}

fn check_equation(eq: &Equation, pos: Pos) -> Result<(), RuleError> {
    let name = eq.name.to_string();
    if eq.lhs.is_prop() != eq.rhs.is_prop() {
        return Err(RuleError::SortMismatch { pos, name });
    }
    let unbound = |what: &Pattern| -> Option<String> {
        let terms = eq.lhs.term_metas();
        let types = eq.lhs.type_metas();
        what.term_metas()
            .into_iter()
            .find(|m| !terms.contains(m))
            .map(|m| format!("?{m}"))
            .or_else(|| what.type_metas().into_iter().find(|m| !types.contains(m)).map(|m| format!("'{m}")))
    };
    if let Some(meta) = unbound(&eq.rhs) {
        return Err(RuleError::UnboundMeta { pos, name, meta });
    }
    for c in &eq.conds {
        if !c.is_prop() {
            return Err(RuleError::Resolve { pos, msg: format!("condition `{c}` of `{name}` is not a proposition") });
        }
        if let Some(meta) = unbound(c) {
            return Err(RuleError::UnboundMeta { pos, name, meta });
        }
    }
    Ok(())
}
