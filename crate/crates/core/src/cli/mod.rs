//! The `castnorm` command line.

pub mod problem;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::normalize::{Mode, NormalizeError, NormalizeOptions, Normalizer, Trace, DEFAULT_FUEL};
use crate::oracle::{abstract_instantiate, check_equiv_exhaustive, check_rule_sound, Soundness, DEFAULT_RANGE};
use crate::par::Exec;
use crate::rules::{parse_rule_lines_with_pos, Dir, RuleError, RuleItem};
use crate::term::{Context, Expr, Op, Ty, TypeEnv};

use problem::{load_problem, looks_like_problem, Diagnostic, Problem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FUEL: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "castnorm", version, about = "Normalize casts in typed arithmetic expressions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the normal form of every goal.
    Normalize(RunArgs),
    /// Push casts toward the leaves of every goal.
    Push(RunArgs),
    /// Check each goal against a hypothesis modulo casts.
    Equiv(EquivArgs),
    /// Classify every rule in a rule file.
    Classify {
        file: PathBuf,
    },
    /// Check rules (or goals against their normal forms) by exhaustive
    /// evaluation.
    Check(CheckArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Problem file.
    pub file: PathBuf,
    /// Extra rule file, loaded after the prelude and the problem's own rules.
    #[arg(long = "rules", value_name = "FILE")]
    pub rules: Vec<PathBuf>,
    /// Rewrite budget per goal.
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    pub fuel: usize,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// Print every rewrite step.
    #[arg(long)]
    pub trace: bool,
    /// Print one JSON trace per goal and line.
    #[arg(long)]
    pub json: bool,
    /// Rewrite with a rule or lemma (`NAME` or `NAME:R2L`) between
    /// normalizations; repeatable, applied in order.
    #[arg(long = "rw", value_name = "RULE")]
    pub rw: Vec<String>,
}

#[derive(Args, Debug)]
pub struct EquivArgs {
    #[command(flatten)]
    pub common: Common,
    /// Try every hypothesis instead of a single candidate.
    #[arg(long)]
    pub from_context: bool,
    /// The hypothesis to use; defaults to the last one.
    #[arg(long, value_name = "NAME", conflicts_with = "from_context")]
    pub hyp: Option<String>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Problem file or rule file.
    pub file: PathBuf,
    #[arg(long = "rules", value_name = "FILE")]
    pub rules: Vec<PathBuf>,
    /// Enumeration bound for variables.
    #[arg(long, default_value_t = DEFAULT_RANGE)]
    pub range: u32,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    pub fuel: usize,
}

/// Parses arguments and runs; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = run(cli, &mut out);
    let _ = out.flush();
    code
}

pub fn run(cli: Cli, out: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Normalize(a) => cmd_run(&a, Mode::Normalize, out),
        Command::Push(a) => cmd_run(&a, Mode::PushCast, out),
        Command::Equiv(a) => cmd_equiv(&a, out),
        Command::Classify { file } => cmd_classify(&file, out),
        Command::Check(a) => cmd_check(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Diag(d)) => {
            eprintln!("{d}");
            EXIT_ERROR
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

enum Failure {
    Diag(Diagnostic),
    Io(std::io::Error),
}

impl From<Diagnostic> for Failure {
    fn from(d: Diagnostic) -> Self {
        Failure::Diag(d)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type CmdResult = Result<i32, Failure>;

fn load(common: &Common) -> Result<Problem, Diagnostic> {
    load_problem(&common.file, &common.rules)
}

fn parse_rw(arg: &str) -> (String, Dir) {
    match arg.rsplit_once(':') {
        Some((name, d)) if d.eq_ignore_ascii_case("r2l") => (name.to_string(), Dir::R2L),
        Some((name, d)) if d.eq_ignore_ascii_case("l2r") => (name.to_string(), Dir::L2R),
        _ => (arg.to_string(), Dir::L2R),
    }
}

fn write_trace(out: &mut dyn Write, t: &Trace, json: bool) -> std::io::Result<()> {
    if json {
        writeln!(out, "{}", serde_json::to_string(&t.to_json()).expect("trace serializes"))
    } else {
        for s in &t.steps {
            writeln!(out, "  {s}")?;
        }
        Ok(())
    }
}

fn cmd_run(a: &RunArgs, mode: Mode, out: &mut dyn Write) -> CmdResult {
    let p = load(&a.common)?;
    let ctx = p.ctx();
    let norm = Normalizer::new(&p.env, &p.db).with_options(NormalizeOptions { fuel: a.common.fuel, mode });
    let exprs: Vec<_> = p.goals.iter().map(|g| g.expr.clone()).collect();
    let results = if a.rw.is_empty() {
        norm.run_all(&exprs, &ctx, Exec::default())
    } else {
        let rules: Vec<(String, Dir)> = a.rw.iter().map(|s| parse_rw(s)).collect();
        exprs.iter().map(|e| norm.rw_mod_cast(e, &rules, &ctx)).collect()
    };
    let mut code = EXIT_OK;
    for (goal, result) in p.goals.iter().zip(results) {
        let prefix = goal.name.as_ref().map(|n| format!("{n}: ")).unwrap_or_default();
        match result {
            Ok(t) => {
                if a.json {
                    write_trace(out, &t, true)?;
                } else {
                    writeln!(out, "{prefix}{}", t.output)?;
                    if a.trace {
                        write_trace(out, &t, false)?;
                    }
                }
            }
            Err(NormalizeError::FuelExhausted(t)) => {
                eprintln!(
                    "{}:{}: fuel exhausted after {} rewrites; partial result below",
                    a.common.file.display(),
                    goal.pos,
                    t.fuel_used
                );
                if !a.json {
                    writeln!(out, "{prefix}{}  (partial)", t.output)?;
                }
                write_trace(out, &t, a.json)?;
                code = code.max(EXIT_FUEL);
            }
            Err(e @ NormalizeError::RewriteFailed { .. }) => {
                eprintln!("{}:{}: {e}", a.common.file.display(), goal.pos);
                code = code.max(EXIT_ERROR);
            }
            Err(e) => {
                eprintln!("{}:{}: {e}", a.common.file.display(), goal.pos);
                code = EXIT_ERROR.max(code);
            }
        }
    }
    Ok(code)
}

fn cmd_equiv(a: &EquivArgs, out: &mut dyn Write) -> CmdResult {
    let p = load(&a.common)?;
    let ctx = p.ctx();
    let file = a.common.file.display();
    let norm = Normalizer::new(&p.env, &p.db).with_fuel(a.common.fuel);
    let candidate = match (&a.hyp, a.from_context) {
        (Some(name), false) => match p.context.iter().find(|h| h.name.as_deref() == Some(name)) {
            Some(h) => Some(h),
            None => {
                let msg = format!("no hypothesis named `{name}` in [context]");
                return Err(Diagnostic::new(&a.common.file, crate::term::Pos { line: 1, col: 1 }, msg).into());
            }
        },
        (None, false) => p.context.last(),
        (_, true) => None,
    };
    let mut code = EXIT_OK;
    for (i, goal) in p.goals.iter().enumerate() {
        let label = goal.label(i);
        if norm.normalize(&goal.expr, &ctx).is_ok_and(|t| is_reflexive(&t.output)) {
            writeln!(out, "{label}: closed by rfl")?;
            continue;
        }
        let closed = match candidate {
            Some(h) => norm.equiv_mod_cast(&goal.expr, &h.expr, &ctx).then(|| p.context.iter().position(|c| c == h).unwrap()),
            None => norm.assumption_mod_cast(&goal.expr, &ctx),
        };
        match closed {
            Some(k) => writeln!(out, "{label}: closed by {}", p.context[k].label(k))?,
            None => {
                code = EXIT_MISMATCH;
                writeln!(out, "{label}: not equivalent")?;
                let show = |out: &mut dyn Write, tag: &str, e| -> std::io::Result<()> {
                    match norm.normalize(e, &ctx) {
                        Ok(t) => writeln!(out, "  {tag}: {}", t.output),
                        Err(err) => writeln!(out, "  {tag}: {err}"),
                    }
                };
                show(out, "goal", &goal.expr)?;
                let hyps: Vec<_> = match candidate {
                    Some(h) => vec![h],
                    None => p.context.iter().collect(),
                };
                for (k, h) in hyps.into_iter().enumerate() {
                    show(out, &h.name.clone().unwrap_or_else(|| format!("hyp #{}", k + 1)), &h.expr)?;
                }
                eprintln!("{file}:{}: goal {label} does not follow modulo casts", goal.pos);
            }
        }
    }
    Ok(code)
}

/// `x = x` or `x <= x`.
fn is_reflexive(e: &Expr) -> bool {
    matches!(e, Expr::App { op: Op::Eq | Op::Le, args } if args[0] == args[1])
}

type RuleItems = Vec<Result<(crate::term::Pos, RuleItem), RuleError>>;

fn rule_file_items(file: &Path) -> Result<(TypeEnv, RuleItems), Diagnostic> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Diagnostic::new(file, Default::default(), format!("cannot read: {e}")))?;
    let mut env = TypeEnv::stdlib();
    let items = parse_rule_lines_with_pos(&text, 1, &mut env);
    Ok((env, items))
}

fn cmd_classify(file: &Path, out: &mut dyn Write) -> CmdResult {
    let (_, items) = rule_file_items(file)?;
    let mut failed = false;
    for item in items {
        match item {
            Ok((_, RuleItem::Rule(r))) => {
                let mark = if r.overridden { " (override)" } else { "" };
                writeln!(out, "{} → {}{mark}", r.name, r.class)?;
            }
            Ok((_, RuleItem::Lemma(eq))) => writeln!(out, "{} → lemma (unclassified)", eq.name)?,
            Ok((_, RuleItem::Decl)) => {}
            Err(e) => {
                failed = true;
                eprintln!("{}", Diagnostic::new(file, e.pos(), &e));
            }
        }
    }
    Ok(if failed { EXIT_ERROR } else { EXIT_OK })
}

fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> CmdResult {
    let text = std::fs::read_to_string(&a.file)
        .map_err(|e| Diagnostic::new(&a.file, Default::default(), format!("cannot read: {e}")))?;
    if looks_like_problem(&text) {
        check_problem(a, out)
    } else {
        check_rule_file(a, out)
    }
}

fn check_rule_file(a: &CheckArgs, out: &mut dyn Write) -> CmdResult {
    let started = Instant::now();
    let (env, items) = rule_file_items(&a.file)?;
    let mut errors = false;
    let mut unsound = 0;
    let mut checked = 0;
    for item in items {
        let eq = match item {
            Ok((_, RuleItem::Rule(r))) => r.eq,
            Ok((_, RuleItem::Lemma(eq))) => eq,
            Ok((_, RuleItem::Decl)) => continue,
            Err(e) => {
                errors = true;
                eprintln!("{}", Diagnostic::new(&a.file, e.pos(), &e));
                continue;
            }
        };
        checked += 1;
        match check_rule_sound(&eq, &env, a.range, Exec::default()) {
            Ok(Soundness::Sound { instances }) => writeln!(out, "{}: Sound ({instances} instances)", eq.name)?,
            Ok(Soundness::Unsound(inst)) => {
                unsound += 1;
                writeln!(out, "{}: Unsound", eq.name)?;
                writeln!(out, "  instance: {} = {}", inst.lhs, inst.rhs)?;
                for c in &inst.conds {
                    writeln!(out, "  assuming: {c}")?;
                }
                writeln!(out, "  {}", inst.verdict)?;
            }
            Ok(Soundness::Skipped(e)) => writeln!(out, "{}: Skipped ({e})", eq.name)?,
            Err(e) => {
                errors = true;
                writeln!(out, "{}: error: {e}", eq.name)?;
            }
        }
    }
    writeln!(
        out,
        "checked {checked} rules at range {}: {unsound} unsound ({:.2}s)",
        a.range,
        started.elapsed().as_secs_f64()
    )?;
    Ok(if errors {
        EXIT_ERROR
    } else if unsound > 0 {
        EXIT_MISMATCH
    } else {
        EXIT_OK
    })
}

fn check_problem(a: &CheckArgs, out: &mut dyn Write) -> CmdResult {
    let p = load_problem(&a.file, &a.rules)?;
    let norm = Normalizer::new(&p.env, &p.db).with_fuel(a.fuel);
    let ctx = p.ctx();
    let mut code = EXIT_OK;
    for (i, goal) in p.goals.iter().enumerate() {
        let label = goal.label(i);
        let nf = match norm.normalize(&goal.expr, &ctx) {
            Ok(t) => t.output,
            Err(NormalizeError::FuelExhausted(t)) => {
                writeln!(out, "{label}: fuel exhausted; checking the partial result")?;
                code = code.max(EXIT_FUEL);
                t.output
            }
            Err(e) => {
                eprintln!("{}:{}: {e}", a.file.display(), goal.pos);
                code = code.max(EXIT_ERROR);
                continue;
            }
        };
        let mut pair = (goal.expr.clone(), nf.clone());
        let mut hyps = ctx.clone();
        let abstract_ = [&pair.0, &pair.1].into_iter().chain(&ctx.hyps).any(|e| e.mentions_user_type());
        if abstract_ {
            let inst = |e| abstract_instantiate(e, &Ty::Rat, &p.env);
            let all = (|| -> Result<_, crate::oracle::InstantiateTypeError> {
                let hs = ctx.hyps.iter().map(inst).collect::<Result<Vec<_>, _>>()?;
                Ok((inst(&pair.0)?, inst(&pair.1)?, hs))
            })();
            match all {
                Ok((x, y, hs)) => {
                    writeln!(out, "{label}: abstract types instantiated at rat")?;
                    pair = (x, y);
                    hyps = Context::new(hs);
                }
                Err(e) => {
                    writeln!(out, "{label}: Skipped ({e})")?;
                    continue;
                }
            }
        }
        match check_equiv_exhaustive(&pair.0, &pair.1, &hyps, a.range, Exec::default()) {
            Ok(v) if v.is_equivalent() => writeln!(out, "{label}: {nf}  [equivalent at range {}]", a.range)?,
            Ok(v) => {
                code = code.max(EXIT_MISMATCH);
                writeln!(out, "{label}: {nf}  [{v}]")?;
            }
            Err(e) => writeln!(out, "{label}: Skipped ({e})")?,
        }
    }
    Ok(code)
}
