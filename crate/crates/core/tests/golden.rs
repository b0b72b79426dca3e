//! Worked examples for each operation, with exact expected outputs.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use castnorm::normalize::{Pass, Step, TraceJson, NUMERAL_LIFT, NUMERAL_RESTORE, SPLIT_LEFT, SPLIT_RIGHT};
use castnorm::oracle::{
    abstract_instantiate, check_equiv_exhaustive, check_rule_sound, eval, Assignment, Soundness, Value, Verdict,
};
use castnorm::rules::{
    classify, instantiate, load_rules, match_pattern, parse_rule_line, Class, Dir, Pattern, RuleError, RuleItem,
};
use castnorm::term::{BinaryNumeral, CastCount, Op, Pos, TypeError};
use castnorm::{parse_expr, Context, Exec, Expr, Normalizer, RuleDb, Trace, Ty, TypeEnv};

fn env() -> TypeEnv {
    let mut env = TypeEnv::stdlib();
    for (v, t) in [("m", Ty::Nat), ("n", Ty::Nat), ("p", Ty::Nat), ("z", Ty::Int), ("q", Ty::Rat)] {
        env.declare_var(v, &t).unwrap();
    }
    env
}

fn alpha_env() -> TypeEnv {
    let mut env = env();
    let alpha = env.declare_type("alpha").unwrap();
    env.declare_coercion(&Ty::Nat, &alpha).unwrap();
    env.declare_coercion(&Ty::Int, &alpha).unwrap();
    env
}

fn ex(env: &TypeEnv, src: &str) -> Expr {
    parse_expr(src, env).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn pat(src: &str) -> Pattern {
    let line = format!("lemma p : {src} = {src}");
    match parse_rule_line(&line, Pos::default(), &TypeEnv::stdlib()).unwrap() {
        RuleItem::Lemma(eq) => eq.lhs,
        _ => unreachable!(),
    }
}

fn nf(env: &TypeEnv, src: &str, ctx: &Context) -> Trace {
    let db = RuleDb::prelude();
    let t = Normalizer::new(env, &db).normalize(&ex(env, src), ctx).unwrap();
    t.verify().unwrap();
    t
}

fn rules(t: &Trace) -> Vec<&str> {
    t.steps.iter().map(|s| s.rule.as_str()).collect()
}

// ---- term-core -------------------------------------------------------------

#[test]
fn type_of_examples() {
    let env = env();
    assert_eq!(env.type_of(&ex(&env, "cast(int, m)")), Ok(Ty::Int));
    assert_eq!(env.type_of(&ex(&env, "cast(int, m) < 10:int")), Ok(Ty::Prop));
    let mixed = Expr::binary(Op::Add, Expr::var("m", Ty::Nat), Expr::var("z", Ty::Int));
    assert!(matches!(env.type_of(&mixed), Err(TypeError::IllTypedApplication { .. })));
}

#[test]
fn coercion_reachability() {
    let env = TypeEnv::stdlib();
    assert!(env.coercion_exists(&Ty::Nat, &Ty::Rat));
    assert!(!env.coercion_exists(&Ty::Int, &Ty::Nat));
    let mut g = TypeEnv::empty();
    let alpha = g.declare_type("alpha").unwrap();
    g.declare_coercion(&Ty::Nat, &alpha).unwrap();
    g.declare_coercion(&Ty::Int, &alpha).unwrap();
    assert!(!g.coercion_exists(&Ty::Nat, &Ty::Int));
}

#[test]
fn cast_counts() {
    let env = env();
    let count = |s: &str| ex(&env, s).count_casts();
    assert_eq!(count("cast(rat, cast(int, m + n))"), CastCount { head: 2, internal: 0 });
    assert_eq!(count("cast(int, m) + cast(int, n)"), CastCount { head: 0, internal: 2 });
    assert_eq!(count("m"), CastCount { head: 0, internal: 0 });
}

#[test]
fn binary_numerals() {
    let view = |v: u32| BinaryNumeral::of(&BigUint::from(v)).to_string();
    assert_eq!(view(10), "bit0(bit1(bit0(one)))");
    assert_eq!(view(0), "zero");
    assert_eq!(view(7), "bit1(bit1(one))");
}

#[test]
fn pretty_printing() {
    let env = env();
    assert_eq!(Expr::cast(Ty::Nat, Ty::Int, Expr::var("m", Ty::Nat)).to_string(), "cast(int, m)");
    let sum = Expr::binary(Op::Add, Expr::var("m", Ty::Nat), Expr::var("n", Ty::Nat));
    assert_eq!(Expr::binary(Op::Lt, sum, Expr::num(10u32, Ty::Nat)).to_string(), "m + n < 10:nat");
    let neg = Expr::app(Op::Neg, vec![Expr::num(3u32, Ty::Int)]);
    assert_eq!(neg.to_string(), "-(3:int)");
    assert_eq!(ex(&env, "-(3:int)"), neg);
}

// ---- rule-engine ------------------------------------------------------------

#[test]
fn classification_examples() {
    assert_eq!(classify(&pat("cast('T, ?a + ?b)"), &pat("cast('T, ?a) + cast('T, ?b)")), Ok(Class::Move));
    assert_eq!(classify(&pat("cast('T, ?a) < cast('T, ?b)"), &pat("?a < ?b")), Ok(Class::Elim));
    assert_eq!(classify(&pat("cast('T, cast('S, ?a))"), &pat("cast('T, ?a)")), Ok(Class::Squash));
    assert!(classify(&pat("?a < ?b"), &pat("?b < ?a")).is_err());
}

#[test]
fn matching_examples() {
    let env = env();
    let s = match_pattern(&pat("cast('T, ?a + ?b)"), &ex(&env, "cast(int, m + n)")).unwrap();
    assert_eq!(s.ty("T"), Some(&Ty::Int));
    assert_eq!(s.term("a"), Some(&ex(&env, "m")));
    assert_eq!(s.term("b"), Some(&ex(&env, "n")));
    assert!(match_pattern(&pat("cast(nat -> 'T, ?a)"), &ex(&env, "cast(rat, z)")).is_none());
    assert!(match_pattern(&pat("?a + ?a"), &ex(&env, "m + n")).is_none());
    let s = match_pattern(&pat("?a + ?a"), &ex(&env, "m + m")).unwrap();
    assert_eq!(s.term("a"), Some(&ex(&env, "m")));
    assert_eq!(instantiate(&pat("?a + ?a"), &s, &env).unwrap(), ex(&env, "m + m"));
}

#[test]
fn apply_rule_at_examples() {
    let env = env();
    let db = RuleDb::prelude();
    let norm = Normalizer::new(&env, &db);
    let e = ex(&env, "cast(int, m - n)");
    let ctx = Context::new(vec![ex(&env, "n <= m")]);
    let (out, step) = norm.apply_rule_at("cast_sub", Dir::L2R, &e, &[], &ctx).unwrap();
    assert_eq!(out, ex(&env, "cast(int, m) - cast(int, n)"));
    assert_eq!(step.before, e);
    assert!(norm.apply_rule_at("cast_sub", Dir::L2R, &e, &[], &Context::empty()).is_none());
    let sum = ex(&env, "cast(int, m) + cast(int, n)");
    let (out, _) = norm.apply_rule_at("cast_add", Dir::R2L, &sum, &[], &Context::empty()).unwrap();
    assert_eq!(out, ex(&env, "cast(int, m + n)"));
}

#[test]
fn load_rules_examples() {
    let mut env = TypeEnv::stdlib();
    let db = load_rules("rule my_cast_one : cast('T, 1:nat) = 1:'T", &mut env).unwrap();
    assert_eq!(db.rule("my_cast_one").unwrap().class, Class::Squash);
    assert_eq!(db.rules()[0].name.as_ref(), "cast_add", "prelude loads first");
    let err = load_rules("rule bad : ?a = ?a", &mut TypeEnv::stdlib()).unwrap_err();
    assert!(matches!(err, RuleError::Classify { .. }));
    let forced = "rule forced [elim] : cast('T, ?a + ?b) = cast('T, ?a) + cast('T, ?b)";
    let db = load_rules(forced, &mut TypeEnv::stdlib()).unwrap();
    let r = db.rule("forced").unwrap();
    assert!(r.overridden);
    assert_eq!(r.class, Class::Elim);
    let err = load_rules("rule cast_add : cast('T, 0:nat) = 0:'T", &mut TypeEnv::stdlib()).unwrap_err();
    assert!(matches!(err, RuleError::DuplicateName { .. }));
    assert_eq!(err.pos().line, 1);
}

// ---- normalizer ---------------------------------------------------------------

#[test]
fn normalize_examples() {
    let env = env();
    let t = nf(&env, "cast(int, m) + cast(int, n) < 10:int", &Context::empty());
    assert_eq!(t.output, ex(&env, "m + n < 10:nat"));
    assert_eq!(rules(&t), [NUMERAL_LIFT, "cast_add", "cast_lt"]);

    let t = nf(&env, "cast(rat, n) + cast(rat, z) = 2:rat", &Context::empty());
    assert_eq!(t.output.to_string(), "cast(int, n) + z = 2:int");
    assert_eq!(rules(&t), [NUMERAL_LIFT, SPLIT_LEFT, "cast_add", SPLIT_RIGHT, "cast_eq", NUMERAL_RESTORE]);

    let t = nf(&env, "m", &Context::empty());
    assert!(t.steps.is_empty());
    assert_eq!(t.output, ex(&env, "m"));

    let env = alpha_env();
    let t = nf(&env, "cast(alpha, n) - cast(alpha, z) < 5:alpha", &Context::empty());
    assert_eq!(t.output.to_string(), "cast(int, n) - z < 5:int");
}

#[test]
fn lift_numerals_examples() {
    let env = env();
    let db = RuleDb::prelude();
    let norm = Normalizer::new(&env, &db);
    let (out, steps) = norm.pass_lift_numerals(&ex(&env, "10:int"));
    assert_eq!(out.to_string(), "cast(int, 10:nat)");
    assert_eq!(steps.len(), 1);
    assert!(steps[0].to_string().ends_with("(bit0(bit1(bit0(one))))"));
    assert_eq!(norm.pass_lift_numerals(&ex(&env, "1:int")).0, ex(&env, "1:int"));
    assert_eq!(norm.pass_lift_numerals(&ex(&env, "5:nat")).0, ex(&env, "5:nat"));
}

#[test]
fn move_elim_examples() {
    let env = env();
    let db = RuleDb::prelude();
    let norm = Normalizer::new(&env, &db);
    let ctx = Context::empty();
    let run = |s: &str| norm.pass_move_elim(&ex(&env, s), &ctx).unwrap().0;
    assert_eq!(run("cast(int, m) + cast(int, n)"), ex(&env, "cast(int, m + n)"));
    assert_eq!(run("cast(int, m + n) < cast(int, 10:nat)"), ex(&env, "m + n < 10:nat"));
    assert_eq!(run("cast(rat, n) - cast(rat, z)"), ex(&env, "cast(rat, cast(int, n) - z)"));
}

#[test]
fn split_examples() {
    let env = env();
    let e = ex(&env, "cast(rat, n) + cast(rat, z)");
    let (side, arg) = castnorm::normalize::split_heuristic(&e, &env).unwrap();
    assert_eq!(side, castnorm::normalize::Side::Left);
    assert_eq!(arg, ex(&env, "cast(rat, cast(int, n))"));
    let e = ex(&env, "cast(rat, cast(int, n) - z) = cast(rat, 2:nat)");
    let (side, arg) = castnorm::normalize::split_heuristic(&e, &env).unwrap();
    assert_eq!(side, castnorm::normalize::Side::Right);
    assert_eq!(arg, ex(&env, "cast(rat, cast(int, 2:nat))"));
    assert!(castnorm::normalize::split_heuristic(&ex(&env, "cast(int, m) + cast(int, n)"), &env).is_none());
}

#[test]
fn squash_and_restore_examples() {
    let env = env();
    let db = RuleDb::prelude();
    let norm = Normalizer::new(&env, &db);
    let squash = |s: &str| norm.pass_squash(&ex(&env, s)).unwrap().0;
    assert_eq!(squash("cast(rat, cast(int, m))"), ex(&env, "cast(rat, m)"));
    assert_eq!(squash("cast(int, 1:nat)"), ex(&env, "1:int"));
    assert_eq!(squash("cast(int, m) + z"), ex(&env, "cast(int, m) + z"));
    let restore = |s: &str| norm.pass_restore_numerals(&ex(&env, s)).0;
    assert_eq!(restore("cast(int, 2:nat)"), ex(&env, "2:int"));
    assert_eq!(restore("cast(int, 5:nat)"), ex(&env, "5:int"));
    assert_eq!(restore("m + n"), ex(&env, "m + n"));
}

#[test]
fn push_cast_examples() {
    let env = env();
    let db = RuleDb::prelude();
    let norm = Normalizer::new(&env, &db);
    let push = |s: &str| norm.push_cast(&ex(&env, s), &Context::empty()).unwrap();
    assert_eq!(push("cast(int, m + n)").output, ex(&env, "cast(int, m) + cast(int, n)"));
    let t = push("cast(rat, cast(int, m))");
    assert_eq!(t.output, ex(&env, "cast(rat, m)"));
    assert!(t.steps.iter().all(|s| s.pass == Pass::Push));
    assert!(push("m + n").steps.is_empty());
}

#[test]
fn equiv_examples() {
    let env = env();
    let db = RuleDb::prelude();
    let norm = Normalizer::new(&env, &db);
    let ctx = Context::empty();
    let a = ex(&env, "cast(rat, n) - cast(rat, z) < 5:rat");
    let b = ex(&env, "cast(int, n) - z < 5:int");
    assert!(norm.equiv_mod_cast(&a, &b, &ctx));
    assert!(norm.equiv_mod_cast(&a, &a, &ctx));
    assert!(!norm.equiv_mod_cast(&ex(&env, "m < 3:nat"), &ex(&env, "m < 4:nat"), &ctx));
}

#[test]
fn assumption_examples() {
    let env = env();
    let db = RuleDb::prelude();
    let norm = Normalizer::new(&env, &db);
    let ctx = Context::new(vec![ex(&env, "1:nat <= p")]);
    assert_eq!(norm.assumption_mod_cast(&ex(&env, "1:int <= cast(int, p)"), &ctx), Some(0));
    assert_eq!(norm.assumption_mod_cast(&ex(&env, "1:int <= cast(int, p)"), &Context::empty()), None);
    let ctx = Context::new(vec![ex(&env, "m < n"), ex(&env, "z != 0:int")]);
    assert_eq!(norm.assumption_mod_cast(&ex(&env, "cast(rat, z) != 0:rat"), &ctx), Some(1));
}

#[test]
fn rw_mod_cast_examples() {
    let mut env = env();
    let db = load_rules("lemma two_mul : ?a:'T + ?a = 2:'T * ?a", &mut env).unwrap();
    let norm = Normalizer::new(&env, &db);
    let ctx = Context::empty();
    let e = ex(&env, "m + n");
    assert_eq!(norm.rw_mod_cast(&e, &[], &ctx).unwrap().output, e);

    let goal = ex(&env, "cast(int, m) + cast(int, m) = cast(int, n)");
    let t = norm.rw_mod_cast(&goal, &[("two_mul".into(), Dir::L2R)], &ctx).unwrap();
    assert_eq!(t.output.to_string(), "2:nat * m = n");
    assert_eq!(rules(&t), ["cast_add", "cast_eq", "two_mul"]);
    t.verify().unwrap();

    let err = norm.rw_mod_cast(&goal, &[("two_mull".into(), Dir::L2R)], &ctx).unwrap_err();
    assert!(matches!(err, castnorm::NormalizeError::RewriteFailed { .. }));
    let err = norm.rw_mod_cast(&ex(&env, "m"), &[("two_mul".into(), Dir::L2R)], &ctx).unwrap_err();
    assert!(matches!(err, castnorm::NormalizeError::RewriteFailed { .. }));
}

#[test]
fn trace_json_round_trip() {
    let env = env();
    let t = nf(&env, "cast(rat, n) + cast(rat, z) = 2:rat", &Context::empty());
    let text = serde_json::to_string(&t.to_json()).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&str> = value.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys.len(), 4);
    for k in ["input", "output", "fuel_used", "steps"] {
        assert!(keys.contains(&k), "{k}");
    }
    let step = &value["steps"][1];
    assert_eq!(step["pass"], "split");
    assert_eq!(step["rule"], "split-left");
    assert_eq!(step["dir"], "R2L");
    assert_eq!(step["path"], serde_json::json!([0, 0]));
    let back: TraceJson = serde_json::from_str(&text).unwrap();
    let t2 = Trace::from_json(&back, &env).unwrap();
    assert_eq!(t2, t);
    t2.verify().unwrap();
}

#[test]
fn steps_replace_subterms() {
    let env = env();
    let t = nf(&env, "cast(int, m) + cast(int, n) < 10:int", &Context::empty());
    let mut cur = t.input.clone();
    for Step { path, before, after, .. } in &t.steps {
        assert_eq!(cur.at(path), Some(before));
        cur = cur.replace_at(path, after.clone()).unwrap();
    }
    assert_eq!(cur, t.output);
}

// ---- oracle -------------------------------------------------------------------

#[test]
fn eval_examples() {
    let env = env();
    let mut a = Assignment::default();
    a.insert("m", Value::Nat(2u32.into()));
    a.insert("n", Value::Nat(5u32.into()));
    assert_eq!(eval(&ex(&env, "m - n"), &a), Ok(Value::Nat(0u32.into())));
    let two = BigRational::from_integer(BigInt::from(2));
    assert_eq!(eval(&ex(&env, "cast(rat, 2:nat)"), &Assignment::default()), Ok(Value::Rat(two)));
    a.insert("m", Value::Nat(3u32.into()));
    a.insert("n", Value::Nat(4u32.into()));
    assert_eq!(eval(&ex(&env, "cast(int, m) + cast(int, n) < 10:int"), &a), Ok(Value::Bool(true)));
}

#[test]
fn exhaustive_equivalence_examples() {
    let env = env();
    let a = ex(&env, "cast(int, m - n)");
    let b = ex(&env, "cast(int, m) - cast(int, n)");
    let ctx = Context::new(vec![ex(&env, "n <= m")]);
    for &exec in Exec::all() {
        assert_eq!(check_equiv_exhaustive(&a, &b, &ctx, 4, exec), Ok(Verdict::Equivalent));
        match check_equiv_exhaustive(&a, &b, &Context::empty(), 4, exec).unwrap() {
            Verdict::Counterexample(asg) => assert_eq!(asg.to_string(), "m=0, n=1"),
            v => panic!("{v:?}"),
        }
        assert_eq!(check_equiv_exhaustive(&a, &a, &Context::empty(), 4, exec), Ok(Verdict::Equivalent));
    }
}

#[test]
fn rule_soundness_examples() {
    let env = TypeEnv::stdlib();
    let db = RuleDb::prelude();
    for name in ["cast_add", "cast_cast"] {
        let s = check_rule_sound(db.rule(name).unwrap(), &env, 4, Exec::default()).unwrap();
        assert!(s.is_sound(), "{name}");
    }
    let line = "rule cast_sub_bad : cast(nat -> 'T, ?a - ?b) = cast(nat -> 'T, ?a) - cast(nat -> 'T, ?b)";
    let RuleItem::Rule(r) = parse_rule_line(line, Pos::default(), &env).unwrap() else { unreachable!() };
    assert!(matches!(check_rule_sound(&r, &env, 4, Exec::default()).unwrap(), Soundness::Unsound(_)));
}

#[test]
fn abstract_instantiation_examples() {
    let env = alpha_env();
    let e = ex(&env, "cast(alpha, n) - cast(alpha, z) < 5:alpha");
    assert_eq!(abstract_instantiate(&e, &Ty::Rat, &env).unwrap(), ex(&env, "cast(rat, n) - cast(rat, z) < 5:rat"));
    let c = ex(&env, "cast(int, m) + z");
    assert_eq!(abstract_instantiate(&c, &Ty::Rat, &env).unwrap(), c);

    let mut env = alpha_env();
    env.declare_op("norm", 1, castnorm::term::OpKind::Fun).unwrap();
    env.declare_var("x", &Ty::user("alpha")).unwrap();
    let e = ex(&env, "norm(x)");
    assert!(abstract_instantiate(&e, &Ty::Rat, &env).is_err());
}
