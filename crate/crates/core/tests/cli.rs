use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_castnorm"))
        .args(args)
        .current_dir(fixture(""))
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[track_caller]
fn expect(args: &[&str], code: i32, out: &str) -> Output {
    let o = run(args);
    assert_eq!(o.status.code(), Some(code), "{args:?}\nstdout: {}\nstderr: {}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o), out, "{args:?}");
    o
}

#[test]
fn normalize_prints_normal_forms() {
    expect(&["normalize", "add_lt.prob"], 0, "m + n < 10:nat\n");
    expect(&["normalize", "split.prob"], 0, "cast(int, n) + z = 2:int\n");
    expect(&["normalize", "ennreal.prob"], 0, "a + b = c\na * b < c\n");
    expect(&["normalize", "empty.prob"], 0, "");
}

#[test]
fn trace_lists_every_step() {
    let o = run(&["normalize", "--trace", "split.prob"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "cast(int, n) + z = 2:int");
    assert_eq!(lines.len(), 7);
    assert!(lines[2].starts_with("  [split] split-left R2L @[0,0]: "));
    assert!(lines[6].starts_with("  [4] numeral-restore L2R @[1]: "));
}

#[test]
fn json_is_one_object_per_goal() {
    let o = run(&["normalize", "--json", "add_lt.prob"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(v["output"], "m + n < 10:nat");
    assert_eq!(v["fuel_used"], 2);
    assert_eq!(v["steps"].as_array().unwrap().len(), 3);
}

#[test]
fn push_moves_casts_down() {
    expect(&["push", "add_lt.prob"], 0, "cast(int, m) + cast(int, n) < 10:int\n");
}

#[test]
fn rw_applies_named_lemmas() {
    expect(&["normalize", "--rw", "two_mul", "--rules", "double.rules", "rw.prob"], 0, "2:nat * m = n\n");
    let o = expect(&["normalize", "--rw", "two_mul", "rw.prob"], 1, "");
    assert!(stderr(&o).contains("rw.prob:4:1: rw `two_mul`: no such rule"));
}

#[test]
fn equiv_reports_closures() {
    expect(&["equiv", "exact_mod_cast.prob"], 0, "#1: closed by h\n");
    expect(&["equiv", "--hyp", "h", "exact_mod_cast.prob"], 0, "#1: closed by h\n");
    expect(&["equiv", "--from-context", "subgoals.prob"], 0, "one_le: closed by hp\nnonzero: closed by hz\n");
    expect(&["equiv", "conditional.prob"], 0, "#1: closed by rfl\n");
}

#[test]
fn equiv_mismatch_exits_three() {
    let o = expect(&["equiv", "unrelated.prob"], 3, "#1: not equivalent\n  goal: m < 4:nat\n  h: m < 3:nat\n");
    assert!(stderr(&o).contains("unrelated.prob:6:1: goal #1 does not follow modulo casts"));
    assert_eq!(run(&["equiv", "conditional_empty.prob"]).status.code(), Some(3));
    let o = expect(&["equiv", "--hyp", "nope", "exact_mod_cast.prob"], 1, "");
    assert!(stderr(&o).contains("no hypothesis named `nope`"));
}

#[test]
fn classify_lists_classes() {
    let o = expect(&["classify", "override.rules"], 0, "cast_add_forced → elim (override)\ncast_mul → move\n");
    assert!(stderr(&o).is_empty());
    let prelude = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("prelude.rules");
    let o = run(&["classify", prelude.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 13);
    assert!(stdout(&o).contains("cast_lt → elim\n"));
}

#[test]
fn classify_rejects_unclassifiable_rules() {
    let o = expect(&["classify", "both_sides.rules"], 1, "");
    assert!(stderr(&o).starts_with("both_sides.rules:3:6: rule `cast_add_comm` is not an elim, move or squash lemma"));
}

#[test]
fn check_finds_unsound_rules() {
    let o = run(&["check", "unconditional_sub.rules"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(text.starts_with("nat_cast_sub_bad: Unsound\n  instance: cast(int, a - b) = cast(int, a) - cast(int, b)\n"));
    assert!(text.contains("  counterexample: a=0, b=1\n"));
    assert!(text.contains("checked 1 rules at range 4: 1 unsound"));
}

#[test]
fn check_accepts_the_prelude() {
    let prelude = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("prelude.rules");
    let o = run(&["check", "--range", "2", prelude.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("checked 13 rules at range 2: 0 unsound"));
}

#[test]
fn check_problem_goals() {
    expect(&["check", "add_lt.prob"], 0, "#1: m + n < 10:nat  [equivalent at range 4]\n");
}

#[test]
fn fuel_exhaustion_exits_two_with_partial_trace() {
    let o = run(&["normalize", "looping.prob", "--rules", "looping.rules", "--fuel", "20"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("looping.prob:5:1: fuel exhausted after 20 rewrites"));
    let text = stdout(&o);
    assert!(text.starts_with("cast(int, m + n) + z  (partial)\n"));
    assert_eq!(text.lines().filter(|l| l.contains("loop_")).count(), 20);
}

#[test]
fn bad_input_points_at_the_error() {
    let o = expect(&["normalize", "bad_var.prob"], 1, "");
    assert_eq!(stderr(&o).trim(), "bad_var.prob:4:5: undeclared variable `k`");
    let o = expect(&["normalize", "missing.prob"], 1, "");
    assert!(stderr(&o).starts_with("missing.prob:"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["equiv", "--hyp", "h", "--from-context", "exact_mod_cast.prob"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
