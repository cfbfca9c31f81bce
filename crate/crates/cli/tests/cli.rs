use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fsindep_cli::GeneratorSpec;
use proptest::prelude::*;

fn fsindep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsindep")).args(args).env_remove("FSINDEP_MAX_MEM_MB").output().unwrap()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name).to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let p: PathBuf = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn generate_self_similar_prefix() {
    let o = fsindep(&["generate", "self-similar", "--length", "8"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "11011001\n");
    let o = fsindep(&["generate", "spec", "--spec", "even(selfsim:b=2)", "--length", "8"]);
    assert_eq!(stdout(&o), "11011001\n");
}

#[test]
fn invalid_arguments_exit_2() {
    assert_eq!(fsindep(&["generate", "spec", "--spec", "rand:speed=1", "--length", "8"]).status.code(), Some(2));
    assert_eq!(fsindep(&["stats", "--word", "/nonexistent/x.word"]).status.code(), Some(2));
    assert_eq!(fsindep(&["experiment", "measure-one", "-n", "100", "-k", "8"]).status.code(), Some(2));
    assert_eq!(fsindep(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.word", "0120\n");
    assert_eq!(fsindep(&["stats", "--word", &bad]).status.code(), Some(2));
}

#[test]
fn nondeterministic_automaton_exits_3() {
    let o = fsindep(&["check-automaton", "--automaton", &fixture("shuffle.aut"), "--ell", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("2-deterministic: no"));
    let o = fsindep(&["check-automaton", "--automaton", &fixture("join.aut"), "--ell", "2", "--forward-pairs", "0", "--eliminate"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("forward pairs of 0: 4"));
}

#[test]
fn rejected_word_exits_3_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "zeros.aut", "automaton k=2 alphabet=2 initial=q\nq 0,0 q\n");
    let w = write(dir.path(), "x.word", "0001000\n");
    let csv = dir.path().join("out.csv");
    let o = fsindep(&["compress", "--automaton", &m, "--word", &w, "-n", "7", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!csv.exists());
    let o = fsindep(&["compress", "--automaton", &m, "--word", &w, "-n", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("ratio: 1.000000000"));
}

#[test]
fn memory_cap_exits_4() {
    let o = Command::new(env!("CARGO_BIN_EXE_fsindep"))
        .args(["generate", "random", "--length", "5000000"])
        .env("FSINDEP_MAX_MEM_MB", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
    assert!(o.stdout.is_empty());
}

#[test]
fn stats_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "x.word", "00011011");
    let o = fsindep(&["stats", "--word", &w, "--max-block", "2", "--aligned"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "row,ell,block,count,value");
    assert_eq!(lines[1], "block,1,0,4,0.500000000");
    assert!(lines.contains(&"summary,2,00,4,0.000000000"));
    assert_eq!(lines.len(), 1 + 3 + 5);
}

#[test]
fn condcompress_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.word");
    let y = dir.path().join("y.word");
    fsindep(&["generate", "random", "--seed", "1", "--length", "20000", "--out", x.to_str().unwrap()]);
    fsindep(&["generate", "spec", "--spec", "xor(rand:seed=1,bern:p=0.05,seed=2)", "--length", "20000", "--out", y.to_str().unwrap()]);
    let o = fsindep(&["condcompress", "--x", x.to_str().unwrap(), "--y", y.to_str().unwrap(), "-k", "4", "-n", "20000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("round_trip: ok"));
    let rho: f64 = text.lines().find_map(|l| l.strip_prefix("rho_x_given_y: ")).unwrap().parse().unwrap();
    assert!(rho < 0.6, "{rho}");
}

#[test]
fn independence_trials_are_ordered_and_reproducible() {
    let args = ["independence", "--trials", "5", "--seed", "3", "-n", "8192", "-k", "8"];
    let a = fsindep(&args);
    assert_eq!(a.stdout, fsindep(&args).stdout);
    let text = stdout(&a);
    let first: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(first, ["0", "1", "2", "3", "4", "min", "median"]);
}

fn leaf() -> impl Strategy<Value = GeneratorSpec> {
    prop_oneof![
        (2u32..=36).prop_map(|base| GeneratorSpec::SelfSimilar { base }),
        (any::<u64>(), any::<u64>(), 2u32..=36).prop_map(|(seed, stream, base)| GeneratorSpec::Random { seed, stream, base }),
        (0.0f64..=1.0, any::<u64>(), any::<u64>()).prop_map(|(p, seed, stream)| GeneratorSpec::Bernoulli { p, seed, stream }),
        "[01]{1,12}".prop_map(|word| GeneratorSpec::Periodic { word, base: 2 }),
        "[a-z0-9_./]{1,12}".prop_map(|p| GeneratorSpec::File { path: p.into(), base: 2 }),
    ]
}

fn spec() -> impl Strategy<Value = GeneratorSpec> {
    leaf().prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|s| GeneratorSpec::Odd(Box::new(s))),
            inner.clone().prop_map(|s| GeneratorSpec::Even(Box::new(s))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| GeneratorSpec::Join(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| GeneratorSpec::Xor(Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #[test]
    fn spec_round_trips(s in spec()) {
        let text = s.to_string();
        prop_assert_eq!(text.parse::<GeneratorSpec>().unwrap(), s);
    }
}
