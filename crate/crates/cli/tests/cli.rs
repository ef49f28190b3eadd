//! End-to-end tests against the compiled binary: output bytes, stderr
//! metadata, exit codes, and the budget override chain.

use std::path::Path;
use std::process::{Command, Output};

fn slpforge(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_slpforge"));
    // Isolate tests from the ambient environment.
    cmd.env_remove("SLPFORGE_BUDGET");
    cmd.args(args);
    cmd
}

fn run(args: &[&str]) -> Output {
    slpforge(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn gen_k4_rle_is_exact() {
    let out = run(&["gen", "--k", "4", "--rle"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "a*20 b a*41 b a*82 b a*165\n");
    assert_eq!(
        stderr(&out),
        "k=4 order=2 w=10100101 blocks=20,41,82,165 n=311\n"
    );
}

#[test]
fn gen_below_range_is_usage_error() {
    let out = run(&["gen", "--k", "1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("range"));
}

#[test]
fn gen_writes_raw_bytes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s2.txt");
    let out = run(&["gen", "--k", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "", "data goes to the file, not stdout");
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, b"aaaabaaaaaaaaa", "a^4 b a^9");
}

#[test]
fn compress_unary_27_gives_golden_grammar() {
    let out = run(&["compress", "--unary", "27"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "S -> X3 X3 X3 X1 'a'\nX1 -> 'a' 'a'\nX2 -> X1 X1\nX3 -> X2 X2\n"
    );
    assert!(stderr(&out).contains("n=27 size=11 rounds=3"));
}

#[test]
fn compress_unary_5_under_digram_variant() {
    let out = run(&["compress", "--unary", "5", "--variant", "digram"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "S -> X1 X1 'a'\nX1 -> 'a' 'a'\n");
}

#[test]
fn compress_requires_exactly_one_source() {
    assert_eq!(code(&run(&["compress"])), 2);
    assert_eq!(code(&run(&["compress", "--unary", "5", "-i", "x.rle"])), 2);
}

#[test]
fn compress_rle_input_with_round_cap_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let word = dir.path().join("s4.rle");
    let trace = dir.path().join("trace.txt");
    let grammar = dir.path().join("s4.slp");
    assert_eq!(
        code(&run(&[
            "gen",
            "--k",
            "4",
            "--rle",
            "--out",
            word.to_str().unwrap()
        ])),
        0
    );

    let out = run(&[
        "compress",
        "-i",
        word.to_str().unwrap(),
        "--rounds",
        "3",
        "--trace",
        trace.to_str().unwrap(),
        "--out",
        grammar.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("n=311 size=51 rounds=3"));

    let trace = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(
        trace,
        "round=1 chosen=\"'a' 'a'\" count=153 fresh=X1 size_before=311 size_after=160\n\
         round=2 chosen=\"X1 X1\" count=76 fresh=X2 size_before=160 size_after=86\n\
         round=3 chosen=\"X2 X2\" count=37 fresh=X3 size_before=86 size_after=51\n"
    );

    let grammar = std::fs::read_to_string(&grammar).unwrap();
    let start_line = grammar.lines().next().unwrap();
    let mut want = String::from("S -> X3 X3 X2 'b'");
    want.push_str(&" X3".repeat(5));
    want.push_str(" 'a' 'b'");
    want.push_str(&" X3".repeat(10));
    want.push_str(" X1 'b'");
    want.push_str(&" X3".repeat(20));
    want.push_str(" X2 'a'");
    assert_eq!(start_line, want);
}

#[test]
fn compress_reads_raw_files_without_rle_suffix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("word.txt");
    std::fs::write(&path, "abcabc").unwrap();
    let out = run(&["compress", "-i", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "S -> X1 X1\nX1 -> 'a' 'b' 'c'\n");
}

#[test]
fn compress_missing_file_is_usage_error() {
    let out = run(&["compress", "-i", "/nonexistent/word.rle"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn analyze_reports_bounds_and_sizes() {
    let out = run(&["analyze", "--unary", "27"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "n=27\nruns=1\nlower_bound=1\nsize_mg=11\nsize_digram=11\n"
    );
}

#[test]
fn verify_passes_for_k4_and_k10() {
    for k in ["4", "10"] {
        let out = run(&["verify", "--k", k]);
        assert_eq!(code(&out), 0, "k={k}: {}", stderr(&out));
        assert!(stdout(&out).contains(&format!("verify k={k}: PASS")));
    }
}

#[test]
fn verify_below_k4_is_usage_error() {
    let out = run(&["verify", "--k", "3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bench_single_row_is_exact() {
    let out = run(&["bench", "--kmin", "4", "--kmax", "4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "k,n,repair_size,small_slp_size,ratio,rounds,ms\n4,311,28,24,1.166667,7,0\n"
    );
}

#[test]
fn bench_is_deterministic_and_judges_monotonicity() {
    let a = run(&["bench", "--kmin", "4", "--kmax", "7"]);
    let b = run(&["bench", "--kmin", "4", "--kmax", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(
        stdout(&a),
        stdout(&b),
        "CSV must be byte-identical across runs"
    );
    assert!(stderr(&a).contains("ratio monotonicity for k in [6, 7]: strictly increasing"));
}

#[test]
fn bench_inverted_range_is_usage_error() {
    let out = run(&["bench", "--kmin", "5", "--kmax", "4"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn oracle_word_prints_size_and_witness() {
    let out = run(&["oracle", "--word", "abcabc"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "S -> A1 A1\nA1 -> 'a' 'b' 'c'\n");
    assert_eq!(stderr(&out), "g=5\n");
}

#[test]
fn oracle_word_beyond_cap_is_usage_error() {
    let out = run(&["oracle", "--word", "aaaaaaaaaaaaa"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("12"));
}

#[test]
fn oracle_corpus_reports_zero_violations() {
    let out = run(&["oracle", "--all-binary-upto", "4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "checked=30 violations=0\n");
}

#[test]
fn budget_flag_env_and_default_precedence() {
    // The k = 8 word is 86491 bytes; a 100-byte budget cannot hold it.
    let flag = run(&["gen", "--k", "8", "--budget", "100"]);
    assert_eq!(code(&flag), 3);
    assert!(stderr(&flag).contains("budget"));

    let env = slpforge(&["gen", "--k", "8"])
        .env("SLPFORGE_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(code(&env), 3);

    // The flag wins over the environment.
    let both = slpforge(&["gen", "--k", "8", "--budget", "2147483648"])
        .env("SLPFORGE_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(code(&both), 0);
    assert_eq!(both.stdout.len(), 86491);

    // And the default suffices.
    let default = run(&["gen", "--k", "8"]);
    assert_eq!(code(&default), 0);
    assert_eq!(default.stdout.len(), 86491);

    let bad_env = slpforge(&["gen", "--k", "8"])
        .env("SLPFORGE_BUDGET", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&bad_env), 2);
}

#[test]
fn rle_and_raw_outputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("s5.txt");
    let rle = dir.path().join("s5.rle");
    assert_eq!(
        code(&run(&["gen", "--k", "5", "--out", raw.to_str().unwrap()])),
        0
    );
    assert_eq!(
        code(&run(&[
            "gen",
            "--k",
            "5",
            "--rle",
            "--out",
            rle.to_str().unwrap()
        ])),
        0
    );
    let a = run(&["compress", "-i", raw.to_str().unwrap()]);
    let b = run(&["compress", "-i", rle.to_str().unwrap()]);
    assert_eq!(code(&a), 0);
    assert_eq!(
        stdout(&a),
        stdout(&b),
        "grammar must not depend on the input format"
    );
}

fn exists(path: &str) -> bool {
    Path::new(path).exists()
}

#[test]
fn data_goes_to_out_file_not_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let out = run(&[
        "bench",
        "--kmin",
        "4",
        "--kmax",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "");
    assert!(exists(path.to_str().unwrap()));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("k,n,repair_size,small_slp_size,ratio,rounds,ms\n"));
    assert_eq!(csv.lines().count(), 3);
}
