use std::fs;
use std::process::{Command, Output};

use cookiehash::bits::parse_bits;
use cookiehash::matrix::cookie_generator;
use cookiehash::{hash_padded, HashParams, IntMat, Label};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cookiehash"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

#[test]
fn hash_matches_library() {
    let params = HashParams::preset("paper-256").unwrap();
    let want = hash_padded(&params, parse_bits("10011110001").unwrap()).to_hex();
    assert_eq!(
        stdout(&["hash", "--preset", "paper-256", "--bits", "10011110001"]).trim(),
        want
    );
    // default prime is the 256-bit preset
    assert_eq!(stdout(&["hash", "--bits", "10011110001"]).trim(), want);
}

#[test]
fn empty_input_hashes_to_a_cubed() {
    let params = HashParams::preset("paper-256").unwrap();
    let a = cookie_generator(Label::A).unwrap();
    let a3 = &(&a * &a) * &a;
    let want = cookiehash::Digest::from_matrix(a3.reduce(params.modulus())).to_hex();
    assert_eq!(
        stdout(&["hash", "--preset", "paper-256", "--bits", ""]).trim(),
        want
    );
}

#[test]
fn raw_hash_small_prime() {
    assert_eq!(
        stdout(&["hash", "--raw", "--prime", "1009", "--bits", "10"]).trim(),
        "0040200805"
    );
    let expected = IntMat::from_i64(1, 2, 2, 5);
    let p = HashParams::from_u64(1009).unwrap();
    assert_eq!(
        cookiehash::Digest::from_matrix(expected.reduce(p.modulus())).to_hex(),
        "0040200805"
    );
}

#[test]
fn hash_counts_operations() {
    let out = stdout(&["hash", "--prime", "1009", "--bits", "1011", "--count-ops"]);
    assert_eq!(
        out.lines().nth(1),
        Some("bits=7 additions=24 multiplications=0")
    );
}

#[test]
fn hash_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let ascii = dir.path().join("in.txt");
    fs::write(&ascii, "1001 0111\n").unwrap();
    let binary = dir.path().join("in.bin");
    fs::write(&binary, [0x97u8]).unwrap();
    let via_bits = stdout(&["hash", "--prime", "1009", "--bits", "10010111"]);
    assert_eq!(
        stdout(&[
            "hash",
            "--prime",
            "1009",
            "--ascii",
            "--file",
            ascii.to_str().unwrap()
        ]),
        via_bits
    );
    assert_eq!(
        stdout(&[
            "hash",
            "--prime",
            "1009",
            "--file",
            binary.to_str().unwrap()
        ]),
        via_bits
    );
    fs::write(&ascii, "10x1").unwrap();
    assert_eq!(
        code(&[
            "hash",
            "--prime",
            "1009",
            "--ascii",
            "--file",
            ascii.to_str().unwrap()
        ]),
        2
    );
    assert_eq!(
        code(&[
            "hash",
            "--file",
            dir.path().join("missing").to_str().unwrap()
        ]),
        1
    );
}

#[test]
fn combine_digests() {
    let id = "0040000001"; // identity under p = 1009: entries 1, 0, 0, 1 in 10 bits
    assert_eq!(
        stdout(&["combine", "--prime", "1009", "0040200805", id]).trim(),
        "0040200805"
    );
    let u = stdout(&["hash", "--prime", "1009", "--bits", "1101"]);
    let v = stdout(&["hash", "--prime", "1009", "--bits", "011"]);
    let joined = stdout(&["hash", "--prime", "1009", "--bits", "1101000011"]);
    assert_eq!(
        stdout(&["combine", "--prime", "1009", u.trim(), v.trim()]),
        joined
    );
    assert_eq!(
        code(&["combine", "--prime", "1009", "0040200805", "00402008"]),
        2
    );
}

#[test]
fn girth_bounds() {
    assert_eq!(
        stdout(&["girth-bound", "--prime-bits", "256"]).trim(),
        "184"
    );
    assert_eq!(
        stdout(&["girth-bound", "--prime-bits", "512"]).trim(),
        "368"
    );
    assert_eq!(
        stdout(&["girth-bound", "--prime-bits", "256", "--rate", "1.93"]).trim(),
        "269"
    );
    assert_eq!(
        stdout(&["girth-bound", "--preset", "paper-512"]).trim(),
        "368"
    );
}

#[test]
fn freeness_report() {
    assert_eq!(
        stdout(&["freeness", "--max-len", "8"]).trim(),
        "free up to length 8 (9840 words)"
    );
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["hash", "--prime", "1000", "--bits", "1"]), 2);
    assert_eq!(code(&["hash", "--prime-bits", "64", "--bits", "1"]), 2);
    assert_eq!(
        code(&[
            "hash",
            "--preset",
            "paper-256",
            "--prime",
            "1009",
            "--bits",
            "1"
        ]),
        2
    );
    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(code(&["freeness", "--max-len", "30"]), 3);
    let budget = Command::new(env!("CARGO_BIN_EXE_cookiehash"))
        .args(["freeness", "--max-len", "4"])
        .env("COOKIEHASH_MAX_MULTIPLICATIONS", "10")
        .output()
        .unwrap();
    assert_eq!(budget.status.code(), Some(3));
    assert_eq!(
        code(&[
            "preimage",
            "--method",
            "backtrack",
            "--target-bits",
            "1001111000110101",
            "--budget",
            "3"
        ]),
        3
    );
    assert_eq!(
        code(&["preimage", "--method", "greedy", "--matrix", "2,1,1,1"]),
        1
    );
}

#[test]
fn generated_prime_is_reproducible() {
    let a = run(&[
        "hash",
        "--prime-bits",
        "64",
        "--generate",
        "--seed",
        "3",
        "--bits",
        "1",
    ]);
    let b = run(&[
        "hash",
        "--prime-bits",
        "64",
        "--generate",
        "--seed",
        "3",
        "--bits",
        "1",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
    assert!(String::from_utf8_lossy(&a.stderr).starts_with("prime: "));
}

#[test]
fn preimages() {
    assert_eq!(
        stdout(&[
            "preimage",
            "--method",
            "greedy",
            "--target-bits",
            "0110100111"
        ])
        .trim(),
        "ABBABAABBB"
    );
    let out = stdout(&[
        "preimage",
        "--method",
        "backtrack",
        "--target-bits",
        "10011110001",
    ]);
    assert_eq!(out.lines().next(), Some("10011110001"));
    assert!(out.lines().nth(1).unwrap().starts_with("found 11 bits"));
    assert_eq!(
        stdout(&[
            "preimage",
            "--method",
            "brute",
            "--prime",
            "1009",
            "--target-bits",
            "101",
            "--max-len",
            "8"
        ])
        .trim(),
        "101"
    );
}

#[test]
fn growth_output_is_deterministic() {
    let args = [
        "growth",
        "--mode",
        "random",
        "--lengths",
        "50,100",
        "--trials",
        "20",
        "--seed",
        "9",
        "--format",
        "csv",
    ];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    assert!(a.starts_with("length,trials,mean_log2_per_letter,fitted_base\n"));
    assert_eq!(a.lines().count(), 3);
    let exhaustive = stdout(&["growth", "--lengths", "2", "--format", "csv"]);
    assert!(exhaustive
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("2,1,2.321928"));
}

#[test]
fn export_and_randtest() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let common = [
        "--sequences",
        "3",
        "--sequence-bits",
        "5000",
        "--input-bits",
        "200",
        "--seed",
        "4",
    ];
    let mut args_a = vec!["nist-export", "--out", a.path().to_str().unwrap()];
    args_a.extend(common);
    let mut args_b = vec!["nist-export", "--out", b.path().to_str().unwrap()];
    args_b.extend(common);
    assert_eq!(stdout(&args_a).lines().count(), 3);
    stdout(&args_b);
    for i in 0..3 {
        let name = format!("data_{i}.txt");
        let x = fs::read(a.path().join(&name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(&name)).unwrap());
        assert_eq!(x.len(), 5120 + 1);
    }

    let f0 = a.path().join("data_0.txt");
    let csv = stdout(&[
        "randtest",
        "--format",
        "csv",
        "--files",
        f0.to_str().unwrap(),
    ]);
    assert_eq!(
        csv.lines().next(),
        Some("sequence,test,param,statistic,p_value,verdict")
    );
    assert_eq!(csv.lines().count(), 7);

    let mut generated = vec!["randtest", "--format", "csv"];
    generated.extend(common);
    let direct = stdout(&generated);
    let files: Vec<String> = (0..3)
        .map(|i| a.path().join(format!("data_{i}.txt")).display().to_string())
        .collect();
    let mut from_files = vec!["randtest", "--format", "csv", "--files"];
    from_files.extend(files.iter().map(String::as_str));
    assert_eq!(direct, stdout(&from_files));
}

#[test]
fn bench_reports_additions_per_bit() {
    let out = stdout(&["bench", "--input-bits", "10000"]);
    assert_eq!(
        out.lines().next(),
        Some("bits=10000 additions=39996 multiplications=0")
    );
    assert_eq!(out.lines().nth(1), Some("additions_per_bit=4.0000"));
}
