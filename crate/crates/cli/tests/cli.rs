use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn binpack(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binpack")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn gen_solve_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&binpack(d, &["gen", "--family", "three-partition", "--n", "30", "--seed", "1", "--out", "t.bpp"])), 0);
    let text = fs::read_to_string(d.join("t.bpp")).unwrap();
    let nums: Vec<u64> = text.split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert_eq!(nums[0], 30);
    assert!(nums[2..].iter().all(|&w| 4 * w > nums[1] && 2 * w < nums[1]));

    for algo in ["entropy", "lp-round", "kk", "ffd"] {
        let o = binpack(d, &["solve", "--algo", algo, "--in", "t.bpp", "--seed", "7", "--profile", "desk"]);
        assert_eq!(code(&o), 0, "{algo}: {}", String::from_utf8_lossy(&o.stderr));
        let packing = format!("t.{algo}.packing.json");
        let cert = format!("t.{algo}.cert.json");
        let o = binpack(d, &["verify", "--packing", &packing, "--in", "t.bpp", "--cert", &cert]);
        assert_eq!(code(&o), 0, "{algo}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn solve_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    binpack(d, &["gen", "--family", "uniform", "--n", "80", "--seed", "3", "--out", "u.bpp"]);
    let mut seen = Vec::new();
    for out in ["a", "b"] {
        let o = binpack(d, &["solve", "--in", "u.bpp", "--seed", "5", "--out-dir", out]);
        assert_eq!(code(&o), 0);
        let cert = fs::read(d.join(out).join("u.entropy.cert.json")).unwrap();
        let packing = fs::read(d.join(out).join("u.entropy.packing.json")).unwrap();
        seen.push((cert, packing));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn verify_rejects_tampered_packings() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("t.bpp"), "3\n10\n5\n5\n5\n").unwrap();
    let over = r#"[{"counts": {"0": 3}, "kind": "regular", "weight": ["1","1"]}]"#;
    fs::write(d.join("over.json"), over).unwrap();
    assert_eq!(code(&binpack(d, &["verify", "--packing", "over.json", "--in", "t.bpp"])), 3);
    let short = r#"[{"counts": {"0": 2}, "kind": "regular", "weight": ["1","1"]}]"#;
    fs::write(d.join("short.json"), short).unwrap();
    assert_eq!(code(&binpack(d, &["verify", "--packing", "short.json", "--in", "t.bpp"])), 3);
    fs::write(d.join("junk.json"), "not json").unwrap();
    assert_eq!(code(&binpack(d, &["verify", "--packing", "junk.json", "--in", "t.bpp"])), 2);
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&binpack(d, &["gen", "--family", "uniform", "--n", "0"])), 2);
    assert_eq!(code(&binpack(d, &["solve", "--in", "missing.bpp"])), 2);
    fs::write(d.join("bad.bpp"), "2\n10\n4\n").unwrap();
    assert_eq!(code(&binpack(d, &["solve", "--in", "bad.bpp"])), 2);
    assert_eq!(code(&binpack(d, &["bench", "--family", "nope", "--n", "8"])), 2);
}

#[test]
fn solver_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    binpack(d, &["gen", "--family", "uniform", "--n", "20", "--out", "u.bpp"]);
    assert_eq!(code(&binpack(d, &["solve", "--algo", "brute", "--in", "u.bpp"])), 4);
}

#[test]
fn bench_report_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["bench", "--algos", "ffd,kk,entropy", "--family", "uniform", "--n", "32,48", "--seeds", "2"];
    let a = binpack(d, &args);
    let b = Command::new(env!("CARGO_BIN_EXE_binpack")).current_dir(d).args(args).env("BINPACK_WORKERS", "1").output().unwrap();
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let csv = String::from_utf8(a.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("algo,n,seed,profile,cost,lp_value,ceil_lp,gap,stages,runtime_ms"));
    assert_eq!(lines.count(), 12);
}
