use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const SMALL: &str = r#"{"b":2,"s":4,"v":2,"n":6,"k":3,"m":6,"L":5,"f":2,"seed":3}"#;
const EXAMPLE: &str = r#"{"b":5,"s":32,"v":24,"n":100,"k":50,"m":100,"L":1,"f":1}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cbpir"));
    c.env_remove("CBPIR_ADDR");
    c
}

fn write_params(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_example_numbers() {
    let dir = TempDir::new().unwrap();
    let p = write_params(dir.path(), "p.json", EXAMPLE);
    let out = run(&["validate", "--params", path(&p)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("delta: 400\n"));
    assert!(text.contains("rate_asymptotic: 1/16 "));
    assert!(text.contains("weight_threshold: 93\n"));
    assert!(text.contains("m0_increment: 7\n"));
}

#[test]
fn invalid_params_exit_nonzero() {
    let dir = TempDir::new().unwrap();
    let cases = [
        // f = 2 over F_2
        r#"{"b":1,"s":4,"v":2,"n":6,"k":3,"m":6,"L":5,"f":2}"#,
        // v = s leaves no room for the noise subspace
        r#"{"b":2,"s":4,"v":4,"n":6,"k":3,"m":6,"L":5,"f":1}"#,
    ];
    for (i, body) in cases.iter().enumerate() {
        let p = write_params(dir.path(), &format!("bad{i}.json"), body);
        let out = run(&["validate", "--params", path(&p)]);
        assert_eq!(out.status.code(), Some(1), "case {i}");
    }
    let p = write_params(dir.path(), "typo.json", r#"{"b":2}"#);
    assert_eq!(run(&["validate", "--params", path(&p)]).status.code(), Some(2));
    assert_eq!(run(&["validate"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn gendb_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let p = write_params(dir.path(), "p.json", SMALL);
    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    let c = dir.path().join("c.bin");
    assert!(run(&["gendb", "--params", path(&p), "--out", path(&a)]).status.success());
    assert!(run(&["gendb", "--params", path(&p), "--out", path(&b)]).status.success());
    assert!(run(&["gendb", "--params", path(&p), "--seed", "8", "--out", path(&c)]).status.success());
    let a = std::fs::read(a).unwrap();
    assert_eq!(a, std::fs::read(b).unwrap());
    assert_ne!(a, std::fs::read(c).unwrap());
}

fn transcript(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("transcript.json")).unwrap()).unwrap()
}

#[test]
fn retrieve_in_process() {
    let dir = TempDir::new().unwrap();
    let p = write_params(dir.path(), "p.json", SMALL);
    let db = dir.path().join("db.bin");
    let out = dir.path().join("run");
    assert!(run(&["gendb", "--params", path(&p), "--out", path(&db)]).status.success());
    let r = run(&[
        "retrieve", "--params", path(&p), "--db", path(&db), "--indices", "1,4", "--out", path(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let t = transcript(&out);
    assert_eq!(t["verified"], true);
    assert_eq!(t["rate_match"], true);
    assert_eq!(t["queries"], 3);
    assert_eq!(t["measured_rate"], "5/246");
    assert!(out.join("file_1.bin").exists() && out.join("file_4.bin").exists());

    let wrong = run(&["retrieve", "--params", path(&p), "--db", path(&db), "--indices", "1"]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn retrieve_over_loopback() {
    let dir = TempDir::new().unwrap();
    let p = write_params(dir.path(), "p.json", SMALL);
    let db = dir.path().join("db.bin");
    assert!(run(&["gendb", "--params", path(&p), "--out", path(&db)]).status.success());
    let mut server = bin()
        .args(["serve", "--db", path(&db), "--endpoint", "127.0.0.1:0"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(server.stderr.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line.trim().strip_prefix("listening on ").unwrap().to_string();

    let runs: Vec<_> = ["remote_a", "remote_b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let r = run(&[
                "retrieve", "--params", path(&p), "--endpoint", &addr, "--db", path(&db),
                "--indices", "0,5", "--out", path(&out),
            ]);
            assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
            out
        })
        .collect();
    server.kill().unwrap();
    let _ = server.wait();

    let t = transcript(&runs[0]);
    assert_eq!(t["mode"], "remote");
    assert_eq!(t["verified"], true);
    for f in ["file_0.bin", "file_5.bin", "transcript.json"] {
        assert_eq!(
            std::fs::read(runs[0].join(f)).unwrap(),
            std::fs::read(runs[1].join(f)).unwrap()
        );
    }
}

#[test]
fn attack_original_writes_csv() {
    let dir = TempDir::new().unwrap();
    let p = write_params(dir.path(), "p.json", SMALL);
    let csv = dir.path().join("a.csv");
    let r = run(&["attack", "--params", path(&p), "--trials", "4", "--out", path(&csv)]);
    assert!(r.status.success());
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("record,trial,kind,subset,rank,inferred,success,ops\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("summary,")).count(), 4);
    assert!(String::from_utf8_lossy(&r.stderr).contains("success 4/4"));
}

#[test]
fn attack_respects_enumeration_cap() {
    let dir = TempDir::new().unwrap();
    let body = r#"{"b":2,"s":4,"v":2,"n":6,"k":3,"m":40,"L":1,"f":1}"#;
    let p = write_params(dir.path(), "p.json", body);
    let r = run(&[
        "attack", "--params", path(&p), "--scheme", "modified", "--weight", "20", "--trials", "1",
    ]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn tables_cover_both_database_sizes() {
    let dir = TempDir::new().unwrap();
    assert!(run(&["tables", "--out", path(dir.path())]).status.success());
    let rates = std::fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    assert_eq!(rates.lines().count(), 13);
    let fig = std::fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    assert_eq!(fig.lines().count(), 1 + 101 + 10_001);
    assert!(fig.contains("\n100,93,"));
    let green = fig.lines().filter(|l| l.ends_with(",green")).count();
    assert!(green > 0);
    let bounds = std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert_eq!(bounds.lines().count(), fig.lines().count());
}
