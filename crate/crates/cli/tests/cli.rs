use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use psll::fixtures;
use psll::gen::{generate, GenSpec};
use psll::netlist::emit_bench;

fn psll(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psll")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_fixture(dir: &Path) -> (String, String) {
    let f = fixtures::kg();
    let locked = dir.join("kg.bench");
    let orig = dir.join("orig.bench");
    fs::write(&locked, emit_bench(&f.locked)).unwrap();
    fs::write(&orig, emit_bench(&f.original())).unwrap();
    (locked.display().to_string(), orig.display().to_string())
}

#[test]
fn verify_reports_equivalence() {
    let d = tempfile::tempdir().unwrap();
    let (locked, orig) = write_fixture(d.path());
    let ok = psll(&["verify", &locked, &orig, "--key", "01101011"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok).trim(), "equivalent");
    let bad = psll(&["verify", &locked, &orig, "--key", "11111111"]);
    assert_eq!(bad.status.code(), Some(4));
    assert_eq!(stdout(&bad).trim(), "not equivalent");
}

#[test]
fn attack_recovers_fixture_key_without_oracle() {
    let d = tempfile::tempdir().unwrap();
    let (locked, _) = write_fixture(d.path());
    let report = d.path().join("r.json");
    let o = psll(&["attack", &locked, "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("key 01101011"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["recovered_key"], "01101011");
    assert_eq!(v["oracle_less"], true);
}

#[test]
fn misrouted_family_suggests_the_other() {
    let d = tempfile::tempdir().unwrap();
    let (locked, _) = write_fixture(d.path());
    let o = psll(&["attack", &locked, "--family", "hc"]);
    assert_eq!(o.status.code(), Some(3));
    let e = stderr(&o);
    assert!(e.contains("--family nhc"), "{e}");
    assert_eq!(e.trim().lines().count(), 1);
}

#[test]
fn lock_then_attack_with_oracle() {
    let d = tempfile::tempdir().unwrap();
    let host = d.path().join("host.bench");
    fs::write(&host, emit_bench(&generate(&GenSpec::new("host", 120, 20, 6, 3)))).unwrap();
    let out = d.path().join("trial");
    fs::create_dir(&out).unwrap();
    let l = psll(&[
        "lock",
        host.to_str().unwrap(),
        "--technique",
        "sfll-hd0",
        "--key-size",
        "16",
        "--seed",
        "5",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(l.status.code(), Some(0), "{}", stderr(&l));
    let locked = out.join("locked.bench");
    let secret = out.join("secret.key");
    assert!(locked.exists() && secret.exists() && out.join("manifest.json").exists());
    let oracle = format!("{}+{}", locked.display(), secret.display());
    let a = psll(&["attack", locked.to_str().unwrap(), "--oracle", &oracle]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let key = stdout(&a).lines().next().unwrap().trim_start_matches("key ").to_string();
    let v = psll(&["verify", locked.to_str().unwrap(), host.to_str().unwrap(), "--key", &key]);
    assert_eq!(v.status.code(), Some(0), "{}", stderr(&v));
}

#[test]
fn sim_and_atpg_print_patterns() {
    let d = tempfile::tempdir().unwrap();
    let (_, orig) = write_fixture(d.path());
    let s = psll(&["sim", &orig, "--pattern", "10101"]);
    assert_eq!(s.status.code(), Some(0), "{}", stderr(&s));
    assert_eq!(stdout(&s).trim().len(), 1);
    let a = psll(&["atpg", &orig, "--net", "O", "--fault", "0"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert!(!stdout(&a).trim().is_empty());
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(psll(&["--help"]).status.code(), Some(0));
    assert_eq!(psll(&["frobnicate"]).status.code(), Some(1));
    let junk = d.path().join("junk.bench");
    fs::write(&junk, "OUTPUT(y)\ny = FROB(a)\n").unwrap();
    assert_eq!(psll(&["sim", junk.to_str().unwrap(), "--pattern", "0"]).status.code(), Some(2));
    let (locked, _) = write_fixture(d.path());
    let out = d.path().join("o.bench");
    let r = psll(&["resynth", &locked, "--external", "false", "-o", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(5), "{}", stderr(&r));
}
