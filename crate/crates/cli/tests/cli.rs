//! The `qhat` binary: exit codes, formats and the disk cache.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qhat(args: &[&str], cache: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qhat"));
    c.args(args).env_remove("QHAT_CACHE_DIR");
    if let Some(dir) = cache {
        c.env("QHAT_CACHE_DIR", dir);
    }
    c.output().unwrap()
}

fn write_spec(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn strip(out: &[u8]) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_slice(out).unwrap();
    qhat_cli::report::strip_timings(&v)
}

#[test]
fn dims_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "a.spec", "datum preset A1\npi gens [2]\n");
    let out = qhat(&["dims", "--spec", &spec, "--format", "json"], None);
    assert_eq!(out.status.code(), Some(0));
    let v = strip(&out.stdout);
    assert_eq!(v["status"], "pass");
    let r = &v["records"][0];
    assert_eq!(r["pi"], "{(0),(2)}");
    assert_eq!(r["task"], "dims");
    assert_eq!(r["result"]["dimension"], 10);
    for key in ["datum", "pi", "task", "result", "witnesses"] {
        assert!(r.get(key).is_some(), "{key}");
    }

    let human = qhat(&["dims", "--spec", &spec], None);
    let text = String::from_utf8(human.stdout).unwrap();
    assert!(text.contains("[pass] dims A1 {(0),(2)}"), "{text}");
    assert!(text.contains("  dimension: 10\n"), "{text}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_spec(dir.path(), "empty.spec", "datum preset A1\n");
    let out = qhat(&["run", "--spec", &empty, "--format", "json"], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(strip(&out.stdout)["records"], serde_json::json!([]));

    let bad = write_spec(dir.path(), "bad.spec", "datum preset A2\npi gens [(-1,0)]\n");
    let out = qhat(&["dims", "--spec", &bad], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(":2:10:") && err.contains("not dominant"), "{err}");

    assert_eq!(qhat(&["dims"], None).status.code(), Some(2));
    assert_eq!(qhat(&["frobnicate", "--spec", &empty], None).status.code(), Some(2));
    let missing = dir.path().join("missing.spec");
    assert_eq!(qhat(&["dims", "--spec", missing.to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(qhat(&["specialize", "--spec", &empty], None).status.code(), Some(2));

    // Separation fails when the probe schedule is too short to see E^(2) 1_2.
    let short = write_spec(dir.path(), "short.spec", "datum preset A1\ntask probe window=2 height=4\n");
    let out = qhat(&["probe", "--spec", &short, "--format", "json"], None);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(strip(&out.stdout)["status"], "fail");
}

#[test]
fn cache_is_transparent_and_shared() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let a = write_spec(dir.path(), "a.spec", "datum preset A1\npi gens [2]\ntask verify\ntask dims\n");
    let b = write_spec(dir.path(), "b.spec", "# same algebra, other spelling\ndatum matrix [[2]]\npi gens [0,2]\ntask dims\n");
    let cold = qhat(&["run", "--spec", &a, "--format", "json"], Some(&cache));
    let warm = qhat(&["run", "--spec", &a, "--format", "json"], Some(&cache));
    assert_eq!(cold.status.code(), Some(0));
    assert_eq!(strip(&cold.stdout), strip(&warm.stdout));
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
    assert_eq!(qhat(&["run", "--spec", &b], Some(&cache)).status.code(), Some(0));
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);

    // A damaged entry is reported and rebuilt, with the same report.
    let entry = fs::read_dir(&cache).unwrap().next().unwrap().unwrap().path();
    let bytes = fs::read(&entry).unwrap();
    fs::write(&entry, &bytes[..bytes.len() / 2]).unwrap();
    let repaired = qhat(&["run", "--spec", &a, "--format", "json"], Some(&cache));
    assert_eq!(repaired.status.code(), Some(0));
    assert!(String::from_utf8(repaired.stderr).unwrap().contains("warning: ignoring cache entry"));
    assert_eq!(strip(&repaired.stdout), strip(&cold.stdout));
    assert_eq!(fs::read(&entry).unwrap(), bytes);

    let flag = dir.path().join("flag");
    let out = qhat(&["dims", "--spec", &a, "--cache-dir", flag.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_dir(&flag).unwrap().count(), 1);
}
