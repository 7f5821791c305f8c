//! Runs the checked-in fuzz corpus through the same entry points as the fuzz
//! targets, so the seeds stay valid on a stable toolchain.

use std::fs;
use std::path::PathBuf;

use qhat_cli::cache::{decode, unframe};
use qhat_cli::parse_spec;
use qhat_core::qarith::{parse_laurent, parse_ratfunc};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn spec_seeds_round_trip() {
    for (p, bytes) in seeds("parse_spec") {
        let text = String::from_utf8(bytes).unwrap();
        let spec = parse_spec(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(parse_spec(&spec.to_string()).unwrap(), spec, "{}", p.display());
    }
}

#[test]
fn cache_seeds_decode() {
    for (p, bytes) in seeds("decode_cache") {
        unframe(&bytes).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        decode(&bytes).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn polynomial_seeds_round_trip() {
    for (p, bytes) in seeds("parse_laurent") {
        let text = String::from_utf8(bytes).unwrap();
        let x = parse_laurent(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(parse_laurent(&x.to_string()).unwrap(), x);
    }
    for (p, bytes) in seeds("parse_ratfunc") {
        let text = String::from_utf8(bytes).unwrap();
        let x = parse_ratfunc(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(parse_ratfunc(&x.to_string()).unwrap(), x);
    }
}
