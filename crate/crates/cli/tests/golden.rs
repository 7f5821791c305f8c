//! Reports for the spec files in `tests/golden`, compared with the stored
//! `.json` documents (timings removed). `QHAT_BLESS=1` rewrites them.

use std::fs;
use std::path::Path;

use qhat_cli::report::strip_timings;
use qhat_cli::{parse_spec, run, Cache};

fn stripped(spec: &Path, cache: Option<Cache>) -> String {
    let text = fs::read_to_string(spec).unwrap();
    let job = parse_spec(&text).unwrap_or_else(|e| panic!("{}: {e}", spec.display()));
    let doc = strip_timings(&run(&job, cache).to_json());
    serde_json::to_string_pretty(&doc).unwrap() + "\n"
}

#[test]
fn golden_reports() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut specs: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "spec"))
        .collect();
    specs.sort();
    assert!(specs.len() >= 6, "golden suite has {} files", specs.len());
    let bless = std::env::var_os("QHAT_BLESS").is_some();
    let mut mismatched = Vec::new();
    for spec in &specs {
        let got = stripped(spec, None);
        let want_path = spec.with_extension("json");
        if bless {
            fs::write(&want_path, &got).unwrap();
            continue;
        }
        let want = fs::read_to_string(&want_path).unwrap_or_default();
        if got != want {
            mismatched.push(spec.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    assert!(mismatched.is_empty(), "reports differ from golden files: {mismatched:?}");
}

#[test]
fn cold_and_warm_cache_agree() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cache_dir = tempfile::tempdir().unwrap();
    for name in ["a1_verify.spec", "a2_dims.spec", "b2_maps.spec"] {
        let spec = dir.join(name);
        let plain = stripped(&spec, None);
        let cold = stripped(&spec, Some(Cache::new(cache_dir.path())));
        let warm = stripped(&spec, Some(Cache::new(cache_dir.path())));
        assert_eq!(plain, cold, "{name}");
        assert_eq!(cold, warm, "{name}");
    }
    assert!(fs::read_dir(cache_dir.path()).unwrap().count() > 0);
}
