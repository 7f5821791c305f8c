//! Acceptance suite: one pass/fail line per criterion.
//!
//! Run with `cargo test -p qhat-cli --test acceptance`.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use qhat_core::intspec::{lattice_basis, specialization_commutes, SpecializedSchur, SpecializedTower};
use qhat_core::linalg::Echelon;
use qhat_core::qarith::{qint, Field, FunctionField, RatFunc, RingPoint};
use qhat_core::rootdata::{RootDatum, SaturatedSet, Weight};
use qhat_core::schur::{truncation_map, verify_chain_laws, verify_truncation, SchurElement, SchurTower};
use qhat_core::ulimit::{
    check_prop_kh, check_u_relations, check_uhat_relations, probe_schedule, separation_family, separation_probe, weight_window,
};
use qhat_core::weylmod::{freudenthal_oracle, weyl_dim_oracle, weyl_module, Sign};

/// Wall-clock budget for the dimension identities.
const DIMENSION_BUDGET: Duration = Duration::from_secs(60);
/// Height bound for the presentation, module-oracle and limit corpora.
const CORPUS_HEIGHT: i64 = 6;
/// A1×A1 sets of every shape are taken up to this height; beyond it only
/// principal sets, up to `CORPUS_HEIGHT`.
const A1XA1_FULL_HEIGHT: i64 = 4;
/// A1×A1 limit suites: every set up to this height, principal sets up to the next bound.
const A1XA1_LIMIT_FULL: i64 = 3;
const A1XA1_LIMIT_PRINCIPAL: i64 = 4;
const CHAINS_PER_PRESET: usize = 5;
/// Composable basis pairs checked per truncation map.
const MAX_PAIRS: usize = 400;
const SEPARATION_WINDOW: i64 = 4;
const SEPARATION_POWER: usize = 2;
const LATTICE_HEIGHT: i64 = 4;
const GOLDEN_MIN: usize = 6;

const FF: FunctionField = FunctionField;
const PRESENTATION_PRESETS: [&str; 4] = ["A1", "A1xA1", "A2", "B2"];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn preset(name: &str) -> RootDatum {
    RootDatum::preset(name).unwrap()
}

fn sat(d: &RootDatum, gens: &[&[i64]]) -> SaturatedSet {
    d.saturate(&gens.iter().map(|g| Weight(g.to_vec())).collect::<Vec<_>>()).unwrap()
}

/// The five worked dimension cases: preset, generators, expected value.
fn dimension_cases() -> Vec<(&'static str, Vec<&'static [i64]>, usize)> {
    vec![
        ("A1", vec![&[0], &[2]], 10),
        ("A1", vec![&[1]], 4),
        ("A1", vec![&[0], &[1], &[2]], 14),
        ("A2", vec![&[1, 0]], 9),
        ("A2", vec![&[0, 0], &[1, 1]], 65),
    ]
}

fn c1_dimensions() -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    for (p, gens, want) in dimension_cases() {
        let d = preset(p);
        let pi = sat(&d, &gens);
        let got = SchurTower::new(d.clone()).algebra_uncached(&pi).unwrap().realized_dimension();
        let oracle: u64 = pi.elements().iter().map(|l| weyl_dim_oracle(&d, l).pow(2)).sum();
        if got != want || oracle != want as u64 {
            bad.push(format!("{p} {pi}: closure {got}, Weyl {oracle}, expected {want}"));
        }
    }
    let el = t.elapsed();
    if el > DIMENSION_BUDGET {
        bad.push(format!("took {el:?}"));
    }
    outcome(bad.is_empty(), format!("5 cases, span closure = Σ Weyl² exactly, {:.2}s {}", el.as_secs_f64(), bad.join("; ")))
}

fn presentation_corpus(d: &RootDatum) -> Vec<SaturatedSet> {
    let mut sets = if d.name() == "A1xA1" {
        d.saturated_sets_up_to(A1XA1_FULL_HEIGHT).unwrap()
    } else {
        d.saturated_sets_up_to(CORPUS_HEIGHT).unwrap()
    };
    for p in probe_schedule(d, CORPUS_HEIGHT).unwrap() {
        if !sets.contains(&p) {
            sets.push(p);
        }
    }
    sets
}

fn limit_corpus(d: &RootDatum) -> Vec<SaturatedSet> {
    if d.name() != "A1xA1" {
        return d.saturated_sets_up_to(CORPUS_HEIGHT).unwrap();
    }
    let mut sets = d.saturated_sets_up_to(A1XA1_LIMIT_FULL).unwrap();
    for p in probe_schedule(d, A1XA1_LIMIT_PRINCIPAL).unwrap() {
        if !sets.contains(&p) {
            sets.push(p);
        }
    }
    sets
}

fn c2_presentation() -> Outcome {
    let mut counts = Vec::new();
    let mut bad = Vec::new();
    for p in PRESENTATION_PRESETS {
        let d = preset(p);
        let tower = SchurTower::new(d.clone());
        let sets = presentation_corpus(&d);
        for pi in &sets {
            let s = tower.algebra_uncached(pi).unwrap();
            let rep = s.verify_presentation();
            if !rep.passed() {
                bad.push(format!("{p} {pi}: {}", rep.failures().join(", ")));
            }
        }
        counts.push(format!("{p} {}", sets.len()));
    }
    outcome(
        bad.is_empty(),
        format!(
            "defining relations incl. Serre on {} sets (A1xA1: all of height ≤ {A1XA1_FULL_HEIGHT}, principal ≤ {CORPUS_HEIGHT}) {}",
            counts.join(", "),
            bad.join("; ")
        ),
    )
}

fn c3_modules() -> Outcome {
    let mut n = 0;
    let mut bad = Vec::new();
    for p in RootDatum::preset_names() {
        let d = preset(p);
        for l in d.dominant_weights_up_to(CORPUS_HEIGHT).unwrap() {
            let m = weyl_module(&d, &l).unwrap();
            n += 1;
            let mut mult = std::collections::BTreeMap::new();
            for w in m.basis_weights() {
                *mult.entry(w).or_insert(0u64) += 1;
            }
            if m.dim() as u64 != weyl_dim_oracle(&d, &l) || mult != freudenthal_oracle(&d, &l) {
                bad.push(format!("{p} {l}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("{n} modules of height ≤ {CORPUS_HEIGHT} on all presets match Weyl and Freudenthal {}", bad.join(", ")))
}

/// Strict chains `a ⊊ b ⊊ c`, smallest sets first.
fn three_chains(d: &RootDatum, want: usize) -> Vec<[SaturatedSet; 3]> {
    for h in 4..=12 {
        let mut sets = d.saturated_sets_up_to(h).unwrap();
        sets.sort_by_key(|s| s.len());
        let mut out = Vec::new();
        for c in &sets {
            for b in sets.iter().filter(|b| b.len() < c.len() && b.is_subset(c)) {
                for a in sets.iter().filter(|a| a.len() < b.len() && a.is_subset(b)) {
                    out.push([a.clone(), b.clone(), c.clone()]);
                    if out.len() == want {
                        return out;
                    }
                }
            }
        }
    }
    panic!("{} has fewer than {want} chains", d.name());
}

fn c4_inverse_system() -> Outcome {
    let mut bad = Vec::new();
    let mut total = 0;
    for p in RootDatum::preset_names() {
        let d = preset(p);
        let tower = SchurTower::new(d.clone());
        for chain in three_chains(&d, CHAINS_PER_PRESET) {
            total += 1;
            let algs: Vec<_> = chain.iter().map(|pi| tower.algebra(pi).unwrap()).collect();
            let mut rep = verify_chain_laws(&[&algs[0], &algs[1], &algs[2]]);
            for (x, y) in [(0, 1), (1, 2), (0, 2)] {
                let f = truncation_map(algs[x].pi(), algs[y].pi()).unwrap();
                rep.extend(verify_truncation(&f, &algs[y], &algs[x], MAX_PAIRS));
            }
            if !rep.passed() {
                bad.push(format!("{p} {} ⊂ {} ⊂ {}: {}", chain[0], chain[1], chain[2], rep.failures().join(", ")));
            }
        }
    }
    outcome(bad.is_empty(), format!("{total} chains ({CHAINS_PER_PRESET} per preset): f_ππ = id, f∘f = f, homomorphism, surjective {}", bad.join("; ")))
}

fn c5_limits() -> Outcome {
    let mut counts = Vec::new();
    let mut bad = Vec::new();
    for p in PRESENTATION_PRESETS {
        let d = preset(p);
        let tower = SchurTower::new(d.clone());
        let sets = limit_corpus(&d);
        for pi in &sets {
            let mut rep = check_prop_kh(&tower, pi).unwrap();
            rep.extend(check_uhat_relations(&tower, pi).unwrap());
            rep.extend(check_u_relations(&tower, pi).unwrap());
            if !rep.passed() {
                bad.push(format!("{p} {pi}: {}", rep.failures().join(", ")));
            }
            tower.forget(pi);
        }
        counts.push(format!("{p} {}", sets.len()));
    }
    outcome(
        bad.is_empty(),
        format!(
            "K̂_h expansion, Û relations, K̂ identities, U relations on {} sets (A1xA1: all ≤ {A1XA1_LIMIT_FULL}, principal ≤ {A1XA1_LIMIT_PRINCIPAL}) {}",
            counts.join(", "),
            bad.join("; ")
        ),
    )
}

fn c6_separation() -> Outcome {
    let mut bad = Vec::new();
    let mut n = 0;
    for p in RootDatum::preset_names() {
        let d = preset(p);
        let tower = SchurTower::new(d.clone());
        let reach = (0..d.rank()).map(|i| d.height(d.simple_root(i))).max().unwrap_or(0);
        let bound = SEPARATION_WINDOW + SEPARATION_POWER as i64 * reach;
        let window = weight_window(&d, SEPARATION_WINDOW).unwrap();
        for u in separation_family(&d, &window, SEPARATION_POWER) {
            n += 1;
            if separation_probe(&tower, &u, bound).unwrap().is_none() {
                bad.push(format!("{p} {u}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("{n} elements 1_λ, E^(a)1_λ, F^(b)1_λ (a, b ≤ 2, λ in height-4 windows) all separated {}", bad.join(", ")))
}

/// `F_{i₁}^{(k₁)} ⋯ F_{iₙ}^{(kₙ)} m` in the word basis of the module.
fn monomial_vector(m: &qhat_core::weylmod::WeylModule, word: &[(usize, usize)]) -> Vec<RatFunc> {
    let mut v = vec![RatFunc::zero(); m.dim()];
    v[0] = RatFunc::one();
    for &(i, k) in word.iter().rev() {
        v = m.divided_power(Sign::Minus, i, k).mul_vec(&FF, &v);
    }
    v
}

fn c7_integrality() -> Outcome {
    let mut n = 0;
    let mut bad = Vec::new();
    for p in RootDatum::preset_names() {
        let d = preset(p);
        for l in d.dominant_weights_up_to(LATTICE_HEIGHT).unwrap() {
            n += 1;
            let m = weyl_module(&d, &l).unwrap();
            let lat = match lattice_basis(&d, &m) {
                Ok(x) => x,
                Err(e) => {
                    bad.push(format!("{p} {l}: {e}"));
                    continue;
                }
            };
            // Lattice vectors are the labelled monomials applied to m.
            let t = lat.transition();
            for (c, label) in lat.labels().iter().enumerate() {
                let v = monomial_vector(&m, &label.0);
                if (0..m.dim()).any(|r| t.get(r, c) != &v[r]) {
                    bad.push(format!("{p} {l}: column {c} is not {label}"));
                }
            }
            // T · A = M · T for every divided power, with A over ℤ[v, v⁻¹].
            for i in 0..d.rank() {
                for s in Sign::both() {
                    for k in 1..=m.max_power(s, i) {
                        let a = lat.divided_power(s, i, k).map(|x| RatFunc::from(x.clone()));
                        if t.mul(&FF, &a) != m.divided_power(s, i, k).mul(&FF, t) {
                            bad.push(format!("{p} {l}: E^({k}) i={i} {s}"));
                        }
                    }
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{n} lattices of height ≤ {LATTICE_HEIGHT}: all E_(±i)^(k) in ℤ[v,v⁻¹], T·A = M·T {}", bad.join("; ")))
}

fn flatten<E: Clone>(x: &SchurElement<E>) -> Vec<E> {
    x.blocks.iter().flat_map(|m| m.entries().iter().cloned()).collect()
}

/// Rank of the algebra generated by all divided powers and idempotents,
/// grown from the identity by left multiplication until stable.
fn brute_force_rank(s: &SpecializedSchur) -> usize {
    let f = s.field();
    let mut gens = Vec::new();
    for i in 0..s.datum().rank() {
        for sign in Sign::both() {
            for k in 1..=s.max_power(sign, i) {
                gens.push(s.divided_power(sign, i, k));
            }
        }
    }
    gens.extend(s.orbit().iter().map(|l| s.idempotent(l)));
    let mut ech = Echelon::new(f.clone(), s.full_dimension());
    let id = s.identity();
    ech.insert(flatten(&id));
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in &gens {
                let y = g.mul(f, x);
                if ech.insert(flatten(&y)) {
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    ech.rank()
}

fn c8_specialization() -> Outcome {
    let mut bad = Vec::new();
    let one = RingPoint::rational(1, 1).unwrap();
    let i4 = RingPoint::cyclotomic(4).unwrap();
    let two = RingPoint::rational(2, 1).unwrap();

    for (p, gens, want) in dimension_cases() {
        let d = preset(p);
        let t = SpecializedTower::new(Arc::new(SchurTower::new(d.clone())), one.clone());
        let got = t.algebra(&sat(&d, &gens)).unwrap().realized_dimension();
        if got != want {
            bad.push(format!("ξ=1 {p}: {got} ≠ {want}"));
        }
    }

    let mut links = 0;
    for point in [&one, &i4, &two] {
        for p in PRESENTATION_PRESETS {
            let d = preset(p);
            let t = SpecializedTower::new(Arc::new(SchurTower::new(d.clone())), point.clone());
            for chain in three_chains(&d, 2) {
                for (x, y) in [(0, 1), (1, 2)] {
                    links += 1;
                    let rep = specialization_commutes(&t, &chain[x], &chain[y]).unwrap();
                    if !rep.passed() {
                        bad.push(format!("{point} {p} {} ⊂ {}: {}", chain[x], chain[y], rep.failures().join(", ")));
                    }
                }
            }
        }
    }

    let two_at_i = i4.eval_laurent(&qint(2, 1));
    if !i4.is_zero(&two_at_i) {
        bad.push("[2] ≠ 0 at a primitive 4th root of unity".into());
    }
    let d = preset("A1");
    let t = SpecializedTower::new(Arc::new(SchurTower::new(d.clone())), i4.clone());
    let s = t.algebra(&sat(&d, &[&[0], &[1], &[2]])).unwrap();
    let (realized, oracle) = (s.realized_dimension(), brute_force_rank(&s));
    if realized != oracle || realized > 14 {
        bad.push(format!("A1 {{0,1,2}} at ξ=i: closure {realized}, brute force {oracle}"));
    }
    outcome(
        bad.is_empty(),
        format!(
            "ξ=1 dims equal generic; {links} chain links commute at ξ=1, i, 2; [2](i) = 0; A1 {{0,1,2}} at ξ=i has dim {realized} = oracle {oracle} ≤ 14 {}",
            bad.join("; ")
        ),
    )
}

fn qhat_json(spec: &Path, cache: Option<&Path>) -> Result<serde_json::Value, String> {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qhat"));
    c.args(["run", "--spec"]).arg(spec).args(["--format", "json"]).env_remove("QHAT_CACHE_DIR");
    if let Some(dir) = cache {
        c.arg("--cache-dir").arg(dir);
    }
    let out = c.output().map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| format!("{}: {e}", spec.display()))?;
    Ok(qhat_cli::report::strip_timings(&v))
}

fn c9_determinism() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut specs: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "spec"))
        .collect();
    specs.sort();
    let cache = tempfile::tempdir().unwrap();
    let mut bad = Vec::new();
    for spec in &specs {
        let name = spec.file_name().unwrap().to_string_lossy().into_owned();
        let runs = [qhat_json(spec, None), qhat_json(spec, Some(cache.path())), qhat_json(spec, Some(cache.path()))];
        let texts: Vec<String> = match runs.into_iter().collect::<Result<Vec<_>, _>>() {
            Ok(vs) => vs.iter().map(|v| serde_json::to_string_pretty(v).unwrap() + "\n").collect(),
            Err(e) => {
                bad.push(e);
                continue;
            }
        };
        if texts[0] != texts[1] || texts[1] != texts[2] {
            bad.push(format!("{name}: uncached, cold and warm reports differ"));
        }
        let golden = fs::read_to_string(spec.with_extension("json")).unwrap_or_default();
        if texts[2] != golden {
            bad.push(format!("{name}: differs from golden file"));
        }
    }
    if specs.len() < GOLDEN_MIN {
        bad.push(format!("only {} golden specs", specs.len()));
    }
    outcome(bad.is_empty(), format!("{} golden specs byte-identical across no/cold/warm cache {}", specs.len(), bad.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("dimension identities", c1_dimensions),
        ("presentation suite", c2_presentation),
        ("module oracles", c3_modules),
        ("inverse-system laws", c4_inverse_system),
        ("limit identities", c5_limits),
        ("separation probes", c6_separation),
        ("integrality", c7_integrality),
        ("specialization", c8_specialization),
        ("CLI determinism", c9_determinism),
    ];
    let only: Option<usize> = std::env::var("QHAT_CRITERION").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != k + 1) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {} {verdict} {name}: {} [{:.1}s]", k + 1, o.detail.trim_end(), t.elapsed().as_secs_f64());
        if !o.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
