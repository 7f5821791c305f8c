//! Task execution.

use std::sync::Arc;
use std::time::Instant;

use qhat_core::intspec::{
    kernel_probe_ru, specialization_commutes, IntSpecError, SpecializedTower,
};
use qhat_core::qarith::{FunctionField, RingPoint};
use qhat_core::rootdata::{RootDatum, SaturatedSet};
use qhat_core::schur::{
    truncation_map, verify_chain_laws, verify_truncation, RelationReport, SchurAlgebra, SchurError,
    SchurTower,
};
use qhat_core::ulimit::{
    check_prop_kh, check_u_relations, check_uhat_relations, separation_family, separation_probe,
    theta, verify_coherence, weight_window, LimitError, UExpr,
};
use qhat_core::weylmod::{weyl_dim_oracle, Sign};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::cache::Cache;
use crate::report::{Record, Report, Status};
use crate::spec::{DatumSpec, JobSpec, TaskKind, TaskSpec};

/// At most this many witnesses are kept per record.
pub const MAX_WITNESSES: usize = 50;

#[derive(Debug, Error)]
enum TaskError {
    #[error(transparent)]
    Schur(#[from] SchurError),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    IntSpec(#[from] IntSpecError),
    #[error(transparent)]
    RootData(#[from] qhat_core::rootdata::RootDataError),
    #[error("{0}")]
    Other(String),
}

struct Outcome {
    result: Map<String, Value>,
    witnesses: Vec<String>,
    status: Status,
}

impl Outcome {
    fn new(status: Status) -> Self {
        Outcome {
            result: Map::new(),
            witnesses: Vec::new(),
            status,
        }
    }

    fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.result.insert(key.to_string(), v.into());
    }

    /// Folds a relation report in as a table, failing on any failure.
    fn relations(&mut self, key: &str, rep: &RelationReport) {
        let rows: Vec<Value> = rep
            .rows
            .iter()
            .map(|r| json!({"name": r.name, "checked": r.checked, "failures": r.failures.len()}))
            .collect();
        self.result.insert(key.to_string(), Value::Array(rows));
        if !rep.passed() {
            self.status = Status::Fail;
            self.witnesses.extend(rep.failures());
        }
    }

    fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        if !ok {
            self.status = Status::Fail;
            self.witnesses.push(witness());
        }
    }
}

/// Runs tasks against one datum, reusing algebras from memory and disk.
pub struct Runner {
    datum: RootDatum,
    label: String,
    tower: Arc<SchurTower>,
    cache: Option<Cache>,
}

impl Runner {
    pub fn new(spec: &JobSpec, cache: Option<Cache>) -> Option<Self> {
        let datum = spec.root_datum()?;
        let label = match spec.datum.as_ref()? {
            DatumSpec::Preset(n) => n.clone(),
            DatumSpec::Matrix { .. } => datum.canonical_string(),
        };
        Some(Runner {
            tower: Arc::new(SchurTower::new(datum.clone())),
            datum,
            label,
            cache,
        })
    }

    pub fn tower(&self) -> &Arc<SchurTower> {
        &self.tower
    }

    /// `S(π)` from the in-memory tower, else the disk cache, else built and
    /// stored. A damaged cache entry is reported on stderr and rebuilt.
    pub fn algebra(
        &self,
        pi: &SaturatedSet,
    ) -> Result<Arc<SchurAlgebra<FunctionField>>, SchurError> {
        let Some(cache) = &self.cache else {
            return self.tower.algebra(pi);
        };
        if self.tower.has_algebra(pi) {
            return self.tower.algebra(pi);
        }
        match cache.load(&self.datum, pi) {
            Ok(Some(s)) => return Ok(self.tower.insert_algebra(s)),
            Ok(None) => {}
            Err(e) => eprintln!(
                "warning: ignoring cache entry {}: {e}",
                cache.path(&self.datum, pi).display()
            ),
        }
        let s = self.tower.algebra(pi)?;
        if let Err(e) = cache.store(&s) {
            eprintln!("warning: could not write cache entry for {pi}: {e}");
        }
        Ok(s)
    }

    fn record(
        &self,
        pi: Option<&SaturatedSet>,
        task: TaskKind,
        started: Instant,
        r: Result<Outcome, TaskError>,
    ) -> Record {
        let (result, mut witnesses, status) = match r {
            Ok(o) => (o.result, o.witnesses, o.status),
            Err(e) => (Map::new(), vec![e.to_string()], Status::Error),
        };
        let total = witnesses.len();
        witnesses.truncate(MAX_WITNESSES);
        if total > MAX_WITNESSES {
            witnesses.push(format!("… {} more", total - MAX_WITNESSES));
        }
        Record {
            datum: self.label.clone(),
            pi: pi.map(|p| p.key()),
            task: task.name().to_string(),
            status,
            result,
            witnesses,
            elapsed: started.elapsed().as_secs_f64(),
        }
    }

    /// Runs one task; per-π tasks give one record per `π`.
    pub fn run_task(
        &self,
        task: &TaskSpec,
        pis: &[SaturatedSet],
        ring: Option<RingPoint>,
    ) -> Vec<Record> {
        match task.kind {
            TaskKind::Probe => {
                let t = Instant::now();
                let r = self.probe(task, ring.as_ref());
                vec![self.record(None, task.kind, t, r)]
            }
            _ => pis
                .iter()
                .map(|pi| {
                    let t = Instant::now();
                    let r = match task.kind {
                        TaskKind::Build => self.build(pi),
                        TaskKind::Dims => self.dims(pi),
                        TaskKind::Verify => self.verify(pi),
                        TaskKind::Maps => self.maps(pi, task.param_u64("pairs", 200) as usize),
                        TaskKind::Limit => self.limit(pi),
                        TaskKind::Specialize => match &ring {
                            Some(p) => self.specialize(pi, p),
                            None => Err(TaskError::Other("specialize needs a ring".into())),
                        },
                        TaskKind::Probe => unreachable!(),
                    };
                    self.record(Some(pi), task.kind, t, r)
                })
                .collect(),
        }
    }

    fn build(&self, pi: &SaturatedSet) -> Result<Outcome, TaskError> {
        let s = self.algebra(pi)?;
        let mut o = Outcome::new(Status::Pass);
        let blocks: Vec<Value> = s
            .blocks()
            .iter()
            .map(|b| json!({"lambda": b.lambda().to_string(), "dim": b.dim()}))
            .collect();
        o.set("blocks", blocks);
        o.set("orbit", s.orbit().len());
        o.set("dimension", s.realized_dimension());
        o.set("full_dimension", s.full_dimension());
        o.check(s.realized_dimension() == s.full_dimension(), || {
            format!(
                "span closure gives {}, blocks give {}",
                s.realized_dimension(),
                s.full_dimension()
            )
        });
        Ok(o)
    }

    fn dims(&self, pi: &SaturatedSet) -> Result<Outcome, TaskError> {
        let s = self.algebra(pi)?;
        let mut o = Outcome::new(Status::Pass);
        let mut oracle = 0u64;
        let mut blocks = Vec::new();
        for b in s.blocks() {
            let w = weyl_dim_oracle(&self.datum, b.lambda());
            oracle += w * w;
            blocks.push(json!({"lambda": b.lambda().to_string(), "dim": b.dim(), "weyl": w}));
            o.check(b.dim() as u64 == w, || {
                format!("Δ{}: dim {} but Weyl formula {w}", b.lambda(), b.dim())
            });
        }
        o.set("blocks", blocks);
        o.set("dimension", s.realized_dimension());
        o.set("oracle", oracle);
        o.check(s.realized_dimension() as u64 == oracle, || {
            format!(
                "dim S(π) = {} but Σ dim² = {oracle}",
                s.realized_dimension()
            )
        });
        Ok(o)
    }

    fn verify(&self, pi: &SaturatedSet) -> Result<Outcome, TaskError> {
        let s = self.algebra(pi)?;
        let mut o = Outcome::new(Status::Pass);
        o.relations("relations", &s.verify_presentation());
        Ok(o)
    }

    /// `saturate` of the prefixes of `π`, without repeats: a chain ending at `π`.
    fn prefix_chain(&self, pi: &SaturatedSet) -> Result<Vec<SaturatedSet>, TaskError> {
        let mut chain: Vec<SaturatedSet> = Vec::new();
        let els = pi.elements();
        for k in 1..=els.len() {
            let p = self.datum.saturate(&els[..k])?;
            if chain.last() != Some(&p) {
                chain.push(p);
            }
        }
        Ok(chain)
    }

    fn maps(&self, pi: &SaturatedSet, pairs: usize) -> Result<Outcome, TaskError> {
        let chain = self.prefix_chain(pi)?;
        let algebras = chain
            .iter()
            .map(|p| self.algebra(p))
            .collect::<Result<Vec<_>, _>>()?;
        let mut o = Outcome::new(Status::Pass);
        o.set("chain", chain.iter().map(|p| p.key()).collect::<Vec<_>>());
        let mut links = Vec::new();
        for w in algebras.windows(2) {
            let map = truncation_map(w[0].pi(), w[1].pi())?;
            let rep = verify_truncation(&map, &w[1], &w[0], pairs);
            links.push(
                json!({"from": w[1].pi().key(), "to": w[0].pi().key(), "passed": rep.passed()}),
            );
            if !rep.passed() {
                o.status = Status::Fail;
                o.witnesses.extend(
                    rep.failures()
                        .into_iter()
                        .map(|f| format!("{} → {}: {f}", w[1].pi(), w[0].pi())),
                );
            }
        }
        o.set("links", links);
        let refs: Vec<&SchurAlgebra<FunctionField>> = algebras.iter().map(|a| a.as_ref()).collect();
        o.relations("laws", &verify_chain_laws(&refs));
        Ok(o)
    }

    fn limit(&self, pi: &SaturatedSet) -> Result<Outcome, TaskError> {
        let chain = self.prefix_chain(pi)?;
        for p in &chain {
            self.algebra(p)?;
        }
        let mut o = Outcome::new(Status::Pass);
        o.relations("prop_kh", &check_prop_kh(&self.tower, pi)?);
        o.relations("uhat_relations", &check_uhat_relations(&self.tower, pi)?);
        o.relations("u_relations", &check_u_relations(&self.tower, pi)?);
        let mut gens = Vec::new();
        for i in 0..self.datum.rank() {
            for s in Sign::both() {
                gens.push(UExpr::e(s, i));
            }
            gens.push(UExpr::k(self.datum.simple_coroot(i).clone()));
        }
        let mut links = 0;
        for u in &gens {
            let rep = verify_coherence(&theta(&self.datum, u), &self.tower, &chain)?;
            links += rep.links.len();
            for l in rep.links.iter().filter(|l| !l.passed) {
                o.check(false, || {
                    format!(
                        "θ({u}) {} → {}: {}",
                        l.from,
                        l.to,
                        l.witness.clone().unwrap_or_default()
                    )
                });
            }
        }
        o.set("coherence_links", links);
        Ok(o)
    }

    fn specialize(&self, pi: &SaturatedSet, p: &RingPoint) -> Result<Outcome, TaskError> {
        let generic = self.algebra(pi)?;
        let t = SpecializedTower::new(self.tower.clone(), p.clone());
        let s = t.algebra(pi)?;
        let mut o = Outcome::new(Status::Pass);
        o.set("point", p.to_string());
        o.set("dimension", s.realized_dimension());
        o.set("generic_dimension", generic.realized_dimension());
        o.relations("relations", &s.verify_presentation());
        let chain = self.prefix_chain(pi)?;
        let mut rep = RelationReport::default();
        for w in chain.windows(2) {
            rep.extend(specialization_commutes(&t, &w[0], &w[1])?);
        }
        o.relations("commutes", &rep);
        Ok(o)
    }

    fn probe(&self, task: &TaskSpec, ring: Option<&RingPoint>) -> Result<Outcome, TaskError> {
        let height = task.param_u64("height", 6) as i64;
        match task.param("kind", "separation") {
            "kernel" => {
                let p = ring.ok_or_else(|| TaskError::Other("kernel probe needs a ring".into()))?;
                let degree = task.param_u64("degree", 2) as usize;
                let rep = kernel_probe_ru(&self.datum, degree, height, p)?;
                let mut o = Outcome::new(Status::Info);
                o.set("kind", "kernel");
                o.set("point", p.to_string());
                o.set("words", rep.words);
                o.set("schedule", rep.schedule.clone());
                o.set("specialized", rep.specialized.clone());
                o.set("generic", rep.generic.clone());
                o.set("excess", rep.excess());
                Ok(o)
            }
            _ => {
                let window = weight_window(&self.datum, task.param_u64("window", 4) as i64)?;
                let power = task.param_u64("power", 2) as usize;
                let family = separation_family(&self.datum, &window, power);
                let mut o = Outcome::new(Status::Pass);
                let mut found = 0;
                for u in &family {
                    match separation_probe(&self.tower, u, height)? {
                        Some(_) => found += 1,
                        None => {
                            o.check(false, || format!("no π of height ≤ {height} separates {u}"))
                        }
                    }
                }
                o.set("kind", "separation");
                o.set("family", family.len());
                o.set("separated", found);
                o.set("window", window.len());
                Ok(o)
            }
        }
    }
}

/// Runs the given tasks on every `π` of the spec.
pub fn run_tasks(spec: &JobSpec, tasks: &[TaskSpec], cache: Option<Cache>) -> Report {
    let mut report = Report::default();
    let Some(runner) = Runner::new(spec, cache) else {
        return report;
    };
    let pis = spec.saturated_sets(&runner.datum);
    let ring = spec.ring.map(|r| r.point());
    for t in tasks {
        report
            .records
            .extend(runner.run_task(t, &pis, ring.clone()));
    }
    report
}

/// Runs the spec's task list in dependency order.
pub fn run(spec: &JobSpec, cache: Option<Cache>) -> Report {
    run_tasks(spec, &spec.ordered_tasks(), cache)
}
