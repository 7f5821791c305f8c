//! The line-oriented job specification format.
//!
//! ```text
//! spec      := (line "\n")*
//! line      := ws* [directive] ws* ["#" comment]
//! directive := "datum" "preset" NAME
//!            | "datum" "matrix" matrix ["pairing" matrix "roots" tuples "coroots" tuples]
//!            | "pi" "gens" list
//!            | "task" NAME (KEY "=" VALUE)*
//!            | "ring" "rational" "xi" INT ["/" INT]
//!            | "ring" "cyclotomic" INT
//! matrix    := "[" row ("," row)* "]"        row := "[" INT ("," INT)* "]"
//! list      := "[" [item ("," item)*] "]"    item := tuple | INT
//! tuples    := "[" tuple ("," tuple)* "]"    tuple := "(" INT ("," INT)* ")"
//! ```
//!
//! `datum matrix` with only a form builds the simply connected datum. A bare
//! integer in a list is a rank-one weight. Tasks: `build`, `dims`, `verify`,
//! `maps`, `limit`, `probe`, `specialize`.

use std::collections::BTreeMap;
use std::fmt;

use qhat_core::qarith::RingPoint;
use qhat_core::rootdata::{Coweight, RootDatum, SaturatedSet, Weight};
use thiserror::Error;

/// Bounds on integers and list lengths; larger inputs are rejected.
const MAX_ABS: i64 = 1_000_000;
const MAX_LIST: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct SpecError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explicit {
    pub pairing: Vec<Vec<i64>>,
    pub roots: Vec<Vec<i64>>,
    pub coroots: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DatumSpec {
    Preset(String),
    Matrix {
        form: Vec<Vec<i64>>,
        explicit: Option<Explicit>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskKind {
    Build,
    Dims,
    Verify,
    Maps,
    Limit,
    Probe,
    Specialize,
}

impl TaskKind {
    pub const ALL: [TaskKind; 7] = [
        TaskKind::Build,
        TaskKind::Dims,
        TaskKind::Verify,
        TaskKind::Maps,
        TaskKind::Limit,
        TaskKind::Probe,
        TaskKind::Specialize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Build => "build",
            TaskKind::Dims => "dims",
            TaskKind::Verify => "verify",
            TaskKind::Maps => "maps",
            TaskKind::Limit => "limit",
            TaskKind::Probe => "probe",
            TaskKind::Specialize => "specialize",
        }
    }

    pub fn from_name(s: &str) -> Option<TaskKind> {
        TaskKind::ALL.into_iter().find(|k| k.name() == s)
    }

    fn allowed_params(self) -> &'static [&'static str] {
        match self {
            TaskKind::Build
            | TaskKind::Dims
            | TaskKind::Verify
            | TaskKind::Limit
            | TaskKind::Specialize => &[],
            TaskKind::Maps => &["pairs"],
            TaskKind::Probe => &["kind", "height", "window", "power", "degree"],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub params: BTreeMap<String, String>,
}

impl TaskSpec {
    pub fn new(kind: TaskKind) -> Self {
        TaskSpec {
            kind,
            params: BTreeMap::new(),
        }
    }

    pub fn param_u64(&self, key: &str, default: u64) -> u64 {
        self.params
            .get(key)
            .and_then(|v| v.parse().ok())
            .unwrap_or(default)
    }

    pub fn param<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.params.get(key).map_or(default, |s| s.as_str())
    }

    fn needs_ring(&self) -> bool {
        self.kind == TaskKind::Specialize
            || (self.kind == TaskKind::Probe && self.param("kind", "separation") == "kernel")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingSpec {
    Rational(i64, i64),
    Cyclotomic(u32),
}

impl RingSpec {
    pub fn point(self) -> RingPoint {
        match self {
            RingSpec::Rational(p, q) => RingPoint::rational(p, q).expect("validated"),
            RingSpec::Cyclotomic(n) => RingPoint::cyclotomic(n).expect("validated"),
        }
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Rational(p, q) => write!(f, "rational xi {p}/{q}"),
            RingSpec::Cyclotomic(n) => write!(f, "cyclotomic {n}"),
        }
    }
}

/// A parsed and validated job.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JobSpec {
    pub datum: Option<DatumSpec>,
    /// Generator lists, one per `pi` line.
    pub pis: Vec<Vec<Vec<i64>>>,
    pub tasks: Vec<TaskSpec>,
    pub ring: Option<RingSpec>,
}

impl JobSpec {
    pub fn root_datum(&self) -> Option<RootDatum> {
        self.datum
            .as_ref()
            .map(|d| build_datum(d).expect("validated"))
    }

    /// The saturated sets of the `pi` lines, in order.
    pub fn saturated_sets(&self, datum: &RootDatum) -> Vec<SaturatedSet> {
        self.pis
            .iter()
            .map(|g| datum.saturate(&weights(g)).expect("validated"))
            .collect()
    }

    /// Tasks in dependency order: building first, derived checks after.
    pub fn ordered_tasks(&self) -> Vec<TaskSpec> {
        let mut out = self.tasks.clone();
        out.sort_by_key(|t| t.kind);
        out
    }
}

fn weights(g: &[Vec<i64>]) -> Vec<Weight> {
    g.iter().map(|w| Weight(w.clone())).collect()
}

fn write_row(f: &mut fmt::Formatter<'_>, open: char, close: char, xs: &[i64]) -> fmt::Result {
    write!(f, "{open}")?;
    for (k, x) in xs.iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, "{close}")
}

fn write_list(
    f: &mut fmt::Formatter<'_>,
    open: char,
    close: char,
    rows: &[Vec<i64>],
) -> fmt::Result {
    f.write_str("[")?;
    for (k, r) in rows.iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        write_row(f, open, close, r)?;
    }
    f.write_str("]")
}

impl fmt::Display for JobSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.datum {
            Some(DatumSpec::Preset(n)) => writeln!(f, "datum preset {n}")?,
            Some(DatumSpec::Matrix { form, explicit }) => {
                f.write_str("datum matrix ")?;
                write_list(f, '[', ']', form)?;
                if let Some(e) = explicit {
                    f.write_str(" pairing ")?;
                    write_list(f, '[', ']', &e.pairing)?;
                    f.write_str(" roots ")?;
                    write_list(f, '(', ')', &e.roots)?;
                    f.write_str(" coroots ")?;
                    write_list(f, '(', ')', &e.coroots)?;
                }
                writeln!(f)?;
            }
            None => {}
        }
        if let Some(r) = &self.ring {
            writeln!(f, "ring {r}")?;
        }
        for g in &self.pis {
            f.write_str("pi gens ")?;
            write_list(f, '(', ')', g)?;
            writeln!(f)?;
        }
        for t in &self.tasks {
            write!(f, "task {}", t.kind.name())?;
            for (k, v) in &t.params {
                write!(f, " {k}={v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn build_datum(d: &DatumSpec) -> Result<RootDatum, String> {
    match d {
        DatumSpec::Preset(n) => RootDatum::preset(n).map_err(|e| e.to_string()),
        DatumSpec::Matrix {
            form,
            explicit: None,
        } => RootDatum::simply_connected("matrix", form.clone()).map_err(|e| e.to_string()),
        DatumSpec::Matrix {
            form,
            explicit: Some(e),
        } => RootDatum::new(
            "matrix",
            form.clone(),
            e.pairing.clone(),
            e.roots.iter().map(|r| Weight(r.clone())).collect(),
            e.coroots.iter().map(|r| Coweight(r.clone())).collect(),
        )
        .map_err(|e| e.to_string()),
    }
}

struct Line<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Line<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        let body = src.split('#').next().unwrap_or("");
        Line {
            chars: body.chars().collect(),
            pos: 0,
            line,
            _src: src,
        }
    }

    fn err(&self, column: usize, message: impl Into<String>) -> SpecError {
        SpecError {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn here(&self, message: impl Into<String>) -> SpecError {
        self.err(self.pos + 1, message)
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SpecError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.here(format!("expected '{c}'")))
        }
    }

    /// A run of non-space characters other than brackets, `=`, `,`, `/`;
    /// returns the word and its 1-based column.
    fn word(&mut self) -> Result<(String, usize), SpecError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| !c.is_whitespace() && !"[]()=,/".contains(*c))
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.here("expected a word"));
        }
        Ok((self.chars[start..self.pos].iter().collect(), start + 1))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SpecError> {
        let (w, col) = self.word()?;
        if w != kw {
            return Err(self.err(col, format!("expected '{kw}', found '{w}'")));
        }
        Ok(())
    }

    fn int(&mut self) -> Result<i64, SpecError> {
        self.skip_ws();
        let start = self.pos;
        if self.chars.get(self.pos) == Some(&'-') {
            self.pos += 1;
        }
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        match s.parse::<i64>() {
            Ok(x) if x.abs() <= MAX_ABS => Ok(x),
            Ok(_) => Err(self.err(start + 1, format!("integer out of range (|x| ≤ {MAX_ABS})"))),
            Err(_) => {
                self.pos = start;
                Err(self.here("expected an integer"))
            }
        }
    }

    fn seq<T>(
        &mut self,
        open: char,
        close: char,
        mut item: impl FnMut(&mut Self) -> Result<T, SpecError>,
    ) -> Result<Vec<T>, SpecError> {
        self.expect(open)?;
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            if out.len() == MAX_LIST {
                return Err(self.here(format!("more than {MAX_LIST} items")));
            }
            out.push(item(self)?);
            if self.eat(close) {
                return Ok(out);
            }
            if !self.eat(',') {
                return Err(self.here(format!("expected ',' or '{close}'")));
            }
        }
    }

    fn tuple(&mut self) -> Result<Vec<i64>, SpecError> {
        self.seq('(', ')', |l| l.int())
    }

    fn matrix(&mut self) -> Result<Vec<Vec<i64>>, SpecError> {
        self.seq('[', ']', |l| l.seq('[', ']', |l| l.int()))
    }

    fn tuples(&mut self) -> Result<Vec<Vec<i64>>, SpecError> {
        self.seq('[', ']', |l| l.tuple())
    }

    /// Weight list; items remember their column for later diagnostics.
    fn weight_list(&mut self) -> Result<Vec<(Vec<i64>, usize)>, SpecError> {
        self.seq('[', ']', |l| {
            l.skip_ws();
            let col = l.pos + 1;
            if l.chars.get(l.pos) == Some(&'(') {
                Ok((l.tuple()?, col))
            } else {
                Ok((vec![l.int()?], col))
            }
        })
    }

    fn finish(&mut self) -> Result<(), SpecError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.here("unexpected trailing input"))
        }
    }
}

/// Parses and validates a job specification.
pub fn parse_spec(text: &str) -> Result<JobSpec, SpecError> {
    let mut spec = JobSpec::default();
    let mut datum: Option<(RootDatum, usize)> = None;
    let mut pending_pis: Vec<(usize, Vec<(Vec<i64>, usize)>)> = Vec::new();
    let mut ring_line = 0;
    let mut last = 0;
    for (k, raw) in text.lines().enumerate() {
        let n = k + 1;
        last = n;
        let mut l = Line::new(raw, n);
        if l.at_end() {
            continue;
        }
        let (head, col) = l.word()?;
        match head.as_str() {
            "datum" => {
                if datum.is_some() {
                    return Err(l.err(col, "datum given twice"));
                }
                let (kind, kcol) = l.word()?;
                let d = match kind.as_str() {
                    "preset" => {
                        let (name, ncol) = l.word()?;
                        l.finish()?;
                        if !RootDatum::preset_names().contains(&name.as_str()) {
                            return Err(l.err(
                                ncol,
                                format!(
                                    "unknown preset '{name}' (known: {})",
                                    RootDatum::preset_names().join(", ")
                                ),
                            ));
                        }
                        DatumSpec::Preset(name)
                    }
                    "matrix" => {
                        let form = l.matrix()?;
                        let explicit = if l.at_end() {
                            None
                        } else {
                            l.keyword("pairing")?;
                            let pairing = l.matrix()?;
                            l.keyword("roots")?;
                            let roots = l.tuples()?;
                            l.keyword("coroots")?;
                            let coroots = l.tuples()?;
                            l.finish()?;
                            Some(Explicit {
                                pairing,
                                roots,
                                coroots,
                            })
                        };
                        DatumSpec::Matrix { form, explicit }
                    }
                    other => {
                        return Err(l.err(
                            kcol,
                            format!("expected 'preset' or 'matrix', found '{other}'"),
                        ))
                    }
                };
                let rd = build_datum(&d).map_err(|m| l.err(kcol, m))?;
                datum = Some((rd, n));
                spec.datum = Some(d);
            }
            "pi" => {
                l.keyword("gens")?;
                let gens = l.weight_list()?;
                l.finish()?;
                if gens.is_empty() {
                    return Err(l.err(col, "a saturated set needs at least one generator"));
                }
                pending_pis.push((n, gens));
            }
            "task" => {
                let (name, ncol) = l.word()?;
                let kind = TaskKind::from_name(&name)
                    .ok_or_else(|| l.err(ncol, format!("unknown task '{name}'")))?;
                let mut t = TaskSpec::new(kind);
                while !l.at_end() {
                    let (key, kcol) = l.word()?;
                    l.expect('=')?;
                    let (value, _) = l.word()?;
                    if !kind.allowed_params().contains(&key.as_str()) {
                        return Err(l.err(kcol, format!("task '{name}' has no parameter '{key}'")));
                    }
                    if key != "kind" && value.parse::<u32>().is_err() {
                        return Err(l.err(
                            kcol,
                            format!("parameter '{key}' needs a nonnegative integer"),
                        ));
                    }
                    if key == "kind" && value != "separation" && value != "kernel" {
                        return Err(l.err(
                            kcol,
                            format!("probe kind must be 'separation' or 'kernel', found '{value}'"),
                        ));
                    }
                    t.params.insert(key, value);
                }
                spec.tasks.push(t);
            }
            "ring" => {
                if spec.ring.is_some() {
                    return Err(l.err(col, "ring given twice"));
                }
                let (kind, kcol) = l.word()?;
                let r = match kind.as_str() {
                    "rational" => {
                        l.keyword("xi")?;
                        let pcol = {
                            l.skip_ws();
                            l.pos + 1
                        };
                        let p = l.int()?;
                        let q = if l.eat('/') { l.int()? } else { 1 };
                        l.finish()?;
                        if p == 0 || q == 0 {
                            return Err(l.err(pcol, "ξ must be a nonzero rational"));
                        }
                        RingSpec::Rational(p, q)
                    }
                    "cyclotomic" => {
                        let ocol = {
                            l.skip_ws();
                            l.pos + 1
                        };
                        let o = l.int()?;
                        l.finish()?;
                        if !(1..=1000).contains(&o) {
                            return Err(l.err(ocol, "cyclotomic order must be between 1 and 1000"));
                        }
                        RingSpec::Cyclotomic(o as u32)
                    }
                    other => {
                        return Err(l.err(
                            kcol,
                            format!("expected 'rational' or 'cyclotomic', found '{other}'"),
                        ))
                    }
                };
                spec.ring = Some(r);
                ring_line = n;
            }
            other => return Err(l.err(col, format!("unknown directive '{other}'"))),
        }
    }

    if (!pending_pis.is_empty() || !spec.tasks.is_empty()) && datum.is_none() {
        return Err(SpecError {
            line: last.max(1),
            column: 1,
            message: "missing 'datum' line".into(),
        });
    }
    if let Some((d, _)) = &datum {
        for (n, gens) in pending_pis {
            for (g, col) in &gens {
                let w = Weight(g.clone());
                let err = |m: String| SpecError {
                    line: n,
                    column: *col,
                    message: m,
                };
                d.check_rank(&w).map_err(|e| err(e.to_string()))?;
                if !d.is_dominant(&w) {
                    let i = (0..d.rank())
                        .find(|&i| d.pair_simple(i, &w) < 0)
                        .unwrap_or(0);
                    return Err(err(format!(
                        "{w} is not dominant: ⟨h{i},{w}⟩ = {}",
                        d.pair_simple(i, &w)
                    )));
                }
            }
            spec.pis.push(gens.into_iter().map(|(g, _)| g).collect());
        }
    }
    if let Some(t) = spec.tasks.iter().find(|t| t.needs_ring()) {
        if spec.ring.is_none() {
            return Err(SpecError {
                line: last.max(1),
                column: 1,
                message: format!("task '{}' needs a 'ring' line", t.kind.name()),
            });
        }
    }
    let _ = ring_line;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let s = parse_spec("datum preset A1\npi gens [2]\ntask dims\n").unwrap();
        let d = s.root_datum().unwrap();
        let pis = s.saturated_sets(&d);
        assert_eq!(pis[0].key(), "{(0),(2)}");
        assert_eq!(s.tasks, vec![TaskSpec::new(TaskKind::Dims)]);

        let s = parse_spec("datum preset A2\npi gens [(1,1)]\ntask verify").unwrap();
        assert_eq!(s.pis, vec![vec![vec![1, 1]]]);

        let e = parse_spec("datum preset A2\npi gens [(-1,0)]\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 10));
        assert!(e.message.contains("not dominant"), "{e}");
    }

    #[test]
    fn errors_have_positions() {
        let cases = [
            ("datum preset G2\n", 1, 14, "unknown preset"),
            ("datum preset A2\npi gens [(1,0,0)]\n", 2, 10, "rank"),
            ("datum preset A1\npi gens [2\n", 2, 11, "expected ',' or ']'"),
            ("datum preset A1\ntask frobnicate\n", 2, 6, "unknown task"),
            (
                "datum preset A1\ntask probe colour=3\n",
                2,
                12,
                "no parameter",
            ),
            ("datum preset A1\ntask specialize\n", 2, 1, "needs a 'ring'"),
            ("pi gens [1]\n", 1, 1, "missing 'datum'"),
            ("datum preset A1\nring cyclotomic 0\n", 2, 17, "order"),
            ("datum preset A1 extra\n", 1, 17, "trailing"),
            ("  bogus\n", 1, 3, "unknown directive"),
        ];
        for (text, line, column, msg) in cases {
            let e = parse_spec(text).unwrap_err();
            assert_eq!((e.line, e.column), (line, column), "{text:?}: {e}");
            assert!(e.message.contains(msg), "{text:?}: {e}");
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let s = parse_spec("# job\n\ndatum preset B2 # long root first\n  task build\n").unwrap();
        assert_eq!(s.datum, Some(DatumSpec::Preset("B2".into())));
        assert!(parse_spec("").unwrap().tasks.is_empty());
    }

    #[test]
    fn matrices_and_rings() {
        let s = parse_spec("datum matrix [[2,-1],[-1,2]]\nring rational xi 3/2\npi gens [(1,0)]\n")
            .unwrap();
        assert_eq!(s.root_datum().unwrap().rank(), 2);
        assert_eq!(s.ring, Some(RingSpec::Rational(3, 2)));
        let s = parse_spec(
            "datum matrix [[2]] pairing [[1]] roots [(1)] coroots [(2)]\nring cyclotomic 4\n",
        )
        .unwrap();
        assert!(matches!(
            s.datum,
            Some(DatumSpec::Matrix {
                explicit: Some(_),
                ..
            })
        ));
        assert!(parse_spec("datum matrix [[2,1],[0,2]]\n").is_err());
    }

    #[test]
    fn round_trip() {
        let texts = [
            "datum preset A1\npi gens [2]\npi gens [0,1]\ntask dims\ntask probe kind=kernel degree=2\nring cyclotomic 4\n",
            "datum matrix [[2]] pairing [[1]] roots [(1)] coroots [(2)]\npi gens [(2)]\ntask verify\n",
            "datum preset A2\npi gens [(1,1),(3,0)]\ntask maps pairs=50\n",
        ];
        for t in texts {
            let a = parse_spec(t).unwrap();
            let b = parse_spec(&a.to_string()).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.to_string(), b.to_string());
        }
    }

    #[test]
    fn task_order() {
        let s = parse_spec("datum preset A1\ntask verify\ntask build\ntask dims\n").unwrap();
        let kinds: Vec<TaskKind> = s.ordered_tasks().iter().map(|t| t.kind).collect();
        assert_eq!(kinds, [TaskKind::Build, TaskKind::Dims, TaskKind::Verify]);
    }
}
