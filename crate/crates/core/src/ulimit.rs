//! The inverse limit `Û = lim← S(π)` as lazily evaluated coherent families,
//! the maps `θ : U → Û` and `θ̇ : U̇ → Û`, and identity checks at truncations.
//!
//! Equality in `Û` is only checked one truncation at a time, see [`eq_up_to`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::qarith::{qbinom, qint, FunctionField, LaurentPoly, RatFunc};
use crate::rootdata::{Coweight, RootDatum, SaturatedSet, Weight};
use crate::schur::{truncation_map, ReportRow, RelationReport, SchurElement, SchurError, SchurTower};
use crate::weylmod::Sign;

const FF: FunctionField = FunctionField;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LimitError {
    #[error(transparent)]
    Schur(#[from] SchurError),
    #[error("a word of U̇ must contain an idempotent 1_λ")]
    NoIdempotent,
    #[error("element belongs to datum {expected}, tower has {got}")]
    DatumMismatch { expected: String, got: String },
}

/// A letter of a word in `U`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum USymbol {
    /// `E_{±i}^{(k)}`.
    E { sign: Sign, i: usize, k: usize },
    K(Coweight),
}

/// A letter of a word in `U̇`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum DotSymbol {
    E { sign: Sign, i: usize, k: usize },
    One(Weight),
}

fn fmt_e(f: &mut fmt::Formatter<'_>, sign: Sign, i: usize, k: usize) -> fmt::Result {
    let letter = if sign == Sign::Plus { 'E' } else { 'F' };
    if k == 1 {
        write!(f, "{letter}{i}")
    } else {
        write!(f, "{letter}{i}^({k})")
    }
}

impl fmt::Display for USymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            USymbol::E { sign, i, k } => fmt_e(f, *sign, *i, *k),
            USymbol::K(h) => write!(f, "K{h}"),
        }
    }
}

impl fmt::Display for DotSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DotSymbol::E { sign, i, k } => fmt_e(f, *sign, *i, *k),
            DotSymbol::One(l) => write!(f, "1{l}"),
        }
    }
}

/// Finite `ℚ(v)`-linear combination of words, merged and sorted by word.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Combination<S: Ord + Clone> {
    terms: BTreeMap<Vec<S>, RatFunc>,
}

impl<S: Ord + Clone> Default for Combination<S> {
    fn default() -> Self {
        Combination { terms: BTreeMap::new() }
    }
}

impl<S: Ord + Clone> Combination<S> {
    pub fn zero() -> Self {
        Self::default()
    }

    fn push(&mut self, word: Vec<S>, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(word).or_default();
        *e = &*e + &c;
        if e.is_zero() {
            // keep the support exact
            let dead: Vec<Vec<S>> = self.terms.iter().filter(|(_, c)| c.is_zero()).map(|(w, _)| w.clone()).collect();
            for w in dead {
                self.terms.remove(&w);
            }
        }
    }

    fn from_word(word: Vec<S>, c: RatFunc) -> Self {
        let mut out = Self::zero();
        out.push(word, c);
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&RatFunc, &[S])> {
        self.terms.iter().map(|(w, c)| (c, w.as_slice()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.push(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &RatFunc) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            out.push(w.clone(), c * s);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&RatFunc::from(-1)))
    }

    /// Product by concatenation of words.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                let mut w = w1.clone();
                w.extend(w2.iter().cloned());
                out.push(w, c1 * c2);
            }
        }
        out
    }
}

impl<S: Ord + Clone + fmt::Display> fmt::Display for Combination<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if !c.is_one() || w.is_empty() {
                write!(f, "({c})")?;
                if !w.is_empty() {
                    f.write_str("*")?;
                }
            }
            for (j, s) in w.iter().enumerate() {
                if j > 0 {
                    f.write_str("*")?;
                }
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

/// Element of `U` in the generators `E_{±i}^{(k)}`, `K_h`.
pub type UExpr = Combination<USymbol>;

/// Element of `U̇`: every word contains some `1_λ`.
pub type UdotExpr = Combination<DotSymbol>;

impl UExpr {
    pub fn one() -> Self {
        Self::from_word(Vec::new(), RatFunc::one())
    }

    pub fn scalar(c: RatFunc) -> Self {
        Self::from_word(Vec::new(), c)
    }

    pub fn e(sign: Sign, i: usize) -> Self {
        Self::divided(sign, i, 1)
    }

    pub fn divided(sign: Sign, i: usize, k: usize) -> Self {
        Self::from_word(vec![USymbol::E { sign, i, k }], RatFunc::one())
    }

    pub fn k(h: Coweight) -> Self {
        Self::from_word(vec![USymbol::K(h)], RatFunc::one())
    }

    pub fn word(c: RatFunc, word: Vec<USymbol>) -> Self {
        Self::from_word(word, c)
    }
}

impl UdotExpr {
    pub fn idempotent(lambda: Weight) -> Self {
        Self::from_word(vec![DotSymbol::One(lambda)], RatFunc::one())
    }

    /// `E_{±i}^{(k)} 1_λ`.
    pub fn divided_one(sign: Sign, i: usize, k: usize, lambda: Weight) -> Self {
        Self::from_word(vec![DotSymbol::E { sign, i, k }, DotSymbol::One(lambda)], RatFunc::one())
    }

    pub fn dot_word(c: RatFunc, word: Vec<DotSymbol>) -> Result<Self, LimitError> {
        if !word.iter().any(|s| matches!(s, DotSymbol::One(_))) {
            return Err(LimitError::NoIdempotent);
        }
        Ok(Self::from_word(word, c))
    }
}

type Evaluator = dyn Fn(&SchurTower, &SaturatedSet) -> Result<SchurElement<RatFunc>, SchurError> + Send + Sync;

/// An element of `Û`: an evaluator `π ↦ S(π)` with a write-once memo.
#[derive(Clone)]
pub struct LimitElement {
    label: String,
    datum: String,
    eval: Arc<Evaluator>,
    memo: Arc<Mutex<HashMap<SaturatedSet, SchurElement<RatFunc>>>>,
}

impl fmt::Debug for LimitElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LimitElement").field("label", &self.label).finish_non_exhaustive()
    }
}

impl LimitElement {
    pub fn from_fn(
        datum: &RootDatum,
        label: impl Into<String>,
        f: impl Fn(&SchurTower, &SaturatedSet) -> Result<SchurElement<RatFunc>, SchurError> + Send + Sync + 'static,
    ) -> Self {
        LimitElement {
            label: label.into(),
            datum: datum.canonical_string(),
            eval: Arc::new(f),
            memo: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn check_datum(&self, tower: &SchurTower) -> Result<(), LimitError> {
        let got = tower.datum().canonical_string();
        if got != self.datum {
            return Err(LimitError::DatumMismatch { expected: self.datum.clone(), got });
        }
        Ok(())
    }

    /// The component at `π`, memoized.
    pub fn evaluate(&self, tower: &SchurTower, pi: &SaturatedSet) -> Result<SchurElement<RatFunc>, LimitError> {
        self.check_datum(tower)?;
        if let Some(x) = self.memo.lock().unwrap().get(pi) {
            return Ok(x.clone());
        }
        let x = (self.eval)(tower, pi)?;
        Ok(self.memo.lock().unwrap().entry(pi.clone()).or_insert(x).clone())
    }

    /// The component at `π`, bypassing the memo.
    pub fn evaluate_uncached(&self, tower: &SchurTower, pi: &SaturatedSet) -> Result<SchurElement<RatFunc>, LimitError> {
        self.check_datum(tower)?;
        Ok((self.eval)(tower, pi)?)
    }
}

/// `Ê_{±i} = (E_{±i})_π`.
pub fn hat_e(datum: &RootDatum, sign: Sign, i: usize) -> LimitElement {
    hat_divided(datum, sign, i, 1)
}

/// `(E_{±i}^{(k)})_π`.
pub fn hat_divided(datum: &RootDatum, sign: Sign, i: usize, k: usize) -> LimitElement {
    let label = UExpr::divided(sign, i, k).to_string();
    LimitElement::from_fn(datum, label, move |t, pi| Ok(t.algebra(pi)?.divided_power(sign, i, k)))
}

/// `1̂_λ = (1_λ)_π`, zero while `λ ∉ Wπ`.
pub fn hat_one(datum: &RootDatum, lambda: &Weight) -> LimitElement {
    let l = lambda.clone();
    LimitElement::from_fn(datum, format!("1{lambda}"), move |t, pi| Ok(t.algebra(pi)?.idempotent(&l)))
}

/// `K̂_h = (K_h)_π`.
pub fn hat_k(datum: &RootDatum, h: &Coweight) -> LimitElement {
    let h = h.clone();
    LimitElement::from_fn(datum, format!("K{h}"), move |t, pi| Ok(t.algebra(pi)?.k_element(&h)))
}

pub fn limit_zero(datum: &RootDatum) -> LimitElement {
    LimitElement::from_fn(datum, "0", |t, pi| Ok(t.algebra(pi)?.zero()))
}

pub fn limit_identity(datum: &RootDatum) -> LimitElement {
    LimitElement::from_fn(datum, "1", |t, pi| Ok(t.algebra(pi)?.identity()))
}

pub fn limit_add(a: &LimitElement, b: &LimitElement) -> LimitElement {
    let (a2, b2) = (a.clone(), b.clone());
    LimitElement {
        label: format!("({} + {})", a.label, b.label),
        datum: a.datum.clone(),
        eval: Arc::new(move |t, pi| Ok(eval_plain(&a2, t, pi)?.add(&FF, &eval_plain(&b2, t, pi)?))),
        memo: Arc::new(Mutex::new(HashMap::new())),
    }
}

pub fn limit_sub(a: &LimitElement, b: &LimitElement) -> LimitElement {
    let (a2, b2) = (a.clone(), b.clone());
    LimitElement {
        label: format!("({} - {})", a.label, b.label),
        datum: a.datum.clone(),
        eval: Arc::new(move |t, pi| Ok(eval_plain(&a2, t, pi)?.sub(&FF, &eval_plain(&b2, t, pi)?))),
        memo: Arc::new(Mutex::new(HashMap::new())),
    }
}

pub fn limit_mul(a: &LimitElement, b: &LimitElement) -> LimitElement {
    let (a2, b2) = (a.clone(), b.clone());
    LimitElement {
        label: format!("{}*{}", a.label, b.label),
        datum: a.datum.clone(),
        eval: Arc::new(move |t, pi| Ok(eval_plain(&a2, t, pi)?.mul(&FF, &eval_plain(&b2, t, pi)?))),
        memo: Arc::new(Mutex::new(HashMap::new())),
    }
}

pub fn limit_scale(a: &LimitElement, c: &RatFunc) -> LimitElement {
    let (a2, c2) = (a.clone(), c.clone());
    LimitElement {
        label: format!("({c})*{}", a.label),
        datum: a.datum.clone(),
        eval: Arc::new(move |t, pi| Ok(eval_plain(&a2, t, pi)?.scale(&FF, &c2))),
        memo: Arc::new(Mutex::new(HashMap::new())),
    }
}

/// Evaluation inside composite evaluators, where errors are already scoped
/// to one datum.
fn eval_plain(a: &LimitElement, t: &SchurTower, pi: &SaturatedSet) -> Result<SchurElement<RatFunc>, SchurError> {
    match a.evaluate(t, pi) {
        Ok(x) => Ok(x),
        Err(LimitError::Schur(e)) => Err(e),
        Err(e) => panic!("{e}"),
    }
}

/// `Σ_λ c(λ) · word · 1̂_λ`, truncated at each `π` to `λ ∈ Wπ`.
pub fn weight_sum(
    datum: &RootDatum,
    label: impl Into<String>,
    word: UExpr,
    coeff: impl Fn(&Weight) -> RatFunc + Send + Sync + 'static,
) -> LimitElement {
    LimitElement::from_fn(datum, label, move |t, pi| {
        let s = t.algebra(pi)?;
        let w = s.evaluate_u_word(&word)?;
        let mut acc = s.zero();
        for l in s.orbit() {
            let c = coeff(l);
            if !c.is_zero() {
                acc = acc.add(&FF, &w.mul(&FF, &s.idempotent(l)).scale(&FF, &c));
            }
        }
        Ok(acc)
    })
}

/// `θ(u)`, evaluated at `π` through `p_π`.
pub fn theta(datum: &RootDatum, u: &UExpr) -> LimitElement {
    let u2 = u.clone();
    LimitElement::from_fn(datum, format!("θ({u})"), move |t, pi| t.algebra(pi)?.evaluate_u_word(&u2))
}

/// `θ̇(u)`, evaluated at `π` through `ṗ_π`.
pub fn theta_dot(datum: &RootDatum, u: &UdotExpr) -> LimitElement {
    let u2 = u.clone();
    LimitElement::from_fn(datum, format!("θ̇({u})"), move |t, pi| t.algebra(pi)?.evaluate_udot(&u2))
}

/// `a_π = b_π`: equality seen at one truncation.
pub fn eq_up_to(a: &LimitElement, b: &LimitElement, tower: &SchurTower, pi: &SaturatedSet) -> Result<bool, LimitError> {
    Ok(a.evaluate(tower, pi)? == b.evaluate(tower, pi)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceLink {
    pub from: String,
    pub to: String,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoherenceReport {
    pub chain: Vec<String>,
    pub links: Vec<CoherenceLink>,
}

impl CoherenceReport {
    pub fn passed(&self) -> bool {
        self.links.iter().all(|l| l.passed)
    }
}

fn compare_link(
    a: &LimitElement,
    tower: &SchurTower,
    small: &SaturatedSet,
    big: &SaturatedSet,
) -> Result<CoherenceLink, LimitError> {
    let f = truncation_map(small, big)?;
    let lhs = f.apply(&a.evaluate(tower, big)?);
    let rhs = a.evaluate(tower, small)?;
    let witness = lhs.first_difference(&rhs).map(|(b, r, c)| {
        format!(
            "block {} entry ({r},{c}): f(a_π′) = {} but a_π = {}",
            small.elements()[b],
            lhs.blocks[b].get(r, c),
            rhs.blocks[b].get(r, c)
        )
    });
    Ok(CoherenceLink { from: big.key(), to: small.key(), passed: witness.is_none(), witness })
}

/// Checks `f_{π,π′}(a_{π′}) = a_π` along each adjacent pair of a chain.
pub fn verify_coherence(a: &LimitElement, tower: &SchurTower, chain: &[SaturatedSet]) -> Result<CoherenceReport, LimitError> {
    let mut rep = CoherenceReport { chain: chain.iter().map(|p| p.key()).collect(), links: Vec::new() };
    for w in chain.windows(2) {
        rep.links.push(compare_link(a, tower, &w[0], &w[1])?);
    }
    Ok(rep)
}

/// Compares evaluations across two chains wherever one set contains the other.
pub fn cofinal_consistency(
    a: &LimitElement,
    tower: &SchurTower,
    chain1: &[SaturatedSet],
    chain2: &[SaturatedSet],
) -> Result<CoherenceReport, LimitError> {
    let mut rep = CoherenceReport::default();
    rep.chain = chain1.iter().chain(chain2).map(|p| p.key()).collect();
    for p in chain1 {
        for q in chain2 {
            if p.is_subset(q) {
                rep.links.push(compare_link(a, tower, p, q)?);
            } else if q.is_subset(p) {
                rep.links.push(compare_link(a, tower, q, p)?);
            }
        }
    }
    Ok(rep)
}

fn qint_i(datum: &RootDatum, i: usize, n: i64) -> RatFunc {
    RatFunc::from(qint(n, datum.d(i)))
}

/// Coweights used to exercise `K̂_h`: `0`, each `±h_i` and their sum.
pub fn sample_coweights(datum: &RootDatum) -> Vec<Coweight> {
    let mut out = vec![Coweight::zero(datum.rank_y())];
    let mut sum = Coweight::zero(datum.rank_y());
    for h in datum.simple_coroots() {
        out.push(h.clone());
        out.push(h.scaled(-1));
        sum = sum.add(h);
    }
    if datum.rank() > 1 {
        out.push(sum.clone());
        out.push(sum.add(&datum.simple_coroots()[0]));
    }
    out
}

/// Weights around `Wπ` at which idempotent relations are sampled: `Wπ`
/// itself plus each neighbour `λ ± α_i`.
fn idempotent_sample(datum: &RootDatum, orbit: &[Weight]) -> Vec<Weight> {
    let mut out: Vec<Weight> = orbit.to_vec();
    for l in orbit {
        for a in datum.simple_roots() {
            out.push(l.add(a));
            out.push(l.sub(a));
        }
    }
    out.sort();
    out.dedup();
    out
}

fn check_eq(row: &mut ReportRow, a: &LimitElement, b: &LimitElement, t: &SchurTower, pi: &SaturatedSet) -> Result<(), LimitError> {
    let ok = eq_up_to(a, b, t, pi)?;
    row.check(ok, || format!("{} ≠ {} at {}", a.label, b.label, pi));
    Ok(())
}

/// `K̂_h = Σ_λ v^{⟨h,λ⟩} 1̂_λ` at `π`.
pub fn check_prop_kh(tower: &SchurTower, pi: &SaturatedSet) -> Result<RelationReport, LimitError> {
    let d = tower.datum().clone();
    let mut row = ReportRow::new("K̂_h = Σ v^⟨h,λ⟩ 1̂_λ");
    for h in sample_coweights(&d) {
        let d2 = d.clone();
        let h2 = h.clone();
        let sum = weight_sum(&d, format!("Σ v^⟨{h},λ⟩ 1̂_λ"), UExpr::one(), move |l| RatFunc::v_pow(d2.pair(&h2, l)));
        check_eq(&mut row, &hat_k(&d, &h), &sum, tower, pi)?;
    }
    Ok(RelationReport { rows: vec![row] })
}

/// Relations (a)–(d) among `1̂_λ`, `Ê_{±i}`, and the `K̂`-identities.
pub fn check_uhat_relations(tower: &SchurTower, pi: &SaturatedSet) -> Result<RelationReport, LimitError> {
    let d = tower.datum().clone();
    let s = tower.algebra(pi)?;
    let mut rep = RelationReport::default();
    let sample = idempotent_sample(&d, s.orbit());
    let zero = limit_zero(&d);
    let one = limit_identity(&d);

    let mut row = ReportRow::new("1̂_λ 1̂_μ = δ 1̂_λ");
    let ones: Vec<LimitElement> = sample.iter().map(|l| hat_one(&d, l)).collect();
    for (a, x) in ones.iter().enumerate() {
        for (b, y) in ones.iter().enumerate() {
            let rhs = if a == b { x } else { &zero };
            check_eq(&mut row, &limit_mul(x, y), rhs, tower, pi)?;
        }
    }
    rep.rows.push(row);

    let mut row = ReportRow::new("Σ 1̂_λ = 1");
    let sum = weight_sum(&d, "Σ 1̂_λ", UExpr::one(), |_| RatFunc::one());
    check_eq(&mut row, &sum, &one, tower, pi)?;
    rep.rows.push(row);

    let mut row = ReportRow::new("Ê_{±i} 1̂_λ = 1̂_{λ±α_i} Ê_{±i}");
    for i in 0..d.rank() {
        for sign in Sign::both() {
            let e = hat_e(&d, sign, i);
            let a = d.simple_root(i).scaled(sign.factor());
            for l in &sample {
                check_eq(&mut row, &limit_mul(&e, &hat_one(&d, l)), &limit_mul(&hat_one(&d, &l.add(&a)), &e), tower, pi)?;
            }
        }
    }
    rep.rows.push(row);

    let mut row = ReportRow::new("Ê_i Ê_-j − Ê_-j Ê_i = δ_ij Σ [⟨h_i,λ⟩]_i 1̂_λ");
    for i in 0..d.rank() {
        for j in 0..d.rank() {
            let (ei, fj) = (hat_e(&d, Sign::Plus, i), hat_e(&d, Sign::Minus, j));
            let lhs = limit_sub(&limit_mul(&ei, &fj), &limit_mul(&fj, &ei));
            let rhs = if i == j {
                let d2 = d.clone();
                weight_sum(&d, format!("Σ [⟨h{i},λ⟩] 1̂_λ"), UExpr::one(), move |l| qint_i(&d2, i, d2.pair_simple(i, l)))
            } else {
                zero.clone()
            };
            check_eq(&mut row, &lhs, &rhs, tower, pi)?;
        }
    }
    rep.rows.push(row);

    let mut row = ReportRow::new("Σ (−1)^s' Ê^(s) Ê_j Ê^(s') = 0");
    for i in 0..d.rank() {
        for j in 0..d.rank() {
            if i == j {
                continue;
            }
            let top = (1 - d.cartan_entry(i, j)) as usize;
            for sign in Sign::both() {
                let mut acc = zero.clone();
                for a in 0..=top {
                    let term = limit_mul(&limit_mul(&hat_divided(&d, sign, i, a), &hat_e(&d, sign, j)), &hat_divided(&d, sign, i, top - a));
                    acc = if (top - a) % 2 == 0 { limit_add(&acc, &term) } else { limit_sub(&acc, &term) };
                }
                check_eq(&mut row, &acc, &zero, tower, pi)?;
            }
        }
    }
    rep.rows.push(row);

    let mut row = ReportRow::new("K̂_h K̂_h' = K̂_{h+h'}, K̂_0 = 1, K̂_-h = K̂_h⁻¹");
    let hs = sample_coweights(&d);
    for h in &hs {
        for h2 in &hs {
            check_eq(&mut row, &limit_mul(&hat_k(&d, h), &hat_k(&d, h2)), &hat_k(&d, &h.add(h2)), tower, pi)?;
        }
        check_eq(&mut row, &limit_mul(&hat_k(&d, h), &hat_k(&d, &h.scaled(-1))), &one, tower, pi)?;
    }
    check_eq(&mut row, &hat_k(&d, &Coweight::zero(d.rank_y())), &one, tower, pi)?;
    rep.rows.push(row);
    Ok(rep)
}

/// The relations of `U` for `K̂_h`, `Ê_{±i}`.
pub fn check_u_relations(tower: &SchurTower, pi: &SaturatedSet) -> Result<RelationReport, LimitError> {
    let d = tower.datum().clone();
    let mut rep = RelationReport::default();
    let zero = limit_zero(&d);
    let hs = sample_coweights(&d);

    let mut row = ReportRow::new("K̂_h K̂_h' = K̂_{h+h'}");
    for h in &hs {
        for h2 in &hs {
            check_eq(&mut row, &limit_mul(&hat_k(&d, h), &hat_k(&d, h2)), &hat_k(&d, &h.add(h2)), tower, pi)?;
        }
    }
    rep.rows.push(row);

    let mut row = ReportRow::new("K̂_h Ê_{±i} = v^{±⟨h,α_i⟩} Ê_{±i} K̂_h");
    for h in &hs {
        for i in 0..d.rank() {
            for sign in Sign::both() {
                let e = hat_e(&d, sign, i);
                let k = hat_k(&d, h);
                let c = RatFunc::v_pow(sign.factor() * d.pair(h, d.simple_root(i)));
                check_eq(&mut row, &limit_mul(&k, &e), &limit_scale(&limit_mul(&e, &k), &c), tower, pi)?;
            }
        }
    }
    rep.rows.push(row);

    let mut row = ReportRow::new("Ê_i Ê_-j − Ê_-j Ê_i = δ_ij (K̃_i − K̃_-i)/(v_i − v_i⁻¹)");
    for i in 0..d.rank() {
        for j in 0..d.rank() {
            let (ei, fj) = (hat_e(&d, Sign::Plus, i), hat_e(&d, Sign::Minus, j));
            let lhs = limit_sub(&limit_mul(&ei, &fj), &limit_mul(&fj, &ei));
            let rhs = if i == j {
                let di = d.d(i) as i64;
                let h = d.simple_coroot(i).scaled(di);
                let den = (&RatFunc::v_pow(di) - &RatFunc::v_pow(-di)).inv().expect("v_i ≠ v_i⁻¹");
                limit_scale(&limit_sub(&hat_k(&d, &h), &hat_k(&d, &h.scaled(-1))), &den)
            } else {
                zero.clone()
            };
            check_eq(&mut row, &lhs, &rhs, tower, pi)?;
        }
    }
    rep.rows.push(row);

    let mut row = ReportRow::new("Σ (−1)^s' [1−a_ij; s]_i Ê^s Ê_j Ê^s' = 0");
    for i in 0..d.rank() {
        for j in 0..d.rank() {
            if i == j {
                continue;
            }
            let top = 1 - d.cartan_entry(i, j);
            for sign in Sign::both() {
                let e = hat_e(&d, sign, i);
                let pow = |n: i64| (0..n).fold(limit_identity(&d), |acc, _| limit_mul(&acc, &e));
                let mut acc = zero.clone();
                for a in 0..=top {
                    let c = RatFunc::from(qbinom(top, a as u32, d.d(i)));
                    let term = limit_scale(&limit_mul(&limit_mul(&pow(a), &hat_e(&d, sign, j)), &pow(top - a)), &c);
                    acc = if (top - a) % 2 == 0 { limit_add(&acc, &term) } else { limit_sub(&acc, &term) };
                }
                check_eq(&mut row, &acc, &zero, tower, pi)?;
            }
        }
    }
    rep.rows.push(row);
    Ok(rep)
}

/// Principal saturated sets `saturate({μ})`, `μ` dominant by (height,
/// coordinates) up to `height_bound`: the default probe schedule.
pub fn probe_schedule(datum: &RootDatum, height_bound: i64) -> Result<Vec<SaturatedSet>, LimitError> {
    let mut out = Vec::new();
    for mu in datum.dominant_weights_up_to(height_bound).map_err(|e| SchurError::Weyl(e.into()))? {
        out.push(datum.saturate(&[mu]).map_err(|e| SchurError::Weyl(e.into()))?);
    }
    Ok(out)
}

/// First scheduled `π` where `θ̇(u)` is nonzero. `None` is inconclusive.
pub fn separation_probe(tower: &SchurTower, u: &UdotExpr, height_bound: i64) -> Result<Option<SaturatedSet>, LimitError> {
    let d = tower.datum().clone();
    let a = theta_dot(&d, u);
    for pi in probe_schedule(&d, height_bound)? {
        if !a.evaluate(tower, &pi)?.is_zero(&FF) {
            return Ok(Some(pi));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherentBasisReport {
    pub pi: String,
    pub candidates: usize,
    pub nonzero: usize,
    pub rank: usize,
    pub dimension: usize,
    pub independent: bool,
    pub spanning: bool,
}

/// Whether the nonzero images of `B` in `S(π)` are independent and span.
pub fn coherent_basis_check(tower: &SchurTower, family: &[UdotExpr], pi: &SaturatedSet) -> Result<CoherentBasisReport, LimitError> {
    let s = tower.algebra(pi)?;
    let mut images = Vec::new();
    for u in family {
        let x = s.evaluate_udot(u)?;
        if !x.is_zero(&FF) {
            images.push(x);
        }
    }
    let rank = s.span_rank(&images);
    let dimension = s.algebra_dimension()?;
    Ok(CoherentBasisReport {
        pi: pi.key(),
        candidates: family.len(),
        nonzero: images.len(),
        rank,
        dimension,
        independent: rank == images.len(),
        spanning: rank == dimension,
    })
}

/// `{E^{(a)} 1_λ F^{(b)}}`-type monomials `E_{±i}^{(a)} 1_λ E_{∓i}^{(b)}` for
/// every `i`, `a, b ≤ max_power` and `λ` in `weights`.
pub fn monomial_family(datum: &RootDatum, weights: &[Weight], max_power: usize) -> Vec<UdotExpr> {
    let mut out = Vec::new();
    for l in weights {
        for i in 0..datum.rank() {
            for a in 0..=max_power {
                for b in 0..=max_power {
                    let mut w = Vec::new();
                    if a > 0 {
                        w.push(DotSymbol::E { sign: Sign::Plus, i, k: a });
                    }
                    w.push(DotSymbol::One(l.clone()));
                    if b > 0 {
                        w.push(DotSymbol::E { sign: Sign::Minus, i, k: b });
                    }
                    let u = UdotExpr::dot_word(RatFunc::one(), w).expect("contains 1_λ");
                    if !out.contains(&u) {
                        out.push(u);
                    }
                }
            }
        }
    }
    out
}

/// The separation test family `{1_λ, E_i^{(a)} 1_λ, F_i^{(b)} 1_λ : 1 ≤ a, b ≤ max_power}`.
pub fn separation_family(datum: &RootDatum, weights: &[Weight], max_power: usize) -> Vec<UdotExpr> {
    let mut out = Vec::new();
    for l in weights {
        out.push(UdotExpr::idempotent(l.clone()));
        for i in 0..datum.rank() {
            for k in 1..=max_power {
                for sign in Sign::both() {
                    out.push(UdotExpr::divided_one(sign, i, k, l.clone()));
                }
            }
        }
    }
    out
}

/// All of `X` with dominant conjugate of height at most `h`.
pub fn weight_window(datum: &RootDatum, h: i64) -> Result<Vec<Weight>, LimitError> {
    let dom = datum.dominant_weights_up_to(h).map_err(|e| SchurError::Weyl(e.into()))?;
    let mut out: Vec<Weight> = dom.iter().flat_map(|l| datum.weyl_orbit(l)).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// `qint` re-exported at the limit level for coefficient rules.
pub fn quantum_integer(datum: &RootDatum, i: usize, n: i64) -> LaurentPoly {
    qint(n, datum.d(i))
}
