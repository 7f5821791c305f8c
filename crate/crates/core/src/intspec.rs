//! `𝒜`-lattices in Weyl modules, the `𝒜`-forms of `S(π)`, and their
//! specializations `v ↦ ξ` over exact rings.
//!
//! A lattice basis is a set of divided-power monomials `F^{(k₁)}_{i₁}⋯m`
//! chosen greedily. When every divided power acts integrally in it, its
//! `𝒜`-span is `𝒜U`-stable and contains `m`, and it is spanned by elements
//! of `𝒜U·m`; so it is exactly `𝒜U·m`, free with the chosen basis.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::linalg::{Echelon, Matrix};
use crate::qarith::{is_integral, Field, FunctionField, LaurentPoly, QArithError, RatFunc, RingElem, RingPoint};
use crate::rootdata::{RootDatum, SaturatedSet, Weight};
use crate::schur::{
    truncation_map, verify_truncation, Block, RelationReport, SchurAlgebra, SchurElement, SchurError, SchurTower,
    TruncationMap,
};
use crate::ulimit::{CoherenceLink, CoherenceReport, UExpr, USymbol, UdotExpr};
use crate::weylmod::{Sign, WeylModule};

const FF: FunctionField = FunctionField;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntSpecError {
    #[error(transparent)]
    Schur(#[from] SchurError),
    #[error(transparent)]
    QArith(#[from] QArithError),
    #[error("unsupported lattice for Δ{lambda}: {generator} has entry ({row},{col}) = {entry} outside ℤ[v,v⁻¹]")]
    UnsupportedLattice { lambda: Weight, generator: String, row: usize, col: usize, entry: String },
    #[error("divided-power monomials do not span the {weight} space of Δ{lambda}")]
    NoSpan { lambda: Weight, weight: Weight },
}

/// A divided-power monomial `F_{i₁}^{(k₁)} ⋯ F_{i_r}^{(k_r)} m`, stored
/// left to right as `(i, k)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct DWord(pub Vec<(usize, usize)>);

impl fmt::Display for DWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(i, k) in &self.0 {
            if k == 1 {
                write!(f, "F{i}")?;
            } else {
                write!(f, "F{i}^({k})")?;
            }
        }
        f.write_str("m")
    }
}

/// An `𝒜`-basis of `𝒜U·m ⊂ Δ(λ)` by divided-power monomials.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    lambda: Weight,
    weights: Vec<Weight>,
    labels: Vec<DWord>,
    /// Columns are the lattice vectors in the word basis of the module.
    transition: Matrix<RatFunc>,
    /// Determinant of the transition on each weight space.
    determinants: Vec<(Weight, RatFunc)>,
    /// `powers[i][s][k]`, entries in `𝒜`.
    powers: Vec<[Vec<Matrix<LaurentPoly>>; 2]>,
}

fn slot(sign: Sign) -> usize {
    match sign {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

impl LatticeBasis {
    pub fn lambda(&self) -> &Weight {
        &self.lambda
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[DWord] {
        &self.labels
    }

    pub fn basis_weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn transition(&self) -> &Matrix<RatFunc> {
        &self.transition
    }

    /// Transition determinants per weight space, from the word basis.
    pub fn determinants(&self) -> &[(Weight, RatFunc)] {
        &self.determinants
    }

    /// Whether every transition determinant is a unit `±v^k` of `𝒜`.
    pub fn determinants_are_units(&self) -> bool {
        self.determinants.iter().all(|(_, d)| d.to_laurent().is_some_and(|p| p.is_unit()))
    }

    pub fn max_power(&self, sign: Sign, i: usize) -> usize {
        self.powers[i][slot(sign)].len() - 1
    }

    /// `E_{±i}^{(k)}` in the lattice basis; zero beyond the nilpotency degree.
    pub fn divided_power(&self, sign: Sign, i: usize, k: usize) -> Matrix<LaurentPoly> {
        self.powers[i][slot(sign)]
            .get(k)
            .cloned()
            .unwrap_or_else(|| Matrix::from_fn(self.dim(), self.dim(), |_, _| LaurentPoly::zero()))
    }

    /// The block of `𝒜S(π)` carried by this lattice.
    pub fn block(&self) -> Block<LaurentPoly> {
        Block::new(self.lambda.clone(), self.weights.clone(), self.powers.clone())
    }
}

/// Greedy divided-power monomial basis of `𝒜U·m`, with every divided power
/// checked to act by matrices over `𝒜`. Candidates `F_i^{(k)} b` are tried
/// with fewer letters first, then in word order.
pub fn lattice_basis(datum: &RootDatum, m: &WeylModule) -> Result<LatticeBasis, IntSpecError> {
    let n = m.dim();
    let ws = m.basis_weights();
    let rank = m.rank();
    // chosen lattice vectors per weight, as (label, full coordinate vector)
    let mut chosen: HashMap<Weight, Vec<(DWord, Vec<RatFunc>)>> = HashMap::new();
    let mut top = vec![RatFunc::zero(); n];
    top[0] = RatFunc::one();
    chosen.insert(m.lambda().clone(), vec![(DWord::default(), top)]);

    let mut fpow: Vec<Vec<Matrix<RatFunc>>> = Vec::with_capacity(rank);
    for i in 0..rank {
        fpow.push((0..=m.max_power(Sign::Minus, i)).map(|k| m.divided_power(Sign::Minus, i, k)).collect());
    }

    for nu in m.weights().iter().skip(1) {
        let range = m.weight_range(nu).expect("weight of the module");
        let mut cands: Vec<(DWord, Vec<RatFunc>)> = Vec::new();
        for (i, pows) in fpow.iter().enumerate() {
            for (k, mat) in pows.iter().enumerate().skip(1) {
                let above = nu.add(&datum.simple_root(i).scaled(k as i64));
                let Some(bs) = chosen.get(&above) else { continue };
                for (label, b) in bs {
                    let mut w = vec![(i, k)];
                    w.extend(label.0.iter().copied());
                    cands.push((DWord(w), mat.mul_vec(&FF, b)));
                }
            }
        }
        cands.sort_by(|a, b| (a.0 .0.len(), &a.0).cmp(&(b.0 .0.len(), &b.0)));
        let mut ech = Echelon::new(FF, range.len());
        let mut picked = Vec::new();
        for (label, vec) in cands {
            if ech.rank() == range.len() {
                break;
            }
            if ech.insert(vec[range.clone()].to_vec()) {
                picked.push((label, vec));
            }
        }
        if picked.len() < range.len() {
            return Err(IntSpecError::NoSpan { lambda: m.lambda().clone(), weight: nu.clone() });
        }
        chosen.insert(nu.clone(), picked);
    }

    let mut labels = Vec::with_capacity(n);
    let mut transition = Matrix::zeros(&FF, n, n);
    let mut determinants = Vec::new();
    let mut col = 0;
    for nu in m.weights() {
        let range = m.weight_range(nu).expect("weight of the module");
        for (label, vec) in &chosen[nu] {
            for (r, x) in vec.iter().enumerate() {
                transition.set(r, col, x.clone());
            }
            labels.push(label.clone());
            col += 1;
        }
        let idx: Vec<usize> = range.collect();
        determinants.push((nu.clone(), transition.submatrix(&idx, &idx).determinant(&FF)));
    }
    let inv = transition.inverse(&FF).expect("lattice vectors are independent");

    let mut powers = Vec::with_capacity(rank);
    for i in 0..rank {
        let mut pair: [Vec<Matrix<LaurentPoly>>; 2] = [Vec::new(), Vec::new()];
        for sign in Sign::both() {
            for k in 0..=m.max_power(sign, i) {
                let a = inv.mul(&FF, &m.divided_power(sign, i, k)).mul(&FF, &transition);
                let mut out = Matrix::from_fn(n, n, |_, _| LaurentPoly::zero());
                for r in 0..n {
                    for c in 0..n {
                        let e = a.get(r, c);
                        let Some(p) = is_integral(e) else {
                            let letter = if sign == Sign::Plus { 'E' } else { 'F' };
                            return Err(IntSpecError::UnsupportedLattice {
                                lambda: m.lambda().clone(),
                                generator: format!("{letter}{i}^({k})"),
                                row: r,
                                col: c,
                                entry: e.to_string(),
                            });
                        };
                        out.set(r, c, p);
                    }
                }
                pair[slot(sign)].push(out);
            }
        }
        powers.push(pair);
    }
    Ok(LatticeBasis { lambda: m.lambda().clone(), weights: ws, labels, transition, determinants, powers })
}

/// `S(π)` over `ℚ(v)` realized on the lattice bases: its `𝒜`-matrices
/// viewed in `ℚ(v)`, closed under every divided power.
pub fn lattice_algebra(datum: &RootDatum, pi: &SaturatedSet, lattices: &[Arc<LatticeBasis>]) -> SchurAlgebra<FunctionField> {
    let blocks = lattices.iter().map(|l| l.block().try_map(|p| Ok::<_, ()>(RatFunc::from(p))).expect("infallible")).collect();
    SchurAlgebra::from_blocks(FF, datum.clone(), pi.clone(), blocks, true)
}

/// The realized image of `R ⊗ 𝒜S(π)` acting on `R ⊗ 𝒜U·m`.
pub type SpecializedSchur = SchurAlgebra<RingPoint>;

/// Evaluates the lattice blocks at `ξ`.
pub fn specialize_blocks(datum: &RootDatum, pi: &SaturatedSet, lattices: &[Arc<LatticeBasis>], p: &RingPoint) -> SpecializedSchur {
    let blocks = lattices
        .iter()
        .map(|l| l.block().try_map(|e| Ok::<_, ()>(p.eval_laurent(e))).expect("infallible"))
        .collect();
    SchurAlgebra::from_blocks(p.clone(), datum.clone(), pi.clone(), blocks, true)
}

/// Lattice bases and specialized algebras at one ring point, over a generic tower.
#[derive(Debug)]
pub struct SpecializedTower {
    generic: Arc<SchurTower>,
    point: RingPoint,
    lattices: Mutex<HashMap<Weight, Arc<LatticeBasis>>>,
    algebras: Mutex<HashMap<SaturatedSet, Arc<SpecializedSchur>>>,
}

impl SpecializedTower {
    pub fn new(generic: Arc<SchurTower>, point: RingPoint) -> Self {
        SpecializedTower { generic, point, lattices: Mutex::new(HashMap::new()), algebras: Mutex::new(HashMap::new()) }
    }

    pub fn datum(&self) -> &RootDatum {
        self.generic.datum()
    }

    pub fn point(&self) -> &RingPoint {
        &self.point
    }

    pub fn generic(&self) -> &Arc<SchurTower> {
        &self.generic
    }

    pub fn lattice(&self, lambda: &Weight) -> Result<Arc<LatticeBasis>, IntSpecError> {
        if let Some(l) = self.lattices.lock().unwrap().get(lambda) {
            return Ok(l.clone());
        }
        let l = Arc::new(lattice_basis(self.generic.datum(), &*self.generic.module(lambda)?)?);
        Ok(self.lattices.lock().unwrap().entry(lambda.clone()).or_insert(l).clone())
    }

    pub fn lattices(&self, pi: &SaturatedSet) -> Result<Vec<Arc<LatticeBasis>>, IntSpecError> {
        pi.elements().iter().map(|l| self.lattice(l)).collect()
    }

    /// `R S(π)`, realized.
    pub fn algebra(&self, pi: &SaturatedSet) -> Result<Arc<SpecializedSchur>, IntSpecError> {
        if let Some(s) = self.algebras.lock().unwrap().get(pi) {
            return Ok(s.clone());
        }
        let s = Arc::new(specialize_blocks(self.datum(), pi, &self.lattices(pi)?, &self.point));
        Ok(self.algebras.lock().unwrap().entry(pi.clone()).or_insert(s).clone())
    }

    /// The generic algebra on lattice bases, the source of specialization.
    pub fn lattice_algebra(&self, pi: &SaturatedSet) -> Result<SchurAlgebra<FunctionField>, IntSpecError> {
        Ok(lattice_algebra(self.datum(), pi, &self.lattices(pi)?))
    }
}

/// Specialization of `S(π)` at a ring point with its relation suite.
pub fn specialize_schur(
    datum: &RootDatum,
    pi: &SaturatedSet,
    p: &RingPoint,
) -> Result<(Arc<SpecializedSchur>, RelationReport), IntSpecError> {
    let t = SpecializedTower::new(Arc::new(SchurTower::new(datum.clone())), p.clone());
    let s = t.algebra(pi)?;
    let rep = s.verify_presentation();
    Ok((s, rep))
}

/// `1 ⊗ f_{π,π′}` with its homomorphism and surjectivity report.
pub fn r_truncation_map(
    tower: &SpecializedTower,
    pi: &SaturatedSet,
    pi_prime: &SaturatedSet,
    max_pairs: usize,
) -> Result<(TruncationMap, RelationReport), IntSpecError> {
    let map = truncation_map(pi, pi_prime)?;
    let src = tower.algebra(pi_prime)?;
    let dst = tower.algebra(pi)?;
    let rep = verify_truncation(&map, &src, &dst, max_pairs);
    Ok((map, rep))
}

/// Elements of `𝒜S(π′)` from generators and pairwise products, compared
/// along both routes `π′ → π`, `v ↦ ξ`.
pub fn specialization_commutes(tower: &SpecializedTower, pi: &SaturatedSet, pi_prime: &SaturatedSet) -> Result<RelationReport, IntSpecError> {
    let map = truncation_map(pi, pi_prime)?;
    let generic = tower.lattice_algebra(pi_prime)?;
    let special = tower.algebra(pi_prime)?;
    let p = tower.point();
    let d = tower.datum();
    let mut gens: Vec<(String, SchurElement<RatFunc>)> = Vec::new();
    for i in 0..d.rank() {
        for s in Sign::both() {
            for k in 1..=generic.max_power(s, i) {
                gens.push((format!("E{s}{i}^({k})"), generic.divided_power(s, i, k)));
            }
        }
    }
    for l in generic.orbit() {
        gens.push((format!("1{l}"), generic.idempotent(l)));
    }
    let mut elems = gens.clone();
    for (a, x) in &gens {
        for (b, y) in &gens {
            elems.push((format!("{a}*{b}"), x.mul(&FF, y)));
        }
    }
    let mut row = crate::schur::ReportRow::new("specialize ∘ project = project ∘ specialize");
    for (label, x) in elems {
        let a = map.apply(&x).try_map(|e| p.evaluate(e))?;
        let b = map.apply(&x.try_map(|e| p.evaluate(e))?);
        row.check(a == b, || label.clone());
    }
    // the specialized algebra is built from the same lattice matrices
    let mut row2 = crate::schur::ReportRow::new("specialized generators = evaluated lattice generators");
    for i in 0..d.rank() {
        for s in Sign::both() {
            for k in 0..=generic.max_power(s, i) {
                let ev = generic.divided_power(s, i, k).try_map(|e| p.evaluate(e))?;
                row2.check(ev == special.divided_power(s, i, k), || format!("E{s}{i}^({k})"));
            }
        }
    }
    Ok(RelationReport { rows: vec![row, row2] })
}

type REvaluator = dyn Fn(&SpecializedTower, &SaturatedSet) -> Result<SchurElement<RingElem>, IntSpecError> + Send + Sync;

/// An element of `RÛ = lim← R S(π)`, evaluated lazily with a memo.
#[derive(Clone)]
pub struct RLimitElement {
    label: String,
    eval: Arc<REvaluator>,
    memo: Arc<Mutex<HashMap<SaturatedSet, SchurElement<RingElem>>>>,
}

impl fmt::Debug for RLimitElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RLimitElement").field("label", &self.label).finish_non_exhaustive()
    }
}

impl RLimitElement {
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(&SpecializedTower, &SaturatedSet) -> Result<SchurElement<RingElem>, IntSpecError> + Send + Sync + 'static,
    ) -> Self {
        RLimitElement { label: label.into(), eval: Arc::new(f), memo: Arc::new(Mutex::new(HashMap::new())) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn evaluate(&self, tower: &SpecializedTower, pi: &SaturatedSet) -> Result<SchurElement<RingElem>, IntSpecError> {
        if let Some(x) = self.memo.lock().unwrap().get(pi) {
            return Ok(x.clone());
        }
        let x = (self.eval)(tower, pi)?;
        Ok(self.memo.lock().unwrap().entry(pi.clone()).or_insert(x).clone())
    }
}

/// `θ̇_R(u)`: a divided-power expression of `U̇` evaluated in each `R S(π)`.
pub fn r_theta_dot(u: &UdotExpr) -> RLimitElement {
    let u2 = u.clone();
    RLimitElement::from_fn(format!("θ̇({u})"), move |t, pi| Ok(t.algebra(pi)?.evaluate_udot(&u2)?))
}

/// Coherence of an `R`-limit element under `1 ⊗ f` along a chain.
pub fn verify_r_coherence(a: &RLimitElement, tower: &SpecializedTower, chain: &[SaturatedSet]) -> Result<CoherenceReport, IntSpecError> {
    let mut rep = CoherenceReport { chain: chain.iter().map(|p| p.key()).collect(), links: Vec::new() };
    for w in chain.windows(2) {
        let f = truncation_map(&w[0], &w[1])?;
        let lhs = f.apply(&a.evaluate(tower, &w[1])?);
        let rhs = a.evaluate(tower, &w[0])?;
        let witness = lhs.first_difference(&rhs).map(|(b, r, c)| format!("block {b} entry ({r},{c})"));
        rep.links.push(CoherenceLink { from: w[1].key(), to: w[0].key(), passed: witness.is_none(), witness });
    }
    Ok(rep)
}

/// Joint kernel dimensions of the images of a word family, as the
/// saturated sets of the schedule are added one at a time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelProbeReport {
    pub words: usize,
    pub schedule: Vec<String>,
    /// Over `R`.
    pub specialized: Vec<usize>,
    /// Over `ℚ(v)`, for the same words.
    pub generic: Vec<usize>,
}

impl KernelProbeReport {
    /// Kernel over `R` not explained by relations already visible over `ℚ(v)`.
    pub fn excess(&self) -> Option<usize> {
        Some(self.specialized.last()?.saturating_sub(*self.generic.last()?))
    }
}

/// All words of length at most `degree_bound` in `E_{±i}^{(k)}`
/// (`1 ≤ k ≤ degree_bound`) and `K_{h_i}`.
pub fn probe_words(datum: &RootDatum, degree_bound: usize) -> Vec<UExpr> {
    let mut letters = Vec::new();
    for i in 0..datum.rank() {
        for sign in Sign::both() {
            for k in 1..=degree_bound {
                letters.push(USymbol::E { sign, i, k });
            }
        }
    }
    for h in datum.simple_coroots() {
        letters.push(USymbol::K(h.clone()));
    }
    let mut words: Vec<Vec<USymbol>> = vec![Vec::new()];
    let mut frontier = words.clone();
    for _ in 0..degree_bound {
        let mut next = Vec::new();
        for w in &frontier {
            for l in &letters {
                let mut w2 = w.clone();
                w2.push(l.clone());
                next.push(w2);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    words.into_iter().map(|w| UExpr::word(RatFunc::one(), w)).collect()
}

fn flatten<E: Clone>(x: &SchurElement<E>) -> Vec<E> {
    x.blocks.iter().flat_map(|m| m.entries().iter().cloned()).collect()
}

/// Kernel dimension of `span(words) → ⊕ S(π)` after each scheduled `π`.
fn kernel_sequence<F: Field>(
    field: &F,
    words: &[UExpr],
    algebras: &[Arc<SchurAlgebra<F>>],
) -> Result<Vec<usize>, SchurError> {
    let mut rows: Vec<Vec<F::Elem>> = vec![Vec::new(); words.len()];
    let mut out = Vec::new();
    for s in algebras {
        for (w, row) in words.iter().zip(rows.iter_mut()) {
            row.extend(flatten(&s.evaluate_u_word(w)?));
        }
        let len = rows.first().map_or(0, |r| r.len());
        let mut e = Echelon::new(field.clone(), len);
        for r in &rows {
            e.insert(r.clone());
        }
        out.push(words.len() - e.rank());
    }
    Ok(out)
}

/// Empirical kernel of `R U → R Û` on short divided-power words. Evidence
/// only: a positive value need not be a kernel element of `R U`.
pub fn kernel_probe_ru(
    datum: &RootDatum,
    degree_bound: usize,
    height_bound: i64,
    p: &RingPoint,
) -> Result<KernelProbeReport, IntSpecError> {
    let words = probe_words(datum, degree_bound);
    let schedule = crate::ulimit::probe_schedule(datum, height_bound).map_err(|e| match e {
        crate::ulimit::LimitError::Schur(s) => IntSpecError::Schur(s),
        other => panic!("{other}"),
    })?;
    let tower = SpecializedTower::new(Arc::new(SchurTower::new(datum.clone())), p.clone());
    let special = schedule.iter().map(|pi| tower.algebra(pi)).collect::<Result<Vec<_>, _>>()?;
    let generic = schedule
        .iter()
        .map(|pi| tower.lattice_algebra(pi).map(Arc::new))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(KernelProbeReport {
        words: words.len(),
        schedule: schedule.iter().map(|p| p.key()).collect(),
        specialized: kernel_sequence(p, &words, &special)?,
        generic: kernel_sequence(&FF, &words, &generic)?,
    })
}

/// Weight multiplicities of a lattice, for cross-checks against the module.
pub fn lattice_multiplicities(l: &LatticeBasis) -> BTreeMap<Weight, usize> {
    let mut out = BTreeMap::new();
    for w in l.basis_weights() {
        *out.entry(w.clone()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::qint;

    fn w(c: &[i64]) -> Weight {
        Weight(c.to_vec())
    }

    fn sat(d: &RootDatum, gens: &[&[i64]]) -> SaturatedSet {
        d.saturate(&gens.iter().map(|g| w(g)).collect::<Vec<_>>()).unwrap()
    }

    fn lattice(d: &RootDatum, l: &[i64]) -> LatticeBasis {
        let t = SchurTower::new(d.clone());
        lattice_basis(d, &t.module(&w(l)).unwrap()).unwrap()
    }

    /// Rank of the algebra generated by every divided power and idempotent,
    /// grown word length by word length from the identity until stable.
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
        let len = s.full_dimension();
        let mut ech = Echelon::new(f.clone(), len);
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

    #[test]
    fn lattice_examples() {
        let a1 = RootDatum::preset("A1").unwrap();
        let l = lattice(&a1, &[2]);
        let labels: Vec<String> = l.labels().iter().map(|x| x.to_string()).collect();
        assert_eq!(labels, ["m", "F0m", "F0^(2)m"]);
        let e = l.divided_power(Sign::Plus, 0, 1);
        assert_eq!(e.get(0, 1), &qint(2, 1));
        assert_eq!(e.get(1, 2), &LaurentPoly::one());
        assert_eq!(l.divided_power(Sign::Minus, 0, 2).get(2, 0), &LaurentPoly::one());
        // relative to the word basis F F m = [2] F^(2) m
        assert!(!l.determinants_are_units());

        let l = lattice(&a1, &[1]);
        for sign in Sign::both() {
            let m = l.divided_power(sign, 0, 1);
            assert!(m.entries().iter().all(|x| x.is_zero() || x.is_one()));
        }
        assert!(l.determinants_are_units());

        let a2 = RootDatum::preset("A2").unwrap();
        let l = lattice(&a2, &[1, 0]);
        assert_eq!(l.dim(), 3);
        assert_eq!(lattice_multiplicities(&l).len(), 3);
    }

    #[test]
    fn specialization_examples() {
        let a1 = RootDatum::preset("A1").unwrap();
        let one = RingPoint::rational(1, 1).unwrap();
        let (s, rep) = specialize_schur(&a1, &sat(&a1, &[&[2]]), &one).unwrap();
        assert!(rep.passed());
        assert_eq!(s.realized_dimension(), 10);
        assert_eq!(s.realized_dimension(), brute_force_rank(&s));
        let h = a1.simple_coroot(0);
        assert_eq!(s.k_element(h), s.identity());

        let i4 = RingPoint::cyclotomic(4).unwrap();
        let pi = sat(&a1, &[&[0], &[1], &[2]]);
        let (s, rep) = specialize_schur(&a1, &pi, &i4).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures());
        assert!(i4.is_zero(&i4.eval_laurent(&qint(2, 1))));
        // the Δ(2) block: E (F m) = [2] m vanishes
        let k = pi.elements().iter().position(|l| l == &w(&[2])).unwrap();
        assert!(i4.is_zero(s.blocks()[k].power(Sign::Plus, 0, 1).unwrap().get(0, 1)));
        let got = s.realized_dimension();
        assert_eq!(got, brute_force_rank(&s));
        assert!(got <= 14);
        let (again, _) = specialize_schur(&a1, &pi, &i4).unwrap();
        assert_eq!(again.realized_dimension(), got);
    }

    #[test]
    fn generic_points_keep_dimensions() {
        let a2 = RootDatum::preset("A2").unwrap();
        for p in [RingPoint::rational(1, 1).unwrap(), RingPoint::rational(3, 2).unwrap(), RingPoint::cyclotomic(7).unwrap()] {
            let (s, rep) = specialize_schur(&a2, &sat(&a2, &[&[1, 0]]), &p).unwrap();
            assert!(rep.passed());
            assert_eq!(s.realized_dimension(), 9, "{:?}", p.kind());
        }
    }

    #[test]
    fn r_maps_and_limits() {
        let a1 = RootDatum::preset("A1").unwrap();
        let t = SpecializedTower::new(Arc::new(SchurTower::new(a1.clone())), RingPoint::rational(1, 1).unwrap());
        let (p0, p2, p4) = (sat(&a1, &[&[0]]), sat(&a1, &[&[2]]), sat(&a1, &[&[4]]));
        let (f, rep) = r_truncation_map(&t, &p0, &p2, 500).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures());
        let s2 = t.algebra(&p2).unwrap();
        assert!(f.apply(&s2.generator(Sign::Plus, 0)).is_zero(t.point()));
        assert_eq!(t.algebra(&p0).unwrap().realized_dimension(), 1);

        let chain = vec![p0.clone(), p2.clone(), p4.clone()];
        let one0 = r_theta_dot(&UdotExpr::idempotent(w(&[0])));
        assert!(verify_r_coherence(&one0, &t, &chain).unwrap().passed());
        let zero = r_theta_dot(&UdotExpr::zero());
        assert!(chain.iter().all(|pi| zero.evaluate(&t, pi).unwrap().is_zero(t.point())));

        for (a, b) in [(&p0, &p2), (&p2, &p4), (&p0, &p4)] {
            let rep = specialization_commutes(&t, a, b).unwrap();
            assert!(rep.passed(), "{:?}", rep.failures());
        }
    }

    #[test]
    fn kernel_probe() {
        let a1 = RootDatum::preset("A1").unwrap();
        let r = kernel_probe_ru(&a1, 0, 4, &RingPoint::rational(1, 1).unwrap()).unwrap();
        assert_eq!(r.words, 1);
        assert!(r.specialized.iter().all(|&k| k == 0));
        for p in [RingPoint::rational(1, 1).unwrap(), RingPoint::cyclotomic(4).unwrap()] {
            let r = kernel_probe_ru(&a1, 2, 4, &p).unwrap();
            assert_eq!(r.words, 31);
            assert!(r.specialized.windows(2).all(|x| x[0] >= x[1]));
            assert!(r.generic.windows(2).all(|x| x[0] >= x[1]));
        }
    }
}
