//! Generalized q-Schur algebras `S(π)`, realized as the image of `U` acting on
//! `⊕_{λ∈π} Δ(λ)`, with their presentations and truncation maps.
//!
//! An algebra is generic in its coefficient field so the same code serves
//! `ℚ(v)` and the specializations `v ↦ ξ`. Elements are block-diagonal, one
//! block per `λ ∈ π`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::linalg::{Echelon, Matrix};
use crate::qarith::{qint, Field, FunctionField, LaurentPoly, RatFunc};
use crate::rootdata::{Coweight, RootDatum, SaturatedSet, Weight};
use crate::ulimit::{DotSymbol, UExpr, USymbol, UdotExpr};
use crate::weylmod::{weyl_module, Sign, WeylError, WeylModule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchurError {
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error("span closure of S({pi}) has dimension {got}, expected {expected}")]
    Density { pi: String, expected: usize, got: usize },
    #[error("{sub} is not a subset of {sup}")]
    NotSubset { sub: String, sup: String },
    #[error("coefficient {0} has a pole at the specialization point")]
    Pole(String),
}

/// One `Δ(λ)` block: its weight labels and the divided powers of the
/// generators, `powers[i][0]` for `E_i` and `powers[i][1]` for `E_{-i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Block<E> {
    lambda: Weight,
    weights: Vec<Weight>,
    powers: Vec<[Vec<Matrix<E>>; 2]>,
    index: HashMap<Weight, Vec<usize>>,
}

impl<E: Clone> Block<E> {
    /// `powers[i][s][k]` must hold the `k`-th divided power for every `k`
    /// up to the last nonzero one, starting from the identity at `k = 0`.
    pub fn new(lambda: Weight, weights: Vec<Weight>, powers: Vec<[Vec<Matrix<E>>; 2]>) -> Self {
        let mut index: HashMap<Weight, Vec<usize>> = HashMap::new();
        for (k, w) in weights.iter().enumerate() {
            index.entry(w.clone()).or_default().push(k);
        }
        Block { lambda, weights, powers, index }
    }

    pub fn lambda(&self) -> &Weight {
        &self.lambda
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn indices(&self, nu: &Weight) -> &[usize] {
        self.index.get(nu).map_or(&[], |v| v.as_slice())
    }

    pub fn max_power(&self, sign: Sign, i: usize) -> usize {
        self.powers[i][slot(sign)].len() - 1
    }

    pub fn power(&self, sign: Sign, i: usize, k: usize) -> Option<&Matrix<E>> {
        self.powers[i][slot(sign)].get(k)
    }

    /// The same block with every entry mapped.
    pub fn try_map<T: Clone, Er>(&self, mut f: impl FnMut(&E) -> Result<T, Er>) -> Result<Block<T>, Er> {
        let powers = self
            .powers
            .iter()
            .map(|pair| -> Result<[Vec<Matrix<T>>; 2], Er> {
                let a = pair[0].iter().map(|m| m.try_map(&mut f)).collect::<Result<Vec<_>, Er>>()?;
                let b = pair[1].iter().map(|m| m.try_map(&mut f)).collect::<Result<Vec<_>, Er>>()?;
                Ok([a, b])
            })
            .collect::<Result<Vec<_>, Er>>()?;
        Ok(Block { lambda: self.lambda.clone(), weights: self.weights.clone(), powers, index: self.index.clone() })
    }
}

fn slot(sign: Sign) -> usize {
    match sign {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

impl Block<RatFunc> {
    pub fn from_module(m: &WeylModule) -> Self {
        let powers = (0..m.rank())
            .map(|i| {
                let get = |s: Sign| (0..=m.max_power(s, i)).map(|k| m.divided_power(s, i, k)).collect::<Vec<_>>();
                [get(Sign::Plus), get(Sign::Minus)]
            })
            .collect();
        Block::new(m.lambda().clone(), m.basis_weights(), powers)
    }
}

/// Block-diagonal element of `S(π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurElement<E> {
    pub blocks: Vec<Matrix<E>>,
}

impl<E: Clone> SchurElement<E> {
    pub fn add<F: Field<Elem = E>>(&self, f: &F, o: &Self) -> Self {
        SchurElement { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a.add(f, b)).collect() }
    }

    pub fn sub<F: Field<Elem = E>>(&self, f: &F, o: &Self) -> Self {
        SchurElement { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a.sub(f, b)).collect() }
    }

    pub fn mul<F: Field<Elem = E>>(&self, f: &F, o: &Self) -> Self {
        SchurElement { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a.mul(f, b)).collect() }
    }

    pub fn scale<F: Field<Elem = E>>(&self, f: &F, s: &E) -> Self {
        SchurElement { blocks: self.blocks.iter().map(|a| a.scale(f, s)).collect() }
    }

    pub fn is_zero<F: Field<Elem = E>>(&self, f: &F) -> bool {
        self.blocks.iter().all(|b| b.is_zero(f))
    }

    pub fn map<T: Clone>(&self, mut g: impl FnMut(&E) -> T) -> SchurElement<T> {
        SchurElement { blocks: self.blocks.iter().map(|b| b.map(&mut g)).collect() }
    }

    pub fn try_map<T: Clone, Er>(&self, mut g: impl FnMut(&E) -> Result<T, Er>) -> Result<SchurElement<T>, Er> {
        Ok(SchurElement { blocks: self.blocks.iter().map(|b| b.try_map(&mut g)).collect::<Result<_, _>>()? })
    }

    /// First differing entry, as `(block, row, column)`.
    pub fn first_difference(&self, o: &Self) -> Option<(usize, usize, usize)>
    where
        E: PartialEq,
    {
        for (k, (a, b)) in self.blocks.iter().zip(&o.blocks).enumerate() {
            for r in 0..a.rows() {
                for c in 0..a.cols() {
                    if a.get(r, c) != b.get(r, c) {
                        return Some((k, r, c));
                    }
                }
            }
        }
        None
    }
}

/// A weight component `1_μ S(π) 1_ν` with an echelon basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Component<E> {
    pub mu: Weight,
    pub nu: Weight,
    pub rows: Vec<Vec<E>>,
}

/// The algebra `S(π)` over a field.
#[derive(Debug)]
pub struct SchurAlgebra<F: Field> {
    field: F,
    datum: RootDatum,
    pi: SaturatedSet,
    orbit: Vec<Weight>,
    blocks: Vec<Block<F::Elem>>,
    /// Close spans under every divided power, not just `E_{±i}`.
    all_powers: bool,
    basis: OnceLock<Vec<Component<F::Elem>>>,
}

impl<F: Field> Clone for SchurAlgebra<F> {
    fn clone(&self) -> Self {
        SchurAlgebra {
            field: self.field.clone(),
            datum: self.datum.clone(),
            pi: self.pi.clone(),
            orbit: self.orbit.clone(),
            blocks: self.blocks.clone(),
            all_powers: self.all_powers,
            basis: self.basis.clone(),
        }
    }
}

/// `S(π)` over `ℚ(v)` from the Weyl modules of the elements of `π`, given in
/// the order of `π`.
pub fn build_schur(datum: &RootDatum, pi: &SaturatedSet, modules: &[Arc<WeylModule>]) -> SchurAlgebra<FunctionField> {
    assert_eq!(modules.len(), pi.len(), "one module per element of π");
    let blocks = modules.iter().map(|m| Block::from_module(m)).collect();
    SchurAlgebra::from_blocks(FunctionField, datum.clone(), pi.clone(), blocks, false)
}

impl<F: Field> SchurAlgebra<F> {
    pub fn from_blocks(field: F, datum: RootDatum, pi: SaturatedSet, blocks: Vec<Block<F::Elem>>, all_powers: bool) -> Self {
        let orbit = datum.orbit_union(&pi);
        SchurAlgebra { field, datum, pi, orbit, blocks, all_powers, basis: OnceLock::new() }
    }

    /// Seeds the span-closure basis with components computed elsewhere.
    pub fn with_basis(self, comps: Vec<Component<F::Elem>>) -> Self {
        let _ = self.basis.set(comps);
        self
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn closes_all_powers(&self) -> bool {
        self.all_powers
    }

    pub fn datum(&self) -> &RootDatum {
        &self.datum
    }

    pub fn pi(&self) -> &SaturatedSet {
        &self.pi
    }

    /// `Wπ`, sorted.
    pub fn orbit(&self) -> &[Weight] {
        &self.orbit
    }

    pub fn in_orbit(&self, w: &Weight) -> bool {
        self.orbit.binary_search(w).is_ok()
    }

    pub fn blocks(&self) -> &[Block<F::Elem>] {
        &self.blocks
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim()).collect()
    }

    /// `Σ_{λ∈π} (dim Δ(λ))²`.
    pub fn full_dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.dim() * b.dim()).sum()
    }

    pub fn zero(&self) -> SchurElement<F::Elem> {
        SchurElement { blocks: self.blocks.iter().map(|b| Matrix::zeros(&self.field, b.dim(), b.dim())).collect() }
    }

    pub fn identity(&self) -> SchurElement<F::Elem> {
        SchurElement { blocks: self.blocks.iter().map(|b| Matrix::identity(&self.field, b.dim())).collect() }
    }

    fn diagonal(&self, mut f: impl FnMut(&Weight) -> F::Elem) -> SchurElement<F::Elem> {
        let fld = &self.field;
        SchurElement {
            blocks: self
                .blocks
                .iter()
                .map(|b| {
                    let d: Vec<F::Elem> = b.weights.iter().map(&mut f).collect();
                    Matrix::from_fn(b.dim(), b.dim(), |r, c| if r == c { d[r].clone() } else { fld.zero() })
                })
                .collect(),
        }
    }

    /// `1_λ`: the projector onto the `λ` weight spaces; zero for `λ ∉ Wπ`.
    pub fn idempotent(&self, lambda: &Weight) -> SchurElement<F::Elem> {
        self.diagonal(|w| if w == lambda { self.field.one() } else { self.field.zero() })
    }

    /// `K_h = Σ_{λ∈Wπ} v^{⟨h,λ⟩} 1_λ`.
    pub fn k_element(&self, h: &Coweight) -> SchurElement<F::Elem> {
        let terms: Vec<(Weight, F::Elem)> = self
            .orbit
            .iter()
            .map(|l| (l.clone(), self.field.from_laurent(&LaurentPoly::v_pow(self.datum.pair(h, l)))))
            .collect();
        let mut acc = self.zero();
        for (l, c) in terms {
            acc = acc.add(&self.field, &self.idempotent(&l).scale(&self.field, &c));
        }
        acc
    }

    /// `E_{±i}^{(k)}`.
    pub fn divided_power(&self, sign: Sign, i: usize, k: usize) -> SchurElement<F::Elem> {
        SchurElement {
            blocks: self
                .blocks
                .iter()
                .map(|b| b.power(sign, i, k).cloned().unwrap_or_else(|| Matrix::zeros(&self.field, b.dim(), b.dim())))
                .collect(),
        }
    }

    pub fn generator(&self, sign: Sign, i: usize) -> SchurElement<F::Elem> {
        self.divided_power(sign, i, 1)
    }

    /// Largest `k` with `E_{±i}^{(k)} ≠ 0` in some block.
    pub fn max_power(&self, sign: Sign, i: usize) -> usize {
        self.blocks.iter().map(|b| b.max_power(sign, i)).max().unwrap_or(0)
    }

    fn scalar(&self, c: &RatFunc) -> Result<F::Elem, SchurError> {
        self.field.from_ratfunc(c).ok_or_else(|| SchurError::Pole(c.to_string()))
    }

    /// Image of a word in `U` under `p_π`.
    pub fn evaluate_u_word(&self, expr: &UExpr) -> Result<SchurElement<F::Elem>, SchurError> {
        let mut acc = self.zero();
        for (c, word) in expr.terms() {
            let mut x = self.identity();
            for sym in word {
                let g = match sym {
                    USymbol::E { sign, i, k } => self.divided_power(*sign, *i, *k),
                    USymbol::K(h) => self.k_element(h),
                };
                x = x.mul(&self.field, &g);
            }
            acc = acc.add(&self.field, &x.scale(&self.field, &self.scalar(c)?));
        }
        Ok(acc)
    }

    /// Image of an element of `U̇` under `ṗ_π`.
    pub fn evaluate_udot(&self, expr: &UdotExpr) -> Result<SchurElement<F::Elem>, SchurError> {
        let mut acc = self.zero();
        for (c, word) in expr.terms() {
            let mut x = self.identity();
            for sym in word {
                let g = match sym {
                    DotSymbol::E { sign, i, k } => self.divided_power(*sign, *i, *k),
                    DotSymbol::One(l) => self.idempotent(l),
                };
                x = x.mul(&self.field, &g);
                if x.is_zero(&self.field) {
                    break;
                }
            }
            acc = acc.add(&self.field, &x.scale(&self.field, &self.scalar(c)?));
        }
        Ok(acc)
    }

    /// `(generator, k, sign, i)` used by the span closure.
    fn closure_generators(&self) -> Vec<(Sign, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.datum.rank() {
            for s in Sign::both() {
                let top = if self.all_powers { self.max_power(s, i) } else { self.max_power(s, i).min(1) };
                for k in 1..=top {
                    out.push((s, i, k));
                }
            }
        }
        out
    }

    fn component_len(&self, mu: &Weight, nu: &Weight) -> usize {
        self.blocks.iter().map(|b| b.indices(mu).len() * b.indices(nu).len()).sum()
    }

    /// `g · x` for `x` in component `(μ, ν)`, landing in `(μ', ν)`; a
    /// missing block matrix acts as zero.
    fn left_apply(&self, g: &[Option<&Matrix<F::Elem>>], mu: &Weight, mu2: &Weight, nu: &Weight, x: &[F::Elem]) -> Vec<F::Elem> {
        let f = &self.field;
        let mut out = Vec::with_capacity(self.component_len(mu2, nu));
        let mut off = 0;
        for (b, gm) in self.blocks.iter().zip(g) {
            let (rs, ms, cs) = (b.indices(mu2), b.indices(mu), b.indices(nu));
            for &r in rs {
                for c in 0..cs.len() {
                    let mut acc = f.zero();
                    if let Some(gm) = gm {
                        for (k, &m) in ms.iter().enumerate() {
                            let a = gm.get(r, m);
                            let y = &x[off + k * cs.len() + c];
                            if !f.is_zero(a) && !f.is_zero(y) {
                                acc = f.add(&acc, &f.mul(a, y));
                            }
                        }
                    }
                    out.push(acc);
                }
            }
            off += ms.len() * cs.len();
        }
        out
    }

    /// Span closure: for each `ν ∈ Wπ`, the left ideal generated by `1_ν`,
    /// split into components `1_μ S 1_ν`.
    fn compute_basis(&self) -> Vec<Component<F::Elem>> {
        let gens = self.closure_generators();
        let alpha = |s: Sign, i: usize, k: usize| self.datum.simple_root(i).scaled(s.factor() * k as i64);
        let mut comps = Vec::new();
        for nu in &self.orbit {
            let mut ech: BTreeMap<Weight, Echelon<F>> = BTreeMap::new();
            let mut queue: VecDeque<(Weight, Vec<F::Elem>)> = VecDeque::new();
            let seed: Vec<F::Elem> = self
                .blocks
                .iter()
                .flat_map(|b| {
                    let n = b.indices(nu).len();
                    (0..n * n).map(move |k| if k / n == k % n { self.field.one() } else { self.field.zero() })
                })
                .collect();
            if seed.is_empty() {
                continue;
            }
            let mut e0 = Echelon::new(self.field.clone(), seed.len());
            e0.insert(seed.clone());
            ech.insert(nu.clone(), e0);
            queue.push_back((nu.clone(), seed));
            while let Some((mu, x)) = queue.pop_front() {
                for &(s, i, k) in &gens {
                    let mu2 = mu.add(&alpha(s, i, k));
                    let len = self.component_len(&mu2, nu);
                    if len == 0 {
                        continue;
                    }
                    let mats: Vec<Option<&Matrix<F::Elem>>> = self.blocks.iter().map(|b| b.power(s, i, k)).collect();
                    let y = self.left_apply(&mats, &mu, &mu2, nu, &x);
                    let e = ech.entry(mu2.clone()).or_insert_with(|| Echelon::new(self.field.clone(), len));
                    if e.insert(y.clone()) {
                        queue.push_back((mu2, y));
                    }
                }
            }
            for (mu, e) in ech {
                comps.push(Component { mu, nu: nu.clone(), rows: e.rows().to_vec() });
            }
        }
        comps
    }

    /// Components of the span-closure basis, computed once.
    pub fn basis_components(&self) -> &[Component<F::Elem>] {
        self.basis.get_or_init(|| self.compute_basis())
    }

    /// Dimension of the realized algebra.
    pub fn realized_dimension(&self) -> usize {
        self.basis_components().iter().map(|c| c.rows.len()).sum()
    }

    /// Realized dimension, which must equal `Σ dim Δ(λ)²`.
    pub fn algebra_dimension(&self) -> Result<usize, SchurError> {
        let got = self.realized_dimension();
        let expected = self.full_dimension();
        if got != expected {
            return Err(SchurError::Density { pi: self.pi.key(), expected, got });
        }
        Ok(got)
    }

    /// Embeds a component vector as an element.
    pub fn component_element(&self, mu: &Weight, nu: &Weight, x: &[F::Elem]) -> SchurElement<F::Elem> {
        let mut out = self.zero();
        let mut off = 0;
        for (b, m) in self.blocks.iter().zip(out.blocks.iter_mut()) {
            let (rs, cs) = (b.indices(mu), b.indices(nu));
            for &r in rs {
                for &c in cs {
                    m.set(r, c, x[off].clone());
                    off += 1;
                }
            }
        }
        out
    }

    /// Component vector of the `(μ, ν)` part of an element.
    pub fn component_vector(&self, x: &SchurElement<F::Elem>, mu: &Weight, nu: &Weight) -> Vec<F::Elem> {
        let mut out = Vec::new();
        for (b, m) in self.blocks.iter().zip(&x.blocks) {
            for &r in b.indices(mu) {
                for &c in b.indices(nu) {
                    out.push(m.get(r, c).clone());
                }
            }
        }
        out
    }

    /// The span-closure basis as elements.
    pub fn basis_elements(&self) -> Vec<SchurElement<F::Elem>> {
        self.basis_components()
            .iter()
            .flat_map(|c| c.rows.iter().map(move |x| self.component_element(&c.mu, &c.nu, x)))
            .collect()
    }

    /// Rank of a family of elements, component by component.
    pub fn span_rank(&self, xs: &[SchurElement<F::Elem>]) -> usize {
        let mut total = 0;
        for mu in &self.orbit {
            for nu in &self.orbit {
                let len = self.component_len(mu, nu);
                if len == 0 {
                    continue;
                }
                let mut e = Echelon::new(self.field.clone(), len);
                for x in xs {
                    e.insert(self.component_vector(x, mu, nu));
                }
                total += e.rank();
            }
        }
        total
    }

    /// Whether the span-closure basis is also stable under right
    /// multiplication by the generators.
    pub fn right_stable(&self) -> bool {
        let comps = self.basis_components();
        let lookup: HashMap<(Weight, Weight), usize> =
            comps.iter().enumerate().map(|(k, c)| ((c.mu.clone(), c.nu.clone()), k)).collect();
        for c in comps {
            for x in &c.rows {
                let el = self.component_element(&c.mu, &c.nu, x);
                for (s, i, k) in self.closure_generators() {
                    let y = el.mul(&self.field, &self.divided_power(s, i, k));
                    let nu2 = c.nu.sub(&self.datum.simple_root(i).scaled(s.factor() * k as i64));
                    let v = self.component_vector(&y, &c.mu, &nu2);
                    if v.iter().all(|e| self.field.is_zero(e)) {
                        continue;
                    }
                    let Some(&at) = lookup.get(&(c.mu.clone(), nu2.clone())) else { return false };
                    let mut e = Echelon::new(self.field.clone(), v.len());
                    for row in &comps[at].rows {
                        e.insert(row.clone());
                    }
                    if !e.contains(&v) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `[n]_i` in the coefficient field.
    fn qint_i(&self, i: usize, n: i64) -> F::Elem {
        self.field.from_laurent(&qint(n, self.datum.d(i)))
    }

    /// Checks the defining relations, Serre relations included, as exact
    /// identities, with `1_λ = 0` for `λ ∉ Wπ`.
    pub fn verify_presentation(&self) -> RelationReport {
        let f = &self.field;
        let mut rep = RelationReport::default();
        let r = self.datum.rank();
        let ones: Vec<SchurElement<F::Elem>> = self.orbit.iter().map(|l| self.idempotent(l)).collect();

        let mut row = ReportRow::new("1_λ 1_μ = δ 1_λ");
        for (a, la) in self.orbit.iter().enumerate() {
            for (b, lb) in self.orbit.iter().enumerate() {
                // diagonal projectors: compare supports only when both are nonzero
                let lhs = ones[a].mul(f, &ones[b]);
                let rhs = if a == b { ones[a].clone() } else { self.zero() };
                row.check(lhs == rhs, || format!("λ={la} μ={lb}"));
            }
        }
        rep.rows.push(row);

        let mut row = ReportRow::new("Σ 1_λ = 1");
        let sum = ones.iter().fold(self.zero(), |acc, x| acc.add(f, x));
        row.check(sum == self.identity(), || "sum of idempotents".into());
        rep.rows.push(row);

        for (name, left) in [("E 1_λ = 1_{λ±α} E", false), ("1_λ E = E 1_{λ∓α}", true)] {
            let mut row = ReportRow::new(name);
            for i in 0..r {
                for s in Sign::both() {
                    let e = self.generator(s, i);
                    let a = self.datum.simple_root(i).scaled(s.factor());
                    for l in &self.orbit {
                        let (lhs, rhs) = if !left {
                            let shifted = l.add(&a);
                            (e.mul(f, &self.idempotent(l)), self.idempotent(&shifted).mul(f, &e))
                        } else {
                            let shifted = l.sub(&a);
                            (self.idempotent(l).mul(f, &e), e.mul(f, &self.idempotent(&shifted)))
                        };
                        row.check(lhs == rhs, || format!("i={i} sign={s} λ={l}"));
                    }
                }
            }
            rep.rows.push(row);
        }

        let mut row = ReportRow::new("E_i E_-j − E_-j E_i = δ_ij Σ [⟨h_i,λ⟩]_i 1_λ");
        for i in 0..r {
            for j in 0..r {
                let ei = self.generator(Sign::Plus, i);
                let fj = self.generator(Sign::Minus, j);
                let lhs = ei.mul(f, &fj).sub(f, &fj.mul(f, &ei));
                let rhs = if i == j {
                    let mut acc = self.zero();
                    for (l, one) in self.orbit.iter().zip(&ones) {
                        let c = self.qint_i(i, self.datum.pair_simple(i, l));
                        if !f.is_zero(&c) {
                            acc = acc.add(f, &one.scale(f, &c));
                        }
                    }
                    acc
                } else {
                    self.zero()
                };
                row.check(lhs == rhs, || format!("i={i} j={j}"));
            }
        }
        rep.rows.push(row);

        let mut row = ReportRow::new("Σ (−1)^s' E^(s) E_j E^(s') = 0");
        for i in 0..r {
            for j in 0..r {
                if i == j {
                    continue;
                }
                let top = (1 - self.datum.cartan_entry(i, j)) as usize;
                for s in Sign::both() {
                    let ej = self.generator(s, j);
                    let mut acc = self.zero();
                    for a in 0..=top {
                        let term = self.divided_power(s, i, a).mul(f, &ej).mul(f, &self.divided_power(s, i, top - a));
                        acc = if (top - a) % 2 == 0 { acc.add(f, &term) } else { acc.sub(f, &term) };
                    }
                    row.check(acc.is_zero(f), || format!("i={i} j={j} sign={s}"));
                }
            }
        }
        rep.rows.push(row);
        rep
    }
}

/// One family of exact identities and its failures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportRow {
    pub name: String,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl ReportRow {
    pub fn new(name: impl Into<String>) -> Self {
        ReportRow { name: name.into(), checked: 0, failures: Vec::new() }
    }

    pub fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(witness());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelationReport {
    pub rows: Vec<ReportRow>,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed())
    }

    pub fn failures(&self) -> Vec<String> {
        self.rows.iter().flat_map(|r| r.failures.iter().map(move |f| format!("{}: {f}", r.name))).collect()
    }

    pub fn extend(&mut self, other: RelationReport) {
        self.rows.extend(other.rows);
    }
}

/// `f_{π,π′} : S(π′) → S(π)`, restriction to the blocks of `π`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationMap {
    source: SaturatedSet,
    target: SaturatedSet,
    /// For each block of the target, its index among the source blocks.
    picks: Vec<usize>,
}

pub fn truncation_map(pi: &SaturatedSet, pi_prime: &SaturatedSet) -> Result<TruncationMap, SchurError> {
    let picks = pi
        .elements()
        .iter()
        .map(|l| pi_prime.elements().iter().position(|m| m == l))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| SchurError::NotSubset { sub: pi.key(), sup: pi_prime.key() })?;
    Ok(TruncationMap { source: pi_prime.clone(), target: pi.clone(), picks })
}

impl TruncationMap {
    pub fn source(&self) -> &SaturatedSet {
        &self.source
    }

    pub fn target(&self) -> &SaturatedSet {
        &self.target
    }

    pub fn apply<E: Clone>(&self, x: &SchurElement<E>) -> SchurElement<E> {
        SchurElement { blocks: self.picks.iter().map(|&k| x.blocks[k].clone()).collect() }
    }

    pub fn compose(&self, inner: &TruncationMap) -> TruncationMap {
        assert_eq!(self.source, inner.target, "maps do not compose");
        TruncationMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            picks: self.picks.iter().map(|&k| inner.picks[k]).collect(),
        }
    }
}

/// Checks that `f : S(π′) → S(π)` sends generators to generators and `1_λ`
/// to `1_λ` (or 0), is multiplicative on pairs of basis elements of `S(π′)`
/// (at most `max_pairs` composable pairs), and is surjective.
pub fn verify_truncation<F: Field>(
    map: &TruncationMap,
    src: &SchurAlgebra<F>,
    dst: &SchurAlgebra<F>,
    max_pairs: usize,
) -> RelationReport {
    let f = src.field();
    let mut rep = RelationReport::default();
    let r = src.datum().rank();

    let mut row = ReportRow::new("generators ↦ generators");
    for i in 0..r {
        for s in Sign::both() {
            let top = src.max_power(s, i).max(dst.max_power(s, i));
            for k in 0..=top {
                let img = map.apply(&src.divided_power(s, i, k));
                row.check(img == dst.divided_power(s, i, k), || format!("E^({k}) i={i} sign={s}"));
            }
        }
    }
    rep.rows.push(row);

    let mut row = ReportRow::new("1_λ ↦ 1_λ or 0");
    for l in src.orbit() {
        let img = map.apply(&src.idempotent(l));
        let want = if dst.in_orbit(l) { dst.idempotent(l) } else { dst.zero() };
        row.check(img == want, || format!("λ={l}"));
    }
    rep.rows.push(row);

    let mut row = ReportRow::new("multiplicative on basis");
    let comps = src.basis_components();
    let mut pairs = 0;
    'outer: for a in comps {
        for b in comps.iter().filter(|b| b.mu == a.nu) {
            for x in &a.rows {
                let xe = src.component_element(&a.mu, &a.nu, x);
                for y in &b.rows {
                    if pairs >= max_pairs {
                        break 'outer;
                    }
                    pairs += 1;
                    let ye = src.component_element(&b.mu, &b.nu, y);
                    let lhs = map.apply(&xe.mul(f, &ye));
                    let rhs = map.apply(&xe).mul(f, &map.apply(&ye));
                    row.check(lhs == rhs, || format!("components ({},{})·({},{})", a.mu, a.nu, b.mu, b.nu));
                }
            }
        }
    }
    rep.rows.push(row);

    let mut row = ReportRow::new("surjective");
    let images: Vec<SchurElement<F::Elem>> = src.basis_elements().iter().map(|x| map.apply(x)).collect();
    let rank = dst.span_rank(&images);
    let want = dst.realized_dimension();
    row.check(rank == want, || format!("image rank {rank}, dim S(π) = {want}"));
    rep.rows.push(row);
    rep
}

/// `f_{π,π} = id` and `f_{π,π′} ∘ f_{π′,π″} = f_{π,π″}` on the basis of `S(π″)`.
pub fn verify_chain_laws<F: Field>(chain: &[&SchurAlgebra<F>]) -> RelationReport {
    let mut rep = RelationReport::default();
    let mut row = ReportRow::new("f_{π,π} = id");
    for s in chain {
        let id = truncation_map(s.pi(), s.pi()).expect("π ⊆ π");
        let ok = s.basis_elements().iter().all(|x| &id.apply(x) == x);
        row.check(ok, || s.pi().key());
    }
    rep.rows.push(row);
    let mut row = ReportRow::new("f ∘ f = f");
    for w in chain.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        let (Ok(f_ab), Ok(f_bc), Ok(f_ac)) =
            (truncation_map(a.pi(), b.pi()), truncation_map(b.pi(), c.pi()), truncation_map(a.pi(), c.pi()))
        else {
            row.check(false, || format!("{} ⊆ {} ⊆ {} is not a chain", a.pi(), b.pi(), c.pi()));
            continue;
        };
        let comp = f_ab.compose(&f_bc);
        let ok = c.basis_elements().iter().all(|x| comp.apply(x) == f_ac.apply(x) && f_ab.apply(&f_bc.apply(x)) == f_ac.apply(x));
        row.check(ok, || format!("{} ⊆ {} ⊆ {}", a.pi(), b.pi(), c.pi()));
    }
    rep.rows.push(row);
    rep
}

/// Caches of Weyl modules and Schur algebras over `ℚ(v)` for one datum.
#[derive(Debug)]
pub struct SchurTower {
    datum: RootDatum,
    modules: Mutex<HashMap<Weight, Arc<WeylModule>>>,
    algebras: Mutex<HashMap<SaturatedSet, Arc<SchurAlgebra<FunctionField>>>>,
}

impl SchurTower {
    pub fn new(datum: RootDatum) -> Self {
        SchurTower { datum, modules: Mutex::new(HashMap::new()), algebras: Mutex::new(HashMap::new()) }
    }

    pub fn datum(&self) -> &RootDatum {
        &self.datum
    }

    pub fn module(&self, lambda: &Weight) -> Result<Arc<WeylModule>, SchurError> {
        if let Some(m) = self.modules.lock().unwrap().get(lambda) {
            return Ok(m.clone());
        }
        let m = Arc::new(weyl_module(&self.datum, lambda)?);
        Ok(self.modules.lock().unwrap().entry(lambda.clone()).or_insert(m).clone())
    }

    pub fn algebra(&self, pi: &SaturatedSet) -> Result<Arc<SchurAlgebra<FunctionField>>, SchurError> {
        if let Some(s) = self.algebras.lock().unwrap().get(pi) {
            return Ok(s.clone());
        }
        let modules = pi.elements().iter().map(|l| self.module(l)).collect::<Result<Vec<_>, _>>()?;
        let s = Arc::new(build_schur(&self.datum, pi, &modules));
        Ok(self.algebras.lock().unwrap().entry(pi.clone()).or_insert(s).clone())
    }

    /// Builds `S(π)` without touching the algebra cache.
    pub fn algebra_uncached(&self, pi: &SaturatedSet) -> Result<SchurAlgebra<FunctionField>, SchurError> {
        let modules = pi.elements().iter().map(|l| self.module(l)).collect::<Result<Vec<_>, _>>()?;
        Ok(build_schur(&self.datum, pi, &modules))
    }

    /// Drops a cached algebra; limit elements evaluated at `π` keep their memo.
    pub fn forget(&self, pi: &SaturatedSet) {
        self.algebras.lock().unwrap().remove(pi);
    }

    /// Inserts an algebra obtained elsewhere, e.g. from a disk cache.
    pub fn insert_algebra(&self, s: SchurAlgebra<FunctionField>) -> Arc<SchurAlgebra<FunctionField>> {
        let s = Arc::new(s);
        self.algebras.lock().unwrap().entry(s.pi().clone()).or_insert(s).clone()
    }

    pub fn has_algebra(&self, pi: &SaturatedSet) -> bool {
        self.algebras.lock().unwrap().contains_key(pi)
    }

    pub fn cached_algebras(&self) -> usize {
        self.algebras.lock().unwrap().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ulimit::UExpr;

    const FF: FunctionField = FunctionField;

    fn w(c: &[i64]) -> Weight {
        Weight(c.to_vec())
    }

    fn sat(d: &RootDatum, gens: &[&[i64]]) -> SaturatedSet {
        d.saturate(&gens.iter().map(|g| w(g)).collect::<Vec<_>>()).unwrap()
    }

    fn diag(xs: &[RatFunc]) -> Matrix<RatFunc> {
        Matrix::from_fn(xs.len(), xs.len(), |r, c| if r == c { xs[r].clone() } else { RatFunc::zero() })
    }

    #[test]
    fn dimensions() {
        let a1 = SchurTower::new(RootDatum::preset("A1").unwrap());
        let d = a1.datum().clone();
        for (gens, dim) in [(&[&[0i64][..]][..], 1), (&[&[1]], 4), (&[&[2]], 10), (&[&[0], &[1], &[2]], 14)] {
            let s = a1.algebra(&sat(&d, gens)).unwrap();
            assert_eq!(s.algebra_dimension().unwrap(), dim);
        }
        let a2 = SchurTower::new(RootDatum::preset("A2").unwrap());
        let d = a2.datum().clone();
        let s = a2.algebra(&sat(&d, &[&[1, 0]])).unwrap();
        assert_eq!((s.algebra_dimension().unwrap(), s.orbit().len()), (9, 3));
        let s = a2.algebra(&sat(&d, &[&[1, 1]])).unwrap();
        assert_eq!(s.algebra_dimension().unwrap(), 65);
    }

    #[test]
    fn presentation_examples() {
        let t = SchurTower::new(RootDatum::preset("A1").unwrap());
        let d = t.datum().clone();
        let s = t.algebra(&sat(&d, &[&[1]])).unwrap();
        assert!(s.verify_presentation().passed());
        let (e, f) = (s.generator(Sign::Plus, 0), s.generator(Sign::Minus, 0));
        let c = e.mul(&FF, &f).sub(&FF, &f.mul(&FF, &e));
        assert_eq!(c.blocks, vec![diag(&[RatFunc::one(), RatFunc::from(-1)])]);

        let s = t.algebra(&sat(&d, &[&[2]])).unwrap();
        assert!(s.verify_presentation().passed());
        assert!(e_times(&s, &w(&[2])).is_zero(&FF));
        assert!(s.idempotent(&w(&[4])).is_zero(&FF));

        let a2 = SchurTower::new(RootDatum::preset("A2").unwrap());
        let d = a2.datum().clone();
        let s = a2.algebra(&sat(&d, &[&[1, 0]])).unwrap();
        assert!(s.verify_presentation().passed());
        let (e1, e2) = (s.generator(Sign::Plus, 0), s.generator(Sign::Plus, 1));
        let e11 = s.divided_power(Sign::Plus, 0, 2);
        let serre = e11.mul(&FF, &e2).sub(&FF, &e1.mul(&FF, &e2).mul(&FF, &e1)).add(&FF, &e2.mul(&FF, &e11));
        assert!(serre.is_zero(&FF));
    }

    fn e_times(s: &SchurAlgebra<FunctionField>, l: &Weight) -> SchurElement<RatFunc> {
        s.generator(Sign::Plus, 0).mul(&FF, &s.idempotent(l))
    }

    #[test]
    fn corrupted_block_fails_presentation() {
        let t = SchurTower::new(RootDatum::preset("A1").unwrap());
        let d = t.datum().clone();
        let pi = sat(&d, &[&[2]]);
        let good = t.algebra(&pi).unwrap();
        let mut blocks = good.blocks().to_vec();
        let mut powers = blocks[1].powers.clone();
        powers[0][0][1].set(0, 1, RatFunc::from(7));
        blocks[1] = Block::new(blocks[1].lambda().clone(), blocks[1].weights().to_vec(), powers);
        let bad = SchurAlgebra::from_blocks(FF, d, pi, blocks, false);
        let rep = bad.verify_presentation();
        assert!(!rep.passed());
        assert!(rep.failures().iter().any(|f| f.starts_with("E_i E_-j")));
    }

    #[test]
    fn k_elements() {
        let t = SchurTower::new(RootDatum::preset("A1").unwrap());
        let d = t.datum().clone();
        let h = d.simple_coroot(0).clone();
        let v = RatFunc::v_pow;
        let s = t.algebra(&sat(&d, &[&[1]])).unwrap();
        assert_eq!(s.k_element(&h).blocks, vec![diag(&[v(1), v(-1)])]);
        let s = t.algebra(&sat(&d, &[&[2]])).unwrap();
        assert_eq!(s.k_element(&h).blocks, vec![diag(&[v(0)]), diag(&[v(2), v(0), v(-2)])]);
        assert_eq!(s.k_element(&Coweight::zero(1)), s.identity());
        for (b, m) in s.blocks().iter().zip(&s.k_element(&h).blocks) {
            assert_eq!(&t.module(b.lambda()).unwrap().k_matrix(&d, &h), m);
        }
        let hh = h.scaled(3);
        assert_eq!(s.k_element(&h).mul(&FF, &s.k_element(&hh)), s.k_element(&h.scaled(4)));
        assert_eq!(s.k_element(&h).mul(&FF, &s.k_element(&h.scaled(-1))), s.identity());
        for sign in Sign::both() {
            let e = s.generator(sign, 0);
            let lhs = s.k_element(&h).mul(&FF, &e).mul(&FF, &s.k_element(&h.scaled(-1)));
            assert_eq!(lhs, e.scale(&FF, &v(2 * sign.factor())));
        }
    }

    #[test]
    fn u_word_examples() {
        let t = SchurTower::new(RootDatum::preset("A1").unwrap());
        let d = t.datum().clone();
        let h = d.simple_coroot(0).clone();
        let kk = UExpr::k(h.clone()).mul(&UExpr::k(h.scaled(-1)));
        let den = (&RatFunc::v_pow(1) - &RatFunc::v_pow(-1)).inv().unwrap();
        let rel = UExpr::e(Sign::Plus, 0)
            .mul(&UExpr::e(Sign::Minus, 0))
            .sub(&UExpr::e(Sign::Minus, 0).mul(&UExpr::e(Sign::Plus, 0)))
            .sub(&UExpr::k(h.clone()).sub(&UExpr::k(h.scaled(-1))).scale(&den));
        for gens in [&[&[0i64][..]][..], &[&[1]], &[&[2]], &[&[3]]] {
            let s = t.algebra(&sat(&d, gens)).unwrap();
            assert_eq!(s.evaluate_u_word(&kk).unwrap(), s.identity());
            assert!(s.evaluate_u_word(&rel).unwrap().is_zero(&FF));
        }
        let s = t.algebra(&sat(&d, &[&[0]])).unwrap();
        assert!(s.evaluate_u_word(&UExpr::e(Sign::Plus, 0)).unwrap().is_zero(&FF));
    }

    #[test]
    fn nilpotency_matches_power_iteration() {
        let t = SchurTower::new(RootDatum::preset("A2").unwrap());
        let d = t.datum().clone();
        let s = t.algebra(&sat(&d, &[&[2, 1]])).unwrap();
        for i in 0..2 {
            for sign in Sign::both() {
                let e = s.generator(sign, i);
                let mut p = s.identity();
                let mut n = 0;
                while !p.is_zero(&FF) {
                    p = p.mul(&FF, &e);
                    n += 1;
                }
                // the longest α_i-string through Wπ has max_power + 1 weights
                assert_eq!(n, s.max_power(sign, i) + 1);
                assert!(s.divided_power(sign, i, n).is_zero(&FF));
            }
        }
    }

    #[test]
    fn truncation_examples() {
        let t = SchurTower::new(RootDatum::preset("A1").unwrap());
        let d = t.datum().clone();
        let (p0, p2, p4) = (sat(&d, &[&[0]]), sat(&d, &[&[2]]), sat(&d, &[&[4]]));
        let (s0, s2, s4) = (t.algebra(&p0).unwrap(), t.algebra(&p2).unwrap(), t.algebra(&p4).unwrap());
        let f = truncation_map(&p0, &p2).unwrap();
        assert!(f.apply(&s2.generator(Sign::Plus, 0)).is_zero(&FF));
        assert_eq!(f.apply(&s2.idempotent(&w(&[0]))), s0.identity());
        let rep = verify_truncation(&f, &s2, &s0, 1000);
        assert!(rep.passed(), "{:?}", rep.failures());
        assert!(truncation_map(&p2, &p0).is_err());
        let id = truncation_map(&p2, &p2).unwrap();
        assert!(s2.basis_elements().iter().all(|x| &id.apply(x) == x));
        let rep = verify_chain_laws(&[&s0, &s2, &s4]);
        assert!(rep.passed(), "{:?}", rep.failures());
        assert!(verify_truncation(&truncation_map(&p2, &p4).unwrap(), &s4, &s2, 200).passed());
    }

    #[test]
    fn closure_is_right_stable() {
        let t = SchurTower::new(RootDatum::preset("B2").unwrap());
        let d = t.datum().clone();
        let s = t.algebra(&sat(&d, &[&[1, 1]])).unwrap();
        assert!(s.right_stable());
    }

    #[test]
    fn tower_caches() {
        let t = SchurTower::new(RootDatum::preset("A1").unwrap());
        let d = t.datum().clone();
        let p = sat(&d, &[&[2]]);
        let a = t.algebra(&p).unwrap();
        let b = t.algebra(&p).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(t.cached_algebras(), 1);
        t.forget(&p);
        assert_eq!(t.cached_algebras(), 0);
        assert_eq!(t.algebra_uncached(&p).unwrap().blocks()[1].dim(), 3);
    }
}
