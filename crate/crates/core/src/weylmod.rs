//! Simple highest-weight modules `Δ(λ)` over `ℚ(v)`, built from words in the
//! lowering operators modulo the radical of the contravariant form.
//!
//! The contravariant form is pinned by `⟨m, m⟩ = 1` and `⟨F_i x, y⟩ = ⟨x, E_i y⟩`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::qarith::{qfact, qint, FunctionField, LaurentPoly, RatFunc};
use crate::rootdata::{Coweight, RootDataError, RootDatum, Weight};

const FF: FunctionField = FunctionField;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeylError {
    #[error(transparent)]
    RootData(#[from] RootDataError),
    #[error("weight {0} is not dominant")]
    NotDominant(Weight),
    #[error("weight {weight} lies outside the window of Δ({lambda})")]
    OutsideWindow { lambda: Weight, weight: Weight },
    #[error("radical not stable under {op} at weight {weight} in Δ({lambda})")]
    RadicalUnstable { lambda: Weight, weight: Weight, op: String },
    #[error("contravariant form not symmetric at weight {weight} in Δ({lambda})")]
    AsymmetricForm { lambda: Weight, weight: Weight },
    #[error("weight {weight} below the window of Δ({lambda}) has nonzero form rank {rank}")]
    BoundaryTripwire { lambda: Weight, weight: Weight, rank: usize },
}

/// Raising (`Plus`, `E_i`) or lowering (`Minus`, `E_{-i} = F_i`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn both() -> [Sign; 2] {
        [Sign::Plus, Sign::Minus]
    }

    fn slot(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// `F_{i₁} ⋯ F_{i_k}` applied to the highest-weight vector; `i₁` acts last.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FWord(pub Vec<usize>);

impl FWord {
    pub fn empty() -> Self {
        FWord(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self, datum: &RootDatum, lambda: &Weight) -> Weight {
        self.0.iter().fold(lambda.clone(), |w, &i| w.sub(datum.simple_root(i)))
    }

    /// `F_i · self`.
    pub fn prepend(&self, i: usize) -> FWord {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(i);
        v.extend_from_slice(&self.0);
        FWord(v)
    }
}

impl fmt::Display for FWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("m");
        }
        for i in &self.0 {
            write!(f, "F{i}")?;
        }
        f.write_str("m")
    }
}

impl fmt::Debug for FWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `[n]_i`, the quantum integer in `v^{d_i}`.
fn qint_i(datum: &RootDatum, i: usize, n: i64) -> LaurentPoly {
    qint(n, datum.d(i))
}

/// Verma-module words of every weight in the window `{ν : w₀λ ≤ ν ≤ λ}`.
#[derive(Clone, Debug)]
pub struct TruncatedVerma {
    lambda: Weight,
    low: Weight,
    /// Window weights, by depth below `λ` then coordinates.
    levels: Vec<(Weight, Vec<FWord>)>,
}

impl TruncatedVerma {
    pub fn lambda(&self) -> &Weight {
        &self.lambda
    }

    pub fn window(&self) -> impl Iterator<Item = &Weight> {
        self.levels.iter().map(|(w, _)| w)
    }

    pub fn words(&self, nu: &Weight) -> Option<&[FWord]> {
        self.levels.iter().find(|(w, _)| w == nu).map(|(_, b)| b.as_slice())
    }

    pub fn lowest(&self) -> &Weight {
        &self.low
    }

    /// `E_i · word` as a combination of shorter words, by commuting `E_i`
    /// to the right: `E_i F_j = F_j E_i + δ_{ij} [⟨h_i, ·⟩]_i`.
    pub fn e_action(datum: &RootDatum, lambda: &Weight, i: usize, word: &FWord) -> Vec<(LaurentPoly, FWord)> {
        let mut out: BTreeMap<FWord, LaurentPoly> = BTreeMap::new();
        let k = word.0.len();
        // weight of the suffix after position p
        let mut suffix = lambda.clone();
        let mut suffix_weights = vec![lambda.clone(); k];
        for p in (0..k).rev() {
            suffix_weights[p] = suffix.clone();
            suffix = suffix.sub(datum.simple_root(word.0[p]));
        }
        for p in 0..k {
            if word.0[p] != i {
                continue;
            }
            let c = qint_i(datum, i, datum.pair_simple(i, &suffix_weights[p]));
            if c.is_zero() {
                continue;
            }
            let mut w = word.0.clone();
            w.remove(p);
            let e = out.entry(FWord(w)).or_insert_with(LaurentPoly::zero);
            *e = &*e + &c;
        }
        out.into_iter().filter(|(_, c)| !c.is_zero()).map(|(w, c)| (c, w)).collect()
    }
}

/// All words whose weight lies in the window below dominant `λ`.
pub fn truncated_verma(datum: &RootDatum, lambda: &Weight) -> Result<TruncatedVerma, WeylError> {
    datum.check_rank(lambda)?;
    if !datum.is_dominant(lambda) {
        return Err(WeylError::NotDominant(lambda.clone()));
    }
    let low = datum.lowest_in_orbit(lambda);
    let mut levels: Vec<(Weight, Vec<FWord>)> = vec![(lambda.clone(), vec![FWord::empty()])];
    let mut frontier: BTreeMap<Weight, BTreeSet<FWord>> = BTreeMap::from([(lambda.clone(), BTreeSet::from([FWord::empty()]))]);
    loop {
        let mut next: BTreeMap<Weight, BTreeSet<FWord>> = BTreeMap::new();
        for (nu, words) in &frontier {
            for i in 0..datum.rank() {
                let mu = nu.sub(datum.simple_root(i));
                if !datum.dominance_leq(&low, &mu) {
                    continue;
                }
                let set = next.entry(mu).or_default();
                for w in words {
                    set.insert(w.prepend(i));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        for (mu, words) in &next {
            levels.push((mu.clone(), words.iter().cloned().collect()));
        }
        frontier = next;
    }
    Ok(TruncatedVerma { lambda: lambda.clone(), low, levels })
}

/// Gram matrix of the contravariant form on the Verma words of weight `ν`.
pub fn contravariant_gram(datum: &RootDatum, tv: &TruncatedVerma, nu: &Weight) -> Result<Matrix<RatFunc>, WeylError> {
    let words = tv.words(nu).ok_or_else(|| WeylError::OutsideWindow { lambda: tv.lambda.clone(), weight: nu.clone() })?;
    let mut memo: HashMap<(FWord, FWord), LaurentPoly> = HashMap::new();
    let n = words.len();
    let mut g = Matrix::zeros(&FF, n, n);
    for (a, ja) in words.iter().enumerate() {
        for (b, kb) in words.iter().enumerate() {
            g.set(a, b, RatFunc::from(word_form(datum, &tv.lambda, ja, kb, &mut memo)));
        }
    }
    Ok(g)
}

/// `⟨F_J m, F_K m⟩ = ⟨F_{J'} m, E_{j₁} F_K m⟩` for words of equal weight.
fn word_form(
    datum: &RootDatum,
    lambda: &Weight,
    j: &FWord,
    k: &FWord,
    memo: &mut HashMap<(FWord, FWord), LaurentPoly>,
) -> LaurentPoly {
    if j.0.len() != k.0.len() {
        return LaurentPoly::zero();
    }
    if j.0.is_empty() {
        return LaurentPoly::one();
    }
    if let Some(x) = memo.get(&(j.clone(), k.clone())) {
        return x.clone();
    }
    let rest = FWord(j.0[1..].to_vec());
    let mut acc = LaurentPoly::zero();
    for (c, w) in TruncatedVerma::e_action(datum, lambda, j.0[0], k) {
        let inner = word_form(datum, lambda, &rest, &w, memo);
        if !inner.is_zero() {
            acc = &acc + &(&c * &inner);
        }
    }
    memo.insert((j.clone(), k.clone()), acc.clone());
    acc
}

/// One nonzero weight space of `Δ(λ)` during construction.
struct Level {
    basis: Vec<FWord>,
    gram: Matrix<RatFunc>,
    /// `e_to[j]`: matrix of `E_j` from this space to the `ν + α_j` space.
    e_to: Vec<Option<Matrix<RatFunc>>>,
    /// `f_from[i]`: matrix of `F_i` from the `ν + α_i` space to this space.
    f_from: Vec<Option<Matrix<RatFunc>>>,
}

/// The simple module `Δ(λ)` with exact action matrices in a weight basis.
#[derive(Clone, Debug)]
pub struct WeylModule {
    lambda: Weight,
    rank: usize,
    d: Vec<u32>,
    /// Distinct weights in basis order.
    weights: Vec<Weight>,
    /// Start of each weight space in the basis.
    offsets: Vec<usize>,
    basis: Vec<FWord>,
    grams: Vec<Matrix<RatFunc>>,
    /// `powers[sign][i][k] = E_{±i}^{(k)}` for `k` up to the last nonzero power.
    powers: [Vec<Vec<Matrix<RatFunc>>>; 2],
    zero: Matrix<RatFunc>,
}

/// Builds `Δ(λ)` weight space by weight space, downward from `λ`.
///
/// Each space below `λ` is spanned by the vectors `F_i b` with `b` a basis
/// vector one step up. The form on these candidates is computed through
/// `⟨F_i b, y⟩ = ⟨b, E_i y⟩`, and a maximal independent set of Gram rows in
/// word order is kept as the basis.
pub fn weyl_module(datum: &RootDatum, lambda: &Weight) -> Result<WeylModule, WeylError> {
    datum.check_rank(lambda)?;
    if !datum.is_dominant(lambda) {
        return Err(WeylError::NotDominant(lambda.clone()));
    }
    let r = datum.rank();
    let low = datum.lowest_in_orbit(lambda);
    let mut levels: HashMap<Weight, Level> = HashMap::new();
    let mut order: Vec<Weight> = vec![lambda.clone()];
    levels.insert(
        lambda.clone(),
        Level {
            basis: vec![FWord::empty()],
            gram: Matrix::identity(&FF, 1),
            e_to: vec![None; r],
            f_from: vec![None; r],
        },
    );
    let mut frontier: BTreeSet<Weight> = BTreeSet::from([lambda.clone()]);
    while !frontier.is_empty() {
        let targets: BTreeSet<Weight> = frontier
            .iter()
            .flat_map(|nu| (0..r).map(move |i| nu.sub(datum.simple_root(i))))
            .collect();
        let mut next = BTreeSet::new();
        for nu in targets {
            if let Some(level) = build_level(datum, lambda, &nu, &mut levels)? {
                if !datum.dominance_leq(&low, &nu) {
                    return Err(WeylError::BoundaryTripwire {
                        lambda: lambda.clone(),
                        weight: nu,
                        rank: level.basis.len(),
                    });
                }
                levels.insert(nu.clone(), level);
                order.push(nu.clone());
                next.insert(nu);
            }
        }
        frontier = next;
    }
    Ok(assemble(datum, lambda, order, levels))
}

/// Computes the weight space at `ν` and fills in the `F`-matrices into it
/// and the `E`-matrices out of it. Returns `None` for a zero space.
fn build_level(
    datum: &RootDatum,
    lambda: &Weight,
    nu: &Weight,
    levels: &mut HashMap<Weight, Level>,
) -> Result<Option<Level>, WeylError> {
    let r = datum.rank();
    let up = |k: usize| nu.add(datum.simple_root(k));
    // candidates F_i b, sorted by word
    let mut cands: Vec<(FWord, usize, usize)> = Vec::new();
    for i in 0..r {
        if let Some(l) = levels.get(&up(i)) {
            for (b, w) in l.basis.iter().enumerate() {
                cands.push((w.prepend(i), i, b));
            }
        }
    }
    cands.sort();
    if cands.is_empty() {
        return Ok(None);
    }
    let n = cands.len();
    // E_j F_i b = F_i E_j b + δ_ij [⟨h_i, ν + α_i⟩]_i b, in coordinates of ν + α_j
    let mut eimg: Vec<Vec<Option<Vec<RatFunc>>>> = vec![vec![None; n]; r];
    for j in 0..r {
        let Some(target) = levels.get(&up(j)) else { continue };
        let tdim = target.basis.len();
        for (c, (_, i, b)) in cands.iter().enumerate() {
            let mut y = vec![RatFunc::zero(); tdim];
            let src = &levels[&up(*i)];
            if let (Some(e), Some(f)) = (&src.e_to[j], &target.f_from[*i]) {
                let col: Vec<RatFunc> = (0..e.rows()).map(|row| e.get(row, *b).clone()).collect();
                y = f.mul_vec(&FF, &col);
            }
            if *i == j {
                let q = RatFunc::from(qint_i(datum, j, datum.pair_simple(j, &up(j))));
                y[*b] = &y[*b] + &q;
            }
            eimg[j][c] = Some(y);
        }
    }
    // ⟨F_i b, y⟩ = ⟨b, E_i y⟩
    let mut gram = Matrix::zeros(&FF, n, n);
    for (a, (_, i, b)) in cands.iter().enumerate() {
        let g_up = &levels[&up(*i)].gram;
        for c in 0..n {
            let y = eimg[*i][c].as_ref().expect("the space above a candidate exists");
            let mut acc = RatFunc::zero();
            for (k, yk) in y.iter().enumerate() {
                if !yk.is_zero() {
                    acc = &acc + &(g_up.get(*b, k) * yk);
                }
            }
            gram.set(a, c, acc);
        }
    }
    if gram != gram.transpose() {
        return Err(WeylError::AsymmetricForm { lambda: lambda.clone(), weight: nu.clone() });
    }
    let keep = gram.independent_rows(&FF);
    if keep.is_empty() {
        return Ok(None);
    }
    let g_bb = gram.submatrix(&keep, &keep);
    let g_inv = g_bb.inverse(&FF).expect("independent Gram rows give an invertible block");
    let all: Vec<usize> = (0..n).collect();
    // coords[c] = G_BB⁻¹ G_{B,c}
    let coords = g_inv.mul(&FF, &gram.submatrix(&keep, &all));
    let m = keep.len();
    let mut level = Level {
        basis: keep.iter().map(|&k| cands[k].0.clone()).collect(),
        gram: g_bb,
        e_to: vec![None; r],
        f_from: vec![None; r],
    };
    for i in 0..r {
        let Some(src) = levels.get(&up(i)) else { continue };
        let src_dim = src.basis.len();
        let mut f = Matrix::zeros(&FF, m, src_dim);
        for (c, (_, ci, b)) in cands.iter().enumerate() {
            if *ci == i {
                for row in 0..m {
                    f.set(row, *b, coords.get(row, c).clone());
                }
            }
        }
        level.f_from[i] = Some(f);
    }
    for j in 0..r {
        let Some(target) = levels.get(&up(j)) else { continue };
        let tdim = target.basis.len();
        let e = Matrix::from_fn(tdim, m, |row, col| eimg[j][keep[col]].as_ref().unwrap()[row].clone());
        // every candidate's E-image must factor through its coordinates
        for c in 0..n {
            let x: Vec<RatFunc> = (0..m).map(|row| coords.get(row, c).clone()).collect();
            if e.mul_vec(&FF, &x) != *eimg[j][c].as_ref().unwrap() {
                return Err(WeylError::RadicalUnstable {
                    lambda: lambda.clone(),
                    weight: nu.clone(),
                    op: format!("E{j}"),
                });
            }
        }
        level.e_to[j] = Some(e);
    }
    Ok(Some(level))
}

fn assemble(datum: &RootDatum, lambda: &Weight, order: Vec<Weight>, levels: HashMap<Weight, Level>) -> WeylModule {
    let r = datum.rank();
    let mut offsets = Vec::new();
    let mut basis = Vec::new();
    let mut grams = Vec::new();
    let mut index: HashMap<Weight, usize> = HashMap::new();
    for (k, nu) in order.iter().enumerate() {
        index.insert(nu.clone(), k);
        offsets.push(basis.len());
        basis.extend(levels[nu].basis.iter().cloned());
        grams.push(levels[nu].gram.clone());
    }
    let dim = basis.len();
    let mut e = vec![Matrix::zeros(&FF, dim, dim); r];
    let mut f = vec![Matrix::zeros(&FF, dim, dim); r];
    for (k, nu) in order.iter().enumerate() {
        let level = &levels[nu];
        for i in 0..r {
            let Some(&ku) = index.get(&nu.add(datum.simple_root(i))) else { continue };
            if let Some(m) = &level.e_to[i] {
                place(&mut e[i], m, offsets[ku], offsets[k]);
            }
            if let Some(m) = &level.f_from[i] {
                place(&mut f[i], m, offsets[k], offsets[ku]);
            }
        }
    }
    let d: Vec<u32> = (0..r).map(|i| datum.d(i)).collect();
    let powers = [
        (0..r).map(|i| divided_powers(&e[i], d[i])).collect(),
        (0..r).map(|i| divided_powers(&f[i], d[i])).collect(),
    ];
    let zero = Matrix::zeros(&FF, dim, dim);
    WeylModule { lambda: lambda.clone(), rank: r, d, weights: order, offsets, basis, grams, powers, zero }
}

fn place(dst: &mut Matrix<RatFunc>, src: &Matrix<RatFunc>, row0: usize, col0: usize) {
    for r in 0..src.rows() {
        for c in 0..src.cols() {
            dst.set(row0 + r, col0 + c, src.get(r, c).clone());
        }
    }
}

/// `[E^0, E^(1), …]` up to the last nonzero divided power.
fn divided_powers(e: &Matrix<RatFunc>, d: u32) -> Vec<Matrix<RatFunc>> {
    let n = e.rows();
    let mut out = vec![Matrix::identity(&FF, n)];
    let mut power = Matrix::identity(&FF, n);
    for k in 1.. {
        power = power.mul(&FF, e);
        if power.is_zero(&FF) {
            break;
        }
        let fact = RatFunc::from(qfact(k, d)).inv().expect("quantum factorials are nonzero");
        out.push(power.scale(&FF, &fact));
    }
    out
}

impl WeylModule {
    pub fn lambda(&self) -> &Weight {
        &self.lambda
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Weights with nonzero space, in basis order.
    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn basis_words(&self) -> &[FWord] {
        &self.basis
    }

    /// Index range of the `ν` weight space in the basis.
    pub fn weight_range(&self, nu: &Weight) -> Option<std::ops::Range<usize>> {
        let k = self.weights.iter().position(|w| w == nu)?;
        let end = self.offsets.get(k + 1).copied().unwrap_or(self.dim());
        Some(self.offsets[k]..end)
    }

    pub fn weight_dim(&self, nu: &Weight) -> usize {
        self.weight_range(nu).map_or(0, |r| r.len())
    }

    /// Weight of each basis vector.
    pub fn basis_weights(&self) -> Vec<Weight> {
        let mut out = Vec::with_capacity(self.dim());
        for (k, w) in self.weights.iter().enumerate() {
            let end = self.offsets.get(k + 1).copied().unwrap_or(self.dim());
            for _ in self.offsets[k]..end {
                out.push(w.clone());
            }
        }
        out
    }

    /// Multiplicity of every weight with a nonzero space.
    pub fn multiplicities(&self) -> BTreeMap<Weight, usize> {
        self.weights.iter().map(|w| (w.clone(), self.weight_dim(w))).collect()
    }

    /// Contravariant form on the chosen basis of the `ν` space.
    pub fn gram(&self, nu: &Weight) -> Option<&Matrix<RatFunc>> {
        let k = self.weights.iter().position(|w| w == nu)?;
        Some(&self.grams[k])
    }

    /// Contravariant form on the whole module, block diagonal by weight.
    pub fn full_gram(&self) -> Matrix<RatFunc> {
        let mut g = Matrix::zeros(&FF, self.dim(), self.dim());
        for (k, m) in self.grams.iter().enumerate() {
            place(&mut g, m, self.offsets[k], self.offsets[k]);
        }
        g
    }

    pub fn generator(&self, sign: Sign, i: usize) -> &Matrix<RatFunc> {
        self.powers[sign.slot()][i].get(1).unwrap_or(&self.zero)
    }

    /// Largest `k` with `E_{±i}^{(k)} ≠ 0`.
    pub fn max_power(&self, sign: Sign, i: usize) -> usize {
        self.powers[sign.slot()][i].len() - 1
    }

    /// `E_{±i}^{(k)}`, the zero matrix beyond the nilpotency degree.
    pub fn divided_power(&self, sign: Sign, i: usize, k: usize) -> Matrix<RatFunc> {
        self.powers[sign.slot()][i]
            .get(k)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(&FF, self.dim(), self.dim()))
    }

    /// `K_h`: `v^{⟨h,ν⟩}` on the `ν` space.
    pub fn k_matrix(&self, datum: &RootDatum, h: &Coweight) -> Matrix<RatFunc> {
        let ws = self.basis_weights();
        Matrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r == c {
                RatFunc::v_pow(datum.pair(h, &ws[r]))
            } else {
                RatFunc::zero()
            }
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn d(&self, i: usize) -> u32 {
        self.d[i]
    }
}

/// `dim Δ(λ) = Π_{α>0} ⟨h_α, λ + ρ⟩ / ⟨h_α, ρ⟩`.
pub fn weyl_dim_oracle(datum: &RootDatum, lambda: &Weight) -> u64 {
    let mut num = BigRational::one();
    for (_, h) in datum.positive_roots() {
        let rho = datum.rho_pairing(&h);
        let top = BigRational::from_integer(datum.pair(&h, lambda).into()) + &rho;
        num = num * top / rho;
    }
    assert!(num.is_integer(), "Weyl dimension formula gave {num}");
    num.to_integer().to_u64().expect("dimension fits in u64")
}

/// Weight multiplicities of `Δ(λ)` by Freudenthal's recursion
/// `((λ+ρ,λ+ρ) − (μ+ρ,μ+ρ)) m(μ) = 2 Σ_{α>0} Σ_{k≥1} m(μ+kα) (μ+kα, α)`.
pub fn freudenthal_oracle(datum: &RootDatum, lambda: &Weight) -> BTreeMap<Weight, u64> {
    let r = datum.rank();
    let low = datum.lowest_in_orbit(lambda);
    let bounds = datum.root_lattice_coords(&lambda.sub(&low)).expect("λ − w₀λ lies in the root lattice");
    let pairings = |w: &Weight| -> Vec<BigRational> {
        (0..r).map(|i| BigRational::from_integer(datum.pair_simple(i, w).into())).collect()
    };
    let plus_rho = |c: Vec<BigRational>| -> Vec<BigRational> { c.into_iter().map(|x| x + BigRational::one()).collect() };
    let lr = plus_rho(pairings(lambda));
    let top = datum.form_on_pairings(&lr, &lr);
    let roots: Vec<Weight> = datum.positive_roots().into_iter().map(|(a, _)| a).collect();

    // candidate weights λ − Σ n_i α_i in the bounding box, by depth
    let mut cands: Vec<(i64, Vec<i64>)> = Vec::new();
    let mut n = vec![0i64; r];
    'outer: loop {
        cands.push((n.iter().sum(), n.clone()));
        let mut k = 0;
        loop {
            if k == r {
                break 'outer;
            }
            n[k] += 1;
            if n[k] <= bounds[k] {
                break;
            }
            n[k] = 0;
            k += 1;
        }
    }
    cands.sort();
    let mut mult: HashMap<Weight, BigRational> = HashMap::new();
    for (depth, n) in cands {
        let mu = lambda.sub(&datum.root_combination(&n));
        if depth == 0 {
            mult.insert(mu, BigRational::one());
            continue;
        }
        let mr = plus_rho(pairings(&mu));
        let denom = &top - datum.form_on_pairings(&mr, &mr);
        let mut acc = BigRational::zero();
        for alpha in &roots {
            let mut k = 1;
            loop {
                let nu = mu.add(&alpha.scaled(k));
                if !datum.dominance_leq(&nu, lambda) {
                    break;
                }
                if let Some(m) = mult.get(&nu) {
                    if !m.is_zero() {
                        acc += m * datum.invariant_form(&nu, alpha);
                    }
                }
                k += 1;
            }
        }
        let m = if acc.is_zero() {
            BigRational::zero()
        } else {
            assert!(!denom.is_zero(), "Freudenthal denominator vanished at {mu}");
            BigRational::from_integer(2.into()) * acc / denom
        };
        mult.insert(mu, m);
    }
    mult.into_iter()
        .filter(|(_, m)| !m.is_zero())
        .map(|(w, m)| {
            assert!(m.is_integer(), "nonintegral multiplicity {m} at {w}");
            (w, m.to_integer().to_u64().expect("multiplicity fits in u64"))
        })
        .collect()
}
