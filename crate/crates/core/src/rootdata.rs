//! Cartan data and finite-type root data: weights, dominance, Weyl orbits,
//! positive roots, saturated sets of dominant weights.
//!
//! Weights are stored in the ambient basis of `X` and coweights in the basis
//! of `Y`; coordinates with respect to the simple roots are obtained by
//! solving exact linear systems.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::qarith::Rationals;

/// An element of `X`, in the chosen basis of `X`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(pub Vec<i64>);

/// An element of `Y`, in the chosen basis of `Y`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coweight(pub Vec<i64>);

impl Weight {
    pub fn zero(rank: usize) -> Self {
        Weight(vec![0; rank])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scaled(&self, k: i64) -> Weight {
        Weight(self.0.iter().map(|a| a * k).collect())
    }

    pub fn neg(&self) -> Weight {
        self.scaled(-1)
    }
}

impl Coweight {
    pub fn zero(rank: usize) -> Self {
        Coweight(vec![0; rank])
    }

    pub fn add(&self, other: &Coweight) -> Coweight {
        Coweight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, k: i64) -> Coweight {
        Coweight(self.0.iter().map(|a| a * k).collect())
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, v: &[i64]) -> fmt::Result {
    f.write_str("(")?;
    for (k, x) in v.iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

impl fmt::Display for Coweight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

impl fmt::Debug for Coweight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootDataError {
    #[error("invalid root datum: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("weight {0} is not dominant")]
    NotDominant(Weight),
    #[error("weight {weight} has rank {got}, expected {expected}")]
    RankMismatch { weight: String, got: usize, expected: usize },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("{0} is not a subset of the saturated set")]
    NotSubset(String),
    #[error("weight enumeration needs rank X = |I| (got rank {rank_x}, |I| = {rank})")]
    NotSemisimple { rank_x: usize, rank: usize },
}

/// A finite index set `I = {0, …, r-1}` with the symmetric form `(i, j)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CartanDatum {
    pub form: Vec<Vec<i64>>,
}

impl CartanDatum {
    pub fn rank(&self) -> usize {
        self.form.len()
    }

    /// `d_i = (i, i) / 2`.
    pub fn d(&self, i: usize) -> u32 {
        (self.form[i][i] / 2) as u32
    }
}

/// Outcome of [`RootDatum::validate`]: one entry per violated condition.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub failures: Vec<String>,
    pub finite_type: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A root datum `(X, {α_i}, Y, {h_i})` with its pairing `⟨·,·⟩ : Y × X → ℤ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RootDatum {
    name: String,
    cartan: CartanDatum,
    /// `rank_y × rank_x`.
    pairing: Vec<Vec<i64>>,
    simple_roots: Vec<Weight>,
    simple_coroots: Vec<Coweight>,
}

impl RootDatum {
    /// Builds a datum and rejects it if [`validate`](Self::validate) reports
    /// any failure, including failure of finite type.
    pub fn new(
        name: impl Into<String>,
        form: Vec<Vec<i64>>,
        pairing: Vec<Vec<i64>>,
        simple_roots: Vec<Weight>,
        simple_coroots: Vec<Coweight>,
    ) -> Result<Self, RootDataError> {
        let datum = Self::new_unchecked(name, form, pairing, simple_roots, simple_coroots);
        let report = datum.validate();
        if report.is_valid() {
            Ok(datum)
        } else {
            Err(RootDataError::Invalid(report.failures))
        }
    }

    pub fn new_unchecked(
        name: impl Into<String>,
        form: Vec<Vec<i64>>,
        pairing: Vec<Vec<i64>>,
        simple_roots: Vec<Weight>,
        simple_coroots: Vec<Coweight>,
    ) -> Self {
        RootDatum {
            name: name.into(),
            cartan: CartanDatum { form },
            pairing,
            simple_roots,
            simple_coroots,
        }
    }

    /// Simply connected datum of a Cartan datum: `X` has the fundamental
    /// weights as basis, `Y` the simple coroots, and the pairing is the identity.
    pub fn simply_connected(name: impl Into<String>, form: Vec<Vec<i64>>) -> Result<Self, RootDataError> {
        let r = form.len();
        let mut failures = Vec::new();
        for i in 0..r {
            if form[i].len() != r {
                failures.push(format!("row {i} of the form has length {}, expected {r}", form[i].len()));
            } else if form[i][i] <= 0 {
                failures.push(format!("(i,i) = {} for i = {i} is not in {{2,4,6,…}}", form[i][i]));
            }
        }
        if !failures.is_empty() {
            return Err(RootDataError::Invalid(failures));
        }
        // α_j = Σ_i ⟨h_i, α_j⟩ ω_i with ⟨h_i, α_j⟩ = 2(i,j)/(i,i)
        let simple_roots = (0..r)
            .map(|j| Weight((0..r).map(|i| 2 * form[i][j] / form[i][i]).collect()))
            .collect();
        let simple_coroots = (0..r)
            .map(|i| Coweight((0..r).map(|k| i64::from(k == i)).collect()))
            .collect();
        let pairing = (0..r).map(|i| (0..r).map(|k| i64::from(k == i)).collect()).collect();
        Self::new(name, form, pairing, simple_roots, simple_coroots)
    }

    /// Presets: `A1`, `A1xA1`, `A2`, `B2` (simply connected) and `A1ad`
    /// (adjoint `A1`, `X = ℤα`).
    pub fn preset(name: &str) -> Result<Self, RootDataError> {
        match name {
            "A1" => Self::simply_connected("A1", vec![vec![2]]),
            "A1xA1" => Self::simply_connected("A1xA1", vec![vec![2, 0], vec![0, 2]]),
            "A2" => Self::simply_connected("A2", vec![vec![2, -1], vec![-1, 2]]),
            // α_0 long with (0,0) = 4, α_1 short
            "B2" => Self::simply_connected("B2", vec![vec![4, -2], vec![-2, 2]]),
            "A1ad" => Self::new(
                "A1ad",
                vec![vec![2]],
                vec![vec![1]],
                vec![Weight(vec![1])],
                vec![Coweight(vec![2])],
            ),
            other => Err(RootDataError::UnknownPreset(other.to_string())),
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["A1", "A1xA1", "A2", "B2", "A1ad"]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cartan(&self) -> &CartanDatum {
        &self.cartan
    }

    pub fn rank(&self) -> usize {
        self.cartan.rank()
    }

    pub fn rank_x(&self) -> usize {
        self.pairing.first().map_or(0, |r| r.len())
    }

    pub fn rank_y(&self) -> usize {
        self.pairing.len()
    }

    pub fn pairing_matrix(&self) -> &[Vec<i64>] {
        &self.pairing
    }

    pub fn simple_root(&self, i: usize) -> &Weight {
        &self.simple_roots[i]
    }

    pub fn simple_roots(&self) -> &[Weight] {
        &self.simple_roots
    }

    pub fn simple_coroot(&self, i: usize) -> &Coweight {
        &self.simple_coroots[i]
    }

    pub fn simple_coroots(&self) -> &[Coweight] {
        &self.simple_coroots
    }

    pub fn d(&self, i: usize) -> u32 {
        self.cartan.d(i)
    }

    /// `⟨h, λ⟩`.
    pub fn pair(&self, h: &Coweight, lambda: &Weight) -> i64 {
        let mut acc = 0;
        for (y, hy) in h.0.iter().enumerate() {
            if *hy == 0 {
                continue;
            }
            for (x, lx) in lambda.0.iter().enumerate() {
                acc += hy * self.pairing[y][x] * lx;
            }
        }
        acc
    }

    /// `⟨h_i, λ⟩`.
    pub fn pair_simple(&self, i: usize, lambda: &Weight) -> i64 {
        self.pair(&self.simple_coroots[i], lambda)
    }

    /// Generalized Cartan matrix entry `⟨h_i, α_j⟩`.
    pub fn cartan_entry(&self, i: usize, j: usize) -> i64 {
        self.pair_simple(i, &self.simple_roots[j])
    }

    /// Checks every root-datum axiom plus finite type.
    pub fn validate(&self) -> ValidationReport {
        let mut failures = Vec::new();
        let form = &self.cartan.form;
        let r = form.len();
        if r == 0 {
            failures.push("the index set I is empty".to_string());
        }
        let square = form.iter().all(|row| row.len() == r);
        if !square {
            failures.push("the form is not a square matrix".to_string());
        }
        if square {
            for i in 0..r {
                for j in 0..i {
                    if form[i][j] != form[j][i] {
                        failures.push(format!("form not symmetric: ({i},{j}) = {} but ({j},{i}) = {}", form[i][j], form[j][i]));
                    }
                }
            }
            for i in 0..r {
                let ii = form[i][i];
                if ii <= 0 || ii % 2 != 0 {
                    failures.push(format!("(i,i) = {ii} for i = {i} is not in {{2,4,6,…}}"));
                    continue;
                }
                for j in 0..r {
                    if i != j && ((2 * form[i][j]) % ii != 0 || form[i][j] > 0) {
                        failures.push(format!("2({i},{j})/({i},{i}) = {}/{ii} is not in {{0,-1,-2,…}}", 2 * form[i][j]));
                    }
                }
            }
        }
        let (rx, ry) = (self.rank_x(), self.rank_y());
        if self.pairing.iter().any(|row| row.len() != rx) {
            failures.push("the pairing matrix is ragged".to_string());
        }
        if self.simple_roots.len() != r || self.simple_coroots.len() != r {
            failures.push(format!(
                "expected {r} simple roots and coroots, got {} and {}",
                self.simple_roots.len(),
                self.simple_coroots.len()
            ));
        }
        if self.simple_roots.iter().any(|a| a.0.len() != rx) {
            failures.push(format!("simple roots must have rank {rx}"));
        }
        if self.simple_coroots.iter().any(|h| h.0.len() != ry) {
            failures.push(format!("simple coroots must have rank {ry}"));
        }
        if !failures.is_empty() {
            return ValidationReport { failures, finite_type: false };
        }
        if rx != ry {
            failures.push(format!("pairing is not perfect: rank X = {rx} but rank Y = {ry}"));
        } else {
            let p = int_matrix(&self.pairing);
            let det = p.determinant(&Rationals);
            if det.abs() != BigRational::one() {
                failures.push(format!("pairing is not perfect: determinant {det}"));
            }
        }
        for i in 0..r {
            for j in 0..r {
                let want = 2 * form[i][j] / form[i][i];
                let got = self.cartan_entry(i, j);
                if got != want {
                    failures.push(format!("⟨h_{i}, α_{j}⟩ = {got}, expected 2({i},{j})/({i},{i}) = {want}"));
                }
            }
        }
        // finite type: all leading principal minors of ((i,j)) positive
        let mut finite_type = true;
        for k in 1..=r {
            let idx: Vec<usize> = (0..k).collect();
            let minor = int_matrix(form).submatrix(&idx, &idx).determinant(&Rationals);
            if !minor.is_positive() {
                finite_type = false;
                failures.push(format!("not of finite type: leading principal minor of order {k} is {minor}"));
                break;
            }
        }
        ValidationReport { failures, finite_type }
    }

    fn cartan_matrix(&self) -> Matrix<BigRational> {
        let r = self.rank();
        Matrix::from_fn(r, r, |i, j| BigRational::from_integer(self.cartan_entry(i, j).into()))
    }

    /// Coordinates of `λ` with respect to the simple roots, if `λ` lies in
    /// their rational span.
    pub fn alpha_coords(&self, lambda: &Weight) -> Option<Vec<BigRational>> {
        let r = self.rank();
        let a_inv = self.cartan_matrix().inverse(&Rationals).expect("finite type Cartan matrix is invertible");
        let h: Vec<BigRational> = (0..r).map(|i| BigRational::from_integer(self.pair_simple(i, lambda).into())).collect();
        let n = a_inv.mul_vec(&Rationals, &h);
        // the coroot pairings only see the span of the roots modulo the
        // common kernel, so confirm the reconstruction
        for x in 0..self.rank_x() {
            let mut acc = BigRational::zero();
            for (i, ni) in n.iter().enumerate() {
                acc += ni * BigRational::from_integer(self.simple_roots[i].0[x].into());
            }
            if acc != BigRational::from_integer(lambda.0[x].into()) {
                return None;
            }
        }
        Some(n)
    }

    /// Integer coordinates in the simple roots, if `λ` is in the root lattice.
    pub fn root_lattice_coords(&self, lambda: &Weight) -> Option<Vec<i64>> {
        self.alpha_coords(lambda)?
            .into_iter()
            .map(|c| c.is_integer().then(|| c.to_integer().to_i64()).flatten())
            .collect()
    }

    /// `Σ n_i α_i`.
    pub fn root_combination(&self, n: &[i64]) -> Weight {
        let mut w = Weight::zero(self.rank_x());
        for (i, &k) in n.iter().enumerate() {
            if k != 0 {
                w = w.add(&self.simple_roots[i].scaled(k));
            }
        }
        w
    }

    /// Dominance order: `λ ≤ μ` iff `μ - λ ∈ Σ ℕ α_i`.
    pub fn dominance_leq(&self, lambda: &Weight, mu: &Weight) -> bool {
        match self.root_lattice_coords(&mu.sub(lambda)) {
            Some(n) => n.iter().all(|&k| k >= 0),
            None => false,
        }
    }

    pub fn is_dominant(&self, lambda: &Weight) -> bool {
        (0..self.rank()).all(|i| self.pair_simple(i, lambda) >= 0)
    }

    /// Simple reflection `s_i(μ) = μ - ⟨h_i, μ⟩ α_i`.
    pub fn reflect(&self, i: usize, mu: &Weight) -> Weight {
        let k = self.pair_simple(i, mu);
        mu.sub(&self.simple_roots[i].scaled(k))
    }

    /// Simple reflection on coweights, `s_i(h) = h - ⟨h, α_i⟩ h_i`.
    pub fn reflect_coweight(&self, i: usize, h: &Coweight) -> Coweight {
        let k = self.pair(h, &self.simple_roots[i]);
        h.add(&self.simple_coroots[i].scaled(-k))
    }

    /// The Weyl group orbit of `λ`, sorted.
    pub fn weyl_orbit(&self, lambda: &Weight) -> Vec<Weight> {
        let mut seen: BTreeSet<Weight> = BTreeSet::new();
        let mut queue = VecDeque::from([lambda.clone()]);
        seen.insert(lambda.clone());
        while let Some(mu) = queue.pop_front() {
            for i in 0..self.rank() {
                let nu = self.reflect(i, &mu);
                if seen.insert(nu.clone()) {
                    queue.push_back(nu);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// `w₀λ`, the unique dominance-minimal element of the orbit of `λ`.
    pub fn lowest_in_orbit(&self, lambda: &Weight) -> Weight {
        let orbit = self.weyl_orbit(lambda);
        orbit
            .iter()
            .find(|mu| orbit.iter().all(|nu| self.dominance_leq(mu, nu)))
            .cloned()
            .expect("finite-type orbits have a unique minimal element")
    }

    /// The dominant element of the orbit of `μ`.
    pub fn dominant_conjugate(&self, mu: &Weight) -> Weight {
        let mut w = mu.clone();
        'outer: loop {
            for i in 0..self.rank() {
                if self.pair_simple(i, &w) < 0 {
                    w = self.reflect(i, &w);
                    continue 'outer;
                }
            }
            return w;
        }
    }

    /// Height of a weight's orbit: the sum of the simple-root coordinates of
    /// `λ⁺ - w₀λ⁺`, where `λ⁺` is the dominant conjugate.
    pub fn height(&self, lambda: &Weight) -> i64 {
        let top = self.dominant_conjugate(lambda);
        let low = self.lowest_in_orbit(&top);
        self.root_lattice_coords(&top.sub(&low))
            .expect("λ - w₀λ lies in the root lattice")
            .iter()
            .sum()
    }

    /// Positive roots with their coroots, ordered by height then by
    /// simple-root coordinates.
    pub fn positive_roots(&self) -> Vec<(Weight, Coweight)> {
        let mut seen: HashSet<Weight> = HashSet::new();
        let mut out = Vec::new();
        let mut queue: VecDeque<(Weight, Coweight)> = (0..self.rank())
            .map(|i| (self.simple_roots[i].clone(), self.simple_coroots[i].clone()))
            .collect();
        for (a, _) in &queue {
            seen.insert(a.clone());
        }
        while let Some((root, coroot)) = queue.pop_front() {
            for i in 0..self.rank() {
                let r2 = self.reflect(i, &root);
                if seen.insert(r2.clone()) {
                    queue.push_back((r2, self.reflect_coweight(i, &coroot)));
                }
            }
            out.push((root, coroot));
        }
        let mut keyed: Vec<(i64, Vec<i64>, (Weight, Coweight))> = out
            .into_iter()
            .filter_map(|rc| {
                let n = self.root_lattice_coords(&rc.0).expect("roots lie in the root lattice");
                n.iter().all(|&k| k >= 0).then(|| (n.iter().sum(), n, rc))
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
        keyed.into_iter().map(|k| k.2).collect()
    }

    /// Half the sum of the positive roots, in `X ⊗ ℚ`, reported through its
    /// pairing with a coweight.
    pub fn rho_pairing(&self, h: &Coweight) -> BigRational {
        let sum: i64 = self.positive_roots().iter().map(|(a, _)| self.pair(h, a)).sum();
        BigRational::new(sum.into(), 2.into())
    }

    /// The `W`-invariant symmetric form on `X ⊗ ℚ` with `(α_i, μ) = d_i⟨h_i, μ⟩`.
    ///
    /// Computed as `c(λ)ᵀ D B⁻¹ D c(μ)` where `c(·)` are the simple-coroot
    /// pairings and `B` is the matrix of `(i, j)`; the result vanishes on the
    /// common kernel of the coroots.
    pub fn invariant_form(&self, lambda: &Weight, mu: &Weight) -> BigRational {
        let c = |w: &Weight| -> Vec<BigRational> {
            (0..self.rank()).map(|i| BigRational::from_integer(self.pair_simple(i, w).into())).collect()
        };
        self.form_on_pairings(&c(lambda), &c(mu))
    }

    /// The invariant form evaluated on vectors of `X ⊗ ℚ` given by their
    /// simple-coroot pairings, e.g. `ρ` with all pairings 1.
    pub fn form_on_pairings(&self, a: &[BigRational], b: &[BigRational]) -> BigRational {
        let b_inv = int_matrix(&self.cartan.form).inverse(&Rationals).expect("finite type form is nondegenerate");
        let d = |i: usize| BigRational::from_integer(self.d(i).into());
        let da: Vec<BigRational> = a.iter().enumerate().map(|(i, x)| x * d(i)).collect();
        let db: Vec<BigRational> = b.iter().enumerate().map(|(i, x)| x * d(i)).collect();
        let t = b_inv.mul_vec(&Rationals, &db);
        da.iter().zip(&t).map(|(x, y)| x * y).sum()
    }

    /// Coordinates of a weight in `X` from its simple-coroot pairings, when
    /// `rank X = |I|` and the solution is integral.
    pub fn weight_from_pairings(&self, c: &[i64]) -> Option<Weight> {
        let r = self.rank();
        if self.rank_x() != r {
            return None;
        }
        // rows i: Σ_x (Σ_y h_i[y] P[y][x]) λ_x = c_i
        let m = Matrix::from_fn(r, r, |i, x| {
            let s: i64 = (0..self.rank_y()).map(|y| self.simple_coroots[i].0[y] * self.pairing[y][x]).sum();
            BigRational::from_integer(s.into())
        });
        let inv = m.inverse(&Rationals)?;
        let rhs: Vec<BigRational> = c.iter().map(|&k| BigRational::from_integer(k.into())).collect();
        let sol = inv.mul_vec(&Rationals, &rhs);
        sol.into_iter()
            .map(|q| q.is_integer().then(|| q.to_integer().to_i64()).flatten())
            .collect::<Option<Vec<i64>>>()
            .map(Weight)
    }

    /// All dominant weights of height at most `max_height`, ordered by
    /// (height, coordinates).
    pub fn dominant_weights_up_to(&self, max_height: i64) -> Result<Vec<Weight>, RootDataError> {
        let r = self.rank();
        if self.rank_x() != r {
            return Err(RootDataError::NotSemisimple { rank_x: self.rank_x(), rank: r });
        }
        // ⟨h_i, λ⟩ ≤ height(λ), since λ - s_iλ = ⟨h_i,λ⟩α_i ≤ λ - w₀λ
        let mut out = Vec::new();
        let mut c = vec![0i64; r];
        loop {
            if let Some(w) = self.weight_from_pairings(&c) {
                if self.height(&w) <= max_height {
                    out.push(w);
                }
            }
            let mut k = 0;
            loop {
                if k == r {
                    return Ok(self.sort_weights(out));
                }
                c[k] += 1;
                if c[k] <= max_height {
                    break;
                }
                c[k] = 0;
                k += 1;
            }
        }
    }

    /// Sorts by (height, coordinates) and removes duplicates.
    pub fn sort_weights(&self, mut ws: Vec<Weight>) -> Vec<Weight> {
        ws.sort_by_cached_key(|w| (self.height(w), w.clone()));
        ws.dedup();
        ws
    }

    /// `X⁺[≤ μ]` united over the generators.
    pub fn saturate(&self, generators: &[Weight]) -> Result<SaturatedSet, RootDataError> {
        let mut elements: BTreeSet<Weight> = BTreeSet::new();
        for mu in generators {
            self.check_rank(mu)?;
            if !self.is_dominant(mu) {
                return Err(RootDataError::NotDominant(mu.clone()));
            }
            let low = self.lowest_in_orbit(mu);
            let bounds = self.root_lattice_coords(&mu.sub(&low)).expect("μ - w₀μ lies in the root lattice");
            // every dominant λ ≤ μ satisfies λ ≥ w₀μ, so the box covers them
            let mut n = vec![0i64; bounds.len()];
            'boxloop: loop {
                let lambda = mu.sub(&self.root_combination(&n));
                if self.is_dominant(&lambda) {
                    elements.insert(lambda);
                }
                let mut k = 0;
                loop {
                    if k == n.len() {
                        break 'boxloop;
                    }
                    n[k] += 1;
                    if n[k] <= bounds[k] {
                        break;
                    }
                    n[k] = 0;
                    k += 1;
                }
            }
        }
        if elements.is_empty() {
            return Err(RootDataError::Invalid(vec!["a saturated set must be nonempty".into()]));
        }
        Ok(SaturatedSet { elements: self.sort_weights(elements.into_iter().collect()) })
    }

    /// Wraps an explicit set, checking that it is saturated.
    pub fn saturated_set(&self, elements: Vec<Weight>) -> Result<SaturatedSet, RootDataError> {
        let closure = self.saturate(&elements)?;
        let given: BTreeSet<&Weight> = elements.iter().collect();
        if closure.elements.iter().any(|w| !given.contains(w)) {
            return Err(RootDataError::Invalid(vec![format!(
                "{{{}}} is not saturated",
                elements.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(", ")
            )]));
        }
        Ok(closure)
    }

    /// `Wπ`: the union of the orbits of the elements of `π`, sorted.
    pub fn orbit_union(&self, pi: &SaturatedSet) -> Vec<Weight> {
        let all: BTreeSet<Weight> = pi.elements.iter().flat_map(|w| self.weyl_orbit(w)).collect();
        all.into_iter().collect()
    }

    /// Every nonempty saturated set whose elements have height at most
    /// `max_height`, i.e. every nonempty order ideal of that finite poset.
    pub fn saturated_sets_up_to(&self, max_height: i64) -> Result<Vec<SaturatedSet>, RootDataError> {
        let pool = self.dominant_weights_up_to(max_height)?;
        let n = pool.len();
        let below: Vec<Vec<usize>> = (0..n)
            .map(|a| (0..n).filter(|&b| b != a && self.dominance_leq(&pool[b], &pool[a])).collect())
            .collect();
        let mut out = Vec::new();
        let mut current = vec![false; n];
        self.collect_ideals(&pool, &below, 0, &mut current, &mut out);
        Ok(out)
    }

    fn collect_ideals(
        &self,
        pool: &[Weight],
        below: &[Vec<usize>],
        k: usize,
        current: &mut Vec<bool>,
        out: &mut Vec<SaturatedSet>,
    ) {
        if k == pool.len() {
            let elements: Vec<Weight> = (0..pool.len()).filter(|&i| current[i]).map(|i| pool[i].clone()).collect();
            if !elements.is_empty() {
                // pool order is already (height, coordinates)
                out.push(SaturatedSet { elements });
            }
            return;
        }
        // pool is sorted by height, so everything below k was decided already
        current[k] = false;
        self.collect_ideals(pool, below, k + 1, current, out);
        if below[k].iter().all(|&b| current[b]) {
            current[k] = true;
            self.collect_ideals(pool, below, k + 1, current, out);
            current[k] = false;
        }
    }

    pub fn check_rank(&self, w: &Weight) -> Result<(), RootDataError> {
        if w.0.len() != self.rank_x() {
            return Err(RootDataError::RankMismatch {
                weight: w.to_string(),
                got: w.0.len(),
                expected: self.rank_x(),
            });
        }
        Ok(())
    }

    /// Stable textual description, used for cache keys and reports.
    pub fn canonical_string(&self) -> String {
        let rows = |m: &[Vec<i64>]| {
            m.iter()
                .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                .collect::<Vec<_>>()
                .join(";")
        };
        let roots: Vec<String> = self.simple_roots.iter().map(|w| w.to_string()).collect();
        let coroots: Vec<String> = self.simple_coroots.iter().map(|w| w.to_string()).collect();
        format!(
            "form[{}] pairing[{}] roots[{}] coroots[{}]",
            rows(&self.cartan.form),
            rows(&self.pairing),
            roots.join(""),
            coroots.join("")
        )
    }
}

fn int_matrix(rows: &[Vec<i64>]) -> Matrix<BigRational> {
    let cols = rows.first().map_or(0, |r| r.len());
    Matrix::from_fn(rows.len(), cols, |r, c| BigRational::from_integer(BigInt::from(rows[r][c])))
}

/// A finite nonempty saturated subset of `X⁺`, sorted by (height, coordinates).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SaturatedSet {
    elements: Vec<Weight>,
}

impl SaturatedSet {
    pub fn elements(&self) -> &[Weight] {
        &self.elements
    }

    pub fn contains(&self, w: &Weight) -> bool {
        self.elements.contains(w)
    }

    pub fn is_subset(&self, other: &SaturatedSet) -> bool {
        self.elements.iter().all(|w| other.contains(w))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Canonical key, e.g. `{(0),(2)}`.
    pub fn key(&self) -> String {
        let parts: Vec<String> = self.elements.iter().map(|w| w.to_string()).collect();
        format!("{{{}}}", parts.join(","))
    }

    /// Maximum height of an element.
    pub fn height(&self, datum: &RootDatum) -> i64 {
        self.elements.iter().map(|w| datum.height(w)).max().unwrap_or(0)
    }
}

impl fmt::Display for SaturatedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(c: &[i64]) -> Weight {
        Weight(c.to_vec())
    }

    #[test]
    fn validation_examples() {
        let a2 = RootDatum::preset("A2").unwrap();
        let rep = a2.validate();
        assert!(rep.is_valid() && rep.finite_type);

        let affine = RootDatum::new_unchecked(
            "A1~",
            vec![vec![2, -2], vec![-2, 2]],
            vec![vec![1, 0], vec![0, 1]],
            vec![w(&[2, -2]), w(&[-2, 2])],
            vec![Coweight(vec![1, 0]), Coweight(vec![0, 1])],
        );
        let rep = affine.validate();
        assert!(!rep.finite_type);
        assert!(rep.failures.iter().any(|f| f.contains("finite type")));

        let asym = RootDatum::new_unchecked(
            "bad",
            vec![vec![2, -1], vec![-3, 2]],
            vec![vec![1, 0], vec![0, 1]],
            vec![w(&[2, -1]), w(&[-3, 2])],
            vec![Coweight(vec![1, 0]), Coweight(vec![0, 1])],
        );
        assert!(asym.validate().failures.iter().any(|f| f.contains("not symmetric")));
    }

    #[test]
    fn dominance_examples() {
        let a1 = RootDatum::preset("A1").unwrap();
        assert!(a1.dominance_leq(&w(&[0]), &w(&[2])));
        assert!(!a1.dominance_leq(&w(&[1]), &w(&[2])));
        let a2 = RootDatum::preset("A2").unwrap();
        let top = a2.simple_root(0).add(a2.simple_root(1));
        assert!(a2.dominance_leq(&w(&[0, 0]), &top));
    }

    #[test]
    fn orbit_examples() {
        let a1 = RootDatum::preset("A1").unwrap();
        assert_eq!(a1.weyl_orbit(&w(&[0])), vec![w(&[0])]);
        assert_eq!(a1.weyl_orbit(&w(&[2])), vec![w(&[-2]), w(&[2])]);
        let a2 = RootDatum::preset("A2").unwrap();
        let orbit: BTreeSet<Weight> = a2.weyl_orbit(&w(&[1, 0])).into_iter().collect();
        assert_eq!(orbit, BTreeSet::from([w(&[1, 0]), w(&[-1, 1]), w(&[0, -1])]));
    }

    #[test]
    fn positive_root_examples() {
        assert_eq!(RootDatum::preset("A1").unwrap().positive_roots().len(), 1);
        let a2 = RootDatum::preset("A2").unwrap();
        let roots: Vec<Weight> = a2.positive_roots().into_iter().map(|r| r.0).collect();
        let sum = a2.simple_root(0).add(a2.simple_root(1));
        assert_eq!(roots, vec![a2.simple_root(0).clone(), a2.simple_root(1).clone(), sum]);
        assert_eq!(RootDatum::preset("B2").unwrap().positive_roots().len(), 4);
    }

    #[test]
    fn coroots_pair_to_two() {
        for name in RootDatum::preset_names() {
            let d = RootDatum::preset(name).unwrap();
            for (a, h) in d.positive_roots() {
                assert_eq!(d.pair(&h, &a), 2, "{name}: root {a}");
            }
        }
    }

    #[test]
    fn saturate_examples() {
        let a1 = RootDatum::preset("A1").unwrap();
        assert_eq!(a1.saturate(&[w(&[2])]).unwrap().elements(), &[w(&[0]), w(&[2])]);
        assert_eq!(a1.saturate(&[w(&[1])]).unwrap().elements(), &[w(&[1])]);
        let a2 = RootDatum::preset("A2").unwrap();
        assert_eq!(a2.saturate(&[w(&[1, 1])]).unwrap().elements(), &[w(&[0, 0]), w(&[1, 1])]);
        assert!(matches!(a2.saturate(&[w(&[-1, 0])]), Err(RootDataError::NotDominant(_))));
    }

    #[test]
    fn invariant_form_examples() {
        let a1 = RootDatum::preset("A1").unwrap();
        let alpha = a1.simple_root(0).clone();
        assert_eq!(a1.invariant_form(&alpha, &alpha), BigRational::from_integer(2.into()));
        assert_eq!(a1.invariant_form(&w(&[1]), &w(&[1])), BigRational::new(1.into(), 2.into()));
        let a2 = RootDatum::preset("A2").unwrap();
        assert_eq!(a2.invariant_form(&w(&[1, 0]), a2.simple_root(0)), BigRational::one());
    }

    #[test]
    fn invariant_form_restricts_to_cartan_form() {
        for name in RootDatum::preset_names() {
            let d = RootDatum::preset(name).unwrap();
            for i in 0..d.rank() {
                for j in 0..d.rank() {
                    let got = d.invariant_form(d.simple_root(i), d.simple_root(j));
                    assert_eq!(got, BigRational::from_integer(d.cartan().form[i][j].into()));
                }
            }
        }
    }

    #[test]
    fn heights_of_small_weights() {
        let a1 = RootDatum::preset("A1").unwrap();
        assert_eq!(a1.height(&w(&[3])), 3);
        let a2 = RootDatum::preset("A2").unwrap();
        assert_eq!(a2.height(&w(&[1, 1])), 4);
        let b2 = RootDatum::preset("B2").unwrap();
        assert!(b2.dominant_weights_up_to(6).unwrap().len() >= 4);
    }
}
