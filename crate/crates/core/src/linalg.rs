//! Dense exact linear algebra over any [`Field`] context.

use crate::qarith::Field;

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Clone> Matrix<E> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<E>>, cols: usize) -> Self {
        let n = rows.len();
        let data: Vec<E> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), n * cols, "ragged rows");
        Matrix { rows: n, cols, data }
    }

    pub fn zeros<F: Field<Elem = E>>(field: &F, rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity<F: Field<Elem = E>>(field: &F, n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { field.one() } else { field.zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &E {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: E) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[E] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[E] {
        &self.data
    }

    pub fn map<T: Clone>(&self, f: impl FnMut(&E) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<T: Clone, Er>(&self, f: impl FnMut(&E) -> Result<T, Er>) -> Result<Matrix<T>, Er> {
        let data = self.data.iter().map(f).collect::<Result<Vec<T>, Er>>()?;
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |r, c| self.get(rows[r], cols[c]).clone())
    }

    pub fn is_zero<F: Field<Elem = E>>(&self, field: &F) -> bool {
        self.data.iter().all(|e| field.is_zero(e))
    }

    pub fn add<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| field.add(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in sub");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| field.sub(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale<F: Field<Elem = E>>(&self, field: &F, s: &E) -> Self {
        if field.is_zero(s) {
            return Self::zeros(field, self.rows, self.cols);
        }
        self.map(|e| if field.is_zero(e) { field.zero() } else { field.mul(s, e) })
    }

    pub fn mul<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let mut out = Self::zeros(field, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if field.is_zero(a) {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if field.is_zero(b) {
                        continue;
                    }
                    let idx = r * out.cols + c;
                    out.data[idx] = field.add(&out.data[idx], &field.mul(a, b));
                }
            }
        }
        out
    }

    pub fn mul_vec<F: Field<Elem = E>>(&self, field: &F, v: &[E]) -> Vec<E> {
        assert_eq!(self.cols, v.len(), "shape mismatch in mul_vec");
        (0..self.rows)
            .map(|r| {
                let mut acc = field.zero();
                for (a, b) in self.row(r).iter().zip(v) {
                    if !field.is_zero(a) && !field.is_zero(b) {
                        acc = field.add(&acc, &field.mul(a, b));
                    }
                }
                acc
            })
            .collect()
    }

    /// Indices of rows that are independent of all earlier rows.
    pub fn independent_rows<F: Field<Elem = E>>(&self, field: &F) -> Vec<usize> {
        let mut ech = Echelon::new(field.clone(), self.cols);
        (0..self.rows).filter(|&r| ech.insert(self.row(r).to_vec())).collect()
    }

    pub fn rank<F: Field<Elem = E>>(&self, field: &F) -> usize {
        self.independent_rows(field).len()
    }

    /// Gauss–Jordan inverse, or `None` when singular.
    pub fn inverse<F: Field<Elem = E>>(&self, field: &F) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(field, n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !field.is_zero(a.get(r, col)))?;
            if pivot != col {
                for c in 0..n {
                    a.data.swap(pivot * n + c, col * n + c);
                    inv.data.swap(pivot * n + c, col * n + c);
                }
            }
            let p = field.inv(a.get(col, col)).unwrap();
            for c in 0..n {
                a.data[col * n + c] = field.mul(&p, &a.data[col * n + c]);
                inv.data[col * n + c] = field.mul(&p, &inv.data[col * n + c]);
            }
            for r in 0..n {
                if r == col || field.is_zero(a.get(r, col)) {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for c in 0..n {
                    let t = field.mul(&factor, &a.data[col * n + c]);
                    a.data[r * n + c] = field.sub(&a.data[r * n + c], &t);
                    let t = field.mul(&factor, &inv.data[col * n + c]);
                    inv.data[r * n + c] = field.sub(&inv.data[r * n + c], &t);
                }
            }
        }
        Some(inv)
    }

    /// Determinant by fraction-based elimination.
    pub fn determinant<F: Field<Elem = E>>(&self, field: &F) -> E {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = field.one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !field.is_zero(a.get(r, col))) else {
                return field.zero();
            };
            if pivot != col {
                for c in 0..n {
                    a.data.swap(pivot * n + c, col * n + c);
                }
                det = field.neg(&det);
            }
            let p = a.get(col, col).clone();
            det = field.mul(&det, &p);
            let p_inv = field.inv(&p).unwrap();
            for r in col + 1..n {
                if field.is_zero(a.get(r, col)) {
                    continue;
                }
                let factor = field.mul(a.get(r, col), &p_inv);
                for c in col..n {
                    let t = field.mul(&factor, &a.data[col * n + c]);
                    a.data[r * n + c] = field.sub(&a.data[r * n + c], &t);
                }
            }
        }
        det
    }
}

/// Incrementally maintained reduced row echelon basis of a subspace of `F^n`.
///
/// The pivot of a vector is its first nonzero coordinate. Stored rows have
/// pivot entry 1 and zeros in every other stored pivot column, so the
/// remainder of a reduction does not depend on insertion history.
#[derive(Clone, Debug)]
pub struct Echelon<F: Field> {
    field: F,
    len: usize,
    rows: Vec<Vec<F::Elem>>,
    pivots: Vec<usize>,
}

impl<F: Field> Echelon<F> {
    pub fn new(field: F, len: usize) -> Self {
        Echelon { field, len, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn vector_len(&self) -> usize {
        self.len
    }

    pub fn rows(&self) -> &[Vec<F::Elem>] {
        &self.rows
    }

    /// Remainder of `v` modulo the current span.
    pub fn reduce(&self, mut v: Vec<F::Elem>) -> Vec<F::Elem> {
        assert_eq!(v.len(), self.len, "vector length mismatch");
        let f = &self.field;
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if f.is_zero(&v[p]) {
                continue;
            }
            let c = v[p].clone();
            for (x, y) in v.iter_mut().zip(row) {
                if !f.is_zero(y) {
                    *x = f.sub(x, &f.mul(&c, y));
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[F::Elem]) -> bool {
        let r = self.reduce(v.to_vec());
        r.iter().all(|x| self.field.is_zero(x))
    }

    /// Adds `v` to the span; returns whether the span grew.
    pub fn insert(&mut self, v: Vec<F::Elem>) -> bool {
        let f = self.field.clone();
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !f.is_zero(x)) else {
            return false;
        };
        let inv = f.inv(&r[p]).unwrap();
        for x in r.iter_mut() {
            if !f.is_zero(x) {
                *x = f.mul(x, &inv);
            }
        }
        for row in self.rows.iter_mut() {
            if f.is_zero(&row[p]) {
                continue;
            }
            let c = row[p].clone();
            for (x, y) in row.iter_mut().zip(&r) {
                if !f.is_zero(y) {
                    *x = f.sub(x, &f.mul(&c, y));
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, r);
        true
    }
}
