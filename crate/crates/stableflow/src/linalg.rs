//! Dense matrices over an abstract scalar ring.
//!
//! Everything here targets the small sizes of this library (n ≤ 70 columns
//! for Λ⁴(ℝ⁸)*). Elimination is plain Gauss–Jordan: over [`Rational`]
//! (`EXACT = true`) it is exact with pivots chosen at the smallest column
//! index and the first admissible row, so reduced echelon forms — and hence
//! kernel and row-space bases — are canonical and deterministic. Over `f64`
//! the pivot row is chosen by largest magnitude and near-zeros are truncated
//! against a relative threshold.

use crate::scalar::Scalar;
use std::fmt;

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    a: Vec<S>,
}

/// Reduced row echelon form with its pivot positions `(row, col)`.
#[derive(Clone)]
pub struct Rref<S> {
    pub matrix: Matrix<S>,
    pub pivots: Vec<(usize, usize)>,
}

/// Relative threshold under which float pivots count as zero.
const FLOAT_RANK_EPS: f64 = 1e-11;

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, a: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, a: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, a: self.a.iter().map(f).collect() }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Scalar::to_f64)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = S::zero();
            for k in 0..self.cols {
                acc = acc.add(&self[(i, k)].mul(&rhs[(k, j)]));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self[(i, k)].mul(&v[k]));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].add(&rhs[(i, j)]))
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].mul(s))
    }

    /// Largest absolute entry (as the scalar ring's abs).
    pub fn max_abs(&self) -> S {
        let mut m = S::zero();
        for v in &self.a {
            let av = v.abs();
            if av > m {
                m = av;
            }
        }
        m
    }

    fn zero_threshold(&self) -> Option<S> {
        if S::EXACT {
            None
        } else {
            let scale = self.max_abs();
            let eps = S::from_ratio(1, (1.0 / FLOAT_RANK_EPS) as i64);
            Some(if scale.is_zero() { eps } else { eps.mul(&scale) })
        }
    }

    /// Reduced row echelon form together with the pivot columns.
    ///
    /// Exact mode: first nonzero row per column (deterministic canonical
    /// form). Float mode: partial pivoting by magnitude, entries below a
    /// relative threshold treated as zero.
    pub fn rref(&self) -> Rref<S> {
        let mut m = self.clone();
        let thresh = self.zero_threshold();
        let is_zero = |v: &S| match &thresh {
            None => v.is_zero(),
            Some(t) => v.abs() <= *t,
        };
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            // Pivot row: first admissible (exact) or largest magnitude (float).
            let mut pr = None;
            for i in r..m.rows {
                if !is_zero(&m[(i, c)]) {
                    match (&pr, S::EXACT) {
                        (None, _) => pr = Some(i),
                        (_, true) => break,
                        (Some(p), false) => {
                            if m[(i, c)].abs() > m[(*p, c)].abs() {
                                pr = Some(i);
                            }
                        }
                    }
                }
            }
            let Some(p) = pr else { continue };
            m.swap_rows(r, p);
            let inv = m[(r, c)].clone();
            for j in c..m.cols {
                m[(r, j)] = m[(r, j)].div(&inv);
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let delta = f.mul(&m[(r, j)]);
                        m[(i, j)] = m[(i, j)].sub(&delta);
                    }
                    m[(i, c)] = S::zero();
                }
            }
            pivots.push((r, c));
            r += 1;
        }
        if !S::EXACT {
            // Truncate residue left by cancellation so downstream zero tests
            // see clean entries. The threshold is per column: row operations
            // only ever combine entries of the same column, so residue is
            // relative to the column's own input scale. A column living far
            // below the matrix scale — an augmented right-hand side with a
            // small solution, say — carries real information there and must
            // not be wiped out by a matrix-wide threshold.
            let eps = S::from_ratio(1, (1.0 / FLOAT_RANK_EPS) as i64);
            for c in 0..self.cols {
                let mut colmax = S::zero();
                for i in 0..self.rows {
                    let av = self[(i, c)].abs();
                    if av > colmax {
                        colmax = av;
                    }
                }
                if colmax.is_zero() {
                    continue;
                }
                let t = eps.mul(&colmax);
                for i in 0..m.rows {
                    if m[(i, c)].abs() <= t {
                        m[(i, c)] = S::zero();
                    }
                }
            }
        }
        Rref { matrix: m, pivots }
    }

    /// Canonical kernel basis (one vector per free column, in increasing
    /// column order, free coordinate set to 1).
    pub fn kernel(&self) -> Vec<Vec<S>> {
        let rref = self.rref();
        let pivot_cols: Vec<usize> = rref.pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![S::zero(); self.cols];
            v[free] = S::one();
            for &(r, c) in &rref.pivots {
                v[c] = rref.matrix[(r, free)].neg();
            }
            basis.push(v);
        }
        basis
    }

    /// Canonical basis of the row space (nonzero rows of the RREF).
    pub fn row_space_basis(&self) -> Vec<Vec<S>> {
        let rref = self.rref();
        rref.pivots.iter().map(|&(r, _)| rref.matrix.row(r).to_vec()).collect()
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Determinant by Gaussian elimination with row swaps.
    pub fn det(&self) -> S {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let mut m = self.clone();
        let thresh = self.zero_threshold();
        let is_zero = |v: &S| match &thresh {
            None => v.is_zero(),
            Some(t) => v.abs() <= *t,
        };
        let mut det = S::one();
        for c in 0..m.cols {
            let mut pr = None;
            for i in c..m.rows {
                if !is_zero(&m[(i, c)]) {
                    match (&pr, S::EXACT) {
                        (None, _) => pr = Some(i),
                        (_, true) => break,
                        (Some(p), false) => {
                            if m[(i, c)].abs() > m[(*p, c)].abs() {
                                pr = Some(i);
                            }
                        }
                    }
                }
            }
            let Some(p) = pr else { return S::zero() };
            if p != c {
                m.swap_rows(c, p);
                det = det.neg();
            }
            det = det.mul(&m[(c, c)]);
            let inv = m[(c, c)].clone();
            for i in c + 1..m.rows {
                if !m[(i, c)].is_zero() {
                    let f = m[(i, c)].div(&inv);
                    for j in c..m.cols {
                        let delta = f.mul(&m[(c, j)]);
                        m[(i, j)] = m[(i, j)].sub(&delta);
                    }
                }
            }
        }
        det
    }

    /// Solve `self · x = b` for square invertible `self`.
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        assert_eq!(self.rows, self.cols, "solve expects a square matrix");
        assert_eq!(self.rows, b.len());
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let rref = aug.rref();
        if rref.pivots.len() != self.cols || rref.pivots.iter().any(|&(_, c)| c == self.cols) {
            return None;
        }
        Some((0..self.cols).map(|i| rref.matrix[(i, self.cols)].clone()).collect())
    }

    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = S::one();
        }
        let rref = aug.rref();
        if rref.pivots.len() != n || rref.pivots.iter().any(|&(_, c)| c >= n) {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| rref.matrix[(i, n + j)].clone()))
    }

    /// Least-squares solution of the (possibly rank-deficient) system
    /// `self · x ≈ b` via the normal equations; free variables are pinned to
    /// zero, which makes the answer deterministic.
    pub fn least_squares(&self, b: &[S]) -> Vec<S> {
        assert_eq!(self.rows, b.len());
        let at = self.transpose();
        let ata = at.mul(self);
        let atb = at.mul_vec(b);
        let mut aug = Matrix::zeros(ata.rows, ata.cols + 1);
        for i in 0..ata.rows {
            for j in 0..ata.cols {
                aug[(i, j)] = ata[(i, j)].clone();
            }
            aug[(i, ata.cols)] = atb[i].clone();
        }
        let rref = aug.rref();
        let mut x = vec![S::zero(); self.cols];
        for &(r, c) in &rref.pivots {
            if c < self.cols {
                x[c] = rref.matrix[(r, ata.cols)].clone();
            }
        }
        x
    }

    /// ‖self·x − b‖₂ as f64.
    pub fn residual_norm(&self, x: &[S], b: &[S]) -> f64 {
        let ax = self.mul_vec(x);
        ax.iter()
            .zip(b)
            .map(|(l, r)| {
                let d = l.sub(r).to_f64();
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.a.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl<S> std::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.a[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.a[i * self.cols + j]
    }
}

impl<S: Scalar> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Subspace of ℝⁿ given by a canonical (RREF) basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<S> {
    ambient: usize,
    basis: Vec<Vec<S>>,
}

impl<S: Scalar> Subspace<S> {
    /// Span of the given vectors; the stored basis is the canonical RREF one.
    pub fn span(ambient: usize, vectors: &[Vec<S>]) -> Self {
        assert!(vectors.iter().all(|v| v.len() == ambient), "vector length mismatch");
        if vectors.is_empty() {
            return Subspace { ambient, basis: Vec::new() };
        }
        let basis = Matrix::from_rows(vectors.to_vec()).row_space_basis();
        Subspace { ambient, basis }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: (0..ambient)
                .map(|i| {
                    let mut v = vec![S::zero(); ambient];
                    v[i] = S::one();
                    v
                })
                .collect(),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<S>] {
        &self.basis
    }

    pub fn contains(&self, v: &[S]) -> bool {
        assert_eq!(v.len(), self.ambient);
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        Matrix::from_rows(rows).rank() == self.dim()
    }

    pub fn contains_subspace(&self, other: &Subspace<S>) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    /// Basis of the annihilator {f : f(v) = 0 ∀ v ∈ self} in coordinates.
    pub fn annihilator(&self) -> Vec<Vec<S>> {
        if self.basis.is_empty() {
            return Matrix::<S>::identity(self.ambient)
                .row_space_basis();
        }
        Matrix::from_rows(self.basis.clone()).kernel()
    }
}
