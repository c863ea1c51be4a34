//! Exterior forms with exact or floating coefficients.
//!
//! A [`Form`] is a k-covector on ℝⁿ stored sparsely as a map from strictly
//! increasing multi-indices to coefficients; zero coefficients are never
//! stored, so structural equality is semantic equality. The coefficient
//! type is any [`Scalar`]: exact rationals for algebraic identities, `f64`
//! inside the flow integrator. Dense coefficient vectors (in the
//! lexicographic basis order of [`MultiIndex::all`]) convert back and forth
//! for linear algebra.

use crate::linalg::Matrix;
use crate::multiindex::MultiIndex;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;

/// Alternating k-form on an n-dimensional space.
#[derive(Clone, PartialEq)]
pub struct Form<S> {
    n: usize,
    k: usize,
    terms: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> Form<S> {
    pub fn zero(n: usize, k: usize) -> Self {
        Form { n, k, terms: BTreeMap::new() }
    }

    /// Single basis monomial `e^{i₁…i_k}` with coefficient 1.
    pub fn basis(n: usize, idx: &[u8]) -> Self {
        Self::term(n, S::one(), idx)
    }

    /// `coeff · e^{i₁…i_k}`; the indices may come in any order and the
    /// reordering sign is absorbed into the coefficient.
    pub fn term(n: usize, coeff: S, idx: &[u8]) -> Self {
        let k = idx.len();
        let mut f = Form::zero(n, k);
        if coeff.is_zero() {
            return f;
        }
        let (sign, mi) =
            MultiIndex::from_unsorted(idx).expect("repeated index in a form monomial");
        assert!(
            mi.indices().iter().all(|&i| 1 <= i && i as usize <= n),
            "index out of range 1..={n}"
        );
        let c = if sign < 0 { coeff.neg() } else { coeff };
        f.terms.insert(mi, c);
        f
    }

    /// Build from `(coeff, indices)` pairs, summing repeated monomials.
    pub fn from_terms(n: usize, k: usize, terms: &[(S, &[u8])]) -> Self {
        let mut f = Form::zero(n, k);
        for (c, idx) in terms {
            assert_eq!(idx.len(), k, "mixed degrees in from_terms");
            f = f.add(&Form::term(n, c.clone(), idx));
        }
        f
    }

    pub fn space_dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    /// Dimension of Λᵏ(ℝⁿ)*.
    pub fn basis_dim(&self) -> usize {
        crate::multiindex::binomial(self.n, self.k)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mi: &MultiIndex) -> S {
        self.terms.get(mi).cloned().unwrap_or_else(S::zero)
    }

    /// Coefficient of the monomial on the given (unordered) indices,
    /// including the reordering sign.
    pub fn coeff_on(&self, idx: &[u8]) -> S {
        match MultiIndex::from_unsorted(idx) {
            None => S::zero(),
            Some((sign, mi)) => {
                let c = self.coeff(&mi);
                if sign < 0 {
                    c.neg()
                } else {
                    c
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn insert_add(&mut self, mi: MultiIndex, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&mi) {
            None => {
                self.terms.insert(mi, c);
            }
            Some(old) => {
                let s = old.add(&c);
                if !s.is_zero() {
                    self.terms.insert(mi, s);
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.n, self.k), (rhs.n, rhs.k), "form shape mismatch");
        let mut out = self.clone();
        for (mi, c) in &rhs.terms {
            out.insert_add(mi.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Form::zero(self.n, self.k);
        }
        self.map(|c| c.mul(s))
    }

    /// Apply `f` to every coefficient (dropping any that become zero).
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Form<T> {
        let mut terms = BTreeMap::new();
        for (mi, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                terms.insert(mi.clone(), v);
            }
        }
        Form { n: self.n, k: self.k, terms }
    }

    pub fn to_f64(&self) -> Form<f64> {
        self.map(Scalar::to_f64)
    }

    /// Exterior product. Degrees above n give the zero form of that degree.
    pub fn wedge(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "forms on different spaces");
        let mut out = Form::zero(self.n, self.k + rhs.k);
        if self.k + rhs.k > self.n {
            return out;
        }
        for (mi, c) in &self.terms {
            for (mj, d) in &rhs.terms {
                if let Some((sign, mk)) = mi.wedge(mj) {
                    let mut v = c.mul(d);
                    if sign < 0 {
                        v = v.neg();
                    }
                    out.insert_add(mk, v);
                }
            }
        }
        out
    }

    /// Interior product `v ⌟ self` with the vector `v = Σ vᵢ eᵢ`.
    pub fn contract(&self, v: &[S]) -> Self {
        assert_eq!(v.len(), self.n, "vector length mismatch");
        assert!(self.k >= 1, "cannot contract a 0-form");
        let mut out = Form::zero(self.n, self.k - 1);
        for (mi, c) in &self.terms {
            for (pos, &i) in mi.indices().iter().enumerate() {
                let vi = &v[i as usize - 1];
                if vi.is_zero() {
                    continue;
                }
                let mut coeff = c.mul(vi);
                if pos % 2 == 1 {
                    coeff = coeff.neg();
                }
                out.insert_add(mi.remove_at(pos), coeff);
            }
        }
        out
    }

    /// Evaluate on k vectors (each of length n): `Σ_I c_I det [vⱼ^{i}]`.
    pub fn eval(&self, vectors: &[Vec<S>]) -> S {
        assert_eq!(vectors.len(), self.k, "need exactly k vectors");
        for v in vectors {
            assert_eq!(v.len(), self.n);
        }
        let mut acc = S::zero();
        for (mi, c) in &self.terms {
            let m = Matrix::from_fn(self.k, self.k, |a, b| {
                vectors[b][mi.indices()[a] as usize - 1].clone()
            });
            acc = acc.add(&c.mul(&m.det()));
        }
        acc
    }

    /// Evaluate on basis vectors `(e_{j₁}, …, e_{j_k})` in the given order.
    pub fn eval_basis(&self, idx: &[u8]) -> S {
        assert_eq!(idx.len(), self.k);
        self.coeff_on(idx)
    }

    /// Pullback under the linear map `A`, with `a[(i,j)] = eⁱ(A e_j)`:
    /// `(A*ω)(v₁,…,v_k) = ω(A v₁, …, A v_k)`. Basis covectors transform as
    /// `A* eⁱ = Σ_j a[(i,j)] eʲ`.
    pub fn pullback(&self, a: &Matrix<S>) -> Self {
        assert_eq!(a.rows(), self.n);
        assert_eq!(a.cols(), self.n);
        let rows: Vec<Form<S>> = (0..self.n)
            .map(|i| {
                let mut f = Form::zero(self.n, 1);
                for j in 0..self.n {
                    f.insert_add(MultiIndex::new(&[j as u8 + 1]), a[(i, j)].clone());
                }
                f
            })
            .collect();
        let mut out = Form::zero(self.n, self.k);
        for (mi, c) in &self.terms {
            let mut w = Form::term(self.n, c.clone(), &[]);
            for &i in mi.indices() {
                w = w.wedge(&rows[i as usize - 1]);
            }
            out = out.add(&w);
        }
        out
    }

    /// Coefficient of the volume monomial `e^{1…n}` (top-degree forms only).
    pub fn top_coefficient(&self) -> S {
        assert_eq!(self.k, self.n, "not a top-degree form");
        self.coeff(&MultiIndex::empty().complement(self.n))
    }

    /// The same form viewed on a larger space (extra covectors unused).
    pub fn extended(&self, new_n: usize) -> Self {
        assert!(new_n >= self.n, "ambient dimension can only grow");
        let mut f = Form::zero(new_n, self.k);
        f.terms = self.terms.clone();
        f
    }

    /// Dense coefficient vector in the lexicographic basis order.
    pub fn to_coeff_vec(&self) -> Vec<S> {
        let mut v = vec![S::zero(); self.basis_dim()];
        for (mi, c) in &self.terms {
            v[mi.rank(self.n)] = c.clone();
        }
        v
    }

    pub fn from_coeff_vec(n: usize, k: usize, v: &[S]) -> Self {
        let basis = MultiIndex::all(n, k);
        assert_eq!(v.len(), basis.len(), "coefficient vector length mismatch");
        let mut f = Form::zero(n, k);
        for (mi, c) in basis.into_iter().zip(v) {
            if !c.is_zero() {
                f.terms.insert(mi, c.clone());
            }
        }
        f
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> S {
        let mut m = S::zero();
        for c in self.terms.values() {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Difference measured in f64 (largest coefficient of `self − rhs`).
    pub fn max_abs_diff_f64(&self, rhs: &Self) -> f64 {
        self.sub(rhs).max_abs_coeff().to_f64()
    }
}

impl<S: Scalar> fmt::Display for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let one = S::one();
        let minus_one = S::one().neg();
        for (pos, (mi, c)) in self.terms.iter().enumerate() {
            let mono = mi.format(self.n);
            let lead = pos == 0;
            if *c == one && self.k > 0 {
                write!(f, "{}{}", if lead { "" } else { " + " }, mono)?;
            } else if *c == minus_one && self.k > 0 {
                write!(f, "{}{}", if lead { "-" } else { " - " }, mono)?;
            } else {
                let (sign, mag) = if c.abs() == *c { ("", c.clone()) } else { ("-", c.abs()) };
                let sep = if lead {
                    sign.to_string()
                } else if sign.is_empty() {
                    " + ".to_string()
                } else {
                    " - ".to_string()
                };
                if self.k == 0 {
                    write!(f, "{sep}{mag}")?;
                } else {
                    write!(f, "{sep}{mag}*{mono}")?;
                }
            }
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Debug for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
