//! Lie algebras presented by their Chevalley–Eilenberg differentials.
//!
//! An n-dimensional Lie algebra is stored as the list of 2-forms
//! `d e¹, …, d eⁿ`. Writing `d eᵐ = Σ_{i<j} aᵐᵢⱼ eⁱ∧eʲ`, the brackets are
//! recovered as `[eᵢ, eⱼ] = −Σ_m aᵐᵢⱼ e_m`, so that the invariant pairing
//! `dω(X, Y) = −ω([X, Y])` holds on 1-forms. The differential extends to
//! all degrees as an antiderivation; `d∘d = 0` is equivalent to the Jacobi
//! identity, and both sides of that equivalence are implemented
//! independently so they can check each other.

use crate::form::Form;
use crate::linalg::{Matrix, Subspace};
use crate::scalar::Scalar;
use thiserror::Error;

/// Lie algebra with a fixed basis `e₁, …, e_n`, presented dually.
#[derive(Clone, PartialEq)]
pub struct LieAlgebra<S> {
    dim: usize,
    /// `diff[m]` is `d e^{m+1}`, a 2-form on ℝⁿ.
    diff: Vec<Form<S>>,
}

/// A witnessed failure of the Jacobi identity.
#[derive(Debug, Error)]
#[error("Jacobi identity fails on (e{i}, e{j}, e{k}): cyclic sum = {residual}")]
pub struct JacobiDefect {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// Coordinates of [[eᵢ,eⱼ],e_k] + [[eⱼ,e_k],eᵢ] + [[e_k,eᵢ],eⱼ].
    pub residual: String,
}

impl<S: Scalar> LieAlgebra<S> {
    /// Build from the differentials of the dual basis; `diff[m]` is
    /// `d e^{m+1}`. The Jacobi identity is *not* checked here (the
    /// structure-constant calculus is useful on raw data too); call
    /// [`LieAlgebra::jacobi_check`] to validate.
    pub fn from_differentials(diff: Vec<Form<S>>) -> Self {
        let dim = diff.len();
        for (m, f) in diff.iter().enumerate() {
            assert_eq!(f.degree(), 2, "d e^{} must be a 2-form", m + 1);
            assert_eq!(f.space_dim(), dim, "d e^{} lives on the wrong space", m + 1);
        }
        LieAlgebra { dim, diff }
    }

    pub fn abelian(dim: usize) -> Self {
        Self::from_differentials((0..dim).map(|_| Form::zero(dim, 2)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `d eᵐ` for `m ∈ 1..=dim`.
    pub fn differential_of_basis(&self, m: usize) -> &Form<S> {
        &self.diff[m - 1]
    }

    pub fn differentials(&self) -> &[Form<S>] {
        &self.diff
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> LieAlgebra<T> {
        LieAlgebra { dim: self.dim, diff: self.diff.iter().map(|d| d.map(f)).collect() }
    }

    pub fn to_f64(&self) -> LieAlgebra<f64> {
        self.map(Scalar::to_f64)
    }

    /// Coordinates of `[eᵢ, eⱼ]` (1-based `i`, `j`).
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<S> {
        assert!(1 <= i && i <= self.dim && 1 <= j && j <= self.dim);
        (0..self.dim)
            .map(|m| self.diff[m].coeff_on(&[i as u8, j as u8]).neg())
            .collect()
    }

    /// `[x, y]` for arbitrary coordinate vectors.
    pub fn bracket(&self, x: &[S], y: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let mut out = vec![S::zero(); self.dim];
        for i in 1..=self.dim {
            if x[i - 1].is_zero() {
                continue;
            }
            for j in 1..=self.dim {
                if y[j - 1].is_zero() || i == j {
                    continue;
                }
                let f = x[i - 1].mul(&y[j - 1]);
                for (m, c) in self.bracket_basis(i, j).into_iter().enumerate() {
                    if !c.is_zero() {
                        out[m] = out[m].add(&c.mul(&f));
                    }
                }
            }
        }
        out
    }

    /// Direct check of the Jacobi identity on all basis triples. This does
    /// not go through the differential, so it is an independent oracle for
    /// `d∘d = 0`.
    pub fn jacobi_check(&self) -> Result<(), JacobiDefect> {
        let basis = |i: usize| {
            let mut v = vec![S::zero(); self.dim];
            v[i - 1] = S::one();
            v
        };
        for i in 1..=self.dim {
            for j in i + 1..=self.dim {
                for k in j + 1..=self.dim {
                    let (ei, ej, ek) = (basis(i), basis(j), basis(k));
                    let mut acc = self.bracket(&self.bracket(&ei, &ej), &ek);
                    for (a, b) in
                        [(self.bracket(&ej, &ek), &ei), (self.bracket(&ek, &ei), &ej)]
                    {
                        let t = self.bracket(&a, b);
                        for m in 0..self.dim {
                            acc[m] = acc[m].add(&t[m]);
                        }
                    }
                    if acc.iter().any(|v| !v.is_zero()) {
                        let residual = acc
                            .iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(", ");
                        return Err(JacobiDefect { i, j, k, residual: format!("({residual})") });
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether `d∘d = 0` on every basis 1-form (equivalent to Jacobi).
    pub fn differential_squares_to_zero(&self) -> bool {
        (1..=self.dim).all(|m| self.d(self.differential_of_basis(m)).is_zero())
    }

    /// Chevalley–Eilenberg differential, extended to degree k as an
    /// antiderivation: `d(α∧β) = dα∧β + (−1)^{|α|} α∧dβ`.
    pub fn d(&self, omega: &Form<S>) -> Form<S> {
        assert_eq!(omega.space_dim(), self.dim);
        let k = omega.degree();
        let mut out = Form::zero(self.dim, k + 1);
        if k >= self.dim {
            return out;
        }
        for (mi, c) in omega.terms() {
            let idx = mi.indices();
            for p in 0..idx.len() {
                // (−1)^p e^{i₁…i_{p-1}} ∧ d e^{i_p} ∧ e^{i_{p+1}…i_k}: the
                // sign is the cost of moving d past the first p one-forms;
                // it is NOT absorbed by wedging in place, because the
                // 2-form d e^{i_p} commutes with 1-forms.
                let coeff = if p % 2 == 0 { c.clone() } else { c.neg() };
                let mut w = Form::term(self.dim, coeff, &idx[..p]);
                w = w.wedge(&self.diff[idx[p] as usize - 1]);
                w = w.wedge(&Form::basis(self.dim, &idx[p + 1..]));
                out = out.add(&w);
            }
        }
        out
    }

    /// The differential computed from scratch by the alternating-sum
    /// formula `dω(X₀,…,X_k) = Σ_{a<b} (−1)^{a+b} ω([X_a,X_b], …, X̂_a, …,
    /// X̂_b, …)` on basis tuples. Quadratically slower than [`Self::d`];
    /// kept as an independent oracle.
    pub fn d_by_evaluation(&self, omega: &Form<S>) -> Form<S> {
        assert_eq!(omega.space_dim(), self.dim);
        let k = omega.degree();
        let mut out = Form::zero(self.dim, k + 1);
        if k >= self.dim {
            return out;
        }
        let basis = |i: u8| {
            let mut v = vec![S::zero(); self.dim];
            v[i as usize - 1] = S::one();
            v
        };
        for mj in crate::multiindex::MultiIndex::all(self.dim, k + 1) {
            let js = mj.indices();
            let mut coeff = S::zero();
            for a in 0..js.len() {
                for b in a + 1..js.len() {
                    let br = self.bracket(&basis(js[a]), &basis(js[b]));
                    if br.iter().all(S::is_zero) {
                        continue;
                    }
                    let mut vectors = vec![br];
                    for (p, &j) in js.iter().enumerate() {
                        if p != a && p != b {
                            vectors.push(basis(j));
                        }
                    }
                    let mut v = omega.eval(&vectors);
                    if (a + b) % 2 == 1 {
                        v = v.neg();
                    }
                    coeff = coeff.add(&v);
                }
            }
            if !coeff.is_zero() {
                out = out.add(&Form::term(self.dim, coeff, js));
            }
        }
        out
    }

    /// Lie derivative along the vector `x`, by Cartan's formula
    /// `L_x = ι_x∘d + d∘ι_x`.
    pub fn lie_derivative(&self, x: &[S], omega: &Form<S>) -> Form<S> {
        let a = self.d(omega).contract(x);
        if omega.degree() == 0 {
            return a;
        }
        a.add(&self.d(&omega.contract(x)))
    }

    /// Basis of the k-forms annihilated by the Lie derivatives along all
    /// the given vectors, in canonical (RREF) coordinates.
    pub fn invariant_forms(&self, k: usize, generators: &[Vec<S>]) -> Vec<Form<S>> {
        let dim_k = crate::multiindex::binomial(self.dim, k);
        let mut rows: Vec<Vec<S>> = Vec::new();
        let basis_forms = crate::multiindex::MultiIndex::all(self.dim, k);
        // Column j of the operator matrix is L_x applied to the j-th basis
        // monomial; stack one operator per generator and take the joint
        // kernel.
        for x in generators {
            let mut op = Matrix::zeros(dim_k, dim_k);
            for (j, mi) in basis_forms.iter().enumerate() {
                let image = self.lie_derivative(x, &Form::basis(self.dim, mi.indices()));
                for (mj, c) in image.terms() {
                    op[(mj.rank(self.dim), j)] = c.clone();
                }
            }
            for i in 0..dim_k {
                rows.push(op.row(i).to_vec());
            }
        }
        if rows.is_empty() {
            rows.push(vec![S::zero(); dim_k]);
        }
        Matrix::from_rows(rows)
            .kernel()
            .into_iter()
            .map(|v| Form::from_coeff_vec(self.dim, k, &v))
            .collect()
    }

    /// Closed k-forms (kernel of d in degree k).
    pub fn closed_forms(&self, k: usize) -> Vec<Form<S>> {
        let dim_k = crate::multiindex::binomial(self.dim, k);
        let dim_k1 = crate::multiindex::binomial(self.dim, k + 1);
        let mut op = Matrix::zeros(dim_k1, dim_k);
        for (j, mi) in crate::multiindex::MultiIndex::all(self.dim, k).iter().enumerate() {
            let image = self.d(&Form::basis(self.dim, mi.indices()));
            for (mj, c) in image.terms() {
                op[(mj.rank(self.dim), j)] = c.clone();
            }
        }
        op.kernel()
            .into_iter()
            .map(|v| Form::from_coeff_vec(self.dim, k, &v))
            .collect()
    }

    /// Span of `[A, B]` for two subspaces.
    pub fn bracket_subspaces(&self, a: &Subspace<S>, b: &Subspace<S>) -> Subspace<S> {
        let mut vectors = Vec::new();
        for x in a.basis() {
            for y in b.basis() {
                vectors.push(self.bracket(x, y));
            }
        }
        Subspace::span(self.dim, &vectors)
    }

    /// Derived subalgebra `[𝔤, 𝔤]`.
    pub fn derived_algebra(&self) -> Subspace<S> {
        let g = Subspace::full(self.dim);
        self.bracket_subspaces(&g, &g)
    }

    /// Derived series dims `dim 𝔤 ⊇ dim [𝔤,𝔤] ⊇ …` until stabilisation.
    pub fn derived_series_dims(&self) -> Vec<usize> {
        let mut cur = Subspace::full(self.dim);
        let mut dims = vec![cur.dim()];
        loop {
            let next = self.bracket_subspaces(&cur, &cur);
            if next.dim() == cur.dim() {
                break;
            }
            dims.push(next.dim());
            cur = next;
        }
        dims
    }

    pub fn is_solvable(&self) -> bool {
        *self.derived_series_dims().last().unwrap() == 0
    }

    /// Ascending central series `0 = C₀ ⊆ C₁ = Z(𝔤) ⊆ …`; returns the
    /// dimension sequence starting from 0 until stabilisation.
    pub fn ascending_central_series_dims(&self) -> Vec<usize> {
        self.ascending_central_series().into_iter().map(|s| s.dim()).collect()
    }

    pub fn ascending_central_series(&self) -> Vec<Subspace<S>> {
        let mut series = vec![Subspace::zero(self.dim)];
        loop {
            let cur = series.last().unwrap();
            let next = self.centralizer_mod(cur);
            if next.dim() == cur.dim() {
                break;
            }
            series.push(next);
        }
        series
    }

    /// `{x : [x, 𝔤] ⊆ c}` for a subspace `c`.
    fn centralizer_mod(&self, c: &Subspace<S>) -> Subspace<S> {
        let ann = c.annihilator();
        let mut rows: Vec<Vec<S>> = Vec::new();
        for j in 1..=self.dim {
            // Column i of bj is [eᵢ, eⱼ].
            let mut bj = Matrix::zeros(self.dim, self.dim);
            for i in 1..=self.dim {
                for (m, v) in self.bracket_basis(i, j).into_iter().enumerate() {
                    bj[(m, i - 1)] = v;
                }
            }
            for f in &ann {
                // Row: x ↦ f([x, eⱼ]).
                rows.push((0..self.dim)
                    .map(|i| {
                        let mut acc = S::zero();
                        for m in 0..self.dim {
                            acc = acc.add(&f[m].mul(&bj[(m, i)]));
                        }
                        acc
                    })
                    .collect());
            }
        }
        if rows.is_empty() {
            return Subspace::full(self.dim);
        }
        Subspace::span(self.dim, &Matrix::from_rows(rows).kernel())
    }

    pub fn center(&self) -> Subspace<S> {
        self.centralizer_mod(&Subspace::zero(self.dim))
    }

    pub fn is_nilpotent(&self) -> bool {
        *self.ascending_central_series_dims().last().unwrap() == self.dim
    }

    pub fn is_abelian(&self) -> bool {
        self.diff.iter().all(Form::is_zero)
    }

    pub fn is_ideal(&self, s: &Subspace<S>) -> bool {
        let g = Subspace::full(self.dim);
        s.contains_subspace(&self.bracket_subspaces(&g, s))
    }

    /// Direct sum: structure constants block-diagonally combined.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.dim + other.dim;
        let lift = |f: &Form<S>, offset: usize| -> Form<S> {
            let mut out = Form::zero(n, 2);
            for (mi, c) in f.terms() {
                let idx: Vec<u8> = mi.indices().iter().map(|&i| i + offset as u8).collect();
                out = out.add(&Form::term(n, c.clone(), &idx));
            }
            out
        };
        let mut diff: Vec<Form<S>> = self.diff.iter().map(|f| lift(f, 0)).collect();
        diff.extend(other.diff.iter().map(|f| lift(f, self.dim)));
        Self::from_differentials(diff)
    }

    /// First Betti number `dim ker(d: Λ¹ → Λ²)` — the number of independent
    /// closed 1-forms.
    pub fn b1(&self) -> usize {
        self.closed_forms(1).len()
    }
}

impl<S: Scalar> std::fmt::Debug for LieAlgebra<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LieAlgebra(dim {}; ", self.dim)?;
        for m in 1..=self.dim {
            if m > 1 {
                write!(f, ", ")?;
            }
            write!(f, "de{m} = {}", self.diff[m - 1])?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rational};

    /// Heisenberg algebra 𝔥₃: d e³ = e¹∧e².
    fn h3() -> LieAlgebra<Rational> {
        LieAlgebra::from_differentials(vec![
            Form::zero(3, 2),
            Form::zero(3, 2),
            Form::basis(3, &[1, 2]),
        ])
    }

    /// d e¹ = e²∧e³, d e² = e³∧e¹, d e³ = e¹∧e² (so [eᵢ,eⱼ] = −e_k cyclically).
    fn su2_like() -> LieAlgebra<Rational> {
        LieAlgebra::from_differentials(vec![
            Form::basis(3, &[2, 3]),
            Form::term(3, int(-1), &[1, 3]),
            Form::basis(3, &[1, 2]),
        ])
    }

    #[test]
    fn bracket_from_differential() {
        let g = h3();
        assert_eq!(g.bracket_basis(1, 2), vec![int(0), int(0), int(-1)]);
        assert_eq!(g.bracket_basis(2, 1), vec![int(0), int(0), int(1)]);
        assert_eq!(g.bracket_basis(1, 3), vec![int(0); 3]);
    }

    #[test]
    fn jacobi_and_d_squared_agree() {
        for g in [h3(), su2_like()] {
            assert!(g.jacobi_check().is_ok());
            assert!(g.differential_squares_to_zero());
        }
        // Corrupt su2_like: d e¹ = e²∧e³, d e² = e¹∧e³ breaks Jacobi…
        let bad: LieAlgebra<Rational> = LieAlgebra::from_differentials(vec![
            Form::basis(3, &[2, 3]),
            Form::basis(3, &[1, 3]),
            Form::basis(3, &[1, 2]),
        ]);
        assert_eq!(bad.jacobi_check().is_err(), !bad.differential_squares_to_zero());
    }

    /// 𝔰𝔩(2,ℂ) as a real 6-dimensional algebra: the compact part spans
    /// e₁..e₃ and `i·`(compact part) spans e₄..e₆.
    fn sl2_complex() -> LieAlgebra<Rational> {
        let two = |terms: &[(i64, [u8; 2])]| -> Form<Rational> {
            let refs: Vec<(Rational, &[u8])> =
                terms.iter().map(|(c, ij)| (int(*c), &ij[..])).collect();
            Form::from_terms(6, 2, &refs)
        };
        LieAlgebra::from_differentials(vec![
            two(&[(1, [2, 3]), (-1, [5, 6])]),
            two(&[(-1, [1, 3]), (1, [4, 6])]),
            two(&[(1, [1, 2]), (-1, [4, 5])]),
            two(&[(1, [2, 6]), (-1, [3, 5])]),
            two(&[(-1, [1, 6]), (1, [3, 4])]),
            two(&[(1, [1, 5]), (-1, [2, 4])]),
        ])
    }

    #[test]
    fn antiderivation_matches_evaluation_formula() {
        // Dimension 3 alone is a weak check (most Leibniz terms die on a
        // repeated index), so a 6-dimensional algebra is included: there the
        // antiderivation sign (−1)^p is load-bearing for every degree ≥ 2.
        let g = su2_like();
        for k in 0..=3 {
            for mi in crate::multiindex::MultiIndex::all(3, k) {
                let f = Form::basis(3, mi.indices());
                assert_eq!(g.d(&f), g.d_by_evaluation(&f), "degree {k} monomial {mi}");
            }
        }
        let g = sl2_complex();
        assert!(g.jacobi_check().is_ok());
        for k in 0..=6 {
            for mi in crate::multiindex::MultiIndex::all(6, k) {
                let f = Form::basis(6, mi.indices());
                assert_eq!(g.d(&f), g.d_by_evaluation(&f), "degree {k} monomial {mi}");
            }
        }
        // Hand-checked anchor: for β = e¹⁴ + e²⁵ + e³⁶,
        // dβ = −e¹²⁶ + e¹³⁵ − e²³⁴ − 3e⁴⁵⁶.
        let beta = Form::from_terms(
            6,
            2,
            &[
                (int(1), &[1u8, 4][..]),
                (int(1), &[2, 5]),
                (int(1), &[3, 6]),
            ],
        );
        let expected = Form::from_terms(
            6,
            3,
            &[
                (int(-1), &[1u8, 2, 6][..]),
                (int(1), &[1, 3, 5]),
                (int(-1), &[2, 3, 4]),
                (int(-3), &[4, 5, 6]),
            ],
        );
        assert_eq!(g.d(&beta), expected);
    }

    #[test]
    fn series_and_predicates() {
        let g = h3();
        assert!(g.is_nilpotent());
        assert!(g.is_solvable());
        assert!(!g.is_abelian());
        assert_eq!(g.ascending_central_series_dims(), vec![0, 1, 3]);
        assert_eq!(g.derived_series_dims(), vec![3, 1, 0]);
        assert_eq!(g.center().dim(), 1);

        let s = su2_like();
        assert!(!s.is_solvable());
        assert!(!s.is_nilpotent());
        assert_eq!(s.center().dim(), 0);
        assert_eq!(s.derived_series_dims(), vec![3]);
    }

    #[test]
    fn direct_sum_blocks() {
        let g = h3().direct_sum(&LieAlgebra::abelian(2));
        assert_eq!(g.dim(), 5);
        assert!(g.jacobi_check().is_ok());
        assert_eq!(g.ascending_central_series_dims(), vec![0, 3, 5]);
        assert_eq!(g.b1(), 4);
    }

    #[test]
    fn lie_derivative_cartan() {
        let g = su2_like();
        // L_{e₁} e¹ = ι_{e₁} d e¹ = ι_{e₁} e²³ = 0.
        let x = vec![int(1), int(0), int(0)];
        assert!(g.lie_derivative(&x, &Form::basis(3, &[1])).is_zero());
        // L_{e₁} e² = ι_{e₁}(−e¹³) = −e³.
        assert_eq!(
            g.lie_derivative(&x, &Form::basis(3, &[2])),
            Form::term(3, int(-1), &[3])
        );
    }

    #[test]
    fn invariant_forms_joint_kernel() {
        let g = su2_like();
        let gens: Vec<Vec<Rational>> = (0..3)
            .map(|i| {
                let mut v = vec![int(0); 3];
                v[i] = int(1);
                v
            })
            .collect();
        // Ad-invariant 1-forms of a simple algebra: none.
        assert!(g.invariant_forms(1, &gens).is_empty());
        // Invariant 3-forms: the volume form.
        assert_eq!(g.invariant_forms(3, &gens).len(), 1);
    }
}
