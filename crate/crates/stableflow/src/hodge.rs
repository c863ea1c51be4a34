//! Metric structures on the exterior algebra: inner products, volume
//! normalisation and the Hodge star, plus the contraction isomorphism
//! Λⁿ⁻¹V* ≅ V ⊗ ΛⁿV* that underlies the stable-form invariants.

use crate::form::Form;
use crate::linalg::Matrix;
use crate::multiindex::MultiIndex;
use crate::scalar::Scalar;

/// The unique vector `v` with `v ⌟ e^{1…n} = ξ` for an (n−1)-form `ξ`
/// (the identification Λⁿ⁻¹V* ≅ V ⊗ ΛⁿV*, trivialised by `e^{1…n}`).
pub fn vector_from_top_contraction<S: Scalar>(xi: &Form<S>) -> Vec<S> {
    let n = xi.space_dim();
    assert_eq!(xi.degree(), n - 1, "need an (n-1)-form");
    (1..=n as u8)
        .map(|i| {
            let comp = MultiIndex::new(&[i]).complement(n);
            let c = xi.coeff(&comp);
            if (i - 1) % 2 == 1 {
                c.neg()
            } else {
                c
            }
        })
        .collect()
}

/// Inner product on a vector space, by its Gram matrix in the fixed basis.
#[derive(Clone)]
pub struct Metric<S> {
    gram: Matrix<S>,
    inverse_gram: Matrix<S>,
}

impl<S: Scalar> std::fmt::Debug for Metric<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Metric({:?})", self.gram)
    }
}

impl<S: Scalar> Metric<S> {
    pub fn from_gram(gram: Matrix<S>) -> Self {
        assert_eq!(gram.rows(), gram.cols());
        for i in 0..gram.rows() {
            for j in 0..i {
                assert!(gram[(i, j)] == gram[(j, i)], "Gram matrix must be symmetric");
            }
        }
        let inverse_gram = gram.inverse().expect("degenerate Gram matrix");
        Metric { gram, inverse_gram }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_gram(Matrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &Matrix<S> {
        &self.gram
    }

    pub fn det(&self) -> S {
        self.gram.det()
    }

    /// Sylvester criterion on leading principal minors.
    pub fn is_positive_definite(&self) -> bool {
        (1..=self.dim()).all(|k| {
            let minor = Matrix::from_fn(k, k, |i, j| self.gram[(i, j)].clone());
            minor.det() > S::zero()
        })
    }

    pub fn inner_vectors(&self, x: &[S], y: &[S]) -> S {
        let gy = self.gram.mul_vec(y);
        let mut acc = S::zero();
        for i in 0..self.dim() {
            acc = acc.add(&x[i].mul(&gy[i]));
        }
        acc
    }

    /// ⟨eᴵ, eᴶ⟩ = det of the inverse-Gram minor on rows I, columns J.
    pub fn inner_basis_covectors(&self, i: &MultiIndex, j: &MultiIndex) -> S {
        assert_eq!(i.degree(), j.degree());
        let k = i.degree();
        if k == 0 {
            return S::one();
        }
        let m = Matrix::from_fn(k, k, |a, b| {
            self.inverse_gram[(i.indices()[a] as usize - 1, j.indices()[b] as usize - 1)].clone()
        });
        m.det()
    }

    /// Induced inner product on k-forms.
    pub fn inner_forms(&self, a: &Form<S>, b: &Form<S>) -> S {
        assert_eq!(a.degree(), b.degree());
        let mut acc = S::zero();
        for (mi, ca) in a.terms() {
            for (mj, cb) in b.terms() {
                let g = self.inner_basis_covectors(mi, mj);
                if !g.is_zero() {
                    acc = acc.add(&ca.mul(cb).mul(&g));
                }
            }
        }
        acc
    }

    /// `√(det G)`, the coefficient of the Riemannian volume form on the
    /// positively oriented basis. `None` when the scalar ring has no exact
    /// square root of det G (or det G < 0).
    pub fn volume_coeff(&self) -> Option<S> {
        self.det().nth_root(2)
    }

    pub fn volume_form(&self) -> Option<Form<S>> {
        let n = self.dim();
        let c = self.volume_coeff()?;
        Some(Form::term(n, c, MultiIndex::empty().complement(n).indices()))
    }

    /// Hodge star: the unique (n−k)-form with `α ∧ ⋆β = ⟨α, β⟩ vol` for all
    /// k-forms α. `None` when the volume coefficient has no exact square
    /// root in this scalar ring.
    pub fn hodge_star(&self, beta: &Form<S>) -> Option<Form<S>> {
        let n = self.dim();
        assert_eq!(beta.space_dim(), n);
        let k = beta.degree();
        let vol = self.volume_coeff()?;
        let mut out = Form::zero(n, n - k);
        for mi in MultiIndex::all(n, k) {
            // ⟨eᴵ, β⟩
            let mut inner = S::zero();
            for (mj, c) in beta.terms() {
                let g = self.inner_basis_covectors(&mi, mj);
                if !g.is_zero() {
                    inner = inner.add(&c.mul(&g));
                }
            }
            if inner.is_zero() {
                continue;
            }
            let comp = mi.complement(n);
            let (sign, _) = mi.wedge(&comp).expect("complement is disjoint");
            let mut coeff = inner.mul(&vol);
            if sign < 0 {
                coeff = coeff.neg();
            }
            out = out.add(&Form::term(n, coeff, comp.indices()));
        }
        Some(out)
    }
}

/// Star for the identity metric and standard orientation (always exact).
pub fn star_orthonormal<S: Scalar>(beta: &Form<S>) -> Form<S> {
    Metric::identity(beta.space_dim()).hodge_star(beta).expect("identity metric has volume 1")
}
