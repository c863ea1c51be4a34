//! Five-dimensional structures: quadruples `(α, ω₁, ω₂, ω₃)`.
//!
//! A quadruple is valid when some basis puts it in the model shape of
//! [`super::model::su2_model`] (the three 2-forms may carry a common positive
//! scale, absorbed by rescaling the basis). The validator is constructive:
//! it computes the common kernel of the three 2-forms, restricts to the
//! complement `ker α`, and reconstructs the candidate metric
//! `G = Ω₂·Ω₁⁻¹·Ω₃` from the pairing matrices `Ω_k`. The quadruple is valid
//! exactly when `G` is symmetric positive definite and the endomorphisms
//! `J_k = G⁻¹Ω_k` satisfy `J_k² = −1` and `J₁J₂ = −J₃` (the model's
//! chirality); both properties are invariant under basis change and under
//! positive scaling, and for the model `G` is the identity.

use super::{essentially_equal, essentially_zero, two_form_matrix, GStructError};
use crate::form::Form;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// A quadruple `(α, ω₁, ω₂, ω₃)` on a five-dimensional space. Construction
/// only checks shapes; run [`su2_validate`] for the geometric conditions.
#[derive(Debug, Clone)]
pub struct SU2Structure<S: Scalar> {
    alpha: Form<S>,
    omega: [Form<S>; 3],
}

impl<S: Scalar> SU2Structure<S> {
    pub fn new(
        alpha: Form<S>,
        omega1: Form<S>,
        omega2: Form<S>,
        omega3: Form<S>,
    ) -> Result<Self, GStructError> {
        super::expect_shape(&alpha, 1, 5)?;
        for w in [&omega1, &omega2, &omega3] {
            super::expect_shape(w, 2, 5)?;
        }
        Ok(SU2Structure {
            alpha,
            omega: [omega1, omega2, omega3],
        })
    }

    pub fn alpha(&self) -> &Form<S> {
        &self.alpha
    }
    pub fn omega1(&self) -> &Form<S> {
        &self.omega[0]
    }
    pub fn omega2(&self) -> &Form<S> {
        &self.omega[1]
    }
    pub fn omega3(&self) -> &Form<S> {
        &self.omega[2]
    }
    pub fn omegas(&self) -> &[Form<S>; 3] {
        &self.omega
    }

    pub fn to_f64(&self) -> SU2Structure<f64> {
        SU2Structure {
            alpha: self.alpha.to_f64(),
            omega: [
                self.omega[0].to_f64(),
                self.omega[1].to_f64(),
                self.omega[2].to_f64(),
            ],
        }
    }
}

/// Common kernel of the three 2-forms, normalized so that `α(v) = 1`.
///
/// Errors when the joint kernel is not one-dimensional or `α` vanishes on
/// it.
pub fn su2_common_kernel<S: Scalar>(s: &SU2Structure<S>) -> Result<Vec<S>, GStructError> {
    let kernel = joint_kernel(s);
    if kernel.len() != 1 {
        return Err(GStructError::Invalid(format!(
            "common kernel of the 2-forms has dimension {}, expected 1",
            kernel.len()
        )));
    }
    let v = kernel.into_iter().next().unwrap();
    let av = s.alpha.eval(&[v.clone()]);
    if av.is_zero() {
        return Err(GStructError::Invalid(
            "α vanishes on the common kernel".into(),
        ));
    }
    Ok(v.iter().map(|c| c.div(&av)).collect())
}

fn joint_kernel<S: Scalar>(s: &SU2Structure<S>) -> Vec<Vec<S>> {
    // v is in the kernel of ω iff M·v = 0 for the pairing matrix M of ω;
    // stack the three pairing matrices into one 15×5 system.
    let mut rows = Vec::with_capacity(15);
    for w in &s.omega {
        let m = two_form_matrix(w);
        for i in 0..5 {
            rows.push(m.row(i).to_vec());
        }
    }
    Matrix::from_rows(rows).kernel()
}

/// Validation report for a quadruple; see [`su2_validate`].
#[derive(Debug, Clone)]
pub struct Su2Report<S> {
    /// The joint kernel of `ω₁, ω₂, ω₃` is one-dimensional.
    pub kernel_dim: usize,
    /// `α` is nonzero on the joint kernel.
    pub alpha_transverse: bool,
    /// `ω_i∧ω_j = δ_{ij}·ω₁²` with `ω₁² ≠ 0`.
    pub pairing_ok: bool,
    /// `α∧ω₁² ≠ 0` (the five-form volume).
    pub volume_ok: bool,
    /// The reconstructed metric on `ker α` is symmetric positive definite
    /// and the induced triple satisfies the model's quaternion relations.
    pub frame_ok: bool,
    /// Kernel generator normalized to `α(v) = 1` (when defined).
    pub kernel: Option<Vec<S>>,
    /// Scale of the 2-form triple against the reference volume:
    /// `s = √(|α∧ω₁²| / 2)` measured on `e^{1…5}`. The model has `s = 1`;
    /// any `s > 0` still admits an adapted basis.
    pub scale: f64,
}

impl<S: Scalar> Su2Report<S> {
    pub fn is_valid(&self) -> bool {
        self.kernel_dim == 1
            && self.alpha_transverse
            && self.pairing_ok
            && self.volume_ok
            && self.frame_ok
    }
}

/// Constructively verify that a quadruple admits an adapted basis.
pub fn su2_validate<S: Scalar>(s: &SU2Structure<S>) -> Su2Report<S> {
    let kernel_vectors = joint_kernel(s);
    let kernel_dim = kernel_vectors.len();
    let kernel = match su2_common_kernel(s) {
        Ok(v) => Some(v),
        Err(_) => None,
    };
    let alpha_transverse = kernel.is_some() && kernel_dim == 1;

    // Pairing: ω_i∧ω_j = δ_{ij}·ω₁², ω₁² ≠ 0.
    let sq = s.omega[0].wedge(&s.omega[0]);
    let mut pairing_ok = !essentially_zero(&sq);
    for i in 0..3 {
        for j in i..3 {
            let w = s.omega[i].wedge(&s.omega[j]);
            let want = if i == j { sq.clone() } else { Form::zero(5, 4) };
            if !essentially_zero(&w.sub(&want)) {
                pairing_ok = false;
            }
        }
    }

    let vol = s.alpha.wedge(&sq);
    let volume_ok = !essentially_zero(&vol);
    let scale = (vol.top_coefficient().to_f64().abs() / 2.0).sqrt();

    let frame_ok = alpha_transverse && pairing_ok && volume_ok && frame_check(s);

    Su2Report {
        kernel_dim,
        alpha_transverse,
        pairing_ok,
        volume_ok,
        frame_ok,
        kernel,
        scale,
    }
}

/// Basis of `ker α`: pick a pivot coordinate where `α` is nonzero and
/// project the remaining coordinate directions into the kernel.
fn alpha_kernel_basis<S: Scalar>(alpha: &Form<S>) -> Option<Vec<Vec<S>>> {
    let a: Vec<S> = (0..5).map(|i| alpha.coeff_on(&[i as u8 + 1])).collect();
    let pivot = (0..5).find(|&i| !a[i].is_zero())?;
    let mut w_basis: Vec<Vec<S>> = Vec::with_capacity(4);
    for i in 0..5 {
        if i == pivot {
            continue;
        }
        let mut w = vec![S::zero(); 5];
        w[i] = S::one();
        w[pivot] = a[i].div(&a[pivot]).neg();
        w_basis.push(w);
    }
    Some(w_basis)
}

/// Reconstruct the candidate Gram matrix `G = Ω₂Ω₁⁻¹Ω₃` of the triple on a
/// given basis of `ker α`; `None` when `Ω₁` is singular.
fn gram_on_kernel<S: Scalar>(
    s: &SU2Structure<S>,
    w_basis: &[Vec<S>],
) -> Option<(Matrix<S>, Matrix<S>, Matrix<S>, Matrix<S>)> {
    let pairing = |f: &Form<S>| {
        Matrix::from_fn(4, 4, |x, y| {
            f.eval(&[w_basis[x].clone(), w_basis[y].clone()])
        })
    };
    let m1 = pairing(&s.omega[0]);
    let m2 = pairing(&s.omega[1]);
    let m3 = pairing(&s.omega[2]);
    let m1_inv = m1.inverse()?;
    let g = m2.mul(&m1_inv).mul(&m3);
    Some((g, m1, m2, m3))
}

/// The Riemannian metric of a valid quadruple, as a Gram matrix in the
/// standard basis.
///
/// The common kernel vector `v` (normalized to `α(v) = 1`) is declared unit
/// and orthogonal to `ker α`, which carries the reconstructed positive form
/// `G = Ω₂Ω₁⁻¹Ω₃`; the result is conjugated back to the standard basis. For
/// the model quadruple this is the identity.
pub fn su2_metric<S: Scalar>(s: &SU2Structure<S>) -> Result<Matrix<S>, GStructError> {
    let v = su2_common_kernel(s)?;
    let w_basis = alpha_kernel_basis(&s.alpha)
        .ok_or_else(|| GStructError::Invalid("α is zero".into()))?;
    let (g, _, _, _) = gram_on_kernel(s, &w_basis).ok_or(GStructError::NotStable)?;
    if !matrix_symmetric(&g) || !matrix_positive_definite(&g) {
        return Err(GStructError::NotPositive);
    }
    // Change of basis P = [w₁ w₂ w₃ w₄ v] (columns); the metric in that
    // basis is G ⊕ 1, so in the standard basis it is P⁻ᵀ(G ⊕ 1)P⁻¹.
    let p = Matrix::from_fn(5, 5, |i, j| {
        if j < 4 {
            w_basis[j][i].clone()
        } else {
            v[i].clone()
        }
    });
    let p_inv = p
        .inverse()
        .ok_or_else(|| GStructError::Invalid("kernel vector lies in ker α".into()))?;
    let block = Matrix::from_fn(5, 5, |i, j| {
        if i < 4 && j < 4 {
            g[(i, j)].clone()
        } else if i == 4 && j == 4 {
            S::one()
        } else {
            S::zero()
        }
    });
    Ok(p_inv.transpose().mul(&block).mul(&p_inv))
}

/// Restrict the triple to `ker α`, reconstruct the metric `G = Ω₂Ω₁⁻¹Ω₃`,
/// and check positivity plus the quaternion relations.
fn frame_check<S: Scalar>(s: &SU2Structure<S>) -> bool {
    let Some(w_basis) = alpha_kernel_basis(&s.alpha) else {
        return false;
    };
    let Some((g, m1, m2, m3)) = gram_on_kernel(s, &w_basis) else {
        return false;
    };

    if !matrix_symmetric(&g) || !matrix_positive_definite(&g) {
        return false;
    }
    let Some(g_inv) = g.inverse() else {
        return false;
    };
    let j1 = g_inv.mul(&m1);
    let j2 = g_inv.mul(&m2);
    let j3 = g_inv.mul(&m3);
    let minus_id = Matrix::identity(4).map(|c: &S| c.neg());
    matrices_equal(&j1.mul(&j1), &minus_id)
        && matrices_equal(&j2.mul(&j2), &minus_id)
        && matrices_equal(&j3.mul(&j3), &minus_id)
        && matrices_equal(&j1.mul(&j2), &j3.map(|c| c.neg()))
}

fn matrix_symmetric<S: Scalar>(m: &Matrix<S>) -> bool {
    for i in 0..m.rows() {
        for j in (i + 1)..m.cols() {
            if !essentially_equal(&m[(i, j)], &m[(j, i)]) {
                return false;
            }
        }
    }
    true
}

fn matrix_positive_definite<S: Scalar>(m: &Matrix<S>) -> bool {
    for k in 1..=m.rows() {
        let sub = Matrix::from_fn(k, k, |i, j| m[(i, j)].clone());
        if sub.det().signum() <= 0 {
            return false;
        }
    }
    true
}

fn matrices_equal<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> bool {
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if !essentially_equal(&a[(i, j)], &b[(i, j)]) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::super::model;
    use super::*;
    use crate::scalar::{int, Rational};

    fn model_structure() -> SU2Structure<Rational> {
        let (alpha, w1, w2, w3) = model::su2_model();
        SU2Structure::new(alpha, w1, w2, w3).unwrap()
    }

    #[test]
    fn model_is_valid_with_kernel_e5() {
        let s = model_structure();
        let r = su2_validate(&s);
        assert!(r.is_valid(), "report: {r:?}");
        assert_eq!(r.kernel_dim, 1);
        assert!((r.scale - 1.0).abs() < 1e-15);
        let v = su2_common_kernel(&s).unwrap();
        assert_eq!(v, vec![int(0), int(0), int(0), int(0), int(1)]);
    }

    #[test]
    fn degenerate_pairing_is_rejected() {
        // Replace ω₂ by ω₁: the cross pairing ω₁∧ω₂ = ω₁² ≠ 0 breaks δ_{ij}.
        let (alpha, w1, _, w3) = model::su2_model::<Rational>();
        let s = SU2Structure::new(alpha, w1.clone(), w1, w3).unwrap();
        let r = su2_validate(&s);
        assert!(!r.pairing_ok);
        assert!(!r.is_valid());
    }

    #[test]
    fn uniform_positive_scaling_remains_valid() {
        let (alpha, w1, w2, w3) = model::su2_model::<Rational>();
        let two = int(2);
        let s = SU2Structure::new(
            alpha,
            w1.scale(&two),
            w2.scale(&two),
            w3.scale(&two),
        )
        .unwrap();
        let r = su2_validate(&s);
        assert!(r.is_valid(), "report: {r:?}");
        assert!((r.scale - 2.0).abs() < 1e-15);
    }

    #[test]
    fn negated_triple_and_flipped_chirality_are_rejected() {
        let (alpha, w1, w2, w3) = model::su2_model::<Rational>();
        // (−ω₁,−ω₂,−ω₃): pairing and kernel fine, but G = −1 is negative.
        let s = SU2Structure::new(
            alpha.clone(),
            w1.neg(),
            w2.neg(),
            w3.neg(),
        )
        .unwrap();
        let r = su2_validate(&s);
        assert!(r.pairing_ok && r.kernel_dim == 1);
        assert!(!r.frame_ok && !r.is_valid());

        // (ω₁,ω₂,−ω₃): wrong chirality, J₁J₂ = +J₃.
        let s = SU2Structure::new(alpha, w1, w2, w3.neg()).unwrap();
        let r = su2_validate(&s);
        assert!(r.pairing_ok);
        assert!(!r.frame_ok && !r.is_valid());
    }

    #[test]
    fn pulled_back_model_stays_valid() {
        // A generic invertible substitution preserves validity.
        let (alpha, w1, w2, w3) = model::su2_model::<Rational>();
        let a = Matrix::from_rows(vec![
            vec![int(1), int(2), int(0), int(-1), int(3)],
            vec![int(0), int(1), int(1), int(0), int(-2)],
            vec![int(0), int(0), int(1), int(4), int(0)],
            vec![int(0), int(0), int(0), int(1), int(5)],
            vec![int(0), int(0), int(0), int(0), int(1)],
        ]);
        let s = SU2Structure::new(
            alpha.pullback(&a),
            w1.pullback(&a),
            w2.pullback(&a),
            w3.pullback(&a),
        )
        .unwrap();
        let r = su2_validate(&s);
        assert!(r.is_valid(), "report: {r:?}");
        // Kernel maps to A⁻¹e₅ direction, still normalized against α.
        let v = su2_common_kernel(&s).unwrap();
        let av = s.alpha().eval(&[v]);
        assert_eq!(av, int(1));
    }

    #[test]
    fn metric_of_model_is_identity_and_scales_on_the_kernel_block() {
        let s = model_structure();
        assert_eq!(su2_metric(&s).unwrap(), Matrix::identity(5));

        // Scaling the triple by 2 scales the four kernel directions by 2 and
        // leaves the α-direction unit.
        let (alpha, w1, w2, w3) = model::su2_model::<Rational>();
        let two = int(2);
        let s = SU2Structure::new(alpha, w1.scale(&two), w2.scale(&two), w3.scale(&two)).unwrap();
        let expect = Matrix::from_fn(5, 5, |i, j| {
            if i != j {
                int(0)
            } else if i < 4 {
                int(2)
            } else {
                int(1)
            }
        });
        assert_eq!(su2_metric(&s).unwrap(), expect);
    }

    #[test]
    fn metric_is_natural_under_pullback() {
        let (alpha, w1, w2, w3) = model::su2_model::<Rational>();
        let g0 = su2_metric(&SU2Structure::new(alpha.clone(), w1.clone(), w2.clone(), w3.clone()).unwrap()).unwrap();
        let a = Matrix::from_rows(vec![
            vec![int(1), int(2), int(0), int(-1), int(3)],
            vec![int(0), int(1), int(1), int(0), int(-2)],
            vec![int(0), int(0), int(1), int(4), int(0)],
            vec![int(0), int(0), int(0), int(1), int(5)],
            vec![int(0), int(0), int(0), int(0), int(1)],
        ]);
        let s = SU2Structure::new(
            alpha.pullback(&a),
            w1.pullback(&a),
            w2.pullback(&a),
            w3.pullback(&a),
        )
        .unwrap();
        let got = su2_metric(&s).unwrap();
        let expect = a.transpose().mul(&g0).mul(&a);
        assert_eq!(got, expect);
    }

    #[test]
    fn kernel_failures_are_reported() {
        // α with no component on the kernel direction.
        let (_, w1, w2, w3) = model::su2_model::<Rational>();
        let s = SU2Structure::new(Form::basis(5, &[1]), w1, w2, w3).unwrap();
        let r = su2_validate(&s);
        assert!(!r.alpha_transverse);
        assert!(su2_common_kernel(&s).is_err());
    }
}
