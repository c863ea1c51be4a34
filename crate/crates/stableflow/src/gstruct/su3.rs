//! Stable-form calculus in dimension six.
//!
//! A three-form `ρ` on a six-dimensional space `V` induces a linear map
//! `K_ρ : V → V ⊗ Λ⁶V*`, `K_ρ(v) = κ((v⌟ρ)∧ρ)`, where `κ` identifies
//! `Λ⁵V* ≅ V ⊗ Λ⁶V*` by `κ(v⌟μ) = v⊗μ` for the reference volume
//! `μ = e^{1…6}`. Its square is scalar: `K_ρ² = λ(ρ)·id` with
//! `λ(ρ) = ⅙ tr(K_ρ²)`, a quartic invariant measured against `μ⊗µ`. When
//! `λ(ρ) < 0` the normalization `J_ρ = K_ρ / √(−λ(ρ))` is an almost-complex
//! structure, `ρ̂ = J_ρ^*ρ` its companion, and `Ψ = ρ + iρ̂` a complex volume
//! form. Pairing with a compatible symplectic form `ω` yields the metric
//! `g(X,Y) = ω(J_ρ X, Y)`.
//!
//! Sign conventions (all calibrated against [`super::model`]): for the model
//! pair, `J e₁ = −e₂`, `J e₃ = −e₄`, `J e₅ = −e₆`, the metric is the
//! identity, `ρ̂₀ = −e¹³⁶−e¹⁴⁵−e²³⁵+e²⁴⁶` and `ρ₀∧ρ̂₀ = −⅔ω₀³`.

use super::{
    essentially_equal, essentially_zero, expect_shape, two_form_matrix, GStructError,
};
use crate::form::Form;
use crate::hodge::vector_from_top_contraction;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Basis vector `e_{j+1}` as a coefficient vector.
fn basis_vector<S: Scalar>(n: usize, j: usize) -> Vec<S> {
    let mut v = vec![S::zero(); n];
    v[j] = S::one();
    v
}

/// The matrix of `K_ρ` relative to the reference volume `e^{1…6}`: column
/// `j` holds the coefficients of `K_ρ(e_{j+1})`.
pub fn su3_k<S: Scalar>(rho: &Form<S>) -> Result<Matrix<S>, GStructError> {
    expect_shape(rho, 3, 6)?;
    let mut k = Matrix::zeros(6, 6);
    for j in 0..6 {
        let xi = rho.contract(&basis_vector(6, j)).wedge(rho);
        let col = vector_from_top_contraction(&xi);
        for (i, c) in col.into_iter().enumerate() {
            k[(i, j)] = c;
        }
    }
    Ok(k)
}

/// The quartic invariant `λ(ρ) = ⅙ tr(K_ρ²)`, as a coefficient of
/// `(e^{1…6})⊗²`. Negative exactly on stable forms of complex type.
pub fn su3_lambda<S: Scalar>(rho: &Form<S>) -> Result<S, GStructError> {
    let k = su3_k(rho)?;
    let k2 = k.mul(&k);
    let mut tr = S::zero();
    for i in 0..6 {
        tr = tr.add(&k2[(i, i)]);
    }
    Ok(tr.div(&S::from_int(6)))
}

/// Square root of `−λ(ρ)` taken positive with respect to the orientation of
/// the given volume form, as a coefficient of `e^{1…6}`.
fn signed_sqrt_neg_lambda<S: Scalar>(
    lambda: &S,
    orientation: &Form<S>,
) -> Result<S, GStructError> {
    expect_shape(orientation, 6, 6)?;
    if lambda.signum() >= 0 {
        return Err(GStructError::NotStable);
    }
    let sign = orientation.top_coefficient().signum();
    if sign == 0 {
        return Err(GStructError::Invalid("orientation form is zero".into()));
    }
    let root = lambda
        .neg()
        .nth_root(2)
        .ok_or(GStructError::InexactRoot)?;
    Ok(if sign < 0 { root.neg() } else { root })
}

/// The almost-complex structure `J_ρ = K_ρ / √(−λ(ρ))`, with the square root
/// taken positive with respect to the orientation of the given volume form.
///
/// Errors with [`GStructError::NotStable`] when `λ(ρ) ≥ 0`, and with
/// [`GStructError::InexactRoot`] when exact scalars cannot represent
/// `√(−λ)`.
pub fn su3_j<S: Scalar>(rho: &Form<S>, orientation: &Form<S>) -> Result<Matrix<S>, GStructError> {
    let k = su3_k(rho)?;
    let lambda = su3_lambda(rho)?;
    let root = signed_sqrt_neg_lambda(&lambda, orientation)?;
    Ok(k.map(|c| c.div(&root)))
}

/// The companion form `ρ̂ = J_ρ^*ρ` (full pullback along `J_ρ`), using the
/// reference orientation `e^{1…6}`. Applying it twice gives `−ρ`.
pub fn su3_rhohat<S: Scalar>(rho: &Form<S>) -> Result<Form<S>, GStructError> {
    let j = su3_j(rho, &Form::basis(6, &[1, 2, 3, 4, 5, 6]))?;
    Ok(rho.pullback(&j))
}

/// The complex volume form `Ψ = ρ + iρ̂`, returned as the pair of real forms
/// `(ρ, ρ̂)`.
pub fn su3_psi<S: Scalar>(rho: &Form<S>) -> Result<(Form<S>, Form<S>), GStructError> {
    Ok((rho.clone(), su3_rhohat(rho)?))
}

/// The induced metric `g(X,Y) = ω(J_ρ X, Y)` as a Gram matrix, with `J_ρ`
/// oriented by `ω³`.
///
/// Errors when `λ(ρ) ≥ 0`, when the result is not symmetric positive
/// definite, or (exact mode) when `√(−λ)` is irrational.
pub fn su3_metric<S: Scalar>(omega: &Form<S>, rho: &Form<S>) -> Result<Matrix<S>, GStructError> {
    expect_shape(omega, 2, 6)?;
    let orientation = omega.wedge(omega).wedge(omega);
    if orientation.is_zero() {
        return Err(GStructError::NotPositive);
    }
    let j = su3_j(rho, &orientation)?;
    let g = j.transpose().mul(&two_form_matrix(omega));
    if !is_symmetric(&g) || !is_positive_definite(&g) {
        return Err(GStructError::NotPositive);
    }
    Ok(g)
}

fn is_symmetric<S: Scalar>(m: &Matrix<S>) -> bool {
    for i in 0..m.rows() {
        for j in (i + 1)..m.cols() {
            if !essentially_equal(&m[(i, j)], &m[(j, i)]) {
                return false;
            }
        }
    }
    true
}

/// Sylvester test on leading principal minors.
fn is_positive_definite<S: Scalar>(m: &Matrix<S>) -> bool {
    for k in 1..=m.rows() {
        let sub = Matrix::from_fn(k, k, |i, j| m[(i, j)].clone());
        if sub.det().signum() <= 0 {
            return false;
        }
    }
    true
}

/// Validation report for a candidate pair `(ω, ρ)`; see [`su3_validate`].
///
/// The five conditions are labelled (a)–(e):
/// (a) `ω³ ≠ 0`; (b) `λ(ρ) < 0`; (c) `ω∧ρ = 0`; (d) `√(−λ) = ω³/3` with the
/// square root oriented by `ω³`; (e) `g = ω(J_ρ·,·)` symmetric positive
/// definite.
#[derive(Debug, Clone)]
pub struct Su3Report<S> {
    /// (a): the 2-form is non-degenerate.
    pub omega_nondegenerate: bool,
    /// (b): the 3-form is stable of complex type.
    pub lambda_negative: bool,
    /// (c): the compatibility `ω∧ρ = 0` holds.
    pub compatible: bool,
    /// (d): the volume normalization `√(−λ) = ω³/3` holds.
    pub normalized: bool,
    /// (e): the induced bilinear form is symmetric positive definite.
    pub metric_positive: bool,
    /// The invariant `λ(ρ)`.
    pub lambda: S,
    /// Normalization ratio `c` with `√(−λ) = c·ω³/3`; `1` exactly when (d)
    /// holds. `None` when undefined (λ ≥ 0 or ω³ = 0) or not representable
    /// in exact arithmetic.
    pub normalization_ratio: Option<S>,
}

impl<S: Scalar> Su3Report<S> {
    /// All five conditions hold.
    pub fn is_valid(&self) -> bool {
        self.omega_nondegenerate
            && self.lambda_negative
            && self.compatible
            && self.normalized
            && self.metric_positive
    }
}

/// Check the five conditions (a)–(e) for a candidate pair; report-style, so
/// it never errors on well-shaped input.
///
/// Positive definiteness is decided without extracting `√(−λ)`: the rescaled
/// bilinear form `ω(K_ρ·,·)`, sign-adjusted by the orientation of `ω³`, has
/// the same definiteness as the metric, so the test stays exact for rational
/// input.
pub fn su3_validate<S: Scalar>(omega: &Form<S>, rho: &Form<S>) -> Result<Su3Report<S>, GStructError> {
    expect_shape(omega, 2, 6)?;
    expect_shape(rho, 3, 6)?;
    let omega3 = omega.wedge(omega).wedge(omega);
    let u = omega3.top_coefficient(); // coefficient of ω³ against e^{1…6}
    let omega_nondegenerate = !essentially_zero(&omega3);

    let lambda = su3_lambda(rho)?;
    let lambda_negative = lambda.signum() < 0;

    let compatible = essentially_zero(&omega.wedge(rho));

    // (d): (ω³/3)² = −λ. Comparing squares avoids the root; the sign is
    // automatically right because √(−λ) is oriented by ω³ itself.
    let third = S::from_ratio(1, 3);
    let u3 = u.mul(&third);
    let normalized = lambda_negative && essentially_equal(&u3.mul(&u3), &lambda.neg());

    // (e) via the sign-adjusted, root-free bilinear form ω(K·,·).
    let metric_positive = if lambda_negative && omega_nondegenerate {
        let k = su3_k(rho)?;
        let h = k.transpose().mul(&two_form_matrix(omega));
        let h_oriented = if u.signum() < 0 { h.map(|c| c.neg()) } else { h };
        is_symmetric(&h_oriented) && is_positive_definite(&h_oriented)
    } else {
        false
    };

    let normalization_ratio = if lambda_negative && omega_nondegenerate {
        lambda
            .neg()
            .nth_root(2)
            .map(|root| root.div(&u3.abs()))
    } else {
        None
    };

    Ok(Su3Report {
        omega_nondegenerate,
        lambda_negative,
        compatible,
        normalized,
        metric_positive,
        lambda,
        normalization_ratio,
    })
}

/// A validated pair `(ω, ρ)` with its derived data cached.
#[derive(Debug, Clone)]
pub struct SU3Structure<S: Scalar> {
    omega: Form<S>,
    rho: Form<S>,
    lambda: S,
    j: Matrix<S>,
    rhohat: Form<S>,
    metric: Matrix<S>,
}

impl<S: Scalar> SU3Structure<S> {
    /// Validate conditions (a)–(e) and cache `λ`, `J_ρ`, `ρ̂` and the metric.
    ///
    /// Errors with [`GStructError::NotPositive`] when any condition fails
    /// and with [`GStructError::InexactRoot`] when the cached data is not
    /// representable in exact arithmetic.
    pub fn new(omega: Form<S>, rho: Form<S>) -> Result<Self, GStructError> {
        let report = su3_validate(&omega, &rho)?;
        if !report.is_valid() {
            return Err(GStructError::NotPositive);
        }
        let orientation = omega.wedge(&omega).wedge(&omega);
        let j = su3_j(&rho, &orientation)?;
        let rhohat = rho.pullback(&j);
        let metric = su3_metric(&omega, &rho)?;
        Ok(SU3Structure {
            omega,
            rho,
            lambda: report.lambda,
            j,
            rhohat,
            metric,
        })
    }

    pub fn omega(&self) -> &Form<S> {
        &self.omega
    }
    pub fn rho(&self) -> &Form<S> {
        &self.rho
    }
    pub fn lambda(&self) -> &S {
        &self.lambda
    }
    /// Matrix of the almost-complex structure (columns are images of basis
    /// vectors), oriented by `ω³`.
    pub fn j(&self) -> &Matrix<S> {
        &self.j
    }
    /// Companion form `ρ̂ = J_ρ^*ρ`, with `J_ρ` oriented by `ω³`.
    pub fn rhohat(&self) -> &Form<S> {
        &self.rhohat
    }
    /// Gram matrix of the induced metric.
    pub fn metric(&self) -> &Matrix<S> {
        &self.metric
    }
    pub fn to_f64(&self) -> SU3Structure<f64> {
        SU3Structure {
            omega: self.omega.to_f64(),
            rho: self.rho.to_f64(),
            lambda: self.lambda.to_f64(),
            j: self.j.to_f64(),
            rhohat: self.rhohat.to_f64(),
            metric: self.metric.to_f64(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::model;
    use super::*;
    use crate::scalar::{int, ratio, Rational};

    fn model_pair() -> (Form<Rational>, Form<Rational>) {
        model::su3_model()
    }

    #[test]
    fn k_of_model_squares_to_minus_four() {
        let (_, rho) = model_pair();
        let k = su3_k(&rho).unwrap();
        // First column: K(e₁) = −2e₂.
        assert_eq!(k[(1, 0)], int(-2));
        for i in [0usize, 2, 3, 4, 5] {
            assert!(k[(i, 0)].is_zero());
        }
        let k2 = k.mul(&k);
        let minus4 = Matrix::identity(6).map(|c: &Rational| c.mul(&int(-4)));
        assert_eq!(k2, minus4);
        assert_eq!(su3_lambda(&rho).unwrap(), int(-4));
    }

    #[test]
    fn lambda_of_decomposable_form_vanishes() {
        let rho: Form<Rational> = Form::basis(6, &[1, 2, 3]);
        assert_eq!(su3_lambda(&rho).unwrap(), int(0));
        assert_eq!(
            su3_j(&rho, &Form::basis(6, &[1, 2, 3, 4, 5, 6])),
            Err(GStructError::NotStable)
        );
    }

    #[test]
    fn zero_form_gives_zero_map() {
        let rho: Form<Rational> = Form::zero(6, 3);
        assert_eq!(su3_k(&rho).unwrap(), Matrix::zeros(6, 6));
    }

    #[test]
    fn j_of_model_is_the_standard_complex_structure() {
        let (omega, rho) = model_pair();
        let mu = Form::basis(6, &[1, 2, 3, 4, 5, 6]);
        let j = su3_j(&rho, &mu).unwrap();
        // J e₁ = −e₂, J e₂ = e₁, and likewise on the other two planes.
        let mut expected: Matrix<Rational> = Matrix::zeros(6, 6);
        for p in 0..3 {
            expected[(2 * p + 1, 2 * p)] = int(-1);
            expected[(2 * p, 2 * p + 1)] = int(1);
        }
        assert_eq!(j, expected);
        let j2 = j.mul(&j);
        assert_eq!(j2, Matrix::identity(6).map(|c: &Rational| c.neg()));
        // Reversing the orientation flips J.
        let j_rev = su3_j(&rho, &mu.neg()).unwrap();
        assert_eq!(j_rev, j.map(|c| c.neg()));
        // Metric: identity.
        assert_eq!(su3_metric(&omega, &rho).unwrap(), Matrix::identity(6));
    }

    #[test]
    fn rhohat_of_model_and_double_hat() {
        let (_, rho) = model_pair();
        let rhohat = su3_rhohat(&rho).unwrap();
        assert_eq!(rhohat, model::su3_model_rhohat());
        // Applying the companion twice negates.
        assert_eq!(su3_rhohat(&rhohat).unwrap(), rho.neg());
        // J(ρ̂) = J(ρ).
        let mu = Form::basis(6, &[1, 2, 3, 4, 5, 6]);
        assert_eq!(su3_j(&rhohat, &mu).unwrap(), su3_j(&rho, &mu).unwrap());
        // Ψ = ρ + iρ̂ comes back as the pair.
        let (re, im) = su3_psi(&rho).unwrap();
        assert_eq!(re, rho);
        assert_eq!(im, rhohat);
    }

    /// The four-parameter family `ρ = b₁e¹²³ + b₂e⁴⁵⁶ + b₃(e¹²⁶−e¹³⁵+e²³⁴)
    /// + b₄(e¹⁵⁶−e²⁴⁶+e³⁴⁵)` with `b₄ = −b₁`.
    fn family_rho(b1: i64, b2: i64, b3: i64) -> Form<Rational> {
        Form::from_terms(
            6,
            3,
            &[
                (int(b1), &[1, 2, 3]),
                (int(b2), &[4, 5, 6]),
                (int(b3), &[1, 2, 6]),
                (int(-b3), &[1, 3, 5]),
                (int(b3), &[2, 3, 4]),
                (int(-b1), &[1, 5, 6]),
                (int(b1), &[2, 4, 6]),
                (int(-b1), &[3, 4, 5]),
            ],
        )
    }

    fn family_lambda(b1: i64, b2: i64, b3: i64) -> Rational {
        let (b1, b2, b3) = (int(b1), int(b2), int(b3));
        let s = b1.mul(&b2.add(&b3));
        let q = b1.mul(&b1).add(&b3.mul(&b3));
        let r = b1.mul(&b1).sub(&b2.mul(&b3));
        s.mul(&s).sub(&int(4).mul(&q).mul(&r))
    }

    #[test]
    fn family_matches_closed_forms() {
        for (b1, b2, b3) in [(1, 2, 3), (1, 0, -1), (2, -1, 1), (0, -1, 1), (0, 1, 1)] {
            let rho = family_rho(b1, b2, b3);
            assert_eq!(su3_lambda(&rho).unwrap(), family_lambda(b1, b2, b3));
            // Displayed first column: K(e₁) = b₁(b₂+b₃)e₁ + 2(b₁²+b₃²)e₄.
            let k = su3_k(&rho).unwrap();
            assert_eq!(k[(0, 0)], int(b1 * (b2 + b3)));
            assert_eq!(k[(3, 0)], int(2 * (b1 * b1 + b3 * b3)));
            for i in [1usize, 2, 4, 5] {
                assert!(k[(i, 0)].is_zero(), "K(e1) has unexpected component {i}");
            }
        }
        // (0,1,1) is inadmissible: λ = +4.
        assert_eq!(su3_lambda(&family_rho(0, 1, 1)).unwrap(), int(4));
    }

    #[test]
    fn family_metric_at_unit_point_is_identity() {
        // ε = 1, (b₁,b₂,b₃) = (0,−1,1): −λ = 4 and the metric collapses to
        // the identity because 2^{2/3}·4^{−1/3} = 1.
        let rho = family_rho(0, -1, 1);
        let omega: Form<Rational> = Form::from_terms(
            6,
            2,
            &[(int(1), &[1, 4]), (int(1), &[2, 5]), (int(1), &[3, 6])],
        );
        // ω scaling: the admissible 2-form is 2^{-1/3}(−λ)^{1/6}(e¹⁴+e²⁵+e³⁶);
        // at −λ = 4 this is exactly e¹⁴+e²⁵+e³⁶.
        let g = su3_metric(&omega, &rho).unwrap();
        assert_eq!(g, Matrix::identity(6));
        let report = su3_validate(&omega, &rho).unwrap();
        assert!(report.is_valid(), "report: {report:?}");
        assert_eq!(report.normalization_ratio, Some(int(1)));
    }

    #[test]
    fn family_metric_matches_block_formula_in_float() {
        // Generic admissible point, checked against the closed-form blocks
        // g = 2^{2/3}(−λ)^{−1/3}·[(b₁²+b₃²)·1₃ ⊕ (b₁²−b₂b₃)·1₃ with cross
        // blocks −b₁(b₂+b₃)/2·1₃] in floating point.
        let (b1, b2, b3) = (1i64, 0i64, 1i64); // λ = 1·1 − 4·2·1 = −7
        let rho = family_rho(b1, b2, b3).to_f64();
        let neg_lambda = 7.0_f64;
        let a = 2.0_f64.powf(-1.0 / 3.0) * neg_lambda.powf(1.0 / 6.0);
        let omega: Form<f64> = Form::from_terms(
            6,
            2,
            &[(a, &[1, 4]), (a, &[2, 5]), (a, &[3, 6])],
        );
        let g = su3_metric(&omega, &rho).unwrap();
        let pref = 2.0_f64.powf(2.0 / 3.0) * neg_lambda.powf(-1.0 / 3.0);
        let d1 = pref * ((b1 * b1 + b3 * b3) as f64);
        let d2 = pref * ((b1 * b1 - b2 * b3) as f64);
        let cross = pref * (-(b1 * (b2 + b3)) as f64) / 2.0;
        for i in 0..3 {
            for j in 0..3 {
                let (want_d1, want_d2, want_cross) = if i == j {
                    (d1, d2, cross)
                } else {
                    (0.0, 0.0, 0.0)
                };
                assert!((g[(i, j)] - want_d1).abs() < 1e-12);
                assert!((g[(i + 3, j + 3)] - want_d2).abs() < 1e-12);
                assert!((g[(i, j + 3)] - want_cross).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn validate_reports_each_failure_mode() {
        let (omega, rho) = model_pair();
        let all = su3_validate(&omega, &rho).unwrap();
        assert!(all.is_valid());
        assert_eq!(all.normalization_ratio, Some(int(1)));
        assert_eq!(all.lambda, int(-4));

        // Doubling ω keeps (a,b,c,e) but breaks the volume normalization:
        // ω³ scales by 8, so c = 2/16 = 1/8.
        let double = omega.scale(&int(2));
        let r = su3_validate(&double, &rho).unwrap();
        assert!(r.omega_nondegenerate && r.lambda_negative && r.compatible && r.metric_positive);
        assert!(!r.normalized);
        assert_eq!(r.normalization_ratio, Some(ratio(1, 8)));

        // Decomposable ρ: λ = 0 fails (b).
        let dec: Form<Rational> = Form::basis(6, &[1, 2, 3]);
        let r = su3_validate(&omega, &dec).unwrap();
        assert!(!r.lambda_negative && !r.normalized && !r.metric_positive);

        // Negating ω flips the orientation of ω³ and hence J, so the metric
        // is unchanged: (−ω₀, ρ₀) is still a valid pair.
        let r = su3_validate(&omega.neg(), &rho).unwrap();
        assert!(r.is_valid());
        assert_eq!(su3_metric(&omega.neg(), &rho).unwrap(), Matrix::identity(6));

        // Split-signature pairing: flipping only the last plane of ω makes
        // the induced bilinear form indefinite.
        let split: Form<Rational> = Form::from_terms(
            6,
            2,
            &[(int(1), &[1, 2]), (int(1), &[3, 4]), (int(-1), &[5, 6])],
        );
        let r = su3_validate(&split, &rho).unwrap();
        assert!(r.omega_nondegenerate && r.lambda_negative && r.compatible);
        assert!(!r.metric_positive);
        assert_eq!(su3_metric(&split, &rho).unwrap_err(), GStructError::NotPositive);
    }

    #[test]
    fn structure_caches_consistent_data() {
        let (omega, rho) = model_pair();
        let s = SU3Structure::new(omega.clone(), rho.clone()).unwrap();
        assert_eq!(*s.lambda(), int(-4));
        assert_eq!(*s.metric(), Matrix::identity(6));
        assert_eq!(*s.rhohat(), model::su3_model_rhohat());
        // ω(J·, J·) = ω: pull ω back along J and compare.
        assert_eq!(omega.pullback(s.j()), omega);
        // Rejections: incompatible pair.
        let bad = SU3Structure::new(Form::basis(6, &[1, 3]), rho);
        assert_eq!(bad.unwrap_err(), GStructError::NotPositive);
    }
}
