//! Special-geometry structures on oriented vector spaces.
//!
//! Four structure families are supported, one per ambient dimension:
//!
//! | dimension | data                                  | type               |
//! |-----------|---------------------------------------|--------------------|
//! | 5         | `(α, ω₁, ω₂, ω₃)` ∈ Λ¹ × (Λ²)³        | [`SU2Structure`]   |
//! | 6         | `(ω, ρ)` ∈ Λ² × Λ³                    | [`SU3Structure`]   |
//! | 7         | `φ` ∈ Λ³                              | [`G2Structure`]    |
//! | 8         | `Φ` ∈ Λ⁴                              | [`Spin7Structure`] |
//!
//! The six-dimensional case carries the stable-form calculus (the linear map
//! `K_ρ`, the quartic invariant `λ`, the almost-complex structure `J_ρ`, the
//! companion form `ρ̂` and the induced metric); the seven-dimensional case
//! derives its metric from the cubic pairing `B(X,Y) = (X⌟φ)∧(Y⌟φ)∧φ`.
//! Dimension-raising lifts connect the levels, and the closure predicates
//! [`is_hypo`], [`is_half_flat`] and [`is_cocalibrated`] express the
//! first-order conditions that the evolution equations preserve.

mod g2;
mod lift;
pub mod model;
mod su2;
mod su3;

pub use g2::{g2_b_matrix, g2_metric, G2Structure};
pub use lift::{lift_g2_to_spin7, lift_su3_to_g2, Spin7Structure};
pub use su2::{su2_common_kernel, su2_metric, su2_validate, SU2Structure, Su2Report};
pub use su3::{
    su3_j, su3_k, su3_lambda, su3_metric, su3_psi, su3_rhohat, su3_validate, SU3Structure,
    Su3Report,
};

use crate::form::Form;
use crate::lie::LieAlgebra;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use thiserror::Error;

/// Absolute residual bound below which a floating-point form counts as zero
/// in the closure predicates and validation reports.
pub const FLOAT_RESIDUAL_TOL: f64 = 1e-10;

/// Errors raised by structure constructors and the stable-form operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GStructError {
    /// A form had the wrong degree or lived on the wrong space.
    #[error("expected a {expected_degree}-form on a {expected_dim}-dimensional space, got a {degree}-form on a {dim}-dimensional space")]
    Shape {
        expected_degree: usize,
        expected_dim: usize,
        degree: usize,
        dim: usize,
    },
    /// The three-form is not stable of the required type (λ ≥ 0), so no
    /// almost-complex structure can be extracted from it.
    #[error("not stable of the required type")]
    NotStable,
    /// The pair fails the compatibility conditions (a)–(e) checked by
    /// [`su3_validate`]; in particular the induced bilinear form is not
    /// positive definite.
    #[error("conditions (a)–(e) not satisfiable")]
    NotPositive,
    /// The cubic pairing of the three-form is not definite.
    #[error("not a G₂-form")]
    NotG2,
    /// Exact arithmetic cannot represent a required real root; re-run the
    /// computation over `f64` if an approximate answer is acceptable.
    #[error("exact mode cannot represent the required root")]
    InexactRoot,
    /// A structure failed a constructive validity check.
    #[error("invalid structure: {0}")]
    Invalid(String),
}

/// True when the form is exactly zero (exact scalars) or all coefficients are
/// within [`FLOAT_RESIDUAL_TOL`] of zero (floating point).
pub(crate) fn essentially_zero<S: Scalar>(f: &Form<S>) -> bool {
    if S::EXACT {
        f.is_zero()
    } else {
        f.max_abs_coeff().to_f64() <= FLOAT_RESIDUAL_TOL
    }
}

/// True when two scalars agree exactly (exact mode) or within
/// [`FLOAT_RESIDUAL_TOL`] relative to their size (floating point).
pub(crate) fn essentially_equal<S: Scalar>(a: &S, b: &S) -> bool {
    if S::EXACT {
        a == b
    } else {
        let scale = 1.0_f64.max(a.to_f64().abs()).max(b.to_f64().abs());
        (a.to_f64() - b.to_f64()).abs() <= FLOAT_RESIDUAL_TOL * scale
    }
}

/// Matrix of a 2-form: `M[(a,b)] = ω(e_{a+1}, e_{b+1})` (antisymmetric).
pub(crate) fn two_form_matrix<S: Scalar>(omega: &Form<S>) -> Matrix<S> {
    assert_eq!(omega.degree(), 2, "not a 2-form");
    let n = omega.space_dim();
    Matrix::from_fn(n, n, |a, b| {
        if a == b {
            S::zero()
        } else {
            omega.coeff_on(&[a as u8 + 1, b as u8 + 1])
        }
    })
}

/// Shape guard shared by the stable-form operators.
pub(crate) fn expect_shape<S: Scalar>(
    f: &Form<S>,
    degree: usize,
    dim: usize,
) -> Result<(), GStructError> {
    if f.degree() != degree || f.space_dim() != dim {
        return Err(GStructError::Shape {
            expected_degree: degree,
            expected_dim: dim,
            degree: f.degree(),
            dim: f.space_dim(),
        });
    }
    Ok(())
}

/// Hypo condition for an SU(2)-quadruple on a five-dimensional Lie algebra:
/// `dω₁ = 0`, `d(α∧ω₂) = 0` and `d(α∧ω₃) = 0`.
pub fn is_hypo<S: Scalar>(g: &LieAlgebra<S>, s: &SU2Structure<S>) -> bool {
    assert_eq!(g.dim(), 5, "hypo structures live on five-dimensional algebras");
    essentially_zero(&g.d(s.omega1()))
        && essentially_zero(&g.d(&s.alpha().wedge(s.omega2())))
        && essentially_zero(&g.d(&s.alpha().wedge(s.omega3())))
}

/// Half-flat condition for a pair `(ω, ρ)` on a six-dimensional Lie algebra:
/// `d(ω∧ω) = 0` and `dρ = 0`.
pub fn is_half_flat<S: Scalar>(g: &LieAlgebra<S>, omega: &Form<S>, rho: &Form<S>) -> bool {
    assert_eq!(g.dim(), 6, "half-flat pairs live on six-dimensional algebras");
    assert_eq!(omega.degree(), 2);
    assert_eq!(rho.degree(), 3);
    essentially_zero(&g.d(&omega.wedge(omega))) && essentially_zero(&g.d(rho))
}

/// Cocalibration condition for a definite three-form on a seven-dimensional
/// Lie algebra: `d(⋆_φ φ) = 0`, with the Hodge dual taken in the metric and
/// orientation induced by `φ`.
///
/// Exact scalars: when the induced dual is not rational the check falls back
/// to floating point internally (residual bound [`FLOAT_RESIDUAL_TOL`]).
/// Errors only when `φ` is not definite.
pub fn is_cocalibrated<S: Scalar>(g: &LieAlgebra<S>, phi: &Form<S>) -> Result<bool, GStructError> {
    assert_eq!(g.dim(), 7, "cocalibrated forms live on seven-dimensional algebras");
    match G2Structure::new(phi.clone()) {
        Ok(s) => Ok(essentially_zero(&g.d(s.star_phi()))),
        Err(GStructError::InexactRoot) => {
            let sf = G2Structure::new(phi.to_f64())?;
            Ok(essentially_zero(&g.to_f64().d(sf.star_phi())))
        }
        Err(e) => Err(e),
    }
}
