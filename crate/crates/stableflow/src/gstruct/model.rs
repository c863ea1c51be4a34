//! Frozen model forms: the adapted-basis shapes of each structure.
//!
//! Every valid structure equals one of these models in a suitable basis; the
//! validators in this module family work by constructing such a basis (or an
//! invariant that obstructs it). All conventions downstream — the sign of the
//! almost-complex structure, the companion form `ρ̂`, Hodge duals, the lift
//! formulas — are calibrated against these literals, so they are written out
//! once here and nowhere else.

use crate::form::Form;
use crate::scalar::Scalar;

/// Model SU(2)-quadruple `(α, ω₁, ω₂, ω₃)` on a five-dimensional space:
/// `α = e⁵`, `ω₁ = e¹²+e³⁴`, `ω₂ = e¹³−e²⁴`, `ω₃ = e¹⁴+e²³`.
pub fn su2_model<S: Scalar>() -> (Form<S>, Form<S>, Form<S>, Form<S>) {
    let one = S::one;
    (
        Form::basis(5, &[5]),
        Form::from_terms(5, 2, &[(one(), &[1, 2]), (one(), &[3, 4])]),
        Form::from_terms(5, 2, &[(one(), &[1, 3]), (one().neg(), &[2, 4])]),
        Form::from_terms(5, 2, &[(one(), &[1, 4]), (one(), &[2, 3])]),
    )
}

/// Model SU(3)-pair `(ω₀, ρ₀)` on a six-dimensional space:
/// `ω₀ = e¹²+e³⁴+e⁵⁶`, `ρ₀ = e¹³⁵−e¹⁴⁶−e²³⁶−e²⁴⁵`.
pub fn su3_model<S: Scalar>() -> (Form<S>, Form<S>) {
    let one = S::one;
    (
        Form::from_terms(
            6,
            2,
            &[(one(), &[1, 2]), (one(), &[3, 4]), (one(), &[5, 6])],
        ),
        Form::from_terms(
            6,
            3,
            &[
                (one(), &[1, 3, 5]),
                (one().neg(), &[1, 4, 6]),
                (one().neg(), &[2, 3, 6]),
                (one().neg(), &[2, 4, 5]),
            ],
        ),
    )
}

/// Companion form of the model three-form:
/// `ρ̂₀ = −e¹³⁶−e¹⁴⁵−e²³⁵+e²⁴⁶`, so that `Ψ₀ = ρ₀ + iρ̂₀` is the product of
/// the complex covectors `e¹−ie²`, `e³−ie⁴`, `e⁵−ie⁶` and `ρ₀∧ρ̂₀ = −⅔ω₀³`.
pub fn su3_model_rhohat<S: Scalar>() -> Form<S> {
    let one = S::one;
    Form::from_terms(
        6,
        3,
        &[
            (one().neg(), &[1, 3, 6]),
            (one().neg(), &[1, 4, 5]),
            (one().neg(), &[2, 3, 5]),
            (one(), &[2, 4, 6]),
        ],
    )
}

/// Model definite three-form on a seven-dimensional space:
/// `φ₀ = e¹²⁷+e³⁴⁷+e⁵⁶⁷+e¹³⁵−e¹⁴⁶−e²³⁶−e²⁴⁵` (equals `ω₀∧e⁷+ρ₀`).
pub fn g2_model<S: Scalar>() -> Form<S> {
    let one = S::one;
    Form::from_terms(
        7,
        3,
        &[
            (one(), &[1, 2, 7]),
            (one(), &[3, 4, 7]),
            (one(), &[5, 6, 7]),
            (one(), &[1, 3, 5]),
            (one().neg(), &[1, 4, 6]),
            (one().neg(), &[2, 3, 6]),
            (one().neg(), &[2, 4, 5]),
        ],
    )
}

/// Hodge dual of [`g2_model`] in its induced (identity) metric:
/// `⋆φ₀ = e¹²³⁴+e¹²⁵⁶+e³⁴⁵⁶+e¹³⁶⁷+e¹⁴⁵⁷+e²³⁵⁷−e²⁴⁶⁷` (equals `½ω₀²−ρ̂₀∧e⁷`).
pub fn g2_model_star<S: Scalar>() -> Form<S> {
    let one = S::one;
    Form::from_terms(
        7,
        4,
        &[
            (one(), &[1, 2, 3, 4]),
            (one(), &[1, 2, 5, 6]),
            (one(), &[3, 4, 5, 6]),
            (one(), &[1, 3, 6, 7]),
            (one(), &[1, 4, 5, 7]),
            (one(), &[2, 3, 5, 7]),
            (one().neg(), &[2, 4, 6, 7]),
        ],
    )
}

/// Model four-form on an eight-dimensional space, the lift `e⁸∧φ₀ + ⋆φ₀`:
/// fourteen monomials, inducing the identity metric.
pub fn spin7_model<S: Scalar>() -> Form<S> {
    let one = S::one;
    Form::from_terms(
        8,
        4,
        &[
            (one().neg(), &[1, 2, 7, 8]),
            (one().neg(), &[3, 4, 7, 8]),
            (one().neg(), &[5, 6, 7, 8]),
            (one().neg(), &[1, 3, 5, 8]),
            (one(), &[1, 4, 6, 8]),
            (one(), &[2, 3, 6, 8]),
            (one(), &[2, 4, 5, 8]),
            (one(), &[1, 2, 3, 4]),
            (one(), &[1, 2, 5, 6]),
            (one(), &[3, 4, 5, 6]),
            (one(), &[1, 3, 6, 7]),
            (one(), &[1, 4, 5, 7]),
            (one(), &[2, 3, 5, 7]),
            (one().neg(), &[2, 4, 6, 7]),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio, Rational};

    #[test]
    fn model_relations_between_levels() {
        // φ₀ = ω₀∧e⁷ + ρ₀ and ⋆φ₀ = ½ω₀² − ρ̂₀∧e⁷, written on 7 dimensions.
        let (omega, rho) = su3_model::<Rational>();
        let e7 = Form::basis(7, &[7]);
        let phi = omega.extended(7).wedge(&e7).add(&rho.extended(7));
        assert_eq!(phi, g2_model());

        let half = ratio(1, 2);
        let star = omega
            .wedge(&omega)
            .scale(&half)
            .extended(7)
            .sub(&su3_model_rhohat::<Rational>().extended(7).wedge(&e7));
        assert_eq!(star, g2_model_star());

        // Φ₀ = e⁸∧φ₀ + ⋆φ₀ on 8 dimensions.
        let e8 = Form::basis(8, &[8]);
        let cayley = e8
            .wedge(&g2_model::<Rational>().extended(8))
            .add(&g2_model_star::<Rational>().extended(8));
        assert_eq!(cayley, spin7_model());
    }

    #[test]
    fn model_wedge_normalizations() {
        let (omega, rho) = su3_model::<Rational>();
        let omega3 = omega.wedge(&omega).wedge(&omega);
        assert_eq!(omega3.top_coefficient(), int(6));
        // ρ₀∧ρ̂₀ = −⅔ω₀³ = −4·e^{1…6}.
        let wedge = rho.wedge(&su3_model_rhohat());
        assert_eq!(wedge.top_coefficient(), int(-4));
    }
}
