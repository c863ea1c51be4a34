//! Dimension-raising lifts: stationary structures one level up.
//!
//! A valid pair `(ω, ρ)` on six dimensions lifts to the definite three-form
//! `φ = ω∧e⁷ + ρ` on seven (the new covector is appended last), and a
//! definite `φ` lifts to the four-form `Φ = e⁸∧φ + ⋆_φφ` on eight. Both
//! lifts extend the metric by an orthonormal direction: `g ⊕ 1`.

use super::{expect_shape, G2Structure, GStructError};
use crate::form::Form;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// A four-form on an eight-dimensional space together with the metric it
/// came with. Only constructed through [`lift_g2_to_spin7`]; there is no
/// generic admissibility test at this level.
#[derive(Debug, Clone)]
pub struct Spin7Structure<S: Scalar> {
    phi4: Form<S>,
    metric: Matrix<S>,
}

impl<S: Scalar> Spin7Structure<S> {
    pub fn phi4(&self) -> &Form<S> {
        &self.phi4
    }
    /// Gram matrix of the lifted metric.
    pub fn metric(&self) -> &Matrix<S> {
        &self.metric
    }
    pub fn to_f64(&self) -> Spin7Structure<f64> {
        Spin7Structure {
            phi4: self.phi4.to_f64(),
            metric: self.metric.to_f64(),
        }
    }
}

/// Lift a valid pair `(ω, ρ)` to the definite three-form `φ = ω∧e⁷ + ρ`.
///
/// The input is validated first; the output is constructed through
/// [`G2Structure::new`], so it passes its own definiteness check, and its
/// induced metric is the block extension `g ⊕ 1` of the pair's metric.
pub fn lift_su3_to_g2<S: Scalar>(
    omega: &Form<S>,
    rho: &Form<S>,
) -> Result<G2Structure<S>, GStructError> {
    expect_shape(omega, 2, 6)?;
    expect_shape(rho, 3, 6)?;
    let report = super::su3_validate(omega, rho)?;
    if !report.is_valid() {
        return Err(GStructError::NotPositive);
    }
    let e7 = Form::basis(7, &[7]);
    let phi = omega.extended(7).wedge(&e7).add(&rho.extended(7));
    G2Structure::new(phi)
}

/// Lift a definite three-form to the four-form `Φ = e⁸∧φ + ⋆_φφ`, with the
/// metric extended by an orthonormal last direction.
pub fn lift_g2_to_spin7<S: Scalar>(g2: &G2Structure<S>) -> Spin7Structure<S> {
    let e8 = Form::basis(8, &[8]);
    let phi4 = e8
        .wedge(&g2.phi().extended(8))
        .add(&g2.star_phi().extended(8));
    let g = g2.metric().gram();
    let metric = Matrix::from_fn(8, 8, |i, j| {
        if i < 7 && j < 7 {
            g[(i, j)].clone()
        } else if i == 7 && j == 7 {
            S::one()
        } else {
            S::zero()
        }
    });
    Spin7Structure { phi4, metric }
}

#[cfg(test)]
mod tests {
    use super::super::model;
    use super::*;
    use crate::lie::LieAlgebra;
    use crate::scalar::{int, Rational};

    #[test]
    fn lift_of_model_pair_is_model_form() {
        let (omega, rho) = model::su3_model::<Rational>();
        let g2 = lift_su3_to_g2(&omega, &rho).unwrap();
        assert_eq!(*g2.phi(), model::g2_model());
        assert_eq!(*g2.metric().gram(), Matrix::identity(7));

        let spin7 = lift_g2_to_spin7(&g2);
        assert_eq!(*spin7.phi4(), model::spin7_model());
        assert_eq!(*spin7.metric(), Matrix::identity(8));
    }

    #[test]
    fn lift_metric_is_block_extension() {
        // Scaled pair: ω ↦ 4ω, ρ ↦ 8ρ keeps the pair valid and normalized
        // (λ scales by 8² = 64… both sides of the normalization scale
        // consistently), with metric 4·1₆.
        let (omega, rho) = model::su3_model::<Rational>();
        let omega = omega.scale(&int(4));
        let rho = rho.scale(&int(8));
        let report = super::super::su3_validate(&omega, &rho).unwrap();
        assert!(report.is_valid(), "report: {report:?}");
        let g2 = lift_su3_to_g2(&omega, &rho).unwrap();
        let mut expected = Matrix::identity(7).map(|c: &Rational| c.mul(&int(4)));
        expected[(6, 6)] = int(1);
        assert_eq!(*g2.metric().gram(), expected);
    }

    #[test]
    fn abelian_lift_is_closed_and_coclosed() {
        let (omega, rho) = model::su3_model::<Rational>();
        let g2 = lift_su3_to_g2(&omega, &rho).unwrap();
        let r7: LieAlgebra<Rational> = LieAlgebra::abelian(7);
        assert!(r7.d(g2.phi()).is_zero());
        assert!(r7.d(g2.star_phi()).is_zero());
    }

    #[test]
    fn invalid_pairs_do_not_lift() {
        let (omega, _) = model::su3_model::<Rational>();
        let dec: Form<Rational> = Form::basis(6, &[1, 2, 3]);
        assert!(lift_su3_to_g2(&omega, &dec).is_err());
    }
}
