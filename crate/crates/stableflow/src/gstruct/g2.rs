//! Seven-dimensional structures: definite three-forms and their metrics.
//!
//! A three-form `φ` on a seven-dimensional space induces the symmetric
//! pairing `B(X,Y) = coefficient of (X⌟φ)∧(Y⌟φ)∧φ against e^{1…7}`. For
//! definite `φ` the matrix `B` is (positive or negative) definite and the
//! metric is the det-normalized rescaling `g = B / r` with
//! `r = (6²·det B)^{1/9}`, calibrated so the model form of
//! [`super::model::g2_model`] (where `B = 6·1`) yields the identity. The
//! ninth root is odd, so a negatively-oriented `φ` (negative-definite `B`)
//! still produces a positive metric; the sign of `B` is recorded as the
//! induced orientation, and Hodge duals flip sign with it.

use super::{expect_shape, GStructError};
use crate::form::Form;
use crate::hodge::Metric;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// The symmetric pairing matrix `B[(i,j)] = ((e_i⌟φ)∧(e_j⌟φ)∧φ)(e_{1…7})`.
pub fn g2_b_matrix<S: Scalar>(phi: &Form<S>) -> Result<Matrix<S>, GStructError> {
    expect_shape(phi, 3, 7)?;
    let mut contractions = Vec::with_capacity(7);
    for i in 0..7 {
        let mut v = vec![S::zero(); 7];
        v[i] = S::one();
        contractions.push(phi.contract(&v));
    }
    let mut b = Matrix::zeros(7, 7);
    for i in 0..7 {
        for j in i..7 {
            let c = contractions[i]
                .wedge(&contractions[j])
                .wedge(phi)
                .top_coefficient();
            b[(i, j)] = c.clone();
            b[(j, i)] = c;
        }
    }
    Ok(b)
}

fn definiteness_sign<S: Scalar>(b: &Matrix<S>) -> Option<i32> {
    // Leading principal minors: all positive ⇒ positive definite; strictly
    // alternating starting negative ⇒ negative definite.
    let mut pos = true;
    let mut neg = true;
    for k in 1..=b.rows() {
        let sub = Matrix::from_fn(k, k, |i, j| b[(i, j)].clone());
        let s = sub.det().signum();
        if s <= 0 {
            pos = false;
        }
        let expected = if k % 2 == 1 { -1 } else { 1 };
        if s != expected {
            neg = false;
        }
        if !pos && !neg {
            return None;
        }
    }
    Some(if pos { 1 } else { -1 })
}

/// Metric, volume coefficient and orientation sign induced by a definite
/// three-form: `g = B / (36·det B)^{1/9}`, `vol = √(det g)`, and the sign of
/// `B`'s definiteness (the induced orientation relative to `e^{1…7}`).
///
/// Errors with [`GStructError::NotG2`] when `B` is not definite and with
/// [`GStructError::InexactRoot`] when exact scalars cannot represent the
/// required roots.
pub fn g2_metric<S: Scalar>(phi: &Form<S>) -> Result<(Matrix<S>, S, i32), GStructError> {
    let b = g2_b_matrix(phi)?;
    let sign = definiteness_sign(&b).ok_or(GStructError::NotG2)?;
    let det_b = b.det();
    let r = S::from_int(36)
        .mul(&det_b)
        .nth_root(9)
        .ok_or(GStructError::InexactRoot)?;
    let g = b.map(|c| c.div(&r));
    let vol = g.det().nth_root(2).ok_or(GStructError::InexactRoot)?;
    Ok((g, vol, sign))
}

/// A definite three-form with its induced metric, volume and Hodge dual.
#[derive(Debug, Clone)]
pub struct G2Structure<S: Scalar> {
    phi: Form<S>,
    metric: Metric<S>,
    volume: S,
    orientation: i32,
    star_phi: Form<S>,
}

impl<S: Scalar> G2Structure<S> {
    pub fn new(phi: Form<S>) -> Result<Self, GStructError> {
        let (g, volume, orientation) = g2_metric(&phi)?;
        let metric = Metric::from_gram(g);
        let star_phi = star_in(&metric, orientation, &phi)?;
        Ok(G2Structure {
            phi,
            metric,
            volume,
            orientation,
            star_phi,
        })
    }

    pub fn phi(&self) -> &Form<S> {
        &self.phi
    }
    pub fn metric(&self) -> &Metric<S> {
        &self.metric
    }
    /// Volume coefficient `√(det g)` against `e^{1…7}` (always positive; the
    /// induced orientation is carried separately).
    pub fn volume(&self) -> &S {
        &self.volume
    }
    /// `+1` when the induced orientation agrees with `e^{1…7}`, else `−1`.
    pub fn orientation(&self) -> i32 {
        self.orientation
    }
    /// Cached Hodge dual `⋆_φ φ` in the induced metric and orientation.
    pub fn star_phi(&self) -> &Form<S> {
        &self.star_phi
    }

    /// Hodge dual of an arbitrary form in the induced metric/orientation.
    pub fn star(&self, beta: &Form<S>) -> Result<Form<S>, GStructError> {
        star_in(&self.metric, self.orientation, beta)
    }

    pub fn to_f64(&self) -> G2Structure<f64> {
        G2Structure {
            phi: self.phi.to_f64(),
            metric: Metric::from_gram(self.metric.gram().to_f64()),
            volume: self.volume.to_f64(),
            orientation: self.orientation,
            star_phi: self.star_phi.to_f64(),
        }
    }
}

fn star_in<S: Scalar>(
    metric: &Metric<S>,
    orientation: i32,
    beta: &Form<S>,
) -> Result<Form<S>, GStructError> {
    let star = metric
        .hodge_star(beta)
        .ok_or(GStructError::InexactRoot)?;
    Ok(if orientation < 0 { star.neg() } else { star })
}

#[cfg(test)]
mod tests {
    use super::super::model;
    use super::*;
    use crate::scalar::{int, Rational};

    #[test]
    fn model_form_induces_identity_metric_and_frozen_dual() {
        let phi: Form<Rational> = model::g2_model();
        let b = g2_b_matrix(&phi).unwrap();
        assert_eq!(b, Matrix::identity(7).map(|c: &Rational| c.mul(&int(6))));
        let (g, vol, sign) = g2_metric(&phi).unwrap();
        assert_eq!(g, Matrix::identity(7));
        assert_eq!(vol, int(1));
        assert_eq!(sign, 1);
        let s = G2Structure::new(phi).unwrap();
        assert_eq!(*s.star_phi(), model::g2_model_star());
    }

    #[test]
    fn negated_model_gives_same_metric_opposite_orientation() {
        let phi: Form<Rational> = model::g2_model::<Rational>().neg();
        let (g, vol, sign) = g2_metric(&phi).unwrap();
        assert_eq!(g, Matrix::identity(7));
        assert_eq!(vol, int(1));
        assert_eq!(sign, -1);
        // ⋆(−φ) in the flipped orientation: (−1)·(−⋆φ) = ⋆φ... the dual of
        // φ itself picks up both signs: ⋆_{−φ}(−φ) = +⋆φ₀.
        let s = G2Structure::new(phi).unwrap();
        assert_eq!(*s.star_phi(), model::g2_model_star());
    }

    #[test]
    fn scaling_homogeneity() {
        // φ ↦ 8φ multiplies the metric by 8^{2/3} = 4 exactly.
        let phi: Form<Rational> = model::g2_model::<Rational>().scale(&int(8));
        let (g, vol, sign) = g2_metric(&phi).unwrap();
        assert_eq!(g, Matrix::identity(7).map(|c: &Rational| c.mul(&int(4))));
        assert_eq!(sign, 1);
        assert_eq!(vol, int(128)); // 4^{7/2}
    }

    #[test]
    fn non_definite_forms_are_rejected() {
        let dec: Form<Rational> = Form::basis(7, &[1, 2, 3]);
        assert_eq!(g2_metric(&dec).unwrap_err(), GStructError::NotG2);
    }

    #[test]
    fn pullback_naturality_of_the_metric() {
        // g(A*φ) = Aᵀ·g(φ)·A for invertible A (checked on one substitution).
        let phi: Form<Rational> = model::g2_model();
        let mut a = Matrix::identity(7);
        a[(0, 1)] = int(2);
        a[(2, 5)] = int(-1);
        a[(6, 3)] = int(3);
        let (g, _, sign) = g2_metric(&phi.pullback(&a)).unwrap();
        let (g0, _, _) = g2_metric(&phi).unwrap();
        assert_eq!(g, a.transpose().mul(&g0).mul(&a));
        assert_eq!(sign, 1); // det A = 1 preserves orientation
    }
}
