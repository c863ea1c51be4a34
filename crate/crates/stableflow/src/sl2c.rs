//! The invariant half-flat family on the real form of the complex special
//! linear algebra in dimension six, and its reduction to one scalar ODE.
//!
//! The algebra carries a basis `e1..e6` in which the first three vectors span
//! a compact subalgebra (a copy of the rotation algebra). Forms invariant
//! under that subalgebra make up a one-dimensional space of 2-forms and a
//! four-dimensional space of 3-forms; imposing the closure conditions
//! `d(ω∧ω) = 0`, `dρ = 0` and the stability/compatibility normalizations cuts
//! the invariant half-flat structures down to a family with three shape
//! parameters `b1, b2, b3` (subject to one open inequality) and a sign `ε`
//! fixing the time direction. [`classify`] produces the structure pair for a
//! parameter point; everything is generated from [`algebra`] by invariant
//! theory at module initialization, not hard-coded.
//!
//! On this family the geometric evolution collapses to a single scalar ODE
//! `ẋ = −2^{−1/3} ε f(x)^{1/6}` for an explicit quartic `f` with leading
//! coefficient −12 ([`reduced_polynomial`], [`reduced_rhs`]). Separation of
//! variables turns the maximal existence window into two improper integrals
//! between `b3` and the neighbouring roots of `f` ([`blowup_window`]).
//! [`extension_report`] classifies the end behaviour at the two window ends —
//! metric blow-up versus fibre collapse — and, in the collapse case, performs
//! the numeric even-extension checks: the limit of the rescaled fibre
//! coefficient is 1, and the odd time-derivatives of `x` vanish at the
//! collapse ([`derivative_recursion`] builds the exact derivative tables).

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::form::Form;
use crate::lie::LieAlgebra;
use crate::linalg::Matrix;
use crate::poly::{real_roots, Poly};
use crate::quad::{integrate, integrate_singular};
use crate::scalar::{Rational, Scalar};

/// Largest supported derivative order for [`derivative_recursion`].
pub const MAX_DERIVATIVE_ORDER: usize = 12;

/// Fibre metric coefficient above which a window end counts as metric
/// blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e3;

/// Fibre metric coefficient below which a window end counts as fibre
/// collapse.
pub const COLLAPSE_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum Sl2cError {
    #[error("parameters are not admissible: the stability invariant is {lambda:.6e} ≥ 0")]
    Inadmissible { lambda: f64 },
    #[error("the time-direction sign must be +1 or -1, got {eps}")]
    BadEpsilon { eps: f64 },
    #[error("parameters must be finite numbers")]
    NonFinite,
    #[error("x = {x} lies outside the open interval where the reduced polynomial is positive")]
    OutsideWindow { x: f64 },
    #[error("t = {t} lies outside the maximal time window")]
    OutsideTimeWindow { t: f64 },
    #[error("the homothety reduction needs a vanishing first coefficient, got b1 = {b1}")]
    NeedsVanishingB1 { b1: f64 },
    #[error("3·b3 − b2 = 0 leaves no scale to normalize (the invariant is {lambda:.6e} ≥ 0 there)")]
    DegenerateScale { lambda: f64 },
    #[error("derivative tables are supported up to order {max}, got {requested}")]
    OrderTooLarge { requested: usize, max: usize },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// The six-dimensional algebra, presented through the differentials
///
/// ```text
/// de1 = e23 − e56    de2 = −e13 + e46    de3 = e12 − e45
/// de4 = e26 − e35    de5 = −e16 + e34    de6 = e15 − e24
/// ```
///
/// It is semisimple (its derived algebra is everything) and `span(e1,e2,e3)`
/// is a compact subalgebra.
pub fn algebra<S: Scalar>() -> LieAlgebra<S> {
    let one = S::one;
    let neg = || S::one().neg();
    let de = |terms: &[(S, &[u8])]| Form::from_terms(6, 2, terms);
    LieAlgebra::from_differentials(vec![
        de(&[(one(), &[2, 3]), (neg(), &[5, 6])]),
        de(&[(neg(), &[1, 3]), (one(), &[4, 6])]),
        de(&[(one(), &[1, 2]), (neg(), &[4, 5])]),
        de(&[(one(), &[2, 6]), (neg(), &[3, 5])]),
        de(&[(neg(), &[1, 6]), (one(), &[3, 4])]),
        de(&[(one(), &[1, 5]), (neg(), &[2, 4])]),
    ])
}

/// Coefficient vectors of the compact generators `e1, e2, e3`.
pub fn compact_generators<S: Scalar>() -> Vec<Vec<S>> {
    (0..3)
        .map(|i| {
            let mut v = vec![S::zero(); 6];
            v[i] = S::one();
            v
        })
        .collect()
}

/// The quartic stability invariant of the 3-form with coefficients
/// `(b1, b2, b3, −b1)` on the canonical invariant basis:
/// `λ = b1²(b2+b3)² − 4(b1²+b3²)(b1²−b2·b3)`.
///
/// The parameter point is admissible exactly when `λ < 0`.
pub fn lambda_invariant(b1: f64, b2: f64, b3: f64) -> f64 {
    let s = b1 * b1;
    s * (b2 + b3) * (b2 + b3) - 4.0 * (s + b3 * b3) * (s - b2 * b3)
}

/// An admissible parameter point of the invariant half-flat family.
///
/// Constructed through [`Params::new`], which enforces `ε ∈ {−1, +1}` and the
/// open stability inequality `λ(b1,b2,b3) < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    eps: f64,
    b1: f64,
    b2: f64,
    b3: f64,
    lambda: f64,
}

impl Params {
    pub fn new(eps: f64, b1: f64, b2: f64, b3: f64) -> Result<Self, Sl2cError> {
        if !(eps == 1.0 || eps == -1.0) {
            return Err(Sl2cError::BadEpsilon { eps });
        }
        if !(b1.is_finite() && b2.is_finite() && b3.is_finite()) {
            return Err(Sl2cError::NonFinite);
        }
        let lambda = lambda_invariant(b1, b2, b3);
        if !(lambda < 0.0) {
            return Err(Sl2cError::Inadmissible { lambda });
        }
        Ok(Params { eps, b1, b2, b3, lambda })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn b3(&self) -> f64 {
        self.b3
    }

    /// The stability invariant `λ(b1,b2,b3) < 0`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The parameter point reached once the third coefficient has moved to
    /// `x`: the evolution keeps `b1` and `b2 − 3·b3` constant, so the moved
    /// point is `(ε, b1, 3x + b2 − 3b3, x)`.
    pub fn slide_to(&self, x: f64) -> Result<Params, Sl2cError> {
        Params::new(self.eps, self.b1, 3.0 * x + self.b2 - 3.0 * self.b3, x)
    }
}

/// The invariant 2-form line and the canonical basis of the invariant
/// 3-forms, generated once from [`algebra`] by exact invariant theory.
struct FamilyBasis {
    beta: Form<f64>,
    gamma: [Form<f64>; 4],
    // The exact forms back the regression tests that pin the generated basis
    // to its closed expressions.
    #[allow(dead_code)]
    beta_exact: Form<Rational>,
    #[allow(dead_code)]
    gamma_exact: [Form<Rational>; 4],
}

static FAMILY: OnceLock<FamilyBasis> = OnceLock::new();

fn family_basis() -> &'static FamilyBasis {
    FAMILY.get_or_init(build_family_basis)
}

fn build_family_basis() -> FamilyBasis {
    let g: LieAlgebra<Rational> = algebra();
    let gens = compact_generators::<Rational>();

    // The invariant 2-forms are one line; normalize the generator so its
    // coefficient on e14 is one.
    let two = g.invariant_forms(2, &gens);
    assert_eq!(two.len(), 1, "invariant 2-forms must be a line");
    let pivot = two[0].coeff_on(&[1, 4]);
    assert!(!pivot.is_zero(), "the invariant 2-form must touch e14");
    let beta_exact = two[0].scale(&Rational::one().div(&pivot));

    // The invariant 3-forms are four-dimensional. Label a canonical basis by
    // the four readout monomials below: γ_k is the unique invariant 3-form
    // whose readout vector is the k-th unit vector.
    let three = g.invariant_forms(3, &gens);
    assert_eq!(three.len(), 4, "invariant 3-forms must be four-dimensional");
    let readouts: [&[u8]; 4] = [&[1, 2, 3], &[4, 5, 6], &[1, 2, 6], &[1, 5, 6]];
    let r = Matrix::from_rows(
        readouts
            .iter()
            .map(|ix| three.iter().map(|f| f.coeff_on(ix)).collect())
            .collect(),
    );
    let mut gamma_exact: Vec<Form<Rational>> = Vec::with_capacity(4);
    for k in 0..4 {
        let mut e = vec![Rational::zero(); 4];
        e[k] = Rational::one();
        let c = r.least_squares(&e);
        assert!(
            r.residual_norm(&c, &e) <= 1e-12,
            "the readout monomials must separate the invariant 3-forms"
        );
        let form = three
            .iter()
            .zip(&c)
            .fold(Form::zero(6, 3), |acc, (f, ci)| acc.add(&f.scale(ci)));
        gamma_exact.push(form);
    }
    let gamma_exact: [Form<Rational>; 4] = gamma_exact.try_into().expect("four labeled forms");

    // Exact structural relations the family construction relies on:
    // compatibility is automatic (β ∧ γ_k = 0), ω-closure is automatic
    // (d(β∧β) = 0), and the closed 3-forms are exactly the span of
    // γ1 − γ4, γ2, γ3.
    let beta2 = beta_exact.wedge(&beta_exact);
    assert!(g.d(&beta2).is_zero(), "β∧β must be closed");
    for gk in &gamma_exact {
        assert!(beta_exact.wedge(gk).is_zero(), "β ∧ γ_k must vanish");
    }
    assert!(g.d(&gamma_exact[1]).is_zero(), "γ2 must be closed");
    assert!(g.d(&gamma_exact[2]).is_zero(), "γ3 must be closed");
    let d1 = g.d(&gamma_exact[0]);
    let d4 = g.d(&gamma_exact[3]);
    assert!(!d1.is_zero() && d1.sub(&d4).is_zero(), "dγ1 = dγ4 ≠ 0");
    assert!(
        d1.sub(&beta2.scale(&Rational::from_ratio(1, 2))).is_zero(),
        "dγ1 must equal β∧β/2"
    );

    FamilyBasis {
        beta: beta_exact.to_f64(),
        gamma: [
            gamma_exact[0].to_f64(),
            gamma_exact[1].to_f64(),
            gamma_exact[2].to_f64(),
            gamma_exact[3].to_f64(),
        ],
        beta_exact,
        gamma_exact,
    }
}

/// The structure pair at a parameter point.
#[derive(Debug, Clone)]
pub struct FamilyStructure {
    /// `ω = ε 2^{−1/3}(−λ)^{1/6} · β`.
    pub omega: Form<f64>,
    /// `ρ = b1 γ1 + b2 γ2 + b3 γ3 − b1 γ4`.
    pub rho: Form<f64>,
    /// The stability invariant of `ρ`.
    pub lambda: f64,
    /// The coefficient of `ω` on the normalized invariant 2-form `β`.
    pub omega_scale: f64,
}

/// The invariant half-flat structure at an admissible parameter point.
///
/// The output passes the full five-condition structure validation and the
/// half-flat closure conditions; the 3-form coefficient pattern
/// `(b1, b2, b3, −b1)` is exactly the kernel of `d` on the invariant
/// 3-forms, computed—not postulated—at basis construction time.
pub fn classify(p: &Params) -> FamilyStructure {
    let fb = family_basis();
    let a = p.eps * 0.5f64.cbrt() * (-p.lambda).powf(1.0 / 6.0);
    let omega = fb.beta.scale(&a);
    let rho = fb.gamma[0]
        .scale(&p.b1)
        .add(&fb.gamma[1].scale(&p.b2))
        .add(&fb.gamma[2].scale(&p.b3))
        .sub(&fb.gamma[3].scale(&p.b1));
    FamilyStructure { omega, rho, lambda: p.lambda, omega_scale: a }
}

/// The exact quartic `f(x) = −λ(b1, 3x + b2 − 3b3, x)` whose positivity
/// bounds the maximal window of the reduced evolution. Its leading
/// coefficient is always exactly −12.
pub fn reduced_polynomial(p: &Params) -> Poly {
    let rb1 = Rational::from_float(p.b1).expect("validated finite");
    let rb2 = Rational::from_float(p.b2).expect("validated finite");
    let rb3 = Rational::from_float(p.b3).expect("validated finite");
    let three = Rational::from_int(3);
    let b1c = Poly::from_coeffs(vec![rb1]);
    let y2 = Poly::from_coeffs(vec![rb2.sub(&three.mul(&rb3)), three]);
    let y3 = Poly::x();
    let b1sq = b1c.mul(&b1c);
    let sum = y2.add(&y3);
    let term1 = b1sq.mul(&sum.mul(&sum));
    let term2 = b1sq
        .add(&y3.mul(&y3))
        .mul(&b1sq.sub(&y2.mul(&y3)))
        .scale(&Rational::from_int(4));
    let f = term1.sub(&term2).neg();
    assert_eq!(f.coeff(4), Rational::from_int(-12), "the quartic is monic up to −12");
    f
}

/// Right-hand side of the reduced evolution `ẋ = −2^{−1/3} ε f(x)^{1/6}`.
///
/// Errors with [`Sl2cError::OutsideWindow`] where `f(x) < 0`; at a root of
/// `f` the value is 0 (degenerate endpoint).
pub fn reduced_rhs(p: &Params, x: f64) -> Result<f64, Sl2cError> {
    let fx = -lambda_invariant(p.b1, 3.0 * x + p.b2 - 3.0 * p.b3, x);
    if fx < 0.0 {
        return Err(Sl2cError::OutsideWindow { x });
    }
    Ok(-p.eps * 0.5f64.cbrt() * fx.powf(1.0 / 6.0))
}

/// The fibre metric coefficient `g(e1,e1) = 2^{2/3}(b1² + x²) f(x)^{−1/3}`
/// along the evolution, as a function of the moving coefficient `x`.
pub fn metric_v_coefficient(p: &Params, x: f64) -> Result<f64, Sl2cError> {
    let fx = -lambda_invariant(p.b1, 3.0 * x + p.b2 - 3.0 * p.b3, x);
    if fx <= 0.0 {
        return Err(Sl2cError::OutsideWindow { x });
    }
    Ok(4f64.cbrt() * (p.b1 * p.b1 + x * x) / fx.cbrt())
}

/// The maximal existence window of the reduced evolution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Window {
    /// Backward end of the time window (`a < 0 < b`).
    pub a: f64,
    /// Forward end of the time window.
    pub b: f64,
    /// Value of `x` approached as `t → a`.
    pub x_at_a: f64,
    /// Value of `x` approached as `t → b`.
    pub x_at_b: f64,
    /// Multiplicity of `x_at_a` as a root of the reduced quartic.
    pub mult_at_a: u32,
    /// Multiplicity of `x_at_b` as a root of the reduced quartic.
    pub mult_at_b: u32,
    /// Summed error estimate of the two improper quadratures.
    pub quadrature_error: f64,
}

/// Compute the maximal window by separation of variables.
///
/// The ends are the nearest roots of the reduced quartic on either side of
/// `b3` (they always exist: the quartic is positive at `b3` and has leading
/// coefficient −12). Roots are isolated exactly with their multiplicities;
/// the improper integrals `2^{1/3}∫ f^{−1/6}` are regularized with a
/// substitution exponent chosen by the root multiplicity.
pub fn blowup_window(p: &Params) -> Result<Window, Sl2cError> {
    let f = reduced_polynomial(p);
    let rb3 = Rational::from_float(p.b3).expect("validated finite");
    if f.eval(&rb3).signum() <= 0 {
        // Cannot happen for validated params unless the float invariant and
        // the exact one disagree right at the boundary.
        return Err(Sl2cError::Inadmissible { lambda: p.lambda });
    }
    let width = Rational::from_ratio(1, 1_000_000_000_000_000_000);
    let roots = real_roots(&f, &width);
    let mut below: Option<(f64, u32)> = None;
    let mut above: Option<(f64, u32)> = None;
    for r in &roots {
        if r.lo <= rb3 && rb3 <= r.hi {
            return Err(Sl2cError::Internal(
                "base point indistinguishable from a root of the quartic".into(),
            ));
        }
        let mid = r.midpoint_f64();
        let m = r.multiplicity as u32;
        if r.hi < rb3 {
            // Keep the largest root below the base point.
            if below.is_none_or(|(x, _)| mid > x) {
                below = Some((mid, m));
            }
        } else {
            // r.lo > rb3 here; keep the smallest root above.
            if above.is_none_or(|(x, _)| mid < x) {
                above = Some((mid, m));
            }
        }
    }
    let (x_lo, m_lo) = below.ok_or_else(|| {
        Sl2cError::Internal("a degree-4 polynomial with negative leading coefficient must vanish below the base point".into())
    })?;
    let (x_hi, m_hi) = above.ok_or_else(|| {
        Sl2cError::Internal("a degree-4 polynomial with negative leading coefficient must vanish above the base point".into())
    })?;

    let cbrt2 = 2f64.cbrt();
    let integrand = |y: f64| {
        let v = f.eval_f64(y);
        if v > 0.0 {
            v.powf(-1.0 / 6.0)
        } else {
            0.0
        }
    };
    let q_above = integrate_singular(integrand, p.b3, x_hi, 0, m_hi, 1e-9);
    let q_below = integrate_singular(integrand, x_lo, p.b3, m_lo, 0, 1e-9);
    let dur_above = cbrt2 * q_above.value;
    let dur_below = cbrt2 * q_below.value;
    let quadrature_error = cbrt2 * (q_above.error + q_below.error);

    // Forward motion decreases x when ε = +1, so the forward end sits at the
    // lower root; ε = −1 reverses time and swaps the ends.
    let w = if p.eps > 0.0 {
        Window {
            a: -dur_above,
            b: dur_below,
            x_at_a: x_hi,
            x_at_b: x_lo,
            mult_at_a: m_hi,
            mult_at_b: m_lo,
            quadrature_error,
        }
    } else {
        Window {
            a: -dur_below,
            b: dur_above,
            x_at_a: x_lo,
            x_at_b: x_hi,
            mult_at_a: m_lo,
            mult_at_b: m_hi,
            quadrature_error,
        }
    };
    Ok(w)
}

/// Time at which the moving coefficient passes through `x` (with `x = b3` at
/// `t = 0`): `t(x) = −ε 2^{1/3} ∫_{b3}^{x} f(y)^{−1/6} dy`.
///
/// `x` must lie strictly inside the window's x-range.
pub fn time_at(p: &Params, w: &Window, x: f64) -> Result<f64, Sl2cError> {
    let (xmin, xmax) = (w.x_at_a.min(w.x_at_b), w.x_at_a.max(w.x_at_b));
    if !(x > xmin && x < xmax) {
        return Err(Sl2cError::OutsideWindow { x });
    }
    let f = reduced_polynomial(p);
    let integrand = |y: f64| {
        let v = f.eval_f64(y);
        if v > 0.0 {
            v.powf(-1.0 / 6.0)
        } else {
            0.0
        }
    };
    let q = integrate(integrand, p.b3, x, 1e-11);
    Ok(-p.eps * 2f64.cbrt() * q.value)
}

/// Invert [`time_at`] by bisection: the value of the moving coefficient at
/// time `t ∈ (a, b)`.
pub fn x_at_time(p: &Params, w: &Window, t: f64) -> Result<f64, Sl2cError> {
    if !(t > w.a && t < w.b) {
        return Err(Sl2cError::OutsideTimeWindow { t });
    }
    if t == 0.0 {
        return Ok(p.b3);
    }
    let (mut lo, mut hi) = (w.x_at_a.min(w.x_at_b), w.x_at_a.max(w.x_at_b));
    let scale = 1.0 + lo.abs().max(hi.abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let tm = time_at(p, w, mid)?;
        // t(x) is strictly decreasing in x for ε = +1 and increasing for
        // ε = −1.
        let target_above_mid = if p.eps > 0.0 { tm > t } else { tm < t };
        if target_above_mid {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * scale {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// How the structure degenerates at a window end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndKind {
    /// The fibre metric coefficient grows beyond [`BLOWUP_THRESHOLD`].
    MetricBlowup,
    /// The fibre metric coefficient decays below [`COLLAPSE_THRESHOLD`];
    /// the structure extends smoothly over the collapsed fibre.
    FiberCollapse,
}

/// End behaviour at one window end.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EndReport {
    /// The end time (`a` or `b` of the window).
    pub t: f64,
    /// The root of the reduced quartic approached there.
    pub x: f64,
    /// Multiplicity of that root.
    pub multiplicity: u32,
    pub kind: EndKind,
    /// Whether the geometry continues smoothly past this end.
    pub extension_possible: bool,
    /// Fibre metric coefficient at the deepest probe point.
    pub fiber_coefficient_deepest: f64,
    /// Largest fibre metric coefficient over the probe sequence.
    pub fiber_coefficient_peak: f64,
}

/// The fibre-collapse limit check: samples of
/// `R(t') = 4 x̃ / (t'² (4 − 3 x̃)^{1/3})` on the homothety-normalized
/// trajectory, where `x̃` is the moving coefficient at distance `t'` from the
/// collapse time, together with a Richardson extrapolation. Smooth extension
/// requires the limit 1.
#[derive(Debug, Clone, Serialize)]
pub struct VPartLimit {
    /// `(t', R(t'))` at `t' = 10^{−2}, 10^{−2.5}, 10^{−3}`.
    pub samples: Vec<(f64, f64)>,
    /// Estimated convergence order of `R(t') − limit` (the asymptotic
    /// `x̃ ≈ 4^{−2/3} t'²` makes the true order 2).
    pub order_estimate: f64,
    /// Extrapolated limit.
    pub value: f64,
}

/// One odd-derivative check at the collapse end: the exact derivative table
/// evaluated on the normalized trajectory against a finite-difference
/// derivative of the quadrature-inverted `x(t)`.
#[derive(Debug, Clone, Serialize)]
pub struct OddDerivativeCheck {
    /// Derivative order (odd).
    pub order: usize,
    /// Distance from the collapse time at which the comparison is made.
    pub at_t_prime: f64,
    /// Exact-table value of `d^k x/dt^k` there.
    pub table_value: f64,
    /// Finite-difference value from the integrated trajectory.
    pub finite_difference: f64,
    /// `|table − finite difference|`.
    pub discrepancy: f64,
    /// Structural vanishing at the collapse: every term of the table carries
    /// a positive power of `x`, so the odd derivative tends to 0 — the
    /// requirement for extending `x(t)` to a smooth even function.
    pub vanishes_at_collapse: bool,
}

/// Full end-behaviour diagnosis of a parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct ExtensionReport {
    pub params: Params,
    pub window: Window,
    pub end_a: EndReport,
    pub end_b: EndReport,
    /// Present exactly when a fibre-collapse end exists (`b1 = 0`); the
    /// collapse-limit samples live on the homothety-normalized trajectory and
    /// are therefore the same for every parameter point with `b1 = 0`.
    pub v_part_limit: Option<VPartLimit>,
    /// Odd-derivative smoothness checks, present exactly when `b1 = 0`.
    pub odd_derivative_checks: Vec<OddDerivativeCheck>,
}

/// Probe one window end along `x_k = root + (b3 − root)·2^{−k}`, `k ≤ 40`,
/// and classify it as metric blow-up or fibre collapse.
fn probe_end(p: &Params, t: f64, x_root: f64, mult: u32) -> Result<EndReport, Sl2cError> {
    let mut peak = f64::NEG_INFINITY;
    let mut deepest = f64::NAN;
    for k in 1..=40 {
        let xk = x_root + (p.b3 - x_root) * 0.5f64.powi(k);
        match metric_v_coefficient(p, xk) {
            Ok(g) => {
                peak = peak.max(g);
                deepest = g;
            }
            // Rounding pushed the probe past the root; keep what we have.
            Err(_) => break,
        }
    }
    if !deepest.is_finite() {
        return Err(Sl2cError::Internal("no valid probe point near a window end".into()));
    }
    let kind = if peak > BLOWUP_THRESHOLD {
        EndKind::MetricBlowup
    } else if deepest < COLLAPSE_THRESHOLD {
        EndKind::FiberCollapse
    } else {
        return Err(Sl2cError::Internal(format!(
            "end behaviour unresolved: peak {peak:.3e}, deepest {deepest:.3e}"
        )));
    };
    Ok(EndReport {
        t,
        x: x_root,
        multiplicity: mult,
        kind,
        extension_possible: kind == EndKind::FiberCollapse,
        fiber_coefficient_deepest: deepest,
        fiber_coefficient_peak: peak,
    })
}

/// Distance in time from the collapse of the normalized model
/// (`ε = +1, b = (0, −1, 1)`, quartic `4x³(4−3x)`, collapse root 0) to the
/// point where the moving coefficient equals `x`.
fn model_duration_from_collapse(x: f64) -> f64 {
    let g = |y: f64| {
        let v = 4.0 * y.powi(3) * (4.0 - 3.0 * y);
        if v > 0.0 {
            v.powf(-1.0 / 6.0)
        } else {
            0.0
        }
    };
    2f64.cbrt() * integrate_singular(g, 0.0, x, 3, 0, 1e-11).value
}

/// Invert [`model_duration_from_collapse`] by bisection on `[0, 1]`.
fn model_x_from_collapse(t_prime: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-16 {
        let mid = 0.5 * (lo + hi);
        if model_duration_from_collapse(mid) < t_prime {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn v_part_limit() -> VPartLimit {
    let samples: Vec<(f64, f64)> = [1e-2, 10f64.powf(-2.5), 1e-3]
        .iter()
        .map(|&tp| {
            let x = model_x_from_collapse(tp);
            (tp, 4.0 * x / (tp * tp * (4.0 - 3.0 * x).cbrt()))
        })
        .collect();
    let (r0, r1, r2) = (samples[0].1, samples[1].1, samples[2].1);
    let d01 = r0 - r1;
    let d12 = r1 - r2;
    let (order_estimate, value) = if d12.abs() < 1e-14 {
        (0.0, r2)
    } else {
        let ratio = d01 / d12;
        let order = ratio.abs().ln() / 10f64.sqrt().ln();
        (order, r2 - d12 / (ratio - 1.0))
    };
    VPartLimit { samples, order_estimate, value }
}

fn odd_derivative_checks() -> Result<Vec<OddDerivativeCheck>, Sl2cError> {
    let tables = derivative_recursion(3)?;
    let t0 = 0.25; // distance from the collapse time
    let h = 0.02;
    // xs[i] is x at time t_collapse − t0 + (i − 3)·h, i.e. at distance
    // t0 − (i − 3)·h from the collapse.
    let xs: Vec<f64> = (-3..=3)
        .map(|k| model_x_from_collapse(t0 - k as f64 * h))
        .collect();
    let x0 = xs[3];
    let d1_fd = (-xs[5] + 8.0 * xs[4] - 8.0 * xs[2] + xs[1]) / (12.0 * h);
    let d3_fd = (xs[0] - 8.0 * xs[1] + 13.0 * xs[2] - 13.0 * xs[4] + 8.0 * xs[5] - xs[6])
        / (8.0 * h * h * h);
    let mut out = Vec::new();
    for (order, fd) in [(1usize, d1_fd), (3usize, d3_fd)] {
        let table = &tables[order - 1];
        let tv = table.eval(x0);
        out.push(OddDerivativeCheck {
            order,
            at_t_prime: t0,
            table_value: tv,
            finite_difference: fd,
            discrepancy: (tv - fd).abs(),
            vanishes_at_collapse: table.vanishes_at_zero(),
        });
    }
    Ok(out)
}

/// Diagnose the end behaviour of the evolution at `p`: the window, the kind
/// of degeneration at each end, and — when a fibre-collapse end exists
/// (exactly the case `b1 = 0`) — the numeric smooth-extension checks.
pub fn extension_report(p: &Params) -> Result<ExtensionReport, Sl2cError> {
    let window = blowup_window(p)?;
    let end_a = probe_end(p, window.a, window.x_at_a, window.mult_at_a)?;
    let end_b = probe_end(p, window.b, window.x_at_b, window.mult_at_b)?;
    let (v_part_limit, odd_checks) = if p.b1 == 0.0 {
        (Some(v_part_limit()), odd_derivative_checks()?)
    } else {
        (None, Vec::new())
    };
    Ok(ExtensionReport {
        params: *p,
        window,
        end_a,
        end_b,
        v_part_limit,
        odd_derivative_checks: odd_checks,
    })
}

/// The scale reduction of a `b1 = 0` parameter point onto the reference point
/// `(ε, 0, −1, 1)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Homothety {
    /// `s = 4/(3·b3 − b2)`; the moving coefficient maps as `x ↦ s·x`.
    pub scale: f64,
    /// The reference parameter point the input is equivalent to.
    pub normalized: Params,
    /// The constant ratio `g_input / g_reference` on sampled points,
    /// verified to equal `s^{−2/3}`.
    pub metric_ratio: f64,
}

impl Homothety {
    /// Where the moving coefficient `x` of the input lands on the reference
    /// trajectory.
    pub fn map_x(&self, x: f64) -> f64 {
        self.scale * x
    }
}

/// Normalize a `b1 = 0` parameter point to the reference point `(ε,0,−1,1)`
/// by the scale transformation `x ↦ 4x/(3b3 − b2)`.
///
/// Only `b1 = 0` and `3b3 − b2 ≠ 0` are required — the base point itself may
/// sit on the admissibility boundary; the verification below samples the open
/// window interior, which is always admissible. The structure metrics of
/// input and reference differ by the constant factor `s^{−2/3}`; this is
/// re-verified on sampled points to 1e−8 before the map is returned.
pub fn homothety_normalize(eps: f64, b1: f64, b2: f64, b3: f64) -> Result<Homothety, Sl2cError> {
    if !(eps == 1.0 || eps == -1.0) {
        return Err(Sl2cError::BadEpsilon { eps });
    }
    if !(b1.is_finite() && b2.is_finite() && b3.is_finite()) {
        return Err(Sl2cError::NonFinite);
    }
    if b1 != 0.0 {
        return Err(Sl2cError::NeedsVanishingB1 { b1 });
    }
    let d = 3.0 * b3 - b2;
    if d == 0.0 {
        return Err(Sl2cError::DegenerateScale { lambda: lambda_invariant(0.0, b2, b3) });
    }
    let scale = 4.0 / d;
    let normalized = Params::new(eps, 0.0, -1.0, 1.0).expect("the reference point is admissible");

    // Verify the constant metric ratio on sampled interior points. Sampling
    // is done in the reference window (0, 4/3) and mapped back through x̃/s,
    // which lands in the input's open window for every admissible x̃.
    let expected = 1.0 / (scale * scale).cbrt();
    let mut ratios: Vec<f64> = Vec::new();
    for x_ref in [0.15, 0.35, 0.55, 0.75, 0.95, 1.15] {
        let x_in = x_ref / scale;
        let p_in = Params::new(eps, 0.0, 3.0 * x_in + b2 - 3.0 * b3, x_in)?;
        let p_ref = normalized.slide_to(x_ref)?;
        let s_in = classify(&p_in);
        let s_ref = classify(&p_ref);
        let g_in = crate::gstruct::su3_metric(&s_in.omega, &s_in.rho)
            .map_err(|e| Sl2cError::Internal(format!("input metric: {e}")))?;
        let g_ref = crate::gstruct::su3_metric(&s_ref.omega, &s_ref.rho)
            .map_err(|e| Sl2cError::Internal(format!("reference metric: {e}")))?;
        for i in 0..6 {
            for j in 0..6 {
                let a = g_in[(i, j)];
                let b = g_ref[(i, j)];
                if b.abs() > 1e-9 {
                    ratios.push(a / b);
                } else if a.abs() > 1e-9 {
                    return Err(Sl2cError::Internal(
                        "metric entries do not share a sparsity pattern".into(),
                    ));
                }
            }
        }
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in &ratios {
        lo = lo.min(*r);
        hi = hi.max(*r);
    }
    if hi - lo > 1e-8 * hi.abs().max(1.0) || (lo - expected).abs() > 1e-8 * expected.max(1.0) {
        return Err(Sl2cError::Internal(format!(
            "metric ratio not the constant {expected:.6e}: spread [{lo:.12e}, {hi:.12e}]"
        )));
    }
    Ok(Homothety { scale, normalized, metric_ratio: expected })
}

/// One term `coeff · x^{x_pow_halves/2} · (4−3x)^{base_pow_sixths/6}` of a
/// derivative table of the normalized model `ẋ = −x^{1/2}(4−3x)^{1/6}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivTerm {
    pub coeff: Rational,
    pub x_pow_halves: i64,
    pub base_pow_sixths: i64,
}

/// The exact expansion of `d^k x / dt^k` in powers of `x^{1/2}` and
/// `(4−3x)^{1/6}` along the normalized model.
#[derive(Debug, Clone)]
pub struct DerivTable {
    pub order: usize,
    pub terms: Vec<DerivTerm>,
}

impl DerivTable {
    pub fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff.to_f64()
                    * x.powf(t.x_pow_halves as f64 / 2.0)
                    * (4.0 - 3.0 * x).powf(t.base_pow_sixths as f64 / 6.0)
            })
            .sum()
    }

    /// True when every term carries a positive power of `x`, forcing the
    /// derivative to vanish as `x → 0⁺`. Holds for every odd order.
    pub fn vanishes_at_zero(&self) -> bool {
        self.terms.iter().all(|t| t.x_pow_halves >= 1)
    }
}

/// Exact derivative tables of orders `1..= max_order` for the normalized
/// model `ẋ = −x^{1/2}(4−3x)^{1/6}`.
///
/// Differentiating one term `c·x^{p/2}(4−3x)^{q/6}` in time and substituting
/// the evolution law gives
///
/// ```text
/// −c·(p/2)·x^{(p−1)/2}(4−3x)^{(q+1)/6}  +  c·(q/2)·x^{(p+1)/2}(4−3x)^{(q−5)/6}
/// ```
///
/// starting from the single first-order term `(−1)·x^{1/2}(4−3x)^{1/6}`.
/// Terms are merged on equal exponent pairs, so the tables stay small; the
/// growth still bounds the supported order by [`MAX_DERIVATIVE_ORDER`].
pub fn derivative_recursion(max_order: usize) -> Result<Vec<DerivTable>, Sl2cError> {
    if max_order > MAX_DERIVATIVE_ORDER {
        return Err(Sl2cError::OrderTooLarge { requested: max_order, max: MAX_DERIVATIVE_ORDER });
    }
    let mut tables = Vec::with_capacity(max_order);
    let mut cur: BTreeMap<(i64, i64), Rational> = BTreeMap::new();
    cur.insert((1, 1), Rational::from_int(-1));
    let snapshot = |order: usize, m: &BTreeMap<(i64, i64), Rational>| DerivTable {
        order,
        terms: m
            .iter()
            .map(|(&(p, q), c)| DerivTerm { coeff: c.clone(), x_pow_halves: p, base_pow_sixths: q })
            .collect(),
    };
    if max_order >= 1 {
        tables.push(snapshot(1, &cur));
    }
    for order in 2..=max_order {
        let mut next: BTreeMap<(i64, i64), Rational> = BTreeMap::new();
        let mut add = |key: (i64, i64), v: Rational| {
            let entry = next.entry(key).or_insert_with(Rational::zero);
            *entry = entry.add(&v);
        };
        for (&(p, q), c) in &cur {
            if p != 0 {
                add((p - 1, q + 1), c.mul(&Rational::from_ratio(-p, 2)));
            }
            if q != 0 {
                add((p + 1, q - 5), c.mul(&Rational::from_ratio(q, 2)));
            }
        }
        next.retain(|_, v| !v.is_zero());
        debug_assert!(next.keys().all(|&(p, _)| p >= 0), "x-powers stay nonnegative");
        cur = next;
        tables.push(snapshot(order, &cur));
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{
        integrate as flow_integrate, DegenerationReason, FlowKind, FlowSpec, InitialStructure,
        Termination, Tolerances,
    };
    use crate::gstruct::{is_half_flat, su3_lambda, su3_metric, su3_validate};
    use rand::{Rng, SeedableRng};

    fn p(eps: f64, b1: f64, b2: f64, b3: f64) -> Params {
        Params::new(eps, b1, b2, b3).expect("admissible test point")
    }

    fn form_close(a: &Form<f64>, b: &Form<f64>, tol: f64) -> bool {
        a.sub(b).max_abs_coeff().abs() <= tol
    }

    #[test]
    fn the_algebra_is_semisimple_with_a_compact_three_dimensional_subalgebra() {
        let g: LieAlgebra<Rational> = algebra();
        g.jacobi_check().expect("jacobi identity");
        assert_eq!(g.derived_algebra().dim(), 6, "the derived algebra is everything");
        // span(e1,e2,e3) is a subalgebra: brackets of the first three basis
        // vectors have no components along e4, e5, e6.
        for i in 1..=3usize {
            for j in 1..=3usize {
                let v = g.bracket_basis(i, j);
                for c in &v[3..] {
                    assert!(c.is_zero(), "[e{i}, e{j}] leaves the compact span");
                }
            }
        }
    }

    #[test]
    fn the_invariant_forms_match_their_closed_expressions() {
        let fb = family_basis();
        let one = Rational::one();
        let beta = Form::from_terms(
            6,
            2,
            &[(one.clone(), &[1, 4]), (one.clone(), &[2, 5]), (one.clone(), &[3, 6])],
        );
        assert!(fb.beta_exact.sub(&beta).is_zero(), "β = e14 + e25 + e36");
        let neg = one.neg();
        let g1 = Form::from_terms(6, 3, &[(one.clone(), &[1, 2, 3])]);
        let g2 = Form::from_terms(6, 3, &[(one.clone(), &[4, 5, 6])]);
        let g3 = Form::from_terms(
            6,
            3,
            &[
                (one.clone(), &[1, 2, 6]),
                (neg.clone(), &[1, 3, 5]),
                (one.clone(), &[2, 3, 4]),
            ],
        );
        let g4 = Form::from_terms(
            6,
            3,
            &[
                (one.clone(), &[1, 5, 6]),
                (neg.clone(), &[2, 4, 6]),
                (one.clone(), &[3, 4, 5]),
            ],
        );
        for (k, expect) in [g1, g2, g3, g4].iter().enumerate() {
            assert!(
                fb.gamma_exact[k].sub(expect).is_zero(),
                "γ{} disagrees with its closed expression",
                k + 1
            );
        }
    }

    #[test]
    fn the_two_form_differential_relations_hold_exactly() {
        let fb = family_basis();
        let g: LieAlgebra<Rational> = algebra();
        // dβ = −γ3 − 3 γ2.
        let expect = fb.gamma_exact[2]
            .neg()
            .sub(&fb.gamma_exact[1].scale(&Rational::from_int(3)));
        assert!(g.d(&fb.beta_exact).sub(&expect).is_zero());
    }

    #[test]
    fn parameter_validation_enforces_the_open_stability_inequality() {
        assert_eq!(p(1.0, 0.0, -1.0, 1.0).lambda(), -4.0);
        assert_eq!(p(1.0, 1.0, 0.0, 0.0).lambda(), -4.0);
        match Params::new(1.0, 0.0, 1.0, 1.0) {
            Err(Sl2cError::Inadmissible { lambda }) => assert_eq!(lambda, 4.0),
            other => panic!("expected inadmissibility, got {other:?}"),
        }
        assert!(matches!(
            Params::new(2.0, 0.0, -1.0, 1.0),
            Err(Sl2cError::BadEpsilon { .. })
        ));
        assert!(matches!(
            Params::new(1.0, f64::NAN, -1.0, 1.0),
            Err(Sl2cError::NonFinite)
        ));
    }

    #[test]
    fn the_model_point_classifies_to_the_reference_structure() {
        let s = classify(&p(1.0, 0.0, -1.0, 1.0));
        let fb = family_basis();
        // (−λ)^{1/6} = 4^{1/6} cancels the 2^{−1/3}: ω = β exactly.
        assert!(form_close(&s.omega, &fb.beta, 1e-15));
        assert!((s.omega_scale - 1.0).abs() <= 1e-15);
        let g = su3_metric(&s.omega, &s.rho).expect("positive metric");
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (g[(i, j)] - want).abs() <= 1e-13,
                    "metric entry ({i},{j}) = {} off the identity",
                    g[(i, j)]
                );
            }
        }
        // The stability invariant of the classified 3-form agrees with the
        // closed quartic expression.
        let lam = su3_lambda(&s.rho).expect("stable 3-form");
        assert!((lam - (-4.0)).abs() <= 1e-13);
    }

    #[test]
    fn a_nonzero_first_coefficient_still_gives_a_diagonal_metric_when_b2_b3_vanish() {
        let s = classify(&p(1.0, 1.0, 0.0, 0.0));
        let g = su3_metric(&s.omega, &s.rho).expect("positive metric");
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert!(g[(i, j)].abs() <= 1e-13, "off-diagonal entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn random_admissible_draws_classify_to_validated_half_flat_structures() {
        let g: LieAlgebra<f64> = algebra();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x5_12c);
        let mut checked = 0usize;
        while checked < 1000 {
            let eps = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let b1 = rng.random_range(-2.0..2.0);
            let b2 = rng.random_range(-2.0..2.0);
            let b3 = rng.random_range(-2.0..2.0);
            // Keep clearly inside the open admissible cone; the validation
            // thresholds are float thresholds.
            if lambda_invariant(b1, b2, b3) >= -1e-6 {
                continue;
            }
            let params = Params::new(eps, b1, b2, b3).expect("filtered admissible");
            let s = classify(&params);
            let report = su3_validate(&s.omega, &s.rho).expect("validation runs");
            assert!(
                report.omega_nondegenerate
                    && report.lambda_negative
                    && report.compatible
                    && report.normalized
                    && report.metric_positive,
                "draw (ε={eps}, {b1}, {b2}, {b3}) fails validation: {report:?}"
            );
            assert!(is_half_flat(&g, &s.omega, &s.rho), "draw is not half-flat");
            checked += 1;
        }
    }

    #[test]
    fn the_reduced_quartic_matches_its_closed_expressions() {
        // b1 = 0: f = 4 x³ (3b3 − b2 − 3x).
        let f = reduced_polynomial(&p(1.0, 0.0, -1.0, 1.0));
        assert_eq!(f.coeff(0), Rational::zero());
        assert_eq!(f.coeff(1), Rational::zero());
        assert_eq!(f.coeff(2), Rational::zero());
        assert_eq!(f.coeff(3), Rational::from_int(16));
        assert_eq!(f.coeff(4), Rational::from_int(-12));
        // b = (1, 0, 0): f = 4 − 24x² − 12x⁴.
        let f = reduced_polynomial(&p(1.0, 1.0, 0.0, 0.0));
        assert_eq!(f.coeff(0), Rational::from_int(4));
        assert_eq!(f.coeff(1), Rational::zero());
        assert_eq!(f.coeff(2), Rational::from_int(-24));
        assert_eq!(f.coeff(3), Rational::zero());
        assert_eq!(f.coeff(4), Rational::from_int(-12));
    }

    #[test]
    fn the_reduced_rhs_hits_its_anchor_values() {
        let model = p(1.0, 0.0, -1.0, 1.0);
        assert!((reduced_rhs(&model, 1.0).unwrap() - (-1.0)).abs() <= 1e-15);
        assert_eq!(reduced_rhs(&model, 0.0).unwrap(), 0.0);
        let reversed = p(-1.0, 0.0, -1.0, 1.0);
        assert!((reduced_rhs(&reversed, 1.0).unwrap() - 1.0).abs() <= 1e-15);
        // On the model the law specializes to −√x (4−3x)^{1/6}.
        for k in 1..=12 {
            let x = k as f64 / 10.0;
            let direct = -x.sqrt() * (4.0 - 3.0 * x).powf(1.0 / 6.0);
            assert!(
                (reduced_rhs(&model, x).unwrap() - direct).abs() <= 1e-13,
                "specialization fails at x = {x}"
            );
        }
        assert!(matches!(
            reduced_rhs(&model, 2.0),
            Err(Sl2cError::OutsideWindow { .. })
        ));
    }

    #[test]
    fn the_window_of_the_model_point_matches_the_frozen_quadrature_anchors() {
        let w = blowup_window(&p(1.0, 0.0, -1.0, 1.0)).unwrap();
        // Roots of 4x³(4−3x)·…: collapse at 0 (multiplicity 3), blow-up at 4/3.
        assert!((w.x_at_b - 0.0).abs() <= 1e-12);
        assert_eq!(w.mult_at_b, 3);
        assert!((w.x_at_a - 4.0 / 3.0).abs() <= 1e-12);
        assert_eq!(w.mult_at_a, 1);
        assert!((w.b - 1.6844634059797257).abs() <= 1e-8, "b = {}", w.b);
        assert!((w.a - (-0.36892681195945145)).abs() <= 1e-8, "a = {}", w.a);
        assert!(w.quadrature_error <= 1e-7);

        let w = blowup_window(&p(1.0, 1.0, 0.0, 0.0)).unwrap();
        let x2 = 0.39331989319032864;
        assert!((w.x_at_a - x2).abs() <= 1e-12);
        assert!((w.x_at_b + x2).abs() <= 1e-12);
        assert_eq!((w.mult_at_a, w.mult_at_b), (1, 1));
        let t2 = 0.43869119485634145;
        assert!((w.b - t2).abs() <= 1e-8, "b = {}", w.b);
        assert!((w.a + t2).abs() <= 1e-8, "a = {}", w.a);
    }

    #[test]
    fn flipping_the_time_direction_reflects_the_window() {
        let w_fwd = blowup_window(&p(1.0, 0.0, -1.0, 1.0)).unwrap();
        let w_rev = blowup_window(&p(-1.0, 0.0, -1.0, 1.0)).unwrap();
        assert!((w_rev.a + w_fwd.b).abs() <= 1e-12);
        assert!((w_rev.b + w_fwd.a).abs() <= 1e-12);
        assert_eq!(w_rev.x_at_a, w_fwd.x_at_b);
        assert_eq!(w_rev.x_at_b, w_fwd.x_at_a);
    }

    fn family_flow_spec(params: &Params, window: (f64, f64)) -> FlowSpec {
        let s = classify(params);
        FlowSpec {
            kind: FlowKind::Hitchin6,
            algebra: algebra(),
            initial: InitialStructure::Hitchin6 { omega: s.omega, rho: s.rho },
            ansatz: None,
            symmetry: Some(compact_generators()),
            t0: 0.0,
            window,
            tolerances: Tolerances::default(),
        }
    }

    #[test]
    fn the_window_matches_the_integrator_degeneration_events() {
        let params = p(1.0, 1.0, 0.0, 0.0);
        let w = blowup_window(&params).unwrap();
        let traj = flow_integrate(&family_flow_spec(&params, (-1.0, 1.0))).unwrap();
        for (term, end) in [
            (traj.termination_backward(), w.a),
            (traj.termination_forward(), w.b),
        ] {
            match term {
                Termination::Degeneration(ev) => {
                    assert_eq!(ev.reason, DegenerationReason::LambdaToZero);
                    assert!(
                        (ev.t_star - end).abs() <= 1e-6,
                        "event at {} vs quadrature end {end}",
                        ev.t_star
                    );
                }
                other => panic!("expected a degeneration, got {other:?}"),
            }
        }
    }

    #[test]
    fn the_full_flow_and_the_reduced_law_agree_on_the_moving_coefficient() {
        let params = p(1.0, 1.0, 0.0, 0.0);
        let w = blowup_window(&params).unwrap();
        let traj = flow_integrate(&family_flow_spec(&params, (-0.3, 0.35))).unwrap();
        for t in [-0.25, -0.1, 0.05, 0.2, 0.3] {
            let state = traj.forms_at(t).unwrap();
            let rho = match state {
                crate::flow::DecodedState::Hitchin6 { rho, .. } => rho,
                other => panic!("unexpected state {other:?}"),
            };
            let x_flow = rho.coeff_on(&[1, 2, 6]);
            let x_reduced = x_at_time(&params, &w, t).unwrap();
            assert!(
                (x_flow - x_reduced).abs() <= 1e-8,
                "t = {t}: flow {x_flow} vs reduced {x_reduced}"
            );
        }
    }

    #[test]
    fn the_conserved_coefficient_combinations_stay_constant_along_the_flow() {
        let params = p(1.0, 1.0, 0.0, 0.0);
        let traj = flow_integrate(&family_flow_spec(&params, (-0.3, 0.35))).unwrap();
        for s in traj.samples() {
            let state = traj.forms_at(s.t).unwrap();
            let rho = match state {
                crate::flow::DecodedState::Hitchin6 { rho, .. } => rho,
                other => panic!("unexpected state {other:?}"),
            };
            let y1 = rho.coeff_on(&[1, 2, 3]);
            let y4 = rho.coeff_on(&[1, 5, 6]);
            let y2 = rho.coeff_on(&[4, 5, 6]);
            let y3 = rho.coeff_on(&[1, 2, 6]);
            assert!((y1 - 1.0).abs() <= 1e-10, "y1 drifts: {y1}");
            assert!((y4 + 1.0).abs() <= 1e-10, "the fourth coefficient must stay −b1");
            assert!(
                (y2 - 3.0 * y3).abs() <= 1e-10,
                "y2 − 3y3 drifts at t = {}: {}",
                s.t,
                y2 - 3.0 * y3
            );
        }
    }

    #[test]
    fn flipping_the_time_direction_reverses_the_metric_path() {
        let fwd = flow_integrate(&family_flow_spec(&p(1.0, 1.0, 0.0, 0.0), (-0.25, 0.25))).unwrap();
        let rev = flow_integrate(&family_flow_spec(&p(-1.0, 1.0, 0.0, 0.0), (-0.25, 0.25))).unwrap();
        for t in [-0.2, -0.1, 0.1, 0.2] {
            let (of, rf) = match fwd.forms_at(t).unwrap() {
                crate::flow::DecodedState::Hitchin6 { omega, rho } => (omega, rho),
                other => panic!("unexpected state {other:?}"),
            };
            let (or, rr) = match rev.forms_at(-t).unwrap() {
                crate::flow::DecodedState::Hitchin6 { omega, rho } => (omega, rho),
                other => panic!("unexpected state {other:?}"),
            };
            let gf = su3_metric(&of, &rf).unwrap();
            let gr = su3_metric(&or, &rr).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    assert!(
                        (gf[(i, j)] - gr[(i, j)]).abs() <= 1e-7,
                        "metric mismatch at t = {t}, entry ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn for_vanishing_b1_the_metric_splits_into_the_two_scalar_blocks() {
        let params = p(1.0, 0.0, -1.0, 1.0);
        let d = 3.0 * params.b3() - params.b2();
        let traj = flow_integrate(&family_flow_spec(&params, (-0.3, 1.0))).unwrap();
        for s in traj.samples() {
            let (omega, rho) = match traj.forms_at(s.t).unwrap() {
                crate::flow::DecodedState::Hitchin6 { omega, rho } => (omega, rho),
                other => panic!("unexpected state {other:?}"),
            };
            let x = rho.coeff_on(&[1, 2, 6]);
            let v_scalar = x / (d - 3.0 * x).cbrt();
            let h_scalar = (d - 3.0 * x).cbrt().powi(2);
            // The block identity holds pointwise on the family: check it at
            // this sample's x on the exact family state, to 1e−10.
            let exact = classify(&params.slide_to(x).unwrap());
            let g = su3_metric(&exact.omega, &exact.rho).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    let want = if i != j {
                        0.0
                    } else if i < 3 {
                        v_scalar
                    } else {
                        h_scalar
                    };
                    assert!(
                        (g[(i, j)] - want).abs() <= 1e-10,
                        "t = {}: entry ({i},{j}) = {} wants {want}",
                        s.t,
                        g[(i, j)]
                    );
                }
            }
            // The closed form for the fibre coefficient agrees.
            let closed = metric_v_coefficient(&params, x).unwrap();
            assert!((g[(0, 0)] - closed).abs() <= 1e-10);
            // The integrated state carries the integrator's own 1e−10-scale
            // relative drift off the exact family; its metric matches within
            // that accuracy budget.
            let g_num = su3_metric(&omega, &rho).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    assert!(
                        (g_num[(i, j)] - g[(i, j)]).abs() <= 5e-9,
                        "t = {}: integrated metric drifts at ({i},{j})",
                        s.t
                    );
                }
            }
        }
    }

    #[test]
    fn time_inversion_round_trips_through_the_quadrature() {
        let params = p(1.0, 1.0, 0.0, 0.0);
        let w = blowup_window(&params).unwrap();
        assert_eq!(time_at(&params, &w, params.b3()).unwrap(), 0.0);
        for x in [-0.3, -0.15, 0.1, 0.25, 0.35] {
            let t = time_at(&params, &w, x).unwrap();
            let back = x_at_time(&params, &w, t).unwrap();
            assert!((back - x).abs() <= 1e-9, "x = {x} returns as {back}");
        }
    }

    #[test]
    fn the_model_point_extends_through_the_collapse_end_only() {
        let rep = extension_report(&p(1.0, 0.0, -1.0, 1.0)).unwrap();
        assert_eq!(rep.end_b.kind, EndKind::FiberCollapse);
        assert!(rep.end_b.extension_possible);
        assert!(rep.end_b.fiber_coefficient_deepest < COLLAPSE_THRESHOLD);
        assert_eq!(rep.end_a.kind, EndKind::MetricBlowup);
        assert!(!rep.end_a.extension_possible);
        assert!(rep.end_a.fiber_coefficient_peak > BLOWUP_THRESHOLD);

        let v = rep.v_part_limit.expect("collapse end present");
        assert!(
            (v.value - 1.0).abs() <= 1e-3,
            "collapse limit {} should be 1",
            v.value
        );
        assert!(
            v.order_estimate > 1.8 && v.order_estimate < 2.2,
            "convergence order {} should be 2",
            v.order_estimate
        );

        assert_eq!(rep.odd_derivative_checks.len(), 2);
        for check in &rep.odd_derivative_checks {
            assert!(check.vanishes_at_collapse, "order {} table", check.order);
            assert!(
                check.discrepancy <= 1e-4,
                "order {}: table {} vs finite difference {}",
                check.order,
                check.table_value,
                check.finite_difference
            );
        }
    }

    #[test]
    fn a_nonzero_first_coefficient_blows_up_at_both_ends() {
        let rep = extension_report(&p(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(rep.end_a.kind, EndKind::MetricBlowup);
        assert_eq!(rep.end_b.kind, EndKind::MetricBlowup);
        assert!(!rep.end_a.extension_possible && !rep.end_b.extension_possible);
        assert!(rep.v_part_limit.is_none());
        assert!(rep.odd_derivative_checks.is_empty());
    }

    #[test]
    fn reversing_time_swaps_the_end_verdicts() {
        let rep = extension_report(&p(-1.0, 0.0, -1.0, 1.0)).unwrap();
        assert_eq!(rep.end_a.kind, EndKind::FiberCollapse);
        assert!(rep.end_a.extension_possible);
        assert_eq!(rep.end_b.kind, EndKind::MetricBlowup);
        assert!(!rep.end_b.extension_possible);
    }

    #[test]
    fn the_extension_report_serializes_to_json() {
        let rep = extension_report(&p(1.0, 0.0, -1.0, 1.0)).unwrap();
        let json = serde_json::to_value(&rep).expect("serializable");
        assert_eq!(json["end_b"]["kind"], "fiber-collapse");
        assert_eq!(json["end_a"]["kind"], "metric-blowup");
        assert!(json["v_part_limit"]["value"].as_f64().is_some());
    }

    #[test]
    fn the_homothety_hits_its_scale_anchors() {
        assert_eq!(homothety_normalize(1.0, 0.0, -1.0, 1.0).unwrap().scale, 1.0);
        assert_eq!(homothety_normalize(1.0, 0.0, -2.0, 2.0).unwrap().scale, 0.5);
        let h = homothety_normalize(1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((h.scale - 4.0 / 3.0).abs() <= 1e-15);
        assert!(matches!(
            homothety_normalize(1.0, 0.0, 3.0, 1.0),
            Err(Sl2cError::DegenerateScale { lambda }) if lambda == 12.0
        ));
        assert!(matches!(
            homothety_normalize(1.0, 0.5, 0.0, 1.0),
            Err(Sl2cError::NeedsVanishingB1 { .. })
        ));
        // The same point is rejected outright as a parameter point.
        assert!(matches!(
            Params::new(1.0, 0.0, 3.0, 1.0),
            Err(Sl2cError::Inadmissible { lambda }) if lambda == 12.0
        ));
    }

    #[test]
    fn the_homothety_rescales_the_metric_by_the_announced_constant() {
        let h = homothety_normalize(1.0, 0.0, -2.0, 2.0).unwrap();
        assert!((h.metric_ratio - 4f64.cbrt()).abs() <= 1e-12, "s = 1/2 gives ratio 2^{{2/3}}");
        // Independent spot check away from the internal sampling grid.
        let x_ref = 0.6180339887;
        let x_in = x_ref / h.scale;
        let g_in = {
            let s = classify(&p(1.0, 0.0, 3.0 * x_in - 2.0 - 6.0, x_in));
            su3_metric(&s.omega, &s.rho).unwrap()
        };
        let g_ref = {
            let s = classify(&h.normalized.slide_to(x_ref).unwrap());
            su3_metric(&s.omega, &s.rho).unwrap()
        };
        for i in 0..6 {
            assert!(
                (g_in[(i, i)] / g_ref[(i, i)] - h.metric_ratio).abs() <= 1e-8,
                "diagonal entry {i}"
            );
        }
    }

    #[test]
    fn derivative_tables_match_the_hand_computed_low_orders() {
        let tables = derivative_recursion(12).unwrap();
        assert_eq!(tables.len(), 12);
        // Order 1: the single term −x^{1/2}(4−3x)^{1/6}.
        assert_eq!(
            tables[0].terms,
            vec![DerivTerm {
                coeff: Rational::from_int(-1),
                x_pow_halves: 1,
                base_pow_sixths: 1
            }]
        );
        // Order 2: ½(4−3x)^{1/3} − ½x(4−3x)^{−2/3}.
        assert_eq!(
            tables[1].terms,
            vec![
                DerivTerm {
                    coeff: Rational::from_ratio(1, 2),
                    x_pow_halves: 0,
                    base_pow_sixths: 2
                },
                DerivTerm {
                    coeff: Rational::from_ratio(-1, 2),
                    x_pow_halves: 2,
                    base_pow_sixths: -4
                },
            ]
        );
        // Odd orders vanish structurally at the collapse; even ones do not.
        for t in &tables {
            if t.order % 2 == 1 {
                assert!(t.vanishes_at_zero(), "order {} must vanish at 0⁺", t.order);
            }
        }
        assert!(!tables[1].vanishes_at_zero());
        assert!(matches!(
            derivative_recursion(13),
            Err(Sl2cError::OrderTooLarge { .. })
        ));
    }

    #[test]
    fn the_even_table_agrees_with_a_finite_difference_of_the_inverted_trajectory() {
        // Fourth-order central stencil for the second derivative, on the
        // quadrature-inverted normalized trajectory.
        let tables = derivative_recursion(2).unwrap();
        let t0 = 0.25;
        let h = 0.02;
        let xs: Vec<f64> = (-2..=2)
            .map(|k| model_x_from_collapse(t0 - k as f64 * h))
            .collect();
        let d2_fd =
            (-xs[4] + 16.0 * xs[3] - 30.0 * xs[2] + 16.0 * xs[1] - xs[0]) / (12.0 * h * h);
        let tv = tables[1].eval(xs[2]);
        assert!(
            (tv - d2_fd).abs() <= 1e-4,
            "table {tv} vs finite difference {d2_fd}"
        );
    }

    #[test]
    fn random_draws_confirm_the_reduced_quartic_tracks_the_stability_invariant() {
        // The float evaluation of the exact quartic and the direct float
        // invariant agree along slides; this ties reduced_polynomial,
        // lambda_invariant and slide_to together.
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let mut done = 0;
        while done < 200 {
            let b1 = rng.random_range(-2.0..2.0);
            let b2 = rng.random_range(-2.0..2.0);
            let b3 = rng.random_range(-2.0..2.0);
            if lambda_invariant(b1, b2, b3) >= -1e-3 {
                continue;
            }
            let params = p(1.0, b1, b2, b3);
            let f = reduced_polynomial(&params);
            let x = rng.random_range(-1.0..1.0);
            let via_poly = f.eval_f64(x);
            let via_invariant = -lambda_invariant(b1, 3.0 * x + b2 - 3.0 * b3, x);
            assert!(
                (via_poly - via_invariant).abs() <= 1e-10 * (1.0 + via_poly.abs()),
                "quartic drift at ({b1},{b2},{b3}), x={x}"
            );
            if let Ok(slid) = params.slide_to(x) {
                assert!((-slid.lambda() - via_invariant).abs() <= 1e-12 * (1.0 + via_invariant.abs()));
            }
            done += 1;
        }
    }
}
