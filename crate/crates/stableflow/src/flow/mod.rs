//! Geometric evolution equations for invariant structures on Lie algebras.
//!
//! Three flow kinds are supported, named by the dimension they live in:
//!
//! * [`FlowKind::Hypo5`] — a quadruple `(α, ω₁, ω₂, ω₃)` on a 5-dimensional
//!   algebra evolving by `ω₁' = −dα`, `(ω₂∧α)' = −dω₃`, `(ω₃∧α)' = dω₂`.
//! * [`FlowKind::Hitchin6`] — a pair `(ω, ρ)` on a 6-dimensional algebra
//!   evolving by `ρ' = dω`, `(ω²/2)' = dρ̂`.
//! * [`FlowKind::Hitchin7`] — a definite 3-form `φ` on a 7-dimensional
//!   algebra evolving by `(⋆_φφ)' = dφ`.
//!
//! Solutions sweep out a Ricci-flat product structure one dimension up; the
//! sweep at a fixed time is produced by [`Trajectory::assemble_product`] and
//! the defect of the underlying equations is measured by
//! [`Trajectory::torsion_residual`].
//!
//! Integration uses an embedded Runge–Kutta 5(4) pair with dense output.
//! Degenerations (the stability scalar or the metric determinant collapsing,
//! or coefficients blowing up) terminate the trajectory with the crossing
//! time bracketed by bisection on the dense interpolant.

mod rk45;
mod systems;

pub use systems::DecodedState;

use std::cell::Cell;

use serde_json::json;
use thiserror::Error;

use crate::form::Form;
use crate::gstruct::{lift_g2_to_spin7, su2_metric, su3_metric, G2Structure, SU2Structure};
use crate::lie::LieAlgebra;
use crate::linalg::Matrix;
use crate::scalar::Rational;

use rk45::{dopri5_trial, step_factor, DenseSegment, StageError};
use systems::FlowSystem;

/// Which evolution equation to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    /// 5-dimensional quadruple flow.
    Hypo5,
    /// 6-dimensional pair flow.
    Hitchin6,
    /// 7-dimensional definite 3-form flow.
    Hitchin7,
}

impl FlowKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlowKind::Hypo5 => "hypo5",
            FlowKind::Hitchin6 => "hitchin6",
            FlowKind::Hitchin7 => "hitchin7",
        }
    }
}

/// Initial structure data, one variant per flow kind.
#[derive(Debug, Clone)]
pub enum InitialStructure {
    Hypo5 {
        alpha: Form<f64>,
        omega1: Form<f64>,
        omega2: Form<f64>,
        omega3: Form<f64>,
    },
    Hitchin6 {
        omega: Form<f64>,
        rho: Form<f64>,
    },
    Hitchin7 {
        phi: Form<f64>,
    },
}

impl InitialStructure {
    pub fn kind(&self) -> FlowKind {
        match self {
            InitialStructure::Hypo5 { .. } => FlowKind::Hypo5,
            InitialStructure::Hitchin6 { .. } => FlowKind::Hitchin6,
            InitialStructure::Hitchin7 { .. } => FlowKind::Hitchin7,
        }
    }

    /// Rebuild initial data from a decoded trajectory state, e.g. to restart
    /// integration from a sample.
    pub fn from_decoded(state: &DecodedState) -> Self {
        match state {
            DecodedState::Hypo5 {
                alpha,
                omega1,
                omega2,
                omega3,
            } => InitialStructure::Hypo5 {
                alpha: alpha.clone(),
                omega1: omega1.clone(),
                omega2: omega2.clone(),
                omega3: omega3.clone(),
            },
            DecodedState::Hitchin6 { omega, rho } => InitialStructure::Hitchin6 {
                omega: omega.clone(),
                rho: rho.clone(),
            },
            DecodedState::Hitchin7 { phi } => InitialStructure::Hitchin7 { phi: phi.clone() },
        }
    }
}

/// Numerical tolerances and thresholds. The defaults are the contract the
/// library's own tests pin; override fields individually when needed.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Relative local error tolerance of the step controller.
    pub rel: f64,
    /// Absolute local error tolerance of the step controller.
    pub abs: f64,
    /// Width to which a degeneration time is bracketed.
    pub event_bracket: f64,
    /// Bound on the closure residual at every accepted step.
    pub closure: f64,
    /// Bound on the relative least-squares residual of the per-step
    /// tangent solves; beyond it the flow has left the ansatz subspace.
    pub ansatz_consistency: f64,
    /// Degeneration floor for the stability scalar, relative to its
    /// initial magnitude.
    pub lambda_floor_rel: f64,
    /// Degeneration floor for the metric determinant, relative to its
    /// initial magnitude.
    pub det_floor_rel: f64,
    /// Coefficient magnitude treated as blow-up.
    pub coeff_ceiling: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel: 1e-10,
            abs: 1e-12,
            event_bracket: 1e-9,
            closure: 1e-8,
            ansatz_consistency: 1e-10,
            lambda_floor_rel: 1e-12,
            det_floor_rel: 1e-12,
            coeff_ceiling: 1e12,
        }
    }
}

/// A complete integration request.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub kind: FlowKind,
    pub algebra: LieAlgebra<f64>,
    pub initial: InitialStructure,
    /// Explicit ansatz forms (any mix of degrees; each flow picks the
    /// degrees it needs). When absent, `symmetry` selects the invariant
    /// forms of the listed generators, and when that is absent too the full
    /// exterior powers are used.
    pub ansatz: Option<Vec<Form<f64>>>,
    /// Generators (coefficient vectors on the algebra basis) whose invariant
    /// forms make up the default ansatz.
    pub symmetry: Option<Vec<Vec<f64>>>,
    pub t0: f64,
    /// Requested time window `[window.0, window.1]`; must contain `t0`.
    pub window: (f64, f64),
    pub tolerances: Tolerances,
}

/// One accepted trajectory point.
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    /// State coefficients, ordered as in `Trajectory::coeff_names`.
    pub coeffs: Vec<f64>,
    /// The kind's stability scalar (`NaN` when undefined).
    pub lambda: f64,
    /// Determinant of the structure metric (`NaN` when undefined).
    pub det_g: f64,
    /// Consistency residual of the tangent solve at this state.
    pub flow_residual: f64,
    /// Closure residual of the conserved differential conditions.
    pub closure_residual: f64,
}

/// Why a trajectory degenerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegenerationReason {
    /// The stability scalar reached its floor.
    LambdaToZero,
    /// The metric determinant reached its floor.
    MetricDegenerate,
    /// A state coefficient reached the blow-up ceiling.
    CoefficientBlowup,
}

impl DegenerationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            DegenerationReason::LambdaToZero => "lambda_to_zero",
            DegenerationReason::MetricDegenerate => "metric_degenerate",
            DegenerationReason::CoefficientBlowup => "coefficient_blowup",
        }
    }
}

/// A located degeneration: the crossing time `t_star`, the bisection bracket
/// it was isolated to, and the last structurally sound sample.
#[derive(Debug, Clone)]
pub struct DegenerationEvent {
    pub t_star: f64,
    /// Bracket `(lo, hi)` with `lo ≤ hi`, at most `event_bracket` wide; the
    /// threshold is crossed inside it.
    pub bracket: (f64, f64),
    pub reason: DegenerationReason,
    pub last_good: Sample,
}

/// How one integration direction ended.
#[derive(Debug, Clone)]
pub enum Termination {
    /// The window end was reached.
    WindowExhausted,
    /// A degeneration threshold was crossed.
    Degeneration(DegenerationEvent),
    /// The step size underflowed without a diagnosable degeneration.
    StepFailure { t: f64, message: String },
}

impl Termination {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Termination::WindowExhausted => json!({"type": "window-exhausted"}),
            Termination::Degeneration(ev) => json!({
                "type": "degeneration",
                "t_star": ev.t_star,
                "bracket": [ev.bracket.0, ev.bracket.1],
                "reason": ev.reason.as_str(),
                "last_good_t": ev.last_good.t,
            }),
            Termination::StepFailure { t, message } => json!({
                "type": "step-failure",
                "t": t,
                "message": message,
            }),
        }
    }
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid initial data: {0}")]
    InvalidInitial(String),
    #[error("flow leaves the ansatz subspace (consistency residual {residual:.3e})")]
    AnsatzInconsistent { residual: f64 },
    #[error("t = {t} lies outside the computed window [{lo}, {hi}]")]
    OutsideWindow { t: f64, lo: f64, hi: f64 },
    #[error("{0}")]
    Internal(String),
}

/// The structure swept out on the product with an interval, evaluated at one
/// time. The new covector (written last) is the interval direction; the
/// metric is the structure metric extended by it orthonormally.
#[derive(Debug, Clone)]
pub enum ProductStructure {
    /// From a 5-dimensional sample: a pair on 6 dimensions.
    Su3 {
        omega: Form<f64>,
        rho: Form<f64>,
        metric: Matrix<f64>,
    },
    /// From a 6-dimensional sample: a definite 3-form on 7 dimensions.
    G2 { phi: Form<f64>, metric: Matrix<f64> },
    /// From a 7-dimensional sample: a 4-form on 8 dimensions.
    Spin7 { phi4: Form<f64>, metric: Matrix<f64> },
}

const ALL_REASONS: [DegenerationReason; 3] = [
    DegenerationReason::LambdaToZero,
    DegenerationReason::MetricDegenerate,
    DegenerationReason::CoefficientBlowup,
];

struct Floors {
    lambda: f64,
    det: f64,
    ceiling: f64,
}

fn event_crossed(
    system: &FlowSystem,
    floors: &Floors,
    reason: DegenerationReason,
    y: &[f64],
) -> bool {
    let max_c = y.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if !max_c.is_finite() {
        // A non-finite state is a blow-up, not a structure degeneration.
        return matches!(reason, DegenerationReason::CoefficientBlowup);
    }
    match reason {
        DegenerationReason::CoefficientBlowup => max_c >= floors.ceiling,
        DegenerationReason::LambdaToZero => match system.diagnostics(y) {
            Err(()) => true,
            Ok(d) => !d.lambda.is_finite() || d.lambda.abs() <= floors.lambda,
        },
        DegenerationReason::MetricDegenerate => match system.diagnostics(y) {
            Err(()) => true,
            Ok(d) => !d.det_g.is_finite() || d.det_g <= floors.det,
        },
    }
}

fn make_sample(system: &FlowSystem, t: f64, y: &[f64], flow_residual: f64) -> Sample {
    let (lambda, det_g) = match system.diagnostics(y) {
        Ok(d) => (d.lambda, d.det_g),
        Err(()) => (f64::NAN, f64::NAN),
    };
    Sample {
        t,
        coeffs: y.to_vec(),
        lambda,
        det_g,
        flow_residual,
        closure_residual: system.closure_residual(y),
    }
}

/// Bisect every crossed event on the dense segment and keep the earliest
/// crossing (ties broken by the order of `ALL_REASONS`).
fn locate_degeneration(
    system: &FlowSystem,
    floors: &Floors,
    segment: &DenseSegment,
    t_good: f64,
    t_bad: f64,
    crossed: &[DegenerationReason],
    bracket_tol: f64,
    dir: f64,
) -> DegenerationEvent {
    let mut best: Option<(f64, f64, DegenerationReason)> = None;
    for reason in crossed {
        let (mut lo, mut hi) = (t_good, t_bad);
        let mut guard = 0;
        while (hi - lo).abs() > bracket_tol && guard < 200 {
            let mid = 0.5 * (lo + hi);
            if event_crossed(system, floors, *reason, &segment.eval(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
            guard += 1;
        }
        let earlier = match &best {
            None => true,
            // Strictly earlier beyond the bracket tolerance; ties keep the
            // higher-priority reason already stored.
            Some((_, best_hi, _)) => (hi - best_hi) * dir < -bracket_tol,
        };
        if earlier {
            best = Some((lo, hi, *reason));
        }
    }
    let (lo, hi, reason) = best.expect("at least one event crossed");
    let y_good = segment.eval(lo);
    let flow_residual = system
        .rhs(&y_good)
        .map(|(_, r)| r)
        .unwrap_or(f64::NAN);
    DegenerationEvent {
        t_star: hi,
        bracket: (lo.min(hi), lo.max(hi)),
        reason,
        last_good: make_sample(system, lo, &y_good, flow_residual),
    }
}

struct DirectionRun {
    /// Samples in march order, starting with the `t0` sample.
    samples: Vec<Sample>,
    segments: Vec<DenseSegment>,
    termination: Termination,
}

fn march(
    system: &FlowSystem,
    t0: f64,
    t_end: f64,
    y0: &[f64],
    k1_0: &[f64],
    res0: f64,
    floors: &Floors,
) -> Result<DirectionRun, FlowError> {
    let tol = system.tol.clone();
    let mut samples = vec![make_sample(system, t0, y0, res0)];
    let mut segments: Vec<DenseSegment> = Vec::new();
    if t_end == t0 {
        return Ok(DirectionRun {
            samples,
            segments,
            termination: Termination::WindowExhausted,
        });
    }
    let dir = if t_end > t0 { 1.0 } else { -1.0 };
    let last_res = Cell::new(res0);
    let mut rhs = |_t: f64, y: &[f64]| -> Result<Vec<f64>, StageError<FlowError>> {
        let (v, r) = system.rhs(y)?;
        last_res.set(r);
        Ok(v)
    };

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = k1_0.to_vec();
    let mut h = dir * (t_end - t0).abs().min(1e-2);

    let termination = loop {
        if (t - t_end) * dir >= 0.0 {
            break Termination::WindowExhausted;
        }
        let mut clamped = false;
        if (t + h - t_end) * dir >= 0.0 {
            h = t_end - t;
            clamped = true;
        }
        let h_min = 1e-14 * t.abs().max(1.0);
        if h.abs() < h_min {
            break Termination::StepFailure {
                t,
                message: "step size underflow before reaching the window end".into(),
            };
        }
        match dopri5_trial(&mut rhs, t, &y, &k1, h, tol.rel, tol.abs) {
            Err(StageError::Retry) => {
                // The vector field is undefined somewhere in the trial
                // stages; approach more carefully.
                h *= 0.5;
            }
            Err(StageError::Fatal(e)) => return Err(e),
            Ok(trial) => {
                if !trial.err.is_finite() {
                    h *= 0.2;
                    continue;
                }
                if trial.err > 1.0 {
                    h *= step_factor(trial.err);
                    continue;
                }
                let t_new = if clamped { t_end } else { t + h };
                let crossed: Vec<DegenerationReason> = ALL_REASONS
                    .iter()
                    .copied()
                    .filter(|r| event_crossed(system, floors, *r, &trial.y1))
                    .collect();
                if !crossed.is_empty() {
                    let ev = locate_degeneration(
                        system,
                        floors,
                        &trial.segment,
                        t,
                        t_new,
                        &crossed,
                        tol.event_bracket,
                        dir,
                    );
                    samples.push(ev.last_good.clone());
                    segments.push(trial.segment);
                    break Termination::Degeneration(ev);
                }
                let closure = system.closure_residual(&trial.y1);
                if !system.validity_ok(&trial.y1) || !(closure <= tol.closure) {
                    h *= 0.5;
                    if h.abs() < h_min {
                        break Termination::StepFailure {
                            t,
                            message: format!(
                                "validity or closure conditions failed at every attempted step \
                                 after t = {t} (closure residual {closure:.3e})"
                            ),
                        };
                    }
                    continue;
                }
                samples.push(make_sample(system, t_new, &trial.y1, last_res.get()));
                segments.push(trial.segment);
                t = t_new;
                y = trial.y1;
                k1 = trial.k_last;
                h *= step_factor(trial.err);
            }
        }
    };
    Ok(DirectionRun {
        samples,
        segments,
        termination,
    })
}

/// Integrate a flow over its window (both directions from `t0`).
///
/// Fails fast when the initial structure is invalid, not closed, outside the
/// ansatz span, or already at a degeneration threshold, and whenever the
/// flow's tangent leaves the ansatz subspace. Degenerations and step-size
/// exhaustion are not errors: they terminate the affected direction and are
/// reported in the trajectory's terminations.
pub fn integrate(spec: &FlowSpec) -> Result<Trajectory, FlowError> {
    if spec.kind != spec.initial.kind() {
        return Err(FlowError::InvalidInitial(
            "initial structure does not match the flow kind".into(),
        ));
    }
    let (w0, w1) = spec.window;
    if !(w0 <= spec.t0 && spec.t0 <= w1) {
        return Err(FlowError::InvalidInitial(format!(
            "t0 = {} lies outside the window [{w0}, {w1}]",
            spec.t0
        )));
    }
    let system = FlowSystem::new(
        spec.kind,
        spec.algebra.clone(),
        spec.ansatz.as_deref(),
        spec.symmetry.as_deref(),
        spec.tolerances.clone(),
    )?;
    let y0 = system.encode_initial(&spec.initial)?;
    let d0 = system.diagnostics(&y0).map_err(|_| {
        FlowError::InvalidInitial("diagnostics are undefined at the initial structure".into())
    })?;
    let floors = Floors {
        lambda: spec.tolerances.lambda_floor_rel * d0.lambda.abs(),
        det: spec.tolerances.det_floor_rel * d0.det_g.abs(),
        ceiling: spec.tolerances.coeff_ceiling,
    };
    if ALL_REASONS
        .iter()
        .any(|r| event_crossed(&system, &floors, *r, &y0))
    {
        return Err(FlowError::InvalidInitial(
            "the initial structure already sits at a degeneration threshold".into(),
        ));
    }
    let (k1_0, res0) = match system.rhs(&y0) {
        Ok(v) => v,
        Err(StageError::Fatal(e)) => return Err(e),
        Err(StageError::Retry) => {
            return Err(FlowError::InvalidInitial(
                "the vector field is undefined at the initial structure".into(),
            ))
        }
    };

    let back = march(&system, spec.t0, w0, &y0, &k1_0, res0, &floors)?;
    let fwd = march(&system, spec.t0, w1, &y0, &k1_0, res0, &floors)?;

    let mut samples: Vec<Sample> = back.samples.into_iter().skip(1).rev().collect();
    samples.extend(fwd.samples);
    let mut segments: Vec<DenseSegment> = back.segments.into_iter().rev().collect();
    segments.extend(fwd.segments);

    Ok(Trajectory {
        kind: spec.kind,
        t0: spec.t0,
        requested_window: spec.window,
        samples,
        segments,
        termination_backward: back.termination,
        termination_forward: fwd.termination,
        system,
    })
}

/// An integrated flow: accepted samples, a dense interpolant, and one
/// termination record per direction.
pub struct Trajectory {
    kind: FlowKind,
    t0: f64,
    requested_window: (f64, f64),
    samples: Vec<Sample>,
    segments: Vec<DenseSegment>,
    termination_backward: Termination,
    termination_forward: Termination,
    system: FlowSystem,
}

impl std::fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trajectory")
            .field("kind", &self.kind)
            .field("t0", &self.t0)
            .field("samples", &self.samples.len())
            .field("window", &self.window())
            .field("termination_backward", &self.termination_backward)
            .field("termination_forward", &self.termination_forward)
            .finish()
    }
}

impl Trajectory {
    pub fn kind(&self) -> FlowKind {
        self.kind
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn requested_window(&self) -> (f64, f64) {
        self.requested_window
    }

    /// Accepted samples in increasing time order.
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn termination_backward(&self) -> &Termination {
        &self.termination_backward
    }

    pub fn termination_forward(&self) -> &Termination {
        &self.termination_forward
    }

    /// State coefficient labels, aligned with `Sample::coeffs`.
    pub fn coeff_names(&self) -> Vec<String> {
        self.system.coeff_names()
    }

    /// The time interval actually covered.
    pub fn window(&self) -> (f64, f64) {
        (
            self.samples.first().map(|s| s.t).unwrap_or(self.t0),
            self.samples.last().map(|s| s.t).unwrap_or(self.t0),
        )
    }

    fn check_inside(&self, t: f64) -> Result<(), FlowError> {
        let (lo, hi) = self.window();
        let slack = 1e-9 * t.abs().max(1.0);
        if t < lo - slack || t > hi + slack {
            return Err(FlowError::OutsideWindow { t, lo, hi });
        }
        Ok(())
    }

    fn segment_for(&self, t: f64) -> Option<&DenseSegment> {
        self.segments
            .iter()
            .find(|s| s.contains(t))
            .or_else(|| {
                self.segments.iter().min_by(|a, b| {
                    let da = segment_distance(a, t);
                    let db = segment_distance(b, t);
                    da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
                })
            })
    }

    /// Dense-output state at `t` (must lie in the covered window).
    pub fn state_at(&self, t: f64) -> Result<Vec<f64>, FlowError> {
        self.check_inside(t)?;
        match self.segment_for(t) {
            Some(seg) => Ok(seg.eval(t)),
            None => Ok(self
                .samples
                .first()
                .expect("a trajectory always has its initial sample")
                .coeffs
                .clone()),
        }
    }

    /// Dense-output state derivative at `t`.
    pub fn derivative_at(&self, t: f64) -> Result<Vec<f64>, FlowError> {
        self.check_inside(t)?;
        match self.segment_for(t) {
            Some(seg) => Ok(seg.derivative(t)),
            None => {
                let y = self
                    .samples
                    .first()
                    .expect("a trajectory always has its initial sample")
                    .coeffs
                    .clone();
                self.system
                    .rhs(&y)
                    .map(|(v, _)| v)
                    .map_err(|_| FlowError::Internal("derivative undefined at t0".into()))
            }
        }
    }

    /// The structure forms at `t`.
    pub fn forms_at(&self, t: f64) -> Result<DecodedState, FlowError> {
        Ok(self.system.decode(&self.state_at(t)?))
    }

    /// The torsion residual bundle at `t`: one nonnegative number per
    /// conserved closure condition and per flow equation, all of which
    /// vanish on an exact solution.
    pub fn torsion_residual(&self, t: f64) -> Result<Vec<(String, f64)>, FlowError> {
        let y = self.state_at(t)?;
        let ydot = self.derivative_at(t)?;
        self.system.residual_bundle(&y, &ydot)
    }

    /// Exact-arithmetic replay of the torsion residual bundle at `t` over a
    /// rational-structured copy of the algebra; each value is the *squared*
    /// norm of the residual form. Defined for constant trajectories (the
    /// dense derivative must vanish identically at `t`, as it does for flows
    /// on abelian algebras), where it certifies exact vanishing rather than
    /// mere smallness.
    pub fn torsion_residual_exact(
        &self,
        algebra: &LieAlgebra<Rational>,
        t: f64,
    ) -> Result<Vec<(String, Rational)>, FlowError> {
        if algebra.dim() != self.system.algebra.dim() {
            return Err(FlowError::Internal(
                "the exact algebra has a different dimension".into(),
            ));
        }
        let to_exact = |v: Vec<f64>| -> Result<Vec<Rational>, FlowError> {
            v.into_iter()
                .map(|c| {
                    Rational::from_float(c)
                        .ok_or_else(|| FlowError::Internal("non-finite coefficient".into()))
                })
                .collect()
        };
        let y = to_exact(self.state_at(t)?)?;
        let ydot = to_exact(self.derivative_at(t)?)?;
        self.system.residual_bundle_exact(algebra, &y, &ydot)
    }

    /// The product structure one dimension up, evaluated at `t`.
    pub fn assemble_product(&self, t: f64) -> Result<ProductStructure, FlowError> {
        let internal = |e: crate::gstruct::GStructError| FlowError::Internal(e.to_string());
        match self.forms_at(t)? {
            DecodedState::Hypo5 {
                alpha,
                omega1,
                omega2,
                omega3,
            } => {
                let s = SU2Structure::new(
                    alpha.clone(),
                    omega1.clone(),
                    omega2.clone(),
                    omega3.clone(),
                )
                .map_err(internal)?;
                let g5 = su2_metric(&s).map_err(internal)?;
                let e6 = Form::basis(6, &[6]);
                let omega = omega1.extended(6).add(&alpha.extended(6).wedge(&e6));
                let rho = omega2
                    .extended(6)
                    .wedge(&alpha.extended(6))
                    .sub(&omega3.extended(6).wedge(&e6));
                Ok(ProductStructure::Su3 {
                    omega,
                    rho,
                    metric: block_extend(&g5),
                })
            }
            DecodedState::Hitchin6 { omega, rho } => {
                let g6 = su3_metric(&omega, &rho).map_err(internal)?;
                let e7 = Form::basis(7, &[7]);
                let phi = omega.extended(7).wedge(&e7).add(&rho.extended(7));
                Ok(ProductStructure::G2 {
                    phi,
                    metric: block_extend(&g6),
                })
            }
            DecodedState::Hitchin7 { phi } => {
                let g2 = G2Structure::new(phi).map_err(internal)?;
                let lifted = lift_g2_to_spin7(&g2);
                Ok(ProductStructure::Spin7 {
                    phi4: lifted.phi4().clone(),
                    metric: lifted.metric().clone(),
                })
            }
        }
    }

    /// Trajectory samples as CSV: `t`, the state coefficients, then the
    /// diagnostics columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for name in self.coeff_names() {
            out.push(',');
            out.push_str(&name);
        }
        out.push_str(",lambda,det_g,flow_residual,closure_residual\n");
        for s in &self.samples {
            out.push_str(&s.t.to_string());
            for c in &s.coeffs {
                out.push(',');
                out.push_str(&c.to_string());
            }
            for v in [s.lambda, s.det_g, s.flow_residual, s.closure_residual] {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Run metadata as JSON: the integration request echoed back, the
    /// covered window, and both termination records.
    pub fn json_header(&self) -> serde_json::Value {
        let n = self.system.algebra.dim();
        let differentials: Vec<String> = (1..=n)
            .map(|m| self.system.algebra.differential_of_basis(m).to_string())
            .collect();
        let covered = self.window();
        let tol = &self.system.tol;
        json!({
            "kind": self.kind.as_str(),
            "algebra": {"dim": n, "differentials": differentials},
            "t0": self.t0,
            "window": [self.requested_window.0, self.requested_window.1],
            "covered": [covered.0, covered.1],
            "state_dim": self.system.dim(),
            "coeff_names": self.coeff_names(),
            "tolerances": {
                "rel": tol.rel,
                "abs": tol.abs,
                "event_bracket": tol.event_bracket,
                "closure": tol.closure,
                "ansatz_consistency": tol.ansatz_consistency,
                "lambda_floor_rel": tol.lambda_floor_rel,
                "det_floor_rel": tol.det_floor_rel,
                "coeff_ceiling": tol.coeff_ceiling,
            },
            "samples": self.samples.len(),
            "termination_backward": self.termination_backward.to_json(),
            "termination_forward": self.termination_forward.to_json(),
        })
    }
}

fn segment_distance(seg: &DenseSegment, t: f64) -> f64 {
    let (lo, hi) = seg.span();
    if t < lo {
        lo - t
    } else if t > hi {
        t - hi
    } else {
        0.0
    }
}

fn block_extend(g: &Matrix<f64>) -> Matrix<f64> {
    let n = g.rows();
    Matrix::from_fn(n + 1, n + 1, |i, j| {
        if i < n && j < n {
            g[(i, j)]
        } else if i == j {
            1.0
        } else {
            0.0
        }
    })
}
