//! Embedded Runge–Kutta 5(4) stepping (Dormand–Prince coefficients) with a
//! fourth-order continuous extension.
//!
//! The stepper is deliberately minimal: it produces one trial step at a time
//! together with its embedded error estimate and dense-output segment, and
//! leaves acceptance policy (error control, validity checks, event handling)
//! to the driver in the parent module. The scheme is first-same-as-last: the
//! seventh stage of an accepted step is the first stage of the next.

/// Stage abscissae.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

/// Sub-diagonal coupling coefficients, row `i` holding `a[i][0..i]`.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
/// Fifth-order weights (also the seventh coupling row).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Difference between the fifth- and embedded fourth-order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];
/// Weights of the extra dense-output combination.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// How one right-hand-side evaluation at a trial stage went wrong.
///
/// `Retry` marks a state where the vector field is not defined (for these
/// flows: a stability invariant with the wrong sign, or a degenerate metric);
/// the driver responds by shrinking the step. `Fatal` aborts integration.
#[derive(Debug)]
pub(crate) enum StageError<X> {
    Retry,
    Fatal(X),
}

/// Fourth-order interpolant over one accepted step, exact at both endpoints
/// in value and derivative.
#[derive(Debug, Clone)]
pub(crate) struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    r1: Vec<f64>,
    r2: Vec<f64>,
    r3: Vec<f64>,
    r4: Vec<f64>,
    r5: Vec<f64>,
}

impl DenseSegment {
    /// Time span in increasing order.
    pub fn span(&self) -> (f64, f64) {
        let t1 = self.t0 + self.h;
        if self.h >= 0.0 {
            (self.t0, t1)
        } else {
            (t1, self.t0)
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.span();
        lo <= t && t <= hi
    }

    /// Interpolated state at `t` (valid inside the span; extrapolation is
    /// the caller's responsibility).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let theta = (t - self.t0) / self.h;
        let om = 1.0 - theta;
        (0..self.r1.len())
            .map(|i| {
                self.r1[i]
                    + theta
                        * (self.r2[i] + om * (self.r3[i] + theta * (self.r4[i] + om * self.r5[i])))
            })
            .collect()
    }

    /// Time derivative of the interpolant at `t`.
    pub fn derivative(&self, t: f64) -> Vec<f64> {
        let theta = (t - self.t0) / self.h;
        (0..self.r1.len())
            .map(|i| {
                (self.r2[i]
                    + (1.0 - 2.0 * theta) * self.r3[i]
                    + theta * (2.0 - 3.0 * theta) * self.r4[i]
                    + 2.0 * theta * (1.0 - theta) * (1.0 - 2.0 * theta) * self.r5[i])
                    / self.h
            })
            .collect()
    }
}

/// One trial step of size `h` from `(t, y)`.
#[derive(Debug)]
pub(crate) struct TrialStep {
    pub y1: Vec<f64>,
    /// Scaled error norm; acceptable when `<= 1`.
    pub err: f64,
    /// Final stage value `f(t + h, y1)`, reusable as the next first stage.
    pub k_last: Vec<f64>,
    pub segment: DenseSegment,
}

/// Compute one Dormand–Prince trial step. `k1` must hold `f(t, y)`.
pub(crate) fn dopri5_trial<X>(
    rhs: &mut dyn FnMut(f64, &[f64]) -> Result<Vec<f64>, StageError<X>>,
    t: f64,
    y: &[f64],
    k1: &[f64],
    h: f64,
    rel: f64,
    abs: f64,
) -> Result<TrialStep, StageError<X>> {
    let n = y.len();
    let stage_state = |coeffs: &[f64], ks: &[&[f64]]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let mut acc = y[i];
                for (c, k) in coeffs.iter().zip(ks) {
                    acc += h * c * k[i];
                }
                acc
            })
            .collect()
    };

    let k2 = rhs(t + C[1] * h, &stage_state(&A2, &[k1]))?;
    let k3 = rhs(t + C[2] * h, &stage_state(&A3, &[k1, &k2]))?;
    let k4 = rhs(t + C[3] * h, &stage_state(&A4, &[k1, &k2, &k3]))?;
    let k5 = rhs(t + C[4] * h, &stage_state(&A5, &[k1, &k2, &k3, &k4]))?;
    let k6 = rhs(t + C[5] * h, &stage_state(&A6, &[k1, &k2, &k3, &k4, &k5]))?;
    let y1 = stage_state(&B5[..6], &[k1, &k2, &k3, &k4, &k5, &k6]);
    let k7 = rhs(t + h, &y1)?;

    let ks: [&[f64]; 7] = [k1, &k2, &k3, &k4, &k5, &k6, &k7];

    // Scaled error norm of the embedded fourth-order difference.
    let mut err_sq = 0.0;
    for i in 0..n {
        let mut e = 0.0;
        for (w, k) in E.iter().zip(&ks) {
            e += w * k[i];
        }
        e *= h;
        let scale = abs + rel * y[i].abs().max(y1[i].abs());
        let q = e / scale;
        err_sq += q * q;
    }
    let err = (err_sq / n.max(1) as f64).sqrt();

    // Dense-output coefficients.
    let mut r1 = vec![0.0; n];
    let mut r2 = vec![0.0; n];
    let mut r3 = vec![0.0; n];
    let mut r4 = vec![0.0; n];
    let mut r5 = vec![0.0; n];
    for i in 0..n {
        let delta = y1[i] - y[i];
        r1[i] = y[i];
        r2[i] = delta;
        r3[i] = h * k1[i] - delta;
        r4[i] = delta - h * k7[i] - r3[i];
        let mut dsum = 0.0;
        for (w, k) in D.iter().zip(&ks) {
            dsum += w * k[i];
        }
        r5[i] = h * dsum;
    }

    Ok(TrialStep {
        y1,
        err,
        k_last: k7,
        segment: DenseSegment {
            t0: t,
            h,
            r1,
            r2,
            r3,
            r4,
            r5,
        },
    })
}

/// Step-size update factor from a scaled error norm (safety 0.9, order 5).
pub(crate) fn step_factor(err: f64) -> f64 {
    if err <= 0.0 {
        return 5.0;
    }
    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
}
