//! State encodings, right-hand sides, diagnostics and residual bundles for
//! the three flow kinds.
//!
//! A state vector stacks the coefficients of the defining forms on the
//! chosen ansatz bases. Evolved quantities that are nonlinear images of the
//! primary unknowns (`ω∧α`, `ω²/2`, `⋆_φφ`) are differentiated by exact
//! product rules where available, and the derivative of the primary unknown
//! is recovered from a linear solve per evaluation; the least-squares
//! residual of that solve is the ansatz-consistency measure. A residual
//! beyond tolerance is a *structural* failure (the flow leaves the ansatz
//! subspace), not a numerical one, and aborts integration.

use crate::form::Form;
use crate::gstruct::{
    g2_metric, su2_metric, su2_validate, su3_j, su3_lambda, su3_metric, su3_rhohat, GStructError,
    SU2Structure,
};
use crate::hodge::Metric;
use crate::lie::LieAlgebra;
use crate::linalg::Matrix;
use crate::multiindex::{binomial, MultiIndex};
use crate::scalar::{Rational, Scalar};

use super::rk45::StageError;
use super::{FlowError, FlowKind, InitialStructure, Tolerances};

/// Relative step for the forward-difference linearization of `φ ↦ ⋆_φφ`.
const FD_STEP: f64 = 1e-7;

/// Tolerance for conserved algebraic side conditions (compatibility and
/// normalization) at accepted steps. Looser than the per-solve consistency
/// gate because these quantities accumulate integrator drift over a window.
const CONSERVED_TOL: f64 = 1e-6;

/// ℓ² norm of a form's coefficients.
pub(crate) fn form_l2(f: &Form<f64>) -> f64 {
    f.terms().map(|(_, c)| c * c).sum::<f64>().sqrt()
}

/// The dual 3-form entering the σ-equation `ω∧ω' = dρ̂`, oriented by the
/// structure itself, together with the conditioning of its computation
/// (the largest entry of the almost-complex structure `J`).
///
/// `su3_rhohat` builds J against the reference volume `e^{1…6}`, so it flips
/// sign under orientation-reversing frame changes while `ω∧ω'` does not.
/// Multiplying by the structure's own orientation — the sign of the top
/// coefficient of `ω³` — restores full frame-equivariance; on pairs oriented
/// like the model forms this is the identity.
///
/// The conditioning matters because `ρ̂` is a triple pullback along
/// `J = K/√(−λ)`: near a degeneration `K` stays finite while `λ → 0`, so the
/// pullback cancels terms of size `‖J‖³` down to a much smaller result, and
/// the rounding noise left behind grows like `ε·‖J‖³`.
fn oriented_rhohat(
    omega: &Form<f64>,
    rho: &Form<f64>,
) -> Result<(Form<f64>, f64), GStructError> {
    let top = omega.wedge(omega).wedge(omega).top_coefficient();
    if top == 0.0 || !top.is_finite() {
        return Err(GStructError::NotStable);
    }
    let j = su3_j(rho, &Form::basis(6, &[1, 2, 3, 4, 5, 6]))?;
    let amp = j.max_abs();
    let rhohat = rho.pullback(&j);
    Ok((if top < 0.0 { rhohat.neg() } else { rhohat }, amp))
}

/// One ansatz degree: basis forms and the coefficient matrix (monomial rows
/// × basis columns) used for span solves.
struct DegreeBasis {
    forms: Vec<Form<f64>>,
    matrix: Matrix<f64>,
    degree: usize,
}

impl DegreeBasis {
    fn new(degree: usize, forms: Vec<Form<f64>>) -> Self {
        let n = forms
            .first()
            .map(|f| f.space_dim())
            .expect("a degree basis is never empty");
        let rows = binomial(n, degree);
        let cols = forms.len();
        let coeff_vecs: Vec<Vec<f64>> = forms.iter().map(|f| f.to_coeff_vec()).collect();
        let matrix = Matrix::from_fn(rows, cols, |r, c| coeff_vecs[c][r]);
        DegreeBasis {
            forms,
            matrix,
            degree,
        }
    }

    fn len(&self) -> usize {
        self.forms.len()
    }

    fn space_dim(&self) -> usize {
        self.forms
            .first()
            .map(|f| f.space_dim())
            .unwrap_or_default()
    }

    /// Linear combination of the basis forms.
    fn combine(&self, coeffs: &[f64]) -> Form<f64> {
        let mut out = Form::zero(self.space_dim(), self.degree);
        for (c, f) in coeffs.iter().zip(&self.forms) {
            if *c != 0.0 {
                out = out.add(&f.scale(c));
            }
        }
        out
    }

    /// Least-squares coordinates of `target` in the span, plus the residual.
    fn solve(&self, target: &Form<f64>) -> (Vec<f64>, f64) {
        let b = target.to_coeff_vec();
        let x = self.matrix.least_squares(&b);
        let resid = self.matrix.residual_norm(&x, &b);
        (x, resid)
    }
}

/// Least-squares solve of `Σ c_j · cols_j = target` over arbitrary column
/// forms (all of one degree).
fn solve_in_columns(cols: &[Form<f64>], target: &Form<f64>) -> (Vec<f64>, f64) {
    let rows = target.basis_dim();
    let coeff_vecs: Vec<Vec<f64>> = cols.iter().map(|f| f.to_coeff_vec()).collect();
    let a = Matrix::from_fn(rows, cols.len(), |r, c| coeff_vecs[c][r]);
    let b = target.to_coeff_vec();
    let x = a.least_squares(&b);
    let resid = a.residual_norm(&x, &b);
    (x, resid)
}

/// Stacked multi-degree linear system with forms as columns.
struct BlockSystem {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    ncols: usize,
}

impl BlockSystem {
    fn new(ncols: usize) -> Self {
        BlockSystem {
            rows: Vec::new(),
            rhs: Vec::new(),
            ncols,
        }
    }

    /// Append one equation block `Σ_j u_j · col_forms[j] = rhs_form`,
    /// expanded over the monomial basis of the block's form degree.
    fn add_block(&mut self, col_forms: &[Form<f64>], rhs_form: &Form<f64>) {
        assert_eq!(col_forms.len(), self.ncols);
        let dim = rhs_form.basis_dim();
        let colvecs: Vec<Vec<f64>> = col_forms.iter().map(|f| f.to_coeff_vec()).collect();
        let rhsvec = rhs_form.to_coeff_vec();
        for r in 0..dim {
            self.rows.push(colvecs.iter().map(|v| v[r]).collect());
            self.rhs.push(rhsvec[r]);
        }
    }

    fn solve(self) -> (Vec<f64>, f64) {
        let a = Matrix::from_rows(self.rows);
        let x = a.least_squares(&self.rhs);
        let resid = a.residual_norm(&x, &self.rhs);
        (x, resid)
    }
}

/// Structure content of one state vector.
#[derive(Debug, Clone)]
pub enum DecodedState {
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

/// Per-sample scalar diagnostics.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Diag {
    /// The kind's stability scalar: the quartic invariant of `ρ` for the
    /// 6-dimensional flow, the volume scalar `(α∧ω₁²)/2` for the
    /// 5-dimensional one, the ninth root `(36·det B)^{1/9}` for the
    /// 7-dimensional one. Degeneration is signalled by `|λ| → 0`.
    pub lambda: f64,
    /// Determinant of the structure's Riemannian metric.
    pub det_g: f64,
}

enum SystemData {
    Hypo5 { b1: DegreeBasis, b2: DegreeBasis },
    Hitchin6 { b2: DegreeBasis, b3: DegreeBasis },
    Hitchin7 { b3: DegreeBasis },
}

/// A flow kind bound to an algebra and ansatz bases.
pub(crate) struct FlowSystem {
    pub algebra: LieAlgebra<f64>,
    data: SystemData,
    pub tol: Tolerances,
}

impl FlowSystem {
    pub fn new(
        kind: FlowKind,
        algebra: LieAlgebra<f64>,
        ansatz: Option<&[Form<f64>]>,
        symmetry: Option<&[Vec<f64>]>,
        tol: Tolerances,
    ) -> Result<Self, FlowError> {
        let n = algebra.dim();
        let expected_n = match kind {
            FlowKind::Hypo5 => 5,
            FlowKind::Hitchin6 => 6,
            FlowKind::Hitchin7 => 7,
        };
        if n != expected_n {
            return Err(FlowError::InvalidInitial(format!(
                "{kind:?} needs a {expected_n}-dimensional algebra, got dimension {n}"
            )));
        }

        let basis_for = |k: usize| -> Result<DegreeBasis, FlowError> {
            let forms: Vec<Form<f64>> = if let Some(list) = ansatz {
                let picked: Vec<Form<f64>> = list
                    .iter()
                    .filter(|f| f.degree() == k && f.space_dim() == n)
                    .cloned()
                    .collect();
                picked
            } else if let Some(gens) = symmetry {
                algebra.invariant_forms(k, gens)
            } else {
                MultiIndex::all(n, k)
                    .iter()
                    .map(|mi| Form::basis(n, mi.indices()))
                    .collect()
            };
            if forms.is_empty() {
                return Err(FlowError::InvalidInitial(format!(
                    "ansatz contains no {k}-forms on the {n}-dimensional algebra"
                )));
            }
            Ok(DegreeBasis::new(k, forms))
        };

        let data = match kind {
            FlowKind::Hypo5 => SystemData::Hypo5 {
                b1: basis_for(1)?,
                b2: basis_for(2)?,
            },
            FlowKind::Hitchin6 => SystemData::Hitchin6 {
                b2: basis_for(2)?,
                b3: basis_for(3)?,
            },
            FlowKind::Hitchin7 => SystemData::Hitchin7 { b3: basis_for(3)? },
        };
        Ok(FlowSystem { algebra, data, tol })
    }

    /// State dimension.
    pub fn dim(&self) -> usize {
        match &self.data {
            SystemData::Hypo5 { b1, b2 } => b1.len() + 3 * b2.len(),
            SystemData::Hitchin6 { b2, b3 } => b2.len() + b3.len(),
            SystemData::Hitchin7 { b3 } => b3.len(),
        }
    }

    /// Column labels for trajectory export, aligned with the state layout.
    pub fn coeff_names(&self) -> Vec<String> {
        let label = |stem: &str, m: usize| (0..m).map(move |i| format!("{stem}_{i}")).collect::<Vec<_>>();
        match &self.data {
            SystemData::Hypo5 { b1, b2 } => {
                let mut v = label("alpha", b1.len());
                v.extend(label("omega1", b2.len()));
                v.extend(label("omega2", b2.len()));
                v.extend(label("omega3", b2.len()));
                v
            }
            SystemData::Hitchin6 { b2, b3 } => {
                let mut v = label("omega", b2.len());
                v.extend(label("rho", b3.len()));
                v
            }
            SystemData::Hitchin7 { b3 } => label("phi", b3.len()),
        }
    }

    pub fn decode(&self, y: &[f64]) -> DecodedState {
        match &self.data {
            SystemData::Hypo5 { b1, b2 } => {
                let (n1, n2) = (b1.len(), b2.len());
                DecodedState::Hypo5 {
                    alpha: b1.combine(&y[..n1]),
                    omega1: b2.combine(&y[n1..n1 + n2]),
                    omega2: b2.combine(&y[n1 + n2..n1 + 2 * n2]),
                    omega3: b2.combine(&y[n1 + 2 * n2..]),
                }
            }
            SystemData::Hitchin6 { b2, b3 } => {
                let n2 = b2.len();
                DecodedState::Hitchin6 {
                    omega: b2.combine(&y[..n2]),
                    rho: b3.combine(&y[n2..]),
                }
            }
            SystemData::Hitchin7 { b3 } => DecodedState::Hitchin7 {
                phi: b3.combine(y),
            },
        }
    }

    /// Time derivative of the structure forms along a state derivative.
    pub fn decode_derivative(&self, ydot: &[f64]) -> DecodedState {
        self.decode(ydot)
    }

    /// Encode the initial structure on the ansatz, then require it to pass
    /// the same validity and closure conditions enforced along the
    /// trajectory (so a trajectory sample can be restarted as new initial
    /// data without tolerance mismatches).
    pub fn encode_initial(&self, init: &InitialStructure) -> Result<Vec<f64>, FlowError> {
        let y = self.encode_unchecked(init)?;
        if !self.validity_ok(&y) {
            return Err(FlowError::InvalidInitial(
                "initial structure fails its validity conditions".into(),
            ));
        }
        let closure = self.closure_residual(&y);
        if !(closure <= self.tol.closure) {
            return Err(FlowError::InvalidInitial(format!(
                "initial structure fails its closure conditions (residual {closure:.3e})"
            )));
        }
        Ok(y)
    }

    fn encode_unchecked(&self, init: &InitialStructure) -> Result<Vec<f64>, FlowError> {
        let solve_into = |b: &DegreeBasis, f: &Form<f64>, what: &str| -> Result<Vec<f64>, FlowError> {
            if f.degree() != b.degree || f.space_dim() != b.space_dim() {
                return Err(FlowError::InvalidInitial(format!(
                    "{what} has the wrong shape for this flow"
                )));
            }
            let (x, resid) = b.solve(f);
            let scale = form_l2(f).max(1.0);
            if resid > 1e-10 * scale {
                return Err(FlowError::InvalidInitial(format!(
                    "{what} does not lie in the ansatz span (residual {resid:.3e})"
                )));
            }
            Ok(x)
        };
        match (&self.data, init) {
            (
                SystemData::Hypo5 { b1, b2 },
                InitialStructure::Hypo5 {
                    alpha,
                    omega1,
                    omega2,
                    omega3,
                },
            ) => {
                let mut y = solve_into(b1, alpha, "α")?;
                y.extend(solve_into(b2, omega1, "ω₁")?);
                y.extend(solve_into(b2, omega2, "ω₂")?);
                y.extend(solve_into(b2, omega3, "ω₃")?);
                Ok(y)
            }
            (SystemData::Hitchin6 { b2, b3 }, InitialStructure::Hitchin6 { omega, rho }) => {
                let mut y = solve_into(b2, omega, "ω")?;
                y.extend(solve_into(b3, rho, "ρ")?);
                Ok(y)
            }
            (SystemData::Hitchin7 { b3 }, InitialStructure::Hitchin7 { phi }) => {
                solve_into(b3, phi, "φ")
            }
            _ => Err(FlowError::InvalidInitial(
                "initial structure does not match the flow kind".into(),
            )),
        }
    }

    /// Right-hand side. Returns the state derivative and the worst
    /// consistency residual among the internal linear solves.
    pub fn rhs(&self, y: &[f64]) -> Result<(Vec<f64>, f64), StageError<FlowError>> {
        match &self.data {
            SystemData::Hypo5 { b1, b2 } => self.rhs_hypo5(b1, b2, y),
            SystemData::Hitchin6 { b2, b3 } => self.rhs_hitchin6(b2, b3, y),
            SystemData::Hitchin7 { b3 } => self.rhs_hitchin7(b3, y),
        }
    }

    /// Gate a consistency residual against the ansatz tolerance, with an
    /// optional absolute noise floor below which residuals are trusted.
    fn gate(&self, resid: f64, scale: f64, floor: f64) -> Result<(), StageError<FlowError>> {
        if resid > (self.tol.ansatz_consistency * scale.max(1.0)).max(floor) {
            return Err(StageError::Fatal(FlowError::AnsatzInconsistent {
                residual: resid,
            }));
        }
        Ok(())
    }

    fn rhs_hypo5(
        &self,
        b1: &DegreeBasis,
        b2: &DegreeBasis,
        y: &[f64],
    ) -> Result<(Vec<f64>, f64), StageError<FlowError>> {
        let DecodedState::Hypo5 {
            alpha,
            omega1,
            omega2,
            omega3,
        } = self.decode(y)
        else {
            unreachable!()
        };
        let (n1, n2) = (b1.len(), b2.len());
        let d_alpha = self.algebra.d(&alpha);
        let d_omega2 = self.algebra.d(&omega2);
        let d_omega3 = self.algebra.d(&omega3);

        // First evolution equation: ω₁' = −dα, solved on the 2-form ansatz.
        let (w1dot, r1) = b2.solve(&d_alpha.neg());
        self.gate(r1, form_l2(&d_alpha), 0.0)?;
        let omega1_dot = b2.combine(&w1dot);

        // Remaining unknowns u = (α', ω₂', ω₃'). The two evolution
        // equations (ω₂∧α)' = −dω₃ and (ω₃∧α)' = dω₂ are augmented with the
        // tangency of the pairing relations ω_i∧ω_j = δ_{ij}ω₁², which pins
        // the scaling gauge the evolution equations leave free; leftover
        // free directions are set to zero deterministically.
        let ncols = n1 + 2 * n2;
        let mut sys = BlockSystem::new(ncols);
        let n = self.algebra.dim();
        let zero3 = Form::zero(n, 3);
        let zero4 = Form::zero(n, 4);

        // Equation (ω₂∧α)' = −dω₃ : ω₂'∧α + ω₂∧α' = −dω₃.
        let mut cols_e1: Vec<Form<f64>> = Vec::with_capacity(ncols);
        for theta in &b1.forms {
            cols_e1.push(omega2.wedge(theta));
        }
        for beta in &b2.forms {
            cols_e1.push(beta.wedge(&alpha));
        }
        for _ in 0..n2 {
            cols_e1.push(zero3.clone());
        }
        sys.add_block(&cols_e1, &d_omega3.neg());

        // Equation (ω₃∧α)' = dω₂ : ω₃'∧α + ω₃∧α' = dω₂.
        let mut cols_e2: Vec<Form<f64>> = Vec::with_capacity(ncols);
        for theta in &b1.forms {
            cols_e2.push(omega3.wedge(theta));
        }
        for _ in 0..n2 {
            cols_e2.push(zero3.clone());
        }
        for beta in &b2.forms {
            cols_e2.push(beta.wedge(&alpha));
        }
        sys.add_block(&cols_e2, &d_omega2);

        // Pairing tangency. ω₁' is already determined, so these blocks are
        // linear constraints on ω₂' and ω₃'.
        let w1_w1dot = omega1.wedge(&omega1_dot);
        // d/dt(ω₁∧ω₂) = 0.
        let mut cols_p12: Vec<Form<f64>> = vec![zero4.clone(); n1];
        for beta in &b2.forms {
            cols_p12.push(omega1.wedge(beta));
        }
        cols_p12.extend(vec![zero4.clone(); n2]);
        sys.add_block(&cols_p12, &omega1_dot.wedge(&omega2).neg());
        // d/dt(ω₁∧ω₃) = 0.
        let mut cols_p13: Vec<Form<f64>> = vec![zero4.clone(); n1 + n2];
        for beta in &b2.forms {
            cols_p13.push(omega1.wedge(beta));
        }
        sys.add_block(&cols_p13, &omega1_dot.wedge(&omega3).neg());
        // d/dt(ω₂∧ω₂ − ω₁²) = 0 : ω₂∧ω₂' = ω₁∧ω₁'.
        let mut cols_p22: Vec<Form<f64>> = vec![zero4.clone(); n1];
        for beta in &b2.forms {
            cols_p22.push(omega2.wedge(beta));
        }
        cols_p22.extend(vec![zero4.clone(); n2]);
        sys.add_block(&cols_p22, &w1_w1dot);
        // d/dt(ω₃∧ω₃ − ω₁²) = 0.
        let mut cols_p33: Vec<Form<f64>> = vec![zero4.clone(); n1 + n2];
        for beta in &b2.forms {
            cols_p33.push(omega3.wedge(beta));
        }
        sys.add_block(&cols_p33, &w1_w1dot);
        // d/dt(ω₂∧ω₃) = 0 : ω₂'∧ω₃ + ω₂∧ω₃' = 0.
        let mut cols_p23: Vec<Form<f64>> = vec![zero4.clone(); n1];
        for beta in &b2.forms {
            cols_p23.push(beta.wedge(&omega3));
        }
        for beta in &b2.forms {
            cols_p23.push(omega2.wedge(beta));
        }
        sys.add_block(&cols_p23, &zero4);

        let rhs_scale = form_l2(&d_omega2) + form_l2(&d_omega3) + form_l2(&w1_w1dot);
        let (u, r2) = sys.solve();
        self.gate(r2, rhs_scale, 0.0)?;

        let mut ydot = u[..n1].to_vec();
        ydot.extend_from_slice(&w1dot);
        ydot.extend_from_slice(&u[n1..]);
        Ok((ydot, r1.max(r2)))
    }

    fn rhs_hitchin6(
        &self,
        b2: &DegreeBasis,
        b3: &DegreeBasis,
        y: &[f64],
    ) -> Result<(Vec<f64>, f64), StageError<FlowError>> {
        let DecodedState::Hitchin6 { omega, rho } = self.decode(y) else {
            unreachable!()
        };
        // ρ' = dω on the 3-form ansatz.
        let d_omega = self.algebra.d(&omega);
        let (rho_dot, r1) = b3.solve(&d_omega);
        self.gate(r1, form_l2(&d_omega), 0.0)?;

        // (ω²/2)' = dρ̂, i.e. ω∧ω' = dρ̂, solved for ω' on the 2-form ansatz.
        // The dual ρ̂ needs λ < 0; states outside that region are simply not
        // in the flow's domain, so the step is retried smaller.
        let (rhohat, amp) = match oriented_rhohat(&omega, &rho) {
            Ok(pair) => pair,
            Err(GStructError::NotStable) => return Err(StageError::Retry),
            Err(e) => return Err(StageError::Fatal(FlowError::Internal(e.to_string()))),
        };
        let d_rhohat = self.algebra.d(&rhohat);
        let cols: Vec<Form<f64>> = b2.forms.iter().map(|b| omega.wedge(b)).collect();
        let (omega_dot, r2) = solve_in_columns(&cols, &d_rhohat);
        // Noise floor of the ρ̂ computation (see `oriented_rhohat`): the gate
        // must not flag rounding residue as leaving the ansatz when the step
        // controller probes states close to a degeneration. A genuine
        // departure produces a residual on the order of ‖dρ̂‖ itself, far
        // above this floor everywhere the gate is meaningful.
        let noise = 100.0 * f64::EPSILON * (1.0 + amp).powi(3) * (1.0 + form_l2(&rho));
        self.gate(r2, form_l2(&d_rhohat), noise)?;

        let mut ydot = omega_dot;
        ydot.extend(rho_dot);
        Ok((ydot, r1.max(r2)))
    }

    /// `⋆_φφ` with the orientation the form itself induces.
    fn star_phi(&self, phi: &Form<f64>) -> Option<Form<f64>> {
        let (g, _r, sign) = g2_metric(phi).ok()?;
        let star = Metric::from_gram(g).hodge_star(phi)?;
        Some(star.scale(&(sign as f64)))
    }

    fn rhs_hitchin7(
        &self,
        b3: &DegreeBasis,
        y: &[f64],
    ) -> Result<(Vec<f64>, f64), StageError<FlowError>> {
        let DecodedState::Hitchin7 { phi } = self.decode(y) else {
            unreachable!()
        };
        let sigma = self.star_phi(&phi).ok_or(StageError::Retry)?;
        let d_phi = self.algebra.d(&phi);

        // Forward-difference linearization of φ ↦ ⋆_φφ on the ansatz
        // coordinates, columns as 4-form coefficient vectors.
        let h = FD_STEP * y.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let sigma_vec = sigma.to_coeff_vec();
        let rows = sigma_vec.len();
        let mut jac = Matrix::zeros(rows, b3.len());
        for j in 0..b3.len() {
            let mut yj = y.to_vec();
            yj[j] += h;
            let DecodedState::Hitchin7 { phi: phij } = self.decode(&yj) else {
                unreachable!()
            };
            let sj = self.star_phi(&phij).ok_or(StageError::Retry)?;
            let sj_vec = sj.to_coeff_vec();
            for r in 0..rows {
                jac[(r, j)] = (sj_vec[r] - sigma_vec[r]) / h;
            }
        }
        let b = d_phi.to_coeff_vec();
        let phi_dot = jac.least_squares(&b);
        let resid = jac.residual_norm(&phi_dot, &b);
        // The consistency gate must tolerate the O(h) truncation error of
        // the forward-difference Jacobian.
        let fd_slack = 50.0 * h * (1.0 + phi_dot.iter().map(|c| c * c).sum::<f64>().sqrt());
        let gate = (self.tol.ansatz_consistency).max(fd_slack) * form_l2(&d_phi).max(1.0);
        if resid > gate {
            return Err(StageError::Fatal(FlowError::AnsatzInconsistent {
                residual: resid,
            }));
        }
        Ok((phi_dot, resid))
    }

    /// Scalar diagnostics; `Err` when the state has left the region where
    /// they are defined.
    pub fn diagnostics(&self, y: &[f64]) -> Result<Diag, ()> {
        match self.decode(y) {
            DecodedState::Hypo5 {
                alpha,
                omega1,
                omega2,
                omega3,
            } => {
                let vol = alpha.wedge(&omega1.wedge(&omega1));
                let lambda = vol.top_coefficient() / 2.0;
                let s = SU2Structure::new(alpha, omega1, omega2, omega3).map_err(|_| ())?;
                let g = su2_metric(&s).map_err(|_| ())?;
                let det_g = g.det();
                if !lambda.is_finite() || !det_g.is_finite() {
                    return Err(());
                }
                Ok(Diag { lambda, det_g })
            }
            DecodedState::Hitchin6 { omega, rho } => {
                let lambda = su3_lambda(&rho).map_err(|_| ())?;
                let g = su3_metric(&omega, &rho).map_err(|_| ())?;
                let det_g = g.det();
                if !lambda.is_finite() || !det_g.is_finite() {
                    return Err(());
                }
                Ok(Diag { lambda, det_g })
            }
            DecodedState::Hitchin7 { phi } => {
                let (g, r, _sign) = g2_metric(&phi).map_err(|_| ())?;
                let det_g = g.det();
                if !r.is_finite() || !det_g.is_finite() {
                    return Err(());
                }
                Ok(Diag {
                    lambda: r,
                    det_g,
                })
            }
        }
    }

    /// Structure validity at accepted steps. Sharp sign conditions are
    /// enforced exactly; conserved algebraic side conditions are checked at
    /// a tolerance that allows for integrator drift.
    pub fn validity_ok(&self, y: &[f64]) -> bool {
        match self.decode(y) {
            DecodedState::Hypo5 {
                alpha,
                omega1,
                omega2,
                omega3,
            } => SU2Structure::new(alpha, omega1, omega2, omega3)
                .map(|s| su2_validate(&s).is_valid())
                .unwrap_or(false),
            DecodedState::Hitchin6 { omega, rho } => {
                let Ok(lambda) = su3_lambda(&rho) else {
                    return false;
                };
                if !(lambda < 0.0) {
                    return false;
                }
                if su3_metric(&omega, &rho).is_err() {
                    return false;
                }
                // Compatibility ω∧ρ = 0 and normalization (ω³/3!)² ∝ −λ are
                // conserved; allow drift up to CONSERVED_TOL.
                let compat = form_l2(&omega.wedge(&rho));
                if compat > CONSERVED_TOL * (form_l2(&omega) * form_l2(&rho)).max(1.0) {
                    return false;
                }
                let omega3_coeff = omega.wedge(&omega).wedge(&omega).top_coefficient() / 3.0;
                let normalized = (omega3_coeff * omega3_coeff + lambda).abs();
                normalized <= CONSERVED_TOL * lambda.abs().max(1.0)
            }
            DecodedState::Hitchin7 { phi } => g2_metric(&phi).is_ok(),
        }
    }

    /// Closure residual of the flow's conserved differential conditions.
    pub fn closure_residual(&self, y: &[f64]) -> f64 {
        match self.decode(y) {
            DecodedState::Hypo5 {
                alpha,
                omega1,
                omega2,
                omega3,
            } => {
                let d = |f: &Form<f64>| self.algebra.d(f);
                form_l2(&d(&omega1))
                    + form_l2(&d(&alpha.wedge(&omega2)))
                    + form_l2(&d(&alpha.wedge(&omega3)))
            }
            DecodedState::Hitchin6 { omega, rho } => {
                form_l2(&self.algebra.d(&rho)) + form_l2(&self.algebra.d(&omega.wedge(&omega)))
            }
            DecodedState::Hitchin7 { phi } => match self.star_phi(&phi) {
                Some(sigma) => form_l2(&self.algebra.d(&sigma)),
                None => f64::INFINITY,
            },
        }
    }

    /// Torsion residual bundle at a state/derivative pair: the conserved
    /// closure conditions plus the flow equations themselves, one
    /// nonnegative number per equation.
    pub fn residual_bundle(
        &self,
        y: &[f64],
        ydot: &[f64],
    ) -> Result<Vec<(String, f64)>, FlowError> {
        let d = |f: &Form<f64>| self.algebra.d(f);
        match (self.decode(y), self.decode_derivative(ydot)) {
            (
                DecodedState::Hypo5 {
                    alpha,
                    omega1,
                    omega2,
                    omega3,
                },
                DecodedState::Hypo5 {
                    alpha: alpha_dot,
                    omega1: omega1_dot,
                    omega2: omega2_dot,
                    omega3: omega3_dot,
                },
            ) => Ok(vec![
                ("closure_omega1".into(), form_l2(&d(&omega1))),
                (
                    "closure_alpha_omega2".into(),
                    form_l2(&d(&alpha.wedge(&omega2))),
                ),
                (
                    "closure_alpha_omega3".into(),
                    form_l2(&d(&alpha.wedge(&omega3))),
                ),
                (
                    "flow_omega1".into(),
                    form_l2(&omega1_dot.add(&d(&alpha))),
                ),
                (
                    "flow_omega2_alpha".into(),
                    form_l2(
                        &omega2_dot
                            .wedge(&alpha)
                            .add(&omega2.wedge(&alpha_dot))
                            .add(&d(&omega3)),
                    ),
                ),
                (
                    "flow_omega3_alpha".into(),
                    form_l2(
                        &omega3_dot
                            .wedge(&alpha)
                            .add(&omega3.wedge(&alpha_dot))
                            .sub(&d(&omega2)),
                    ),
                ),
            ]),
            (
                DecodedState::Hitchin6 { omega, rho },
                DecodedState::Hitchin6 {
                    omega: omega_dot,
                    rho: rho_dot,
                },
            ) => {
                let (rhohat, _) =
                    oriented_rhohat(&omega, &rho).map_err(|e| FlowError::Internal(e.to_string()))?;
                Ok(vec![
                    ("closure_rho".into(), form_l2(&d(&rho))),
                    (
                        "flow_rho".into(),
                        form_l2(&rho_dot.sub(&d(&omega))),
                    ),
                    (
                        "flow_sigma".into(),
                        form_l2(&omega.wedge(&omega_dot).sub(&d(&rhohat))),
                    ),
                ])
            }
            (DecodedState::Hitchin7 { phi }, DecodedState::Hitchin7 { phi: _ }) => {
                let sigma = self
                    .star_phi(&phi)
                    .ok_or_else(|| FlowError::Internal("dual 4-form undefined".into()))?;
                // σ̇ via the same forward-difference linearization the flow
                // uses, applied to the given φ̇.
                let h = FD_STEP * phi.max_abs_coeff().max(1.0);
                let DecodedState::Hitchin7 { phi: phi_dot } = self.decode_derivative(ydot) else {
                    unreachable!()
                };
                let scale = phi_dot.max_abs_coeff();
                let sigma_dot = if scale == 0.0 {
                    Form::zero(7, 4)
                } else {
                    let step = phi.add(&phi_dot.scale(&(h / scale)));
                    let sigma_h = self
                        .star_phi(&step)
                        .ok_or_else(|| FlowError::Internal("dual 4-form undefined".into()))?;
                    sigma_h.sub(&sigma).scale(&(scale / h))
                };
                Ok(vec![
                    ("closure_star_phi".into(), form_l2(&d(&sigma))),
                    (
                        "flow_star_phi".into(),
                        form_l2(&sigma_dot.sub(&d(&phi))),
                    ),
                ])
            }
            _ => unreachable!("state layouts always match the system kind"),
        }
    }

    /// Exact-arithmetic replay of the residual bundle for constant states:
    /// every value is the *squared* norm of the residual form, as a
    /// rational. Defined for trajectories whose dense derivative vanishes
    /// identically at `t` (constant flows on algebras with rational
    /// structure constants); the 7-dimensional dual is additionally required
    /// to have a rational normalizing root.
    pub fn residual_bundle_exact(
        &self,
        algebra: &LieAlgebra<Rational>,
        y: &[Rational],
        ydot: &[Rational],
    ) -> Result<Vec<(String, Rational)>, FlowError> {
        if ydot.iter().any(|c| !c.is_zero()) {
            return Err(FlowError::Internal(
                "exact replay is defined for constant trajectories".into(),
            ));
        }
        let sq_norm = |f: &Form<Rational>| -> Rational {
            f.terms()
                .fold(Rational::zero(), |acc, (_, c)| acc.add(&c.mul(c)))
        };
        let combine_exact = |forms: &[Form<f64>], coeffs: &[Rational], k: usize| -> Form<Rational> {
            let n = algebra.dim();
            let mut out = Form::zero(n, k);
            for (c, f) in coeffs.iter().zip(forms) {
                let f_exact = f.map(|v| {
                    Rational::from_float(*v).expect("ansatz coefficients are finite")
                });
                out = out.add(&f_exact.scale(c));
            }
            out
        };
        match &self.data {
            SystemData::Hypo5 { b1, b2 } => {
                let (n1, n2) = (b1.len(), b2.len());
                let alpha = combine_exact(&b1.forms, &y[..n1], 1);
                let omega1 = combine_exact(&b2.forms, &y[n1..n1 + n2], 2);
                let omega2 = combine_exact(&b2.forms, &y[n1 + n2..n1 + 2 * n2], 2);
                let omega3 = combine_exact(&b2.forms, &y[n1 + 2 * n2..], 2);
                Ok(vec![
                    ("closure_omega1".into(), sq_norm(&algebra.d(&omega1))),
                    (
                        "closure_alpha_omega2".into(),
                        sq_norm(&algebra.d(&alpha.wedge(&omega2))),
                    ),
                    (
                        "closure_alpha_omega3".into(),
                        sq_norm(&algebra.d(&alpha.wedge(&omega3))),
                    ),
                    ("flow_omega1".into(), sq_norm(&algebra.d(&alpha))),
                    ("flow_omega2_alpha".into(), sq_norm(&algebra.d(&omega3))),
                    ("flow_omega3_alpha".into(), sq_norm(&algebra.d(&omega2))),
                ])
            }
            SystemData::Hitchin6 { b2, b3 } => {
                let n2 = b2.len();
                let omega = combine_exact(&b2.forms, &y[..n2], 2);
                let rho = combine_exact(&b3.forms, &y[n2..], 3);
                let rhohat =
                    su3_rhohat(&rho).map_err(|e| FlowError::Internal(e.to_string()))?;
                Ok(vec![
                    ("closure_rho".into(), sq_norm(&algebra.d(&rho))),
                    ("flow_rho".into(), sq_norm(&algebra.d(&omega))),
                    ("flow_sigma".into(), sq_norm(&algebra.d(&rhohat))),
                ])
            }
            SystemData::Hitchin7 { b3 } => {
                let phi = combine_exact(&b3.forms, y, 3);
                let (g, _r, sign) =
                    g2_metric(&phi).map_err(|e| FlowError::Internal(e.to_string()))?;
                let star = Metric::from_gram(g)
                    .hodge_star(&phi)
                    .ok_or_else(|| FlowError::Internal("volume root is not rational".into()))?;
                let sigma = star.scale(&Rational::from_int(sign as i64));
                Ok(vec![
                    ("closure_star_phi".into(), sq_norm(&algebra.d(&sigma))),
                    ("flow_star_phi".into(), sq_norm(&algebra.d(&phi))),
                ])
            }
        }
    }
}
