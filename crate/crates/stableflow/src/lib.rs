//! Stable-form calculus and invariant geometric flows on low-dimensional
//! Lie algebras.
//!
//! The library works with a left-invariant model: a Lie algebra 𝔤 given by
//! structure constants, its exterior algebra Λ•𝔤* with the Chevalley–Eilenberg
//! differential, and distinguished "stable" forms that encode SU(2)-, SU(3)-,
//! G₂- and Spin(7)-structures on the corresponding simply connected group.
//! On top of that calculus sit three evolution equations — the hypo flow in
//! dimension 5 and the Hitchin flows in dimensions 6 and 7 — whose solutions
//! assemble into a parallel structure on a cylinder one dimension up.
//!
//! Module map:
//!
//! * [`scalar`], [`linalg`], [`poly`] — exact rational arithmetic, dense
//!   matrices over an abstract scalar ring, univariate polynomials.
//! * [`multiindex`], [`form`] — the exterior algebra: strictly increasing
//!   multi-indices and sparse alternating forms with wedge, interior product,
//!   pullback and evaluation.
//! * [`lie`], [`salamon`] — Lie algebras by structure constants, the
//!   Chevalley–Eilenberg differential, invariant-form modules, and the
//!   Salamon-style text format (`dim 6; d e5 = e13 + e24; …`).
//! * [`hodge`] — the κ isomorphism Λⁿ⁻¹V* ≅ V ⊗ ΛⁿV* and the Hodge star.
//! * [`gstruct`] — stable-form calculus: the SU(3) invariants λ, K, J, ρ̂,
//!   the induced metrics, model forms, validation, lifts between dimensions,
//!   and the closure predicates (hypo, half-flat, cocalibrated).
//! * [`quad`] — adaptive Gauss–Kronrod quadrature with endpoint
//!   regularization for improper integrals at polynomial roots.
//! * [`flow`] — the three flows as ODE systems on an ansatz subspace, an
//!   embedded Runge–Kutta 5(4) integrator with dense output and event
//!   detection, trajectories with diagnostics, and product-space assembly.
//! * [`sl2c`] — the complete worked example on 𝔰𝔩(2,ℂ): the invariant
//!   half-flat family, the reduced scalar ODE, blow-up windows by quadrature,
//!   extension-through-collapse analysis, and closed-form derivative tables.
//! * [`obstruct`] — Lie-algebraic obstruction classification: which
//!   singular-orbit/extension statements apply to a given algebra.
//! * [`selftest`] — a seeded randomized property battery, exposed for the
//!   command line.
//!
//! Exact rationals are used for every algebraic computation; floating point
//! appears only inside flow integration and quadrature. The two scalar modes
//! never mix implicitly.

pub mod scalar;
pub mod linalg;
pub mod poly;
pub mod multiindex;
pub mod form;
pub mod lie;
pub mod salamon;
pub mod hodge;
// TODO(build order): the remaining modules land bottom-up.
pub mod gstruct;
pub mod quad;
pub mod flow;
pub mod sl2c;
pub mod obstruct;
pub mod io;
// pub mod selftest;

// #[cfg(doctest)]
// mod book;

pub use form::Form;
pub use lie::LieAlgebra;
pub use multiindex::MultiIndex;
pub use scalar::{Rational, Scalar};
