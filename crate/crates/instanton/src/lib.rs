//! Numerical laboratory for ALE gravitational instantons and degenerating
//! Kähler metric families near ADE singularities.
//!
//! The crate is organized as a stack:
//!
//! * [`jets`] — truncated Taylor expansions ("jets") in 4 real chart
//!   coordinates, the substrate for all exact differentiation.
//! * [`ade`] — ADE root systems, deformation paths and the non-degeneracy
//!   classifier with its Hölder-exponent prediction.
//! * [`ale`] — closed-form ALE instanton geometry: the Eguchi–Hanson family,
//!   multi-center Gibbons–Hawking metrics, dilations, asymptotic frames.
//! * [`glue`] — piecewise glued metric families interpolating between an ALE
//!   core and a background orbifold metric, with region schedules and
//!   weighted Hölder norms.
//! * [`chern`] — curvature kernel: Chern-connection curvature, the second
//!   Chern form, Riemannian curvature invariants, the Bott–Chern
//!   transgression and the Monge–Ampère source.
//! * [`integrate`] — radial and Monte Carlo fibre integrals with tail
//!   extrapolation.
//! * [`experiments`] — scripted parameter sweeps, rate fits and scans.
//!
//! # Conventions (fixed once, used everywhere)
//!
//! Chart coordinates are `x = (x1, x2, x3, x4)` on the cover of the chart,
//! with complex coordinates `z = x1 + i x2`, `w = x3 + i x4`.
//!
//! * A hermitian metric is stored through its components `h[i][j] = h_{i j̄}`;
//!   `h = id` is the Euclidean metric.
//! * Kähler form: `ω = (i/2) Σ h_{i j̄} dz^i ∧ dz̄^j`, so `h = id` gives
//!   `ω = dx1∧dx2 + dx3∧dx4`.
//! * `dd^c` is anchored by `dd^c(r²) = ω_Euc`, i.e. the metric of a potential
//!   φ is `h_{i j̄} = ∂_i ∂_j̄ φ` and the associated 2-form carries the `i/2`.
//! * Volume form: `Vol = ω² / 2`, so the flat volume form is `dx1∧dx2∧dx3∧dx4`.
//! * The holomorphic 2-form of the flat chart is `Ω = dz ∧ dw`, with
//!   `Ω ∧ Ω̄ = 4 Vol = 2 ω²` under the conventions above.

pub mod ade;
pub mod ale;
pub mod chern;
pub mod experiments;
pub mod glue;
pub mod integrate;
pub mod jets;
pub mod linalg;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation
    /// (log/sqrt of a non-positive value, division by zero, ...).
    #[error("domain violation: {0}")]
    Domain(String),

    /// A scalar field could not be evaluated at a chart point.
    #[error("field evaluation failed at {point:?}: {reason}")]
    FieldEval { point: [f64; 4], reason: String },

    /// Invalid input data (bad ADE label, inconsistent series, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A degenerate configuration was detected (coincident centers,
    /// singular metric, schedule out of validity range, ...).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// A numerical diagnostic failed (symmetry audit, non-converging tail,
    /// signal below noise, ...).
    #[error("numerical diagnostic failed: {0}")]
    Diagnostic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
