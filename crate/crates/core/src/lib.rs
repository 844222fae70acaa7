//! Numerical toolkit for reconstruction systems (generalized fusion frames).
//!
//! The crate covers the operator algebra of `(m, k, d)` systems, erasure
//! analysis, the spectral pictures of dual systems and of projective frame
//! operators (Fan–Pall and Horn–Klyachko membership), minimization of the
//! joint frame potential and the structure of its minimizers.
//!
//! Everything is dense and complex; the intended sizes are `d, n ≤ 64`.

pub mod certificate;
pub mod dual_picture;
pub mod erasure;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod lr_horn;
pub mod majorization;
pub mod potential;
pub mod qp;
pub mod rng;
pub mod system;

pub use certificate::{Certificate, Family, Violation};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use system::{is_dual, FrameBounds, Parameters, ReconstructionSystem, SpectrumVector, Weights};

/// Default numerical tolerances.
pub mod tol {
    /// Relative singular value rule: invertible iff `σ_min > RANK · σ_max`.
    pub const RANK: f64 = 1e-10;
    /// Default duality tolerance `‖T_W* T_V − I‖`.
    pub const DUAL: f64 = 1e-10;
    /// Default tolerance for `V_i V_i* = v_i² I`.
    pub const PROJECTIVE: f64 = 1e-10;
    /// Relative slack for spectral inequalities, scaled by `max(1, scale)`.
    pub const SPECTRAL_SLACK: f64 = 1e-9;
    /// Commutation residual accepted for spectral projections of minimizers.
    pub const COMMUTATION: f64 = 1e-8;
    /// Singular value cutoff for commutant nullspaces.
    pub const COMMUTANT: f64 = 1e-10;
}
