//! Polynomial-type Jost solutions of self-adjoint matrix-valued discrete
//! Dirac systems with compactly supported perturbations, their discrete
//! spectrum, and a finite-section cross-check.
//!
//! The system on sites `n ≥ 1`, with `y_0^{(1)} = 0`, is
//!
//! ```text
//! A_n y_{n+1}^{(2)} + B_n y_n^{(2)} + P_n y_n^{(1)} = λ y_n^{(1)}
//! A_{n-1} y_{n-1}^{(1)} + B_n y_n^{(1)} + Q_n y_n^{(2)} = λ y_n^{(2)}
//! ```
//!
//! with Hermitian `m × m` coefficients and invertible `A_n`, `B_n`.

pub mod error;
pub mod jost;
pub mod matkit;
pub mod oracle;
pub mod poly;
pub mod profile;
pub mod spectrum;

pub use error::{Error, Result};
pub use jost::{compute_jost, JostSeries};
pub use matkit::{ComplexMatrix, NormKind, C64};
pub use profile::{CoeffKind, CoefficientProfile, ValidationReport};
pub use spectrum::{spectral_report, EigenvalueRecord, SearchOptions, SpectralReport};
