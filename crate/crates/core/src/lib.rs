//! Decides, from a Hermitian input matrix alone, which quantum-access inner
//! model the `μ(A)` pass selects and whether the matrix-level
//! dequantizability conditions fire.
//!
//! The pipeline is: validate the matrix ([`matrix`]), evaluate the `s_p`
//! family ([`quasinorms`]), minimize the mixed term ([`mu`]), compute the
//! spectrum ([`spectrum`]) and assemble a [`verdict::VerdictReport`].

pub mod error;
pub mod families;
pub mod matrix;
pub mod mtx;
pub mod mu;
pub mod quasinorms;
pub mod spectrum;
pub mod sweep;
pub mod verdict;

pub use error::{Error, Result};
pub use families::{FamilyKind, FamilySpec};
pub use matrix::{MatrixShapeSummary, SparseHermitianMatrix};
pub use mu::{InnerModel, MuConfig, MuResult};
pub use num_complex::Complex64;
pub use quasinorms::QuasinormProfile;
pub use spectrum::{ConditionNumber, SpectrumOptions, SpectrumSummary};
pub use verdict::{classify, classify_with, Classification, Evidence, VerdictConfig, VerdictReport};
