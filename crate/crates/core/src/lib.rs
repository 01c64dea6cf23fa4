//! Exact verification of flag-algebra inducibility bounds for oriented
//! graphs, together with limit densities of recursive blowup constructions.
//!
//! Arithmetic-only routines are generic over [`Scalar`]; the type aliases
//! below fix the common instantiations.

pub mod certificate;
pub mod construction;
pub mod error;
pub mod flag;
pub mod linalg;
pub mod orgraph;
pub mod product;
pub mod scalar;
pub mod sdp;
pub mod util;

pub use certificate::{builtin_certificate, verify, Certificate, VerificationReport};
pub use construction::{limit_densities, BlowupSpec, Fill, LimitDensities};
pub use error::{Error, Result};
pub use flag::{enumerate_flags, Flag, FlagBasis, TypeSigma};
pub use linalg::{psd_check_exact, Matrix, PsdOutcome};
pub use orgraph::{enumerate_orgraphs, induced_density, Orgraph};
pub use product::ProductTable;
pub use scalar::{Rational, Scalar};
pub use sdp::{round_and_verify, NumericalSolution, SdpProblem};

pub type RationalMatrix = Matrix<Rational>;
pub type FloatMatrix = Matrix<f64>;
pub type Float32Matrix = Matrix<f32>;
pub type ExactBlowupSpec = BlowupSpec<Rational>;
pub type FloatBlowupSpec = BlowupSpec<f64>;
pub type ExactLimitDensities = LimitDensities<Rational>;
pub type FloatLimitDensities = LimitDensities<f64>;
