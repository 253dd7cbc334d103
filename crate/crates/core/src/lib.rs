//! Identifiability, information geometry and local asymptotic normality for
//! ergodic finite-dimensional quantum Markov dynamics.
//!
//! A dynamical parameter `D = (H, L¹, …, Lᵏ)` generates the Heisenberg-picture
//! Lindblad semigroup. Around an ergodic point the tangent space splits into
//! gauge directions (invisible in the output) and identifiable directions,
//! which carry the quantum Fisher information rate and a complex structure
//! turning them into a Gaussian (coherent state) limit model.
//!
//! ```
//! use markovgeom::{models, lindblad::ErgodicPoint};
//!
//! let p = models::TwoLevelParams::new(1.0, 0.0, 1.0, 0.0);
//! let point = ErgodicPoint::new(models::two_level(&p).unwrap()).unwrap();
//! let rho = point.rho();
//! assert!((rho[(0, 0)].re - 2.0 / 3.0).abs() < 1e-10);
//! ```

pub mod covariance;
pub mod error;
pub mod gaussian;
pub mod geometry;
pub mod lan;
pub mod lindblad;
pub mod models;
pub mod opspace;
pub mod random;

pub use covariance::{OperatorTuple, QfiConvention, QfiMatrix};
pub use error::{Error, Result};
pub use gaussian::GaussianLimitModel;
pub use geometry::{EquivalenceWitness, GaugeElement, LieAlgebraElement, TangentVector};
pub use lan::{LanReport, LocalChart};
pub use lindblad::{DensityMatrix, DynamicalParams, ErgodicPoint, ErgodicityReport};
pub use opspace::{CMatrix, CVector, Superoperator, C64};
