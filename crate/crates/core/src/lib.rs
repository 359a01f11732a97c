//! Two-point-source imaging through two-photon Hong-Ou-Mandel interference.
//!
//! Two incoherent point sources at `x0 ± eps/2` are imaged through a Gaussian
//! amplitude transfer function. A pair of photons from the scene is sent
//! through a 50:50 beamsplitter and detected with spatial resolution, which
//! yields cross-coincidences (one photon per output port) and double events
//! (both photons in one port). This crate provides
//!
//! - the single-photon amplitude model ([`model`]),
//! - spatially resolved outcome densities after the beamsplitter ([`densities`]),
//! - classical and quantum Fisher information and Cramér-Rao bounds ([`fisher`]),
//! - seeded Monte Carlo generation of detection events ([`sampler`]),
//! - maximum-likelihood estimation and batch precision studies ([`estimator`]).
//!
//! All positions are in units of the PSF intensity width `sigma` unless a
//! scene sets another width explicitly. Fisher information is quoted per
//! detected photon.
//!
//! ```
//! use hom_superres::{fisher, QuadratureSpec, SourceModel, SourceScene};
//!
//! let scene = SourceScene::new(0.0, 0.1, 1.0).unwrap();
//! let f = fisher::fi_twophoton_spatial(&scene, SourceModel::ThermalPair, &QuadratureSpec::default()).unwrap();
//! assert!((f.eps_eps() - 0.125_390_625).abs() < 1e-3);
//! ```

pub mod densities;
mod error;
pub mod estimator;
pub mod exec;
pub mod fisher;
mod jet;
pub mod model;
pub mod optim;
pub mod oracle;
pub mod quadrature;
pub mod sampler;

pub use densities::{EventKind, OutcomeDensities};
pub use error::{Error, Result};
pub use estimator::{EstimationResult, PrecisionReport, Strategy};
pub use exec::Exec;
pub use fisher::{FisherMatrix, Parameter};
pub use model::{SourceModel, SourceScene};
pub use quadrature::QuadratureSpec;
pub use sampler::{DetectorSpec, EventRecord};
