//! Simulation and security analysis for a phase-encoded two-way
//! quantum-secure-direct-communication (DL04) system.
//!
//! The crate is organized bottom-up:
//!
//! * [`model`]: pulse source, fiber channel, detectors, and the sender-side
//!   interferometer optics, plus elementary photon statistics.
//! * [`eve`]: information an eavesdropper can extract from one- and
//!   two-photon pulses under a collective attack, via a Gram-matrix
//!   construction and a Jacobi eigensolver.
//! * [`rate`]: closed-form gains and error rates of the round trip and the
//!   secrecy-capacity lower bound assembled from per-photon-number terms.
//! * [`estimators`]: bounds on the single- and two-photon error rates from
//!   observable quantities, with and without decoy intensity levels.
//! * [`sim`]: a seeded Monte Carlo implementation of the protocol round
//!   trip, sharded for reproducible parallel runs.
//! * [`analysis`]: glue that evaluates capacity curves, attenuation
//!   cutoffs, and analytic expectations for whole system configurations.

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod eve;
pub mod model;
pub mod rate;
pub mod sim;

pub use analysis::{AnalyticStatistics, SystemParams};
pub use error::{Error, Result};
pub use estimators::{DecoyLevels, DecoyObservations, EstimatorKind, EstimatorOutput};
pub use eve::{AttackOverlaps, GramMatrix, Spectrum};
pub use model::{ChannelModel, DetectorModel, LinkBudget, SourceModel, StationOptics};
pub use rate::{CapacityBreakdown, CapacityOptions, Cutoff, EveGains};
pub use sim::{SessionConfig, SessionStats};
