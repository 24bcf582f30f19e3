//! The star game: rules, search, the path order oracle, energies and tracing.

pub mod certificate;
pub mod explore;
pub mod mpo;
pub mod omega;
pub mod search;
pub mod successors;
pub mod tracing;

pub use certificate::{certificate_from_mpo, CertificateError};
pub use explore::{explore, ExplorationTooLarge, ExploreConfig, Game, StateGraph};
pub use mpo::{mpo_greater, mpo_greater_eq};
pub use omega::{lift_energy, omega_successors, LiftError};
pub use search::{search_reduction, Budget, NotFound, NotFoundReason};
pub use successors::star_successors;
pub use tracing::{ancestor, descendants, step_links, DescendantLink, Occurrence, TracingError};
