//! Empirical models over measurement scenarios, in the sheaf-theoretic
//! style: no-signalling distributions on a cover of maximal contexts,
//! the contextuality hierarchy, canonical no-signalling extensions to
//! larger covers, and the construction of equivalent Bell-type models.
//!
//! All arithmetic is exact (arbitrary-precision rationals); there is no
//! floating point anywhere in the core, so every classification is a
//! plain boolean rather than a tolerance judgement.

pub mod bell;
pub mod catalog;
pub mod cli;
pub mod extension;
pub mod format;
pub mod ksgen;
pub mod linear;
pub mod model;
pub mod scenario;
pub mod solver;

pub use model::{Distribution, EmpiricalModel, Rational, SectionSet, Semiring, Violation};
pub use scenario::{BellStructure, Context, MeasurementScenario};
pub use solver::{ContextualityClass, GlobalSectionWitness};
