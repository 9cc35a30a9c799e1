//! Symmetric N-body and infinite-body optimal transport with pair costs on
//! discrete measures.
//!
//! The crate is organized bottom-up:
//!
//! * [`measure`]: discrete probability measures, pair measures and
//!   exchangeable N-body measures in multiset form.
//! * [`cost`]: translation-invariant pair costs and their N-body sums.
//! * [`lp`]: a revised simplex kernel with dual and Farkas certificates, plus
//!   an exact rational oracle.
//! * [`mmot`]: the symmetric multi-marginal transport problem.
//! * [`representability`]: N-representability of pair measures and the
//!   k-representability hierarchy.
//! * [`definetti`]: finite de Finetti mixtures and the Diaconis–Freedman lift.
//! * [`fourier`]: discrete-torus Plancherel identities and the variance
//!   decomposition of the infinite-body cost.
//! * [`experiments`]: convergence, hierarchy, deficit and counterexample runs.
//! * [`report`]: canonical JSON, CSV, SVG and manifest output.

pub mod cost;
pub mod definetti;
pub mod experiments;
pub mod fourier;
pub mod lp;
pub mod measure;
pub mod mmot;
pub mod report;
pub mod representability;
pub mod sampling;
pub mod validation;

pub use cost::{CostFunction, CostKind};
pub use definetti::Mixture;
pub use lp::{LinearProgram, LpResult, LpStatus};
pub use measure::{AnyMeasure, DiscreteMeasure, NBodyMeasure, PairMeasure, SupportGrid};
pub use mmot::{MmotProblem, SolveReport};

