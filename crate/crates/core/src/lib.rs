//! Exact toolkit for N-party non-signalling correlation boxes.
//!
//! Everything mathematical runs on arbitrary-precision rationals, so
//! reconstruction identities hold with zero tolerance:
//!
//! * [`boxes`] — (quasi)probability tensors, validation, no-signalling
//!   checks, and subset marginals;
//! * [`marginals`] — the canonical marginal coordinates that pin down a
//!   non-signalling box, with an exact encode/decode pair;
//! * [`classical`] — the negative-measurements and negative-state
//!   hidden-variable models, their evaluation, η-compression, negativity
//!   accounting, and a signed Monte Carlo sampler;
//! * [`quantum`] — commuting diagonal-operator lifts of classical models
//!   and the trace-rule evaluator;
//! * [`locality`] — local-polytope membership by LP with exactly
//!   verified certificates either way;
//! * [`gallery`] — canonical boxes (PR, Tsirelson, …) and seeded random
//!   corpora;
//! * [`mod@format`] — canonical text file formats with byte-identical round
//!   trips.

pub mod boxes;
pub mod classical;
mod exact_lp;
pub mod format;
pub mod gallery;
pub mod locality;
pub mod marginals;
pub mod quantum;
pub mod rational;
pub mod scenario;

pub use boxes::{ProperBox, QuasiBox, SignallingWitness, ValidationReport};
pub use classical::{ClassicalModel, HiddenLabel, ModelKind, NegativityReport, SampleReport};
pub use locality::{BellFunctional, DeterministicStrategy, LocalityCertificate};
pub use marginals::{canonical_marginals, from_marginals, param_count, MarginalTable};
pub use quantum::{QuantumModel, QuantumVerifyReport};
pub use scenario::Scenario;
