//! Conservative static livelock-freedom analysis for CSP processes.
//!
//! The library certifies processes of a small CSP dialect as livelock-free
//! without exploring their state spaces. Two rule systems do the work:
//!
//! * a *general* framework that computes nonexpansive / guard / contractive /
//!   fair set families by structural recursion over the term, certifying
//!   livelock-freedom whenever the fair-set family of the root is non-empty
//!   ([`general`]);
//! * a sharper framework for *structurally finite-state* processes that
//!   computes a livelock bit δ and a family Φ of fair/co-fair event-set pairs
//!   compositionally, with exact automaton-based analysis of sequential
//!   components ([`sfs`]).
//!
//! Both frameworks are conservative: `LivelockFree` verdicts are always
//! correct, `Inconclusive` verdicts carry no information. An explicit-state
//! divergence oracle ([`semantics::check_divergence`]) provides ground truth
//! for testing and for the optional `--oracle` cross-check.
//!
//! Set families are computed on one of two interchangeable backends: an
//! explicit bit-vector enumeration for small alphabets and a reduced ordered
//! decision diagram for large ones ([`setlogic`]).

pub mod analysis;
pub mod benchgen;
pub mod general;
pub mod semantics;
pub mod setlogic;
pub mod sfs;
pub mod syntax;

pub use analysis::{analyze_spec, AnalyzeConfig, BackendChoice, Mode, Report, Verdict};
pub use setlogic::{Alphabet, EventId, EventSet, RenamingRelation};
pub use syntax::{parse, ProcessClass, Spec, Term};
