//! Finite-set machinery shared by every analysis: the declared alphabet,
//! bitmask event sets, renaming relations, and two interchangeable engines
//! for computing with families of event sets and of set pairs — one
//! explicit (bit-per-member tables), one symbolic (BDDs). Everything above
//! this module talks to the [`FamilyBackend`] trait and cannot tell the
//! engines apart; that interchangeability is itself checked by tests.

pub mod bdd;
pub mod events;
pub mod explicit;
mod family;

pub use events::{Alphabet, AlphabetError, EventId, EventSet, RenamingRelation, MAX_ALPHABET};
pub use family::{
    backend_parity_pairs, backend_parity_sets, BackendKind, FamilyBackend, FamilyError,
    PairFamily, SetFamily,
};
pub use bdd::BddBackend;
pub use explicit::ExplicitBackend;
