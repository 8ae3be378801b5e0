//! Livelock analysis for structurally finite-state processes: exact
//! automaton analysis of sequential components ([`seq`]), compositional
//! propagation over the remaining operators ([`compose`]).

pub mod compose;
pub mod seq;

pub use compose::{sfs_delta_phi, NodeReport, SfsAnalysis, SfsError};
pub use seq::{
    check_lasso, seq_delta, seq_lts, seq_phi, seq_phi_circuit, seq_phi_explicit, visible_labels,
    witness_lasso, Lasso, SeqError,
};
