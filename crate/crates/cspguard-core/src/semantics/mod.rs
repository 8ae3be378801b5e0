//! Operational semantics: single-step transitions, labelled transition
//! system construction, and the explicit-state divergence oracle used to
//! cross-check the static analyses.

mod lts;
mod oracle;
mod scc;
mod step;

pub use lts::{build_lts, lts_to_dot, Lts, LtsOptions};
pub use oracle::{check_divergence, DivergenceWitness, OracleVerdict};
pub use scc::tarjan_scc;
pub use step::{step, Label};
