//! Compositional livelock analysis for structurally finite-state terms.
//!
//! The term is cut at its maximal closed sequential subterms. Each cut
//! point gets the exact (δ, Φ) of its transition system from
//! [`super::seq`]; above the cuts, δ and Φ are pushed through the
//! operators:
//!
//! * δ — "can diverge" — is a plain disjunction everywhere except hiding,
//!   which also diverges when some fingerprint's live events are all
//!   swallowed by the hidden set;
//! * Φ — the fingerprint pairs (F, C) of live and banned events — has an
//!   exact image through hiding and renaming, a union for the choices and
//!   sequencing, and a synchronized merge for parallel.
//!
//! δ(root) = false certifies livelock freedom. The approximation loses
//! only at parallel composition (the merge keeps pairs whose books
//! balance, which may be none) — everything else is exact — so an
//! inconclusive answer points at the node where δ first turned true.

use crate::setlogic::{Alphabet, EventSet, FamilyBackend, FamilyError, PairFamily};
use crate::sfs::seq::{seq_delta, seq_lts, seq_phi, SeqError};
use crate::syntax::{display_term, is_sequential, is_sfs, Term};

#[derive(Debug, thiserror::Error)]
pub enum SfsError {
    #[error("term is outside the structurally finite-state fragment")]
    NotSfs,
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// One analysed node of the composition tree: just the cut points and the
/// compound operators above them, not the insides of sequential parts.
#[derive(Clone, Debug)]
pub struct NodeReport {
    /// Dotted child-index path from the root ("root", "root.0", …).
    pub path: String,
    /// The node's term, pretty-printed.
    pub term: String,
    /// Whether this node was a sequential cut point.
    pub sequential: bool,
    pub delta: bool,
    /// Fingerprint members, capped; `truncated` says the cap bit.
    pub phi_sample: Vec<(EventSet, EventSet)>,
    pub truncated: bool,
}

/// Result of the compositional analysis of one closed SFS term.
pub struct SfsAnalysis {
    pub delta: bool,
    pub phi: PairFamily,
    /// Post-order visit of the composition tree.
    pub nodes: Vec<NodeReport>,
    /// Path of the first node (in evaluation order) whose δ is true —
    /// the origin of the failure, its ancestors merely inherit it.
    pub first_divergent: Option<String>,
}

impl SfsAnalysis {
    pub fn is_livelock_free(&self) -> bool {
        !self.delta
    }
}

const PHI_SAMPLE_CAP: usize = 64;

struct Walk<'a, 'b> {
    alphabet: &'a Alphabet,
    backend: &'b mut dyn FamilyBackend,
    nodes: Vec<NodeReport>,
    first_divergent: Option<String>,
}

/// Compute per-node (δ, Φ) for a closed SFS term.
pub fn sfs_delta_phi(
    t: &Term,
    alphabet: &Alphabet,
    backend: &mut dyn FamilyBackend,
) -> Result<SfsAnalysis, SfsError> {
    if !is_sfs(t) {
        return Err(SfsError::NotSfs);
    }
    let mut walk = Walk {
        alphabet,
        backend,
        nodes: Vec::new(),
        first_divergent: None,
    };
    let (delta, phi) = walk.node(t, "root".to_string())?;
    Ok(SfsAnalysis {
        delta,
        phi,
        nodes: walk.nodes,
        first_divergent: walk.first_divergent,
    })
}

impl Walk<'_, '_> {
    fn node(&mut self, t: &Term, path: String) -> Result<(bool, PairFamily), SfsError> {
        let (delta, phi, sequential) = if is_sequential(t) {
            debug_assert!(t.is_closed(), "SFS terms cut at closed sequential parts");
            let lts = seq_lts(t)?;
            let delta = seq_delta(&lts);
            let phi = if delta {
                self.backend.pf_empty()?
            } else {
                seq_phi(&lts, self.backend)?
            };
            (delta, phi, true)
        } else {
            let (delta, phi) = self.compound(t, &path)?;
            (delta, phi, false)
        };
        self.record(t, path, delta, &phi)?;
        Ok((delta, phi))
    }

    fn compound(&mut self, t: &Term, path: &str) -> Result<(bool, PairFamily), SfsError> {
        let child = |i: usize| format!("{path}.{i}");
        Ok(match t {
            Term::Prefix(_, p) => self.node(p, child(0))?,
            Term::IntChoice(p, q) | Term::ExtChoice(p, q) | Term::Seq(p, q) => {
                let (dp, fp) = self.node(p, child(0))?;
                let (dq, fq) = self.node(q, child(1))?;
                let delta = dp || dq;
                let phi = if delta {
                    self.backend.pf_empty()?
                } else {
                    self.backend.pf_union(&fp, &fq)?
                };
                (delta, phi)
            }
            Term::Parallel(p, sync, q) => {
                let (dp, fp) = self.node(p, child(0))?;
                let (dq, fq) = self.node(q, child(1))?;
                let delta = dp || dq;
                let phi = if delta {
                    self.backend.pf_empty()?
                } else {
                    // Loops where both sides stay live, merged over the
                    // interface, plus loops of either side alone that
                    // need no cooperation.
                    let merged = self.backend.pf_phi_par_merge(&fp, &fq, *sync)?;
                    let solo_p = self.backend.pf_first_disjoint(&fp, *sync)?;
                    let solo_q = self.backend.pf_first_disjoint(&fq, *sync)?;
                    let acc = self.backend.pf_union(&merged, &solo_p)?;
                    self.backend.pf_union(&acc, &solo_q)?
                };
                (delta, phi)
            }
            Term::Hide(p, hidden) => {
                let (dp, fp) = self.node(p, child(0))?;
                // Hiding diverges when some loop's live events all become
                // internal.
                let swallowed = self.backend.pf_first_subset(&fp, *hidden)?;
                let delta = dp || !self.backend.pf_is_empty(&swallowed)?;
                let phi = if delta {
                    self.backend.pf_empty()?
                } else {
                    self.backend.pf_phi_hide(&fp, *hidden)?
                };
                (delta, phi)
            }
            Term::Rename(p, r) => {
                let (dp, fp) = self.node(p, child(0))?;
                let phi = if dp {
                    self.backend.pf_empty()?
                } else {
                    self.backend.pf_phi_rename(&fp, r)?
                };
                (dp, phi)
            }
            // A μ this deep has an unused variable (anything else is not
            // SFS); it is semantically its own body.
            Term::Mu(_, p) => self.node(p, child(0))?,
            Term::Stop | Term::Skip | Term::Var(_) | Term::Div => {
                unreachable!("sequential or non-SFS leaves handled earlier")
            }
        })
    }

    fn record(
        &mut self,
        t: &Term,
        path: String,
        delta: bool,
        phi: &PairFamily,
    ) -> Result<(), FamilyError> {
        let (phi_sample, truncated) = match self.backend.pf_enumerate(phi, PHI_SAMPLE_CAP) {
            Ok(members) => (members, false),
            Err(FamilyError::CapExceeded { .. }) => {
                let w = self.backend.pf_witness(phi)?;
                (w.into_iter().collect(), true)
            }
            Err(e) => return Err(e),
        };
        if delta && self.first_divergent.is_none() {
            self.first_divergent = Some(path.clone());
        }
        self.nodes.push(NodeReport {
            path,
            term: display_term(t, self.alphabet).to_string(),
            sequential: is_sequential(t),
            delta,
            phi_sample,
            truncated,
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setlogic::{BddBackend, ExplicitBackend};
    use crate::syntax::{bekic_elaborate, parse};

    fn setup(src: &str) -> (Term, Alphabet) {
        let spec = parse(src).unwrap();
        let alphabet = spec.alphabet.clone();
        (bekic_elaborate(&spec), alphabet)
    }

    fn members(
        be: &mut dyn FamilyBackend,
        phi: &PairFamily,
    ) -> Vec<(u64, u64)> {
        be.pf_enumerate(phi, 1 << 16)
            .unwrap()
            .into_iter()
            .map(|(u, v)| (u.bits(), v.bits()))
            .collect()
    }

    // The protocol example threaded through the whole module: a sender
    // that may error, retrying through a fairness assumption.
    const PROTOCOL: &str = "alphabet {error, in, out};\n\
        Send = in -> Medium;\n\
        Medium = (out -> Send) [] (error -> Medium);\n\
        Fair = (out -> Fair) [] (error -> out -> Fair);\n\
        Network = Send [| {error, out} |] Fair;\n\
        System = Network \\ {error};\n\
        root System;";

    #[test]
    fn protocol_system_is_certified() {
        let (t, alphabet) = setup(PROTOCOL);
        let mut be = ExplicitBackend::new(3).unwrap();
        let analysis = sfs_delta_phi(&t, &alphabet, &mut be).unwrap();
        assert!(analysis.is_livelock_free());
        // error=0, in=1, out=2: the system loops on {in, out} with error
        // banned (now internal).
        assert_eq!(members(&mut be, &analysis.phi), vec![(0b110, 0b001)]);
        // Composition tree: Send, Fair, Network, System.
        assert_eq!(analysis.nodes.len(), 4);
        assert!(analysis.nodes.iter().all(|n| !n.delta));
        assert_eq!(analysis.nodes[3].path, "root");
    }

    #[test]
    fn hiding_the_whole_interface_fails_the_check() {
        let (t, alphabet) = setup(
            "alphabet {error, in, out};\n\
             Send = in -> Medium;\n\
             Medium = (out -> Send) [] (error -> Medium);\n\
             Fair = (out -> Fair) [] (error -> out -> Fair);\n\
             Network = Send [| {error, out} |] Fair;\n\
             Silent = Network \\ {error, out, in};\n\
             root Silent;",
        );
        let mut be = ExplicitBackend::new(3).unwrap();
        let analysis = sfs_delta_phi(&t, &alphabet, &mut be).unwrap();
        assert!(analysis.delta);
        assert_eq!(analysis.first_divergent.as_deref(), Some("root"));
        assert!(be.pf_is_empty(&analysis.phi).unwrap());
    }

    #[test]
    fn divergence_origin_is_the_deepest_failing_node() {
        // The left operand of the parallel already diverges.
        let (t, alphabet) = setup(
            "alphabet {a, b};\n\
             Loop = (mu X . a -> X) \\ {a};\n\
             P = Loop [| {b} |] (b -> STOP);\n\
             root P;",
        );
        let mut be = ExplicitBackend::new(2).unwrap();
        let analysis = sfs_delta_phi(&t, &alphabet, &mut be).unwrap();
        assert!(analysis.delta);
        // Loop is sequential, so the cut point itself reports the τ-cycle.
        assert_eq!(analysis.first_divergent.as_deref(), Some("root.0"));
    }

    #[test]
    fn backends_agree_on_the_protocol() {
        let (t, alphabet) = setup(PROTOCOL);
        let mut ex = ExplicitBackend::new(3).unwrap();
        let a1 = sfs_delta_phi(&t, &alphabet, &mut ex).unwrap();
        let mut sy = BddBackend::new(3);
        let a2 = sfs_delta_phi(&t, &alphabet, &mut sy).unwrap();
        assert_eq!(a1.delta, a2.delta);
        assert_eq!(members(&mut ex, &a1.phi), members(&mut sy, &a2.phi));
    }

    #[test]
    fn interleaving_keeps_independent_loops() {
        let (t, alphabet) = setup(
            "alphabet {a, b};\n\
             P = (mu X . a -> X) [| {} |] (mu Y . b -> Y);\n\
             root P;",
        );
        let mut be = ExplicitBackend::new(2).unwrap();
        let analysis = sfs_delta_phi(&t, &alphabet, &mut be).unwrap();
        assert!(analysis.is_livelock_free());
        // Solo loops survive an empty interface; the merge contributes
        // the joint loop.
        assert_eq!(
            members(&mut be, &analysis.phi),
            vec![(0b01, 0b10), (0b10, 0b01), (0b11, 0b00)]
        );
    }

    #[test]
    fn non_sfs_terms_are_refused() {
        let (t, alphabet) = setup(
            "alphabet {a};\n\
             P = mu X . a -> (X [| {a} |] X);\n\
             root P;",
        );
        let mut be = ExplicitBackend::new(1).unwrap();
        assert!(matches!(
            sfs_delta_phi(&t, &alphabet, &mut be),
            Err(SfsError::NotSfs)
        ));
    }
}
