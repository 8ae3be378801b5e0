//! Labelled transition system construction by breadth-first exploration.
//!
//! State identity is the α-normalised term, so recursive unfoldings that
//! differ only in binder names collapse. The oracle additionally fuses
//! nested hiding before normalising — unfoldings of recursion through
//! hiding otherwise pile up syntactically distinct but equivalent states
//! and never close the state space.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::semantics::step::{step, Label};
use crate::setlogic::Alphabet;
use crate::syntax::Term;

#[derive(Clone, Debug)]
pub struct LtsOptions {
    /// Collapse `(P \ A) \ B` to `P \ (A ∪ B)` when normalising states.
    pub fuse_hides: bool,
    /// Hard ceiling on the number of states interned; edges to states
    /// beyond it are dropped and the result marked incomplete.
    pub max_states: usize,
}

impl Default for LtsOptions {
    fn default() -> Self {
        LtsOptions {
            fuse_hides: true,
            max_states: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Lts {
    /// Canonical representative term of each state; index 0 is the root.
    pub states: Vec<Term>,
    /// Outgoing edges per state, in deterministic discovery order.
    pub edges: Vec<Vec<(Label, u32)>>,
    /// Whether the whole reachable graph fits under the state ceiling.
    pub complete: bool,
}

impl Lts {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Adjacency restricted to silent steps.
    pub fn tau_edges(&self) -> Vec<Vec<u32>> {
        self.edges
            .iter()
            .map(|es| {
                es.iter()
                    .filter(|(l, _)| l.is_tau())
                    .map(|&(_, t)| t)
                    .collect()
            })
            .collect()
    }
}

fn canonical(t: &Term, opts: &LtsOptions) -> Term {
    let fused = if opts.fuse_hides { t.fuse_hides() } else { t.clone() };
    fused.alpha_normalize()
}

pub fn build_lts(root: &Term, opts: &LtsOptions) -> Lts {
    let mut index: HashMap<Term, u32> = HashMap::new();
    let mut states: Vec<Term> = Vec::new();
    let mut edges: Vec<Vec<(Label, u32)>> = Vec::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    let mut complete = true;

    let root_c = canonical(root, opts);
    index.insert(root_c.clone(), 0);
    states.push(root_c);
    edges.push(Vec::new());
    queue.push_back(0);

    while let Some(s) = queue.pop_front() {
        let term = states[s as usize].clone();
        let mut out: Vec<(Label, u32)> = Vec::new();
        for (label, target) in step(&term) {
            let canon = canonical(&target, opts);
            let id = match index.get(&canon) {
                Some(&id) => id,
                None => {
                    if states.len() >= opts.max_states {
                        complete = false;
                        continue;
                    }
                    let id = states.len() as u32;
                    index.insert(canon.clone(), id);
                    states.push(canon);
                    edges.push(Vec::new());
                    queue.push_back(id);
                    id
                }
            };
            if !out.contains(&(label, id)) {
                out.push((label, id));
            }
        }
        edges[s as usize] = out;
    }

    Lts {
        states,
        edges,
        complete,
    }
}

/// GraphViz rendering, one node per state labelled with its index and the
/// root double-circled; τ edges dashed.
pub fn lts_to_dot(lts: &Lts, alphabet: &Alphabet) -> String {
    let mut out = String::from("digraph lts {\n  rankdir=LR;\n  node [shape=circle];\n");
    let _ = writeln!(out, "  s0 [shape=doublecircle];");
    for (s, es) in lts.edges.iter().enumerate() {
        for (l, t) in es {
            let style = if l.is_tau() { ",style=dashed" } else { "" };
            let _ = writeln!(
                out,
                "  s{s} -> s{t} [label=\"{}\"{style}];",
                l.display(alphabet)
            );
        }
    }
    if !lts.complete {
        out.push_str("  incomplete [shape=plaintext,label=\"(truncated)\"];\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{bekic_elaborate, parse};

    fn lts_of(src: &str, opts: &LtsOptions) -> Lts {
        let spec = parse(src).unwrap();
        build_lts(&bekic_elaborate(&spec), opts)
    }

    #[test]
    fn counter_loop_closes() {
        let lts = lts_of(
            "alphabet {a, b};\nP = mu X . a -> b -> X;\nroot P;",
            &LtsOptions::default(),
        );
        // μ-state, a-prefix state, b-prefix state.
        assert!(lts.complete);
        assert_eq!(lts.state_count(), 3);
    }

    #[test]
    fn recursion_through_hiding_needs_fusion() {
        let src = "alphabet {a};\nP = mu X . a -> (X \\ {a});\nroot P;";
        let fused = lts_of(src, &LtsOptions::default());
        assert!(fused.complete);
        assert_eq!(fused.state_count(), 4);

        let raw = lts_of(
            src,
            &LtsOptions {
                fuse_hides: false,
                max_states: 64,
            },
        );
        assert!(!raw.complete);
    }

    #[test]
    fn state_cap_marks_incomplete() {
        let lts = lts_of(
            "alphabet {a, b, c};\nP = mu X . a -> b -> c -> X;\nroot P;",
            &LtsOptions {
                fuse_hides: true,
                max_states: 2,
            },
        );
        assert!(!lts.complete);
        assert_eq!(lts.state_count(), 2);
    }

    #[test]
    fn alpha_variant_unfoldings_share_states() {
        // Nested recursion whose unfolding re-binds the same shape under a
        // fresh name; α-normalisation must merge them.
        let lts = lts_of(
            "alphabet {a};\nP = mu X . a -> mu Y . a -> X;\nroot P;",
            &LtsOptions::default(),
        );
        assert!(lts.complete);
        assert!(lts.state_count() <= 5);
    }
}
