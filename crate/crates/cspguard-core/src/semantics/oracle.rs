//! Ground-truth divergence check on the explored transition system.
//!
//! A state diverges when it can reach a cycle of silent steps. On the
//! finite (or truncated) graph that is: some reachable strongly connected
//! component of the τ-subgraph contains an internal τ-edge — a component
//! of two or more mutually reachable states, or a single state with a τ
//! self-loop. Divergence found in a truncated graph is still genuine
//! (every explored state's edges are complete); only the livelock-free
//! verdict needs the full graph.

use std::collections::VecDeque;

use crate::semantics::lts::Lts;
use crate::semantics::scc::tarjan_scc;
use crate::semantics::step::Label;
use crate::setlogic::Alphabet;

/// A concrete run proving divergence: a finite stem from the root followed
/// by a cycle of silent steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceWitness {
    pub stem: Vec<Label>,
    pub cycle_len: usize,
}

impl DivergenceWitness {
    pub fn display(&self, alphabet: &Alphabet) -> String {
        let stem: Vec<String> = self.stem.iter().map(|l| l.display(alphabet)).collect();
        format!(
            "stem [{}] then a silent cycle of length {}",
            stem.join(", "),
            self.cycle_len
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    LivelockFree,
    Divergent(DivergenceWitness),
    /// The state ceiling was hit without finding divergence.
    Unknown,
}

pub fn check_divergence(lts: &Lts) -> OracleVerdict {
    let n = lts.state_count();
    let tau = lts.tau_edges();
    let comps = tarjan_scc(&tau);

    let mut comp_of = vec![u32::MAX; n];
    for (ci, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v as usize] = ci as u32;
        }
    }
    let mut divergent = vec![false; n];
    let mut any = false;
    for (ci, comp) in comps.iter().enumerate() {
        let internal = comp
            .iter()
            .any(|&u| tau[u as usize].iter().any(|&v| comp_of[v as usize] == ci as u32));
        if internal {
            any = true;
            for &v in comp {
                divergent[v as usize] = true;
            }
        }
    }

    if !any {
        return if lts.complete {
            OracleVerdict::LivelockFree
        } else {
            OracleVerdict::Unknown
        };
    }

    // Shortest stem: breadth-first from the root to any divergent state.
    let mut parent: Vec<Option<(u32, Label)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    seen[0] = true;
    queue.push_back(0u32);
    let mut entry = None;
    if divergent[0] {
        entry = Some(0u32);
    }
    while entry.is_none() {
        let s = queue.pop_front().expect("divergent state unreachable");
        for &(l, t) in &lts.edges[s as usize] {
            if !seen[t as usize] {
                seen[t as usize] = true;
                parent[t as usize] = Some((s, l));
                if divergent[t as usize] {
                    entry = Some(t);
                    break;
                }
                queue.push_back(t);
            }
        }
    }
    let entry = entry.unwrap();
    let mut stem = Vec::new();
    let mut cur = entry;
    while let Some((p, l)) = parent[cur as usize] {
        stem.push(l);
        cur = p;
    }
    stem.reverse();

    // Shortest silent cycle through the entry state, inside its component.
    let comp = comp_of[entry as usize];
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for &t in &tau[entry as usize] {
        if comp_of[t as usize] == comp && dist[t as usize] == usize::MAX {
            dist[t as usize] = 1;
            queue.push_back(t);
        }
    }
    let cycle_len = if dist[entry as usize] == 1 {
        1 // τ self-loop
    } else {
        let mut found = None;
        while found.is_none() {
            let s = queue.pop_front().expect("silent cycle must exist");
            for &t in &tau[s as usize] {
                if comp_of[t as usize] != comp {
                    continue;
                }
                if t == entry {
                    found = Some(dist[s as usize] + 1);
                    break;
                }
                if dist[t as usize] == usize::MAX {
                    dist[t as usize] = dist[s as usize] + 1;
                    queue.push_back(t);
                }
            }
        }
        found.unwrap()
    };

    OracleVerdict::Divergent(DivergenceWitness { stem, cycle_len })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::lts::{build_lts, LtsOptions};
    use crate::syntax::{bekic_elaborate, parse};

    fn verdict(src: &str) -> OracleVerdict {
        verdict_capped(src, 100_000)
    }

    fn verdict_capped(src: &str, cap: usize) -> OracleVerdict {
        let spec = parse(src).unwrap();
        let lts = build_lts(
            &bekic_elaborate(&spec),
            &LtsOptions {
                fuse_hides: true,
                max_states: cap,
            },
        );
        check_divergence(&lts)
    }

    #[test]
    fn immediate_recursion_diverges() {
        match verdict("alphabet {a};\nP = mu X . X;\nroot P;") {
            OracleVerdict::Divergent(w) => {
                assert!(w.stem.is_empty());
                assert_eq!(w.cycle_len, 1);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn recursion_hiding_its_own_guard_diverges() {
        match verdict("alphabet {a};\nP = mu X . a -> (X \\ {a});\nroot P;") {
            OracleVerdict::Divergent(w) => {
                // One visible `a` is performed before hiding kicks in.
                assert_eq!(w.stem, vec![Label::Event(0)]);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn alternating_hides_diverge() {
        let v = verdict(
            "alphabet {a, b};\nP = mu X . (a -> (X \\ {b})) |~| (b -> (X \\ {a}));\nroot P;",
        );
        assert!(matches!(v, OracleVerdict::Divergent(_)));
    }

    #[test]
    fn plain_loops_are_livelock_free() {
        let v = verdict("alphabet {a, b};\nP = mu X . a -> b -> X;\nroot P;");
        assert_eq!(v, OracleVerdict::LivelockFree);
        let v = verdict("alphabet {a};\nP = (a -> SKIP) ; (mu X . a -> X);\nroot P;");
        assert_eq!(v, OracleVerdict::LivelockFree);
    }

    #[test]
    fn divergence_survives_truncation_but_freedom_does_not() {
        // DIV interleaved with an unbounded counter: divergent even though
        // the graph is truncated.
        let src = "alphabet {a};\nP = DIV [|{}|] (mu X . a -> (X [|{}|] X));\nroot P;";
        assert!(matches!(
            verdict_capped(src, 50),
            OracleVerdict::Divergent(_)
        ));
        // An unbounded counter alone: truncation forces a non-answer.
        let src = "alphabet {a};\nP = mu X . a -> (X [|{}|] X);\nroot P;";
        assert_eq!(verdict_capped(src, 50), OracleVerdict::Unknown);
    }

    #[test]
    fn hidden_synchronised_loop_is_divergence() {
        // Two processes chattering on a hidden channel forever.
        let src = "alphabet {a, b};\n\
                   P = ((mu X . a -> X) [|{a}|] (mu Y . a -> Y)) \\ {a};\n\
                   root P;";
        match verdict(src) {
            OracleVerdict::Divergent(w) => {
                assert!(w.stem.is_empty());
                assert_eq!(w.cycle_len, 1);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
