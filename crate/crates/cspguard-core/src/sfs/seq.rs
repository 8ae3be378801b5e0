//! Divergence bit and loop fingerprints of a sequential process, read off
//! its (always finite) transition system.
//!
//! A *fingerprint* of a non-divergent process is a pair (F, Σ∖F) where F
//! is the exact set of visible events some reachable loop keeps performing
//! forever. Fingerprints are what the compositional rules in
//! [`super::compose`] push through parallel, hiding, and renaming; here
//! they are computed from first principles, twice:
//!
//! * an enumerative route: for each candidate F, delete the edges F rules
//!   out and look for a strongly connected component that still exercises
//!   all of F;
//! * a symbolic route: a single algebraic circuit over set families whose
//!   models are exactly the fingerprint sets, built from a reachability
//!   matrix by repeated multiplication.
//!
//! Both are kept live — the enumerative route serves small alphabets, the
//! circuit serves the BDD backend — and their agreement is checked in the
//! test suite.

use crate::semantics::{build_lts, check_divergence, tarjan_scc, Label, Lts, LtsOptions, OracleVerdict};
use crate::setlogic::{EventSet, FamilyBackend, FamilyError, PairFamily, SetFamily};
use crate::syntax::{is_sequential, Term};

#[derive(Debug, thiserror::Error)]
pub enum SeqError {
    #[error("term is not in the sequential fragment")]
    NotSequential,
    #[error("process diverges; it has no fingerprints")]
    Divergent,
    #[error("transition system exceeded {0} states; not a sequential process?")]
    StateCap(usize),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Transition system of a closed sequential term. Fails rather than
/// truncate: everything downstream assumes completeness.
pub fn seq_lts(t: &Term) -> Result<Lts, SeqError> {
    if !t.is_closed() || !is_sequential(t) {
        return Err(SeqError::NotSequential);
    }
    let opts = LtsOptions {
        fuse_hides: false,
        max_states: 1 << 20,
    };
    let lts = build_lts(t, &opts);
    if !lts.complete {
        return Err(SeqError::StateCap(opts.max_states));
    }
    Ok(lts)
}

/// True iff the process can diverge: some reachable cycle of internal
/// moves. This is the semantic ground truth, not an approximation — the
/// transition system is complete.
pub fn seq_delta(lts: &Lts) -> bool {
    debug_assert!(lts.complete);
    matches!(check_divergence(lts), OracleVerdict::Divergent(_))
}

/// Visible events actually occurring in the transition system. The
/// fingerprint computations quantify over subsets of this, not of the
/// whole alphabet.
pub fn visible_labels(lts: &Lts) -> EventSet {
    let mut s = EventSet::EMPTY;
    for out in &lts.edges {
        for &(l, _) in out {
            if let Label::Event(a) = l {
                s.insert(a);
            }
        }
    }
    s
}

/// Fingerprints by backend-appropriate route.
pub fn seq_phi(
    lts: &Lts,
    backend: &mut dyn FamilyBackend,
) -> Result<PairFamily, SeqError> {
    match backend.kind() {
        crate::setlogic::BackendKind::Explicit => seq_phi_explicit(lts, backend),
        crate::setlogic::BackendKind::Symbolic => seq_phi_circuit(lts, backend),
    }
}

/// Enumerative fingerprint computation.
///
/// For each non-empty F over the occurring events: drop every visible
/// edge labelled outside F (and termination edges — nothing loops through
/// termination), keep internal moves, and accept F iff some strongly
/// connected component of the remainder has internal edges covering all
/// of F. Deletion already caps a component's labels at F, so covering
/// means the loop performs exactly F forever.
pub fn seq_phi_explicit(
    lts: &Lts,
    backend: &mut dyn FamilyBackend,
) -> Result<PairFamily, SeqError> {
    if seq_delta(lts) {
        return Err(SeqError::Divergent);
    }
    let n = backend.alpha_n() as usize;
    let sigma_p = visible_labels(lts);
    let evs: Vec<u8> = (0..n as u8).filter(|&a| sigma_p.contains(a)).collect();
    let mut members: Vec<(EventSet, EventSet)> = Vec::new();
    for mask in 1u64..(1u64 << evs.len()) {
        let mut f = EventSet::EMPTY;
        for (i, &a) in evs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                f.insert(a);
            }
        }
        // Subgraph: τ-edges plus visible edges labelled within F.
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); lts.state_count()];
        for (src, out) in lts.edges.iter().enumerate() {
            for &(l, dst) in out {
                match l {
                    Label::Tau => adj[src].push(dst),
                    Label::Event(a) if f.contains(a) => adj[src].push(dst),
                    _ => {}
                }
            }
        }
        let comps = tarjan_scc(&adj);
        let mut comp_of = vec![0u32; lts.state_count()];
        for (ci, comp) in comps.iter().enumerate() {
            for &s in comp {
                comp_of[s as usize] = ci as u32;
            }
        }
        let mut internal: Vec<EventSet> = vec![EventSet::EMPTY; comps.len()];
        for (src, out) in lts.edges.iter().enumerate() {
            for &(l, dst) in out {
                if let Label::Event(a) = l {
                    if f.contains(a) && comp_of[src] == comp_of[dst as usize] {
                        internal[comp_of[src] as usize].insert(a);
                    }
                }
            }
        }
        if internal.iter().any(|&lab| f.bits() & !lab.bits() == 0) {
            members.push((f, f.complement(n)));
        }
    }
    Ok(backend.pf_from_members(&members)?)
}

/// Symbolic fingerprint computation.
///
/// `reach[i][j]` is the family of event sets F such that a non-empty walk
/// i→j uses only internal moves and F-events; it is grown by repeated
/// boolean matrix multiplication, one step per iteration, for exactly
/// `|S|` iterations (walks longer than the state count revisit states and
/// contribute nothing new). The fingerprint family is then
///
/// ```text
/// ⋁_s ⋀_{a occurring} ( ¬a ∨ ⋁_{src −a→ dst} reach[s][src] ∧ reach[dst][s] )
/// ```
///
/// restricted to non-empty sets of occurring events: a set F survives the
/// conjunction for some s exactly when every event of F lies on a loop
/// through s inside the F-subgraph — the component condition of the
/// enumerative route, stated without enumerating.
pub fn seq_phi_circuit(
    lts: &Lts,
    backend: &mut dyn FamilyBackend,
) -> Result<PairFamily, SeqError> {
    if seq_delta(lts) {
        return Err(SeqError::Divergent);
    }
    let n = backend.alpha_n() as usize;
    let ns = lts.state_count();
    let sigma_p = visible_labels(lts);

    // One-step matrix: None is the empty family.
    let mut step: Vec<Vec<Option<SetFamily>>> = vec![vec![None; ns]; ns];
    for (src, out) in lts.edges.iter().enumerate() {
        for &(l, dst) in out {
            let edge = match l {
                Label::Tau => backend.sf_full(),
                Label::Event(a) => backend.sf_with_event(a),
                Label::Tick => continue,
            };
            let cell = &mut step[src][dst as usize];
            *cell = Some(match cell.take() {
                None => edge,
                Some(old) => backend.sf_union(&old, &edge)?,
            });
        }
    }

    let mut reach = step.clone();
    for _ in 0..ns {
        let mut next = reach.clone();
        for i in 0..ns {
            for k in 0..ns {
                let Some(ik) = reach[i][k].clone() else { continue };
                for j in 0..ns {
                    let Some(kj) = step[k][j].as_ref() else { continue };
                    let prod = backend.sf_intersect(&ik, kj)?;
                    let cell = &mut next[i][j];
                    *cell = Some(match cell.take() {
                        None => prod,
                        Some(old) => backend.sf_union(&old, &prod)?,
                    });
                }
            }
        }
        reach = next;
    }

    // Visible edges grouped by label, for the inner disjunction.
    let mut by_label: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    for (src, out) in lts.edges.iter().enumerate() {
        for &(l, dst) in out {
            if let Label::Event(a) = l {
                by_label[a as usize].push((src as u32, dst));
            }
        }
    }

    let mut looped = backend.sf_empty();
    for s in 0..ns {
        let mut conj = backend.sf_full();
        for a in 0..n as u8 {
            if !sigma_p.contains(a) {
                continue;
            }
            let mut on_loop = backend.sf_empty();
            for &(src, dst) in &by_label[a as usize] {
                let (Some(to_src), Some(back)) =
                    (reach[s][src as usize].as_ref(), reach[dst as usize][s].as_ref())
                else {
                    continue;
                };
                let through = backend.sf_intersect(to_src, back)?;
                on_loop = backend.sf_union(&on_loop, &through)?;
            }
            let absent = backend.sf_without_events(EventSet::singleton(a));
            let clause = backend.sf_union(&absent, &on_loop)?;
            conj = backend.sf_intersect(&conj, &clause)?;
        }
        looped = backend.sf_union(&looped, &conj)?;
    }

    let beyond = backend.sf_without_events(sigma_p);
    let some_occurring = backend.sf_complement(&beyond)?;
    let only_occurring = backend.sf_without_events(sigma_p.complement(n));
    let fits = backend.sf_intersect(&some_occurring, &only_occurring)?;
    let fingerprints = backend.sf_intersect(&looped, &fits)?;
    Ok(backend.pf_couple_complement(&fingerprints)?)
}

/// A concrete run witnessing a fingerprint: a stem from the initial state
/// followed by a loop. Each element is (label, target-state); the stem
/// starts at state 0 and the cycle starts and ends at the stem's last
/// state.
#[derive(Clone, Debug)]
pub struct Lasso {
    pub stem: Vec<(Label, u32)>,
    pub cycle: Vec<(Label, u32)>,
}

impl Lasso {
    pub fn entry(&self) -> u32 {
        self.stem.last().map_or(0, |&(_, s)| s)
    }

    /// Visible events the loop performs.
    pub fn loop_events(&self) -> EventSet {
        let mut s = EventSet::EMPTY;
        for &(l, _) in &self.cycle {
            if let Label::Event(a) = l {
                s.insert(a);
            }
        }
        s
    }
}

/// Find a lasso whose loop performs every event of `f` and nothing else
/// visible. Exists iff (f, Σ∖f) is a fingerprint.
pub fn witness_lasso(lts: &Lts, f: EventSet) -> Option<Lasso> {
    // Subgraph restricted to τ and f-events, remembering labels.
    let ns = lts.state_count();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); ns];
    for (src, out) in lts.edges.iter().enumerate() {
        for &(l, dst) in out {
            match l {
                Label::Tau => adj[src].push(dst),
                Label::Event(a) if f.contains(a) => adj[src].push(dst),
                _ => {}
            }
        }
    }
    let comps = tarjan_scc(&adj);
    let mut comp_of = vec![0u32; ns];
    for (ci, comp) in comps.iter().enumerate() {
        for &s in comp {
            comp_of[s as usize] = ci as u32;
        }
    }
    let mut internal: Vec<EventSet> = vec![EventSet::EMPTY; comps.len()];
    for (src, out) in lts.edges.iter().enumerate() {
        for &(l, dst) in out {
            if let Label::Event(a) = l {
                if f.contains(a) && comp_of[src] == comp_of[dst as usize] {
                    internal[comp_of[src] as usize].insert(a);
                }
            }
        }
    }
    let target = (0..comps.len()).find(|&ci| f.bits() & !internal[ci].bits() == 0)?;
    if f == EventSet::EMPTY {
        return None; // fingerprints are never empty
    }

    // Shortest-path helper inside the restricted subgraph.
    let in_comp = |s: u32| comp_of[s as usize] as usize == target;
    let path_within = |from: u32, to: u32| -> Vec<(Label, u32)> {
        bfs_path(lts, from, to, |src, l, dst| {
            in_comp(src) && in_comp(dst) && edge_allowed(l, f)
        })
        .expect("states of one component are mutually reachable within it")
    };

    let entry = comps[target][0];
    let stem = bfs_path(lts, 0, entry, |_, _, _| true)?;

    // Stitch a loop: visit one representative edge per required event.
    let mut cycle: Vec<(Label, u32)> = Vec::new();
    let mut cur = entry;
    for a in 0..64u8 {
        if !f.contains(a) {
            continue;
        }
        let (src, dst) = lts
            .edges
            .iter()
            .enumerate()
            .flat_map(|(s, out)| out.iter().map(move |&(l, d)| (s as u32, l, d)))
            .find(|&(s, l, d)| l == Label::Event(a) && in_comp(s) && in_comp(d))
            .map(|(s, _, d)| (s, d))?;
        cycle.extend(path_within(cur, src));
        cycle.push((Label::Event(a), dst));
        cur = dst;
    }
    cycle.extend(path_within(cur, entry));
    if cycle.is_empty() {
        return None;
    }
    Some(Lasso { stem, cycle })
}

fn edge_allowed(l: Label, f: EventSet) -> bool {
    match l {
        Label::Tau => true,
        Label::Event(a) => f.contains(a),
        Label::Tick => false,
    }
}

/// BFS path `from → to` over edges passing `keep`; empty path when
/// `from == to`. Returns (label, target) steps.
fn bfs_path(
    lts: &Lts,
    from: u32,
    to: u32,
    keep: impl Fn(u32, Label, u32) -> bool,
) -> Option<Vec<(Label, u32)>> {
    if from == to {
        return Some(Vec::new());
    }
    let ns = lts.state_count();
    let mut prev: Vec<Option<(u32, Label)>> = vec![None; ns];
    let mut seen = vec![false; ns];
    seen[from as usize] = true;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        for &(l, d) in &lts.edges[s as usize] {
            if !keep(s, l, d) || seen[d as usize] {
                continue;
            }
            seen[d as usize] = true;
            prev[d as usize] = Some((s, l));
            if d == to {
                let mut steps = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (p, l) = prev[cur as usize].unwrap();
                    steps.push((l, cur));
                    cur = p;
                }
                steps.reverse();
                return Some(steps);
            }
            queue.push_back(d);
        }
    }
    None
}

/// Replay a lasso against the transition system: every step must be a
/// real edge, the loop must close, perform all of `f`, and avoid `c`.
pub fn check_lasso(lts: &Lts, lasso: &Lasso, f: EventSet, c: EventSet) -> bool {
    let has_edge = |s: u32, l: Label, d: u32| lts.edges[s as usize].contains(&(l, d));
    let mut cur = 0u32;
    for &(l, d) in &lasso.stem {
        if !has_edge(cur, l, d) {
            return false;
        }
        cur = d;
    }
    let entry = cur;
    let mut performed = EventSet::EMPTY;
    for &(l, d) in &lasso.cycle {
        if !has_edge(cur, l, d) {
            return false;
        }
        match l {
            Label::Event(a) if c.contains(a) => return false,
            Label::Event(a) => performed.insert(a),
            Label::Tick => return false,
            Label::Tau => {}
        }
        cur = d;
    }
    cur == entry && !lasso.cycle.is_empty() && f.bits() & !performed.bits() == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setlogic::{BddBackend, ExplicitBackend};
    use crate::syntax::{bekic_elaborate, parse};

    fn term(alphabet: &str, defs: &str) -> Term {
        let src = format!("alphabet {{{alphabet}}};\n{defs}");
        bekic_elaborate(&parse(&src).unwrap())
    }

    fn phi_members(t: &Term, n: usize) -> Vec<(u64, u64)> {
        let lts = seq_lts(t).unwrap();
        let mut be = ExplicitBackend::new(n).unwrap();
        let phi = seq_phi_explicit(&lts, &mut be).unwrap();
        be.pf_enumerate(&phi, 1 << 16)
            .unwrap()
            .into_iter()
            .map(|(u, v)| (u.bits(), v.bits()))
            .collect()
    }

    #[test]
    fn single_loop_fingerprint() {
        // μX·a→X over {a,b}: the only loop performs {a} forever.
        let t = term("a, b", "P = mu X . a -> X;\nroot P;");
        assert_eq!(phi_members(&t, 2), vec![(0b01, 0b10)]);
    }

    #[test]
    fn terminating_process_has_no_fingerprints() {
        let t = term("a", "P = a -> SKIP;\nroot P;");
        assert_eq!(phi_members(&t, 1), vec![]);
    }

    #[test]
    fn choice_of_loops_yields_both_and_their_union() {
        // μX·(a→X □ b→X): loops for {a}, {b}, and {a,b}.
        let t = term("a, b", "P = mu X . (a -> X) [] (b -> X);\nroot P;");
        assert_eq!(
            phi_members(&t, 2),
            vec![(0b01, 0b10), (0b10, 0b01), (0b11, 0b00)]
        );
    }

    #[test]
    fn prefix_events_stay_out_of_fingerprints() {
        // b happens once on the way in; only the a-loop repeats.
        let t = term("a, b", "P = mu X . b -> (mu Y . a -> Y);\nroot P;");
        assert_eq!(phi_members(&t, 2), vec![(0b01, 0b10)]);
    }

    #[test]
    fn divergent_sequential_process_is_refused() {
        let t = term("a", "P = mu X . X;\nroot P;");
        let lts = seq_lts(&t).unwrap();
        assert!(seq_delta(&lts));
        let mut be = ExplicitBackend::new(1).unwrap();
        assert!(matches!(
            seq_phi_explicit(&lts, &mut be),
            Err(SeqError::Divergent)
        ));
    }

    #[test]
    fn routes_agree_on_a_branching_process() {
        let t = term(
            "a, b, c",
            "P = mu X . (a -> X) [] (b -> ((c -> X) |~| SKIP));\nroot P;",
        );
        let lts = seq_lts(&t).unwrap();
        let mut ex = ExplicitBackend::new(3).unwrap();
        let via_scc = seq_phi_explicit(&lts, &mut ex).unwrap();
        let scc_members = ex.pf_enumerate(&via_scc, 1 << 16).unwrap();
        let via_circuit_on_explicit = seq_phi_circuit(&lts, &mut ex).unwrap();
        assert_eq!(
            ex.pf_enumerate(&via_circuit_on_explicit, 1 << 16).unwrap(),
            scc_members
        );
        let mut sy = BddBackend::new(3);
        let via_circuit = seq_phi_circuit(&lts, &mut sy).unwrap();
        assert_eq!(
            sy.pf_enumerate(&via_circuit, 1 << 16).unwrap(),
            scc_members
        );
    }

    #[test]
    fn hidden_events_leave_the_fingerprint() {
        // (μX·a→b→X)\{b}: the loop's visible trace is just a.
        let t = term("a, b", "P = (mu X . a -> b -> X) \\ {b};\nroot P;");
        assert_eq!(phi_members(&t, 2), vec![(0b01, 0b10)]);
    }

    #[test]
    fn lasso_witnesses_roundtrip() {
        let t = term(
            "a, b, c",
            "P = mu X . (a -> b -> X) [] (c -> X);\nroot P;",
        );
        let lts = seq_lts(&t).unwrap();
        let mut be = ExplicitBackend::new(3).unwrap();
        let phi = seq_phi_explicit(&lts, &mut be).unwrap();
        let members = be.pf_enumerate(&phi, 1 << 16).unwrap();
        assert!(!members.is_empty());
        for (f, c) in members {
            let lasso = witness_lasso(&lts, f).expect("member must have a lasso");
            assert!(check_lasso(&lts, &lasso, f, c));
            assert_eq!(lasso.loop_events(), f);
        }
        // And conversely: no lasso exists for a non-member.
        let non_member = EventSet::from_bits(0b110); // {b, c} — b needs a
        assert!(witness_lasso(&lts, non_member).is_none());
    }
}
