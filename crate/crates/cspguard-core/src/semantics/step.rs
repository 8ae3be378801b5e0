//! Single-step transition relation.
//!
//! `step` enumerates the immediate transitions of a closed term in a fixed
//! structural order (left operand before right, rule order as written
//! below) with duplicates removed, so every downstream construction —
//! state numbering, witnesses, benchmark output — is deterministic.

use crate::setlogic::{Alphabet, EventId, EventSet};
use crate::syntax::Term;

/// Transition label: the silent step, a visible event, or termination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Tau,
    Event(EventId),
    Tick,
}

impl Label {
    pub fn display(self, alphabet: &Alphabet) -> String {
        match self {
            Label::Tau => "tau".to_string(),
            Label::Tick => "tick".to_string(),
            Label::Event(a) => alphabet.name(a).to_string(),
        }
    }

    pub fn is_tau(self) -> bool {
        self == Label::Tau
    }
}

/// All transitions of `t`, which must be closed.
pub fn step(t: &Term) -> Vec<(Label, Term)> {
    debug_assert!(t.is_closed(), "step requires a closed term");
    let mut out = Vec::new();
    push_steps(t, &mut out);
    let mut dedup: Vec<(Label, Term)> = Vec::with_capacity(out.len());
    for item in out {
        if !dedup.contains(&item) {
            dedup.push(item);
        }
    }
    dedup
}

fn sync_label(l: Label, interface: EventSet) -> bool {
    match l {
        Label::Tick => true, // termination always synchronises
        Label::Event(a) => interface.contains(a),
        Label::Tau => false,
    }
}

fn push_steps(t: &Term, out: &mut Vec<(Label, Term)>) {
    match t {
        Term::Stop => {}
        Term::Skip => out.push((Label::Tick, Term::Stop)),
        Term::Div => out.push((Label::Tau, Term::Div)),
        Term::Prefix(a, p) => out.push((Label::Event(*a), (**p).clone())),
        Term::IntChoice(p, q) => {
            out.push((Label::Tau, (**p).clone()));
            out.push((Label::Tau, (**q).clone()));
        }
        Term::ExtChoice(p, q) => {
            // Internal activity keeps the choice open; anything visible
            // (termination included) resolves it.
            for (l, p2) in step(p) {
                match l {
                    Label::Tau => out.push((Label::Tau, Term::ext_choice(p2, (**q).clone()))),
                    resolved => out.push((resolved, p2)),
                }
            }
            for (l, q2) in step(q) {
                match l {
                    Label::Tau => out.push((Label::Tau, Term::ext_choice((**p).clone(), q2))),
                    resolved => out.push((resolved, q2)),
                }
            }
        }
        Term::Parallel(p, interface, q) => {
            let ps = step(p);
            let qs = step(q);
            for (l, p2) in &ps {
                if !sync_label(*l, *interface) {
                    out.push((*l, Term::parallel(p2.clone(), *interface, (**q).clone())));
                }
            }
            for (l, q2) in &qs {
                if !sync_label(*l, *interface) {
                    out.push((*l, Term::parallel((**p).clone(), *interface, q2.clone())));
                }
            }
            for (lp, p2) in &ps {
                if !sync_label(*lp, *interface) {
                    continue;
                }
                for (lq, q2) in &qs {
                    if lp == lq {
                        out.push((*lp, Term::parallel(p2.clone(), *interface, q2.clone())));
                    }
                }
            }
        }
        Term::Seq(p, q) => {
            for (l, p2) in step(p) {
                match l {
                    Label::Tick => out.push((Label::Tau, (**q).clone())),
                    passed => out.push((passed, Term::seq(p2, (**q).clone()))),
                }
            }
        }
        Term::Hide(p, hidden) => {
            for (l, p2) in step(p) {
                let l2 = match l {
                    Label::Event(a) if hidden.contains(a) => Label::Tau,
                    other => other,
                };
                out.push((l2, Term::hide(p2, *hidden)));
            }
        }
        Term::Rename(p, r) => {
            for (l, p2) in step(p) {
                let target = Term::Rename(std::sync::Arc::new(p2), r.clone());
                match l {
                    Label::Event(a) => {
                        for b in r.image_of(a).iter() {
                            out.push((Label::Event(b), target.clone()));
                        }
                    }
                    other => out.push((other, target)),
                }
            }
        }
        Term::Var(_) => {
            debug_assert!(false, "step reached a free variable");
        }
        Term::Mu(x, p) => out.push((Label::Tau, p.substitute(x, t))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn prog(alphabet: &str, body: &str) -> Term {
        let src = format!("alphabet {{{alphabet}}};\nP = {body};\nroot P;");
        let spec = parse(&src).unwrap();
        crate::syntax::bekic_elaborate(&spec)
    }

    fn labels(t: &Term) -> Vec<Label> {
        step(t).into_iter().map(|(l, _)| l).collect()
    }

    #[test]
    fn prefix_skip_div_and_choices() {
        let t = prog("a, b", "a -> STOP");
        assert_eq!(labels(&t), vec![Label::Event(0)]);

        let t = prog("a", "SKIP");
        assert_eq!(step(&t), vec![(Label::Tick, Term::Stop)]);

        let t = prog("a", "DIV");
        assert_eq!(step(&t), vec![(Label::Tau, Term::Div)]);

        let t = prog("a, b", "(a -> STOP) |~| (b -> STOP)");
        assert_eq!(labels(&t), vec![Label::Tau, Label::Tau]);

        let t = prog("a, b", "(a -> STOP) [] (b -> SKIP)");
        assert_eq!(labels(&t), vec![Label::Event(0), Label::Event(1)]);
    }

    #[test]
    fn external_choice_keeps_context_under_tau() {
        let t = prog("a, b", "((a -> STOP) |~| STOP) [] (b -> STOP)");
        let steps = step(&t);
        // Two τ moves resolve the internal choice but keep `b` available,
        // plus the visible `b` resolving the outer choice.
        assert_eq!(steps.len(), 3);
        for (l, target) in &steps[..2] {
            assert_eq!(*l, Label::Tau);
            assert!(matches!(target, Term::ExtChoice(_, _)));
        }
        assert_eq!(steps[2].0, Label::Event(1));
    }

    #[test]
    fn external_choice_resolves_on_termination() {
        let t = prog("a", "SKIP [] (a -> STOP)");
        let steps = step(&t);
        assert!(steps.contains(&(Label::Tick, Term::Stop)));
    }

    #[test]
    fn parallel_sync_and_interleave() {
        // A shared event must happen jointly.
        let t = prog("a, b", "(a -> STOP) [|{a}|] (a -> b -> STOP)");
        let steps = step(&t);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0, Label::Event(0));

        // An unshared event proceeds independently on each side.
        let t = prog("a, b", "(a -> STOP) [|{b}|] (a -> STOP)");
        assert_eq!(labels(&t), vec![Label::Event(0), Label::Event(0)]);

        // A shared event one side cannot do blocks both.
        let t = prog("a, b", "(a -> STOP) [|{a}|] (b -> STOP)");
        assert_eq!(labels(&t), vec![Label::Event(1)]);
    }

    #[test]
    fn parallel_termination_synchronises() {
        let t = prog("a", "SKIP [|{}|] SKIP");
        let steps = step(&t);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0, Label::Tick);

        let t = prog("a", "SKIP [|{}|] (a -> SKIP)");
        // Only `a` is possible until both sides can terminate.
        assert_eq!(labels(&t), vec![Label::Event(0)]);
    }

    #[test]
    fn sequencing_turns_termination_into_tau() {
        let t = prog("a, b", "SKIP ; (b -> STOP)");
        let steps = step(&t);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0, Label::Tau);
        assert!(matches!(steps[0].1, Term::Prefix(1, _)));
    }

    #[test]
    fn hiding_and_renaming_relabel() {
        let t = prog("a, b", "(a -> STOP) \\ {a}");
        let steps = step(&t);
        assert_eq!(steps[0].0, Label::Tau);

        let t = prog("a, b", "(a -> STOP) [[a <- a, a <- b]]");
        assert_eq!(labels(&t), vec![Label::Event(0), Label::Event(1)]);
    }

    #[test]
    fn mu_unfolds_silently() {
        let t = prog("a", "mu X . a -> X");
        let steps = step(&t);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0, Label::Tau);
        // The unfolding exposes the prefix guarding the recursion.
        assert!(matches!(steps[0].1, Term::Prefix(0, _)));
    }
}
