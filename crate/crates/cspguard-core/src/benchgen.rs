//! Generators for the scalable benchmark families.
//!
//! Each generator builds a [`Spec`] exactly as the parser would have,
//! so the result can be analysed, printed back to source, or dumped.
//! All families are livelock-free by construction and stress different
//! parts of the analysis: long synchronization chains (`milner`), wide
//! synchronization cliques (`philosophers`), deep hiding chains
//! (`abp-pipe`), and pure interleaving width (`abp-interleave`).

use crate::setlogic::{Alphabet, EventId, EventSet};
use crate::syntax::{Spec, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Milner's cyclic scheduler: n cells pass a token around a ring,
    /// each starting and finishing a task per round; token passes hidden.
    Milner,
    /// n dining philosophers and their forks; fork handling hidden,
    /// thinking and eating visible.
    Philosophers,
    /// n lossy-but-fair message stages in series; inter-stage links and
    /// per-stage retries hidden.
    AbpPipe,
    /// n independent lossy-but-fair channels side by side.
    AbpInterleave,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Milner,
        Family::Philosophers,
        Family::AbpPipe,
        Family::AbpInterleave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Milner => "milner",
            Family::Philosophers => "philosophers",
            Family::AbpPipe => "abp-pipe",
            Family::AbpInterleave => "abp-interleave",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::ALL.iter().copied().find(|f| f.name() == s)
    }

    /// Events used by an instance of size n.
    pub fn event_count(self, n: usize) -> usize {
        match self {
            Family::Milner => 3 * n,
            Family::Philosophers => 6 * n,
            Family::AbpPipe => 2 * n + 1,
            Family::AbpInterleave => 3 * n,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GenError {
    #[error("instance size must be at least 1")]
    ZeroSize,
    #[error("{family} of size {n} needs {events} events; at most 64 are supported")]
    TooManyEvents {
        family: &'static str,
        n: usize,
        events: usize,
    },
}

pub fn generate(family: Family, n: usize) -> Result<Spec, GenError> {
    if n == 0 {
        return Err(GenError::ZeroSize);
    }
    let events = family.event_count(n);
    if events > 64 {
        return Err(GenError::TooManyEvents {
            family: family.name(),
            n,
            events,
        });
    }
    Ok(match family {
        Family::Milner => milner(n),
        Family::Philosophers => philosophers(n),
        Family::AbpPipe => abp_pipe(n),
        Family::AbpInterleave => abp_interleave(n),
    })
}

/// a₁ → a₂ → … → tail
fn chain(events: &[EventId], tail: Term) -> Term {
    events
        .iter()
        .rev()
        .fold(tail, |acc, &e| Term::prefix(e, acc))
}

fn set(events: &[EventId]) -> EventSet {
    let mut s = EventSet::EMPTY;
    for &e in events {
        s.insert(e);
    }
    s
}

/// Right-associated parallel composition; `iface(i)` is the interface
/// between operand i and the composition of everything to its right.
fn par_chain(mut operands: Vec<Term>, iface: impl Fn(usize) -> EventSet) -> Term {
    let mut acc = operands.pop().expect("at least one operand");
    while let Some(op) = operands.pop() {
        acc = Term::parallel(op, iface(operands.len()), acc);
    }
    acc
}

fn spec(alphabet: Alphabet, equations: Vec<(String, Term)>, root: &str) -> Spec {
    Spec {
        alphabet,
        equations,
        root: root.to_string(),
        options: Default::default(),
    }
}

fn milner(n: usize) -> Spec {
    // ids: start_i = i, finish_i = n+i, pass_i = 2n+i
    let start = |i: usize| i as EventId;
    let finish = |i: usize| (n + i) as EventId;
    let pass = |i: usize| (2 * n + i) as EventId;
    let names = (0..n)
        .map(|i| format!("start_{i}"))
        .chain((0..n).map(|i| format!("finish_{i}")))
        .chain((0..n).map(|i| format!("pass_{i}")))
        .collect::<Vec<_>>();
    let alphabet = Alphabet::new(names).expect("within alphabet bound");

    let mut equations = Vec::new();
    for i in 0..n {
        let next = (i + 1) % n;
        // Cell_i = pass_i → start_i → pass_{i+1} → finish_i → Cell_i
        let cell = chain(
            &[pass(i), start(i), pass(next), finish(i)],
            Term::var(format!("Cell_{i}")),
        );
        equations.push((format!("Cell_{i}"), cell));
    }
    // Cell 0 holds the token initially: one round ahead of its loop.
    equations.push((
        "Head".to_string(),
        chain(&[start(0), pass(1 % n), finish(0)], Term::var("Cell_0")),
    ));

    let mut operands = vec![Term::var("Head")];
    operands.extend((1..n).map(|i| Term::var(format!("Cell_{i}"))));
    // Operand i talks to the rest of the ring via pass_{i+1}; the ring
    // closes through pass_0 back to the head.
    let ring = par_chain(operands, |i| {
        if i == 0 {
            set(&[pass(0), pass(1 % n)])
        } else {
            set(&[pass((i + 1) % n)])
        }
    });
    let hidden = set(&(0..n).map(pass).collect::<Vec<_>>());
    equations.push(("Ring".to_string(), Term::hide(ring, hidden)));
    spec(alphabet, equations, "Ring")
}

fn philosophers(n: usize) -> Spec {
    // ids per philosopher i: thinks, eats, then the four fork moves.
    let thinks = |i: usize| (6 * i) as EventId;
    let eats = |i: usize| (6 * i + 1) as EventId;
    let take_own = |i: usize| (6 * i + 2) as EventId; // picks up fork i
    let take_right = |i: usize| (6 * i + 3) as EventId; // picks up fork i+1
    let drop_own = |i: usize| (6 * i + 4) as EventId;
    let drop_right = |i: usize| (6 * i + 5) as EventId;
    let names = (0..n)
        .flat_map(|i| {
            let r = (i + 1) % n;
            [
                format!("thinks_{i}"),
                format!("eats_{i}"),
                format!("picksup_{i}_{i}"),
                format!("picksup_{i}_{r}"),
                format!("putsdown_{i}_{i}"),
                format!("putsdown_{i}_{r}"),
            ]
        })
        .collect::<Vec<_>>();
    let alphabet = Alphabet::new(names).expect("within alphabet bound");

    let mut equations = Vec::new();
    for i in 0..n {
        let phil = chain(
            &[
                thinks(i),
                take_own(i),
                take_right(i),
                eats(i),
                drop_own(i),
                drop_right(i),
            ],
            Term::var(format!("Phil_{i}")),
        );
        equations.push((format!("Phil_{i}"), phil));
    }
    for j in 0..n {
        // Fork j serves philosopher j (as own fork) and philosopher j−1
        // (as right fork).
        let left = (j + n - 1) % n;
        let own = chain(&[take_own(j), drop_own(j)], Term::var(format!("Fork_{j}")));
        let other = chain(
            &[take_right(left), drop_right(left)],
            Term::var(format!("Fork_{j}")),
        );
        equations.push((format!("Fork_{j}"), Term::ext_choice(own, other)));
    }

    let phils = par_chain(
        (0..n).map(|i| Term::var(format!("Phil_{i}"))).collect(),
        |_| EventSet::EMPTY,
    );
    let forks = par_chain(
        (0..n).map(|j| Term::var(format!("Fork_{j}"))).collect(),
        |_| EventSet::EMPTY,
    );
    let fork_moves = set(&(0..n)
        .flat_map(|i| [take_own(i), take_right(i), drop_own(i), drop_right(i)])
        .collect::<Vec<_>>());
    equations.push((
        "College".to_string(),
        Term::hide(Term::parallel(phils, fork_moves, forks), fork_moves),
    ));
    spec(alphabet, equations, "College")
}

/// One lossy-but-fair relay: accepts on `input`, delivers on `output`,
/// retrying internal `retry` failures, with the fairness process bounding
/// consecutive failures.
fn relay(input: EventId, output: EventId, retry: EventId, tag: usize) -> Vec<(String, Term)> {
    let send = format!("Send_{tag}");
    let medium = format!("Medium_{tag}");
    let fair = format!("Fair_{tag}");
    vec![
        (send.clone(), Term::prefix(input, Term::var(&medium))),
        (
            medium.clone(),
            Term::ext_choice(
                Term::prefix(output, Term::var(&send)),
                Term::prefix(retry, Term::var(&medium)),
            ),
        ),
        (
            fair.clone(),
            Term::ext_choice(
                Term::prefix(output, Term::var(&fair)),
                Term::prefix(retry, Term::prefix(output, Term::var(&fair))),
            ),
        ),
    ]
}

fn relay_term(output: EventId, retry: EventId, tag: usize) -> Term {
    Term::hide(
        Term::parallel(
            Term::var(format!("Send_{tag}")),
            set(&[output, retry]),
            Term::var(format!("Fair_{tag}")),
        ),
        set(&[retry]),
    )
}

fn abp_pipe(n: usize) -> Spec {
    // ids: link_i = i (0..=n), retry_i = n+1+i
    let link = |i: usize| i as EventId;
    let retry = |i: usize| (n + 1 + i) as EventId;
    let names = (0..=n)
        .map(|i| format!("link_{i}"))
        .chain((0..n).map(|i| format!("retry_{i}")))
        .collect::<Vec<_>>();
    let alphabet = Alphabet::new(names).expect("within alphabet bound");

    let mut equations = Vec::new();
    for i in 0..n {
        equations.extend(relay(link(i), link(i + 1), retry(i), i));
        equations.push((format!("Stage_{i}"), relay_term(link(i + 1), retry(i), i)));
    }
    let pipe = par_chain(
        (0..n).map(|i| Term::var(format!("Stage_{i}"))).collect(),
        |i| set(&[link(i + 1)]),
    );
    let internal = set(&(1..n).map(link).collect::<Vec<_>>());
    equations.push(("Pipe".to_string(), Term::hide(pipe, internal)));
    spec(alphabet, equations, "Pipe")
}

fn abp_interleave(n: usize) -> Spec {
    // ids per channel i: accept, deliver, retry.
    let accept = |i: usize| (3 * i) as EventId;
    let deliver = |i: usize| (3 * i + 1) as EventId;
    let retry = |i: usize| (3 * i + 2) as EventId;
    let names = (0..n)
        .flat_map(|i| {
            [
                format!("accept_{i}"),
                format!("deliver_{i}"),
                format!("retry_{i}"),
            ]
        })
        .collect::<Vec<_>>();
    let alphabet = Alphabet::new(names).expect("within alphabet bound");

    let mut equations = Vec::new();
    for i in 0..n {
        equations.extend(relay(accept(i), deliver(i), retry(i), i));
        equations.push((
            format!("Channel_{i}"),
            relay_term(deliver(i), retry(i), i),
        ));
    }
    let bank = par_chain(
        (0..n)
            .map(|i| Term::var(format!("Channel_{i}")))
            .collect(),
        |_| EventSet::EMPTY,
    );
    equations.push(("Bank".to_string(), bank));
    spec(alphabet, equations, "Bank")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{bekic_elaborate, classify, print_spec, ProcessClass};

    #[test]
    fn all_families_elaborate_and_classify_sfs() {
        for family in Family::ALL {
            for n in 1..=3 {
                let spec = generate(family, n).unwrap();
                assert_eq!(spec.alphabet.size(), family.event_count(n));
                let t = bekic_elaborate(&spec);
                assert_eq!(
                    classify(&t),
                    Ok(ProcessClass::Sfs),
                    "{} size {n}",
                    family.name()
                );
            }
        }
    }

    #[test]
    fn generated_specs_print_and_reparse() {
        for family in Family::ALL {
            let spec = generate(family, 2).unwrap();
            let text = print_spec(&spec);
            let back = crate::syntax::parse(&text).unwrap();
            assert_eq!(
                bekic_elaborate(&back),
                bekic_elaborate(&spec),
                "{}",
                family.name()
            );
        }
    }

    #[test]
    fn size_limits_are_enforced() {
        assert_eq!(generate(Family::Milner, 0), Err(GenError::ZeroSize));
        assert!(matches!(
            generate(Family::Milner, 22),
            Err(GenError::TooManyEvents { events: 66, .. })
        ));
        assert!(generate(Family::Milner, 21).is_ok());
    }
}
