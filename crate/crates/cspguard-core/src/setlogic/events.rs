//! Events, alphabets, event sets and renaming relations.
//!
//! Every analysis runs over a fixed, declared alphabet Σ. Events are small
//! integer indices into that alphabet; subsets of Σ are bitmasks. The silent
//! action τ and the termination signal ✓ are *not* events and never appear in
//! an [`EventSet`].

use std::fmt;

use thiserror::Error;

/// Index of an event in the declared alphabet.
pub type EventId = u8;

/// Hard cap on alphabet size, imposed by the bitmask representation.
pub const MAX_ALPHABET: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("event `{0}` is declared more than once")]
    DuplicateEvent(String),
    #[error("alphabet has {0} events; at most {MAX_ALPHABET} are supported")]
    TooLarge(usize),
    #[error("`{0}` is a reserved word and cannot be an event name")]
    ReservedName(String),
}

const RESERVED: &[&str] = &["alphabet", "root", "mu", "STOP", "SKIP", "DIV", "tau", "tick"];

/// The declared, ordered alphabet of a specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, AlphabetError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_ALPHABET {
            return Err(AlphabetError::TooLarge(names.len()));
        }
        for (i, n) in names.iter().enumerate() {
            if RESERVED.contains(&n.as_str()) {
                return Err(AlphabetError::ReservedName(n.clone()));
            }
            if names[..i].contains(n) {
                return Err(AlphabetError::DuplicateEvent(n.clone()));
            }
        }
        Ok(Alphabet { names })
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn id_of(&self, name: &str) -> Option<EventId> {
        self.names.iter().position(|n| n == name).map(|i| i as EventId)
    }

    pub fn name(&self, id: EventId) -> &str {
        &self.names[id as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// The full set Σ as a bitmask.
    pub fn full_set(&self) -> EventSet {
        EventSet::full(self.size())
    }

    pub fn iter_ids(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.names.len()).map(|i| i as EventId)
    }
}

/// A subset of the declared alphabet, as a bitmask over event indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EventSet(u64);

impl EventSet {
    pub const EMPTY: EventSet = EventSet(0);

    pub fn full(n: usize) -> EventSet {
        debug_assert!(n <= MAX_ALPHABET);
        if n == 64 {
            EventSet(!0)
        } else {
            EventSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(e: EventId) -> EventSet {
        EventSet(1 << e)
    }

    pub fn from_bits(bits: u64) -> EventSet {
        EventSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, e: EventId) -> bool {
        self.0 & (1 << e) != 0
    }

    pub fn insert(&mut self, e: EventId) {
        self.0 |= 1 << e;
    }

    pub fn union(self, other: EventSet) -> EventSet {
        EventSet(self.0 | other.0)
    }

    pub fn intersect(self, other: EventSet) -> EventSet {
        EventSet(self.0 & other.0)
    }

    pub fn minus(self, other: EventSet) -> EventSet {
        EventSet(self.0 & !other.0)
    }

    /// Complement within a universe of `n` events.
    pub fn complement(self, n: usize) -> EventSet {
        EventSet(!self.0).intersect(EventSet::full(n))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: EventSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: EventSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = EventId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let e = bits.trailing_zeros() as EventId;
                bits &= bits - 1;
                Some(e)
            }
        })
    }

    /// Render with event names, e.g. `{in,out}`.
    pub fn display<'a>(&self, alphabet: &'a Alphabet) -> EventSetDisplay<'a> {
        EventSetDisplay { set: *self, alphabet }
    }
}

impl FromIterator<EventId> for EventSet {
    fn from_iter<T: IntoIterator<Item = EventId>>(iter: T) -> Self {
        let mut s = EventSet::EMPTY;
        for e in iter {
            s.insert(e);
        }
        s
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

pub struct EventSetDisplay<'a> {
    set: EventSet,
    alphabet: &'a Alphabet,
}

impl fmt::Display for EventSetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.set.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.alphabet.name(e))?;
        }
        write!(f, "}}")
    }
}

/// A total binary renaming relation over Σ×Σ.
///
/// Relations are totalized at construction: every event with no declared
/// image is related to itself. The pair list is kept sorted and deduplicated
/// so relations compare structurally.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RenamingRelation {
    pairs: Vec<(EventId, EventId)>,
}

impl RenamingRelation {
    /// Build from declared pairs, totalizing over an alphabet of `n` events.
    pub fn new(declared: impl IntoIterator<Item = (EventId, EventId)>, n: usize) -> Self {
        let mut pairs: Vec<(EventId, EventId)> = declared.into_iter().collect();
        for a in 0..n as EventId {
            if !pairs.iter().any(|&(x, _)| x == a) {
                pairs.push((a, a));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        RenamingRelation { pairs }
    }

    pub fn identity(n: usize) -> Self {
        RenamingRelation::new(std::iter::empty(), n)
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.iter().all(|&(a, b)| a == b)
    }

    pub fn pairs(&self) -> &[(EventId, EventId)] {
        &self.pairs
    }

    /// R({a}) — all images of a single event.
    pub fn image_of(&self, a: EventId) -> EventSet {
        self.pairs
            .iter()
            .filter(|&&(x, _)| x == a)
            .map(|&(_, b)| b)
            .collect()
    }

    /// R(U) — the image of a set.
    pub fn image(&self, u: EventSet) -> EventSet {
        let mut out = EventSet::EMPTY;
        for &(a, b) in &self.pairs {
            if u.contains(a) {
                out.insert(b);
            }
        }
        out
    }

    /// R⁻¹({b}) — all preimages of a single event.
    pub fn preimage_of(&self, b: EventId) -> EventSet {
        self.pairs
            .iter()
            .filter(|&&(_, y)| y == b)
            .map(|&(a, _)| a)
            .collect()
    }

    /// R⁻¹(V) — the preimage of a set.
    pub fn preimage(&self, v: EventSet) -> EventSet {
        let mut out = EventSet::EMPTY;
        for &(a, b) in &self.pairs {
            if v.contains(b) {
                out.insert(a);
            }
        }
        out
    }
}

impl fmt::Debug for RenamingRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.pairs.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_rejects_duplicates_and_reserved() {
        assert!(matches!(
            Alphabet::new(["a", "b", "a"]),
            Err(AlphabetError::DuplicateEvent(_))
        ));
        assert!(matches!(
            Alphabet::new(["mu"]),
            Err(AlphabetError::ReservedName(_))
        ));
        assert!(Alphabet::new(["a", "b"]).is_ok());
    }

    #[test]
    fn event_set_basics() {
        let mut s = EventSet::EMPTY;
        s.insert(0);
        s.insert(3);
        assert!(s.contains(0) && s.contains(3) && !s.contains(1));
        assert_eq!(s.len(), 2);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3]);
        assert_eq!(s.complement(4), EventSet::from_iter([1u8, 2]));
        assert!(EventSet::full(64).contains(63));
    }

    #[test]
    fn renaming_totalizes() {
        // a -> b over {a,b}: a gets image {b}, b keeps identity.
        let r = RenamingRelation::new([(0, 1)], 2);
        assert_eq!(r.image_of(0), EventSet::singleton(1));
        assert_eq!(r.image_of(1), EventSet::singleton(1));
        assert_eq!(r.preimage_of(1), EventSet::from_iter([0u8, 1]));
        assert_eq!(r.preimage_of(0), EventSet::EMPTY);
        assert!(!r.is_identity());
        assert!(RenamingRelation::identity(3).is_identity());
    }

    #[test]
    fn image_of_set_collects_all_images() {
        // a -> {b,c}, rest identity, over {a,b,c}.
        let r = RenamingRelation::new([(0, 1), (0, 2)], 3);
        assert_eq!(r.image(EventSet::singleton(0)), EventSet::from_iter([1u8, 2]));
        assert_eq!(r.preimage(EventSet::singleton(2)), EventSet::from_iter([0u8, 2]));
    }
}
