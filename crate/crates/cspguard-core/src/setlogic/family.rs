//! Families of event sets and of event-set pairs, behind a backend trait.
//!
//! Every rule of the livelock analyses evaluates to either a set of subsets
//! of Σ (a [`SetFamily`]) or a set of pairs `(U, V)` of subsets (a
//! [`PairFamily`]). The analyses are written once against
//! [`FamilyBackend`]; the explicit engine stores the family's
//! characteristic function as a bit table, the symbolic engine as a reduced
//! ordered binary decision diagram. Values remember which backend minted
//! them, so accidentally mixing engines (or two diagram stores) is an
//! error, not a wrong answer.

use thiserror::Error;

use crate::setlogic::events::{EventId, EventSet, RenamingRelation};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FamilyError {
    #[error("operands come from different backends or stores")]
    BackendMismatch,
    #[error("operands are over different alphabets")]
    AlphabetMismatch,
    #[error("operation needs {needed} elements but the cap is {cap}")]
    CapExceeded { needed: usize, cap: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BackendKind {
    Explicit,
    Symbolic,
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BackendKind::Explicit => write!(f, "explicit"),
            BackendKind::Symbolic => write!(f, "symbolic"),
        }
    }
}

/// Internal representation shared by both family kinds. `n` is |Σ|.
///
/// Explicit: bit `i` of the table is membership of the set whose bitmask is
/// `i` (for pairs, of the pair with packed index `(u << n) | v`); unused
/// high bits of the last word stay zero. Symbolic: a node in the store
/// identified by `store`, over the `y` variable slots (set families) or the
/// `x`/`y` slots (pair families).
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Repr {
    Explicit {
        n: u8,
        words: std::sync::Arc<Vec<u64>>,
    },
    Symbolic {
        n: u8,
        store: u64,
        node: u32,
    },
}

impl Repr {
    pub(crate) fn kind(&self) -> BackendKind {
        match self {
            Repr::Explicit { .. } => BackendKind::Explicit,
            Repr::Symbolic { .. } => BackendKind::Symbolic,
        }
    }
}

/// A subset of 𝒫(Σ).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamily(pub(crate) Repr);

/// A subset of 𝒫(Σ) × 𝒫(Σ); the first component is conventionally called
/// `U` (or `F`), the second `V` (or `C`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairFamily(pub(crate) Repr);

/// One engine for family algebra. All operations stay inside the engine the
/// operands were made by; binary operations check that and report
/// [`FamilyError::BackendMismatch`] / [`FamilyError::AlphabetMismatch`]
/// otherwise. Methods take `&mut self` because the symbolic engine grows
/// its node store as it computes; the explicit engine is stateless.
///
/// Closure semantics, with `U′,V′` ranging over members:
///
/// * `sf_ucl`:        `{V | V′ ∈ f ∧ V′ ⊆ V}`
/// * `sf_dcl`:        `{V | V′ ∈ f ∧ V ⊆ V′}`
/// * `pf_ucl_second`: `{(U,V) | (U,V′) ∈ f ∧ V′ ⊆ V}`
/// * `pf_udcl`:       `{(U,V) | (U′,V′) ∈ f ∧ U ⊆ U′ ∧ V′ ⊆ V}`
///
/// all of which are idempotent and extensive (contain `f`).
pub trait FamilyBackend {
    fn kind(&self) -> BackendKind;
    /// |Σ| this engine is configured for.
    fn alpha_n(&self) -> u8;

    // ----- set families -----
    fn sf_empty(&mut self) -> SetFamily;
    /// 𝒫(Σ).
    fn sf_full(&mut self) -> SetFamily;
    fn sf_singleton(&mut self, v: EventSet) -> SetFamily;
    /// `{V | a ∈ V}`.
    fn sf_with_event(&mut self, a: EventId) -> SetFamily;
    /// `{V | V ∩ avoid = ∅}`.
    fn sf_without_events(&mut self, avoid: EventSet) -> SetFamily;
    fn sf_union(&mut self, f: &SetFamily, g: &SetFamily) -> Result<SetFamily, FamilyError>;
    fn sf_intersect(&mut self, f: &SetFamily, g: &SetFamily) -> Result<SetFamily, FamilyError>;
    /// 𝒫(Σ) ∖ f.
    fn sf_complement(&mut self, f: &SetFamily) -> Result<SetFamily, FamilyError>;
    fn sf_is_empty(&mut self, f: &SetFamily) -> Result<bool, FamilyError>;
    fn sf_contains(&mut self, f: &SetFamily, v: EventSet) -> Result<bool, FamilyError>;
    fn sf_ucl(&mut self, f: &SetFamily) -> Result<SetFamily, FamilyError>;
    fn sf_dcl(&mut self, f: &SetFamily) -> Result<SetFamily, FamilyError>;
    /// `{V | V′ ∈ f ∧ V′ ∩ hidden = ∅ ∧ V′ ⊆ V}` — the hiding side
    /// condition fused with upward closure.
    fn sf_hide_close(&mut self, f: &SetFamily, hidden: EventSet) -> Result<SetFamily, FamilyError>;
    /// `{V | V′ ∈ f ∧ R(V′) ⊆ V}` — image constraint, then upward closure.
    fn sf_rename_close(
        &mut self,
        f: &SetFamily,
        r: &RenamingRelation,
    ) -> Result<SetFamily, FamilyError>;
    /// Some member, deterministically chosen (smallest bitmask).
    fn sf_witness(&mut self, f: &SetFamily) -> Result<Option<EventSet>, FamilyError>;
    /// All members, ascending by bitmask; `CapExceeded` if there are more
    /// than `cap`.
    fn sf_enumerate(&mut self, f: &SetFamily, cap: usize) -> Result<Vec<EventSet>, FamilyError>;

    // ----- pair families -----
    // Constructors are fallible: the explicit engine refuses pair tables
    // over alphabets past its cap.
    fn pf_empty(&mut self) -> Result<PairFamily, FamilyError>;
    /// 𝒫(Σ) × 𝒫(Σ).
    fn pf_full(&mut self) -> Result<PairFamily, FamilyError>;
    /// `{(U,V) | U ⊆ V}`.
    fn pf_subset_pairs(&mut self) -> Result<PairFamily, FamilyError>;
    fn pf_singleton(&mut self, u: EventSet, v: EventSet) -> Result<PairFamily, FamilyError>;
    fn pf_from_members(
        &mut self,
        members: &[(EventSet, EventSet)],
    ) -> Result<PairFamily, FamilyError>;
    fn pf_union(&mut self, f: &PairFamily, g: &PairFamily) -> Result<PairFamily, FamilyError>;
    fn pf_intersect(&mut self, f: &PairFamily, g: &PairFamily) -> Result<PairFamily, FamilyError>;
    fn pf_is_empty(&mut self, f: &PairFamily) -> Result<bool, FamilyError>;
    fn pf_contains(&mut self, f: &PairFamily, u: EventSet, v: EventSet)
        -> Result<bool, FamilyError>;
    fn pf_ucl_second(&mut self, f: &PairFamily) -> Result<PairFamily, FamilyError>;
    fn pf_udcl(&mut self, f: &PairFamily) -> Result<PairFamily, FamilyError>;
    /// `{(U,V) | (U,V′) ∈ f ∧ V′ ∩ hidden = ∅ ∧ V′ ⊆ V}`.
    fn pf_hide_close(
        &mut self,
        f: &PairFamily,
        hidden: EventSet,
    ) -> Result<PairFamily, FamilyError>;
    /// `{(U,V) | (U,V′) ∈ f ∧ R(V′) ⊆ V}`.
    fn pf_rename_close(
        &mut self,
        f: &PairFamily,
        r: &RenamingRelation,
    ) -> Result<PairFamily, FamilyError>;
    /// `{W | (W,W) ∈ f}` as a set family.
    fn pf_diag_sets(&mut self, f: &PairFamily) -> Result<SetFamily, FamilyError>;
    /// `{(U,V) | V ∈ g}` — no constraint on `U`.
    fn pf_lift_second(&mut self, g: &SetFamily) -> Result<PairFamily, FamilyError>;
    /// `{(F, Σ∖F) | F ∈ g}` — couples each set with exactly its complement.
    fn pf_couple_complement(&mut self, g: &SetFamily) -> Result<PairFamily, FamilyError>;
    /// `{(U₁∩U₂, V₁) | (U₁,V₁) ∈ f ∧ (U₂, fixed) ∈ g}` — the mixed term in
    /// the parallel rule, where `fixed` is the synchronization set.
    fn pf_par_mix(
        &mut self,
        f: &PairFamily,
        g: &PairFamily,
        fixed: EventSet,
    ) -> Result<PairFamily, FamilyError>;
    /// `{(F ∖ hidden, C ∪ hidden) | (F,C) ∈ f}` — exact image, no closure.
    fn pf_phi_hide(&mut self, f: &PairFamily, hidden: EventSet)
        -> Result<PairFamily, FamilyError>;
    /// `{(F′, C′) | (F,C) ∈ f ∧ F ⊆ R⁻¹(F′) ∧ F′ ⊆ R(F) ∧ C′ = {b | R⁻¹(b) ⊆ C}}`.
    fn pf_phi_rename(
        &mut self,
        f: &PairFamily,
        r: &RenamingRelation,
    ) -> Result<PairFamily, FamilyError>;
    /// Synchronized-merge clause of the parallel rule:
    /// `{(F₁∪F₂, C′) | (F₁,C₁) ∈ f ∧ (F₂,C₂) ∈ g ∧ (F₁∪F₂) ∩ C′ = ∅}` with
    /// `C′ = (C₁∩A) ∪ (C₂∩A) ∪ ((C₁∖A) ∩ (C₂∖A))` for sync set `A`.
    fn pf_phi_par_merge(
        &mut self,
        f: &PairFamily,
        g: &PairFamily,
        sync: EventSet,
    ) -> Result<PairFamily, FamilyError>;
    /// `{(F,C) ∈ f | F ∩ a = ∅}`.
    fn pf_first_disjoint(&mut self, f: &PairFamily, a: EventSet)
        -> Result<PairFamily, FamilyError>;
    /// `{(F,C) ∈ f | F ⊆ a}`.
    fn pf_first_subset(&mut self, f: &PairFamily, a: EventSet)
        -> Result<PairFamily, FamilyError>;
    /// Some member, deterministically chosen (smallest packed `(U,V)`
    /// index).
    fn pf_witness(&mut self, f: &PairFamily) -> Result<Option<(EventSet, EventSet)>, FamilyError>;
    /// All members, ascending by packed index; `CapExceeded` past `cap`.
    fn pf_enumerate(
        &mut self,
        f: &PairFamily,
        cap: usize,
    ) -> Result<Vec<(EventSet, EventSet)>, FamilyError>;
}

/// True iff the two families denote the same subset of 𝒫(Σ), enumerating
/// each on its own engine. Intended as the cross-backend test oracle.
pub fn backend_parity_sets(
    be_f: &mut dyn FamilyBackend,
    f: &SetFamily,
    be_g: &mut dyn FamilyBackend,
    g: &SetFamily,
    cap: usize,
) -> Result<bool, FamilyError> {
    Ok(be_f.sf_enumerate(f, cap)? == be_g.sf_enumerate(g, cap)?)
}

/// Pair-family analogue of [`backend_parity_sets`].
pub fn backend_parity_pairs(
    be_f: &mut dyn FamilyBackend,
    f: &PairFamily,
    be_g: &mut dyn FamilyBackend,
    g: &PairFamily,
    cap: usize,
) -> Result<bool, FamilyError> {
    Ok(be_f.pf_enumerate(f, cap)? == be_g.pf_enumerate(g, cap)?)
}
