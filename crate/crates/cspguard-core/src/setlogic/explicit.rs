//! Explicit-state family engine.
//!
//! A family is stored as the bit table of its characteristic function: bit
//! `i` of a set family says whether the set with bitmask `i` is a member;
//! bit `(u << n) | v` of a pair family covers the pair `(U,V)` with masks
//! `u`, `v`. Closure operators become butterfly passes over the table (one
//! masked shift-or per bit dimension), so `ucl`/`dcl`/`udcl` cost
//! `O(n·2ⁿ)` bit operations regardless of how many members the family has.
//!
//! Tables are exact and fast at small alphabets but square in size for pair
//! families, so construction is capped at |Σ| ≤ 16 and pair operations at
//! |Σ| ≤ 13 (an 8 MiB table); the symbolic engine covers everything
//! larger. A few operations (`pf_rename_close`, `pf_par_mix`, and the
//! Φ-specific ops) walk members rather than words and are meant for the
//! small alphabets this engine targets.

use std::sync::Arc;

use crate::setlogic::events::{EventId, EventSet, RenamingRelation};
use crate::setlogic::family::{
    BackendKind, FamilyBackend, FamilyError, PairFamily, Repr, SetFamily,
};

/// Largest |Σ| a set-family table may have (2¹⁶ bits = 8 KiB).
pub const SET_ALPHABET_CAP: usize = 16;
/// Largest |Σ| a pair-family table may have (4¹³ bits = 8 MiB).
pub const PAIR_ALPHABET_CAP: usize = 13;
/// Member-walking operations refuse families bigger than this.
const MEMBER_WALK_CAP: usize = 1 << 22;

/// In-word masks: `LOW_PATTERN[d]` has bit `j` set iff bit `d` of `j` is 0.
const LOW_PATTERN: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

pub struct ExplicitBackend {
    n: u8,
}

impl ExplicitBackend {
    pub fn new(alphabet_size: usize) -> Result<Self, FamilyError> {
        if alphabet_size > SET_ALPHABET_CAP {
            return Err(FamilyError::CapExceeded {
                needed: alphabet_size,
                cap: SET_ALPHABET_CAP,
            });
        }
        Ok(ExplicitBackend {
            n: alphabet_size as u8,
        })
    }

    fn set_dims(&self) -> u32 {
        self.n as u32
    }

    fn pair_dims(&self) -> Result<u32, FamilyError> {
        if self.n as usize > PAIR_ALPHABET_CAP {
            return Err(FamilyError::CapExceeded {
                needed: self.n as usize,
                cap: PAIR_ALPHABET_CAP,
            });
        }
        Ok(2 * self.n as u32)
    }

    fn unwrap_set<'a>(&self, f: &'a SetFamily) -> Result<&'a [u64], FamilyError> {
        match &f.0 {
            Repr::Explicit { n, words } if *n == self.n => Ok(words),
            Repr::Explicit { .. } => Err(FamilyError::AlphabetMismatch),
            Repr::Symbolic { .. } => Err(FamilyError::BackendMismatch),
        }
    }

    fn unwrap_pair<'a>(&self, f: &'a PairFamily) -> Result<&'a [u64], FamilyError> {
        match &f.0 {
            Repr::Explicit { n, words } if *n == self.n => Ok(words),
            Repr::Explicit { .. } => Err(FamilyError::AlphabetMismatch),
            Repr::Symbolic { .. } => Err(FamilyError::BackendMismatch),
        }
    }

    fn mk_set(&self, words: Vec<u64>) -> SetFamily {
        debug_assert_eq!(words.len(), word_len(self.set_dims()));
        SetFamily(Repr::Explicit {
            n: self.n,
            words: Arc::new(words),
        })
    }

    fn mk_pair(&self, words: Vec<u64>) -> PairFamily {
        PairFamily(Repr::Explicit {
            n: self.n,
            words: Arc::new(words),
        })
    }

    /// Indices of all set bits, erroring out past `cap`.
    fn member_indices(words: &[u64], cap: usize) -> Result<Vec<usize>, FamilyError> {
        let mut out = Vec::new();
        for (wi, &w) in words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                if out.len() >= cap {
                    return Err(FamilyError::CapExceeded {
                        needed: out.len() + 1,
                        cap,
                    });
                }
                out.push(wi * 64 + b);
                w &= w - 1;
            }
        }
        Ok(out)
    }
}

fn word_len(dims: u32) -> usize {
    let bits = 1usize << dims;
    bits.div_ceil(64)
}

/// Zero out the table bits beyond the universe (only relevant when the
/// universe is smaller than one word).
fn universe_mask(dims: u32) -> u64 {
    let bits = 1usize << dims;
    if bits >= 64 {
        !0
    } else {
        (1u64 << bits) - 1
    }
}

fn empty_table(dims: u32) -> Vec<u64> {
    vec![0; word_len(dims)]
}

fn full_table(dims: u32) -> Vec<u64> {
    let mut words = vec![!0u64; word_len(dims)];
    *words.last_mut().expect("tables are non-empty") = universe_mask(dims);
    words
}

fn get_bit(words: &[u64], idx: usize) -> bool {
    (words[idx / 64] >> (idx % 64)) & 1 == 1
}

fn set_bit(words: &mut [u64], idx: usize) {
    words[idx / 64] |= 1 << (idx % 64);
}

/// The 64-bit slice, at word `word_idx`, of the mask "bit dimension `dim`
/// is set in the index".
fn dim_mask_word(dim: u32, word_idx: usize) -> u64 {
    if dim < 6 {
        !LOW_PATTERN[dim as usize]
    } else if (word_idx >> (dim - 6)) & 1 == 1 {
        !0
    } else {
        0
    }
}

/// `table[idx | 1<<d] |= table[idx]` for every idx with bit `d` clear —
/// one step of closing upward along dimension `d`.
fn or_up_dim(words: &mut [u64], d: u32) {
    if d < 6 {
        let shift = 1u32 << d;
        let keep = LOW_PATTERN[d as usize];
        for w in words.iter_mut() {
            *w |= (*w & keep) << shift;
        }
    } else {
        let stride = 1usize << (d - 6);
        let mut base = 0;
        while base < words.len() {
            for j in 0..stride {
                words[base + stride + j] |= words[base + j];
            }
            base += 2 * stride;
        }
    }
}

/// `table[idx & !(1<<d)] |= table[idx]` — closing downward along `d`.
fn or_down_dim(words: &mut [u64], d: u32) {
    if d < 6 {
        let shift = 1u32 << d;
        let keep = LOW_PATTERN[d as usize];
        for w in words.iter_mut() {
            *w |= (*w >> shift) & keep;
        }
    } else {
        let stride = 1usize << (d - 6);
        let mut base = 0;
        while base < words.len() {
            for j in 0..stride {
                words[base + j] |= words[base + stride + j];
            }
            base += 2 * stride;
        }
    }
}

fn or_up_dims(words: &mut [u64], dims: std::ops::Range<u32>) {
    for d in dims {
        or_up_dim(words, d);
    }
}

fn or_down_dims(words: &mut [u64], dims: std::ops::Range<u32>) {
    for d in dims {
        or_down_dim(words, d);
    }
}

/// Clear every index whose dimension `dim` is set.
fn clear_dim(words: &mut [u64], dim: u32) {
    for (wi, w) in words.iter_mut().enumerate() {
        *w &= !dim_mask_word(dim, wi);
    }
}

/// Keep only indices whose dimension `dim` is set.
fn require_dim(words: &mut [u64], dim: u32) {
    for (wi, w) in words.iter_mut().enumerate() {
        *w &= dim_mask_word(dim, wi);
    }
}

impl FamilyBackend for ExplicitBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Explicit
    }

    fn alpha_n(&self) -> u8 {
        self.n
    }

    fn sf_empty(&mut self) -> SetFamily {
        self.mk_set(empty_table(self.set_dims()))
    }

    fn sf_full(&mut self) -> SetFamily {
        self.mk_set(full_table(self.set_dims()))
    }

    fn sf_singleton(&mut self, v: EventSet) -> SetFamily {
        let mut words = empty_table(self.set_dims());
        set_bit(&mut words, v.bits() as usize);
        self.mk_set(words)
    }

    fn sf_with_event(&mut self, a: EventId) -> SetFamily {
        let mut words = full_table(self.set_dims());
        require_dim(&mut words, a as u32);
        self.mk_set(words)
    }

    fn sf_without_events(&mut self, avoid: EventSet) -> SetFamily {
        let mut words = full_table(self.set_dims());
        for a in avoid.iter() {
            clear_dim(&mut words, a as u32);
        }
        self.mk_set(words)
    }

    fn sf_union(&mut self, f: &SetFamily, g: &SetFamily) -> Result<SetFamily, FamilyError> {
        let (fw, gw) = (self.unwrap_set(f)?, self.unwrap_set(g)?);
        Ok(self.mk_set(fw.iter().zip(gw).map(|(a, b)| a | b).collect()))
    }

    fn sf_intersect(&mut self, f: &SetFamily, g: &SetFamily) -> Result<SetFamily, FamilyError> {
        let (fw, gw) = (self.unwrap_set(f)?, self.unwrap_set(g)?);
        Ok(self.mk_set(fw.iter().zip(gw).map(|(a, b)| a & b).collect()))
    }

    fn sf_complement(&mut self, f: &SetFamily) -> Result<SetFamily, FamilyError> {
        let fw = self.unwrap_set(f)?;
        let mask = universe_mask(self.set_dims());
        let mut words: Vec<u64> = fw.iter().map(|a| !a).collect();
        *words.last_mut().expect("non-empty") &= mask;
        Ok(self.mk_set(words))
    }

    fn sf_is_empty(&mut self, f: &SetFamily) -> Result<bool, FamilyError> {
        Ok(self.unwrap_set(f)?.iter().all(|&w| w == 0))
    }

    fn sf_contains(&mut self, f: &SetFamily, v: EventSet) -> Result<bool, FamilyError> {
        Ok(get_bit(self.unwrap_set(f)?, v.bits() as usize))
    }

    fn sf_ucl(&mut self, f: &SetFamily) -> Result<SetFamily, FamilyError> {
        let mut words = self.unwrap_set(f)?.to_vec();
        or_up_dims(&mut words, 0..self.set_dims());
        Ok(self.mk_set(words))
    }

    fn sf_dcl(&mut self, f: &SetFamily) -> Result<SetFamily, FamilyError> {
        let mut words = self.unwrap_set(f)?.to_vec();
        or_down_dims(&mut words, 0..self.set_dims());
        Ok(self.mk_set(words))
    }

    fn sf_hide_close(&mut self, f: &SetFamily, hidden: EventSet) -> Result<SetFamily, FamilyError> {
        let mut words = self.unwrap_set(f)?.to_vec();
        for a in hidden.iter() {
            clear_dim(&mut words, a as u32);
        }
        or_up_dims(&mut words, 0..self.set_dims());
        Ok(self.mk_set(words))
    }

    fn sf_rename_close(
        &mut self,
        f: &SetFamily,
        r: &RenamingRelation,
    ) -> Result<SetFamily, FamilyError> {
        let fw = self.unwrap_set(f)?;
        let mut words = empty_table(self.set_dims());
        for idx in ExplicitBackend::member_indices(fw, MEMBER_WALK_CAP)? {
            let image = r.image(EventSet::from_bits(idx as u64));
            set_bit(&mut words, image.bits() as usize);
        }
        or_up_dims(&mut words, 0..self.set_dims());
        Ok(self.mk_set(words))
    }

    fn sf_witness(&mut self, f: &SetFamily) -> Result<Option<EventSet>, FamilyError> {
        let fw = self.unwrap_set(f)?;
        for (wi, &w) in fw.iter().enumerate() {
            if w != 0 {
                let idx = wi * 64 + w.trailing_zeros() as usize;
                return Ok(Some(EventSet::from_bits(idx as u64)));
            }
        }
        Ok(None)
    }

    fn sf_enumerate(&mut self, f: &SetFamily, cap: usize) -> Result<Vec<EventSet>, FamilyError> {
        let fw = self.unwrap_set(f)?;
        Ok(ExplicitBackend::member_indices(fw, cap)?
            .into_iter()
            .map(|i| EventSet::from_bits(i as u64))
            .collect())
    }

    fn pf_empty(&mut self) -> Result<PairFamily, FamilyError> {
        Ok(self.mk_pair(empty_table(self.pair_dims()?)))
    }

    fn pf_full(&mut self) -> Result<PairFamily, FamilyError> {
        Ok(self.mk_pair(full_table(self.pair_dims()?)))
    }

    fn pf_subset_pairs(&mut self) -> Result<PairFamily, FamilyError> {
        // Start from everything, delete pairs with a ∈ U ∖ V, per event.
        let dims = self.pair_dims()?;
        let n = self.set_dims();
        let mut words = full_table(dims);
        for a in 0..n {
            for (wi, w) in words.iter_mut().enumerate() {
                *w &= !(dim_mask_word(n + a, wi) & !dim_mask_word(a, wi));
            }
        }
        Ok(self.mk_pair(words))
    }

    fn pf_singleton(&mut self, u: EventSet, v: EventSet) -> Result<PairFamily, FamilyError> {
        let mut words = empty_table(self.pair_dims()?);
        set_bit(&mut words, pack(self.n, u, v));
        Ok(self.mk_pair(words))
    }

    fn pf_from_members(
        &mut self,
        members: &[(EventSet, EventSet)],
    ) -> Result<PairFamily, FamilyError> {
        let mut words = empty_table(self.pair_dims()?);
        for &(u, v) in members {
            set_bit(&mut words, pack(self.n, u, v));
        }
        Ok(self.mk_pair(words))
    }

    fn pf_union(&mut self, f: &PairFamily, g: &PairFamily) -> Result<PairFamily, FamilyError> {
        let (fw, gw) = (self.unwrap_pair(f)?, self.unwrap_pair(g)?);
        Ok(self.mk_pair(fw.iter().zip(gw).map(|(a, b)| a | b).collect()))
    }

    fn pf_intersect(&mut self, f: &PairFamily, g: &PairFamily) -> Result<PairFamily, FamilyError> {
        let (fw, gw) = (self.unwrap_pair(f)?, self.unwrap_pair(g)?);
        Ok(self.mk_pair(fw.iter().zip(gw).map(|(a, b)| a & b).collect()))
    }

    fn pf_is_empty(&mut self, f: &PairFamily) -> Result<bool, FamilyError> {
        Ok(self.unwrap_pair(f)?.iter().all(|&w| w == 0))
    }

    fn pf_contains(
        &mut self,
        f: &PairFamily,
        u: EventSet,
        v: EventSet,
    ) -> Result<bool, FamilyError> {
        Ok(get_bit(self.unwrap_pair(f)?, pack(self.n, u, v)))
    }

    fn pf_ucl_second(&mut self, f: &PairFamily) -> Result<PairFamily, FamilyError> {
        let mut words = self.unwrap_pair(f)?.to_vec();
        or_up_dims(&mut words, 0..self.set_dims());
        Ok(self.mk_pair(words))
    }

    fn pf_udcl(&mut self, f: &PairFamily) -> Result<PairFamily, FamilyError> {
        let mut words = self.unwrap_pair(f)?.to_vec();
        let n = self.set_dims();
        or_up_dims(&mut words, 0..n);
        or_down_dims(&mut words, n..2 * n);
        Ok(self.mk_pair(words))
    }

    fn pf_hide_close(
        &mut self,
        f: &PairFamily,
        hidden: EventSet,
    ) -> Result<PairFamily, FamilyError> {
        let mut words = self.unwrap_pair(f)?.to_vec();
        for a in hidden.iter() {
            clear_dim(&mut words, a as u32);
        }
        or_up_dims(&mut words, 0..self.set_dims());
        Ok(self.mk_pair(words))
    }

    fn pf_rename_close(
        &mut self,
        f: &PairFamily,
        r: &RenamingRelation,
    ) -> Result<PairFamily, FamilyError> {
        let fw = self.unwrap_pair(f)?;
        let n = self.n as u32;
        let vmask = (1usize << n) - 1;
        // Image lookup per possible V′ — the scan below hits each member.
        let mut image: Vec<usize> = Vec::with_capacity(1 << n);
        for v in 0..(1usize << n) {
            image.push(r.image(EventSet::from_bits(v as u64)).bits() as usize);
        }
        let mut words = empty_table(2 * n);
        for idx in ExplicitBackend::member_indices(fw, MEMBER_WALK_CAP)? {
            let (u, v) = (idx >> n, idx & vmask);
            set_bit(&mut words, (u << n) | image[v]);
        }
        or_up_dims(&mut words, 0..n);
        Ok(self.mk_pair(words))
    }

    fn pf_diag_sets(&mut self, f: &PairFamily) -> Result<SetFamily, FamilyError> {
        let fw = self.unwrap_pair(f)?;
        let n = self.set_dims();
        let mut words = empty_table(n);
        for w in 0..(1usize << n) {
            if get_bit(fw, (w << n) | w) {
                set_bit(&mut words, w);
            }
        }
        Ok(self.mk_set(words))
    }

    fn pf_lift_second(&mut self, g: &SetFamily) -> Result<PairFamily, FamilyError> {
        let gw = self.unwrap_set(g)?;
        let dims = self.pair_dims()?;
        let n = self.set_dims();
        let mut words = empty_table(dims);
        if n >= 6 {
            let row_words = 1usize << (n - 6);
            for u in 0..(1usize << n) {
                words[u * row_words..(u + 1) * row_words].copy_from_slice(gw);
            }
        } else {
            let row = gw[0] & universe_mask(n);
            let rows_per_word = 64 >> n;
            let mut pattern = 0u64;
            for i in 0..rows_per_word {
                pattern |= row << (i * (1 << n));
            }
            let full_words = (1usize << (2 * n)) / 64;
            if full_words == 0 {
                words[0] = pattern & universe_mask(dims);
            } else {
                for w in words.iter_mut() {
                    *w = pattern;
                }
            }
        }
        Ok(self.mk_pair(words))
    }

    fn pf_couple_complement(&mut self, g: &SetFamily) -> Result<PairFamily, FamilyError> {
        let gw = self.unwrap_set(g)?;
        let dims = self.pair_dims()?;
        let full = EventSet::full(self.n as usize);
        let mut words = empty_table(dims);
        for idx in ExplicitBackend::member_indices(gw, MEMBER_WALK_CAP)? {
            let f = EventSet::from_bits(idx as u64);
            set_bit(&mut words, pack(self.n, f, full.minus(f)));
        }
        Ok(self.mk_pair(words))
    }

    fn pf_par_mix(
        &mut self,
        f: &PairFamily,
        g: &PairFamily,
        fixed: EventSet,
    ) -> Result<PairFamily, FamilyError> {
        let fw = self.unwrap_pair(f)?.to_vec();
        let gw = self.unwrap_pair(g)?;
        let n = self.set_dims();
        let fixed_bits = fixed.bits() as usize;
        let mut words = empty_table(2 * n);
        for u2 in 0..(1usize << n) {
            if !get_bit(gw, (u2 << n) | fixed_bits) {
                continue;
            }
            if n >= 6 {
                let row_words = 1usize << (n - 6);
                for u1 in 0..(1usize << n) {
                    let dst = (u1 & u2) * row_words;
                    let src = u1 * row_words;
                    for j in 0..row_words {
                        words[dst + j] |= fw[src + j];
                    }
                }
            } else {
                let row_mask = universe_mask(n);
                for u1 in 0..(1usize << n) {
                    let src_idx = u1 << n;
                    let src_row = (fw[src_idx / 64] >> (src_idx % 64)) & row_mask;
                    let dst_idx = (u1 & u2) << n;
                    words[dst_idx / 64] |= src_row << (dst_idx % 64);
                }
            }
        }
        Ok(self.mk_pair(words))
    }

    fn pf_phi_hide(
        &mut self,
        f: &PairFamily,
        hidden: EventSet,
    ) -> Result<PairFamily, FamilyError> {
        let fw = self.unwrap_pair(f)?;
        let n = self.n;
        let vmask = (1u64 << n) - 1;
        let mut words = empty_table(self.pair_dims()?);
        for idx in ExplicitBackend::member_indices(fw, MEMBER_WALK_CAP)? {
            let fst = EventSet::from_bits((idx as u64 >> n) & vmask).minus(hidden);
            let snd = EventSet::from_bits(idx as u64 & vmask).union(hidden);
            set_bit(&mut words, pack(n, fst, snd));
        }
        Ok(self.mk_pair(words))
    }

    fn pf_phi_rename(
        &mut self,
        f: &PairFamily,
        r: &RenamingRelation,
    ) -> Result<PairFamily, FamilyError> {
        let fw = self.unwrap_pair(f)?;
        let n = self.n;
        let vmask = (1u64 << n) - 1;
        // {b | R⁻¹(b) ⊆ C} per C is recomputed per member; members are few.
        let mut words = empty_table(self.pair_dims()?);
        for idx in ExplicitBackend::member_indices(fw, MEMBER_WALK_CAP)? {
            let fst = EventSet::from_bits((idx as u64 >> n) & vmask);
            let snd = EventSet::from_bits(idx as u64 & vmask);
            let mut c_new = EventSet::EMPTY;
            for b in 0..n {
                if r.preimage_of(b).is_subset(snd) {
                    c_new.insert(b);
                }
            }
            // All F′ ⊆ R(F) whose preimages still cover F: enumerate
            // subsets of the image and keep the covering ones.
            let image: Vec<EventId> = r.image(fst).iter().collect();
            for choice in 0..(1u64 << image.len()) {
                let mut f_new = EventSet::EMPTY;
                for (i, &b) in image.iter().enumerate() {
                    if (choice >> i) & 1 == 1 {
                        f_new.insert(b);
                    }
                }
                if fst.iter().all(|a| r.image_of(a).intersects(f_new)) {
                    set_bit(&mut words, pack(n, f_new, c_new));
                }
            }
        }
        Ok(self.mk_pair(words))
    }

    fn pf_phi_par_merge(
        &mut self,
        f: &PairFamily,
        g: &PairFamily,
        sync: EventSet,
    ) -> Result<PairFamily, FamilyError> {
        let fw = self.unwrap_pair(f)?;
        let gw = self.unwrap_pair(g)?;
        let n = self.n;
        let vmask = (1u64 << n) - 1;
        let unpack = |idx: usize| {
            (
                EventSet::from_bits((idx as u64 >> n) & vmask),
                EventSet::from_bits(idx as u64 & vmask),
            )
        };
        let f_members = ExplicitBackend::member_indices(fw, MEMBER_WALK_CAP)?;
        let g_members = ExplicitBackend::member_indices(gw, MEMBER_WALK_CAP)?;
        let mut words = empty_table(self.pair_dims()?);
        for &fi in &f_members {
            let (f1, c1) = unpack(fi);
            for &gi in &g_members {
                let (f2, c2) = unpack(gi);
                let fst = f1.union(f2);
                let snd = c1
                    .intersect(sync)
                    .union(c2.intersect(sync))
                    .union(c1.minus(sync).intersect(c2.minus(sync)));
                if !fst.intersects(snd) {
                    set_bit(&mut words, pack(n, fst, snd));
                }
            }
        }
        Ok(self.mk_pair(words))
    }

    fn pf_first_disjoint(
        &mut self,
        f: &PairFamily,
        a: EventSet,
    ) -> Result<PairFamily, FamilyError> {
        let mut words = self.unwrap_pair(f)?.to_vec();
        let n = self.set_dims();
        for e in a.iter() {
            clear_dim(&mut words, n + e as u32);
        }
        Ok(self.mk_pair(words))
    }

    fn pf_first_subset(&mut self, f: &PairFamily, a: EventSet) -> Result<PairFamily, FamilyError> {
        self.pf_first_disjoint(f, a.complement(self.n as usize))
    }

    fn pf_witness(&mut self, f: &PairFamily) -> Result<Option<(EventSet, EventSet)>, FamilyError> {
        let fw = self.unwrap_pair(f)?;
        let n = self.n;
        let vmask = (1u64 << n) - 1;
        for (wi, &w) in fw.iter().enumerate() {
            if w != 0 {
                let idx = (wi * 64 + w.trailing_zeros() as usize) as u64;
                return Ok(Some((
                    EventSet::from_bits((idx >> n) & vmask),
                    EventSet::from_bits(idx & vmask),
                )));
            }
        }
        Ok(None)
    }

    fn pf_enumerate(
        &mut self,
        f: &PairFamily,
        cap: usize,
    ) -> Result<Vec<(EventSet, EventSet)>, FamilyError> {
        let fw = self.unwrap_pair(f)?;
        let n = self.n;
        let vmask = (1u64 << n) - 1;
        Ok(ExplicitBackend::member_indices(fw, cap)?
            .into_iter()
            .map(|idx| {
                (
                    EventSet::from_bits((idx as u64 >> n) & vmask),
                    EventSet::from_bits(idx as u64 & vmask),
                )
            })
            .collect())
    }
}

fn pack(n: u8, u: EventSet, v: EventSet) -> usize {
    debug_assert!(u.bits() < (1 << n) && v.bits() < (1 << n));
    ((u.bits() as usize) << n) | v.bits() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(bits: u64) -> EventSet {
        EventSet::from_bits(bits)
    }

    fn enumerate(be: &mut ExplicitBackend, f: &SetFamily) -> Vec<u64> {
        be.sf_enumerate(f, 1 << 20)
            .unwrap()
            .into_iter()
            .map(|s| s.bits())
            .collect()
    }

    #[test]
    fn ucl_of_singleton_over_two_events() {
        // ucl({{a}}) over Σ={a,b} → {{a},{a,b}}
        let mut be = ExplicitBackend::new(2).unwrap();
        let f = be.sf_singleton(ev(0b01));
        let up = be.sf_ucl(&f).unwrap();
        assert_eq!(enumerate(&mut be, &up), vec![0b01, 0b11]);
    }

    #[test]
    fn dcl_of_full_set_is_powerset() {
        let mut be = ExplicitBackend::new(2).unwrap();
        let f = be.sf_singleton(ev(0b11));
        let down = be.sf_dcl(&f).unwrap();
        assert_eq!(enumerate(&mut be, &down), vec![0b00, 0b01, 0b10, 0b11]);
    }

    #[test]
    fn udcl_spec_example() {
        // udcl({({a,b},{a})}) over Σ={a,b} = all (U,V) with a ∈ V.
        let mut be = ExplicitBackend::new(2).unwrap();
        let f = be.pf_singleton(ev(0b11), ev(0b01)).unwrap();
        let closed = be.pf_udcl(&f).unwrap();
        let members = be.pf_enumerate(&closed, 64).unwrap();
        assert_eq!(members.len(), 8); // 4 choices of U × 2 choices of V ∋ a
        for (_, v) in members {
            assert!(v.contains(0));
        }
    }

    #[test]
    fn subset_pairs_matches_definition() {
        let mut be = ExplicitBackend::new(3).unwrap();
        let f = be.pf_subset_pairs().unwrap();
        for u in 0..8u64 {
            for v in 0..8u64 {
                let expect = u & !v == 0;
                assert_eq!(
                    be.pf_contains(&f, ev(u), ev(v)).unwrap(),
                    expect,
                    "u={u:03b} v={v:03b}"
                );
            }
        }
        // Spec example: ({a},{a,b}) ∈ {(U,V) | U ⊆ V}.
        assert!(be.pf_contains(&f, ev(0b01), ev(0b11)).unwrap());
    }

    #[test]
    fn rename_close_spec_examples() {
        // r = {(a,b)} totalized over Σ={a,b}, f = {(∅,{a})} → {(∅,V) | b ∈ V}.
        let mut be = ExplicitBackend::new(2).unwrap();
        let r = RenamingRelation::new([(0u8, 1u8)], 2);
        let f = be.pf_singleton(ev(0), ev(0b01)).unwrap();
        let out = be.pf_rename_close(&f, &r).unwrap();
        assert_eq!(
            be.pf_enumerate(&out, 64).unwrap(),
            vec![(ev(0), ev(0b10)), (ev(0), ev(0b11))]
        );

        // r = {(a,b),(a,c)} over Σ={a,b,c}, f = {(∅,{a})} → {(∅,V) | {b,c} ⊆ V}.
        let mut be = ExplicitBackend::new(3).unwrap();
        let r = RenamingRelation::new([(0u8, 1u8), (0, 2)], 3);
        let f = be.pf_singleton(ev(0), ev(0b001)).unwrap();
        let out = be.pf_rename_close(&f, &r).unwrap();
        assert_eq!(
            be.pf_enumerate(&out, 64).unwrap(),
            vec![(ev(0), ev(0b110)), (ev(0), ev(0b111))]
        );

        // Identity renaming degenerates to ucl on the second component.
        let r = RenamingRelation::identity(3);
        let g = be.pf_singleton(ev(0b010), ev(0b001)).unwrap();
        let renamed = be.pf_rename_close(&g, &r).unwrap();
        let ucl = be.pf_ucl_second(&g).unwrap();
        assert_eq!(renamed, ucl);
    }

    #[test]
    fn closures_are_idempotent_and_extensive() {
        let mut be = ExplicitBackend::new(4).unwrap();
        let members = [
            (ev(0b0101), ev(0b0010)),
            (ev(0b1000), ev(0b1001)),
            (ev(0), ev(0)),
        ];
        let f = be.pf_from_members(&members).unwrap();

        let once = be.pf_ucl_second(&f).unwrap();
        let twice = be.pf_ucl_second(&once).unwrap();
        assert_eq!(once, twice);
        // Extensive: f ⊆ ucl(f).
        assert_eq!(be.pf_union(&f, &once).unwrap(), once);

        let once = be.pf_udcl(&f).unwrap();
        let twice = be.pf_udcl(&once).unwrap();
        assert_eq!(once, twice);
        assert_eq!(be.pf_union(&f, &once).unwrap(), once);
    }

    #[test]
    fn par_mix_crosses_rows() {
        // f = {({a,b}, {a})}, g = {({b}, A)} with A = {a}:
        // mix = {({a,b} ∩ {b}, {a})} = {({b},{a})}.
        let mut be = ExplicitBackend::new(2).unwrap();
        let f = be.pf_singleton(ev(0b11), ev(0b01)).unwrap();
        let g = be.pf_singleton(ev(0b10), ev(0b01)).unwrap();
        let out = be.pf_par_mix(&f, &g, ev(0b01)).unwrap();
        assert_eq!(be.pf_enumerate(&out, 64).unwrap(), vec![(ev(0b10), ev(0b01))]);
        // With g's V ≠ A nothing matches.
        let out = be.pf_par_mix(&f, &g, ev(0b10)).unwrap();
        assert!(be.pf_is_empty(&out).unwrap());
    }

    #[test]
    fn phi_hide_is_exact_image() {
        let mut be = ExplicitBackend::new(3).unwrap();
        let f = be.pf_from_members(&[(ev(0b011), ev(0b100)), (ev(0b100), ev(0b011))]).unwrap();
        let out = be.pf_phi_hide(&f, ev(0b001)).unwrap();
        assert_eq!(
            be.pf_enumerate(&out, 64).unwrap(),
            vec![(ev(0b010), ev(0b101)), (ev(0b100), ev(0b011))]
        );
    }

    #[test]
    fn phi_par_merge_filters_overlaps() {
        // Φ(P)={({a},{b})}, Φ(Q)={({b},{a})}, sync {a,b}: C′={a,b}∪… overlaps F′={a,b} → dropped.
        let mut be = ExplicitBackend::new(2).unwrap();
        let f = be.pf_singleton(ev(0b01), ev(0b10)).unwrap();
        let g = be.pf_singleton(ev(0b10), ev(0b01)).unwrap();
        let out = be.pf_phi_par_merge(&f, &g, ev(0b11)).unwrap();
        assert!(be.pf_is_empty(&out).unwrap());
        // Same members, empty sync: C′ = C₁∩C₂ = ∅, F′={a,b} kept.
        let out = be.pf_phi_par_merge(&f, &g, EventSet::EMPTY).unwrap();
        assert_eq!(
            be.pf_enumerate(&out, 64).unwrap(),
            vec![(ev(0b11), ev(0))]
        );
    }

    #[test]
    fn first_component_filters() {
        let mut be = ExplicitBackend::new(2).unwrap();
        let f = be.pf_from_members(&[
            (ev(0b01), ev(0b10)),
            (ev(0b10), ev(0b01)),
            (ev(0b11), ev(0b00)),
        ]).unwrap();
        let disj = be.pf_first_disjoint(&f, ev(0b01)).unwrap();
        assert_eq!(be.pf_enumerate(&disj, 64).unwrap(), vec![(ev(0b10), ev(0b01))]);
        let sub = be.pf_first_subset(&f, ev(0b01)).unwrap();
        assert_eq!(be.pf_enumerate(&sub, 64).unwrap(), vec![(ev(0b01), ev(0b10))]);
    }

    #[test]
    fn couple_complement_pairs_each_set_with_its_complement() {
        let mut be = ExplicitBackend::new(3).unwrap();
        let g = be.sf_singleton(ev(0b101));
        let g2 = be.sf_singleton(ev(0b001));
        let g = be.sf_union(&g, &g2).unwrap();
        let out = be.pf_couple_complement(&g).unwrap();
        assert_eq!(
            be.pf_enumerate(&out, 64).unwrap(),
            vec![(ev(0b001), ev(0b110)), (ev(0b101), ev(0b010))]
        );
    }

    #[test]
    fn lift_second_ignores_first_component() {
        let mut be = ExplicitBackend::new(2).unwrap();
        let g = be.sf_singleton(ev(0b10));
        let f = be.pf_lift_second(&g).unwrap();
        let members = be.pf_enumerate(&f, 64).unwrap();
        assert_eq!(members.len(), 4);
        assert!(members.iter().all(|&(_, v)| v == ev(0b10)));
    }

    #[test]
    fn diag_sets_reads_the_diagonal() {
        let mut be = ExplicitBackend::new(2).unwrap();
        let f = be.pf_from_members(&[(ev(0b01), ev(0b01)), (ev(0b01), ev(0b10))]).unwrap();
        let d = be.pf_diag_sets(&f).unwrap();
        assert_eq!(enumerate(&mut be, &d), vec![0b01]);
    }

    #[test]
    fn alphabet_caps_are_enforced() {
        assert!(ExplicitBackend::new(17).is_err());
        let mut be = ExplicitBackend::new(14).unwrap();
        let f = be.sf_full();
        assert!(be.sf_is_empty(&f).is_ok()); // sets fine at 14
        assert!(matches!(
            be.pair_dims(),
            Err(FamilyError::CapExceeded { .. })
        ));
    }

    #[test]
    fn mixing_alphabets_is_reported() {
        let mut be2 = ExplicitBackend::new(2).unwrap();
        let mut be3 = ExplicitBackend::new(3).unwrap();
        let f = be2.sf_full();
        let g = be3.sf_full();
        assert_eq!(be3.sf_union(&f, &g).unwrap_err(), FamilyError::AlphabetMismatch);
    }
}
