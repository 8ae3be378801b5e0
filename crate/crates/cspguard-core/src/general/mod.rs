//! The compositional livelock analysis for arbitrary closed terms.
//!
//! Four families are computed by mutual structural recursion:
//!
//! * `nonexpansive_sets` (per recursion variable) tracks how hiding and
//!   renaming translate event sets across a term;
//! * `guard_sets` lists the sets of events the term must touch before it
//!   can terminate;
//! * `contractive_sets` (per recursion variable) identifies the recursion
//!   arguments that strictly shrink distances, which is what makes a
//!   recursion productive;
//! * `fair_sets` pairs (U, V): if every process substituted for a free
//!   variable is livelock-free and performs U-events infinitely often,
//!   the whole term is livelock-free and performs V-events infinitely
//!   often.
//!
//! A closed term without DIV whose fair-set family is non-empty is
//! livelock-free. The converse fails — the family can be empty for
//! livelock-free processes — so the result is a certificate or a shrug,
//! never a divergence claim.
//!
//! All recursions descend to proper subterms, so memoising on
//! (subterm, function, variable) is sound and terminating. The memo can
//! be switched off to cross-check that caching is semantically inert.

use std::collections::{BTreeSet, HashMap};

use crate::setlogic::{
    EventSet, FamilyBackend, FamilyError, PairFamily, SetFamily,
};
use crate::syntax::Term;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeneralError {
    #[error("term has free variables: {0:?}")]
    OpenTerm(Vec<String>),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Which of the four rule systems a memo entry belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Fun {
    NonExpansive,
    Contractive,
}

/// Evaluation context: the family backend plus memo tables. One context
/// per analysed term; contexts own their backend and are not `Sync`.
pub struct RuleContext<'b> {
    backend: &'b mut dyn FamilyBackend,
    memo_enabled: bool,
    terms: Vec<(Term, BTreeSet<String>)>,
    term_ids: HashMap<Term, u32>,
    vars: Vec<String>,
    var_ids: HashMap<String, u32>,
    pair_memo: HashMap<(Fun, u32, u32), PairFamily>,
    guard_memo: HashMap<u32, SetFamily>,
    fair_memo: HashMap<u32, PairFamily>,
}

impl<'b> RuleContext<'b> {
    pub fn new(backend: &'b mut dyn FamilyBackend) -> Self {
        Self::with_memo(backend, true)
    }

    pub fn with_memo(backend: &'b mut dyn FamilyBackend, memo_enabled: bool) -> Self {
        RuleContext {
            backend,
            memo_enabled,
            terms: Vec::new(),
            term_ids: HashMap::new(),
            vars: Vec::new(),
            var_ids: HashMap::new(),
            pair_memo: HashMap::new(),
            guard_memo: HashMap::new(),
            fair_memo: HashMap::new(),
        }
    }

    pub fn backend(&mut self) -> &mut dyn FamilyBackend {
        &mut *self.backend
    }

    fn intern(&mut self, t: &Term) -> u32 {
        if let Some(&id) = self.term_ids.get(t) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push((t.clone(), t.free_vars()));
        self.term_ids.insert(t.clone(), id);
        id
    }

    fn var_id(&mut self, x: &str) -> u32 {
        if let Some(&id) = self.var_ids.get(x) {
            return id;
        }
        let id = self.vars.len() as u32;
        self.vars.push(x.to_string());
        self.var_ids.insert(x.to_string(), id);
        id
    }

    fn is_free(&self, term_id: u32, x: &str) -> bool {
        self.terms[term_id as usize].1.contains(x)
    }

    fn is_closed(&self, term_id: u32) -> bool {
        self.terms[term_id as usize].1.is_empty()
    }

    /// Σ − A for the context's alphabet.
    fn complement(&self, a: EventSet) -> EventSet {
        a.complement(self.backend.alpha_n() as usize)
    }
}

/// All (U, V) such that substituting U-close processes keeps the term's
/// V-behaviour at least as close.
pub fn nonexpansive_sets(
    t: &Term,
    x: &str,
    ctx: &mut RuleContext,
) -> Result<PairFamily, FamilyError> {
    let id = ctx.intern(t);
    let key = (Fun::NonExpansive, id, ctx.var_id(x));
    if ctx.memo_enabled {
        if let Some(hit) = ctx.pair_memo.get(&key) {
            return Ok(hit.clone());
        }
    }
    let result = if !ctx.is_free(id, x) {
        ctx.backend.pf_full()?
    } else {
        match t {
            Term::Prefix(_, p) => nonexpansive_sets(p, x, ctx)?,
            Term::IntChoice(p, q)
            | Term::ExtChoice(p, q)
            | Term::Parallel(p, _, q)
            | Term::Seq(p, q) => {
                let np = nonexpansive_sets(p, x, ctx)?;
                let nq = nonexpansive_sets(q, x, ctx)?;
                ctx.backend.pf_intersect(&np, &nq)?
            }
            Term::Hide(p, hidden) => {
                let np = nonexpansive_sets(p, x, ctx)?;
                ctx.backend.pf_hide_close(&np, *hidden)?
            }
            Term::Rename(p, r) => {
                let np = nonexpansive_sets(p, x, ctx)?;
                ctx.backend.pf_rename_close(&np, r)?
            }
            Term::Var(_) => ctx.backend.pf_subset_pairs()?,
            Term::Mu(y, p) => {
                // x is free under the binder, so y ≠ x here.
                let inner_x = nonexpansive_sets(p, x, ctx)?;
                let inner_y = nonexpansive_sets(p, y, ctx)?;
                mu_squeeze(ctx, &inner_x, &inner_y)?
            }
            Term::Stop | Term::Skip | Term::Div => unreachable!("no free variables"),
        }
    };
    if ctx.memo_enabled {
        ctx.pair_memo.insert(key, result.clone());
    }
    Ok(result)
}

/// {(U,V) | (U′,V′) ∈ `outer` ∧ (V′,V′) ∈ `diag_src` ∧ U ⊆ U′ ∧ V′ ⊆ V}
/// — the recursion clause shared by the nonexpansive and contractive
/// systems.
fn mu_squeeze(
    ctx: &mut RuleContext,
    outer: &PairFamily,
    diag_src: &PairFamily,
) -> Result<PairFamily, FamilyError> {
    let diag = ctx.backend.pf_diag_sets(diag_src)?;
    let lifted = ctx.backend.pf_lift_second(&diag)?;
    let pinned = ctx.backend.pf_intersect(outer, &lifted)?;
    ctx.backend.pf_udcl(&pinned)
}

/// Sets of events the term must communicate from before terminating.
pub fn guard_sets(t: &Term, ctx: &mut RuleContext) -> Result<SetFamily, FamilyError> {
    let id = ctx.intern(t);
    if ctx.memo_enabled {
        if let Some(hit) = ctx.guard_memo.get(&id) {
            return Ok(hit.clone());
        }
    }
    let result = match t {
        Term::Stop => ctx.backend.sf_full(),
        // A process that never terminates guards termination vacuously.
        Term::Div => ctx.backend.sf_full(),
        Term::Skip | Term::Var(_) => ctx.backend.sf_empty(),
        Term::Prefix(a, p) => {
            let gp = guard_sets(p, ctx)?;
            let with_a = ctx.backend.sf_with_event(*a);
            ctx.backend.sf_union(&gp, &with_a)?
        }
        Term::IntChoice(p, q) | Term::ExtChoice(p, q) => {
            let gp = guard_sets(p, ctx)?;
            let gq = guard_sets(q, ctx)?;
            ctx.backend.sf_intersect(&gp, &gq)?
        }
        Term::Seq(p, q) => {
            let gp = guard_sets(p, ctx)?;
            let pid = ctx.intern(p);
            let left_settles = ctx.is_closed(pid) && {
                let fp = fair_sets(p, ctx)?;
                !ctx.backend.pf_is_empty(&fp)?
            };
            if left_settles {
                let gq = guard_sets(q, ctx)?;
                ctx.backend.sf_union(&gp, &gq)?
            } else {
                gp
            }
        }
        Term::Parallel(p, _, q) => {
            let gp = guard_sets(p, ctx)?;
            let gq = guard_sets(q, ctx)?;
            let pid = ctx.intern(p);
            let qid = ctx.intern(q);
            let both_settle = ctx.is_closed(pid) && ctx.is_closed(qid) && {
                let fp = fair_sets(p, ctx)?;
                let fq = fair_sets(q, ctx)?;
                !ctx.backend.pf_is_empty(&fp)? && !ctx.backend.pf_is_empty(&fq)?
            };
            if both_settle {
                ctx.backend.sf_union(&gp, &gq)?
            } else {
                ctx.backend.sf_intersect(&gp, &gq)?
            }
        }
        Term::Hide(p, hidden) => {
            let pid = ctx.intern(p);
            let visible_rest = ctx.complement(*hidden);
            let usable = ctx.is_closed(pid) && {
                let fp = fair_sets(p, ctx)?;
                ctx.backend.pf_contains(&fp, EventSet::EMPTY, visible_rest)?
            };
            if usable {
                let gp = guard_sets(p, ctx)?;
                ctx.backend.sf_hide_close(&gp, *hidden)?
            } else {
                ctx.backend.sf_empty()
            }
        }
        Term::Rename(p, r) => {
            let gp = guard_sets(p, ctx)?;
            ctx.backend.sf_rename_close(&gp, r)?
        }
        Term::Mu(_, p) => guard_sets(p, ctx)?,
    };
    if ctx.memo_enabled {
        ctx.guard_memo.insert(id, result.clone());
    }
    Ok(result)
}

/// All (U, V) such that substituting U-close processes makes the term's
/// V-behaviour strictly closer — the productivity measure for recursion
/// through `x`.
pub fn contractive_sets(
    t: &Term,
    x: &str,
    ctx: &mut RuleContext,
) -> Result<PairFamily, FamilyError> {
    let id = ctx.intern(t);
    let key = (Fun::Contractive, id, ctx.var_id(x));
    if ctx.memo_enabled {
        if let Some(hit) = ctx.pair_memo.get(&key) {
            return Ok(hit.clone());
        }
    }
    let result = if !ctx.is_free(id, x) {
        ctx.backend.pf_full()?
    } else {
        match t {
            Term::Prefix(a, p) => {
                // The guarding event makes any nonexpansive pair whose V
                // contains it contractive.
                let cp = contractive_sets(p, x, ctx)?;
                let np = nonexpansive_sets(p, x, ctx)?;
                let va = ctx.backend.sf_with_event(*a);
                let lifted = ctx.backend.pf_lift_second(&va)?;
                let guarded = ctx.backend.pf_intersect(&np, &lifted)?;
                ctx.backend.pf_union(&cp, &guarded)?
            }
            Term::IntChoice(p, q) | Term::ExtChoice(p, q) | Term::Parallel(p, _, q) => {
                let cp = contractive_sets(p, x, ctx)?;
                let cq = contractive_sets(q, x, ctx)?;
                ctx.backend.pf_intersect(&cp, &cq)?
            }
            Term::Seq(p, q) => {
                // The second operand is reached only after the first
                // terminates, so guards of the first protect it.
                let cp = contractive_sets(p, x, ctx)?;
                let cq = contractive_sets(q, x, ctx)?;
                let nq = nonexpansive_sets(q, x, ctx)?;
                let gp = guard_sets(p, ctx)?;
                let lifted = ctx.backend.pf_lift_second(&gp)?;
                let shielded = ctx.backend.pf_intersect(&nq, &lifted)?;
                let right = ctx.backend.pf_union(&cq, &shielded)?;
                ctx.backend.pf_intersect(&cp, &right)?
            }
            Term::Hide(p, hidden) => {
                let cp = contractive_sets(p, x, ctx)?;
                ctx.backend.pf_hide_close(&cp, *hidden)?
            }
            Term::Rename(p, r) => {
                let cp = contractive_sets(p, x, ctx)?;
                ctx.backend.pf_rename_close(&cp, r)?
            }
            Term::Var(_) => ctx.backend.pf_empty()?,
            Term::Mu(y, p) => {
                let inner_x = contractive_sets(p, x, ctx)?;
                let inner_y = nonexpansive_sets(p, y, ctx)?;
                mu_squeeze(ctx, &inner_x, &inner_y)?
            }
            Term::Stop | Term::Skip | Term::Div => unreachable!("no free variables"),
        }
    };
    if ctx.memo_enabled {
        ctx.pair_memo.insert(key, result.clone());
    }
    Ok(result)
}

/// All (U, V) such that plugging in livelock-free, U-fair processes
/// yields a livelock-free, V-fair process.
pub fn fair_sets(t: &Term, ctx: &mut RuleContext) -> Result<PairFamily, FamilyError> {
    let id = ctx.intern(t);
    if ctx.memo_enabled {
        if let Some(hit) = ctx.fair_memo.get(&id) {
            return Ok(hit.clone());
        }
    }
    let result = match t {
        Term::Stop | Term::Skip => ctx.backend.pf_full()?,
        // A diverging leaf offers no fairness guarantee at all.
        Term::Div => ctx.backend.pf_empty()?,
        Term::Prefix(_, p) => fair_sets(p, ctx)?,
        Term::IntChoice(p, q) | Term::ExtChoice(p, q) | Term::Seq(p, q) => {
            let fp = fair_sets(p, ctx)?;
            let fq = fair_sets(q, ctx)?;
            ctx.backend.pf_intersect(&fp, &fq)?
        }
        Term::Parallel(p, sync, q) => {
            // Either both sides run forever (intersection), or one side
            // eventually monopolises the interaction while the other is
            // pinned to the interface.
            let fp = fair_sets(p, ctx)?;
            let fq = fair_sets(q, ctx)?;
            let both = ctx.backend.pf_intersect(&fp, &fq)?;
            let left = ctx.backend.pf_par_mix(&fp, &fq, *sync)?;
            let right = ctx.backend.pf_par_mix(&fq, &fp, *sync)?;
            let acc = ctx.backend.pf_union(&both, &left)?;
            ctx.backend.pf_union(&acc, &right)?
        }
        Term::Hide(p, hidden) => {
            let fp = fair_sets(p, ctx)?;
            ctx.backend.pf_hide_close(&fp, *hidden)?
        }
        Term::Rename(p, r) => {
            let fp = fair_sets(p, ctx)?;
            ctx.backend.pf_rename_close(&fp, r)?
        }
        Term::Var(_) => ctx.backend.pf_subset_pairs()?,
        Term::Mu(x, p) => {
            let cx = contractive_sets(p, x, ctx)?;
            let fp = fair_sets(p, ctx)?;
            let both = ctx.backend.pf_intersect(&cx, &fp)?;
            let diag = ctx.backend.pf_diag_sets(&both)?;
            if t.is_closed() {
                // Any U works: the recursion supplies its own argument.
                let ups = ctx.backend.sf_ucl(&diag)?;
                ctx.backend.pf_lift_second(&ups)?
            } else {
                // {(U,V) | ∃W: U ⊆ W ⊆ V, (W,W) a contractive fair pair}
                let lifted = ctx.backend.pf_lift_second(&diag)?;
                let subs = ctx.backend.pf_subset_pairs()?;
                let below = ctx.backend.pf_intersect(&subs, &lifted)?;
                ctx.backend.pf_ucl_second(&below)?
            }
        }
    };
    if ctx.memo_enabled {
        ctx.fair_memo.insert(id, result.clone());
    }
    Ok(result)
}

/// Outcome of the whole-term analysis.
#[derive(Clone, Debug)]
pub struct GeneralOutcome {
    /// Some(_) exactly when the term is certified livelock-free.
    pub witness: Option<(EventSet, EventSet)>,
    /// Why certification failed, when it did.
    pub reason: Option<String>,
    /// The root fair-set family (empty when `reason` is set).
    pub fair: PairFamily,
}

impl GeneralOutcome {
    pub fn is_livelock_free(&self) -> bool {
        self.witness.is_some()
    }
}

/// Certify a closed term livelock-free via the fair-set theorem, or
/// report why not. The witness is the member with the smallest second
/// component the backend can exhibit.
pub fn analyze_general(t: &Term, ctx: &mut RuleContext) -> Result<GeneralOutcome, GeneralError> {
    if !t.is_closed() {
        return Err(GeneralError::OpenTerm(
            t.free_vars().into_iter().collect(),
        ));
    }
    // Distinct binders must carry distinct names for the per-variable
    // memo keys to mean what they say.
    let t = t.alpha_normalize();
    if t.contains_div() {
        let fair = ctx.backend.pf_empty()?;
        return Ok(GeneralOutcome {
            witness: None,
            reason: Some("contains DIV".to_string()),
            fair,
        });
    }
    let fair = fair_sets(&t, ctx)?;
    if ctx.backend.pf_is_empty(&fair)? {
        return Ok(GeneralOutcome {
            witness: None,
            reason: Some("empty fair-set family".to_string()),
            fair,
        });
    }
    let witness = extract_witness(ctx, &fair)?;
    Ok(GeneralOutcome {
        witness: Some(witness),
        reason: None,
        fair,
    })
}

/// Smallest-V member. Fair families are downward-closed in the first
/// component, so if any (U,V) belongs then (∅,V) does; scanning second
/// components in ascending mask order is both cheap and deterministic.
pub(crate) fn extract_witness(
    ctx: &mut RuleContext,
    fam: &PairFamily,
) -> Result<(EventSet, EventSet), FamilyError> {
    let n = ctx.backend.alpha_n() as u32;
    if n <= 16 {
        for v in 0..(1u64 << n) {
            let vset = EventSet::from_bits(v);
            if ctx.backend.pf_contains(fam, EventSet::EMPTY, vset)? {
                return Ok((EventSet::EMPTY, vset));
            }
        }
    }
    // Large alphabets (symbolic backend): take the branch-order model.
    Ok(ctx
        .backend
        .pf_witness(fam)?
        .expect("witness requested from empty family"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setlogic::{Alphabet, BddBackend, ExplicitBackend};
    use crate::syntax::{bekic_elaborate, parse};

    fn alpha(names: &[&str]) -> Alphabet {
        Alphabet::new(names.iter().map(|s| s.to_string())).unwrap()
    }

    fn ev(bits: u64) -> EventSet {
        EventSet::from_bits(bits)
    }

    fn pairs(
        ctx: &mut RuleContext,
        fam: &PairFamily,
    ) -> Vec<(u64, u64)> {
        ctx.backend
            .pf_enumerate(fam, 1 << 20)
            .unwrap()
            .into_iter()
            .map(|(u, v)| (u.bits(), v.bits()))
            .collect()
    }

    #[test]
    fn nonexpansive_base_cases() {
        let _ab = alpha(&["a"]);
        let mut be = ExplicitBackend::new(1).unwrap();
        let mut ctx = RuleContext::new(&mut be);
        let full = ctx.backend.pf_full().unwrap();
        let stop = Term::Stop;
        assert_eq!(nonexpansive_sets(&stop, "X", &mut ctx).unwrap(), full);

        let x = Term::var("X");
        let nx = nonexpansive_sets(&x, "X", &mut ctx).unwrap();
        assert_eq!(pairs(&mut ctx, &nx), vec![(0, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn nonexpansive_hiding_squeezes_the_second_component() {
        // Over {a,b}: pairs (U,V) of X\{a} are those with U ⊆ {b} and U ⊆ V.
        let mut be = ExplicitBackend::new(2).unwrap();
        let mut ctx = RuleContext::new(&mut be);
        let t = Term::hide(Term::var("X"), ev(0b01));
        let got = nonexpansive_sets(&t, "X", &mut ctx).unwrap();
        let expect: Vec<(u64, u64)> = (0..4u64)
            .flat_map(|u| (0..4u64).map(move |v| (u, v)))
            .filter(|&(u, v)| u & 0b01 == 0 && u & !v == 0)
            .collect();
        assert_eq!(pairs(&mut ctx, &got), expect);
    }

    #[test]
    fn guard_base_cases() {
        let mut be = ExplicitBackend::new(2).unwrap();
        let mut ctx = RuleContext::new(&mut be);
        let g_skip = guard_sets(&Term::Skip, &mut ctx).unwrap();
        assert!(ctx.backend.sf_is_empty(&g_skip).unwrap());
        let g_stop = guard_sets(&Term::Stop, &mut ctx).unwrap();
        assert_eq!(g_stop, ctx.backend.sf_full());
        // a → SKIP is guarded by exactly the sets containing a.
        let t = Term::prefix(0, Term::Skip);
        let g = guard_sets(&t, &mut ctx).unwrap();
        let members = ctx.backend.sf_enumerate(&g, 16).unwrap();
        assert_eq!(
            members.iter().map(|v| v.bits()).collect::<Vec<_>>(),
            vec![0b01, 0b11]
        );
    }

    #[test]
    fn contractive_base_cases() {
        let mut be = ExplicitBackend::new(1).unwrap();
        let mut ctx = RuleContext::new(&mut be);
        let cx = contractive_sets(&Term::var("X"), "X", &mut ctx).unwrap();
        assert!(ctx.backend.pf_is_empty(&cx).unwrap());
        let c_stop = contractive_sets(&Term::Stop, "X", &mut ctx).unwrap();
        assert_eq!(c_stop, ctx.backend.pf_full().unwrap());
        // a → X: nonexpansive pairs with a ∈ V.
        let t = Term::prefix(0, Term::var("X"));
        let c = contractive_sets(&t, "X", &mut ctx).unwrap();
        assert_eq!(pairs(&mut ctx, &c), vec![(0, 1), (1, 1)]);
    }

    #[test]
    fn fair_sets_of_guarded_loop() {
        // μX·a→X over Σ={a,b}: every V containing a, any U.
        let mut be = ExplicitBackend::new(2).unwrap();
        let mut ctx = RuleContext::new(&mut be);
        let t = Term::mu("X", Term::prefix(0, Term::var("X")));
        let f = fair_sets(&t, &mut ctx).unwrap();
        let expect: Vec<(u64, u64)> = (0..4u64)
            .flat_map(|u| (0..4u64).map(move |v| (u, v)))
            .filter(|&(_, v)| v & 0b01 != 0)
            .collect();
        assert_eq!(pairs(&mut ctx, &f), expect);
    }

    #[test]
    fn unguarded_recursion_is_not_certified() {
        let mut be = ExplicitBackend::new(1).unwrap();
        let mut ctx = RuleContext::new(&mut be);
        let t = Term::mu("X", Term::var("X"));
        let out = analyze_general(&t, &mut ctx).unwrap();
        assert!(!out.is_livelock_free());
        assert_eq!(out.reason.as_deref(), Some("empty fair-set family"));
    }

    #[test]
    fn div_is_reported_not_analysed() {
        let mut be = ExplicitBackend::new(1).unwrap();
        let mut ctx = RuleContext::new(&mut be);
        let t = Term::int_choice(Term::Div, Term::prefix(0, Term::Skip));
        let out = analyze_general(&t, &mut ctx).unwrap();
        assert_eq!(out.reason.as_deref(), Some("contains DIV"));
    }

    #[test]
    fn open_terms_are_rejected() {
        let mut be = ExplicitBackend::new(1).unwrap();
        let mut ctx = RuleContext::new(&mut be);
        let err = analyze_general(&Term::var("Y"), &mut ctx).unwrap_err();
        assert_eq!(err, GeneralError::OpenTerm(vec!["Y".to_string()]));
    }

    #[test]
    fn memoization_is_observationally_inert() {
        let src = "alphabet {a, b};\n\
                   P = mu X . a -> ((b -> X) |~| (X ; SKIP));\n\
                   root P;";
        let spec = parse(src).unwrap();
        let t = bekic_elaborate(&spec);
        let mut be1 = ExplicitBackend::new(2).unwrap();
        let mut ctx1 = RuleContext::with_memo(&mut be1, true);
        let f1 = fair_sets(&t, &mut ctx1).unwrap();
        let e1 = ctx1.backend.pf_enumerate(&f1, 1 << 16).unwrap();
        let mut be2 = ExplicitBackend::new(2).unwrap();
        let mut ctx2 = RuleContext::with_memo(&mut be2, false);
        let f2 = fair_sets(&t, &mut ctx2).unwrap();
        let e2 = ctx2.backend.pf_enumerate(&f2, 1 << 16).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn backends_agree_on_a_recursive_term() {
        let src = "alphabet {a, b, c};\n\
                   P = mu X . (a -> (X \\ {c})) [] (b -> X [[b <- c]]);\n\
                   root P;";
        let spec = parse(src).unwrap();
        let t = bekic_elaborate(&spec);
        let mut ex = ExplicitBackend::new(3).unwrap();
        let mut ctx_e = RuleContext::new(&mut ex);
        let fe = fair_sets(&t, &mut ctx_e).unwrap();
        let ee = ctx_e.backend.pf_enumerate(&fe, 1 << 16).unwrap();
        let mut sy = BddBackend::new(3);
        let mut ctx_s = RuleContext::new(&mut sy);
        let fs = fair_sets(&t, &mut ctx_s).unwrap();
        let es = ctx_s.backend.pf_enumerate(&fs, 1 << 16).unwrap();
        assert_eq!(ee, es);
    }
}
