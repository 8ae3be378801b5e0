//! The CSP term language.
//!
//! Terms are immutable trees with shared (`Arc`) children; structural
//! equality doubles as state identity in the explicit-state machinery, so
//! anything used as an LTS state is first passed through
//! [`Term::alpha_normalize`] to make equality α-blind.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::setlogic::{EventId, EventSet, RenamingRelation};

/// A CSP term.
///
/// `Parallel` carries the synchronization set A of `P [|A|] Q`; `Hide` the
/// hidden set of `P \ A`; `Rename` a totalized renaming relation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Stop,
    Skip,
    Div,
    Prefix(EventId, Arc<Term>),
    IntChoice(Arc<Term>, Arc<Term>),
    ExtChoice(Arc<Term>, Arc<Term>),
    Parallel(Arc<Term>, EventSet, Arc<Term>),
    Seq(Arc<Term>, Arc<Term>),
    Hide(Arc<Term>, EventSet),
    Rename(Arc<Term>, Arc<RenamingRelation>),
    Var(String),
    Mu(String, Arc<Term>),
}

impl Term {
    pub fn prefix(e: EventId, p: Term) -> Term {
        Term::Prefix(e, Arc::new(p))
    }

    pub fn int_choice(p: Term, q: Term) -> Term {
        Term::IntChoice(Arc::new(p), Arc::new(q))
    }

    pub fn ext_choice(p: Term, q: Term) -> Term {
        Term::ExtChoice(Arc::new(p), Arc::new(q))
    }

    pub fn parallel(p: Term, sync: EventSet, q: Term) -> Term {
        Term::Parallel(Arc::new(p), sync, Arc::new(q))
    }

    pub fn seq(p: Term, q: Term) -> Term {
        Term::Seq(Arc::new(p), Arc::new(q))
    }

    pub fn hide(p: Term, set: EventSet) -> Term {
        Term::Hide(Arc::new(p), set)
    }

    pub fn rename(p: Term, r: RenamingRelation) -> Term {
        Term::Rename(Arc::new(p), Arc::new(r))
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn mu(name: impl Into<String>, body: Term) -> Term {
        Term::Mu(name.into(), Arc::new(body))
    }

    /// Free process variables of the term.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn walk(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match t {
                Term::Stop | Term::Skip | Term::Div => {}
                Term::Prefix(_, p) => walk(p, bound, out),
                Term::IntChoice(p, q) | Term::ExtChoice(p, q) | Term::Seq(p, q) => {
                    walk(p, bound, out);
                    walk(q, bound, out);
                }
                Term::Parallel(p, _, q) => {
                    walk(p, bound, out);
                    walk(q, bound, out);
                }
                Term::Hide(p, _) | Term::Rename(p, _) => walk(p, bound, out),
                Term::Var(x) => {
                    if !bound.iter().any(|b| b == x) {
                        out.insert(x.clone());
                    }
                }
                Term::Mu(x, p) => {
                    bound.push(x.clone());
                    walk(p, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Whether `var` occurs free in the term.
    pub fn has_free_var(&self, var: &str) -> bool {
        match self {
            Term::Stop | Term::Skip | Term::Div => false,
            Term::Prefix(_, p) | Term::Hide(p, _) | Term::Rename(p, _) => p.has_free_var(var),
            Term::IntChoice(p, q) | Term::ExtChoice(p, q) | Term::Seq(p, q) => {
                p.has_free_var(var) || q.has_free_var(var)
            }
            Term::Parallel(p, _, q) => p.has_free_var(var) || q.has_free_var(var),
            Term::Var(x) => x == var,
            Term::Mu(x, p) => x != var && p.has_free_var(var),
        }
    }

    /// `[replacement/var] self` — replace free occurrences of `var`.
    ///
    /// The replacement must be closed; that makes capture impossible without
    /// binder renaming, which is all the μ-unfolding semantics ever needs.
    pub fn substitute(&self, var: &str, replacement: &Term) -> Term {
        debug_assert!(replacement.is_closed(), "substitute requires a closed replacement");
        self.substitute_open(var, replacement)
    }

    /// Like [`Term::substitute`] but tolerates an open replacement. The
    /// caller must guarantee no binder in `self` shares a name with a free
    /// variable of `replacement` (equation elaboration freshens binders to
    /// arrange exactly that), otherwise capture would change meaning.
    pub(crate) fn substitute_open(&self, var: &str, replacement: &Term) -> Term {
        fn go(t: &Term, var: &str, r: &Arc<Term>) -> Term {
            if !t.has_free_var(var) {
                return t.clone();
            }
            match t {
                Term::Var(x) => {
                    debug_assert_eq!(x, var);
                    r.as_ref().clone()
                }
                Term::Prefix(e, p) => Term::Prefix(*e, Arc::new(go(p, var, r))),
                Term::IntChoice(p, q) => {
                    Term::IntChoice(Arc::new(go(p, var, r)), Arc::new(go(q, var, r)))
                }
                Term::ExtChoice(p, q) => {
                    Term::ExtChoice(Arc::new(go(p, var, r)), Arc::new(go(q, var, r)))
                }
                Term::Parallel(p, a, q) => {
                    Term::Parallel(Arc::new(go(p, var, r)), *a, Arc::new(go(q, var, r)))
                }
                Term::Seq(p, q) => Term::Seq(Arc::new(go(p, var, r)), Arc::new(go(q, var, r))),
                Term::Hide(p, a) => Term::Hide(Arc::new(go(p, var, r)), *a),
                Term::Rename(p, rr) => Term::Rename(Arc::new(go(p, var, r)), rr.clone()),
                Term::Mu(x, p) => {
                    debug_assert_ne!(x, var); // has_free_var already false under a shadowing binder
                    Term::Mu(x.clone(), Arc::new(go(p, var, r)))
                }
                Term::Stop | Term::Skip | Term::Div => unreachable!(),
            }
        }
        let r = Arc::new(replacement.clone());
        go(self, var, &r)
    }

    /// Rename μ binders to canonical depth-indexed names (`%0`, `%1`, …).
    ///
    /// Two α-equivalent terms normalize to equal trees; free variables are
    /// untouched. `%` is not a legal identifier character in the surface
    /// grammar, so canonical names can never collide with user names, and
    /// binder depths make shadowing impossible.
    pub fn alpha_normalize(&self) -> Term {
        fn go(t: &Term, env: &mut Vec<(String, String)>) -> Term {
            match t {
                Term::Stop | Term::Skip | Term::Div => t.clone(),
                Term::Prefix(e, p) => Term::Prefix(*e, Arc::new(go(p, env))),
                Term::IntChoice(p, q) => Term::IntChoice(Arc::new(go(p, env)), Arc::new(go(q, env))),
                Term::ExtChoice(p, q) => Term::ExtChoice(Arc::new(go(p, env)), Arc::new(go(q, env))),
                Term::Parallel(p, a, q) => {
                    Term::Parallel(Arc::new(go(p, env)), *a, Arc::new(go(q, env)))
                }
                Term::Seq(p, q) => Term::Seq(Arc::new(go(p, env)), Arc::new(go(q, env))),
                Term::Hide(p, a) => Term::Hide(Arc::new(go(p, env)), *a),
                Term::Rename(p, r) => Term::Rename(Arc::new(go(p, env)), r.clone()),
                Term::Var(x) => {
                    // Innermost binding wins.
                    for (orig, canon) in env.iter().rev() {
                        if orig == x {
                            return Term::Var(canon.clone());
                        }
                    }
                    t.clone()
                }
                Term::Mu(x, p) => {
                    let canon = format!("%{}", env.len());
                    env.push((x.clone(), canon.clone()));
                    let body = go(p, env);
                    env.pop();
                    Term::Mu(canon, Arc::new(body))
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// Whether DIV occurs anywhere in the term.
    pub fn contains_div(&self) -> bool {
        match self {
            Term::Div => true,
            Term::Stop | Term::Skip | Term::Var(_) => false,
            Term::Prefix(_, p) | Term::Hide(p, _) | Term::Rename(p, _) | Term::Mu(_, p) => {
                p.contains_div()
            }
            Term::IntChoice(p, q) | Term::ExtChoice(p, q) | Term::Seq(p, q) => {
                p.contains_div() || q.contains_div()
            }
            Term::Parallel(p, _, q) => p.contains_div() || q.contains_div(),
        }
    }

    /// Collapse nested hiding: `(P \ A) \ B` becomes `P \ (A ∪ B)`,
    /// everywhere in the term. Behaviour-preserving; used only by the
    /// explicit-state oracle's canonicalizer, where it keeps recursion
    /// through hiding from minting unboundedly many syntactic states.
    pub fn fuse_hides(&self) -> Term {
        match self {
            Term::Stop | Term::Skip | Term::Div | Term::Var(_) => self.clone(),
            Term::Prefix(e, p) => Term::Prefix(*e, Arc::new(p.fuse_hides())),
            Term::IntChoice(p, q) => {
                Term::IntChoice(Arc::new(p.fuse_hides()), Arc::new(q.fuse_hides()))
            }
            Term::ExtChoice(p, q) => {
                Term::ExtChoice(Arc::new(p.fuse_hides()), Arc::new(q.fuse_hides()))
            }
            Term::Parallel(p, a, q) => {
                Term::Parallel(Arc::new(p.fuse_hides()), *a, Arc::new(q.fuse_hides()))
            }
            Term::Seq(p, q) => Term::Seq(Arc::new(p.fuse_hides()), Arc::new(q.fuse_hides())),
            Term::Hide(p, a) => match p.fuse_hides() {
                Term::Hide(inner, b) => Term::Hide(inner, a.union(b)),
                other => Term::Hide(Arc::new(other), *a),
            },
            Term::Rename(p, r) => Term::Rename(Arc::new(p.fuse_hides()), r.clone()),
            Term::Mu(x, p) => Term::Mu(x.clone(), Arc::new(p.fuse_hides())),
        }
    }

    /// Count of μ binders, grouped by name — used to check that substitution
    /// never renames or drops binders.
    pub fn binder_census(&self) -> std::collections::BTreeMap<String, usize> {
        fn go(t: &Term, out: &mut std::collections::BTreeMap<String, usize>) {
            match t {
                Term::Stop | Term::Skip | Term::Div | Term::Var(_) => {}
                Term::Prefix(_, p) | Term::Hide(p, _) | Term::Rename(p, _) => go(p, out),
                Term::IntChoice(p, q) | Term::ExtChoice(p, q) | Term::Seq(p, q) => {
                    go(p, out);
                    go(q, out);
                }
                Term::Parallel(p, _, q) => {
                    go(p, out);
                    go(q, out);
                }
                Term::Mu(x, p) => {
                    *out.entry(x.clone()).or_insert(0) += 1;
                    go(p, out);
                }
            }
        }
        let mut out = std::collections::BTreeMap::new();
        go(self, &mut out);
        out
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Stop => write!(f, "STOP"),
            Term::Skip => write!(f, "SKIP"),
            Term::Div => write!(f, "DIV"),
            Term::Prefix(e, p) => write!(f, "#{e} -> {p:?}"),
            Term::IntChoice(p, q) => write!(f, "({p:?} |~| {q:?})"),
            Term::ExtChoice(p, q) => write!(f, "({p:?} [] {q:?})"),
            Term::Parallel(p, a, q) => write!(f, "({p:?} [|{a:?}|] {q:?})"),
            Term::Seq(p, q) => write!(f, "({p:?} ; {q:?})"),
            Term::Hide(p, a) => write!(f, "({p:?} \\ {a:?})"),
            Term::Rename(p, r) => write!(f, "({p:?}[[{r:?}]])"),
            Term::Var(x) => write!(f, "{x}"),
            Term::Mu(x, p) => write!(f, "(mu {x} . {p:?})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> EventId {
        0
    }

    #[test]
    fn free_vars_respect_binders() {
        let t = Term::mu("X", Term::prefix(a(), Term::var("X")));
        assert!(t.is_closed());
        let open = Term::ext_choice(Term::var("Y"), t.clone());
        assert_eq!(open.free_vars().into_iter().collect::<Vec<_>>(), vec!["Y"]);
        assert!(open.has_free_var("Y"));
        assert!(!open.has_free_var("X"));
    }

    #[test]
    fn substitute_replaces_free_only() {
        // [STOP/X](a -> X) = a -> STOP
        let t = Term::prefix(a(), Term::var("X"));
        assert_eq!(t.substitute("X", &Term::Stop), Term::prefix(a(), Term::Stop));

        // Shadowed: [Q/X](mu X . a -> X) unchanged.
        let shadow = Term::mu("X", Term::prefix(a(), Term::var("X")));
        assert_eq!(shadow.substitute("X", &Term::Stop), shadow);
    }

    #[test]
    fn substitute_is_one_unfolding_step() {
        // [(mu X . a -> X)/X](a -> X) = a -> mu X . a -> X
        let mu = Term::mu("X", Term::prefix(a(), Term::var("X")));
        let body = Term::prefix(a(), Term::var("X"));
        assert_eq!(body.substitute("X", &mu), Term::prefix(a(), mu));
    }

    #[test]
    fn alpha_normalization_identifies_renamed_binders() {
        let t1 = Term::mu("X", Term::prefix(a(), Term::var("X")));
        let t2 = Term::mu("Y", Term::prefix(a(), Term::var("Y")));
        assert_ne!(t1, t2);
        assert_eq!(t1.alpha_normalize(), t2.alpha_normalize());

        // Nested binders get distinct canonical names.
        let nested = Term::mu("X", Term::seq(Term::var("X"), Term::mu("X", Term::var("X"))));
        let canon = nested.alpha_normalize();
        assert_eq!(
            canon,
            Term::mu("%0", Term::seq(Term::var("%0"), Term::mu("%1", Term::var("%1"))))
        );
    }

    #[test]
    fn hide_fusion_merges_nested_hides() {
        let t = Term::hide(
            Term::hide(Term::Stop, EventSet::singleton(0)),
            EventSet::singleton(1),
        );
        assert_eq!(
            t.fuse_hides(),
            Term::hide(Term::Stop, EventSet::from_iter([0u8, 1]))
        );
    }
}
