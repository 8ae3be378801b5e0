//! Syntactic classification of terms into analysis fragments.
//!
//! *Sequential* terms build from `STOP`, `SKIP`, and variables using
//! prefixing, the two choices, and μ; sequencing, hiding, and renaming are
//! allowed only over an already-closed operand. That restriction is what
//! keeps a sequential term's transition system finite: recursion may not
//! thread a variable through an operator that keeps stacking context
//! (`μX·a→(X\a)` grows a new hiding layer per unfolding and is *not*
//! sequential).
//!
//! *Structurally finite-state* (SFS) terms compose closed sequential pieces
//! with every operator — parallel included — but never recurse through the
//! composition itself. `DIV` belongs to neither fragment; terms containing
//! it take the general analysis route.

use thiserror::Error;

use crate::syntax::ast::Term;

/// Analysis fragment of a closed term, from most to least specialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProcessClass {
    Sequential,
    Sfs,
    General,
}

impl std::fmt::Display for ProcessClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProcessClass::Sequential => write!(f, "sequential"),
            ProcessClass::Sfs => write!(f, "sfs"),
            ProcessClass::General => write!(f, "general"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("term has free variables {0:?}; only sequential terms may be open")]
    OpenTerm(Vec<String>),
}

/// Membership in the sequential fragment; defined for open terms too.
pub fn is_sequential(t: &Term) -> bool {
    match t {
        Term::Stop | Term::Skip | Term::Var(_) => true,
        Term::Div => false,
        Term::Prefix(_, p) => is_sequential(p),
        Term::IntChoice(p, q) | Term::ExtChoice(p, q) => is_sequential(p) && is_sequential(q),
        Term::Mu(_, p) => is_sequential(p),
        Term::Seq(p, q) => p.is_closed() && is_sequential(p) && is_sequential(q),
        Term::Hide(p, _) | Term::Rename(p, _) => p.is_closed() && is_sequential(p),
        Term::Parallel(_, _, _) => false,
    }
}

/// Membership in the SFS fragment; implies closedness.
pub fn is_sfs(t: &Term) -> bool {
    t.is_closed() && sfs_shape(t)
}

fn sfs_shape(t: &Term) -> bool {
    if is_sequential(t) {
        return true;
    }
    match t {
        Term::Prefix(_, p) => sfs_shape(p),
        Term::IntChoice(p, q) | Term::ExtChoice(p, q) | Term::Seq(p, q) => {
            sfs_shape(p) && sfs_shape(q)
        }
        Term::Parallel(p, _, q) => sfs_shape(p) && sfs_shape(q),
        Term::Hide(p, _) | Term::Rename(p, _) => sfs_shape(p),
        // μ recursion is only admitted through the sequential case above;
        // a μ over a non-sequential body recurses through composition.
        // A μ whose variable is unused is the degenerate exception.
        Term::Mu(x, p) => !p.has_free_var(x) && sfs_shape(p),
        Term::Stop | Term::Skip | Term::Div | Term::Var(_) => false,
    }
}

/// Classify a term into its analysis fragment.
///
/// Open terms are only classifiable when sequential; anything else needs a
/// closed term (run equation elaboration first).
pub fn classify(t: &Term) -> Result<ProcessClass, ClassifyError> {
    if is_sequential(t) {
        return Ok(ProcessClass::Sequential);
    }
    let free = t.free_vars();
    if !free.is_empty() {
        return Err(ClassifyError::OpenTerm(free.into_iter().collect()));
    }
    if sfs_shape(t) {
        Ok(ProcessClass::Sfs)
    } else {
        Ok(ProcessClass::General)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setlogic::EventSet;

    fn loop_on(e: u8, var: &str) -> Term {
        Term::mu(var, Term::prefix(e, Term::var(var)))
    }

    #[test]
    fn guarded_loop_is_sequential() {
        assert_eq!(classify(&loop_on(0, "X")), Ok(ProcessClass::Sequential));
    }

    #[test]
    fn parallel_of_closed_loops_is_sfs_not_sequential() {
        let t = Term::parallel(loop_on(0, "X"), EventSet::singleton(0), loop_on(0, "Y"));
        assert!(!is_sequential(&t));
        assert_eq!(classify(&t), Ok(ProcessClass::Sfs));
    }

    #[test]
    fn recursion_under_parallel_is_general() {
        // μX·(a→X) [|{a}|] (a→X)
        let body = Term::parallel(
            Term::prefix(0, Term::var("X")),
            EventSet::singleton(0),
            Term::prefix(0, Term::var("X")),
        );
        assert_eq!(classify(&Term::mu("X", body)), Ok(ProcessClass::General));
    }

    #[test]
    fn recursion_through_hiding_is_general() {
        // μX·a→(X\{a}) stacks hiding per unfolding.
        let t = Term::mu(
            "X",
            Term::prefix(0, Term::hide(Term::var("X"), EventSet::singleton(0))),
        );
        assert_eq!(classify(&t), Ok(ProcessClass::General));
        // With a closed operand the same operators stay sequential.
        let t = Term::mu("X", Term::prefix(0, Term::seq(Term::hide(loop_on(1, "Y"), EventSet::singleton(1)), Term::var("X"))));
        assert_eq!(classify(&t), Ok(ProcessClass::Sequential));
    }

    #[test]
    fn div_is_never_sequential_or_sfs() {
        assert_eq!(classify(&Term::Div), Ok(ProcessClass::General));
        let t = Term::int_choice(Term::Stop, Term::Div);
        assert_eq!(classify(&t), Ok(ProcessClass::General));
    }

    #[test]
    fn open_terms_classify_only_when_sequential() {
        assert_eq!(classify(&Term::var("X")), Ok(ProcessClass::Sequential));
        let open_par = Term::parallel(Term::var("X"), EventSet::EMPTY, Term::Stop);
        assert_eq!(
            classify(&open_par),
            Err(ClassifyError::OpenTerm(vec!["X".to_string()]))
        );
    }

    #[test]
    fn unused_mu_over_parallel_is_still_sfs() {
        let t = Term::mu(
            "X",
            Term::parallel(Term::Stop, EventSet::EMPTY, Term::Stop),
        );
        assert_eq!(classify(&t), Ok(ProcessClass::Sfs));
    }
}
