//! Elaboration of mutually recursive equation systems into single closed
//! μ-terms.
//!
//! A system `P = f(P,Q); Q = g(P,Q)` with root `P` becomes
//! `μP·f(P, μQ·g(P,Q))`: equations are eliminated from the innermost
//! outward, substituting each solved equation into all the bodies that may
//! still mention it. Equations are ordered by first use in a depth-first
//! walk from the root, and equations the root never (transitively) uses are
//! dropped. The μ-wrapper for an equation is omitted when the equation does
//! not mention itself once its successors are substituted — `System =
//! (Send [|…|] Fair) \ {error}` elaborates without a `μSystem` shell.

use std::collections::BTreeSet;

use crate::syntax::ast::Term;
use crate::syntax::parse::Spec;

/// Close the root equation of `spec` into a single term with no free
/// variables.
pub fn bekic_elaborate(spec: &Spec) -> Term {
    // Order reachable equations by first use, root first.
    let mut order: Vec<String> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    visit(&spec.root, spec, &mut order, &mut seen);

    let reachable: BTreeSet<&str> = order.iter().map(String::as_str).collect();

    // Every name in scope anywhere, for picking fresh binder names.
    let mut used: BTreeSet<String> = order.iter().cloned().collect();
    for name in &order {
        collect_names(spec.equation(name).expect("ordered name is defined"), &mut used);
    }

    // Rename μ binders that collide with a reachable equation name. After
    // this, no binder in any body equals a name we will substitute for, so
    // substituting terms whose free variables are equation names can never
    // capture.
    let mut bodies: Vec<Term> = order
        .iter()
        .map(|name| {
            freshen_binders(
                spec.equation(name).expect("ordered name is defined"),
                &reachable,
                &mut used,
            )
        })
        .collect();

    // Eliminate from the last-used equation back to the root: close the
    // current equation over itself if needed, then substitute it everywhere
    // it is still mentioned.
    for i in (0..order.len()).rev() {
        let name = &order[i];
        let solved = if bodies[i].has_free_var(name) {
            Term::Mu(name.clone(), std::sync::Arc::new(bodies[i].clone()))
        } else {
            bodies[i].clone()
        };
        for body in bodies.iter_mut().take(i) {
            if body.has_free_var(name) {
                *body = body.substitute_open(name, &solved);
            }
        }
        bodies[i] = solved;
    }

    let root = bodies.into_iter().next().expect("root equation exists");
    debug_assert!(root.is_closed(), "elaboration must close the root");
    root
}

fn visit(name: &str, spec: &Spec, order: &mut Vec<String>, seen: &mut BTreeSet<String>) {
    if !seen.insert(name.to_string()) {
        return;
    }
    order.push(name.to_string());
    let body = spec.equation(name).expect("parser resolved all references");
    walk_refs(body, &mut Vec::new(), &mut |referenced| {
        visit(referenced, spec, order, seen);
    });
}

/// Call `f` on every free variable occurrence, left to right.
fn walk_refs<'a>(t: &'a Term, bound: &mut Vec<&'a str>, f: &mut impl FnMut(&str)) {
    match t {
        Term::Stop | Term::Skip | Term::Div => {}
        Term::Prefix(_, p) | Term::Hide(p, _) | Term::Rename(p, _) => walk_refs(p, bound, f),
        Term::IntChoice(p, q) | Term::ExtChoice(p, q) | Term::Seq(p, q) => {
            walk_refs(p, bound, f);
            walk_refs(q, bound, f);
        }
        Term::Parallel(p, _, q) => {
            walk_refs(p, bound, f);
            walk_refs(q, bound, f);
        }
        Term::Var(x) => {
            if !bound.iter().any(|b| *b == x) {
                f(x);
            }
        }
        Term::Mu(x, p) => {
            bound.push(x);
            walk_refs(p, bound, f);
            bound.pop();
        }
    }
}

fn collect_names(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Stop | Term::Skip | Term::Div => {}
        Term::Prefix(_, p) | Term::Hide(p, _) | Term::Rename(p, _) => collect_names(p, out),
        Term::IntChoice(p, q) | Term::ExtChoice(p, q) | Term::Seq(p, q) => {
            collect_names(p, out);
            collect_names(q, out);
        }
        Term::Parallel(p, _, q) => {
            collect_names(p, out);
            collect_names(q, out);
        }
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::Mu(x, p) => {
            out.insert(x.clone());
            collect_names(p, out);
        }
    }
}

/// Rename every μ binder whose name is in `clashes` to a primed variant not
/// in `used`, keeping the body's reference structure intact.
fn freshen_binders(t: &Term, clashes: &BTreeSet<&str>, used: &mut BTreeSet<String>) -> Term {
    match t {
        Term::Stop | Term::Skip | Term::Div | Term::Var(_) => t.clone(),
        Term::Prefix(e, p) => Term::prefix(*e, freshen_binders(p, clashes, used)),
        Term::IntChoice(p, q) => Term::int_choice(
            freshen_binders(p, clashes, used),
            freshen_binders(q, clashes, used),
        ),
        Term::ExtChoice(p, q) => Term::ext_choice(
            freshen_binders(p, clashes, used),
            freshen_binders(q, clashes, used),
        ),
        Term::Parallel(p, a, q) => Term::parallel(
            freshen_binders(p, clashes, used),
            *a,
            freshen_binders(q, clashes, used),
        ),
        Term::Seq(p, q) => Term::seq(
            freshen_binders(p, clashes, used),
            freshen_binders(q, clashes, used),
        ),
        Term::Hide(p, a) => Term::hide(freshen_binders(p, clashes, used), *a),
        Term::Rename(p, r) => {
            Term::Rename(std::sync::Arc::new(freshen_binders(p, clashes, used)), r.clone())
        }
        Term::Mu(x, p) => {
            let body = freshen_binders(p, clashes, used);
            if clashes.contains(x.as_str()) {
                let mut n = 1;
                let fresh = loop {
                    let candidate = format!("{x}'{n}");
                    if !used.contains(&candidate) {
                        break candidate;
                    }
                    n += 1;
                };
                used.insert(fresh.clone());
                Term::mu(fresh.clone(), rename_free(&body, x, &fresh))
            } else {
                Term::mu(x.clone(), body)
            }
        }
    }
}

/// Rename free occurrences of the variable `from` to `to`; `to` is fresh, so
/// no capture is possible.
fn rename_free(t: &Term, from: &str, to: &str) -> Term {
    match t {
        Term::Var(x) if x == from => Term::var(to),
        Term::Stop | Term::Skip | Term::Div | Term::Var(_) => t.clone(),
        Term::Prefix(e, p) => Term::prefix(*e, rename_free(p, from, to)),
        Term::IntChoice(p, q) => {
            Term::int_choice(rename_free(p, from, to), rename_free(q, from, to))
        }
        Term::ExtChoice(p, q) => {
            Term::ext_choice(rename_free(p, from, to), rename_free(q, from, to))
        }
        Term::Parallel(p, a, q) => {
            Term::parallel(rename_free(p, from, to), *a, rename_free(q, from, to))
        }
        Term::Seq(p, q) => Term::seq(rename_free(p, from, to), rename_free(q, from, to)),
        Term::Hide(p, a) => Term::hide(rename_free(p, from, to), *a),
        Term::Rename(p, r) => {
            Term::Rename(std::sync::Arc::new(rename_free(p, from, to)), r.clone())
        }
        Term::Mu(x, p) if x != from => Term::mu(x.clone(), rename_free(p, from, to)),
        Term::Mu(_, _) => t.clone(), // shadowed below this binder
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::parse;

    fn elaborate(text: &str) -> Term {
        bekic_elaborate(&parse(text).expect("setup spec parses"))
    }

    #[test]
    fn single_self_recursive_equation_becomes_mu() {
        let t = elaborate("alphabet {a}; P = a -> P; root P");
        let want = Term::mu("X", Term::prefix(0, Term::var("X")));
        assert_eq!(t.alpha_normalize(), want.alpha_normalize());
    }

    #[test]
    fn mutual_recursion_nests_inner_mu() {
        // P = a -> Q [] b -> P; Q = b -> P  ⇒  μP·(a→μQ·b→P [] b→P)
        let t = elaborate("alphabet {a,b}; P = a -> Q [] b -> P; Q = b -> P; root P");
        let want = Term::mu(
            "P",
            Term::ext_choice(
                Term::prefix(0, Term::prefix(1, Term::var("P"))),
                Term::prefix(1, Term::var("P")),
            ),
        );
        // Q does not mention itself, so no μQ wrapper appears.
        assert_eq!(t.alpha_normalize(), want.alpha_normalize());

        // And when Q does mention itself, the inner μ appears.
        let t = elaborate("alphabet {a,b}; P = a -> Q; Q = b -> Q [] a -> P; root P");
        let want = Term::mu(
            "P",
            Term::prefix(
                0,
                Term::mu(
                    "Q",
                    Term::ext_choice(
                        Term::prefix(1, Term::var("Q")),
                        Term::prefix(0, Term::var("P")),
                    ),
                ),
            ),
        );
        assert_eq!(t.alpha_normalize(), want.alpha_normalize());
    }

    #[test]
    fn output_is_closed_and_unreachable_equations_are_dropped() {
        let t = elaborate(
            "alphabet {a,b};\n\
             P = a -> Q; Q = b -> P;\n\
             Orphan = a -> Orphan;\n\
             root P",
        );
        assert!(t.is_closed());
        // Orphan's binder name appears nowhere.
        assert!(!t.binder_census().contains_key("Orphan"));
    }

    #[test]
    fn no_mu_shell_when_root_is_not_self_referential() {
        let t = elaborate(
            "alphabet {in, out, error};\n\
             Send = in -> out -> Send;\n\
             Fair = out -> Fair;\n\
             System = (Send [|{out}|] Fair) \\ {error};\n\
             root System",
        );
        assert!(matches!(t, Term::Hide(_, _)), "no μSystem wrapper: {t:?}");
        assert!(t.is_closed());
    }

    #[test]
    fn shared_reference_duplicates_the_solved_equation() {
        // P = Q |~| R; Q = a -> Q; R = b -> Q — both branches close their
        // own copy of Q's loop.
        let t = elaborate("alphabet {a,b}; P = Q |~| R; Q = a -> Q; R = b -> Q; root P");
        let mu_q = Term::mu("Q", Term::prefix(0, Term::var("Q")));
        let want = Term::int_choice(mu_q.clone(), Term::prefix(1, mu_q));
        assert_eq!(t.alpha_normalize(), want.alpha_normalize());
    }

    #[test]
    fn user_binder_shadowing_an_equation_name_is_freshened_not_captured() {
        // Inside P's body the user binds `mu P`, shadowing the equation P.
        // Q's body refers to the *equation* P, so after substitution that
        // reference must reach the outer μ, not the user's inner binder.
        let t = elaborate("alphabet {a,b}; P = mu P . a -> (P [] Q); Q = b -> P; root P");
        let want = Term::mu(
            "Out",
            Term::mu(
                "In",
                Term::prefix(
                    0,
                    Term::ext_choice(
                        Term::var("In"),
                        Term::prefix(1, Term::var("Out")),
                    ),
                ),
            ),
        );
        assert_eq!(t.alpha_normalize(), want.alpha_normalize());
    }
}
