//! Pretty-printer for terms and specifications.
//!
//! Emits the same dialect [`parse`](crate::syntax::parse) reads, inserting
//! parentheses only where the precedence table demands them, so
//! `parse(print(spec))` reproduces `spec` exactly.

use std::fmt;

use crate::setlogic::Alphabet;
use crate::syntax::ast::Term;
use crate::syntax::parse::Spec;

/// Binding strength, loosest to tightest: parallel, internal choice,
/// external choice, sequencing, prefixing, hide/rename.
const LVL_PAR: u8 = 0;
const LVL_INT: u8 = 1;
const LVL_EXT: u8 = 2;
const LVL_SEQ: u8 = 3;
const LVL_PREFIX: u8 = 4;
const LVL_POSTFIX: u8 = 5;

/// Displays a term in surface syntax; events are shown by name.
pub struct TermDisplay<'a> {
    term: &'a Term,
    alphabet: &'a Alphabet,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write(f, self.term, self.alphabet, LVL_PAR, true)
    }
}

pub fn display_term<'a>(term: &'a Term, alphabet: &'a Alphabet) -> TermDisplay<'a> {
    TermDisplay { term, alphabet }
}

pub fn print_term(term: &Term, alphabet: &Alphabet) -> String {
    display_term(term, alphabet).to_string()
}

/// Render a full specification; output parses back to an equal `Spec`.
pub fn print_spec(spec: &Spec) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    out.push_str("alphabet {");
    for (i, name) in spec.alphabet.names().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(name);
    }
    out.push_str("};\n");
    for (key, value) in &spec.options {
        let _ = writeln!(out, "option {key} = {value};");
    }
    for (name, term) in &spec.equations {
        let _ = writeln!(out, "{name} = {};", display_term(term, &spec.alphabet));
    }
    let _ = writeln!(out, "root {};", spec.root);
    out
}

fn write_set(
    f: &mut fmt::Formatter<'_>,
    set: crate::setlogic::EventSet,
    alphabet: &Alphabet,
) -> fmt::Result {
    write!(f, "{{")?;
    for (i, e) in set.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{}", alphabet.name(e))?;
    }
    write!(f, "}}")
}

/// `level` is the loosest operator the context tolerates unparenthesized;
/// `tail` is true when nothing follows the term's text in the current scope,
/// which is what makes an unparenthesized maximal-munch `mu` safe.
fn write(
    f: &mut fmt::Formatter<'_>,
    t: &Term,
    ab: &Alphabet,
    level: u8,
    tail: bool,
) -> fmt::Result {
    let paren = |f: &mut fmt::Formatter<'_>, t: &Term| -> fmt::Result {
        write!(f, "(")?;
        write(f, t, ab, LVL_PAR, true)?;
        write!(f, ")")
    };
    match t {
        Term::Stop => write!(f, "STOP"),
        Term::Skip => write!(f, "SKIP"),
        Term::Div => write!(f, "DIV"),
        Term::Var(x) => write!(f, "{x}"),
        Term::Prefix(e, p) => {
            if level > LVL_PREFIX {
                return paren(f, t);
            }
            write!(f, "{} -> ", ab.name(*e))?;
            write(f, p, ab, LVL_PREFIX, tail)
        }
        Term::IntChoice(p, q) => {
            if level > LVL_INT {
                return paren(f, t);
            }
            write(f, p, ab, LVL_INT, false)?;
            write!(f, " |~| ")?;
            write(f, q, ab, LVL_INT + 1, tail)
        }
        Term::ExtChoice(p, q) => {
            if level > LVL_EXT {
                return paren(f, t);
            }
            write(f, p, ab, LVL_EXT, false)?;
            write!(f, " [] ")?;
            write(f, q, ab, LVL_EXT + 1, tail)
        }
        Term::Seq(p, q) => {
            if level > LVL_SEQ {
                return paren(f, t);
            }
            write(f, p, ab, LVL_SEQ, false)?;
            write!(f, " ; ")?;
            write(f, q, ab, LVL_SEQ + 1, tail)
        }
        Term::Parallel(p, sync, q) => {
            if level > LVL_PAR {
                return paren(f, t);
            }
            write(f, p, ab, LVL_PAR, false)?;
            write!(f, " [|")?;
            write_set(f, *sync, ab)?;
            write!(f, "|] ")?;
            write(f, q, ab, LVL_PAR + 1, tail)
        }
        Term::Hide(p, set) => {
            if level > LVL_POSTFIX {
                return paren(f, t);
            }
            write(f, p, ab, LVL_POSTFIX, false)?;
            write!(f, " \\ ")?;
            write_set(f, *set, ab)
        }
        Term::Rename(p, rel) => {
            if level > LVL_POSTFIX {
                return paren(f, t);
            }
            write(f, p, ab, LVL_POSTFIX, false)?;
            write!(f, "[[")?;
            // Pairs `(x, x)` that are an event's sole image are what
            // totalization adds back, so they can be left out — unless
            // nothing else remains (the grammar wants at least one pair).
            let pairs = rel.pairs();
            let shown: Vec<_> = pairs
                .iter()
                .filter(|(src, tgt)| src != tgt || rel.image_of(*src).len() > 1)
                .collect();
            let shown = if shown.is_empty() {
                vec![pairs.first().expect("renaming over a non-empty alphabet")]
            } else {
                shown
            };
            for (i, (src, tgt)) in shown.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{} <- {}", ab.name(*src), ab.name(*tgt))?;
            }
            write!(f, "]]")
        }
        Term::Mu(x, p) => {
            if !tail {
                return paren(f, t);
            }
            write!(f, "mu {x} . ")?;
            write(f, p, ab, LVL_PAR, true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setlogic::{EventSet, RenamingRelation};
    use crate::syntax::parse::parse;

    fn roundtrip(text: &str) {
        let spec = parse(text).unwrap_or_else(|e| panic!("setup parse failed: {e}"));
        let printed = print_spec(&spec);
        let reparsed =
            parse(&printed).unwrap_or_else(|e| panic!("reparse failed: {e}\n--- printed:\n{printed}"));
        assert_eq!(spec.alphabet.names(), reparsed.alphabet.names());
        assert_eq!(spec.equations, reparsed.equations, "printed:\n{printed}");
        assert_eq!(spec.root, reparsed.root);
        assert_eq!(spec.options, reparsed.options);
    }

    #[test]
    fn roundtrips_cover_every_operator() {
        roundtrip("alphabet {a}; P = a -> STOP; root P");
        roundtrip("alphabet {a,b}; P = (a -> STOP |~| b -> SKIP) [] DIV; root P");
        roundtrip("alphabet {a,b}; P = mu X . a -> (X \\ {b}) |~| b -> (X \\ {a}); root P");
        roundtrip("alphabet {a,b,c}; P = (Q [|{a,b}|] Q) \\ {b}; Q = a -> Q [] b -> c -> Q; root P");
        roundtrip("alphabet {a,b}; P = (SKIP ; a -> SKIP ; b -> STOP)[[a <- b, a <- a]]; root P");
        roundtrip("alphabet {a}; option mode = sfs; P = mu X . SKIP |~| (a -> (X ; X)); root P");
    }

    #[test]
    fn mu_in_nontail_position_gets_parentheses() {
        let spec = parse("alphabet {a}; P = (mu X . a -> X) \\ {a}; root P").unwrap();
        let printed = print_term(spec.root_term(), &spec.alphabet);
        assert_eq!(printed, "(mu X . a -> X) \\ {a}");
        roundtrip("alphabet {a}; P = (mu X . a -> X) \\ {a}; root P");
        roundtrip("alphabet {a,b}; P = (mu X . a -> X) [] (mu Y . b -> Y) ; STOP; root P");
    }

    #[test]
    fn right_nested_operators_keep_parentheses() {
        // Right-nested seq must not silently reassociate.
        let spec = parse("alphabet {a}; P = SKIP ; (SKIP ; SKIP); root P").unwrap();
        assert_eq!(
            print_term(spec.root_term(), &spec.alphabet),
            "SKIP ; (SKIP ; SKIP)"
        );
        roundtrip("alphabet {a}; P = SKIP ; (SKIP ; SKIP); root P");
    }

    #[test]
    fn identity_renaming_still_prints_a_pair() {
        let spec = parse("alphabet {a,b}; P = STOP; root P").unwrap();
        let t = Term::rename(Term::Stop, RenamingRelation::identity(2));
        let printed = print_term(&t, &spec.alphabet);
        assert_eq!(printed, "STOP[[a <- a]]");
    }

    #[test]
    fn hidden_set_prints_all_members() {
        let spec = parse("alphabet {a,b,c}; P = STOP; root P").unwrap();
        let t = Term::hide(Term::Skip, EventSet::from_iter([0u8, 2]));
        assert_eq!(print_term(&t, &spec.alphabet), "SKIP \\ {a, c}");
    }
}
