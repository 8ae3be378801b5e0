//! Process syntax: terms, the `.cspl` parser and printer, equation
//! elaboration, and fragment classification.

pub mod ast;
pub mod bekic;
pub mod classify;
pub mod parse;
pub mod print;

pub use ast::Term;
pub use bekic::bekic_elaborate;
pub use classify::{classify, is_sequential, is_sfs, ClassifyError, ProcessClass};
pub use parse::{parse, ParseError, Spec};
pub use print::{display_term, print_spec, print_term};
