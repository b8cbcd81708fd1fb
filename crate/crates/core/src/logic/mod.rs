//! Formula language: terms, formulas, the concrete grammar, satisfaction,
//! definable sets and atomic one-variable types.

mod ast;
mod eval;
mod parse;
mod types;

pub use ast::{Formula, FormulaDisplay, Term, TermDisplay};
pub use eval::{definable_set, eval_formula, tuple_width, EvalError, Valuation};
pub use parse::{parse_formula, ParseError};
pub use types::{atomic_type, atomic_types, delta2_formulas, sort_partition, AtomicType};

pub(crate) use eval::eval_tuple;
