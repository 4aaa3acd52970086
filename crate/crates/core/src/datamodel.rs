//! The ground representation everything else builds on: fixed-point
//! numbers, terms, facts, substitutions and the indexed fact store.

mod fact;
mod numeric;
mod term;

pub use fact::{Fact, FactBase, FactError};
pub use numeric::{ArithmeticKind, Numeric, NumericParseError, SCALE};
pub use term::{apply, match_term, PredSig, Substitution, Term};
