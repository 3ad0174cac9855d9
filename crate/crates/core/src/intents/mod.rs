//! Intent formulas of the safety/guarantee fragment and their automata.

mod automaton;
mod formula;

pub use automaton::{
    build_automaton, build_shared_automaton, evaluate_prefix, AutomatonKind, LabelMask,
    PrefixVerdict, SafetyGuaranteeAutomaton, StateId,
};
pub use formula::{enumerate_hypotheses, expand_pattern, parse_formula, IntentFormula, Pattern};

/// Upper bound on propositions per automaton; state counts grow as `2^K`.
pub const MAX_PROPOSITIONS: usize = 20;
