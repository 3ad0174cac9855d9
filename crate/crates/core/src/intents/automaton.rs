use std::collections::BTreeSet;

use super::formula::{check_distinct, IntentFormula};
use super::MAX_PROPOSITIONS;
use crate::error::{Error, Result};

/// Index of an automaton state.
pub type StateId = usize;

/// Bit mask over an automaton's ordered proposition list.
pub type LabelMask = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AutomatonKind {
    /// Built from one formula; has a reject state and a single accepting state.
    PerHypothesis,
    /// Tracks visited subsets of all propositions; acceptance is assigned per hypothesis later.
    Shared,
}

/// Where a finite run currently stands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixVerdict {
    Satisfied,
    Violated,
    Pending,
}

/// Deterministic subset-tracking automaton for the safety/guarantee fragment.
///
/// A subset state's id is the bit mask of the propositions visited so far. For per-hypothesis
/// automata the reach propositions come first in [`propositions`](Self::propositions), so
/// subset ids run over `0..2^|reach|` and the reject state is `2^|reach|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyGuaranteeAutomaton {
    kind: AutomatonKind,
    propositions: Vec<String>,
    reach_mask: LabelMask,
    avoid_mask: LabelMask,
    subset_count: usize,
}

impl SafetyGuaranteeAutomaton {
    /// Direct subset construction for `formula`.
    pub fn for_formula(formula: &IntentFormula) -> Result<Self> {
        let propositions: Vec<String> = formula
            .reach()
            .iter()
            .chain(formula.avoid().iter())
            .cloned()
            .collect();
        if propositions.len() > MAX_PROPOSITIONS {
            return Err(Error::InvalidConfig(format!(
                "at most {MAX_PROPOSITIONS} propositions are supported"
            )));
        }
        let reach_bits = formula.reach().len();
        let reach_mask = (1u64 << reach_bits) - 1;
        let all = (1u64 << propositions.len()) - 1;
        Ok(SafetyGuaranteeAutomaton {
            kind: AutomatonKind::PerHypothesis,
            propositions,
            reach_mask,
            avoid_mask: all & !reach_mask,
            subset_count: 1 << reach_bits,
        })
    }

    /// Automaton for `F p0 & ... & F p(K-1)` whose states are all `2^K` visited subsets.
    pub fn shared<S: AsRef<str>>(propositions: &[S]) -> Result<Self> {
        if propositions.is_empty() {
            return Err(Error::NoPropositions);
        }
        check_distinct(propositions)?;
        if propositions.len() > MAX_PROPOSITIONS {
            return Err(Error::InvalidConfig(format!(
                "at most {MAX_PROPOSITIONS} propositions are supported"
            )));
        }
        let k = propositions.len();
        Ok(SafetyGuaranteeAutomaton {
            kind: AutomatonKind::Shared,
            propositions: propositions
                .iter()
                .map(|p| p.as_ref().to_string())
                .collect(),
            reach_mask: (1u64 << k) - 1,
            avoid_mask: 0,
            subset_count: 1 << k,
        })
    }

    pub fn kind(&self) -> AutomatonKind {
        self.kind
    }

    pub fn propositions(&self) -> &[String] {
        &self.propositions
    }

    /// The formula a per-hypothesis automaton was built from.
    pub fn formula(&self) -> Option<IntentFormula> {
        if self.kind != AutomatonKind::PerHypothesis {
            return None;
        }
        let in_reach = |i: usize| self.reach_mask >> i & 1 == 1;
        let pick = |want: bool| {
            self.propositions
                .iter()
                .enumerate()
                .filter(move |&(i, _)| in_reach(i) == want)
                .map(|(_, p)| p.clone())
        };
        IntentFormula::new(pick(false), pick(true)).ok()
    }

    pub fn state_count(&self) -> usize {
        match self.kind {
            AutomatonKind::PerHypothesis => self.subset_count + 1,
            AutomatonKind::Shared => self.subset_count,
        }
    }

    pub fn initial(&self) -> StateId {
        0
    }

    pub fn reject(&self) -> Option<StateId> {
        match self.kind {
            AutomatonKind::PerHypothesis => Some(self.subset_count),
            AutomatonKind::Shared => None,
        }
    }

    pub fn is_reject(&self, q: StateId) -> bool {
        self.reject() == Some(q)
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.kind == AutomatonKind::PerHypothesis && q == self.reach_mask as usize
    }

    pub fn accepting_states(&self) -> Vec<StateId> {
        (0..self.state_count())
            .filter(|&q| self.is_accepting(q))
            .collect()
    }

    /// Visited subset of a non-reject state.
    pub fn subset(&self, q: StateId) -> Option<LabelMask> {
        (q < self.subset_count).then_some(q as LabelMask)
    }

    pub fn verdict(&self, q: StateId) -> PrefixVerdict {
        if self.is_reject(q) {
            PrefixVerdict::Violated
        } else if self.is_accepting(q) {
            PrefixVerdict::Satisfied
        } else {
            PrefixVerdict::Pending
        }
    }

    /// Encodes a label set; names the automaton does not know are ignored.
    pub fn label_mask<'a, I>(&self, labels: I) -> LabelMask
    where
        I: IntoIterator<Item = &'a str>,
    {
        labels
            .into_iter()
            .filter_map(|name| self.propositions.iter().position(|p| p == name))
            .fold(0, |mask, i| mask | 1 << i)
    }

    pub fn step(&self, q: StateId, labels: LabelMask) -> StateId {
        match self.kind {
            AutomatonKind::Shared => q | (labels & self.reach_mask) as usize,
            AutomatonKind::PerHypothesis => {
                if self.is_reject(q) || labels & self.avoid_mask != 0 {
                    self.subset_count
                } else {
                    q | (labels & self.reach_mask) as usize
                }
            }
        }
    }

    /// Runs the automaton from the initial state over label sets given by name.
    pub fn run<'a, T, L>(&self, trace: T) -> StateId
    where
        T: IntoIterator<Item = L>,
        L: IntoIterator<Item = &'a str>,
    {
        trace.into_iter().fold(self.initial(), |q, labels| {
            self.step(q, self.label_mask(labels))
        })
    }
}

/// Per-hypothesis safety-guarantee automaton.
pub fn build_automaton(formula: &IntentFormula) -> Result<SafetyGuaranteeAutomaton> {
    SafetyGuaranteeAutomaton::for_formula(formula)
}

/// Shared subset automaton over `propositions`.
pub fn build_shared_automaton<S: AsRef<str>>(
    propositions: &[S],
) -> Result<SafetyGuaranteeAutomaton> {
    SafetyGuaranteeAutomaton::shared(propositions)
}

/// Classifies a finite trace directly from the formula, without automata.
///
/// Any avoided proposition in the trace violates the safety part; otherwise the prefix is
/// satisfied once every reach proposition has appeared.
pub fn evaluate_prefix(formula: &IntentFormula, trace: &[BTreeSet<String>]) -> PrefixVerdict {
    if trace
        .iter()
        .any(|labels| labels.iter().any(|l| formula.avoid().contains(l)))
    {
        return PrefixVerdict::Violated;
    }
    let covered = formula
        .reach()
        .iter()
        .all(|goal| trace.iter().any(|labels| labels.contains(goal)));
    if covered {
        PrefixVerdict::Satisfied
    } else {
        PrefixVerdict::Pending
    }
}
