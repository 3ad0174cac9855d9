use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Conjunction of "never enter" and "eventually visit" requirements.
///
/// Written as `F b1 & ... & G !a1 & ...`: the agent must reach every proposition in `reach`
/// (in any order) while never entering a proposition in `avoid`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntentFormula {
    avoid: BTreeSet<String>,
    reach: BTreeSet<String>,
}

impl IntentFormula {
    pub fn new<A, R>(avoid: A, reach: R) -> Result<Self>
    where
        A: IntoIterator,
        A::Item: Into<String>,
        R: IntoIterator,
        R::Item: Into<String>,
    {
        let avoid: BTreeSet<String> = avoid.into_iter().map(Into::into).collect();
        let reach: BTreeSet<String> = reach.into_iter().map(Into::into).collect();
        if let Some(both) = avoid.intersection(&reach).next() {
            return Err(Error::ConflictingProposition(both.clone()));
        }
        Ok(IntentFormula { avoid, reach })
    }

    pub fn avoid(&self) -> &BTreeSet<String> {
        &self.avoid
    }

    pub fn reach(&self) -> &BTreeSet<String> {
        &self.reach
    }

    /// Every proposition the formula mentions.
    pub fn propositions(&self) -> BTreeSet<&str> {
        self.avoid
            .iter()
            .chain(self.reach.iter())
            .map(String::as_str)
            .collect()
    }

    /// Canonical string form, used as the stable hypothesis identifier.
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for IntentFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .reach
            .iter()
            .map(|p| format!("F {p}"))
            .chain(self.avoid.iter().map(|p| format!("G !{p}")))
            .collect();
        if terms.is_empty() {
            f.write_str("true")
        } else {
            f.write_str(&terms.join(" & "))
        }
    }
}

impl FromStr for IntentFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_formula(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Bang,
    And,
    // Recognized LTL punctuation that the fragment does not admit.
    Foreign(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, ch)) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
        } else if ch.is_ascii_alphanumeric() || ch == '_' {
            let mut ident = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            tokens.push((pos, Token::Ident(ident)));
        } else {
            chars.next();
            let token = match ch {
                '!' => Token::Bang,
                '&' => Token::And,
                '|' | '(' | ')' | '-' | '>' | '<' | '[' | ']' => Token::Foreign(ch),
                other => {
                    return Err(Error::FormulaSyntax {
                        position: pos,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            tokens.push((pos, token));
        }
    }
    Ok(tokens)
}

fn is_keyword(name: &str) -> bool {
    matches!(name, "F" | "G" | "X" | "U" | "R" | "W" | "true" | "false")
}

/// Parses `term ("&" term)*` with `term ::= "F" name | "G" "!" name`.
pub fn parse_formula(text: &str) -> Result<IntentFormula> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(Error::FormulaSyntax {
            position: 0,
            message: "empty formula".into(),
        });
    }
    if tokens.len() == 1 && tokens[0].1 == Token::Ident("true".into()) {
        return IntentFormula::new(Vec::<String>::new(), Vec::<String>::new());
    }
    let outside = || Error::OutsideFragment(text.trim().to_string());

    let mut avoid = BTreeSet::new();
    let mut reach = BTreeSet::new();
    for term in tokens.split(|(_, t)| *t == Token::And) {
        if term.is_empty() {
            let position = tokens
                .iter()
                .find(|(_, t)| *t == Token::And)
                .map_or(0, |(p, _)| *p);
            return Err(Error::FormulaSyntax {
                position,
                message: "empty conjunct".into(),
            });
        }
        let kinds: Vec<&Token> = term.iter().map(|(_, t)| t).collect();
        match kinds.as_slice() {
            [Token::Ident(op), Token::Ident(name)] if op == "F" && !is_keyword(name) => {
                reach.insert(name.clone());
            }
            [Token::Ident(op), Token::Bang, Token::Ident(name)]
                if op == "G" && !is_keyword(name) =>
            {
                avoid.insert(name.clone());
            }
            _ => return Err(outside()),
        }
    }
    IntentFormula::new(avoid, reach)
}

/// All `2^K` avoid/reach partitions of `propositions`.
///
/// The reach set of hypothesis `i` holds `propositions[j]` exactly when bit `j` of `i` is set,
/// so index 0 is "visit nothing" and the last index is "visit all".
pub fn enumerate_hypotheses<S: AsRef<str>>(propositions: &[S]) -> Result<Vec<IntentFormula>> {
    if propositions.is_empty() {
        return Err(Error::NoPropositions);
    }
    check_distinct(propositions)?;
    if propositions.len() > super::MAX_PROPOSITIONS {
        return Err(Error::InvalidConfig(format!(
            "at most {} propositions are supported",
            super::MAX_PROPOSITIONS
        )));
    }
    let k = propositions.len();
    (0..1usize << k)
        .map(|bits| {
            let (reach, avoid): (Vec<_>, Vec<_>) = propositions
                .iter()
                .enumerate()
                .partition(|(j, _)| bits >> j & 1 == 1);
            IntentFormula::new(
                avoid.into_iter().map(|(_, p)| p.as_ref().to_string()),
                reach.into_iter().map(|(_, p)| p.as_ref().to_string()),
            )
        })
        .collect()
}

pub(crate) fn check_distinct<S: AsRef<str>>(names: &[S]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for name in names {
        if !seen.insert(name.as_ref()) {
            return Err(Error::DuplicateProposition(name.as_ref().to_string()));
        }
    }
    Ok(())
}

/// Formula templates with holes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    /// `G !_`
    Avoid,
    /// `F _`
    Cover,
    /// `F _ & G !_`
    ReachWhileAvoid,
    /// `F (_ & F _)`; not expressible in the avoid/reach fragment.
    Sequence,
}

impl Pattern {
    fn holes(self) -> usize {
        match self {
            Pattern::Avoid | Pattern::Cover => 1,
            Pattern::ReachWhileAvoid | Pattern::Sequence => 2,
        }
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "avoid" => Ok(Pattern::Avoid),
            "cover" => Ok(Pattern::Cover),
            "reach-while-avoid" => Ok(Pattern::ReachWhileAvoid),
            "sequence" => Ok(Pattern::Sequence),
            other => Err(Error::UnsupportedPattern(other.to_string())),
        }
    }
}

/// Fills the pattern's holes with every assignment of distinct propositions.
pub fn expand_pattern<S: AsRef<str>>(
    pattern: Pattern,
    propositions: &[S],
) -> Result<Vec<IntentFormula>> {
    if pattern == Pattern::Sequence {
        return Err(Error::UnsupportedPattern("sequence".into()));
    }
    let names: Vec<&str> = {
        let mut seen = BTreeSet::new();
        propositions
            .iter()
            .map(AsRef::as_ref)
            .filter(|p| seen.insert(*p))
            .collect()
    };
    if names.len() < pattern.holes() {
        return Err(Error::NotEnoughPropositions {
            needed: pattern.holes(),
            available: names.len(),
        });
    }
    let none = Vec::<&str>::new;
    let mut out: Vec<IntentFormula> = Vec::new();
    let mut push = |f: IntentFormula| {
        if !out.contains(&f) {
            out.push(f);
        }
    };
    match pattern {
        Pattern::Avoid => {
            for p in &names {
                push(IntentFormula::new([*p], none())?);
            }
        }
        Pattern::Cover => {
            for p in &names {
                push(IntentFormula::new(none(), [*p])?);
            }
        }
        Pattern::ReachWhileAvoid => {
            for goal in &names {
                for hazard in names.iter().filter(|h| *h != goal) {
                    push(IntentFormula::new([*hazard], [*goal])?);
                }
            }
        }
        Pattern::Sequence => unreachable!(),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(text: &str) -> IntentFormula {
        parse_formula(text).unwrap()
    }

    #[test]
    fn parses_conjunctive_intent() {
        let phi = f("F p2 & F pg & G !p0");
        assert_eq!(phi.reach().iter().collect::<Vec<_>>(), ["p2", "pg"]);
        assert_eq!(phi.avoid().iter().collect::<Vec<_>>(), ["p0"]);
        assert_eq!(phi.canonical(), "F p2 & F pg & G !p0");
    }

    #[test]
    fn single_safety_term() {
        let phi = f("G !a");
        assert!(phi.reach().is_empty());
        assert_eq!(phi.avoid().len(), 1);
    }

    #[test]
    fn whitespace_insensitive_and_canonical() {
        let phi = f("  G!c&F b&   F a ");
        assert_eq!(phi.canonical(), "F a & F b & G !c");
        assert_eq!(f(&phi.canonical()), phi);
    }

    #[test]
    fn conflicting_sets_rejected() {
        assert!(matches!(
            parse_formula("F a & G !a"),
            Err(Error::ConflictingProposition(_))
        ));
    }

    #[test]
    fn recurrence_is_outside_fragment() {
        let err = parse_formula("G F p").unwrap_err();
        assert!(err
            .to_string()
            .contains("outside safety/guarantee fragment"));
        for text in ["F (a & F b)", "a", "G a", "X a", "F a | F b", "F F"] {
            assert!(
                matches!(parse_formula(text), Err(Error::OutsideFragment(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(
            parse_formula(""),
            Err(Error::FormulaSyntax { .. })
        ));
        assert!(matches!(
            parse_formula("F a &"),
            Err(Error::FormulaSyntax { .. })
        ));
        assert!(matches!(
            parse_formula("F a # b"),
            Err(Error::FormulaSyntax { position: 4, .. })
        ));
    }

    #[test]
    fn hypothesis_counts() {
        assert_eq!(enumerate_hypotheses(&["a", "b", "c"]).unwrap().len(), 8);
        assert_eq!(
            enumerate_hypotheses(&["a", "b", "c", "d", "e"])
                .unwrap()
                .len(),
            32
        );
        let one = enumerate_hypotheses(&["p"]).unwrap();
        assert_eq!(one, vec![f("G !p"), f("F p")]);
    }

    #[test]
    fn hypotheses_are_partitions() {
        let props = ["p0", "p1", "p2", "p3"];
        let hyps = enumerate_hypotheses(&props).unwrap();
        let distinct: BTreeSet<_> = hyps.iter().collect();
        assert_eq!(distinct.len(), 16);
        for h in &hyps {
            assert!(h.avoid().is_disjoint(h.reach()));
            let union: BTreeSet<&str> = h.propositions();
            assert_eq!(union, props.iter().copied().collect());
        }
        assert!(hyps[0].reach().is_empty());
        assert!(hyps[15].avoid().is_empty());
    }

    #[test]
    fn duplicate_propositions_rejected() {
        assert!(matches!(
            enumerate_hypotheses(&["a", "a"]),
            Err(Error::DuplicateProposition(_))
        ));
        assert!(matches!(
            enumerate_hypotheses::<&str>(&[]),
            Err(Error::NoPropositions)
        ));
    }

    #[test]
    fn pattern_expansion() {
        assert_eq!(
            expand_pattern(Pattern::Avoid, &["a", "b"]).unwrap(),
            vec![f("G !a"), f("G !b")]
        );
        assert_eq!(
            expand_pattern(Pattern::ReachWhileAvoid, &["a", "b"]).unwrap(),
            vec![f("F a & G !b"), f("F b & G !a")]
        );
        assert_eq!(
            expand_pattern(Pattern::Cover, &["a"]).unwrap(),
            vec![f("F a")]
        );
        assert_eq!(
            expand_pattern(Pattern::Cover, &["a", "a"]).unwrap(),
            vec![f("F a")]
        );
    }

    #[test]
    fn pattern_errors() {
        assert!(matches!(
            expand_pattern(Pattern::Sequence, &["a", "b"]),
            Err(Error::UnsupportedPattern(_))
        ));
        assert!(matches!(
            expand_pattern(Pattern::ReachWhileAvoid, &["a"]),
            Err(Error::NotEnoughPropositions {
                needed: 2,
                available: 1
            })
        ));
        assert_eq!(
            "reach-while-avoid".parse::<Pattern>().unwrap(),
            Pattern::ReachWhileAvoid
        );
    }
}
