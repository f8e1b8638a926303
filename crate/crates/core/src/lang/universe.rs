//! Explicit enumeration of a language: the oracle for extension and
//! weakness counting.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lang::{Statement, Vocabulary, DEFAULT_ENUMERATION_BUDGET};

/// An explicit list of statements with superset queries. Built either
/// by exhaustive enumeration of every jointly satisfiable subset of a
/// vocabulary, from the distinct truesets only (the closed world of
/// complete statements), or from an explicitly supplied list.
#[derive(Debug, Clone)]
pub struct LanguageUniverse {
    labels: Vec<String>,
    /// Sorted, deduplicated.
    statements: Vec<Statement>,
    /// The maximal elements used for satisfiability tests.
    complete: Vec<Statement>,
}

impl LanguageUniverse {
    /// Every jointly satisfiable subset of the vocabulary. Refuses
    /// vocabularies whose `2^|V|` exceeds the enumeration budget.
    pub fn enumerate(vocab: &Vocabulary) -> Result<Arc<Self>> {
        Self::enumerate_budgeted(vocab, DEFAULT_ENUMERATION_BUDGET)
    }

    pub fn enumerate_budgeted(vocab: &Vocabulary, budget: u128) -> Result<Arc<Self>> {
        let n = vocab.len();
        let candidates = 1u128 << n;
        if candidates > budget {
            return Err(Error::BudgetExceeded { candidates, budget });
        }
        let mut distinct: Vec<Statement> = vocab.truesets().to_vec();
        distinct.sort();
        distinct.dedup();
        let maximal: Vec<Statement> = distinct
            .iter()
            .filter(|a| {
                !distinct
                    .iter()
                    .any(|b| *a != b && a.is_subset_of(b))
            })
            .copied()
            .collect();
        let mut statements = Vec::new();
        for raw in 0..candidates {
            let m = Statement::from_raw(raw);
            if maximal.iter().any(|t| m.is_subset_of(t)) {
                statements.push(m);
            }
        }
        Ok(Arc::new(LanguageUniverse {
            labels: vocab.programs().iter().map(|p| p.label.clone()).collect(),
            statements,
            complete: maximal,
        }))
    }

    /// Only the distinct truesets of the vocabulary's states: the
    /// closed world of complete statements.
    pub fn of_truesets(vocab: &Vocabulary) -> Arc<Self> {
        let mut statements: Vec<Statement> = vocab.truesets().to_vec();
        statements.sort();
        statements.dedup();
        Arc::new(LanguageUniverse {
            labels: vocab.programs().iter().map(|p| p.label.clone()).collect(),
            complete: statements.clone(),
            statements,
        })
    }

    /// A universe supplied as an explicit statement list (no state
    /// space behind it).
    pub fn explicit(labels: Vec<String>, mut statements: Vec<Statement>) -> Arc<Self> {
        statements.sort();
        statements.dedup();
        Arc::new(LanguageUniverse {
            labels,
            complete: statements.clone(),
            statements,
        })
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    /// The maximal statements (truesets or the explicit list).
    pub fn complete_statements(&self) -> &[Statement] {
        &self.complete
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_of(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn id_of_label(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Parse `a b c` or `{a b c}` (whitespace- or comma-separated
    /// labels) into a statement.
    pub fn parse_statement(&self, text: &str) -> Result<Statement> {
        let trimmed = text.trim().trim_start_matches('{').trim_end_matches('}');
        let mut s = Statement::EMPTY;
        for token in trimmed.split(|c: char| c.is_whitespace() || c == ',') {
            if token.is_empty() {
                continue;
            }
            s = s.with(self.id_of_label(token)?);
        }
        Ok(s)
    }

    pub fn contains(&self, m: &Statement) -> bool {
        self.statements.binary_search(m).is_ok()
    }

    /// Satisfiable within this universe: a subset of some maximal
    /// statement.
    pub fn is_satisfiable(&self, m: &Statement) -> bool {
        self.complete.iter().any(|t| m.is_subset_of(t))
    }

    /// `Z_m`: every statement in the universe that is a superset of `m`.
    pub fn extension(&self, m: &Statement) -> Result<Vec<Statement>> {
        if !self.is_satisfiable(m) {
            return Err(Error::Unsatisfiable);
        }
        Ok(self
            .statements
            .iter()
            .filter(|s| m.is_subset_of(s))
            .copied()
            .collect())
    }

    /// `Z_A`: the union of member extensions.
    pub fn extension_of_set(&self, set: &[Statement]) -> Result<Vec<Statement>> {
        let mut out = Vec::new();
        for m in set {
            out.extend(self.extension(m)?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// `w(m) = |Z_m|`.
    pub fn weakness_exact(&self, m: &Statement) -> Result<usize> {
        if !self.is_satisfiable(m) {
            return Err(Error::Unsatisfiable);
        }
        Ok(self
            .statements
            .iter()
            .filter(|s| m.is_subset_of(s))
            .count())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{StateSpace, VocabularyRecipe};

    #[test]
    fn two_bit_literal_language_has_nine_statements() {
        // Oracle: 3^2 consistent partial assignments (each bit unset, 0 or 1).
        let vocab = Vocabulary::build(
            &VocabularyRecipe::Literals,
            StateSpace::new(2).unwrap(),
        )
        .unwrap();
        let universe = LanguageUniverse::enumerate(&vocab).unwrap();
        assert_eq!(universe.len(), 9);
        assert!(universe.contains(&Statement::EMPTY));
    }

    #[test]
    fn every_trueset_is_in_the_enumerated_language() {
        let vocab = Vocabulary::build(
            &VocabularyRecipe::LiteralsEq,
            StateSpace::new(3).unwrap(),
        )
        .unwrap();
        let universe = LanguageUniverse::enumerate(&vocab).unwrap();
        for state in 0..vocab.space().state_count() {
            assert!(universe.contains(&vocab.trueset(state)));
        }
        assert!(universe.contains(&Statement::EMPTY));
    }

    #[test]
    fn budget_refusal() {
        let vocab = Vocabulary::build(
            &VocabularyRecipe::LiteralsEq,
            StateSpace::new(8).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            LanguageUniverse::enumerate(&vocab),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn extension_closure_property() {
        let vocab = Vocabulary::build(
            &VocabularyRecipe::LiteralsEq,
            StateSpace::new(3).unwrap(),
        )
        .unwrap();
        let universe = LanguageUniverse::enumerate(&vocab).unwrap();
        let m = vocab.trueset(0).intersection(&vocab.trueset(1));
        let ext = universe.extension(&m).unwrap();
        assert!(ext.contains(&m));
        for s in universe.statements() {
            assert_eq!(ext.contains(s), m.is_subset_of(s));
        }
    }

    #[test]
    fn maximal_trueset_extension_is_itself() {
        let vocab = Vocabulary::build(
            &VocabularyRecipe::Literals,
            StateSpace::new(3).unwrap(),
        )
        .unwrap();
        let universe = LanguageUniverse::enumerate(&vocab).unwrap();
        let t = vocab.trueset(5);
        assert_eq!(universe.extension(&t).unwrap(), vec![t]);
    }
}
