//! Finite implementable languages.
//!
//! A state space enumerates every assignment of a fixed number of binary
//! state variables. A program is a declarative test over states, stored
//! as its truth value on every state. A vocabulary is a finite ordered
//! set of programs, and a statement is a jointly satisfiable subset of
//! the vocabulary. Weakness counting comes in three tiers: exact
//! enumeration over a universe, inclusion-exclusion over maximal
//! truesets, and the satisfying-state surrogate.

mod equations;
mod formula;
mod universe;

pub use formula::parse_formula;
pub use universe::LanguageUniverse;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Maximal number of maximal truesets the inclusion-exclusion weakness
/// path will expand (2^20 terms).
pub const INCLUSION_EXCLUSION_LIMIT: usize = 20;

/// Default cap on vocabulary size. Statements are program-id bitmasks,
/// so this can never exceed `MAX_PROGRAMS`.
pub const DEFAULT_PROGRAM_CAP: usize = MAX_PROGRAMS;

/// Default budget on `2^|V|` candidate subsets for full language
/// enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 22;

/// A finite space of `2^bit_count` states. The state identified by
/// integer `k` assigns bit `i` the value of bit `i` of `k`'s big-endian
/// `bit_count`-wide expansion, bit 0 leftmost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    bit_count: u32,
}

impl StateSpace {
    pub fn new(bit_count: u32) -> Result<Self> {
        if bit_count == 0 || bit_count > 16 {
            return Err(Error::BadBitCount(bit_count));
        }
        Ok(StateSpace { bit_count })
    }

    pub fn bit_count(&self) -> u32 {
        self.bit_count
    }

    pub fn state_count(&self) -> usize {
        1usize << self.bit_count
    }

    /// Value of bit `index` (0 = leftmost / most significant) in state `state`.
    pub fn bit(&self, state: usize, index: u32) -> bool {
        debug_assert!(index < self.bit_count);
        (state >> (self.bit_count - 1 - index)) & 1 == 1
    }
}

/// A set of states, one bit per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    words: Vec<u64>,
    len: usize,
}

impl StateSet {
    pub fn empty(len: usize) -> Self {
        StateSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, state: usize) {
        debug_assert!(state < self.len);
        self.words[state / 64] |= 1 << (state % 64);
    }

    pub fn contains(&self, state: usize) -> bool {
        self.words[state / 64] >> (state % 64) & 1 == 1
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_subset_of(&self, other: &StateSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.contains(i))
    }

    /// Compare two truth vectors as integers (state 0 is the least
    /// significant bit). Used for deterministic vocabulary ordering.
    pub fn cmp_as_integer(&self, other: &StateSet) -> std::cmp::Ordering {
        self.words.iter().rev().cmp(other.words.iter().rev())
    }

    /// Hex rendering of the truth vector as an integer, for debugging.
    pub fn to_hex(&self) -> String {
        let mut out = String::new();
        let nibbles = self.len.div_ceil(4);
        for n in (0..nibbles).rev() {
            let mut v = 0u8;
            for b in 0..4 {
                let i = n * 4 + b;
                if i < self.len && self.contains(i) {
                    v |= 1 << b;
                }
            }
            out.push(char::from_digit(v as u32, 16).unwrap());
        }
        out
    }
}

/// Number of 64-bit words in a program-id mask.
pub const STATEMENT_WORDS: usize = 348;
/// Hard ceiling on vocabulary size imposed by the mask width.
pub const MAX_PROGRAMS: usize = STATEMENT_WORDS * 64;

/// A set of program ids, stored as a fixed-width mask of
/// `STATEMENT_WORDS * 64` bits. Doubles as situation, decision, and
/// model depending on role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Statement([u64; STATEMENT_WORDS]);

impl Default for Statement {
    fn default() -> Self {
        Statement::EMPTY
    }
}

impl PartialOrd for Statement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Statement {
    /// Compares as integers: program 0 is the least significant bit.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.iter().rev().cmp(other.0.iter().rev())
    }
}

impl Statement {
    pub const EMPTY: Statement = Statement([0; STATEMENT_WORDS]);
    pub const FULL: Statement = Statement([u64::MAX; STATEMENT_WORDS]);

    pub fn singleton(id: usize) -> Self {
        Statement::EMPTY.with(id)
    }

    pub fn from_ids(ids: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Statement::EMPTY;
        for id in ids {
            s = s.with(id);
        }
        s
    }

    pub fn with(mut self, id: usize) -> Self {
        debug_assert!(id < MAX_PROGRAMS);
        self.0[id / 64] |= 1 << (id % 64);
        self
    }

    pub fn without(mut self, id: usize) -> Self {
        self.0[id / 64] &= !(1 << (id % 64));
        self
    }

    pub fn contains(&self, id: usize) -> bool {
        self.0[id / 64] >> (id % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_subset_of(&self, other: &Statement) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn zip_words(mut self, other: &Statement, f: impl Fn(u64, u64) -> u64) -> Statement {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = f(*a, *b);
        }
        self
    }

    pub fn union(&self, other: &Statement) -> Statement {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Statement) -> Statement {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Statement) -> Statement {
        self.zip_words(other, |a, b| a & !b)
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, w)| {
            let mut w = *w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    /// The underlying mask words, lowest program ids first.
    pub fn words(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    /// The low 128 bits as an integer; only meaningful for small
    /// vocabularies (enumeration, tests).
    pub fn raw(&self) -> u128 {
        debug_assert!(self.0[2..].iter().all(|w| *w == 0));
        (self.0[1] as u128) << 64 | self.0[0] as u128
    }

    pub fn from_raw(raw: u128) -> Self {
        let mut s = Statement::EMPTY;
        s.0[0] = raw as u64;
        s.0[1] = (raw >> 64) as u64;
        s
    }
}

/// One declarative test: an id into the vocabulary, the truth bit-vector
/// over all states, and a human-readable formula label.
#[derive(Debug, Clone)]
pub struct Program {
    pub id: usize,
    pub truth: StateSet,
    pub label: String,
}

/// How a vocabulary is generated.
#[derive(Debug, Clone, PartialEq)]
pub enum VocabularyRecipe {
    /// `bit_i = 1` and `bit_i = 0` for every bit.
    Literals,
    /// Literals plus `bit_i = bit_j` and `bit_i != bit_j` for all i < j.
    LiteralsEq,
    /// All distinct truth vectors of depth-at-most-2 formulas over
    /// literals (binary connective applied to two literals).
    Depth2,
    /// Literals, single-bit output equations, and conjunctive pair
    /// equations for 8-bit arithmetic spaces (four input bits followed
    /// by four output bits).
    Equations,
    /// As `Equations`, with equation bodies of up to four monomials.
    Rich,
    /// An explicit `(label, formula)` list.
    Explicit {
        formulas: Vec<(String, String)>,
        keep_tautologies: bool,
    },
}

impl VocabularyRecipe {
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "literals" => Ok(VocabularyRecipe::Literals),
            "literals+eq" => Ok(VocabularyRecipe::LiteralsEq),
            "depth2" => Ok(VocabularyRecipe::Depth2),
            "equations" => Ok(VocabularyRecipe::Equations),
            "rich" => Ok(VocabularyRecipe::Rich),
            other => Err(Error::Config(format!("unknown vocabulary preset `{other}`"))),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            VocabularyRecipe::Literals => "literals".into(),
            VocabularyRecipe::LiteralsEq => "literals+eq".into(),
            VocabularyRecipe::Depth2 => "depth2".into(),
            VocabularyRecipe::Equations => "equations".into(),
            VocabularyRecipe::Rich => "rich".into(),
            VocabularyRecipe::Explicit { formulas, .. } => {
                format!("explicit({} formulas)", formulas.len())
            }
        }
    }
}

/// A finite ordered set of deduplicated programs over one state space.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    programs: Vec<Program>,
    space: StateSpace,
    recipe: String,
    /// Trueset of every state, as a program-id mask.
    truesets: Vec<Statement>,
}

impl Vocabulary {
    /// Build a vocabulary from a recipe. Contradictions (false
    /// everywhere) are always removed; tautologies are removed unless
    /// the recipe keeps them; programs are deduplicated by truth vector
    /// and ordered by (truth vector as integer, label).
    pub fn build(recipe: &VocabularyRecipe, space: StateSpace) -> Result<Arc<Vocabulary>> {
        Self::build_capped(recipe, space, DEFAULT_PROGRAM_CAP)
    }

    pub fn build_capped(
        recipe: &VocabularyRecipe,
        space: StateSpace,
        cap: usize,
    ) -> Result<Arc<Vocabulary>> {
        let cap = cap.min(MAX_PROGRAMS);
        let n = space.bit_count();
        let mut raw: Vec<(String, StateSet)> = Vec::new();
        let push = |label: String, raw: &mut Vec<(String, StateSet)>| -> Result<()> {
            let truth = parse_formula(&label, space)?;
            raw.push((label, truth));
            Ok(())
        };
        let keep_tautologies = match recipe {
            VocabularyRecipe::Literals => {
                for i in 0..n {
                    push(format!("b{i}"), &mut raw)?;
                    push(format!("!b{i}"), &mut raw)?;
                }
                false
            }
            VocabularyRecipe::LiteralsEq => {
                for i in 0..n {
                    push(format!("b{i}"), &mut raw)?;
                    push(format!("!b{i}"), &mut raw)?;
                }
                for i in 0..n {
                    for j in (i + 1)..n {
                        push(format!("b{i}=b{j}"), &mut raw)?;
                        push(format!("!(b{i}=b{j})"), &mut raw)?;
                    }
                }
                false
            }
            VocabularyRecipe::Depth2 => {
                let mut literals = Vec::new();
                for i in 0..n {
                    literals.push(format!("b{i}"));
                    literals.push(format!("!b{i}"));
                }
                for l in &literals {
                    push(l.clone(), &mut raw)?;
                }
                for (i, a) in literals.iter().enumerate() {
                    for b in literals.iter().skip(i + 1) {
                        for op in ["&", "|", "="] {
                            push(format!("({a}){op}({b})"), &mut raw)?;
                        }
                    }
                }
                false
            }
            VocabularyRecipe::Equations | VocabularyRecipe::Rich => {
                if n != 8 {
                    return Err(Error::Config(
                        "the equations presets require an 8-bit state space".into(),
                    ));
                }
                let formulas = match recipe {
                    VocabularyRecipe::Rich => equations::rich_formulas(),
                    _ => equations::equations_formulas(),
                };
                for (label, formula) in formulas {
                    let truth = parse_formula(&formula, space)?;
                    raw.push((label, truth));
                }
                false
            }
            VocabularyRecipe::Explicit {
                formulas,
                keep_tautologies,
            } => {
                for (label, formula) in formulas {
                    let truth = parse_formula(formula, space)?;
                    raw.push((label.clone(), truth));
                }
                *keep_tautologies
            }
        };

        let full = StateSet::full(space.state_count());
        raw.retain(|(_, t)| !t.is_empty());
        if !keep_tautologies {
            raw.retain(|(_, t)| *t != full);
        }
        // Semantic deduplication: keep the lexicographically smallest
        // label per truth vector.
        raw.sort_by(|(la, ta), (lb, tb)| ta.cmp_as_integer(tb).then_with(|| la.cmp(lb)));
        raw.dedup_by(|(_, ta), (_, tb)| ta == tb);

        if raw.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if raw.len() > cap {
            return Err(Error::CapExceeded {
                count: raw.len(),
                cap,
            });
        }

        let programs: Vec<Program> = raw
            .into_iter()
            .enumerate()
            .map(|(id, (label, truth))| Program { id, truth, label })
            .collect();
        let truesets = (0..space.state_count())
            .map(|state| {
                Statement::from_ids(
                    programs
                        .iter()
                        .filter(|p| p.truth.contains(state))
                        .map(|p| p.id),
                )
            })
            .collect();
        Ok(Arc::new(Vocabulary {
            programs,
            space,
            recipe: recipe.describe(),
            truesets,
        }))
    }

    pub fn len(&self) -> usize {
        self.programs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.programs.is_empty()
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn recipe(&self) -> &str {
        &self.recipe
    }

    pub fn programs(&self) -> &[Program] {
        &self.programs
    }

    pub fn program(&self, id: usize) -> Result<&Program> {
        self.programs.get(id).ok_or(Error::UnknownProgram(id))
    }

    pub fn label_of(&self, id: usize) -> &str {
        &self.programs[id].label
    }

    pub fn id_of_label(&self, label: &str) -> Result<usize> {
        self.programs
            .iter()
            .find(|p| p.label == label)
            .map(|p| p.id)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// All programs true in state `state`.
    pub fn trueset(&self, state: usize) -> Statement {
        self.truesets[state]
    }

    pub fn truesets(&self) -> &[Statement] {
        &self.truesets
    }

    /// `T(m)`: the states in which every member of `m` is true. The
    /// empty statement is satisfied by every state.
    pub fn satisfying_states(&self, m: &Statement) -> Result<StateSet> {
        let mut set = StateSet::full(self.space.state_count());
        for id in m.ids() {
            let p = self.program(id)?;
            set.intersect_with(&p.truth);
        }
        Ok(set)
    }

    pub fn is_satisfiable(&self, m: &Statement) -> bool {
        self.truesets.iter().any(|t| m.is_subset_of(t))
    }

    /// Count of states satisfying `m` (the complete-statement surrogate
    /// for weakness).
    pub fn state_weakness(&self, m: &Statement) -> Result<usize> {
        Ok(self.satisfying_states(m)?.count())
    }

    /// Maximal distinct truesets among those of the given states
    /// (antichain reduction).
    pub fn maximal_truesets(&self, states: &StateSet) -> Vec<Statement> {
        let mut distinct: Vec<Statement> = states.iter().map(|s| self.truesets[s]).collect();
        distinct.sort();
        distinct.dedup();
        let mut maximal = Vec::new();
        for (i, a) in distinct.iter().enumerate() {
            let dominated = distinct
                .iter()
                .enumerate()
                .any(|(j, b)| i != j && a.is_subset_of(b) && a != b);
            if !dominated {
                maximal.push(*a);
            }
        }
        maximal
    }

    /// Closed-world weakness: the number of statements `y` with
    /// `m ⊆ y ⊆ trueset(ω)` for some admissible state `ω`, computed by
    /// inclusion-exclusion over the maximal distinct truesets.
    pub fn weakness_closed(&self, m: &Statement, admissible: &StateSet) -> Result<u128> {
        let sats = self.satisfying_states(m)?;
        if !admissible.is_subset_of(&sats) {
            return Err(Error::BadTask(
                "admissible states must all satisfy the statement".into(),
            ));
        }
        let maximal = self.maximal_truesets(admissible);
        inclusion_exclusion_weakness(m, &maximal)
    }
}

/// `|⋃_i [m, T_i]|` for an antichain of truesets all containing `m`.
pub fn inclusion_exclusion_weakness(m: &Statement, maximal: &[Statement]) -> Result<u128> {
    if maximal.len() > INCLUSION_EXCLUSION_LIMIT {
        return Err(Error::InclusionExclusionBudget {
            sets: maximal.len(),
            limit: INCLUSION_EXCLUSION_LIMIT,
        });
    }
    let base = m.len() as u32;
    fn go(sets: &[Statement], idx: usize, inter: Statement, picked: u32, base: u32) -> i128 {
        if idx == sets.len() {
            if picked == 0 {
                return 0;
            }
            let term = 1i128 << (inter.len() as u32 - base);
            return if picked % 2 == 1 { term } else { -term };
        }
        go(sets, idx + 1, inter, picked, base)
            + go(
                sets,
                idx + 1,
                inter.intersection(&sets[idx]),
                picked + 1,
                base,
            )
    }
    let total = go(maximal, 0, Statement::FULL, 0, base);
    debug_assert!(total >= 0);
    Ok(total as u128)
}

/// Display adapter rendering a statement as sorted program labels.
pub struct Labeled<'a, F: Fn(usize) -> &'a str> {
    pub statement: Statement,
    pub label_of: F,
}

impl<'a, F: Fn(usize) -> &'a str> fmt::Display for Labeled<'a, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut labels: Vec<&str> = self.statement.ids().map(|id| (self.label_of)(id)).collect();
        labels.sort_unstable();
        if labels.is_empty() {
            write!(f, "{{}}")
        } else {
            write!(f, "{{{}}}", labels.join(" "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(bits: u32) -> StateSpace {
        StateSpace::new(bits).unwrap()
    }

    #[test]
    fn state_bit_is_big_endian() {
        let sp = space(4);
        // state 0b1010: bit 0 (leftmost) = 1, bit 1 = 0, bit 2 = 1, bit 3 = 0
        assert!(sp.bit(0b1010, 0));
        assert!(!sp.bit(0b1010, 1));
        assert!(sp.bit(0b1010, 2));
        assert!(!sp.bit(0b1010, 3));
    }

    #[test]
    fn literals_preset_counts() {
        let v = Vocabulary::build(&VocabularyRecipe::Literals, space(8)).unwrap();
        assert_eq!(v.len(), 16);
        let v = Vocabulary::build(&VocabularyRecipe::LiteralsEq, space(8)).unwrap();
        assert_eq!(v.len(), 72);
    }

    #[test]
    fn trueset_of_literals_has_one_program_per_bit() {
        let v = Vocabulary::build(&VocabularyRecipe::Literals, space(8)).unwrap();
        for state in 0..256 {
            assert_eq!(v.trueset(state).len(), 8);
        }
    }

    #[test]
    fn empty_statement_satisfied_everywhere() {
        let v = Vocabulary::build(&VocabularyRecipe::Literals, space(8)).unwrap();
        assert_eq!(v.state_weakness(&Statement::EMPTY).unwrap(), 256);
    }

    #[test]
    fn literal_and_equality_half_the_states() {
        let v = Vocabulary::build(&VocabularyRecipe::LiteralsEq, space(8)).unwrap();
        let b0 = Statement::singleton(v.id_of_label("b0").unwrap());
        assert_eq!(v.state_weakness(&b0).unwrap(), 128);
        let eq = Statement::singleton(v.id_of_label("b0=b1").unwrap());
        // Oracle: brute-force count of states whose first two bits agree.
        let sp = v.space();
        let expected = (0..256).filter(|&s| sp.bit(s, 0) == sp.bit(s, 1)).count();
        assert_eq!(expected, 128);
        assert_eq!(v.state_weakness(&eq).unwrap(), expected);
    }

    #[test]
    fn contradiction_probe_is_unsatisfiable() {
        let v = Vocabulary::build(&VocabularyRecipe::Literals, space(4)).unwrap();
        let m = Statement::from_ids([
            v.id_of_label("b0").unwrap(),
            v.id_of_label("!b0").unwrap(),
        ]);
        assert!(v.satisfying_states(&m).unwrap().is_empty());
        assert!(!v.is_satisfiable(&m));
    }

    #[test]
    fn deterministic_ordering() {
        let a = Vocabulary::build(&VocabularyRecipe::LiteralsEq, space(6)).unwrap();
        let b = Vocabulary::build(&VocabularyRecipe::LiteralsEq, space(6)).unwrap();
        let la: Vec<_> = a.programs().iter().map(|p| p.label.clone()).collect();
        let lb: Vec<_> = b.programs().iter().map(|p| p.label.clone()).collect();
        assert_eq!(la, lb);
    }

    #[test]
    fn single_state_closed_weakness_is_interval_size() {
        let v = Vocabulary::build(&VocabularyRecipe::LiteralsEq, space(4)).unwrap();
        let state = 0b1010;
        let t = v.trueset(state);
        let m = Statement::singleton(t.ids().next().unwrap());
        let mut only = StateSet::empty(16);
        only.insert(state);
        let w = v.weakness_closed(&m, &only).unwrap();
        assert_eq!(w, 1u128 << (t.len() - m.len()));
    }

    #[test]
    fn truth_vector_hex_roundtrip() {
        let v = Vocabulary::build(&VocabularyRecipe::Literals, space(4)).unwrap();
        let p = &v.programs()[0];
        assert_eq!(p.truth.to_hex().len(), 4);
    }
}
