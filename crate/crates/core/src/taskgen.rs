//! Task generators and bundled fixtures: binary-arithmetic parents,
//! the embedded worked examples, the line-oriented task text format,
//! and the regression-to-task adapter.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::{LanguageUniverse, StateSpace, Statement, Vocabulary, VocabularyRecipe};
use crate::task::{Task, World};

/// The arithmetic relation a parent task encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    Add,
    Multiply,
}

impl Operation {
    pub fn apply(&self, a: usize, b: usize) -> usize {
        match self {
            Operation::Add => a + b,
            Operation::Multiply => a * b,
        }
    }

    pub const ALL: [Operation; 2] = [Operation::Add, Operation::Multiply];
}

impl std::fmt::Display for Operation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Operation::Add => write!(f, "add"),
            Operation::Multiply => write!(f, "multiply"),
        }
    }
}

impl std::str::FromStr for Operation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Operation> {
        match s {
            "add" | "addition" => Ok(Operation::Add),
            "multiply" | "multiplication" | "mul" => Ok(Operation::Multiply),
            other => Err(Error::Parse(format!("unknown operation `{other}`"))),
        }
    }
}

/// Arithmetic states are 8-bit: bits 0-1 hold the operand `a`, bits
/// 2-3 hold `b`, bits 4-7 hold the result, all big-endian with bit 0
/// the most significant bit of the string.
pub const ARITHMETIC_BITS: u32 = 8;

pub fn arithmetic_state(op: Operation, a: usize, b: usize) -> usize {
    debug_assert!(a < 4 && b < 4);
    (a << 6) | (b << 4) | op.apply(a, b)
}

/// `(a, b, result)` from an 8-bit state.
pub fn arithmetic_decode(state: usize) -> (usize, usize, usize) {
    (state >> 6 & 0b11, state >> 4 & 0b11, state & 0b1111)
}

/// The 16 conforming states, one per operand pair.
pub fn arithmetic_states(op: Operation) -> Vec<usize> {
    let mut out = Vec::with_capacity(16);
    for a in 0..4 {
        for b in 0..4 {
            out.push(arithmetic_state(op, a, b));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct ArithmeticSpec {
    pub operation: Operation,
    /// Which of the 8 bits is withheld when forming situations.
    pub deleted_bit: u32,
    pub recipe: VocabularyRecipe,
}

/// The parent task: one decision per conforming state, one situation
/// per decision obtained by deleting `deleted_bit` (the programs
/// entailed by the 7 retained bits, i.e. the intersection of the
/// truesets of both completions of the deleted bit).
pub fn arithmetic_parent(vocab: &Arc<Vocabulary>, op: Operation, deleted_bit: u32) -> Result<Task> {
    if deleted_bit >= ARITHMETIC_BITS {
        return Err(Error::BitIndexOutOfRange {
            index: deleted_bit,
            bit_count: ARITHMETIC_BITS,
        });
    }
    let flip = 1usize << (ARITHMETIC_BITS - 1 - deleted_bit);
    let mut examples = Vec::with_capacity(16);
    for state in arithmetic_states(op) {
        let d = vocab.trueset(state);
        let s = vocab.trueset(state).intersection(&vocab.trueset(state ^ flip));
        examples.push((s, d));
    }
    Task::from_examples(World::Vocab(vocab.clone()), examples, false)
}

pub fn gen_arithmetic_task(spec: &ArithmeticSpec) -> Result<Task> {
    let vocab = Vocabulary::build(&spec.recipe, StateSpace::new(ARITHMETIC_BITS)?)?;
    arithmetic_parent(&vocab, spec.operation, spec.deleted_bit)
}

// ---------------------------------------------------------------------------
// Line-oriented text format

/// Parse a sectioned text file: `[name]` headers, one statement (or
/// bare value) per line, `#` comments and blank lines ignored.
pub fn parse_sections(text: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let mut sections: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.contains_key(&name) {
                return Err(Error::Parse(format!("duplicate section `[{name}]`")));
            }
            sections.insert(name.clone(), Vec::new());
            current = Some(name);
            continue;
        }
        match &current {
            Some(name) => sections.get_mut(name).unwrap().push(line.to_string()),
            None => {
                return Err(Error::Parse(format!(
                    "line {} outside any section: `{line}`",
                    idx + 1
                )))
            }
        }
    }
    Ok(sections)
}

fn parse_statement_line(line: &str, id_of: &dyn Fn(&str) -> Result<usize>) -> Result<Statement> {
    let mut s = Statement::EMPTY;
    for token in line.split_whitespace() {
        s = s.with(id_of(token)?);
    }
    Ok(s)
}

fn parse_statement_lines(
    lines: &[String],
    id_of: &dyn Fn(&str) -> Result<usize>,
) -> Result<Vec<Statement>> {
    lines.iter().map(|l| parse_statement_line(l, id_of)).collect()
}

fn render_statement(world: &World, m: &Statement) -> String {
    let mut labels: Vec<String> = m.ids().map(|id| world.label_of(id)).collect();
    labels.sort();
    labels.join(" ")
}

/// Serialize a task to the sectioned text format: one situation or
/// decision per line as program labels in vocabulary order.
pub fn render_task(task: &Task) -> String {
    let mut out = String::new();
    out.push_str("[labels]\n");
    out.push_str(&task.world().labels().join(" "));
    out.push_str("\n\n[situations]\n");
    for s in task.situations() {
        out.push_str(&render_statement(task.world(), s));
        out.push('\n');
    }
    out.push_str("\n[decisions]\n");
    for d in task.decisions() {
        out.push_str(&render_statement(task.world(), d));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Embedded fixtures

const APPENDIX_FIXTURE: &str = include_str!("../fixtures/appendix_b.txt");
const COUNTEREXAMPLE_FIXTURE: &str = include_str!("../fixtures/counterexample.txt");

/// The worked 4-bit example and the weakest-vs-MDL counterexample,
/// loaded from the embedded transcriptions and self-checked against
/// the reconstructed languages.
#[derive(Debug, Clone)]
pub struct FixtureBundle {
    pub worked_vocab: Arc<Vocabulary>,
    /// The 16 complete statements, as a closed-world universe.
    pub worked_universe: Arc<LanguageUniverse>,
    pub t1: Task,
    /// Non-exhaustive sample of T1's expected valid models.
    pub t1_models: Vec<Statement>,
    pub t2: Task,
    pub t2_weakest: Statement,
    pub t2_extensional: Statement,
    pub t2_z_weakest: Vec<Statement>,
    pub t2_z_extensional: Vec<Statement>,
    pub counter_universe: Arc<LanguageUniverse>,
    pub counter_task: Task,
    pub counter_weakest: Statement,
    pub counter_mdl: Statement,
}

fn worked_vocabulary() -> Result<Arc<Vocabulary>> {
    let formulas = [
        ("a", "b0"),
        ("b", "b1"),
        ("c", "b2"),
        ("d", "b3"),
        ("e", "!b0"),
        ("f", "!b1"),
        ("g", "!b2"),
        ("h", "!b3"),
        ("i", "(b0=b2)&(b1=b3)"),
        ("j", "b0=b2"),
        ("k", "b1=b3"),
        ("l", "((b0=b2)&(b1=b3))|b1"),
    ];
    Vocabulary::build(
        &VocabularyRecipe::Explicit {
            formulas: formulas
                .iter()
                .map(|(l, f)| (l.to_string(), f.to_string()))
                .collect(),
            keep_tautologies: false,
        },
        StateSpace::new(4)?,
    )
}

fn require<'a>(
    sections: &'a BTreeMap<String, Vec<String>>,
    name: &str,
) -> Result<&'a Vec<String>> {
    sections
        .get(name)
        .ok_or_else(|| Error::Fixture(format!("missing section `[{name}]`")))
}

pub fn load_fixtures() -> Result<FixtureBundle> {
    // Worked example: vocabulary reconstructed from formulas, then
    // checked statement-for-statement against the transcription.
    let vocab = worked_vocabulary()?;
    let sections = parse_sections(APPENDIX_FIXTURE)?;
    let id_of = |label: &str| -> Result<usize> {
        vocab
            .programs()
            .iter()
            .position(|p| p.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    };
    let listed = {
        let mut v = parse_statement_lines(require(&sections, "language")?, &id_of)?;
        v.sort();
        v.dedup();
        v
    };
    let universe = LanguageUniverse::of_truesets(&vocab);
    if listed != universe.statements() {
        return Err(Error::Fixture(
            "reconstructed truesets do not match the transcribed language".into(),
        ));
    }
    if universe.len() != 16 {
        return Err(Error::Fixture(format!(
            "expected 16 complete statements, found {}",
            universe.len()
        )));
    }
    let world = World::Vocab(vocab.clone());
    let t1 = Task::new(
        world.clone(),
        parse_statement_lines(require(&sections, "t1.situations")?, &id_of)?,
        parse_statement_lines(require(&sections, "t1.decisions")?, &id_of)?,
        false,
    )?;
    let t2 = Task::new(
        world,
        parse_statement_lines(require(&sections, "t2.situations")?, &id_of)?,
        parse_statement_lines(require(&sections, "t2.decisions")?, &id_of)?,
        false,
    )?;
    let one = |name: &str| -> Result<Statement> {
        let lines = require(&sections, name)?;
        if lines.len() != 1 {
            return Err(Error::Fixture(format!("`[{name}]` must hold one line")));
        }
        parse_statement_line(&lines[0], &id_of)
    };
    let sorted = |mut v: Vec<Statement>| {
        v.sort();
        v
    };
    let t1_models = parse_statement_lines(require(&sections, "t1.models")?, &id_of)?;
    let t2_weakest = one("t2.weakest")?;
    let t2_extensional = one("t2.extensional")?;
    let t2_z_weakest = sorted(parse_statement_lines(require(&sections, "t2.z_weakest")?, &id_of)?);
    let t2_z_extensional = sorted(parse_statement_lines(
        require(&sections, "t2.z_extensional")?,
        &id_of,
    )?);

    // Counterexample: an explicit six-statement universe.
    let csections = parse_sections(COUNTEREXAMPLE_FIXTURE)?;
    let labels_line = require(&csections, "labels")?;
    if labels_line.len() != 1 {
        return Err(Error::Fixture("`[labels]` must hold one line".into()));
    }
    let labels: Vec<String> = labels_line[0]
        .split_whitespace()
        .map(str::to_string)
        .collect();
    let cid_of = |label: &str| -> Result<usize> {
        labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    };
    let cstatements = parse_statement_lines(require(&csections, "language")?, &cid_of)?;
    if cstatements.len() != 6 {
        return Err(Error::Fixture(format!(
            "expected 6 explicit statements, found {}",
            cstatements.len()
        )));
    }
    let counter_universe = LanguageUniverse::explicit(labels.clone(), cstatements);
    let counter_task = Task::new(
        World::Explicit(counter_universe.clone()),
        parse_statement_lines(require(&csections, "situations")?, &cid_of)?,
        parse_statement_lines(require(&csections, "decisions")?, &cid_of)?,
        false,
    )?
    .with_listed_models(parse_statement_lines(require(&csections, "models")?, &cid_of)?)?;
    let cone = |name: &str| -> Result<Statement> {
        let lines = require(&csections, name)?;
        if lines.len() != 1 {
            return Err(Error::Fixture(format!("`[{name}]` must hold one line")));
        }
        parse_statement_line(&lines[0], &cid_of)
    };
    Ok(FixtureBundle {
        worked_vocab: vocab,
        worked_universe: universe,
        t1,
        t1_models,
        t2,
        t2_weakest,
        t2_extensional,
        t2_z_weakest,
        t2_z_extensional,
        counter_universe,
        counter_task,
        counter_weakest: cone("weakest")?,
        counter_mdl: cone("mdl")?,
    })
}

// ---------------------------------------------------------------------------
// Regression-to-task adapter

/// Converts `(x, y)` value pairs into task pieces and back. A toy
/// demonstration: values quantize to unsigned `bits_per_value`-bit
/// integers, round-to-nearest; a pair occupies a `2k`-bit state with
/// input bits before output bits.
#[derive(Debug, Clone)]
pub struct RegressionAdapter {
    bits: u32,
    vocab: Arc<Vocabulary>,
}

impl RegressionAdapter {
    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn quantize(&self, value: f64) -> Result<usize> {
        let q = value.round();
        if !q.is_finite() || q < 0.0 || q >= (1u64 << self.bits) as f64 {
            return Err(Error::Quantization(format!(
                "value {value} out of range for {} unsigned bits",
                self.bits
            )));
        }
        Ok(q as usize)
    }

    fn pair_state(&self, x: f64, y: f64) -> Result<usize> {
        Ok((self.quantize(x)? << self.bits) | self.quantize(y)?)
    }

    /// The complete statement (entailed program set) of a pair.
    pub fn pair_converter(&self, x: f64, y: f64) -> Result<Statement> {
        Ok(self.vocab.trueset(self.pair_state(x, y)?))
    }

    /// Inverse of `pair_converter` on complete statements.
    pub fn invert(&self, d: &Statement) -> Result<(f64, f64)> {
        let state = self
            .vocab
            .truesets()
            .iter()
            .position(|t| t == d)
            .ok_or_else(|| Error::Quantization("statement is not a pair image".into()))?;
        let y = state & ((1 << self.bits) - 1);
        let x = state >> self.bits;
        Ok((x as f64, y as f64))
    }

    /// Programs entailed by the input bits alone: the intersection of
    /// the truesets of every state extending `x`.
    pub fn situation_of_input(&self, x: f64) -> Result<Statement> {
        let qx = self.quantize(x)?;
        let mut states = (0..1usize << self.bits).map(|y| (qx << self.bits) | y);
        let first = self.vocab.trueset(states.next().expect("at least one state"));
        Ok(states.fold(first, |acc, s| acc.intersection(&self.vocab.trueset(s))))
    }

    /// Reconstruct the pairs a model predicts for input `x`.
    pub fn predict(&self, m: &Statement, x: f64) -> Result<Vec<(f64, f64)>> {
        let s = self.situation_of_input(x)?;
        let world = World::Vocab(self.vocab.clone());
        Task::reconstruct_decisions(&world, m, &[s])
            .iter()
            .map(|d| self.invert(d))
            .collect()
    }
}

/// Build a task whose decisions are the training pairs and whose
/// situations are the entailed-input program sets. Fails when two
/// distinct values share a quantized pattern or a pair does not
/// round-trip exactly.
pub fn regression_to_task(
    points: &[(f64, f64)],
    bits_per_value: u32,
    recipe: &VocabularyRecipe,
) -> Result<(Task, RegressionAdapter)> {
    if points.is_empty() {
        return Err(Error::BadTask("no training points".into()));
    }
    let space = StateSpace::new(2 * bits_per_value)?;
    let vocab = Vocabulary::build(recipe, space)?;
    let adapter = RegressionAdapter {
        bits: bits_per_value,
        vocab,
    };
    // Quantization must be injective on the observed values.
    for pick in [0usize, 1] {
        let mut seen: BTreeMap<usize, f64> = BTreeMap::new();
        for p in points {
            let v = if pick == 0 { p.0 } else { p.1 };
            let q = adapter.quantize(v)?;
            if let Some(prev) = seen.get(&q) {
                if *prev != v {
                    return Err(Error::Quantization(format!(
                        "values {prev} and {v} share pattern {q}"
                    )));
                }
            }
            seen.insert(q, v);
        }
    }
    let mut examples = Vec::with_capacity(points.len());
    for (x, y) in points {
        let d = adapter.pair_converter(*x, *y)?;
        let back = adapter.invert(&d)?;
        if back != (adapter.quantize(*x)? as f64, adapter.quantize(*y)? as f64) {
            return Err(Error::Quantization(format!("pair ({x}, {y}) does not round-trip")));
        }
        examples.push((adapter.situation_of_input(*x)?, d));
    }
    let task = Task::from_examples(World::Vocab(adapter.vocab.clone()), examples, false)?;
    Ok((task, adapter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{search_weakest, SearchConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn arithmetic_layout_examples() {
        assert_eq!(arithmetic_state(Operation::Add, 3, 3), 0b1111_0110);
        assert_eq!(arithmetic_state(Operation::Multiply, 3, 3), 0b1111_1001);
        assert_eq!(arithmetic_decode(0b1111_0110), (3, 3, 6));
    }

    #[test]
    fn generator_totality() {
        for op in Operation::ALL {
            let states = arithmetic_states(op);
            assert_eq!(states.len(), 16);
            let mut inputs: Vec<(usize, usize)> = Vec::new();
            for state in states {
                let (a, b, r) = arithmetic_decode(state);
                assert_eq!(r, op.apply(a, b));
                inputs.push((a, b));
            }
            inputs.sort();
            inputs.dedup();
            assert_eq!(inputs.len(), 16);
        }
    }

    #[test]
    fn parent_task_has_sixteen_decisions() {
        for op in Operation::ALL {
            let task = gen_arithmetic_task(&ArithmeticSpec {
                operation: op,
                deleted_bit: 5,
                recipe: VocabularyRecipe::LiteralsEq,
            })
            .unwrap();
            assert_eq!(task.decisions().len(), 16);
            assert_eq!(task.examples().len(), 16);
        }
    }

    #[test]
    fn deleted_bit_situation_has_two_completions() {
        let vocab = Vocabulary::build(
            &VocabularyRecipe::LiteralsEq,
            StateSpace::new(8).unwrap(),
        )
        .unwrap();
        let task = arithmetic_parent(&vocab, Operation::Add, 7).unwrap();
        for (s, d) in task.examples() {
            assert!(s.is_subset_of(d));
            let completions: Vec<usize> = (0..256)
                .filter(|st| s.is_subset_of(&vocab.trueset(*st)))
                .collect();
            assert_eq!(completions.len(), 2);
        }
        assert!(arithmetic_parent(&vocab, Operation::Add, 8).is_err());
    }

    #[test]
    fn fixtures_load_and_self_check() {
        let fx = load_fixtures().unwrap();
        assert_eq!(fx.worked_universe.len(), 16);
        assert_eq!(fx.worked_vocab.len(), 12);
        for m in &fx.t1_models {
            assert!(fx.t1.is_valid_model(m).unwrap());
        }
        assert_eq!(fx.counter_universe.len(), 6);
        assert_eq!(fx.counter_weakest.len(), 2);
        assert_eq!(fx.counter_mdl.len(), 1);
    }

    #[test]
    fn sectioned_format_round_trip() {
        let fx = load_fixtures().unwrap();
        let text = render_task(&fx.t2);
        let sections = parse_sections(&text).unwrap();
        assert_eq!(sections["situations"].len(), fx.t2.situations().len());
        assert_eq!(sections["decisions"].len(), fx.t2.decisions().len());
        assert!(parse_sections("orphan line").is_err());
    }

    #[test]
    fn regression_identity_function_generalises() {
        let points = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)];
        let (_, adapter) = regression_to_task(&points, 2, &VocabularyRecipe::LiteralsEq).unwrap();
        for (x, y) in points {
            let d = adapter.pair_converter(x, y).unwrap();
            assert_eq!(adapter.invert(&d).unwrap(), (x, y));
        }
        // Hold out x = 3, train on the rest, predict.
        let (train, adapter) =
            regression_to_task(&points[..3], 2, &VocabularyRecipe::LiteralsEq).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let best = search_weakest(&train, &SearchConfig::default(), &mut rng).unwrap();
        let predicted = adapter.predict(&best.chosen, 3.0).unwrap();
        assert_eq!(predicted, vec![(3.0, 3.0)]);
    }

    #[test]
    fn regression_constant_function() {
        let points = [(0.0, 2.0), (1.0, 2.0), (2.0, 2.0)];
        let (train, adapter) =
            regression_to_task(&points, 2, &VocabularyRecipe::LiteralsEq).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let best = search_weakest(&train, &SearchConfig::default(), &mut rng).unwrap();
        let predicted = adapter.predict(&best.chosen, 3.0).unwrap();
        assert!(predicted.contains(&(3.0, 2.0)));
    }

    #[test]
    fn quantization_collision_rejected() {
        let points = [(0.4, 0.0), (0.45, 1.0)];
        assert!(matches!(
            regression_to_task(&points, 2, &VocabularyRecipe::Literals),
            Err(Error::Quantization(_))
        ));
    }
}
