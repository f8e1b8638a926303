//! Tasks: situations, correct decisions, model validity, task
//! completion, child-task relations, generalisation, and the
//! generalisation-probability formula.

use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lang::{LanguageUniverse, Statement, Vocabulary};

/// The closed world a task lives in: either a vocabulary over an
/// enumerated state space (complete decisions are truesets of states),
/// or an explicitly listed universe of complete statements.
#[derive(Debug, Clone)]
pub enum World {
    Vocab(Arc<Vocabulary>),
    Explicit(Arc<LanguageUniverse>),
}

impl World {
    /// The distinct complete statements of this world.
    pub fn complete_statements(&self) -> Vec<Statement> {
        match self {
            World::Vocab(v) => {
                let mut ts = v.truesets().to_vec();
                ts.sort();
                ts.dedup();
                ts
            }
            World::Explicit(u) => u.complete_statements().to_vec(),
        }
    }

    pub fn is_satisfiable(&self, m: &Statement) -> bool {
        match self {
            World::Vocab(v) => v.is_satisfiable(m),
            World::Explicit(u) => u.is_satisfiable(m),
        }
    }

    /// Complete statements that extend `s`, in deterministic order
    /// (state order for vocabularies, sorted order for explicit lists).
    pub fn complete_extensions(&self, s: &Statement) -> Vec<Statement> {
        match self {
            World::Vocab(v) => {
                let mut out: Vec<Statement> = (0..v.space().state_count())
                    .map(|state| v.trueset(state))
                    .filter(|t| s.is_subset_of(t))
                    .collect();
                out.dedup();
                out
            }
            World::Explicit(u) => u
                .complete_statements()
                .iter()
                .filter(|t| s.is_subset_of(t))
                .copied()
                .collect(),
        }
    }

    /// The surrogate weakness: how many complete statements (states,
    /// for a vocabulary world) satisfy `m`.
    pub fn state_weakness(&self, m: &Statement) -> Result<usize> {
        match self {
            World::Vocab(v) => v.state_weakness(m),
            World::Explicit(u) => Ok(u
                .complete_statements()
                .iter()
                .filter(|t| m.is_subset_of(t))
                .count()),
        }
    }

    pub fn label_of(&self, id: usize) -> String {
        match self {
            World::Vocab(v) => v.label_of(id).to_string(),
            World::Explicit(u) => u.label_of(id).to_string(),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            World::Vocab(v) => v.programs().iter().map(|p| p.label.clone()).collect(),
            World::Explicit(u) => u.labels().to_vec(),
        }
    }

    pub fn id_of_label(&self, label: &str) -> Result<usize> {
        match self {
            World::Vocab(v) => v.id_of_label(label),
            World::Explicit(u) => u.id_of_label(label),
        }
    }

    fn same_as(&self, other: &World) -> bool {
        match (self, other) {
            (World::Vocab(a), World::Vocab(b)) => Arc::ptr_eq(a, b),
            (World::Explicit(a), World::Explicit(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }

    pub fn display(&self, m: &Statement) -> String {
        let mut labels: Vec<String> = m.ids().map(|id| self.label_of(id)).collect();
        labels.sort();
        if labels.is_empty() {
            "{}".into()
        } else {
            format!("{{{}}}", labels.join(" "))
        }
    }
}

/// A task: situations `S`, correct decisions `D`. The valid models `M`
/// are usually not stored; they are checked or searched. A task may
/// instead carry `M` as explicit data (a task is the full triple), in
/// which case searches rank the listed models directly.
#[derive(Debug, Clone)]
pub struct Task {
    world: World,
    situations: Vec<Statement>,
    decisions: Vec<Statement>,
    /// Per-decision situation, for child sampling. Parallel to
    /// `examples` order, not to the deduplicated `decisions`.
    examples: Vec<(Statement, Statement)>,
    strict_closure: bool,
    listed_models: Option<Vec<Statement>>,
}

impl Task {
    /// Build a task from explicit (situation, decision) examples.
    pub fn from_examples(
        world: World,
        examples: Vec<(Statement, Statement)>,
        strict_closure: bool,
    ) -> Result<Task> {
        if examples.is_empty() {
            return Err(Error::BadTask("no examples".into()));
        }
        let mut situations: Vec<Statement> = examples.iter().map(|(s, _)| *s).collect();
        situations.sort();
        situations.dedup();
        let mut decisions: Vec<Statement> = examples.iter().map(|(_, d)| *d).collect();
        decisions.sort();
        decisions.dedup();
        let task = Task {
            world,
            situations,
            decisions,
            examples,
            strict_closure,
            listed_models: None,
        };
        task.validate()?;
        Ok(task)
    }

    /// Build from separate situation and decision sets; the pairing is
    /// derived by inclusion (each decision with every situation it
    /// extends).
    pub fn new(
        world: World,
        situations: Vec<Statement>,
        decisions: Vec<Statement>,
        strict_closure: bool,
    ) -> Result<Task> {
        let mut examples = Vec::new();
        for d in &decisions {
            for s in &situations {
                if s.is_subset_of(d) {
                    examples.push((*s, *d));
                }
            }
        }
        let mut situations = situations;
        situations.sort();
        situations.dedup();
        let mut decisions = decisions;
        decisions.sort();
        decisions.dedup();
        let task = Task {
            world,
            situations,
            decisions,
            examples,
            strict_closure,
            listed_models: None,
        };
        task.validate()?;
        Ok(task)
    }

    fn validate(&self) -> Result<()> {
        if self.situations.is_empty() {
            return Err(Error::BadTask("empty situation set".into()));
        }
        if self.decisions.is_empty() {
            return Err(Error::BadTask("empty decision set".into()));
        }
        for d in &self.decisions {
            if !self.situations.iter().any(|s| s.is_subset_of(d)) {
                return Err(Error::BadTask(
                    "a decision is not a superset of any situation".into(),
                ));
            }
        }
        for s in &self.situations {
            if !self.world.is_satisfiable(s) {
                return Err(Error::BadTask("unsatisfiable situation".into()));
            }
        }
        Ok(())
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn situations(&self) -> &[Statement] {
        &self.situations
    }

    pub fn decisions(&self) -> &[Statement] {
        &self.decisions
    }

    pub fn strict_closure(&self) -> bool {
        self.strict_closure
    }

    /// Attach an explicitly listed model set `M`. Searches over the
    /// resulting task rank the listed models instead of enumerating
    /// candidates. Every listed model must be valid for the task.
    pub fn with_listed_models(mut self, models: Vec<Statement>) -> Result<Task> {
        if models.is_empty() {
            return Err(Error::BadTask("empty listed model set".into()));
        }
        for m in &models {
            if !self.is_valid_model(m)? {
                return Err(Error::BadTask(format!(
                    "listed model {} is not valid",
                    self.world.display(m)
                )));
            }
        }
        let mut models = models;
        models.sort();
        models.dedup();
        self.listed_models = Some(models);
        Ok(self)
    }

    /// The explicitly listed model set, when the task carries one.
    pub fn listed_models(&self) -> Option<&[Statement]> {
        self.listed_models.as_deref()
    }

    pub fn with_strict_closure(mut self, on: bool) -> Task {
        self.strict_closure = on;
        self
    }

    pub fn examples(&self) -> &[(Statement, Statement)] {
        &self.examples
    }

    /// Union of all correct decisions, used by the strict closure
    /// clause.
    pub fn decision_union(&self) -> Statement {
        self.decisions
            .iter()
            .fold(Statement::EMPTY, |acc, d| acc.union(d))
    }

    /// The intersection core `⋂ D`: programs true in every correct
    /// decision. Every valid model is a subset of the core.
    pub fn core(&self) -> Statement {
        let mut iter = self.decisions.iter();
        let first = *iter.next().expect("tasks always have decisions");
        iter.fold(first, |acc, d| acc.intersection(d))
    }

    /// `Z_S` restricted to complete decisions, per situation, split
    /// into positives (members of `D`) and negatives.
    pub fn possible_decisions(&self) -> Result<DecisionSpace> {
        let mut per_situation = Vec::new();
        let mut positives = Vec::new();
        let mut negatives = Vec::new();
        for s in &self.situations {
            let ext = self.world.complete_extensions(s);
            if ext.is_empty() {
                return Err(Error::BadTask(
                    "situation has no complete extension".into(),
                ));
            }
            for z in &ext {
                if self.decisions.binary_search(z).is_ok() {
                    positives.push(*z);
                } else {
                    negatives.push(*z);
                }
            }
            per_situation.push((*s, ext));
        }
        positives.sort();
        positives.dedup();
        negatives.sort();
        negatives.dedup();
        Ok(DecisionSpace {
            per_situation,
            positives,
            negatives,
        })
    }

    /// Strict closure clause of the model definition: every element of
    /// `Z_m` must be a subset of `⋃ D`. Every element of `Z_m` is below
    /// some complete statement containing `m`, so it suffices to check
    /// the complete statements.
    pub fn passes_strict_closure(&self, m: &Statement) -> bool {
        let union = self.decision_union();
        self.world
            .complete_extensions(m)
            .iter()
            .all(|z| z.is_subset_of(&union))
    }

    /// Model validity: `m` is a subset of every correct decision, no
    /// reachable negative decision extends `m`, and (behind the flag)
    /// the strict closure clause holds.
    pub fn is_valid_model(&self, m: &Statement) -> Result<bool> {
        if !self.world.is_satisfiable(m) {
            return Ok(false);
        }
        if !self.decisions.iter().all(|d| m.is_subset_of(d)) {
            return Ok(false);
        }
        let space = self.possible_decisions()?;
        if space.negatives.iter().any(|n| m.is_subset_of(n)) {
            return Ok(false);
        }
        if self.strict_closure && !self.passes_strict_closure(m) {
            return Ok(false);
        }
        Ok(true)
    }

    /// Select a complete decision extending situation `s` consistent
    /// with model `m`. Ties break to the first complete extension in
    /// world order (lowest state id).
    pub fn complete_task(&self, m: &Statement, s: &Statement) -> Result<Statement> {
        if !self.situations.contains(s) {
            return Err(Error::BadTask("situation not part of this task".into()));
        }
        self.world
            .complete_extensions(s)
            .into_iter()
            .find(|z| m.is_subset_of(z))
            .ok_or(Error::SilentModel)
    }

    /// `D_recon`: every complete decision that extends one of the given
    /// situations and contains `m`.
    pub fn reconstruct_decisions(
        world: &World,
        m: &Statement,
        situations: &[Statement],
    ) -> Vec<Statement> {
        let mut out: Vec<Statement> = world
            .complete_statements()
            .into_iter()
            .filter(|z| m.is_subset_of(z) && situations.iter().any(|s| s.is_subset_of(z)))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Does `m` generalise to this (parent) task?
    pub fn generalises(&self, m: &Statement) -> bool {
        if !self.decisions.iter().all(|d| m.is_subset_of(d)) {
            return false;
        }
        let recon = Self::reconstruct_decisions(&self.world, m, &self.situations);
        recon == self.decisions
    }

    /// Child-task relation: strict subset on situations, subset on
    /// decisions, same world.
    pub fn is_child_of(&self, parent: &Task) -> Result<bool> {
        if !self.world.same_as(&parent.world) {
            return Err(Error::VocabularyMismatch);
        }
        let situations_strict = self.situations.iter().all(|s| parent.situations.contains(s))
            && self.situations.len() < parent.situations.len();
        let decisions_subset = self.decisions.iter().all(|d| parent.decisions.contains(d));
        Ok(situations_strict && decisions_subset)
    }

    /// Sample a child task with `dk` decisions drawn uniformly without
    /// replacement; situations come from the parent's example pairing.
    pub fn sample_child(&self, dk: usize, rng: &mut impl Rng) -> Result<SampledChild> {
        if dk == 0 || dk > self.decisions.len() {
            return Err(Error::BadChildSize {
                dk,
                parent: self.decisions.len(),
            });
        }
        let mut indices: Vec<usize> = (0..self.examples.len()).collect();
        // One example per distinct decision; assumes the pairing holds
        // one situation per decision, as generated tasks do.
        indices.shuffle(rng);
        let mut chosen: Vec<(Statement, Statement)> = Vec::new();
        for i in indices {
            let (s, d) = self.examples[i];
            if chosen.iter().any(|(_, cd)| *cd == d) {
                continue;
            }
            chosen.push((s, d));
            if chosen.len() == dk {
                break;
            }
        }
        let child = Task::from_examples(self.world.clone(), chosen, self.strict_closure)?;
        let degenerate = child.decisions.len() == self.decisions.len()
            || child.situations.len() >= self.situations.len();
        Ok(SampledChild { child, degenerate })
    }

    /// Proposition 1 quantities on an enumerable universe:
    /// `A = L \ Z_S`, `B = A ∩ Z_m`, probability `2^|B| / 2^|A|`.
    pub fn generalisation_probability(
        &self,
        m: &Statement,
        universe: &LanguageUniverse,
    ) -> Result<GeneralisationProbability> {
        if !universe.is_satisfiable(m) {
            return Err(Error::Unsatisfiable);
        }
        let mut a = 0usize;
        let mut b = 0usize;
        for z in universe.statements() {
            let in_zs = self.situations.iter().any(|s| s.is_subset_of(z));
            if !in_zs {
                a += 1;
                if m.is_subset_of(z) {
                    b += 1;
                }
            }
        }
        let num = BigUint::one() << b;
        let den = BigUint::one() << a;
        Ok(GeneralisationProbability {
            outside: a,
            covered: b,
            probability: BigRational::new(num.into(), den.into()),
        })
    }
}

/// All complete decisions reachable from a task's situations.
#[derive(Debug, Clone)]
pub struct DecisionSpace {
    pub per_situation: Vec<(Statement, Vec<Statement>)>,
    pub positives: Vec<Statement>,
    pub negatives: Vec<Statement>,
}

/// A sampled child task; degenerate samples (no strict shrink) are
/// flagged, never silently used.
#[derive(Debug, Clone)]
pub struct SampledChild {
    pub child: Task,
    pub degenerate: bool,
}

/// Result of the Proposition 1 computation.
#[derive(Debug, Clone)]
pub struct GeneralisationProbability {
    /// `|A|`: statements outside the extension of the known situations.
    pub outside: usize,
    /// `|B|`: those of them covered by the model's extension.
    pub covered: usize,
    pub probability: BigRational,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{StateSpace, VocabularyRecipe};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    /// A 3-bit task over `literals+eq`: decisions are two states with
    /// b2 = b0; situations retain bits 0 and 1 (everything entailed by
    /// both completions of the free bit 2).
    fn tiny_task() -> (Arc<Vocabulary>, Task) {
        let v = Vocabulary::build(
            &VocabularyRecipe::LiteralsEq,
            StateSpace::new(3).unwrap(),
        )
        .unwrap();
        let world = World::Vocab(v.clone());
        let d0 = v.trueset(0b000);
        let d1 = v.trueset(0b101);
        let s0 = v.trueset(0b000).intersection(&v.trueset(0b001));
        let s1 = v.trueset(0b101).intersection(&v.trueset(0b100));
        let task = Task::from_examples(world, vec![(s0, d0), (s1, d1)], false).unwrap();
        (v, task)
    }

    #[test]
    fn possible_decisions_one_free_bit() {
        let (_, task) = tiny_task();
        let space = task.possible_decisions().unwrap();
        for (_, ext) in &space.per_situation {
            assert_eq!(ext.len(), 2);
        }
        assert_eq!(space.positives.len(), 2);
        assert_eq!(space.negatives.len(), 2);
    }

    #[test]
    fn empty_model_completes_with_lowest_state() {
        let (v, task) = tiny_task();
        let s = task.situations()[0];
        let z = task.complete_task(&Statement::EMPTY, &s).unwrap();
        // lowest state extending s
        let lowest = (0..8)
            .map(|st| v.trueset(st))
            .find(|t| s.is_subset_of(t))
            .unwrap();
        assert_eq!(z, lowest);
    }

    #[test]
    fn valid_model_reconstructs_decisions() {
        let (_, task) = tiny_task();
        // brute-force over all subsets of the core
        let core = task.core();
        let ids: Vec<usize> = core.ids().collect();
        let mut found_valid = false;
        for mask in 0u32..(1 << ids.len()) {
            let m = Statement::from_ids(
                ids.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, id)| *id),
            );
            if task.is_valid_model(&m).unwrap() {
                found_valid = true;
                let recon =
                    Task::reconstruct_decisions(task.world(), &m, task.situations());
                assert_eq!(recon, task.decisions());
                assert!(task.generalises(&m));
            }
        }
        assert!(found_valid);
    }

    #[test]
    fn empty_model_reconstructs_everything_reachable() {
        let (_, task) = tiny_task();
        let recon = Task::reconstruct_decisions(
            task.world(),
            &Statement::EMPTY,
            task.situations(),
        );
        assert_eq!(recon.len(), 4);
    }

    #[test]
    fn child_task_relation_is_strict() {
        let (_, task) = tiny_task();
        assert!(!task.is_child_of(&task).unwrap());
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let sampled = task.sample_child(1, &mut rng).unwrap();
        assert!(!sampled.degenerate);
        assert!(sampled.child.is_child_of(&task).unwrap());
    }

    #[test]
    fn degenerate_sample_is_flagged() {
        let (_, task) = tiny_task();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let sampled = task.sample_child(2, &mut rng).unwrap();
        assert!(sampled.degenerate);
    }

    #[test]
    fn sampling_is_deterministic() {
        let (_, task) = tiny_task();
        let d1 = task
            .sample_child(1, &mut ChaCha12Rng::seed_from_u64(9))
            .unwrap();
        let d2 = task
            .sample_child(1, &mut ChaCha12Rng::seed_from_u64(9))
            .unwrap();
        assert_eq!(d1.child.decisions(), d2.child.decisions());
    }

    #[test]
    fn dk_out_of_range_rejected() {
        let (_, task) = tiny_task();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert!(matches!(
            task.sample_child(3, &mut rng),
            Err(Error::BadChildSize { .. })
        ));
    }

    #[test]
    fn probability_ordering_matches_weakness_on_trueset_universe() {
        let (v, task) = tiny_task();
        let universe = LanguageUniverse::of_truesets(&v);
        let core = task.core();
        let ids: Vec<usize> = core.ids().collect();
        let mut scored = Vec::new();
        for mask in 0u32..(1 << ids.len()) {
            let m = Statement::from_ids(
                ids.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, id)| *id),
            );
            if task.is_valid_model(&m).unwrap() {
                let w = universe.weakness_exact(&m).unwrap();
                let p = task.generalisation_probability(&m, &universe).unwrap();
                // |B| = w(m) - |D| for valid models on the closed world
                assert_eq!(p.covered, w - task.decisions().len());
                scored.push((w, p.probability));
            }
        }
        for (wa, pa) in &scored {
            for (wb, pb) in &scored {
                assert_eq!(wa >= wb, pa >= pb);
            }
        }
    }
}
