//! The weakness prior, proxy scoring, the sequential-reward
//! simulation, and the utility-of-intelligence measure.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::{LanguageUniverse, Statement};
use crate::search::{search_mdl, search_weakest, SearchConfig, SearchOutcome, TierUsed};
use crate::task::Task;

/// The scoring rule used to pick among valid models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Proxy {
    /// Maximise weakness.
    Weakness,
    /// Minimise description length (model cardinality).
    Mdl,
}

impl Proxy {
    pub fn search(
        &self,
        task: &Task,
        config: &SearchConfig,
        rng: &mut impl rand::Rng,
    ) -> Result<SearchOutcome> {
        match self {
            Proxy::Weakness => search_weakest(task, config, rng),
            Proxy::Mdl => search_mdl(task, config, rng),
        }
    }
}

impl std::fmt::Display for Proxy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Proxy::Weakness => write!(f, "weakness"),
            Proxy::Mdl => write!(f, "mdl"),
        }
    }
}

impl std::str::FromStr for Proxy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Proxy> {
        match s {
            "weakness" | "weakest" | "c_w" => Ok(Proxy::Weakness),
            "mdl" | "c_mdl" => Ok(Proxy::Mdl),
            other => Err(Error::Parse(format!("unknown proxy `{other}`"))),
        }
    }
}

/// `2^w(l) / 2^|L|`, exact.
pub fn prior(l: &Statement, universe: &LanguageUniverse) -> Result<BigRational> {
    let w = universe.weakness_exact(l)?;
    let num = BigUint::one() << w;
    let den = BigUint::one() << universe.len();
    Ok(BigRational::new(num.into(), den.into()))
}

/// A maximal pairwise mutually exclusive set containing `seed_member`,
/// with the sum of member priors. The sum is reported, never asserted
/// to be 1.
#[derive(Debug, Clone)]
pub struct MutualExclusionReport {
    pub members: Vec<Statement>,
    pub sum: BigRational,
}

/// Two statements are mutually exclusive when neither lies in the
/// other's extension. Builds `K_x` greedily: candidates are taken in
/// descending weakness, ties in ascending statement order.
pub fn mutual_exclusion_audit(
    x: &Statement,
    universe: &LanguageUniverse,
) -> Result<MutualExclusionReport> {
    if !universe.is_satisfiable(x) {
        return Err(Error::Unsatisfiable);
    }
    let mut ranked: Vec<(usize, Statement)> = universe
        .statements()
        .iter()
        .map(|s| Ok((universe.weakness_exact(s)?, *s)))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|(wa, a), (wb, b)| wb.cmp(wa).then(a.cmp(b)));
    let excludes = |a: &Statement, b: &Statement| !a.is_subset_of(b) && !b.is_subset_of(a);
    let mut members = vec![*x];
    for (_, s) in ranked {
        if members.iter().all(|m| excludes(m, &s)) {
            members.push(s);
        }
    }
    members.sort();
    let mut sum = BigRational::from_integer(0.into());
    for m in &members {
        sum += prior(m, universe)?;
    }
    Ok(MutualExclusionReport { members, sum })
}

/// One step of a sequential-reward trace.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub t: usize,
    pub chosen: Statement,
    pub score: u128,
    pub tier: TierUsed,
    pub generalised: bool,
}

/// Outcome of a sequential simulation: the model generalises for the
/// first time at step `g`, and every step from `g` on earns one unit
/// of reward.
#[derive(Debug, Clone)]
pub struct RewardTrace {
    pub horizon: usize,
    /// First step whose chosen model generalises to the parent; `None`
    /// when no step does (reward 0).
    pub generalisation_step: Option<usize>,
    pub steps: Vec<TraceStep>,
    pub reward: usize,
}

/// Grow an ostensive definition of `parent` one uniformly sampled new
/// decision per step; at each step search under `proxy` and check
/// whether the chosen model generalises to the parent.
///
/// The arrival order is uniform without replacement over the parent's
/// distinct decisions.
pub fn remark6_simulate(
    parent: &Task,
    proxy: Proxy,
    config: &SearchConfig,
    seed: u64,
    horizon: usize,
) -> Result<RewardTrace> {
    let distinct = parent.decisions().len();
    if horizon == 0 || horizon > distinct {
        return Err(Error::BadChildSize {
            dk: horizon,
            parent: distinct,
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let order = {
        use rand::seq::SliceRandom;
        let mut indices: Vec<usize> = (0..parent.examples().len()).collect();
        indices.shuffle(&mut rng);
        let mut picked: Vec<(Statement, Statement)> = Vec::new();
        for i in indices {
            let (s, d) = parent.examples()[i];
            if picked.iter().any(|(_, pd)| *pd == d) {
                continue;
            }
            picked.push((s, d));
        }
        picked
    };
    let mut steps = Vec::with_capacity(horizon);
    let mut g = None;
    for t in 1..=horizon {
        let child = Task::from_examples(
            parent.world().clone(),
            order[..t].to_vec(),
            parent.strict_closure(),
        )?;
        let outcome = proxy.search(&child, config, &mut rng)?;
        let generalised = parent.generalises(&outcome.chosen);
        if generalised && g.is_none() {
            g = Some(t);
        }
        steps.push(TraceStep {
            t,
            chosen: outcome.chosen,
            score: outcome.score,
            tier: outcome.tier,
            generalised,
        });
    }
    let reward = g.map_or(0, |g| horizon - g + 1);
    Ok(RewardTrace {
        horizon,
        generalisation_step: g,
        steps,
        reward,
    })
}

/// `ε = max_m w(m) - |D|`: how much the weakest model buys over a
/// lookup table. Zero when the weakest model's extension is exactly
/// the decision set.
pub fn intelligence_utility(task: &Task, config: &SearchConfig) -> Result<i128> {
    let mut rng = rand::rngs::mock::StepRng::new(0, 1);
    let best = search_weakest(task, config, &mut rng)?;
    Ok(best.score as i128 - task.decisions().len() as i128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{StateSpace, Vocabulary, VocabularyRecipe};
    use crate::task::World;
    use num_traits::ToPrimitive;
    use std::sync::Arc;

    fn literals2() -> Arc<Vocabulary> {
        Vocabulary::build(&VocabularyRecipe::Literals, StateSpace::new(2).unwrap()).unwrap()
    }

    #[test]
    fn empty_statement_has_prior_one() {
        let u = LanguageUniverse::enumerate(&literals2()).unwrap();
        assert!(prior(&Statement::EMPTY, &u).unwrap().is_one());
    }

    #[test]
    fn prior_ordering_is_weakness_ordering() {
        let u = LanguageUniverse::enumerate(&literals2()).unwrap();
        let stmts = u.statements().to_vec();
        for a in &stmts {
            for b in &stmts {
                let wa = u.weakness_exact(a).unwrap();
                let wb = u.weakness_exact(b).unwrap();
                let pa = prior(a, &u).unwrap();
                let pb = prior(b, &u).unwrap();
                assert_eq!(wa >= wb, pa >= pb);
                assert!(pa > BigRational::from_integer(0.into()));
                assert!(pa <= BigRational::from_integer(1.into()));
            }
        }
    }

    #[test]
    fn audit_with_empty_seed_is_singleton() {
        let u = LanguageUniverse::enumerate(&literals2()).unwrap();
        let report = mutual_exclusion_audit(&Statement::EMPTY, &u).unwrap();
        // The empty statement is comparable to everything, so nothing
        // else can join.
        assert_eq!(report.members, vec![Statement::EMPTY]);
        assert!(report.sum.is_one());
    }

    #[test]
    fn audit_sum_reaches_one_on_complementary_truesets() {
        // One-bit literals, truesets only: {b0} and {!b0}, each of
        // weakness 1 in a universe of size 2; priors 1/2 + 1/2.
        let v =
            Vocabulary::build(&VocabularyRecipe::Literals, StateSpace::new(1).unwrap()).unwrap();
        let u = LanguageUniverse::of_truesets(&v);
        assert_eq!(u.len(), 2);
        let x = v.trueset(0);
        let report = mutual_exclusion_audit(&x, &u).unwrap();
        assert_eq!(report.members.len(), 2);
        assert!(report.sum.is_one());
    }

    /// Parent where every trueset is both situation and decision: no
    /// reachable negatives at any step, so the empty statement is the
    /// unique weakest model from t = 1 and generalises immediately.
    fn permissive_parent() -> Task {
        let v = literals2();
        let world = World::Vocab(v.clone());
        let all: Vec<Statement> = (0..4).map(|s| v.trueset(s)).collect();
        Task::new(world, all.clone(), all, false).unwrap()
    }

    #[test]
    fn immediate_generalisation_earns_full_reward() {
        let parent = permissive_parent();
        let trace =
            remark6_simulate(&parent, Proxy::Weakness, &SearchConfig::default(), 11, 4).unwrap();
        assert_eq!(trace.generalisation_step, Some(1));
        assert_eq!(trace.reward, 4);
        assert_eq!(trace.steps.len(), 4);
    }

    #[test]
    fn reward_matches_first_generalisation_step() {
        let v = Vocabulary::build(
            &VocabularyRecipe::LiteralsEq,
            StateSpace::new(3).unwrap(),
        )
        .unwrap();
        let world = World::Vocab(v.clone());
        let mut examples = Vec::new();
        for (d, free) in [(0b000, 0b001), (0b101, 0b100), (0b010, 0b011), (0b111, 0b110)] {
            let s = v.trueset(d).intersection(&v.trueset(free));
            examples.push((s, v.trueset(d)));
        }
        let parent = Task::from_examples(world, examples, false).unwrap();
        for proxy in [Proxy::Weakness, Proxy::Mdl] {
            for seed in 0..20 {
                let trace =
                    remark6_simulate(&parent, proxy, &SearchConfig::default(), seed, 4).unwrap();
                match trace.generalisation_step {
                    Some(g) => {
                        assert_eq!(trace.reward, 4 - g + 1);
                        assert!(trace.steps[g - 1].generalised);
                        assert!(trace.steps[..g - 1].iter().all(|s| !s.generalised));
                    }
                    None => assert_eq!(trace.reward, 0),
                }
            }
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let parent = permissive_parent();
        let cfg = SearchConfig::default();
        let a = remark6_simulate(&parent, Proxy::Weakness, &cfg, 5, 3).unwrap();
        let b = remark6_simulate(&parent, Proxy::Weakness, &cfg, 5, 3).unwrap();
        assert_eq!(a.reward, b.reward);
        for (x, y) in a.steps.iter().zip(&b.steps) {
            assert_eq!(x.chosen, y.chosen);
        }
    }

    #[test]
    fn lookup_table_has_zero_utility() {
        // The weakest model is empty; on the trueset universe its
        // extension is exactly the decision set.
        let parent = permissive_parent();
        let World::Vocab(v) = parent.world() else { unreachable!() };
        let u = LanguageUniverse::of_truesets(v);
        let eps = intelligence_utility(&parent, &SearchConfig::exact(u)).unwrap();
        assert_eq!(eps, 0);
    }

    #[test]
    fn horizon_bounds_enforced() {
        let parent = permissive_parent();
        let cfg = SearchConfig::default();
        assert!(remark6_simulate(&parent, Proxy::Weakness, &cfg, 0, 0).is_err());
        assert!(remark6_simulate(&parent, Proxy::Weakness, &cfg, 0, 5).is_err());
    }

    #[test]
    fn prior_halves_per_missing_weakness_unit() {
        let u = LanguageUniverse::enumerate(&literals2()).unwrap();
        let v = literals2();
        let t = v.trueset(0);
        let p = prior(&t, &u).unwrap();
        let w = u.weakness_exact(&t).unwrap();
        let expected = BigRational::new(
            (BigUint::one() << w).into(),
            (BigUint::one() << u.len()).into(),
        );
        assert_eq!(p, expected);
        assert!(p.to_f64().unwrap() > 0.0);
    }
}
