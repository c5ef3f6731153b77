//! The canonical two-box prediction scenario and its variants.
//!
//! A [`Scenario`] bundles the choice and prediction spaces, the payoff table,
//! a predictor accuracy α, an exogenous prediction marginal, and timeline
//! metadata. Two factorizations of the joint over (choice, prediction) give
//! two different games:
//!
//! - the *fearful* game on P(y,g) = P(g|y)·P(y): you set the unconditioned
//!   choice marginal, the predictor owns the accuracy table;
//! - the *realist* game on P(y,g) = P(y|g)·P(g): you set one
//!   prediction-independent conditional h for every prediction value, the
//!   predictor owns the prediction marginal.
//!
//! The combined solver restricts the realist-style choice to the feasible
//! set that survives both factorizations at once, and the choose-your-game
//! variant picks whichever single game pays better against a pre-fixed
//! prediction marginal.
//!
//! The timeline is inert metadata: no computation in this crate reads it, so
//! reversing it (prediction recorded after the choice instead of before) can
//! never change any result. The invariance tests check this behaviorally
//! rather than trusting the claim.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::Zero;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consistency::{feasible_g_independent, ConsistencyError, FeasibleSet};
use crate::net::{
    best_response, expected_payoff, joint_from_net, BayesNet, Game, NetError, NetNode, NodeCpd,
    PayoffTable, PlayerId, StrategyProfile,
};
use crate::prob::{
    rational_to_f64, rational_to_string, Cpd, Dist, OutcomeSpace, Prob, ProbError, Rational,
};

/// Variable name of your choice in every net built here.
pub const CHOICE_VAR: &str = "y";
/// Variable name of the prediction in every net built here.
pub const PREDICTION_VAR: &str = "g";
/// The player receiving the payoffs.
pub const PLAYER_YOU: &str = "you";
/// The predictor.
pub const PLAYER_PREDICTOR: &str = "W";

/// Errors raised by scenario handling and the solvers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NewcombError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("profile does not fit the selected net: {0}")]
    InvalidProfile(String),
    #[error("sample count must be positive")]
    InvalidSampleCount,
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Consistency(#[from] ConsistencyError),
}

#[derive(Clone, Serialize, Deserialize)]
struct ScenarioRepr {
    y_space: Vec<String>,
    g_space: Vec<String>,
    /// Dense payoff values in row-major canonical order over (g, y).
    payoff: Vec<i64>,
    alpha: Prob,
    pg: Dist,
    timeline: Vec<String>,
}

/// A concrete two-box instance: outcome labels, the payoff table, the
/// predictor accuracy, the exogenous prediction marginal used by the
/// realist-style solvers, and event-timeline metadata.
///
/// The timeline participates in no computation; it exists so that reversing
/// it is a checkable no-op.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioRepr", into = "ScenarioRepr")]
pub struct Scenario {
    choice_space: OutcomeSpace,
    prediction_space: OutcomeSpace,
    payoff: PayoffTable,
    alpha: Prob,
    pg: Dist,
    timeline: Vec<String>,
}

impl Scenario {
    pub fn new(
        choice_space: OutcomeSpace,
        prediction_space: OutcomeSpace,
        payoff_values: Vec<i64>,
        alpha: Prob,
        pg: Dist,
        timeline: Vec<String>,
    ) -> Result<Self, NewcombError> {
        if choice_space.labels() != prediction_space.labels() {
            return Err(NewcombError::InvalidScenario(
                "prediction space must carry the same labels as the choice space".to_string(),
            ));
        }
        if pg.space() != &prediction_space {
            return Err(NewcombError::InvalidScenario(
                "pg must be a distribution over the prediction space".to_string(),
            ));
        }
        if timeline.is_empty() {
            return Err(NewcombError::InvalidScenario(
                "timeline needs at least one event".to_string(),
            ));
        }
        for (i, e) in timeline.iter().enumerate() {
            if timeline[..i].contains(e) {
                return Err(NewcombError::InvalidScenario(format!(
                    "timeline repeats event `{e}`"
                )));
            }
        }
        let payoff = PayoffTable::new(
            vec![
                (PREDICTION_VAR.to_string(), prediction_space.clone()),
                (CHOICE_VAR.to_string(), choice_space.clone()),
            ],
            payoff_values,
        )?;
        Ok(Scenario {
            choice_space,
            prediction_space,
            payoff,
            alpha,
            pg,
            timeline,
        })
    }

    /// The standard instance: choices {AB, B}, payoffs 1000 / 0 / 1,001,000 /
    /// 1,000,000 over (prediction, choice), a perfectly accurate predictor,
    /// a uniform default prediction marginal, and the conventional
    /// prediction-before-choice timeline.
    pub fn canonical() -> Self {
        let space = OutcomeSpace::new(["AB", "B"]).expect("two distinct labels");
        Scenario::new(
            space.clone(),
            space.clone(),
            vec![1000, 0, 1_001_000, 1_000_000],
            Prob::one(),
            Dist::uniform(space),
            vec!["predict".to_string(), "choose".to_string()],
        )
        .expect("canonical instance is well formed")
    }

    pub fn choice_space(&self) -> &OutcomeSpace {
        &self.choice_space
    }

    pub fn prediction_space(&self) -> &OutcomeSpace {
        &self.prediction_space
    }

    pub fn payoff(&self) -> &PayoffTable {
        &self.payoff
    }

    pub fn alpha(&self) -> &Prob {
        &self.alpha
    }

    pub fn pg(&self) -> &Dist {
        &self.pg
    }

    pub fn timeline(&self) -> &[String] {
        &self.timeline
    }

    /// The choice-first net: your choice is the parentless node, the
    /// prediction conditions on it.
    pub fn fearful_net(&self) -> BayesNet {
        BayesNet::new(vec![
            NetNode::new(
                CHOICE_VAR,
                self.choice_space.clone(),
                Vec::<String>::new(),
                PLAYER_YOU,
            ),
            NetNode::new(
                PREDICTION_VAR,
                self.prediction_space.clone(),
                [CHOICE_VAR],
                PLAYER_PREDICTOR,
            ),
        ])
        .expect("two-node chain is a valid net")
    }

    /// The prediction-first net: the prediction is the parentless node, your
    /// choice conditions on it.
    pub fn realist_net(&self) -> BayesNet {
        BayesNet::new(vec![
            NetNode::new(
                PREDICTION_VAR,
                self.prediction_space.clone(),
                Vec::<String>::new(),
                PLAYER_PREDICTOR,
            ),
            NetNode::new(
                CHOICE_VAR,
                self.choice_space.clone(),
                [PREDICTION_VAR],
                PLAYER_YOU,
            ),
        ])
        .expect("two-node chain is a valid net")
    }

    pub fn fearful_game(&self) -> Game {
        Game::new(
            self.fearful_net(),
            self.payoff.clone(),
            PlayerId::new(PLAYER_YOU),
        )
        .expect("payoff table built over the same variables")
    }

    pub fn realist_game(&self) -> Game {
        Game::new(
            self.realist_net(),
            self.payoff.clone(),
            PlayerId::new(PLAYER_YOU),
        )
        .expect("payoff table built over the same variables")
    }

    /// The same scenario with the event timeline reversed. Pure metadata:
    /// every analysis operation must produce identical output on the result.
    pub fn time_reverse(&self) -> Scenario {
        let mut reversed = self.clone();
        reversed.timeline.reverse();
        reversed
    }
}

impl TryFrom<ScenarioRepr> for Scenario {
    type Error = NewcombError;

    fn try_from(r: ScenarioRepr) -> Result<Self, Self::Error> {
        Scenario::new(
            OutcomeSpace::new(r.y_space)?,
            OutcomeSpace::new(r.g_space)?,
            r.payoff,
            r.alpha,
            r.pg,
            r.timeline,
        )
    }
}

impl From<Scenario> for ScenarioRepr {
    fn from(s: Scenario) -> Self {
        ScenarioRepr {
            y_space: s.choice_space.labels().to_vec(),
            g_space: s.prediction_space.labels().to_vec(),
            payoff: s.payoff.values().to_vec(),
            alpha: s.alpha,
            pg: s.pg,
            timeline: s.timeline,
        }
    }
}

/// Which solver produced a recommendation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GameKind {
    Fearful,
    Realist,
    Combined,
    Variant,
}

impl std::fmt::Display for GameKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GameKind::Fearful => "FEARFUL",
            GameKind::Realist => "REALIST",
            GameKind::Combined => "COMBINED",
            GameKind::Variant => "VARIANT",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct RecommendationRepr {
    game: GameKind,
    strategy: Dist,
    expected_value: String,
    expected_value_decimal: f64,
    tie_set: Vec<Dist>,
}

/// A solver's answer: the recommended choice distribution, its exact
/// expected dollar value, and every equally-optimal alternative (canonical
/// pick included, so a singleton tie set means no tie).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "RecommendationRepr")]
pub struct Recommendation {
    pub game: GameKind,
    pub strategy: Dist,
    pub expected_value: Rational,
    pub tie_set: Vec<Dist>,
}

impl From<Recommendation> for RecommendationRepr {
    fn from(r: Recommendation) -> Self {
        RecommendationRepr {
            game: r.game,
            strategy: r.strategy,
            expected_value: rational_to_string(&r.expected_value),
            expected_value_decimal: rational_to_f64(&r.expected_value),
            tie_set: r.tie_set,
        }
    }
}

fn money(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Best response in the choice-first game with the predictor fixed at the
/// α-accurate table: maximize expected payoff over your unconditioned choice
/// distribution. The optimum sits at a point mass; above the crossover
/// accuracy it is the one-box strategy.
pub fn solve_fearful(scenario: &Scenario, alpha: &Prob) -> Result<Recommendation, NewcombError> {
    let game = scenario.fearful_game();
    let fixed = StrategyProfile::new().with(
        PREDICTION_VAR,
        NodeCpd::from_cpd(&Cpd::alpha_accurate(alpha, scenario.choice_space())?),
    );
    let br = best_response(&game, &PlayerId::new(PLAYER_YOU), &fixed)?;
    let strategy = br.assignment[CHOICE_VAR]
        .as_prior()
        .expect("the choice node has no parents in this net")
        .clone();
    let tie_set = br
        .ties
        .iter()
        .map(|a| {
            a[CHOICE_VAR]
                .as_prior()
                .expect("the choice node has no parents in this net")
                .clone()
        })
        .collect();
    Ok(Recommendation {
        game: GameKind::Fearful,
        strategy,
        expected_value: br.value,
        tie_set,
    })
}

/// Expected payoff of playing the prediction-independent conditional `h`
/// against the prediction marginal `pg` in the prediction-first net.
fn realist_value(scenario: &Scenario, pg: &Dist, h: &Dist) -> Result<Rational, NewcombError> {
    let profile = StrategyProfile::new()
        .with(PREDICTION_VAR, NodeCpd::prior(pg.clone()))
        .with(
            CHOICE_VAR,
            NodeCpd::tied(vec![scenario.prediction_space().clone()], h.clone()),
        );
    let joint = joint_from_net(&scenario.realist_net(), &profile)?;
    Ok(expected_payoff(&joint, scenario.payoff())?)
}

/// Expected payoff of the choice marginal `py` in the choice-first net with
/// the predictor fixed at the α-accurate table.
fn fearful_value(scenario: &Scenario, alpha: &Prob, py: &Dist) -> Result<Rational, NewcombError> {
    let profile = StrategyProfile::new()
        .with(CHOICE_VAR, NodeCpd::prior(py.clone()))
        .with(
            PREDICTION_VAR,
            NodeCpd::from_cpd(&Cpd::alpha_accurate(alpha, scenario.choice_space())?),
        );
    let joint = joint_from_net(&scenario.fearful_net(), &profile)?;
    Ok(expected_payoff(&joint, scenario.payoff())?)
}

/// Pick the best candidate in order, exact comparisons, first maximizer
/// canonical, all maximizers reported.
fn argmax_dists(game: GameKind, candidates: Vec<(Dist, Rational)>) -> Recommendation {
    let mut best: Option<(Dist, Rational)> = None;
    let mut ties: Vec<Dist> = Vec::new();
    for (d, v) in candidates {
        match &best {
            None => {
                ties.push(d.clone());
                best = Some((d, v));
            }
            Some((_, bv)) if v > *bv => {
                ties.clear();
                ties.push(d.clone());
                best = Some((d, v));
            }
            Some((_, bv)) if v == *bv => ties.push(d),
            Some(_) => {}
        }
    }
    let (strategy, expected_value) = best.expect("candidate list is never empty");
    Recommendation {
        game,
        strategy,
        expected_value,
        tie_set: ties,
    }
}

/// Best response in the prediction-first game with the predictor fixed at
/// `pg`: maximize over the prediction-independent conditionals h. Expected
/// payoff is linear in h, so a point mass attains the optimum; under the
/// canonical payoffs the two-box strategy wins for every pg.
pub fn solve_realist(scenario: &Scenario, pg: &Dist) -> Result<Recommendation, NewcombError> {
    if pg.space() != scenario.prediction_space() {
        return Err(NewcombError::InvalidProfile(
            "pg must be a distribution over the prediction space".to_string(),
        ));
    }
    let candidates = scenario
        .choice_space()
        .labels()
        .iter()
        .map(|l| {
            let h = Dist::delta(scenario.choice_space().clone(), l)?;
            let v = realist_value(scenario, pg, &h)?;
            Ok((h, v))
        })
        .collect::<Result<Vec<_>, NewcombError>>()?;
    Ok(argmax_dists(GameKind::Realist, candidates))
}

/// Choice under the merged factorizations: the prediction-independent
/// conditional is restricted to the set feasible against the scenario's
/// α-accurate predictor, and each survivor is valued under the joint that
/// predictor induces. Away from α = 1/2 the feasible set is the two point
/// masses (one-boxing wins under the canonical payoffs whenever α > 1/2);
/// at α = 1/2 every h is feasible and the optimum still sits at a vertex by
/// linearity.
pub fn solve_combined_constrained(scenario: &Scenario) -> Result<Recommendation, NewcombError> {
    let feasible = feasible_g_independent(scenario.alpha(), scenario.choice_space())?;
    let members = match feasible {
        FeasibleSet::Finite { members } => members,
        FeasibleSet::All => scenario
            .choice_space()
            .labels()
            .iter()
            .map(|l| Dist::delta(scenario.choice_space().clone(), l))
            .collect::<Result<Vec<_>, _>>()?,
    };
    let candidates = members
        .into_iter()
        .map(|h| {
            let v = fearful_value(scenario, scenario.alpha(), &h)?;
            Ok((h, v))
        })
        .collect::<Result<Vec<_>, NewcombError>>()?;
    Ok(argmax_dists(GameKind::Combined, candidates))
}

#[derive(Clone, Serialize, Deserialize)]
struct VariantOutcomeRepr {
    chosen_branch: GameKind,
    branch_tie: bool,
    fearful_value: String,
    fearful_value_decimal: f64,
    realist_value: String,
    realist_value_decimal: f64,
    recommendation: RecommendationRepr,
}

/// Result of the choose-your-game variant: which branch pays better against
/// the pre-fixed prediction marginal, whether the branches tie exactly, and
/// the winning branch's recommendation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "VariantOutcomeRepr")]
pub struct VariantOutcome {
    pub chosen_branch: GameKind,
    pub branch_tie: bool,
    pub fearful_value: Rational,
    pub realist_value: Rational,
    pub recommendation: Recommendation,
}

impl From<VariantOutcome> for VariantOutcomeRepr {
    fn from(v: VariantOutcome) -> Self {
        VariantOutcomeRepr {
            chosen_branch: v.chosen_branch,
            branch_tie: v.branch_tie,
            fearful_value: rational_to_string(&v.fearful_value),
            fearful_value_decimal: rational_to_f64(&v.fearful_value),
            realist_value: rational_to_string(&v.realist_value),
            realist_value_decimal: rational_to_f64(&v.realist_value),
            recommendation: v.recommendation.into(),
        }
    }
}

/// The variant in which you first pick which game to play and then set the
/// corresponding distribution. The choice-first branch is valued with a
/// perfectly accurate predictor; the prediction-first branch is valued
/// against `pg`. The better branch is chosen by strict comparison; when both
/// pay exactly the same (pg puts mass 999/1000 on one-boxing under the
/// canonical payoffs) the tie is reported and the choice-first branch is the
/// canonical pick.
pub fn solve_variant_choose_game(
    scenario: &Scenario,
    pg: &Dist,
) -> Result<VariantOutcome, NewcombError> {
    let fearful = solve_fearful(scenario, &Prob::one())?;
    let realist = solve_realist(scenario, pg)?;
    let (chosen_branch, branch_tie, winner) =
        match realist.expected_value.cmp(&fearful.expected_value) {
            std::cmp::Ordering::Greater => (GameKind::Realist, false, &realist),
            std::cmp::Ordering::Less => (GameKind::Fearful, false, &fearful),
            std::cmp::Ordering::Equal => (GameKind::Fearful, true, &fearful),
        };
    let recommendation = Recommendation {
        game: GameKind::Variant,
        strategy: winner.strategy.clone(),
        expected_value: winner.expected_value.clone(),
        tie_set: winner.tie_set.clone(),
    };
    Ok(VariantOutcome {
        chosen_branch,
        branch_tie,
        fearful_value: fearful.expected_value,
        realist_value: realist.expected_value,
        recommendation,
    })
}

/// Which net to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SimNet {
    Fearful,
    Realist,
}

/// Identifier of the sampling scheme recorded in every [`EmpiricalStats`]:
/// ChaCha12 seeded from the 64-bit seed, 53-bit uniform draws on [0, 1),
/// inverse CDF over the joint's canonical cell order.
pub const GENERATOR_ID: &str = "chacha12:u53:invcdf";

#[derive(Clone, Serialize, Deserialize)]
struct EmpiricalStatsRepr {
    net: SimNet,
    n: u64,
    seed: u64,
    generator: String,
    counts: Vec<CellCount>,
    mean_payoff: String,
    mean_payoff_decimal: f64,
    payoff_std_error: f64,
    accuracy: String,
    accuracy_decimal: f64,
    accuracy_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCount {
    pub assignment: BTreeMap<String, String>,
    pub count: u64,
}

/// Seeded sampling summary: per-cell counts in canonical order, the exact
/// empirical mean payoff and empirical accuracy (fraction of samples with
/// prediction equal to choice), and float standard errors. The same seed
/// always reproduces the same stats, byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "EmpiricalStatsRepr")]
pub struct EmpiricalStats {
    pub net: SimNet,
    pub n: u64,
    pub seed: u64,
    pub generator: String,
    pub counts: Vec<CellCount>,
    pub mean_payoff: Rational,
    pub payoff_std_error: f64,
    pub accuracy: Rational,
    pub accuracy_std_error: f64,
}

impl From<EmpiricalStats> for EmpiricalStatsRepr {
    fn from(e: EmpiricalStats) -> Self {
        EmpiricalStatsRepr {
            net: e.net,
            n: e.n,
            seed: e.seed,
            generator: e.generator,
            counts: e.counts,
            mean_payoff: rational_to_string(&e.mean_payoff),
            mean_payoff_decimal: rational_to_f64(&e.mean_payoff),
            payoff_std_error: e.payoff_std_error,
            accuracy: rational_to_string(&e.accuracy),
            accuracy_decimal: rational_to_f64(&e.accuracy),
            accuracy_std_error: e.accuracy_std_error,
        }
    }
}

/// One uniform draw on [0, 1) with 53 bits of resolution.
fn u53(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draw `n` i.i.d. samples of (choice, prediction) from the selected net's
/// joint under `profile`, by inverse CDF over canonical cell order with a
/// seeded deterministic generator, and summarize them. The per-call
/// generator is private state; concurrent calls are independent.
pub fn simulate(
    scenario: &Scenario,
    net: SimNet,
    profile: &StrategyProfile,
    n: u64,
    seed: u64,
) -> Result<EmpiricalStats, NewcombError> {
    if n == 0 {
        return Err(NewcombError::InvalidSampleCount);
    }
    let bayes = match net {
        SimNet::Fearful => scenario.fearful_net(),
        SimNet::Realist => scenario.realist_net(),
    };
    let joint =
        joint_from_net(&bayes, profile).map_err(|e| NewcombError::InvalidProfile(e.to_string()))?;

    // cumulative cell boundaries as floats; the last is pinned to 1.0 so
    // every draw lands in some cell
    let mut cumulative = Vec::with_capacity(joint.cells().len());
    let mut acc = Rational::zero();
    for cell in joint.cells() {
        acc += cell.as_ratio();
        cumulative.push(rational_to_f64(&acc));
    }
    if let Some(last) = cumulative.last_mut() {
        *last = 1.0;
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; joint.cells().len()];
    for _ in 0..n {
        let u = u53(&mut rng);
        let cell = cumulative.partition_point(|c| *c <= u);
        counts[cell] += 1;
    }

    let assignments: Vec<Vec<usize>> = joint.assignments().collect();
    let y_pos = joint
        .var_index(CHOICE_VAR)
        .expect("scenario nets always carry the choice variable");
    let g_pos = joint
        .var_index(PREDICTION_VAR)
        .expect("scenario nets always carry the prediction variable");

    let n_rat = Rational::from_integer(BigInt::from(n));
    let mut payoff_sum = Rational::zero();
    let mut match_count: u64 = 0;
    let mut cell_payoffs = Vec::with_capacity(assignments.len());
    for (idx, &count) in assignments.iter().zip(&counts) {
        let labels = joint.assignment_labels(idx);
        let value = scenario.payoff().value_for(&labels)?;
        cell_payoffs.push(value);
        payoff_sum += Rational::from_integer(BigInt::from(count)) * money(value);
        let y_label = joint.variables()[y_pos].1.label(idx[y_pos]);
        let g_label = joint.variables()[g_pos].1.label(idx[g_pos]);
        if y_label == g_label {
            match_count += count;
        }
    }
    let mean_payoff = payoff_sum / &n_rat;
    let accuracy = Rational::from_integer(BigInt::from(match_count)) / &n_rat;

    // sample standard error of the mean payoff
    let payoff_std_error = if n > 1 {
        let mut ss = Rational::zero();
        for (&count, &value) in counts.iter().zip(&cell_payoffs) {
            let d = money(value) - &mean_payoff;
            ss += Rational::from_integer(BigInt::from(count)) * (&d * &d);
        }
        let var = ss / Rational::from_integer(BigInt::from(n - 1));
        (rational_to_f64(&var) / n as f64).sqrt()
    } else {
        0.0
    };
    let p_hat = rational_to_f64(&accuracy);
    let accuracy_std_error = (p_hat * (1.0 - p_hat) / n as f64).sqrt();

    let counts = assignments
        .iter()
        .zip(&counts)
        .map(|(idx, &count)| CellCount {
            assignment: joint.assignment_labels(idx),
            count,
        })
        .collect();

    Ok(EmpiricalStats {
        net,
        n,
        seed,
        generator: GENERATOR_ID.to_string(),
        counts,
        mean_payoff,
        payoff_std_error,
        accuracy,
        accuracy_std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    fn p(s: &str) -> Prob {
        s.parse().unwrap()
    }

    fn delta(scenario: &Scenario, l: &str) -> Dist {
        Dist::delta(scenario.choice_space().clone(), l).unwrap()
    }

    #[test]
    fn canonical_payoffs() {
        let sc = Scenario::canonical();
        let t = sc.payoff();
        assert_eq!(t.value(&[0, 0]), 1000); // predict AB, choose AB
        assert_eq!(t.value(&[0, 1]), 0); // predict AB, choose B
        assert_eq!(t.value(&[1, 0]), 1_001_000); // predict B, choose AB
        assert_eq!(t.value(&[1, 1]), 1_000_000); // predict B, choose B
        for g in 0..2 {
            assert_eq!(t.value(&[g, 0]) - t.value(&[g, 1]), 1000);
        }
    }

    #[test]
    fn scenario_validation() {
        let ab = OutcomeSpace::new(["AB", "B"]).unwrap();
        let other = OutcomeSpace::new(["X", "Y"]).unwrap();
        let err = Scenario::new(
            ab.clone(),
            other.clone(),
            vec![0, 0, 0, 0],
            Prob::one(),
            Dist::uniform(other),
            vec!["predict".into(), "choose".into()],
        );
        assert!(matches!(err, Err(NewcombError::InvalidScenario(_))));

        let err = Scenario::new(
            ab.clone(),
            ab.clone(),
            vec![0, 0, 0],
            Prob::one(),
            Dist::uniform(ab.clone()),
            vec!["predict".into(), "choose".into()],
        );
        assert!(matches!(err, Err(NewcombError::Net(_))));

        let err = Scenario::new(
            ab.clone(),
            ab.clone(),
            vec![0, 0, 0, 0],
            Prob::one(),
            Dist::uniform(ab),
            vec!["predict".into(), "predict".into()],
        );
        assert!(matches!(err, Err(NewcombError::InvalidScenario(_))));
    }

    #[test]
    fn fearful_perfect_predictor() {
        let sc = Scenario::canonical();
        let rec = solve_fearful(&sc, &Prob::one()).unwrap();
        assert_eq!(rec.strategy, delta(&sc, "B"));
        assert_eq!(rec.expected_value, money(1_000_000));
        assert_eq!(rec.tie_set.len(), 1);
    }

    #[test]
    fn fearful_coin_flip_predictor() {
        let sc = Scenario::canonical();
        let rec = solve_fearful(&sc, &p("1/2")).unwrap();
        assert_eq!(rec.strategy, delta(&sc, "AB"));
        assert_eq!(rec.expected_value, money(501_000));
    }

    #[test]
    fn fearful_crossover_accuracy() {
        // both strategies pay 500,500 exactly at α = 1001/2000
        let sc = Scenario::canonical();
        let rec = solve_fearful(&sc, &p("1001/2000")).unwrap();
        assert_eq!(rec.tie_set, vec![delta(&sc, "AB"), delta(&sc, "B")]);
        assert_eq!(rec.strategy, delta(&sc, "AB"));
        assert_eq!(rec.expected_value, money(500_500));

        // strictly above the crossover, one-boxing wins
        let rec = solve_fearful(&sc, &p("1002/2000")).unwrap();
        assert_eq!(rec.strategy, delta(&sc, "B"));
        assert_eq!(rec.tie_set.len(), 1);
    }

    #[test]
    fn realist_examples() {
        let sc = Scenario::canonical();
        let g = sc.prediction_space().clone();

        let rec = solve_realist(&sc, &Dist::delta(g.clone(), "AB").unwrap()).unwrap();
        assert_eq!(rec.strategy, delta(&sc, "AB"));
        assert_eq!(rec.expected_value, money(1000));

        let rec = solve_realist(&sc, &Dist::delta(g.clone(), "B").unwrap()).unwrap();
        assert_eq!(rec.strategy, delta(&sc, "AB"));
        assert_eq!(rec.expected_value, money(1_001_000));

        let rec = solve_realist(&sc, &Dist::uniform(g)).unwrap();
        assert_eq!(rec.strategy, delta(&sc, "AB"));
        assert_eq!(rec.expected_value, money(501_000));
    }

    #[test]
    fn combined_constrained_examples() {
        let sc = Scenario::canonical();
        let rec = solve_combined_constrained(&sc).unwrap();
        assert_eq!(rec.strategy, delta(&sc, "B"));
        assert_eq!(rec.expected_value, money(1_000_000));
        assert_eq!(rec.tie_set.len(), 1);

        // α = 3/4: one-boxing pays 750,000, two-boxing 251,000
        let sc34 = Scenario::new(
            sc.choice_space().clone(),
            sc.prediction_space().clone(),
            sc.payoff().values().to_vec(),
            p("3/4"),
            sc.pg().clone(),
            sc.timeline().to_vec(),
        )
        .unwrap();
        let rec = solve_combined_constrained(&sc34).unwrap();
        assert_eq!(rec.strategy, delta(&sc, "B"));
        assert_eq!(rec.expected_value, money(750_000));
        // the two-box point mass loses: 3/4·1000 + 1/4·1,001,000
        assert_eq!(
            fearful_value(&sc34, sc34.alpha(), &delta(&sc, "AB")).unwrap(),
            money(251_000)
        );

        // flat payoffs: both point masses tie
        let flat = Scenario::new(
            sc.choice_space().clone(),
            sc.prediction_space().clone(),
            vec![7, 7, 7, 7],
            Prob::one(),
            sc.pg().clone(),
            sc.timeline().to_vec(),
        )
        .unwrap();
        let rec = solve_combined_constrained(&flat).unwrap();
        assert_eq!(rec.tie_set, vec![delta(&sc, "AB"), delta(&sc, "B")]);
    }

    #[test]
    fn variant_threshold() {
        let sc = Scenario::canonical();
        let g = sc.prediction_space().clone();
        let pg = |b: &str| Dist::new(g.clone(), vec![p(b).complement(), p(b)]).unwrap();

        let v = solve_variant_choose_game(&sc, &pg("9995/10000")).unwrap();
        assert_eq!(v.chosen_branch, GameKind::Realist);
        assert!(!v.branch_tie);
        assert_eq!(v.recommendation.strategy, delta(&sc, "AB"));

        let v = solve_variant_choose_game(&sc, &pg("998/1000")).unwrap();
        assert_eq!(v.chosen_branch, GameKind::Fearful);
        assert!(!v.branch_tie);
        assert_eq!(v.recommendation.strategy, delta(&sc, "B"));

        let v = solve_variant_choose_game(&sc, &pg("999/1000")).unwrap();
        assert!(v.branch_tie);
        assert_eq!(v.chosen_branch, GameKind::Fearful);
        assert_eq!(v.fearful_value, money(1_000_000));
        assert_eq!(v.realist_value, money(1_000_000));
        assert_eq!(v.recommendation.game, GameKind::Variant);
    }

    #[test]
    fn time_reverse_is_metadata_only() {
        let sc = Scenario::canonical();
        let rev = sc.time_reverse();
        assert_eq!(rev.timeline(), ["choose", "predict"]);
        assert_eq!(rev.time_reverse(), sc);

        let a = serde_json::to_string(&solve_fearful(&sc, &p("3/4")).unwrap()).unwrap();
        let b = serde_json::to_string(&solve_fearful(&rev, &p("3/4")).unwrap()).unwrap();
        assert_eq!(a, b);

        let a = serde_json::to_string(&solve_variant_choose_game(&sc, sc.pg()).unwrap()).unwrap();
        let b = serde_json::to_string(&solve_variant_choose_game(&rev, rev.pg()).unwrap()).unwrap();
        assert_eq!(a, b);

        // above the threshold the reversed scenario still picks the
        // prediction-first branch
        let pg = Dist::new(
            sc.prediction_space().clone(),
            vec![p("5/10000"), p("9995/10000")],
        )
        .unwrap();
        let v = solve_variant_choose_game(&rev, &pg).unwrap();
        assert_eq!(v.chosen_branch, GameKind::Realist);
    }

    #[test]
    fn recommendation_value_reproducible_from_joint() {
        let sc = Scenario::canonical();
        for k in 0..=10i64 {
            let alpha = Prob::ratio(k, 10).unwrap();
            let rec = solve_fearful(&sc, &alpha).unwrap();
            let direct = fearful_value(&sc, &alpha, &rec.strategy).unwrap();
            assert_eq!(rec.expected_value, direct);
        }
        for k in 0..=10i64 {
            let pg = Dist::new(
                sc.prediction_space().clone(),
                vec![
                    Prob::ratio(k, 10).unwrap(),
                    Prob::ratio(10 - k, 10).unwrap(),
                ],
            )
            .unwrap();
            let rec = solve_realist(&sc, &pg).unwrap();
            let direct = realist_value(&sc, &pg, &rec.strategy).unwrap();
            assert_eq!(rec.expected_value, direct);
        }
    }

    #[test]
    fn simulate_deterministic_joint_is_exact() {
        let sc = Scenario::canonical();
        let profile = StrategyProfile::new()
            .with(CHOICE_VAR, NodeCpd::prior(delta(&sc, "B")))
            .with(
                PREDICTION_VAR,
                NodeCpd::from_cpd(&Cpd::alpha_accurate(&Prob::one(), sc.choice_space()).unwrap()),
            );
        let stats = simulate(&sc, SimNet::Fearful, &profile, 10_000, 7).unwrap();
        assert_eq!(stats.mean_payoff, money(1_000_000));
        assert!(stats.accuracy.is_one());
        assert_eq!(stats.payoff_std_error, 0.0);
    }

    #[test]
    fn simulate_reproducible_and_seed_sensitive() {
        let sc = Scenario::canonical();
        let profile = StrategyProfile::new()
            .with(
                CHOICE_VAR,
                NodeCpd::prior(Dist::uniform(sc.choice_space().clone())),
            )
            .with(
                PREDICTION_VAR,
                NodeCpd::from_cpd(&Cpd::alpha_accurate(&p("3/4"), sc.choice_space()).unwrap()),
            );
        let a = simulate(&sc, SimNet::Fearful, &profile, 20_000, 42).unwrap();
        let b = simulate(&sc, SimNet::Fearful, &profile, 20_000, 42).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = simulate(&sc, SimNet::Fearful, &profile, 20_000, 43).unwrap();
        assert_ne!(a.counts, c.counts);
        assert_eq!(a.generator, GENERATOR_ID);
    }

    #[test]
    fn simulate_rejects_bad_inputs() {
        let sc = Scenario::canonical();
        let profile = StrategyProfile::new();
        assert!(matches!(
            simulate(&sc, SimNet::Fearful, &profile, 0, 1),
            Err(NewcombError::InvalidSampleCount)
        ));
        assert!(matches!(
            simulate(&sc, SimNet::Fearful, &profile, 10, 1),
            Err(NewcombError::InvalidProfile(_))
        ));
    }

    #[test]
    fn scenario_json_round_trip() {
        let sc = Scenario::canonical();
        let json = serde_json::to_string_pretty(&sc).unwrap();
        let back: Scenario = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sc);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["alpha"], "1/1");
        assert_eq!(v["payoff"][2], 1_001_000);
        assert_eq!(v["timeline"][0], "predict");
    }
}
