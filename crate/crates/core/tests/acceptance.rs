//! Acceptance suite: one test per criterion, each printing a PASS line once
//! its assertions hold (run with `--nocapture` to see the lines). Every
//! tolerance is pinned in code; all probability checks are exact rational
//! comparisons except the Monte Carlo bound, which uses the stated 3-sigma
//! binomial envelope.

use num::bigint::BigInt;
use num::{One, Zero};
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use newcomb_core::net::{
    best_response, expected_payoff, joint_from_net, BayesNet, Game, NetNode, NodeCpd, PayoffTable,
    PlayerId, StrategyProfile,
};
use newcomb_core::newcomb::{
    simulate, solve_combined_constrained, solve_fearful, solve_realist, solve_variant_choose_game,
    GameKind, Scenario, SimNet, CHOICE_VAR, PREDICTION_VAR,
};
use newcomb_core::{
    accuracy_violation_witness, check_profile, feasible_g_independent,
    feasible_g_independent_oracle, induced_prediction_marginal, Cpd, Dist, ExtendedGame,
    FeasibleSet, OutcomeSpace, PredictionMarginal, Prob, Rational,
};

fn pass(n: u32, what: &str) {
    println!("ACCEPTANCE {n:2} PASS — {what}");
}

fn money(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn space_ab() -> OutcomeSpace {
    OutcomeSpace::new(["AB", "B"]).unwrap()
}

fn delta(l: &str) -> Dist {
    Dist::delta(space_ab(), l).unwrap()
}

fn p(s: &str) -> Prob {
    s.parse().unwrap()
}

fn fearful_net() -> BayesNet {
    BayesNet::new(vec![
        NetNode::new(CHOICE_VAR, space_ab(), Vec::<String>::new(), "you"),
        NetNode::new(PREDICTION_VAR, space_ab(), [CHOICE_VAR], "W"),
    ])
    .unwrap()
}

fn realist_net() -> BayesNet {
    BayesNet::new(vec![
        NetNode::new(PREDICTION_VAR, space_ab(), Vec::<String>::new(), "W"),
        NetNode::new(CHOICE_VAR, space_ab(), [PREDICTION_VAR], "you"),
    ])
    .unwrap()
}

fn fearful_profile(py: Dist, alpha: &Prob) -> StrategyProfile {
    StrategyProfile::new()
        .with(CHOICE_VAR, NodeCpd::prior(py))
        .with(
            PREDICTION_VAR,
            NodeCpd::from_cpd(&Cpd::alpha_accurate(alpha, &space_ab()).unwrap()),
        )
}

fn realist_profile(pg: Dist, h: Dist) -> StrategyProfile {
    StrategyProfile::new()
        .with(PREDICTION_VAR, NodeCpd::prior(pg))
        .with(CHOICE_VAR, NodeCpd::tied(vec![space_ab()], h))
}

#[test]
fn criterion_01_fearful_perfect_predictor() {
    let sc = Scenario::canonical();
    let rec = solve_fearful(&sc, &Prob::one()).unwrap();
    assert_eq!(rec.strategy, delta("B"));
    assert_eq!(rec.expected_value, money(1_000_000));
    assert_eq!(rec.tie_set.len(), 1);
    pass(
        1,
        "fearful game at alpha = 1 recommends B with value exactly 1,000,000",
    );
}

#[test]
fn criterion_02_realist_value_formula_on_grid() {
    let sc = Scenario::canonical();
    for k in 0..=100i64 {
        let pg = Dist::from_weights(
            sc.prediction_space().clone(),
            &[ratio(k, 100), ratio(100 - k, 100)],
        )
        .unwrap();
        let rec = solve_realist(&sc, &pg).unwrap();
        assert_eq!(rec.strategy, delta("AB"), "pg(AB) = {k}/100");
        let expected =
            money(1000) * pg.prob_at(0).as_ratio() + money(1_001_000) * pg.prob_at(1).as_ratio();
        assert_eq!(rec.expected_value, expected, "pg(AB) = {k}/100");
    }
    pass(
        2,
        "realist game recommends AB with value 1000*pg(AB) + 1,001,000*pg(B) on the 101-point grid",
    );
}

#[test]
fn criterion_03_feasible_set_theorem_with_oracle() {
    let space = space_ab();
    let two_deltas = vec![delta("AB"), delta("B")];
    for alpha in [p("3/5"), p("3/4"), p("9/10"), Prob::one()] {
        let analytic = feasible_g_independent(&alpha, &space).unwrap();
        match &analytic {
            FeasibleSet::Finite { members } => assert_eq!(members, &two_deltas),
            FeasibleSet::All => panic!("alpha = {alpha} must pin the two point masses"),
        }
        let oracle = feasible_g_independent_oracle(&alpha, 1000, &space).unwrap();
        assert!(
            oracle.set_eq(&analytic),
            "oracle disagrees at alpha = {alpha}"
        );
    }
    // the permissive point: every grid h survives the oracle
    let oracle = feasible_g_independent_oracle(&p("1/2"), 1000, &space).unwrap();
    match oracle {
        FeasibleSet::Finite { members } => {
            assert_eq!(members.len(), 1001);
            let all_grid = FeasibleSet::All.restrict_to_grid(1000, &space).unwrap();
            for m in &all_grid {
                assert!(members.contains(m));
            }
        }
        FeasibleSet::All => panic!("the oracle reports explicit members"),
    }
    pass(3, "feasible set is exactly {delta_AB, delta_B} for alpha in {3/5, 3/4, 9/10, 1}, oracle at grid 1000 agrees, and alpha = 1/2 admits every grid h");
}

#[test]
fn criterion_04_cross_ratio_inequality_on_201_grid() {
    // alpha^2 * z_AB * z_B != (1-alpha)^2 * z_AB * z_B, cross-multiplied,
    // for every alpha != 1/2 and interior z on the 201x201 grid
    for i in 0..=200i64 {
        if i == 100 {
            continue;
        }
        let alpha = ratio(i, 200);
        let co = Rational::one() - &alpha;
        let a2 = &alpha * &alpha;
        let c2 = &co * &co;
        for j in 1..200i64 {
            let z_ab = ratio(j, 200);
            let z_b = Rational::one() - &z_ab;
            let zz = &z_ab * &z_b;
            assert_ne!(&a2 * &zz, &c2 * &zz, "alpha = {i}/200, z_AB = {j}/200");
        }
    }
    pass(
        4,
        "cross-multiplied cross-ratio inequality holds exactly on the 201x201 rational grid",
    );
}

#[test]
fn criterion_05_combined_constrained_choice() {
    let rec = solve_combined_constrained(&Scenario::canonical()).unwrap();
    assert_eq!(rec.strategy, delta("B"));
    assert_eq!(rec.expected_value, money(1_000_000));
    pass(
        5,
        "combined-constrained solve returns B with value exactly 1,000,000",
    );
}

#[test]
fn criterion_06_induced_prediction_marginal() {
    let diag = Cpd::diagonal(&space_ab());
    match induced_prediction_marginal(&delta("AB"), &diag).unwrap() {
        PredictionMarginal::Determined { pg, .. } => assert_eq!(pg, delta("AB")),
        PredictionMarginal::NoSolution => panic!("h = delta_AB determines pg"),
    }
    match induced_prediction_marginal(&delta("B"), &diag).unwrap() {
        PredictionMarginal::Determined { pg, .. } => assert_eq!(pg, delta("B")),
        PredictionMarginal::NoSolution => panic!("h = delta_B determines pg"),
    }
    for k in 1..10i64 {
        let h = Dist::from_weights(space_ab(), &[ratio(k, 10), ratio(10 - k, 10)]).unwrap();
        assert_eq!(
            induced_prediction_marginal(&h, &diag).unwrap(),
            PredictionMarginal::NoSolution,
            "full-support h must admit no prediction marginal, h(AB) = {k}/10"
        );
    }
    pass(6, "choice point masses induce the matching prediction marginal; full-support h has no solution");
}

#[test]
fn criterion_07_choose_your_game_threshold() {
    let sc = Scenario::canonical();
    let pg_b = |num: i64, den: i64| {
        Dist::from_weights(
            sc.prediction_space().clone(),
            &[ratio(den - num, den), ratio(num, den)],
        )
        .unwrap()
    };

    let v = solve_variant_choose_game(&sc, &pg_b(9995, 10_000)).unwrap();
    assert_eq!(v.chosen_branch, GameKind::Realist);
    assert!(!v.branch_tie);

    let v = solve_variant_choose_game(&sc, &pg_b(998, 1000)).unwrap();
    assert_eq!(v.chosen_branch, GameKind::Fearful);
    assert!(!v.branch_tie);

    let v = solve_variant_choose_game(&sc, &pg_b(999, 1000)).unwrap();
    assert!(v.branch_tie);
    assert_eq!(v.fearful_value, money(1_000_000));
    assert_eq!(v.realist_value, money(1_000_000));
    pass(7, "variant picks REALIST at pg(B) = 9995/10000, FEARFUL at 998/1000, and ties exactly at 999/1000");
}

#[test]
fn criterion_08_free_choice_breaks_the_predictor() {
    let h = Dist::from_weights(space_ab(), &[ratio(3, 4), ratio(1, 4)]).unwrap();
    for k in 1..10i64 {
        let pg = Dist::from_weights(space_ab(), &[ratio(k, 10), ratio(10 - k, 10)]).unwrap();
        let w = accuracy_violation_witness(&h, &pg).unwrap();
        assert!(!w.matches_delta, "pg(AB) = {k}/10");
        let mut defined = 0;
        for (_, row) in w.extracted.defined_rows() {
            assert_eq!(row, &pg, "pg(AB) = {k}/10");
            defined += 1;
        }
        assert_eq!(defined, 2);
    }
    pass(8, "h(AB) = 3/4 makes P(g|y) equal pg on every defined row and never the diagonal, across the 11-point full-support grid");
}

#[test]
fn criterion_09_consistency_verdicts() {
    let xg = ExtendedGame::new(vec![fearful_net(), realist_net()]).unwrap();

    let report = check_profile(
        &xg,
        &[
            fearful_profile(Dist::uniform(space_ab()), &Prob::one()),
            realist_profile(Dist::uniform(space_ab()), Dist::uniform(space_ab())),
        ],
    )
    .unwrap();
    assert!(!report.consistent);
    assert_eq!(report.discrepancy, ratio(1, 4));
    assert!(report.witness.is_some());

    let report = check_profile(
        &xg,
        &[
            fearful_profile(delta("B"), &Prob::one()),
            realist_profile(delta("B"), delta("B")),
        ],
    )
    .unwrap();
    assert!(report.consistent);
    assert!(report.discrepancy.is_zero());
    assert!(report.witness.is_none());
    pass(9, "uniform profiles conflict with discrepancy exactly 1/4; the all-B profile pair is consistent with discrepancy 0");
}

fn rand_below(rng: &mut ChaCha12Rng, bound: u64) -> u64 {
    rng.next_u64() % bound
}

fn rand_prob(rng: &mut ChaCha12Rng) -> Prob {
    let den = 1 + rand_below(rng, 64) as i64;
    let num = rand_below(rng, den as u64 + 1) as i64;
    Prob::new(ratio(num, den)).unwrap()
}

fn rand_dist(rng: &mut ChaCha12Rng, space: &OutcomeSpace) -> Dist {
    let raw: Vec<i64> = (0..space.len())
        .map(|_| 1 + rand_below(rng, 100) as i64)
        .collect();
    let total: i64 = raw.iter().sum();
    let weights: Vec<Rational> = raw.iter().map(|&w| ratio(w, total)).collect();
    Dist::from_weights(space.clone(), &weights).unwrap()
}

fn rand_scenario(rng: &mut ChaCha12Rng) -> Scenario {
    let space = space_ab();
    let payoffs: Vec<i64> = (0..4)
        .map(|_| rand_below(rng, 2_000_001) as i64 - 1_000_000)
        .collect();
    Scenario::new(
        space.clone(),
        space.clone(),
        payoffs,
        rand_prob(rng),
        rand_dist(rng, &space),
        vec!["predict".to_string(), "choose".to_string()],
    )
    .unwrap()
}

/// Serialize every analysis output for one scenario.
fn analysis_transcript(sc: &Scenario) -> String {
    let mut out = String::new();
    out += &serde_json::to_string(&solve_fearful(sc, sc.alpha()).unwrap()).unwrap();
    out += &serde_json::to_string(&solve_realist(sc, sc.pg()).unwrap()).unwrap();
    out += &serde_json::to_string(&solve_combined_constrained(sc).unwrap()).unwrap();
    out += &serde_json::to_string(&solve_variant_choose_game(sc, sc.pg()).unwrap()).unwrap();

    let xg = ExtendedGame::new(vec![sc.fearful_net(), sc.realist_net()]).unwrap();
    let report = check_profile(
        &xg,
        &[
            StrategyProfile::new()
                .with(
                    CHOICE_VAR,
                    NodeCpd::prior(Dist::uniform(sc.choice_space().clone())),
                )
                .with(
                    PREDICTION_VAR,
                    NodeCpd::from_cpd(&Cpd::alpha_accurate(sc.alpha(), sc.choice_space()).unwrap()),
                ),
            StrategyProfile::new()
                .with(PREDICTION_VAR, NodeCpd::prior(sc.pg().clone()))
                .with(
                    CHOICE_VAR,
                    NodeCpd::tied(
                        vec![sc.prediction_space().clone()],
                        Dist::uniform(sc.choice_space().clone()),
                    ),
                ),
        ],
    )
    .unwrap();
    out += &serde_json::to_string(&report).unwrap();

    let profile = StrategyProfile::new()
        .with(
            CHOICE_VAR,
            NodeCpd::prior(Dist::uniform(sc.choice_space().clone())),
        )
        .with(
            PREDICTION_VAR,
            NodeCpd::from_cpd(&Cpd::alpha_accurate(sc.alpha(), sc.choice_space()).unwrap()),
        );
    out += &serde_json::to_string(&simulate(sc, SimNet::Fearful, &profile, 1000, 11).unwrap())
        .unwrap();
    out
}

#[test]
fn criterion_10_time_reversal_invariance() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x5eed_1010);
    let mut scenarios = vec![Scenario::canonical()];
    for _ in 0..20 {
        scenarios.push(rand_scenario(&mut rng));
    }
    for (i, sc) in scenarios.iter().enumerate() {
        let reversed = sc.time_reverse();
        assert_ne!(sc.timeline(), reversed.timeline());
        assert_eq!(
            analysis_transcript(sc),
            analysis_transcript(&reversed),
            "scenario #{i} is not reversal-invariant"
        );
        assert_eq!(&reversed.time_reverse(), sc);
    }
    pass(10, "all solver and consistency outputs are byte-identical under timeline reversal for the canonical and 20 random scenarios");
}

#[test]
fn criterion_11_monte_carlo_accuracy_bound() {
    let sc = Scenario::canonical();
    let alpha = p("3/4");
    let profile = fearful_profile(Dist::uniform(space_ab()), &alpha);
    let n = 1_000_000u64;
    let stats = simulate(&sc, SimNet::Fearful, &profile, n, 7).unwrap();

    // 3-sigma binomial envelope around alpha
    let sigma = (0.75 * 0.25 / n as f64).sqrt();
    let acc = newcomb_core::rational_to_f64(&stats.accuracy);
    assert!(
        (acc - 0.75).abs() <= 3.0 * sigma,
        "empirical accuracy {acc} outside 3 sigma of 3/4"
    );

    let again = simulate(&sc, SimNet::Fearful, &profile, n, 7).unwrap();
    assert_eq!(
        serde_json::to_string(&stats).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
    pass(
        11,
        "seeded million-sample run lands within 3 sigma of alpha = 3/4 and reruns byte-identically",
    );
}

#[test]
fn criterion_12_randomized_invariants_1000_cases_each() {
    let space = space_ab();

    // chain-rule normalization on random nets and profiles
    let mut rng = ChaCha12Rng::seed_from_u64(0x5eed_1201);
    for _ in 0..1000 {
        let (net, profile) = rand_net_and_profile(&mut rng);
        let joint = joint_from_net(&net, &profile).unwrap();
        let sum: Rational = joint.cells().iter().map(|c| c.as_ratio().clone()).sum();
        assert!(sum.is_one());
    }

    // chain-rule round trip on random two-node chains with full support
    let mut rng = ChaCha12Rng::seed_from_u64(0x5eed_1202);
    for _ in 0..1000 {
        let parent = rand_dist(&mut rng, &space);
        let rows: Vec<Dist> = (0..2).map(|_| rand_dist(&mut rng, &space)).collect();
        let cpd = Cpd::new(space.clone(), space.clone(), rows).unwrap();
        let profile = StrategyProfile::new()
            .with(CHOICE_VAR, NodeCpd::prior(parent.clone()))
            .with(PREDICTION_VAR, NodeCpd::from_cpd(&cpd));
        let joint = joint_from_net(&fearful_net(), &profile).unwrap();
        assert_eq!(joint.marginal(CHOICE_VAR).unwrap(), parent);
        assert!(joint
            .conditional(PREDICTION_VAR, CHOICE_VAR)
            .unwrap()
            .defined_rows_equal(&cpd));
    }

    // best-response dominance over the 101-point strategy simplex
    let mut rng = ChaCha12Rng::seed_from_u64(0x5eed_1203);
    for _ in 0..1000 {
        let payoffs: Vec<i64> = (0..4)
            .map(|_| rand_below(&mut rng, 20_001) as i64 - 10_000)
            .collect();
        let payoff = PayoffTable::new(
            vec![
                (PREDICTION_VAR.to_string(), space.clone()),
                (CHOICE_VAR.to_string(), space.clone()),
            ],
            payoffs,
        )
        .unwrap();
        let alpha = rand_prob(&mut rng);
        let game = Game::new(fearful_net(), payoff.clone(), PlayerId::new("you")).unwrap();
        let w = NodeCpd::from_cpd(&Cpd::alpha_accurate(&alpha, &space).unwrap());
        let fixed = StrategyProfile::new().with(PREDICTION_VAR, w.clone());
        let br = best_response(&game, &PlayerId::new("you"), &fixed).unwrap();
        for k in 0..=100i64 {
            let py =
                Dist::from_weights(space.clone(), &[ratio(k, 100), ratio(100 - k, 100)]).unwrap();
            let profile = StrategyProfile::new()
                .with(CHOICE_VAR, NodeCpd::prior(py))
                .with(PREDICTION_VAR, w.clone());
            let value =
                expected_payoff(&joint_from_net(&fearful_net(), &profile).unwrap(), &payoff)
                    .unwrap();
            assert!(br.value >= value);
        }
    }

    // oracle/analytic feasibility agreement at random accuracies
    let mut rng = ChaCha12Rng::seed_from_u64(0x5eed_1204);
    for _ in 0..1000 {
        let alpha = rand_prob(&mut rng);
        let oracle = feasible_g_independent_oracle(&alpha, 40, &space).unwrap();
        let analytic = feasible_g_independent(&alpha, &space).unwrap();
        let restricted = analytic.restrict_to_grid(40, &space).unwrap();
        let members = match oracle {
            FeasibleSet::Finite { members } => members,
            FeasibleSet::All => unreachable!(),
        };
        assert_eq!(members.len(), restricted.len(), "alpha = {alpha}");
        assert!(members.iter().all(|m| restricted.contains(m)));
    }

    pass(12, "normalization, round-trip, vertex dominance, and oracle agreement hold on 1000 randomized cases each");
}

/// Random DAG of 2–4 nodes with a full random profile.
fn rand_net_and_profile(rng: &mut ChaCha12Rng) -> (BayesNet, StrategyProfile) {
    let n = 2 + rand_below(rng, 3) as usize;
    let mut nodes: Vec<NetNode> = Vec::new();
    let mut spaces: Vec<OutcomeSpace> = Vec::new();
    let mut profile = StrategyProfile::new();
    for i in 0..n {
        let size = 2 + rand_below(rng, 2) as usize;
        let space = OutcomeSpace::new((0..size).map(|k| format!("v{i}_{k}"))).unwrap();
        let parents: Vec<String> = (0..i)
            .filter(|_| rand_below(rng, 2) == 1)
            .map(|j| format!("n{j}"))
            .collect();
        let parent_spaces: Vec<OutcomeSpace> = parents
            .iter()
            .map(|name| spaces[name[1..].parse::<usize>().unwrap()].clone())
            .collect();
        let owner = if rand_below(rng, 2) == 0 { "p0" } else { "p1" };
        nodes.push(NetNode::new(format!("n{i}"), space.clone(), parents, owner));
        let row_count: usize = parent_spaces.iter().map(OutcomeSpace::len).product();
        let rows: Vec<Dist> = (0..row_count).map(|_| rand_dist(rng, &space)).collect();
        profile.insert(
            format!("n{i}"),
            NodeCpd::new(parent_spaces, space.clone(), rows).unwrap(),
        );
        spaces.push(space);
    }
    (BayesNet::new(nodes).unwrap(), profile)
}
