//! Exact-arithmetic game theory over Bayes nets, built around the two-box
//! prediction scenario.
//!
//! The library models games in which each player's strategy is a set of
//! conditional probability tables at the nodes of a Bayes net, rather than a
//! direct choice of action. It provides:
//!
//! - [`prob`]: exact rational probabilities, outcome spaces, distributions,
//!   and conditional probability tables;
//! - [`net`]: Bayes nets with player-owned nodes, chain-rule joint synthesis,
//!   marginals and conditionals, expected payoff, and single-player best
//!   response by deterministic-vertex enumeration;
//! - [`consistency`]: whether strategy choices made across several nets over
//!   the same variables cohere into one joint distribution, plus the feasible
//!   set of prediction-independent choice distributions under an α-accurate
//!   predictor (analytic and by brute-force grid oracle);
//! - [`newcomb`]: the canonical two-box instances (the prediction-first and
//!   choice-first factorizations, the combined constrained choice, the
//!   choose-your-game variant), timeline reversal, and a seeded Monte Carlo
//!   sampler for empirical cross-checks.
//!
//! All probability mass is stored as exact rationals; floating point appears
//! only in display/CSV views.
//!
//! ```
//! use newcomb_core::{check_profile, solve_fearful, solve_realist, ExtendedGame};
//! use newcomb_core::net::{NodeCpd, StrategyProfile};
//! use newcomb_core::newcomb::{Scenario, CHOICE_VAR, PREDICTION_VAR};
//! use newcomb_core::{Cpd, Dist, Prob};
//!
//! let sc = Scenario::canonical();
//!
//! // each factorization has its own clear-cut best response
//! let fearful = solve_fearful(&sc, &Prob::one()).unwrap();
//! assert_eq!(fearful.strategy.as_delta(), Some("B"));
//! let realist = solve_realist(&sc, sc.pg()).unwrap();
//! assert_eq!(realist.strategy.as_delta(), Some("AB"));
//!
//! // but playing both games at once with uniform strategies is impossible:
//! // the two nets induce different joints, witnessed cell by cell
//! let xgame = ExtendedGame::new(vec![sc.fearful_net(), sc.realist_net()]).unwrap();
//! let uniform = Dist::uniform(sc.choice_space().clone());
//! let report = check_profile(
//!     &xgame,
//!     &[
//!         StrategyProfile::new()
//!             .with(CHOICE_VAR, NodeCpd::prior(uniform.clone()))
//!             .with(
//!                 PREDICTION_VAR,
//!                 NodeCpd::from_cpd(&Cpd::diagonal(sc.choice_space())),
//!             ),
//!         StrategyProfile::new()
//!             .with(PREDICTION_VAR, NodeCpd::prior(uniform.clone()))
//!             .with(
//!                 CHOICE_VAR,
//!                 NodeCpd::tied(vec![sc.prediction_space().clone()], uniform),
//!             ),
//!     ],
//! )
//! .unwrap();
//! assert!(!report.consistent);
//! assert_eq!(newcomb_core::rational_to_string(&report.discrepancy), "1/4");
//! ```

pub mod consistency;
pub mod net;
pub mod newcomb;
pub mod prob;

pub use consistency::{
    accuracy_violation_witness, check_profile, feasible_g_independent, feasible_g_independent_cpd,
    feasible_g_independent_oracle, induced_prediction_marginal, AccuracyWitness, ConsistencyError,
    ConsistencyReport, ExtendedGame, FeasibleSet, PredictionMarginal, Table2Param,
};
pub use net::{
    best_response, expected_payoff, joint_from_net, BayesNet, BestResponse, Game, Joint, NetError,
    NetNode, NetProfile, NodeCpd, PartialCpd, PayoffTable, PlayerId, StrategyProfile,
};
pub use newcomb::{
    simulate, solve_combined_constrained, solve_fearful, solve_realist, solve_variant_choose_game,
    EmpiricalStats, GameKind, NewcombError, Recommendation, Scenario, SimNet, VariantOutcome,
};
pub use prob::{
    parse_rational, parse_rational_allow_decimal, rational_to_f64, rational_to_string, Cpd, Dist,
    OutcomeSpace, Prob, ProbError, Rational,
};
