//! Cross-factorization consistency: whether strategy choices made in several
//! Bayes nets over the same variables cohere into one joint distribution.
//!
//! When players set conditional tables in more than one net at once, some
//! joint strategy profiles are impossible — the nets' chain-rule joints
//! disagree on at least one cell. [`check_profile`] decides this exactly and
//! produces a witness cell when they disagree.
//!
//! The second half of the module characterizes the feasible set of
//! prediction-independent choice conditionals under an α-accurate predictor:
//! analytically via the cross-ratio equation (α² z₀z₁ vs (1−α)² z₀z₁, kept
//! in cross-multiplied form so no division is ever needed), and by an
//! independent brute-force grid oracle that never touches the analytic
//! formula. Only α = 1/2 admits every distribution; every other accuracy
//! pins the choice conditional to one of the two point masses. Above one
//! half this is the classical argument; below one half the same symmetry
//! argument applies — a consequence derived here, with α = 1/2 the single
//! permissive point.

use std::collections::BTreeMap;

use num::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{
    joint_from_net, BayesNet, Joint, NetError, NetNode, NodeCpd, PartialCpd, StrategyProfile,
};
use crate::prob::{
    rational_to_f64, rational_to_string, Cpd, Dist, OutcomeSpace, Prob, ProbError, Rational,
};

/// Errors raised by consistency and feasibility analysis.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConsistencyError {
    #[error("nets do not share the same variables and outcome spaces")]
    VariableMismatch,
    #[error("an extended game needs at least 2 nets")]
    TooFewNets,
    #[error("need one strategy profile per net ({nets} nets, {profiles} profiles)")]
    ProfileCount { nets: usize, profiles: usize },
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("feasibility analysis needs 2-outcome spaces, got {0}")]
    UnsupportedArity(usize),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// Several Bayes nets over the same variable set. Each net may order the
/// variables differently; the first net's topological order is the canonical
/// order used for comparisons and witness reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedGame {
    nets: Vec<BayesNet>,
}

impl ExtendedGame {
    pub fn new(nets: Vec<BayesNet>) -> Result<Self, ConsistencyError> {
        if nets.len() < 2 {
            return Err(ConsistencyError::TooFewNets);
        }
        let reference: BTreeMap<&str, &OutcomeSpace> = nets[0].variables().collect();
        for net in &nets[1..] {
            let vars: BTreeMap<&str, &OutcomeSpace> = net.variables().collect();
            if vars != reference {
                return Err(ConsistencyError::VariableMismatch);
            }
        }
        Ok(ExtendedGame { nets })
    }

    pub fn nets(&self) -> &[BayesNet] {
        &self.nets
    }

    /// Canonical variable order: the first net's topological order.
    pub fn canonical_order(&self) -> Vec<String> {
        self.nets[0]
            .variables()
            .map(|(n, _)| n.to_string())
            .collect()
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct ConsistencyReportRepr {
    consistent: bool,
    discrepancy: String,
    discrepancy_decimal: f64,
    witness: Option<BTreeMap<String, String>>,
    joints: Vec<Joint>,
}

/// Verdict on a joint strategy profile across nets: the exact maximum
/// absolute cell difference between the nets' joints, the first cell
/// attaining it (in canonical order) when nonzero, and the per-net joints
/// themselves, reindexed to the canonical variable order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "ConsistencyReportRepr")]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub discrepancy: Rational,
    pub witness: Option<BTreeMap<String, String>>,
    pub joints: Vec<Joint>,
}

impl From<ConsistencyReport> for ConsistencyReportRepr {
    fn from(r: ConsistencyReport) -> Self {
        ConsistencyReportRepr {
            consistent: r.consistent,
            discrepancy: rational_to_string(&r.discrepancy),
            discrepancy_decimal: rational_to_f64(&r.discrepancy),
            witness: r.witness,
            joints: r.joints,
        }
    }
}

/// Build each net's joint under its profile and compare them cell by cell,
/// exactly. `consistent` holds iff every pair of joints agrees on every
/// cell; otherwise `witness` names the lexicographically first cell (in
/// canonical variable/outcome order) achieving the maximum discrepancy.
pub fn check_profile(
    xgame: &ExtendedGame,
    profiles: &[StrategyProfile],
) -> Result<ConsistencyReport, ConsistencyError> {
    if profiles.len() != xgame.nets().len() {
        return Err(ConsistencyError::ProfileCount {
            nets: xgame.nets().len(),
            profiles: profiles.len(),
        });
    }
    let order = xgame.canonical_order();
    let joints: Vec<Joint> = xgame
        .nets()
        .iter()
        .zip(profiles)
        .map(|(net, profile)| {
            let joint = joint_from_net(net, profile)?;
            joint.reordered(&order).map_err(ConsistencyError::Net)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut max = Rational::zero();
    let mut witness: Option<Vec<usize>> = None;
    for i in 0..joints.len() {
        for j in (i + 1)..joints.len() {
            for (idx, (a, b)) in joints[i]
                .assignments()
                .zip(joints[i].cells().iter().zip(joints[j].cells()))
            {
                let diff = num::Signed::abs(&(a.as_ratio() - b.as_ratio()));
                if diff > max {
                    max = diff;
                    witness = Some(idx);
                }
            }
        }
    }

    let consistent = max.is_zero();
    let witness = witness.map(|idx| joints[0].assignment_labels(&idx));
    Ok(ConsistencyReport {
        consistent,
        discrepancy: max,
        witness,
        joints,
    })
}

/// The 2×2 parameterization of all joints compatible with an α-accurate
/// predictor: the choice marginal puts z₀ on the first outcome and z₁ on the
/// second, with z₀ + z₁ = 1 exactly; the predictor matches the choice with
/// probability α.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table2Param {
    alpha: Prob,
    z_ab: Prob,
    z_b: Prob,
}

impl Table2Param {
    pub fn new(alpha: Prob, z_ab: Prob, z_b: Prob) -> Result<Self, ConsistencyError> {
        let sum = z_ab.as_ratio() + z_b.as_ratio();
        if !sum.is_one() {
            return Err(ConsistencyError::Prob(ProbError::NotNormalized(
                rational_to_string(&sum),
            )));
        }
        Ok(Table2Param { alpha, z_ab, z_b })
    }

    pub fn alpha(&self) -> &Prob {
        &self.alpha
    }

    pub fn z_ab(&self) -> &Prob {
        &self.z_ab
    }

    pub fn z_b(&self) -> &Prob {
        &self.z_b
    }

    /// The choice marginal (z₀, z₁) as a distribution over `space`.
    pub fn z_dist(&self, space: &OutcomeSpace) -> Result<Dist, ConsistencyError> {
        if space.len() != 2 {
            return Err(ConsistencyError::UnsupportedArity(space.len()));
        }
        Ok(
            Dist::new(space.clone(), vec![self.z_ab.clone(), self.z_b.clone()])
                .expect("z_ab + z_b = 1 checked at construction"),
        )
    }

    /// The full joint over (choice, prediction) implied by these parameters:
    /// the chain-rule product of the choice marginal with the α-accurate
    /// predictor table, built through the net machinery.
    pub fn joint(&self, space: &OutcomeSpace) -> Result<Joint, ConsistencyError> {
        let net = BayesNet::new(vec![
            NetNode::new("y", space.clone(), Vec::<String>::new(), "you"),
            NetNode::new("g", space.clone(), ["y"], "W"),
        ])?;
        let profile = StrategyProfile::new()
            .with("y", NodeCpd::prior(self.z_dist(space)?))
            .with(
                "g",
                NodeCpd::from_cpd(&Cpd::alpha_accurate(&self.alpha, space)?),
            );
        Ok(joint_from_net(&net, &profile)?)
    }
}

/// The set of prediction-independent choice conditionals compatible with a
/// predictor: either an explicit finite set or the whole simplex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSet {
    Finite { members: Vec<Dist> },
    All,
}

impl FeasibleSet {
    fn finite(mut members: Vec<Dist>) -> Self {
        // canonical member order: descending lexicographic by mass vector,
        // so the point mass on the first label comes first
        members.sort_by(|a, b| {
            b.mass()
                .iter()
                .map(Prob::as_ratio)
                .cmp(a.mass().iter().map(Prob::as_ratio))
        });
        members.dedup();
        FeasibleSet::Finite { members }
    }

    /// Label used in sweep CSVs: `finite:N` or `all`.
    pub fn kind_label(&self) -> String {
        match self {
            FeasibleSet::Finite { members } => format!("finite:{}", members.len()),
            FeasibleSet::All => "all".to_string(),
        }
    }

    /// The members that lie on the grid {0, 1/grid, …, 1} for the first
    /// coordinate of a 2-outcome space. `All` restricts to every grid point.
    pub fn restrict_to_grid(
        &self,
        grid: u32,
        space: &OutcomeSpace,
    ) -> Result<Vec<Dist>, ConsistencyError> {
        if space.len() != 2 {
            return Err(ConsistencyError::UnsupportedArity(space.len()));
        }
        if grid < 2 {
            return Err(ConsistencyError::OutOfRange(format!(
                "grid must be at least 2, got {grid}"
            )));
        }
        let grid_points: Vec<Dist> = (0..=grid)
            .map(|k| {
                let z = Prob::ratio(i64::from(k), i64::from(grid)).expect("k/grid in [0,1]");
                Dist::new(space.clone(), vec![z.clone(), z.complement()]).expect("z + (1-z) = 1")
            })
            .collect();
        let picked = match self {
            FeasibleSet::All => grid_points,
            FeasibleSet::Finite { members } => grid_points
                .into_iter()
                .filter(|d| members.contains(d))
                .collect(),
        };
        Ok(match FeasibleSet::finite(picked) {
            FeasibleSet::Finite { members } => members,
            FeasibleSet::All => unreachable!(),
        })
    }

    /// Order-insensitive equality on explicit members (`All` only equals
    /// `All`).
    pub fn set_eq(&self, other: &FeasibleSet) -> bool {
        match (self, other) {
            (FeasibleSet::All, FeasibleSet::All) => true,
            (FeasibleSet::Finite { members: a }, FeasibleSet::Finite { members: b }) => {
                a.len() == b.len() && a.iter().all(|d| b.contains(d))
            }
            _ => false,
        }
    }
}

/// True when the two diagonals of the α-parameterized joint disagree for
/// interior z: α²·z₀·z₁ ≠ (1−α)²·z₀·z₁ in cross-multiplied form. For
/// interior z this reduces to α ≠ 1/2; at the z boundary both sides vanish
/// and there is no conflict.
pub fn cross_ratio_conflict(alpha: &Prob, z_ab: &Prob, z_b: &Prob) -> bool {
    let zz = z_ab.as_ratio() * z_b.as_ratio();
    let a2 = alpha.as_ratio() * alpha.as_ratio();
    let c = alpha.complement();
    let c2 = c.as_ratio() * c.as_ratio();
    a2 * &zz != c2 * zz
}

/// The exact set of prediction-independent conditionals h compatible with an
/// α-accurate predictor over a 2-outcome space: the two point masses when
/// α ≠ 1/2, the entire simplex when α = 1/2.
///
/// Independence with both choice masses nonzero forces the cross-ratio
/// equation, which is unsatisfiable unless α = 1/2; hence one of the two
/// masses must vanish and h is a point mass. Point masses themselves are
/// always compatible, whatever α.
pub fn feasible_g_independent(
    alpha: &Prob,
    space: &OutcomeSpace,
) -> Result<FeasibleSet, ConsistencyError> {
    if space.len() != 2 {
        return Err(ConsistencyError::UnsupportedArity(space.len()));
    }
    let half = Prob::ratio(1, 2).expect("1/2 in range");
    let interior_conflict = cross_ratio_conflict(alpha, &half, &half);
    if !interior_conflict {
        return Ok(FeasibleSet::All);
    }
    let deltas = space
        .labels()
        .iter()
        .map(|l| Dist::delta(space.clone(), l).expect("label from the space"))
        .collect();
    Ok(FeasibleSet::finite(deltas))
}

/// Generalization of [`feasible_g_independent`] to an arbitrary 2×2
/// predictor table: if the predictor's rows are identical (the prediction
/// ignores the choice), every h is feasible; otherwise only the two point
/// masses are. The α-accurate table has identical rows exactly at α = 1/2,
/// so this contains the α form as a special case. This dichotomy is this
/// crate's precise characterization of "almost any" predictor table forcing
/// the conflict.
pub fn feasible_g_independent_cpd(w_cpd: &Cpd) -> Result<FeasibleSet, ConsistencyError> {
    if w_cpd.given().len() != 2 {
        return Err(ConsistencyError::UnsupportedArity(w_cpd.given().len()));
    }
    if w_cpd.target().len() != 2 {
        return Err(ConsistencyError::UnsupportedArity(w_cpd.target().len()));
    }
    if w_cpd.rows_identical() {
        return Ok(FeasibleSet::All);
    }
    let deltas = w_cpd
        .given()
        .labels()
        .iter()
        .map(|l| Dist::delta(w_cpd.given().clone(), l).expect("label from the space"))
        .collect();
    Ok(FeasibleSet::finite(deltas))
}

/// Brute-force verification path for [`feasible_g_independent`], independent
/// of the analytic cross-ratio argument: sweep the choice marginal over
/// {0, 1/grid, …, 1}, build each parameterized joint exactly, extract the
/// choice-given-prediction conditional on its defined rows, and keep the h
/// of every grid point whose conditional is prediction-independent.
pub fn feasible_g_independent_oracle(
    alpha: &Prob,
    grid: u32,
    space: &OutcomeSpace,
) -> Result<FeasibleSet, ConsistencyError> {
    if grid < 2 {
        return Err(ConsistencyError::OutOfRange(format!(
            "grid must be at least 2, got {grid}"
        )));
    }
    if space.len() != 2 {
        return Err(ConsistencyError::UnsupportedArity(space.len()));
    }
    let mut accepted = Vec::new();
    for k in 0..=grid {
        let z_ab = Prob::ratio(i64::from(k), i64::from(grid)).expect("k/grid in [0,1]");
        let z_b = z_ab.complement();
        let params = Table2Param::new(alpha.clone(), z_ab, z_b)?;
        let joint = params.joint(space)?;
        let cond = joint.conditional("y", "g")?;
        if let Some(h) = cond.independent_value() {
            accepted.push(h.clone());
        }
    }
    Ok(FeasibleSet::finite(accepted))
}

/// Answer to "which prediction marginal makes the product factorization
/// agree with a predictor-table factorization": either the uniquely
/// determined marginal (with the implied choice marginal, which is h
/// itself), or no solution exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictionMarginal {
    Determined { pg: Dist, py: Dist },
    NoSolution,
}

/// Find the prediction marginal P(g) (and implied choice marginal P(y)) such
/// that the product joint h(y)·P(g) equals some chain-rule joint with child
/// table `w_cpd`. Matching the choice marginals forces P(y) = h; the product
/// then requires every predictor row on h's support to equal P(g), so a
/// solution exists iff those rows are all identical — in which case the
/// choice of h fully specifies P(g). `NoSolution` is a value, not a fault.
pub fn induced_prediction_marginal(
    h: &Dist,
    w_cpd: &Cpd,
) -> Result<PredictionMarginal, ConsistencyError> {
    if h.space() != w_cpd.given() {
        return Err(ConsistencyError::Prob(ProbError::SpaceMismatch));
    }
    let mut common: Option<&Dist> = None;
    for (label, mass) in h.iter() {
        if mass.is_zero() {
            continue;
        }
        let row = w_cpd.row(label).expect("label from the given space");
        match common {
            None => common = Some(row),
            Some(c) if c == row => {}
            Some(_) => return Ok(PredictionMarginal::NoSolution),
        }
    }
    let pg = common
        .expect("a distribution has at least one supporting outcome")
        .clone();
    Ok(PredictionMarginal::Determined { pg, py: h.clone() })
}

/// What a product factorization h(y)·pg(g) does to the predictor's side of
/// the table: the extracted prediction-given-choice conditional, and whether
/// it matches the perfectly accurate diagonal on its defined rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccuracyWitness {
    pub extracted: PartialCpd,
    pub matches_delta: bool,
}

/// Build the product joint h(y)·pg(g), extract P(g|y), and report whether it
/// equals the diagonal (perfect-accuracy) table on its defined rows. For any
/// full-support h the extracted conditional equals pg on every defined row,
/// so it is never the diagonal unless everything is degenerate.
pub fn accuracy_violation_witness(
    h: &Dist,
    pg: &Dist,
) -> Result<AccuracyWitness, ConsistencyError> {
    if h.space().labels() != pg.space().labels() {
        return Err(ConsistencyError::Prob(ProbError::SpaceMismatch));
    }
    let net = BayesNet::new(vec![
        NetNode::new("g", pg.space().clone(), Vec::<String>::new(), "W"),
        NetNode::new("y", h.space().clone(), ["g"], "you"),
    ])?;
    let profile = StrategyProfile::new()
        .with("g", NodeCpd::prior(pg.clone()))
        .with("y", NodeCpd::tied(vec![pg.space().clone()], h.clone()));
    let joint = joint_from_net(&net, &profile)?;
    let extracted = joint.conditional("g", "y")?;
    let matches_delta = extracted.matches_diagonal();
    Ok(AccuracyWitness {
        extracted,
        matches_delta,
    })
}
