//! Bayes nets over discrete variables with player-owned nodes.
//!
//! A net is a DAG in which every node carries an outcome space and is owned
//! by one player; a strategy profile assigns each node a conditional table
//! over its variable given its parents. The joint distribution is the
//! chain-rule product of the node tables, a marginal or conditional is an
//! exact sum or quotient over that table, and a single player's best response
//! against fixed opponents is found by enumerating deterministic tables
//! (expected payoff is linear in each row, so an optimum sits at a vertex).
//!
//! A deliberately missing piece: nets in which one variable conditions
//! another cannot in general be recast as a single-stage simultaneous-move
//! game without splitting the game into stages, so no extensive-form
//! machinery exists here. The net plus ownership map is the whole game.
//!
//! Everything is immutable and every function is pure.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::{Dist, OutcomeSpace, Prob, ProbError, Rational};

/// Errors raised by net construction and net-level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("node `{node}` references parent `{parent}`, which is not declared before it (nodes must be listed in topological order)")]
    ParentOrder { node: String, parent: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("strategy profile does not fit the net: {0}")]
    ProfileMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no strategy fixed for node `{0}`, which the responding player does not own")]
    IncompleteFixed(String),
    #[error("player `{0}` owns no nodes in this net")]
    NoNodesOwned(String),
    #[error("deterministic strategy enumeration is too large for node `{0}`")]
    EnumerationTooLarge(String),
    #[error("a net needs at least one node")]
    EmptyNet,
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// Identifies a player. Compared and ordered as a plain string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(String);

impl PlayerId {
    pub fn new(id: impl Into<String>) -> Self {
        PlayerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for PlayerId {
    fn from(s: &str) -> Self {
        PlayerId::new(s)
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One node of a Bayes net: a named variable, the names of its parents, and
/// the player who sets its conditional table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetNode {
    name: String,
    space: OutcomeSpace,
    parents: Vec<String>,
    owner: PlayerId,
}

impl NetNode {
    pub fn new(
        name: impl Into<String>,
        space: OutcomeSpace,
        parents: impl IntoIterator<Item = impl Into<String>>,
        owner: impl Into<PlayerId>,
    ) -> Self {
        NetNode {
            name: name.into(),
            space,
            parents: parents.into_iter().map(Into::into).collect(),
            owner: owner.into(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn parents(&self) -> &[String] {
        &self.parents
    }

    pub fn owner(&self) -> &PlayerId {
        &self.owner
    }
}

/// A Bayes net: nodes stored in a valid topological order (every parent is
/// declared before its children), which doubles as the canonical variable
/// order for joints built from the net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BayesNet {
    nodes: Vec<NetNode>,
}

impl BayesNet {
    pub fn new(nodes: Vec<NetNode>) -> Result<Self, NetError> {
        if nodes.is_empty() {
            return Err(NetError::EmptyNet);
        }
        for (i, node) in nodes.iter().enumerate() {
            if nodes[..i].iter().any(|n| n.name == node.name) {
                return Err(NetError::DuplicateNode(node.name.clone()));
            }
            for parent in &node.parents {
                if !nodes[..i].iter().any(|n| &n.name == parent) {
                    return Err(NetError::ParentOrder {
                        node: node.name.clone(),
                        parent: parent.clone(),
                    });
                }
            }
        }
        Ok(BayesNet { nodes })
    }

    pub fn nodes(&self) -> &[NetNode] {
        &self.nodes
    }

    pub fn node(&self, name: &str) -> Option<&NetNode> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn variables(&self) -> impl Iterator<Item = (&str, &OutcomeSpace)> {
        self.nodes.iter().map(|n| (n.name.as_str(), &n.space))
    }

    pub fn owned_by(&self, player: &PlayerId) -> Vec<&NetNode> {
        self.nodes.iter().filter(|n| &n.owner == player).collect()
    }
}

/// The conditional table a strategy assigns to one node: one normalized row
/// per parent assignment, rows in row-major order over the parent spaces (a
/// single row when the node has no parents).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeCpd {
    parent_spaces: Vec<OutcomeSpace>,
    target: OutcomeSpace,
    rows: Vec<Dist>,
}

impl NodeCpd {
    pub fn new(
        parent_spaces: Vec<OutcomeSpace>,
        target: OutcomeSpace,
        rows: Vec<Dist>,
    ) -> Result<Self, NetError> {
        let expected: usize = parent_spaces.iter().map(OutcomeSpace::len).product();
        if rows.len() != expected {
            return Err(NetError::ShapeMismatch(format!(
                "node table has {} rows, parent spaces require {}",
                rows.len(),
                expected
            )));
        }
        if rows.iter().any(|r| r.space() != &target) {
            return Err(NetError::ShapeMismatch(
                "node table row over the wrong outcome space".to_string(),
            ));
        }
        Ok(NodeCpd {
            parent_spaces,
            target,
            rows,
        })
    }

    /// Table for a parentless node: the single unconditioned distribution.
    pub fn prior(dist: Dist) -> Self {
        NodeCpd {
            parent_spaces: Vec::new(),
            target: dist.space().clone(),
            rows: vec![dist],
        }
    }

    /// The same row for every parent assignment: the target is independent
    /// of the parents even though the edge exists.
    pub fn tied(parent_spaces: Vec<OutcomeSpace>, row: Dist) -> Self {
        let n: usize = parent_spaces.iter().map(OutcomeSpace::len).product();
        NodeCpd {
            parent_spaces,
            target: row.space().clone(),
            rows: vec![row; n],
        }
    }

    /// View a single-parent table as a node table.
    pub fn from_cpd(cpd: &crate::prob::Cpd) -> Self {
        NodeCpd {
            parent_spaces: vec![cpd.given().clone()],
            target: cpd.target().clone(),
            rows: cpd.rows().to_vec(),
        }
    }

    pub fn parent_spaces(&self) -> &[OutcomeSpace] {
        &self.parent_spaces
    }

    pub fn target(&self) -> &OutcomeSpace {
        &self.target
    }

    pub fn rows(&self) -> &[Dist] {
        &self.rows
    }

    /// The unconditioned distribution, when the node has no parents.
    pub fn as_prior(&self) -> Option<&Dist> {
        if self.parent_spaces.is_empty() {
            Some(&self.rows[0])
        } else {
            None
        }
    }

    pub fn is_tied(&self) -> bool {
        self.rows.windows(2).all(|w| w[0] == w[1])
    }

    fn row_index(&self, parent_outcomes: &[usize]) -> usize {
        debug_assert_eq!(parent_outcomes.len(), self.parent_spaces.len());
        let mut idx = 0;
        for (o, s) in parent_outcomes.iter().zip(&self.parent_spaces) {
            idx = idx * s.len() + o;
        }
        idx
    }

    pub fn row_for(&self, parent_outcomes: &[usize]) -> &Dist {
        &self.rows[self.row_index(parent_outcomes)]
    }
}

/// A strategy profile: for each node name, the conditional table set there.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StrategyProfile {
    assignments: BTreeMap<String, NodeCpd>,
}

impl StrategyProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, node: impl Into<String>, cpd: NodeCpd) -> Self {
        self.assignments.insert(node.into(), cpd);
        self
    }

    pub fn insert(&mut self, node: impl Into<String>, cpd: NodeCpd) {
        self.assignments.insert(node.into(), cpd);
    }

    pub fn get(&self, node: &str) -> Option<&NodeCpd> {
        self.assignments.get(node)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &NodeCpd)> {
        self.assignments.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Check that this profile covers every node of `net` with a table of
    /// the right shape.
    pub fn validate_for(&self, net: &BayesNet) -> Result<(), NetError> {
        for node in net.nodes() {
            let cpd = self.get(node.name()).ok_or_else(|| {
                NetError::ProfileMismatch(format!("missing table for node `{}`", node.name()))
            })?;
            if cpd.target() != node.space() {
                return Err(NetError::ProfileMismatch(format!(
                    "table for node `{}` is over the wrong outcome space",
                    node.name()
                )));
            }
            let parent_spaces: Vec<&OutcomeSpace> = node
                .parents()
                .iter()
                .map(|p| net.node(p).expect("validated at net construction").space())
                .collect();
            if cpd.parent_spaces().len() != parent_spaces.len()
                || cpd
                    .parent_spaces()
                    .iter()
                    .zip(&parent_spaces)
                    .any(|(a, b)| &a != b)
            {
                return Err(NetError::ProfileMismatch(format!(
                    "table for node `{}` does not match its parent spaces",
                    node.name()
                )));
            }
        }
        Ok(())
    }
}

/// Iterate multi-indices over `sizes` in row-major order: the last position
/// varies fastest, so rank k corresponds to counting with the first variable
/// as the most significant digit.
pub(crate) fn multi_indices(sizes: Vec<usize>) -> impl Iterator<Item = Vec<usize>> {
    let total: usize = sizes.iter().product();
    (0..total).map(move |mut k| {
        let mut idx = vec![0usize; sizes.len()];
        for (i, &s) in sizes.iter().enumerate().rev() {
            idx[i] = k % s;
            k /= s;
        }
        idx
    })
}

fn rank_of(idx: &[usize], sizes: &[usize]) -> usize {
    idx.iter().zip(sizes).fold(0, |acc, (&o, &s)| acc * s + o)
}

#[derive(Clone, Serialize, Deserialize)]
struct JointRepr {
    variables: Vec<VariableRepr>,
    cells: Vec<Prob>,
}

#[derive(Clone, Serialize, Deserialize)]
struct VariableRepr {
    name: String,
    space: Vec<String>,
}

/// A joint distribution over an ordered list of variables, stored as one
/// exact probability per full assignment in row-major canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "JointRepr", into = "JointRepr")]
pub struct Joint {
    vars: Vec<(String, OutcomeSpace)>,
    cells: Vec<Prob>,
}

impl Joint {
    pub fn new(vars: Vec<(String, OutcomeSpace)>, cells: Vec<Prob>) -> Result<Self, NetError> {
        let expected: usize = vars.iter().map(|(_, s)| s.len()).product();
        if cells.len() != expected {
            return Err(NetError::ShapeMismatch(format!(
                "joint has {} cells, variables require {}",
                cells.len(),
                expected
            )));
        }
        let sum: Rational = cells.iter().map(|p| p.as_ratio().clone()).sum();
        if !sum.is_one() {
            return Err(NetError::Prob(ProbError::NotNormalized(
                crate::prob::rational_to_string(&sum),
            )));
        }
        Ok(Joint { vars, cells })
    }

    pub fn variables(&self) -> &[(String, OutcomeSpace)] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|(n, _)| n == name)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.vars.iter().map(|(_, s)| s.len()).collect()
    }

    pub fn cells(&self) -> &[Prob] {
        &self.cells
    }

    pub fn cell(&self, idx: &[usize]) -> &Prob {
        &self.cells[rank_of(idx, &self.sizes())]
    }

    /// All full assignments as multi-indices, in cell order.
    pub fn assignments(&self) -> impl Iterator<Item = Vec<usize>> {
        multi_indices(self.sizes())
    }

    /// Labels for one assignment, keyed by variable name.
    pub fn assignment_labels(&self, idx: &[usize]) -> BTreeMap<String, String> {
        self.vars
            .iter()
            .zip(idx)
            .map(|((n, s), &o)| (n.clone(), s.label(o).to_string()))
            .collect()
    }

    /// Exact marginal of one variable: sums over all other variables.
    pub fn marginal(&self, variable: &str) -> Result<Dist, NetError> {
        let v = self
            .var_index(variable)
            .ok_or_else(|| NetError::UnknownVariable(variable.to_string()))?;
        let space = self.vars[v].1.clone();
        let mut weights = vec![Rational::zero(); space.len()];
        for (idx, cell) in self.assignments().zip(&self.cells) {
            weights[idx[v]] += cell.as_ratio();
        }
        Dist::from_weights(space, &weights).map_err(NetError::Prob)
    }

    /// Exact conditional P(target | given), with any other variables summed
    /// out first. Rows whose conditioning outcome carries zero mass are
    /// undefined, not zero-filled; downstream independence and consistency
    /// checks skip them.
    pub fn conditional(&self, target: &str, given: &str) -> Result<PartialCpd, NetError> {
        let t = self
            .var_index(target)
            .ok_or_else(|| NetError::UnknownVariable(target.to_string()))?;
        let g = self
            .var_index(given)
            .ok_or_else(|| NetError::UnknownVariable(given.to_string()))?;
        if t == g {
            return Err(NetError::ShapeMismatch(
                "conditional needs two distinct variables".to_string(),
            ));
        }
        let target_space = self.vars[t].1.clone();
        let given_space = self.vars[g].1.clone();

        let mut pair = vec![vec![Rational::zero(); target_space.len()]; given_space.len()];
        for (idx, cell) in self.assignments().zip(&self.cells) {
            pair[idx[g]][idx[t]] += cell.as_ratio();
        }

        let rows = pair
            .into_iter()
            .map(|row| {
                let denom: Rational = row.iter().cloned().sum();
                if denom.is_zero() {
                    return Ok(None);
                }
                let weights: Vec<Rational> = row.into_iter().map(|w| w / &denom).collect();
                Dist::from_weights(target_space.clone(), &weights)
                    .map(Some)
                    .map_err(NetError::Prob)
            })
            .collect::<Result<Vec<_>, _>>()?;

        Ok(PartialCpd {
            target_var: target.to_string(),
            given_var: given.to_string(),
            target: target_space,
            given: given_space,
            rows,
        })
    }

    /// Reindex the joint to a different variable order over the same
    /// variables. The cell contents are unchanged; only the axis order (and
    /// so the canonical cell order) moves.
    pub fn reordered(&self, order: &[String]) -> Result<Joint, NetError> {
        if order.len() != self.vars.len() {
            return Err(NetError::ShapeMismatch(
                "variable order has the wrong length".to_string(),
            ));
        }
        let positions: Vec<usize> = order
            .iter()
            .map(|name| {
                self.var_index(name)
                    .ok_or_else(|| NetError::UnknownVariable(name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut seen = positions.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.vars.len() {
            return Err(NetError::ShapeMismatch(
                "variable order repeats a variable".to_string(),
            ));
        }

        let vars: Vec<(String, OutcomeSpace)> =
            positions.iter().map(|&p| self.vars[p].clone()).collect();
        let new_sizes: Vec<usize> = vars.iter().map(|(_, s)| s.len()).collect();
        let old_sizes = self.sizes();
        let mut cells = vec![Prob::zero(); self.cells.len()];
        for new_idx in multi_indices(new_sizes.clone()) {
            let mut old_idx = vec![0usize; self.vars.len()];
            for (ni, &p) in positions.iter().enumerate() {
                old_idx[p] = new_idx[ni];
            }
            cells[rank_of(&new_idx, &new_sizes)] =
                self.cells[rank_of(&old_idx, &old_sizes)].clone();
        }
        Ok(Joint { vars, cells })
    }
}

impl TryFrom<JointRepr> for Joint {
    type Error = NetError;

    fn try_from(r: JointRepr) -> Result<Self, Self::Error> {
        let vars = r
            .variables
            .into_iter()
            .map(|v| Ok((v.name, OutcomeSpace::new(v.space)?)))
            .collect::<Result<Vec<_>, ProbError>>()?;
        Joint::new(vars, r.cells)
    }
}

impl From<Joint> for JointRepr {
    fn from(j: Joint) -> Self {
        JointRepr {
            variables: j
                .vars
                .iter()
                .map(|(n, s)| VariableRepr {
                    name: n.clone(),
                    space: s.labels().to_vec(),
                })
                .collect(),
            cells: j.cells,
        }
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct PartialCpdRepr {
    target: String,
    given: String,
    target_space: Vec<String>,
    given_space: Vec<String>,
    rows: Vec<Option<Vec<Prob>>>,
}

/// A conditional table extracted from a joint: rows with zero conditioning
/// mass are `None` (undefined) rather than invented.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartialCpdRepr", into = "PartialCpdRepr")]
pub struct PartialCpd {
    target_var: String,
    given_var: String,
    target: OutcomeSpace,
    given: OutcomeSpace,
    rows: Vec<Option<Dist>>,
}

impl PartialCpd {
    pub fn target_var(&self) -> &str {
        &self.target_var
    }

    pub fn given_var(&self) -> &str {
        &self.given_var
    }

    pub fn target(&self) -> &OutcomeSpace {
        &self.target
    }

    pub fn given(&self) -> &OutcomeSpace {
        &self.given
    }

    pub fn rows(&self) -> &[Option<Dist>] {
        &self.rows
    }

    pub fn row(&self, given_outcome: &str) -> Result<Option<&Dist>, NetError> {
        let i = self
            .given
            .expect_index(given_outcome)
            .map_err(NetError::Prob)?;
        Ok(self.rows[i].as_ref())
    }

    pub fn defined_rows(&self) -> impl Iterator<Item = (&str, &Dist)> {
        self.given
            .labels()
            .iter()
            .map(String::as_str)
            .zip(self.rows.iter())
            .filter_map(|(l, r)| r.as_ref().map(|d| (l, d)))
    }

    /// The common row value, if every defined row is the same distribution.
    /// At least one row of a conditional extracted from a joint is always
    /// defined, so `Some` here certifies independence on the support.
    pub fn independent_value(&self) -> Option<&Dist> {
        let mut common: Option<&Dist> = None;
        for (_, d) in self.defined_rows() {
            match common {
                None => common = Some(d),
                Some(c) if c == d => {}
                Some(_) => return None,
            }
        }
        common
    }

    /// True when every defined row is a point mass on the outcome matching
    /// its own conditioning label.
    pub fn matches_diagonal(&self) -> bool {
        self.defined_rows()
            .all(|(label, d)| d.as_delta() == Some(label))
    }

    /// Compare against a full table on the defined rows only.
    pub fn defined_rows_equal(&self, cpd: &crate::prob::Cpd) -> bool {
        if cpd.given() != &self.given || cpd.target() != &self.target {
            return false;
        }
        self.defined_rows()
            .all(|(label, d)| cpd.row(label).map(|r| r == d).unwrap_or(false))
    }
}

impl TryFrom<PartialCpdRepr> for PartialCpd {
    type Error = NetError;

    fn try_from(r: PartialCpdRepr) -> Result<Self, Self::Error> {
        let target = OutcomeSpace::new(r.target_space)?;
        let given = OutcomeSpace::new(r.given_space)?;
        if r.rows.len() != given.len() {
            return Err(NetError::ShapeMismatch(
                "conditional row count does not match the conditioning space".to_string(),
            ));
        }
        let rows = r
            .rows
            .into_iter()
            .map(|row| {
                row.map(|mass| Dist::new(target.clone(), mass))
                    .transpose()
                    .map_err(NetError::Prob)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PartialCpd {
            target_var: r.target,
            given_var: r.given,
            target,
            given,
            rows,
        })
    }
}

impl From<PartialCpd> for PartialCpdRepr {
    fn from(p: PartialCpd) -> Self {
        PartialCpdRepr {
            target: p.target_var,
            given: p.given_var,
            target_space: p.target.labels().to_vec(),
            given_space: p.given.labels().to_vec(),
            rows: p
                .rows
                .into_iter()
                .map(|r| r.map(|d| d.mass().to_vec()))
                .collect(),
        }
    }
}

/// Chain-rule synthesis of the joint distribution: each cell is the product
/// of its node factors in topological order. A cell whose conditioning
/// assignment has zero upstream mass picks up a zero factor from upstream,
/// so it is zero regardless of the table row stored at the child.
pub fn joint_from_net(net: &BayesNet, profile: &StrategyProfile) -> Result<Joint, NetError> {
    profile.validate_for(net)?;
    let vars: Vec<(String, OutcomeSpace)> = net
        .nodes()
        .iter()
        .map(|n| (n.name().to_string(), n.space().clone()))
        .collect();
    let sizes: Vec<usize> = vars.iter().map(|(_, s)| s.len()).collect();
    let parent_positions: Vec<Vec<usize>> = net
        .nodes()
        .iter()
        .map(|n| {
            n.parents()
                .iter()
                .map(|p| net.node_index(p).expect("validated at net construction"))
                .collect()
        })
        .collect();

    let mut cells = Vec::with_capacity(sizes.iter().product());
    for idx in multi_indices(sizes) {
        let mut cell = Prob::one();
        for (pos, node) in net.nodes().iter().enumerate() {
            let cpd = profile.get(node.name()).expect("validated above");
            let parent_idx: Vec<usize> = parent_positions[pos].iter().map(|&p| idx[p]).collect();
            cell = cell.mul(cpd.row_for(&parent_idx).prob_at(idx[pos]));
            if cell.is_zero() {
                break;
            }
        }
        cells.push(cell);
    }
    Joint::new(vars, cells)
}

/// A payoff table: one exact integer (dollars) per full assignment, in
/// row-major canonical order over its own variable list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffTable {
    vars: Vec<(String, OutcomeSpace)>,
    values: Vec<i64>,
}

impl PayoffTable {
    pub fn new(vars: Vec<(String, OutcomeSpace)>, values: Vec<i64>) -> Result<Self, NetError> {
        let expected: usize = vars.iter().map(|(_, s)| s.len()).product();
        if values.len() != expected {
            return Err(NetError::ShapeMismatch(format!(
                "payoff table has {} entries, variables require {}",
                values.len(),
                expected
            )));
        }
        Ok(PayoffTable { vars, values })
    }

    pub fn variables(&self) -> &[(String, OutcomeSpace)] {
        &self.vars
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.vars.iter().map(|(_, s)| s.len()).collect()
    }

    pub fn value(&self, idx: &[usize]) -> i64 {
        self.values[rank_of(idx, &self.sizes())]
    }

    /// Payoff looked up by labeled assignment.
    pub fn value_for(&self, assignment: &BTreeMap<String, String>) -> Result<i64, NetError> {
        let idx = self
            .vars
            .iter()
            .map(|(name, space)| {
                let label = assignment
                    .get(name)
                    .ok_or_else(|| NetError::UnknownVariable(name.clone()))?;
                space.expect_index(label).map_err(NetError::Prob)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.value(&idx))
    }
}

/// Exact expected payoff Σ joint(cell)·payoff(cell). The payoff table is
/// aligned to the joint by variable name, so the two may list the same
/// variables in different orders.
pub fn expected_payoff(joint: &Joint, payoff: &PayoffTable) -> Result<Rational, NetError> {
    if joint.variables().len() != payoff.variables().len() {
        return Err(NetError::ShapeMismatch(
            "joint and payoff table are over different variable sets".to_string(),
        ));
    }
    let mapping: Vec<usize> = payoff
        .variables()
        .iter()
        .map(|(name, space)| {
            let j = joint.var_index(name).ok_or_else(|| {
                NetError::ShapeMismatch(format!("payoff variable `{name}` missing from joint"))
            })?;
            if &joint.variables()[j].1 != space {
                return Err(NetError::ShapeMismatch(format!(
                    "payoff variable `{name}` has a different outcome space"
                )));
            }
            Ok(j)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut total = Rational::zero();
    for (idx, cell) in joint.assignments().zip(joint.cells()) {
        if cell.is_zero() {
            continue;
        }
        let pay_idx: Vec<usize> = mapping.iter().map(|&j| idx[j]).collect();
        total += cell.as_ratio() * Rational::from_integer(BigInt::from(payoff.value(&pay_idx)));
    }
    Ok(total)
}

/// A Bayes net game: the net, the payoff table, and the player the payoffs
/// accrue to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    net: BayesNet,
    payoff: PayoffTable,
    focal: PlayerId,
}

impl Game {
    pub fn new(net: BayesNet, payoff: PayoffTable, focal: PlayerId) -> Result<Self, NetError> {
        if payoff.variables().len() != net.nodes().len() {
            return Err(NetError::ShapeMismatch(
                "payoff table and net list different variable counts".to_string(),
            ));
        }
        for (name, space) in payoff.variables() {
            match net.node(name) {
                Some(n) if n.space() == space => {}
                Some(_) => {
                    return Err(NetError::ShapeMismatch(format!(
                        "payoff variable `{name}` has a different outcome space"
                    )))
                }
                None => return Err(NetError::UnknownVariable(name.clone())),
            }
        }
        Ok(Game { net, payoff, focal })
    }

    pub fn net(&self) -> &BayesNet {
        &self.net
    }

    pub fn payoff(&self) -> &PayoffTable {
        &self.payoff
    }

    pub fn focal(&self) -> &PlayerId {
        &self.focal
    }
}

/// Result of a single-player best response: the canonical optimal assignment
/// for the player's nodes, its exact value, and every equally-optimal
/// deterministic assignment (the canonical pick included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestResponse {
    pub assignment: BTreeMap<String, NodeCpd>,
    pub value: Rational,
    pub ties: Vec<BTreeMap<String, NodeCpd>>,
}

/// All deterministic tables for a node, in canonical order: outcome picks
/// counted row-major with the first row as the most significant digit and
/// digit values in canonical outcome order.
fn deterministic_tables(
    name: &str,
    parent_spaces: &[OutcomeSpace],
    target: &OutcomeSpace,
) -> Result<Vec<NodeCpd>, NetError> {
    let rows: usize = parent_spaces.iter().map(OutcomeSpace::len).product();
    let t = target.len();
    let total = (t as u128)
        .checked_pow(rows as u32)
        .filter(|&x| x <= 1 << 20)
        .ok_or_else(|| NetError::EnumerationTooLarge(name.to_string()))?;

    let mut out = Vec::with_capacity(total as usize);
    for mut k in 0..total {
        let mut picks = vec![0usize; rows];
        for r in (0..rows).rev() {
            picks[r] = (k % t as u128) as usize;
            k /= t as u128;
        }
        let dists = picks
            .iter()
            .map(|&o| Dist::delta(target.clone(), target.label(o)).expect("label in space"))
            .collect();
        out.push(NodeCpd::new(parent_spaces.to_vec(), target.clone(), dists)?);
    }
    Ok(out)
}

/// Best response of `player` against the fixed tables of everyone else.
///
/// Expected payoff is linear in each row of the player's tables with all
/// else fixed, so some deterministic assignment attains the optimum; this
/// enumerates all of them. Ties go to the earliest assignment in canonical
/// order, with the full tie set reported. Entries in `fixed` for nodes the
/// player owns are ignored.
pub fn best_response(
    game: &Game,
    player: &PlayerId,
    fixed: &StrategyProfile,
) -> Result<BestResponse, NetError> {
    let owned = game.net.owned_by(player);
    if owned.is_empty() {
        return Err(NetError::NoNodesOwned(player.to_string()));
    }

    let mut base = StrategyProfile::new();
    for node in game.net.nodes() {
        if &node.owner == player {
            continue;
        }
        let cpd = fixed
            .get(node.name())
            .ok_or_else(|| NetError::IncompleteFixed(node.name().to_string()))?;
        base.insert(node.name(), cpd.clone());
    }

    let candidates_per_node: Vec<(String, Vec<NodeCpd>)> = owned
        .iter()
        .map(|node| {
            let parent_spaces: Vec<OutcomeSpace> = node
                .parents()
                .iter()
                .map(|p| game.net.node(p).expect("validated").space().clone())
                .collect();
            let tables = deterministic_tables(node.name(), &parent_spaces, node.space())?;
            Ok((node.name().to_string(), tables))
        })
        .collect::<Result<Vec<_>, NetError>>()?;

    let counts: Vec<usize> = candidates_per_node.iter().map(|(_, c)| c.len()).collect();
    let mut best: Option<(BTreeMap<String, NodeCpd>, Rational)> = None;
    let mut ties: Vec<BTreeMap<String, NodeCpd>> = Vec::new();

    for choice in multi_indices(counts) {
        let mut profile = base.clone();
        let mut assignment = BTreeMap::new();
        for ((name, tables), &pick) in candidates_per_node.iter().zip(&choice) {
            profile.insert(name.clone(), tables[pick].clone());
            assignment.insert(name.clone(), tables[pick].clone());
        }
        let joint = joint_from_net(&game.net, &profile)?;
        let value = expected_payoff(&joint, &game.payoff)?;
        match &best {
            None => {
                ties.push(assignment.clone());
                best = Some((assignment, value));
            }
            Some((_, v)) if value > *v => {
                ties.clear();
                ties.push(assignment.clone());
                best = Some((assignment, value));
            }
            Some((_, v)) if value == *v => ties.push(assignment),
            Some(_) => {}
        }
    }

    let (assignment, value) = best.expect("at least one deterministic table exists");
    Ok(BestResponse {
        assignment,
        value,
        ties,
    })
}

#[derive(Clone, Serialize, Deserialize)]
struct NetProfileRepr {
    nodes: Vec<NodeEntry>,
}

#[derive(Clone, Serialize, Deserialize)]
struct NodeEntry {
    name: String,
    space: Vec<String>,
    parents: Vec<String>,
    owner: String,
    cpd: Vec<Vec<Prob>>,
}

/// A net together with a strategy profile covering it, as serialized on
/// disk: nodes in topological order, each carrying its table rows in
/// row-major parent-assignment order (one row for a parentless node).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NetProfileRepr", into = "NetProfileRepr")]
pub struct NetProfile {
    pub net: BayesNet,
    pub profile: StrategyProfile,
}

impl NetProfile {
    pub fn new(net: BayesNet, profile: StrategyProfile) -> Result<Self, NetError> {
        profile.validate_for(&net)?;
        Ok(NetProfile { net, profile })
    }
}

impl TryFrom<NetProfileRepr> for NetProfile {
    type Error = NetError;

    fn try_from(r: NetProfileRepr) -> Result<Self, Self::Error> {
        let mut nodes = Vec::new();
        let mut profile = StrategyProfile::new();
        for entry in r.nodes {
            let space = OutcomeSpace::new(entry.space)?;
            let node = NetNode::new(
                entry.name.clone(),
                space.clone(),
                entry.parents.clone(),
                PlayerId::new(entry.owner),
            );
            let parent_spaces: Vec<OutcomeSpace> = entry
                .parents
                .iter()
                .map(|p| {
                    nodes
                        .iter()
                        .find(|n: &&NetNode| n.name() == p)
                        .map(|n| n.space().clone())
                        .ok_or_else(|| NetError::ParentOrder {
                            node: entry.name.clone(),
                            parent: p.clone(),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let rows = entry
                .cpd
                .into_iter()
                .map(|mass| Dist::new(space.clone(), mass))
                .collect::<Result<Vec<_>, _>>()?;
            profile.insert(
                entry.name.clone(),
                NodeCpd::new(parent_spaces, space, rows)?,
            );
            nodes.push(node);
        }
        let net = BayesNet::new(nodes)?;
        NetProfile::new(net, profile)
    }
}

impl From<NetProfile> for NetProfileRepr {
    fn from(np: NetProfile) -> Self {
        let nodes = np
            .net
            .nodes()
            .iter()
            .map(|n| {
                let cpd = np
                    .profile
                    .get(n.name())
                    .expect("profile validated against net");
                NodeEntry {
                    name: n.name().to_string(),
                    space: n.space().labels().to_vec(),
                    parents: n.parents().to_vec(),
                    owner: n.owner().to_string(),
                    cpd: cpd.rows().iter().map(|r| r.mass().to_vec()).collect(),
                }
            })
            .collect();
        NetProfileRepr { nodes }
    }
}
