//! Exact probability primitives: arbitrary-precision rationals confined to
//! [0, 1], finite outcome spaces, normalized distributions, and conditional
//! probability tables.
//!
//! Everything in this module is exact. Normalization, equality, and
//! independence are rational-number identities, never tolerance comparisons.
//! Floating point exists only in the explicit `*_f64` views intended for
//! display and CSV output.
//!
//! All values are immutable after construction and every operation is a pure
//! function, so the whole module is safe for unrestricted concurrent use.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exact rational number, reduced to lowest terms by construction.
pub type Rational = num::BigRational;

/// Errors raised by the probability primitives.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbError {
    #[error("value {0} lies outside [0, 1]")]
    OutOfRange(String),
    #[error("masses sum to {0}, expected exactly 1")]
    NotNormalized(String),
    #[error("negative mass {0}")]
    NegativeMass(String),
    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),
    #[error("outcome spaces differ")]
    SpaceMismatch,
    #[error("expected {expected} masses, got {got}")]
    MassCount { expected: usize, got: usize },
    #[error("accuracy table for more than 2 outcomes requires the spread constructor (got {0} outcomes)")]
    UnsupportedArity(usize),
    #[error("duplicate outcome label `{0}`")]
    DuplicateLabel(String),
    #[error("an outcome space needs at least 2 labels, got {0}")]
    TooFewLabels(usize),
    #[error("cannot parse `{0}` as an exact rational")]
    Parse(String),
}

/// Render a rational in the canonical `num/den` form used in every JSON and
/// CSV surface of this crate. The denominator is always printed, `0/1` and
/// `1/1` included, so output bytes are stable.
pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Float view of a rational. Display only; never feeds back into the core.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parse `num/den` or a bare integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, ProbError> {
    let s = s.trim();
    let err = || ProbError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n = BigInt::from_str(s).map_err(|_| err())?;
            Ok(Rational::from_integer(n))
        }
    }
}

/// Like [`parse_rational`], additionally accepting finite decimal literals
/// such as `0.75`, which are converted losslessly (`75/100` reduces to
/// `3/4`). Exponents are not accepted.
pub fn parse_rational_allow_decimal(s: &str) -> Result<Rational, ProbError> {
    let t = s.trim();
    if !t.contains('.') {
        return parse_rational(t);
    }
    let err = || ProbError::Parse(s.to_string());
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').ok_or_else(err)?;
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let digits_ok = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if !digits_ok(int_part) || !digits_ok(frac_part) {
        return Err(err());
    }
    let joined = format!("{}{}", int_part, frac_part);
    let numer = BigInt::from_str(&joined).map_err(|_| err())? * BigInt::from(sign);
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(Rational::new(numer, denom))
}

/// An exact probability: a rational constrained to [0, 1].
///
/// Stored reduced to lowest terms; equality is exact. Serialized as the
/// string `num/den`, never as a binary float.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prob(Rational);

impl Prob {
    pub fn new(value: Rational) -> Result<Self, ProbError> {
        if value.is_negative() || value > Rational::one() {
            return Err(ProbError::OutOfRange(rational_to_string(&value)));
        }
        Ok(Prob(value))
    }

    /// Convenience constructor from small integers. `den` must be nonzero.
    pub fn ratio(num: i64, den: i64) -> Result<Self, ProbError> {
        if den == 0 {
            return Err(ProbError::Parse(format!("{num}/{den}")));
        }
        Prob::new(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Internal constructor for values already known to lie in [0, 1]
    /// (products of probabilities, partial sums of a normalized table).
    pub(crate) fn trusted(value: Rational) -> Self {
        debug_assert!(!value.is_negative() && value <= Rational::one());
        Prob(value)
    }

    pub fn zero() -> Self {
        Prob(Rational::zero())
    }

    pub fn one() -> Self {
        Prob(Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn as_ratio(&self) -> &Rational {
        &self.0
    }

    pub fn into_ratio(self) -> Rational {
        self.0
    }

    /// 1 − p. Stays in [0, 1] for every probability.
    pub fn complement(&self) -> Prob {
        Prob(Rational::one() - &self.0)
    }

    /// Exact product; products of probabilities never leave [0, 1].
    pub fn mul(&self, other: &Prob) -> Prob {
        Prob(&self.0 * &other.0)
    }

    /// Exact sum, rejected if it exceeds 1.
    pub fn checked_add(&self, other: &Prob) -> Result<Prob, ProbError> {
        Prob::new(&self.0 + &other.0)
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }

    /// Parse, additionally accepting finite decimal literals.
    pub fn parse_allow_decimal(s: &str) -> Result<Self, ProbError> {
        Prob::new(parse_rational_allow_decimal(s)?)
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", rational_to_string(&self.0))
    }
}

impl FromStr for Prob {
    type Err = ProbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Prob::new(parse_rational(s)?)
    }
}

impl Serialize for Prob {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Prob {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// A finite set of outcome labels in a fixed, canonical order.
///
/// The declaration order is load-bearing: every iteration, tie-break, table
/// layout, and sampling routine in this crate walks outcomes in this order,
/// which is what makes outputs deterministic across runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct OutcomeSpace {
    labels: Vec<String>,
}

impl OutcomeSpace {
    pub fn new<I, S>(labels: I) -> Result<Self, ProbError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(ProbError::TooFewLabels(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(ProbError::DuplicateLabel(l.clone()));
            }
        }
        Ok(OutcomeSpace { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least 2 labels by construction
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn expect_index(&self, label: &str) -> Result<usize, ProbError> {
        self.index_of(label)
            .ok_or_else(|| ProbError::UnknownOutcome(label.to_string()))
    }
}

impl TryFrom<Vec<String>> for OutcomeSpace {
    type Error = ProbError;

    fn try_from(labels: Vec<String>) -> Result<Self, Self::Error> {
        OutcomeSpace::new(labels)
    }
}

impl From<OutcomeSpace> for Vec<String> {
    fn from(s: OutcomeSpace) -> Self {
        s.labels
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct DistRepr {
    space: Vec<String>,
    mass: Vec<Prob>,
}

/// A distribution over a finite outcome space. Masses sum to exactly 1.
///
/// JSON form: `{"space": [labels...], "mass": ["num/den", ...]}` with masses
/// in canonical label order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DistRepr", into = "DistRepr")]
pub struct Dist {
    space: OutcomeSpace,
    mass: Vec<Prob>,
}

impl Dist {
    /// Build a distribution from per-outcome masses in canonical order.
    /// Fails with `NotNormalized` unless the exact rational sum is 1.
    pub fn new(space: OutcomeSpace, mass: Vec<Prob>) -> Result<Self, ProbError> {
        if mass.len() != space.len() {
            return Err(ProbError::MassCount {
                expected: space.len(),
                got: mass.len(),
            });
        }
        let sum: Rational = mass.iter().map(|p| p.as_ratio().clone()).sum();
        if !sum.is_one() {
            return Err(ProbError::NotNormalized(rational_to_string(&sum)));
        }
        Ok(Dist { space, mass })
    }

    /// Build from raw rationals, rejecting negative weights before the
    /// normalization check.
    pub fn from_weights(space: OutcomeSpace, weights: &[Rational]) -> Result<Self, ProbError> {
        if weights.len() != space.len() {
            return Err(ProbError::MassCount {
                expected: space.len(),
                got: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(ProbError::NegativeMass(rational_to_string(w)));
        }
        let sum: Rational = weights.iter().cloned().sum();
        if !sum.is_one() {
            return Err(ProbError::NotNormalized(rational_to_string(&sum)));
        }
        let mass = weights.iter().map(|w| Prob::trusted(w.clone())).collect();
        Ok(Dist { space, mass })
    }

    /// Point mass on a single outcome.
    pub fn delta(space: OutcomeSpace, outcome: &str) -> Result<Self, ProbError> {
        let at = space.expect_index(outcome)?;
        let mass = (0..space.len())
            .map(|i| if i == at { Prob::one() } else { Prob::zero() })
            .collect();
        Ok(Dist { space, mass })
    }

    /// Equal mass 1/n on each of the n outcomes.
    pub fn uniform(space: OutcomeSpace) -> Self {
        let n = space.len();
        let each = Prob::trusted(Rational::new(BigInt::one(), BigInt::from(n)));
        let mass = vec![each; n];
        Dist { space, mass }
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn mass(&self) -> &[Prob] {
        &self.mass
    }

    pub fn prob(&self, outcome: &str) -> Result<&Prob, ProbError> {
        Ok(&self.mass[self.space.expect_index(outcome)?])
    }

    pub fn prob_at(&self, index: usize) -> &Prob {
        &self.mass[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Prob)> {
        self.space
            .labels()
            .iter()
            .map(String::as_str)
            .zip(self.mass.iter())
    }

    pub fn is_full_support(&self) -> bool {
        self.mass.iter().all(|p| !p.is_zero())
    }

    /// The single supporting outcome, if this is a point mass.
    pub fn as_delta(&self) -> Option<&str> {
        let mut hit = None;
        for (label, p) in self.iter() {
            if p.is_one() {
                hit = Some(label);
            } else if !p.is_zero() {
                return None;
            }
        }
        hit
    }

    /// Total variation distance (1/2)·Σ|a−b|, exact.
    pub fn total_variation(&self, other: &Dist) -> Result<Rational, ProbError> {
        if self.space != other.space {
            return Err(ProbError::SpaceMismatch);
        }
        let sum: Rational = self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a.as_ratio() - b.as_ratio()).abs())
            .sum();
        Ok(sum / Rational::from_integer(BigInt::from(2)))
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.mass.iter().map(Prob::to_f64).collect()
    }
}

impl TryFrom<DistRepr> for Dist {
    type Error = ProbError;

    fn try_from(r: DistRepr) -> Result<Self, Self::Error> {
        Dist::new(OutcomeSpace::new(r.space)?, r.mass)
    }
}

impl From<Dist> for DistRepr {
    fn from(d: Dist) -> Self {
        DistRepr {
            space: d.space.labels.clone(),
            mass: d.mass,
        }
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct CpdRepr {
    given: Vec<String>,
    target: Vec<String>,
    rows: Vec<Vec<Prob>>,
}

/// A conditional probability table: one normalized row per conditioning
/// outcome, rows in the conditioning space's canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CpdRepr", into = "CpdRepr")]
pub struct Cpd {
    given: OutcomeSpace,
    target: OutcomeSpace,
    rows: Vec<Dist>,
}

impl Cpd {
    pub fn new(
        given: OutcomeSpace,
        target: OutcomeSpace,
        rows: Vec<Dist>,
    ) -> Result<Self, ProbError> {
        if rows.len() != given.len() {
            return Err(ProbError::MassCount {
                expected: given.len(),
                got: rows.len(),
            });
        }
        if rows.iter().any(|r| r.space() != &target) {
            return Err(ProbError::SpaceMismatch);
        }
        Ok(Cpd {
            given,
            target,
            rows,
        })
    }

    /// The identity table: conditioning outcome i maps to a point mass on
    /// outcome i. Models a perfectly accurate observer of the conditioned
    /// variable.
    pub fn diagonal(space: &OutcomeSpace) -> Self {
        let rows = space
            .labels()
            .iter()
            .map(|l| Dist::delta(space.clone(), l).expect("label from the same space"))
            .collect();
        Cpd {
            given: space.clone(),
            target: space.clone(),
            rows,
        }
    }

    /// The α-accurate predictor table over a 2-outcome space: the row for
    /// conditioning outcome `o` puts α on `o` and 1−α on the other outcome.
    /// α = 1 is the diagonal; α = 1/2 makes every row uniform.
    pub fn alpha_accurate(alpha: &Prob, space: &OutcomeSpace) -> Result<Self, ProbError> {
        if space.len() != 2 {
            return Err(ProbError::UnsupportedArity(space.len()));
        }
        Self::alpha_accurate_spread(alpha, space)
    }

    /// Generalization of [`Cpd::alpha_accurate`] to n ≥ 2 outcomes: the row
    /// for outcome `o` puts α on `o` and spreads 1−α uniformly over the n−1
    /// remaining outcomes. Opt-in; the 2-outcome constructor is the default
    /// surface.
    pub fn alpha_accurate_spread(alpha: &Prob, space: &OutcomeSpace) -> Result<Self, ProbError> {
        let n = space.len();
        let off = Prob::trusted(
            alpha.complement().into_ratio() / Rational::from_integer(BigInt::from(n - 1)),
        );
        let rows = (0..n)
            .map(|i| {
                let mass = (0..n)
                    .map(|j| if i == j { alpha.clone() } else { off.clone() })
                    .collect();
                Dist::new(space.clone(), mass)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Cpd {
            given: space.clone(),
            target: space.clone(),
            rows,
        })
    }

    pub fn given(&self) -> &OutcomeSpace {
        &self.given
    }

    pub fn target(&self) -> &OutcomeSpace {
        &self.target
    }

    pub fn rows(&self) -> &[Dist] {
        &self.rows
    }

    pub fn row(&self, outcome: &str) -> Result<&Dist, ProbError> {
        Ok(&self.rows[self.given.expect_index(outcome)?])
    }

    pub fn row_at(&self, index: usize) -> &Dist {
        &self.rows[index]
    }

    /// True when every row is the same distribution, i.e. the target is
    /// independent of the conditioning variable.
    pub fn rows_identical(&self) -> bool {
        self.rows.windows(2).all(|w| w[0] == w[1])
    }
}

impl TryFrom<CpdRepr> for Cpd {
    type Error = ProbError;

    fn try_from(r: CpdRepr) -> Result<Self, Self::Error> {
        let given = OutcomeSpace::new(r.given)?;
        let target = OutcomeSpace::new(r.target)?;
        let rows = r
            .rows
            .into_iter()
            .map(|m| Dist::new(target.clone(), m))
            .collect::<Result<Vec<_>, _>>()?;
        Cpd::new(given, target, rows)
    }
}

impl From<Cpd> for CpdRepr {
    fn from(c: Cpd) -> Self {
        CpdRepr {
            given: c.given.labels.clone(),
            target: c.target.labels.clone(),
            rows: c.rows.into_iter().map(|r| r.mass).collect(),
        }
    }
}
