//! Decision fusion at the fusion center.
//!
//! Each receiver sends one bit (`true` = spoofer). The fusion center combines
//! the `N` bits with OR, AND or a k-out-of-N majority vote. Joint detection
//! and false-alarm probabilities follow from the per-receiver probabilities;
//! the majority case is the upper tail of a Poisson-binomial distribution and
//! is computed with an O(N²) recursion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PlaError, Result};

/// Upper bound on `N` for exhaustive enumeration.
pub const MAX_ENUMERATION: usize = 20;

/// Local decisions of the `N` receivers for one slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionVector {
    bits: Vec<bool>,
}

impl DecisionVector {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(PlaError::arg("decision vector must be non-empty"));
        }
        Ok(DecisionVector { bits })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Fusion rule. `Majority` without an explicit quorum uses `max(1, ⌊N/2⌋)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "RawRule")]
pub enum FusionRule {
    Or,
    And,
    Majority {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quorum: Option<usize>,
    },
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum RuleKind {
    Or,
    And,
    Majority,
}

// Internally tagged enums ignore stray fields on unit variants, so rules are
// read through this flat form instead.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    kind: RuleKind,
    #[serde(default)]
    quorum: Option<usize>,
}

impl TryFrom<RawRule> for FusionRule {
    type Error = String;

    fn try_from(raw: RawRule) -> std::result::Result<Self, String> {
        match (raw.kind, raw.quorum) {
            (RuleKind::Or, None) => Ok(FusionRule::Or),
            (RuleKind::And, None) => Ok(FusionRule::And),
            (RuleKind::Majority, quorum) => Ok(FusionRule::Majority { quorum }),
            (_, Some(_)) => Err("`quorum` only applies to the majority rule".into()),
        }
    }
}

impl FusionRule {
    pub const ALL_DEFAULT: [FusionRule; 3] = [
        FusionRule::Or,
        FusionRule::And,
        FusionRule::Majority { quorum: None },
    ];

    pub fn majority() -> Self {
        FusionRule::Majority { quorum: None }
    }

    pub fn majority_with_quorum(quorum: usize) -> Self {
        FusionRule::Majority { quorum: Some(quorum) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FusionRule::Or => "or",
            FusionRule::And => "and",
            FusionRule::Majority { .. } => "majority",
        }
    }

    /// Number of positive local decisions needed for a positive verdict.
    pub fn quorum_for(&self, n: usize) -> Result<usize> {
        if n == 0 {
            return Err(PlaError::arg("fusion needs at least one receiver"));
        }
        match *self {
            FusionRule::Or => Ok(1),
            FusionRule::And => Ok(n),
            FusionRule::Majority { quorum: None } => Ok((n / 2).max(1)),
            FusionRule::Majority { quorum: Some(q) } => {
                if q == 0 || q > n {
                    Err(PlaError::arg(format!("majority quorum must lie in [1, {n}], got {q}")))
                } else {
                    Ok(q)
                }
            }
        }
    }
}

impl fmt::Display for FusionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FusionRule::Majority { quorum: Some(q) } => write!(f, "majority:{q}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for FusionRule {
    type Err = PlaError;

    /// Accepts `or`, `and`, `majority` and `majority:<quorum>` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, quorum) = match lower.split_once(':') {
            Some((n, q)) => (n, Some(q)),
            None => (lower.as_str(), None),
        };
        match (name, quorum) {
            ("or", None) => Ok(FusionRule::Or),
            ("and", None) => Ok(FusionRule::And),
            ("majority" | "maj", None) => Ok(FusionRule::majority()),
            ("majority" | "maj", Some(q)) => {
                let q: usize = q
                    .parse()
                    .map_err(|_| PlaError::Parse(format!("invalid majority quorum `{q}`")))?;
                Ok(FusionRule::majority_with_quorum(q))
            }
            _ => Err(PlaError::Parse(format!(
                "unknown fusion rule `{s}` (expected or, and, majority[:quorum])"
            ))),
        }
    }
}

/// Joint verdict for one decision vector.
pub fn fuse(d: &DecisionVector, rule: &FusionRule) -> Result<bool> {
    let q = rule.quorum_for(d.len())?;
    Ok(d.positives() >= q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointProbabilities {
    pub p_detect_joint: f64,
    pub p_false_alarm_joint: f64,
}

fn check_probabilities(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(PlaError::arg(format!("{what}: at least one probability required")));
    }
    for (i, v) in p.iter().enumerate() {
        if !(0.0..=1.0).contains(v) {
            return Err(PlaError::arg(format!("{what}[{i}] = {v} is not a probability")));
        }
    }
    Ok(())
}

/// Distribution of the number of positives among independent Bernoulli
/// trials with success probabilities `p`.
pub fn poisson_binomial_pmf(p: &[f64]) -> Vec<f64> {
    let mut dist = vec![0.0; p.len() + 1];
    dist[0] = 1.0;
    for (i, &pi) in p.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            dist[k] = dist[k] * (1.0 - pi) + dist[k - 1] * pi;
        }
        dist[0] *= 1.0 - pi;
    }
    dist
}

/// Probability that at least `quorum` of the trials succeed.
pub fn poisson_binomial_tail(p: &[f64], quorum: usize) -> f64 {
    let dist = poisson_binomial_pmf(p);
    if quorum > p.len() {
        return 0.0;
    }
    dist[quorum..].iter().sum::<f64>().min(1.0)
}

/// Probability of a positive joint verdict given per-receiver positive
/// probabilities `p`.
pub fn joint_probability(p: &[f64], rule: &FusionRule) -> Result<f64> {
    check_probabilities(p, "p")?;
    let q = rule.quorum_for(p.len())?;
    Ok(match rule {
        FusionRule::Or => 1.0 - p.iter().map(|v| 1.0 - v).product::<f64>(),
        FusionRule::And => p.iter().product(),
        FusionRule::Majority { .. } => poisson_binomial_tail(p, q),
    })
}

/// Joint detection and false-alarm probabilities under `rule`.
pub fn joint_probabilities(p_d: &[f64], p_f: &[f64], rule: &FusionRule) -> Result<JointProbabilities> {
    if p_d.len() != p_f.len() {
        return Err(PlaError::arg(format!(
            "per-receiver probability lists differ in length ({} vs {})",
            p_d.len(),
            p_f.len()
        )));
    }
    check_probabilities(p_d, "p_detect")?;
    check_probabilities(p_f, "p_false_alarm")?;
    Ok(JointProbabilities {
        p_detect_joint: joint_probability(p_d, rule)?,
        p_false_alarm_joint: joint_probability(p_f, rule)?,
    })
}

/// Reference implementation: sums the probability of every decision vector
/// the rule maps to a positive verdict. Refuses `N > 20`.
pub fn enumerate_joint(p: &[f64], rule: &FusionRule) -> Result<f64> {
    check_probabilities(p, "p")?;
    let n = p.len();
    if n > MAX_ENUMERATION {
        return Err(PlaError::arg(format!(
            "enumeration limited to N <= {MAX_ENUMERATION}, got {n}"
        )));
    }
    let mut total = 0.0;
    let mut bits = vec![false; n];
    for mask in 0u32..(1u32 << n) {
        for (i, b) in bits.iter_mut().enumerate() {
            *b = mask >> i & 1 == 1;
        }
        let d = DecisionVector { bits: bits.clone() };
        if fuse(&d, rule)? {
            total += p
                .iter()
                .zip(&bits)
                .map(|(&pi, &b)| if b { pi } else { 1.0 - pi })
                .product::<f64>();
        }
    }
    Ok(total)
}
