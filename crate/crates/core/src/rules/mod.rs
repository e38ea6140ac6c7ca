//! Sequential budgeting rules.
//!
//! Tie-breaking is fixed across every rule: when several projects share the
//! best score the lowest id wins, and when several share the worst STV
//! support the highest id is eliminated.

mod cc;
mod monroe;
pub mod oracle;
mod stv;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{Assignment, Budget, Instance, ProjectId, VoterId};

pub use cc::seq_chamberlin_courant;
pub use monroe::seq_monroe;
pub use oracle::{brute_force_cc_optimal, brute_force_monroe_optimal};
pub use stv::stv;

/// How a voter values a project.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoringMode {
    /// 1 if approved, 0 otherwise.
    #[default]
    Approval,
    /// `m - pos` where `pos` is the 0-based rank; needs rankings.
    Borda,
}

impl ScoringMode {
    pub(crate) fn check(self, instance: &Instance) -> Result<()> {
        if self == ScoringMode::Borda && instance.rankings().is_none() {
            return Err(Error::config("borda scoring needs rankings on the instance"));
        }
        Ok(())
    }

    /// Caller must have run [`ScoringMode::check`].
    pub(crate) fn score(self, instance: &Instance, voter: VoterId, project: ProjectId) -> u64 {
        match self {
            ScoringMode::Approval => instance.ballot(voter).approves(project) as u64,
            ScoringMode::Borda => {
                let ranking = &instance.rankings().expect("checked")[voter];
                (instance.m() - ranking.position(project)) as u64
            }
        }
    }
}

impl FromStr for ScoringMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "approval" => Ok(ScoringMode::Approval),
            "borda" => Ok(ScoringMode::Borda),
            other => Err(Error::config(format!("unknown scoring mode {other:?}"))),
        }
    }
}

/// STV election threshold.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quota {
    /// `n / k`
    #[default]
    Hare,
    /// `floor(n / (k + 1)) + 1`
    Droop,
    Fixed(#[serde(with = "rational_text")] BigRational),
}

impl Quota {
    pub fn value(&self, n: usize, k: usize) -> Result<BigRational> {
        let q = match self {
            Quota::Hare => {
                if k == 0 {
                    return Err(Error::config("hare quota needs k > 0"));
                }
                BigRational::new(BigInt::from(n), BigInt::from(k))
            }
            Quota::Droop => BigRational::from_integer(BigInt::from(n / (k + 1) + 1)),
            Quota::Fixed(q) => q.clone(),
        };
        if q <= BigRational::from_integer(BigInt::from(0)) {
            return Err(Error::config(format!("quota must be positive, got {q}")));
        }
        Ok(q)
    }
}

impl FromStr for Quota {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hare" => Ok(Quota::Hare),
            "droop" => Ok(Quota::Droop),
            other => rational_text::parse(other)
                .map(Quota::Fixed)
                .ok_or_else(|| Error::config(format!("unknown quota {other:?}"))),
        }
    }
}

/// Why a project entered the budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Best marginal score in a greedy round.
    Greedy,
    /// Part of an exactly optimal small solution.
    Exact,
    /// STV support reached the quota.
    Quota,
    /// STV filled the last seats with every remaining candidate.
    Remaining,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: usize,
    pub project: ProjectId,
    #[serde(with = "rational_text")]
    pub score: BigRational,
    /// Voters satisfied, assigned or (for STV) supporting at this step.
    pub voters: Vec<VoterId>,
    pub selection: Selection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Elimination {
    pub round: usize,
    pub project: ProjectId,
    #[serde(with = "rational_text")]
    pub support: BigRational,
}

/// Audit log of a rule run: one step per selected project, in order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleTrace {
    pub steps: Vec<TraceStep>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eliminations: Vec<Elimination>,
}

impl RuleTrace {
    pub(crate) fn record(
        &mut self,
        project: ProjectId,
        score: impl Into<BigInt>,
        voters: Vec<VoterId>,
        selection: Selection,
    ) {
        self.record_rational(project, BigRational::from_integer(score.into()), voters, selection);
    }

    pub(crate) fn record_rational(
        &mut self,
        project: ProjectId,
        score: BigRational,
        voters: Vec<VoterId>,
        selection: Selection,
    ) {
        self.steps.push(TraceStep {
            iteration: self.steps.len() + 1,
            project,
            score,
            voters,
            selection,
        });
    }

    pub fn selected(&self) -> impl Iterator<Item = ProjectId> + '_ {
        self.steps.iter().map(|s| s.project)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Sccr,
    Smr,
    Stv,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Sccr => "sccr",
            Rule::Smr => "smr",
            Rule::Stv => "stv",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sccr" => Ok(Rule::Sccr),
            "smr" => Ok(Rule::Smr),
            "stv" => Ok(Rule::Stv),
            other => Err(Error::config(format!("unknown rule {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleOptions {
    pub scoring: ScoringMode,
    pub quota: Quota,
    /// STV committee size; derived from the unit cost when absent.
    pub committee_size: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleOutcome {
    pub budget: Budget,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Assignment>,
    pub trace: RuleTrace,
}

pub fn run_rule(rule: Rule, instance: &Instance, options: &RuleOptions) -> Result<RuleOutcome> {
    match rule {
        Rule::Sccr => {
            let (budget, trace) = seq_chamberlin_courant(instance, options.scoring)?;
            Ok(RuleOutcome {
                budget,
                assignment: None,
                trace,
            })
        }
        Rule::Smr => {
            let (budget, assignment, trace) = seq_monroe(instance, options.scoring)?;
            Ok(RuleOutcome {
                budget,
                assignment: Some(assignment),
                trace,
            })
        }
        Rule::Stv => {
            let k = match options.committee_size {
                Some(k) => k,
                None => committee_size(instance)?,
            };
            let (budget, trace) = stv(instance, k, &options.quota)?;
            Ok(RuleOutcome {
                budget,
                assignment: None,
                trace,
            })
        }
    }
}

/// Number of seats an equal-cost instance affords, capped at `m`.
pub fn committee_size(instance: &Instance) -> Result<usize> {
    let unit = instance.unit_cost().ok_or_else(|| {
        Error::Unsupported("committee rules need every project to cost the same".into())
    })?;
    if unit == 0 {
        return Ok(instance.m());
    }
    Ok(((instance.limit() / unit) as usize).min(instance.m()))
}

/// Monroe capacity `ceil(n / k)`.
pub(crate) fn monroe_capacity(n: usize, k: usize) -> usize {
    n.div_ceil(k)
}

/// Index of the first maximum; `None` on an empty iterator.
pub(crate) fn argmax_first<T: Ord>(items: impl IntoIterator<Item = (ProjectId, T)>) -> Option<(ProjectId, T)> {
    let mut best: Option<(ProjectId, T)> = None;
    for (p, s) in items {
        if best.as_ref().is_none_or(|(_, b)| s > *b) {
            best = Some((p, s));
        }
    }
    best
}

/// Rationals travel as `"n"` or `"n/d"` strings so nothing is rounded.
pub(crate) mod rational_text {
    use super::*;

    pub fn serialize<S: Serializer>(value: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).ok_or_else(|| serde::de::Error::custom(format!("not a rational: {text:?}")))
    }

    pub fn parse(text: &str) -> Option<BigRational> {
        match text.split_once('/') {
            Some((n, d)) => {
                let d: BigInt = d.trim().parse().ok()?;
                if d == BigInt::from(0) {
                    return None;
                }
                Some(BigRational::new(n.trim().parse().ok()?, d))
            }
            None => Some(BigRational::from_integer(text.trim().parse().ok()?)),
        }
    }
}
