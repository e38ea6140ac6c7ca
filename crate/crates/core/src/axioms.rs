//! Justified-representation checks for elected budgets.
//!
//! A group of voters is *cohesive* when they all approve some common
//! project, and *large* when `|group| * L >= n` (an exact integer
//! comparison). A budget violates an axiom when some cohesive, large group
//! has no represented member:
//!
//! * U-JR: a voter is represented when any approved project is funded.
//! * Strong B-JR: the funded approved project must also cost more than zero.
//!
//! Checking every project `p` against the set of unrepresented voters who
//! approve it is equivalent to quantifying over all groups, because any
//! violating group lies inside that set for its common project.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ApprovalBallot, Budget, Instance, ProjectId, VoterId};

pub const DEFAULT_ORACLE_VOTER_CAP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axiom {
    #[serde(rename = "ujr")]
    Ujr,
    #[serde(rename = "strong-bjr")]
    StrongBjr,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Ujr => "ujr",
            Axiom::StrongBjr => "strong-bjr",
        }
    }

    /// Whether `ballot` counts as represented by `budget`.
    pub fn represented(self, instance: &Instance, ballot: &ApprovalBallot, budget: &Budget) -> bool {
        ballot.approved().iter().any(|&p| {
            budget.contains(p) && (self == Axiom::Ujr || instance.cost(p) > 0)
        })
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ujr" => Ok(Axiom::Ujr),
            "strong-bjr" => Ok(Axiom::StrongBjr),
            other => Err(Error::config(format!("unknown axiom {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub project: ProjectId,
    pub voters: Vec<VoterId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub satisfied: bool,
    pub witness: Option<Witness>,
}

impl AxiomReport {
    fn from_witness(axiom: Axiom, witness: Option<Witness>) -> Self {
        AxiomReport {
            axiom,
            satisfied: witness.is_none(),
            witness,
        }
    }
}

/// `|group| * L >= n`, without rounding `n / L`.
pub fn large_enough(group_size: usize, instance: &Instance) -> bool {
    group_size as u128 * instance.limit() as u128 >= instance.n() as u128
}

pub fn check(axiom: Axiom, instance: &Instance, budget: &Budget) -> AxiomReport {
    let deprived: Vec<bool> = instance
        .ballots()
        .iter()
        .map(|b| !axiom.represented(instance, b, budget))
        .collect();
    let witness = (0..instance.m()).find_map(|p| {
        let voters: Vec<VoterId> = (0..instance.n())
            .filter(|&v| deprived[v] && instance.ballot(v).approves(p))
            .collect();
        (!voters.is_empty() && large_enough(voters.len(), instance))
            .then_some(Witness { project: p, voters })
    });
    AxiomReport::from_witness(axiom, witness)
}

pub fn check_ujr(instance: &Instance, budget: &Budget) -> AxiomReport {
    check(Axiom::Ujr, instance, budget)
}

pub fn check_strong_bjr(instance: &Instance, budget: &Budget) -> AxiomReport {
    check(Axiom::StrongBjr, instance, budget)
}

/// Literal group-quantified check over every voter subset.
///
/// Only the verdict is meant to match [`check`]; the witness reported is the
/// first violating subset in mask order with its lowest common project.
pub fn naive_axiom_oracle(instance: &Instance, budget: &Budget, axiom: Axiom) -> Result<AxiomReport> {
    naive_axiom_oracle_capped(instance, budget, axiom, DEFAULT_ORACLE_VOTER_CAP)
}

pub fn naive_axiom_oracle_capped(
    instance: &Instance,
    budget: &Budget,
    axiom: Axiom,
    cap: usize,
) -> Result<AxiomReport> {
    let n = instance.n();
    if n > cap {
        return Err(Error::Refused(format!("{n} voters exceed the enumeration cap {cap}")));
    }
    for mask in 1u64..1 << n {
        let group: Vec<VoterId> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        if !large_enough(group.len(), instance) {
            continue;
        }
        if group
            .iter()
            .any(|&v| axiom.represented(instance, instance.ballot(v), budget))
        {
            continue;
        }
        let common = (0..instance.m())
            .find(|&p| group.iter().all(|&v| instance.ballot(v).approves(p)));
        if let Some(project) = common {
            return Ok(AxiomReport::from_witness(
                axiom,
                Some(Witness {
                    project,
                    voters: group,
                }),
            ));
        }
    }
    Ok(AxiomReport::from_witness(axiom, None))
}

/// Re-checks a witness against the definition: everyone approves the
/// project, the group is large, and nobody in it is represented.
pub fn witness_is_valid(axiom: Axiom, instance: &Instance, budget: &Budget, witness: &Witness) -> bool {
    let n = instance.n();
    !witness.voters.is_empty()
        && witness.project < instance.m()
        && witness.voters.iter().all(|&v| v < n)
        && witness.voters.windows(2).all(|w| w[0] < w[1])
        && large_enough(witness.voters.len(), instance)
        && witness.voters.iter().all(|&v| {
            let ballot = instance.ballot(v);
            ballot.approves(witness.project) && !axiom.represented(instance, ballot, budget)
        })
}
