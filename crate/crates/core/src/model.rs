//! Instances, budgets and the predicates defined over them.
//!
//! Project and voter ids are dense indices. Costs and the budget limit are
//! integer money units, so feasibility and exhaustiveness are exact.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ProjectId = usize;
pub type VoterId = usize;
pub type Money = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Project {
    pub id: ProjectId,
    pub cost: Money,
}

/// The set of projects one voter approves, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ApprovalBallot {
    approved: Vec<ProjectId>,
}

impl ApprovalBallot {
    fn new(mut approved: Vec<ProjectId>) -> Self {
        approved.sort_unstable();
        ApprovalBallot { approved }
    }

    pub fn approves(&self, project: ProjectId) -> bool {
        self.approved.binary_search(&project).is_ok()
    }

    pub fn approved(&self) -> &[ProjectId] {
        &self.approved
    }

    pub fn len(&self) -> usize {
        self.approved.len()
    }

    pub fn is_empty(&self) -> bool {
        self.approved.is_empty()
    }
}

/// A strict ranking of every project, most preferred first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ranking {
    order: Vec<ProjectId>,
    position: Vec<usize>,
}

impl Ranking {
    pub fn new(order: Vec<ProjectId>, m: usize) -> Result<Self> {
        if order.len() != m {
            return Err(Error::validation(format!(
                "ranking has {} entries, expected {m}",
                order.len()
            )));
        }
        let mut position = vec![usize::MAX; m];
        for (pos, &p) in order.iter().enumerate() {
            if p >= m {
                return Err(Error::validation(format!("ranking mentions unknown project {p}")));
            }
            if position[p] != usize::MAX {
                return Err(Error::validation(format!("ranking repeats project {p}")));
            }
            position[p] = pos;
        }
        Ok(Ranking { order, position })
    }

    pub fn order(&self) -> &[ProjectId] {
        &self.order
    }

    /// 0-based rank of `project`.
    pub fn position(&self, project: ProjectId) -> usize {
        self.position[project]
    }
}

/// A validated participatory-budgeting instance.
///
/// Instances are immutable once built; every constructor runs the full
/// validator, so rules never need to re-check ids or costs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    projects: Vec<Project>,
    ballots: Vec<ApprovalBallot>,
    rankings: Option<Vec<Ranking>>,
    limit: Money,
    allow_zero_cost: bool,
    coherent: bool,
}

/// JSON shape of an [`Instance`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRepr {
    limit: Money,
    projects: Vec<Project>,
    ballots: Vec<Vec<ProjectId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rankings: Option<Vec<Vec<ProjectId>>>,
    #[serde(default, skip_serializing_if = "is_false")]
    allow_zero_cost: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    coherent: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = Error;

    fn try_from(repr: InstanceRepr) -> Result<Self> {
        for (index, project) in repr.projects.iter().enumerate() {
            if project.id != index {
                return Err(Error::validation(format!(
                    "project at position {index} has id {}, ids must be 0..m-1 in order",
                    project.id
                )));
            }
        }
        let mut builder = Instance::builder(
            repr.projects.iter().map(|p| p.cost).collect(),
            repr.ballots,
            repr.limit,
        )
        .allow_zero_cost(repr.allow_zero_cost)
        .coherent(repr.coherent);
        if let Some(rankings) = repr.rankings {
            builder = builder.rankings(rankings);
        }
        builder.build()
    }
}

impl From<Instance> for InstanceRepr {
    fn from(instance: Instance) -> Self {
        InstanceRepr {
            limit: instance.limit,
            projects: instance.projects,
            ballots: instance.ballots.into_iter().map(|b| b.approved).collect(),
            rankings: instance
                .rankings
                .map(|rs| rs.into_iter().map(|r| r.order).collect()),
            allow_zero_cost: instance.allow_zero_cost,
            coherent: instance.coherent,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InstanceBuilder {
    costs: Vec<Money>,
    ballots: Vec<Vec<ProjectId>>,
    rankings: Option<Vec<Vec<ProjectId>>>,
    limit: Money,
    allow_zero_cost: bool,
    coherent: bool,
}

impl InstanceBuilder {
    pub fn rankings(mut self, rankings: Vec<Vec<ProjectId>>) -> Self {
        self.rankings = Some(rankings);
        self
    }

    pub fn allow_zero_cost(mut self, allow: bool) -> Self {
        self.allow_zero_cost = allow;
        self
    }

    /// Require every ballot to be a prefix of its owner's ranking.
    pub fn coherent(mut self, coherent: bool) -> Self {
        self.coherent = coherent;
        self
    }

    pub fn build(self) -> Result<Instance> {
        let m = self.costs.len();
        let n = self.ballots.len();
        if m == 0 {
            return Err(Error::validation("instance has no projects"));
        }
        if n == 0 {
            return Err(Error::validation("instance has no voters"));
        }
        if self.limit == 0 {
            return Err(Error::validation("budget limit must be positive"));
        }
        for (id, &cost) in self.costs.iter().enumerate() {
            if cost == 0 && !self.allow_zero_cost {
                return Err(Error::validation(format!(
                    "project {id} has zero cost but allow_zero_cost is not set"
                )));
            }
            if cost > self.limit {
                return Err(Error::validation(format!(
                    "project {id} costs {cost}, more than the limit {}",
                    self.limit
                )));
            }
        }

        let mut ballots = Vec::with_capacity(n);
        for (voter, approved) in self.ballots.into_iter().enumerate() {
            if approved.is_empty() {
                return Err(Error::validation(format!("voter {voter} approves no project")));
            }
            let ballot = ApprovalBallot::new(approved);
            if let Some(&bad) = ballot.approved.iter().find(|&&p| p >= m) {
                return Err(Error::validation(format!(
                    "voter {voter} approves unknown project {bad}"
                )));
            }
            if ballot.approved.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::validation(format!(
                    "voter {voter} lists a project twice"
                )));
            }
            ballots.push(ballot);
        }

        let rankings = match self.rankings {
            None => None,
            Some(orders) => {
                if orders.len() != n {
                    return Err(Error::validation(format!(
                        "{} rankings given for {n} voters",
                        orders.len()
                    )));
                }
                let rankings = orders
                    .into_iter()
                    .enumerate()
                    .map(|(voter, order)| {
                        Ranking::new(order, m).map_err(|e| match e {
                            Error::Validation(msg) => {
                                Error::validation(format!("voter {voter}: {msg}"))
                            }
                            other => other,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(rankings)
            }
        };

        if self.coherent {
            let Some(rankings) = &rankings else {
                return Err(Error::validation("coherent instance requires rankings"));
            };
            for (voter, (ballot, ranking)) in ballots.iter().zip(rankings).enumerate() {
                let mut prefix = ranking.order[..ballot.len()].to_vec();
                prefix.sort_unstable();
                if prefix != ballot.approved {
                    return Err(Error::validation(format!(
                        "voter {voter}: approvals are not a prefix of the ranking"
                    )));
                }
            }
        }

        Ok(Instance {
            projects: self
                .costs
                .into_iter()
                .enumerate()
                .map(|(id, cost)| Project { id, cost })
                .collect(),
            ballots,
            rankings,
            limit: self.limit,
            allow_zero_cost: self.allow_zero_cost,
            coherent: self.coherent,
        })
    }
}

impl Instance {
    pub fn builder(costs: Vec<Money>, ballots: Vec<Vec<ProjectId>>, limit: Money) -> InstanceBuilder {
        InstanceBuilder {
            costs,
            ballots,
            rankings: None,
            limit,
            allow_zero_cost: false,
            coherent: false,
        }
    }

    /// Approval-only instance with strictly positive costs.
    pub fn new(costs: Vec<Money>, ballots: Vec<Vec<ProjectId>>, limit: Money) -> Result<Self> {
        Instance::builder(costs, ballots, limit).build()
    }

    /// Number of voters.
    pub fn n(&self) -> usize {
        self.ballots.len()
    }

    /// Number of projects.
    pub fn m(&self) -> usize {
        self.projects.len()
    }

    pub fn limit(&self) -> Money {
        self.limit
    }

    pub fn projects(&self) -> &[Project] {
        &self.projects
    }

    pub fn cost(&self, project: ProjectId) -> Money {
        self.projects[project].cost
    }

    pub fn ballots(&self) -> &[ApprovalBallot] {
        &self.ballots
    }

    pub fn ballot(&self, voter: VoterId) -> &ApprovalBallot {
        &self.ballots[voter]
    }

    pub fn rankings(&self) -> Option<&[Ranking]> {
        self.rankings.as_deref()
    }

    pub fn allows_zero_cost(&self) -> bool {
        self.allow_zero_cost
    }

    pub fn is_coherent(&self) -> bool {
        self.coherent
    }

    pub fn max_cost(&self) -> Money {
        self.projects.iter().map(|p| p.cost).max().unwrap_or(0)
    }

    pub fn total_project_cost(&self) -> Money {
        self.projects.iter().map(|p| p.cost).sum()
    }

    /// The common cost when every project costs the same.
    pub fn unit_cost(&self) -> Option<Money> {
        let first = self.projects[0].cost;
        self.projects.iter().all(|p| p.cost == first).then_some(first)
    }

    /// Same instance under a different limit.
    pub fn with_limit(&self, limit: Money) -> Result<Self> {
        let repr = InstanceRepr {
            limit,
            ..InstanceRepr::from(self.clone())
        };
        Instance::try_from(repr)
    }
}

/// A set of funded projects together with its cost.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    selected: BTreeSet<ProjectId>,
    total_cost: Money,
}

impl Budget {
    pub fn empty() -> Self {
        Budget {
            selected: BTreeSet::new(),
            total_cost: 0,
        }
    }

    pub fn new(instance: &Instance, projects: impl IntoIterator<Item = ProjectId>) -> Result<Self> {
        let mut selected = BTreeSet::new();
        for p in projects {
            if p >= instance.m() {
                return Err(Error::validation(format!("unknown project id {p}")));
            }
            if !selected.insert(p) {
                return Err(Error::validation(format!("project {p} selected twice")));
            }
        }
        let total_cost = selected.iter().map(|&p| instance.cost(p)).sum();
        Ok(Budget {
            selected,
            total_cost,
        })
    }

    /// Adds a project the caller knows to be valid and unselected.
    pub(crate) fn push(&mut self, instance: &Instance, project: ProjectId) {
        let fresh = self.selected.insert(project);
        debug_assert!(fresh, "project {project} pushed twice");
        self.total_cost += instance.cost(project);
    }

    pub fn selected(&self) -> &BTreeSet<ProjectId> {
        &self.selected
    }

    pub fn contains(&self, project: ProjectId) -> bool {
        self.selected.contains(&project)
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn total_cost(&self) -> Money {
        self.total_cost
    }

    /// Checks that a budget read from outside refers to `instance` and that
    /// its cached cost is right.
    pub fn verify_against(&self, instance: &Instance) -> Result<()> {
        if let Some(&p) = self.selected.iter().find(|&&p| p >= instance.m()) {
            return Err(Error::validation(format!("budget selects unknown project {p}")));
        }
        let actual = total_cost(instance, self.selected.iter().copied())?;
        if actual != self.total_cost {
            return Err(Error::validation(format!(
                "budget total_cost is {} but its projects cost {actual}",
                self.total_cost
            )));
        }
        Ok(())
    }
}

/// Monroe-style representative map from voters to funded projects.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    rep: Vec<Option<ProjectId>>,
    capacity: usize,
}

impl Assignment {
    pub fn new(n: usize, capacity: usize) -> Self {
        Assignment {
            rep: vec![None; n],
            capacity,
        }
    }

    pub(crate) fn assign(&mut self, voter: VoterId, project: ProjectId) {
        self.rep[voter] = Some(project);
    }

    pub fn representative(&self, voter: VoterId) -> Option<ProjectId> {
        self.rep[voter]
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_assigned(&self, voter: VoterId) -> bool {
        self.rep[voter].is_some()
    }

    /// Voters represented by `project`.
    pub fn voters_of(&self, project: ProjectId) -> Vec<VoterId> {
        self.rep
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == Some(project))
            .map(|(v, _)| v)
            .collect()
    }

    /// Number of voters represented by `project`.
    pub fn load(&self, project: ProjectId) -> usize {
        self.rep.iter().filter(|r| **r == Some(project)).count()
    }

    /// Every representative is funded and no project exceeds the capacity.
    pub fn respects(&self, budget: &Budget) -> bool {
        self.rep.iter().flatten().all(|&p| budget.contains(p))
            && budget.selected().iter().all(|&p| self.load(p) <= self.capacity)
    }
}

/// Cost of a set of projects.
pub fn total_cost(instance: &Instance, projects: impl IntoIterator<Item = ProjectId>) -> Result<Money> {
    projects.into_iter().try_fold(0, |acc, p| {
        if p >= instance.m() {
            Err(Error::validation(format!("unknown project id {p}")))
        } else {
            Ok(acc + instance.cost(p))
        }
    })
}

pub fn is_feasible(instance: &Instance, budget: &Budget) -> bool {
    budget.total_cost() <= instance.limit()
}

/// True when no unselected project fits into the leftover money.
pub fn is_exhaustive(instance: &Instance, budget: &Budget) -> Result<bool> {
    if !is_feasible(instance, budget) {
        return Err(Error::Contract(format!(
            "exhaustiveness asked of an infeasible budget (cost {} > limit {})",
            budget.total_cost(),
            instance.limit()
        )));
    }
    let slack = instance.limit() - budget.total_cost();
    Ok(instance
        .projects()
        .iter()
        .all(|p| budget.contains(p.id) || p.cost > slack))
}

pub fn voter_satisfied(ballot: &ApprovalBallot, budget: &Budget) -> bool {
    ballot.approved().iter().any(|&p| budget.contains(p))
}

/// Number of voters with at least one funded approved project.
pub fn coverage(instance: &Instance, budget: &Budget) -> usize {
    instance
        .ballots()
        .iter()
        .filter(|b| voter_satisfied(b, budget))
        .count()
}
