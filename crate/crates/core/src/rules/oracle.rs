//! Exhaustive optima used to check the greedy rules on small instances.

use crate::error::{Error, Result};
use crate::model::{coverage, Assignment, Budget, Instance, ProjectId, VoterId};

use super::{monroe_capacity, ScoringMode};

pub const DEFAULT_PROJECT_CAP: usize = 16;
pub const DEFAULT_VOTER_CAP: usize = 16;

/// Best feasible budget by coverage, over all `2^m` project subsets.
pub fn brute_force_cc_optimal(instance: &Instance) -> Result<(Budget, usize)> {
    brute_force_cc_optimal_capped(instance, DEFAULT_PROJECT_CAP)
}

/// Like [`brute_force_cc_optimal`] with an explicit project cap. Ties go to
/// the lexicographically smallest sorted id list.
pub fn brute_force_cc_optimal_capped(instance: &Instance, cap: usize) -> Result<(Budget, usize)> {
    let m = instance.m();
    if m > cap {
        return Err(Error::Refused(format!("{m} projects exceed the enumeration cap {cap}")));
    }
    let mut best: Option<(Vec<ProjectId>, usize)> = None;
    for mask in 0u64..1 << m {
        let ids: Vec<ProjectId> = (0..m).filter(|p| mask >> p & 1 == 1).collect();
        let cost: u64 = ids.iter().map(|&p| instance.cost(p)).sum();
        if cost > instance.limit() {
            continue;
        }
        let budget = Budget::new(instance, ids.iter().copied())?;
        let covered = coverage(instance, &budget);
        let better = match &best {
            None => true,
            Some((best_ids, best_cov)) => {
                covered > *best_cov || (covered == *best_cov && ids < *best_ids)
            }
        };
        if better {
            best = Some((ids, covered));
        }
    }
    let (ids, covered) = best.expect("the empty budget is always feasible");
    Ok((Budget::new(instance, ids)?, covered))
}

/// Optimal Monroe solution with `k <= 2` seats on an equal-cost instance,
/// enumerating every project subset of size `k` and every way of splitting
/// the voters between its members.
pub fn brute_force_monroe_optimal(
    instance: &Instance,
    k: usize,
    mode: ScoringMode,
) -> Result<(Budget, Assignment, u64)> {
    if !(1..=2).contains(&k) {
        return Err(Error::Refused(format!("monroe enumeration only covers 1 or 2 seats, got {k}")));
    }
    let unit = instance
        .unit_cost()
        .ok_or_else(|| Error::Unsupported("monroe oracle needs equal costs".into()))?;
    if k > instance.m() || unit * k as u64 > instance.limit() {
        return Err(Error::Contract(format!("{k} seats do not fit this instance")));
    }
    let n = instance.n();
    if n > DEFAULT_VOTER_CAP {
        return Err(Error::Refused(format!(
            "{n} voters exceed the enumeration cap {DEFAULT_VOTER_CAP}"
        )));
    }
    mode.check(instance)?;
    let capacity = monroe_capacity(n, k);
    let score = |v: VoterId, p: ProjectId| mode.score(instance, v, p);

    // (projects, per-voter representative, total)
    let mut best: Option<(Vec<ProjectId>, Vec<ProjectId>, u64)> = None;
    let mut consider = |projects: Vec<ProjectId>, reps: Vec<ProjectId>| {
        let total: u64 = reps.iter().enumerate().map(|(v, &p)| score(v, p)).sum();
        if best.as_ref().is_none_or(|b| total > b.2) {
            best = Some((projects, reps, total));
        }
    };

    let m = instance.m();
    if k == 1 {
        for p in 0..m {
            consider(vec![p], vec![p; n]);
        }
    } else {
        for a in 0..m {
            for b in a + 1..m {
                for mask in 0u32..1 << n {
                    let to_a = mask.count_ones() as usize;
                    if to_a > capacity || n - to_a > capacity {
                        continue;
                    }
                    let reps = (0..n).map(|v| if mask >> v & 1 == 1 { a } else { b }).collect();
                    consider(vec![a, b], reps);
                }
            }
        }
    }

    let (projects, reps, total) = best.expect("at least one candidate solution");
    let mut assignment = Assignment::new(n, capacity);
    for (v, &p) in reps.iter().enumerate() {
        assignment.assign(v, p);
    }
    Ok((Budget::new(instance, projects)?, assignment, total))
}
