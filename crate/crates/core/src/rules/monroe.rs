use crate::error::Result;
use crate::model::{Assignment, Budget, Instance, ProjectId, VoterId};

use super::{argmax_first, committee_size, monroe_capacity, RuleTrace, ScoringMode, Selection};

/// Sequential Monroe for equal-cost instances.
///
/// With `k` seats (limit over unit cost) every funded project represents at
/// most `ceil(n / k)` voters. For `k <= 2` the optimal Monroe solution is
/// computed exactly; otherwise each round gives every unselected project its
/// best `ceil(n / k)` unassigned voters, funds the project whose group scores
/// highest and assigns that group to it.
pub fn seq_monroe(instance: &Instance, mode: ScoringMode) -> Result<(Budget, Assignment, RuleTrace)> {
    mode.check(instance)?;
    let k = committee_size(instance)?;
    if k <= 2 {
        let best = exact_small(instance, mode, k);
        let mut trace = RuleTrace::default();
        for &p in &best.projects {
            let voters = best.assignment.voters_of(p);
            let score: u64 = voters.iter().map(|&v| mode.score(instance, v, p)).sum();
            trace.record(p, score, voters, Selection::Exact);
        }
        debug_assert_eq!(
            trace.steps.iter().map(|s| s.score.to_integer()).sum::<num_bigint::BigInt>(),
            best.score.into()
        );
        let budget = Budget::new(instance, best.projects)?;
        return Ok((budget, best.assignment, trace));
    }

    let n = instance.n();
    let capacity = monroe_capacity(n, k);
    let mut budget = Budget::empty();
    let mut assignment = Assignment::new(n, capacity);
    let mut trace = RuleTrace::default();

    for _ in 0..k {
        let unassigned: Vec<VoterId> = (0..n).filter(|&v| !assignment.is_assigned(v)).collect();
        let candidates = (0..instance.m()).filter(|&p| !budget.contains(p)).map(|p| {
            let group = best_group(instance, mode, p, &unassigned, capacity);
            (p, group.iter().map(|&(_, s)| s).sum::<u64>())
        });
        let Some((chosen, score)) = argmax_first(candidates) else {
            break;
        };
        let group: Vec<VoterId> = best_group(instance, mode, chosen, &unassigned, capacity)
            .into_iter()
            .map(|(v, _)| v)
            .collect();
        for &v in &group {
            assignment.assign(v, chosen);
        }
        budget.push(instance, chosen);
        trace.record(chosen, score, group, Selection::Greedy);
    }

    Ok((budget, assignment, trace))
}

/// The `capacity` highest-scoring voters for `project`, earlier voters first
/// among equal scores.
fn best_group(
    instance: &Instance,
    mode: ScoringMode,
    project: ProjectId,
    unassigned: &[VoterId],
    capacity: usize,
) -> Vec<(VoterId, u64)> {
    let mut scored: Vec<(VoterId, u64)> = unassigned
        .iter()
        .map(|&v| (v, mode.score(instance, v, project)))
        .collect();
    scored.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(capacity);
    scored
}

pub(crate) struct ExactMonroe {
    pub projects: Vec<ProjectId>,
    pub assignment: Assignment,
    pub score: u64,
}

/// Optimal Monroe solution for one or two seats.
///
/// One seat: every voter goes to the single project. Two seats `a < b`:
/// order voters by `score(a) - score(b)`; some optimal assignment gives `a`
/// a prefix of that order, and its length must lie in `[n - cap, cap]`.
/// Pairs are scanned lexicographically and only a strictly better score
/// replaces the incumbent.
pub(crate) fn exact_small(instance: &Instance, mode: ScoringMode, k: usize) -> ExactMonroe {
    let n = instance.n();
    let m = instance.m();
    debug_assert!((1..=2).contains(&k) && k <= m);
    let capacity = monroe_capacity(n, k);
    let score = |v: VoterId, p: ProjectId| mode.score(instance, v, p);

    if k == 1 {
        let (p, total) = argmax_first((0..m).map(|p| (p, (0..n).map(|v| score(v, p)).sum::<u64>())))
            .expect("m >= 1");
        let mut assignment = Assignment::new(n, capacity);
        for v in 0..n {
            assignment.assign(v, p);
        }
        return ExactMonroe {
            projects: vec![p],
            assignment,
            score: total,
        };
    }

    let mut best: Option<(ProjectId, ProjectId, Vec<VoterId>, usize, u64)> = None;
    for a in 0..m {
        for b in a + 1..m {
            let mut order: Vec<VoterId> = (0..n).collect();
            let gain = |v: VoterId| score(v, a) as i64 - score(v, b) as i64;
            order.sort_by(|&x, &y| gain(y).cmp(&gain(x)).then(x.cmp(&y)));

            // prefix sums of a-scores over `order`, suffix sums of b-scores
            let mut to_a = vec![0u64; n + 1];
            let mut to_b = vec![0u64; n + 1];
            for i in 0..n {
                to_a[i + 1] = to_a[i] + score(order[i], a);
            }
            for i in (0..n).rev() {
                to_b[i] = to_b[i + 1] + score(order[i], b);
            }
            let lo = n.saturating_sub(capacity);
            let hi = capacity.min(n);
            let (split, total) = argmax_first((lo..=hi).map(|j| (j, to_a[j] + to_b[j])))
                .expect("2 * capacity >= n");
            if best.as_ref().is_none_or(|bst| total > bst.4) {
                best = Some((a, b, order, split, total));
            }
        }
    }

    let (a, b, order, split, total) = best.expect("m >= 2 when k == 2");
    let mut assignment = Assignment::new(n, capacity);
    for (i, &v) in order.iter().enumerate() {
        assignment.assign(v, if i < split { a } else { b });
    }
    ExactMonroe {
        projects: vec![a, b],
        assignment,
        score: total,
    }
}
