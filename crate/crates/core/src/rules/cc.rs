use crate::error::Result;
use crate::model::{Budget, Instance, VoterId};

use super::{argmax_first, RuleTrace, ScoringMode, Selection};

/// Sequential Chamberlin-Courant.
///
/// Each round scores every unselected project that still fits the leftover
/// money over the voters not yet satisfied, funds the best one and drops
/// the voters who approve it. Projects that do not fit are skipped rather
/// than ending the run, so the result is always exhaustive.
///
/// Under Borda scoring the round score is the positional sum, but a voter
/// still only leaves the pool once an approved project is funded.
pub fn seq_chamberlin_courant(instance: &Instance, mode: ScoringMode) -> Result<(Budget, RuleTrace)> {
    mode.check(instance)?;

    let mut budget = Budget::empty();
    let mut trace = RuleTrace::default();
    let mut satisfied = vec![false; instance.n()];

    loop {
        let slack = instance.limit() - budget.total_cost();
        let candidates = instance
            .projects()
            .iter()
            .filter(|p| !budget.contains(p.id) && p.cost <= slack)
            .map(|p| {
                let score: u64 = (0..instance.n())
                    .filter(|&v| !satisfied[v])
                    .map(|v| mode.score(instance, v, p.id))
                    .sum();
                (p.id, score)
            });
        let Some((chosen, score)) = argmax_first(candidates) else {
            break;
        };

        budget.push(instance, chosen);
        let removed: Vec<VoterId> = (0..instance.n())
            .filter(|&v| !satisfied[v] && instance.ballot(v).approves(chosen))
            .collect();
        for &v in &removed {
            satisfied[v] = true;
        }
        trace.record(chosen, score, removed, Selection::Greedy);
    }

    Ok((budget, trace))
}
