use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{Budget, Instance, ProjectId, VoterId};

use super::{Elimination, Quota, RuleTrace, Selection};

/// Single transferable vote over the instance rankings.
///
/// Every voter starts with weight 1 and supports their highest-ranked
/// remaining candidate. A candidate whose support reaches the quota is
/// elected and its supporters' weights are scaled by `(T - q) / T`, where `T`
/// is the support, so the group spends exactly `q`. Otherwise the weakest
/// candidate is removed. As soon as the seats left equal the candidates
/// left, all of them are elected. Weights are exact rationals.
pub fn stv(instance: &Instance, k: usize, quota: &Quota) -> Result<(Budget, RuleTrace)> {
    let rankings = instance
        .rankings()
        .ok_or_else(|| Error::config("stv needs rankings on the instance"))?;
    let m = instance.m();
    let n = instance.n();
    if k > m {
        return Err(Error::validation(format!("committee size {k} exceeds {m} projects")));
    }
    let mut costs: Vec<_> = instance.projects().iter().map(|p| p.cost).collect();
    costs.sort_unstable_by(|a, b| b.cmp(a));
    if costs[..k].iter().sum::<u64>() > instance.limit() {
        return Err(Error::Unsupported(format!(
            "{k} seats may cost more than the limit {}",
            instance.limit()
        )));
    }
    let q = quota.value(n, k)?;

    let mut weights = vec![BigRational::one(); n];
    let mut hopeful = vec![true; m];
    let mut remaining = m;
    let mut elected: Vec<ProjectId> = Vec::with_capacity(k);
    let mut trace = RuleTrace::default();
    let mut round = 0;

    while elected.len() < k {
        round += 1;
        let top: Vec<ProjectId> = rankings
            .iter()
            .map(|r| {
                *r.order()
                    .iter()
                    .find(|&&p| hopeful[p])
                    .expect("at least one hopeful candidate")
            })
            .collect();
        let mut support = vec![BigRational::zero(); m];
        for (v, &p) in top.iter().enumerate() {
            support[p] += &weights[v];
        }
        let supporters = |c: ProjectId| -> Vec<VoterId> {
            (0..n).filter(|&v| top[v] == c).collect()
        };

        if elected.len() + remaining == k {
            for c in (0..m).filter(|&c| hopeful[c]) {
                elected.push(c);
                trace.record_rational(c, support[c].clone(), supporters(c), Selection::Remaining);
            }
            break;
        }

        // First maximum and last minimum over hopeful candidates.
        let mut best: Option<ProjectId> = None;
        let mut worst: Option<ProjectId> = None;
        for c in (0..m).filter(|&c| hopeful[c]) {
            if best.is_none_or(|b| support[c] > support[b]) {
                best = Some(c);
            }
            if worst.is_none_or(|w| support[c] <= support[w]) {
                worst = Some(c);
            }
        }
        let best = best.expect("hopeful candidates remain");
        let worst = worst.expect("hopeful candidates remain");

        if support[best] >= q {
            let total = support[best].clone();
            let factor = (&total - &q) / &total;
            let group = supporters(best);
            for &v in &group {
                weights[v] = &weights[v] * &factor;
            }
            hopeful[best] = false;
            remaining -= 1;
            elected.push(best);
            trace.record_rational(best, total, group, Selection::Quota);
        } else {
            hopeful[worst] = false;
            remaining -= 1;
            trace.eliminations.push(Elimination {
                round,
                project: worst,
                support: support[worst].clone(),
            });
        }
    }

    let budget = Budget::new(instance, elected)?;
    Ok((budget, trace))
}
