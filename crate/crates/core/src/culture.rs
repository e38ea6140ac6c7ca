//! Seeded impartial-culture instance generation.
//!
//! Trial `i` of a run is drawn from its own generator seeded with
//! [`derive_trial_seed`]`(master_seed, i)`, so the instance stream does not
//! depend on the order or the threads that trials run on.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Money, ProjectId};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer over `master_seed ^ (trial_index * golden gamma)`.
///
/// Both steps are bijections of `u64`, so distinct trial indices under one
/// master seed never share a seed.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    let mut z = master_seed ^ trial_index.wrapping_mul(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CostModel {
    Unit,
    UniformInt { min: Money, max: Money },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitModel {
    /// `L` uniform in `[2, m - 1]`; unit costs only.
    UniformCommittee,
    /// `L` uniform in `[max cost, ceil(total cost / 2)]`, or the max cost
    /// when that interval is empty.
    UniformBudget,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BallotModel {
    /// Uniform random ranking; the voter approves its top `t`, with `t`
    /// uniform in `[1, m - 1]`.
    Prefix,
    /// Each project approved independently with probability `p`; empty
    /// ballots are redrawn. No rankings.
    Bernoulli { p: f64 },
}

impl BallotModel {
    pub fn has_rankings(self) -> bool {
        matches!(self, BallotModel::Prefix)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CultureConfig {
    /// Inclusive range for the number of voters.
    pub n_range: (usize, usize),
    /// Inclusive range for the number of projects.
    pub m_range: (usize, usize),
    pub cost_model: CostModel,
    pub limit_model: LimitModel,
    pub ballot_model: BallotModel,
    /// Overridden by the experiment seed when run under the harness.
    #[serde(default)]
    pub master_seed: u64,
}

impl CultureConfig {
    /// Unit costs, committee-style limit, prefix ballots.
    pub fn equal_valued(master_seed: u64) -> Self {
        CultureConfig {
            n_range: (10, 50),
            m_range: (5, 20),
            cost_model: CostModel::Unit,
            limit_model: LimitModel::UniformCommittee,
            ballot_model: BallotModel::Prefix,
            master_seed,
        }
    }

    /// Costs uniform in `1..=10`, money-style limit, prefix ballots.
    pub fn general_case(master_seed: u64) -> Self {
        CultureConfig {
            cost_model: CostModel::UniformInt { min: 1, max: 10 },
            limit_model: LimitModel::UniformBudget,
            ..CultureConfig::equal_valued(master_seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n_lo, n_hi) = self.n_range;
        let (m_lo, m_hi) = self.m_range;
        if n_lo == 0 || n_lo > n_hi {
            return Err(Error::config(format!("bad voter range [{n_lo}, {n_hi}]")));
        }
        if m_lo < 3 || m_lo > m_hi {
            return Err(Error::config(format!(
                "bad project range [{m_lo}, {m_hi}] (lower bound must be at least 3)"
            )));
        }
        if let CostModel::UniformInt { min, max } = self.cost_model {
            if min == 0 || min > max {
                return Err(Error::config(format!("bad cost range [{min}, {max}]")));
            }
        }
        if self.limit_model == LimitModel::UniformCommittee && self.cost_model != CostModel::Unit {
            return Err(Error::config("uniform-committee limits need unit costs"));
        }
        if let BallotModel::Bernoulli { p } = self.ballot_model {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::config(format!("approval probability {p} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Draws trial `trial_index` of the culture.
pub fn generate(config: &CultureConfig, trial_index: u64) -> Result<Instance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_trial_seed(config.master_seed, trial_index));

    let n = rng.gen_range(config.n_range.0..=config.n_range.1);
    let m = rng.gen_range(config.m_range.0..=config.m_range.1);

    let costs: Vec<Money> = match config.cost_model {
        CostModel::Unit => vec![1; m],
        CostModel::UniformInt { min, max } => (0..m).map(|_| rng.gen_range(min..=max)).collect(),
    };

    let limit = match config.limit_model {
        LimitModel::UniformCommittee => rng.gen_range(2..=m as Money - 1),
        LimitModel::UniformBudget => {
            let lo = costs.iter().copied().max().expect("m >= 3");
            let hi = costs.iter().sum::<Money>().div_ceil(2);
            if lo > hi {
                lo
            } else {
                rng.gen_range(lo..=hi)
            }
        }
    };

    let builder = match config.ballot_model {
        BallotModel::Prefix => {
            let mut rankings = Vec::with_capacity(n);
            let mut ballots = Vec::with_capacity(n);
            for _ in 0..n {
                let mut order: Vec<ProjectId> = (0..m).collect();
                order.shuffle(&mut rng);
                let t = rng.gen_range(1..=m - 1);
                ballots.push(order[..t].to_vec());
                rankings.push(order);
            }
            Instance::builder(costs, ballots, limit)
                .rankings(rankings)
                .coherent(true)
        }
        BallotModel::Bernoulli { p } => {
            let ballots = (0..n)
                .map(|_| loop {
                    let approved: Vec<ProjectId> = (0..m).filter(|_| rng.gen_bool(p)).collect();
                    if !approved.is_empty() {
                        break approved;
                    }
                })
                .collect();
            Instance::builder(costs, ballots, limit)
        }
    };
    builder.build()
}
