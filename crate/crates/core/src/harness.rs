//! Monte Carlo runner: draw instances, elect budgets, check an axiom and
//! report how often it holds.
//!
//! Every row of a case reads the same trial stream, so the row for `M`
//! trials covers trials `0..M` and a larger row extends a smaller one. Trial
//! results are collected in index order before counting, which makes the
//! output independent of the worker count.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axioms::{self, Axiom, AxiomReport};
use crate::culture::{self, derive_trial_seed, CostModel, CultureConfig};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rules::{run_rule, Rule, RuleOptions, RuleOutcome, ScoringMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    EqualValued,
    GeneralCase,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::EqualValued => "equal-valued",
            Case::GeneralCase => "general-case",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-valued" => Ok(Case::EqualValued),
            "general-case" => Ok(Case::GeneralCase),
            other => Err(Error::config(format!("unknown case {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub case: Case,
    pub rules: Vec<Rule>,
    pub culture: CultureConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub trial_counts: Vec<u64>,
    pub cases: Vec<CaseConfig>,
    #[serde(default = "default_axiom")]
    pub axiom: Axiom,
    /// Replaces the `master_seed` of every case's culture.
    pub master_seed: u64,
    #[serde(default)]
    pub rule_options: RuleOptions,
    /// Worker threads; `None` uses every core.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Write per-row timings. Off gives byte-stable CSV output.
    #[serde(default = "default_true")]
    pub record_elapsed: bool,
}

fn default_axiom() -> Axiom {
    Axiom::Ujr
}

fn default_true() -> bool {
    true
}

pub const DEFAULT_TRIAL_COUNTS: [u64; 6] = [100, 300, 500, 1000, 3000, 5000];
pub const DEFAULT_MASTER_SEED: u64 = 0x5EED_2024;

impl ExperimentConfig {
    /// U-JR satisfaction of SCCR, SMR and STV on equal costs and of SCCR on
    /// general costs, over 100 to 5000 trials.
    pub fn default_study() -> Self {
        ExperimentConfig {
            trial_counts: DEFAULT_TRIAL_COUNTS.to_vec(),
            cases: vec![
                CaseConfig {
                    case: Case::EqualValued,
                    rules: vec![Rule::Sccr, Rule::Smr, Rule::Stv],
                    culture: CultureConfig::equal_valued(DEFAULT_MASTER_SEED),
                },
                CaseConfig {
                    case: Case::GeneralCase,
                    rules: vec![Rule::Sccr],
                    culture: CultureConfig::general_case(DEFAULT_MASTER_SEED),
                },
            ],
            axiom: Axiom::Ujr,
            master_seed: DEFAULT_MASTER_SEED,
            rule_options: RuleOptions::default(),
            workers: None,
            record_elapsed: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trial_counts.is_empty() {
            return Err(Error::config("no trial counts given"));
        }
        if self.trial_counts.contains(&0) {
            return Err(Error::config("trial counts must be positive"));
        }
        if self.cases.is_empty() {
            return Err(Error::config("no cases given"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers must be positive"));
        }
        for (i, case) in self.cases.iter().enumerate() {
            if self.cases[..i].iter().any(|c| c.case == case.case) {
                return Err(Error::config(format!("case {} listed twice", case.case)));
            }
            if case.rules.is_empty() {
                return Err(Error::config(format!("case {} has no rules", case.case)));
            }
            for (j, &rule) in case.rules.iter().enumerate() {
                if case.rules[..j].contains(&rule) {
                    return Err(Error::config(format!("rule {rule} listed twice in {}", case.case)));
                }
                let general = case.case == Case::GeneralCase || case.culture.cost_model != CostModel::Unit;
                if general && rule != Rule::Sccr {
                    return Err(Error::config(format!(
                        "{rule} is only defined for equal costs; case {} allows sccr only",
                        case.case
                    )));
                }
                let needs_rankings = rule == Rule::Stv || self.rule_options.scoring == ScoringMode::Borda;
                if needs_rankings && !case.culture.ballot_model.has_rankings() {
                    return Err(Error::config(format!(
                        "{rule} in {} needs rankings; use prefix ballots",
                        case.case
                    )));
                }
            }
            case.culture.validate()?;
        }
        Ok(())
    }

    fn culture_for(&self, case: &CaseConfig) -> CultureConfig {
        CultureConfig {
            master_seed: self.master_seed,
            ..case.culture.clone()
        }
    }
}

/// A satisfaction rate in hundredths of a percent, rounded half up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Percent(u32);

impl Percent {
    pub fn from_counts(satisfied: u64, trials: u64) -> Self {
        assert!(trials > 0 && satisfied <= trials);
        let hundredths = (20_000 * satisfied as u128 + trials as u128) / (2 * trials as u128);
        Percent(hundredths as u32)
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl FromStr for Percent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::validation(format!("not a percentage with two decimals: {s:?}"));
        let (whole, frac) = s.split_once('.').ok_or_else(bad)?;
        if frac.len() != 2 {
            return Err(bad());
        }
        let whole: u32 = whole.parse().map_err(|_| bad())?;
        let frac: u32 = frac.parse().map_err(|_| bad())?;
        let value = whole * 100 + frac;
        if value > 10_000 {
            return Err(bad());
        }
        Ok(Percent(value))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub trial_count: u64,
    pub case: Case,
    pub rule: Rule,
    pub probability: Percent,
    pub elapsed_ms: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentResult {
    pub fn row(&self, trial_count: u64, case: Case, rule: Rule) -> Option<&ExperimentRow> {
        self.rows
            .iter()
            .find(|r| r.trial_count == trial_count && r.case == case && r.rule == rule)
    }
}

/// Everything that happened in one trial for one rule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReplay {
    pub seed: u64,
    pub trial_index: u64,
    pub instance: Instance,
    pub outcome: RuleOutcome,
    pub report: AxiomReport,
}

fn evaluate(config: &ExperimentConfig, rule: Rule, instance: &Instance) -> Result<(RuleOutcome, AxiomReport)> {
    let outcome = run_rule(rule, instance, &config.rule_options)?;
    let report = axioms::check(config.axiom, instance, &outcome.budget);
    Ok((outcome, report))
}

fn wrap_trial(config: &ExperimentConfig, trial_index: u64, err: Error) -> Error {
    Error::Trial {
        seed: derive_trial_seed(config.master_seed, trial_index),
        trial_index,
        source: Box::new(err),
    }
}

/// Re-runs a single trial of a case exactly as the full experiment does.
pub fn replay_trial(config: &ExperimentConfig, case: Case, rule: Rule, trial_index: u64) -> Result<TrialReplay> {
    config.validate()?;
    let case_config = config
        .cases
        .iter()
        .find(|c| c.case == case)
        .ok_or_else(|| Error::config(format!("case {case} is not part of the experiment")))?;
    if !case_config.rules.contains(&rule) {
        return Err(Error::config(format!("rule {rule} is not run in case {case}")));
    }
    let culture = config.culture_for(case_config);
    let run = || -> Result<TrialReplay> {
        let instance = culture::generate(&culture, trial_index)?;
        let (outcome, report) = evaluate(config, rule, &instance)?;
        Ok(TrialReplay {
            seed: derive_trial_seed(config.master_seed, trial_index),
            trial_index,
            instance,
            outcome,
            report,
        })
    };
    run().map_err(|e| wrap_trial(config, trial_index, e))
}

/// Per-trial verdict and time for each rule of a case.
type TrialRecord = Vec<(bool, f64)>;

fn run_case(config: &ExperimentConfig, case: &CaseConfig, trials: u64) -> Result<Vec<TrialRecord>> {
    let culture = config.culture_for(case);
    let records: Vec<Result<TrialRecord>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let instance = culture::generate(&culture, t).map_err(|e| wrap_trial(config, t, e))?;
            case.rules
                .iter()
                .map(|&rule| {
                    let start = Instant::now();
                    let (_, report) =
                        evaluate(config, rule, &instance).map_err(|e| wrap_trial(config, t, e))?;
                    Ok((report.satisfied, start.elapsed().as_secs_f64() * 1e3))
                })
                .collect()
        })
        .collect();
    // First failure by trial index, not by completion order.
    records.into_iter().collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(workers) = config.workers {
            builder = builder.num_threads(workers);
        }
        builder
            .build()
            .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?
    };
    let max_trials = *config.trial_counts.iter().max().expect("validated non-empty");

    let per_case: Vec<Vec<TrialRecord>> = pool.install(|| {
        config
            .cases
            .iter()
            .map(|case| run_case(config, case, max_trials))
            .collect::<Result<_>>()
    })?;

    let mut rows = Vec::new();
    for &trial_count in &config.trial_counts {
        for (case, records) in config.cases.iter().zip(&per_case) {
            let prefix = &records[..trial_count as usize];
            for (r, &rule) in case.rules.iter().enumerate() {
                let satisfied = prefix.iter().filter(|rec| rec[r].0).count() as u64;
                let elapsed: f64 = prefix.iter().map(|rec| rec[r].1).sum();
                rows.push(ExperimentRow {
                    trial_count,
                    case: case.case,
                    rule,
                    probability: Percent::from_counts(satisfied, trial_count),
                    elapsed_ms: config.record_elapsed.then_some(elapsed),
                });
            }
        }
    }
    Ok(ExperimentResult { rows })
}

pub const RESULTS_HEADER: [&str; 5] = ["trial_count", "case", "rule", "probability_pct", "elapsed_ms"];
pub const PLOT_HEADER: [&str; 3] = ["trial_count", "rule", "probability_pct"];

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}

pub fn results_csv(result: &ExperimentResult) -> Vec<u8> {
    csv_bytes(
        &RESULTS_HEADER,
        result.rows.iter().map(|r| {
            vec![
                r.trial_count.to_string(),
                r.case.to_string(),
                r.rule.to_string(),
                r.probability.to_string(),
                r.elapsed_ms.map(|ms| format!("{ms:.3}")).unwrap_or_default(),
            ]
        }),
    )
}

pub fn parse_results_csv(bytes: &[u8]) -> Result<ExperimentResult> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader
        .headers()
        .map_err(|e| Error::validation(format!("results csv: {e}")))?;
    if header.iter().ne(RESULTS_HEADER) {
        return Err(Error::validation(format!("results csv has header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::validation(format!("results csv: {e}")))?;
        let trial_count = record[0]
            .parse()
            .map_err(|_| Error::validation(format!("bad trial count {:?}", &record[0])))?;
        let elapsed_ms = match &record[4] {
            "" => None,
            text => Some(
                text.parse()
                    .map_err(|_| Error::validation(format!("bad elapsed time {text:?}")))?,
            ),
        };
        let invalid = |e: Error| Error::validation(e.to_string());
        rows.push(ExperimentRow {
            trial_count,
            case: record[1].parse().map_err(invalid)?,
            rule: record[2].parse().map_err(invalid)?,
            probability: record[3].parse()?,
            elapsed_ms,
        });
    }
    Ok(ExperimentResult { rows })
}

/// Writes `bytes` next to `path` and renames it into place, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// One CSV per case under `dir`, named after the case, with rows ordered by
/// trial count.
pub fn emit_plot_data(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    if result.rows.is_empty() {
        return Err(Error::Contract("no rows to plot".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut cases: Vec<Case> = Vec::new();
    for row in &result.rows {
        if !cases.contains(&row.case) {
            cases.push(row.case);
        }
    }
    let mut written = Vec::new();
    for case in cases {
        let mut rows: Vec<&ExperimentRow> = result.rows.iter().filter(|r| r.case == case).collect();
        rows.sort_by_key(|r| r.trial_count);
        let bytes = csv_bytes(
            &PLOT_HEADER,
            rows.into_iter().map(|r| {
                vec![r.trial_count.to_string(), r.rule.to_string(), r.probability.to_string()]
            }),
        );
        let path = dir.join(format!("{case}.csv"));
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}
