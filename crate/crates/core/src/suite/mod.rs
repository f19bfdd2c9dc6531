//! Executable registry of the theorems about EP-type classes.
//!
//! Each claim declares the populations it is evaluated on. A trial is fully
//! described by its [`SeedTrace`]; [`replay`] regenerates the exact input, so
//! every witness in a report can be reproduced bit for bit.

mod claims;
mod report;

use serde::{Deserialize, Serialize};

pub use claims::{find, registry, Check, Claim, Outcome, Score};
pub use report::{ClaimReport, NCounts, TheoremReport, Witness, WitnessKind};

use crate::error::{LabError, Result};
use crate::generators::{self, derive_seed, name_hash, EnsembleConfig, Family};
use crate::matrix::ComplexMatrix;
use crate::tolerance::ToleranceConfig;

pub const SUITE_VERSION: &str = concat!("eplab-suite/", env!("CARGO_PKG_VERSION"));

/// Condition-number cap for every claim that takes powers or products of
/// pseudoinverses. Only the Moore-Penrose claim uses the ensemble cap.
pub const POWER_CLAIM_CAP: f64 = 10.0;

/// Failure witnesses kept per claim; the counts still cover every trial.
pub const MAX_FAILURE_WITNESSES: usize = 8;

/// How a trial input is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// One operator `T`.
    Single(Family),
    /// `T` together with a Haar unitary `U`.
    Conjugated(Family),
    /// Independent `S` and `T` of the same dimension.
    Pair(Family, Family),
    /// `(S, T)` built to satisfy the reverse-order law.
    CompatiblePair,
    /// Independent rank-deficient `(S, T)`.
    RandomPair,
}

impl Source {
    fn kind(self) -> &'static str {
        match self {
            Source::Single(_) => "single",
            Source::Conjugated(_) => "conjugated",
            Source::Pair(..) => "pair",
            Source::CompatiblePair => "compatible_pair",
            Source::RandomPair => "random_pair",
        }
    }

    /// Families the source draws from. Pair sources without a named family
    /// are built from `random_general` draws and follow its enablement.
    fn families(self) -> Vec<Family> {
        match self {
            Source::Single(f) | Source::Conjugated(f) => vec![f],
            Source::Pair(a, b) => vec![a, b],
            Source::CompatiblePair | Source::RandomPair => vec![Family::General],
        }
    }

    pub fn label(self) -> String {
        match self {
            Source::Single(f) => f.name().to_string(),
            Source::Conjugated(f) => format!("{}+unitary", f.name()),
            Source::Pair(a, b) => format!("{}+{}", a.name(), b.name()),
            s => s.kind().to_string(),
        }
    }

    fn accepts(self, dim: usize) -> bool {
        match self {
            Source::CompatiblePair | Source::RandomPair => dim >= 1,
            s => s.families().iter().all(|f| f.accepts(dim)),
        }
    }
}

/// Generation provenance of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedTrace {
    pub source: String,
    pub families: Vec<String>,
    pub dim: usize,
    pub n_hint: u32,
    pub seeds: [u64; 2],
    pub condition_cap: f64,
}

/// One trial's operators. `s` is the left factor or second block of a
/// pair; `u` is the unitary of a conjugated draw.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialInput {
    pub t: ComplexMatrix,
    pub s: Option<ComplexMatrix>,
    pub u: Option<ComplexMatrix>,
}

impl TrialInput {
    pub fn single(t: ComplexMatrix) -> Self {
        Self { t, s: None, u: None }
    }

    fn partner(&self) -> Option<&ComplexMatrix> {
        self.s.as_ref().or(self.u.as_ref())
    }
}

/// Regenerates the input described by a seed trace.
pub fn replay(trace: &SeedTrace) -> Result<TrialInput> {
    let fam = |k: usize| -> Result<Family> {
        let name = trace
            .families
            .get(k)
            .ok_or_else(|| LabError::invalid(format!("seed trace for {} lacks family #{k}", trace.source)))?;
        Family::from_name(name)
    };
    let (d, n, cap, [s0, s1]) = (trace.dim, trace.n_hint, trace.condition_cap, trace.seeds);
    Ok(match trace.source.as_str() {
        "single" => TrialInput::single(fam(0)?.draw(d, n, s0, cap)?),
        "conjugated" => TrialInput {
            t: fam(0)?.draw(d, n, s0, cap)?,
            s: None,
            u: Some(generators::random_unitary(d, s1)?),
        },
        "pair" => TrialInput {
            s: Some(fam(0)?.draw(d, n, s0, cap)?),
            t: fam(1)?.draw(d, n, s1, cap)?,
            u: None,
        },
        "compatible_pair" | "random_pair" => {
            let (s, t) = if trace.source == "compatible_pair" {
                generators::compatible_pair(d, s0)?
            } else {
                generators::random_pair(d, s0)?
            };
            TrialInput { t, s: Some(s), u: None }
        }
        other => return Err(LabError::invalid(format!("unknown trial source {other:?}"))),
    })
}

/// Trial scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Trial {
    pub claim: usize,
    pub n: Option<u32>,
    pub source: String,
    pub trace: SeedTrace,
}

pub(crate) fn plan(claims: &[Claim], config: &EnsembleConfig) -> Vec<Trial> {
    let mut trials = Vec::new();
    for (ci, claim) in claims.iter().enumerate() {
        let cap = if claim.full_condition { config.condition_cap } else { config.condition_cap.min(POWER_CLAIM_CAP) };
        let ns: Vec<Option<u32>> = if claim.indexed { (1..=config.n_max).map(Some).collect() } else { vec![None] };
        for n in ns {
            for (si, source) in claim.sources.iter().enumerate() {
                if !source.families().iter().all(|f| config.family_enabled(*f)) {
                    continue;
                }
                let dims: Vec<usize> = config.dims.iter().copied().filter(|&d| source.accepts(d)).collect();
                if dims.is_empty() {
                    continue;
                }
                for k in 0..config.trials_per_family {
                    let key = [name_hash(claim.id), u64::from(n.unwrap_or(0)), si as u64, k as u64];
                    let base = derive_seed(config.master_seed, &key);
                    let n_hint = n.unwrap_or((k as u32 % config.n_max) + 1);
                    trials.push(Trial {
                        claim: ci,
                        n,
                        source: source.label(),
                        trace: SeedTrace {
                            source: source.kind().to_string(),
                            families: source.families().iter().map(|f| f.name().to_string()).collect(),
                            dim: dims[k % dims.len()],
                            n_hint,
                            seeds: [derive_seed(base, &[0]), derive_seed(base, &[1])],
                            condition_cap: cap,
                        },
                    });
                }
            }
        }
    }
    trials
}

pub(crate) struct TrialResult {
    pub outcome: Result<Outcome>,
}

fn evaluate(claims: &[Claim], trial: &Trial, tol: &ToleranceConfig) -> TrialResult {
    let claim = &claims[trial.claim];
    let n = trial.n.unwrap_or(trial.trace.n_hint);
    let outcome = replay(&trial.trace).and_then(|input| (claim.check)(&input, n, tol));
    TrialResult { outcome }
}

/// Runs every registered claim with the default scheduling.
pub fn run_suite(config: &EnsembleConfig, tol: &ToleranceConfig) -> Result<TheoremReport> {
    run_suite_with(config, tol, Execution::default())
}

/// Runs every registered claim. The report does not depend on `execution`.
pub fn run_suite_with(config: &EnsembleConfig, tol: &ToleranceConfig, execution: Execution) -> Result<TheoremReport> {
    config.validate()?;
    tol.validate()?;
    let claims = registry();
    let trials = plan(&claims, config);
    let results: Vec<TrialResult> = match execution {
        Execution::Sequential => trials.iter().map(|t| evaluate(&claims, t, tol)).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            trials.par_iter().map(|t| evaluate(&claims, t, tol)).collect()
        }
    };
    report::aggregate(&claims, config, tol, &trials, results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> EnsembleConfig {
        EnsembleConfig { dims: vec![2, 3, 4], trials_per_family: 3, n_max: 2, ..Default::default() }
    }

    #[test]
    fn replay_is_bit_exact() {
        let claims = registry();
        for trial in plan(&claims, &small()).iter().step_by(7) {
            let a = replay(&trial.trace).unwrap();
            let b = replay(&trial.trace).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.t.rows(), trial.trace.dim);
        }
    }

    #[test]
    fn seed_trace_round_trips_through_json() {
        let claims = registry();
        let trial = &plan(&claims, &small())[5];
        let text = serde_json::to_string(&trial.trace).unwrap();
        let back: SeedTrace = serde_json::from_str(&text).unwrap();
        assert_eq!(back, trial.trace);
        assert_eq!(replay(&back).unwrap(), replay(&trial.trace).unwrap());
    }

    #[test]
    fn empty_families_give_empty_report() {
        let cfg = EnsembleConfig { families: vec![], ..small() };
        let report = run_suite(&cfg, &ToleranceConfig::default()).unwrap();
        assert!(report.claims.values().all(|c| c.trials == 0 && c.witnesses.is_empty()));
        assert!(report.all_pass());
    }

    #[test]
    fn claim_ids_are_unique_and_described() {
        let claims = registry();
        let mut ids: Vec<_> = claims.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), claims.len());
        assert!(claims.iter().all(|c| !c.statement.is_empty() && !c.sources.is_empty()));
    }

    #[test]
    fn small_suite_passes() {
        let report = run_suite(&small(), &ToleranceConfig::default()).unwrap();
        let failing: Vec<_> = report.claims.iter().filter(|(_, c)| c.passes != c.hypothesis_hits).collect();
        assert!(failing.is_empty(), "{}", report.to_text());
    }

    #[test]
    fn execution_modes_agree() {
        let cfg = small();
        let tol = ToleranceConfig::default();
        let a = run_suite_with(&cfg, &tol, Execution::Sequential).unwrap();
        let b = run_suite(&cfg, &tol).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
