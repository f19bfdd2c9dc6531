use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{replay, Claim, Outcome, SeedTrace, Trial, TrialResult, MAX_FAILURE_WITNESSES, SUITE_VERSION};
use crate::error::Result;
use crate::generators::EnsembleConfig;
use crate::matrix_file::MatrixFile;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// The hypothesis held and the conclusion did not.
    Failure,
    /// The check itself raised an error, e.g. a route disagreement.
    Error,
    /// The trial attains the bound in the statement.
    Tightness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub claim: String,
    pub n: Option<u32>,
    pub kind: WitnessKind,
    pub source: String,
    pub matrix: MatrixFile,
    /// Second operator of the trial: the left factor or block of a pair,
    /// or the unitary of a conjugated draw.
    pub partner: Option<MatrixFile>,
    pub residuals: BTreeMap<String, f64>,
    pub note: Option<String>,
    pub seed_trace: SeedTrace,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NCounts {
    pub trials: usize,
    pub hypothesis_hits: usize,
    pub passes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub statement: String,
    pub populations: Vec<String>,
    pub trials: usize,
    pub hypothesis_hits: usize,
    pub passes: usize,
    pub errors: usize,
    pub worst_residual: f64,
    /// Fewer than 10% of trials satisfied the hypothesis.
    pub weakly_exercised: bool,
    pub open_question: bool,
    /// Per-n counts, keyed by n; empty for claims without an index.
    pub per_n: BTreeMap<u32, NCounts>,
    pub witnesses: Vec<Witness>,
}

impl ClaimReport {
    pub fn passed(&self) -> bool {
        self.passes == self.hypothesis_hits
    }

    pub fn tightness_witnesses(&self) -> impl Iterator<Item = &Witness> {
        self.witnesses.iter().filter(|w| w.kind == WitnessKind::Tightness)
    }

    pub fn failure_witnesses(&self) -> impl Iterator<Item = &Witness> {
        self.witnesses.iter().filter(|w| w.kind != WitnessKind::Tightness)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub suite_version: String,
    pub config_echo: EnsembleConfig,
    pub tolerance: ToleranceConfig,
    pub claims: BTreeMap<String, ClaimReport>,
}

impl TheoremReport {
    /// Every claim passed on every trial where its hypothesis held.
    pub fn all_pass(&self) -> bool {
        self.claims.values().all(ClaimReport::passed)
    }

    pub fn failing_claims(&self) -> Vec<&str> {
        self.claims.iter().filter(|(_, c)| !c.passed()).map(|(id, _)| id.as_str()).collect()
    }

    /// Weakly exercised claims not covered by an open question.
    pub fn unexpected_weak_claims(&self) -> Vec<&str> {
        self.claims
            .iter()
            .filter(|(_, c)| c.weakly_exercised && !c.open_question)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// Canonical JSON: keys sorted, shortest round-trip numbers.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("reports always serialize");
        let mut out = serde_json::to_string_pretty(&value).expect("values always serialize");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} (seed {})", self.suite_version, self.config_echo.master_seed);
        let _ = writeln!(
            out,
            "{:<32} {:>7} {:>7} {:>7} {:>6} {:>11}  flags",
            "claim", "trials", "hits", "passes", "errors", "worst"
        );
        for (id, c) in &self.claims {
            let mut flags = Vec::new();
            if !c.passed() {
                flags.push("FAIL");
            }
            if c.weakly_exercised {
                flags.push(if c.open_question { "weak(open)" } else { "weak" });
            }
            let _ = writeln!(
                out,
                "{:<32} {:>7} {:>7} {:>7} {:>6} {:>11.3e}  {}",
                id,
                c.trials,
                c.hypothesis_hits,
                c.passes,
                c.errors,
                c.worst_residual,
                flags.join(",")
            );
        }
        let failing = self.failing_claims();
        if failing.is_empty() {
            let _ = writeln!(out, "all claims pass");
        } else {
            let _ = writeln!(out, "failing claims: {}", failing.join(", "));
            for id in failing {
                for w in self.claims[id].failure_witnesses() {
                    let n = w.n.map(|n| format!(" n={n}")).unwrap_or_default();
                    let note = w.note.as_deref().map(|s| format!(": {s}")).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "  {id}{n} [{}] dim {} seeds {:?}{note}",
                        w.source, w.seed_trace.dim, w.seed_trace.seeds
                    );
                }
            }
        }
        out
    }
}

pub(crate) fn aggregate(
    claims: &[Claim],
    config: &EnsembleConfig,
    tol: &ToleranceConfig,
    trials: &[Trial],
    results: Vec<TrialResult>,
) -> Result<TheoremReport> {
    let mut reports: Vec<ClaimReport> = claims
        .iter()
        .map(|c| ClaimReport {
            statement: c.statement.to_string(),
            populations: c.sources.iter().map(|s| s.label()).collect(),
            trials: 0,
            hypothesis_hits: 0,
            passes: 0,
            errors: 0,
            worst_residual: 0.0,
            weakly_exercised: false,
            open_question: c.open_question,
            per_n: BTreeMap::new(),
            witnesses: Vec::new(),
        })
        .collect();
    let mut tight_seen = vec![std::collections::BTreeSet::<(Option<u32>, String)>::new(); claims.len()];
    let mut failures = vec![0usize; claims.len()];

    for (trial, result) in trials.iter().zip(results) {
        let r = &mut reports[trial.claim];
        r.trials += 1;
        let counts = trial.n.map(|n| r.per_n.entry(n).or_default());
        let (hit, pass, witness) = match result.outcome {
            Ok(Outcome::Vacuous) => (false, false, None),
            Ok(Outcome::Scored(score)) => {
                r.worst_residual = r.worst_residual.max(score.worst);
                let kind = if !score.pass {
                    Some(WitnessKind::Failure)
                } else if score.tight && tight_seen[trial.claim].insert((trial.n, trial.source.clone())) {
                    Some(WitnessKind::Tightness)
                } else {
                    None
                };
                (true, score.pass, kind.map(|k| (k, score.residuals, None)))
            }
            Err(e) => {
                r.errors += 1;
                (true, false, Some((WitnessKind::Error, BTreeMap::new(), Some(e.to_string()))))
            }
        };
        if let Some(c) = counts {
            c.trials += 1;
            c.hypothesis_hits += usize::from(hit);
            c.passes += usize::from(pass);
        }
        r.hypothesis_hits += usize::from(hit);
        r.passes += usize::from(pass);
        if let Some((kind, residuals, note)) = witness {
            if kind != WitnessKind::Tightness {
                failures[trial.claim] += 1;
                if failures[trial.claim] > MAX_FAILURE_WITNESSES {
                    continue;
                }
            }
            let input = replay(&trial.trace)?;
            r.witnesses.push(Witness {
                claim: claims[trial.claim].id.to_string(),
                n: trial.n,
                kind,
                source: trial.source.clone(),
                matrix: MatrixFile::from_matrix(&input.t),
                partner: input.partner().map(MatrixFile::from_matrix),
                residuals,
                note,
                seed_trace: trial.trace.clone(),
            });
        }
    }
    for r in &mut reports {
        r.weakly_exercised = r.trials > 0 && r.hypothesis_hits * 10 < r.trials;
    }
    Ok(TheoremReport {
        suite_version: SUITE_VERSION.to_string(),
        config_echo: config.clone(),
        tolerance: *tol,
        claims: claims.iter().map(|c| c.id.to_string()).zip(reports).collect(),
    })
}
