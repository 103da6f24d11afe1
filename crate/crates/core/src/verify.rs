//! Cross-checks a verdict against the enumerated spectrum.
//!
//! An almost universal `H` should miss nothing in the top half `(B/2, B]`;
//! otherwise some miss should still show up there. The threshold is a
//! heuristic: exceptions of an almost universal `H` can be large.

use serde::{Deserialize, Serialize};

use crate::classifier::{Status, Verdict};
use crate::coset::CosetInstance;
use crate::error::Result;
use crate::spectrum::{confirmed_misses, predicted_misses, spectrum, MissCandidate, Spectrum, SpectrumConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Consistency {
    Consistent,
    Inconsistent,
    /// The verdict makes no prediction (rejected or inconclusive instance).
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub bound: u64,
    pub consistency: Consistency,
    pub reason: String,
    pub top_half_exceptions: Vec<u64>,
    pub exception_count: usize,
    /// Present on the branch with a predicted progression.
    pub predicted: Option<Vec<MissCandidate>>,
    pub confirmed: Option<Vec<MissCandidate>>,
}

/// Top-half check at `bound`, plus the predicted-miss check when it applies.
pub fn check(
    inst: &CosetInstance,
    verdict: &Verdict,
    spec: &Spectrum,
    q_limit: u64,
) -> Result<VerifyReport> {
    let bound = spec.bound;
    let top: Vec<u64> = spec.exceptions_in(bound / 2, bound).collect();
    let mut report = VerifyReport {
        bound,
        consistency: Consistency::NotApplicable,
        reason: String::new(),
        top_half_exceptions: top.iter().copied().take(32).collect(),
        exception_count: spec.exceptions.len(),
        predicted: None,
        confirmed: None,
    };
    match verdict.status {
        Status::AlmostUniversal => {
            report.consistency = if top.is_empty() { Consistency::Consistent } else { Consistency::Inconsistent };
            report.reason = format!("almost universal; {} exceptions in ({}, {bound}]", top.len(), bound / 2);
        }
        Status::NotAlmostUniversal => {
            report.consistency = if top.is_empty() { Consistency::Inconsistent } else { Consistency::Consistent };
            report.reason = format!("not almost universal; {} exceptions in ({}, {bound}]", top.len(), bound / 2);
            if verdict.on_spinor_branch() {
                let predicted = predicted_misses(inst, true, q_limit)?;
                let confirmed = confirmed_misses(inst, spec, &predicted)?;
                if confirmed.is_empty() {
                    report.consistency = Consistency::Inconsistent;
                    report.reason
                        .push_str(&format!("; none of {} predicted misses with q <= {q_limit} confirmed", predicted.len()));
                } else {
                    report.reason.push_str(&format!("; {} of {} predicted misses confirmed", confirmed.len(), predicted.len()));
                }
                report.predicted = Some(predicted);
                report.confirmed = Some(confirmed);
            }
        }
        _ => report.reason = format!("status {} makes no prediction", verdict.status),
    }
    Ok(report)
}

/// Runs [`check`] at each bound in turn, stopping at the first consistent one.
pub fn verify_escalating(
    inst: &CosetInstance,
    verdict: &Verdict,
    bounds: &[u64],
    q_limits: &[u64],
    cfg: &SpectrumConfig,
) -> Result<VerifyReport> {
    let mut last = None;
    for &bound in bounds {
        let spec = spectrum(inst, bound, cfg)?;
        for &q in q_limits {
            let r = check(inst, verdict, &spec, q)?;
            if r.consistency != Consistency::Inconsistent {
                return Ok(r);
            }
            last = Some(r);
        }
    }
    Ok(last.expect("at least one bound and one qlimit"))
}
