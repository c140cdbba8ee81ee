//! Tunnel-splitting extraction from an interference scan plus LZ sweeps.
//!
//! Stage one fits the resonance comb `V_n = n·f/κ` to the peaks of a DC scan
//! and yields the bias-per-volt κ without any knowledge of Δ. Stage two
//! converts each LZ sweep rate into `dε/dt = κ·rate` and inverts the LZ
//! formula for Δ.

use crate::analytic;
use crate::error::{Error, Result};

use super::scan::{PeakOptions, ScanResult};

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaExtraction {
    /// Fitted bias per volt, GHz/V.
    pub kappa: f64,
    pub kappa_uncertainty: f64,
    /// Peaks used in the fit, `(n, V)`.
    pub peaks: Vec<(i32, f64)>,
    /// Root-mean-square residual of the comb fit, V.
    pub fit_residual: f64,
    /// `(sweep_rate, survival, Δ_i)` for every LZ run.
    pub runs: Vec<(f64, f64, f64)>,
    pub delta: f64,
    pub delta_uncertainty: f64,
}

fn fail(stage: &'static str, reason: impl Into<String>) -> Error {
    Error::Extraction {
        stage,
        reason: reason.into(),
    }
}

/// Labels peak voltages with harmonic indices using the median spacing of
/// neighbouring peaks as the comb period.
pub fn assign_harmonics(peaks: &[f64]) -> Result<Vec<(i32, f64)>> {
    if peaks.len() < 2 {
        return Err(fail(
            "peaks",
            format!("need at least 2 peaks, found {}", peaks.len()),
        ));
    }
    let mut sorted = peaks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    let period = gaps[gaps.len() / 2];
    if !(period > 0.0) {
        return Err(fail("peaks", "coincident peaks"));
    }
    let mut labelled: Vec<(i32, f64)> = Vec::with_capacity(sorted.len());
    for v in sorted {
        let n = (v / period).round() as i32;
        match labelled.last() {
            Some(&(m, _)) if m == n => {
                return Err(fail("peaks", format!("two peaks map onto harmonic {n}")));
            }
            _ => labelled.push((n, v)),
        }
    }
    Ok(labelled)
}

/// Least-squares fit of `V_n = n·s` through the origin; returns `(s, σ_s,
/// rms residual)`.
fn fit_comb(labelled: &[(i32, f64)]) -> (f64, f64, f64) {
    let nn: f64 = labelled.iter().map(|&(n, _)| (n * n) as f64).sum();
    let nv: f64 = labelled.iter().map(|&(n, v)| n as f64 * v).sum();
    let s = nv / nn;
    let ss: f64 = labelled
        .iter()
        .map(|&(n, v)| (v - n as f64 * s).powi(2))
        .sum();
    let dof = (labelled.len() as f64 - 1.0).max(1.0);
    let sigma = (ss / dof / nn).sqrt();
    (s, sigma, (ss / labelled.len() as f64).sqrt())
}

/// Runs both stages. `lz_runs` holds `(sweep_rate in V/ns, survival)`.
pub fn extract_delta(
    scan: &ScanResult,
    lz_runs: &[(f64, f64)],
    peak_opts: &PeakOptions,
) -> Result<DeltaExtraction> {
    if !(scan.frequency > 0.0) {
        return Err(fail("scan", "scan carries no drive frequency"));
    }
    let raw: Vec<f64> = scan.peaks(peak_opts).iter().map(|p| p.v).collect();
    let labelled = assign_harmonics(&raw)?;
    let comb: Vec<(i32, f64)> = labelled.iter().copied().filter(|&(n, _)| n != 0).collect();
    let positive = comb.iter().filter(|&&(n, _)| n > 0).count();
    let negative = comb.iter().filter(|&&(n, _)| n < 0).count();
    if positive < 2 || negative < 2 {
        return Err(fail(
            "peaks",
            format!("need >= 2 resonances on each side, found {positive} positive and {negative} negative"),
        ));
    }
    let (spacing, spacing_sigma, residual) = fit_comb(&comb);
    let kappa = scan.frequency / spacing;
    let kappa_uncertainty = kappa * spacing_sigma / spacing;

    if lz_runs.is_empty() {
        return Err(fail("lz", "no LZ runs supplied"));
    }
    let mut runs = Vec::with_capacity(lz_runs.len());
    for &(rate, survival) in lz_runs {
        if !(survival > 0.0 && survival < 1.0)
            || survival <= f64::EPSILON
            || 1.0 - survival <= f64::EPSILON
        {
            return Err(fail(
                "lz",
                format!("survival {survival} at rate {rate} V/ns is not resolvable inside (0, 1)"),
            ));
        }
        let delta = analytic::delta_from_survival(survival, kappa * rate)
            .map_err(|e| fail("lz", e.to_string()))?;
        runs.push((rate, survival, delta));
    }
    let m = runs.len() as f64;
    let delta = runs.iter().map(|r| r.2).sum::<f64>() / m;
    let spread = if runs.len() > 1 {
        (runs.iter().map(|r| (r.2 - delta).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    // Δ ∝ √κ, so the comb contributes half its relative error
    let from_kappa = 0.5 * delta * kappa_uncertainty / kappa;
    let delta_uncertainty = (spread * spread / m + from_kappa * from_kappa).sqrt();

    Ok(DeltaExtraction {
        kappa,
        kappa_uncertainty,
        peaks: comb,
        fit_residual: residual,
        runs,
        delta,
        delta_uncertainty,
    })
}
