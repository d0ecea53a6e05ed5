//! Exponential stability experiments: two nonlinear solutions from nearby
//! initial data, their three-norm distance per node, and a log-linear fit of
//! `distance(t) <= D e^{-sigma t} |initial difference|`.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::forcing::ForcingSpec;
use crate::mild_solver::{
    picard_solve, state_norm, PicardDiagnostics, SolverConfig, SolverConstants, TrajectoryState,
};
use serde::Serialize;

/// Recommended largest perturbation size as a fraction of the ball radius.
pub const PERTURBATION_FRACTION: f64 = 0.1;
/// Fit points must exceed this multiple of the Picard tolerance.
pub const NOISE_FLOOR_FACTOR: f64 = 1e3;
/// Largest RMS log residual for a passing fit.
pub const RESIDUAL_THRESHOLD: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub lambda1: f64,
    /// Decay rate `-slope`; absent when the fit window holds fewer than two points.
    pub sigma: Option<f64>,
    /// `exp(intercept) / |initial difference|`.
    pub d: Option<f64>,
    /// RMS of the log residuals on the fit window.
    pub residual: Option<f64>,
    pub initial_difference: f64,
    /// Whether the initial difference is at most `PERTURBATION_FRACTION` of the ball radius.
    pub perturbation_within_ball: bool,
    pub fit_window: (f64, f64),
    pub fit_points: usize,
    /// `0 < sigma < lambda1` and residual below threshold.
    pub pass: bool,
    /// Node times; written as CSV rather than JSON.
    #[serde(skip)]
    pub times: Vec<f64>,
    /// Three-norm distance per node.
    #[serde(skip)]
    pub distance: Vec<f64>,
}

/// Per-node `|du|_{p/2} + |dv|_{p/2} + |grad dv|_p`.
pub fn distance_series(a: &TrajectoryState, b: &TrajectoryState) -> Result<Vec<f64>> {
    Ok(a.difference(b)?.norms().iter().map(|n| n.total()).collect())
}

/// Least-squares fit of `log d` against `t`; returns `(slope, intercept, rms residual)`.
pub fn log_linear_fit(t: &[f64], d: &[f64]) -> Option<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = t.iter().zip(d).filter(|(_, d)| **d > 0.0).map(|(t, d)| (*t, d.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Some((slope, intercept, rms))
}

/// Fits the decay of a distance series on `[5/lambda1, T_end]`, cut where the
/// series first falls below `floor`.
pub fn fit_decay(times: &[f64], distance: &[f64], lambda1: f64, initial_difference: f64, floor: f64) -> StabilityReport {
    let start = 5.0 / lambda1;
    let mut end_idx = times.len();
    for (i, (&t, &d)) in times.iter().zip(distance).enumerate() {
        if t >= start && d <= floor {
            end_idx = i;
            break;
        }
    }
    let idx: Vec<usize> = (0..end_idx).filter(|&i| times[i] >= start * (1.0 - 1e-12)).collect();
    let (ft, fd): (Vec<f64>, Vec<f64>) = idx.iter().map(|&i| (times[i], distance[i])).unzip();
    let fit = log_linear_fit(&ft, &fd);
    let (sigma, d, residual) = match fit {
        Some((slope, intercept, rms)) => (Some(-slope), Some(intercept.exp() / initial_difference), Some(rms)),
        None => (None, None, None),
    };
    let pass = matches!((sigma, residual), (Some(s), Some(r)) if s > 0.0 && s < lambda1 * (1.0 + 1e-9) && r <= RESIDUAL_THRESHOLD);
    StabilityReport {
        lambda1,
        sigma,
        d,
        residual,
        initial_difference,
        perturbation_within_ball: true,
        fit_window: (ft.first().copied().unwrap_or(start), ft.last().copied().unwrap_or(start)),
        fit_points: ft.len(),
        pass,
        times: times.to_vec(),
        distance: distance.to_vec(),
    }
}

/// Result of [`stability_experiment`] with both solves kept for further checks.
#[derive(Clone, Debug)]
pub struct StabilityRun {
    pub report: StabilityReport,
    pub base: TrajectoryState,
    pub perturbed: TrajectoryState,
    pub base_diagnostics: PicardDiagnostics,
    pub perturbed_diagnostics: PicardDiagnostics,
}

/// Solves from `(u0, v0)` and from `(u0 + du0, v0 + dv0)` and fits the decay of
/// their distance.
pub fn stability_experiment(
    u0: &ScalarField,
    v0: &ScalarField,
    perturbation: (&ScalarField, &ScalarField),
    forcing: &ForcingSpec,
    config: &SolverConfig,
    constants: &SolverConstants,
) -> Result<StabilityRun> {
    let (du, dv) = perturbation;
    if du.values().iter().chain(dv.values()).all(|v| *v == 0.0) {
        return Err(Error::DegenerateDistance);
    }
    let initial_difference = state_norm(du, dv, config.p)?;
    let (u1, v1) = (u0.add(du)?, v0.add(dv)?);
    let (base, perturbed) = rayon::join(
        || picard_solve(u0, v0, forcing, config, constants),
        || picard_solve(&u1, &v1, forcing, config, constants),
    );
    let ((base, base_diagnostics), (perturbed, perturbed_diagnostics)) = (base?, perturbed?);

    // Both solutions lie in the larger ball. An oversized perturbation only
    // weakens the first-order picture, so it is flagged rather than rejected.
    let rho = base_diagnostics.gate.rho.max(perturbed_diagnostics.gate.rho);
    let within = initial_difference <= PERTURBATION_FRACTION * rho;
    if !within {
        log::warn!("perturbation size {initial_difference:e} exceeds {PERTURBATION_FRACTION} rho = {rho:e}");
    }

    let distance = distance_series(&base, &perturbed)?;
    if distance.iter().all(|d| *d == 0.0) {
        return Err(Error::DegenerateDistance);
    }
    let floor = NOISE_FLOOR_FACTOR * config.tolerance;
    let mut report = fit_decay(&base.grid().times(), &distance, constants.lambda1, initial_difference, floor);
    report.perturbation_within_ball = within;
    Ok(StabilityRun { report, base, perturbed, base_diagnostics, perturbed_diagnostics })
}
