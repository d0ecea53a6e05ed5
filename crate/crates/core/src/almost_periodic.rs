//! Scan-based detection of epsilon-almost periods in sampled vector signals,
//! and an operational certificate of asymptotic almost periodicity.

use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Default tolerance ladder reported together.
pub const EPSILON_LADDER: [f64; 3] = [0.2, 0.1, 0.05];

/// A vector-valued signal sampled at `t0 + i dt`.
#[derive(Clone, Debug)]
pub struct SampledSignal {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<Vec<f64>>,
}

impl SampledSignal {
    pub fn new(t0: f64, dt: f64, values: Vec<Vec<f64>>) -> Self {
        Self { t0, dt, values }
    }

    /// Samples `f` at `count` uniform times.
    pub fn from_fn(t0: f64, dt: f64, count: usize, f: impl Fn(f64) -> Vec<f64>) -> Self {
        Self::new(t0, dt, (0..count).map(|i| f(t0 + i as f64 * dt)).collect())
    }

    pub fn scalar(t0: f64, dt: f64, count: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(t0, dt, count, |t| vec![f(t)])
    }

    /// Time span covered by the samples.
    pub fn window(&self) -> f64 {
        self.values.len().saturating_sub(1) as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.window()
    }

    /// The samples with `t >= cut`.
    pub fn tail_from(&self, cut: f64) -> SampledSignal {
        let start = (((cut - self.t0) / self.dt) - 1e-9).ceil().max(0.0) as usize;
        let start = start.min(self.values.len());
        SampledSignal::new(self.t0 + start as f64 * self.dt, self.dt, self.values[start..].to_vec())
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `sup_i |f(i + shift) - f(i)|` over `i` in `range`, stopping once `cap` is reached.
fn shift_defect(values: &[Vec<f64>], shift: usize, range: std::ops::Range<usize>, cap: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in range {
        worst = worst.max(distance(&values[i + shift], &values[i]));
        if worst >= cap {
            break;
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct AlmostPeriodReport {
    pub epsilon: f64,
    pub scan_max: f64,
    pub scan_dt: f64,
    /// Every scanned shift whose sup defect is below epsilon.
    pub periods: Vec<f64>,
    /// One shift per contiguous run of qualifying shifts, the one with least defect.
    pub representatives: Vec<f64>,
    /// Largest gap between consecutive representatives, including the gap to the scan end.
    pub max_gap: f64,
    /// Smallest gap between consecutive representatives.
    pub min_gap: f64,
    pub relatively_dense: bool,
    /// Best nonzero shift and its defect over the whole window.
    pub best_period: f64,
    pub sup_defect: f64,
}

/// Gap rule for relative density: the largest gap may be at most this multiple of the smallest.
pub const DENSITY_GAP_FACTOR: f64 = 3.0;

/// Finds every shift `T = m dt <= scan_max` with `sup_t |f(t+T) - f(t)| < epsilon`.
///
/// The distance between samples is the l1 norm of their difference. The window must be
/// at least `4 scan_max` long.
pub fn find_almost_periods(signal: &SampledSignal, epsilon: f64, scan_max: f64) -> Result<AlmostPeriodReport> {
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
    }
    let window = signal.window();
    if window < 4.0 * scan_max * (1.0 - 1e-12) || signal.values.len() < 2 {
        return Err(Error::WindowTooShort { needed: 4.0 * scan_max, have: window });
    }
    let n = signal.values.len();
    let max_shift = ((scan_max / signal.dt) + 1e-9).floor() as usize;
    let defects: Vec<f64> = (0..=max_shift)
        .into_par_iter()
        .map(|m| shift_defect(&signal.values, m, 0..n - m, epsilon))
        .collect();
    let qualifies: Vec<bool> = defects.iter().map(|d| *d < epsilon).collect();
    let periods: Vec<f64> = (0..=max_shift).filter(|m| qualifies[*m]).map(|m| m as f64 * signal.dt).collect();

    let mut reps = Vec::new();
    let mut m = 0;
    while m <= max_shift {
        if !qualifies[m] {
            m += 1;
            continue;
        }
        let mut best = m;
        while m <= max_shift && qualifies[m] {
            if defects[m] < defects[best] {
                best = m;
            }
            m += 1;
        }
        // The run through zero is represented by zero itself.
        reps.push(if reps.is_empty() && qualifies[0] { 0 } else { best });
    }
    let rep_t: Vec<f64> = reps.iter().map(|m| *m as f64 * signal.dt).collect();
    let all = qualifies.iter().all(|q| *q);
    let mut gaps: Vec<f64> = rep_t.windows(2).map(|w| w[1] - w[0]).collect();
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    if let Some(last) = rep_t.last() {
        gaps.push(max_shift as f64 * signal.dt - last);
    }
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let relatively_dense = all || (reps.len() >= 3 && max_gap <= DENSITY_GAP_FACTOR * min_gap);

    // Best nonzero shift: least defect outside the run through zero.
    let first_nonzero = if all { 1 } else { (0..=max_shift).find(|m| !qualifies[*m]).unwrap_or(1) };
    let (best_m, sup_defect) = (first_nonzero.max(1)..=max_shift)
        .map(|m| (m, if qualifies[m] { defects[m] } else { f64::INFINITY }))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let (best_period, sup_defect) = if sup_defect.is_finite() {
        (best_m as f64 * signal.dt, sup_defect)
    } else {
        (0.0, defects.get(1).copied().unwrap_or(0.0))
    };

    Ok(AlmostPeriodReport {
        epsilon,
        scan_max,
        scan_dt: signal.dt,
        periods,
        representatives: rep_t,
        max_gap,
        min_gap: if min_gap.is_finite() { min_gap } else { 0.0 },
        relatively_dense,
        best_period,
        sup_defect,
    })
}

/// Number of successive late subwindows compared by the growth test.
pub const GROWTH_CHUNKS: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct AapReport {
    pub epsilon: f64,
    pub transient_cut: f64,
    /// Largest l1 sample size on the tail window, for reading `epsilon` against.
    pub signal_scale: f64,
    pub is_aap: bool,
    pub periods: AlmostPeriodReport,
    /// Defect at the best period on successive late subwindows.
    pub window_defects: Vec<f64>,
    pub defect_grows: bool,
}

/// Certifies asymptotic almost periodicity operationally.
///
/// The tail `[transient_cut, end]` is scanned up to a quarter of its length. The
/// signal passes when the qualifying shifts are relatively dense and the defect at
/// the best shift does not grow across successive subwindows by more than `epsilon/2`.
pub fn verify_aap(signal: &SampledSignal, epsilon: f64, transient_cut: f64) -> Result<AapReport> {
    if signal.end() < 2.0 * transient_cut {
        return Err(Error::WindowTooShort { needed: 2.0 * transient_cut, have: signal.end() });
    }
    let tail = signal.tail_from(transient_cut);
    let scan_max = tail.window() / 4.0;
    let periods = find_almost_periods(&tail, epsilon, scan_max)?;

    let shift = ((periods.best_period.max(tail.dt) / tail.dt).round() as usize).min(tail.values.len() - 1);
    let usable = tail.values.len() - shift;
    let chunk = (usable / GROWTH_CHUNKS).max(1);
    let window_defects: Vec<f64> = (0..GROWTH_CHUNKS)
        .map(|k| {
            let start = (k * chunk).min(usable);
            let end = if k + 1 == GROWTH_CHUNKS { usable } else { ((k + 1) * chunk).min(usable) };
            shift_defect(&tail.values, shift, start..end, f64::INFINITY)
        })
        .collect();
    let defect_grows = window_defects.last().unwrap() > &(window_defects[0] + 0.5 * epsilon);
    let signal_scale = tail.values.iter().map(|v| v.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    Ok(AapReport {
        epsilon,
        transient_cut,
        signal_scale,
        is_aap: periods.relatively_dense && !defect_grows,
        periods,
        window_defects,
        defect_grows,
    })
}
