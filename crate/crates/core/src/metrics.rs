//! Oscillation-growth metrics.
//!
//! Metric 1 follows one vehicle over a time window (open-road platoons);
//! metric 2 looks across the whole fleet at each instant (ring roads). Both
//! use the sample standard deviation with an `n - 1` denominator.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::RunRecord;

/// Closed time interval, s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
}

impl TimeWindow {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    /// Skip the time the leader's signal needs to cross the platoon once,
    /// `N * dt`, then cover the rest of the record.
    pub fn after_warm_up(record: &RunRecord) -> Self {
        Self::new(record.n_vehicles() as f64 * record.dt, record.duration())
    }

    /// Sample indices of `record` inside the window.
    pub fn samples(&self, dt: f64, n_samples: usize) -> RangeInclusive<usize> {
        let first = (self.start / dt - 1e-9).ceil().max(0.0) as usize;
        let last = ((self.end / dt + 1e-9).floor().max(0.0) as usize).min(n_samples.saturating_sub(1));
        first..=last
    }
}

/// Per-vehicle speed standard deviation over a window, vehicles numbered 1..N.
#[derive(Debug, Clone, PartialEq)]
pub struct PerVehicleStdCurve {
    pub values: Vec<f64>,
    pub window: TimeWindow,
}

impl PerVehicleStdCurve {
    /// Value for platoon position `n` (1-based).
    pub fn at(&self, n: usize) -> f64 {
        self.values[n - 1]
    }
}

/// Cross-fleet speed standard deviation at every recorded instant.
#[derive(Debug, Clone, PartialEq)]
pub struct OverTimeStdCurve {
    pub values: Vec<f64>,
    pub dt: f64,
}

impl OverTimeStdCurve {
    /// Mean of the curve over its last `duration` seconds.
    pub fn tail_mean(&self, duration: f64) -> f64 {
        tail_mean(&self.values, self.dt, duration)
    }
}

/// Sample standard deviation (`n - 1` denominator). `None` for fewer than two values.
pub fn sample_std(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    // Welford
    let mut n = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for x in values {
        n += 1;
        let delta = x - mean;
        mean += delta / n as f64;
        m2 += delta * (x - mean);
    }
    (n >= 2).then(|| (m2 / (n - 1) as f64).max(0.0).sqrt())
}

pub fn per_vehicle_std(record: &RunRecord, window: TimeWindow) -> Result<PerVehicleStdCurve> {
    let samples = window.samples(record.dt, record.n_samples());
    if window.start > window.end || window.end > record.duration() + 1e-9 {
        return Err(Error::Metric(format!(
            "window [{}, {}] s is outside the record [0, {}] s",
            window.start,
            window.end,
            record.duration()
        )));
    }
    if samples.clone().count() < 2 {
        return Err(Error::Metric(format!(
            "window [{}, {}] s holds fewer than two samples",
            window.start, window.end
        )));
    }
    let values = (0..record.n_vehicles())
        .map(|v| {
            let series = samples.clone().map(|k| record.speed(k, v));
            sample_std(series).expect("window holds at least two samples")
        })
        .collect();
    Ok(PerVehicleStdCurve { values, window })
}

pub fn over_time_std(record: &RunRecord) -> Result<OverTimeStdCurve> {
    if record.n_vehicles() < 2 {
        return Err(Error::Metric(
            "cross-vehicle deviation needs at least two vehicles".into(),
        ));
    }
    let values = (0..record.n_samples())
        .map(|k| sample_std(record.speed_row(k).iter().copied()).expect("two or more vehicles"))
        .collect();
    Ok(OverTimeStdCurve { values, dt: record.dt })
}

/// Percentage by which `treated` lies below `baseline`.
pub fn reduction_pct(baseline: f64, treated: f64) -> Result<f64> {
    if baseline.is_nan() || baseline <= 0.0 {
        return Err(Error::Metric(format!(
            "reduction relative to a baseline of {baseline} is undefined"
        )));
    }
    Ok(100.0 * (baseline - treated) / baseline)
}

/// Least-squares slope of `ln(value)` against `ln(n)` for vehicle numbers
/// `n` in `fit_range` (1-based, inclusive).
pub fn growth_exponent(values: &[f64], fit_range: RangeInclusive<usize>) -> Result<f64> {
    let (lo, hi) = (*fit_range.start(), *fit_range.end());
    if lo == 0 || hi > values.len() || hi < lo || hi - lo + 1 < 5 {
        return Err(Error::Metric(format!(
            "fit range {lo}..={hi} must hold at least 5 vehicles within 1..={}",
            values.len()
        )));
    }
    let points: Vec<(f64, f64)> = fit_range
        .map(|n| {
            let v = values[n - 1];
            if v > 0.0 && v.is_finite() {
                Ok(((n as f64).ln(), v.ln()))
            } else {
                Err(Error::Metric(format!("vehicle {n} has non-positive value {v}")))
            }
        })
        .collect::<Result<_>>()?;
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(x, y)| {
        (sxy + (x - mean_x) * (y - mean_y), sxx + (x - mean_x).powi(2))
    });
    Ok(sxy / sxx)
}

/// Mean over the samples that fall in the last `duration` seconds.
pub fn tail_mean(values: &[f64], dt: f64, duration: f64) -> f64 {
    let count = ((duration / dt + 1e-9).floor() as usize + 1).min(values.len());
    let tail = &values[values.len() - count..];
    tail.iter().sum::<f64>() / tail.len() as f64
}
