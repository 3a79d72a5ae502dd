//! Metric-space diagnostics on sequences of strategy profiles.
//!
//! Two metrics on the product of simplices are provided: the sum and the
//! maximum over players of the per-player L2 distance. From a profile
//! sequence `S_0, S_1, ...` we derive the step lengths
//! `d_dot[t] = d(S_t, S_{t+1})` and their ratios
//! `q_dot[t] = d_dot[t+1] / d_dot[t]`; a contractive sequence has every
//! ratio below one.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::StrategyProfile;
use crate::matching::l2_norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Sum,
    Max,
}

fn per_player_distances(x: &StrategyProfile, y: &StrategyProfile) -> Result<Vec<f64>> {
    if x.shape() != y.shape() {
        return Err(Error::Shape(format!(
            "profiles of shape {:?} and {:?}",
            x.shape(),
            y.shape()
        )));
    }
    Ok(x.strategies()
        .iter()
        .zip(y.strategies())
        .map(|(a, b)| {
            let diff: Vec<f64> = a.weights().iter().zip(b.weights()).map(|(p, q)| p - q).collect();
            l2_norm(&diff)
        })
        .collect())
}

/// Sum over players of the L2 distance between their strategies.
pub fn profile_distance_sum(x: &StrategyProfile, y: &StrategyProfile) -> Result<f64> {
    Ok(per_player_distances(x, y)?.iter().sum())
}

/// Maximum over players of the L2 distance between their strategies.
pub fn profile_distance_max(x: &StrategyProfile, y: &StrategyProfile) -> Result<f64> {
    Ok(per_player_distances(x, y)?.into_iter().fold(0.0, f64::max))
}

pub fn profile_distance(kind: MetricKind, x: &StrategyProfile, y: &StrategyProfile) -> Result<f64> {
    match kind {
        MetricKind::Sum => profile_distance_sum(x, y),
        MetricKind::Max => profile_distance_max(x, y),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricTrace {
    /// Successive step lengths, one fewer than the number of profiles.
    pub d_dot: Vec<f64>,
    /// Ratios of successive step lengths; NaN where the earlier step is zero.
    pub q_dot: Vec<f64>,
    pub metric_kind: MetricKind,
}

/// Step lengths and their ratios over a profile sequence of length >= 3.
pub fn metric_trace(profiles: &[StrategyProfile], kind: MetricKind) -> Result<MetricTrace> {
    if profiles.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "metric trace needs at least 3 profiles, got {}",
            profiles.len()
        )));
    }
    let d_dot = profiles
        .windows(2)
        .map(|w| profile_distance(kind, &w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    let q_dot = d_dot
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { f64::NAN })
        .collect();
    Ok(MetricTrace {
        d_dot,
        q_dot,
        metric_kind: kind,
    })
}

/// Minimum length accepted by [`periodicity_estimate`].
pub const MIN_PERIODICITY_LEN: usize = 16;
/// Autocorrelation a peak must exceed to count as a period.
pub const PERIODICITY_THRESHOLD: f64 = 0.5;

/// Lag of the highest autocorrelation peak of the linearly detrended series,
/// if that correlation exceeds [`PERIODICITY_THRESHOLD`]. Lags up to half the
/// series length are considered; a peak is a local maximum of the
/// autocorrelation function.
pub fn periodicity_estimate(series: &[f64]) -> Result<Option<usize>> {
    let n = series.len();
    if n < MIN_PERIODICITY_LEN {
        return Err(Error::InsufficientData(format!(
            "periodicity needs at least {MIN_PERIODICITY_LEN} samples, got {n}"
        )));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("series contains non-finite values".into()));
    }
    let residual = detrend(series);
    let energy: f64 = residual.iter().map(|x| x * x).sum();
    let scale = series
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    if energy <= (1e-12 * scale).powi(2) * n as f64 {
        return Ok(None);
    }
    let max_lag = n / 2;
    let acf: Vec<f64> = (0..=max_lag)
        .map(|lag| {
            residual[..n - lag]
                .iter()
                .zip(&residual[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / energy
        })
        .collect();
    let best = (1..max_lag)
        .filter(|&k| acf[k] > acf[k - 1] && acf[k] >= acf[k + 1])
        .max_by(|&a, &b| acf[a].total_cmp(&acf[b]).then(b.cmp(&a)));
    Ok(best.filter(|&k| acf[k] > PERIODICITY_THRESHOLD))
}

/// Residual of an ordinary least-squares line fit against the sample index.
fn detrend(series: &[f64]) -> Vec<f64> {
    let n = series.len() as f64;
    let t_mean = (n - 1.0) / 2.0;
    let y_mean = series.iter().sum::<f64>() / n;
    let (mut sty, mut stt) = (0.0, 0.0);
    for (t, y) in series.iter().enumerate() {
        let dt = t as f64 - t_mean;
        sty += dt * (y - y_mean);
        stt += dt * dt;
    }
    let slope = sty / stt;
    series
        .iter()
        .enumerate()
        .map(|(t, y)| y - y_mean - slope * (t as f64 - t_mean))
        .collect()
}
