//! Parameter sweeps and random-start basin sampling.
//!
//! Rows and starts are independent runs; they are computed in parallel and
//! returned in input order.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, StrategyProfile};
use crate::iteration::{derive_seed, run, seeded_random_profile, trajectory_distances, RunConfig};
use crate::matching::UpdateRule;
use crate::oracle::{nearest_equilibrium, support_enumeration, EquilibriumSet, MAX_STRATEGIES};

/// Default overall regret sum below which a run counts as converged.
pub const DEFAULT_EPS_CONV: f64 = 1e-3;
/// Tolerance used when the basin sampler consults the equilibrium oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

/// Maps player `i`'s payoffs `x -> scales[i] * x + offsets[i]`.
pub fn affine_transform(game: &Game, scales: &[f64], offsets: &[f64]) -> Result<Game> {
    let n = game.num_players();
    if scales.len() != n || offsets.len() != n {
        return Err(Error::Shape(format!(
            "{} scales and {} offsets for a {n}-player game",
            scales.len(),
            offsets.len()
        )));
    }
    if let Some(a) = scales.iter().find(|&&a| !(a.is_finite() && a > 0.0)) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {a}")));
    }
    if let Some(b) = offsets.iter().find(|b| !b.is_finite()) {
        return Err(Error::InvalidParameter(format!("offset must be finite, got {b}")));
    }
    game.map_payoffs(|i, x| scales[i] * x + offsets[i])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// Swept parameter values for this row (one per swept parameter).
    pub params: Vec<f64>,
    pub best_regret_sums: Vec<f64>,
    pub best_total: f64,
    pub best_step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub param_names: Vec<String>,
    pub rows: Vec<SweepRow>,
}

fn check_positive_list(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} list is empty")));
    }
    if let Some(v) = values.iter().find(|&&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// One run per rate, the rate shared by all players.
pub fn sweep_rates(game: &Game, initial: &StrategyProfile, rates: &[f64], iterations: usize) -> Result<SweepResult> {
    check_positive_list("rate", rates)?;
    let rows = rates
        .par_iter()
        .map(|&r| {
            let config = RunConfig::with_rate(game.num_players(), r, iterations)?;
            let trace = run(game, initial, &config)?;
            Ok(SweepRow {
                params: vec![r],
                best_total: trace.best_total(),
                best_regret_sums: trace.best_regret_sums,
                best_step: trace.best_step,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        param_names: vec!["rate".into()],
        rows,
    })
}

/// One run per scale `a` on the game with every payoff multiplied by `a`;
/// stored regret sums are multiplied back by `1/a`.
pub fn sweep_scales(
    game: &Game,
    initial: &StrategyProfile,
    scales: &[f64],
    iterations: usize,
    rate: f64,
) -> Result<SweepResult> {
    check_positive_list("scale", scales)?;
    let n = game.num_players();
    let config = RunConfig::with_rate(n, rate, iterations)?;
    let rows = scales
        .par_iter()
        .map(|&a| {
            let scaled = affine_transform(game, &vec![a; n], &vec![0.0; n])?;
            let trace = run(&scaled, initial, &config)?;
            let inv = 1.0 / a;
            let best_regret_sums: Vec<f64> = trace.best_regret_sums.iter().map(|x| x * inv).collect();
            Ok(SweepRow {
                params: vec![a],
                best_total: best_regret_sums.iter().sum(),
                best_regret_sums,
                best_step: trace.best_step,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        param_names: vec!["scale".into()],
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceSummary {
    pub initial: f64,
    pub minimum: f64,
    pub final_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinEntry {
    /// Seed of the start, reproducible through `seeded_random_profile`;
    /// `None` for explicitly supplied starts.
    pub seed: Option<u64>,
    pub initial: StrategyProfile,
    pub converged: bool,
    pub best_total: f64,
    pub best_step: usize,
    /// Equilibrium closest to the best profile, with its distance.
    pub nearest: Option<(usize, f64)>,
    /// Distances from the recorded trajectory to that same equilibrium.
    pub distances: Option<DistanceSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinReport {
    pub eps_conv: f64,
    pub equilibria: Option<EquilibriumSet>,
    pub entries: Vec<BasinEntry>,
}

impl BasinReport {
    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(|e| e.converged)
    }

    pub fn num_converged(&self) -> usize {
        self.entries.iter().filter(|e| e.converged).count()
    }
}

/// Equilibria used for labeling, when the oracle applies to this game.
fn oracle_for(game: &Game) -> Result<Option<EquilibriumSet>> {
    let small = game.num_players() == 2 && game.shape().iter().all(|&g| g <= MAX_STRATEGIES);
    if !small {
        return Ok(None);
    }
    let set = support_enumeration(game, ORACLE_TOLERANCE)?;
    Ok((!set.equilibria.is_empty()).then_some(set))
}

/// Runs from `num_starts` random profiles; start `i` uses seed
/// `derive_seed(seed, i)`.
pub fn basin_sample(
    game: &Game,
    num_starts: usize,
    seed: u64,
    config: &RunConfig,
    eps_conv: f64,
) -> Result<BasinReport> {
    if num_starts == 0 {
        return Err(Error::InvalidParameter("at least one start is required".into()));
    }
    let starts = (0..num_starts as u64)
        .map(|i| {
            let s = derive_seed(seed, i);
            (Some(s), seeded_random_profile(game.shape(), s))
        })
        .collect();
    basin_from(game, starts, config, eps_conv)
}

/// Like [`basin_sample`] but from caller-supplied starts.
pub fn basin_from_starts(
    game: &Game,
    starts: &[StrategyProfile],
    config: &RunConfig,
    eps_conv: f64,
) -> Result<BasinReport> {
    if starts.is_empty() {
        return Err(Error::InvalidParameter("at least one start is required".into()));
    }
    basin_from(
        game,
        starts.iter().map(|p| (None, p.clone())).collect(),
        config,
        eps_conv,
    )
}

fn basin_from(
    game: &Game,
    starts: Vec<(Option<u64>, StrategyProfile)>,
    config: &RunConfig,
    eps_conv: f64,
) -> Result<BasinReport> {
    if !(eps_conv.is_finite() && eps_conv > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "convergence threshold must be positive, got {eps_conv}"
        )));
    }
    config.validate(game)?;
    let equilibria = oracle_for(game)?;
    let entries = starts
        .into_par_iter()
        .map(|(seed, initial)| {
            let trace = run(game, &initial, config)?;
            let best_total = trace.best_total();
            let (nearest, distances) = match &equilibria {
                Some(set) => {
                    let (index, dist) = nearest_equilibrium(&trace.best_profile, set)?;
                    let d = trajectory_distances(&trace, &set.equilibria[index])?;
                    let summary = DistanceSummary {
                        initial: d[0],
                        minimum: d.iter().copied().fold(f64::INFINITY, f64::min),
                        final_distance: *d.last().expect("non-empty trace"),
                    };
                    (Some((index, dist)), Some(summary))
                }
                None => (None, None),
            };
            Ok(BasinEntry {
                seed,
                initial,
                converged: best_total < eps_conv,
                best_total,
                best_step: trace.best_step,
                nearest,
                distances,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasinReport {
        eps_conv,
        equilibria,
        entries,
    })
}

/// Convenience for sweeps and basins driven by a non-standard rule.
pub fn uniform_rules(rule: UpdateRule, num_players: usize) -> Vec<UpdateRule> {
    vec![rule; num_players]
}
