//! Reference Nash equilibria for small two-player games by support enumeration.
//!
//! For every pair of equal-size supports the two indifference systems are
//! solved; a solution is kept when its weights are non-negative and no pure
//! strategy outside the support pays more. Degenerate games can have
//! equilibria with unequal support sizes or whole continua of equilibria;
//! those are reported through representative points only, and the
//! `degenerate` flag is raised when a found equilibrium has more pure best
//! responses than the opponent's support size.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{regret_report, vertex_payoffs, Game, MixedStrategy, StrategyProfile};
use crate::metrics::profile_distance_sum;

/// Largest strategy count per player accepted by [`support_enumeration`].
pub const MAX_STRATEGIES: usize = 10;
/// Two equilibria closer than this (max-norm) are the same point.
pub const DEDUP_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSet {
    pub equilibria: Vec<StrategyProfile>,
    pub method: &'static str,
    pub tolerance: f64,
    pub degenerate: bool,
}

/// Iterates over the `size`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            if n - i < size - current.len() {
                break;
            }
            current.push(i);
            rec(i + 1, n, size, current, out);
            current.pop();
        }
    }
    rec(0, n, size, &mut current, &mut out);
    out
}

/// Mixed strategy over `mix_support` (of an opponent with `mix_len`
/// strategies) that makes every strategy in `indifferent` earn the same
/// payoff, where `payoff(i, j)` is the payoff of own strategy `i` against
/// opponent strategy `j`.
fn solve_indifference(
    indifferent: &[usize],
    mix_support: &[usize],
    mix_len: usize,
    payoff: impl Fn(usize, usize) -> f64,
) -> Option<Vec<f64>> {
    let s = mix_support.len();
    let mut mat = DMatrix::<f64>::zeros(s + 1, s + 1);
    let mut rhs = DVector::<f64>::zeros(s + 1);
    for (r, &i) in indifferent.iter().enumerate() {
        for (c, &j) in mix_support.iter().enumerate() {
            mat[(r, c)] = payoff(i, j);
        }
        mat[(r, s)] = -1.0;
    }
    for c in 0..s {
        mat[(s, c)] = 1.0;
    }
    rhs[s] = 1.0;
    let sol = mat.lu().solve(&rhs)?;
    if sol.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let mut full = vec![0.0; mix_len];
    for (c, &j) in mix_support.iter().enumerate() {
        full[j] = sol[c];
    }
    Some(full)
}

fn to_strategy(weights: Vec<f64>, tolerance: f64) -> Option<MixedStrategy> {
    if weights.iter().any(|&w| w < -tolerance) {
        return None;
    }
    MixedStrategy::normalized(weights).ok()
}

/// All equilibria of a two-player game with at most [`MAX_STRATEGIES`]
/// strategies per player, up to degeneracy.
pub fn support_enumeration(game: &Game, tolerance: f64) -> Result<EquilibriumSet> {
    if game.num_players() != 2 {
        return Err(Error::InvalidParameter(format!(
            "support enumeration needs a two-player game, got {} players",
            game.num_players()
        )));
    }
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let (k, m) = (game.shape()[0], game.shape()[1]);
    if k > MAX_STRATEGIES || m > MAX_STRATEGIES {
        return Err(Error::TooLarge(format!(
            "{k}x{m} game, at most {MAX_STRATEGIES} strategies per player"
        )));
    }
    let a = |i: usize, j: usize| game.payoff_at(0, &[i, j]);
    let b = |i: usize, j: usize| game.payoff_at(1, &[i, j]);

    let mut equilibria: Vec<StrategyProfile> = Vec::new();
    let mut degenerate = false;
    for size in 1..=k.min(m) {
        for rows in combinations(k, size) {
            for cols in combinations(m, size) {
                // column mix keeps the row player indifferent over `rows`
                let Some(y) = solve_indifference(&rows, &cols, m, a) else {
                    continue;
                };
                // row mix keeps the column player indifferent over `cols`
                let Some(x) = solve_indifference(&cols, &rows, k, |j, i| b(i, j)) else {
                    continue;
                };
                let (Some(x), Some(y)) = (to_strategy(x, tolerance), to_strategy(y, tolerance)) else {
                    continue;
                };
                let profile = StrategyProfile::new(vec![x, y]);
                if regret_report(game, &profile)?.max_regret_sum() > tolerance {
                    continue;
                }
                let duplicate = equilibria.iter().any(|e| max_abs_diff(e, &profile) < DEDUP_TOLERANCE);
                if !duplicate {
                    degenerate |= has_excess_best_responses(game, &profile, tolerance)?;
                    equilibria.push(profile);
                }
            }
        }
    }
    Ok(EquilibriumSet {
        equilibria,
        method: "support-enumeration",
        tolerance,
        degenerate,
    })
}

fn max_abs_diff(x: &StrategyProfile, y: &StrategyProfile) -> f64 {
    x.strategies()
        .iter()
        .zip(y.strategies())
        .flat_map(|(a, b)| a.weights().iter().zip(b.weights()).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

fn has_excess_best_responses(game: &Game, profile: &StrategyProfile, tolerance: f64) -> Result<bool> {
    for player in 0..2 {
        let v = vertex_payoffs(game, profile, player)?;
        let best = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let responses = v.iter().filter(|&&x| x >= best - tolerance).count();
        let opponent_support = profile.strategy(1 - player).support(tolerance).len();
        if responses > opponent_support {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Index of and sum-metric distance to the closest equilibrium; ties go to
/// the lower index.
pub fn nearest_equilibrium(profile: &StrategyProfile, set: &EquilibriumSet) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, eq) in set.equilibria.iter().enumerate() {
        let d = profile_distance_sum(profile, eq)?;
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.ok_or_else(|| Error::InsufficientData("equilibrium set is empty".into()))
}
