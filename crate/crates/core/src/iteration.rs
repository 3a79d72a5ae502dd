//! Simultaneous fixed-point iteration of the regret-matching map.
//!
//! Every step evaluates all players' regret vectors at the same profile and
//! then updates all strategies at once. The run keeps the profile with the
//! smallest overall regret sum seen so far as the approximate equilibrium.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{regret_report, Game, MixedStrategy, RegretReport, StrategyProfile};
use crate::matching::{UpdateContext, UpdateRule};
use crate::metrics::profile_distance_sum;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// One rule per player.
    pub rules: Vec<UpdateRule>,
    /// Number of evaluated profiles (update steps), at least 1.
    pub iterations: usize,
    /// Stop once the overall regret sum is at or below this value.
    pub epsilon: Option<f64>,
    /// Record every `record_every`-th step; the final step is always recorded.
    pub record_every: usize,
}

impl RunConfig {
    pub fn new(rules: Vec<UpdateRule>, iterations: usize) -> Self {
        RunConfig {
            rules,
            iterations,
            epsilon: None,
            record_every: 1,
        }
    }

    /// The standard rule with rate `rate` for each of `num_players` players.
    pub fn with_rate(num_players: usize, rate: f64, iterations: usize) -> Result<Self> {
        let rule = UpdateRule::standard(rate)?;
        Ok(RunConfig::new(vec![rule; num_players], iterations))
    }

    pub fn epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn record_every(mut self, stride: usize) -> Self {
        self.record_every = stride;
        self
    }

    pub fn validate(&self, game: &Game) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record stride must be at least 1".into()));
        }
        if let Some(eps) = self.epsilon {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::InvalidParameter(format!("epsilon must be positive, got {eps}")));
            }
        }
        check_rules(game, &self.rules)
    }
}

fn check_rules(game: &Game, rules: &[UpdateRule]) -> Result<()> {
    if rules.len() != game.num_players() {
        return Err(Error::Shape(format!(
            "{} update rules for a {}-player game",
            rules.len(),
            game.num_players()
        )));
    }
    rules.iter().try_for_each(UpdateRule::validate)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    /// Step index of each recorded entry; step 0 is the initial profile.
    pub steps: Vec<usize>,
    pub profiles: Vec<StrategyProfile>,
    /// Per recorded step, each player's regret sum.
    pub regret_sums: Vec<Vec<f64>>,
    pub best_profile: StrategyProfile,
    pub best_regret_sums: Vec<f64>,
    pub best_step: usize,
    pub stopped_early: bool,
    /// Number of profiles evaluated.
    pub steps_run: usize,
}

impl IterationTrace {
    pub fn best_total(&self) -> f64 {
        self.best_regret_sums.iter().sum()
    }

    /// Overall regret sum of each recorded step.
    pub fn totals(&self) -> Vec<f64> {
        self.regret_sums.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn last_profile(&self) -> &StrategyProfile {
        self.profiles.last().expect("a trace records at least one step")
    }
}

/// Updates every player from the same `report` of `profile`.
fn advance(profile: &StrategyProfile, report: &RegretReport, rules: &[UpdateRule]) -> Result<StrategyProfile> {
    let total = report.total();
    let next = profile
        .strategies()
        .iter()
        .zip(&report.players)
        .zip(rules)
        .map(|((s, pr), rule)| {
            let ctx = UpdateContext {
                vertex_payoffs: &pr.vertex_payoffs,
                profile_regret_total: total,
            };
            rule.apply(s, &pr.regret_vector, &ctx).map_err(|e| match e {
                Error::InvalidStrategy(m) => Error::Numeric(m),
                other => other,
            })
        })
        .collect::<Result<Vec<MixedStrategy>>>()?;
    Ok(StrategyProfile::new(next))
}

/// One simultaneous update of all players.
pub fn step(game: &Game, profile: &StrategyProfile, rules: &[UpdateRule]) -> Result<StrategyProfile> {
    check_rules(game, rules)?;
    let report = regret_report(game, profile)?;
    advance(profile, &report, rules)
}

/// Iterates from `initial`, tracking the best profile by overall regret sum.
pub fn run(game: &Game, initial: &StrategyProfile, config: &RunConfig) -> Result<IterationTrace> {
    config.validate(game)?;
    game.check_profile(initial)?;

    let mut trace = IterationTrace {
        steps: Vec::new(),
        profiles: Vec::new(),
        regret_sums: Vec::new(),
        best_profile: initial.clone(),
        best_regret_sums: Vec::new(),
        best_step: 0,
        stopped_early: false,
        steps_run: 0,
    };
    let mut best_total = f64::INFINITY;
    let mut current = initial.clone();
    let last = config.iterations - 1;

    for t in 0..config.iterations {
        let report = regret_report(game, &current)?;
        let sums = report.regret_sums();
        let total = report.total();
        if !total.is_finite() {
            return Err(Error::Numeric(format!(
                "overall regret sum became non-finite at step {t}"
            )));
        }
        if total < best_total {
            best_total = total;
            trace.best_profile = current.clone();
            trace.best_regret_sums = sums.clone();
            trace.best_step = t;
        }
        let stop = config.epsilon.is_some_and(|eps| total <= eps);
        trace.steps_run = t + 1;
        if t % config.record_every == 0 || t == last || stop {
            trace.steps.push(t);
            trace.profiles.push(current.clone());
            trace.regret_sums.push(sums);
        }
        if stop {
            trace.stopped_early = true;
            break;
        }
        if t < last {
            current = advance(&current, &report, &config.rules)?;
        }
    }
    Ok(trace)
}

/// Sum-metric distance from each recorded profile to `reference`.
pub fn trajectory_distances(trace: &IterationTrace, reference: &StrategyProfile) -> Result<Vec<f64>> {
    trace
        .profiles
        .iter()
        .map(|p| profile_distance_sum(p, reference))
        .collect()
}

/// Uniformly distributed point on each player's simplex (normalized
/// exponential draws).
pub fn random_profile(shape: &[usize], rng: &mut impl Rng) -> StrategyProfile {
    let strategies = shape
        .iter()
        .map(|&g| {
            let w: Vec<f64> = (0..g).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            MixedStrategy::normalized(w).expect("exponential draws are positive")
        })
        .collect();
    StrategyProfile::new(strategies)
}

/// Random profile from a fresh generator seeded with `seed`.
pub fn seeded_random_profile(shape: &[usize], seed: u64) -> StrategyProfile {
    random_profile(shape, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Independent per-item seed derived from a base seed (SplitMix64 finalizer).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
