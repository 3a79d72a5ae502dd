//! Finite n-person games in normal form, mixed strategies and regret measures.
//!
//! Payoff tensors are dense and stored row-major over the joint pure profile
//! `(j_1, ..., j_n)`: the last player's index varies fastest. Game files use
//! the same layout, so a flattened tensor is portable between tools.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest negative weight accepted (and clamped to zero) on construction.
pub const NEGATIVE_WEIGHT_TOLERANCE: f64 = 1e-9;
/// Largest deviation of the weight sum from one accepted before renormalizing.
pub const SUM_TOLERANCE: f64 = 1e-6;
/// Weights whose sum is this close to 1 are stored as given, so stored
/// strategies survive a write/read cycle bit for bit.
pub const UNIT_SUM_TOLERANCE: f64 = 1e-12;

/// A point on a probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    /// Validates and renormalizes a probability vector.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidStrategy("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidStrategy(format!("non-finite weight {w}")));
        }
        if let Some(w) = weights.iter().find(|&&w| w < -NEGATIVE_WEIGHT_TOLERANCE) {
            return Err(Error::InvalidStrategy(format!("negative weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidStrategy(format!("weights sum to {sum}, expected 1")));
        }
        Self::normalized(weights)
    }

    /// Clamps negatives to zero and rescales to unit sum. Used after updates
    /// that preserve the simplex analytically but not in floating point.
    pub(crate) fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        for w in weights.iter_mut() {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::InvalidStrategy(format!(
                "cannot normalize weights with sum {sum}"
            )));
        }
        if (sum - 1.0).abs() > UNIT_SUM_TOLERANCE {
            for w in weights.iter_mut() {
                *w /= sum;
            }
        }
        Ok(MixedStrategy(weights))
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "strategy needs at least one pure strategy");
        MixedStrategy(vec![1.0 / len as f64; len])
    }

    /// The pure strategy `index` as a simplex vertex.
    pub fn vertex(len: usize, index: usize) -> Self {
        assert!(index < len, "vertex {index} out of range for length {len}");
        let mut w = vec![0.0; len];
        w[index] = 1.0;
        MixedStrategy(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Indices with weight above `tolerance`.
    pub fn support(&self, tolerance: f64) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > tolerance)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// One mixed strategy per player.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct StrategyProfile(Vec<MixedStrategy>);

impl StrategyProfile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Self {
        StrategyProfile(strategies)
    }

    /// Builds a profile from raw weight vectors, validating each one.
    pub fn from_weights(weights: Vec<Vec<f64>>) -> Result<Self> {
        weights
            .into_iter()
            .map(MixedStrategy::new)
            .collect::<Result<Vec<_>>>()
            .map(StrategyProfile)
    }

    pub fn uniform(shape: &[usize]) -> Self {
        StrategyProfile(shape.iter().map(|&g| MixedStrategy::uniform(g)).collect())
    }

    /// The pure profile `indices`.
    pub fn pure(shape: &[usize], indices: &[usize]) -> Self {
        assert_eq!(shape.len(), indices.len());
        StrategyProfile(
            shape
                .iter()
                .zip(indices)
                .map(|(&g, &j)| MixedStrategy::vertex(g, j))
                .collect(),
        )
    }

    pub fn strategies(&self) -> &[MixedStrategy] {
        &self.0
    }

    pub fn strategy(&self, player: usize) -> &MixedStrategy {
        &self.0[player]
    }

    pub fn num_players(&self) -> usize {
        self.0.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.0.iter().map(MixedStrategy::len).collect()
    }

    /// Replaces player `player`'s strategy, leaving the others untouched.
    pub fn with_strategy(&self, player: usize, strategy: MixedStrategy) -> Self {
        let mut next = self.0.clone();
        next[player] = strategy;
        StrategyProfile(next)
    }

    pub fn into_inner(self) -> Vec<MixedStrategy> {
        self.0
    }
}

/// A finite game: `n` players, player `i` with `shape[i]` pure strategies and
/// a dense payoff tensor over joint pure profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    shape: Vec<usize>,
    strides: Vec<usize>,
    payoffs: Vec<Vec<f64>>,
}

impl Game {
    /// `payoffs[i]` is player `i`'s tensor flattened row-major over `shape`.
    pub fn new(shape: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::Shape("a game needs at least one player".into()));
        }
        if let Some((i, &g)) = shape.iter().enumerate().find(|(_, &g)| g < 2) {
            return Err(Error::Shape(format!(
                "player {} has {g} pure strategies, at least 2 required",
                i + 1
            )));
        }
        let size = shape
            .iter()
            .try_fold(1usize, |acc, &g| acc.checked_mul(g))
            .ok_or_else(|| Error::Shape("payoff tensor size overflows".into()))?;
        if payoffs.len() != shape.len() {
            return Err(Error::Shape(format!(
                "{} payoff tensors for {} players",
                payoffs.len(),
                shape.len()
            )));
        }
        for (i, tensor) in payoffs.iter().enumerate() {
            if tensor.len() != size {
                return Err(Error::Shape(format!(
                    "payoff tensor of player {} has {} entries, expected {size}",
                    i + 1,
                    tensor.len()
                )));
            }
            if let Some(k) = tensor.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "payoff tensor of player {} has non-finite entry at flat index {k}",
                    i + 1
                )));
            }
        }
        let mut strides = vec![1; shape.len()];
        for p in (0..shape.len() - 1).rev() {
            strides[p] = strides[p + 1] * shape[p + 1];
        }
        Ok(Game {
            shape,
            strides,
            payoffs,
        })
    }

    /// Two-player game from row-player matrix `a` and column-player matrix `b`,
    /// both `k x m`.
    pub fn bimatrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self> {
        let k = a.len();
        let m = a.first().map_or(0, Vec::len);
        let check = |name: &str, mat: &[Vec<f64>]| -> Result<()> {
            if mat.len() != k {
                return Err(Error::Shape(format!("{name} has {} rows, expected {k}", mat.len())));
            }
            if let Some(r) = mat.iter().position(|row| row.len() != m) {
                return Err(Error::Shape(format!(
                    "{name} row {r} has {} columns, expected {m}",
                    mat[r].len()
                )));
            }
            Ok(())
        };
        check("A", a)?;
        check("B", b)?;
        let flat = |mat: &[Vec<f64>]| mat.iter().flatten().copied().collect::<Vec<_>>();
        Game::new(vec![k, m], vec![flat(a), flat(b)])
    }

    pub fn num_players(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Number of joint pure profiles.
    pub fn num_profiles(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn payoff_tensor(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    pub fn payoff_tensors(&self) -> &[Vec<f64>] {
        &self.payoffs
    }

    pub fn flat_index(&self, pure: &[usize]) -> usize {
        pure.iter().zip(&self.strides).map(|(j, s)| j * s).sum()
    }

    /// Payoff to `player` at the pure profile `pure`.
    pub fn payoff_at(&self, player: usize, pure: &[usize]) -> f64 {
        self.payoffs[player][self.flat_index(pure)]
    }

    /// Row `row` of a two-player payoff matrix as a slice.
    pub fn matrix_row(&self, player: usize, row: usize) -> &[f64] {
        debug_assert_eq!(self.num_players(), 2);
        let m = self.shape[1];
        &self.payoffs[player][row * m..(row + 1) * m]
    }

    /// Applies `f(player, payoff)` to every entry.
    pub fn map_payoffs(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<Game> {
        let payoffs = self
            .payoffs
            .iter()
            .enumerate()
            .map(|(i, t)| t.iter().map(|&x| f(i, x)).collect())
            .collect();
        Game::new(self.shape.clone(), payoffs)
    }

    pub fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.num_players() != self.num_players() {
            return Err(Error::Shape(format!(
                "profile has {} strategies for a {}-player game",
                profile.num_players(),
                self.num_players()
            )));
        }
        for (i, (s, &g)) in profile.strategies().iter().zip(&self.shape).enumerate() {
            if s.len() != g {
                return Err(Error::Shape(format!(
                    "strategy of player {} has length {}, expected {g}",
                    i + 1,
                    s.len()
                )));
            }
        }
        Ok(())
    }
}

/// Expected payoff of each of `player`'s pure strategies against the other
/// players' mixed strategies in `profile`.
pub fn vertex_payoffs(game: &Game, profile: &StrategyProfile, player: usize) -> Result<Vec<f64>> {
    if player >= game.num_players() {
        return Err(Error::PlayerOutOfRange {
            player,
            num_players: game.num_players(),
        });
    }
    game.check_profile(profile)?;
    Ok(vertex_payoffs_unchecked(game, profile, player))
}

pub(crate) fn vertex_payoffs_unchecked(game: &Game, profile: &StrategyProfile, player: usize) -> Vec<f64> {
    let shape = game.shape();
    let n = shape.len();
    let tensor = game.payoff_tensor(player);
    let mut out = vec![0.0; shape[player]];
    let mut idx = vec![0usize; n];
    for &entry in tensor {
        let mut weight = 1.0;
        for (p, &j) in idx.iter().enumerate() {
            if p != player {
                weight *= profile.strategy(p).weights()[j];
            }
        }
        out[idx[player]] += weight * entry;
        // odometer, last axis fastest
        for p in (0..n).rev() {
            idx[p] += 1;
            if idx[p] < shape[p] {
                break;
            }
            idx[p] = 0;
        }
    }
    out
}

/// Inner product of a mixed strategy with its vertex payoffs.
///
/// The result is clamped to the range of `vertex_payoffs`: a convex
/// combination cannot leave it, and rounding must not push it out either,
/// otherwise the regret vector could lose its zero component.
pub fn expected_payoff(strategy: &MixedStrategy, vertex_payoffs: &[f64]) -> Result<f64> {
    if strategy.len() != vertex_payoffs.len() {
        return Err(Error::Shape(format!(
            "strategy of length {} against {} vertex payoffs",
            strategy.len(),
            vertex_payoffs.len()
        )));
    }
    let dot: f64 = strategy.weights().iter().zip(vertex_payoffs).map(|(s, v)| s * v).sum();
    let lo = vertex_payoffs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vertex_payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(dot.clamp(lo, hi))
}

/// Componentwise gain from switching to each pure strategy, `max(0, v_j - payoff)`.
pub fn regret_vector(vertex_payoffs: &[f64], payoff: f64) -> Vec<f64> {
    vertex_payoffs.iter().map(|&v| (v - payoff).max(0.0)).collect()
}

/// Regret measures of one player at a profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerRegret {
    pub vertex_payoffs: Vec<f64>,
    pub payoff: f64,
    pub regret_vector: Vec<f64>,
    /// L1 norm of `regret_vector`.
    pub regret_sum: f64,
}

impl PlayerRegret {
    pub fn compute(strategy: &MixedStrategy, vertex_payoffs: Vec<f64>) -> Result<Self> {
        let payoff = expected_payoff(strategy, &vertex_payoffs)?;
        let regret_vector = regret_vector(&vertex_payoffs, payoff);
        let regret_sum = regret_vector.iter().sum();
        Ok(PlayerRegret {
            vertex_payoffs,
            payoff,
            regret_vector,
            regret_sum,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub players: Vec<PlayerRegret>,
}

impl RegretReport {
    pub fn regret_sums(&self) -> Vec<f64> {
        self.players.iter().map(|p| p.regret_sum).collect()
    }

    /// Sum of all players' regret sums.
    pub fn total(&self) -> f64 {
        self.players.iter().map(|p| p.regret_sum).sum()
    }

    pub fn max_regret_sum(&self) -> f64 {
        self.players.iter().map(|p| p.regret_sum).fold(0.0, f64::max)
    }

    /// Whether no player can gain more than `epsilon` in total regret.
    pub fn is_epsilon_equilibrium(&self, epsilon: f64) -> bool {
        self.max_regret_sum() <= epsilon
    }
}

/// Vertex payoffs, payoff, regret vector and regret sum for every player.
pub fn regret_report(game: &Game, profile: &StrategyProfile) -> Result<RegretReport> {
    game.check_profile(profile)?;
    let players = (0..game.num_players())
        .map(|i| {
            let v = vertex_payoffs_unchecked(game, profile, i);
            PlayerRegret::compute(profile.strategy(i), v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegretReport { players })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games;

    fn mp() -> Game {
        games::matching_pennies()
    }

    #[test]
    fn strategy_rejects_out_of_tolerance_weights() {
        assert!(MixedStrategy::new(vec![0.5, 0.5]).is_ok());
        assert!(MixedStrategy::new(vec![1.0 + 5e-7, 0.0]).is_ok());
        assert!(matches!(
            MixedStrategy::new(vec![1.1, -0.1]),
            Err(Error::InvalidStrategy(_))
        ));
        assert!(MixedStrategy::new(vec![0.5, 0.6]).is_err());
        assert!(MixedStrategy::new(vec![f64::NAN, 1.0]).is_err());
        assert!(MixedStrategy::new(vec![]).is_err());
        let s = MixedStrategy::new(vec![1.0 + 1e-10, -1e-10]).unwrap();
        assert_eq!(s.weights()[1], 0.0);
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn game_rejects_bad_shapes() {
        assert!(matches!(
            Game::new(vec![2, 1], vec![vec![0.0; 2]; 2]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            Game::new(vec![2, 2], vec![vec![0.0; 3]; 2]),
            Err(Error::Shape(_))
        ));
        assert!(Game::new(vec![2, 2], vec![vec![0.0; 4]]).is_err());
        assert!(Game::new(vec![2, 2], vec![vec![0.0, 0.0, 0.0, f64::INFINITY], vec![0.0; 4]]).is_err());
        assert!(Game::new(vec![], vec![]).is_err());
    }

    #[test]
    fn row_major_layout() {
        let g = Game::new(vec![2, 3], vec![(0..6).map(f64::from).collect(); 2]).unwrap();
        assert_eq!(g.payoff_at(0, &[1, 2]), 5.0);
        assert_eq!(g.payoff_at(0, &[0, 1]), 1.0);
        assert_eq!(g.matrix_row(0, 1), &[3.0, 4.0, 5.0]);
    }

    #[test]
    fn vertex_payoffs_matching_pennies_at_center() {
        let p = StrategyProfile::uniform(&[2, 2]);
        assert_eq!(vertex_payoffs(&mp(), &p, 0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn vertex_payoffs_mp3_first_column() {
        let g = games::mp3();
        let p = StrategyProfile::pure(&[3, 3], &[0, 0]);
        assert_eq!(vertex_payoffs(&g, &p, 0).unwrap(), vec![1.0, -1.0, -2.0]);
    }

    #[test]
    fn vertex_payoffs_against_pure_opponents_is_a_slice() {
        let g = games::random_game(&[3, 2, 4], 11).unwrap();
        let p = StrategyProfile::pure(&[3, 2, 4], &[2, 1, 3]);
        let v = vertex_payoffs(&g, &p, 1).unwrap();
        assert_eq!(v, vec![g.payoff_at(1, &[2, 0, 3]), g.payoff_at(1, &[2, 1, 3])]);
    }

    #[test]
    fn vertex_payoffs_errors() {
        let p = StrategyProfile::uniform(&[2, 2]);
        assert!(matches!(
            vertex_payoffs(&mp(), &p, 2),
            Err(Error::PlayerOutOfRange {
                player: 2,
                num_players: 2
            })
        ));
        let bad = StrategyProfile::uniform(&[2, 3]);
        assert!(matches!(vertex_payoffs(&mp(), &bad, 0), Err(Error::Shape(_))));
    }

    #[test]
    fn expected_payoff_examples() {
        let s = MixedStrategy::uniform(2);
        assert_eq!(expected_payoff(&s, &[0.0, 0.0]).unwrap(), 0.0);
        let e1 = MixedStrategy::vertex(3, 0);
        assert_eq!(expected_payoff(&e1, &[1.0, -1.0, -2.0]).unwrap(), 1.0);
        let u = MixedStrategy::uniform(3);
        assert!((expected_payoff(&u, &[3.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(expected_payoff(&u, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn regret_vector_examples() {
        assert_eq!(regret_vector(&[0.0, 0.0], 0.0), vec![0.0, 0.0]);
        assert_eq!(regret_vector(&[-1.0, 1.0, -2.0], -1.0), vec![0.0, 2.0, 0.0]);
        assert_eq!(regret_vector(&[5.0, 5.0, 5.0], 5.0), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn regret_report_examples() {
        let r = regret_report(&mp(), &StrategyProfile::uniform(&[2, 2])).unwrap();
        assert_eq!(r.regret_sums(), vec![0.0, 0.0]);

        let r = regret_report(&games::mp3(), &StrategyProfile::pure(&[3, 3], &[0, 0])).unwrap();
        assert_eq!(r.regret_sums(), vec![0.0, 2.0]);
        assert_eq!(r.players[1].vertex_payoffs, vec![-1.0, 1.0, -2.0]);
        assert_eq!(r.players[1].regret_vector, vec![0.0, 2.0, 0.0]);
        assert!(r.is_epsilon_equilibrium(2.0));
        assert!(!r.is_epsilon_equilibrium(1.9));

        let r = regret_report(&games::rps(), &StrategyProfile::uniform(&[3, 3])).unwrap();
        assert!(r.total().abs() < 1e-15);
    }

    #[test]
    fn constant_payoffs_have_zero_regret_despite_rounding() {
        let g = Game::new(vec![3, 3], vec![vec![0.1; 9], vec![0.7; 9]]).unwrap();
        let p = StrategyProfile::from_weights(vec![vec![0.1, 0.2, 0.7], vec![0.3, 0.3, 0.4]]).unwrap();
        let r = regret_report(&g, &p).unwrap();
        assert_eq!(r.total(), 0.0);
    }
}
