//! Builtin games and a seeded random game generator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::Game;

/// Names accepted by [`builtin`], with their aliases.
pub const BUILTIN_NAMES: &[(&str, &[&str], &str)] = &[
    (
        "MP",
        &["matching-pennies"],
        "matching pennies, unique equilibrium (uniform, uniform)",
    ),
    ("3X3-1eq1sp", &[], "unique pure equilibrium (e1, e1)"),
    (
        "3X3-1eq2sp",
        &["MP3"],
        "matching pennies plus a dominated third strategy, unique equilibrium on two strategies",
    ),
    (
        "3X3-1eq3sp",
        &["RPS"],
        "rock-paper-scissors, unique interior equilibrium",
    ),
    ("3X3-2eq2sp", &[], "two equilibria, each on two strategies per player"),
];

fn matrices(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> Game {
    let rows = |m: [[f64; 3]; 3]| m.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
    Game::bimatrix(&rows(a), &rows(b)).expect("builtin matrices are well formed")
}

pub fn matching_pennies() -> Game {
    let a = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
    let b = vec![vec![-1.0, 1.0], vec![1.0, -1.0]];
    Game::bimatrix(&a, &b).expect("builtin matrices are well formed")
}

/// `A` rows are constant, `B = A^T`: strategy 1 strictly dominates for both.
pub fn one_pure_equilibrium() -> Game {
    let a = [[3.0, 3.0, 3.0], [2.0, 2.0, 2.0], [1.0, 1.0, 1.0]];
    matrices(a, transpose(a))
}

pub fn mp3() -> Game {
    matrices(
        [[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [-2.0, -2.0, -2.0]],
        [[-1.0, 1.0, -2.0], [1.0, -1.0, -2.0], [0.0, 0.0, -2.0]],
    )
}

pub fn rps() -> Game {
    let a = [[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]];
    matrices(a, a.map(|r| r.map(|x| -x)))
}

/// Two equilibria, `((1/2, 1/2, 0), (2/3, 1/3, 0))` and
/// `((0, 2/3, 1/3), (0, 1/3, 2/3))`. Every game with an even number of
/// equilibria is degenerate; here the column player's middle strategy pays
/// zero against every row.
pub fn two_equilibria() -> Game {
    matrices(
        [[-2.0, 2.0, -1.0], [0.0, -2.0, 2.0], [-1.0, 0.0, 1.0]],
        [[2.0, 0.0, 1.0], [-2.0, 0.0, -1.0], [-2.0, 0.0, 2.0]],
    )
}

fn transpose(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            t[j][i] = x;
        }
    }
    t
}

/// Looks up a builtin game by canonical name or alias (case-insensitive).
pub fn builtin(name: &str) -> Option<Game> {
    let canonical = BUILTIN_NAMES
        .iter()
        .find(|(n, aliases, _)| n.eq_ignore_ascii_case(name) || aliases.iter().any(|a| a.eq_ignore_ascii_case(name)))?;
    Some(match canonical.0 {
        "MP" => matching_pennies(),
        "3X3-1eq1sp" => one_pure_equilibrium(),
        "3X3-1eq2sp" => mp3(),
        "3X3-1eq3sp" => rps(),
        "3X3-2eq2sp" => two_equilibria(),
        _ => unreachable!("every BUILTIN_NAMES entry has a constructor"),
    })
}

/// Game with payoffs drawn independently and uniformly from `[-1, 1)`.
pub fn random_game(shape: &[usize], seed: u64) -> Result<Game> {
    let size = shape
        .iter()
        .try_fold(1usize, |acc, &g| acc.checked_mul(g))
        .ok_or_else(|| Error::Shape("payoff tensor size overflows".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let payoffs = (0..shape.len())
        .map(|_| (0..size).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    Game::new(shape.to_vec(), payoffs)
}

/// Parses `KxM[xN...]` into a shape.
pub fn parse_shape(text: &str) -> Result<Vec<usize>> {
    text.split(['x', 'X'])
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::parse("shape", format!("`{part}` is not a strategy count")))
        })
        .collect()
}
