//! Acceptance criteria, one line of output each. Runs without the libtest
//! harness so the report is printed whether or not a criterion fails; the
//! process exits nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use geomatch::experiments::affine_transform;
use geomatch::game::{regret_report, vertex_payoffs, MixedStrategy, StrategyProfile};
use geomatch::games;
use geomatch::iteration::{derive_seed, run, seeded_random_profile, RunConfig};
use geomatch::matching::{convex_update, cosine_angle, psi_update};
use geomatch::metrics::{metric_trace, profile_distance_max, profile_distance_sum, MetricKind};
use geomatch::oracle::{nearest_equilibrium, support_enumeration, EquilibriumSet};
use geomatch::projection::simplex3_to_plane;
use geomatch::Game;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Game, StrategyProfile) {
    let n = rng.random_range(2..=3usize);
    let shape: Vec<usize> = (0..n).map(|_| rng.random_range(2..=5usize)).collect();
    let game = games::random_game(&shape, rng.random()).unwrap();
    let profile = seeded_random_profile(&shape, rng.random());
    (game, profile)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn unilateral(game: &Game, profile: &StrategyProfile, player: usize, s: &MixedStrategy) -> (f64, f64) {
    let changed = profile.with_strategy(player, s.clone());
    let report = regret_report(game, &changed).unwrap();
    let pr = &report.players[player];
    (pr.payoff, pr.regret_sum)
}

/// Angle, payoff and regret-sum monotonicity of one update, plus the closed
/// form of the payoff increment.
fn criterion_1() -> Outcome {
    const TOL: f64 = 1e-9;
    const TRIALS: usize = 1200;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 4];
    for _ in 0..TRIALS {
        let (game, profile) = random_instance(&mut rng);
        let rate = log_uniform(&mut rng, 1e-3, 1e3);
        let player = rng.random_range(0..game.num_players());
        let v = vertex_payoffs(&game, &profile, player).unwrap();
        let s = profile.strategy(player);
        let report = regret_report(&game, &profile).unwrap();
        let pr = &report.players[player];
        let lambda = &pr.regret_vector;
        let s_new = psi_update(s, lambda, rate).unwrap();

        if pr.regret_sum > 0.0 {
            let before = cosine_angle(s.weights(), lambda).unwrap();
            let after = cosine_angle(s_new.weights(), lambda).unwrap();
            worst[0] = worst[0].max(before - after);
        }
        let (p_new, rs_new) = unilateral(&game, &profile, player, &s_new);
        worst[1] = worst[1].max(pr.payoff - p_new);
        worst[2] = worst[2].max(rs_new - pr.regret_sum);
        // closed form, evaluated independently of the library's payoff code
        let p_direct = dot(s_new.weights(), &v);
        let increment = norm2(lambda).powi(2) / (1.0 / rate + pr.regret_sum);
        worst[3] = worst[3].max((p_direct - dot(s.weights(), &v) - increment).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst.iter().all(|&w| w <= TOL) && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "{TRIALS} triples; worst violations angle={:.2e} payoff={:.2e} regret={:.2e} increment={:.2e} (tol {TOL:e}); {:.2}s (limit 10s)",
            worst[0], worst[1], worst[2], worst[3],
            elapsed.as_secs_f64()
        ),
    )
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// psi(s) = s exactly when the regret sum is zero.
fn criterion_2() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut check = |game: &Game, profile: &StrategyProfile, rate: f64, label: &str| {
        let report = regret_report(game, profile).unwrap();
        for (i, pr) in report.players.iter().enumerate() {
            let s = profile.strategy(i);
            let moved = max_abs_diff(psi_update(s, &pr.regret_vector, rate).unwrap().weights(), s.weights());
            let fixed = moved <= TOL;
            let zero = pr.regret_sum <= TOL;
            checked += 1;
            if fixed != zero {
                failures.push(format!(
                    "{label} player {i}: moved {moved:e}, regret sum {:e}",
                    pr.regret_sum
                ));
            }
        }
    };
    for _ in 0..500 {
        let (game, profile) = random_instance(&mut rng);
        check(&game, &profile, log_uniform(&mut rng, 1e-3, 1e3), "random");
    }
    let mut equilibria = 0;
    let mut equilibrium_games: Vec<Game> = games::BUILTIN_NAMES
        .iter()
        .map(|(n, _, _)| games::builtin(n).unwrap())
        .collect();
    for seed in 0..40 {
        let shape = [rng.random_range(2..=4usize), rng.random_range(2..=4usize)];
        equilibrium_games.push(games::random_game(&shape, seed).unwrap());
    }
    for game in &equilibrium_games {
        for eq in support_enumeration(game, 1e-9).unwrap().equilibria {
            equilibria += 1;
            check(game, &eq, log_uniform(&mut rng, 1e-3, 1e3), "equilibrium");
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{checked} player updates ({equilibria} oracle equilibria included), tol {TOL:e}; {}",
            if failures.is_empty() {
                "no mismatches".to_string()
            } else {
                failures.join("; ")
            }
        ),
    )
}

/// Exact vertex images and an equilateral image triangle of side sqrt(2).
fn criterion_3() -> Outcome {
    const TOL: f64 = 1e-15;
    let r2 = 2f64.sqrt();
    let r6 = 6f64.sqrt();
    let want = [[0.0, 0.0], [r2 / 2.0, r6 / 2.0], [r2, 0.0]];
    let mut images = Vec::new();
    let mut worst: f64 = 0.0;
    for (k, w) in want.iter().enumerate() {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let xy = simplex3_to_plane(&e).unwrap();
        worst = worst.max((xy[0] - w[0]).abs()).max((xy[1] - w[1]).abs());
        images.push(xy);
    }
    let side = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let sides = [
        side(images[0], images[1]),
        side(images[1], images[2]),
        side(images[0], images[2]),
    ];
    let side_err = sides.iter().map(|s| (s - r2).abs()).fold(0.0, f64::max);
    outcome(
        worst <= TOL && side_err <= TOL,
        format!("vertex error {worst:e}, side error {side_err:e} (tol {TOL:e})"),
    )
}

/// The convex update contracts the distance to its target by 1/(1+r).
fn criterion_4() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    while trials < 2000 {
        let g = rng.random_range(2..=8usize);
        let s = seeded_random_profile(&[g], rng.random()).into_inner().remove(0);
        let t = seeded_random_profile(&[g], rng.random()).into_inner().remove(0);
        let r = log_uniform(&mut rng, 1e-3, 1e3);
        let before = norm2(&diff(s.weights(), t.weights()));
        if before < 1e-6 {
            continue;
        }
        let next = convex_update(&s, &t, r).unwrap();
        let after = norm2(&diff(next.weights(), t.weights()));
        worst = worst.max((after / before - 1.0 / (1.0 + r)).abs());
        trials += 1;
    }
    outcome(
        worst <= TOL,
        format!("{trials} random inputs, worst factor error {worst:e} (tol {TOL:e})"),
    )
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn profile(w: &[&[f64]]) -> StrategyProfile {
    StrategyProfile::from_weights(w.iter().map(|s| s.to_vec()).collect()).unwrap()
}

/// Compares an oracle result with a known equilibrium list (order-free).
fn same_set(found: &EquilibriumSet, want: &[StrategyProfile], tol: f64) -> Result<(), String> {
    if found.equilibria.len() != want.len() {
        return Err(format!(
            "found {} equilibria, expected {}",
            found.equilibria.len(),
            want.len()
        ));
    }
    for w in want {
        let d = found
            .equilibria
            .iter()
            .map(|e| profile_distance_sum(e, w).unwrap())
            .fold(f64::INFINITY, f64::min);
        if d >= tol {
            return Err(format!("no equilibrium within {tol:e} of {w:?} (closest {d:e})"));
        }
    }
    Ok(())
}

/// Oracle agreement on the reference games and every builtin's advertised structure.
fn criterion_5() -> Outcome {
    const TOL: f64 = 1e-7;
    let third = 1.0 / 3.0;
    let cases: Vec<(&str, Game, Vec<StrategyProfile>)> = vec![
        ("MP", games::matching_pennies(), vec![StrategyProfile::uniform(&[2, 2])]),
        ("3X3-1eq3sp", games::rps(), vec![StrategyProfile::uniform(&[3, 3])]),
        (
            "3X3-1eq1sp",
            games::one_pure_equilibrium(),
            vec![StrategyProfile::pure(&[3, 3], &[0, 0])],
        ),
        (
            "3X3-1eq2sp",
            games::mp3(),
            vec![profile(&[&[0.5, 0.5, 0.0], &[0.5, 0.5, 0.0]])],
        ),
        (
            "3X3-2eq2sp",
            games::two_equilibria(),
            vec![
                profile(&[&[0.5, 0.5, 0.0], &[2.0 * third, third, 0.0]]),
                profile(&[&[0.0, 2.0 * third, third], &[0.0, third, 2.0 * third]]),
            ],
        ),
    ];
    let mut problems = Vec::new();
    let covered: Vec<&str> = cases.iter().map(|c| c.0).collect();
    for (name, _, _) in games::BUILTIN_NAMES {
        if !covered.contains(name) {
            problems.push(format!("builtin {name} has no advertised structure check"));
        }
    }
    for (name, game, want) in &cases {
        if games::builtin(name).as_ref() != Some(game) {
            problems.push(format!("{name}: registry entry differs"));
        }
        let found = support_enumeration(game, 1e-9).unwrap();
        if let Err(e) = same_set(&found, want, TOL) {
            problems.push(format!("{name}: {e}"));
        }
        if *name == "3X3-2eq2sp" {
            let two_by_two = found
                .equilibria
                .iter()
                .all(|e| e.strategies().iter().all(|s| s.support(1e-9).len() == 2));
            if !two_by_two {
                problems.push(format!(
                    "{name}: an equilibrium is not supported on two strategies each"
                ));
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{} games checked, distance tol {TOL:e}; {}",
            cases.len(),
            if problems.is_empty() {
                "all match".to_string()
            } else {
                problems.join("; ")
            }
        ),
    )
}

const MP3_BEST_LIMIT: f64 = 1e-2;
const MP3_DISTANCE_LIMIT: f64 = 0.1;

/// Ten random starts on MP3 reach a small best regret sum and end near the equilibrium.
fn criterion_6() -> Outcome {
    let start = Instant::now();
    let game = games::mp3();
    let set = support_enumeration(&game, 1e-9).unwrap();
    let config = RunConfig::with_rate(2, 0.05, 10_000).unwrap();
    let mut best_worst: f64 = 0.0;
    let mut dist_worst: f64 = 0.0;
    for i in 0..10 {
        let init = seeded_random_profile(&[3, 3], derive_seed(6, i));
        let trace = run(&game, &init, &config).unwrap();
        best_worst = best_worst.max(trace.best_total());
        let (_, d) = nearest_equilibrium(trace.last_profile(), &set).unwrap();
        dist_worst = dist_worst.max(d);
    }
    let elapsed = start.elapsed();
    let pass = best_worst < MP3_BEST_LIMIT && dist_worst < MP3_DISTANCE_LIMIT && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "10 starts, r=0.05, T=10000: largest best regret sum {best_worst:.6} (need < {MP3_BEST_LIMIT:e}), largest final distance {dist_worst:.6} (need < {MP3_DISTANCE_LIMIT}); {:.2}s (limit 30s)",
            elapsed.as_secs_f64()
        ),
    )
}

/// Uniform plus 1e-3 on the first strategy of each player, renormalized.
fn perturbed_uniform() -> StrategyProfile {
    let w = [1.0 / 3.0 + 1e-3, 1.0 / 3.0, 1.0 / 3.0];
    let total: f64 = w.iter().sum();
    let w: Vec<f64> = w.iter().map(|x| x / total).collect();
    StrategyProfile::from_weights(vec![w.clone(), w]).unwrap()
}

/// Trajectories started next to the RPS equilibrium move away from it.
fn criterion_7() -> Outcome {
    let game = games::rps();
    let eq = StrategyProfile::uniform(&[3, 3]);
    let init = perturbed_uniform();
    let trace = run(&game, &init, &RunConfig::with_rate(2, 0.01, 10_000).unwrap()).unwrap();
    let d0 = profile_distance_sum(&init, &eq).unwrap();
    let d_end = profile_distance_sum(trace.last_profile(), &eq).unwrap();
    let best = trace.best_total();
    let pass = d_end > d0 && best > MP3_BEST_LIMIT;
    outcome(
        pass,
        format!(
            "distance to uniform {d0:.6} -> {d_end:.6} (must grow: {}); best regret sum {best:.6} at step {} (must exceed {MP3_BEST_LIMIT:e}: {})",
            d_end > d0,
            trace.best_step,
            best > MP3_BEST_LIMIT
        ),
    )
}

/// Ratio/step consistency, metric ordering, and late ratios near one on RPS.
fn criterion_8() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut traces = Vec::new();
    for name in ["MP", "3X3-1eq1sp", "3X3-1eq2sp", "3X3-1eq3sp", "3X3-2eq2sp"] {
        let game = games::builtin(name).unwrap();
        let init = seeded_random_profile(game.shape(), 8);
        traces.push(run(&game, &init, &RunConfig::with_rate(2, 0.05, 2000).unwrap()).unwrap());
    }
    for seed in 0..5u64 {
        let shape = [3, 4, 2];
        let game = games::random_game(&shape, seed).unwrap();
        let init = seeded_random_profile(&shape, seed + 100);
        traces.push(run(&game, &init, &RunConfig::with_rate(3, 0.1, 1000).unwrap()).unwrap());
    }
    let rps = run(
        &games::rps(),
        &perturbed_uniform(),
        &RunConfig::with_rate(2, 0.01, 10_000).unwrap(),
    )
    .unwrap();
    traces.push(rps.clone());

    let mut recon_worst: f64 = 0.0;
    let mut order_violations = 0usize;
    let mut pairs = 0usize;
    for trace in &traces {
        let n = trace.profiles[0].num_players() as f64;
        for kind in [MetricKind::Sum, MetricKind::Max] {
            let m = metric_trace(&trace.profiles, kind).unwrap();
            for (t, q) in m.q_dot.iter().enumerate() {
                if q.is_finite() {
                    recon_worst = recon_worst.max((q * m.d_dot[t] - m.d_dot[t + 1]).abs());
                }
            }
        }
        for w in trace.profiles.windows(2) {
            let s = profile_distance_sum(&w[0], &w[1]).unwrap();
            let x = profile_distance_max(&w[0], &w[1]).unwrap();
            pairs += 1;
            if !(x <= s && s <= n * x) {
                order_violations += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..2000 {
        let (game, a) = random_instance(&mut rng);
        let b = seeded_random_profile(game.shape(), rng.random());
        let n = game.num_players() as f64;
        let s = profile_distance_sum(&a, &b).unwrap();
        let x = profile_distance_max(&a, &b).unwrap();
        pairs += 1;
        if !(x <= s && s <= n * x) {
            order_violations += 1;
        }
    }
    let m = metric_trace(&rps.profiles, MetricKind::Sum).unwrap();
    let late = &m.q_dot[m.q_dot.len() - 1000..];
    let late_mean = late.iter().sum::<f64>() / late.len() as f64;
    let pass = recon_worst <= TOL && order_violations == 0 && (0.99..=1.01).contains(&late_mean);
    outcome(
        pass,
        format!(
            "{} traces: reconstruction error {recon_worst:e} (tol {TOL:e}); {order_violations} ordering violations in {pairs} pairs; RPS late q mean over last 1000 ratios {late_mean:.6} (need [0.99, 1.01])",
            traces.len()
        ),
    )
}

/// Positive affine payoff maps scale regrets by the factor and keep equilibria.
fn criterion_9() -> Outcome {
    const REL_TOL: f64 = 1e-9;
    const EQ_TOL: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut rel_worst: f64 = 0.0;
    let mut set_problems = Vec::new();
    let mut games_checked = 0;
    for k in 0..30 {
        let (game, _) = random_instance(&mut rng);
        let n = game.num_players();
        for a in [0.5, 2.0, 10.0] {
            let offsets: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let scaled = affine_transform(&game, &vec![a; n], &offsets).unwrap();
            for _ in 0..20 {
                let p = seeded_random_profile(game.shape(), rng.random());
                let base = regret_report(&game, &p).unwrap();
                let tr = regret_report(&scaled, &p).unwrap();
                for (x, y) in base.players.iter().zip(&tr.players) {
                    for (u, v) in x.regret_vector.iter().zip(&y.regret_vector) {
                        let want = a * u;
                        let err = (v - want).abs() / want.abs().max(1.0);
                        rel_worst = rel_worst.max(err);
                    }
                }
            }
            if n == 2 {
                let e0 = support_enumeration(&game, 1e-9).unwrap();
                let e1 = support_enumeration(&scaled, 1e-9).unwrap();
                if let Err(e) = same_set(&e1, &e0.equilibria, EQ_TOL) {
                    set_problems.push(format!("game {k}, a={a}: {e}"));
                }
                games_checked += 1;
            }
        }
    }
    outcome(
        rel_worst <= REL_TOL && set_problems.is_empty(),
        format!(
            "regret scaling worst relative error {rel_worst:e} (tol {REL_TOL:e}); {games_checked} two-player oracle comparisons (tol {EQ_TOL:e}): {}",
            if set_problems.is_empty() { "all coincide".to_string() } else { set_problems.join("; ") }
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_geomatch"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

/// Seeded CLI commands produce byte-identical files across executions.
fn criterion_10() -> Outcome {
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "run",
            "--game",
            "builtin:3X3-1eq3sp",
            "--init",
            "random",
            "--seed",
            "7",
            "--rate",
            "0.05",
            "--iters",
            "3000",
            "--out",
            "run.csv",
            "--metrics-out",
            "metrics.csv",
        ],
        vec![
            "run",
            "--game",
            "random:4x3",
            "--seed",
            "11",
            "--init",
            "random",
            "--rule",
            "convex:r=0.2,target=softmax:0.5",
            "--iters",
            "500",
            "--out",
            "run_convex.csv",
        ],
        vec![
            "run",
            "--game",
            "random:60x40",
            "--seed",
            "5",
            "--init",
            "random",
            "--rate",
            "0.05",
            "--iters",
            "300",
            "--record-every",
            "3",
            "--out",
            "big.csv",
        ],
        vec![
            "project",
            "--in",
            "big.csv",
            "--player",
            "1",
            "--mode",
            "pca",
            "--dim",
            "3",
            "--out",
            "big_path.csv",
        ],
        vec![
            "project",
            "--in",
            "run.csv",
            "--player",
            "2",
            "--mode",
            "barycentric",
            "--out",
            "bary.csv",
        ],
        vec![
            "sweep-rate",
            "--game",
            "builtin:RPS",
            "--rates",
            "1,0.1,0.01",
            "--init",
            "random",
            "--seed",
            "3",
            "--iters",
            "2000",
            "--out",
            "sweep_rate.csv",
        ],
        vec![
            "sweep-scale",
            "--game",
            "builtin:MP3",
            "--scales",
            "0.5,1,2",
            "--rate",
            "0.05",
            "--init",
            "random",
            "--seed",
            "3",
            "--iters",
            "2000",
            "--out",
            "sweep_scale.csv",
        ],
        vec![
            "basin",
            "--game",
            "builtin:3X3-2eq2sp",
            "--starts",
            "6",
            "--seed",
            "9",
            "--rate",
            "0.05",
            "--iters",
            "2000",
            "--out",
            "basin.csv",
        ],
    ];
    let files = [
        "run.csv",
        "metrics.csv",
        "run_convex.csv",
        "big.csv",
        "big_path.csv",
        "big_path.csv.variance",
        "bary.csv",
        "sweep_rate.csv",
        "sweep_scale.csv",
        "basin.csv",
    ];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        for args in &commands {
            if let Err(e) = run_cli(dir.path(), args) {
                return outcome(false, e);
            }
        }
    }
    let mut differing = Vec::new();
    for f in files {
        let a = std::fs::read(dirs[0].path().join(f));
        let b = std::fs::read(dirs[1].path().join(f));
        match (a, b) {
            (Ok(a), Ok(b)) if a == b && !a.is_empty() => {}
            _ => differing.push(f),
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} commands run twice, {} files compared; {}",
            commands.len(),
            files.len(),
            if differing.is_empty() {
                "all identical".to_string()
            } else {
                format!("differ or missing: {}", differing.join(", "))
            }
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("update inequalities", criterion_1),
        ("fixed-point characterization", criterion_2),
        ("barycentric map exactness", criterion_3),
        ("convex update contraction", criterion_4),
        ("oracle agreement", criterion_5),
        ("attractor reproduction (MP3)", criterion_6),
        ("repellor reproduction (RPS)", criterion_7),
        ("metric coherence", criterion_8),
        ("affine covariance", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        let status = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!("criterion {:>2} {status} {name}: {}", k + 1, result.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
