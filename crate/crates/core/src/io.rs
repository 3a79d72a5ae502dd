//! File formats: game and profile JSON, trace/metric/sweep/basin/path CSV.
//!
//! Game files hold one JSON object, either the tensor form
//! `{"shape": [g1, ..., gn], "payoffs": [[...], ...]}` with each player's
//! tensor flattened row-major, or the two-player form `{"A": [[...]], "B": [[...]]}`.
//! Profile files hold a JSON array of weight arrays, one per player.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a value
//! read back is bit-identical to the value written.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::experiments::{BasinReport, SweepResult};
use crate::game::{Game, MixedStrategy, StrategyProfile};
use crate::iteration::IterationTrace;
use crate::metrics::MetricTrace;
use crate::projection::PlanarPath;

fn number(v: &Value, field: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| Error::parse(field, format!("expected a number, found {}", kind(v))))?;
    if !x.is_finite() {
        return Err(Error::parse(field, "payoff is not finite"));
    }
    Ok(x)
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn array<'a>(v: &'a Value, field: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::parse(field, format!("expected an array, found {}", kind(v))))
}

fn matrix(v: &Value, field: &str) -> Result<Vec<Vec<f64>>> {
    array(v, field)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let name = format!("{field}[{i}]");
            array(row, &name)?
                .iter()
                .enumerate()
                .map(|(j, x)| number(x, &format!("{name}[{j}]")))
                .collect()
        })
        .collect()
}

/// Decodes a game from JSON text.
pub fn parse_game(text: &str) -> Result<Game> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse("game", format!("expected an object, found {}", kind(&value))))?;
    let has = |k: &str| obj.contains_key(k);
    if has("A") || has("B") {
        if has("shape") || has("payoffs") {
            return Err(Error::parse("game", "mixes the tensor and bimatrix forms"));
        }
        let a = matrix(obj.get("A").ok_or_else(|| Error::parse("A", "missing"))?, "A")?;
        let b = matrix(obj.get("B").ok_or_else(|| Error::parse("B", "missing"))?, "B")?;
        if let Some(k) = obj.keys().find(|k| *k != "A" && *k != "B") {
            return Err(Error::parse(k.as_str(), "unknown field"));
        }
        return Game::bimatrix(&a, &b);
    }
    let shape_v = obj.get("shape").ok_or_else(|| Error::parse("shape", "missing"))?;
    let shape = array(shape_v, "shape")?
        .iter()
        .enumerate()
        .map(|(i, g)| {
            g.as_u64()
                .and_then(|g| usize::try_from(g).ok())
                .ok_or_else(|| Error::parse(format!("shape[{i}]"), "expected a non-negative integer"))
        })
        .collect::<Result<Vec<usize>>>()?;
    let payoffs_v = obj.get("payoffs").ok_or_else(|| Error::parse("payoffs", "missing"))?;
    let tensors = array(payoffs_v, "payoffs")?;
    let mut payoffs = Vec::with_capacity(tensors.len());
    for (i, t) in tensors.iter().enumerate() {
        let name = format!("payoffs[{i}]");
        let entries = array(t, &name)?
            .iter()
            .enumerate()
            .map(|(j, x)| number(x, &format!("{name}[{j}]")))
            .collect::<Result<Vec<f64>>>()?;
        payoffs.push(entries);
    }
    if let Some(k) = obj.keys().find(|k| *k != "shape" && *k != "payoffs") {
        return Err(Error::parse(k.as_str(), "unknown field"));
    }
    Game::new(shape, payoffs)
}

pub fn read_game(path: &Path) -> Result<Game> {
    parse_game(&std::fs::read_to_string(path)?)
}

/// Tensor-form JSON of a game.
pub fn game_to_json(game: &Game) -> String {
    let value = serde_json::json!({
        "shape": game.shape(),
        "payoffs": game.payoff_tensors(),
    });
    let mut s = serde_json::to_string_pretty(&value).expect("game values serialize");
    s.push('\n');
    s
}

/// Decodes a profile from a JSON array of weight arrays.
pub fn parse_profile(text: &str) -> Result<StrategyProfile> {
    let value: Value = serde_json::from_str(text)?;
    let players = array(&value, "profile")?;
    let strategies = players
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let name = format!("profile[{i}]");
            let w = array(s, &name)?
                .iter()
                .enumerate()
                .map(|(j, x)| {
                    x.as_f64()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::parse(format!("{name}[{j}]"), "expected a finite number"))
                })
                .collect::<Result<Vec<f64>>>()?;
            MixedStrategy::new(w).map_err(|e| Error::parse(name, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    if strategies.is_empty() {
        return Err(Error::parse("profile", "no strategies"));
    }
    Ok(StrategyProfile::new(strategies))
}

pub fn read_profile(path: &Path) -> Result<StrategyProfile> {
    parse_profile(&std::fs::read_to_string(path)?)
}

pub fn profile_to_json(profile: &StrategyProfile) -> String {
    let mut s = serde_json::to_string(profile).expect("profile values serialize");
    s.push('\n');
    s
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Header of a trace CSV for a game of the given shape.
pub fn trace_header(shape: &[usize]) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=shape.len()).map(|i| format!("rs_{i}")));
    for (i, &g) in shape.iter().enumerate() {
        h.extend((1..=g).map(|j| format!("s{}_{j}", i + 1)));
    }
    h
}

/// Trace CSV: `t, rs_1..rs_n, s1_1..s1_g1, ...`, one row per recorded step.
pub fn trace_csv(trace: &IterationTrace) -> Result<Vec<u8>> {
    let shape = trace.best_profile.shape();
    let mut w = csv_writer();
    w.write_record(trace_header(&shape))?;
    for ((t, sums), profile) in trace.steps.iter().zip(&trace.regret_sums).zip(&trace.profiles) {
        let mut row = vec![t.to_string()];
        row.extend(sums.iter().map(|&x| fmt_f64(x)));
        for s in profile.strategies() {
            row.extend(s.weights().iter().map(|&x| fmt_f64(x)));
        }
        w.write_record(&row)?;
    }
    finish(w)
}

/// A trace as read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub steps: Vec<usize>,
    pub regret_sums: Vec<Vec<f64>>,
    pub profiles: Vec<StrategyProfile>,
}

impl TraceTable {
    pub fn shape(&self) -> Vec<usize> {
        self.profiles.first().map(|p| p.shape()).unwrap_or_default()
    }

    /// One player's strategy sequence.
    pub fn player_path(&self, player: usize) -> Result<Vec<MixedStrategy>> {
        let n = self.shape().len();
        if player >= n {
            return Err(Error::PlayerOutOfRange { player, num_players: n });
        }
        Ok(self.profiles.iter().map(|p| p.strategy(player).clone()).collect())
    }
}

/// Shape implied by a trace header; rejects anything but the exact layout
/// written by [`trace_csv`].
fn shape_from_header(header: &csv::StringRecord) -> Result<Vec<usize>> {
    let cols: Vec<&str> = header.iter().collect();
    if cols.first() != Some(&"t") {
        return Err(Error::parse("header", "first column must be `t`"));
    }
    let n = cols[1..].iter().take_while(|c| c.starts_with("rs_")).count();
    if n == 0 {
        return Err(Error::parse("header", "no regret-sum columns"));
    }
    let mut shape = vec![0usize; n];
    for c in &cols[1 + n..] {
        let parsed = c
            .strip_prefix('s')
            .and_then(|rest| rest.split_once('_'))
            .and_then(|(i, j)| Some((i.parse::<usize>().ok()?, j.parse::<usize>().ok()?)));
        let Some((i, _)) = parsed else {
            return Err(Error::parse("header", format!("unexpected column `{c}`")));
        };
        if i == 0 || i > n {
            return Err(Error::parse("header", format!("column `{c}` names a missing player")));
        }
        shape[i - 1] += 1;
    }
    if shape.iter().any(|&g| g < 2) {
        return Err(Error::parse(
            "header",
            "every player needs at least two strategy columns",
        ));
    }
    let want = trace_header(&shape);
    if cols != want.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::parse("header", "columns are not in the documented order"));
    }
    Ok(shape)
}

/// Strict reader for trace CSV.
pub fn read_trace_csv(reader: impl Read) -> Result<TraceTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let shape = shape_from_header(rdr.headers()?)?;
    let n = shape.len();
    let mut table = TraceTable {
        steps: Vec::new(),
        regret_sums: Vec::new(),
        profiles: Vec::new(),
    };
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let row = line + 1;
        let field = |k: usize| format!("row {row}, column {k}");
        let t = record
            .get(0)
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::parse(field(0), "step is not an integer"))?;
        if table.steps.last().is_some_and(|&prev| t <= prev) {
            return Err(Error::parse(field(0), "steps are not increasing"));
        }
        let values = (1..record.len())
            .map(|k| {
                record[k]
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::parse(field(k), format!("`{}` is not a finite number", &record[k])))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut offset = n;
        let mut strategies = Vec::with_capacity(n);
        for (i, &g) in shape.iter().enumerate() {
            let w = values[offset..offset + g].to_vec();
            offset += g;
            strategies.push(
                MixedStrategy::new(w)
                    .map_err(|e| Error::parse(format!("row {row}, player {}", i + 1), e.to_string()))?,
            );
        }
        table.steps.push(t);
        table.regret_sums.push(values[..n].to_vec());
        table.profiles.push(StrategyProfile::new(strategies));
    }
    if table.steps.is_empty() {
        return Err(Error::parse("trace", "no data rows"));
    }
    Ok(table)
}

/// Metric CSV: `t, d_dot, q_dot`. Row `t` holds the step length from
/// profile `t` to `t + 1` and its ratio to the previous step length; the
/// ratio is empty on the first row and where it is undefined.
pub fn metrics_csv(metrics: &MetricTrace) -> Result<Vec<u8>> {
    let mut w = csv_writer();
    w.write_record(["t", "d_dot", "q_dot"])?;
    for (t, &d) in metrics.d_dot.iter().enumerate() {
        let q = match t.checked_sub(1).map(|k| metrics.q_dot[k]) {
            Some(q) if q.is_finite() => fmt_f64(q),
            _ => String::new(),
        };
        w.write_record([t.to_string(), fmt_f64(d), q])?;
    }
    finish(w)
}

/// Strict reader for metric CSV; returns `(d_dot, q_dot)` with `q_dot` in
/// the in-memory alignment (NaN where undefined).
pub fn read_metrics_csv(reader: impl Read) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_reader(reader);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["t", "d_dot", "q_dot"] {
        return Err(Error::parse("header", "expected `t,d_dot,q_dot`"));
    }
    let (mut d, mut q) = (Vec::new(), Vec::new());
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        if record.get(0) != Some(row.to_string().as_str()) {
            return Err(Error::parse(format!("row {}", row + 1), "steps must count up from 0"));
        }
        let dv = record[1]
            .parse::<f64>()
            .map_err(|_| Error::parse(format!("row {}, d_dot", row + 1), "not a number"))?;
        d.push(dv);
        let qs = &record[2];
        if row == 0 {
            if !qs.is_empty() {
                return Err(Error::parse("row 1, q_dot", "must be empty"));
            }
        } else if qs.is_empty() {
            q.push(f64::NAN);
        } else {
            q.push(
                qs.parse::<f64>()
                    .map_err(|_| Error::parse(format!("row {}, q_dot", row + 1), "not a number"))?,
            );
        }
    }
    Ok((d, q))
}

/// Sweep CSV: parameter columns, `rs_1..rs_n`, `rs_total`, `best_step`.
pub fn sweep_csv(result: &SweepResult) -> Result<Vec<u8>> {
    let n = result.rows.first().map_or(0, |r| r.best_regret_sums.len());
    let mut header = result.param_names.clone();
    header.extend((1..=n).map(|i| format!("rs_{i}")));
    header.push("rs_total".into());
    header.push("best_step".into());
    let mut w = csv_writer();
    w.write_record(&header)?;
    for row in &result.rows {
        let mut rec: Vec<String> = row.params.iter().map(|&x| fmt_f64(x)).collect();
        rec.extend(row.best_regret_sums.iter().map(|&x| fmt_f64(x)));
        rec.push(fmt_f64(row.best_total));
        rec.push(row.best_step.to_string());
        w.write_record(&rec)?;
    }
    finish(w)
}

/// Basin CSV: `seed, converged, rs_total, eq_index, eq_distance`; the
/// equilibrium columns are empty when no oracle applies.
pub fn basin_csv(report: &BasinReport) -> Result<Vec<u8>> {
    let mut w = csv_writer();
    w.write_record(["seed", "converged", "rs_total", "eq_index", "eq_distance"])?;
    for e in &report.entries {
        let (idx, dist) = match e.nearest {
            Some((i, d)) => (i.to_string(), fmt_f64(d)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            e.seed.map(|s| s.to_string()).unwrap_or_default(),
            e.converged.to_string(),
            fmt_f64(e.best_total),
            idx,
            dist,
        ])?;
    }
    finish(w)
}

/// Path CSV: `t, x, y[, z]`, with `t` taken from `steps`.
pub fn path_csv(path: &PlanarPath, steps: &[usize]) -> Result<Vec<u8>> {
    if steps.len() != path.points.len() {
        return Err(Error::Shape(format!(
            "{} steps for {} points",
            steps.len(),
            path.points.len()
        )));
    }
    let mut header = vec!["t", "x", "y"];
    if path.dim == 3 {
        header.push("z");
    }
    let mut w = csv_writer();
    w.write_record(&header)?;
    for (t, p) in steps.iter().zip(&path.points) {
        let mut rec = vec![t.to_string()];
        rec.extend(p.iter().map(|&x| fmt_f64(x)));
        w.write_record(&rec)?;
    }
    finish(w)
}

/// Contents of the sidecar file written next to a PCA path CSV.
pub fn path_sidecar(path: &PlanarPath) -> Option<String> {
    let ratio = path.captured_variance?;
    let mut s = String::new();
    writeln!(s, "captured_variance={ratio}").unwrap();
    writeln!(s, "degenerate={}", path.degenerate).unwrap();
    Some(s)
}
