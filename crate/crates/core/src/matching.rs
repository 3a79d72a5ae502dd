//! Geometrical regret matching: the smooth strategy update that pulls a mixed
//! strategy toward its regret vector, its generalization with componentwise
//! transforms and state-dependent rates, and the convex-combination variant
//! that pulls a state toward an arbitrary target on the simplex.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::MixedStrategy;

/// Transform applied to each regret component before the update.
/// Every preset maps 0 to 0 and is non-negative on `[0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Alpha {
    Identity,
    /// `x^k`, `k > 0`.
    Power(f64),
    /// `max(0, x - c)`, `c >= 0`.
    Deadzone(f64),
}

impl Alpha {
    pub fn power(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power exponent must be positive and finite, got {k}"
            )));
        }
        Ok(Alpha::Power(k))
    }

    pub fn deadzone(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "deadzone threshold must be non-negative, got {c} (alpha(0) would be nonzero)"
            )));
        }
        Ok(Alpha::Deadzone(c))
    }

    fn validate(self) -> Result<Self> {
        match self {
            Alpha::Identity => Ok(self),
            Alpha::Power(k) => Alpha::power(k),
            Alpha::Deadzone(c) => Alpha::deadzone(c),
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Alpha::Identity => x,
            Alpha::Power(k) => x.powf(k),
            Alpha::Deadzone(c) => (x - c).max(0.0),
        }
    }
}

/// Adjustment rate, possibly depending on the current profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Rate {
    Constant(f64),
    /// `c / (1 + total regret sum of the profile)`.
    Damped(f64),
}

impl Rate {
    pub fn constant(r: f64) -> Result<Self> {
        check_rate(r)?;
        Ok(Rate::Constant(r))
    }

    pub fn damped(c: f64) -> Result<Self> {
        check_rate(c)?;
        Ok(Rate::Damped(c))
    }

    fn validate(self) -> Result<Self> {
        match self {
            Rate::Constant(r) => Rate::constant(r),
            Rate::Damped(c) => Rate::damped(c),
        }
    }

    pub fn value(self, ctx: &UpdateContext) -> f64 {
        match self {
            Rate::Constant(r) => r,
            Rate::Damped(c) => c / (1.0 + ctx.profile_regret_total),
        }
    }
}

fn check_rate(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "adjustment rate must be positive and finite, got {r}"
        )));
    }
    Ok(())
}

/// Target state for the convex-combination update.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Target {
    /// Softmax of the vertex payoffs at temperature `tau`.
    Softmax(f64),
    Uniform,
    /// A fixed pure strategy.
    Vertex(usize),
}

impl Target {
    pub fn softmax(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "softmax temperature must be positive, got {tau}"
            )));
        }
        Ok(Target::Softmax(tau))
    }

    pub fn evaluate(&self, vertex_payoffs: &[f64]) -> Result<MixedStrategy> {
        let g = vertex_payoffs.len();
        match *self {
            Target::Softmax(tau) => Ok(softmax(vertex_payoffs, tau)),
            Target::Uniform => Ok(MixedStrategy::uniform(g)),
            Target::Vertex(j) if j < g => Ok(MixedStrategy::vertex(g, j)),
            Target::Vertex(j) => Err(Error::Shape(format!(
                "target vertex {j} out of range for {g} strategies"
            ))),
        }
    }
}

/// `exp(v_j / tau)` normalized, computed with the maximum subtracted.
pub fn softmax(values: &[f64], tau: f64) -> MixedStrategy {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = values.iter().map(|v| ((v - max) / tau).exp()).collect();
    MixedStrategy::normalized(w).expect("softmax weights are positive")
}

/// Per-player update rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum UpdateRule {
    Standard { rate: Rate },
    Generalized { rate: Rate, alpha: Alpha },
    ConvexTarget { rate: Rate, target: Target },
}

impl UpdateRule {
    pub fn standard(r: f64) -> Result<Self> {
        Ok(UpdateRule::Standard {
            rate: Rate::constant(r)?,
        })
    }

    pub fn generalized(rate: Rate, alpha: Alpha) -> Result<Self> {
        Ok(UpdateRule::Generalized {
            rate: rate.validate()?,
            alpha: alpha.validate()?,
        })
    }

    pub fn convex(rate: Rate, target: Target) -> Result<Self> {
        if let Target::Softmax(tau) = target {
            Target::softmax(tau)?;
        }
        Ok(UpdateRule::ConvexTarget {
            rate: rate.validate()?,
            target,
        })
    }

    pub fn rate(&self) -> Rate {
        match self {
            UpdateRule::Standard { rate }
            | UpdateRule::Generalized { rate, .. }
            | UpdateRule::ConvexTarget { rate, .. } => *rate,
        }
    }

    /// Re-checks parameters of a rule built directly from its variants.
    pub fn validate(&self) -> Result<()> {
        match self {
            UpdateRule::Standard { rate } => rate.validate().map(drop),
            UpdateRule::Generalized { rate, alpha } => {
                rate.validate()?;
                alpha.validate().map(drop)
            }
            UpdateRule::ConvexTarget { rate, target } => {
                rate.validate()?;
                if let Target::Softmax(tau) = target {
                    Target::softmax(*tau)?;
                }
                Ok(())
            }
        }
    }

    /// Updates one player's strategy given its regret vector and context.
    pub fn apply(&self, strategy: &MixedStrategy, regret: &[f64], ctx: &UpdateContext) -> Result<MixedStrategy> {
        match self {
            UpdateRule::Standard { rate } => psi_update(strategy, regret, rate.value(ctx)),
            UpdateRule::Generalized { .. } => psi_update_general(strategy, regret, self, ctx),
            UpdateRule::ConvexTarget { rate, target } => {
                let t = target.evaluate(ctx.vertex_payoffs)?;
                convex_update(strategy, &t, rate.value(ctx))
            }
        }
    }
}

/// Information beyond the player's own regret that a rule may consult.
#[derive(Debug, Clone, Copy)]
pub struct UpdateContext<'a> {
    pub vertex_payoffs: &'a [f64],
    /// Sum of all players' regret sums at the current profile.
    pub profile_regret_total: f64,
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Constant(r) => write!(f, "{r}"),
            Rate::Damped(c) => write!(f, "damped:{c}"),
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Identity => write!(f, "identity"),
            Alpha::Power(k) => write!(f, "power:{k}"),
            Alpha::Deadzone(c) => write!(f, "deadzone:{c}"),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Softmax(tau) => write!(f, "softmax:{tau}"),
            Target::Uniform => write!(f, "uniform"),
            Target::Vertex(j) => write!(f, "vertex:{j}"),
        }
    }
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpdateRule::Standard { rate } => write!(f, "standard:r={rate}"),
            UpdateRule::Generalized { rate, alpha } => write!(f, "general:r={rate},alpha={alpha}"),
            UpdateRule::ConvexTarget { rate, target } => {
                write!(f, "convex:r={rate},target={target}")
            }
        }
    }
}

fn parse_number(field: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(field, format!("`{text}` is not a number")))
}

fn parse_rate(text: &str) -> Result<Rate> {
    match text.split_once(':') {
        None => Rate::constant(parse_number("r", text)?),
        Some(("constant", v)) => Rate::constant(parse_number("r", v)?),
        Some(("damped", v)) => Rate::damped(parse_number("r", v)?),
        Some((kind, _)) => Err(Error::parse("r", format!("unknown rate function `{kind}`"))),
    }
}

fn parse_alpha(text: &str) -> Result<Alpha> {
    match text.split_once(':') {
        None if text == "identity" => Ok(Alpha::Identity),
        Some(("power", v)) => Alpha::power(parse_number("alpha", v)?),
        Some(("deadzone", v)) => Alpha::deadzone(parse_number("alpha", v)?),
        _ => Err(Error::parse("alpha", format!("unknown alpha preset `{text}`"))),
    }
}

fn parse_target(text: &str) -> Result<Target> {
    match text.split_once(':') {
        None if text == "uniform" => Ok(Target::Uniform),
        Some(("softmax", v)) => Target::softmax(parse_number("target", v)?),
        Some(("vertex", v)) => v
            .trim()
            .parse::<usize>()
            .map(Target::Vertex)
            .map_err(|_| Error::parse("target", format!("`{v}` is not a vertex index"))),
        _ => Err(Error::parse("target", format!("unknown target map `{text}`"))),
    }
}

/// Grammar: `VARIANT:key=value[,key=value...]` with variants `standard`,
/// `general` and `convex`, e.g. `general:r=0.05,alpha=power:2`.
impl FromStr for UpdateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (variant, params) = s.split_once(':').unwrap_or((s, ""));
        let mut rate = None;
        let mut alpha = None;
        let mut target = None;
        for item in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::parse("rule", format!("expected key=value, got `{item}`")))?;
            let slot_taken = match key.trim() {
                "r" => rate.replace(parse_rate(value.trim())?).is_some(),
                "alpha" => alpha.replace(parse_alpha(value.trim())?).is_some(),
                "target" => target.replace(parse_target(value.trim())?).is_some(),
                other => return Err(Error::parse("rule", format!("unknown key `{other}`"))),
            };
            if slot_taken {
                return Err(Error::parse("rule", format!("duplicate key `{}`", key.trim())));
            }
        }
        let rate = rate.ok_or_else(|| Error::parse("r", "missing adjustment rate"))?;
        match variant {
            "standard" => {
                if alpha.is_some() || target.is_some() {
                    return Err(Error::parse("rule", "standard rule takes only `r`"));
                }
                Ok(UpdateRule::Standard { rate })
            }
            "general" => {
                if target.is_some() {
                    return Err(Error::parse("target", "only valid for the convex rule"));
                }
                UpdateRule::generalized(rate, alpha.unwrap_or(Alpha::Identity))
            }
            "convex" => {
                if alpha.is_some() {
                    return Err(Error::parse("alpha", "only valid for the general rule"));
                }
                let target = target.ok_or_else(|| Error::parse("target", "missing target map"))?;
                UpdateRule::convex(rate, target)
            }
            other => Err(Error::parse("rule", format!("unknown variant `{other}`"))),
        }
    }
}

fn check_update_inputs(strategy: &MixedStrategy, regret: &[f64], rate: f64) -> Result<()> {
    check_rate(rate)?;
    if regret.len() != strategy.len() {
        return Err(Error::Shape(format!(
            "regret vector of length {} for a strategy of length {}",
            regret.len(),
            strategy.len()
        )));
    }
    if let Some(x) = regret.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "regret components must be non-negative and finite, got {x}"
        )));
    }
    Ok(())
}

/// `(s + r*pull) / (1 + r*|pull|)` followed by renormalization.
fn pull_toward(strategy: &MixedStrategy, pull: &[f64], rate: f64) -> Result<MixedStrategy> {
    let total: f64 = pull.iter().sum();
    if total == 0.0 {
        return Ok(strategy.clone());
    }
    let denom = 1.0 + rate * total;
    let w = strategy
        .weights()
        .iter()
        .zip(pull)
        .map(|(s, l)| (s + rate * l) / denom)
        .collect();
    MixedStrategy::normalized(w)
}

/// The regret-matching update `(s + r*lambda) / (1 + r*|lambda|)`.
pub fn psi_update(strategy: &MixedStrategy, regret: &[f64], rate: f64) -> Result<MixedStrategy> {
    check_update_inputs(strategy, regret, rate)?;
    pull_toward(strategy, regret, rate)
}

/// The generalized update: regret components pass through the rule's alpha
/// transform and the rate may depend on the profile. `Standard` rules are
/// accepted and behave as the identity transform with their own rate.
pub fn psi_update_general(
    strategy: &MixedStrategy,
    regret: &[f64],
    rule: &UpdateRule,
    ctx: &UpdateContext,
) -> Result<MixedStrategy> {
    let (rate, alpha) = match rule {
        UpdateRule::Generalized { rate, alpha } => (rate.value(ctx), *alpha),
        UpdateRule::Standard { rate } => (rate.value(ctx), Alpha::Identity),
        UpdateRule::ConvexTarget { .. } => {
            return Err(Error::InvalidParameter(
                "psi_update_general needs a standard or generalized rule".into(),
            ))
        }
    };
    check_update_inputs(strategy, regret, rate)?;
    let transformed: Vec<f64> = regret.iter().map(|&x| alpha.apply(x)).collect();
    pull_toward(strategy, &transformed, rate)
}

/// Convex combination `s/(1+r) + r*target/(1+r)`; the distance to `target`
/// shrinks by exactly `1/(1+r)`.
pub fn convex_update(state: &MixedStrategy, target: &MixedStrategy, rate: f64) -> Result<MixedStrategy> {
    check_rate(rate)?;
    if state.len() != target.len() {
        return Err(Error::Shape(format!(
            "state of length {} and target of length {}",
            state.len(),
            target.len()
        )));
    }
    let keep = 1.0 / (1.0 + rate);
    let move_ = rate / (1.0 + rate);
    let w = state
        .weights()
        .iter()
        .zip(target.weights())
        .map(|(s, t)| keep * s + move_ * t)
        .collect();
    MixedStrategy::normalized(w)
}

/// Cosine of the angle between two nonzero vectors, clamped to `[-1, 1]`.
pub fn cosine_angle(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Shape(format!("vectors of length {} and {}", u.len(), v.len())));
    }
    let nu = l2_norm(u);
    let nv = l2_norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::InvalidParameter("cosine of a zero vector".into()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
