use serde::{Deserialize, Serialize};

use super::ustats::UStats;
use super::EstimatorConfig;
use crate::error::{Error, Result};

/// Final estimates may leave `[0, 1]` by this much before they are
/// rejected; moment estimators legitimately overshoot in small samples.
pub const REGION_SLACK: f64 = 0.05;

const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub delta_hat: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The initializer actually used.
    pub alpha0: f64,
}

/// One sweep of the update triple from the current `α`.
fn update(u: &UStats, a0: f64) -> Result<(f64, f64, f64)> {
    let (u1, u2, u3) = (u.u1_hat, u.u2_hat, u.u3_hat);
    let gap = u1 - a0;
    if gap.abs() < SINGULAR_TOL {
        return Err(Error::SingularIterate(format!("u1_hat - alpha = {gap:e}")));
    }
    let beta = (u2 - a0 + u1 * a0) / gap;
    let denom = u1 - u2 - 2.0 * u1 * a0 + a0 * a0;
    if denom.abs() < SINGULAR_TOL {
        return Err(Error::SingularIterate(format!("delta denominator = {denom:e}")));
    }
    let delta = gap * gap / denom;
    let scale = (1.0 - delta) * (1.0 - a0) * (1.0 - a0);
    if scale.abs() < SINGULAR_TOL {
        return Err(Error::SingularIterate(format!(
            "(1 - delta)(1 - alpha)^2 = {scale:e}"
        )));
    }
    let alpha = (u3 - delta * beta * beta * (1.0 - beta)) / scale;
    if !(alpha.is_finite() && beta.is_finite() && delta.is_finite()) {
        return Err(Error::SingularIterate("non-finite iterate".into()));
    }
    Ok((alpha, beta, delta))
}

fn in_region(x: f64) -> bool {
    (-REGION_SLACK..=1.0 + REGION_SLACK).contains(&x)
}

/// Solves the moment equations for `(α, β, δ)` by iterating the update on
/// `α` until successive values differ by at most `epsilon`.
pub fn solve_fixed_point(us: &UStats, cfg: &EstimatorConfig) -> Result<FixedPoint> {
    cfg.validate()?;
    let start = cfg.alpha0.unwrap_or(us.u2_hat);
    let mut alpha = start;
    let mut a0 = alpha + 10.0 * cfg.epsilon;
    let (mut beta, mut delta) = (f64::NAN, f64::NAN);
    let mut iterations = 0;
    while (alpha - a0).abs() > cfg.epsilon {
        if iterations == cfg.max_iterations {
            return Err(Error::Divergence { iterations });
        }
        a0 = alpha;
        (alpha, beta, delta) = update(us, a0)?;
        iterations += 1;
    }
    if !(in_region(alpha) && in_region(beta) && in_region(delta)) {
        return Err(Error::InvalidRegion { alpha, beta, delta });
    }
    Ok(FixedPoint {
        alpha_hat: alpha,
        beta_hat: beta,
        delta_hat: delta,
        iterations,
        converged: true,
        alpha0: start,
    })
}
