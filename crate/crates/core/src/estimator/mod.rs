//! Three-replicate method-of-moments estimation of the error rates, the
//! true edge density and κ, with a bootstrap variance and normal
//! confidence intervals.

mod epi;
mod fixed_point;
mod ustats;
mod variance;

pub use epi::{reproduction_number, thresholds, Derived, EpiParams, Reproduction, Thresholds};
pub use fixed_point::{solve_fixed_point, FixedPoint, REGION_SLACK};
pub use ustats::{u_stats, UStats};
pub use variance::{
    delta_matrix, g_matrix, h_matrix, kappa_variance, perturbation_law, sigma_matrix, Mat2, Mat2x3,
    Mat3, VarianceWorkspace,
};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::replicates::ReplicateSet;
use crate::rng::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Fixed-point initializer; `None` starts from `û₂`.
    pub alpha0: Option<f64>,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub n_bootstrap: usize,
    pub confidence_level: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            alpha0: None,
            epsilon: 1e-8,
            max_iterations: 500,
            n_bootstrap: 1000,
            confidence_level: 0.95,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if self.max_iterations < 1 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if self.n_bootstrap < 2 {
            return Err(Error::invalid("n_bootstrap must be at least 2"));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::invalid("confidence_level must lie in (0, 1)"));
        }
        if let Some(a) = self.alpha0 {
            crate::error::check_probability("alpha0", a)?;
        }
        Ok(())
    }
}

/// Point estimates, and after [`estimate`] their uncertainty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub n: usize,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub delta_hat: f64,
    pub k3_hat: f64,
    pub c1_hat: f64,
    pub c2_hat: f64,
    pub kappa_hat: f64,
    pub variance_hat: Option<f64>,
    pub ci: Option<[f64; 2]>,
    pub alpha_ci: Option<[f64; 2]>,
    pub beta_ci: Option<[f64; 2]>,
    pub confidence_level: f64,
    pub converged: bool,
    pub iterations: usize,
    pub u: UStats,
    pub warnings: Vec<String>,
}

/// Point estimate of κ from the first three replicates. The edge and
/// two-star densities are taken from the first replicate only.
pub fn kappa_mme(reps: &ReplicateSet, cfg: &EstimatorConfig) -> Result<KappaEstimate> {
    reps.require(3)?;
    let n = reps.n();
    if n < 3 {
        return Err(Error::TooFewVertices { needed: 3, got: n });
    }
    let mut warnings = Vec::new();
    if reps.len() > 3 {
        warnings.push(format!("{} replicates supplied; only the first three are used", reps.len()));
    }
    let u = u_stats(reps)?;
    let fp = solve_fixed_point(&u, cfg)?;
    let (a, b) = (fp.alpha_hat, fp.beta_hat);
    let k3 = 1.0 - a - b;
    if k3 <= 0.0 {
        return Err(Error::NonPositiveK3(k3));
    }
    let nf = n as f64;
    let c1 = (u.u1_hat - a) / k3;
    if c1 <= 0.0 {
        return Err(Error::DegenerateDensity(c1));
    }
    let c2 = reps.first().centered_two_star_sum(a)? / (k3 * k3 * nf * (nf - 1.0) * (nf - 2.0));
    Ok(KappaEstimate {
        n,
        alpha_hat: a,
        beta_hat: b,
        delta_hat: fp.delta_hat,
        k3_hat: k3,
        c1_hat: c1,
        c2_hat: c2,
        kappa_hat: (nf - 2.0) * c2 / c1 + 1.0,
        variance_hat: None,
        ci: None,
        alpha_ci: None,
        beta_ci: None,
        confidence_level: cfg.confidence_level,
        converged: fp.converged,
        iterations: fp.iterations,
        u,
        warnings,
    })
}

fn normal_quantile(level: f64) -> f64 {
    Normal::standard().inverse_cdf((1.0 + level) / 2.0)
}

/// `center ± z · √variance` at two-sided coverage `level`.
pub fn normal_interval(center: f64, variance: f64, level: f64) -> Result<[f64; 2]> {
    if variance < 0.0 || variance.is_nan() {
        return Err(Error::NegativeVariance(variance));
    }
    let half = normal_quantile(level) * variance.sqrt();
    Ok([center - half, center + half])
}

/// Normal-approximation interval for κ at the configured level.
pub fn confidence_interval(est: &KappaEstimate, cfg: &EstimatorConfig) -> Result<[f64; 2]> {
    let var = est
        .variance_hat
        .ok_or_else(|| Error::invalid("estimate has no variance"))?;
    normal_interval(est.kappa_hat, var, cfg.confidence_level)
}

/// Point estimates, bootstrap variance and intervals for κ, α and β.
pub fn estimate(reps: &ReplicateSet, cfg: &EstimatorConfig, seed: Seed) -> Result<KappaEstimate> {
    Ok(estimate_with_workspace(reps, cfg, seed)?.0)
}

pub fn estimate_with_workspace(
    reps: &ReplicateSet,
    cfg: &EstimatorConfig,
    seed: Seed,
) -> Result<(KappaEstimate, VarianceWorkspace)> {
    let mut est = kappa_mme(reps, cfg)?;
    let (var, ws) = kappa_variance(reps, &est, cfg, seed)?;
    est.variance_hat = Some(var);
    est.ci = Some(confidence_interval(&est, cfg)?);
    let level = cfg.confidence_level;
    est.alpha_ci = Some(normal_interval(est.alpha_hat, ws.var_alpha(), level)?);
    est.beta_ci = Some(normal_interval(est.beta_hat, ws.var_beta(), level)?);
    est.warnings.extend(ws.warnings.iter().cloned());
    Ok((est, ws))
}
