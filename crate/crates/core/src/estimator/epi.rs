use serde::{Deserialize, Serialize};

use super::normal_interval;
use crate::error::{Error, Result};

/// Infection rate `theta`, recovery rate `gamma` and spreading rate `lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpiParams {
    pub theta: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl EpiParams {
    pub fn new(theta: f64, gamma: f64, lambda: f64) -> Result<Self> {
        for (name, v) in [("theta", theta), ("gamma", gamma), ("lambda", lambda)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} = {v} must be positive")));
            }
        }
        Ok(EpiParams { theta, gamma, lambda })
    }
}

/// A transformed quantity with its delta-method variance and interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub value: f64,
    pub variance: f64,
    pub ci: [f64; 2],
}

impl Derived {
    fn new(value: f64, slope: f64, var_kappa: f64, level: f64) -> Result<Self> {
        let variance = slope * slope * var_kappa;
        Ok(Derived {
            value,
            variance,
            ci: normal_interval(value, variance, level)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub r0: f64,
    pub var_r0: f64,
    pub ci: [f64; 2],
}

/// `R₀ = θ(κ-1)/(θ+γ)`, linear in κ so the delta method is exact.
pub fn reproduction_number(kappa: f64, var_kappa: f64, p: &EpiParams, level: f64) -> Result<Reproduction> {
    let slope = p.theta / (p.theta + p.gamma);
    let d = Derived::new(slope * (kappa - 1.0), slope, var_kappa, level)?;
    Ok(Reproduction {
        r0: d.value,
        var_r0: d.variance,
        ci: d.ci,
    })
}

/// Percolation and epidemic thresholds `1/(κ-1)` (absent when `κ ≤ 1`) and
/// immunization threshold `1 - 1/(λκ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub subcritical: bool,
    pub percolation: Option<Derived>,
    pub epidemic: Option<Derived>,
    pub immunization: Option<Derived>,
}

pub fn thresholds(kappa: f64, var_kappa: f64, lambda: f64, level: f64) -> Result<Thresholds> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::invalid(format!("lambda = {lambda} must be positive")));
    }
    let subcritical = kappa <= 1.0;
    let percolation = if subcritical {
        None
    } else {
        let m = kappa - 1.0;
        Some(Derived::new(1.0 / m, 1.0 / (m * m), var_kappa, level)?)
    };
    let immunization = if lambda * kappa > 0.0 {
        Some(Derived::new(
            1.0 - 1.0 / (lambda * kappa),
            1.0 / (lambda * kappa * kappa),
            var_kappa,
            level,
        )?)
    } else {
        None
    };
    Ok(Thresholds {
        subcritical,
        percolation,
        epidemic: percolation,
        immunization,
    })
}
