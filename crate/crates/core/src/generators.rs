//! Seeded random-graph generators: Erdős–Rényi, preferential attachment
//! and an erased configuration model with truncated-Pareto degrees.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::graph::{Graph, Vertex};
use crate::rng::Seed;

/// `G(n, p)`. Uses geometric skipping over the pair sequence, so the cost
/// is `O(n + |E|)`.
pub fn erdos_renyi(n: usize, p: f64, seed: Seed) -> Result<Graph> {
    check_probability("p", p)?;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if p == 0.0 {
        return Ok(Graph::empty(n));
    }
    if p == 1.0 {
        return Ok(Graph::complete(n));
    }
    let mut rng = seed.rng();
    let log_q = (1.0 - p).ln();
    let mut adjacency: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    // Pairs (v, w) with w < v, enumerated row by row.
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            adjacency[v].push(w as Vertex);
            adjacency[w as usize].push(v as Vertex);
        }
    }
    Ok(Graph::from_raw_adjacency(adjacency))
}

/// Barabási–Albert growth from an `(m+1)`-clique: each new vertex attaches
/// `m` distinct edges to existing vertices chosen with probability
/// proportional to their current degree.
pub fn preferential_attachment(n: usize, m: usize, seed: Seed) -> Result<Graph> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    if n <= m + 1 {
        return Err(Error::invalid(format!(
            "preferential attachment needs n > m + 1 (n = {n}, m = {m})"
        )));
    }
    let mut rng = seed.rng();
    let mut adjacency: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    // every edge endpoint, so a uniform pick is degree-proportional
    let mut endpoints: Vec<Vertex> = Vec::with_capacity(2 * (m * (m + 1) / 2 + (n - m - 1) * m));
    for i in 0..=m {
        for j in i + 1..=m {
            adjacency[i].push(j as Vertex);
            adjacency[j].push(i as Vertex);
            endpoints.push(i as Vertex);
            endpoints.push(j as Vertex);
        }
    }
    let mut targets: Vec<Vertex> = Vec::with_capacity(m);
    for v in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            adjacency[v].push(t);
            adjacency[t as usize].push(v as Vertex);
            endpoints.push(v as Vertex);
            endpoints.push(t);
        }
    }
    Ok(Graph::from_raw_adjacency(adjacency))
}

/// Truncated Pareto law with density
/// `ζ d_L^ζ x^-(ζ+1) / (1 - (d_L/upper)^ζ)` on `[d_L, upper]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoConfig {
    pub shape: f64,
    pub lower_bound: f64,
    pub upper_bound: usize,
}

impl ParetoConfig {
    pub fn new(shape: f64, lower_bound: f64, upper_bound: usize) -> Result<Self> {
        let cfg = ParetoConfig {
            shape,
            lower_bound,
            upper_bound,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Shape `ζ` with `d_L` solved so the law has mean `mean_degree` on
    /// `[d_L, n-1]`.
    pub fn with_mean_degree(n: usize, shape: f64, mean_degree: f64) -> Result<Self> {
        let lower = solve_pareto_lower_bound(n, shape, mean_degree)?;
        ParetoConfig::new(shape, lower, n - 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape > 0.0 && self.shape.is_finite()) {
            return Err(Error::invalid(format!("shape {} must be positive", self.shape)));
        }
        if !(self.lower_bound > 0.0 && self.lower_bound <= self.upper_bound as f64) {
            return Err(Error::invalid(format!(
                "lower bound {} must lie in (0, {}]",
                self.lower_bound, self.upper_bound
            )));
        }
        Ok(())
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let lo = self.lower_bound;
        let hi = self.upper_bound as f64;
        if lo >= hi {
            return hi;
        }
        let tail = (lo / hi).powf(self.shape);
        let u: f64 = rng.random();
        let x = lo * (1.0 - u * (1.0 - tail)).powf(-1.0 / self.shape);
        x.clamp(lo, hi)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let lo = self.lower_bound;
        let hi = self.upper_bound as f64;
        if x < lo {
            0.0
        } else if x >= hi {
            1.0
        } else {
            (1.0 - (lo / x).powf(self.shape)) / (1.0 - (lo / hi).powf(self.shape))
        }
    }

    pub fn mean(&self) -> f64 {
        truncated_pareto_mean(self.shape, self.lower_bound, self.upper_bound as f64)
    }
}

/// Closed-form mean of the truncated Pareto law on `[lo, hi]`.
pub fn truncated_pareto_mean(shape: f64, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return hi;
    }
    let ratio = lo / hi;
    let denom = 1.0 - ratio.powf(shape);
    if (shape - 1.0).abs() < 1e-9 {
        shape * lo.powf(shape) * (hi.ln() - lo.ln()) / denom
    } else {
        shape * lo / (shape - 1.0) * (1.0 - ratio.powf(shape - 1.0)) / denom
    }
}

/// The `d_L` at which the truncated Pareto law on `[d_L, n-1]` has mean
/// `target_mean_degree`, found by bisection (the mean is increasing in
/// `d_L`).
pub fn solve_pareto_lower_bound(n: usize, zeta: f64, target_mean_degree: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewVertices { needed: 2, got: n });
    }
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::invalid(format!("shape {zeta} must be positive")));
    }
    let hi = (n - 1) as f64;
    if !(target_mean_degree > 0.0 && target_mean_degree <= hi) {
        return Err(Error::UnachievableTarget {
            target: target_mean_degree,
            max: hi,
        });
    }
    if target_mean_degree == hi {
        return Ok(hi);
    }
    let mean_at = |lo: f64| truncated_pareto_mean(zeta, lo, hi);
    let mut lo_bracket = f64::MIN_POSITIVE;
    let mut hi_bracket = target_mean_degree.min(hi);
    if mean_at(lo_bracket) > target_mean_degree {
        return Err(Error::UnachievableTarget {
            target: target_mean_degree,
            max: hi,
        });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo_bracket + hi_bracket);
        if mean_at(mid) < target_mean_degree {
            lo_bracket = mid;
        } else {
            hi_bracket = mid;
        }
        if (hi_bracket - lo_bracket) <= 1e-14 * hi_bracket {
            break;
        }
    }
    Ok(0.5 * (lo_bracket + hi_bracket))
}

/// Target degrees for the configuration model: i.i.d. truncated-Pareto
/// draws rounded half-up, with one uniformly chosen vertex adjusted by one
/// if the sum is odd.
pub fn pareto_degree_sequence(n: usize, cfg: &ParetoConfig, seed: Seed) -> Result<Vec<u32>> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::TooFewVertices { needed: 2, got: n });
    }
    if cfg.upper_bound > n - 1 {
        return Err(Error::invalid(format!(
            "upper bound {} exceeds n - 1 = {}",
            cfg.upper_bound,
            n - 1
        )));
    }
    let mut rng = seed.rng();
    let mut degrees: Vec<u32> = (0..n)
        .map(|_| (cfg.sample(&mut rng) + 0.5).floor() as u32)
        .collect();
    let total: u64 = degrees.iter().map(|&d| d as u64).sum();
    if total % 2 == 1 {
        let v = rng.random_range(0..n);
        if (degrees[v] as usize) < n - 1 {
            degrees[v] += 1;
        } else {
            degrees[v] -= 1;
        }
    }
    Ok(degrees)
}

/// Erased configuration model: stubs are paired uniformly at random, then
/// self-loops are dropped and parallel edges collapsed.
pub fn configuration_model(degrees: &[u32], seed: Seed) -> Result<Graph> {
    let total: u64 = degrees.iter().map(|&d| d as u64).sum();
    if total % 2 == 1 {
        return Err(Error::invalid("degree sum must be even"));
    }
    let mut stubs: Vec<Vertex> = Vec::with_capacity(total as usize);
    for (v, &d) in degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(v as Vertex, d as usize));
    }
    let mut rng = seed.rng();
    stubs.shuffle(&mut rng);
    let mut seen: HashSet<(Vertex, Vertex)> = HashSet::with_capacity(stubs.len() / 2);
    let mut adjacency: Vec<Vec<Vertex>> = vec![Vec::new(); degrees.len()];
    for pair in stubs.chunks_exact(2) {
        let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        if a != b && seen.insert((a, b)) {
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
    }
    Ok(Graph::from_raw_adjacency(adjacency))
}

/// Truncated-Pareto degrees wired by the erased configuration model.
pub fn pareto_configuration(n: usize, cfg: &ParetoConfig, seed: Seed) -> Result<Graph> {
    let degrees = pareto_degree_sequence(n, cfg, seed.derive(0))?;
    configuration_model(&degrees, seed.derive(1))
}
