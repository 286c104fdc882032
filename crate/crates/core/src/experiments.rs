//! Monte Carlo harnesses: bias and variance of the naive branching factor of
//! noisy graphs, and accuracy and interval coverage of the estimator.
//!
//! Every random stream is derived from the configured seed, the cell index
//! and the draw index, and results are collected into indexed buffers, so the
//! output is identical for any size of the rayon pool.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics, Statistics};

use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorConfig};
use crate::generators::{erdos_renyi, pareto_configuration, preferential_attachment, ParetoConfig};
use crate::graph::{branching_factor_of_degrees, Graph};
use crate::moments::bias_leading_term;
use crate::noise::{perturbed_degrees, replicate, NoiseParams};
use crate::rng::{tag, Seed};

/// A random-graph family and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GeneratorSpec {
    Er { n: usize, p: f64 },
    Ba { n: usize, m: usize },
    Pareto { n: usize, zeta: f64, mean_degree: f64 },
}

impl GeneratorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorSpec::Er { .. } => "er",
            GeneratorSpec::Ba { .. } => "ba",
            GeneratorSpec::Pareto { .. } => "pareto",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            GeneratorSpec::Er { n, .. } | GeneratorSpec::Ba { n, .. } | GeneratorSpec::Pareto { n, .. } => n,
        }
    }

    pub fn generate(&self, seed: Seed) -> Result<Graph> {
        match *self {
            GeneratorSpec::Er { n, p } => erdos_renyi(n, p, seed),
            GeneratorSpec::Ba { n, m } => preferential_attachment(n, m, seed),
            GeneratorSpec::Pareto { n, zeta, mean_degree } => {
                pareto_configuration(n, &ParetoConfig::with_mean_degree(n, zeta, mean_degree)?, seed)
            }
        }
    }
}

/// `lo`/`hi` percentile-bootstrap interval for `stat` over `sample`.
/// Resample `b` draws from `seed.derive(b)`; quantiles use the
/// median-unbiased (type 8) rule.
pub fn percentile_bootstrap<F>(sample: &[f64], stat: F, resamples: usize, level: f64, seed: Seed) -> Result<[f64; 2]>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    use rand::Rng;
    if sample.is_empty() {
        return Err(Error::invalid("bootstrap sample is empty"));
    }
    if resamples < 2 {
        return Err(Error::invalid("need at least 2 bootstrap resamples"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("confidence level {level} is not in (0, 1)")));
    }
    let m = sample.len();
    let stats: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map_init(
            || vec![0.0; m],
            |buf, b| {
                let mut rng = seed.derive(b as u64).rng();
                for x in buf.iter_mut() {
                    *x = sample[rng.random_range(0..m)];
                }
                stat(buf)
            },
        )
        .collect();
    let mut data = Data::new(stats);
    let tail = (1.0 - level) / 2.0;
    Ok([data.quantile(tail), data.quantile(1.0 - tail)])
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().mean()
}

/// Sample variance with the `m - 1` divisor.
fn sample_variance(xs: &[f64]) -> f64 {
    xs.iter().variance()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasVarConfig {
    pub generator: GeneratorSpec,
    pub beta_grid: Vec<f64>,
    /// Noisy observations per cell.
    pub n_noisy: usize,
    pub bootstrap_reps: usize,
    pub confidence_level: f64,
    pub seed: Seed,
}

impl BiasVarConfig {
    pub fn new(generator: GeneratorSpec, beta_grid: Vec<f64>, n_noisy: usize, seed: Seed) -> Self {
        BiasVarConfig {
            generator,
            beta_grid,
            n_noisy,
            bootstrap_reps: 1000,
            confidence_level: 0.95,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_noisy < 2 {
            return Err(Error::invalid("n_noisy must be at least 2"));
        }
        if self.beta_grid.is_empty() {
            return Err(Error::invalid("beta_grid is empty"));
        }
        for &b in &self.beta_grid {
            crate::error::check_probability("beta", b)?;
        }
        if self.bootstrap_reps < 2 {
            return Err(Error::invalid("bootstrap_reps must be at least 2"));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::invalid("confidence_level must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasVarRow {
    pub family: String,
    pub n: usize,
    pub mean_degree: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa_true: f64,
    pub bias: f64,
    pub bias_ci_lo: f64,
    pub bias_ci_hi: f64,
    pub variance: f64,
    pub var_ci_lo: f64,
    pub var_ci_hi: f64,
    pub theory_bias: f64,
    pub n_noisy: usize,
    pub master_seed: u64,
    /// Stream of this cell; draw `t` uses `derive(PERTURB).derive(t)` on it.
    pub cell_stream: u64,
}

/// The true graph of a bias/variance study, drawn from `seed.derive(GENERATE)`.
pub fn bias_variance_graph(cfg: &BiasVarConfig) -> Result<Graph> {
    cfg.generator.generate(cfg.seed.derive(tag::GENERATE))
}

pub fn run_bias_variance(cfg: &BiasVarConfig) -> Result<Vec<BiasVarRow>> {
    cfg.validate()?;
    let g = bias_variance_graph(cfg)?;
    run_bias_variance_on(cfg, &g)
}

/// One row per β: the naive κ of `n_noisy` observations of `g` under
/// edge-unbiased noise, against the true κ of `g`.
pub fn run_bias_variance_on(cfg: &BiasVarConfig, g: &Graph) -> Result<Vec<BiasVarRow>> {
    cfg.validate()?;
    let kappa = g.branching_factor();
    let mean_degree = g.degree_stats().mean_degree;
    cfg.beta_grid
        .iter()
        .enumerate()
        .map(|(c, &beta)| {
            let p = NoiseParams::edge_unbiased(g, beta)?;
            let cell = cfg.seed.derive(tag::CELL).derive(c as u64);
            let draws_seed = cell.derive(tag::PERTURB);
            let draws: Vec<f64> = (0..cfg.n_noisy)
                .into_par_iter()
                .map(|t| branching_factor_of_degrees(&perturbed_degrees(g, p, draws_seed.derive(t as u64))))
                .collect();
            let boot = cell.derive(tag::RESAMPLE);
            let level = cfg.confidence_level;
            let [mlo, mhi] = percentile_bootstrap(&draws, mean, cfg.bootstrap_reps, level, boot.derive(0))?;
            let [vlo, vhi] = percentile_bootstrap(&draws, sample_variance, cfg.bootstrap_reps, level, boot.derive(1))?;
            Ok(BiasVarRow {
                family: cfg.generator.name().into(),
                n: g.num_vertices(),
                mean_degree,
                alpha: p.alpha(),
                beta,
                kappa_true: kappa,
                bias: mean(&draws) - kappa,
                bias_ci_lo: mlo - kappa,
                bias_ci_hi: mhi - kappa,
                variance: sample_variance(&draws),
                var_ci_lo: vlo,
                var_ci_hi: vhi,
                theory_bias: bias_leading_term(g, p)?,
                n_noisy: cfg.n_noisy,
                master_seed: cell.master_seed,
                cell_stream: cell.stream_id,
            })
        })
        .collect()
}

/// Where a coverage study's true network comes from.
#[derive(Clone, Debug)]
pub enum TrueNetwork {
    /// Drawn from the config seed's `GENERATE` stream.
    Generated(GeneratorSpec),
    /// Supplied directly, e.g. a consensus graph built from ingested data.
    Given { name: String, graph: Graph },
}

#[derive(Clone, Debug)]
pub struct CoverageConfig {
    pub network: TrueNetwork,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub n_trials: usize,
    pub estimator: EstimatorConfig,
    pub seed: Seed,
}

impl CoverageConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials < 2 {
            return Err(Error::invalid("n_trials must be at least 2"));
        }
        if self.alpha_grid.is_empty() || self.beta_grid.is_empty() {
            return Err(Error::invalid("alpha_grid and beta_grid must be nonempty"));
        }
        for &x in self.alpha_grid.iter().chain(&self.beta_grid) {
            crate::error::check_probability("error rate", x)?;
        }
        self.estimator.validate()
    }

    fn graph(&self) -> Result<(String, Graph)> {
        match &self.network {
            TrueNetwork::Generated(spec) => Ok((spec.name().into(), spec.generate(self.seed.derive(tag::GENERATE))?)),
            TrueNetwork::Given { name, graph } => Ok((name.clone(), graph.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub family: String,
    pub n: usize,
    pub mean_degree: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa_true: f64,
    /// Over trials where estimation succeeded; absent when none did.
    pub mae: Option<f64>,
    /// Absent for degenerate (noiseless) cells, where every interval has
    /// zero width and coverage carries no information.
    pub rf: Option<f64>,
    pub mean_ci_len: Option<f64>,
    pub n_trials: usize,
    pub n_failed: usize,
    pub degenerate: bool,
    pub master_seed: u64,
    /// Stream of this cell; trial `t` uses `derive(TRIAL).derive(t)` on it.
    pub cell_stream: u64,
}

struct Trial {
    abs_err: f64,
    covered: bool,
    len: f64,
}

/// One row per `(α, β)` in row-major order over `alpha_grid × beta_grid`.
pub fn run_coverage(cfg: &CoverageConfig) -> Result<Vec<CoverageRow>> {
    cfg.validate()?;
    let (family, g) = cfg.graph()?;
    let kappa = g.branching_factor();
    let mean_degree = g.degree_stats().mean_degree;
    let cells: Vec<(f64, f64)> = cfg
        .alpha_grid
        .iter()
        .flat_map(|&a| cfg.beta_grid.iter().map(move |&b| (a, b)))
        .collect();
    cells
        .iter()
        .enumerate()
        .map(|(c, &(alpha, beta))| {
            let p = NoiseParams::new(alpha, beta)?;
            let cell = cfg.seed.derive(tag::CELL).derive(c as u64);
            let trials_seed = cell.derive(tag::TRIAL);
            let trials: Vec<Option<Trial>> = (0..cfg.n_trials)
                .into_par_iter()
                .map(|t| {
                    let s = trials_seed.derive(t as u64);
                    let reps = replicate(&g, p, 3, s).ok()?;
                    let est = estimate(&reps, &cfg.estimator, s).ok()?;
                    let [lo, hi] = est.ci?;
                    Some(Trial {
                        abs_err: (est.kappa_hat - kappa).abs(),
                        covered: lo <= kappa && kappa <= hi,
                        len: hi - lo,
                    })
                })
                .collect();
            let ok: Vec<&Trial> = trials.iter().flatten().collect();
            let m = ok.len() as f64;
            let degenerate = alpha == 0.0 && beta == 0.0;
            let avg = |f: &dyn Fn(&Trial) -> f64| (!ok.is_empty()).then(|| ok.iter().map(|t| f(t)).sum::<f64>() / m);
            Ok(CoverageRow {
                family: family.clone(),
                n: g.num_vertices(),
                mean_degree,
                alpha,
                beta,
                kappa_true: kappa,
                mae: avg(&|t| t.abs_err),
                rf: if degenerate { None } else { avg(&|t| f64::from(u8::from(t.covered))) },
                mean_ci_len: avg(&|t| t.len),
                n_trials: cfg.n_trials,
                n_failed: trials.len() - ok.len(),
                degenerate,
                master_seed: cell.master_seed,
                cell_stream: cell.stream_id,
            })
        })
        .collect()
}

/// CSV with a header row; `None` fields are empty.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per line.
pub fn write_json_lines<T: Serialize, W: Write>(rows: &[T], mut out: W) -> Result<()> {
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}
