use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use branchkit::estimator::{self, reproduction_number, thresholds, EpiParams, EstimatorConfig};
use branchkit::experiments::{
    run_bias_variance, run_coverage, write_csv, write_json_lines, BiasVarConfig, CoverageConfig, GeneratorSpec,
    TrueNetwork,
};
use branchkit::ingest::{load_graph, load_replicates, write_canonical};
use branchkit::moments::{bias_leading_term, exact_second_moments, expected_moments, naive_kappa_expectation};
use branchkit::noise::replicate;
use branchkit::rng::tag;
use branchkit::{Error, Graph, NoiseParams, Result, Seed};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Cli, Command, Family, Format, GraphArgs};

/// Header attached to every output: the command, its fully resolved
/// arguments (defaults included) and the master seed.
#[derive(Serialize)]
struct Meta<'a, C: Serialize> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a C,
}

fn meta<C: Serialize>(command: &str, seed: u64, config: &C) -> Result<Value> {
    Ok(serde_json::to_value(Meta {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config,
    })?)
}

fn print_json(meta: Value, result: Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &json!({ "meta": meta, "result": result }))?;
    writeln!(out)?;
    Ok(())
}

fn missing(flag: &str, family: &str) -> Error {
    Error::InvalidParameter(format!("--{flag} is required for --family {family}"))
}

fn generator_spec(
    family: Family,
    n: usize,
    p: Option<f64>,
    m: Option<usize>,
    zeta: Option<f64>,
    mean_degree: Option<f64>,
) -> Result<GeneratorSpec> {
    Ok(match family {
        Family::Er => {
            let p = match (p, mean_degree) {
                (Some(p), _) => p,
                (None, Some(d)) if n > 1 => d / (n - 1) as f64,
                _ => return Err(missing("p", "er")),
            };
            GeneratorSpec::Er { n, p }
        }
        Family::Ba => GeneratorSpec::Ba { n, m: m.ok_or_else(|| missing("m", "ba"))? },
        Family::Pareto => GeneratorSpec::Pareto {
            n,
            zeta: zeta.ok_or_else(|| missing("zeta", "pareto"))?,
            mean_degree: mean_degree.ok_or_else(|| missing("mean-degree", "pareto"))?,
        },
    })
}

fn spec_of(g: &GraphArgs) -> Result<GeneratorSpec> {
    generator_spec(g.family, g.n, g.p, g.m, g.zeta, g.mean_degree)
}

fn noise_for(g: &Graph, alpha: Option<f64>, beta: f64) -> Result<NoiseParams> {
    match alpha {
        Some(a) => NoiseParams::new(a, beta),
        None => NoiseParams::edge_unbiased(g, beta),
    }
}

fn graph_summary(g: &Graph) -> Result<Value> {
    Ok(json!({
        "n": g.num_vertices(),
        "edges": g.num_edges(),
        "mean_degree": g.degree_stats().mean_degree,
        "kappa": g.branching_factor(),
        "edge_density": g.edge_density()?,
        "two_star_density": if g.num_vertices() >= 3 { Some(g.two_star_density()?) } else { None },
    }))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// CSV gets the header as a leading `#` comment line; JSON lines get it as
/// a leading `{"meta": ...}` object.
fn write_table<T: Serialize>(rows: &[T], format: Format, meta: Value, path: Option<&Path>) -> Result<()> {
    let mut out = output(path)?;
    match format {
        Format::Csv => {
            writeln!(out, "# {}", serde_json::to_string(&meta)?)?;
            write_csv(rows, out)
        }
        Format::Jsonl => {
            writeln!(out, "{}", serde_json::to_string(&json!({ "meta": meta }))?)?;
            write_json_lines(rows, out)
        }
    }
}

/// κ̂ and its variance from `estimate --json` output or a bare estimate.
fn kappa_from_estimate(path: &Path) -> Result<(f64, f64)> {
    let v: Value = serde_json::from_reader(io::BufReader::new(File::open(path)?))?;
    let est = v.pointer("/result/estimate").unwrap_or(&v);
    let field = |k: &str| {
        est.get(k).and_then(Value::as_f64).ok_or_else(|| Error::Parse {
            path: path.to_owned(),
            line: 0,
            message: format!("missing numeric field '{k}'"),
        })
    };
    Ok((field("kappa_hat")?, field("variance_hat")?))
}

pub fn run(cli: &Cli) -> Result<()> {
    let seed = Seed::new(cli.seed);
    match &cli.command {
        Command::Generate(a) => {
            let spec = spec_of(&a.graph)?;
            let g = spec.generate(seed.derive(tag::GENERATE))?;
            write_canonical(&g, None, &a.out)?;
            print_json(meta("generate", cli.seed, a)?, graph_summary(&g)?)
        }
        Command::Perturb(a) => {
            let lg = load_graph(&a.input, None)?;
            let p = noise_for(&lg.graph, a.alpha, a.beta)?;
            let reps = replicate(&lg.graph, p, a.replicates, seed)?;
            fs::create_dir_all(&a.out_dir)?;
            let mut files = Vec::new();
            for (i, g) in reps.graphs().iter().enumerate() {
                let path = a.out_dir.join(format!("replicate_{}.tsv", i + 1));
                write_canonical(g, Some(&lg.labels), &path)?;
                files.push(json!({ "path": path, "edges": g.num_edges() }));
            }
            let result = json!({ "alpha": p.alpha(), "beta": p.beta(), "files": files });
            print_json(meta("perturb", cli.seed, a)?, result)
        }
        Command::Kappa(a) => {
            let mut rows = Vec::new();
            for path in &a.inputs {
                let lg = load_graph(path, a.weight_threshold)?;
                let mut s = graph_summary(&lg.graph)?;
                s["path"] = json!(path);
                rows.push(s);
            }
            print_json(meta("kappa", cli.seed, a)?, Value::Array(rows))
        }
        Command::Estimate(a) => {
            let cfg = EstimatorConfig {
                alpha0: a.alpha0,
                epsilon: a.eps,
                max_iterations: a.max_iter,
                n_bootstrap: a.nb,
                confidence_level: a.level,
            };
            cfg.validate()?;
            let al = load_replicates(&a.replicates, a.weight_threshold)?;
            let est = estimator::estimate(&al.replicates, &cfg, seed)?;
            let m = meta("estimate", cli.seed, a)?;
            if a.json {
                let result = json!({ "common_vertices": al.common_vertices(), "estimate": est });
                return print_json(m, result);
            }
            let mut out = io::stdout().lock();
            writeln!(out, "# {}", serde_json::to_string(&m)?)?;
            let [lo, hi] = est.ci.unwrap_or([f64::NAN; 2]);
            let [alo, ahi] = est.alpha_ci.unwrap_or([f64::NAN; 2]);
            let [blo, bhi] = est.beta_ci.unwrap_or([f64::NAN; 2]);
            let pct = 100.0 * est.confidence_level;
            writeln!(out, "vertices\t{}", est.n)?;
            writeln!(out, "alpha_hat\t{:.6}\t{pct}% CI [{alo:.6}, {ahi:.6}]", est.alpha_hat)?;
            writeln!(out, "beta_hat\t{:.6}\t{pct}% CI [{blo:.6}, {bhi:.6}]", est.beta_hat)?;
            writeln!(out, "delta_hat\t{:.6}", est.delta_hat)?;
            writeln!(out, "kappa_hat\t{:.6}\t{pct}% CI [{lo:.6}, {hi:.6}]", est.kappa_hat)?;
            writeln!(out, "variance_hat\t{:.6e}", est.variance_hat.unwrap_or(f64::NAN))?;
            writeln!(out, "iterations\t{}", est.iterations)?;
            for w in &est.warnings {
                writeln!(out, "warning\t{w}")?;
            }
            Ok(())
        }
        Command::Moments(a) => {
            let lg = load_graph(&a.input, None)?;
            let g = &lg.graph;
            let p = noise_for(g, a.alpha, a.beta)?;
            let report = expected_moments(g, p)?;
            let bias = if report.edge_unbiased { Some(bias_leading_term(g, p)?) } else { None };
            let result = json!({
                "alpha": p.alpha(),
                "beta": p.beta(),
                "closed_form": report,
                "exact": exact_second_moments(g, p),
                "naive_kappa_expectation": naive_kappa_expectation(g, p)?,
                "bias_leading_term": bias,
            });
            print_json(meta("moments", cli.seed, a)?, result)
        }
        Command::SimulateBias(a) => {
            let mut cfg = BiasVarConfig::new(spec_of(&a.graph)?, a.beta_grid.clone(), a.n_noisy, seed);
            cfg.bootstrap_reps = a.bootstrap_reps;
            cfg.confidence_level = a.level;
            let rows = run_bias_variance(&cfg)?;
            write_table(&rows, a.format, meta("simulate-bias", cli.seed, a)?, a.out.as_deref())
        }
        Command::SimulateCoverage(a) => {
            let network = match (&a.input, a.family) {
                (Some(path), _) => TrueNetwork::Given {
                    name: file_stem(path),
                    graph: load_graph(path, None)?.graph,
                },
                (None, Some(f)) => {
                    let n = a.n.ok_or_else(|| Error::InvalidParameter("--n is required with --family".into()))?;
                    TrueNetwork::Generated(generator_spec(f, n, a.p, a.m, a.zeta, a.mean_degree)?)
                }
                (None, None) => return Err(Error::InvalidParameter("give --input or --family".into())),
            };
            let cfg = CoverageConfig {
                network,
                alpha_grid: a.alpha_grid.clone(),
                beta_grid: a.beta_grid.clone(),
                n_trials: a.n_trials,
                estimator: EstimatorConfig { n_bootstrap: a.nb, confidence_level: a.level, ..Default::default() },
                seed,
            };
            let rows = run_coverage(&cfg)?;
            write_table(&rows, a.format, meta("simulate-coverage", cli.seed, a)?, a.out.as_deref())
        }
        Command::Thresholds(a) => {
            let (kappa, variance) = match (&a.estimate_json, a.kappa) {
                (Some(path), _) => kappa_from_estimate(path)?,
                (None, Some(k)) => (k, a.variance.unwrap_or(0.0)),
                (None, None) => return Err(Error::InvalidParameter("give --kappa or --estimate-json".into())),
            };
            let r0 = match (a.theta, a.gamma) {
                (Some(theta), Some(gamma)) => {
                    Some(reproduction_number(kappa, variance, &EpiParams::new(theta, gamma, a.lambda)?, a.level)?)
                }
                _ => None,
            };
            let t = thresholds(kappa, variance, a.lambda, a.level)?;
            let result = json!({
                "kappa": kappa,
                "variance": variance,
                "r0": r0,
                "thresholds": t,
                "regime": if t.subcritical { "subcritical" } else { "supercritical" },
            });
            print_json(meta("thresholds", cli.seed, a)?, result)
        }
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned())
}
