//! Edge-flip observation noise.
//!
//! A non-edge is observed as an edge with probability α (Type-I error) and
//! a true edge is missed with probability β (Type-II error), independently
//! across vertex pairs.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::graph::{Graph, Vertex};
use crate::replicates::ReplicateSet;
use crate::rng::{tag, Seed};

/// Type-I / Type-II edge error probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    alpha: f64,
    beta: f64,
}

impl NoiseParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_probability("alpha", alpha)?;
        check_probability("beta", beta)?;
        Ok(NoiseParams { alpha, beta })
    }

    pub const fn noiseless() -> Self {
        NoiseParams {
            alpha: 0.0,
            beta: 0.0,
        }
    }

    /// β with α chosen so the expected observed edge count equals `|E|`.
    pub fn edge_unbiased(g: &Graph, beta: f64) -> Result<Self> {
        NoiseParams::new(edge_unbiased_alpha(g, beta)?, beta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `1 - α - β`; the rates are identifiable only when this is positive.
    pub fn k3(&self) -> f64 {
        1.0 - self.alpha - self.beta
    }

    pub fn is_identifiable(&self) -> bool {
        self.k3() > 0.0
    }
}

/// Above this false-positive rate the non-edge sampler walks every pair
/// instead of rejection-sampling.
const DENSE_SAMPLING_THRESHOLD: f64 = 0.2;

/// Calls `visit(i, j)` (with `i < j`) for each non-edge of `g` selected
/// independently with probability `q`.
///
/// For small `q` the count is drawn from `Binomial(|E^c|, q)` and that many
/// distinct non-edges are drawn uniformly, which is the same distribution as
/// independent per-pair coin flips but costs `O(K)` instead of `O(n²)`.
/// Visit order is deterministic given the RNG state.
pub(crate) fn sample_non_edges<R, F>(g: &Graph, q: f64, rng: &mut R, mut visit: F)
where
    R: Rng + ?Sized,
    F: FnMut(Vertex, Vertex),
{
    let non_edges = g.num_non_edges();
    if non_edges == 0 || q <= 0.0 {
        return;
    }
    let n = g.num_vertices();
    if q >= DENSE_SAMPLING_THRESHOLD {
        for i in 0..n {
            let nbrs = g.neighbors(i);
            let mut k = nbrs.partition_point(|&v| (v as usize) <= i);
            for j in i + 1..n {
                if k < nbrs.len() && nbrs[k] as usize == j {
                    k += 1;
                    continue;
                }
                if rng.random::<f64>() < q {
                    visit(i as Vertex, j as Vertex);
                }
            }
        }
        return;
    }
    let count = Binomial::new(non_edges as u64, q)
        .expect("q checked to lie in (0, 1)")
        .sample(rng) as usize;
    let mut chosen: HashSet<(Vertex, Vertex)> = HashSet::with_capacity(count);
    while chosen.len() < count {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        if g.has_edge(i, j) {
            continue;
        }
        if chosen.insert((i as Vertex, j as Vertex)) {
            visit(i as Vertex, j as Vertex);
        }
    }
}

/// Draws one noisy observation of `g`, reporting each observed edge.
fn observe<R, F>(g: &Graph, p: NoiseParams, rng: &mut R, mut emit: F)
where
    R: Rng + ?Sized,
    F: FnMut(Vertex, Vertex),
{
    let keep = 1.0 - p.beta;
    for (i, j) in g.edges() {
        if rng.random::<f64>() < keep {
            emit(i as Vertex, j as Vertex);
        }
    }
    sample_non_edges(g, p.alpha, rng, emit);
}

/// One noisy observation of `g` on the same vertex set.
pub fn perturb(g: &Graph, p: NoiseParams, seed: Seed) -> Graph {
    let mut rng = seed.rng();
    let mut adjacency: Vec<Vec<Vertex>> = g
        .degrees()
        .iter()
        .map(|&d| Vec::with_capacity(d as usize))
        .collect();
    observe(g, p, &mut rng, |i, j| {
        adjacency[i as usize].push(j);
        adjacency[j as usize].push(i);
    });
    Graph::from_raw_adjacency(adjacency)
}

/// Degree sequence of `perturb(g, p, seed)` without building the graph.
pub fn perturbed_degrees(g: &Graph, p: NoiseParams, seed: Seed) -> Vec<u32> {
    let mut rng = seed.rng();
    let mut degrees = vec![0u32; g.num_vertices()];
    observe(g, p, &mut rng, |i, j| {
        degrees[i as usize] += 1;
        degrees[j as usize] += 1;
    });
    degrees
}

/// `α = β|E| / |E^c|`, the Type-I rate that makes the observed edge count
/// unbiased for the true one.
pub fn edge_unbiased_alpha(g: &Graph, beta: f64) -> Result<f64> {
    check_probability("beta", beta)?;
    let edges = g.num_edges() as f64;
    let non_edges = g.num_non_edges() as f64;
    if non_edges == 0.0 {
        return Err(Error::invalid(
            "edge-unbiased alpha needs at least one non-edge",
        ));
    }
    let required = beta * edges;
    if required > non_edges {
        return Err(Error::DenseInfeasible {
            required,
            available: non_edges,
        });
    }
    Ok(required / non_edges)
}

/// `k` independent observations of `g`, replicate `i` drawn from stream
/// `seed.derive(REPLICATE).derive(i)`.
pub fn replicate(g: &Graph, p: NoiseParams, k: usize, seed: Seed) -> Result<ReplicateSet> {
    if k == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    let base = seed.derive(tag::REPLICATE);
    let graphs = (0..k as u64)
        .into_par_iter()
        .map(|i| perturb(g, p, base.derive(i)))
        .collect();
    ReplicateSet::new(graphs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::erdos_renyi;

    fn mean_sd(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v.sqrt())
    }

    #[test]
    fn params_validation() {
        assert!(NoiseParams::new(-0.1, 0.2).is_err());
        assert!(NoiseParams::new(0.1, 1.2).is_err());
        assert!(NoiseParams::new(f64::NAN, 0.2).is_err());
        let p = NoiseParams::new(0.6, 0.5).unwrap();
        assert!(!p.is_identifiable());
    }

    #[test]
    fn noiseless_is_identity_and_full_miss_is_empty() {
        let g = erdos_renyi(50, 0.1, Seed::new(1)).unwrap();
        assert_eq!(perturb(&g, NoiseParams::noiseless(), Seed::new(2)), g);
        let p = NoiseParams::new(0.0, 1.0).unwrap();
        assert_eq!(perturb(&g, p, Seed::new(2)).num_edges(), 0);
    }

    #[test]
    fn triangle_half_miss_edge_count() {
        let g = Graph::complete(3);
        let p = NoiseParams::new(0.0, 0.5).unwrap();
        let trials = 10_000;
        let counts: Vec<f64> = (0..trials)
            .map(|t| perturb(&g, p, Seed::new(9).derive(t)).num_edges() as f64)
            .collect();
        let (m, _) = mean_sd(&counts);
        let sigma = 3.0 * (3.0f64 * 0.25).sqrt() / 100.0;
        assert!((m - 1.5).abs() < sigma, "mean {m}");
    }

    #[test]
    fn edge_unbiased_alpha_examples() {
        let g = Graph::from_edges(5, [(0, 1), (2, 3)]).unwrap();
        assert!((edge_unbiased_alpha(&g, 0.1).unwrap() - 0.025).abs() < 1e-15);
        assert_eq!(edge_unbiased_alpha(&Graph::empty(6), 0.3).unwrap(), 0.0);
        // d-regular: alpha = beta d / (n - 1 - d)
        let cycle = Graph::from_edges(10, (0..10).map(|i| (i, (i + 1) % 10))).unwrap();
        let a = edge_unbiased_alpha(&cycle, 0.2).unwrap();
        assert!((a - 0.2 * 2.0 / 7.0).abs() < 1e-15);
        assert!(edge_unbiased_alpha(&Graph::complete(4), 0.1).is_err());
        // K5 minus one edge: 9 edges, 1 non-edge
        let dense = Graph::from_edges(
            5,
            (0..5)
                .flat_map(|i| (i + 1..5).map(move |j| (i, j)))
                .filter(|&e| e != (0, 1)),
        )
        .unwrap();
        assert!(matches!(
            edge_unbiased_alpha(&dense, 0.5),
            Err(Error::DenseInfeasible { .. })
        ));
    }

    #[test]
    fn degree_law_matches_binomial_sum() {
        let g = erdos_renyi(60, 0.15, Seed::new(3)).unwrap();
        let p = NoiseParams::new(0.05, 0.3).unwrap();
        let trials = 4000u64;
        let n = g.num_vertices();
        let mut sums = vec![0.0; n];
        for t in 0..trials {
            for (s, d) in sums.iter_mut().zip(perturbed_degrees(&g, p, Seed::new(4).derive(t))) {
                *s += d as f64;
            }
        }
        for i in 0..n {
            let d = g.degree(i) as f64;
            let others = (n - 1) as f64 - d;
            let mean = p.alpha() * others + (1.0 - p.beta()) * d;
            let var = p.alpha() * (1.0 - p.alpha()) * others + p.beta() * (1.0 - p.beta()) * d;
            let se = (var / trials as f64).sqrt();
            // 4σ across 60 vertices keeps the family-wise false alarm rate low
            assert!(
                (sums[i] / trials as f64 - mean).abs() < 4.0 * se,
                "vertex {i}"
            );
        }
    }

    #[test]
    fn edge_unbiased_noise_preserves_expected_edge_count() {
        let g = erdos_renyi(200, 0.05, Seed::new(5)).unwrap();
        let p = NoiseParams::edge_unbiased(&g, 0.2).unwrap();
        let counts: Vec<f64> = (0..2000)
            .map(|t| perturb(&g, p, Seed::new(6).derive(t)).num_edges() as f64)
            .collect();
        let (m, sd) = mean_sd(&counts);
        let se = sd / (counts.len() as f64).sqrt();
        assert!((m - g.num_edges() as f64).abs() < 3.0 * se);
    }

    #[test]
    fn dense_and_sparse_sampling_agree_in_distribution() {
        // alpha on either side of the dense-walk threshold
        let g = erdos_renyi(40, 0.2, Seed::new(7)).unwrap();
        let m = g.num_non_edges() as f64;
        for alpha in [0.05, 0.5] {
            let p = NoiseParams::new(alpha, 0.0).unwrap();
            let extra: Vec<f64> = (0..3000)
                .map(|t| {
                    (perturb(&g, p, Seed::new(8).derive(t)).num_edges() - g.num_edges()) as f64
                })
                .collect();
            let (mean, sd) = mean_sd(&extra);
            let se = (m * alpha * (1.0 - alpha) / extra.len() as f64).sqrt();
            assert!((mean - m * alpha).abs() < 3.5 * se, "alpha {alpha}");
            let expected_sd = (m * alpha * (1.0 - alpha)).sqrt();
            assert!((sd / expected_sd - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn complement_swaps_roles_of_alpha_and_beta() {
        // perturb(complement(g), (β, α)) ~ complement(perturb(g, (α, β)))
        let g = erdos_renyi(12, 0.3, Seed::new(10)).unwrap();
        let c = g.complement();
        let p = NoiseParams::new(0.1, 0.3).unwrap();
        let q = NoiseParams::new(0.3, 0.1).unwrap();
        let pairs = g.num_pairs() as f64;
        let trials = 6000u64;
        let a: Vec<f64> = (0..trials)
            .map(|t| pairs - perturb(&g, p, Seed::new(11).derive(t)).num_edges() as f64)
            .collect();
        let b: Vec<f64> = (0..trials)
            .map(|t| perturb(&c, q, Seed::new(12).derive(t)).num_edges() as f64)
            .collect();
        let (ma, sa) = mean_sd(&a);
        let (mb, sb) = mean_sd(&b);
        let se = ((sa * sa + sb * sb) / trials as f64).sqrt();
        assert!((ma - mb).abs() < 3.5 * se);
        assert!((sa / sb - 1.0).abs() < 0.06);
    }

    #[test]
    fn replicate_examples() {
        let g = erdos_renyi(30, 0.2, Seed::new(13)).unwrap();
        let same = replicate(&g, NoiseParams::noiseless(), 3, Seed::new(1)).unwrap();
        assert!(same.graphs().iter().all(|r| *r == g));
        let single = replicate(&g, NoiseParams::noiseless(), 1, Seed::new(1)).unwrap();
        assert_eq!(single.len(), 1);
        assert!(replicate(&g, NoiseParams::noiseless(), 0, Seed::new(1)).is_err());

        // pairwise disagreement density 2[(1-δ)α(1-α) + δβ(1-β)]
        let g = erdos_renyi(300, 0.05, Seed::new(14)).unwrap();
        let p = NoiseParams::new(0.01, 0.2).unwrap();
        let delta = g.edge_density().unwrap();
        let expected = 2.0
            * ((1.0 - delta) * p.alpha() * (1.0 - p.alpha())
                + delta * p.beta() * (1.0 - p.beta()));
        let reps = replicate(&g, p, 3, Seed::new(15)).unwrap();
        let pairs = g.num_pairs() as f64;
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            let gx = &reps.graphs()[x];
            let gy = &reps.graphs()[y];
            let common = gx.edges().filter(|&(i, j)| gy.has_edge(i, j)).count();
            let diff = (gx.num_edges() + gy.num_edges() - 2 * common) as f64 / pairs;
            let se = (expected * (1.0 - expected) / pairs).sqrt();
            assert!((diff - expected).abs() < 4.0 * se, "{diff} vs {expected}");
        }
        // distinct streams
        assert_ne!(reps.graphs()[0], reps.graphs()[1]);
    }
}
