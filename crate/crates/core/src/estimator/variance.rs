use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EstimatorConfig, KappaEstimate};
use crate::error::{Error, Result};
use crate::noise::sample_non_edges;
use crate::replicates::ReplicateSet;
use crate::rng::{tag, Seed};

pub type Mat2 = [[f64; 2]; 2];
pub type Mat2x3 = [[f64; 3]; 2];
pub type Mat3 = [[f64; 3]; 3];

/// Every intermediate of the bootstrap variance estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceWorkspace {
    /// `P(η = 0)`.
    pub xi1: f64,
    /// `P(η = 1)`.
    pub xi2: f64,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub k1_hat: f64,
    pub k2_hat: f64,
    pub k3_hat: f64,
    pub k4_hat: f64,
    pub sigma_hat: Mat3,
    pub delta_mat: Mat2,
    pub g_mat: Mat2x3,
    pub h_mat: Mat2x3,
    pub v1: Mat2,
    pub v2: Mat2,
    pub v3: Mat2,
    pub v_hat: Mat2,
    /// Per-iterate `(S†_1, S†_2)`.
    pub s_samples: Vec<(f64, f64)>,
    /// `G Σ Gᵀ`, the scaled covariance of `(α̂, β̂)`.
    pub rates_cov: Mat2,
    /// `N(N-1)/2`; `V̂` is the covariance of `√scale · (Ĉ₁, Ĉ₂)`.
    pub scale: f64,
    pub warnings: Vec<String>,
}

impl VarianceWorkspace {
    pub fn var_alpha(&self) -> f64 {
        self.rates_cov[0][0] / self.scale
    }

    pub fn var_beta(&self) -> f64 {
        self.rates_cov[1][1] / self.scale
    }
}

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn mul_23_32(a: &Mat2x3, b: &Mat2x3) -> Mat2 {
    // a · bᵀ
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[j][k]).sum();
        }
    }
    c
}

fn mul_23_33(a: &Mat2x3, b: &Mat3) -> Mat2x3 {
    let mut c = [[0.0; 3]; 2];
    for i in 0..2 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn mul_22_23(a: &Mat2, b: &Mat2x3) -> Mat2x3 {
    let mut c = [[0.0; 3]; 2];
    for i in 0..2 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn transpose2(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn add2(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

fn quad2(v: [f64; 2], m: &Mat2) -> f64 {
    v[0] * (m[0][0] * v[0] + m[0][1] * v[1]) + v[1] * (m[1][0] * v[0] + m[1][1] * v[1])
}

fn clamped_sqrt(name: &str, radicand: f64, warnings: &mut Vec<String>) -> f64 {
    if radicand < 0.0 {
        warnings.push(format!("{name} radicand {radicand:.6} < 0 clamped to 0"));
        0.0
    } else {
        radicand.sqrt()
    }
}

/// `(ξ₁, ξ₂, t₁, t₂)` for the three-point perturbation law.
pub fn perturbation_law(
    alpha: f64,
    beta: f64,
    epsilon: f64,
    warnings: &mut Vec<String>,
) -> (f64, f64, Option<f64>, Option<f64>) {
    let roots = |w: &mut Vec<String>| {
        (
            clamped_sqrt("t1", 1.0 - 4.0 * alpha * (1.0 - beta), w),
            clamped_sqrt("t2", 1.0 - 4.0 * beta * (1.0 - alpha), w),
        )
    };
    let (xi1, xi2, t1, t2) = if (alpha - beta).abs() < epsilon {
        let xi2 = alpha;
        (1.0 - 2.0 * xi2, xi2, None, None)
    } else if beta - alpha > epsilon {
        let (t1, t2) = roots(warnings);
        let xi2 = (1.0 - t1) / 2.0;
        let xi1 = if t1 + t2 < 0.5 { (t1 + t2) / 2.0 } else { (t1 - t2) / 2.0 };
        (xi1, xi2, Some(t1), Some(t2))
    } else {
        // α - β > ε, or |α - β| = ε exactly, which the branches leave open
        let (t1, t2) = roots(warnings);
        ((t2 - t1) / 2.0, (1.0 + t1) / 2.0, Some(t1), Some(t2))
    };
    let c1 = xi1.clamp(0.0, 1.0);
    let c2 = xi2.clamp(0.0, 1.0 - c1);
    if (c1, c2) != (xi1, xi2) {
        warnings.push(format!(
            "perturbation probabilities ({xi1:.6}, {xi2:.6}) clamped to ({c1:.6}, {c2:.6})"
        ));
    }
    (c1, c2, t1, t2)
}

/// Calls `f(i)` for each `i < len` kept independently with probability `q`,
/// by geometric skipping.
fn for_each_bernoulli<R: Rng + ?Sized>(len: usize, q: f64, rng: &mut R, mut f: impl FnMut(usize)) {
    if q <= 0.0 || len == 0 {
        return;
    }
    if q >= 1.0 {
        (0..len).for_each(f);
        return;
    }
    let log_q = (1.0 - q).ln();
    let mut i = 0usize;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if skip >= (len - i) as f64 {
            return;
        }
        i += skip as usize;
        f(i);
        i += 1;
        if i >= len {
            return;
        }
    }
}

/// Asymptotic covariance entries of `√(N(N-1)/2) · (û₁, û₂, û₃)`.
pub fn sigma_matrix(alpha: f64, beta: f64, delta: f64) -> Mat3 {
    let (a, b, d) = (alpha, beta, delta);
    let k1 = a * (1.0 - a);
    let k2 = b * (1.0 - b);
    let s11 = d * k2 + (1.0 - d) * k1;
    let s22 = d * k2 * (0.5 - k2) + (1.0 - d) * k1 * (0.5 - k1);
    let s33 = d * b * k2 * (1.0 / 3.0 - b * k2)
        + (1.0 - d) * k1 * (1.0 - a) * (1.0 / 3.0 - k1 * (1.0 - a));
    let s12 = d * k2 * (b - 0.5) + (1.0 - d) * k1 * (0.5 - a);
    let s13 = d * k2 * (b * b / 3.0 - 2.0 * k2 / 3.0)
        + (1.0 - d) * k1 * ((1.0 - a) * (1.0 - a) / 3.0 - 2.0 * k1 / 3.0);
    let s23 = d * b * k2 * (1.0 / 3.0 - k2) + (1.0 - d) * (1.0 - a) * k1 * (1.0 / 3.0 - k1);
    [[s11, s12, s13], [s12, s22, s23], [s13, s23, s33]]
}

/// `∂(α, β) / ∂(u₁, u₂, u₃)` at the estimates.
pub fn g_matrix(alpha: f64, beta: f64, delta: f64) -> Mat2x3 {
    let (a, b, d) = (alpha, beta, delta);
    let k3 = 1.0 - a - b;
    let s = 1.0 / (k3 * k3);
    let r = 1.0 / (1.0 - d);
    let q = 1.0 / d;
    [
        [s * r * ((1.0 - 2.0 * b) * a + b * b), s * r * (a - 2.0 * b), s * r],
        [-s * q * ((1.0 - 2.0 * a) * b + a * a), s * q * (b - 2.0 * a + 1.0), -s * q],
    ]
}

/// `∂(C₁, C₂) / ∂(α, β)`.
pub fn delta_matrix(k3: f64, c1: f64, c2: f64) -> Mat2 {
    [
        [(c1 - 1.0) / k3, c1 / k3],
        [(2.0 * c2 - 2.0 * c1) / k3, 2.0 * c2 / k3],
    ]
}

pub fn h_matrix(alpha: f64, beta: f64, c1: f64, c2: f64) -> Mat2x3 {
    let (a, b) = (alpha, beta);
    let k1 = a * (1.0 - a);
    let k2 = b * (1.0 - b);
    let k3 = 1.0 - a - b;
    let k4 = b - a;
    let left = [[c1 / 3.0, 1.0 / (3.0 * k3)], [2.0 * c2 / 3.0, 2.0 * c1 / (3.0 * k3)]];
    let right: Mat2x3 = [
        [
            6.0 * k4,
            3.0 * (k4 * k4 - k1 - k2),
            2.0 * (k4 * (-6.0 * a * b + 3.0 * k3 * k3 - 4.0 * k3) + (1.0 - a) * (b - 2.0 * a)),
        ],
        [6.0 * k1, 3.0 * k1 * (1.0 - 2.0 * a), 2.0 * k1 * (1.0 - a) * (1.0 - 3.0 * a)],
    ];
    mul_22_23(&left, &right)
}

/// Bootstrap estimate of `Var(κ̂)`, computed on the first replicate.
///
/// Each iterate perturbs every pair of the first replicate with an
/// independent three-point `η`; only pairs whose indicator departs from the
/// likelier outcome are visited, so an iterate costs `O(|E| q + |E^c| q')`
/// for the rarer-outcome probabilities `q, q'`.
pub fn kappa_variance(
    reps: &ReplicateSet,
    est: &KappaEstimate,
    cfg: &EstimatorConfig,
    seed: Seed,
) -> Result<(f64, VarianceWorkspace)> {
    cfg.validate()?;
    let (a, b, d) = (est.alpha_hat, est.beta_hat, est.delta_hat);
    let k3 = est.k3_hat;
    if k3 <= 0.0 {
        return Err(Error::NonPositiveK3(k3));
    }
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::DegenerateDensity(d));
    }
    let (c1, c2) = (est.c1_hat, est.c2_hat);
    let g = reps.first();
    let n = g.num_vertices();
    let nf = n as f64;
    let mut warnings = Vec::new();
    let (xi1, xi2, t1, t2) = perturbation_law(a, b, cfg.epsilon, &mut warnings);

    // weights of Å†_ij in the two-star statistic: s_i + s_j - 2 (Ã_ij - α)
    let s: Vec<f64> = g.degrees().iter().map(|&x| x as f64 - a * (nf - 1.0)).collect();
    let on_w: Vec<f64> = g.edges().map(|(i, j)| s[i] + s[j] - 2.0 * (1.0 - a)).collect();
    let on_total: f64 = on_w.iter().sum();
    let on_as_off: f64 = on_w.iter().map(|w| w + 2.0).sum();
    let all_off = (nf - 1.0) * s.iter().sum::<f64>() + 2.0 * a * g.num_pairs() as f64;
    let off_total = all_off - on_as_off;
    let edges = g.num_edges() as f64;
    let non_edges = g.num_non_edges() as f64;

    // Edges: Å† = (1-ξ₁-ξ₂) - I(η=-1). Non-edges: Å† = I(η=1) - ξ₂.
    let drop = 1.0 - xi1 - xi2;
    let flip_edges_rare = drop <= 0.5;
    let q_edge = if flip_edges_rare { drop } else { 1.0 - drop };
    let add_rare = xi2 <= 0.5;
    let q_off = if add_rare { xi2 } else { 1.0 - xi2 };

    let c_s1 = (2.0 / (nf * (nf - 1.0))).sqrt() / k3;
    let c_s2 = (1.0 / (2.0 * nf * (nf - 1.0))).sqrt() / (k3 * k3 * (nf - 2.0));
    let base = seed.derive(tag::BOOTSTRAP);
    let s_samples: Vec<(f64, f64)> = (0..cfg.n_bootstrap as u64)
        .into_par_iter()
        .map(|it| {
            let mut rng = base.derive(it).rng();
            // sums over the visited subset
            let (mut ecount, mut ew) = (0.0, 0.0);
            for_each_bernoulli(on_w.len(), q_edge, &mut rng, |e| {
                ecount += 1.0;
                ew += on_w[e];
            });
            // count and weight of edges with η = -1
            let (dropped, dropped_w) = if flip_edges_rare {
                (ecount, ew)
            } else {
                (edges - ecount, on_total - ew)
            };
            let edge_sum1 = drop * edges - dropped;
            let edge_sum2 = drop * on_total - dropped_w;

            let (mut ocount, mut ow) = (0.0, 0.0);
            sample_non_edges(g, q_off, &mut rng, |i, j| {
                ocount += 1.0;
                ow += s[i as usize] + s[j as usize] + 2.0 * a;
            });
            let (added, added_w) = if add_rare {
                (ocount, ow)
            } else {
                (non_edges - ocount, off_total - ow)
            };
            let off_sum1 = added - xi2 * non_edges;
            let off_sum2 = added_w - xi2 * off_total;
            (
                c_s1 * (edge_sum1 + off_sum1),
                c_s2 * 2.0 * (edge_sum2 + off_sum2),
            )
        })
        .collect();

    let nb = s_samples.len() as f64;
    let (m1, m2) = s_samples
        .iter()
        .fold((0.0, 0.0), |(x, y), &(p, q)| (x + p / nb, y + q / nb));
    let mut v1 = [[0.0; 2]; 2];
    for &(p, q) in &s_samples {
        let (dp, dq) = (p - m1, q - m2);
        v1[0][0] += dp * dp;
        v1[0][1] += dp * dq;
        v1[1][1] += dq * dq;
    }
    for (r, c) in [(0, 0), (0, 1), (1, 1)] {
        v1[r][c] /= nb - 1.0;
    }
    v1[1][0] = v1[0][1];

    let sigma = sigma_matrix(a, b, d);
    let gm = g_matrix(a, b, d);
    let dm = delta_matrix(k3, c1, c2);
    let hm = h_matrix(a, b, c1, c2);
    let rates_cov = mul_23_32(&mul_23_33(&gm, &sigma), &gm);
    let v2 = mul2(&mul2(&dm, &rates_cov), &transpose2(&dm));
    let hg = mul_23_32(&hm, &gm);
    let hgd = mul2(&hg, &transpose2(&dm));
    let v3_half = transpose2(&hgd);
    let v3 = [
        [(hgd[0][0] + v3_half[0][0]) / 2.0, (hgd[0][1] + v3_half[0][1]) / 2.0],
        [(hgd[1][0] + v3_half[1][0]) / 2.0, (hgd[1][1] + v3_half[1][1]) / 2.0],
    ];
    let v_hat = add2(&add2(&v1, &v2), &v3);

    let grad = [-c2 / (c1 * c1), 1.0 / c1];
    let scale = nf * (nf - 1.0) / 2.0;
    let var = (nf - 2.0) * (nf - 2.0) * quad2(grad, &v_hat) / scale;
    if var < 0.0 {
        return Err(Error::NegativeVariance(var));
    }
    Ok((
        var,
        VarianceWorkspace {
            xi1,
            xi2,
            t1,
            t2,
            k1_hat: a * (1.0 - a),
            k2_hat: b * (1.0 - b),
            k3_hat: k3,
            k4_hat: b - a,
            sigma_hat: sigma,
            delta_mat: dm,
            g_mat: gm,
            h_mat: hm,
            v1,
            v2,
            v3,
            v_hat,
            s_samples,
            rates_cov,
            scale,
            warnings,
        },
    ))
}
