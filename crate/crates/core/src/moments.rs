//! Exact finite-`n` moments of the observed degree sums `X = Σ d̃_i²` and
//! `Y = Σ d̃_i`, plus the leading-order bias and variance predictions for
//! the naive plug-in `κ̃ = X / Y`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::noise::NoiseParams;

/// Moments of `(X, Y)` under the noise model.
///
/// `e_y` and `e_x` hold for any `(α, β)`. The second-order fields use the
/// closed forms that assume edge-unbiased noise and are `None` otherwise;
/// [`exact_second_moments`] has no such restriction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub e_y: f64,
    pub e_x: f64,
    pub var_y: Option<f64>,
    pub cov_xy: Option<f64>,
    pub var_x: Option<f64>,
    /// `E[X] / E[Y]`, or 0 when `E[Y] = 0`.
    pub ratio: f64,
    pub kappa_true: f64,
    pub edge_unbiased: bool,
}

/// Variance and covariance of `(X, Y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondMoments {
    pub var_y: f64,
    pub cov_xy: f64,
    pub var_x: f64,
}

/// Whether `α|E^c| = β|E|` up to `1e-9 |E|`.
pub fn is_edge_unbiased(g: &Graph, p: NoiseParams) -> bool {
    let edges = g.num_edges() as f64;
    let non_edges = g.num_non_edges() as f64;
    (p.alpha() * non_edges - p.beta() * edges).abs() <= 1e-9 * edges
}

struct Sums {
    n: f64,
    s1: f64,
    s2: f64,
    s3: f64,
}

impl Sums {
    fn of(g: &Graph) -> Self {
        let st = g.degree_stats();
        Sums {
            n: g.num_vertices() as f64,
            s1: st.sum_d as f64,
            s2: st.sum_d2 as f64,
            s3: st.sum_d3 as f64,
        }
    }
}

/// `(Σ_{i≠j} d_i d_j I{A_ij=1}, Σ_{i≠j} d_i d_j I{A_ij=0})`, the second as the
/// complement `(Σd)² - Σd² - first`.
pub fn adjacency_degree_products(g: &Graph) -> (f64, f64) {
    let d = g.degrees();
    let on: u128 = g
        .edges()
        .map(|(i, j)| 2 * d[i] as u128 * d[j] as u128)
        .sum();
    let st = g.degree_stats();
    let all = st.sum_d as u128 * st.sum_d as u128 - st.sum_d2 as u128;
    (on as f64, (all - on) as f64)
}

fn expected_y(s: &Sums, a: f64, k: f64) -> f64 {
    a * s.n * (s.n - 1.0) + k * s.s1
}

fn expected_x(s: &Sums, a: f64, b: f64, k: f64) -> f64 {
    let n = s.n;
    k * k * s.s2
        + (b * (1.0 - b) - a * (1.0 - a) + 2.0 * a * (n - 1.0) * k) * s.s1
        + a * n * (n - 1.0) * (1.0 - a + a * (n - 1.0))
}

fn var_y_closed(s: &Sums, a: f64, b: f64) -> f64 {
    2.0 * b * (2.0 - a - b) * s.s1
}

fn cov_closed(s: &Sums, a: f64, b: f64, k: f64) -> f64 {
    let n = s.n;
    4.0 * (b - a) * k * k * s.s2
        + 2.0
            * (b * ((1.0 - a) * (1.0 - 2.0 * a) - (1.0 - b) * (1.0 - 2.0 * b))
                + 2.0 * a * (n - 1.0) * (b * (1.0 - b) + (1.0 - a) * (1.0 - a)))
            * s.s1
}

/// Term groups of the closed-form `Var[X]`, summed by [`var_x_closed`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarXTerms {
    pub cubic: f64,
    pub quadratic: f64,
    pub linear: f64,
    pub adjacency: f64,
    /// `n(n-1)αβ(α-β)`; without it the remaining groups miss the exact
    /// variance by exactly this amount.
    pub correction: f64,
}

impl VarXTerms {
    pub fn total(&self) -> f64 {
        self.cubic + self.quadratic + self.linear + self.adjacency + self.correction
    }
}

/// Coefficient of `Σd` in the closed-form `Var[X]`.
fn var_x_linear_coefficient(n: f64, a: f64, b: f64, k: f64) -> f64 {
    let a2 = a * a;
    let a3 = a2 * a;
    let b2 = b * b;
    let g1 = k
        * (-38.0 * a3 + 2.0 * a2 * (17.0 + 11.0 * b) + b * (1.0 - 6.0 * b + 6.0 * b2)
            - a * (5.0 + 14.0 * b2)
            + 4.0 * a * (1.0 + 11.0 * a2 + 2.0 * b2 - a * (9.0 + 5.0 * b)) * n
            + 4.0 * a2 * (2.0 - 3.0 * a + b) * n * n);
    let g2 = (1.0 - a)
        * (a + b)
        * (1.0 - 12.0 * a + 20.0 * a2 + 6.0 * (1.0 - 3.0 * a) * a * n + 4.0 * a2 * n * n);
    let g3 = 2.0 * k * (3.0 * a2 - b * (1.0 - b) - a * (1.0 + 2.0 * b) + a * (1.0 - 2.0 * a + b) * n);
    let g4 = 4.0 * k * (-8.0 * a3 + 3.0 * a * (1.0 - b) * b + (1.0 - b) * (1.0 - b) * b + 4.0 * a2 * (1.0 + b));
    let g5 = -8.0
        * a
        * (5.0 * a3 + (1.0 - b) * (1.0 - b) * b - a2 * (8.0 - 3.0 * b) + a * (3.0 - 2.0 * b - b2))
        * n;
    let g6 = 4.0 * a2 * (2.0 + 3.0 * a2 - b - b2 - a * (5.0 - 2.0 * b)) * n * n;
    let g7 = 2.0 * a * (1.0 - a) * (a + b) * (n - 2.0) * (1.0 + 2.0 * a * (n - 2.0));
    let g8 = b * (a * (a - 3.0) - b * (b - 3.0));
    let g9 = 2.0 * a * (n - 1.0) * (b * (1.0 - b) + (1.0 - a) * (1.0 - a));
    g1 + g2 + g3 + g4 + g5 + g6 + g7 + g8 + g9
}

/// Closed-form `Var[X]` under edge-unbiased noise, by term group.
pub fn var_x_terms(g: &Graph, p: NoiseParams) -> VarXTerms {
    let s = Sums::of(g);
    let (a, b, k) = (p.alpha(), p.beta(), p.k3());
    let n = s.n;
    let (on, off) = adjacency_degree_products(g);
    VarXTerms {
        cubic: 4.0 * (b - a) * k * k * k * s.s3,
        quadratic: 2.0
            * k
            * k
            * (19.0 * a * a + 9.0 * b * b - 6.0 * a * (1.0 + 3.0 * b) - 4.0 * b
                + 2.0 * a * (1.0 + 4.0 * b - 5.0 * a) * n)
            * s.s2,
        linear: var_x_linear_coefficient(n, a, b, k) * s.s1,
        adjacency: 4.0 * k * k * (a * (1.0 - a) * off + b * (1.0 - b) * on),
        correction: n * (n - 1.0) * a * b * (a - b),
    }
}

fn var_x_closed(g: &Graph, p: NoiseParams) -> f64 {
    var_x_terms(g, p).total()
}

/// Moments of `(X, Y)` for observations of `g` under `p`.
pub fn expected_moments(g: &Graph, p: NoiseParams) -> Result<MomentReport> {
    if g.num_vertices() < 3 {
        return Err(Error::TooFewVertices {
            needed: 3,
            got: g.num_vertices(),
        });
    }
    let s = Sums::of(g);
    let (a, b, k) = (p.alpha(), p.beta(), p.k3());
    let e_y = expected_y(&s, a, k);
    let e_x = expected_x(&s, a, b, k);
    let unbiased = is_edge_unbiased(g, p);
    let (var_y, cov_xy, var_x) = if unbiased {
        (
            Some(var_y_closed(&s, a, b)),
            Some(cov_closed(&s, a, b, k)),
            Some(var_x_closed(g, p)),
        )
    } else {
        (None, None, None)
    };
    Ok(MomentReport {
        e_y,
        e_x,
        var_y,
        cov_xy,
        var_x,
        ratio: if e_y > 0.0 { e_x / e_y } else { 0.0 },
        kappa_true: g.branching_factor(),
        edge_unbiased: unbiased,
    })
}

/// `Var[Y]`, `Cov(X, Y)` and `Var[X]` for arbitrary `(α, β)` in `O(n + |E|)`.
///
/// Writing `X = Σ_i (Σ_j Ã_ij)²` as a polynomial in the independent pair
/// indicators, the variance splits into a part from single pairs,
/// `Σ_e 4 (1 + m_i + m_j - 2 p_e)² v_e`, and a part from pairs of distinct
/// pairs sharing a vertex, `2 Σ_i (V_i² - W_i)`, where `p_e` and
/// `v_e = p_e(1-p_e)` are the pair's observation probability and variance,
/// `m_i = E d̃_i`, `V_i = Var d̃_i` and `W_i = Σ_{j} v_ij²`.
pub fn exact_second_moments(g: &Graph, p: NoiseParams) -> SecondMoments {
    let n = g.num_vertices();
    let (a, b) = (p.alpha(), p.beta());
    let k1 = a * (1.0 - a);
    let k2 = b * (1.0 - b);
    let others = n.saturating_sub(1) as f64;
    let d = g.degrees();
    let m: Vec<f64> = d
        .iter()
        .map(|&di| a * (others - di as f64) + (1.0 - b) * di as f64)
        .collect();

    // non-edge terms as (all pairs) - (edges), both evaluated at p = α
    let c_off = 1.0 - 2.0 * a;
    let c_on = 1.0 - 2.0 * (1.0 - b);
    let nf = n as f64;
    let sm: f64 = m.iter().sum();
    let qm: f64 = m.iter().map(|x| x * x).sum();
    let diag1: f64 = m.iter().map(|x| c_off + 2.0 * x).sum();
    let diag2: f64 = m.iter().map(|x| (c_off + 2.0 * x).powi(2)).sum();
    let all1 = 0.5 * (nf * nf * c_off + 2.0 * nf * sm - diag1);
    let all2 =
        0.5 * (nf * nf * c_off * c_off + 2.0 * nf * qm + 4.0 * c_off * nf * sm + 2.0 * sm * sm - diag2);
    let (mut on1, mut on2, mut on_as_off1, mut on_as_off2) = (0.0, 0.0, 0.0, 0.0);
    for (i, j) in g.edges() {
        let base = m[i] + m[j];
        let x_on = c_on + base;
        let x_off = c_off + base;
        on1 += x_on;
        on2 += x_on * x_on;
        on_as_off1 += x_off;
        on_as_off2 += x_off * x_off;
    }
    let off1 = all1 - on_as_off1;
    let off2 = all2 - on_as_off2;

    let shared: f64 = d
        .iter()
        .map(|&di| {
            let on = di as f64;
            let off = others - on;
            let v = k1 * off + k2 * on;
            let w = k1 * k1 * off + k2 * k2 * on;
            v * v - w
        })
        .sum();
    let edges = g.num_edges() as f64;
    let non_edges = g.num_non_edges() as f64;
    SecondMoments {
        var_y: 4.0 * (k1 * non_edges + k2 * edges),
        cov_xy: 4.0 * (k1 * off1 + k2 * on1),
        var_x: 4.0 * (k1 * off2 + k2 * on2) + 2.0 * shared,
    }
}

/// `E[X] / E[Y]`, the leading approximation to `E[κ̃]`.
pub fn naive_kappa_expectation(g: &Graph, p: NoiseParams) -> Result<f64> {
    let s = Sums::of(g);
    let e_y = expected_y(&s, p.alpha(), p.k3());
    if e_y <= 0.0 {
        return Err(Error::invalid("E[Y] must be positive"));
    }
    Ok(expected_x(&s, p.alpha(), p.beta(), p.k3()) / e_y)
}

/// `(2-α-β) [α(n-1) + β - (α+β) κ]`, the bias of `κ̃` to leading order under
/// edge-unbiased noise.
pub fn bias_leading_term(g: &Graph, p: NoiseParams) -> Result<f64> {
    if !is_edge_unbiased(g, p) {
        return Err(Error::NotEdgeUnbiased);
    }
    let (a, b) = (p.alpha(), p.beta());
    let n = g.num_vertices() as f64;
    Ok((2.0 - a - b) * (a * (n - 1.0) + b - (a + b) * g.branching_factor()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Density {
    /// Mean degree of order `log n`.
    Sparse,
    /// Mean degree of order `n^c`, `0 < c < 1`.
    Dense { c: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Heterogeneity {
    /// Poisson-like degrees.
    Homogeneous,
    /// Truncated-Pareto degrees with shape `zeta`.
    Pareto { zeta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub density: Density,
    pub heterogeneity: Heterogeneity,
}

impl RegimeSpec {
    pub fn new(density: Density, heterogeneity: Heterogeneity) -> Result<Self> {
        if let Density::Dense { c } = density {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::invalid(format!("dense exponent {c} must lie in (0, 1)")));
            }
        }
        if let Heterogeneity::Pareto { zeta } = heterogeneity {
            if !(zeta > 0.0 && zeta.is_finite()) {
                return Err(Error::invalid(format!("shape {zeta} must be positive")));
            }
        }
        Ok(RegimeSpec {
            density,
            heterogeneity,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum RegimeBias {
    /// The bias is `o(κ)`.
    Negligible,
    Leading(f64),
}

/// Leading-order bias of `κ̃` for a regime: negligible for homogeneous
/// degrees, `-β(2-α-β)κ` for Pareto shape `ζ ≤ 2` and `-β(2-α-β)κ/(ζ-1)²`
/// above.
pub fn regime_bias_prediction(kappa: f64, p: NoiseParams, regime: &RegimeSpec) -> RegimeBias {
    let scale = -p.beta() * (2.0 - p.alpha() - p.beta()) * kappa;
    match regime.heterogeneity {
        Heterogeneity::Homogeneous => RegimeBias::Negligible,
        Heterogeneity::Pareto { zeta } if zeta <= 2.0 => RegimeBias::Leading(scale),
        Heterogeneity::Pareto { zeta } => RegimeBias::Leading(scale / ((zeta - 1.0) * (zeta - 1.0))),
    }
}

/// `n^n_exponent · (log n)^log_exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Order {
    pub n_exponent: f64,
    pub log_exponent: f64,
}

impl Order {
    pub fn eval(&self, n: f64) -> f64 {
        n.powf(self.n_exponent) * n.ln().powf(self.log_exponent)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O(n^{}", self.n_exponent)?;
        if self.log_exponent != 0.0 {
            write!(f, " * log(n)^{}", self.log_exponent)?;
        }
        write!(f, ")")
    }
}

/// The order bound on `Var[κ̃]` for a regime.
pub fn variance_order(regime: &RegimeSpec) -> Order {
    let o = |n_exponent, log_exponent| Order {
        n_exponent,
        log_exponent,
    };
    match (regime.density, regime.heterogeneity) {
        (Density::Sparse, Heterogeneity::Homogeneous) => o(-0.5, 0.5),
        (Density::Dense { c }, Heterogeneity::Homogeneous) => o((c - 1.0) / 2.0, 0.0),
        (Density::Sparse, Heterogeneity::Pareto { zeta }) => {
            if zeta < 1.0 {
                o(1.0, -1.0)
            } else if zeta == 1.0 {
                o(1.0, -2.0)
            } else if zeta < 2.5 {
                o(2.0 - zeta, zeta - 2.0)
            } else {
                o(-0.5, 0.5)
            }
        }
        (Density::Dense { c }, Heterogeneity::Pareto { zeta }) => {
            if zeta < 1.0 {
                o(1.0 - c, 0.0)
            } else if zeta == 1.0 {
                o(1.0 - c, -1.0)
            } else if zeta < 2.5 {
                o((2.0 - zeta) * (1.0 - c), 0.0)
            } else {
                o((c - 1.0) / 2.0, 0.0)
            }
        }
    }
}

/// A variance order together with its value at a particular `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderBound {
    pub order: Order,
    pub value: f64,
}

pub fn variance_order_bound(n: usize, regime: &RegimeSpec) -> OrderBound {
    let order = variance_order(regime);
    OrderBound {
        order,
        value: order.eval(n as f64),
    }
}
