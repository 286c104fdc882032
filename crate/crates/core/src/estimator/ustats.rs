use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{Graph, Vertex};
use crate::replicates::ReplicateSet;

/// Edge density of one replicate (`u1_hat`), pairwise-disagreement
/// statistic of the first two (`u2_hat`) and exactly-one-of-three statistic
/// of the first three (`u3_hat`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UStats {
    pub u1_hat: f64,
    pub u2_hat: f64,
    pub u3_hat: f64,
}

impl UStats {
    /// Population values `E[û]` for true density `δ` under rates `(α, β)`.
    pub fn expected(alpha: f64, beta: f64, delta: f64) -> Self {
        let (a, b, d) = (alpha, beta, delta);
        UStats {
            u1_hat: (1.0 - d) * a + d * (1.0 - b),
            u2_hat: (1.0 - d) * a * (1.0 - a) + d * b * (1.0 - b),
            u3_hat: (1.0 - d) * a * (1.0 - a) * (1.0 - a) + d * b * b * (1.0 - b),
        }
    }
}

/// Upper-triangle neighbours of `v`.
fn upper(g: &Graph, v: usize) -> &[Vertex] {
    let list = g.neighbors(v);
    &list[list.partition_point(|&w| (w as usize) <= v)..]
}

fn count_common2(a: &[Vertex], b: &[Vertex]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

fn count_common3(a: &[Vertex], b: &[Vertex], c: &[Vertex]) -> usize {
    let (mut i, mut j, mut k, mut n) = (0, 0, 0, 0);
    while i < a.len() && j < b.len() && k < c.len() {
        let m = a[i].max(b[j]).max(c[k]);
        if a[i] == m && b[j] == m && c[k] == m {
            n += 1;
            i += 1;
            j += 1;
            k += 1;
        } else {
            if a[i] < m {
                i += 1;
            }
            if b[j] < m {
                j += 1;
            }
            if c[k] < m {
                k += 1;
            }
        }
    }
    n
}

fn common_edges(x: &Graph, y: &Graph) -> usize {
    (0..x.num_vertices())
        .map(|v| count_common2(upper(x, v), upper(y, v)))
        .sum()
}

fn common_edges3(x: &Graph, y: &Graph, z: &Graph) -> usize {
    (0..x.num_vertices())
        .map(|v| count_common3(upper(x, v), upper(y, v), upper(z, v)))
        .sum()
}

/// Number of pairs that are an edge in exactly one of the three graphs.
pub(crate) fn exactly_one_count(a: &Graph, b: &Graph, c: &Graph) -> usize {
    let singles = a.num_edges() + b.num_edges() + c.num_edges();
    let pairs = common_edges(a, b) + common_edges(a, c) + common_edges(b, c);
    let triple = common_edges3(a, b, c);
    singles + 3 * triple - 2 * pairs
}

/// `|E(a) Δ E(b)|`.
pub(crate) fn symmetric_difference(a: &Graph, b: &Graph) -> usize {
    a.num_edges() + b.num_edges() - 2 * common_edges(a, b)
}

/// The three u-statistics from the first three replicates, by sorted-list
/// merges in `O(Σ|E|)`.
pub fn u_stats(reps: &ReplicateSet) -> Result<UStats> {
    reps.require(3)?;
    let g = reps.graphs();
    let n = reps.n() as f64;
    let ordered_pairs = n * (n - 1.0);
    Ok(UStats {
        u1_hat: 2.0 * g[0].num_edges() as f64 / ordered_pairs,
        u2_hat: symmetric_difference(&g[0], &g[1]) as f64 / ordered_pairs,
        u3_hat: 2.0 * exactly_one_count(&g[0], &g[1], &g[2]) as f64 / (3.0 * ordered_pairs),
    })
}
