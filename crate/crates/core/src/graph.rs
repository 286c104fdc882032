//! Immutable simple undirected graphs and the degree-based statistics the
//! rest of the crate is built on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertices are dense indices `0..n`.
pub type Vertex = u32;

/// Undirected simple graph stored as sorted neighbour lists.
///
/// Construction rejects self-loops and collapses duplicate edges, so every
/// `Graph` value satisfies `sum(degrees) == 2 * num_edges()` and
/// `degree(i) <= n - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<Vertex>>,
    degrees: Vec<u32>,
    num_edges: usize,
}

/// Power sums of the degree sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub sum_d: u64,
    pub sum_d2: u64,
    pub sum_d3: u128,
    pub mean_degree: f64,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            degrees: vec![0; n],
            num_edges: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let adjacency = (0..n)
            .map(|i| (0..n as Vertex).filter(|&j| j as usize != i).collect())
            .collect();
        Graph {
            adjacency,
            degrees: vec![n.saturating_sub(1) as u32; n],
            num_edges: n * n.saturating_sub(1) / 2,
        }
    }

    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) are collapsed; self-loops and out-of-range endpoints are
    /// errors.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        for (a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            for v in [a, b] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            adjacency[a].push(b as Vertex);
            adjacency[b].push(a as Vertex);
        }
        Ok(Self::from_raw_adjacency(adjacency))
    }

    /// Sorts and dedups each list. Callers guarantee symmetry and no loops.
    pub(crate) fn from_raw_adjacency(mut adjacency: Vec<Vec<Vertex>>) -> Self {
        let mut twice_edges = 0usize;
        let degrees = adjacency
            .iter_mut()
            .map(|list| {
                list.sort_unstable();
                list.dedup();
                twice_edges += list.len();
                list.len() as u32
            })
            .collect();
        Graph {
            adjacency,
            degrees,
            num_edges: twice_edges / 2,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Number of vertex pairs, `n(n-1)/2`.
    pub fn num_pairs(&self) -> usize {
        let n = self.num_vertices();
        n * n.saturating_sub(1) / 2
    }

    /// `|E^c|`: unordered distinct pairs that are not edges.
    pub fn num_non_edges(&self) -> usize {
        self.num_pairs() - self.num_edges
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn degree(&self, v: usize) -> u32 {
        self.degrees[v]
    }

    pub fn neighbors(&self, v: usize) -> &[Vertex] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a >= self.num_vertices() || b >= self.num_vertices() {
            return false;
        }
        // search the shorter list
        let (short, other) = if self.adjacency[a].len() <= self.adjacency[b].len() {
            (a, b)
        } else {
            (b, a)
        };
        self.adjacency[short].binary_search(&(other as Vertex)).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, list)| {
            list.iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let mut sum_d = 0u64;
        let mut sum_d2 = 0u64;
        let mut sum_d3 = 0u128;
        for &d in &self.degrees {
            let d = d as u64;
            sum_d += d;
            sum_d2 += d * d;
            sum_d3 += (d * d) as u128 * d as u128;
        }
        let n = self.num_vertices();
        DegreeStats {
            sum_d,
            sum_d2,
            sum_d3,
            mean_degree: if n == 0 { 0.0 } else { sum_d as f64 / n as f64 },
        }
    }

    /// κ = Σd²/Σd, and 0 for a graph without edges.
    pub fn branching_factor(&self) -> f64 {
        branching_factor_of_degrees(&self.degrees)
    }

    /// `|E| / (n(n-1)/2)`.
    pub fn edge_density(&self) -> Result<f64> {
        self.require_vertices(2)?;
        Ok(self.num_edges as f64 / self.num_pairs() as f64)
    }

    /// Density of ordered two-stars `i - j - l` with `i, j, l` distinct,
    /// `Σ d_j (d_j - 1) / (n (n-1) (n-2))`.
    pub fn two_star_density(&self) -> Result<f64> {
        self.require_vertices(3)?;
        let n = self.num_vertices() as f64;
        let stars: u64 = self
            .degrees
            .iter()
            .map(|&d| d as u64 * (d as u64).saturating_sub(1))
            .sum();
        Ok(stars as f64 / (n * (n - 1.0) * (n - 2.0)))
    }

    /// `Σ_{i≠j≠l, i≠l} (A_ij - a)(A_jl - a)` in `O(n)` from degrees.
    ///
    /// With `s_j = d_j - a (n-1)` the full square `s_j²` counts `i = l` terms,
    /// whose total is `q_j = d_j (1-a)² + (n-1-d_j) a²`. Summing `s_j² - q_j`
    /// over `j` leaves `Σd² - Σd - 2a(n-2)Σd + a² n(n-1)(n-2)`, which only
    /// needs the exact integer sums and so does not depend on vertex order.
    pub fn centered_two_star_sum(&self, alpha_hat: f64) -> Result<f64> {
        self.require_vertices(3)?;
        let st = self.degree_stats();
        Ok(centered_two_star_sum_of_sums(
            st.sum_d,
            st.sum_d2,
            self.num_vertices(),
            alpha_hat,
        ))
    }

    /// The complement graph. `O(n²)`; intended for small graphs.
    pub fn complement(&self) -> Graph {
        let n = self.num_vertices();
        let adjacency = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && !self.has_edge(i, j))
                    .map(|j| j as Vertex)
                    .collect()
            })
            .collect();
        Graph::from_raw_adjacency(adjacency)
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.num_vertices();
        if perm.len() != n {
            return Err(Error::invalid(format!(
                "permutation has length {}, graph has {n} vertices",
                perm.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("not a permutation"));
            }
        }
        Graph::from_edges(n, self.edges().map(|(a, b)| (perm[a], perm[b])))
    }

    fn require_vertices(&self, needed: usize) -> Result<()> {
        if self.num_vertices() < needed {
            Err(Error::TooFewVertices {
                needed,
                got: self.num_vertices(),
            })
        } else {
            Ok(())
        }
    }
}

pub fn branching_factor_of_degrees(degrees: &[u32]) -> f64 {
    let (s1, s2) = degrees.iter().fold((0u64, 0u64), |(s1, s2), &d| {
        let d = d as u64;
        (s1 + d, s2 + d * d)
    });
    if s1 == 0 {
        0.0
    } else {
        s2 as f64 / s1 as f64
    }
}

pub(crate) fn centered_two_star_sum_of_sums(sum_d: u64, sum_d2: u64, n: usize, alpha: f64) -> f64 {
    let n = n as f64;
    let stars = (sum_d2 - sum_d) as f64;
    stars - 2.0 * alpha * (n - 2.0) * sum_d as f64 + alpha * alpha * n * (n - 1.0) * (n - 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    /// O(n³) loop over ordered distinct triples.
    fn brute_centered(g: &Graph, a: f64) -> f64 {
        let n = g.num_vertices();
        let x = |i: usize, j: usize| if g.has_edge(i, j) { 1.0 - a } else { -a };
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    if i != j && j != l && i != l {
                        total += x(i, j) * x(j, l);
                    }
                }
            }
        }
        total
    }

    #[test]
    fn branching_factor_examples() {
        assert_eq!(Graph::empty(5).branching_factor(), 0.0);
        assert_eq!(Graph::complete(3).branching_factor(), 2.0);
        assert_eq!(path3().branching_factor(), 1.5);
    }

    #[test]
    fn edge_density_examples() {
        assert_eq!(Graph::complete(3).edge_density().unwrap(), 1.0);
        assert_eq!(Graph::empty(4).edge_density().unwrap(), 0.0);
        assert!((path3().edge_density().unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            Graph::empty(1).edge_density(),
            Err(Error::TooFewVertices { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn two_star_density_examples() {
        // ordered triples of the path: (0,1,2) and (2,1,0) out of 6
        assert!((path3().two_star_density().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(Graph::complete(3).two_star_density().unwrap(), 1.0);
        assert_eq!(Graph::empty(5).two_star_density().unwrap(), 0.0);
        assert!(Graph::empty(2).two_star_density().is_err());
    }

    #[test]
    fn centered_sum_examples() {
        let g = path3();
        let st = g.degree_stats();
        assert_eq!(
            g.centered_two_star_sum(0.0).unwrap(),
            (st.sum_d2 - st.sum_d) as f64
        );
        // brute force: (0,1,2),(2,1,0) contribute 0.25 each, remaining four
        // ordered triples pass through a non-edge, each 0.5 * -0.5 = -0.25.
        let v = g.centered_two_star_sum(0.5).unwrap();
        assert!((v - brute_centered(&g, 0.5)).abs() < 1e-12);
        assert!((v - (-0.5)).abs() < 1e-12);
        // empty K3 complement: 6 ordered triples of (-0.1)(-0.1)
        let e = Graph::empty(3).centered_two_star_sum(0.1).unwrap();
        assert!((e - 6.0 * 0.01).abs() < 1e-15);
    }

    #[test]
    fn construction_rejects_loops_and_collapses_duplicates() {
        assert!(matches!(
            Graph::from_edges(3, [(1, 1)]),
            Err(Error::SelfLoop(1))
        ));
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
        let g = Graph::from_edges(3, [(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.degrees(), &[1, 1, 0]);
    }

    #[test]
    fn edges_are_sorted_pairs() {
        let g = Graph::from_edges(4, [(3, 0), (2, 1), (1, 0)]).unwrap();
        let e: Vec<_> = g.edges().collect();
        assert_eq!(e, vec![(0, 1), (0, 3), (1, 2)]);
        assert!(g.has_edge(3, 0));
        assert!(!g.has_edge(2, 3));
    }

    #[test]
    fn complement_and_relabel() {
        let g = path3();
        let c = g.complement();
        assert_eq!(c.edges().collect::<Vec<_>>(), vec![(0, 2)]);
        let r = g.relabel(&[2, 0, 1]).unwrap();
        assert_eq!(r.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
        assert!(g.relabel(&[0, 0, 1]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
            (3..=max_n).prop_flat_map(|n| {
                let pairs = n * (n - 1) / 2;
                proptest::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
                    let mut edges = Vec::new();
                    let mut k = 0;
                    for i in 0..n {
                        for j in i + 1..n {
                            if bits[k] {
                                edges.push((i, j));
                            }
                            k += 1;
                        }
                    }
                    Graph::from_edges(n, edges).unwrap()
                })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn handshake_and_degree_bound(g in arb_graph(30)) {
                let st = g.degree_stats();
                prop_assert_eq!(st.sum_d, 2 * g.num_edges() as u64);
                prop_assert!(g.degrees().iter().all(|&d| (d as usize) < g.num_vertices()));
            }

            #[test]
            fn kappa_between_min_and_max_degree(g in arb_graph(30)) {
                prop_assume!(g.num_edges() > 0);
                let k = g.branching_factor();
                let min = g.degrees().iter().copied().filter(|&d| d > 0).min().unwrap() as f64;
                let max = *g.degrees().iter().max().unwrap() as f64;
                prop_assert!(k >= min - 1e-12 && k <= max + 1e-12);
            }

            #[test]
            fn centered_sum_matches_triple_loop(g in arb_graph(20), a in 0.0f64..1.0) {
                let fast = g.centered_two_star_sum(a).unwrap();
                let slow = brute_centered(&g, a);
                let scale = (g.num_vertices().pow(3)) as f64;
                prop_assert!((fast - slow).abs() <= 1e-9 * scale.max(slow.abs()));
            }

            #[test]
            fn two_star_density_matches_triple_count(g in arb_graph(20)) {
                let n = g.num_vertices();
                let mut count = 0u64;
                for i in 0..n { for j in 0..n { for l in 0..n {
                    if i != j && j != l && i != l && g.has_edge(i, j) && g.has_edge(j, l) {
                        count += 1;
                    }
                }}}
                let expected = count as f64 / (n * (n - 1) * (n - 2)) as f64;
                prop_assert_eq!(g.two_star_density().unwrap(), expected);
            }
        }
    }
}
