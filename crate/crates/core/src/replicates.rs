use crate::error::{Error, Result};
use crate::graph::Graph;

/// Observed graphs over one common vertex set.
///
/// Order matters to the estimator: the first graph alone drives the edge
/// and two-star statistics, the first two drive the pairwise-difference
/// statistic, and the first three drive the exactly-one statistic.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateSet {
    graphs: Vec<Graph>,
}

impl ReplicateSet {
    pub fn new(graphs: Vec<Graph>) -> Result<Self> {
        let first = graphs.first().ok_or(Error::TooFewReplicates {
            needed: 1,
            got: 0,
        })?;
        let n = first.num_vertices();
        if let Some(bad) = graphs.iter().find(|g| g.num_vertices() != n) {
            return Err(Error::VertexCountMismatch {
                expected: n,
                got: bad.num_vertices(),
            });
        }
        Ok(ReplicateSet { graphs })
    }

    pub fn n(&self) -> usize {
        self.graphs[0].num_vertices()
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn first(&self) -> &Graph {
        &self.graphs[0]
    }

    pub fn into_graphs(self) -> Vec<Graph> {
        self.graphs
    }

    pub(crate) fn require(&self, needed: usize) -> Result<()> {
        if self.len() < needed {
            Err(Error::TooFewReplicates {
                needed,
                got: self.len(),
            })
        } else {
            Ok(())
        }
    }
}
