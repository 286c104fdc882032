//! Labeled edge lists from disk, replicate alignment on shared vertices,
//! consensus graphs, and the canonical `i<TAB>j` format with its JSON sidecar.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::replicates::ReplicateSet;

/// One undirected contact, stored with `label_a < label_b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub label_a: String,
    pub label_b: String,
    pub weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledEdgeList {
    /// Deduplicated, sorted by `(label_a, label_b)`.
    pub records: Vec<EdgeRecord>,
    pub source_name: String,
    /// Every label seen on a well-formed line, including lines dropped by the
    /// weight threshold or the self-loop rule.
    pub labels: BTreeSet<String>,
    pub self_loops_dropped: usize,
    pub warnings: Vec<String>,
}

impl LabeledEdgeList {
    /// Builds a list from in-memory pairs, applying the same normalization
    /// as the file reader.
    pub fn from_pairs<'a, I>(source_name: &str, pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut b = Builder::new(source_name, 0);
        for (x, y) in pairs {
            b.push(x.trim(), y.trim(), None, true);
        }
        b.finish()
    }

    pub fn num_edges(&self) -> usize {
        self.records.len()
    }

    /// The graph on this list's labels, indexed in lexicographic order.
    pub fn to_graph(&self) -> LabeledGraph {
        let labels: Vec<String> = self.labels.iter().cloned().collect();
        let index = label_index(&labels);
        LabeledGraph {
            graph: induced(self, &index, labels.len()),
            labels,
        }
    }

    fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.records.iter().map(|r| (r.label_a.as_str(), r.label_b.as_str()))
    }
}

struct Builder {
    source_name: String,
    line_offset: usize,
    edges: BTreeMap<(String, String), Option<f64>>,
    labels: BTreeSet<String>,
    self_loops: usize,
    warnings: Vec<String>,
}

impl Builder {
    fn new(source_name: &str, line_offset: usize) -> Self {
        Builder {
            source_name: source_name.to_owned(),
            line_offset,
            edges: BTreeMap::new(),
            labels: BTreeSet::new(),
            self_loops: 0,
            warnings: Vec::new(),
        }
    }

    fn push(&mut self, a: &str, b: &str, weight: Option<f64>, keep: bool) {
        self.labels.insert(a.to_owned());
        self.labels.insert(b.to_owned());
        if a == b {
            self.self_loops += 1;
            self.warnings.push(format!(
                "{}:{}: self-loop dropped on '{a}'",
                self.source_name, self.line_offset
            ));
            return;
        }
        if !keep {
            return;
        }
        let key = if a < b { (a.to_owned(), b.to_owned()) } else { (b.to_owned(), a.to_owned()) };
        // Duplicates keep the largest weight seen.
        let slot = self.edges.entry(key).or_insert(weight);
        if let (Some(old), Some(new)) = (*slot, weight) {
            *slot = Some(old.max(new));
        }
    }

    fn finish(self) -> LabeledEdgeList {
        LabeledEdgeList {
            records: self
                .edges
                .into_iter()
                .map(|((label_a, label_b), weight)| EdgeRecord { label_a, label_b, weight })
                .collect(),
            source_name: self.source_name,
            labels: self.labels,
            self_loops_dropped: self.self_loops,
            warnings: self.warnings,
        }
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').collect()
    } else if line.contains(',') {
        line.split(',').collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses records `label_a, label_b[, weight]` separated by tabs, commas or
/// (failing both) whitespace. Lines starting with `#` and blank lines are
/// skipped. With a threshold, only records with `weight > threshold` become
/// edges and every record must carry a weight.
pub fn parse_edge_list<R: BufRead>(
    reader: R,
    source_name: &str,
    weight_threshold: Option<f64>,
) -> Result<LabeledEdgeList> {
    if let Some(t) = weight_threshold {
        if !t.is_finite() {
            return Err(Error::invalid(format!("weight threshold {t} is not finite")));
        }
    }
    let mut b = Builder::new(source_name, 0);
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(source_name),
        line,
        message,
    };
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields = split_fields(body);
        if !(2..=3).contains(&fields.len()) {
            return Err(err(lineno, format!("expected 2 or 3 fields, found {}", fields.len())));
        }
        let (a, c) = (fields[0].trim(), fields[1].trim());
        if a.is_empty() || c.is_empty() {
            return Err(err(lineno, "empty vertex label".into()));
        }
        let weight = match fields.get(2).map(|w| w.trim()) {
            None | Some("") => None,
            Some(w) => {
                let v: f64 = w
                    .parse()
                    .map_err(|_| err(lineno, format!("weight '{w}' is not a number")))?;
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(err(lineno, format!("weight {v} is not a nonnegative number")));
                }
                Some(v)
            }
        };
        let keep = match (weight_threshold, weight) {
            (None, _) => true,
            (Some(t), Some(w)) => w > t,
            (Some(_), None) => {
                return Err(err(lineno, "weight threshold set but record has no weight".into()))
            }
        };
        b.line_offset = lineno;
        b.push(a, c, weight, keep);
    }
    Ok(b.finish())
}

pub fn read_edge_list(path: &Path, weight_threshold: Option<f64>) -> Result<LabeledEdgeList> {
    let file = File::open(path)?;
    parse_edge_list(BufReader::new(file), &path.display().to_string(), weight_threshold)
}

/// Reads several files concurrently, preserving input order.
pub fn read_edge_lists(paths: &[PathBuf], weight_threshold: Option<f64>) -> Result<Vec<LabeledEdgeList>> {
    paths.par_iter().map(|p| read_edge_list(p, weight_threshold)).collect()
}

/// A graph together with the label of each dense vertex index.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Alignment {
    pub replicates: ReplicateSet,
    /// Index `i` of every replicate is the vertex labeled `labels[i]`.
    pub labels: Vec<String>,
}

impl Alignment {
    pub fn common_vertices(&self) -> usize {
        self.labels.len()
    }
}

fn induced(list: &LabeledEdgeList, index: &BTreeMap<&str, usize>, n: usize) -> Graph {
    let edges = list
        .pairs()
        .filter_map(|(a, b)| Some((*index.get(a)?, *index.get(b)?)));
    Graph::from_edges(n, edges).expect("indices come from the label map and labels differ")
}

fn label_index(labels: &[String]) -> BTreeMap<&str, usize> {
    labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
}

/// Restricts every list to the labels present in all of them, indexed in
/// lexicographic label order, and keeps the induced edges.
pub fn align_replicates(lists: &[LabeledEdgeList]) -> Result<Alignment> {
    if lists.len() < 3 {
        return Err(Error::TooFewReplicates { needed: 3, got: lists.len() });
    }
    let mut common = lists[0].labels.clone();
    for l in &lists[1..] {
        common.retain(|x| l.labels.contains(x));
    }
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let labels: Vec<String> = common.into_iter().collect();
    let index = label_index(&labels);
    let graphs = lists.iter().map(|l| induced(l, &index, labels.len())).collect();
    Ok(Alignment {
        replicates: ReplicateSet::new(graphs)?,
        labels,
    })
}

/// Which labels form the vertex set of a consensus graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexSet {
    #[default]
    Union,
    Intersection,
}

/// Keeps a pair as a true edge iff it is observed in at least
/// `min_occurrences` lists.
pub fn consensus_true_network(
    lists: &[LabeledEdgeList],
    min_occurrences: usize,
    vertex_set: VertexSet,
) -> Result<LabeledGraph> {
    if lists.len() < 2 {
        return Err(Error::TooFewReplicates { needed: 2, got: lists.len() });
    }
    if min_occurrences < 1 {
        return Err(Error::invalid("min_occurrences must be at least 1"));
    }
    let mut vertices = lists[0].labels.clone();
    for l in &lists[1..] {
        match vertex_set {
            VertexSet::Union => vertices.extend(l.labels.iter().cloned()),
            VertexSet::Intersection => vertices.retain(|x| l.labels.contains(x)),
        }
    }
    let labels: Vec<String> = vertices.into_iter().collect();
    let index = label_index(&labels);
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for l in lists {
        for (a, b) in l.pairs() {
            if let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) {
                *counts.entry((i.min(j), i.max(j))).or_insert(0) += 1;
            }
        }
    }
    let edges = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_occurrences)
        .map(|(e, _)| e);
    Ok(LabeledGraph {
        graph: Graph::from_edges(labels.len(), edges)?,
        labels,
    })
}

/// Contents of the JSON sidecar written next to a canonical edge list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub n: usize,
    pub label_map: Vec<String>,
}

/// `<path>.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Canonical text: one `i\tj` line per edge with `i < j`, sorted.
pub fn write_canonical_to<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    for (i, j) in g.edges() {
        writeln!(out, "{i}\t{j}")?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the canonical edge list and its sidecar. Without labels the
/// label map is the decimal index of each vertex.
pub fn write_canonical(g: &Graph, labels: Option<&[String]>, path: &Path) -> Result<()> {
    let label_map = match labels {
        Some(l) if l.len() != g.num_vertices() => {
            return Err(Error::invalid(format!(
                "{} labels for {} vertices",
                l.len(),
                g.num_vertices()
            )))
        }
        Some(l) => l.to_vec(),
        None => (0..g.num_vertices()).map(|i| i.to_string()).collect(),
    };
    write_canonical_to(g, BufWriter::new(File::create(path)?))?;
    let sidecar = Sidecar { n: g.num_vertices(), label_map };
    let mut f = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(&mut f, &sidecar)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Reads a canonical edge list. The vertex count and labels come from the
/// sidecar when it exists; otherwise `n` is one past the largest index.
pub fn read_canonical(path: &Path) -> Result<LabeledGraph> {
    let name = path.display().to_string();
    let list = read_edge_list(path, None)?;
    let err = |message: String| Error::Parse { path: path.to_owned(), line: 0, message };
    let mut edges = Vec::with_capacity(list.records.len());
    for r in &list.records {
        let i: usize = r.label_a.parse().map_err(|_| err(format!("vertex '{}' is not an index", r.label_a)))?;
        let j: usize = r.label_b.parse().map_err(|_| err(format!("vertex '{}' is not an index", r.label_b)))?;
        edges.push((i, j));
    }
    let side = sidecar_path(path);
    let (n, labels) = if side.exists() {
        let s: Sidecar = serde_json::from_reader(BufReader::new(File::open(&side)?))?;
        if s.label_map.len() != s.n {
            return Err(err(format!("{}: label_map has {} entries for n = {}", side.display(), s.label_map.len(), s.n)));
        }
        (s.n, s.label_map)
    } else {
        let n = edges.iter().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(0);
        (n, (0..n).map(|i| i.to_string()).collect())
    };
    if list.self_loops_dropped > 0 {
        return Err(err(format!("{name} contains self-loops")));
    }
    Ok(LabeledGraph { graph: Graph::from_edges(n, edges)?, labels })
}

/// Reads one graph: canonical when a sidecar exists, labeled otherwise.
pub fn load_graph(path: &Path, weight_threshold: Option<f64>) -> Result<LabeledGraph> {
    if sidecar_path(path).exists() {
        if weight_threshold.is_some() {
            return Err(Error::invalid("canonical edge lists carry no weights"));
        }
        read_canonical(path)
    } else {
        Ok(read_edge_list(path, weight_threshold)?.to_graph())
    }
}

/// Loads replicate files. When every file has a sidecar they are read as
/// canonical lists on a shared vertex set; otherwise they are read as
/// labeled lists and aligned on their common labels.
pub fn load_replicates(paths: &[PathBuf], weight_threshold: Option<f64>) -> Result<Alignment> {
    if !paths.is_empty() && paths.iter().all(|p| sidecar_path(p).exists()) {
        if weight_threshold.is_some() {
            return Err(Error::invalid("canonical edge lists carry no weights"));
        }
        let graphs: Vec<LabeledGraph> = paths.par_iter().map(|p| read_canonical(p)).collect::<Result<_>>()?;
        if graphs.len() < 3 {
            return Err(Error::TooFewReplicates { needed: 3, got: graphs.len() });
        }
        let labels = graphs[0].labels.clone();
        if graphs.iter().any(|g| g.labels != labels) {
            return Err(Error::invalid("canonical replicates disagree on their label maps"));
        }
        return Ok(Alignment {
            replicates: ReplicateSet::new(graphs.into_iter().map(|g| g.graph).collect())?,
            labels,
        });
    }
    align_replicates(&read_edge_lists(paths, weight_threshold)?)
}
