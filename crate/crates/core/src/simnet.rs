//! Cosine similarity and thresholded similarity networks.

use std::collections::BTreeSet;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{canonicalize, EmbeddingTable, Vector, VectorError};

/// Default edge threshold for [`build_similarity_network`].
pub const DEFAULT_THRESHOLD: f64 = 0.3;

/// Slack allowed above |1| before a cosine is treated as a numerical fault.
const CLAMP_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("cosine of a zero vector is undefined")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cosine {0} exceeds [-1, 1] beyond rounding slack")]
    OutOfRange(f64),
}

/// Cosine similarity `x·y / (‖x‖‖y‖)` on the raw (unnormalized) vectors.
///
/// Results that exceed ±1 by at most 1e-9 through rounding are clamped.
pub fn cosine(x: &Vector, y: &Vector) -> Result<f64, SimilarityError> {
    let dot = x.dot(y).map_err(|e| match e {
        VectorError::DimensionMismatch(a, b) => SimilarityError::DimensionMismatch(a, b),
        _ => SimilarityError::ZeroVector,
    })?;
    let denom = x.norm() * y.norm();
    if denom == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    let c = dot / denom;
    if c.abs() > 1.0 {
        if c.abs() - 1.0 <= CLAMP_SLACK {
            return Ok(c.clamp(-1.0, 1.0));
        }
        return Err(SimilarityError::OutOfRange(c));
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Undirected weighted graph over a sorted word set. Edges satisfy
/// `source < target` and are ordered by `(source, target)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityNetwork {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub threshold: f64,
}

impl SimilarityNetwork {
    /// Edges as `(source word, target word, weight)`.
    pub fn edge_triples(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.edges
            .iter()
            .map(|e| (self.nodes[e.source].as_str(), self.nodes[e.target].as_str(), e.weight))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("word {0:?} is not in the embedding table")]
    OutOfVocabulary(String),
    #[error("a network needs at least 2 distinct words, got {0}")]
    TooFewWords(usize),
    #[error("threshold {0} outside [-1, 1]")]
    ThresholdOutOfRange(f64),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// Builds the network whose edges are all word pairs with cosine at or
/// above `threshold`.
pub fn build_similarity_network<S: AsRef<str>>(
    table: &EmbeddingTable,
    words: &[S],
    threshold: f64,
) -> Result<SimilarityNetwork, NetworkError> {
    if !(-1.0..=1.0).contains(&threshold) {
        return Err(NetworkError::ThresholdOutOfRange(threshold));
    }
    let nodes: Vec<String> = words
        .iter()
        .map(|w| canonicalize(w.as_ref()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let vectors = nodes
        .iter()
        .map(|w| table.lookup(w).ok_or_else(|| NetworkError::OutOfVocabulary(w.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    if nodes.len() < 2 {
        return Err(NetworkError::TooFewWords(nodes.len()));
    }

    let mut edges = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let weight = cosine(vectors[i], vectors[j])?;
            if weight >= threshold {
                edges.push(Edge {
                    source: i,
                    target: j,
                    weight,
                });
            }
        }
    }
    Ok(SimilarityNetwork {
        nodes,
        edges,
        threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetworkFormat {
    EdgeCsv,
    Dot,
}

impl std::str::FromStr for NetworkFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" | "edge-csv" => Ok(NetworkFormat::EdgeCsv),
            "dot" => Ok(NetworkFormat::Dot),
            other => Err(format!("unknown network format {other:?} (expected csv or dot)")),
        }
    }
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Serializes a network. Weights use fixed six-decimal notation; output is
/// byte-identical for identical networks.
pub fn export_network(net: &SimilarityNetwork, format: NetworkFormat) -> Vec<u8> {
    match format {
        NetworkFormat::EdgeCsv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(["source", "target", "weight"]).expect("in-memory write");
            for (s, t, weight) in net.edge_triples() {
                w.write_record([s, t, &format!("{weight:.6}")])
                    .expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
        NetworkFormat::Dot => {
            let mut out = String::from("graph similarity {\n");
            out.push_str(&format!("  // threshold={:.6}\n", net.threshold));
            for n in &net.nodes {
                out.push_str(&format!("  {};\n", dot_quote(n)));
            }
            for (s, t, weight) in net.edge_triples() {
                out.push_str(&format!(
                    "  {} -- {} [weight={weight:.6}];\n",
                    dot_quote(s),
                    dot_quote(t)
                ));
            }
            out.push_str("}\n");
            out.into_bytes()
        }
    }
}

#[derive(Debug, Error)]
pub enum EdgeCsvError {
    #[error("edge csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("edge csv: bad header")]
    Header,
    #[error("edge csv line {line}: {msg}")]
    Row { line: u64, msg: String },
}

/// Reads an edge CSV produced by [`export_network`] into
/// `(source, target, weight)` triples.
pub fn read_edge_csv<R: Read>(reader: R) -> Result<Vec<(String, String, f64)>, EdgeCsvError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    if r.headers()?.iter().collect::<Vec<_>>() != ["source", "target", "weight"] {
        return Err(EdgeCsvError::Header);
    }
    let mut out = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 3 {
            return Err(EdgeCsvError::Row {
                line,
                msg: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let weight = record[2].parse::<f64>().map_err(|e| EdgeCsvError::Row {
            line,
            msg: e.to_string(),
        })?;
        out.push((record[0].to_owned(), record[1].to_owned(), weight));
    }
    Ok(out)
}
