//! JSON file formats for graphs (with optional matrices), vertex chains,
//! directed penalties and explicit boundary conditions.

use std::collections::HashMap;

use indexmap::IndexMap;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainLine, VertexChain};
use crate::error::{Error, Result};
use crate::graph::{ExternalSpec, GraphSpec, InternalSpec, MetricGraph};
use crate::linalg::{CMatrix, C64};
use crate::scattering::BoundaryConditions;
use crate::transition::TransitionCollection;

/// A matrix entry: a bare real number or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Number> for C64 {
    fn from(n: Number) -> C64 {
        match n {
            Number::Real(x) => C64::new(x, 0.0),
            Number::Complex([re, im]) => C64::new(re, im),
        }
    }
}

impl From<C64> for Number {
    fn from(z: C64) -> Number {
        if z.im == 0.0 {
            Number::Real(z.re)
        } else {
            Number::Complex([z.re, z.im])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixBlock {
    pub order: Vec<String>,
    pub entries: Vec<Vec<Number>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub internal: Vec<InternalSpec>,
    #[serde(default)]
    pub external: Vec<ExternalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<IndexMap<String, MatrixBlock>>,
}

fn to_cmatrix(rows: &[Vec<Number>], what: &str) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::ShapeMismatch(format!("ragged rows in {what}")));
    }
    Ok(CMatrix::from_fn(n, m, |r, c| rows[r][c].into()))
}

fn from_cmatrix(m: &CMatrix) -> Vec<Vec<Number>> {
    m.row_iter().map(|r| r.iter().map(|&z| z.into()).collect()).collect()
}

/// A parsed graph file.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: MetricGraph,
    pub matrices: Option<TransitionCollection>,
}

impl LoadedGraph {
    pub fn require_matrices(&self) -> Result<&TransitionCollection> {
        self.matrices
            .as_ref()
            .ok_or_else(|| Error::Parse("graph file has no `matrices` section".into()))
    }
}

pub fn parse_graph(text: &str) -> Result<LoadedGraph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    graph_from_file(&file)
}

pub fn graph_from_file(file: &GraphFile) -> Result<LoadedGraph> {
    let graph = MetricGraph::build(&GraphSpec {
        vertices: file.vertices.clone(),
        internal: file.internal.clone(),
        external: file.external.clone(),
    })?;
    let matrices = match &file.matrices {
        None => None,
        Some(blocks) => {
            let mut parsed = Vec::with_capacity(blocks.len());
            for (vid, block) in blocks {
                let v = graph.vertex(vid)?;
                let order = block.order.iter().map(|id| graph.edge(id)).collect::<Result<Vec<_>>>()?;
                let m = to_cmatrix(&block.entries, &format!("matrix of `{vid}`"))?;
                parsed.push((v, order, m));
            }
            Some(TransitionCollection::from_ordered(&graph, &parsed)?)
        }
    };
    Ok(LoadedGraph { graph, matrices })
}

/// The file representation in canonical order.
pub fn graph_to_file(g: &MetricGraph, mc: Option<&TransitionCollection>) -> GraphFile {
    let spec = g.to_spec();
    let matrices = mc.map(|mc| {
        g.stars()
            .iter()
            .map(|s| {
                (
                    g.vertex_id(s.vertex).to_string(),
                    MatrixBlock {
                        order: s.edges.iter().map(|&e| g.edge_id(e).to_string()).collect(),
                        entries: from_cmatrix(mc.get(s.vertex)),
                    },
                )
            })
            .collect()
    });
    GraphFile {
        vertices: spec.vertices,
        internal: spec.internal,
        external: spec.external,
        matrices,
    }
}

pub fn write_graph(g: &MetricGraph, mc: Option<&TransitionCollection>) -> String {
    serde_json::to_string_pretty(&graph_to_file(g, mc)).expect("graph files always serialize")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainLineSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityBlock {
    pub order: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainFile {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub internal: Vec<ChainLineSpec>,
    #[serde(rename = "P")]
    pub p: ProbabilityBlock,
}

/// Parses a chain file; returns the chain and any per-line length overrides.
pub fn parse_chain(text: &str) -> Result<(VertexChain, HashMap<String, f64>)> {
    let file: ChainFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = file.vertices.len();
    let mut sorted = file.p.order.clone();
    sorted.sort();
    let mut want = file.vertices.clone();
    want.sort();
    if sorted != want {
        return Err(Error::ShapeMismatch("P order is not a permutation of the vertices".into()));
    }
    if file.p.entries.len() != n || file.p.entries.iter().any(|r| r.len() != n) {
        return Err(Error::ShapeMismatch(format!("P must be {n}x{n}")));
    }
    let pos: Vec<usize> = file
        .p
        .order
        .iter()
        .map(|v| file.vertices.iter().position(|x| x == v).unwrap())
        .collect();
    let mut p = DMatrix::zeros(n, n);
    for (r, row) in file.p.entries.iter().enumerate() {
        for (c, &x) in row.iter().enumerate() {
            p[(pos[r], pos[c])] = x;
        }
    }
    let lengths = file
        .internal
        .iter()
        .filter_map(|l| l.length.map(|a| (l.id.clone(), a)))
        .collect();
    let lines = file
        .internal
        .into_iter()
        .map(|l| ChainLine {
            id: l.id,
            from: l.from,
            to: l.to,
        })
        .collect();
    Ok((VertexChain::new(file.vertices, lines, p)?, lengths))
}

pub fn write_chain(chain: &VertexChain) -> String {
    let file = ChainFile {
        vertices: chain.vertices.clone(),
        internal: chain
            .lines
            .iter()
            .map(|l| ChainLineSpec {
                id: l.id.clone(),
                from: l.from.clone(),
                to: l.to.clone(),
                length: None,
            })
            .collect(),
        p: ProbabilityBlock {
            order: chain.vertices.clone(),
            entries: chain.p.row_iter().map(|r| r.iter().copied().collect()).collect(),
        },
    };
    serde_json::to_string_pretty(&file).expect("chain files always serialize")
}

#[derive(Clone, Debug, Deserialize)]
struct PenaltyFile {
    #[serde(default)]
    a: HashMap<String, f64>,
    #[serde(default)]
    b: HashMap<String, f64>,
}

/// Directed penalties `(a, b)` in canonical line order. Lines missing from
/// the file fall back to their length.
pub fn parse_penalties(text: &str, g: &MetricGraph) -> Result<(Vec<f64>, Vec<f64>)> {
    let file: PenaltyFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    for id in file.a.keys().chain(file.b.keys()) {
        g.internal_index(id)?;
    }
    let pick = |m: &HashMap<String, f64>| -> Vec<f64> {
        g.internal_lines()
            .iter()
            .map(|l| m.get(&l.id).copied().unwrap_or(l.length))
            .collect()
    };
    Ok((pick(&file.a), pick(&file.b)))
}

#[derive(Clone, Debug, Deserialize)]
struct BcFile {
    #[serde(rename = "A")]
    a: Vec<Vec<Number>>,
    #[serde(rename = "B")]
    b: Vec<Vec<Number>>,
}

/// Explicit `(A, B)` on the boundary space, rows and columns in slot order:
/// external lines, then initial ends, then terminal ends, each by id.
pub fn parse_bc(text: &str) -> Result<BoundaryConditions> {
    let file: BcFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    BoundaryConditions::explicit(to_cmatrix(&file.a, "A")?, to_cmatrix(&file.b, "B")?)
}
