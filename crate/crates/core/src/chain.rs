//! Conversion between nearest-neighbour Markov chains on the vertices of a
//! compact graph and the edge-state model on the graph punctured at a
//! vertex `v_∞`.

use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Edge, GraphSpec, MetricGraph};
use crate::linalg::{CMatrix, C64};
use crate::transition::TransitionCollection;

const TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ChainLine {
    pub id: String,
    pub from: String,
    pub to: String,
}

/// A compact graph with a column-stochastic transition matrix:
/// `p[(v', v)]` is the probability of jumping from `v` to `v'`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexChain {
    pub vertices: Vec<String>,
    pub lines: Vec<ChainLine>,
    pub p: DMatrix<f64>,
}

impl VertexChain {
    pub fn new(vertices: Vec<String>, lines: Vec<ChainLine>, p: DMatrix<f64>) -> Result<Self> {
        let n = vertices.len();
        let index = vertex_index(&vertices)?;
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::ShapeMismatch(format!("P is {}x{} for {} vertices", p.nrows(), p.ncols(), n)));
        }
        let mut ids = HashSet::new();
        let mut pairs = HashSet::new();
        for l in &lines {
            if !ids.insert(l.id.as_str()) {
                return Err(Error::DuplicateId(l.id.clone()));
            }
            let a = *index
                .get(l.from.as_str())
                .ok_or_else(|| Error::DanglingReference(l.id.clone(), l.from.clone()))?;
            let b = *index
                .get(l.to.as_str())
                .ok_or_else(|| Error::DanglingReference(l.id.clone(), l.to.clone()))?;
            if a == b {
                return Err(Error::TadpoleEdge(l.id.clone()));
            }
            if !pairs.insert((a.min(b), a.max(b))) {
                return Err(Error::MultiEdge(l.from.clone(), l.to.clone()));
            }
        }
        for v in 0..n {
            for u in 0..n {
                let x = p[(u, v)];
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(Error::InvalidChain(format!(
                        "P({}, {}) = {x} is not a probability",
                        vertices[u], vertices[v]
                    )));
                }
                if x > 0.0 && !pairs.contains(&(u.min(v), u.max(v))) {
                    return Err(Error::InvalidChain(format!(
                        "P({}, {}) > 0 but the vertices are not adjacent",
                        vertices[u], vertices[v]
                    )));
                }
            }
            let sum: f64 = p.column(v).sum();
            if (sum - 1.0).abs() > TOL {
                return Err(Error::InvalidChain(format!("column of `{}` sums to {sum}", vertices[v])));
            }
        }
        Ok(VertexChain { vertices, lines, p })
    }

    pub fn index(&self, v: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|x| x == v)
            .ok_or_else(|| Error::UnknownVertex(v.to_string()))
    }
}

fn vertex_index(vertices: &[String]) -> Result<HashMap<&str, usize>> {
    let mut index = HashMap::new();
    for (k, v) in vertices.iter().enumerate() {
        if index.insert(v.as_str(), k).is_some() {
            return Err(Error::DuplicateId(v.clone()));
        }
    }
    Ok(index)
}

/// Punctures the chain's graph at `v_inf`. Lines at `v_inf` become
/// external lines at their other endpoint; all other lines keep their id and
/// orientation and get length 1 unless overridden.
pub fn chain_to_edge_model(
    chain: &VertexChain,
    v_inf: &str,
    lengths: &HashMap<String, f64>,
) -> Result<(MetricGraph, TransitionCollection)> {
    let inf = chain.index(v_inf)?;
    let mut spec = GraphSpec {
        vertices: chain.vertices.iter().filter(|v| *v != v_inf).cloned().collect(),
        ..Default::default()
    };
    for l in &chain.lines {
        if l.from == v_inf {
            spec = spec.external(&l.id, &l.to);
        } else if l.to == v_inf {
            spec = spec.external(&l.id, &l.from);
        } else {
            let a = lengths.get(&l.id).copied().unwrap_or(1.0);
            spec = spec.internal(&l.id, &l.from, &l.to, a);
        }
    }
    let g = MetricGraph::build(&spec).map_err(|e| match e {
        Error::DisconnectedGraph(v) | Error::IsolatedVertex(v) => Error::IsolatedRemainder(v),
        other => other,
    })?;
    let idx: Vec<usize> = (0..g.num_vertices())
        .map(|v| chain.index(g.vertex_id(v)))
        .collect::<Result<_>>()?;
    // the chain vertex reached by leaving `v` along `j`
    let target = |v: usize, j: Edge| match j {
        Edge::External(_) => inf,
        Edge::Internal(i) => idx[g.other_end(i, v)],
    };
    let mc = TransitionCollection::from_fn(&g, |v, j1, _| C64::from(chain.p[(target(v, j1), idx[v])]));
    Ok((g, mc))
}

/// Rebuilds a vertex chain from an edge model whose matrices have equal
/// columns summing to 1, closing every external line at a new vertex
/// `v_inf` that jumps uniformly back into the graph.
pub fn edge_model_to_chain(g: &MetricGraph, mc: &TransitionCollection, v_inf: &str) -> Result<VertexChain> {
    if g.vertex_ids().iter().any(|v| v == v_inf) {
        return Err(Error::DuplicateId(v_inf.to_string()));
    }
    let mut pairs = HashSet::new();
    for l in g.internal_lines() {
        if !pairs.insert((l.from.min(l.to), l.from.max(l.to))) {
            return Err(Error::MultiEdge(g.vertex_id(l.from).into(), g.vertex_id(l.to).into()));
        }
    }
    for s in g.stars() {
        if s.external.len() > 1 {
            return Err(Error::MultiEdge(g.vertex_id(s.vertex).into(), v_inf.into()));
        }
    }
    for (v, m) in mc.matrices().iter().enumerate() {
        check_columns(g, v, m)?;
    }

    let n = g.num_vertices();
    let inf = n;
    let mut vertices = g.vertex_ids().to_vec();
    vertices.push(v_inf.to_string());
    let mut lines: Vec<ChainLine> = g
        .internal_lines()
        .iter()
        .map(|l| ChainLine {
            id: l.id.clone(),
            from: g.vertex_id(l.from).into(),
            to: g.vertex_id(l.to).into(),
        })
        .collect();
    for l in g.external_lines() {
        lines.push(ChainLine {
            id: l.id.clone(),
            from: v_inf.into(),
            to: g.vertex_id(l.at).into(),
        });
    }
    let mut p = DMatrix::zeros(n + 1, n + 1);
    for s in g.stars() {
        let m = mc.get(s.vertex);
        for (r, &j) in s.edges.iter().enumerate() {
            let to = match j {
                Edge::External(_) => inf,
                Edge::Internal(i) => g.other_end(i, s.vertex),
            };
            p[(to, s.vertex)] = m[(r, 0)].re;
        }
    }
    let share = 1.0 / g.num_external() as f64;
    for l in g.external_lines() {
        p[(l.at, inf)] = share;
    }
    VertexChain::new(vertices, lines, p)
}

fn check_columns(g: &MetricGraph, v: usize, m: &CMatrix) -> Result<()> {
    let name = g.vertex_id(v);
    for c in 1..m.ncols() {
        if (m.column(c) - m.column(0)).iter().any(|z| z.norm() > TOL) {
            return Err(Error::ColumnsNotEqual(name.into()));
        }
    }
    let col = m.column(0);
    if col.iter().any(|z| z.im.abs() > TOL || z.re < -TOL) || (col.iter().map(|z| z.re).sum::<f64>() - 1.0).abs() > TOL {
        return Err(Error::NotNormalized(name.into()));
    }
    Ok(())
}
