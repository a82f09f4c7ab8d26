//! Finite non-compact metric graphs: vertices, oriented internal lines of
//! positive length, and external half-lines.
//!
//! Edges are kept in canonical order: internal and external lines are each
//! sorted by id, and every star lists its external lines first, then its
//! internal lines. All matrix indexing in the crate follows this order.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graph description record, as found in graph files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub internal: Vec<InternalSpec>,
    #[serde(default)]
    pub external: Vec<ExternalSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalSpec {
    pub id: String,
    pub at: String,
}

impl GraphSpec {
    pub fn new(vertices: &[&str]) -> Self {
        GraphSpec {
            vertices: vertices.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn internal(mut self, id: &str, from: &str, to: &str, length: f64) -> Self {
        self.internal.push(InternalSpec {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            length,
        });
        self
    }

    pub fn external(mut self, id: &str, at: &str) -> Self {
        self.external.push(ExternalSpec {
            id: id.into(),
            at: at.into(),
        });
        self
    }
}

/// An edge of the graph. The derived order (external before internal, then by
/// index, and indices follow id order) is the canonical star order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Edge {
    External(usize),
    Internal(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InternalLine {
    pub id: String,
    /// Initial vertex (x = 0).
    pub from: usize,
    /// Terminal vertex (x = length).
    pub to: usize,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExternalLine {
    pub id: String,
    pub at: usize,
}

/// The edges incident with one vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Star {
    pub vertex: usize,
    /// Canonical order: external lines, then internal lines.
    pub edges: Vec<Edge>,
    /// Internal lines with this vertex as initial vertex.
    pub minus: Vec<usize>,
    /// Internal lines with this vertex as terminal vertex.
    pub plus: Vec<usize>,
    pub external: Vec<usize>,
}

impl Star {
    pub fn degree(&self) -> usize {
        self.edges.len()
    }

    pub fn position(&self, edge: Edge) -> Option<usize> {
        self.edges.binary_search(&edge).ok()
    }
}

#[derive(Clone, Debug)]
pub struct MetricGraph {
    vertices: Vec<String>,
    vertex_index: HashMap<String, usize>,
    internal: Vec<InternalLine>,
    external: Vec<ExternalLine>,
    edge_index: HashMap<String, Edge>,
    stars: Vec<Star>,
}

impl MetricGraph {
    /// Validates a description record and builds the graph.
    pub fn build(spec: &GraphSpec) -> Result<Self> {
        let mut vertex_index = HashMap::new();
        for (k, v) in spec.vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), k).is_some() {
                return Err(Error::DuplicateId(v.clone()));
            }
        }
        let lookup = |owner: &str, v: &str| {
            vertex_index
                .get(v)
                .copied()
                .ok_or_else(|| Error::DanglingReference(owner.to_string(), v.to_string()))
        };

        let mut seen = HashSet::new();
        let mut internal = Vec::with_capacity(spec.internal.len());
        for line in &spec.internal {
            if !seen.insert(line.id.clone()) {
                return Err(Error::DuplicateId(line.id.clone()));
            }
            let from = lookup(&line.id, &line.from)?;
            let to = lookup(&line.id, &line.to)?;
            if from == to {
                return Err(Error::TadpoleEdge(line.id.clone()));
            }
            if !(line.length.is_finite() && line.length > 0.0) {
                return Err(Error::NonpositiveLength(line.id.clone(), line.length));
            }
            internal.push(InternalLine {
                id: line.id.clone(),
                from,
                to,
                length: line.length,
            });
        }
        let mut external = Vec::with_capacity(spec.external.len());
        for line in &spec.external {
            if !seen.insert(line.id.clone()) {
                return Err(Error::DuplicateId(line.id.clone()));
            }
            external.push(ExternalLine {
                id: line.id.clone(),
                at: lookup(&line.id, &line.at)?,
            });
        }
        if external.is_empty() {
            return Err(Error::NoExternalLines);
        }
        internal.sort_by(|a, b| a.id.cmp(&b.id));
        external.sort_by(|a, b| a.id.cmp(&b.id));

        let mut edge_index = HashMap::new();
        for (k, l) in external.iter().enumerate() {
            edge_index.insert(l.id.clone(), Edge::External(k));
        }
        for (k, l) in internal.iter().enumerate() {
            edge_index.insert(l.id.clone(), Edge::Internal(k));
        }

        let n = spec.vertices.len();
        let mut stars: Vec<Star> = (0..n)
            .map(|v| Star {
                vertex: v,
                edges: Vec::new(),
                minus: Vec::new(),
                plus: Vec::new(),
                external: Vec::new(),
            })
            .collect();
        for (k, l) in external.iter().enumerate() {
            stars[l.at].edges.push(Edge::External(k));
            stars[l.at].external.push(k);
        }
        for (k, l) in internal.iter().enumerate() {
            stars[l.from].edges.push(Edge::Internal(k));
            stars[l.from].minus.push(k);
            stars[l.to].edges.push(Edge::Internal(k));
            stars[l.to].plus.push(k);
        }
        for s in &mut stars {
            s.edges.sort();
        }
        if let Some(s) = stars.iter().find(|s| s.edges.is_empty()) {
            return Err(Error::IsolatedVertex(spec.vertices[s.vertex].clone()));
        }

        let g = MetricGraph {
            vertices: spec.vertices.clone(),
            vertex_index,
            internal,
            external,
            edge_index,
            stars,
        };
        if let Some(v) = g.unreachable_vertex() {
            return Err(Error::DisconnectedGraph(g.vertices[v].clone()));
        }
        Ok(g)
    }

    fn unreachable_vertex(&self) -> Option<usize> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &self.stars[v].edges {
                if let Edge::Internal(i) = e {
                    let u = self.other_end(i, v);
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    /// The description record in canonical edge order.
    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: self.vertices.clone(),
            internal: self
                .internal
                .iter()
                .map(|l| InternalSpec {
                    id: l.id.clone(),
                    from: self.vertices[l.from].clone(),
                    to: self.vertices[l.to].clone(),
                    length: l.length,
                })
                .collect(),
            external: self
                .external
                .iter()
                .map(|l| ExternalSpec {
                    id: l.id.clone(),
                    at: self.vertices[l.at].clone(),
                })
                .collect(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_internal(&self) -> usize {
        self.internal.len()
    }

    pub fn num_external(&self) -> usize {
        self.external.len()
    }

    /// Dimension of the boundary space, `|E| + 2|I|`.
    pub fn boundary_dim(&self) -> usize {
        self.external.len() + 2 * self.internal.len()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex(&self, id: &str) -> Result<usize> {
        self.vertex_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn internal_lines(&self) -> &[InternalLine] {
        &self.internal
    }

    pub fn external_lines(&self) -> &[ExternalLine] {
        &self.external
    }

    pub fn internal_line(&self, i: usize) -> &InternalLine {
        &self.internal[i]
    }

    pub fn external_line(&self, e: usize) -> &ExternalLine {
        &self.external[e]
    }

    pub fn edge(&self, id: &str) -> Result<Edge> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    pub fn external_index(&self, id: &str) -> Result<usize> {
        match self.edge(id)? {
            Edge::External(e) => Ok(e),
            Edge::Internal(_) => Err(Error::InvalidArgument(format!("`{id}` is an internal line"))),
        }
    }

    pub fn internal_index(&self, id: &str) -> Result<usize> {
        match self.edge(id)? {
            Edge::Internal(i) => Ok(i),
            Edge::External(_) => Err(Error::InvalidArgument(format!("`{id}` is an external line"))),
        }
    }

    pub fn edge_id(&self, edge: Edge) -> &str {
        match edge {
            Edge::External(e) => &self.external[e].id,
            Edge::Internal(i) => &self.internal[i].id,
        }
    }

    pub fn star(&self, v: usize) -> &Star {
        &self.stars[v]
    }

    pub fn stars(&self) -> &[Star] {
        &self.stars
    }

    pub fn degree(&self, v: usize) -> usize {
        self.stars[v].degree()
    }

    /// The endpoint of internal line `i` that is not `v`.
    pub fn other_end(&self, i: usize, v: usize) -> usize {
        let l = &self.internal[i];
        if l.from == v {
            l.to
        } else {
            l.from
        }
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.internal.iter().map(|l| l.length).collect()
    }

    /// Smallest internal length, `None` without internal lines.
    pub fn a_min(&self) -> Option<f64> {
        self.internal.iter().map(|l| l.length).reduce(f64::min)
    }

    /// Same topology with new internal lengths (indexed canonically).
    pub fn with_lengths(&self, lengths: &[f64]) -> Result<Self> {
        if lengths.len() != self.internal.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} lengths for {} internal lines",
                lengths.len(),
                self.internal.len()
            )));
        }
        let mut spec = self.to_spec();
        for (l, &a) in spec.internal.iter_mut().zip(lengths) {
            l.length = a;
        }
        Self::build(&spec)
    }

    /// Same graph with every internal line's orientation flipped.
    pub fn reversed(&self) -> Self {
        let mut spec = self.to_spec();
        for l in &mut spec.internal {
            std::mem::swap(&mut l.from, &mut l.to);
        }
        Self::build(&spec).expect("reversing orientation preserves validity")
    }

    /// Parses `[e', i_1, .., i_N, e]` given by edge ids into a walk.
    pub fn walk_from_ids(&self, ids: &[&str]) -> Result<Walk> {
        if ids.len() < 2 {
            return Err(Error::NotAWalk("a walk needs a source and a sink".into()));
        }
        let ext = |id: &str| match self.edge(id)? {
            Edge::External(e) => Ok(e),
            Edge::Internal(_) => Err(Error::NotAWalk(format!("`{id}` is not an external line"))),
        };
        let source = ext(ids[0])?;
        let sink = ext(ids[ids.len() - 1])?;
        let mut edges = Vec::with_capacity(ids.len() - 2);
        for id in &ids[1..ids.len() - 1] {
            match self.edge(id)? {
                Edge::Internal(i) => edges.push(i),
                Edge::External(_) => {
                    return Err(Error::NotAWalk(format!("`{id}` in the interior is external")))
                }
            }
        }
        Walk::new(self, source, edges, sink)
    }
}

/// The unique vertex sequence `v_0 .. v_N` of a candidate walk.
pub fn vertex_sequence(g: &MetricGraph, source: usize, edges: &[usize], sink: usize) -> Result<Vec<usize>> {
    let start = g.external[source].at;
    let end = g.external[sink].at;
    if edges.is_empty() {
        if start != end {
            return Err(Error::NotAWalk(format!(
                "trivial walk needs a shared vertex, `{}` is at `{}` and `{}` at `{}`",
                g.external[source].id, g.vertices[start], g.external[sink].id, g.vertices[end]
            )));
        }
        return Ok(vec![start]);
    }
    let mut seq = Vec::with_capacity(edges.len());
    let mut v = start;
    seq.push(v);
    for (k, &i) in edges.iter().enumerate() {
        let l = &g.internal[i];
        if l.from != v && l.to != v {
            return Err(Error::NotAWalk(format!(
                "step {} on `{}` does not touch vertex `{}`",
                k + 1,
                l.id,
                g.vertices[v]
            )));
        }
        // v_{k+1} != v_k forces the other endpoint
        v = g.other_end(i, v);
        seq.push(v);
    }
    if v != end {
        return Err(Error::NotAWalk(format!(
            "walk ends at `{}` but `{}` is attached to `{}`",
            g.vertices[v], g.external[sink].id, g.vertices[end]
        )));
    }
    Ok(seq)
}

/// A walk from external line `source` to external line `sink`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Walk {
    pub source: usize,
    pub edges: Vec<usize>,
    pub sink: usize,
    pub vertices: Vec<usize>,
}

impl Walk {
    pub fn new(g: &MetricGraph, source: usize, edges: Vec<usize>, sink: usize) -> Result<Self> {
        let vertices = vertex_sequence(g, source, &edges, sink)?;
        Ok(Walk {
            source,
            edges,
            sink,
            vertices,
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn comb_length(&self) -> usize {
        self.edges.len()
    }

    pub fn score(&self, num_internal: usize) -> Vec<u32> {
        let mut n = vec![0u32; num_internal];
        for &i in &self.edges {
            n[i] += 1;
        }
        n
    }

    pub fn metric_length(&self, g: &MetricGraph) -> f64 {
        self.edges.iter().map(|&i| g.internal[i].length).sum()
    }

    pub fn reverse(&self) -> Walk {
        let mut edges = self.edges.clone();
        edges.reverse();
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Walk {
            source: self.sink,
            edges,
            sink: self.source,
            vertices,
        }
    }

    /// Edge ids `[e', i_1, .., i_N, e]`.
    pub fn ids<'g>(&self, g: &'g MetricGraph) -> Vec<&'g str> {
        let mut out = vec![g.external[self.source].id.as_str()];
        out.extend(self.edges.iter().map(|&i| g.internal[i].id.as_str()));
        out.push(&g.external[self.sink].id);
        out
    }
}
