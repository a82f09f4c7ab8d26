//! Per-vertex transition matrices and the global matrix on the boundary
//! space `K = K_E ⊕ K_I⁻ ⊕ K_I⁺`.
//!
//! `M(v)[(j1, j2)]` is the amplitude for arriving along `j2` and leaving
//! along `j1`. Rows and columns follow the canonical star order of `v`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, MetricGraph};
use crate::linalg::{op_norm, CMatrix, C64, ZERO};

const FLAG_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionCollection {
    mats: Vec<CMatrix>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub stochastic: bool,
    pub combinatorial: bool,
    pub symmetric: bool,
    pub hermitian: bool,
    pub columns_equal: bool,
}

impl TransitionCollection {
    pub fn new(g: &MetricGraph, mats: Vec<CMatrix>) -> Result<Self> {
        if mats.len() != g.num_vertices() {
            return Err(Error::ShapeMismatch(format!(
                "{} matrices for {} vertices",
                mats.len(),
                g.num_vertices()
            )));
        }
        for (v, m) in mats.iter().enumerate() {
            let d = g.degree(v);
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::ShapeMismatch(format!(
                    "M({}) is {}x{} but the vertex has degree {}",
                    g.vertex_id(v),
                    m.nrows(),
                    m.ncols(),
                    d
                )));
            }
        }
        Ok(TransitionCollection { mats })
    }

    /// Builds every `M(v)` entrywise from `f(v, j1, j2)`.
    pub fn from_fn(g: &MetricGraph, mut f: impl FnMut(usize, Edge, Edge) -> C64) -> Self {
        let mats = g
            .stars()
            .iter()
            .map(|s| {
                CMatrix::from_fn(s.degree(), s.degree(), |r, c| f(s.vertex, s.edges[r], s.edges[c]))
            })
            .collect();
        TransitionCollection { mats }
    }

    pub fn zeros(g: &MetricGraph) -> Self {
        Self::from_fn(g, |_, _, _| ZERO)
    }

    /// Builds `M(v)` from matrices given in an arbitrary edge order per vertex.
    pub fn from_ordered(g: &MetricGraph, blocks: &[(usize, Vec<Edge>, CMatrix)]) -> Result<Self> {
        let mut mats: Vec<Option<CMatrix>> = vec![None; g.num_vertices()];
        for (v, order, m) in blocks {
            let star = g.star(*v);
            let mut sorted = order.clone();
            sorted.sort();
            if sorted != star.edges {
                return Err(Error::ShapeMismatch(format!(
                    "order for `{}` is not a permutation of its star",
                    g.vertex_id(*v)
                )));
            }
            if m.nrows() != order.len() || m.ncols() != order.len() {
                return Err(Error::ShapeMismatch(format!(
                    "entries for `{}` are {}x{}, expected {}x{}",
                    g.vertex_id(*v),
                    m.nrows(),
                    m.ncols(),
                    order.len(),
                    order.len()
                )));
            }
            let pos: Vec<usize> = order.iter().map(|&e| star.position(e).unwrap()).collect();
            let mut out = CMatrix::zeros(order.len(), order.len());
            for r in 0..order.len() {
                for c in 0..order.len() {
                    out[(pos[r], pos[c])] = m[(r, c)];
                }
            }
            if mats[*v].replace(out).is_some() {
                return Err(Error::DuplicateId(g.vertex_id(*v).to_string()));
            }
        }
        let mats = mats
            .into_iter()
            .enumerate()
            .map(|(v, m)| {
                m.ok_or_else(|| Error::ShapeMismatch(format!("no matrix for `{}`", g.vertex_id(v))))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(g, mats)
    }

    pub fn get(&self, v: usize) -> &CMatrix {
        &self.mats[v]
    }

    pub fn get_mut(&mut self, v: usize) -> &mut CMatrix {
        &mut self.mats[v]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.mats
    }

    /// `M(v)[(j1, j2)]`, zero if either edge is not in the star.
    pub fn entry(&self, g: &MetricGraph, v: usize, j1: Edge, j2: Edge) -> C64 {
        let s = g.star(v);
        match (s.position(j1), s.position(j2)) {
            (Some(r), Some(c)) => self.mats[v][(r, c)],
            _ => ZERO,
        }
    }

    pub fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        TransitionCollection {
            mats: self.mats.iter().map(f).collect(),
        }
    }

    pub fn classify(&self) -> Flags {
        let all = |p: &dyn Fn(&CMatrix) -> bool| self.mats.iter().all(p);
        Flags {
            stochastic: all(&is_stochastic),
            combinatorial: all(&|m| {
                m.iter()
                    .all(|z| z.im.abs() <= FLAG_TOL && (z.re.abs() <= FLAG_TOL || (z.re - 1.0).abs() <= FLAG_TOL))
            }),
            symmetric: all(&|m| (m - m.transpose()).iter().all(|z| z.norm() <= FLAG_TOL)),
            hermitian: all(&|m| (m - m.adjoint()).iter().all(|z| z.norm() <= FLAG_TOL)),
            columns_equal: all(&|m| {
                (1..m.ncols()).all(|c| (m.column(c) - m.column(0)).iter().all(|z| z.norm() <= FLAG_TOL))
            }),
        }
    }

    /// `max_v ‖M(v)‖₂`.
    pub fn norm_max(&self) -> f64 {
        self.mats.iter().map(op_norm).fold(0.0, f64::max)
    }
}

pub(crate) fn is_stochastic(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im.abs() <= FLAG_TOL && z.re >= -FLAG_TOL)
        && m.column_iter().all(|col| (col.iter().map(|z| z.re).sum::<f64>() - 1.0).abs() <= 1e-10)
}

pub fn classify(mc: &TransitionCollection) -> Flags {
    mc.classify()
}

pub fn matrix_norm_max(mc: &TransitionCollection) -> f64 {
    mc.norm_max()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SlotKind {
    External,
    /// Internal line at its initial vertex (`K_I⁻`).
    Initial,
    /// Internal line at its terminal vertex (`K_I⁺`).
    Terminal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub edge: Edge,
    pub kind: SlotKind,
    pub vertex: usize,
}

/// Slot index of edge `edge` seen from vertex `v`.
pub fn slot_of(g: &MetricGraph, v: usize, edge: Edge) -> usize {
    let ne = g.num_external();
    match edge {
        Edge::External(e) => e,
        Edge::Internal(i) if g.internal_line(i).from == v => ne + i,
        Edge::Internal(i) => ne + g.num_internal() + i,
    }
}

pub fn basis_map(g: &MetricGraph) -> Vec<Slot> {
    let mut slots: Vec<Slot> = g
        .external_lines()
        .iter()
        .enumerate()
        .map(|(e, l)| Slot {
            edge: Edge::External(e),
            kind: SlotKind::External,
            vertex: l.at,
        })
        .collect();
    for (i, l) in g.internal_lines().iter().enumerate() {
        slots.push(Slot {
            edge: Edge::Internal(i),
            kind: SlotKind::Initial,
            vertex: l.from,
        });
    }
    for (i, l) in g.internal_lines().iter().enumerate() {
        slots.push(Slot {
            edge: Edge::Internal(i),
            kind: SlotKind::Terminal,
            vertex: l.to,
        });
    }
    slots
}

#[derive(Clone, Debug)]
pub struct BigM {
    pub matrix: CMatrix,
    pub slots: Vec<Slot>,
}

/// Scatters the vertex blocks of `mats` (one per vertex, star order) into
/// the boundary space.
pub fn scatter_blocks(g: &MetricGraph, mats: &[CMatrix]) -> Result<CMatrix> {
    let d = g.boundary_dim();
    let mut out = CMatrix::zeros(d, d);
    if mats.len() != g.num_vertices() {
        return Err(Error::ShapeMismatch(format!(
            "{} blocks for {} vertices",
            mats.len(),
            g.num_vertices()
        )));
    }
    for (star, m) in g.stars().iter().zip(mats) {
        if m.nrows() != star.degree() || m.ncols() != star.degree() {
            return Err(Error::ShapeMismatch(format!(
                "block for `{}` is {}x{}, degree is {}",
                g.vertex_id(star.vertex),
                m.nrows(),
                m.ncols(),
                star.degree()
            )));
        }
        let idx: Vec<usize> = star.edges.iter().map(|&e| slot_of(g, star.vertex, e)).collect();
        for (r, &hr) in idx.iter().enumerate() {
            for (c, &hc) in idx.iter().enumerate() {
                out[(hr, hc)] = m[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Extracts the vertex blocks of a matrix on the boundary space.
pub fn gather_blocks(g: &MetricGraph, big: &CMatrix) -> Vec<CMatrix> {
    g.stars()
        .iter()
        .map(|star| {
            let idx: Vec<usize> = star.edges.iter().map(|&e| slot_of(g, star.vertex, e)).collect();
            CMatrix::from_fn(idx.len(), idx.len(), |r, c| big[(idx[r], idx[c])])
        })
        .collect()
}

pub fn assemble_big_m(g: &MetricGraph, mc: &TransitionCollection) -> Result<BigM> {
    Ok(BigM {
        matrix: scatter_blocks(g, mc.matrices())?,
        slots: basis_map(g),
    })
}
