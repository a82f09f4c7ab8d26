//! Brute-force walk enumeration and truncated walk series.
//!
//! A walk is driven by the state machine (current vertex, incoming edge):
//! taking an internal line moves to its other endpoint, taking an external
//! line ends the walk. Everything here is exhaustive and serves as the
//! reference the closed forms are checked against.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Edge, MetricGraph, Walk};
use crate::linalg::{CMatrix, C64, ONE, ZERO};
use crate::transition::TransitionCollection;

/// Every walk from `source` to `sink` with at most `n_max` internal steps,
/// ordered by combinatorial length, then by edge sequence.
pub fn enumerate_walks(g: &MetricGraph, source: &str, sink: &str, n_max: usize) -> Result<Vec<Walk>> {
    let s = g.external_index(source)?;
    let t = g.external_index(sink)?;
    Ok(enumerate_walks_idx(g, s, t, n_max))
}

pub fn enumerate_walks_idx(g: &MetricGraph, source: usize, sink: usize, n_max: usize) -> Vec<Walk> {
    let start = g.external_line(source).at;
    let end = g.external_line(sink).at;
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut verts = vec![start];
    fn go(
        g: &MetricGraph,
        (source, sink, end, n_max): (usize, usize, usize, usize),
        path: &mut Vec<usize>,
        verts: &mut Vec<usize>,
        out: &mut Vec<Walk>,
    ) {
        let v = *verts.last().unwrap();
        if v == end {
            out.push(Walk {
                source,
                edges: path.clone(),
                sink,
                vertices: verts.clone(),
            });
        }
        if path.len() == n_max {
            return;
        }
        for &e in &g.star(v).edges {
            if let Edge::Internal(i) = e {
                path.push(i);
                verts.push(g.other_end(i, v));
                go(g, (source, sink, end, n_max), path, verts, out);
                path.pop();
                verts.pop();
            }
        }
    }
    go(g, (source, sink, end, n_max), &mut path, &mut verts, &mut out);
    out.sort_by(|a, b| a.edges.len().cmp(&b.edges.len()).then_with(|| a.edges.cmp(&b.edges)));
    out
}

/// `W(w) = M(v_N)[e, i_N] ⋯ M(v_0)[i_1, e']`.
pub fn walk_weight(g: &MetricGraph, mc: &TransitionCollection, w: &Walk) -> C64 {
    let mut prev = Edge::External(w.source);
    let mut weight = ONE;
    for (k, &v) in w.vertices.iter().enumerate() {
        let next = match w.edges.get(k) {
            Some(&i) => Edge::Internal(i),
            None => Edge::External(w.sink),
        };
        weight *= mc.entry(g, v, next, prev);
        prev = next;
    }
    weight
}

#[derive(Clone, Debug)]
pub struct WalkSeriesResult {
    /// `value[(e, e')]`, rows are sinks and columns sources.
    pub value: CMatrix,
    pub n_max: usize,
    pub tail_bound: f64,
    pub walk_count: u64,
}

/// `Σ_{N > n_max} m^{N+1} q^N` with `q = |I| e^{-Re β a_min}`; infinite
/// unless `m q < 1`.
pub fn tail_bound(g: &MetricGraph, m: f64, beta: C64, n_max: usize) -> f64 {
    let Some(a_min) = g.a_min() else {
        return 0.0;
    };
    if m == 0.0 {
        return 0.0;
    }
    let q = g.num_internal() as f64 * (-beta.re * a_min).exp();
    let r = m * q;
    if r >= 1.0 {
        return f64::INFINITY;
    }
    m * r.powi(n_max as i32 + 1) / (1.0 - r)
}

/// `(log m + log |I|) / a_min`.
pub fn beta0_bound(g: &MetricGraph, mc: &TransitionCollection) -> Result<f64> {
    let a_min = g.a_min().ok_or(Error::NoInternalLines)?;
    Ok((mc.norm_max().ln() + (g.num_internal() as f64).ln()) / a_min)
}

/// Smallest `N_max` with `tail_bound <= target`, if the tail is finite.
pub fn n_max_for_tail(g: &MetricGraph, m: f64, beta: C64, target: f64) -> Option<usize> {
    if !tail_bound(g, m, beta, 0).is_finite() {
        return None;
    }
    (0..10_000).find(|&n| tail_bound(g, m, beta, n) <= target)
}

/// Per-step penalty: `(internal line, traversed initial→terminal)` to a length.
type Penalty<'a> = &'a (dyn Fn(usize, bool) -> f64 + Sync);

struct SeriesCtx<'a> {
    g: &'a MetricGraph,
    mc: &'a TransitionCollection,
    beta: C64,
    n_max: usize,
    prune_zero: bool,
    penalty: Penalty<'a>,
}

impl SeriesCtx<'_> {
    /// Contributions to column `source` split by combinatorial length.
    fn column(&self, source: usize) -> (Vec<Vec<C64>>, u64) {
        let mut col = vec![vec![ZERO; self.g.num_external()]; self.n_max + 1];
        let mut count = 0u64;
        let v0 = self.g.external_line(source).at;
        let p0 = self.g.star(v0).position(Edge::External(source)).unwrap();
        self.step(v0, p0, ONE, 0, &mut col, &mut count);
        (col, count)
    }

    fn step(&self, v: usize, incoming: usize, acc: C64, depth: usize, col: &mut [Vec<C64>], count: &mut u64) {
        let star = self.g.star(v);
        let m = self.mc.get(v);
        for (r, &e) in star.edges.iter().enumerate() {
            match e {
                Edge::External(t) => {
                    *count += 1;
                    col[depth][t] += acc * m[(r, incoming)];
                }
                Edge::Internal(i) if depth < self.n_max => {
                    let w = m[(r, incoming)];
                    if self.prune_zero && (w == ZERO || acc == ZERO) {
                        continue;
                    }
                    let line = self.g.internal_line(i);
                    let forward = line.from == v;
                    let u = if forward { line.to } else { line.from };
                    let damp = (-self.beta * (self.penalty)(i, forward)).exp();
                    let pu = self.g.star(u).position(e).unwrap();
                    self.step(u, pu, acc * w * damp, depth + 1, col, count);
                }
                Edge::Internal(_) => {}
            }
        }
    }

    /// One `|E|×|E|` matrix per combinatorial length `0..=n_max`.
    fn run(&self) -> (Vec<CMatrix>, u64) {
        let ne = self.g.num_external();
        let cols: Vec<_> = (0..ne).into_par_iter().map(|s| self.column(s)).collect();
        let mut by_len = vec![CMatrix::zeros(ne, ne); self.n_max + 1];
        let mut total = 0;
        for (s, (col, count)) in cols.into_iter().enumerate() {
            for (n, row) in col.into_iter().enumerate() {
                for (t, z) in row.into_iter().enumerate() {
                    by_len[n][(t, s)] = z;
                }
            }
            total += count;
        }
        (by_len, total)
    }
}

fn series(
    g: &MetricGraph,
    mc: &TransitionCollection,
    beta: C64,
    n_max: usize,
    prune_zero: bool,
    penalty: Penalty<'_>,
) -> WalkSeriesResult {
    let (by_len, walk_count) = series_by_length_with(g, mc, beta, n_max, prune_zero, penalty);
    let ne = g.num_external();
    let value = by_len.iter().fold(CMatrix::zeros(ne, ne), |acc, x| acc + x);
    WalkSeriesResult {
        value,
        n_max,
        tail_bound: tail_bound(g, mc.norm_max(), beta, n_max),
        walk_count,
    }
}

fn series_by_length_with(
    g: &MetricGraph,
    mc: &TransitionCollection,
    beta: C64,
    n_max: usize,
    prune_zero: bool,
    penalty: Penalty<'_>,
) -> (Vec<CMatrix>, u64) {
    SeriesCtx {
        g,
        mc,
        beta,
        n_max,
        prune_zero,
        penalty,
    }
    .run()
}

/// Terms of the walk series grouped by combinatorial length: entry `N` is
/// `Σ_{|w| = N} W(w) e^{-β|w|}`.
pub fn series_by_length(g: &MetricGraph, mc: &TransitionCollection, beta: C64, n_max: usize) -> Vec<CMatrix> {
    let lengths = g.lengths();
    series_by_length_with(g, mc, beta, n_max, false, &|i, _| lengths[i]).0
}

/// `T(n)` for every pair at once: the sum of `W(w)` over walks of score `n`.
pub fn score_matrix(g: &MetricGraph, mc: &TransitionCollection, n: &[u32]) -> Result<CMatrix> {
    if n.len() != g.num_internal() {
        return Err(Error::ShapeMismatch(format!(
            "score of length {} for {} internal lines",
            n.len(),
            g.num_internal()
        )));
    }
    fn go(
        g: &MetricGraph,
        mc: &TransitionCollection,
        (v, incoming, acc): (usize, usize, C64),
        left: &mut [u32],
        remaining: u32,
        out: &mut [C64],
    ) {
        let m = mc.get(v);
        for (r, &e) in g.star(v).edges.iter().enumerate() {
            let w = m[(r, incoming)];
            match e {
                Edge::External(t) if remaining == 0 => out[t] += acc * w,
                Edge::Internal(i) if left[i] > 0 => {
                    let u = g.other_end(i, v);
                    let pu = g.star(u).position(e).unwrap();
                    left[i] -= 1;
                    go(g, mc, (u, pu, acc * w), left, remaining - 1, out);
                    left[i] += 1;
                }
                _ => {}
            }
        }
    }
    let ne = g.num_external();
    let total: u32 = n.iter().sum();
    let cols: Vec<Vec<C64>> = (0..ne)
        .into_par_iter()
        .map(|s| {
            let mut out = vec![ZERO; ne];
            let v0 = g.external_line(s).at;
            let p0 = g.star(v0).position(Edge::External(s)).unwrap();
            go(g, mc, (v0, p0, ONE), &mut n.to_vec(), total, &mut out);
            out
        })
        .collect();
    Ok(CMatrix::from_fn(ne, ne, |t, s| cols[s][t]))
}

/// `Σ W(w) e^{-β|w|}` over all walks with combinatorial length `<= n_max`.
pub fn series_t(g: &MetricGraph, mc: &TransitionCollection, beta: C64, n_max: usize) -> WalkSeriesResult {
    let lengths = g.lengths();
    series(g, mc, beta, n_max, false, &|i, _| lengths[i])
}

/// Same sum as [`series_t`], skipping every walk whose partial weight is
/// already zero. `walk_count` then counts only walks that were visited.
pub fn series_t_relevant(g: &MetricGraph, mc: &TransitionCollection, beta: C64, n_max: usize) -> WalkSeriesResult {
    let lengths = g.lengths();
    series(g, mc, beta, n_max, true, &|i, _| lengths[i])
}

/// Walk series where a traversal of line `i` costs `a[i]` from the initial
/// to the terminal vertex and `b[i]` in the opposite direction.
pub fn series_t_directed(
    g: &MetricGraph,
    mc: &TransitionCollection,
    beta: C64,
    a: &[f64],
    b: &[f64],
    n_max: usize,
) -> Result<WalkSeriesResult> {
    let ni = g.num_internal();
    if a.len() != ni || b.len() != ni {
        return Err(Error::ShapeMismatch(format!(
            "penalty vectors of length {} and {} for {} internal lines",
            a.len(),
            b.len(),
            ni
        )));
    }
    let mut res = series(g, mc, beta, n_max, false, &|i, fwd| if fwd { a[i] } else { b[i] });
    let c_min = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let shrunk = g.with_lengths(&vec![c_min; ni])?;
    res.tail_bound = tail_bound(&shrunk, mc.norm_max(), beta, n_max);
    Ok(res)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreClass {
    /// `T(n) = Σ_{w ∈ W(n)} W(w)`.
    pub value: C64,
    /// `|W(n)|`.
    pub walks: usize,
}

/// Score-resolved coefficients `T(n)` for one pair, keyed by score vector.
/// Only scores with a nonempty walk set appear.
pub fn score_classes(
    g: &MetricGraph,
    mc: &TransitionCollection,
    source: &str,
    sink: &str,
    n_max: usize,
) -> Result<BTreeMap<Vec<u32>, ScoreClass>> {
    let walks = enumerate_walks(g, source, sink, n_max)?;
    let mut out: BTreeMap<Vec<u32>, ScoreClass> = BTreeMap::new();
    for w in &walks {
        let entry = out.entry(w.score(g.num_internal())).or_insert(ScoreClass { value: ZERO, walks: 0 });
        entry.value += walk_weight(g, mc, w);
        entry.walks += 1;
    }
    Ok(out)
}

pub fn score_coefficients(
    g: &MetricGraph,
    mc: &TransitionCollection,
    source: &str,
    sink: &str,
    n_max: usize,
) -> Result<BTreeMap<Vec<u32>, C64>> {
    Ok(score_classes(g, mc, source, sink, n_max)?
        .into_iter()
        .map(|(k, c)| (k, c.value))
        .collect())
}

/// `|n|! / ∏ n_i!`.
pub fn multinomial(n: &[u32]) -> f64 {
    let mut total = 0u32;
    let mut out = 1.0f64;
    for &k in n {
        for j in 1..=k {
            total += 1;
            out *= total as f64 / j as f64;
        }
    }
    out
}

/// Large-β limit of `T`: `M(∂e)[e, e']` when both lines share a vertex, else 0.
pub fn boundary_limit(g: &MetricGraph, mc: &TransitionCollection) -> CMatrix {
    let ne = g.num_external();
    CMatrix::from_fn(ne, ne, |t, s| {
        let v = g.external_line(s).at;
        if g.external_line(t).at == v {
            mc.entry(g, v, Edge::External(t), Edge::External(s))
        } else {
            ZERO
        }
    })
}
