//! Random instances shared by the property and acceptance suites.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walkgen::chain::{ChainLine, VertexChain};
use walkgen::linalg::op_norm;
use walkgen::{CMatrix, GraphSpec, MetricGraph, TransitionCollection, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Complex,
    Hermitian,
    /// Real symmetric.
    Symmetric,
    /// Columns strictly positive and summing to one.
    Stochastic,
}

pub struct Shape {
    pub max_vertices: usize,
    pub max_internal: usize,
    pub max_external: usize,
    pub min_internal: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { max_vertices: 4, max_internal: 6, max_external: 3, min_internal: 0 }
    }
}

/// Connected graph with at least one external line and lengths in `[0.5, 2]`.
pub fn random_graph(rng: &mut impl Rng, shape: &Shape) -> MetricGraph {
    loop {
        let nv = rng.gen_range(1..=shape.max_vertices);
        let lo = shape.min_internal.max(nv - 1);
        if nv == 1 && lo > 0 || lo > shape.max_internal {
            continue;
        }
        let ni = rng.gen_range(lo..=shape.max_internal);
        if nv == 1 && ni > 0 {
            continue;
        }
        let names: Vec<String> = (0..nv).map(|v| format!("v{v}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut spec = GraphSpec::new(&refs);
        for i in 0..ni {
            // the first nv-1 lines form a spanning tree
            let (x, y) = if i + 1 < nv {
                (rng.gen_range(0..=i), i + 1)
            } else {
                let x = rng.gen_range(0..nv);
                let mut y = rng.gen_range(0..nv - 1);
                if y >= x {
                    y += 1;
                }
                (x, y)
            };
            let (from, to) = if rng.gen_bool(0.5) { (x, y) } else { (y, x) };
            spec = spec.internal(&format!("i{i}"), &names[from], &names[to], rng.gen_range(0.5..2.0));
        }
        let ne = rng.gen_range(1..=shape.max_external);
        for e in 0..ne {
            spec = spec.external(&format!("e{e}"), &names[rng.gen_range(0..nv)]);
        }
        if let Ok(g) = MetricGraph::build(&spec) {
            return g;
        }
    }
}

fn complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// One vertex matrix of dimension `d`; non-stochastic kinds get operator
/// norm `norm`.
pub fn random_matrix(rng: &mut impl Rng, d: usize, kind: Kind, norm: f64) -> CMatrix {
    let m = match kind {
        Kind::Complex => CMatrix::from_fn(d, d, |_, _| complex(rng)),
        Kind::Hermitian => {
            let x = CMatrix::from_fn(d, d, |_, _| complex(rng));
            (&x + x.adjoint()) * C64::from(0.5)
        }
        Kind::Symmetric => {
            let x = CMatrix::from_fn(d, d, |_, _| C64::from(rng.gen_range(-1.0..1.0)));
            (&x + x.transpose()) * C64::from(0.5)
        }
        Kind::Stochastic => {
            let mut x = DMatrix::from_fn(d, d, |_, _| rng.gen_range(0.05..1.0));
            for mut col in x.column_iter_mut() {
                let s = col.sum();
                col /= s;
            }
            return x.map(C64::from);
        }
    };
    let n = op_norm(&m);
    if n == 0.0 {
        m
    } else {
        m * C64::from(norm / n)
    }
}

/// Matrices for every vertex, each with norm drawn from `(0.3, max_norm)`.
pub fn random_collection(rng: &mut impl Rng, g: &MetricGraph, kind: Kind, max_norm: f64) -> TransitionCollection {
    let mats = (0..g.num_vertices())
        .map(|v| {
            let norm = rng.gen_range(0.3..max_norm);
            random_matrix(rng, g.degree(v), kind, norm)
        })
        .collect();
    TransitionCollection::new(g, mats).unwrap()
}

pub fn random_instance(seed: u64, kind: Kind, shape: &Shape) -> (MetricGraph, TransitionCollection) {
    let mut r = rng(seed);
    let g = random_graph(&mut r, shape);
    let mc = random_collection(&mut r, &g, kind, 1.5);
    (g, mc)
}

/// Nearest-neighbour chain on a connected simple graph with at most
/// `max_vertices` vertices, and a puncture vertex whose removal keeps the
/// rest connected.
pub fn random_chain(rng: &mut impl Rng, max_vertices: usize) -> (VertexChain, String) {
    loop {
        let nv = rng.gen_range(2..=max_vertices);
        let mut pairs: Vec<(usize, usize)> = (1..nv).map(|y| (rng.gen_range(0..y), y)).collect();
        let extra = rng.gen_range(0..=nv);
        for _ in 0..extra {
            let x = rng.gen_range(0..nv);
            let y = rng.gen_range(0..nv);
            let p = (x.min(y), x.max(y));
            if x != y && !pairs.contains(&p) {
                pairs.push(p);
            }
        }
        pairs.shuffle(rng);
        let names: Vec<String> = (0..nv).map(|v| format!("u{v}")).collect();
        let lines: Vec<ChainLine> = pairs
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| ChainLine { id: format!("l{k}"), from: names[x].clone(), to: names[y].clone() })
            .collect();
        let mut p = DMatrix::<f64>::zeros(nv, nv);
        for &(x, y) in &pairs {
            p[(x, y)] = rng.gen_range(0.05..1.0);
            p[(y, x)] = rng.gen_range(0.05..1.0);
        }
        for mut col in p.column_iter_mut() {
            let s = col.sum();
            col /= s;
        }
        let v_inf = rng.gen_range(0..nv);
        if !connected_without(nv, &pairs, v_inf) {
            continue;
        }
        let chain = VertexChain::new(names.clone(), lines, p).unwrap();
        return (chain, names[v_inf].clone());
    }
}

fn connected_without(nv: usize, pairs: &[(usize, usize)], skip: usize) -> bool {
    let start = (0..nv).find(|&v| v != skip).unwrap();
    let mut seen = vec![false; nv];
    seen[skip] = true;
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &(x, y) in pairs {
            for (a, b) in [(x, y), (y, x)] {
                if a == v && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Elementwise `|a - b|` maximum, relative to `max |b|` (or absolute when `b` vanishes).
pub fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        d / scale
    } else {
        d
    }
}
