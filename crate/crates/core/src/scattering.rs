//! Scattering matrices of Laplace operators on metric graphs with boundary
//! conditions `Aψ + Bψ' = 0`, and their walk (Fourier) expansion.
//!
//! On line `i` the interior solution is `α_i e^{ikx} + β_i e^{-ikx}`; on
//! external line `e` it is `δ_{e,e'} e^{-ikx} + S_{e,e'} e^{ikx}`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::linalg::{identity, lstsq, lu_solve, op_norm, rank, rcond, unitarity_defect, CMatrix, C64, ONE, ZERO};
use crate::transition::{gather_blocks, scatter_blocks, TransitionCollection};
use crate::walks::{series_by_length, tail_bound};

const SINGULAR_RCOND: f64 = 1e-14;
const LSTSQ_RCOND: f64 = 1e-12;
const SELF_ADJOINT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Provenance {
    /// Induced by the transition matrices at this `β`.
    FromM(f64),
    Explicit,
}

/// Global boundary conditions on `K = K_E ⊕ K_I⁻ ⊕ K_I⁺`.
#[derive(Clone, Debug)]
pub struct BoundaryConditions {
    pub a: CMatrix,
    pub b: CMatrix,
    pub provenance: Provenance,
    /// `A B†` is self-adjoint to 1e-12.
    pub self_adjoint: bool,
}

impl BoundaryConditions {
    /// Checks that `(A, B)` has maximal rank and records self-adjointness.
    pub fn explicit(a: CMatrix, b: CMatrix) -> Result<Self> {
        Self::with_provenance(a, b, Provenance::Explicit)
    }

    fn with_provenance(a: CMatrix, b: CMatrix, provenance: Provenance) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d || b.nrows() != d || b.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "A is {}x{}, B is {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        let mut ab = CMatrix::zeros(d, 2 * d);
        ab.columns_mut(0, d).copy_from(&a);
        ab.columns_mut(d, d).copy_from(&b);
        let r = rank(&ab, 1e-12);
        if r < d {
            return Err(Error::RankDeficient { rank: r, dim: d });
        }
        let abh = &a * b.adjoint();
        let scale = 1.0 + op_norm(&a) * op_norm(&b);
        let self_adjoint = op_norm(&(&abh - abh.adjoint())) <= SELF_ADJOINT_TOL * scale;
        Ok(BoundaryConditions {
            a,
            b,
            provenance,
            self_adjoint,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Per-vertex blocks `(A_v, B_v)` in star order. Fails if the conditions
    /// couple different vertices.
    pub fn vertex_blocks(&self, g: &MetricGraph) -> Result<Vec<(CMatrix, CMatrix)>> {
        if self.dim() != g.boundary_dim() {
            return Err(Error::ShapeMismatch(format!(
                "conditions of dimension {} on a boundary space of dimension {}",
                self.dim(),
                g.boundary_dim()
            )));
        }
        let av = gather_blocks(g, &self.a);
        let bv = gather_blocks(g, &self.b);
        let back_a = scatter_blocks(g, &av)?;
        let back_b = scatter_blocks(g, &bv)?;
        if back_a != self.a || back_b != self.b {
            return Err(Error::NonLocal(
                "boundary conditions couple different vertices".into(),
            ));
        }
        Ok(av.into_iter().zip(bv).collect())
    }
}

/// `A_v = ½(I − M(v))`, `B_v = −(I + M(v)) / (2β)` for every vertex.
pub fn bc_from_m(g: &MetricGraph, mc: &TransitionCollection, beta: f64) -> Result<BoundaryConditions> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("β must be positive, got {beta}")));
    }
    let (av, bv): (Vec<_>, Vec<_>) = mc
        .matrices()
        .iter()
        .map(|m| {
            let id = identity(m.nrows());
            ((&id - m) * C64::from(0.5), (&id + m) * C64::from(-0.5 / beta))
        })
        .unzip();
    let a = scatter_blocks(g, &av)?;
    let b = scatter_blocks(g, &bv)?;
    BoundaryConditions::with_provenance(a, b, Provenance::FromM(beta))
}

/// `S = −(A + ikB)⁻¹ (A − ikB)`.
pub fn single_vertex_s(a: &CMatrix, b: &CMatrix, k: C64) -> Result<CMatrix> {
    let ik = C64::i() * k;
    let pencil = a + b * ik;
    let rc = rcond(&pencil);
    if rc.is_nan() || rc < SINGULAR_RCOND {
        return Err(Error::SingularPencil(format!("A + ikB has rcond {rc:.3e} at k = {k}")));
    }
    let rhs = -(a - b * ik);
    lu_solve(&pencil, &rhs).ok_or_else(|| Error::SingularPencil(format!("A + ikB singular at k = {k}")))
}

/// `S_v(k)` for every vertex of a local set of boundary conditions.
pub fn vertex_scattering(g: &MetricGraph, bc: &BoundaryConditions, k: C64) -> Result<TransitionCollection> {
    let mats = bc
        .vertex_blocks(g)?
        .iter()
        .map(|(a, b)| single_vertex_s(a, b, k))
        .collect::<Result<Vec<_>>>()?;
    TransitionCollection::new(g, mats)
}

#[derive(Clone, Debug)]
pub struct ScatterResult {
    pub s: CMatrix,
    /// Coefficients of `e^{ikx}` on internal lines, `|I|×|E|`.
    pub alpha: CMatrix,
    /// Coefficients of `e^{-ikx}` on internal lines, `|I|×|E|`.
    pub beta_amp: CMatrix,
    pub k: C64,
    pub unitarity_defect: f64,
    /// `‖Z u − rhs‖ / ‖rhs‖`.
    pub residual: f64,
    /// Whether the minimum-norm least-squares path was taken.
    pub least_squares: bool,
}

/// `Z(k) = A X + ik B Y` for the given internal lengths.
pub fn z_matrix(ne: usize, a_len: &[f64], bc: &BoundaryConditions, k: C64) -> CMatrix {
    let ni = a_len.len();
    let d = ne + 2 * ni;
    let mut x = identity(d);
    let mut y = identity(d);
    for (i, &len) in a_len.iter().enumerate() {
        let t = (C64::i() * k * len).exp();
        let (m, p) = (ne + i, ne + ni + i);
        x[(m, p)] = ONE;
        x[(p, m)] = t;
        x[(p, p)] = ONE / t;
        y[(m, p)] = -ONE;
        y[(p, m)] = -t;
        y[(p, p)] = ONE / t;
    }
    &bc.a * x + &bc.b * y * (C64::i() * k)
}

pub fn solve_scattering(g: &MetricGraph, bc: &BoundaryConditions, k: C64) -> Result<ScatterResult> {
    solve_scattering_with_lengths(g.num_external(), &g.lengths(), bc, k)
}

/// Solves `Z [S; α; β] = −(A − ikB) [I; 0; 0]` with arbitrary real lengths.
pub fn solve_scattering_with_lengths(
    ne: usize,
    lengths: &[f64],
    bc: &BoundaryConditions,
    k: C64,
) -> Result<ScatterResult> {
    let ni = lengths.len();
    let d = ne + 2 * ni;
    if bc.dim() != d {
        return Err(Error::ShapeMismatch(format!(
            "conditions of dimension {} for {} external and {} internal lines",
            bc.dim(),
            ne,
            ni
        )));
    }
    if k == ZERO {
        return Err(Error::InvalidArgument("k must be nonzero".into()));
    }
    let z = z_matrix(ne, lengths, bc, k);
    let ik = C64::i() * k;
    let rhs = -(&bc.a - &bc.b * ik).columns(0, ne).into_owned();
    let rhs_norm = op_norm(&rhs).max(f64::MIN_POSITIVE);
    let direct = if rcond(&z) >= LSTSQ_RCOND { lu_solve(&z, &rhs) } else { None };
    let (u, least_squares) = match direct {
        Some(u) => (u, false),
        None => (lstsq(&z, &rhs, LSTSQ_RCOND), true),
    };
    let residual = op_norm(&(&z * &u - &rhs)) / rhs_norm;
    if least_squares && residual > 1e-8 {
        return Err(Error::InconsistentSystem(residual));
    }
    let s = u.rows(0, ne).into_owned();
    Ok(ScatterResult {
        unitarity_defect: unitarity_defect(&s),
        alpha: u.rows(ne, ni).into_owned(),
        beta_amp: u.rows(ne + ni, ni).into_owned(),
        s,
        k,
        residual,
        least_squares,
    })
}

/// `Ŝ_n(k)`: the walk sum of score `n` with `S_v(k)` as vertex weights.
/// Scores with a negative entry give zero.
pub fn fourier_walk_coefficient(g: &MetricGraph, sv: &TransitionCollection, n: &[i64]) -> Result<CMatrix> {
    let ne = g.num_external();
    if n.len() != g.num_internal() {
        return Err(Error::ShapeMismatch(format!(
            "score of length {} for {} internal lines",
            n.len(),
            g.num_internal()
        )));
    }
    if n.iter().any(|&x| x < 0) {
        return Ok(CMatrix::zeros(ne, ne));
    }
    let n: Vec<u32> = n.iter().map(|&x| x as u32).collect();
    crate::walks::score_matrix(g, sv, &n)
}

#[derive(Clone, Debug)]
pub struct FourierSeries {
    pub value: CMatrix,
    /// Partial sums over `|n| <= N` for `N = 0..=n_max`.
    pub partial_sums: Vec<CMatrix>,
    /// Tail bound from `m = max_v ‖S_v(k)‖`, infinite outside the
    /// geometric regime.
    pub tail_bound: f64,
    pub m: f64,
}

/// `Σ_{|n| <= n_max} Ŝ_n(k) e^{ik⟨n, a⟩}`.
pub fn fourier_series_s(g: &MetricGraph, bc: &BoundaryConditions, k: C64, n_max: usize) -> Result<FourierSeries> {
    let sv = vertex_scattering(g, bc, k)?;
    // e^{ik⟨n,a⟩} is the walk damping e^{-β|w|} at β = −ik
    let beta = -C64::i() * k;
    let parts = series_by_length(g, &sv, beta, n_max);
    let ne = g.num_external();
    let mut acc = CMatrix::zeros(ne, ne);
    let partial_sums: Vec<CMatrix> = parts
        .iter()
        .map(|p| {
            acc += p;
            acc.clone()
        })
        .collect();
    let m = sv.norm_max();
    Ok(FourierSeries {
        value: acc,
        partial_sums,
        tail_bound: tail_bound(g, m, beta, n_max),
        m,
    })
}

#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub value: CMatrix,
    pub warnings: Vec<String>,
}

/// Tensor trapezoid approximation of
/// `(k/2π)^{|I|} ∫_{[0,2π/k]^{|I|}} S(k; a) e^{-ik⟨n,a⟩} da`.
pub fn fourier_quadrature(
    g: &MetricGraph,
    bc: &BoundaryConditions,
    k: f64,
    n: &[i64],
    mesh: usize,
) -> Result<QuadratureResult> {
    let ni = g.num_internal();
    if ni > 2 {
        return Err(Error::TooManyInternalLines(ni));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("k must be positive, got {k}")));
    }
    if n.len() != ni {
        return Err(Error::ShapeMismatch(format!("score of length {} for {} internal lines", n.len(), ni)));
    }
    if mesh == 0 {
        return Err(Error::InvalidArgument("mesh must be positive".into()));
    }
    bc.vertex_blocks(g)?;
    let ne = g.num_external();
    let period = 2.0 * PI / k;
    let h = period / mesh as f64;
    let nodes = mesh.pow(ni as u32);
    let kc = C64::from(k);
    let results: Vec<(CMatrix, Option<String>)> = (0..nodes)
        .into_par_iter()
        .map(|idx| {
            let mut a = vec![0.0; ni];
            let mut rest = idx;
            for ai in a.iter_mut() {
                *ai = (rest % mesh) as f64 * h;
                rest /= mesh;
            }
            let phase: f64 = a.iter().zip(n).map(|(x, &ni)| ni as f64 * x).sum();
            let weight = (C64::i() * (-k * phase)).exp();
            match solve_scattering_with_lengths(ne, &a, bc, kc) {
                Ok(r) => Ok((r.s * weight, None)),
                Err(_) => {
                    let shifted: Vec<f64> = a.iter().map(|x| x + 1e-9 * period).collect();
                    let r = solve_scattering_with_lengths(ne, &shifted, bc, kc)?;
                    Ok((r.s * weight, Some(format!("node {a:?} perturbed by 1e-9·2π/k"))))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut value = CMatrix::zeros(ne, ne);
    let mut warnings = Vec::new();
    for (s, w) in results {
        value += s;
        warnings.extend(w);
    }
    value /= C64::from(nodes as f64);
    Ok(QuadratureResult { value, warnings })
}
