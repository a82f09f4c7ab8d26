//! Closed-form generating function `T(β)` through the resolvent of the
//! coupling matrix `K(β) = M·G·H`, plus the Neumann expansion and the
//! full matrix `D(β) = (I − K(β))·U`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::linalg::{identity, lu_solve, op_norm, rcond, CMatrix, C64, ONE};
use crate::transition::BigM;

pub const SINGULAR_RCOND: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Closed,
    Neumann,
    Series,
}

#[derive(Clone, Debug)]
pub struct GenFunMatrix {
    /// `value[(e, e')]`, rows are sinks.
    pub value: CMatrix,
    pub method: Method,
    /// Reciprocal condition number of `I − K` (closed form only).
    pub rcond: Option<f64>,
    /// Terms or truncation length used by series methods.
    pub terms: Option<usize>,
    /// A-priori bound on the truncation error, infinite when unavailable.
    pub error_bound: f64,
}

#[derive(Clone, Debug)]
pub struct CouplingMatrix {
    pub k: CMatrix,
    pub beta: C64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

fn check_penalty(g: &MetricGraph, p: &[f64]) -> Result<()> {
    if p.len() != g.num_internal() {
        return Err(Error::ShapeMismatch(format!(
            "penalty vector of length {} for {} internal lines",
            p.len(),
            g.num_internal()
        )));
    }
    if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::InvalidArgument(format!("penalties must be positive, got {x}")));
    }
    Ok(())
}

/// `G·Ĥ(β; a, b)`. Hopping from the initial to the terminal vertex of line
/// `i` (slot `i⁻` to `i⁺`) costs `e^{-β a_i}`, the reverse hop `e^{-β b_i}`.
pub fn gh_matrix(g: &MetricGraph, beta: C64, a: &[f64], b: &[f64]) -> CMatrix {
    let ne = g.num_external();
    let ni = g.num_internal();
    let mut gh = CMatrix::zeros(g.boundary_dim(), g.boundary_dim());
    for i in 0..ni {
        gh[(ne + ni + i, ne + i)] = (-beta * a[i]).exp();
        gh[(ne + i, ne + ni + i)] = (-beta * b[i]).exp();
    }
    gh
}

/// `d/dβ G·Ĥ(β; a, b)`.
pub fn gh_derivative(g: &MetricGraph, beta: C64, a: &[f64], b: &[f64]) -> CMatrix {
    let ne = g.num_external();
    let ni = g.num_internal();
    let mut gh = CMatrix::zeros(g.boundary_dim(), g.boundary_dim());
    for i in 0..ni {
        gh[(ne + ni + i, ne + i)] = -a[i] * (-beta * a[i]).exp();
        gh[(ne + i, ne + ni + i)] = -b[i] * (-beta * b[i]).exp();
    }
    gh
}

pub fn coupling(g: &MetricGraph, m: &BigM, beta: C64, b: Option<&[f64]>) -> Result<CouplingMatrix> {
    let a = g.lengths();
    let b = b.map(|b| b.to_vec()).unwrap_or_else(|| a.clone());
    check_penalty(g, &b)?;
    let k = &m.matrix * gh_matrix(g, beta, &a, &b);
    Ok(CouplingMatrix { k, beta, a, b })
}

/// `P (I − M·GH)⁻¹ M Pᵀ` for an arbitrary `GH`, with the rcond of `I − K`.
pub fn resolve(ne: usize, m: &CMatrix, gh: &CMatrix) -> Result<(CMatrix, f64)> {
    let d = m.nrows();
    let k = m * gh;
    let a = identity(d) - k;
    let rc = rcond(&a);
    if rc.is_nan() || rc < SINGULAR_RCOND {
        return Err(Error::SingularD { rcond: rc });
    }
    let rhs = m.columns(0, ne).into_owned();
    let x = lu_solve(&a, &rhs).ok_or(Error::SingularD { rcond: rc })?;
    Ok((x.rows(0, ne).into_owned(), rc))
}

/// `T` and its derivative along a direction in which `M` and `GH` vary at
/// rates `dm` and `dgh`.
pub fn resolve_derivative(
    ne: usize,
    m: &CMatrix,
    gh: &CMatrix,
    dm: &CMatrix,
    dgh: &CMatrix,
) -> Result<(CMatrix, CMatrix)> {
    let d = m.nrows();
    let a = identity(d) - m * gh;
    let rc = rcond(&a);
    if rc.is_nan() || rc < SINGULAR_RCOND {
        return Err(Error::SingularD { rcond: rc });
    }
    let lu = a.lu();
    let r_m = lu.solve(&m.columns(0, ne).into_owned()).ok_or(Error::SingularD { rcond: rc })?;
    let dk = dm * gh + m * dgh;
    // dT = P R dK R M Pᵀ + P R dM Pᵀ
    let rhs = &dk * &r_m + dm.columns(0, ne);
    let dx = lu.solve(&rhs).ok_or(Error::SingularD { rcond: rc })?;
    Ok((r_m.rows(0, ne).into_owned(), dx.rows(0, ne).into_owned()))
}

fn closed(g: &MetricGraph, m: &BigM, beta: C64, a: &[f64], b: &[f64]) -> Result<GenFunMatrix> {
    let gh = gh_matrix(g, beta, a, b);
    let (value, rc) = resolve(g.num_external(), &m.matrix, &gh)?;
    Ok(GenFunMatrix {
        value,
        method: Method::Closed,
        rcond: Some(rc),
        terms: None,
        error_bound: 0.0,
    })
}

pub fn eval_t(g: &MetricGraph, m: &BigM, beta: C64) -> Result<GenFunMatrix> {
    let a = g.lengths();
    closed(g, m, beta, &a, &a)
}

/// `T̂(β)` with penalty `a_i` for initial→terminal traversals and `b_i` for
/// terminal→initial ones.
pub fn eval_t_directed(g: &MetricGraph, m: &BigM, beta: C64, a: &[f64], b: &[f64]) -> Result<GenFunMatrix> {
    check_penalty(g, a)?;
    check_penalty(g, b)?;
    closed(g, m, beta, a, b)
}

/// `Σ_{n=0}^{terms} P Kⁿ M Pᵀ` with remainder bound `‖M‖ q^{N+1}/(1−q)`,
/// `q = ‖K‖₂`.
pub fn neumann_t(g: &MetricGraph, m: &BigM, beta: C64, terms: usize) -> GenFunMatrix {
    let ne = g.num_external();
    let a = g.lengths();
    let k = &m.matrix * gh_matrix(g, beta, &a, &a);
    let mut x = m.matrix.columns(0, ne).into_owned();
    let mut sum = x.rows(0, ne).into_owned();
    for _ in 0..terms {
        x = &k * x;
        sum += x.rows(0, ne);
    }
    let q = op_norm(&k);
    let error_bound = if q < 1.0 {
        op_norm(&m.matrix) * q.powi(terms as i32 + 1) / (1.0 - q)
    } else {
        f64::INFINITY
    };
    GenFunMatrix {
        value: sum,
        method: Method::Neumann,
        rcond: None,
        terms: Some(terms),
        error_bound,
    }
}

/// `D(β) = ½(X+Y) − ½ M (X−Y)` at `k = iβ`, including the growing factors
/// `e^{β a_i}`.
pub fn d_matrix(g: &MetricGraph, m: &BigM, beta: C64) -> Result<CMatrix> {
    let a = g.lengths();
    let a_max = a.iter().copied().fold(0.0, f64::max);
    if beta.re * a_max > 700.0 {
        return Err(Error::Overflow(beta.re * a_max));
    }
    let ne = g.num_external();
    let ni = g.num_internal();
    let d = g.boundary_dim();
    // ½(X+Y) = diag(I, I, t⁻¹), ½(X−Y) = [[0,0,0],[0,0,I],[0,t,0]], t = e^{-βa}
    let mut half_sum = identity(d);
    let mut half_diff = CMatrix::zeros(d, d);
    for i in 0..ni {
        let t = (-beta * a[i]).exp();
        half_sum[(ne + ni + i, ne + ni + i)] = ONE / t;
        half_diff[(ne + i, ne + ni + i)] = ONE;
        half_diff[(ne + ni + i, ne + i)] = t;
    }
    Ok(half_sum - &m.matrix * half_diff)
}
