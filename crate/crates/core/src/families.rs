//! Lattice graphs whose combinatorial walk counts are classical numbers.
//!
//! `G_n` has vertices `0 <= y <= x <= n` with `e'` at `(0,0)` and `e` at
//! `(n,n)`; `G_n⁺` is the full square `[0,n]²` with `e'` at `(0,0)` and `e`
//! at `(n,0)`. Lattice points at distance at most `√2` are joined by lines
//! of unit length.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Edge, GraphSpec, MetricGraph};
use crate::linalg::{ONE, ZERO};
use crate::transition::TransitionCollection;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Catalan,
    Schroeder,
    Dyck,
    Motzkin,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Catalan, Family::Schroeder, Family::Dyck, Family::Motzkin];

    pub fn steps(self) -> &'static [(i64, i64)] {
        match self {
            Family::Catalan => &[(1, 0), (0, 1)],
            Family::Schroeder => &[(1, 0), (0, 1), (1, 1)],
            Family::Dyck => &[(1, 1), (1, -1)],
            Family::Motzkin => &[(1, 1), (1, -1), (1, 0)],
        }
    }

    fn triangular(self) -> bool {
        matches!(self, Family::Catalan | Family::Schroeder)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Catalan => "catalan",
            Family::Schroeder => "schroeder",
            Family::Dyck => "dyck",
            Family::Motzkin => "motzkin",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "catalan" => Ok(Family::Catalan),
            "schroeder" | "schröder" | "schroder" => Ok(Family::Schroeder),
            "dyck" => Ok(Family::Dyck),
            "motzkin" => Ok(Family::Motzkin),
            _ => Err(Error::InvalidArgument(format!("unknown family `{s}`"))),
        }
    }
}

pub const SOURCE: &str = "e'";
pub const SINK: &str = "e";

fn vid(p: (i64, i64)) -> String {
    format!("v_{}_{}", p.0, p.1)
}

pub fn make_family(family: Family, n: usize) -> Result<(MetricGraph, TransitionCollection)> {
    if n == 0 {
        return Err(Error::InvalidArgument("family size must be at least 1".into()));
    }
    let n = n as i64;
    let points: Vec<(i64, i64)> = (0..=n)
        .flat_map(|x| (0..=n).map(move |y| (x, y)))
        .filter(|&(x, y)| !family.triangular() || y <= x)
        .collect();
    let mut spec = GraphSpec {
        vertices: points.iter().map(|&p| vid(p)).collect(),
        ..Default::default()
    };
    for (k, &p) in points.iter().enumerate() {
        for &q in &points[k + 1..] {
            let (dx, dy) = (q.0 - p.0, q.1 - p.1);
            if dx * dx + dy * dy <= 2 {
                // points are generated in lexicographic order, so p < q
                let id = format!("i_{}_{}_{}_{}", p.0, p.1, q.0, q.1);
                spec = spec.internal(&id, &vid(p), &vid(q), 1.0);
            }
        }
    }
    let sink_at = if family.triangular() { (n, n) } else { (n, 0) };
    spec = spec.external(SOURCE, &vid((0, 0))).external(SINK, &vid(sink_at));
    let g = MetricGraph::build(&spec)?;

    let source = g.edge(SOURCE)?;
    let sink = g.edge(SINK)?;
    let pos = |v: usize| -> (i64, i64) {
        let mut it = g.vertex_id(v)[2..].split('_').map(|s| s.parse::<i64>().unwrap());
        (it.next().unwrap(), it.next().unwrap())
    };
    let chi = |v: usize, j: Edge| -> (i64, i64) {
        match j {
            _ if j == sink => (1, 0),
            _ if j == source => (-1, 0),
            Edge::Internal(i) => {
                let (a, b) = (pos(v), pos(g.other_end(i, v)));
                (b.0 - a.0, b.1 - a.1)
            }
            Edge::External(_) => unreachable!(),
        }
    };
    let steps = family.steps();
    let in_k = |d: (i64, i64)| steps.contains(&d);
    let mc = TransitionCollection::from_fn(&g, |v, j1, j2| {
        let out = chi(v, j1);
        let back = chi(v, j2);
        let inc = (-back.0, -back.1);
        let allowed = if family == Family::Dyck && j2 == source {
            in_k(out)
        } else if family == Family::Dyck && j1 == sink {
            in_k(inc)
        } else {
            in_k(out) && in_k(inc)
        };
        if allowed {
            ONE
        } else {
            ZERO
        }
    });
    Ok((g, mc))
}

/// Reference counts of lattice paths by dynamic programming over the
/// step set, independent of any graph machinery.
pub fn lattice_path_count(family: Family, n: usize) -> u128 {
    let n = n as i64;
    let inside = |x: i64, y: i64| {
        (0..=n).contains(&x) && (0..=n).contains(&y) && (!family.triangular() || y <= x)
    };
    let size = (n + 1) as usize;
    let mut ways = vec![vec![0u128; size]; size];
    ways[0][0] = 1;
    // every step has a nonnegative x component and positive x + y, so this
    // order visits predecessors first
    let mut order: Vec<(i64, i64)> = (0..=n).flat_map(|x| (0..=n).map(move |y| (x, y))).collect();
    order.sort_by_key(|&(x, y)| (x, if family.triangular() { y } else { 0 }));
    for &(x, y) in &order {
        if !inside(x, y) || (x, y) == (0, 0) {
            continue;
        }
        let mut total = 0;
        for &(dx, dy) in family.steps() {
            let (px, py) = (x - dx, y - dy);
            if inside(px, py) {
                total += ways[px as usize][py as usize];
            }
        }
        ways[x as usize][y as usize] = total;
    }
    let end = if family.triangular() { (n, n) } else { (n, 0) };
    ways[end.0 as usize][end.1 as usize]
}
