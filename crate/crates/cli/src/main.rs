//! `walkgen` command-line front end.

mod num;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use walkgen::chain::{chain_to_edge_model, edge_model_to_chain};
use walkgen::families::{lattice_path_count, make_family, Family, SINK, SOURCE};
use walkgen::genfun::{eval_t, eval_t_directed, neumann_t, GenFunMatrix, Method as GfMethod};
use walkgen::io::{parse_bc, parse_chain, parse_graph, parse_penalties, write_chain, write_graph, LoadedGraph};
use walkgen::scattering::{
    bc_from_m, fourier_quadrature, fourier_series_s, fourier_walk_coefficient, solve_scattering, vertex_scattering,
    BoundaryConditions,
};
use walkgen::stats::{moments, simulate, Aggregate, Moments, Observable, SimOptions, SimulationReport};
use walkgen::transition::assemble_big_m;
use walkgen::walks::{beta0_bound, n_max_for_tail, series_t, series_t_directed, series_t_relevant};
use walkgen::{CMatrix, MetricGraph, TransitionCollection, C64};

use crate::num::{exact, human, human_c, parse_complex};

#[derive(Parser)]
#[command(name = "walkgen", version, about = "Generating functions of walks on metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the generating function T(β).
    Eval(EvalArgs),
    /// Count lattice paths of a classical family through T(0).
    Count(CountArgs),
    /// Mean values of walk observables.
    Stats(StatsArgs),
    /// Scattering matrix and its walk expansion.
    Scatter(ScatterArgs),
    /// Convert between vertex chains and edge models.
    Convert(ConvertArgs),
    /// Check a graph file and print a summary.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Table,
    Csv,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum EvalMethod {
    Closed,
    Neumann,
    Series,
}

#[derive(Args)]
struct EvalArgs {
    graph: PathBuf,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, required_unless_present = "beta_linspace")]
    beta: Option<C64>,
    /// START STOP COUNT, real β values.
    #[arg(long, num_args = 3, value_names = ["START", "STOP", "COUNT"], allow_hyphen_values = true, conflicts_with = "beta")]
    beta_linspace: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "closed")]
    method: EvalMethod,
    /// Truncation: walk length for `series`, number of terms for `neumann`.
    #[arg(long)]
    nmax: Option<usize>,
    /// JSON file with direction-dependent penalties {"a": {...}, "b": {...}}.
    #[arg(long)]
    directed: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    /// Also count by walk enumeration and by a lattice recursion.
    #[arg(long)]
    enumerate: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum What {
    Length,
    Transitions,
    Visits,
    Traversals,
    Reflections,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum AggregateMode {
    Src,
    Sink,
    Both,
}

#[derive(Args)]
struct StatsArgs {
    graph: PathBuf,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0")]
    beta: C64,
    #[arg(long, value_enum)]
    what: What,
    /// Vertex, or vertex with outgoing and incoming edge for transitions.
    #[arg(long, num_args = 1..=3, value_names = ["VERTEX", "TO", "FROM"])]
    at: Option<Vec<String>>,
    /// Internal line for traversals.
    #[arg(long)]
    edge: Option<String>,
    /// Restrict to this source line.
    #[arg(long)]
    from: Option<String>,
    /// Restrict to this sink line.
    #[arg(long)]
    to: Option<String>,
    #[arg(long, value_enum)]
    aggregate: Option<AggregateMode>,
    /// Number of Monte Carlo samples per source line.
    #[arg(long)]
    mc: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = walkgen::stats::DEFAULT_STEP_CAP)]
    step_cap: u64,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args)]
struct ScatterArgs {
    graph: PathBuf,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    k: C64,
    /// Boundary conditions induced by the transition matrices at this β.
    #[arg(long, conflicts_with = "bc")]
    bc_from_m: Option<f64>,
    /// JSON file with explicit {"A": [[..]], "B": [[..]]} in slot order.
    #[arg(long)]
    bc: Option<PathBuf>,
    /// Walk-sum Fourier coefficient for this score.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    fourier: Option<Vec<i64>>,
    /// Quadrature Fourier coefficient for this score, compared with the walk sum.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    quadrature: Option<Vec<i64>>,
    #[arg(long, default_value_t = 256)]
    mesh: usize,
    /// Partial sum of the walk expansion up to this combinatorial length.
    #[arg(long)]
    series: Option<usize>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    /// Treat the input as a chain file and puncture it at this vertex.
    #[arg(long, conflicts_with = "to_chain", required_unless_present = "to_chain")]
    puncture: Option<String>,
    /// Treat the input as a graph file and rebuild a vertex chain.
    #[arg(long)]
    to_chain: bool,
    /// Name of the added vertex for --to-chain.
    #[arg(long, default_value = "v_inf")]
    v_inf: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    graph: PathBuf,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: walkgen::Error| e.to_string())
}

fn load_graph(path: &Path) -> anyhow::Result<LoadedGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_graph(&text)?)
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Accumulates output so that each command writes once.
struct Out(String);

impl Out {
    fn line(&mut self, s: impl AsRef<str>) {
        self.0.push_str(s.as_ref());
        self.0.push('\n');
    }
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().enumerate().map(|(c, x)| format!("{x:<w$}", w = widths[c])).collect();
        s.push_str(cells.join("  ").trim_end());
        s.push('\n');
    }
    s
}

fn matrix_rows(g: &MetricGraph, m: &CMatrix) -> Vec<(String, String, C64)> {
    let mut out = Vec::new();
    for ep in 0..g.num_external() {
        for e in 0..g.num_external() {
            out.push((g.external_line(e).id.clone(), g.external_line(ep).id.clone(), m[(e, ep)]));
        }
    }
    out
}

fn eval_one(
    g: &MetricGraph,
    mc: &TransitionCollection,
    beta: C64,
    args: &EvalArgs,
    directed: Option<&(Vec<f64>, Vec<f64>)>,
) -> anyhow::Result<GenFunMatrix> {
    let m = assemble_big_m(g, mc)?;
    Ok(match (args.method, directed) {
        (EvalMethod::Closed, None) => eval_t(g, &m, beta)?,
        (EvalMethod::Closed, Some((a, b))) => eval_t_directed(g, &m, beta, a, b)?,
        (EvalMethod::Neumann, None) => neumann_t(g, &m, beta, args.nmax.unwrap_or(200)),
        (EvalMethod::Neumann, Some(_)) => bail!("--directed supports the closed and series methods"),
        (EvalMethod::Series, _) => {
            let n_max = match args.nmax {
                Some(n) => n,
                None => n_max_for_tail(g, mc.norm_max(), beta, 1e-12)
                    .ok_or_else(|| anyhow!("walk series tail is not summable at β = {beta}; pass --nmax"))?,
            };
            let r = match directed {
                None => series_t(g, mc, beta, n_max),
                Some((a, b)) => series_t_directed(g, mc, beta, a, b, n_max)?,
            };
            GenFunMatrix {
                value: r.value,
                method: GfMethod::Series,
                rcond: None,
                terms: Some(n_max),
                error_bound: r.tail_bound,
            }
        }
    })
}

fn method_name(m: GfMethod) -> &'static str {
    match m {
        GfMethod::Closed => "closed",
        GfMethod::Neumann => "neumann",
        GfMethod::Series => "series",
    }
}

fn cmd_eval(args: &EvalArgs) -> anyhow::Result<String> {
    let lg = load_graph(&args.graph)?;
    let g = &lg.graph;
    let mc = lg.require_matrices()?;
    let directed = match &args.directed {
        Some(p) => Some(parse_penalties(&read(p)?, g)?),
        None => None,
    };
    let mut out = Out(String::new());
    if let Some(ls) = &args.beta_linspace {
        let start: f64 = ls[0].parse().context("linspace start")?;
        let stop: f64 = ls[1].parse().context("linspace stop")?;
        let count: usize = ls[2].parse().context("linspace count")?;
        let grid: Vec<f64> = match count {
            0 => bail!("linspace count must be positive"),
            1 => vec![start],
            _ => (0..count).map(|j| start + (stop - start) * j as f64 / (count - 1) as f64).collect(),
        };
        let results: Vec<GenFunMatrix> = grid
            .par_iter()
            .map(|&b| eval_one(g, mc, C64::from(b), args, directed.as_ref()))
            .collect::<anyhow::Result<_>>()?;
        if args.format == Format::Csv {
            out.line("beta,e,eprime,re,im");
        } else {
            out.line(format!("method  {}", method_name(results[0].method)));
        }
        let mut rows = vec![vec!["beta".into(), "e".into(), "e'".into(), "T".into()]];
        for (b, r) in grid.iter().zip(&results) {
            for (e, ep, z) in matrix_rows(g, &r.value) {
                match args.format {
                    Format::Csv => out.line(format!("{},{e},{ep},{},{}", exact(*b), exact(z.re), exact(z.im))),
                    Format::Table => rows.push(vec![human(*b), e, ep, human_c(z)]),
                }
            }
        }
        if args.format == Format::Table {
            out.0.push_str(&table(&rows));
        }
        return Ok(out.0);
    }
    let beta = args.beta.expect("clap enforces --beta");
    let r = eval_one(g, mc, beta, args, directed.as_ref())?;
    match args.format {
        Format::Csv => {
            out.line("e,eprime,re,im");
            for (e, ep, z) in matrix_rows(g, &r.value) {
                out.line(format!("{e},{ep},{},{}", exact(z.re), exact(z.im)));
            }
        }
        Format::Table => {
            out.line(format!("method       {}", method_name(r.method)));
            out.line(format!("beta         {}", human_c(beta)));
            if let Some(rc) = r.rcond {
                out.line(format!("rcond        {rc:.3e}"));
            }
            if let Some(n) = r.terms {
                out.line(format!("truncation   {n}"));
                out.line(format!("error bound  {:.3e}", r.error_bound));
            }
            let mut rows = vec![vec!["e".into(), "e'".into(), "re".into(), "im".into()]];
            for (e, ep, z) in matrix_rows(g, &r.value) {
                rows.push(vec![e, ep, human(z.re), human(z.im)]);
            }
            out.0.push_str(&table(&rows));
        }
    }
    Ok(out.0)
}

fn cmd_count(args: &CountArgs) -> anyhow::Result<String> {
    let n = args.n as usize;
    let (g, mc) = make_family(args.family, n)?;
    let m = assemble_big_m(&g, &mc)?;
    let (e, ep) = (g.external_index(SINK)?, g.external_index(SOURCE)?);
    let t = eval_t(&g, &m, C64::from(0.0))?.value[(e, ep)];
    let rounded = t.re.round();
    let residual = (t - C64::from(rounded)).norm();
    if residual > 1e-6 {
        bail!("ResidualTooLarge: T(0) = {t} is {residual:.3e} away from an integer");
    }
    let mut header = vec!["family".to_string(), "n".into(), "count".into()];
    let mut row = vec![args.family.to_string(), n.to_string(), format!("{rounded:.0}")];
    if args.enumerate {
        // every relevant lattice path has at most 2n steps
        let walks = series_t_relevant(&g, &mc, C64::from(0.0), 2 * n).value[(e, ep)];
        let recursion = lattice_path_count(args.family, n);
        if (walks - C64::from(rounded)).norm() > 1e-6 || recursion as f64 != rounded {
            bail!("ResidualTooLarge: closed form {rounded}, enumeration {walks}, recursion {recursion}");
        }
        header.extend(["enumerated".into(), "recursion".into()]);
        row.extend([format!("{:.0}", walks.re), recursion.to_string()]);
    }
    Ok(match args.format {
        Format::Csv => format!("{}\n{}\n", header.join(","), row.join(",")),
        Format::Table => table(&[header, row]),
    })
}

fn observable(args: &StatsArgs, g: &MetricGraph) -> anyhow::Result<Observable> {
    let at = args.at.clone().unwrap_or_default();
    let vertex = || -> anyhow::Result<usize> {
        let v = at.first().ok_or_else(|| anyhow!("--at VERTEX is required for this observable"))?;
        Ok(g.vertex(v)?)
    };
    Ok(match args.what {
        What::Length => Observable::Length,
        What::Visits => Observable::Visits { vertex: vertex()? },
        What::Reflections => Observable::Reflections { vertex: vertex()? },
        What::Transitions => {
            if at.len() != 3 {
                bail!("--what transitions needs --at VERTEX TO FROM");
            }
            Observable::Transition {
                vertex: g.vertex(&at[0])?,
                to: g.edge(&at[1])?,
                from: g.edge(&at[2])?,
            }
        }
        What::Traversals => {
            let id = args.edge.as_ref().ok_or_else(|| anyhow!("--what traversals needs --edge LINE"))?;
            let line = g.internal_index(id)?;
            if args.beta == C64::from(0.0) {
                Observable::TraversalCount { line }
            } else {
                Observable::Traversals { line }
            }
        }
    })
}

fn empirical(r: &SimulationReport, what: What, obs: Observable, e: usize) -> Option<walkgen::stats::Estimate> {
    match (what, obs) {
        (What::Length, _) => r.mean_length[e],
        (What::Visits, Observable::Visits { vertex }) => r.visits[e][vertex],
        (What::Reflections, Observable::Reflections { vertex }) => r.reflections[e][vertex],
        (What::Traversals, Observable::Traversals { line } | Observable::TraversalCount { line }) => {
            r.traversals[e][line]
        }
        (What::Transitions, _) => r.transitions[e].first().copied().flatten(),
        _ => None,
    }
}

fn cmd_stats(args: &StatsArgs) -> anyhow::Result<String> {
    let lg = load_graph(&args.graph)?;
    let g = &lg.graph;
    let mc = lg.require_matrices()?;
    let obs = observable(args, g)?;
    let m: Moments = moments(g, mc, args.beta, obs)?;
    let sources: Vec<usize> = match &args.from {
        Some(id) => vec![g.external_index(id)?],
        None => (0..g.num_external()).collect(),
    };
    let sinks: Vec<usize> = match &args.to {
        Some(id) => vec![g.external_index(id)?],
        None => (0..g.num_external()).collect(),
    };
    let mut out = Out(String::new());

    if let Some(mode) = args.aggregate {
        let agg = match mode {
            AggregateMode::Src => Aggregate::Source(*sources.first().filter(|_| args.from.is_some()).ok_or_else(|| anyhow!("--aggregate src needs --from"))?),
            AggregateMode::Sink => Aggregate::Sink(*sinks.first().filter(|_| args.to.is_some()).ok_or_else(|| anyhow!("--aggregate sink needs --to"))?),
            AggregateMode::Both => Aggregate::Both,
        };
        let v = m.aggregate(agg)?;
        match args.format {
            Format::Csv => {
                out.line("aggregate,re,im");
                out.line(format!("{},{},{}", aggregate_name(mode), exact(v.re), exact(v.im)));
            }
            Format::Table => out.line(format!("aggregate {}  {}", aggregate_name(mode), human_c(v))),
        }
        return Ok(out.0);
    }

    let sims: Vec<(usize, SimulationReport)> = match args.mc {
        None => Vec::new(),
        Some(samples) => {
            if args.beta.im != 0.0 {
                bail!("Monte Carlo needs a real β");
            }
            let mut opts = SimOptions::new(args.beta.re, samples, args.seed);
            opts.step_cap = args.step_cap;
            if let Observable::Transition { vertex, to, from } = obs {
                opts.transitions = vec![(vertex, to, from)];
            }
            sources
                .iter()
                .map(|&s| Ok((s, simulate(g, mc, s, &opts)?)))
                .collect::<anyhow::Result<_>>()?
        }
    };

    let mut header = vec!["e".to_string(), "e'".into(), "T".into(), "mean".into()];
    if args.mc.is_some() {
        header.extend(["empirical".into(), "stderr".into(), "censored".into()]);
    }
    let mut rows = vec![header.clone()];
    let mut csv = vec![header
        .iter()
        .map(|h| match h.as_str() {
            "e'" => "eprime".to_string(),
            "T" => "t_re,t_im".into(),
            "mean" => "mean_re,mean_im".into(),
            x => x.into(),
        })
        .collect::<Vec<_>>()
        .join(",")];
    for &ep in &sources {
        for &e in &sinks {
            let t = m.t[(e, ep)];
            let mean = m.mean(e, ep).ok();
            let (eid, epid) = (g.external_line(e).id.clone(), g.external_line(ep).id.clone());
            let mut row = vec![
                eid.clone(),
                epid.clone(),
                human_c(t),
                mean.map_or("undefined".into(), human_c),
            ];
            let mut crow = vec![
                eid,
                epid,
                exact(t.re),
                exact(t.im),
                mean.map_or("nan".into(), |z| exact(z.re)),
                mean.map_or("nan".into(), |z| exact(z.im)),
            ];
            if let Some((_, r)) = sims.iter().find(|(s, _)| *s == ep) {
                match empirical(r, args.what, obs, e) {
                    Some(est) => {
                        row.extend([human(est.value), human(est.stderr)]);
                        crow.extend([exact(est.value), exact(est.stderr)]);
                    }
                    None => {
                        row.extend(["-".into(), "-".into()]);
                        crow.extend(["nan".into(), "nan".into()]);
                    }
                }
                row.push(r.censored.to_string());
                crow.push(r.censored.to_string());
            }
            rows.push(row);
            csv.push(crow.join(","));
        }
    }
    match args.format {
        Format::Csv => csv.iter().for_each(|l| out.line(l)),
        Format::Table => {
            out.line(format!("observable  {}", what_name(args.what)));
            out.line(format!("beta        {}", human_c(args.beta)));
            if m.zero_entry {
                out.line("note        the selected transition has zero amplitude; its mean is 0");
            }
            if matches!(obs, Observable::TraversalCount { .. }) {
                out.line("note        β = 0, traversals counted directly");
            }
            out.0.push_str(&table(&rows));
        }
    }
    Ok(out.0)
}

fn what_name(w: What) -> &'static str {
    match w {
        What::Length => "length",
        What::Transitions => "transitions",
        What::Visits => "visits",
        What::Traversals => "traversals",
        What::Reflections => "reflections",
    }
}

fn aggregate_name(m: AggregateMode) -> &'static str {
    match m {
        AggregateMode::Src => "src",
        AggregateMode::Sink => "sink",
        AggregateMode::Both => "both",
    }
}

fn push_matrix(out: &mut Out, format: Format, label: &str, g: &MetricGraph, m: &CMatrix) {
    match format {
        Format::Csv => {
            for (e, ep, z) in matrix_rows(g, m) {
                out.line(format!("{label},{e},{ep},{},{}", exact(z.re), exact(z.im)));
            }
        }
        Format::Table => {
            out.line(format!("{label}:"));
            let mut rows = vec![vec!["  e".into(), "e'".into(), "re".into(), "im".into()]];
            for (e, ep, z) in matrix_rows(g, m) {
                rows.push(vec![format!("  {e}"), ep, human(z.re), human(z.im)]);
            }
            out.0.push_str(&table(&rows));
        }
    }
}

fn push_scalar(out: &mut Out, format: Format, label: &str, x: f64) {
    match format {
        Format::Csv => out.line(format!("{label},,,{},0", exact(x))),
        Format::Table => out.line(format!("{label:<18}{x:.3e}")),
    }
}

fn cmd_scatter(args: &ScatterArgs) -> anyhow::Result<String> {
    let lg = load_graph(&args.graph)?;
    let g = &lg.graph;
    let bc: BoundaryConditions = match (&args.bc, args.bc_from_m) {
        (Some(p), _) => parse_bc(&read(p)?)?,
        (None, Some(beta)) => bc_from_m(g, lg.require_matrices()?, beta)?,
        (None, None) => bail!("pass --bc-from-m BETA or --bc FILE"),
    };
    let mut out = Out(String::new());
    if args.format == Format::Csv {
        out.line("quantity,e,eprime,re,im");
    } else {
        out.line(format!("k                 {}", human_c(args.k)));
        if !bc.self_adjoint {
            out.line("note              A B† is not self-adjoint, S need not be unitary");
        }
    }
    let r = solve_scattering(g, &bc, args.k)?;
    push_matrix(&mut out, args.format, "S", g, &r.s);
    push_scalar(&mut out, args.format, "unitarity_defect", r.unitarity_defect);
    push_scalar(&mut out, args.format, "residual", r.residual);
    if r.least_squares && args.format == Format::Table {
        out.line("note              Z(k) is singular, minimum-norm solution used");
    }
    if let Some(n) = &args.fourier {
        let sv = vertex_scattering(g, &bc, args.k)?;
        let c = fourier_walk_coefficient(g, &sv, n)?;
        push_matrix(&mut out, args.format, &format!("walk_coefficient{n:?}"), g, &c);
    }
    if let Some(n) = &args.quadrature {
        if args.k.im != 0.0 {
            bail!("--quadrature needs a real positive k");
        }
        let q = fourier_quadrature(g, &bc, args.k.re, n, args.mesh)?;
        let sv = vertex_scattering(g, &bc, args.k)?;
        let c = fourier_walk_coefficient(g, &sv, n)?;
        push_matrix(&mut out, args.format, &format!("quadrature{n:?}"), g, &q.value);
        push_matrix(&mut out, args.format, &format!("walk_coefficient{n:?}"), g, &c);
        push_scalar(&mut out, args.format, "max_difference", walkgen::linalg::max_abs_diff(&q.value, &c));
        for w in &q.warnings {
            eprintln!("warning: {w}");
        }
    }
    if let Some(n_max) = args.series {
        let f = fourier_series_s(g, &bc, args.k, n_max)?;
        push_matrix(&mut out, args.format, &format!("walk_series[{n_max}]"), g, &f.value);
        push_scalar(&mut out, args.format, "series_tail_bound", f.tail_bound);
        push_scalar(&mut out, args.format, "series_difference", walkgen::linalg::max_abs_diff(&f.value, &r.s));
    }
    Ok(out.0)
}

fn cmd_convert(args: &ConvertArgs) -> anyhow::Result<String> {
    let text = read(&args.input)?;
    let result = if let Some(v_inf) = &args.puncture {
        let (chain, lengths) = parse_chain(&text)?;
        let (g, mc) = chain_to_edge_model(&chain, v_inf, &lengths)?;
        write_graph(&g, Some(&mc))
    } else {
        let lg = parse_graph(&text)?;
        write_chain(&edge_model_to_chain(&lg.graph, lg.require_matrices()?, &args.v_inf)?)
    };
    match &args.output {
        Some(p) => {
            fs::write(p, result + "\n").with_context(|| format!("writing {}", p.display()))?;
            Ok(String::new())
        }
        None => Ok(result + "\n"),
    }
}

fn cmd_validate(args: &ValidateArgs) -> anyhow::Result<String> {
    let lg = load_graph(&args.graph)?;
    let g = &lg.graph;
    let mut out = Out(String::new());
    out.line(format!("vertices        {}", g.num_vertices()));
    out.line(format!("internal lines  {}", g.num_internal()));
    out.line(format!("external lines  {}", g.num_external()));
    let degrees: usize = (0..g.num_vertices()).map(|v| g.degree(v)).sum();
    out.line(format!("degree sum      {} (|E| + 2|I| = {})", degrees, g.boundary_dim()));
    if let Some(a) = g.a_min() {
        out.line(format!("a_min           {}", human(a)));
    }
    match &lg.matrices {
        None => out.line("matrices        none"),
        Some(mc) => {
            let f = mc.classify();
            out.line(format!(
                "flags           stochastic={} combinatorial={} symmetric={} hermitian={} columns_equal={}",
                f.stochastic, f.combinatorial, f.symmetric, f.hermitian, f.columns_equal
            ));
            out.line(format!("max ‖M(v)‖      {}", human(mc.norm_max())));
            if let Ok(b0) = beta0_bound(g, mc) {
                out.line(format!("beta0 bound     {}", human(b0)));
            }
        }
    }
    Ok(out.0)
}

fn run(cli: Cli) -> anyhow::Result<String> {
    match cli.command {
        Command::Eval(a) => cmd_eval(&a),
        Command::Count(a) => cmd_count(&a),
        Command::Stats(a) => cmd_stats(&a),
        Command::Scatter(a) => cmd_scatter(&a),
        Command::Convert(a) => cmd_convert(&a),
        Command::Validate(a) => cmd_validate(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("WALKGEN_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(err) => {
            match err.downcast_ref::<walkgen::Error>() {
                Some(e) => eprintln!("error: {}: {e}", e.kind()),
                None => eprintln!("error: {err:#}"),
            }
            ExitCode::from(1)
        }
    }
}
