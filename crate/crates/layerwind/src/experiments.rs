//! Two-mesh convergence studies and oracle comparisons.
//!
//! A [`Runner`] maps `(ε, N, M)` to a grid function in its solver frame.
//! [`two_mesh_difference`] compares the `(N, M)` and `(2N, 2M)` runs at every
//! node and cell midpoint of the finer mesh, and [`build_table`] sweeps an
//! `ε` list in parallel into a [`ConvergenceTable`].

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::characteristics::exact_solution;
use crate::composition::{
    bilinear, solve_component_i_left, solve_component_i_right, solve_component_p,
    solve_component_r, solve_component_s, Component, FluidParticleConfig,
};
use crate::error::{Error, Result};
use crate::mesh::{
    build_shishkin_inflow, build_shishkin_interior, build_shishkin_outflow, build_shishkin_time,
    build_uniform, TensorMesh,
};
use crate::solvers::{
    solve_fitted_outflow, solve_flow_away, solve_pulse_boundary, solve_pulse_general,
    solve_pulse_initial, solve_upwind, SchemeKind,
};
use crate::types::{Extension, GridFunction, ScalarField1D, ScalarField2D, TransportProblem};

/// Produces a discrete solution for given `(ε, N, M)`.
pub trait Runner: Sync {
    /// Solves on an `N × M` mesh.
    fn solve(&self, eps: f64, n: usize, m: usize) -> Result<GridFunction>;
}

impl<F> Runner for F
where
    F: Fn(f64, usize, usize) -> Result<GridFunction> + Sync,
{
    fn solve(&self, eps: f64, n: usize, m: usize) -> Result<GridFunction> {
        self(eps, n, m)
    }
}

/// `ε = 2⁰, 2^{−step}, …` down to `2^{−max_power}`.
pub fn eps_powers(max_power: u32, step: u32) -> Vec<f64> {
    (0..=max_power)
        .step_by(step.max(1) as usize)
        .map(|k| 2f64.powi(-(k as i32)))
        .collect()
}

/// Maximum difference between the `(N, M)` and `(2N, 2M)` runs over the
/// nodes and cell midpoints of the finer mesh.
pub fn two_mesh_difference(runner: &dyn Runner, eps: f64, n: usize, m: usize) -> Result<f64> {
    let coarse = runner.solve(eps, n, m)?;
    let fine = runner.solve(eps, 2 * n, 2 * m)?;
    grid_difference(&coarse, &fine)
}

/// Maximum of `|Ū_coarse − Ū_fine|` over the nodes and cell midpoints of `fine`.
pub fn grid_difference(coarse: &GridFunction, fine: &GridFunction) -> Result<f64> {
    let cm = coarse.mesh();
    let (xlo, xhi, tlo, thi) = (cm.space.lo(), cm.space.hi(), cm.time.lo(), cm.time.hi());
    let ci = bilinear(coarse.clone());
    let fi = bilinear(fine.clone());
    let fm = fine.mesh();
    let xs = fm.space.nodes();
    let ts = fm.time.nodes();
    let xm = fm.space.midpoints();
    let tm = fm.time.midpoints();
    let at = |x: f64, t: f64| ci.eval(x.clamp(xlo, xhi), t.clamp(tlo, thi));
    let mut d: f64 = 0.0;
    for (j, &t) in ts.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            d = d.max((at(x, t)? - fine.get(i, j)).abs());
        }
        for &x in &xm {
            d = d.max((at(x, t)? - fi.eval(x, t)?).abs());
        }
    }
    for &t in &tm {
        for xx in [xs, xm.as_slice()] {
            for &x in xx {
                d = d.max((at(x, t)? - fi.eval(x, t)?).abs());
            }
        }
    }
    Ok(d)
}

/// Two-mesh differences and orders for a list of `ε` and `N = M`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    /// Perturbation parameters, one row each.
    pub eps_list: Vec<f64>,
    /// Mesh sizes `N = M`, one column each.
    pub n_list: Vec<usize>,
    /// `D[e][k]`, the difference between the `n_list[k]` and doubled runs.
    pub d: Vec<Vec<f64>>,
    /// `P[e][k] = log₂(D[e][k] / D[e][k+1])`.
    pub p: Vec<Vec<f64>>,
    /// Column maxima of `D`.
    pub d_uniform: Vec<f64>,
    /// Orders of `d_uniform`.
    pub p_uniform: Vec<f64>,
}

fn orders(d: &[f64]) -> Vec<f64> {
    d.windows(2)
        .map(|w| {
            if w[0] > 0.0 && w[1] > 0.0 && w[0].is_finite() && w[1].is_finite() {
                (w[0] / w[1]).log2()
            } else {
                f64::NAN
            }
        })
        .collect()
}

impl ConvergenceTable {
    /// Fills orders and uniform rows from a difference matrix.
    pub fn from_differences(eps_list: Vec<f64>, n_list: Vec<usize>, d: Vec<Vec<f64>>) -> Self {
        let p = d.iter().map(|row| orders(row)).collect();
        let d_uniform: Vec<f64> = (0..n_list.len())
            .map(|k| d.iter().map(|row| row[k]).fold(0.0, f64::max))
            .collect();
        let p_uniform = orders(&d_uniform);
        Self {
            eps_list,
            n_list,
            d,
            p,
            d_uniform,
            p_uniform,
        }
    }

    /// Row of `eps`, if tabulated.
    pub fn row(&self, eps: f64) -> Option<usize> {
        self.eps_list.iter().position(|&e| e == eps)
    }

    /// CSV with a header of `N` values, one row per `ε` with differences and
    /// orders interleaved, and a final `uniform` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps");
        for (k, n) in self.n_list.iter().enumerate() {
            let _ = write!(out, ",D_{n}");
            if k + 1 < self.n_list.len() {
                let _ = write!(out, ",p_{n}");
            }
        }
        out.push('\n');
        let mut line = |label: String, d: &[f64], p: &[f64]| {
            out.push_str(&label);
            for (k, v) in d.iter().enumerate() {
                out.push(',');
                out.push_str(&fmt_sci(*v));
                if let Some(q) = p.get(k) {
                    out.push(',');
                    out.push_str(&fmt_order(*q));
                }
            }
            out.push('\n');
        };
        for (e, &eps) in self.eps_list.iter().enumerate() {
            line(fmt_eps(eps), &self.d[e], &self.p[e]);
        }
        line("uniform".into(), &self.d_uniform, &self.p_uniform);
        out
    }
}

/// `2^-k` for exact powers of two, scientific notation otherwise.
pub fn fmt_eps(eps: f64) -> String {
    let k = -eps.log2();
    if k.fract() == 0.0 && 2f64.powi(-(k as i32)) == eps {
        format!("2^-{}", k as i32)
    } else {
        fmt_sci(eps)
    }
}

/// Four significant digits, lowercase `e`, two-digit signed exponent.
pub fn fmt_sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}").to_lowercase();
    }
    let s = format!("{v:.3e}");
    let (mant, exp) = s
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

/// Three decimals.
pub fn fmt_order(p: f64) -> String {
    if p.is_finite() {
        format!("{p:.3}")
    } else {
        "nan".into()
    }
}

/// Differences for every `(ε, N)` cell. Rows run in parallel; within a row the
/// fine solve of one column is reused as the coarse solve of the next.
pub fn build_table(
    runner: &dyn Runner,
    eps_list: &[f64],
    n_list: &[usize],
) -> Result<ConvergenceTable> {
    if n_list.is_empty() || eps_list.is_empty() {
        return Err(Error::param("empty eps or N list"));
    }
    let rows: Vec<Result<Vec<f64>>> = eps_list
        .par_iter()
        .map(|&eps| {
            let mut row = Vec::with_capacity(n_list.len());
            let mut cached: Option<(usize, GridFunction)> = None;
            for &n in n_list {
                let coarse = match cached.take() {
                    Some((k, g)) if k == n => g,
                    _ => runner.solve(eps, n, n)?,
                };
                let fine = runner.solve(eps, 2 * n, 2 * n)?;
                row.push(grid_difference(&coarse, &fine)?);
                cached = Some((2 * n, fine));
            }
            Ok(row)
        })
        .collect();
    let d = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::from_differences(
        eps_list.to_vec(),
        n_list.to_vec(),
        d,
    ))
}

/// Maximum of `|field − oracle|` over a `probe × probe` uniform lattice of
/// `[0, L] × [0, T]`.
pub fn oracle_error(
    field: &(dyn Fn(f64, f64) -> Result<f64> + Sync),
    oracle: &(dyn Fn(f64, f64) -> Result<f64> + Sync),
    extent: (f64, f64),
    probe: usize,
) -> Result<f64> {
    if probe < 2 {
        return Err(Error::param(
            "probe lattice needs at least 2 points per side",
        ));
    }
    let (l, t) = extent;
    let errs: Vec<Result<f64>> = (0..probe)
        .into_par_iter()
        .map(|j| {
            let tj = t * j as f64 / (probe - 1) as f64;
            let mut e: f64 = 0.0;
            for i in 0..probe {
                let xi = l * i as f64 / (probe - 1) as f64;
                e = e.max((field(xi, tj)? - oracle(xi, tj)?).abs());
            }
            Ok(e)
        })
        .collect();
    errs.into_iter().try_fold(0.0_f64, |acc, e| Ok(acc.max(e?)))
}

/// Error of the bilinear interpolant of `grid` against [`exact_solution`].
pub fn exact_error(p: &TransportProblem, grid: &GridFunction, probe: usize) -> Result<f64> {
    let b = bilinear(grid.clone());
    oracle_error(
        &|x, t| b.eval(x, t),
        &|x, t| exact_solution(p, x, t, crate::characteristics::DEFAULT_QUAD_PANELS),
        (p.length(), p.horizon()),
        probe,
    )
}

/// Mesh knobs for [`solve_scheme`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshOptions {
    /// Fine-band multiplier of two-band space meshes.
    pub mult: f64,
    /// `C₂` of Shishkin time meshes.
    pub c2: f64,
    /// Layer regularity index for endpoint pulses.
    pub ell: u32,
    /// Pulse location (initial pulses) or entry time (boundary pulses).
    pub d: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            mult: 1.0,
            c2: 2.0,
            ell: 3,
            d: 0.0,
        }
    }
}

/// Solves `p` with `kind` on the default meshes of that scheme:
/// uniform meshes for the classical scheme, a right-refined space mesh with a
/// time-refined mesh for the fitted scheme, a left-refined space mesh for
/// flow-away, an aligned interior or endpoint mesh for initial pulses, and a
/// time-refined aligned mesh for boundary pulses.
pub fn solve_scheme(
    p: &TransportProblem,
    kind: SchemeKind,
    n: usize,
    m: usize,
    opts: &MeshOptions,
) -> Result<GridFunction> {
    let (l, t, eps) = (p.length(), p.horizon(), p.epsilon());
    match kind {
        SchemeKind::ClassicalUpwind => solve_upwind(
            p,
            &TensorMesh::new(build_uniform(0.0, l, n)?, build_uniform(0.0, t, m)?),
        ),
        SchemeKind::FittedOutflow => solve_fitted_outflow(
            p,
            &TensorMesh::new(
                build_shishkin_outflow(l, eps, n, opts.mult)?,
                build_shishkin_time(t, eps, m, opts.c2)?,
            ),
        ),
        SchemeKind::FlowAway => solve_flow_away(
            p,
            &TensorMesh::new(
                build_shishkin_inflow(l, eps, n, opts.mult)?,
                build_uniform(0.0, t, m)?,
            ),
        ),
        SchemeKind::PulseInitial | SchemeKind::PulseInitialGeneral => {
            let ms = if opts.d > 0.0 {
                build_shishkin_interior(opts.d, l, eps, n)?
            } else {
                build_shishkin_inflow(l, eps, n, f64::from(opts.ell + 1))?
            };
            let mt = build_uniform(0.0, t, m)?;
            let sol = if kind == SchemeKind::PulseInitial {
                solve_pulse_initial(p, opts.d, opts.ell, &ms, &mt)?
            } else {
                solve_pulse_general(p, opts.d, &ms, &mt)?
            };
            Ok(sol.grid)
        }
        SchemeKind::PulseBoundary => {
            let mx = build_uniform(0.0, l, n)?;
            let mt = if opts.d > 0.0 {
                build_shishkin_interior(opts.d, t, eps, m)?
            } else {
                build_shishkin_time(t, eps, m, opts.c2)?
            };
            Ok(solve_pulse_boundary(p, opts.d, &mx, &mt)?.grid)
        }
    }
}

/// Runs one fluid-particle component in its solver frame.
#[derive(Clone, Debug)]
pub struct ComponentRunner {
    /// Which component to solve.
    pub component: Component,
    /// Base configuration; `ε` and `μ` are replaced per run.
    pub config: FluidParticleConfig,
}

impl Runner for ComponentRunner {
    fn solve(&self, eps: f64, n: usize, m: usize) -> Result<GridFunction> {
        let cfg = self.config.clone().with_epsilon(eps);
        match self.component {
            Component::P => Ok(solve_component_p(&cfg, n, m)?.grid),
            Component::R => solve_component_r(&cfg, n, m),
            Component::S => solve_component_s(&cfg, n, m),
            Component::ILeft => {
                let r = solve_component_r(&cfg, n, m)?;
                Ok(solve_component_i_left(&cfg, n, m, &r)?.grid)
            }
            Component::IRight => {
                let s = solve_component_s(&cfg, n, m)?;
                Ok(solve_component_i_right(&cfg, n, m, &s)?.grid)
            }
        }
    }
}

/// Horizon used for the component tables.
pub const TABLE_HORIZON: f64 = 6.0;

/// Component studied by table `k` (1 to 5).
pub fn table_component(k: usize) -> Option<Component> {
    match k {
        1 => Some(Component::P),
        2 => Some(Component::R),
        3 => Some(Component::S),
        4 => Some(Component::ILeft),
        5 => Some(Component::IRight),
        _ => None,
    }
}

/// Configuration behind the component tables.
pub fn table_config() -> FluidParticleConfig {
    FluidParticleConfig {
        horizon: TABLE_HORIZON,
        extension: Extension::Natural,
        r_time_c2: 1.0,
        i_left_c2: 2.0,
        i_right_mult: 1.0,
        ..FluidParticleConfig::default()
    }
}

/// Runner for table `k` (1 to 5).
pub fn table_runner(k: usize) -> Result<ComponentRunner> {
    let component = table_component(k)
        .ok_or_else(|| Error::param(format!("no table {k}; tables are 1 to 5")))?;
    Ok(ComponentRunner {
        component,
        config: table_config(),
    })
}

/// Smooth instance on `[0,1]²`: `a = 1 + xt/10`, `b = f = 1`,
/// `φ = 1 + sin x`, `ψ = 1 − t + t²`. The data satisfy the corner conditions
/// through second order.
pub fn smooth_problem() -> Result<TransportProblem> {
    TransportProblem::builder(1.0, 1.0)
        .a(ScalarField2D::new(|x, t| 1.0 + x * t / 10.0))
        .b(ScalarField2D::constant(1.0))
        .f(ScalarField2D::constant(1.0))
        .phi(ScalarField1D::new(|x| 1.0 + x.sin()))
        .psi(ScalarField1D::new(|t| 1.0 - t + t * t))
        .build()
}

/// Outflow-layer instance on `[0,1]²`: `a = b = 1`, `f = e^{(x−1)/ε}/ε`, zero data.
pub fn layer_forcing_problem(eps: f64) -> Result<TransportProblem> {
    TransportProblem::builder(1.0, 1.0)
        .b(ScalarField2D::constant(1.0))
        .f(ScalarField2D::new(move |x, _| {
            ((x - 1.0) / eps).exp() / eps
        }))
        .epsilon(eps)
        .build()
}

/// Closed-form solution of [`layer_forcing_problem`]:
/// `(e^{(x−1)/ε} − e^{(x−1−s)/ε − s}) / (1 + ε)` with `s = min(x, t)`.
pub fn layer_forcing_exact(eps: f64, x: f64, t: f64) -> f64 {
    let s = x.min(t);
    (((x - 1.0) / eps).exp() - ((x - 1.0 - s) / eps - s).exp()) / (1.0 + eps)
}

/// Inflow-layer instance on `[0,1]²` for the flow-away scheme:
/// `a = 1 + x/2`, `b = 0`, `f = e^{−x/ε}/ε`, `ψ = 0`, with `φ` the steady state.
pub fn flow_away_problem(eps: f64) -> Result<TransportProblem> {
    TransportProblem::builder(1.0, 1.0)
        .a(ScalarField2D::new(|x, _| 1.0 + x / 2.0))
        .f(ScalarField2D::new(move |x, _| (-x / eps).exp() / eps))
        .epsilon(eps)
        .build()
}
