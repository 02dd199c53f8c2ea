//! Global interpolants and the fluid-particle temperature pipeline.
//!
//! A [`GlobalField`] is a constant background plus a list of [`Piece`]s, each
//! a bilinear interpolant living on a rectangle or on a strip bounded by a
//! characteristic. Pieces vanish outside their support, so the field is
//! their sum.
//!
//! [`solve_fluid_particle`] splits the temperature `T = T₀ + P + R` with
//! `R = S + I` to the right of `x = d₁`, solves each component with the
//! scheme suited to its layer, and patches the results.

use crate::characteristics::CharCurve;
use crate::error::{Error, Result};
use crate::mesh::{
    build_shishkin_inflow, build_shishkin_interior, build_shishkin_outflow, build_shishkin_time,
    build_uniform, TensorMesh,
};
use crate::solvers::{
    solve_fitted_outflow, solve_flow_away, solve_pulse_boundary, solve_pulse_initial,
    AlignedSolution, Frame,
};
use crate::types::{
    BoundaryData, Extension, GridFunction, ScalarField1D, ScalarField2D, TransportProblem,
};

/// Piecewise-bilinear interpolant of a grid function.
#[derive(Clone, Debug)]
pub struct Interpolant {
    grid: GridFunction,
}

impl Interpolant {
    /// Wraps a grid function.
    pub fn new(grid: GridFunction) -> Self {
        Self { grid }
    }

    /// The interpolated grid function.
    pub fn grid(&self) -> &GridFunction {
        &self.grid
    }

    /// True when `(u, v)` lies in the mesh rectangle.
    pub fn contains(&self, u: f64, v: f64) -> bool {
        let m = self.grid.mesh();
        u >= m.space.lo() && u <= m.space.hi() && v >= m.time.lo() && v <= m.time.hi()
    }

    /// Value at `(u, v)`; exact at nodes and bilinear on every cell.
    pub fn eval(&self, u: f64, v: f64) -> Result<f64> {
        let m = self.grid.mesh();
        let (Some(i), Some(j)) = (m.space.locate(u), m.time.locate(v)) else {
            return Err(Error::Extrapolation { x: u, t: v });
        };
        let (xs, ts) = (m.space.nodes(), m.time.nodes());
        let p = (u - xs[i]) / (xs[i + 1] - xs[i]);
        let q = (v - ts[j]) / (ts[j + 1] - ts[j]);
        let g = &self.grid;
        let lower = g.get(i, j) + p * (g.get(i + 1, j) - g.get(i, j));
        let upper = g.get(i, j + 1) + p * (g.get(i + 1, j + 1) - g.get(i, j + 1));
        Ok(lower + q * (upper - lower))
    }
}

/// Standard tensor-product bilinear interpolant of `grid`.
pub fn bilinear(grid: GridFunction) -> Interpolant {
    Interpolant::new(grid)
}

/// Where a [`Piece`] lives and how physical points map to its grid.
#[derive(Clone, Debug)]
pub enum Support {
    /// `x0 ≤ x < x1` (or `≤ x1` when `closed`), grid coordinates `(x − x0, t)`.
    Rect {
        /// Left edge, also the grid origin.
        x0: f64,
        /// Right edge.
        x1: f64,
        /// Whether the right edge belongs to the piece.
        closed: bool,
    },
    /// Grid coordinates `(x − x0 − g(t), t)` along an initial characteristic.
    InitialStrip {
        /// Grid origin in `x`.
        x0: f64,
        /// Alignment curve in coordinates relative to `x0`.
        curve: CharCurve,
    },
    /// Grid coordinates `(x − x0, t − θ(x − x0))` along a boundary characteristic.
    BoundaryStrip {
        /// Grid origin in `x`.
        x0: f64,
        /// Alignment curve in coordinates relative to `x0`.
        curve: CharCurve,
    },
}

/// One zero-extended component of a [`GlobalField`].
#[derive(Clone, Debug)]
pub struct Piece {
    /// Component name.
    pub name: &'static str,
    /// Support and coordinate map.
    pub support: Support,
    /// Interpolant on the computational grid.
    pub interp: Interpolant,
}

impl Piece {
    /// A piece on the rectangle `[x0, x0 + width] × [0, T]`.
    pub fn rect(name: &'static str, grid: GridFunction, x0: f64, closed: bool) -> Self {
        let x1 = x0 + grid.mesh().space.hi();
        Self {
            name,
            support: Support::Rect { x0, x1, closed },
            interp: Interpolant::new(grid),
        }
    }

    /// A piece on the strip covered by an aligned solution, offset by `x0`.
    pub fn strip(name: &'static str, sol: AlignedSolution, x0: f64) -> Self {
        let support = match sol.frame {
            Frame::Initial { .. } => Support::InitialStrip {
                x0,
                curve: sol.curve,
            },
            Frame::Boundary { .. } => Support::BoundaryStrip {
                x0,
                curve: sol.curve,
            },
        };
        Self {
            name,
            support,
            interp: Interpolant::new(sol.grid),
        }
    }

    /// Grid coordinates of a physical point, or `None` outside the support.
    pub fn to_grid(&self, x: f64, t: f64) -> Option<(f64, f64)> {
        let (u, v) = match &self.support {
            Support::Rect { x0, x1, closed } => {
                if x < *x0 || x > *x1 || (x == *x1 && !closed) {
                    return None;
                }
                (x - x0, t)
            }
            Support::InitialStrip { x0, curve } => (x - x0 - curve.x_at(t), t),
            Support::BoundaryStrip { x0, curve } => (x - x0, t - curve.t_at(x - x0)),
        };
        self.interp.contains(u, v).then_some((u, v))
    }

    /// Value at a physical point, zero outside the support.
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self.to_grid(x, t) {
            Some((u, v)) => self.interp.eval(u, v).unwrap_or(0.0),
            None => 0.0,
        }
    }
}

/// A field on `[0, L] × [0, T]` assembled from zero-extended pieces.
///
/// Evaluation adds the pieces in list order to the background. Supports of
/// the fluid-particle pieces are disjoint, so the order does not matter there.
#[derive(Clone, Debug)]
pub struct GlobalField {
    length: f64,
    horizon: f64,
    background: f64,
    pieces: Vec<Piece>,
}

impl GlobalField {
    /// An empty field equal to `background` on `[0, length] × [0, horizon]`.
    pub fn new(length: f64, horizon: f64, background: f64) -> Self {
        Self {
            length,
            horizon,
            background,
            pieces: Vec::new(),
        }
    }

    /// Appends a piece.
    pub fn push(&mut self, piece: Piece) {
        self.pieces.push(piece);
    }

    /// The pieces in evaluation order.
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// The piece called `name`.
    pub fn piece(&self, name: &str) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.name == name)
    }

    /// Constant added everywhere.
    pub fn background(&self) -> f64 {
        self.background
    }

    /// The same field with a different background.
    pub fn with_background(&self, background: f64) -> Self {
        Self {
            background,
            ..self.clone()
        }
    }

    /// Domain extent `(L, T)`.
    pub fn extent(&self) -> (f64, f64) {
        (self.length, self.horizon)
    }

    /// Field value; queries outside the domain are an error.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let tol = 1e-12;
        if !(x >= -tol * self.length
            && x <= self.length * (1.0 + tol)
            && t >= -tol * self.horizon
            && t <= self.horizon * (1.0 + tol))
        {
            return Err(Error::Extrapolation { x, t });
        }
        let (x, t) = (x.clamp(0.0, self.length), t.clamp(0.0, self.horizon));
        let v = self.background + self.pieces.iter().map(|p| p.eval(x, t)).sum::<f64>();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                what: "field",
                x,
                t,
            })
        }
    }

    /// Values on a `(nx+1) × (nt+1)` uniform lattice, level-major.
    pub fn sample(&self, nx: usize, nt: usize) -> Result<GridFunction> {
        let mesh = TensorMesh::new(
            build_uniform(0.0, self.length, nx)?,
            build_uniform(0.0, self.horizon, nt)?,
        );
        let mut values = Vec::with_capacity((nx + 1) * (nt + 1));
        for &t in mesh.time.nodes() {
            for &x in mesh.space.nodes() {
                values.push(self.eval(x, t)?);
            }
        }
        GridFunction::new(mesh, values)
    }
}

/// Linear interpolation of the table `(xs, ys)`, constant beyond its ends.
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + w * (ys[k + 1] - ys[k])
}

/// `sech u`, evaluated without overflow.
pub fn sech(u: f64) -> f64 {
    let e = (-u.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Parameters of the fluid-temperature problem
/// `T_t + ω₀ T_x = β z_x`, `T(0,t) = T₀`, `T(x,0) = T₀ + A₀ e^{−(x−d₀)²/μ}`,
/// `z = A₁ tanh((x − d₁)/ε)`.
#[derive(Clone, Debug)]
pub struct FluidParticleConfig {
    /// Duct length `L`.
    pub length: f64,
    /// Final time `T_f`.
    pub horizon: f64,
    /// Heat-exchange coefficient `β`.
    pub beta: f64,
    /// Initial pulse amplitude `A₀`.
    pub a0: f64,
    /// Particle layer amplitude `A₁`.
    pub a1: f64,
    /// Pulse width parameter `μ`.
    pub mu: f64,
    /// Ambient temperature `T₀`.
    pub t0: f64,
    /// Initial pulse centre `d₀`.
    pub d0: f64,
    /// Particle layer location `d₁`.
    pub d1: f64,
    /// Particle layer width `ε`.
    pub epsilon: f64,
    /// Fluid velocity `ω₀(x, t)`.
    pub omega0: ScalarField2D,
    /// Coefficient extension beyond the domain.
    pub extension: Extension,
    /// `C₂` of the time mesh for `R`.
    pub r_time_c2: f64,
    /// `C₂` of the aligned time mesh for `I` left of the curve from `(d₁, 0)`.
    pub i_left_c2: f64,
    /// Fine-band multiplier of the aligned mesh for `I` right of that curve.
    pub i_right_mult: f64,
}

impl Default for FluidParticleConfig {
    fn default() -> Self {
        Self {
            length: 10.0,
            horizon: 5.0,
            beta: 1.0,
            a0: 50.0,
            a1: 10.0,
            mu: 0.25,
            t0: 300.0,
            d0: 2.0,
            d1: 5.0,
            epsilon: 1.0,
            omega0: ScalarField2D::new(|x, _| 2.0 - x / 10.0),
            extension: Extension::Natural,
            r_time_c2: 2.0,
            i_left_c2: 2.0,
            i_right_mult: 2.0,
        }
    }
}

impl FluidParticleConfig {
    /// Sets `ε` and `μ = ε/4`.
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self.mu = epsilon / 4.0;
        self
    }

    /// Replaces `ω₀` by a constant.
    pub fn with_constant_speed(mut self, omega: f64) -> Self {
        self.omega0 = ScalarField2D::constant(omega);
        self
    }

    /// Checks `0 < d₀ < d₁ < L`, `μ > 0`, `ε ∈ (0, 1]` and positive mesh knobs.
    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::param("length and horizon must be positive"));
        }
        if !(0.0 < self.d0 && self.d0 < self.d1 && self.d1 < self.length) {
            return Err(Error::param(format!(
                "need 0 < d0 < d1 < L, got d0 = {}, d1 = {}, L = {}",
                self.d0, self.d1, self.length
            )));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::param(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::param(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        for (name, v) in [
            ("r_time_c2", self.r_time_c2),
            ("i_left_c2", self.i_left_c2),
            ("i_right_mult", self.i_right_mult),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Initial temperature `φ(x)`.
    pub fn phi(&self, x: f64) -> f64 {
        self.t0 + self.pulse(x)
    }

    fn pulse(&self, x: f64) -> f64 {
        let r = x - self.d0;
        self.a0 * (-r * r / self.mu).exp()
    }

    /// Particle source gradient `z_x = (A₁/ε) sech²((x − d₁)/ε)`.
    pub fn z_x(&self, x: f64) -> f64 {
        let s = sech((x - self.d1) / self.epsilon);
        self.a1 / self.epsilon * s * s
    }

    /// The value of `ω₀` when it is constant on a sampling lattice.
    pub fn constant_speed(&self) -> Option<f64> {
        let c = self.omega0.eval(0.0, 0.0);
        let n = 16;
        for i in 0..=n {
            for j in 0..=n {
                let x = self.length * i as f64 / n as f64;
                let t = self.horizon * j as f64 / n as f64;
                if self.omega0.eval(x, t) != c {
                    return None;
                }
            }
        }
        Some(c)
    }

    /// Closed-form temperature for constant `ω₀`, `None` otherwise.
    pub fn exact_constant_speed(&self, x: f64, t: f64) -> Option<f64> {
        let w = self.constant_speed()?;
        let k = self.beta * self.a1 / w;
        let e = self.epsilon;
        let front = ((x - self.d1) / e).tanh();
        Some(if x >= w * t {
            self.phi(x - w * t) + k * (front - ((x - w * t - self.d1) / e).tanh())
        } else {
            self.t0 + k * (front + (self.d1 / e).tanh())
        })
    }

    fn problem(&self) -> Result<TransportProblem> {
        let this = self.clone();
        TransportProblem::builder(self.length, self.horizon)
            .a(self.omega0.clone())
            .f(ScalarField2D::new(move |x, _| this.beta * this.z_x(x)))
            .epsilon(self.epsilon)
            .extension(self.extension)
            .build()
    }
}

/// The five components of the fluid-particle pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Component {
    /// Transported initial pulse, aligned with the curve from `(d₀, 0)`.
    P,
    /// Particle response on `[0, d₁]`, fitted outflow scheme.
    R,
    /// Regular part on `[d₁, L]`, flow-away scheme.
    S,
    /// Correction left of the curve from `(d₁, 0)`, boundary-pulse scheme.
    ILeft,
    /// Correction right of that curve, initial-pulse scheme.
    IRight,
}

impl Component {
    /// All components in pipeline order.
    pub const ALL: [Component; 5] = [
        Component::P,
        Component::R,
        Component::S,
        Component::ILeft,
        Component::IRight,
    ];

    /// Short name used in errors and output.
    pub fn name(self) -> &'static str {
        match self {
            Component::P => "P",
            Component::R => "R",
            Component::S => "S",
            Component::ILeft => "I_L",
            Component::IRight => "I_R",
        }
    }
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n < 4 || !n.is_multiple_of(4) || m < 4 || !m.is_multiple_of(4) {
        return Err(Error::param(format!(
            "N and M must be positive multiples of 4, got N = {n}, M = {m}"
        )));
    }
    Ok(())
}

/// Pulse component `P` in `(s, t)` with `s = x − g(t; d₀, 0)`.
pub fn solve_component_p(cfg: &FluidParticleConfig, n: usize, m: usize) -> Result<AlignedSolution> {
    let run = || {
        cfg.validate()?;
        check_sizes(n, m)?;
        let this = cfg.clone();
        let p = cfg
            .problem()?
            .with_forcing(ScalarField2D::constant(0.0))
            .with_data(BoundaryData {
                psi: ScalarField1D::constant(0.0),
                phi: ScalarField1D::new(move |x| this.pulse(x)),
            });
        let ms = build_shishkin_interior(cfg.d0, cfg.length, cfg.mu.sqrt(), n)?;
        let mt = build_uniform(0.0, cfg.horizon, m)?;
        solve_pulse_initial(&p, cfg.d0, 3, &ms, &mt)
    };
    run().map_err(|e| e.in_component(Component::P.name()))
}

/// Component `R` on `[0, d₁] × [0, T_f]`.
pub fn solve_component_r(cfg: &FluidParticleConfig, n: usize, m: usize) -> Result<GridFunction> {
    let run = || {
        cfg.validate()?;
        check_sizes(n, m)?;
        let p = cfg.problem()?.restrict(0.0, cfg.d1)?;
        let mesh = TensorMesh::new(
            build_shishkin_outflow(cfg.d1, cfg.epsilon, n, 1.0)?,
            build_shishkin_time(cfg.horizon, cfg.epsilon, m, cfg.r_time_c2)?,
        );
        solve_fitted_outflow(&p, &mesh)
    };
    run().map_err(|e| e.in_component(Component::R.name()))
}

/// Component `S` on `[d₁, L] × [0, T_f]`, in coordinates relative to `d₁`.
pub fn solve_component_s(cfg: &FluidParticleConfig, n: usize, m: usize) -> Result<GridFunction> {
    let run = || {
        cfg.validate()?;
        check_sizes(n, m)?;
        let p = cfg.problem()?.restrict(cfg.d1, cfg.length)?;
        let mesh = TensorMesh::new(
            build_shishkin_inflow(cfg.length - cfg.d1, cfg.epsilon, n, 1.0)?,
            build_uniform(0.0, cfg.horizon, m)?,
        );
        solve_flow_away(&p, &mesh)
    };
    run().map_err(|e| e.in_component(Component::S.name()))
}

/// Component `I` right of the curve from `(d₁, 0)`, with initial data `−S(x, 0)`
/// taken from the first level of `s_grid`.
pub fn solve_component_i_right(
    cfg: &FluidParticleConfig,
    n: usize,
    m: usize,
    s_grid: &GridFunction,
) -> Result<AlignedSolution> {
    let run = || {
        cfg.validate()?;
        check_sizes(n, m)?;
        let xs = s_grid.mesh().space.nodes().to_vec();
        let ys: Vec<f64> = s_grid.level(0).iter().map(|v| -v).collect();
        let p = cfg
            .problem()?
            .restrict(cfg.d1, cfg.length)?
            .with_forcing(ScalarField2D::constant(0.0))
            .with_data(BoundaryData {
                psi: ScalarField1D::constant(0.0),
                phi: ScalarField1D::new(move |x| interp_linear(&xs, &ys, x)),
            });
        let ms = build_shishkin_inflow(cfg.length - cfg.d1, cfg.epsilon, n, cfg.i_right_mult)?;
        let mt = build_uniform(0.0, cfg.horizon, m)?;
        let ell = ((cfg.i_right_mult.round() as u32).saturating_sub(1)).max(1);
        solve_pulse_initial(&p, 0.0, ell, &ms, &mt)
    };
    run().map_err(|e| e.in_component(Component::IRight.name()))
}

/// Component `I` left of the curve from `(d₁, 0)`, with inflow data
/// `Ψ(t) = R(d₁, t)` interpolated linearly from the last column of `r_grid`.
pub fn solve_component_i_left(
    cfg: &FluidParticleConfig,
    n: usize,
    m: usize,
    r_grid: &GridFunction,
) -> Result<AlignedSolution> {
    let run = || {
        cfg.validate()?;
        check_sizes(n, m)?;
        let ts = r_grid.mesh().time.nodes().to_vec();
        let trace = r_grid.column(r_grid.mesh().space.len() - 1);
        let p = cfg
            .problem()?
            .restrict(cfg.d1, cfg.length)?
            .with_forcing(ScalarField2D::constant(0.0))
            .with_data(BoundaryData {
                psi: ScalarField1D::new(move |t| interp_linear(&ts, &trace, t)),
                phi: ScalarField1D::constant(0.0),
            });
        let mx = build_uniform(0.0, cfg.length - cfg.d1, n)?;
        let mt = build_shishkin_time(cfg.horizon, cfg.epsilon, m, cfg.i_left_c2)?;
        solve_pulse_boundary(&p, 0.0, &mx, &mt)
    };
    run().map_err(|e| e.in_component(Component::ILeft.name()))
}

/// Every component of one pipeline run together with the assembled field.
#[derive(Clone, Debug)]
pub struct FluidParticleSolution {
    /// Pulse component.
    pub p: AlignedSolution,
    /// Component on `[0, d₁]`.
    pub r: GridFunction,
    /// Regular component on `[d₁, L]`.
    pub s: GridFunction,
    /// Correction left of the curve from `(d₁, 0)`.
    pub i_left: AlignedSolution,
    /// Correction right of that curve.
    pub i_right: AlignedSolution,
    /// `T₀ + P + R` with `R = S + I` on `[d₁, L]`.
    pub field: GlobalField,
}

/// Runs the full pipeline on `N × M` meshes.
pub fn solve_fluid_particle(
    cfg: &FluidParticleConfig,
    n: usize,
    m: usize,
) -> Result<FluidParticleSolution> {
    cfg.validate()?;
    check_sizes(n, m)?;
    let ((p, r), s) = rayon::join(
        || {
            rayon::join(
                || solve_component_p(cfg, n, m),
                || solve_component_r(cfg, n, m),
            )
        },
        || solve_component_s(cfg, n, m),
    );
    let (p, r, s) = (p?, r?, s?);
    let (i_left, i_right) = rayon::join(
        || solve_component_i_left(cfg, n, m, &r),
        || solve_component_i_right(cfg, n, m, &s),
    );
    let (i_left, i_right) = (i_left?, i_right?);
    let mut field = GlobalField::new(cfg.length, cfg.horizon, cfg.t0);
    field.push(Piece::strip(Component::P.name(), p.clone(), 0.0));
    field.push(Piece::rect(Component::R.name(), r.clone(), 0.0, false));
    field.push(Piece::rect(Component::S.name(), s.clone(), cfg.d1, true));
    field.push(Piece::strip(
        Component::ILeft.name(),
        i_left.clone(),
        cfg.d1,
    ));
    field.push(Piece::strip(
        Component::IRight.name(),
        i_right.clone(),
        cfg.d1,
    ));
    Ok(FluidParticleSolution {
        p,
        r,
        s,
        i_left,
        i_right,
        field,
    })
}
