//! Finite-difference schemes: classical upwind, fitted outflow-layer,
//! characteristic-aligned pulse schemes and the flow-away scheme with a
//! discrete initial level.
//!
//! All schemes are implicit in time and explicit in the upwind direction, so
//! each time level is one forward substitution sweep.

mod pulse;

use std::fmt;
use std::str::FromStr;

pub use pulse::{
    solve_pulse_boundary, solve_pulse_general, solve_pulse_initial, AlignedSolution, Frame,
};

use crate::error::{Error, Result};
use crate::mesh::{Mesh1D, MeshKind, TensorMesh};
use crate::types::{GridFunction, TransportProblem};

/// Smallest admissible mesh interval.
pub const MIN_STEP: f64 = 1e-300;

/// Beyond this `ρ` the fitted factor is `ρ` to working precision.
pub const FITTED_RHO_CUTOFF: f64 = 700.0;

/// Available schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Upwind differences on any mesh covering the domain.
    ClassicalUpwind,
    /// Upwind with a fitted coefficient at the outflow transition; needs a
    /// right-refined space mesh.
    FittedOutflow,
    /// Aligned pulse scheme; needs an interior or left-refined `s` mesh.
    PulseInitial,
    /// Aligned pulse scheme without a sign condition on `a_x`.
    PulseInitialGeneral,
    /// Aligned scheme for a pulse entering through `x = 0`.
    PulseBoundary,
    /// Upwind with a discrete initial level; needs a left-refined space mesh.
    FlowAway,
}

impl SchemeKind {
    /// All kinds in declaration order.
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::ClassicalUpwind,
        SchemeKind::FittedOutflow,
        SchemeKind::PulseInitial,
        SchemeKind::PulseInitialGeneral,
        SchemeKind::PulseBoundary,
        SchemeKind::FlowAway,
    ];

    /// Kebab-case name.
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::ClassicalUpwind => "classical-upwind",
            SchemeKind::FittedOutflow => "fitted-outflow",
            SchemeKind::PulseInitial => "pulse-initial",
            SchemeKind::PulseInitialGeneral => "pulse-initial-general",
            SchemeKind::PulseBoundary => "pulse-boundary",
            SchemeKind::FlowAway => "flow-away",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown scheme '{s}'")))
    }
}

/// `ρ/(1 − e^{−ρ})`, evaluated without cancellation.
pub fn fitted_factor(rho: f64) -> f64 {
    if rho > FITTED_RHO_CUTOFF {
        rho
    } else if rho == 0.0 {
        1.0
    } else {
        rho / -(-rho).exp_m1()
    }
}

/// Fitting data at the outflow transition node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FittedParams {
    /// `H/ε` with `H` the coarse step.
    pub rho: f64,
    /// `ρ/(1 − e^{−ρ})`.
    pub factor: f64,
}

impl FittedParams {
    /// Parameters for a given `ρ`.
    pub fn new(rho: f64) -> Self {
        Self {
            rho,
            factor: fitted_factor(rho),
        }
    }
}

pub(crate) fn check_axis(m: &Mesh1D, lo: f64, hi: f64, what: &str) -> Result<()> {
    let tol = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
    if (m.lo() - lo).abs() > tol || (m.hi() - hi).abs() > tol {
        return Err(Error::mesh(format!(
            "{what} mesh spans [{}, {}], expected [{lo}, {hi}]",
            m.lo(),
            m.hi()
        )));
    }
    if m.min_step() < MIN_STEP {
        return Err(Error::mesh(format!(
            "{what} mesh has an interval below {MIN_STEP}"
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn finite(what: &'static str, v: f64, x: f64, t: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation { what, x, t })
    }
}

/// Time-marches the upwind scheme from a given initial level. The convection
/// coefficient at node `fit.0` is multiplied by `fit.1`.
fn march(
    p: &TransportProblem,
    mesh: &TensorMesh,
    initial: Vec<f64>,
    fit: Option<(usize, f64)>,
) -> Result<GridFunction> {
    let xs = mesh.space.nodes();
    let ts = mesh.time.nodes();
    let nx = xs.len();
    let mut values = initial;
    values.reserve(nx * (ts.len() - 1));
    let (a, b, f, psi) = (p.a(), p.b(), p.f(), &p.data().psi);
    for j in 1..ts.len() {
        let t = ts[j];
        let rk = 1.0 / (t - ts[j - 1]);
        let base = (j - 1) * nx;
        values.push(finite("psi", psi.eval(t), 0.0, t)?);
        for i in 1..nx {
            let x = xs[i];
            let mut av = finite("a", a.eval(x, t), x, t)?;
            if let Some((k, factor)) = fit {
                if k == i {
                    av *= factor;
                }
            }
            let bv = finite("b", b.eval(x, t), x, t)?;
            let fv = finite("f", f.eval(x, t), x, t)?;
            let rh = 1.0 / (x - xs[i - 1]);
            let west = values[base + nx + i - 1];
            let old = values[base + i];
            let ah = av * rh;
            values.push(old + (ah * (west - old) + fv - bv * old) / (rk + ah + bv));
        }
    }
    GridFunction::new(mesh.clone(), values)
}

fn check_domain(p: &TransportProblem, mesh: &TensorMesh) -> Result<()> {
    check_axis(&mesh.space, 0.0, p.length(), "space")?;
    check_axis(&mesh.time, 0.0, p.horizon(), "time")
}

fn initial_level(p: &TransportProblem, mesh: &TensorMesh) -> Result<Vec<f64>> {
    let phi = &p.data().phi;
    mesh.space
        .nodes()
        .iter()
        .map(|&x| finite("phi", phi.eval(x), x, 0.0))
        .collect()
}

/// Classical upwind scheme
/// `(D⁻_t + a D⁻_x + b) U = f` with `U(0,t_j) = ψ(t_j)`, `U(x_i,0) = φ(x_i)`.
pub fn solve_upwind(p: &TransportProblem, mesh: &TensorMesh) -> Result<GridFunction> {
    check_domain(p, mesh)?;
    march(p, mesh, initial_level(p, mesh)?, None)
}

/// Upwind scheme with the fitted convection coefficient `a·ρ/(1 − e^{−ρ})`,
/// `ρ = H/ε`, at the outflow transition node `x = L − σ`.
pub fn solve_fitted_outflow(p: &TransportProblem, mesh: &TensorMesh) -> Result<GridFunction> {
    check_domain(p, mesh)?;
    if mesh.space.kind() != MeshKind::ShishkinRight {
        return Err(Error::scheme(format!(
            "fitted-outflow needs a right-refined space mesh, got {:?}",
            mesh.space.kind()
        )));
    }
    if !matches!(mesh.time.kind(), MeshKind::Uniform | MeshKind::ShishkinTime) {
        return Err(Error::scheme(format!(
            "fitted-outflow needs a uniform or time-refined time mesh, got {:?}",
            mesh.time.kind()
        )));
    }
    let &(k, _) = mesh
        .space
        .transitions()
        .first()
        .ok_or_else(|| Error::scheme("fitted-outflow mesh has no transition node"))?;
    let params = FittedParams::new(mesh.space.step(1) / p.epsilon());
    march(p, mesh, initial_level(p, mesh)?, Some((k, params.factor)))
}

/// Flow-away scheme: the initial level is the discrete steady state
/// `(a D⁻_x + b) W(x_i, 0) = f(x_i, 0)`, `W(0, 0) = ψ(0)`; later levels use
/// the upwind sweep.
pub fn solve_flow_away(p: &TransportProblem, mesh: &TensorMesh) -> Result<GridFunction> {
    check_domain(p, mesh)?;
    if !matches!(
        mesh.space.kind(),
        MeshKind::ShishkinLeft | MeshKind::Uniform
    ) {
        return Err(Error::scheme(format!(
            "flow-away needs a left-refined space mesh, got {:?}",
            mesh.space.kind()
        )));
    }
    let xs = mesh.space.nodes();
    let mut w = Vec::with_capacity(xs.len() * mesh.time.len());
    w.push(finite("psi", p.data().psi.eval(0.0), 0.0, 0.0)?);
    for i in 1..xs.len() {
        let x = xs[i];
        let av = finite("a", p.a().eval(x, 0.0), x, 0.0)?;
        let bv = finite("b", p.b().eval(x, 0.0), x, 0.0)?;
        let fv = finite("f", p.f().eval(x, 0.0), x, 0.0)?;
        let rh = 1.0 / (x - xs[i - 1]);
        w.push((fv + av * w[i - 1] * rh) / (av * rh + bv));
    }
    march(p, mesh, w, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::exact_solution;
    use crate::mesh::{
        build_shishkin_inflow, build_shishkin_outflow, build_shishkin_time, build_uniform,
    };
    use crate::types::{ScalarField1D, ScalarField2D};

    fn uniform(l: f64, t: f64, n: usize, m: usize) -> TensorMesh {
        TensorMesh::new(
            build_uniform(0.0, l, n).unwrap(),
            build_uniform(0.0, t, m).unwrap(),
        )
    }

    #[test]
    fn scheme_names_round_trip() {
        for k in SchemeKind::ALL {
            assert_eq!(k.as_str().parse::<SchemeKind>().unwrap(), k);
        }
        assert!("nope".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn fitted_factor_values() {
        assert!((fitted_factor(2.0) - 2.313035).abs() < 1e-6);
        assert!(fitted_factor(1e-8) - 1.0 <= 1e-7);
        assert_eq!(fitted_factor(800.0), 800.0);
        assert_eq!(fitted_factor(0.0), 1.0);
        let mut prev = 1.0;
        for k in 1..2000 {
            let rho = k as f64 * 0.01;
            let f = fitted_factor(rho);
            assert!(f > prev);
            if rho <= 1.0 {
                assert!((f - 1.0 - rho / 2.0).abs() <= rho * rho / 12.0 + 1e-15);
            }
            prev = f;
        }
        assert!((fitted_factor(600.0) / 600.0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn steady_state_is_preserved() {
        let p = TransportProblem::builder(1.0, 1.0)
            .b(ScalarField2D::constant(1.0))
            .f(ScalarField2D::constant(1.0))
            .phi(ScalarField1D::constant(1.0))
            .psi(ScalarField1D::constant(1.0))
            .build()
            .unwrap();
        let u = solve_upwind(&p, &uniform(1.0, 1.0, 16, 16)).unwrap();
        assert!(u.values().iter().all(|&v| (v - 1.0).abs() <= 1e-15));
    }

    #[test]
    fn affine_solution_is_exact() {
        let p = TransportProblem::builder(1.0, 1.0)
            .phi(ScalarField1D::new(|x| x))
            .psi(ScalarField1D::new(|t| -t))
            .build()
            .unwrap();
        let mesh = TensorMesh::new(
            build_shishkin_outflow(1.0, 1e-3, 16, 1.0).unwrap(),
            build_shishkin_time(1.0, 1e-2, 8, 2.0).unwrap(),
        );
        let u = solve_upwind(&p, &mesh).unwrap();
        for (j, &t) in mesh.time.nodes().iter().enumerate() {
            for (i, &x) in mesh.space.nodes().iter().enumerate() {
                assert!((u.get(i, j) - (x - t)).abs() <= 4.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn upwind_converges_on_smooth_problem() {
        let p = TransportProblem::builder(1.0, 1.0)
            .b(ScalarField2D::constant(1.0))
            .phi(ScalarField1D::new(|x| x.sin()))
            .psi(ScalarField1D::new(|t| -(t.sin()) * (-t).exp()))
            .build()
            .unwrap();
        let err = |n: usize| {
            let u = solve_upwind(&p, &uniform(1.0, 1.0, n, n)).unwrap();
            let mut e: f64 = 0.0;
            for j in (0..=n).step_by(n / 16) {
                for i in (0..=n).step_by(n / 16) {
                    let (x, t) = (u.mesh().space.nodes()[i], u.mesh().time.nodes()[j]);
                    e = e.max((u.get(i, j) - exact_solution(&p, x, t, 64).unwrap()).abs());
                }
            }
            e
        };
        let (e1, e2, e3) = (err(64), err(128), err(256));
        let order = (e2 / e3).log2();
        assert!(order >= 0.9, "order {order} {e1} {e2} {e3}");
    }

    #[test]
    fn fitted_reduces_to_upwind_as_rho_vanishes() {
        let p = TransportProblem::builder(1.0, 1.0)
            .f(ScalarField2D::new(|x, t| x + t))
            .build()
            .unwrap();
        let diff = |n: usize| {
            let mesh = TensorMesh::new(
                build_shishkin_outflow(1.0, 1.0, n, 1.0).unwrap(),
                build_uniform(0.0, 1.0, 8).unwrap(),
            );
            let a = solve_fitted_outflow(&p, &mesh).unwrap();
            let b = solve_upwind(&p, &mesh).unwrap();
            a.values()
                .iter()
                .zip(b.values())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        };
        let (d1, d2) = (diff(64), diff(4096));
        assert!(d2 < d1 / 32.0, "{d1} {d2}");
        assert!(d2 < 1e-4);
    }

    #[test]
    fn fitted_requires_right_refined_mesh() {
        let p = TransportProblem::builder(1.0, 1.0).build().unwrap();
        assert!(matches!(
            solve_fitted_outflow(&p, &uniform(1.0, 1.0, 8, 8)),
            Err(Error::Scheme(_))
        ));
    }

    #[test]
    fn flow_away_initial_level_is_a_running_sum() {
        let eps = 0.05;
        let p = TransportProblem::builder(1.0, 1.0)
            .f(ScalarField2D::new(move |x, _| x * x * (-x / eps).exp()))
            .build()
            .unwrap();
        let mesh = TensorMesh::new(
            build_shishkin_inflow(1.0, eps, 16, 1.0).unwrap(),
            build_uniform(0.0, 1.0, 4).unwrap(),
        );
        let w = solve_flow_away(&p, &mesh).unwrap();
        let xs = mesh.space.nodes();
        let mut sum = 0.0;
        for i in 1..xs.len() {
            sum += (xs[i] - xs[i - 1]) * xs[i] * xs[i] * (-xs[i] / eps).exp();
            assert!((w.get(i, 0) - sum).abs() <= 1e-15);
        }
        for j in 1..=4 {
            for i in 0..xs.len() {
                assert!((w.get(i, j) - w.get(i, 0)).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn zero_forcing_flow_away_is_zero() {
        let p = TransportProblem::builder(1.0, 1.0).build().unwrap();
        let mesh = TensorMesh::new(
            build_shishkin_inflow(1.0, 0.01, 16, 1.0).unwrap(),
            build_uniform(0.0, 1.0, 4).unwrap(),
        );
        assert_eq!(solve_flow_away(&p, &mesh).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn mesh_must_cover_domain() {
        let p = TransportProblem::builder(2.0, 1.0).build().unwrap();
        assert!(matches!(
            solve_upwind(&p, &uniform(1.0, 1.0, 4, 4)),
            Err(Error::Mesh(_))
        ));
    }

    #[test]
    fn non_finite_forcing_is_reported() {
        let p = TransportProblem::builder(1.0, 1.0)
            .f(ScalarField2D::new(|x, _| 1.0 / (x - 0.5)))
            .build()
            .unwrap();
        assert!(matches!(
            solve_upwind(&p, &uniform(1.0, 1.0, 4, 4)),
            Err(Error::Evaluation { what: "f", .. })
        ));
    }
}
