//! Instances and checks shared by the property and acceptance suites.

#![allow(dead_code)]

use layerwind::characteristics::trace;
use layerwind::experiments::{build_table, eps_powers, solve_scheme, table_runner, MeshOptions};
use layerwind::mesh::{build_shishkin_inflow, build_uniform, TensorMesh};
use layerwind::solvers::{fitted_factor, solve_pulse_initial, solve_upwind};
use layerwind::{ScalarField1D, ScalarField2D, SchemeKind, TransportProblem};
use proptest::prelude::*;

/// Random instance with non-negative data and forcing.
#[derive(Clone, Debug)]
pub struct Instance {
    pub a: [f64; 3],
    pub b: [f64; 2],
    pub f: [f64; 2],
    pub c: [f64; 3],
    pub eps: f64,
    pub n: usize,
    pub m: usize,
    pub d: f64,
}

impl Instance {
    /// `a = a₀ + a₁x + a₂t`, `b = b₀ + b₁xt`, `f = f₀ + f₁e^{(x−1)/ε}/ε`,
    /// `φ = c₀ + c₁x²`, `ψ = c₀ + c₂t` on `[0,1]²`.
    pub fn problem(&self) -> TransportProblem {
        let (a, b, f, c, eps) = (self.a, self.b, self.f, self.c, self.eps);
        TransportProblem::builder(1.0, 1.0)
            .a(ScalarField2D::new(move |x, t| a[0] + a[1] * x + a[2] * t))
            .b(ScalarField2D::new(move |x, t| b[0] + b[1] * x * t))
            .f(ScalarField2D::new(move |x, _| {
                f[0] + f[1] * ((x - 1.0) / eps).exp() / eps
            }))
            .phi(ScalarField1D::new(move |x| c[0] + c[1] * x * x))
            .psi(ScalarField1D::new(move |t| c[0] + c[2] * t))
            .epsilon(eps)
            .alpha(a[0])
            .build()
            .expect("generated instance is valid")
    }
}

pub fn instance() -> impl Strategy<Value = Instance> {
    (
        (0.5..2.0f64, 0.0..1.0f64, 0.0..1.0f64),
        (0.0..2.0f64, 0.0..1.0f64),
        (0.0..1.0f64, 0.0..1.0f64),
        (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64),
        0u32..=24,
        prop::sample::select(vec![8usize, 16, 32]),
        prop::sample::select(vec![8usize, 16, 32]),
        0.2..0.8f64,
    )
        .prop_map(|(a, b, f, c, k, n, m, d)| Instance {
            a: [a.0, a.1, a.2],
            b: [b.0, b.1],
            f: [f.0, f.1],
            c: [c.0, c.1, c.2],
            eps: 2f64.powi(-(k as i32)),
            n,
            m,
            d,
        })
}

/// Smallest value produced by any scheme on `inst`, with pulse schemes run
/// both at an endpoint and at an interior location.
pub fn comparison_min(inst: &Instance) -> Result<f64, String> {
    let p = inst.problem();
    let mut lo = f64::INFINITY;
    for kind in SchemeKind::ALL {
        for d in [0.0, inst.d] {
            let opts = MeshOptions {
                d,
                ..MeshOptions::default()
            };
            let g = solve_scheme(&p, kind, inst.n, inst.m, &opts)
                .map_err(|e| format!("{kind:?} d={d}: {e}"))?;
            lo = lo.min(g.min());
        }
    }
    Ok(lo)
}

/// Largest deviation from `value` when every scheme is fed constant data,
/// zero reaction and zero forcing.
pub fn constant_deviation(a: [f64; 3], eps: f64, value: f64, n: usize) -> f64 {
    let p = TransportProblem::builder(1.0, 1.0)
        .a(ScalarField2D::new(move |x, t| a[0] + a[1] * x + a[2] * t))
        .phi(ScalarField1D::constant(value))
        .psi(ScalarField1D::constant(value))
        .epsilon(eps)
        .alpha(a[0])
        .build()
        .unwrap();
    let mut dev: f64 = 0.0;
    for kind in SchemeKind::ALL {
        for d in [0.0, 0.5] {
            let opts = MeshOptions {
                d,
                ..MeshOptions::default()
            };
            let g = solve_scheme(&p, kind, n, n, &opts).unwrap();
            for &v in g.values() {
                dev = dev.max((v - value).abs());
            }
        }
    }
    dev
}

/// Largest deviation of the classical scheme from `c₀ + c₁(x − at)`, in
/// ulps of the largest exact nodal value.
pub fn affine_ulps(a: f64, c0: f64, c1: f64, n: usize, m: usize) -> f64 {
    let u = move |x: f64, t: f64| c0 + c1 * (x - a * t);
    let p = TransportProblem::builder(1.0, 1.0)
        .a(ScalarField2D::constant(a))
        .phi(ScalarField1D::new(move |x| u(x, 0.0)))
        .psi(ScalarField1D::new(move |t| u(0.0, t)))
        .alpha(a)
        .build()
        .unwrap();
    let mesh = TensorMesh::new(
        build_uniform(0.0, 1.0, n).unwrap(),
        build_uniform(0.0, 1.0, m).unwrap(),
    );
    let g = solve_upwind(&p, &mesh).unwrap();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (j, &t) in mesh.time.nodes().iter().enumerate() {
        for (i, &x) in mesh.space.nodes().iter().enumerate() {
            let exact = u(x, t);
            scale = scale.max(exact.abs());
            worst = worst.max((g.get(i, j) - exact).abs());
        }
    }
    if worst == 0.0 {
        0.0
    } else {
        worst / (scale * f64::EPSILON)
    }
}

/// Observed RK4 order on `dx/dt = x + 1`, `x(0) = 0`, over `[0, 1]`.
pub fn rk4_order() -> f64 {
    let p = TransportProblem::builder(4.0, 1.0)
        .a(ScalarField2D::new(|x, _| x + 1.0))
        .build()
        .unwrap();
    let exact = std::f64::consts::E - 1.0;
    let err =
        |steps: usize| (trace(&p, 0.0, 0.0, 0.0, 1.0, steps).unwrap().x_at(1.0) - exact).abs();
    (err(8) / err(16)).log2()
}

/// `(lower limit error, factor(800))` of the fitted factor.
pub fn fitted_limits() -> (f64, f64) {
    (fitted_factor(1e-8) - 1.0, fitted_factor(800.0))
}

/// Largest deviation of the collapse node from `φ(0)/(1 + b₀k)^j` for an
/// endpoint pulse with constant `a` and `b`.
pub fn collapse_error(a: f64, b0: f64, eps: f64, n: usize, m: usize) -> f64 {
    let p = TransportProblem::builder(1.0, 1.0)
        .a(ScalarField2D::constant(a))
        .b(ScalarField2D::constant(b0))
        .phi(ScalarField1D::new(|x| 1.0 + (-x / 0.01).exp()))
        .epsilon(eps)
        .alpha(a)
        .build()
        .unwrap();
    let ms = build_shishkin_inflow(1.0, eps, n, 4.0).unwrap();
    let mt = build_uniform(0.0, 1.0, m).unwrap();
    let k = 1.0 / m as f64;
    let sol = solve_pulse_initial(&p, 0.0, 3, &ms, &mt).unwrap();
    (0..=m)
        .map(|j| (sol.grid.get(0, j) - 2.0 / (1.0 + b0 * k).powi(j as i32)).abs())
        .fold(0.0, f64::max)
}

/// CSV of a small component table built on a pool with `threads` threads.
pub fn table_csv(threads: usize, table: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    let runner = table_runner(table).unwrap();
    pool.install(|| {
        build_table(&runner, &eps_powers(12, 3), &[16, 32, 64])
            .unwrap()
            .to_csv()
    })
}
