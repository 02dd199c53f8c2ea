//! Problem data model, compatibility diagnostics and the grid-function container.
//!
//! A [`TransportProblem`] describes one instance of
//!
//! ```text
//! u_t + a(x,t) u_x + b(x,t) u = f(x,t),   (x,t) ∈ (0,L] × (0,T]
//! u(0,t) = ψ(t),   u(x,0) = φ(x)
//! ```
//!
//! with `a ≥ α > 0` and `b ≥ 0`. Problems with negative reaction are admitted
//! only through [`shift_exponential`].

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::TensorMesh;

/// Number of lattice points per axis used to validate coefficient bounds.
pub const VALIDATION_LATTICE: usize = 64;

/// Default tolerance for [`check_compatibility`].
pub const DEFAULT_COMPAT_TOL: f64 = 1e-8;

/// A pure function `(x, t) ↦ value`.
#[derive(Clone)]
pub struct ScalarField2D(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);

impl ScalarField2D {
    /// Wraps a closure.
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    /// The constant field `c`.
    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _| c)
    }

    /// Evaluates the field.
    #[inline]
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        (self.0)(x, t)
    }
}

impl fmt::Debug for ScalarField2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField2D(..)")
    }
}

/// A pure function of one variable, used for boundary and initial data.
#[derive(Clone)]
pub struct ScalarField1D(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl ScalarField1D {
    /// Wraps a closure.
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    /// The constant function `c`.
    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c)
    }

    /// Evaluates the function.
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.0)(s)
    }
}

impl fmt::Debug for ScalarField1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField1D(..)")
    }
}

/// Inflow boundary data `ψ(t)` and initial data `φ(x)`.
///
/// For problems in split form these hold the layer parts `ψ₂` or `φ₂`.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    /// Inflow boundary value `u(0, t)`.
    pub psi: ScalarField1D,
    /// Initial value `u(x, 0)`.
    pub phi: ScalarField1D,
}

impl BoundaryData {
    /// Homogeneous data.
    pub fn zero() -> Self {
        Self {
            psi: ScalarField1D::constant(0.0),
            phi: ScalarField1D::constant(0.0),
        }
    }
}

/// How `a` and `b` are evaluated outside the closed domain rectangle.
///
/// Characteristic-aligned solvers sample coefficients past `x = L` (and past
/// `t = T` for the boundary-pulse frame).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Extension {
    /// Clamp the query point onto the rectangle.
    #[default]
    Clamp,
    /// Evaluate the supplied closures as given.
    Natural,
}

/// One transport problem instance.
#[derive(Clone, Debug)]
pub struct TransportProblem {
    length: f64,
    horizon: f64,
    a: ScalarField2D,
    b: ScalarField2D,
    f: ScalarField2D,
    data: BoundaryData,
    epsilon: f64,
    alpha: f64,
    extension: Extension,
    shift: f64,
}

/// Incremental constructor for [`TransportProblem`].
#[derive(Clone, Debug)]
pub struct ProblemBuilder {
    length: f64,
    horizon: f64,
    a: ScalarField2D,
    b: ScalarField2D,
    f: ScalarField2D,
    data: BoundaryData,
    epsilon: f64,
    alpha: Option<f64>,
    extension: Extension,
}

impl ProblemBuilder {
    /// Starts a problem on `[0, length] × [0, horizon]` with `a ≡ 1`,
    /// `b ≡ f ≡ 0`, zero data and `ε = 1`.
    pub fn new(length: f64, horizon: f64) -> Self {
        Self {
            length,
            horizon,
            a: ScalarField2D::constant(1.0),
            b: ScalarField2D::constant(0.0),
            f: ScalarField2D::constant(0.0),
            data: BoundaryData::zero(),
            epsilon: 1.0,
            alpha: None,
            extension: Extension::Clamp,
        }
    }

    /// Sets the convection coefficient.
    pub fn a(mut self, a: ScalarField2D) -> Self {
        self.a = a;
        self
    }

    /// Sets the reaction coefficient.
    pub fn b(mut self, b: ScalarField2D) -> Self {
        self.b = b;
        self
    }

    /// Sets the forcing term.
    pub fn f(mut self, f: ScalarField2D) -> Self {
        self.f = f;
        self
    }

    /// Sets the initial condition.
    pub fn phi(mut self, phi: ScalarField1D) -> Self {
        self.data.phi = phi;
        self
    }

    /// Sets the inflow boundary condition.
    pub fn psi(mut self, psi: ScalarField1D) -> Self {
        self.data.psi = psi;
        self
    }

    /// Replaces both boundary and initial data.
    pub fn data(mut self, data: BoundaryData) -> Self {
        self.data = data;
        self
    }

    /// Sets the singular perturbation parameter.
    pub fn epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Certifies a lower bound for `a`. When absent the sampled minimum is used.
    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    /// Selects the coefficient extension policy.
    pub fn extension(mut self, extension: Extension) -> Self {
        self.extension = extension;
        self
    }

    /// Validates the data and produces the problem.
    pub fn build(self) -> Result<TransportProblem> {
        self.build_with_shift(0.0)
    }

    fn build_with_shift(self, shift: f64) -> Result<TransportProblem> {
        let ProblemBuilder {
            length,
            horizon,
            a,
            b,
            f,
            data,
            epsilon,
            alpha,
            extension,
        } = self;
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::param(format!(
                "length must be positive, got {length}"
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::param(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::param(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        let n = VALIDATION_LATTICE;
        let mut a_min = f64::INFINITY;
        for i in 0..n {
            let x = length * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let t = horizon * j as f64 / (n - 1) as f64;
                let av = a.eval(x, t);
                let bv = b.eval(x, t);
                if !av.is_finite() {
                    return Err(Error::Evaluation { what: "a", x, t });
                }
                if !bv.is_finite() {
                    return Err(Error::Evaluation { what: "b", x, t });
                }
                if bv < 0.0 {
                    return Err(Error::param(format!(
                        "b({x}, {t}) = {bv} is negative; use shift_exponential"
                    )));
                }
                a_min = a_min.min(av);
            }
        }
        let alpha = match alpha {
            Some(alpha) => {
                if !(alpha > 0.0) {
                    return Err(Error::param(format!("alpha must be positive, got {alpha}")));
                }
                if a_min < alpha {
                    return Err(Error::param(format!(
                        "sampled minimum of a is {a_min}, below alpha = {alpha}"
                    )));
                }
                alpha
            }
            None => {
                if !(a_min > 0.0) {
                    return Err(Error::param(format!(
                        "a must be positive, sampled minimum is {a_min}"
                    )));
                }
                a_min
            }
        };
        Ok(TransportProblem {
            length,
            horizon,
            a,
            b,
            f,
            data,
            epsilon,
            alpha,
            extension,
            shift,
        })
    }
}

impl TransportProblem {
    /// Starts a builder on `[0, length] × [0, horizon]`.
    pub fn builder(length: f64, horizon: f64) -> ProblemBuilder {
        ProblemBuilder::new(length, horizon)
    }

    /// Reopens the problem for modification. The shift tag is dropped.
    pub fn to_builder(&self) -> ProblemBuilder {
        ProblemBuilder {
            length: self.length,
            horizon: self.horizon,
            a: self.a.clone(),
            b: self.b.clone(),
            f: self.f.clone(),
            data: self.data.clone(),
            epsilon: self.epsilon,
            alpha: Some(self.alpha),
            extension: self.extension,
        }
    }

    /// Space extent `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Time extent `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Convection coefficient.
    pub fn a(&self) -> &ScalarField2D {
        &self.a
    }

    /// Reaction coefficient.
    pub fn b(&self) -> &ScalarField2D {
        &self.b
    }

    /// Forcing term.
    pub fn f(&self) -> &ScalarField2D {
        &self.f
    }

    /// Boundary and initial data.
    pub fn data(&self) -> &BoundaryData {
        &self.data
    }

    /// Singular perturbation parameter `ε`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Certified lower bound `α` for `a`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Coefficient extension policy.
    pub fn extension(&self) -> Extension {
        self.extension
    }

    /// Accumulated exponential shift `β` (zero for unshifted problems).
    pub fn shift(&self) -> f64 {
        self.shift
    }

    #[inline]
    fn clamp(&self, x: f64, t: f64) -> (f64, f64) {
        match self.extension {
            Extension::Clamp => (x.clamp(0.0, self.length), t.clamp(0.0, self.horizon)),
            Extension::Natural => (x, t),
        }
    }

    /// `a` evaluated under the extension policy.
    #[inline]
    pub fn a_at(&self, x: f64, t: f64) -> f64 {
        let (x, t) = self.clamp(x, t);
        self.a.eval(x, t)
    }

    /// `b` evaluated under the extension policy.
    #[inline]
    pub fn b_at(&self, x: f64, t: f64) -> f64 {
        let (x, t) = self.clamp(x, t);
        self.b.eval(x, t)
    }

    /// The same coefficients on the subinterval `[x0, x1]`, re-origined so the
    /// new problem lives on `[0, x1 − x0]`. Data are shifted likewise.
    pub fn restrict(&self, x0: f64, x1: f64) -> Result<TransportProblem> {
        if !(0.0 <= x0 && x0 < x1 && x1 <= self.length) {
            return Err(Error::param(format!(
                "restriction [{x0}, {x1}] is not inside [0, {}]",
                self.length
            )));
        }
        let (a, b, f) = (self.a.clone(), self.b.clone(), self.f.clone());
        let phi = self.data.phi.clone();
        Ok(TransportProblem {
            length: x1 - x0,
            horizon: self.horizon,
            a: ScalarField2D::new(move |x, t| a.eval(x + x0, t)),
            b: ScalarField2D::new(move |x, t| b.eval(x + x0, t)),
            f: ScalarField2D::new(move |x, t| f.eval(x + x0, t)),
            data: BoundaryData {
                psi: self.data.psi.clone(),
                phi: ScalarField1D::new(move |x| phi.eval(x + x0)),
            },
            epsilon: self.epsilon,
            alpha: self.alpha,
            extension: self.extension,
            shift: self.shift,
        })
    }

    /// Same problem with new boundary and initial data.
    pub fn with_data(&self, data: BoundaryData) -> TransportProblem {
        TransportProblem {
            data,
            ..self.clone()
        }
    }

    /// Same problem with a new forcing term.
    pub fn with_forcing(&self, f: ScalarField2D) -> TransportProblem {
        TransportProblem { f, ..self.clone() }
    }

    /// Maps a grid function of the shifted problem back to the original
    /// unknown, `u = e^{βt} v`.
    pub fn unshift(&self, v: &GridFunction) -> GridFunction {
        self.scale_levels(v, |v, e| v * e)
    }

    /// Maps a grid function of the original unknown to the shifted one,
    /// `v = u / e^{βt}`.
    pub fn apply_shift(&self, u: &GridFunction) -> GridFunction {
        self.scale_levels(u, |u, e| u / e)
    }

    fn scale_levels(&self, g: &GridFunction, op: impl Fn(f64, f64) -> f64) -> GridFunction {
        let mut out = g.clone();
        if self.shift == 0.0 {
            return out;
        }
        let nx = g.mesh().space.len();
        for (j, &t) in g.mesh().time.nodes().iter().enumerate() {
            let e = (self.shift * t).exp();
            for v in &mut out.values[j * nx..(j + 1) * nx] {
                *v = op(*v, e);
            }
        }
        out
    }
}

/// Transforms a problem with possibly negative reaction by `v = e^{−βt} u`.
///
/// The returned problem has reaction `b + β`, forcing `e^{−βt} f` and inflow
/// data `e^{−βt} ψ`; its solution is `e^{−βt}` times the original solution.
/// Use [`TransportProblem::unshift`] to map discrete solutions back.
/// `β = 0` is the identity.
pub fn shift_exponential(p: ProblemBuilder, beta: f64) -> Result<TransportProblem> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::param(format!(
            "shift beta must be non-negative, got {beta}"
        )));
    }
    if beta == 0.0 {
        return p.build();
    }
    let (b, f, psi) = (p.b.clone(), p.f.clone(), p.data.psi.clone());
    let shifted = ProblemBuilder {
        b: ScalarField2D::new(move |x, t| b.eval(x, t) + beta),
        f: ScalarField2D::new(move |x, t| f.eval(x, t) / (beta * t).exp()),
        data: BoundaryData {
            psi: ScalarField1D::new(move |t| psi.eval(t) / (beta * t).exp()),
            phi: p.data.phi.clone(),
        },
        ..p
    };
    shifted.build_with_shift(beta)
}

/// Nodal values on a [`TensorMesh`], stored level by level.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    mesh: TensorMesh,
    values: Vec<f64>,
}

impl GridFunction {
    /// Wraps values laid out as `values[j * (N + 1) + i] = U(x_i, t_j)`.
    pub fn new(mesh: TensorMesh, values: Vec<f64>) -> Result<Self> {
        let expected = mesh.space.len() * mesh.time.len();
        if values.len() != expected {
            return Err(Error::param(format!(
                "grid function has {} values, mesh needs {expected}",
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let nx = mesh.space.len();
            return Err(Error::Evaluation {
                what: "grid value",
                x: mesh.space.nodes()[k % nx],
                t: mesh.time.nodes()[k / nx],
            });
        }
        Ok(Self { mesh, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(mesh: TensorMesh, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(mesh.space.len() * mesh.time.len());
        for &t in mesh.time.nodes() {
            for &x in mesh.space.nodes() {
                values.push(f(x, t));
            }
        }
        Self::new(mesh, values)
    }

    /// The underlying mesh.
    pub fn mesh(&self) -> &TensorMesh {
        &self.mesh
    }

    /// All values, level-major.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `U(x_i, t_j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.mesh.space.len() + i]
    }

    /// Values on time level `j`.
    pub fn level(&self, j: usize) -> &[f64] {
        let nx = self.mesh.space.len();
        &self.values[j * nx..(j + 1) * nx]
    }

    /// Values at space node `i` across all time levels.
    pub fn column(&self, i: usize) -> Vec<f64> {
        let nx = self.mesh.space.len();
        self.values.iter().skip(i).step_by(nx).copied().collect()
    }

    /// Largest absolute value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Smallest value.
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Smoothness class implied by the corner compatibility residuals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    /// All three conditions hold.
    C2Smooth,
    /// Levels 0 and 1 hold, level 2 fails.
    C1Only,
    /// Level 0 holds, level 1 fails.
    C0Only,
    /// Level 0 fails.
    Discontinuous,
}

/// Residuals of the three corner compatibility conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompatibilityReport {
    /// `φ(0) − ψ(0)`.
    pub r0: f64,
    /// `ψ′(0) + aφ′(0) + bψ(0) − f` at the corner.
    pub r1: f64,
    /// Second-order condition moved to one side.
    pub r2: f64,
    /// Classification under the tolerance used.
    pub classification: Smoothness,
}

/// Forward fourth-order first derivative at `x0` with step `h`.
fn d1_forward(f: impl Fn(f64) -> f64, x0: f64, h: f64) -> f64 {
    let v: [f64; 5] = std::array::from_fn(|k| f(x0 + k as f64 * h));
    (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
}

/// Forward fourth-order second derivative at `x0` with step `h`.
fn d2_forward(f: impl Fn(f64) -> f64, x0: f64, h: f64) -> f64 {
    let v: [f64; 6] = std::array::from_fn(|k| f(x0 + k as f64 * h));
    (45.0 * v[0] - 154.0 * v[1] + 214.0 * v[2] - 156.0 * v[3] + 61.0 * v[4] - 10.0 * v[5])
        / (12.0 * h * h)
}

/// Evaluates the corner compatibility residuals of `p`.
///
/// Derivatives of the black-box data are taken with one-sided fourth-order
/// stencils at steps `1e−3·max(L,T)` (first derivatives) and
/// `5e−3·max(L,T)` (second derivatives).
pub fn check_compatibility(p: &TransportProblem, tol: f64) -> Result<CompatibilityReport> {
    let scale = p.length.max(p.horizon);
    let h1 = 1e-3 * scale;
    let h2 = 5e-3 * scale;
    let (a, b, f) = (&p.a, &p.b, &p.f);
    let (phi, psi) = (&p.data.phi, &p.data.psi);

    let checked = |what: &'static str, v: f64| -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                what,
                x: 0.0,
                t: 0.0,
            })
        }
    };
    let phi0 = checked("phi", phi.eval(0.0))?;
    let psi0 = checked("psi", psi.eval(0.0))?;
    let a0 = checked("a", a.eval(0.0, 0.0))?;
    let b0 = checked("b", b.eval(0.0, 0.0))?;
    let f0 = checked("f", f.eval(0.0, 0.0))?;
    let dphi = checked("phi", d1_forward(|x| phi.eval(x), 0.0, h1))?;
    let dpsi = checked("psi", d1_forward(|t| psi.eval(t), 0.0, h1))?;
    let ddphi = checked("phi", d2_forward(|x| phi.eval(x), 0.0, h2))?;
    let ddpsi = checked("psi", d2_forward(|t| psi.eval(t), 0.0, h2))?;
    let a_x = checked("a", d1_forward(|x| a.eval(x, 0.0), 0.0, h1))?;
    let a_t = checked("a", d1_forward(|t| a.eval(0.0, t), 0.0, h1))?;
    let b_x = checked("b", d1_forward(|x| b.eval(x, 0.0), 0.0, h1))?;
    let b_t = checked("b", d1_forward(|t| b.eval(0.0, t), 0.0, h1))?;
    let f_x = checked("f", d1_forward(|x| f.eval(x, 0.0), 0.0, h1))?;
    let f_t = checked("f", d1_forward(|t| f.eval(0.0, t), 0.0, h1))?;

    let r0 = phi0 - psi0;
    let r1 = dpsi + a0 * dphi + b0 * psi0 - f0;
    let r2 =
        (f_t - b_t * psi0 - b0 * dpsi - ddpsi) + dphi * (a0 * (b0 + a_x) - a_t) + a0 * a0 * ddphi
            - a0 * (f_x - b_x * psi0);

    let classification = if r0.abs() > tol {
        Smoothness::Discontinuous
    } else if r1.abs() > tol {
        Smoothness::C0Only
    } else if r2.abs() > tol {
        Smoothness::C1Only
    } else {
        Smoothness::C2Smooth
    };
    Ok(CompatibilityReport {
        r0,
        r1,
        r2,
        classification,
    })
}
