//! Characteristic-aligned schemes for transported pulses.
//!
//! An initial pulse centred at `x = d` is computed in `s = x − g(t; d, 0)`,
//! where the convection coefficient becomes `c = ã(s,t) − ã(0,t)` and the
//! layer stays at `s = 0`. A pulse entering through `x = 0` at time `d` is
//! computed in `τ = t − θ(x)`, `θ` the arrival time of the characteristic
//! leaving `(0, d)`, marching in `x`.
//!
//! Computational boundaries away from the layer hold the data value at the
//! boundary node.

use crate::characteristics::{default_steps, trace, CharCurve};
use crate::error::{Error, Result};
use crate::mesh::{Mesh1D, TensorMesh};
use crate::solvers::{check_axis, finite};
use crate::types::{GridFunction, TransportProblem};

/// Coordinates in which an [`AlignedSolution`] is stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Frame {
    /// `(s, t)` with `x = s + g(t)`; the curve passes through `(d, 0)`.
    Initial {
        /// Initial pulse location.
        d: f64,
    },
    /// `(x, τ)` with `t = τ + θ(x)`; the curve passes through `(0, d)`.
    Boundary {
        /// Entry time of the pulse.
        d: f64,
    },
}

/// Output of the aligned schemes.
#[derive(Clone, Debug)]
pub struct AlignedSolution {
    /// Values on the computational mesh.
    pub grid: GridFunction,
    /// Alignment characteristic.
    pub curve: CharCurve,
    /// Computational coordinates.
    pub frame: Frame,
    /// Non-fatal diagnostics.
    pub warnings: Vec<String>,
}

impl AlignedSolution {
    /// Maps a physical point to computational coordinates.
    pub fn to_frame(&self, x: f64, t: f64) -> (f64, f64) {
        match self.frame {
            Frame::Initial { .. } => (x - self.curve.x_at(t), t),
            Frame::Boundary { .. } => (x, t - self.curve.t_at(x)),
        }
    }

    /// Maps computational coordinates to a physical point.
    pub fn to_physical(&self, u: f64, v: f64) -> (f64, f64) {
        match self.frame {
            Frame::Initial { .. } => (u + self.curve.x_at(v), v),
            Frame::Boundary { .. } => (u, v + self.curve.t_at(u)),
        }
    }
}

/// Solves one tridiagonal system `lower_i w_{i−1} + diag_i w_i + upper_i w_{i+1} = rhs_i`
/// in place (`rhs` receives the solution). Diagonal dominance makes pivoting unnecessary.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut Vec<f64>) {
    let n = diag.len();
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut prev_c = 0.0;
    let mut prev_d = 0.0;
    for i in 0..n {
        let den = diag[i] - lower[i] * prev_c;
        let c = upper[i] / den;
        let d = (rhs[i] - lower[i] * prev_d) / den;
        scratch[i] = c;
        rhs[i] = d;
        prev_c = c;
        prev_d = d;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

struct InitialSetup {
    curve: CharCurve,
    i0: usize,
    warnings: Vec<String>,
}

fn initial_setup(
    p: &TransportProblem,
    d: f64,
    mesh_s: &Mesh1D,
    mesh_t: &Mesh1D,
) -> Result<InitialSetup> {
    let l = p.length();
    if !(d >= 0.0 && d < l) {
        return Err(Error::param(format!(
            "pulse location d = {d} not in [0, {l})"
        )));
    }
    check_axis(mesh_s, -d, l - d, "aligned space")?;
    check_axis(mesh_t, 0.0, p.horizon(), "time")?;
    let i0 = mesh_s
        .index_of(0.0)
        .ok_or_else(|| Error::mesh("aligned mesh has no node at s = 0"))?;
    let curve = trace(
        p,
        d,
        0.0,
        0.0,
        p.horizon(),
        default_steps(mesh_s.intervals(), mesh_t.intervals()),
    )?;
    Ok(InitialSetup {
        curve,
        i0,
        warnings: Vec::new(),
    })
}

fn initial_values(p: &TransportProblem, d: f64, mesh_s: &Mesh1D) -> Result<Vec<f64>> {
    let phi = &p.data().phi;
    mesh_s
        .nodes()
        .iter()
        .map(|&s| finite("phi", phi.eval(s + d), s + d, 0.0))
        .collect()
}

/// Transformed coefficients `c_i = ã(s_i,t) − ã(0,t)` and `b̃_i` on one level.
fn level_coefficients(
    p: &TransportProblem,
    curve: &CharCurve,
    nodes: &[f64],
    t: f64,
    c: &mut Vec<f64>,
    b: &mut Vec<f64>,
) -> Result<()> {
    let g = curve.x_at(t);
    let a0 = finite("a", p.a_at(g, t), g, t)?;
    c.clear();
    b.clear();
    for &s in nodes {
        let x = s + g;
        c.push(finite("a", p.a_at(x, t), x, t)? - a0);
        b.push(finite("b", p.b_at(x, t), x, t)?);
    }
    Ok(())
}

/// Aligned scheme for an initial pulse, `D⁻_t W + c D*_s W + b̃ W = 0`.
///
/// `p.data().phi` is the layer datum `φ₂`; `f` and `ψ` are not used. `mesh_s`
/// spans `[−d, L−d]` and has a node at `s = 0`. The sign of `c` must not
/// change on either side of `s = 0`; [`solve_pulse_general`] lifts this.
pub fn solve_pulse_initial(
    p: &TransportProblem,
    d: f64,
    ell: u32,
    mesh_s: &Mesh1D,
    mesh_t: &Mesh1D,
) -> Result<AlignedSolution> {
    if ell == 0 {
        return Err(Error::param("ell must be at least 1"));
    }
    let mut setup = initial_setup(p, d, mesh_s, mesh_t)?;
    if d == 0.0 && ell < 3 {
        setup.warnings.push(format!(
            "ell = {ell} < 3: layer regularity for d = 0 is not guaranteed"
        ));
    }
    let i0 = setup.i0;
    let s = mesh_s.nodes();
    let ts = mesh_t.nodes();
    let n = s.len() - 1;
    let mut values = initial_values(p, d, mesh_s)?;
    let (left_bc, right_bc) = (values[0], values[n]);
    let (mut c, mut b) = (Vec::new(), Vec::new());
    for j in 1..ts.len() {
        let t = ts[j];
        let rk = 1.0 / (t - ts[j - 1]);
        level_coefficients(p, &setup.curve, s, t, &mut c, &mut b)?;
        let old_base = (j - 1) * (n + 1);
        let mut new = vec![0.0; n + 1];
        new[i0] = values[old_base + i0] * rk / (rk + b[i0]);
        let first = if i0 > 0 && c[0] > 0.0 {
            new[0] = left_bc;
            1
        } else {
            0
        };
        let end = if c[n] < 0.0 {
            new[n] = right_bc;
            n
        } else {
            n + 1
        };
        for (lo, hi) in [(first, i0), (i0 + 1, end)] {
            if lo >= hi {
                continue;
            }
            let side = &c[lo..hi];
            let pos = side.iter().any(|&v| v > 0.0);
            let neg = side.iter().any(|&v| v < 0.0);
            if pos && neg {
                return Err(Error::scheme(format!(
                    "transformed velocity changes sign on one side of s = 0 at t = {t}; use solve_pulse_general"
                )));
            }
            let update = |i: usize, new: &[f64]| -> f64 {
                let old = values[old_base + i] * rk;
                let ci = c[i];
                if ci > 0.0 {
                    let rh = 1.0 / (s[i] - s[i - 1]);
                    (old + ci * new[i - 1] * rh) / (rk + ci * rh + b[i])
                } else if ci < 0.0 {
                    let rh = 1.0 / (s[i + 1] - s[i]);
                    (old - ci * new[i + 1] * rh) / (rk - ci * rh + b[i])
                } else {
                    old / (rk + b[i])
                }
            };
            if neg {
                for i in (lo..hi).rev() {
                    new[i] = update(i, &new);
                }
            } else {
                for i in lo..hi {
                    new[i] = update(i, &new);
                }
            }
        }
        values.extend_from_slice(&new);
    }
    Ok(AlignedSolution {
        grid: GridFunction::new(TensorMesh::new(mesh_s.clone(), mesh_t.clone()), values)?,
        curve: setup.curve,
        frame: Frame::Initial { d },
        warnings: setup.warnings,
    })
}

/// Aligned scheme for an initial pulse without a sign condition on `c`.
///
/// For `d > 0` the computational domain starts at the left transition
/// `−σ_d` of `mesh_s`; each level is a tridiagonal M-matrix system.
pub fn solve_pulse_general(
    p: &TransportProblem,
    d: f64,
    mesh_s: &Mesh1D,
    mesh_t: &Mesh1D,
) -> Result<AlignedSolution> {
    let setup = initial_setup(p, d, mesh_s, mesh_t)?;
    let start = if d > 0.0 {
        mesh_s
            .transitions()
            .iter()
            .find(|&&(_, c)| c < 0.0)
            .map(|&(k, _)| k)
            .ok_or_else(|| Error::mesh("aligned mesh has no left transition point"))?
    } else {
        0
    };
    let mesh = mesh_s.slice(start, mesh_s.intervals())?;
    let s = mesh.nodes();
    let ts = mesh_t.nodes();
    let n = s.len() - 1;
    let mut values = initial_values(p, d, &mesh)?;
    let (left_bc, right_bc) = (values[0], values[n]);
    let (mut c, mut b) = (Vec::new(), Vec::new());
    let (mut lower, mut diag, mut upper) = (vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]);
    let mut scratch = Vec::new();
    for j in 1..ts.len() {
        let t = ts[j];
        let rk = 1.0 / (t - ts[j - 1]);
        level_coefficients(p, &setup.curve, s, t, &mut c, &mut b)?;
        let old_base = (j - 1) * (n + 1);
        let mut rhs = values[old_base..old_base + n + 1].to_vec();
        for i in 0..=n {
            if i == 0 && c[0] > 0.0 {
                (lower[i], diag[i], upper[i], rhs[i]) = (0.0, 1.0, 0.0, left_bc);
            } else if i == n && c[n] < 0.0 {
                (lower[i], diag[i], upper[i], rhs[i]) = (0.0, 1.0, 0.0, right_bc);
            } else {
                let (cp, cm) = (c[i].max(0.0), (-c[i]).max(0.0));
                let lo = if cp > 0.0 {
                    cp / (s[i] - s[i - 1])
                } else {
                    0.0
                };
                let up = if cm > 0.0 {
                    cm / (s[i + 1] - s[i])
                } else {
                    0.0
                };
                (lower[i], diag[i], upper[i]) = (-lo, rk + lo + up + b[i], -up);
                rhs[i] *= rk;
            }
        }
        thomas(&lower, &diag, &upper, &mut rhs, &mut scratch);
        values.extend_from_slice(&rhs);
    }
    Ok(AlignedSolution {
        grid: GridFunction::new(TensorMesh::new(mesh, mesh_t.clone()), values)?,
        curve: setup.curve,
        frame: Frame::Initial { d },
        warnings: setup.warnings,
    })
}

/// Aligned scheme for a pulse entering through `x = 0` at time `d`:
/// `[1 − â(x,τ)/â(x,0)] D*_τ W + â D⁻_x W + b̂ W = 0`, marched in `x`.
///
/// `p.data().psi` is the layer datum `ψ₂`; inflow values are
/// `W(0, τ_j) = ψ₂(τ_j + d)`. `mesh_tau` must contain `τ = 0`; for `d = 0` it
/// must start there.
pub fn solve_pulse_boundary(
    p: &TransportProblem,
    d: f64,
    mesh_x: &Mesh1D,
    mesh_tau: &Mesh1D,
) -> Result<AlignedSolution> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::param(format!(
            "entry time d = {d} must be non-negative"
        )));
    }
    check_axis(mesh_x, 0.0, p.length(), "space")?;
    if mesh_tau.min_step() < super::MIN_STEP {
        return Err(Error::mesh("aligned time mesh has a degenerate interval"));
    }
    let j0 = mesh_tau
        .index_of(0.0)
        .ok_or_else(|| Error::mesh("aligned time mesh has no node at τ = 0"))?;
    if d == 0.0 && j0 != 0 {
        return Err(Error::mesh(
            "for d = 0 the aligned time mesh must start at τ = 0",
        ));
    }
    let xs = mesh_x.nodes();
    let taus = mesh_tau.nodes();
    let (nx, nt) = (xs.len(), taus.len());
    let reach = 1.01 * p.length() / p.alpha();
    let curve = trace(
        p,
        0.0,
        d,
        d,
        d + reach,
        default_steps(mesh_x.intervals(), mesh_tau.intervals()),
    )?;
    if curve.x_range().1 < p.length() {
        return Err(Error::scheme(
            "alignment characteristic does not reach x = L",
        ));
    }
    let psi = &p.data().psi;
    let mut values = vec![0.0; nx * nt];
    for (j, &tau) in taus.iter().enumerate() {
        values[j * nx] = finite("psi", psi.eval(tau + d), 0.0, tau + d)?;
    }
    let (mut lower, mut diag, mut upper, mut rhs) =
        (vec![0.0; nt], vec![0.0; nt], vec![0.0; nt], vec![0.0; nt]);
    let mut scratch = Vec::new();
    let (bottom, top) = (values[0], values[(nt - 1) * nx]);
    let mut bracket = vec![0.0; nt];
    let mut ahat = vec![0.0; nt];
    let mut bhat = vec![0.0; nt];
    for i in 1..nx {
        let x = xs[i];
        let theta = curve.t_at(x);
        let a0 = finite("a", p.a_at(x, theta), x, theta)?;
        if a0 == 0.0 {
            return Err(Error::scheme(format!(
                "vanishing convection at ({x}, {theta})"
            )));
        }
        for j in 0..nt {
            let t = taus[j] + theta;
            ahat[j] = finite("a", p.a_at(x, t), x, t)?;
            bhat[j] = finite("b", p.b_at(x, t), x, t)?;
            bracket[j] = 1.0 - ahat[j] / a0;
        }
        let rh = 1.0 / (x - xs[i - 1]);
        for j in 0..nt {
            if j == 0 && bracket[0] > 0.0 {
                (lower[j], diag[j], upper[j], rhs[j]) = (0.0, 1.0, 0.0, bottom);
            } else if j == nt - 1 && bracket[j] < 0.0 {
                (lower[j], diag[j], upper[j], rhs[j]) = (0.0, 1.0, 0.0, top);
            } else {
                let (bp, bm) = (bracket[j].max(0.0), (-bracket[j]).max(0.0));
                let lo = if bp > 0.0 {
                    bp / (taus[j] - taus[j - 1])
                } else {
                    0.0
                };
                let up = if bm > 0.0 {
                    bm / (taus[j + 1] - taus[j])
                } else {
                    0.0
                };
                (lower[j], diag[j], upper[j]) = (-lo, lo + up + ahat[j] * rh + bhat[j], -up);
                rhs[j] = ahat[j] * values[j * nx + i - 1] * rh;
            }
        }
        thomas(&lower, &diag, &upper, &mut rhs, &mut scratch);
        for j in 0..nt {
            values[j * nx + i] = rhs[j];
        }
    }
    Ok(AlignedSolution {
        grid: GridFunction::new(TensorMesh::new(mesh_x.clone(), mesh_tau.clone()), values)?,
        curve,
        frame: Frame::Boundary { d },
        warnings: Vec::new(),
    })
}
