//! Characteristic curves of `dx/dt = a(x, t)` and the solution
//! representation along them.
//!
//! [`exact_solution`] integrates the data and forcing along the
//! characteristic through a point and serves as the reference solution for
//! solver tests.

use crate::error::{Error, Result};
use crate::types::TransportProblem;

/// Default number of Simpson panels used by [`exact_solution`].
pub const DEFAULT_QUAD_PANELS: usize = 2048;

/// Number of RK4 steps used to locate the inflow intercept in [`gamma`].
const GAMMA_STEPS: usize = 2048;

/// RK4 steps per mesh interval when tracing alignment curves for a solve.
pub const STEPS_PER_INTERVAL: usize = 8;

/// Default RK4 step count for a solve on an `N × M` mesh.
pub fn default_steps(n: usize, m: usize) -> usize {
    STEPS_PER_INTERVAL * n.max(m)
}

/// One point of a traced curve together with its slope `a(x, t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    /// Time.
    pub t: f64,
    /// Position.
    pub x: f64,
    /// Slope `dx/dt` at the sample.
    pub v: f64,
}

/// A characteristic `x = g(t; s, τ)` sampled by fixed-step RK4.
#[derive(Clone, Debug, PartialEq)]
pub struct CharCurve {
    anchor: (f64, f64),
    samples: Vec<CurveSample>,
    step: f64,
}

#[inline]
fn rk4_step(p: &TransportProblem, t: f64, x: f64, h: f64) -> f64 {
    let k1 = p.a_at(x, t);
    let k2 = p.a_at(x + 0.5 * h * k1, t + 0.5 * h);
    let k3 = p.a_at(x + 0.5 * h * k2, t + 0.5 * h);
    let k4 = p.a_at(x + h * k3, t + h);
    x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates from `(x0, t0)` to `t1` in `n` equal steps, returning the
/// positions at `t0 + k (t1 − t0)/n`.
fn integrate(p: &TransportProblem, x0: f64, t0: f64, t1: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let h = (t1 - t0) / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push((t0, x0));
    let mut x = x0;
    for k in 0..n {
        let t = t0 + h * k as f64;
        x = rk4_step(p, t, x, h);
        let tn = if k + 1 == n {
            t1
        } else {
            t0 + h * (k + 1) as f64
        };
        if !x.is_finite() {
            return Err(Error::Integration { x, t: tn });
        }
        out.push((tn, x));
    }
    Ok(out)
}

/// Traces the characteristic through `(s, τ)` over `[t_lo, t_hi]` with
/// classical RK4 at step `(t_hi − t_lo)/steps` (rounded so that `τ` is a
/// sample).
pub fn trace(
    p: &TransportProblem,
    s: f64,
    tau: f64,
    t_lo: f64,
    t_hi: f64,
    steps: usize,
) -> Result<CharCurve> {
    if !(t_lo <= tau && tau <= t_hi) || steps == 0 || !(t_hi > t_lo) {
        return Err(Error::param(format!(
            "trace needs t_lo ≤ τ ≤ t_hi with t_lo < t_hi and steps ≥ 1, got [{t_lo}, {t_hi}], τ = {tau}, steps = {steps}"
        )));
    }
    let h = (t_hi - t_lo) / steps as f64;
    let count = |span: f64| ((span / h) - 1e-9).ceil().max(0.0) as usize;
    let nb = count(tau - t_lo);
    let nf = count(t_hi - tau);
    let mut pts = Vec::with_capacity(nb + nf + 1);
    if nb > 0 {
        let mut back = integrate(p, s, tau, t_lo, nb)?;
        back.reverse();
        back.pop();
        pts.extend(back);
    }
    pts.push((tau, s));
    if nf > 0 {
        pts.extend(integrate(p, s, tau, t_hi, nf)?.into_iter().skip(1));
    }
    let mut samples = Vec::with_capacity(pts.len());
    for (t, x) in pts {
        let v = p.a_at(x, t);
        if !v.is_finite() {
            return Err(Error::Evaluation { what: "a", x, t });
        }
        samples.push(CurveSample { t, x, v });
    }
    Ok(CharCurve {
        anchor: (s, tau),
        samples,
        step: h,
    })
}

impl CharCurve {
    /// The point `(s, τ)` the curve passes through.
    pub fn anchor(&self) -> (f64, f64) {
        self.anchor
    }

    /// Samples sorted by time.
    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    /// Nominal integration step.
    pub fn step(&self) -> f64 {
        self.step
    }

    /// First and last sampled times.
    pub fn t_range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    /// First and last sampled positions.
    pub fn x_range(&self) -> (f64, f64) {
        (self.samples[0].x, self.samples[self.samples.len() - 1].x)
    }

    fn segment(&self, k: usize) -> (CurveSample, CurveSample) {
        (self.samples[k], self.samples[k + 1])
    }

    #[inline]
    fn hermite(a: CurveSample, b: CurveSample, t: f64) -> f64 {
        let h = b.t - a.t;
        let th = (t - a.t) / h;
        let th2 = th * th;
        let th3 = th2 * th;
        let h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
        let h10 = th3 - 2.0 * th2 + th;
        let h01 = -2.0 * th3 + 3.0 * th2;
        let h11 = th3 - th2;
        h00 * a.x + h10 * h * a.v + h01 * b.x + h11 * h * b.v
    }

    /// Position `g(t)` by cubic Hermite interpolation between samples.
    pub fn x_at(&self, t: f64) -> f64 {
        let n = self.samples.len();
        let k = self.samples.partition_point(|s| s.t <= t);
        if k > 0 && self.samples[k - 1].t == t {
            return self.samples[k - 1].x;
        }
        let k = k.clamp(1, n - 1) - 1;
        let (a, b) = self.segment(k);
        Self::hermite(a, b, t)
    }

    /// Time at which the curve reaches `x` (inverse of [`Self::x_at`]).
    pub fn t_at(&self, x: f64) -> f64 {
        let n = self.samples.len();
        let k = self.samples.partition_point(|s| s.x <= x);
        if k > 0 && self.samples[k - 1].x == x {
            return self.samples[k - 1].t;
        }
        let k = k.clamp(1, n - 1) - 1;
        let (a, b) = self.segment(k);
        let (mut lo, mut hi) = (a.t, b.t);
        let mut t = a.t + (x - a.x) / (b.x - a.x) * (b.t - a.t);
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        let inside = x >= a.x && x <= b.x;
        for _ in 0..100 {
            let r = Self::hermite(a, b, t) - x;
            if r == 0.0 {
                break;
            }
            if inside {
                if r > 0.0 {
                    hi = t;
                } else {
                    lo = t;
                }
            }
            let slope = {
                let dt = (b.t - a.t) * 1e-7;
                (Self::hermite(a, b, t + dt) - Self::hermite(a, b, t - dt)) / (2.0 * dt)
            };
            let mut next = t - r / slope;
            if inside && !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                t = next;
                break;
            }
            t = next;
        }
        t
    }
}

/// Time `Γ(s, τ)` at which the characteristic through `(s, τ)` meets `x = 0`.
///
/// Returns `None` when the curve exits through `t = 0` at `x ≥ 0`, i.e. the
/// point is on the initial-data side (points on the dividing curve included).
pub fn gamma(p: &TransportProblem, s: f64, tau: f64) -> Result<Option<f64>> {
    if tau <= 0.0 {
        return Ok(if s >= 0.0 { None } else { Some(0.0) });
    }
    let pts = integrate(p, s, tau, 0.0, GAMMA_STEPS)?;
    if pts[pts.len() - 1].1 >= 0.0 {
        return Ok(None);
    }
    if s <= 0.0 {
        return Ok(Some(tau));
    }
    let k = pts
        .iter()
        .position(|&(_, x)| x <= 0.0)
        .expect("sign change exists");
    let (t_pos, x_pos) = pts[k - 1];
    let h = t_pos - pts[k].0;
    let (mut lo, mut hi) = (0.0f64, h);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rk4_step(p, t_pos, x_pos, -mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(t_pos - 0.5 * (lo + hi)))
}

/// Integral of the source along the characteristic through `(s, τ)`
/// weighted by the reaction factor, plus the transported data value.
fn along_characteristic(
    p: &TransportProblem,
    s: f64,
    tau: f64,
    panels: usize,
    source: &dyn Fn(f64, f64) -> f64,
    initial: &dyn Fn(f64) -> f64,
    boundary: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    if panels < 2 {
        return Err(Error::param(format!(
            "quadrature needs at least 2 panels, got {panels}"
        )));
    }
    let g = gamma(p, s, tau)?;
    let z0 = g.unwrap_or(0.0);
    if tau - z0 <= 0.0 {
        return Ok(match g {
            None => initial(s),
            Some(t) => boundary(t),
        });
    }
    let n = 2 * panels;
    let pts = integrate(p, s, tau, z0, n)?;
    let hq = (tau - z0) / n as f64;
    let bv: Vec<f64> = pts.iter().map(|&(z, x)| p.b_at(x, z)).collect();
    let mut cum = vec![0.0; n + 1];
    for k in (0..n).step_by(2) {
        cum[k + 1] = cum[k] + hq / 12.0 * (5.0 * bv[k] + 8.0 * bv[k + 1] - bv[k + 2]);
        cum[k + 2] = cum[k] + hq / 3.0 * (bv[k] + 4.0 * bv[k + 1] + bv[k + 2]);
    }
    let mut integral = 0.0;
    for (k, &(z, x)) in pts.iter().enumerate() {
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        integral += w * source(x, z) * (-cum[k]).exp();
    }
    integral *= hq / 3.0;
    let weight = (-cum[n]).exp();
    let data = match g {
        None => initial(pts[n].1),
        Some(t) => boundary(t),
    };
    let u = data * weight + integral;
    if u.is_finite() {
        Ok(u)
    } else {
        Err(Error::Evaluation {
            what: "exact solution",
            x: s,
            t: tau,
        })
    }
}

/// Solution of the problem at `(s, τ)` from its characteristic representation.
///
/// Inner and outer integrals use composite Simpson with `quad_panels` panels.
pub fn exact_solution(p: &TransportProblem, s: f64, tau: f64, quad_panels: usize) -> Result<f64> {
    let f = p.f();
    let data = p.data();
    along_characteristic(
        p,
        s,
        tau,
        quad_panels,
        &|x, t| f.eval(x, t),
        &|x| data.phi.eval(x),
        &|t| data.psi.eval(t),
    )
}

/// Singular function with `Lχ₀ = 0`, `χ₀(0, t) = 0`, `χ₀(x, 0) = 1`.
pub fn chi0(p: &TransportProblem, s: f64, tau: f64) -> Result<f64> {
    along_characteristic(
        p,
        s,
        tau,
        DEFAULT_QUAD_PANELS,
        &|_, _| 0.0,
        &|_| 1.0,
        &|_| 0.0,
    )
}

/// Singular function with `Lχ₁ = 1` and homogeneous data.
pub fn chi1(p: &TransportProblem, s: f64, tau: f64) -> Result<f64> {
    along_characteristic(
        p,
        s,
        tau,
        DEFAULT_QUAD_PANELS,
        &|_, _| 1.0,
        &|_| 0.0,
        &|_| 0.0,
    )
}
