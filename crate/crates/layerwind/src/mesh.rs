//! Uniform and piecewise-uniform (Shishkin) meshes.
//!
//! Every two-band builder places half of the intervals in each band. The
//! interior builder uses an `N/4, N/2, N/4` split so that the layer location
//! `s = 0` is the middle node of the fine band.

use crate::error::{Error, Result};

/// Layout of a [`Mesh1D`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    /// Equally spaced nodes.
    Uniform,
    /// Fine band at the left end.
    ShishkinLeft,
    /// Fine band at the right end.
    ShishkinRight,
    /// Fine band around an interior point.
    ShishkinInterior,
    /// Fine band at the initial time.
    ShishkinTime,
}

/// A strictly increasing set of nodes with transition metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    transitions: Vec<(usize, f64)>,
    kind: MeshKind,
}

impl Mesh1D {
    /// Builds a mesh from explicit nodes, checking monotonicity.
    pub fn from_nodes(
        nodes: Vec<f64>,
        kind: MeshKind,
        transitions: Vec<(usize, f64)>,
    ) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::mesh("a mesh needs at least two nodes"));
        }
        if nodes.iter().any(|v| !v.is_finite()) {
            return Err(Error::mesh("mesh nodes must be finite"));
        }
        if let Some(w) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::mesh(format!(
                "nodes not strictly increasing at index {}: {} then {}",
                w,
                nodes[w],
                nodes[w + 1]
            )));
        }
        for &(k, c) in &transitions {
            if nodes.get(k) != Some(&c) {
                return Err(Error::mesh(format!("transition {c} is not node {k}")));
            }
        }
        Ok(Self {
            nodes,
            transitions,
            kind,
        })
    }

    /// Node coordinates.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false; a mesh has at least two nodes.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of intervals `N`.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Left endpoint.
    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    /// Right endpoint.
    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Layout tag.
    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    /// Transition nodes as `(index, coordinate)`.
    pub fn transitions(&self) -> &[(usize, f64)] {
        &self.transitions
    }

    /// Width of interval `i`, i.e. `x_i − x_{i−1}` for `1 ≤ i ≤ N`.
    #[inline]
    pub fn step(&self, i: usize) -> f64 {
        self.nodes[i] - self.nodes[i - 1]
    }

    /// Smallest interval width.
    pub fn min_step(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest interval width.
    pub fn max_step(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of the node equal to `x`, if any.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.nodes.binary_search_by(|v| v.total_cmp(&x)).ok()
    }

    /// Index `c` of the cell `[x_c, x_{c+1}]` containing `x`, or `None` outside.
    #[inline]
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo() && x <= self.hi()) {
            return None;
        }
        let c = self.nodes.partition_point(|&v| v <= x);
        Some(c.saturating_sub(1).min(self.intervals() - 1))
    }

    /// The sub-mesh of nodes `lo..=hi`, keeping transitions that fall inside.
    pub fn slice(&self, lo: usize, hi: usize) -> Result<Mesh1D> {
        if !(lo < hi && hi < self.nodes.len()) {
            return Err(Error::mesh(format!("invalid slice {lo}..={hi}")));
        }
        let transitions = self
            .transitions
            .iter()
            .filter(|(k, _)| (lo..=hi).contains(k))
            .map(|&(k, c)| (k - lo, c))
            .collect();
        Ok(Mesh1D {
            nodes: self.nodes[lo..=hi].to_vec(),
            transitions,
            kind: self.kind,
        })
    }

    /// Mirror image under `x ↦ lo + hi − x`.
    pub fn reflect(&self) -> Mesh1D {
        let (lo, hi) = (self.lo(), self.hi());
        let n = self.intervals();
        let mut nodes: Vec<f64> = self.nodes.iter().rev().map(|&x| hi - x + lo).collect();
        nodes[0] = lo;
        nodes[n] = hi;
        let transitions = self
            .transitions
            .iter()
            .rev()
            .map(|&(k, _)| (n - k, nodes[n - k]))
            .collect();
        let kind = match self.kind {
            MeshKind::ShishkinLeft => MeshKind::ShishkinRight,
            MeshKind::ShishkinRight => MeshKind::ShishkinLeft,
            other => other,
        };
        Mesh1D {
            nodes,
            transitions,
            kind,
        }
    }

    /// Midpoints of all intervals.
    pub fn midpoints(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// A space mesh paired with a time mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorMesh {
    /// Space (or transformed-space) axis.
    pub space: Mesh1D,
    /// Time (or transformed-time) axis.
    pub time: Mesh1D,
}

impl TensorMesh {
    /// Pairs two axes.
    pub fn new(space: Mesh1D, time: Mesh1D) -> Self {
        Self { space, time }
    }
}

/// Appends `n` equal intervals from `lo` to `hi` (excluding `lo`).
fn push_band(nodes: &mut Vec<f64>, lo: f64, hi: f64, n: usize) {
    let w = hi - lo;
    for k in 1..n {
        nodes.push(lo + w * k as f64 / n as f64);
    }
    nodes.push(hi);
}

/// `N + 1` equally spaced nodes on `[lo, hi]`.
pub fn build_uniform(lo: f64, hi: f64, n: usize) -> Result<Mesh1D> {
    if n == 0 {
        return Err(Error::param("a uniform mesh needs N ≥ 1"));
    }
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param(format!("invalid interval [{lo}, {hi}]")));
    }
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(lo);
    push_band(&mut nodes, lo, hi, n);
    Mesh1D::from_nodes(nodes, MeshKind::Uniform, Vec::new())
}

fn check_two_band(length: f64, eps: f64, n: usize, mult: f64, what: &str) -> Result<()> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::param(format!("{what} needs an even N ≥ 4, got {n}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::param(format!(
            "{what} needs a positive length, got {length}"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param(format!(
            "{what} needs a positive epsilon, got {eps}"
        )));
    }
    if !(mult > 0.0 && mult.is_finite()) {
        return Err(Error::param(format!(
            "{what} needs a positive multiplier, got {mult}"
        )));
    }
    Ok(())
}

/// Two-band mesh on `[0, length]` with the fine band `[0, σ]`.
fn fine_left(length: f64, sigma: f64, n: usize, kind: MeshKind) -> Result<Mesh1D> {
    let half = n / 2;
    if sigma == 0.5 * length {
        let uniform = build_uniform(0.0, length, n)?;
        let c = uniform.nodes[half];
        return Mesh1D::from_nodes(uniform.nodes, kind, vec![(half, c)]);
    }
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(0.0);
    push_band(&mut nodes, 0.0, sigma, half);
    push_band(&mut nodes, sigma, length, half);
    Mesh1D::from_nodes(nodes, kind, vec![(half, sigma)])
}

/// Mesh with the fine band at the outflow end: `σ = min(L/2, mult·ε ln N)`,
/// `N/2` intervals on `[0, L−σ]` and `N/2` on `[L−σ, L]`.
pub fn build_shishkin_outflow(length: f64, eps: f64, n: usize, mult: f64) -> Result<Mesh1D> {
    check_two_band(length, eps, n, mult, "outflow mesh")?;
    let half = n / 2;
    let sigma = (0.5 * length).min(mult * eps * (n as f64).ln());
    if sigma == 0.5 * length {
        let uniform = build_uniform(0.0, length, n)?;
        let c = uniform.nodes[half];
        return Mesh1D::from_nodes(uniform.nodes, MeshKind::ShishkinRight, vec![(half, c)]);
    }
    let xt = length - sigma;
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(0.0);
    push_band(&mut nodes, 0.0, xt, half);
    push_band(&mut nodes, xt, length, half);
    Mesh1D::from_nodes(nodes, MeshKind::ShishkinRight, vec![(half, xt)])
}

/// Mesh with the fine band at the inflow end: `σ = min(L/2, mult·ε ln N)`,
/// `N/2` intervals on `[0, σ]` and `N/2` on `[σ, L]`.
pub fn build_shishkin_inflow(length: f64, eps: f64, n: usize, mult: f64) -> Result<Mesh1D> {
    check_two_band(length, eps, n, mult, "inflow mesh")?;
    let sigma = (0.5 * length).min(mult * eps * (n as f64).ln());
    fine_left(length, sigma, n, MeshKind::ShishkinLeft)
}

/// Time mesh fine near `t = 0`: `τ = min(T/2, C₂ ε ln M)`, `M/2` intervals
/// on each of `[0, τ]` and `[τ, T]`.
pub fn build_shishkin_time(horizon: f64, eps: f64, m: usize, c2: f64) -> Result<Mesh1D> {
    check_two_band(horizon, eps, m, c2, "time mesh")?;
    let tau = (0.5 * horizon).min(c2 * eps * (m as f64).ln());
    fine_left(horizon, tau, m, MeshKind::ShishkinTime)
}

/// Mesh in the aligned coordinate `s ∈ [−d, L−d]` with a fine band
/// `[−σ_d, σ_d]`, `σ_d = min(d/2, (L−d)/2, ε ln N)`, and an `N/4, N/2, N/4`
/// split. Node `N/2` is exactly `s = 0`.
pub fn build_shishkin_interior(d: f64, length: f64, eps: f64, n: usize) -> Result<Mesh1D> {
    if !(d > 0.0 && d < length) {
        return Err(Error::param(format!(
            "interior point d = {d} not in (0, {length})"
        )));
    }
    if n < 4 || !n.is_multiple_of(4) {
        return Err(Error::param(format!(
            "interior mesh needs N divisible by 4, got {n}"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param(format!(
            "interior mesh needs a positive epsilon, got {eps}"
        )));
    }
    let sigma = (0.5 * d).min(0.5 * (length - d)).min(eps * (n as f64).ln());
    let (q, h) = (n / 4, n / 2);
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(-d);
    push_band(&mut nodes, -d, -sigma, q);
    push_band(&mut nodes, -sigma, 0.0, q);
    push_band(&mut nodes, 0.0, sigma, q);
    push_band(&mut nodes, sigma, length - d, q);
    debug_assert_eq!(nodes[h], 0.0);
    Mesh1D::from_nodes(
        nodes,
        MeshKind::ShishkinInterior,
        vec![(q, -sigma), (3 * q, sigma)],
    )
}
