//! Run configuration: built-in presets and INI files.
//!
//! ```ini
//! [problem]
//! preset = smooth            ; or the inline keys below
//! length = 1
//! horizon = 1
//! a = 1 + x*t/10
//! b = 1
//! f = 1
//! phi = 1 + x
//! psi = 1 - t
//! extension = clamp          ; or natural
//! shift = 0                  ; β of the exponential shift for negative b
//!
//! [scheme]
//! kind = classical-upwind
//! epsilon = 1
//! n = 64
//! m = 64
//! mult = 1
//! c2 = 2
//! ell = 3
//! d = 0
//!
//! [fluid-particle]
//! omega0 = 2 - x/10
//! d0 = 2
//!
//! [output]
//! path = out.csv
//! probe = 101
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use ini::Ini;
use layerwind::composition::FluidParticleConfig;
use layerwind::experiments::{
    eps_powers, flow_away_problem, layer_forcing_problem, smooth_problem, table_config, MeshOptions,
};
use layerwind::{
    shift_exponential, Extension, ScalarField1D, ScalarField2D, SchemeKind, TransportProblem,
};

use crate::error::CliError;
use crate::expr::{parse_expr, Expr};

/// Built-in problem configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Smooth compatible instance for the classical scheme.
    Smooth,
    /// Component study `1` to `5` of the fluid-particle problem.
    Table(usize),
    /// Full fluid-particle pipeline with default parameters.
    FluidParticle,
    /// Outflow layer driven by the forcing.
    FlowTowardsDemo,
    /// Inflow layer driven by the forcing, for the flow-away scheme.
    FlowAwayDemo,
    /// `a = 1`, `b = f = 0`, `φ = ψ = 1`.
    Constant,
    /// Constant data with `φ(0) − ψ(0) = 1`.
    Incompatible,
}

impl Preset {
    /// Every preset.
    pub const ALL: [Preset; 11] = [
        Preset::Smooth,
        Preset::Table(1),
        Preset::Table(2),
        Preset::Table(3),
        Preset::Table(4),
        Preset::Table(5),
        Preset::FluidParticle,
        Preset::FlowTowardsDemo,
        Preset::FlowAwayDemo,
        Preset::Constant,
        Preset::Incompatible,
    ];

    /// Default scheme of problem presets.
    pub fn scheme(self) -> Option<SchemeKind> {
        match self {
            Preset::Smooth | Preset::Constant | Preset::Incompatible => {
                Some(SchemeKind::ClassicalUpwind)
            }
            Preset::FlowTowardsDemo => Some(SchemeKind::FittedOutflow),
            Preset::FlowAwayDemo => Some(SchemeKind::FlowAway),
            Preset::Table(_) | Preset::FluidParticle => None,
        }
    }

    /// Whether the preset is a single transport problem.
    pub fn is_problem(self) -> bool {
        self.scheme().is_some()
    }

    /// Default `ε` for single runs.
    pub fn default_eps(self) -> f64 {
        match self {
            Preset::FlowTowardsDemo | Preset::FlowAwayDemo => 2f64.powi(-8),
            _ => 1.0,
        }
    }

    /// Default `ε` list for convergence tables.
    pub fn default_eps_list(self) -> Vec<f64> {
        match self {
            Preset::Smooth | Preset::Constant | Preset::Incompatible => vec![1.0],
            Preset::Table(_) => eps_powers(30, 1),
            _ => eps_powers(30, 2),
        }
    }

    fn problem(self, eps: f64) -> layerwind::Result<TransportProblem> {
        match self {
            Preset::Smooth => smooth_problem(),
            Preset::FlowTowardsDemo => layer_forcing_problem(eps),
            Preset::FlowAwayDemo => flow_away_problem(eps),
            Preset::Constant | Preset::Incompatible => TransportProblem::builder(1.0, 1.0)
                .phi(ScalarField1D::constant(1.0))
                .psi(ScalarField1D::constant(if self == Preset::Constant {
                    1.0
                } else {
                    0.0
                }))
                .build(),
            Preset::Table(_) | Preset::FluidParticle => {
                unreachable!("component presets are not single problems")
            }
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Smooth => f.write_str("smooth"),
            Preset::Table(k) => write!(f, "table{k}"),
            Preset::FluidParticle => f.write_str("fluid-particle"),
            Preset::FlowTowardsDemo => f.write_str("flow-towards-demo"),
            Preset::FlowAwayDemo => f.write_str("flow-away-demo"),
            Preset::Constant => f.write_str("constant"),
            Preset::Incompatible => f.write_str("incompatible"),
        }
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Preset::ALL
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| {
                let names: Vec<String> = Preset::ALL.iter().map(Preset::to_string).collect();
                CliError::Config(format!(
                    "unknown preset '{s}'; available: {}",
                    names.join(", ")
                ))
            })
    }
}

/// Transport problem given by expressions.
#[derive(Clone, Debug)]
pub struct InlineProblem {
    /// Domain length.
    pub length: f64,
    /// Time horizon.
    pub horizon: f64,
    /// Convection coefficient.
    pub a: Expr,
    /// Reaction coefficient.
    pub b: Expr,
    /// Forcing.
    pub f: Expr,
    /// Initial data, in `x`.
    pub phi: Expr,
    /// Inflow data, in `t`.
    pub psi: Expr,
    /// Coefficient extension.
    pub extension: Extension,
    /// Exponential shift `β` making `b + β ≥ 0`.
    pub shift: f64,
}

impl InlineProblem {
    /// Builds the problem at perturbation parameter `eps`.
    pub fn build(&self, eps: f64) -> Result<TransportProblem, CliError> {
        for (name, e) in [
            ("a", &self.a),
            ("b", &self.b),
            ("f", &self.f),
            ("phi", &self.phi),
            ("psi", &self.psi),
        ] {
            check_finite(name, e, self.length, self.horizon, eps)?;
        }
        let field = |e: &Expr| {
            let e = Arc::new(e.clone());
            ScalarField2D::new(move |x, t| e.eval(x, t, eps))
        };
        let phi = Arc::new(self.phi.clone());
        let psi = Arc::new(self.psi.clone());
        let builder = TransportProblem::builder(self.length, self.horizon)
            .a(field(&self.a))
            .b(field(&self.b))
            .f(field(&self.f))
            .phi(ScalarField1D::new(move |x| phi.eval(x, 0.0, eps)))
            .psi(ScalarField1D::new(move |t| psi.eval(0.0, t, eps)))
            .epsilon(eps)
            .extension(self.extension);
        let p = if self.shift == 0.0 {
            builder.build()
        } else {
            shift_exponential(builder, self.shift)
        };
        p.map_err(CliError::from)
    }
}

fn check_finite(name: &str, e: &Expr, length: f64, horizon: f64, eps: f64) -> Result<(), CliError> {
    const SAMPLES: usize = 33;
    for i in 0..SAMPLES {
        let x = length * i as f64 / (SAMPLES - 1) as f64;
        for j in 0..SAMPLES {
            let t = horizon * j as f64 / (SAMPLES - 1) as f64;
            let v = e.eval(x, t, eps);
            if !v.is_finite() {
                return Err(CliError::Config(format!(
                    "expression '{name}' = {e} is not finite at x = {x}, t = {t}, eps = {eps}"
                )));
            }
        }
    }
    Ok(())
}

/// Where the problem comes from.
#[derive(Clone, Debug)]
pub enum ProblemSource {
    /// Built-in preset.
    Preset(Preset),
    /// Expressions from a config file.
    Inline(InlineProblem),
}

/// Everything a subcommand needs.
#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Problem definition.
    pub problem: ProblemSource,
    /// Scheme override.
    pub scheme: Option<SchemeKind>,
    /// Perturbation parameters.
    pub eps: Option<Vec<f64>>,
    /// Space intervals.
    pub n: Option<Vec<usize>>,
    /// Time intervals.
    pub m: Option<Vec<usize>>,
    /// Mesh knobs.
    pub mesh: MeshOptions,
    /// Fluid-particle parameters.
    pub fluid: FluidParticleConfig,
    /// Pulse width `μ` overriding the default `ε/4`.
    pub fluid_mu: Option<f64>,
    /// Output file; standard output when absent.
    pub out: Option<PathBuf>,
    /// Probe lattice size.
    pub probe: usize,
}

impl RunConfig {
    /// Configuration for a preset with default knobs.
    pub fn from_preset(preset: Preset) -> Self {
        let fluid = match preset {
            Preset::Table(_) => table_config(),
            _ => FluidParticleConfig::default(),
        };
        Self {
            problem: ProblemSource::Preset(preset),
            scheme: None,
            eps: None,
            n: None,
            m: None,
            mesh: MeshOptions::default(),
            fluid,
            fluid_mu: None,
            out: None,
            probe: 101,
        }
    }

    /// Preset, if any.
    pub fn preset(&self) -> Option<Preset> {
        match &self.problem {
            ProblemSource::Preset(p) => Some(*p),
            ProblemSource::Inline(_) => None,
        }
    }

    /// Scheme used for single-problem runs.
    pub fn scheme_kind(&self) -> SchemeKind {
        self.scheme
            .or_else(|| self.preset().and_then(Preset::scheme))
            .unwrap_or(SchemeKind::ClassicalUpwind)
    }

    /// Whether the configuration is a single transport problem.
    pub fn is_problem(&self) -> bool {
        self.preset().is_none_or(Preset::is_problem)
    }

    /// Builds the transport problem at `eps`.
    pub fn problem(&self, eps: f64) -> Result<TransportProblem, CliError> {
        match &self.problem {
            ProblemSource::Inline(p) => p.build(eps),
            ProblemSource::Preset(p) if p.is_problem() => p.problem(eps).map_err(CliError::from),
            ProblemSource::Preset(p) => Err(CliError::Config(format!(
                "preset '{p}' is not a single transport problem"
            ))),
        }
    }

    /// Perturbation parameter of a single run.
    pub fn single_eps(&self) -> Result<f64, CliError> {
        match self.eps.as_deref() {
            None => Ok(self.preset().map_or(1.0, Preset::default_eps)),
            Some([e]) => Ok(*e),
            Some(_) => Err(CliError::Config(
                "this command takes a single --eps value".into(),
            )),
        }
    }

    /// `ε` list of a convergence table.
    pub fn eps_list(&self) -> Vec<f64> {
        self.eps.clone().unwrap_or_else(|| {
            self.preset()
                .map_or_else(|| eps_powers(30, 2), Preset::default_eps_list)
        })
    }

    /// `(N, M)` of a single run, defaulting to `64 × 64`.
    pub fn single_size(&self) -> Result<(usize, usize), CliError> {
        let one = |v: &Option<Vec<usize>>, flag: &str| match v.as_deref() {
            None => Ok(None),
            Some([k]) => Ok(Some(*k)),
            Some(_) => Err(CliError::Config(format!(
                "this command takes a single --{flag} value"
            ))),
        };
        let n = one(&self.n, "n")?;
        let m = one(&self.m, "m")?;
        let n = n.or(m).unwrap_or(64);
        Ok((n, m.unwrap_or(n)))
    }

    /// Sizes `N = M` of a convergence table.
    pub fn n_list(&self) -> Result<Vec<usize>, CliError> {
        let n = self.n.clone().unwrap_or_else(|| vec![32, 64, 128, 256]);
        if let Some(m) = &self.m {
            if *m != n {
                return Err(CliError::Config(
                    "convergence tables use N = M; --m must equal --n".into(),
                ));
            }
        }
        if n.is_empty() || n.contains(&0) {
            return Err(CliError::Config("--n needs positive sizes".into()));
        }
        Ok(n)
    }

    /// Fluid-particle parameters at `eps`.
    pub fn fluid_at(&self, eps: f64) -> FluidParticleConfig {
        let mut cfg = self.fluid.clone().with_epsilon(eps);
        if let Some(mu) = self.fluid_mu {
            cfg.mu = mu;
        }
        cfg
    }

    /// Reads an INI file.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_ini_str(&text)
    }

    /// Parses INI text.
    pub fn from_ini_str(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text)
            .map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        let known = ["problem", "scheme", "fluid-particle", "output"];
        for (sec, props) in ini.iter() {
            match sec {
                None if props.is_empty() => {}
                None => {
                    return Err(CliError::Config(
                        "config keys must be inside a section".into(),
                    ))
                }
                Some(s) if !known.contains(&s) => {
                    return Err(CliError::Config(format!("unknown section [{s}]")))
                }
                _ => {}
            }
        }
        let section = |name: &str| Section {
            name: name.to_string(),
            props: ini.section(Some(name)).cloned().unwrap_or_default(),
        };
        let problem = section("problem");
        let scheme = section("scheme");
        let fluid = section("fluid-particle");
        let output = section("output");

        let mut cfg = match problem.get("preset") {
            Some(name) => {
                problem.only(&["preset"])?;
                RunConfig::from_preset(name.parse()?)
            }
            None if problem.props.is_empty() => RunConfig::from_preset(Preset::FluidParticle),
            None => {
                problem.only(&[
                    "length",
                    "horizon",
                    "a",
                    "b",
                    "f",
                    "phi",
                    "psi",
                    "extension",
                    "shift",
                ])?;
                let inline = InlineProblem {
                    length: problem.real("length")?.unwrap_or(1.0),
                    horizon: problem.real("horizon")?.unwrap_or(1.0),
                    a: problem.expr("a")?.unwrap_or(Expr::Num(1.0)),
                    b: problem.expr("b")?.unwrap_or(Expr::Num(0.0)),
                    f: problem.expr("f")?.unwrap_or(Expr::Num(0.0)),
                    phi: problem.expr("phi")?.unwrap_or(Expr::Num(0.0)),
                    psi: problem.expr("psi")?.unwrap_or(Expr::Num(0.0)),
                    extension: problem.extension("extension")?.unwrap_or_default(),
                    shift: problem.real("shift")?.unwrap_or(0.0),
                };
                let mut cfg = RunConfig::from_preset(Preset::Smooth);
                cfg.problem = ProblemSource::Inline(inline);
                cfg
            }
        };

        scheme.only(&["kind", "epsilon", "n", "m", "mult", "c2", "ell", "d"])?;
        if let Some(kind) = scheme.get("kind") {
            cfg.scheme = Some(kind.parse().map_err(|_| {
                let names: Vec<&str> = SchemeKind::ALL.iter().map(|k| k.as_str()).collect();
                CliError::Config(format!(
                    "unknown scheme '{kind}'; available: {}",
                    names.join(", ")
                ))
            })?);
        }
        if let Some(v) = scheme.get("epsilon") {
            cfg.eps = Some(parse_eps_list(v)?);
        }
        if let Some(v) = scheme.get("n") {
            cfg.n = Some(parse_size_list(v)?);
        }
        if let Some(v) = scheme.get("m") {
            cfg.m = Some(parse_size_list(v)?);
        }
        cfg.mesh.mult = scheme.real("mult")?.unwrap_or(cfg.mesh.mult);
        cfg.mesh.c2 = scheme.real("c2")?.unwrap_or(cfg.mesh.c2);
        cfg.mesh.d = scheme.real("d")?.unwrap_or(cfg.mesh.d);
        if let Some(ell) = scheme.get("ell") {
            cfg.mesh.ell = ell.parse().map_err(|_| {
                CliError::Config(format!(
                    "[scheme] ell must be a positive integer, got '{ell}'"
                ))
            })?;
        }

        fluid.only(&[
            "length",
            "horizon",
            "beta",
            "a0",
            "a1",
            "mu",
            "t0",
            "d0",
            "d1",
            "omega0",
            "extension",
            "r_time_c2",
            "i_left_c2",
            "i_right_mult",
        ])?;
        let fp = &mut cfg.fluid;
        for (key, slot) in [
            ("length", &mut fp.length),
            ("horizon", &mut fp.horizon),
            ("beta", &mut fp.beta),
            ("a0", &mut fp.a0),
            ("a1", &mut fp.a1),
            ("t0", &mut fp.t0),
            ("d0", &mut fp.d0),
            ("d1", &mut fp.d1),
            ("r_time_c2", &mut fp.r_time_c2),
            ("i_left_c2", &mut fp.i_left_c2),
            ("i_right_mult", &mut fp.i_right_mult),
        ] {
            if let Some(v) = fluid.real(key)? {
                *slot = v;
            }
        }
        if let Some(e) = fluid.expr("omega0")? {
            let e = Arc::new(e);
            fp.omega0 = ScalarField2D::new(move |x, t| e.eval(x, t, 1.0));
        }
        if let Some(ext) = fluid.extension("extension")? {
            fp.extension = ext;
        }
        cfg.fluid_mu = fluid.real("mu")?;

        output.only(&["path", "probe"])?;
        cfg.out = output.get("path").map(PathBuf::from);
        if let Some(p) = output.get("probe") {
            cfg.probe = p.parse().map_err(|_| {
                CliError::Config(format!("[output] probe must be an integer, got '{p}'"))
            })?;
        }
        Ok(cfg)
    }
}

struct Section {
    name: String,
    props: ini::Properties,
}

impl Section {
    fn get(&self, key: &str) -> Option<&str> {
        self.props.get(key)
    }

    fn only(&self, keys: &[&str]) -> Result<(), CliError> {
        match self.props.iter().find(|(k, _)| !keys.contains(k)) {
            Some((k, _)) => Err(CliError::Config(format!(
                "unknown key '{k}' in [{}]",
                self.name
            ))),
            None => Ok(()),
        }
    }

    fn real(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key)
            .map(|v| {
                parse_real(v).map_err(|e| CliError::Config(format!("[{}] {key}: {e}", self.name)))
            })
            .transpose()
    }

    fn expr(&self, key: &str) -> Result<Option<Expr>, CliError> {
        self.get(key)
            .map(|v| {
                parse_expr(v).map_err(|e| CliError::Config(format!("[{}] {key}: {e}", self.name)))
            })
            .transpose()
    }

    fn extension(&self, key: &str) -> Result<Option<Extension>, CliError> {
        self.get(key).map(parse_extension).transpose()
    }
}

fn parse_extension(s: &str) -> Result<Extension, CliError> {
    match s {
        "clamp" => Ok(Extension::Clamp),
        "natural" => Ok(Extension::Natural),
        _ => Err(CliError::Config(format!(
            "extension must be 'clamp' or 'natural', got '{s}'"
        ))),
    }
}

/// Parses a constant expression such as `0.5`, `2^-4` or `1/3`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let e = parse_expr(s).map_err(|e| e.to_string())?;
    if e.uses(crate::expr::Var::X) || e.uses(crate::expr::Var::T) || e.uses(crate::expr::Var::Eps) {
        return Err(format!("'{s}' must be a constant"));
    }
    let v = e.eval(0.0, 0.0, 1.0);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

/// Parses a comma-separated list of constants.
pub fn parse_eps_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| parse_real(p.trim()).map_err(|e| CliError::Config(format!("eps: {e}"))))
        .collect()
}

/// Parses a comma-separated list of positive integers.
pub fn parse_size_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|p| match p.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(CliError::Config(format!(
                "mesh size '{}' is not a positive integer",
                p.trim()
            ))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.to_string().parse::<Preset>().unwrap(), p);
        }
        assert!("table6".parse::<Preset>().is_err());
    }

    #[test]
    fn lists_and_constants() {
        assert_eq!(
            parse_eps_list("1, 2^-4,0.5").unwrap(),
            vec![1.0, 0.0625, 0.5]
        );
        assert_eq!(parse_size_list("32,64").unwrap(), vec![32, 64]);
        assert!(parse_size_list("32,0").is_err());
        assert!(parse_eps_list("x").is_err());
        assert_eq!(parse_real("1/4").unwrap(), 0.25);
    }

    #[test]
    fn inline_config() {
        let cfg = RunConfig::from_ini_str(
            "[problem]\nlength = 2\na = 1 + x\nphi = x\npsi = -t\n[scheme]\nkind = fitted-outflow\nepsilon = 2^-6\nn = 16\n",
        )
        .unwrap();
        assert_eq!(cfg.scheme_kind(), SchemeKind::FittedOutflow);
        assert_eq!(cfg.single_eps().unwrap(), 2f64.powi(-6));
        assert_eq!(cfg.single_size().unwrap(), (16, 16));
        let p = cfg.problem(0.5).unwrap();
        assert_eq!(p.length(), 2.0);
        assert_eq!(p.a().eval(1.0, 0.0), 2.0);
        assert_eq!(p.data().psi.eval(0.25), -0.25);
    }

    #[test]
    fn config_errors() {
        for bad in [
            "[problem]\npreset = nope\n",
            "[problem]\na = 1 +\n",
            "[problem]\nbogus = 1\n",
            "[nowhere]\nx = 1\n",
            "[scheme]\nkind = magic\n",
            "[problem]\na = 1/x\n",
        ] {
            let r = RunConfig::from_ini_str(bad).and_then(|c| c.problem(1.0).map(|_| ()));
            assert!(matches!(r, Err(CliError::Config(_))), "{bad:?} gave {r:?}");
        }
    }

    #[test]
    fn fluid_section_overrides() {
        let cfg = RunConfig::from_ini_str(
            "[problem]\npreset = fluid-particle\n[fluid-particle]\nomega0 = 1\nd0 = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.fluid.d0, 3.0);
        assert_eq!(cfg.fluid.omega0.eval(4.0, 1.0), 1.0);
    }
}
