//! Subcommands.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use layerwind::composition::solve_fluid_particle;
use layerwind::experiments::{build_table, fmt_eps, solve_scheme, table_runner, Runner};
use layerwind::types::DEFAULT_COMPAT_TOL;
use layerwind::{check_compatibility, GridFunction, Smoothness};

use crate::config::{parse_eps_list, parse_size_list, Preset, RunConfig};
use crate::error::CliError;

/// Command-line interface.
#[derive(Debug, Parser)]
#[command(
    name = "layerwind",
    version,
    about = "Layer-adapted solvers for singularly perturbed transport problems"
)]
pub struct Cli {
    /// Subcommand to run.
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem and write the grid as `x,t,value` rows.
    Solve(RunArgs),
    /// Build a two-mesh convergence table.
    Converge(RunArgs),
    /// Run the fluid-particle pipeline and sample the field on a probe lattice.
    FluidParticle(RunArgs),
    /// Print the corner compatibility report of a problem.
    Check(RunArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Built-in configuration name.
    #[arg(long)]
    pub preset: Option<String>,
    /// INI configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scheme name, overriding the preset or config.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Comma-separated perturbation parameters, e.g. `1,2^-4`.
    #[arg(long)]
    pub eps: Option<String>,
    /// Comma-separated space interval counts.
    #[arg(long)]
    pub n: Option<String>,
    /// Comma-separated time interval counts.
    #[arg(long)]
    pub m: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long, env = "LAYERWIND_THREADS")]
    pub threads: Option<usize>,
    /// Probe lattice points per side.
    #[arg(long)]
    pub probe: Option<usize>,
    /// Emit whitespace-separated blocks per time level instead of CSV.
    #[arg(long)]
    pub gnuplot: bool,
}

impl RunArgs {
    /// Merges flags over the preset or config file.
    pub fn resolve(&self, default: Preset) -> Result<RunConfig, CliError> {
        let mut cfg = match (&self.preset, &self.config) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "--preset and --config are exclusive".into(),
                ))
            }
            (Some(p), None) => RunConfig::from_preset(p.parse()?),
            (None, Some(path)) => RunConfig::from_file(path)?,
            (None, None) => RunConfig::from_preset(default),
        };
        if let Some(s) = &self.scheme {
            cfg.scheme = Some(
                s.parse()
                    .map_err(|e: layerwind::Error| CliError::Config(e.to_string()))?,
            );
        }
        if let Some(e) = &self.eps {
            cfg.eps = Some(parse_eps_list(e)?);
        }
        if let Some(n) = &self.n {
            cfg.n = Some(parse_size_list(n)?);
        }
        if let Some(m) = &self.m {
            cfg.m = Some(parse_size_list(m)?);
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(p) = self.probe {
            cfg.probe = p;
        }
        if cfg.probe < 2 {
            return Err(CliError::Config("--probe must be at least 2".into()));
        }
        Ok(cfg)
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let args = match &cli.command {
        Command::Solve(a)
        | Command::Converge(a)
        | Command::FluidParticle(a)
        | Command::Check(a) => a,
    };
    let threads = match args.threads {
        Some(0) => return Err(CliError::Config("--threads must be positive".into())),
        Some(k) => k,
        None => std::thread::available_parallelism().map_or(1, usize::from),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} threads: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Solve(a) => solve(&a.resolve(Preset::Smooth)?, a.gnuplot),
        Command::Converge(a) => converge(&a.resolve(Preset::Table(3))?),
        Command::FluidParticle(a) => fluid_particle(&a.resolve(Preset::FluidParticle)?, a.gnuplot),
        Command::Check(a) => check(&a.resolve(Preset::Smooth)?),
    })
}

/// Seventeen significant digits, lowercase `e`, two-digit signed exponent.
pub fn fmt17(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}").to_lowercase();
    }
    let s = format!("{v:.16e}");
    let (mant, exp) = s
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn render(points: impl Iterator<Item = (usize, Vec<f64>)>, header: &str, gnuplot: bool) -> String {
    let mut s = String::new();
    if !gnuplot {
        s.push_str(header);
        s.push('\n');
    }
    let mut level = None;
    for (j, row) in points {
        if gnuplot && level.is_some_and(|l| l != j) {
            s.push('\n');
        }
        level = Some(j);
        let cells: Vec<String> = row.into_iter().map(fmt17).collect();
        s.push_str(&cells.join(if gnuplot { " " } else { "," }));
        s.push('\n');
    }
    s
}

fn render_grid(g: &GridFunction, gnuplot: bool) -> String {
    let mesh = g.mesh();
    let xs = mesh.space.nodes();
    let ts = mesh.time.nodes();
    let points = ts.iter().enumerate().flat_map(move |(j, &t)| {
        xs.iter()
            .enumerate()
            .map(move |(i, &x)| (j, vec![x, t, g.get(i, j)]))
    });
    render(points, "x,t,value", gnuplot)
}

fn solve(cfg: &RunConfig, gnuplot: bool) -> Result<(), CliError> {
    let eps = cfg.single_eps()?;
    let (n, m) = cfg.single_size()?;
    let grid = match cfg.preset() {
        Some(Preset::Table(k)) => table_runner(k)?.solve(eps, n, m)?,
        Some(Preset::FluidParticle) => {
            return Err(CliError::Config(
                "use the fluid-particle command for the full pipeline".into(),
            ))
        }
        _ => solve_scheme(&cfg.problem(eps)?, cfg.scheme_kind(), n, m, &cfg.mesh)?,
    };
    emit(cfg.out.as_deref(), &render_grid(&grid, gnuplot))
}

fn converge(cfg: &RunConfig) -> Result<(), CliError> {
    let eps = cfg.eps_list();
    let n = cfg.n_list()?;
    let table = match cfg.preset() {
        Some(Preset::Table(k)) => build_table(&table_runner(k)?, &eps, &n)?,
        Some(Preset::FluidParticle) => {
            return Err(CliError::Config(
                "converge works on a table preset or a single problem".into(),
            ))
        }
        _ => {
            for &e in &eps {
                cfg.problem(e)?;
            }
            let kind = cfg.scheme_kind();
            let runner = |e: f64, n: usize, m: usize| {
                let p = cfg
                    .problem(e)
                    .map_err(|err| layerwind::Error::Parameter(err.to_string()))?;
                solve_scheme(&p, kind, n, m, &cfg.mesh)
            };
            build_table(&runner, &eps, &n)?
        }
    };
    emit(cfg.out.as_deref(), &table.to_csv())
}

fn fluid_particle(cfg: &RunConfig, gnuplot: bool) -> Result<(), CliError> {
    if cfg.preset().is_some_and(|p| p != Preset::FluidParticle) {
        return Err(CliError::Config(
            "fluid-particle needs the fluid-particle preset or a config file".into(),
        ));
    }
    let eps = cfg.single_eps()?;
    let (n, m) = cfg.single_size()?;
    let fp = cfg.fluid_at(eps);
    let sol = solve_fluid_particle(&fp, n, m)?;
    let exact = fp.constant_speed().is_some();
    let k = cfg.probe;
    let (l, t) = (fp.length, fp.horizon);
    let mut rows = Vec::with_capacity(k * k);
    let mut max_err: f64 = 0.0;
    for j in 0..k {
        let tj = t * j as f64 / (k - 1) as f64;
        for i in 0..k {
            let xi = l * i as f64 / (k - 1) as f64;
            let v = sol.field.eval(xi, tj)?;
            let mut row = vec![xi, tj, v];
            if exact {
                let e = fp
                    .exact_constant_speed(xi, tj)
                    .expect("constant speed has a closed form");
                max_err = max_err.max((v - e).abs());
                row.push(e);
            }
            rows.push((j, row));
        }
    }
    let header = if exact {
        "x,t,value,exact"
    } else {
        "x,t,value"
    };
    emit(
        cfg.out.as_deref(),
        &render(rows.into_iter(), header, gnuplot),
    )?;
    for (name, warnings) in [
        ("P", &sol.p.warnings),
        ("I_L", &sol.i_left.warnings),
        ("I_R", &sol.i_right.warnings),
    ] {
        for w in warnings {
            eprintln!("warning ({name}): {w}");
        }
    }
    if exact {
        eprintln!(
            "max |field - exact| on {k}x{k} probe lattice (eps = {}, N = {n}, M = {m}): {}",
            fmt_eps(eps),
            fmt17(max_err)
        );
    }
    Ok(())
}

fn check(cfg: &RunConfig) -> Result<(), CliError> {
    let eps = cfg.single_eps()?;
    let p = cfg.problem(eps)?;
    let r = check_compatibility(&p, DEFAULT_COMPAT_TOL)?;
    let class = match r.classification {
        Smoothness::C2Smooth => "C2-smooth",
        Smoothness::C1Only => "C1-only",
        Smoothness::C0Only => "C0-only",
        Smoothness::Discontinuous => "discontinuous",
    };
    let mut s = String::new();
    let _ = writeln!(s, "r0,{}", fmt17(r.r0));
    let _ = writeln!(s, "r1,{}", fmt17(r.r1));
    let _ = writeln!(s, "r2,{}", fmt17(r.r2));
    let _ = writeln!(s, "classification,{class}");
    emit(cfg.out.as_deref(), &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_format() {
        assert_eq!(fmt17(1.0), "1.0000000000000000e+00");
        assert_eq!(fmt17(-0.25), "-2.5000000000000000e-01");
        assert_eq!(fmt17(1e-300), "1.0000000000000000e-300");
        let v = 0.1 + 0.2;
        assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn gnuplot_blocks_are_separated_by_blank_lines() {
        let rows = vec![
            (0, vec![0.0, 0.0, 1.0]),
            (0, vec![1.0, 0.0, 2.0]),
            (1, vec![0.0, 1.0, 3.0]),
        ];
        let s = render(rows.into_iter(), "x,t,value", true);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "");
        assert!(lines[0].contains(' ') && !lines[0].contains(','));
    }
}
