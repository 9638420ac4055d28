//! Subcommands behind the `blstab` binary.
//!
//! Every numeric flag may also come from a JSON config file (`--config`)
//! whose keys mirror the long flag names with underscores; flags given on
//! the command line win.

use crate::error::{Error, Result};
use crate::heat::{build_profile, solve_heat_cn, Convention, HalfLineGrid, WallTrace};
use crate::interior::DiracTrace;
use crate::orr_sommerfeld::{expansion_study, DEFAULT_NU_HATS};
use crate::output::{fmt_f64, CsvHeader};
use crate::shooting::{newton_refine, refine_sweep, write_refined_csv, ShootingConfig};
use crate::spectral::{
    most_unstable, rayleigh_spectrum, sweep_growth, time_grid, RayleighProblem, SweepTemplate,
    DEFAULT_UNSTABLE_THRESHOLD,
};
use crate::Complex64;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_STABLE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "blstab", version, about = "Boundary-layer stability of a heat-driven Couette layer")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommonArgs {
    /// JSON file with default values for any flag
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Time (single-time commands)
    #[arg(long, global = true)]
    pub t: Option<f64>,
    /// Interior wavenumber
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Rayleigh wavenumber [default: sqrt(0.1)]
    #[arg(long, global = true)]
    pub alpha_ray: Option<f64>,
    /// Truncation height
    #[arg(long, global = true)]
    pub y0: Option<f64>,
    /// Mesh width (per-command default)
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Crank-Nicolson step for the profile cross-check
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// wall-anchored | claim-literal
    #[arg(long, global = true)]
    pub convention: Option<Convention>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps (0 = all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// `matrix` or an explicit `re,im`
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// RK4 steps from Y0 to the wall
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Sweep start time
    #[arg(long, global = true)]
    pub t_start: Option<f64>,
    /// Sweep end time
    #[arg(long, global = true)]
    pub t_end: Option<f64>,
    /// Sweep time step
    #[arg(long, global = true)]
    pub t_step: Option<f64>,
    /// Rescaled viscosities for the Orr-Sommerfeld study
    #[arg(long, global = true, value_delimiter = ',')]
    pub nu_hat: Option<Vec<f64>>,
    /// Sweep: also refine each unstable point by shooting
    #[arg(long, global = true)]
    pub refine: bool,
    /// Imaginary-part threshold separating genuine modes
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Boundary-layer profile V_s(t, Y) -> profile.csv
    Profile,
    /// Full Rayleigh spectrum -> spectrum.csv
    Spectrum,
    /// Newton shooting refinement -> eigenpair.csv, eigenvalue.json
    Shoot,
    /// Growth-rate curve over a time range -> sweep.csv
    Sweep,
    /// Orr-Sommerfeld scaling study -> expansion.json
    Os,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Spectrum => "spectrum",
            Command::Shoot => "shoot",
            Command::Sweep => "sweep",
            Command::Os => "os",
        }
    }

    fn default_h(self) -> f64 {
        match self {
            Command::Profile => 0.01,
            Command::Sweep => 0.05,
            _ => 0.02,
        }
    }
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub t: Option<f64>,
    pub alpha: f64,
    pub alpha_ray: f64,
    pub grid: HalfLineGrid,
    pub dt: f64,
    pub convention: Convention,
    pub out: PathBuf,
    pub jobs: usize,
    pub seed: Seed,
    pub steps: usize,
    pub t_range: (f64, f64, f64),
    pub nu_hat: Vec<f64>,
    pub threshold: f64,
    pub refine: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seed {
    Matrix,
    Explicit(Complex64),
}

impl std::str::FromStr for Seed {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "matrix" {
            return Ok(Seed::Matrix);
        }
        let (re, im) = s
            .split_once(',')
            .ok_or_else(|| Error::invalid("seed", format!("expected `matrix` or `re,im`, got `{s}`")))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| Error::invalid("seed", e.to_string()));
        Ok(Seed::Explicit(Complex64::new(parse(re)?, parse(im)?)))
    }
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Merges command-line flags over an optional config file and defaults.
    pub fn resolve(command: Command, cli: &CommonArgs) -> Result<Self> {
        let file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str::<CommonArgs>(&text)
                    .map_err(|e| Error::invalid("config", e.to_string()))?
            }
            None => CommonArgs::default(),
        };
        macro_rules! pick {
            ($f:ident) => {
                cli.$f.clone().or(file.$f.clone())
            };
        }
        let t = pick!(t).map(|t| positive("t", t)).transpose()?;
        let y0 = positive("y0", pick!(y0).unwrap_or(30.0))?;
        let h = positive("h", pick!(h).unwrap_or(command.default_h()))?;
        let steps = pick!(steps).unwrap_or(30_000);
        if steps == 0 {
            return Err(Error::invalid("steps", "must be positive"));
        }
        let nu_hat = pick!(nu_hat).unwrap_or_else(|| DEFAULT_NU_HATS.to_vec());
        for v in &nu_hat {
            positive("nu_hat", *v)?;
        }
        let seed = match pick!(seed) {
            Some(s) => s.parse()?,
            None => Seed::Matrix,
        };
        let t_range = (
            positive("t_start", pick!(t_start).unwrap_or(0.5))?,
            positive("t_end", pick!(t_end).unwrap_or(16.0))?,
            positive("t_step", pick!(t_step).unwrap_or(0.1))?,
        );
        if t_range.1 < t_range.0 {
            return Err(Error::invalid("t_end", "must not precede t_start"));
        }
        Ok(Self {
            command,
            t,
            alpha: positive("alpha", pick!(alpha).unwrap_or(1.0))?,
            alpha_ray: positive("alpha_ray", pick!(alpha_ray).unwrap_or_else(crate::default_alpha_ray))?,
            grid: HalfLineGrid::new(y0, h)?,
            dt: positive("dt", pick!(dt).unwrap_or(crate::heat::DEFAULT_DT))?,
            convention: pick!(convention).unwrap_or_default(),
            out: pick!(out).unwrap_or_else(|| PathBuf::from(".")),
            jobs: pick!(jobs).unwrap_or(0),
            seed,
            steps,
            t_range,
            nu_hat,
            threshold: positive("threshold", pick!(threshold).unwrap_or(DEFAULT_UNSTABLE_THRESHOLD))?,
            refine: cli.refine || file.refine,
        })
    }

    fn require_t(&self) -> std::result::Result<f64, Failure> {
        self.t.ok_or_else(|| Failure::Usage(format!("`{}` requires --t", self.command.name())))
    }

    fn shooting(&self) -> ShootingConfig {
        ShootingConfig {
            y0: self.grid.y0,
            steps: self.steps,
            ..Default::default()
        }
    }

    fn header(&self) -> CsvHeader {
        let mut h = CsvHeader::new().with("command", self.command.name());
        if let Some(t) = self.t {
            h = h.with_f64("t", t);
        }
        h.with_f64("alpha", self.alpha)
            .with_f64("alpha_ray", self.alpha_ray)
            .with_f64("Y0", self.grid.y0)
            .with_f64("h", self.grid.h)
            .with_f64("dt", self.dt)
            .with("convention", self.convention.name())
            .with("steps", self.steps)
            .with_f64("threshold", self.threshold)
            .with("seed", self.seed_label())
            .with("nu_hat", self.nu_hat.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","))
    }

    fn seed_label(&self) -> String {
        match self.seed {
            Seed::Matrix => "matrix".into(),
            Seed::Explicit(c) => format!("{},{}", fmt_f64(c.re), fmt_f64(c.im)),
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Stable,
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => Failure::Usage(e.to_string()),
            other => Failure::Numerical(other),
        }
    }
}

/// Runs one subcommand and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = RunConfig::resolve(cli.command, &cli.common)
        .map_err(Failure::from)
        .and_then(|cfg| {
            std::fs::create_dir_all(&cfg.out).map_err(|e| Failure::Numerical(e.into()))?;
            match cfg.command {
                Command::Profile => cmd_profile(&cfg),
                Command::Spectrum => cmd_spectrum(&cfg),
                Command::Shoot => cmd_shoot(&cfg),
                Command::Sweep => cmd_sweep(&cfg),
                Command::Os => cmd_os(&cfg),
            }
        });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: blstab <profile|spectrum|shoot|sweep|os> --t <T> [options]; see --help");
            EXIT_USAGE
        }
        Err(Failure::Stable) => {
            println!("STABLE");
            EXIT_STABLE
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e}");
            EXIT_NUMERICAL
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn trace(cfg: &RunConfig) -> Result<DiracTrace> {
    DiracTrace::new(cfg.alpha)
}

fn problem(cfg: &RunConfig, t: f64) -> Result<RayleighProblem> {
    let profile = build_profile(&trace(cfg)?, t, cfg.grid, cfg.convention)?;
    RayleighProblem::new(cfg.alpha_ray, profile)
}

fn fmt_c(c: Complex64) -> String {
    let sign = if c.im.is_sign_negative() { "" } else { "+" };
    format!("{}{sign}{}i", fmt_f64(c.re), fmt_f64(c.im))
}

fn cmd_profile(cfg: &RunConfig) -> CmdResult {
    let t = cfg.require_t()?;
    let tr = trace(cfg)?;
    let profile = build_profile(&tr, t, cfg.grid, cfg.convention)?;
    profile.save_csv(&cfg.out.join("profile.csv"), &cfg.header())?;
    let cn = solve_heat_cn(&tr, cfg.grid, t, cfg.dt)?;
    let offset = cfg.convention.offset(tr.value(t));
    let cn_gap = cn.w.iter().zip(&profile.v).fold(0.0_f64, |m, (w, v)| m.max((w - (v - offset)).abs()));
    let (lo, hi) = profile.range();
    println!("far_field={}", fmt_f64(profile.far_field));
    println!("V_range=[{}, {}]", fmt_f64(lo), fmt_f64(hi));
    println!("inflection={}", profile.has_inflection(1e-10));
    println!("cn_gap={}", fmt_f64(cn_gap));
    Ok(())
}

fn cmd_spectrum(cfg: &RunConfig) -> CmdResult {
    let t = cfg.require_t()?;
    let spectrum = rayleigh_spectrum(&problem(cfg, t)?, cfg.threshold)?;
    spectrum.save_csv(&cfg.out.join("spectrum.csv"), &cfg.header())?;
    match most_unstable(&spectrum) {
        Some(c) => {
            println!("UNSTABLE c={}", fmt_c(c));
            Ok(())
        }
        None => Err(Failure::Stable),
    }
}

#[derive(Serialize)]
struct EigenvalueRecord {
    t: f64,
    alpha_ray: f64,
    c: [f64; 2],
    seed: [f64; 2],
    psi0_residual: f64,
    dpsi0: [f64; 2],
    iterations: usize,
}

fn seed_for(cfg: &RunConfig, problem: &RayleighProblem) -> std::result::Result<Complex64, Failure> {
    match cfg.seed {
        Seed::Explicit(c) => Ok(c),
        Seed::Matrix => most_unstable(&rayleigh_spectrum(problem, cfg.threshold)?).ok_or(Failure::Stable),
    }
}

fn cmd_shoot(cfg: &RunConfig) -> CmdResult {
    let t = cfg.require_t()?;
    let problem = problem(cfg, t)?;
    let seed = seed_for(cfg, &problem)?;
    let pair = newton_refine(seed, &problem, &cfg.shooting())?;
    pair.save_csv(&cfg.out.join("eigenpair.csv"), &cfg.header())?;
    let record = EigenvalueRecord {
        t,
        alpha_ray: cfg.alpha_ray,
        c: [pair.c.re, pair.c.im],
        seed: [seed.re, seed.im],
        psi0_residual: pair.psi0_residual,
        dpsi0: [pair.dpsi0.re, pair.dpsi0.im],
        iterations: pair.iterations,
    };
    write_json(&cfg.out.join("eigenvalue.json"), &record)?;
    println!("seed={}", fmt_c(seed));
    println!("c={}", fmt_c(pair.c));
    println!("|psi(0,c)|={:e}", pair.psi0_residual);
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig) -> CmdResult {
    let (start, end, step) = cfg.t_range;
    let times = time_grid(start, end, step);
    let template = SweepTemplate {
        alpha_ray: cfg.alpha_ray,
        grid: cfg.grid,
        convention: cfg.convention,
        threshold: cfg.threshold,
    };
    let trace = trace(cfg)?;
    let result = sweep_growth(&trace, &times, &template, cfg.jobs)?;
    for p in result.failures() {
        eprintln!("t={}: {}", p.t, p.error.as_deref().unwrap_or(""));
    }
    let header = cfg
        .header()
        .with_f64("t_start", start)
        .with_f64("t_end", end)
        .with_f64("t_step", step);
    result.save_csv(&cfg.out.join("sweep.csv"), &header)?;
    if cfg.refine {
        let refined = refine_sweep(&trace, &result, &template, &cfg.shooting());
        for p in refined.iter().filter(|p| p.error.is_some()) {
            eprintln!("refine t={}: {}", p.t, p.error.as_deref().unwrap_or(""));
        }
        let file = std::fs::File::create(cfg.out.join("sweep_refined.csv")).map_err(Error::from)?;
        write_refined_csv(&refined, std::io::BufWriter::new(file), &header).map_err(Error::from)?;
        let worst = refined
            .iter()
            .filter_map(|p| p.c.map(|c| (c - p.c_matrix).norm()))
            .fold(0.0, f64::max);
        println!("refined={} max|c_shoot-c_matrix|={:e}", refined.iter().filter(|p| p.c.is_some()).count(), worst);
    }
    match result.onset() {
        Some(t) => println!("onset_t={}", fmt_f64(t)),
        None => println!("onset_t=none"),
    }
    if let Some(t) = result.argmax_in(start, end) {
        println!("argmax_t={}", fmt_f64(t));
    }
    Ok(())
}

fn cmd_os(cfg: &RunConfig) -> CmdResult {
    let t = cfg.require_t()?;
    let problem = problem(cfg, t)?;
    let seed = seed_for(cfg, &problem)?;
    let shooting = cfg.shooting();
    let pair = newton_refine(seed, &problem, &shooting)?;
    let report = expansion_study(&problem, pair.c, &cfg.nu_hat, &shooting)?;
    report.save_json(&cfg.out.join("expansion.json"))?;
    println!("c_ray={}", fmt_c(pair.c));
    for (nu, c) in report.nu_hat.iter().zip(&report.c_os) {
        println!("nu_hat={} c_os={}", fmt_f64(*nu), fmt_c(Complex64::new(c[0], c[1])));
    }
    println!("fitted_exponent={:.6}", report.fitted_exponent);
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_parsing() {
        assert_eq!("matrix".parse::<Seed>().unwrap(), Seed::Matrix);
        assert_eq!("0.1,-0.2".parse::<Seed>().unwrap(), Seed::Explicit(Complex64::new(0.1, -0.2)));
        assert!("0.1".parse::<Seed>().is_err());
    }

    #[test]
    fn resolve_defaults_and_validation() {
        let cfg = RunConfig::resolve(Command::Spectrum, &CommonArgs::default()).unwrap();
        assert_eq!(cfg.grid.n, 1500);
        assert_eq!(cfg.alpha, 1.0);
        assert_eq!(cfg.convention, Convention::WallAnchored);
        let bad = CommonArgs {
            alpha: Some(-1.0),
            ..Default::default()
        };
        assert!(RunConfig::resolve(Command::Spectrum, &bad).is_err());
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"t": 2.0, "h": 0.05, "convention": "claim-literal"}"#).unwrap();
        let args = CommonArgs {
            config: Some(path),
            t: Some(3.0),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Command::Spectrum, &args).unwrap();
        assert_eq!(cfg.t, Some(3.0));
        assert_eq!(cfg.grid.h, 0.05);
        assert_eq!(cfg.convention, Convention::ClaimLiteral);
    }
}
