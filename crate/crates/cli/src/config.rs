use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use couette_core::bifurcate::SolverConfig;
use couette_core::profile::ProfileParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Settings shared by every subcommand. Each field may also come from the
/// `--config` TOML file; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Nodes per panel of the band rule.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Mode blocks used by spectral checks.
    #[arg(long, global = true)]
    pub modes: Option<usize>,
    #[arg(long, global = true)]
    pub tol_fixedpoint: Option<f64>,
    #[arg(long, global = true)]
    pub tol_quad: Option<f64>,
    #[arg(long, global = true)]
    pub tol_lambda1: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Equispaced points per period in x.
    #[arg(long, global = true)]
    pub nx: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub kappas: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Settings {
    /// Fills unset fields from `file`.
    pub fn merged(mut self, file: Settings) -> Self {
        overlay!(self, file; epsilon, kappa, m, sigma, gamma, grid, modes, tol_fixedpoint,
            tol_quad, tol_lambda1, seed, nx, samples, points, sigmas, epsilons, kappas, out, format);
        self
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Validated settings with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub epsilon: f64,
    pub kappa: f64,
    pub m: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub grid: usize,
    pub modes: usize,
    pub tol_fixedpoint: f64,
    pub tol_quad: f64,
    pub tol_lambda1: f64,
    pub seed: u64,
    pub nx: usize,
    pub samples: usize,
    pub points: usize,
    pub sigmas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub kappas: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn resolve(s: Settings) -> Result<Self> {
        let d = SolverConfig::default();
        let cfg = Self {
            epsilon: s.epsilon.unwrap_or(1e-2),
            kappa: s.kappa.unwrap_or(0.01),
            m: s.m.unwrap_or(1),
            sigma: s.sigma.unwrap_or(1e-3),
            gamma: s.gamma.unwrap_or(0.5),
            grid: s.grid.unwrap_or(d.grid_order),
            modes: s.modes.unwrap_or(16),
            tol_fixedpoint: s.tol_fixedpoint.unwrap_or(d.fixed_point_tol),
            tol_quad: s.tol_quad.unwrap_or(d.quad_tol),
            tol_lambda1: s.tol_lambda1.unwrap_or(d.lambda1_tol),
            seed: s.seed.unwrap_or(0),
            nx: s.nx.unwrap_or(32),
            samples: s.samples.unwrap_or(100),
            points: s.points.unwrap_or(201),
            sigmas: s.sigmas.unwrap_or_else(|| vec![1e-2, 3e-3, 1e-3, 3e-4]),
            epsilons: s.epsilons.unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4]),
            kappas: s.kappas.unwrap_or_else(|| vec![0.01]),
            out: s.out,
            format: s.format,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        ProfileParams::new(self.epsilon, self.kappa)?;
        for (name, t) in [
            ("tol_fixedpoint", self.tol_fixedpoint),
            ("tol_quad", self.tol_quad),
            ("tol_lambda1", self.tol_lambda1),
        ] {
            if !(t > 0.0) {
                bail!("{name} must be positive, got {t}");
            }
        }
        if self.grid < 16 {
            bail!("grid must be at least 16, got {}", self.grid);
        }
        if self.m < 1 || self.m > self.modes {
            bail!("m must satisfy 1 <= m <= modes, got m = {}, modes = {}", self.m, self.modes);
        }
        if !(self.sigma >= 0.0) {
            bail!("sigma must be nonnegative, got {}", self.sigma);
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            bail!("gamma must lie in (0,1), got {}", self.gamma);
        }
        if self.nx < 2 * self.m + 2 {
            bail!("nx = {} cannot resolve mode m = {}", self.nx, self.m);
        }
        if self.points < 2 {
            bail!("points must be at least 2");
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ProfileParams> {
        Ok(ProfileParams::new(self.epsilon, self.kappa)?)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            grid_order: self.grid,
            quad_tol: self.tol_quad,
            fixed_point_tol: self.tol_fixedpoint,
            max_iter: 200,
            lambda1_tol: self.tol_lambda1,
        }
    }
}

/// Worker count for `sweep`: `COUETTE_WAVES_THREADS` capped by the machine.
pub fn worker_count() -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("COUETTE_WAVES_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n >= 1 => n.min(avail),
        _ => avail,
    }
}
