//! JSON run configuration.

use std::path::{Path, PathBuf};

use charwave::{from_physical, JumpMode, ProblemDefinition, Tolerances};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

fn zero_text() -> String {
    "0".into()
}

/// Problem block: either `a` and `b`, or the rod parameters `E`, `rho`, `S`, `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default, rename = "E")]
    pub e: Option<f64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default, rename = "S")]
    pub s: Option<f64>,
    #[serde(default, rename = "M")]
    pub m: Option<f64>,
    pub l: f64,
    #[serde(default)]
    pub v: f64,
    #[serde(default = "zero_text")]
    pub gamma: String,
    #[serde(default = "zero_text")]
    pub phi: String,
    #[serde(default = "zero_text")]
    pub psi: String,
    #[serde(default = "zero_text")]
    pub mu1: String,
    #[serde(default = "zero_text")]
    pub mu2: String,
    #[serde(default = "zero_text")]
    pub f: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub nt: usize,
    pub nx: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { nt: 101, nx: 101 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemBlock,
    pub horizon: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub jumps: JumpMode,
    /// Output directory, relative to the working directory.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if !(cfg.horizon > 0.0) {
            return Err(CliError::Config(format!("horizon must be positive, got {}", cfg.horizon)));
        }
        cfg.coefficients()?;
        Ok(cfg)
    }

    /// `(a, b)` from whichever parameter set is given.
    pub fn coefficients(&self) -> Result<(f64, f64), CliError> {
        let p = &self.problem;
        let direct = [p.a, p.b];
        let rod = [p.e, p.rho, p.s, p.m];
        let any_direct = direct.iter().any(Option::is_some);
        let any_rod = rod.iter().any(Option::is_some);
        match (any_direct, any_rod) {
            (true, false) => match (p.a, p.b) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(CliError::Config("both `a` and `b` are required".into())),
            },
            (false, true) => match (p.e, p.rho, p.s, p.m) {
                (Some(e), Some(rho), Some(s), Some(m)) => {
                    from_physical(e, rho, s, m).map_err(|e| CliError::Config(e.to_string()))
                }
                _ => Err(CliError::Config("all of `E`, `rho`, `S`, `M` are required".into())),
            },
            (true, true) => Err(CliError::Config("give either `a`, `b` or `E`, `rho`, `S`, `M`, not both".into())),
            (false, false) => Err(CliError::Config("missing `a`, `b` (or `E`, `rho`, `S`, `M`)".into())),
        }
    }

    pub fn definition(&self) -> Result<ProblemDefinition, CliError> {
        let (a, b) = self.coefficients()?;
        let p = &self.problem;
        Ok(ProblemDefinition {
            a,
            b,
            l: p.l,
            v: p.v,
            gamma: p.gamma.clone(),
            phi: p.phi.clone(),
            psi: p.psi.clone(),
            mu1: p.mu1.clone(),
            mu2: p.mu2.clone(),
            f: p.f.clone(),
            horizon: self.horizon,
            tolerances: self.tolerances,
            jumps: self.jumps.clone(),
        })
    }
}

/// Configuration text together with its digest.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub sha256: String,
    pub path: PathBuf,
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config = RunConfig::parse(text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok(LoadedConfig {
        config,
        sha256: format!("{:x}", Sha256::digest(&bytes)),
        path: path.to_path_buf(),
    })
}
