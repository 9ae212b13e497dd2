//! Run configuration and tolerance settings.
//!
//! Every tolerance used by the verification suite lives here and can be
//! overridden from the CLI or from a `key = value` config file.

use crate::{Error, Result};
use serde::Serialize;
use std::path::Path;

/// Numerical tolerances. Defaults are tuned for the closed-form catalog
/// surfaces, where jets are exact to machine precision.
#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    /// Unit-norm check for points on the sphere (analytic jets).
    pub tau_jet: f64,
    /// Linear-algebra thresholds (orthogonality, span membership).
    pub tau_lin: f64,
    /// Frame orthonormality and gauge alignment.
    pub tau_frame: f64,
    /// Minimality residual accepted for input surfaces.
    pub tau_min: f64,
    /// Relative singular-value threshold for rank decisions.
    pub tau_rank: f64,
    /// Step for the finite-difference jet oracle.
    pub fd_step: f64,
    /// Step for finite differences in cone coordinates (oracle shape operators).
    pub fd_cone_step: f64,
    /// Agreement demanded between closed-form and fd shape operators.
    pub oracle_tol: f64,
    /// Loop-closure residual per grid cell for surface-family integration.
    pub integration_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tau_jet: 1e-9,
            tau_lin: 1e-8,
            tau_frame: 1e-8,
            tau_min: 1e-7,
            tau_rank: 1e-6,
            fd_step: 1e-3,
            fd_cone_step: 1e-3,
            oracle_tol: 1e-4,
            integration_tol: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value > 0.0) {
            return Err(Error::Config(format!("tolerance {key} must be positive")));
        }
        match key {
            "tau_jet" => self.tau_jet = value,
            "tau_lin" => self.tau_lin = value,
            "tau_frame" => self.tau_frame = value,
            "tau_min" => self.tau_min = value,
            "tau_rank" => self.tau_rank = value,
            "fd_step" => self.fd_step = value,
            "fd_cone_step" => self.fd_cone_step = value,
            "oracle_tol" => self.oracle_tol = value,
            "integration_tol" => self.integration_tol = value,
            _ => return Err(Error::Config(format!("unknown tolerance '{key}'"))),
        }
        Ok(())
    }
}

/// Configuration of a verification run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub surface: String,
    pub seed: u64,
    pub samples: usize,
    pub thetas: Vec<f64>,
    pub grid: (usize, usize),
    pub equivariance: bool,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            surface: "equilateral-torus".to_string(),
            seed: 7,
            samples: 100,
            thetas: vec![0.0, 0.5, 1.0, 1.5],
            grid: (64, 64),
            equivariance: false,
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::Config("sample count must be >= 1".into()));
        }
        if self.grid.0 < 2 || self.grid.1 < 2 {
            return Err(Error::Config("grid must be at least 2x2".into()));
        }
        Ok(())
    }

    /// Applies `key = value` lines from a config file. Unknown keys are
    /// rejected; `tol.<name>` keys override individual tolerances.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Config(format!("line {}: {what}", lineno + 1));
            match key {
                "surface" => self.surface = value.to_string(),
                "seed" => self.seed = value.parse().map_err(|_| bad("bad seed"))?,
                "samples" => self.samples = value.parse().map_err(|_| bad("bad samples"))?,
                "equivariance" => {
                    self.equivariance = value.parse().map_err(|_| bad("bad equivariance"))?
                }
                "thetas" => {
                    self.thetas = value
                        .split(',')
                        .map(|t| t.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("bad theta list"))?;
                }
                "grid" => {
                    let (a, b) = value.split_once('x').ok_or_else(|| bad("grid must be AxB"))?;
                    self.grid = (
                        a.trim().parse().map_err(|_| bad("bad grid"))?,
                        b.trim().parse().map_err(|_| bad("bad grid"))?,
                    );
                }
                k if k.starts_with("tol.") => {
                    let v: f64 = value.parse().map_err(|_| bad("bad tolerance value"))?;
                    self.tolerances.set(&k[4..], v)?;
                }
                _ => return Err(bad(&format!("unknown key '{key}'"))),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_config_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "surface = boruvka-sphere").unwrap();
        writeln!(f, "seed = 42   # comment").unwrap();
        writeln!(f, "thetas = 0.0, 0.5").unwrap();
        writeln!(f, "grid = 32x16").unwrap();
        writeln!(f, "tol.tau_rank = 1e-5").unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_file(f.path()).unwrap();
        assert_eq!(cfg.surface, "boruvka-sphere");
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.grid, (32, 16));
        assert_eq!(cfg.thetas, vec![0.0, 0.5]);
        assert_eq!(cfg.tolerances.tau_rank, 1e-5);
    }

    #[test]
    fn rejects_unknown_key() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "bogus = 1").unwrap();
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_file(f.path()).is_err());
    }
}
