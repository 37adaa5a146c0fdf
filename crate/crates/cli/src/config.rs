//! Run configuration: a single JSON document whose defaults reproduce
//! the standard benchmark setups.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

use qlbm::lbm::Boundary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UseCase {
    Pbc,
    Bounceback,
    Liddriven,
}

impl UseCase {
    pub fn label(&self) -> &'static str {
        match self {
            UseCase::Pbc => "pbc",
            UseCase::Bounceback => "bounceback",
            UseCase::Liddriven => "liddriven",
        }
    }

    pub fn boundary(&self, v_lid: [f64; 2]) -> Boundary {
        match self {
            UseCase::Pbc => Boundary::Periodic,
            UseCase::Bounceback => Boundary::BounceBack,
            UseCase::Liddriven => Boundary::LidDriven { v_lid },
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InitParams {
    pub a_x: f64,
    pub a_y: f64,
    pub k_x: f64,
    pub k_y: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumSource {
    #[default]
    Exact,
    Substituted {
        nx: usize,
    },
}

/// One experiment description; sweeps are cartesian products of the list
/// fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub use_case: UseCase,
    pub nx: usize,
    #[serde(default)]
    pub ny: Option<usize>,
    #[serde(default = "default_omega")]
    pub omega: Vec<f64>,
    #[serde(default = "default_order")]
    pub carleman_order: u8,
    #[serde(default = "default_n_steps")]
    pub n_steps: Vec<usize>,
    #[serde(default = "default_t0")]
    pub t0: Vec<usize>,
    #[serde(default = "default_n_clock")]
    pub n_clock: Vec<usize>,
    #[serde(default = "default_c_p")]
    pub c_p: Vec<f64>,
    /// Lid velocities to sweep (lid-driven only).
    #[serde(default)]
    pub v_lid: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub spectrum_source: SpectrumSource,
    /// Sinusoidal initialization amplitudes; defaults depend on use_case.
    #[serde(default)]
    pub init: Option<InitParams>,
    /// Simulation length for the linearization-error study.
    #[serde(default = "default_evolution_steps")]
    pub evolution_steps: usize,
    /// Lattice sizes for the spectra command (the 4x4 reference is always
    /// included).
    #[serde(default)]
    pub spectra_sizes: Option<Vec<usize>>,
    /// Also write the assembled sparse matrices in triplet text form.
    #[serde(default)]
    pub export_matrices: bool,
    #[serde(default)]
    pub out_dir: Option<String>,
}

fn default_omega() -> Vec<f64> {
    vec![1.1, 1.5]
}

fn default_order() -> u8 {
    1
}

fn default_n_steps() -> Vec<usize> {
    vec![1]
}

fn default_t0() -> Vec<usize> {
    vec![0]
}

fn default_n_clock() -> Vec<usize> {
    vec![7]
}

fn default_c_p() -> Vec<f64> {
    vec![1.0]
}

fn default_evolution_steps() -> usize {
    200
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny() < 2 {
            bail!("lattice must be at least 2x2");
        }
        if !(self.carleman_order == 1 || self.carleman_order == 2) {
            bail!("carleman_order must be 1 or 2");
        }
        if self.omega.is_empty() || self.n_steps.is_empty() || self.n_clock.is_empty() {
            bail!("omega, n_steps and n_clock sweeps must be nonempty");
        }
        for &w in &self.omega {
            if !(w > 0.0 && w < 2.0) {
                bail!("omega {w} outside the stable range (0, 2)");
            }
        }
        for &n in &self.n_steps {
            if n < 1 {
                bail!("n_steps entries must be >= 1");
            }
        }
        for &n in &self.n_clock {
            if !(1..=24).contains(&n) {
                bail!("n_clock entries must lie in 1..=24");
            }
        }
        for &c in &self.c_p {
            if c <= 0.0 || c.is_nan() {
                bail!("c_p entries must be positive");
            }
        }
        if self.use_case != UseCase::Liddriven {
            if let Some(v) = &self.v_lid {
                if v.iter().any(|v| *v != [0.0, 0.0]) {
                    bail!("v_lid is only meaningful for the liddriven use case");
                }
            }
        }
        Ok(())
    }

    pub fn ny(&self) -> usize {
        self.ny.unwrap_or(self.nx)
    }

    /// Lid velocities to sweep; a single zero entry for the closed cases.
    pub fn lid_velocities(&self) -> Vec<[f64; 2]> {
        match self.use_case {
            UseCase::Liddriven => self.v_lid.clone().unwrap_or_else(|| vec![[0.0, 0.075]]),
            _ => vec![[0.0, 0.0]],
        }
    }

    /// Initialization parameters, defaulting to the standard benchmark
    /// values for the use case.
    pub fn init_params(&self) -> InitParams {
        self.init.unwrap_or(match self.use_case {
            UseCase::Pbc | UseCase::Bounceback => InitParams {
                a_x: 0.3,
                a_y: 0.3,
                k_x: 1.0,
                k_y: 1.0,
            },
            UseCase::Liddriven => InitParams {
                a_x: 0.0,
                a_y: 0.225,
                k_x: 0.0,
                k_y: 0.0,
            },
        })
    }
}
