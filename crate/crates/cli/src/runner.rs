//! Shared machinery for the experiment commands: grid and field
//! construction from a config, and a per-process cache of the expensive
//! eigendecompositions keyed by spectrum descriptor.

use anyhow::{anyhow, bail, Result};
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use crate::config::{RunConfig, SpectrumSource, UseCase};
use qlbm::carleman::carleman_matrix_first;
use qlbm::lbm::{init_kolmogorov, init_lid, DistributionField, LatticeGrid};
use qlbm::linsys::{hermitize_and_pad, HermitianEmbedding, SpectralDecomposition, TimeBlockSystem};
use qlbm::spectra::{
    self, cache_key, read_cache, spectrum_from_decomposition, substituted_spectrum, write_cache,
    Spectrum, SpectrumDescriptor, SpectrumKind,
};

/// Embedded system plus its decomposition and exact spectrum.
pub struct PreparedSystem {
    pub grid: LatticeGrid,
    pub initial: DistributionField,
    pub embedding: HermitianEmbedding,
    pub decomposition: SpectralDecomposition,
    pub exact_spectrum: Spectrum,
    pub cache_key: String,
}

pub struct ExperimentContext {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    prepared: Mutex<HashMap<String, Arc<PreparedSystem>>>,
    used_cache_keys: Mutex<Vec<String>>,
}

impl ExperimentContext {
    pub fn new(config: RunConfig, out_dir: PathBuf, cache_dir: Option<PathBuf>) -> Self {
        ExperimentContext {
            config,
            out_dir,
            cache_dir,
            prepared: Mutex::new(HashMap::new()),
            used_cache_keys: Mutex::new(Vec::new()),
        }
    }

    pub fn grid(&self, nx: usize, ny: usize, v_lid: [f64; 2]) -> Result<LatticeGrid> {
        Ok(LatticeGrid::new(
            nx,
            ny,
            self.config.use_case.boundary(v_lid),
        )?)
    }

    /// Initial distribution for a grid according to the use case.
    pub fn initial_field(&self, grid: &LatticeGrid) -> Result<DistributionField> {
        let init = self.config.init_params();
        let field = match self.config.use_case {
            UseCase::Pbc | UseCase::Bounceback => {
                init_kolmogorov(grid, init.a_x, init.a_y, init.k_x, init.k_y)?
            }
            UseCase::Liddriven => match grid.boundary {
                qlbm::lbm::Boundary::LidDriven { v_lid } => init_lid(grid, v_lid)?,
                _ => unreachable!("lid-driven use case builds lid-driven grids"),
            },
        };
        Ok(field)
    }

    fn descriptor(
        &self,
        nx: usize,
        ny: usize,
        omega: f64,
        n_steps: usize,
        v_lid: [f64; 2],
    ) -> SpectrumDescriptor {
        SpectrumDescriptor {
            nx,
            ny,
            boundary: self.config.use_case.boundary(v_lid),
            omega,
            n_steps,
            kind: SpectrumKind::Exact,
        }
    }

    /// Build (or fetch) the embedded system for a lattice size and sweep
    /// point. The eigendecomposition dominates the cost, so results are
    /// memoized for the lifetime of the process and eigenvalues are
    /// mirrored to the on-disk spectrum cache when one is configured.
    pub fn prepared(
        &self,
        nx: usize,
        ny: usize,
        omega: f64,
        n_steps: usize,
        v_lid: [f64; 2],
    ) -> Result<Arc<PreparedSystem>> {
        let descriptor = self.descriptor(nx, ny, omega, n_steps, v_lid);
        let key = descriptor.canonical_string();
        {
            let cache = self.prepared.lock().unwrap();
            if let Some(hit) = cache.get(&key) {
                return Ok(Arc::clone(hit));
            }
        }
        let grid = self.grid(nx, ny, v_lid)?;
        let initial = self.initial_field(&grid)?;
        let carleman = carleman_matrix_first(&grid, omega)?;
        let system = TimeBlockSystem::assemble(&carleman, &initial.values, n_steps)?;
        let embedding = hermitize_and_pad(&system);
        if embedding.dim() > spectra::DEFAULT_DIMENSION_CAP {
            bail!(
                "{}",
                qlbm::Error::DimensionCap {
                    dim: embedding.dim(),
                    cap: spectra::DEFAULT_DIMENSION_CAP,
                }
            );
        }
        let decomposition = SpectralDecomposition::of_embedding(&embedding);
        let exact_spectrum = spectrum_from_decomposition(&decomposition, descriptor.clone());
        let disk_key = cache_key(&descriptor);
        if let Some(dir) = &self.cache_dir {
            if read_cache(dir, &descriptor)?.is_none() {
                write_cache(dir, &exact_spectrum)?;
            }
        }
        self.used_cache_keys.lock().unwrap().push(disk_key.clone());
        let entry = Arc::new(PreparedSystem {
            grid,
            initial,
            embedding,
            decomposition,
            exact_spectrum,
            cache_key: disk_key,
        });
        self.prepared
            .lock()
            .unwrap()
            .insert(key, Arc::clone(&entry));
        Ok(entry)
    }

    /// Spectrum that drives a run: the system's own, or one substituted
    /// from a smaller lattice (same boundary, omega and step count).
    pub fn run_spectrum(
        &self,
        target: &PreparedSystem,
        omega: f64,
        n_steps: usize,
        v_lid: [f64; 2],
    ) -> Result<Spectrum> {
        match &self.config.spectrum_source {
            SpectrumSource::Exact => Ok(target.exact_spectrum.clone()),
            SpectrumSource::Substituted { nx } => {
                let small_descriptor = self.descriptor(*nx, *nx, omega, n_steps, v_lid);
                let small = if let Some(dir) = &self.cache_dir {
                    read_cache(dir, &small_descriptor)?
                } else {
                    None
                };
                let small = match small {
                    Some(spectrum) => {
                        self.used_cache_keys
                            .lock()
                            .unwrap()
                            .push(cache_key(&small_descriptor));
                        spectrum
                    }
                    None => {
                        let prepared = self.prepared(*nx, *nx, omega, n_steps, v_lid)?;
                        prepared.exact_spectrum.clone()
                    }
                };
                Ok(substituted_spectrum(&small, target.exact_spectrum.source()))
            }
        }
    }

    pub fn used_cache_keys(&self) -> Vec<String> {
        let mut keys = self.used_cache_keys.lock().unwrap().clone();
        keys.sort();
        keys.dedup();
        keys
    }

    pub fn output_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// First lid velocity of the sweep, or zero for closed/periodic cases.
pub fn primary_velocity(config: &RunConfig) -> [f64; 2] {
    config.lid_velocities()[0]
}

pub fn spectrum_source_label(spectrum: &Spectrum) -> String {
    match spectrum.source().kind {
        SpectrumKind::Exact => "exact".to_string(),
        SpectrumKind::Substituted { source_nx, .. } => format!("substituted{source_nx}"),
    }
}

/// Map a qlbm error into anyhow with its display text preserved.
pub fn lift<T>(r: qlbm::Result<T>) -> Result<T> {
    r.map_err(|e| anyhow!("{e}"))
}
