//! Eigenspectra of the embedded systems: histogram binning, the deviation
//! metric between lattice sizes, and spectrum substitution.
//!
//! Spectra of the Hermitian embeddings turn out to depend only weakly on
//! the lattice size, which lets a small lattice's spectrum drive the
//! rotation stage of the solver for a larger lattice. The `zeta` metric
//! quantifies the deviation: the fraction of a histogram's counts that
//! fall in bins empty in the reference histogram.

use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::lbm::Boundary;
use crate::linsys::{HermitianEmbedding, SpectralDecomposition};
use crate::{Error, Result};

/// Largest matrix dimension the dense eigensolver will accept.
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 14;

/// Histogram bin width used throughout: 3.5 / 2^7.
pub const DEFAULT_BIN_WIDTH: f64 = 3.5 / 128.0;

/// Whether a spectrum was computed on its own lattice or borrowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumKind {
    Exact,
    Substituted { source_nx: usize, source_ny: usize },
}

/// Identifies the system a spectrum belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumDescriptor {
    pub nx: usize,
    pub ny: usize,
    pub boundary: Boundary,
    pub omega: f64,
    pub n_steps: usize,
    pub kind: SpectrumKind,
}

impl SpectrumDescriptor {
    /// Canonical one-line form; used for cache keys and file headers.
    pub fn canonical_string(&self) -> String {
        let bc = match self.boundary {
            Boundary::Periodic => "pbc".to_string(),
            Boundary::BounceBack => "bounceback".to_string(),
            Boundary::LidDriven { v_lid } => {
                format!("liddriven[{},{}]", v_lid[0], v_lid[1])
            }
        };
        let kind = match self.kind {
            SpectrumKind::Exact => "exact".to_string(),
            SpectrumKind::Substituted {
                source_nx,
                source_ny,
            } => format!("substituted({source_nx}x{source_ny})"),
        };
        format!(
            "bc={};nx={};ny={};omega={};nt={};kind={}",
            bc, self.nx, self.ny, self.omega, self.n_steps, kind
        )
    }
}

/// Sorted eigenvalues of an embedded system.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    source: SpectrumDescriptor,
}

impl Spectrum {
    pub fn new(mut eigenvalues: Vec<f64>, source: SpectrumDescriptor) -> Self {
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Spectrum {
            eigenvalues,
            source,
        }
    }

    /// Ascending eigenvalues, with multiplicity.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn source(&self) -> &SpectrumDescriptor {
        &self.source
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("spectrum must not be empty")
    }

    /// Smallest strictly positive eigenvalue.
    pub fn lambda_min_positive(&self) -> Option<f64> {
        self.eigenvalues.iter().copied().find(|&l| l > 0.0)
    }
}

/// Full spectrum of an embedding via the dense solver (dimension-capped).
pub fn eigen_spectrum(
    embedding: &HermitianEmbedding,
    source: SpectrumDescriptor,
) -> Result<Spectrum> {
    eigen_spectrum_with_cap(embedding, source, DEFAULT_DIMENSION_CAP)
}

pub fn eigen_spectrum_with_cap(
    embedding: &HermitianEmbedding,
    source: SpectrumDescriptor,
    cap: usize,
) -> Result<Spectrum> {
    if embedding.dim() > cap {
        return Err(Error::DimensionCap {
            dim: embedding.dim(),
            cap,
        });
    }
    let decomp = SpectralDecomposition::of_embedding(embedding);
    Ok(Spectrum::new(decomp.sorted_eigenvalues(), source))
}

/// Spectrum extracted from an existing decomposition (no size check; the
/// decomposition has already been paid for).
pub fn spectrum_from_decomposition(
    decomp: &SpectralDecomposition,
    source: SpectrumDescriptor,
) -> Spectrum {
    Spectrum::new(decomp.sorted_eigenvalues(), source)
}

/// Binned counts of the positive half-spectrum; bin `k` covers
/// `[k w, (k+1) w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumHistogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl SpectrumHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Histogram of the strictly positive eigenvalues.
pub fn histogram(spectrum: &Spectrum, bin_width: f64) -> Result<SpectrumHistogram> {
    if !(bin_width > 0.0) {
        return Err(Error::InvalidBinWidth { bin_width });
    }
    let mut counts: Vec<u64> = Vec::new();
    for &l in spectrum.eigenvalues() {
        if l <= 0.0 {
            continue;
        }
        let bin = (l / bin_width).floor() as usize;
        if counts.len() <= bin {
            counts.resize(bin + 1, 0);
        }
        counts[bin] += 1;
    }
    Ok(SpectrumHistogram { bin_width, counts })
}

/// Fraction of `target`'s counts that fall in bins empty in `reference`.
pub fn zeta(target: &SpectrumHistogram, reference: &SpectrumHistogram) -> Result<f64> {
    check_binning(target, reference)?;
    let total = target.total();
    if total == 0 {
        return Ok(0.0);
    }
    let mut missing = 0u64;
    for (bin, &count) in target.counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let ref_count = reference.counts.get(bin).copied().unwrap_or(0);
        if ref_count == 0 {
            missing += count;
        }
    }
    Ok(missing as f64 / total as f64)
}

/// Fraction of `target`'s occupied bins that are empty in `reference`
/// (each spectral line weighted once, however many eigenvalues share it).
pub fn zeta_bins(target: &SpectrumHistogram, reference: &SpectrumHistogram) -> Result<f64> {
    check_binning(target, reference)?;
    let occupied = target.counts.iter().filter(|&&c| c > 0).count();
    if occupied == 0 {
        return Ok(0.0);
    }
    let missing = target
        .counts
        .iter()
        .enumerate()
        .filter(|(bin, &c)| c > 0 && reference.counts.get(*bin).copied().unwrap_or(0) == 0)
        .count();
    Ok(missing as f64 / occupied as f64)
}

fn check_binning(a: &SpectrumHistogram, b: &SpectrumHistogram) -> Result<()> {
    if a.bin_width.to_bits() != b.bin_width.to_bits() {
        return Err(Error::MismatchedBinning {
            left: a.bin_width,
            right: b.bin_width,
        });
    }
    Ok(())
}

/// Reuse a small lattice's eigenvalues for a larger target system. The
/// result is tagged as substituted; downstream rotation tables and
/// `lambda_max` come from these borrowed values.
pub fn substituted_spectrum(small: &Spectrum, target: &SpectrumDescriptor) -> Spectrum {
    let source = SpectrumDescriptor {
        kind: SpectrumKind::Substituted {
            source_nx: small.source().nx,
            source_ny: small.source().ny,
        },
        ..target.clone()
    };
    Spectrum::new(small.eigenvalues().to_vec(), source)
}

/// Cache key: SHA-256 of the canonical descriptor string.
pub fn cache_key(descriptor: &SpectrumDescriptor) -> String {
    let mut hasher = Sha256::new();
    hasher.update(descriptor.canonical_string().as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        write!(hex, "{byte:02x}").unwrap();
    }
    hex
}

/// Write a spectrum to `<dir>/<key>.spectrum`; eigenvalues one per line
/// in full round-trip precision.
pub fn write_cache(dir: &Path, spectrum: &Spectrum) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.spectrum", cache_key(spectrum.source())));
    let mut file = fs::File::create(&path)?;
    writeln!(file, "# qlbm spectrum cache v1")?;
    writeln!(
        file,
        "# descriptor: {}",
        spectrum.source().canonical_string()
    )?;
    writeln!(file, "# count: {}", spectrum.eigenvalues().len())?;
    for v in spectrum.eigenvalues() {
        writeln!(file, "{v}")?;
    }
    Ok(path)
}

/// Load a cached spectrum, if present.
pub fn read_cache(dir: &Path, descriptor: &SpectrumDescriptor) -> Result<Option<Spectrum>> {
    let path = dir.join(format!("{}.spectrum", cache_key(descriptor)));
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path)?;
    let mut eigenvalues = Vec::new();
    let mut count: Option<usize> = None;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# count:") {
            count = Some(rest.trim().parse().map_err(|_| Error::MalformedCache {
                reason: format!("bad count line in {}", path.display()),
            })?);
            continue;
        }
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        eigenvalues.push(line.trim().parse().map_err(|_| Error::MalformedCache {
            reason: format!("bad eigenvalue line in {}", path.display()),
        })?);
    }
    if let Some(expected) = count {
        if expected != eigenvalues.len() {
            return Err(Error::MalformedCache {
                reason: format!(
                    "{} declares {} eigenvalues but contains {}",
                    path.display(),
                    expected,
                    eigenvalues.len()
                ),
            });
        }
    }
    Ok(Some(Spectrum::new(eigenvalues, descriptor.clone())))
}
