use thiserror::Error;

/// Errors produced by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Velocity requested at a site with zero density.
    #[error("degenerate density at site {site}")]
    DegenerateDensity { site: usize },

    /// Relaxation frequency outside the stable range (0, 2).
    #[error("unstable relaxation: omega = {omega} outside (0, 2)")]
    UnstableRelaxation { omega: f64 },

    /// An initialization produced a non-positive population.
    #[error("unphysical amplitude: f_{direction} = {value} at site {site}")]
    UnphysicalAmplitude {
        site: usize,
        direction: usize,
        value: f64,
    },

    /// RMSE ratio against a reference entry that is exactly zero.
    #[error("undefined ratio: reference distribution is zero at flat index {index}")]
    UndefinedRatio { index: usize },

    /// Grid construction rejected its arguments.
    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    /// Operands have incompatible shapes.
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// An eigenvalue's binary representation rounds to zero.
    #[error(
        "insufficient clock resolution: lambda = {lambda} rounds to 0 with {n_clock} clock qubits"
    )]
    InsufficientClockResolution { lambda: f64, n_clock: usize },

    /// Requested eigenvalue lies outside [-lambda_max, lambda_max].
    #[error("eigenvalue {lambda} outside [-{lambda_max}, {lambda_max}]")]
    EigenvalueOutOfRange { lambda: f64, lambda_max: f64 },

    /// arcsin argument exceeds 1 in magnitude.
    #[error("rotation undefined: |c_p / lambda_bar| = |{c_p} / {lambda_bar}| > 1")]
    RotationUndefined { c_p: f64, lambda_bar: i64 },

    /// The spectrum has no strictly positive eigenvalue.
    #[error("spectrum has no positive eigenvalue")]
    NoPositiveEigenvalue,

    /// The post-selected state has zero amplitude.
    #[error("post-selection impossible: ancilla=1, clock=0...0 has zero probability")]
    PostSelectionImpossible,

    /// Right-hand side is identically zero.
    #[error("right-hand side must be nonzero")]
    ZeroRhs,

    /// Dense eigensolve refused: matrix too large.
    #[error(
        "matrix dimension {dim} exceeds the eigensolver cap {cap}; \
         use a spectrum substituted from a smaller lattice instead"
    )]
    DimensionCap { dim: usize, cap: usize },

    /// Histogram bin width must be positive.
    #[error("invalid bin width {bin_width}")]
    InvalidBinWidth { bin_width: f64 },

    /// Histograms compared with different binning.
    #[error("mismatched binning: bin widths {left} and {right} differ")]
    MismatchedBinning { left: f64, right: f64 },

    /// Spectrum cache file could not be parsed.
    #[error("malformed spectrum cache file: {reason}")]
    MalformedCache { reason: String },

    /// I/O failure (cache files, matrix export).
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
