use num_complex::Complex64;
use thiserror::Error;

/// Errors surfaced by the numerical lab.
#[derive(Debug, Error)]
pub enum FockError {
    #[error("quadrature did not converge: estimated error {estimated:.3e} above tolerance {tolerance:.3e} ({context})")]
    QuadratureNotConverged {
        estimated: f64,
        tolerance: f64,
        context: String,
    },

    #[error("integrand evaluated to a non-finite value at node {node}")]
    PoisonedIntegrand { node: Complex64 },

    #[error("radial moment tail not converged; try a larger truncation radius than {suggested_r_cut}")]
    TailNotConverged { suggested_r_cut: f64 },

    #[error("measure too thin: disk mass at {center} stayed below 1 up to radius {reached}")]
    MeasureTooThin { center: Complex64, reached: f64 },

    #[error("degenerate mass: disk {center} radius {radius} carries zero measure")]
    DegenerateMass { center: Complex64, radius: f64 },

    #[error("point {point} lies outside the grid hull")]
    OutsideHull { point: Complex64 },

    #[error("point {point} (|z| = {modulus:.4}) outside basis trust radius {trust_radius:.4}")]
    TruncationDomain {
        point: Complex64,
        modulus: f64,
        trust_radius: f64,
    },

    #[error("measure support outside trust radius {trust_radius:.4}; offending points: {offenders:?}")]
    SupportOutsideTrustRadius {
        trust_radius: f64,
        offenders: Vec<Complex64>,
    },

    #[error("dimension mismatch: matrix is {matrix_dim}, basis has {basis_dim} functions")]
    DimensionMismatch { matrix_dim: usize, basis_dim: usize },

    #[error("normalization failed: zero kernel norm at {point}")]
    ZeroNorm { point: Complex64 },

    #[error("duplicate points in input sequence (indices {first} and {second})")]
    DuplicatePoints { first: usize, second: usize },

    #[error("lattice covering failed: certificate {certificate:.6} < 1, {} probe points uncovered", uncovered.len())]
    CoveringFailure {
        certificate: f64,
        uncovered: Vec<Complex64>,
    },

    #[error("no feasible fit in the search range ({context})")]
    FitFailure { context: String },

    #[error("Toeplitz assembly produced a non-PSD matrix: min eigenvalue {min_eig:.3e} vs max {max_eig:.3e}")]
    AssemblyNotPsd { min_eig: f64, max_eig: f64 },

    #[error("potential consistency check failed: finite-difference Laplacian deviates by {max_rel:.3e} at {point}")]
    LaplacianMismatch { point: Complex64, max_rel: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, FockError>;
