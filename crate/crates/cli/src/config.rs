//! JSON experiment configuration: potential, symbol family, discretization
//! sizes, and tolerances. The schema is versioned; unknown fields are
//! rejected so typos fail loudly.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use focklab::{Potential, SymbolMeasure};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub potential: PotentialSpec,
    pub symbols: Vec<SymbolSpec>,
    /// truncation degree N of the orthonormal basis
    pub basis_degree: usize,
    /// square sample grid for sup-norms and transform fields
    pub grid: GridSpec,
    /// annuli (inner, outer radius) for the vanishing detector
    #[serde(default = "default_annuli")]
    pub annuli: Vec<(f64, f64)>,
    pub lattice: LatticeSpec,
    #[serde(default = "default_exponents")]
    pub schatten_exponents: Vec<f64>,
    /// radius r of the averaging transform mu_hat_r, in units of rho
    #[serde(default = "default_averaging_radius")]
    pub averaging_radius: f64,
    /// dense Cartesian rule for L^p(d sigma) integrals of mu_hat_r
    #[serde(default = "default_hat_grid")]
    pub hat_grid: GridSpec,
    /// cutoff radius of the polar rules behind d sigma integrals
    #[serde(default = "default_sigma_extent")]
    pub sigma_extent: f64,
    /// scaling factors c for the mu -> c mu homogeneity sweeps
    #[serde(default = "default_scaling_sweep")]
    pub scaling_sweep: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_max: f64,
    pub spacing: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    /// lattice parameters r to sweep
    pub r: Vec<f64>,
    pub r_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// max/min window for every equivalence-ratio stability flag
    pub ratio_window: f64,
    /// relative drift allowed in the exact-homogeneity sweeps
    pub homogeneity_rel: f64,
    /// absolute tolerance for identity-type checks (e.g. berezin of dA = 1)
    pub identity_abs: f64,
    /// relative tolerance for trace identities
    pub trace_rel: f64,
    /// allowed excess over the Lipschitz bound |rho(z)-rho(w)| <= |z-w|
    pub lipschitz_excess: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ratio_window: 10.0,
            homogeneity_rel: 1e-10,
            identity_abs: 1e-6,
            trace_rel: 1e-6,
            lipschitz_excess: 1e-9,
        }
    }
}

fn default_annuli() -> Vec<(f64, f64)> {
    vec![(0.0, 0.5), (0.5, 1.0), (1.0, 1.5), (1.5, 2.0), (2.0, 2.5)]
}

fn default_exponents() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

fn default_averaging_radius() -> f64 {
    0.25
}

fn default_hat_grid() -> GridSpec {
    GridSpec { r_max: 1.6, spacing: 0.01 }
}

fn default_sigma_extent() -> f64 {
    3.6
}

fn default_scaling_sweep() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// phi(z) = alpha |z|^2 / 2
    Gaussian { alpha: f64 },
    /// phi(z) = scale * |z|^(2m)
    RadialPower { m: f64, scale: f64 },
    /// radial profile from a CSV of rows (r, phi, laplacian)
    CustomRadial { profile_csv: PathBuf },
}

impl PotentialSpec {
    pub fn build(&self, base_dir: &Path) -> Result<Arc<Potential>> {
        match self {
            PotentialSpec::Gaussian { alpha } => {
                if *alpha <= 0.0 {
                    bail!("gaussian potential needs alpha > 0, got {alpha}");
                }
                Ok(Potential::gaussian(*alpha))
            }
            PotentialSpec::RadialPower { m, scale } => {
                if *m < 1.0 || *scale <= 0.0 {
                    bail!("radial_power potential needs m >= 1 and scale > 0");
                }
                Ok(Potential::radial_power(*m, *scale))
            }
            PotentialSpec::CustomRadial { profile_csv } => {
                let path = resolve(base_dir, profile_csv);
                let samples = read_profile_csv(&path)?;
                Potential::custom_radial(&samples)
                    .with_context(|| format!("building potential from {}", path.display()))
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolSpec {
    Dirac {
        point: [f64; 2],
        mass: f64,
        label: Option<String>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// atoms from a CSV of rows (x, y, mass)
    AtomsCsv {
        path: PathBuf,
        label: Option<String>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// density exp(-beta |z|^2) dA
    GaussianDensity {
        beta: f64,
        label: Option<String>,
        #[serde(default = "one")]
        scale: f64,
    },
    IndicatorDisk {
        center: [f64; 2],
        radius: f64,
        label: Option<String>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Lebesgue area measure truncated at support_radius
    Area {
        support_radius: f64,
        label: Option<String>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// |z|^k dA on D(0, support_radius)
    PowerDensity {
        k: f64,
        support_radius: f64,
        label: Option<String>,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl SymbolSpec {
    pub fn label(&self) -> String {
        let (custom, fallback) = match self {
            SymbolSpec::Dirac { label, .. } => (label, "dirac".to_string()),
            SymbolSpec::AtomsCsv { label, path, .. } => (
                label,
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "atoms".to_string()),
            ),
            SymbolSpec::GaussianDensity { label, beta, .. } => {
                (label, format!("gauss{beta}"))
            }
            SymbolSpec::IndicatorDisk { label, .. } => (label, "disk".to_string()),
            SymbolSpec::Area { label, .. } => (label, "area".to_string()),
            SymbolSpec::PowerDensity { label, k, .. } => (label, format!("power{k}")),
        };
        custom.clone().unwrap_or(fallback)
    }

    pub fn build(&self, base_dir: &Path) -> Result<SymbolMeasure> {
        let (raw, scale) = match self {
            SymbolSpec::Dirac { point, mass, scale, .. } => {
                if *mass < 0.0 {
                    bail!("dirac mass must be nonnegative");
                }
                (SymbolMeasure::dirac(Complex64::new(point[0], point[1]), *mass), *scale)
            }
            SymbolSpec::AtomsCsv { path, scale, .. } => {
                let path = resolve(base_dir, path);
                let (points, masses) = read_atoms_csv(&path)?;
                (SymbolMeasure::atomic(points, masses)?, *scale)
            }
            SymbolSpec::GaussianDensity { beta, scale, .. } => {
                if *beta <= 0.0 {
                    bail!("gaussian_density needs beta > 0");
                }
                (SymbolMeasure::gaussian_density(*beta), *scale)
            }
            SymbolSpec::IndicatorDisk { center, radius, scale, .. } => {
                if *radius <= 0.0 {
                    bail!("indicator_disk needs radius > 0");
                }
                (
                    SymbolMeasure::indicator_disk(
                        Complex64::new(center[0], center[1]),
                        *radius,
                    ),
                    *scale,
                )
            }
            SymbolSpec::Area { support_radius, scale, .. } => {
                if *support_radius <= 0.0 {
                    bail!("area symbol needs support_radius > 0");
                }
                (SymbolMeasure::area(*support_radius), *scale)
            }
            SymbolSpec::PowerDensity { k, support_radius, scale, .. } => {
                if *k < 0.0 || *support_radius <= 0.0 {
                    bail!("power_density needs k >= 0 and support_radius > 0");
                }
                (SymbolMeasure::power_density(*k, *support_radius), *scale)
            }
        };
        if scale < 0.0 {
            bail!("symbol scale must be nonnegative");
        }
        Ok(if scale == 1.0 { raw } else { raw.scaled(scale) })
    }
}

/// A parsed config plus the SHA-256 of the exact file bytes (the report
/// provenance key).
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub sha256: String,
    pub base_dir: PathBuf,
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let bytes = fs::read(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let sha256 = hex(&Sha256::digest(&bytes));
    let config: ExperimentConfig = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing config {}", path.display()))?;
    let base_dir = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    config.validate()?;
    Ok(LoadedConfig { config, sha256, base_dir })
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (this binary speaks {})",
                self.schema_version,
                SCHEMA_VERSION
            );
        }
        if self.basis_degree < 1 {
            bail!("basis_degree must be >= 1");
        }
        if self.symbols.is_empty() {
            bail!("at least one symbol is required");
        }
        for g in [&self.grid, &self.hat_grid] {
            if g.r_max <= 0.0 || g.spacing <= 0.0 {
                bail!("grid needs r_max > 0 and spacing > 0");
            }
            if g.spacing > g.r_max {
                bail!("grid spacing {} exceeds its extent {}", g.spacing, g.r_max);
            }
        }
        if self.lattice.r.is_empty() {
            bail!("lattice.r must list at least one radius");
        }
        if self.lattice.r.iter().any(|&r| r <= 0.0) || self.lattice.r_max <= 0.0 {
            bail!("lattice radii and r_max must be positive");
        }
        if self.averaging_radius <= 0.0 {
            bail!("averaging_radius must be positive");
        }
        if self.sigma_extent <= 0.0 {
            bail!("sigma_extent must be positive");
        }
        if self.schatten_exponents.iter().any(|&p| p <= 0.0) {
            bail!("schatten exponents must be positive");
        }
        if self.scaling_sweep.iter().any(|&c| c <= 0.0) {
            bail!("scaling sweep factors must be positive");
        }
        for (a, b) in &self.annuli {
            if *a < 0.0 || b <= a {
                bail!("annulus ({a}, {b}) is not an increasing pair");
            }
        }
        Ok(())
    }

    /// Deterministic square grid of sample points inside |z| <= r_max.
    pub fn grid_points(&self) -> Vec<Complex64> {
        let GridSpec { r_max, spacing } = self.grid;
        let n = (r_max / spacing).floor() as i64;
        let mut points = Vec::new();
        for i in -n..=n {
            for j in -n..=n {
                let z = Complex64::new(spacing * i as f64, spacing * j as f64);
                if z.norm() <= r_max {
                    points.push(z);
                }
            }
        }
        points
    }
}

fn resolve(base_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

fn read_profile_csv(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening profile CSV {}", path.display()))?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 3 {
            bail!("profile CSV rows must be (r, phi, laplacian)");
        }
        rows.push((rec[0].parse()?, rec[1].parse()?, rec[2].parse()?));
    }
    if rows.is_empty() {
        bail!("profile CSV {} is empty", path.display());
    }
    Ok(rows)
}

fn read_atoms_csv(path: &Path) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening atom CSV {}", path.display()))?;
    let mut points = Vec::new();
    let mut masses = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 3 {
            bail!("atom CSV rows must be (x, y, mass)");
        }
        points.push(Complex64::new(rec[0].parse()?, rec[1].parse()?));
        masses.push(rec[2].parse()?);
    }
    if points.is_empty() {
        bail!("atom CSV {} is empty", path.display());
    }
    Ok((points, masses))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
