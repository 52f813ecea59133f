//! Positive symbol measures mu and their disk masses and averaging
//! transforms.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{FockError, Result};
use crate::potential::RadiusField;
use crate::quadrature::DiskRule;

type DensityFn = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;

/// A locally finite positive Borel measure usable as a Toeplitz symbol.
#[derive(Clone)]
pub enum SymbolMeasure {
    /// Finite sum of point masses. Atoms exactly on a disk boundary count as
    /// inside (disks are closed here).
    Atomic { points: Vec<Complex64>, masses: Vec<f64> },
    /// Absolutely continuous part w dA, truncated at `support_radius` about
    /// `support_center`.
    Density {
        density: DensityFn,
        support_center: Complex64,
        support_radius: f64,
    },
    Scaled { factor: f64, inner: Box<SymbolMeasure> },
    Sum(Vec<SymbolMeasure>),
}

impl std::fmt::Debug for SymbolMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymbolMeasure::Atomic { points, .. } => {
                write!(f, "Atomic({} atoms)", points.len())
            }
            SymbolMeasure::Density { support_radius, .. } => {
                write!(f, "Density(support_radius = {support_radius})")
            }
            SymbolMeasure::Scaled { factor, inner } => write!(f, "{factor} * {inner:?}"),
            SymbolMeasure::Sum(parts) => write!(f, "Sum({parts:?})"),
        }
    }
}

impl SymbolMeasure {
    pub fn dirac(point: Complex64, mass: f64) -> Self {
        SymbolMeasure::Atomic { points: vec![point], masses: vec![mass] }
    }

    pub fn atomic(points: Vec<Complex64>, masses: Vec<f64>) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(FockError::InvalidInput("atoms/masses length mismatch".into()));
        }
        if masses.iter().any(|&m| m < 0.0) {
            return Err(FockError::InvalidInput("atom masses must be nonnegative".into()));
        }
        Ok(SymbolMeasure::Atomic { points, masses })
    }

    pub fn density(
        density: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
        support_center: Complex64,
        support_radius: f64,
    ) -> Self {
        SymbolMeasure::Density {
            density: Arc::new(density),
            support_center,
            support_radius,
        }
    }

    /// Lebesgue area measure truncated at `support_radius`.
    pub fn area(support_radius: f64) -> Self {
        SymbolMeasure::density(|_| 1.0, Complex64::new(0.0, 0.0), support_radius)
    }

    /// w(z) = exp(-beta |z|^2); support radius set where the density has
    /// dropped below 1e-18.
    pub fn gaussian_density(beta: f64) -> Self {
        assert!(beta > 0.0);
        let r = (41.5 / beta).sqrt();
        SymbolMeasure::density(move |z| (-beta * z.norm_sqr()).exp(), Complex64::new(0.0, 0.0), r)
    }

    /// Indicator of the disk D(center, radius) times dA.
    pub fn indicator_disk(center: Complex64, radius: f64) -> Self {
        SymbolMeasure::density(|_| 1.0, center, radius)
    }

    /// w(z) = |z|^k on D(0, support_radius).
    pub fn power_density(k: f64, support_radius: f64) -> Self {
        SymbolMeasure::density(move |z| z.norm().powf(k), Complex64::new(0.0, 0.0), support_radius)
    }

    pub fn scaled(self, factor: f64) -> Self {
        assert!(factor >= 0.0);
        SymbolMeasure::Scaled { factor, inner: Box::new(self) }
    }

    /// mu(closed disk D(center, radius)).
    pub fn disk_mass(&self, center: Complex64, radius: f64) -> Result<f64> {
        self.disk_mass_res(center, radius, 64, 96)
    }

    /// Same with an explicit quadrature resolution for the density parts;
    /// tiny query disks over smooth densities do fine with small rules.
    pub fn disk_mass_res(
        &self,
        center: Complex64,
        radius: f64,
        n_radial: usize,
        n_angular: usize,
    ) -> Result<f64> {
        assert!(radius > 0.0);
        match self {
            SymbolMeasure::Atomic { points, masses } => Ok(points
                .iter()
                .zip(masses)
                .filter(|(p, _)| (*p - center).norm() <= radius)
                .map(|(_, &m)| m)
                .sum()),
            SymbolMeasure::Density { density, support_center, support_radius } => {
                // integrate the truncated density over the query disk
                let d = (center - support_center).norm();
                if d >= radius + support_radius {
                    return Ok(0.0);
                }
                let rule = DiskRule::new(center, radius, n_radial, n_angular);
                let sc = *support_center;
                let sr = *support_radius;
                Ok(rule.apply(|z| if (z - sc).norm() <= sr { density(z) } else { 0.0 }))
            }
            SymbolMeasure::Scaled { factor, inner } => {
                Ok(factor * inner.disk_mass_res(center, radius, n_radial, n_angular)?)
            }
            SymbolMeasure::Sum(parts) => {
                let mut total = 0.0;
                for part in parts {
                    total += part.disk_mass_res(center, radius, n_radial, n_angular)?;
                }
                Ok(total)
            }
        }
    }

    /// Exact overall scale factor of the measure (product of nested Scaled
    /// factors); used to verify exact homogeneity.
    pub fn scale_factor(&self) -> f64 {
        match self {
            SymbolMeasure::Scaled { factor, inner } => factor * inner.scale_factor(),
            _ => 1.0,
        }
    }

    /// All atom locations (for trust-radius checks).
    pub fn atom_points(&self) -> Vec<Complex64> {
        match self {
            SymbolMeasure::Atomic { points, .. } => points.clone(),
            SymbolMeasure::Scaled { inner, .. } => inner.atom_points(),
            SymbolMeasure::Sum(parts) => parts.iter().flat_map(|p| p.atom_points()).collect(),
            SymbolMeasure::Density { .. } => Vec::new(),
        }
    }

    /// Radius of a disk about the origin containing the whole support.
    pub fn support_bound(&self) -> f64 {
        match self {
            SymbolMeasure::Atomic { points, .. } => {
                points.iter().map(|p| p.norm()).fold(0.0, f64::max)
            }
            SymbolMeasure::Density { support_center, support_radius, .. } => {
                support_center.norm() + support_radius
            }
            SymbolMeasure::Scaled { inner, .. } => inner.support_bound(),
            SymbolMeasure::Sum(parts) => {
                parts.iter().map(|p| p.support_bound()).fold(0.0, f64::max)
            }
        }
    }
}

/// The r-averaging transform mu_hat_r(z) = mu(D^r(z)) / A(D^r(z)).
pub fn averaging_transform(
    mu: &SymbolMeasure,
    rf: &RadiusField,
    r: f64,
    z: Complex64,
) -> Result<f64> {
    assert!(r > 0.0);
    let rho = rf.rho(z)?;
    let mass = mu.disk_mass(z, r * rho)?;
    Ok(mass / (PI * r * r * rho * rho))
}
