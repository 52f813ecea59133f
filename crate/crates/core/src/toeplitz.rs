//! Toeplitz matrices T_mu in the truncated basis, their spectra, Schatten
//! norms, and the kernel-action statistic M_{p,mu}.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::basis::{KernelEvaluator, OrthonormalBasis};
use crate::error::{FockError, Result};
use crate::quadrature::{DiskRule, PlaneRule};
use crate::symbol::SymbolMeasure;

/// Quadrature resolution for the density parts of a symbol (per-support
/// polar rules).
#[derive(Debug, Clone, Copy)]
pub struct AssemblyResolution {
    pub n_radial: usize,
    pub n_angular: usize,
}

impl Default for AssemblyResolution {
    fn default() -> Self {
        AssemblyResolution { n_radial: 96, n_angular: 256 }
    }
}

/// Hermitian PSD matrix of T_mu over e_0..e_N. An overall scalar factor of
/// the symbol is kept separate so that mu -> c mu rescales the spectrum
/// exactly.
pub struct ToeplitzMatrix {
    unit: DMatrix<Complex64>,
    scale: f64,
    // eigenvalues of `unit`, descending
    unit_eigen: Vec<f64>,
    label: String,
}

impl std::fmt::Debug for ToeplitzMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToeplitzMatrix")
            .field("dim", &self.dim())
            .field("scale", &self.scale)
            .field("label", &self.label)
            .finish()
    }
}

/// T_{mn} = int e_n conj(e_m) e^{-2 phi} d(mu): exact sums over atoms,
/// per-support quadrature over densities. Node contributions are rank-one
/// outer products, so the result is Hermitian to the last bit.
pub fn assemble(
    basis: &OrthonormalBasis,
    mu: &SymbolMeasure,
    res: AssemblyResolution,
) -> Result<ToeplitzMatrix> {
    let tr = basis.trust_radius();
    let offenders: Vec<Complex64> = mu
        .atom_points()
        .into_iter()
        .filter(|a| a.norm() > tr)
        .collect();
    if !offenders.is_empty() {
        return Err(FockError::SupportOutsideTrustRadius {
            trust_radius: tr,
            offenders,
        });
    }
    let dim = basis.dim();
    let mut unit = DMatrix::<Complex64>::zeros(dim, dim);
    // peel an overall scalar so T_{c mu} shares the unit matrix with T_mu
    let scale = mu.scale_factor();
    accumulate(&mut unit, basis, mu, 1.0 / scale, res)?;
    for m in 0..dim {
        unit[(m, m)] = Complex64::new(unit[(m, m)].re, 0.0);
    }
    // flush entries thirty orders below the largest one: they perturb the
    // spectrum by nothing but their near-denormal magnitudes can stall the
    // QR iteration of the eigensolver
    let max_entry = unit.iter().map(|e| e.norm()).fold(0.0f64, f64::max);
    let floor = 1e-30 * max_entry;
    for e in unit.iter_mut() {
        if e.norm() < floor {
            *e = Complex64::new(0.0, 0.0);
        }
    }
    let mut unit_eigen: Vec<f64> = unit
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    unit_eigen.sort_by(|a, b| b.total_cmp(a));
    let max_eig = unit_eigen.first().copied().unwrap_or(0.0);
    let min_eig = unit_eigen.last().copied().unwrap_or(0.0);
    if min_eig < -1e-9 * max_eig.max(0.0) {
        return Err(FockError::AssemblyNotPsd { min_eig, max_eig });
    }
    Ok(ToeplitzMatrix {
        unit,
        scale,
        unit_eigen,
        label: format!("{mu:?}"),
    })
}

fn accumulate(
    target: &mut DMatrix<Complex64>,
    basis: &OrthonormalBasis,
    mu: &SymbolMeasure,
    factor: f64,
    res: AssemblyResolution,
) -> Result<()> {
    let phi = |z: Complex64| basis.potential().phi(z);
    let mut add_point = |z: Complex64, weight: f64| {
        if weight == 0.0 {
            return;
        }
        let e = basis.eval_all(z);
        for m in 0..e.len() {
            for n in 0..e.len() {
                target[(m, n)] += e[n] * e[m].conj() * weight;
            }
        }
    };
    match mu {
        SymbolMeasure::Atomic { points, masses } => {
            for (&a, &m) in points.iter().zip(masses) {
                add_point(a, factor * m * (-2.0 * phi(a)).exp());
            }
            Ok(())
        }
        SymbolMeasure::Density { density, support_center, support_radius } => {
            let rule = DiskRule::new(*support_center, *support_radius, res.n_radial, res.n_angular);
            for &(z, w) in rule.nodes() {
                let d = density(z);
                if !d.is_finite() {
                    return Err(FockError::PoisonedIntegrand { node: z });
                }
                add_point(z, factor * w * d * (-2.0 * phi(z)).exp());
            }
            Ok(())
        }
        SymbolMeasure::Scaled { factor: f, inner } => {
            accumulate(target, basis, inner, factor * f, res)
        }
        SymbolMeasure::Sum(parts) => {
            for part in parts {
                accumulate(target, basis, part, factor, res)?;
            }
            Ok(())
        }
    }
}

impl ToeplitzMatrix {
    /// Wrap an explicit Hermitian PSD matrix (identity tests, rank-one
    /// constructions).
    pub fn from_matrix(m: DMatrix<Complex64>, label: &str) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(FockError::InvalidInput("matrix must be square".into()));
        }
        let mut eig: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        let max_eig = eig.first().copied().unwrap_or(0.0);
        let min_eig = eig.last().copied().unwrap_or(0.0);
        if min_eig < -1e-9 * max_eig.max(0.0) {
            return Err(FockError::AssemblyNotPsd { min_eig, max_eig });
        }
        Ok(ToeplitzMatrix {
            unit: m,
            scale: 1.0,
            unit_eigen: eig,
            label: label.to_string(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        ToeplitzMatrix {
            unit: DMatrix::identity(dim, dim),
            scale: 1.0,
            unit_eigen: vec![1.0; dim],
            label: "identity".to_string(),
        }
    }

    pub fn dim(&self) -> usize {
        self.unit.nrows()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entry(&self, m: usize, n: usize) -> Complex64 {
        self.unit[(m, n)] * self.scale
    }

    /// Quadratic form <T f, f> for a coefficient vector f (real for
    /// Hermitian T up to roundoff).
    pub fn quadratic_form(&self, f: &DVector<Complex64>) -> Result<f64> {
        self.check_dim(f.len())?;
        let tf = &self.unit * f;
        Ok(self.scale * f.dotc(&tf).re)
    }

    pub fn apply(&self, f: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        self.check_dim(f.len())?;
        Ok((&self.unit * f) * Complex64::new(self.scale, 0.0))
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(FockError::DimensionMismatch {
                matrix_dim: self.dim(),
                basis_dim: n,
            });
        }
        Ok(())
    }

    /// Eigenvalues in descending order (scale times the unit spectrum, so
    /// homogeneity under mu -> c mu is exact).
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.unit_eigen.iter().map(|&l| l * self.scale).collect()
    }

    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0).max(0.0)
    }

    /// (sum lambda_n^p)^(1/p); roundoff-negative eigenvalues are clamped to
    /// zero before the fractional power.
    pub fn schatten_norm(&self, p: f64) -> f64 {
        assert!(p > 0.0);
        self.schatten_norm_pth_power(p).powf(1.0 / p)
    }

    /// sum lambda_n^p (the quantity Thm 6.3 compares; avoids the outer root).
    pub fn schatten_norm_pth_power(&self, p: f64) -> f64 {
        assert!(p > 0.0);
        self.eigenvalues()
            .iter()
            .map(|&l| l.max(0.0))
            .filter(|&l| l > 0.0)
            .map(|l| l.powf(p))
            .sum()
    }

    pub fn trace(&self) -> f64 {
        self.scale * self.unit.diagonal().iter().map(|d| d.re).sum::<f64>()
    }
}

/// ||g||_{p, phi} for g = sum coeffs_n e_n, by quadrature on growing disks
/// about `center` until the value settles.
pub fn coefficient_p_norm(
    basis: &OrthonormalBasis,
    coeffs: &DVector<Complex64>,
    p_exp: f64,
    center: Complex64,
) -> Result<f64> {
    assert!(p_exp >= 1.0);
    if coeffs.len() != basis.dim() {
        return Err(FockError::DimensionMismatch {
            matrix_dim: coeffs.len(),
            basis_dim: basis.dim(),
        });
    }
    let pot = basis.potential();
    let rho = pot.radius(center)?;
    let mut radius = 8.0 * rho;
    let mut prev: Option<f64> = None;
    for _ in 0..8 {
        let rule = PlaneRule::polar(center, radius, 96, 128);
        let val = rule.apply(|w| {
            let g = basis.eval_function(coeffs, w);
            (g.norm() * (-pot.phi(w)).exp()).powf(p_exp)
        });
        if let Some(p) = prev {
            if (val - p).abs() <= 1e-9 * val.abs().max(1e-300) {
                return Ok(val.powf(1.0 / p_exp));
            }
        }
        prev = Some(val);
        radius *= 1.6;
    }
    Ok(prev.unwrap().powf(1.0 / p_exp))
}

/// M_{p,mu} proxy: max over the grid of ||T K_{p,z}||_{p,phi}.
pub fn kernel_action_statistic(
    t: &ToeplitzMatrix,
    kernel: &KernelEvaluator,
    p_exp: f64,
    z_grid: &[Complex64],
) -> Result<f64> {
    let basis = kernel.basis();
    t.check_dim(basis.dim())?;
    let mut worst = 0.0f64;
    for &z in z_grid {
        let coeffs = if p_exp == 2.0 {
            kernel.normalized_coeffs2(z)?
        } else {
            let e = basis.eval_all(z);
            let norm = kernel.kernel_norm(p_exp, z)?;
            if norm <= 0.0 {
                return Err(FockError::ZeroNorm { point: z });
            }
            DVector::from_iterator(e.len(), e.iter().map(|v| v.conj() / norm))
        };
        let image = t.apply(&coeffs)?;
        worst = worst.max(coefficient_p_norm(basis, &image, p_exp, z)?);
    }
    Ok(worst)
}

/// Eigenvalue stabilization across two truncation degrees: a desk-scale
/// stand-in for compactness of the full operator. Leading eigenvalues of a
/// compact-symbol operator settle as the degree grows while the tail decays;
/// the identity-like spectrum of dA stays flat instead.
#[derive(Debug, Clone)]
pub struct CompactnessReport {
    /// paired (coarse, fine) leading eigenvalues
    pub leading: Vec<(f64, f64)>,
    /// max relative drift over the leading pairs
    pub leading_drift: f64,
    /// largest fine eigenvalue beyond the leading block
    pub tail_sup: f64,
    /// relative spread (max-min)/max of the fine spectrum
    pub spectral_spread: f64,
}

pub fn compactness_indicator(
    coarse: &ToeplitzMatrix,
    fine: &ToeplitzMatrix,
    head: usize,
) -> Result<CompactnessReport> {
    if fine.dim() < coarse.dim() || head > coarse.dim() {
        return Err(FockError::InvalidInput(
            "compactness_indicator needs fine dim >= coarse dim >= head".into(),
        ));
    }
    let ec = coarse.eigenvalues();
    let ef = fine.eigenvalues();
    let leading: Vec<(f64, f64)> = ec[..head].iter().cloned().zip(ef[..head].iter().cloned()).collect();
    let leading_drift = leading
        .iter()
        .map(|&(a, b)| (a - b).abs() / b.abs().max(1e-300))
        .fold(0.0f64, f64::max);
    let tail_sup = ef[head..].iter().cloned().fold(0.0f64, f64::max);
    let top = ef.first().copied().unwrap_or(0.0);
    let bottom = ef.last().copied().unwrap_or(0.0);
    let spectral_spread = if top > 0.0 { (top - bottom) / top } else { 0.0 };
    Ok(CompactnessReport { leading, leading_drift, tail_sup, spectral_spread })
}
