//! Berezin transforms of measures and operators, trace functionals, and
//! L^p(d sigma) norms.

use num_complex::Complex64;

use crate::basis::KernelEvaluator;
use crate::error::{FockError, Result};
use crate::potential::RadiusField;
use crate::quadrature::{DiskRule, PlaneRule};
use crate::symbol::SymbolMeasure;
use crate::toeplitz::ToeplitzMatrix;

/// Decay threshold of the vanishing detector, relative to the global sup.
pub const VANISH_TOL: f64 = 1e-3;

/// Sampled transform values mu_tilde, mu_hat_r or T_tilde over a point set,
/// optionally carrying the quadrature weights of the rule it was sampled on.
#[derive(Debug, Clone)]
pub struct TransformField {
    pub points: Vec<Complex64>,
    pub values: Vec<f64>,
    /// quadrature weights when sampled over a rule; empty for bare grids
    pub weights: Vec<f64>,
    pub label: String,
}

impl TransformField {
    /// Sample a transform on a bare grid (plots, sup-norms, annulus scans).
    pub fn over_grid(
        points: &[Complex64],
        label: &str,
        mut f: impl FnMut(Complex64) -> Result<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(points.len());
        for &z in points {
            let v = f(z)?;
            if v < -1e-12 {
                return Err(FockError::InvalidInput(format!(
                    "transform of a positive measure came out negative ({v:.3e}) at {z}"
                )));
            }
            values.push(v.max(0.0));
        }
        Ok(TransformField {
            points: points.to_vec(),
            values,
            weights: Vec::new(),
            label: label.to_string(),
        })
    }

    /// Sample over a quadrature rule, keeping the weights so the field can be
    /// integrated afterwards.
    pub fn over_rule(
        rule: &PlaneRule,
        label: &str,
        mut f: impl FnMut(Complex64) -> Result<f64>,
    ) -> Result<Self> {
        let mut points = Vec::with_capacity(rule.nodes().len());
        let mut weights = Vec::with_capacity(rule.nodes().len());
        let mut values = Vec::with_capacity(rule.nodes().len());
        for &(z, w) in rule.nodes() {
            let v = f(z)?;
            if v < -1e-12 {
                return Err(FockError::InvalidInput(format!(
                    "transform of a positive measure came out negative ({v:.3e}) at {z}"
                )));
            }
            points.push(z);
            weights.push(w);
            values.push(v.max(0.0));
        }
        Ok(TransformField {
            points,
            values,
            weights,
            label: label.to_string(),
        })
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Sup over points with |z| in [a, b).
    pub fn sup_on_annulus(&self, a: f64, b: f64) -> f64 {
        self.points
            .iter()
            .zip(&self.values)
            .filter(|(z, _)| {
                let r = z.norm();
                r >= a && r < b
            })
            .map(|(_, &v)| v)
            .fold(0.0, f64::max)
    }
}

/// Berezin transform of a measure:
/// mu_tilde(z) = int |K_{2,z}(w)|^2 e^{-2 phi(w)} d(mu)(w),
/// exact over atoms, quadrature on each density's own support rule.
pub fn berezin_measure(
    kernel: &KernelEvaluator,
    mu: &SymbolMeasure,
    z: Complex64,
) -> Result<f64> {
    let tr = kernel.trust_radius();
    if !kernel.is_exact() {
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
        if z.norm() > tr {
            return Err(FockError::TruncationDomain {
                point: z,
                modulus: z.norm(),
                trust_radius: tr,
            });
        }
    }
    let diag = kernel.diag(z);
    if diag <= 0.0 {
        return Err(FockError::ZeroNorm { point: z });
    }
    berezin_part(kernel, mu, z, 1.0, diag)
}

fn berezin_part(
    kernel: &KernelEvaluator,
    mu: &SymbolMeasure,
    z: Complex64,
    factor: f64,
    diag: f64,
) -> Result<f64> {
    let pot = kernel.basis().potential();
    let weight = |w: Complex64| {
        kernel.eval_raw(z, w).norm_sqr() * (-2.0 * pot.phi(w)).exp() / diag
    };
    match mu {
        SymbolMeasure::Atomic { points, masses } => Ok(factor
            * points
                .iter()
                .zip(masses)
                .map(|(&a, &m)| m * weight(a))
                .sum::<f64>()),
        SymbolMeasure::Density { density, support_center, support_radius } => {
            let rule = DiskRule::new(*support_center, *support_radius, 96, 256);
            let mut total = 0.0;
            for &(w, qw) in rule.nodes() {
                let d = density(w);
                if !d.is_finite() {
                    return Err(FockError::PoisonedIntegrand { node: w });
                }
                total += qw * d * weight(w);
            }
            Ok(factor * total)
        }
        SymbolMeasure::Scaled { factor: f, inner } => {
            berezin_part(kernel, inner, z, factor * f, diag)
        }
        SymbolMeasure::Sum(parts) => {
            let mut total = 0.0;
            for part in parts {
                total += berezin_part(kernel, part, z, factor, diag)?;
            }
            Ok(total)
        }
    }
}

/// Berezin transform of an operator: T_tilde(z) = <T K_{2,z}, K_{2,z}>_phi.
pub fn berezin_operator(
    t: &ToeplitzMatrix,
    kernel: &KernelEvaluator,
    z: Complex64,
) -> Result<f64> {
    let v = kernel.normalized_coeffs2(z)?;
    t.quadratic_form(&v)
}

/// Matrix trace sum T_nn.
pub fn trace_exact(t: &ToeplitzMatrix) -> f64 {
    t.trace()
}

/// The integral form of the trace that is exact for the truncated operator:
/// tr T = int T_tilde(z) ||K_z||_2^2 e^{-2 phi(z)} dA(z)
/// (expand <T K_z, K_z> in the basis and use orthonormality).
pub fn trace_integral(
    t: &ToeplitzMatrix,
    kernel: &KernelEvaluator,
    rule: &PlaneRule,
) -> Result<f64> {
    let basis = kernel.basis();
    let dim = basis.dim();
    if t.dim() != dim {
        return Err(FockError::DimensionMismatch {
            matrix_dim: t.dim(),
            basis_dim: dim,
        });
    }
    let pot = basis.potential();
    let mut total = 0.0;
    for &(z, w) in rule.nodes() {
        let damp = (-2.0 * pot.phi(z)).exp();
        if damp == 0.0 {
            continue;
        }
        let e = basis.eval_all(z);
        // <T K_z, K_z> = sum_{m,n} T_mn e_m(z) conj(e_n(z))
        let mut s = Complex64::new(0.0, 0.0);
        for m in 0..dim {
            for n in 0..dim {
                s += t.entry(m, n) * e[m] * e[n].conj();
            }
        }
        total += w * s.re * damp;
    }
    Ok(total)
}

/// The trace lemma's literal right-hand side int T_tilde d(sigma) with
/// d(sigma) = dA / rho^2, and its ratio to the matrix trace. For
/// GaussianAlpha(1) the ratio is the normalization constant 2 pi^2.
pub fn trace_sigma(
    t: &ToeplitzMatrix,
    kernel: &KernelEvaluator,
    rf: &RadiusField,
    rule: &PlaneRule,
) -> Result<(f64, f64)> {
    let basis = kernel.basis();
    let dim = basis.dim();
    if t.dim() != dim {
        return Err(FockError::DimensionMismatch {
            matrix_dim: t.dim(),
            basis_dim: dim,
        });
    }
    let mut total = 0.0;
    for &(z, w) in rule.nodes() {
        let e = basis.eval_all(z);
        let diag: f64 = e.iter().map(|v| v.norm_sqr()).sum();
        if diag <= 0.0 {
            continue;
        }
        let mut s = Complex64::new(0.0, 0.0);
        for m in 0..dim {
            for n in 0..dim {
                s += t.entry(m, n) * e[m] * e[n].conj();
            }
        }
        let rho = rf.rho(z)?;
        total += w * (s.re / diag) / (rho * rho);
    }
    let tr = t.trace();
    let ratio = if tr != 0.0 { total / tr } else { f64::NAN };
    Ok((total, ratio))
}

/// (int |field|^p dA / rho^2)^(1/p) over the rule the field was sampled on.
pub fn sigma_lp_norm(field: &TransformField, p: f64, rf: &RadiusField) -> Result<f64> {
    assert!(p > 0.0);
    if field.weights.len() != field.points.len() {
        return Err(FockError::InvalidInput(
            "sigma_lp_norm needs a field sampled over a rule (with weights)".into(),
        ));
    }
    let mut total = 0.0;
    for ((&z, &v), &w) in field.points.iter().zip(&field.values).zip(&field.weights) {
        if v == 0.0 {
            continue;
        }
        let rho = rf.rho(z)?;
        total += w * v.powf(p) / (rho * rho);
    }
    Ok(total.powf(1.0 / p))
}

/// Same integral without the outer 1/p root (the form Thm 6.3 compares).
pub fn sigma_lp_pth_power(field: &TransformField, p: f64, rf: &RadiusField) -> Result<f64> {
    Ok(sigma_lp_norm(field, p, rf)?.powf(p))
}

#[derive(Debug, Clone)]
pub struct VanishingReport {
    /// sup of the field on each annulus, in the given order
    pub annulus_sups: Vec<f64>,
    pub global_sup: f64,
    pub vanishing: bool,
}

/// Decay profile over annuli: flagged vanishing when the last three sups
/// decrease and the final sup is below VANISH_TOL times the global sup.
/// A heuristic stand-in for a limit at infinity; the raw profile is the
/// real product.
pub fn vanishing_detector(field: &TransformField, annuli: &[(f64, f64)]) -> VanishingReport {
    let sups: Vec<f64> = annuli
        .iter()
        .map(|&(a, b)| field.sup_on_annulus(a, b))
        .collect();
    let global = field.sup();
    let n = sups.len();
    let tail_decreasing =
        n >= 3 && sups[n - 3] > sups[n - 2] && sups[n - 2] > sups[n - 1];
    let vanishing = tail_decreasing && global > 0.0 && sups[n - 1] < VANISH_TOL * global;
    VanishingReport {
        annulus_sups: sups,
        global_sup: global,
        vanishing,
    }
}
