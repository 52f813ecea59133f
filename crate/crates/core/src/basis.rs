//! Truncated orthonormal bases of F^2_phi over monomials, the reproducing
//! kernel, its p-norms and normalizations, and the Bergman projection.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{FockError, Result};
use crate::potential::{Potential, PotentialKind};
use crate::quadrature::{radial_moments, PlaneRule};

/// Gram-orthonormality tolerance.
pub const ORTHO_TOL: f64 = 1e-8;

/// Truncated orthonormal basis e_0, ..., e_N of F^2_phi; row n of the
/// coefficient matrix holds e_n over the monomials 1, z, ..., z^N.
pub struct OrthonormalBasis {
    potential: Arc<Potential>,
    coeffs: DMatrix<Complex64>,
    radial_norms: Option<Vec<f64>>,
    trust_radius: f64,
    truncated_from: Option<usize>,
}

impl std::fmt::Debug for OrthonormalBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrthonormalBasis")
            .field("degree", &self.degree())
            .field("trust_radius", &self.trust_radius)
            .field("truncated_from", &self.truncated_from)
            .finish()
    }
}

/// Build the basis to degree `n`. Radial potentials take the diagonal fast
/// path through the monomial norms h_n; general potentials go through the
/// monomial Gram matrix and its Cholesky factor (not modified Gram-Schmidt,
/// for reproducibility). An ill-conditioned Gram truncates the basis rather
/// than regularizing it.
pub fn build_basis(p: &Arc<Potential>, n: usize, rule: &PlaneRule) -> Result<OrthonormalBasis> {
    if p.is_radial() {
        let h = radial_moments(|r| -2.0 * p.phi_radial(r).unwrap(), n, 1e-10)?;
        if h.iter().any(|&v| v <= 0.0) {
            return Err(FockError::InvalidInput(
                "monomial norms must be positive".into(),
            ));
        }
        let mut coeffs = DMatrix::zeros(n + 1, n + 1);
        for (k, &hk) in h.iter().enumerate() {
            coeffs[(k, k)] = Complex64::new(hk.powf(-0.5), 0.0);
        }
        let mut basis = OrthonormalBasis {
            potential: Arc::clone(p),
            coeffs,
            radial_norms: Some(h),
            trust_radius: 0.0,
            truncated_from: None,
        };
        basis.trust_radius = basis.compute_trust_radius();
        Ok(basis)
    } else {
        // Gram matrix of monomials under the L^2_phi inner product
        let mut gram = DMatrix::<Complex64>::zeros(n + 1, n + 1);
        for &(z, w) in rule.nodes() {
            let weight = w * (-2.0 * p.phi(z)).exp();
            if weight == 0.0 {
                continue;
            }
            let mut pows = Vec::with_capacity(n + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=n {
                pows.push(acc);
                acc *= z;
            }
            for k in 0..=n {
                for l in 0..=k {
                    gram[(k, l)] += pows[k] * pows[l].conj() * weight;
                }
            }
        }
        for k in 0..=n {
            for l in (k + 1)..=n {
                gram[(k, l)] = gram[(l, k)].conj();
            }
        }
        // shrink until the leading block is numerically positive definite
        let mut dim = n + 1;
        let chol = loop {
            if dim == 0 {
                return Err(FockError::InvalidInput(
                    "Gram matrix not positive definite at any degree".into(),
                ));
            }
            let block = gram.view((0, 0), (dim, dim)).into_owned();
            match block.cholesky() {
                Some(c) => break c,
                None => dim -= 1,
            }
        };
        let truncated_from = (dim != n + 1).then_some(n);
        // C = L^-1 by forward substitution, lower triangular with positive
        // diagonal
        let l = chol.l();
        let mut coeffs = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut rhs = DVector::zeros(dim);
            rhs[col] = Complex64::new(1.0, 0.0);
            for row in 0..dim {
                let mut s = rhs[row];
                for j in 0..row {
                    s -= l[(row, j)] * coeffs[(j, col)];
                }
                coeffs[(row, col)] = s / l[(row, row)];
            }
        }
        let mut basis = OrthonormalBasis {
            potential: Arc::clone(p),
            coeffs,
            radial_norms: None,
            trust_radius: 0.0,
            truncated_from,
        };
        basis.trust_radius = basis.compute_trust_radius();
        Ok(basis)
    }
}

impl OrthonormalBasis {
    /// Highest retained degree N (dimension is N + 1).
    pub fn degree(&self) -> usize {
        self.coeffs.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn potential(&self) -> &Arc<Potential> {
        &self.potential
    }

    pub fn trust_radius(&self) -> f64 {
        self.trust_radius
    }

    /// Degree originally requested, when the Gram matrix forced truncation.
    pub fn truncated_from(&self) -> Option<usize> {
        self.truncated_from
    }

    pub fn monomial_norms(&self) -> Option<&[f64]> {
        self.radial_norms.as_deref()
    }

    pub fn coefficient_matrix(&self) -> &DMatrix<Complex64> {
        &self.coeffs
    }

    /// Evaluate all e_n(z).
    pub fn eval_all(&self, z: Complex64) -> Vec<Complex64> {
        let dim = self.dim();
        let mut pows = Vec::with_capacity(dim);
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..dim {
            pows.push(acc);
            acc *= z;
        }
        if let Some(h) = &self.radial_norms {
            pows.iter()
                .zip(h)
                .map(|(&p, &hn)| p * hn.powf(-0.5))
                .collect()
        } else {
            (0..dim)
                .map(|n| {
                    let mut s = Complex64::new(0.0, 0.0);
                    for k in 0..=n {
                        s += self.coeffs[(n, k)] * pows[k];
                    }
                    s
                })
                .collect()
        }
    }

    /// K_z(z) = sum |e_n(z)|^2 for the truncated kernel.
    pub fn kernel_diag(&self, z: Complex64) -> f64 {
        self.eval_all(z).iter().map(|e| e.norm_sqr()).sum()
    }

    /// Evaluate a coefficient vector as a function: sum c_n e_n(z).
    pub fn eval_function(&self, coeffs: &DVector<Complex64>, z: Complex64) -> Complex64 {
        self.eval_all(z)
            .iter()
            .zip(coeffs.iter())
            .map(|(e, c)| e * c)
            .sum()
    }

    /// Largest R such that the top 10% of basis indices contribute less than
    /// 1e-8 of K_z(z) at |z| = R.
    fn compute_trust_radius(&self) -> f64 {
        let dim = self.dim();
        let head = dim - (dim / 10).max(1);
        let tail_ok = |r: f64| {
            let e = self.eval_all(Complex64::new(r, 0.0));
            let total: f64 = e.iter().map(|v| v.norm_sqr()).sum();
            let tail: f64 = e[head..].iter().map(|v| v.norm_sqr()).sum();
            total > 0.0 && tail < 1e-8 * total
        };
        let mut lo = 0.0;
        let mut hi = 0.5;
        while tail_ok(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return hi;
            }
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if tail_ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Gram-orthonormality defect max |<e_m, e_n> - delta_mn| under the given
    /// rule; diagnostic for ORTHO_TOL.
    pub fn orthonormality_defect(&self, rule: &PlaneRule) -> f64 {
        let dim = self.dim();
        let mut gram = DMatrix::<Complex64>::zeros(dim, dim);
        for &(z, w) in rule.nodes() {
            let weight = w * (-2.0 * self.potential.phi(z)).exp();
            if weight == 0.0 {
                continue;
            }
            let e = self.eval_all(z);
            for m in 0..dim {
                for n in 0..=m {
                    gram[(m, n)] += e[m] * e[n].conj() * weight;
                }
            }
        }
        let mut worst = 0.0f64;
        for m in 0..dim {
            for n in 0..=m {
                let target = if m == n { 1.0 } else { 0.0 };
                worst = worst.max((gram[(m, n)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Kernel evaluator over a basis, optionally carrying the Gaussian exact
/// form K_z(w) = (alpha/pi) exp(alpha w conj(z)).
pub struct KernelEvaluator {
    basis: Arc<OrthonormalBasis>,
    exact_alpha: Option<f64>,
}

impl KernelEvaluator {
    pub fn new(basis: Arc<OrthonormalBasis>) -> Self {
        KernelEvaluator { basis, exact_alpha: None }
    }

    /// Use the closed-form kernel; only available for GaussianAlpha.
    pub fn with_exact_form(basis: Arc<OrthonormalBasis>) -> Result<Self> {
        match *basis.potential().kind() {
            PotentialKind::GaussianAlpha(alpha) => Ok(KernelEvaluator {
                basis,
                exact_alpha: Some(alpha),
            }),
            _ => Err(FockError::InvalidInput(
                "exact kernel form only available for GaussianAlpha".into(),
            )),
        }
    }

    pub fn basis(&self) -> &Arc<OrthonormalBasis> {
        &self.basis
    }

    pub fn is_exact(&self) -> bool {
        self.exact_alpha.is_some()
    }

    pub fn trust_radius(&self) -> f64 {
        self.basis.trust_radius()
    }

    fn check_trust(&self, z: Complex64) -> Result<()> {
        if self.exact_alpha.is_some() {
            return Ok(());
        }
        let tr = self.basis.trust_radius();
        if z.norm() > tr {
            return Err(FockError::TruncationDomain {
                point: z,
                modulus: z.norm(),
                trust_radius: tr,
            });
        }
        Ok(())
    }

    /// K_z(w), enforcing the trust radius on the truncated path.
    pub fn eval(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        self.check_trust(z)?;
        self.check_trust(w)?;
        Ok(self.eval_raw(z, w))
    }

    /// K_z(w) with no domain check. Outside the trust radius the truncated
    /// value underestimates the kernel; callers integrating against the
    /// weight e^{-p phi} use this for tails the weight dominates anyway.
    pub fn eval_raw(&self, z: Complex64, w: Complex64) -> Complex64 {
        if let Some(alpha) = self.exact_alpha {
            return (w * z.conj() * alpha).exp() * (alpha / std::f64::consts::PI);
        }
        let ez = self.basis.eval_all(z);
        let ew = self.basis.eval_all(w);
        ew.iter().zip(&ez).map(|(a, b)| a * b.conj()).sum()
    }

    /// K_z(z) (> 0 within the trust radius).
    pub fn diag(&self, z: Complex64) -> f64 {
        if let Some(alpha) = self.exact_alpha {
            return (alpha * z.norm_sqr()).exp() * (alpha / std::f64::consts::PI);
        }
        self.basis.kernel_diag(z)
    }

    /// ||K_z||_2 through the reproducing identity ||K_z||^2 = K_z(z).
    pub fn norm2(&self, z: Complex64) -> f64 {
        self.diag(z).sqrt()
    }

    /// ||K_z||_{p,phi} by quadrature (p = inf: sup over nodes of
    /// |K_z| e^{-phi}, a lower bound of the true sup).
    pub fn kernel_norm(&self, p_exp: f64, z: Complex64) -> Result<f64> {
        assert!(p_exp >= 1.0);
        self.check_trust(z)?;
        let pot = self.basis.potential();
        let rho = pot.radius(z)?;
        let integrand = |w: Complex64| {
            let v = self.eval_raw(z, w).norm() * (-pot.phi(w)).exp();
            if p_exp.is_finite() { v.powf(p_exp) } else { v }
        };
        // grow the integration disk until the value settles
        let mut radius = 8.0 * rho;
        let mut prev = None;
        for _ in 0..8 {
            let rule = PlaneRule::polar(z, radius, 96, 128);
            let val = if p_exp.is_finite() {
                rule.apply(integrand)
            } else {
                rule.nodes()
                    .iter()
                    .map(|&(w, _)| integrand(w))
                    .fold(0.0, f64::max)
            };
            if let Some(p) = prev {
                let pf: f64 = p;
                if (val - pf).abs() <= 1e-9 * val.abs().max(1e-300) {
                    return Ok(if p_exp.is_finite() { val.powf(1.0 / p_exp) } else { val });
                }
            }
            prev = Some(val);
            radius *= 1.6;
        }
        let val = prev.unwrap();
        Ok(if p_exp.is_finite() { val.powf(1.0 / p_exp) } else { val })
    }

    /// Coefficients of the 2-normalized kernel K_{2,z} over the basis:
    /// v_n = conj(e_n(z)) / sqrt(K_z(z)) with the truncated diagonal.
    pub fn normalized_coeffs2(&self, z: Complex64) -> Result<DVector<Complex64>> {
        let e = self.basis.eval_all(z);
        let norm_sq: f64 = e.iter().map(|v| v.norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(FockError::ZeroNorm { point: z });
        }
        let scale = norm_sq.sqrt().recip();
        Ok(DVector::from_iterator(
            e.len(),
            e.iter().map(|v| v.conj() * scale),
        ))
    }

    /// Evaluator of the p-normalized kernel K_{p,z} = K_z / ||K_z||_p.
    pub fn normalized_kernel(&self, p_exp: f64, z: Complex64) -> Result<NormalizedKernel<'_>> {
        let norm = if p_exp == 2.0 {
            // algebraic route, exact within the basis
            let n = self.norm2(z);
            if n <= 0.0 {
                return Err(FockError::ZeroNorm { point: z });
            }
            n
        } else {
            let n = self.kernel_norm(p_exp, z)?;
            if n <= 0.0 {
                return Err(FockError::ZeroNorm { point: z });
            }
            n
        };
        Ok(NormalizedKernel { kernel: self, z, norm })
    }
}

/// K_{p,z} as a callable, with its normalizing constant.
pub struct NormalizedKernel<'a> {
    kernel: &'a KernelEvaluator,
    pub z: Complex64,
    pub norm: f64,
}

impl NormalizedKernel<'_> {
    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.kernel.eval(self.z, w)? / self.norm)
    }

    pub fn eval_raw(&self, w: Complex64) -> Complex64 {
        self.kernel.eval_raw(self.z, w) / self.norm
    }
}

/// Coefficients <f, e_n>_phi of the Bergman projection of `f`, by quadrature
/// over the given rule.
pub fn bergman_project(
    basis: &OrthonormalBasis,
    f: impl Fn(Complex64) -> Complex64,
    rule: &PlaneRule,
) -> Result<DVector<Complex64>> {
    let dim = basis.dim();
    let mut coeffs = DVector::zeros(dim);
    for &(z, w) in rule.nodes() {
        let fv = f(z);
        if !fv.re.is_finite() || !fv.im.is_finite() {
            return Err(FockError::PoisonedIntegrand { node: z });
        }
        let weight = w * (-2.0 * basis.potential().phi(z)).exp();
        if weight == 0.0 {
            continue;
        }
        let e = basis.eval_all(z);
        for n in 0..dim {
            coeffs[n] += fv * e[n].conj() * weight;
        }
    }
    Ok(coeffs)
}

#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub epsilon: f64,
    pub c: f64,
}

/// Largest epsilon on the search grid {0.05, 0.10, ..., 2.0} such that
/// |K_z(w)| rho(z) rho(w) e^{-phi(z)-phi(w)} <= C e^{-d_phi(z,w)^epsilon}
/// is feasible with C <= 1e3 over the far grid.
pub fn decay_fit(
    kernel: &KernelEvaluator,
    grid: &crate::potential::GeodesicGrid,
    z: Complex64,
    far_points: &[Complex64],
) -> Result<DecayFit> {
    let pot = kernel.basis().potential();
    let rho_z = pot.radius(z)?;
    let phi_z = pot.phi(z);
    let distances = grid.distances_from(z)?;
    let mut samples = Vec::with_capacity(far_points.len());
    for &w in far_points {
        let d = grid.distance_to_from(&distances, w)?;
        let lhs = kernel.eval(z, w)?.norm()
            * rho_z
            * pot.radius(w)?
            * (-phi_z - pot.phi(w)).exp();
        samples.push((lhs, d));
    }
    let mut best: Option<DecayFit> = None;
    for k in 1..=40 {
        let eps = 0.05 * k as f64;
        let c_req = samples
            .iter()
            .map(|&(lhs, d)| lhs * d.powf(eps).exp())
            .fold(0.0f64, f64::max)
            .max(1e-12);
        if c_req <= 1e3 {
            best = Some(DecayFit { epsilon: eps, c: c_req });
        }
    }
    best.ok_or_else(|| FockError::FitFailure {
        context: format!("decay_fit at z = {z}: no feasible epsilon with C <= 1e3"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{GeodesicGrid, RadiusField};
    use std::f64::consts::{PI, TAU};

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    fn gaussian_rule() -> PlaneRule {
        PlaneRule::polar(c(0.0, 0.0), 9.0, 96, 64)
    }

    fn gaussian_basis(n: usize) -> Arc<OrthonormalBasis> {
        Arc::new(build_basis(&Potential::gaussian(1.0), n, &gaussian_rule()).unwrap())
    }

    #[test]
    fn gaussian_basis_coefficients() {
        // e_n = z^n / sqrt(pi n!), so C_33 = (6 pi)^(-1/2)
        let basis = gaussian_basis(5);
        let c33 = basis.coefficient_matrix()[(3, 3)];
        assert!((c33.re - (6.0 * PI).powf(-0.5)).abs() < 1e-10);
        assert!(c33.im == 0.0);
    }

    #[test]
    fn degree_zero_basis() {
        let basis = build_basis(&Potential::gaussian(1.0), 0, &gaussian_rule()).unwrap();
        let e = basis.eval_all(c(1.3, -0.4));
        assert_eq!(e.len(), 1);
        assert!((e[0].re - PI.powf(-0.5)).abs() < 1e-10);
    }

    #[test]
    fn general_path_matches_radial_fast_path() {
        let p = Potential::gaussian(1.0);
        let general = Potential::custom_general(|z| 0.5 * z.norm_sqr(), |_| 2.0, 2.0).unwrap();
        let rule = gaussian_rule();
        let fast = build_basis(&p, 8, &rule).unwrap();
        let slow = build_basis(&general, 8, &rule).unwrap();
        assert!(slow.truncated_from().is_none());
        for &z in &[c(0.3, 0.4), c(-1.0, 0.2), c(2.0, 0.0)] {
            let a = fast.eval_all(z);
            let b = slow.eval_all(z);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-6, "mismatch at {z}: {x} vs {y}");
            }
        }
        assert!(slow.orthonormality_defect(&rule) < ORTHO_TOL);
    }

    #[test]
    fn kernel_at_origin() {
        let basis = gaussian_basis(20);
        let k = KernelEvaluator::new(basis);
        let v = k.eval(c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!((v.re - 1.0 / PI).abs() < 1e-7);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn kernel_matches_exact_gaussian_form() {
        let basis = gaussian_basis(40);
        let k = KernelEvaluator::new(Arc::clone(&basis));
        let exact = KernelEvaluator::with_exact_form(basis).unwrap();
        // K_1(1) = e / pi
        let v = k.eval(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((v.re - std::f64::consts::E / PI).abs() < 1e-7);
        for &(z, w) in &[(c(1.0, 0.5), c(-0.5, 1.0)), (c(2.0, 0.0), c(0.0, 2.0))] {
            let a = k.eval(z, w).unwrap();
            let b = exact.eval(z, w).unwrap();
            assert!((a - b).norm() < 1e-8 * b.norm().max(1.0));
        }
    }

    #[test]
    fn kernel_hermitian_symmetry_is_exact() {
        let basis = gaussian_basis(15);
        let k = KernelEvaluator::new(basis);
        let (z, w) = (c(0.7, -0.2), c(-0.3, 0.9));
        let a = k.eval(z, w).unwrap();
        let b = k.eval(w, z).unwrap();
        assert_eq!(a, b.conj());
    }

    #[test]
    fn trust_radius_enforced() {
        let basis = gaussian_basis(10);
        let tr = basis.trust_radius();
        let k = KernelEvaluator::new(basis);
        let far = c(tr + 1.0, 0.0);
        assert!(matches!(
            k.eval(far, c(0.0, 0.0)),
            Err(FockError::TruncationDomain { .. })
        ));
    }

    #[test]
    fn kernel_two_norm_closed_form() {
        // ||K_z||_2 = pi^(-1/2) e^(|z|^2/2)
        let basis = gaussian_basis(40);
        let k = KernelEvaluator::new(basis);
        let n0 = k.kernel_norm(2.0, c(0.0, 0.0)).unwrap();
        assert!((n0 - PI.powf(-0.5)).abs() < 1e-7);
        let z = c(1.5, 1.0);
        let nq = k.kernel_norm(2.0, z).unwrap();
        let exact = PI.powf(-0.5) * (0.5 * z.norm_sqr()).exp();
        assert!((nq - exact).abs() < 1e-6 * exact);
        // algebraic route agrees with quadrature
        assert!((k.norm2(z) - nq).abs() < 1e-6 * nq);
    }

    #[test]
    fn kernel_one_norm_closed_form() {
        // ||K_z||_1 = 2 e^(|z|^2/2)
        let basis = gaussian_basis(40);
        let k = KernelEvaluator::new(basis);
        for &z in &[c(0.0, 0.0), c(1.0, -1.0)] {
            let n = k.kernel_norm(1.0, z).unwrap();
            let exact = 2.0 * (0.5 * z.norm_sqr()).exp();
            assert!((n - exact).abs() < 1e-5 * exact, "at {z}: {n} vs {exact}");
        }
    }

    #[test]
    fn kernel_norm_ratio_stable_prop_2_8() {
        // ||K_z||_p / (e^phi rho^(2/p - 2)) bounded above and below
        let basis = gaussian_basis(40);
        let k = KernelEvaluator::new(basis);
        let pot = Potential::gaussian(1.0);
        for &p_exp in &[1.0, 2.0, 4.0] {
            let mut ratios = Vec::new();
            for i in 0..5 {
                let z = c(0.5 * i as f64, 0.3);
                let rho = pot.radius(z).unwrap();
                let n = k.kernel_norm(p_exp, z).unwrap();
                ratios.push(n / (pot.phi(z).exp() * rho.powf(2.0 / p_exp - 2.0)));
            }
            let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
            let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
            assert!(min > 0.0 && max / min < 1.5, "p = {p_exp}: {ratios:?}");
        }
    }

    #[test]
    fn normalized_kernel_has_unit_norm() {
        let basis = gaussian_basis(40);
        let k = KernelEvaluator::new(basis);
        let z = c(0.8, -0.6);
        let nk = k.normalized_kernel(2.0, z).unwrap();
        // quadrature check of ||K_{2,z}||_2 = 1
        let pot = Potential::gaussian(1.0);
        let rule = PlaneRule::polar(z, 8.0, 96, 96);
        let sq = rule.apply(|w| {
            (nk.eval_raw(w).norm() * (-pot.phi(w)).exp()).powi(2)
        });
        assert!((sq - 1.0).abs() < 1e-8, "got {sq}");
        // K_{2,0} is the constant pi^(-1/2)
        let nk0 = k.normalized_kernel(2.0, c(0.0, 0.0)).unwrap();
        let v = nk0.eval(c(0.4, 0.4)).unwrap();
        assert!((v.re - PI.powf(-0.5)).abs() < 1e-7 && v.im.abs() < 1e-12);
    }

    #[test]
    fn projection_of_basis_function_is_unit_vector() {
        let basis = gaussian_basis(8);
        let rule = gaussian_rule();
        let coeffs = bergman_project(&basis, |z| basis.eval_all(z)[3], &rule).unwrap();
        for n in 0..=8 {
            let target = if n == 3 { 1.0 } else { 0.0 };
            assert!((coeffs[n] - Complex64::new(target, 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn projection_reproduces_polynomials() {
        // f = P_phi f for f in the span (reproducing identity)
        let basis = gaussian_basis(10);
        let rule = gaussian_rule();
        let f = |z: Complex64| {
            Complex64::new(0.3, 0.0) + z * Complex64::new(0.0, 1.2)
                + z.powu(4) * Complex64::new(-0.7, 0.4)
        };
        let coeffs = bergman_project(&basis, f, &rule).unwrap();
        for &z in &[c(0.5, 0.5), c(-1.2, 0.3)] {
            let back = basis.eval_function(&coeffs, z);
            assert!((back - f(z)).norm() < 1e-7 * f(z).norm().max(1.0));
        }
    }

    #[test]
    fn projection_kills_antiholomorphic_part() {
        // f(w) = conj(w) e_0(w): odd-moment cancellation for the Gaussian
        let basis = gaussian_basis(6);
        let rule = gaussian_rule();
        let coeffs =
            bergman_project(&basis, |z| z.conj() * basis.eval_all(z)[0], &rule).unwrap();
        for n in 0..=6 {
            assert!(coeffs[n].norm() < 1e-9, "c_{n} = {}", coeffs[n]);
        }
    }

    #[test]
    fn truncation_consistency_of_diagonal() {
        let b1 = gaussian_basis(20);
        let b2 = gaussian_basis(40);
        let z = c(1.0, 1.0);
        assert!(z.norm() <= b1.trust_radius());
        let d1 = b1.kernel_diag(z);
        let d2 = b2.kernel_diag(z);
        assert!((d1 - d2).abs() < 1e-8 * d2);
    }

    #[test]
    fn kernel_matrix_is_psd() {
        let basis = gaussian_basis(25);
        let k = KernelEvaluator::new(basis);
        let pts = [c(0.0, 0.0), c(0.5, 0.2), c(-0.3, 0.8), c(1.0, -1.0)];
        let n = pts.len();
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = k.eval(pts[j], pts[i]).unwrap();
            }
        }
        let eig = m.symmetric_eigen();
        let max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        for &l in eig.eigenvalues.iter() {
            assert!(l >= -1e-9 * max.max(1.0), "eigenvalue {l}");
        }
    }

    #[test]
    fn decay_fit_gaussian_admits_epsilon_one() {
        let basis = gaussian_basis(40);
        let k = KernelEvaluator::new(basis);
        let p = Potential::gaussian(1.0);
        let rf = RadiusField::new(p);
        let grid = GeodesicGrid::build(&rf, 2.2, Some(0.05)).unwrap();
        let z = c(0.0, 0.0);
        let far: Vec<Complex64> = (1..=10)
            .map(|i| Complex64::from_polar(0.2 * i as f64, 0.31 * i as f64))
            .collect();
        let fit = decay_fit(&k, &grid, z, &far).unwrap();
        assert!(fit.epsilon >= 1.0, "epsilon = {}", fit.epsilon);
        assert!(fit.c <= 1e3);
    }

    #[test]
    fn near_diagonal_kernel_comparison() {
        // |K_z(w)| comparable to ||K_z||_2 ||K_w||_2 on D^r(z) for small r
        let basis = gaussian_basis(40);
        let k = KernelEvaluator::new(basis);
        let pot = Potential::gaussian(1.0);
        let r = 0.45;
        for i in 0..6 {
            let z = c(0.4 * i as f64 - 1.0, 0.2);
            let rho = pot.radius(z).unwrap();
            for a in 0..5 {
                let w = z + Complex64::from_polar(0.95 * r * rho, TAU * a as f64 / 5.0);
                let ratio = k.eval(z, w).unwrap().norm() / (k.norm2(z) * k.norm2(w));
                assert!((0.2..=1.0 + 1e-12).contains(&ratio), "ratio {ratio}");
            }
        }
    }
}
