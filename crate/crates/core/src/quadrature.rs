//! Planar and radial numerical integration against exponential weights.
//!
//! Every integral in the crate goes through this module. Plane rules come in
//! two flavours: a polar tensor rule (Gauss-Legendre in radius, trapezoid in
//! angle) and a Cartesian grid clipped exactly to the truncation disk.

use num_complex::Complex64;

use crate::error::{FockError, Result};

/// Quadrature scheme descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    PolarTensor { n_radial: usize, n_angular: usize },
    CartesianGrid { h: f64 },
}

/// A positive rule on a truncation disk of the plane.
#[derive(Debug, Clone)]
pub struct PlaneRule {
    pub scheme: Scheme,
    pub center: Complex64,
    pub r_cut: f64,
    nodes: Vec<(Complex64, f64)>,
}

/// Integration outcome with a refinement-based error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ComplexEstimate {
    pub value: Complex64,
    pub error: f64,
}

/// Gauss-Legendre nodes and weights on [-1, 1]. Rules are memoized per node
/// count: root-finding sweeps and disk rules request the same few sizes
/// millions of times.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n).or_insert_with(|| gauss_legendre_fresh(n)).clone()
}

fn gauss_legendre_fresh(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            // Legendre P_n(x) and derivative via three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                // one polishing step
                let mut q0 = 1.0;
                let mut q1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let q2 = ((2.0 * kf - 1.0) * x * q1 - (kf - 1.0) * q0) / kf;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                xs[i] = -x;
                xs[n - 1 - i] = x;
                let w = 2.0 / ((1.0 - x * x) * dq * dq);
                ws[i] = w;
                ws[n - 1 - i] = w;
                break;
            }
        }
    }
    if n % 2 == 1 {
        // midpoint node: P_n(0) = 0 for odd n
        let mut p0 = 1.0;
        let mut p1 = 0.0;
        for k in 2..=n {
            let kf = k as f64;
            let p2 = (-(kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = -(n as f64) * p0 / (-1.0);
        xs[n / 2] = 0.0;
        ws[n / 2] = 2.0 / (dp * dp);
    }
    (xs, ws)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|&x| mid + half * x).collect(),
        ws.iter().map(|&w| w * half).collect(),
    )
}

impl PlaneRule {
    /// Polar tensor rule on D(center, r_cut): Gauss-Legendre in radius mapped
    /// by r = r_cut * t^2, uniform trapezoid in angle.
    pub fn polar(center: Complex64, r_cut: f64, n_radial: usize, n_angular: usize) -> Self {
        assert!(r_cut > 0.0 && n_radial >= 2 && n_angular >= 1);
        let (ts, tws) = gauss_legendre_on(n_radial, 0.0, 1.0);
        let dtheta = std::f64::consts::TAU / n_angular as f64;
        let mut nodes = Vec::with_capacity(n_radial * n_angular);
        for (&t, &wt) in ts.iter().zip(&tws) {
            let r = r_cut * t * t;
            // area element r dr dtheta with dr = 2 r_cut t dt
            let wr = wt * 2.0 * r_cut * t * r * dtheta;
            if wr <= 0.0 {
                continue;
            }
            for j in 0..n_angular {
                let theta = dtheta * j as f64;
                let z = center + Complex64::from_polar(r, theta);
                nodes.push((z, wr));
            }
        }
        PlaneRule {
            scheme: Scheme::PolarTensor { n_radial, n_angular },
            center,
            r_cut,
            nodes,
        }
    }

    /// Cartesian rule on D(center, r_cut): cell centers with weights equal to
    /// the exact cell/disk intersection area.
    pub fn cartesian(center: Complex64, r_cut: f64, h: f64) -> Self {
        assert!(r_cut > 0.0 && h > 0.0);
        let n = (2.0 * r_cut / h).ceil() as i64;
        let mut nodes = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let x1 = -r_cut + i as f64 * h;
                let y1 = -r_cut + j as f64 * h;
                let x2 = x1 + h;
                let y2 = y1 + h;
                let w = disk_cell_area(r_cut, x1, x2, y1, y2);
                if w > 0.0 {
                    let z = center + Complex64::new(0.5 * (x1 + x2), 0.5 * (y1 + y2));
                    nodes.push((z, w));
                }
            }
        }
        PlaneRule {
            scheme: Scheme::CartesianGrid { h },
            center,
            r_cut,
            nodes,
        }
    }

    pub fn nodes(&self) -> &[(Complex64, f64)] {
        &self.nodes
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|&(_, w)| w).sum()
    }

    /// The same rule at double resolution (both directions for polar).
    pub fn refined(&self) -> Self {
        match self.scheme {
            Scheme::PolarTensor { n_radial, n_angular } => {
                PlaneRule::polar(self.center, self.r_cut, 2 * n_radial, 2 * n_angular)
            }
            Scheme::CartesianGrid { h } => PlaneRule::cartesian(self.center, self.r_cut, h / 2.0),
        }
    }

    /// Raw weighted sum, no refinement. Summation order is the fixed node
    /// order of the rule, so repeated runs are bit-identical.
    pub fn apply(&self, f: impl Fn(Complex64) -> f64) -> f64 {
        self.nodes.iter().map(|&(z, w)| w * f(z)).sum()
    }

    pub fn apply_complex(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .map(|&(z, w)| f(z) * w)
            .sum()
    }
}

/// Area of the intersection of the disk of radius `r` about the origin with
/// the axis-aligned cell [x1,x2] x [y1,y2], in closed form.
fn disk_cell_area(r: f64, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    // integral over [x1,x2] of the clipped vertical extent of the disk
    let g = |x: f64| -> f64 {
        if x.abs() >= r {
            0.0
        } else {
            (r * r - x * x).sqrt()
        }
    };
    // antiderivative of sqrt(r^2 - x^2)
    let h = |x: f64| -> f64 {
        let xc = x.clamp(-r, r);
        0.5 * (xc * (r * r - xc * xc).max(0.0).sqrt() + r * r * (xc / r).asin())
    };
    // vertical extent at x: max(0, min(y2, g) - max(y1, -g)); split [x1,x2]
    // at points where g(x) = |y1|, |y2| so each piece is smooth.
    let mut cuts = vec![x1.max(-r), x2.min(r)];
    if cuts[0] >= cuts[1] {
        return 0.0;
    }
    for y in [y1.abs(), y2.abs()] {
        if y < r {
            let xc = (r * r - y * y).sqrt();
            for c in [-xc, xc] {
                if c > cuts[0] && c < cuts[1] {
                    cuts.push(c);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut area = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let xm = 0.5 * (a + b);
        let top = y2.min(g(xm));
        let bot = y1.max(-g(xm));
        if top <= bot {
            continue;
        }
        // on this piece top/bot are each either constant or +-g(x)
        let top_is_arc = (top - g(xm)).abs() < 1e-13 * r.max(1.0);
        let bot_is_arc = (bot + g(xm)).abs() < 1e-13 * r.max(1.0);
        let int_top = if top_is_arc { h(b) - h(a) } else { top * (b - a) };
        let int_bot = if bot_is_arc { -(h(b) - h(a)) } else { bot * (b - a) };
        area += int_top - int_bot;
    }
    area.max(0.0)
}

/// A polar tensor rule on the disk D(center, radius); nodes lie strictly
/// inside the disk.
#[derive(Debug, Clone)]
pub struct DiskRule {
    pub center: Complex64,
    pub radius: f64,
    rule: PlaneRule,
}

impl DiskRule {
    pub fn new(center: Complex64, radius: f64, n_radial: usize, n_angular: usize) -> Self {
        DiskRule {
            center,
            radius,
            rule: PlaneRule::polar(center, radius, n_radial, n_angular),
        }
    }

    pub fn nodes(&self) -> &[(Complex64, f64)] {
        self.rule.nodes()
    }

    pub fn refined(&self) -> Self {
        DiskRule {
            center: self.center,
            radius: self.radius,
            rule: self.rule.refined(),
        }
    }

    pub fn apply(&self, f: impl Fn(Complex64) -> f64) -> f64 {
        self.rule.apply(f)
    }
}

fn check_finite(rule: &PlaneRule, f: &impl Fn(Complex64) -> f64) -> Result<()> {
    for &(z, _) in rule.nodes() {
        if !f(z).is_finite() {
            return Err(FockError::PoisonedIntegrand { node: z });
        }
    }
    Ok(())
}

/// Integrate `f` over the rule's truncation disk, with an error estimate from
/// one refinement level.
pub fn integrate_plane(f: impl Fn(Complex64) -> f64, rule: &PlaneRule) -> Result<Estimate> {
    check_finite(rule, &f)?;
    let coarse = rule.apply(&f);
    let fine_rule = rule.refined();
    check_finite(&fine_rule, &f)?;
    let fine = fine_rule.apply(&f);
    Ok(Estimate {
        value: fine,
        error: (fine - coarse).abs(),
    })
}

pub fn integrate_plane_complex(
    f: impl Fn(Complex64) -> Complex64,
    rule: &PlaneRule,
) -> Result<ComplexEstimate> {
    for &(z, _) in rule.nodes() {
        let v = f(z);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(FockError::PoisonedIntegrand { node: z });
        }
    }
    let coarse = rule.apply_complex(&f);
    let fine = rule.refined().apply_complex(&f);
    Ok(ComplexEstimate {
        value: fine,
        error: (fine - coarse).norm(),
    })
}

/// Integrate `f` over a disk, with an error estimate from one refinement.
pub fn integrate_disk(f: impl Fn(Complex64) -> f64, rule: &DiskRule) -> Result<Estimate> {
    check_finite(&rule.rule, &f)?;
    let coarse = rule.apply(&f);
    let fine = rule.refined().apply(&f);
    Ok(Estimate {
        value: fine,
        error: (fine - coarse).abs(),
    })
}

/// Monomial norms h_n = 2 pi * int_0^inf r^(2n+1) exp(log_weight(r)) dr for
/// n = 0..=n_max.
///
/// The weight is supplied in log scale (for a potential phi this is
/// -2 phi(r)) so that large monomial powers do not overflow before the weight
/// kills them.
pub fn radial_moments(
    log_weight: impl Fn(f64) -> f64,
    n_max: usize,
    rel_tol: f64,
) -> Result<Vec<f64>> {
    // Truncation radius: where the heaviest integrand has dropped 1e-20
    // below its maximum.
    let heaviest = |r: f64| (2.0 * n_max as f64 + 1.0) * r.ln() + log_weight(r);
    let mut peak = f64::NEG_INFINITY;
    let mut r_peak = 1.0;
    let mut r = 1e-3;
    while r < 1e6 {
        let v = heaviest(r);
        if v > peak {
            peak = v;
            r_peak = r;
        }
        r *= 1.1;
    }
    let mut r_cut = r_peak;
    let drop = (1e-20f64).ln();
    while heaviest(r_cut) > peak + drop {
        r_cut *= 1.25;
        if r_cut > 1e9 {
            return Err(FockError::TailNotConverged { suggested_r_cut: r_cut });
        }
    }

    let compute = |n_nodes: usize| -> Vec<f64> {
        let (xs, ws) = gauss_legendre_on(n_nodes, 0.0, r_cut);
        (0..=n_max)
            .map(|n| {
                let p = 2.0 * n as f64 + 1.0;
                let s: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(&x, &w)| w * (p * x.ln() + log_weight(x)).exp())
                    .sum();
                std::f64::consts::TAU * s
            })
            .collect()
    };

    let mut n_nodes = 64.max(2 * n_max);
    let mut prev = compute(n_nodes);
    loop {
        n_nodes *= 2;
        let cur = compute(n_nodes);
        let worst = prev
            .iter()
            .zip(&cur)
            .map(|(&a, &b)| {
                let scale = b.abs().max(1e-300);
                (a - b).abs() / scale
            })
            .fold(0.0f64, f64::max);
        if worst < rel_tol {
            // all-zero weights are legitimate (zero measure)
            return Ok(cur);
        }
        if n_nodes > 8192 {
            return Err(FockError::QuadratureNotConverged {
                estimated: worst,
                tolerance: rel_tol,
                context: "radial_moments".into(),
            });
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(8);
        // degree 15 polynomial x^14
        let v: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * x.powi(14)).sum();
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = ws.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polar_rule_weight_sum_is_disk_area() {
        let rule = PlaneRule::polar(c(0.3, -0.1), 2.5, 24, 32);
        assert!((rule.total_weight() - PI * 2.5 * 2.5).abs() < 1e-12 * PI * 6.25);
        assert!(rule.nodes().iter().all(|&(_, w)| w > 0.0));
    }

    #[test]
    fn cartesian_rule_weight_sum_is_disk_area() {
        let rule = PlaneRule::cartesian(c(0.0, 0.0), 1.7, 0.05);
        let area = PI * 1.7 * 1.7;
        assert!(
            (rule.total_weight() - area).abs() < 1e-10 * area,
            "got {} want {}",
            rule.total_weight(),
            area
        );
        assert!(rule.nodes().iter().all(|&(_, w)| w > 0.0));
    }

    #[test]
    fn gaussian_integral_is_pi() {
        let rule = PlaneRule::polar(c(0.0, 0.0), 8.0, 48, 32);
        let est = integrate_plane(|z| (-z.norm_sqr()).exp(), &rule).unwrap();
        assert!((est.value - PI).abs() < 1e-8 * PI);
    }

    #[test]
    fn zero_integrand_is_zero() {
        let rule = PlaneRule::polar(c(0.0, 0.0), 3.0, 16, 16);
        assert_eq!(integrate_plane(|_| 0.0, &rule).unwrap().value, 0.0);
    }

    #[test]
    fn second_moment_gaussian_is_pi() {
        // int |z|^2 e^{-|z|^2} dA = pi
        let rule = PlaneRule::polar(c(0.0, 0.0), 9.0, 64, 16);
        let est = integrate_plane(|z| z.norm_sqr() * (-z.norm_sqr()).exp(), &rule).unwrap();
        assert!((est.value - PI).abs() < 1e-9 * PI);
    }

    #[test]
    fn poisoned_integrand_is_reported() {
        let rule = PlaneRule::polar(c(0.0, 0.0), 1.0, 8, 8);
        let err = integrate_plane(|z| 1.0 / (z.re - z.re), &rule);
        assert!(matches!(err, Err(FockError::PoisonedIntegrand { .. })));
    }

    #[test]
    fn disk_rule_nodes_inside_disk_and_area() {
        let rule = DiskRule::new(c(1.0, 2.0), 1.0, 16, 24);
        for &(z, _) in rule.nodes() {
            assert!((z - c(1.0, 2.0)).norm() < 1.0);
        }
        let est = integrate_disk(|_| 1.0, &rule).unwrap();
        assert!((est.value - PI).abs() < 1e-12);
    }

    #[test]
    fn half_disk_indicator_by_symmetry() {
        let rule = DiskRule::new(c(0.0, 0.0), 1.0, 64, 256);
        let est = integrate_disk(|z| if z.re > 0.0 { 1.0 } else { 0.0 }, &rule).unwrap();
        assert!((est.value - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn radial_moments_gaussian_half() {
        // phi = |z|^2/2, weight e^{-r^2}: h_n = pi n!
        let h = radial_moments(|r| -r * r, 6, 1e-12).unwrap();
        assert!((h[0] - PI).abs() < 1e-10 * PI);
        assert!((h[3] - 6.0 * PI).abs() < 1e-10 * 6.0 * PI);
        let f5 = 120.0;
        assert!((h[5] - f5 * PI).abs() < 1e-10 * f5 * PI);
    }

    #[test]
    fn radial_moments_zero_weight() {
        let h = radial_moments(|_| f64::NEG_INFINITY, 3, 1e-10).unwrap();
        assert!(h.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn positivity_and_linearity() {
        let rule = PlaneRule::polar(c(0.0, 0.0), 4.0, 24, 24);
        let a = rule.apply(|z| (-z.norm_sqr()).exp());
        let b = rule.apply(|z| z.re * z.re * (-z.norm_sqr()).exp());
        let combined = rule.apply(|z| (2.0 + 3.0 * z.re * z.re) * (-z.norm_sqr()).exp());
        assert!((combined - (2.0 * a + 3.0 * b)).abs() < 1e-12 * combined.abs());
        assert!(a >= 0.0 && b >= 0.0);
    }

    #[test]
    fn rotation_invariance_for_radial_integrands() {
        let base = PlaneRule::polar(c(0.0, 0.0), 5.0, 32, 40);
        let f = |z: Complex64| (1.0 + z.norm_sqr()).recip();
        let v0 = base.apply(f);
        // rotate all nodes by a fixed angle
        let rot = Complex64::from_polar(1.0, 0.731);
        let v1: f64 = base.nodes().iter().map(|&(z, w)| w * f(z * rot)).sum();
        assert!((v0 - v1).abs() < 1e-9 * v0.abs());
    }
}
