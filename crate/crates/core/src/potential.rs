//! The subharmonic weight phi with doubling Laplacian, and all the geometry
//! it induces: disk masses of Delta(phi), the radius function rho, doubling
//! and Christ constants, the geodesic distance, and the sigma weight 1/rho^2.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{FockError, Result};
use crate::quadrature::{gauss_legendre_on, DiskRule};

/// Relative tolerance for disk masses.
pub const MASS_TOL: f64 = 1e-8;
/// Relative tolerance for the radius root-finder.
pub const RADIUS_TOL: f64 = 1e-10;

type RealFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;
type PlaneFn = Box<dyn Fn(Complex64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// phi(z) = alpha |z|^2 / 2, Laplacian 2 alpha.
    GaussianAlpha(f64),
    /// phi(z) = scale |z|^(2m), Laplacian 4 m^2 scale |z|^(2m-2).
    RadialPower { m: f64, scale: f64 },
    CustomRadial,
    CustomGeneral,
}

/// The weight phi together with the density of Delta(phi).
pub struct Potential {
    kind: PotentialKind,
    phi: PlaneFn,
    laplacian: PlaneFn,
    // radial fast paths (profile as a function of |z|)
    radial_phi: Option<RealFn>,
    radial_lap: Option<RealFn>,
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Potential").field("kind", &self.kind).finish()
    }
}

impl Potential {
    pub fn gaussian(alpha: f64) -> Arc<Self> {
        assert!(alpha > 0.0);
        Arc::new(Potential {
            kind: PotentialKind::GaussianAlpha(alpha),
            phi: Box::new(move |z| 0.5 * alpha * z.norm_sqr()),
            laplacian: Box::new(move |_| 2.0 * alpha),
            radial_phi: Some(Box::new(move |r| 0.5 * alpha * r * r)),
            radial_lap: Some(Box::new(move |_| 2.0 * alpha)),
        })
    }

    pub fn radial_power(m: f64, scale: f64) -> Arc<Self> {
        assert!(m >= 1.0 && scale > 0.0);
        Arc::new(Potential {
            kind: PotentialKind::RadialPower { m, scale },
            phi: Box::new(move |z| scale * z.norm().powf(2.0 * m)),
            laplacian: Box::new(move |z| 4.0 * m * m * scale * z.norm().powf(2.0 * m - 2.0)),
            radial_phi: Some(Box::new(move |r| scale * r.powf(2.0 * m))),
            radial_lap: Some(Box::new(move |r| 4.0 * m * m * scale * r.powf(2.0 * m - 2.0))),
        })
    }

    /// Radial potential from tabulated (r, phi(r), lap(r)) samples, cubic
    /// interpolation inside the table and power-law continuation beyond it.
    pub fn custom_radial(samples: &[(f64, f64, f64)]) -> Result<Arc<Self>> {
        if samples.len() < 4 {
            return Err(FockError::InvalidInput(
                "custom radial profile needs at least 4 samples".into(),
            ));
        }
        let mut rows = samples.to_vec();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.iter().any(|&(_, _, l)| l < 0.0) {
            return Err(FockError::InvalidInput(
                "laplacian samples must be nonnegative".into(),
            ));
        }
        let rs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let phis: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let laps: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let phi_spline = CubicSpline::new(&rs, &phis)?;
        let lap_spline = CubicSpline::new(&rs, &laps)?;
        let phi_spline2 = phi_spline.clone();
        let lap_spline2 = lap_spline.clone();
        Ok(Arc::new(Potential {
            kind: PotentialKind::CustomRadial,
            phi: Box::new(move |z| phi_spline.eval(z.norm())),
            laplacian: Box::new(move |z| lap_spline.eval(z.norm()).max(0.0)),
            radial_phi: Some(Box::new(move |r| phi_spline2.eval(r))),
            radial_lap: Some(Box::new(move |r| lap_spline2.eval(r).max(0.0))),
        }))
    }

    /// General potential; the caller must supply both phi and its Laplacian
    /// density. Consistency is verified against a 5-point finite-difference
    /// Laplacian on a coarse grid.
    pub fn custom_general(
        phi: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
        laplacian: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
        check_radius: f64,
    ) -> Result<Arc<Self>> {
        let h = 1e-4;
        let steps = 9;
        let mut scale = 0.0f64;
        let mut samples = Vec::new();
        for i in 0..steps {
            for j in 0..steps {
                let x = -check_radius + 2.0 * check_radius * i as f64 / (steps - 1) as f64;
                let y = -check_radius + 2.0 * check_radius * j as f64 / (steps - 1) as f64;
                let z = Complex64::new(x, y);
                let lap = laplacian(z);
                if lap < 0.0 {
                    return Err(FockError::InvalidInput(format!(
                        "laplacian negative at {z}"
                    )));
                }
                scale = scale.max(lap.abs());
                samples.push(z);
            }
        }
        for &z in &samples {
            let fd = (phi(z + Complex64::new(h, 0.0))
                + phi(z - Complex64::new(h, 0.0))
                + phi(z + Complex64::new(0.0, h))
                + phi(z - Complex64::new(0.0, h))
                - 4.0 * phi(z))
                / (h * h);
            let rel = (fd - laplacian(z)).abs() / scale.max(1e-12);
            if rel > 1e-3 {
                return Err(FockError::LaplacianMismatch { point: z, max_rel: rel });
            }
        }
        Ok(Arc::new(Potential {
            kind: PotentialKind::CustomGeneral,
            phi: Box::new(phi),
            laplacian: Box::new(laplacian),
            radial_phi: None,
            radial_lap: None,
        }))
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn phi(&self, z: Complex64) -> f64 {
        (self.phi)(z)
    }

    pub fn laplacian(&self, z: Complex64) -> f64 {
        (self.laplacian)(z)
    }

    pub fn is_radial(&self) -> bool {
        self.radial_lap.is_some()
    }

    /// Radial profile of phi, when available.
    pub fn phi_radial(&self, r: f64) -> Option<f64> {
        self.radial_phi.as_ref().map(|f| f(r))
    }

    /// The exact reproducing kernel, present only for GaussianAlpha:
    /// K_z(w) = (alpha/pi) exp(alpha w conj(z)).
    pub fn exact_kernel(&self) -> Option<impl Fn(Complex64, Complex64) -> Complex64 + '_> {
        match self.kind {
            PotentialKind::GaussianAlpha(alpha) => Some(move |z: Complex64, w: Complex64| {
                (w * z.conj() * alpha).exp() * (alpha / PI)
            }),
            _ => None,
        }
    }

    /// Mass of Delta(phi) on the disk D(center, radius), by quadrature.
    pub fn disk_mass(&self, center: Complex64, radius: f64) -> Result<f64> {
        assert!(radius > 0.0);
        if let Some(lap) = &self.radial_lap {
            Ok(self.radial_disk_mass(lap, center.norm(), radius, 96))
        } else {
            self.general_disk_mass(center, radius)
        }
    }

    /// Same integral with a fixed low node count; used inside root-finding
    /// sweeps where the adaptive check would be wasteful.
    fn disk_mass_quick(&self, center: Complex64, radius: f64) -> f64 {
        if let Some(lap) = &self.radial_lap {
            self.radial_disk_mass(lap, center.norm(), radius, 48)
        } else {
            let rule = DiskRule::new(center, radius, 32, 48);
            rule.apply(|z| self.laplacian(z))
        }
    }

    /// Mass of a radial density over D(c, r) reduced to one dimension:
    /// the circle of radius s about the origin meets the disk in an arc of
    /// angle theta(s); the wedge part is integrated under a cosine
    /// substitution that absorbs the square-root endpoints.
    fn radial_disk_mass(&self, lap: &RealFn, d: f64, r: f64, n: usize) -> f64 {
        let theta = |s: f64| -> f64 {
            if d == 0.0 {
                return if s < r { TAU } else { 0.0 };
            }
            let c = (d * d + s * s - r * r) / (2.0 * d * s);
            if c <= -1.0 {
                TAU
            } else if c >= 1.0 {
                0.0
            } else {
                2.0 * c.acos()
            }
        };
        let mut total = 0.0;
        // full circles: s in [0, r - d]
        if d < r {
            let hi = r - d;
            if hi > 0.0 {
                let (xs, ws) = gauss_legendre_on(n, 0.0, hi);
                total += TAU * xs.iter().zip(&ws).map(|(&s, &w)| w * lap(s) * s).sum::<f64>();
            }
        }
        // wedge: s in [|d - r|, d + r], s = m - h cos(u)
        let lo = (d - r).abs();
        let hi = d + r;
        if hi > lo && d > 0.0 {
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let (us, ws) = gauss_legendre_on(n, 0.0, PI);
            total += us
                .iter()
                .zip(&ws)
                .map(|(&u, &w)| {
                    let s = mid - half * u.cos();
                    w * half * u.sin() * lap(s) * s * theta(s)
                })
                .sum::<f64>();
        }
        total
    }

    fn general_disk_mass(&self, center: Complex64, radius: f64) -> Result<f64> {
        let mut n = 32;
        let mut prev = DiskRule::new(center, radius, n, n + n / 2).apply(|z| self.laplacian(z));
        loop {
            n *= 2;
            let cur = DiskRule::new(center, radius, n, n + n / 2).apply(|z| self.laplacian(z));
            let err = (cur - prev).abs();
            if err <= MASS_TOL * cur.abs().max(1e-300) {
                return Ok(cur);
            }
            if n > 1024 {
                return Err(FockError::QuadratureNotConverged {
                    estimated: err,
                    tolerance: MASS_TOL,
                    context: format!("disk_mass at {center}, r = {radius}"),
                });
            }
            prev = cur;
        }
    }

    /// The unique r with mass(D(z, r)) = 1, by geometric bracketing and
    /// bisection (the mass is strictly increasing in r).
    pub fn radius(&self, z: Complex64) -> Result<f64> {
        self.radius_from_hint(z, 0.5)
    }

    pub fn radius_from_hint(&self, z: Complex64, hint: f64) -> Result<f64> {
        let mut hi = hint.max(1e-6);
        let mut grow = 0;
        while self.disk_mass_quick(z, hi) < 1.0 {
            hi *= 2.0;
            grow += 1;
            if grow > 60 {
                return Err(FockError::MeasureTooThin { center: z, reached: hi });
            }
        }
        let mut lo = hi / 2.0;
        while lo > 1e-300 && self.disk_mass_quick(z, lo) >= 1.0 {
            lo /= 2.0;
        }
        // bisection to relative tolerance RADIUS_TOL
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (hi - lo) < RADIUS_TOL * mid {
                return Ok(mid);
            }
            if self.disk_mass_quick(z, mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Cached view of the radius function rho over a region.
pub struct RadiusField {
    potential: Arc<Potential>,
    bracket_hint: f64,
    cache: Vec<(Complex64, f64)>,
    /// lazily built spline of rho(|z|) for radial potentials, with its extent
    radial_cache: std::sync::OnceLock<Option<(CubicSpline, f64)>>,
}

impl RadiusField {
    pub fn new(potential: Arc<Potential>) -> Self {
        RadiusField {
            potential,
            bracket_hint: 0.5,
            cache: Vec::new(),
            radial_cache: std::sync::OnceLock::new(),
        }
    }

    /// For radial potentials rho depends on |z| alone; one sweep of warm-hint
    /// solves feeds a spline that answers bulk queries at interpolation cost.
    /// A mirrored lead-in keeps the natural boundary condition away from
    /// r = 0, where queries concentrate.
    fn radial_rho(&self, r_abs: f64) -> Option<f64> {
        if !self.potential.is_radial() {
            return None;
        }
        let entry = self.radial_cache.get_or_init(|| {
            let extent = 12.0;
            let n = 2048usize;
            let h = extent / n as f64;
            let mut hint = 0.5;
            let mut radii = Vec::with_capacity(n + 9);
            let mut values = Vec::with_capacity(n + 9);
            for i in 0..=n {
                let r = h * i as f64;
                let rho = self
                    .potential
                    .radius_from_hint(Complex64::new(r, 0.0), hint)
                    .ok()?;
                hint = rho;
                radii.push(r);
                values.push(rho);
            }
            let mut xs: Vec<f64> = (1..=8).rev().map(|i| -h * i as f64).collect();
            let mut ys: Vec<f64> = (1..=8).rev().map(|i| values[i]).collect();
            xs.extend(radii);
            ys.extend(values);
            let spline = CubicSpline::new(&xs, &ys).ok()?;
            Some((spline, extent))
        });
        entry
            .as_ref()
            .filter(|&&(_, extent)| r_abs <= extent)
            .map(|(spline, _)| spline.eval(r_abs))
    }

    /// Precompute rho on a square grid of half-extent `r_max` with the given
    /// spacing. The cache is frozen after construction.
    pub fn with_grid(potential: Arc<Potential>, r_max: f64, spacing: f64) -> Result<Self> {
        let mut field = RadiusField::new(potential);
        let n = (2.0 * r_max / spacing).ceil() as usize + 1;
        let mut hint = 0.5;
        let mut cache = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = Complex64::new(
                    -r_max + spacing * i as f64,
                    -r_max + spacing * j as f64,
                );
                let r = field.potential.radius_from_hint(z, hint)?;
                hint = r;
                cache.push((z, r));
            }
        }
        field.bracket_hint = hint;
        field.cache = cache;
        Ok(field)
    }

    pub fn potential(&self) -> &Arc<Potential> {
        &self.potential
    }

    pub fn cached(&self) -> &[(Complex64, f64)] {
        &self.cache
    }

    pub fn rho(&self, z: Complex64) -> Result<f64> {
        if let Some(v) = self.radial_rho(z.norm()) {
            return Ok(v);
        }
        self.potential.radius_from_hint(z, self.bracket_hint)
    }

    /// The sigma weight 1/rho(z)^2 (density of d(sigma) = dA / rho^2).
    pub fn sigma_weight(&self, z: Complex64) -> Result<f64> {
        let r = self.rho(z)?;
        Ok(1.0 / (r * r))
    }

    /// sigma(D^r(z)) = int over D(z, r rho(z)) of dA / rho^2, by disk
    /// quadrature with per-node radius solves.
    pub fn sigma_disk(&self, z: Complex64, r: f64, n_nodes: usize) -> Result<f64> {
        let rho_z = self.rho(z)?;
        let rule = DiskRule::new(z, r * rho_z, n_nodes, n_nodes);
        let mut total = 0.0;
        for &(w, weight) in rule.nodes() {
            let rho_w = match self.radial_rho(w.norm()) {
                Some(v) => v,
                None => self.potential.radius_from_hint(w, rho_z)?,
            };
            total += weight / (rho_w * rho_w);
        }
        Ok(total)
    }
}

/// Max over the sample sweep of mass(D(z, 2r)) / mass(D(z, r)); an empirical
/// lower bound for the doubling constant.
pub fn doubling_constant(
    p: &Potential,
    sample_centers: &[Complex64],
    sample_radii: &[f64],
) -> Result<f64> {
    if sample_centers.is_empty() || sample_radii.is_empty() {
        return Err(FockError::InvalidInput("empty doubling sample set".into()));
    }
    let mut worst = 0.0f64;
    for &z in sample_centers {
        for &r in sample_radii {
            let small = p.disk_mass(z, r)?;
            if small <= 0.0 {
                return Err(FockError::DegenerateMass { center: z, radius: r });
            }
            let big = p.disk_mass(z, 2.0 * r)?;
            worst = worst.max(big / small);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy)]
pub struct DiskSpec {
    pub center: Complex64,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ChristFit {
    pub c: f64,
    pub delta: f64,
}

/// Fit the Christ constants: the smallest C on a log grid (delta on
/// {0.05, ..., 0.95}) such that
/// C^-1 (r'/r)^(1/delta) m(D) <= m(D') <= C (r'/r)^delta m(D)
/// for all sampled pairs. Pairs must intersect with r' < r.
pub fn christ_fit(p: &Potential, disk_pairs: &[(DiskSpec, DiskSpec)]) -> Result<ChristFit> {
    if disk_pairs.is_empty() {
        return Err(FockError::InvalidInput("empty disk pair set".into()));
    }
    let mut data = Vec::with_capacity(disk_pairs.len());
    for &(big, small) in disk_pairs {
        if small.radius >= big.radius {
            return Err(FockError::InvalidInput(
                "christ_fit pair must have r' < r".into(),
            ));
        }
        if (big.center - small.center).norm() >= big.radius + small.radius {
            return Err(FockError::InvalidInput(
                "christ_fit pair disks must intersect".into(),
            ));
        }
        let m_big = p.disk_mass(big.center, big.radius)?;
        let m_small = p.disk_mass(small.center, small.radius)?;
        if m_big <= 0.0 || m_small <= 0.0 {
            return Err(FockError::DegenerateMass {
                center: big.center,
                radius: big.radius,
            });
        }
        data.push((small.radius / big.radius, m_small / m_big));
    }
    let mut best: Option<ChristFit> = None;
    for k in 1..=19 {
        let delta = 0.05 * k as f64;
        // required C for this delta
        let mut c_req = 1.0f64;
        for &(t, q) in &data {
            // lower: C >= t^(1/delta) / q ; upper: C >= q / t^delta
            c_req = c_req.max(t.powf(1.0 / delta) / q).max(q / t.powf(delta));
        }
        if c_req > 1e6 {
            continue;
        }
        // snap up on the log grid 10^(j/20)
        let j = (c_req.log10() * 20.0).ceil().max(0.0);
        let c_grid = 10f64.powf(j / 20.0);
        let better = match best {
            None => true,
            Some(b) => c_grid < b.c || (c_grid == b.c && delta > b.delta),
        };
        if better {
            best = Some(ChristFit { c: c_grid, delta });
        }
    }
    best.ok_or_else(|| FockError::FitFailure {
        context: "christ_fit: no (C, delta) within C <= 1e6".into(),
    })
}

#[derive(Clone, Copy, PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Rectangular grid graph approximating the metric rho^-2 dz (x) d(conj z);
/// 8-neighbor edges weighted by |segment| * 2 / (rho(a) + rho(b)).
pub struct GeodesicGrid {
    origin: Complex64,
    spacing: f64,
    nx: usize,
    ny: usize,
    rho: Vec<f64>,
}

impl GeodesicGrid {
    /// Build over the square [-r_max, r_max]^2. Spacing defaults to
    /// min(rho)/8 over the domain when `spacing` is None.
    pub fn build(rf: &RadiusField, r_max: f64, spacing: Option<f64>) -> Result<Self> {
        let h = match spacing {
            Some(h) => h,
            None => {
                let mut min_rho = f64::INFINITY;
                let probe = 9;
                for i in 0..probe {
                    for j in 0..probe {
                        let z = Complex64::new(
                            -r_max + 2.0 * r_max * i as f64 / (probe - 1) as f64,
                            -r_max + 2.0 * r_max * j as f64 / (probe - 1) as f64,
                        );
                        min_rho = min_rho.min(rf.rho(z)?);
                    }
                }
                min_rho / 8.0
            }
        };
        let n = (2.0 * r_max / h).round() as usize + 1;
        let origin = Complex64::new(-r_max, -r_max);
        let mut rho = Vec::with_capacity(n * n);
        let mut hint = 0.5;
        for j in 0..n {
            for i in 0..n {
                let z = origin + Complex64::new(h * i as f64, h * j as f64);
                let r = rf.potential().radius_from_hint(z, hint)?;
                hint = r;
                rho.push(r);
            }
        }
        Ok(GeodesicGrid {
            origin,
            spacing: h,
            nx: n,
            ny: n,
            rho,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    fn nearest_node(&self, z: Complex64) -> Result<usize> {
        let fx = (z.re - self.origin.re) / self.spacing;
        let fy = (z.im - self.origin.im) / self.spacing;
        let i = fx.round();
        let j = fy.round();
        if i < 0.0 || j < 0.0 || i as usize >= self.nx || j as usize >= self.ny {
            return Err(FockError::OutsideHull { point: z });
        }
        Ok(j as usize * self.nx + i as usize)
    }

    fn node_point(&self, idx: usize) -> Complex64 {
        let i = idx % self.nx;
        let j = idx / self.nx;
        self.origin + Complex64::new(self.spacing * i as f64, self.spacing * j as f64)
    }

    /// Dijkstra distances from the node nearest to `z` to every grid node.
    pub fn distances_from(&self, z: Complex64) -> Result<Vec<f64>> {
        let src = self.nearest_node(z)?;
        let n = self.nx * self.ny;
        let mut dist = vec![f64::INFINITY; n];
        dist[src] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((OrdF64(0.0), src)));
        let diag = self.spacing * std::f64::consts::SQRT_2;
        while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            let ui = (u % self.nx) as i64;
            let uj = (u / self.nx) as i64;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let vi = ui + di;
                    let vj = uj + dj;
                    if vi < 0 || vj < 0 || vi as usize >= self.nx || vj as usize >= self.ny {
                        continue;
                    }
                    let v = vj as usize * self.nx + vi as usize;
                    let seg = if di != 0 && dj != 0 { diag } else { self.spacing };
                    let w = seg * 2.0 / (self.rho[u] + self.rho[v]);
                    let nd = d + w;
                    if nd < dist[v] {
                        dist[v] = nd;
                        heap.push(Reverse((OrdF64(nd), v)));
                    }
                }
            }
        }
        Ok(dist)
    }

    /// Shortest-path upper bound for the geodesic distance d_phi(z, w).
    pub fn distance(&self, z: Complex64, w: Complex64) -> Result<f64> {
        let target = self.nearest_node(w)?;
        let dist = self.distances_from(z)?;
        Ok(dist[target])
    }

    /// Distance from `z` to an arbitrary point via its nearest node.
    pub fn distance_to_from(&self, distances: &[f64], w: Complex64) -> Result<f64> {
        Ok(distances[self.nearest_node(w)?])
    }

    pub fn node_points(&self) -> Vec<Complex64> {
        (0..self.nx * self.ny).map(|i| self.node_point(i)).collect()
    }
}

/// Natural cubic spline with linear extrapolation.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 3 || ys.len() != n {
            return Err(FockError::InvalidInput("spline needs >= 3 samples".into()));
        }
        for w in xs.windows(2) {
            if w[1] <= w[0] {
                return Err(FockError::InvalidInput("spline abscissae must increase".into()));
            }
        }
        // tridiagonal solve for second derivatives, natural boundary
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        b[0] = 1.0;
        b[n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            a[i] = h0;
            b[i] = 2.0 * (h0 + h1);
            c[i] = h1;
            d[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        // Thomas algorithm
        for i in 1..n {
            let m = a[i] / b[i - 1];
            b[i] -= m * c[i - 1];
            d[i] -= m * d[i - 1];
        }
        let mut second = vec![0.0; n];
        second[n - 1] = d[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            second[i] = (d[i] - c[i] * second[i + 1]) / b[i];
        }
        Ok(CubicSpline {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            second,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            let slope = (self.ys[1] - self.ys[0]) / (self.xs[1] - self.xs[0]);
            return self.ys[0] + slope * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            let slope = (self.ys[n - 1] - self.ys[n - 2]) / (self.xs[n - 1] - self.xs[n - 2]);
            return self.ys[n - 1] + slope * (x - self.xs[n - 1]);
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.xs[hi] - self.xs[lo];
        let a = (self.xs[hi] - x) / h;
        let b = (x - self.xs[lo]) / h;
        a * self.ys[lo]
            + b * self.ys[hi]
            + ((a * a * a - a) * self.second[lo] + (b * b * b - b) * self.second[hi]) * h * h / 6.0
    }
}
