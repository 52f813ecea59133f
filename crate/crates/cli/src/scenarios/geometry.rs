//! Geometry of the radius function: Lipschitz bound, two-sided comparison
//! on D^r disks, sigma-area bounds, empirical doubling and Christ exponents,
//! and the near-diagonal behaviour of the induced distance.

use anyhow::{bail, Result};
use num_complex::Complex64;
use rand::Rng;

use focklab::potential::{doubling_constant, christ_fit, DiskSpec, GeodesicGrid};

use crate::context::Ctx;
use crate::export;
use crate::report::Report;

fn c(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

pub fn run(ctx: &Ctx) -> Result<Report> {
    let mut rep = ctx.new_report("geometry");
    let tol = &ctx.config.tolerances;
    let points = ctx.config.grid_points();
    if points.is_empty() {
        bail!("geometry scenario needs a non-empty sample grid");
    }
    let g = ctx.config.grid.r_max;
    let mut rng = super::rng(ctx, 1);

    // rho over the sample grid
    let mut rho_vals = Vec::with_capacity(points.len());
    for &z in &points {
        rho_vals.push(ctx.rf.rho(z)?);
    }
    export::write_field(&ctx.out_dir, "geometry_rho_field.csv", "rho", &points, &rho_vals)?;
    let origin = c(0.0, 0.0);
    rep.scalar("rho_origin", ctx.rf.rho(origin)?);
    rep.scalar("rho_grid_min", rho_vals.iter().cloned().fold(f64::INFINITY, f64::min));
    rep.scalar("rho_grid_max", rho_vals.iter().cloned().fold(0.0, f64::max));
    rep.scalar("sigma_weight_origin", ctx.rf.sigma_weight(origin)?);

    // |rho(z) - rho(w)| <= |z - w|
    let mut lipschitz_excess = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let z = c(rng.gen_range(-g..g), rng.gen_range(-g..g));
        let w = c(rng.gen_range(-g..g), rng.gen_range(-g..g));
        if z == w {
            continue;
        }
        let excess = (ctx.rf.rho(z)? - ctx.rf.rho(w)?).abs() - (z - w).norm();
        lipschitz_excess = lipschitz_excess.max(excess);
    }
    rep.scalar("rho_lipschitz_excess", lipschitz_excess);
    rep.flag_le("rho_lipschitz", lipschitz_excess, tol.lipschitz_excess);

    // (1 - r) rho(z) <= rho(w) <= rho(z) / (1 - r) for w in D^r(z)
    for &r in &[0.1, 0.3, 0.5] {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..15 {
            let z = c(rng.gen_range(-g..g), rng.gen_range(-g..g));
            let rho_z = ctx.rf.rho(z)?;
            for k in 0..8 {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
                let w = z + 0.999 * r * rho_z * c(th.cos(), th.sin());
                let rho_w = ctx.rf.rho(w)?;
                worst = worst
                    .max((1.0 - r) * rho_z - rho_w)
                    .max(rho_w - rho_z / (1.0 - r));
            }
        }
        rep.flag_le(&format!("rho_comparison_r{r}"), worst, tol.lipschitz_excess);
    }

    // r^2 / 2 <= sigma(D^r(z)) <= 16 r^2
    for &r in &[0.1, 0.25, 0.45] {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..50 {
            let z = c(rng.gen_range(-g..g), rng.gen_range(-g..g));
            let s = ctx.rf.sigma_disk(z, r, 32)?;
            worst = worst.max(r * r / 2.0 - s).max(s - 16.0 * r * r);
        }
        rep.flag_le(&format!("sigma_disk_bounds_r{r}"), worst, tol.lipschitz_excess);
    }

    // empirical doubling constant over a center/radius sweep
    let centers: Vec<Complex64> = (0..8)
        .map(|_| c(rng.gen_range(-g..g), rng.gen_range(-g..g)))
        .collect();
    let radii = [0.25, 0.5, 1.0];
    rep.scalar(
        "doubling_constant",
        doubling_constant(&ctx.potential, &centers, &radii)?,
    );

    // Christ exponent fit over intersecting concentric-ish pairs
    let mut pairs = Vec::new();
    for _ in 0..40 {
        let z = c(rng.gen_range(-g..g), rng.gen_range(-g..g));
        let big_r = rng.gen_range(0.5..1.5);
        let small_r = big_r * rng.gen_range(0.2..0.9);
        let offset = rng.gen_range(0.0..0.5) * (big_r - small_r);
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        pairs.push((
            DiskSpec { center: z, radius: big_r },
            DiskSpec { center: z + offset * c(th.cos(), th.sin()), radius: small_r },
        ));
    }
    let fit = christ_fit(&ctx.potential, &pairs)?;
    rep.scalar("christ_c", fit.c);
    rep.scalar("christ_delta", fit.delta);

    // near-diagonal distance: d(z, w) ~ |z - w| / rho(z) for close pairs
    let grid = GeodesicGrid::build(&ctx.rf, g.min(2.0), None)?;
    let mut ratios = Vec::new();
    for _ in 0..6 {
        let extent = g.min(2.0) * 0.6;
        let z = c(rng.gen_range(-extent..extent), rng.gen_range(-extent..extent));
        let rho_z = ctx.rf.rho(z)?;
        let distances = grid.distances_from(z)?;
        for k in 0..4 {
            let th = std::f64::consts::TAU * k as f64 / 4.0;
            let w = z + 0.4 * rho_z * c(th.cos(), th.sin());
            let d = grid.distance_to_from(&distances, w)?;
            ratios.push(d * rho_z / (w - z).norm());
        }
    }
    let stat = rep.ratio("geodesic_near_diagonal", &ratios);
    rep.flag_stability("geodesic_near_diagonal_stability", stat, tol.ratio_window);

    Ok(rep)
}
