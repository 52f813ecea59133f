//! Carleson-measure equivalences: sup of the r-averaging transform, sup of
//! the Berezin transform, and a test-function lower bound for the embedding
//! norm, with scaling invariance and the vanishing detector.

use anyhow::{bail, Result};
use num_complex::Complex64;

use focklab::symbol::averaging_transform;
use focklab::transforms::{berezin_measure, vanishing_detector, TransformField};

use crate::context::Ctx;
use crate::export;
use crate::report::Report;

pub fn run(ctx: &Ctx) -> Result<Report> {
    let mut rep = ctx.new_report("carleson");
    let tol = &ctx.config.tolerances;
    let kernel = ctx.kernel();
    let points = ctx.config.grid_points();
    if points.is_empty() {
        bail!("carleson scenario needs a non-empty sample grid");
    }
    let r = ctx.config.averaging_radius;
    let mut rng = super::rng(ctx, 2);

    // p = 2 test functions: normalized kernels on a grid subsample plus
    // random polynomials over the orthonormal basis
    let step = (points.len() / 12).max(1);
    let kernel_centers: Vec<Complex64> = points.iter().step_by(step).cloned().collect();
    let random_polys: Vec<_> = (0..5)
        .map(|_| super::random_coeffs(&mut rng, ctx.basis.dim()))
        .collect();

    let embedding_bound = |mu: &focklab::SymbolMeasure| -> Result<f64> {
        let mut best = 0.0f64;
        for &z in &kernel_centers {
            let coeffs = kernel.normalized_coeffs2(z)?;
            let f = |w: Complex64| ctx.basis.eval_function(&coeffs, w);
            // normalized kernels have unit norm
            best = best.max(super::measure_energy(mu, &ctx.potential, &f));
        }
        for coeffs in &random_polys {
            let norm2: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
            let f = |w: Complex64| ctx.basis.eval_function(coeffs, w);
            best = best.max(super::measure_energy(mu, &ctx.potential, &f) / norm2);
        }
        Ok(best)
    };

    let mut hat_over_tilde = Vec::new();
    let mut embed_over_hat = Vec::new();
    let mut embed_over_tilde = Vec::new();

    for (label, mu) in &ctx.symbols {
        let hat = TransformField::over_grid(&points, label, |z| {
            averaging_transform(mu, &ctx.rf, r, z)
        })?;
        export::write_field(
            &ctx.out_dir,
            &format!("carleson_hat_{label}.csv"),
            "mu_hat",
            &hat.points,
            &hat.values,
        )?;
        let tilde = TransformField::over_grid(&points, label, |z| {
            berezin_measure(&kernel, mu, z)
        })?;
        export::write_field(
            &ctx.out_dir,
            &format!("carleson_tilde_{label}.csv"),
            "mu_tilde",
            &tilde.points,
            &tilde.values,
        )?;

        let sup_hat = hat.sup();
        let sup_tilde = tilde.sup();
        let embed = embedding_bound(mu)?;
        if sup_hat <= 0.0 || sup_tilde <= 0.0 || embed <= 0.0 {
            bail!("symbol '{label}' has no mass visible from the sample grid");
        }
        rep.scalar(&format!("sup_hat_{label}"), sup_hat);
        rep.scalar(&format!("sup_tilde_{label}"), sup_tilde);
        rep.scalar(&format!("embedding_lower_{label}"), embed);
        hat_over_tilde.push(sup_hat / sup_tilde);
        embed_over_hat.push(embed / sup_hat);
        embed_over_tilde.push(embed / sup_tilde);

        let vr = vanishing_detector(&tilde, &ctx.config.annuli);
        rep.scalar(
            &format!("vanishing_tilde_{label}"),
            if vr.vanishing { 1.0 } else { 0.0 },
        );
        rep.scalar(
            &format!("tail_sup_tilde_{label}"),
            *vr.annulus_sups.last().unwrap_or(&0.0),
        );
    }

    for (name, values) in [
        ("sup_hat_over_sup_tilde", &hat_over_tilde),
        ("embedding_over_sup_hat", &embed_over_hat),
        ("embedding_over_sup_tilde", &embed_over_tilde),
    ] {
        let stat = rep.ratio(name, values);
        rep.flag_stability(&format!("{name}_stability"), stat, tol.ratio_window);
    }

    // exact homogeneity under mu -> c mu: every quantity is linear in the
    // measure, so the normalized values must agree to roundoff
    let (label, mu) = &ctx.symbols[0];
    let sweep_points: Vec<Complex64> = points
        .iter()
        .step_by((points.len() / 10).max(1))
        .cloned()
        .collect();
    let quantities = |mu: &focklab::SymbolMeasure| -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for &z in &sweep_points {
            out.push(averaging_transform(mu, &ctx.rf, r, z)?);
            out.push(berezin_measure(&kernel, mu, z)?);
        }
        let coeffs = &random_polys[0];
        let f = |w: Complex64| ctx.basis.eval_function(coeffs, w);
        out.push(super::measure_energy(mu, &ctx.potential, &f));
        Ok(out)
    };
    let base = quantities(mu)?;
    let mut drift = 0.0f64;
    for &c in &ctx.config.scaling_sweep {
        let scaled = quantities(&mu.clone().scaled(c))?;
        for (a, b) in base.iter().zip(&scaled) {
            if *a != 0.0 {
                drift = drift.max((b / (c * a) - 1.0).abs());
            }
        }
    }
    rep.scalar(&format!("scaling_drift_{label}"), drift);
    rep.flag_le("scaling_invariance", drift, tol.homogeneity_rel);

    Ok(rep)
}
