//! Operator-norm equivalences: ||T_mu|| against the kernel-action statistic
//! M_{p,mu} and the sup of the operator Berezin transform, plus the
//! eigenvalue-stabilization compactness indicator.

use anyhow::{bail, Result};
use num_complex::Complex64;

use focklab::toeplitz::{assemble, kernel_action_statistic, compactness_indicator, AssemblyResolution};
use focklab::transforms::berezin_operator;

use crate::context::Ctx;
use crate::export;
use crate::report::Report;

pub fn run(ctx: &Ctx) -> Result<Report> {
    let mut rep = ctx.new_report("toeplitz");
    let tol = &ctx.config.tolerances;
    let kernel = ctx.kernel();
    let points = ctx.config.grid_points();
    if points.is_empty() {
        bail!("toeplitz scenario needs a non-empty sample grid");
    }

    // kernel-action probes stay inside the trust radius of the truncation
    let probe_cut = ctx.basis.trust_radius().min(ctx.config.grid.r_max) * 0.95;
    let probes: Vec<Complex64> = points
        .iter()
        .filter(|z| z.norm() <= probe_cut)
        .step_by(4)
        .cloned()
        .collect();
    if probes.is_empty() {
        bail!("no grid points inside the trust radius for kernel-action probes");
    }

    let mut norm_over_m1 = Vec::new();
    let mut norm_over_m2 = Vec::new();
    let mut norm_over_tilde = Vec::new();

    for (label, mu) in &ctx.symbols {
        let t = assemble(&ctx.basis, mu, AssemblyResolution::default())?;
        export::write_matrix(&ctx.out_dir, &format!("toeplitz_matrix_{label}.csv"), &t)?;
        export::write_spectrum(
            &ctx.out_dir,
            &format!("toeplitz_spectrum_{label}.csv"),
            &t.eigenvalues(),
        )?;

        let norm = t.operator_norm();
        let m1 = kernel_action_statistic(&t, &kernel, 1.0, &probes)?;
        let m2 = kernel_action_statistic(&t, &kernel, 2.0, &probes)?;
        let mut sup_tilde = 0.0f64;
        for &z in &points {
            sup_tilde = sup_tilde.max(berezin_operator(&t, &kernel, z)?);
        }
        if norm <= 0.0 || m1 <= 0.0 || m2 <= 0.0 || sup_tilde <= 0.0 {
            bail!("symbol '{label}' yields a vanishing operator at this truncation");
        }
        rep.scalar(&format!("operator_norm_{label}"), norm);
        rep.scalar(&format!("kernel_action_p1_{label}"), m1);
        rep.scalar(&format!("kernel_action_p2_{label}"), m2);
        rep.scalar(&format!("sup_tilde_{label}"), sup_tilde);
        norm_over_m1.push(norm / m1);
        norm_over_m2.push(norm / m2);
        norm_over_tilde.push(norm / sup_tilde);

        // eigenvalue stabilization across the two truncation degrees
        let t_coarse = assemble(&ctx.basis_coarse, mu, AssemblyResolution::default())?;
        let head = ctx.basis_coarse.dim().min(6);
        let cr = compactness_indicator(&t_coarse, &t, head)?;
        rep.scalar(&format!("leading_drift_{label}"), cr.leading_drift);
        rep.scalar(&format!("tail_sup_{label}"), cr.tail_sup);
        rep.scalar(&format!("spectral_spread_{label}"), cr.spectral_spread);
    }

    for (name, values) in [
        ("operator_norm_over_kernel_action_p1", &norm_over_m1),
        ("operator_norm_over_kernel_action_p2", &norm_over_m2),
        ("operator_norm_over_sup_tilde", &norm_over_tilde),
    ] {
        let stat = rep.ratio(name, values);
        rep.flag_stability(&format!("{name}_stability"), stat, tol.ratio_window);
    }

    Ok(rep)
}
