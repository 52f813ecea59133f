//! Shared scenario context: the potential, its radius field, the truncated
//! orthonormal basis at two degrees, and the built symbol family.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context as _, Result};
use num_complex::Complex64;

use focklab::basis::{build_basis, KernelEvaluator, OrthonormalBasis};
use focklab::quadrature::PlaneRule;
use focklab::{Potential, RadiusField, SymbolMeasure};

use crate::config::{ExperimentConfig, LoadedConfig};
use crate::report::{Provenance, Report};

pub struct Ctx {
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub potential: Arc<Potential>,
    pub rf: RadiusField,
    pub basis: Arc<OrthonormalBasis>,
    /// half-degree basis for truncation-drift diagnostics
    pub basis_coarse: Arc<OrthonormalBasis>,
    pub symbols: Vec<(String, SymbolMeasure)>,
}

/// Quadrature cutoff radius large enough that every basis monomial up to
/// degree n has negligible mass outside it.
pub fn basis_cutoff(potential: &Potential, n: usize) -> f64 {
    // for phi ~ |z|^2/2 the density |z|^(2n) e^(-|z|^2) peaks at sqrt(n);
    // flatter potentials are caught by the generous additive margin
    let peak = (2.0 * (n as f64 + 2.0)).sqrt();
    let rho0 = potential
        .radius(Complex64::new(0.0, 0.0))
        .unwrap_or(1.0)
        .max(1.0);
    peak + 4.0 * rho0
}

impl Ctx {
    pub fn build(loaded: LoadedConfig, seed: u64, out_dir: PathBuf) -> Result<Self> {
        let LoadedConfig { config, sha256, base_dir } = loaded;
        let potential = config
            .potential
            .build(&base_dir)
            .context("building potential")?;
        let rf = RadiusField::new(Arc::clone(&potential));

        let n = config.basis_degree;
        let rule = |deg: usize| {
            PlaneRule::polar(
                Complex64::new(0.0, 0.0),
                basis_cutoff(&potential, deg),
                160,
                96,
            )
        };
        let basis = Arc::new(
            build_basis(&potential, n, &rule(n)).context("building orthonormal basis")?,
        );
        let n_coarse = (n / 2).max(2);
        let basis_coarse = Arc::new(
            build_basis(&potential, n_coarse, &rule(n_coarse))
                .context("building coarse basis")?,
        );

        let mut symbols = Vec::with_capacity(config.symbols.len());
        for spec in &config.symbols {
            let label = spec.label();
            let mu = spec
                .build(&base_dir)
                .with_context(|| format!("building symbol '{label}'"))?;
            symbols.push((label, mu));
        }

        Ok(Ctx {
            config,
            config_sha256: sha256,
            seed,
            out_dir,
            potential,
            rf,
            basis,
            basis_coarse,
            symbols,
        })
    }

    pub fn kernel(&self) -> KernelEvaluator {
        KernelEvaluator::with_exact_form(Arc::clone(&self.basis))
            .unwrap_or_else(|_| KernelEvaluator::new(Arc::clone(&self.basis)))
    }

    pub fn new_report(&self, scenario: &str) -> Report {
        Report::new(
            scenario,
            Provenance {
                config_sha256: self.config_sha256.clone(),
                crate_version: env!("CARGO_PKG_VERSION").to_string(),
                schema_version: crate::config::SCHEMA_VERSION,
                seed: self.seed,
            },
        )
    }
}
