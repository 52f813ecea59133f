//! The five verification scenarios and the helpers they share.

pub mod carleson;
pub mod geometry;
pub mod schatten;
pub mod toeplitz;
pub mod trace;

use anyhow::{bail, Result};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use focklab::quadrature::DiskRule;
use focklab::{Potential, SymbolMeasure};

use crate::context::Ctx;
use crate::report::Report;

pub const ALL: [&str; 5] = ["carleson", "geometry", "schatten", "toeplitz", "trace"];

pub fn run(name: &str, ctx: &Ctx) -> Result<Report> {
    match name {
        "geometry" => geometry::run(ctx),
        "carleson" => carleson::run(ctx),
        "toeplitz" => toeplitz::run(ctx),
        "schatten" => schatten::run(ctx),
        "trace" => trace::run(ctx),
        other => bail!("unknown scenario '{other}'"),
    }
}

/// Deterministic per-scenario generator: the recorded seed XORed with a
/// scenario tag, so scenarios draw independent streams from one seed.
pub fn rng(ctx: &Ctx, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(ctx.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(tag + 1)))
}

/// Random coefficient vector over the orthonormal basis with unit-variance
/// entries (the well-conditioned way to draw test polynomials).
pub fn random_coeffs(rng: &mut ChaCha8Rng, dim: usize) -> DVector<Complex64> {
    DVector::from_iterator(
        dim,
        (0..dim).map(|_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                * (1.5f64).sqrt()
        }),
    )
}

/// Energy of a function against a positive measure:
/// int |f(w)|^2 e^{-2 phi(w)} d mu(w), exact over atoms, quadrature on
/// density supports. The p = 2 embedding functional of the Carleson theorem.
pub fn measure_energy(
    mu: &SymbolMeasure,
    pot: &Potential,
    f: &impl Fn(Complex64) -> Complex64,
) -> f64 {
    let weight = |w: Complex64| f(w).norm_sqr() * (-2.0 * pot.phi(w)).exp();
    match mu {
        SymbolMeasure::Atomic { points, masses } => points
            .iter()
            .zip(masses)
            .map(|(&a, &m)| m * weight(a))
            .sum(),
        SymbolMeasure::Density { density, support_center, support_radius } => {
            DiskRule::new(*support_center, *support_radius, 96, 256)
                .apply(|w| density(w) * weight(w))
        }
        SymbolMeasure::Scaled { factor, inner } => {
            factor * measure_energy(inner, pot, f)
        }
        SymbolMeasure::Sum(parts) => {
            parts.iter().map(|p| measure_energy(p, pot, f)).sum()
        }
    }
}
