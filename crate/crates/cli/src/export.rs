//! CSV dumps: matrices, spectra, sampled fields, lattice points.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use num_complex::Complex64;

use focklab::lattice::Lattice;
use focklab::toeplitz::ToeplitzMatrix;

fn writer(out_dir: &Path, name: &str) -> Result<csv::Writer<fs::File>> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    let path: PathBuf = out_dir.join(name);
    csv::Writer::from_path(&path)
        .with_context(|| format!("opening CSV {}", path.display()))
}

pub fn write_matrix(out_dir: &Path, name: &str, t: &ToeplitzMatrix) -> Result<()> {
    let mut w = writer(out_dir, name)?;
    w.write_record(["row", "col", "re", "im"])?;
    for m in 0..t.dim() {
        for n in 0..t.dim() {
            let e = t.entry(m, n);
            w.write_record([
                m.to_string(),
                n.to_string(),
                format!("{:.17e}", e.re),
                format!("{:.17e}", e.im),
            ])?;
        }
    }
    Ok(w.flush()?)
}

pub fn write_spectrum(out_dir: &Path, name: &str, eigenvalues: &[f64]) -> Result<()> {
    let mut w = writer(out_dir, name)?;
    w.write_record(["k", "lambda"])?;
    for (k, ev) in eigenvalues.iter().enumerate() {
        w.write_record([k.to_string(), format!("{ev:.17e}")])?;
    }
    Ok(w.flush()?)
}

pub fn write_field(
    out_dir: &Path,
    name: &str,
    value_name: &str,
    points: &[Complex64],
    values: &[f64],
) -> Result<()> {
    let mut w = writer(out_dir, name)?;
    w.write_record(["x", "y", value_name])?;
    for (z, v) in points.iter().zip(values) {
        w.write_record([
            format!("{:.17e}", z.re),
            format!("{:.17e}", z.im),
            format!("{v:.17e}"),
        ])?;
    }
    Ok(w.flush()?)
}

pub fn write_lattice(out_dir: &Path, name: &str, lat: &Lattice) -> Result<()> {
    let mut w = writer(out_dir, name)?;
    w.write_record(["x", "y", "rho"])?;
    for (z, rho) in lat.points.iter().zip(&lat.rho) {
        w.write_record([
            format!("{:.17e}", z.re),
            format!("{:.17e}", z.im),
            format!("{rho:.17e}"),
        ])?;
    }
    Ok(w.flush()?)
}
