//! Machine-readable scenario reports. All tables are BTreeMaps so the JSON
//! serialization is byte-for-byte deterministic for a given config hash.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatioStat {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl RatioStat {
    pub fn from_values(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "ratio table entry needs at least one value");
        let mut v: Vec<f64> = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        RatioStat { min: v[0], median, max: v[n - 1] }
    }

    pub fn spread(&self) -> f64 {
        if self.min > 0.0 {
            self.max / self.min
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Flag {
    pub pass: bool,
    pub threshold: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub crate_version: String,
    pub schema_version: u32,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub scenario: String,
    pub scalars: BTreeMap<String, f64>,
    pub ratios: BTreeMap<String, RatioStat>,
    pub flags: BTreeMap<String, Flag>,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(scenario: &str, provenance: Provenance) -> Self {
        Report {
            scenario: scenario.to_string(),
            scalars: BTreeMap::new(),
            ratios: BTreeMap::new(),
            flags: BTreeMap::new(),
            provenance,
        }
    }

    pub fn scalar(&mut self, name: &str, value: f64) {
        assert!(value.is_finite(), "scalar {name} is not finite ({value})");
        self.scalars.insert(name.to_string(), value);
    }

    pub fn ratio(&mut self, name: &str, values: &[f64]) -> RatioStat {
        let stat = RatioStat::from_values(values);
        self.ratios.insert(name.to_string(), stat);
        stat
    }

    /// Flag passing when observed <= threshold.
    pub fn flag_le(&mut self, name: &str, observed: f64, threshold: f64) {
        self.flags.insert(
            name.to_string(),
            Flag { pass: observed.is_finite() && observed <= threshold, threshold, observed },
        );
    }

    /// Ratio-stability flag: max/min of the sweep within the window.
    pub fn flag_stability(&mut self, name: &str, stat: RatioStat, window: f64) {
        self.flag_le(name, stat.spread(), window);
    }

    pub fn all_pass(&self) -> bool {
        self.flags.values().all(|f| f.pass)
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output dir {}", out_dir.display()))?;
        let path = out_dir.join(format!("{}.json", self.scenario));
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        fs::write(&path, body)
            .with_context(|| format!("writing report {}", path.display()))?;
        Ok(path)
    }
}
