//! CSV grids, JSON metric documents and the hashed run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{AmbiguityGrid, GridKind, GridSpec, GridValues};
use crate::harness::{ExperimentResult, KindMetrics};
use crate::metrics::mainlobe_region;
use crate::modulator::AfdmConfig;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";
pub const SUMMARY_NAME: &str = "summary.csv";

fn fmt_value(v: f64) -> String {
    format!("{v:.15e}")
}

/// Header `tau,nu,value`, or `tau,nu,re,im` for complex grids; rows τ-major.
pub fn grid_to_csv(grid: &AmbiguityGrid) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    let taus = grid.spec.tau_axis().coords();
    let nus = grid.spec.nu_axis().coords();
    match &grid.values {
        GridValues::Real(v) => {
            w.write_record(["tau", "nu", "value"]).map_err(ser)?;
            for (i, tau) in taus.iter().enumerate() {
                for (j, nu) in nus.iter().enumerate() {
                    let x = v[i * nus.len() + j];
                    w.write_record([tau.to_string(), nu.to_string(), fmt_value(x)]).map_err(ser)?;
                }
            }
        }
        GridValues::Complex(v) => {
            w.write_record(["tau", "nu", "re", "im"]).map_err(ser)?;
            for (i, tau) in taus.iter().enumerate() {
                for (j, nu) in nus.iter().enumerate() {
                    let z = v[i * nus.len() + j];
                    w.write_record([tau.to_string(), nu.to_string(), fmt_value(z.re), fmt_value(z.im)])
                        .map_err(ser)?;
                }
            }
        }
    }
    w.into_inner().map_err(|e| Error::Serialize(e.to_string()))
}

/// Parsed CSV grid: coordinates and values in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvGrid {
    pub coords: Vec<(f64, f64)>,
    pub values: GridValues,
}

pub fn read_grid_csv(path: &Path) -> Result<CsvGrid> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Serialize(format!("{}: {e}", path.display())))?;
    let header = r.headers().map_err(|e| Error::Serialize(e.to_string()))?.clone();
    let complex = match header.iter().collect::<Vec<_>>().as_slice() {
        ["tau", "nu", "value"] => false,
        ["tau", "nu", "re", "im"] => true,
        _ => return Err(Error::Serialize(format!("unexpected CSV header in {}", path.display()))),
    };
    let mut coords = Vec::new();
    let (mut real, mut cplx) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Serialize(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Serialize(format!("bad number in {}", path.display())))
        };
        coords.push((num(0)?, num(1)?));
        if complex {
            cplx.push(Complex64::new(num(2)?, num(3)?));
        } else {
            real.push(num(2)?);
        }
    }
    let values = if complex { GridValues::Complex(cplx) } else { GridValues::Real(real) };
    Ok(CsvGrid { coords, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub tau: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub schema_version: u32,
    pub config: AfdmConfig,
    pub grid: GridSpec,
    pub grid_kind: GridKind,
    pub pslr_db: f64,
    pub islr_db: f64,
    pub peak_sidelobe: Point,
    pub trials: usize,
    pub base_seed: u64,
    pub rng_name: String,
    pub mainlobe_vertices: Vec<Point>,
}

impl MetricsDocument {
    pub fn new(result: &ExperimentResult, cfg: &AfdmConfig, m: &KindMetrics) -> Self {
        let vertices = mainlobe_region(cfg).vertices_f64().iter().map(|&(tau, nu)| Point { tau, nu }).collect();
        MetricsDocument {
            schema_version: SCHEMA_VERSION,
            config: cfg.clone(),
            grid: result.plan.grid,
            grid_kind: m.grid_kind,
            pslr_db: m.metrics.pslr_db,
            islr_db: m.metrics.islr_db,
            peak_sidelobe: Point { tau: m.metrics.peak_sidelobe_tau, nu: m.metrics.peak_sidelobe_nu },
            trials: result.provenance.trials,
            base_seed: result.provenance.base_seed,
            rng_name: result.provenance.rng_name.clone(),
            mainlobe_vertices: vertices,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub software: String,
    pub version: String,
    /// Seconds since the Unix epoch. The only time-dependent field of a run.
    pub created_unix: u64,
    pub files: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Emitter {
    root: PathBuf,
    files: Vec<ManifestEntry>,
}

impl Emitter {
    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.files.push(ManifestEntry { path: rel.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v).map_err(|e| Error::Serialize(e.to_string()))?;
    b.push(b'\n');
    Ok(b)
}

/// Metrics of every config and grid kind as one table.
pub fn summary_csv(result: &ExperimentResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(["label", "n", "order", "c1", "c2", "grid_kind", "pslr_db", "islr_db", "peak_tau", "peak_nu"])
        .map_err(ser)?;
    for c in &result.configs {
        for m in &c.metrics {
            w.write_record([
                c.cfg.label(),
                c.cfg.n.to_string(),
                c.cfg.order.to_string(),
                crate::modulator::format_rational(&c.cfg.c1),
                c.cfg.c2.to_string(),
                m.grid_kind.name().to_string(),
                fmt_value(m.metrics.pslr_db),
                fmt_value(m.metrics.islr_db),
                m.metrics.peak_sidelobe_tau.to_string(),
                m.metrics.peak_sidelobe_nu.to_string(),
            ])
            .map_err(ser)?;
        }
    }
    w.into_inner().map_err(|e| Error::Serialize(e.to_string()))
}

/// Writes `<label>/<kind>.csv` (when `grids` is set), `<label>/<kind>.metrics.json`
/// for each magnitude grid, `summary.csv`, then `manifest.json` over all of them.
pub fn emit_outputs(result: &ExperimentResult, out_dir: &Path, grids: bool) -> Result<Manifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let mut em = Emitter { root: out_dir.to_path_buf(), files: Vec::new() };
    for c in &result.configs {
        let label = c.cfg.label();
        if grids {
            for g in &c.grids {
                em.write(&format!("{label}/{}.csv", g.kind.name()), &grid_to_csv(g)?)?;
            }
        }
        for m in &c.metrics {
            let doc = MetricsDocument::new(result, &c.cfg, m);
            em.write(&format!("{label}/{}.metrics.json", m.grid_kind.name()), &json_bytes(&doc)?)?;
        }
    }
    em.write(SUMMARY_NAME, &summary_csv(result)?)?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        software: result.provenance.software.clone(),
        version: result.provenance.version.clone(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        files: em.files,
    };
    let path = out_dir.join(MANIFEST_NAME);
    fs::write(&path, json_bytes(&manifest)?).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(manifest)
}

/// Writes a standalone JSON document and returns its path.
pub fn write_json<T: Serialize>(out_dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let path = out_dir.join(name);
    fs::write(&path, json_bytes(value)?).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(path)
}
