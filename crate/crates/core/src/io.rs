//! Deterministic serialization: RFC-4180 CSV with full round-trip float
//! precision, compact binary grid dumps with a JSON header, content-hashed
//! run manifests, and minimal SVG figures (no timestamps anywhere, so
//! identical runs produce identical bytes).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{EmpiricalMeasure, EventKind, JumpPath};
use crate::pde::DensityPath;
use crate::rate::RateBreakdown;
use crate::spectral::SpectralBasis;

/// 17 significant digits: enough for exact f64 round trips, '.' decimal.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("io failure on {path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("serialization failure: {0}")]
    Json(#[from] serde_json::Error),
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    fs::write(path, bytes).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_jump_path_csv(path: &JumpPath, file: &Path) -> Result<(), IoError> {
    let mut out = String::from("time,kind,site\n");
    let last_site = path.initial.sites();
    for e in &path.events {
        let (kind, site) = match e.kind {
            EventKind::Bond(b) => ("bond", b as usize + 1),
            EventKind::LeftFlip => ("left_flip", 1),
            EventKind::RightFlip => ("right_flip", last_site),
        };
        out.push_str(&format!("{},{},{}\n", fmt_float(e.time), kind, site));
    }
    write_bytes(file, out.as_bytes())
}

pub fn write_empirical_csv(measure: &EmpiricalMeasure, file: &Path) -> Result<(), IoError> {
    let mut out = String::from("site,occupancy\n");
    let occupied: std::collections::BTreeSet<u32> = measure.atom_sites.iter().copied().collect();
    for k in 1..measure.n_scale as u32 {
        out.push_str(&format!("{},{}\n", k, u8::from(occupied.contains(&k))));
    }
    write_bytes(file, out.as_bytes())
}

/// `(t, x, u)` rows, thinned in time by `stride` (the final slice is always
/// included).
pub fn write_density_path_csv(
    path: &DensityPath,
    stride: usize,
    file: &Path,
) -> Result<(), IoError> {
    let stride = stride.max(1);
    let mut out = String::from("t,x,u\n");
    let l = path.steps();
    let mut indices: Vec<usize> = (0..=l).step_by(stride).collect();
    if *indices.last().unwrap() != l {
        indices.push(l);
    }
    for i in indices {
        for (j, x) in path.grid.nodes().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_float(path.times[i]),
                fmt_float(x),
                fmt_float(path.value(i, j))
            ));
        }
    }
    write_bytes(file, out.as_bytes())
}

#[derive(Debug, Serialize, Deserialize)]
struct GridDumpHeader {
    format: String,
    version: u32,
    scheme: String,
    time_nodes: usize,
    space_cells: usize,
    t_final: f64,
}

/// JSON header line followed by little-endian f64 rows (times, then values).
pub fn write_density_path_binary(
    path: &DensityPath,
    scheme: &str,
    file: &Path,
) -> Result<(), IoError> {
    let header = GridDumpHeader {
        format: "robin-sep-grid".into(),
        version: 1,
        scheme: scheme.into(),
        time_nodes: path.times.len(),
        space_cells: path.grid.m(),
        t_final: path.horizon(),
    };
    let mut bytes = serde_json::to_vec(&header)?;
    bytes.push(b'\n');
    for t in &path.times {
        bytes.extend_from_slice(&t.to_le_bytes());
    }
    for v in path.values_flat() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_bytes(file, &bytes)
}

pub fn write_spectral_csv(basis: &SpectralBasis, file: &Path) -> Result<(), IoError> {
    let mut out = String::from("j,lambda_j,a_j,residual\n");
    for j in 1..=basis.truncation {
        out.push_str(&format!(
            "{},{},{},{}\n",
            j,
            fmt_float(basis.eigenvalues[j - 1]),
            fmt_float(basis.amplitudes[j - 1]),
            fmt_float(basis.residual(j))
        ));
    }
    write_bytes(file, out.as_bytes())
}

/// Per-time integrand sidecar for a rate evaluation.
pub fn write_rate_integrands_csv(
    times: &[f64],
    breakdown: &RateBreakdown,
    file: &Path,
) -> Result<(), IoError> {
    let mut out = String::from("t,bulk_integrand,boundary_integrand\n");
    for (i, t) in times.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_float(*t),
            fmt_float(breakdown.bulk_integrand[i]),
            fmt_float(breakdown.boundary_integrand[i])
        ));
    }
    write_bytes(file, out.as_bytes())
}

// ---------------------------------------------------------------------------
// Run manifest

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantEntry {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

/// One manifest per output directory, written first with `status = running`
/// (crash-safe provenance) and rewritten as `complete` with the content hash
/// of every emitted file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub status: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub invariants: Vec<InvariantEntry>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn running(scenario: &str, seed: u64, config: serde_json::Value) -> Self {
        Self {
            scenario: scenario.into(),
            status: "running".into(),
            seed,
            config,
            invariants: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), IoError> {
        let body = serde_json::to_vec_pretty(self)?;
        write_bytes(&dir.join("manifest.json"), &body)
    }

    /// Hashes every emitted file (sorted by name) and marks the run complete.
    pub fn finalize(&mut self, dir: &Path, emitted: &[PathBuf]) -> Result<(), IoError> {
        let mut files = Vec::with_capacity(emitted.len());
        for p in emitted {
            let bytes = fs::read(p).map_err(|source| IoError::File {
                path: p.clone(),
                source,
            })?;
            let mut hasher = Sha256::new();
            hasher.update(&bytes);
            let digest = hasher.finalize();
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            files.push(FileEntry {
                name: p.file_name().unwrap().to_string_lossy().into_owned(),
                sha256: hex,
                bytes: bytes.len() as u64,
            });
        }
        files.sort_by(|a, b| a.name.cmp(&b.name));
        self.files = files;
        self.status = "complete".into();
        self.write(dir)
    }

    pub fn all_invariants_pass(&self) -> bool {
        self.invariants.iter().all(|i| i.passed)
    }
}

// ---------------------------------------------------------------------------
// Minimal SVG line plots

pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
}

/// Plain polyline figure; vector output with no metadata beyond the title.
pub fn write_svg_lines(title: &str, series: &[Series<'_>], file: &Path) -> Result<(), IoError> {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 50.0;
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for (x, y) in s.points {
            xmin = xmin.min(*x);
            xmax = xmax.max(*x);
            ymin = ymin.min(*y);
            ymax = ymax.max(*y);
        }
    }
    if !(xmin.is_finite() && ymin.is_finite()) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    if (xmax - xmin).abs() < 1e-300 {
        xmax = xmin + 1.0;
    }
    if (ymax - ymin).abs() < 1e-300 {
        ymax = ymin + 1.0;
    }
    let sx = |x: f64| PAD + (x - xmin) / (xmax - xmin) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - ymin) / (ymax - ymin) * (H - 2.0 * PAD);
    let palette = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    ];
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n<text x=\"{PAD}\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{title}</text>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{PAD}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n<line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD
    ));
    for edge in [xmin, xmax] {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\">{}</text>\n",
            sx(edge) - 10.0,
            H - PAD + 16.0,
            fmt_short(edge)
        ));
    }
    for edge in [ymin, ymax] {
        svg.push_str(&format!(
            "<text x=\"2\" y=\"{}\" font-family=\"monospace\" font-size=\"10\">{}</text>\n",
            sy(edge) + 4.0,
            fmt_short(edge)
        ));
    }
    for (k, s) in series.iter().enumerate() {
        let color = palette[k % palette.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            color,
            pts.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" fill=\"{}\">{}</text>\n",
            W - PAD - 150.0,
            PAD + 14.0 * (k as f64 + 1.0),
            color,
            s.label
        ));
    }
    svg.push_str("</svg>\n");
    write_bytes(file, svg.as_bytes())
}

fn fmt_short(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() >= 0.01 && x.abs() < 1000.0 {
        format!("{x:.3}")
    } else {
        format!("{x:.2e}")
    }
}
