//! CSV, gnuplot and manifest outputs. Every file is written atomically by
//! writing a sibling temporary file and renaming it into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::experiments::{FitResult, SweepKind, SweepResult};
use crate::optimize::TrainTrace;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn csv_bytes<I, R>(header: &[String], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `iteration,loss`, with iteration 0 holding the loss before any update.
pub fn trace_csv(trace: &TrainTrace) -> Result<Vec<u8>> {
    let rows = std::iter::once(trace.initial_loss)
        .chain(trace.loss_history.iter().copied())
        .enumerate()
        .map(|(i, l)| vec![i.to_string(), l.to_string()]);
    csv_bytes(&cols(&["iteration", "loss"]), rows)
}

/// `x[,x2],y_true,y_pred` over the dense prediction grid.
pub fn predictions_csv(fit: &FitResult) -> Result<Vec<u8>> {
    let arity = fit.grid.first().map_or(1, |p| p.x.len());
    let mut header = vec!["x".to_string()];
    header.extend((2..=arity).map(|i| format!("x{i}")));
    header.extend(cols(&["y_true", "y_pred"]));
    let rows = fit.grid.iter().map(|p| {
        let mut r: Vec<String> = p.x.iter().map(f64::to_string).collect();
        r.push(p.y_true.to_string());
        r.push(p.y_pred.to_string());
        r
    });
    csv_bytes(&header, rows)
}

/// `config,d_e,mean,std` (depth) or `config,p,mean,std` (noise).
pub fn figure_csv(sweep: &SweepResult) -> Result<Vec<u8>> {
    let header = cols(&["config", sweep.kind.axis_name(), "mean", "std"]);
    let rows = sweep.cells.iter().map(|c| {
        vec![
            c.config.to_string(),
            c.value.to_string(),
            c.mean_loss.to_string(),
            c.std_loss.to_string(),
        ]
    });
    csv_bytes(&header, rows)
}

/// `config_id,d_e,noise_p,mean_loss,std_loss`; the axis not swept holds the
/// base value.
pub fn aggregates_csv(sweep: &SweepResult, base_d_e: usize, base_noise: f64) -> Result<Vec<u8>> {
    let header = cols(&["config_id", "d_e", "noise_p", "mean_loss", "std_loss"]);
    let rows = sweep.cells.iter().map(|c| {
        let (d, p) = match sweep.kind {
            SweepKind::Depth => (c.value.to_string(), base_noise.to_string()),
            SweepKind::Noise => (base_d_e.to_string(), c.value.to_string()),
        };
        vec![c.config.to_string(), d, p, c.mean_loss.to_string(), c.std_loss.to_string()]
    });
    csv_bytes(&header, rows)
}

/// One row per kernel row; entry `j` occupies the two columns `re_j,im_j`.
pub fn kernel_csv(k: &DMatrix<Complex64>) -> Result<Vec<u8>> {
    let header: Vec<String> = (0..k.ncols())
        .flat_map(|j| [format!("re_{j}"), format!("im_{j}")])
        .collect();
    let rows = (0..k.nrows()).map(|i| {
        (0..k.ncols())
            .flat_map(|j| [k[(i, j)].re.to_string(), k[(i, j)].im.to_string()])
            .collect::<Vec<_>>()
    });
    csv_bytes(&header, rows)
}

/// Gnuplot script plotting mean loss with std error bars per configuration.
pub fn sweep_plot_script(sweep: &SweepResult, csv_name: &str) -> String {
    let (xlabel, title) = match sweep.kind {
        SweepKind::Depth => ("encoder depth D_E", "final loss vs encoder depth"),
        SweepKind::Noise => ("noise strength p", "final loss vs noise strength"),
    };
    let mut s = format!(
        "set datafile separator ','\nset key top left\nset xlabel '{xlabel}'\nset ylabel 'final training loss'\nset title '{title}'\nplot "
    );
    let parts: Vec<String> = sweep
        .configs
        .iter()
        .map(|c| {
            format!(
                "'{csv_name}' using ($1=={c} ? $2 : 1/0):3:4 skip 1 with yerrorlines title 'Configuration {c}'"
            )
        })
        .collect();
    s.push_str(&parts.join(", \\\n     "));
    s.push('\n');
    s
}

/// Gnuplot script overlaying the fitted curve on the target.
pub fn fit_plot_script(csv_name: &str, arity: usize) -> String {
    if arity == 1 {
        format!(
            "set datafile separator ','\nset xlabel 'x'\nset ylabel 'f(x)'\nplot '{csv_name}' using 1:2 skip 1 with lines title 'target', \\\n     '{csv_name}' using 1:3 skip 1 with lines title 'model'\n"
        )
    } else {
        format!(
            "set datafile separator ','\nset xlabel 'x1'\nset ylabel 'x2'\nset dgrid3d 41,41\nsplot '{csv_name}' using 1:2:4 skip 1 with pm3d title 'model'\n"
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub version: String,
    pub wall_time: f64,
    pub outputs: Vec<OutputFile>,
}

/// Output directory that remembers what it wrote for the manifest.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<OutputFile>,
}

impl OutputDir {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        write_atomic(&path, bytes)?;
        self.written.retain(|f| f.path != name);
        self.written.push(OutputFile {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(
        mut self,
        command_line: Vec<String>,
        config: serde_json::Value,
        seeds: Vec<u64>,
        wall_time: f64,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            command_line,
            config,
            seeds,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time,
            outputs: std::mem::take(&mut self.written),
        };
        self.write_json("manifest.json", &manifest)?;
        Ok(manifest)
    }
}
