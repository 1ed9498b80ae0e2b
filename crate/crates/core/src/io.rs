//! File formats: sequence JSON, scene JSON, and the CSV outputs.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlation::{psl_argmax, CorrelationTable, LagConstraintSet};
use crate::error::{Error, Result};
use crate::radar::RadarScene;
use crate::sequence::SequenceSet;
use crate::solver::SolverTrace;
use crate::surrogate::SurrogateSystem;

#[derive(Serialize, Deserialize)]
struct SequenceFile {
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "M")]
    m: usize,
    phases: Vec<Vec<f64>>,
}

/// Writes a sequence set as `{"L": .., "M": .., "phases": [[..], ..]}`.
pub fn write_sequence_json(path: &Path, set: &SequenceSet) -> Result<()> {
    let file = SequenceFile {
        l: set.num_sequences(),
        m: set.length(),
        phases: set.phase_rows(),
    };
    let body = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, body + "\n")?;
    Ok(())
}

pub fn read_sequence_json(path: &Path) -> Result<SequenceSet> {
    let body = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let file: SequenceFile =
        serde_json::from_str(&body).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if file.phases.len() != file.l || file.phases.iter().any(|row| row.len() != file.m) {
        return Err(Error::Parse(format!(
            "{}: phases shape does not match L and M",
            path.display()
        )));
    }
    SequenceSet::from_phase_rows(file.phases)
}

/// Writes the per-iteration design trace as
/// `iter,psl,isl,inner_iters,seconds`.
pub fn write_trace_csv(path: &Path, trace: &SolverTrace) -> Result<()> {
    let mut out = String::from("iter,psl,isl,inner_iters,seconds\n");
    for r in &trace.records {
        out.push_str(&format!(
            "{},{},{},{},{:.6}\n",
            r.iter, r.psl, r.isl, r.inner_iters, r.seconds
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes every correlation magnitude as `pair_i,pair_j,lag,abs_value`
/// with one-based pair indices and lags `-(M-1)..=M-1`.
pub fn write_correlation_csv(path: &Path, table: &CorrelationTable) -> Result<()> {
    let l = table.num_sequences();
    let m = table.length() as isize;
    let mut out = String::from("pair_i,pair_j,lag,abs_value\n");
    for i in 0..l {
        for j in 0..l {
            for k in -(m - 1)..m {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    i + 1,
                    j + 1,
                    k,
                    table.value(i, j, k).norm()
                ));
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Summary written next to design/correlate outputs.
#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub psl: f64,
    pub isl: f64,
    /// One-based indices of the first constraint attaining the peak.
    pub argmax_i: usize,
    pub argmax_j: usize,
    pub argmax_k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

impl MetricsSummary {
    pub fn from_table(table: &CorrelationTable, k_set: &LagConstraintSet) -> Result<Self> {
        let (peak, arg) = psl_argmax(table, k_set)?;
        let isl = crate::correlation::isl(table, k_set)?;
        Ok(MetricsSummary {
            psl: peak,
            isl,
            argmax_i: arg.i + 1,
            argmax_j: arg.j + 1,
            argmax_k: arg.k,
            status: None,
            seed: None,
            iterations: None,
        })
    }
}

pub fn write_metrics_json(path: &Path, metrics: &MetricsSummary) -> Result<()> {
    let body =
        serde_json::to_string_pretty(metrics).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, body + "\n")?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SceneFile {
    Full {
        #[serde(rename = "Q")]
        q: usize,
        #[serde(rename = "P")]
        p: usize,
        theta_deg: Vec<f64>,
        /// Row-major `[re, im]` pairs, one row per range bin.
        beta: Vec<Vec<[f64; 2]>>,
        sigma2: f64,
    },
    Mask {
        mask: Vec<String>,
        #[serde(default)]
        sigma2: Option<f64>,
    },
}

/// Reads a scene file. Mask scenes draw their reflectivities from `seed`;
/// their noise variance defaults to `1e-3` when omitted.
pub fn read_scene_json(path: &Path, seed: u64) -> Result<RadarScene> {
    let body = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let file: SceneFile =
        serde_json::from_str(&body).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    match file {
        SceneFile::Full {
            q,
            p,
            theta_deg,
            beta,
            sigma2,
        } => {
            if beta.len() != q || beta.iter().any(|row| row.len() != p) {
                return Err(Error::Parse(format!(
                    "{}: beta shape does not match Q and P",
                    path.display()
                )));
            }
            let mat = DMatrix::from_fn(q, p, |r, c| {
                Complex64::new(beta[r][c][0], beta[r][c][1])
            });
            RadarScene::new(mat, theta_deg, sigma2)
        }
        SceneFile::Mask { mask, sigma2 } => {
            RadarScene::from_mask(&mask, sigma2.unwrap_or(1e-3), seed)
        }
    }
}

pub fn write_scene_json(path: &Path, scene: &RadarScene) -> Result<()> {
    let q = scene.num_range_bins();
    let p = scene.num_angles();
    let beta: Vec<Vec<[f64; 2]>> = (0..q)
        .map(|r| {
            (0..p)
                .map(|c| {
                    let z = scene.beta[(r, c)];
                    [z.re, z.im]
                })
                .collect()
        })
        .collect();
    let file = SceneFile::Full {
        q,
        p,
        theta_deg: scene.theta_deg.clone(),
        beta,
        sigma2: scene.sigma2,
    };
    let body = serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, body + "\n")?;
    Ok(())
}

/// Writes a real matrix as a bare CSV grid, one row per line.
pub fn write_image_csv(path: &Path, image: &DMatrix<f64>) -> Result<()> {
    let mut out = String::new();
    for r in 0..image.nrows() {
        let row: Vec<String> = (0..image.ncols()).map(|c| format!("{}", image[(r, c)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Debug dump of the surrogate state: one row per constraint.
pub fn write_surrogate_debug_csv(
    path: &Path,
    sys: &SurrogateSystem,
    table: &CorrelationTable,
) -> Result<()> {
    let mut out = String::from("index,pair_i,pair_j,lag,abs_r,lambda_bound,p\n");
    for (idx, c) in sys.constraints.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            idx,
            c.i + 1,
            c.j + 1,
            c.k,
            table.value(c.i, c.j, c.k as isize).norm(),
            sys.bounds[idx],
            sys.p[idx]
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes per-inner-iteration objective samples as
/// `outer_iter,inner_iter,g_value`.
pub fn write_inner_trace_csv(path: &Path, samples: &[(usize, usize, f64)]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "outer_iter,inner_iter,g_value")?;
    for (outer, inner, g) in samples {
        writeln!(file, "{outer},{inner},{g}")?;
    }
    Ok(())
}
