//! The five CLI commands, as library functions over a [`RunConfig`].

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::runlog::{RunHeader, RunLog, RunResult};
use super::{cones, lambda as lambda_file, layout, obj, stats, write_atomic};
use crate::conformal::{conformal_project, ProjectionResult};
use crate::energy::{Energy, EnergyKind};
use crate::error::{Error, Result};
use crate::mapping::{SurfaceMap, SurfacePoint};
use crate::mesh::{double_embedded, ConeMetric, HalfedgeMesh};
use crate::optimize::{
    continuation_optimize, interpolate_metrics, max_constraint_residual, OptimizeStatus,
};
use crate::penner::{make_delaunay, DelaunayOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Optimize,
    Project,
    Interpolate,
    Stats,
    MapSample,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Optimize => "optimize",
            Command::Project => "project",
            Command::Interpolate => "interpolate",
            Command::Stats => "stats",
            Command::MapSample => "map-sample",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub converged: bool,
    pub written: Vec<PathBuf>,
}

/// Exit status: `0` success, `1` I/O failure, `2` invalid input,
/// `3` finished without converging.
pub fn exit_code(r: &Result<Outcome>) -> i32 {
    match r {
        Ok(o) if o.converged => 0,
        Ok(_) => 3,
        Err(Error::Io(_)) => 1,
        Err(_) => 2,
    }
}

/// Machine-readable error report.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}

/// A closed input surface with its embedding metric.
#[derive(Clone, Debug)]
pub struct LoadedMesh {
    pub mesh: HalfedgeMesh,
    pub positions: Vec<[f64; 3]>,
    pub lambda0: Vec<f64>,
    /// The input had boundary and was glued to its mirror image.
    pub doubled: bool,
}

/// Reads an OBJ and closes it by doubling if it has boundary.
pub fn load_mesh(path: &Path) -> Result<LoadedMesh> {
    let o = obj::read_obj(path)?;
    match HalfedgeMesh::from_faces(&o.faces) {
        Ok(mesh) => {
            let metric = ConeMetric::from_embedding(mesh, &o.positions)?;
            let lambda0 = metric.log_lengths();
            Ok(LoadedMesh {
                mesh: metric.into_parts().0,
                positions: o.positions,
                lambda0,
                doubled: false,
            })
        }
        Err(Error::OpenBoundary(..)) => {
            let (d, positions) = double_embedded(&o.faces, &o.positions)?;
            Ok(LoadedMesh {
                lambda0: d.metric.log_lengths(),
                mesh: d.metric.into_parts().0,
                positions,
                doubled: true,
            })
        }
        Err(e) => Err(e),
    }
}

fn targets(cfg: &RunConfig, mesh: &HalfedgeMesh) -> Result<Vec<f64>> {
    match &cfg.cones {
        Some(p) => Ok(cones::read_cone_file(p, mesh)?.angles),
        None => Ok(crate::ConePrescription::new(mesh, vec![TAU; mesh.n_vertices()])?.angles),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    cfg.optimizer.validate()?;
    let input = cfg.require("input", &cfg.input)?;
    let out = cfg.require("output", &cfg.output)?;
    match cmd {
        Command::Optimize => optimize(cfg, input),
        Command::Project => project(cfg, input),
        Command::Interpolate => interpolate(cfg, input),
        Command::Stats => {
            let lam = cfg.require("lambda", &cfg.lambda)?;
            let written = write_stats(input, lam, out, cfg.histogram_bins)?;
            Ok(Outcome {
                converged: true,
                written,
            })
        }
        Command::MapSample => map_sample(cfg, input, out),
    }
}

fn optimize(cfg: &RunConfig, input: &Path) -> Result<Outcome> {
    let m = load_mesh(input)?;
    let theta = targets(cfg, &m.mesh)?;
    let energy = Energy::new(cfg.energy, &m.mesh, &m.lambda0)?;
    let c = continuation_optimize(&m.mesh, &m.lambda0, &theta, &energy, &cfg.optimizer)?;
    let r = c.result;
    let converged = r.status == OptimizeStatus::Converged && c.failed_stage.is_none();
    let log = RunLog {
        header: header("optimize", cfg.energy, &m.mesh),
        result: RunResult {
            status: format!("{:?}", r.status),
            iterations: r.records.len(),
            max_residual: max_constraint_residual(&m.mesh, &r.lambda, &theta)?,
            energy: energy.value(&r.lambda),
        },
        iterations: r.records,
    };
    let written = write_metric_outputs(cfg, input, &m, &r.lambda, &theta, &log)?;
    Ok(Outcome { converged, written })
}

fn header(command: &str, energy: EnergyKind, mesh: &HalfedgeMesh) -> RunHeader {
    RunHeader::new(
        command,
        &energy.name(),
        [mesh.n_vertices(), mesh.n_edges(), mesh.n_faces()],
    )
}

fn projection_log(
    command: &str,
    cfg: &RunConfig,
    m: &LoadedMesh,
    p: &ProjectionResult<f64>,
) -> Result<RunLog> {
    let energy = Energy::new(cfg.energy, &m.mesh, &m.lambda0)?.value(&p.lambda);
    Ok(RunLog {
        header: header(command, cfg.energy, &m.mesh),
        iterations: Vec::new(),
        result: RunResult {
            status: format!("{:?}", p.status),
            iterations: p.iterations,
            max_residual: p.max_residual,
            energy,
        },
    })
}

fn project(cfg: &RunConfig, input: &Path) -> Result<Outcome> {
    let m = load_mesh(input)?;
    let theta = targets(cfg, &m.mesh)?;
    let p = conformal_project(&m.mesh, &m.lambda0, &theta, cfg.optimizer.projection())?;
    let log = projection_log("project", cfg, &m, &p)?;
    let written = write_metric_outputs(cfg, input, &m, &p.lambda, &theta, &log)?;
    Ok(Outcome {
        converged: p.converged(),
        written,
    })
}

fn interpolate(cfg: &RunConfig, input: &Path) -> Result<Outcome> {
    let m = load_mesh(input)?;
    let theta = targets(cfg, &m.mesh)?;
    if cfg.metrics.len() != cfg.weights.len() || cfg.metrics.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} metrics but {} weights",
            cfg.metrics.len(),
            cfg.weights.len()
        )));
    }
    let metrics = cfg
        .metrics
        .iter()
        .map(|p| lambda_file::read_lambda(p, &m.mesh))
        .collect::<Result<Vec<_>>>()?;
    let p = interpolate_metrics(
        &m.mesh,
        &cfg.weights,
        &metrics,
        &theta,
        cfg.optimizer.projection(),
    )?;
    let log = projection_log("interpolate", cfg, &m, &p)?;
    let written = write_metric_outputs(cfg, input, &m, &p.lambda, &theta, &log)?;
    Ok(Outcome {
        converged: p.converged(),
        written,
    })
}

/// Writes the metric, run log, UV layout (when flat) and statistics.
fn write_metric_outputs(
    cfg: &RunConfig,
    input: &Path,
    m: &LoadedMesh,
    lambda: &[f64],
    theta: &[f64],
    log: &RunLog,
) -> Result<Vec<PathBuf>> {
    let out = cfg.require("output", &cfg.output)?;
    let mut written = Vec::new();
    let lam_path = with_suffix(out, ".lambda");
    write_atomic(
        &lam_path,
        lambda_file::format_lambda(&m.mesh, lambda).as_bytes(),
    )?;
    written.push(lam_path.clone());
    let log_path = with_suffix(out, ".runlog.jsonl");
    write_atomic(&log_path, log.to_jsonl().as_bytes())?;
    written.push(log_path);
    let (seq, _) = make_delaunay(&m.mesh, lambda, DelaunayOptions::default())?;
    let is_cone: Vec<bool> = theta.iter().map(|t| (t - TAU).abs() > 1e-12).collect();
    match layout::lay_out_flat_metric(&seq.mesh, &seq.lambda, &is_cone) {
        Ok(lay) => {
            let obj_path = with_suffix(out, ".obj");
            obj::write_obj_with_uv(&obj_path, &m.positions, &seq.mesh.faces(), &lay.uv)?;
            written.push(obj_path);
        }
        // an unconverged metric is reported through the exit status
        Err(Error::NotFlat { .. }) => {}
        Err(e) => return Err(e),
    }
    written.extend(write_stats(input, &lam_path, out, cfg.histogram_bins)?);
    Ok(written)
}

/// Statistics from the files on disk: the input mesh and a metric file.
pub fn write_stats(
    input: &Path,
    lambda_path: &Path,
    out: &Path,
    bins: usize,
) -> Result<Vec<PathBuf>> {
    let m = load_mesh(input)?;
    let lambda = lambda_file::read_lambda(lambda_path, &m.mesh)?;
    let s = stats::stretch_stats(&m.mesh, &m.lambda0, &lambda)?;
    let files = [
        (".stretch.csv", stats::histogram_csv(&s.stretch, bins)),
        (".scale.csv", stats::histogram_csv(&s.u, bins)),
        (".summary.json", to_json(&s.summary)),
    ];
    let mut written = Vec::new();
    for (suffix, text) in files {
        let p = with_suffix(out, suffix);
        write_atomic(&p, text.as_bytes())?;
        written.push(p);
    }
    Ok(written)
}

fn to_json<S: Serialize>(s: &S) -> String {
    serde_json::to_string_pretty(s).expect("plain data") + "\n"
}

fn map_sample(cfg: &RunConfig, input: &Path, out: &Path) -> Result<Outcome> {
    let m = load_mesh(input)?;
    let dst = lambda_file::read_lambda(cfg.require("lambda", &cfg.lambda)?, &m.mesh)?;
    let src = match &cfg.source_lambda {
        Some(p) => lambda_file::read_lambda(p, &m.mesh)?,
        None => m.lambda0.clone(),
    };
    let map = SurfaceMap::new(&m.mesh, &src, &dst)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points: Vec<SurfacePoint<f64>> = (0..cfg.samples)
        .map(|_| {
            let f = rng.gen_range(0..m.mesh.n_faces());
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            let r = a.sqrt();
            SurfacePoint::new(f, [1.0 - r, r * (1.0 - b), r * b])
        })
        .collect();
    let mapped = points
        .par_iter()
        .map(|&p| map.evaluate(p))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("src_face,w_i,w_j,w_k,dst_face,w'_i,w'_j,w'_k\n");
    for (p, q) in points.iter().zip(&mapped) {
        let (w, v) = (p.coords, q.point.coords);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.face, w[0], w[1], w[2], q.point.face, v[0], v[1], v[2]
        ));
    }
    let path = with_suffix(out, ".map.csv");
    write_atomic(&path, csv.as_bytes())?;
    Ok(Outcome {
        converged: !mapped.iter().any(|q| q.clamped),
        written: vec![path],
    })
}
