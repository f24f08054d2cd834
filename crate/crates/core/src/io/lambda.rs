//! Penner coordinate files: a header line, then `tail tip value` per edge in
//! edge order of the mesh built from the input faces.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::HalfedgeMesh;

const HEADER: &str = "# penner-lambda v1";

pub fn format_lambda(mesh: &HalfedgeMesh, lambda: &[f64]) -> String {
    let mut s = format!("{HEADER} edges={}\n", mesh.n_edges());
    for (e, l) in lambda.iter().enumerate() {
        let [a, b] = mesh.edge_vertices(e);
        let _ = writeln!(s, "{a} {b} {l}");
    }
    s
}

/// Parses values and checks them against the edges of `mesh`.
pub fn parse_lambda(text: &str, mesh: &HalfedgeMesh) -> Result<Vec<f64>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.starts_with(HEADER) => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "missing lambda header".into(),
            })
        }
    }
    let mut out = Vec::with_capacity(mesh.n_edges());
    for (k, raw) in lines {
        let line = k + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let err = |message: &str| Error::Parse {
            line,
            message: message.into(),
        };
        let p: Vec<&str> = raw.split_whitespace().collect();
        if p.len() != 3 {
            return Err(err("expected `tail tip value`"));
        }
        let e = out.len();
        if e >= mesh.n_edges() {
            return Err(err("more values than edges"));
        }
        let a: usize = p[0].parse().map_err(|_| err("bad vertex"))?;
        let b: usize = p[1].parse().map_err(|_| err("bad vertex"))?;
        let v: f64 = p[2].parse().map_err(|_| err("bad value"))?;
        if [a, b] != mesh.edge_vertices(e) {
            return Err(err("edge does not match the mesh"));
        }
        out.push(v);
    }
    if out.len() != mesh.n_edges() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_edges(),
            found: out.len(),
        });
    }
    Ok(out)
}

pub fn read_lambda(path: &Path, mesh: &HalfedgeMesh) -> Result<Vec<f64>> {
    parse_lambda(&std::fs::read_to_string(path)?, mesh)
}
