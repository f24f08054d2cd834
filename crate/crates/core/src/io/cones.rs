//! Cone files: one `vertex_index angle_radians` pair per line; `#` starts a
//! comment. Vertices that are not listed get `2π`.

use std::f64::consts::TAU;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{ConePrescription, HalfedgeMesh};

/// Target angles for `n` vertices.
pub fn parse_cones(text: &str, n: usize) -> Result<Vec<f64>> {
    let mut angles = vec![TAU; n];
    let mut seen = vec![false; n];
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let parts: Vec<&str> = raw
            .split('#')
            .next()
            .unwrap_or("")
            .split_whitespace()
            .collect();
        if parts.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line, message };
        if parts.len() != 2 {
            return Err(err("expected `vertex angle`".into()));
        }
        let v: usize = parts[0]
            .parse()
            .map_err(|_| err(format!("bad vertex index {:?}", parts[0])))?;
        let a: f64 = parts[1]
            .parse()
            .map_err(|_| err(format!("bad angle {:?}", parts[1])))?;
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, count: n });
        }
        if seen[v] {
            return Err(err(format!("vertex {v} listed twice")));
        }
        seen[v] = true;
        angles[v] = a;
    }
    Ok(angles)
}

pub fn read_cone_file(path: &Path, mesh: &HalfedgeMesh) -> Result<ConePrescription<f64>> {
    let angles = parse_cones(&std::fs::read_to_string(path)?, mesh.n_vertices())?;
    ConePrescription::new(mesh, angles)
}

pub fn format_cones(angles: &[f64]) -> String {
    angles
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != TAU)
        .map(|(v, a)| format!("{v} {a}\n"))
        .collect()
}
