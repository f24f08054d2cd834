//! Wavefront OBJ, restricted to `v`, `vt` and triangular `f` records.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObjMesh {
    pub positions: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    pub uvs: Vec<[f64; 2]>,
    /// `vt` index per corner, when every face carries one.
    pub face_uvs: Option<Vec<[usize; 3]>>,
}

pub fn read_obj(path: &Path) -> Result<ObjMesh> {
    parse_obj(&std::fs::read_to_string(path)?)
}

fn parse_floats<const N: usize>(line: usize, parts: &[&str]) -> Result<[f64; N]> {
    if parts.len() < N {
        return Err(Error::Parse {
            line,
            message: format!("expected {N} coordinates"),
        });
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad number {p:?}"),
        })?;
    }
    Ok(out)
}

/// Resolves a 1-based (or negative, relative) OBJ index.
fn resolve(line: usize, token: &str, count: usize) -> Result<usize> {
    let bad = || Error::Parse {
        line,
        message: format!("bad index {token:?}"),
    };
    let i: i64 = token.parse().map_err(|_| bad())?;
    let idx = if i > 0 {
        i - 1
    } else if i < 0 {
        count as i64 + i
    } else {
        return Err(bad());
    };
    if idx < 0 || idx as usize >= count {
        return Err(Error::Parse {
            line,
            message: format!("index {token} out of range"),
        });
    }
    Ok(idx as usize)
}

pub fn parse_obj(text: &str) -> Result<ObjMesh> {
    let mut m = ObjMesh::default();
    let mut face_uvs = Vec::new();
    let mut all_uv = true;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("");
        let parts: Vec<&str> = content.split_whitespace().collect();
        match parts.first().copied() {
            Some("v") => m.positions.push(parse_floats::<3>(line, &parts[1..])?),
            Some("vt") => m.uvs.push(parse_floats::<2>(line, &parts[1..])?),
            Some("f") => {
                let corners = &parts[1..];
                if corners.len() != 3 {
                    return Err(Error::NonTriangleFace {
                        line,
                        count: corners.len(),
                    });
                }
                let mut f = [0; 3];
                let mut t = [0; 3];
                for c in 0..3 {
                    let mut it = corners[c].split('/');
                    f[c] = resolve(line, it.next().unwrap_or(""), m.positions.len())?;
                    match it.next() {
                        Some(s) if !s.is_empty() => t[c] = resolve(line, s, m.uvs.len())?,
                        _ => all_uv = false,
                    }
                }
                m.faces.push(f);
                face_uvs.push(t);
            }
            _ => {}
        }
    }
    if all_uv && !m.faces.is_empty() {
        m.face_uvs = Some(face_uvs);
    }
    Ok(m)
}

/// Serializes positions, one `vt` per corner, and `f v/vt` records.
pub fn format_obj_with_uv(
    positions: &[[f64; 3]],
    faces: &[[usize; 3]],
    uv: &[[[f64; 2]; 3]],
) -> String {
    let mut s = String::new();
    for p in positions {
        let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
    }
    for corners in uv {
        for t in corners {
            let _ = writeln!(s, "vt {} {}", t[0], t[1]);
        }
    }
    for (f, face) in faces.iter().enumerate() {
        let _ = writeln!(
            s,
            "f {}/{} {}/{} {}/{}",
            face[0] + 1,
            3 * f + 1,
            face[1] + 1,
            3 * f + 2,
            face[2] + 1,
            3 * f + 3
        );
    }
    s
}

pub fn format_obj(positions: &[[f64; 3]], faces: &[[usize; 3]]) -> String {
    let mut s = String::new();
    for p in positions {
        let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
    }
    for f in faces {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn write_obj_with_uv(
    path: &Path,
    positions: &[[f64; 3]],
    faces: &[[usize; 3]],
    uv: &[[[f64; 2]; 3]],
) -> Result<()> {
    if uv.len() != faces.len() {
        return Err(Error::DimensionMismatch {
            expected: faces.len(),
            found: uv.len(),
        });
    }
    super::write_atomic(path, format_obj_with_uv(positions, faces, uv).as_bytes())
}
