//! Planar layout of a flat cone metric: cut to a disk through the cones,
//! then unfold face by face.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use crate::constraints::{corner_angles, vertex_angle_sums};
use crate::error::{check_len, Error, Result};
use crate::mesh::HalfedgeMesh;

/// Largest angle defect tolerated at a vertex that is not a cone.
pub const FLATNESS_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct FlatLayout {
    /// UV per corner, in the order of [`HalfedgeMesh::face_halfedges`].
    pub uv: Vec<[[f64; 2]; 3]>,
    /// Edges along which the surface was cut.
    pub cut: Vec<bool>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Cut edges: the complement of a dual spanning tree that avoids a minimum
/// spanning tree of the edge graph, with branches ending at regular
/// vertices pruned away.
pub fn cut_graph(mesh: &HalfedgeMesh, lambda: &[f64], cones: &[bool]) -> Vec<bool> {
    let ne = mesh.n_edges();
    let mut order: Vec<usize> = (0..ne).collect();
    order.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]).then(a.cmp(&b)));
    let mut parent: Vec<usize> = (0..mesh.n_vertices()).collect();
    let mut primal = vec![false; ne];
    for e in order {
        let [a, b] = mesh.edge_vertices(e);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            primal[e] = true;
        }
    }
    let mut cut = vec![true; ne];
    let mut seen = vec![false; mesh.n_faces()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(f) = queue.pop_front() {
        for h in mesh.face_halfedges(f) {
            let e = mesh.edge(h);
            let g = mesh.face(mesh.twin(h));
            if !primal[e] && !seen[g] {
                seen[g] = true;
                cut[e] = false;
                queue.push_back(g);
            }
        }
    }
    let mut degree = vec![0usize; mesh.n_vertices()];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_vertices()];
    for e in (0..ne).filter(|&e| cut[e]) {
        for v in mesh.edge_vertices(e) {
            degree[v] += 1;
            incident[v].push(e);
        }
    }
    let mut leaves: Vec<usize> = (0..mesh.n_vertices())
        .filter(|&v| degree[v] == 1 && !cones[v])
        .collect();
    while let Some(v) = leaves.pop() {
        let Some(&e) = incident[v].iter().find(|&&e| cut[e]) else {
            continue;
        };
        cut[e] = false;
        for w in mesh.edge_vertices(e) {
            degree[w] -= 1;
            if w != v && degree[w] == 1 && !cones[w] {
                leaves.push(w);
            }
        }
    }
    cut
}

/// Places the corners of `f` with the tail of its halfedge `h` at `p0` and
/// the tip at `p1`; the face lies to the left of `p0 → p1`.
fn place(
    mesh: &HalfedgeMesh,
    lambda: &[f64],
    h: usize,
    p0: [f64; 2],
    p1: [f64; 2],
) -> [[f64; 2]; 3] {
    let f = mesh.face(h);
    let hs = mesh.face_halfedges(f);
    let r = hs.iter().position(|&x| x == h).expect("halfedge of face");
    let len = |h: usize| (lambda[mesh.edge(h)] / 2.0).exp();
    let (a, b, c) = (len(hs[r]), len(hs[(r + 1) % 3]), len(hs[(r + 2) % 3]));
    let d = [p1[0] - p0[0], p1[1] - p0[1]];
    let scale = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let u = [d[0] / scale, d[1] / scale];
    let x = (a * a + c * c - b * b) / (2.0 * a);
    let y = ((c - x) * (c + x)).max(0.0).sqrt();
    let q = [p0[0] + x * u[0] - y * u[1], p0[1] + x * u[1] + y * u[0]];
    let mut out = [[0.0; 2]; 3];
    out[r] = p0;
    out[(r + 1) % 3] = p1;
    out[(r + 2) % 3] = q;
    out
}

/// Per-corner UVs of the metric `lambda` on `mesh`. Vertices flagged in
/// `cones` may carry curvature; any other vertex must be flat.
pub fn lay_out_flat_metric(
    mesh: &HalfedgeMesh,
    lambda: &[f64],
    cones: &[bool],
) -> Result<FlatLayout> {
    check_len(mesh.n_edges(), lambda.len())?;
    check_len(mesh.n_vertices(), cones.len())?;
    let theta = vertex_angle_sums(mesh, &corner_angles(mesh, lambda)?);
    let worst = (0..mesh.n_vertices())
        .filter(|&v| !cones[v])
        .map(|v| (v, theta[v] - TAU))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
    if let Some((vertex, defect)) = worst {
        if defect.abs() > FLATNESS_TOLERANCE {
            return Err(Error::NotFlat { vertex, defect });
        }
    }
    let cut = cut_graph(mesh, lambda, cones);
    let mut uv = vec![[[0.0; 2]; 3]; mesh.n_faces()];
    let mut seen = vec![false; mesh.n_faces()];
    let h0 = mesh.face_halfedge(0);
    uv[0] = place(
        mesh,
        lambda,
        h0,
        [0.0, 0.0],
        [(lambda[mesh.edge(h0)] / 2.0).exp(), 0.0],
    );
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(f) = queue.pop_front() {
        for (k, h) in mesh.face_halfedges(f).into_iter().enumerate() {
            let t = mesh.twin(h);
            let g = mesh.face(t);
            if cut[mesh.edge(h)] || seen[g] {
                continue;
            }
            seen[g] = true;
            uv[g] = place(mesh, lambda, t, uv[f][(k + 1) % 3], uv[f][k]);
            queue.push_back(g);
        }
    }
    if let Some(f) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidInput(format!(
            "face {f} is unreachable by the layout"
        )));
    }
    Ok(FlatLayout { uv, cut })
}

/// Largest relative mismatch between UV edge lengths and `exp(λ/2)`.
pub fn uv_length_error(mesh: &HalfedgeMesh, lambda: &[f64], uv: &[[[f64; 2]; 3]]) -> f64 {
    let mut worst: f64 = 0.0;
    for f in 0..mesh.n_faces() {
        for (c, h) in mesh.face_halfedges(f).into_iter().enumerate() {
            let (p, q) = (uv[f][c], uv[f][(c + 1) % 3]);
            let got = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            let want = (lambda[mesh.edge(h)] / 2.0).exp();
            worst = worst.max((got / want - 1.0).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{double_embedded, shapes};

    #[test]
    fn doubled_flat_quad_lays_out_isometrically() {
        let faces = [[0, 1, 2], [0, 2, 3]];
        let pos = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.7, 0.0],
            [0.0, 0.7, 0.0],
        ];
        let (d, _) = double_embedded(&faces, &pos).unwrap();
        let l = d.metric.log_lengths();
        let theta = vertex_angle_sums(d.mesh(), &corner_angles(d.mesh(), &l).unwrap());
        let cones: Vec<bool> = theta.iter().map(|t| (t - TAU).abs() > 1e-9).collect();
        assert_eq!(cones.iter().filter(|&&c| c).count(), 4);
        let lay = lay_out_flat_metric(d.mesh(), &l, &cones).unwrap();
        assert!(uv_length_error(d.mesh(), &l, &lay.uv) < 1e-10);
        assert_eq!(lay.uv[0][0], [0.0, 0.0]);
        assert_eq!(lay.uv[0][1][1], 0.0);
    }

    #[test]
    fn curved_metric_is_not_flat() {
        let (m, p) = shapes::icosphere::<f64>(1);
        let l = crate::ConeMetric::from_embedding(m.clone(), &p)
            .unwrap()
            .log_lengths();
        let cones = vec![false; m.n_vertices()];
        assert!(matches!(
            lay_out_flat_metric(&m, &l, &cones),
            Err(Error::NotFlat { .. })
        ));
    }

    #[test]
    fn flat_torus_unfolds() {
        // a square torus grid has a flat metric with no cones
        let (n, k) = (5usize, 4usize);
        let id = |i: usize, j: usize| (i % n) * k + (j % k);
        let mut faces = Vec::new();
        for i in 0..n {
            for j in 0..k {
                faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let m = HalfedgeMesh::from_faces(&faces).unwrap();
        let l: Vec<f64> = (0..m.n_edges())
            .map(|e| {
                let [a, b] = m.edge_vertices(e);
                let diagonal = a / k != b / k && a % k != b % k;
                if diagonal {
                    2f64.ln()
                } else {
                    0.0
                }
            })
            .collect();
        let lay = lay_out_flat_metric(&m, &l, &vec![false; m.n_vertices()]).unwrap();
        assert!(uv_length_error(&m, &l, &lay.uv) < 1e-12);
        // pruned cut of a torus is a pair of loops: first Betti number 2
        let cut: Vec<usize> = (0..m.n_edges()).filter(|&e| lay.cut[e]).collect();
        let mut touched: Vec<usize> = cut.iter().flat_map(|&e| m.edge_vertices(e)).collect();
        touched.sort();
        touched.dedup();
        assert_eq!(cut.len() + 1 - touched.len(), 2);
    }
}
