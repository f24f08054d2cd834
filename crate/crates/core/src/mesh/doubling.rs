use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mesh::halfedge::boundary_edges;
use crate::mesh::metric::distance;
use crate::mesh::{ConeMetric, HalfedgeMesh};
use crate::scalar::Real;

/// A surface with boundary glued to its mirror image along the boundary.
#[derive(Clone, Debug)]
pub struct DoubledMesh<T> {
    pub metric: ConeMetric<T>,
    /// `[first copy, second copy]` for every input vertex; the entries agree
    /// on boundary vertices.
    pub vertex_copies: Vec<[usize; 2]>,
    /// Input vertex for every vertex of the doubled mesh.
    pub vertex_origin: Vec<usize>,
    /// Input face `f` appears as faces `f` and `f + n_faces` (reversed).
    pub n_input_faces: usize,
    /// `[first copy, second copy]` edge index for every input vertex pair
    /// `(a, b)` with `a < b`; boundary edges map to a single edge twice.
    pub edge_copies: HashMap<(usize, usize), [usize; 2]>,
    pub boundary_loops: usize,
    /// Euler characteristic of the input surface with boundary.
    pub input_euler_characteristic: i64,
}

impl<T: Real> DoubledMesh<T> {
    pub fn mesh(&self) -> &HalfedgeMesh {
        self.metric.mesh()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let o = self.vertex_origin[v];
        self.vertex_copies[o][0] == self.vertex_copies[o][1]
    }
}

/// Doubles an open triangle list, taking edge lengths from `length(a, b)` on
/// input vertex pairs.
pub fn double_mesh<T: Real>(
    faces: &[[usize; 3]],
    length: impl Fn(usize, usize) -> T,
) -> Result<DoubledMesh<T>> {
    if faces.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let boundary = boundary_edges(faces)?;
    if boundary.is_empty() {
        return Err(Error::AlreadyClosed);
    }
    let n = faces.iter().flatten().copied().max().unwrap() + 1;
    let mut on_boundary = vec![false; n];
    for &(a, b) in &boundary {
        on_boundary[a] = true;
        on_boundary[b] = true;
    }
    let mut vertex_copies = vec![[0usize; 2]; n];
    let mut vertex_origin: Vec<usize> = (0..n).collect();
    for v in 0..n {
        vertex_copies[v][0] = v;
        vertex_copies[v][1] = if on_boundary[v] {
            v
        } else {
            vertex_origin.push(v);
            vertex_origin.len() - 1
        };
    }
    let mut doubled: Vec<[usize; 3]> = faces.to_vec();
    doubled.extend(faces.iter().map(|t| {
        let c = t.map(|v| vertex_copies[v][1]);
        [c[0], c[2], c[1]]
    }));
    let nf = faces.len();
    let mirror = |h: usize| 3 * (nf + h / 3) + 2 - h % 3;
    let mut directed = HashMap::with_capacity(3 * nf);
    for (f, t) in faces.iter().enumerate() {
        for c in 0..3 {
            directed.insert((t[c], t[(c + 1) % 3]), 3 * f + c);
        }
    }
    let mut twin = vec![0; 6 * nf];
    for (&(a, b), &h) in &directed {
        match directed.get(&(b, a)) {
            Some(&t) => {
                twin[h] = t;
                twin[mirror(h)] = mirror(t);
            }
            None => {
                twin[h] = mirror(h);
                twin[mirror(h)] = h;
            }
        }
    }
    let mesh = HalfedgeMesh::from_gluing(&doubled, twin)?;
    let lengths: Vec<T> = (0..mesh.n_edges())
        .map(|e| {
            let [a, b] = mesh.edge_vertices(e);
            length(vertex_origin[a], vertex_origin[b])
        })
        .collect();
    let mut edge_copies: HashMap<(usize, usize), [usize; 2]> = HashMap::new();
    for h in 0..3 * nf {
        let (a, b) = (vertex_origin[mesh.tail(h)], vertex_origin[mesh.tip(h)]);
        edge_copies.insert((a.min(b), a.max(b)), [mesh.edge(h), mesh.edge(mirror(h))]);
    }
    let n_edges_in = edge_copies.len() as i64;
    let boundary_loops = count_loops(&boundary, n);
    let metric = ConeMetric::new(mesh, lengths)?;
    Ok(DoubledMesh {
        metric,
        vertex_copies,
        vertex_origin,
        n_input_faces: faces.len(),
        edge_copies,
        boundary_loops,
        input_euler_characteristic: n as i64 - n_edges_in + faces.len() as i64,
    })
}

/// Doubles an embedded open surface; returns the doubled mesh with positions
/// for every doubled vertex (mirror copies share positions).
pub fn double_embedded<T: Real>(
    faces: &[[usize; 3]],
    positions: &[[T; 3]],
) -> Result<(DoubledMesh<T>, Vec<[T; 3]>)> {
    let n = faces.iter().flatten().copied().max().map_or(0, |m| m + 1);
    if positions.len() < n {
        return Err(Error::IndexOutOfRange {
            index: n - 1,
            count: positions.len(),
        });
    }
    let d = double_mesh(faces, |a, b| distance(&positions[a], &positions[b]))?;
    let pos = d.vertex_origin.iter().map(|&o| positions[o]).collect();
    Ok((d, pos))
}

fn count_loops(boundary: &[(usize, usize)], n: usize) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    let mut verts = Vec::new();
    for &(a, b) in boundary {
        verts.push(a);
        verts.push(b);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    verts.sort_unstable();
    verts.dedup();
    let mut roots: Vec<usize> = verts.iter().map(|&v| find(&mut parent, v)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triangle_doubles_to_three_vertex_sphere() {
        let d = double_mesh(&[[0, 1, 2]], |a, b| 1.0 + (a + b) as f64 * 0.1).unwrap();
        let m = d.mesh();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (3, 3, 2));
        assert_eq!(m.euler_characteristic(), 2);
        for ((a, b), [e0, e1]) in &d.edge_copies {
            assert_eq!(e0, e1);
            let l = d.metric.lengths()[*e0];
            assert!((l - (1.0 + (a + b) as f64 * 0.1)).abs() < 1e-15);
        }
        assert_eq!(d.boundary_loops, 1);
    }

    #[test]
    fn square_doubles_to_sphere() {
        let pos = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ];
        let (d, p) = double_embedded(&[[0, 1, 2], [0, 2, 3]], &pos).unwrap();
        assert_eq!(d.mesh().euler_characteristic(), 2);
        assert_eq!(d.mesh().n_vertices(), 4);
        assert_eq!(p.len(), 4);
        // interior diagonal is copied, boundary edges are shared
        let diag = d.edge_copies[&(0, 2)];
        assert_ne!(diag[0], diag[1]);
        assert_eq!(d.metric.lengths()[diag[0]], d.metric.lengths()[diag[1]]);
    }

    #[test]
    fn closed_input_is_rejected() {
        let tet = [[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]];
        assert!(matches!(
            double_mesh(&tet, |_, _| 1.0f64),
            Err(Error::AlreadyClosed)
        ));
    }
}
