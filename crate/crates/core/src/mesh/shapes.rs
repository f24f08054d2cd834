//! Small mesh generators used by tests, benchmarks and the CLI demos.

use crate::mesh::HalfedgeMesh;
use crate::scalar::Real;

fn convert<T: Real>(p: &[[f64; 3]]) -> Vec<[T; 3]> {
    p.iter().map(|q| q.map(T::of)).collect()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot3(a, a).sqrt();
    a.map(|x| x / n)
}

/// Regular tetrahedron with unit edge length.
pub fn regular_tetrahedron<T: Real>() -> (HalfedgeMesh, Vec<[T; 3]>) {
    let s = 1.0 / (2.0 * 2f64.sqrt());
    let p = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
    let faces = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    let mesh = HalfedgeMesh::from_faces(&faces).expect("tetrahedron");
    (mesh, convert(&p))
}

/// Two triangles glued along all three edges: a sphere with three vertices.
pub fn two_triangle_sphere() -> HalfedgeMesh {
    HalfedgeMesh::from_faces(&[[0, 1, 2], [0, 2, 1]]).expect("two triangles")
}

/// Convex hull of `n >= 4` points spread on the unit sphere along a
/// Fibonacci spiral.
pub fn fibonacci_sphere<T: Real>(n: usize) -> (HalfedgeMesh, Vec<[T; 3]>) {
    assert!(n >= 4, "need at least four points");
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let p: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect();
    let faces = convex_hull(&p);
    let mesh = HalfedgeMesh::from_faces(&faces).expect("hull is a closed manifold");
    (mesh, convert(&p))
}

/// Incremental hull of points in convex position, with outward orientation.
fn convex_hull(p: &[[f64; 3]]) -> Vec<[usize; 3]> {
    let n = p.len();
    let (a, b) = (0, n - 1);
    let c = (1..n - 1)
        .max_by(|&i, &j| {
            let ai = dot3(
                cross(sub(p[b], p[a]), sub(p[i], p[a])),
                cross(sub(p[b], p[a]), sub(p[i], p[a])),
            );
            let aj = dot3(
                cross(sub(p[b], p[a]), sub(p[j], p[a])),
                cross(sub(p[b], p[a]), sub(p[j], p[a])),
            );
            ai.total_cmp(&aj)
        })
        .unwrap();
    let nrm = cross(sub(p[b], p[a]), sub(p[c], p[a]));
    let d = (0..n)
        .filter(|&i| i != a && i != b && i != c)
        .max_by(|&i, &j| {
            dot3(nrm, sub(p[i], p[a]))
                .abs()
                .total_cmp(&dot3(nrm, sub(p[j], p[a])).abs())
        })
        .unwrap();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let push = |f: [usize; 3], inside: [f64; 3], faces: &mut Vec<[usize; 3]>| {
        let nn = cross(sub(p[f[1]], p[f[0]]), sub(p[f[2]], p[f[0]]));
        if dot3(nn, sub(inside, p[f[0]])) > 0.0 {
            faces.push([f[0], f[2], f[1]]);
        } else {
            faces.push(f);
        }
    };
    let centroid = [0, 1, 2].map(|k| (p[a][k] + p[b][k] + p[c][k] + p[d][k]) / 4.0);
    for f in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        push(f, centroid, &mut faces);
    }
    for i in 0..n {
        if [a, b, c, d].contains(&i) {
            continue;
        }
        let visible: Vec<bool> = faces
            .iter()
            .map(|f| {
                let nn = cross(sub(p[f[1]], p[f[0]]), sub(p[f[2]], p[f[0]]));
                dot3(nn, sub(p[i], p[f[0]])) > 1e-14 * dot3(nn, nn).sqrt()
            })
            .collect();
        let mut directed = std::collections::HashSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for k in 0..3 {
                directed.insert((f[k], f[(k + 1) % 3]));
            }
        }
        let mut horizon: Vec<(usize, usize)> = directed
            .iter()
            .copied()
            .filter(|&(u, v)| !directed.contains(&(v, u)))
            .collect();
        horizon.sort_unstable();
        if horizon.is_empty() {
            continue;
        }
        let mut kept: Vec<[usize; 3]> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| *f)
            .collect();
        for (u, v) in horizon {
            kept.push([u, v, i]);
        }
        faces = kept;
    }
    faces
}

/// Icosahedron refined `levels` times by midpoint subdivision, projected to
/// the unit sphere.
pub fn icosphere<T: Real>(levels: usize) -> (HalfedgeMesh, Vec<[T; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut p: Vec<[f64; 3]> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&q| normalize(q))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..levels {
        let mut mid = std::collections::HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let m = [0, 1, 2].map(|k| {
                let (u, v) = (f[k], f[(k + 1) % 3]);
                *mid.entry((u.min(v), u.max(v))).or_insert_with(|| {
                    p.push(normalize([0, 1, 2].map(|c| p[u][c] + p[v][c])));
                    p.len() - 1
                })
            });
            next.push([f[0], m[0], m[2]]);
            next.push([f[1], m[1], m[0]]);
            next.push([f[2], m[2], m[1]]);
            next.push(m);
        }
        faces = next;
    }
    let mesh = HalfedgeMesh::from_faces(&faces).expect("icosphere");
    (mesh, convert(&p))
}

/// Triangulated torus of revolution with `nu × nv` vertices.
pub fn torus<T: Real>(nu: usize, nv: usize, major: f64, minor: f64) -> (HalfedgeMesh, Vec<[T; 3]>) {
    assert!(nu >= 3 && nv >= 3);
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut p = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * std::f64::consts::PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * std::f64::consts::PI * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            p.push([r * u.cos(), r * u.sin(), minor * v.sin()]);
        }
    }
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let mesh = HalfedgeMesh::from_faces(&faces).expect("torus");
    (mesh, convert(&p))
}

/// Open `n × n` quad grid on the unit square split into triangles; returns
/// raw faces since the result has boundary.
pub fn grid_disk<T: Real>(n: usize) -> (Vec<[usize; 3]>, Vec<[T; 3]>) {
    assert!(n >= 1);
    let id = |i: usize, j: usize| i * (n + 1) + j;
    let mut p = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            p.push([j as f64 / n as f64, i as f64 / n as f64, 0.0]);
        }
    }
    let mut faces = Vec::new();
    for i in 0..n {
        for j in 0..n {
            faces.push([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i + 1, j)]);
        }
    }
    (faces, convert(&p))
}
