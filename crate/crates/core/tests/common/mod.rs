#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use penner::mapping::SurfacePoint;
use penner::mesh::{shapes, HalfedgeMesh};
use penner::ConeMetric;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn embedded(mesh: HalfedgeMesh, pos: &[[f64; 3]]) -> (HalfedgeMesh, Vec<f64>) {
    let l = ConeMetric::from_embedding(mesh.clone(), pos)
        .unwrap()
        .log_lengths();
    (mesh, l)
}

pub fn tetrahedron() -> (HalfedgeMesh, Vec<f64>) {
    let (m, p) = shapes::regular_tetrahedron::<f64>();
    embedded(m, &p)
}

pub fn icosphere(levels: usize) -> (HalfedgeMesh, Vec<f64>) {
    let (m, p) = shapes::icosphere::<f64>(levels);
    embedded(m, &p)
}

pub fn fibonacci(n: usize) -> (HalfedgeMesh, Vec<f64>) {
    let (m, p) = shapes::fibonacci_sphere::<f64>(n);
    embedded(m, &p)
}

pub fn torus(nu: usize, nv: usize) -> (HalfedgeMesh, Vec<f64>) {
    let (m, p) = shapes::torus::<f64>(nu, nv, 2.0, 0.8);
    embedded(m, &p)
}

/// Random cone angles satisfying Gauss-Bonnet: positive curvature spread
/// over a few vertices on a sphere, cancelling pairs on a torus.
pub fn random_prescription(mesh: &HalfedgeMesh, rng: &mut impl Rng) -> Vec<f64> {
    let n = mesh.n_vertices();
    let chi = mesh.euler_characteristic();
    let mut verts: Vec<usize> = (0..n).collect();
    verts.shuffle(rng);
    let mut angles = vec![TAU; n];
    if chi > 0 {
        let k = if n <= 4 {
            n
        } else {
            rng.gen_range(5..=8.min(n))
        };
        let (lo, hi) = if n <= 4 { (0.8, 1.2) } else { (0.5, 1.5) };
        let w: Vec<f64> = (0..k).map(|_| rng.gen_range(lo..hi)).collect();
        let total: f64 = w.iter().sum();
        for (i, &v) in verts[..k].iter().enumerate() {
            angles[v] = TAU - TAU * chi as f64 * w[i] / total;
        }
    } else {
        assert_eq!(chi, 0);
        for pair in verts[..6].chunks(2) {
            let k = rng.gen_range(0.2..0.8) * PI;
            angles[pair[0]] = TAU - k;
            angles[pair[1]] = TAU + k;
        }
    }
    angles
}

/// Cones of angle `π` at the vertices closest to the corners of an inscribed
/// regular tetrahedron.
pub fn four_pi_cones(pos: &[[f64; 3]]) -> Vec<f64> {
    let dirs = [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ];
    let mut a = vec![TAU; pos.len()];
    for d in dirs {
        let dotp = |k: usize| pos[k][0] * d[0] + pos[k][1] * d[1] + pos[k][2] * d[2];
        let v = (0..pos.len())
            .max_by(|&i, &j| dotp(i).total_cmp(&dotp(j)))
            .unwrap();
        a[v] = PI;
    }
    a
}

/// Corners of `f` laid out with the tail of its halfedge `h` at `p0` and its
/// tip at `p1`, the face on the left.
pub fn lay_out_face(
    mesh: &HalfedgeMesh,
    lambda: &[f64],
    h: usize,
    p0: [f64; 2],
    p1: [f64; 2],
) -> [[f64; 2]; 3] {
    let f = mesh.face(h);
    let hs = mesh.face_halfedges(f);
    let r = hs.iter().position(|&x| x == h).unwrap();
    let len = |h: usize| (lambda[mesh.edge(h)] / 2.0).exp();
    let (a, b, c) = (len(hs[r]), len(hs[(r + 1) % 3]), len(hs[(r + 2) % 3]));
    // third corner: distance c from p0 and b from p1
    let cos0 = (a * a + c * c - b * b) / (2.0 * a * c);
    let sin0 = (1.0 - cos0 * cos0).max(0.0).sqrt();
    let d = [(p1[0] - p0[0]) / a, (p1[1] - p0[1]) / a];
    let q = [
        p0[0] + c * (cos0 * d[0] - sin0 * d[1]),
        p0[1] + c * (cos0 * d[1] + sin0 * d[0]),
    ];
    let mut out = [[0.0; 2]; 3];
    out[r] = p0;
    out[(r + 1) % 3] = p1;
    out[(r + 2) % 3] = q;
    out
}

fn bary(t: [[f64; 2]; 3], x: [f64; 2]) -> [f64; 3] {
    let cross = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    let area = cross(t[0], t[1], t[2]);
    [
        cross(x, t[1], t[2]) / area,
        cross(t[0], x, t[2]) / area,
        cross(t[0], t[1], x) / area,
    ]
}

fn at(t: [[f64; 2]; 3], w: [f64; 3]) -> [f64; 2] {
    [0, 1].map(|d| (0..3).map(|c| w[c] * t[c][d]).sum())
}

/// Barycentric distance between two points of a flat surface, expressed in
/// the face of `a`; `b` must lie in the same face or in one sharing an edge.
pub fn barycentric_distance(
    mesh: &HalfedgeMesh,
    lambda: &[f64],
    a: SurfacePoint<f64>,
    b: SurfacePoint<f64>,
) -> f64 {
    let dist = |u: [f64; 3], v: [f64; 3]| (0..3).map(|c| (u[c] - v[c]).abs()).fold(0.0, f64::max);
    let mut best = if a.face == b.face {
        dist(a.coords, b.coords)
    } else {
        f64::INFINITY
    };
    let h0 = mesh.face_halfedge(a.face);
    let ta = lay_out_face(
        mesh,
        lambda,
        h0,
        [0.0, 0.0],
        [(lambda[mesh.edge(h0)] / 2.0).exp(), 0.0],
    );
    for (k, h) in mesh.face_halfedges(a.face).into_iter().enumerate() {
        let t = mesh.twin(h);
        if mesh.face(t) != b.face {
            continue;
        }
        let tb = lay_out_face(mesh, lambda, t, ta[(k + 1) % 3], ta[k]);
        best = best.min(dist(a.coords, bary(ta, at(tb, b.coords))));
    }
    best
}

/// A point on the halfedge `h` at parameter `s` from its tail, expressed in
/// the face of `h`.
pub fn point_on_halfedge(mesh: &HalfedgeMesh, h: usize, s: f64) -> SurfacePoint<f64> {
    let f = mesh.face(h);
    let r = mesh.face_halfedges(f).iter().position(|&x| x == h).unwrap();
    let mut w = [0.0; 3];
    w[r] = 1.0 - s;
    w[(r + 1) % 3] = s;
    SurfacePoint::new(f, w)
}
