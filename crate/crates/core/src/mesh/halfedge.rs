use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// Closed, oriented triangle mesh connectivity.
///
/// Halfedge `h` of the input face `f` with corner `c` is `3f + c`; it runs from
/// the face's `c`-th vertex to its `(c+1)`-th vertex. Edges are numbered in the
/// order of their smaller halfedge. Intrinsic flips rewire `next`, `tip` and
/// `face` but never renumber halfedges, edges or faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfedgeMesh {
    n_vertices: usize,
    next: Vec<usize>,
    twin: Vec<usize>,
    tip: Vec<usize>,
    edge: Vec<usize>,
    face: Vec<usize>,
    face_halfedge: Vec<usize>,
    edge_halfedge: Vec<usize>,
    components: usize,
}

impl HalfedgeMesh {
    /// Builds a closed mesh from vertex-index triples.
    ///
    /// The vertex count is `max index + 1`; every vertex must be used.
    pub fn from_faces(faces: &[[usize; 3]]) -> Result<Self> {
        check_faces(faces)?;
        let n_h = 3 * faces.len();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(n_h);
        for (f, tri) in faces.iter().enumerate() {
            for c in 0..3 {
                let (a, b) = (tri[c], tri[(c + 1) % 3]);
                if directed.insert((a, b), 3 * f + c).is_some() {
                    return Err(Error::NonManifoldEdge(a.min(b), a.max(b)));
                }
            }
        }
        let mut twin = vec![0; n_h];
        for (h, twin_h) in twin.iter_mut().enumerate() {
            let tri = faces[h / 3];
            let (a, b) = (tri[h % 3], tri[(h % 3 + 1) % 3]);
            match directed.get(&(b, a)) {
                Some(&t) => *twin_h = t,
                None => return Err(Error::OpenBoundary(a.min(b), a.max(b))),
            }
        }
        Self::from_gluing(faces, twin)
    }

    /// Builds a mesh from faces and an explicit halfedge pairing, which
    /// allows several edges between the same two vertices.
    pub(crate) fn from_gluing(faces: &[[usize; 3]], twin: Vec<usize>) -> Result<Self> {
        let n_vertices = check_faces(faces)?;
        let n_h = 3 * faces.len();
        let mut tip = vec![0; n_h];
        let mut next = vec![0; n_h];
        let mut face = vec![0; n_h];
        for (f, tri) in faces.iter().enumerate() {
            for c in 0..3 {
                let h = 3 * f + c;
                tip[h] = tri[(c + 1) % 3];
                next[h] = 3 * f + (c + 1) % 3;
                face[h] = f;
            }
        }
        for h in 0..n_h {
            let t = twin[h];
            let tail = |g: usize| faces[g / 3][g % 3];
            if t >= n_h || t == h || twin[t] != h || tail(t) != tip[h] || tip[t] != tail(h) {
                let (a, b) = (tail(h), tip[h]);
                return Err(Error::NonManifoldEdge(a.min(b), a.max(b)));
            }
        }
        let mut edge = vec![usize::MAX; n_h];
        let mut edge_halfedge = Vec::with_capacity(n_h / 2);
        for h in 0..n_h {
            if edge[h] == usize::MAX {
                let e = edge_halfedge.len();
                edge[h] = e;
                edge[twin[h]] = e;
                edge_halfedge.push(h);
            }
        }
        let face_halfedge = (0..faces.len()).map(|f| 3 * f).collect();
        let mut mesh = Self {
            n_vertices,
            next,
            twin,
            tip,
            edge,
            face,
            face_halfedge,
            edge_halfedge,
            components: 0,
        };
        mesh.components = mesh.count_components();
        Ok(mesh)
    }

    fn count_components(&self) -> usize {
        let mut label = vec![usize::MAX; self.n_faces()];
        let mut count = 0;
        for f0 in 0..self.n_faces() {
            if label[f0] != usize::MAX {
                continue;
            }
            label[f0] = count;
            let mut stack = vec![f0];
            while let Some(f) = stack.pop() {
                for h in self.face_halfedges(f) {
                    let g = self.face(self.twin(h));
                    if label[g] == usize::MAX {
                        label[g] = count;
                        stack.push(g);
                    }
                }
            }
            count += 1;
        }
        count
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }
    pub fn n_edges(&self) -> usize {
        self.edge_halfedge.len()
    }
    pub fn n_faces(&self) -> usize {
        self.face_halfedge.len()
    }
    pub fn n_halfedges(&self) -> usize {
        self.next.len()
    }

    #[inline]
    pub fn next(&self, h: usize) -> usize {
        self.next[h]
    }
    #[inline]
    pub fn prev(&self, h: usize) -> usize {
        self.next[self.next[h]]
    }
    #[inline]
    pub fn twin(&self, h: usize) -> usize {
        self.twin[h]
    }
    /// Vertex the halfedge points to.
    #[inline]
    pub fn tip(&self, h: usize) -> usize {
        self.tip[h]
    }
    /// Vertex the halfedge starts from.
    #[inline]
    pub fn tail(&self, h: usize) -> usize {
        self.tip[self.twin[h]]
    }
    #[inline]
    pub fn edge(&self, h: usize) -> usize {
        self.edge[h]
    }
    #[inline]
    pub fn face(&self, h: usize) -> usize {
        self.face[h]
    }
    /// Vertex across from `h` in its face; the corner angle "opposite" `h`
    /// sits there.
    #[inline]
    pub fn opposite_vertex(&self, h: usize) -> usize {
        self.tip[self.next[h]]
    }
    #[inline]
    pub fn face_halfedge(&self, f: usize) -> usize {
        self.face_halfedge[f]
    }
    #[inline]
    pub fn edge_halfedge(&self, e: usize) -> usize {
        self.edge_halfedge[e]
    }

    /// The face's halfedges starting at `face_halfedge(f)`.
    pub fn face_halfedges(&self, f: usize) -> [usize; 3] {
        let h0 = self.face_halfedge[f];
        let h1 = self.next[h0];
        [h0, h1, self.next[h1]]
    }

    /// Face vertices in halfedge order: the tail of each face halfedge.
    pub fn face_vertices(&self, f: usize) -> [usize; 3] {
        self.face_halfedges(f).map(|h| self.tail(h))
    }

    /// Face edges in halfedge order.
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_halfedges(f).map(|h| self.edge[h])
    }

    pub fn edge_vertices(&self, e: usize) -> [usize; 2] {
        let h = self.edge_halfedge[e];
        [self.tail(h), self.tip(h)]
    }

    pub fn faces(&self) -> Vec<[usize; 3]> {
        (0..self.n_faces()).map(|f| self.face_vertices(f)).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.n_edges() as i64 + self.n_faces() as i64
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// False when the face list described several disjoint surfaces; this is
    /// reported rather than rejected.
    pub fn is_connected(&self) -> bool {
        self.components == 1
    }

    /// Number of edge ends at each vertex (a loop counts twice).
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices];
        for h in 0..self.n_halfedges() {
            deg[self.tip[h]] += 1;
        }
        deg
    }

    /// Outgoing halfedges of every vertex.
    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_vertices];
        for h in 0..self.n_halfedges() {
            out[self.tail(h)].push(h);
        }
        out
    }

    /// Order-independent fingerprint of the connectivity tables.
    pub fn connectivity_hash(&self) -> u64 {
        let mut s = std::collections::hash_map::DefaultHasher::new();
        self.hash(&mut s);
        s.finish()
    }

    /// Face vertex cycles, each rotated to start at its smallest vertex and
    /// then sorted; equal for two meshes with the same combinatorics up to
    /// halfedge relabeling (on meshes without multi-edges).
    pub fn canonical_faces(&self) -> Vec<[usize; 3]> {
        let mut out: Vec<[usize; 3]> = self
            .faces()
            .into_iter()
            .map(|t| {
                let k = (0..3).min_by_key(|&i| (t[i], t[(i + 1) % 3])).unwrap();
                [t[k], t[(k + 1) % 3], t[(k + 2) % 3]]
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Rewires the two faces around edge `e` so that it connects the two
    /// opposite vertices instead. Returns the halfedges
    /// `[h, next(h), prev(h), t, next(t), prev(t)]` of the quad before the flip.
    ///
    /// Fails when both sides of `e` belong to the same face.
    pub(crate) fn flip_connectivity(&mut self, e: usize) -> Result<[usize; 6]> {
        let h = self.edge_halfedge[e];
        let t = self.twin[h];
        if self.face[h] == self.face[t] {
            return Err(Error::SelfAdjacentFlip { edge: e });
        }
        let (h1, h2) = (self.next[h], self.next[self.next[h]]);
        let (t1, t2) = (self.next[t], self.next[self.next[t]]);
        let (f1, f2) = (self.face[h], self.face[t]);
        let k = self.tip[h1];
        let l = self.tip[t1];
        // h: l -> k in f1 with h2 (k -> i) and t1 (i -> l).
        self.tip[h] = k;
        self.next[h] = h2;
        self.next[h2] = t1;
        self.next[t1] = h;
        self.face[t1] = f1;
        // t: k -> l in f2 with t2 (l -> j) and h1 (j -> k).
        self.tip[t] = l;
        self.next[t] = t2;
        self.next[t2] = h1;
        self.next[h1] = t;
        self.face[h1] = f2;
        self.face_halfedge[f1] = h;
        self.face_halfedge[f2] = t;
        Ok([h, h1, h2, t, t1, t2])
    }

    /// Checks the structural invariants; used by tests and after flips.
    pub fn check_invariants(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        for h in 0..self.n_halfedges() {
            let t = self.twin[h];
            if t == h || self.twin[t] != h {
                return bad("twin is not a fixed-point-free involution");
            }
            if self.next[self.next[self.next[h]]] != h {
                return bad("face is not a triangle");
            }
            if self.edge[h] != self.edge[t] {
                return bad("twins disagree on edge");
            }
            if self.face[self.next[h]] != self.face[h] {
                return bad("next leaves the face");
            }
            if self.tip[t] != self.tip[self.prev(h)] {
                return bad("tail mismatch");
            }
        }
        for (e, &h) in self.edge_halfedge.iter().enumerate() {
            if self.edge[h] != e {
                return bad("edge halfedge mismatch");
            }
        }
        for (f, &h) in self.face_halfedge.iter().enumerate() {
            if self.face[h] != f {
                return bad("face halfedge mismatch");
            }
        }
        Ok(())
    }
}

impl Hash for HalfedgeMesh {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n_vertices.hash(state);
        self.next.hash(state);
        self.twin.hash(state);
        self.tip.hash(state);
        self.edge.hash(state);
        self.face.hash(state);
    }
}

/// Returns the vertex count after checking for empty input, repeated
/// corners and unused vertices.
fn check_faces(faces: &[[usize; 3]]) -> Result<usize> {
    if faces.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let n_vertices = faces.iter().flatten().copied().max().unwrap() + 1;
    let mut used = vec![false; n_vertices];
    for (f, tri) in faces.iter().enumerate() {
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0] {
            return Err(Error::DegenerateFace(f));
        }
        for &v in tri {
            used[v] = true;
        }
    }
    if let Some(v) = used.iter().position(|u| !u) {
        return Err(Error::IsolatedVertex(v));
    }
    Ok(n_vertices)
}

/// Unordered boundary vertex pairs of an open face list, checking that no
/// pair is used by more than two faces or twice with the same orientation.
pub(crate) fn boundary_edges(faces: &[[usize; 3]]) -> Result<Vec<(usize, usize)>> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for (f, tri) in faces.iter().enumerate() {
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0] {
            return Err(Error::DegenerateFace(f));
        }
        for c in 0..3 {
            let (a, b) = (tri[c], tri[(c + 1) % 3]);
            if directed.insert((a, b), f).is_some() {
                return Err(Error::NonManifoldEdge(a.min(b), a.max(b)));
            }
        }
    }
    let mut out: Vec<(usize, usize)> = directed
        .keys()
        .filter(|(a, b)| !directed.contains_key(&(*b, *a)))
        .copied()
        .collect();
    out.sort_unstable();
    Ok(out)
}
