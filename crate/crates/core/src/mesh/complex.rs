use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An oriented reference to an edge: the edge id plus a sign bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dart {
    pub edge: usize,
    pub forward: bool,
}

impl Dart {
    pub fn new(edge: usize, forward: bool) -> Self {
        Dart { edge, forward }
    }

    pub fn fwd(edge: usize) -> Self {
        Dart { edge, forward: true }
    }

    pub fn rev(edge: usize) -> Self {
        Dart { edge, forward: false }
    }

    /// The same edge traversed the other way.
    pub fn reversed(self) -> Self {
        Dart { edge: self.edge, forward: !self.forward }
    }

    pub fn sign(self) -> i32 {
        if self.forward {
            1
        } else {
            -1
        }
    }
}

/// A two dimensional cellular complex with oriented edges and faces given as
/// cyclic lists of darts, counterclockwise with respect to the surface
/// orientation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CellComplex {
    pub n_vertices: usize,
    /// `[tail, head]` per edge.
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<Vec<Dart>>,
}

/// Faces on each side of an edge: `left` is the face whose boundary uses the
/// edge forward, `right` the one using it reversed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeSides {
    pub left: Option<usize>,
    pub right: Option<usize>,
}

impl CellComplex {
    pub fn new(n_vertices: usize, edges: Vec<[usize; 2]>, faces: Vec<Vec<Dart>>) -> Self {
        CellComplex { n_vertices, edges, faces }
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.n_edges() as i64 + self.n_faces() as i64
    }

    pub fn tail(&self, d: Dart) -> usize {
        let [t, h] = self.edges[d.edge];
        if d.forward {
            t
        } else {
            h
        }
    }

    pub fn head(&self, d: Dart) -> usize {
        self.tail(d.reversed())
    }

    /// Structural problems: dangling references, open face cycles, edges
    /// used by more than two faces or twice in the same direction.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, &[t, h]) in self.edges.iter().enumerate() {
            if t >= self.n_vertices || h >= self.n_vertices {
                out.push(format!("edge {i} references a missing vertex"));
            }
        }
        let mut uses = vec![(0usize, 0usize); self.n_edges()];
        for (f, face) in self.faces.iter().enumerate() {
            if face.is_empty() {
                out.push(format!("face {f} is empty"));
                continue;
            }
            if face.iter().any(|d| d.edge >= self.n_edges()) {
                out.push(format!("face {f} references a missing edge"));
                continue;
            }
            for k in 0..face.len() {
                let a = face[k];
                let b = face[(k + 1) % face.len()];
                if self.head(a) != self.tail(b) {
                    out.push(format!("∂∂ ≠ 0: boundary of face {f} is not a closed cycle"));
                    break;
                }
            }
            for d in face {
                if d.forward {
                    uses[d.edge].0 += 1;
                } else {
                    uses[d.edge].1 += 1;
                }
            }
        }
        for (e, &(p, n)) in uses.iter().enumerate() {
            if p + n > 2 {
                out.push(format!("edge {e} bounds {} faces", p + n));
            } else if p > 1 || n > 1 {
                out.push(format!("edge {e} is used twice with the same orientation"));
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            return Ok(());
        }
        let msg = v.join("; ");
        if msg.contains("same orientation") {
            Err(Error::Unoriented(msg))
        } else {
            Err(Error::NonManifold(msg))
        }
    }

    pub fn edge_sides(&self) -> Vec<EdgeSides> {
        let mut sides = vec![EdgeSides::default(); self.n_edges()];
        for (f, face) in self.faces.iter().enumerate() {
            for d in face {
                if d.forward {
                    sides[d.edge].left = Some(f);
                } else {
                    sides[d.edge].right = Some(f);
                }
            }
        }
        sides
    }

    pub fn boundary_edges(&self) -> Vec<usize> {
        self.edge_sides()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.left.is_none() || s.right.is_none())
            .map(|(e, _)| e)
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_edges().is_empty()
    }

    /// Counterclockwise cycle of outgoing darts around every vertex whose
    /// star is complete (all incident edges bound two faces). `None` for
    /// boundary vertices.
    pub fn vertex_rotations(&self) -> Vec<Option<Vec<Dart>>> {
        use std::collections::HashMap;
        let mut next: HashMap<Dart, Dart> = HashMap::new();
        for face in &self.faces {
            for k in 0..face.len() {
                let incoming = face[k];
                let outgoing = face[(k + 1) % face.len()];
                // Going counterclockwise around the shared vertex, the face
                // sits between `outgoing` and the reverse of `incoming`.
                next.insert(outgoing, incoming.reversed());
            }
        }
        let mut out_darts: Vec<Vec<Dart>> = vec![Vec::new(); self.n_vertices];
        for (e, &[t, h]) in self.edges.iter().enumerate() {
            out_darts[t].push(Dart::fwd(e));
            out_darts[h].push(Dart::rev(e));
        }
        out_darts
            .into_iter()
            .map(|darts| {
                let first = *darts.first()?;
                let mut cycle = vec![first];
                let mut cur = first;
                loop {
                    let nxt = *next.get(&cur)?;
                    if nxt == first {
                        break;
                    }
                    if cycle.len() > darts.len() {
                        return None;
                    }
                    cycle.push(nxt);
                    cur = nxt;
                }
                (cycle.len() == darts.len()).then_some(cycle)
            })
            .collect()
    }

    /// Number of connected components of the 1-skeleton.
    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.n_vertices);
        for &[t, h] in &self.edges {
            uf.union(t, h);
        }
        uf.count()
    }

    /// Number of closed cycles formed by boundary edges.
    pub fn boundary_components(&self) -> usize {
        let b = self.boundary_edges();
        if b.is_empty() {
            return 0;
        }
        let mut uf = UnionFind::new(self.n_vertices);
        let mut touched = vec![false; self.n_vertices];
        for &e in &b {
            let [t, h] = self.edges[e];
            uf.union(t, h);
            touched[t] = true;
            touched[h] = true;
        }
        let mut roots: Vec<usize> =
            (0..self.n_vertices).filter(|&v| touched[v]).map(|v| uf.find(v)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Rank over GF(2) of the face boundary operator `∂₂`.
    pub fn face_boundary_rank_mod2(&self) -> usize {
        let words = self.n_edges().div_ceil(64);
        let mut rows: Vec<Vec<u64>> = self
            .faces
            .iter()
            .map(|face| {
                let mut r = vec![0u64; words];
                for d in face {
                    r[d.edge / 64] ^= 1 << (d.edge % 64);
                }
                r
            })
            .collect();
        let mut rank = 0;
        for col in 0..self.n_edges() {
            let (w, b) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & b != 0 {
                    for (x, y) in row.iter_mut().zip(&pivot) {
                        *x ^= y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Disjoint sets with path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }

    pub fn count(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}

/// Result of [`build_dual`]: the dual complex together with the incidence
/// bookkeeping between the two.
#[derive(Clone, Debug, PartialEq)]
pub struct DualData {
    pub dual: CellComplex,
    /// Dual vertex placed in each primal face.
    pub face_vertex: Vec<usize>,
    /// Primal vertex at the center of each dual face.
    pub dual_face_vertex: Vec<usize>,
    /// Dangling dual vertex attached to each boundary edge, if any.
    pub boundary_dual_vertex: Vec<Option<usize>>,
}

/// Poincaré dual: one vertex per face (plus one dangling vertex per boundary
/// edge), one edge per edge crossing it from right to left so that `(e, e*)`
/// is direct, and one face per interior vertex.
pub fn build_dual(g: &CellComplex) -> Result<DualData> {
    g.check()?;
    let sides = g.edge_sides();
    let nf = g.n_faces();
    let mut n_dual = nf;
    let mut boundary_dual_vertex = vec![None; g.n_edges()];
    let mut dual_edges = Vec::with_capacity(g.n_edges());
    for (e, s) in sides.iter().enumerate() {
        let right = match s.right {
            Some(f) => f,
            None => {
                boundary_dual_vertex[e] = Some(n_dual);
                n_dual += 1;
                n_dual - 1
            }
        };
        let left = match s.left {
            Some(f) => f,
            None => {
                if s.right.is_none() {
                    return Err(Error::NonManifold(format!("edge {e} bounds no face")));
                }
                boundary_dual_vertex[e] = Some(n_dual);
                n_dual += 1;
                n_dual - 1
            }
        };
        dual_edges.push([right, left]);
    }
    let rotations = g.vertex_rotations();
    let mut dual_faces = Vec::new();
    let mut dual_face_vertex = Vec::new();
    for (v, rot) in rotations.iter().enumerate() {
        if let Some(rot) = rot {
            // Outgoing edges have their dual running counterclockwise around v.
            dual_faces.push(rot.iter().map(|d| Dart::new(d.edge, d.forward)).collect());
            dual_face_vertex.push(v);
        }
    }
    Ok(DualData {
        dual: CellComplex::new(n_dual, dual_edges, dual_faces),
        face_vertex: (0..nf).collect(),
        dual_face_vertex,
        boundary_dual_vertex,
    })
}
