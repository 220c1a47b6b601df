use super::{CellComplex, Dart, DoubleMap, Part, UnionFind};
use crate::error::{Error, Result};
use crate::Real;

/// The quad graph `◇`. Its vertices are the `Λ` vertices; each edge joins a
/// `Γ` vertex to a `Γ*` vertex and is oriented that way; face `i` is the
/// quadrilateral `(x, y_R, x', y_L)` of the edge pair `(e_i, e_i*)`.
///
/// The four sides of quad `i` are numbered
/// `S0 = x→y_R`, `S1 = x'→y_R`, `S2 = x'→y_L`, `S3 = x→y_L`, so the face
/// boundary is `[S0, −S1, S2, −S3]`.
#[derive(Clone, Debug, Default)]
pub struct Diamond {
    pub complex: CellComplex,
    /// `[x, y_R, x', y_L]` per quad, as `Λ` vertices.
    pub corners: Vec<[usize; 4]>,
    /// `◇` edge used as side `S_k` of each quad.
    pub sides: Vec<[usize; 4]>,
    /// Quads on each side of a `◇` edge: `[left, right]` of its canonical
    /// orientation. Boundary edges have one side missing.
    pub edge_quads: Vec<[Option<usize>; 2]>,
}

/// Slot sides `(head, tail)` of a `Λ` dart as seen from the face it bounds.
fn dart_sides(primal: bool, forward: bool) -> (usize, usize) {
    match (primal, forward) {
        (true, true) => (2, 3),
        (true, false) => (0, 1),
        (false, true) => (3, 0),
        (false, false) => (1, 2),
    }
}

impl Diamond {
    pub(super) fn build<T: Real>(lam: &DoubleMap<T>) -> Result<Self> {
        let m = lam.m();
        let corners: Vec<[usize; 4]> = (0..m)
            .map(|i| {
                let [x, xp] = lam.edge_ends(i);
                let [yr, yl] = lam.edge_ends(i + m);
                [x, yr, xp, yl]
            })
            .collect();
        let side_ends = |i: usize, k: usize| -> [usize; 2] {
            let c = corners[i];
            match k {
                0 => [c[0], c[1]],
                1 => [c[2], c[1]],
                2 => [c[2], c[3]],
                _ => [c[0], c[3]],
            }
        };
        let mut uf = UnionFind::new(4 * m);
        for face in lam.faces() {
            let n = face.len();
            for j in 0..n {
                let (a, b) = (face[j], face[(j + 1) % n]);
                let (head, _) = dart_sides(a.edge < m, a.forward);
                let (_, tail) = dart_sides(b.edge < m, b.forward);
                let (sa, sb) = (4 * (a.edge % m) + head, 4 * (b.edge % m) + tail);
                if side_ends(sa / 4, sa % 4) != side_ends(sb / 4, sb % 4) {
                    return Err(Error::NonManifold(format!(
                        "diamond sides of edges {} and {} do not match",
                        a.edge, b.edge
                    )));
                }
                uf.union(sa, sb);
            }
        }
        let mut class_id = vec![usize::MAX; 4 * m];
        let mut edges = Vec::new();
        let mut sides = vec![[0usize; 4]; m];
        for s in 0..4 * m {
            let r = uf.find(s);
            if class_id[r] == usize::MAX {
                class_id[r] = edges.len();
                edges.push(side_ends(s / 4, s % 4));
            }
            sides[s / 4][s % 4] = class_id[r];
        }
        let mut edge_quads = vec![[None, None]; edges.len()];
        let mut faces = Vec::with_capacity(m);
        for (i, s) in sides.iter().enumerate() {
            let darts = [Dart::fwd(s[0]), Dart::rev(s[1]), Dart::fwd(s[2]), Dart::rev(s[3])];
            for d in darts {
                let slot = if d.forward { 0 } else { 1 };
                if edge_quads[d.edge][slot].replace(i).is_some() {
                    return Err(Error::NonManifold(format!(
                        "diamond edge {} used twice with the same orientation",
                        d.edge
                    )));
                }
            }
            faces.push(darts.to_vec());
        }
        for &[a, b] in &edges {
            if lam.vertex_part(a) != Part::Primal || lam.vertex_part(b) != Part::Dual {
                return Err(Error::NonManifold("diamond is not bipartite".into()));
            }
        }
        Ok(Diamond {
            complex: CellComplex::new(lam.n_vertices(), edges, faces),
            corners,
            sides,
            edge_quads,
        })
    }

    pub fn n_edges(&self) -> usize {
        self.complex.n_edges()
    }

    pub fn n_faces(&self) -> usize {
        self.complex.n_faces()
    }

    /// `◇` edges lying on a single quad.
    pub fn boundary_edges(&self) -> Vec<usize> {
        (0..self.n_edges()).filter(|&e| self.edge_quads[e].iter().any(Option::is_none)).collect()
    }

    /// Boundary darts of the region formed by `quads`, oriented with the
    /// region on their left.
    pub fn region_boundary(&self, quads: &[usize]) -> Vec<Dart> {
        let mut inside = vec![false; self.n_faces()];
        for &q in quads {
            inside[q] = true;
        }
        let is_in = |q: Option<usize>| q.is_some_and(|q| inside[q]);
        let mut out = Vec::new();
        for (e, &[l, r]) in self.edge_quads.iter().enumerate() {
            match (is_in(l), is_in(r)) {
                (true, false) => out.push(Dart::fwd(e)),
                (false, true) => out.push(Dart::rev(e)),
                _ => {}
            }
        }
        out
    }
}
