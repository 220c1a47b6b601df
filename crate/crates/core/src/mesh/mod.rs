//! Combinatorial substrate: the decomposition `Γ`, its dual `Γ*`, the double
//! `Λ = Γ ⊔ Γ*`, the diamond `◇` and the triple graph `Υ`.
//!
//! Indexing of the double `Λ`:
//! * vertices: `Γ` vertices `0..nv`, then `Γ*` vertices `nv..nv+nv*`;
//! * edges: primal edges `0..m`, then dual edges `m..2m`, dual edge `m+i`
//!   being `e_i*` (so `(e, e*)` is direct and `e** = −e`);
//! * faces: primal faces first, then dual faces.

mod build;
mod complex;
mod diamond;
mod homology;
mod triple;
mod validate;

use serde::{Deserialize, Serialize};

pub use build::{cube, from_polygons, grid_disc, path_graph, square_torus, triangular_grid};
pub(crate) use build::{grid, Grid, GridEdge};
pub use complex::{build_dual, CellComplex, Dart, DualData, EdgeSides, UnionFind};
pub use diamond::Diamond;
pub use homology::TreeCotree;
pub use triple::{TripleFace, TripleGraph};
pub use validate::{validate, validate_cells, TopologyReport};

use crate::error::{invalid, precondition, Error, Result};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Planar,
    Torus,
    Sphere,
}

/// Which half of the double a vertex, edge or face belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    Primal,
    Dual,
}

/// The double `Λ` of a cellular decomposition with its conformal ratios.
#[derive(Clone, Debug)]
pub struct DoubleMap<T> {
    primal: CellComplex,
    dual: CellComplex,
    face_vertex: Vec<usize>,
    dual_face_vertex: Vec<usize>,
    rho: Vec<T>,
    lengths: Option<Vec<[T; 2]>>,
    topology: Topology,
    lambda_faces: Vec<Vec<Dart>>,
    vertex_face: Vec<Option<usize>>,
    diamond: Diamond,
}

impl<T: Real> DoubleMap<T> {
    /// Assembles a double from its two halves. Dual edge `i` must be the dual
    /// of primal edge `i`, crossing it from its right face to its left face.
    pub fn from_parts(
        primal: CellComplex,
        dual: CellComplex,
        face_vertex: Vec<usize>,
        dual_face_vertex: Vec<usize>,
        rho: Vec<T>,
        lengths: Option<Vec<[T; 2]>>,
    ) -> Result<Self> {
        primal.check()?;
        dual.check()?;
        let m = primal.n_edges();
        if dual.n_edges() != m {
            return invalid(format!("{} primal edges but {} dual edges", m, dual.n_edges()));
        }
        if rho.len() != m {
            return invalid(format!("ρ given on {} of {} edges", rho.len(), m));
        }
        if let Some(e) = rho.iter().position(|r| !(*r > T::zero()) || !r.is_finite()) {
            return invalid(format!("ρ must be positive and finite, edge {e} has {}", rho[e]));
        }
        if face_vertex.len() != primal.n_faces() || dual_face_vertex.len() != dual.n_faces() {
            return invalid("face/vertex duality tables do not match the face counts");
        }
        if let Some(l) = &lengths {
            if l.len() != m {
                return invalid("lengths must be given on every edge pair");
            }
        }
        let nv = primal.n_vertices;
        let mut vertex_face = vec![None; nv + dual.n_vertices];
        for (f, &y) in face_vertex.iter().enumerate() {
            if y >= dual.n_vertices || vertex_face[nv + y].replace(f).is_some() {
                return invalid(format!("primal face {f} has an invalid dual vertex"));
            }
        }
        for (f, &x) in dual_face_vertex.iter().enumerate() {
            if x >= nv || vertex_face[x].replace(primal.n_faces() + f).is_some() {
                return invalid(format!("dual face {f} has an invalid primal center"));
            }
        }
        let mut lambda_faces: Vec<Vec<Dart>> = primal.faces.clone();
        lambda_faces.extend(
            dual.faces.iter().map(|f| f.iter().map(|d| Dart::new(d.edge + m, d.forward)).collect()),
        );
        let n_faces = primal.n_faces() + dual.n_faces();
        let topology = if primal.is_closed() {
            match primal.euler_characteristic() {
                0 => Topology::Torus,
                2 => Topology::Sphere,
                chi => {
                    return precondition(format!(
                        "closed surfaces of Euler characteristic {chi} are not supported"
                    ))
                }
            }
        } else {
            Topology::Planar
        };
        let mut map = DoubleMap {
            primal,
            dual,
            face_vertex,
            dual_face_vertex,
            rho,
            lengths,
            topology,
            lambda_faces,
            vertex_face,
            diamond: Diamond::default(),
        };
        debug_assert_eq!(map.n_faces(), n_faces);
        map.check_duality()?;
        map.diamond = Diamond::build(&map)?;
        Ok(map)
    }

    /// Every face must wind counterclockwise around its dual vertex: a primal
    /// face lies left of its forward darts, so their duals end at its center,
    /// and a dual face `x*` uses `e*` forward exactly when `e` leaves `x`.
    fn check_duality(&self) -> Result<()> {
        let m = self.m();
        for (f, face) in self.lambda_faces.iter().enumerate() {
            let c = self.face_center(f);
            for d in face {
                let (a, _) = self.dual_edge(d.edge);
                let [t, h] = self.edge_ends(a);
                let expected = match (d.edge < m, d.forward) {
                    (true, true) | (false, false) => h,
                    _ => t,
                };
                if expected != c {
                    return Err(Error::Unoriented(format!(
                        "face {f}: dual of edge {} does not meet the face center",
                        d.edge
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn primal(&self) -> &CellComplex {
        &self.primal
    }

    pub fn dual(&self) -> &CellComplex {
        &self.dual
    }

    pub fn face_vertex(&self) -> &[usize] {
        &self.face_vertex
    }

    pub fn dual_face_vertex(&self) -> &[usize] {
        &self.dual_face_vertex
    }

    /// Ratios on primal edges.
    pub fn rho(&self) -> &[T] {
        &self.rho
    }

    pub fn lengths(&self) -> Option<&[[T; 2]]> {
        self.lengths.as_deref()
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn diamond(&self) -> &Diamond {
        &self.diamond
    }

    /// Number of dual edge pairs.
    pub fn m(&self) -> usize {
        self.primal.n_edges()
    }

    pub fn n_primal_vertices(&self) -> usize {
        self.primal.n_vertices
    }

    pub fn n_dual_vertices(&self) -> usize {
        self.dual.n_vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.primal.n_vertices + self.dual.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        2 * self.m()
    }

    pub fn n_faces(&self) -> usize {
        self.lambda_faces.len()
    }

    pub fn n_primal_faces(&self) -> usize {
        self.primal.n_faces()
    }

    pub fn vertex_part(&self, v: usize) -> Part {
        if v < self.primal.n_vertices {
            Part::Primal
        } else {
            Part::Dual
        }
    }

    pub fn edge_part(&self, a: usize) -> Part {
        if a < self.m() {
            Part::Primal
        } else {
            Part::Dual
        }
    }

    /// `[tail, head]` of a `Λ` edge in `Λ` vertex indices.
    pub fn edge_ends(&self, a: usize) -> [usize; 2] {
        let m = self.m();
        if a < m {
            self.primal.edges[a]
        } else {
            let [t, h] = self.dual.edges[a - m];
            let nv = self.primal.n_vertices;
            [t + nv, h + nv]
        }
    }

    pub fn dart_tail(&self, d: Dart) -> usize {
        let [t, h] = self.edge_ends(d.edge);
        if d.forward {
            t
        } else {
            h
        }
    }

    pub fn dart_head(&self, d: Dart) -> usize {
        self.dart_tail(d.reversed())
    }

    /// `a* = sign · b`.
    pub fn dual_edge(&self, a: usize) -> (usize, i8) {
        let m = self.m();
        if a < m {
            (a + m, 1)
        } else {
            (a - m, -1)
        }
    }

    /// `ρ` on any `Λ` edge, with `ρ(e*) = 1/ρ(e)`.
    pub fn edge_rho(&self, a: usize) -> T {
        let m = self.m();
        if a < m {
            self.rho[a]
        } else {
            T::one() / self.rho[a - m]
        }
    }

    pub fn face(&self, f: usize) -> &[Dart] {
        &self.lambda_faces[f]
    }

    pub fn faces(&self) -> &[Vec<Dart>] {
        &self.lambda_faces
    }

    /// The `Λ` vertex dual to a `Λ` face.
    pub fn face_center(&self, f: usize) -> usize {
        let nf = self.primal.n_faces();
        if f < nf {
            self.primal.n_vertices + self.face_vertex[f]
        } else {
            self.dual_face_vertex[f - nf]
        }
    }

    /// The `Λ` face dual to a vertex, present exactly for inner vertices.
    pub fn vertex_face(&self, v: usize) -> Option<usize> {
        self.vertex_face[v]
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.vertex_face[v].is_some()
    }

    /// `+1` on `Γ`, `−1` on `Γ*`.
    pub fn epsilon(&self, v: usize) -> i8 {
        match self.vertex_part(v) {
            Part::Primal => 1,
            Part::Dual => -1,
        }
    }

    /// Outgoing darts at every `Λ` vertex (unordered).
    pub fn vertex_darts(&self) -> Vec<Vec<Dart>> {
        let mut out = vec![Vec::new(); self.n_vertices()];
        for a in 0..self.n_edges() {
            let [t, h] = self.edge_ends(a);
            out[t].push(Dart::fwd(a));
            out[h].push(Dart::rev(a));
        }
        out
    }

    /// `Λ` edges with a boundary vertex at either end are not needed here;
    /// this returns the primal edges lying on only one primal face.
    pub fn boundary_primal_edges(&self) -> Vec<usize> {
        self.primal.boundary_edges()
    }

    /// Exchanges the roles of `Γ` and `Γ*`. The new primal edge `i` is the
    /// old `e_i*`, and the new dual edge is `(e_i*)* = −e_i`, so `ρ` becomes
    /// `1/ρ` and lengths swap.
    pub fn swap(&self) -> Result<DoubleMap<T>> {
        let rev = |c: &CellComplex| CellComplex {
            n_vertices: c.n_vertices,
            edges: c.edges.iter().map(|&[t, h]| [h, t]).collect(),
            faces: c.faces.iter().map(|f| f.iter().map(|d| d.reversed()).collect()).collect(),
        };
        DoubleMap::from_parts(
            self.dual.clone(),
            rev(&self.primal),
            self.dual_face_vertex.clone(),
            self.face_vertex.clone(),
            self.rho.iter().map(|&r| T::one() / r).collect(),
            self.lengths.as_ref().map(|l| l.iter().map(|&[a, b]| [b, a]).collect()),
        )
    }

    /// The same map with different ratios.
    pub fn with_rho(&self, rho: Vec<T>) -> Result<DoubleMap<T>> {
        DoubleMap::from_parts(
            self.primal.clone(),
            self.dual.clone(),
            self.face_vertex.clone(),
            self.dual_face_vertex.clone(),
            rho,
            None,
        )
    }

    pub fn with_lengths(mut self, lengths: Vec<[T; 2]>) -> Result<Self> {
        if lengths.len() != self.m() {
            return invalid("lengths must be given on every edge pair");
        }
        self.lengths = Some(lengths);
        Ok(self)
    }

    /// Converts the ratios to another scalar type.
    pub fn cast<U: Real>(&self) -> DoubleMap<U> {
        DoubleMap {
            primal: self.primal.clone(),
            dual: self.dual.clone(),
            face_vertex: self.face_vertex.clone(),
            dual_face_vertex: self.dual_face_vertex.clone(),
            rho: self.rho.iter().map(|r| U::lit(r.to_f64_())).collect(),
            lengths: self
                .lengths
                .as_ref()
                .map(|l| l.iter().map(|[a, b]| [U::lit(a.to_f64_()), U::lit(b.to_f64_())]).collect()),
            topology: self.topology,
            lambda_faces: self.lambda_faces.clone(),
            vertex_face: self.vertex_face.clone(),
            diamond: self.diamond.clone(),
        }
    }
}

/// Builds the double of `Γ`, truncating at the boundary: each boundary edge
/// receives a dangling dual half-edge ending at a boundary dual vertex.
pub fn build_double<T: Real>(gamma: &CellComplex, rho: &[T]) -> Result<DoubleMap<T>> {
    if rho.len() != gamma.n_edges() {
        return invalid(format!(
            "ρ missing on edge {} (given on {} of {} edges)",
            rho.len().min(gamma.n_edges()),
            rho.len(),
            gamma.n_edges()
        ));
    }
    let dd = build_dual(gamma)?;
    DoubleMap::from_parts(
        gamma.clone(),
        dd.dual,
        dd.face_vertex,
        dd.dual_face_vertex,
        rho.to_vec(),
        None,
    )
}

/// Builds a double from a quadrilateral decomposition. Vertices carry a
/// color (`true` for `Γ`); each quad lists `[x, y_R, x', y_L]`
/// counterclockwise with `x, x'` in `Γ`, defining the primal edge `x → x'`
/// and its dual `y_R → y_L`. Any set of quads homeomorphic to a surface is
/// accepted, which realizes a domain as a subset of diamond faces.
///
/// `Γ` and `Γ*` vertices are numbered in increasing order of their ids.
pub fn from_quad_graph<T: Real>(
    is_primal: &[bool],
    quads: &[[usize; 4]],
    rho: &[T],
) -> Result<DoubleMap<T>> {
    use std::collections::HashMap;
    let n = is_primal.len();
    if rho.len() != quads.len() {
        return invalid(format!("ρ given on {} of {} quads", rho.len(), quads.len()));
    }
    let mut local = vec![0usize; n];
    let (mut np, mut nd) = (0, 0);
    for v in 0..n {
        if is_primal[v] {
            local[v] = np;
            np += 1;
        } else {
            local[v] = nd;
            nd += 1;
        }
    }
    for (q, c) in quads.iter().enumerate() {
        if c.iter().any(|&v| v >= n) {
            return invalid(format!("quad {q} references a missing vertex"));
        }
        if !(is_primal[c[0]] && is_primal[c[2]] && !is_primal[c[1]] && !is_primal[c[3]]) {
            return invalid(format!("quad {q} does not alternate between Γ and Γ*"));
        }
    }
    // Quads around a vertex in counterclockwise order: after quad q with
    // corner k at v comes the quad whose sector starts at corner k-1 of q.
    let mut starts: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut corners_at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (q, c) in quads.iter().enumerate() {
        for k in 0..4 {
            let v = c[k];
            corners_at[v].push((q, k));
            if starts.insert((v, c[(k + 1) % 4]), (q, k)).is_some() {
                return Err(Error::NonManifold(format!(
                    "diamond side {{{}, {}}} used twice with the same orientation",
                    v,
                    c[(k + 1) % 4]
                )));
            }
        }
    }
    let mut primal_faces = Vec::new();
    let mut face_vertex = Vec::new();
    let mut dual_faces = Vec::new();
    let mut dual_face_vertex = Vec::new();
    for v in 0..n {
        let Some(&first) = corners_at[v].first() else { continue };
        let mut cycle = vec![first];
        let closed = loop {
            let (q, k) = *cycle.last().unwrap();
            let prev = quads[q][(k + 3) % 4];
            match starts.get(&(v, prev)) {
                None => break false,
                Some(&nx) if nx == first => break true,
                Some(&nx) => {
                    if cycle.len() > corners_at[v].len() {
                        return Err(Error::NonManifold(format!("vertex {v} has a pinched star")));
                    }
                    cycle.push(nx);
                }
            }
        };
        if !closed {
            continue;
        }
        if cycle.len() != corners_at[v].len() {
            return Err(Error::NonManifold(format!("vertex {v} has a pinched star")));
        }
        // Corner 3 (y_L) / 0 (x) sees its edge forward, corners 1 / 2 reversed.
        let darts: Vec<Dart> = cycle.iter().map(|&(q, k)| Dart::new(q, k == 0 || k == 3)).collect();
        if is_primal[v] {
            dual_faces.push(darts);
            dual_face_vertex.push(local[v]);
        } else {
            primal_faces.push(darts);
            face_vertex.push(local[v]);
        }
    }
    let primal = CellComplex::new(
        np,
        quads.iter().map(|c| [local[c[0]], local[c[2]]]).collect(),
        primal_faces,
    );
    let dual = CellComplex::new(
        nd,
        quads.iter().map(|c| [local[c[1]], local[c[3]]]).collect(),
        dual_faces,
    );
    DoubleMap::from_parts(primal, dual, face_vertex, dual_face_vertex, rho.to_vec(), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_torus_double() {
        let g = square_torus(3, 3);
        let lam = build_double(&g, &vec![1.0f64; g.n_edges()]).unwrap();
        assert_eq!(lam.topology(), Topology::Torus);
        assert_eq!(lam.n_vertices(), 18);
        assert_eq!(lam.n_edges(), 36);
        assert_eq!(lam.n_faces(), 18);
        assert!((0..lam.n_vertices()).all(|v| lam.is_interior(v)));
    }

    #[test]
    fn reciprocal_rho() {
        let g = square_torus(2, 3);
        let lam = build_double(&g, &vec![2.0f64; g.n_edges()]).unwrap();
        let m = lam.m();
        for i in 0..m {
            assert_eq!(lam.edge_rho(m + i), 0.5);
            assert_eq!(lam.edge_rho(i) * lam.edge_rho(m + i), 1.0);
        }
    }

    #[test]
    fn rejects_nonpositive_rho() {
        let g = square_torus(2, 2);
        let mut rho = vec![1.0f64; g.n_edges()];
        rho[3] = 0.0;
        assert!(matches!(build_double(&g, &rho), Err(Error::InvalidInput(_))));
        assert!(build_double(&g, &rho[..4]).is_err());
    }

    #[test]
    fn swap_is_an_involution_up_to_orientation() {
        let g = triangular_grid(3, 3, true);
        let lam = build_double(&g, &vec![0.5f64; g.n_edges()]).unwrap();
        let back = lam.swap().unwrap().swap().unwrap();
        for a in 0..lam.n_edges() {
            let [t, h] = lam.edge_ends(a);
            let [t2, h2] = back.edge_ends(a);
            assert_eq!([t2, h2], [h, t]);
        }
        assert_eq!(back.rho(), lam.rho());
    }

    #[test]
    fn quad_graph_matches_cell_construction() {
        // 3×3 block of diamond squares with Γ on even sites.
        let n = 4;
        let id = |a: usize, b: usize| a + n * b;
        let colors: Vec<bool> = (0..n * n).map(|v| (v % n + v / n) % 2 == 0).collect();
        let mut quads = Vec::new();
        for b in 0..n - 1 {
            for a in 0..n - 1 {
                let c = [id(a, b), id(a + 1, b), id(a + 1, b + 1), id(a, b + 1)];
                quads.push(if (a + b) % 2 == 0 { c } else { [c[1], c[2], c[3], c[0]] });
            }
        }
        let lam = from_quad_graph(&colors, &quads, &vec![1.0f64; quads.len()]).unwrap();
        assert_eq!(lam.m(), 9);
        assert_eq!(lam.n_faces(), 4);
        assert_eq!(lam.topology(), Topology::Planar);
    }
}
