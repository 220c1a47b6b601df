use super::{CellComplex, Dart, DoubleMap};
use crate::Real;

/// What a face of `Υ` surrounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TripleFace {
    /// The small square inside quad `i`.
    Quad(usize),
    /// The polygon around an inner `Λ` vertex.
    Vertex(usize),
}

/// The triple graph `Υ`: vertices are `◇` edges, and inside each quad the
/// midpoints of consecutive sides are joined. Edge `4i + k` sits at corner
/// `k` of quad `i` (corners `x, y_R, x', y_L`) and runs from side `S_{k−1}`
/// to side `S_k`, counterclockwise around the quad.
#[derive(Clone, Debug)]
pub struct TripleGraph {
    pub complex: CellComplex,
    pub face_kind: Vec<TripleFace>,
    /// `Λ` vertex at the corner of each `Υ` edge.
    pub corner_vertex: Vec<usize>,
    /// `Λ` edge crossed by each `Υ` edge: `e_i` at corners `x, x'`, `e_i*`
    /// at corners `y_R, y_L`.
    pub crossing: Vec<usize>,
}

impl TripleGraph {
    pub fn build<T: Real>(lam: &DoubleMap<T>) -> Self {
        let dia = lam.diamond();
        let m = lam.m();
        let mut edges = Vec::with_capacity(4 * m);
        let mut corner_vertex = Vec::with_capacity(4 * m);
        let mut crossing = Vec::with_capacity(4 * m);
        for i in 0..m {
            let s = dia.sides[i];
            for k in 0..4 {
                edges.push([s[(k + 3) % 4], s[k]]);
                corner_vertex.push(dia.corners[i][k]);
                crossing.push(if k % 2 == 0 { i } else { i + m });
            }
        }
        let mut faces: Vec<Vec<Dart>> =
            (0..m).map(|i| (0..4).map(|k| Dart::fwd(4 * i + k)).collect()).collect();
        let mut face_kind: Vec<TripleFace> = (0..m).map(TripleFace::Quad).collect();
        for v in 0..lam.n_vertices() {
            let Some(f) = lam.vertex_face(v) else { continue };
            let cycle = lam
                .face(f)
                .iter()
                .map(|d| {
                    let i = d.edge % m;
                    let k = match (d.edge < m, d.forward) {
                        (true, true) => 3,
                        (true, false) => 1,
                        (false, true) => 0,
                        (false, false) => 2,
                    };
                    Dart::rev(4 * i + k)
                })
                .collect();
            faces.push(cycle);
            face_kind.push(TripleFace::Vertex(v));
        }
        TripleGraph {
            complex: CellComplex::new(dia.n_edges(), edges, faces),
            face_kind,
            corner_vertex,
            crossing,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.complex.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.complex.n_edges()
    }

    pub fn n_faces(&self) -> usize {
        self.complex.n_faces()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_double, grid_disc, square_torus};

    #[test]
    fn torus_triple_graph_is_a_torus() {
        let g = square_torus(3, 3);
        let lam = build_double(&g, &vec![1.0f64; g.n_edges()]).unwrap();
        let u = TripleGraph::build(&lam);
        assert!(u.complex.violations().is_empty());
        assert!(u.complex.is_closed());
        assert_eq!(u.complex.euler_characteristic(), 0);
    }

    #[test]
    fn disc_triple_graph_is_a_disc() {
        let g = grid_disc(4, 4);
        let lam = build_double(&g, &vec![1.0f64; g.n_edges()]).unwrap();
        let u = TripleGraph::build(&lam);
        assert!(u.complex.violations().is_empty());
        assert_eq!(u.complex.euler_characteristic(), 1);
    }
}
