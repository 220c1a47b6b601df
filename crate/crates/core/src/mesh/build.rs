use std::collections::HashMap;

use super::{CellComplex, Dart};

/// Direction class of an edge in one of the regular grids below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum GridEdge {
    /// `(i, j) → (i+1, j)`
    E1,
    /// `(i, j) → (i, j+1)`
    E2,
    /// `(i+1, j) → (i, j+1)`, triangular grids only.
    E3,
}

/// A regular grid together with the lattice coordinates of its cells.
pub(crate) struct Grid {
    pub complex: CellComplex,
    pub nx: usize,
    pub ny: usize,
    pub edge_kind: Vec<(GridEdge, usize, usize)>,
}

impl Grid {
    pub fn vertex(&self, i: usize, j: usize) -> usize {
        (i % self.nx) + self.nx * (j % self.ny)
    }
}

/// Square (`triangular = false`) or triangular grid with `nx × ny`
/// vertices, either a planar patch or wrapped into a torus.
pub(crate) fn grid(nx: usize, ny: usize, torus: bool, triangular: bool) -> Grid {
    let (cx, cy) = if torus { (nx, ny) } else { (nx - 1, ny - 1) };
    let id = |i: usize, j: usize| (i % nx) + nx * (j % ny);
    let mut edges = Vec::new();
    let mut edge_kind = Vec::new();
    let mut index = HashMap::new();
    let mut add = |k: GridEdge, i: usize, j: usize, t: usize, h: usize| {
        index.insert((k, i, j), edges.len());
        edges.push([t, h]);
        edge_kind.push((k, i, j));
    };
    for j in 0..ny {
        for i in 0..nx {
            if i < cx {
                add(GridEdge::E1, i, j, id(i, j), id(i + 1, j));
            }
            if j < cy {
                add(GridEdge::E2, i, j, id(i, j), id(i, j + 1));
            }
            if triangular && i < cx && j < cy {
                add(GridEdge::E3, i, j, id(i + 1, j), id(i, j + 1));
            }
        }
    }
    let e = |k: GridEdge, i: usize, j: usize| index[&(k, i % nx, j % ny)];
    let mut faces = Vec::new();
    for j in 0..cy {
        for i in 0..cx {
            if triangular {
                faces.push(vec![
                    Dart::fwd(e(GridEdge::E1, i, j)),
                    Dart::fwd(e(GridEdge::E3, i, j)),
                    Dart::rev(e(GridEdge::E2, i, j)),
                ]);
                faces.push(vec![
                    Dart::fwd(e(GridEdge::E2, i + 1, j)),
                    Dart::rev(e(GridEdge::E1, i, j + 1)),
                    Dart::rev(e(GridEdge::E3, i, j)),
                ]);
            } else {
                faces.push(vec![
                    Dart::fwd(e(GridEdge::E1, i, j)),
                    Dart::fwd(e(GridEdge::E2, i + 1, j)),
                    Dart::rev(e(GridEdge::E1, i, j + 1)),
                    Dart::rev(e(GridEdge::E2, i, j)),
                ]);
            }
        }
    }
    Grid { complex: CellComplex::new(nx * ny, edges, faces), nx, ny, edge_kind }
}

/// Square grid on a torus with `nx × ny` vertices.
pub fn square_torus(nx: usize, ny: usize) -> CellComplex {
    grid(nx, ny, true, false).complex
}

/// Square grid patch with `nx × ny` vertices.
pub fn grid_disc(nx: usize, ny: usize) -> CellComplex {
    grid(nx, ny, false, false).complex
}

/// Triangulated grid with `nx × ny` vertices.
pub fn triangular_grid(nx: usize, ny: usize, torus: bool) -> CellComplex {
    grid(nx, ny, torus, true).complex
}

/// Builds a complex from vertex cycles; edges are created in order of first
/// appearance, oriented along their first traversal.
pub fn from_polygons(n_vertices: usize, polygons: &[Vec<usize>]) -> CellComplex {
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::new();
    let faces = polygons
        .iter()
        .map(|p| {
            (0..p.len())
                .map(|k| {
                    let (a, b) = (p[k], p[(k + 1) % p.len()]);
                    if let Some(&e) = index.get(&(b, a)) {
                        Dart::rev(e)
                    } else {
                        let e = *index.entry((a, b)).or_insert_with(|| {
                            edges.push([a, b]);
                            edges.len() - 1
                        });
                        Dart::fwd(e)
                    }
                })
                .collect()
        })
        .collect();
    CellComplex::new(n_vertices, edges, faces)
}

/// Surface of the unit cube, outward oriented; vertex `x + 2y + 4z`.
pub fn cube() -> CellComplex {
    from_polygons(
        8,
        &[
            vec![0, 2, 3, 1],
            vec![4, 5, 7, 6],
            vec![0, 1, 5, 4],
            vec![2, 6, 7, 3],
            vec![0, 4, 6, 2],
            vec![1, 3, 7, 5],
        ],
    )
}

/// Path `0 → 1 → … → n−1` without faces.
pub fn path_graph(n: usize) -> CellComplex {
    CellComplex::new(n, (1..n).map(|i| [i - 1, i]).collect(), Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_are_valid() {
        for (nx, ny, torus, tri) in [(3, 4, true, false), (4, 3, false, false), (3, 3, true, true), (4, 5, false, true)]
        {
            let g = grid(nx, ny, torus, tri).complex;
            assert!(g.violations().is_empty(), "{nx}×{ny} torus={torus} tri={tri}");
            assert_eq!(g.euler_characteristic(), if torus { 0 } else { 1 });
        }
    }

    #[test]
    fn cube_is_a_sphere() {
        let c = cube();
        assert!(c.violations().is_empty());
        assert!(c.is_closed());
        assert_eq!((c.n_edges(), c.euler_characteristic()), (12, 2));
    }
}
