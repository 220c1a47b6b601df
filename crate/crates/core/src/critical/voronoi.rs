use num_complex::Complex64;
use serde::Serialize;
use spade::{DelaunayTriangulation, Point2, Triangulation};

use super::{EmbeddedMap, PlanarEmbedding};
use crate::error::{invalid, Error, Result};
use crate::mesh::{build_dual, from_polygons, DoubleMap};
use crate::real::{from_c64, to_c64};
use crate::{Real, C};

/// Smallest ratio assigned to a Delaunay edge whose dual Voronoi edge has
/// (numerically) zero length.
pub const RHO_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VoronoiReport {
    pub n_points: usize,
    pub n_triangles: usize,
    /// Edges with cocircular neighbouring triangles, given ratio [`RHO_FLOOR`].
    pub cocircular_edges: usize,
}

fn circumcenter(a: Complex64, b: Complex64, c: Complex64) -> Complex64 {
    let (b, c) = (b - a, c - a);
    let d = 2.0 * (b.re * c.im - b.im * c.re);
    let (nb, nc) = (b.norm_sqr(), c.norm_sqr());
    a + Complex64::new((c.im * nb - b.im * nc) / d, (b.re * nc - c.re * nb) / d)
}

/// Delaunay triangulation `Γ` of the points with its Voronoi dual `Γ*` and
/// `ρ = ℓ(e*)/ℓ(e)`. Points are inserted in lexicographic order, which makes
/// the choice of diagonal in cocircular configurations deterministic. Hull
/// edges receive a dangling dual vertex on their outer bisector.
pub fn voronoi_delaunay<T: Real>(points: &[C<T>]) -> Result<(EmbeddedMap<T>, VoronoiReport)> {
    let pts: Vec<Complex64> = points.iter().map(|&z| to_c64(z)).collect();
    if pts.len() < 3 || pts.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return invalid("need at least three finite points");
    }
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&i, &j| pts[i].re.total_cmp(&pts[j].re).then(pts[i].im.total_cmp(&pts[j].im)));
    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    let mut original = Vec::with_capacity(pts.len());
    for &i in &order {
        let h = tri
            .insert(Point2::new(pts[i].re, pts[i].im))
            .map_err(|e| Error::InvalidInput(format!("point {i}: {e:?}")))?;
        if h.index() != original.len() {
            return invalid(format!("point {i} duplicates an earlier point"));
        }
        original.push(i);
    }
    let triangles: Vec<Vec<usize>> = tri
        .inner_faces()
        .map(|f| f.vertices().iter().map(|v| original[v.fix().index()]).collect())
        .collect();
    if triangles.is_empty() {
        return invalid("points are collinear");
    }
    let gamma = from_polygons(pts.len(), &triangles);
    let dd = build_dual(&gamma)?;
    let sides = gamma.edge_sides();
    let centers: Vec<Complex64> =
        triangles.iter().map(|t| circumcenter(pts[t[0]], pts[t[1]], pts[t[2]])).collect();
    let mut dual_pos = vec![Complex64::new(0.0, 0.0); dd.dual.n_vertices];
    dual_pos[..centers.len()].copy_from_slice(&centers);
    let mut rho = Vec::with_capacity(gamma.n_edges());
    let mut lengths = Vec::with_capacity(gamma.n_edges());
    let mut cocircular = 0;
    for (e, &[t, h]) in gamma.edges.iter().enumerate() {
        let (p, q) = (pts[t], pts[h]);
        let len = (q - p).norm();
        let normal = Complex64::new(0.0, 1.0) * (q - p) / len;
        let mid = (p + q) * 0.5;
        if let Some(b) = dd.boundary_dual_vertex[e] {
            // The hull lies on one side; push the dangling vertex outwards.
            let (inner, out_dir) = match (sides[e].left, sides[e].right) {
                (Some(f), None) => (centers[f], -normal),
                (None, Some(f)) => (centers[f], normal),
                _ => unreachable!("hull edge has one triangle"),
            };
            let beyond = ((inner - mid).re * out_dir.re + (inner - mid).im * out_dir.im).max(0.0);
            dual_pos[b] = mid + out_dir * (beyond + 0.5 * len);
        }
        let [yr, yl] = dd.dual.edges[e];
        let d2 = dual_pos[yl] - dual_pos[yr];
        let signed = d2.re * normal.re + d2.im * normal.im;
        let r = signed / len;
        if r <= RHO_FLOOR {
            cocircular += 1;
            rho.push(T::lit(RHO_FLOOR));
        } else {
            rho.push(T::lit(r));
        }
        lengths.push([T::lit(len), T::lit(signed.max(0.0))]);
    }
    let map = DoubleMap::from_parts(gamma, dd.dual, dd.face_vertex, dd.dual_face_vertex, rho, Some(lengths))?;
    let mut positions: Vec<C<T>> = pts.iter().map(|&z| from_c64(z)).collect();
    positions.extend(dual_pos.iter().map(|&z| from_c64::<T>(z)));
    let embedding = PlanarEmbedding::planar(&map, positions)?;
    let report = VoronoiReport { n_points: pts.len(), n_triangles: triangles.len(), cocircular_edges: cocircular };
    Ok((EmbeddedMap { map, embedding }, report))
}
