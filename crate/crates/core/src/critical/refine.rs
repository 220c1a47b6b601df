use num_complex::Complex64;
use serde::Serialize;

use super::{EmbeddedMap, PlanarEmbedding};
use crate::error::{precondition, Result};
use crate::forms::Cochain;
use crate::mesh::from_quad_graph;
use crate::real::{from_c64, to_c64};
use crate::Real;

/// Splits every rhombus into four through its side midpoints and center,
/// giving `◇/2`. The new `Γ` consists of the old `Λ` vertices (keeping their
/// indices) followed by the quad centers; the new `Γ*` of the side
/// midpoints. Rhombus angles are preserved, so the ratio of a sub-rhombus is
/// the ratio of the `Λ` edge crossing its corner.
pub fn refine<T: Real>(em: &EmbeddedMap<T>) -> Result<EmbeddedMap<T>> {
    let lam = &em.map;
    let dia = lam.diamond();
    let (nl, m, ne) = (lam.n_vertices(), lam.m(), dia.n_edges());
    let center = |i: usize| nl + i;
    let mid = |e: usize| nl + m + e;
    let mut is_primal = vec![true; nl + m + ne];
    for v in is_primal.iter_mut().skip(nl + m) {
        *v = false;
    }
    let mut quads = Vec::with_capacity(4 * m);
    let mut rho = Vec::with_capacity(4 * m);
    let mut corners = Vec::with_capacity(4 * m);
    let mut positions = vec![Complex64::new(0.0, 0.0); nl + m + ne];
    for (v, p) in em.embedding.positions.iter().enumerate() {
        positions[v] = to_c64(*p);
    }
    let mut mid_done = vec![false; ne];
    for i in 0..m {
        let c = dia.corners[i];
        let s = dia.sides[i];
        let z = em.embedding.quad_corners(lam, i).map(to_c64);
        let zc = (z[0] + z[1] + z[2] + z[3]) * 0.25;
        positions[center(i)] = zc;
        let zm: [Complex64; 4] = std::array::from_fn(|k| (z[k] + z[(k + 1) % 4]) * 0.5);
        for k in 0..4 {
            if !mid_done[s[k]] {
                mid_done[s[k]] = true;
                positions[mid(s[k])] = zm[k];
            }
        }
        for k in 0..4 {
            let prev = (k + 3) % 4;
            quads.push([c[k], mid(s[k]), center(i), mid(s[prev])]);
            corners.push([z[k], zm[k], zc, zm[prev]].map(from_c64::<T>));
            rho.push(lam.edge_rho(if k % 2 == 0 { i } else { i + m }));
        }
    }
    let map = from_quad_graph(&is_primal, &quads, &rho)?;
    // Γ keeps ids in order (old Λ then centers); Γ* is the midpoints.
    let embedding = PlanarEmbedding::from_unwrapped(
        &map,
        positions.into_iter().map(from_c64).collect(),
        em.embedding.periods,
        &corners,
    )?;
    Ok(EmbeddedMap { map, embedding })
}

/// Errors of a discrete approximation across refinement levels.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ConvergenceReport {
    pub deltas: Vec<f64>,
    /// Sup error over the vertices of the coarsest level.
    pub errors: Vec<f64>,
    /// `errors[k+1] / errors[k]`.
    pub ratios: Vec<f64>,
}

impl ConvergenceReport {
    /// Every step reduces the error by at least the given factor, or the
    /// error is already below `floor` at both ends of the step.
    pub fn converges(&self, max_ratio: f64, floor: f64) -> bool {
        self.errors
            .windows(2)
            .all(|w| w[1] <= max_ratio * w[0] || (w[0] <= floor && w[1] <= floor))
    }
}

/// Refines `levels − 1` times, evaluating `discrete` at every level and
/// comparing with `target` at the vertices of the coarsest map, whose
/// indices survive refinement.
pub fn convergence_test<T: Real>(
    base: &EmbeddedMap<T>,
    levels: usize,
    delta: f64,
    mut discrete: impl FnMut(&EmbeddedMap<T>) -> Result<Cochain<T>>,
    target: impl Fn(Complex64) -> Complex64,
) -> Result<ConvergenceReport> {
    if levels < 2 {
        return precondition("convergence needs at least two levels");
    }
    let n = base.map.n_vertices();
    let mut cur = base.clone();
    let mut rep = ConvergenceReport { deltas: Vec::new(), errors: Vec::new(), ratios: Vec::new() };
    for level in 0..levels {
        if level > 0 {
            cur = refine(&cur)?;
        }
        let f = discrete(&cur)?;
        let err = (0..n)
            .map(|v| {
                let z = to_c64(cur.embedding.positions[v]);
                (to_c64::<T>(f.values[v]) - target(z)).norm()
            })
            .fold(0.0, f64::max);
        rep.deltas.push(delta / f64::from(1u32 << level));
        rep.errors.push(err);
    }
    rep.ratios = rep.errors.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(rep)
}
