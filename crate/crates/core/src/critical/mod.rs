//! Rhombic embeddings: criticality classification, development from the
//! ratios, lattice generators, Voronoi/Delaunay maps, refinement and Ising
//! couplings.

mod ising;
mod lattice;
mod refine;
mod voronoi;

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

pub use ising::{ising_criticality, ising_coupling, IsingReport};
pub use lattice::{period2, square, triangular, hexagonal, LatticeKind, LatticeSpec};
pub use refine::{convergence_test, refine, ConvergenceReport};
pub use voronoi::{voronoi_delaunay, VoronoiReport};

use crate::error::{invalid, precondition, Error, Result};
use crate::forms::Cochain;
use crate::mesh::{DoubleMap, Topology};
use crate::real::{from_c64, to_c64};
use crate::{Real, C};

/// Positions of the `Λ` vertices in the plane, or in a flat torus
/// `ℂ / (ℤ p₁ + ℤ p₂)` when `periods` is set. Edges crossing the fundamental
/// domain carry integer period shifts: `edge_shift[a]` lifts the head of `Λ`
/// edge `a` into the frame of its tail, and `corner_shift[i]` lifts `y_R` of
/// quad `i` into the frame of `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarEmbedding<T> {
    pub positions: Vec<C<T>>,
    pub periods: Option<[C<T>; 2]>,
    pub edge_shift: Vec<[i32; 2]>,
    pub corner_shift: Vec<[i32; 2]>,
}

/// A double together with a flat embedding.
#[derive(Clone, Debug)]
pub struct EmbeddedMap<T> {
    pub map: DoubleMap<T>,
    pub embedding: PlanarEmbedding<T>,
}

impl<T: Real> PlanarEmbedding<T> {
    /// Embedding of a planar map with no periodicity.
    pub fn planar(lam: &DoubleMap<T>, positions: Vec<C<T>>) -> Result<Self> {
        if positions.len() != lam.n_vertices() {
            return invalid(format!(
                "{} positions for {} vertices",
                positions.len(),
                lam.n_vertices()
            ));
        }
        Ok(PlanarEmbedding {
            positions,
            periods: None,
            edge_shift: vec![[0, 0]; lam.n_edges()],
            corner_shift: vec![[0, 0]; lam.m()],
        })
    }

    /// Derives the period shifts from the quad corners `[x, y_R, x', y_L]`
    /// given in the universal cover; `positions` may be any lifts.
    pub fn from_unwrapped(
        lam: &DoubleMap<T>,
        positions: Vec<C<T>>,
        periods: Option<[C<T>; 2]>,
        quad_corners: &[[C<T>; 4]],
    ) -> Result<Self> {
        let mut emb = PlanarEmbedding::planar(lam, positions)?;
        let Some(p) = periods else { return Ok(emb) };
        if lam.topology() != Topology::Torus {
            return precondition("periods are only meaningful on a torus");
        }
        let (p0, p1) = (to_c64(p[0]), to_c64(p[1]));
        let det = p0.re * p1.im - p0.im * p1.re;
        if det.abs() < 1e-14 {
            return invalid("periods are linearly dependent");
        }
        let coords = |z: Complex64| -> Result<[i32; 2]> {
            let a = (z.re * p1.im - z.im * p1.re) / det;
            let b = (p0.re * z.im - p0.im * z.re) / det;
            let (ra, rb) = (a.round(), b.round());
            if (a - ra).abs() > 1e-6 || (b - rb).abs() > 1e-6 {
                return Err(Error::InvalidInput("quad corners are not lifts of the positions".into()));
            }
            Ok([ra as i32, rb as i32])
        };
        let m = lam.m();
        let pos = |v: usize| to_c64(emb.positions[v]);
        for (i, c) in quad_corners.iter().enumerate() {
            let c: Vec<Complex64> = c.iter().map(|&z| to_c64(z)).collect();
            let [x, yr, xp, yl] = lam.diamond().corners[i];
            emb.edge_shift[i] = coords(c[2] - c[0] - (pos(xp) - pos(x)))?;
            emb.corner_shift[i] = coords(c[1] - c[0] - (pos(yr) - pos(x)))?;
            emb.edge_shift[i + m] = coords(c[3] - c[1] - (pos(yl) - pos(yr)))?;
        }
        emb.periods = periods;
        Ok(emb)
    }

    fn shift(&self, s: [i32; 2]) -> C<T> {
        match self.periods {
            Some([p, q]) => p * T::from(s[0]).unwrap() + q * T::from(s[1]).unwrap(),
            None => T::zero_c(),
        }
    }

    /// Vector from tail to head of a `Λ` edge.
    pub fn edge_vector(&self, lam: &DoubleMap<T>, a: usize) -> C<T> {
        let [t, h] = lam.edge_ends(a);
        self.positions[h] - self.positions[t] + self.shift(self.edge_shift[a])
    }

    /// `[x, y_R, x', y_L]` of quad `i`, lifted into the frame of `x`.
    pub fn quad_corners(&self, lam: &DoubleMap<T>, i: usize) -> [C<T>; 4] {
        let [x, yr, _, _] = lam.diamond().corners[i];
        let px = self.positions[x];
        let pyr = self.positions[yr] + self.shift(self.corner_shift[i]);
        [px, pyr, px + self.edge_vector(lam, i), pyr + self.edge_vector(lam, i + lam.m())]
    }

    /// `dZ` on `Λ`.
    pub fn dz(&self, lam: &DoubleMap<T>) -> Cochain<T> {
        Cochain::lambda(1, (0..lam.n_edges()).map(|a| self.edge_vector(lam, a)).collect())
    }

    /// The coordinate `Z` as a function on `Λ`. On a torus it is only
    /// defined up to periods.
    pub fn z(&self) -> Cochain<T> {
        Cochain::function(self.positions.clone())
    }

    /// Vector of every `◇` edge in its canonical `Γ → Γ*` orientation.
    pub fn diamond_vectors(&self, lam: &DoubleMap<T>) -> Vec<C<T>> {
        let dia = lam.diamond();
        let mut out = vec![T::zero_c(); dia.n_edges()];
        let mut seen = vec![false; dia.n_edges()];
        for i in 0..lam.m() {
            let c = self.quad_corners(lam, i);
            let v = [c[1] - c[0], c[1] - c[2], c[3] - c[2], c[3] - c[0]];
            for k in 0..4 {
                let e = dia.sides[i][k];
                if !seen[e] {
                    seen[e] = true;
                    out[e] = v[k];
                }
            }
        }
        out
    }

    pub fn cast<U: Real>(&self) -> PlanarEmbedding<U> {
        let cv = |z: &C<T>| from_c64::<U>(to_c64(*z));
        PlanarEmbedding {
            positions: self.positions.iter().map(cv).collect(),
            periods: self.periods.map(|[a, b]| [cv(&a), cv(&b)]),
            edge_shift: self.edge_shift.clone(),
            corner_shift: self.corner_shift.clone(),
        }
    }
}

impl<T: Real> EmbeddedMap<T> {
    /// Exchanges `Γ` and `Γ*`, relabelling the positions accordingly.
    pub fn swap(&self) -> Result<Self> {
        let map = self.map.swap()?;
        let (np, nd) = (self.map.n_primal_vertices(), self.map.n_dual_vertices());
        let mut positions = self.embedding.positions[np..np + nd].to_vec();
        positions.extend_from_slice(&self.embedding.positions[..np]);
        let corners: Vec<[C<T>; 4]> = (0..self.map.m())
            .map(|i| {
                let [x, yr, xp, yl] = self.embedding.quad_corners(&self.map, i);
                [yr, xp, yl, x]
            })
            .collect();
        let embedding = PlanarEmbedding::from_unwrapped(&map, positions, self.embedding.periods, &corners)?;
        Ok(EmbeddedMap { map, embedding })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Critical,
    SemiCritical,
    None,
}

/// Cone point of an embedded map: an inner `Λ` vertex whose corner angles
/// do not sum to `2π`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Cone {
    pub vertex: usize,
    pub angle: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// Common rhombus side length when critical.
    pub delta: Option<f64>,
    /// First quad violating the next stronger class, with the reason.
    pub witness: Option<(usize, String)>,
    pub max_orthogonality_defect: f64,
    pub max_ratio_defect: f64,
    /// `(max − min) / max` over all rhombus sides.
    pub side_spread: f64,
    pub cones: Vec<Cone>,
}

/// Semi-critical when every quad has orthogonal diagonals in the ratio `ρ`
/// and positive orientation; critical when in addition every side has the
/// same length. Tolerances are relative.
pub fn classify_map<T: Real>(lam: &DoubleMap<T>, emb: &PlanarEmbedding<T>, tol: f64) -> Classification {
    let m = lam.m();
    let mut witness: Option<(usize, String)> = None;
    let mut semi = true;
    let (mut orth, mut ratio) = (0.0f64, 0.0f64);
    let (mut smin, mut smax) = (f64::INFINITY, 0.0f64);
    let corners: Vec<[Complex64; 4]> =
        (0..m).map(|i| emb.quad_corners(lam, i).map(to_c64)).collect();
    for (i, c) in corners.iter().enumerate() {
        let d1 = c[2] - c[0];
        let d2 = c[3] - c[1];
        let scale = d1.norm() * d2.norm();
        let cross = (d1.conj() * d2).im;
        let o = (d1.conj() * d2).re.abs() / scale.max(f64::MIN_POSITIVE);
        let rho = lam.rho()[i].to_f64_();
        let r = (d2.norm() / d1.norm() - rho).abs() / rho;
        orth = orth.max(o);
        ratio = ratio.max(r);
        for k in 0..4 {
            let s = (c[(k + 1) % 4] - c[k]).norm();
            smin = smin.min(s);
            smax = smax.max(s);
        }
        let reason = if !(cross > tol * scale) {
            Some("degenerate or negatively oriented quad")
        } else if o > tol {
            Some("diagonals are not orthogonal")
        } else if r > tol {
            Some("diagonal ratio differs from ρ")
        } else {
            None
        };
        if let Some(reason) = reason {
            semi = false;
            witness.get_or_insert((i, reason.to_string()));
        }
    }
    // Shared diamond sides must agree between their two quads.
    let dia = lam.diamond();
    let mut side_vec: Vec<Option<Complex64>> = vec![None; dia.n_edges()];
    for (i, c) in corners.iter().enumerate() {
        let v = [c[1] - c[0], c[1] - c[2], c[3] - c[2], c[3] - c[0]];
        for k in 0..4 {
            let e = dia.sides[i][k];
            match side_vec[e] {
                None => side_vec[e] = Some(v[k]),
                Some(w) if (w - v[k]).norm() > tol * (1.0 + w.norm()) => {
                    semi = false;
                    witness.get_or_insert((i, "quads disagree on a shared side".into()));
                }
                _ => {}
            }
        }
    }
    let spread = if smax > 0.0 { (smax - smin) / smax } else { 0.0 };
    let critical = semi && spread <= tol;
    if semi && !critical {
        let i = corners
            .iter()
            .position(|c| (0..4).any(|k| ((c[(k + 1) % 4] - c[k]).norm() - smax).abs() > tol * smax))
            .unwrap_or(0);
        witness = Some((i, "rhombus sides of unequal length".into()));
    }
    let cones = cone_angles(lam, &corners)
        .into_iter()
        .filter(|(_, a)| (a - 2.0 * PI).abs() > 1e-9 * 2.0 * PI)
        .map(|(vertex, angle)| Cone { vertex, angle })
        .collect();
    Classification {
        verdict: if critical {
            Verdict::Critical
        } else if semi {
            Verdict::SemiCritical
        } else {
            Verdict::None
        },
        delta: critical.then_some(smax),
        witness: if critical { None } else { witness },
        max_orthogonality_defect: orth,
        max_ratio_defect: ratio,
        side_spread: spread,
        cones,
    }
}

/// Sum of the quad corner angles at every inner `Λ` vertex.
fn cone_angles<T: Real>(lam: &DoubleMap<T>, corners: &[[Complex64; 4]]) -> Vec<(usize, f64)> {
    let m = lam.m();
    let mut out = Vec::new();
    for v in 0..lam.n_vertices() {
        let Some(f) = lam.vertex_face(v) else { continue };
        let total: f64 = lam
            .face(f)
            .iter()
            .map(|d| {
                let k = corner_of_face_dart(d.edge < m, d.forward);
                let c = corners[d.edge % m];
                let a = (c[(k + 3) % 4] - c[k]) / (c[(k + 1) % 4] - c[k]);
                let t = a.arg();
                if t <= 0.0 {
                    t + 2.0 * PI
                } else {
                    t
                }
            })
            .sum();
        out.push((v, total));
    }
    out
}

/// Corner index of the face center within the quad of a face dart.
pub(crate) fn corner_of_face_dart(primal: bool, forward: bool) -> usize {
    match (primal, forward) {
        (true, true) => 3,
        (true, false) => 1,
        (false, true) => 0,
        (false, false) => 2,
    }
}

/// Rhombus angle at `x` of every quad, `φ = 2 arctan ρ`.
pub fn rhombus_angles<T: Real>(lam: &DoubleMap<T>) -> Vec<T> {
    lam.rho().iter().map(|&r| T::lit(2.0) * r.atan()).collect()
}

/// Lays out rhombi of side `delta` with angles `2 arctan ρ`, quad by quad.
/// Fails on the first quad whose sides disagree with an earlier placement,
/// which happens exactly when the ratios are not those of a flat rhombic
/// embedding. Needs a simply connected planar map.
pub fn develop<T: Real>(lam: &DoubleMap<T>, delta: T) -> Result<PlanarEmbedding<T>> {
    if lam.topology() != Topology::Planar || lam.diamond().complex.euler_characteristic() != 1 {
        return precondition("development needs a simply connected planar map");
    }
    let dia = lam.diamond();
    let m = lam.m();
    let tol = 1e-9;
    let mut side: Vec<Option<Complex64>> = vec![None; dia.n_edges()];
    let mut done = vec![false; m];
    let mut queue = VecDeque::new();
    side[dia.sides[0][0]] = Some(Complex64::new(1.0, 0.0));
    queue.push_back(0usize);
    done[0] = true;
    let d = delta.to_f64_();
    while let Some(i) = queue.pop_front() {
        let phi = 2.0 * lam.rho()[i].to_f64_().atan();
        let rot = Complex64::from_polar(1.0, phi);
        let s = dia.sides[i];
        let (k, w) = (0..4).find_map(|k| side[s[k]].map(|w| (k, w))).expect("seeded from a neighbour");
        let v0 = match k {
            0 => w,
            1 => -w / rot,
            2 => -w,
            _ => w / rot,
        };
        let v = [v0, -v0 * rot, -v0, v0 * rot];
        for k in 0..4 {
            match side[s[k]] {
                Some(old) if (old - v[k]).norm() > tol => {
                    return Err(Error::Precondition(format!(
                        "ratios are not flat: quad {i} cannot be placed consistently"
                    )))
                }
                Some(_) => {}
                None => side[s[k]] = Some(v[k]),
            }
            for q in dia.edge_quads[s[k]].into_iter().flatten() {
                if !done[q] {
                    done[q] = true;
                    queue.push_back(q);
                }
            }
        }
    }
    let mut pos: Vec<Option<Complex64>> = vec![None; lam.n_vertices()];
    let adj = {
        let mut a = vec![Vec::new(); lam.n_vertices()];
        for (e, &[x, y]) in dia.complex.edges.iter().enumerate() {
            a[x].push((y, e, 1.0));
            a[y].push((x, e, -1.0));
        }
        a
    };
    for start in 0..lam.n_vertices() {
        if pos[start].is_some() {
            continue;
        }
        pos[start] = Some(Complex64::new(0.0, 0.0));
        let mut q = VecDeque::from([start]);
        while let Some(v) = q.pop_front() {
            let p = pos[v].unwrap();
            for &(w, e, sgn) in &adj[v] {
                let target = p + side[e].unwrap_or_default() * (sgn * d);
                match pos[w] {
                    None => {
                        pos[w] = Some(target);
                        q.push_back(w);
                    }
                    Some(old) if (old - target).norm() > tol * d.max(1.0) => {
                        return Err(Error::Precondition(format!(
                            "ratios are not flat: vertex {w} closes with a gap"
                        )))
                    }
                    _ => {}
                }
            }
        }
    }
    PlanarEmbedding::planar(lam, pos.into_iter().map(|p| from_c64(p.unwrap())).collect())
}
