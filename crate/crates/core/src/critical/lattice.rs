use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EmbeddedMap, PlanarEmbedding};
use crate::error::{invalid, Result};
use crate::mesh::{build_double, from_quad_graph, grid, Grid, GridEdge};
use crate::real::from_c64;
use crate::Real;

/// Critical lattice families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "lattice", rename_all = "kebab-case")]
pub enum LatticeKind {
    /// Rectangular `Γ` with rhombus angle `α` on horizontal edges.
    Square { alpha: f64 },
    /// Triangular `Γ` built from a triangle with angles `α`, `β`, `π−α−β`.
    Triangular { alpha: f64, beta: f64 },
    /// The dual of [`LatticeKind::Triangular`].
    Hexagonal { alpha: f64, beta: f64 },
    /// Square diamond of period two along both train track families; the
    /// four ratios around a vertex must satisfy `Σ arctan ρ = π`.
    Period2 { rho: [f64; 4] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    #[serde(flatten)]
    pub kind: LatticeKind,
    pub nx: usize,
    pub ny: usize,
    pub torus: bool,
    pub delta: f64,
}

impl LatticeSpec {
    pub fn build<T: Real>(&self) -> Result<EmbeddedMap<T>> {
        let (nx, ny, torus, d) = (self.nx, self.ny, self.torus, self.delta);
        match self.kind {
            LatticeKind::Square { alpha } => square(alpha, nx, ny, torus, d),
            LatticeKind::Triangular { alpha, beta } => triangular(alpha, beta, nx, ny, torus, d),
            LatticeKind::Hexagonal { alpha, beta } => hexagonal(alpha, beta, nx, ny, torus, d),
            LatticeKind::Period2 { rho } => period2(rho, nx, torus, d),
        }
    }
}

fn check_size(nx: usize, ny: usize, torus: bool) -> Result<()> {
    let min = if torus { 3 } else { 2 };
    if nx < min || ny < min {
        return invalid(format!("grid needs at least {min}×{min} vertices"));
    }
    Ok(())
}

/// Places a grid lattice: `pos(i, j)` for `Γ` vertices, and per edge class
/// its vector and ratio; the rhombi follow from `D₂ = iρ D₁`.
fn embed_grid<T: Real>(
    g: Grid,
    pos: impl Fn(usize, usize) -> Complex64,
    class: impl Fn(GridEdge) -> (Complex64, f64),
    periods: Option<[Complex64; 2]>,
) -> Result<EmbeddedMap<T>> {
    let rho: Vec<T> = g.edge_kind.iter().map(|&(k, _, _)| T::lit(class(k).1)).collect();
    let map = build_double(&g.complex, &rho)?;
    let np = map.n_primal_vertices();
    let mut positions = vec![Complex64::new(0.0, 0.0); map.n_vertices()];
    let mut placed = vec![false; map.n_vertices()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            positions[g.vertex(i, j)] = pos(i, j);
            placed[g.vertex(i, j)] = true;
        }
    }
    let mut corners = Vec::with_capacity(map.m());
    for (e, &(k, i, j)) in g.edge_kind.iter().enumerate() {
        let (d1, r) = class(k);
        let x = match k {
            GridEdge::E3 => pos(i + 1, j),
            _ => pos(i, j),
        };
        let c = x + d1 * 0.5;
        let d2 = Complex64::new(0.0, r) * d1;
        let q = [x, c - d2 * 0.5, x + d1, c + d2 * 0.5];
        let [_, yr, _, yl] = map.diamond().corners[e];
        for (v, z) in [(yr, q[1]), (yl, q[3])] {
            if !placed[v] {
                placed[v] = true;
                positions[v] = z;
            }
        }
        corners.push(q.map(from_c64::<T>));
    }
    debug_assert!(placed[..np].iter().all(|&p| p));
    let embedding = PlanarEmbedding::from_unwrapped(
        &map,
        positions.into_iter().map(from_c64).collect(),
        periods.map(|p| p.map(from_c64)),
        &corners,
    )?;
    Ok(EmbeddedMap { map, embedding })
}

/// Rectangular lattice: horizontal edges `A = δ(1 + e^{iα})`, vertical
/// edges `B = δ(e^{iα} − 1)`, with `ρ = tan(α/2)` and `cot(α/2)`.
pub fn square<T: Real>(alpha: f64, nx: usize, ny: usize, torus: bool, delta: f64) -> Result<EmbeddedMap<T>> {
    check_size(nx, ny, torus)?;
    if !(alpha > 0.0 && alpha < PI) || !(delta > 0.0) {
        return invalid("square lattice needs 0 < α < π and δ > 0");
    }
    let eia = Complex64::from_polar(1.0, alpha);
    let a = (eia + 1.0) * delta;
    let b = (eia - 1.0) * delta;
    let t = (alpha / 2.0).tan();
    embed_grid(
        grid(nx, ny, torus, false),
        |i, j| a * i as f64 + b * j as f64,
        |k| match k {
            GridEdge::E1 => (a, t),
            _ => (b, 1.0 / t),
        },
        torus.then_some([a * nx as f64, b * ny as f64]),
    )
}

/// Triangular lattice of acute triangles with circumradius `δ`, angles `α`
/// opposite the horizontal side and `β` opposite the second generator.
pub fn triangular<T: Real>(
    alpha: f64,
    beta: f64,
    nx: usize,
    ny: usize,
    torus: bool,
    delta: f64,
) -> Result<EmbeddedMap<T>> {
    check_size(nx, ny, torus)?;
    let gamma = PI - alpha - beta;
    if [alpha, beta, gamma].iter().any(|&t| !(t > 0.0 && t < PI / 2.0)) || !(delta > 0.0) {
        return invalid("triangular lattice needs an acute triangle and δ > 0");
    }
    let p = Complex64::new(2.0 * delta * alpha.sin(), 0.0);
    let q = Complex64::from_polar(2.0 * delta * beta.sin(), gamma);
    let cot = |t: f64| 1.0 / t.tan();
    embed_grid(
        grid(nx, ny, torus, true),
        |i, j| p * i as f64 + q * j as f64,
        |k| match k {
            GridEdge::E1 => (p, cot(alpha)),
            GridEdge::E2 => (q, cot(beta)),
            GridEdge::E3 => (q - p, cot(gamma)),
        },
        torus.then_some([p * nx as f64, q * ny as f64]),
    )
}

/// Hexagonal lattice, dual to [`triangular`].
pub fn hexagonal<T: Real>(
    alpha: f64,
    beta: f64,
    nx: usize,
    ny: usize,
    torus: bool,
    delta: f64,
) -> Result<EmbeddedMap<T>> {
    triangular(alpha, beta, nx, ny, torus, delta)?.swap()
}

/// Square diamond `δ(ℤ ⊕ ℤ)` sheared by two alternating train-track
/// directions per family. `n × n` diamond cells; `Γ` sits on even sites.
pub fn period2<T: Real>(rho: [f64; 4], n: usize, torus: bool, delta: f64) -> Result<EmbeddedMap<T>> {
    if rho.iter().any(|&r| !(r > 0.0)) || !(delta > 0.0) {
        return invalid("ratios and δ must be positive");
    }
    let phi = rho.map(|r| 2.0 * r.atan());
    let total: f64 = phi.iter().sum();
    if (total - 2.0 * PI).abs() > 1e-9 {
        return invalid(format!("Σ arctan ρ must be π, got {:.12}", total / 2.0));
    }
    if n < 2 || (torus && (n < 4 || n % 2 == 1)) {
        return invalid("period-2 lattice needs n ≥ 2, and an even n ≥ 4 on a torus");
    }
    let u = [0.0, phi[0] + phi[1] - PI];
    let v = [phi[0], phi[0] + phi[1] + phi[2] - PI];
    let eu = u.map(|t| Complex64::from_polar(delta, t));
    let ev = v.map(|t| Complex64::from_polar(delta, t));
    let at = |a: i64, b: i64| -> Complex64 {
        let sum = |k: i64, e: [Complex64; 2]| {
            let full = k.div_euclid(2);
            let rest = k.rem_euclid(2);
            (e[0] + e[1]) * full as f64 + if rest == 1 { e[0] } else { Complex64::new(0.0, 0.0) }
        };
        sum(a, eu) + sum(b, ev)
    };
    let side = if torus { n } else { n + 1 };
    let id = |a: usize, b: usize| (a % side) + side * (b % side);
    let is_primal: Vec<bool> = (0..side * side).map(|v| (v % side + v / side) % 2 == 0).collect();
    let mut quads = Vec::new();
    let mut corners = Vec::new();
    let mut ratios = Vec::new();
    for b in 0..n {
        for a in 0..n {
            let (ai, bi) = (a as i64, b as i64);
            let ids = [id(a, b), id(a + 1, b), id(a + 1, b + 1), id(a, b + 1)];
            let zs = [at(ai, bi), at(ai + 1, bi), at(ai + 1, bi + 1), at(ai, bi + 1)];
            let r = if (a + b) % 2 == 0 { 0 } else { 1 };
            let q: [usize; 4] = std::array::from_fn(|k| ids[(k + r) % 4]);
            let z: [Complex64; 4] = std::array::from_fn(|k| zs[(k + r) % 4]);
            ratios.push(T::lit((z[3] - z[1]).norm() / (z[2] - z[0]).norm()));
            quads.push(q);
            corners.push(z);
        }
    }
    let map = from_quad_graph(&is_primal, &quads, &ratios)?;
    // Γ vertices keep their relative order, as do Γ* vertices.
    let mut positions = vec![Complex64::new(0.0, 0.0); map.n_vertices()];
    let np = map.n_primal_vertices();
    let (mut kp, mut kd) = (0, 0);
    for v in 0..side * side {
        let z = at((v % side) as i64, (v / side) as i64);
        if is_primal[v] {
            positions[kp] = z;
            kp += 1;
        } else {
            positions[np + kd] = z;
            kd += 1;
        }
    }
    let half = (n / 2) as f64;
    let periods = torus.then_some([(eu[0] + eu[1]) * half, (ev[0] + ev[1]) * half]);
    let corners: Vec<_> = corners.into_iter().map(|c| c.map(from_c64::<T>)).collect();
    let embedding = PlanarEmbedding::from_unwrapped(
        &map,
        positions.into_iter().map(from_c64).collect(),
        periods.map(|p| p.map(from_c64)),
        &corners,
    )?;
    Ok(EmbeddedMap { map, embedding })
}
