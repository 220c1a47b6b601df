use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{holonomy, residue};
use crate::error::{invalid, precondition, Result};
use crate::forms::{self, hetero_wedge, mul, Carrier, Cochain};
use crate::harmonic::WeightedGraph;
use crate::linalg::{self, CMat, CVec};
use crate::mesh::{DoubleMap, UnionFind};
use crate::real::{from_c64, to_c64};
use crate::Real;

/// The discrete analogue of `dz/(z − z₀)` at a `◇` edge `(x, y)`.
#[derive(Clone, Debug)]
pub struct CauchyKernel<T> {
    pub region: Vec<usize>,
    /// The `◇` edge `(x, y)`, `x ∈ Γ`, `y ∈ Γ*`.
    pub edge: usize,
    pub x: usize,
    pub y: usize,
    /// The two quads along `(x, y)`.
    pub rectangle: [usize; 2],
    /// `μ = α_x + α_y` on the `Λ` edges of the region, zero elsewhere.
    pub mu: Cochain<T>,
    /// `ν` on the `◇` edges of the region minus the rectangle's inner edge.
    pub nu: Cochain<T>,
    /// `∮_{∂D} ν`.
    pub boundary_holonomy: Complex64,
    /// `max |Aν − μ|` and `max |d_◇ν|` over the quads outside the rectangle.
    pub average_residual: f64,
    pub closed_residual: f64,
}

/// Vertices of the region and the subset lying inside it (every quad
/// around them belongs to the region).
fn region_vertices<T: Real>(lam: &DoubleMap<T>, inside: &[bool]) -> (Vec<bool>, Vec<bool>) {
    let mut touched = vec![false; lam.n_vertices()];
    for (q, _) in inside.iter().enumerate().filter(|(_, &b)| b) {
        for v in lam.diamond().corners[q] {
            touched[v] = true;
        }
    }
    let interior = (0..lam.n_vertices())
        .map(|v| {
            touched[v]
                && lam.vertex_face(v).is_some_and(|f| lam.face(f).iter().all(|d| inside[d.edge % lam.m()]))
        })
        .collect();
    (touched, interior)
}

/// Checks that the quads form a connected region of Euler characteristic 1.
fn check_disc<T: Real>(lam: &DoubleMap<T>, region: &[usize], inside: &[bool], touched: &[bool]) -> Result<()> {
    let dia = lam.diamond();
    let mut uf = UnionFind::new(lam.m());
    let mut n_edges = 0i64;
    for &[l, r] in &dia.edge_quads {
        let il = l.is_some_and(|q| inside[q]);
        let ir = r.is_some_and(|q| inside[q]);
        if il || ir {
            n_edges += 1;
        }
        if il && ir {
            uf.union(l.unwrap(), r.unwrap());
        }
    }
    let n_vertices = touched.iter().filter(|&&b| b).count() as i64;
    let chi = n_vertices - n_edges + region.len() as i64;
    let root = uf.find(region[0]);
    if chi != 1 || region.iter().any(|&q| uf.find(q) != root) {
        return precondition("the region is not a disc");
    }
    Ok(())
}

/// `α_x = (Id + i*) dG_x` normalized to residue `+1`, with `G_x` the
/// Green function of the region vanishing on its boundary.
fn pole_form<T: Real>(lam: &DoubleMap<T>, inside: &[bool], interior: &[bool], x: usize) -> Result<Cochain<T>> {
    let m = lam.m();
    let graph = WeightedGraph {
        n: lam.n_vertices(),
        edges: (0..lam.n_edges())
            .filter(|&a| inside[a % m])
            .map(|a| {
                let [t, h] = lam.edge_ends(a);
                (t, h, lam.edge_rho(a).to_f64_())
            })
            .collect(),
    };
    let fixed: Vec<(usize, Complex64)> =
        (0..lam.n_vertices()).filter(|&v| !interior[v]).map(|v| (v, Complex64::new(0.0, 0.0))).collect();
    let mut src = vec![Complex64::new(0.0, 0.0); lam.n_vertices()];
    src[x] = Complex64::new(1.0, 0.0);
    let (g, _) = graph.dirichlet(&fixed, Some(&src), None)?;
    let g = Cochain::function(g.into_iter().map(from_c64).collect());
    let dg = forms::d(lam, &g)?;
    let mut a = &dg + &forms::star(lam, &dg)?.scale(T::i_c());
    for (k, v) in a.values.iter_mut().enumerate() {
        if !inside[k % m] {
            *v = T::zero_c();
        }
    }
    let r = residue(lam, &a, x)?;
    Ok(a.scale(from_c64(Complex64::new(1.0, 0.0) / r)))
}

/// Builds `ν_{x,y}` on a disc-like region of quads. Away from the rectangle
/// `R` it solves `Aν = μ` and `d_◇ν = 0`; of the solutions, which differ by
/// a constant on all `◇` edges, the one of least norm is returned.
pub fn cauchy_kernel<T: Real>(lam: &DoubleMap<T>, region: &[usize], edge: usize) -> Result<CauchyKernel<T>> {
    let m = lam.m();
    let dia = lam.diamond();
    if region.is_empty() {
        return invalid("the region is empty");
    }
    let mut inside = vec![false; m];
    for &q in region {
        if q >= m {
            return invalid(format!("quad {q} does not exist"));
        }
        inside[q] = true;
    }
    if edge >= dia.n_edges() {
        return invalid(format!("◇ edge {edge} does not exist"));
    }
    let (touched, interior) = region_vertices(lam, &inside);
    check_disc(lam, region, &inside, &touched)?;
    let [x, y] = dia.complex.edges[edge];
    let rectangle = match dia.edge_quads[edge] {
        [Some(a), Some(b)] if inside[a] && inside[b] => [a, b],
        _ => return precondition("the edge (x, y) is not inside the region"),
    };
    if !interior[x] || !interior[y] {
        return precondition("x and y must be interior vertices of the region");
    }
    let mu = &pole_form(lam, &inside, &interior, x)? + &pole_form(lam, &inside, &interior, y)?;

    // Unknowns: ◇ edges of quads outside R, except the inner edge of R.
    let mut index = vec![usize::MAX; dia.n_edges()];
    let mut unknowns = Vec::new();
    let outer: Vec<usize> = region.iter().copied().filter(|q| !rectangle.contains(q)).collect();
    for &q in &outer {
        for s in dia.sides[q] {
            if index[s] == usize::MAX && s != edge {
                index[s] = unknowns.len();
                unknowns.push(s);
            }
        }
    }
    let one = Complex64::new(1.0, 0.0);
    let mut a = CMat::zeros(3 * outer.len(), unknowns.len());
    let mut b = CVec::zeros(3 * outer.len());
    for (r, &q) in outer.iter().enumerate() {
        let ce = [1.0, -1.0, -1.0, 1.0];
        let cs = [-1.0, -1.0, 1.0, 1.0];
        let cd = [1.0, -1.0, 1.0, -1.0];
        for k in 0..4 {
            let col = index[dia.sides[q][k]];
            a[(3 * r, col)] += one * (0.5 * ce[k]);
            a[(3 * r + 1, col)] += one * (0.5 * cs[k]);
            a[(3 * r + 2, col)] += one * cd[k];
        }
        b[3 * r] = to_c64(mu.values[q]);
        b[3 * r + 1] = to_c64(mu.values[q + m]);
    }
    let gram = a.adjoint() * &a;
    let sol = linalg::hermitian_solve(&gram, &(a.adjoint() * &b), 1e-12);
    let res = &a * &sol - &b;
    let average_residual = (0..outer.len())
        .flat_map(|r| [res[3 * r].norm(), res[3 * r + 1].norm()])
        .fold(0.0, f64::max);
    let closed_residual = (0..outer.len()).map(|r| res[3 * r + 2].norm()).fold(0.0, f64::max);
    let mut nu = Cochain::zeros(lam, 1, Carrier::Diamond);
    for (k, &s) in unknowns.iter().enumerate() {
        nu.values[s] = from_c64(sol[k]);
    }
    let boundary_holonomy = holonomy(&nu, &dia.region_boundary(region));
    Ok(CauchyKernel {
        region: region.to_vec(),
        edge,
        x,
        y,
        rectangle,
        mu,
        nu,
        boundary_holonomy,
        average_residual,
        closed_residual,
    })
}

/// Terms of the Cauchy integral formula
/// `∮_{∂D} f·ν = ∬_D d″f ∧ μ + 2iπ (f(x) + f(y))/2`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CauchyIntegral {
    pub contour: Complex64,
    pub area: Complex64,
    pub edge_average: Complex64,
    /// `contour − area − 2iπ · edge_average`.
    pub residual: Complex64,
}

impl CauchyIntegral {
    /// `(1/2iπ) ∮ f·ν`, equal to the edge average for holomorphic `f`.
    pub fn reproduced_average(&self) -> Complex64 {
        self.contour / Complex64::new(0.0, 2.0 * PI)
    }
}

/// Evaluates the Cauchy integral formula for `f`. The area term pairs
/// `d″f` and `μ` through the wedge on `◇` lifted by `A`, which is half the
/// `Λ` pairing `α(e)β(e*) − α(e*)β(e)`.
pub fn cauchy_integral<T: Real>(lam: &DoubleMap<T>, k: &CauchyKernel<T>, f: &Cochain<T>) -> Result<CauchyIntegral> {
    f.check(lam)?;
    let fnu = mul(lam, f, &k.nu)?;
    let contour = holonomy(&fnu, &lam.diamond().region_boundary(&k.region));
    let w = hetero_wedge(lam, &forms::d_double_prime(lam, f)?, &k.mu)?;
    let area: Complex64 = k.region.iter().map(|&q| to_c64(w.values[q])).sum::<Complex64>() * 0.5;
    let edge_average = (to_c64(f.values[k.x]) + to_c64(f.values[k.y])) * 0.5;
    let residual = contour - area - Complex64::new(0.0, 2.0 * PI) * edge_average;
    Ok(CauchyIntegral { contour, area, edge_average, residual })
}
