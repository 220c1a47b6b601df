//! Harmonic analysis on the double: Dirichlet and Neumann problems, Hodge
//! decomposition, harmonic and holomorphic form bases, Weyl's lemma and
//! Green's identity on the diamond.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, precondition, Error, Result};
use crate::forms::{
    self, average, coboundary_matrix, mul, star, weights, AverageInverse, Carrier, Cochain,
};
use crate::linalg::{self, CMat, CVec, NullSpaceReport, SolveReport, SymSparse};
use crate::mesh::{DoubleMap, Topology};
use crate::real::{from_c64, to_c64};
use crate::{Real, C};

/// A graph with positive edge weights, for Laplace problems that do not
/// need a surface.
#[derive(Clone, Debug, Default)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// The `Λ` graph (both halves) with weights `ρ`.
    pub fn lambda<T: Real>(lam: &DoubleMap<T>) -> Self {
        WeightedGraph {
            n: lam.n_vertices(),
            edges: (0..lam.n_edges())
                .map(|a| {
                    let [t, h] = lam.edge_ends(a);
                    (t, h, lam.edge_rho(a).to_f64_())
                })
                .collect(),
        }
    }

    /// `(Δf)(x) = Σ_y w(x, y) (f(x) − f(y))`.
    pub fn laplacian(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for &(a, b, w) in &self.edges {
            let d = (f[a] - f[b]) * w;
            out[a] += d;
            out[b] -= d;
        }
        out
    }

    /// Solves `Δf = source` on the vertices not listed in `fixed`, with
    /// `f` prescribed on `fixed`. Every component of the free vertices must
    /// touch a fixed vertex. `force_dense` selects the factorization path
    /// regardless of size (`None` chooses by size).
    pub fn dirichlet(
        &self,
        fixed: &[(usize, Complex64)],
        source: Option<&[Complex64]>,
        force_dense: Option<bool>,
    ) -> Result<(Vec<Complex64>, SolveReport)> {
        let mut value: Vec<Option<Complex64>> = vec![None; self.n];
        for &(v, z) in fixed {
            if v >= self.n {
                return invalid(format!("boundary vertex {v} does not exist"));
            }
            value[v] = Some(z);
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b, w) in &self.edges {
            if !(w > 0.0) {
                return invalid(format!("non-positive weight on edge {a}–{b}"));
            }
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        // Every free vertex must reach boundary data.
        let mut reached = vec![false; self.n];
        let mut queue: VecDeque<usize> = fixed.iter().map(|&(v, _)| v).collect();
        for &(v, _) in fixed {
            reached[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &adj[v] {
                if !reached[u] {
                    reached[u] = true;
                    queue.push_back(u);
                }
            }
        }
        if let Some(v) = (0..self.n).find(|&v| !reached[v]) {
            return precondition(format!("vertex {v} lies in a component without boundary data"));
        }
        let free: Vec<usize> = (0..self.n).filter(|&v| value[v].is_none()).collect();
        let mut index = vec![usize::MAX; self.n];
        for (k, &v) in free.iter().enumerate() {
            index[v] = k;
        }
        let mut a = SymSparse::new(free.len());
        let mut rhs = vec![Complex64::new(0.0, 0.0); free.len()];
        for &(p, q, w) in &self.edges {
            for (x, y) in [(p, q), (q, p)] {
                if index[x] == usize::MAX {
                    continue;
                }
                a.diag[index[x]] += w;
                match value[y] {
                    Some(z) => rhs[index[x]] += z * w,
                    None if x < y => a.add_off(index[x], index[y], -w),
                    None => {}
                }
            }
        }
        if let Some(s) = source {
            for (k, &v) in free.iter().enumerate() {
                rhs[k] += s[v];
            }
        }
        let dense = force_dense.unwrap_or(free.len() < linalg::DENSE_LIMIT);
        let re: Vec<f64> = rhs.iter().map(|z| z.re).collect();
        let im: Vec<f64> = rhs.iter().map(|z| z.im).collect();
        let (xr, r1) = a.solve_with(&re, dense)?;
        let (xi, r2) = a.solve_with(&im, dense)?;
        let mut out: Vec<Complex64> = value.iter().map(|v| v.unwrap_or_default()).collect();
        for (k, &v) in free.iter().enumerate() {
            out[v] = Complex64::new(xr[k], xi[k]);
        }
        let report = SolveReport {
            method: r1.method,
            iterations: r1.iterations.max(r2.iterations),
            residual: r1.residual.max(r2.residual),
        };
        Ok((out, report))
    }
}

/// `Λ` vertices without a dual face.
pub fn boundary_vertices<T: Real>(lam: &DoubleMap<T>) -> Vec<usize> {
    (0..lam.n_vertices()).filter(|&v| !lam.is_interior(v)).collect()
}

/// Solves `Δf = source` on `Λ` with `f` prescribed at `fixed`.
pub fn solve_dirichlet<T: Real>(
    lam: &DoubleMap<T>,
    fixed: &[(usize, C<T>)],
    source: Option<&Cochain<T>>,
) -> Result<(Cochain<T>, SolveReport)> {
    if let Some(s) = source {
        s.check(lam)?;
        if s.degree != 0 {
            return Err(Error::Degree("the source must be a function".into()));
        }
    }
    let fixed64: Vec<(usize, Complex64)> = fixed.iter().map(|&(v, z)| (v, to_c64(z))).collect();
    let src: Option<Vec<Complex64>> = source.map(|s| s.values.iter().map(|&z| to_c64(z)).collect());
    let (f, rep) = WeightedGraph::lambda(lam).dirichlet(&fixed64, src.as_deref(), None)?;
    Ok((Cochain::function(f.into_iter().map(from_c64).collect()), rep))
}

/// Solves `Δf = source` on a closed surface, normalizing `f` to vanish at
/// the first vertex of every component of `Γ` and of `Γ*`. Returns the
/// largest residual of the equation, which is non-zero exactly when the
/// source does not sum to zero over a component.
pub fn solve_poisson<T: Real>(lam: &DoubleMap<T>, source: &Cochain<T>) -> Result<(Cochain<T>, f64)> {
    let g = WeightedGraph::lambda(lam);
    let mut uf = crate::mesh::UnionFind::new(g.n);
    for &(a, b, _) in &g.edges {
        uf.union(a, b);
    }
    let mut pins = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for v in 0..g.n {
        if seen.insert(uf.find(v)) {
            pins.push((v, Complex64::new(0.0, 0.0)));
        }
    }
    let src: Vec<Complex64> = source.values.iter().map(|&z| to_c64(z)).collect();
    let (f, _) = g.dirichlet(&pins, Some(&src), None)?;
    let lap = g.laplacian(&f);
    let res = lap.iter().zip(&src).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok((Cochain::function(f.into_iter().map(from_c64).collect()), res))
}

/// Solution of the Neumann problem on a disc.
#[derive(Clone, Debug)]
pub struct NeumannSolution<T> {
    /// Harmonic on the inner `Γ*` vertices with the prescribed boundary
    /// derivatives; on `Γ` it holds the harmonic conjugate, so the whole
    /// function is holomorphic.
    pub f: Cochain<T>,
    /// Value of `df` on the dual half-edge at `y₀`, which the data does not
    /// constrain.
    pub implied_at_y0: C<T>,
    /// `|Σ ρ(e*) α(e*)|` over all given boundary data, oriented outwards;
    /// zero when the data is compatible with a harmonic function.
    pub compatibility_residual: f64,
}

/// Solves `Δf = 0` on `Γ*` of a disc given `f(y₀) = f₀` and `df = α` on the
/// dual half-edges `e*` of the boundary edges `e` (values keyed by the
/// primal edge id, in the orientation of `e*`). The half-edge at `y₀` is
/// left free.
pub fn solve_neumann<T: Real>(
    lam: &DoubleMap<T>,
    y0: usize,
    f0: C<T>,
    alpha: &[(usize, C<T>)],
) -> Result<NeumannSolution<T>> {
    let g = lam.primal();
    if lam.topology() != Topology::Planar || g.euler_characteristic() != 1 || g.boundary_components() != 1 {
        return precondition("the Neumann problem is solved on discs");
    }
    let m = lam.m();
    let np = lam.n_primal_vertices();
    if y0 < np || y0 >= lam.n_vertices() || lam.is_interior(y0) {
        return invalid("y₀ must be a boundary vertex of Γ*");
    }
    let boundary = g.boundary_edges();
    let e0 = *boundary
        .iter()
        .find(|&&e| lam.edge_ends(e + m).contains(&y0))
        .ok_or_else(|| Error::InvalidInput("y₀ is not on a boundary half-edge".into()))?;
    let mut data: Vec<Option<Complex64>> = vec![None; m];
    for &(e, a) in alpha {
        if e >= m || !boundary.contains(&e) {
            return invalid(format!("edge {e} is not a boundary edge"));
        }
        data[e] = Some(to_c64(a));
    }
    // Walk the boundary cycle from the head of e0 back to its tail.
    let mut next: std::collections::HashMap<usize, Vec<(usize, usize, f64)>> = Default::default();
    for &e in &boundary {
        if e == e0 {
            continue;
        }
        let [t, h] = g.edges[e];
        next.entry(t).or_default().push((e, h, 1.0));
        next.entry(h).or_default().push((e, t, -1.0));
    }
    let [t0, h0] = g.edges[e0];
    let mut values = vec![Complex64::new(0.0, 0.0); lam.n_vertices()];
    let mut fixed = vec![(h0, Complex64::new(0.0, 0.0))];
    let (mut v, mut prev) = (h0, usize::MAX);
    while v != t0 {
        let &(e, w, s) = next
            .get(&v)
            .and_then(|n| n.iter().find(|&&(e, _, _)| e != prev))
            .ok_or_else(|| Error::InvalidInput("boundary is not a single cycle".into()))?;
        let a = data[e].ok_or_else(|| Error::InvalidInput(format!("missing Neumann data on edge {e}")))?;
        let rho = lam.rho()[e].to_f64_();
        // i*α on e is −i α(e*)/ρ(e), in the orientation of e.
        let d_f = Complex64::new(0.0, -1.0) * a / rho * s;
        values[w] = values[v] + d_f;
        fixed.push((w, values[w]));
        prev = e;
        v = w;
    }
    let primal_graph = WeightedGraph {
        n: lam.n_vertices(),
        edges: (0..m)
            .map(|e| {
                let [t, h] = g.edges[e];
                (t, h, lam.rho()[e].to_f64_())
            })
            .collect(),
    };
    // Dual vertices are isolated in the primal graph; pin them too.
    for y in np..lam.n_vertices() {
        fixed.push((y, Complex64::new(0.0, 0.0)));
    }
    let (big_f, _) = primal_graph.dirichlet(&fixed, None, None)?;
    values[..np].copy_from_slice(&big_f[..np]);
    // f on Γ* by integrating i*dF from y0.
    let mut f_dual: Vec<Option<Complex64>> = vec![None; lam.n_vertices()];
    f_dual[y0] = Some(to_c64(f0));
    let mut adj = vec![Vec::new(); lam.n_vertices()];
    for e in 0..m {
        let [a, b] = lam.edge_ends(e + m);
        let [t, h] = g.edges[e];
        let df = Complex64::new(0.0, lam.rho()[e].to_f64_()) * (big_f[h] - big_f[t]);
        adj[a].push((b, df));
        adj[b].push((a, -df));
    }
    let mut queue = VecDeque::from([y0]);
    while let Some(u) = queue.pop_front() {
        let fu = f_dual[u].unwrap();
        for &(w, df) in &adj[u] {
            if f_dual[w].is_none() {
                f_dual[w] = Some(fu + df);
                queue.push_back(w);
            }
        }
    }
    for y in np..lam.n_vertices() {
        values[y] = f_dual[y].unwrap_or_default();
    }
    let implied = {
        let [a, b] = lam.edge_ends(e0 + m);
        values[b] - values[a]
    };
    // Flux of α through the boundary, every half-edge oriented outwards.
    let mut flux = Complex64::new(0.0, 0.0);
    for &e in &boundary {
        let a = if e == e0 { data[e].unwrap_or(implied) } else { data[e].unwrap_or_default() };
        let outward = if lam.is_interior(lam.edge_ends(e + m)[1]) { -1.0 } else { 1.0 };
        flux += a * outward / lam.rho()[e].to_f64_();
    }
    Ok(NeumannSolution {
        f: Cochain::function(values.into_iter().map(from_c64).collect()),
        implied_at_y0: from_c64(implied),
        compatibility_residual: flux.norm(),
    })
}

fn to_vec<T: Real>(a: &Cochain<T>) -> CVec {
    CVec::from_iterator(a.values.len(), a.values.iter().map(|&z| to_c64(z)))
}

fn from_vec<T: Real>(v: &CVec, degree: usize) -> Cochain<T> {
    Cochain::lambda(degree, v.iter().map(|&z| from_c64(z)).collect())
}

/// `α = dφ + d*ψ + h` with the three parts mutually orthogonal.
#[derive(Clone, Debug)]
pub struct HodgeDecomposition<T> {
    pub exact: Cochain<T>,
    pub coexact: Cochain<T>,
    pub harmonic: Cochain<T>,
    /// Largest `|⟨·,·⟩|` between two of the parts, relative to `‖α‖²`.
    pub orthogonality_defect: f64,
}

/// Weighted projection of `b` onto the column space of `m`.
fn project(m: &CMat, w: &[f64], b: &CVec) -> Result<CVec> {
    if m.ncols() == 0 {
        return Ok(CVec::zeros(b.len()));
    }
    let mut wm = m.clone();
    for (r, x) in w.iter().enumerate() {
        wm.row_mut(r).scale_mut(*x);
    }
    let gram = m.adjoint() * &wm;
    let rhs = wm.adjoint() * b;
    Ok(m * linalg::hermitian_solve(&gram, &rhs, 1e-12))
}

/// Hodge decomposition of a `k`-form on a closed surface, orthogonal for
/// the weighted inner product.
pub fn hodge_decompose<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>) -> Result<HodgeDecomposition<T>> {
    a.check(lam)?;
    if a.carrier != Carrier::Lambda {
        return Err(Error::Degree("Hodge decomposition acts on Λ forms".into()));
    }
    if lam.topology() == Topology::Planar {
        return precondition("Hodge decomposition needs a closed surface");
    }
    let k = a.degree;
    let b = to_vec(a);
    let wk = weights(lam, k);
    let exact = if k > 0 { project(&coboundary_matrix(lam, k - 1), &wk, &b)? } else { CVec::zeros(b.len()) };
    let coexact = if k < 2 {
        // d* = W_k⁻¹ dᵀ W_{k+1}
        let dk = coboundary_matrix(lam, k);
        let wk1 = weights(lam, k + 1);
        let mut adj = dk.transpose();
        for r in 0..adj.nrows() {
            for c in 0..adj.ncols() {
                adj[(r, c)] *= wk1[c] / wk[r];
            }
        }
        project(&adj, &wk, &b)?
    } else {
        CVec::zeros(b.len())
    };
    let harmonic = &b - &exact - &coexact;
    let ip = |x: &CVec, y: &CVec| -> f64 {
        x.iter().zip(y.iter()).zip(&wk).map(|((p, q), w)| p * q.conj() * *w).sum::<Complex64>().norm()
    };
    let scale = ip(&b, &b).max(f64::MIN_POSITIVE);
    let defect = [ip(&exact, &coexact), ip(&exact, &harmonic), ip(&coexact, &harmonic)]
        .into_iter()
        .fold(0.0, f64::max)
        / scale;
    Ok(HodgeDecomposition {
        exact: from_vec(&exact, k),
        coexact: from_vec(&coexact, k),
        harmonic: from_vec(&harmonic, k),
        orthogonality_defect: defect,
    })
}

/// A basis of a space of 1-forms, orthonormal for the weighted product.
#[derive(Clone, Debug)]
pub struct FormBasis<T> {
    pub forms: Vec<Cochain<T>>,
    pub report: NullSpaceReport,
}

/// Relative singular value cutoff for null spaces of form equations.
pub const NULL_TOLERANCE: f64 = 1e-9;

fn null_forms<T: Real>(lam: &DoubleMap<T>, rows: Vec<CMat>) -> FormBasis<T> {
    let n = lam.n_edges();
    let total: usize = rows.iter().map(|r| r.nrows()).sum();
    let mut a = CMat::zeros(total, n);
    let mut r0 = 0;
    for r in rows {
        a.view_mut((r0, 0), (r.nrows(), n)).copy_from(&r);
        r0 += r.nrows();
    }
    let (basis, report) = linalg::null_space(&a, NULL_TOLERANCE);
    // Orthonormalize for the weighted product.
    let w = weights(lam, 1);
    let mut out: Vec<CVec> = Vec::new();
    for mut v in basis {
        for u in &out {
            let c: Complex64 = v.iter().zip(u.iter()).zip(&w).map(|((p, q), w)| p * q.conj() * *w).sum();
            v -= u * c;
        }
        let nrm: f64 = v.iter().zip(&w).map(|(p, w)| p.norm_sqr() * w).sum::<f64>().sqrt();
        out.push(v / Complex64::new(nrm, 0.0));
    }
    FormBasis { forms: out.iter().map(|v| from_vec(v, 1)).collect(), report }
}

fn star_plus_i<T: Real>(lam: &DoubleMap<T>) -> CMat {
    let m = lam.m();
    let mut s = CMat::zeros(2 * m, 2 * m);
    for e in 0..m {
        let r = lam.rho()[e].to_f64_();
        s[(e, e + m)] = Complex64::new(-1.0 / r, 0.0);
        s[(e + m, e)] = Complex64::new(r, 0.0);
    }
    for k in 0..2 * m {
        s[(k, k)] += Complex64::new(0.0, 1.0);
    }
    s
}

impl<T> FormBasis<T> {
    /// The numerical rank is ambiguous when the singular-value gap around
    /// the cutoff is below a factor of ten.
    pub fn ambiguous(&self) -> bool {
        self.report.gap < 10.0
    }
}

fn require_closed<T: Real>(lam: &DoubleMap<T>) -> Result<()> {
    if lam.topology() == Topology::Planar {
        return precondition("form bases are computed on closed surfaces");
    }
    Ok(())
}

/// Closed 1-forms of type `(1,0)`: `dα = 0` and `*α = −iα`.
pub fn holomorphic_basis<T: Real>(lam: &DoubleMap<T>) -> Result<FormBasis<T>> {
    require_closed(lam)?;
    Ok(null_forms(lam, vec![coboundary_matrix(lam, 1), star_plus_i(lam)]))
}

/// Closed and coclosed 1-forms.
pub fn harmonic_basis<T: Real>(lam: &DoubleMap<T>) -> Result<FormBasis<T>> {
    require_closed(lam)?;
    let w = weights(lam, 1);
    let mut codiff = coboundary_matrix(lam, 0).transpose();
    for r in 0..codiff.nrows() {
        for c in 0..codiff.ncols() {
            codiff[(r, c)] *= w[c];
        }
    }
    Ok(null_forms(lam, vec![coboundary_matrix(lam, 1), codiff]))
}

/// Holomorphic functions: the null space of the Cauchy–Riemann equations,
/// one per quad.
pub fn holomorphic_functions<T: Real>(lam: &DoubleMap<T>) -> (Vec<Cochain<T>>, NullSpaceReport) {
    let m = lam.m();
    let mut a = CMat::zeros(m, lam.n_vertices());
    for i in 0..m {
        let [x, yr, xp, yl] = lam.diamond().corners[i];
        let ir = Complex64::new(0.0, lam.rho()[i].to_f64_());
        a[(i, yl)] += Complex64::new(1.0, 0.0);
        a[(i, yr)] -= Complex64::new(1.0, 0.0);
        a[(i, xp)] -= ir;
        a[(i, x)] += ir;
    }
    let (basis, rep) = linalg::null_space(&a, NULL_TOLERANCE);
    (basis.iter().map(|v| Cochain::function(v.iter().map(|&z| from_c64(z)).collect())).collect(), rep)
}

/// `∬_Λ f · *Δg = Σ_v f(v) (Δg)(v)` over the vertices with a dual face.
/// By Weyl's lemma it vanishes for every compactly supported `g` exactly
/// when `f` is harmonic; for `g = χ_x` it returns `(Δf)(x)`.
pub fn weyl_residual<T: Real>(lam: &DoubleMap<T>, f: &Cochain<T>, g: &Cochain<T>) -> Result<C<T>> {
    f.check(lam)?;
    g.check(lam)?;
    if let Some(v) = (0..lam.n_vertices()).find(|&v| !lam.is_interior(v) && g.values[v] != T::zero_c()) {
        return precondition(format!("the test function is non-zero at boundary vertex {v}"));
    }
    let lap = forms::laplacian(lam, g)?;
    let w = forms::lambda_mul(lam, f, &star(lam, &lap)?)?;
    Ok(forms::integrate(&w))
}

/// `Δ_◇ g = d_◇ B *dg`.
pub fn diamond_laplacian<T: Real>(
    lam: &DoubleMap<T>,
    b: &AverageInverse,
    g: &Cochain<T>,
    kernel_shift: &[C<T>],
) -> Result<(Cochain<T>, Cochain<T>)> {
    let sdg = star(lam, &forms::d(lam, g)?)?;
    let lifted = b.apply(&sdg, kernel_shift)?;
    Ok((forms::d(lam, &lifted)?, lifted))
}

/// `∬_D (f Δ_◇g − g Δ_◇f) − ∮_{∂D} (f·B*dg − g·B*df)` for a region `D` of
/// quads; `shift_f`, `shift_g` pick other representatives of `B`.
pub fn green_identity_residual<T: Real>(
    lam: &DoubleMap<T>,
    region: &[usize],
    f: &Cochain<T>,
    g: &Cochain<T>,
    shift_f: &[C<T>],
    shift_g: &[C<T>],
) -> Result<GreenReport> {
    let b = AverageInverse::new(lam)?;
    if let Some(&q) = region.iter().find(|&&q| q >= lam.m()) {
        return invalid(format!("quad {q} does not exist"));
    }
    let (lap_g, bg) = diamond_laplacian(lam, &b, g, shift_g)?;
    let (lap_f, bf) = diamond_laplacian(lam, &b, f, shift_f)?;
    let area = &mul(lam, f, &lap_g)? - &mul(lam, g, &lap_f)?;
    let line = &mul(lam, f, &bg)? - &mul(lam, g, &bf)?;
    let inside: C<T> = region.iter().fold(T::zero_c(), |s, &q| s + area.values[q]);
    let boundary: C<T> = lam
        .diamond()
        .region_boundary(region)
        .iter()
        .fold(T::zero_c(), |s, d| if d.forward { s + line.values[d.edge] } else { s - line.values[d.edge] });
    Ok(GreenReport {
        residual: to_c64(inside - boundary),
        b_residual: b.residual,
        reliable: b.residual <= B_TOLERANCE,
    })
}

/// Largest `|A B α − α|` for which Green's identity is trusted.
pub const B_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GreenReport {
    pub residual: Complex64,
    /// Residual of `A∘B` on the forms it was built for.
    pub b_residual: f64,
    pub reliable: bool,
}

/// Dirichlet energy `(df, df) = Σ_e ρ(e) |f(h) − f(t)|²` over `Λ`.
pub fn energy<T: Real>(lam: &DoubleMap<T>, f: &Cochain<T>) -> f64 {
    (0..lam.n_edges())
        .map(|a| {
            let [t, h] = lam.edge_ends(a);
            lam.edge_rho(a).to_f64_() * to_c64(f.values[h] - f.values[t]).norm_sqr()
        })
        .sum()
}

/// `A` applied to `Δ_◇ g`: the diamond Laplacian seen on `Λ`.
pub fn averaged_diamond_laplacian<T: Real>(lam: &DoubleMap<T>, g: &Cochain<T>) -> Result<Cochain<T>> {
    let b = AverageInverse::new(lam)?;
    let (lap, _) = diamond_laplacian(lam, &b, g, &[])?;
    average(lam, &lap)
}
