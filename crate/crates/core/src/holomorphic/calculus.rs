use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::critical::{classify_map, convergence_test, ConvergenceReport, EmbeddedMap, PlanarEmbedding, Verdict};
use crate::error::{invalid, precondition, Result};
use crate::forms::{Carrier, Cochain};
use crate::linalg::{CMat, CVec};
use crate::mesh::DoubleMap;
use crate::real::{from_c64, to_c64};
use crate::{Real, C};

/// Largest path dependence, relative to the size of the result, accepted
/// from an integral over `◇`.
pub const PATH_TOLERANCE: f64 = 1e-9;

/// `f† = ε f̄`.
pub fn dagger<T: Real>(lam: &DoubleMap<T>, f: &Cochain<T>) -> Cochain<T> {
    Cochain::function(
        f.values
            .iter()
            .enumerate()
            .map(|(v, z)| if lam.epsilon(v) > 0 { z.conj() } else { -z.conj() })
            .collect(),
    )
}

/// Primitive of `g dZ` along `◇` edges from `z₀`, each edge contributing
/// `(g(x) + g(y))/2 · (Z(y) − Z(x))`.
#[derive(Clone, Debug)]
pub struct DiamondIntegral<T> {
    pub values: Cochain<T>,
    /// Largest disagreement between the primitive and an edge integral:
    /// zero when the integral is path independent.
    pub path_defect: f64,
}

pub fn diamond_integral<T: Real>(
    lam: &DoubleMap<T>,
    emb: &PlanarEmbedding<T>,
    g: &Cochain<T>,
    z0: usize,
) -> Result<DiamondIntegral<T>> {
    g.check(lam)?;
    if z0 >= lam.n_vertices() {
        return invalid(format!("base vertex {z0} does not exist"));
    }
    let dia = lam.diamond();
    let dz = emb.diamond_vectors(lam);
    let half = T::lit(0.5);
    let step: Vec<C<T>> =
        dia.complex.edges.iter().zip(&dz).map(|(&[x, y], &v)| (g.values[x] + g.values[y]) * half * v).collect();
    let mut adj = vec![Vec::new(); lam.n_vertices()];
    for (s, &[x, y]) in dia.complex.edges.iter().enumerate() {
        adj[x].push((y, step[s]));
        adj[y].push((x, -step[s]));
    }
    let mut val: Vec<Option<C<T>>> = vec![None; lam.n_vertices()];
    val[z0] = Some(T::zero_c());
    let mut queue = VecDeque::from([z0]);
    while let Some(u) = queue.pop_front() {
        let fu = val[u].unwrap();
        for &(w, s) in &adj[u] {
            if val[w].is_none() {
                val[w] = Some(fu + s);
                queue.push_back(w);
            }
        }
    }
    let mut path_defect = 0.0f64;
    for (s, &[x, y]) in dia.complex.edges.iter().enumerate() {
        if let (Some(a), Some(b)) = (val[x], val[y]) {
            path_defect = path_defect.max(to_c64(b - a - step[s]).norm());
        }
    }
    Ok(DiamondIntegral {
        values: Cochain::function(val.into_iter().map(|v| v.unwrap_or_else(T::zero_c)).collect()),
        path_defect,
    })
}

fn critical_delta<T: Real>(lam: &DoubleMap<T>, emb: &PlanarEmbedding<T>) -> Result<f64> {
    let c = classify_map(lam, emb, 1e-9);
    match (c.verdict, c.delta) {
        (Verdict::Critical, Some(d)) => Ok(d),
        _ => precondition("the calculus needs a critical map"),
    }
}

fn path_independent<T: Real>(i: DiamondIntegral<T>) -> Result<Cochain<T>> {
    let scale = 1.0 + i.values.max_abs().to_f64_();
    if i.path_defect > PATH_TOLERANCE * scale {
        return precondition(format!(
            "the integral depends on the path (defect {:.3e}): the region is not simply connected or the integrand is not holomorphic",
            i.path_defect
        ));
    }
    Ok(i.values)
}

/// `f′ = (4/δ²) (∫_{z₀} f† dZ)†`. It is determined up to a multiple of `ε`,
/// which changes with `z₀`.
pub fn derivative<T: Real>(
    lam: &DoubleMap<T>,
    emb: &PlanarEmbedding<T>,
    f: &Cochain<T>,
    z0: usize,
) -> Result<Cochain<T>> {
    let delta = critical_delta(lam, emb)?;
    let prim = path_independent(diamond_integral(lam, emb, &dagger(lam, f), z0)?)?;
    Ok(dagger(lam, &prim).scale(T::c(4.0 / (delta * delta), 0.0)))
}

/// Scaling of the powers `Z^k = ∫ c_k Z^{k−1} dZ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerNormalization {
    /// `c_k = 1/k`; the powers tend to `(z − z₀)^k / (k!)²`.
    #[default]
    Paper,
    /// `c_k = k`; the powers tend to `(z − z₀)^k`.
    Continuum,
}

/// `Z⁰, …, Z^k` on a simply connected critical map.
pub fn z_powers<T: Real>(
    lam: &DoubleMap<T>,
    emb: &PlanarEmbedding<T>,
    k: usize,
    z0: usize,
    norm: PowerNormalization,
) -> Result<Vec<Cochain<T>>> {
    critical_delta(lam, emb)?;
    let mut out = vec![Cochain::function(vec![T::c(1.0, 0.0); lam.n_vertices()])];
    for j in 1..=k {
        let c = match norm {
            PowerNormalization::Paper => 1.0 / j as f64,
            PowerNormalization::Continuum => j as f64,
        };
        let g = out[j - 1].scale(T::c(c, 0.0));
        out.push(path_independent(diamond_integral(lam, emb, &g, z0)?)?);
    }
    Ok(out)
}

/// A monic relation `Σ c_j Z^j = 0` on a vertex set.
#[derive(Clone, Debug, Serialize)]
pub struct MinimalPolynomial {
    /// `None` when the given powers are independent.
    pub degree: Option<usize>,
    /// `c_0, …, c_n` with `c_n = 1`.
    pub coefficients: Vec<Complex64>,
    /// Relative residual of the relation.
    pub residual: f64,
}

/// Relative residual below which a power counts as dependent on the lower
/// ones.
pub const DEPENDENCE_TOLERANCE: f64 = 1e-8;

/// Finds the least `n` such that `Z^n` restricted to `vertices` is a
/// combination of the lower powers.
pub fn minimal_polynomial<T: Real>(powers: &[Cochain<T>], vertices: &[usize]) -> MinimalPolynomial {
    let column = |k: usize| -> CVec {
        CVec::from_iterator(vertices.len(), vertices.iter().map(|&v| to_c64(powers[k].values[v])))
    };
    for n in 0..powers.len() {
        let b = column(n);
        let bn = b.norm();
        if n == 0 || bn == 0.0 {
            if bn == 0.0 {
                let mut coefficients = vec![Complex64::new(0.0, 0.0); n + 1];
                coefficients[n] = Complex64::new(1.0, 0.0);
                return MinimalPolynomial { degree: Some(n), coefficients, residual: 0.0 };
            }
            continue;
        }
        let cols: Vec<CVec> = (0..n).map(column).collect();
        let scales: Vec<f64> = cols.iter().map(|c| c.norm()).collect();
        let a = CMat::from_columns(&cols.iter().zip(&scales).map(|(c, s)| c / Complex64::new(*s, 0.0)).collect::<Vec<_>>());
        if a.nrows() < a.ncols() {
            break;
        }
        let qr = a.clone().qr();
        let qtb = qr.q().adjoint() * &b;
        let Some(x) = qr.r().solve_upper_triangular(&qtb) else { break };
        let residual = (&a * &x - &b).norm() / bn;
        if residual <= DEPENDENCE_TOLERANCE {
            let mut coefficients: Vec<Complex64> = x.iter().zip(&scales).map(|(c, s)| -c / *s).collect();
            coefficients.push(Complex64::new(1.0, 0.0));
            return MinimalPolynomial { degree: Some(n), coefficients, residual };
        }
    }
    MinimalPolynomial { degree: None, coefficients: Vec::new(), residual: f64::NAN }
}

/// Compares `Z^k` in the continuum normalization with `(z − z₀)^k` over
/// successive refinements. With `control` set the target is replaced by the
/// anti-holomorphic `conj((z − z₀)^k)`, which the powers cannot approach.
pub fn z_power_convergence<T: Real>(
    base: &EmbeddedMap<T>,
    k: usize,
    levels: usize,
    z0: usize,
    control: bool,
) -> Result<ConvergenceReport> {
    let delta = critical_delta(&base.map, &base.embedding)?;
    if z0 >= base.map.n_vertices() {
        return invalid(format!("base vertex {z0} does not exist"));
    }
    let origin = to_c64(base.embedding.positions[z0]);
    convergence_test(
        base,
        levels,
        delta,
        |em| Ok(z_powers(&em.map, &em.embedding, k, z0, PowerNormalization::Continuum)?.pop().unwrap()),
        move |z| {
            let p = (z - origin).powu(k as u32);
            if control {
                p.conj()
            } else {
                p
            }
        },
    )
}

/// Evaluates a polynomial in `Z` given by its coefficients on the powers.
pub fn evaluate<T: Real>(powers: &[Cochain<T>], coefficients: &[Complex64]) -> Cochain<T> {
    let n = powers.first().map_or(0, |p| p.values.len());
    let mut out = Cochain::new(0, Carrier::Lambda, vec![T::zero_c(); n]);
    for (p, c) in powers.iter().zip(coefficients) {
        out = &out + &p.scale(from_c64(*c));
    }
    out
}
