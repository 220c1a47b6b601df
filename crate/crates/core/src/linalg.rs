//! Dense and iterative linear algebra in double precision.
//!
//! Generic code converts its operators to `f64` here; this keeps the
//! factorizations on a single, well-tested scalar type.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Systems with fewer unknowns than this use a dense factorization.
pub const DENSE_LIMIT: usize = 2000;
pub const CG_TOLERANCE: f64 = 1e-12;

/// Singular value summary of a null space computation.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct NullSpaceReport {
    pub dimension: usize,
    /// Smallest retained singular value over largest discarded one (both
    /// relative to the largest), `∞` when nothing is discarded or kept.
    pub gap: f64,
    pub largest: f64,
}

fn padded_svd(a: &CMat) -> nalgebra::SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn> {
    let (r, c) = a.shape();
    let mut m = a.clone();
    if r < c {
        m = m.resize_vertically(c, Complex64::new(0.0, 0.0));
    }
    m.svd(false, true)
}

/// Orthonormal basis (Euclidean) of `{x : a x = 0}`, with singular values
/// below `rel_tol · σ_max` treated as zero.
pub fn null_space(a: &CMat, rel_tol: f64) -> (Vec<CVec>, NullSpaceReport) {
    let n = a.ncols();
    if n == 0 {
        return (Vec::new(), NullSpaceReport { dimension: 0, gap: f64::INFINITY, largest: 0.0 });
    }
    let svd = padded_svd(a);
    let vt = svd.v_t.as_ref().expect("requested V");
    let sv = &svd.singular_values;
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    let cut = rel_tol * largest.max(f64::MIN_POSITIVE);
    let mut basis = Vec::new();
    let (mut min_kept, mut max_dropped) = (f64::INFINITY, 0.0f64);
    for (k, &s) in sv.iter().enumerate() {
        if s <= cut {
            basis.push(vt.row(k).adjoint());
            max_dropped = max_dropped.max(s);
        } else {
            min_kept = min_kept.min(s);
        }
    }
    let gap = if basis.is_empty() || min_kept.is_infinite() {
        f64::INFINITY
    } else {
        min_kept / max_dropped.max(f64::EPSILON * largest)
    };
    let dimension = basis.len();
    (basis, NullSpaceReport { dimension, gap, largest })
}

pub fn rank(a: &CMat, rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().singular_values();
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * largest).count()
}

/// Minimum-norm least squares solution of `a x ≈ b`.
pub fn lstsq(a: &CMat, b: &CVec, rel_tol: f64) -> Result<CVec> {
    if a.ncols() == 0 {
        return Ok(CVec::zeros(0));
    }
    let svd = a.clone().svd(true, true);
    let largest = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(b, rel_tol * largest.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Numerical(format!("least squares failed: {e}")))
}

/// Minimum-norm solution of `g x = b` for Hermitian positive semi-definite
/// `g`, through its eigen-decomposition; eigenvalues below `rel_tol` times
/// the largest are treated as zero.
pub fn hermitian_solve(g: &CMat, b: &CVec, rel_tol: f64) -> CVec {
    let eig = g.clone().symmetric_eigen();
    let largest = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let q = &eig.eigenvectors;
    let mut coef = q.adjoint() * b;
    for (c, &l) in coef.iter_mut().zip(eig.eigenvalues.iter()) {
        *c = if l > rel_tol * largest { *c / l } else { Complex64::new(0.0, 0.0) };
    }
    q * coef
}

/// Moore–Penrose pseudo-inverse.
pub fn pinv(a: &CMat, rel_tol: f64) -> Result<CMat> {
    let svd = a.clone().svd(true, true);
    let largest = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.pseudo_inverse(rel_tol * largest.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Numerical(format!("pseudo-inverse failed: {e}")))
}

/// Sparse symmetric real matrix stored as adjacency lists plus diagonal.
#[derive(Clone, Debug, Default)]
pub struct SymSparse {
    pub diag: Vec<f64>,
    pub off: Vec<Vec<(usize, f64)>>,
}

/// Outcome of a linear solve.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SolveReport {
    pub method: &'static str,
    pub iterations: usize,
    pub residual: f64,
}

impl SymSparse {
    pub fn new(n: usize) -> Self {
        SymSparse { diag: vec![0.0; n], off: vec![Vec::new(); n] }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn add_off(&mut self, i: usize, j: usize, w: f64) {
        self.off[i].push((j, w));
        self.off[j].push((i, w));
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.diag[i] * x[i] + self.off[i].iter().map(|&(j, w)| w * x[j]).sum::<f64>())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] += self.diag[i];
            for &(j, w) in &self.off[i] {
                m[(i, j)] += w;
            }
        }
        m
    }

    /// Conjugate gradients with Jacobi preconditioning.
    pub fn cg(&self, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, SolveReport) {
        let n = self.n();
        let mut x = vec![0.0; n];
        let bnorm = norm(b).max(f64::MIN_POSITIVE);
        let mut r = b.to_vec();
        let pre: Vec<f64> = self.diag.iter().map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect();
        let mut z: Vec<f64> = r.iter().zip(&pre).map(|(a, p)| a * p).collect();
        let mut p = z.clone();
        let mut rz: f64 = dot(&r, &z);
        let mut it = 0;
        while it < max_iter && norm(&r) > tol * bnorm {
            let ap = self.mul(&p);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] * pre[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            it += 1;
        }
        let res = norm(&r) / bnorm;
        (x, SolveReport { method: "cg", iterations: it, residual: res })
    }

    /// Solves `A x = b` for a positive definite `A`, densely below
    /// [`DENSE_LIMIT`] unknowns and by conjugate gradients above.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        self.solve_with(b, self.n() < DENSE_LIMIT)
    }

    pub fn solve_with(&self, b: &[f64], dense: bool) -> Result<(Vec<f64>, SolveReport)> {
        let n = self.n();
        if n == 0 {
            return Ok((Vec::new(), SolveReport { method: "empty", iterations: 0, residual: 0.0 }));
        }
        if dense {
            let chol = self
                .to_dense()
                .cholesky()
                .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
            let x = chol.solve(&DVector::from_column_slice(b));
            let x: Vec<f64> = x.iter().copied().collect();
            let r = self.mul(&x);
            let res = norm(&r.iter().zip(b).map(|(a, c)| a - c).collect::<Vec<_>>())
                / norm(b).max(f64::MIN_POSITIVE);
            Ok((x, SolveReport { method: "cholesky", iterations: 1, residual: res }))
        } else {
            let (x, rep) = self.cg(b, CG_TOLERANCE, 10 * n.max(1));
            if rep.residual > 1e-8 {
                return Err(Error::Numerical(format!(
                    "conjugate gradients stalled at relative residual {:.3e}",
                    rep.residual
                )));
            }
            Ok((x, rep))
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
