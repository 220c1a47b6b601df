//! Discrete holomorphy: Cauchy–Riemann checks, residues, meromorphic forms
//! with prescribed holonomy, the Cauchy kernel, and the function calculus of
//! critical maps.

mod calculus;
mod cauchy;
mod meromorphic;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

pub use calculus::{
    dagger, derivative, diamond_integral, evaluate, minimal_polynomial, z_power_convergence, z_powers, DiamondIntegral,
    MinimalPolynomial, PowerNormalization,
};
pub use cauchy::{cauchy_integral, cauchy_kernel, CauchyIntegral, CauchyKernel};
pub use meromorphic::{homology_loops, meromorphic_form, phi_ab, HolonomyKind, MeromorphicForm, PhiAb, Poles};

use crate::error::{invalid, Error, Result};
use crate::forms::{self, Carrier, Cochain};
use crate::mesh::{Dart, DoubleMap};
use crate::real::to_c64;
use crate::{Real, C};

/// Residuals of the Cauchy–Riemann equation
/// `f(y′) − f(y) = iρ(x, x′)(f(x′) − f(x))`, one per quad.
#[derive(Clone, Debug, Serialize)]
pub struct CrReport {
    pub max_residual: f64,
    pub worst_quad: Option<usize>,
    pub residuals: Vec<f64>,
}

impl CrReport {
    pub fn holomorphic(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }
}

pub fn check_holomorphic<T: Real>(lam: &DoubleMap<T>, f: &Cochain<T>) -> Result<CrReport> {
    f.check(lam)?;
    if f.degree != 0 || f.carrier != Carrier::Lambda {
        return Err(Error::Degree("the Cauchy–Riemann check takes a function on Λ".into()));
    }
    let residuals: Vec<f64> = (0..lam.m())
        .map(|i| {
            let [x, yr, xp, yl] = lam.diamond().corners[i];
            let v = &f.values;
            let ir = C::new(T::zero(), lam.rho()[i]);
            to_c64(v[yl] - v[yr] - ir * (v[xp] - v[x])).norm()
        })
        .collect();
    let worst = (0..residuals.len()).max_by(|&a, &b| residuals[a].total_cmp(&residuals[b]));
    Ok(CrReport { max_residual: worst.map_or(0.0, |q| residuals[q]), worst_quad: worst, residuals })
}

/// How far a `Λ` 1-form is from being holomorphic.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FormReport {
    /// `max |dα|` over the faces of `Λ`, poles excluded.
    pub closed_residual: f64,
    /// `max |*α + iα|` over the edges.
    pub type_residual: f64,
}

/// Checks `dα = 0` (away from `poles`) and `*α = −iα`.
pub fn check_holomorphic_form<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>, poles: &[usize]) -> Result<FormReport> {
    let da = forms::d(lam, a)?;
    let skip: Vec<Option<usize>> = poles.iter().map(|&p| lam.vertex_face(p)).collect();
    let closed_residual = (0..lam.n_faces())
        .filter(|f| !skip.contains(&Some(*f)))
        .map(|f| to_c64(da.values[f]).norm())
        .fold(0.0, f64::max);
    let sa = forms::star(lam, a)?;
    let type_residual = sa
        .values
        .iter()
        .zip(&a.values)
        .map(|(&s, &v)| to_c64(s + v * T::i_c()).norm())
        .fold(0.0, f64::max);
    Ok(FormReport { closed_residual, type_residual })
}

/// `Res_x α = (1/2iπ) ∮_{∂x*} α`.
pub fn residue<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>, x: usize) -> Result<Complex64> {
    a.check(lam)?;
    if a.degree != 1 || a.carrier != Carrier::Lambda {
        return Err(Error::Degree("residues are taken of Λ 1-forms".into()));
    }
    if x >= lam.n_vertices() {
        return invalid(format!("vertex {x} does not exist"));
    }
    let f = lam
        .vertex_face(x)
        .ok_or_else(|| Error::Precondition(format!("vertex {x} lies on the boundary")))?;
    Ok(holonomy(a, lam.face(f)) / Complex64::new(0.0, 2.0 * PI))
}

/// `∮ α` along a chain of `Λ` darts.
pub fn holonomy<T: Real>(a: &Cochain<T>, darts: &[Dart]) -> Complex64 {
    darts
        .iter()
        .map(|d| {
            let v = to_c64(a.values[d.edge]);
            if d.forward {
                v
            } else {
                -v
            }
        })
        .sum()
}

#[cfg(test)]
mod tests;
