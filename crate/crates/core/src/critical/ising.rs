use std::f64::consts::PI;

use serde::Serialize;

use crate::mesh::DoubleMap;
use crate::Real;

/// Ising coupling `K(e) = ½ asinh ρ(e)`; conversely `ρ = sinh 2K`.
pub fn ising_coupling<T: Real>(rho: T) -> T {
    rho.asinh() * T::lit(0.5)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IsingReport {
    pub critical: bool,
    /// `Σ_{a ∋ v} arctan ρ(a) − π` at the inner vertex where it is largest
    /// in absolute value.
    pub flatness_residual: f64,
    pub worst_vertex: Option<usize>,
    /// Closed-form check for regular vertices, by valence: `3` uses
    /// `s₁s₂s₃ = s₁+s₂+s₃`, `4` uses `s₁s₂ = 1` and `6` uses
    /// `s₁s₂ + s₂s₃ + s₃s₁ = 1` with `s = sinh 2K` on the distinct directions.
    pub lattice_residual: Option<f64>,
}

/// Checks the Ising criticality condition `Σ arctan ρ = π` around every
/// inner vertex of `Λ`.
pub fn ising_criticality<T: Real>(lam: &DoubleMap<T>, tol: f64) -> IsingReport {
    let mut worst: Option<(usize, f64)> = None;
    let mut lattice: Option<f64> = None;
    let darts = lam.vertex_darts();
    for v in 0..lam.n_vertices() {
        if !lam.is_interior(v) {
            continue;
        }
        let rhos: Vec<f64> = darts[v].iter().map(|d| lam.edge_rho(d.edge).to_f64_()).collect();
        let r = rhos.iter().map(|r| r.atan()).sum::<f64>() - PI;
        if worst.is_none_or(|(_, w)| r.abs() > w.abs()) {
            worst = Some((v, r));
        }
        let s = sinh_2k(lam, v);
        let check = match s.len() {
            3 => Some(s[0] * s[1] * s[2] - (s[0] + s[1] + s[2])),
            4 if close(s[0], s[2]) && close(s[1], s[3]) => Some(s[0] * s[1] - 1.0),
            6 if close(s[0], s[3]) && close(s[1], s[4]) && close(s[2], s[5]) => {
                Some(s[0] * s[1] + s[1] * s[2] + s[2] * s[0] - 1.0)
            }
            _ => None,
        };
        if let Some(c) = check {
            lattice = Some(lattice.map_or(c, |l: f64| if c.abs() > l.abs() { c } else { l }));
        }
    }
    let (worst_vertex, residual) = match worst {
        Some((v, r)) => (Some(v), r),
        None => (None, 0.0),
    };
    IsingReport {
        critical: residual.abs() <= tol,
        flatness_residual: residual,
        worst_vertex,
        lattice_residual: lattice,
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs())
}

/// `sinh 2K` on the edges around `v`, in counterclockwise order.
fn sinh_2k<T: Real>(lam: &DoubleMap<T>, v: usize) -> Vec<f64> {
    let Some(f) = lam.vertex_face(v) else { return Vec::new() };
    lam.face(f)
        .iter()
        .map(|d| {
            let (a, _) = lam.dual_edge(d.edge);
            let k = ising_coupling(lam.edge_rho(a).to_f64_());
            (2.0 * k).sinh()
        })
        .collect()
}
