use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::mesh::DoubleMap;
use crate::Real;

/// Absolute error requested from the quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-13;

/// Modulus `k`, complementary modulus `k′ = √(1 − k²)` and the square angle
/// `I = ∫₀^{π/2} dφ / √(1 − k′² sin² φ)`.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct MassiveParams {
    pub k: f64,
    pub k_prime: f64,
    pub square_angle: f64,
}

impl MassiveParams {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k <= 1.0) {
            return invalid(format!("the massive modulus must lie in (0, 1], got {k}"));
        }
        let k_prime = (1.0 - k * k).sqrt();
        Ok(MassiveParams { k, k_prime, square_angle: complete_i(k_prime)? })
    }
}

/// `u = ∫₀^{φ/2} dψ / √(1 − k′² sin² ψ)` by double exponential quadrature.
/// At `k = 1` the integrand is `1` and `u = φ/2` exactly.
pub fn elliptic_half_angle(phi: f64, k: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&k) {
        return invalid(format!("the modulus must lie in [0, 1], got {k}"));
    }
    if !(0.0..=PI).contains(&phi) || (k == 0.0 && phi >= PI) {
        return invalid(format!("angle {phi} is outside the domain of the half angle"));
    }
    if k == 1.0 {
        return Ok(phi / 2.0);
    }
    let kp2 = 1.0 - k * k;
    let out = quadrature::integrate(|t: f64| 1.0 / (1.0 - kp2 * t.sin().powi(2)).sqrt(), 0.0, phi / 2.0, QUADRATURE_TOLERANCE);
    Ok(out.integral)
}

/// The same integral by descending Landen transformations, that is the
/// arithmetic-geometric mean of `1` and `k` carried along with the
/// amplitude. Needs `k > 0`.
pub fn elliptic_half_angle_agm(phi: f64, k: f64) -> Result<f64> {
    if !(k > 0.0 && k <= 1.0) {
        return invalid(format!("the mean iteration needs a modulus in (0, 1], got {k}"));
    }
    if !(0.0..=PI).contains(&phi) {
        return invalid(format!("angle {phi} is outside [0, π]"));
    }
    let (mut a, mut b) = (1.0f64, k);
    let mut amp = phi / 2.0;
    let mut scale = 1.0f64;
    for _ in 0..64 {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let t = ((b / a) * amp.tan()).atan();
        amp += t + PI * ((amp - t) / PI).round();
        let (na, nb) = ((a + b) / 2.0, (a * b).sqrt());
        a = na;
        b = nb;
        scale *= 2.0;
    }
    Ok(amp / (scale * a))
}

/// `I_{k′}`, the half angle of `φ = π`. Diverges at `k′ = 1`.
pub fn complete_i(k_prime: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k_prime) {
        return invalid(format!("the complete integral needs 0 ≤ k′ < 1, got {k_prime}"));
    }
    if k_prime == 0.0 {
        return Ok(FRAC_PI_2);
    }
    elliptic_half_angle(PI, (1.0 - k_prime * k_prime).sqrt())
}

/// `π / (2 M(1, k))` with `M` the arithmetic-geometric mean.
pub fn complete_i_agm(k_prime: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k_prime) {
        return invalid(format!("the complete integral needs 0 ≤ k′ < 1, got {k_prime}"));
    }
    let (mut a, mut b) = (1.0f64, (1.0 - k_prime * k_prime).sqrt());
    while (a - b).abs() > f64::EPSILON * a {
        let (na, nb) = ((a + b) / 2.0, (a * b).sqrt());
        a = na;
        b = nb;
    }
    Ok(PI / (2.0 * a))
}

/// Ratios on both halves of `Λ` with `ρ(a)ρ(a*) = 1/k`, deformed from the
/// conformal ratios of `lam` by `1/√k` on each side.
pub fn massive_ratios<T: Real>(lam: &DoubleMap<T>, k: f64) -> Vec<f64> {
    let s = 1.0 / k.sqrt();
    (0..lam.n_edges()).map(|a| lam.edge_rho(a).to_f64_() * s).collect()
}

/// Flatness of a massive system: per face `Σ_{a∈∂F} (I − u(a))` and per
/// inner vertex `Σ_{a∋v} u(a)`, both compared with `I` modulo `4I` and
/// reduced to `[−2I, 2I)`. Half angles use `φ(a) = 2 arctan ρ(a)`.
#[derive(Clone, Debug, Serialize)]
pub struct MassiveReport {
    pub params: MassiveParams,
    /// `max |ρ(a)ρ(a*) − 1/k|`.
    pub modulus_defect: f64,
    /// First pair `(e_i, ρ(e_i)ρ(e_i*))` violating the modulus.
    pub offending: Option<(usize, f64)>,
    pub face_residuals: Vec<f64>,
    pub vertex_residuals: Vec<f64>,
    pub max_residual: f64,
    pub flat: bool,
}

impl MassiveReport {
    pub fn modulus_ok(&self) -> bool {
        self.offending.is_none()
    }
}

pub fn massive_flatness<T: Real>(lam: &DoubleMap<T>, rho: &[f64], k: f64, tol: f64) -> Result<MassiveReport> {
    let params = MassiveParams::new(k)?;
    let m = lam.m();
    if rho.len() != 2 * m {
        return invalid(format!("{} ratios for {} edges of Λ", rho.len(), 2 * m));
    }
    if let Some(a) = rho.iter().position(|&r| !(r > 0.0) || !r.is_finite()) {
        return invalid(format!("ratio on edge {a} must be positive"));
    }
    let mut modulus_defect = 0.0f64;
    let mut offending = None;
    for i in 0..m {
        let p = rho[i] * rho[i + m];
        let d = (p - 1.0 / k).abs();
        modulus_defect = modulus_defect.max(d);
        if offending.is_none() && d > tol {
            offending = Some((i, p));
        }
    }
    let i4 = 4.0 * params.square_angle;
    let reduce = |s: f64| {
        let r = (s - params.square_angle).rem_euclid(i4);
        if r >= 2.0 * params.square_angle {
            r - i4
        } else {
            r
        }
    };
    let u: Vec<f64> =
        rho.iter().map(|&r| elliptic_half_angle(2.0 * r.atan(), k)).collect::<Result<_>>()?;
    let face_residuals: Vec<f64> = lam
        .faces()
        .iter()
        .map(|f| reduce(f.iter().map(|d| params.square_angle - u[d.edge]).sum()))
        .collect();
    let darts = lam.vertex_darts();
    let vertex_residuals: Vec<f64> = (0..lam.n_vertices())
        .filter(|&v| lam.is_interior(v))
        .map(|v| reduce(darts[v].iter().map(|d| u[d.edge]).sum()))
        .collect();
    let max_residual = face_residuals.iter().chain(&vertex_residuals).map(|r| r.abs()).fold(0.0, f64::max);
    Ok(MassiveReport {
        params,
        modulus_defect,
        flat: offending.is_none() && max_residual <= tol,
        offending,
        face_residuals,
        vertex_residuals,
        max_residual,
    })
}
