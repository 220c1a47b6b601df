use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::spin::{SpinStructure, Tree};
use crate::critical::PlanarEmbedding;
use crate::error::{invalid, Error, Result};
use crate::forms::{Carrier, Cochain};
use crate::holomorphic::check_holomorphic_form;
use crate::mesh::{Dart, DoubleMap, TripleFace, TripleGraph};
use crate::real::{from_c64, to_c64};
use crate::{Real, C};

/// Tolerance for deciding that a phase is `±1`.
pub const PHASE_TOLERANCE: f64 = 1e-9;

/// An equivariant function on `Υ′`: `values[2ξ + s]` is the value at the
/// lift of `ξ` on sheet `s`, with `values[2ξ + 1] = −values[2ξ]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spinor<T> {
    pub values: Vec<C<T>>,
}

impl<T: Real> Spinor<T> {
    /// Spinor with the given values on sheet 0.
    pub fn from_sheet(values: &[C<T>]) -> Self {
        Spinor { values: values.iter().flat_map(|&z| [z, -z]).collect() }
    }

    pub fn at(&self, xi: usize, sheet: bool) -> C<T> {
        self.values[2 * xi + sheet as usize]
    }

    pub fn n_base(&self) -> usize {
        self.values.len() / 2
    }

    pub fn conj(&self) -> Self {
        Spinor { values: self.values.iter().map(|z| z.conj()).collect() }
    }

    /// First base vertex where the two lifts are not opposite.
    pub fn equivariance_violation(&self) -> Option<usize> {
        (0..self.n_base()).find(|&x| self.values[2 * x + 1] != -self.values[2 * x])
    }

    fn check(&self, spin: &SpinStructure) -> Result<()> {
        if self.values.len() != 2 * spin.triple.n_vertices() {
            return invalid(format!(
                "malformed spinor: {} values for {} vertices of Υ′",
                self.values.len(),
                2 * spin.triple.n_vertices()
            ));
        }
        if let Some(x) = self.equivariance_violation() {
            return invalid(format!("malformed spinor: the lifts of vertex {x} are not opposite"));
        }
        Ok(())
    }

    /// Same spinor seen on an isomorphic cover, through the sheet
    /// relabelling returned by [`SpinStructure::gauge_to`].
    pub fn regauge(&self, gauge: &[bool]) -> Self {
        let values =
            (0..self.n_base()).flat_map(|x| if gauge[x] { [self.at(x, true), self.at(x, false)] } else { [self.at(x, false), self.at(x, true)] });
        Spinor { values: values.collect() }
    }
}

/// Half angle `φ(a)/2` on every `Υ` edge, counted positively in its own
/// direction, which turns counterclockwise around its quad. `φ(a)` is the
/// rhombus angle at the corner, `2 arctan ρ(a)` for the crossed diagonal.
pub fn half_angles<T: Real>(lam: &DoubleMap<T>) -> Vec<f64> {
    let triple = TripleGraph::build(lam);
    triple.crossing.iter().map(|&a| lam.edge_rho(a).to_f64_().atan()).collect()
}

/// Why a map carries no Dirac spinor.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DiracWitness {
    /// `exp(i Σ φ/2)` around the vertex is not `−1`: the cone angle is not
    /// `2π` modulo `4π`.
    Vertex { vertex: usize, phase: Complex64 },
    /// A cycle of `Υ` along which the half angles do not add up to a
    /// multiple of `π`.
    Cycle { darts: Vec<Dart>, holonomy: Complex64 },
}

/// Propagates `exp(i Σ θ)` from `base`. With a given structure the sheets
/// are those of the structure; otherwise tree edges stay on their sheet and
/// the cover is read off the remaining edges.
fn propagate<T: Real>(
    lam: &DoubleMap<T>,
    base: usize,
    structure: Option<&SpinStructure>,
) -> std::result::Result<(SpinStructure, Spinor<T>), DiracWitness> {
    let triple = structure.map_or_else(|| TripleGraph::build(lam), |s| s.triple.clone());
    let theta = half_angles(lam);
    let cx = &triple.complex;
    let tree = Tree::new(&triple, base);
    let flip = |e: usize| structure.is_some_and(|s| s.lift[e]);
    let mut angle = vec![0.0f64; triple.n_vertices()];
    for &v in &tree.order {
        if let Some((p, d)) = tree.parent(v) {
            let t = if d.forward { theta[d.edge] } else { -theta[d.edge] };
            angle[v] = angle[p] + t + if flip(d.edge) { PI } else { 0.0 };
        }
    }
    let mut lift = vec![false; cx.n_edges()];
    for (e, &[a, b]) in cx.edges.iter().enumerate() {
        if tree.in_tree[e] {
            continue;
        }
        let gap = angle[a] + theta[e] + if flip(e) { PI } else { 0.0 } - angle[b];
        let h = Complex64::from_polar(1.0, gap);
        if (h - 1.0).norm() <= PHASE_TOLERANCE {
            lift[e] = false;
        } else if structure.is_none() && (h + 1.0).norm() <= PHASE_TOLERANCE {
            lift[e] = true;
        } else {
            let darts = tree.cycle(&triple, e);
            let holonomy = darts
                .iter()
                .map(|d| {
                    let t = if d.forward { theta[d.edge] } else { -theta[d.edge] };
                    Complex64::from_polar(1.0, t + if flip(d.edge) { PI } else { 0.0 })
                })
                .product();
            return Err(DiracWitness::Cycle { darts, holonomy });
        }
    }
    let spin = match structure {
        Some(s) => s.clone(),
        None => SpinStructure::from_lift(&triple, lift),
    };
    let values: Vec<C<T>> = angle.iter().map(|&t| from_c64(Complex64::from_polar(1.0, t))).collect();
    Ok((spin, Spinor::from_sheet(&values)))
}

/// Builds the Dirac spinor `ζ(ξ) = exp(i Σ_γ θ)` with `ζ(ξ₀) = 1` on sheet 0
/// of `base`. Without a structure, the cover is the one the spinor
/// defines.
pub fn construct_dirac_spinor<T: Real>(
    lam: &DoubleMap<T>,
    base: usize,
    structure: Option<&SpinStructure>,
) -> Result<(SpinStructure, Spinor<T>)> {
    let triple = structure.map_or_else(|| TripleGraph::build(lam), |s| s.triple.clone());
    if base >= triple.n_vertices() {
        return invalid(format!("base vertex {base} of Υ does not exist"));
    }
    if let Some(w) = face_witness(lam, &triple) {
        return Err(Error::Precondition(format!("no Dirac spinor: {}", describe(&w))));
    }
    propagate(lam, base, structure).map_err(|w| Error::Precondition(format!("no Dirac spinor: {}", describe(&w))))
}

fn describe(w: &DiracWitness) -> String {
    match w {
        DiracWitness::Vertex { vertex, phase } => {
            format!("the half angles around vertex {vertex} give the phase {phase:.6} instead of −1")
        }
        DiracWitness::Cycle { darts, holonomy } => {
            format!("a cycle of {} edges of Υ has holonomy {holonomy:.6}", darts.len())
        }
    }
}

/// First `Υ` face around which the half angles do not add up to `π`
/// modulo `2π`. Faces inside quads always pass.
fn face_witness<T: Real>(lam: &DoubleMap<T>, triple: &TripleGraph) -> Option<DiracWitness> {
    let theta = half_angles(lam);
    triple.complex.faces.iter().zip(&triple.face_kind).find_map(|(face, kind)| {
        let sum: f64 = face.iter().map(|d| if d.forward { theta[d.edge] } else { -theta[d.edge] }).sum();
        let phase = Complex64::from_polar(1.0, sum);
        match kind {
            TripleFace::Vertex(v) if (phase + 1.0).norm() > PHASE_TOLERANCE => {
                Some(DiracWitness::Vertex { vertex: *v, phase })
            }
            _ => None,
        }
    })
}

/// Maximum residuals of the spin symmetry `ζ(ξ₃⁺) = iζ(ξ₁⁺)` and of the
/// Dotsenko equation `ζ(ξ₁⁺) = √(1+ρ(a)²) ζ(ξ₂⁺) − ρ(a) ζ(ξ₃⁺)` over every
/// quad and every starting side `ξ₁`, `a` being the diagonal crossed from
/// `ξ₁` to `ξ₂`.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct DiracResidual {
    pub symmetry: f64,
    pub dotsenko: f64,
}

impl DiracResidual {
    pub fn is_dirac(&self, tol: f64) -> bool {
        self.symmetry <= tol && self.dotsenko <= tol
    }
}

/// Values `ζ(ξ₁⁺), ζ(ξ₂⁺), ζ(ξ₃⁺)` along quad `i` from side `k`, with the
/// diagonal crossed between the first two.
fn lifted_triple<T: Real>(
    lam: &DoubleMap<T>,
    spin: &SpinStructure,
    z: &Spinor<T>,
    i: usize,
    k: usize,
) -> ([Complex64; 3], usize) {
    let s = lam.diamond().sides[i];
    let e12 = 4 * i + (k + 1) % 4;
    let e23 = 4 * i + (k + 2) % 4;
    let l2 = spin.lift[e12];
    let l3 = l2 ^ spin.lift[e23];
    let vals = [z.at(s[k], false), z.at(s[(k + 1) % 4], l2), z.at(s[(k + 2) % 4], l3)].map(to_c64);
    (vals, spin.triple.crossing[e12])
}

pub fn dirac_residual<T: Real>(lam: &DoubleMap<T>, spin: &SpinStructure, z: &Spinor<T>) -> Result<DiracResidual> {
    z.check(spin)?;
    if spin.triple.crossing.len() != 4 * lam.m() {
        return invalid("the spin structure belongs to another map");
    }
    let i_unit = Complex64::new(0.0, 1.0);
    let mut out = DiracResidual { symmetry: 0.0, dotsenko: 0.0 };
    for i in 0..lam.m() {
        for k in 0..4 {
            let ([z1, z2, z3], a) = lifted_triple(lam, spin, z, i, k);
            let rho = lam.edge_rho(a).to_f64_();
            out.symmetry = out.symmetry.max((z3 - i_unit * z1).norm());
            out.dotsenko = out.dotsenko.max((z1 - (1.0 + rho * rho).sqrt() * z2 + rho * z3).norm());
        }
    }
    Ok(out)
}

/// One Dotsenko step: `ζ(ξ₃)` from `ζ(ξ₁)`, `ζ(ξ₂)`.
pub fn dotsenko_step(rho: f64, z1: Complex64, z2: Complex64) -> Complex64 {
    ((1.0 + rho * rho).sqrt() * z2 - z1) / rho
}

/// Outcome of [`dirac_exists`].
#[derive(Clone, Debug)]
pub enum DiracOutcome<T> {
    Spinor { spin: SpinStructure, spinor: Spinor<T>, report: DiracReport },
    Witness(DiracWitness),
}

/// Checks made on the way to a Dirac spinor.
#[derive(Clone, Debug, Serialize)]
pub struct DiracReport {
    /// `max |φ(a) + φ(a*) − π|`.
    pub rhombus_defect: f64,
    /// `max |exp(i Σ_{a∋v} φ(a)/2) + 1|` over inner vertices.
    pub vertex_defect: f64,
    pub residual: DiracResidual,
    /// `max ||ζ| − 1|`.
    pub modulus_defect: f64,
}

/// Looks for a Dirac spinor. The angles come from
/// `exp(iφ(a)/2) = (ρ(a*) + i)/√(1 + ρ(a*)²)`; the spinor exists when every
/// inner vertex has `exp(i Σ φ/2) = −1` and every cycle of `Υ` has
/// holonomy `±1`, and is then unique up to a constant.
pub fn dirac_exists<T: Real>(lam: &DoubleMap<T>) -> Result<DiracOutcome<T>> {
    let triple = TripleGraph::build(lam);
    if triple.n_vertices() == 0 {
        return invalid("the map has no quads");
    }
    let m = lam.m();
    let phi = |a: usize| {
        let r = lam.edge_rho(lam.dual_edge(a).0).to_f64_();
        2.0 * (Complex64::new(r, 1.0) / (1.0 + r * r).sqrt()).arg()
    };
    let rhombus_defect = (0..m).map(|i| (phi(i) + phi(i + m) - PI).abs()).fold(0.0, f64::max);
    if let Some(w) = face_witness(lam, &triple) {
        return Ok(DiracOutcome::Witness(w));
    }
    let theta = half_angles(lam);
    let vertex_defect = triple
        .complex
        .faces
        .iter()
        .zip(&triple.face_kind)
        .filter(|(_, k)| matches!(k, TripleFace::Vertex(_)))
        .map(|(face, _)| {
            let sum: f64 = face.iter().map(|d| if d.forward { theta[d.edge] } else { -theta[d.edge] }).sum();
            (Complex64::from_polar(1.0, sum) + 1.0).norm()
        })
        .fold(0.0, f64::max);
    match propagate(lam, 0, None) {
        Err(w) => Ok(DiracOutcome::Witness(w)),
        Ok((spin, spinor)) => {
            let residual = dirac_residual(lam, &spin, &spinor)?;
            let modulus_defect = spinor.values.iter().map(|z| (to_c64(*z).norm() - 1.0).abs()).fold(0.0, f64::max);
            let report = DiracReport { rhombus_defect, vertex_defect, residual, modulus_defect };
            Ok(DiracOutcome::Spinor { spin, spinor, report })
        }
    }
}

/// `d_Υ ζζ′` averaged onto `Λ`: on each edge, half the sum of the
/// increments of `ζζ′` along the two `Υ` edges parallel to it.
pub fn spinor_form<T: Real>(
    lam: &DoubleMap<T>,
    spin: &SpinStructure,
    z: &Spinor<T>,
    zp: &Spinor<T>,
) -> Result<Cochain<T>> {
    z.check(spin)?;
    zp.check(spin)?;
    let m = lam.m();
    let p = |xi: usize| to_c64(z.at(xi, false) * zp.at(xi, false));
    let mut values = vec![T::zero_c(); 2 * m];
    for i in 0..m {
        let s = lam.diamond().sides[i];
        let [p0, p1, p2, p3] = s.map(p);
        values[i] = from_c64(((p1 - p0) + (p2 - p3)) * 0.5);
        values[i + m] = from_c64(((p3 - p0) + (p2 - p1)) * 0.5);
    }
    Ok(Cochain::new(1, Carrier::Lambda, values))
}

/// The form `d_Υ ζζ′` with the predictions made from the equations the
/// spinors satisfy, and the measured closedness and type.
#[derive(Clone, Debug)]
pub struct SpinorForm<T> {
    pub form: Cochain<T>,
    pub residuals: [DiracResidual; 2],
    /// Each spinor satisfies the spin symmetry or the Dotsenko equation.
    pub predicted_closed: bool,
    /// `ζ` is a Dirac spinor and `ζ′` satisfies the Dotsenko equation.
    pub predicted_holomorphic: bool,
    pub closed_residual: f64,
    pub type_residual: f64,
}

pub fn classify_spinor_form<T: Real>(
    lam: &DoubleMap<T>,
    spin: &SpinStructure,
    z: &Spinor<T>,
    zp: &Spinor<T>,
    tol: f64,
) -> Result<SpinorForm<T>> {
    let form = spinor_form(lam, spin, z, zp)?;
    let r = [dirac_residual(lam, spin, z)?, dirac_residual(lam, spin, zp)?];
    let one = |r: &DiracResidual| r.symmetry <= tol || r.dotsenko <= tol;
    let rep = check_holomorphic_form(lam, &form, &[])?;
    Ok(SpinorForm {
        predicted_closed: one(&r[0]) && one(&r[1]),
        predicted_holomorphic: r[0].is_dirac(tol) && r[1].dotsenko <= tol,
        residuals: r,
        closed_residual: rep.closed_residual,
        type_residual: rep.type_residual,
        form,
    })
}

/// `ᵗA diag(1, −1) A − diag(1, −1)` for a transfer matrix `A` acting on
/// `(ζ(ξ₄), ζ(ξ₁))`; it vanishes exactly when products of two solutions
/// give closed forms.
pub fn closing_defect(a: [[Complex64; 2]; 2]) -> f64 {
    let j = [1.0, -1.0];
    let mut worst = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            let v: Complex64 = (0..2).map(|k| a[k][r] * j[k] * a[k][c]).sum();
            let target = if r == c { j[r] } else { 0.0 };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

/// The transfer matrices `[[ε√(1+λ²), λ], [ελ, √(1+λ²)]]` solving the
/// closing condition.
pub fn transfer_matrix(lambda: Complex64, eps: f64, root: Complex64) -> [[Complex64; 2]; 2] {
    [[root * eps, lambda], [lambda * eps, root]]
}

/// A basis of the solutions of the Dotsenko equation on the given cover,
/// from the null space of the real linear system.
pub fn dotsenko_solutions<T: Real>(lam: &DoubleMap<T>, spin: &SpinStructure) -> Result<Vec<Spinor<T>>> {
    let n = spin.triple.n_vertices();
    let m = lam.m();
    let mut a = DMatrix::<f64>::zeros((4 * m).max(n), n);
    for i in 0..m {
        let s = lam.diamond().sides[i];
        for k in 0..4 {
            let e12 = 4 * i + (k + 1) % 4;
            let e23 = 4 * i + (k + 2) % 4;
            let l2 = if spin.lift[e12] { -1.0 } else { 1.0 };
            let l3 = if spin.lift[e12] ^ spin.lift[e23] { -1.0 } else { 1.0 };
            let rho = lam.edge_rho(spin.triple.crossing[e12]).to_f64_();
            let row = 4 * i + k;
            a[(row, s[k])] += 1.0;
            a[(row, s[(k + 1) % 4])] -= (1.0 + rho * rho).sqrt() * l2;
            a[(row, s[(k + 2) % 4])] += rho * l3;
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Numerical("singular value decomposition failed".into()))?;
    let smax = svd.singular_values.max();
    Ok((0..svd.singular_values.len())
        .filter(|&r| svd.singular_values[r] <= 1e-10 * smax)
        .map(|r| {
            let vals: Vec<C<T>> = (0..n).map(|x| T::c(vt[(r, x)], 0.0)).collect();
            Spinor::from_sheet(&vals)
        })
        .collect())
}

/// `λ` in `α = λ dW` (mean over the edges) and the spread
/// `max |α(a)/dW(a) − λ| / |λ|`. With `mirrored` false `W = Z`; otherwise
/// `W` is the flat coordinate of the reflected embedding, `dW(e) = conj dZ(e)`
/// and `dW(e*) = −conj dZ(e*)`, which is the coordinate `d_Υ ζζ` follows for a
/// Dirac spinor `ζ`.
pub fn dz_ratio<T: Real>(
    lam: &DoubleMap<T>,
    emb: &PlanarEmbedding<T>,
    form: &Cochain<T>,
    mirrored: bool,
) -> (Complex64, f64) {
    let m = lam.m();
    let dz = emb.dz(lam);
    let dw = |a: usize| {
        let d = to_c64(dz.values[a]);
        match (mirrored, a < m) {
            (false, _) => d,
            (true, true) => d.conj(),
            (true, false) => -d.conj(),
        }
    };
    let ratios: Vec<Complex64> = form.values.iter().enumerate().map(|(a, &v)| to_c64(v) / dw(a)).collect();
    let mean = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max) / mean.norm();
    (mean, spread)
}
