//! Discrete forms on the double `Λ` and on the diamond `◇`.
//!
//! A `k`-form is a complex value per `k`-cell, stored in the cell order of
//! its carrier complex (see [`crate::mesh`]).

mod diamond;

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use diamond::{
    average, average_matrix, hetero_wedge, mul, wedge, AverageInverse,
};

use crate::error::{Error, Result};
use crate::mesh::{CellComplex, DoubleMap};
use crate::{Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Carrier {
    Lambda,
    Diamond,
}

/// A complex-valued cochain of a given degree on `Λ` or `◇`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain<T> {
    pub degree: usize,
    pub carrier: Carrier,
    pub values: Vec<C<T>>,
}

/// Number of `degree`-cells of a carrier.
pub fn cell_count<T: Real>(lam: &DoubleMap<T>, degree: usize, carrier: Carrier) -> usize {
    match (carrier, degree) {
        (_, 0) => lam.n_vertices(),
        (Carrier::Lambda, 1) => lam.n_edges(),
        (Carrier::Lambda, 2) => lam.n_faces(),
        (Carrier::Diamond, 1) => lam.diamond().n_edges(),
        (Carrier::Diamond, 2) => lam.diamond().n_faces(),
        _ => 0,
    }
}

impl<T: Real> Cochain<T> {
    pub fn new(degree: usize, carrier: Carrier, values: Vec<C<T>>) -> Self {
        Cochain { degree, carrier, values }
    }

    pub fn zeros(lam: &DoubleMap<T>, degree: usize, carrier: Carrier) -> Self {
        Cochain::new(degree, carrier, vec![T::zero_c(); cell_count(lam, degree, carrier)])
    }

    /// Function on `Λ` vertices.
    pub fn function(values: Vec<C<T>>) -> Self {
        Cochain::new(0, Carrier::Lambda, values)
    }

    pub fn lambda(degree: usize, values: Vec<C<T>>) -> Self {
        Cochain::new(degree, Carrier::Lambda, values)
    }

    pub fn diamond(degree: usize, values: Vec<C<T>>) -> Self {
        Cochain::new(degree, Carrier::Diamond, values)
    }

    /// Checks degree range and length against the map.
    pub fn check(&self, lam: &DoubleMap<T>) -> Result<()> {
        if self.degree > 2 {
            return Err(Error::Degree(format!("no {}-cells on a surface", self.degree)));
        }
        let n = cell_count(lam, self.degree, self.carrier);
        if self.values.len() != n {
            return Err(Error::InvalidInput(format!(
                "{:?} {}-cochain has {} values, expected {}",
                self.carrier,
                self.degree,
                self.values.len(),
                n
            )));
        }
        Ok(())
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree || self.carrier != other.carrier {
            return Err(Error::Degree(format!(
                "cannot combine a {:?} {}-form with a {:?} {}-form",
                self.carrier, self.degree, other.carrier, other.degree
            )));
        }
        if self.values.len() != other.values.len() {
            return Err(Error::InvalidInput("cochains live on different maps".into()));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    fn zip(&self, other: &Self, f: impl Fn(C<T>, C<T>) -> C<T>) -> Self {
        Cochain::new(
            self.degree,
            self.carrier,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Cochain::new(self.degree, self.carrier, self.values.iter().map(|&a| f(a)).collect())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        self.map(|a| a * s)
    }

    pub fn conj(&self) -> Self {
        self.map(|a| a.conj())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Largest entrywise difference; `∞` when shapes differ.
    pub fn max_diff(&self, other: &Self) -> T {
        if self.same_shape(other).is_err() {
            return T::infinity();
        }
        self.values.iter().zip(&other.values).map(|(a, b)| (*a - *b).norm()).fold(T::zero(), T::max)
    }
}

impl<T: Real> Add for &Cochain<T> {
    type Output = Cochain<T>;
    fn add(self, rhs: Self) -> Cochain<T> {
        self.try_add(rhs).expect("matching cochains")
    }
}

impl<T: Real> Sub for &Cochain<T> {
    type Output = Cochain<T>;
    fn sub(self, rhs: Self) -> Cochain<T> {
        self.try_sub(rhs).expect("matching cochains")
    }
}

impl<T: Real> Neg for &Cochain<T> {
    type Output = Cochain<T>;
    fn neg(self) -> Cochain<T> {
        self.map(|a| -a)
    }
}

impl<T: Real> Mul<C<T>> for &Cochain<T> {
    type Output = Cochain<T>;
    fn mul(self, rhs: C<T>) -> Cochain<T> {
        self.scale(rhs)
    }
}

fn coboundary_on<T: Real>(c: &CellComplex, values: &[C<T>], degree: usize) -> Vec<C<T>> {
    match degree {
        0 => c.edges.iter().map(|&[t, h]| values[h] - values[t]).collect(),
        _ => c
            .faces
            .iter()
            .map(|f| {
                f.iter().fold(T::zero_c(), |acc, d| {
                    if d.forward {
                        acc + values[d.edge]
                    } else {
                        acc - values[d.edge]
                    }
                })
            })
            .collect(),
    }
}

/// Coboundary `d`, on `Λ` or on `◇`.
pub fn d<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>) -> Result<Cochain<T>> {
    a.check(lam)?;
    if a.degree == 2 {
        return Err(Error::Degree("d of a 2-form vanishes identically on a surface".into()));
    }
    let complex = match a.carrier {
        Carrier::Lambda => None,
        Carrier::Diamond => Some(&lam.diamond().complex),
    };
    let values = match complex {
        Some(c) => coboundary_on(c, &a.values, a.degree),
        None if a.degree == 0 => {
            (0..lam.n_edges()).map(|e| {
                let [t, h] = lam.edge_ends(e);
                a.values[h] - a.values[t]
            })
            .collect()
        }
        None => lam
            .faces()
            .iter()
            .map(|f| {
                f.iter().fold(T::zero_c(), |acc, d| {
                    if d.forward {
                        acc + a.values[d.edge]
                    } else {
                        acc - a.values[d.edge]
                    }
                })
            })
            .collect(),
    };
    Ok(Cochain::new(a.degree + 1, a.carrier, values))
}

fn require_lambda<T>(a: &Cochain<T>, op: &str) -> Result<()> {
    if a.carrier != Carrier::Lambda {
        return Err(Error::Degree(format!("{op} is defined on Λ-forms only")));
    }
    Ok(())
}

/// Hodge star. On 1-forms `(*α)(e) = −α(e*)/ρ(e)` and `(*α)(e*) = ρ(e) α(e)`,
/// so that `** = −1`; functions map to the dual faces and back, boundary
/// vertices (without a dual face) receiving zero.
pub fn star<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>) -> Result<Cochain<T>> {
    require_lambda(a, "the Hodge star")?;
    a.check(lam)?;
    let m = lam.m();
    let values = match a.degree {
        0 => (0..lam.n_faces()).map(|f| a.values[lam.face_center(f)]).collect(),
        1 => (0..2 * m)
            .map(|e| {
                if e < m {
                    -a.values[e + m] / lam.rho()[e]
                } else {
                    a.values[e - m] * lam.rho()[e - m]
                }
            })
            .collect(),
        _ => (0..lam.n_vertices())
            .map(|v| lam.vertex_face(v).map_or(T::zero_c(), |f| a.values[f]))
            .collect(),
    };
    Ok(Cochain::lambda(2 - a.degree, values))
}

/// `d* = −*d*`, the formal adjoint of `d` for the weighted inner product.
pub fn codifferential<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>) -> Result<Cochain<T>> {
    if a.degree == 0 {
        return Err(Error::Degree("codifferential of a function vanishes".into()));
    }
    let s = star(lam, a)?;
    let ds = d(lam, &s)?;
    Ok(-&star(lam, &ds)?)
}

/// Laplacian `Δ = −d*d* − *d*d`; on functions `(Δf)(x) = Σ ρ (f(x) − f(y))`.
pub fn laplacian<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>) -> Result<Cochain<T>> {
    let mut out = Cochain::zeros(lam, a.degree, Carrier::Lambda);
    if a.degree < 2 {
        out = &out + &codifferential(lam, &d(lam, a)?)?;
    }
    if a.degree > 0 {
        out = &out + &d(lam, &codifferential(lam, a)?)?;
    }
    Ok(out)
}

/// Type decomposition of 1-forms: `π^{1,0} = (1 + i*)/2`, `π^{0,1} = (1 − i*)/2`.
/// A 1-form is of type `(1,0)` exactly when `*α = −iα`.
pub fn type_project<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>, holomorphic_part: bool) -> Result<Cochain<T>> {
    if a.degree != 1 {
        return Err(Error::Degree(format!("type projection of a {}-form", a.degree)));
    }
    let s = star(lam, a)?;
    let half = T::lit(0.5);
    let sign = if holomorphic_part { T::one() } else { -T::one() };
    let i = T::i_c() * sign;
    Ok(Cochain::lambda(
        1,
        a.values.iter().zip(&s.values).map(|(&x, &y)| (x + i * y) * half).collect(),
    ))
}

/// `d'` and `d''`: on functions `π^{1,0} d` and `π^{0,1} d`, on 1-forms
/// `d π^{0,1}` and `d π^{1,0}`, so that `d = d' + d''`.
pub fn d_prime<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>) -> Result<Cochain<T>> {
    split_d(lam, a, true)
}

pub fn d_double_prime<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>) -> Result<Cochain<T>> {
    split_d(lam, a, false)
}

fn split_d<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>, prime: bool) -> Result<Cochain<T>> {
    require_lambda(a, "d' and d''")?;
    match a.degree {
        0 => type_project(lam, &d(lam, a)?, prime),
        1 => d(lam, &type_project(lam, a, !prime)?),
        _ => Err(Error::Degree("d' of a 2-form".into())),
    }
}

/// `ε = +1` on `Γ`, `−1` on `Γ*`.
pub fn epsilon<T: Real>(lam: &DoubleMap<T>) -> Cochain<T> {
    Cochain::function(
        (0..lam.n_vertices()).map(|v| C::new(T::from(lam.epsilon(v)).unwrap(), T::zero())).collect(),
    )
}

/// Weighted `L²` product: `Σ ρ(a) α(a) β(a)̄` on 1-forms, plain sums on
/// functions and 2-forms.
pub fn inner_product<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>, b: &Cochain<T>) -> Result<C<T>> {
    require_lambda(a, "the inner product")?;
    a.check(lam)?;
    a.same_shape(b)?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .enumerate()
        .map(|(k, (x, y))| {
            let w = if a.degree == 1 { lam.edge_rho(k) } else { T::one() };
            x * y.conj() * w
        })
        .fold(T::zero_c(), |s, z| s + z))
}

pub fn norm<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>) -> Result<T> {
    Ok(inner_product(lam, a, a)?.re.max(T::zero()).sqrt())
}

/// Pointwise product on `Λ` of a function with a function or 2-form (the
/// 2-form value on `F` is multiplied by `f` at the center of `F`).
pub fn lambda_mul<T: Real>(lam: &DoubleMap<T>, f: &Cochain<T>, a: &Cochain<T>) -> Result<Cochain<T>> {
    require_lambda(f, "pointwise product")?;
    require_lambda(a, "pointwise product")?;
    if f.degree != 0 {
        return Err(Error::Degree("left factor must be a function".into()));
    }
    f.check(lam)?;
    a.check(lam)?;
    let values = match a.degree {
        0 => f.values.iter().zip(&a.values).map(|(x, y)| x * y).collect(),
        2 => (0..lam.n_faces()).map(|k| f.values[lam.face_center(k)] * a.values[k]).collect(),
        _ => return Err(Error::Degree("functions act on Λ 1-forms through the diamond".into())),
    };
    Ok(Cochain::lambda(a.degree, values))
}

/// Sum of a 2-form over all faces.
pub fn integrate<T: Real>(a: &Cochain<T>) -> C<T> {
    a.values.iter().fold(T::zero_c(), |s, &z| s + z)
}

/// Matrix of `d` on `Λ` from `degree`-forms, rows indexed by the
/// `(degree+1)`-cells.
pub fn coboundary_matrix<T: Real>(lam: &DoubleMap<T>, degree: usize) -> crate::linalg::CMat {
    use num_complex::Complex64;
    let one = Complex64::new(1.0, 0.0);
    match degree {
        0 => {
            let mut a = crate::linalg::CMat::zeros(lam.n_edges(), lam.n_vertices());
            for e in 0..lam.n_edges() {
                let [t, h] = lam.edge_ends(e);
                a[(e, h)] += one;
                a[(e, t)] -= one;
            }
            a
        }
        _ => {
            let mut a = crate::linalg::CMat::zeros(lam.n_faces(), lam.n_edges());
            for (f, face) in lam.faces().iter().enumerate() {
                for dt in face {
                    a[(f, dt.edge)] += one * f64::from(dt.sign());
                }
            }
            a
        }
    }
}

/// Diagonal weights of the inner product on `degree`-forms.
pub fn weights<T: Real>(lam: &DoubleMap<T>, degree: usize) -> Vec<f64> {
    match degree {
        1 => (0..lam.n_edges()).map(|e| lam.edge_rho(e).to_f64_()).collect(),
        0 => vec![1.0; lam.n_vertices()],
        _ => vec![1.0; lam.n_faces()],
    }
}
