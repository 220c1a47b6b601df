use num_complex::Complex64;

use super::{Carrier, Cochain};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::mesh::DoubleMap;
use crate::real::{from_c64, to_c64};
use crate::{Real, C};

fn require<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>, carrier: Carrier, what: &str) -> Result<()> {
    a.check(lam)?;
    if a.carrier != carrier && a.degree != 0 {
        return Err(Error::Degree(format!("{what} expects {carrier:?} forms")));
    }
    Ok(())
}

/// Values of a `◇` 1-form along the counterclockwise boundary of quad `i`,
/// starting with the side `x → y_R`.
fn boundary_values<T: Real>(lam: &DoubleMap<T>, a: &[C<T>], i: usize) -> [C<T>; 4] {
    let s = lam.diamond().sides[i];
    [a[s[0]], -a[s[1]], a[s[2]], -a[s[3]]]
}

/// Averaging map `A` from `◇` forms to `Λ` forms. On an edge `(x, x')` it
/// takes the mean over the two diamond paths from `x` to `x'`; on a face it
/// takes half the sum over the quads around the face center.
pub fn average<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>) -> Result<Cochain<T>> {
    require(lam, a, Carrier::Diamond, "the average map")?;
    let m = lam.m();
    let half = T::lit(0.5);
    let values = match a.degree {
        0 => a.values.clone(),
        1 => {
            let mut out = vec![T::zero_c(); 2 * m];
            for i in 0..m {
                let s = lam.diamond().sides[i];
                let [a0, a1, a2, a3] = [a.values[s[0]], a.values[s[1]], a.values[s[2]], a.values[s[3]]];
                out[i] = (a0 - a1 + a3 - a2) * half;
                out[i + m] = (a3 - a0 + a2 - a1) * half;
            }
            out
        }
        _ => lam
            .faces()
            .iter()
            .map(|f| f.iter().fold(T::zero_c(), |s, d| s + a.values[d.edge % m]) * half)
            .collect(),
    };
    Ok(Cochain::lambda(a.degree, values))
}

/// Matrix of `A` on 1-forms, rows indexed by `Λ` edges.
pub fn average_matrix<T: Real>(lam: &DoubleMap<T>) -> CMat {
    let m = lam.m();
    let mut a = CMat::zeros(2 * m, lam.diamond().n_edges());
    let h = Complex64::new(0.5, 0.0);
    for i in 0..m {
        let s = lam.diamond().sides[i];
        for (k, (ce, cs)) in [(1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)].iter().enumerate() {
            a[(i, s[k])] += h * *ce;
            a[(i + m, s[k])] += h * *cs;
        }
    }
    a
}

/// A right inverse `B` of the average map on 1-forms, realized as the
/// Moore–Penrose pseudo-inverse, together with a basis of `ker A`.
#[derive(Clone, Debug)]
pub struct AverageInverse {
    pinv: CMat,
    pub kernel: Vec<CVec>,
    /// `‖A B − 1‖_max`; zero (to rounding) when `A` is onto.
    pub residual: f64,
}

impl AverageInverse {
    pub fn new<T: Real>(lam: &DoubleMap<T>) -> Result<Self> {
        let a = average_matrix(lam);
        let pinv = linalg::pinv(&a, 1e-12)?;
        let (kernel, _) = linalg::null_space(&a, 1e-10);
        let ab = &a * &pinv;
        let n = ab.nrows();
        let residual = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (ab[(i, j)] - if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).norm())
            .fold(0.0, f64::max);
        Ok(AverageInverse { pinv, kernel, residual })
    }

    /// Lifts a `Λ` 1-form to a `◇` 1-form, optionally shifted by a kernel
    /// element with the given coefficients.
    pub fn apply<T: Real>(&self, a: &Cochain<T>, kernel_shift: &[C<T>]) -> Result<Cochain<T>> {
        if a.degree != 1 || a.carrier != Carrier::Lambda || a.values.len() != self.pinv.ncols() {
            return Err(Error::Degree("B acts on Λ 1-forms".into()));
        }
        let v = CVec::from_iterator(a.values.len(), a.values.iter().map(|&z| to_c64(z)));
        let mut out = &self.pinv * v;
        for (c, k) in kernel_shift.iter().zip(&self.kernel) {
            out += k * to_c64(*c);
        }
        Ok(Cochain::diamond(1, out.iter().map(|&z| from_c64(z)).collect()))
    }
}

/// Exterior product of two `◇` 1-forms: on a quad `(x₁, …, x₄)`,
/// `¼ Σ_k [α(x_{k−1}x_k) β(x_k x_{k+1}) − α(x_{k+1}x_k) β(x_k x_{k−1})]`.
pub fn wedge<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>, b: &Cochain<T>) -> Result<Cochain<T>> {
    require(lam, a, Carrier::Diamond, "the wedge product")?;
    require(lam, b, Carrier::Diamond, "the wedge product")?;
    if a.degree != 1 || b.degree != 1 {
        return Err(Error::Degree("wedge is implemented for pairs of 1-forms".into()));
    }
    let q = T::lit(0.25);
    let values = (0..lam.m())
        .map(|i| {
            let av = boundary_values(lam, &a.values, i);
            let bv = boundary_values(lam, &b.values, i);
            (0..4).fold(T::zero_c(), |s, k| {
                let p = (k + 3) % 4;
                s + av[p] * bv[k] - av[k] * bv[p]
            }) * q
        })
        .collect();
    Ok(Cochain::diamond(2, values))
}

/// Product of a function with a `◇` form: pointwise on functions, by the
/// endpoint mean on edges and the corner mean on quads.
pub fn mul<T: Real>(lam: &DoubleMap<T>, f: &Cochain<T>, a: &Cochain<T>) -> Result<Cochain<T>> {
    if f.degree != 0 {
        return Err(Error::Degree("left factor must be a function".into()));
    }
    f.check(lam)?;
    require(lam, a, Carrier::Diamond, "function·form")?;
    let dia = lam.diamond();
    let half = T::lit(0.5);
    let values = match a.degree {
        0 => f.values.iter().zip(&a.values).map(|(x, y)| x * y).collect(),
        1 => dia
            .complex
            .edges
            .iter()
            .zip(&a.values)
            .map(|(&[x, y], &v)| (f.values[x] + f.values[y]) * half * v)
            .collect(),
        _ => dia
            .corners
            .iter()
            .zip(&a.values)
            .map(|(c, &v)| c.iter().fold(T::zero_c(), |s, &x| s + f.values[x]) * T::lit(0.25) * v)
            .collect(),
    };
    Ok(Cochain::new(a.degree, if a.degree == 0 { f.carrier } else { Carrier::Diamond }, values))
}

/// `α ∧ β` for `Λ` 1-forms, as a `◇` 2-form: `α(e)β(e*) − α(e*)β(e)`.
pub fn hetero_wedge<T: Real>(lam: &DoubleMap<T>, a: &Cochain<T>, b: &Cochain<T>) -> Result<Cochain<T>> {
    for x in [a, b] {
        x.check(lam)?;
        if x.degree != 1 || x.carrier != Carrier::Lambda {
            return Err(Error::Degree("heterogeneous wedge expects Λ 1-forms".into()));
        }
    }
    let m = lam.m();
    Ok(Cochain::diamond(
        2,
        (0..m).map(|i| a.values[i] * b.values[i + m] - a.values[i + m] * b.values[i]).collect(),
    ))
}
