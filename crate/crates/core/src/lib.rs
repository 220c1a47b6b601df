//! Discrete Riemann surfaces on double cellular decompositions.
//!
//! A cellular decomposition `Γ` of an oriented surface, its dual `Γ*` and the
//! ratios `ρ(e) = ℓ(e*)/ℓ(e)` form a discrete conformal structure. On top of
//! it this crate provides discrete exterior calculus (coboundary, Hodge star,
//! wedge products on the diamond), harmonic and holomorphic analysis,
//! criticality of rhombic embeddings with the associated Ising couplings, and
//! the discrete Dirac equation on spin structures of the triple graph.
//!
//! All numerical types are generic over [`Real`] (implemented for `f32` and
//! `f64`); the `*64` aliases at the crate root fix the scalar to `f64`, which
//! is what the verification tolerances are stated for.

pub mod critical;
pub mod dirac;
pub mod error;
pub mod forms;
pub mod harmonic;
pub mod holomorphic;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod svg;

mod real;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use real::Real;

/// Complex scalar over a [`Real`] field.
pub type C<T> = Complex<T>;

pub type DoubleMap64 = mesh::DoubleMap<f64>;
pub type DoubleMap32 = mesh::DoubleMap<f32>;
pub type Cochain64 = forms::Cochain<f64>;
pub type Cochain32 = forms::Cochain<f32>;
pub type Embedding64 = critical::PlanarEmbedding<f64>;
pub type Spinor64 = dirac::Spinor<f64>;
pub type Complex64 = Complex<f64>;

/// Default verdict tolerance used by reports and the command line.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
