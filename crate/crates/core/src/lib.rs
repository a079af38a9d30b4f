//! Pseudo-spectral solver for the corotational Oldroyd-B system on the
//! periodic torus (2D/3D), together with the harmonic-analysis toolbox
//! (dyadic blocks, Besov / Chemin-Lerner norms, weak Lebesgue norms, heat
//! and Stokes propagators) and closed-form evaluation of the a-priori
//! bound functionals used by the verification harness.
//!
//! The solver state is a divergence-free velocity `u` and a symmetric
//! conformation tensor `tau` evolving under
//!
//! ```text
//! dt tau + u.grad tau + a tau + (tau w - w tau) + b (D tau + tau D) = mu D
//! dt u   + u.grad u - nu lap u + grad p = div tau,    div u = 0
//! ```
//!
//! with `w` and `D` the skew and symmetric parts of `grad u`. Everything
//! is spectral: derivatives are exact Fourier multipliers, products are
//! formed pointwise after 2/3-rule dealiasing, and the linear parts are
//! integrated with exact exponential factors.

pub mod bounds;
pub mod checkpoint;
pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod fft;
pub mod field;
pub mod grid;
pub mod lorentz;
pub mod lp;
pub mod picard;
pub mod quad;
pub mod report;
pub mod semigroup;
pub mod solver;
pub mod threads;

pub use error::{Error, Result};
pub use field::{Field, TensorField, VectorField};
pub use grid::Grid;
