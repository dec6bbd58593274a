//! Numerical variational solver for the Hamiltonian system
//!
//! ```text
//! -Δu + u = a(x) v^{p-1},   -Δv + v = b(x) u^{q-1}   in A_R = {|x| > R} ⊂ ℝ^N,
//! u, v > 0,  u = v = 0 on ∂A_R,
//! ```
//!
//! restricted to `O(m) × O(n)`-invariant functions, together with the spectral
//! machinery (Hardy constant, radial/angular eigenpairs, second variation) used to
//! predict and detect symmetry breaking.

pub mod cone;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod functional;
pub mod geometry;
pub mod linalg;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use field::Field;
pub use geometry::{build_grid, DomainSpec, Grid};
