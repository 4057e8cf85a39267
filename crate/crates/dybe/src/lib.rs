//! Groupoid-graded linear algebra for dynamical Yang-Baxter operators.
//!
//! The crate provides:
//!
//! - finite groupoids (graph groupoids, action-groupoid windows, the
//!   one-object Klein groupoid of the eight-vertex model) and connecting
//!   sets between them ([`groupoid`]);
//! - graded vector spaces, plaquette-indexed block operators, graded
//!   traces and the two transfer-operator calculi ([`graded`]);
//! - Jacobi theta functions `H`, `Θ`, the odd theta `θ(z,τ)`, the
//!   normalized bracket `[z]` and its trigonometric limit ([`elliptic`]);
//! - concrete spectral operator families (eight-vertex, SOS, symmetric
//!   SOS, elliptic and trigonometric A-type) together with residual
//!   checkers for the Yang-Baxter, dynamical Yang-Baxter, inversion and
//!   symmetry identities ([`rmodels`]);
//! - intertwiners between Yang-Baxter operators and their relation
//!   checkers ([`intertwine`]);
//! - twists: Drinfeld and dynamical twist verification, connecting-system
//!   twists, cell systems for the A→D and A→E₆ foldings ([`twist`]);
//! - batch suite configuration and residual reports ([`report`]).

pub mod elliptic;
pub mod graded;
pub mod groupoid;
pub mod intertwine;
pub mod report;
pub mod rmodels;
pub mod sampling;
pub mod twist;
pub(crate) mod util;

pub use num_complex::Complex64;

/// Convenience constructor for complex scalars.
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
