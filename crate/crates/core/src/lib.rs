//! Boundary blow-up solutions of the k-Hessian equation `S_k(D²u) = b(x) f(u)`
//! on balls.
//!
//! The crate provides the building blocks (symmetric functions, regular
//! variation, nonlinearity indices, inverse-integral transforms, ball
//! geometry), explicit sub- and supersolution barriers, and a radial monotone
//! truncated-Dirichlet solver with boundary-rate extraction.

pub mod barriers;
pub mod error;
pub mod extrap;
pub mod geometry;
pub mod karamata;
pub mod nonlinearity;
pub mod quad;
pub mod radial_solver;
pub mod roots;
pub mod symfun;
pub mod transforms;

pub use error::{Error, Result};
