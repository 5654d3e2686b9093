//! Finite-element laboratory for quasilinear p-Laplacian problems with a
//! reaction concentrated on a thin oscillating boundary strip, and for the
//! homogenized limit problem with a nonlinear Neumann condition.
//!
//! The crate solves two problems:
//!
//! * the **rough problem** on a domain whose top boundary oscillates at
//!   period `eps`, with a reaction term supported on a strip of thickness
//!   `eps^(gamma+1) h(x, x/eps^beta)` under the rough boundary and scaled by
//!   `1/eps^(gamma+1)`;
//! * the **limit problem** on the fixed cylinder `(0,1) x (-1,0)`, where the
//!   concentrated reaction collapses to the boundary flux `mu(x) f(u)` on
//!   the top side, with `mu` the period average of the strip density `h`.
//!
//! The [`lab`] module sweeps `eps` downwards and measures the `W^{1,p}`
//! distance between the two solutions, together with uniform bounds,
//! Lipschitz ratios, and energy identities.

pub mod cli;
pub mod concentrated;
pub mod config;
pub mod error;
pub mod exec;
pub mod fem;
pub mod geometry;
pub mod lab;
pub mod limit;
pub mod linalg;
pub mod mesh;
pub mod quad;
pub mod rough;

pub use config::{ProblemConfig, RunConfig};
pub use error::{Error, Result};
pub use fem::FemField;
