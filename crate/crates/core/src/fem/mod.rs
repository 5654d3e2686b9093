//! Piecewise-linear finite elements: fields, assembly of the quasilinear
//! weak form, norms, and the damped Newton solver.

pub mod assembly;
pub mod newton;
pub mod norms;

pub use assembly::{BoundaryLoad, EdgeQuad, ElementCache, LoadTerm, WeakForm};
pub use newton::{newton_solve, solve_continuation, NewtonOutcome, SolveDiagnostics};
pub use norms::{field_error, norm_w1p, region_energy, thin_region_energy, Region};

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;

/// Piecewise-linear scalar field: one coefficient per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct FemField {
    pub coeffs: Vec<f64>,
}

impl FemField {
    pub fn zeros(mesh: &TriangleMesh) -> Self {
        FemField {
            coeffs: vec![0.0; mesh.vertices.len()],
        }
    }

    /// Nodal interpolant of a closed-form function.
    pub fn interpolate<F: Fn(f64, f64) -> f64>(mesh: &TriangleMesh, f: F) -> Self {
        FemField {
            coeffs: mesh.vertices.iter().map(|v| f(v[0], v[1])).collect(),
        }
    }

    pub fn check_compatible(&self, mesh: &TriangleMesh) -> Result<()> {
        if self.coeffs.len() != mesh.vertices.len() {
            return Err(Error::MeshMismatch(format!(
                "field has {} coefficients but mesh has {} vertices",
                self.coeffs.len(),
                mesh.vertices.len()
            )));
        }
        if !self.coeffs.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("field has non-finite coefficients".into()));
        }
        Ok(())
    }

    /// Value at barycentric coordinates inside triangle `t`.
    pub fn eval(&self, mesh: &TriangleMesh, t: usize, lambda: [f64; 3]) -> f64 {
        let [a, b, c] = mesh.triangles[t];
        lambda[0] * self.coeffs[a] + lambda[1] * self.coeffs[b] + lambda[2] * self.coeffs[c]
    }
}

/// |t|^(p-2) t, the scalar flux of the p-structure.
pub fn pflux(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t
    } else {
        t * (t * t).powf(0.5 * p - 1.0)
    }
}

/// Vector flux |a|^(p-2) a in R^2.
pub fn pflux2(a: [f64; 2], p: f64) -> [f64; 2] {
    if p == 2.0 {
        return a;
    }
    let q = a[0] * a[0] + a[1] * a[1];
    let w = q.powf(0.5 * p - 1.0);
    [w * a[0], w * a[1]]
}
