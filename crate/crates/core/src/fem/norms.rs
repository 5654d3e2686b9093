//! W^{1,p} norms, regional energies, and the cross-mesh field error used to
//! compare rough solutions against the limit solution on the cylinder.

use super::assembly::ElementCache;
use super::FemField;
use crate::error::Result;
use crate::exec::{sum_indexed, ExecMode};
use crate::mesh::{PointLocator, TriangleMesh};

/// Integration region: the whole mesh or only elements below y = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    All,
    /// Elements whose centroid lies in y < 0 (for meshes with a y = 0 mesh
    /// line this is exactly the lower part).
    LowerHalf,
}

const MID_PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

fn element_energy(
    mesh: &TriangleMesh,
    cache: &ElementCache,
    u: &FemField,
    p: f64,
    t: usize,
) -> f64 {
    let tri = mesh.triangles[t];
    let area = cache.areas[t];
    let g = cache.gradient(mesh, u, t);
    let gnorm = (g[0] * g[0] + g[1] * g[1]).sqrt();
    let mut e = area * gnorm.powf(p);
    for (a, b) in MID_PAIRS {
        let um = 0.5 * (u.coeffs[tri[a]] + u.coeffs[tri[b]]);
        e += (area / 3.0) * um.abs().powf(p);
    }
    e
}

/// `integral over region of |grad u|^p + |u|^p` (no root).
pub fn region_energy(
    mesh: &TriangleMesh,
    cache: &ElementCache,
    u: &FemField,
    p: f64,
    region: Region,
) -> f64 {
    sum_indexed(ExecMode::default(), mesh.triangles.len(), |t| {
        let keep = match region {
            Region::All => true,
            Region::LowerHalf => mesh.centroid(t)[1] < 0.0,
        };
        if keep {
            element_energy(mesh, cache, u, p, t)
        } else {
            0.0
        }
    })
}

/// Energy of the thin cap R^eps = elements above y = 0.
pub fn thin_region_energy(mesh: &TriangleMesh, cache: &ElementCache, u: &FemField, p: f64) -> f64 {
    sum_indexed(ExecMode::default(), mesh.triangles.len(), |t| {
        if mesh.centroid(t)[1] > 0.0 {
            element_energy(mesh, cache, u, p, t)
        } else {
            0.0
        }
    })
}

/// W^{1,p} norm over a region.
pub fn norm_w1p(
    mesh: &TriangleMesh,
    cache: &ElementCache,
    u: &FemField,
    p: f64,
    region: Region,
) -> f64 {
    region_energy(mesh, cache, u, p, region).powf(1.0 / p)
}

/// W^{1,p}(Omega) norm of `u_base - u_other`, integrated on the base mesh's
/// lower-half elements with `u_other` (value and gradient) evaluated through
/// point location on its own mesh.
#[allow(clippy::too_many_arguments)]
pub fn field_error(
    base_mesh: &TriangleMesh,
    base_cache: &ElementCache,
    u_base: &FemField,
    other_mesh: &TriangleMesh,
    other_cache: &ElementCache,
    u_other: &FemField,
    p: f64,
) -> Result<f64> {
    u_base.check_compatible(base_mesh)?;
    u_other.check_compatible(other_mesh)?;
    let locator = PointLocator::new(other_mesh);
    let mut terms: Vec<f64> = Vec::with_capacity(base_mesh.triangles.len());
    for t in 0..base_mesh.triangles.len() {
        let c = base_mesh.centroid(t);
        if c[1] >= 0.0 {
            terms.push(0.0);
            continue;
        }
        let tri = base_mesh.triangles[t];
        let area = base_cache.areas[t];
        let gb = base_cache.gradient(base_mesh, u_base, t);
        let mut e = 0.0;
        // interior quadrature points: mid-edge points sit on shared edges,
        // where the located triangle (and its P1 gradient) is ambiguous
        const INTERIOR: [[f64; 3]; 3] = [
            [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
            [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
        ];
        for lb in INTERIOR {
            let mut x = 0.0;
            let mut y = 0.0;
            let mut vb = 0.0;
            for i in 0..3 {
                x += lb[i] * base_mesh.vertices[tri[i]][0];
                y += lb[i] * base_mesh.vertices[tri[i]][1];
                vb += lb[i] * u_base.coeffs[tri[i]];
            }
            let (ot, lam) = locator.locate(x, y)?;
            let vo = u_other.eval(other_mesh, ot, lam);
            let go = other_cache.gradient(other_mesh, u_other, ot);
            let dv = vb - vo;
            let dg = [(gb[0] - go[0]), (gb[1] - go[1])];
            let gnorm = (dg[0] * dg[0] + dg[1] * dg[1]).sqrt();
            e += (area / 3.0) * (gnorm.powf(p) + dv.abs().powf(p));
        }
        terms.push(e);
    }
    Ok(terms.iter().sum::<f64>().powf(1.0 / p))
}
