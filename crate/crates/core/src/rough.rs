//! Driver for the concentrated-reaction problem on the rough domain.

use crate::concentrated::apply_concentrated_functional;
use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::fem::{
    norm_w1p, region_energy, solve_continuation, thin_region_energy, ElementCache, FemField,
    LoadTerm, Region, SolveDiagnostics,
};
use crate::mesh::TriangleMesh;

/// A converged solve on the rough domain, with its norms and diagnostics.
#[derive(Debug, Clone)]
pub struct RoughSolution {
    pub field: FemField,
    pub cfg: ProblemConfig,
    /// W^{1,p} norm over the whole rough domain.
    pub norm_w1p: f64,
    /// Energy (|grad u|^p + |u|^p) over the thin cap y > 0.
    pub thin_energy: f64,
    pub diag: SolveDiagnostics,
}

/// Solves the quasilinear problem with the scaled strip load. The Neumann
/// condition is natural: no boundary terms appear, the load is the strip
/// functional alone.
pub fn solve_rough(
    cfg: &ProblemConfig,
    mesh: &TriangleMesh,
    cache: &ElementCache,
    initial: Option<&FemField>,
    mode: ExecMode,
) -> Result<RoughSolution> {
    cfg.validate()?;
    if mesh.strip_elements.is_empty() {
        return Err(Error::MissingStripTags);
    }
    let scale = cfg.epsilon.powf(cfg.gamma + 1.0).recip();
    let loads = vec![LoadTerm::Concentrated {
        scale,
        reaction: cfg.functions.f,
    }];
    let out = solve_continuation(mesh, cache, &loads, cfg.p, initial, &cfg.solver, mode)?;
    let norm = norm_w1p(mesh, cache, &out.field, cfg.p, Region::All);
    let thin = thin_region_energy(mesh, cache, &out.field, cfg.p);
    Ok(RoughSolution {
        field: out.field,
        cfg: cfg.clone(),
        norm_w1p: norm,
        thin_energy: thin,
        diag: out.diag,
    })
}

/// Variational identity with the solution as its own test function:
/// `| ||u||^p - <F(u), u> |`. Small only at a converged solution.
pub fn energy_check(
    sol: &RoughSolution,
    mesh: &TriangleMesh,
    cache: &ElementCache,
) -> Result<f64> {
    let energy = region_energy(mesh, cache, &sol.field, sol.cfg.p, Region::All);
    let pairing = apply_concentrated_functional(mesh, cache, &sol.field, &sol.field, &sol.cfg)?;
    Ok((energy - pairing).abs())
}
