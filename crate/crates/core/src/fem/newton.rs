//! Damped Newton iteration for the quasilinear weak form, with continuation
//! in p and a Picard fallback that freezes the u-dependent load.

use super::assembly::{ElementCache, LoadTerm, WeakForm};
use super::FemField;
use crate::config::SolverParams;
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::linalg::{norm2, BandedLdlt};
use crate::mesh::TriangleMesh;

/// Per-solve diagnostics: iteration counts, residual and damping history.
#[derive(Debug, Clone, Default)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub damping: Vec<f64>,
    pub converged: bool,
    pub used_picard: bool,
    pub p_path: Vec<f64>,
    pub final_residual: f64,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub field: FemField,
    pub diag: SolveDiagnostics,
}

const DELTA_FLOOR: f64 = 1e-14;

fn residual_norm(form: &WeakForm, u: &FemField) -> (f64, f64) {
    let (a, l) = form.residual_split(u);
    let r: Vec<f64> = a.iter().zip(&l).map(|(ai, li)| ai - li).collect();
    (norm2(&r), norm2(&a) + norm2(&l))
}

/// Newton iteration from `initial`. Convergence is declared when the
/// residual norm drops below `atol + rtol * scale`, where scale is the size
/// of the two sides of the weak form at the iterate; a solution passed back
/// in is therefore accepted with zero iterations.
pub fn newton_solve(
    form: &WeakForm,
    initial: &FemField,
    sp: &SolverParams,
) -> Result<NewtonOutcome> {
    form.check_field(initial)?;
    let mut u = initial.clone();
    let mut diag = SolveDiagnostics {
        p_path: vec![form.p],
        ..Default::default()
    };

    let (mut rn, mut scale) = residual_norm(form, &u);
    diag.residuals.push(rn);

    for _ in 0..sp.max_iter {
        if rn <= sp.atol + sp.rtol * scale {
            diag.converged = true;
            break;
        }
        let delta = (sp.delta_scale * form.cache.rms_gradient(form.mesh, &u)).max(DELTA_FLOOR);
        let jac = form.jacobian(&u, delta);
        let factor = BandedLdlt::factor(&jac)?;
        let (a, l) = form.residual_split(&u);
        let r: Vec<f64> = a.iter().zip(&l).map(|(ai, li)| ai - li).collect();
        let neg_r: Vec<f64> = r.iter().map(|x| -x).collect();
        let mut du = factor.solve(&neg_r);
        // one step of iterative refinement: the tight rtol sits near the
        // factorization's roundoff floor without it
        let jdu = jac.matvec(&du);
        let corr: Vec<f64> = neg_r.iter().zip(&jdu).map(|(b, a)| b - a).collect();
        let e = factor.solve(&corr);
        for (d, ei) in du.iter_mut().zip(&e) {
            *d += ei;
        }

        // backtracking on the Euclidean residual norm
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=sp.max_backtracks {
            let trial = FemField {
                coeffs: u
                    .coeffs
                    .iter()
                    .zip(&du)
                    .map(|(ui, di)| ui + alpha * di)
                    .collect(),
            };
            let (rn_t, scale_t) = residual_norm(form, &trial);
            if rn_t < rn {
                u = trial;
                rn = rn_t;
                scale = scale_t;
                diag.damping.push(alpha);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        diag.iterations += 1;
        diag.residuals.push(rn);
        if !accepted {
            break; // stalled; best iterate retained
        }
        if rn <= sp.atol + sp.rtol * scale {
            diag.converged = true;
            break;
        }
    }
    if rn <= sp.atol + sp.rtol * scale {
        diag.converged = true;
    }
    diag.final_residual = rn;
    Ok(NewtonOutcome { field: u, diag })
}

/// One continuation stage with automatic Picard fallback: if Newton stalls
/// and the load depends on u, iterate with the load frozen at the current
/// iterate, polishing with Newton afterwards.
fn solve_stage(form: &WeakForm, initial: &FemField, sp: &SolverParams) -> Result<NewtonOutcome> {
    let first = newton_solve(form, initial, sp)?;
    if first.diag.converged || !form.has_nonlinear_load() {
        return Ok(first);
    }
    let mut u = first.field;
    let mut diag = first.diag;
    diag.used_picard = true;
    for _ in 0..sp.picard_max {
        let frozen = form.frozen_at(&u);
        let out = newton_solve(&frozen, &u, sp)?;
        diag.iterations += out.diag.iterations;
        u = out.field;
        let (rn, scale) = residual_norm(form, &u);
        diag.residuals.push(rn);
        if rn <= sp.atol + sp.rtol * scale {
            diag.converged = true;
            break;
        }
    }
    if diag.converged {
        // polish with full Newton
        let out = newton_solve(form, &u, sp)?;
        diag.iterations += out.diag.iterations;
        diag.final_residual = out.diag.final_residual;
        diag.converged = out.diag.converged;
        u = out.field;
    } else {
        diag.final_residual = *diag.residuals.last().unwrap_or(&f64::NAN);
    }
    Ok(NewtonOutcome { field: u, diag })
}

/// Solves at `p_target` by continuation: the p = 2 problem first, then p in
/// steps of 0.5 reusing each stage's solution. A provided initial guess is
/// tried directly at the target exponent first.
pub fn solve_continuation(
    mesh: &TriangleMesh,
    cache: &ElementCache,
    loads: &[LoadTerm],
    p_target: f64,
    initial: Option<&FemField>,
    sp: &SolverParams,
    mode: ExecMode,
) -> Result<NewtonOutcome> {
    let make_form = |p: f64| {
        let mut f = WeakForm::new(mesh, cache, p, loads.to_vec());
        f.mode = mode;
        f
    };

    if let Some(u0) = initial {
        let form = make_form(p_target);
        let out = solve_stage(&form, u0, sp)?;
        if out.diag.converged {
            return Ok(out);
        }
    }

    let mut stages = Vec::new();
    let mut p = 2.0;
    while p < p_target - 1e-12 {
        stages.push(p);
        p += 0.5;
    }
    stages.push(p_target);

    let mut u = FemField::zeros(mesh);
    let mut agg = SolveDiagnostics::default();
    for (si, &ps) in stages.iter().enumerate() {
        let form = make_form(ps);
        let out = solve_stage(&form, &u, sp)?;
        u = out.field;
        agg.iterations += out.diag.iterations;
        agg.residuals.extend(out.diag.residuals);
        agg.damping.extend(out.diag.damping);
        agg.used_picard |= out.diag.used_picard;
        agg.p_path.push(ps);
        agg.converged = out.diag.converged;
        agg.final_residual = out.diag.final_residual;
        if !out.diag.converged && si + 1 == stages.len() {
            return Err(Error::NonConvergence(format!(
                "continuation stalled at p = {ps}, residual {}",
                out.diag.final_residual
            )));
        }
        if !out.diag.converged {
            return Err(Error::NonConvergence(format!(
                "continuation stage p = {ps} did not converge (residual {})",
                out.diag.final_residual
            )));
        }
    }
    Ok(NewtonOutcome { field: u, diag: agg })
}
