//! Epsilon-sweep orchestration: solves the limit problem once, the rough
//! problem per epsilon on meshes with a common horizontal resolution, and
//! reports errors, energies, and bound/Lipschitz ratios.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::concentrated::{verify_lipschitz, verify_uniform_bound};
use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::fem::{field_error, ElementCache, FemField};
use crate::limit::{solve_limit, LimitSolution};
use crate::mesh::{build_cylinder_mesh, build_rough_mesh, TriangleMesh};
use crate::rough::{energy_check, solve_rough, RoughSolution};

/// One row of a theorem sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub epsilon: f64,
    pub n_vertices: usize,
    pub n_triangles: usize,
    /// W^{1,p} norm of the rough solution over its whole domain.
    pub norm_w1p: f64,
    /// W^{1,p} error against the limit solution on the lower half y < 0.
    pub error_w1p: f64,
    /// Energy of the rough solution over the thin cap y > 0.
    pub thin_energy: f64,
    /// Gap in the variational identity with phi = u.
    pub energy_gap: f64,
    /// Concentration-bound ratio for the solution field.
    pub bound_ratio: f64,
    /// Empirical Lipschitz ratio of the strip functional at the solution.
    pub lipschitz_ratio: f64,
    pub newton_iterations: usize,
    pub used_picard: bool,
    pub wall_seconds: f64,
}

impl SweepRow {
    /// Wall time is reported in the plain-text summary only, so the CSV is
    /// byte-identical across reruns of the same config.
    pub fn csv_header() -> &'static str {
        "epsilon,n_vertices,n_triangles,norm_w1p,error_w1p,thin_energy,energy_gap,\
         bound_ratio,lipschitz_ratio,newton_iterations,used_picard"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.17e},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{}",
            self.epsilon,
            self.n_vertices,
            self.n_triangles,
            self.norm_w1p,
            self.error_w1p,
            self.thin_energy,
            self.energy_gap,
            self.bound_ratio,
            self.lipschitz_ratio,
            self.newton_iterations,
            self.used_picard
        )
    }
}

/// A full sweep: per-epsilon rows plus the shared limit solution metadata.
#[derive(Debug)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub limit_norm: f64,
    pub limit_iterations: usize,
    pub cylinder_nx: usize,
    pub cylinder_ny: usize,
    /// True when every epsilon produced a converged row.
    pub complete: bool,
    /// Human-readable notes for aborted rows.
    pub failures: Vec<String>,
}

impl SweepReport {
    pub fn csv(&self) -> String {
        let mut s = String::from(SweepRow::csv_header());
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "limit solution: norm = {:.6e}, cylinder {}x{}, {} Newton iterations\n",
            self.limit_norm, self.cylinder_nx, self.cylinder_ny, self.limit_iterations
        ));
        for r in &self.rows {
            s.push_str(&format!(
                "eps = {:>8.5}: error = {:.6e}, norm = {:.6e}, thin energy = {:.6e}, \
                 {} iterations, {:.1}s\n",
                r.epsilon,
                r.error_w1p,
                r.norm_w1p,
                r.thin_energy,
                r.newton_iterations,
                r.wall_seconds
            ));
        }
        if !self.complete {
            s.push_str("INCOMPLETE:\n");
            for f in &self.failures {
                s.push_str(&format!("  {f}\n"));
            }
        }
        s
    }

    /// Least-squares slope of `values` against log(1/eps) over the rows.
    pub fn slope_vs_log_inv_eps(&self, values: &[f64]) -> f64 {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.epsilon.recip().ln()).collect();
        least_squares_slope(&xs, values)
    }
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// A smooth pseudo-random field from a few low-frequency modes with
/// seed-determined coefficients; used for Lipschitz probes.
pub fn seeded_smooth_field(mesh: &TriangleMesh, seed: u64, amplitude: f64) -> FemField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(1.0..3.0),
                rng.gen_range(1.0..3.0),
            )
        })
        .collect();
    FemField::interpolate(mesh, |x, y| {
        let mut v = 0.0;
        for &(c, kx, ky) in &modes {
            v += c * (std::f64::consts::PI * kx * x).cos() * (std::f64::consts::PI * ky * y).cos();
        }
        amplitude * v
    })
}

fn cfg_for_eps(cfg_base: &ProblemConfig, eps: f64, dx: f64) -> ProblemConfig {
    let mut cfg = *cfg_base;
    cfg.epsilon = eps;
    cfg.mesh.target_edge = dx;
    cfg
}

/// Runs the convergence sweep. All rough meshes and the cylinder mesh share
/// the horizontal spacing `eps_min / 8`, so the measured error differences
/// across epsilon are not polluted by changing horizontal resolution.
pub fn run_theorem_sweep(
    cfg_base: &ProblemConfig,
    eps_list: &[f64],
    seed: u64,
    mode: ExecMode,
) -> Result<SweepReport> {
    if eps_list.is_empty() {
        return Err(Error::InvalidInput("eps_list must be non-empty".into()));
    }
    for pair in eps_list.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Error::InvalidInput(
                "eps_list must be strictly decreasing".into(),
            ));
        }
    }
    let eps_min = *eps_list.last().unwrap();
    let dx = eps_min / 8.0;
    let nx = (1.0 / dx).round().max(4.0) as usize;
    let ny = (1.0 / cfg_base.mesh.bulk_edge).round().max(4.0) as usize;

    let cyl_mesh = build_cylinder_mesh(nx, ny)?;
    let cyl_cache = ElementCache::new(&cyl_mesh);
    let cfg_limit = cfg_for_eps(cfg_base, eps_list[0], dx);
    let limit: LimitSolution = solve_limit(&cfg_limit, &cyl_mesh, &cyl_cache, None, mode)?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &eps in eps_list {
        let t0 = Instant::now();
        let cfg = cfg_for_eps(cfg_base, eps, dx);
        let row = sweep_row(&cfg, &limit, &cyl_mesh, &cyl_cache, seed, mode, t0);
        match row {
            Ok(r) => rows.push(r),
            Err(e) => failures.push(format!("eps = {eps}: {e}")),
        }
    }

    Ok(SweepReport {
        rows,
        limit_norm: limit.norm_w1p,
        limit_iterations: limit.diag.iterations,
        cylinder_nx: nx,
        cylinder_ny: ny,
        complete: failures.is_empty(),
        failures,
    })
}

fn sweep_row(
    cfg: &ProblemConfig,
    limit: &LimitSolution,
    cyl_mesh: &TriangleMesh,
    cyl_cache: &ElementCache,
    seed: u64,
    mode: ExecMode,
    t0: Instant,
) -> Result<SweepRow> {
    let mesh = build_rough_mesh(cfg)?;
    let cache = ElementCache::new(&mesh);
    let sol: RoughSolution = solve_rough(cfg, &mesh, &cache, None, mode)?;
    let error = field_error(
        cyl_mesh,
        cyl_cache,
        &limit.field,
        &mesh,
        &cache,
        &sol.field,
        cfg.p,
    )?;
    let gap = energy_check(&sol, &mesh, &cache)?;
    // the bound ratio is undefined for the zero solution (zero reaction)
    let bound = if sol.norm_w1p > 1e-14 {
        verify_uniform_bound(&[(&mesh, &cache, &sol.field, cfg)])?[0]
    } else {
        0.0
    };
    let probe = seeded_smooth_field(&mesh, seed, 0.1);
    let v = FemField {
        coeffs: sol
            .field
            .coeffs
            .iter()
            .zip(&probe.coeffs)
            .map(|(a, b)| a + b)
            .collect(),
    };
    let phi = seeded_smooth_field(&mesh, seed.wrapping_add(1), 1.0);
    let lip = verify_lipschitz(&mesh, &cache, &sol.field, &v, &phi, cfg)?;
    Ok(SweepRow {
        epsilon: cfg.epsilon,
        n_vertices: mesh.vertices.len(),
        n_triangles: mesh.triangles.len(),
        norm_w1p: sol.norm_w1p,
        error_w1p: error,
        thin_energy: sol.thin_energy,
        energy_gap: gap,
        bound_ratio: bound,
        lipschitz_ratio: lip,
        newton_iterations: sol.diag.iterations,
        used_picard: sol.diag.used_picard,
        wall_seconds: t0.elapsed().as_secs_f64(),
    })
}

/// One row of a mesh-resolution study.
#[derive(Debug, Clone)]
pub struct ResolutionRow {
    pub edge: f64,
    pub n_vertices: usize,
    /// W^{1,p} error on the lower half against the finest-level solution.
    pub error_vs_reference: f64,
}

/// Solves the rough problem at a fixed epsilon on a sequence of edge sizes
/// and reports each level's error against the finest level. Used to certify
/// that the discretization error is a small fraction of the measured
/// epsilon-error.
pub fn mesh_resolution_study(
    cfg_base: &ProblemConfig,
    levels: &[f64],
    mode: ExecMode,
) -> Result<Vec<ResolutionRow>> {
    if levels.len() < 3 {
        return Err(Error::InvalidInput(
            "mesh_resolution_study needs at least 3 levels".into(),
        ));
    }
    // refine every spacing by the same factor relative to the coarsest
    // level, so one level-to-level step is a uniform mesh refinement
    let coarsest = levels.iter().cloned().fold(f64::MIN, f64::max);
    let mut solutions = Vec::new();
    for &edge in levels {
        let mut cfg = *cfg_base;
        cfg.mesh.target_edge = edge;
        cfg.mesh.bulk_edge = cfg_base.mesh.bulk_edge * (edge / coarsest);
        let mesh = build_rough_mesh(&cfg)?;
        let cache = ElementCache::new(&mesh);
        let sol = solve_rough(&cfg, &mesh, &cache, None, mode)?;
        solutions.push((edge, mesh, cache, sol));
    }
    let (i_ref, _) = solutions
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap())
        .unwrap();
    let (_, ref_mesh, ref_cache, ref_sol) = &solutions[i_ref];
    let mut rows = Vec::new();
    for (edge, mesh, cache, sol) in &solutions {
        let err = field_error(
            ref_mesh,
            ref_cache,
            &ref_sol.field,
            mesh,
            cache,
            &sol.field,
            cfg_base.p,
        )?;
        rows.push(ResolutionRow {
            edge: *edge,
            n_vertices: mesh.vertices.len(),
            error_vs_reference: err,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Reaction, StripDensity};

    fn sweep_cfg(f: Reaction) -> ProblemConfig {
        let mut cfg = ProblemConfig::default();
        cfg.gamma = 1.0;
        cfg.beta = 1.0;
        cfg.functions.h = StripDensity::SinHalf;
        cfg.functions.f = f;
        cfg.mesh.bulk_edge = 1.0 / 32.0;
        cfg
    }

    #[test]
    fn zero_reaction_sweep_has_zero_errors() {
        let cfg = sweep_cfg(Reaction::Zero);
        let report = run_theorem_sweep(&cfg, &[0.2, 0.1], 7, ExecMode::default()).unwrap();
        assert!(report.complete, "failures: {:?}", report.failures);
        for r in &report.rows {
            assert!(r.error_w1p < 1e-12, "error {}", r.error_w1p);
            assert_eq!(r.thin_energy, 0.0);
        }
    }

    #[test]
    fn single_eps_sweep_has_one_row() {
        let cfg = sweep_cfg(Reaction::One);
        let report = run_theorem_sweep(&cfg, &[0.2], 7, ExecMode::default()).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.complete);
    }

    #[test]
    fn increasing_eps_list_rejected() {
        let cfg = sweep_cfg(Reaction::One);
        assert!(run_theorem_sweep(&cfg, &[0.1, 0.2], 7, ExecMode::default()).is_err());
    }

    #[test]
    fn error_column_decreases_for_constant_density() {
        let mut cfg = sweep_cfg(Reaction::One);
        cfg.functions.h = StripDensity::Constant(1.0);
        let report =
            run_theorem_sweep(&cfg, &[0.2, 0.1, 0.05], 7, ExecMode::default()).unwrap();
        assert!(report.complete, "failures: {:?}", report.failures);
        for pair in report.rows.windows(2) {
            assert!(
                pair[1].error_w1p < pair[0].error_w1p,
                "error not decreasing: {} -> {}",
                pair[0].error_w1p,
                pair[1].error_w1p
            );
        }
    }

    #[test]
    fn resolution_study_needs_three_levels() {
        let cfg = sweep_cfg(Reaction::One);
        assert!(mesh_resolution_study(&cfg, &[0.01, 0.005], ExecMode::default()).is_err());
    }

    #[test]
    fn resolution_study_identical_levels_agree() {
        let mut cfg = sweep_cfg(Reaction::One);
        cfg.epsilon = 0.2;
        let e = 0.2 / 8.0;
        let rows = mesh_resolution_study(&cfg, &[e, e, e], ExecMode::default()).unwrap();
        for r in &rows {
            assert!(r.error_vs_reference < 1e-10, "error {}", r.error_vs_reference);
        }
    }

    #[test]
    fn resolution_study_coarse_level_rejected_by_meshing() {
        let mut cfg = sweep_cfg(Reaction::One);
        cfg.epsilon = 0.2;
        let err = mesh_resolution_study(&cfg, &[0.1, 0.025, 0.0125], ExecMode::default());
        assert!(err.is_err());
    }

    #[test]
    fn seeded_field_is_deterministic() {
        let cfg = sweep_cfg(Reaction::One);
        let mut c = cfg;
        c.epsilon = 0.2;
        c.mesh.target_edge = 0.2 / 8.0;
        let mesh = crate::mesh::build_rough_mesh(&c).unwrap();
        let a = seeded_smooth_field(&mesh, 42, 0.1);
        let b = seeded_smooth_field(&mesh, 42, 0.1);
        assert_eq!(a.coeffs, b.coeffs);
    }
}
