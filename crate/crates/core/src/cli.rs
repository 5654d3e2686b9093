//! Command-line front end: argument parsing, run dispatch, artifact layout.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::concentrated::{
    verify_concentration, verify_lipschitz, verify_uniform_bound, ConcentrationRecord,
};
use crate::config::{load_run_config, RunConfig};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::fem::{ElementCache, FemField, SolveDiagnostics};
use crate::geometry::{mu, MU_DEFAULT_CELLS, OMEGA};
use crate::lab::{run_theorem_sweep, seeded_smooth_field};
use crate::limit::solve_limit;
use crate::mesh::{build_cylinder_mesh, build_rough_mesh, write_vtk, TriangleMesh};
use crate::rough::solve_rough;

#[derive(Parser, Debug)]
#[command(
    name = "plaplab",
    version,
    about = "p-Laplacian laboratory: rough-domain solves, homogenized limit solves, \
             convergence sweeps, and verification tables"
)]
pub struct Cli {
    /// Path to the run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output root directory (default: results).
    #[arg(long, global = true, default_value = "results")]
    pub out: PathBuf,

    /// Comma-separated override of the sweep epsilon list.
    #[arg(long, global = true, value_name = "E1,E2,...")]
    pub eps_list: Option<String>,

    /// Seed for randomized probe fields.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Worker thread cap for parallel assembly (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the concentrated-reaction problem on the rough domain.
    SolveRough,
    /// Solve the homogenized limit problem on the cylinder.
    SolveLimit,
    /// Run the epsilon sweep against the limit solution.
    Sweep,
    /// Emit a verification table.
    Verify {
        /// Which table: concentration | bounds | lipschitz | mu
        which: String,
    },
}

/// Process exit codes: 2 for invalid input/config, 3 for solver failures,
/// 1 for anything else.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Parse(_)
        | Error::InvalidInput(_)
        | Error::MeshResolution(_) => 2,
        Error::NonConvergence(_) | Error::LinearBreakdown(_) => 3,
        _ => 1,
    }
}

fn command_dir_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::SolveRough => "solve-rough",
        Command::SolveLimit => "solve-limit",
        Command::Sweep => "sweep",
        Command::Verify { .. } => "verify",
    }
}

fn write_manifest(
    dir: &Path,
    config_path: &Path,
    run: &RunConfig,
    seed: u64,
) -> Result<()> {
    let manifest = format!(
        "tool = plaplab {}\nconfig_path = {}\ncontent_hash = {}\nseed = {}\n\n\
         [resolved]\n{}",
        env!("CARGO_PKG_VERSION"),
        config_path.display(),
        run.content_hash(),
        seed,
        run.canonical_string()
    );
    fs::write(dir.join("manifest.txt"), manifest)?;
    Ok(())
}

fn diagnostics_csv(diag: &SolveDiagnostics) -> String {
    let mut s = String::from("iteration,residual\n");
    for (i, r) in diag.residuals.iter().enumerate() {
        s.push_str(&format!("{i},{r:.17e}\n"));
    }
    s
}

fn parse_eps_override(text: &str) -> Result<Vec<f64>> {
    let mut eps = Vec::new();
    for part in text.split(',') {
        eps.push(
            part.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("--eps-list: bad number '{part}'")))?,
        );
    }
    for w in eps.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::Config(
                "--eps-list must be strictly decreasing".into(),
            ));
        }
    }
    Ok(eps)
}

/// Runs a parsed command line; returns the output directory on success.
pub fn run(cli: &Cli) -> Result<PathBuf> {
    let config_path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    let mut run_cfg = load_run_config(config_path)?;
    if let Some(text) = &cli.eps_list {
        run_cfg.eps_list = parse_eps_override(text)?;
        let mut probe = run_cfg.problem;
        probe.epsilon = run_cfg.eps_list[0];
        probe.validate()?;
    }

    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        // ignore the error when a pool already exists (tests reuse a process)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }

    let dir = cli
        .out
        .join(command_dir_name(&cli.command))
        .join(run_cfg.content_hash());
    fs::create_dir_all(&dir)?;
    write_manifest(&dir, config_path, &run_cfg, cli.seed)?;

    let mode = ExecMode::default();
    match &cli.command {
        Command::SolveRough => cmd_solve_rough(&run_cfg, &dir, mode),
        Command::SolveLimit => cmd_solve_limit(&run_cfg, &dir, mode),
        Command::Sweep => cmd_sweep(&run_cfg, &dir, cli.seed, mode),
        Command::Verify { which } => cmd_verify(&run_cfg, &dir, which, cli.seed, mode),
    }?;
    Ok(dir)
}

fn cmd_solve_rough(run_cfg: &RunConfig, dir: &Path, mode: ExecMode) -> Result<()> {
    let cfg = &run_cfg.problem;
    let mesh = build_rough_mesh(cfg)?;
    let cache = ElementCache::new(&mesh);
    let result = solve_rough(cfg, &mesh, &cache, None, mode);
    // write diagnostics even when the solver fails
    if let Err(e) = &result {
        fs::write(dir.join("failure.txt"), format!("{e}\n"))?;
    }
    let sol = result?;
    write_vtk(
        &mesh,
        &[("u", &sol.field.coeffs)],
        &dir.join("solution.vtk"),
    )?;
    fs::write(dir.join("diagnostics.csv"), diagnostics_csv(&sol.diag))?;
    fs::write(
        dir.join("summary.txt"),
        format!(
            "norm_w1p = {:.12e}\nthin_energy = {:.12e}\niterations = {}\nused_picard = {}\n",
            sol.norm_w1p, sol.thin_energy, sol.diag.iterations, sol.diag.used_picard
        ),
    )?;
    Ok(())
}

fn cylinder_for(cfg: &crate::config::ProblemConfig) -> Result<TriangleMesh> {
    let nx = (1.0 / cfg.mesh.target_edge).round().max(4.0) as usize;
    let ny = (1.0 / cfg.mesh.bulk_edge).round().max(4.0) as usize;
    build_cylinder_mesh(nx, ny)
}

fn cmd_solve_limit(run_cfg: &RunConfig, dir: &Path, mode: ExecMode) -> Result<()> {
    let cfg = &run_cfg.problem;
    let mesh = cylinder_for(cfg)?;
    let cache = ElementCache::new(&mesh);
    let result = solve_limit(cfg, &mesh, &cache, None, mode);
    if let Err(e) = &result {
        fs::write(dir.join("failure.txt"), format!("{e}\n"))?;
    }
    let sol = result?;
    write_vtk(
        &mesh,
        &[("u", &sol.field.coeffs)],
        &dir.join("solution.vtk"),
    )?;
    fs::write(dir.join("diagnostics.csv"), diagnostics_csv(&sol.diag))?;
    fs::write(
        dir.join("summary.txt"),
        format!(
            "norm_w1p = {:.12e}\niterations = {}\nused_picard = {}\n",
            sol.norm_w1p, sol.diag.iterations, sol.diag.used_picard
        ),
    )?;
    Ok(())
}

fn cmd_sweep(run_cfg: &RunConfig, dir: &Path, seed: u64, mode: ExecMode) -> Result<()> {
    let report = run_theorem_sweep(&run_cfg.problem, &run_cfg.eps_list, seed, mode)?;
    fs::write(dir.join("sweep.csv"), report.csv())?;
    fs::write(dir.join("summary.txt"), report.summary())?;
    // gnuplot-friendly two-column file
    let mut dat = String::from("# eps  error_w1p\n");
    for r in &report.rows {
        dat.push_str(&format!("{:.17e} {:.17e}\n", r.epsilon, r.error_w1p));
    }
    fs::write(dir.join("error_vs_eps.dat"), dat)?;
    if !report.complete {
        return Err(Error::NonConvergence(format!(
            "sweep incomplete: {}",
            report.failures.join("; ")
        )));
    }
    Ok(())
}

fn cmd_verify(
    run_cfg: &RunConfig,
    dir: &Path,
    which: &str,
    seed: u64,
    mode: ExecMode,
) -> Result<()> {
    match which {
        "mu" => {
            let fns = &run_cfg.problem.functions;
            let mut csv = String::from("x,mu_numeric,mu_exact,abs_error\n");
            let mut max_err = 0.0f64;
            for i in 0..50 {
                let x = OMEGA.0 + (i as f64 + 0.5) / 50.0 * (OMEGA.1 - OMEGA.0);
                let num = mu(x, fns, MU_DEFAULT_CELLS);
                let exact = fns.h.mu_exact(x).unwrap_or(f64::NAN);
                let err = (num - exact).abs();
                max_err = max_err.max(err);
                csv.push_str(&format!("{x:.17e},{num:.17e},{exact:.17e},{err:.17e}\n"));
            }
            fs::write(dir.join("verify_mu.csv"), csv)?;
            println!("max |mu - mu_exact| = {max_err:.3e}");
        }
        "concentration" => {
            let recs = verify_concentration(
                |x: f64, y: f64| (std::f64::consts::PI * x).cos() * y.exp(),
                |_, _| 1.0,
                &run_cfg.problem,
                &run_cfg.eps_list,
                false,
            )?;
            let mut csv = String::from(ConcentrationRecord::csv_header());
            csv.push('\n');
            for r in &recs {
                csv.push_str(&r.csv_row());
                csv.push('\n');
            }
            fs::write(dir.join("verify_concentration.csv"), csv)?;
            println!(
                "final abs error = {:.3e}",
                recs.last().map(|r| r.abs_error).unwrap_or(f64::NAN)
            );
        }
        "bounds" => {
            let mut csv = String::from("epsilon,sample,ratio\n");
            for &eps in &run_cfg.eps_list {
                let mut cfg = run_cfg.problem;
                cfg.epsilon = eps;
                cfg.mesh.target_edge = cfg.mesh.target_edge.min(eps / 8.0);
                let mesh = build_rough_mesh(&cfg)?;
                let cache = ElementCache::new(&mesh);
                let sol = solve_rough(&cfg, &mesh, &cache, None, mode)?;
                let mut samples: Vec<(String, FemField)> =
                    vec![("solution".into(), sol.field.clone())];
                for k in 0..2u64 {
                    samples.push((
                        format!("probe{k}"),
                        seeded_smooth_field(&mesh, seed.wrapping_add(k), 1.0),
                    ));
                }
                for (name, field) in &samples {
                    let r = verify_uniform_bound(&[(&mesh, &cache, field, &cfg)])?[0];
                    csv.push_str(&format!("{eps:.17e},{name},{r:.17e}\n"));
                }
            }
            fs::write(dir.join("verify_bounds.csv"), csv)?;
        }
        "lipschitz" => {
            let mut csv = String::from("epsilon,ratio\n");
            for &eps in &run_cfg.eps_list {
                let mut cfg = run_cfg.problem;
                cfg.epsilon = eps;
                cfg.mesh.target_edge = cfg.mesh.target_edge.min(eps / 8.0);
                let mesh = build_rough_mesh(&cfg)?;
                let cache = ElementCache::new(&mesh);
                let sol = solve_rough(&cfg, &mesh, &cache, None, mode)?;
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
                let r = verify_lipschitz(&mesh, &cache, &sol.field, &v, &phi, &cfg)?;
                csv.push_str(&format!("{eps:.17e},{r:.17e}\n"));
            }
            fs::write(dir.join("verify_lipschitz.csv"), csv)?;
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown verify table '{other}'; valid: concentration, bounds, lipschitz, mu"
            )))
        }
    }
    Ok(())
}
