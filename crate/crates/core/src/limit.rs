//! Driver for the homogenized limit problem on the fixed cylinder, with the
//! nonlinear Neumann flux mu(x) f(u) on the flat top boundary Gamma.

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::fem::assembly::{edge_gauss_xi, BoundaryLoad, EdgeQuad};
use crate::fem::{
    norm_w1p, solve_continuation, ElementCache, FemField, LoadTerm, Region, SolveDiagnostics,
};
use crate::geometry::{mu, ModelFunctions, MU_DEFAULT_CELLS};
use crate::linalg::norm2;
use crate::mesh::{BoundaryTag, TriangleMesh};

/// A converged solve of the limit problem.
#[derive(Debug, Clone)]
pub struct LimitSolution {
    pub field: FemField,
    pub cfg: ProblemConfig,
    pub norm_w1p: f64,
    /// mu sampled at the Gamma-edge Gauss points, in edge order.
    pub mu_samples: Vec<[f64; 2]>,
    pub diag: SolveDiagnostics,
}

/// Builds the Gamma-edge quadrature records, sampling mu at the two Gauss
/// points of each edge (mu is evaluated pointwise, never interpolated).
pub fn gamma_edge_quads(mesh: &TriangleMesh, fns: &ModelFunctions) -> Vec<EdgeQuad> {
    let xi = edge_gauss_xi();
    mesh.gamma_edges()
        .map(|e| {
            let (a, b) = e.vertices;
            let (xa, xb) = (mesh.vertices[a][0], mesh.vertices[b][0]);
            let length = (xb - xa).abs();
            let mu_at = |t: f64| mu(xa + t * (xb - xa), fns, MU_DEFAULT_CELLS);
            EdgeQuad {
                vertices: (a, b),
                length,
                mu_q: [mu_at(xi[0]), mu_at(xi[1])],
                xi_q: xi,
            }
        })
        .collect()
}

/// Solves the limit problem on the cylinder mesh.
pub fn solve_limit(
    cfg: &ProblemConfig,
    mesh: &TriangleMesh,
    cache: &ElementCache,
    initial: Option<&FemField>,
    mode: ExecMode,
) -> Result<LimitSolution> {
    cfg.validate()?;
    let edges = gamma_edge_quads(mesh, &cfg.functions);
    if edges.is_empty() {
        return Err(Error::InvalidInput(
            "mesh has no Gamma-tagged edges; expected a cylinder mesh".into(),
        ));
    }
    let mu_samples: Vec<[f64; 2]> = edges.iter().map(|e| e.mu_q).collect();
    let loads = vec![LoadTerm::Boundary(BoundaryLoad {
        reaction: cfg.functions.f,
        edges,
    })];
    let out = solve_continuation(mesh, cache, &loads, cfg.p, initial, &cfg.solver, mode)?;
    let norm = norm_w1p(mesh, cache, &out.field, cfg.p, Region::All);
    Ok(LimitSolution {
        field: out.field,
        cfg: cfg.clone(),
        norm_w1p: norm,
        mu_samples,
        diag: out.diag,
    })
}

/// Residual of the boundary balance: the Euclidean norm of the discrete weak
/// residual restricted to the Gamma nodes. At the discrete solution the weak
/// normal flux of the interior terms matches the boundary line integral for
/// every Gamma test function, so this is at solver-tolerance scale.
pub fn boundary_residual(
    sol: &LimitSolution,
    mesh: &TriangleMesh,
    cache: &ElementCache,
) -> Result<f64> {
    sol.field.check_compatible(mesh)?;
    let edges = gamma_edge_quads(mesh, &sol.cfg.functions);
    let loads = vec![LoadTerm::Boundary(BoundaryLoad {
        reaction: sol.cfg.functions.f,
        edges,
    })];
    let form = crate::fem::WeakForm::new(mesh, cache, sol.cfg.p, loads);
    let r = form.residual(&sol.field);
    let mut gamma_nodes: Vec<usize> = mesh
        .boundary_edges
        .iter()
        .filter(|e| e.tag == BoundaryTag::Gamma)
        .flat_map(|e| [e.vertices.0, e.vertices.1])
        .collect();
    gamma_nodes.sort_unstable();
    gamma_nodes.dedup();
    let restricted: Vec<f64> = gamma_nodes.iter().map(|&i| r[i]).collect();
    Ok(norm2(&restricted))
}
