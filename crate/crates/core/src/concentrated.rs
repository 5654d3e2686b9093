//! Concentrated integrals over the thin strip, the functional they induce on
//! finite-element fields, and numerical verification of their limits and
//! uniform bounds.

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::exec::{sum_indexed, ExecMode};
use crate::fem::{norm_w1p, ElementCache, FemField, Region};
use crate::geometry::{eval_profile, mu, strip_thickness, MU_DEFAULT_CELLS, OMEGA};
use crate::mesh::TriangleMesh;
use crate::quad::{composite_gauss8, GAUSS8};

const MID_PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// One row of a concentration-limit sweep.
#[derive(Debug, Clone)]
pub struct ConcentrationRecord {
    pub epsilon: f64,
    /// The scaled strip integral at this epsilon.
    pub value: f64,
    /// The homogenized boundary integral with density mu(x).
    pub limit: f64,
    pub abs_error: f64,
    /// Alternative limit candidate with density h(x, x), relevant when
    /// beta = 0 (strip oscillation locked to the macroscopic variable).
    pub candidate_beta0: f64,
}

impl ConcentrationRecord {
    pub fn csv_header() -> &'static str {
        "epsilon,value,limit,abs_error,candidate_beta0"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.epsilon, self.value, self.limit, self.abs_error, self.candidate_beta0
        )
    }
}

/// Scaled strip integral of a nodal field: `eps^-(gamma+1) * integral of w
/// over the strip`, computed as an exact sum over the tagged strip elements
/// with the mid-edge rule.
pub fn concentrated_integral_field(
    mesh: &TriangleMesh,
    cache: &ElementCache,
    w: &FemField,
    cfg: &ProblemConfig,
) -> Result<f64> {
    w.check_compatible(mesh)?;
    if mesh.strip_elements.is_empty() {
        return Err(Error::MissingStripTags);
    }
    let scale = cfg.epsilon.powf(cfg.gamma + 1.0).recip();
    let total = sum_indexed(ExecMode::default(), mesh.strip_elements.len(), |i| {
        let t = mesh.strip_elements[i];
        let tri = mesh.triangles[t];
        let area = cache.areas[t];
        let mut e = 0.0;
        for (a, b) in MID_PAIRS {
            e += (area / 3.0) * 0.5 * (w.coeffs[tri[a]] + w.coeffs[tri[b]]);
        }
        e
    });
    Ok(scale * total)
}

/// Scaled strip integral of a closed-form integrand, via the substitution
/// y2 = (y - G + T) / T that maps the strip at each x onto (0, 1) with
/// Jacobian T = eps^(gamma+1) h. The eps powers cancel, leaving
///
///   integral over omega of integral 0..1 of
///       w(x, G(x) - T(x)(1 - y2)) * h(x, x/eps^beta) dy2 dx,
///
/// evaluated with tensor 8x8 Gauss on x-cells narrow enough to resolve the
/// oscillations of both g and h.
pub fn concentrated_integral_closed<F: Fn(f64, f64) -> f64>(w: F, cfg: &ProblemConfig) -> f64 {
    let fns = &cfg.functions;
    let micro = cfg.epsilon.min(cfg.epsilon.powf(cfg.beta));
    let width = OMEGA.1 - OMEGA.0;
    let n_cells = (width / (micro / 8.0)).ceil().max(1.0) as usize;
    composite_gauss8(
        |x| {
            let g_top = eval_profile(x, cfg);
            let t = strip_thickness(x, cfg);
            let h = fns.h(x, x / cfg.epsilon.powf(cfg.beta));
            let mut inner = 0.0;
            for &(xi, wt) in &GAUSS8 {
                let y2 = 0.5 * (xi + 1.0);
                let y = g_top - t * (1.0 - y2);
                inner += 0.5 * wt * w(x, y);
            }
            h * inner
        },
        OMEGA.0,
        OMEGA.1,
        n_cells,
    )
}

/// The functional pairing: scaled strip integral of `f(u) * phi`.
pub fn apply_concentrated_functional(
    mesh: &TriangleMesh,
    cache: &ElementCache,
    u: &FemField,
    phi: &FemField,
    cfg: &ProblemConfig,
) -> Result<f64> {
    u.check_compatible(mesh)?;
    phi.check_compatible(mesh)?;
    if mesh.strip_elements.is_empty() {
        return Err(Error::MissingStripTags);
    }
    let fns = &cfg.functions;
    let scale = cfg.epsilon.powf(cfg.gamma + 1.0).recip();
    let total = sum_indexed(ExecMode::default(), mesh.strip_elements.len(), |i| {
        let t = mesh.strip_elements[i];
        let tri = mesh.triangles[t];
        let area = cache.areas[t];
        let mut e = 0.0;
        for (a, b) in MID_PAIRS {
            let um = 0.5 * (u.coeffs[tri[a]] + u.coeffs[tri[b]]);
            let pm = 0.5 * (phi.coeffs[tri[a]] + phi.coeffs[tri[b]]);
            e += (area / 3.0) * fns.f(um) * pm;
        }
        e
    });
    Ok(scale * total)
}

/// Sweeps the scaled strip integral of `u * phi` (or `f(u) * phi` when
/// `compose_reaction` is set) over a decreasing epsilon list and compares
/// against the homogenized boundary integral and the beta = 0 candidate.
pub fn verify_concentration<U, P>(
    u: U,
    phi: P,
    cfg_base: &ProblemConfig,
    eps_list: &[f64],
    compose_reaction: bool,
) -> Result<Vec<ConcentrationRecord>>
where
    U: Fn(f64, f64) -> f64,
    P: Fn(f64, f64) -> f64,
{
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
    let fns = &cfg_base.functions;
    let compose = |v: f64| if compose_reaction { fns.f(v) } else { v };
    let trace = |x: f64| compose(u(x, 0.0)) * phi(x, 0.0);
    let limit = composite_gauss8(
        |x| mu(x, fns, MU_DEFAULT_CELLS) * trace(x),
        OMEGA.0,
        OMEGA.1,
        64,
    );
    let candidate_beta0 = composite_gauss8(|x| fns.h(x, x) * trace(x), OMEGA.0, OMEGA.1, 256);
    let mut records = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let mut cfg = cfg_base.clone();
        cfg.epsilon = eps;
        cfg.validate()?;
        let value = concentrated_integral_closed(|x, y| compose(u(x, y)) * phi(x, y), &cfg);
        records.push(ConcentrationRecord {
            epsilon: eps,
            value,
            limit,
            abs_error: (value - limit).abs(),
            candidate_beta0,
        });
    }
    Ok(records)
}

/// Ratios `[eps^-(gamma+1) integral over strip of |u|^p] / ||u||^p` per
/// sample; the empirical constant of the uniform concentration bound.
pub fn verify_uniform_bound(
    samples: &[(&TriangleMesh, &ElementCache, &FemField, &ProblemConfig)],
) -> Result<Vec<f64>> {
    let mut ratios = Vec::with_capacity(samples.len());
    for (mesh, cache, u, cfg) in samples {
        let norm = norm_w1p(mesh, cache, u, cfg.p, Region::All);
        if norm == 0.0 {
            return Err(Error::InvalidInput(
                "uniform-bound sample with zero W^{1,p} norm".into(),
            ));
        }
        let abs_field = FemField {
            coeffs: u.coeffs.iter().map(|c| c.abs().powf(cfg.p)).collect(),
        };
        let value = concentrated_integral_field(mesh, cache, &abs_field, cfg)?;
        ratios.push(value / norm.powf(cfg.p));
    }
    Ok(ratios)
}

/// Lipschitz ratio of the concentrated functional between two iterates:
/// `|<F(u) - F(v), phi>| / (||u - v|| ||phi||)` in W^{1,p} norms.
pub fn verify_lipschitz(
    mesh: &TriangleMesh,
    cache: &ElementCache,
    u: &FemField,
    v: &FemField,
    phi: &FemField,
    cfg: &ProblemConfig,
) -> Result<f64> {
    if u.coeffs == v.coeffs {
        return Err(Error::InvalidInput(
            "lipschitz ratio requires u != v".into(),
        ));
    }
    let fu = apply_concentrated_functional(mesh, cache, u, phi, cfg)?;
    let fv = apply_concentrated_functional(mesh, cache, v, phi, cfg)?;
    let diff = FemField {
        coeffs: u
            .coeffs
            .iter()
            .zip(&v.coeffs)
            .map(|(a, b)| a - b)
            .collect(),
    };
    let nd = norm_w1p(mesh, cache, &diff, cfg.p, Region::All);
    let np = norm_w1p(mesh, cache, phi, cfg.p, Region::All);
    if np == 0.0 {
        return Ok(0.0);
    }
    Ok((fu - fv).abs() / (nd * np))
}
