//! Problem configuration: admissibility checks and the flat `key = value`
//! config-file format used by the command-line front end.
//!
//! The file format is line oriented: `[section]` headers, `key = value`
//! pairs, `#` comments. Unknown sections or keys are hard errors.

use crate::error::{Error, Result};
use crate::geometry::{Cutoff, ModelFunctions, Profile, Reaction, StripDensity};

/// Mesh resolution parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshParams {
    /// Target column spacing in x; must satisfy `target_edge <= eps/8` so the
    /// profile oscillation is resolved.
    pub target_edge: f64,
    /// Vertical spacing in the bulk block y in (-1, 0).
    pub bulk_edge: f64,
    /// Number of element layers across the strip thickness.
    pub strip_layers: usize,
}

impl Default for MeshParams {
    fn default() -> Self {
        MeshParams {
            target_edge: 1.0 / 64.0,
            bulk_edge: 1.0 / 64.0,
            strip_layers: 2,
        }
    }
}

/// Nonlinear / linear solver parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Relative residual tolerance for Newton.
    pub rtol: f64,
    /// Absolute residual tolerance.
    pub atol: f64,
    /// Newton iteration cap per continuation stage.
    pub max_iter: usize,
    /// Max step halvings in the backtracking line search.
    pub max_backtracks: usize,
    /// Regularization: delta = delta_scale * rms(|grad u|), floored at 1e-14.
    pub delta_scale: f64,
    /// Picard fallback iteration cap.
    pub picard_max: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            rtol: 1e-10,
            atol: 1e-12,
            max_iter: 40,
            max_backtracks: 12,
            delta_scale: 1e-10,
            picard_max: 25,
        }
    }
}

/// Full problem description: perturbation scale, exponents, model functions,
/// mesh and solver parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConfig {
    pub epsilon: f64,
    pub gamma: f64,
    pub beta: f64,
    pub p: f64,
    pub functions: ModelFunctions,
    pub mesh: MeshParams,
    pub solver: SolverParams,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            epsilon: 0.1,
            gamma: 1.0,
            beta: 1.0,
            p: 2.0,
            functions: ModelFunctions::default(),
            mesh: MeshParams::default(),
            solver: SolverParams::default(),
        }
    }
}

impl ProblemConfig {
    /// Checks the standing hypotheses: eps > 0, gamma > 0, beta >= 0,
    /// 2 <= p, the rough top stays below y = 1 and the strip above y = -1.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Config(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::Config(format!(
                "beta must be nonnegative, got {}",
                self.beta
            )));
        }
        if !(self.p >= 2.0) {
            return Err(Error::Config(format!(
                "p >= 2 required (quasilinear hypothesis), got {}",
                self.p
            )));
        }
        let g1 = self.functions.g.upper_bound();
        if self.epsilon * g1 >= 1.0 {
            return Err(Error::Config(format!(
                "epsilon too large: profile amplitude eps*g1 = {} must stay below 1",
                self.epsilon * g1
            )));
        }
        let t_max = self.epsilon.powf(self.gamma + 1.0) * self.functions.h.upper_bound();
        if t_max > 1.0 {
            return Err(Error::Config(format!(
                "strip exits the domain: max thickness {t_max} exceeds the cylinder depth"
            )));
        }
        if self.mesh.strip_layers == 0 {
            return Err(Error::Config("strip_layers must be >= 1".into()));
        }
        if !(self.mesh.target_edge > 0.0) || !(self.mesh.bulk_edge > 0.0) {
            return Err(Error::Config("mesh edge targets must be positive".into()));
        }
        Ok(())
    }

    /// h_const value when h = const, else 1.0 (ignored).
    fn h_const(&self) -> f64 {
        match self.functions.h {
            StripDensity::Constant(c) => c,
            _ => 1.0,
        }
    }

    /// Canonical textual form of the resolved configuration; stable field
    /// order so identical configs hash identically.
    pub fn canonical_string(&self) -> String {
        format!(
            "epsilon={:.17e}\ngamma={:.17e}\nbeta={:.17e}\np={:.17e}\n\
             g={}\npsi={}\nh={}\nh_const={:.17e}\nf={}\n\
             target_edge={:.17e}\nbulk_edge={:.17e}\nstrip_layers={}\n\
             rtol={:.17e}\natol={:.17e}\nmax_iter={}\nmax_backtracks={}\n\
             delta_scale={:.17e}\npicard_max={}\n",
            self.epsilon,
            self.gamma,
            self.beta,
            self.p,
            self.functions.g.key(),
            self.functions.psi.key(),
            self.functions.h.key(),
            self.h_const(),
            self.functions.f.key(),
            self.mesh.target_edge,
            self.mesh.bulk_edge,
            self.mesh.strip_layers,
            self.solver.rtol,
            self.solver.atol,
            self.solver.max_iter,
            self.solver.max_backtracks,
            self.solver.delta_scale,
            self.solver.picard_max,
        )
    }
}

/// A parsed run configuration: the problem plus sweep controls.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    /// Epsilon values for sweeps, decreasing.
    pub eps_list: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemConfig::default(),
            eps_list: vec![0.2, 0.1, 0.05, 0.025],
        }
    }
}

impl RunConfig {
    pub fn canonical_string(&self) -> String {
        let eps: Vec<String> = self.eps_list.iter().map(|e| format!("{e:.17e}")).collect();
        format!(
            "{}eps_list={}\n",
            self.problem.canonical_string(),
            eps.join(",")
        )
    }

    /// Short deterministic content hash of the resolved configuration.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        let mut s = String::new();
        for b in digest.iter().take(6) {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

fn parse_f64(key: &str, val: &str) -> Result<f64> {
    val.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("key '{key}': expected a number, got '{val}'")))
}

fn parse_usize(key: &str, val: &str) -> Result<usize> {
    val.trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("key '{key}': expected an integer, got '{val}'")))
}

/// Parses the flat `[section]` / `key = value` config format. Unknown
/// sections and keys are hard errors; missing keys take defaults.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let mut run = RunConfig::default();
    let mut h_key = run.problem.functions.h.key().to_string();
    let mut h_const = 1.0;
    let mut section = String::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(Error::Parse(format!(
                    "line {}: malformed section header '{line}'",
                    lineno + 1
                )));
            }
            section = line[1..line.len() - 1].trim().to_string();
            match section.as_str() {
                "problem" | "functions" | "mesh" | "solver" | "sweep" => {}
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown section '[{other}]'; valid: problem, functions, mesh, solver, sweep",
                        lineno + 1
                    )))
                }
            }
            continue;
        }
        let (key, val) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
        })?;
        let key = key.trim();
        let val = val.trim();
        let p = &mut run.problem;
        match (section.as_str(), key) {
            ("problem", "epsilon") => p.epsilon = parse_f64(key, val)?,
            ("problem", "gamma") => p.gamma = parse_f64(key, val)?,
            ("problem", "beta") => p.beta = parse_f64(key, val)?,
            ("problem", "p") => p.p = parse_f64(key, val)?,
            ("functions", "g") => p.functions.g = Profile::from_key(val)?,
            ("functions", "psi") => p.functions.psi = Cutoff::from_key(val)?,
            ("functions", "h") => h_key = val.to_string(),
            ("functions", "h_const") => h_const = parse_f64(key, val)?,
            ("functions", "f") => p.functions.f = Reaction::from_key(val)?,
            ("mesh", "target_edge") => p.mesh.target_edge = parse_f64(key, val)?,
            ("mesh", "bulk_edge") => p.mesh.bulk_edge = parse_f64(key, val)?,
            ("mesh", "strip_layers") => p.mesh.strip_layers = parse_usize(key, val)?,
            ("solver", "rtol") => p.solver.rtol = parse_f64(key, val)?,
            ("solver", "atol") => p.solver.atol = parse_f64(key, val)?,
            ("solver", "max_iter") => p.solver.max_iter = parse_usize(key, val)?,
            ("solver", "max_backtracks") => p.solver.max_backtracks = parse_usize(key, val)?,
            ("solver", "delta_scale") => p.solver.delta_scale = parse_f64(key, val)?,
            ("solver", "picard_max") => p.solver.picard_max = parse_usize(key, val)?,
            ("sweep", "eps_list") => {
                let mut eps = Vec::new();
                for part in val.split(',') {
                    eps.push(parse_f64(key, part)?);
                }
                if eps.is_empty() {
                    return Err(Error::Parse("eps_list must not be empty".into()));
                }
                run.eps_list = eps;
            }
            (sec, k) => {
                return Err(Error::Parse(format!(
                    "line {}: unknown key '{k}' in section '[{sec}]'",
                    lineno + 1
                )))
            }
        }
    }

    run.problem.functions.h = StripDensity::from_key(&h_key, h_const)?;
    run.problem.validate()?;
    for w in run.eps_list.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::Config(format!(
                "eps_list must be strictly decreasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    // The largest sweep epsilon must itself be admissible.
    if let Some(&e0) = run.eps_list.first() {
        let mut probe = run.problem;
        probe.epsilon = e0;
        probe.validate()?;
    }
    Ok(run)
}

/// Reads and parses a config file.
pub fn load_run_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read '{}': {e}", path.display())))?;
    parse_run_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
# demo config
[problem]
epsilon = 0.1
gamma = 1.0
beta = 1.0
p = 3.0

[functions]
h = xcos
f = tanh_shifted

[mesh]
target_edge = 0.0125
strip_layers = 3

[sweep]
eps_list = 0.1, 0.05
";

    #[test]
    fn parses_sample() {
        let run = parse_run_config(SAMPLE).unwrap();
        assert_eq!(run.problem.p, 3.0);
        assert_eq!(run.problem.functions.h, StripDensity::XCos);
        assert_eq!(run.problem.functions.f, Reaction::TanhShifted);
        assert_eq!(run.problem.mesh.strip_layers, 3);
        assert_eq!(run.eps_list, vec![0.1, 0.05]);
    }

    #[test]
    fn rejects_small_p() {
        let bad = "[problem]\np = 1.5\n";
        let err = parse_run_config(bad).unwrap_err();
        assert!(err.to_string().contains("p >= 2"));
    }

    #[test]
    fn rejects_unknown_key() {
        let bad = "[problem]\nepsilonn = 0.1\n";
        assert!(parse_run_config(bad).is_err());
    }

    #[test]
    fn rejects_unknown_registry_key() {
        let bad = "[functions]\nf = cos\n";
        let err = parse_run_config(bad).unwrap_err();
        assert!(err.to_string().contains("available"));
    }

    #[test]
    fn rejects_increasing_eps_list() {
        let bad = "[sweep]\neps_list = 0.05, 0.1\n";
        assert!(parse_run_config(bad).is_err());
    }

    #[test]
    fn hash_is_deterministic_and_sensitive() {
        let a = parse_run_config(SAMPLE).unwrap();
        let b = parse_run_config(SAMPLE).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        let c = parse_run_config(&SAMPLE.replace("0.0125", "0.025")).unwrap();
        assert_ne!(a.content_hash(), c.content_hash());
    }

    #[test]
    fn validate_rejects_huge_epsilon() {
        let mut cfg = ProblemConfig::default();
        cfg.epsilon = 0.4; // 0.4 * g1 = 1.2 >= 1
        assert!(cfg.validate().is_err());
    }
}
