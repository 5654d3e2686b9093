//! Rough-profile evaluation, strip geometry, and the homogenized density mu.
//!
//! The domain is the rough set
//! `{(x, y) : x in (0,1), -1 < y < eps * psi(x) * g(x/eps)}` and the reaction
//! strip is the band of thickness `eps^(gamma+1) * h(x, x/eps^beta)` hanging
//! under the top profile. All model functions live in a small closed-form
//! registry so that every quantity has an analytic oracle.

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::quad::composite_gauss8;
use std::f64::consts::PI;

/// The base interval omega = (0, 1).
pub const OMEGA: (f64, f64) = (0.0, 1.0);

/// Periodic top-profile shape `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// g(s) = 2 + sin(2*pi*s), bounds g0 = 1, g1 = 3.
    Sin,
}

impl Profile {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Profile::Sin => 2.0 + (2.0 * PI * s).sin(),
        }
    }

    pub fn lower_bound(&self) -> f64 {
        match self {
            Profile::Sin => 1.0,
        }
    }

    pub fn upper_bound(&self) -> f64 {
        match self {
            Profile::Sin => 3.0,
        }
    }

    pub fn from_key(key: &str) -> Result<Self> {
        match key {
            "sin" => Ok(Profile::Sin),
            other => Err(Error::Config(format!(
                "unknown profile key '{other}'; available: sin"
            ))),
        }
    }

    pub fn key(&self) -> &'static str {
        match self {
            Profile::Sin => "sin",
        }
    }
}

/// Smooth cutoff `psi` with compact support strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    /// Bump exp(1 - 1/(1 - t^2)) with t = (x - 0.5)/0.4; support [0.1, 0.9],
    /// peak value 1 at x = 0.5.
    Bump,
}

impl Cutoff {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Cutoff::Bump => {
                let t = (x - 0.5) / 0.4;
                if t.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - t * t)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Closed support of the cutoff.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Cutoff::Bump => (0.1, 0.9),
        }
    }

    pub fn from_key(key: &str) -> Result<Self> {
        match key {
            "bump" => Ok(Cutoff::Bump),
            other => Err(Error::Config(format!(
                "unknown cutoff key '{other}'; available: bump"
            ))),
        }
    }

    pub fn key(&self) -> &'static str {
        match self {
            Cutoff::Bump => "bump",
        }
    }
}

/// Strip thickness density `h(x, s)`, 1-periodic in `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StripDensity {
    /// h = c constant; mu = c.
    Constant(f64),
    /// h = 1 + sin(2*pi*s)/2; mu = 1.
    SinHalf,
    /// h = (1 + x)(2 + cos(2*pi*s)); mu = 2(1 + x).
    XCos,
}

impl StripDensity {
    pub fn eval(&self, x: f64, s: f64) -> f64 {
        match self {
            StripDensity::Constant(c) => *c,
            StripDensity::SinHalf => 1.0 + 0.5 * (2.0 * PI * s).sin(),
            StripDensity::XCos => (1.0 + x) * (2.0 + (2.0 * PI * s).cos()),
        }
    }

    /// sup of h over omega x [0,1].
    pub fn upper_bound(&self) -> f64 {
        match self {
            StripDensity::Constant(c) => *c,
            StripDensity::SinHalf => 1.5,
            StripDensity::XCos => 6.0,
        }
    }

    /// Closed-form period average of h(x, .), when known.
    pub fn mu_exact(&self, x: f64) -> Option<f64> {
        match self {
            StripDensity::Constant(c) => Some(*c),
            StripDensity::SinHalf => Some(1.0),
            StripDensity::XCos => Some(2.0 * (1.0 + x)),
        }
    }

    pub fn from_key(key: &str, h_const: f64) -> Result<Self> {
        match key {
            "const" => {
                if h_const < 0.0 {
                    return Err(Error::Config(format!(
                        "h_const must be nonnegative, got {h_const}"
                    )));
                }
                Ok(StripDensity::Constant(h_const))
            }
            "sin" => Ok(StripDensity::SinHalf),
            "xcos" => Ok(StripDensity::XCos),
            other => Err(Error::Config(format!(
                "unknown strip density key '{other}'; available: const, sin, xcos"
            ))),
        }
    }

    pub fn key(&self) -> &'static str {
        match self {
            StripDensity::Constant(_) => "const",
            StripDensity::SinHalf => "sin",
            StripDensity::XCos => "xcos",
        }
    }
}

/// Bounded reaction nonlinearity `f` with bounded derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reaction {
    /// f = 1, f' = 0.
    One,
    /// f(u) = tanh(u); note f(0) = 0, so the zero field solves both problems.
    Tanh,
    /// f(u) = tanh(u + 1); nonzero at u = 0 so the solutions are nontrivial.
    TanhShifted,
    /// f = 0, for trivial-solution tests.
    Zero,
}

impl Reaction {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Reaction::One => 1.0,
            Reaction::Tanh => u.tanh(),
            Reaction::TanhShifted => (u + 1.0).tanh(),
            Reaction::Zero => 0.0,
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match self {
            Reaction::One | Reaction::Zero => 0.0,
            Reaction::Tanh => {
                let t = u.tanh();
                1.0 - t * t
            }
            Reaction::TanhShifted => {
                let t = (u + 1.0).tanh();
                1.0 - t * t
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Reaction::One | Reaction::Tanh | Reaction::TanhShifted => 1.0,
            Reaction::Zero => 0.0,
        }
    }

    pub fn sup_derivative(&self) -> f64 {
        match self {
            Reaction::One | Reaction::Zero => 0.0,
            Reaction::Tanh | Reaction::TanhShifted => 1.0,
        }
    }

    pub fn from_key(key: &str) -> Result<Self> {
        match key {
            "one" => Ok(Reaction::One),
            "tanh" => Ok(Reaction::Tanh),
            "tanh_shifted" => Ok(Reaction::TanhShifted),
            "zero" => Ok(Reaction::Zero),
            other => Err(Error::Config(format!(
                "unknown reaction key '{other}'; available: one, tanh, tanh_shifted, zero"
            ))),
        }
    }

    pub fn key(&self) -> &'static str {
        match self {
            Reaction::One => "one",
            Reaction::Tanh => "tanh",
            Reaction::TanhShifted => "tanh_shifted",
            Reaction::Zero => "zero",
        }
    }
}

/// Bundle of closed-form model functions selected from the registry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelFunctions {
    pub g: Profile,
    pub psi: Cutoff,
    pub h: StripDensity,
    pub f: Reaction,
}

impl Default for ModelFunctions {
    fn default() -> Self {
        ModelFunctions {
            g: Profile::Sin,
            psi: Cutoff::Bump,
            h: StripDensity::SinHalf,
            f: Reaction::One,
        }
    }
}

impl ModelFunctions {
    pub fn g(&self, s: f64) -> f64 {
        self.g.eval(s)
    }

    pub fn psi(&self, x: f64) -> f64 {
        self.psi.eval(x)
    }

    pub fn h(&self, x: f64, s: f64) -> f64 {
        self.h.eval(x, s)
    }

    pub fn f(&self, u: f64) -> f64 {
        self.f.eval(u)
    }

    pub fn f_prime(&self, u: f64) -> f64 {
        self.f.derivative(u)
    }

    pub fn mu_exact(&self, x: f64) -> Option<f64> {
        self.h.mu_exact(x)
    }
}

/// Height of the rough top boundary, `G_eps(x) = eps * psi(x) * g(x/eps)`.
pub fn eval_profile(x: f64, cfg: &ProblemConfig) -> f64 {
    let fns = &cfg.functions;
    cfg.epsilon * fns.psi(x) * fns.g(x / cfg.epsilon)
}

/// Strip thickness `eps^(gamma+1) * h(x, x/eps^beta)` at `x`.
pub fn strip_thickness(x: f64, cfg: &ProblemConfig) -> f64 {
    let fns = &cfg.functions;
    cfg.epsilon.powf(cfg.gamma + 1.0) * fns.h(x, x / cfg.epsilon.powf(cfg.beta))
}

/// Lower and upper strip bounds at `x`; errors when the strip would exit
/// the domain through y = -1.
pub fn strip_bounds(x: f64, cfg: &ProblemConfig) -> Result<(f64, f64)> {
    let y_hi = eval_profile(x, cfg);
    let y_lo = y_hi - strip_thickness(x, cfg);
    if y_lo < -1.0 {
        return Err(Error::Config(format!(
            "strip exits the domain at x = {x}: lower bound {y_lo} < -1; epsilon too large"
        )));
    }
    Ok((y_lo, y_hi))
}

/// Characteristic function of the open strip.
pub fn in_strip(x: f64, y: f64, cfg: &ProblemConfig) -> bool {
    if x <= OMEGA.0 || x >= OMEGA.1 {
        return false;
    }
    let y_hi = eval_profile(x, cfg);
    let y_lo = y_hi - strip_thickness(x, cfg);
    y_lo < y && y < y_hi
}

/// Homogenized density `mu(x)`: period average of h(x, .), computed with a
/// composite 8-point Gauss rule over `n_cells` subdivisions of one period.
pub fn mu(x: f64, fns: &ModelFunctions, n_cells: usize) -> f64 {
    composite_gauss8(|s| fns.h(x, s), 0.0, 1.0, n_cells)
}

/// Default subdivision count for `mu`.
pub const MU_DEFAULT_CELLS: usize = 16;
