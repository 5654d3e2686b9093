//! Property-based checks of the algebraic building blocks.

use proptest::prelude::*;

use plaplab::concentrated::concentrated_integral_closed;
use plaplab::config::ProblemConfig;
use plaplab::geometry::{mu, StripDensity, MU_DEFAULT_CELLS};

fn flux(p: f64, a: [f64; 2]) -> [f64; 2] {
    let n = (a[0] * a[0] + a[1] * a[1]).sqrt();
    let w = if p == 2.0 { 1.0 } else { n.powf(p - 2.0) };
    [w * a[0], w * a[1]]
}

proptest! {
    /// (|a|^(p-2)a - |b|^(p-2)b) . (a - b) >= 0 for all p >= 2.
    #[test]
    fn flux_is_monotone(
        p in 2.0f64..4.0,
        ax in -10.0f64..10.0, ay in -10.0f64..10.0,
        bx in -10.0f64..10.0, by in -10.0f64..10.0,
    ) {
        let (wa, wb) = (flux(p, [ax, ay]), flux(p, [bx, by]));
        let pairing = (wa[0] - wb[0]) * (ax - bx) + (wa[1] - wb[1]) * (ay - by);
        prop_assert!(pairing >= 0.0, "pairing {pairing}");
    }

    /// The closed-form strip integral is linear in the integrand.
    #[test]
    fn closed_integral_is_linear(
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        eps in 0.02f64..0.25,
    ) {
        let mut cfg = ProblemConfig::default();
        cfg.epsilon = eps;
        cfg.functions.h = StripDensity::SinHalf;
        let w1 = |x: f64, y: f64| (x + 1.0) * (1.0 + y);
        let w2 = |x: f64, y: f64| (2.0 * x).cos();
        let lhs = concentrated_integral_closed(|x, y| a * w1(x, y) + b * w2(x, y), &cfg);
        let rhs = a * concentrated_integral_closed(w1, &cfg)
            + b * concentrated_integral_closed(w2, &cfg);
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
    }

    /// The cell-averaged density mu stays inside the range of h.
    #[test]
    fn mu_respects_density_range(x in 0.0f64..1.0) {
        let mut fns = ProblemConfig::default().functions;
        for h in [StripDensity::Constant(0.7), StripDensity::SinHalf, StripDensity::XCos] {
            fns.h = h;
            let m = mu(x, &fns, MU_DEFAULT_CELLS);
            // h ranges: const c; 1 + sin/2 in [1/2, 3/2]; 2(1+x)-ish in (0, 4]
            prop_assert!(m > 0.0 && m <= 4.0 + 1e-12, "mu {m} for {}", h.key());
        }
    }
}
