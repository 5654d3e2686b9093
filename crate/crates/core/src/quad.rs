//! Gauss-Legendre quadrature rules used throughout the crate.

/// 8-point Gauss-Legendre rule on [-1, 1], pairs of (node, weight).
pub const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// 2-point Gauss-Legendre rule on [-1, 1].
pub const GAUSS2: [(f64, f64); 2] = [
    (-0.577_350_269_189_625_7, 1.0),
    (0.577_350_269_189_625_7, 1.0),
];

/// Composite 8-point Gauss quadrature of `f` over [a, b] with `n_cells`
/// equal subdivisions.
pub fn composite_gauss8<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n_cells: usize) -> f64 {
    assert!(n_cells >= 1, "n_cells must be at least 1");
    let dx = (b - a) / n_cells as f64;
    let mut total = 0.0;
    for c in 0..n_cells {
        let lo = a + c as f64 * dx;
        let mid = lo + 0.5 * dx;
        let half = 0.5 * dx;
        let mut cell = 0.0;
        for &(x, w) in &GAUSS8 {
            cell += w * f(mid + half * x);
        }
        total += cell * half;
    }
    total
}
