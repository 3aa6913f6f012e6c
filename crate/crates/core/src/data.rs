//! Seeded test data: random trigonometric densities, grid-scale spikes, and
//! spikes placed on a Cantor set.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{param, Result};
use crate::fractal::cantor_measure;
use crate::grid::{lp_norm, Grid, GridFunction};

/// Number of modes in [`random_density`].
pub const DENSITY_MODES: u32 = 32;

/// `Σ_{k=1}^{32} a_k k^{-1/2} cos(2πk·x/L + θ_k)` with `a_k` uniform in
/// `[-1, 1)` and uniform phases, scaled to unit `L²` norm. In two dimensions
/// each mode gets a random direction `(k, k')` with `0 <= k' <= k`.
///
/// The spectrum does not depend on the grid, so refinements sample the same
/// function.
pub fn random_density(grid: &Grid, seed: u64) -> GridFunction {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let terms: Vec<(f64, [f64; 2], f64)> = (1..=DENSITY_MODES)
        .map(|k| {
            let a = rng.random_range(-1.0..1.0) / (k as f64).sqrt();
            let th = rng.random_range(0.0..TAU);
            let ky = if grid.dim() == 2 { rng.random_range(0..=k) as f64 } else { 0.0 };
            (a, [k as f64, ky], th)
        })
        .collect();
    let w = TAU / grid.extent();
    let f = GridFunction::from_fn(*grid, |x| {
        let y = x.get(1).copied().unwrap_or(0.0);
        terms
            .iter()
            .map(|(a, k, th)| a * (w * (k[0] * x[0] + k[1] * y) + th).cos())
            .sum()
    })
    .expect("finite density");
    let n = lp_norm(&f, 2.0).expect("p = 2 is valid");
    f.scale(1.0 / n)
}

/// As [`random_density`], shifted and rescaled to be nonnegative with unit
/// `L²` norm.
pub fn random_positive_density(grid: &Grid, seed: u64) -> GridFunction {
    let f = random_density(grid, seed);
    let lo = f.min();
    let g = f.map(|v| v - lo);
    let n = lp_norm(&g, 2.0).expect("p = 2 is valid");
    g.scale(1.0 / n)
}

/// One grid-scale spike at the sample nearest `x`, with unit `L²` norm.
pub fn spike(grid: &Grid, x: &[f64]) -> GridFunction {
    let mut s = vec![0.0; grid.len()];
    s[grid.nearest_index(x)] = grid.cell_volume().sqrt().recip();
    GridFunction::new(*grid, s).expect("grid-sized samples")
}

/// Equal grid-scale spikes at the midpoints of the level-`depth` intervals
/// of the Cantor set of similarity dimension `s`, with unit `L²` norm.
pub fn cantor_spikes(grid: &Grid, s: f64, depth: u32) -> Result<GridFunction> {
    if grid.dim() != 1 {
        return param("Cantor spikes need a one-dimensional grid");
    }
    let mu = cantor_measure(s, depth)?;
    let l = mu.interval_length();
    let mut v = vec![0.0; grid.len()];
    for (a, _) in mu.support() {
        v[grid.nearest_index(&[a + 0.5 * l])] += 1.0;
    }
    let f = GridFunction::new(*grid, v)?;
    let n = lp_norm(&f, 2.0)?;
    Ok(f.scale(1.0 / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn densities_are_normalised_and_seeded() {
        let g = make_grid(1, 10, 1.0).unwrap();
        let a = random_density(&g, 3);
        assert!((lp_norm(&a, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(a, random_density(&g, 3));
        assert_ne!(a, random_density(&g, 4));
        let p = random_positive_density(&g, 3);
        assert!(p.min() >= 0.0);
        // refinement samples the same function
        let fine = random_density(&make_grid(1, 12, 1.0).unwrap(), 3);
        assert!((fine.samples()[4 * 100] - a.samples()[100]).abs() < 1e-3);
        let g2 = make_grid(2, 5, 1.0).unwrap();
        assert!((lp_norm(&random_density(&g2, 1), 2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spikes() {
        let g = make_grid(1, 8, 1.0).unwrap();
        assert!((lp_norm(&spike(&g, &[0.3]), 2.0).unwrap() - 1.0).abs() < 1e-12);
        let c = cantor_spikes(&g, 0.5, 3).unwrap();
        assert_eq!(c.samples().iter().filter(|v| **v > 0.0).count(), 8);
        assert!(cantor_spikes(&make_grid(2, 3, 1.0).unwrap(), 0.5, 3).is_err());
    }
}
