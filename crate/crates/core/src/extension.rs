//! Fields on the upper half-space sampled at a ladder of heights: Poisson
//! extensions, ball-average fields and the dyadic-annuli model field.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{param, Result};
use crate::grid::{forward_dft, inverse_dft_real, BallStencil, Grid, GridFunction, PowerSums};

/// How a [`HalfSpaceField`] was produced.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    Poisson,
    /// Dyadic-annuli model field; a bound model, not a PDE solution.
    Surrogate {
        alpha_l: f64,
        r: f64,
        j_max: u32,
        /// Bound on the omitted annuli `j > J`.
        tail_bound: f64,
    },
    BallAverage {
        q: f64,
    },
    Other,
}

/// Values `u(t_k, x_i)` for strictly decreasing heights `t_0 > t_1 > ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceField {
    grid: Grid,
    heights: Vec<f64>,
    values: Vec<f64>,
    kind: FieldKind,
}

/// `t_k = t0 * 2^{-k}` for `k = 0..=last`.
pub fn dyadic_heights(t0: f64, last: u32) -> Vec<f64> {
    (0..=last).map(|k| t0 * 0.5f64.powi(k as i32)).collect()
}

fn check_heights(heights: &[f64]) -> Result<()> {
    if heights.is_empty() {
        return param("at least one height is required");
    }
    if heights.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return param("heights must be positive and finite");
    }
    if heights.windows(2).any(|w| w[1] >= w[0]) {
        return param("heights must be strictly decreasing");
    }
    Ok(())
}

impl HalfSpaceField {
    /// `values` holds one row-major slice per height, concatenated.
    pub fn new(grid: Grid, heights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::with_kind(grid, heights, values, FieldKind::Other)
    }

    pub fn with_kind(grid: Grid, heights: Vec<f64>, values: Vec<f64>, kind: FieldKind) -> Result<Self> {
        check_heights(&heights)?;
        if values.len() != heights.len() * grid.len() {
            return param(format!(
                "expected {} values for {} heights, got {}",
                heights.len() * grid.len(),
                heights.len(),
                values.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return param("field values must be finite");
        }
        Ok(Self {
            grid,
            heights,
            values,
            kind,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn slice_function(&self, k: usize) -> GridFunction {
        GridFunction::from_vec_unchecked(self.grid, self.slice(k).to_vec())
    }

    /// Index of the height equal to `t` up to a relative `1e-9`.
    pub fn height_index(&self, t: f64) -> Option<usize> {
        self.heights
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs())
    }

    /// Applies `f` to every value, keeping the heights.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            heights: self.heights.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            kind: FieldKind::Other,
        }
    }
}

/// `u_f(t, ·) = P_t * f` at each height, through the multiplier `e^{-2πt|ξ|}`.
pub fn poisson_extend(f: &GridFunction, heights: &[f64]) -> Result<HalfSpaceField> {
    check_heights(heights)?;
    let g = *f.grid();
    let spec = forward_dft(f);
    let norms: Vec<f64> = (0..g.len())
        .map(|i| {
            let (xi, _) = g.frequency(i);
            (xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
        })
        .collect();
    let slices: Vec<Vec<f64>> = heights
        .par_iter()
        .map(|&t| {
            let s: Vec<Complex64> = spec
                .iter()
                .zip(&norms)
                .map(|(c, r)| c * (-2.0 * PI * t * r).exp())
                .collect();
            inverse_dft_real(&g, s).into_samples()
        })
        .collect();
    HalfSpaceField::with_kind(g, heights.to_vec(), slices.concat(), FieldKind::Poisson)
}

fn capped_radius(g: &Grid, r: f64) -> f64 {
    r.min(0.25 * g.extent())
}

/// `v(t, x) = (⨍_{Δ(x, 2t)} |f|^q)^{1/q}`, radius capped at `L/4`.
pub fn average_field(f: &GridFunction, heights: &[f64], q: f64) -> Result<HalfSpaceField> {
    check_heights(heights)?;
    if !(q >= 1.0) {
        return param(format!("q must be >= 1, got {q}"));
    }
    let g = *f.grid();
    let ps = PowerSums::new(f, q);
    let slices: Vec<Vec<f64>> = heights
        .par_iter()
        .map(|&t| {
            let st = BallStencil::new(&g, capped_radius(&g, 2.0 * t));
            (0..g.len()).map(|i| ps.ball_mean(&st, i, q)).collect()
        })
        .collect();
    HalfSpaceField::with_kind(g, heights.to_vec(), slices.concat(), FieldKind::BallAverage { q })
}

/// Dyadic-annuli model field
/// `w(t, x) = Σ_{j=0}^{J} 2^{-α_L j} (⨍_{Δ(x, min(2^{j+1} t, L/4))} |f|^r)^{1/r}`.
///
/// The omitted annuli are bounded by `2^{-α_L J} / (1 - 2^{-α_L}) ‖f‖_∞`,
/// recorded in the field kind.
pub fn annuli_surrogate(
    f: &GridFunction,
    heights: &[f64],
    alpha_l: f64,
    r: f64,
    j_max: u32,
) -> Result<HalfSpaceField> {
    check_heights(heights)?;
    if !(alpha_l > 0.0 && alpha_l <= 1.0) {
        return param(format!("α_L must lie in (0, 1], got {alpha_l}"));
    }
    if !(r >= 1.0) {
        return param(format!("r must be >= 1, got {r}"));
    }
    if j_max < 1 {
        return param("J must be at least 1");
    }
    let g = *f.grid();
    let ps = PowerSums::new(f, r);
    let slices: Vec<Vec<f64>> = heights
        .par_iter()
        .map(|&t| {
            let mut acc = vec![0.0; g.len()];
            let mut j = 0u32;
            while j <= j_max {
                let rad = capped_radius(&g, 2f64.powi(j as i32 + 1) * t);
                // once the radius is capped, the remaining terms share one average
                let capped = rad < 2f64.powi(j as i32 + 1) * t;
                let weight: f64 = if capped {
                    (j..=j_max).map(|i| 2f64.powf(-alpha_l * i as f64)).sum()
                } else {
                    2f64.powf(-alpha_l * j as f64)
                };
                let st = BallStencil::new(&g, rad);
                for (i, a) in acc.iter_mut().enumerate() {
                    *a += weight * ps.ball_mean(&st, i, r);
                }
                if capped {
                    break;
                }
                j += 1;
            }
            acc
        })
        .collect();
    let tail_bound = 2f64.powf(-alpha_l * j_max as f64) / (1.0 - 2f64.powf(-alpha_l)) * f.max_abs();
    HalfSpaceField::with_kind(
        g,
        heights.to_vec(),
        slices.concat(),
        FieldKind::Surrogate {
            alpha_l,
            r,
            j_max,
            tail_bound,
        },
    )
}
