//! Periodic grids on the torus `[0, L)^dim` and sampled functions on them.
//!
//! Everything downstream (kernels, potentials, maximal functions) works on
//! [`GridFunction`]s. Points are passed as `&[f64]` slices of length `dim`;
//! distances always use the wrap-around metric of the torus.

use std::cell::RefCell;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{param, Result};

/// Uniform grid with `2^levels` points per axis on the torus `[0, extent)^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    levels: u32,
    extent: f64,
}

impl Grid {
    pub fn new(dim: usize, levels: u32, extent: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return param(format!("dim must be 1 or 2, got {dim}"));
        }
        let max_levels = if dim == 1 { 24 } else { 12 };
        if !(2..=max_levels).contains(&levels) {
            return param(format!(
                "levels must lie in [2, {max_levels}] for dim {dim}, got {levels}"
            ));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return param(format!("extent must be positive and finite, got {extent}"));
        }
        Ok(Self { dim, levels, extent })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        1usize << self.levels
    }

    /// Total number of samples, `n^dim`.
    pub fn len(&self) -> usize {
        self.n().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.n() as f64
    }

    /// Volume of one grid cell, `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Per-axis indices of a flat (row-major) index.
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n(), idx % self.n()]
        }
    }

    pub fn flatten(&self, ij: [usize; 2]) -> usize {
        if self.dim == 1 {
            ij[0]
        } else {
            ij[0] * self.n() + ij[1]
        }
    }

    /// Coordinates of sample `idx`; unused axes are zero.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        let ij = self.unflatten(idx);
        [ij[0] as f64 * h, ij[1] as f64 * h]
    }

    /// Signed displacement `a - b` along one axis, wrapped into `[-L/2, L/2)`.
    pub fn wrap(&self, d: f64) -> f64 {
        let l = self.extent;
        let mut w = d.rem_euclid(l);
        if w >= 0.5 * l {
            w -= l;
        }
        w
    }

    /// Torus displacement `a - b`.
    pub fn displacement(&self, a: &[f64], b: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for k in 0..self.dim {
            out[k] = self.wrap(a[k] - b[k]);
        }
        out
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let d = self.displacement(a, b);
        (d[0] * d[0] + d[1] * d[1]).sqrt()
    }

    /// Flat index of the grid point nearest to `x` (ties round up).
    pub fn nearest_index(&self, x: &[f64]) -> usize {
        let h = self.spacing();
        let n = self.n() as i64;
        let mut ij = [0usize; 2];
        for k in 0..self.dim {
            let i = (x[k] / h).round() as i64;
            ij[k] = i.rem_euclid(n) as usize;
        }
        self.flatten(ij)
    }

    /// Per-axis index of `x` when it lies on the lattice (to 1e-9 cells).
    pub(crate) fn lattice_index(&self, x: &[f64]) -> Option<[usize; 2]> {
        let h = self.spacing();
        let n = self.n() as i64;
        let mut ij = [0usize; 2];
        for k in 0..self.dim {
            let s = x[k] / h;
            let r = s.round();
            if (s - r).abs() > 1e-9 {
                return None;
            }
            ij[k] = (r as i64).rem_euclid(n) as usize;
        }
        Some(ij)
    }

    /// Signed per-axis frequencies `k / L` of a flat spectral index, and
    /// whether any axis sits at the Nyquist mode.
    pub fn frequency(&self, idx: usize) -> ([f64; 2], bool) {
        let n = self.n();
        let ij = self.unflatten(idx);
        let mut xi = [0.0; 2];
        let mut nyquist = false;
        for k in 0..self.dim {
            let i = ij[k];
            if i == n / 2 {
                nyquist = true;
            }
            let s = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            xi[k] = s / self.extent;
        }
        (xi, nyquist)
    }
}

/// Real samples of a function on a [`Grid`], row-major for `dim == 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return param(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            ));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return param(format!("sample {i} is not finite"));
        }
        Ok(Self { grid, samples })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self { grid, samples }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            samples: vec![c; grid.len()],
        }
    }

    /// Samples `f` at every grid point. Non-finite values are rejected.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let samples = (0..grid.len())
            .map(|i| {
                let x = grid.coords(i);
                f(&x[..grid.dim()])
            })
            .collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Riemann-sum integral `h^dim * sum f_i`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * self.samples.iter().sum::<f64>()
    }

    /// Value at the grid point nearest to `x`.
    pub fn value_near(&self, x: &[f64]) -> f64 {
        self.samples[self.grid.nearest_index(x)]
    }

    /// Periodic linear (bilinear in 2D) interpolation at `x`.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let g = &self.grid;
        let h = g.spacing();
        let n = g.n() as i64;
        let mut base = [0i64; 2];
        let mut w = [0.0; 2];
        for k in 0..g.dim() {
            let s = x[k] / h;
            let fl = s.floor();
            base[k] = fl as i64;
            w[k] = s - fl;
        }
        let at = |a: i64, b: i64| {
            let ij = [a.rem_euclid(n) as usize, b.rem_euclid(n) as usize];
            self.samples[g.flatten(ij)]
        };
        if g.dim() == 1 {
            (1.0 - w[0]) * at(base[0], 0) + w[0] * at(base[0] + 1, 0)
        } else {
            let (i, j) = (base[0], base[1]);
            let lo = (1.0 - w[1]) * at(i, j) + w[1] * at(i, j + 1);
            let hi = (1.0 - w[1]) * at(i + 1, j) + w[1] * at(i + 1, j + 1);
            (1.0 - w[0]) * lo + w[0] * hi
        }
    }

    /// Translate by a whole number of cells per axis: `g(x) = f(x + shift*h)`.
    pub fn shifted(&self, shift: [i64; 2]) -> Self {
        let n = self.grid.n() as i64;
        let g = self.grid;
        let samples = (0..g.len())
            .map(|idx| {
                let ij = g.unflatten(idx);
                let mut src = [0usize; 2];
                for k in 0..g.dim() {
                    src[k] = (ij[k] as i64 + shift[k]).rem_euclid(n) as usize;
                }
                self.samples[g.flatten(src)]
            })
            .collect();
        Self { grid: g, samples }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }
}

pub(crate) fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a != b {
        return param(format!("grid mismatch: {a:?} vs {b:?}"));
    }
    Ok(())
}

pub fn make_grid(dim: usize, levels: u32, extent: f64) -> Result<Grid> {
    Grid::new(dim, levels, extent)
}

/// Discrete `L^p` norm `(h^dim sum |f_i|^p)^{1/p}`; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return param(format!("lp_norm requires p >= 1, got {p}"));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let vol = f.grid.cell_volume();
    let s: f64 = if p == 1.0 {
        f.samples.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        f.samples.iter().map(|v| v * v).sum()
    } else {
        f.samples.iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((vol * s).powf(1.0 / p))
}

/// Offsets of the grid points strictly inside a ball centred at a grid point.
///
/// Row `dy` covers column offsets `-half..=half`; `None` means the whole row.
#[derive(Debug, Clone)]
pub struct BallStencil {
    pub(crate) rows: Vec<(i64, Option<usize>)>,
    count: usize,
}

impl BallStencil {
    pub fn new(grid: &Grid, radius: f64) -> Self {
        let n = grid.n();
        let rho = radius / grid.spacing();
        let rows: Vec<(i64, Option<usize>)> = if grid.dim() == 1 {
            vec![(0, half_width(rho * rho, n).unwrap_or(None))]
        } else {
            let ni = n as i64;
            let dys: Vec<i64> = match half_width(rho * rho, n) {
                Some(Some(my)) => (-(my as i64)..=my as i64).collect(),
                _ => (-(ni / 2)..ni - ni / 2).collect(),
            };
            dys.into_iter()
                .filter_map(|dy| half_width(rho * rho - (dy * dy) as f64, n).map(|w| (dy, w)))
                .collect()
        };
        let count = rows
            .iter()
            .map(|(_, w)| w.map_or(n, |m| 2 * m + 1))
            .sum();
        Self { rows, count }
    }

    /// Number of grid points in the ball.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Visits the flat indices of the ball around `centre` (per-axis indices),
    /// together with the integer offsets from the centre.
    pub fn for_each(&self, grid: &Grid, centre: [usize; 2], mut f: impl FnMut(usize, [i64; 2])) {
        let n = grid.n() as i64;
        for &(dy, w) in &self.rows {
            let (lo, hi) = match w {
                Some(m) => (-(m as i64), m as i64),
                None => (-(n / 2), n - n / 2 - 1),
            };
            if grid.dim() == 1 {
                for dx in lo..=hi {
                    let col = (centre[0] as i64 + dx).rem_euclid(n) as usize;
                    f(col, [dx, 0]);
                }
            } else {
                let row = (centre[0] as i64 + dy).rem_euclid(n) as usize;
                for dx in lo..=hi {
                    let col = (centre[1] as i64 + dx).rem_euclid(n) as usize;
                    f(row * n as usize + col, [dy, dx]);
                }
            }
        }
    }
}

/// Largest `m >= 0` with `m^2 < r2`, or `None` for an empty row.
/// The inner `None` marks a row that wraps the whole torus.
fn half_width(r2: f64, n: usize) -> Option<Option<usize>> {
    if r2 <= 0.0 {
        return None;
    }
    let r = r2.sqrt();
    let mut m = r.floor() as i64;
    if m as f64 >= r {
        m -= 1;
    }
    let m = m.max(0) as usize;
    Some(if 2 * m + 1 >= n { None } else { Some(m) })
}

/// Row-wise prefix sums of `|f|^q`, for O(rows) ball sums at grid centres.
#[derive(Debug, Clone)]
pub struct PowerSums {
    grid: Grid,
    prefix: Vec<f64>,
}

impl PowerSums {
    pub fn new(f: &GridFunction, q: f64) -> Self {
        Self::build(f, |v| {
            let v = v.abs();
            if q == 1.0 {
                v
            } else if q == 2.0 {
                v * v
            } else {
                v.powf(q)
            }
        })
    }

    /// Prefix sums of the signed samples, for signed ball means.
    pub fn linear(f: &GridFunction) -> Self {
        Self::build(f, |v| v)
    }

    fn build(f: &GridFunction, map: impl Fn(f64) -> f64) -> Self {
        let grid = f.grid;
        let n = grid.n();
        let rows = if grid.dim() == 1 { 1 } else { n };
        let mut prefix = vec![0.0; rows * (n + 1)];
        for r in 0..rows {
            let base = r * (n + 1);
            let mut acc = 0.0;
            for c in 0..n {
                acc += map(f.samples[r * n + c]);
                prefix[base + c + 1] = acc;
            }
        }
        Self { grid, prefix }
    }

    fn row_sum(&self, row: usize, centre: i64, half: Option<usize>) -> f64 {
        let n = self.grid.n() as i64;
        let base = row * (n as usize + 1);
        let p = &self.prefix[base..base + n as usize + 1];
        match half {
            None => p[n as usize],
            Some(m) => {
                let lo = centre - m as i64;
                let hi = centre + m as i64;
                if lo >= 0 && hi < n {
                    p[hi as usize + 1] - p[lo as usize]
                } else if lo < 0 {
                    let lo_w = (lo + n) as usize;
                    (p[n as usize] - p[lo_w]) + p[hi as usize + 1]
                } else {
                    let hi_w = (hi - n) as usize;
                    (p[n as usize] - p[lo as usize]) + p[hi_w + 1]
                }
            }
        }
    }

    /// Sum of `|f|^q` over the stencil centred at flat index `idx`.
    pub fn ball_sum(&self, stencil: &BallStencil, idx: usize) -> f64 {
        let g = &self.grid;
        let n = g.n() as i64;
        let c = g.unflatten(idx);
        if g.dim() == 1 {
            return self.row_sum(0, c[0] as i64, stencil.rows[0].1);
        }
        stencil
            .rows
            .iter()
            .map(|&(dy, w)| {
                let row = (c[0] as i64 + dy).rem_euclid(n) as usize;
                self.row_sum(row, c[1] as i64, w)
            })
            .sum()
    }

    /// `(mean of |f|^q over the ball)^{1/q}`.
    pub fn ball_mean(&self, stencil: &BallStencil, idx: usize, q: f64) -> f64 {
        let m = (self.ball_sum(stencil, idx) / stencil.count() as f64).max(0.0);
        if q == 1.0 {
            m
        } else {
            m.powf(1.0 / q)
        }
    }
}

/// `q`-mean of `|f|` over the grid points strictly inside the torus ball.
///
/// Falls back to the nearest grid point when the ball contains no sample.
pub fn ball_average(f: &GridFunction, center: &[f64], radius: f64, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return param(format!("ball_average requires q >= 1, got {q}"));
    }
    if !(radius > 0.0) {
        return param(format!("ball_average requires radius > 0, got {radius}"));
    }
    let g = f.grid;
    let pw = |v: f64| if q == 1.0 { v.abs() } else { v.abs().powf(q) };
    let (sum, count) = if let Some(ij) = g.lattice_index(center) {
        let st = BallStencil::new(&g, radius);
        let mut s = 0.0;
        st.for_each(&g, ij, |idx, _| s += pw(f.samples[idx]));
        (s, st.count())
    } else {
        let mut s = 0.0;
        let mut count = 0usize;
        for idx in 0..g.len() {
            let x = g.coords(idx);
            if g.distance(&x[..g.dim()], center) < radius {
                s += pw(f.samples[idx]);
                count += 1;
            }
        }
        (s, count)
    };
    if count == 0 {
        return Ok(f.value_near(center).abs());
    }
    let m = sum / count as f64;
    Ok(if q == 1.0 { m } else { m.powf(1.0 / q) })
}

/// Signed mean of `f` over the grid points strictly inside the torus ball,
/// with the same nearest-point fallback as [`ball_average`].
pub fn ball_mean(f: &GridFunction, center: &[f64], radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return param(format!("ball_mean requires radius > 0, got {radius}"));
    }
    let g = f.grid;
    let (sum, count) = if let Some(ij) = g.lattice_index(center) {
        let st = BallStencil::new(&g, radius);
        let mut s = 0.0;
        st.for_each(&g, ij, |idx, _| s += f.samples[idx]);
        (s, st.count())
    } else {
        let mut s = 0.0;
        let mut count = 0usize;
        for idx in 0..g.len() {
            let x = g.coords(idx);
            if g.distance(&x[..g.dim()], center) < radius {
                s += f.samples[idx];
                count += 1;
            }
        }
        (s, count)
    };
    if count == 0 {
        return Ok(f.value_near(center));
    }
    Ok(sum / count as f64)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    })
}

fn transform(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let (fwd, inv) = plans(n);
    let plan = if inverse { inv } else { fwd };
    if grid.dim() == 1 {
        plan.process(data);
        return;
    }
    for row in data.chunks_mut(n) {
        plan.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = data[r * n + c];
        }
        plan.process(&mut col);
        for r in 0..n {
            data[r * n + c] = col[r];
        }
    }
}

/// Unnormalised forward DFT of the samples.
pub fn forward_dft(f: &GridFunction) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = f.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&f.grid, &mut data, false);
    data
}

/// Inverse DFT (normalised by `1/len`), keeping the real part.
pub fn inverse_dft_real(grid: &Grid, mut spec: Vec<Complex64>) -> GridFunction {
    transform(grid, &mut spec, true);
    let norm = 1.0 / grid.len() as f64;
    let samples = spec.iter().map(|c| c.re * norm).collect();
    GridFunction::from_vec_unchecked(*grid, samples)
}

/// Applies a Fourier multiplier `m(xi, nyquist)` with `xi` the signed physical
/// frequency per axis.
pub fn apply_multiplier(
    f: &GridFunction,
    m: impl Fn(&[f64], bool) -> Complex64 + Sync,
) -> GridFunction {
    let g = f.grid;
    let mut spec = forward_dft(f);
    spec.par_iter_mut().enumerate().for_each(|(idx, c)| {
        let (xi, nyq) = g.frequency(idx);
        *c *= m(&xi[..g.dim()], nyq);
    });
    inverse_dft_real(&g, spec)
}

/// Circular convolution scaled by `h^dim`, approximating `∫ f(x-y) k(y) dy`.
pub fn fft_convolve(f: &GridFunction, k: &GridFunction) -> Result<GridFunction> {
    check_same_grid(&f.grid, &k.grid)?;
    let g = f.grid;
    let a = forward_dft(f);
    let b = forward_dft(k);
    let vol = g.cell_volume();
    let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y * vol).collect();
    Ok(inverse_dft_real(&g, prod))
}
