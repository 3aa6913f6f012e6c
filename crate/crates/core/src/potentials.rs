//! Bessel and Riesz potentials, spectral derivatives, local polynomial
//! projections, the sharp maximal function, and fractional seminorms.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::grid::{apply_multiplier, ball_mean, BallStencil, Grid, GridFunction};

/// `𝒥_α g = (I - Δ)^{-α/2} g`, applied through its Fourier multiplier.
pub fn bessel_smooth(g: &GridFunction, alpha: f64) -> Result<GridFunction> {
    if !(alpha >= 0.0) {
        return param(format!("bessel_smooth needs α >= 0, got {alpha}"));
    }
    if alpha == 0.0 {
        return Ok(g.clone());
    }
    Ok(apply_multiplier(g, |xi, _| {
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        Complex64::new((1.0 + 4.0 * PI * PI * r2).powf(-0.5 * alpha), 0.0)
    }))
}

/// Spectral inverse of [`bessel_smooth`].
pub fn inverse_bessel(f: &GridFunction, alpha: f64) -> Result<GridFunction> {
    if !(alpha >= 0.0) {
        return param(format!("inverse_bessel needs α >= 0, got {alpha}"));
    }
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    Ok(apply_multiplier(f, |xi, _| {
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        Complex64::new((1.0 + 4.0 * PI * PI * r2).powf(0.5 * alpha), 0.0)
    }))
}

fn nyquist_axes(grid: &Grid, xi: &[f64]) -> [bool; 2] {
    let ny = 0.5 * grid.n() as f64 / grid.extent();
    let mut out = [false; 2];
    for k in 0..grid.dim() {
        out[k] = (xi[k].abs() - ny).abs() < 1e-9 * ny;
    }
    out
}

/// Riesz transform `ℛ_j` (axis `j` counted from 1), multiplier `-i ξ_j / |ξ|`.
///
/// The zero mode and the Nyquist mode along axis `j` are set to zero so that
/// real input gives real output.
pub fn riesz_transform(f: &GridFunction, j: usize) -> Result<GridFunction> {
    let g = *f.grid();
    if j == 0 || j > g.dim() {
        return param(format!("axis must lie in 1..={}, got {j}", g.dim()));
    }
    Ok(apply_multiplier(f, |xi, _| {
        let r: f64 = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 || nyquist_axes(&g, xi)[j - 1] {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -xi[j - 1] / r)
        }
    }))
}

/// `∂^γ f` through the multiplier `(2πiξ)^γ`; exact on trigonometric polynomials.
pub fn spectral_derivative(f: &GridFunction, gamma: &[u32]) -> Result<GridFunction> {
    let g = *f.grid();
    if gamma.len() != g.dim() {
        return param(format!("multi-index must have {} entries", g.dim()));
    }
    if gamma.iter().sum::<u32>() > 3 {
        return param("spectral_derivative supports |γ| <= 3");
    }
    let gamma = [gamma[0], gamma.get(1).copied().unwrap_or(0)];
    Ok(apply_multiplier(f, |xi, _| {
        let nyq = nyquist_axes(&g, xi);
        let mut m = Complex64::new(1.0, 0.0);
        for k in 0..g.dim() {
            if gamma[k] == 0 {
                continue;
            }
            if nyq[k] && gamma[k] % 2 == 1 {
                return Complex64::new(0.0, 0.0);
            }
            m *= Complex64::new(0.0, 2.0 * PI * xi[k]).powu(gamma[k]);
        }
        m
    }))
}

/// Multi-indices `|γ| <= k` in lexicographic order.
pub fn multi_indices(dim: usize, k: u32) -> Vec<[u32; 2]> {
    if dim == 1 {
        (0..=k).map(|a| [a, 0]).collect()
    } else {
        let mut v = Vec::new();
        for a in 0..=k {
            for b in 0..=(k - a) {
                v.push([a, b]);
            }
        }
        v
    }
}

/// A polynomial of degree at most 3 written in the local frame of a ball:
/// `P(x) = Σ_γ c_γ y^γ` with `y = (x - center) / radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub dim: usize,
    pub degree: u32,
    pub coefficients: Vec<f64>,
    pub center: [f64; 2],
    pub radius: f64,
}

impl Polynomial {
    pub fn eval_local(&self, y: &[f64]) -> f64 {
        multi_indices(self.dim, self.degree)
            .iter()
            .zip(&self.coefficients)
            .map(|(g, c)| c * monomial(g, y))
            .sum()
    }

    /// Value at `x`, using the torus displacement from the centre.
    pub fn eval(&self, grid: &Grid, x: &[f64]) -> f64 {
        let d = grid.displacement(x, &self.center);
        self.eval_local(&[d[0] / self.radius, d[1] / self.radius])
    }
}

fn monomial(g: &[u32; 2], y: &[f64]) -> f64 {
    let mut v = y[0].powi(g[0] as i32);
    if g[1] > 0 {
        v *= y[1].powi(g[1] as i32);
    }
    v
}

const MAX_CONDITION: f64 = 1e8;

/// Orthonormal polynomial basis sampled on a fixed set of local points, built
/// by modified Gram–Schmidt with the mean inner product.
#[derive(Debug, Clone)]
struct LocalBasis {
    /// `q[i * b + a]`: basis function `a` at point `i`.
    q: Vec<f64>,
    /// Upper-triangular change of basis, monomials = Q R.
    r: DMatrix<f64>,
    npts: usize,
    nbasis: usize,
}

impl LocalBasis {
    fn new(local: &[[f64; 2]], dim: usize, k: u32) -> Result<Self> {
        let idx = multi_indices(dim, k);
        let (m, b) = (local.len(), idx.len());
        if m < b {
            return Err(Error::IllConditioned(format!(
                "{m} samples cannot determine {b} polynomial coefficients"
            )));
        }
        let mono: Vec<Vec<f64>> = idx
            .iter()
            .map(|g| local.iter().map(|y| monomial(g, y)).collect())
            .collect();
        let gram = DMatrix::from_fn(b, b, |i, j| {
            mono[i].iter().zip(&mono[j]).map(|(u, v)| u * v).sum::<f64>() / m as f64
        });
        let sv = gram.singular_values();
        let cond = sv.max() / sv.min();
        if !(cond <= MAX_CONDITION) {
            return Err(Error::IllConditioned(format!(
                "monomial Gram matrix has condition {cond:.3e} > {MAX_CONDITION:e}; enlarge the ball"
            )));
        }
        let mean_dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, c)| a * c).sum::<f64>() / m as f64;
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(b);
        let mut r = DMatrix::zeros(b, b);
        for a in 0..b {
            let mut v = mono[a].clone();
            for (c, qc) in basis.iter().enumerate() {
                let proj = mean_dot(qc, &v);
                r[(c, a)] += proj;
                v.iter_mut().zip(qc).for_each(|(x, y)| *x -= proj * y);
            }
            // second pass for orthogonality at degree 3
            for (c, qc) in basis.iter().enumerate() {
                let proj = mean_dot(qc, &v);
                r[(c, a)] += proj;
                v.iter_mut().zip(qc).for_each(|(x, y)| *x -= proj * y);
            }
            let nrm = mean_dot(&v, &v).sqrt();
            r[(a, a)] = nrm;
            v.iter_mut().for_each(|x| *x /= nrm);
            basis.push(v);
        }
        let mut q = vec![0.0; m * b];
        for (a, col) in basis.iter().enumerate() {
            for i in 0..m {
                q[i * b + a] = col[i];
            }
        }
        Ok(Self {
            q,
            r,
            npts: m,
            nbasis: b,
        })
    }

    /// Coordinates of the projection in the orthonormal basis.
    fn coords(&self, vals: &[f64]) -> Vec<f64> {
        let b = self.nbasis;
        let mut d = vec![0.0; b];
        for (i, v) in vals.iter().enumerate() {
            for a in 0..b {
                d[a] += self.q[i * b + a] * v;
            }
        }
        d.iter_mut().for_each(|x| *x /= self.npts as f64);
        d
    }

    fn monomial_coefficients(&self, vals: &[f64]) -> Vec<f64> {
        let d = nalgebra::DVector::from_vec(self.coords(vals));
        let c = self
            .r
            .solve_upper_triangular(&d)
            .expect("Gram–Schmidt diagonal is positive");
        c.iter().copied().collect()
    }

    /// `⨍ |f - P f|` over the points.
    fn mean_abs_residual(&self, vals: &[f64]) -> f64 {
        let d = self.coords(vals);
        let b = self.nbasis;
        let s: f64 = vals
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let p: f64 = (0..b).map(|a| self.q[i * b + a] * d[a]).sum();
                (v - p).abs()
            })
            .sum();
        s / self.npts as f64
    }
}

/// Projection onto `ℙ_k` for balls centred at grid points of a fixed radius.
#[derive(Debug, Clone)]
pub struct ProjectionStencil {
    stencil: BallStencil,
    basis: LocalBasis,
    grid: Grid,
    radius: f64,
    degree: u32,
}

impl ProjectionStencil {
    pub fn new(grid: &Grid, radius: f64, k: u32) -> Result<Self> {
        if k > 3 {
            return param(format!("polynomial degree must be <= 3, got {k}"));
        }
        if !(radius > 0.0) {
            return param(format!("radius must be positive, got {radius}"));
        }
        let stencil = BallStencil::new(grid, radius);
        let h = grid.spacing();
        let mut local = Vec::with_capacity(stencil.count());
        stencil.for_each(grid, [0, 0], |_, off| {
            local.push([off[0] as f64 * h / radius, off[1] as f64 * h / radius]);
        });
        // in 1-D the offset lives in the first slot already
        let basis = LocalBasis::new(&local, grid.dim(), k)?;
        Ok(Self {
            stencil,
            basis,
            grid: *grid,
            radius,
            degree: k,
        })
    }

    fn gather(&self, f: &GridFunction, centre: [usize; 2]) -> Vec<f64> {
        let mut vals = Vec::with_capacity(self.stencil.count());
        let s = f.samples();
        self.stencil.for_each(&self.grid, centre, |idx, _| vals.push(s[idx]));
        vals
    }

    pub fn project(&self, f: &GridFunction, centre: [usize; 2]) -> Polynomial {
        let vals = self.gather(f, centre);
        let c = self.grid.flatten(centre);
        Polynomial {
            dim: self.grid.dim(),
            degree: self.degree,
            coefficients: self.basis.monomial_coefficients(&vals),
            center: self.grid.coords(c),
            radius: self.radius,
        }
    }

    /// `⨍_Δ |f - P^k_Δ f|` over the ball centred at the grid point `centre`.
    pub fn mean_abs_residual(&self, f: &GridFunction, centre: [usize; 2]) -> f64 {
        self.basis.mean_abs_residual(&self.gather(f, centre))
    }

    /// Number of grid points in the ball.
    pub fn count(&self) -> usize {
        self.stencil.count()
    }
}

/// `L²(Δ)`-orthogonal projection of `f` onto polynomials of degree `k` on the
/// ball `Δ(center, radius)`, with inner products by grid summation.
pub fn poly_project(f: &GridFunction, center: &[f64], radius: f64, k: u32) -> Result<Polynomial> {
    let g = *f.grid();
    if let Some(ij) = lattice_centre(&g, center) {
        return Ok(ProjectionStencil::new(&g, radius, k)?.project(f, ij));
    }
    if k > 3 {
        return param(format!("polynomial degree must be <= 3, got {k}"));
    }
    let mut local = Vec::new();
    let mut vals = Vec::new();
    for idx in 0..g.len() {
        let x = g.coords(idx);
        let d = g.displacement(&x, center);
        if (d[0] * d[0] + d[1] * d[1]).sqrt() < radius {
            local.push([d[0] / radius, d[1] / radius]);
            vals.push(f.samples()[idx]);
        }
    }
    let basis = LocalBasis::new(&local, g.dim(), k)?;
    let mut c = [0.0; 2];
    c[..g.dim()].copy_from_slice(&center[..g.dim()]);
    Ok(Polynomial {
        dim: g.dim(),
        degree: k,
        coefficients: basis.monomial_coefficients(&vals),
        center: c,
        radius,
    })
}

fn lattice_centre(g: &Grid, x: &[f64]) -> Option<[usize; 2]> {
    let h = g.spacing();
    let n = g.n() as i64;
    let mut ij = [0usize; 2];
    for k in 0..g.dim() {
        let s = x[k] / h;
        if (s - s.round()).abs() > 1e-9 {
            return None;
        }
        ij[k] = (s.round() as i64).rem_euclid(n) as usize;
    }
    Some(ij)
}

/// Sampled sharp maximal function
/// `f^♯_α(x) = sup_{Δ ∋ x} |Δ|^{-α/n} ⨍_Δ |f - P^k_Δ f|`, `k = ⌊α⌋`.
///
/// Balls have radii in `scales` and centres on a lattice of stride `r/2`.
pub fn sharp_maximal(f: &GridFunction, alpha: f64, scales: &[f64]) -> Result<GridFunction> {
    sharp_maximal_strided(f, alpha, scales, 2)
}

/// As [`sharp_maximal`] with centre stride `r / stride_div`.
pub fn sharp_maximal_strided(
    f: &GridFunction,
    alpha: f64,
    scales: &[f64],
    stride_div: usize,
) -> Result<GridFunction> {
    let g = *f.grid();
    if scales.is_empty() {
        return param("sharp_maximal needs at least one scale");
    }
    if !(alpha > 0.0) {
        return param(format!("sharp_maximal needs α > 0, got {alpha}"));
    }
    let h = g.spacing();
    for &r in scales {
        if r < 4.0 * h * (1.0 - 1e-12) || r > 0.25 * g.extent() * (1.0 + 1e-12) {
            return param(format!("scale {r} outside [4h, L/4] = [{}, {}]", 4.0 * h, 0.25 * g.extent()));
        }
    }
    if stride_div == 0 {
        return param("stride divisor must be positive");
    }
    let k = alpha.floor().min(3.0) as u32;
    let n = g.n();
    let dim = g.dim();
    let mut out = vec![0.0f64; g.len()];
    for &r in scales {
        let ps = ProjectionStencil::new(&g, r, k)?;
        let stride = ((r / (stride_div as f64 * h)).floor() as usize).max(1);
        let per_axis: Vec<usize> = (0..n).step_by(stride).collect();
        let centres: Vec<[usize; 2]> = if dim == 1 {
            per_axis.iter().map(|&i| [i, 0]).collect()
        } else {
            per_axis
                .iter()
                .flat_map(|&i| per_axis.iter().map(move |&j| [i, j]))
                .collect()
        };
        let vol = ps.count() as f64 * g.cell_volume();
        let weight = vol.powf(-alpha / dim as f64);
        let osc: Vec<f64> = centres
            .par_iter()
            .map(|&c| weight * ps.mean_abs_residual(f, c))
            .collect();
        for (c, o) in centres.iter().zip(osc) {
            ps.stencil.for_each(&g, *c, |idx, _| {
                if o > out[idx] {
                    out[idx] = o;
                }
            });
        }
    }
    GridFunction::new(g, out)
}

/// Discrete Gagliardo–Slobodeckij seminorm over the index set `domain`:
/// `(Σ_{i≠j} |f_i - f_j|^p h^{2n} / |x_i - x_j|^{n+σp})^{1/p}`.
pub fn slobodeckij_seminorm(f: &GridFunction, sigma: f64, p: f64, domain: &[usize]) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return param(format!("σ must lie in (0, 1), got {sigma}"));
    }
    if !(p >= 1.0) {
        return param(format!("p must be >= 1, got {p}"));
    }
    let g = *f.grid();
    if domain.is_empty() {
        return param("seminorm domain is empty");
    }
    if let Some(&bad) = domain.iter().find(|&&i| i >= g.len()) {
        return param(format!("domain index {bad} out of range"));
    }
    let s = f.samples();
    let n = g.n() as i64;
    let h = g.spacing();
    let expo = -0.5 * (g.dim() as f64 + sigma * p);
    let coords: Vec<[i64; 2]> = domain
        .iter()
        .map(|&i| {
            let ij = g.unflatten(i);
            [ij[0] as i64, ij[1] as i64]
        })
        .collect();
    let wrap = |d: i64| {
        let w = d.rem_euclid(n);
        if w > n / 2 {
            n - w
        } else {
            w
        }
    };
    let rows: Vec<f64> = (0..domain.len())
        .into_par_iter()
        .map(|a| {
            let fa = s[domain[a]];
            let ca = coords[a];
            let mut acc = 0.0;
            for b in 0..domain.len() {
                if b == a {
                    continue;
                }
                let diff = (fa - s[domain[b]]).abs();
                if diff == 0.0 {
                    continue;
                }
                let dy = wrap(ca[0] - coords[b][0]) as f64 * h;
                let dx = wrap(ca[1] - coords[b][1]) as f64 * h;
                let r2 = dy * dy + dx * dx;
                let num = if p == 2.0 { diff * diff } else { diff.powf(p) };
                acc += num * r2.powf(expo);
            }
            acc
        })
        .collect();
    let total: f64 = rows.iter().sum::<f64>() * g.cell_volume() * g.cell_volume();
    Ok(total.powf(1.0 / p))
}

/// `f = 𝒥_α g` together with its density `g`.
#[derive(Debug, Clone)]
pub struct BesselFunction {
    pub alpha: f64,
    pub g: GridFunction,
    pub f: GridFunction,
    pub p: f64,
}

impl BesselFunction {
    pub fn new(g: GridFunction, alpha: f64, p: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return param(format!("α must be positive, got {alpha}"));
        }
        if !(p >= 1.0) {
            return param(format!("p must be >= 1, got {p}"));
        }
        let f = bessel_smooth(&g, alpha)?;
        Ok(Self { alpha, g, f, p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Representative {
    Value(f64),
    Diverged,
}

impl Representative {
    pub fn value(self) -> Option<f64> {
        match self {
            Representative::Value(v) => Some(v),
            Representative::Diverged => None,
        }
    }
}

pub const REPRESENTATIVE_TOL: f64 = 1e-3;

/// Limit of ball means `⨍_{Δ(x,r)} f` along decreasing `radii`, or
/// [`Representative::Diverged`] when the last three means are not Cauchy
/// within `tol · (1 + |a_i|)`.
pub fn representative_value(
    bf: &BesselFunction,
    x: &[f64],
    radii: &[f64],
    tol: f64,
) -> Result<Representative> {
    let g = bf.f.grid();
    if radii.len() < 3 {
        return param("need at least three radii");
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return param("radii must be strictly decreasing");
    }
    let rmin = radii[radii.len() - 1];
    if rmin < 4.0 * g.spacing() * (1.0 - 1e-12) {
        return param(format!("smallest radius {rmin} is below 4h = {}", 4.0 * g.spacing()));
    }
    let avgs = radii
        .iter()
        .map(|&r| ball_mean(&bf.f, x, r))
        .collect::<Result<Vec<_>>>()?;
    let tail = &avgs[avgs.len() - 3..];
    let cauchy = tail
        .windows(2)
        .all(|w| (w[1] - w[0]).abs() < tol * (1.0 + w[0].abs()));
    Ok(if cauchy {
        Representative::Value(tail[2])
    } else {
        Representative::Diverged
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{lp_norm, make_grid};
    use crate::kernels::{sample_kernel, KernelSpec};

    fn cos1(levels: u32) -> GridFunction {
        let g = make_grid(1, levels, 1.0).unwrap();
        GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos()).unwrap()
    }

    fn close(a: &GridFunction, b: &GridFunction, tol: f64) -> bool {
        a.samples().iter().zip(b.samples()).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn bessel_smooth_examples() {
        let f = cos1(8);
        assert_eq!(bessel_smooth(&f, 0.0).unwrap(), f);
        let s = bessel_smooth(&f, 2.0).unwrap();
        assert!(close(&s, &f.scale(1.0 / (1.0 + 4.0 * PI * PI)), 1e-13));
        assert!(bessel_smooth(&f, -1.0).is_err());
    }

    #[test]
    fn bessel_smooth_of_spike_matches_sampled_kernel() {
        let g = make_grid(1, 12, 32.0).unwrap();
        let mut spike = vec![0.0; g.len()];
        spike[0] = 1.0 / g.spacing();
        let spike = GridFunction::new(g, spike).unwrap();
        let spectral = bessel_smooth(&spike, 1.0).unwrap();
        let k = sample_kernel(&KernelSpec::bessel(1, 1.0).unwrap(), &g).unwrap();
        let spatial = crate::grid::fft_convolve(&spike, &k).unwrap();
        // the two agree away from the logarithmic singularity
        for i in 0..g.len() {
            let x = g.coords(i)[0];
            let d = g.wrap(x).abs();
            if d >= 0.5 {
                let diff = (spectral.samples()[i] - spatial.samples()[i]).abs();
                assert!(diff < 1e-4, "x={x}: {diff}");
            }
        }
    }

    #[test]
    fn inverse_bessel_examples() {
        // high modes carry roundoff that the inverse amplifies, so stay coarse
        let f = cos1(6);
        let up = inverse_bessel(&f, 2.0).unwrap();
        assert!(close(&up, &f.scale(1.0 + 4.0 * PI * PI), 1e-10));
        let back = bessel_smooth(&inverse_bessel(&f, 1.5).unwrap(), 1.5).unwrap();
        assert!(close(&back, &f, 1e-10));
        assert_eq!(inverse_bessel(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn hilbert_transform_of_cosine() {
        let f = cos1(8);
        let h = riesz_transform(&f, 1).unwrap();
        let s = GridFunction::from_fn(*f.grid(), |x| (2.0 * PI * x[0]).sin()).unwrap();
        assert!(close(&h, &s, 1e-12));
        assert!(riesz_transform(&f, 2).is_err());
    }

    #[test]
    fn riesz_squares_sum_to_minus_identity() {
        let g = make_grid(2, 5, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| {
            (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).cos() + (6.0 * PI * x[1]).sin()
        })
        .unwrap();
        let r1 = riesz_transform(&riesz_transform(&f, 1).unwrap(), 1).unwrap();
        let r2 = riesz_transform(&riesz_transform(&f, 2).unwrap(), 2).unwrap();
        let sum = r1.add(&r2).unwrap();
        assert!(close(&sum, &f.scale(-1.0), 1e-8));
        let n1 = lp_norm(&riesz_transform(&f, 1).unwrap(), 2.0).unwrap();
        let n2 = lp_norm(&riesz_transform(&f, 2).unwrap(), 2.0).unwrap();
        assert!(n1 <= lp_norm(&f, 2.0).unwrap() + 1e-12);
        assert!((n1 * n1 + n2 * n2 - lp_norm(&f, 2.0).unwrap().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn derivative_examples() {
        let f = cos1(8);
        let d = spectral_derivative(&f, &[1]).unwrap();
        let want = GridFunction::from_fn(*f.grid(), |x| -2.0 * PI * (2.0 * PI * x[0]).sin()).unwrap();
        assert!(close(&d, &want, 1e-11));
        let c = GridFunction::constant(*f.grid(), 4.0);
        for k in 1..=3 {
            assert!(spectral_derivative(&c, &[k]).unwrap().max_abs() < 1e-12);
        }
        assert!(spectral_derivative(&f, &[4]).is_err());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let g = make_grid(1, 12, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| {
            (2.0 * PI * x[0]).sin() + 0.3 * (6.0 * PI * x[0]).cos() - 0.1 * (10.0 * PI * x[0]).sin()
        })
        .unwrap();
        let d = spectral_derivative(&f, &[1]).unwrap();
        let n = g.n();
        let h = g.spacing();
        let s = f.samples();
        for i in 0..n {
            // fourth-order centred difference
            let fd = (-s[(i + 2) % n] + 8.0 * s[(i + 1) % n] - 8.0 * s[(i + n - 1) % n]
                + s[(i + n - 2) % n])
                / (12.0 * h);
            assert!((fd - d.samples()[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn projection_reproduces_affine() {
        let g = make_grid(2, 6, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| 2.0 + 3.0 * x[0] - x[1]).unwrap();
        let c = [0.5, 0.5];
        let p = poly_project(&f, &c, 0.2, 1).unwrap();
        for i in 0..g.len() {
            let x = g.coords(i);
            if g.distance(&x, &c) < 0.2 {
                assert!((p.eval(&g, &x) - f.samples()[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn degree_zero_projection_is_mean() {
        let g = make_grid(1, 10, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| (5.0 * x[0]).exp()).unwrap();
        let p = poly_project(&f, &[0.3], 0.1, 0).unwrap();
        let m = ball_mean(&f, &[0.3], 0.1).unwrap();
        assert!((p.coefficients[0] - m).abs() < 1e-12);
        // off-lattice centre takes the general route
        let p = poly_project(&f, &[0.3001], 0.1, 0).unwrap();
        let m = ball_mean(&f, &[0.3001], 0.1).unwrap();
        assert!((p.coefficients[0] - m).abs() < 1e-12);
    }

    #[test]
    fn projection_residual_is_orthogonal() {
        let g = make_grid(2, 6, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| (7.0 * x[0]).sin() * (3.0 * x[1]).cos()).unwrap();
        let c = [0.25, 0.75];
        let r = 0.15;
        let p = poly_project(&f, &c, r, 3).unwrap();
        let pts: Vec<usize> = (0..g.len()).filter(|&i| g.distance(&g.coords(i), &c) < r).collect();
        for gam in multi_indices(2, 3) {
            let mut acc = 0.0;
            let mut scale = 0.0;
            for &i in &pts {
                let x = g.coords(i);
                let d = g.displacement(&x, &c);
                let y = [d[0] / r, d[1] / r];
                let res = f.samples()[i] - p.eval(&g, &x);
                acc += res * monomial(&gam, &y);
                scale += (f.samples()[i] * monomial(&gam, &y)).abs();
            }
            assert!(acc.abs() <= 1e-6 * scale.max(1e-300));
        }
    }

    #[test]
    fn tiny_ball_is_ill_conditioned() {
        let g = make_grid(2, 6, 1.0).unwrap();
        let f = GridFunction::constant(g, 1.0);
        assert!(matches!(
            poly_project(&f, &[0.5, 0.5], 1.5 * g.spacing(), 3),
            Err(Error::IllConditioned(_))
        ));
    }

    #[test]
    fn sharp_maximal_kills_polynomials() {
        let g = make_grid(1, 10, 1.0).unwrap();
        let h = g.spacing();
        let scales = [4.0 * h, 8.0 * h, 32.0 * h, 0.125];
        let c = GridFunction::constant(g, 2.5);
        assert!(sharp_maximal(&c, 0.5, &scales).unwrap().max_abs() < 1e-12);
        // affine data is not periodic: keep balls away from the wrap point
        let f = GridFunction::from_fn(g, |x| 1.0 + 2.0 * x[0]).unwrap();
        let s = sharp_maximal(&f, 1.5, &scales[..2]).unwrap();
        for i in 100..900 {
            assert!(s.samples()[i] < 1e-8);
        }
        assert!(sharp_maximal(&f, 1.5, &[]).is_err());
        assert!(sharp_maximal(&f, 1.5, &[h]).is_err());
    }

    #[test]
    fn sharp_maximal_monotone_in_scales_and_stride() {
        let g = make_grid(1, 9, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| (x[0] - 0.5).abs().sqrt()).unwrap();
        let h = g.spacing();
        let a = sharp_maximal(&f, 0.5, &[8.0 * h]).unwrap();
        let b = sharp_maximal(&f, 0.5, &[8.0 * h, 32.0 * h]).unwrap();
        let c = sharp_maximal_strided(&f, 0.5, &[8.0 * h, 32.0 * h], 4).unwrap();
        for i in 0..g.len() {
            assert!(a.samples()[i] <= b.samples()[i]);
            assert!(b.samples()[i] <= c.samples()[i]);
        }
    }

    #[test]
    fn seminorm_examples() {
        let g = make_grid(1, 8, 1.0).unwrap();
        let all: Vec<usize> = (0..g.len()).collect();
        let c = GridFunction::constant(g, 3.0);
        assert_eq!(slobodeckij_seminorm(&c, 0.5, 2.0, &all).unwrap(), 0.0);
        let f = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos() + x[0] * x[0]).unwrap();
        let a = slobodeckij_seminorm(&f, 0.4, 2.0, &all).unwrap();
        let b = slobodeckij_seminorm(&f.shifted([37, 0]), 0.4, 2.0, &all).unwrap();
        assert!((a - b).abs() < 1e-10 * a);
        assert!(slobodeckij_seminorm(&f, 1.0, 2.0, &all).is_err());
    }

    #[test]
    fn seminorm_stable_under_refinement() {
        let v: Vec<f64> = [10u32, 11]
            .iter()
            .map(|&lv| {
                let f = cos1(lv);
                let all: Vec<usize> = (0..f.grid().len()).collect();
                slobodeckij_seminorm(&f, 0.5, 2.0, &all).unwrap()
            })
            .collect();
        assert!((v[1] / v[0] - 1.0).abs() < 0.02);
    }

    #[test]
    fn representative_of_smooth_function() {
        let g = make_grid(1, 12, 1.0).unwrap();
        let gg = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos()).unwrap();
        let bf = BesselFunction::new(gg, 0.5, 2.0).unwrap();
        let radii: Vec<f64> = (4..=10).map(|k| 2f64.powi(-k)).collect();
        let x = [0.2];
        let v = representative_value(&bf, &x, &radii, REPRESENTATIVE_TOL)
            .unwrap()
            .value()
            .unwrap();
        // exact value of 𝒥_α cos at x; off-lattice balls are asymmetric to O(h)
        let exact = (1.0 + 4.0 * PI * PI).powf(-0.25) * (2.0 * PI * x[0]).cos();
        assert!((v - exact).abs() < 4.0 * g.spacing(), "{v} vs {exact}");
    }

    #[test]
    fn representative_of_spike_diverges() {
        let g = make_grid(1, 14, 1.0).unwrap();
        let mut s = vec![0.0; g.len()];
        let i0 = g.n() / 2;
        s[i0] = 1.0 / g.spacing();
        let bf = BesselFunction::new(GridFunction::new(g, s).unwrap(), 0.25, 2.0).unwrap();
        let radii: Vec<f64> = (4..=10).map(|k| 2f64.powi(-k)).collect();
        let x = g.coords(i0);
        let avgs: Vec<f64> = radii.iter().map(|&r| ball_mean(&bf.f, &x[..1], r).unwrap()).collect();
        assert!(avgs.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(
            representative_value(&bf, &x[..1], &radii, REPRESENTATIVE_TOL).unwrap(),
            Representative::Diverged
        );
        assert!(representative_value(&bf, &x[..1], &[0.1, 0.2, 0.05], 1e-3).is_err());
    }
}
