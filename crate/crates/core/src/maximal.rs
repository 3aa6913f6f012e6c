//! Approach regions and the maximal operators built on them.
//!
//! Every supremum is taken over sampled points `(t_k, x_i)`. Results are
//! lower bounds of the continuous suprema and grow under refinement.

use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::extension::{average_field, dyadic_heights, poisson_extend, HalfSpaceField};
use crate::grid::{BallStencil, Grid, GridFunction, PowerSums};
use crate::potentials::sharp_maximal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionFlavor {
    HalfSpace,
    /// Domain regions over a graph with parameter `c`; evaluated in the
    /// half-space after flattening, with aperture `1 + c`.
    GraphDomain { c: f64 },
}

/// Parameters of the region `Γ^β_a(x₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproachRegionSpec {
    pub beta: f64,
    pub aperture: f64,
    /// Heights above `t_max` are not scanned.
    pub t_max: f64,
    pub flavor: RegionFlavor,
}

impl ApproachRegionSpec {
    pub fn new(beta: f64, aperture: f64, t_max: f64) -> Result<Self> {
        let s = Self {
            beta,
            aperture,
            t_max,
            flavor: RegionFlavor::HalfSpace,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn graph_domain(beta: f64, c: f64, t_max: f64) -> Result<Self> {
        if !(c > 0.0) {
            return param(format!("c must be positive, got {c}"));
        }
        let s = Self {
            beta,
            aperture: 1.0,
            t_max,
            flavor: RegionFlavor::GraphDomain { c },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return param(format!("β must lie in (0, 1], got {}", self.beta));
        }
        if !(self.aperture > 0.0) {
            return param(format!("aperture must be positive, got {}", self.aperture));
        }
        if !(self.t_max > 0.0) {
            return param(format!("t_max must be positive, got {}", self.t_max));
        }
        Ok(())
    }

    pub fn effective_aperture(&self) -> f64 {
        match self.flavor {
            RegionFlavor::HalfSpace => self.aperture,
            RegionFlavor::GraphDomain { c } => self.aperture * (1.0 + c),
        }
    }

    /// Horizontal radius of the region at height `t`.
    pub fn radius(&self, t: f64) -> f64 {
        let a = self.effective_aperture();
        if t <= 1.0 {
            a * t.powf(self.beta)
        } else {
            a * t
        }
    }
}

/// Whether `(t, x)` lies in `Γ^β_a(x₀)`, measured with the torus metric.
pub fn region_contains(spec: &ApproachRegionSpec, grid: &Grid, x0: &[f64], t: f64, x: &[f64]) -> bool {
    t > 0.0 && grid.distance(x, x0) < spec.radius(t)
}

/// Sliding maximum over circular windows `[i - m, i + m]`.
fn circular_window_max(a: &[f64], m: usize, out: &mut [f64]) {
    let n = a.len();
    let w = 2 * m + 1;
    if w >= n {
        let mx = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.iter_mut().for_each(|o| *o = mx);
        return;
    }
    // van Herk / Gil-Werman on the wrapped extension
    let len = n + 2 * m;
    let ext: Vec<f64> = (0..len).map(|i| a[(i + n - m) % n]).collect();
    let mut pre = vec![0.0; len];
    let mut suf = vec![0.0; len];
    for i in 0..len {
        pre[i] = if i % w == 0 { ext[i] } else { pre[i - 1].max(ext[i]) };
    }
    for i in (0..len).rev() {
        suf[i] = if i % w == w - 1 || i == len - 1 {
            ext[i]
        } else {
            suf[i + 1].max(ext[i])
        };
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = suf[i].max(pre[i + w - 1]);
    }
}

/// `max_{x ∈ stencil(x₀)} vals[x]` for every grid point `x₀`.
fn stencil_max(grid: &Grid, vals: &[f64], radius: f64) -> Vec<f64> {
    let n = grid.n();
    let st = BallStencil::new(grid, radius);
    let rows = st.rows.clone();
    if grid.dim() == 1 {
        let mut out = vec![0.0; n];
        match rows[0].1 {
            Some(m) => circular_window_max(vals, m, &mut out),
            None => circular_window_max(vals, n, &mut out),
        }
        return out;
    }
    // row-wise window maxima for each distinct half-width, then combine rows
    let mut widths: Vec<Option<usize>> = rows.iter().map(|r| r.1).collect();
    widths.sort();
    widths.dedup();
    let tables: Vec<(Option<usize>, Vec<f64>)> = widths
        .iter()
        .map(|&w| {
            let mut t = vec![0.0; n * n];
            for r in 0..n {
                let m = w.unwrap_or(n);
                circular_window_max(&vals[r * n..(r + 1) * n], m, &mut t[r * n..(r + 1) * n]);
            }
            (w, t)
        })
        .collect();
    let mut out = vec![f64::NEG_INFINITY; n * n];
    for &(dy, w) in &rows {
        let t = &tables.iter().find(|(x, _)| *x == w).expect("width table").1;
        for r in 0..n {
            let src = (r as i64 + dy).rem_euclid(n as i64) as usize;
            let (o, s) = (&mut out[r * n..(r + 1) * n], &t[src * n..(src + 1) * n]);
            for (a, b) in o.iter_mut().zip(s) {
                if *b > *a {
                    *a = *b;
                }
            }
        }
    }
    out
}

/// One scanned slice: field height index, region radius, and weight.
#[derive(Debug, Clone, Copy)]
struct ScanItem {
    k: usize,
    radius: f64,
    weight: f64,
}

fn region_sup(u: &HalfSpaceField, items: &[ScanItem]) -> Vec<f64> {
    let g = *u.grid();
    let parts: Vec<Vec<f64>> = items
        .par_iter()
        .map(|it| {
            let abs: Vec<f64> = u.slice(it.k).iter().map(|v| v.abs()).collect();
            let mut m = stencil_max(&g, &abs, it.radius);
            m.iter_mut().for_each(|v| *v *= it.weight);
            m
        })
        .collect();
    let mut out = vec![0.0f64; g.len()];
    for p in &parts {
        for (o, v) in out.iter_mut().zip(p) {
            if *v > *o {
                *o = *v;
            }
        }
    }
    out
}

fn check_coverage(g: &Grid, items: &[ScanItem], what: &str) -> Result<()> {
    if items.is_empty() {
        return Err(Error::Coverage(format!("{what}: no sampled height lies in the region")));
    }
    let h = g.spacing();
    if items.iter().all(|it| it.radius <= h) {
        let best = items.iter().map(|it| it.radius).fold(0.0, f64::max);
        return Err(Error::Coverage(format!(
            "{what}: every sampled region holds only its vertex; scale the aperture by at least {:.6}",
            h / best * (1.0 + 1e-9)
        )));
    }
    Ok(())
}

fn tangential_items(u: &HalfSpaceField, spec: &ApproachRegionSpec) -> Result<Vec<ScanItem>> {
    spec.validate()?;
    let items: Vec<ScanItem> = u
        .heights()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t <= spec.t_max)
        .map(|(k, &t)| ScanItem {
            k,
            radius: spec.radius(t),
            weight: 1.0,
        })
        .collect();
    if items.len() < 2 {
        return Err(Error::Coverage(format!(
            "tangential_max needs at least two heights <= t_max = {}",
            spec.t_max
        )));
    }
    check_coverage(u.grid(), &items, "tangential_max")?;
    Ok(items)
}

/// `N^a_{*,β}(u)(x₀) = sup_{(t,x) ∈ Γ^β_a(x₀)} |u(t,x)|` over sampled points.
pub fn tangential_max(u: &HalfSpaceField, spec: &ApproachRegionSpec) -> Result<GridFunction> {
    let items = tangential_items(u, spec)?;
    GridFunction::new(*u.grid(), region_sup(u, &items))
}

/// A sample attaining the sampled supremum at `x₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub k: usize,
    pub index: usize,
}

/// [`tangential_max`] together with the lowest `(k, i)` attaining each value.
pub fn tangential_max_with_argmax(
    u: &HalfSpaceField,
    spec: &ApproachRegionSpec,
) -> Result<(GridFunction, Vec<Witness>)> {
    let items = tangential_items(u, spec)?;
    let g = *u.grid();
    let vals = region_sup(u, &items);
    let stencils: Vec<BallStencil> = items.iter().map(|it| BallStencil::new(&g, it.radius)).collect();
    let wit: Vec<Witness> = (0..g.len())
        .into_par_iter()
        .map(|x0| {
            let c = g.unflatten(x0);
            let target = vals[x0];
            let mut best: Option<Witness> = None;
            for (it, st) in items.iter().zip(&stencils) {
                let s = u.slice(it.k);
                let mut lowest: Option<usize> = None;
                st.for_each(&g, c, |idx, _| {
                    if s[idx].abs() == target && !matches!(lowest, Some(l) if l <= idx) {
                        lowest = Some(idx);
                    }
                });
                if let Some(i) = lowest {
                    best = Some(Witness { k: it.k, index: i });
                    break;
                }
            }
            best.expect("the maximum is attained by some sample")
        })
        .collect();
    Ok((GridFunction::new(g, vals)?, wit))
}

/// `ℳ_{p,β}(u)(x₀) = sup_{(t,x) ∈ Γ^β(x₀), t ≤ 1} t^{n(1-β)/p} |u(t,x)|`.
pub fn mitigated_max(u: &HalfSpaceField, p: f64, beta: f64) -> Result<GridFunction> {
    if !(p > 0.0) {
        return param(format!("p must be positive, got {p}"));
    }
    let spec = ApproachRegionSpec::new(beta, 1.0, 1.0)?;
    let g = *u.grid();
    let e = g.dim() as f64 * (1.0 - beta) / p;
    let items: Vec<ScanItem> = u
        .heights()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t <= 1.0)
        .map(|(k, &t)| ScanItem {
            k,
            radius: spec.radius(t),
            weight: t.powf(e),
        })
        .collect();
    check_coverage(&g, &items, "mitigated_max")?;
    GridFunction::new(g, region_sup(u, &items))
}

/// Upper limit (exclusive) of the scanned `t` in [`dilated_mitigated_max`].
pub fn dilation_cutoff(beta: f64, j: u32) -> f64 {
    if beta >= 1.0 {
        if j == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        2f64.powf(-(j as f64) / (1.0 - beta))
    }
}

/// `ℳ_{p,β,j}(v)(x₀) = 2^{nj/p} sup_{|x-x₀| < t^β, t < 2^{-j/(1-β)}} t^{n(1-β)/p} |v(2^j t, x)|`.
///
/// The scanned `t` are `s / 2^j` for the heights `s` of `v`.
pub fn dilated_mitigated_max(v: &HalfSpaceField, p: f64, beta: f64, j: u32) -> Result<GridFunction> {
    if !(p > 0.0) {
        return param(format!("p must be positive, got {p}"));
    }
    let spec = ApproachRegionSpec::new(beta, 1.0, 1.0)?;
    let g = *v.grid();
    let n = g.dim() as f64;
    let e = n * (1.0 - beta) / p;
    let cutoff = dilation_cutoff(beta, j);
    let scale = 2f64.powi(j as i32);
    let pre = 2f64.powf(n * j as f64 / p);
    let items: Vec<ScanItem> = v
        .heights()
        .iter()
        .enumerate()
        .filter_map(|(k, &s)| {
            let t = s / scale;
            (t < cutoff).then(|| ScanItem {
                k,
                radius: spec.radius(t),
                weight: pre * t.powf(e),
            })
        })
        .collect();
    if items.is_empty() {
        return Err(Error::Coverage(format!(
            "dilated_mitigated_max: j = {j} needs a height below {:e}, finest is {:e}",
            cutoff * scale,
            v.heights().last().copied().unwrap_or(f64::NAN)
        )));
    }
    GridFunction::new(g, region_sup(v, &items))
}

/// Dyadic radii `4h · 2^i` not exceeding `L/4`.
pub fn dyadic_radii(g: &Grid) -> Vec<f64> {
    let mut r = 4.0 * g.spacing();
    let mut out = Vec::new();
    while r <= 0.25 * g.extent() * (1.0 + 1e-12) {
        out.push(r);
        r *= 2.0;
    }
    out
}

/// `sup_r r^α (⨍_{Δ(x,r)} |f|^s)^{1/s}` over the dyadic radii in `[4h, L/4]`.
pub fn fractional_power_max(f: &GridFunction, s: f64, alpha: f64) -> Result<GridFunction> {
    let g = *f.grid();
    fractional_power_max_radii(f, s, alpha, &dyadic_radii(&g))
}

/// As [`fractional_power_max`] with explicit radii.
pub fn fractional_power_max_radii(
    f: &GridFunction,
    s: f64,
    alpha: f64,
    radii: &[f64],
) -> Result<GridFunction> {
    let g = *f.grid();
    if !(s >= 1.0) {
        return param(format!("s must be >= 1, got {s}"));
    }
    if !(alpha >= 0.0 && alpha < g.dim() as f64) {
        return param(format!("α must lie in [0, n), got {alpha}"));
    }
    if radii.is_empty() {
        return param("at least one radius is required");
    }
    let ps = PowerSums::new(f, s);
    let parts: Vec<Vec<f64>> = radii
        .par_iter()
        .map(|&r| {
            let st = BallStencil::new(&g, r);
            let w = r.powf(alpha);
            (0..g.len()).map(|i| w * ps.ball_mean(&st, i, s)).collect()
        })
        .collect();
    let mut out = vec![0.0f64; g.len()];
    for p in &parts {
        for (o, v) in out.iter_mut().zip(p) {
            if *v > *o {
                *o = *v;
            }
        }
    }
    GridFunction::new(g, out)
}

/// Hardy–Littlewood `M_q f = (M |f|^q)^{1/q}` over dyadic radii.
pub fn hl_max(f: &GridFunction, q: f64) -> Result<GridFunction> {
    fractional_power_max(f, q, 0.0)
}

/// Parameters of the composite maximal function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeParams {
    pub p: f64,
    pub r: f64,
    pub beta: f64,
    pub alpha_l: f64,
    pub j_max: u32,
}

impl CompositeParams {
    pub fn validate(&self) -> Result<()> {
        if !(1.0 < self.r && self.r < self.p) {
            return param(format!("need 1 < r < p, got r = {}, p = {}", self.r, self.p));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return param(format!("composite_max needs β in (0, 1), got {}", self.beta));
        }
        if !(self.alpha_l > 0.0 && self.alpha_l <= 1.0) {
            return param(format!("α_L must lie in (0, 1], got {}", self.alpha_l));
        }
        Ok(())
    }

    /// Smoothness `α = n(1-β)/p` paired with `β`.
    pub fn alpha(&self, dim: usize) -> f64 {
        dim as f64 * (1.0 - self.beta) / self.p
    }
}

/// The constituents of the composite maximal function at every grid point.
#[derive(Debug, Clone)]
pub struct CompositeParts {
    /// `Σ_j 2^{-α_L j} ℳ_{p,β,j} w`.
    pub dilated: GridFunction,
    /// `N_{*,β}` of the Poisson extension.
    pub poisson: GridFunction,
    /// `M_r f`.
    pub hardy_littlewood: GridFunction,
    /// `Σ_{j ≤ J} 2^{-α_L j}`.
    pub weight_sum: f64,
    pub total: GridFunction,
}

/// Composite maximal function
/// `Σ_{j=0}^{J} 2^{-α_L j} [ℳ_{p,β,j} w + N_{*,β} ũ_f + M_r f]` with
/// `w(s, y) = (⨍_{Δ(y, 2s)} (f^♯_α)^r)^{1/r}` and `α = n(1-β)/p`.
pub fn composite_max_parts(f: &GridFunction, params: &CompositeParams) -> Result<CompositeParts> {
    params.validate()?;
    let g = *f.grid();
    let alpha = params.alpha(g.dim());
    let sharp = sharp_maximal(f, alpha, &dyadic_radii(&g))?;
    // w is needed at 2^j t for t < 2^{-j/(1-β)}, j <= J
    let finest_f = 0.25 * g.spacing();
    let need = 2f64.powf(-(params.j_max as f64) * params.beta / (1.0 - params.beta) - 1.0);
    let last = (-(finest_f.min(need)).log2()).ceil() as u32;
    let w = average_field(&sharp, &dyadic_heights(1.0, last), params.r)?;
    let mut dilated = vec![0.0; g.len()];
    let mut weight_sum = 0.0;
    for j in 0..=params.j_max {
        let c = 2f64.powf(-params.alpha_l * j as f64);
        weight_sum += c;
        let m = dilated_mitigated_max(&w, params.p, params.beta, j)?;
        for (d, v) in dilated.iter_mut().zip(m.samples()) {
            *d += c * v;
        }
    }
    let u = poisson_extend(f, &dyadic_heights(1.0, g.levels() + 2))?;
    let poisson = tangential_max(&u, &ApproachRegionSpec::new(params.beta, 1.0, 1.0)?)?;
    let hardy_littlewood = hl_max(f, params.r)?;
    let total: Vec<f64> = dilated
        .iter()
        .zip(poisson.samples())
        .zip(hardy_littlewood.samples())
        .map(|((d, a), b)| d + weight_sum * (a + b))
        .collect();
    Ok(CompositeParts {
        dilated: GridFunction::new(g, dilated)?,
        poisson,
        hardy_littlewood,
        weight_sum,
        total: GridFunction::new(g, total)?,
    })
}

pub fn composite_max(f: &GridFunction, params: &CompositeParams) -> Result<GridFunction> {
    Ok(composite_max_parts(f, params)?.total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn brute_tangential(u: &HalfSpaceField, spec: &ApproachRegionSpec) -> Vec<f64> {
        let g = *u.grid();
        (0..g.len())
            .map(|x0| {
                let c = g.coords(x0);
                let mut m = 0.0f64;
                for (k, &t) in u.heights().iter().enumerate() {
                    if t > spec.t_max {
                        continue;
                    }
                    for i in 0..g.len() {
                        if region_contains(spec, &g, &c[..g.dim()], t, &g.coords(i)[..g.dim()]) {
                            m = m.max(u.slice(k)[i].abs());
                        }
                    }
                }
                m
            })
            .collect()
    }

    #[test]
    fn region_examples() {
        let g = make_grid(1, 10, 1.0).unwrap();
        let s = ApproachRegionSpec::new(0.5, 1.0, 1.0).unwrap();
        assert!(region_contains(&s, &g, &[0.0], 0.04, &[0.1]));
        assert!(!region_contains(&s, &g, &[0.0], 0.04, &[0.3]));
        let cone = ApproachRegionSpec::new(1.0, 1.0, 1.0).unwrap();
        assert!(!region_contains(&cone, &g, &[0.0], 0.04, &[0.1]));
        // wrap-around metric
        assert!(region_contains(&s, &g, &[0.0], 0.04, &[0.95]));
        assert!(ApproachRegionSpec::new(0.0, 1.0, 1.0).is_err());
        assert!(ApproachRegionSpec::new(0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn window_max_matches_brute_force() {
        let a: Vec<f64> = (0..37).map(|i| ((i * 7919) % 23) as f64).collect();
        for m in [0usize, 1, 3, 10, 18, 40] {
            let mut out = vec![0.0; a.len()];
            circular_window_max(&a, m, &mut out);
            for i in 0..a.len() {
                let n = a.len() as i64;
                let want = (-(m as i64)..=m as i64)
                    .map(|d| a[(i as i64 + d).rem_euclid(n) as usize])
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(out[i], want);
            }
        }
    }

    #[test]
    fn tangential_matches_brute_force() {
        for (dim, lv) in [(1usize, 6u32), (2, 4)] {
            let g = make_grid(dim, lv, 1.0).unwrap();
            let f = GridFunction::from_fn(g, |x| {
                (6.0 * x[0]).sin() + if dim == 2 { (4.0 * PI * x[1]).cos() } else { 0.0 }
            })
            .unwrap();
            let u = poisson_extend(&f, &dyadic_heights(1.0, lv + 2)).unwrap();
            for beta in [0.3, 0.5, 1.0] {
                let s = ApproachRegionSpec::new(beta, 0.7, 0.6).unwrap();
                let fast = tangential_max(&u, &s).unwrap();
                let slow = brute_tangential(&u, &s);
                for (a, b) in fast.samples().iter().zip(&slow) {
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn tangential_examples() {
        let g = make_grid(1, 8, 1.0).unwrap();
        let u = poisson_extend(&GridFunction::constant(g, -1.5), &dyadic_heights(1.0, 10)).unwrap();
        let s = ApproachRegionSpec::new(0.5, 1.0, 1.0).unwrap();
        assert!(tangential_max(&u, &s).unwrap().samples().iter().all(|v| (v - 1.5).abs() < 1e-12));

        // e^{-2πt} cos(2πx) at x₀ = 0 approaches 1 under refinement
        let mut prev = 0.0;
        for lv in [6u32, 8, 10] {
            let g = make_grid(1, lv, 1.0).unwrap();
            let f = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos()).unwrap();
            let u = poisson_extend(&f, &dyadic_heights(1.0, lv + 2)).unwrap();
            let cone = ApproachRegionSpec::new(1.0, 1.0, 1.0).unwrap();
            let v = tangential_max(&u, &cone).unwrap().samples()[0];
            assert!(v <= 1.0 && v >= prev);
            prev = v;
        }
        assert!(prev > 0.99);
    }

    #[test]
    fn tangential_monotone_in_beta() {
        let g = make_grid(1, 9, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| (x[0] - 0.3).abs().powf(0.3)).unwrap();
        let u = poisson_extend(&f, &dyadic_heights(1.0, 11)).unwrap();
        let a = tangential_max(&u, &ApproachRegionSpec::new(0.4, 1.0, 1.0).unwrap()).unwrap();
        let b = tangential_max(&u, &ApproachRegionSpec::new(0.8, 1.0, 1.0).unwrap()).unwrap();
        assert!(a.samples().iter().zip(b.samples()).all(|(x, y)| x >= y));
    }

    #[test]
    fn coverage_errors() {
        let g = make_grid(1, 6, 1.0).unwrap();
        let u = poisson_extend(&GridFunction::constant(g, 1.0), &[0.5, 0.25]).unwrap();
        let tiny = ApproachRegionSpec::new(1.0, 1e-3, 1.0).unwrap();
        assert!(matches!(tangential_max(&u, &tiny), Err(Error::Coverage(_))));
        let low = ApproachRegionSpec::new(1.0, 1.0, 0.3).unwrap();
        assert!(matches!(tangential_max(&u, &low), Err(Error::Coverage(_))));
        assert!(matches!(dilated_mitigated_max(&u, 2.0, 0.5, 3), Err(Error::Coverage(_))));
    }

    #[test]
    fn argmax_attains_value() {
        let g = make_grid(1, 7, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).sin()).unwrap();
        let u = poisson_extend(&f, &dyadic_heights(1.0, 9)).unwrap();
        let s = ApproachRegionSpec::new(0.5, 1.0, 1.0).unwrap();
        let (v, w) = tangential_max_with_argmax(&u, &s).unwrap();
        for (x0, wit) in w.iter().enumerate() {
            assert_eq!(u.slice(wit.k)[wit.index].abs(), v.samples()[x0]);
            let t = u.heights()[wit.k];
            assert!(region_contains(&s, &g, &g.coords(x0)[..1], t, &g.coords(wit.index)[..1]));
        }
        // constant data: every sample ties, the lowest (k, i) wins
        let c = poisson_extend(&GridFunction::constant(g, 1.0), &dyadic_heights(1.0, 9)).unwrap();
        let (_, w) = tangential_max_with_argmax(&c, &s).unwrap();
        assert_eq!(w[5].k, 0);
        assert_eq!(w[5].index, 0);
    }

    #[test]
    fn mitigated_examples() {
        let g = make_grid(1, 8, 1.0).unwrap();
        let hs = dyadic_heights(1.0, 10);
        let u = poisson_extend(&GridFunction::constant(g, 2.0), &hs).unwrap();
        let m = mitigated_max(&u, 2.0, 0.5).unwrap();
        assert!(m.samples().iter().all(|v| (v - 2.0).abs() < 1e-12));
        let hs = dyadic_heights(0.5, 10);
        let u = poisson_extend(&GridFunction::constant(g, 2.0), &hs).unwrap();
        let m = mitigated_max(&u, 2.0, 0.5).unwrap();
        assert!(m.samples().iter().all(|v| (v - 2.0 * 0.5f64.powf(0.25)).abs() < 1e-12));

        let f = GridFunction::from_fn(g, |x| (x[0] * 9.0).sin()).unwrap();
        let u = poisson_extend(&f, &dyadic_heights(1.0, 10)).unwrap();
        let a = mitigated_max(&u, 2.0, 1.0).unwrap();
        let b = tangential_max(&u, &ApproachRegionSpec::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dilated_j0_and_constant() {
        let g = make_grid(1, 8, 4.0).unwrap();
        let hs = dyadic_heights(1.0, 14);
        let f = GridFunction::constant(g, 3.0);
        let v = average_field(&f, &hs, 1.0).unwrap();
        // constant: 2^{j/p} sup_t t^{(1-β)/p} * 3 over the scanned t
        for j in 0..4u32 {
            let m = dilated_mitigated_max(&v, 2.0, 0.5, j).unwrap();
            let cutoff = dilation_cutoff(0.5, j);
            let best = hs
                .iter()
                .map(|s| s / 2f64.powi(j as i32))
                .filter(|&t| t < cutoff)
                .fold(0.0f64, f64::max);
            let want = 3.0 * 2f64.powf(j as f64 / 2.0) * best.powf(0.25);
            assert!(m.samples().iter().all(|x| (x - want).abs() < 1e-12));
        }
        // j = 0 agrees with mitigated_max once the t = 1 slice is dropped
        let h2 = dyadic_heights(0.5, 14);
        let v = average_field(&GridFunction::from_fn(g, |x| x[0].sin()).unwrap(), &hs, 1.0).unwrap();
        let v2 = average_field(&GridFunction::from_fn(g, |x| x[0].sin()).unwrap(), &h2, 1.0).unwrap();
        assert_eq!(
            dilated_mitigated_max(&v, 2.0, 0.5, 0).unwrap(),
            mitigated_max(&v2, 2.0, 0.5).unwrap()
        );
    }

    #[test]
    fn fractional_examples() {
        let g = make_grid(1, 9, 1.0).unwrap();
        let c = GridFunction::constant(g, 0.7);
        for s in [1.0, 2.0, 3.0] {
            assert!(fractional_power_max(&c, s, 0.0)
                .unwrap()
                .samples()
                .iter()
                .all(|v| (v - 0.7).abs() < 1e-12));
        }
        let ind = GridFunction::from_fn(g, |x| if g.wrap(x[0]).abs() < 0.1 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(hl_max(&ind, 1.0).unwrap().samples()[0], 1.0);
        let f = GridFunction::from_fn(g, |x| (x[0] * 13.0).sin() + 0.2).unwrap();
        let a = fractional_power_max(&f, 1.0, 0.0).unwrap();
        let b = fractional_power_max(&f, 2.5, 0.0).unwrap();
        assert!(a.samples().iter().zip(b.samples()).all(|(x, y)| *x <= y + 1e-12));
        assert!(fractional_power_max(&f, 0.5, 0.0).is_err());
        assert!(fractional_power_max(&f, 1.0, 1.0).is_err());
    }

    #[test]
    fn composite_examples() {
        let g = make_grid(1, 8, 4.0).unwrap();
        let params = CompositeParams {
            p: 2.0,
            r: 1.5,
            beta: 0.5,
            alpha_l: 0.5,
            j_max: 6,
        };
        let z = composite_max(&GridFunction::zeros(g), &params).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let parts = composite_max_parts(&GridFunction::constant(g, 2.0), &params).unwrap();
        // constant data: the sharp maximal term vanishes, the others equal c
        assert!(parts.dilated.max_abs() < 1e-10);
        let want = parts.weight_sum * 4.0;
        assert!(parts.total.samples().iter().all(|v| (v - want).abs() < 1e-9));
        let bad = CompositeParams { r: 2.5, ..params };
        assert!(composite_max(&GridFunction::zeros(g), &bad).is_err());
    }
}
